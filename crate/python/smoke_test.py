"""Smoke test for the fo2kit_py extension module.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import fo2kit_py as fk


def main():
    c3 = fk.fixture("C3")
    c7 = fk.fixture("C7")
    c3c7 = fk.fixture("C3C7")
    assert c3.size == 3 and c3.relation("E") == [(0, 1), (1, 2), (2, 0)]
    assert fk.Structure.from_fos(c3.to_fos()) == c3

    table = fk.refine([c3])
    assert table.realized_colors() == [0, 1, 2]
    chi = table.characteristic_formula(1)
    assert chi.satisfying_pairs(c3) == c3.relation("E")

    assert fk.Formula("A x . E y . E(x,y)").evaluate(c3)
    assert not fk.Formula("E(x,y)").evaluate(c3, x=1, y=0)
    assert fk.equiv2(c7, c3c7) and not fk.equiv2(c3, c7)
    assert not fk.equiv3(c7, c3c7)

    iso = fk.build_iso2(c7, c3c7)
    assert iso is not None and iso.verify(c7, c3c7) == []

    assert fk.orbits(c3c7) == [[0, 1, 2], [3, 4, 5, 6, 7, 8, 9]]
    check = fk.check_transitive(c3c7)
    assert not check["holds"] and check["witness"] == [0, 3]
    assert fk.find_automorphism(c3c7, [(0, 3)]) is None

    comp = fk.build_companion(c3c7)
    report = comp.report
    assert report["verified"] and report["group_modulus"] == 9
    assert fk.check_transitive(comp.structure)["holds"]
    assert comp.witness.verify(c3c7, comp.structure) == []

    assert fk.synthesize(c3, [(0, 1)]) is None
    assert fk.cuts_types(c3, [(0, 1)]) == 1
    phi = fk.synthesize(c3, [(0, 2), (1, 0), (2, 1)])
    assert phi.satisfying_pairs(c3) == [(0, 2), (1, 0), (2, 1)]

    flipped = fk.flip(c3, [(0, 1)])
    assert flipped["flipped"] == [[1, 2], [2, 0]] and flipped["violations"]

    problem = "theory:\nsigma:\nA x . A y . (P(x,y) <-> E(y,x))\ndefines: P\n"
    assert fk.solve(problem, c3, "brute")["classification"] == "unique"

    succ = [(a, (a + d) % 7) for a in range(7) for d in (1, 2, 3)]
    moved = fk.transfer(c3, fk.build_companion(c3).structure, succ)
    assert moved["pairs"] == [[0, 1], [1, 2], [2, 0]] and moved["violations"] == []

    try:
        fk.equiv3(c3, c3, budget=10)
    except fk.BudgetExceeded:
        pass
    else:
        raise AssertionError("budget not enforced")

    adn = fk.build_adn_model()
    assert adn.size == 45 and len(adn.relation("R")) == 135
    assert len(fk.random_corpus(count=5)) == 5
    print("fo2kit_py smoke test passed")


if __name__ == "__main__":
    main()
