use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(fo2kit_py::fo2kit_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("fk", module).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn structures_round_trip() {
    run(c"
m = fk.Structure(3, [('E', [(0, 1), (1, 2), (2, 0)])], name='C3')
assert m == fk.fixture('c3')
assert fk.Structure.from_fos(m.to_fos()) == m
assert m.with_relation('R', [(0, 0)]).signature() == ['E', 'R']
assert len(m) == 3 and 'C3' in repr(m)
");
}

#[test]
fn errors_are_typed() {
    run(c"
c3 = fk.fixture('C3')
for bad in (lambda: fk.Formula('E(x,'), lambda: fk.fixture('nope'), lambda: c3.relation('Q'),
            lambda: fk.Structure(0), lambda: fk.refine([c3]).pair_color(0, 5)):
    try:
        bad()
    except fk.Fo2Error:
        pass
    else:
        raise AssertionError('no error')
try:
    fk.solve('theory:\\nsigma:\\nA x . A y . P(x,y)\\ndefines: P\\n', fk.fixture('C7'), 'brute')
except fk.BudgetExceeded:
    pass
else:
    raise AssertionError('brute search on 7 elements must exceed the size cap')
assert issubclass(fk.BudgetExceeded, fk.Fo2Error)
");
}

#[test]
fn companion_and_flip() {
    run(c"
m = fk.fixture('C3C7')
comp = fk.build_companion(m)
assert comp.report['verified'] and comp.structure.size == 9
assert fk.equiv2(m, comp.structure)
assert comp.shift(0) == list(range(9))
far = [(a, (a + 2) % 9) for a in range(9)]
out = fk.flip(comp.structure, far)
assert out['case'] == 'InverseSwap' and out['violations'] == []
assert sorted(map(tuple, out['flipped'])) == sorted((b, a) for a, b in far)
");
}

#[test]
fn counterexample_model() {
    run(c"
adn = fk.build_adn_model()
assert adn.signature() == ['B', 'G', 'R', 'S']
assert [len(adn.relation(r)) for r in 'SGRB'] == [45, 45, 135, 135]
assert fk.refine([adn]).diagonal_colors() == [0]
assert len(fk.orbits(adn)) == 9
");
}
