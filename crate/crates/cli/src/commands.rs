use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use fo2kit::adn::{build_adn_model, ra_closure, verify_adn_with_budget, AdnError};
use fo2kit::automorphism::{check_31_transitive, check_transitive, find_automorphism, orbits};
use fo2kit::beth::{
    cuts_types, flip_preserves_equivalence, flip_relation, search_solutions, synthesize_explicit, transfer_relation,
    BethError, Classification, CutContext, DefinitionProblem, SearchMode, BRUTE_MAX_SIZE,
};
use fo2kit::companion::{build_companion, check_homogeneous, CompanionError};
use fo2kit::corpus::corpus;
use fo2kit::equiv::{build_iso2, equiv2, equiv3, verify_iso2, IsoReport, PartialIso2};
use fo2kit::formula::{dag_size, evaluate, evaluate_pairs, parse_formula, Assignment, Mode, Sub, Var};
use fo2kit::types::{type_view, CharacteristicBuilder, ColorTable};
use fo2kit::{refine_pairs, BinRel, FinStructure};
use serde_json::{json, Value};

use crate::args::{
    AutArgs, BethCommand, CheckArgs, Cli, Command, CompanionArgs, CounterexampleCommand, EvalArgs, Equiv2Args,
    Equiv3Args, IsoArgs, Property, SelftestArgs, TypesArgs,
};
use crate::failure::Failure;

/// What a successful run prints and how it exits.
pub struct Outcome {
    pub code: u8,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    fn decision(holds: bool, text: String, json: Value) -> Self {
        Outcome { code: if holds { 0 } else { 1 }, text, json }
    }
}

type CmdResult = Result<Outcome, Failure>;

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Types(a) => types(a),
        Command::Equiv2(a) => equiv2_cmd(a),
        Command::Equiv3(a) => equiv3_cmd(a),
        Command::Iso(a) => iso(a),
        Command::Companion(a) => companion(a),
        Command::Check(a) => check(a),
        Command::Aut(a) => aut(a),
        Command::Eval(a) => eval(a),
        Command::Beth(c) => beth(c),
        Command::Counterexample(c) => counterexample(c, cli.json),
        Command::Selftest(a) => selftest(a, cli.seed),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(anyhow!(e).context(format!("reading {}", path.display()))))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::input(anyhow!(e).context(format!("writing {}", path.display()))))
}

fn load(path: &Path) -> Result<FinStructure, Failure> {
    let text = read(path)?;
    FinStructure::parse_fos(&text).map_err(|e| Failure::from(e).context(format!("parsing {}", path.display())))
}

/// Splits `name` off a model, returning the rest and the relation.
fn split(m: &FinStructure, name: &str) -> Result<(FinStructure, BinRel), Failure> {
    m.without_relation(name)
        .ok_or_else(|| Failure::input(anyhow!("relation `{name}` not found in {}", m.name())))
}

fn pairs_of(r: &BinRel) -> Vec<(usize, usize)> {
    r.pairs().collect()
}

fn pairs_text(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(", ")
}

fn formula_text(f: &Sub, depth: usize, print_depth: usize) -> (String, Value) {
    if depth <= print_depth {
        let s = f.to_string();
        (s.clone(), json!({ "depth": depth, "formula": s }))
    } else {
        let size = dag_size(f);
        (format!("depth={depth} dag_size={size}"), json!({ "depth": depth, "dag_size": size }))
    }
}

fn report_lines(report: &IsoReport, out: &mut String) {
    for v in report.summary() {
        writeln!(out, "violation {:?} at {:?}: {}", v.clause, v.witness, v.detail).unwrap();
    }
}

fn types(a: &TypesArgs) -> CmdResult {
    let m = load(&a.input)?;
    let table = refine_pairs(std::slice::from_ref(&m))?;
    let signature = m.signature();
    let mut text = String::new();
    let mut colors = Vec::new();
    let mut builder = CharacteristicBuilder::new(&table)?;
    for c in table.realized_colors(0) {
        let atomic = table.atomic(c)?.describe(&signature);
        let size = table.class_size(c);
        writeln!(text, "color {c} arity=2 size={size} atomic={atomic}").unwrap();
        let mut entry = json!({ "id": c, "arity": 2, "size": size, "atomic": atomic });
        if a.formulas {
            let f = builder.formula(c, table.rounds())?;
            let (s, v) = formula_text(&f, table.rounds(), a.print_depth);
            writeln!(text, "formula {c} {s}").unwrap();
            entry["characteristic"] = v;
        }
        colors.push(entry);
    }
    let mut json = json!({ "structure": m.name(), "rounds": table.rounds(), "colors": colors });
    if a.classes {
        let view = type_view(&table, 0)?;
        for (u, class) in view.classes().iter().enumerate() {
            let items: Vec<String> = class.iter().map(usize::to_string).collect();
            writeln!(text, "class {u} color={} elements={}", view.identity_of(u), items.join(",")).unwrap();
        }
        json["classes"] = json!(view.classes());
    }
    Ok(Outcome { code: 0, text, json })
}

fn equiv2_cmd(a: &Equiv2Args) -> CmdResult {
    let (m, n) = (load(&a.left)?, load(&a.right)?);
    m.check_signature(&n)?;
    let equivalent = equiv2(&m, &n)?;
    let mut json = json!({ "equivalent": equivalent });
    if let Some(path) = &a.witness {
        if let Some(iso) = build_iso2(&m, &n)? {
            write(path, &iso.to_text())?;
            json["witness"] = json!(path.display().to_string());
        }
    }
    let text = format!("{}\n", if equivalent { "2-equivalent" } else { "not 2-equivalent" });
    Ok(Outcome::decision(equivalent, text, json))
}

fn equiv3_cmd(a: &Equiv3Args) -> CmdResult {
    let (m, n) = (load(&a.left)?, load(&a.right)?);
    m.check_signature(&n)?;
    let equivalent = equiv3(&m, &n, a.budget)?;
    let text = format!("{}\n", if equivalent { "3-equivalent" } else { "not 3-equivalent" });
    Ok(Outcome::decision(equivalent, text, json!({ "equivalent": equivalent })))
}

fn iso(a: &IsoArgs) -> CmdResult {
    let (m, n) = (load(&a.left)?, load(&a.right)?);
    let iso = PartialIso2::parse_text(&read(&a.witness)?, m.size(), n.size())?;
    let report = verify_iso2(&iso, &m, &n);
    let mut text = format!(
        "{} element links, {} pair links, {} violations\n",
        iso.num_element_links(),
        iso.num_pair_links(),
        report.violations.len()
    );
    report_lines(&report, &mut text);
    let json = json!({
        "valid": report.is_ok(),
        "element_links": iso.num_element_links(),
        "pair_links": iso.num_pair_links(),
        "violations": report.violations,
    });
    Ok(Outcome::decision(report.is_ok(), text, json))
}

fn companion(a: &CompanionArgs) -> CmdResult {
    let m = load(&a.input)?;
    let (result, report) = match build_companion(&m) {
        Ok(r) => {
            let report = r.report.clone();
            (Some(r), report)
        }
        Err(CompanionError::Verification(message, report)) => {
            eprintln!("companion failed verification: {message}");
            (None, *report)
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(r) = &result {
        write(&a.output, &r.companion.to_fos())?;
        if let Some(path) = &a.witness {
            write(path, &r.witness.to_text())?;
        }
    }
    let json = serde_json::to_value(&report)?;
    if let Some(path) = &a.report {
        write(path, &(serde_json::to_string_pretty(&json)? + "\n"))?;
    }
    let text = format!(
        "companion of {}: {} elements, group Z{}, classes {:?}, t_max {}, verified {}\n",
        m.name(),
        report.companion_size,
        report.group_modulus,
        report.class_sizes,
        report.t_max,
        report.verified
    );
    Ok(Outcome::decision(report.verified, text, json))
}

fn check(a: &CheckArgs) -> CmdResult {
    let m = load(&a.input)?;
    let (holds, text, json) = match a.property {
        Property::Transitive | Property::ThreeOneTransitive => {
            let (c, label) = if a.property == Property::Transitive {
                (check_transitive(&m), "transitive")
            } else {
                (check_31_transitive(&m, a.budget)?, "3,1-transitive")
            };
            let text = match c.witness {
                None => format!("{label} ({} orbits)\n", c.orbit_count),
                Some((x, y)) => format!(
                    "not {label}: elements {x} and {y} share a type but lie in different orbits ({} orbits)\n",
                    c.orbit_count
                ),
            };
            (c.holds, text, serde_json::to_value(&c)?)
        }
        Property::Homogeneous => {
            let c = check_homogeneous(&m);
            let text = match c.witness {
                None => "2-homogeneous\n".to_string(),
                Some((x, y, z)) => {
                    format!("not 2-homogeneous: {x} and {y} share a type but no partner of {y} matches ({x},{z})\n")
                }
            };
            (c.holds, text, serde_json::to_value(&c)?)
        }
    };
    Ok(Outcome::decision(holds, text, json))
}

fn aut(a: &AutArgs) -> CmdResult {
    let m = load(&a.input)?;
    for &(x, y) in &a.maps {
        if x.max(y) >= m.size() {
            return Err(Failure::input(anyhow!("map {x}:{y} out of range for universe of size {}", m.size())));
        }
    }
    let orbit_list = orbits(&m);
    let mut text = String::new();
    let mut json = json!({ "orbit_count": orbit_list.len() });
    if a.orbits {
        for o in &orbit_list {
            let items: Vec<String> = o.iter().map(usize::to_string).collect();
            writeln!(text, "orbit {}", items.join(",")).unwrap();
        }
        json["orbits"] = json!(orbit_list);
    }
    let holds = if a.maps.is_empty() {
        let c = check_transitive(&m);
        writeln!(text, "{}", if c.holds { "transitive" } else { "not transitive" }).unwrap();
        json["transitive"] = json!(c.holds);
        c.holds
    } else {
        let found = find_automorphism(&m, &a.maps);
        match &found {
            Some(p) => {
                let items: Vec<String> = p.images().iter().map(usize::to_string).collect();
                writeln!(text, "automorphism {}", items.join(" ")).unwrap();
            }
            None => writeln!(text, "no automorphism extends the given map").unwrap(),
        }
        json["automorphism"] = json!(found.as_ref().map(|p| p.images()));
        found.is_some()
    };
    Ok(Outcome::decision(holds, text, json))
}

fn eval(a: &EvalArgs) -> CmdResult {
    let m = load(&a.input)?;
    let mode = if a.fo3 { Mode::Fo3 } else { Mode::Fo2 };
    let f = parse_formula(&a.formula, mode)?;
    if a.pairs {
        let truth = evaluate_pairs(&m, &f)?;
        let n = m.size();
        let hits: Vec<(usize, usize)> = (0..n * n).filter(|&i| truth[i]).map(|i| (i / n, i % n)).collect();
        let text = format!("{} pairs: {}\n", hits.len(), pairs_text(&hits));
        return Ok(Outcome::decision(!hits.is_empty(), text, json!({ "formula": f.to_string(), "pairs": hits })));
    }
    let mut asg = Assignment::empty();
    for &(v, value) in &a.assign {
        let var = match v {
            'x' => Var::X,
            'y' => Var::Y,
            _ => Var::Z,
        };
        asg = asg.with(var, value);
    }
    let value = evaluate(&m, &f, &asg)?;
    Ok(Outcome::decision(value, format!("{value}\n"), json!({ "formula": f.to_string(), "value": value })))
}

fn beth(c: &BethCommand) -> CmdResult {
    match c {
        BethCommand::Solve { problem, model, mode } => {
            let p = DefinitionProblem::parse(&read(problem)?)
                .map_err(|e| Failure::from(e).context(format!("parsing {}", problem.display())))?;
            let m = load(model)?;
            let mode = match mode {
                crate::args::Mode::Brute => SearchMode::Brute,
                crate::args::Mode::TypeUnion => SearchMode::TypeUnion,
            };
            if mode == SearchMode::TypeUnion && !check_transitive(&m).holds {
                let brute = if m.size() <= BRUTE_MAX_SIZE { "" } else { "; brute mode is unavailable at this size" };
                eprintln!("warning: {} is not transitive, so solutions outside unions of pair classes are not searched{brute}", m.name());
            }
            let set = match search_solutions(&p, &m, mode) {
                Err(BethError::TheoryViolated(i)) => {
                    let text = format!("the model violates theory sentence {}\nclassification none\n", i + 1);
                    return Ok(Outcome::decision(false, text, json!({ "classification": "none", "theory_violated": i + 1 })));
                }
                other => other?,
            };
            let mut text = format!("{} candidates, {} solutions\n", set.candidates, set.solutions.len());
            for s in &set.solutions {
                writeln!(text, "solution {{{}}}", pairs_text(s)).unwrap();
            }
            writeln!(text, "classification {}", set.classification).unwrap();
            writeln!(text, "note: {}", set.note).unwrap();
            let unique = set.classification == Classification::Unique;
            Ok(Outcome::decision(unique, text, serde_json::to_value(&set)?))
        }
        BethCommand::Synth { model, rel, print_depth } => {
            let (m, r) = split(&load(model)?, rel)?;
            match synthesize_explicit(&m, &r)? {
                Some(phi) => {
                    let rounds = refine_pairs(std::slice::from_ref(&m))?.rounds();
                    let (s, v) = formula_text(&phi, rounds, *print_depth);
                    let text = format!("{rel}(x,y) <-> {s}\n");
                    Ok(Outcome::decision(true, text, json!({ "relation": rel, "definable": true, "definition": v })))
                }
                None => {
                    let color = cuts_types(&m, &r)?;
                    let text = format!("{rel} cuts color {}; no explicit definition\n", color.unwrap_or_default());
                    Ok(Outcome::decision(false, text, json!({ "relation": rel, "definable": false, "cut_color": color })))
                }
            }
        }
        BethCommand::Flip { model, rel, color, output } => {
            let full = load(model)?;
            let (m, r) = split(&full, rel)?;
            let ctx = match color {
                Some(t) => CutContext::with_color(&m, &r, *t)?,
                None => CutContext::new(&m, &r)?,
            };
            if !ctx.is_cut() {
                let text = match ctx.color {
                    Some(t) => format!("{rel} does not cut color {t}\n"),
                    None => format!("{rel} cuts no color\n"),
                };
                return Ok(Outcome::decision(false, text, json!({ "relation": rel, "cut": false, "color": ctx.color })));
            }
            let t = ctx.color.expect("cut color");
            let case = ctx.flip_case()?;
            let s = flip_relation(&ctx)?;
            if let Some(path) = output {
                let (base, _) = split(&full, rel)?;
                write(path, &base.expand_with_relation(rel, &s)?.to_fos())?;
            }
            let mut text = format!("flip of {rel} on color {t} ({case:?}): {{{}}}\n", pairs_text(&pairs_of(&s)));
            let mut json = json!({
                "relation": rel,
                "cut": true,
                "color": t,
                "case": case,
                "flipped": pairs_of(&s),
            });
            let holds = match flip_preserves_equivalence(&m, &r, &s, t) {
                Ok(report) => {
                    writeln!(text, "{} violations", report.violations.len()).unwrap();
                    report_lines(&report, &mut text);
                    json["violations"] = json!(report.violations);
                    report.is_ok()
                }
                Err(e @ BethError::NotTransitive(..)) => {
                    writeln!(text, "equivalence not checked: {e}").unwrap();
                    json["violations"] = Value::Null;
                    json["note"] = json!(e.to_string());
                    false
                }
                Err(e) => return Err(e.into()),
            };
            json["preserves_equivalence"] = json!(holds);
            Ok(Outcome::decision(holds, text, json))
        }
        BethCommand::Transfer { m, mbar, rel, output } => {
            let m = load(m)?;
            let (mbar, rbar) = split(&load(mbar)?, rel)?;
            m.check_signature(&mbar)?;
            match transfer_relation(&m, &mbar, &rbar) {
                Ok(tr) => {
                    if let Some(path) = output {
                        write(path, &m.expand_with_relation(rel, &tr.relation)?.to_fos())?;
                    }
                    let mut text = format!("{rel} on {}: {{{}}}\n", m.name(), pairs_text(&pairs_of(&tr.relation)));
                    writeln!(text, "{} violations", tr.report.violations.len()).unwrap();
                    report_lines(&tr.report, &mut text);
                    let json = json!({
                        "relation": rel,
                        "pairs": pairs_of(&tr.relation),
                        "violations": tr.report.violations,
                    });
                    Ok(Outcome::decision(tr.report.is_ok(), text, json))
                }
                Err(e @ (BethError::NotEquivalent | BethError::CutsTypes(_))) => {
                    Ok(Outcome::decision(false, format!("{e}\n"), json!({ "relation": rel, "error": e.to_string() })))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn counterexample(c: &CounterexampleCommand, json_output: bool) -> CmdResult {
    match c {
        CounterexampleCommand::Build { output } => {
            let m = build_adn_model();
            write(output, &m.to_fos())?;
            let text = format!("wrote {} ({} elements)\n", output.display(), m.size());
            Ok(Outcome { code: 0, text, json: json!({ "output": output.display().to_string(), "size": m.size() }) })
        }
        CounterexampleCommand::Verify { report, budget, closure, cap } => {
            let (ok, r, failure) = match verify_adn_with_budget(*budget) {
                Ok(r) => (true, r, None),
                Err(AdnError::CheckFailed(message, r)) => (false, *r, Some(message)),
                Err(e) => return Err(e.into()),
            };
            let mut json = serde_json::to_value(&r)?;
            let mut text = format!(
                "sizes: universe {} S {} G {} R {} B {}\ndiagonal pair colors {}\ndiagonal triple colors {}\norbits {}\n",
                r.sizes.universe,
                r.sizes.s,
                r.sizes.g,
                r.sizes.r,
                r.sizes.b,
                r.diag_color_count_2,
                r.diag_color_count_3,
                r.orbit_count
            );
            for line in &r.conclusions {
                writeln!(text, "conclusion: {line}").unwrap();
            }
            for line in &r.unchecked {
                writeln!(text, "not checked here: {line}").unwrap();
            }
            if let Some(message) = &failure {
                writeln!(text, "check failed: {message}").unwrap();
                json["failure"] = json!(message);
            }
            let mut code = if ok { 0 } else { 1 };
            if *closure {
                let m = build_adn_model();
                let gens: Vec<BinRel> = m.relations().map(|(_, r)| r.clone()).collect();
                let cl = ra_closure(m.size(), &gens, *cap);
                writeln!(text, "closure: {} elements, complete {}", cl.len(), cl.complete).unwrap();
                json["closure"] = json!({ "elements": cl.len(), "complete": cl.complete, "cap": cl.cap });
                if !cl.complete && code == 0 {
                    code = 3;
                }
            }
            if let (true, Some(path)) = (json_output, report) {
                write(path, &(serde_json::to_string_pretty(&json)? + "\n"))?;
                writeln!(text, "wrote {}", path.display()).unwrap();
            }
            Ok(Outcome { code, text, json })
        }
    }
}

fn selftest(a: &SelftestArgs, seed: u64) -> CmdResult {
    let structures = corpus(seed, a.count);
    let mut failures: Vec<String> = Vec::new();
    let mut tally = [0usize; 4];
    for m in &structures {
        match build_companion(m) {
            Ok(r) if r.report.verified && check_transitive(&r.companion).holds => tally[0] += 1,
            Ok(_) => failures.push(format!("{}: companion not verified", m.name())),
            Err(e) => failures.push(format!("{}: companion: {e}", m.name())),
        }
        if check_homogeneous(m).holds {
            tally[1] += 1;
        } else {
            failures.push(format!("{}: not 2-homogeneous", m.name()));
        }
        let reversed: Vec<usize> = (0..m.size()).rev().collect();
        match equiv2(m, &m.permuted(&reversed)) {
            Ok(true) => tally[2] += 1,
            _ => failures.push(format!("{}: not 2-equivalent to a permuted copy", m.name())),
        }
        match characteristic_exact(m) {
            Ok(true) => tally[3] += 1,
            Ok(false) => failures.push(format!("{}: characteristic formula misclassifies", m.name())),
            Err(e) => failures.push(format!("{}: {e}", m.name())),
        }
    }
    let n = structures.len();
    let mut text = format!(
        "seed {seed}, {n} structures\ncompanions {}/{n}\nhomogeneous {}/{n}\npermutation invariance {}/{n}\ncharacteristic formulas {}/{n}\n",
        tally[0], tally[1], tally[2], tally[3]
    );
    for f in &failures {
        writeln!(text, "failure: {f}").unwrap();
    }
    let json = json!({
        "seed": seed,
        "count": n,
        "companions": tally[0],
        "homogeneous": tally[1],
        "permutation_invariance": tally[2],
        "characteristic_formulas": tally[3],
        "failures": failures,
    });
    Ok(Outcome::decision(failures.is_empty(), text, json))
}

fn characteristic_exact(m: &FinStructure) -> anyhow::Result<bool> {
    let table: ColorTable = refine_pairs(std::slice::from_ref(m)).context("refinement")?;
    let mut builder = CharacteristicBuilder::new(&table)?;
    for c in table.realized_colors(0) {
        let f = builder.formula(c, table.rounds())?;
        let truth = evaluate_pairs(m, &f)?;
        if truth.iter().zip(table.colors(0)).any(|(&hit, &col)| hit != (col == c)) {
            return Ok(false);
        }
    }
    Ok(true)
}
