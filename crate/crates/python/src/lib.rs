//! Python bindings: structures, types, equivalence, automorphisms,
//! companions, definability tools and the 45-element counterexample.

use fo2kit::adn::{build_adn_model, verify_adn_with_budget, AdnError};
use fo2kit::automorphism::{check_31_transitive, check_transitive, find_automorphism, orbits, pair_orbits};
use fo2kit::beth::{
    cuts_types, flip_preserves_equivalence, flip_relation, search_solutions, synthesize_explicit, transfer_relation,
    BethError, CutContext, DefinitionProblem, SearchMode,
};
use fo2kit::companion::{build_companion, check_homogeneous, CompanionError, CompanionResult};
use fo2kit::equiv::{build_iso2, equiv2, equiv3, verify_iso2, PartialIso2};
use fo2kit::formula::{evaluate_pairs, parse_formula, Assignment, Formula, Mode, Var};
use fo2kit::types::{CharacteristicBuilder, ColorTable, RefineError, DEFAULT_TRIPLE_BUDGET};
use fo2kit::{corpus, fixtures, refine_pairs, refine_triples, BinRel, FinStructure};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(fo2kit_py, Fo2Error, PyException, "Invalid input or failed construction.");
create_exception!(fo2kit_py, BudgetExceeded, Fo2Error, "A tuple budget or search cap was exceeded.");

fn err(e: impl std::fmt::Display) -> PyErr {
    Fo2Error::new_err(e.to_string())
}

fn refine_err(e: RefineError) -> PyErr {
    match e {
        RefineError::BudgetExceeded { .. } => BudgetExceeded::new_err(e.to_string()),
        _ => err(e),
    }
}

fn beth_err(e: BethError) -> PyErr {
    match e {
        BethError::Refine(r) => refine_err(r),
        BethError::TooLarge { .. } | BethError::CapExceeded { .. } => BudgetExceeded::new_err(e.to_string()),
        _ => err(e),
    }
}

/// Converts a serializable report into plain Python dicts and lists.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn relation(size: usize, pairs: Vec<(usize, usize)>) -> PyResult<BinRel> {
    BinRel::from_pairs(size, pairs).map_err(err)
}

type NamedPairs = (String, Vec<(usize, usize)>);

/// A finite structure with named binary relations over `0..size`.
#[pyclass(name = "Structure", frozen, eq, skip_from_py_object, module = "fo2kit_py")]
#[derive(Clone, PartialEq)]
pub struct PyStructure {
    inner: FinStructure,
}

impl From<FinStructure> for PyStructure {
    fn from(inner: FinStructure) -> Self {
        PyStructure { inner }
    }
}

#[pymethods]
impl PyStructure {
    #[new]
    #[pyo3(signature = (size, relations=None, name="anon"))]
    fn new(size: usize, relations: Option<Vec<NamedPairs>>, name: &str) -> PyResult<Self> {
        let mut m = FinStructure::new(name, size).map_err(err)?;
        for (rel, pairs) in relations.unwrap_or_default() {
            m = m.with_relation(&rel, pairs).map_err(err)?;
        }
        Ok(m.into())
    }

    /// Parses `.fos` text.
    #[staticmethod]
    fn from_fos(text: &str) -> PyResult<Self> {
        FinStructure::parse_fos(text).map(Into::into).map_err(err)
    }

    #[staticmethod]
    fn read(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        Self::from_fos(&text)
    }

    /// Canonical `.fos` text.
    fn to_fos(&self) -> String {
        self.inner.to_fos()
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn signature(&self) -> Vec<String> {
        self.inner.signature()
    }

    fn relation(&self, name: &str) -> PyResult<Vec<(usize, usize)>> {
        let r = self.inner.relation(name).ok_or_else(|| err(format!("no relation `{name}`")))?;
        Ok(r.pairs().collect())
    }

    /// A copy expanded with one more relation.
    fn with_relation(&self, name: &str, pairs: Vec<(usize, usize)>) -> PyResult<Self> {
        let r = relation(self.inner.size(), pairs)?;
        self.inner.expand_with_relation(name, &r).map(Into::into).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!("Structure(name={:?}, size={}, signature={:?})", self.inner.name(), self.inner.size(), self.inner.signature())
    }
}

/// A two-variable formula (or three-variable with `fo3=True`).
#[pyclass(name = "Formula", frozen, module = "fo2kit_py")]
pub struct PyFormula {
    inner: Formula,
}

#[pymethods]
impl PyFormula {
    #[new]
    #[pyo3(signature = (text, fo3=false))]
    fn new(text: &str, fo3: bool) -> PyResult<Self> {
        let mode = if fo3 { Mode::Fo3 } else { Mode::Fo2 };
        parse_formula(text, mode).map(|inner| PyFormula { inner }).map_err(err)
    }

    fn free_vars(&self) -> Vec<&'static str> {
        self.inner.free_vars().into_iter().map(Var::name).collect()
    }

    /// Truth in `structure` under the given values of free variables.
    #[pyo3(signature = (structure, x=None, y=None, z=None))]
    fn evaluate(&self, structure: &PyStructure, x: Option<usize>, y: Option<usize>, z: Option<usize>) -> PyResult<bool> {
        let mut asg = Assignment::empty();
        for (v, value) in [(Var::X, x), (Var::Y, y), (Var::Z, z)] {
            if let Some(a) = value {
                asg = asg.with(v, a);
            }
        }
        fo2kit::evaluate(&structure.inner, &self.inner, &asg).map_err(err)
    }

    /// Every pair `(x, y)` satisfying the formula.
    fn satisfying_pairs(&self, structure: &PyStructure) -> PyResult<Vec<(usize, usize)>> {
        let truth = evaluate_pairs(&structure.inner, &self.inner).map_err(err)?;
        let n = structure.inner.size();
        Ok((0..n * n).filter(|&i| truth[i]).map(|i| (i / n, i % n)).collect())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }
}

/// Stable pair coloring of one or more structures over a shared color space.
#[pyclass(name = "ColorTable", frozen, module = "fo2kit_py")]
pub struct PyColorTable {
    inner: ColorTable,
}

#[pymethods]
impl PyColorTable {
    #[getter]
    fn rounds(&self) -> usize {
        self.inner.rounds()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn num_colors(&self) -> usize {
        self.inner.num_colors()
    }

    /// Colors of structure `k`, row-major over its tuples.
    #[pyo3(signature = (k=0))]
    fn colors(&self, k: usize) -> PyResult<Vec<u32>> {
        self.check(k, &[])?;
        Ok(self.inner.colors(k).to_vec())
    }

    #[pyo3(signature = (k=0))]
    fn realized_colors(&self, k: usize) -> PyResult<Vec<u32>> {
        self.check(k, &[])?;
        Ok(self.inner.realized_colors(k))
    }

    #[pyo3(signature = (k=0))]
    fn diagonal_colors(&self, k: usize) -> PyResult<Vec<u32>> {
        self.check(k, &[])?;
        Ok(self.inner.diagonal_colors(k))
    }

    #[pyo3(signature = (a, b, k=0))]
    fn pair_color(&self, a: usize, b: usize, k: usize) -> PyResult<u32> {
        self.check(k, &[a, b])?;
        if self.inner.arity() != 2 {
            return Err(refine_err(RefineError::ArityMismatch { expected: 2, found: self.inner.arity() }));
        }
        Ok(self.inner.pair_color(k, a, b))
    }

    fn converse(&self, color: u32) -> PyResult<u32> {
        self.inner.converse(color).map_err(refine_err)
    }

    /// The characteristic formula of `color` at the stabilization depth.
    fn characteristic_formula(&self, color: u32) -> PyResult<PyFormula> {
        let mut b = CharacteristicBuilder::new(&self.inner).map_err(refine_err)?;
        let f = b.formula(color, self.inner.rounds()).map_err(refine_err)?;
        Ok(PyFormula { inner: (*f).clone() })
    }
}

impl PyColorTable {
    fn check(&self, k: usize, elements: &[usize]) -> PyResult<()> {
        let s = self.inner.structures().get(k).ok_or_else(|| refine_err(RefineError::UnknownStructure(k)))?;
        match elements.iter().find(|&&a| a >= s.size()) {
            Some(a) => Err(err(format!("element {a} out of range for universe of size {}", s.size()))),
            None => Ok(()),
        }
    }
}

/// A 2-partial isomorphism between two structures.
#[pyclass(name = "PartialIso2", frozen, module = "fo2kit_py")]
pub struct PyPartialIso2 {
    inner: PartialIso2,
}

#[pymethods]
impl PyPartialIso2 {
    /// Parses `e a b` / `p a a' b b'` lines.
    #[staticmethod]
    fn from_text(text: &str, m_size: usize, n_size: usize) -> PyResult<Self> {
        PartialIso2::parse_text(text, m_size, n_size).map(|inner| PyPartialIso2 { inner }).map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn element_links(&self) -> Vec<(usize, usize)> {
        self.inner.element_links().collect()
    }

    fn pair_links(&self) -> Vec<(usize, usize, usize, usize)> {
        self.inner.pair_links().collect()
    }

    /// Every violated clause, as dicts with `clause`, `witness` and `detail`.
    fn verify<'py>(&self, py: Python<'py>, m: &PyStructure, n: &PyStructure) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &verify_iso2(&self.inner, &m.inner, &n.inner).violations)
    }
}

/// A transitive companion with its witness and build report.
#[pyclass(name = "Companion", frozen, module = "fo2kit_py")]
pub struct PyCompanion {
    inner: CompanionResult,
}

#[pymethods]
impl PyCompanion {
    #[getter]
    fn structure(&self) -> PyStructure {
        self.inner.companion.clone().into()
    }

    #[getter]
    fn witness(&self) -> PyPartialIso2 {
        PyPartialIso2 { inner: self.inner.witness.clone() }
    }

    /// Companion element index to `(class, group element)`.
    #[getter]
    fn element_map(&self) -> Vec<(usize, usize)> {
        self.inner.element_map.clone()
    }

    #[getter]
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.report)
    }

    /// The permutation induced by adding `k` to every group coordinate.
    fn shift(&self, k: usize) -> Vec<usize> {
        self.inner.shift(k)
    }
}

#[pyfunction]
fn fixture(name: &str) -> PyResult<PyStructure> {
    fixtures::by_name(name).map(Into::into).ok_or_else(|| err(format!("unknown fixture `{name}`")))
}

#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    fixtures::NAMES.to_vec()
}

/// The seeded random corpus.
#[pyfunction]
#[pyo3(signature = (seed=corpus::DEFAULT_SEED, count=corpus::DEFAULT_COUNT))]
fn random_corpus(seed: u64, count: usize) -> Vec<PyStructure> {
    corpus::corpus(seed, count).into_iter().map(Into::into).collect()
}

#[pyfunction]
fn refine(structures: Vec<PyRef<'_, PyStructure>>) -> PyResult<PyColorTable> {
    let items: Vec<FinStructure> = structures.iter().map(|s| s.inner.clone()).collect();
    refine_pairs(&items).map(|inner| PyColorTable { inner }).map_err(refine_err)
}

#[pyfunction]
#[pyo3(signature = (structures, budget=DEFAULT_TRIPLE_BUDGET))]
fn refine3(structures: Vec<PyRef<'_, PyStructure>>, budget: usize) -> PyResult<PyColorTable> {
    let items: Vec<FinStructure> = structures.iter().map(|s| s.inner.clone()).collect();
    refine_triples(&items, budget).map(|inner| PyColorTable { inner }).map_err(refine_err)
}

#[pyfunction(name = "equiv2")]
fn py_equiv2(m: &PyStructure, n: &PyStructure) -> PyResult<bool> {
    equiv2(&m.inner, &n.inner).map_err(refine_err)
}

#[pyfunction(name = "equiv3")]
#[pyo3(signature = (m, n, budget=DEFAULT_TRIPLE_BUDGET))]
fn py_equiv3(m: &PyStructure, n: &PyStructure, budget: usize) -> PyResult<bool> {
    equiv3(&m.inner, &n.inner, budget).map_err(refine_err)
}

#[pyfunction(name = "build_iso2")]
fn py_build_iso2(m: &PyStructure, n: &PyStructure) -> PyResult<Option<PyPartialIso2>> {
    Ok(build_iso2(&m.inner, &n.inner).map_err(refine_err)?.map(|inner| PyPartialIso2 { inner }))
}

/// Images of an automorphism extending `pins`, or `None`.
#[pyfunction(name = "find_automorphism")]
#[pyo3(signature = (m, pins=Vec::new()))]
fn py_find_automorphism(m: &PyStructure, pins: Vec<(usize, usize)>) -> Option<Vec<usize>> {
    find_automorphism(&m.inner, &pins).map(|p| p.images().to_vec())
}

#[pyfunction(name = "orbits")]
fn py_orbits(m: &PyStructure) -> Vec<Vec<usize>> {
    orbits(&m.inner)
}

#[pyfunction(name = "pair_orbits")]
fn py_pair_orbits(m: &PyStructure) -> Vec<Vec<(usize, usize)>> {
    pair_orbits(&m.inner)
}

#[pyfunction(name = "check_transitive")]
fn py_check_transitive<'py>(py: Python<'py>, m: &PyStructure) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &check_transitive(&m.inner))
}

#[pyfunction(name = "check_31_transitive")]
#[pyo3(signature = (m, budget=DEFAULT_TRIPLE_BUDGET))]
fn py_check_31_transitive<'py>(py: Python<'py>, m: &PyStructure, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &check_31_transitive(&m.inner, budget).map_err(refine_err)?)
}

#[pyfunction(name = "check_homogeneous")]
fn py_check_homogeneous<'py>(py: Python<'py>, m: &PyStructure) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &check_homogeneous(&m.inner))
}

#[pyfunction(name = "build_companion")]
fn py_build_companion(m: &PyStructure) -> PyResult<PyCompanion> {
    match build_companion(&m.inner) {
        Ok(inner) => Ok(PyCompanion { inner }),
        Err(CompanionError::Refine(e)) => Err(refine_err(e)),
        Err(e) => Err(err(e)),
    }
}

/// The smallest pair color `pairs` cuts in `m`, or `None`.
#[pyfunction(name = "cuts_types")]
fn py_cuts_types(m: &PyStructure, pairs: Vec<(usize, usize)>) -> PyResult<Option<u32>> {
    cuts_types(&m.inner, &relation(m.inner.size(), pairs)?).map_err(beth_err)
}

/// A formula `φ(x,y)` defining `pairs` in `m`, or `None` when it cuts a type.
#[pyfunction]
fn synthesize(m: &PyStructure, pairs: Vec<(usize, usize)>) -> PyResult<Option<PyFormula>> {
    let r = relation(m.inner.size(), pairs)?;
    let phi = synthesize_explicit(&m.inner, &r).map_err(beth_err)?;
    Ok(phi.map(|f| PyFormula { inner: (*f).clone() }))
}

/// Flips `pairs` on a cut color; returns `color`, `case`, `flipped` and,
/// for transitive `m`, the `violations` of the flip linkage.
#[pyfunction]
#[pyo3(signature = (m, pairs, color=None))]
fn flip<'py>(py: Python<'py>, m: &PyStructure, pairs: Vec<(usize, usize)>, color: Option<u32>) -> PyResult<Bound<'py, PyAny>> {
    let r = relation(m.inner.size(), pairs)?;
    let ctx = match color {
        Some(c) => CutContext::with_color(&m.inner, &r, c),
        None => CutContext::new(&m.inner, &r),
    }
    .map_err(beth_err)?;
    let case = ctx.flip_case().map_err(beth_err)?;
    let s = flip_relation(&ctx).map_err(beth_err)?;
    let t = ctx.color.expect("cut color");
    let violations = match flip_preserves_equivalence(&m.inner, &r, &s, t) {
        Ok(report) => Some(report.violations),
        Err(BethError::NotTransitive(..)) => None,
        Err(e) => return Err(beth_err(e)),
    };
    #[derive(Serialize)]
    struct Flip {
        color: u32,
        case: fo2kit::beth::FlipCase,
        flipped: Vec<(usize, usize)>,
        violations: Option<Vec<fo2kit::equiv::Violation>>,
    }
    to_py(py, &Flip { color: t, case, flipped: s.pairs().collect(), violations })
}

/// Pulls `pairs` on `mbar` back to `m`; returns `pairs` and `violations`.
#[pyfunction]
fn transfer<'py>(py: Python<'py>, m: &PyStructure, mbar: &PyStructure, pairs: Vec<(usize, usize)>) -> PyResult<Bound<'py, PyAny>> {
    let rbar = relation(mbar.inner.size(), pairs)?;
    let t = transfer_relation(&m.inner, &mbar.inner, &rbar).map_err(beth_err)?;
    #[derive(Serialize)]
    struct Out {
        pairs: Vec<(usize, usize)>,
        violations: Vec<fo2kit::equiv::Violation>,
    }
    to_py(py, &Out { pairs: t.relation.pairs().collect(), violations: t.report.violations })
}

/// Solves a `.def` problem on `m`; `mode` is `"brute"` or `"type-union"`.
#[pyfunction]
#[pyo3(signature = (problem, m, mode="type-union"))]
fn solve<'py>(py: Python<'py>, problem: &str, m: &PyStructure, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let p = DefinitionProblem::parse(problem).map_err(beth_err)?;
    let mode = match mode {
        "brute" => SearchMode::Brute,
        "type-union" => SearchMode::TypeUnion,
        other => return Err(err(format!("unknown mode `{other}`"))),
    };
    to_py(py, &search_solutions(&p, &m.inner, mode).map_err(beth_err)?)
}

#[pyfunction(name = "build_adn_model")]
fn py_build_adn_model() -> PyStructure {
    build_adn_model().into()
}

#[pyfunction(name = "verify_adn")]
#[pyo3(signature = (budget=DEFAULT_TRIPLE_BUDGET))]
fn py_verify_adn<'py>(py: Python<'py>, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    match verify_adn_with_budget(budget) {
        Ok(report) => to_py(py, &report),
        Err(AdnError::Refine(e)) => Err(refine_err(e)),
        Err(e) => Err(err(e)),
    }
}

#[pymodule]
pub fn fo2kit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("Fo2Error", m.py().get_type::<Fo2Error>())?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    m.add_class::<PyStructure>()?;
    m.add_class::<PyFormula>()?;
    m.add_class::<PyColorTable>()?;
    m.add_class::<PyPartialIso2>()?;
    m.add_class::<PyCompanion>()?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(random_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(refine3, m)?)?;
    m.add_function(wrap_pyfunction!(py_equiv2, m)?)?;
    m.add_function(wrap_pyfunction!(py_equiv3, m)?)?;
    m.add_function(wrap_pyfunction!(py_build_iso2, m)?)?;
    m.add_function(wrap_pyfunction!(py_find_automorphism, m)?)?;
    m.add_function(wrap_pyfunction!(py_orbits, m)?)?;
    m.add_function(wrap_pyfunction!(py_pair_orbits, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_transitive, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_31_transitive, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_homogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(py_build_companion, m)?)?;
    m.add_function(wrap_pyfunction!(py_cuts_types, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(flip, m)?)?;
    m.add_function(wrap_pyfunction!(transfer, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(py_build_adn_model, m)?)?;
    m.add_function(wrap_pyfunction!(py_verify_adn, m)?)?;
    Ok(())
}
