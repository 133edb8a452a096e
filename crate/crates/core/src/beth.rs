//! Definability at the scale of one finite model: type cuts, the flip
//! construction, transfer from a companion, explicit-definition synthesis
//! and implicit-definition solution search.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automorphism::check_transitive;
use crate::equiv::{build_iso2, verify_iso2, IsoReport, PartialIso2};
use crate::formula::{evaluate, parse_formula, Assignment, EvalError, Formula, FormulaError, Mode, Sub};
use crate::relation::BinRel;
use crate::structure::{FinStructure, StructureError};
use crate::types::{refine_pairs, CharacteristicBuilder, Color, ColorTable, RefineError};

/// Largest universe for brute-force solution search (2^16 candidates).
pub const BRUTE_MAX_SIZE: usize = 4;
/// Largest number of pair colors for type-union search.
pub const TYPE_UNION_MAX_COLORS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum BethError {
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("relation over {found} elements given for a structure of size {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("the relation does not cut color {0}")]
    NotCut(Color),
    #[error("structure is not transitive: no automorphism maps {0} to {1}")]
    NotTransitive(usize, usize),
    #[error("the structures are not 2-equivalent")]
    NotEquivalent,
    #[error("the relation cuts color {0} of the second structure")]
    CutsTypes(Color),
    #[error("line {line}: {message}")]
    Problem { line: usize, message: String },
    #[error("formula on line {line}: {source}")]
    Formula { line: usize, source: FormulaError },
    #[error("the model violates theory sentence {0}")]
    TheoryViolated(usize),
    #[error("brute-force search needs at most {max} elements, got {size}")]
    TooLarge { size: usize, max: usize },
    #[error("{colors} pair colors exceed the cap of {max}")]
    CapExceeded { colors: usize, max: usize },
}

fn check_size(m: &FinStructure, r: &BinRel) -> Result<(), BethError> {
    if r.size() != m.size() {
        return Err(BethError::SizeMismatch { expected: m.size(), found: r.size() });
    }
    Ok(())
}

fn cut_in(table: &ColorTable, k: usize, r: &BinRel) -> Option<Color> {
    let mut inside = vec![false; table.num_colors()];
    let mut outside = vec![false; table.num_colors()];
    let n = r.size();
    for a in 0..n {
        for b in 0..n {
            let c = table.pair_color(k, a, b) as usize;
            if r.contains(a, b) {
                inside[c] = true;
            } else {
                outside[c] = true;
            }
        }
    }
    (0..table.num_colors()).find(|&c| inside[c] && outside[c]).map(|c| c as Color)
}

/// The smallest pair color whose class `r` meets without containing.
pub fn cuts_types(m: &FinStructure, r: &BinRel) -> Result<Option<Color>, BethError> {
    check_size(m, r)?;
    let table = refine_pairs(std::slice::from_ref(m))?;
    Ok(cut_in(&table, 0, r))
}

/// A structure, a relation on it, and a pair color `T` with its class `t`.
#[derive(Debug, Clone)]
pub struct CutContext {
    pub structure: FinStructure,
    pub relation: BinRel,
    pub table: ColorTable,
    pub color: Option<Color>,
    pub class: BinRel,
}

impl CutContext {
    /// Uses the smallest cut color, if any.
    pub fn new(m: &FinStructure, r: &BinRel) -> Result<Self, BethError> {
        check_size(m, r)?;
        let table = refine_pairs(std::slice::from_ref(m))?;
        let color = cut_in(&table, 0, r);
        Ok(Self::assemble(m, r, table, color))
    }

    pub fn with_color(m: &FinStructure, r: &BinRel, color: Color) -> Result<Self, BethError> {
        check_size(m, r)?;
        let table = refine_pairs(std::slice::from_ref(m))?;
        if color as usize >= table.num_colors() {
            return Err(RefineError::UnknownColor(color).into());
        }
        Ok(Self::assemble(m, r, table, Some(color)))
    }

    fn assemble(m: &FinStructure, r: &BinRel, table: ColorTable, color: Option<Color>) -> Self {
        let class = match color {
            Some(c) => BinRel::from_fn(m.size(), |a, b| table.pair_color(0, a, b) == c),
            None => BinRel::empty(m.size()),
        };
        CutContext {
            structure: m.clone(),
            relation: r.clone(),
            table,
            color,
            class,
        }
    }

    /// Whether the relation meets `t` and misses part of it.
    pub fn is_cut(&self) -> bool {
        let inside = self.class.intersection(&self.relation).expect("same size");
        !inside.is_empty() && inside != self.class
    }

    /// Which of the two flip constructions applies.
    pub fn flip_case(&self) -> Result<FlipCase, BethError> {
        let t = self.color.ok_or(BethError::NotCut(0))?;
        if !self.is_cut() {
            return Err(BethError::NotCut(t));
        }
        let inside = self.class.intersection(&self.relation).expect("same size");
        if self.table.converse(t)? != t || inside.is_symmetric() {
            Ok(FlipCase::Interchange)
        } else {
            Ok(FlipCase::InverseSwap)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlipCase {
    /// `T` is not its own converse or `t ∩ R` is symmetric: swap `t ∩ R` with `t \ R`.
    Interchange,
    /// `T` is symmetric and `t ∩ R` is not: swap `t ∩ R \ R⁻¹` with its inverse.
    InverseSwap,
}

/// The relation `S` obtained by interchanging parts of `t`.
pub fn flip_relation(ctx: &CutContext) -> Result<BinRel, BethError> {
    let case = ctx.flip_case()?;
    let r = &ctx.relation;
    let t = &ctx.class;
    let s = match case {
        FlipCase::Interchange => r.difference(t).unwrap().union(&t.difference(r).unwrap()).unwrap(),
        FlipCase::InverseSwap => {
            let inv = r.converse();
            let forward_only = t.intersection(r).unwrap().difference(&inv).unwrap();
            let backward_only = t.intersection(&inv).unwrap().difference(r).unwrap();
            r.difference(&forward_only).unwrap().union(&backward_only).unwrap()
        }
    };
    debug_assert!(s != *r);
    Ok(s)
}

/// The linkage `J` between `⟨m,R⟩` and `⟨m,S⟩`: same-typed elements, and
/// same-typed pairs agreeing on membership in both directions.
pub fn flip_witness(table: &ColorTable, r: &BinRel, s: &BinRel) -> PartialIso2 {
    let n = r.size();
    let mut j = PartialIso2::new(n, n);
    for a in 0..n {
        for p in 0..n {
            if table.diagonal_color(0, a) == table.diagonal_color(0, p) {
                j.link_elements(a, p);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for p in 0..n {
                for q in 0..n {
                    if table.pair_color(0, a, b) == table.pair_color(0, p, q)
                        && r.contains(a, b) == s.contains(p, q)
                        && r.contains(b, a) == s.contains(q, p)
                    {
                        j.link_pairs((a, b), (p, q));
                    }
                }
            }
        }
    }
    j
}

/// Verifies `J` between the expansions `⟨m,R⟩` and `⟨m,S⟩`.
pub fn flip_preserves_equivalence(m: &FinStructure, r: &BinRel, s: &BinRel, _color: Color) -> Result<IsoReport, BethError> {
    check_size(m, r)?;
    check_size(m, s)?;
    if let Some((a, b)) = check_transitive(m).witness {
        return Err(BethError::NotTransitive(a, b));
    }
    let table = refine_pairs(std::slice::from_ref(m))?;
    let j = flip_witness(&table, r, s);
    let name = m.fresh_name("R");
    Ok(verify_iso2(&j, &m.expand_with_relation(&name, r)?, &m.expand_with_relation(&name, s)?))
}

/// Result of pulling a relation back from a 2-equivalent structure.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub relation: BinRel,
    pub witness: PartialIso2,
    pub report: IsoReport,
}

/// `R = {(a,b) : some (c,d) ∈ R̄ has the joint color of (a,b)}`, with the
/// witness between `m` and `mbar` checked on the expansions.
pub fn transfer_relation(m: &FinStructure, mbar: &FinStructure, rbar: &BinRel) -> Result<Transfer, BethError> {
    check_size(mbar, rbar)?;
    let joint = refine_pairs(&[m.clone(), mbar.clone()])?;
    if joint.diagonal_colors(0) != joint.diagonal_colors(1) {
        return Err(BethError::NotEquivalent);
    }
    if let Some(c) = cut_in(&joint, 1, rbar) {
        return Err(BethError::CutsTypes(c));
    }
    let mut wanted = vec![false; joint.num_colors()];
    for (c, d) in rbar.pairs() {
        wanted[joint.pair_color(1, c, d) as usize] = true;
    }
    let relation = BinRel::from_fn(m.size(), |a, b| wanted[joint.pair_color(0, a, b) as usize]);
    let witness = build_iso2(m, mbar)?.ok_or(BethError::NotEquivalent)?;
    let name = m.fresh_name(&mbar.fresh_name("R"));
    let report = verify_iso2(
        &witness,
        &m.expand_with_relation(&name, &relation)?,
        &mbar.expand_with_relation(&name, rbar)?,
    );
    assert!(cut_in(&joint, 0, &relation).is_none(), "transfer output cuts a type");
    Ok(Transfer {
        relation,
        witness,
        report,
    })
}

/// A formula `φ(x,y)` defining `r` in `m`, or `None` when `r` cuts a type.
pub fn synthesize_explicit(m: &FinStructure, r: &BinRel) -> Result<Option<Sub>, BethError> {
    check_size(m, r)?;
    let table = refine_pairs(std::slice::from_ref(m))?;
    if cut_in(&table, 0, r).is_some() {
        return Ok(None);
    }
    let mut colors: Vec<Color> = r.pairs().map(|(a, b)| table.pair_color(0, a, b)).collect();
    colors.sort_unstable();
    colors.dedup();
    let mut builder = CharacteristicBuilder::new(&table)?;
    let parts = colors
        .into_iter()
        .map(|c| builder.formula(c, table.rounds()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(Formula::disjunction(parts).unwrap_or_else(|| Formula::falsum().into())))
}

/// A candidate implicit definition: `theory` over the base signature and
/// `sigma` over the base signature plus `defines`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinitionProblem {
    pub theory: Vec<Sub>,
    pub sigma: Vec<Sub>,
    pub defines: String,
}

impl DefinitionProblem {
    pub fn new(theory: Vec<Sub>, sigma: Vec<Sub>, defines: impl Into<String>) -> Result<Self, BethError> {
        let p = DefinitionProblem {
            theory,
            sigma,
            defines: defines.into(),
        };
        for (i, f) in p.theory.iter().chain(&p.sigma).enumerate() {
            if !f.is_sentence() {
                return Err(BethError::Problem { line: 0, message: format!("formula {} has free variables", i + 1) });
            }
        }
        if p.theory.iter().any(|f| f.relation_names().iter().any(|n| **n == *p.defines)) {
            return Err(BethError::Problem {
                line: 0,
                message: format!("{} occurs in the theory", p.defines),
            });
        }
        Ok(p)
    }

    /// Parses the `.def` format: `theory:` and `sigma:` blocks of one
    /// sentence per line, and a `defines: R` line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BethError> {
        #[derive(PartialEq)]
        enum Block {
            None,
            Theory,
            Sigma,
        }
        let mut block = Block::None;
        let (mut theory, mut sigma, mut defines) = (Vec::new(), Vec::new(), None);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("defines:") {
                let name = rest.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(BethError::Problem { line, message: format!("bad relation name {name:?}") });
                }
                defines = Some(name.to_string());
                continue;
            }
            if let Some(rest) = content.strip_prefix("theory:") {
                block = Block::Theory;
                if rest.trim().is_empty() {
                    continue;
                }
            } else if let Some(rest) = content.strip_prefix("sigma:") {
                block = Block::Sigma;
                if rest.trim().is_empty() {
                    continue;
                }
            }
            let formula_text = content
                .strip_prefix("theory:")
                .or_else(|| content.strip_prefix("sigma:"))
                .unwrap_or(content);
            let f: Sub = parse_formula(formula_text, Mode::Fo2)
                .map_err(|source| BethError::Formula { line, source })?
                .into();
            if !f.is_sentence() {
                return Err(BethError::Problem { line, message: "formula has free variables".into() });
            }
            match block {
                Block::Theory => theory.push(f),
                Block::Sigma => sigma.push(f),
                Block::None => {
                    return Err(BethError::Problem { line, message: "formula outside a theory: or sigma: block".into() })
                }
            }
        }
        let defines = defines.ok_or(BethError::Problem { line: 0, message: "missing defines: line".into() })?;
        DefinitionProblem::new(theory, sigma, defines)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Brute,
    TypeUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    None,
    Unique,
    Multiple,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::None => "none",
            Classification::Unique => "unique",
            Classification::Multiple => "multiple",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSet {
    pub mode: SearchMode,
    pub candidates: u64,
    pub solutions: Vec<Vec<(usize, usize)>>,
    pub classification: Classification,
    pub note: String,
}

const TYPE_UNION_NOTE: &str = "type-union search covers only relations that are unions of pair classes; \
this is every possible solution when the model is transitive";
const BRUTE_NOTE: &str = "brute-force search covers every relation on the model";

/// All relations `r` with `⟨m, r⟩ ⊨ Σ` in the chosen search space.
pub fn search_solutions(p: &DefinitionProblem, m: &FinStructure, mode: SearchMode) -> Result<SolutionSet, BethError> {
    for (i, f) in p.theory.iter().enumerate() {
        if !evaluate(m, f, &Assignment::empty())? {
            return Err(BethError::TheoryViolated(i));
        }
    }
    if m.relation(&p.defines).is_some() {
        return Err(StructureError::NameClash(p.defines.clone()).into());
    }
    let n = m.size();
    let candidates: Vec<BinRel> = match mode {
        SearchMode::Brute => {
            if n > BRUTE_MAX_SIZE {
                return Err(BethError::TooLarge { size: n, max: BRUTE_MAX_SIZE });
            }
            let bits = n * n;
            (0..1u64 << bits)
                .map(|mask| BinRel::from_fn(n, |a, b| mask >> (a * n + b) & 1 == 1))
                .collect()
        }
        SearchMode::TypeUnion => {
            let table = refine_pairs(std::slice::from_ref(m))?;
            let colors = table.realized_colors(0);
            if colors.len() > TYPE_UNION_MAX_COLORS {
                return Err(BethError::CapExceeded { colors: colors.len(), max: TYPE_UNION_MAX_COLORS });
            }
            (0..1u64 << colors.len())
                .map(|mask| {
                    BinRel::from_fn(n, |a, b| {
                        let c = table.pair_color(0, a, b);
                        let i = colors.binary_search(&c).expect("realized");
                        mask >> i & 1 == 1
                    })
                })
                .collect()
        }
    };
    let hits: Vec<Result<bool, EvalError>> = candidates
        .par_iter()
        .map(|r| {
            let expanded = m.expand_with_relation(&p.defines, r).expect("fresh name");
            for f in &p.sigma {
                if !evaluate(&expanded, f, &Assignment::empty())? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect();
    let mut solutions = Vec::new();
    for (r, hit) in candidates.iter().zip(hits) {
        if hit? {
            solutions.push(r.pairs().collect::<Vec<_>>());
        }
    }
    solutions.sort();
    let classification = match solutions.len() {
        0 => Classification::None,
        1 => Classification::Unique,
        _ => Classification::Multiple,
    };
    Ok(SolutionSet {
        mode,
        candidates: candidates.len() as u64,
        solutions,
        classification,
        note: match mode {
            SearchMode::Brute => BRUTE_NOTE,
            SearchMode::TypeUnion => TYPE_UNION_NOTE,
        }
        .to_string(),
    })
}
