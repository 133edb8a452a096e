//! Formulas of the two- and three-variable fragments over binary signatures.
//!
//! Subformulas sit behind `Arc`, so a formula may be a DAG. Characteristic
//! formulas rely on this: the same `(color, depth)` node is shared by every
//! parent that mentions it, and both the evaluator and [`dag_size`] treat
//! shared nodes once.

mod eval;
mod parser;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

pub use eval::{evaluate, evaluate_pairs, Assignment, EvalError};
pub use parser::{parse_formula, FormulaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which variables a formula may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fo2,
    Fo3,
}

pub type Sub = Arc<Formula>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Arc<str>, Var, Var),
    Equals(Var, Var),
    Not(Sub),
    And(Sub, Sub),
    Or(Sub, Sub),
    Implies(Sub, Sub),
    Iff(Sub, Sub),
    Exists(Var, Sub),
    Forall(Var, Sub),
}

impl Formula {
    pub fn atom(rel: &str, a: Var, b: Var) -> Formula {
        Formula::Atom(Arc::from(rel), a, b)
    }

    pub fn not(f: impl Into<Sub>) -> Formula {
        Formula::Not(f.into())
    }

    pub fn and(f: impl Into<Sub>, g: impl Into<Sub>) -> Formula {
        Formula::And(f.into(), g.into())
    }

    pub fn or(f: impl Into<Sub>, g: impl Into<Sub>) -> Formula {
        Formula::Or(f.into(), g.into())
    }

    pub fn implies(f: impl Into<Sub>, g: impl Into<Sub>) -> Formula {
        Formula::Implies(f.into(), g.into())
    }

    pub fn iff(f: impl Into<Sub>, g: impl Into<Sub>) -> Formula {
        Formula::Iff(f.into(), g.into())
    }

    pub fn exists(v: Var, f: impl Into<Sub>) -> Formula {
        Formula::Exists(v, f.into())
    }

    pub fn forall(v: Var, f: impl Into<Sub>) -> Formula {
        Formula::Forall(v, f.into())
    }

    /// `~x=x`, used for empty disjunctions.
    pub fn falsum() -> Formula {
        Formula::not(Formula::Equals(Var::X, Var::X))
    }

    /// Right-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: Vec<Sub>) -> Option<Sub> {
        parts.into_iter().rev().reduce(|acc, f| Arc::new(Formula::And(f, acc)))
    }

    /// Right-nested disjunction; `None` for an empty list.
    pub fn disjunction(parts: Vec<Sub>) -> Option<Sub> {
        parts.into_iter().rev().reduce(|acc, f| Arc::new(Formula::Or(f, acc)))
    }

    pub fn children(&self) -> Vec<&Sub> {
        match self {
            Formula::Atom(..) | Formula::Equals(..) => vec![],
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => vec![f],
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Implies(f, g) | Formula::Iff(f, g) => vec![f, g],
        }
    }

    /// Free variables, computed over the DAG without re-visiting shared nodes.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut memo = std::collections::HashMap::new();
        let mask = free_vars_memo(self, &mut memo);
        Var::ALL.into_iter().filter(|v| mask & (1 << v.index()) != 0).collect()
    }

    /// Relation names, computed over the DAG.
    pub fn relation_names(&self) -> BTreeSet<Arc<str>> {
        let mut seen = HashSet::new();
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if !seen.insert(f as *const Formula) {
                continue;
            }
            if let Formula::Atom(r, _, _) = f {
                out.insert(r.clone());
            }
            stack.extend(f.children().into_iter().map(|c| c.as_ref()));
        }
        out
    }

    /// Whether any node mentions `z`.
    pub fn uses_z(&self) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if !seen.insert(f as *const Formula) {
                continue;
            }
            let hit = match f {
                Formula::Atom(_, a, b) | Formula::Equals(a, b) => *a == Var::Z || *b == Var::Z,
                Formula::Exists(v, _) | Formula::Forall(v, _) => *v == Var::Z,
                _ => false,
            };
            if hit {
                return true;
            }
            stack.extend(f.children().into_iter().map(|c| c.as_ref()));
        }
        false
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }
}

fn free_vars_memo(f: &Formula, memo: &mut std::collections::HashMap<*const Formula, u8>) -> u8 {
    let key = f as *const Formula;
    if let Some(&m) = memo.get(&key) {
        return m;
    }
    let bit = |v: Var| 1u8 << v.index();
    let m = match f {
        Formula::Atom(_, a, b) | Formula::Equals(a, b) => bit(*a) | bit(*b),
        Formula::Not(g) => free_vars_memo(g, memo),
        Formula::And(g, h) | Formula::Or(g, h) | Formula::Implies(g, h) | Formula::Iff(g, h) => {
            free_vars_memo(g, memo) | free_vars_memo(h, memo)
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => free_vars_memo(g, memo) & !bit(*v),
    };
    memo.insert(key, m);
    m
}

/// Number of distinct nodes reachable from `f`, counting shared nodes once.
pub fn dag_size(f: &Formula) -> usize {
    let mut seen = HashSet::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        if seen.insert(g as *const Formula) {
            stack.extend(g.children().into_iter().map(|c| c.as_ref()));
        }
    }
    seen.len()
}

/// Number of nodes of the fully expanded tree, saturating.
pub fn tree_size(f: &Formula) -> u64 {
    let mut memo = std::collections::HashMap::new();
    tree_size_memo(f, &mut memo)
}

fn tree_size_memo(f: &Formula, memo: &mut std::collections::HashMap<*const Formula, u64>) -> u64 {
    let key = f as *const Formula;
    if let Some(&n) = memo.get(&key) {
        return n;
    }
    let n = f
        .children()
        .into_iter()
        .fold(1u64, |acc, c| acc.saturating_add(tree_size_memo(c, memo)));
    memo.insert(key, n);
    n
}

/// True when the printed form ends inside a quantifier scope, which would
/// swallow a following binary connective.
fn open_right(f: &Formula) -> bool {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => true,
        Formula::Not(g) => open_right(g),
        _ => false,
    }
}

struct Left<'a>(&'a Formula);

impl fmt::Display for Left<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if open_right(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

// Binary connectives are always parenthesised; prefix operators never are.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(r, a, b) => write!(f, "{r}({a},{b})"),
            Formula::Equals(a, b) => write!(f, "{a}={b}"),
            Formula::Not(g) => write!(f, "~{g}"),
            Formula::And(g, h) => write!(f, "({} & {h})", Left(g)),
            Formula::Or(g, h) => write!(f, "({} | {h})", Left(g)),
            Formula::Implies(g, h) => write!(f, "({} -> {h})", Left(g)),
            Formula::Iff(g, h) => write!(f, "({} <-> {h})", Left(g)),
            Formula::Exists(v, g) => write!(f, "E {v} . {g}"),
            Formula::Forall(v, g) => write!(f, "A {v} . {g}"),
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}
