use std::collections::HashMap;

use thiserror::Error;

use super::{Formula, Var};
use crate::relation::BinRel;
use crate::structure::FinStructure;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("free variable {0} is not assigned")]
    Unassigned(Var),
    #[error("relation `{0}` is not in the signature")]
    UnknownRelation(String),
    #[error("variable {var} assigned to {index}, outside universe of size {size}")]
    OutOfRange { var: Var, index: usize, size: usize },
}

/// Partial map from `x, y, z` to elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Assignment([Option<usize>; 3]);

impl Assignment {
    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn xy(x: usize, y: usize) -> Self {
        Assignment([Some(x), Some(y), None])
    }

    pub fn with(mut self, v: Var, value: usize) -> Self {
        self.0[v.index()] = Some(value);
        self
    }

    pub fn get(&self, v: Var) -> Option<usize> {
        self.0[v.index()]
    }
}

const UNSET: u32 = u32::MAX;

struct Evaluator<'s> {
    size: usize,
    rels: Vec<(&'s str, &'s BinRel)>,
    free: HashMap<*const Formula, u8>,
    memo: HashMap<(*const Formula, [u32; 3]), bool>,
}

impl<'s> Evaluator<'s> {
    fn new(s: &'s FinStructure) -> Self {
        Evaluator {
            size: s.size(),
            rels: s.relations().collect(),
            free: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn free_mask(&mut self, f: &Formula) -> u8 {
        let key = f as *const Formula;
        if let Some(&m) = self.free.get(&key) {
            return m;
        }
        let bit = |v: Var| 1u8 << v.index();
        let m = match f {
            Formula::Atom(_, a, b) | Formula::Equals(a, b) => bit(*a) | bit(*b),
            Formula::Not(g) => self.free_mask(g),
            Formula::And(g, h) | Formula::Or(g, h) | Formula::Implies(g, h) | Formula::Iff(g, h) => {
                self.free_mask(g) | self.free_mask(h)
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => self.free_mask(g) & !bit(*v),
        };
        self.free.insert(key, m);
        m
    }

    fn rel(&self, name: &str) -> &'s BinRel {
        self.rels
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, r)| *r)
            .expect("relation names checked before evaluation")
    }

    fn eval(&mut self, f: &Formula, asg: [u32; 3]) -> bool {
        match f {
            Formula::Atom(r, a, b) => {
                self.rel(r).contains(asg[a.index()] as usize, asg[b.index()] as usize)
            }
            Formula::Equals(a, b) => asg[a.index()] == asg[b.index()],
            Formula::Not(g) => !self.eval(g, asg),
            Formula::And(g, h) => self.eval(g, asg) && self.eval(h, asg),
            Formula::Or(g, h) => self.eval(g, asg) || self.eval(h, asg),
            Formula::Implies(g, h) => !self.eval(g, asg) || self.eval(h, asg),
            Formula::Iff(g, h) => self.eval(g, asg) == self.eval(h, asg),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let mask = self.free_mask(f);
                let mut key_asg = [UNSET; 3];
                for i in 0..3 {
                    if mask & (1 << i) != 0 {
                        key_asg[i] = asg[i];
                    }
                }
                let key = (f as *const Formula, key_asg);
                if let Some(&b) = self.memo.get(&key) {
                    return b;
                }
                let existential = matches!(f, Formula::Exists(..));
                let mut inner = asg;
                let mut result = !existential;
                for e in 0..self.size {
                    inner[v.index()] = e as u32;
                    if self.eval(g, inner) == existential {
                        result = existential;
                        break;
                    }
                }
                self.memo.insert(key, result);
                result
            }
        }
    }
}

fn check(s: &FinStructure, f: &Formula, free_ok: impl Fn(Var) -> bool) -> Result<(), EvalError> {
    for name in f.relation_names() {
        if s.relation(&name).is_none() {
            return Err(EvalError::UnknownRelation(name.to_string()));
        }
    }
    for v in f.free_vars() {
        if !free_ok(v) {
            return Err(EvalError::Unassigned(v));
        }
    }
    Ok(())
}

/// Classical truth of `f` in `s` under `asg`. Quantifiers range over the whole
/// universe and shadow any outer value of their variable.
pub fn evaluate(s: &FinStructure, f: &Formula, asg: &Assignment) -> Result<bool, EvalError> {
    check(s, f, |v| asg.get(v).is_some())?;
    let mut packed = [UNSET; 3];
    for v in Var::ALL {
        if let Some(index) = asg.get(v) {
            if index >= s.size() {
                return Err(EvalError::OutOfRange { var: v, index, size: s.size() });
            }
            packed[v.index()] = index as u32;
        }
    }
    Ok(Evaluator::new(s).eval(f, packed))
}

/// Truth values of `f(x, y)` at every pair, row-major, sharing one memo table.
pub fn evaluate_pairs(s: &FinStructure, f: &Formula) -> Result<Vec<bool>, EvalError> {
    check(s, f, |v| v != Var::Z)?;
    let n = s.size();
    let mut ev = Evaluator::new(s);
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push(ev.eval(f, [a as u32, b as u32, UNSET]));
        }
    }
    Ok(out)
}
