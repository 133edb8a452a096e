use std::fmt;

use fo2kit::adn::AdnError;
use fo2kit::beth::BethError;
use fo2kit::companion::CompanionError;
use fo2kit::equiv::IsoError;
use fo2kit::formula::{EvalError, FormulaError};
use fo2kit::structure::StructureError;
use fo2kit::types::RefineError;

pub const INPUT_ERROR: u8 = 2;
pub const BUDGET_EXCEEDED: u8 = 3;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: INPUT_ERROR, error: error.into() }
    }

    pub fn budget(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: BUDGET_EXCEEDED, error: error.into() }
    }

    pub fn context(mut self, what: impl fmt::Display + Send + Sync + 'static) -> Self {
        self.error = self.error.context(what);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(e)
    }
}

impl From<RefineError> for Failure {
    fn from(e: RefineError) -> Self {
        match e {
            RefineError::BudgetExceeded { .. } => Failure::budget(e),
            _ => Failure::input(e),
        }
    }
}

impl From<BethError> for Failure {
    fn from(e: BethError) -> Self {
        match e {
            BethError::Refine(r) => r.into(),
            BethError::TooLarge { .. } | BethError::CapExceeded { .. } => Failure::budget(e),
            _ => Failure::input(e),
        }
    }
}

impl From<CompanionError> for Failure {
    fn from(e: CompanionError) -> Self {
        match e {
            CompanionError::Refine(r) => r.into(),
            _ => Failure::input(e),
        }
    }
}

impl From<AdnError> for Failure {
    fn from(e: AdnError) -> Self {
        match e {
            AdnError::Refine(r) => r.into(),
            _ => Failure::input(e),
        }
    }
}

macro_rules! input_errors {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::input(e)
            }
        })*
    };
}

input_errors!(StructureError, FormulaError, EvalError, IsoError);
