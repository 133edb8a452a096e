//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence, tightest first: `~`, `&`, `|`, `->` (right associative), `<->`.
//! Quantifiers `E v .` and `A v .` scope as far right as possible.

use std::sync::Arc;

use thiserror::Error;

use super::{Formula, Mode, Sub, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("column {column}: unknown token `{token}`")]
    UnknownToken { column: usize, token: String },
    #[error("column {column}: variable z is not available in two-variable mode")]
    VariableNotAllowed { column: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Not,
    And,
    Or,
    Implies,
    Iff,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((col, Tok::Name(text[start..i].to_string())));
            continue;
        }
        let (tok, len) = match c {
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b',' => (Tok::Comma, 1),
            b'.' => (Tok::Dot, 1),
            b'=' => (Tok::Eq, 1),
            b'~' => (Tok::Not, 1),
            b'&' => (Tok::And, 1),
            b'|' => (Tok::Or, 1),
            b'-' if bytes.get(i + 1) == Some(&b'>') => (Tok::Implies, 2),
            b'<' if text[i..].starts_with("<->") => (Tok::Iff, 3),
            _ => {
                let token = text[i..].chars().next().unwrap().to_string();
                return Err(FormulaError::UnknownToken { column: col, token });
            }
        };
        out.push((col, tok));
        i += len;
    }
    out.push((text.len() + 1, Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].1
    }

    fn column(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FormulaError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe()))
        }
    }

    fn var(&mut self) -> Result<Var, FormulaError> {
        let column = self.column();
        let v = match self.peek() {
            Tok::Name(n) if n == "x" => Var::X,
            Tok::Name(n) if n == "y" => Var::Y,
            Tok::Name(n) if n == "z" => Var::Z,
            other => return self.error(format!("expected variable, found {}", other.describe())),
        };
        if v == Var::Z && self.mode == Mode::Fo2 {
            return Err(FormulaError::VariableNotAllowed { column });
        }
        self.bump();
        Ok(v)
    }

    fn is_var_name(tok: &Tok) -> bool {
        matches!(tok, Tok::Name(n) if n == "x" || n == "y" || n == "z")
    }

    fn formula(&mut self) -> Result<Sub, FormulaError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = Arc::new(Formula::Iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Sub, FormulaError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Arc::new(Formula::Implies(lhs, rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Sub, FormulaError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Arc::new(Formula::Or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Sub, FormulaError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Arc::new(Formula::And(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Sub, FormulaError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Arc::new(Formula::Not(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Name(name) => {
                let next = self.peek_at(1).clone();
                if next == Tok::LParen {
                    self.bump();
                    self.bump();
                    let a = self.var()?;
                    self.expect(Tok::Comma)?;
                    let b = self.var()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Arc::new(Formula::Atom(Arc::from(name.as_str()), a, b)));
                }
                if (name == "E" || name == "A") && Self::is_var_name(&next) {
                    self.bump();
                    let v = self.var()?;
                    self.expect(Tok::Dot)?;
                    let body = self.formula()?;
                    return Ok(Arc::new(if name == "E" {
                        Formula::Exists(v, body)
                    } else {
                        Formula::Forall(v, body)
                    }));
                }
                if Self::is_var_name(&Tok::Name(name.clone())) && next == Tok::Eq {
                    let a = self.var()?;
                    self.bump();
                    let b = self.var()?;
                    return Ok(Arc::new(Formula::Equals(a, b)));
                }
                self.error(format!("expected atom, quantifier or `(`, found `{name}`"))
            }
            other => self.error(format!("expected formula, found {}", other.describe())),
        }
    }
}

/// Parses a formula; in [`Mode::Fo2`] any occurrence of `z` is rejected.
pub fn parse_formula(text: &str, mode: Mode) -> Result<Formula, FormulaError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, mode };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", p.peek().describe()));
    }
    Ok(Arc::try_unwrap(f).unwrap_or_else(|shared| (*shared).clone()))
}
