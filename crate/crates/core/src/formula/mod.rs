//! Formula language: lexing, parsing, canonical printing and structural analysis.
//!
//! Grammar:
//!
//! ```text
//! formula := '=' expr
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-'? atom
//! atom    := number | string | ref | ref ':' ref | '@' ident
//!          | IDENT '(' args? ')' | '(' expr ')'
//! ref     := (SheetName '!')? letters digits
//! ```

mod ast;
mod lexer;
mod parser;
mod print;

use thiserror::Error;

pub use ast::{extract_refs, nesting_depth, BinaryOp, Expr, Function, RefSpec};
pub use parser::{parse, parse_in};
pub use print::{print, print_in, print_ref};

/// How sheet qualifiers in formula text map to sheet indices.
///
/// Unqualified references resolve to `home`, and printing omits the
/// qualifier for references on `home`.
#[derive(Clone, Copy, Debug)]
pub struct SheetContext<'a> {
    pub home: usize,
    names: Option<&'a [String]>,
}

impl Default for SheetContext<'_> {
    fn default() -> Self {
        Self {
            home: 0,
            names: None,
        }
    }
}

impl<'a> SheetContext<'a> {
    /// Context where sheet `i` is called `Sheet{i+1}`.
    pub fn standalone(home: usize) -> Self {
        Self { home, names: None }
    }

    pub fn with_names(home: usize, names: &'a [String]) -> Self {
        Self {
            home,
            names: Some(names),
        }
    }

    pub fn resolve(&self, name: &str) -> Option<usize> {
        match self.names {
            Some(names) => names.iter().position(|n| n.eq_ignore_ascii_case(name)),
            None => {
                let digits = name
                    .get(..5)
                    .filter(|p| p.eq_ignore_ascii_case("sheet"))
                    .map(|_| &name[5..])?;
                let n: usize = digits.parse().ok()?;
                (n >= 1 && !digits.starts_with('0')).then(|| n - 1)
            }
        }
    }

    pub fn name(&self, sheet: usize) -> String {
        match self.names.and_then(|n| n.get(sheet)) {
            Some(name) => name.clone(),
            None => format!("Sheet{}", sheet + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown function `{name}` at offset {position}")]
    Name { name: String, position: usize },
    #[error("{func} takes {expected} argument(s), got {got}")]
    Arity {
        func: Function,
        expected: &'static str,
        got: usize,
    },
    #[error("unknown sheet `{0}`")]
    UnknownSheet(String),
}

impl FormulaError {
    pub(crate) fn syntax(position: usize, expected: impl Into<String>) -> Self {
        FormulaError::Syntax {
            position,
            expected: expected.into(),
        }
    }
}
