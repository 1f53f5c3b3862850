use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ErrorKind {
    Cycle,
    Ref,
    Name,
    Value,
    Div0,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Cycle => "#CYCLE!",
            ErrorKind::Ref => "#REF!",
            ErrorKind::Name => "#NAME?",
            ErrorKind::Value => "#VALUE!",
            ErrorKind::Div0 => "#DIV/0!",
        }
    }
}

/// Result of evaluating a cell.
///
/// `Empty` is reported for unset cells; numeric contexts read it as zero.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub enum Value {
    #[default]
    Empty,
    Num(f64),
    Str(String),
    Err(ErrorKind),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_err(&self) -> bool {
        matches!(self, Value::Err(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Empty => Ok(()),
            Value::Num(n) => write!(f, "{n}"),
            Value::Str(s) => f.write_str(s),
            Value::Err(e) => f.write_str(e.code()),
        }
    }
}

/// Stored contents of a cell.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum CellContent {
    #[default]
    Empty,
    Number(f64),
    Text(String),
    Formula {
        ast: Expr,
        cached: Value,
    },
}

impl CellContent {
    pub fn formula(ast: Expr) -> Self {
        CellContent::Formula {
            ast,
            cached: Value::Empty,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellContent::Empty)
    }

    pub fn ast(&self) -> Option<&Expr> {
        match self {
            CellContent::Formula { ast, .. } => Some(ast),
            _ => None,
        }
    }

    pub fn value(&self) -> Value {
        match self {
            CellContent::Empty => Value::Empty,
            CellContent::Number(n) => Value::Num(*n),
            CellContent::Text(s) => Value::Str(s.clone()),
            CellContent::Formula { cached, .. } => cached.clone(),
        }
    }
}

/// Cells recomputed by a mutation, in evaluation order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecalcResult {
    pub recomputed: Vec<(crate::CellAddress, Value)>,
}

impl RecalcResult {
    pub fn is_empty(&self) -> bool {
        self.recomputed.is_empty()
    }

    pub fn get(&self, addr: crate::CellAddress) -> Option<&Value> {
        self.recomputed
            .iter()
            .find(|(a, _)| *a == addr)
            .map(|(_, v)| v)
    }
}
