use std::fmt;

use serde::{Deserialize, Serialize};

use crate::address::CellAddress;

/// Built-in worksheet functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Function {
    Sum,
    Average,
    Min,
    Max,
    Count,
    Round,
    Abs,
}

impl Function {
    pub const ALL: [Function; 7] = [
        Function::Sum,
        Function::Average,
        Function::Min,
        Function::Max,
        Function::Count,
        Function::Round,
        Function::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sum => "SUM",
            Function::Average => "AVERAGE",
            Function::Min => "MIN",
            Function::Max => "MAX",
            Function::Count => "COUNT",
            Function::Round => "ROUND",
            Function::Abs => "ABS",
        }
    }

    /// Case-insensitive lookup.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }

    pub fn accepts_arity(self, n: usize) -> bool {
        match self {
            Function::Round => (1..=2).contains(&n),
            Function::Abs => n == 1,
            _ => n >= 1,
        }
    }

    pub(crate) fn arity_text(self) -> &'static str {
        match self {
            Function::Round => "1 or 2",
            Function::Abs => "exactly 1",
            _ => "at least 1",
        }
    }

    /// Aggregates flatten ranges and clusters into their members; the rest
    /// take scalar arguments.
    pub fn is_aggregate(self) -> bool {
        !matches!(self, Function::Round | Function::Abs)
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a reference in a formula points at.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RefSpec {
    Cell(CellAddress),
    /// Inclusive rectangle on one sheet; `start` is the top-left corner.
    Range {
        start: CellAddress,
        end: CellAddress,
    },
    /// A cluster-cell referenced by label (`@label`).
    Cluster(String),
}

impl RefSpec {
    /// Builds a range with its corners normalized; a one-cell rectangle stays a range.
    pub fn range(a: CellAddress, b: CellAddress) -> Self {
        debug_assert_eq!(a.sheet, b.sheet);
        RefSpec::Range {
            start: CellAddress::new(a.sheet, a.row.min(b.row), a.col.min(b.col)),
            end: CellAddress::new(a.sheet, a.row.max(b.row), a.col.max(b.col)),
        }
    }

    /// Cells covered by a cell or range in row-major order. Clusters cover
    /// nothing at this level; resolving them needs a workbook.
    pub fn cells(&self) -> Vec<CellAddress> {
        match self {
            RefSpec::Cell(a) => vec![*a],
            RefSpec::Range { start, end } => {
                let mut out = Vec::with_capacity(
                    ((end.row - start.row + 1) * (end.col - start.col + 1)) as usize,
                );
                for row in start.row..=end.row {
                    for col in start.col..=end.col {
                        out.push(CellAddress::new(start.sheet, row, col));
                    }
                }
                out
            }
            RefSpec::Cluster(_) => Vec::new(),
        }
    }

    pub fn covers(&self, addr: CellAddress) -> bool {
        match self {
            RefSpec::Cell(a) => *a == addr,
            RefSpec::Range { start, end } => {
                addr.sheet == start.sheet
                    && (start.row..=end.row).contains(&addr.row)
                    && (start.col..=end.col).contains(&addr.col)
            }
            RefSpec::Cluster(_) => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    pub(crate) fn is_additive(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Sub)
    }
}

/// Parsed formula expression.
///
/// Number literals produced by the parser are always finite and
/// non-negative; a leading minus parses as [`Expr::Neg`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Number(f64),
    Text(String),
    Ref(RefSpec),
    Call {
        func: Function,
        args: Vec<Expr>,
    },
    Binary {
        op: BinaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Neg(Box<Expr>),
}

impl Expr {
    pub fn call(func: Function, args: Vec<Expr>) -> Self {
        Expr::Call { func, args }
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Self {
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn cell(addr: CellAddress) -> Self {
        Expr::Ref(RefSpec::Cell(addr))
    }

    /// Every reference in left-to-right source order, duplicates kept.
    pub fn refs(&self) -> Vec<&RefSpec> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a RefSpec>) {
        match self {
            Expr::Number(_) | Expr::Text(_) => {}
            Expr::Ref(r) => out.push(r),
            Expr::Call { args, .. } => args.iter().for_each(|a| a.collect_refs(out)),
            Expr::Binary { left, right, .. } => {
                left.collect_refs(out);
                right.collect_refs(out);
            }
            Expr::Neg(child) => child.collect_refs(out),
        }
    }

    /// Maximum number of function calls on any root-to-leaf path.
    pub fn nesting_depth(&self) -> usize {
        match self {
            Expr::Number(_) | Expr::Text(_) | Expr::Ref(_) => 0,
            Expr::Call { args, .. } => 1 + args.iter().map(Expr::nesting_depth).max().unwrap_or(0),
            Expr::Binary { left, right, .. } => left.nesting_depth().max(right.nesting_depth()),
            Expr::Neg(child) => child.nesting_depth(),
        }
    }

    /// Function calls along the deepest path, outermost first. Ties go to
    /// the leftmost branch.
    pub fn deepest_calls(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        let mut node = self;
        loop {
            let next = match node {
                Expr::Call { args, .. } => {
                    out.push(node);
                    leftmost_deepest(args.iter())
                }
                Expr::Binary { left, right, .. } => {
                    leftmost_deepest([left.as_ref(), right.as_ref()].into_iter())
                }
                Expr::Neg(child) => Some(child.as_ref()),
                _ => None,
            };
            match next {
                Some(n) if n.nesting_depth() > 0 => node = n,
                _ => return out,
            }
        }
    }
}

fn leftmost_deepest<'a>(nodes: impl Iterator<Item = &'a Expr>) -> Option<&'a Expr> {
    let mut best: Option<(&Expr, usize)> = None;
    for n in nodes {
        let d = n.nesting_depth();
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some((n, d));
        }
    }
    best.map(|(n, _)| n)
}

/// References of `ast` in source order.
pub fn extract_refs(ast: &Expr) -> Vec<RefSpec> {
    ast.refs().into_iter().cloned().collect()
}

pub fn nesting_depth(ast: &Expr) -> usize {
    ast.nesting_depth()
}
