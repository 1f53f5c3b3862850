use std::fmt::Write;

use super::ast::{Expr, RefSpec};
use super::SheetContext;
use crate::address::CellAddress;

/// Canonical text of `ast`, standalone sheet context.
pub fn print(ast: &Expr) -> String {
    print_in(ast, &SheetContext::default())
}

/// Canonical text: uppercase function names, no whitespace, and only the
/// parentheses precedence requires.
pub fn print_in(ast: &Expr, ctx: &SheetContext<'_>) -> String {
    let mut out = String::from("=");
    write_expr(&mut out, ast, ctx);
    out
}

pub fn print_ref(r: &RefSpec, ctx: &SheetContext<'_>) -> String {
    let mut out = String::new();
    write_ref(&mut out, r, ctx);
    out
}

fn write_expr(out: &mut String, e: &Expr, ctx: &SheetContext<'_>) {
    match e {
        Expr::Number(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Text(s) => {
            out.push('"');
            out.push_str(&s.replace('"', "\"\""));
            out.push('"');
        }
        Expr::Ref(r) => write_ref(out, r, ctx),
        Expr::Call { func, args } => {
            out.push_str(func.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(out, a, ctx);
            }
            out.push(')');
        }
        Expr::Binary { op, left, right } => {
            let left_parens = !op.is_additive() && is_additive(left);
            let right_parens = if op.is_additive() {
                is_additive(right)
            } else {
                matches!(**right, Expr::Binary { .. })
            };
            write_maybe_parens(out, left, left_parens, ctx);
            out.push(op.symbol());
            write_maybe_parens(out, right, right_parens, ctx);
        }
        Expr::Neg(child) => {
            out.push('-');
            let parens = matches!(**child, Expr::Binary { .. } | Expr::Neg(_));
            write_maybe_parens(out, child, parens, ctx);
        }
    }
}

fn is_additive(e: &Expr) -> bool {
    matches!(e, Expr::Binary { op, .. } if op.is_additive())
}

fn write_maybe_parens(out: &mut String, e: &Expr, parens: bool, ctx: &SheetContext<'_>) {
    if parens {
        out.push('(');
        write_expr(out, e, ctx);
        out.push(')');
    } else {
        write_expr(out, e, ctx);
    }
}

fn write_ref(out: &mut String, r: &RefSpec, ctx: &SheetContext<'_>) {
    match r {
        RefSpec::Cell(a) => write_cell(out, *a, ctx),
        RefSpec::Range { start, end } => {
            write_cell(out, *start, ctx);
            out.push(':');
            let _ = write!(out, "{end}");
        }
        RefSpec::Cluster(label) => {
            out.push('@');
            out.push_str(label);
        }
    }
}

fn write_cell(out: &mut String, a: CellAddress, ctx: &SheetContext<'_>) {
    if a.sheet != ctx.home {
        out.push_str(&ctx.name(a.sheet));
        out.push('!');
    }
    let _ = write!(out, "{a}");
}
