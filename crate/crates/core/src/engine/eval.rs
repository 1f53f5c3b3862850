//! Formula evaluation against the cached values of a workbook.

use super::value::{ErrorKind, Value};
use super::Workbook;
use crate::formula::{BinaryOp, Expr, Function, RefSpec};

/// Evaluates `expr` reading the workbook's current cached values.
pub(crate) fn evaluate(expr: &Expr, wb: &Workbook) -> Value {
    scalar(expr, wb)
}

fn scalar(expr: &Expr, wb: &Workbook) -> Value {
    match expr {
        Expr::Number(n) => Value::Num(*n),
        Expr::Text(s) => Value::Str(s.clone()),
        Expr::Ref(RefSpec::Cell(a)) => {
            if a.sheet >= wb.sheet_count() {
                return Value::Err(ErrorKind::Ref);
            }
            if let Some(c) = wb.cluster_at(*a) {
                return wb.cluster_value(c);
            }
            match wb.get_value(*a) {
                Value::Empty => Value::Num(0.0),
                v => v,
            }
        }
        Expr::Ref(RefSpec::Range { .. }) => Value::Err(ErrorKind::Value),
        Expr::Ref(RefSpec::Cluster(label)) => match wb.cluster_by_label(label) {
            Some(c) => wb.cluster_value(c),
            None => Value::Err(ErrorKind::Name),
        },
        Expr::Call { func, args } => call(*func, args, wb),
        Expr::Binary { op, left, right } => {
            let l = match number(left, wb) {
                Ok(n) => n,
                Err(e) => return Value::Err(e),
            };
            let r = match number(right, wb) {
                Ok(n) => n,
                Err(e) => return Value::Err(e),
            };
            match op {
                BinaryOp::Add => Value::Num(l + r),
                BinaryOp::Sub => Value::Num(l - r),
                BinaryOp::Mul => Value::Num(l * r),
                BinaryOp::Div if r == 0.0 => Value::Err(ErrorKind::Div0),
                BinaryOp::Div => Value::Num(l / r),
            }
        }
        Expr::Neg(child) => match number(child, wb) {
            Ok(n) => Value::Num(-n),
            Err(e) => Value::Err(e),
        },
    }
}

fn number(expr: &Expr, wb: &Workbook) -> Result<f64, ErrorKind> {
    match scalar(expr, wb) {
        Value::Num(n) => Ok(n),
        Value::Empty => Ok(0.0),
        Value::Str(_) => Err(ErrorKind::Value),
        Value::Err(e) => Err(e),
    }
}

fn call(func: Function, args: &[Expr], wb: &Workbook) -> Value {
    if !func.is_aggregate() {
        return scalar_call(func, args, wb);
    }
    let values = match aggregate_inputs(args, wb) {
        Ok(v) => v,
        Err(e) => return Value::Err(e),
    };
    let nums = values.iter().filter_map(Value::as_num);
    match func {
        Function::Sum => Value::Num(nums.fold(0.0, |acc, n| acc + n)),
        Function::Count => Value::Num(nums.count() as f64),
        Function::Average => {
            let (sum, count) = nums.fold((0.0, 0usize), |(s, c), n| (s + n, c + 1));
            if count == 0 {
                Value::Err(ErrorKind::Div0)
            } else {
                Value::Num(sum / count as f64)
            }
        }
        Function::Min => Value::Num(nums.reduce(f64::min).unwrap_or(0.0)),
        Function::Max => Value::Num(nums.reduce(f64::max).unwrap_or(0.0)),
        Function::Round | Function::Abs => unreachable!(),
    }
}

fn scalar_call(func: Function, args: &[Expr], wb: &Workbook) -> Value {
    let mut nums = Vec::with_capacity(args.len());
    for a in args {
        match number(a, wb) {
            Ok(n) => nums.push(n),
            Err(e) => return Value::Err(e),
        }
    }
    match (func, nums.as_slice()) {
        (Function::Abs, [x]) => Value::Num(x.abs()),
        (Function::Round, [x]) => Value::Num(round_half_away(*x, 0)),
        (Function::Round, [x, digits]) => Value::Num(round_half_away(*x, digits.trunc() as i32)),
        _ => Value::Err(ErrorKind::Value),
    }
}

/// Rounds half away from zero to `digits` decimal places (negative digits
/// round to tens, hundreds, ...).
pub(crate) fn round_half_away(x: f64, digits: i32) -> f64 {
    let digits = digits.clamp(-308, 308);
    if digits >= 0 {
        let f = 10f64.powi(digits);
        (x * f).round() / f
    } else {
        let f = 10f64.powi(-digits);
        (x / f).round() * f
    }
}

/// Inputs of an aggregate in argument order: ranges and clusters expand to
/// their cells, anything else contributes one value. The first error wins.
fn aggregate_inputs(args: &[Expr], wb: &Workbook) -> Result<Vec<Value>, ErrorKind> {
    let mut out = Vec::new();
    for arg in args {
        match arg {
            Expr::Ref(r) => {
                let cells = wb.resolve_ref(r)?;
                for c in cells {
                    out.push(wb.get_value(c));
                }
            }
            other => out.push(scalar(other, wb)),
        }
    }
    match out.iter().find_map(|v| match v {
        Value::Err(e) => Some(*e),
        _ => None,
    }) {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_half_away(2.5, 0), 3.0);
        assert_eq!(round_half_away(-2.5, 0), -3.0);
        assert_eq!(round_half_away(1.25, 1), 1.3);
        assert_eq!(round_half_away(1234.0, -2), 1200.0);
        assert_eq!(round_half_away(4.199999999999999, 0), 4.0);
    }
}
