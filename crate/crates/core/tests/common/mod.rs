//! Independent oracles and random generators shared by the acceptance and
//! property tests. Nothing here calls into the engine's evaluator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use gridlayers::formula::{BinaryOp, Expr, Function, RefSpec};
use gridlayers::{CellAddress, ErrorKind, Value};
use rand::rngs::StdRng;
use rand::Rng;

/// Cells covered by a cell or range reference, row-major.
pub fn expand(r: &RefSpec) -> Vec<CellAddress> {
    match r {
        RefSpec::Cell(a) => vec![*a],
        RefSpec::Range { start, end } => {
            let mut out = Vec::new();
            for row in start.row..=end.row {
                for col in start.col..=end.col {
                    out.push(CellAddress::new(start.sheet, row, col));
                }
            }
            out
        }
        RefSpec::Cluster(_) => panic!("the plain oracle has no clusters"),
    }
}

/// Every reference node, left to right.
pub fn refs_of(e: &Expr) -> Vec<RefSpec> {
    match e {
        Expr::Number(_) | Expr::Text(_) => Vec::new(),
        Expr::Ref(r) => vec![r.clone()],
        Expr::Call { args, .. } => args.iter().flat_map(refs_of).collect(),
        Expr::Binary { left, right, .. } => {
            let mut v = refs_of(left);
            v.extend(refs_of(right));
            v
        }
        Expr::Neg(c) => refs_of(c),
    }
}

pub fn depth_of_calls(e: &Expr) -> usize {
    match e {
        Expr::Number(_) | Expr::Text(_) | Expr::Ref(_) => 0,
        Expr::Call { args, .. } => 1 + args.iter().map(depth_of_calls).max().unwrap_or(0),
        Expr::Binary { left, right, .. } => depth_of_calls(left).max(depth_of_calls(right)),
        Expr::Neg(c) => depth_of_calls(c),
    }
}

#[derive(Clone, Debug)]
pub enum Input {
    Num(f64),
    Formula(Expr),
}

/// From-scratch evaluation of a single-sheet workbook without clusters.
///
/// A formula evaluates to `#CYCLE!` when it lies on a reference cycle or
/// can reach one; every other cell is evaluated by plain recursion.
pub fn evaluate_all(cells: &BTreeMap<CellAddress, Input>) -> BTreeMap<CellAddress, Value> {
    let succ: BTreeMap<CellAddress, Vec<CellAddress>> = cells
        .iter()
        .filter_map(|(a, c)| match c {
            Input::Formula(e) => Some((*a, refs_of(e).iter().flat_map(expand).collect())),
            Input::Num(_) => None,
        })
        .collect();
    let tainted = cycle_tainted(&succ);
    let mut memo: BTreeMap<CellAddress, Value> = BTreeMap::new();
    for a in cells.keys() {
        cell_value(*a, cells, &tainted, &mut memo);
    }
    memo
}

fn cell_value(
    a: CellAddress,
    cells: &BTreeMap<CellAddress, Input>,
    tainted: &BTreeSet<CellAddress>,
    memo: &mut BTreeMap<CellAddress, Value>,
) -> Value {
    if let Some(v) = memo.get(&a) {
        return v.clone();
    }
    let v = match cells.get(&a) {
        None => Value::Empty,
        Some(Input::Num(n)) => Value::Num(*n),
        Some(Input::Formula(_)) if tainted.contains(&a) => Value::Err(ErrorKind::Cycle),
        Some(Input::Formula(e)) => {
            let mut read = |c: CellAddress| cell_value(c, cells, tainted, memo);
            eval(e, &mut read)
        }
    };
    memo.insert(a, v.clone());
    v
}

/// Nodes on a cycle plus everything that reaches one (Tarjan SCC).
fn cycle_tainted(succ: &BTreeMap<CellAddress, Vec<CellAddress>>) -> BTreeSet<CellAddress> {
    struct T<'a> {
        succ: &'a BTreeMap<CellAddress, Vec<CellAddress>>,
        index: BTreeMap<CellAddress, usize>,
        low: BTreeMap<CellAddress, usize>,
        stack: Vec<CellAddress>,
        on: BTreeSet<CellAddress>,
        next: usize,
        comp: BTreeMap<CellAddress, usize>,
        comps: Vec<Vec<CellAddress>>,
    }
    impl T<'_> {
        fn visit(&mut self, v: CellAddress) {
            self.index.insert(v, self.next);
            self.low.insert(v, self.next);
            self.next += 1;
            self.stack.push(v);
            self.on.insert(v);
            for w in self.succ.get(&v).cloned().unwrap_or_default() {
                if !self.succ.contains_key(&w) {
                    continue;
                }
                if !self.index.contains_key(&w) {
                    self.visit(w);
                    let lw = self.low[&w];
                    let lv = self.low.get_mut(&v).unwrap();
                    *lv = (*lv).min(lw);
                } else if self.on.contains(&w) {
                    let iw = self.index[&w];
                    let lv = self.low.get_mut(&v).unwrap();
                    *lv = (*lv).min(iw);
                }
            }
            if self.low[&v] == self.index[&v] {
                let mut comp = Vec::new();
                loop {
                    let w = self.stack.pop().unwrap();
                    self.on.remove(&w);
                    self.comp.insert(w, self.comps.len());
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                self.comps.push(comp);
            }
        }
    }
    let mut t = T {
        succ,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on: BTreeSet::new(),
        next: 0,
        comp: BTreeMap::new(),
        comps: Vec::new(),
    };
    for v in succ.keys() {
        if !t.index.contains_key(v) {
            t.visit(*v);
        }
    }
    // Components come out dependencies-first.
    let mut bad = vec![false; t.comps.len()];
    for (i, comp) in t.comps.iter().enumerate() {
        let cyclic = comp.len() > 1 || succ[&comp[0]].contains(&comp[0]);
        let reaches = comp
            .iter()
            .flat_map(|v| succ[v].iter())
            .filter_map(|w| t.comp.get(w))
            .any(|c| *c != i && bad[*c]);
        bad[i] = cyclic || reaches;
    }
    t.comps
        .iter()
        .enumerate()
        .filter(|(i, _)| bad[*i])
        .flat_map(|(_, c)| c.iter().copied())
        .collect()
}

/// Evaluates an expression given a reader for cell values.
pub fn eval(e: &Expr, read: &mut dyn FnMut(CellAddress) -> Value) -> Value {
    match e {
        Expr::Number(n) => Value::Num(*n),
        Expr::Text(s) => Value::Str(s.clone()),
        Expr::Ref(RefSpec::Cell(a)) => match read(*a) {
            Value::Empty => Value::Num(0.0),
            v => v,
        },
        Expr::Ref(RefSpec::Range { .. }) => Value::Err(ErrorKind::Value),
        Expr::Ref(RefSpec::Cluster(_)) => panic!("the plain oracle has no clusters"),
        Expr::Neg(c) => match num(c, read) {
            Ok(x) => Value::Num(-x),
            Err(k) => Value::Err(k),
        },
        Expr::Binary { op, left, right } => {
            let l = match num(left, read) {
                Ok(x) => x,
                Err(k) => return Value::Err(k),
            };
            let r = match num(right, read) {
                Ok(x) => x,
                Err(k) => return Value::Err(k),
            };
            match op {
                BinaryOp::Add => Value::Num(l + r),
                BinaryOp::Sub => Value::Num(l - r),
                BinaryOp::Mul => Value::Num(l * r),
                BinaryOp::Div => {
                    if r == 0.0 {
                        Value::Err(ErrorKind::Div0)
                    } else {
                        Value::Num(l / r)
                    }
                }
            }
        }
        Expr::Call { func, args } => call(*func, args, read),
    }
}

fn num(e: &Expr, read: &mut dyn FnMut(CellAddress) -> Value) -> Result<f64, ErrorKind> {
    match eval(e, read) {
        Value::Num(x) => Ok(x),
        Value::Empty => Ok(0.0),
        Value::Str(_) => Err(ErrorKind::Value),
        Value::Err(k) => Err(k),
    }
}

fn round_to(x: f64, digits: f64) -> f64 {
    let d = (digits.trunc() as i32).clamp(-308, 308);
    if d >= 0 {
        let f = 10f64.powi(d);
        (x * f).round() / f
    } else {
        let f = 10f64.powi(-d);
        (x / f).round() * f
    }
}

fn call(func: Function, args: &[Expr], read: &mut dyn FnMut(CellAddress) -> Value) -> Value {
    match func {
        Function::Abs | Function::Round => {
            let mut xs = Vec::new();
            for a in args {
                match num(a, read) {
                    Ok(x) => xs.push(x),
                    Err(k) => return Value::Err(k),
                }
            }
            match (func, xs.as_slice()) {
                (Function::Abs, [x]) => Value::Num(x.abs()),
                (Function::Round, [x]) => Value::Num(round_to(*x, 0.0)),
                (Function::Round, [x, d]) => Value::Num(round_to(*x, *d)),
                _ => Value::Err(ErrorKind::Value),
            }
        }
        _ => {
            let mut values = Vec::new();
            for a in args {
                match a {
                    Expr::Ref(r) => values.extend(expand(r).into_iter().map(&mut *read)),
                    other => values.push(eval(other, read)),
                }
            }
            if let Some(k) = values.iter().find_map(|v| {
                if let Value::Err(k) = v {
                    Some(*k)
                } else {
                    None
                }
            }) {
                return Value::Err(k);
            }
            aggregate(func, &values)
        }
    }
}

/// SUM, COUNT, AVERAGE, MIN or MAX over values; non-numbers are skipped.
pub fn aggregate(func: Function, values: &[Value]) -> Value {
    let nums: Vec<f64> = values
        .iter()
        .filter_map(|v| {
            if let Value::Num(x) = v {
                Some(*x)
            } else {
                None
            }
        })
        .collect();
    let sum = || nums.iter().fold(0.0, |s, x| s + x);
    match func {
        Function::Sum => Value::Num(sum()),
        Function::Count => Value::Num(nums.len() as f64),
        Function::Average if nums.is_empty() => Value::Err(ErrorKind::Div0),
        Function::Average => Value::Num(sum() / nums.len() as f64),
        Function::Min => Value::Num(
            nums.iter()
                .copied()
                .fold(None, |m: Option<f64>, x| {
                    Some(m.map_or(x, |m| if x < m { x } else { m }))
                })
                .unwrap_or(0.0),
        ),
        Function::Max => Value::Num(
            nums.iter()
                .copied()
                .fold(None, |m: Option<f64>, x| {
                    Some(m.map_or(x, |m| if x > m { x } else { m }))
                })
                .unwrap_or(0.0),
        ),
        Function::Round | Function::Abs => unreachable!("not an aggregate"),
    }
}

/// Values compare equal when identical, treating `-0.0 == 0.0`.
pub fn same(a: &Value, b: &Value) -> bool {
    a == b
}

// ---------------------------------------------------------------- generators

pub const AGGREGATES: [Function; 5] = [
    Function::Sum,
    Function::Average,
    Function::Min,
    Function::Max,
    Function::Count,
];

pub fn random_cell(rng: &mut StdRng, cols: u32, rows: u32) -> CellAddress {
    CellAddress::new(0, rng.gen_range(0..rows), rng.gen_range(0..cols))
}

pub fn random_range(rng: &mut StdRng, cols: u32, rows: u32) -> RefSpec {
    let a = random_cell(rng, cols, rows);
    let b = CellAddress::new(
        0,
        (a.row + rng.gen_range(0..4)).min(rows - 1),
        (a.col + rng.gen_range(0..4)).min(cols - 1),
    );
    RefSpec::range(a, b)
}

/// Random formula over integer literals and cells of a `cols` x `rows`
/// grid, with at most `depth` levels of nodes below the root.
pub fn random_formula(rng: &mut StdRng, cols: u32, rows: u32, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => Expr::Number(f64::from(rng.gen_range(0..20))),
            _ => Expr::Ref(RefSpec::Cell(random_cell(rng, cols, rows))),
        };
    }
    match rng.gen_range(0..10) {
        0..=3 => {
            let func = AGGREGATES[rng.gen_range(0..AGGREGATES.len())];
            let n = rng.gen_range(1..4);
            let args = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Expr::Ref(random_range(rng, cols, rows))
                    } else {
                        random_formula(rng, cols, rows, depth - 1)
                    }
                })
                .collect();
            Expr::call(func, args)
        }
        4 => Expr::call(
            Function::Abs,
            vec![random_formula(rng, cols, rows, depth - 1)],
        ),
        5 => {
            let mut args = vec![random_formula(rng, cols, rows, depth - 1)];
            if rng.gen_bool(0.5) {
                args.push(Expr::Number(f64::from(rng.gen_range(0..3))));
            }
            Expr::call(Function::Round, args)
        }
        6 => Expr::Neg(Box::new(random_formula(rng, cols, rows, depth - 1))),
        _ => {
            let op =
                [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.gen_range(0..4)];
            Expr::binary(
                op,
                random_formula(rng, cols, rows, depth - 1),
                random_formula(rng, cols, rows, depth - 1),
            )
        }
    }
}

/// Random formula whose root is a function call and whose call nesting is
/// at least one.
pub fn random_nested_call(rng: &mut StdRng, cols: u32, rows: u32, depth: u32) -> Expr {
    loop {
        let e = random_formula(rng, cols, rows, depth);
        if matches!(e, Expr::Call { .. }) {
            return e;
        }
    }
}
