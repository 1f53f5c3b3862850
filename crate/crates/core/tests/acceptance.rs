//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    depth_of_calls, evaluate_all, expand, random_cell, random_formula, random_nested_call, refs_of,
    Input,
};
use gridlayers::chart::{linear_trend, poly_trend};
use gridlayers::formula::{parse, print, BinaryOp, Expr, Function, RefSpec};
use gridlayers::interaction::{Button, Driver, InputEvent, Mode};
use gridlayers::scene::{nested_stack, ArcToggles, Viewport};
use gridlayers::session::{read_log, write_log, Document, Inbound, Session};
use gridlayers::tasks::{TaskScript, TASK_NAMES};
use gridlayers::{CellAddress, CellContent, Value, Workbook};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("parser round-trip on 10k random ASTs", parser_round_trip),
        (
            "incremental recalculation equals full recalculation",
            incremental_vs_full,
        ),
        ("dependency closure equals brute-force BFS", closure_vs_bfs),
        (
            "cluster aggregates equal flattened leaf aggregates",
            cluster_flattening,
        ),
        (
            "remove_source yields the prior multiset minus the victim",
            remove_source_exhaustive,
        ),
        ("nested stack depth and lowest layer value", nested_stacks),
        (
            "trendline residual orthogonality and quadratic recovery",
            trendlines,
        ),
        (
            "task scripts replay to their expected end states",
            task_scripts,
        ),
        ("event log replay is byte-identical", replay_determinism),
        (
            "lowering the pen retracts the menu without mutations",
            menu_retraction,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

// ------------------------------------------------------------ 1 round-trip

const LABELS: [&str; 4] = ["costs", "q1", "Rev_2", "_x"];

fn random_number(rng: &mut StdRng) -> f64 {
    match rng.gen_range(0..4) {
        0 => f64::from(rng.gen_range(0..1000u32)),
        1 => rng.gen_range(0.0..1.0),
        2 => rng.gen_range(0.0..1e6),
        _ => f64::from(rng.gen_range(0..100u32)) / 8.0,
    }
}

fn random_text(rng: &mut StdRng) -> String {
    let alphabet: Vec<char> = "ab Z9,\"()+-!@".chars().collect();
    (0..rng.gen_range(0..6))
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

fn random_ast(rng: &mut StdRng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..5) {
            0 => Expr::Number(random_number(rng)),
            1 => Expr::Text(random_text(rng)),
            2 => Expr::Ref(RefSpec::Cell(random_cell(rng, 60, 500))),
            3 => Expr::Ref(RefSpec::range(
                random_cell(rng, 60, 500),
                random_cell(rng, 60, 500),
            )),
            _ => Expr::Ref(RefSpec::Cluster(
                LABELS[rng.gen_range(0..LABELS.len())].to_string(),
            )),
        };
    }
    match rng.gen_range(0..3) {
        0 => {
            let func = Function::ALL[rng.gen_range(0..Function::ALL.len())];
            let n = loop {
                let n = rng.gen_range(1..5);
                if func.accepts_arity(n) {
                    break n;
                }
            };
            Expr::call(func, (0..n).map(|_| random_ast(rng, depth - 1)).collect())
        }
        1 => {
            let op =
                [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.gen_range(0..4)];
            Expr::binary(op, random_ast(rng, depth - 1), random_ast(rng, depth - 1))
        }
        _ => Expr::Neg(Box::new(random_ast(rng, depth - 1))),
    }
}

fn parser_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let start = Instant::now();
    for i in 0..10_000 {
        let depth = rng.gen_range(0..=6);
        let ast = random_ast(&mut rng, depth);
        let text = print(&ast);
        let back = parse(&text).map_err(|e| format!("case {i}: {text} failed to parse: {e}"))?;
        ensure(back == ast, || {
            format!("case {i}: {text} parsed to a different tree")
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("10000 ASTs in {elapsed:.2?}"))
}

// --------------------------------------------------- 2 incremental vs full

fn incremental_vs_full() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let start = Instant::now();
    let mut edits = 0;
    for seq in 0..1000 {
        let cols = rng.gen_range(1..=20);
        let rows = rng.gen_range(1..=20);
        let mut wb = Workbook::new();
        let mut model: BTreeMap<CellAddress, Input> = BTreeMap::new();
        for _ in 0..rng.gen_range(1..=30) {
            edits += 1;
            let addr = random_cell(&mut rng, cols, rows);
            match rng.gen_range(0..10) {
                0 => {
                    wb.set_cell(addr, CellContent::Empty)
                        .map_err(|e| e.to_string())?;
                    model.remove(&addr);
                }
                1..=4 => {
                    let n = f64::from(rng.gen_range(-9..=9));
                    wb.set_cell(addr, CellContent::Number(n))
                        .map_err(|e| e.to_string())?;
                    model.insert(addr, Input::Num(n));
                }
                _ => {
                    let depth = rng.gen_range(1..=4);
                    let e = random_formula(&mut rng, cols, rows, depth);
                    wb.set_cell(addr, CellContent::formula(e.clone()))
                        .map_err(|e| e.to_string())?;
                    model.insert(addr, Input::Formula(e));
                }
            }
        }
        let oracle = evaluate_all(&model);
        for row in 0..rows {
            for col in 0..cols {
                let a = CellAddress::new(0, row, col);
                let want = oracle.get(&a).cloned().unwrap_or(Value::Empty);
                let got = wb.get_value(a);
                ensure(got == want, || {
                    format!(
                        "sequence {seq}: {} incremental {got:?}, full {want:?} ({:?})",
                        a.a1(),
                        wb.formula_text(a)
                    )
                })?;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("1000 sequences, {edits} edits in {elapsed:.2?}"))
}

// ----------------------------------------------------------- 3 closure BFS

fn closure_vs_bfs() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut checks = 0;
    for w in 0..500 {
        let (cols, rows) = (8, 8);
        let mut wb = Workbook::new();
        let mut formulas: BTreeMap<CellAddress, Expr> = BTreeMap::new();
        for _ in 0..rng.gen_range(1..25) {
            let addr = random_cell(&mut rng, cols, rows);
            if rng.gen_bool(0.3) {
                wb.set_cell(addr, CellContent::Number(1.0))
                    .map_err(|e| e.to_string())?;
                formulas.remove(&addr);
            } else {
                let e = random_formula(&mut rng, cols, rows, 3);
                wb.set_cell(addr, CellContent::formula(e.clone()))
                    .map_err(|e| e.to_string())?;
                formulas.insert(addr, e);
            }
        }
        let bfs = |root: CellAddress, depth: usize| {
            let mut levels = Vec::new();
            let mut frontier = vec![root];
            for _ in 0..depth {
                let mut edges = BTreeSet::new();
                for s in &frontier {
                    if let Some(e) = formulas.get(s) {
                        for r in refs_of(e) {
                            for t in expand(&r) {
                                edges.insert((*s, t));
                            }
                        }
                    }
                }
                frontier = edges
                    .iter()
                    .map(|(_, t)| *t)
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                levels.push(edges);
            }
            levels
        };
        for root in formulas
            .keys()
            .copied()
            .chain([random_cell(&mut rng, cols, rows)])
        {
            for depth in 1..=4 {
                checks += 1;
                let got = wb.precedents_closure(root, depth);
                let want = bfs(root, depth);
                ensure(got == want, || {
                    format!(
                        "workbook {w}: closure of {} at depth {depth} differs",
                        root.a1()
                    )
                })?;
            }
        }
    }
    Ok(format!("500 workbooks, {checks} closures"))
}

// ------------------------------------------------------- 4 cluster flatten

#[derive(Clone)]
struct ClusterModel {
    level: u32,
    anchor: CellAddress,
    members: Vec<RefSpec>,
}

fn flatten_model(
    label: &str,
    clusters: &BTreeMap<String, ClusterModel>,
    out: &mut Vec<CellAddress>,
) {
    let c = &clusters[label];
    for m in &c.members {
        match m {
            RefSpec::Cluster(l) => flatten_model(l, clusters, out),
            RefSpec::Cell(a) => match clusters.iter().find(|(_, k)| k.anchor == *a) {
                Some((l, _)) => flatten_model(l, clusters, out),
                None => out.push(*a),
            },
            RefSpec::Range { .. } => out.extend(expand(m)),
        }
    }
}

fn cluster_flattening() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut formulas = 0;
    for h in 0..500 {
        let mut wb = Workbook::new();
        let mut grid: BTreeMap<CellAddress, Value> = BTreeMap::new();
        for row in 0..8 {
            for col in 0..8 {
                let a = CellAddress::new(0, row, col);
                match rng.gen_range(0..10) {
                    0 => {}
                    1 => {
                        wb.set_cell(a, CellContent::Text("x".into()))
                            .map_err(|e| e.to_string())?;
                        grid.insert(a, Value::Str("x".into()));
                    }
                    _ => {
                        let n = f64::from(rng.gen_range(-50..=50));
                        wb.set_cell(a, CellContent::Number(n))
                            .map_err(|e| e.to_string())?;
                        grid.insert(a, Value::Num(n));
                    }
                }
            }
        }
        let mut clusters: BTreeMap<String, ClusterModel> = BTreeMap::new();
        let levels = rng.gen_range(1..=3);
        let mut next_anchor = 0;
        for level in 1..=levels {
            for k in 0..rng.gen_range(1..=3) {
                let label = format!("c{level}_{k}");
                let lower: Vec<(String, CellAddress)> = clusters
                    .iter()
                    .filter(|(_, c)| c.level < level)
                    .map(|(l, c)| (l.clone(), c.anchor))
                    .collect();
                let mut members = Vec::new();
                for _ in 0..rng.gen_range(1..=4) {
                    let pick = rng.gen_range(0..4);
                    if pick >= 2 && !lower.is_empty() {
                        let (l, anchor) = &lower[rng.gen_range(0..lower.len())];
                        members.push(if pick == 2 {
                            RefSpec::Cluster(l.clone())
                        } else {
                            RefSpec::Cell(*anchor)
                        });
                    } else if pick == 0 {
                        members.push(RefSpec::Cell(random_cell(&mut rng, 8, 8)));
                    } else {
                        members.push(common::random_range(&mut rng, 8, 8));
                    }
                }
                let anchor = CellAddress::new(0, next_anchor, 10);
                next_anchor += 1;
                wb.define_cluster(&label, anchor, level, members.clone())
                    .map_err(|e| format!("hierarchy {h}: {e}"))?;
                clusters.insert(
                    label,
                    ClusterModel {
                        level,
                        anchor,
                        members,
                    },
                );
            }
        }
        let mut out_row = 0;
        for label in clusters.keys() {
            let mut leaves = Vec::new();
            flatten_model(label, &clusters, &mut leaves);
            let values: Vec<Value> = leaves
                .iter()
                .map(|a| grid.get(a).cloned().unwrap_or(Value::Empty))
                .collect();
            for func in [Function::Sum, Function::Count, Function::Average] {
                formulas += 1;
                let at = CellAddress::new(0, out_row, 12);
                out_row += 1;
                let e = Expr::call(func, vec![Expr::Ref(RefSpec::Cluster(label.clone()))]);
                wb.set_cell(at, CellContent::formula(e))
                    .map_err(|e| e.to_string())?;
                let want = common::aggregate(func, &values);
                let got = wb.get_value(at);
                let ok = match (func, &got, &want) {
                    (Function::Average, Value::Num(g), Value::Num(w)) => {
                        (g - w).abs() <= 1e-12 * w.abs().max(f64::MIN_POSITIVE)
                    }
                    _ => got == want,
                };
                ensure(ok, || {
                    format!(
                        "hierarchy {h}: {}(@{label}) = {got:?}, leaves give {want:?}",
                        func.name()
                    )
                })?;
            }
        }
    }
    Ok(format!("500 hierarchies, {formulas} aggregates"))
}

// ------------------------------------------------------ 5 remove_source

fn ref_multiset(wb: &Workbook, cell: CellAddress) -> Vec<CellAddress> {
    let mut cells: Vec<CellAddress> = wb
        .content(cell)
        .ast()
        .map(refs_of)
        .unwrap_or_default()
        .iter()
        .flat_map(expand)
        .collect();
    cells.sort();
    cells
}

fn remove_source_exhaustive() -> Outcome {
    let target = CellAddress::new(0, 0, 20);
    let fixed = RefSpec::Cell(CellAddress::new(0, 0, 0));
    let mut cases = 0;
    for origin in [(1, 1), (4, 2)] {
        for h in 1..=6 {
            for w in 1..=6 {
                let start = CellAddress::new(0, origin.0, origin.1);
                let end = CellAddress::new(0, origin.0 + h - 1, origin.1 + w - 1);
                let range = RefSpec::range(start, end);
                for victim in expand(&range) {
                    cases += 1;
                    let mut wb = Workbook::new();
                    let e = Expr::call(
                        Function::Sum,
                        vec![Expr::Ref(fixed.clone()), Expr::Ref(range.clone())],
                    );
                    wb.set_cell(target, CellContent::formula(e))
                        .map_err(|e| e.to_string())?;
                    let mut want = ref_multiset(&wb, target);
                    let pos = want
                        .iter()
                        .position(|c| *c == victim)
                        .expect("victim in range");
                    want.remove(pos);
                    wb.remove_source(target, victim)
                        .map_err(|e| e.to_string())?;
                    let got = ref_multiset(&wb, target);
                    ensure(got == want, || {
                        format!(
                            "{}x{h}x{w} removing {}: got {:?}",
                            start.a1(),
                            victim.a1(),
                            wb.formula_text(target)
                        )
                    })?;
                }
            }
        }
    }
    Ok(format!("{cases} removals"))
}

// ---------------------------------------------------------- 6 stacks

fn nested_stacks() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut wb = Workbook::new();
    for row in 0..6 {
        for col in 0..6 {
            wb.set_cell(
                CellAddress::new(0, row, col),
                CellContent::Number(f64::from(rng.gen_range(-9..=9))),
            )
            .map_err(|e| e.to_string())?;
        }
    }
    let at = CellAddress::new(0, 10, 10);
    let mut max_depth = 0;
    for i in 0..200 {
        let depth = rng.gen_range(1..=6);
        let e = random_nested_call(&mut rng, 6, 6, depth);
        let depth = depth_of_calls(&e);
        max_depth = max_depth.max(depth);
        wb.set_cell(at, CellContent::formula(e.clone()))
            .map_err(|e| e.to_string())?;
        let stack = nested_stack(&wb, at).map_err(|e| format!("formula {i}: {e}"))?;
        ensure(stack.len() == depth, || {
            format!(
                "formula {i}: {} layers, nesting {depth}: {}",
                stack.len(),
                print(&e)
            )
        })?;
        let cell = wb.get_value(at);
        ensure(stack[0].value == cell, || {
            format!("formula {i}: layer 1 {:?}, cell {cell:?}", stack[0].value)
        })?;
    }
    Ok(format!("200 formulas, nesting up to {max_depth}"))
}

// ---------------------------------------------------------- 7 trendlines

fn trendlines() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst_res = 0.0f64;
    for set in 0..100 {
        let n = rng.gen_range(2..50);
        let mut pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-10.0..10.0), rng.gen_range(-100.0..100.0)))
            .collect();
        pts[1].0 = pts[0].0 + 1.0;
        let (m, b) = linear_trend(&pts).map_err(|e| format!("set {set}: {e}"))?;
        let r: Vec<f64> = pts.iter().map(|(x, y)| y - (m * x + b)).collect();
        let s0: f64 = r.iter().sum();
        let s1: f64 = pts.iter().zip(&r).map(|((x, _), r)| x * r).sum();
        worst_res = worst_res.max(s0.abs()).max(s1.abs());
        ensure(s0.abs() <= 1e-9 && s1.abs() <= 1e-9, || {
            format!("set {set}: residual sums {s0:e}, {s1:e}")
        })?;
    }
    let mut worst_coef = 0.0f64;
    for set in 0..100 {
        let c: [f64; 3] = [
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        ];
        let mut xs: BTreeSet<i64> = BTreeSet::new();
        while xs.len() < rng.gen_range(3..20) {
            xs.insert(rng.gen_range(-40..40));
        }
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|x| {
                let x = *x as f64 / 4.0;
                (x, c[0] * x * x + c[1] * x + c[2])
            })
            .collect();
        let got = poly_trend(&pts, 2).map_err(|e| format!("quadratic {set}: {e}"))?;
        let err = got
            .iter()
            .zip(&c)
            .map(|(g, w)| (g - w).abs())
            .fold(0.0, f64::max);
        worst_coef = worst_coef.max(err);
        ensure(err <= 1e-9, || {
            format!("quadratic {set}: got {got:?}, planted {c:?}")
        })?;
    }
    Ok(format!(
        "max residual sum {worst_res:.1e}, max coefficient error {worst_coef:.1e}"
    ))
}

// ---------------------------------------------------------- 8 tasks

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tasks")
}

fn task_scripts() -> Outcome {
    let mut dir: Vec<PathBuf> = std::fs::read_dir(fixtures())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".task.json"))
        .collect();
    dir.sort();
    let mut seen = BTreeSet::new();
    let mut rc = BTreeMap::new();
    let mut failures = Vec::new();
    for path in &dir {
        let script = TaskScript::load(path).map_err(|e| e.to_string())?;
        let report = script.replay().map_err(|e| e.to_string())?;
        seen.insert(report.name.clone());
        if report.name == "RC" {
            rc.insert(report.variant.clone().unwrap_or_default(), report.events);
        }
        if !report.passed {
            failures.push(report.to_string());
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    let missing: Vec<&str> = TASK_NAMES
        .iter()
        .copied()
        .filter(|t| !seen.contains(*t))
        .collect();
    ensure(missing.is_empty(), || format!("no script for {missing:?}"))?;
    let (vr, text) = (rc.get("vr").copied(), rc.get("text").copied());
    match (vr, text) {
        (Some(vr), Some(text)) => {
            ensure(vr < text, || {
                format!("RC takes {vr} events in VR, {text} with text")
            })?;
            Ok(format!(
                "{} scripts, RC {vr} events vs {text} text",
                dir.len()
            ))
        }
        _ => Err("RC needs both vr and text variants".into()),
    }
}

// ------------------------------------------------------- 9 determinism

fn replay_bytes(initial: &Document, log: &str) -> Result<(String, String), String> {
    let messages = read_log(log).map_err(|e| e.to_string())?;
    let mut session = Session::from_document(initial).map_err(|e| e.to_string())?;
    let out = session.run(&messages);
    let frames = out
        .iter()
        .map(|o| serde_json::to_string(o).expect("serialize"))
        .collect::<Vec<_>>()
        .join("\n");
    Ok((session.document().to_json(), frames))
}

fn replay_determinism() -> Outcome {
    let mut logs: Vec<(Document, String)> = Vec::new();
    for entry in std::fs::read_dir(fixtures()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.to_string_lossy().to_string();
        if let Some(stem) = name.strip_suffix(".glev") {
            let initial = Document::from_json(
                &std::fs::read_to_string(format!("{stem}.initial.glw"))
                    .map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            logs.push((
                initial,
                std::fs::read_to_string(&path).map_err(|e| e.to_string())?,
            ));
        }
    }
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..20 {
        let events: Vec<Inbound> = fuzz_events(&mut rng, 200)
            .into_iter()
            .map(Inbound::event)
            .collect();
        logs.push((
            Document::from_workbook(&fuzz_workbook(), ArcToggles::default()),
            write_log(&events),
        ));
    }
    for (i, (initial, log)) in logs.iter().enumerate() {
        let first = replay_bytes(initial, log)?;
        let second = replay_bytes(initial, log)?;
        ensure(first.0 == second.0, || {
            format!("log {i}: saved documents differ")
        })?;
        ensure(first.1 == second.1, || {
            format!("log {i}: outbound messages differ")
        })?;
    }
    Ok(format!("{} logs replayed twice", logs.len()))
}

// ------------------------------------------------- 10 menu retraction

fn fuzz_workbook() -> Workbook {
    let mut wb = Workbook::new();
    for (cell, input) in [
        ("A1", "1"),
        ("B1", "2"),
        ("B2", "3"),
        ("B3", "4"),
        ("A4", "=SUM(A1,B1:B3)"),
        ("C2", "=B1*2"),
    ] {
        wb.set_input(CellAddress::parse_a1(cell, 0).expect("address"), input)
            .expect("input");
    }
    wb
}

fn fuzz_events(rng: &mut StdRng, n: usize) -> Vec<InputEvent> {
    let mut out = Vec::with_capacity(n);
    let (mut px, mut py) = (0.35, 0.35);
    while out.len() < n {
        match rng.gen_range(0..12) {
            0 | 1 => {
                px = rng.gen_range(0.0..1.0);
                py = rng.gen_range(0.0..1.0);
                out.push(InputEvent::PenDown { x: px, y: py });
                out.push(InputEvent::PenUp { x: px, y: py });
            }
            2 | 3 => {
                out.push(InputEvent::PenButton {
                    button: Button::Primary,
                    pressed: true,
                });
                out.push(InputEvent::PenButton {
                    button: Button::Primary,
                    pressed: false,
                });
            }
            4..=6 => {
                let h =
                    [0.0, 0.005, 0.025, 0.05, 0.075, rng.gen_range(0.0..0.1)][rng.gen_range(0..6)];
                let x = px + rng.gen_range(-0.08..0.08);
                let y = py + rng.gen_range(-0.08..0.08);
                out.push(InputEvent::PenHover { x, y, h });
            }
            7 => out.push(InputEvent::PenButton {
                button: Button::Secondary,
                pressed: rng.gen_bool(0.5),
            }),
            8 => {
                let (x, y) = (px + rng.gen_range(-0.2..0.2), py + rng.gen_range(-0.2..0.2));
                out.push(InputEvent::PenDown { x: px, y: py });
                out.push(InputEvent::PenMove { x, y });
                out.push(InputEvent::PenUp { x, y });
            }
            9 => out.push(InputEvent::Tick {
                dt: rng.gen_range(0.0..50.0),
            }),
            10 => out.push(InputEvent::Key {
                key: "Escape".into(),
            }),
            _ => out.push(InputEvent::PenHover {
                x: px,
                y: py,
                h: 0.0,
            }),
        }
    }
    out.truncate(n);
    out
}

fn menu_retraction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut total = 0;
    let mut menu_events = 0;
    let mut retractions = 0;
    for session in 0..100 {
        let mut d = Driver::new(fuzz_workbook(), Viewport::new(0, 10, 10));
        // Mutations since the menu opened, and whether a confirm press came.
        let mut episode: Option<(usize, bool)> = None;
        for (i, event) in fuzz_events(&mut rng, 100).iter().enumerate() {
            total += 1;
            let was_open = matches!(d.state.mode, Mode::MenuOpen { .. });
            // A primary click confirms; the machine acts on its release.
            let confirm = matches!(
                event,
                InputEvent::PenButton {
                    button: Button::Primary,
                    ..
                }
            );
            let effects = d.handle(event);
            let mutations = effects.iter().filter(|e| e.mutation().is_some()).count();
            if was_open {
                menu_events += 1;
                if !confirm {
                    ensure(mutations == 0, || {
                        format!("session {session} event {i}: {event:?} mutated from an open menu")
                    })?;
                }
                if let Some((m, c)) = episode.as_mut() {
                    *m += mutations;
                    *c |= confirm;
                }
            }
            let open = matches!(d.state.mode, Mode::MenuOpen { .. });
            if !was_open && open {
                episode = Some((0, false));
            }
            if was_open && !open {
                let lowered = matches!(event, InputEvent::PenHover { h, .. } if *h <= 0.0)
                    || matches!(event, InputEvent::PenDown { .. });
                if let (true, Some((m, false))) = (lowered, episode) {
                    retractions += 1;
                    ensure(m == 0, || {
                        format!("session {session} event {i}: {m} mutations before the retraction")
                    })?;
                }
                episode = None;
            }
        }
    }
    ensure(retractions > 0, || {
        "the fuzzer never retracted a menu".into()
    })?;
    Ok(format!(
        "{total} events, {menu_events} with a menu open, {retractions} retractions"
    ))
}
