//! Workbook state, dependency tracking and incremental recomputation.

mod cluster;
mod edit;
mod eval;
mod graph;
mod value;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use cluster::{is_valid_label, ClusterCell, ClusterId};
pub use edit::split_range;
pub use graph::DependencyGraph;
pub use value::{CellContent, ErrorKind, RecalcResult, Value};

use crate::address::CellAddress;
use crate::chart::{ChartId, ChartSpec, FitError};
use crate::formula::{self, Expr, FormulaError, Function, RefSpec, SheetContext};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EngineError {
    #[error("no sheet with index {0}")]
    NoSuchSheet(usize),
    #[error("sheet name `{0}` is already used")]
    DuplicateSheet(String),
    #[error("invalid sheet name `{0}`")]
    InvalidSheetName(String),
    #[error("cell {0} cannot anchor a cluster or be overwritten while it does")]
    BadAnchor(CellAddress),
    #[error("cluster label `{0}` is already used")]
    DuplicateLabel(String),
    #[error("invalid cluster label `{0}`")]
    InvalidLabel(String),
    #[error("member `{member}` has level {member_level}, not below {level}")]
    LevelViolation {
        member: String,
        level: u32,
        member_level: u32,
    },
    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),
    #[error("no cluster with id {0}")]
    NoSuchCluster(ClusterId),
    #[error("{0:?} is not a member of the cluster")]
    NotAMember(RefSpec),
    #[error("cell {0} does not hold a function call")]
    NotAFunction(CellAddress),
    #[error("{victim} is not a source of {cell}")]
    NotASource {
        cell: CellAddress,
        victim: CellAddress,
    },
    #[error("cluster `{cluster}` is a member of `{user}`")]
    ClusterInUse { cluster: String, user: String },
    #[error("chart series has no numeric value")]
    EmptySeries,
    #[error("no chart with id {0}")]
    NoSuchChart(ChartId),
    #[error("chart must span at least one cell in each direction")]
    BadChartSize,
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

static EMPTY: CellContent = CellContent::Empty;

/// The single mutable document: sheets, cells, clusters and charts.
#[derive(Clone, Debug)]
pub struct Workbook {
    sheet_names: Vec<String>,
    cells: BTreeMap<CellAddress, CellContent>,
    clusters: BTreeMap<ClusterId, ClusterCell>,
    anchor_values: BTreeMap<CellAddress, Value>,
    next_cluster_id: u32,
    pub(crate) charts: Vec<ChartSpec>,
    pub(crate) next_chart_id: u32,
    graph: DependencyGraph,
    revision: u64,
}

impl Default for Workbook {
    fn default() -> Self {
        Self::new()
    }
}

impl Workbook {
    /// A workbook with one empty sheet named `Sheet1`.
    pub fn new() -> Self {
        Self::with_sheets(["Sheet1"]).expect("valid default sheet")
    }

    pub fn with_sheets<S: AsRef<str>>(
        names: impl IntoIterator<Item = S>,
    ) -> Result<Self, EngineError> {
        let mut wb = Workbook {
            sheet_names: Vec::new(),
            cells: BTreeMap::new(),
            clusters: BTreeMap::new(),
            anchor_values: BTreeMap::new(),
            next_cluster_id: 1,
            charts: Vec::new(),
            next_chart_id: 1,
            graph: DependencyGraph::default(),
            revision: 0,
        };
        for n in names {
            wb.add_sheet(n.as_ref())?;
        }
        if wb.sheet_names.is_empty() {
            wb.add_sheet("Sheet1")?;
        }
        wb.revision = 0;
        Ok(wb)
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn sheet_count(&self) -> usize {
        self.sheet_names.len()
    }

    pub fn sheet_names(&self) -> &[String] {
        &self.sheet_names
    }

    pub fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheet_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
    }

    pub fn add_sheet(&mut self, name: &str) -> Result<usize, EngineError> {
        if !is_valid_label(name) {
            return Err(EngineError::InvalidSheetName(name.to_string()));
        }
        if self.sheet_index(name).is_some() {
            return Err(EngineError::DuplicateSheet(name.to_string()));
        }
        self.sheet_names.push(name.to_string());
        self.revision += 1;
        Ok(self.sheet_names.len() - 1)
    }

    /// Formula context for formulas stored on `sheet`.
    pub fn context(&self, sheet: usize) -> SheetContext<'_> {
        SheetContext::with_names(sheet, &self.sheet_names)
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub(crate) fn check_sheet(&self, sheet: usize) -> Result<(), EngineError> {
        if sheet < self.sheet_count() {
            Ok(())
        } else {
            Err(EngineError::NoSuchSheet(sheet))
        }
    }

    pub fn content(&self, addr: CellAddress) -> &CellContent {
        self.cells.get(&addr).unwrap_or(&EMPTY)
    }

    /// Non-empty cells in address order.
    pub fn cells(&self) -> impl Iterator<Item = (CellAddress, &CellContent)> {
        self.cells.iter().map(|(a, c)| (*a, c))
    }

    pub fn sheet_cells(&self, sheet: usize) -> impl Iterator<Item = (CellAddress, &CellContent)> {
        let lo = CellAddress::new(sheet, 0, 0);
        let hi = CellAddress::new(sheet, u32::MAX, u32::MAX);
        self.cells.range(lo..=hi).map(|(a, c)| (*a, c))
    }

    /// Current value. Anchors report their cluster's sum; unset cells report
    /// `Value::Empty`.
    pub fn get_value(&self, addr: CellAddress) -> Value {
        if let Some(v) = self.anchor_values.get(&addr) {
            return v.clone();
        }
        self.content(addr).value()
    }

    /// Canonical formula text of `addr`, if it holds a formula.
    pub fn formula_text(&self, addr: CellAddress) -> Option<String> {
        self.content(addr)
            .ast()
            .map(|ast| formula::print_in(ast, &self.context(addr.sheet)))
    }

    /// Text a user would type to recreate the cell.
    pub fn input_text(&self, addr: CellAddress) -> String {
        match self.content(addr) {
            CellContent::Empty => String::new(),
            CellContent::Number(n) => n.to_string(),
            CellContent::Text(s) => s.clone(),
            CellContent::Formula { ast, .. } => formula::print_in(ast, &self.context(addr.sheet)),
        }
    }

    /// Interprets typed text: `=` starts a formula, numbers become numbers,
    /// blank clears the cell, anything else is text.
    pub fn parse_input(&self, sheet: usize, text: &str) -> Result<CellContent, EngineError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            Ok(CellContent::Empty)
        } else if trimmed.starts_with('=') {
            Ok(CellContent::formula(formula::parse_in(
                trimmed,
                &self.context(sheet),
            )?))
        } else if let Ok(n) = trimmed.parse::<f64>() {
            if n.is_finite() {
                Ok(CellContent::Number(n))
            } else {
                Ok(CellContent::Text(text.to_string()))
            }
        } else {
            Ok(CellContent::Text(text.to_string()))
        }
    }

    pub fn set_input(
        &mut self,
        addr: CellAddress,
        text: &str,
    ) -> Result<RecalcResult, EngineError> {
        self.check_sheet(addr.sheet)?;
        let content = self.parse_input(addr.sheet, text)?;
        self.set_cell(addr, content)
    }

    /// Stores `content` and recomputes everything downstream of `addr`.
    pub fn set_cell(
        &mut self,
        addr: CellAddress,
        content: CellContent,
    ) -> Result<RecalcResult, EngineError> {
        self.check_sheet(addr.sheet)?;
        if self.cluster_at(addr).is_some() {
            return Err(EngineError::BadAnchor(addr));
        }
        let content = match content {
            CellContent::Formula { ast, .. } => CellContent::formula(ast),
            other => other,
        };
        match &content {
            CellContent::Empty => {
                self.cells.remove(&addr);
            }
            _ => {
                self.cells.insert(addr, content);
            }
        }
        match self.cells.get(&addr).and_then(CellContent::ast) {
            Some(ast) => {
                let expansion = self.formula_expansion(ast);
                self.graph.set_node(addr, expansion);
            }
            None => {
                self.graph.remove_node(addr);
            }
        }
        let result = self.recalc_from([addr]);
        self.finish_mutation();
        Ok(result)
    }

    /// Recomputes every node from scratch.
    pub fn recalc_all(&mut self) -> RecalcResult {
        let nodes: Vec<CellAddress> = self.graph.nodes().collect();
        self.recalc_from(nodes)
    }

    /// Evaluates an expression against the current values without storing it.
    pub fn evaluate(&self, expr: &Expr) -> Value {
        eval::evaluate(expr, self)
    }

    /// Cells a reference reads in aggregate context. Anchors and cluster
    /// refs expand to the cluster's leaves.
    pub fn resolve_ref(&self, r: &RefSpec) -> Result<Vec<CellAddress>, ErrorKind> {
        match r {
            RefSpec::Cell(a) => {
                if a.sheet >= self.sheet_count() {
                    return Err(ErrorKind::Ref);
                }
                Ok(match self.cluster_at(*a) {
                    Some(c) => self.flatten(c),
                    None => vec![*a],
                })
            }
            RefSpec::Range { start, .. } => {
                if start.sheet >= self.sheet_count() {
                    return Err(ErrorKind::Ref);
                }
                Ok(r.cells())
            }
            RefSpec::Cluster(label) => match self.cluster_by_label(label) {
                Some(c) => Ok(self.flatten(c)),
                None => Err(ErrorKind::Name),
            },
        }
    }

    /// Scalar value of a cluster: the sum of its numeric leaves. Errors in
    /// leaves propagate.
    pub fn cluster_value(&self, cluster: &ClusterCell) -> Value {
        let mut sum = 0.0;
        for leaf in self.flatten(cluster) {
            match self.get_value(leaf) {
                Value::Num(n) => sum += n,
                Value::Err(e) => return Value::Err(e),
                Value::Empty | Value::Str(_) => {}
            }
        }
        Value::Num(sum)
    }

    /// Expanded input cells of a formula, duplicates kept.
    fn formula_expansion(&self, ast: &Expr) -> Vec<CellAddress> {
        ast.refs()
            .into_iter()
            .flat_map(|r| self.resolve_ref(r).unwrap_or_default())
            .collect()
    }

    fn node_expansion(&self, addr: CellAddress) -> Option<Vec<CellAddress>> {
        if let Some(c) = self.cluster_at(addr) {
            return Some(self.flatten(c));
        }
        self.content(addr)
            .ast()
            .map(|ast| self.formula_expansion(ast))
    }

    fn recalc_from(&mut self, seeds: impl IntoIterator<Item = CellAddress>) -> RecalcResult {
        let dirty: BTreeSet<CellAddress> = self
            .graph
            .downstream(seeds)
            .into_iter()
            .filter(|a| self.graph.is_node(*a))
            .collect();
        let (order, cyclic) = self.graph.order(&dirty);
        let mut result = RecalcResult::default();
        let cycle = Value::Err(ErrorKind::Cycle);
        for addr in order {
            // A precedent outside the dirty set may already be on a cycle.
            let tainted = self
                .graph
                .precedents(addr)
                .any(|p| self.graph.is_node(p) && self.get_value(p) == cycle);
            let v = if tainted {
                cycle.clone()
            } else {
                match self.cluster_at(addr) {
                    Some(c) => self.cluster_value(c),
                    None => match self.content(addr).ast() {
                        Some(ast) => eval::evaluate(ast, self),
                        None => continue,
                    },
                }
            };
            self.store(addr, v.clone());
            result.recomputed.push((addr, v));
        }
        for addr in cyclic {
            let v = Value::Err(ErrorKind::Cycle);
            self.store(addr, v.clone());
            result.recomputed.push((addr, v));
        }
        result
    }

    fn store(&mut self, addr: CellAddress, v: Value) {
        if self.cluster_at(addr).is_some() {
            self.anchor_values.insert(addr, v);
        } else if let Some(CellContent::Formula { cached, .. }) = self.cells.get_mut(&addr) {
            *cached = v;
        }
    }

    /// Re-derives all graph nodes after a structural change (cluster or
    /// chart edits) and recomputes whatever it affects.
    pub(crate) fn commit_structure_change(&mut self) -> RecalcResult {
        let anchors: BTreeSet<CellAddress> = self.clusters.values().map(|c| c.anchor).collect();
        let old_anchors: BTreeSet<CellAddress> = self.anchor_values.keys().copied().collect();
        let mut seeds: Vec<CellAddress> = Vec::new();
        for gone in old_anchors.difference(&anchors) {
            self.anchor_values.remove(gone);
            self.graph.remove_node(*gone);
            seeds.push(*gone);
        }
        let candidates: BTreeSet<CellAddress> = self
            .cells
            .iter()
            .filter(|(_, c)| c.ast().is_some())
            .map(|(a, _)| *a)
            .chain(anchors.iter().copied())
            .collect();
        for addr in candidates {
            let Some(expansion) = self.node_expansion(addr) else {
                continue;
            };
            let refers_to_cluster = self.content(addr).ast().is_some_and(|ast| {
                ast.refs().iter().any(|r| match r {
                    RefSpec::Cluster(_) => true,
                    RefSpec::Cell(a) => anchors.contains(a) || old_anchors.contains(a),
                    RefSpec::Range { .. } => false,
                })
            });
            let is_new_anchor = anchors.contains(&addr) && !old_anchors.contains(&addr);
            if self.graph.set_node(addr, expansion) || refers_to_cluster || is_new_anchor {
                seeds.push(addr);
            }
        }
        let result = self.recalc_from(seeds);
        self.finish_mutation();
        result
    }

    fn finish_mutation(&mut self) {
        self.revision += 1;
        self.refit_charts();
    }

    /// Appends `refs` as trailing arguments of the root function call.
    pub fn add_source(
        &mut self,
        cell: CellAddress,
        refs: &[RefSpec],
    ) -> Result<RecalcResult, EngineError> {
        let (func, mut args) = self.root_call(cell)?;
        if refs.is_empty() {
            return Ok(RecalcResult::default());
        }
        args.extend(refs.iter().cloned().map(Expr::Ref));
        self.replace_root_call(cell, func, args)
    }

    /// Removes `victim` from the root call's arguments, dropping a matching
    /// cell argument or splitting the first range that covers it.
    pub fn remove_source(
        &mut self,
        cell: CellAddress,
        victim: CellAddress,
    ) -> Result<RecalcResult, EngineError> {
        let (func, mut args) = self.root_call(cell)?;
        let pos = args.iter().position(|a| match a {
            Expr::Ref(r @ (RefSpec::Cell(_) | RefSpec::Range { .. })) => r.covers(victim),
            _ => false,
        });
        let Some(i) = pos else {
            return Err(EngineError::NotASource { cell, victim });
        };
        let pieces = match &args[i] {
            Expr::Ref(r @ RefSpec::Range { .. }) => split_range(r, victim),
            _ => Vec::new(),
        };
        args.splice(i..=i, pieces.into_iter().map(Expr::Ref));
        self.replace_root_call(cell, func, args)
    }

    /// Whether `victim` is read directly by the root call of `cell`.
    pub fn is_source(&self, cell: CellAddress, victim: CellAddress) -> bool {
        self.root_call(cell).is_ok_and(|(_, args)| {
            args.iter().any(|a| matches!(a, Expr::Ref(r @ (RefSpec::Cell(_) | RefSpec::Range { .. })) if r.covers(victim)))
        })
    }

    fn root_call(&self, cell: CellAddress) -> Result<(Function, Vec<Expr>), EngineError> {
        self.check_sheet(cell.sheet)?;
        match self.content(cell).ast() {
            Some(Expr::Call { func, args }) => Ok((*func, args.clone())),
            _ => Err(EngineError::NotAFunction(cell)),
        }
    }

    fn replace_root_call(
        &mut self,
        cell: CellAddress,
        func: Function,
        args: Vec<Expr>,
    ) -> Result<RecalcResult, EngineError> {
        if !func.accepts_arity(args.len()) {
            return Err(FormulaError::Arity {
                func,
                expected: func.arity_text(),
                got: args.len(),
            }
            .into());
        }
        self.set_cell(cell, CellContent::formula(Expr::call(func, args)))
    }

    /// Layered precedent edges: level 1 holds `addr -> p` for each direct
    /// precedent, level i the edges leaving the targets of level i-1.
    pub fn precedents_closure(
        &self,
        addr: CellAddress,
        depth: usize,
    ) -> Vec<BTreeSet<(CellAddress, CellAddress)>> {
        let mut levels = Vec::with_capacity(depth);
        let mut sources: BTreeSet<CellAddress> = BTreeSet::from([addr]);
        for _ in 0..depth {
            let edges: BTreeSet<(CellAddress, CellAddress)> = sources
                .iter()
                .flat_map(|s| self.graph.precedents(*s).map(move |p| (*s, p)))
                .collect();
            sources = edges.iter().map(|(_, to)| *to).collect();
            levels.push(edges);
        }
        levels
    }

    pub fn chart(&self, id: ChartId) -> Option<&ChartSpec> {
        self.charts.iter().find(|c| c.id == id)
    }

    pub fn charts(&self) -> &[ChartSpec] {
        &self.charts
    }
}
