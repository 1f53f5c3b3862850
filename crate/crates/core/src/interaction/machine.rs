use std::collections::{BTreeSet, VecDeque};

use super::events::{Button, Effect, EngineMutation, InputEvent, ViewportCommand};
use super::menu::{default_menu, menu_level_for_height, MenuAction, MenuNode, OpenMenu};
use super::stroke::{classify_stroke, StrokeClass};
use crate::address::CellAddress;
use crate::chart::{ChartId, ChartKind};
use crate::engine::{CellContent, Workbook};
use crate::formula::{print_in, print_ref, Expr, Function, RefSpec};
use crate::scene::{
    arc_entry_at, project, slide_to_align, ArcToggles, LabelPrompt, SceneError, SceneFrame,
    SceneInputs, SlideAnimation, TabSlide, Toggle, ViewMode, Viewport, DEFAULT_LINK_DEPTH,
    MAX_LEVELS, SLIDE_DURATION_MS, TAB_GAP, TRASH_RECT,
};

/// Where a pie menu was invoked: on an empty target cell (function first)
/// or on the current selection (sources first).
#[derive(Clone, Debug, PartialEq)]
pub enum MenuTarget {
    Cell(CellAddress),
    Selection(Vec<RefSpec>),
}

/// What is being dragged to the trash bin.
#[derive(Clone, Debug, PartialEq)]
pub enum TrashPayload {
    /// A source cell of a function node.
    Source {
        cell: CellAddress,
        victim: CellAddress,
    },
    /// A member cell of a cluster.
    Member { label: String, victim: CellAddress },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinkOrigin {
    /// Dragging from a function or cluster node down to cells.
    Node(CellAddress),
    /// Dragging from the selected cells up to a node.
    Selection(Vec<RefSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Idle,
    /// Pen in contact, selecting from `start`.
    SelectingCells {
        start: CellAddress,
        current: CellAddress,
    },
    MenuOpen {
        menu: OpenMenu,
        target: MenuTarget,
    },
    /// Function chosen for `target`; taps collect its sources.
    CollectingSources {
        func: Function,
        target: CellAddress,
    },
    /// Function chosen over selected sources; the next tap picks the target.
    PlacingFunction {
        func: Function,
        sources: Vec<RefSpec>,
    },
    DraggingLink {
        origin: LinkOrigin,
        collected: Vec<CellAddress>,
    },
    DraggingToTrash {
        payload: TrashPayload,
    },
    SizingChart {
        series: RefSpec,
        kind: ChartKind,
        anchor: Option<CellAddress>,
    },
    Stroking {
        chart: ChartId,
        points: Vec<(f64, f64)>,
    },
    EditingText {
        cell: CellAddress,
        text: String,
    },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Idle => "Idle",
            Mode::SelectingCells { .. } => "SelectingCells",
            Mode::MenuOpen { .. } => "MenuOpen",
            Mode::CollectingSources { .. } => "CollectingSources",
            Mode::PlacingFunction { .. } => "PlacingFunction",
            Mode::DraggingLink { .. } => "DraggingLink",
            Mode::DraggingToTrash { .. } => "DraggingToTrash",
            Mode::SizingChart { .. } => "SizingChart",
            Mode::Stroking { .. } => "Stroking",
            Mode::EditingText { .. } => "EditingText",
        }
    }
}

/// Mode the pen contact returns to when it lifts.
#[derive(Clone, Debug, PartialEq)]
enum Contact {
    None,
    /// Contact consumed by a widget or an in-air pick.
    Consumed,
    Selecting {
        start: CellAddress,
        current: CellAddress,
        resume: Box<Mode>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slide {
    pub animation: SlideAnimation,
    pub tabs: Option<(usize, usize)>,
    pub elapsed_ms: f64,
}

/// Complete state of the pen/gaze interaction machine.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionState {
    pub mode: Mode,
    pub buffer: Vec<RefSpec>,
    pub cursor: Option<CellAddress>,
    /// Function or cluster node the user last selected.
    pub focus: Option<CellAddress>,
    pub pointer: Option<(f64, f64)>,
    pub hover_h: f64,
    pub primary_held: bool,
    taps_during_hold: usize,
    contact: Contact,
    pub gaze: Option<usize>,
    pub viewport: Viewport,
    pub toggles: ArcToggles,
    pub hidden_links: BTreeSet<CellAddress>,
    pub link_depth: usize,
    pub slide: Option<Slide>,
    pub queued: VecDeque<InputEvent>,
    pub menu_tree: MenuNode,
    /// Cluster waiting for its label.
    pub pending_label: Option<LabelPrompt>,
}

impl InteractionState {
    pub fn new(viewport: Viewport) -> Self {
        InteractionState {
            mode: Mode::Idle,
            buffer: Vec::new(),
            cursor: None,
            focus: None,
            pointer: None,
            hover_h: 0.0,
            primary_held: false,
            taps_during_hold: 0,
            contact: Contact::None,
            gaze: None,
            viewport,
            toggles: ArcToggles::default(),
            hidden_links: BTreeSet::new(),
            link_depth: DEFAULT_LINK_DEPTH,
            slide: None,
            queued: VecDeque::new(),
            menu_tree: default_menu(),
            pending_label: None,
        }
    }

    pub fn scene_inputs(&self) -> SceneInputs {
        let mut selection = self.buffer.clone();
        if let Contact::Selecting { start, current, .. } = &self.contact {
            selection.push(selection_ref(*start, *current));
        }
        SceneInputs {
            mode: self.mode.name().to_string(),
            cursor: self.cursor,
            selection,
            focus: self.focus,
            gazed_tab: self.gaze,
            tab_slide: self.slide.as_ref().and_then(|s| {
                s.tabs.map(|(from, to)| TabSlide {
                    from,
                    to,
                    phase: slide_phase(s),
                })
            }),
            menu: match &self.mode {
                Mode::MenuOpen { menu, .. } => Some(menu.scene()),
                _ => None,
            },
            hidden_links: self.hidden_links.clone(),
            link_depth: self.link_depth,
            slide: self.slide.as_ref().map(|s| s.animation.clone()),
            label_prompt: self.pending_label.clone(),
        }
    }

    pub fn frame(&self, wb: &Workbook) -> SceneFrame {
        project(wb, &self.viewport, &self.scene_inputs(), &self.toggles)
    }

    pub fn hover_level(&self) -> usize {
        menu_level_for_height(self.hover_h, MAX_LEVELS as usize)
    }

    fn pointer_cell(&self) -> Option<CellAddress> {
        self.pointer
            .and_then(|(x, y)| self.viewport.screen_cell_at(x, y))
    }

    pub fn set_toggle(&mut self, toggle: Toggle, on: bool) -> Vec<Effect> {
        self.toggles.set(toggle, on);
        vec![Effect::SceneDirty]
    }

    /// Switches the per-function link display of `cell`.
    pub fn toggle_links(&mut self, cell: CellAddress) -> Vec<Effect> {
        if !self.hidden_links.remove(&cell) {
            self.hidden_links.insert(cell);
        }
        vec![Effect::SceneDirty]
    }

    pub fn set_view_mode(&mut self, mode: ViewMode) -> Vec<Effect> {
        self.viewport = self.viewport.with_mode(mode);
        vec![
            Effect::Viewport {
                command: ViewportCommand::SetMode { mode },
            },
            Effect::SceneDirty,
        ]
    }

    /// Names the cluster created last. Fails when no label is pending.
    pub fn set_label(&mut self, label: &str) -> Option<Vec<Effect>> {
        let pending = self.pending_label.take()?;
        for r in &mut self.buffer {
            if *r == RefSpec::Cluster(pending.label.clone()) {
                *r = RefSpec::Cluster(label.to_string());
            }
        }
        Some(vec![
            Effect::Mutation {
                mutation: EngineMutation::RenameCluster {
                    from: pending.label,
                    to: label.to_string(),
                },
            },
            Effect::SceneDirty,
        ])
    }

    /// Processes one event. Engine mutations are returned as effects, not
    /// applied; the caller applies them before the next event.
    pub fn handle_event(&mut self, event: &InputEvent, wb: &Workbook) -> Vec<Effect> {
        if !event.is_well_formed() {
            return vec![Effect::diagnostic("malformed event ignored")];
        }
        if let InputEvent::Tick { dt } = event {
            return self.tick(*dt);
        }
        if self.slide.is_some() {
            self.queued.push_back(event.clone());
            return Vec::new();
        }
        self.dispatch(event, wb)
    }

    /// Events queued behind a finished slide, ready to be replayed.
    pub fn take_ready_queue(&mut self) -> Vec<InputEvent> {
        if self.slide.is_some() {
            return Vec::new();
        }
        self.queued.drain(..).collect()
    }

    fn tick(&mut self, dt: f64) -> Vec<Effect> {
        let Some(slide) = self.slide.as_mut() else {
            return Vec::new();
        };
        slide.elapsed_ms += dt;
        if slide.elapsed_ms >= f64::from(slide.animation.duration_ms) {
            self.slide = None;
        }
        vec![Effect::SceneDirty]
    }

    fn dispatch(&mut self, event: &InputEvent, wb: &Workbook) -> Vec<Effect> {
        match *event {
            InputEvent::PenDown { x, y } => self.pen_down(x, y, wb),
            InputEvent::PenMove { x, y } => self.pen_move(x, y, wb),
            InputEvent::PenUp { x, y } => self.pen_up(x, y, wb),
            InputEvent::PenHover { x, y, h } => self.pen_hover(x, y, h),
            InputEvent::PenButton {
                button: Button::Primary,
                pressed,
            } => self.primary(pressed, wb),
            InputEvent::PenButton {
                button: Button::Secondary,
                pressed,
            } => self.secondary(pressed, wb),
            InputEvent::BezelTap => self.bezel_tap(wb),
            InputEvent::GazeAt { tab } => {
                self.gaze = tab.filter(|t| *t < wb.sheet_count());
                vec![Effect::SceneDirty]
            }
            InputEvent::Tick { dt } => self.tick(dt),
            InputEvent::Key { ref key } => self.key(key, wb),
        }
    }

    fn pen_down(&mut self, x: f64, y: f64, wb: &Workbook) -> Vec<Effect> {
        self.pointer = Some((x, y));
        self.hover_h = 0.0;
        if let Mode::MenuOpen { .. } = self.mode {
            self.mode = Mode::Idle;
            self.contact = Contact::Consumed;
            return vec![Effect::diagnostic("menu retracted"), Effect::SceneDirty];
        }
        if let Mode::DraggingLink { collected, .. } = &mut self.mode {
            if let Some(c) = self.viewport.screen_cell_at(x, y) {
                if collected.last() != Some(&c) {
                    collected.push(c);
                }
            }
            self.contact = Contact::Consumed;
            return vec![Effect::SceneDirty];
        }
        if let Some(t) = arc_entry_at(x, y) {
            let on = !self.toggles.get(t);
            self.contact = Contact::Consumed;
            return self.set_toggle(t, on);
        }
        let in_air = !(0.0..=1.0).contains(&x);
        if in_air || !(0.0..=1.0).contains(&y) {
            self.contact = Contact::Consumed;
            return self.off_screen_pick(x, y, in_air, wb);
        }
        let Some(cell) = self.viewport.screen_cell_at(x, y) else {
            self.contact = Contact::Consumed;
            return Vec::new();
        };
        if let Mode::SizingChart { anchor, .. } = &mut self.mode {
            *anchor = Some(cell);
        }
        let resume = Box::new(std::mem::replace(&mut self.mode, Mode::Idle));
        self.mode = Mode::SelectingCells {
            start: cell,
            current: cell,
        };
        self.contact = Contact::Selecting {
            start: cell,
            current: cell,
            resume,
        };
        vec![Effect::SceneDirty]
    }

    fn pen_move(&mut self, x: f64, y: f64, _wb: &Workbook) -> Vec<Effect> {
        self.pointer = Some((x, y));
        self.hover_h = 0.0;
        if let Mode::DraggingLink { collected, .. } = &mut self.mode {
            if let Some(c) = self.viewport.screen_cell_at(x, y) {
                if collected.last() != Some(&c) {
                    collected.push(c);
                }
            }
            return vec![Effect::SceneDirty];
        }
        let cell = self.viewport.screen_cell_at(x, y);
        if let (Contact::Selecting { current, .. }, Some(c)) = (&mut self.contact, cell) {
            if *current != c {
                *current = c;
                if let Mode::SelectingCells { current, .. } = &mut self.mode {
                    *current = c;
                }
                return vec![Effect::SceneDirty];
            }
        }
        Vec::new()
    }

    fn pen_up(&mut self, x: f64, y: f64, wb: &Workbook) -> Vec<Effect> {
        self.pen_move(x, y, wb);
        match std::mem::replace(&mut self.contact, Contact::None) {
            Contact::Selecting {
                start,
                current,
                resume,
            } => {
                self.mode = *resume;
                self.finish_selection(start, current, wb)
            }
            Contact::None | Contact::Consumed => Vec::new(),
        }
    }

    fn pen_hover(&mut self, x: f64, y: f64, h: f64) -> Vec<Effect> {
        self.pointer = Some((x, y));
        self.hover_h = h;
        match &mut self.mode {
            Mode::MenuOpen { menu, .. } => {
                let before = menu.path.clone();
                let was_raised = menu.raised;
                let level = menu.hover(x, y, h);
                if level == 0 && was_raised {
                    self.mode = Mode::Idle;
                    return vec![Effect::diagnostic("menu retracted"), Effect::SceneDirty];
                }
                if menu.path != before || menu.raised != was_raised {
                    return vec![Effect::SceneDirty];
                }
                Vec::new()
            }
            Mode::Stroking { points, .. } => {
                points.push((x, y));
                Vec::new()
            }
            _ => Vec::new(),
        }
    }

    fn finish_selection(
        &mut self,
        start: CellAddress,
        end: CellAddress,
        wb: &Workbook,
    ) -> Vec<Effect> {
        let single = start == end;
        let tapped = if single {
            tap_ref(wb, start)
        } else {
            selection_ref(start, end)
        };
        self.cursor = Some(end);
        if single && is_node(wb, start) {
            self.focus = Some(start);
        }
        match std::mem::replace(&mut self.mode, Mode::Idle) {
            Mode::CollectingSources { func, target } => {
                self.buffer.push(tapped);
                self.mode = Mode::CollectingSources { func, target };
                vec![Effect::SceneDirty]
            }
            Mode::PlacingFunction { func, sources } => {
                if !single || !is_free_cell(wb, start) {
                    self.mode = Mode::PlacingFunction { func, sources };
                    return vec![Effect::diagnostic(
                        "tap an empty cell to place the function",
                    )];
                }
                self.buffer.clear();
                self.focus = Some(start);
                vec![
                    commit_function(wb, start, func, &sources),
                    Effect::SceneDirty,
                ]
            }
            Mode::SizingChart {
                series,
                kind,
                anchor,
            } => {
                let anchor = anchor.unwrap_or(start);
                let (r0, r1) = (anchor.row.min(end.row), anchor.row.max(end.row));
                let (c0, c1) = (anchor.col.min(end.col), anchor.col.max(end.col));
                let _ = kind;
                vec![
                    Effect::Mutation {
                        mutation: EngineMutation::CreateChart {
                            series,
                            anchor: CellAddress::new(anchor.sheet, r0, c0),
                            width: c1 - c0 + 1,
                            height: r1 - r0 + 1,
                        },
                    },
                    Effect::SceneDirty,
                ]
            }
            Mode::EditingText { cell, mut text } => {
                text.push_str(&print_ref(&tapped, &wb.context(cell.sheet)));
                self.mode = Mode::EditingText { cell, text };
                vec![Effect::SceneDirty]
            }
            other => {
                self.mode = match other {
                    Mode::SelectingCells { .. } => Mode::Idle,
                    m => m,
                };
                if self.primary_held {
                    self.taps_during_hold += 1;
                    self.buffer.push(tapped);
                } else {
                    self.buffer = vec![tapped];
                }
                vec![Effect::SceneDirty]
            }
        }
    }

    fn off_screen_pick(&mut self, x: f64, y: f64, in_air: bool, wb: &Workbook) -> Vec<Effect> {
        if in_air && self.toggles.sheets {
            return match map_in_air(x, y, &self.viewport, wb.sheet_count(), TAB_GAP) {
                Ok((_, cell)) => self.add_picked(cell),
                Err(e) => vec![Effect::diagnostic(e.to_string())],
            };
        }
        if self.viewport.mode == ViewMode::Fixed {
            return vec![Effect::diagnostic(
                "the extended margin is read-only in fixed mode",
            )];
        }
        let Some(cell) = self.viewport.cell_at(x, y) else {
            return vec![Effect::diagnostic("outside the extended view")];
        };
        let (viewport, animation) = slide_to_align(&self.viewport, cell);
        self.viewport = viewport;
        let mut effects = self.add_picked(cell);
        if animation.duration_ms > 0 {
            self.slide = Some(Slide {
                animation: animation.clone(),
                tabs: None,
                elapsed_ms: 0.0,
            });
            effects.push(Effect::Viewport {
                command: ViewportCommand::Slide { animation },
            });
        }
        effects
    }

    fn add_picked(&mut self, cell: CellAddress) -> Vec<Effect> {
        self.cursor = Some(cell);
        match &mut self.mode {
            Mode::CollectingSources { .. } => self.buffer.push(RefSpec::Cell(cell)),
            _ if self.primary_held => {
                self.taps_during_hold += 1;
                self.buffer.push(RefSpec::Cell(cell));
            }
            _ => self.buffer = vec![RefSpec::Cell(cell)],
        }
        vec![Effect::SceneDirty]
    }

    fn primary(&mut self, pressed: bool, wb: &Workbook) -> Vec<Effect> {
        if pressed {
            if self.primary_held {
                return Vec::new();
            }
            self.primary_held = true;
            self.taps_during_hold = 0;
            if matches!(self.mode, Mode::Idle) && self.hover_h > 0.0 {
                if let Some(chart) = self.chart_under_pointer(wb) {
                    let start = self.pointer.into_iter().collect();
                    self.mode = Mode::Stroking {
                        chart,
                        points: start,
                    };
                    return vec![Effect::SceneDirty];
                }
            }
            return Vec::new();
        }
        if !self.primary_held {
            return Vec::new();
        }
        self.primary_held = false;
        if let Mode::Stroking { .. } = self.mode {
            return self.finish_stroke(wb);
        }
        if self.taps_during_hold > 0 {
            return vec![Effect::SceneDirty];
        }
        self.click(wb)
    }

    fn chart_under_pointer(&self, wb: &Workbook) -> Option<ChartId> {
        let (x, y) = self.pointer?;
        let cell = self.viewport.cell_at(x, y)?;
        wb.charts().iter().find(|c| c.covers(cell)).map(|c| c.id)
    }

    fn finish_stroke(&mut self, wb: &Workbook) -> Vec<Effect> {
        let Mode::Stroking { chart, points } = std::mem::replace(&mut self.mode, Mode::Idle) else {
            return Vec::new();
        };
        let width = wb
            .chart(chart)
            .map_or(1.0, |c| f64::from(c.width) / f64::from(self.viewport.cols));
        match classify_stroke(&points, width) {
            StrokeClass::None => vec![
                Effect::diagnostic("stroke not recognized"),
                Effect::SceneDirty,
            ],
            class => vec![
                Effect::Mutation {
                    mutation: EngineMutation::SetTrend {
                        chart,
                        kind: class.trend(),
                    },
                },
                Effect::SceneDirty,
            ],
        }
    }

    /// Primary button pressed and released without taps in between.
    fn click(&mut self, wb: &Workbook) -> Vec<Effect> {
        match std::mem::replace(&mut self.mode, Mode::Idle) {
            Mode::Idle => self.open_menu(wb),
            Mode::MenuOpen { menu, target } => self.confirm(menu, target, wb),
            Mode::CollectingSources { func, target } => {
                if self.buffer.is_empty() {
                    return vec![
                        Effect::diagnostic("no sources selected"),
                        Effect::SceneDirty,
                    ];
                }
                let sources = std::mem::take(&mut self.buffer);
                self.focus = Some(target);
                self.cursor = Some(target);
                vec![
                    commit_function(wb, target, func, &sources),
                    Effect::SceneDirty,
                ]
            }
            Mode::PlacingFunction { .. } | Mode::SizingChart { .. } => {
                vec![Effect::diagnostic("cancelled"), Effect::SceneDirty]
            }
            other => {
                self.mode = other;
                Vec::new()
            }
        }
    }

    fn open_menu(&mut self, wb: &Workbook) -> Vec<Effect> {
        let target = match self.buffer.as_slice() {
            [] => return vec![Effect::diagnostic("select a target or source cells first")],
            [RefSpec::Cell(c)] if is_free_cell(wb, *c) => MenuTarget::Cell(*c),
            refs => MenuTarget::Selection(refs.to_vec()),
        };
        let center = self
            .pointer
            .filter(|(x, y)| (0.0..=1.0).contains(x) && (0.0..=1.0).contains(y))
            .or_else(|| self.cursor.map(|c| self.viewport.cell_rect(c).center()))
            .unwrap_or((0.5, 0.5));
        let menu = OpenMenu::new(self.menu_tree.clone(), center);
        self.mode = Mode::MenuOpen { menu, target };
        vec![Effect::SceneDirty]
    }

    fn confirm(&mut self, menu: OpenMenu, target: MenuTarget, wb: &Workbook) -> Vec<Effect> {
        let Some(action) = menu.selected().and_then(|n| n.action) else {
            self.mode = Mode::MenuOpen { menu, target };
            return vec![Effect::diagnostic("no menu entry selected")];
        };
        match (action, target) {
            (MenuAction::Function(func), MenuTarget::Cell(cell)) => {
                self.buffer.clear();
                self.mode = Mode::CollectingSources { func, target: cell };
                vec![Effect::SceneDirty]
            }
            (MenuAction::Function(func), MenuTarget::Selection(sources)) => {
                self.buffer = sources.clone();
                self.mode = Mode::PlacingFunction { func, sources };
                vec![Effect::SceneDirty]
            }
            (MenuAction::Chart(kind), MenuTarget::Selection(refs)) if refs.len() == 1 => {
                self.mode = Mode::SizingChart {
                    series: refs[0].clone(),
                    kind,
                    anchor: None,
                };
                vec![Effect::SceneDirty]
            }
            (MenuAction::Cluster, MenuTarget::Selection(refs)) => self.create_cluster(refs, 1, wb),
            (MenuAction::Cluster, MenuTarget::Cell(c)) => {
                self.create_cluster(vec![RefSpec::Cell(c)], 1, wb)
            }
            (MenuAction::Chart(_), _) => vec![
                Effect::diagnostic("a chart needs one selected range"),
                Effect::SceneDirty,
            ],
        }
    }

    fn create_cluster(&mut self, members: Vec<RefSpec>, level: u32, wb: &Workbook) -> Vec<Effect> {
        let Some(anchor) = cluster_anchor_for(wb, &members) else {
            return vec![Effect::diagnostic("no free cell for the cluster anchor")];
        };
        let label = provisional_label(wb);
        self.buffer.clear();
        self.mode = Mode::Idle;
        self.focus = Some(anchor);
        self.pending_label = Some(LabelPrompt {
            label: label.clone(),
            anchor,
        });
        vec![
            Effect::Mutation {
                mutation: EngineMutation::DefineCluster {
                    label: label.clone(),
                    anchor,
                    level,
                    members,
                },
            },
            Effect::LabelPrompt { label, anchor },
            Effect::SceneDirty,
        ]
    }

    fn secondary(&mut self, pressed: bool, wb: &Workbook) -> Vec<Effect> {
        if pressed {
            self.secondary_press(wb)
        } else {
            self.secondary_release(wb)
        }
    }

    fn secondary_press(&mut self, wb: &Workbook) -> Vec<Effect> {
        if let Mode::MenuOpen { .. } = self.mode {
            self.mode = Mode::Idle;
            return vec![Effect::diagnostic("menu retracted"), Effect::SceneDirty];
        }
        if !matches!(self.mode, Mode::Idle) {
            return Vec::new();
        }
        let pointer_cell = self.pointer_cell();
        if let (Some(focus), Some(cell)) = (self.focus, pointer_cell) {
            let in_buffer = self.buffer.iter().any(|r| r.covers(cell));
            if !in_buffer && cell != focus {
                if let Some(payload) = trash_payload(wb, focus, cell) {
                    self.mode = Mode::DraggingToTrash { payload };
                    return vec![Effect::SceneDirty];
                }
            }
        }
        let level = self.hover_level();
        if level >= 1 && !self.buffer.is_empty() {
            let members = self.buffer.clone();
            return self.create_cluster(members, level as u32, wb);
        }
        if let Some(cell) = pointer_cell.filter(|c| is_node(wb, *c)) {
            if self.buffer.is_empty() || self.buffer == [tap_ref(wb, cell)] {
                self.mode = Mode::DraggingLink {
                    origin: LinkOrigin::Node(cell),
                    collected: Vec::new(),
                };
                return vec![Effect::SceneDirty];
            }
        }
        if !self.buffer.is_empty() {
            let origin = LinkOrigin::Selection(self.buffer.clone());
            self.mode = Mode::DraggingLink {
                origin,
                collected: Vec::new(),
            };
            return vec![Effect::SceneDirty];
        }
        vec![Effect::diagnostic("nothing to drag")]
    }

    fn secondary_release(&mut self, wb: &Workbook) -> Vec<Effect> {
        match std::mem::replace(&mut self.mode, Mode::Idle) {
            Mode::DraggingToTrash { payload } => {
                let drop = self.pointer.unwrap_or((f64::NAN, f64::NAN));
                let mut effects = trash_drop(&payload, drop);
                effects.push(Effect::SceneDirty);
                effects
            }
            Mode::DraggingLink { origin, collected } => {
                let mut effects = self.finish_link(origin, collected, wb);
                effects.push(Effect::SceneDirty);
                effects
            }
            other => {
                self.mode = other;
                Vec::new()
            }
        }
    }

    fn finish_link(
        &mut self,
        origin: LinkOrigin,
        collected: Vec<CellAddress>,
        wb: &Workbook,
    ) -> Vec<Effect> {
        match origin {
            LinkOrigin::Node(node) => {
                let mut cells = collected;
                if cells.is_empty() {
                    cells.extend(self.pointer_cell().filter(|c| *c != node));
                }
                let refs: Vec<RefSpec> = cells
                    .into_iter()
                    .filter(|c| *c != node)
                    .map(|c| tap_ref(wb, c))
                    .collect();
                if refs.is_empty() {
                    return vec![Effect::diagnostic("link dropped on nothing")];
                }
                link_to_node(wb, node, refs)
            }
            LinkOrigin::Selection(refs) => {
                let Some(node) = self.pointer_cell().filter(|c| is_node(wb, *c)) else {
                    return vec![Effect::diagnostic("link must end on a function or cluster")];
                };
                self.buffer.clear();
                self.focus = Some(node);
                link_to_node(wb, node, refs)
            }
        }
    }

    fn bezel_tap(&mut self, wb: &Workbook) -> Vec<Effect> {
        let Some(tab) = self.gaze else {
            return Vec::new();
        };
        let from = self.viewport.sheet;
        if tab == from || tab >= wb.sheet_count() {
            return Vec::new();
        }
        let animation = SlideAnimation {
            duration_ms: SLIDE_DURATION_MS,
            from: self.viewport.origin,
            to: CellAddress::new(tab, 0, 0),
        };
        self.viewport = self.viewport.on_sheet(tab);
        self.slide = Some(Slide {
            animation,
            tabs: Some((from, tab)),
            elapsed_ms: 0.0,
        });
        vec![
            Effect::Viewport {
                command: ViewportCommand::SlideToSheet {
                    from,
                    to: tab,
                    duration_ms: SLIDE_DURATION_MS,
                },
            },
            Effect::SceneDirty,
        ]
    }

    fn key(&mut self, key: &str, wb: &Workbook) -> Vec<Effect> {
        if key == "Escape" {
            self.mode = Mode::Idle;
            self.contact = Contact::None;
            return vec![Effect::SceneDirty];
        }
        match &mut self.mode {
            Mode::EditingText { cell, text } => match key {
                "Enter" => {
                    let (cell, input) = (*cell, std::mem::take(text));
                    self.mode = Mode::Idle;
                    self.focus = Some(cell);
                    vec![
                        Effect::Mutation {
                            mutation: EngineMutation::SetCell { cell, input },
                        },
                        Effect::SceneDirty,
                    ]
                }
                "Backspace" => {
                    text.pop();
                    vec![Effect::SceneDirty]
                }
                k if k.chars().count() == 1 => {
                    text.push_str(k);
                    vec![Effect::SceneDirty]
                }
                _ => vec![Effect::diagnostic(format!("unhandled key {key}"))],
            },
            Mode::Idle if key == "F2" => match self.cursor {
                Some(cell) => {
                    self.mode = Mode::EditingText {
                        cell,
                        text: wb.input_text(cell),
                    };
                    vec![Effect::SceneDirty]
                }
                None => vec![Effect::diagnostic("no cell to edit")],
            },
            Mode::Idle if key.chars().count() == 1 => match self.cursor {
                Some(cell) if wb.cluster_at(cell).is_none() => {
                    self.mode = Mode::EditingText {
                        cell,
                        text: key.to_string(),
                    };
                    vec![Effect::SceneDirty]
                }
                _ => vec![Effect::diagnostic("no cell to edit")],
            },
            _ => vec![Effect::diagnostic(format!("unhandled key {key}"))],
        }
    }
}

fn slide_phase(s: &Slide) -> f64 {
    if s.animation.duration_ms == 0 {
        1.0
    } else {
        (s.elapsed_ms / f64::from(s.animation.duration_ms)).clamp(0.0, 1.0)
    }
}

fn selection_ref(start: CellAddress, end: CellAddress) -> RefSpec {
    if start == end {
        RefSpec::Cell(start)
    } else {
        RefSpec::range(start, end)
    }
}

/// Reference produced by tapping `cell`: anchors select their cluster.
fn tap_ref(wb: &Workbook, cell: CellAddress) -> RefSpec {
    match wb.cluster_at(cell) {
        Some(c) => RefSpec::Cluster(c.label.clone()),
        None => RefSpec::Cell(cell),
    }
}

fn is_node(wb: &Workbook, cell: CellAddress) -> bool {
    wb.cluster_at(cell).is_some() || matches!(wb.content(cell), CellContent::Formula { .. })
}

fn is_free_cell(wb: &Workbook, cell: CellAddress) -> bool {
    wb.content(cell).is_empty() && wb.cluster_at(cell).is_none()
}

fn commit_function(
    wb: &Workbook,
    target: CellAddress,
    func: Function,
    sources: &[RefSpec],
) -> Effect {
    if !func.accepts_arity(sources.len()) {
        return Effect::diagnostic(format!("{func} cannot take {} argument(s)", sources.len()));
    }
    let ast = Expr::call(func, sources.iter().cloned().map(Expr::Ref).collect());
    let input = print_in(&ast, &wb.context(target.sheet));
    Effect::Mutation {
        mutation: EngineMutation::SetCell {
            cell: target,
            input,
        },
    }
}

fn link_to_node(wb: &Workbook, node: CellAddress, refs: Vec<RefSpec>) -> Vec<Effect> {
    let mutation = match wb.cluster_at(node) {
        Some(c) => EngineMutation::ModifyCluster {
            label: c.label.clone(),
            add: refs,
            remove: Vec::new(),
        },
        None => EngineMutation::AddSource { cell: node, refs },
    };
    vec![Effect::Mutation { mutation }]
}

fn trash_payload(wb: &Workbook, focus: CellAddress, cell: CellAddress) -> Option<TrashPayload> {
    if let Some(c) = wb.cluster_at(focus) {
        let direct = c
            .members
            .iter()
            .any(|m| m.covers(cell) || *m == tap_ref(wb, cell));
        return direct.then(|| TrashPayload::Member {
            label: c.label.clone(),
            victim: cell,
        });
    }
    wb.is_source(focus, cell).then_some(TrashPayload::Source {
        cell: focus,
        victim: cell,
    })
}

/// First free cell right of the members' bounding box, on its top row.
fn cluster_anchor_for(wb: &Workbook, members: &[RefSpec]) -> Option<CellAddress> {
    let cells: Vec<CellAddress> = members
        .iter()
        .flat_map(|m| match m {
            RefSpec::Cluster(label) => wb
                .cluster_by_label(label)
                .map(|c| c.anchor)
                .into_iter()
                .collect(),
            other => other.cells(),
        })
        .collect();
    let first = cells.first()?;
    let sheet = first.sheet;
    let on_sheet = cells.iter().filter(|c| c.sheet == sheet);
    let top = on_sheet.clone().map(|c| c.row).min()?;
    let right = on_sheet.map(|c| c.col).max()?;
    (right + 1..=crate::address::MAX_COL)
        .map(|col| CellAddress::new(sheet, top, col))
        .find(|c| is_free_cell(wb, *c))
}

fn provisional_label(wb: &Workbook) -> String {
    (1..)
        .map(|n| format!("cluster{n}"))
        .find(|l| wb.cluster_by_label(l).is_none())
        .expect("unbounded")
}

/// Sheet and cell under an in-air point beyond the bezel. Neighbor screens
/// sit `1 + gap` screen widths apart.
pub fn map_in_air(
    x: f64,
    y: f64,
    viewport: &Viewport,
    sheet_count: usize,
    gap: f64,
) -> Result<(usize, CellAddress), SceneError> {
    let active = viewport.sheet;
    let (sheet, local_x) = if (0.0..=1.0).contains(&x) {
        (Some(active), x)
    } else {
        let past = if x > 1.0 { x - 1.0 } else { -x };
        let k = (past / (1.0 + gap)).ceil().max(1.0);
        let sheet = if x > 1.0 {
            active.checked_add(k as usize)
        } else {
            active.checked_sub(k as usize)
        };
        let local = if x > 1.0 {
            x - k * (1.0 + gap)
        } else {
            x + k * (1.0 + gap)
        };
        (sheet, local)
    };
    let sheet = sheet
        .filter(|s| *s < sheet_count)
        .ok_or(SceneError::NoSheet)?;
    let clamp = |t: f64| t.clamp(0.0, 1.0 - 1e-9);
    let col = viewport.origin.col + (clamp(local_x) * f64::from(viewport.cols)).floor() as u32;
    let row = viewport.origin.row + (clamp(y) * f64::from(viewport.rows)).floor() as u32;
    Ok((sheet, CellAddress::new(sheet, row, col)))
}

/// Effects of releasing a trash drag at `drop`: a removal when it lands on
/// the bin, otherwise nothing.
pub fn trash_drop(payload: &TrashPayload, drop: (f64, f64)) -> Vec<Effect> {
    if !TRASH_RECT.contains(drop.0, drop.1) {
        return vec![Effect::diagnostic("dropped outside the trash bin")];
    }
    let mutation = match payload {
        TrashPayload::Source { cell, victim } => EngineMutation::RemoveSource {
            cell: *cell,
            victim: *victim,
        },
        TrashPayload::Member { label, victim } => EngineMutation::ModifyCluster {
            label: label.clone(),
            add: Vec::new(),
            remove: vec![RefSpec::Cell(*victim)],
        },
    };
    vec![Effect::Mutation { mutation }]
}
