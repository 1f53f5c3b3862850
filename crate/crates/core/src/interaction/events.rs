use serde::{Deserialize, Serialize};

use crate::address::CellAddress;
use crate::chart::{ChartId, TrendKind};
use crate::engine::{EngineError, RecalcResult, Workbook};
use crate::formula::RefSpec;
use crate::scene::{SlideAnimation, ViewMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Button {
    Primary,
    Secondary,
}

/// Abstract pen, gaze and keyboard input.
///
/// Coordinates are normalized to the tablet screen; `x < 0` or `x > 1`
/// points in the air past the bezel toward a neighboring sheet. `h` is the
/// pen tip height above the screen in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum InputEvent {
    PenDown {
        x: f64,
        y: f64,
    },
    PenMove {
        x: f64,
        y: f64,
    },
    PenUp {
        x: f64,
        y: f64,
    },
    PenHover {
        x: f64,
        y: f64,
        h: f64,
    },
    PenButton {
        button: Button,
        pressed: bool,
    },
    BezelTap,
    GazeAt {
        tab: Option<usize>,
    },
    /// Elapsed time in milliseconds.
    Tick {
        dt: f64,
    },
    /// Keyboard input for the text editing flow: a single character, or one
    /// of `Enter`, `Backspace`, `Escape`, `F2`.
    Key {
        key: String,
    },
}

impl InputEvent {
    /// Whether the event is structurally valid (finite coordinates,
    /// non-negative height and time).
    pub fn is_well_formed(&self) -> bool {
        match self {
            InputEvent::PenDown { x, y }
            | InputEvent::PenMove { x, y }
            | InputEvent::PenUp { x, y } => x.is_finite() && y.is_finite(),
            InputEvent::PenHover { x, y, h } => {
                x.is_finite() && y.is_finite() && h.is_finite() && *h >= 0.0
            }
            InputEvent::Tick { dt } => dt.is_finite() && *dt >= 0.0,
            InputEvent::Key { key } => !key.is_empty(),
            InputEvent::PenButton { .. } | InputEvent::BezelTap | InputEvent::GazeAt { .. } => true,
        }
    }
}

/// A workbook change requested by the interaction machine, expressed in
/// terms of sheet-engine operations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EngineMutation {
    SetCell {
        cell: CellAddress,
        input: String,
    },
    AddSource {
        cell: CellAddress,
        refs: Vec<RefSpec>,
    },
    RemoveSource {
        cell: CellAddress,
        victim: CellAddress,
    },
    DefineCluster {
        label: String,
        anchor: CellAddress,
        level: u32,
        members: Vec<RefSpec>,
    },
    ModifyCluster {
        label: String,
        add: Vec<RefSpec>,
        remove: Vec<RefSpec>,
    },
    RenameCluster {
        from: String,
        to: String,
    },
    CreateChart {
        series: RefSpec,
        anchor: CellAddress,
        width: u32,
        height: u32,
    },
    SetTrend {
        chart: ChartId,
        kind: Option<TrendKind>,
    },
}

impl EngineMutation {
    pub fn apply(&self, wb: &mut Workbook) -> Result<RecalcResult, EngineError> {
        let cluster_id = |wb: &Workbook, label: &str| {
            wb.cluster_by_label(label)
                .map(|c| c.id)
                .ok_or_else(|| EngineError::UnknownCluster(label.to_string()))
        };
        match self {
            EngineMutation::SetCell { cell, input } => wb.set_input(*cell, input),
            EngineMutation::AddSource { cell, refs } => wb.add_source(*cell, refs),
            EngineMutation::RemoveSource { cell, victim } => wb.remove_source(*cell, *victim),
            EngineMutation::DefineCluster {
                label,
                anchor,
                level,
                members,
            } => wb
                .define_cluster(label, *anchor, *level, members.clone())
                .map(|_| RecalcResult::default()),
            EngineMutation::ModifyCluster { label, add, remove } => {
                let id = cluster_id(wb, label)?;
                wb.modify_cluster(id, add, remove)
            }
            EngineMutation::RenameCluster { from, to } => {
                let id = cluster_id(wb, from)?;
                wb.rename_cluster(id, to)
            }
            EngineMutation::CreateChart {
                series,
                anchor,
                width,
                height,
            } => wb
                .create_chart(series.clone(), *anchor, *width, *height)
                .map(|_| RecalcResult::default()),
            EngineMutation::SetTrend { chart, kind } => {
                wb.set_trend(*chart, *kind).map(|_| RecalcResult::default())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ViewportCommand {
    SlideToSheet {
        from: usize,
        to: usize,
        duration_ms: u32,
    },
    Slide {
        animation: SlideAnimation,
    },
    SetMode {
        mode: ViewMode,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum Effect {
    Mutation { mutation: EngineMutation },
    Viewport { command: ViewportCommand },
    SceneDirty,
    LabelPrompt { label: String, anchor: CellAddress },
    Diagnostic { message: String },
}

impl Effect {
    pub fn diagnostic(message: impl Into<String>) -> Self {
        Effect::Diagnostic {
            message: message.into(),
        }
    }

    pub fn mutation(&self) -> Option<&EngineMutation> {
        match self {
            Effect::Mutation { mutation } => Some(mutation),
            _ => None,
        }
    }
}
