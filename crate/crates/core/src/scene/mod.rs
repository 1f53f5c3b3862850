//! Render descriptions derived from a workbook and the interaction state.
//!
//! Everything here is a pure function of its inputs. Screen geometry uses
//! normalized tablet units (the physical screen is `[0,1]²`, `y` down);
//! heights above the tablet are in meters.

mod overview;
mod project;
mod tabs;
mod viewport;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use overview::{overview, overview_pick, used_region, OverviewScene, RegionBox};
pub use project::{nested_stack, project, used_mask, StackLayer};
pub use tabs::tab_geometry;
pub use viewport::{slide_to_align, SlideAnimation, ViewMode, Viewport};

use crate::address::CellAddress;
use crate::chart::{BarGeometry, ChartId, Trend};
use crate::formula::RefSpec;

/// Height between overlay levels, in meters.
pub const LAYER_SPACING: f64 = 0.025;
pub const MAX_LEVELS: u32 = 4;
pub const SLIDE_DURATION_MS: u32 = 300;
/// Gap between neighboring sheet tabs, in screen widths.
pub const TAB_GAP: f64 = 0.05;
pub const DEFAULT_LINK_DEPTH: usize = 2;
/// Distance of the overview plane behind the sheet, in meters.
pub const OVERVIEW_DEPTH: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SceneError {
    #[error("cell {0} does not contain a nested function")]
    NotAFunction(CellAddress),
    #[error("no sheet in that direction")]
    NoSheet,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    /// Containment with a tolerance of 1e-9 for rounding.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        const EPS: f64 = 1e-9;
        other.x >= self.x - EPS
            && other.y >= self.y - EPS
            && other.x + other.w <= self.x + self.w + EPS
            && other.y + other.h <= self.y + self.h + EPS
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// The display toggles of the arc menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Toggle {
    /// `O`
    Overview,
    /// `D`
    Dependencies,
    /// `F`
    Functions,
    /// `C`
    Clusters,
    /// `S`
    Sheets,
    /// Tinting of empty cells inside the used region.
    Mask,
}

impl Toggle {
    pub const ALL: [Toggle; 6] = [
        Toggle::Overview,
        Toggle::Dependencies,
        Toggle::Functions,
        Toggle::Clusters,
        Toggle::Sheets,
        Toggle::Mask,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Toggle::Overview => "O",
            Toggle::Dependencies => "D",
            Toggle::Functions => "F",
            Toggle::Clusters => "C",
            Toggle::Sheets => "S",
            Toggle::Mask => "M",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Toggle::ALL
            .into_iter()
            .find(|t| t.key().eq_ignore_ascii_case(key))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArcToggles {
    pub overview: bool,
    pub dependencies: bool,
    pub functions: bool,
    pub clusters: bool,
    pub sheets: bool,
    pub mask: bool,
}

impl ArcToggles {
    pub fn get(&self, t: Toggle) -> bool {
        match t {
            Toggle::Overview => self.overview,
            Toggle::Dependencies => self.dependencies,
            Toggle::Functions => self.functions,
            Toggle::Clusters => self.clusters,
            Toggle::Sheets => self.sheets,
            Toggle::Mask => self.mask,
        }
    }

    pub fn set(&mut self, t: Toggle, on: bool) {
        let slot = match t {
            Toggle::Overview => &mut self.overview,
            Toggle::Dependencies => &mut self.dependencies,
            Toggle::Functions => &mut self.functions,
            Toggle::Clusters => &mut self.clusters,
            Toggle::Sheets => &mut self.sheets,
            Toggle::Mask => &mut self.mask,
        };
        *slot = on;
    }
}

/// Arc-menu geometry: a quarter ring in the lower-right screen corner.
pub const ARC_CENTER: (f64, f64) = (1.0, 1.0);
pub const ARC_INNER: f64 = 0.08;
pub const ARC_OUTER: f64 = 0.18;
/// Trash-bin widget in the lower-left screen corner.
pub const TRASH_RECT: Rect = Rect {
    x: 0.0,
    y: 0.88,
    w: 0.1,
    h: 0.12,
};

/// Angle sector `[start, end)` in degrees of arc entry `i`.
pub fn arc_sector(i: usize) -> (f64, f64) {
    let step = 90.0 / Toggle::ALL.len() as f64;
    (180.0 + step * i as f64, 180.0 + step * (i + 1) as f64)
}

/// Toggle under a normalized point, if it hits the arc menu.
pub fn arc_entry_at(x: f64, y: f64) -> Option<Toggle> {
    let (dx, dy) = (x - ARC_CENTER.0, y - ARC_CENTER.1);
    let r = dx.hypot(dy);
    if !(ARC_INNER..=ARC_OUTER).contains(&r) {
        return None;
    }
    let angle = dy.atan2(dx).to_degrees().rem_euclid(360.0);
    Toggle::ALL.into_iter().enumerate().find_map(|(i, t)| {
        let (a0, a1) = arc_sector(i);
        (angle >= a0 && angle < a1).then_some(t)
    })
}

/// What the interaction layer contributes to a frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SceneInputs {
    pub mode: String,
    pub cursor: Option<CellAddress>,
    pub selection: Vec<RefSpec>,
    /// Formula cell whose links are lifted.
    pub focus: Option<CellAddress>,
    pub gazed_tab: Option<usize>,
    pub tab_slide: Option<TabSlide>,
    pub menu: Option<MenuScene>,
    /// Function cells whose links are switched off.
    pub hidden_links: BTreeSet<CellAddress>,
    pub link_depth: usize,
    pub slide: Option<SlideAnimation>,
    pub label_prompt: Option<LabelPrompt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabSlide {
    pub from: usize,
    pub to: usize,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelPrompt {
    pub label: String,
    pub anchor: CellAddress,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuScene {
    pub center: (f64, f64),
    pub radius: f64,
    pub dead_zone: f64,
    pub rings: Vec<MenuRing>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuRing {
    pub level: usize,
    pub height: f64,
    pub entries: Vec<MenuEntryScene>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuEntryScene {
    pub id: String,
    pub label: String,
    pub start_deg: f64,
    pub end_deg: f64,
    pub highlighted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub addr: CellAddress,
    pub name: String,
    pub text: String,
    pub rect: Rect,
    pub masked: bool,
    pub highlighted: bool,
    pub anchor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabScene {
    pub sheet: usize,
    pub name: String,
    pub offset: f64,
    pub highlighted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Cluster,
    Stack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayLayer {
    pub kind: LayerKind,
    pub level: u32,
    pub height: f64,
    pub cells: Vec<OverlayCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayCell {
    pub anchor: CellAddress,
    pub label: String,
    pub value: String,
    pub transparent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Dependency,
    Member,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub kind: LinkKind,
    pub level: usize,
    pub from_cell: CellAddress,
    pub to_cell: CellAddress,
    pub from: Point3,
    pub to: Point3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcEntry {
    pub key: String,
    pub on: bool,
    pub start_deg: f64,
    pub end_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkButton {
    pub cell: CellAddress,
    pub on: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Widgets {
    pub trash: Rect,
    pub arc: Vec<ArcEntry>,
    pub link_buttons: Vec<LinkButton>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartScene {
    pub id: ChartId,
    pub anchor: CellAddress,
    pub width: u32,
    pub height: u32,
    pub rect: Rect,
    pub bars: Vec<BarGeometry>,
    pub trend: Option<Trend>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborSheet {
    pub sheet: usize,
    pub offset: f64,
    pub cells: Vec<GridCell>,
}

/// 3D placement of the displayed sheet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub mode: ViewMode,
    pub tilt_deg: f64,
    /// Offset of the sensed area from the displayed area, in screens.
    pub offset: (f64, f64),
}

/// Immutable render description of one moment of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFrame {
    pub revision: u64,
    pub mode: String,
    pub viewport: Viewport,
    pub placement: Placement,
    pub grid: Vec<GridCell>,
    pub tabs: Vec<TabScene>,
    pub layers: Vec<OverlayLayer>,
    pub links: Vec<Link>,
    pub overview: Option<OverviewScene>,
    pub menu: Option<MenuScene>,
    pub widgets: Widgets,
    pub charts: Vec<ChartScene>,
    pub neighbors: Vec<NeighborSheet>,
    pub slide: Option<SlideAnimation>,
    pub label_prompt: Option<LabelPrompt>,
}
