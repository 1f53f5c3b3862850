//! Headless spreadsheet engine with layered overlays: formulas, cluster-cells,
//! incremental recomputation, scene projection, and a deterministic pen/gaze
//! interaction machine driven by abstract input events.

pub mod address;
pub mod chart;
pub mod engine;
pub mod formula;
pub mod interaction;
pub mod scene;
pub mod session;
pub mod tasks;

pub use address::CellAddress;
pub use engine::{
    CellContent, ClusterCell, ClusterId, EngineError, ErrorKind, RecalcResult, Value, Workbook,
};
