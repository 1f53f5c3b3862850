use serde::{Deserialize, Serialize};

use super::{Rect, SLIDE_DURATION_MS};
use crate::address::CellAddress;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ViewMode {
    /// The displayed sheet follows the tablet.
    #[default]
    Aligned,
    /// The displayed sheet stays put while the sensed area is retargeted.
    Fixed,
    /// Like aligned, but the display is tilted upright.
    Vertical,
}

/// The part of a sheet mapped onto the physical tablet.
///
/// Screen coordinates are normalized so the physical screen spans `[0,1]`
/// on both axes; the extended margin adds `margin_cols`/`margin_rows` cells
/// of context on every side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub sheet: usize,
    /// Top-left cell under the physical screen.
    pub origin: CellAddress,
    pub cols: u32,
    pub rows: u32,
    pub mode: ViewMode,
    pub margin_cols: u32,
    pub margin_rows: u32,
    /// Top-left cell of the displayed sheet region; differs from `origin`
    /// only in fixed mode.
    pub display_origin: CellAddress,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlideAnimation {
    pub duration_ms: u32,
    pub from: CellAddress,
    pub to: CellAddress,
}

impl Viewport {
    /// A `cols` x `rows` viewport at A1 of `sheet` with a one-viewport margin.
    pub fn new(sheet: usize, cols: u32, rows: u32) -> Self {
        let cols = cols.max(1);
        let rows = rows.max(1);
        let origin = CellAddress::new(sheet, 0, 0);
        Viewport {
            sheet,
            origin,
            cols,
            rows,
            mode: ViewMode::Aligned,
            margin_cols: cols,
            margin_rows: rows,
            display_origin: origin,
        }
    }

    pub fn on_sheet(&self, sheet: usize) -> Self {
        let origin = CellAddress::new(sheet, 0, 0);
        Viewport {
            sheet,
            origin,
            display_origin: origin,
            ..self.clone()
        }
    }

    pub fn with_mode(&self, mode: ViewMode) -> Self {
        let display_origin = if mode == ViewMode::Fixed {
            self.display_origin
        } else {
            self.origin
        };
        Viewport {
            mode,
            display_origin,
            ..self.clone()
        }
    }

    pub fn cell_rect(&self, addr: CellAddress) -> Rect {
        let w = 1.0 / f64::from(self.cols);
        let h = 1.0 / f64::from(self.rows);
        Rect {
            x: (f64::from(addr.col) - f64::from(self.origin.col)) * w,
            y: (f64::from(addr.row) - f64::from(self.origin.row)) * h,
            w,
            h,
        }
    }

    /// The physical screen plus the extended margin.
    pub fn canvas(&self) -> Rect {
        let mx = f64::from(self.margin_cols) / f64::from(self.cols);
        let my = f64::from(self.margin_rows) / f64::from(self.rows);
        Rect {
            x: -mx,
            y: -my,
            w: 1.0 + 2.0 * mx,
            h: 1.0 + 2.0 * my,
        }
    }

    pub fn is_visible(&self, addr: CellAddress) -> bool {
        addr.sheet == self.sheet
            && (self.origin.col..self.origin.col + self.cols).contains(&addr.col)
            && (self.origin.row..self.origin.row + self.rows).contains(&addr.row)
    }

    pub fn in_canvas(&self, addr: CellAddress) -> bool {
        let (c0, r0, c1, r1) = self.canvas_cells();
        addr.sheet == self.sheet && (c0..=c1).contains(&addr.col) && (r0..=r1).contains(&addr.row)
    }

    /// Inclusive `(col0, row0, col1, row1)` cell bounds of the canvas,
    /// clipped to the sheet.
    pub fn canvas_cells(&self) -> (u32, u32, u32, u32) {
        (
            self.origin.col.saturating_sub(self.margin_cols),
            self.origin.row.saturating_sub(self.margin_rows),
            self.origin.col + self.cols + self.margin_cols - 1,
            self.origin.row + self.rows + self.margin_rows - 1,
        )
    }

    /// Visible cells in row-major order.
    pub fn screen_cells(&self) -> impl Iterator<Item = CellAddress> + '_ {
        (0..self.rows).flat_map(move |r| {
            (0..self.cols).map(move |c| {
                CellAddress::new(self.sheet, self.origin.row + r, self.origin.col + c)
            })
        })
    }

    /// Cell under a normalized point, including the extended margin.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<CellAddress> {
        let canvas = self.canvas();
        if !canvas.contains(x, y) || !x.is_finite() || !y.is_finite() {
            return None;
        }
        let col = f64::from(self.origin.col) + (x * f64::from(self.cols)).floor();
        let row = f64::from(self.origin.row) + (y * f64::from(self.rows)).floor();
        if col < 0.0 || row < 0.0 || col > f64::from(crate::address::MAX_COL) {
            return None;
        }
        Some(CellAddress::new(self.sheet, row as u32, col as u32))
    }

    /// Physical-screen cell under a normalized point.
    pub fn screen_cell_at(&self, x: f64, y: f64) -> Option<CellAddress> {
        if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
            return None;
        }
        self.cell_at(x, y)
    }
}

/// Moves the sensed area so the page containing `target` is flush with the
/// physical screen. Pages tile the sheet in viewport-sized steps.
pub fn slide_to_align(viewport: &Viewport, target: CellAddress) -> (Viewport, SlideAnimation) {
    if viewport.is_visible(target) || target.sheet != viewport.sheet {
        let anim = SlideAnimation {
            duration_ms: 0,
            from: viewport.origin,
            to: viewport.origin,
        };
        return (viewport.clone(), anim);
    }
    let origin = CellAddress::new(
        viewport.sheet,
        target.row / viewport.rows * viewport.rows,
        target.col / viewport.cols * viewport.cols,
    );
    let mut next = viewport.clone();
    next.origin = origin;
    if viewport.mode != ViewMode::Fixed {
        next.display_origin = origin;
    }
    let anim = SlideAnimation {
        duration_ms: SLIDE_DURATION_MS,
        from: viewport.origin,
        to: origin,
    };
    (next, anim)
}
