use serde::{Deserialize, Serialize};

use super::{Rect, Viewport, OVERVIEW_DEPTH};
use crate::address::CellAddress;
use crate::engine::Workbook;

/// Inclusive cell rectangle on one sheet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionBox {
    pub sheet: usize,
    pub row0: u32,
    pub col0: u32,
    pub row1: u32,
    pub col1: u32,
}

impl RegionBox {
    pub fn cols(&self) -> u32 {
        self.col1 - self.col0 + 1
    }

    pub fn rows(&self) -> u32 {
        self.row1 - self.row0 + 1
    }

    pub fn contains(&self, a: CellAddress) -> bool {
        a.sheet == self.sheet
            && (self.row0..=self.row1).contains(&a.row)
            && (self.col0..=self.col1).contains(&a.col)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellAddress> + '_ {
        (self.row0..=self.row1).flat_map(move |r| {
            (self.col0..=self.col1).map(move |c| CellAddress::new(self.sheet, r, c))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverviewScene {
    pub bounds: Rect,
    /// Overview cell size relative to a screen cell.
    pub scale: f64,
    pub depth: f64,
    pub used_region: RegionBox,
    pub viewport_indicator: Rect,
}

/// Bounding box of the cells in use on `sheet` (non-empty cells and cluster
/// anchors), or `None` for an unused sheet.
pub fn used_region(wb: &Workbook, sheet: usize) -> Option<RegionBox> {
    let used = wb
        .sheet_cells(sheet)
        .map(|(a, _)| a)
        .chain(wb.clusters().map(|c| c.anchor).filter(|a| a.sheet == sheet));
    used.fold(None, |acc: Option<RegionBox>, a| {
        Some(match acc {
            None => RegionBox {
                sheet,
                row0: a.row,
                col0: a.col,
                row1: a.row,
                col1: a.col,
            },
            Some(b) => RegionBox {
                sheet,
                row0: b.row0.min(a.row),
                col0: b.col0.min(a.col),
                row1: b.row1.max(a.row),
                col1: b.col1.max(a.col),
            },
        })
    })
}

/// Overview of the used region, fitted into a rect at most two screens wide
/// and centered behind the screen.
pub fn overview(wb: &Workbook, vp: &Viewport) -> OverviewScene {
    let region = used_region(wb, vp.sheet).unwrap_or(RegionBox {
        sheet: vp.sheet,
        row0: 0,
        col0: 0,
        row1: 0,
        col1: 0,
    });
    let (cols, rows) = (f64::from(vp.cols), f64::from(vp.rows));
    let scale = (2.0 * cols / f64::from(region.cols()))
        .min(2.0 * rows / f64::from(region.rows()))
        .min(0.5);
    let w = f64::from(region.cols()) / cols * scale;
    let h = f64::from(region.rows()) / rows * scale;
    let bounds = Rect {
        x: 0.5 - w / 2.0,
        y: 0.5 - h / 2.0,
        w,
        h,
    };
    let vx = bounds.x + (f64::from(vp.origin.col) - f64::from(region.col0)) / cols * scale;
    let vy = bounds.y + (f64::from(vp.origin.row) - f64::from(region.row0)) / rows * scale;
    let viewport_indicator = clip(
        Rect {
            x: vx,
            y: vy,
            w: scale,
            h: scale,
        },
        &bounds,
    );
    OverviewScene {
        bounds,
        scale,
        depth: OVERVIEW_DEPTH,
        used_region: region,
        viewport_indicator,
    }
}

fn clip(r: Rect, to: &Rect) -> Rect {
    let x0 = r.x.clamp(to.x, to.x + to.w);
    let y0 = r.y.clamp(to.y, to.y + to.h);
    let x1 = (r.x + r.w).clamp(to.x, to.x + to.w);
    let y1 = (r.y + r.h).clamp(to.y, to.y + to.h);
    Rect {
        x: x0,
        y: y0,
        w: x1 - x0,
        h: y1 - y0,
    }
}

/// Cell under a point given in overview-normalized coordinates, clamped to
/// the used region.
pub fn overview_pick(ov: &OverviewScene, x: f64, y: f64) -> CellAddress {
    let r = &ov.used_region;
    let pick = |t: f64, n: u32| ((t.clamp(0.0, 1.0) * f64::from(n)).floor() as u32).min(n - 1);
    CellAddress::new(
        r.sheet,
        r.row0 + pick(y, r.rows()),
        r.col0 + pick(x, r.cols()),
    )
}
