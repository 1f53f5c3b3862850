use serde::{Deserialize, Serialize};

use crate::chart::TrendKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrokeClass {
    Linear,
    Poly2,
    None,
}

impl StrokeClass {
    pub fn trend(self) -> Option<TrendKind> {
        match self {
            StrokeClass::Linear => Some(TrendKind::Linear),
            StrokeClass::Poly2 => Some(TrendKind::Poly2),
            StrokeClass::None => None,
        }
    }
}

pub const LINEAR_MAX: f64 = 0.10;
pub const CURVED_MAX: f64 = 0.5;
/// Shortest accepted chord, as a fraction of the chart width.
pub const MIN_CHORD: f64 = 0.10;

/// Classifies an in-air stroke by its largest deviation from the chord
/// between its endpoints, relative to the chord length.
pub fn classify_stroke(points: &[(f64, f64)], chart_width: f64) -> StrokeClass {
    let (Some(&(x0, y0)), Some(&(x1, y1))) = (points.first(), points.last()) else {
        return StrokeClass::None;
    };
    let chord = (x1 - x0).hypot(y1 - y0);
    if points.len() < 2 || !chord.is_finite() || chord == 0.0 || chord < MIN_CHORD * chart_width {
        return StrokeClass::None;
    }
    let deviation = points
        .iter()
        .map(|(x, y)| ((x1 - x0) * (y0 - y) - (x0 - x) * (y1 - y0)).abs() / chord)
        .fold(0.0, f64::max);
    let ratio = deviation / chord;
    if ratio < LINEAR_MAX {
        StrokeClass::Linear
    } else if ratio < CURVED_MAX {
        StrokeClass::Poly2
    } else {
        StrokeClass::None
    }
}
