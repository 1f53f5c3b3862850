//! Bar charts over a cell series, with least-squares trendlines.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::CellAddress;
use crate::engine::{EngineError, Value, Workbook};
use crate::formula::RefSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChartId(pub u32);

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Bar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendKind {
    Linear,
    Poly2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub kind: TrendKind,
    /// `(slope, intercept)` for linear, `(a2, a1, a0)` for quadratic.
    /// Empty when the current series cannot be fitted.
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub id: ChartId,
    pub anchor: CellAddress,
    pub width: u32,
    pub height: u32,
    pub kind: ChartKind,
    pub series: RefSpec,
    pub trend: Option<Trend>,
}

impl ChartSpec {
    pub fn covers(&self, addr: CellAddress) -> bool {
        addr.sheet == self.anchor.sheet
            && (self.anchor.row..self.anchor.row + self.height).contains(&addr.row)
            && (self.anchor.col..self.anchor.col + self.width).contains(&addr.col)
    }
}

/// One bar in chart-local cell units, `y` growing downward from the chart top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarGeometry {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all x values are equal")]
    DegenerateX,
    #[error("normal equations are singular")]
    Singular,
    #[error("only degree 2 is supported")]
    UnsupportedDegree,
}

/// Ordinary least squares line through `points`: `(slope, intercept)`.
pub fn linear_trend(points: &[(f64, f64)]) -> Result<(f64, f64), FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateX);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Least-squares quadratic `(a2, a1, a0)` from the 3x3 normal equations.
pub fn poly_trend(points: &[(f64, f64)], degree: usize) -> Result<[f64; 3], FitError> {
    if degree != 2 {
        return Err(FitError::UnsupportedDegree);
    }
    if points.len() < 3 {
        return Err(FitError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    // Centering x keeps the normal matrix well scaled.
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for (x, y) in points {
        let u = x - mx;
        let mut p = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                t[k] += p * y;
            }
            p *= u;
        }
    }
    // Unknowns ordered (b0, b1, b2) for y = b0 + b1 u + b2 u^2.
    let mut m = [
        [s[0], s[1], s[2], t[0]],
        [s[1], s[2], s[3], t[1]],
        [s[2], s[3], s[4], t[2]],
    ];
    let b = solve3(&mut m)?;
    let (b0, b1, b2) = (b[0], b[1], b[2]);
    Ok([b2, b1 - 2.0 * b2 * mx, b0 - b1 * mx + b2 * mx * mx])
}

fn solve3(m: &mut [[f64; 4]; 3]) -> Result<[f64; 3], FitError> {
    let scale = m
        .iter()
        .flat_map(|r| r[..3].iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(FitError::Singular);
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|a, b| m[*a][col].abs().total_cmp(&m[*b][col].abs()))
            .expect("non-empty");
        if m[pivot][col].abs() <= scale * 1e-12 {
            return Err(FitError::Singular);
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let rest: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][3] - rest) / m[row][row];
    }
    Ok(x)
}

/// Fits `kind` to `values` at x = 0..n-1.
pub fn fit(kind: TrendKind, values: &[f64]) -> Result<Vec<f64>, FitError> {
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64, *v))
        .collect();
    match kind {
        TrendKind::Linear => linear_trend(&points).map(|(m, b)| vec![m, b]),
        TrendKind::Poly2 => poly_trend(&points, 2).map(|c| c.to_vec()),
    }
}

/// Bar layout inside a `width` x `height` cell rect. Heights scale to the
/// largest magnitude; with any negative value the baseline moves to the
/// vertical midpoint.
pub fn bar_layout(values: &[f64], width: u32, height: u32) -> Vec<BarGeometry> {
    if values.is_empty() {
        return Vec::new();
    }
    let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (w, h) = (f64::from(width), f64::from(height));
    let any_negative = values.iter().any(|v| *v < 0.0);
    let (baseline, span) = if any_negative {
        (h / 2.0, h / 2.0)
    } else {
        (h, h)
    };
    let slot = w / values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let len = if max > 0.0 { v.abs() / max * span } else { 0.0 };
            let y = if *v >= 0.0 { baseline - len } else { baseline };
            BarGeometry {
                value: *v,
                x: i as f64 * slot + slot * 0.1,
                y,
                w: slot * 0.8,
                h: len,
            }
        })
        .collect()
}

impl Workbook {
    /// Values plotted by a series: one per resolved cell, non-numeric cells
    /// read as zero.
    pub fn series_values(&self, series: &RefSpec) -> Result<Vec<f64>, EngineError> {
        let cells = self
            .resolve_ref(series)
            .map_err(|_| EngineError::EmptySeries)?;
        let values: Vec<Value> = cells.into_iter().map(|c| self.get_value(c)).collect();
        if !values.iter().any(|v| matches!(v, Value::Num(_))) {
            return Err(EngineError::EmptySeries);
        }
        Ok(values.iter().map(|v| v.as_num().unwrap_or(0.0)).collect())
    }

    pub fn create_chart(
        &mut self,
        series: RefSpec,
        anchor: CellAddress,
        width: u32,
        height: u32,
    ) -> Result<ChartSpec, EngineError> {
        self.check_sheet(anchor.sheet)?;
        if width == 0 || height == 0 {
            return Err(EngineError::BadChartSize);
        }
        self.series_values(&series)?;
        let id = ChartId(self.next_chart_id);
        self.next_chart_id += 1;
        let chart = ChartSpec {
            id,
            anchor,
            width,
            height,
            kind: ChartKind::Bar,
            series,
            trend: None,
        };
        self.charts.push(chart.clone());
        self.commit_structure_change();
        Ok(chart)
    }

    /// Sets or clears a chart's trendline and fits it to the current values.
    pub fn set_trend(
        &mut self,
        id: ChartId,
        kind: Option<TrendKind>,
    ) -> Result<Option<Trend>, EngineError> {
        let chart = self.chart(id).ok_or(EngineError::NoSuchChart(id))?;
        let trend = match kind {
            Some(kind) => {
                let values = self.series_values(&chart.series)?;
                Some(Trend {
                    kind,
                    coeffs: fit(kind, &values)?,
                })
            }
            None => None,
        };
        self.chart_mut(id).expect("checked above").trend = trend.clone();
        self.commit_structure_change();
        Ok(trend)
    }

    pub fn delete_chart(&mut self, id: ChartId) -> Result<(), EngineError> {
        let before = self.charts.len();
        self.charts.retain(|c| c.id != id);
        if self.charts.len() == before {
            return Err(EngineError::NoSuchChart(id));
        }
        self.commit_structure_change();
        Ok(())
    }

    /// Bars of a chart for the current values; empty when the series has no
    /// numeric value.
    pub fn chart_bars(&self, chart: &ChartSpec) -> Vec<BarGeometry> {
        self.series_values(&chart.series)
            .map(|v| bar_layout(&v, chart.width, chart.height))
            .unwrap_or_default()
    }

    pub(crate) fn chart_mut(&mut self, id: ChartId) -> Option<&mut ChartSpec> {
        self.charts.iter_mut().find(|c| c.id == id)
    }

    pub(crate) fn refit_charts(&mut self) {
        let fits: Vec<Option<Vec<f64>>> = self
            .charts
            .iter()
            .map(|c| {
                c.trend.as_ref().map(|t| {
                    self.series_values(&c.series)
                        .ok()
                        .and_then(|v| fit(t.kind, &v).ok())
                        .unwrap_or_default()
                })
            })
            .collect();
        for (chart, coeffs) in self.charts.iter_mut().zip(fits) {
            if let (Some(t), Some(c)) = (chart.trend.as_mut(), coeffs) {
                t.coeffs = c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn linear_examples() {
        assert_eq!(
            linear_trend(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap(),
            (1.0, 0.0)
        );
        assert_eq!(
            linear_trend(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap(),
            (0.0, 1.0)
        );
        let (m, b) = linear_trend(&[(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert!(close(m, 1.5) && close(b, 1.0 / 6.0));
        assert_eq!(
            linear_trend(&[(1.0, 0.0), (1.0, 2.0)]),
            Err(FitError::DegenerateX)
        );
    }

    #[test]
    fn quadratic_examples() {
        let c = poly_trend(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)], 2).unwrap();
        assert!(close(c[0], 1.0) && close(c[1], 0.0) && close(c[2], 0.0));
        let c = poly_trend(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)], 2).unwrap();
        assert!(close(c[0], 0.0) && close(c[1], 2.0) && close(c[2], 1.0));
        let pts: Vec<_> = (0..5)
            .map(|x| (x as f64, 2.0 * (x * x) as f64 - x as f64 + 3.0))
            .collect();
        let c = poly_trend(&pts, 2).unwrap();
        assert!(close(c[0], 2.0) && close(c[1], -1.0) && close(c[2], 3.0));
        assert_eq!(
            poly_trend(&[(1.0, 0.0), (1.0, 1.0), (1.0, 2.0)], 2),
            Err(FitError::Singular)
        );
    }

    #[test]
    fn bars_scale_to_largest_magnitude() {
        let bars = bar_layout(&[2.0, 30.0, 4.0], 4, 3);
        assert!(close(bars[1].h, 3.0) && close(bars[0].h, 0.2));
        let bars = bar_layout(&[-1.0, 2.0], 2, 2);
        assert!(close(bars[0].y, 1.0) && close(bars[0].h, 0.5) && close(bars[1].y, 0.0));
    }
}
