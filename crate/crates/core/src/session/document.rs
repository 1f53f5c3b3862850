//! Workbook documents (`.glw`, JSON, version 1).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::CellAddress;
use crate::chart::{Trend, TrendKind};
use crate::engine::{CellContent, EngineError, Workbook};
use crate::formula::{parse_in, print_in, print_ref, Expr, RefSpec, SheetContext};
use crate::scene::ArcToggles;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(String),
    #[error("unsupported document version {0}")]
    Version(u64),
    #[error("field `{field}`: {detail}")]
    Field { field: String, detail: String },
}

impl FormatError {
    fn field(field: impl Into<String>, detail: impl ToString) -> Self {
        FormatError::Field {
            field: field.into(),
            detail: detail.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Num(f64),
    Str(String),
}

/// Stored cell content: `{"v": literal}` or `{"f": formula}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Literal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetDoc {
    pub name: String,
    #[serde(default)]
    pub cells: BTreeMap<String, CellEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterDoc {
    pub label: String,
    pub sheet: String,
    pub anchor: String,
    pub level: u32,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDoc {
    pub sheet: String,
    pub anchor: String,
    pub width: u32,
    pub height: u32,
    pub kind: String,
    pub series: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend: Option<TrendKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub version: u64,
    pub sheets: Vec<SheetDoc>,
    #[serde(default)]
    pub clusters: Vec<ClusterDoc>,
    #[serde(default)]
    pub charts: Vec<ChartDoc>,
    #[serde(default)]
    pub toggles: ArcToggles,
}

impl Document {
    pub fn from_workbook(wb: &Workbook, toggles: ArcToggles) -> Self {
        let name = |s: usize| wb.sheet_names()[s].clone();
        let sheets = (0..wb.sheet_count())
            .map(|s| {
                let ctx = wb.context(s);
                let cells = wb
                    .sheet_cells(s)
                    .filter_map(|(addr, content)| {
                        let entry = match content {
                            CellContent::Empty => return None,
                            CellContent::Number(n) => CellEntry {
                                v: Some(Literal::Num(*n)),
                                f: None,
                            },
                            CellContent::Text(t) => CellEntry {
                                v: Some(Literal::Str(t.clone())),
                                f: None,
                            },
                            CellContent::Formula { ast, .. } => CellEntry {
                                v: None,
                                f: Some(print_in(ast, &ctx)),
                            },
                        };
                        Some((addr.a1(), entry))
                    })
                    .collect();
                SheetDoc {
                    name: name(s),
                    cells,
                }
            })
            .collect();
        let clusters = wb
            .clusters()
            .map(|c| {
                let ctx = wb.context(c.anchor.sheet);
                ClusterDoc {
                    label: c.label.clone(),
                    sheet: name(c.anchor.sheet),
                    anchor: c.anchor.a1(),
                    level: c.level,
                    members: c.members.iter().map(|m| print_ref(m, &ctx)).collect(),
                }
            })
            .collect();
        let charts = wb
            .charts()
            .iter()
            .map(|c| ChartDoc {
                sheet: name(c.anchor.sheet),
                anchor: c.anchor.a1(),
                width: c.width,
                height: c.height,
                kind: "bar".to_string(),
                series: print_ref(&c.series, &wb.context(c.anchor.sheet)),
                trend: c.trend.as_ref().map(|t| t.kind),
            })
            .collect();
        Document {
            version: FORMAT_VERSION,
            sheets,
            clusters,
            charts,
            toggles,
        }
    }

    /// Rebuilds a workbook, re-evaluating every formula.
    pub fn to_workbook(&self) -> Result<Workbook, FormatError> {
        if self.version != FORMAT_VERSION {
            return Err(FormatError::Version(self.version));
        }
        if self.sheets.is_empty() {
            return Err(FormatError::field(
                "sheets",
                "at least one sheet is required",
            ));
        }
        let mut wb = Workbook::with_sheets(self.sheets.iter().map(|s| s.name.as_str()))
            .map_err(|e| FormatError::field("sheets", e))?;
        let sheet_of = |wb: &Workbook, field: &str, name: &str| {
            wb.sheet_index(name)
                .ok_or_else(|| FormatError::field(field, format!("unknown sheet `{name}`")))
        };
        let addr_of = |field: &str, text: &str, sheet: usize| {
            CellAddress::parse_a1(text, sheet)
                .ok_or_else(|| FormatError::field(field, format!("bad address `{text}`")))
        };

        let mut formulas = Vec::new();
        for (s, sheet) in self.sheets.iter().enumerate() {
            for (key, entry) in &sheet.cells {
                let field = format!("sheets[{s}].cells.{key}");
                let addr = addr_of(&field, key, s)?;
                match (&entry.v, &entry.f) {
                    (Some(Literal::Num(n)), None) => {
                        set(&mut wb, addr, CellContent::Number(*n), &field)?
                    }
                    (Some(Literal::Str(t)), None) => {
                        set(&mut wb, addr, CellContent::Text(t.clone()), &field)?
                    }
                    (None, Some(f)) => formulas.push((addr, f.clone(), field)),
                    _ => {
                        return Err(FormatError::field(
                            field,
                            "exactly one of `v` and `f` is required",
                        ))
                    }
                }
            }
        }

        let mut clusters: Vec<(usize, &ClusterDoc)> = self.clusters.iter().enumerate().collect();
        clusters.sort_by_key(|(_, c)| c.level);
        for (i, c) in clusters {
            let field = format!("clusters[{i}]");
            let sheet = sheet_of(&wb, &field, &c.sheet)?;
            let anchor = addr_of(&field, &c.anchor, sheet)?;
            let members = c
                .members
                .iter()
                .map(|m| {
                    parse_ref(m, &wb.context(sheet)).map_err(|e| FormatError::field(&field, e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            wb.define_cluster(&c.label, anchor, c.level, members)
                .map_err(|e| FormatError::field(&field, e))?;
        }

        for (addr, text, field) in formulas {
            let ast = parse_in(&text, &wb.context(addr.sheet))
                .map_err(|e| FormatError::field(&field, e))?;
            set(&mut wb, addr, CellContent::formula(ast), &field)?;
        }

        for (i, c) in self.charts.iter().enumerate() {
            let field = format!("charts[{i}]");
            if c.kind != "bar" {
                return Err(FormatError::field(
                    field,
                    format!("unknown chart kind `{}`", c.kind),
                ));
            }
            let sheet = sheet_of(&wb, &field, &c.sheet)?;
            let anchor = addr_of(&field, &c.anchor, sheet)?;
            let series = parse_ref(&c.series, &wb.context(sheet))
                .map_err(|e| FormatError::field(&field, e))?;
            let chart = wb
                .create_chart(series, anchor, c.width, c.height)
                .map_err(|e| FormatError::field(&field, e))?;
            if let Some(kind) = c.trend {
                if wb.set_trend(chart.id, Some(kind)).is_err() {
                    wb.chart_mut(chart.id).expect("just created").trend = Some(Trend {
                        kind,
                        coeffs: Vec::new(),
                    });
                }
            }
        }
        Ok(wb)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
        match raw.get("version").and_then(serde_json::Value::as_u64) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(FormatError::Version(v)),
            None => return Err(FormatError::field("version", "missing or not an integer")),
        }
        serde_json::from_value(raw).map_err(|e| FormatError::Json(e.to_string()))
    }

    /// The document without the display toggles, for comparing end states.
    pub fn content_eq(&self, other: &Document) -> bool {
        self.sheets == other.sheets
            && self.clusters == other.clusters
            && self.charts == other.charts
    }

    /// Human-readable differences in content (toggles ignored).
    pub fn diff(&self, actual: &Document) -> Vec<String> {
        let mut out = Vec::new();
        let names = |d: &Document| d.sheets.iter().map(|s| s.name.clone()).collect::<Vec<_>>();
        if names(self) != names(actual) {
            out.push(format!(
                "sheets: expected {:?}, got {:?}",
                names(self),
                names(actual)
            ));
        }
        for (exp, act) in self.sheets.iter().zip(&actual.sheets) {
            let keys: std::collections::BTreeSet<&String> =
                exp.cells.keys().chain(act.cells.keys()).collect();
            for key in keys {
                let (e, a) = (exp.cells.get(key), act.cells.get(key));
                if e != a {
                    out.push(format!(
                        "{}!{}: expected {}, got {}",
                        exp.name,
                        key,
                        show(e),
                        show(a)
                    ));
                }
            }
        }
        if self.clusters != actual.clusters {
            out.push(format!(
                "clusters: expected {:?}, got {:?}",
                self.clusters, actual.clusters
            ));
        }
        if self.charts != actual.charts {
            out.push(format!(
                "charts: expected {:?}, got {:?}",
                self.charts, actual.charts
            ));
        }
        out
    }
}

fn show(entry: Option<&CellEntry>) -> String {
    match entry {
        None => "empty".to_string(),
        Some(CellEntry { f: Some(f), .. }) => f.clone(),
        Some(CellEntry {
            v: Some(Literal::Num(n)),
            ..
        }) => n.to_string(),
        Some(CellEntry {
            v: Some(Literal::Str(s)),
            ..
        }) => format!("{s:?}"),
        Some(_) => "invalid".to_string(),
    }
}

fn set(
    wb: &mut Workbook,
    addr: CellAddress,
    content: CellContent,
    field: &str,
) -> Result<(), FormatError> {
    wb.set_cell(addr, content)
        .map(|_| ())
        .map_err(|e: EngineError| FormatError::field(field, e))
}

/// Parses a reference such as `B1:B3`, `Sheet2!A1` or `@costs`.
pub fn parse_ref(text: &str, ctx: &SheetContext<'_>) -> Result<RefSpec, String> {
    match parse_in(&format!("={text}"), ctx) {
        Ok(Expr::Ref(r)) => Ok(r),
        Ok(_) => Err(format!("`{text}` is not a reference")),
        Err(e) => Err(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_workbook_is_one_empty_sheet() {
        let doc = Document::from_workbook(&Workbook::new(), ArcToggles::default());
        assert_eq!(doc.sheets.len(), 1);
        assert!(doc.sheets[0].cells.is_empty());
        assert!(doc.clusters.is_empty() && doc.charts.is_empty());
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text = r#"{"version": 2, "sheets": [{"name": "Sheet1"}]}"#;
        assert_eq!(Document::from_json(text), Err(FormatError::Version(2)));
        assert!(matches!(
            Document::from_json("{"),
            Err(FormatError::Json(_))
        ));
        let doc = Document::from_json(r#"{"version": 1, "sheets": []}"#).unwrap();
        assert!(matches!(doc.to_workbook(), Err(FormatError::Field { .. })));
    }
}
