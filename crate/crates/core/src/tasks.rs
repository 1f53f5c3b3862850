//! Task scripts: an initial workbook, an event log and the expected end
//! state, replayed through a fresh session.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::CellAddress;
use crate::interaction::InputEvent;
use crate::session::{load_document, read_log, Document, Inbound, InboundBody, Session};

/// The evaluated task set.
pub const TASK_NAMES: [&str; 8] = ["CF", "AIC", "AR", "RC", "RE", "AC", "AT", "AIS"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskScript {
    pub name: String,
    /// Free-form variant tag, e.g. `vr` or `text`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub initial: PathBuf,
    pub events: PathBuf,
    pub expected: PathBuf,
    /// `(address, displayed value)` pairs on the first sheet, or with a
    /// `Sheet!` prefix.
    #[serde(default)]
    pub expected_values: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("{path}: {detail}")]
    Io { path: PathBuf, detail: String },
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },
    #[error("unknown task `{0}`")]
    UnknownTask(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskReport {
    pub name: String,
    pub variant: Option<String>,
    pub passed: bool,
    /// Inbound messages replayed, ticks excluded.
    pub events: usize,
    /// Engine mutations applied.
    pub mutations: usize,
    pub diffs: Vec<String>,
    /// The final document, pretty JSON.
    #[serde(skip)]
    pub final_document: String,
}

impl fmt::Display for TaskReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}", self.name)?;
        if let Some(v) = &self.variant {
            write!(f, " ({v})")?;
        }
        write!(f, " events={} mutations={}", self.events, self.mutations)?;
        for d in &self.diffs {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

impl TaskScript {
    /// Reads a script; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, TaskError> {
        let text = std::fs::read_to_string(path).map_err(|e| TaskError::Io {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        let mut script: TaskScript =
            serde_json::from_str(&text).map_err(|e| TaskError::Format {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
        if !TASK_NAMES.contains(&script.name.as_str()) {
            return Err(TaskError::UnknownTask(script.name));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut script.initial,
            &mut script.events,
            &mut script.expected,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(script)
    }

    pub fn messages(&self) -> Result<Vec<Inbound>, TaskError> {
        let text = std::fs::read_to_string(&self.events).map_err(|e| TaskError::Io {
            path: self.events.clone(),
            detail: e.to_string(),
        })?;
        read_log(&text).map_err(|e| TaskError::Format {
            path: self.events.clone(),
            detail: e.to_string(),
        })
    }

    fn document(path: &Path) -> Result<Document, TaskError> {
        load_document(path).map_err(|(_, detail)| TaskError::Format {
            path: path.to_path_buf(),
            detail,
        })
    }

    pub fn replay(&self) -> Result<TaskReport, TaskError> {
        let initial = Self::document(&self.initial)?;
        let expected = Self::document(&self.expected)?;
        let messages = self.messages()?;
        let mut session = Session::from_document(&initial).map_err(|e| TaskError::Format {
            path: self.initial.clone(),
            detail: e.to_string(),
        })?;
        session.run(&messages);

        let actual = session.document();
        let mut diffs = expected.diff(&actual);
        let wb = session.workbook();
        for (cell, want) in &self.expected_values {
            let addr = match cell.split_once('!') {
                Some((sheet, a1)) => wb
                    .sheet_index(sheet)
                    .and_then(|s| CellAddress::parse_a1(a1, s)),
                None => CellAddress::parse_a1(cell, 0),
            };
            match addr {
                Some(addr) => {
                    let got = wb.get_value(addr).to_string();
                    if got != *want {
                        diffs.push(format!("value {cell}: expected {want}, got {got}"));
                    }
                }
                None => diffs.push(format!("value {cell}: bad address")),
            }
        }
        Ok(TaskReport {
            name: self.name.clone(),
            variant: self.variant.clone(),
            passed: diffs.is_empty(),
            events: count_events(&messages),
            mutations: session.driver().mutations,
            diffs,
            final_document: actual.to_json(),
        })
    }
}

/// Primitive user actions in a log: input events other than ticks, plus
/// commands such as label entry.
pub fn count_events(messages: &[Inbound]) -> usize {
    messages
        .iter()
        .filter(|m| {
            !matches!(
                m.body,
                InboundBody::Event {
                    event: InputEvent::Tick { .. }
                }
            )
        })
        .count()
}
