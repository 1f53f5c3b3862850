//! Event logs (`.glev`): a header line followed by inbound messages.

use thiserror::Error;

use super::protocol::Inbound;

pub const LOG_HEADER: &str = "#gridlayers-events v1";

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LogError {
    #[error("missing `{LOG_HEADER}` header")]
    MissingHeader,
    #[error("line {line}: {detail}")]
    BadLine { line: usize, detail: String },
}

pub fn write_log(messages: &[Inbound]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for m in messages {
        out.push_str(&m.to_line());
        out.push('\n');
    }
    out
}

/// Parses a log. Blank lines are skipped.
pub fn read_log(text: &str) -> Result<Vec<Inbound>, LogError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == LOG_HEADER => {}
        _ => return Err(LogError::MissingHeader),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LogError::BadLine {
                line: i + 1,
                detail: e.to_string(),
            })
        })
        .collect()
}
