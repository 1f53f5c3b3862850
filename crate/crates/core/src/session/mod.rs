//! One engine session per client: decodes messages, drives the interaction
//! machine and emits scene frames.

mod document;
mod log;
mod protocol;
mod transport;

use std::path::Path;

pub use document::{
    parse_ref, CellEntry, ChartDoc, ClusterDoc, Document, FormatError, Literal, SheetDoc,
    FORMAT_VERSION,
};
pub use log::{read_log, write_log, LogError, LOG_HEADER};
pub use protocol::{Command, ErrorCode, Inbound, InboundBody, Outbound};
pub use transport::{serve_stdio, serve_websocket, Clock};

use crate::engine::Workbook;
use crate::interaction::{Driver, Effect, InputEvent};
use crate::scene::{ArcToggles, SceneFrame, Toggle, Viewport};

/// Minimum spacing between two frames, in milliseconds.
pub const FRAME_INTERVAL_MS: f64 = 16.0;
pub const DEFAULT_COLS: u32 = 10;
pub const DEFAULT_ROWS: u32 = 10;
const MAX_SCRIPT_NESTING: usize = 4;

type CommandResult = Result<Option<serde_json::Value>, (ErrorCode, String)>;

#[derive(Clone, Debug)]
pub struct Session {
    driver: Driver,
    revision: u64,
    sent: Option<u64>,
    last_frame_ms: Option<f64>,
    recording: Option<Vec<Inbound>>,
    nesting: usize,
}

impl Default for Session {
    fn default() -> Self {
        Self::new(Workbook::new(), ArcToggles::default())
    }
}

impl Session {
    pub fn new(wb: Workbook, toggles: ArcToggles) -> Self {
        let mut driver = Driver::new(wb, Viewport::new(0, DEFAULT_COLS, DEFAULT_ROWS));
        driver.state.toggles = toggles;
        Session {
            driver,
            revision: 0,
            sent: None,
            last_frame_ms: None,
            recording: None,
            nesting: 0,
        }
    }

    pub fn from_document(doc: &Document) -> Result<Self, FormatError> {
        Ok(Self::new(doc.to_workbook()?, doc.toggles))
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn workbook(&self) -> &Workbook {
        &self.driver.wb
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn document(&self) -> Document {
        Document::from_workbook(&self.driver.wb, self.driver.state.toggles)
    }

    /// Starts keeping every accepted inbound message.
    pub fn start_recording(&mut self) {
        self.recording = Some(Vec::new());
    }

    pub fn recorded(&self) -> Option<&[Inbound]> {
        self.recording.as_deref()
    }

    pub fn scene(&self) -> SceneFrame {
        self.driver.frame()
    }

    /// The current scene as a full frame, marking it sent.
    pub fn full_frame(&mut self, now_ms: f64) -> Outbound {
        self.frame_now(now_ms)
    }

    /// Handles one text line from the transport.
    pub fn handle_line(&mut self, line: &str, now_ms: f64) -> Vec<Outbound> {
        match serde_json::from_str::<Inbound>(line) {
            Ok(msg) => self.handle(msg, now_ms),
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(serde_json::Value::as_u64));
                vec![Outbound::Error {
                    id,
                    code: ErrorCode::Parse,
                    detail: e.to_string(),
                }]
            }
        }
    }

    pub fn handle(&mut self, msg: Inbound, now_ms: f64) -> Vec<Outbound> {
        let mut out = self.apply(msg);
        out.extend(self.poll(now_ms));
        out
    }

    /// Applies a message without emitting frames.
    fn apply(&mut self, msg: Inbound) -> Vec<Outbound> {
        let mut out = Vec::new();
        match &msg.body {
            InboundBody::Event { event } => {
                if !event.is_well_formed() {
                    out.push(Outbound::Error {
                        id: msg.id,
                        code: ErrorCode::InvalidEvent,
                        detail: "non-finite coordinates, negative height or empty key".to_string(),
                    });
                    return out;
                }
                self.record(&msg);
                let effects = self.driver.handle(event);
                self.absorb(&effects, &mut out);
                if msg.id.is_some() {
                    out.insert(
                        0,
                        Outbound::Ack {
                            id: msg.id,
                            result: None,
                        },
                    );
                }
            }
            InboundBody::Command { command } => {
                self.record(&msg);
                match self.command(command, &mut out) {
                    Ok(result) => {
                        self.revision += 1;
                        out.insert(0, Outbound::Ack { id: msg.id, result });
                    }
                    Err((code, detail)) => out.insert(
                        0,
                        Outbound::Error {
                            id: msg.id,
                            code,
                            detail,
                        },
                    ),
                }
            }
        }
        out
    }

    fn record(&mut self, msg: &Inbound) {
        if self.nesting == 0 {
            if let Some(log) = self.recording.as_mut() {
                log.push(msg.clone());
            }
        }
    }

    fn absorb(&mut self, effects: &[Effect], out: &mut Vec<Outbound>) {
        let mut dirty = false;
        for effect in effects {
            match effect {
                Effect::Diagnostic { message } => out.push(Outbound::Diagnostic {
                    message: message.clone(),
                }),
                Effect::LabelPrompt { label, anchor } => {
                    out.push(Outbound::LabelPrompt {
                        label: label.clone(),
                        anchor: *anchor,
                    });
                    dirty = true;
                }
                Effect::Mutation { .. } | Effect::Viewport { .. } | Effect::SceneDirty => {
                    dirty = true
                }
            }
        }
        if dirty {
            self.revision += 1;
        }
    }

    fn command(&mut self, command: &Command, out: &mut Vec<Outbound>) -> CommandResult {
        let failed = |detail: String| (ErrorCode::CommandFailed, detail);
        match command {
            Command::Load { path, document } => {
                let doc = match (path, document) {
                    (Some(p), None) => load_document(Path::new(p))?,
                    (None, Some(d)) => (**d).clone(),
                    _ => {
                        return Err(failed(
                            "load needs exactly one of `path` and `document`".into(),
                        ))
                    }
                };
                let wb = doc
                    .to_workbook()
                    .map_err(|e| (ErrorCode::Format, e.to_string()))?;
                let viewport = Viewport::new(
                    0,
                    self.driver.state.viewport.cols,
                    self.driver.state.viewport.rows,
                );
                self.driver = Driver::new(wb, viewport);
                self.driver.state.toggles = doc.toggles;
                Ok(None)
            }
            Command::Save { path } => {
                let doc = self.document();
                match path {
                    Some(p) => {
                        std::fs::write(p, doc.to_json())
                            .map_err(|e| (ErrorCode::Io, format!("{p}: {e}")))?;
                        Ok(Some(serde_json::json!({ "path": p })))
                    }
                    None => Ok(Some(
                        serde_json::to_value(&doc).expect("documents always serialize"),
                    )),
                }
            }
            Command::SetLabel { label } => {
                let effects = self
                    .driver
                    .set_label(label)
                    .ok_or_else(|| failed("no cluster awaits a label".into()))?;
                if let Some(Effect::Diagnostic { message }) = effects
                    .iter()
                    .find(|e| matches!(e, Effect::Diagnostic { .. }))
                {
                    return Err(failed(message.clone()));
                }
                Ok(None)
            }
            Command::SetToggle { toggle, on } => {
                let t = Toggle::from_key(toggle)
                    .ok_or_else(|| failed(format!("unknown toggle `{toggle}`")))?;
                self.driver.set_toggle(t, *on);
                Ok(None)
            }
            Command::ToggleLinks { cell } => {
                self.driver.toggle_links(*cell);
                Ok(None)
            }
            Command::SetViewportMode { mode } => {
                self.driver.set_view_mode(*mode);
                Ok(None)
            }
            Command::RunScript { path } => {
                if self.nesting >= MAX_SCRIPT_NESTING {
                    return Err(failed("scripts nested too deeply".into()));
                }
                let text = std::fs::read_to_string(path)
                    .map_err(|e| (ErrorCode::Io, format!("{path}: {e}")))?;
                let messages = read_log(&text).map_err(|e| (ErrorCode::Format, e.to_string()))?;
                let count = messages.len();
                self.nesting += 1;
                for m in messages {
                    out.extend(self.apply(m));
                }
                self.nesting -= 1;
                Ok(Some(serde_json::json!({ "messages": count })))
            }
        }
    }

    /// A frame for the latest revision if one is due at `now_ms`.
    pub fn poll(&mut self, now_ms: f64) -> Option<Outbound> {
        let due = self
            .last_frame_ms
            .map_or(true, |t| now_ms - t >= FRAME_INTERVAL_MS);
        (self.pending() && due).then(|| self.frame_now(now_ms))
    }

    /// A frame for the latest revision if it has not been sent yet.
    pub fn flush(&mut self, now_ms: f64) -> Option<Outbound> {
        self.pending().then(|| self.frame_now(now_ms))
    }

    pub fn pending(&self) -> bool {
        self.sent != Some(self.revision)
    }

    /// When the next coalesced frame may be sent.
    pub fn next_deadline(&self) -> Option<f64> {
        if !self.pending() {
            return None;
        }
        Some(self.last_frame_ms.map_or(0.0, |t| t + FRAME_INTERVAL_MS))
    }

    fn frame_now(&mut self, now_ms: f64) -> Outbound {
        self.sent = Some(self.revision);
        self.last_frame_ms = Some(now_ms);
        Outbound::Frame {
            revision: self.revision,
            full: true,
            frame: Box::new(self.scene()),
        }
    }

    /// Feeds input events with no frame output; for tests and scripting.
    pub fn feed_events(&mut self, events: &[InputEvent]) {
        for e in events {
            self.apply(Inbound::event(e.clone()));
        }
    }

    /// Applies messages in order and returns every output, flushing frames
    /// on a synthetic clock that advances one interval per message.
    pub fn run(&mut self, messages: &[Inbound]) -> Vec<Outbound> {
        let mut out = Vec::new();
        for (i, m) in messages.iter().enumerate() {
            out.extend(self.handle(m.clone(), i as f64 * FRAME_INTERVAL_MS));
        }
        out.extend(self.flush(messages.len() as f64 * FRAME_INTERVAL_MS));
        out
    }
}

pub fn load_document(path: &Path) -> Result<Document, (ErrorCode, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (ErrorCode::Io, format!("{}: {e}", path.display())))?;
    Document::from_json(&text).map_err(|e| (ErrorCode::Format, e.to_string()))
}
