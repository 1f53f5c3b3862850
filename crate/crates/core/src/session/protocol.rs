//! Newline-delimited JSON messages exchanged with clients.

use serde::{Deserialize, Serialize};

use crate::address::CellAddress;
use crate::interaction::InputEvent;
use crate::scene::{SceneFrame, ViewMode};

use super::document::Document;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inbound {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    /// Client timestamp in milliseconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(flatten)]
    pub body: InboundBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InboundBody {
    Event { event: InputEvent },
    Command { command: Command },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    /// Replaces the workbook, from a file or an inline document.
    Load {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        document: Option<Box<Document>>,
    },
    /// Writes the workbook to `path`, or returns it in the ack.
    Save {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
    SetLabel {
        label: String,
    },
    SetToggle {
        toggle: String,
        on: bool,
    },
    ToggleLinks {
        cell: CellAddress,
    },
    SetViewportMode {
        mode: ViewMode,
    },
    /// Replays an event log file into this session.
    RunScript {
        path: String,
    },
}

impl Inbound {
    pub fn event(event: InputEvent) -> Self {
        Inbound {
            id: None,
            t: None,
            body: InboundBody::Event { event },
        }
    }

    pub fn command(id: u64, command: Command) -> Self {
        Inbound {
            id: Some(id),
            t: None,
            body: InboundBody::Command { command },
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outbound {
    Frame {
        revision: u64,
        full: bool,
        frame: Box<SceneFrame>,
    },
    Ack {
        id: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<serde_json::Value>,
    },
    Error {
        id: Option<u64>,
        code: ErrorCode,
        detail: String,
    },
    Diagnostic {
        message: String,
    },
    LabelPrompt {
        label: String,
        anchor: CellAddress,
    },
}

impl Outbound {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    /// The line is not a valid message.
    Parse,
    /// The event has non-finite coordinates or a negative height.
    InvalidEvent,
    /// The command was understood but could not be carried out.
    CommandFailed,
    Io,
    Format,
}
