//! Deterministic pen/gaze state machine producing engine mutations and
//! scene updates.

mod events;
mod machine;
mod menu;
mod script;
mod stroke;

pub use events::{Button, Effect, EngineMutation, InputEvent, ViewportCommand};
pub use machine::{
    map_in_air, trash_drop, InteractionState, LinkOrigin, MenuTarget, Mode, Slide, TrashPayload,
};
pub use menu::{
    default_menu, menu_level_for_height, sector_at, sector_range, MenuAction, MenuNode, OpenMenu,
    DEAD_ZONE, RING_RADIUS,
};
pub use script::Gestures;
pub use stroke::{classify_stroke, StrokeClass, CURVED_MAX, LINEAR_MAX, MIN_CHORD};

use crate::engine::Workbook;
use crate::scene::{SceneFrame, Toggle, ViewMode, Viewport};
use crate::CellAddress;

/// Owns a workbook and an interaction state and applies the machine's
/// mutations as they are produced.
#[derive(Clone, Debug)]
pub struct Driver {
    pub wb: Workbook,
    pub state: InteractionState,
    /// Primitive input events seen, ticks excluded.
    pub events: usize,
    /// Mutations applied successfully.
    pub mutations: usize,
}

impl Driver {
    pub fn new(wb: Workbook, viewport: Viewport) -> Self {
        Driver {
            wb,
            state: InteractionState::new(viewport),
            events: 0,
            mutations: 0,
        }
    }

    /// Feeds one event, applies its mutations and replays events that were
    /// queued behind a slide which has now finished.
    pub fn handle(&mut self, event: &InputEvent) -> Vec<Effect> {
        if !matches!(event, InputEvent::Tick { .. }) {
            self.events += 1;
        }
        let mut out = self.step(event);
        for queued in self.state.take_ready_queue() {
            out.extend(self.step(&queued));
        }
        out
    }

    fn step(&mut self, event: &InputEvent) -> Vec<Effect> {
        let effects = self.state.handle_event(event, &self.wb);
        self.apply(effects)
    }

    /// Applies every mutation in `effects`; failures become diagnostics.
    pub fn apply(&mut self, effects: Vec<Effect>) -> Vec<Effect> {
        let mut out = Vec::with_capacity(effects.len());
        for effect in effects {
            let failure = effect.mutation().and_then(|m| m.apply(&mut self.wb).err());
            match failure {
                Some(e) => {
                    out.push(effect);
                    out.push(Effect::diagnostic(e.to_string()));
                }
                None => {
                    if effect.mutation().is_some() {
                        self.mutations += 1;
                    }
                    out.push(effect);
                }
            }
        }
        out
    }

    pub fn set_label(&mut self, label: &str) -> Option<Vec<Effect>> {
        let effects = self.state.set_label(label)?;
        Some(self.apply(effects))
    }

    pub fn set_toggle(&mut self, toggle: Toggle, on: bool) -> Vec<Effect> {
        self.state.set_toggle(toggle, on)
    }

    pub fn toggle_links(&mut self, cell: CellAddress) -> Vec<Effect> {
        self.state.toggle_links(cell)
    }

    pub fn set_view_mode(&mut self, mode: ViewMode) -> Vec<Effect> {
        self.state.set_view_mode(mode)
    }

    pub fn frame(&self) -> SceneFrame {
        self.state.frame(&self.wb)
    }
}
