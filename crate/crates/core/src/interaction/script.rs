//! Gesture-level builder for input event scripts.

use super::events::{Button, InputEvent};
use super::menu::{default_menu, MenuNode, RING_RADIUS};
use crate::address::CellAddress;
use crate::scene::{Viewport, LAYER_SPACING, TRASH_RECT};

/// Builds primitive event sequences from gestures such as taps, drags and
/// menu choices, tracking the pointer so menu geometry can be predicted.
#[derive(Clone, Debug)]
pub struct Gestures {
    viewport: Viewport,
    menu: MenuNode,
    pointer: (f64, f64),
    events: Vec<InputEvent>,
}

impl Gestures {
    pub fn new(viewport: Viewport) -> Self {
        Gestures {
            viewport,
            menu: default_menu(),
            pointer: (0.5, 0.5),
            events: Vec::new(),
        }
    }

    pub fn events(&self) -> &[InputEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<InputEvent> {
        self.events
    }

    pub fn push(&mut self, event: InputEvent) -> &mut Self {
        match event {
            InputEvent::PenDown { x, y }
            | InputEvent::PenMove { x, y }
            | InputEvent::PenUp { x, y }
            | InputEvent::PenHover { x, y, .. } => self.pointer = (x, y),
            _ => {}
        }
        self.events.push(event);
        self
    }

    /// Center of `cell` in screen units.
    pub fn point(&self, cell: &str) -> (f64, f64) {
        let addr = CellAddress::parse_a1(cell, self.viewport.sheet).expect("valid A1 address");
        self.viewport.cell_rect(addr).center()
    }

    pub fn tap_at(&mut self, x: f64, y: f64) -> &mut Self {
        self.push(InputEvent::PenDown { x, y })
            .push(InputEvent::PenUp { x, y })
    }

    pub fn tap(&mut self, cell: &str) -> &mut Self {
        let (x, y) = self.point(cell);
        self.tap_at(x, y)
    }

    pub fn drag(&mut self, from: &str, to: &str) -> &mut Self {
        let (x0, y0) = self.point(from);
        let (x1, y1) = self.point(to);
        self.push(InputEvent::PenDown { x: x0, y: y0 })
            .push(InputEvent::PenMove { x: x1, y: y1 })
            .push(InputEvent::PenUp { x: x1, y: y1 })
    }

    pub fn hover_at(&mut self, x: f64, y: f64, h: f64) -> &mut Self {
        self.push(InputEvent::PenHover { x, y, h })
    }

    pub fn hover(&mut self, cell: &str, h: f64) -> &mut Self {
        let (x, y) = self.point(cell);
        self.hover_at(x, y, h)
    }

    pub fn button(&mut self, button: Button, pressed: bool) -> &mut Self {
        self.push(InputEvent::PenButton { button, pressed })
    }

    /// Primary press and release with nothing in between.
    pub fn click(&mut self) -> &mut Self {
        self.button(Button::Primary, true)
            .button(Button::Primary, false)
    }

    /// Raises the pen through the menu rings that open at the current
    /// pointer, pointing at each entry of `path`, then confirms.
    pub fn choose(&mut self, path: &[&str]) -> &mut Self {
        let center = self.pointer;
        let mut node = self.menu.clone();
        for (level, id) in path.iter().enumerate() {
            let n = node.children.len();
            let i = node
                .children
                .iter()
                .position(|c| c.id == *id)
                .expect("menu entry exists");
            let angle = (360.0 / n as f64 * (i as f64 + 0.5)).to_radians();
            let r = RING_RADIUS * 0.6;
            let h = (level + 1) as f64 * LAYER_SPACING;
            self.push(InputEvent::PenHover {
                x: center.0 + r * angle.cos(),
                y: center.1 + r * angle.sin(),
                h,
            });
            node = node.children[i].clone();
        }
        self.click()
    }

    /// Drags the pointer to the trash bin while hovering low.
    pub fn hover_to_trash(&mut self) -> &mut Self {
        let (x, y) = TRASH_RECT.center();
        self.hover_at(x, y, 0.005)
    }

    pub fn gaze(&mut self, tab: Option<usize>) -> &mut Self {
        self.push(InputEvent::GazeAt { tab })
    }

    pub fn bezel_tap(&mut self) -> &mut Self {
        self.push(InputEvent::BezelTap)
    }

    pub fn tick(&mut self, dt: f64) -> &mut Self {
        self.push(InputEvent::Tick { dt })
    }

    pub fn key(&mut self, key: &str) -> &mut Self {
        self.push(InputEvent::Key {
            key: key.to_string(),
        })
    }

    /// One key event per character.
    pub fn type_text(&mut self, text: &str) -> &mut Self {
        for c in text.chars() {
            self.key(&c.to_string());
        }
        self
    }
}
