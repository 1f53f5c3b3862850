//! Hierarchical pie menus stacked in hover layers.

use serde::{Deserialize, Serialize};

use crate::chart::ChartKind;
use crate::formula::Function;
use crate::scene::{MenuEntryScene, MenuRing, MenuScene, LAYER_SPACING};

/// Ring radius as a fraction of the screen width.
pub const RING_RADIUS: f64 = 0.08;
/// Dead-zone radius as a fraction of the ring radius.
pub const DEAD_ZONE: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum MenuAction {
    Function(Function),
    Chart(ChartKind),
    Cluster,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuNode {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<MenuAction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<MenuNode>,
}

impl MenuNode {
    fn leaf(id: &str, action: MenuAction) -> Self {
        MenuNode {
            id: id.to_string(),
            label: id.to_string(),
            action: Some(action),
            children: Vec::new(),
        }
    }

    fn branch(id: &str, children: Vec<MenuNode>) -> Self {
        MenuNode {
            id: id.to_string(),
            label: id.to_string(),
            action: None,
            children,
        }
    }

    /// Number of ring levels below this node.
    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| 1 + c.depth())
            .max()
            .unwrap_or(0)
    }

    /// Node reached by following child indices.
    pub fn at(&self, path: &[usize]) -> Option<&MenuNode> {
        path.iter().try_fold(self, |node, i| node.children.get(*i))
    }

    /// Every leaf must carry an action and every branch must not.
    pub fn is_valid(&self) -> bool {
        if self.children.is_empty() {
            self.action.is_some()
        } else {
            self.action.is_none() && self.children.iter().all(MenuNode::is_valid)
        }
    }
}

/// `Function` (seven functions), `Chart` (`Bar`) and `Cluster`.
pub fn default_menu() -> MenuNode {
    let functions = Function::ALL
        .iter()
        .map(|f| MenuNode::leaf(f.name(), MenuAction::Function(*f)))
        .collect();
    MenuNode::branch(
        "root",
        vec![
            MenuNode::branch("Function", functions),
            MenuNode::branch(
                "Chart",
                vec![MenuNode::leaf("Bar", MenuAction::Chart(ChartKind::Bar))],
            ),
            MenuNode::leaf("Cluster", MenuAction::Cluster),
        ],
    )
}

/// Hover layer for a pen height: the nearest multiple of the layer spacing,
/// clamped to `0..=depth`.
pub fn menu_level_for_height(h: f64, depth: usize) -> usize {
    let level = (h / LAYER_SPACING + 0.5).floor();
    if level.is_nan() || level < 0.0 {
        0
    } else {
        (level as usize).min(depth)
    }
}

/// Sector index among `n` equal sectors starting at 0° and running with
/// increasing angle, or `None` inside the dead zone or outside the ring.
pub fn sector_at(n: usize, center: (f64, f64), radius: f64, x: f64, y: f64) -> Option<usize> {
    let (dx, dy) = (x - center.0, y - center.1);
    let r = dx.hypot(dy);
    if n == 0 || r < radius * DEAD_ZONE || r > radius || !r.is_finite() {
        return None;
    }
    let angle = dy.atan2(dx).to_degrees().rem_euclid(360.0);
    Some(((angle / (360.0 / n as f64)).floor() as usize).min(n - 1))
}

/// Angle range of sector `i` of `n`, in degrees.
pub fn sector_range(i: usize, n: usize) -> (f64, f64) {
    let step = 360.0 / n as f64;
    (step * i as f64, step * (i + 1) as f64)
}

/// An open pie menu: its tree, where it was opened, and the entries chosen
/// so far (one child index per level).
#[derive(Clone, Debug, PartialEq)]
pub struct OpenMenu {
    pub tree: MenuNode,
    pub center: (f64, f64),
    pub path: Vec<usize>,
    /// Set once the pen has reached level 1.
    pub raised: bool,
}

impl OpenMenu {
    pub fn new(tree: MenuNode, center: (f64, f64)) -> Self {
        OpenMenu {
            tree,
            center,
            path: Vec::new(),
            raised: false,
        }
    }

    /// Rings currently reachable: one past the chosen path, within the tree.
    pub fn open_depth(&self) -> usize {
        (self.path.len() + 1).min(self.tree.depth())
    }

    /// Entry of ring `level` (1-based) under the pointer.
    pub fn entry_at(&self, level: usize, x: f64, y: f64) -> Option<usize> {
        if level == 0 || level > self.path.len() + 1 {
            return None;
        }
        let parent = self.tree.at(&self.path[..level - 1])?;
        sector_at(parent.children.len(), self.center, RING_RADIUS, x, y)
    }

    /// Updates the path for the pointer at height `h`. Returns the level.
    pub fn hover(&mut self, x: f64, y: f64, h: f64) -> usize {
        let level = menu_level_for_height(h, self.open_depth());
        if level == 0 {
            self.path.clear();
            return 0;
        }
        self.raised = true;
        self.path.truncate(level - 1);
        if let Some(i) = self.entry_at(level, x, y) {
            self.path.push(i);
        }
        level
    }

    pub fn selected(&self) -> Option<&MenuNode> {
        if self.path.is_empty() {
            None
        } else {
            self.tree.at(&self.path)
        }
    }

    pub fn scene(&self) -> MenuScene {
        let mut rings = Vec::new();
        for level in 1..=self.path.len() + 1 {
            let Some(parent) = self.tree.at(&self.path[..level - 1]) else {
                break;
            };
            if parent.children.is_empty() {
                break;
            }
            let n = parent.children.len();
            let entries = parent
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let (start_deg, end_deg) = sector_range(i, n);
                    MenuEntryScene {
                        id: c.id.clone(),
                        label: c.label.clone(),
                        start_deg,
                        end_deg,
                        highlighted: self.path.get(level - 1) == Some(&i),
                    }
                })
                .collect();
            rings.push(MenuRing {
                level,
                height: level as f64 * LAYER_SPACING,
                entries,
            });
        }
        MenuScene {
            center: self.center,
            radius: RING_RADIUS,
            dead_zone: RING_RADIUS * DEAD_ZONE,
            rings,
        }
    }
}
