//! Cluster-cells: named groups of cells anchored to one grid cell and shown
//! on an overlay level above the grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::edit::split_range;
use super::{EngineError, RecalcResult, Workbook};
use crate::address::CellAddress;
use crate::formula::{Expr, RefSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cluster#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterCell {
    pub id: ClusterId,
    pub label: String,
    pub anchor: CellAddress,
    /// Overlay level, 1 = first layer above the grid.
    pub level: u32,
    pub members: Vec<RefSpec>,
}

pub fn is_valid_label(label: &str) -> bool {
    let mut chars = label.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Workbook {
    pub fn clusters(&self) -> impl Iterator<Item = &ClusterCell> {
        self.clusters.values()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&ClusterCell> {
        self.clusters.get(&id)
    }

    pub fn cluster_by_label(&self, label: &str) -> Option<&ClusterCell> {
        self.clusters.values().find(|c| c.label == label)
    }

    /// The cluster anchored at `addr`, if any.
    pub fn cluster_at(&self, addr: CellAddress) -> Option<&ClusterCell> {
        self.clusters.values().find(|c| c.anchor == addr)
    }

    /// Leaf cells of a cluster, expanded recursively in member order with
    /// duplicates kept. A plain cell member that anchors a lower-level
    /// cluster expands to that cluster.
    pub fn flatten(&self, cluster: &ClusterCell) -> Vec<CellAddress> {
        let mut out = Vec::new();
        self.flatten_into(cluster, &mut out);
        out
    }

    fn flatten_into(&self, cluster: &ClusterCell, out: &mut Vec<CellAddress>) {
        for m in &cluster.members {
            match m {
                RefSpec::Cell(a) => match self.cluster_at(*a) {
                    Some(inner) if inner.level < cluster.level => self.flatten_into(inner, out),
                    _ => out.push(*a),
                },
                RefSpec::Range { .. } => out.extend(m.cells()),
                RefSpec::Cluster(label) => {
                    if let Some(inner) = self.cluster_by_label(label) {
                        if inner.level < cluster.level {
                            self.flatten_into(inner, out);
                        }
                    }
                }
            }
        }
    }

    /// Level of the cluster a member ref designates, if it designates one.
    fn member_cluster_level(&self, member: &RefSpec) -> Result<Option<(u32, &str)>, EngineError> {
        match member {
            RefSpec::Cluster(label) => self
                .cluster_by_label(label)
                .map(|c| Some((c.level, c.label.as_str())))
                .ok_or_else(|| EngineError::UnknownCluster(label.clone())),
            RefSpec::Cell(a) => {
                self.check_sheet(a.sheet)?;
                Ok(self.cluster_at(*a).map(|c| (c.level, c.label.as_str())))
            }
            RefSpec::Range { start, .. } => {
                self.check_sheet(start.sheet)?;
                Ok(None)
            }
        }
    }

    fn check_members(
        &self,
        label: &str,
        level: u32,
        members: &[RefSpec],
    ) -> Result<(), EngineError> {
        for m in members {
            if let RefSpec::Cluster(l) = m {
                if l == label {
                    return Err(EngineError::LevelViolation {
                        member: l.clone(),
                        level,
                        member_level: level,
                    });
                }
            }
            if let Some((member_level, member_label)) = self.member_cluster_level(m)? {
                if member_level >= level || member_label == label {
                    return Err(EngineError::LevelViolation {
                        member: member_label.to_string(),
                        level,
                        member_level,
                    });
                }
            }
        }
        Ok(())
    }

    /// Registers a new cluster-cell. The anchor must be an empty cell that
    /// no other cluster uses.
    pub fn define_cluster(
        &mut self,
        label: &str,
        anchor: CellAddress,
        level: u32,
        members: Vec<RefSpec>,
    ) -> Result<ClusterCell, EngineError> {
        if !is_valid_label(label) {
            return Err(EngineError::InvalidLabel(label.to_string()));
        }
        if self.cluster_by_label(label).is_some() {
            return Err(EngineError::DuplicateLabel(label.to_string()));
        }
        if level == 0 {
            return Err(EngineError::LevelViolation {
                member: label.to_string(),
                level,
                member_level: 0,
            });
        }
        self.check_members(label, level, &members)?;
        self.check_sheet(anchor.sheet)?;
        if self.cluster_at(anchor).is_some() || !self.content(anchor).is_empty() {
            return Err(EngineError::BadAnchor(anchor));
        }
        let id = ClusterId(self.next_cluster_id);
        self.next_cluster_id += 1;
        let cluster = ClusterCell {
            id,
            label: label.to_string(),
            anchor,
            level,
            members,
        };
        self.clusters.insert(id, cluster.clone());
        self.commit_structure_change();
        Ok(cluster)
    }

    /// Adds and removes members. Removing a cell that lies inside a range
    /// member splits that range around it.
    pub fn modify_cluster(
        &mut self,
        id: ClusterId,
        add: &[RefSpec],
        remove: &[RefSpec],
    ) -> Result<RecalcResult, EngineError> {
        let cluster = self
            .clusters
            .get(&id)
            .ok_or(EngineError::NoSuchCluster(id))?;
        if add.is_empty() && remove.is_empty() {
            return Ok(RecalcResult::default());
        }
        let mut members = cluster.members.clone();
        for r in remove {
            remove_member(&mut members, r, |a| {
                self.cluster_at(a).map(|c| c.label.clone())
            })?;
        }
        self.check_members(&cluster.label, cluster.level, add)?;
        members.extend(add.iter().cloned());
        self.clusters.get_mut(&id).expect("checked above").members = members;
        Ok(self.commit_structure_change())
    }

    /// Renames a cluster and rewrites every `@label` reference to it.
    pub fn rename_cluster(
        &mut self,
        id: ClusterId,
        label: &str,
    ) -> Result<RecalcResult, EngineError> {
        let old = self
            .clusters
            .get(&id)
            .ok_or(EngineError::NoSuchCluster(id))?
            .label
            .clone();
        if old == label {
            return Ok(RecalcResult::default());
        }
        if !is_valid_label(label) {
            return Err(EngineError::InvalidLabel(label.to_string()));
        }
        if self.cluster_by_label(label).is_some() {
            return Err(EngineError::DuplicateLabel(label.to_string()));
        }
        for c in self.clusters.values_mut() {
            for m in &mut c.members {
                rename_ref(m, &old, label);
            }
            if c.id == id {
                c.label = label.to_string();
            }
        }
        for content in self.cells.values_mut() {
            if let super::CellContent::Formula { ast, .. } = content {
                rename_in_expr(ast, &old, label);
            }
        }
        for chart in &mut self.charts {
            rename_ref(&mut chart.series, &old, label);
        }
        Ok(self.commit_structure_change())
    }

    /// Deletes a cluster, freeing its anchor. Fails while another cluster
    /// lists it as a member.
    pub fn delete_cluster(&mut self, id: ClusterId) -> Result<RecalcResult, EngineError> {
        let cluster = self
            .clusters
            .get(&id)
            .ok_or(EngineError::NoSuchCluster(id))?;
        let used_by = self.clusters.values().find(|c| {
            c.members.iter().any(|m| match m {
                RefSpec::Cluster(l) => *l == cluster.label,
                RefSpec::Cell(a) => *a == cluster.anchor && c.level > cluster.level,
                RefSpec::Range { .. } => false,
            })
        });
        if let Some(user) = used_by {
            return Err(EngineError::ClusterInUse {
                cluster: cluster.label.clone(),
                user: user.label.clone(),
            });
        }
        self.clusters.remove(&id);
        Ok(self.commit_structure_change())
    }
}

fn remove_member(
    members: &mut Vec<RefSpec>,
    victim: &RefSpec,
    anchored_label: impl Fn(CellAddress) -> Option<String>,
) -> Result<(), EngineError> {
    if let Some(i) = members.iter().position(|m| m == victim) {
        members.remove(i);
        return Ok(());
    }
    if let RefSpec::Cell(v) = victim {
        if let Some(label) = anchored_label(*v) {
            if let Some(i) = members
                .iter()
                .position(|m| *m == RefSpec::Cluster(label.clone()))
            {
                members.remove(i);
                return Ok(());
            }
        }
        if let Some(i) = members
            .iter()
            .position(|m| matches!(m, RefSpec::Range { .. }) && m.covers(*v))
        {
            let pieces = split_range(&members[i], *v);
            members.splice(i..=i, pieces);
            return Ok(());
        }
    }
    Err(EngineError::NotAMember(victim.clone()))
}

fn rename_ref(r: &mut RefSpec, old: &str, new: &str) {
    if let RefSpec::Cluster(l) = r {
        if l == old {
            *l = new.to_string();
        }
    }
}

fn rename_in_expr(e: &mut Expr, old: &str, new: &str) {
    match e {
        Expr::Ref(r) => rename_ref(r, old, new),
        Expr::Call { args, .. } => args.iter_mut().for_each(|a| rename_in_expr(a, old, new)),
        Expr::Binary { left, right, .. } => {
            rename_in_expr(left, old, new);
            rename_in_expr(right, old, new);
        }
        Expr::Neg(child) => rename_in_expr(child, old, new),
        Expr::Number(_) | Expr::Text(_) => {}
    }
}
