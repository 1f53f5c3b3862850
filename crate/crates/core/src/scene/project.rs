use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::engine::{CellContent, Value, Workbook};
use crate::formula::{Expr, Function};

/// Empty cells inside the used bounding box of `sheet`.
pub fn used_mask(wb: &Workbook, sheet: usize) -> BTreeSet<CellAddress> {
    let Some(region) = used_region(wb, sheet) else {
        return BTreeSet::new();
    };
    region.cells().filter(|a| is_unused(wb, *a)).collect()
}

fn is_unused(wb: &Workbook, a: CellAddress) -> bool {
    wb.content(a).is_empty() && wb.cluster_at(a).is_none()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackLayer {
    pub function: Function,
    pub value: Value,
    pub height: f64,
}

/// One layer per function on the deepest nesting path, outermost lowest.
/// The lowest layer carries the cell's value; higher layers carry their
/// sub-call evaluated on its own.
pub fn nested_stack(wb: &Workbook, addr: CellAddress) -> Result<Vec<StackLayer>, SceneError> {
    let ast = wb
        .content(addr)
        .ast()
        .ok_or(SceneError::NotAFunction(addr))?;
    let calls = ast.deepest_calls();
    if calls.is_empty() {
        return Err(SceneError::NotAFunction(addr));
    }
    Ok(calls
        .into_iter()
        .enumerate()
        .map(|(i, call)| {
            let Expr::Call { func, .. } = call else {
                unreachable!("deepest_calls yields calls")
            };
            let value = if i == 0 {
                wb.get_value(addr)
            } else {
                wb.evaluate(call)
            };
            StackLayer {
                function: *func,
                value,
                height: (i + 1) as f64 * LAYER_SPACING,
            }
        })
        .collect())
}

fn display_text(wb: &Workbook, a: CellAddress) -> String {
    match wb.content(a) {
        CellContent::Text(s) => s.clone(),
        _ => wb.get_value(a).to_string(),
    }
}

fn highlighted_cells(wb: &Workbook, inputs: &SceneInputs) -> BTreeSet<CellAddress> {
    let mut out: BTreeSet<CellAddress> = inputs.cursor.into_iter().collect();
    for r in &inputs.selection {
        match r {
            RefSpec::Cluster(label) => out.extend(wb.cluster_by_label(label).map(|c| c.anchor)),
            other => out.extend(other.cells()),
        }
    }
    out
}

fn grid_cell(
    wb: &Workbook,
    vp: &Viewport,
    a: CellAddress,
    masked: bool,
    highlighted: bool,
) -> GridCell {
    GridCell {
        addr: a,
        name: a.a1(),
        text: display_text(wb, a),
        rect: vp.cell_rect(a),
        masked,
        highlighted,
        anchor: wb.cluster_at(a).is_some(),
    }
}

fn grid(
    wb: &Workbook,
    vp: &Viewport,
    toggles: &ArcToggles,
    highlighted: &BTreeSet<CellAddress>,
) -> Vec<GridCell> {
    let mask = if toggles.mask {
        used_mask(wb, vp.sheet)
    } else {
        BTreeSet::new()
    };
    let mut addrs: BTreeSet<CellAddress> = wb.sheet_cells(vp.sheet).map(|(a, _)| a).collect();
    addrs.extend(wb.clusters().map(|c| c.anchor));
    addrs.extend(mask.iter().copied());
    addrs.extend(highlighted.iter().copied());
    addrs
        .into_iter()
        .filter(|a| vp.in_canvas(*a))
        .map(|a| grid_cell(wb, vp, a, mask.contains(&a), highlighted.contains(&a)))
        .collect()
}

fn center3(vp: &Viewport, a: CellAddress, z: f64) -> Point3 {
    let (x, y) = vp.cell_rect(a).center();
    Point3 { x, y, z }
}

fn level_height(level: usize) -> f64 {
    level as f64 * LAYER_SPACING
}

fn dependency_links(
    wb: &Workbook,
    vp: &Viewport,
    inputs: &SceneInputs,
    focus: CellAddress,
) -> Vec<Link> {
    let depth = inputs.link_depth.clamp(1, MAX_LEVELS as usize);
    let mut links = Vec::new();
    for (i, edges) in wb.precedents_closure(focus, depth).into_iter().enumerate() {
        let level = i + 1;
        for (from, to) in edges {
            if inputs.hidden_links.contains(&from) {
                continue;
            }
            links.push(Link {
                kind: LinkKind::Dependency,
                level,
                from_cell: from,
                to_cell: to,
                from: center3(vp, from, level_height(depth - level + 1)),
                to: center3(vp, to, level_height(depth - level)),
            });
        }
    }
    links
}

fn member_links(wb: &Workbook, vp: &Viewport) -> Vec<Link> {
    let mut links = Vec::new();
    for c in wb.clusters().filter(|c| c.anchor.sheet == vp.sheet) {
        let from = center3(vp, c.anchor, level_height(c.level as usize));
        let mut push = |to_cell: CellAddress, z: f64| {
            links.push(Link {
                kind: LinkKind::Member,
                level: c.level as usize,
                from_cell: c.anchor,
                to_cell,
                from,
                to: center3(vp, to_cell, z),
            })
        };
        for m in &c.members {
            match m {
                RefSpec::Cluster(label) => {
                    if let Some(inner) = wb.cluster_by_label(label) {
                        push(inner.anchor, level_height(inner.level as usize));
                    }
                }
                RefSpec::Cell(a) => {
                    let z = wb
                        .cluster_at(*a)
                        .map_or(0.0, |inner| level_height(inner.level as usize));
                    push(*a, z);
                }
                RefSpec::Range { .. } => m.cells().into_iter().for_each(|a| push(a, 0.0)),
            }
        }
    }
    links
}

fn cluster_layers(wb: &Workbook, vp: &Viewport) -> Vec<OverlayLayer> {
    let mut by_level: BTreeMap<u32, BTreeMap<CellAddress, &crate::engine::ClusterCell>> =
        BTreeMap::new();
    for c in wb.clusters().filter(|c| c.anchor.sheet == vp.sheet) {
        by_level.entry(c.level).or_default().insert(c.anchor, c);
    }
    by_level
        .into_iter()
        .map(|(level, anchors)| OverlayLayer {
            kind: LayerKind::Cluster,
            level,
            height: level_height(level as usize),
            cells: vp
                .screen_cells()
                .map(|a| match anchors.get(&a) {
                    Some(c) => OverlayCell {
                        anchor: a,
                        label: c.label.clone(),
                        value: wb.get_value(a).to_string(),
                        transparent: false,
                    },
                    None => OverlayCell {
                        anchor: a,
                        label: String::new(),
                        value: String::new(),
                        transparent: true,
                    },
                })
                .collect(),
        })
        .collect()
}

fn stack_layers(wb: &Workbook, cursor: CellAddress) -> Vec<OverlayLayer> {
    nested_stack(wb, cursor)
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(i, layer)| OverlayLayer {
            kind: LayerKind::Stack,
            level: i as u32 + 1,
            height: layer.height,
            cells: vec![OverlayCell {
                anchor: cursor,
                label: layer.function.name().to_string(),
                value: layer.value.to_string(),
                transparent: false,
            }],
        })
        .collect()
}

fn neighbors(wb: &Workbook, vp: &Viewport) -> Vec<NeighborSheet> {
    let mut out = Vec::new();
    for (sheet, sign) in [(vp.sheet.checked_sub(1), -1.0), (Some(vp.sheet + 1), 1.0)] {
        let Some(sheet) = sheet.filter(|s| *s < wb.sheet_count()) else {
            continue;
        };
        let other = Viewport {
            sheet,
            origin: vp.origin.with_sheet(sheet),
            ..vp.clone()
        };
        let cells = wb
            .sheet_cells(sheet)
            .map(|(a, _)| a)
            .filter(|a| other.is_visible(*a))
            .map(|a| grid_cell(wb, &other, a, false, false))
            .collect();
        out.push(NeighborSheet {
            sheet,
            offset: sign * (1.0 + TAB_GAP),
            cells,
        });
    }
    out
}

fn charts(wb: &Workbook, vp: &Viewport) -> Vec<ChartScene> {
    wb.charts()
        .iter()
        .filter(|c| c.anchor.sheet == vp.sheet)
        .map(|c| {
            let r = vp.cell_rect(c.anchor);
            ChartScene {
                id: c.id,
                anchor: c.anchor,
                width: c.width,
                height: c.height,
                rect: Rect {
                    x: r.x,
                    y: r.y,
                    w: r.w * f64::from(c.width),
                    h: r.h * f64::from(c.height),
                },
                bars: wb.chart_bars(c),
                trend: c.trend.clone(),
            }
        })
        .collect()
}

/// Builds the frame for the current state. Layers, links, overview and
/// neighbor sheets appear only when their toggle is on.
pub fn project(
    wb: &Workbook,
    vp: &Viewport,
    inputs: &SceneInputs,
    toggles: &ArcToggles,
) -> SceneFrame {
    let highlighted = highlighted_cells(wb, inputs);
    let (from, to, phase) = match inputs.tab_slide {
        Some(s) => (s.from, s.to, s.phase),
        None => (vp.sheet, vp.sheet, 0.0),
    };
    let tabs = tab_geometry(wb.sheet_count(), from, to, phase, 1.0, TAB_GAP)
        .into_iter()
        .map(|(sheet, offset)| TabScene {
            sheet,
            name: wb.sheet_names()[sheet].clone(),
            offset,
            highlighted: inputs.gazed_tab == Some(sheet),
        })
        .collect();

    let mut layers = Vec::new();
    if toggles.clusters {
        layers.extend(cluster_layers(wb, vp));
    }
    if toggles.functions {
        if let Some(cursor) = inputs.cursor {
            layers.extend(stack_layers(wb, cursor));
        }
    }

    let mut links = Vec::new();
    let mut link_buttons = Vec::new();
    if toggles.dependencies {
        if let Some(focus) = inputs.focus.filter(|f| wb.content(*f).ast().is_some()) {
            links.extend(dependency_links(wb, vp, inputs, focus));
            let mut fn_cells: BTreeSet<CellAddress> = BTreeSet::from([focus]);
            for level in
                wb.precedents_closure(focus, inputs.link_depth.clamp(1, MAX_LEVELS as usize))
            {
                fn_cells.extend(level.into_iter().map(|(from, _)| from));
            }
            link_buttons = fn_cells
                .into_iter()
                .map(|cell| LinkButton {
                    cell,
                    on: !inputs.hidden_links.contains(&cell),
                })
                .collect();
        }
    }
    if toggles.clusters {
        links.extend(member_links(wb, vp));
    }

    let arc = Toggle::ALL
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let (start_deg, end_deg) = arc_sector(i);
            ArcEntry {
                key: t.key().to_string(),
                on: toggles.get(t),
                start_deg,
                end_deg,
            }
        })
        .collect();

    let offset = (
        (f64::from(vp.origin.col) - f64::from(vp.display_origin.col)) / f64::from(vp.cols),
        (f64::from(vp.origin.row) - f64::from(vp.display_origin.row)) / f64::from(vp.rows),
    );
    SceneFrame {
        revision: wb.revision(),
        mode: inputs.mode.clone(),
        viewport: vp.clone(),
        placement: Placement {
            mode: vp.mode,
            tilt_deg: if vp.mode == ViewMode::Vertical {
                90.0
            } else {
                0.0
            },
            offset,
        },
        grid: grid(wb, vp, toggles, &highlighted),
        tabs,
        layers,
        links,
        overview: toggles.overview.then(|| overview(wb, vp)),
        menu: inputs.menu.clone(),
        widgets: Widgets {
            trash: TRASH_RECT,
            arc,
            link_buttons,
        },
        charts: charts(wb, vp),
        neighbors: if toggles.sheets {
            neighbors(wb, vp)
        } else {
            Vec::new()
        },
        slide: inputs.slide.clone(),
        label_prompt: inputs.label_prompt.clone(),
    }
}
