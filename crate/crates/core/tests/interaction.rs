use gridlayers::interaction::{
    map_in_air, trash_drop, Driver, Effect, EngineMutation, Gestures, InputEvent, Mode,
    TrashPayload,
};
use gridlayers::scene::{SceneError, Toggle, ViewMode, Viewport, TRASH_RECT};
use gridlayers::{CellAddress, Value, Workbook};

fn a(s: &str) -> CellAddress {
    CellAddress::parse_a1(s, 0).unwrap()
}

fn seeded() -> Workbook {
    let mut wb = Workbook::new();
    for (cell, v) in [("A1", "1"), ("B1", "2"), ("B2", "3"), ("B3", "4")] {
        wb.set_input(a(cell), v).unwrap();
    }
    wb
}

fn vp() -> Viewport {
    Viewport::new(0, 10, 10)
}

fn run(driver: &mut Driver, events: &[InputEvent]) -> Vec<Effect> {
    events.iter().flat_map(|e| driver.handle(e)).collect()
}

fn mutations(effects: &[Effect]) -> Vec<EngineMutation> {
    effects
        .iter()
        .filter_map(|e| e.mutation().cloned())
        .collect()
}

#[test]
fn function_to_source_workflow() {
    let mut d = Driver::new(seeded(), vp());
    let mut g = Gestures::new(vp());
    g.tap("A4")
        .click()
        .choose(&["Function", "SUM"])
        .tap("A1")
        .drag("B1", "B3")
        .click();
    let effects = run(&mut d, g.events());
    assert_eq!(
        mutations(&effects),
        vec![EngineMutation::SetCell {
            cell: a("A4"),
            input: "=SUM(A1,B1:B3)".into()
        }]
    );
    assert_eq!(d.wb.get_value(a("A4")), Value::Num(10.0));
    assert_eq!(d.state.mode, Mode::Idle);
}

#[test]
fn source_to_function_workflow() {
    let mut d = Driver::new(seeded(), vp());
    let mut g = Gestures::new(vp());
    g.tap("A1");
    g.button(gridlayers::interaction::Button::Primary, true);
    g.drag("B1", "B3");
    g.button(gridlayers::interaction::Button::Primary, false);
    g.click().choose(&["Function", "SUM"]);
    run(&mut d, g.events());
    assert!(matches!(d.state.mode, Mode::PlacingFunction { .. }));
    assert!(!d.state.buffer.is_empty());
    run(&mut d, Gestures::new(vp()).tap("A4").events());
    assert_eq!(
        d.wb.formula_text(a("A4")).as_deref(),
        Some("=SUM(A1,B1:B3)")
    );
}

#[test]
fn gaze_and_bezel_tap_slides_to_sheet() {
    let wb = Workbook::with_sheets(["S1", "S2", "S3"]).unwrap();
    let mut d = Driver::new(wb, vp());
    let effects = run(
        &mut d,
        &[InputEvent::GazeAt { tab: Some(2) }, InputEvent::BezelTap],
    );
    assert!(effects.iter().any(|e| matches!(
        e,
        Effect::Viewport {
            command: gridlayers::interaction::ViewportCommand::SlideToSheet { from: 0, to: 2, .. }
        }
    )));
    assert_eq!(d.state.viewport.sheet, 2);

    // Events arriving mid-slide wait for the slide to finish.
    let tap = Gestures::new(vp()).tap("A1").events().to_vec();
    run(&mut d, &tap);
    assert_eq!(d.state.queued.len(), 2);
    run(&mut d, &[InputEvent::Tick { dt: 400.0 }]);
    assert!(d.state.queued.is_empty());
    assert_eq!(d.state.cursor, Some(CellAddress::new(2, 0, 0)));
}

#[test]
fn bezel_tap_without_gaze_is_a_noop() {
    let wb = Workbook::with_sheets(["S1", "S2"]).unwrap();
    let mut d = Driver::new(wb, vp());
    let effects = run(
        &mut d,
        &[InputEvent::GazeAt { tab: None }, InputEvent::BezelTap],
    );
    assert!(effects
        .iter()
        .all(|e| !matches!(e, Effect::Viewport { .. } | Effect::Mutation { .. })));
    assert_eq!(d.state.viewport.sheet, 0);
}

#[test]
fn lowering_the_pen_retracts_the_menu() {
    let mut d = Driver::new(seeded(), vp());
    let mut g = Gestures::new(vp());
    g.tap("A4").click();
    let (x, y) = g.point("A4");
    g.hover_at(x + 0.02, y + 0.02, 0.025)
        .hover_at(x + 0.02, y + 0.02, 0.0);
    let effects = run(&mut d, g.events());
    assert!(mutations(&effects).is_empty());
    assert_eq!(d.state.mode, Mode::Idle);
}

#[test]
fn in_air_mapping() {
    let v = vp();
    assert_eq!(
        map_in_air(1.5, 0.05, &v, 2, 0.0),
        Ok((1, CellAddress::new(1, 0, 5)))
    );
    assert_eq!(
        map_in_air(0.5, 0.05, &v, 2, 0.0),
        Ok((0, CellAddress::new(0, 0, 5)))
    );
    assert_eq!(map_in_air(-0.2, 0.05, &v, 2, 0.0), Err(SceneError::NoSheet));
    assert_eq!(map_in_air(2.7, 0.05, &v, 2, 0.0), Err(SceneError::NoSheet));
}

#[test]
fn in_air_pick_adds_neighbor_cell_to_function() {
    let mut wb = Workbook::with_sheets(["S1", "S2"]).unwrap();
    wb.set_input(CellAddress::new(1, 0, 5), "7").unwrap();
    wb.set_input(a("A1"), "1").unwrap();
    let mut d = Driver::new(wb, vp());
    d.set_toggle(Toggle::Sheets, true);
    let mut g = Gestures::new(vp());
    g.tap("A4")
        .click()
        .choose(&["Function", "SUM"])
        .tap("A1")
        .tap_at(1.0 + 0.05 + 0.55, 0.05)
        .click();
    run(&mut d, g.events());
    assert_eq!(
        d.wb.formula_text(a("A4")).as_deref(),
        Some("=SUM(A1,S2!F1)")
    );
    assert_eq!(d.wb.get_value(a("A4")), Value::Num(8.0));
}

#[test]
fn trash_drop_inside_and_outside_the_bin() {
    let payload = TrashPayload::Source {
        cell: a("A4"),
        victim: a("B2"),
    };
    let inside = TRASH_RECT.center();
    assert_eq!(
        trash_drop(&payload, inside),
        vec![Effect::Mutation {
            mutation: EngineMutation::RemoveSource {
                cell: a("A4"),
                victim: a("B2")
            }
        }]
    );
    assert!(trash_drop(&payload, (0.5, 0.5))
        .iter()
        .all(|e| e.mutation().is_none()));
    let member = TrashPayload::Member {
        label: "costs".into(),
        victim: a("B2"),
    };
    assert!(matches!(
        trash_drop(&member, inside).as_slice(),
        [Effect::Mutation {
            mutation: EngineMutation::ModifyCluster { .. }
        }]
    ));
}

#[test]
fn remove_source_via_trash() {
    let mut wb = seeded();
    wb.set_input(a("A4"), "=SUM(A1,B1:B3)").unwrap();
    let mut d = Driver::new(wb, vp());
    let mut g = Gestures::new(vp());
    g.tap("A4").hover("B2", 0.005);
    g.button(gridlayers::interaction::Button::Secondary, true);
    g.hover_to_trash();
    g.button(gridlayers::interaction::Button::Secondary, false);
    run(&mut d, g.events());
    assert_eq!(
        d.wb.formula_text(a("A4")).as_deref(),
        Some("=SUM(A1,B1,B3)")
    );
    assert_eq!(d.wb.get_value(a("A4")), Value::Num(7.0));
}

#[test]
fn cluster_creation_with_label() {
    let mut d = Driver::new(seeded(), vp());
    let mut g = Gestures::new(vp());
    g.drag("B1", "B3").hover("B2", 0.025);
    g.button(gridlayers::interaction::Button::Secondary, true);
    g.button(gridlayers::interaction::Button::Secondary, false);
    let effects = run(&mut d, g.events());
    assert!(effects
        .iter()
        .any(|e| matches!(e, Effect::LabelPrompt { .. })));
    d.set_label("costs").unwrap();
    let c = d.wb.cluster_by_label("costs").unwrap();
    assert_eq!(c.anchor, a("C1"));
    assert_eq!(c.level, 1);
    assert_eq!(d.wb.get_value(a("C1")), Value::Num(9.0));
}

#[test]
fn text_reference_flow() {
    let mut d = Driver::new(seeded(), vp());
    let mut g = Gestures::new(vp());
    g.tap("A4")
        .type_text("=SUM(")
        .tap("A1")
        .type_text(",")
        .drag("B1", "B3")
        .type_text(")")
        .key("Enter");
    run(&mut d, g.events());
    assert_eq!(
        d.wb.formula_text(a("A4")).as_deref(),
        Some("=SUM(A1,B1:B3)")
    );
}

#[test]
fn fixed_mode_margin_is_read_only() {
    let mut d = Driver::new(seeded(), vp());
    d.set_view_mode(ViewMode::Fixed);
    let effects = run(
        &mut d,
        &[
            InputEvent::PenDown { x: 1.2, y: 0.1 },
            InputEvent::PenUp { x: 1.2, y: 0.1 },
        ],
    );
    assert!(effects
        .iter()
        .any(|e| matches!(e, Effect::Diagnostic { .. })));
    assert!(d.state.buffer.is_empty());
}

#[test]
fn margin_pick_slides_in_aligned_mode() {
    let mut d = Driver::new(seeded(), vp());
    let effects = run(
        &mut d,
        &[
            InputEvent::PenDown { x: 1.25, y: 0.05 },
            InputEvent::PenUp { x: 1.25, y: 0.05 },
        ],
    );
    assert!(effects.iter().any(|e| matches!(e, Effect::Viewport { .. })));
    assert_eq!(d.state.viewport.origin, a("K1"));
    assert_eq!(d.state.cursor, Some(a("M1")));
}

#[test]
fn arc_menu_toggles() {
    let mut d = Driver::new(seeded(), vp());
    let (s0, s1) = gridlayers::scene::arc_sector(1);
    let mid = ((s0 + s1) / 2.0).to_radians();
    let (x, y) = (1.0 + 0.13 * mid.cos(), 1.0 + 0.13 * mid.sin());
    let effects = run(
        &mut d,
        &[InputEvent::PenDown { x, y }, InputEvent::PenUp { x, y }],
    );
    assert_eq!(effects, vec![Effect::SceneDirty]);
    assert!(d.state.toggles.dependencies);
}

#[test]
fn chart_and_stroke_trend() {
    let mut wb = seeded();
    wb.set_input(a("B4"), "9").unwrap();
    let mut d = Driver::new(wb, vp());
    let mut g = Gestures::new(vp());
    g.drag("B1", "B4")
        .click()
        .choose(&["Chart", "Bar"])
        .drag("D2", "G5");
    run(&mut d, g.events());
    let chart = d.wb.charts().first().cloned().expect("chart created");
    assert_eq!((chart.anchor, chart.width, chart.height), (a("D2"), 4, 4));

    let mut g = Gestures::new(vp());
    g.hover("D5", 0.01);
    g.button(gridlayers::interaction::Button::Primary, true);
    for i in 0..=8 {
        let x = 0.3 + 0.04 * f64::from(i);
        g.hover_at(x, 0.45 - 0.03 * f64::from(i), 0.01);
    }
    g.button(gridlayers::interaction::Button::Primary, false);
    run(&mut d, g.events());
    let trend = d.wb.charts()[0].trend.clone().expect("trend set");
    assert_eq!(trend.kind, gridlayers::chart::TrendKind::Linear);
    assert_eq!(trend.coeffs.len(), 2);
}
