//! Writes the initial workbooks and event logs of the task fixtures.
//!
//! Usage: `cargo run -p gridlayers --example gen_task_fixtures -- fixtures/tasks`

use std::path::{Path, PathBuf};

use gridlayers::interaction::{Button, Gestures};
use gridlayers::scene::{arc_sector, ArcToggles, Toggle, Viewport};
use gridlayers::session::{write_log, Document, Inbound, DEFAULT_COLS, DEFAULT_ROWS};
use gridlayers::{CellAddress, Workbook};

fn base(extra: &[(&str, &str)]) -> Workbook {
    let mut wb = Workbook::new();
    for (cell, input) in [("A1", "1"), ("B1", "2"), ("B2", "3"), ("B3", "4")]
        .iter()
        .chain(extra)
    {
        wb.set_input(CellAddress::parse_a1(cell, 0).unwrap(), input)
            .unwrap();
    }
    wb
}

fn gestures() -> Gestures {
    Gestures::new(Viewport::new(0, DEFAULT_COLS, DEFAULT_ROWS))
}

fn arc_point(t: Toggle) -> (f64, f64) {
    let i = Toggle::ALL.iter().position(|x| *x == t).unwrap();
    let (a0, a1) = arc_sector(i);
    let mid = ((a0 + a1) / 2.0).to_radians();
    (1.0 + 0.13 * mid.cos(), 1.0 + 0.13 * mid.sin())
}

struct Task {
    file: &'static str,
    wb: Workbook,
    toggles: ArcToggles,
    events: Gestures,
}

fn tasks() -> Vec<Task> {
    let plain = ArcToggles::default();
    let mut out = Vec::new();

    let mut g = gestures();
    g.tap("A4")
        .click()
        .choose(&["Function", "SUM"])
        .tap("A1")
        .drag("B1", "B3")
        .click();
    out.push(Task {
        file: "cf",
        wb: base(&[]),
        toggles: plain,
        events: g,
    });

    let mut g = gestures();
    g.tap("B1")
        .button(Button::Primary, true)
        .tap("B3")
        .button(Button::Primary, false);
    g.hover("A4", 0.005)
        .button(Button::Secondary, true)
        .button(Button::Secondary, false);
    out.push(Task {
        file: "aic",
        wb: base(&[("A4", "=SUM(A1)")]),
        toggles: plain,
        events: g,
    });

    let mut g = gestures();
    g.drag("B1", "B3")
        .hover("A4", 0.005)
        .button(Button::Secondary, true)
        .button(Button::Secondary, false);
    out.push(Task {
        file: "ar",
        wb: base(&[("A4", "=SUM(A1)")]),
        toggles: plain,
        events: g,
    });

    let mut g = gestures();
    g.tap("A4")
        .hover("B2", 0.005)
        .button(Button::Secondary, true)
        .hover_to_trash()
        .button(Button::Secondary, false);
    out.push(Task {
        file: "rc",
        wb: base(&[("A4", "=SUM(A1,B1:B3)")]),
        toggles: plain,
        events: g,
    });

    let mut g = gestures();
    g.tap("A4").key("F2");
    for _ in 0.."B1:B3)".len() {
        g.key("Backspace");
    }
    g.type_text("B1,B3)").key("Enter");
    out.push(Task {
        file: "rc_text",
        wb: base(&[("A4", "=SUM(A1,B1:B3)")]),
        toggles: plain,
        events: g,
    });

    let mut g = gestures();
    let (x, y) = arc_point(Toggle::Dependencies);
    g.tap_at(x, y).tap("A4");
    g.tap("A5")
        .click()
        .choose(&["Function", "AVERAGE"])
        .tap("A1")
        .drag("B1", "B3")
        .click();
    out.push(Task {
        file: "re",
        wb: base(&[("A4", "=SUM(A1,B1:B3)")]),
        toggles: plain,
        events: g,
    });

    let mut g = gestures();
    g.drag("B1", "B3")
        .click()
        .choose(&["Chart", "Bar"])
        .drag("D2", "G5");
    out.push(Task {
        file: "ac",
        wb: base(&[]),
        toggles: plain,
        events: g,
    });

    let mut wb = base(&[]);
    let series =
        gridlayers::formula::RefSpec::range(CellAddress::new(0, 0, 1), CellAddress::new(0, 2, 1));
    wb.create_chart(series, CellAddress::new(0, 1, 3), 4, 4)
        .unwrap();
    let mut g = gestures();
    g.hover("D5", 0.01).button(Button::Primary, true);
    for i in 0..=8 {
        g.hover_at(0.3 + 0.04 * f64::from(i), 0.45 - 0.03 * f64::from(i), 0.01);
    }
    g.button(Button::Primary, false);
    out.push(Task {
        file: "at",
        wb,
        toggles: plain,
        events: g,
    });

    let sheets = || {
        let mut wb = Workbook::with_sheets(["Sheet1", "Sheet2"]).unwrap();
        wb.set_input(CellAddress::new(0, 0, 0), "1").unwrap();
        wb.set_input(CellAddress::new(0, 3, 0), "=SUM(A1)").unwrap();
        wb.set_input(CellAddress::new(1, 0, 5), "7").unwrap();
        wb
    };
    let mut with_sheets = plain;
    with_sheets.set(Toggle::Sheets, true);
    let mut g = gestures();
    g.tap_at(1.6, 0.05)
        .hover("A4", 0.005)
        .button(Button::Secondary, true)
        .button(Button::Secondary, false);
    out.push(Task {
        file: "ais",
        wb: sheets(),
        toggles: with_sheets,
        events: g,
    });

    let mut g = gestures();
    g.gaze(Some(1)).bezel_tap().tick(400.0).tap("F1");
    g.gaze(Some(0)).bezel_tap().tick(400.0);
    g.hover("A4", 0.005)
        .button(Button::Secondary, true)
        .button(Button::Secondary, false);
    out.push(Task {
        file: "ais_gaze",
        wb: sheets(),
        toggles: plain,
        events: g,
    });

    out
}

fn main() {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "fixtures/tasks".to_string()),
    );
    std::fs::create_dir_all(&dir).expect("create output directory");
    for task in tasks() {
        let write = |name: String, text: String| {
            let path: PathBuf = Path::new(&dir).join(name);
            std::fs::write(&path, text).expect("write fixture");
            println!("wrote {}", path.display());
        };
        write(
            format!("{}.initial.glw", task.file),
            Document::from_workbook(&task.wb, task.toggles).to_json(),
        );
        let messages: Vec<Inbound> = task
            .events
            .events()
            .iter()
            .cloned()
            .map(Inbound::event)
            .collect();
        write(format!("{}.glev", task.file), write_log(&messages));
    }
}
