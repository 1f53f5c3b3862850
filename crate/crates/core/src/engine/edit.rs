use crate::address::CellAddress;
use crate::formula::RefSpec;

/// Splits `range` into maximal rectangles covering every cell except
/// `victim`: full-width rows above, the victim row left and right of it,
/// then full-width rows below. Single cells come back as `Cell` refs.
///
/// Returns the range unchanged if it does not cover `victim`.
pub fn split_range(range: &RefSpec, victim: CellAddress) -> Vec<RefSpec> {
    let RefSpec::Range { start, end } = range else {
        return if range.covers(victim) {
            Vec::new()
        } else {
            vec![range.clone()]
        };
    };
    if !range.covers(victim) {
        return vec![range.clone()];
    }
    let at = |row: u32, col: u32| CellAddress::new(start.sheet, row, col);
    let mut pieces = Vec::with_capacity(4);
    let mut push = |r0: u32, c0: u32, r1: u32, c1: u32| {
        if r0 == r1 && c0 == c1 {
            pieces.push(RefSpec::Cell(at(r0, c0)));
        } else {
            pieces.push(RefSpec::range(at(r0, c0), at(r1, c1)));
        }
    };
    if victim.row > start.row {
        push(start.row, start.col, victim.row - 1, end.col);
    }
    if victim.col > start.col {
        push(victim.row, start.col, victim.row, victim.col - 1);
    }
    if victim.col < end.col {
        push(victim.row, victim.col + 1, victim.row, end.col);
    }
    if victim.row < end.row {
        push(victim.row + 1, start.col, end.row, end.col);
    }
    pieces
}
