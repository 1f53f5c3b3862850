//! A1-style cell addressing.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Highest supported column index (`ZZ`).
pub const MAX_COL: u32 = 701;

/// A cell on a specific sheet. Rows and columns are 0-based; rows render
/// 1-based and columns render as letters.
///
/// Ordering is sheet-major, then row-major, which is the order ranges expand in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellAddress {
    pub sheet: usize,
    pub row: u32,
    pub col: u32,
}

impl CellAddress {
    pub const fn new(sheet: usize, row: u32, col: u32) -> Self {
        Self { sheet, row, col }
    }

    /// Parses a bare `A1` address on the given sheet.
    pub fn parse_a1(text: &str, sheet: usize) -> Option<Self> {
        let (col, row, used) = scan_a1(text.as_bytes())?;
        (used == text.len()).then_some(Self { sheet, row, col })
    }

    /// The address without a sheet qualifier, e.g. `B3`.
    pub fn a1(&self) -> String {
        format!("{}{}", column_letters(self.col), self.row + 1)
    }

    pub fn with_sheet(self, sheet: usize) -> Self {
        Self { sheet, ..self }
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", column_letters(self.col), self.row + 1)
    }
}

/// Renders a 0-based column index as letters: 0 → `A`, 25 → `Z`, 26 → `AA`.
pub fn column_letters(col: u32) -> String {
    if col < 26 {
        char::from(b'A' + col as u8).to_string()
    } else {
        let hi = col / 26 - 1;
        let lo = col % 26;
        format!(
            "{}{}",
            char::from(b'A' + hi as u8),
            char::from(b'A' + lo as u8)
        )
    }
}

/// Inverse of [`column_letters`]; accepts one or two ASCII letters in either case.
pub fn column_index(letters: &str) -> Option<u32> {
    let bytes = letters.as_bytes();
    let val = |b: u8| {
        b.is_ascii_alphabetic()
            .then(|| (b.to_ascii_uppercase() - b'A') as u32)
    };
    match bytes {
        [a] => val(*a),
        [a, b] => Some((val(*a)? + 1) * 26 + val(*b)?),
        _ => None,
    }
}

/// Scans letters followed by digits at the start of `bytes`. Returns
/// `(col, row, consumed)`; rows must be ≥ 1 in the text.
pub(crate) fn scan_a1(bytes: &[u8]) -> Option<(u32, u32, usize)> {
    let letters = bytes.iter().take_while(|b| b.is_ascii_alphabetic()).count();
    if letters == 0 || letters > 2 {
        return None;
    }
    let digits = bytes[letters..]
        .iter()
        .take_while(|b| b.is_ascii_digit())
        .count();
    if digits == 0 || digits > 9 {
        return None;
    }
    let col = column_index(std::str::from_utf8(&bytes[..letters]).ok()?)?;
    let row: u32 = std::str::from_utf8(&bytes[letters..letters + digits])
        .ok()?
        .parse()
        .ok()?;
    if row == 0 {
        return None;
    }
    Some((col, row - 1, letters + digits))
}
