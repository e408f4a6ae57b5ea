//! Built-in 12x8 digit bitmaps, parsed from `data/font.txt`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::raster::BinaryImage;

pub const FONT_ROWS: usize = 12;
pub const FONT_COLS: usize = 8;

const FONT_SOURCE: &str = include_str!("../../data/font.txt");

fn parse_font(src: &str) -> Vec<BinaryImage> {
    let mut glyphs: Vec<Option<Vec<&str>>> = vec![None; 10];
    let mut current: Option<usize> = None;
    for line in src.lines().map(str::trim) {
        if let Some(rest) = line.strip_prefix("# digit ") {
            let d: usize = rest.trim().parse().expect("font: digit header");
            assert!(d < 10 && glyphs[d].is_none(), "font: bad or repeated digit {d}");
            glyphs[d] = Some(Vec::new());
            current = Some(d);
        } else if line.is_empty() || line.contains(' ') {
            // Blank or comment; bitmap rows never contain spaces.
            continue;
        } else if let Some(d) = current {
            glyphs[d].as_mut().unwrap().push(line);
        }
    }
    glyphs
        .into_iter()
        .enumerate()
        .map(|(d, rows)| {
            let rows = rows.unwrap_or_else(|| panic!("font: digit {d} missing"));
            assert!(
                rows.len() == FONT_ROWS && rows.iter().all(|r| r.len() == FONT_COLS),
                "font: digit {d} is not {FONT_ROWS}x{FONT_COLS}"
            );
            BinaryImage::from_ascii(&rows)
        })
        .collect()
}

fn font() -> &'static [BinaryImage] {
    static FONT: OnceLock<Vec<BinaryImage>> = OnceLock::new();
    FONT.get_or_init(|| parse_font(FONT_SOURCE))
}

/// The 12x8 master bitmap of digit `d`.
pub fn digit_glyph(d: u32) -> Result<BinaryImage> {
    font()
        .get(d as usize)
        .cloned()
        .ok_or_else(|| Error::Domain(format!("digit must be 0..=9, got {d}")))
}

/// First and last master columns holding ink.
pub fn ink_columns(d: u32) -> Result<(usize, usize)> {
    let g = digit_glyph(d)?;
    let bbox = g.foreground_bbox().expect("font glyphs have ink");
    Ok((bbox.min_x, bbox.max_x))
}

/// Block replication of the master bitmap by an integer factor.
pub fn scaled_glyph(d: u32, scale: usize) -> Result<BinaryImage> {
    if scale == 0 {
        return Err(Error::InvalidParam("glyph scale must be positive".into()));
    }
    let g = digit_glyph(d)?;
    let mut out = BinaryImage::new(FONT_COLS * scale, FONT_ROWS * scale);
    for y in 0..out.height() {
        for x in 0..out.width() {
            out.set(x, y, g.get(x / scale, y / scale));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::fill_holes;

    #[test]
    fn zero_has_a_hole() {
        let g = digit_glyph(0).unwrap();
        assert_ne!(fill_holes(&g), g);
    }

    #[test]
    fn one_is_narrow() {
        let (a, b) = ink_columns(1).unwrap();
        assert!(b - a + 1 < FONT_COLS / 2);
    }

    #[test]
    fn glyphs_are_distinct() {
        for a in 0..10 {
            for b in (a + 1)..10 {
                assert_ne!(digit_glyph(a).unwrap(), digit_glyph(b).unwrap(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn glyphs_are_single_components() {
        for d in 0..10 {
            assert_eq!(crate::regions::label(&digit_glyph(d).unwrap()).count(), 1, "digit {d}");
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(digit_glyph(10), Err(Error::Domain(_))));
    }

    #[test]
    fn scaling_replicates() {
        let g = scaled_glyph(7, 3).unwrap();
        assert_eq!((g.width(), g.height()), (24, 36));
        assert_eq!(g.count(), 9 * digit_glyph(7).unwrap().count());
    }
}
