//! Binary PPM/PGM images of walls and profiles, one pixel per cell.

use crate::finite_field::Prime;
use crate::sequences::Cell;
use crate::wall_engine::{ProfileCell, ProfileGrid, Wall};

pub const ZERO_RGB: [u8; 3] = [255, 230, 0];
pub const UNDEFINED_RGB: [u8; 3] = [128, 128, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// P6, colour.
    Ppm,
    /// P5, grayscale profile: zero white, nonzero black, undefined gray.
    Pgm,
}

impl ImageFormat {
    pub fn from_extension(path: &str) -> Option<Self> {
        let ext = path.rsplit_once('.')?.1.to_ascii_lowercase();
        match ext.as_str() {
            "ppm" => Some(ImageFormat::Ppm),
            "pgm" => Some(ImageFormat::Pgm),
            _ => None,
        }
    }
}

/// Blue ramp: residue 1 darkest, p - 1 lightest.
pub fn residue_rgb(v: u64, p: Prime) -> [u8; 3] {
    let p = p.get();
    if v == 0 {
        return ZERO_RGB;
    }
    [0, 64 + (160 * (v - 1) / (p - 2)) as u8, 255]
}

fn gray(c: ProfileCell) -> u8 {
    match c {
        ProfileCell::Zero => 255,
        ProfileCell::X => 0,
        ProfileCell::Undefined => 128,
    }
}

fn header(fmt: ImageFormat, width: usize, height: usize) -> Vec<u8> {
    let magic = match fmt {
        ImageFormat::Ppm => "P6",
        ImageFormat::Pgm => "P5",
    };
    format!("{magic}\n{width} {height}\n255\n").into_bytes()
}

pub fn render_wall(w: &Wall, fmt: ImageFormat) -> Vec<u8> {
    let p = w.prime();
    let mut out = header(fmt, w.width(), w.height());
    for (_, _, c) in w.iter() {
        match fmt {
            ImageFormat::Ppm => out.extend_from_slice(&match c {
                Cell::Known(v) => residue_rgb(v.value(), p),
                Cell::Undefined => UNDEFINED_RGB,
            }),
            ImageFormat::Pgm => out.push(gray(match c {
                Cell::Known(v) if v.is_zero() => ProfileCell::Zero,
                Cell::Known(_) => ProfileCell::X,
                Cell::Undefined => ProfileCell::Undefined,
            })),
        }
    }
    out
}

/// Nonzero cells take the darkest blue in colour.
pub fn render_profile(pg: &ProfileGrid, fmt: ImageFormat) -> Vec<u8> {
    let mut out = header(fmt, pg.width(), pg.height());
    for &c in pg.cells() {
        match fmt {
            ImageFormat::Ppm => out.extend_from_slice(&match c {
                ProfileCell::Zero => ZERO_RGB,
                ProfileCell::X => [0, 64, 255],
                ProfileCell::Undefined => UNDEFINED_RGB,
            }),
            ImageFormat::Pgm => out.push(gray(c)),
        }
    }
    out
}
