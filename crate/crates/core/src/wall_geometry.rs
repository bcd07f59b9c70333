//! Index remappings of finite walls: reflections, rotation, sub-regions.

use std::ops::Range;

use crate::par::Exec;
use crate::wall_engine::{EngineError, Wall};

fn remap(w: &Wall, rows: Range<i64>, cols: Range<i64>, back: impl Fn(i64, i64) -> (i64, i64) + Sync + Send, tag: &str) -> Wall {
    let mut out = Wall::from_fn(w.prime(), rows, cols, Exec::Sequential, |m, n| {
        let (a, b) = back(m, n);
        w.get(a, b)
    });
    out.meta = w.meta.clone();
    out.meta.source = format!("{tag}({})", w.meta.source);
    out
}

/// Mirror about the centre of `span`: cell [m, l - n] of the result is cell [m, n] of `w`,
/// with l = span.start + span.end - 1.
pub fn reflect_vertical(w: &Wall, span: Range<i64>) -> Wall {
    let l = span.start + span.end - 1;
    let cols = w.cols();
    remap(w, w.rows(), l - (cols.end - 1)..l - cols.start + 1, move |m, n| (m, l - n), "V")
}

/// Row index negated: result[-m, n] = w[m, n].
pub fn reflect_horizontal(w: &Wall) -> Wall {
    let rows = w.rows();
    remap(w, -(rows.end - 1)..-rows.start + 1, w.cols(), |m, n| (-m, n), "H")
}

/// Clockwise quarter turn: result[m, n] = w[-n, m].
pub fn rotate_cw(w: &Wall) -> Wall {
    let rows = w.rows();
    remap(w, w.cols(), -(rows.end - 1)..-rows.start + 1, |m, n| (-n, m), "rho")
}

/// Anticlockwise quarter turn, the inverse of `rotate_cw`: result[m, n] = w[n, -m].
pub fn rotate_ccw(w: &Wall) -> Wall {
    let cols = w.cols();
    remap(w, -(cols.end - 1)..-cols.start + 1, w.rows(), |m, n| (n, -m), "rho^-1")
}

pub fn extract_region(w: &Wall, rows: Range<i64>, cols: Range<i64>) -> Result<Wall, EngineError> {
    w.extract_region(rows, cols)
}
