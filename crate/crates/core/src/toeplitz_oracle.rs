//! Number walls by explicit Toeplitz determinants. Slow and simple on purpose.

use crate::finite_field::Fp;
use crate::par::Exec;
use crate::sequences::{Cell, Seq};
use crate::wall_engine::{wall_columns, Wall, WallMeta};

/// Square matrix stored row by row.
pub type Matrix = Vec<Vec<Fp>>;

/// T_S(n; m): the (m+1)x(m+1) matrix with entry (i, j) = s_{i-j+n}.
/// `None` when some entry is undefined.
pub fn toeplitz_matrix(s: &Seq, n: i64, m: usize) -> Option<Matrix> {
    let size = m as i64 + 1;
    (0..size)
        .map(|i| (0..size).map(|j| s.get(i - j + n).known()).collect::<Option<Vec<Fp>>>())
        .collect()
}

/// Determinant by elimination with first-nonzero pivoting.
#[allow(clippy::needless_range_loop)]
pub fn det_mod_p(m: &Matrix) -> Fp {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "square matrix expected");
    let Some(p) = m.first().and_then(|r| r.first()).map(|x| x.modulus()) else {
        panic!("empty matrix has no modulus");
    };
    let mut a = m.clone();
    let mut det = p.one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return p.zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let d = a[col][col];
        det *= d;
        let inv = d.inv().expect("pivot is nonzero");
        for r in col + 1..n {
            let f = a[r][col] * inv;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let x = a[col][c];
                a[r][c] -= f * x;
            }
        }
    }
    det
}

/// W(S)[m, n] straight from the definition.
pub fn oracle_cell(s: &Seq, m: i64, n: i64) -> Cell {
    let p = s.prime();
    match m {
        _ if m < -1 => Cell::Known(p.zero()),
        -1 => Cell::Known(p.one()),
        _ => toeplitz_matrix(s, n, m as usize).map_or(Cell::Undefined, |t| Cell::Known(det_mod_p(&t))),
    }
}

/// Cell of the (r0, a0)-wall, via W(S)[m, n] / (r0^{nm} a0^m).
pub fn oracle_ra_cell(s: &Seq, m: i64, n: i64, r0: Fp, a0: Fp) -> Cell {
    match oracle_cell(s, m, n) {
        Cell::Known(v) => {
            let scale = r0.pow_i(n * m).expect("r0 is nonzero") * a0.pow_i(m).expect("a0 is nonzero");
            Cell::Known(v.try_div(scale).expect("scale is nonzero"))
        }
        Cell::Undefined => Cell::Undefined,
    }
}

/// Rows -2..=max_row over the same columns the engine stores.
pub fn oracle_wall(s: &Seq, max_row: i64) -> Wall {
    let p = s.prime();
    oracle_ra_wall_with(s, p.one(), p.one(), max_row, Exec::default())
}

pub fn oracle_ra_wall(s: &Seq, r0: Fp, a0: Fp, max_row: i64) -> Wall {
    oracle_ra_wall_with(s, r0, a0, max_row, Exec::default())
}

pub fn oracle_ra_wall_with(s: &Seq, r0: Fp, a0: Fp, max_row: i64, exec: Exec) -> Wall {
    assert!(!r0.is_zero() && !a0.is_zero(), "(r,a)-walls need nonzero parameters");
    let mut w = Wall::from_fn(s.prime(), -2..max_row + 1, wall_columns(s, max_row), exec, |m, n| {
        oracle_ra_cell(s, m, n, r0, a0)
    });
    w.meta = WallMeta {
        source: format!("toeplitz oracle, p={}, max_row={max_row}", s.prime()),
        ra: Some((r0, a0)),
        left: s.left(),
        right: s.right(),
        offset: (0, 0),
    };
    w
}
