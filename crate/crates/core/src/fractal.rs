//! Box sets at level k, exact counts for the bounding morphisms, and the dimension estimator.

use std::fmt::Write as _;

use thiserror::Error;

use crate::finite_field::Prime;
use crate::morphism2d::{phi_0, phi_f, Grid, Letter, MorphismError};
use crate::par::{self, Exec};
use crate::sequences::cantor_tilde;
use crate::wall_engine::{generate_with, profile, EngineError, ProfileCell, ProfileGrid};

#[derive(Debug, Error)]
pub enum FractalError {
    #[error("grid is {rows}x{cols}, level {k} needs {side}x{side}")]
    SizeMismatch { rows: usize, cols: usize, k: u32, side: u64 },
    #[error("the estimator needs at least two levels with nonzero counts")]
    TooFewLevels,
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// The retained boxes [m/p^k, (m+1)/p^k) x [n/p^k, (n+1)/p^k) at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxLevel {
    pub p: Prime,
    pub k: u32,
    side: usize,
    retained: Vec<bool>,
}

impl BoxLevel {
    fn from_predicate(p: Prime, k: u32, rows: usize, cols: usize, keep: impl Fn(usize, usize) -> bool + Sync + Send) -> Result<Self, FractalError> {
        let side = p.get().pow(k);
        if rows as u64 != side || cols as u64 != side {
            return Err(FractalError::SizeMismatch { rows, cols, k, side });
        }
        let side = side as usize;
        let retained = par::map_range(Exec::default(), side * side, |i| keep(i / side, i % side));
        Ok(BoxLevel { p, k, side, retained })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn contains(&self, m: usize, n: usize) -> bool {
        m < self.side && n < self.side && self.retained[m * self.side + n]
    }

    pub fn count(&self) -> u64 {
        let side = self.side;
        par::sum_range(Exec::default(), side, |m| self.retained[m * side..(m + 1) * side].iter().filter(|&&b| b).count() as u64)
    }

    /// Retained boxes in row-major order.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.retained.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i / self.side, i % self.side))
    }

    /// Every box of `self` is also retained in `other` (same level).
    pub fn is_subset_of(&self, other: &BoxLevel) -> bool {
        self.side == other.side && self.retained.iter().zip(&other.retained).all(|(&a, &b)| !a || b)
    }

    /// Every box of `self` sits inside a retained box of the coarser level.
    pub fn refines(&self, coarser: &BoxLevel) -> bool {
        let p = self.p.get() as usize;
        coarser.k + 1 == self.k && self.boxes().all(|(m, n)| coarser.contains(m / p, n / p))
    }
}

/// Boxes for the X cells of a p^k x p^k profile, read from its top-left corner.
pub fn boxes_from_profile(pg: &ProfileGrid, k: u32, p: Prime) -> Result<BoxLevel, FractalError> {
    let (r0, c0) = (pg.rows.start, pg.cols.start);
    BoxLevel::from_predicate(p, k, pg.height(), pg.width(), |m, n| pg.get(r0 + m as i64, c0 + n as i64) == ProfileCell::X)
}

/// Boxes for the nonzero letters of a morphism grid.
pub fn boxes_from_grid(g: &Grid<Letter>, k: u32, p: Prime) -> Result<BoxLevel, FractalError> {
    BoxLevel::from_predicate(p, k, g.rows(), g.cols(), |m, n| g.get(m, n) != Letter::Zero)
}

/// Profile of the p^k x p^k square of the Cantor wall, rows [0, p^k), columns [p^k, 2p^k) of W(C~_k).
pub fn cantor_profile(p: Prime, k: u32, exec: Exec) -> Result<ProfileGrid, FractalError> {
    let q = p.get().pow(k) as i64;
    let s = cantor_tilde(p, k);
    let w = generate_with(&s, p.one(), p.one(), q - 1, exec)?;
    Ok(profile(&w.extract_region(0..q, q..2 * q)?).rebased_to_origin())
}

/// ((p^2 + 1) / 2)^k.
pub fn n_k(p: Prime, k: u32) -> u128 {
    (p.get() as u128 * p.get() as u128).div_ceil(2).pow(k)
}

/// Nonzero count of the upper-bound morphism by its recurrence from a_1 = p^2.
pub fn a_k_recurrence(p: Prime, k: u32) -> u128 {
    let pp = p.get() as u128;
    let q = (pp * pp).div_ceil(2);
    let mut a = pp * pp;
    for j in 1..k.max(1) {
        a = q * a + 2 * (pp * pp - 1) * (pp.pow(j) - 1);
    }
    a
}

/// The unrolled sum p^2 q^{k-1} + 2(p^2 - 1) sum_{i<k} q^{i-1}(p^{k-i} - 1).
pub fn a_k_sum(p: Prime, k: u32) -> u128 {
    let pp = p.get() as u128;
    let q = (pp * pp).div_ceil(2);
    let tail: u128 = (1..k).map(|i| q.pow(i - 1) * (pp.pow(k - i) - 1)).sum();
    pp * pp * q.pow(k - 1) + 2 * (pp * pp - 1) * tail
}

/// The sum in closed form: p^2 q^{k-1} + (8 q^k - 4(p+1) p^k)/(p-1) + 4.
pub fn a_k_closed(p: Prime, k: u32) -> u128 {
    let pp = p.get() as i128;
    let q = (pp * pp + 1) / 2;
    let num = 8 * q.pow(k) - 4 * (pp + 1) * pp.pow(k);
    assert_eq!(num % (pp - 1), 0, "closed form is integral");
    (pp * pp * q.pow(k - 1) + num / (pp - 1) + 4) as u128
}

/// The simplified form with a coefficient `c / (p - 1)` on q^k, in floating point:
/// q^k (2p^2/(p^2+1) + c/(p-1) - 4(p+1)/(p-1) (2p/(p^2+1))^k + 4 (2/(p^2+1))^k).
pub fn a_k_simplified_f64(p: Prime, k: u32, c: f64) -> f64 {
    let pf = p.get() as f64;
    let q = (pf * pf + 1.0) / 2.0;
    let k = k as i32;
    q.powi(k)
        * (2.0 * pf * pf / (pf * pf + 1.0) + c / (pf - 1.0) - 4.0 * (pf + 1.0) / (pf - 1.0) * (2.0 * pf / (pf * pf + 1.0)).powi(k)
            + 4.0 * (2.0 / (pf * pf + 1.0)).powi(k))
}

/// (N_k, a_k) after checking that recurrence, sum and closed form agree.
pub fn closed_form_counts(p: Prime, k: u32) -> Result<(u128, u128), FractalError> {
    if k == 0 {
        return Err(FractalError::ZeroLevel);
    }
    let a = a_k_recurrence(p, k);
    assert_eq!(a, a_k_sum(p, k));
    assert_eq!(a, a_k_closed(p, k));
    Ok((n_k(p, k), a))
}

/// Nonzero cells of phi_0^k(A) and phi_F^k(A) as box sets.
pub fn bound_levels(p: Prime, k: u32) -> Result<(BoxLevel, BoxLevel), FractalError> {
    let lower = phi_0(p).expand2d(Letter::A, k)?;
    let upper = phi_f(p).expand2d(Letter::A, k)?;
    Ok((boxes_from_grid(&lower, k, p)?, boxes_from_grid(&upper, k, p)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimEstimate {
    /// log(count) / (k log p) at the deepest level.
    pub deepest: f64,
    /// Least-squares slope of log(count) against k log p.
    pub slope: f64,
}

/// Box-counting estimate from `(level, count)` pairs.
pub fn box_dim_estimate(counts: &[(u32, u128)], p: Prime) -> Result<DimEstimate, FractalError> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|&&(k, c)| k > 0 && c > 0)
        .map(|&(k, c)| (k as f64 * (p.get() as f64).ln(), (c as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(FractalError::TooFewLevels);
    }
    let deepest = pts.iter().copied().fold(pts[0], |best, pt| if pt.0 > best.0 { pt } else { best });
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(DimEstimate { deepest: deepest.1 / deepest.0, slope: sxy / sxx })
}

/// log((p^2 + 1) / 2) / log p.
pub fn target_dimension(p: Prime) -> f64 {
    let pf = p.get() as f64;
    ((pf * pf + 1.0) / 2.0).ln() / pf.ln()
}

/// One line per level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub level: u32,
    pub count: u64,
    pub n_k: u128,
    pub a_k: u128,
    pub estimate: f64,
}

/// Cantor-wall box counts with the two bounds, levels 1..=levels.
pub fn level_table(p: Prime, levels: u32, exec: Exec) -> Result<Vec<LevelRow>, FractalError> {
    (1..=levels)
        .map(|k| {
            let count = boxes_from_profile(&cantor_profile(p, k, exec)?, k, p)?.count();
            let (n_k, a_k) = closed_form_counts(p, k)?;
            let estimate = (count as f64).ln() / (k as f64 * (p.get() as f64).ln());
            Ok(LevelRow { level: k, count, n_k, a_k, estimate })
        })
        .collect()
}

pub fn to_csv(rows: &[LevelRow]) -> String {
    let mut out = String::from("level,k_count,N_k,a_k,estimate\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{:.6}", r.level, r.count, r.n_k, r.a_k, r.estimate).expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism2d::{phi_p, pi_coding};

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(closed_form_counts(pr(3), 1).unwrap(), (5, 9));
        assert_eq!(closed_form_counts(pr(3), 2).unwrap(), (25, 77));
        assert_eq!(closed_form_counts(pr(5), 1).unwrap().0, 13);
        assert!(closed_form_counts(pr(3), 0).is_err());
    }

    #[test]
    fn count_forms_agree() {
        for p in [3, 5, 7, 11] {
            for k in 1..=12 {
                closed_form_counts(pr(p), k).unwrap();
            }
        }
    }

    #[test]
    fn simplified_form_needs_coefficient_eight() {
        let p = pr(3);
        assert!((a_k_simplified_f64(p, 1, 8.0) - 9.0).abs() < 1e-9);
        assert!((a_k_simplified_f64(p, 1, 2.0) + 6.0).abs() < 1e-9);
        for k in 1..8 {
            let gap = a_k_simplified_f64(p, k, 8.0) - a_k_simplified_f64(p, k, 2.0);
            assert!((gap - 3.0 * 5f64.powi(k as i32)).abs() < 1e-6 * gap);
        }
    }

    #[test]
    fn direct_counts_match_forms() {
        for p in [3, 5] {
            let p = pr(p);
            for k in 1..=3 {
                let (lo, hi) = bound_levels(p, k).unwrap();
                assert_eq!(lo.count() as u128, n_k(p, k));
                assert_eq!(hi.count() as u128, a_k_recurrence(p, k));
            }
        }
    }

    #[test]
    fn all_x_profile() {
        let p = pr(3);
        let g = ProfileGrid::from_cells(0..9, 0..9, vec![ProfileCell::X; 81]);
        assert_eq!(boxes_from_profile(&g, 2, p).unwrap().count(), 81);
        assert!(boxes_from_profile(&g, 1, p).is_err());
    }

    #[test]
    fn lower_bound_at_level_one() {
        let p = pr(3);
        let g = pi_coding(&phi_0(p).expand2d(Letter::A, 1).unwrap());
        assert_eq!(boxes_from_profile(&g, 1, p).unwrap().count(), 5);
    }

    #[test]
    fn sandwich_and_refinement() {
        let p = pr(3);
        let mut prev: Option<BoxLevel> = None;
        for k in 1..=3 {
            let wall = boxes_from_profile(&cantor_profile(p, k, Exec::default()).unwrap(), k, p).unwrap();
            let morph = boxes_from_profile(&pi_coding(&phi_p(p).expand2d(Letter::A, k).unwrap()), k, p).unwrap();
            assert_eq!(wall, morph);
            let (lo, hi) = bound_levels(p, k).unwrap();
            assert!(lo.is_subset_of(&wall) && wall.is_subset_of(&hi));
            if let Some(c) = &prev {
                assert!(wall.refines(c));
            }
            prev = Some(wall);
        }
    }

    #[test]
    fn estimator_on_exact_counts() {
        for p in [3, 5, 7] {
            let p = pr(p);
            let counts: Vec<(u32, u128)> = (1..6).map(|k| (k, n_k(p, k))).collect();
            let e = box_dim_estimate(&counts, p).unwrap();
            assert!((e.deepest - target_dimension(p)).abs() < 1e-12);
            assert!((e.slope - target_dimension(p)).abs() < 1e-12);
        }
        assert!((target_dimension(pr(3)) - 1.46497).abs() < 1e-5);
        assert!(box_dim_estimate(&[], pr(3)).is_err());
        assert!(box_dim_estimate(&[(1, 5)], pr(3)).is_err());
    }

    #[test]
    fn csv_shape() {
        let rows = level_table(pr(3), 3, Exec::default()).unwrap();
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("level,k_count,N_k,a_k,estimate\n1,"));
    }
}
