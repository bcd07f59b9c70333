//! Two-dimensional uniform morphisms and codings, the 12-letter alphabet and its morphisms.

use std::fmt;

use thiserror::Error;

use crate::finite_field::Prime;
use crate::par::{self, Exec};
use crate::wall_engine::{ProfileCell, ProfileGrid};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphismError {
    #[error("letter {0} is not prolongable")]
    NotProlongable(String),
    #[error("letter {0} has no image")]
    NoImage(String),
    #[error("image of {letter} is {rows}x{cols}, expected {k}x{l}")]
    NonUniform { letter: String, rows: usize, cols: usize, k: usize, l: usize },
    #[error("grid text: {0}")]
    Parse(String),
}

/// Anything usable as a letter: a small dense index.
pub trait Symbol: Copy + Eq + fmt::Debug + Send + Sync {
    fn index(self) -> usize;
}

impl Symbol for u8 {
    fn index(self) -> usize {
        self as usize
    }
}

impl Symbol for char {
    fn index(self) -> usize {
        self as usize
    }
}

/// The alphabet: units A, B; zeroes F, 0; edges; corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    F,
    Zero,
    EN,
    EE,
    ES,
    EW,
    CNE,
    CSE,
    CSW,
    CNW,
}

impl Letter {
    pub const ALL: [Letter; 12] = [
        Letter::A,
        Letter::B,
        Letter::F,
        Letter::Zero,
        Letter::EN,
        Letter::EE,
        Letter::ES,
        Letter::EW,
        Letter::CNE,
        Letter::CSE,
        Letter::CSW,
        Letter::CNW,
    ];

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::B => 'B',
            Letter::F => 'F',
            Letter::Zero => '0',
            Letter::EN => 'N',
            Letter::EE => 'E',
            Letter::ES => 'S',
            Letter::EW => 'W',
            Letter::CNE => '1',
            Letter::CSE => '2',
            Letter::CSW => '3',
            Letter::CNW => '4',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        Letter::ALL.into_iter().find(|l| l.to_char() == c)
    }
}

impl Symbol for Letter {
    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Dense rectangular grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    cells: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Grid { rows, cols, cells: vec![v; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                cells.push(f(m, n));
            }
        }
        Grid { rows, cols, cells }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Grid { rows: rows.len(), cols, cells: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, n: usize) -> T {
        assert!(m < self.rows && n < self.cols, "({m},{n}) outside {}x{}", self.rows, self.cols);
        self.cells[m * self.cols + n]
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid { rows: self.rows, cols: self.cols, cells: self.cells.iter().map(|&x| f(x)).collect() }
    }

    /// The top-left `rows` x `cols` block.
    pub fn corner(&self, rows: usize, cols: usize) -> Grid<T> {
        Grid::from_fn(rows.min(self.rows), cols.min(self.cols), |m, n| self.get(m, n))
    }
}

impl Grid<Letter> {
    /// One character per letter, rows separated by newlines.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() + self.rows);
        for row in self.cells.chunks(self.cols.max(1)) {
            s.extend(row.iter().map(|l| l.to_char()));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MorphismError> {
        let rows = text
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.chars().map(|c| Letter::from_char(c).ok_or_else(|| MorphismError::Parse(format!("bad letter {c:?}")))).collect())
            .collect::<Result<Vec<Vec<Letter>>, _>>()?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MorphismError::Parse("rows differ in length".into()));
        }
        Ok(Grid::from_rows(rows))
    }
}

/// A uniform [k, l]-coding from letters of type `S` to blocks over `T`.
#[derive(Debug, Clone)]
pub struct Coding2D<S, T> {
    k: usize,
    l: usize,
    images: Vec<Option<Grid<T>>>,
    _from: std::marker::PhantomData<S>,
}

/// A coding whose target alphabet is its source.
pub type Morphism2D<S> = Coding2D<S, S>;

impl<S: Symbol, T: Copy + Send + Sync> Coding2D<S, T> {
    pub fn new(k: usize, l: usize, table: impl IntoIterator<Item = (S, Grid<T>)>) -> Result<Self, MorphismError> {
        let mut images: Vec<Option<Grid<T>>> = Vec::new();
        for (s, g) in table {
            if g.rows != k || g.cols != l {
                return Err(MorphismError::NonUniform { letter: format!("{s:?}"), rows: g.rows, cols: g.cols, k, l });
            }
            let i = s.index();
            if images.len() <= i {
                images.resize(i + 1, None);
            }
            images[i] = Some(g);
        }
        Ok(Coding2D { k, l, images, _from: std::marker::PhantomData })
    }

    pub fn factors(&self) -> (usize, usize) {
        (self.k, self.l)
    }

    pub fn image(&self, s: S) -> Option<&Grid<T>> {
        self.images.get(s.index()).and_then(Option::as_ref)
    }

    /// Block substitution of every cell.
    pub fn apply(&self, g: &Grid<S>) -> Result<Grid<T>, MorphismError> {
        self.apply_with(g, Exec::default())
    }

    pub fn apply_with(&self, g: &Grid<S>, exec: Exec) -> Result<Grid<T>, MorphismError> {
        if let Some(&bad) = g.cells.iter().find(|&&s| self.image(s).is_none()) {
            return Err(MorphismError::NoImage(format!("{bad:?}")));
        }
        let (rows, cols) = (g.rows * self.k, g.cols * self.l);
        let row_blocks = par::map_range(exec, rows, |m| {
            let mut out = Vec::with_capacity(cols);
            for n0 in 0..g.cols {
                let img = self.image(g.get(m / self.k, n0)).expect("checked above");
                let start = (m % self.k) * self.l;
                out.extend_from_slice(&img.cells[start..start + self.l]);
            }
            out
        });
        Ok(Grid { rows, cols, cells: row_blocks.into_iter().flatten().collect() })
    }
}

impl<S: Symbol> Coding2D<S, S> {
    /// phi^iters(seed), with `seed` required to be prolongable.
    pub fn expand2d(&self, seed: S, iters: u32) -> Result<Grid<S>, MorphismError> {
        self.expand2d_with(seed, iters, Exec::default())
    }

    pub fn expand2d_with(&self, seed: S, iters: u32, exec: Exec) -> Result<Grid<S>, MorphismError> {
        let img = self.image(seed).ok_or_else(|| MorphismError::NoImage(format!("{seed:?}")))?;
        if img.get(0, 0) != seed {
            return Err(MorphismError::NotProlongable(format!("{seed:?}")));
        }
        self.iterate(seed, iters, exec)
    }

    /// phi^iters(letter) without the prolongability requirement.
    pub fn iterate(&self, letter: S, iters: u32, exec: Exec) -> Result<Grid<S>, MorphismError> {
        let mut g = Grid::filled(1, 1, letter);
        for _ in 0..iters {
            g = self.apply_with(&g, exec)?;
        }
        Ok(g)
    }
}

fn block(p: usize, f: impl Fn(usize, usize) -> Letter) -> Grid<Letter> {
    Grid::from_fn(p, p, f)
}

fn frame_image(p: usize) -> Grid<Letter> {
    let last = p - 1;
    block(p, |m, n| match (m, n) {
        (0, 0) => Letter::CNW,
        (0, n) if n == last => Letter::CNE,
        (m, 0) if m == last => Letter::CSW,
        (m, n) if m == last && n == last => Letter::CSE,
        (0, _) => Letter::EN,
        (_, n) if n == last => Letter::EE,
        (m, _) if m == last => Letter::ES,
        (_, 0) => Letter::EW,
        _ => Letter::Zero,
    })
}

/// Images of every letter except the units, shared by the main morphism and its upper bound variant.
fn non_unit_images(p: usize) -> Vec<(Letter, Grid<Letter>)> {
    let last = p - 1;
    vec![
        (Letter::F, frame_image(p)),
        (Letter::Zero, Grid::filled(p, p, Letter::Zero)),
        (Letter::EN, block(p, |m, _| if m == 0 { Letter::EN } else { Letter::Zero })),
        (Letter::EE, block(p, |_, n| if n == last { Letter::EE } else { Letter::Zero })),
        (Letter::ES, block(p, |m, _| if m == last { Letter::ES } else { Letter::Zero })),
        (Letter::EW, block(p, |_, n| if n == 0 { Letter::EW } else { Letter::Zero })),
        (
            Letter::CNE,
            block(p, |m, n| match (m == 0, n == last) {
                (true, true) => Letter::CNE,
                (true, false) => Letter::EN,
                (false, true) => Letter::EE,
                _ => Letter::Zero,
            }),
        ),
        (
            Letter::CSE,
            block(p, |m, n| match (m == last, n == last) {
                (true, true) => Letter::CSE,
                (true, false) => Letter::ES,
                (false, true) => Letter::EE,
                _ => Letter::Zero,
            }),
        ),
        (
            Letter::CSW,
            block(p, |m, n| match (m == last, n == 0) {
                (true, true) => Letter::CSW,
                (true, false) => Letter::ES,
                (false, true) => Letter::EW,
                _ => Letter::Zero,
            }),
        ),
        (
            Letter::CNW,
            block(p, |m, n| match (m == 0, n == 0) {
                (true, true) => Letter::CNW,
                (true, false) => Letter::EN,
                (false, true) => Letter::EW,
                _ => Letter::Zero,
            }),
        ),
    ]
}

/// The [p, p]-morphism on the 12-letter alphabet.
pub fn phi_p(p: Prime) -> Morphism2D<Letter> {
    let q = p.get() as usize;
    let a = block(q, |m, n| match (m % 2, n % 2) {
        (0, 0) => Letter::A,
        (0, 1) => Letter::Zero,
        (1, 0) => Letter::F,
        _ => Letter::B,
    });
    let b = block(q, |m, n| match (m % 2, n % 2) {
        (0, 0) => Letter::B,
        (0, 1) => Letter::F,
        (1, 0) => Letter::Zero,
        _ => Letter::A,
    });
    let mut table = vec![(Letter::A, a), (Letter::B, b)];
    table.extend(non_unit_images(q));
    Coding2D::new(q, q, table).expect("uniform by construction")
}

/// The lower-bound morphism on {0, A}: A on cells of equal parity.
pub fn phi_0(p: Prime) -> Morphism2D<Letter> {
    let q = p.get() as usize;
    let a = block(q, |m, n| if m % 2 == n % 2 { Letter::A } else { Letter::Zero });
    Coding2D::new(q, q, [(Letter::A, a), (Letter::Zero, Grid::filled(q, q, Letter::Zero))]).expect("uniform by construction")
}

/// The upper-bound morphism on the alphabet without B: A on equal parity, F elsewhere.
pub fn phi_f(p: Prime) -> Morphism2D<Letter> {
    let q = p.get() as usize;
    let a = block(q, |m, n| if m % 2 == n % 2 { Letter::A } else { Letter::F });
    let mut table = vec![(Letter::A, a)];
    table.extend(non_unit_images(q));
    Coding2D::new(q, q, table).expect("uniform by construction")
}

/// Both bounding morphisms at once.
pub fn phi_variants(p: Prime) -> (Morphism2D<Letter>, Morphism2D<Letter>) {
    (phi_0(p), phi_f(p))
}

/// Letter 0 to Zero, everything else to X; placed with its corner at (0, 0).
pub fn pi_coding(g: &Grid<Letter>) -> ProfileGrid {
    let cells = g.cells.iter().map(|&l| if l == Letter::Zero { ProfileCell::Zero } else { ProfileCell::X }).collect();
    ProfileGrid::from_cells(0..g.rows as i64, 0..g.cols as i64, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn thue_morse() -> Morphism2D<u8> {
        Coding2D::new(2, 2, [(0u8, Grid::from_rows(vec![vec![0, 1], vec![1, 0]])), (1u8, Grid::from_rows(vec![vec![1, 0], vec![0, 1]]))])
            .unwrap()
    }

    #[test]
    fn thue_morse_square() {
        let tm = thue_morse();
        assert_eq!(tm.expand2d(0, 0).unwrap(), Grid::filled(1, 1, 0));
        let two = tm.expand2d(0, 2).unwrap();
        let expect = Grid::from_rows(vec![vec![0, 1, 1, 0], vec![1, 0, 0, 1], vec![1, 0, 0, 1], vec![0, 1, 1, 0]]);
        assert_eq!(two, expect);
        let three = tm.expand2d(0, 3).unwrap();
        assert_eq!(three.get(4, 0), 1);
        assert_eq!(three.get(7, 7), 0);
        let flip = Coding2D::new(1, 1, [(0u8, Grid::filled(1, 1, 1u8)), (1u8, Grid::filled(1, 1, 0u8))]).unwrap();
        assert_eq!(flip.expand2d(0, 1), Err(MorphismError::NotProlongable("0".into())));
    }

    #[test]
    fn one_by_two_coding() {
        let tau: Coding2D<u8, char> =
            Coding2D::new(1, 2, [(0u8, Grid::from_rows(vec![vec!['a', 'a']])), (1u8, Grid::from_rows(vec![vec!['b', 'b']]))]).unwrap();
        let out = tau.apply(&thue_morse().expand2d(0, 2).unwrap()).unwrap();
        let first: String = (0..8).map(|n| out.get(0, n)).collect();
        let second: String = (0..8).map(|n| out.get(1, n)).collect();
        assert_eq!(first, "aabbbbaa");
        assert_eq!(second, "bbaaaabb");
    }

    #[test]
    fn non_uniform_table_rejected() {
        let r = Coding2D::new(2, 2, [(0u8, Grid::filled(2, 1, 0u8))]);
        assert!(matches!(r, Err(MorphismError::NonUniform { .. })));
    }

    #[test]
    fn images_of_the_main_morphism() {
        for p in [3, 5, 7] {
            let phi = phi_p(pr(p));
            let q = p as usize;
            assert_eq!(phi.image(Letter::A).unwrap().get(0, 0), Letter::A);
            assert_eq!(phi.image(Letter::A).unwrap().get(1, 1), Letter::B);
            assert_eq!(phi.image(Letter::B).unwrap().get(1, 0), Letter::Zero);
            let f = phi.image(Letter::F).unwrap();
            assert_eq!(f.get(0, 0), Letter::CNW);
            assert_eq!(f.get(q - 1, q - 1), Letter::CSE);
            assert_eq!(f.get(q - 1, 0), Letter::CSW);
            assert_eq!(f.get(1, 0), Letter::EW);
            let en = phi.image(Letter::EN).unwrap();
            assert!((0..q).all(|n| en.get(0, n) == Letter::EN));
            assert!((1..q).all(|m| (0..q).all(|n| en.get(m, n) == Letter::Zero)));
            let sw = phi.image(Letter::CSW).unwrap();
            assert!((0..q - 1).all(|m| sw.get(m, 0) == Letter::EW));
            assert_eq!(phi.expand2d(Letter::Zero, 2).unwrap(), Grid::filled(q * q, q * q, Letter::Zero));
        }
    }

    #[test]
    fn pi_of_frame_is_a_border() {
        let p = pr(7);
        let g = pi_coding(phi_p(p).image(Letter::F).unwrap());
        for m in 0..7 {
            for n in 0..7 {
                let border = m == 0 || n == 0 || m == 6 || n == 6;
                assert_eq!(g.get(m, n) == ProfileCell::X, border);
            }
        }
        assert_eq!(pi_coding(&Grid::filled(1, 1, Letter::A)).get(0, 0), ProfileCell::X);
    }

    #[test]
    fn expansion_is_nested() {
        let phi = phi_p(pr(3));
        let three = phi.expand2d(Letter::A, 3).unwrap();
        assert_eq!(three.corner(9, 9), phi.expand2d(Letter::A, 2).unwrap());
        assert_eq!(phi.expand2d_with(Letter::A, 3, Exec::Sequential).unwrap(), three);
    }

    #[test]
    fn lower_bound_parity_rule() {
        let p = pr(5);
        let g = phi_0(p).expand2d(Letter::A, 3).unwrap();
        let digits = |mut x: usize| {
            let mut d = vec![];
            for _ in 0..3 {
                d.push(x % 5);
                x /= 5;
            }
            d
        };
        for m in 0..125 {
            for n in 0..125 {
                let same = digits(m).iter().zip(digits(n)).all(|(a, b)| a % 2 == b % 2);
                assert_eq!(g.get(m, n) != Letter::Zero, same);
            }
        }
    }

    #[test]
    fn upper_bound_has_no_b_and_frames_scale() {
        let p = pr(3);
        let phi = phi_f(p);
        assert!(phi.image(Letter::B).is_none());
        let f = phi.iterate(Letter::F, 2, Exec::default()).unwrap();
        assert_eq!(f.get(0, 0), Letter::CNW);
        assert_eq!(f.get(0, 8), Letter::CNE);
        assert_eq!(f.get(4, 8), Letter::EE);
        assert_eq!(f.get(4, 4), Letter::Zero);
        assert_eq!(phi_0(p).expand2d(Letter::Zero, 1).unwrap(), Grid::filled(3, 3, Letter::Zero));
    }

    #[test]
    fn grid_text_round_trip() {
        let g = phi_p(pr(5)).expand2d(Letter::A, 2).unwrap();
        assert_eq!(Grid::from_text(&g.to_text()).unwrap(), g);
        assert!(Grid::from_text("AZ\n").is_err());
    }
}
