//! Number walls: storage, the Frame Constraints generator, window detection and profiles.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Read, Write};
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::finite_field::{Fp, Prime};
use crate::par::{self, Exec};
use crate::sequences::{Cell, Extension, Seq};
use crate::toeplitz_oracle;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("inconsistent wall at [{m},{n}]: {what}")]
    Inconsistent { m: i64, n: i64, what: String },
    #[error("zero region with top-left [{top},{left}] is not a square ({rows} rows x {cols} cols, {cells} cells)")]
    NonSquare { top: i64, left: i64, rows: i64, cols: i64, cells: usize },
    #[error("inner frame {edge} of the window at [{top},{left}] is not geometric (first break at [{m},{n}])")]
    NonGeometric { top: i64, left: i64, edge: FrameLabel, m: i64, n: i64 },
    #[error("(r,a)-walls need r0 and a0 nonzero")]
    ZeroParameter,
    #[error("region rows {rows:?} cols {cols:?} is outside the wall")]
    OutOfRange { rows: Range<i64>, cols: Range<i64> },
    #[error("wall dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

const UNDEF: u64 = u64::MAX;

/// Where a wall came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallMeta {
    pub source: String,
    /// Row -1 is a0 * r0^n; `None` when the wall is not a generated wall.
    pub ra: Option<(Fp, Fp)>,
    pub left: Extension,
    pub right: Extension,
    /// Accumulated shift applied by `rebased`.
    pub offset: (i64, i64),
}

impl WallMeta {
    fn plain(source: impl Into<String>) -> Self {
        WallMeta {
            source: source.into(),
            ra: None,
            left: Extension::UndefinedOutside,
            right: Extension::UndefinedOutside,
            offset: (0, 0),
        }
    }
}

/// A rectangle of wall cells, rows `[row_lo, row_hi)` and columns `[col_lo, col_hi)`.
/// Anything outside the rectangle reads as `Undefined`.
#[derive(Debug, Clone)]
pub struct Wall {
    p: Prime,
    rows: Range<i64>,
    cols: Range<i64>,
    cells: Vec<u64>,
    pub meta: WallMeta,
    windows: Vec<WindowRecord>,
    fallbacks: usize,
}

impl PartialEq for Wall {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.rows == other.rows && self.cols == other.cols && self.cells == other.cells
    }
}

impl Wall {
    pub fn undefined(p: Prime, rows: Range<i64>, cols: Range<i64>) -> Self {
        let n = (rows.end - rows.start).max(0) as usize * (cols.end - cols.start).max(0) as usize;
        Wall { p, rows, cols, cells: vec![UNDEF; n], meta: WallMeta::plain(""), windows: vec![], fallbacks: 0 }
    }

    pub(crate) fn from_fn(p: Prime, rows: Range<i64>, cols: Range<i64>, exec: Exec, f: impl Fn(i64, i64) -> Cell + Sync + Send) -> Self {
        let width = (cols.end - cols.start).max(0) as usize;
        let height = (rows.end - rows.start).max(0) as usize;
        let (r0, c0) = (rows.start, cols.start);
        let cells = par::map_range(exec, width * height, |idx| {
            let m = r0 + (idx / width) as i64;
            let n = c0 + (idx % width) as i64;
            match f(m, n) {
                Cell::Known(v) => v.value(),
                Cell::Undefined => UNDEF,
            }
        });
        Wall { p, rows, cols, cells, meta: WallMeta::plain(""), windows: vec![], fallbacks: 0 }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn rows(&self) -> Range<i64> {
        self.rows.clone()
    }

    pub fn cols(&self) -> Range<i64> {
        self.cols.clone()
    }

    pub fn max_row(&self) -> i64 {
        self.rows.end - 1
    }

    pub fn width(&self) -> usize {
        (self.cols.end - self.cols.start).max(0) as usize
    }

    pub fn height(&self) -> usize {
        (self.rows.end - self.rows.start).max(0) as usize
    }

    fn index(&self, m: i64, n: i64) -> Option<usize> {
        if self.rows.contains(&m) && self.cols.contains(&n) {
            Some((m - self.rows.start) as usize * self.width() + (n - self.cols.start) as usize)
        } else {
            None
        }
    }

    pub fn get(&self, m: i64, n: i64) -> Cell {
        match self.index(m, n) {
            Some(i) if self.cells[i] != UNDEF => Cell::Known(self.p.from_residue(self.cells[i])),
            _ => Cell::Undefined,
        }
    }

    pub fn known(&self, m: i64, n: i64) -> Option<Fp> {
        self.get(m, n).known()
    }

    pub fn set(&mut self, m: i64, n: i64, c: Cell) {
        let i = self.index(m, n).unwrap_or_else(|| panic!("[{m},{n}] outside the wall"));
        self.cells[i] = match c {
            Cell::Known(v) => {
                assert_eq!(v.modulus(), self.p, "mixed moduli");
                v.value()
            }
            Cell::Undefined => UNDEF,
        };
    }

    pub fn windows(&self) -> &[WindowRecord] {
        &self.windows
    }

    /// Number of cells the generator had to hand to the determinant oracle.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != UNDEF).count()
    }

    /// Every stored cell in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Cell)> + '_ {
        let w = self.width().max(1);
        self.cells.iter().enumerate().map(move |(i, &c)| {
            let m = self.rows.start + (i / w) as i64;
            let n = self.cols.start + (i % w) as i64;
            let cell = if c == UNDEF { Cell::Undefined } else { Cell::Known(self.p.from_residue(c)) };
            (m, n, cell)
        })
    }

    /// A copy of a sub-rectangle, keeping absolute indices.
    pub fn extract_region(&self, rows: Range<i64>, cols: Range<i64>) -> Result<Wall, EngineError> {
        let inside = |r: &Range<i64>, outer: &Range<i64>| r.start >= outer.start && r.end <= outer.end && r.start <= r.end;
        if !inside(&rows, &self.rows) || !inside(&cols, &self.cols) {
            return Err(EngineError::OutOfRange { rows, cols });
        }
        let mut out = Wall::from_fn(self.p, rows, cols, Exec::Sequential, |m, n| self.get(m, n));
        out.meta = WallMeta { source: format!("region of {}", self.meta.source), ..self.meta.clone() };
        Ok(out)
    }

    /// The same cells with (dm, dn) added to every index.
    pub fn rebased(&self, dm: i64, dn: i64) -> Wall {
        let mut out = self.clone();
        out.rows = self.rows.start + dm..self.rows.end + dm;
        out.cols = self.cols.start + dn..self.cols.end + dn;
        out.meta.offset = (self.meta.offset.0 + dm, self.meta.offset.1 + dn);
        out.windows.clear();
        out
    }

    /// Shifts so that the top-left stored cell is (0, 0).
    pub fn rebased_to_origin(&self) -> Wall {
        self.rebased(-self.rows.start, -self.cols.start)
    }

    /// Binary dump: header, then row-major residues with an all-ones marker for Undefined.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<(), EngineError> {
        let width: u8 = cell_width(self.p);
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&[DUMP_VERSION, width])?;
        w.write_all(&self.p.get().to_le_bytes())?;
        for x in [self.rows.start, self.rows.end, self.cols.start, self.cols.end] {
            w.write_all(&x.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.cells.len() * width as usize);
        for &c in &self.cells {
            match width {
                1 => buf.push(if c == UNDEF { u8::MAX } else { c as u8 }),
                4 => buf.extend_from_slice(&(if c == UNDEF { u32::MAX } else { c as u32 }).to_le_bytes()),
                _ => buf.extend_from_slice(&c.to_le_bytes()),
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Wall, EngineError> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(EngineError::Format("bad magic".into()));
        }
        let mut vw = [0u8; 2];
        r.read_exact(&mut vw)?;
        if vw[0] != DUMP_VERSION {
            return Err(EngineError::Format(format!("unsupported version {}", vw[0])));
        }
        let width = vw[1];
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let p = Prime::new(u64::from_le_bytes(word)).map_err(|e| EngineError::Format(e.to_string()))?;
        if width != cell_width(p) {
            return Err(EngineError::Format(format!("cell width {width} does not match p={p}")));
        }
        let mut ranges = [0i64; 4];
        for x in ranges.iter_mut() {
            r.read_exact(&mut word)?;
            *x = i64::from_le_bytes(word);
        }
        let mut wall = Wall::undefined(p, ranges[0]..ranges[1], ranges[2]..ranges[3]);
        let mut bytes = vec![0u8; wall.cells.len() * width as usize];
        r.read_exact(&mut bytes)?;
        for (i, chunk) in bytes.chunks_exact(width as usize).enumerate() {
            let raw = match width {
                1 => (chunk[0] != u8::MAX).then_some(chunk[0] as u64),
                4 => {
                    let v = u32::from_le_bytes(chunk.try_into().unwrap());
                    (v != u32::MAX).then_some(v as u64)
                }
                _ => {
                    let v = u64::from_le_bytes(chunk.try_into().unwrap());
                    (v != u64::MAX).then_some(v)
                }
            };
            wall.cells[i] = match raw {
                Some(v) if v < p.get() => v,
                Some(v) => return Err(EngineError::Format(format!("residue {v} not below p={p}"))),
                None => UNDEF,
            };
        }
        wall.meta.source = "dump".into();
        Ok(wall)
    }
}

const DUMP_MAGIC: &[u8; 6] = b"NWALL\0";
const DUMP_VERSION: u8 = 1;

fn cell_width(p: Prime) -> u8 {
    if p.get() < u8::MAX as u64 {
        1
    } else if p.get() < u32::MAX as u64 {
        4
    } else {
        8
    }
}

/// A cell that differs between two walls where both are known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub m: i64,
    pub n: i64,
    pub expected: String,
    pub actual: String,
}

impl Mismatch {
    pub fn new(m: i64, n: i64, expected: impl fmt::Display, actual: impl fmt::Display) -> Self {
        Mismatch { m, n, expected: expected.to_string(), actual: actual.to_string() }
    }
}

/// Cells known in both walls whose values differ, in row-major order of `expected`.
pub fn mismatches(expected: &Wall, actual: &Wall) -> Vec<Mismatch> {
    expected
        .iter()
        .filter_map(|(m, n, c)| match (c, actual.get(m, n)) {
            (Cell::Known(a), Cell::Known(b)) if a != b => Some(Mismatch::new(m, n, a, b)),
            _ => None,
        })
        .collect()
}

/// The columns a wall of `s` covers for rows up to `max_row`: the stored window,
/// widened by `max_row + 1` on each side that extends with zeros.
pub fn wall_columns(s: &Seq, max_row: i64) -> Range<i64> {
    let ext = max_row.max(0) + 1;
    let lo = if s.left() == Extension::ZeroOutside { s.lo() - ext } else { s.lo() };
    let hi = if s.right() == Extension::ZeroOutside { s.hi() + ext } else { s.hi() };
    lo..hi
}

/// Deepest row with any known cell for a finite sequence: floor((len - 1) / 2).
pub fn default_max_row(s: &Seq) -> i64 {
    if s.is_empty() {
        -1
    } else {
        (s.len() as i64 - 1) / 2
    }
}

// ---------------------------------------------------------------------------
// Windows

/// Labels of the inner (A-D) and outer (E-H) frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FrameLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl FrameLabel {
    pub const ALL: [FrameLabel; 8] =
        [FrameLabel::A, FrameLabel::B, FrameLabel::C, FrameLabel::D, FrameLabel::E, FrameLabel::F, FrameLabel::G, FrameLabel::H];
    pub const INNER: [FrameLabel; 4] = [FrameLabel::A, FrameLabel::B, FrameLabel::C, FrameLabel::D];

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FrameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Finite(usize),
    /// The zero region running off a side that extends with zeros.
    Infinite,
    /// Cut off by unknown cells; its true size is not visible.
    Truncated,
}

/// A maximal zero region. Frames are kept as origin plus ratio and read back on demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowRecord {
    pub top_row: i64,
    pub left_col: i64,
    pub side: Side,
    /// Bounding box of the visible zero cells.
    pub rows: (i64, i64),
    pub cols: (i64, i64),
    #[serde(skip)]
    origins: [Option<Fp>; 4],
    #[serde(skip)]
    ratios: [Option<Fp>; 4],
    /// Frame edges A..H whose cells are all known.
    pub complete: [bool; 8],
}

impl WindowRecord {
    pub fn side_len(&self) -> Option<usize> {
        match self.side {
            Side::Finite(l) => Some(l),
            _ => None,
        }
    }

    /// Position of entry `i` (0 <= i <= l + 1) of a frame edge.
    pub fn frame_coords(&self, label: FrameLabel, i: i64) -> (i64, i64) {
        let l = self.side_len().expect("frames exist only for finite windows") as i64;
        let (t, cl) = (self.top_row, self.left_col);
        let cr = cl + l - 1;
        match label {
            FrameLabel::A => (t - 1, cl - 1 + i),
            FrameLabel::E => (t - 2, cl - 1 + i),
            FrameLabel::B => (t - 1 + i, cl - 1),
            FrameLabel::F => (t - 1 + i, cl - 2),
            FrameLabel::C => (t + l - i, cr + 1),
            FrameLabel::G => (t + l - i, cr + 2),
            FrameLabel::D => (t + l, cr + 1 - i),
            FrameLabel::H => (t + l + 1, cr + 1 - i),
        }
    }

    pub fn read_frame(&self, wall: &Wall, label: FrameLabel) -> Vec<Cell> {
        let l = self.side_len().expect("frames exist only for finite windows") as i64;
        (0..l + 2).map(|i| {
            let (m, n) = self.frame_coords(label, i);
            wall.get(m, n)
        }).collect()
    }

    /// All entries of a frame edge, if every one of them is known.
    pub fn frame_values(&self, wall: &Wall, label: FrameLabel) -> Option<Vec<Fp>> {
        self.side_len()?;
        self.read_frame(wall, label).into_iter().map(Cell::known).collect()
    }

    /// First entry of an inner edge (A0, B0, C0, D0).
    pub fn origin(&self, label: FrameLabel) -> Option<Fp> {
        self.origins.get(label.slot()).copied().flatten()
    }

    /// Ratio of an inner edge: P, Q, R, S for A, B, C, D.
    pub fn ratio(&self, label: FrameLabel) -> Option<Fp> {
        self.ratios.get(label.slot()).copied().flatten()
    }

    /// (P, Q, R, S) when all four inner edges are complete.
    pub fn pqrs(&self) -> Option<(Fp, Fp, Fp, Fp)> {
        Some((self.ratios[0]?, self.ratios[1]?, self.ratios[2]?, self.ratios[3]?))
    }

    /// An inner edge rebuilt from origin and ratio.
    pub fn inner_frame(&self, label: FrameLabel) -> Option<Vec<Fp>> {
        let l = self.side_len()?;
        let (a, r) = (self.origin(label)?, self.ratio(label)?);
        let mut out = Vec::with_capacity(l + 2);
        let mut x = a;
        for _ in 0..l + 2 {
            out.push(x);
            x *= r;
        }
        Some(out)
    }

    pub fn is_complete(&self, label: FrameLabel) -> bool {
        self.complete[label.slot()]
    }

    /// All inner edges and all outer edges known.
    pub fn fully_framed(&self) -> bool {
        self.complete.iter().all(|&c| c)
    }

    /// The first cell of an inner edge that breaks the geometric progression.
    pub fn geometric_break(&self, wall: &Wall, label: FrameLabel) -> Option<(i64, i64)> {
        let vals = self.frame_values(wall, label)?;
        let r = self.ratio(label)?;
        (1..vals.len()).find(|&i| vals[i] != vals[i - 1] * r).map(|i| self.frame_coords(label, i as i64))
    }
}

/// Finds every maximal zero region in rows >= 0.
pub fn detect_windows(w: &Wall) -> Result<Vec<WindowRecord>, EngineError> {
    let width = w.width();
    let start_row = w.rows.start.max(0);
    if start_row >= w.rows.end || width == 0 {
        return Ok(vec![]);
    }
    let height = (w.rows.end - start_row) as usize;
    let local = |m: i64, n: i64| ((m - start_row) as usize) * width + (n - w.cols.start) as usize;
    let mut seen = vec![false; height * width];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for m in start_row..w.rows.end {
        for n in w.cols.clone() {
            if seen[local(m, n)] || !w.get(m, n).is_zero() {
                continue;
            }
            seen[local(m, n)] = true;
            queue.push_back((m, n));
            let (mut top, mut bottom, mut left, mut right) = (m, m, n, n);
            let mut count = 0usize;
            let mut open = false;
            let mut touches_left = false;
            let mut touches_right = false;
            while let Some((a, b)) = queue.pop_front() {
                count += 1;
                top = top.min(a);
                bottom = bottom.max(a);
                left = left.min(b);
                right = right.max(b);
                for da in -1..=1i64 {
                    for db in -1..=1i64 {
                        if da == 0 && db == 0 {
                            continue;
                        }
                        let (x, y) = (a + da, b + db);
                        match w.get(x, y) {
                            Cell::Undefined => {
                                open = true;
                                touches_left |= y < w.cols.start;
                                touches_right |= y >= w.cols.end;
                            }
                            c if c.is_zero() && da * db == 0 && x >= start_row => {
                                let k = local(x, y);
                                if !seen[k] {
                                    seen[k] = true;
                                    queue.push_back((x, y));
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            let mut rec = WindowRecord {
                top_row: top,
                left_col: left,
                side: Side::Truncated,
                rows: (top, bottom),
                cols: (left, right),
                origins: [None; 4],
                ratios: [None; 4],
                complete: [false; 8],
            };
            if open {
                let infinite = (touches_left && w.meta.left == Extension::ZeroOutside)
                    || (touches_right && w.meta.right == Extension::ZeroOutside);
                rec.side = if infinite { Side::Infinite } else { Side::Truncated };
                out.push(rec);
                continue;
            }
            let (rows, cols) = (bottom - top + 1, right - left + 1);
            if rows != cols || count != (rows * cols) as usize {
                return Err(EngineError::NonSquare { top, left, rows, cols, cells: count });
            }
            rec.side = Side::Finite(rows as usize);
            for label in FrameLabel::ALL {
                rec.complete[label.slot()] = rec.frame_values(w, label).is_some();
            }
            for label in FrameLabel::INNER {
                if let Some(v) = rec.frame_values(w, label) {
                    rec.origins[label.slot()] = Some(v[0]);
                    rec.ratios[label.slot()] = v[0].inv().ok().map(|inv| v[1] * inv);
                }
            }
            out.push(rec);
        }
    }
    out.sort_by_key(|r| (r.top_row, r.left_col));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Profiles

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileCell {
    Zero,
    X,
    Undefined,
}

impl ProfileCell {
    pub fn to_char(self) -> char {
        match self {
            ProfileCell::Zero => '0',
            ProfileCell::X => 'X',
            ProfileCell::Undefined => '.',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(ProfileCell::Zero),
            'X' => Some(ProfileCell::X),
            '.' => Some(ProfileCell::Undefined),
            _ => None,
        }
    }
}

/// The zero / nonzero pattern of a wall region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileGrid {
    pub rows: Range<i64>,
    pub cols: Range<i64>,
    cells: Vec<ProfileCell>,
}

impl ProfileGrid {
    pub fn from_cells(rows: Range<i64>, cols: Range<i64>, cells: Vec<ProfileCell>) -> Self {
        assert_eq!(cells.len(), ((rows.end - rows.start) * (cols.end - cols.start)).max(0) as usize);
        ProfileGrid { rows, cols, cells }
    }

    pub fn width(&self) -> usize {
        (self.cols.end - self.cols.start).max(0) as usize
    }

    pub fn height(&self) -> usize {
        (self.rows.end - self.rows.start).max(0) as usize
    }

    pub fn get(&self, m: i64, n: i64) -> ProfileCell {
        if self.rows.contains(&m) && self.cols.contains(&n) {
            self.cells[(m - self.rows.start) as usize * self.width() + (n - self.cols.start) as usize]
        } else {
            ProfileCell::Undefined
        }
    }

    pub fn cells(&self) -> &[ProfileCell] {
        &self.cells
    }

    pub fn count(&self, c: ProfileCell) -> usize {
        self.cells.iter().filter(|&&x| x == c).count()
    }

    /// One line per row, characters '0', 'X', '.'.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() + self.height());
        for row in self.cells.chunks(self.width().max(1)) {
            s.extend(row.iter().map(|c| c.to_char()));
            s.push('\n');
        }
        s
    }

    /// Parses the text form; the grid is placed with its top-left cell at (0, 0).
    pub fn from_text(text: &str) -> Result<Self, EngineError> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        let width = lines.first().map_or(0, |l| l.chars().count());
        let mut cells = Vec::with_capacity(width * lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.chars().count() != width {
                return Err(EngineError::Format(format!("profile line {i} has a different width")));
            }
            for c in line.chars() {
                cells.push(ProfileCell::from_char(c).ok_or_else(|| EngineError::Format(format!("bad profile symbol {c:?}")))?);
            }
        }
        Ok(ProfileGrid { rows: 0..lines.len() as i64, cols: 0..width as i64, cells })
    }

    /// Same cells with the top-left moved to (0, 0).
    pub fn rebased_to_origin(&self) -> ProfileGrid {
        ProfileGrid { rows: 0..self.height() as i64, cols: 0..self.width() as i64, cells: self.cells.clone() }
    }
}

/// Pointwise: 0 to Zero, nonzero to X, unknown to Undefined.
pub fn profile(w: &Wall) -> ProfileGrid {
    let cells = w
        .cells
        .iter()
        .map(|&c| match c {
            UNDEF => ProfileCell::Undefined,
            0 => ProfileCell::Zero,
            _ => ProfileCell::X,
        })
        .collect();
    ProfileGrid { rows: w.rows.clone(), cols: w.cols.clone(), cells }
}

// ---------------------------------------------------------------------------
// Generation

/// W(S) for rows -2..=max_row by the Frame Constraints.
pub fn generate_wall(s: &Seq, max_row: i64) -> Result<Wall, EngineError> {
    let p = s.prime();
    generate_with(s, p.one(), p.one(), max_row, Exec::default())
}

/// The (r0, a0)-wall of S: row -1 is a0 * r0^n, then the same recurrences.
pub fn generate_ra_wall(s: &Seq, r0: Fp, a0: Fp, max_row: i64) -> Result<Wall, EngineError> {
    generate_with(s, r0, a0, max_row, Exec::default())
}

struct OpenWindow {
    top: i64,
    cl: i64,
    cr: i64,
    side: Option<i64>,
}

const NO_WINDOW: u32 = u32::MAX;

/// The generator with an explicit execution policy.
pub fn generate_with(s: &Seq, r0: Fp, a0: Fp, max_row: i64, exec: Exec) -> Result<Wall, EngineError> {
    let p = s.prime();
    if r0.is_zero() || a0.is_zero() {
        return Err(EngineError::ZeroParameter);
    }
    let cols = wall_columns(s, max_row);
    let rows = -2..max_row + 1;

    // Work on the contiguous run of defined entries that can reach the stored columns.
    let reach = max_row.max(0);
    let span_lo = cols.start - reach;
    let span_hi = cols.end + reach;
    let mut def_lo = span_lo.max(if s.left() == Extension::ZeroOutside { span_lo } else { s.lo() });
    let def_hi = span_hi.min(if s.right() == Extension::ZeroOutside { span_hi } else { s.hi() });
    if def_hi <= def_lo {
        def_lo = def_hi;
    }
    let base: Vec<Fp> = (def_lo..def_hi).map(|i| s.get(i).known().expect("contiguous defined run")).collect();

    let tri = Triangle::run(&base, def_lo, r0, a0, max_row, exec)?;

    let mut wall = Wall::from_fn(p, rows, cols, Exec::Sequential, |m, n| match m {
        -2 => Cell::Known(p.zero()),
        -1 => Cell::Known(a0 * r0.pow_i(n).expect("r0 is nonzero")),
        _ => tri.get(m, n - def_lo).map_or(Cell::Undefined, Cell::Known),
    });
    wall.fallbacks = tri.fallbacks.load(Ordering::Relaxed);
    wall.meta = WallMeta {
        source: format!("frame constraints, p={p}, max_row={max_row}"),
        ra: Some((r0, a0)),
        left: s.left(),
        right: s.right(),
        offset: (0, 0),
    };
    let windows = detect_windows(&wall)?;
    for rec in &windows {
        for label in FrameLabel::INNER {
            if let Some((m, n)) = rec.geometric_break(&wall, label) {
                return Err(EngineError::NonGeometric { top: rec.top_row, left: rec.left_col, edge: label, m, n });
            }
        }
    }
    wall.windows = windows;
    Ok(wall)
}

/// The wall of a finite, fully known sequence laid out on columns 0..len,
/// row m covering columns m..len-m.
struct Triangle {
    p: Prime,
    width: i64,
    offset: i64,
    r0: Fp,
    a0: Fp,
    rows: Vec<Vec<Fp>>,
    win: Vec<Vec<u32>>,
    registry: Vec<OpenWindow>,
    base: Vec<Fp>,
    fallbacks: AtomicUsize,
}

impl Triangle {
    fn run(base: &[Fp], offset: i64, r0: Fp, a0: Fp, max_row: i64, exec: Exec) -> Result<Triangle, EngineError> {
        let p = r0.modulus();
        let width = base.len() as i64;
        let mut t = Triangle {
            p,
            width,
            offset,
            r0,
            a0,
            rows: Vec::new(),
            win: Vec::new(),
            registry: Vec::new(),
            base: base.to_vec(),
            fallbacks: AtomicUsize::new(0),
        };
        if max_row < 0 || width == 0 {
            return Ok(t);
        }
        t.rows.push(base.to_vec());
        t.assign_windows(0)?;
        for m in 1..=max_row {
            if 2 * m >= width {
                break;
            }
            let lo = m;
            let n_cells = (width - 2 * m) as usize;
            let row: Vec<Result<Fp, EngineError>> = par::map_range(exec, n_cells, |i| t.cell(m, lo + i as i64));
            let mut full = vec![p.zero(); width as usize];
            for (i, v) in row.into_iter().enumerate() {
                full[lo as usize + i] = v?;
            }
            t.rows.push(full);
            t.assign_windows(m)?;
        }
        Ok(t)
    }

    fn valid(&self, m: i64, j: i64) -> bool {
        m >= 0 && (m as usize) < self.rows.len() && j >= m && j < self.width - m
    }

    /// Value at working position (m, j); rows -1 and -2 are always available.
    fn get(&self, m: i64, j: i64) -> Option<Fp> {
        match m {
            _ if m <= -2 => Some(self.p.zero()),
            -1 => Some(self.a0 * self.r0.pow_i(j + self.offset).expect("r0 is nonzero")),
            _ if self.valid(m, j) => Some(self.rows[m as usize][j as usize]),
            _ => None,
        }
    }

    fn window_at(&self, m: i64, j: i64) -> Option<&OpenWindow> {
        if !self.valid(m, j) {
            return None;
        }
        let id = self.win[m as usize][j as usize];
        (id != NO_WINDOW).then(|| &self.registry[id as usize])
    }

    fn inconsistent(&self, m: i64, j: i64, what: impl Into<String>) -> EngineError {
        EngineError::Inconsistent { m, n: j + self.offset, what: what.into() }
    }

    fn div(&self, m: i64, j: i64, a: Fp, b: Fp, what: &str) -> Result<Fp, EngineError> {
        a.try_div(b).map_err(|_| self.inconsistent(m, j, format!("zero divisor ({what})")))
    }

    fn cell(&self, m: i64, j: i64) -> Result<Fp, EngineError> {
        let up2 = self.get(m - 2, j).expect("row m-2 is wider than row m");
        if !up2.is_zero() || m == 1 {
            let c = self.get(m - 1, j).expect("row above");
            let l = self.get(m - 1, j - 1).expect("row above");
            let r = self.get(m - 1, j + 1).expect("row above");
            return self.div(m, j, c * c - l * r, up2, "FC1");
        }
        let w = self
            .window_at(m - 2, j)
            .ok_or_else(|| self.inconsistent(m, j, "zero two rows up belongs to no window"))?;
        let Some(l) = w.side else {
            return Ok(self.p.zero());
        };
        let (t, cl, cr) = (w.top, w.cl, w.cr);
        let k = cr + 1 - j;
        if m < t + l {
            Ok(self.p.zero())
        } else if m == t + l {
            self.fc2(m, j, t, cl, cr, l, k)
        } else if m == t + l + 1 {
            self.fc3(m, j, t, cl, cr, l, k)
        } else {
            Err(self.inconsistent(m, j, "window finished but zero recorded below it"))
        }
    }

    fn fallback(&self, m: i64, j: i64) -> Result<Fp, EngineError> {
        self.fallbacks.fetch_add(1, Ordering::Relaxed);
        let s = Seq::new(self.p, self.offset, self.base.clone());
        toeplitz_oracle::oracle_ra_cell(&s, m, j + self.offset, self.r0, self.a0)
            .known()
            .ok_or_else(|| self.inconsistent(m, j, "fallback cell outside the defined triangle"))
    }

    #[allow(clippy::too_many_arguments)]
    fn fc2(&self, m: i64, j: i64, t: i64, cl: i64, cr: i64, l: i64, k: i64) -> Result<Fp, EngineError> {
        let (Some(ak), Some(bk), Some(ck)) = (self.get(t - 1, cl - 1 + k), self.get(t - 1 + k, cl - 1), self.get(t + l - k, cr + 1)) else {
            return self.fallback(m, j);
        };
        let v = self.div(m, j, bk * ck, ak, "FC2 A_k")?;
        Ok(v * self.p.one().sign(l * k))
    }

    #[allow(clippy::too_many_arguments)]
    fn fc3(&self, m: i64, j: i64, t: i64, cl: i64, cr: i64, l: i64, k: i64) -> Result<Fp, EngineError> {
        let cells = [
            self.get(t - 1, cl - 1 + k),  // A_k
            self.get(t - 2, cl - 1 + k),  // E_k
            self.get(t - 1 + k, cl - 1),  // B_k
            self.get(t - 1 + k, cl - 2),  // F_k
            self.get(t + l - k, cr + 1),  // C_k
            self.get(t + l - k, cr + 2),  // G_k
            self.get(t + l, cr + 1 - k),  // D_k
            self.get(t + l, cr + 2 - k),  // D_{k-1}
            self.get(t - 1, cl - 1),      // A_0 = B_0
            self.get(t - 1, cl),          // A_1
            self.get(t, cl - 1),          // B_1
            self.get(t, cr + 1),          // C_l
            self.get(t - 1, cr + 1),      // C_{l+1}
        ];
        let Some(v) = cells.iter().copied().collect::<Option<Vec<Fp>>>() else {
            return self.fallback(m, j);
        };
        let [ak, ek, bk, fk, ck, gk, dk, dk1, a0, a1, b1, cl_, cl1] = v[..] else { unreachable!() };
        let pr = self.div(m, j, a1, a0, "P")?;
        let qr = self.div(m, j, b1, a0, "Q")?;
        let rr = self.div(m, j, cl1, cl_, "R")?;
        let sr = self.div(m, j, dk, dk1, "S")?;
        let sgn = self.p.one().sign(k);
        let num = qr * self.div(m, j, ek, ak, "A_k")? + sgn * pr * self.div(m, j, fk, bk, "B_k")?
            - sgn * sr * self.div(m, j, gk, ck, "C_k")?;
        self.div(m, j, num * dk, rr, "R")
    }

    fn assign_windows(&mut self, m: i64) -> Result<(), EngineError> {
        let width = self.width;
        let mut ids = vec![NO_WINDOW; width as usize];
        let mut fresh = vec![false; width as usize];
        for j in m..width - m {
            if !self.rows[m as usize][j as usize].is_zero() {
                continue;
            }
            let inherited = if m >= 1 && self.rows[m as usize - 1][j as usize].is_zero() {
                let id = self.win[m as usize - 1][j as usize];
                let w = &self.registry[id as usize];
                match w.side {
                    None => Some(id),
                    Some(l) if m < w.top + l => Some(id),
                    _ => None,
                }
            } else {
                None
            };
            match inherited {
                Some(id) => ids[j as usize] = id,
                None => fresh[j as usize] = true,
            }
        }
        let mut j = m;
        while j < width - m {
            if !fresh[j as usize] {
                j += 1;
                continue;
            }
            let a = j;
            while j < width - m && fresh[j as usize] {
                j += 1;
            }
            let b = j - 1;
            let left_open = a - 1 < m;
            let right_open = b + 1 >= width - m;
            for edge in [a - 1, b + 1] {
                if edge >= m && edge < width - m && self.rows[m as usize][edge as usize].is_zero() {
                    return Err(self.inconsistent(m, edge, "new zero run touches a running window"));
                }
            }
            let id = self.registry.len() as u32;
            self.registry.push(OpenWindow {
                top: m,
                cl: a,
                cr: b,
                side: (!left_open && !right_open).then_some(b - a + 1),
            });
            for x in a..=b {
                ids[x as usize] = id;
            }
        }
        self.win.push(ids);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{cantor, cantor_tilde};
    use crate::toeplitz_oracle::oracle_wall;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn small_random_like_sequence_matches_oracle() {
        let p = pr(5);
        let s = Seq::from_ints(p, 0, &[1, 1, 3, 2, 1, 0, 0, 0, 2, 0, 2, 0]);
        let e = generate_wall(&s, default_max_row(&s)).unwrap();
        let o = oracle_wall(&s, default_max_row(&s));
        assert_eq!(e, o);
        assert_eq!(e.fallback_count(), 0);
    }

    #[test]
    fn padded_cantor_matches_oracle() {
        let p = pr(3);
        let s = cantor(p, 9).zero_pad_both(9).unwrap();
        let e = generate_wall(&s, default_max_row(&s)).unwrap();
        assert_eq!(e, oracle_wall(&s, default_max_row(&s)));
    }

    #[test]
    fn zero_sequence_is_one_window() {
        let p = pr(7);
        let s = Seq::zeros(p, 11).with_extensions(Extension::ZeroOutside, Extension::ZeroOutside);
        let w = generate_wall(&s, 5).unwrap();
        assert!(w.iter().filter(|&(m, _, _)| m >= 0).all(|(_, _, c)| c.is_zero()));
        assert_eq!(w.windows().len(), 1);
        assert_eq!(w.windows()[0].side, Side::Infinite);
        let cut = generate_wall(&Seq::zeros(p, 11), 5).unwrap();
        assert_eq!(cut.windows()[0].side, Side::Truncated);
    }

    #[test]
    fn ra_parameters_must_be_nonzero() {
        let p = pr(3);
        let s = cantor(p, 9);
        assert!(matches!(generate_ra_wall(&s, p.zero(), p.one(), 4), Err(EngineError::ZeroParameter)));
    }

    #[test]
    fn ratio_relation_on_tilde_cantor() {
        let p = pr(5);
        let s = cantor_tilde(p, 2);
        let w = generate_wall(&s, default_max_row(&s)).unwrap();
        let mut seen = 0;
        for rec in w.windows() {
            if let (Some(l), Some((pp, q, r, ss))) = (rec.side_len(), rec.pqrs()) {
                assert_eq!(pp * ss, q * r * p.one().sign(l as i64));
                seen += 1;
            }
        }
        assert!(seen > 10);
    }

    #[test]
    fn dump_round_trip() {
        let p = pr(3);
        let s = cantor_tilde(p, 1);
        let w = generate_wall(&s, default_max_row(&s)).unwrap();
        let mut buf = Vec::new();
        w.write_dump(&mut buf).unwrap();
        let back = Wall::read_dump(&buf[..]).unwrap();
        assert_eq!(back, w);
        buf[0] = b'X';
        assert!(Wall::read_dump(&buf[..]).is_err());
    }

    #[test]
    fn profile_text_round_trip() {
        let p = pr(3);
        let s = cantor(p, 9);
        let g = profile(&generate_wall(&s, 4).unwrap());
        let back = ProfileGrid::from_text(&g.to_text()).unwrap();
        assert_eq!(back, g.rebased_to_origin());
        assert!(g.to_text().lines().all(|l| l.len() == 9));
    }

    #[test]
    fn extract_region_bounds() {
        let p = pr(3);
        let w = generate_wall(&cantor(p, 9), 4).unwrap();
        let r = w.extract_region(0..2, 2..5).unwrap();
        assert_eq!(r.get(1, 3), w.get(1, 3));
        assert_eq!(r.get(2, 3), Cell::Undefined);
        assert!(w.extract_region(0..10, 0..3).is_err());
        let moved = r.rebased_to_origin();
        assert_eq!(moved.get(0, 0), w.get(0, 2));
        assert_eq!(moved.meta.offset, (0, -2));
    }
}
