//! Sequences over F_p with explicit index windows, automatic sequences and
//! formal power series in t^-1.

use std::fmt::Write as _;

use thiserror::Error;

use crate::finite_field::{binom, binomial, FieldError, Fp, HalfInt, Prime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("seed letter {0} is not prolongable (its image does not start with it)")]
    NotProlongable(usize),
    #[error("morphism image for letter {letter} has length {len}, expected {expected}")]
    NonUniform { letter: usize, len: usize, expected: usize },
    #[error("letter {letter} outside alphabet of size {size}")]
    BadLetter { letter: usize, size: usize },
    #[error("operation needs a finite sequence but a side extends with zeros forever")]
    Infinite,
    #[error("leading coefficient s_0 is zero, the series is not invertible")]
    ZeroLeading,
    #[error("entry {0} is not defined")]
    Undefined(i64),
    #[error("zero ratio cannot be raised to the negative index {0}")]
    ZeroRatio(i64),
    #[error("sequences live in different fields")]
    ModulusMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A wall or sequence entry: a residue, or unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Known(Fp),
    Undefined,
}

impl Cell {
    pub fn known(self) -> Option<Fp> {
        match self {
            Cell::Known(v) => Some(v),
            Cell::Undefined => None,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Cell::Known(v) if v.is_zero())
    }

    pub fn is_nonzero(self) -> bool {
        matches!(self, Cell::Known(v) if !v.is_zero())
    }
}

/// What a sequence looks like beyond its stored window on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extension {
    ZeroOutside,
    UndefinedOutside,
}

/// Values on `[lo, lo + len)`; outside that window each side follows its `Extension`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seq {
    p: Prime,
    lo: i64,
    values: Vec<Fp>,
    left: Extension,
    right: Extension,
}

impl Seq {
    pub fn new(p: Prime, lo: i64, values: Vec<Fp>) -> Self {
        debug_assert!(values.iter().all(|v| v.modulus() == p));
        Seq { p, lo, values, left: Extension::UndefinedOutside, right: Extension::UndefinedOutside }
    }

    pub fn from_ints(p: Prime, lo: i64, values: &[i64]) -> Self {
        Seq::new(p, lo, values.iter().map(|&x| p.elem(x)).collect())
    }

    /// Letters of an alphabet embedded in Γ_p as residues.
    pub fn from_letters(p: Prime, lo: i64, letters: &[usize]) -> Self {
        Seq::new(p, lo, letters.iter().map(|&l| p.elem_u(l as u64)).collect())
    }

    pub fn zeros(p: Prime, len: usize) -> Self {
        Seq::new(p, 0, vec![p.zero(); len])
    }

    pub fn with_extensions(mut self, left: Extension, right: Extension) -> Self {
        self.left = left;
        self.right = right;
        self
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// One past the last stored index.
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Fp] {
        &self.values
    }

    pub fn left(&self) -> Extension {
        self.left
    }

    pub fn right(&self) -> Extension {
        self.right
    }

    pub fn get(&self, i: i64) -> Cell {
        if i < self.lo {
            match self.left {
                Extension::ZeroOutside => Cell::Known(self.p.zero()),
                Extension::UndefinedOutside => Cell::Undefined,
            }
        } else if i >= self.hi() {
            match self.right {
                Extension::ZeroOutside => Cell::Known(self.p.zero()),
                Extension::UndefinedOutside => Cell::Undefined,
            }
        } else {
            Cell::Known(self.values[(i - self.lo) as usize])
        }
    }

    /// Stored value at `i`, panicking outside the window. For tests and formulas.
    pub fn at(&self, i: i64) -> Fp {
        self.get(i).known().unwrap_or_else(|| panic!("entry {i} undefined"))
    }

    /// Residues as plain integers.
    pub fn residues(&self) -> Vec<u64> {
        self.values.iter().map(|v| v.value()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.left == Extension::UndefinedOutside && self.right == Extension::UndefinedOutside
    }

    /// Same values, shifted so the first stored index is `lo`.
    pub fn reindexed(&self, lo: i64) -> Seq {
        Seq { lo, ..self.clone() }
    }

    /// The sub-window `[from, to)`, entries outside the stored window follow the extensions.
    pub fn slice(&self, from: i64, to: i64) -> Result<Seq, SeqError> {
        let values = (from..to)
            .map(|i| self.get(i).known().ok_or(SeqError::Undefined(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Seq::new(self.p, from, values))
    }

    /// The (r,a)-geometric transform: entry i becomes a * r^i * s_i.
    pub fn geometric_transform(&self, r: Fp, a: Fp) -> Result<Seq, SeqError> {
        if self.lo < 0 && r.is_zero() {
            return Err(SeqError::ZeroRatio(self.lo));
        }
        let mut values = Vec::with_capacity(self.values.len());
        let mut w = a * r.pow_i(self.lo)?;
        for &v in &self.values {
            values.push(w * v);
            w *= r;
        }
        Ok(Seq { values, ..self.clone() })
    }

    /// Finite reversal on the same index window.
    pub fn reversed(&self) -> Result<Seq, SeqError> {
        if !self.is_finite() {
            return Err(SeqError::Infinite);
        }
        let mut values = self.values.clone();
        values.reverse();
        Ok(Seq { values, ..self.clone() })
    }

    /// Concatenation; the result starts at `self.lo`.
    pub fn concat(&self, other: &Seq) -> Result<Seq, SeqError> {
        if self.p != other.p {
            return Err(SeqError::ModulusMismatch);
        }
        if self.right == Extension::ZeroOutside || other.left == Extension::ZeroOutside {
            return Err(SeqError::Infinite);
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Seq { p: self.p, lo: self.lo, values, left: self.left, right: other.right })
    }

    /// `k` zeros, then the sequence, then `k` zeros, indexed from 0.
    pub fn zero_pad_both(&self, k: usize) -> Result<Seq, SeqError> {
        let z = Seq::zeros(self.p, k);
        z.concat(self)?.concat(&z)
    }

    /// Left extension by zeros: entries before `lo` become 0.
    pub fn left_zero_extend(&self) -> Seq {
        Seq { left: Extension::ZeroOutside, ..self.clone() }
    }

    /// Plain-text form: a header line and one line of residues.
    pub fn to_text(&self) -> String {
        let mut out = format!("p={} lo={}\n", self.p, self.lo);
        let body: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        out.push_str(&body.join(" "));
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Seq, SeqError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| SeqError::Parse("empty input".into()))?;
        let mut p = None;
        let mut lo = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("p", v)) => p = v.parse::<u64>().ok(),
                Some(("lo", v)) => lo = v.parse::<i64>().ok(),
                _ => return Err(SeqError::Parse(format!("unexpected header token {tok:?}"))),
            }
        }
        let p = Prime::new(p.ok_or_else(|| SeqError::Parse("missing p".into()))?)?;
        let lo = lo.ok_or_else(|| SeqError::Parse("missing lo".into()))?;
        let mut values = Vec::new();
        for line in lines {
            for tok in line.split_whitespace() {
                let v: u64 = tok.parse().map_err(|_| SeqError::Parse(format!("bad residue {tok:?}")))?;
                if v >= p.get() {
                    return Err(SeqError::Parse(format!("residue {v} not below p={p}")));
                }
                values.push(p.from_residue(v));
            }
        }
        Ok(Seq::new(p, lo, values))
    }

    /// Residues run together, e.g. "1030301". Only meaningful for p <= 11.
    pub fn digits(&self) -> String {
        let mut s = String::with_capacity(self.values.len());
        for v in &self.values {
            let _ = write!(s, "{}", v.value());
        }
        s
    }
}

/// A uniform k-morphism on the alphabet {0, .., n-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism1D {
    k: usize,
    images: Vec<Vec<usize>>,
}

impl Morphism1D {
    pub fn new(images: Vec<Vec<usize>>) -> Result<Self, SeqError> {
        let k = images.first().map_or(0, Vec::len);
        let size = images.len();
        for (letter, img) in images.iter().enumerate() {
            if img.len() != k || k == 0 {
                return Err(SeqError::NonUniform { letter, len: img.len(), expected: k.max(1) });
            }
            if let Some(&bad) = img.iter().find(|&&x| x >= size) {
                return Err(SeqError::BadLetter { letter: bad, size });
            }
        }
        Ok(Morphism1D { k, images })
    }

    pub fn factor(&self) -> usize {
        self.k
    }

    pub fn alphabet_size(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, letter: usize) -> &[usize] {
        &self.images[letter]
    }

    pub fn apply(&self, word: &[usize]) -> Vec<usize> {
        word.iter().flat_map(|&l| self.images[l].iter().copied()).collect()
    }

    /// First `len` letters of the fixed point starting with `seed`.
    pub fn fixed_point(&self, seed: usize, len: usize) -> Result<Vec<usize>, SeqError> {
        if seed >= self.images.len() {
            return Err(SeqError::BadLetter { letter: seed, size: self.images.len() });
        }
        if self.images[seed][0] != seed {
            return Err(SeqError::NotProlongable(seed));
        }
        let mut word = vec![seed];
        if self.k == 1 {
            return Ok(vec![seed; len]);
        }
        // Expand only the prefix that maps onto the first `len` letters.
        while word.len() < len {
            let need = len.div_ceil(self.k).min(word.len());
            word = self.apply(&word[..need]);
        }
        word.truncate(len);
        Ok(word)
    }
}

/// A uniform d-coding from letters to words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coding1D {
    d: usize,
    images: Vec<Vec<usize>>,
}

impl Coding1D {
    pub fn new(images: Vec<Vec<usize>>) -> Result<Self, SeqError> {
        let d = images.first().map_or(0, Vec::len);
        for (letter, img) in images.iter().enumerate() {
            if img.len() != d || d == 0 {
                return Err(SeqError::NonUniform { letter, len: img.len(), expected: d.max(1) });
            }
        }
        Ok(Coding1D { d, images })
    }

    pub fn factor(&self) -> usize {
        self.d
    }

    pub fn apply(&self, word: &[usize]) -> Vec<usize> {
        word.iter().flat_map(|&l| self.images[l].iter().copied()).collect()
    }
}

fn scaled_images(p: Prime, k: usize, base: impl Fn(usize) -> Fp) -> Vec<Vec<usize>> {
    let row: Vec<Fp> = (0..k).map(base).collect();
    p.elements().map(|n| row.iter().map(|&b| (n * b).value() as usize).collect()).collect()
}

/// φ_p(n)_i = n * binom(p_2, i/2), the morphism behind the p-Cantor sequence.
pub fn cantor_morphism(p: Prime) -> Morphism1D {
    let p2 = p.half() as i64;
    let imgs = scaled_images(p, p.get() as usize, |i| binomial(HalfInt::int(p2), HalfInt::new(i as i64, 2), p));
    Morphism1D::new(imgs).expect("uniform by construction")
}

/// φ'_p(n)_i = n * binom(p_2, i), generating the pseudo p-Singer sequence.
pub fn pseudo_singer_morphism(p: Prime) -> Morphism1D {
    let p2 = p.half();
    let imgs = scaled_images(p, p.get() as usize, |i| binom(p2, i as u64, p));
    Morphism1D::new(imgs).expect("uniform by construction")
}

/// τ_p(n)_i = n * binom(p_2 + 1, i/2) for 0 <= i < 2p.
pub fn singer_coding(p: Prime) -> Coding1D {
    let p2 = p.half() as i64;
    let imgs = scaled_images(p, 2 * p.get() as usize, |i| {
        binomial(HalfInt::int(p2 + 1), HalfInt::new(i as i64, 2), p)
    });
    Coding1D::new(imgs).expect("uniform by construction")
}

/// Prefix of length `len` of the p-Cantor sequence, indexed from 0.
pub fn cantor(p: Prime, len: usize) -> Seq {
    let letters = cantor_morphism(p).fixed_point(1, len).expect("1 is prolongable");
    Seq::from_letters(p, 0, &letters)
}

/// Prefix of the pseudo p-Singer sequence (the fixed point of φ'_p).
pub fn pseudo_singer(p: Prime, len: usize) -> Seq {
    let letters = pseudo_singer_morphism(p).fixed_point(1, len).expect("1 is prolongable");
    Seq::from_letters(p, 0, &letters)
}

/// Prefix of length `len` of the p-Singer sequence.
pub fn singer(p: Prime, len: usize) -> Seq {
    let coding = singer_coding(p);
    let pseudo = pseudo_singer_morphism(p).fixed_point(1, len.div_ceil(coding.factor())).expect("1 is prolongable");
    let mut letters = coding.apply(&pseudo);
    letters.truncate(len);
    Seq::from_letters(p, 0, &letters)
}

/// C_h: the first p^h Cantor terms.
pub fn cantor_block(p: Prime, h: u32) -> Seq {
    cantor(p, p.get().pow(h) as usize)
}

/// S_h: the first p^h + 2 Singer terms.
pub fn singer_block(p: Prime, h: u32) -> Seq {
    singer(p, p.get().pow(h) as usize + 2)
}

/// C̃_h: p^h zeros, C_h, p^h zeros, indexed from 0.
pub fn cantor_tilde(p: Prime, h: u32) -> Seq {
    cantor_block(p, h).zero_pad_both(p.get().pow(h) as usize).expect("finite")
}

fn series_coeffs(s: &Seq, len: usize) -> Result<Vec<Fp>, SeqError> {
    (0..len as i64).map(|i| s.get(i).known().ok_or(SeqError::Undefined(i))).collect()
}

/// Coefficients u of 1 / (Σ s_i t^-i), up to t^-(len-1).
pub fn laurent_inverse(s: &Seq, len: usize) -> Result<Seq, SeqError> {
    let p = s.prime();
    let c = series_coeffs(s, len)?;
    if len == 0 {
        return Ok(Seq::new(p, 0, vec![]));
    }
    let inv0 = c[0].inv().map_err(|_| SeqError::ZeroLeading)?;
    let mut u = Vec::with_capacity(len);
    u.push(inv0);
    for m in 1..len {
        let mut acc = p.zero();
        for j in 1..=m {
            acc += c[j] * u[m - j];
        }
        u.push(-acc * inv0);
    }
    Ok(Seq::new(p, 0, u))
}

/// Truncated product of two series in t^-1, both read from index 0.
pub fn series_mul(a: &Seq, b: &Seq, len: usize) -> Result<Seq, SeqError> {
    if a.prime() != b.prime() {
        return Err(SeqError::ModulusMismatch);
    }
    let p = a.prime();
    let x = series_coeffs(a, len)?;
    let y = series_coeffs(b, len)?;
    let mut out = vec![p.zero(); len];
    for (i, &xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, &yj) in y[..len - i].iter().enumerate() {
            out[i + j] += xi * yj;
        }
    }
    Ok(Seq::new(p, 0, out))
}

/// Θ_p: the series whose coefficients are the p-Cantor sequence.
pub fn theta(p: Prime, len: usize) -> Seq {
    cantor(p, len)
}

/// Ξ_p: the series whose coefficients are the p-Singer sequence.
pub fn xi(p: Prime, len: usize) -> Seq {
    singer(p, len)
}

/// 1 + t^-2 truncated to `len` terms.
pub fn one_plus_t_minus_2(p: Prime, len: usize) -> Seq {
    let mut v = vec![p.zero(); len];
    if len > 0 {
        v[0] = p.one();
    }
    if len > 2 {
        v[2] = p.one();
    }
    Seq::new(p, 0, v)
}
