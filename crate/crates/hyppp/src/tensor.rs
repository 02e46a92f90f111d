//! Dense complex containers: matrices and 2M-way hypercubic arrays.
//!
//! A [`HypercubicArray`] holds a complex array with `2M` directions of common
//! side length `N`, addressed as `(i_1..i_M; j_1..j_M)`. Directions come in
//! `(i, j)` pairs and indices on the public surface are 1-based, matching the
//! usual mathematical notation; storage is flat and 0-based, `i`-indices
//! major, `j`-indices minor, each block row-major.

use num_complex::Complex64;
use serde::de::Error as SerdeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
///
/// This is a plumbing container: indices here are 0-based and accessors
/// assert rather than return errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix entry by entry. Panics if `f` produces a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = f(r, c);
                assert!(
                    v.re.is_finite() && v.im.is_finite(),
                    "non-finite matrix entry at ({r},{c})"
                );
                entries.push(v);
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    /// Builds a matrix from nested rows, validating rectangularity and finiteness.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Shape(format!(
                    "row {r} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (c, v) in row.iter().enumerate() {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFinite(format!("matrix entry ({r},{c})")));
                }
                entries.push(*v);
            }
        }
        Ok(ComplexMatrix {
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// The square submatrix keeping all rows and only the listed columns
    /// (0-based, in the given order).
    pub fn column_submatrix(&self, cols: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, cols.len(), |r, c| self.get(r, cols[c]))
    }

    /// The principal submatrix on the listed row/column indices (0-based).
    pub fn principal_submatrix(&self, idx: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| self.get(idx[r], idx[c]))
    }

    /// Scales every entry by `factor`.
    pub fn scaled(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * factor)
    }

    /// Max entrywise deviation from the conjugate transpose.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols.min(self.rows) {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }
}

/// A 2M-way complex array of common side length N.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubicArray {
    m: usize,
    n: usize,
    entries: Vec<Complex64>,
}

impl HypercubicArray {
    /// Builds from a flat entry list in storage order. The list must have
    /// exactly `n^(2m)` finite entries.
    pub fn from_entries(m: usize, n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if m < 1 {
            return Err(Error::Argument("factor count M must be >= 1".into()));
        }
        if n < 1 {
            return Err(Error::Argument("side length N must be >= 1".into()));
        }
        let expected = n
            .checked_pow(2 * m as u32)
            .ok_or_else(|| Error::TooLarge(format!("N^(2M) overflows for N={n}, M={m}")))?;
        if entries.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} entries for N={n}, M={m}, got {}",
                entries.len()
            )));
        }
        for (i, v) in entries.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(format!("array entry {i}")));
            }
        }
        Ok(HypercubicArray { m, n, entries })
    }

    /// Builds entry by entry; `f` receives 0-based index slices `(i, j)` of
    /// length M each.
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(&[usize], &[usize]) -> Complex64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Argument("factor count M must be >= 1".into()));
        }
        if n < 1 {
            return Err(Error::Argument("side length N must be >= 1".into()));
        }
        let total = n
            .checked_pow(2 * m as u32)
            .ok_or_else(|| Error::TooLarge(format!("N^(2M) overflows for N={n}, M={m}")))?;
        let mut entries = Vec::with_capacity(total);
        let mut digits = vec![0usize; 2 * m];
        loop {
            let v = f(&digits[..m], &digits[m..]);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(format!("array entry at {digits:?}")));
            }
            entries.push(v);
            // odometer, last digit fastest
            let mut pos = 2 * m;
            loop {
                if pos == 0 {
                    return HypercubicArray::from_entries(m, n, entries);
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < n {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Factor count M (the array has 2M directions).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Common side length N.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Reads the entry at a 2M-tuple of 1-based indices `(i_1..i_M, j_1..j_M)`.
    pub fn get(&self, idx: &[usize]) -> Result<Complex64> {
        if idx.len() != 2 * self.m {
            return Err(Error::Index(format!(
                "expected {} indices, got {}",
                2 * self.m,
                idx.len()
            )));
        }
        let mut flat = 0usize;
        for (pos, &i) in idx.iter().enumerate() {
            if i < 1 || i > self.n {
                return Err(Error::Index(format!(
                    "index {i} at position {pos} outside 1..={}",
                    self.n
                )));
            }
            flat = flat * self.n + (i - 1);
        }
        Ok(self.entries[flat])
    }

    /// 0-based unchecked read used by the evaluators; `i` and `j` are slices
    /// of length M.
    #[inline]
    pub(crate) fn at0(&self, i: &[usize], j: &[usize]) -> Complex64 {
        let mut flat = 0usize;
        for &d in i.iter().chain(j.iter()) {
            flat = flat * self.n + d;
        }
        self.entries[flat]
    }

    /// Builds the array `A(i_1..i_M; j_1..j_M) = sum_l prod_m F_m(i_m, l) * conj(F_m(j_m, l))`
    /// from M factor matrices of common shape N x L.
    pub fn from_factored(factors: &[ComplexMatrix]) -> Result<Self> {
        let m = factors.len();
        if m < 1 {
            return Err(Error::Argument("need at least one factor matrix".into()));
        }
        let n = factors[0].rows();
        let l = factors[0].cols();
        for (idx, f) in factors.iter().enumerate() {
            if f.rows() != n || f.cols() != l {
                return Err(Error::Shape(format!(
                    "factor {idx} is {}x{}, expected {n}x{l}",
                    f.rows(),
                    f.cols()
                )));
            }
        }
        HypercubicArray::from_fn(m, n, |i, j| {
            let mut sum = Complex64::new(0.0, 0.0);
            for ell in 0..l {
                let mut prod = Complex64::new(1.0, 0.0);
                for (f, factor) in factors.iter().enumerate() {
                    prod *= factor.get(i[f], ell) * factor.get(j[f], ell).conj();
                }
                sum += prod;
            }
            sum
        })
    }
}

// ---------------------------------------------------------------------------
// JSON: complex numbers as [re, im]; matrices as nested row-major lists;
// arrays as {"m", "n", "entries"} with a flat list in storage order.
// ---------------------------------------------------------------------------

pub(crate) fn pairs_from_matrix(m: &ComplexMatrix) -> Vec<Vec<(f64, f64)>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| (m.get(r, c).re, m.get(r, c).im)).collect())
        .collect()
}

pub(crate) fn matrix_from_pairs(rows: &[Vec<(f64, f64)>]) -> Result<ComplexMatrix> {
    let converted: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|row| row.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&converted)
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        pairs_from_matrix(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<(f64, f64)>>::deserialize(deserializer)?;
        matrix_from_pairs(&rows).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ArrayJson {
    m: usize,
    n: usize,
    entries: Vec<(f64, f64)>,
}

impl Serialize for HypercubicArray {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ArrayJson {
            m: self.m,
            n: self.n,
            entries: self.entries.iter().map(|v| (v.re, v.im)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HypercubicArray {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ArrayJson::deserialize(deserializer)?;
        let entries = raw.entries.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        HypercubicArray::from_entries(raw.m, raw.n, entries).map_err(D::Error::custom)
    }
}
