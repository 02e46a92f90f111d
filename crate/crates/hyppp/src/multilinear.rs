//! Determinants, permanents, and Cayley's first hyperdeterminant.
//!
//! The hyperdeterminant of a 2M-way hypercubic array `A` of side N, with a
//! nonempty signancy set `K` of alternating direction pairs, is
//!
//! ```text
//! Det_K(A) = (1/N!) * sum over sigma_1..sigma_M, tau_1..tau_M in S_N of
//!            prod_{k in K} eps(sigma_k) eps(tau_k)
//!            * prod_n A(sigma_1(n)..sigma_M(n); tau_1(n)..tau_M(n))
//! ```
//!
//! Two evaluation paths are provided: [`hyperdet_direct`] enumerates all
//! `(N!)^(2M)` permutation tuples and serves as a trust anchor, while
//! [`hyperdet_factored`] uses the Cauchy-Binet-style expansion over column
//! subsets for arrays assembled from factor matrices, which is both fast and
//! manifestly nonnegative.

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, HypercubicArray};

/// The nonempty subset of direction pairs `{1..M}` that carry the alternating
/// sign. Members are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignancySet {
    m: usize,
    members: Vec<usize>,
}

impl SignancySet {
    pub fn new(m: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::InvalidSignancy("signancy set must be nonempty".into()));
        }
        if let Some(&bad) = members.iter().find(|&&k| k < 1 || k > m) {
            return Err(Error::InvalidSignancy(format!(
                "member {bad} outside 1..={m}"
            )));
        }
        Ok(SignancySet { m, members })
    }

    /// All direction pairs alternating: `K = {1..M}`.
    pub fn full(m: usize) -> Result<Self> {
        SignancySet::new(m, 1..=m)
    }

    /// Parses a comma-separated list of 1-based factor indices, e.g. `"1,3"`.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let members = text
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSignancy(format!("cannot parse index {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SignancySet::new(m, members)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sorted 1-based members.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    /// Removes the last factor M, shrinking the universe to `{1..M-1}`.
    /// Fails when the remainder would be empty or there is no factor to drop.
    pub fn drop_last_factor(&self) -> Result<SignancySet> {
        if self.m < 2 {
            return Err(Error::InvalidSignancy(
                "cannot drop a factor from a single-factor set".into(),
            ));
        }
        let kept: Vec<usize> = self.members.iter().copied().filter(|&k| k != self.m).collect();
        if kept.is_empty() {
            return Err(Error::InvalidSignancy(
                "dropping the last factor would leave the signancy set empty".into(),
            ));
        }
        SignancySet::new(self.m - 1, kept)
    }
}

/// n! as a float; exact for the small n used here.
pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient C(n, k) as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Compensated (Kahan) accumulator for long alternating sums.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Sums by recursive halving; the reduction tree is fixed by the slice order,
/// so results do not depend on thread count or chunking.
pub(crate) fn tree_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len => {
            let mid = len / 2;
            tree_sum_f64(&xs[..mid]) + tree_sum_f64(&xs[mid..])
        }
    }
}

pub(crate) fn tree_sum_complex(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        len => {
            let mid = len / 2;
            tree_sum_complex(&xs[..mid]) + tree_sum_complex(&xs[mid..])
        }
    }
}

/// All permutations of `{0..n-1}` in lexicographic order, paired with their
/// signs.
pub(crate) fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, f64)> {
    (0..n)
        .permutations(n)
        .map(|p| {
            let sign = permutation_sign(&p);
            (p, sign)
        })
        .collect()
}

pub(crate) fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant by LU factorization with partial pivoting.
///
/// The pivoting permutation's sign is tracked exactly; the 0x0 determinant is 1.
pub fn det(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "determinant needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut lu: Vec<Complex64> = a.entries().to_vec();
    let mut result = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot_row = col;
        let mut best = lu[col * n + col].norm_sqr();
        for r in col + 1..n {
            let cand = lu[r * n + col].norm_sqr();
            if cand > best {
                best = cand;
                pivot_row = r;
            }
        }
        if best == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot_row != col {
            for c in 0..n {
                lu.swap(col * n + c, pivot_row * n + c);
            }
            result = -result;
        }
        let pivot = lu[col * n + col];
        result *= pivot;
        for r in col + 1..n {
            let factor = lu[r * n + col] / pivot;
            lu[r * n + col] = factor;
            for c in col + 1..n {
                let sub = factor * lu[col * n + c];
                lu[r * n + c] -= sub;
            }
        }
    }
    Ok(result)
}

/// Permanent by Ryser's inclusion-exclusion with Gray-code subset iteration,
/// `O(2^N * N)` arithmetic. The 0x0 permanent is 1.
pub fn permanent(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "permanent needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n > 62 {
        return Err(Error::TooLarge(format!("permanent of side {n} is infeasible")));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut subset_size = 0u32;
    for k in 1u64..(1u64 << n) {
        // gray(k) and gray(k-1) differ exactly in bit tz(k)
        let flipped = k.trailing_zeros() as usize;
        let added = (k ^ (k >> 1)) >> flipped & 1 == 1;
        if added {
            subset_size += 1;
            for (r, s) in row_sums.iter_mut().enumerate() {
                *s += a.get(r, flipped);
            }
        } else {
            subset_size -= 1;
            for (r, s) in row_sums.iter_mut().enumerate() {
                *s -= a.get(r, flipped);
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if subset_size % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(total * sign)
}

/// Hyperdeterminant by full permutation-tuple enumeration, `(N!)^(2M)` terms.
///
/// This is the definition transcribed literally; it exists as a trust anchor
/// for the expansion path and is only feasible for small N and M.
pub fn hyperdet_direct(a: &HypercubicArray, signancy: &SignancySet) -> Result<Complex64> {
    if signancy.m() != a.m() {
        return Err(Error::Shape(format!(
            "signancy set over {} factors, array has {}",
            signancy.m(),
            a.m()
        )));
    }
    let n = a.n();
    let m = a.m();
    if factorial(n).powi(2 * m as i32) > 1e8 {
        return Err(Error::TooLarge(format!(
            "direct evaluation needs ({n}!)^{} permutation tuples",
            2 * m
        )));
    }
    let perms = permutations_with_sign(n);
    let count = perms.len();
    // odometer over 2M permutation choices: slots 0..M are sigma, M..2M are tau
    let mut choice = vec![0usize; 2 * m];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut i_idx = vec![0usize; m];
    let mut j_idx = vec![0usize; m];
    loop {
        let mut sign = 1.0;
        for k in signancy.members() {
            sign *= perms[choice[k - 1]].1 * perms[choice[m + k - 1]].1;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for slot in 0..n {
            for f in 0..m {
                i_idx[f] = perms[choice[f]].0[slot];
                j_idx[f] = perms[choice[m + f]].0[slot];
            }
            prod *= a.at0(&i_idx, &j_idx);
        }
        sum += prod * sign;

        let mut pos = 2 * m;
        loop {
            if pos == 0 {
                return Ok(sum / factorial(n));
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < count {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Hyperdeterminant of a factored array, evaluated without materializing it:
///
/// ```text
/// Det_K(A) = sum over size-N column subsets S of {1..L} of
///            prod_{k in K} |det(F_k[S])|^2 * prod_{k not in K} |per(F_k[S])|^2
/// ```
///
/// where `F_k[S]` keeps the columns of the k-th factor indexed by S. The value
/// is 0 when `L < N` and a sum of squared moduli otherwise, hence real and
/// nonnegative. Subset terms are evaluated in parallel and reduced by a fixed
/// pairwise tree over the lexicographic subset order, so the result is
/// independent of thread count.
pub fn hyperdet_factored(factors: &[ComplexMatrix], signancy: &SignancySet) -> Result<f64> {
    let m = factors.len();
    if m != signancy.m() {
        return Err(Error::Shape(format!(
            "signancy set over {} factors, got {m} factor matrices",
            signancy.m()
        )));
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
    if l < n {
        return Ok(0.0);
    }
    let subsets: Vec<Vec<usize>> = (0..l).combinations(n).collect();
    let term = |cols: &Vec<usize>| -> f64 {
        let mut t = 1.0;
        for k in 1..=m {
            let sub = factors[k - 1].column_submatrix(cols);
            let v = if signancy.contains(k) {
                det(&sub)
            } else {
                permanent(&sub)
            };
            t *= v.expect("submatrix is square by construction").norm_sqr();
        }
        t
    };
    let terms: Vec<f64> = if subsets.len() >= 64 {
        subsets.par_iter().map(term).collect()
    } else {
        subsets.iter().map(term).collect()
    };
    Ok(tree_sum_f64(&terms).max(0.0))
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Works on the real symmetric 2n x 2n embedding `[[Re A, -Im A], [Im A, Re A]]`
/// (each eigenvalue of A appears twice there) with cyclic Jacobi rotations.
/// Mild departures from Hermitian symmetry are averaged away.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = 2 * n;
    let mut e = vec![0.0f64; dim * dim];
    for r in 0..n {
        for c in 0..n {
            let v = a.get(r, c);
            e[r * dim + c] = v.re;
            e[r * dim + (n + c)] = -v.im;
            e[(n + r) * dim + c] = v.im;
            e[(n + r) * dim + (n + c)] = v.re;
        }
    }
    for r in 0..dim {
        for c in r + 1..dim {
            let avg = 0.5 * (e[r * dim + c] + e[c * dim + r]);
            e[r * dim + c] = avg;
            e[c * dim + r] = avg;
        }
    }
    let mut evs = jacobi_symmetric_eigenvalues(&mut e, dim);
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // the embedding doubles every eigenvalue; keep one of each adjacent pair
    Ok(evs.into_iter().step_by(2).collect())
}

fn jacobi_symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let scale: f64 = (0..n)
        .map(|i| a[i * n + i].abs())
        .fold(1.0f64, f64::max);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
