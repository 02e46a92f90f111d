//! Factorial moments of the point count in a product set and the
//! distributions they determine.
//!
//! For a product set `C = C_1 x ... x C_M`, [`factorial_moment`] evaluates
//! the closed-form subset sum
//!
//! ```text
//! N! * sum over size-N subsets S of {1..L} of
//!      prod_{k in K} det(H_k[S]) * prod_{k not in K} per(H_k[S]),
//! ```
//!
//! where `H_k[S]` is the principal submatrix of the L x L restriction matrix
//! `H_k(l, l') = sum_{y in C_k} w_k(y) psi_{k,l}(y) conj(psi_{k,l'}(y))` on
//! rows and columns S. In the single-factor determinantal case this is
//! provably the N-th factorial moment `E[J_C (J_C-1) ... (J_C-N+1)]` of the
//! count `J_C` of configuration points falling in C, the moments m_1..m_L
//! determine the law of `J_C` on `{0..L}` by finite inversion, and the count
//! is also a sum of independent Bernoulli variables with the eigenvalues of
//! `H_1` as success probabilities. For several factors the identification
//! with the enumerated count law does not survive (see the acceptance
//! suite); the full set `C = Sigma` is the exception, where the sum collapses
//! to the falling factorial of L for every M.

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hdpp::ProcessSpec;
use crate::kernel::{GroundSpace, OrthonormalSystem};
use crate::multilinear::{
    det, factorial, hermitian_eigenvalues, permanent, tree_sum_complex, KahanSum,
};
use crate::tensor::ComplexMatrix;

/// Per-factor point subsets `C_m ⊆ {1..S_m}`, stored sorted and deduplicated
/// (1-based, possibly empty or full).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSet {
    per_factor: Vec<Vec<usize>>,
}

impl ProductSet {
    pub fn new(per_factor: Vec<Vec<usize>>) -> Self {
        let per_factor = per_factor
            .into_iter()
            .map(|mut subset| {
                subset.sort_unstable();
                subset.dedup();
                subset
            })
            .collect();
        ProductSet { per_factor }
    }

    /// The full product set of a space.
    pub fn full(space: &GroundSpace) -> Self {
        ProductSet::new(space.sizes().iter().map(|&s| (1..=s).collect()).collect())
    }

    pub fn factor_count(&self) -> usize {
        self.per_factor.len()
    }

    /// The subset of factor `m` (1-based).
    pub fn factor_subset(&self, m: usize) -> &[usize] {
        &self.per_factor[m - 1]
    }

    pub fn validate_for(&self, space: &GroundSpace) -> Result<()> {
        if self.per_factor.len() != space.factor_count() {
            return Err(Error::Shape(format!(
                "product set over {} factors, space has {}",
                self.per_factor.len(),
                space.factor_count()
            )));
        }
        for (m0, subset) in self.per_factor.iter().enumerate() {
            if let Some(&bad) = subset.iter().find(|&&s| s < 1 || s > space.sizes()[m0]) {
                return Err(Error::Index(format!(
                    "point {bad} outside 1..={} in factor {}",
                    space.sizes()[m0],
                    m0 + 1
                )));
            }
        }
        Ok(())
    }

    /// Whether a full point (1-based M-tuple) lies in the product set.
    pub fn contains_point(&self, point: &[usize]) -> bool {
        point
            .iter()
            .zip(self.per_factor.iter())
            .all(|(s, subset)| subset.binary_search(s).is_ok())
    }
}

/// The L x L restriction matrix of factor `m` to the subset `c_m`:
/// `H(l, l') = sum_{y in c_m} w_m(y) psi_{m,l}(y) conj(psi_{m,l'}(y))`.
///
/// Hermitian and positive semidefinite with spectrum in `[0, 1]`.
pub fn h_matrix(sys: &OrthonormalSystem, m: usize, c_m: &[usize]) -> Result<ComplexMatrix> {
    if m < 1 || m > sys.factor_count() {
        return Err(Error::Index(format!(
            "factor {m} outside 1..={}",
            sys.factor_count()
        )));
    }
    let s_m = sys.space().size(m);
    if let Some(&bad) = c_m.iter().find(|&&s| s < 1 || s > s_m) {
        return Err(Error::Index(format!("point {bad} outside 1..={s_m} in factor {m}")));
    }
    let l = sys.l();
    Ok(ComplexMatrix::from_fn(l, l, |r, c| {
        let mut sum = Complex64::new(0.0, 0.0);
        for &y in c_m {
            sum += sys.space().weight(m, y)
                * sys.psi_value(m, y, r + 1)
                * sys.psi_value(m, y, c + 1).conj();
        }
        sum
    }))
}

/// The order-N subset sum `N! * sum_S prod_k det/per(H_k[S])` over size-N
/// principal submatrices; for a single factor this is the N-th factorial
/// moment `E[J_C (J_C-1) ... (J_C-N+1)]` of the count of points falling in
/// `c`. Subset terms are reduced by a fixed pairwise tree, and the (tiny)
/// imaginary residue of the sum is discarded.
pub fn factorial_moment(spec: &ProcessSpec, c: &ProductSet, n: usize) -> Result<f64> {
    let l = spec.l();
    if n < 1 || n > l {
        return Err(Error::Argument(format!("moment order {n} outside 1..={l}")));
    }
    c.validate_for(spec.sys().space())?;
    let m = spec.factor_count();
    let h: Vec<ComplexMatrix> = (1..=m)
        .map(|f| h_matrix(spec.sys(), f, c.factor_subset(f)))
        .collect::<Result<Vec<_>>>()?;
    let subsets: Vec<Vec<usize>> = (0..l).combinations(n).collect();
    let term = |rows: &Vec<usize>| -> Complex64 {
        let mut t = Complex64::new(1.0, 0.0);
        for k in 1..=m {
            let sub = h[k - 1].principal_submatrix(rows);
            let v = if spec.signancy().contains(k) {
                det(&sub)
            } else {
                permanent(&sub)
            };
            t *= v.expect("principal submatrix is square");
        }
        t
    };
    let terms: Vec<Complex64> = if subsets.len() >= 64 {
        subsets.par_iter().map(term).collect()
    } else {
        subsets.iter().map(term).collect()
    };
    let sum = tree_sum_complex(&terms);
    // dets and permanents of Hermitian principal submatrices are real
    debug_assert!(sum.im.abs() <= 1e-9 * (1.0 + sum.re.abs()));
    Ok(sum.re * factorial(n))
}

/// Probability mass function of a count on `{0..L}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountPMF {
    probs: Vec<f64>,
}

impl CountPMF {
    /// Validates nonnegativity (clamping round-off above -1e-12) and unit
    /// total mass within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut clamped = Vec::with_capacity(probs.len());
        for (j, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite(format!("pmf entry {j}")));
            }
            if p < -1e-12 {
                return Err(Error::Argument(format!("pmf entry {j} is {p:.3e} < 0")));
            }
            clamped.push(p.max(0.0));
        }
        let mass: f64 = clamped.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("pmf mass is {mass}, expected 1")));
        }
        Ok(CountPMF { probs: clamped })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest supported value (the PMF lives on `{0..max_count}`).
    pub fn max_count(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }

    /// The k-th factorial moment `sum_j j(j-1)...(j-k+1) p_j` of this law.
    pub fn factorial_moment(&self, k: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(j, p)| falling_factorial(j, k) * p)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &CountPMF) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        (0..len)
            .map(|j| {
                (self.probs.get(j).copied().unwrap_or(0.0)
                    - other.probs.get(j).copied().unwrap_or(0.0))
                .abs()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn falling_factorial(j: usize, k: usize) -> f64 {
    if k > j {
        return 0.0;
    }
    ((j - k + 1)..=j).fold(1.0, |acc, v| acc * v as f64)
}

/// Recovers the law on `{0..L}` from its factorial moments `m_1..m_L`
/// (`moments[k-1]` is the k-th, and `m_0 = 1`):
///
/// ```text
/// P(J = j) = sum_{k >= j} (-1)^(k-j) m_k / (j! (k-j)!)
/// ```
///
/// The alternating sums run through compensated accumulation. Moments that
/// cannot come from a `{0..L}`-valued count betray themselves as entries far
/// below zero or a total mass away from 1 (the latter only through round-off,
/// since the inversion telescopes to `m_0` algebraically); both are rejected
/// as inconsistent. Small negative round-off is clamped and the result
/// renormalized.
pub fn pmf_from_factorial_moments(moments: &[f64]) -> Result<CountPMF> {
    let l = moments.len();
    let moment = |k: usize| -> f64 {
        if k == 0 {
            1.0
        } else {
            moments[k - 1]
        }
    };
    let mut probs = Vec::with_capacity(l + 1);
    for j in 0..=l {
        let mut acc = KahanSum::default();
        for k in j..=l {
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(sign * moment(k) / (factorial(j) * factorial(k - j)));
        }
        probs.push(acc.value());
    }
    if let Some(&bad) = probs.iter().find(|&&p| p < -1e-6) {
        return Err(Error::InconsistentMoments(format!(
            "inversion produced probability {bad:.6e}"
        )));
    }
    let mass: f64 = probs.iter().sum();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::InconsistentMoments(format!(
            "inverted mass is {mass}, expected 1"
        )));
    }
    let renormalized = probs.iter().map(|p| p.max(0.0) / mass).collect();
    CountPMF::new(renormalized)
}

/// Law of the count in the single-factor determinantal case: the sum of L
/// independent Bernoulli variables whose success probabilities are the
/// eigenvalues of the L x L restriction matrix `H`.
pub fn pmf_bernoulli_sum_m1(h: &ComplexMatrix) -> Result<CountPMF> {
    let eigenvalues = hermitian_eigenvalues(h)?;
    let mut probs = vec![1.0];
    for &lambda in &eigenvalues {
        if !(-1e-9..=1.0 + 1e-9).contains(&lambda) {
            return Err(Error::Spectrum(format!(
                "eigenvalue {lambda} outside [0, 1] beyond tolerance"
            )));
        }
        let p = lambda.clamp(0.0, 1.0);
        let mut next = vec![0.0; probs.len() + 1];
        for (j, &q) in probs.iter().enumerate() {
            next[j] += q * (1.0 - p);
            next[j + 1] += q * p;
        }
        probs = next;
    }
    CountPMF::new(probs)
}
