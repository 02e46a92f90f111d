//! Exchangeable densities, marginalization, next-point extension laws, and
//! seeded sequential sampling.
//!
//! For a rank-L orthonormal system with kernel K and a nonempty signancy set
//! `K ⊆ {1..M}`, the N-point density (with respect to the weighted counting
//! measure) is
//!
//! ```text
//! p_N(x_1..x_N) = Det_K(B) / (C(L,N) * (N!)^M),
//! ```
//!
//! where `B` is the 2M-way array of kernel values at the points. Since `B`
//! factors through the N x L matrices `B_m(n,l) = psi_{m,l}(x_{n,m})`, the
//! density is evaluated via the column-subset expansion and is nonnegative by
//! construction. The probability of a configuration is always density times
//! the product of measure weights.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{OrthonormalSystem, PointConfig};
use crate::multilinear::{binomial, factorial, hyperdet_factored, KahanSum, SignancySet};

/// Numerical floor separating a genuinely zero prefix density from round-off.
pub const CONDITIONING_TOLERANCE: f64 = 1e-14;

/// An orthonormal system paired with the signancy set that fixes which
/// direction pairs alternate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    sys: OrthonormalSystem,
    signancy: SignancySet,
}

impl ProcessSpec {
    pub fn new(sys: OrthonormalSystem, signancy: SignancySet) -> Result<Self> {
        if signancy.m() != sys.factor_count() {
            return Err(Error::InvalidSignancy(format!(
                "signancy set over {} factors, system has {}",
                signancy.m(),
                sys.factor_count()
            )));
        }
        Ok(ProcessSpec { sys, signancy })
    }

    pub fn sys(&self) -> &OrthonormalSystem {
        &self.sys
    }

    pub fn signancy(&self) -> &SignancySet {
        &self.signancy
    }

    pub fn l(&self) -> usize {
        self.sys.l()
    }

    pub fn factor_count(&self) -> usize {
        self.sys.factor_count()
    }

    /// The N-point density `p_N` at `pts`.
    ///
    /// Returns 0 for `N > L` (the expansion vanishes there); `N = 0` is
    /// rejected.
    pub fn density(&self, pts: &PointConfig) -> Result<f64> {
        let n = pts.point_count();
        if n < 1 {
            return Err(Error::Argument("density needs at least one point".into()));
        }
        pts.validate_for(self.sys.space())?;
        if n > self.l() {
            return Ok(0.0);
        }
        let b = self.sys.b_matrices(pts)?;
        let raw = hyperdet_factored(&b, &self.signancy)?;
        let norm = binomial(self.l(), n) * factorial(n).powi(self.factor_count() as i32);
        Ok(raw / norm)
    }

    /// Total mass of `p_N`: the weighted sum of the density over all ordered
    /// N-point configurations. Equals 1 for `1 <= N <= L`.
    pub fn normalization_check(&self, n: usize) -> Result<f64> {
        if n < 1 {
            return Err(Error::Argument("normalization needs N >= 1".into()));
        }
        let space = self.sys.space();
        guard_enumeration(space.total_points(), n)?;
        let mut total = KahanSum::default();
        for rows in (0..n).map(|_| space.points()).multi_cartesian_product() {
            let pts = PointConfig::new(space.factor_count(), rows)?;
            total.add(self.density(&pts)? * pts.weight_product(space));
        }
        Ok(total.value())
    }

    /// Integrates the last point out of `p_N`: the weighted sum over all
    /// choices of the N-th point with the first N-1 points of `pts` held
    /// fixed.
    ///
    /// For a single factor this recovers `p_{N-1}` at the prefix (the
    /// classical determinantal marginal identity). For several factors the
    /// densities `p_N` are each normalized but do not form a projective
    /// family, so the sum genuinely differs from `p_{N-1}`; the acceptance
    /// suite measures that defect.
    pub fn marginalize_last_point(&self, pts: &PointConfig) -> Result<f64> {
        let n = pts.point_count();
        if n < 2 {
            return Err(Error::Argument("marginalization needs N >= 2".into()));
        }
        pts.validate_for(self.sys.space())?;
        let prefix = pts.prefix(n - 1);
        let mut total = KahanSum::default();
        for x in self.sys.space().points() {
            let extended = prefix.appended(&x);
            total.add(self.density(&extended)? * self.sys.space().point_weight(&x));
        }
        Ok(total.value())
    }

    /// Drops the last factor: the (M-1)-factor process over the remaining
    /// coordinates with signancy `K \ {M}`. Its densities equal the original
    /// densities integrated over the last factor's coordinates.
    pub fn reduce_factor(&self) -> Result<ProcessSpec> {
        if self.factor_count() < 2 {
            return Err(Error::InvalidSignancy(
                "factor reduction needs at least two factors".into(),
            ));
        }
        let signancy = self.signancy.drop_last_factor()?;
        let sys = self.sys.drop_last_factor()?;
        ProcessSpec::new(sys, signancy)
    }

    /// The next-point extension law of a prefix of fewer than L points:
    /// `prob(x) ∝ p_{N+1}(prefix, x) * w(x)`, normalized exactly over all
    /// candidate points.
    ///
    /// The empty prefix yields the one-point law `p_1(x) * w(x)`. In the
    /// single-factor case these are the true conditionals of the L-point law
    /// and drive exact sequential sampling.
    pub fn conditional_next(&self, prefix: &PointConfig) -> Result<CategoricalDist> {
        prefix.validate_for(self.sys.space())?;
        let n = prefix.point_count();
        if n >= self.l() {
            return Err(Error::Argument(format!(
                "prefix of {n} points admits no further point at rank L={}",
                self.l()
            )));
        }
        if n >= 1 {
            let p_prefix = self.density(prefix)?;
            if p_prefix <= CONDITIONING_TOLERANCE {
                return Err(Error::Conditioning(format!(
                    "prefix density {p_prefix:.3e} is numerically zero"
                )));
            }
        }
        let space = self.sys.space();
        let mut support = Vec::with_capacity(space.total_points());
        let mut unnormalized = Vec::with_capacity(space.total_points());
        let mut total = KahanSum::default();
        for x in space.points() {
            let extended = prefix.appended(&x);
            let mass = self.density(&extended)? * space.point_weight(&x);
            total.add(mass);
            support.push(x);
            unnormalized.push(mass);
        }
        let total = total.value();
        if total <= CONDITIONING_TOLERANCE {
            return Err(Error::Conditioning(
                "every extension of the prefix has zero density".into(),
            ));
        }
        let probs = unnormalized.into_iter().map(|p| p / total).collect();
        CategoricalDist::new(support, probs)
    }

    /// Draws `n_points <= L` points by sequential extension: each point is
    /// drawn from [`conditional_next`](Self::conditional_next) given the ones
    /// before it.
    ///
    /// The chain is driven by a ChaCha8 stream cipher generator seeded from
    /// the 64-bit `seed`, so output is identical across runs and platforms.
    pub fn sample(&self, n_points: usize, seed: u64) -> Result<PointConfig> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with_rng(n_points, &mut rng)
    }

    /// Draws one configuration from an existing generator stream.
    pub fn sample_with_rng(&self, n_points: usize, rng: &mut impl Rng) -> Result<PointConfig> {
        if n_points > self.l() {
            return Err(Error::Argument(format!(
                "cannot draw {n_points} points at rank L={}",
                self.l()
            )));
        }
        let mut config = PointConfig::empty(self.factor_count());
        for _ in 0..n_points {
            let dist = self.conditional_next(&config)?;
            let u: f64 = rng.random();
            let idx = dist.index_for(u);
            config = config.appended(&dist.support()[idx]);
        }
        Ok(config)
    }
}

/// A finitely supported distribution over points of the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDist {
    support: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl CategoricalDist {
    pub fn new(support: Vec<Vec<usize>>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::Shape(format!(
                "{} support points for {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        let mut clamped = Vec::with_capacity(probs.len());
        for &p in &probs {
            if !p.is_finite() {
                return Err(Error::NonFinite("categorical probability".into()));
            }
            if p < -1e-12 {
                return Err(Error::Argument(format!("negative probability {p:.3e}")));
            }
            clamped.push(p.max(0.0));
        }
        let mass: f64 = clamped.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "probabilities sum to {mass}, expected 1"
            )));
        }
        Ok(CategoricalDist {
            support,
            probs: clamped,
        })
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Inverse-CDF lookup: the first index whose cumulative mass exceeds `u`.
    pub fn index_for(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            cum += p;
            if u < cum {
                return i;
            }
        }
        self.probs.len() - 1
    }

    /// Probability of a specific point, 0 when outside the support.
    pub fn prob_of(&self, point: &[usize]) -> f64 {
        self.support
            .iter()
            .position(|p| p == point)
            .map_or(0.0, |i| self.probs[i])
    }
}

/// Rejects enumerations with more than 10^7 configurations.
pub(crate) fn guard_enumeration(points_per_slot: usize, slots: usize) -> Result<()> {
    let total = (points_per_slot as f64).powi(slots as i32);
    if total > 1e7 {
        return Err(Error::TooLarge(format!(
            "{points_per_slot}^{slots} configurations exceed the 10^7 enumeration guard"
        )));
    }
    Ok(())
}
