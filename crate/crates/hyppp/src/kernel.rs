//! Finite weighted ground spaces, orthonormal families, and the product
//! kernel they induce.
//!
//! A ground space is a product `Sigma = Sigma_1 x ... x Sigma_M` of finite
//! sets with strictly positive weights `w_m(s)` playing the role of the base
//! measures `mu_m`. An [`OrthonormalSystem`] attaches to each factor a family
//! of L functions `psi_{m,l}` that are orthonormal in the weighted inner
//! product `<f, g>_m = sum_s w_m(s) f(s) conj(g(s))`, and the induced kernel is
//!
//! ```text
//! K(y_1..y_M; z_1..z_M) = sum_l prod_m psi_{m,l}(y_m) * conj(psi_{m,l}(z_m)).
//! ```
//!
//! Factor indices, point indices, and rank indices on the public surface are
//! all 1-based.

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::Error as SerdeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tensor::{matrix_from_pairs, pairs_from_matrix, ComplexMatrix};

/// A product of M finite sets with strictly positive, finite weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSpace {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl GroundSpace {
    pub fn new(sizes: Vec<usize>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Argument("ground space needs at least one factor".into()));
        }
        if sizes.iter().any(|&s| s < 1) {
            return Err(Error::Argument("every factor needs at least one point".into()));
        }
        if weights.len() != sizes.len() {
            return Err(Error::Shape(format!(
                "{} weight vectors for {} factors",
                weights.len(),
                sizes.len()
            )));
        }
        for (m, (w, &s)) in weights.iter().zip(sizes.iter()).enumerate() {
            if w.len() != s {
                return Err(Error::Shape(format!(
                    "factor {} has {} weights for {} points",
                    m + 1,
                    w.len(),
                    s
                )));
            }
            if let Some(&bad) = w.iter().find(|&&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::Argument(format!(
                    "weight {bad} in factor {} is not strictly positive and finite",
                    m + 1
                )));
            }
        }
        Ok(GroundSpace { sizes, weights })
    }

    /// Unit counting measure on each factor.
    pub fn unit(sizes: Vec<usize>) -> Result<Self> {
        let weights = sizes.iter().map(|&s| vec![1.0; s]).collect();
        GroundSpace::new(sizes, weights)
    }

    pub fn factor_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of points in factor `m` (1-based).
    pub fn size(&self, m: usize) -> usize {
        self.sizes[m - 1]
    }

    /// Weight of point `s` in factor `m` (both 1-based).
    pub fn weight(&self, m: usize, s: usize) -> f64 {
        self.weights[m - 1][s - 1]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Product weight of a full point, an M-tuple of 1-based indices.
    pub fn point_weight(&self, point: &[usize]) -> f64 {
        point
            .iter()
            .enumerate()
            .map(|(m0, &s)| self.weights[m0][s - 1])
            .product()
    }

    /// Total number of points of the product space.
    pub fn total_points(&self) -> usize {
        self.sizes.iter().product()
    }

    /// All points of the product space in lexicographic order (last factor
    /// fastest), as 1-based M-tuples.
    pub fn points(&self) -> impl Iterator<Item = Vec<usize>> + Clone + '_ {
        self.sizes
            .iter()
            .map(|&s| 1..=s)
            .multi_cartesian_product()
    }

    pub fn drop_last_factor(&self) -> Result<GroundSpace> {
        if self.factor_count() < 2 {
            return Err(Error::Argument("cannot drop the only factor".into()));
        }
        GroundSpace::new(
            self.sizes[..self.sizes.len() - 1].to_vec(),
            self.weights[..self.weights.len() - 1].to_vec(),
        )
    }

    fn check_point(&self, point: &[usize]) -> Result<()> {
        if point.len() != self.factor_count() {
            return Err(Error::Index(format!(
                "point has {} coordinates, space has {} factors",
                point.len(),
                self.factor_count()
            )));
        }
        for (m0, &s) in point.iter().enumerate() {
            if s < 1 || s > self.sizes[m0] {
                return Err(Error::Index(format!(
                    "coordinate {s} outside 1..={} in factor {}",
                    self.sizes[m0],
                    m0 + 1
                )));
            }
        }
        Ok(())
    }
}

/// An ordered list of N points of the product space, stored as 1-based
/// factor-point indices; `coords[n][m]` is the position of point `n` in
/// factor `m+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointConfig {
    factor_count: usize,
    coords: Vec<Vec<usize>>,
}

impl PointConfig {
    pub fn new(factor_count: usize, coords: Vec<Vec<usize>>) -> Result<Self> {
        if factor_count < 1 {
            return Err(Error::Argument("point configurations need at least one factor".into()));
        }
        for (n, row) in coords.iter().enumerate() {
            if row.len() != factor_count {
                return Err(Error::Shape(format!(
                    "point {} has {} coordinates, expected {factor_count}",
                    n + 1,
                    row.len()
                )));
            }
        }
        Ok(PointConfig { factor_count, coords })
    }

    /// The empty configuration (used as the root of the sampling chain).
    pub fn empty(factor_count: usize) -> Self {
        PointConfig {
            factor_count,
            coords: Vec::new(),
        }
    }

    pub fn point_count(&self) -> usize {
        self.coords.len()
    }

    pub fn factor_count(&self) -> usize {
        self.factor_count
    }

    pub fn coords(&self) -> &[Vec<usize>] {
        &self.coords
    }

    /// The n-th point, 0-based slot.
    pub fn point(&self, n: usize) -> &[usize] {
        &self.coords[n]
    }

    pub fn validate_for(&self, space: &GroundSpace) -> Result<()> {
        if self.factor_count != space.factor_count() {
            return Err(Error::Shape(format!(
                "configuration over {} factors, space has {}",
                self.factor_count,
                space.factor_count()
            )));
        }
        for row in &self.coords {
            space.check_point(row)?;
        }
        Ok(())
    }

    pub fn appended(&self, point: &[usize]) -> PointConfig {
        let mut coords = self.coords.clone();
        coords.push(point.to_vec());
        PointConfig {
            factor_count: self.factor_count,
            coords,
        }
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> PointConfig {
        PointConfig {
            factor_count: self.factor_count,
            coords: self.coords[..n].to_vec(),
        }
    }

    /// Reorders points by `perm` (0-based): slot `i` of the result holds point
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> PointConfig {
        PointConfig {
            factor_count: self.factor_count,
            coords: perm.iter().map(|&i| self.coords[i].clone()).collect(),
        }
    }

    /// Product of measure weights over all points and factors.
    pub fn weight_product(&self, space: &GroundSpace) -> f64 {
        self.coords.iter().map(|p| space.point_weight(p)).product()
    }

    /// Drops the last coordinate of every point.
    pub fn drop_last_factor(&self) -> Result<PointConfig> {
        if self.factor_count < 2 {
            return Err(Error::Argument("cannot drop the only factor".into()));
        }
        Ok(PointConfig {
            factor_count: self.factor_count - 1,
            coords: self
                .coords
                .iter()
                .map(|row| row[..row.len() - 1].to_vec())
                .collect(),
        })
    }
}

/// Per-factor maximum deviation from weighted orthonormality.
#[derive(Debug, Clone)]
pub struct OrthonormalityReport {
    pub per_factor: Vec<f64>,
}

impl OrthonormalityReport {
    pub fn max_deviation(&self) -> f64 {
        self.per_factor.iter().copied().fold(0.0, f64::max)
    }
}

/// Orthonormal families `psi_{m,l}` on a ground space; `psi(m)` is the
/// `S_m x L` matrix whose column `l-1` holds the values of `psi_{m,l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalSystem {
    space: GroundSpace,
    l: usize,
    psi: Vec<ComplexMatrix>,
}

impl OrthonormalSystem {
    pub fn new(space: GroundSpace, l: usize, psi: Vec<ComplexMatrix>) -> Result<Self> {
        if l < 1 {
            return Err(Error::Rank("rank L must be at least 1".into()));
        }
        if let Some(&smin) = space.sizes().iter().min() {
            if l > smin {
                return Err(Error::Rank(format!(
                    "rank L={l} exceeds the smallest factor size {smin}"
                )));
            }
        }
        if psi.len() != space.factor_count() {
            return Err(Error::Shape(format!(
                "{} psi matrices for {} factors",
                psi.len(),
                space.factor_count()
            )));
        }
        for (m0, mat) in psi.iter().enumerate() {
            if mat.rows() != space.sizes()[m0] || mat.cols() != l {
                return Err(Error::Shape(format!(
                    "psi matrix for factor {} is {}x{}, expected {}x{l}",
                    m0 + 1,
                    mat.rows(),
                    mat.cols(),
                    space.sizes()[m0]
                )));
            }
        }
        Ok(OrthonormalSystem { space, l, psi })
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn factor_count(&self) -> usize {
        self.space.factor_count()
    }

    /// The psi matrix of factor `m` (1-based).
    pub fn psi(&self, m: usize) -> &ComplexMatrix {
        &self.psi[m - 1]
    }

    /// `psi_{m,l}(s)` with all arguments 1-based.
    pub fn psi_value(&self, m: usize, s: usize, l: usize) -> Complex64 {
        self.psi[m - 1].get(s - 1, l - 1)
    }

    /// Max deviation of the weighted Gram matrix from the identity, per factor.
    pub fn validate_orthonormal(&self) -> OrthonormalityReport {
        let per_factor = (1..=self.factor_count())
            .map(|m| {
                let s_m = self.space.size(m);
                let mut dev: f64 = 0.0;
                for l1 in 1..=self.l {
                    for l2 in 1..=self.l {
                        let mut inner = Complex64::new(0.0, 0.0);
                        for s in 1..=s_m {
                            inner += self.space.weight(m, s)
                                * self.psi_value(m, s, l1)
                                * self.psi_value(m, s, l2).conj();
                        }
                        let delta = if l1 == l2 { 1.0 } else { 0.0 };
                        dev = dev.max((inner - delta).norm());
                    }
                }
                dev
            })
            .collect();
        OrthonormalityReport { per_factor }
    }

    /// Kernel evaluation `K(y; z)` at two points given as 1-based M-tuples.
    pub fn eval_kernel(&self, y: &[usize], z: &[usize]) -> Result<Complex64> {
        self.space.check_point(y)?;
        self.space.check_point(z)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 1..=self.l {
            let mut prod = Complex64::new(1.0, 0.0);
            for m in 1..=self.factor_count() {
                prod *= self.psi_value(m, y[m - 1], l) * self.psi_value(m, z[m - 1], l).conj();
            }
            sum += prod;
        }
        Ok(sum)
    }

    /// The N x L matrices `B_m(n, l) = psi_{m,l}(x_{n,m})` evaluated at the
    /// points of `pts`, one matrix per factor.
    pub fn b_matrices(&self, pts: &PointConfig) -> Result<Vec<ComplexMatrix>> {
        pts.validate_for(&self.space)?;
        let n = pts.point_count();
        Ok((1..=self.factor_count())
            .map(|m| {
                ComplexMatrix::from_fn(n, self.l, |row, col| {
                    self.psi_value(m, pts.point(row)[m - 1], col + 1)
                })
            })
            .collect())
    }

    pub fn drop_last_factor(&self) -> Result<OrthonormalSystem> {
        let space = self.space.drop_last_factor()?;
        let psi = self.psi[..self.psi.len() - 1].to_vec();
        OrthonormalSystem::new(space, self.l, psi)
    }
}

/// Family of built-in orthonormal constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// First L columns of a seeded Haar-distributed unitary per factor.
    Haar,
    /// First L columns of the unitary discrete Fourier matrix per factor.
    Dft,
    /// First L standard basis columns per factor.
    Identity,
}

impl std::str::FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(SystemKind::Haar),
            "dft" => Ok(SystemKind::Dft),
            "identity" => Ok(SystemKind::Identity),
            other => Err(Error::Argument(format!(
                "unknown system kind {other:?} (expected haar, dft, or identity)"
            ))),
        }
    }
}

/// Generates an orthonormal system of rank `l` on `space`, deterministic in
/// `seed`.
///
/// All three kinds first build columns orthonormal under unit weights and then
/// divide row `s` by `sqrt(w_m(s))`, which restores orthonormality under the
/// weighted inner product. The Haar kind orthonormalizes a seeded complex
/// standard-Gaussian matrix column by column (Gram-Schmidt with a second
/// reorthogonalization pass), which makes the R factor's diagonal positive
/// real and the resulting unitary Haar-distributed.
pub fn gen_system(space: &GroundSpace, l: usize, kind: SystemKind, seed: u64) -> Result<OrthonormalSystem> {
    if l < 1 {
        return Err(Error::Rank("rank L must be at least 1".into()));
    }
    if let Some(&smin) = space.sizes().iter().min() {
        if l > smin {
            return Err(Error::Rank(format!(
                "rank L={l} exceeds the smallest factor size {smin}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = (1..=space.factor_count())
        .map(|m| {
            let s_m = space.size(m);
            let unitary_cols: Vec<Vec<Complex64>> = match kind {
                SystemKind::Identity => (0..l)
                    .map(|col| {
                        (0..s_m)
                            .map(|row| {
                                if row == col {
                                    Complex64::new(1.0, 0.0)
                                } else {
                                    Complex64::new(0.0, 0.0)
                                }
                            })
                            .collect()
                    })
                    .collect(),
                SystemKind::Dft => {
                    let scale = 1.0 / (s_m as f64).sqrt();
                    (0..l)
                        .map(|col| {
                            (0..s_m)
                                .map(|row| {
                                    let angle = -2.0 * std::f64::consts::PI * (row * col) as f64
                                        / s_m as f64;
                                    Complex64::new(angle.cos(), angle.sin()) * scale
                                })
                                .collect()
                        })
                        .collect()
                }
                SystemKind::Haar => haar_columns(&mut rng, s_m, l),
            };
            ComplexMatrix::from_fn(s_m, l, |row, col| {
                unitary_cols[col][row] / space.weight(m, row + 1).sqrt()
            })
        })
        .collect();
    OrthonormalSystem::new(space.clone(), l, psi)
}

/// First `l` columns of a Haar unitary of size `s`, drawn from `rng`.
fn haar_columns(rng: &mut ChaCha8Rng, s: usize, l: usize) -> Vec<Vec<Complex64>> {
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    let gaussian: Vec<Vec<Complex64>> = (0..s)
        .map(|_| {
            (0..s)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * inv_sqrt2, im * inv_sqrt2)
                })
                .collect()
        })
        .collect();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(s);
    for j in 0..s {
        let mut v: Vec<Complex64> = (0..s).map(|row| gaussian[row][j]).collect();
        // two passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for basis in q.iter() {
                let proj: Complex64 = basis
                    .iter()
                    .zip(v.iter())
                    .map(|(b, x)| b.conj() * x)
                    .sum();
                for (x, b) in v.iter_mut().zip(basis.iter()) {
                    *x -= proj * b;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "Gaussian draw was numerically rank deficient");
        for x in v.iter_mut() {
            *x /= norm;
        }
        q.push(v);
    }
    q.truncate(l);
    q
}

// ---------------------------------------------------------------------------
// JSON: {"m", "sizes", "weights", "l", "psi"} for systems and {"coords"} for
// point configurations.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SystemJson {
    m: usize,
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    l: usize,
    psi: Vec<Vec<Vec<(f64, f64)>>>,
}

impl Serialize for OrthonormalSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SystemJson {
            m: self.factor_count(),
            sizes: self.space.sizes().to_vec(),
            weights: self.space.weights().to_vec(),
            l: self.l,
            psi: self.psi.iter().map(pairs_from_matrix).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OrthonormalSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SystemJson::deserialize(deserializer)?;
        if raw.m != raw.sizes.len() {
            return Err(D::Error::custom(format!(
                "field m={} disagrees with {} sizes",
                raw.m,
                raw.sizes.len()
            )));
        }
        let space = GroundSpace::new(raw.sizes, raw.weights).map_err(D::Error::custom)?;
        let psi = raw
            .psi
            .iter()
            .map(|rows| matrix_from_pairs(rows))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        OrthonormalSystem::new(space, raw.l, psi).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PointConfigJson {
    coords: Vec<Vec<usize>>,
}

impl Serialize for PointConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PointConfigJson {
            coords: self.coords.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PointConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PointConfigJson::deserialize(deserializer)?;
        let factor_count = raw
            .coords
            .first()
            .map(Vec::len)
            .ok_or_else(|| D::Error::custom("point configuration must contain at least one point"))?;
        PointConfig::new(factor_count, raw.coords).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::HypercubicArray;

    #[test]
    fn identity_system_has_basis_columns() {
        let space = GroundSpace::unit(vec![3]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Identity, 0).unwrap();
        for s in 1..=3usize {
            for l in 1..=2usize {
                let expected = if s == l { 1.0 } else { 0.0 };
                assert_eq!(sys.psi_value(1, s, l), Complex64::new(expected, 0.0));
            }
        }
        assert_eq!(sys.validate_orthonormal().max_deviation(), 0.0);
    }

    #[test]
    fn dft_two_point_columns() {
        let space = GroundSpace::unit(vec![2]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Dft, 0).unwrap();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert!((sys.psi_value(1, 1, 1) - Complex64::new(inv_sqrt2, 0.0)).norm() < 1e-15);
        assert!((sys.psi_value(1, 2, 1) - Complex64::new(inv_sqrt2, 0.0)).norm() < 1e-15);
        assert!((sys.psi_value(1, 1, 2) - Complex64::new(inv_sqrt2, 0.0)).norm() < 1e-15);
        assert!((sys.psi_value(1, 2, 2) - Complex64::new(-inv_sqrt2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dft_columns_orthonormal_on_four_points() {
        let space = GroundSpace::unit(vec![4]).unwrap();
        let sys = gen_system(&space, 3, SystemKind::Dft, 0).unwrap();
        assert!(sys.validate_orthonormal().max_deviation() <= 1e-12);
    }

    #[test]
    fn dft_columns_rescale_for_weights() {
        let space = GroundSpace::new(vec![4], vec![vec![0.5, 1.0, 2.0, 1.5]]).unwrap();
        let sys = gen_system(&space, 3, SystemKind::Dft, 0).unwrap();
        assert!(sys.validate_orthonormal().max_deviation() <= 1e-12);
    }

    #[test]
    fn haar_system_is_orthonormal_and_deterministic() {
        let space = GroundSpace::new(vec![4, 3], vec![vec![1.0, 2.0, 0.5, 1.5], vec![1.0, 1.0, 3.0]])
            .unwrap();
        let sys = gen_system(&space, 3, SystemKind::Haar, 42).unwrap();
        assert!(sys.validate_orthonormal().max_deviation() <= 1e-10);
        let again = gen_system(&space, 3, SystemKind::Haar, 42).unwrap();
        assert_eq!(sys, again);
        let other = gen_system(&space, 3, SystemKind::Haar, 43).unwrap();
        assert_ne!(sys, other);
    }

    #[test]
    fn gen_rejects_rank_above_factor_size() {
        let space = GroundSpace::unit(vec![3]).unwrap();
        assert!(matches!(
            gen_system(&space, 5, SystemKind::Haar, 0),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn identity_kernel_is_truncated_projection() {
        let space = GroundSpace::unit(vec![4]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Identity, 0).unwrap();
        for s in 1..=4usize {
            for t in 1..=4usize {
                let k = sys.eval_kernel(&[s], &[t]).unwrap();
                let expected = if s == t && s <= 2 { 1.0 } else { 0.0 };
                assert!((k - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kernel_is_hermitian() {
        let space = GroundSpace::unit(vec![3, 2]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, 7).unwrap();
        for y in space.points() {
            for z in space.points() {
                let fwd = sys.eval_kernel(&y, &z).unwrap();
                let bwd = sys.eval_kernel(&z, &y).unwrap();
                assert!((fwd - bwd.conj()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn kernel_matches_direct_summation() {
        let space = GroundSpace::unit(vec![3, 2]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, 19).unwrap();
        let y = [2usize, 1usize];
        let z = [3usize, 2usize];
        let mut expected = Complex64::new(0.0, 0.0);
        for l in 1..=2usize {
            expected += sys.psi_value(1, y[0], l)
                * sys.psi_value(2, y[1], l)
                * (sys.psi_value(1, z[0], l) * sys.psi_value(2, z[1], l)).conj();
        }
        assert!((sys.eval_kernel(&y, &z).unwrap() - expected).norm() <= 1e-12);
    }

    #[test]
    fn b_matrices_pick_out_psi_rows() {
        let space = GroundSpace::unit(vec![3]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Identity, 0).unwrap();
        let pts = PointConfig::new(1, vec![vec![1], vec![3]]).unwrap();
        let b = sys.b_matrices(&pts).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(b[0].get(0, 1), Complex64::new(0.0, 0.0));
        assert_eq!(b[0].get(1, 0), Complex64::new(0.0, 0.0));
        assert_eq!(b[0].get(1, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_point_b_matrix_is_psi_row() {
        let space = GroundSpace::unit(vec![4, 4]).unwrap();
        let sys = gen_system(&space, 3, SystemKind::Haar, 5).unwrap();
        let pts = PointConfig::new(2, vec![vec![2, 4]]).unwrap();
        let b = sys.b_matrices(&pts).unwrap();
        for m in 1..=2usize {
            for l in 1..=3usize {
                assert_eq!(b[m - 1].get(0, l - 1), sys.psi_value(m, pts.point(0)[m - 1], l));
            }
        }
    }

    #[test]
    fn factored_b_matrices_reproduce_kernel() {
        let space = GroundSpace::new(vec![3, 2], vec![vec![1.0, 0.5, 2.0], vec![1.0, 4.0]]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, 23).unwrap();
        let pts = PointConfig::new(2, vec![vec![1, 2], vec![3, 1]]).unwrap();
        let b = sys.b_matrices(&pts).unwrap();
        let arr = HypercubicArray::from_factored(&b).unwrap();
        for i1 in 0..2usize {
            for i2 in 0..2usize {
                for j1 in 0..2usize {
                    for j2 in 0..2usize {
                        let y = [pts.point(i1)[0], pts.point(i2)[1]];
                        let z = [pts.point(j1)[0], pts.point(j2)[1]];
                        let k = sys.eval_kernel(&y, &z).unwrap();
                        let a = arr.get(&[i1 + 1, i2 + 1, j1 + 1, j2 + 1]).unwrap();
                        assert!((k - a).norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_of_kernel_is_rank() {
        let space = GroundSpace::new(vec![3, 3], vec![vec![0.2, 1.0, 1.8], vec![1.0, 2.0, 0.5]])
            .unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, 31).unwrap();
        let mut trace = 0.0;
        for p in space.points() {
            trace += space.point_weight(&p) * sys.eval_kernel(&p, &p).unwrap().re;
        }
        assert!((trace - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn kernel_reproduces_itself_under_weighted_composition() {
        let space = GroundSpace::new(vec![2, 3], vec![vec![1.0, 3.0], vec![0.5, 1.0, 1.5]]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, 37).unwrap();
        for x in space.points() {
            for z in space.points() {
                let mut composed = Complex64::new(0.0, 0.0);
                for y in space.points() {
                    composed += space.point_weight(&y)
                        * sys.eval_kernel(&x, &y).unwrap()
                        * sys.eval_kernel(&y, &z).unwrap();
                }
                let direct = sys.eval_kernel(&x, &z).unwrap();
                assert!((composed - direct).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn system_json_round_trip() {
        let space = GroundSpace::new(vec![3, 2], vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.25]]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, 99).unwrap();
        let text = crate::json::to_json_string(&sys).unwrap();
        let back: OrthonormalSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(sys, back);
    }

    #[test]
    fn point_config_json_round_trip_and_validation() {
        let pts = PointConfig::new(2, vec![vec![1, 2], vec![3, 1]]).unwrap();
        let text = crate::json::to_json_string(&pts).unwrap();
        assert_eq!(text, "{\"coords\":[[1,2],[3,1]]}");
        let back: PointConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(pts, back);
        let space = GroundSpace::unit(vec![3, 2]).unwrap();
        assert!(pts.validate_for(&space).is_ok());
        let bad = PointConfig::new(2, vec![vec![4, 1]]).unwrap();
        assert!(matches!(bad.validate_for(&space), Err(Error::Index(_))));
    }
}
