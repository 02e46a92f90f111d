//! Brute-force reference implementations.
//!
//! Everything here trades speed for transparency: exhaustive joint
//! enumeration of the full L-point law, the textbook N! permanent, and
//! recursive cofactor determinants. The fast paths in the other modules are
//! accepted only because they agree with these.

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hdpp::{guard_enumeration, ProcessSpec};
use crate::kernel::PointConfig;
use crate::moments::{CountPMF, ProductSet};
use crate::multilinear::{permutations_with_sign, KahanSum};
use crate::tensor::ComplexMatrix;

/// The full law of the L-point configuration: one probability mass
/// (density times weights) per ordered configuration of `Sigma^L`.
///
/// Configurations are indexed lexicographically: slot 1 is the most
/// significant digit and within a slot points follow the ground space's
/// lexicographic point order.
#[derive(Debug, Clone)]
pub struct JointTable {
    sizes: Vec<usize>,
    l: usize,
    point_list: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = KahanSum::default();
        for &p in &self.probs {
            acc.add(p);
        }
        acc.value()
    }

    fn point_index(&self, point: &[usize]) -> Result<usize> {
        if point.len() != self.sizes.len() {
            return Err(Error::Index(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.sizes.len()
            )));
        }
        let mut idx = 0usize;
        for (m0, &s) in point.iter().enumerate() {
            if s < 1 || s > self.sizes[m0] {
                return Err(Error::Index(format!(
                    "coordinate {s} outside 1..={}",
                    self.sizes[m0]
                )));
            }
            idx = idx * self.sizes[m0] + (s - 1);
        }
        Ok(idx)
    }

    /// Index of a full configuration in the table's enumeration order.
    pub fn config_index(&self, config: &PointConfig) -> Result<usize> {
        if config.point_count() != self.l {
            return Err(Error::Shape(format!(
                "configuration has {} points, table holds {}-point laws",
                config.point_count(),
                self.l
            )));
        }
        let per_slot = self.point_list.len();
        let mut idx = 0usize;
        for n in 0..self.l {
            idx = idx * per_slot + self.point_index(config.point(n))?;
        }
        Ok(idx)
    }

    /// The configuration at a table index.
    pub fn config_at(&self, mut idx: usize) -> PointConfig {
        let per_slot = self.point_list.len();
        let mut rows = vec![Vec::new(); self.l];
        for n in (0..self.l).rev() {
            rows[n] = self.point_list[idx % per_slot].clone();
            idx /= per_slot;
        }
        PointConfig::new(self.sizes.len(), rows).expect("decoded configuration is valid")
    }

    /// Probability mass of a full configuration.
    pub fn mass(&self, config: &PointConfig) -> Result<f64> {
        Ok(self.probs[self.config_index(config)?])
    }

    /// Total mass of all configurations whose first points equal `prefix`;
    /// dividing by the prefix's weight product recovers the marginal density.
    pub fn prefix_mass(&self, prefix: &PointConfig) -> Result<f64> {
        let n = prefix.point_count();
        if n > self.l {
            return Err(Error::Shape(format!(
                "prefix of {n} points exceeds table order {}",
                self.l
            )));
        }
        let per_slot = self.point_list.len();
        let mut base = 0usize;
        for i in 0..n {
            base = base * per_slot + self.point_index(prefix.point(i))?;
        }
        let block = per_slot.pow((self.l - n) as u32);
        let start = base * block;
        let mut acc = KahanSum::default();
        for &p in &self.probs[start..start + block] {
            acc.add(p);
        }
        Ok(acc.value())
    }
}

/// Tabulates the full L-point law by enumerating every ordered configuration.
/// Guarded at 10^7 configurations.
pub fn enumerate_joint(spec: &ProcessSpec) -> Result<JointTable> {
    let space = spec.sys().space();
    let l = spec.l();
    guard_enumeration(space.total_points(), l)?;
    let point_list: Vec<Vec<usize>> = space.points().collect();
    let mut probs = Vec::with_capacity(point_list.len().pow(l as u32));
    for rows in (0..l).map(|_| point_list.iter().cloned()).multi_cartesian_product() {
        let config = PointConfig::new(space.factor_count(), rows)?;
        probs.push(spec.density(&config)? * config.weight_product(space));
    }
    Ok(JointTable {
        sizes: space.sizes().to_vec(),
        l,
        point_list,
        probs,
    })
}

/// Exact law of the number of configuration points falling in a product set,
/// computed as the pushforward of the enumerated joint table.
pub fn exact_count_pmf(spec: &ProcessSpec, c: &ProductSet) -> Result<CountPMF> {
    c.validate_for(spec.sys().space())?;
    let table = enumerate_joint(spec)?;
    let per_slot = table.point_list.len();
    let in_set: Vec<bool> = table
        .point_list
        .iter()
        .map(|p| c.contains_point(p))
        .collect();
    let l = table.l;
    let mut sums = vec![KahanSum::default(); l + 1];
    let mut digits = vec![0usize; l];
    for (idx, &p) in table.probs.iter().enumerate() {
        let count = digits.iter().filter(|&&d| in_set[d]).count();
        sums[count].add(p);
        if idx + 1 < table.probs.len() {
            // odometer over point digits, last slot fastest
            let mut pos = l;
            loop {
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < per_slot {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }
    CountPMF::new(sums.iter().map(KahanSum::value).collect())
}

/// Permanent by direct summation over all N! permutations. Guarded at side 8.
pub fn naive_permanent(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "permanent needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > 8 {
        return Err(Error::TooLarge(format!("naive permanent of side {n}")));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (perm, _) in permutations_with_sign(n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for (r, &c) in perm.iter().enumerate() {
            prod *= a.get(r, c);
        }
        total += prod;
    }
    if n == 0 {
        total = Complex64::new(1.0, 0.0);
    }
    Ok(total)
}

/// Determinant by recursive cofactor expansion along the first row. Guarded
/// at side 8.
pub fn cofactor_det(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "determinant needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() > 8 {
        return Err(Error::TooLarge(format!("cofactor determinant of side {}", a.rows())));
    }
    Ok(cofactor_recurse(a))
}

fn cofactor_recurse(a: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n == 1 {
        return a.get(0, 0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..n {
        let minor = ComplexMatrix::from_fn(n - 1, n - 1, |r, c| {
            a.get(r + 1, if c < col { c } else { c + 1 })
        });
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += a.get(0, col) * cofactor_recurse(&minor) * sign;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gen_system, GroundSpace, SystemKind};
    use crate::multilinear::{det, permanent, SignancySet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_spec(seed: u64) -> ProcessSpec {
        let space = GroundSpace::new(vec![2, 2], vec![vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, seed).unwrap();
        ProcessSpec::new(sys, SignancySet::new(2, [1]).unwrap()).unwrap()
    }

    #[test]
    fn joint_table_has_unit_mass() {
        let table = enumerate_joint(&small_spec(3)).unwrap();
        assert!((table.total_mass() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn joint_table_is_exchangeable() {
        let spec = small_spec(5);
        let table = enumerate_joint(&spec).unwrap();
        for idx in 0..table.len() {
            let config = table.config_at(idx);
            let swapped = config.permuted(&[1, 0]);
            let a = table.mass(&config).unwrap();
            let b = table.mass(&swapped).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_factor_table_marginals_match_density() {
        let space = GroundSpace::new(vec![4], vec![vec![1.0, 0.5, 2.0, 1.0]]).unwrap();
        let sys = gen_system(&space, 3, SystemKind::Haar, 7).unwrap();
        let spec = ProcessSpec::new(sys, SignancySet::new(1, [1]).unwrap()).unwrap();
        let table = enumerate_joint(&spec).unwrap();
        for n in 1..=2usize {
            use itertools::Itertools;
            for rows in (0..n).map(|_| space.points()).multi_cartesian_product() {
                let prefix = PointConfig::new(1, rows).unwrap();
                let marginal =
                    table.prefix_mass(&prefix).unwrap() / prefix.weight_product(&space);
                let direct = spec.density(&prefix).unwrap();
                assert!((marginal - direct).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn prefix_mass_sums_the_matching_block() {
        let spec = small_spec(7);
        let table = enumerate_joint(&spec).unwrap();
        let space = spec.sys().space();
        for x in space.points() {
            let prefix = PointConfig::new(2, vec![x.clone()]).unwrap();
            let mut expected = 0.0;
            for idx in 0..table.len() {
                let config = table.config_at(idx);
                if config.point(0) == prefix.point(0) {
                    expected += table.probs()[idx];
                }
            }
            assert!((table.prefix_mass(&prefix).unwrap() - expected).abs() <= 1e-15);
        }
    }

    #[test]
    fn count_pmf_point_masses_for_trivial_sets() {
        let spec = small_spec(9);
        let full = exact_count_pmf(&spec, &ProductSet::full(spec.sys().space())).unwrap();
        assert!((full.probs()[2] - 1.0).abs() <= 1e-9);
        let empty = exact_count_pmf(&spec, &ProductSet::new(vec![vec![], vec![]])).unwrap();
        assert!((empty.probs()[0] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn size_guard_trips() {
        let space = GroundSpace::unit(vec![10, 10]).unwrap();
        let sys = gen_system(&space, 10, SystemKind::Haar, 1).unwrap();
        let spec = ProcessSpec::new(sys, SignancySet::new(2, [1]).unwrap()).unwrap();
        assert!(matches!(enumerate_joint(&spec), Err(Error::TooLarge(_))));
    }

    #[test]
    fn naive_permanent_and_cofactor_det_basics() {
        assert_eq!(
            naive_permanent(&ComplexMatrix::identity(3)).unwrap(),
            c(1.0, 0.0)
        );
        assert_eq!(
            cofactor_det(&ComplexMatrix::identity(3)).unwrap(),
            c(1.0, 0.0)
        );
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        assert!((naive_permanent(&a).unwrap() - c(10.0, 0.0)).norm() < 1e-14);
        assert!((cofactor_det(&a).unwrap() - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn oracles_agree_with_fast_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = ComplexMatrix::from_fn(5, 5, |_, _| {
            c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        });
        let d_fast = det(&a).unwrap();
        let d_slow = cofactor_det(&a).unwrap();
        assert!((d_fast - d_slow).norm() <= 1e-10 * d_slow.norm().max(1.0));
        let p_fast = permanent(&a).unwrap();
        let p_slow = naive_permanent(&a).unwrap();
        assert!((p_fast - p_slow).norm() <= 1e-10 * p_slow.norm().max(1.0));
    }

    #[test]
    fn oracle_size_guards() {
        let big = ComplexMatrix::identity(9);
        assert!(matches!(naive_permanent(&big), Err(Error::TooLarge(_))));
        assert!(matches!(cofactor_det(&big), Err(Error::TooLarge(_))));
    }
}
