//! Spectra of level-n problems and their counting functions.

mod decimation;
mod dense;
pub mod inertia;

pub use decimation::{decimate, decimate_sg};
pub use dense::{solve_dense, solve_dense_capped, DEFAULT_DENSE_CAP};
pub use inertia::InertiaCounter;

use crate::error::{invalid, Error, Result};
use crate::forms::BoundaryCondition;

pub const MERGE_TOL: f64 = 1e-9;

/// x ↦ #{positive eigenvalues ≤ x}, with multiplicity.
pub trait Counting {
    fn count(&self, x: f64) -> u64;
}

impl<C: Counting + ?Sized> Counting for &C {
    fn count(&self, x: f64) -> u64 {
        (**self).count(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub bc: BoundaryCondition,
    pub domain: String,
    pub level: usize,
    pub zero_multiplicity: usize,
}

impl Spectrum {
    /// Sorts, separates the zero modes and merges clusters at relative
    /// tolerance [`MERGE_TOL`]; a cluster is represented by its smallest
    /// member so that counting stays right-continuous at every member.
    pub fn from_eigenvalues(
        mut raw: Vec<f64>,
        bc: BoundaryCondition,
        domain: impl Into<String>,
        level: usize,
    ) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        raw.sort_by(f64::total_cmp);
        let scale = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let zero_tol = MERGE_TOL * scale.max(1.0);
        let mut zero = 0;
        let mut values: Vec<f64> = Vec::new();
        let mut mults: Vec<usize> = Vec::new();
        let mut anchor = 0.0;
        for v in raw {
            if v.abs() <= zero_tol {
                zero += 1;
                continue;
            }
            if v < 0.0 {
                return Err(Error::Consistency(format!("negative eigenvalue {v} of a positive semi-definite problem")));
            }
            if !values.is_empty() && (v - anchor).abs() <= MERGE_TOL * v.abs().max(anchor.abs()) {
                *mults.last_mut().unwrap() += 1;
            } else {
                anchor = v;
                values.push(v);
                mults.push(1);
            }
        }
        Ok(Spectrum { values, multiplicities: mults, bc, domain: domain.into(), level, zero_multiplicity: zero })
    }

    pub fn positive_count(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn total_count(&self) -> usize {
        self.positive_count() + self.zero_multiplicity
    }

    pub fn counting(&self) -> CountingFunction {
        let mut cumulative = Vec::with_capacity(self.values.len());
        let mut acc = 0u64;
        for &m in &self.multiplicities {
            acc += m as u64;
            cumulative.push(acc);
        }
        CountingFunction { values: self.values.clone(), cumulative }
    }

    /// Eigenvalues repeated by multiplicity, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        self.values.iter().zip(&self.multiplicities).flat_map(|(&v, &m)| std::iter::repeat_n(v, m)).collect()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Right-continuous step function backed by binary search.
#[derive(Clone, Debug)]
pub struct CountingFunction {
    values: Vec<f64>,
    cumulative: Vec<u64>,
}

impl Counting for CountingFunction {
    fn count(&self, x: f64) -> u64 {
        match self.values.partition_point(|&v| v <= x) {
            0 => 0,
            k => self.cumulative[k - 1],
        }
    }
}

impl Counting for Spectrum {
    fn count(&self, x: f64) -> u64 {
        let k = self.values.partition_point(|&v| v <= x);
        self.multiplicities[..k].iter().sum::<usize>() as u64
    }
}

pub fn count(spectrum: &Spectrum, x: f64) -> u64 {
    spectrum.count(x)
}

/// Z(t) = Σ m_k e^{−λ_k t} over positive eigenvalues.
pub fn partition_function(spectrum: &Spectrum, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("partition function needs t > 0, got {t}"));
    }
    Ok(spectrum.values.iter().zip(&spectrum.multiplicities).map(|(&l, &m)| m as f64 * (-l * t).exp()).sum())
}

/// Least-squares slope of log ρ against log x on `points` log-uniform
/// samples of [lo, hi].
pub fn loglog_slope(c: &dyn Counting, lo: f64, hi: f64, points: usize) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return invalid("slope window must satisfy 0 < lo < hi with at least two points");
    }
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let x = (lo.ln() + (hi / lo).ln() * i as f64 / (points - 1) as f64).exp();
        let n = c.count(x);
        if n == 0 {
            return Err(Error::InsufficientData(format!("counting function vanishes at {x}")));
        }
        xs.push(x.ln());
        ys.push((n as f64).ln());
    }
    let mx = xs.iter().sum::<f64>() / points as f64;
    let my = ys.iter().sum::<f64>() / points as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::*;

    fn toy() -> Spectrum {
        Spectrum::from_eigenvalues(vec![37.5, 15.0, 37.5 * (1.0 + 1e-12)], Dirichlet, "toy", 1).unwrap()
    }

    #[test]
    fn merging_and_counting() {
        let s = toy();
        assert_eq!(s.values.len(), 2);
        assert_eq!(s.multiplicities, vec![1, 2]);
        assert_eq!(count(&s, 20.0), 1);
        assert_eq!(count(&s, 37.5), 3);
        assert_eq!(count(&s, 14.999), 0);
        let c = s.counting();
        for x in [0.0, 14.999, 15.0, 20.0, 37.5, 1e9] {
            assert_eq!(c.count(x), count(&s, x));
        }
    }

    #[test]
    fn zero_modes_are_split_off() {
        let s = Spectrum::from_eigenvalues(vec![1e-13, 9.0, 9.0], Neumann, "K", 0).unwrap();
        assert_eq!(s.zero_multiplicity, 1);
        assert_eq!(s.positive_count(), 2);
        assert_eq!(count(&s, 100.0), 2);
    }

    #[test]
    fn partition_function_direct_sum() {
        let s = Spectrum::from_eigenvalues(vec![1.0], Dirichlet, "one", 0).unwrap();
        assert!((partition_function(&s, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let z = partition_function(&toy(), 0.1).unwrap();
        assert!((z - ((-1.5f64).exp() + 2.0 * (-3.75f64).exp())).abs() < 1e-12);
        assert!(partition_function(&toy(), 0.0).is_err());
    }
}
