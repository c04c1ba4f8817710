use nalgebra::{DMatrix, SymmetricEigen};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::forms::LevelForm;

pub const DEFAULT_DENSE_CAP: usize = 4000;

pub fn solve_dense(form: &LevelForm) -> Result<Spectrum> {
    solve_dense_capped(form, DEFAULT_DENSE_CAP)
}

/// All eigenvalues of H u = λ M u via the similarity M^{-1/2} H M^{-1/2}
/// (M is diagonal) and a symmetric tridiagonal QR solve.
pub fn solve_dense_capped(form: &LevelForm, cap: usize) -> Result<Spectrum> {
    let n = form.dim();
    if n == 0 {
        return Err(Error::Degenerate("no free vertices".into()));
    }
    if n > cap {
        return Err(Error::Resource(format!(
            "{n} free vertices exceed the dense cap {cap}; use the decimation path or the inertia counter"
        )));
    }
    let mass = form.mass_f64();
    if mass.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::InvalidInput("mass weights must be positive and finite".into()));
    }
    let s: Vec<f64> = mass.iter().map(|m| m.sqrt().recip()).collect();
    let mut a = DMatrix::zeros(n, n);
    for (&(i, j), v) in &form.stiffness {
        a[(i, j)] = crate::exact::rational_to_f64(v) * s[i] * s[j];
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite stiffness entry".into()));
    }
    let eig = SymmetricEigen::new(a).eigenvalues;
    Spectrum::from_eigenvalues(eig.iter().copied().collect(), form.bc, form.tag.clone(), form.level)
}
