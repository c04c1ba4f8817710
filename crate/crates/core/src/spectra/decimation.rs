//! Spectral decimation for the Sierpiński gasket.
//!
//! Graph eigenvalues e ∈ [0, 6] at level m lift to level m+1 through the two
//! inverse branches of R(e) = e(5 − e). The level-m (H, M) eigenvalue is
//! λ = (3/2)·5^m·e: (1/r)^m = (5/3)^m for the stiffness and μ^m/Q = 3^{−m−1}
//! for the lumped mass, with interior vertices of mass 2·3^{−m−1}.

use super::Spectrum;
use crate::error::{Error, Result};
use crate::forms::{sg_harmonic, BoundaryCondition, HarmonicStructure, SelfSimilarMeasure};
use crate::fractal::{sierpinski_gasket, FractalSpec};

fn phi_minus(x: f64) -> f64 {
    // 2x/(5 + √(25 − 4x)) = (5 − √(25 − 4x))/2 without cancellation.
    2.0 * x / (5.0 + (25.0 - 4.0 * x).max(0.0).sqrt())
}

fn phi_plus(x: f64) -> f64 {
    (5.0 + (25.0 - 4.0 * x).max(0.0).sqrt()) / 2.0
}

/// Continues a value born at level `born` up to level `m`.
fn continue_to(out: &mut Vec<(f64, usize)>, v: f64, born: usize, m: usize, mult: usize, plus_first: bool) {
    let mut vals = vec![v];
    for k in born + 1..=m {
        let mut next = Vec::with_capacity(vals.len() * 2);
        for &x in &vals {
            if plus_first && k == born + 1 {
                next.push(phi_plus(x));
            } else {
                next.push(phi_minus(x));
                next.push(phi_plus(x));
            }
        }
        vals = next;
    }
    out.extend(vals.into_iter().map(|x| (x, mult)));
}

/// Graph-level series: (e, multiplicity) pairs, unsorted.
fn series(bc: BoundaryCondition, m: usize) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let p3 = |k: usize| 3usize.pow(k as u32);
    match bc {
        BoundaryCondition::Dirichlet => {
            continue_to(&mut out, 2.0, 1, m, 1, false);
            for born in 1..=m {
                continue_to(&mut out, 5.0, born, m, (p3(born - 1) + 3) / 2, false);
            }
            for born in 2..=m {
                continue_to(&mut out, 6.0, born, m, (p3(born) - 3) / 2, true);
            }
        }
        BoundaryCondition::Neumann => {
            out.push((0.0, 1));
            for born in 0..=m {
                continue_to(&mut out, 6.0, born, m, (p3(born) + 3) / 2, true);
            }
            for born in 2..=m {
                continue_to(&mut out, 5.0, born, m, (p3(born - 1) - 1) / 2, false);
            }
        }
    }
    out
}

/// Complete level-m spectrum of SG (Dirichlet on V_0, or Neumann) in the
/// normalization of [`crate::forms::assemble`].
pub fn decimate_sg(m: usize, bc: BoundaryCondition) -> Result<Spectrum> {
    if m < 1 {
        return Err(Error::InvalidInput("decimation needs level m ≥ 1".into()));
    }
    let scale = 1.5 * 5f64.powi(m as i32);
    let mut raw = Vec::new();
    for (e, k) in series(bc, m) {
        raw.extend(std::iter::repeat_n(scale * e, k));
    }
    let tag = match bc {
        BoundaryCondition::Dirichlet => "K\\V0",
        BoundaryCondition::Neumann => "K",
    };
    Spectrum::from_eigenvalues(raw, bc, tag, m)
}

/// Decimation for an arbitrary (spec, structure, measure); only the standard
/// gasket is supported.
pub fn decimate(
    spec: &FractalSpec,
    hs: &HarmonicStructure,
    mu: &SelfSimilarMeasure,
    m: usize,
    bc: BoundaryCondition,
) -> Result<Spectrum> {
    let sg = sierpinski_gasket();
    if spec.maps != sg.maps || spec.boundary != sg.boundary || *hs != sg_harmonic() || *mu != SelfSimilarMeasure::uniform(3) {
        return Err(Error::Unsupported(format!("spectral decimation is only available for the standard gasket, not '{}'", spec.name)));
    }
    decimate_sg(m, bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::count;

    #[test]
    fn level_one_dirichlet() {
        let s = decimate_sg(1, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(s.multiplicities, vec![1, 2]);
        assert!((s.values[0] - 15.0).abs() < 1e-12 && (s.values[1] - 37.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_counts() {
        for m in 1..=7 {
            let d = decimate_sg(m, BoundaryCondition::Dirichlet).unwrap();
            assert_eq!(d.positive_count(), (3usize.pow(m as u32 + 1) - 3) / 2);
            assert_eq!(d.zero_multiplicity, 0);
            let n = decimate_sg(m, BoundaryCondition::Neumann).unwrap();
            assert_eq!(n.total_count(), (3usize.pow(m as u32 + 1) + 3) / 2);
            assert_eq!(n.zero_multiplicity, 1);
        }
        assert_eq!(count(&decimate_sg(4, BoundaryCondition::Dirichlet).unwrap(), f64::MAX), 120);
    }

    #[test]
    fn other_fractals_are_unsupported() {
        let sf = crate::fractal::lindstrom_snowflake();
        let r = decimate(&sf, &sg_harmonic(), &SelfSimilarMeasure::uniform(3), 2, BoundaryCondition::Neumann);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
