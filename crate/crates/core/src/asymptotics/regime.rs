use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// p < β
    Below,
    /// p = β
    Equal,
    /// p > β
    Above,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Below => "p<beta",
            Regime::Equal => "p=beta",
            Regime::Above => "p>beta",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegimeReport {
    pub period: f64,
    pub m: Vec<u64>,
    pub p: f64,
    /// Coefficients of Q in ascending powers.
    pub q_coeffs: Vec<f64>,
    /// min |z| over the roots of Q (∞ when Q is constant).
    pub beta: f64,
    /// Largest multiplicity of a root on |z| = β (0 when Q is constant).
    pub multiplicity: usize,
    pub regime: Regime,
}

const MAX_DENOMINATOR: u64 = 64;
const LATTICE_TOL: f64 = 1e-9;

/// Remainder regime of a lattice family of scaling factors γ_i ∈ (0, 1).
pub fn remainder_regime(gammas: &[f64], d_s: f64) -> Result<RegimeReport> {
    if gammas.len() < 2 {
        return invalid("at least two maps are needed");
    }
    if gammas.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return invalid("scaling factors must lie in (0, 1)");
    }
    if !(d_s > 0.0) {
        return invalid("d_S must be positive");
    }
    let logs: Vec<f64> = gammas.iter().map(|g| -g.ln()).collect();
    let lmin = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lattice = None;
    for q in 1..=MAX_DENOMINATOR {
        let t = lmin / q as f64;
        let ratios: Vec<f64> = logs.iter().map(|l| l / t).collect();
        if ratios.iter().all(|r| (r - r.round()).abs() <= LATTICE_TOL * r.max(1.0)) {
            lattice = Some((t, ratios.iter().map(|r| r.round() as u64).collect::<Vec<_>>()));
            break;
        }
    }
    let (period, m) =
        lattice.ok_or_else(|| Error::Unsupported("the scaling factors are not commensurable (non-lattice)".into()))?;
    let p = (d_s * period).exp();
    let deg = *m.iter().max().unwrap() as usize;
    let mut num = vec![0.0; deg + 1];
    num[0] = 1.0;
    for &mi in &m {
        num[mi as usize] -= p.powi(-(mi as i32));
    }
    if num.iter().sum::<f64>().abs() > 1e-8 {
        return invalid(format!("Σ γ_i^d_S = {} ≠ 1; d_S does not match the scaling factors", 1.0 - num.iter().sum::<f64>()));
    }
    // N(z) = (1 − z) Q(z)  ⇒  q_k = Σ_{j ≤ k} n_j
    let mut q_coeffs = Vec::with_capacity(deg);
    let mut acc = 0.0;
    for &n in &num[..deg] {
        acc += n;
        q_coeffs.push(acc);
    }
    let roots = poly_roots(&q_coeffs);
    let (beta, multiplicity) = if roots.is_empty() {
        (f64::INFINITY, 0)
    } else {
        let beta = roots.iter().map(|z| z.0.hypot(z.1)).fold(f64::INFINITY, f64::min);
        let on_circle: Vec<_> = roots.iter().filter(|z| (z.0.hypot(z.1) - beta).abs() <= 1e-6 * beta).collect();
        let mult = on_circle
            .iter()
            .map(|a| on_circle.iter().filter(|b| (a.0 - b.0).hypot(a.1 - b.1) <= 1e-4 * beta).count())
            .max()
            .unwrap_or(0);
        (beta, mult)
    };
    let regime = if beta.is_infinite() || p < beta * (1.0 - 1e-9) {
        Regime::Below
    } else if p > beta * (1.0 + 1e-9) {
        Regime::Above
    } else {
        Regime::Equal
    };
    Ok(RegimeReport { period, m, p, q_coeffs, beta, multiplicity, regime })
}

/// Roots (re, im) of Σ c_k z^k via the eigenvalues of the companion matrix.
fn poly_roots(c: &[f64]) -> Vec<(f64, f64)> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() < 1e-300) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
    }
    comp.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_factors_give_constant_q() {
        let g = 1.0 / 5f64.sqrt();
        let r = remainder_regime(&[g, g, g], 2.0 * 3f64.ln() / 5f64.ln()).unwrap();
        assert_eq!(r.q_coeffs.len(), 1);
        assert!((r.q_coeffs[0] - 1.0).abs() < 1e-12);
        assert!(r.beta.is_infinite());
        assert_eq!(r.regime, Regime::Below);
    }

    #[test]
    fn golden_pair() {
        // γ = (e^{-1}, e^{-2}), m = (1, 2); p solves 1/p + 1/p² = 1.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let d_s = phi.ln();
        let r = remainder_regime(&[(-1.0f64).exp(), (-2.0f64).exp()], d_s).unwrap();
        assert_eq!(r.m, vec![1, 2]);
        assert!((r.p - phi).abs() < 1e-10);
        // 1 − w − w² has roots w = 1/φ (z = 1) and w = −φ, i.e. z = −φ·p.
        assert!((r.beta - phi * phi).abs() < 1e-9, "{}", r.beta);
        assert_eq!(r.multiplicity, 1);
        assert_eq!(r.regime, Regime::Below);
    }

    #[test]
    fn rejects_degenerate_and_non_lattice() {
        assert!(matches!(remainder_regime(&[0.5], 1.0), Err(Error::InvalidInput(_))));
        let err = remainder_regime(&[0.5, 0.5f64.powf(2f64.sqrt())], 1.0).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }
}
