use num_traits::ToPrimitive;

use super::profile::{bin_grid, fold_samples, PeriodicProfile};
use crate::bgd::IncidenceAnalysis;
use crate::error::{invalid, Error, Result};
use crate::spectra::Counting;

/// What is subtracted from ρ^{Ω_i} to isolate the second term.
#[derive(Clone, Copy)]
pub enum LeadingTerm<'a> {
    /// c_i · ρ_base(x), with ρ_base the whole fractal at the same level and
    /// boundary condition. Discretization errors largely cancel.
    Base(&'a dyn Counting),
    /// c_i · G(log x/2) · x^{d_S/2} from an extracted profile.
    Profile(&'a PeriodicProfile),
}

#[derive(Clone, Debug)]
pub struct SecondTerm {
    /// ϱT
    pub period: f64,
    /// Per-domain profiles of φ_i(x) x^{−d/2} / b_i in u = log x/2 − t_i T
    /// (None where b_i = 0).
    pub domains: Vec<Option<PeriodicProfile>>,
    pub shifts: Vec<f64>,
    /// Bin-wise average of the per-domain profiles.
    pub consensus: PeriodicProfile,
    /// Largest bin-wise gap between two domains.
    pub max_pair_gap: f64,
    /// Largest gap relative to 3× the larger of the two fold residuals
    /// (≤ 1 means the profiles agree).
    pub max_pair_ratio: f64,
}

#[derive(Clone, Debug)]
pub enum SecondTermReport {
    Profile(SecondTerm),
    /// Ψ = 1: no x^{d/2} term. sup|φ_i| on the lower and upper half of the
    /// window.
    BoundedRemainder { sup_lower: Vec<f64>, sup_upper: Vec<f64> },
}

/// Second-term profiles of a domain system from counting functions of its
/// domains over [x_lo, x_hi].
pub fn second_profile(
    domains: &[&dyn Counting],
    leading: LeadingTerm<'_>,
    analysis: &IncidenceAnalysis,
    x_lo: f64,
    x_hi: f64,
    bins: usize,
) -> Result<SecondTermReport> {
    let p = analysis.a.len();
    if domains.len() != p {
        return invalid(format!("{} counting functions for {p} domains", domains.len()));
    }
    if !(x_lo > 0.0 && x_hi > x_lo) || bins == 0 {
        return invalid("need 0 < x_lo < x_hi and at least one bin");
    }
    let c: Vec<f64> = analysis.c.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let phi = |i: usize, x: f64| -> f64 {
        if x < std::f64::consts::E {
            return 0.0;
        }
        let lead = match leading {
            LeadingTerm::Base(base) => base.count(x) as f64,
            LeadingTerm::Profile(g) => g.value(x.ln() / 2.0) * x.powf(analysis.d_s / 2.0),
        };
        domains[i].count(x) as f64 - c[i] * lead
    };
    let (t_lo, t_hi) = (x_lo.ln() / 2.0, x_hi.ln() / 2.0);

    if (analysis.psi - 1.0).abs() < 1e-9 {
        let t_mid = 0.5 * (t_lo + t_hi);
        let h = analysis.period / bins as f64;
        let sup = |i: usize, a: f64, b: f64| {
            bin_grid(a, b, h * bins as f64, bins).into_iter().map(|t| phi(i, (2.0 * t).exp()).abs()).fold(0.0, f64::max)
        };
        return Ok(SecondTermReport::BoundedRemainder {
            sup_lower: (0..p).map(|i| sup(i, t_lo, t_mid)).collect(),
            sup_upper: (0..p).map(|i| sup(i, t_mid, t_hi)).collect(),
        });
    }
    if !analysis.irreducible {
        return Err(Error::Unsupported(
            "second-term profiles of reducible systems carry polynomial factors; use reducible_growth".into(),
        ));
    }
    let b = analysis.b.as_ref().ok_or_else(|| Error::Degenerate("no Perron vector".into()))?;
    let period = analysis.rho as f64 * analysis.period;
    if t_hi - t_lo < 2.0 * period {
        return Err(Error::InsufficientData("window shorter than two periods ϱT".into()));
    }
    // Reference domain 0: every domain reaches it in an irreducible system.
    let shifts: Vec<f64> =
        (0..p).map(|i| analysis.access[i][0].unwrap_or(0) as f64 * analysis.period).collect();
    let mut profiles = Vec::with_capacity(p);
    for i in 0..p {
        if b[i] <= 0.0 {
            profiles.push(None);
            continue;
        }
        let samples: Vec<(f64, f64)> = bin_grid(t_lo - shifts[i], t_hi - shifts[i], period, bins)
            .into_iter()
            .map(|u| {
                let x = (2.0 * (u + shifts[i])).exp();
                (u, phi(i, x) * x.powf(-analysis.d / 2.0) / b[i])
            })
            .collect();
        profiles.push(Some(fold_samples(&samples, period, bins)?));
    }
    let present: Vec<&PeriodicProfile> = profiles.iter().flatten().collect();
    if present.is_empty() {
        return Err(Error::Degenerate("every domain has b_i = 0".into()));
    }
    let mut samples = Vec::new();
    for pr in &present {
        samples.extend(pr.bins.iter().map(|bn| (bn.center, bn.mean)));
    }
    let consensus = fold_samples(&samples, period, bins)?;
    let (mut gap, mut ratio) = (0.0f64, 0.0f64);
    for (a, pa) in present.iter().enumerate() {
        for pb in &present[a + 1..] {
            let g = pa.bins.iter().zip(&pb.bins).map(|(x, y)| (x.mean - y.mean).abs()).fold(0.0, f64::max);
            let tol = 3.0 * pa.fold_residual.max(pb.fold_residual);
            gap = gap.max(g);
            ratio = ratio.max(if tol > 0.0 { g / tol } else if g > 0.0 { f64::INFINITY } else { 0.0 });
        }
    }
    Ok(SecondTermReport::Profile(SecondTerm {
        period,
        domains: profiles,
        shifts,
        consensus,
        max_pair_gap: gap,
        max_pair_ratio: ratio,
    }))
}
