use crate::error::{invalid, Error, Result};
use crate::spectra::Counting;

pub const DEFAULT_BINS: usize = 64;

/// Wraps a closure as a counting function.
pub struct FnCounting<F>(pub F);

impl<F: Fn(f64) -> u64> Counting for FnCounting<F> {
    fn count(&self, x: f64) -> u64 {
        (self.0)(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub center: f64,
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

/// A function of t folded modulo `period`; bins cover [0, period).
#[derive(Clone, Debug)]
pub struct PeriodicProfile {
    pub period: f64,
    pub bins: Vec<Bin>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Largest across-period standard deviation over the bins.
    pub fold_residual: f64,
}

impl PeriodicProfile {
    pub fn amplitude(&self) -> f64 {
        self.max - self.min
    }

    /// Bin mean at t (piecewise constant, periodic).
    pub fn value(&self, t: f64) -> f64 {
        let m = self.bins.len();
        let u = t.rem_euclid(self.period) / self.period;
        self.bins[((u * m as f64) as usize).min(m - 1)].mean
    }

    pub fn max_abs(&self) -> f64 {
        self.bins.iter().map(|b| b.mean.abs()).fold(0.0, f64::max)
    }

    /// Profile of t ↦ self(t) · s shifted by `shift`: q(t) = s·self(t + shift).
    /// The shift must be a whole number of bins.
    pub fn scaled_shifted(&self, s: f64, shift: f64) -> Result<PeriodicProfile> {
        let m = self.bins.len();
        let k = shift / self.period * m as f64;
        if (k - k.round()).abs() > 1e-6 {
            return invalid("shift is not a whole number of bins");
        }
        let k = (k.round() as i64).rem_euclid(m as i64) as usize;
        let bins = (0..m)
            .map(|b| {
                let src = &self.bins[(b + k) % m];
                Bin { center: self.bins[b].center, mean: s * src.mean, std: s.abs() * src.std, samples: src.samples }
            })
            .collect();
        Ok(summarize(self.period, bins))
    }
}

fn summarize(period: f64, bins: Vec<Bin>) -> PeriodicProfile {
    let means = bins.iter().map(|b| b.mean);
    let min = means.clone().fold(f64::INFINITY, f64::min);
    let max = means.clone().fold(f64::NEG_INFINITY, f64::max);
    let mean = means.sum::<f64>() / bins.len() as f64;
    let fold_residual = bins.iter().map(|b| b.std).fold(0.0, f64::max);
    PeriodicProfile { period, bins, min, max, mean, fold_residual }
}

/// Folds (t, value) samples modulo `period` into `bins` bins.
pub fn fold_samples(samples: &[(f64, f64)], period: f64, bins: usize) -> Result<PeriodicProfile> {
    if !(period > 0.0) || bins == 0 {
        return invalid("folding needs a positive period and at least one bin");
    }
    let mut acc = vec![Vec::new(); bins];
    for &(t, v) in samples {
        if !v.is_finite() {
            return invalid(format!("non-finite sample at t = {t}"));
        }
        let u = t.rem_euclid(period) / period;
        acc[((u * bins as f64) as usize).min(bins - 1)].push(v);
    }
    if acc.iter().any(Vec::is_empty) {
        return Err(Error::InsufficientData("some bins received no samples".into()));
    }
    let bins_out = acc
        .iter()
        .enumerate()
        .map(|(b, vals)| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            Bin { center: (b as f64 + 0.5) * period / bins as f64, mean, std: var.sqrt(), samples: vals.len() }
        })
        .collect();
    Ok(summarize(period, bins_out))
}

/// Bin-centre sample points t = (j + ½)·period/bins lying in [t_lo, t_hi).
pub(crate) fn bin_grid(t_lo: f64, t_hi: f64, period: f64, bins: usize) -> Vec<f64> {
    let h = period / bins as f64;
    let first = (t_lo / h - 0.5).ceil() as i64;
    let last = (t_hi / h - 0.5).floor() as i64;
    (first..=last).map(|j| (j as f64 + 0.5) * h).filter(|&t| t >= t_lo && t < t_hi).collect()
}

/// G from ρ(x) ≈ G(log x / 2) x^{d_S/2}: samples ρ(x) x^{−d_S/2} at
/// t = log x / 2 on bin centres of [log x_lo / 2, log x_hi / 2) and folds by T.
pub fn leading_profile(
    counting: &dyn Counting,
    d_s: f64,
    period: f64,
    x_lo: f64,
    x_hi: f64,
    bins: usize,
) -> Result<PeriodicProfile> {
    if !(x_lo > 0.0 && x_hi > x_lo) {
        return invalid("need 0 < x_lo < x_hi");
    }
    let (t_lo, t_hi) = (x_lo.ln() / 2.0, x_hi.ln() / 2.0);
    if t_hi - t_lo < 4.0 * period * (1.0 - 1e-12) {
        return Err(Error::InsufficientData(format!(
            "range covers {:.3} periods; at least 4 are needed",
            (t_hi - t_lo) / period
        )));
    }
    let samples: Vec<(f64, f64)> = bin_grid(t_lo, t_hi, period, bins)
        .into_iter()
        .map(|t| {
            let x = (2.0 * t).exp();
            (t, counting.count(x) as f64 * x.powf(-d_s / 2.0))
        })
        .collect();
    if samples.iter().all(|s| s.1 == 0.0) {
        return Err(Error::InsufficientData("counting function vanishes on the whole range".into()));
    }
    fold_samples(&samples, period, bins)
}

/// t^{−d_S/2} ∫_0^∞ G(log ξ/2 − log t/2) ξ^{d_S/2} e^{−ξ} dξ, i.e. the
/// partition function implied by ρ(x) = G(log x/2) x^{d_S/2}. Trapezoid rule
/// in s = log ξ over [−40, 5].
pub fn partition_from_profile(g: &PeriodicProfile, d_s: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("partition transform needs t > 0");
    }
    let (lo, hi, h) = (-40.0f64, 5.0f64, 1e-3f64);
    let steps = ((hi - lo) / h).round() as usize;
    let shift = t.ln() / 2.0;
    let f = |s: f64| g.value(s / 2.0 - shift) * (s * (d_s / 2.0 + 1.0)).exp() * (-s.exp()).exp();
    let mut sum = 0.5 * (f(lo) + f(hi));
    for k in 1..steps {
        sum += f(lo + k as f64 * h);
    }
    Ok(t.powf(-d_s / 2.0) * sum * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_toy_folds_exactly() {
        // ρ(x) = Σ_{5^k ≤ x} 3^k
        let rho = FnCounting(|x: f64| {
            let mut s = 0u64;
            let mut p = 1.0;
            let mut c = 1u64;
            while p <= x {
                s += c;
                p *= 5.0;
                c *= 3;
            }
            s
        });
        let d_s = 2.0 * 3f64.ln() / 5f64.ln();
        let t = 5f64.ln() / 2.0;
        let g = leading_profile(&rho, d_s, t, 5f64.powi(14), 5f64.powi(20), 64).unwrap();
        assert!(g.fold_residual < 1e-6 * g.max, "{}", g.fold_residual);
        // exact limit: (3/2)·3^{−u/T}, u the phase in [0, T)
        for b in &g.bins {
            let want = 1.5 * 3f64.powf(-b.center / t);
            assert!((b.mean - want).abs() < 1e-5, "{} {}", b.mean, want);
        }
    }

    #[test]
    fn empty_and_short_ranges_are_rejected() {
        let zero = FnCounting(|_| 0);
        assert!(leading_profile(&zero, 1.0, 1.0, 1.0, 1e5, 8).is_err());
        let one = FnCounting(|_| 1);
        assert!(leading_profile(&one, 1.0, 1.0, 1.0, 10.0, 8).is_err());
    }

    #[test]
    fn transform_of_constant_profile_is_a_gamma_function() {
        // G ≡ 1 gives Γ(1 + d/2) t^{−d/2}; Γ(2) = 1 for d = 2.
        let g = fold_samples(&[(0.25, 1.0), (0.75, 1.0)], 1.0, 2).unwrap();
        let z = partition_from_profile(&g, 2.0, 0.01).unwrap();
        assert!((z - 100.0).abs() < 1e-6, "{z}");
    }
}
