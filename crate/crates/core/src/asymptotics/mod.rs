//! Periodic profiles of counting functions, the second term, bracketing,
//! remainder regimes and lattice renewal equations.

mod bracketing;
mod profile;
mod regime;
mod renewal;
mod second;

pub use bracketing::{verify_bracketing, BracketingReport};
pub use profile::{
    fold_samples, leading_profile, partition_from_profile, Bin, FnCounting, PeriodicProfile, DEFAULT_BINS,
};
pub use regime::{remainder_regime, Regime, RegimeReport};
pub use renewal::{
    reducible_growth, renewal_limit, renewal_oracle, renewal_solve, GrowthReport, LimitReport, RenewalSystem,
    RenewalTrace,
};
pub use second::{second_profile, LeadingTerm, SecondTerm, SecondTermReport};

/// Log-uniform grid with `points` samples on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points).map(|k| (lo.ln() + (hi / lo).ln() * k as f64 / (points - 1) as f64).exp()).collect()
}
