use crate::error::{invalid, Result};
use crate::spectra::Counting;

#[derive(Clone, Debug)]
pub struct BracketingReport {
    pub bound: f64,
    /// max over the grid and domains of |residual| − bound (may be negative).
    pub violation: f64,
    /// max |residual| per grid point.
    pub residuals: Vec<(f64, f64)>,
    /// Domain and x of the worst residual.
    pub worst: (usize, f64),
}

/// Checks |ρ^i(x) − Σ_j a_ij ρ^j_coarse(γ²x) − s_i ρ_base,coarse(γ²x)| ≤ M on
/// `grid`. `fine` are the domain counting functions at level n, `coarse` the
/// same domains at level n − 1 and `base` the whole fractal at level n − 1.
pub fn verify_bracketing(
    fine: &[&dyn Counting],
    coarse: &[&dyn Counting],
    base: &dyn Counting,
    a: &[Vec<u64>],
    s: &[usize],
    gamma_sq: f64,
    bound: f64,
    grid: &[f64],
) -> Result<BracketingReport> {
    let p = a.len();
    if fine.len() != p || coarse.len() != p || s.len() != p || a.iter().any(|r| r.len() != p) {
        return invalid("bracketing data do not match the incidence matrix");
    }
    if grid.is_empty() {
        return invalid("empty grid");
    }
    let mut residuals = Vec::with_capacity(grid.len());
    let mut worst = (0, grid[0]);
    let mut worst_val = f64::NEG_INFINITY;
    for &x in grid {
        let y = gamma_sq * x;
        let coarse_counts: Vec<f64> = coarse.iter().map(|c| c.count(y) as f64).collect();
        let base_count = base.count(y) as f64;
        let mut row_max = 0.0f64;
        for i in 0..p {
            let pred: f64 =
                (0..p).map(|j| a[i][j] as f64 * coarse_counts[j]).sum::<f64>() + s[i] as f64 * base_count;
            let r = (fine[i].count(x) as f64 - pred).abs();
            if r > worst_val {
                worst_val = r;
                worst = (i, x);
            }
            row_max = row_max.max(r);
        }
        residuals.push((x, row_max));
    }
    Ok(BracketingReport { bound, violation: worst_val - bound, residuals, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::FnCounting;

    #[test]
    fn floor_toy_is_an_identity() {
        let rho = FnCounting(|x: f64| x.floor() as u64);
        let zero = FnCounting(|_| 0);
        let grid: Vec<f64> = (1..200).map(|k| k as f64 * 0.731).collect();
        let r = verify_bracketing(&[&rho], &[&rho], &zero, &[vec![1]], &[0], 1.0, 0.0, &grid).unwrap();
        assert_eq!(r.violation, 0.0);
    }

    #[test]
    fn wrong_matrix_is_flagged() {
        // ρ(x) = ⌊x⌋ satisfies ρ(x) = 2ρ(x/2) + O(1), not 3ρ(x/2).
        let rho = FnCounting(|x: f64| x.floor() as u64);
        let zero = FnCounting(|_| 0);
        let grid: Vec<f64> = (1..100).map(|k| k as f64 * 10.0).collect();
        let good = verify_bracketing(&[&rho], &[&rho], &zero, &[vec![2]], &[0], 0.5, 1.0, &grid).unwrap();
        assert!(good.violation <= 0.0);
        let bad = verify_bracketing(&[&rho], &[&rho], &zero, &[vec![3]], &[0], 0.5, 1.0, &grid).unwrap();
        assert!(bad.violation > 400.0);
    }
}
