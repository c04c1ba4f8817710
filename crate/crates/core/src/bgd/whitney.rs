//! Whitney-type decompositions: Λ_k = cells inside Ω whose parent is not,
//! Λ̃_k = level-k cells meeting the boundary.

use super::{BgdSystem, Letter};
use crate::error::{invalid, Result};
use crate::exact::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellClass {
    Inside,
    Crossing,
    Outside,
}

#[derive(Clone, Debug)]
pub struct WhitneyReport {
    /// Index k−1 holds #Λ_k, k = 1..=k_max.
    pub lambda: Vec<u128>,
    /// Index k holds #Λ̃_k, k = 0..=k_max.
    pub lambda_tilde: Vec<u128>,
    /// Σ_k #Λ_k N^{−k} up to k_max.
    pub volume: f64,
    pub alpha_i: f64,
    pub alpha_m: f64,
}

/// Slope of log count against k·log(1/ratio) over the last five levels.
fn fit_exponent(counts: &[(usize, u128)], ratio: f64) -> f64 {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .rev()
        .take(5)
        .filter(|(_, c)| *c > 0)
        .map(|&(k, c)| (k as f64 * (1.0 / ratio).ln(), (c as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn report(lambda: Vec<u128>, lambda_tilde: Vec<u128>, n: usize, ratio: f64) -> WhitneyReport {
    let volume = lambda.iter().enumerate().map(|(k, &c)| c as f64 * (n as f64).powi(-(k as i32 + 1))).sum();
    let li: Vec<(usize, u128)> = lambda.iter().enumerate().map(|(k, &c)| (k + 1, c)).collect();
    let lm: Vec<(usize, u128)> = lambda_tilde.iter().enumerate().map(|(k, &c)| (k, c)).collect();
    WhitneyReport { alpha_i: fit_exponent(&li, ratio), alpha_m: fit_exponent(&lm, ratio), volume, lambda, lambda_tilde }
}

/// Counts by dynamic programming over the number of level-k cells of each
/// domain type; every such cell meets the boundary of the root.
pub fn whitney(sys: &BgdSystem, root: usize, k_max: usize, ratio: f64) -> Result<WhitneyReport> {
    if k_max < 3 {
        return invalid("Whitney fits need k_max ≥ 3");
    }
    if root >= sys.len() {
        return invalid(format!("domain {root} out of range"));
    }
    let p = sys.len();
    let mut counts = vec![0u128; p];
    counts[root] = 1;
    let mut lambda = Vec::with_capacity(k_max);
    let mut lambda_tilde = vec![if sys.domains[root].has_boundary() { 1 } else { 0 }];
    for _ in 1..=k_max {
        let mut next = vec![0u128; p];
        let mut inside = 0u128;
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for l in &sys.domains[j].letters {
                match l {
                    Letter::Inside => inside += c,
                    Letter::Edge { target, .. } => next[*target] += c,
                    Letter::Outside => {}
                }
            }
        }
        lambda.push(inside);
        lambda_tilde.push(next.iter().enumerate().filter(|(j, _)| sys.domains[*j].has_boundary()).map(|(_, c)| c).sum());
        counts = next;
    }
    Ok(report(lambda, lambda_tilde, sys.spec.alphabet_size(), ratio))
}

/// Generic depth-first version for any cell classifier (letters 1-based).
pub fn whitney_by_predicate(
    classify: &dyn Fn(&[usize]) -> CellClass,
    n_letters: usize,
    k_max: usize,
    ratio: f64,
) -> Result<WhitneyReport> {
    if k_max < 3 {
        return invalid("Whitney fits need k_max ≥ 3");
    }
    let mut lambda = vec![0u128; k_max];
    let mut lambda_tilde = vec![0u128; k_max + 1];
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        match classify(&w) {
            CellClass::Outside => {}
            CellClass::Inside => {
                if !w.is_empty() {
                    lambda[w.len() - 1] += 1;
                }
            }
            CellClass::Crossing => {
                lambda_tilde[w.len()] += 1;
                if w.len() < k_max {
                    for l in 1..=n_letters {
                        let mut c = w.clone();
                        c.push(l);
                        stack.push(c);
                    }
                }
            }
        }
    }
    Ok(report(lambda, lambda_tilde, n_letters, ratio))
}

/// Exact partial sum Σ_{k≤k_max} #Λ_k N^{−k}.
pub fn whitney_volume_exact(report: &WhitneyReport, n: usize) -> Rational {
    use num_bigint::BigInt;
    let mut s = Rational::from_integer(BigInt::from(0));
    let mut scale = Rational::from_integer(BigInt::from(1));
    for &c in &report.lambda {
        scale /= Rational::from_integer(BigInt::from(n));
        s += &scale * Rational::from_integer(BigInt::from(c));
    }
    s
}
