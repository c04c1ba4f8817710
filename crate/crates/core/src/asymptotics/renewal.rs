use nalgebra::{DMatrix, DVector};

use super::profile::{fold_samples, PeriodicProfile};
use crate::bgd::{class_structure, perron_data};
use crate::error::{invalid, Error, Result};

/// f(x) = A f(x − T) + z(x) on the grid x_k = k·T/steps, with z given by
/// samples z[j][k] (zero past the end and for x < 0).
#[derive(Clone, Debug)]
pub struct RenewalSystem {
    pub a: DMatrix<f64>,
    pub period: f64,
    pub steps: usize,
    pub z: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct RenewalTrace {
    pub step: f64,
    /// f[k][j] = f_j(x_k)
    pub f: Vec<DVector<f64>>,
    /// max_k |f(x_k) − A f(x_k − T) − z(x_k)|
    pub residual: f64,
}

impl RenewalTrace {
    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.step
    }
}

impl RenewalSystem {
    pub fn new(a: DMatrix<f64>, period: f64, steps: usize, z: Vec<Vec<f64>>) -> Result<Self> {
        let sys = RenewalSystem { a, period, steps, z };
        sys.validate()?;
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn step(&self) -> f64 {
        self.period / self.steps as f64
    }

    fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        if n == 0 || self.a.ncols() != n {
            return invalid("A must be square and non-empty");
        }
        if self.a.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return invalid("A must be finite and non-negative");
        }
        if !(self.period > 0.0) || self.steps == 0 {
            return invalid("need T > 0 and at least one grid step per T");
        }
        if self.z.len() != n {
            return invalid(format!("{} forcing components for a {n}×{n} system", self.z.len()));
        }
        if self.z.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("forcing samples must be finite");
        }
        Ok(())
    }

    pub fn z_at(&self, k: i64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.z.iter().map(|zj| if k < 0 { 0.0 } else { zj.get(k as usize).copied().unwrap_or(0.0) }),
        )
    }

    pub fn spectral_radius(&self) -> f64 {
        self.a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn a_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.a[(i, j)]).collect()).collect()
    }

    fn grid_len(&self, horizon: f64) -> Result<usize> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return invalid("horizon must be finite and non-negative");
        }
        let k = (horizon / self.step() + 1e-9).floor() as usize + 1;
        if k > 50_000_000 {
            return Err(Error::Resource(format!("{k} grid points")));
        }
        Ok(k)
    }
}

/// Solves the lattice renewal equation on [0, horizon] by the recursion
/// f_k = A f_{k−s} + z_k (f ≡ 0 left of 0).
pub fn renewal_solve(sys: &RenewalSystem, horizon: f64) -> Result<RenewalTrace> {
    sys.validate()?;
    let rad = sys.spectral_radius();
    if rad > 1.0 + 1e-9 {
        return Err(Error::Divergence(format!("spectral radius {rad} exceeds 1")));
    }
    let len = sys.grid_len(horizon)?;
    let s = sys.steps;
    let mut f: Vec<DVector<f64>> = Vec::with_capacity(len);
    for k in 0..len {
        let mut v = sys.z_at(k as i64);
        if k >= s {
            v += &sys.a * &f[k - s];
        }
        f.push(v);
    }
    let mut residual = 0.0f64;
    for k in 0..len {
        let prev = if k >= s { &sys.a * &f[k - s] } else { DVector::zeros(sys.dim()) };
        residual = residual.max((&f[k] - prev - sys.z_at(k as i64)).amax());
    }
    if residual > 1e-12 * f.iter().map(|v| v.amax()).fold(1.0, f64::max) {
        return Err(Error::Consistency(format!("fixed-point residual {residual}")));
    }
    Ok(RenewalTrace { step: sys.step(), f, residual })
}

/// Σ_{n ≥ 0} A^n z(x_k − nT), recomputed from scratch.
pub fn renewal_oracle(sys: &RenewalSystem, k: usize) -> DVector<f64> {
    let mut sum = DVector::zeros(sys.dim());
    let mut power = DMatrix::identity(sys.dim(), sys.dim());
    let mut j = k as i64;
    while j >= 0 {
        sum += &power * sys.z_at(j);
        power = &power * &sys.a;
        j -= sys.steps as i64;
    }
    sum
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    pub rho: u64,
    /// B = u vᵀ / (T vᵀu)
    pub b: DMatrix<f64>,
    /// t_{i1}
    pub shifts: Vec<u64>,
    /// sup_i |f_i(y + t_{i1}T) − L_i(y)| over the last three periods ϱT
    /// before the horizon.
    pub deviation: f64,
    /// The same sup over each period ϱT of y, in order.
    pub period_deviation: Vec<f64>,
    pub residual: f64,
}

/// Compares the solution with its periodic limit
/// L_i(y) = ϱT Σ_j B_ij Σ_{n∈Z} z_j(y + t_{j1}T + nϱT).
/// On the grid the sum over n is a plain lattice sum, so the factor T in
/// ϱT·B cancels the 1/T of B (checked on the scalar staircase).
pub fn renewal_limit(sys: &RenewalSystem, horizon: f64) -> Result<LimitReport> {
    sys.validate()?;
    let cs = class_structure(&sys.a_rows())?;
    if !cs.irreducible {
        return Err(Error::Unsupported("reducible A: use reducible_growth".into()));
    }
    let pd = perron_data(&sys.a_rows())?;
    if (pd.psi - 1.0).abs() > 1e-9 {
        return invalid(format!("A must have spectral radius 1 (found {})", pd.psi));
    }
    let n = sys.dim();
    let len = sys.grid_len(horizon)?;
    check_dri(sys, len)?;
    let trace = renewal_solve(sys, horizon)?;
    let (u, v) = (&pd.right, &pd.left);
    let vu: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let b = DMatrix::from_fn(n, n, |i, j| u[i] * v[j] / (sys.period * vu));
    let rho = cs.rho;
    let s = sys.steps as i64;
    let shifts: Vec<u64> = (0..n).map(|i| cs.access[i][0].expect("irreducible")).collect();
    let cycle = rho as i64 * s;
    // folded[j][r] = Σ_n z_j(r + n ϱT), r a residue mod ϱ·steps
    let folded: Vec<Vec<f64>> = sys
        .z
        .iter()
        .map(|zj| {
            let mut acc = vec![0.0; cycle as usize];
            for (k, &val) in zj.iter().enumerate() {
                acc[k % cycle as usize] += val;
            }
            acc
        })
        .collect();
    let max_shift = *shifts.iter().max().unwrap() as i64 * s;
    let last_y = len as i64 - 1 - max_shift;
    if last_y < 3 * cycle {
        return Err(Error::InsufficientData("horizon shorter than three periods past the shifts".into()));
    }
    let scale = rho as f64 * sys.period;
    let mut period_deviation: Vec<f64> = Vec::new();
    let mut deviation = 0.0f64;
    let mut y = 0i64;
    while y <= last_y {
        let mut dev = 0.0f64;
        for i in 0..n {
            let lim: f64 = (0..n)
                .map(|j| {
                    let r = (y + shifts[j] as i64 * s).rem_euclid(cycle) as usize;
                    b[(i, j)] * folded[j][r]
                })
                .sum::<f64>()
                * scale;
            let fi = trace.f[(y + shifts[i] as i64 * s) as usize][i];
            dev = dev.max((fi - lim).abs());
        }
        let p = (y / cycle) as usize;
        if period_deviation.len() <= p {
            period_deviation.push(0.0);
        }
        period_deviation[p] = period_deviation[p].max(dev);
        if y > last_y - 3 * cycle {
            deviation = deviation.max(dev);
        }
        y += 1;
    }
    Ok(LimitReport { rho, b, shifts, deviation, period_deviation, residual: trace.residual })
}

/// Directly-Riemann-integrable proxy: the per-period sups of z over the
/// second half of the horizon must be negligible next to the first half.
fn check_dri(sys: &RenewalSystem, len: usize) -> Result<()> {
    let periods = len.div_ceil(sys.steps);
    let sups: Vec<f64> = (0..periods)
        .map(|p| {
            (p * sys.steps..((p + 1) * sys.steps).min(len))
                .map(|k| sys.z_at(k as i64).amax())
                .fold(0.0, f64::max)
        })
        .collect();
    let half = periods / 2;
    let first: f64 = sups[..half].iter().sum();
    let second: f64 = sups[half..].iter().sum();
    if second > 1e-6 * first.max(f64::MIN_POSITIVE) {
        return invalid("forcing does not decay over the horizon (not directly Riemann integrable)");
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub component: usize,
    /// m_j from the class structure
    pub expected_degree: usize,
    pub reaches_basic: bool,
    /// Fitted degree of f_j at a fixed phase as a polynomial in the period
    /// index; None when inconclusive.
    pub degree: Option<usize>,
    /// Relative residuals of the degree-0..3 fits (max over phases).
    pub residuals: [f64; 4],
    /// sup of |f_j| over the last period relative to its overall sup.
    pub tail_ratio: f64,
    /// f_j(x)/x^{m_j} folded by ϱ_j T over the second half of the horizon.
    pub profile: Option<PeriodicProfile>,
}

const EXACT_FIT: f64 = 1e-12;
const MARGIN: f64 = 10.0;

/// Growth of each component of a (possibly reducible) renewal system whose
/// largest class radius is 1.
pub fn reducible_growth(sys: &RenewalSystem, horizon: f64) -> Result<Vec<GrowthReport>> {
    sys.validate()?;
    let cs = class_structure(&sys.a_rows())?;
    if (cs.psi - 1.0).abs() > 1e-9 {
        return invalid(format!("largest class radius must be 1 (found {})", cs.psi));
    }
    let trace = renewal_solve(sys, horizon)?;
    let len = trace.f.len();
    // start fitting once the forcing is behind us
    let z_end = sys.z.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(sys.dim());
    for j in 0..sys.dim() {
        let cycle = cs.rho_j[j] as usize * sys.steps;
        let start = z_end.max(len / 4);
        let n_periods = (len.saturating_sub(start)) / cycle;
        if n_periods < 8 {
            return Err(Error::InsufficientData(format!("only {n_periods} periods past the forcing")));
        }
        let mut residuals = [0.0f64; 4];
        for phase in 0..cycle {
            let ys: Vec<f64> = (0..n_periods).map(|p| trace.f[start + phase + p * cycle][j]).collect();
            for (d, r) in residuals.iter_mut().enumerate() {
                *r = r.max(poly_fit_residual(&ys, d));
            }
        }
        let degree = pick_degree(&residuals);
        let overall = trace.f.iter().map(|v| v[j].abs()).fold(0.0, f64::max);
        let last = trace.f[len.saturating_sub(cycle)..].iter().map(|v| v[j].abs()).fold(0.0, f64::max);
        let tail_ratio: f64 = if overall > 0.0 { last / overall } else { 0.0 };
        let m = cs.heights[j];
        let samples: Vec<(f64, f64)> = (len / 2..len)
            .filter(|&k| k > 0)
            .map(|k| {
                let x = trace.x(k);
                (x, trace.f[k][j] / x.powi(m as i32))
            })
            .collect();
        let bins = cycle.min(super::DEFAULT_BINS);
        let profile = fold_samples(&samples, cs.rho_j[j] as f64 * sys.period, bins).ok();
        out.push(GrowthReport {
            component: j,
            expected_degree: m,
            reaches_basic: cs.reaches_basic[j],
            degree,
            residuals,
            tail_ratio,
            profile,
        });
    }
    Ok(out)
}

/// ‖y − p‖/‖y‖ for the least-squares polynomial p of degree d in the
/// rescaled index n/len.
fn poly_fit_residual(ys: &[f64], d: usize) -> f64 {
    let norm = ys.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let m = ys.len();
    let v = DMatrix::from_fn(m, d + 1, |i, k| (i as f64 / m as f64).powi(k as i32));
    let y = DVector::from_column_slice(ys);
    let svd = v.clone().svd(true, true);
    let Ok(coef) = svd.solve(&y, 1e-14) else { return f64::INFINITY };
    (y - v * coef).norm() / norm
}

fn pick_degree(r: &[f64; 4]) -> Option<usize> {
    if let Some(d) = r.iter().position(|&x| x <= EXACT_FIT) {
        return Some(d);
    }
    (1..3).find(|&d| {
        r[d] * MARGIN <= r[d - 1] && r[d + 1..].iter().all(|&e| e * MARGIN > r[d])
    })
}
