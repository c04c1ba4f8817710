use fractal_spectra::asymptotics::{
    leading_profile, log_grid, renewal_limit, second_profile, verify_bracketing, LeadingTerm, RenewalSystem,
    SecondTermReport,
};
use fractal_spectra::bgd::{analyze, bgd_preset, Realization};
use fractal_spectra::spectra::decimate_sg;
use fractal_spectra::{BoundaryCondition::Dirichlet, Counting};
use nalgebra::DMatrix;

const T: f64 = 0.8047189562170503; // log 5 / 2

#[test]
fn leading_profile_folds() {
    let d_s = 2.0 * 3f64.ln() / 5f64.ln();
    // level 7, four periods ending one period below the top: at least half the bins fold
    // exactly, a few bins on jumps of G carry the O(1) remainder
    let spec = decimate_sg(7, Dirichlet).unwrap();
    let top = spec.max_value().unwrap();
    let g = leading_profile(&spec.counting(), d_s, T, top / 5f64.powi(5), top / 5.0, 64).unwrap();
    let exact = g.bins.iter().filter(|b| b.std <= 1e-12).count();
    assert!(exact >= 32, "{exact}");
    assert!(g.fold_residual / g.mean < 0.2);
    assert!(g.min > 0.0);
    // deeper spectrum, window two periods below the top
    let spec = decimate_sg(10, Dirichlet).unwrap();
    let top = spec.max_value().unwrap();
    let g = leading_profile(&spec.counting(), d_s, T, top / 5f64.powi(6), top / 25.0, 64).unwrap();
    assert!(g.fold_residual / g.mean < 0.05, "{} / {}", g.fold_residual, g.mean);
}

#[test]
fn corrupted_incidence_matrix_breaks_bracketing() {
    let sys = bgd_preset("sg-cut-bottom").unwrap();
    let an = analyze(&sys).unwrap();
    let fine = sys.domain_counter(0, 8, Dirichlet, Realization::Boundary).unwrap();
    let coarse = sys.domain_counter(0, 7, Dirichlet, Realization::Boundary).unwrap();
    let base = sys.base_counter(7, Dirichlet).unwrap();
    let grid = log_grid(10.0, 1e5, 200);
    let good = verify_bracketing(&[&fine], &[&coarse], &base, &an.a, &an.s, 0.2, 9.0, &grid).unwrap();
    assert!(good.violation <= 0.0);
    let bad = verify_bracketing(&[&fine], &[&coarse], &base, &[vec![3]], &an.s, 0.2, 9.0, &grid).unwrap();
    assert!(bad.violation > 100.0, "{}", bad.violation);
}

#[test]
fn phi_recursion_stays_bounded() {
    // |φ(x) − Aφ(γ²x)| with φ = ρ^Ω − c ρ_D stays O(1) over four decades
    let sys = bgd_preset("sg-thirds").unwrap();
    let an = analyze(&sys).unwrap();
    let n = 14;
    let dom: Vec<_> = (0..2).map(|i| sys.domain_counter(i, n, Dirichlet, Realization::Boundary).unwrap()).collect();
    let base = sys.base_counter(n, Dirichlet).unwrap();
    let c = [3.0 / 7.0, 1.0 / 7.0];
    let phi = |i: usize, x: f64| dom[i].count(x) as f64 - c[i] * base.count(x) as f64;
    let mut worst = 0.0f64;
    for x in log_grid(10.0, 1e5 * 10.0, 300) {
        for i in 0..2 {
            let rec: f64 = (0..2).map(|j| an.a[i][j] as f64 * phi(j, 0.2 * x)).sum();
            worst = worst.max((phi(i, x) - rec).abs());
        }
    }
    assert!(worst <= 9.0 + 3.0, "{worst}");
}

#[test]
fn halves_give_a_bounded_remainder_report() {
    let sys = bgd_preset("sg-halves").unwrap();
    let an = analyze(&sys).unwrap();
    let dom: Vec<_> = (0..2).map(|i| sys.domain_counter(i, 14, Dirichlet, Realization::Boundary).unwrap()).collect();
    let base = sys.base_counter(14, Dirichlet).unwrap();
    let counters: Vec<&dyn Counting> = dom.iter().map(|d| d as &dyn Counting).collect();
    let rep = second_profile(&counters, LeadingTerm::Base(&base), &an, 25.0, 5f64.powi(10), 64).unwrap();
    let SecondTermReport::BoundedRemainder { sup_lower, sup_upper } = rep else { panic!("Ψ = 1") };
    // Ω_2 stays O(1); Ω_1 may grow like log x but is far below any power
    assert!(sup_upper[1] <= 2.0 * sup_lower[1] + 2.0, "{sup_lower:?} {sup_upper:?}");
    assert!(sup_upper.iter().all(|v| v.is_finite() && *v < 100.0));
}

#[test]
fn renewal_deviation_decreases_for_preset_systems() {
    for name in ["sg-cut-bottom", "sg-thirds"] {
        let an = analyze(&bgd_preset(name).unwrap()).unwrap();
        let p = an.a.len();
        let a = DMatrix::from_fn(p, p, |i, j| an.a[i][j] as f64 / an.psi);
        let s = 32;
        // forcing decaying like e^{−x}
        let z = (0..p).map(|j| (0..40 * s).map(|k| (-(k as f64) / s as f64).exp() * (1.0 + j as f64)).collect()).collect();
        let sys = RenewalSystem::new(a, T, s, z).unwrap();
        let rep = renewal_limit(&sys, 80.0 * T).unwrap();
        let tail = &rep.period_deviation[10..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15), "{name}: {tail:?}");
        assert!(rep.deviation < 1e-6, "{name}: {}", rep.deviation);
    }
}
