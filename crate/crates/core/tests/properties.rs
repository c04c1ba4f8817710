#![allow(clippy::needless_range_loop)]

use fractal_spectra::asymptotics::{remainder_regime, renewal_oracle, renewal_solve, Regime, RenewalSystem};
use fractal_spectra::bgd::{bgd_preset, class_structure, Realization};
use fractal_spectra::fractal::{build_vertex_set, sierpinski_gasket};
use fractal_spectra::spectra::decimate_sg;
use fractal_spectra::{BoundaryCondition, Counting};
use nalgebra::DMatrix;
use num_integer::Integer;
use proptest::prelude::*;

fn matrix(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(prop_oneof![3 => Just(0.0), 1 => Just(1.0), 1 => Just(2.0)], n), n)
    })
}

fn bool_reach(a: &[Vec<f64>]) -> Vec<Vec<bool>> {
    // paths of length 1..=n by repeated boolean products
    let n = a.len();
    let step: Vec<Vec<bool>> = a.iter().map(|r| r.iter().map(|&x| x > 0.0).collect()).collect();
    let mut reach = step.clone();
    let mut cur = step.clone();
    for _ in 1..n {
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if cur[i][k] {
                    for j in 0..n {
                        next[i][j] |= step[k][j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                reach[i][j] |= next[i][j];
            }
        }
        cur = next;
    }
    reach
}

fn radius(a: &[Vec<f64>], members: &[usize]) -> f64 {
    let m = DMatrix::from_fn(members.len(), members.len(), |i, j| a[members[i]][members[j]]);
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn heights_match_brute_force_chains(a in matrix(6)) {
        let cs = class_structure(&a).unwrap();
        let n = a.len();
        let reach = bool_reach(&a);
        // classes as sets of mutually reachable cyclic vertices
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if reach[i][i] && !classes.iter().any(|c| c.contains(&i)) {
                classes.push((0..n).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect());
            }
        }
        let radii: Vec<f64> = classes.iter().map(|c| radius(&a, c)).collect();
        let psi = radii.iter().cloned().fold(0.0, f64::max);
        prop_assert!((cs.psi - psi).abs() <= 1e-6 * psi.max(1.0));
        let basic: Vec<usize> = (0..classes.len()).filter(|&k| psi > 0.0 && (radii[k] - psi).abs() <= 1e-6 * psi).collect();
        // longest chain of basic classes, each reaching the next
        fn longest(k: usize, basic: &[usize], classes: &[Vec<usize>], reach: &[Vec<bool>]) -> usize {
            basic
                .iter()
                .filter(|&&l| l != k && reach[classes[k][0]][classes[l][0]])
                .map(|&l| 1 + longest(l, basic, classes, reach))
                .max()
                .unwrap_or(0)
        }
        for j in 0..n {
            let from: Vec<usize> = basic
                .iter()
                .copied()
                .filter(|&k| classes[k].contains(&j) || reach[j][classes[k][0]])
                .collect();
            prop_assert_eq!(cs.reaches_basic[j], !from.is_empty());
            let m = from.iter().map(|&k| longest(k, &basic, &classes, &reach)).max().unwrap_or(0);
            prop_assert_eq!(cs.heights[j], m, "vertex {}", j);
        }
    }

    #[test]
    fn periods_are_gcds_of_return_lengths(a in matrix(6)) {
        let cs = class_structure(&a).unwrap();
        let n = a.len();
        let step: Vec<Vec<bool>> = a.iter().map(|r| r.iter().map(|&x| x > 0.0).collect()).collect();
        let mut cur = step.clone();
        let mut g = vec![0u64; n];
        for k in 1..=(3 * n * n) as u64 {
            for i in 0..n {
                if cur[i][i] {
                    g[i] = g[i].gcd(&k);
                }
            }
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for m in 0..n {
                    if cur[i][m] {
                        for j in 0..n {
                            next[i][j] |= step[m][j];
                        }
                    }
                }
            }
            cur = next;
        }
        for i in 0..n {
            prop_assert_eq!(cs.return_periods[i], if g[i] == 0 { None } else { Some(g[i]) });
        }
    }

    #[test]
    fn renewal_matches_direct_summation(
        a in prop::collection::vec(0.0f64..1.0, 4),
        z0 in prop::collection::vec(-1.0f64..1.0, 1..12),
        z1 in prop::collection::vec(-1.0f64..1.0, 1..12),
        steps in 1usize..6,
    ) {
        let mut a = DMatrix::from_row_slice(2, 2, &a);
        let rad = a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if rad > 0.0 {
            a /= rad;
        }
        let sys = RenewalSystem::new(a.clone(), 0.5, steps, vec![z0, z1]).unwrap();
        let tr = renewal_solve(&sys, 20.0).unwrap();
        prop_assert!(tr.residual <= 1e-12);
        for k in 0..tr.f.len() {
            let want = renewal_oracle(&sys, k);
            prop_assert!((&tr.f[k] - &want).amax() <= 1e-10 * want.amax().max(1.0));
            // the equation, checked independently of the solver
            let prev = if k >= steps { &a * &tr.f[k - steps] } else { nalgebra::DVector::zeros(2) };
            prop_assert!((&tr.f[k] - prev - sys.z_at(k as i64)).amax() <= 1e-12);
        }
    }

    #[test]
    fn uniform_factors_are_below_beta(n in 2usize..8, gamma in 0.05f64..0.95) {
        let d_s = (n as f64).ln() / -gamma.ln();
        let r = remainder_regime(&vec![gamma; n], d_s).unwrap();
        prop_assert_eq!(r.regime, Regime::Below);
        prop_assert!(r.beta.is_infinite());
    }

    #[test]
    fn counting_is_monotone(level in 0usize..6, x in 1.0f64..1e5, y in 1.0f64..1e5, domain in 0usize..2, neumann: bool) {
        let sys = bgd_preset("sg-thirds").unwrap();
        let bc = if neumann { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
        let c = sys.domain_counter(domain, level, bc, Realization::Boundary).unwrap();
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(c.count(lo) <= c.count(hi));
    }

    #[test]
    fn decimation_counts_are_monotone_and_complete(level in 1usize..7, x in 1.0f64..1e6) {
        let d = decimate_sg(level, BoundaryCondition::Dirichlet).unwrap();
        let n = d.counting();
        prop_assert!(n.count(x) <= n.count(x * 1.5));
        let v = build_vertex_set(&sierpinski_gasket(), level).unwrap();
        prop_assert_eq!(d.total_count(), v.len() - 3);
    }
}

#[test]
fn sierpinski_vertex_sets() {
    let sg = sierpinski_gasket();
    let mut prev = build_vertex_set(&sg, 0).unwrap();
    for n in 1..=6 {
        let v = build_vertex_set(&sg, n).unwrap();
        assert_eq!(v.len(), (3usize.pow(n as u32 + 1) + 3) / 2);
        assert_eq!(v.cells.len(), 3usize.pow(n as u32));
        assert!(prev.points.iter().all(|p| v.id(p).is_some()), "V_{} ⊄ V_{n}", n - 1);
        assert!(v.incidence.iter().all(|c| (1..=2).contains(&c.len())));
        prev = v;
    }
}
