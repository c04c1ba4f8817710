//! Incidence matrix, communicating classes, heights, periods and
//! Perron–Frobenius data of a BGD system.

use num_integer::Integer;
use num_traits::Zero;

use super::{BgdSystem, Letter};
use crate::error::{invalid, Error, Result};
use crate::exact::{rat_int, Rational};
use crate::forms::gamma_data;

/// a_ij = number of edges from domain i to domain j.
pub fn incidence_matrix(sys: &BgdSystem) -> Vec<Vec<u64>> {
    let p = sys.len();
    let mut a = vec![vec![0u64; p]; p];
    for (i, d) in sys.domains.iter().enumerate() {
        for l in &d.letters {
            if let Letter::Edge { target, .. } = l {
                a[i][*target] += 1;
            }
        }
    }
    a
}

#[derive(Clone, Debug)]
pub struct CommClass {
    pub members: Vec<usize>,
    /// Has at least one internal edge; otherwise a free singleton.
    pub cyclic: bool,
    pub radius: f64,
    pub basic: bool,
    /// gcd of the cycle lengths (cyclic classes only).
    pub period: Option<u64>,
    /// Basic classes only.
    pub height: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PerronData {
    pub psi: f64,
    /// Right eigenvector, scaled so that left · right = 1.
    pub right: Vec<f64>,
    /// Left eigenvector, ℓ¹-normalized.
    pub left: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct IncidenceAnalysis {
    pub a: Vec<Vec<u64>>,
    pub psi: f64,
    /// log Ψ / T.
    pub d: f64,
    pub d_s: f64,
    pub gamma: f64,
    /// T = −log γ.
    pub period: f64,
    pub n_letters: usize,
    pub classes: Vec<CommClass>,
    pub class_of: Vec<usize>,
    pub irreducible: bool,
    /// m_j: largest height of a basic class reachable from j (its own included).
    pub heights: Vec<usize>,
    pub reaches_basic: Vec<bool>,
    /// t_i: period of the class of i (None outside cyclic classes).
    pub return_periods: Vec<Option<u64>>,
    /// ϱ: gcd of t_i over the basic classes.
    pub rho: u64,
    /// ϱ_j: lcm of the periods of the basic classes reachable from j.
    pub rho_j: Vec<u64>,
    /// t_ij = min{k ≥ 1 : A^k(i, j) > 0}.
    pub access: Vec<Vec<Option<u64>>>,
    /// Perron data of the whole matrix (irreducible) or of the unique basic
    /// class, extended upstream by b = A b / Ψ.
    pub b: Option<Vec<f64>>,
    pub left: Option<Vec<f64>>,
    /// ν(Ω_i), solving (I − A/N) c = s/N exactly.
    pub c: Vec<Rational>,
    pub s: Vec<usize>,
}

impl IncidenceAnalysis {
    /// κ_i(D_i) = b_i.
    pub fn boundary_total(&self, i: usize) -> Option<f64> {
        self.b.as_ref().map(|b| b[i])
    }

    pub fn basic_classes(&self) -> impl Iterator<Item = &CommClass> {
        self.classes.iter().filter(|c| c.basic)
    }
}

/// reach[i][j]: a path of length ≥ 1 from i to j.
fn reachability(a: &[Vec<u64>]) -> Vec<Vec<bool>> {
    let p = a.len();
    let mut r: Vec<Vec<bool>> = a.iter().map(|row| row.iter().map(|&x| x > 0).collect()).collect();
    for k in 0..p {
        for i in 0..p {
            if r[i][k] {
                for j in 0..p {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Spectral radius of a non-negative irreducible (or 1×1) block by power
/// iteration on A + I, refined by the two-sided Rayleigh quotient.
pub fn perron_data(a: &[Vec<f64>]) -> Result<PerronData> {
    let p = a.len();
    if p == 0 {
        return invalid("empty matrix");
    }
    if a.iter().flatten().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return invalid("matrix entries must be finite and non-negative");
    }
    let ai: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| u64::from(x > 0.0)).collect()).collect();
    let reach = reachability(&ai);
    if p > 1 && !(0..p).all(|i| (0..p).all(|j| reach[i][j])) {
        return Err(Error::Unsupported("reducible matrix: use the per-class analysis".into()));
    }
    let iterate = |transpose: bool| -> Vec<f64> {
        let mut v = vec![1.0 / p as f64; p];
        for _ in 0..200_000 {
            let mut w = v.clone();
            for i in 0..p {
                for j in 0..p {
                    w[i] += if transpose { a[j][i] } else { a[i][j] } * v[j];
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            let delta = w.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            v = w;
            if delta < 1e-16 {
                break;
            }
        }
        v
    };
    let right = iterate(false);
    let left = iterate(true);
    let mut num = 0.0;
    for i in 0..p {
        for j in 0..p {
            num += left[i] * a[i][j] * right[j];
        }
    }
    let den: f64 = left.iter().zip(&right).map(|(x, y)| x * y).sum();
    let psi = num / den;
    let right = right.iter().map(|x| x / den).collect();
    Ok(PerronData { psi, right, left })
}

fn gcd_all(xs: impl IntoIterator<Item = u64>) -> u64 {
    xs.into_iter().fold(0, |g, x| g.gcd(&x))
}

/// Period of a strongly connected class via BFS levels: the gcd of
/// level(u) + 1 − level(v) over the internal edges u → v.
fn class_period(a: &[Vec<u64>], members: &[usize]) -> u64 {
    let p = a.len();
    let inside: Vec<bool> = (0..p).map(|i| members.contains(&i)).collect();
    let mut level = vec![i64::MIN; p];
    level[members[0]] = 0;
    let mut queue = std::collections::VecDeque::from([members[0]]);
    while let Some(u) = queue.pop_front() {
        for v in 0..p {
            if inside[v] && a[u][v] > 0 && level[v] == i64::MIN {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0u64;
    for &u in members {
        for &v in members {
            if a[u][v] > 0 {
                g = g.gcd(&((level[u] + 1 - level[v]).unsigned_abs()));
            }
        }
    }
    g
}

fn access_times(a: &[Vec<u64>]) -> Vec<Vec<Option<u64>>> {
    let p = a.len();
    let mut t = vec![vec![None; p]; p];
    for i in 0..p {
        let mut frontier: Vec<bool> = a[i].iter().map(|&x| x > 0).collect();
        for k in 1..=p as u64 {
            for j in 0..p {
                if frontier[j] && t[i][j].is_none() {
                    t[i][j] = Some(k);
                }
            }
            let mut next = vec![false; p];
            for u in (0..p).filter(|&u| frontier[u]) {
                for v in 0..p {
                    if a[u][v] > 0 {
                        next[v] = true;
                    }
                }
            }
            frontier = next;
        }
    }
    t
}

/// Solves m x = rhs exactly; None when singular.
pub(crate) fn solve_rational(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
                let t = &f * &rhs[col];
                rhs[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Communicating-class data of a non-negative matrix: everything that only
/// depends on the digraph plus the class radii.
#[derive(Clone, Debug)]
pub struct ClassStructure {
    pub psi: f64,
    pub classes: Vec<CommClass>,
    pub class_of: Vec<usize>,
    pub irreducible: bool,
    pub heights: Vec<usize>,
    pub reaches_basic: Vec<bool>,
    pub return_periods: Vec<Option<u64>>,
    pub rho: u64,
    pub rho_j: Vec<u64>,
    pub access: Vec<Vec<Option<u64>>>,
}

pub fn class_structure(a: &[Vec<f64>]) -> Result<ClassStructure> {
    let p = a.len();
    if p == 0 || a.iter().any(|r| r.len() != p) {
        return invalid("matrix must be square and non-empty");
    }
    if a.iter().flatten().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return invalid("matrix entries must be finite and non-negative");
    }
    let pattern: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| u64::from(x > 0.0)).collect()).collect();
    let reach = reachability(&pattern);

    // communicating classes, ordered by first member
    let mut class_of = vec![usize::MAX; p];
    let mut classes = Vec::new();
    for i in 0..p {
        if class_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..p).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect();
        for &j in &members {
            class_of[j] = classes.len();
        }
        let cyclic = reach[i][i];
        let (radius, period) = if cyclic {
            let block: Vec<Vec<f64>> = members.iter().map(|&u| members.iter().map(|&v| a[u][v]).collect()).collect();
            (perron_data(&block)?.psi, Some(class_period(&pattern, &members)))
        } else {
            (0.0, None)
        };
        classes.push(CommClass { members, cyclic, radius, basic: false, period, height: None });
    }
    let psi = classes.iter().map(|c| c.radius).fold(0.0, f64::max);
    for c in classes.iter_mut() {
        c.basic = c.cyclic && psi > 0.0 && (c.radius - psi).abs() <= 1e-9 * psi;
    }

    // heights of basic classes over the condensation DAG; a class reaching
    // fewer classes is processed first
    let class_reach = |x: usize, y: usize| reach[classes[x].members[0]][classes[y].members[0]];
    let mut order: Vec<usize> = (0..classes.len()).filter(|&k| classes[k].basic).collect();
    order.sort_by_key(|&k| (0..classes.len()).filter(|&l| l != k && class_reach(k, l)).count());
    let mut height = vec![None; classes.len()];
    for &k in &order {
        let h = order
            .iter()
            .filter(|&&l| l != k && class_reach(k, l))
            .map(|&l| height[l].expect("processed earlier") + 1)
            .max()
            .unwrap_or(0);
        height[k] = Some(h);
    }
    for (k, c) in classes.iter_mut().enumerate() {
        c.height = height[k];
    }
    let mut heights = vec![0; p];
    let mut reaches_basic = vec![false; p];
    let mut rho_j = vec![1u64; p];
    for j in 0..p {
        let rb: Vec<usize> =
            order.iter().copied().filter(|&k| class_of[j] == k || reach[j][classes[k].members[0]]).collect();
        reaches_basic[j] = !rb.is_empty();
        heights[j] = rb.iter().map(|&k| height[k].unwrap()).max().unwrap_or(0);
        rho_j[j] = rb.iter().map(|&k| classes[k].period.unwrap()).fold(1, |l, x| l.lcm(&x));
    }
    let return_periods = (0..p).map(|i| classes[class_of[i]].period).collect();
    let rho = gcd_all(classes.iter().filter(|c| c.basic).filter_map(|c| c.period)).max(1);
    let irreducible = classes.len() == 1 && classes[0].cyclic;
    Ok(ClassStructure {
        psi,
        irreducible,
        heights,
        reaches_basic,
        return_periods,
        rho,
        rho_j,
        access: access_times(&pattern),
        classes,
        class_of,
    })
}

/// Classes, heights, periods and Perron data. Requires uniform γ_i.
pub fn analyze(sys: &BgdSystem) -> Result<IncidenceAnalysis> {
    let g = gamma_data(&sys.hs, &sys.mu)?;
    let (Some(gamma), Some(period)) = (g.gamma, g.period) else {
        return Err(Error::Unsupported("analysis needs a common γ_i (lattice case)".into()));
    };
    let a = incidence_matrix(sys);
    let p = a.len();
    let n = sys.spec.alphabet_size();
    let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let cs = class_structure(&af)?;
    let psi = cs.psi;
    if psi >= n as f64 - 1e-9 {
        return Err(Error::Consistency(format!("spectral radius {psi} is not below N = {n}")));
    }
    let (b, left) = perron_vectors(&af, &cs.classes, psi, cs.irreducible)?;

    // ν: (N I − A) c = s
    let s = sys.inside_counts();
    let m: Vec<Vec<Rational>> = (0..p)
        .map(|i| (0..p).map(|j| rat_int(if i == j { n as i64 } else { 0 }) - rat_int(a[i][j] as i64)).collect())
        .collect();
    let rhs = s.iter().map(|&x| rat_int(x as i64)).collect();
    let c = solve_rational(m, rhs).ok_or_else(|| Error::Consistency("I − A/N is singular".into()))?;

    let d = if psi > 0.0 { psi.ln() / period } else { f64::NEG_INFINITY };
    Ok(IncidenceAnalysis {
        a,
        psi,
        d,
        d_s: g.d_s,
        gamma,
        period,
        n_letters: n,
        classes: cs.classes,
        class_of: cs.class_of,
        irreducible: cs.irreducible,
        heights: cs.heights,
        reaches_basic: cs.reaches_basic,
        return_periods: cs.return_periods,
        rho: cs.rho,
        rho_j: cs.rho_j,
        access: cs.access,
        b,
        left,
        c,
        s,
    })
}

type Vectors = (Option<Vec<f64>>, Option<Vec<f64>>);

pub(crate) fn perron_vectors(af: &[Vec<f64>], classes: &[CommClass], psi: f64, irreducible: bool) -> Result<Vectors> {
    let p = af.len();
    if irreducible {
        let pd = perron_data(af)?;
        return Ok((Some(pd.right), Some(pd.left)));
    }
    let basic: Vec<&CommClass> = classes.iter().filter(|c| c.basic).collect();
    if basic.len() != 1 {
        return Ok((None, None));
    }
    let j = &basic[0].members;
    let block: Vec<Vec<f64>> = j.iter().map(|&u| j.iter().map(|&v| af[u][v]).collect()).collect();
    let pd = perron_data(&block)?;
    let mut b = vec![0.0; p];
    let mut left = vec![0.0; p];
    for (k, &u) in j.iter().enumerate() {
        b[u] = pd.right[k];
        left[u] = pd.left[k];
    }
    // Upstream of the class: (Ψ − A_UU) b_U = A_UJ b_J. Other classes have
    // radius below Ψ, so the system is non-singular.
    let u: Vec<usize> = (0..p).filter(|i| !j.contains(i)).collect();
    if !u.is_empty() {
        let m = nalgebra::DMatrix::from_fn(u.len(), u.len(), |x, y| {
            (if x == y { psi } else { 0.0 }) - af[u[x]][u[y]]
        });
        let rhs = nalgebra::DVector::from_fn(u.len(), |x, _| j.iter().map(|&v| af[u[x]][v] * b[v]).sum());
        let sol = m.lu().solve(&rhs).ok_or_else(|| Error::Consistency("Ψ − A is singular off the basic class".into()))?;
        for (x, &i) in u.iter().enumerate() {
            b[i] = sol[x];
        }
    }
    Ok((Some(b), Some(left)))
}

/// κ_i(D_ξ) = Ψ^{−m} b_{T(ξ)} for a boundary word ξ given by its letters.
pub fn boundary_measure(sys: &BgdSystem, analysis: &IncidenceAnalysis, i: usize, letters: &[usize]) -> Result<f64> {
    let b = analysis.b.as_ref().ok_or_else(|| Error::Unsupported("no Perron vector for this system".into()))?;
    if i >= sys.len() {
        return invalid(format!("domain {i} out of range"));
    }
    let mut cur = i;
    for &k in letters {
        match sys.domains[cur].letters.get(k.wrapping_sub(1)) {
            Some(Letter::Edge { target, .. }) => cur = *target,
            _ => return invalid(format!("letter {k} is not an edge of domain {}", sys.domains[cur].name)),
        }
    }
    Ok(analysis.psi.powi(-(letters.len() as i32)) * b[cur])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgd::bgd_preset;
    use crate::exact::rat;

    #[test]
    fn cut_bottom() {
        let sys = bgd_preset("sg-cut-bottom").unwrap();
        let an = analyze(&sys).unwrap();
        assert_eq!(an.a, vec![vec![2]]);
        assert!((an.psi - 2.0).abs() < 1e-12);
        assert!((an.d - 2.0 * 2f64.ln() / 5f64.ln()).abs() < 1e-12);
        assert_eq!(an.c, vec![rat(1, 1)]);
        assert!((an.b.as_ref().unwrap()[0] - 1.0).abs() < 1e-12);
        for m in 0..5 {
            let w = vec![1; m];
            assert!((boundary_measure(&sys, &an, 0, &w).unwrap() - 0.5f64.powi(m as i32)).abs() < 1e-15);
        }
        assert!(boundary_measure(&sys, &an, 0, &[3]).is_err());
    }

    #[test]
    fn perron_scalar_and_swap() {
        let pd = perron_data(&[vec![2.0]]).unwrap();
        assert!((pd.psi - 2.0).abs() < 1e-14 && (pd.right[0] - 1.0).abs() < 1e-14);
        let pd = perron_data(&[vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        assert!((pd.psi - 2f64.sqrt()).abs() < 1e-12);
        assert!((pd.right[0] / pd.right[1] - 2f64.sqrt()).abs() < 1e-12);
        assert!(perron_data(&[vec![1.0, 1.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn rational_solver() {
        let m = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        assert_eq!(solve_rational(m, vec![rat(3, 1), rat(5, 1)]).unwrap(), vec![rat(4, 5), rat(7, 5)]);
        let m = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]];
        assert!(solve_rational(m, vec![rat(1, 1), rat(2, 1)]).is_none());
    }
}
