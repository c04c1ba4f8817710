//! Harmonic structures, self-similar measures and level-n discrete forms.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::exact::{rat, rat_int, rational_to_f64, Point, Rational};
use crate::fractal::{build_vertex_set, FractalSpec, VertexSet};

pub type RatMatrix = Vec<Vec<Rational>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn tag(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "D",
            BoundaryCondition::Neumann => "N",
        }
    }
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "D" | "d" | "dirichlet" | "Dirichlet" => Some(BoundaryCondition::Dirichlet),
            "N" | "n" | "neumann" | "Neumann" => Some(BoundaryCondition::Neumann),
            _ => None,
        }
    }
}

/// (D, r): E_0[u] = −Σ D_pq u(p)u(q) and E_n = Σ_{|w|=n} r_w^{-1} E_0[u∘F_w].
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicStructure {
    pub d: RatMatrix,
    pub r: Vec<Rational>,
}

impl HarmonicStructure {
    pub fn new(d: RatMatrix, r: Vec<Rational>) -> Result<Self> {
        let q = d.len();
        if q == 0 || d.iter().any(|row| row.len() != q) {
            return invalid("D must be a non-empty square matrix");
        }
        for i in 0..q {
            for j in 0..q {
                if d[i][j] != d[j][i] {
                    return invalid(format!("D is not symmetric at ({}, {})", i + 1, j + 1));
                }
                if i != j && d[i][j].is_negative() {
                    return invalid(format!("D has a negative off-diagonal entry at ({}, {})", i + 1, j + 1));
                }
            }
            let s: Rational = d[i].iter().sum();
            if !s.is_zero() {
                return invalid(format!("row {} of D does not sum to zero", i + 1));
            }
        }
        // With zero row sums and non-negative off-diagonals, ker D = constants
        // exactly when the conductance graph is connected.
        let mut seen = vec![false; q];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..q {
                if !seen[j] && d[i][j].is_positive() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return invalid("kernel of D is larger than the constants");
        }
        if r.is_empty() {
            return invalid("r is empty");
        }
        for (i, ri) in r.iter().enumerate() {
            if !(ri.is_positive() && *ri < Rational::one()) {
                return invalid(format!("r_{} = {ri} is not in (0,1)", i + 1));
            }
        }
        Ok(HarmonicStructure { d, r })
    }

    pub fn q(&self) -> usize {
        self.d.len()
    }

    pub fn d_f64(&self) -> Vec<Vec<f64>> {
        self.d.iter().map(|row| row.iter().map(rational_to_f64).collect()).collect()
    }

    pub fn check_against(&self, spec: &FractalSpec) -> Result<()> {
        if self.q() != spec.q() {
            return invalid(format!("D is {}x{} but #V_0 = {}", self.q(), self.q(), spec.q()));
        }
        if self.r.len() != spec.alphabet_size() {
            return invalid(format!("{} renormalization factors for {} maps", self.r.len(), spec.alphabet_size()));
        }
        Ok(())
    }

    /// Whether D is invariant under the V_0 permutation σ.
    pub fn invariant_under(&self, perm: &[usize]) -> bool {
        let q = self.q();
        (0..q).all(|i| (0..q).all(|j| self.d[perm[i]][perm[j]] == self.d[i][j]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarMeasure {
    pub weights: Vec<Rational>,
}

impl SelfSimilarMeasure {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("measure has no weights");
        }
        for (i, w) in weights.iter().enumerate() {
            if !(w.is_positive() && *w < Rational::one()) {
                return invalid(format!("mu_{} = {w} is not in (0,1)", i + 1));
            }
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return invalid(format!("measure weights sum to {total}, not 1"));
        }
        Ok(SelfSimilarMeasure { weights })
    }

    pub fn uniform(n: usize) -> Self {
        SelfSimilarMeasure { weights: vec![rat(1, n as i64); n] }
    }

    pub fn cell_measure(&self, letters: &[usize]) -> Rational {
        letters.iter().fold(Rational::one(), |acc, &l| acc * &self.weights[l - 1])
    }
}

/// Standard SG structure: D = [[-2,1,1],[1,-2,1],[1,1,-2]], r_i = 3/5.
pub fn sg_harmonic() -> HarmonicStructure {
    let d = (0..3)
        .map(|i| (0..3).map(|j| if i == j { rat_int(-2) } else { rat_int(1) }).collect())
        .collect();
    HarmonicStructure::new(d, vec![rat(3, 5); 3]).expect("valid preset")
}

/// D6-invariant snowflake structure. The exact eigenform is irrational
/// (conductances 1 : 0.48390222… : 0.39501179… between hexagon vertices at
/// distance 1, 2, 3 and r ≈ 0.5430451849); these are rational approximants
/// accurate to ~1e-10. `r` is a free input everywhere else.
pub fn snowflake_harmonic(r: Rational) -> Result<HarmonicStructure> {
    let c = [rat(1, 1), rat(28467, 58828), rat(17089, 43262)];
    let mut d = vec![vec![Rational::zero(); 6]; 6];
    for i in 0..6usize {
        for j in 0..6usize {
            if i != j {
                let k = (i as i64 - j as i64).rem_euclid(6) as usize;
                d[i][j] = c[k.min(6 - k) - 1].clone();
            }
        }
        let s: Rational = d[i].iter().sum();
        d[i][i] = -s;
    }
    HarmonicStructure::new(d, vec![r; 7])
}

pub fn snowflake_default_r() -> Rational {
    rat(18400, 33883)
}

#[derive(Clone, Debug)]
pub struct Compatibility {
    pub pass: bool,
    pub residual: Rational,
    pub schur: RatMatrix,
}

/// Eliminates `interior` from the symmetric matrix `a` (exact Gaussian
/// elimination), returning the Schur complement on `keep` in that order.
pub fn schur_complement(a: &RatMatrix, keep: &[usize], interior: &[usize]) -> Result<RatMatrix> {
    let order: Vec<usize> = interior.iter().chain(keep.iter()).copied().collect();
    let n = order.len();
    let mut m: RatMatrix = order.iter().map(|&i| order.iter().map(|&j| a[i][j].clone()).collect()).collect();
    let ni = interior.len();
    for p in 0..ni {
        if m[p][p].is_zero() {
            return Err(Error::NonEliminable(format!("zero pivot while eliminating interior vertex {}", interior[p])));
        }
        let piv = m[p][p].clone();
        for i in p + 1..n {
            if m[i][p].is_zero() {
                continue;
            }
            let f = &m[i][p] / &piv;
            for j in p..n {
                if !m[p][j].is_zero() {
                    let t = &f * &m[p][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Ok((ni..n).map(|i| (ni..n).map(|j| m[i][j].clone()).collect()).collect())
}

fn level_one_stiffness(hs: &HarmonicStructure, v1: &VertexSet) -> RatMatrix {
    let n = v1.len();
    let mut h = vec![vec![Rational::zero(); n]; n];
    for cell in &v1.cells {
        let k = cell.word.letters[0];
        let inv_r = Rational::one() / &hs.r[k - 1];
        for (a, &va) in cell.corners.iter().enumerate() {
            for (b, &vb) in cell.corners.iter().enumerate() {
                h[va][vb] -= &hs.d[a][b] * &inv_r;
            }
        }
    }
    h
}

/// Schur complement of the level-1 stiffness onto V_0, compared with −D.
pub fn check_compatibility(hs: &HarmonicStructure, spec: &FractalSpec) -> Result<Compatibility> {
    hs.check_against(spec)?;
    let v1 = build_vertex_set(spec, 1)?;
    let h = level_one_stiffness(hs, &v1);
    let keep: Vec<usize> = spec.boundary.iter().map(|p| v1.id(p).expect("V_0 ⊂ V_1")).collect();
    let interior: Vec<usize> = (0..v1.len()).filter(|i| !keep.contains(i)).collect();
    let schur = schur_complement(&h, &keep, &interior)?;
    let mut residual = Rational::zero();
    for i in 0..hs.q() {
        for j in 0..hs.q() {
            let diff = (&schur[i][j] + &hs.d[i][j]).abs();
            if diff > residual {
                residual = diff;
            }
        }
    }
    Ok(Compatibility { pass: residual.is_zero(), residual, schur })
}

#[derive(Clone, Debug)]
pub struct GammaData {
    pub gammas: Vec<f64>,
    pub uniform: bool,
    pub gamma: Option<f64>,
    /// T = −log γ (uniform case only).
    pub period: Option<f64>,
    pub d_s: f64,
}

/// γ_i = √(r_i μ_i) and the spectral exponent d_S with Σ γ_i^{d_S} = 1.
pub fn gamma_data(hs: &HarmonicStructure, mu: &SelfSimilarMeasure) -> Result<GammaData> {
    if hs.r.len() != mu.weights.len() {
        return invalid("r and mu have different lengths");
    }
    let products: Vec<Rational> = hs.r.iter().zip(&mu.weights).map(|(r, m)| r * m).collect();
    let gammas: Vec<f64> = products.iter().map(|p| rational_to_f64(p).sqrt()).collect();
    let uniform = products.iter().all(|p| *p == products[0]);
    let n = gammas.len() as f64;
    if uniform {
        let g = gammas[0];
        return Ok(GammaData { gammas, uniform, gamma: Some(g), period: Some(-g.ln()), d_s: n.ln() / -g.ln() });
    }
    // Σ γ_i^s is strictly decreasing in s, N at s = 0 and → 0.
    let f = |s: f64| gammas.iter().map(|g| g.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    Ok(GammaData { gammas, uniform, gamma: None, period: None, d_s: 0.5 * (lo + hi) })
}

/// A level-n generalized eigenproblem H u = λ M u over the free vertices.
#[derive(Clone, Debug)]
pub struct LevelForm {
    pub level: usize,
    pub tag: String,
    pub bc: BoundaryCondition,
    /// Point carried by each free degree of freedom. A point can occur more
    /// than once when a boundary vertex is split between the sides of a cut.
    pub labels: Vec<Point>,
    /// Upper and lower triangle, sorted by (row, col).
    pub stiffness: BTreeMap<(usize, usize), Rational>,
    pub mass: Vec<Rational>,
    pub constrained: Vec<Point>,
}

impl LevelForm {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn stiffness_f64(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut h = nalgebra::DMatrix::zeros(n, n);
        for (&(i, j), v) in &self.stiffness {
            h[(i, j)] = rational_to_f64(v);
        }
        h
    }

    pub fn mass_f64(&self) -> Vec<f64> {
        self.mass.iter().map(rational_to_f64).collect()
    }

    pub fn total_mass(&self) -> Rational {
        self.mass.iter().sum()
    }

    /// Plain-text sparse export: one "row col value" line per stored entry.
    pub fn stiffness_triplets(&self) -> String {
        let mut out = String::new();
        for (&(i, j), v) in &self.stiffness {
            out.push_str(&format!("{i} {j} {v}\n"));
        }
        out
    }

    pub fn mass_triplets(&self) -> String {
        self.mass.iter().enumerate().map(|(i, m)| format!("{i} {i} {m}\n")).collect()
    }
}

/// Accumulates cell contributions over arbitrary (possibly repeated) slots.
pub(crate) struct FormBuilder<'a> {
    hs: &'a HarmonicStructure,
    entries: BTreeMap<(usize, usize), Rational>,
    mass: Vec<Rational>,
    q: Rational,
}

impl<'a> FormBuilder<'a> {
    pub(crate) fn new(hs: &'a HarmonicStructure, dofs: usize) -> Self {
        FormBuilder { hs, entries: BTreeMap::new(), mass: vec![Rational::zero(); dofs], q: rat_int(hs.q() as i64) }
    }

    /// `dofs[a]` is the free index of corner a, or None when pinned.
    pub(crate) fn add_cell(&mut self, dofs: &[Option<usize>], inv_r: &Rational, mu: &Rational) {
        let m = mu / &self.q;
        for (a, da) in dofs.iter().enumerate() {
            let Some(ia) = *da else { continue };
            self.mass[ia] += &m;
            for (b, db) in dofs.iter().enumerate() {
                let Some(ib) = *db else { continue };
                let v = -(&self.hs.d[a][b] * inv_r);
                if v.is_zero() {
                    continue;
                }
                *self.entries.entry((ia, ib)).or_insert_with(Rational::zero) += v;
            }
        }
    }

    pub(crate) fn finish(
        mut self,
        level: usize,
        tag: String,
        bc: BoundaryCondition,
        labels: Vec<Point>,
        constrained: Vec<Point>,
    ) -> Result<LevelForm> {
        if labels.is_empty() {
            return Err(Error::Degenerate("no free vertices".into()));
        }
        self.entries.retain(|_, v| !v.is_zero());
        if let Some(i) = self.mass.iter().position(|m| !m.is_positive()) {
            return Err(Error::Degenerate(format!("free vertex {i} carries no mass")));
        }
        Ok(LevelForm { level, tag, bc, labels, stiffness: self.entries, mass: self.mass, constrained })
    }
}

/// Cell-sum assembly over all level-n cells with lumped mass μ_w/Q.
pub fn assemble(
    hs: &HarmonicStructure,
    mu: &SelfSimilarMeasure,
    vs: &VertexSet,
    dirichlet: &[usize],
) -> Result<LevelForm> {
    for &v in dirichlet {
        if v >= vs.len() {
            return invalid(format!("Dirichlet vertex {v} is not in the vertex set"));
        }
    }
    let mut free_index = vec![None; vs.len()];
    let mut labels = Vec::new();
    for v in 0..vs.len() {
        if !dirichlet.contains(&v) {
            free_index[v] = Some(labels.len());
            labels.push(vs.points[v].clone());
        }
    }
    let mut builder = FormBuilder::new(hs, labels.len());
    for cell in &vs.cells {
        let inv_r = cell.word.letters.iter().fold(Rational::one(), |acc, &l| acc / &hs.r[l - 1]);
        let m = mu.cell_measure(&cell.word.letters);
        let dofs: Vec<Option<usize>> = cell.corners.iter().map(|&c| free_index[c]).collect();
        builder.add_cell(&dofs, &inv_r, &m);
    }
    let bc = if dirichlet.is_empty() { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
    let constrained = dirichlet.iter().map(|&v| vs.points[v].clone()).collect();
    builder.finish(vs.level, "K".into(), bc, labels, constrained)
}
