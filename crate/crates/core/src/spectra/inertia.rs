//! Eigenvalue counting by recursive Schur complements.
//!
//! For a level-n problem (H, M) and x > 0, the number of eigenvalues ≤ x is
//! the number of negative eigenvalues of H − xM (Sylvester). H − xM is a
//! cell sum, so it can be condensed bottom-up: each cell type at each depth
//! is reduced to a small matrix on the V_0 points it exposes, and the
//! inertia of every eliminated block is accumulated (Haynsworth). Cells of
//! the same type at the same depth see the same argument, so the work is
//! O(#types · depth) small eliminations per evaluation.

use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::Counting;
use crate::cells::{CellTable, Child, Level1, Status};
use crate::error::{invalid, Result};
use crate::exact::rational_to_f64;
use crate::forms::{BoundaryCondition, HarmonicStructure, SelfSimilarMeasure};
use crate::fractal::FractalSpec;

/// Zero modes are counted at this argument; every nonzero eigenvalue of the
/// supported problems is far above it.
const ZERO_PROBE: f64 = 1e-6;
/// Evaluating slightly to the right of x makes the count right-continuous
/// even when x is (numerically) an eigenvalue.
const RIGHT_SHIFT: f64 = 1e-11;

#[derive(Clone, Debug)]
struct Reduced {
    s: DMatrix<f64>,
    /// V_0 indices (own numbering) that `s` acts on, ascending.
    ports: Vec<usize>,
    neg: u64,
}

#[derive(Clone, Debug)]
pub struct InertiaCounter {
    table: CellTable,
    level1: Level1,
    d: DMatrix<f64>,
    r: Vec<f64>,
    mu: Vec<f64>,
    q: usize,
    root: usize,
    depth: usize,
    bc: BoundaryCondition,
    pin_root: bool,
    zero_modes: u64,
}

impl InertiaCounter {
    pub fn new(
        spec: &FractalSpec,
        hs: &HarmonicStructure,
        mu: &SelfSimilarMeasure,
        table: CellTable,
        root: usize,
        depth: usize,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        let q = spec.q();
        let n = spec.alphabet_size();
        hs.check_against(spec)?;
        if mu.weights.len() != n {
            return invalid("measure weights do not match the alphabet");
        }
        table.validate(q, n)?;
        if root >= table.types.len() {
            return invalid(format!("root type {root} is not in the table"));
        }
        let d = DMatrix::from_fn(q, q, |i, j| rational_to_f64(&hs.d[i][j]));
        let mut c = InertiaCounter {
            level1: Level1::new(spec)?,
            table,
            d,
            r: hs.r.iter().map(rational_to_f64).collect(),
            mu: mu.weights.iter().map(rational_to_f64).collect(),
            q,
            root,
            depth,
            bc,
            pin_root: false,
            zero_modes: 0,
        };
        c.zero_modes = c.count_including_zero(ZERO_PROBE);
        Ok(c)
    }

    /// Additionally pins every V_0 point of the root cell (Dirichlet only).
    pub fn with_root_pinned(mut self, pin: bool) -> Self {
        self.pin_root = pin;
        self.zero_modes = self.count_including_zero(ZERO_PROBE);
        self
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn zero_modes(&self) -> u64 {
        self.zero_modes
    }

    /// #{eigenvalues ≤ x} including zero modes.
    pub fn count_including_zero(&self, x: f64) -> u64 {
        let memo = RefCell::new(HashMap::new());
        let red = self.reduce(self.root, self.depth, x * (1.0 + RIGHT_SHIFT), true, &memo);
        red.neg + negatives(&red.s)
    }

    fn status_free(&self, st: Status, root: bool) -> bool {
        st == Status::Inside && !(root && self.pin_root && self.bc == BoundaryCondition::Dirichlet)
    }

    fn reduce(
        &self,
        ty: usize,
        m: usize,
        y: f64,
        root: bool,
        memo: &RefCell<HashMap<(usize, usize, u64, bool), Reduced>>,
    ) -> Reduced {
        let key = (ty, m, y.to_bits(), root);
        if let Some(r) = memo.borrow().get(&key) {
            return r.clone();
        }
        let out = if m == 0 { self.reduce_leaf(ty, y, root) } else { self.reduce_node(ty, m, y, root, memo) };
        memo.borrow_mut().insert(key, out.clone());
        out
    }

    fn reduce_leaf(&self, ty: usize, y: f64, root: bool) -> Reduced {
        let st = &self.table.types[ty].status;
        let a = -&self.d - DMatrix::identity(self.q, self.q) * (y / self.q as f64);
        let ports: Vec<usize> = (0..self.q).filter(|&i| self.status_free(st[i], root)).collect();
        match self.bc {
            BoundaryCondition::Dirichlet => Reduced { s: a.select_rows(&ports).select_columns(&ports), ports, neg: 0 },
            BoundaryCondition::Neumann => {
                // Non-inside corners stay private to this cell.
                let all: Vec<usize> = (0..self.q).collect();
                let (s, neg) = eliminate(&a, &all, &ports);
                Reduced { s, ports, neg }
            }
        }
    }

    fn reduce_node(
        &self,
        ty: usize,
        m: usize,
        y: f64,
        root: bool,
        memo: &RefCell<HashMap<(usize, usize, u64, bool), Reduced>>,
    ) -> Reduced {
        let t = &self.table.types[ty];
        let nv = self.level1.n_vertices;
        let mut pinned = vec![false; nv];
        if self.bc == BoundaryCondition::Dirichlet {
            for (a, &st) in t.status.iter().enumerate() {
                if !self.status_free(st, root) {
                    pinned[self.level1.v0[a]] = true;
                }
            }
        }
        let mut neg = 0;
        let mut blocks = Vec::new();
        for (k, child) in t.children.iter().enumerate() {
            let Child::Typed { ty: cty, perm } = child else { continue };
            let red = self.reduce(*cty, m - 1, y * self.r[k] * self.mu[k], false, memo);
            neg += red.neg;
            let at = |j: usize| self.level1.corner[k][perm[j]];
            if self.bc == BoundaryCondition::Dirichlet {
                for (j, &st) in self.table.types[*cty].status.iter().enumerate() {
                    if st != Status::Inside {
                        pinned[at(j)] = true;
                    }
                }
            }
            let verts: Vec<usize> = red.ports.iter().map(|&j| at(j)).collect();
            blocks.push((verts, red.s / self.r[k]));
        }
        let mut pos = vec![usize::MAX; nv];
        let mut labels = Vec::new();
        for (verts, _) in &blocks {
            for &v in verts {
                if !pinned[v] && pos[v] == usize::MAX {
                    pos[v] = 0;
                    labels.push(v);
                }
            }
        }
        labels.sort_unstable();
        for (i, &v) in labels.iter().enumerate() {
            pos[v] = i;
        }
        let mut a = DMatrix::zeros(labels.len(), labels.len());
        for (verts, s) in &blocks {
            for (p, &vp) in verts.iter().enumerate() {
                if pinned[vp] {
                    continue;
                }
                for (q, &vq) in verts.iter().enumerate() {
                    if !pinned[vq] {
                        a[(pos[vp], pos[vq])] += s[(p, q)];
                    }
                }
            }
        }
        let ports: Vec<usize> = (0..self.q)
            .filter(|&i| {
                let v = self.level1.v0[i];
                pos[v] != usize::MAX && labels.get(pos[v]) == Some(&v) && self.status_free(t.status[i], root)
            })
            .collect();
        let keep: Vec<usize> = ports.iter().map(|&i| pos[self.level1.v0[i]]).collect();
        let all: Vec<usize> = (0..labels.len()).collect();
        let (s, n2) = eliminate(&a, &all, &keep);
        Reduced { s, ports, neg: neg + n2 }
    }
}

impl Counting for InertiaCounter {
    fn count(&self, x: f64) -> u64 {
        self.count_including_zero(x).saturating_sub(self.zero_modes)
    }
}

fn negatives(s: &DMatrix<f64>) -> u64 {
    if s.nrows() == 0 {
        return 0;
    }
    SymmetricEigen::new(s.clone()).eigenvalues.iter().filter(|&&v| v < 0.0).count() as u64
}

/// Schur complement of `a` onto `keep` (indices into `all`), with the number
/// of negative eigenvalues of the eliminated block.
fn eliminate(a: &DMatrix<f64>, all: &[usize], keep: &[usize]) -> (DMatrix<f64>, u64) {
    let inner: Vec<usize> = all.iter().copied().filter(|i| !keep.contains(i)).collect();
    let abb = a.select_rows(keep).select_columns(keep);
    if inner.is_empty() {
        return (abb, 0);
    }
    let aii = a.select_rows(&inner).select_columns(&inner);
    let eig = SymmetricEigen::new(aii);
    let neg = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count() as u64;
    if keep.is_empty() {
        return (abb, neg);
    }
    let abi = a.select_rows(keep).select_columns(&inner);
    // A_ii^{-1} = U Λ^{-1} Uᵀ
    let w = &abi * &eig.eigenvectors;
    let mut scaled = w.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / l);
    }
    (abb - scaled * w.transpose(), neg)
}
