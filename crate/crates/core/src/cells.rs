//! Cell types: the recursion shared by the geometric realization of a domain
//! and by the inertia counter. A type fixes, for one cell, the status of each
//! V_0 point and what each child cell is.

use std::collections::HashMap;

use num_traits::One;

use crate::error::{invalid, Result};
use crate::exact::{Affine, Point, Rational};
use crate::forms::{BoundaryCondition, FormBuilder, HarmonicStructure, LevelForm, SelfSimilarMeasure};
use crate::fractal::{build_vertex_set, check_level, level_cap, FractalSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    /// in the open set
    Inside,
    /// on its boundary
    Boundary,
    /// outside its closure
    Outside,
}

impl Status {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'i' => Some(Status::Inside),
            'b' => Some(Status::Boundary),
            'o' => Some(Status::Outside),
            _ => None,
        }
    }
    pub fn to_char(self) -> char {
        match self {
            Status::Inside => 'i',
            Status::Boundary => 'b',
            Status::Outside => 'o',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Child {
    Outside,
    /// Child cell F_k(R(K)) carries type `ty`; `perm[j]` is the V_0 index p
    /// with R(p_j) = p_{perm[j]}, i.e. child corner j sits at F_k(p_{perm[j]}).
    Typed { ty: usize, perm: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct CellType {
    pub name: String,
    pub status: Vec<Status>,
    pub children: Vec<Child>,
}

#[derive(Clone, Debug)]
pub struct CellTable {
    pub types: Vec<CellType>,
    /// K itself: every point inside, every child inside.
    pub full: usize,
    /// K ∖ V_0.
    pub killed: usize,
}

impl CellTable {
    /// Table holding only the two base types.
    pub fn base(q: usize, n: usize) -> Self {
        let mut t = CellTable { types: Vec::new(), full: 0, killed: 1 };
        t.push_base(q, n);
        t
    }

    pub(crate) fn push_base(&mut self, q: usize, n: usize) {
        let id: Vec<usize> = (0..q).collect();
        self.full = self.types.len();
        self.killed = self.full + 1;
        let full_children = vec![Child::Typed { ty: self.full, perm: id.clone() }; n];
        self.types.push(CellType { name: "K".into(), status: vec![Status::Inside; q], children: full_children.clone() });
        self.types.push(CellType { name: "K\\V0".into(), status: vec![Status::Boundary; q], children: full_children });
    }

    pub fn validate(&self, q: usize, n: usize) -> Result<()> {
        for t in &self.types {
            if t.status.len() != q {
                return invalid(format!("type {} has {} statuses, expected {q}", t.name, t.status.len()));
            }
            if t.children.len() != n {
                return invalid(format!("type {} has {} letters, expected {n}", t.name, t.children.len()));
            }
            for c in &t.children {
                if let Child::Typed { ty, perm } = c {
                    if *ty >= self.types.len() {
                        return invalid(format!("type {} points at missing type {ty}", t.name));
                    }
                    let mut seen = vec![false; q];
                    if perm.len() != q || perm.iter().any(|&p| p >= q || std::mem::replace(&mut seen[p], true)) {
                        return invalid(format!("type {} has a malformed corner permutation", t.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Combinatorics of V_1: which V_1 vertex is corner j of child k.
#[derive(Clone, Debug)]
pub struct Level1 {
    pub n_vertices: usize,
    pub corner: Vec<Vec<usize>>,
    /// V_1 index of p_i
    pub v0: Vec<usize>,
}

impl Level1 {
    pub fn new(spec: &FractalSpec) -> Result<Self> {
        let v1 = build_vertex_set(spec, 1)?;
        let mut corner = vec![Vec::new(); spec.alphabet_size()];
        for cell in &v1.cells {
            corner[cell.word.letters[0] - 1] = cell.corners.clone();
        }
        let v0 = spec.boundary.iter().map(|p| v1.id(p).expect("V_0 ⊂ V_1")).collect();
        Ok(Level1 { n_vertices: v1.len(), corner, v0 })
    }

    pub fn v0_index(&self, v: usize) -> Option<usize> {
        self.v0.iter().position(|&x| x == v)
    }
}

/// One included level-n cell of a typed tree.
#[derive(Clone, Debug)]
pub struct Leaf {
    /// Letters of the type tree (not of the geometric address when
    /// symmetries are involved).
    pub letters: Vec<usize>,
    pub map: Affine,
    pub corners: Vec<Point>,
    /// Whether each corner is reached only through inside statuses.
    pub exposed: Vec<bool>,
    pub ty: usize,
}

/// Depth-first expansion of `root` to depth n. Returns the included leaves
/// and, for every point, the statuses claimed for it by all visited cells.
pub fn expand(
    spec: &FractalSpec,
    table: &CellTable,
    root: usize,
    n: usize,
) -> Result<(Vec<Leaf>, HashMap<Point, Vec<Status>>)> {
    check_level(n, level_cap())?;
    table.validate(spec.q(), spec.alphabet_size())?;
    let l1 = Level1::new(spec)?;
    let q = spec.q();
    let mut leaves = Vec::new();
    let mut claims: HashMap<Point, Vec<Status>> = HashMap::new();
    let mut stack = vec![(Vec::new(), Affine::identity(), root, vec![true; q])];
    while let Some((letters, map, ty, chain)) = stack.pop() {
        let t = &table.types[ty];
        let corners: Vec<Point> = spec.boundary.iter().map(|p| map.apply(&spec.field, p)).collect();
        for (a, c) in corners.iter().enumerate() {
            claims.entry(c.clone()).or_default().push(t.status[a]);
        }
        if letters.len() == n {
            let exposed = (0..q).map(|a| chain[a] && t.status[a] == Status::Inside).collect();
            leaves.push(Leaf { letters, map, corners, exposed, ty });
            continue;
        }
        for (k, child) in t.children.iter().enumerate().rev() {
            let Child::Typed { ty: cty, perm } = child else { continue };
            let sym = symmetry_for(spec, perm)?;
            let cmap = map.compose(&spec.field, &spec.maps[k]).compose(&spec.field, &sym);
            let cchain = (0..q)
                .map(|j| match l1.v0_index(l1.corner[k][perm[j]]) {
                    Some(a) => chain[a] && t.status[a] == Status::Inside,
                    None => true,
                })
                .collect();
            let mut w = letters.clone();
            w.push(k + 1);
            stack.push((w, cmap, *cty, cchain));
        }
    }
    Ok((leaves, claims))
}

/// The isometry realizing a corner permutation.
fn symmetry_for(spec: &FractalSpec, perm: &[usize]) -> Result<Affine> {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return Ok(Affine::identity());
    }
    for k in 0..spec.symmetries.len() {
        if spec.symmetry_permutation(k)? == perm {
            return Ok(spec.symmetries[k].clone());
        }
    }
    invalid(format!("no symmetry of {} realizes the corner permutation {perm:?}", spec.name))
}

/// Assembles the level-n problem of a typed domain on its actual vertices.
///
/// Dirichlet: a vertex is free when every cell containing it claims it as
/// inside. Neumann: a leaf corner reached only through inside statuses is
/// shared with every other such corner at the same point; any other corner
/// stays a private degree of freedom of its leaf (the two sides of a cut are
/// not joined). `pin_root` pins all of the root's V_0 (Dirichlet only).
#[allow(clippy::too_many_arguments)]
pub fn geometric_form(
    spec: &FractalSpec,
    hs: &HarmonicStructure,
    mu: &SelfSimilarMeasure,
    table: &CellTable,
    root: usize,
    n: usize,
    bc: BoundaryCondition,
    pin_root: bool,
) -> Result<LevelForm> {
    hs.check_against(spec)?;
    let (leaves, mut claims) = expand(spec, table, root, n)?;
    if pin_root && bc == BoundaryCondition::Dirichlet {
        for p in &spec.boundary {
            claims.entry(p.clone()).or_default().push(Status::Boundary);
        }
    }
    let mut labels: Vec<Point> = Vec::new();
    let mut shared: HashMap<Point, usize> = HashMap::new();
    let mut constrained: Vec<Point> = Vec::new();
    let mut seen_constrained: HashMap<Point, ()> = HashMap::new();
    let mut slot_of = |p: &Point, labels: &mut Vec<Point>| -> usize {
        *shared.entry(p.clone()).or_insert_with(|| {
            labels.push(p.clone());
            labels.len() - 1
        })
    };
    let mut dofs_per_leaf = Vec::with_capacity(leaves.len());
    for leaf in &leaves {
        let mut dofs = Vec::with_capacity(leaf.corners.len());
        for (a, p) in leaf.corners.iter().enumerate() {
            let d = match bc {
                BoundaryCondition::Dirichlet => {
                    if claims[p].iter().all(|&s| s == Status::Inside) {
                        Some(slot_of(p, &mut labels))
                    } else {
                        if seen_constrained.insert(p.clone(), ()).is_none() {
                            constrained.push(p.clone());
                        }
                        None
                    }
                }
                BoundaryCondition::Neumann => {
                    if leaf.exposed[a] {
                        Some(slot_of(p, &mut labels))
                    } else {
                        labels.push(p.clone());
                        Some(labels.len() - 1)
                    }
                }
            };
            dofs.push(d);
        }
        dofs_per_leaf.push(dofs);
    }
    let mut builder = FormBuilder::new(hs, labels.len());
    for (leaf, dofs) in leaves.iter().zip(&dofs_per_leaf) {
        let inv_r = leaf.letters.iter().fold(Rational::one(), |acc, &l| acc / &hs.r[l - 1]);
        builder.add_cell(dofs, &inv_r, &mu.cell_measure(&leaf.letters));
    }
    builder.finish(n, table.types[root].name.clone(), bc, labels, constrained)
}
