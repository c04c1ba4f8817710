//! Level-n realization of the domains: free vertices, the recursively built
//! boundary D_i ∩ V_n, discrete forms, counters, and a geometric check of
//! the substitution rules.

use std::collections::{BTreeSet, HashSet};

use super::{BgdSystem, Letter, Variant};
use crate::cells::{expand, geometric_form, Status};
use crate::error::{invalid, Result};
use crate::exact::{Affine, Point};
use crate::forms::{BoundaryCondition, LevelForm};
use crate::spectra::InertiaCounter;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Realization {
    /// Pin exactly the vertices on the boundary of the domain.
    #[default]
    Boundary,
    /// Additionally pin every point of V_0 (Dirichlet only).
    PinV0,
}

#[derive(Clone, Debug)]
pub struct DomainVertices {
    pub free: Vec<Point>,
    pub boundary: Vec<Point>,
}

fn map_for(sys: &BgdSystem, k: usize, symmetry: usize) -> Affine {
    let f = &sys.spec.field;
    match sys.spec.symmetries.get(symmetry) {
        Some(r) if symmetry != 0 => sys.spec.maps[k].compose(f, r),
        _ => sys.spec.maps[k].clone(),
    }
}

impl BgdSystem {
    /// D_i ∩ V_n from the V_0 trace and the edges: D_i ∩ V_n is the union of
    /// Φ_η(D_{T(η)} ∩ V_{n−1}) over η ∈ Γ(i), plus Φ_η(extra V_0 points)
    /// under the widetilde variant.
    pub fn recursive_boundary(&self, n: usize) -> Vec<BTreeSet<Point>> {
        let q = self.spec.q();
        let mut cur: Vec<BTreeSet<Point>> = self
            .domains
            .iter()
            .map(|d| (0..q).filter(|&a| d.status[a] == Status::Boundary).map(|a| self.spec.boundary[a].clone()).collect())
            .collect();
        for _ in 0..n {
            cur = self
                .domains
                .iter()
                .map(|d| {
                    let mut out = BTreeSet::new();
                    for (k, l) in d.edges() {
                        let Letter::Edge { target, symmetry, extra_boundary } = l else { unreachable!() };
                        let m = map_for(self, k, *symmetry);
                        out.extend(cur[*target].iter().map(|p| m.apply(&self.spec.field, p)));
                        if self.variant == Variant::Widetilde {
                            out.extend(extra_boundary.iter().map(|&a| m.apply(&self.spec.field, &self.spec.boundary[a])));
                        }
                    }
                    out
                })
                .collect();
        }
        cur
    }

    pub fn domain_vertices(&self, i: usize, n: usize) -> Result<DomainVertices> {
        self.check_domain(i)?;
        let (leaves, claims) = expand(&self.spec, &self.cell_table(), i, n)?;
        let mut seen = HashSet::new();
        let mut free = Vec::new();
        for leaf in &leaves {
            for p in &leaf.corners {
                if claims[p].iter().all(|&s| s == Status::Inside) && seen.insert(p.clone()) {
                    free.push(p.clone());
                }
            }
        }
        let boundary = self.recursive_boundary(n).swap_remove(i).into_iter().collect();
        Ok(DomainVertices { free, boundary })
    }

    pub fn domain_form(&self, i: usize, n: usize, bc: BoundaryCondition, realization: Realization) -> Result<LevelForm> {
        self.check_domain(i)?;
        geometric_form(&self.spec, &self.hs, &self.mu, &self.cell_table(), i, n, bc, realization == Realization::PinV0)
    }

    /// Inertia counter for ρ^{Ω_i} at level n.
    pub fn domain_counter(&self, i: usize, n: usize, bc: BoundaryCondition, realization: Realization) -> Result<InertiaCounter> {
        self.check_domain(i)?;
        Ok(InertiaCounter::new(&self.spec, &self.hs, &self.mu, self.cell_table(), i, n, bc)?
            .with_root_pinned(realization == Realization::PinV0))
    }

    /// Counter for the whole fractal (Dirichlet on V_0 or Neumann).
    pub fn base_counter(&self, n: usize, bc: BoundaryCondition) -> Result<InertiaCounter> {
        let t = self.cell_table();
        let root = match bc {
            BoundaryCondition::Dirichlet => t.killed,
            BoundaryCondition::Neumann => t.full,
        };
        InertiaCounter::new(&self.spec, &self.hs, &self.mu, t, root, n, bc)
    }

    fn check_domain(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return invalid(format!("domain {i} out of range (system has {})", self.len()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub level: usize,
    pub domain: String,
    /// 1-based letter, or None for the whole-domain comparison.
    pub letter: Option<usize>,
    pub point: [f64; 2],
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub pass: bool,
    pub levels_checked: usize,
    pub first_violation: Option<Violation>,
}

/// Boundary of the realized Ω_i in V_n: vertices of included level-n cells
/// that are not interior (some cell containing them claims a non-inside
/// status) but lie in the closure (some cell claims inside or boundary).
/// Accumulation points such as the fixed point of a self-similar spiral are
/// caught by the claims even when no nearby cell has an interior vertex.
fn geometric_boundary(sys: &BgdSystem, i: usize, n: usize) -> Result<BTreeSet<Point>> {
    let (leaves, claims) = expand(&sys.spec, &sys.cell_table(), i, n)?;
    let vn: HashSet<&Point> = leaves.iter().flat_map(|l| l.corners.iter()).collect();
    Ok(vn
        .into_iter()
        .filter(|p| {
            let c = &claims[*p];
            !c.iter().all(|&s| s == Status::Inside) && c.iter().any(|&s| s != Status::Outside)
        })
        .cloned()
        .collect())
}

/// Checks at every level n ≤ n_max that the geometric boundary of each
/// realized domain equals the recursively built D_i ∩ V_n, and that inside
/// every edge cell the boundary is exactly the image of the target's (and
/// that inside cells carry none).
pub fn bgd_consistency(sys: &BgdSystem, n_max: usize) -> Result<ConsistencyReport> {
    if n_max < 1 {
        return invalid("consistency check needs n_max ≥ 1");
    }
    let f = &sys.spec.field;
    let report = |level, d: &super::Domain, letter, p: &Point, detail: &str| ConsistencyReport {
        pass: false,
        levels_checked: level,
        first_violation: Some(Violation {
            level,
            domain: d.name.clone(),
            letter,
            point: sys.spec.to_f64(p),
            detail: detail.into(),
        }),
    };
    let mut prev = sys.recursive_boundary(0);
    for n in 0..=n_max {
        let rec = sys.recursive_boundary(n);
        for (i, d) in sys.domains.iter().enumerate() {
            let geo = geometric_boundary(sys, i, n)?;
            if let Some(p) = geo.difference(&rec[i]).next() {
                return Ok(report(n, d, None, p, "geometric boundary point missing from the recursion"));
            }
            if let Some(p) = rec[i].difference(&geo).next() {
                return Ok(report(n, d, None, p, "recursive boundary point is not on the geometric boundary"));
            }
            if n == 0 {
                continue;
            }
            // per letter: boundary ∩ F_k(V_{n−1}) against Φ_η(D_j ∩ V_{n−1})
            let sub = crate::fractal::build_vertex_set(&sys.spec, n - 1)?;
            for (k, l) in d.letters.iter().enumerate() {
                // an outside cell may still share corners with the boundary
                if *l == Letter::Outside {
                    continue;
                }
                let cell: BTreeSet<Point> = sub.points.iter().map(|p| sys.spec.maps[k].apply(f, p)).collect();
                let actual: BTreeSet<Point> = geo.intersection(&cell).cloned().collect();
                let expected: BTreeSet<Point> = match l {
                    Letter::Inside | Letter::Outside => BTreeSet::new(),
                    Letter::Edge { target, symmetry, extra_boundary } => {
                        let m = map_for(sys, k, *symmetry);
                        let mut e: BTreeSet<Point> = prev[*target].iter().map(|p| m.apply(f, p)).collect();
                        if sys.variant == Variant::Widetilde {
                            e.extend(extra_boundary.iter().map(|&a| m.apply(f, &sys.spec.boundary[a])));
                        }
                        e
                    }
                };
                if let Some(p) = actual.symmetric_difference(&expected).next() {
                    let what = if actual.contains(p) {
                        "boundary point in this cell is not the image of the target's boundary"
                    } else {
                        "image of the target's boundary is not on the boundary"
                    };
                    return Ok(report(n, d, Some(k + 1), p, what));
                }
            }
        }
        prev = rec;
    }
    Ok(ConsistencyReport { pass: true, levels_checked: n_max, first_violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgd::bgd_preset;

    #[test]
    fn cut_bottom_level_one() {
        let sys = bgd_preset("sg-cut-bottom").unwrap();
        let dv = sys.domain_vertices(0, 1).unwrap();
        assert_eq!(dv.boundary.len(), 3);
        assert_eq!(dv.free.len(), 3);
        let f = sys.domain_form(0, 1, BoundaryCondition::Dirichlet, Realization::Boundary).unwrap();
        assert_eq!(f.dim(), 3);
    }

    #[test]
    fn halves_point_boundary() {
        let sys = bgd_preset("sg-halves").unwrap();
        for n in 0..4 {
            let dv = sys.domain_vertices(1, n).unwrap();
            assert_eq!(dv.boundary, vec![sys.spec.boundary[1].clone()]);
        }
    }
}
