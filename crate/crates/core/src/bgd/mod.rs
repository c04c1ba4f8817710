//! Boundary graph-directed domain systems.
//!
//! A system is substitution data: for every domain Ω_i and letter k, the
//! cell F_k(K) is either inside Ω_i, outside it, or meets it in a scaled
//! copy F_k(R(Ω_j)) of another domain (an edge η with Φ_η = F_k∘R). The
//! V_0 trace (status of each p_a) closes the recursion. Geometry is derived.

mod analysis;
mod presets;
mod realize;
mod whitney;

pub use analysis::{
    analyze, boundary_measure, class_structure, incidence_matrix, perron_data, ClassStructure, CommClass, IncidenceAnalysis,
    PerronData,
};
pub use presets::{bgd_preset, snowflake_koch_with_r, BGD_PRESETS};
pub use realize::{bgd_consistency, ConsistencyReport, DomainVertices, Realization, Violation};
pub use whitney::{whitney, whitney_by_predicate, whitney_volume_exact, CellClass, WhitneyReport};

use crate::cells::{CellTable, CellType, Child, Status};
use crate::error::{invalid, Result};
use crate::forms::{HarmonicStructure, SelfSimilarMeasure};
use crate::fractal::FractalSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Bgd,
    /// Edges may add V_0 points of the target cell to the boundary.
    Widetilde,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Letter {
    Inside,
    Outside,
    Edge {
        target: usize,
        /// Index into the fractal's symmetry list; 0 is the identity when the
        /// list is non-empty, and must be 0 when it is empty.
        symmetry: usize,
        /// V_0 indices (of the target cell) that the boundary gains under
        /// the widetilde variant.
        extra_boundary: Vec<usize>,
    },
}

impl Letter {
    pub fn edge(target: usize) -> Self {
        Letter::Edge { target, symmetry: 0, extra_boundary: Vec::new() }
    }

    pub fn rotated(target: usize, symmetry: usize) -> Self {
        Letter::Edge { target, symmetry, extra_boundary: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub letters: Vec<Letter>,
    /// Status of each V_0 point: inside Ω_i, on D_i, or outside the closure.
    pub status: Vec<Status>,
}

impl Domain {
    pub fn new(name: &str, status: &str, letters: Vec<Letter>) -> Result<Self> {
        let status = status
            .chars()
            .map(|c| Status::from_char(c).ok_or_else(|| crate::Error::InvalidInput(format!("bad status '{c}' in domain {name}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Domain { name: name.into(), letters, status })
    }

    pub fn inside_count(&self) -> usize {
        self.letters.iter().filter(|l| **l == Letter::Inside).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &Letter)> {
        self.letters.iter().enumerate().filter(|(_, l)| matches!(l, Letter::Edge { .. }))
    }

    pub fn has_boundary(&self) -> bool {
        self.status.contains(&Status::Boundary) || self.edges().next().is_some()
    }
}

#[derive(Clone, Debug)]
pub struct BgdSystem {
    pub name: String,
    pub spec: FractalSpec,
    pub hs: HarmonicStructure,
    pub mu: SelfSimilarMeasure,
    pub domains: Vec<Domain>,
    pub variant: Variant,
}

impl BgdSystem {
    pub fn new(
        name: impl Into<String>,
        spec: FractalSpec,
        hs: HarmonicStructure,
        mu: SelfSimilarMeasure,
        domains: Vec<Domain>,
        variant: Variant,
    ) -> Result<Self> {
        let sys = BgdSystem { name: name.into(), spec, hs, mu, domains, variant };
        sys.validate()?;
        Ok(sys)
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.domains.iter().position(|d| d.name == name)
    }

    /// s_i = number of inside letters.
    pub fn inside_counts(&self) -> Vec<usize> {
        self.domains.iter().map(Domain::inside_count).collect()
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        BgdSystem { variant, ..self.clone() }
    }

    fn perm_of(&self, symmetry: usize) -> Result<Vec<usize>> {
        if self.spec.symmetries.is_empty() && symmetry == 0 {
            return Ok((0..self.spec.q()).collect());
        }
        self.spec.symmetry_permutation(symmetry)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.spec.alphabet_size();
        let q = self.spec.q();
        let p = self.domains.len();
        if p == 0 {
            return invalid("a BGD system needs at least one domain");
        }
        self.hs.check_against(&self.spec)?;
        if self.mu.weights.len() != n {
            return invalid("measure weights do not match the alphabet");
        }
        let l1 = crate::cells::Level1::new(&self.spec)?;
        for (i, d) in self.domains.iter().enumerate() {
            if d.letters.len() != n {
                return invalid(format!("domain {} has {} letters, expected {n}", d.name, d.letters.len()));
            }
            if d.status.len() != q {
                return invalid(format!("domain {} has {} V_0 statuses, expected {q}", d.name, d.status.len()));
            }
            if self.domains[..i].iter().any(|e| e.name == d.name) {
                return invalid(format!("duplicate domain name {}", d.name));
            }
            if d.status.contains(&Status::Boundary) && d.edges().next().is_none() {
                return invalid(format!("domain {} meets the boundary but has no edges", d.name));
            }
            for (k, letter) in d.letters.iter().enumerate() {
                let (child_status, perm): (Option<&[Status]>, Vec<usize>) = match letter {
                    Letter::Inside => (None, (0..q).collect()),
                    Letter::Outside => (None, (0..q).collect()),
                    Letter::Edge { target, symmetry, extra_boundary } => {
                        if *target >= p {
                            return invalid(format!("domain {} letter {}: edge target {target} out of range", d.name, k + 1));
                        }
                        if let Some(e) = extra_boundary.iter().find(|&&e| e >= q) {
                            return invalid(format!("domain {} letter {}: extra boundary index {e} out of range", d.name, k + 1));
                        }
                        let perm = self.perm_of(*symmetry)?;
                        if !self.hs.invariant_under(&perm) {
                            return invalid(format!("domain {} letter {}: D is not invariant under symmetry {symmetry}", d.name, k + 1));
                        }
                        if *symmetry != 0 {
                            let tau = letter_permutation(&self.spec, *symmetry)?;
                            if tau.iter().enumerate().any(|(a, &b)| self.hs.r[a] != self.hs.r[b] || self.mu.weights[a] != self.mu.weights[b]) {
                                return invalid(format!("domain {} letter {}: r or μ is not invariant under symmetry {symmetry}", d.name, k + 1));
                            }
                        }
                        (Some(&self.domains[*target].status[..]), perm)
                    }
                };
                // A V_0 point lying in this child must get the same status from both.
                for j in 0..q {
                    let Some(a) = l1.v0_index(l1.corner[k][perm[j]]) else { continue };
                    let ok = match (letter, child_status) {
                        (Letter::Inside, _) => d.status[a] == Status::Inside,
                        (Letter::Outside, _) => d.status[a] != Status::Inside,
                        (_, Some(cs)) => cs[j] == d.status[a],
                        _ => true,
                    };
                    if !ok {
                        return invalid(format!(
                            "domain {}: status of p_{} disagrees with letter {}",
                            d.name,
                            a + 1,
                            k + 1
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Domains first (type i = domain i), then the two base types.
    pub fn cell_table(&self) -> CellTable {
        let q = self.spec.q();
        let n = self.spec.alphabet_size();
        let p = self.domains.len();
        let mut table = CellTable { types: Vec::with_capacity(p + 2), full: p, killed: p + 1 };
        for d in &self.domains {
            let children = d
                .letters
                .iter()
                .map(|l| match l {
                    Letter::Inside => Child::Typed { ty: p, perm: (0..q).collect() },
                    Letter::Outside => Child::Outside,
                    Letter::Edge { target, symmetry, .. } => {
                        Child::Typed { ty: *target, perm: self.perm_of(*symmetry).expect("validated") }
                    }
                })
                .collect();
            table.types.push(CellType { name: d.name.clone(), status: d.status.clone(), children });
        }
        table.push_base(q, n);
        table
    }
}

/// τ with R∘F_k = F_{τ(k)}∘R for symmetry R.
pub fn letter_permutation(spec: &FractalSpec, symmetry: usize) -> Result<Vec<usize>> {
    let r = spec
        .symmetries
        .get(symmetry)
        .ok_or_else(|| crate::Error::InvalidInput(format!("no symmetry with index {symmetry}")))?;
    let f = &spec.field;
    let mut tau = Vec::with_capacity(spec.alphabet_size());
    for fk in &spec.maps {
        let lhs = r.compose(f, fk);
        match spec.maps.iter().position(|g| g.compose(f, r) == lhs) {
            Some(t) => tau.push(t),
            None => return invalid(format!("symmetry {symmetry} does not permute the maps")),
        }
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in BGD_PRESETS {
            let sys = bgd_preset(name).unwrap();
            sys.validate().unwrap();
            let t = sys.cell_table();
            t.validate(sys.spec.q(), sys.spec.alphabet_size()).unwrap();
        }
    }

    #[test]
    fn corrupted_status_is_rejected() {
        let mut sys = bgd_preset("sg-cut-bottom").unwrap();
        sys.domains[0].status[2] = Status::Boundary;
        assert!(sys.validate().is_err());
    }

    #[test]
    fn snowflake_rotations_permute_letters() {
        let sf = crate::fractal::lindstrom_snowflake();
        let tau = letter_permutation(&sf, 1).unwrap();
        assert_eq!(tau, vec![1, 2, 3, 4, 5, 0, 6]);
    }
}
