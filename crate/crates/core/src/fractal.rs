//! Symbolic and geometric description of p.c.f. self-similar sets.

use std::collections::HashMap;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::exact::{rat, Affine, Point, QuadField, Surd};

pub const DEFAULT_LEVEL_CAP: usize = 12;

#[derive(Clone, Debug)]
pub struct FractalSpec {
    pub name: String,
    pub field: QuadField,
    pub maps: Vec<Affine>,
    pub boundary: Vec<Point>,
    /// Isometries of K permuting V_0; edges of a BGD system may precompose
    /// with one of them. Not part of the IFS.
    pub symmetries: Vec<Affine>,
}

impl FractalSpec {
    pub fn new(
        name: impl Into<String>,
        field: QuadField,
        maps: Vec<Affine>,
        boundary: Vec<Point>,
        symmetries: Vec<Affine>,
    ) -> Result<Self> {
        if maps.len() < 2 {
            return invalid("need at least two maps");
        }
        for (i, m) in maps.iter().enumerate() {
            let l = m.lipschitz(&field);
            if !(l > 0.0 && l < 1.0) {
                return invalid(format!("map {} is not a contraction (ratio {l})", i + 1));
            }
        }
        if boundary.is_empty() {
            return invalid("boundary set V_0 is empty");
        }
        for i in 0..boundary.len() {
            for j in 0..i {
                if boundary[i] == boundary[j] {
                    return invalid(format!("boundary points {} and {} coincide", j + 1, i + 1));
                }
            }
        }
        let spec = FractalSpec { name: name.into(), field, maps, boundary, symmetries };
        for k in 0..spec.symmetries.len() {
            spec.symmetry_permutation(k)?;
        }
        Ok(spec)
    }

    pub fn alphabet_size(&self) -> usize {
        self.maps.len()
    }

    pub fn q(&self) -> usize {
        self.boundary.len()
    }

    pub fn boundary_index(&self, p: &Point) -> Option<usize> {
        self.boundary.iter().position(|b| b == p)
    }

    /// σ with R(p_i) = p_{σ(i)} for symmetry `k`.
    pub fn symmetry_permutation(&self, k: usize) -> Result<Vec<usize>> {
        let r = self
            .symmetries
            .get(k)
            .ok_or_else(|| Error::InvalidInput(format!("no symmetry with index {k}")))?;
        let mut perm = Vec::with_capacity(self.q());
        for p in &self.boundary {
            let img = r.apply(&self.field, p);
            match self.boundary_index(&img) {
                Some(j) => perm.push(j),
                None => return invalid(format!("symmetry {k} does not preserve V_0")),
            }
        }
        Ok(perm)
    }

    pub fn map_of_word(&self, w: &Word) -> Result<Affine> {
        self.check_word(w)?;
        let mut m = Affine::identity();
        for &l in &w.letters {
            m = m.compose(&self.field, &self.maps[l - 1]);
        }
        Ok(m)
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        for &l in &w.letters {
            if l == 0 || l > self.alphabet_size() {
                return Err(Error::InvalidWord { letter: l, alphabet: self.alphabet_size() });
            }
        }
        Ok(())
    }

    pub fn to_f64(&self, p: &Point) -> [f64; 2] {
        crate::exact::point_f64(&self.field, p)
    }
}

/// A word over {1..N}; letters are stored 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub letters: Vec<usize>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }
    pub fn new(letters: Vec<usize>) -> Self {
        Word { letters }
    }
    pub fn len(&self) -> usize {
        self.letters.len()
    }
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
    pub fn child(&self, letter: usize) -> Word {
        let mut letters = self.letters.clone();
        letters.push(letter);
        Word { letters }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// F_w(p) with F_w = F_{w_1} ∘ ⋯ ∘ F_{w_n}.
pub fn apply_word(spec: &FractalSpec, w: &Word, p: &Point) -> Result<Point> {
    spec.check_word(w)?;
    let mut q = p.clone();
    for &l in w.letters.iter().rev() {
        q = spec.maps[l - 1].apply(&spec.field, &q);
    }
    Ok(q)
}

/// F_w(V_0) in boundary order.
pub fn cell_of(spec: &FractalSpec, w: &Word) -> Result<Vec<Point>> {
    spec.boundary.iter().map(|p| apply_word(spec, w, p)).collect()
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub word: Word,
    pub corners: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct VertexSet {
    pub level: usize,
    pub points: Vec<Point>,
    pub index: HashMap<Point, usize>,
    pub cells: Vec<Cell>,
    /// cells containing each vertex
    pub incidence: Vec<Vec<usize>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn id(&self, p: &Point) -> Option<usize> {
        self.index.get(p).copied()
    }
    pub fn cells_of_vertex(&self, v: usize) -> impl Iterator<Item = &Word> {
        self.incidence[v].iter().map(move |&c| &self.cells[c].word)
    }
}

pub fn level_cap() -> usize {
    std::env::var("FRACTAL_SPECTRA_LEVEL_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_LEVEL_CAP)
}

pub fn check_level(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Resource(format!("level {n} exceeds the level cap {cap}")));
    }
    Ok(())
}

pub fn build_vertex_set(spec: &FractalSpec, n: usize) -> Result<VertexSet> {
    build_vertex_set_capped(spec, n, level_cap())
}

pub fn build_vertex_set_capped(spec: &FractalSpec, n: usize, cap: usize) -> Result<VertexSet> {
    check_level(n, cap)?;
    let mut vs = VertexSet {
        level: n,
        points: Vec::new(),
        index: HashMap::new(),
        cells: Vec::new(),
        incidence: Vec::new(),
    };
    // Depth-first over words carrying the composed map, so each cell costs
    // one composition instead of n.
    let mut stack = vec![(Word::empty(), Affine::identity())];
    while let Some((w, m)) = stack.pop() {
        if w.len() == n {
            let cell_id = vs.cells.len();
            let mut corners = Vec::with_capacity(spec.q());
            for p in &spec.boundary {
                let img = m.apply(&spec.field, p);
                let id = match vs.index.get(&img) {
                    Some(&id) => id,
                    None => {
                        let id = vs.points.len();
                        vs.index.insert(img.clone(), id);
                        vs.points.push(img);
                        vs.incidence.push(Vec::new());
                        id
                    }
                };
                vs.incidence[id].push(cell_id);
                corners.push(id);
            }
            vs.cells.push(Cell { word: w, corners });
            continue;
        }
        for l in (1..=spec.alphabet_size()).rev() {
            stack.push((w.child(l), m.compose(&spec.field, &spec.maps[l - 1])));
        }
    }
    Ok(vs)
}

/// The Sierpiński gasket: p1=(0,0), p2=(1,0), p3=(1/2,√3/2), F_i(x)=(x+p_i)/2.
pub fn sierpinski_gasket() -> FractalSpec {
    let field = QuadField::new(3).expect("3 is not a square");
    let z = || Surd::zero();
    let boundary = vec![
        [z(), z()],
        [Surd::rational(rat(1, 1)), z()],
        [Surd::rational(rat(1, 2)), Surd::new(rat(0, 1), rat(1, 2))],
    ];
    let maps = boundary.iter().map(|p| Affine::homothety(rat(1, 2), p)).collect();
    FractalSpec::new("sg", field, maps, boundary, Vec::new()).expect("valid preset")
}

/// Lindstrøm snowflake: hexagon vertices p_k = exp(2πik/6), centre p_7 = 0,
/// F_k(x) = (x − p_k)/3 + p_k; V_0 = the six hexagon vertices. Symmetry k is
/// the rotation by k·60°, so it sends p_j to p_{j+k}.
pub fn lindstrom_snowflake() -> FractalSpec {
    let field = QuadField::new(3).expect("3 is not a square");
    let half = rat(1, 2);
    let hexagon: Vec<Point> = (1..=6)
        .map(|k| {
            let (c, s) = match k {
                1 => (Surd::rational(half.clone()), Surd::new(rat(0, 1), half.clone())),
                2 => (Surd::rational(-half.clone()), Surd::new(rat(0, 1), half.clone())),
                3 => (Surd::rational(rat(-1, 1)), Surd::zero()),
                4 => (Surd::rational(-half.clone()), Surd::new(rat(0, 1), -half.clone())),
                5 => (Surd::rational(half.clone()), Surd::new(rat(0, 1), -half.clone())),
                _ => (Surd::rational(rat(1, 1)), Surd::zero()),
            };
            [c, s]
        })
        .collect();
    let mut maps: Vec<Affine> = hexagon.iter().map(|p| Affine::homothety(rat(1, 3), p)).collect();
    maps.push(Affine::homothety(rat(1, 3), &[Surd::zero(), Surd::zero()]));
    let mut symmetries = Vec::new();
    let rot60 = {
        let c = Surd::rational(half.clone());
        let s = Surd::new(rat(0, 1), half.clone());
        Affine { linear: [[c.clone(), -&s], [s, c]], translation: [Surd::zero(), Surd::zero()] }
    };
    let mut r = Affine::identity();
    for _ in 0..6 {
        symmetries.push(r.clone());
        r = rot60.compose(&field, &r);
    }
    FractalSpec::new("snowflake", field, maps, hexagon, symmetries).expect("valid preset")
}

pub fn fractal_preset(name: &str) -> Option<FractalSpec> {
    match name {
        "sg" => Some(sierpinski_gasket()),
        "snowflake" => Some(lindstrom_snowflake()),
        _ => None,
    }
}
