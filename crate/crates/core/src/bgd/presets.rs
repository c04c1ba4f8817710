use super::{BgdSystem, Domain, Letter, Variant};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::forms::{sg_harmonic, snowflake_default_r, snowflake_harmonic, SelfSimilarMeasure};
use crate::fractal::{lindstrom_snowflake, sierpinski_gasket};

pub const BGD_PRESETS: [&str; 6] = ["sg-cut-bottom", "sg-halves", "sg-omega3", "sg-thirds", "sg-tilde", "snowflake-koch"];

use Letter::{Inside as I, Outside as O};

fn e(t: usize) -> Letter {
    Letter::edge(t)
}

fn sg_system(name: &str, domains: Vec<Domain>, variant: Variant) -> Result<BgdSystem> {
    BgdSystem::new(name, sierpinski_gasket(), sg_harmonic(), SelfSimilarMeasure::uniform(3), domains, variant)
}

pub fn bgd_preset(name: &str) -> Result<BgdSystem> {
    let d = Domain::new;
    match name {
        // K minus the bottom edge [p1, p2].
        "sg-cut-bottom" => sg_system(name, vec![d("CB", "bbi", vec![e(0), e(0), I])?], Variant::Bgd),
        // Ω_1: the part of K on the p1 side of the line through p3 and the
        // midpoint of [p1, p2]; Ω_2 = K ∖ {p2}.
        "sg-halves" => sg_system(
            name,
            vec![d("Omega1", "iob", vec![e(1), O, e(0)])?, d("Omega2", "ibi", vec![I, e(1), I])?],
            Variant::Bgd,
        ),
        // Ω_3 = F_3(Ω_3) ∪ F_1(Ω_1 ∖ {p1, p3}) built on top of the halves.
        "sg-omega3" => sg_system(
            name,
            vec![
                d("Omega1", "iob", vec![e(1), O, e(0)])?,
                d("Omega2", "ibi", vec![I, e(1), I])?,
                d("Omega3", "bob", vec![e(3), O, e(2)])?,
                d("Omega4", "bob", vec![e(4), O, e(0)])?,
                d("Omega5", "bbi", vec![e(5), e(1), I])?,
                d("Omega6", "bii", vec![e(5), I, I])?,
            ],
            Variant::Bgd,
        ),
        // Ω_δ: the part of K above the horizontal line meeting [p1, p3] at
        // distance δ from p3; δ = 2/3 first.
        "sg-thirds" => sg_system(
            name,
            vec![d("Omega2/3", "ooi", vec![e(1), e(1), I])?, d("Omega1/3", "ooi", vec![O, O, e(0)])?],
            Variant::Bgd,
        ),
        // Ω̃ = F_1(Ω̃) ∪ F_2(Ω̃) ∪ F_3F_3(CB ∖ {p3}); the cut through F_3 leaves
        // F_3(p1), F_3(p2) on the boundary although X never reaches them.
        "sg-tilde" => sg_system(
            name,
            vec![
                d(
                    "OmegaTilde",
                    "bbb",
                    vec![e(0), e(0), Letter::Edge { target: 1, symmetry: 0, extra_boundary: vec![0, 1] }],
                )?,
                d("X", "oob", vec![O, O, e(2)])?,
                d("Y", "bbb", vec![e(3), e(3), e(4)])?,
                d("CB", "bbi", vec![e(3), e(3), I])?,
                d("Z", "iib", vec![I, I, e(4)])?,
            ],
            Variant::Widetilde,
        ),
        "snowflake-koch" => snowflake_koch_with_r(snowflake_default_r()),
        _ => Err(Error::InvalidInput(format!("unknown BGD preset '{name}' (known: {})", BGD_PRESETS.join(", ")))),
    }
}

/// Complements of one, two and four Koch curves over consecutive hexagon
/// edges. Symmetry 1 rotates by 60°, symmetry 5 by −60°.
pub fn snowflake_koch_with_r(r: Rational) -> Result<BgdSystem> {
    let d = Domain::new;
    let rot = Letter::rotated;
    let domains = vec![
        d("Omega1", "bbiiii", vec![e(1), rot(1, 5), I, I, I, I, I])?,
        d("Omega2", "bbbiii", vec![e(1), rot(2, 5), e(1), I, I, I, I])?,
        d("Omega3", "bbbbbi", vec![e(1), rot(2, 5), e(2), rot(2, 1), rot(1, 2), I, I])?,
    ];
    BgdSystem::new(
        "snowflake-koch",
        lindstrom_snowflake(),
        snowflake_harmonic(r)?,
        SelfSimilarMeasure::uniform(7),
        domains,
        Variant::Bgd,
    )
}
