//! Exact arithmetic in a real quadratic field Q(√s).
//!
//! Every point of SG and the snowflake has coordinates of the form a + b√3 with
//! a, b rational, and the maps only need field operations, so gluing is exact.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| crate::Error::InvalidInput(format!("bad rational '{s}'")))?;
    let d: BigInt = den.parse().map_err(|_| crate::Error::InvalidInput(format!("bad rational '{s}'")))?;
    if d.is_zero() {
        return invalid(format!("zero denominator in '{s}'"));
    }
    Ok(Rational::new(n, d))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            // Huge numerator/denominator: shift both down before converting.
            let bits = q.numer().bits().max(q.denom().bits()) as i64 - 60;
            let n = (q.numer() >> bits.max(0) as usize).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> bits.max(0) as usize).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// a + b·√s; the radicand lives in the owning [`QuadField`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Surd {
    pub a: Rational,
    pub b: Rational,
}

impl Surd {
    pub fn new(a: Rational, b: Rational) -> Self {
        Surd { a, b }
    }
    pub fn rational(a: Rational) -> Self {
        Surd { a, b: Rational::zero() }
    }
    pub fn zero() -> Self {
        Surd::rational(Rational::zero())
    }
    pub fn one() -> Self {
        Surd::rational(Rational::one())
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn scale(&self, q: &Rational) -> Surd {
        Surd { a: &self.a * q, b: &self.b * q }
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        Surd { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        Surd { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { a: -&self.a, b: -&self.b }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}r", self.b)
        } else {
            write!(f, "{}{}{}r", self.a, if self.b.is_negative() { "" } else { "+" }, self.b)
        }
    }
}

/// Q(√s) for a square-free-ish radicand s ≥ 2 that is not a perfect square.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadField {
    radicand: i64,
    root: f64,
}

impl QuadField {
    pub fn new(radicand: i64) -> Result<Self> {
        if radicand < 2 {
            return invalid("radicand must be at least 2");
        }
        let r = (radicand as f64).sqrt().round() as i64;
        if r * r == radicand {
            return invalid(format!("radicand {radicand} is a perfect square"));
        }
        Ok(QuadField { radicand, root: (radicand as f64).sqrt() })
    }

    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    pub fn mul(&self, x: &Surd, y: &Surd) -> Surd {
        let s = rat_int(self.radicand);
        Surd {
            a: &x.a * &y.a + &x.b * &y.b * s,
            b: &x.a * &y.b + &x.b * &y.a,
        }
    }

    pub fn inv(&self, x: &Surd) -> Result<Surd> {
        // (a − b√s)/(a² − s b²); the norm vanishes only at 0 since s is not a square.
        let norm = &x.a * &x.a - &x.b * &x.b * rat_int(self.radicand);
        if norm.is_zero() {
            return Err(crate::Error::Degenerate("division by zero in Q(√s)".into()));
        }
        Ok(Surd { a: &x.a / &norm, b: -(&x.b / &norm) })
    }

    pub fn to_f64(&self, x: &Surd) -> f64 {
        rational_to_f64(&x.a) + rational_to_f64(&x.b) * self.root
    }

    pub fn sign(&self, x: &Surd) -> std::cmp::Ordering {
        // sign(a + b√s) decided exactly by comparing a² with s b².
        use std::cmp::Ordering::*;
        let sa = x.a.signum();
        let sb = x.b.signum();
        if sb.is_zero() {
            return sa.cmp(&Rational::zero());
        }
        if sa.is_zero() || sa == sb {
            return sb.cmp(&Rational::zero());
        }
        let lhs = &x.a * &x.a;
        let rhs = &x.b * &x.b * rat_int(self.radicand);
        match lhs.cmp(&rhs) {
            Equal => Equal,
            Greater => sa.cmp(&Rational::zero()),
            Less => sb.cmp(&Rational::zero()),
        }
    }
}

pub type Point = [Surd; 2];

pub fn point_f64(field: &QuadField, p: &Point) -> [f64; 2] {
    [field.to_f64(&p[0]), field.to_f64(&p[1])]
}

/// x ↦ M x + t with entries in Q(√s).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub linear: [[Surd; 2]; 2],
    pub translation: [Surd; 2],
}

impl Affine {
    pub fn identity() -> Self {
        Affine {
            linear: [[Surd::one(), Surd::zero()], [Surd::zero(), Surd::one()]],
            translation: [Surd::zero(), Surd::zero()],
        }
    }

    /// x ↦ ratio·(x − fixed) + fixed.
    pub fn homothety(ratio: Rational, fixed: &Point) -> Self {
        let one_minus = Rational::one() - &ratio;
        Affine {
            linear: [[Surd::rational(ratio.clone()), Surd::zero()], [Surd::zero(), Surd::rational(ratio)]],
            translation: [fixed[0].scale(&one_minus), fixed[1].scale(&one_minus)],
        }
    }

    pub fn apply(&self, field: &QuadField, p: &Point) -> Point {
        let m = &self.linear;
        let row = |i: usize| {
            let u = field.mul(&m[i][0], &p[0]);
            let v = field.mul(&m[i][1], &p[1]);
            &(&u + &v) + &self.translation[i]
        };
        [row(0), row(1)]
    }

    /// self ∘ other.
    pub fn compose(&self, field: &QuadField, other: &Affine) -> Affine {
        let m = &self.linear;
        let n = &other.linear;
        let entry = |i: usize, j: usize| &field.mul(&m[i][0], &n[0][j]) + &field.mul(&m[i][1], &n[1][j]);
        let linear = [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]];
        let shifted = self.apply(field, &other.translation);
        Affine { linear, translation: shifted }
    }

    /// Largest singular value of the linear part.
    pub fn lipschitz(&self, field: &QuadField) -> f64 {
        let a = field.to_f64(&self.linear[0][0]);
        let b = field.to_f64(&self.linear[0][1]);
        let c = field.to_f64(&self.linear[1][0]);
        let d = field.to_f64(&self.linear[1][1]);
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }

    pub fn is_rational(&self) -> bool {
        self.linear.iter().flatten().chain(self.translation.iter()).all(|x| x.b.is_zero())
    }
}
