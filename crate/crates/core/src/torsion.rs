//! Exact arithmetic in the finite groups `K(Lᵐ)` and their isotropic halves.
//!
//! A torsion point is stored as rational coordinates `(a, b)` of `Ωa + b`,
//! reduced so that `a ∈ [0,1)^g` and `b_i ∈ [0, d_i)`. For the level-`m` bundle
//! `K(Lᵐ)_1 = {Ωa : a ∈ (mΔ)⁻¹Z^g}` and `K(Lᵐ)_2 = {b : b ∈ (1/m)Z^g}` modulo `Λ`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::abelian::{PolarizationType, PolarizedAbelianVariety};
use crate::error::{Error, Result};

pub const DEFAULT_GROUP_CAP: u64 = 1_000_000;

fn reduce_mod(x: Rational64, modulus: i64) -> Rational64 {
    let m = Rational64::from_integer(modulus);
    x - (x / m).floor() * m
}

/// All integer vectors `k` with `0 ≤ k_i < extents[i]`, lexicographic with the
/// first coordinate most significant.
pub fn lex_vectors(extents: &[u64]) -> Vec<Vec<u64>> {
    let total: u64 = extents.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    if extents.contains(&0) {
        return out;
    }
    let mut k = vec![0u64; extents.len()];
    loop {
        out.push(k.clone());
        let mut i = extents.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            k[i] += 1;
            if k[i] < extents[i] {
                break;
            }
            k[i] = 0;
        }
    }
}

/// Position of `k` in [`lex_vectors`] order.
pub fn lex_position(k: &[u64], extents: &[u64]) -> usize {
    k.iter().zip(extents).fold(0usize, |acc, (&ki, &e)| acc * e as usize + ki as usize)
}

/// A point `Ωa + b mod Λ` with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorsionPoint {
    a: Vec<Rational64>,
    b: Vec<Rational64>,
}

impl TorsionPoint {
    pub fn new(a: Vec<Rational64>, b: Vec<Rational64>, delta: &PolarizationType) -> Self {
        assert_eq!(a.len(), delta.dim(), "TorsionPoint: a has wrong length");
        assert_eq!(b.len(), delta.dim(), "TorsionPoint: b has wrong length");
        let a = a.into_iter().map(|x| reduce_mod(x, 1)).collect();
        let b = b
            .into_iter()
            .zip(delta.divisors())
            .map(|(x, &d)| reduce_mod(x, d as i64))
            .collect();
        TorsionPoint { a, b }
    }

    /// The point `Ωa`.
    pub fn from_a(a: Vec<Rational64>, delta: &PolarizationType) -> Self {
        let g = a.len();
        Self::new(a, vec![Rational64::zero(); g], delta)
    }

    /// The point `b`.
    pub fn from_b(b: Vec<Rational64>, delta: &PolarizationType) -> Self {
        let g = b.len();
        Self::new(vec![Rational64::zero(); g], b, delta)
    }

    pub fn zero(g: usize) -> Self {
        TorsionPoint { a: vec![Rational64::zero(); g], b: vec![Rational64::zero(); g] }
    }

    pub fn a(&self) -> &[Rational64] {
        &self.a
    }

    pub fn b(&self) -> &[Rational64] {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self, delta: &PolarizationType) -> Self {
        let a = self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect();
        let b = self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect();
        Self::new(a, b, delta)
    }

    pub fn neg(&self, delta: &PolarizationType) -> Self {
        self.scale(-1, delta)
    }

    pub fn sub(&self, other: &Self, delta: &PolarizationType) -> Self {
        self.add(&other.neg(delta), delta)
    }

    pub fn scale(&self, k: i64, delta: &PolarizationType) -> Self {
        let k = Rational64::from_integer(k);
        let a = self.a.iter().map(|x| x * k).collect();
        let b = self.b.iter().map(|x| x * k).collect();
        Self::new(a, b, delta)
    }

    pub fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// The representative `Ωa + b ∈ C^g`.
    pub fn to_complex(&self, pav: &PolarizedAbelianVariety) -> Vec<Complex64> {
        pav.point(&self.a_f64(), &self.b_f64())
    }

    /// `x ∈ K(Lᵐ)`: `m·d_i·a_i ∈ Z` and `m·b_i ∈ Z`.
    pub fn in_k(&self, m: u64, delta: &PolarizationType) -> bool {
        let m = m as i64;
        self.a.iter().zip(delta.divisors()).all(|(x, &d)| (x * (m * d as i64)).is_integer())
            && self.b.iter().all(|x| (x * m).is_integer())
    }

    pub fn in_k1(&self, m: u64, delta: &PolarizationType) -> bool {
        self.b.iter().all(Zero::is_zero) && self.in_k(m, delta)
    }

    pub fn in_k2(&self, m: u64, delta: &PolarizationType) -> bool {
        self.a.iter().all(Zero::is_zero) && self.in_k(m, delta)
    }

    /// Exact value of `E(self, other) = aᵗb′ − bᵗa′`.
    pub fn alternating_form(&self, other: &Self) -> Rational64 {
        self.a
            .iter()
            .zip(&other.b)
            .map(|(x, y)| x * y)
            .chain(self.b.iter().zip(&other.a).map(|(x, y)| -(x * y)))
            .fold(Rational64::zero(), |acc, v| acc + v)
    }
}

/// The decomposition `K(Lᵐ) = K(Lᵐ)_1 ⊕ K(Lᵐ)_2`, fully enumerated.
#[derive(Debug, Clone)]
pub struct TorsionSubgroup {
    pub level: u64,
    /// `m·d_i` for each coordinate: both halves are `⊕ Z/(m d_i)`.
    pub extents: Vec<u64>,
    pub k1_generators: Vec<TorsionPoint>,
    pub k2_generators: Vec<TorsionPoint>,
    pub k1: Vec<TorsionPoint>,
    pub k2: Vec<TorsionPoint>,
}

impl TorsionSubgroup {
    pub fn order(&self) -> usize {
        self.k1.len()
    }

    /// Position of `x` in the enumeration of `K(Lᵐ)_1`.
    pub fn k1_index(&self, x: &TorsionPoint) -> Option<usize> {
        if x.b.iter().any(|v| !v.is_zero()) {
            return None;
        }
        let k = integer_coords(&x.a, &self.extents)?;
        Some(lex_position(&k, &self.extents))
    }

    /// Position of `y` in the enumeration of `K(Lᵐ)_2`.
    pub fn k2_index(&self, y: &TorsionPoint) -> Option<usize> {
        if y.a.iter().any(|v| !v.is_zero()) {
            return None;
        }
        let m = self.level as i64;
        let scaled: Vec<Rational64> = y.b.iter().map(|v| v * m).collect();
        let k: Vec<u64> = scaled
            .iter()
            .map(|v| v.is_integer().then(|| v.to_integer() as u64))
            .collect::<Option<_>>()?;
        Some(lex_position(&k, &self.extents))
    }
}

/// `k_i = a_i · extents_i`, if integral.
fn integer_coords(a: &[Rational64], extents: &[u64]) -> Option<Vec<u64>> {
    a.iter()
        .zip(extents)
        .map(|(x, &e)| {
            let v = x * e as i64;
            v.is_integer().then(|| v.to_integer() as u64)
        })
        .collect()
}

pub(crate) fn check_size(level: u64, extents: &[u64], cap: u64) -> Result<u64> {
    let size = extents.iter().try_fold(1u128, |acc, &e| acc.checked_mul(e as u128));
    match size {
        Some(s) if s <= cap as u128 => Ok(s as u64),
        Some(s) => Err(Error::SizeLimit { level, size: s, cap }),
        None => Err(Error::SizeLimit { level, size: u128::MAX, cap }),
    }
}

pub fn k_group(pav: &PolarizedAbelianVariety, m: u64) -> Result<TorsionSubgroup> {
    k_group_with_cap(pav, m, DEFAULT_GROUP_CAP)
}

pub fn k_group_with_cap(pav: &PolarizedAbelianVariety, m: u64, cap: u64) -> Result<TorsionSubgroup> {
    if m == 0 {
        return Err(Error::InvalidArgument("level m must be positive".into()));
    }
    let delta = pav.delta();
    let g = pav.g();
    let extents: Vec<u64> = delta.divisors().iter().map(|&d| m * d).collect();
    check_size(m, &extents, cap)?;

    let k1_point = |k: &[u64]| {
        let a = k.iter().zip(&extents).map(|(&ki, &e)| Rational64::new(ki as i64, e as i64)).collect();
        TorsionPoint::from_a(a, delta)
    };
    let k2_point = |k: &[u64]| {
        let b = k.iter().map(|&ki| Rational64::new(ki as i64, m as i64)).collect();
        TorsionPoint::from_b(b, delta)
    };
    let unit = |i: usize| (0..g).map(|j| u64::from(i == j)).collect::<Vec<_>>();

    let all = lex_vectors(&extents);
    Ok(TorsionSubgroup {
        level: m,
        k1_generators: (0..g).map(|i| k1_point(&unit(i))).collect(),
        k2_generators: (0..g).map(|i| k2_point(&unit(i))).collect(),
        k1: all.iter().map(|k| k1_point(k)).collect(),
        k2: all.iter().map(|k| k2_point(k)).collect(),
        extents,
    })
}

/// `exp(2πi·m·E(x, y))`, with `m·E(x, y)` reduced mod 1 exactly.
pub fn weil_pairing(
    pav: &PolarizedAbelianVariety,
    m: u64,
    x: &TorsionPoint,
    y: &TorsionPoint,
) -> Result<Complex64> {
    for p in [x, y] {
        if !p.in_k(m, pav.delta()) {
            return Err(Error::NotTorsion { level: m });
        }
    }
    let e = x.alternating_form(y) * m as i64;
    let frac = reduce_mod(e, 1);
    Ok(unit_root(frac))
}

/// `exp(2πi·t)` for a rational `t ∈ [0, 1)`, exact at quarter turns.
fn unit_root(t: Rational64) -> Complex64 {
    let q = t * 4;
    if q.is_integer() {
        return match q.to_integer() {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let angle = 2.0 * PI * t.to_f64().unwrap_or(f64::NAN);
    Complex64::from_polar(1.0, angle)
}

/// Splits `β ∈ K(M^{n(n+1)})_1` as `γ + β′` with `nγ = 0` and `(n+1)β′ = 0`,
/// using `1 = (n+1) − n`: `γ = (n+1)β`, `β′ = −nβ`.
pub fn crt_split(
    pav: &PolarizedAbelianVariety,
    n: u64,
    beta: &TorsionPoint,
) -> Result<(TorsionPoint, TorsionPoint)> {
    pav.require_principal()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let delta = pav.delta();
    if !beta.in_k1(n * (n + 1), delta) {
        return Err(Error::NotInGroup(format!("beta is not in K(M^{})_1", n * (n + 1))));
    }
    let gamma = beta.scale(n as i64 + 1, delta);
    let beta_prime = beta.scale(-(n as i64), delta);
    Ok((gamma, beta_prime))
}

/// Characters of `K(Lᵐ)_1`, labelled by `K(Lᵐ)_2` through the Weil pairing.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub group: TorsionSubgroup,
    /// Row `j` is the character `χ_{y_j}`; column `i` is the element `x_i ∈ K(Lᵐ)_1`.
    pub values: DMatrix<Complex64>,
}

impl CharacterTable {
    pub fn value(&self, label: usize, element: usize) -> Complex64 {
        self.values[(label, element)]
    }

    pub fn label(&self, j: usize) -> &TorsionPoint {
        &self.group.k2[j]
    }
}

pub fn characters(pav: &PolarizedAbelianVariety, m: u64) -> Result<CharacterTable> {
    let group = k_group(pav, m)?;
    characters_of(pav, group)
}

pub(crate) fn characters_of(pav: &PolarizedAbelianVariety, group: TorsionSubgroup) -> Result<CharacterTable> {
    let n = group.order();
    let mut values = DMatrix::zeros(n, n);
    for (j, y) in group.k2.iter().enumerate() {
        for (i, x) in group.k1.iter().enumerate() {
            values[(j, i)] = weil_pairing(pav, group.level, x, y)?;
        }
    }
    Ok(CharacterTable { group, values })
}
