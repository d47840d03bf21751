use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::{h0, PolarizedAbelianVariety};

/// The sufficient section count `((n+1)/n)^g · g!` for surjectivity of `μ_n`
/// on a simple abelian variety, kept exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub g: u32,
    pub n: u32,
    pub value: BigRational,
    /// Least integer strictly greater than `value`.
    pub least_sufficient: BigInt,
}

impl Bound {
    /// `"81/4"`, or `"8"` for an integral value.
    pub fn exact(&self) -> String {
        if self.value.is_integer() {
            self.value.numer().to_string()
        } else {
            format!("{}/{}", self.value.numer(), self.value.denom())
        }
    }

    pub fn decimal(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }

    /// True iff `h0 > value`.
    pub fn is_exceeded_by(&self, h0: u64) -> bool {
        BigRational::from_integer(BigInt::from(h0)) > self.value
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.exact())
    }
}

fn factorial(g: u32) -> BigInt {
    (1..=g).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn torelli_bound(g: u32, n: u32) -> Bound {
    assert!(g >= 1 && n >= 1, "torelli_bound: g and n must be positive");
    let ratio = BigRational::new(BigInt::from(n + 1), BigInt::from(n));
    let mut value = BigRational::from_integer(factorial(g));
    for _ in 0..g {
        value *= &ratio;
    }
    let least_sufficient = value.floor().to_integer() + 1;
    Bound { g, n, value, least_sufficient }
}

/// `(g/(g−1))^g · g!`, the section count above which smooth hypersurfaces of a
/// simple `g`-dimensional abelian variety satisfy infinitesimal Torelli.
/// Undefined for `g = 1`.
pub fn itt_bound(g: u32) -> Option<BigRational> {
    if g < 2 {
        return None;
    }
    let num = BigInt::from(g).pow(g) * factorial(g);
    let den = BigInt::from(g - 1).pow(g);
    Some(BigRational::new(num, den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPrediction {
    TheoremPredictsSurjective,
    NoPrediction,
}

pub fn bound_prediction(pav: &PolarizedAbelianVariety, n: u32) -> BoundPrediction {
    let bound = torelli_bound(pav.g() as u32, n);
    if pav.simple_asserted() && bound.is_exceeded_by(h0(pav, 1)) {
        BoundPrediction::TheoremPredictsSurjective
    } else {
        BoundPrediction::NoPrediction
    }
}

/// `h⁰(A, O_A(S)) = p_g + 1 − 3` for a surface `S` embedded as a hypersurface
/// in its three-dimensional Albanese variety.
pub fn surface_h0_from_geometric_genus(p_g: u64) -> i64 {
    p_g as i64 + 1 - 3
}

/// Whether the threefold bound applies to such a surface.
pub fn surface_corollary_applies(p_g: u64) -> bool {
    let h = surface_h0_from_geometric_genus(p_g);
    h > 0 && torelli_bound(3, 2).is_exceeded_by(h as u64)
}
