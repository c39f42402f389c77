//! Exact scalars of the form `Σ qₖ πᵏ` with rational `qₖ` and integer `k`.
//!
//! Generator coefficients of the modular observables mix plain rationals
//! (multiples of `p₀`) with rational multiples of `πħ/p₀`, and the appendix
//! forms add `1/π` terms. Since π is transcendental the Laurent-polynomial
//! representation is faithful: two scalars are equal iff their term maps are.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

/// Exact element of `ℚ[π, π⁻¹]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PiPoly {
    terms: BTreeMap<i32, Rational64>,
}

impl PiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(Rational64::one())
    }

    pub fn rational(q: Rational64) -> Self {
        Self::monomial(q, 0)
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(Rational64::from_integer(n))
    }

    /// `q·π`
    pub fn pi(q: Rational64) -> Self {
        Self::monomial(q, 1)
    }

    /// `q·πᵏ`
    pub fn monomial(q: Rational64, power: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(power, q);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, power: i32) -> Rational64 {
        self.terms.get(&power).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Rational64)> + '_ {
        self.terms.iter().map(|(&k, &q)| (k, q))
    }

    /// The rational `q` with `self = q·π`, if the scalar has that shape.
    pub fn as_pi_multiple(&self) -> Option<Rational64> {
        match self.terms.len() {
            0 => Some(Rational64::zero()),
            1 => self.terms.get(&1).copied(),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rational64> {
        match self.terms.len() {
            0 => Some(Rational64::zero()),
            1 => self.terms.get(&0).copied(),
            _ => None,
        }
    }

    pub fn scale(&self, q: Rational64) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&k, &c)| (k, c * q)).collect(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&k, q)| rational_to_f64(*q) * std::f64::consts::PI.powi(k))
            .sum()
    }

    fn add_term(&mut self, power: i32, q: Rational64) {
        let entry = self.terms.entry(power).or_insert_with(Rational64::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&power);
        }
    }
}

pub(crate) fn rational_to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl From<Rational64> for PiPoly {
    fn from(q: Rational64) -> Self {
        Self::rational(q)
    }
}

impl AddAssign<&PiPoly> for PiPoly {
    fn add_assign(&mut self, rhs: &PiPoly) {
        for (&k, &q) in &rhs.terms {
            self.add_term(k, q);
        }
    }
}

impl Add<&PiPoly> for &PiPoly {
    type Output = PiPoly;
    fn add(self, rhs: &PiPoly) -> PiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for PiPoly {
    type Output = PiPoly;
    fn add(mut self, rhs: PiPoly) -> PiPoly {
        self += &rhs;
        self
    }
}

impl Neg for &PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        self.scale(-Rational64::one())
    }
}

impl Neg for PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        -&self
    }
}

impl Sub<&PiPoly> for &PiPoly {
    type Output = PiPoly;
    fn sub(self, rhs: &PiPoly) -> PiPoly {
        self + &(-rhs)
    }
}

impl Sub for PiPoly {
    type Output = PiPoly;
    fn sub(self, rhs: PiPoly) -> PiPoly {
        &self - &rhs
    }
}

impl Mul<&PiPoly> for &PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: &PiPoly) -> PiPoly {
        let mut out = PiPoly::zero();
        for (&i, &a) in &self.terms {
            for (&j, &b) in &rhs.terms {
                out.add_term(i + j, a * b);
            }
        }
        out
    }
}

impl Mul for PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: PiPoly) -> PiPoly {
        &self * &rhs
    }
}

impl Mul<Rational64> for &PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: Rational64) -> PiPoly {
        self.scale(rhs)
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (&k, q)) in self.terms.iter().rev().enumerate() {
            let mag = q.abs();
            if idx == 0 {
                if q.is_negative() {
                    write!(f, "-")?;
                }
            } else if q.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{mag}")?,
                1 if mag.is_one() => write!(f, "pi")?,
                1 => write!(f, "{mag}*pi")?,
                _ if mag.is_one() => write!(f, "pi^{k}")?,
                _ => write!(f, "{mag}*pi^{k}")?,
            }
        }
        Ok(())
    }
}

/// An exact phase angle, canonically reduced so that the `π¹` coefficient
/// lies in `[0, 2)`. Other powers of π cannot be reduced and are kept as is.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(PiPoly);

impl Phase {
    pub fn zero() -> Self {
        Self(PiPoly::zero())
    }

    /// `π` itself, i.e. the phase of `-1`.
    pub fn half_turn() -> Self {
        Self::from_pi_multiple(Rational64::one())
    }

    pub fn from_pi_multiple(q: Rational64) -> Self {
        Self::new(PiPoly::pi(q))
    }

    pub fn new(angle: PiPoly) -> Self {
        let mut angle = angle;
        let q = angle.coeff(1);
        let two = Rational64::from_integer(2);
        let reduced = q - two * (q / two).floor();
        angle.add_term(1, reduced - q);
        Self(angle)
    }

    pub fn angle(&self) -> &PiPoly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `φ/π` when the phase is a rational multiple of π.
    pub fn over_pi(&self) -> Option<Rational64> {
        self.0.as_pi_multiple()
    }

    pub fn radians(&self) -> f64 {
        self.0.to_f64()
    }
}

impl Add<&Phase> for &Phase {
    type Output = Phase;
    fn add(self, rhs: &Phase) -> Phase {
        Phase::new(&self.0 + &rhs.0)
    }
}

impl Neg for &Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase::new(-&self.0)
    }
}

impl fmt::Display for Phase {
    /// Prints `φ/π`, e.g. `0`, `1`, `1/2`; non-π terms fall back to the
    /// full scalar divided by π.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.over_pi() {
            Some(q) => write!(f, "{q}"),
            None => {
                let shifted: BTreeMap<i32, Rational64> =
                    self.0.terms().map(|(k, q)| (k - 1, q)).collect();
                write!(f, "{}", PiPoly { terms: shifted })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn zero_terms_are_dropped() {
        let a = PiPoly::pi(r(1, 2));
        let b = PiPoly::pi(r(-1, 2));
        assert!((&a + &b).is_zero());
        assert_eq!(&a + &b, PiPoly::zero());
    }

    #[test]
    fn laurent_product() {
        // (π + 1/π)(π - 1/π) = π² - π⁻²
        let a = PiPoly::pi(r(1, 1)) + PiPoly::monomial(r(1, 1), -1);
        let b = PiPoly::pi(r(1, 1)) - PiPoly::monomial(r(1, 1), -1);
        let p = &a * &b;
        assert_eq!(p.coeff(2), r(1, 1));
        assert_eq!(p.coeff(0), r(0, 1));
        assert_eq!(p.coeff(-2), r(-1, 1));
    }

    #[test]
    fn phase_reduction_into_unit_range() {
        assert_eq!(Phase::from_pi_multiple(r(-1, 1)), Phase::half_turn());
        assert_eq!(Phase::from_pi_multiple(r(5, 2)).over_pi(), Some(r(1, 2)));
        assert_eq!(Phase::from_pi_multiple(r(-1, 3)).over_pi(), Some(r(5, 3)));
        assert!(Phase::from_pi_multiple(r(4, 1)).is_zero());
    }

    #[test]
    fn phase_display_is_fraction_over_pi() {
        assert_eq!(Phase::from_pi_multiple(r(3, 2)).to_string(), "3/2");
        assert_eq!(Phase::zero().to_string(), "0");
        assert_eq!(Phase::half_turn().to_string(), "1");
    }

    #[test]
    fn to_f64_matches_terms() {
        let a = PiPoly::pi(r(1, 2)) + PiPoly::rational(r(3, 1));
        assert!((a.to_f64() - (std::f64::consts::FRAC_PI_2 + 3.0)).abs() < 1e-15);
    }
}
