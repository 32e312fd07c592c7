//! Exact unit-circle values `exp(2πi·q)` stored by their rational exponent `q mod 1`.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

/// A point of the unit circle `exp(2πi·q)` with `q ∈ [0, 1)` rational.
///
/// Multiplication of circle values is addition of phases, so the group
/// operation is written additively.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(Rational64);

impl Phase {
    pub const ZERO: Phase = Phase(Rational64::new_raw(0, 1));

    pub fn new(numer: i64, denom: i64) -> Phase {
        assert!(denom != 0, "phase with zero denominator");
        Phase::from_rational(Rational64::new(numer, denom))
    }

    pub fn from_rational(q: Rational64) -> Phase {
        let frac = q - q.floor();
        Phase(frac)
    }

    pub fn rational(&self) -> Rational64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Order of the phase in the circle group (the reduced denominator).
    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn times(&self, k: i64) -> Phase {
        // reduce k modulo the denominator first to avoid overflow
        let d = *self.0.denom();
        let k = k.mod_floor(&d);
        Phase::from_rational(self.0 * Rational64::from_integer(k))
    }

    pub fn to_complex(&self) -> Complex64 {
        let angle = 2.0 * std::f64::consts::PI * (*self.0.numer() as f64) / (*self.0.denom() as f64);
        Complex64::new(angle.cos(), angle.sin())
    }

    /// The phase of the complex conjugate.
    pub fn conj(&self) -> Phase {
        -*self
    }

    /// Parses `"p/q"` or an integer string.
    pub fn parse(s: &str) -> Option<Phase> {
        parse_rational(s).map(Phase::from_rational)
    }
}

pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Rational64::new(p, q))
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        let mut s = self.0 + rhs.0;
        if s >= Rational64::one() {
            s -= Rational64::one();
        }
        Phase(s)
    }
}

impl AddAssign for Phase {
    fn add_assign(&mut self, rhs: Phase) {
        *self = *self + rhs;
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        if self.0.is_zero() {
            self
        } else {
            Phase(Rational64::one() - self.0)
        }
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        self + (-rhs)
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ZERO
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e(2πi·{})", self.0)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
