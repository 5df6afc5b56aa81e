//! Exact rationals, p-adic valuations, and fixed-precision p-adic numbers
//! with explicit precision-loss accounting.
//!
//! A [`PadicApprox`] represents `p^valuation * unit` where the unit is known
//! modulo `p^precision`. Additive cancellation burns digits; when every known
//! digit cancels the result degrades to a certified lower bound on the
//! valuation (`is_zero_to_precision`) rather than a wrong number.

use crate::error::{Error, Result};
use crate::modular::{inv_mod, split_valuation};
use crate::primes::is_prime_u64;
use num::{BigUint, Signed, Zero};
use std::fmt;

/// Arbitrary-precision rational, always reduced, denominator positive.
pub type Rational = num::BigRational;

/// Convenience constructor for small rationals.
pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// A p-adic valuation: an integer, or +infinity exactly for the value zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// The finite value, panicking on +infinity.
    pub fn finite(self) -> i64 {
        match self {
            Valuation::Finite(v) => v,
            Valuation::Infinite => panic!("valuation is +infinity"),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Valuation::*;
        match (self, other) {
            (Infinite, Infinite) => std::cmp::Ordering::Equal,
            (Infinite, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Infinite) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        use Valuation::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => Infinite,
        }
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::Finite(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Valuation;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or the string \"inf\"")
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Valuation, E> {
                Ok(Valuation::Finite(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Valuation, E> {
                Ok(Valuation::Finite(v as i64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Valuation, E> {
                if v == "inf" {
                    Ok(Valuation::Infinite)
                } else {
                    v.parse().map(Valuation::Finite).map_err(E::custom)
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// ν_p of an exact rational; +infinity exactly for zero.
pub fn val_rational(q: &Rational, p: u64) -> Result<Valuation> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if q.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let (vn, _) = split_valuation(q.numer().magnitude(), p);
    let (vd, _) = split_valuation(q.denom().magnitude(), p);
    Ok(Valuation::Finite(vn as i64 - vd as i64))
}

/// A p-adic number known to finite precision: `p^valuation * unit` with the
/// unit certified modulo `p^precision`.
///
/// When `is_zero_to_precision` is set, every computed digit cancelled and the
/// only retained fact is `ν_p(value) >= valuation`; `unit` is 0 and
/// `precision` is 0 in that state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicApprox {
    pub prime: u64,
    pub valuation: i64,
    pub unit: BigUint,
    pub precision: u32,
    pub is_zero_to_precision: bool,
}

impl PadicApprox {
    fn p_pow(&self, k: u32) -> BigUint {
        BigUint::from(self.prime).pow(k)
    }

    /// The degenerate state "valuation >= bound, nothing else known".
    pub fn zero_to_precision(p: u64, bound: i64) -> Self {
        PadicApprox {
            prime: p,
            valuation: bound,
            unit: BigUint::zero(),
            precision: 0,
            is_zero_to_precision: true,
        }
    }

    /// Assemble from parts, reducing the unit and checking the invariants.
    pub fn from_unit_parts(p: u64, valuation: i64, unit: BigUint, precision: u32) -> Self {
        assert!(precision >= 1, "a normal approximation needs K >= 1");
        let unit = unit % BigUint::from(p).pow(precision);
        assert!(
            !(&unit % p).is_zero(),
            "unit must be coprime to the prime; got unit ≡ 0 mod {p}"
        );
        PadicApprox {
            prime: p,
            valuation,
            unit,
            precision,
            is_zero_to_precision: false,
        }
    }

    /// Exact valuation when known; `None` in the zero-to-precision state.
    pub fn exact_valuation(&self) -> Option<i64> {
        (!self.is_zero_to_precision).then_some(self.valuation)
    }

    /// Certified lower bound on the valuation, valid in every state.
    pub fn valuation_lower_bound(&self) -> i64 {
        self.valuation
    }

    /// The unit truncated to `digits` base-p digits (`digits <= precision`).
    pub fn unit_mod(&self, digits: u32) -> BigUint {
        assert!(!self.is_zero_to_precision, "no unit digits are known");
        assert!(digits >= 1 && digits <= self.precision, "requested digits exceed precision");
        &self.unit % self.p_pow(digits)
    }

    /// Multiply by p^e: shifts the valuation, digits unchanged.
    pub fn shift(&self, e: i64) -> Self {
        let mut out = self.clone();
        out.valuation += e;
        out
    }

    /// Additive inverse: same valuation and precision, negated unit.
    pub fn pneg(&self) -> Self {
        if self.is_zero_to_precision {
            return self.clone();
        }
        let m = self.p_pow(self.precision);
        PadicApprox {
            unit: (&m - &self.unit) % m,
            ..self.clone()
        }
    }

    fn add_bounded(x: &PadicApprox, bound: i64) -> PadicApprox {
        // x plus an unknown perturbation of valuation >= bound
        if bound > x.valuation {
            let kp = (x.precision as i64).min(bound - x.valuation) as u32;
            PadicApprox {
                prime: x.prime,
                valuation: x.valuation,
                unit: &x.unit % x.p_pow(kp),
                precision: kp,
                is_zero_to_precision: false,
            }
        } else {
            PadicApprox::zero_to_precision(x.prime, bound)
        }
    }

    /// Sum, with exact bookkeeping of how many certified digits survive.
    pub fn padd(&self, other: &PadicApprox) -> PadicApprox {
        assert_eq!(self.prime, other.prime, "padd requires a common prime");
        let p = self.prime;
        match (self.is_zero_to_precision, other.is_zero_to_precision) {
            (true, true) => Self::zero_to_precision(p, self.valuation.min(other.valuation)),
            (true, false) => Self::add_bounded(other, self.valuation),
            (false, true) => Self::add_bounded(self, other.valuation),
            (false, false) if self.valuation == other.valuation => {
                let kmin = self.precision.min(other.precision);
                let s = (&self.unit + &other.unit) % self.p_pow(kmin);
                if s.is_zero() {
                    // full cancellation: only the bound valuation + kmin survives
                    Self::zero_to_precision(p, self.valuation + kmin as i64)
                } else {
                    let (c, su) = split_valuation(&s, p);
                    PadicApprox {
                        prime: p,
                        valuation: self.valuation + c as i64,
                        unit: su,
                        precision: kmin - c as u32,
                        is_zero_to_precision: false,
                    }
                }
            }
            (false, false) => {
                let (lo, hi) = if self.valuation < other.valuation {
                    (self, other)
                } else {
                    (other, self)
                };
                let gap = hi.valuation - lo.valuation;
                let kp = (lo.precision as i64).min(gap + hi.precision as i64) as u32;
                let modulus = self.p_pow(kp);
                let mut unit = &lo.unit % &modulus;
                if gap < kp as i64 {
                    unit = (unit + self.p_pow(gap as u32) * &hi.unit) % &modulus;
                }
                PadicApprox {
                    prime: p,
                    valuation: lo.valuation,
                    unit,
                    precision: kp,
                    is_zero_to_precision: false,
                }
            }
        }
    }

    pub fn psub(&self, other: &PadicApprox) -> PadicApprox {
        self.padd(&other.pneg())
    }

    /// Product: valuations add, units multiply at the coarser precision.
    pub fn pmul(&self, other: &PadicApprox) -> PadicApprox {
        assert_eq!(self.prime, other.prime, "pmul requires a common prime");
        if self.is_zero_to_precision || other.is_zero_to_precision {
            // bound + (bound or exact valuation) is still a certified bound
            return Self::zero_to_precision(self.prime, self.valuation + other.valuation);
        }
        let kmin = self.precision.min(other.precision);
        let m = self.p_pow(kmin);
        PadicApprox {
            prime: self.prime,
            valuation: self.valuation + other.valuation,
            unit: &self.unit * &other.unit % m,
            precision: kmin,
            is_zero_to_precision: false,
        }
    }

    /// Quotient; dividing by a value only known to be ≈ 0 is an error.
    pub fn pdiv(&self, other: &PadicApprox) -> Result<PadicApprox> {
        assert_eq!(self.prime, other.prime, "pdiv requires a common prime");
        if other.is_zero_to_precision {
            return Err(Error::PrecisionExhausted {
                bound: other.valuation,
            });
        }
        if self.is_zero_to_precision {
            return Ok(Self::zero_to_precision(
                self.prime,
                self.valuation - other.valuation,
            ));
        }
        let kmin = self.precision.min(other.precision);
        let m = self.p_pow(kmin);
        let inv = inv_mod(&(&other.unit % &m), &m).expect("unit is coprime to p");
        Ok(PadicApprox {
            prime: self.prime,
            valuation: self.valuation - other.valuation,
            unit: &self.unit % &m * inv % m,
            precision: kmin,
            is_zero_to_precision: false,
        })
    }

    /// Whether two approximations can describe the same value, compared at
    /// their overlapping precision.
    pub fn agrees_with(&self, other: &PadicApprox) -> bool {
        if self.prime != other.prime {
            return false;
        }
        match (self.is_zero_to_precision, other.is_zero_to_precision) {
            (true, true) => true,
            (true, false) => other.valuation >= self.valuation,
            (false, true) => self.valuation >= other.valuation,
            (false, false) => {
                self.valuation == other.valuation && {
                    let kmin = self.precision.min(other.precision);
                    self.unit_mod(kmin) == other.unit_mod(kmin)
                }
            }
        }
    }

    /// Whether this approximation is consistent with an exact rational.
    pub fn agrees_with_rational(&self, q: &Rational) -> bool {
        let v = val_rational(q, self.prime).expect("prime was validated at construction");
        if self.is_zero_to_precision {
            return v >= Valuation::Finite(self.valuation);
        }
        match v {
            Valuation::Infinite => false,
            Valuation::Finite(_) => {
                let exact = approx_from_rational(q, self.prime, self.precision)
                    .expect("prime and precision already validated");
                self.agrees_with(&exact)
            }
        }
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero_to_precision {
            write!(f, "O({}^{})", self.prime, self.valuation)
        } else {
            write!(
                f,
                "{}^{}·{} + O({}^{})",
                self.prime,
                self.valuation,
                self.unit,
                self.prime,
                self.valuation + self.precision as i64
            )
        }
    }
}

/// Truncate an exact rational to `k` certified base-p digits of its unit.
pub fn approx_from_rational(q: &Rational, p: u64, k: u32) -> Result<PadicApprox> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::Domain("precision K must be at least 1".into()));
    }
    if q.is_zero() {
        // exact zero: certify the requested number of digits as a bound
        return Ok(PadicApprox::zero_to_precision(p, k as i64));
    }
    let (vn, un) = split_valuation(q.numer().magnitude(), p);
    let (vd, ud) = split_valuation(q.denom().magnitude(), p);
    let modulus = BigUint::from(p).pow(k);
    let inv = inv_mod(&(ud % &modulus), &modulus).expect("denominator cofactor is coprime to p");
    let mut unit = un % &modulus * inv % &modulus;
    if q.is_negative() {
        unit = (&modulus - unit) % &modulus;
    }
    Ok(PadicApprox {
        prime: p,
        valuation: vn as i64 - vd as i64,
        unit,
        precision: k,
        is_zero_to_precision: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn val_rational_examples() {
        assert_eq!(val_rational(&rational(25, 12), 5).unwrap(), Valuation::Finite(2));
        assert_eq!(val_rational(&rational(0, 1), 7).unwrap(), Valuation::Infinite);
        assert_eq!(val_rational(&rational(3, 2), 3).unwrap(), Valuation::Finite(1));
        assert!(matches!(val_rational(&rational(1, 2), 6), Err(Error::NotPrime(6))));
    }

    #[test]
    fn approx_examples() {
        let a = approx_from_rational(&rational(1, 5), 5, 3).unwrap();
        assert_eq!((a.valuation, a.unit.clone()), (-1, BigUint::from(1u32)));

        let b = approx_from_rational(&rational(25, 12), 5, 2).unwrap();
        assert_eq!((b.valuation, b.unit.clone()), (2, BigUint::from(23u32)));

        let c = approx_from_rational(&rational(3, 2), 3, 1).unwrap();
        assert_eq!((c.valuation, c.unit.clone()), (1, BigUint::from(2u32)));
    }

    #[test]
    fn padd_min_rule_and_cancellation() {
        let x = approx_from_rational(&rational(1, 5), 5, 3).unwrap();
        let y = approx_from_rational(&rational(25, 12), 5, 2).unwrap();
        let s = x.padd(&y);
        assert_eq!(s.exact_valuation(), Some(-1));
        assert!(s.agrees_with_rational(&(rational(1, 5) + rational(25, 12))));

        let z = x.padd(&x.pneg());
        assert!(z.is_zero_to_precision);
        assert_eq!(z.valuation, -1 + 3);
    }

    #[test]
    fn pdiv_by_p_shifts() {
        let x = approx_from_rational(&rational(7, 3), 5, 4).unwrap();
        let p = approx_from_rational(&rational(5, 1), 5, 4).unwrap();
        let q = x.pdiv(&p).unwrap();
        assert_eq!(q.valuation, x.valuation - 1);
        assert_eq!(q.unit, x.unit);
        assert!(q.agrees_with(&x.shift(-1)));
    }

    #[test]
    fn inverse_pair_is_one() {
        for k in 1..=6u32 {
            let a = approx_from_rational(&rational(1, 12), 7, k).unwrap();
            let b = approx_from_rational(&rational(12, 1), 7, k).unwrap();
            let prod = a.pmul(&b);
            assert_eq!(prod.exact_valuation(), Some(0));
            assert_eq!(prod.unit, BigUint::from(1u32));
        }
    }

    #[test]
    fn pdiv_by_zero_state_rejected() {
        let x = approx_from_rational(&rational(3, 4), 5, 3).unwrap();
        let z = PadicApprox::zero_to_precision(5, 7);
        assert!(matches!(
            x.pdiv(&z),
            Err(Error::PrecisionExhausted { bound: 7 })
        ));
    }

    #[test]
    fn zero_state_plus_normal() {
        let x = approx_from_rational(&rational(3, 4), 5, 6).unwrap(); // val 0
        let tight = PadicApprox::zero_to_precision(5, 2);
        let s = x.padd(&tight);
        assert_eq!(s.exact_valuation(), Some(0));
        assert_eq!(s.precision, 2);

        let loose = PadicApprox::zero_to_precision(5, 0);
        let t = x.padd(&loose);
        assert!(t.is_zero_to_precision);
        assert_eq!(t.valuation, 0);
    }

    #[test]
    fn negative_rational_round_trip() {
        let q = rational(-7, 10);
        let a = approx_from_rational(&q, 5, 5).unwrap();
        assert_eq!(a.valuation, -1);
        assert!(a.agrees_with_rational(&q));
    }
}
