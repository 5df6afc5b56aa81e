//! Randomized algebra on `PadicApprox`, checked against exact rational
//! arithmetic: every approximate operation must stay consistent with the
//! rational it models, and valuations must obey the ultrametric rules.

use harmonic_padic::padic::{approx_from_rational, val_rational, PadicApprox, Rational, Valuation};
use num::{BigInt, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: u32 = 12;
const PAIRS: usize = 1000;
const PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = loop {
        let x = rng.gen_range(-1_000_000i64..=1_000_000);
        if x != 0 {
            break x;
        }
    };
    let den: i64 = rng.gen_range(1..=1_000_000);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn vfin(q: &Rational, p: u64) -> i64 {
    val_rational(q, p).unwrap().finite()
}

fn pow_rational(p: u64, e: i64) -> Rational {
    let pe = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(pe)
    } else {
        Rational::new(BigInt::one(), pe)
    }
}

#[test]
fn valuation_is_multiplicative_and_ultrametric() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
    for p in PRIMES {
        for _ in 0..PAIRS {
            let a = random_rational(&mut rng);
            let b = random_rational(&mut rng);
            let (va, vb) = (vfin(&a, p), vfin(&b, p));
            assert_eq!(vfin(&(&a * &b), p), va + vb);
            assert_eq!(vfin(&(&a / &b), p), va - vb);
            let s = &a + &b;
            let vs = val_rational(&s, p).unwrap();
            if va != vb {
                assert_eq!(vs, Valuation::Finite(va.min(vb)));
            } else if let Valuation::Finite(v) = vs {
                assert!(v >= va.min(vb));
            }
        }
    }
}

#[test]
fn approximate_ring_ops_track_exact_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xdeadbeefcafe);
    for p in PRIMES {
        for _ in 0..PAIRS {
            let a = random_rational(&mut rng);
            let b = random_rational(&mut rng);
            let xa = approx_from_rational(&a, p, K).unwrap();
            let xb = approx_from_rational(&b, p, K).unwrap();
            assert!(xa.agrees_with_rational(&a));
            assert_eq!(xa.exact_valuation(), Some(vfin(&a, p)));

            assert!(xa.padd(&xb).agrees_with_rational(&(&a + &b)));
            assert!(xa.psub(&xb).agrees_with_rational(&(&a - &b)));
            assert!(xa.pmul(&xb).agrees_with_rational(&(&a * &b)));
            assert!(xa.pdiv(&xb).unwrap().agrees_with_rational(&(&a / &b)));
            assert!(xa.pneg().agrees_with_rational(&(-&a)));

            // both ops are symmetric in their arguments
            assert!(xa.padd(&xb).agrees_with(&xb.padd(&xa)));
            assert!(xa.pmul(&xb).agrees_with(&xb.pmul(&xa)));

            let e = rng.gen_range(-3i64..=3);
            assert!(xa.shift(e).agrees_with_rational(&(&a * pow_rational(p, e))));
        }
    }
}

#[test]
fn zero_state_absorbs_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for p in PRIMES {
        for _ in 0..200 {
            let a = random_rational(&mut rng);
            let xa = approx_from_rational(&a, p, K).unwrap();
            let va = vfin(&a, p);
            let bound = rng.gen_range(-2i64..=6);
            let z = PadicApprox::zero_to_precision(p, bound);

            let sum = z.padd(&xa);
            assert!(sum.valuation_lower_bound() >= bound.min(va));
            if va < bound {
                // the perturbation cannot disturb the leading digits
                assert_eq!(sum.exact_valuation(), Some(va));
                assert!(sum.agrees_with_rational(&a));
            }

            let prod = z.pmul(&xa);
            assert!(prod.is_zero_to_precision);
            assert_eq!(prod.valuation_lower_bound(), bound + va);

            // division by something indistinguishable from zero must refuse
            assert!(xa.pdiv(&z).is_err());
        }
    }
}

#[test]
fn unit_projection_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in PRIMES {
        let pk = num::BigUint::from(p).pow(K);
        for _ in 0..200 {
            let mut u = num::BigUint::from(rng.gen_range(1u64..1 << 62)) % &pk;
            if (&u % p).is_zero() {
                u += 1u32;
            }
            let v = rng.gen_range(-5i64..=5);
            let x = PadicApprox::from_unit_parts(p, v, u.clone(), K);
            assert_eq!(x.exact_valuation(), Some(v));
            for d in 1..=K {
                assert_eq!(x.unit_mod(d), &u % num::BigUint::from(p).pow(d));
            }
        }
    }
}

#[test]
fn exact_cancellation_collapses_to_zero_state() {
    for p in PRIMES {
        let a = Rational::new(BigInt::from(22), BigInt::from(7));
        let xa = approx_from_rational(&a, p, K).unwrap();
        let s = xa.padd(&xa.pneg());
        assert!(s.is_zero_to_precision);
        assert!(s.agrees_with_rational(&Rational::zero()));
        // the certified bound is everything the two operands could promise
        assert_eq!(
            s.valuation_lower_bound(),
            xa.valuation_lower_bound() + K as i64
        );
        assert!(!xa.agrees_with_rational(&Rational::zero()));
        assert!(val_rational(&Rational::zero(), p).unwrap().is_infinite());
    }
}

#[test]
fn display_shapes_are_stable() {
    let x = PadicApprox::from_unit_parts(5, -2, 13u32.into(), 4);
    assert_eq!(x.to_string(), "5^-2·13 + O(5^2)");
    assert_eq!(PadicApprox::zero_to_precision(7, 9).to_string(), "O(7^9)");
    let neg = Rational::new(BigInt::from(-13), BigInt::one());
    assert!(neg.is_negative());
    let xn = approx_from_rational(&neg, 5, 2).unwrap();
    assert_eq!(xn.unit_mod(2), 12u32.into());
}
