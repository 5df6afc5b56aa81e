//! The descent law for valuation towers: whenever nu_p(H(n)) = c <= 2, every
//! lift satisfies nu_p(H(p^m n)) = c - m. Checked through three routes that
//! share no code: reduced fractions, the exact lcm stream, and the modular
//! digit evaluator.

use harmonic_padic::padic::{val_rational, Valuation};
use harmonic_padic::{harmonic_exact, nu_p_harmonic, valuation_stream};
use num::BigUint;

const PRIMES: [u64; 4] = [5, 7, 11, 13];
const BASE_MAX: u64 = 500;
const M_MAX: u32 = 4;
const STREAM_WINDOW: u64 = 20_000;

#[test]
fn descent_law_to_level_four() {
    for p in PRIMES {
        let window: Vec<Valuation> = std::iter::once(Valuation::Infinite)
            .chain(valuation_stream(p, STREAM_WINDOW).unwrap().map(|(_, v)| v))
            .collect();
        for n in 1..=BASE_MAX {
            let c = window[n as usize].finite();
            assert!(c <= 2, "no deep member below {BASE_MAX} for p={p}");
            for m in 1..=M_MAX {
                let arg = BigUint::from(n) * BigUint::from(p).pow(m);
                let expect = Valuation::Finite(c - m as i64);
                let got = nu_p_harmonic(&arg, p).unwrap();
                assert_eq!(got, expect, "nu_{p}(H({p}^{m}*{n}))");
                // exact route wherever the window reaches
                if let Ok(idx) = u64::try_from(&arg) {
                    if idx <= STREAM_WINDOW {
                        assert_eq!(window[idx as usize], expect, "stream at {idx}, p={p}");
                    }
                }
            }
        }
    }
}

#[test]
fn descent_law_on_reduced_fractions() {
    // fully independent third route: reduce H exactly and read the valuation
    for p in [5u64, 7] {
        for t in 1..=60u64 {
            let c = val_rational(&harmonic_exact(t).unwrap(), p)
                .unwrap()
                .finite();
            if c > 2 {
                continue;
            }
            for m in 1..=3u32 {
                let lifted = t * p.pow(m);
                let v = val_rational(&harmonic_exact(lifted).unwrap(), p).unwrap();
                assert_eq!(v, Valuation::Finite(c - m as i64), "H({lifted}) at p={p}");
            }
        }
    }
}

#[test]
fn strip_floor_below_every_nonmember() {
    // once the valuation goes negative it must keep falling by exactly one
    // per factor of p; spot the first three strips above each small n
    for p in PRIMES {
        for n in 1..=40u64 {
            let base = nu_p_harmonic(&n.into(), p).unwrap().finite();
            if base >= 0 {
                continue;
            }
            for m in 1..=3u32 {
                let v = nu_p_harmonic(&(BigUint::from(n) * BigUint::from(p).pow(m)), p)
                    .unwrap()
                    .finite();
                assert_eq!(v, base - m as i64);
            }
        }
    }
}
