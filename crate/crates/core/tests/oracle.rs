//! The modular harmonic evaluator against independently derived ground truth:
//! exact reduced fractions, an exact lcm stream, and a frozen corpus of deep
//! valuations, units, and partial-sum residues.

use harmonic_padic::harmonic::HarmonicStream;
use harmonic_padic::padic::{val_rational, PadicApprox, Valuation};
use harmonic_padic::{harmonic_exact, harmonic_mod_pk, nu_p_harmonic, DigitsBaseP};
use num::BigUint;

fn approx(p: u64, n: u64, k: u32) -> PadicApprox {
    harmonic_mod_pk(&DigitsBaseP::from_u64(p, n), k).unwrap()
}

#[test]
fn evaluator_matches_exact_fractions() {
    for p in [3u64, 5, 7] {
        for n in 1..=600u64 {
            let h = harmonic_exact(n).unwrap();
            let a = approx(p, n, 6);
            assert_eq!(
                Valuation::Finite(a.exact_valuation().unwrap()),
                val_rational(&h, p).unwrap(),
                "nu_{p}(H({n}))"
            );
            assert!(a.agrees_with_rational(&h), "H({n}) mod {p}-powers");
        }
    }
}

#[test]
fn evaluator_matches_exact_stream() {
    for p in [3u64, 5, 7, 11, 13] {
        for s in HarmonicStream::new(p, 2000, 6).unwrap() {
            let expected =
                PadicApprox::from_unit_parts(p, s.valuation.finite(), s.unit.unwrap(), 6);
            let got = approx(p, s.n, 6);
            assert!(got.agrees_with(&expected), "H({}) at p={p}", s.n);
            assert_eq!(got.exact_valuation(), Some(s.valuation.finite()));
        }
    }
}

#[test]
fn frozen_spot_valuations_p5() {
    const SPOT: [(u64, i64); 22] = [
        (1, 0),
        (2, 0),
        (3, 0),
        (4, 2),
        (5, -1),
        (20, 1),
        (24, 1),
        (25, -2),
        (100, 0),
        (101, 0),
        (102, 0),
        (103, 0),
        (104, 0),
        (120, 0),
        (124, 0),
        (125, -3),
        (126, -3),
        (624, -1),
        (625, -4),
        (626, -4),
        (3124, -2),
        (3125, -5),
    ];
    for (n, v) in SPOT {
        assert_eq!(
            nu_p_harmonic(&n.into(), 5).unwrap(),
            Valuation::Finite(v),
            "nu_5(H({n}))"
        );
    }
}

#[test]
fn frozen_deep_units() {
    // the three deepest members of J_11 below 12000 and the Wolstenholme
    // companion pair, with their units to three and four base-p digits
    const DEEP: [(u64, u64, i64, u64, u64); 4] = [
        (11, 848, 3, 1186, 13165),
        (11, 9338, 3, 1113, 5106),
        (11, 10583, 3, 243, 9560),
        (16843, 16842, 3, 4_373_155_723_744, 4_629_607_089_499_320),
    ];
    for (p, n, v, unit3, unit4) in DEEP {
        let a = approx(p, n, 6);
        assert_eq!(a.exact_valuation(), Some(v), "nu_{p}(H({n}))");
        assert_eq!(a.unit_mod(3), unit3.into(), "unit of H({n}) mod {p}^3");
        assert_eq!(a.unit_mod(4), unit4.into(), "unit of H({n}) mod {p}^4");
    }
}

#[test]
fn frozen_prefix_sum_residues() {
    // residue of H(p-1) = sum of inverses of 1..p-1 modulo p^4; always
    // valuation exactly 2 here, so residue = p^2 * unit mod p^4
    const RES: [(u64, u64); 5] = [
        (5, 575),
        (7, 1323),
        (11, 8712),
        (13, 14365),
        (547, 68_359_083_394),
    ];
    for (p, residue) in RES {
        let a = approx(p, p - 1, 4);
        assert_eq!(a.exact_valuation(), Some(2), "nu_{p}(H({}))", p - 1);
        let p4 = BigUint::from(p).pow(4);
        let got = BigUint::from(p).pow(2) * a.unit_mod(2) % &p4;
        assert_eq!(got, residue.into(), "H({}) mod {p}^4", p - 1);
    }

    // the one Wolstenholme prime below 20000, taken two digits further
    let a = approx(16843, 16842, 5);
    assert_eq!(a.exact_valuation(), Some(3));
    let p5 = BigUint::from(16843u64).pow(5);
    let got = BigUint::from(16843u64).pow(3) * a.unit_mod(2) % &p5;
    let expected = BigUint::parse_bytes(b"602185433017025807763", 10).unwrap();
    assert_eq!(got, expected);
}

#[test]
fn frozen_huge_argument() {
    let n = BigUint::parse_bytes(b"3546471722268916272", 10).unwrap();
    assert_eq!(nu_p_harmonic(&n, 11).unwrap(), Valuation::Finite(3));
    // neighbours drop back to the generic descending floor
    let a = harmonic_mod_pk(&DigitsBaseP::from_biguint(11, &(&n + 1u32)), 6).unwrap();
    assert!(a.exact_valuation().unwrap() < 1);
}

#[test]
fn precision_scales_with_request() {
    for k in [2u32, 6, 12, 24] {
        let a = approx(11, 848, k);
        assert_eq!(a.exact_valuation(), Some(3));
        assert!(a.precision >= k.saturating_sub(3));
        let b = approx(11, 848, k + 1);
        assert!(a.agrees_with(&b), "k={k} vs k={}", k + 1);
    }
}
