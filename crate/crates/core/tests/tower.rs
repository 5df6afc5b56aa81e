//! Valuation towers over a frozen corpus: measured vectors for every member
//! of the small J_p sets, the deep valuation-3 bases, and the classification
//! labels they must receive.

use harmonic_padic::{classify_tower, nu_p_harmonic, TowerClass};
use num::BigUint;

fn tower(p: u64, n: u64, m_max: u32) -> Vec<i64> {
    (0..=m_max)
        .map(|m| {
            nu_p_harmonic(&(BigUint::from(n) * BigUint::from(p).pow(m)), p)
                .unwrap()
                .finite()
        })
        .collect()
}

#[test]
fn frozen_towers_small_bases() {
    let corpus: [(u64, u64, &[i64]); 17] = [
        (5, 4, &[2, 1, 0, -1, -2, -3, -4]),
        (5, 20, &[1, 0, -1, -2, -3, -4, -5]),
        (5, 24, &[1, 0, -1, -2, -3, -4, -5]),
        (5, 1, &[0, -1, -2, -3, -4]),
        (7, 6, &[2, 1, 0, -1, -2, -3, -4]),
        (7, 42, &[1, 0, -1, -2, -3, -4, -5]),
        (7, 48, &[1, 0, -1, -2, -3, -4, -5]),
        (7, 337, &[1, 0, -1, -2, -3, -4]),
        (7, 2390, &[1, 0, -1, -2, -3]),
        (11, 3, &[1, 0, -1, -2, -3, -4, -5]),
        (11, 7, &[2, 1, 0, -1, -2, -3, -4]),
        (11, 10, &[2, 1, 0, -1, -2, -3, -4]),
        (13, 12, &[2, 1, 0, -1, -2, -3]),
        (13, 156, &[1, 0, -1, -2, -3, -4]),
        (13, 168, &[1, 0, -1, -2, -3, -4]),
        (3, 2, &[1, 0, -1, -2, -3, -4, -5]),
        (3, 7, &[1, 0, -1, -2, -3, -4, -5]),
    ];
    for (p, n, want) in corpus {
        assert_eq!(tower(p, n, (want.len() - 1) as u32), want, "tower of ({p},{n})");
    }
    assert_eq!(tower(3, 22, 6), vec![1, 0, -1, -2, -3, -4, -5]);
}

#[test]
fn deep_bases_classify_as_case_three() {
    for n in [848u64, 9338, 10583] {
        let report = classify_tower(11, &n.into(), 6).unwrap();
        assert_eq!(report.tower, vec![3, 2, 1, 0, -1, -2, -3], "base {n}");
        assert_eq!(report.base_valuation, 3);
        assert_eq!(report.classification, TowerClass::Thm26Case3);
        assert_eq!(report.m, Some(3));
        assert_eq!(report.switch_index, Some(1));
    }
}

#[test]
fn wolstenholme_pair_descends_immediately() {
    let report = classify_tower(16843, &16842u64.into(), 6).unwrap();
    assert_eq!(report.tower, vec![3, 2, 1, 0, -1, -2, -3]);
    assert_eq!(report.classification, TowerClass::Thm27Case1);
    assert_eq!(report.m, None);
    assert_eq!(report.switch_index, None);
}

#[test]
fn ordinary_bases_classify_as_descent() {
    for (p, n) in [(5u64, 4u64), (5, 24), (5, 1), (7, 6), (11, 7), (13, 12)] {
        let report = classify_tower(p, &n.into(), 5).unwrap();
        assert_eq!(report.classification, TowerClass::Descent, "({p},{n})");
        assert!(report.base_valuation <= 2);
    }
}

#[test]
fn invalid_bases_are_rejected() {
    assert!(classify_tower(3, &2u64.into(), 4).is_err());
    assert!(classify_tower(4, &3u64.into(), 4).is_err());
    // a base inside another tower is not a base
    assert!(classify_tower(5, &20u64.into(), 4).is_err());
}
