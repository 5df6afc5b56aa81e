//! Modular inverses (extended Euclid) and Montgomery batch inversion, in
//! both arbitrary-precision and u64 flavors. The u64 path carries the
//! Wolstenholme range scan; everything else uses BigUint.

use num::bigint::BigInt;
use num::{BigUint, Integer, One, Signed, Zero};

/// Inverse of `a` modulo `m` via extended Euclid; `None` when gcd != 1.
pub fn inv_mod(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let e = a.extended_gcd(&m_int);
    if !e.gcd.is_one() {
        return None;
    }
    let mut x = e.x % &m_int;
    if x.is_negative() {
        x += &m_int;
    }
    Some(x.to_biguint().expect("reduced residue is non-negative"))
}

/// Montgomery's trick: invert every element with a single extended Euclid.
/// `None` when some element is not invertible (or the slice holds a zero).
pub fn batch_invert(xs: &[BigUint], m: &BigUint) -> Option<Vec<BigUint>> {
    if xs.is_empty() {
        return Some(Vec::new());
    }
    let mut prefix = Vec::with_capacity(xs.len());
    let mut acc = BigUint::one();
    for x in xs {
        prefix.push(acc.clone());
        acc = &acc * x % m;
    }
    let mut inv_acc = inv_mod(&acc, m)?;
    let mut out = vec![BigUint::zero(); xs.len()];
    for i in (0..xs.len()).rev() {
        out[i] = &inv_acc * &prefix[i] % m;
        inv_acc = inv_acc * (&xs[i] % m) % m;
    }
    Some(out)
}

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Inverse of `a` modulo `m` for u64 operands (extended Euclid over i128).
pub fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    let m = m as i128;
    Some(((s0 % m + m) % m) as u64)
}

/// Batch inversion in a u64 modulus (products taken through u128).
pub fn batch_invert_u64(xs: &[u64], m: u64) -> Option<Vec<u64>> {
    if xs.is_empty() {
        return Some(Vec::new());
    }
    let mut prefix = Vec::with_capacity(xs.len());
    let mut acc = 1u64;
    for &x in xs {
        prefix.push(acc);
        acc = mul_mod_u64(acc, x % m, m);
    }
    let mut inv_acc = inv_mod_u64(acc, m)?;
    let mut out = vec![0u64; xs.len()];
    for i in (0..xs.len()).rev() {
        out[i] = mul_mod_u64(inv_acc, prefix[i], m);
        inv_acc = mul_mod_u64(inv_acc, xs[i] % m, m);
    }
    Some(out)
}

/// p-adic valuation of a nonzero BigUint together with its cofactor.
pub fn split_valuation(x: &BigUint, p: u64) -> (u64, BigUint) {
    assert!(!x.is_zero(), "valuation of zero is infinite");
    let p_big = BigUint::from(p);
    let mut v = 0u64;
    let mut t = x.clone();
    // strip in powers of p^16 first to keep division counts low
    let chunk = p_big.pow(16);
    loop {
        let (q, r) = t.div_rem(&chunk);
        if r.is_zero() {
            v += 16;
            t = q;
        } else {
            break;
        }
    }
    loop {
        let (q, r) = t.div_rem(&p_big);
        if r.is_zero() {
            v += 1;
            t = q;
        } else {
            break;
        }
    }
    (v, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_mod_small() {
        let m = BigUint::from(25u32);
        let a = BigUint::from(12u32);
        let inv = inv_mod(&a, &m).unwrap();
        assert_eq!(inv, BigUint::from(23u32));
        assert_eq!((a * inv) % m, BigUint::one());
    }

    #[test]
    fn inv_mod_not_coprime() {
        assert!(inv_mod(&BigUint::from(10u32), &BigUint::from(25u32)).is_none());
        assert!(inv_mod_u64(10, 25).is_none());
    }

    #[test]
    fn batch_matches_single() {
        let m = BigUint::from(16843u64 * 16843);
        let xs: Vec<BigUint> = (1u64..200).map(BigUint::from).collect();
        let batch = batch_invert(&xs, &m).unwrap();
        for (x, b) in xs.iter().zip(&batch) {
            assert_eq!(b, &inv_mod(x, &m).unwrap());
        }
    }

    #[test]
    fn batch_u64_matches_single() {
        let m = 16843u64 * 16843;
        let xs: Vec<u64> = (1..500).collect();
        let batch = batch_invert_u64(&xs, m).unwrap();
        for (&x, &b) in xs.iter().zip(&batch) {
            assert_eq!(b, inv_mod_u64(x, m).unwrap());
            assert_eq!(mul_mod_u64(x, b, m), 1);
        }
    }

    #[test]
    fn split_valuation_strips_exactly() {
        let x = BigUint::from(5u32).pow(37) * BigUint::from(12u32);
        let (v, u) = split_valuation(&x, 5);
        assert_eq!(v, 37);
        assert_eq!(u, BigUint::from(12u32));
    }
}
