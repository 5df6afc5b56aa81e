//! Prime sieving and deterministic 64-bit primality testing.

use crate::modular::mul_mod_u64;

/// Primes in `[2, limit]` by an odd-only sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    // index i represents the odd number 2i + 1
    let half = n / 2 + 1;
    let mut composite = vec![false; half];
    let mut primes = vec![2u64];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    for (i, &dead) in composite.iter().enumerate().skip(1) {
        let v = 2 * i + 1;
        if v <= n && !dead {
            primes.push(v as u64);
        }
    }
    primes
}

/// Smallest-prime-factor table for `[0, limit]`; `spf[0] = 0`, `spf[1] = 1`.
pub fn spf_table(limit: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = vec![0; limit + 1];
    if limit >= 1 {
        spf[1] = 1;
    }
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Primes in `[lo, hi]` by a segmented sieve; memory stays O(√hi + hi − lo),
/// so scan slices over large ranges never allocate a full-range table.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || hi < lo {
        return Vec::new();
    }
    let lo = lo.max(2);
    let root = hi.isqrt() + 1;
    let base = sieve_primes(root);
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &q in &base {
        // first multiple of q in range, never q itself
        let first = lo.div_ceil(q).max(2) * q;
        let mut j = first;
        while j <= hi {
            composite[(j - lo) as usize] = true;
            j += q;
        }
    }
    (lo..=hi)
        .filter(|&n| !composite[(n - lo) as usize])
        .collect()
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 using the standard 7-base certificate.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    // Jaeschke / Sinclair bases: deterministic for all n < 2^64
    'witness: for &a in &[2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            // base collapses to 0 for small n dividing it; no information
            continue;
        }
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
