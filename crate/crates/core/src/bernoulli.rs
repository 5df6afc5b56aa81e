//! Exact Bernoulli numbers with Clausen–von Staudt integrity checks, p-adic
//! valuation certificates, residues modulo primes, and Kummer index
//! reduction.
//!
//! Convention: B_1 = −1/2 (generating function t/(e^t − 1)). Some sources
//! write t/(1 − e^t), which only flips odd indices; every even index (the
//! only ones used downstream) is identical under both conventions.
//!
//! The table is built from tangent numbers (Brent–Harvey), an all-integer
//! recurrence that is far cheaper at cap ≈ 1200 than the rational defining
//! recurrence; the defining recurrence survives as the test oracle
//! [`bernoulli_by_recurrence`]. Every even entry is verified against its
//! exact Clausen–von Staudt denominator at build time.

use crate::error::{Error, Result};
use crate::modular::{inv_mod_u64, mul_mod_u64, split_valuation};
use crate::padic::{approx_from_rational, PadicApprox, Rational};
use crate::primes::{is_prime_u64, sieve_primes};
use num::bigint::{BigInt, Sign};
use num::{BigUint, One, Signed, ToPrimitive, Zero};
use std::io::{BufRead, Write};
use std::sync::OnceLock;

/// Covers every index needed by the expansion-formula checks at desk scale.
pub const DEFAULT_BERNOULLI_CAP: u64 = 1200;

/// Exact Bernoulli numbers B_0 .. B_cap.
pub struct BernoulliTable {
    values: Vec<Rational>,
}

impl BernoulliTable {
    /// Build B_0..B_cap from tangent numbers and verify every even entry's
    /// denominator against Clausen–von Staudt.
    pub fn new(cap: u64) -> Self {
        let capu = cap as usize;
        let mut values = vec![Rational::zero(); capu + 1];
        values[0] = Rational::one();
        if capu >= 1 {
            values[1] = Rational::new(BigInt::from(-1), BigInt::from(2));
        }
        let n_max = capu / 2;

        // tangent numbers T_1..T_n (Brent–Harvey in-place recurrence)
        let mut t: Vec<BigUint> = vec![BigUint::zero(); n_max + 1];
        if n_max >= 1 {
            t[1] = BigUint::one();
        }
        for k in 2..=n_max {
            t[k] = &t[k - 1] * (k as u64 - 1);
        }
        for k in 2..=n_max {
            for j in k..=n_max {
                let a = &t[j - 1] * (j - k) as u64;
                let b = &t[j] * (j - k + 2) as u64;
                t[j] = a + b;
            }
        }

        // B_{2n} = (−1)^{n−1} · 2n · T_n / (4^n (4^n − 1))
        let mut four_n = BigUint::one();
        for n in 1..=n_max {
            four_n *= 4u32;
            let num = BigUint::from(2 * n as u64) * &t[n];
            let den = &four_n * (&four_n - 1u32);
            let sign = if n % 2 == 1 { Sign::Plus } else { Sign::Minus };
            values[2 * n] = Rational::new(
                BigInt::from_biguint(sign, num),
                BigInt::from_biguint(Sign::Plus, den),
            );
        }

        check_integrity(&values).expect("freshly built Bernoulli table failed integrity checks");
        BernoulliTable { values }
    }

    pub fn cap(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn get(&self, i: u64) -> Result<&Rational> {
        self.values.get(i as usize).ok_or(Error::Capacity {
            what: "Bernoulli table index".into(),
            needed: i,
            cap: self.cap(),
        })
    }
}

/// Odd-index vanishing and exact von Staudt denominators for even indices.
fn check_integrity(values: &[Rational]) -> Result<()> {
    let cap = values.len() - 1;
    let primes = sieve_primes(cap as u64 + 1);
    if !values[0].is_one() {
        return Err(Error::Domain("B_0 must be 1".into()));
    }
    for (i, v) in values.iter().enumerate().skip(2) {
        if i % 2 == 1 {
            if !v.is_zero() {
                return Err(Error::Domain(format!("B_{i} must vanish (odd index)")));
            }
            continue;
        }
        let mut denom = BigUint::one();
        for &q in &primes {
            if (i as u64).is_multiple_of(q - 1) {
                denom *= q;
            }
        }
        if values[i].denom().magnitude() != &denom {
            return Err(Error::Domain(format!(
                "B_{i} denominator {} violates von Staudt (expected {denom})",
                values[i].denom()
            )));
        }
    }
    Ok(())
}

static GLOBAL: OnceLock<BernoulliTable> = OnceLock::new();

/// Install a process-wide table with a custom cap. Returns false when the
/// global table was already initialized (the existing one stays).
pub fn init_global_table(cap: u64) -> bool {
    GLOBAL.set(BernoulliTable::new(cap)).is_ok()
}

/// Install an already-built table (e.g. loaded from disk) as the process-wide
/// one. Returns false when a global table already exists.
pub fn init_global_table_with(table: BernoulliTable) -> bool {
    GLOBAL.set(table).is_ok()
}

/// The shared table, built on first use with [`DEFAULT_BERNOULLI_CAP`].
pub fn global_table() -> &'static BernoulliTable {
    GLOBAL.get_or_init(|| BernoulliTable::new(DEFAULT_BERNOULLI_CAP))
}

/// Cap of the shared table if it has already been built; `None` otherwise.
/// Unlike [`global_table`], never forces the build.
pub fn initialized_cap() -> Option<u64> {
    GLOBAL.get().map(|t| t.cap())
}

pub fn bernoulli_exact(i: u64) -> Result<Rational> {
    global_table().get(i).cloned()
}

/// B_{2n} + Σ_{(q−1) | 2n} 1/q, an integer by Clausen–von Staudt.
pub fn von_staudt_defect(two_n: u64) -> Result<Rational> {
    if two_n == 0 || two_n % 2 == 1 {
        return Err(Error::Domain(format!(
            "von Staudt applies to even positive indices, got {two_n}"
        )));
    }
    let mut defect = bernoulli_exact(two_n)?;
    for q in sieve_primes(two_n + 1) {
        if two_n.is_multiple_of(q - 1) {
            defect += Rational::new(BigInt::one(), BigInt::from(q));
        }
    }
    Ok(defect)
}

/// A valuation that is either exactly known or certified from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValBound {
    Exact(i64),
    AtLeast(i64),
}

/// ν_p(B_{2n}) without computing B_{2n}: exactly −1 when (p−1) | 2n, and
/// certified ≥ 0 otherwise (Clausen–von Staudt).
pub fn bernoulli_valuation(two_n: u64, p: u64) -> Result<ValBound> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall {
            p,
            min: 5,
            context: "von Staudt valuation certificate",
        });
    }
    if two_n == 0 || two_n % 2 == 1 {
        return Err(Error::Domain(format!(
            "valuation certificate needs an even positive index, got {two_n}"
        )));
    }
    Ok(if two_n.is_multiple_of(p - 1) {
        ValBound::Exact(-1)
    } else {
        ValBound::AtLeast(0)
    })
}

/// Result of reducing B_a/a modulo p by Kummer's congruence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KummerReduction {
    pub original_index: u64,
    /// The even residue of the original index in [2, p−3].
    pub reduced_index: u64,
    /// B_b/b modulo p (may be 0 for an irregular pair).
    pub unit_of_quotient: u64,
}

/// Reduce B_a/a ≡ B_b/b (mod p) to the canonical index b ≡ a (mod p−1),
/// 2 ≤ b ≤ p−3. Requires (p−1) ∤ a.
pub fn kummer_reduce(a: u64, p: u64) -> Result<KummerReduction> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall {
            p,
            min: 5,
            context: "Kummer reduction",
        });
    }
    if a == 0 || a % 2 == 1 {
        return Err(Error::Domain(format!(
            "Kummer reduction needs an even positive index, got {a}"
        )));
    }
    let b = a % (p - 1);
    if b == 0 {
        return Err(Error::Domain(format!(
            "Kummer congruence inapplicable: {} divides {a}",
            p - 1
        )));
    }
    let quotient = global_table().get(b)? / Rational::from(BigInt::from(b));
    Ok(KummerReduction {
        original_index: a,
        reduced_index: b,
        unit_of_quotient: rational_residue_mod_p(&quotient, p)?,
    })
}

/// Residue of a p-integral rational modulo p.
pub fn rational_residue_mod_p(q: &Rational, p: u64) -> Result<u64> {
    if q.is_zero() {
        return Ok(0);
    }
    let (vd, ud) = split_valuation(q.denom().magnitude(), p);
    if vd > 0 {
        return Err(Error::Domain(format!(
            "residue undefined: denominator carries {p}^{vd}"
        )));
    }
    let num_mod = (q.numer().magnitude() % p).to_u64().expect("residue fits");
    let den_mod = (ud % p).to_u64().expect("residue fits");
    let inv = inv_mod_u64(den_mod, p).expect("denominator cofactor coprime to p");
    let r = mul_mod_u64(num_mod, inv, p);
    Ok(if q.is_negative() && r != 0 { p - r } else { r })
}

/// B_i as a p-adic approximation to r digits (zero flag for vanishing B_i).
pub fn bernoulli_mod(i: u64, p: u64, r: u32) -> Result<PadicApprox> {
    approx_from_rational(&bernoulli_exact(i)?, p, r)
}

/// Wolstenholme test through B_{p−3}: exact when p−3 is within the table
/// cap, otherwise delegated to the harmonic-sum criterion p³ | H(p−1)
/// (the two are equivalent; the delegation is exercised for p = 16843).
pub fn is_wolstenholme_via_bernoulli(p: u64) -> Result<bool> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall {
            p,
            min: 5,
            context: "Wolstenholme property",
        });
    }
    let table = global_table();
    if p - 3 <= table.cap() {
        // (p−1) ∤ (p−3), so B_{p−3} is p-integral; test p | numerator
        let b = table.get(p - 3)?;
        Ok((b.numer().magnitude() % p).is_zero())
    } else {
        crate::wolstenholme::wolstenholme_harmonic_only(p)
    }
}

/// Write the table in the text cache format: one `index numerator/denominator`
/// line per index.
pub fn write_table_text<W: Write>(table: &BernoulliTable, w: &mut W) -> std::io::Result<()> {
    for (i, v) in table.values.iter().enumerate() {
        writeln!(w, "{} {}/{}", i, v.numer(), v.denom())?;
    }
    Ok(())
}

/// Read a table written by [`write_table_text`], re-validating integrity.
pub fn read_table_text<R: BufRead>(r: R) -> Result<BernoulliTable> {
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Domain(format!("table read failed: {e}")))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Domain(format!("malformed table line {}: {line:?}", lineno + 1));
        let (idx, frac) = line.split_once(' ').ok_or_else(bad)?;
        let (num, den) = frac.split_once('/').ok_or_else(bad)?;
        if idx.parse::<usize>().map_err(|_| bad())? != values.len() {
            return Err(Error::Domain(format!(
                "table line {} out of order: expected index {}",
                lineno + 1,
                values.len()
            )));
        }
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den <= BigInt::zero() {
            return Err(bad());
        }
        values.push(Rational::new(num, den));
    }
    if values.is_empty() {
        return Err(Error::Domain("empty Bernoulli table".into()));
    }
    check_integrity(&values)?;
    Ok(BernoulliTable { values })
}

/// Binomial coefficient by the exact product formula.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Reference implementation by the defining recurrence
/// Σ_{j=0}^{m} C(m+1, j) B_j = 0, quadratic and rational-heavy; test oracle.
pub fn bernoulli_by_recurrence(cap: u64) -> Vec<Rational> {
    let capu = cap as usize;
    let mut b: Vec<Rational> = Vec::with_capacity(capu + 1);
    b.push(Rational::one());
    for m in 1..=capu {
        let mut acc = Rational::zero();
        let mut binom = BigUint::one();
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                acc += bj * Rational::from(BigInt::from_biguint(Sign::Plus, binom.clone()));
            }
            binom = binom * (m as u64 + 1 - j as u64) / (j as u64 + 1);
        }
        b.push(-acc / Rational::from(BigInt::from(m as u64 + 1)));
    }
    b
}
