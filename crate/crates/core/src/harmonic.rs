//! Harmonic-number evaluation: exact rational values, incremental valuation
//! streams, and a modular evaluator whose cost is polynomial in the base-p
//! digit length of n.
//!
//! The modular evaluator rests on the exact identity
//! `H(pm+k) = H(m)/p + W(m) + D(m,k)`, where
//! `W(m) = Σ_{ℓ=0}^{m−1} Σ_{i=1}^{p−1} 1/(ℓp+i)` and
//! `D(m,k) = Σ_{i=1}^{k} 1/(pm+i)`. Expanding each reciprocal geometrically
//! gives `W(m) ≡ Σ_t c_t p^t F_t(m−1)` with block coefficients
//! `c_t = (−1)^t Σ_i i^{−(t+1)}` and Faulhaber power sums F_t, so W(m) is
//! computable from m's residue alone. Instead of dividing by p at each digit
//! step, the evaluator tracks `u_s = p^s·H(m_s)` for the prefix m_s of n:
//! `u_{s+1} = u_s + p^{s+1}(W(m_s) + D(m_s,d))`, which stays exact modulo the
//! working modulus from the first digit to the last.

use crate::bernoulli::{binomial, global_table};
use crate::error::{Error, Result};
use crate::modular::{batch_invert, inv_mod, split_valuation};
use crate::padic::{approx_from_rational, val_rational, PadicApprox, Rational, Valuation};
use crate::primes::{is_prime_u64, spf_table};
use num::bigint::BigInt;
use num::{BigUint, Integer, One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Largest n the exact rational paths accept (memory-bounded).
pub const EXACT_MODE_BOUND: u64 = 1_000_000;
/// Default K for consumers that do not choose their own precision.
pub const DEFAULT_WORKING_PRECISION: u32 = 12;
/// Precision ceiling for the escalating valuation search.
pub const DEFAULT_PRECISION_CEILING: u32 = 768;
/// Escalate when fewer than this many certified digits remain.
const PRECISION_GUARD: u32 = 2;
/// Deepest expansion level backed by exact Bernoulli numbers.
pub const FORMULA1_MAX_LEVEL: u32 = 4;

pub(crate) fn pw(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

fn fold_mod(x: &Rational, m: &BigUint) -> BigUint {
    debug_assert!(x.is_integer());
    let mi = BigInt::from(m.clone());
    x.numer().mod_floor(&mi).to_biguint().expect("mod_floor is non-negative")
}

// ---------------------------------------------------------------------------
// digits

/// n in little-endian base-p digits; zero is the empty digit string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitsBaseP {
    prime: u64,
    digits: Vec<u64>,
}

impl DigitsBaseP {
    /// Validating constructor for externally supplied digit strings.
    pub fn new(prime: u64, digits: Vec<u64>) -> Result<Self> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        if digits.iter().any(|&d| d >= prime) {
            return Err(Error::Domain(format!("digit out of range for base {prime}")));
        }
        if let Some(&msb) = digits.last() {
            if msb == 0 {
                return Err(Error::Domain("most significant digit must be nonzero".into()));
            }
        }
        Ok(DigitsBaseP { prime, digits })
    }

    pub fn from_biguint(prime: u64, n: &BigUint) -> Self {
        assert!(is_prime_u64(prime), "{prime} is not prime");
        let mut digits = Vec::new();
        let p = BigUint::from(prime);
        let mut rest = n.clone();
        while !rest.is_zero() {
            let (q, r) = rest.div_rem(&p);
            digits.push(r.to_u64().expect("digit below p"));
            rest = q;
        }
        DigitsBaseP { prime, digits }
    }

    pub fn from_u64(prime: u64, n: u64) -> Self {
        Self::from_biguint(prime, &BigUint::from(n))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Little-endian digits; empty exactly for n = 0.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut acc = BigUint::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * self.prime + d;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// exact paths

/// Exact H(n) as a reduced rational; H(0) = 0.
///
/// Internally accumulates over the lcm denominator (which only grows at prime
/// powers), reducing once at the end.
pub fn harmonic_exact(n: u64) -> Result<Rational> {
    if n > EXACT_MODE_BOUND {
        return Err(Error::ExactBoundExceeded {
            n: n.into(),
            bound: EXACT_MODE_BOUND,
        });
    }
    if n == 0 {
        return Ok(Rational::zero());
    }
    let spf = spf_table(n as usize);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 2..=n {
        let q = spf[i as usize] as u64;
        let mut rest = i;
        while rest % q == 0 {
            rest /= q;
        }
        if rest == 1 {
            // i is a prime power: lcm(1..i) gains one factor of q
            den *= q;
            num *= q;
        }
        num += &den / i;
    }
    Ok(Rational::new(
        BigInt::from_biguint(num::bigint::Sign::Plus, num),
        BigInt::from_biguint(num::bigint::Sign::Plus, den),
    ))
}

/// One exact stream step: n, ν_p(H(n)), and optionally the unit of H(n)
/// modulo p^unit_digits.
#[derive(Debug, Clone)]
pub struct HarmonicSample {
    pub n: u64,
    pub valuation: Valuation,
    pub unit: Option<BigUint>,
}

/// Incremental exact H(n) over the lcm denominator, emitting p-adic data for
/// n = 1, 2, …, n_max without ever reducing the fraction.
pub struct HarmonicStream {
    prime: u64,
    n_max: u64,
    next_n: u64,
    num: BigUint,
    den: BigUint,
    den_vp: i64,
    den_cop_mod: BigUint,
    unit_digits: u32,
    unit_modulus: BigUint,
    spf: Vec<u32>,
}

impl HarmonicStream {
    pub fn new(prime: u64, n_max: u64, unit_digits: u32) -> Result<Self> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        if n_max > EXACT_MODE_BOUND {
            return Err(Error::ExactBoundExceeded {
                n: n_max.into(),
                bound: EXACT_MODE_BOUND,
            });
        }
        Ok(HarmonicStream {
            prime,
            n_max,
            next_n: 1,
            num: BigUint::one(),
            den: BigUint::one(),
            den_vp: 0,
            den_cop_mod: BigUint::one(),
            unit_digits,
            unit_modulus: pw(prime, unit_digits.max(1)),
            spf: spf_table(n_max as usize),
        })
    }
}

impl Iterator for HarmonicStream {
    type Item = HarmonicSample;

    fn next(&mut self) -> Option<HarmonicSample> {
        let n = self.next_n;
        if n > self.n_max {
            return None;
        }
        self.next_n += 1;
        if n > 1 {
            let q = self.spf[n as usize] as u64;
            let mut rest = n;
            while rest.is_multiple_of(q) {
                rest /= q;
            }
            if rest == 1 {
                self.den *= q;
                self.num *= q;
                if q == self.prime {
                    self.den_vp += 1;
                } else {
                    self.den_cop_mod = &self.den_cop_mod * q % &self.unit_modulus;
                }
            }
            self.num += &self.den / n;
        }
        // H(n) = num/den with den = lcm(1..n) = p^den_vp · (coprime part)
        let (vnum, cof) = if (&self.num % self.prime).is_zero() {
            split_valuation(&self.num, self.prime)
        } else {
            (0, self.num.clone())
        };
        let unit = (self.unit_digits > 0).then(|| {
            let inv = inv_mod(&(&self.den_cop_mod % &self.unit_modulus), &self.unit_modulus)
                .expect("denominator cofactor coprime to p");
            cof % &self.unit_modulus * inv % &self.unit_modulus
        });
        Some(HarmonicSample {
            n,
            valuation: Valuation::Finite(vnum as i64 - self.den_vp),
            unit,
        })
    }
}

/// Exact ν_p(H(n)) for every n = 1..=n_max.
pub fn valuation_stream(
    p: u64,
    n_max: u64,
) -> Result<impl Iterator<Item = (u64, Valuation)>> {
    Ok(HarmonicStream::new(p, n_max, 0)?.map(|s| (s.n, s.valuation)))
}

// ---------------------------------------------------------------------------
// block coefficients

/// Coefficients of the geometric block expansion
/// Σ_{i=1}^{p−1} 1/(ℓp+i) ≡ Σ_{t<K} c_t (ℓp)^t (mod p^K),
/// with c_t = (−1)^t Σ_{i=1}^{p−1} i^{−(t+1)} stored modulo p^{K−t}.
#[derive(Debug, Clone)]
pub struct BlockCoefficients {
    pub prime: u64,
    pub precision: u32,
    coeffs: Vec<BigUint>,
}

impl BlockCoefficients {
    fn build(p: u64, k: u32) -> Self {
        let modulus = pw(p, k);
        let xs: Vec<BigUint> = (1..p).map(BigUint::from).collect();
        let invs = batch_invert(&xs, &modulus).expect("1..p-1 are units");
        let mut pows = invs.clone();
        let mut coeffs = Vec::with_capacity(k as usize);
        for t in 0..k {
            let m_t = pw(p, k - t);
            let mut s = BigUint::zero();
            for x in &pows {
                s += x;
            }
            s %= &m_t;
            if t % 2 == 1 && !s.is_zero() {
                s = &m_t - s;
            }
            coeffs.push(s);
            if t + 1 < k {
                for (x, inv) in pows.iter_mut().zip(&invs) {
                    *x = &*x * inv % &modulus;
                }
            }
        }
        if p >= 5 {
            // Wolstenholme: c_0 ≡ H(p−1) has ν_p ≥ 2
            let check = pw(p, k.min(2));
            assert!(
                (&coeffs[0] % check).is_zero(),
                "c_0 must vanish to order 2 for p = {p}"
            );
        }
        BlockCoefficients {
            prime: p,
            precision: k,
            coeffs,
        }
    }

    /// c_t as a residue modulo p^{precision−t}.
    pub fn coefficient(&self, t: u32) -> &BigUint {
        &self.coeffs[t as usize]
    }

    /// B(ℓ) = Σ_{i=1}^{p−1} 1/(ℓp+i) modulo p^precision.
    pub fn block_sum(&self, ell: &BigUint) -> BigUint {
        let modulus = pw(self.prime, self.precision);
        let step = ell % &modulus * self.prime % &modulus;
        let mut acc = BigUint::zero();
        let mut f = BigUint::one();
        for c in &self.coeffs {
            acc = (acc + c * &f) % &modulus;
            f = f * &step % &modulus;
        }
        acc
    }
}

type BlockCache = RwLock<HashMap<(u64, u32), Arc<BlockCoefficients>>>;

fn block_cache() -> &'static BlockCache {
    static CACHE: OnceLock<BlockCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn block_coefficients_any(p: u64, k: u32) -> Arc<BlockCoefficients> {
    if let Some(hit) = block_cache().read().unwrap().get(&(p, k)) {
        return hit.clone();
    }
    let built = Arc::new(BlockCoefficients::build(p, k));
    block_cache()
        .write()
        .unwrap()
        .entry((p, k))
        .or_insert(built)
        .clone()
}

/// Block coefficients for p ≥ 5, cached per (p, K).
pub fn block_coefficients(p: u64, k: u32) -> Result<Arc<BlockCoefficients>> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall {
            p,
            min: 5,
            context: "block coefficients",
        });
    }
    if k == 0 {
        return Err(Error::Domain("precision K must be at least 1".into()));
    }
    Ok(block_coefficients_any(p, k))
}

// ---------------------------------------------------------------------------
// Faulhaber power sums

/// Integerized Faulhaber polynomial for Σ_{k=1}^{x} k^e modulo p^K:
/// coefficients of D·F_e(x) in y = x+1, taken modulo p^{K+v} where
/// D clears every coefficient denominator and v = ν_p(D).
struct FaulhaberPoly {
    modulus_hi: BigUint,
    modulus_out: BigUint,
    p_pow_v: BigUint,
    /// coefficient of y^s at index s, s = 0..=e+1
    coeffs: Vec<BigUint>,
    inv_d: BigUint,
}

impl FaulhaberPoly {
    fn build(e: u32, p: u64, k: u32) -> Result<Self> {
        let table = global_table();
        // F_e(x) = (1/(e+1)) Σ_{j=0}^{e} C(e+1, j) B_j (x+1)^{e+1−j}
        let mut coeffs_q = vec![Rational::zero(); e as usize + 2];
        for j in 0..=e as u64 {
            let bj = table.get(j)?;
            if bj.is_zero() {
                continue;
            }
            let c = Rational::from(BigInt::from_biguint(
                num::bigint::Sign::Plus,
                binomial(e as u64 + 1, j),
            ));
            coeffs_q[(e as u64 + 1 - j) as usize] +=
                c * bj / Rational::from(BigInt::from(e as u64 + 1));
        }
        let mut d = BigUint::one();
        for q in &coeffs_q {
            d = d.lcm(q.denom().magnitude());
        }
        let (v, _) = split_valuation(&d, p);
        let v = v as u32;
        let modulus_hi = pw(p, k + v);
        let modulus_out = pw(p, k);
        let d_q = Rational::from(BigInt::from_biguint(num::bigint::Sign::Plus, d.clone()));
        let coeffs = coeffs_q
            .iter()
            .map(|q| fold_mod(&(q * &d_q), &modulus_hi))
            .collect();
        let d_unit = &d / pw(p, v);
        let inv_d = inv_mod(&(d_unit % &modulus_out), &modulus_out).expect("unit part coprime");
        Ok(FaulhaberPoly {
            modulus_hi,
            modulus_out,
            p_pow_v: pw(p, v),
            coeffs,
            inv_d,
        })
    }

    fn eval(&self, x: &BigUint) -> BigUint {
        let y = (x + 1u32) % &self.modulus_hi;
        let mut acc = self.coeffs.last().expect("degree >= 1").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = (acc * &y + c) % &self.modulus_hi;
        }
        let (q, r) = acc.div_rem(&self.p_pow_v);
        assert!(r.is_zero(), "Faulhaber value must absorb the denominator p-part");
        q * &self.inv_d % &self.modulus_out
    }
}

type FaulhaberCache = RwLock<HashMap<(u32, u64, u32), Arc<FaulhaberPoly>>>;

fn faulhaber_cache() -> &'static FaulhaberCache {
    static CACHE: OnceLock<FaulhaberCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Σ_{k=1}^{x} k^e modulo p^K via Faulhaber's formula; x may be huge (only
/// x mod p^{K+v} enters).
pub fn power_sum_mod(e: u32, x: &BigUint, p: u64, k: u32) -> Result<BigUint> {
    if e == 0 {
        return Err(Error::Domain("power sum exponent must be at least 1".into()));
    }
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::Domain("precision K must be at least 1".into()));
    }
    if let Some(hit) = faulhaber_cache().read().unwrap().get(&(e, p, k)) {
        return Ok(hit.eval(x));
    }
    let built = Arc::new(FaulhaberPoly::build(e, p, k)?);
    let poly = faulhaber_cache()
        .write()
        .unwrap()
        .entry((e, p, k))
        .or_insert(built)
        .clone();
    Ok(poly.eval(x))
}

// ---------------------------------------------------------------------------
// the compiled W polynomial

/// W(m) = Σ_{ℓ<m} Σ_{i=1}^{p−1} 1/(ℓp+i) compiled to a single integer
/// polynomial G with G(m)/D ≡ W(m) (mod p^digits): one Horner pass per
/// evaluation instead of one Faulhaber solve per series term.
pub(crate) struct WPoly {
    /// extra digits carried so dividing out p^v stays exact
    vshift: u32,
    modulus_hi: BigUint,
    modulus_out: BigUint,
    p_pow_v: BigUint,
    /// coefficient of m^s at index s, s = 0..=digits
    coeffs: Vec<BigUint>,
    inv_d: BigUint,
}

impl WPoly {
    fn build(p: u64, t_digits: u32) -> Result<Self> {
        assert!(t_digits >= 1);
        let table = global_table();
        let t_max = t_digits;

        // denominator bound D: lcm of every B_j/(t+1) denominator in play
        let mut d = BigUint::one();
        for t in 1..t_max as u64 {
            for j in 0..=t {
                let bj = table.get(j)?;
                if bj.is_zero() {
                    continue;
                }
                let q = bj / Rational::from(BigInt::from(t + 1));
                d = d.lcm(q.denom().magnitude());
            }
        }
        let (v, _) = split_valuation(&d, p);
        let v = v as u32;
        let modulus_hi = pw(p, t_digits + v);
        let modulus_out = pw(p, t_digits);

        // c_t residues modulo p^{T+v−t}: exactly what the error budget needs
        let blocks = block_coefficients_any(p, t_digits + v);

        // assemble the exact rational coefficients of
        // c_0·m + Σ_{t=1}^{T−1} c_t p^t F_t(m−1) in powers of m
        let mut coeffs_q = vec![Rational::zero(); t_digits as usize + 1];
        coeffs_q[1] += Rational::from(BigInt::from_biguint(
            num::bigint::Sign::Plus,
            blocks.coefficient(0).clone(),
        ));
        for t in 1..t_max {
            let scale = Rational::new(
                BigInt::from_biguint(num::bigint::Sign::Plus, blocks.coefficient(t) * pw(p, t)),
                BigInt::from(t as u64 + 1),
            );
            for j in 0..=t as u64 {
                let bj = table.get(j)?;
                if bj.is_zero() {
                    continue;
                }
                let c = BigInt::from_biguint(
                    num::bigint::Sign::Plus,
                    binomial(t as u64 + 1, j),
                );
                coeffs_q[(t as u64 + 1 - j) as usize] += &scale * bj * Rational::from(c);
            }
        }

        let d_q = Rational::from(BigInt::from_biguint(num::bigint::Sign::Plus, d.clone()));
        let coeffs = coeffs_q
            .iter()
            .map(|q| fold_mod(&(q * &d_q), &modulus_hi))
            .collect();
        let d_unit = &d / pw(p, v);
        let inv_d = inv_mod(&(d_unit % &modulus_out), &modulus_out).expect("unit part coprime");
        Ok(WPoly {
            vshift: v,
            modulus_hi,
            modulus_out,
            p_pow_v: pw(p, v),
            coeffs,
            inv_d,
        })
    }

    pub(crate) fn vshift(&self) -> u32 {
        self.vshift
    }

    /// W(m) modulo p^digits; only m mod p^{digits+vshift} enters.
    pub(crate) fn eval(&self, m: &BigUint) -> BigUint {
        let y = m % &self.modulus_hi;
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = (acc * &y + c) % &self.modulus_hi;
        }
        let (q, r) = acc.div_rem(&self.p_pow_v);
        assert!(r.is_zero(), "W value must absorb the denominator p-part");
        q * &self.inv_d % &self.modulus_out
    }
}

type WCache = RwLock<HashMap<(u64, u32), Arc<WPoly>>>;

fn w_cache() -> &'static WCache {
    static CACHE: OnceLock<WCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub(crate) fn wpoly_cached(p: u64, t_digits: u32) -> Result<Arc<WPoly>> {
    if let Some(hit) = w_cache().read().unwrap().get(&(p, t_digits)) {
        return Ok(hit.clone());
    }
    let built = Arc::new(WPoly::build(p, t_digits)?);
    Ok(w_cache()
        .write()
        .unwrap()
        .entry((p, t_digits))
        .or_insert(built)
        .clone())
}

/// Prefix sums of D(m, k) = Σ_{i=1}^{k} 1/(pm+i) modulo p^digits:
/// entry k holds D(m, k), entry 0 is 0. One batch inversion for all k.
pub(crate) fn d_prefix_sums(p: u64, m_mod: &BigUint, digits: u32, k_max: u64) -> Vec<BigUint> {
    debug_assert!(k_max < p);
    let modulus = pw(p, digits);
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push(BigUint::zero());
    if k_max == 0 {
        return out;
    }
    let base = m_mod % &modulus * p % &modulus;
    let xs: Vec<BigUint> = (1..=k_max).map(|i| (&base + i) % &modulus).collect();
    let invs = batch_invert(&xs, &modulus).expect("pm+i is a unit for 1 <= i < p");
    let mut acc = BigUint::zero();
    for inv in invs {
        acc = (acc + inv) % &modulus;
        out.push(acc.clone());
    }
    out
}

// ---------------------------------------------------------------------------
// the evaluator

/// H(n) modulo p^(valuation + K'), with n given by its base-p digits. The
/// digit recursion runs most-significant first on u = p^s·H(prefix), which is
/// exact modulo p^{K + L + 2} throughout (L = digit length − 1), so the
/// returned valuation is exact whenever any digit survives; otherwise the
/// zero-to-precision bound K + 2 is certified.
pub fn harmonic_mod_pk(n: &DigitsBaseP, k_digits: u32) -> Result<PadicApprox> {
    let p = n.prime();
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if k_digits == 0 {
        return Err(Error::Domain("precision K must be at least 1".into()));
    }
    if n.is_zero() {
        return Ok(PadicApprox::zero_to_precision(p, k_digits as i64));
    }
    let digits = n.digits();
    let len = digits.len();
    let l = (len - 1) as u32;
    let wd = k_digits + l + 2;
    let modulus = pw(p, wd);

    let msb = digits[len - 1];
    let mut u = d_prefix_sums(p, &BigUint::zero(), wd, msb)
        .pop()
        .expect("prefix sums nonempty");

    if len > 1 {
        let wpoly = wpoly_cached(p, wd)?;
        let m_modulus = pw(p, wd + wpoly.vshift());
        let mut m_mod = BigUint::from(msb);
        let mut scale = BigUint::one();
        for &d in digits[..len - 1].iter().rev() {
            let mut add = wpoly.eval(&m_mod);
            if d > 0 {
                let dsum = d_prefix_sums(p, &m_mod, wd, d)
                    .pop()
                    .expect("prefix sums nonempty");
                add = (add + dsum) % &modulus;
            }
            scale *= p;
            u = (u + add * &scale) % &modulus;
            m_mod = (m_mod * p + d) % &m_modulus;
        }
    }

    // u ≡ p^l · H(n) (mod p^wd), exactly
    if u.is_zero() {
        return Ok(PadicApprox::zero_to_precision(p, wd as i64 - l as i64));
    }
    let (vu, unit) = split_valuation(&u, p);
    Ok(PadicApprox {
        prime: p,
        valuation: vu as i64 - l as i64,
        unit,
        precision: wd - vu as u32,
        is_zero_to_precision: false,
    })
}

/// Exact ν_p(H(n)) with escalating precision; ν_p(H(0)) = +infinity.
pub fn nu_p_harmonic(n: &BigUint, p: u64) -> Result<Valuation> {
    nu_p_harmonic_with(n, p, DEFAULT_WORKING_PRECISION, DEFAULT_PRECISION_CEILING)
}

/// As [`nu_p_harmonic`], with explicit starting precision and ceiling. The
/// search doubles K whenever the evaluator returns only a bound (or leaves
/// fewer than the guard digits); hitting the ceiling without a determination
/// is an explicit error carrying the proved bound.
pub fn nu_p_harmonic_with(
    n: &BigUint,
    p: u64,
    start_k: u32,
    ceiling: u32,
) -> Result<Valuation> {
    if n.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let digits = DigitsBaseP::from_biguint(p, n);
    let mut k = start_k.clamp(1, ceiling.max(1));
    loop {
        let a = harmonic_mod_pk(&digits, k)?;
        if !a.is_zero_to_precision && a.precision > PRECISION_GUARD {
            return Ok(Valuation::Finite(a.valuation));
        }
        if k >= ceiling {
            return if a.is_zero_to_precision {
                Err(Error::Undetermined {
                    bound: a.valuation,
                    ceiling,
                })
            } else {
                // the valuation is exact even with a thin margin
                Ok(Valuation::Finite(a.valuation))
            };
        }
        k = (k * 2).min(ceiling);
    }
}

// ---------------------------------------------------------------------------
// Formula-1 right-hand side

/// Trichotomy from the expansion-term analysis: the pivot (h = m−1, k = 1),
/// terms whose Bernoulli index is divisible by p−1, and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGroup {
    Pivot,
    GroupIi,
    GroupIii,
}

impl std::fmt::Display for TermGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TermGroup::Pivot => "pivot",
            TermGroup::GroupIi => "group_ii",
            TermGroup::GroupIii => "group_iii",
        })
    }
}

/// One (h, k) expansion term, with its exact valuation and mod-p unit.
#[derive(Debug, Clone)]
pub struct Formula1Term {
    pub h: u32,
    pub k: u32,
    pub valuation: i64,
    /// Unit of the term modulo p; absent when the term vanishes mod p.
    pub unit_mod_p: Option<u64>,
    pub group: TermGroup,
}

/// Evaluation of H(n)/p^m + Σ_{h,k} B_{p^h(p−1)−2k}/(2k p^h) ·
/// C(p^h(p−1)−1, 2k−1) · p^{2k(m−h)} n^{2k}.
#[derive(Debug, Clone)]
pub struct Formula1Report {
    pub prime: u64,
    pub level: u32,
    pub n: BigUint,
    /// The double sum, exactly (zero for m ≤ 2).
    pub tail_exact: Rational,
    pub terms: Vec<Formula1Term>,
    /// H(n)/p^m from the modular evaluator.
    pub harmonic_term: PadicApprox,
    /// Residue mod p of the full right-hand side, when it is p-integral.
    pub residue_mod_p: Option<u64>,
}

fn residue_mod_p_of(a: &PadicApprox) -> Option<u64> {
    if a.valuation >= 1 {
        return Some(0);
    }
    if a.is_zero_to_precision || a.valuation < 0 {
        return None;
    }
    (&a.unit % a.prime).to_u64()
}

/// Right-hand side of the p^m-expansion of H(p^m n), term by term, plus its
/// residue class modulo p. Requires p ≥ 5, p ∤ n, and exact Bernoulli
/// backing for every index p^h(p−1)−2k that appears.
pub fn formula1_rhs(n: &BigUint, m: u32, p: u64) -> Result<Formula1Report> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall {
            p,
            min: 5,
            context: "expansion formula",
        });
    }
    if !(1..=FORMULA1_MAX_LEVEL).contains(&m) {
        return Err(Error::Domain(format!(
            "expansion level must be in 1..={FORMULA1_MAX_LEVEL}, got {m}"
        )));
    }
    if n.is_zero() || (n % p).is_zero() {
        return Err(Error::Domain(format!("n must be positive and coprime to {p}")));
    }
    let table = global_table();
    if m >= 3 {
        // the deepest Bernoulli index appears at (h, k) = (m−1, 1)
        let needed = p
            .checked_pow(m - 1)
            .and_then(|x| x.checked_mul(p - 1))
            .map(|x| x - 2)
            .ok_or(Error::Capacity {
                what: "Bernoulli index for the expansion tail".into(),
                needed: u64::MAX,
                cap: table.cap(),
            })?;
        if needed > table.cap() {
            return Err(Error::Capacity {
                what: "Bernoulli index for the expansion tail".into(),
                needed,
                cap: table.cap(),
            });
        }
    }

    let nq = Rational::from(BigInt::from_biguint(num::bigint::Sign::Plus, n.clone()));
    let mut tail = Rational::zero();
    let mut terms = Vec::new();
    for h in 2..m {
        let ph = p.pow(h);
        for k in 1..=h {
            let idx = ph * (p - 1) - 2 * k as u64;
            let b = table.get(idx)?;
            let binc = Rational::from(BigInt::from_biguint(
                num::bigint::Sign::Plus,
                binomial(ph * (p - 1) - 1, 2 * k as u64 - 1),
            ));
            let denom = Rational::from(BigInt::from(2 * k as u64))
                * Rational::from(BigInt::from(ph));
            let power = Rational::from(BigInt::from_biguint(
                num::bigint::Sign::Plus,
                pw(p, 2 * k * (m - h)),
            ));
            let term = b / denom * binc * power * nq.pow(2 * k as i32);
            let v = val_rational(&term, p)?.finite();
            let unit_mod_p = if v <= 0 {
                let shift = Rational::from(BigInt::from_biguint(
                    num::bigint::Sign::Plus,
                    pw(p, (-v) as u32),
                ));
                Some(crate::bernoulli::rational_residue_mod_p(&(&term * shift), p)?)
            } else {
                None
            };
            let group = if h == m - 1 && k == 1 {
                TermGroup::Pivot
            } else if (2 * k as u64).is_multiple_of(p - 1) {
                TermGroup::GroupIi
            } else {
                TermGroup::GroupIii
            };
            terms.push(Formula1Term {
                h,
                k,
                valuation: v,
                unit_mod_p,
                group,
            });
            tail += term;
        }
    }

    let digits = DigitsBaseP::from_biguint(p, n);
    let h_approx = harmonic_mod_pk(&digits, m + DEFAULT_WORKING_PRECISION)?;
    let h_term = h_approx.shift(-(m as i64));
    let total = h_term.padd(&approx_from_rational(
        &tail,
        p,
        m + DEFAULT_WORKING_PRECISION,
    )?);
    Ok(Formula1Report {
        prime: p,
        level: m,
        n: n.clone(),
        tail_exact: tail,
        terms,
        harmonic_term: h_term,
        residue_mod_p: residue_mod_p_of(&total),
    })
}

// ---------------------------------------------------------------------------
// χ_m cross-check

/// χ_m(n) = (1/p^m) Σ_{ℓ=0}^{n−1} Σ_{k=1}^{p−1} 1/(ℓp+k), exactly.
pub fn chi_direct(n: u64, m: u32, p: u64) -> Result<Rational> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    let mut s = Rational::zero();
    for ell in 0..n {
        for k in 1..p {
            s += Rational::new(BigInt::one(), BigInt::from(ell * p + k));
        }
    }
    Ok(s / Rational::from(BigInt::from_biguint(num::bigint::Sign::Plus, pw(p, m))))
}

/// Closed form Σ_{k=1}^{m} B_{p^m(p−1)−2k}/(2k p^m) · C(p^m(p−1)−1, 2k−1)
/// · (np)^{2k}, exactly.
pub fn chi_closed(n: u64, m: u32, p: u64) -> Result<Rational> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    let table = global_table();
    let phi = p.pow(m) * (p - 1);
    let mut s = Rational::zero();
    for k in 1..=m as u64 {
        let b = table.get(phi - 2 * k)?;
        let denom = Rational::from(BigInt::from(2 * k))
            * Rational::from(BigInt::from_biguint(num::bigint::Sign::Plus, pw(p, m)));
        let binc = Rational::from(BigInt::from_biguint(
            num::bigint::Sign::Plus,
            binomial(phi - 1, 2 * k - 1),
        ));
        let np = Rational::from(BigInt::from(n * p));
        s += b / denom * binc * np.pow(2 * k as i32);
    }
    Ok(s)
}

/// Check χ_m(n) ≡ closed form (mod p), i.e. ν_p(direct − closed) ≥ 1, for
/// `trials` consecutive arguments starting at n.
pub fn chi_direct_vs_closed(n: u64, m: u32, p: u64, trials: u64) -> Result<bool> {
    for x in n..n + trials {
        let delta = chi_direct(x, m, p)? - chi_closed(x, m, p)?;
        if val_rational(&delta, p)? < Valuation::Finite(1) {
            return Ok(false);
        }
    }
    Ok(true)
}
