//! Wolstenholme primality, prime-range scans, valuation towers of H(p^m·n),
//! and exact valuation tables.
//!
//! A prime p ≥ 5 is Wolstenholme when ν_p(H(p−1)) ≥ 3; ordinary primes have
//! ν_p(H(p−1)) = 2 exactly. The harmonic test measures Σ_{i<p} i^{−1} modulo
//! p^3 directly with batch inversion, escalating the modulus only when the
//! residue vanishes, and cross-checks against the Bernoulli criterion
//! (p | numerator(B_{p−3})) whenever the shared Bernoulli table reaches that
//! index.
//!
//! Towers ν_p(H(p^m·n)) for fixed n coprime to p are measured empirically by
//! the digit evaluator and then matched against the allowed pattern families.
//! The labels are part of the tool's output vocabulary:
//!
//! * `Descent` - base valuation ≤ 2, so ν drops by exactly 1 per level.
//! * `Thm2.6-*` - ordinary p with base ν ≥ 3: `case1` (base ≥ 4, one drop to
//!   2, then descent), `case2(prefix)` (base 3, ν = 2m+3 on every measured
//!   level), `case3` (base 3, a ν = 2m+3 prefix, then ν = M−m descending
//!   through zero at level M).
//! * `Thm2.7-*` - Wolstenholme p: `case1` (base 3, descent after one step),
//!   `case2(prefix)` (base ≥ 4, ν ≥ 2m+4 on every measured level), `case3`
//!   (base ≥ 4, a ν ≥ 2m+4 prefix, then ν = M−m).
//! * `Violation` - consistent with none of the above; the property suites
//!   treat any occurrence as a failure.
//!
//! Classification is structural: the switch from ascent prefix to descending
//! tail is located where it is observed, not predicted from M, and its index
//! is recorded in the report.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num::{BigUint, Zero};
use serde::{Deserialize, Serialize};

use crate::bernoulli::{initialized_cap, is_wolstenholme_via_bernoulli, DEFAULT_BERNOULLI_CAP};
use crate::error::{Error, Result};
use crate::harmonic::{nu_p_harmonic, pw, valuation_stream, EXACT_MODE_BOUND};
use crate::modular::{batch_invert, batch_invert_u64, split_valuation};
use crate::padic::Valuation;
use crate::primes::{is_prime_u64, primes_in_range};

/// Default number of tower levels measured above the base.
pub const DEFAULT_TOWER_LEVELS: u32 = 6;

/// How a Wolstenholme verdict was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Harmonic,
    Bernoulli,
    Both,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Harmonic => "harmonic",
            Method::Bernoulli => "bernoulli",
            Method::Both => "both",
        })
    }
}

/// Outcome of a Wolstenholme test at one prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WolstenholmeResult {
    #[serde(rename = "p")]
    pub prime: u64,
    pub is_wolstenholme: bool,
    /// ν_p(H(p−1)), exact; ≥ 2 for every p ≥ 5 and ≥ 3 exactly for
    /// Wolstenholme primes.
    pub h_p_minus_1_valuation: i64,
    pub method: Method,
}

fn checked_pw_u64(p: u64, k: u32) -> Option<u64> {
    (0..k).try_fold(1u64, |acc, _| acc.checked_mul(p))
}

/// Σ_{i=1}^{p−1} i^{−1} mod p^k, by chunked batch inversion. Equals the
/// projection of H(p−1) because every term is a p-adic unit.
fn inverse_sum_mod(p: u64, k: u32) -> BigUint {
    if let Some(m) = checked_pw_u64(p, k) {
        let mut sum: u64 = 0;
        let mut lo = 1u64;
        while lo < p {
            let hi = lo.saturating_add(1 << 16).min(p);
            let xs: Vec<u64> = (lo..hi).collect();
            let invs = batch_invert_u64(&xs, m).expect("1..p-1 are units mod p^k");
            for v in invs {
                sum = ((sum as u128 + v as u128) % m as u128) as u64;
            }
            lo = hi;
        }
        BigUint::from(sum)
    } else {
        let m = pw(p, k);
        let mut sum = BigUint::zero();
        let mut lo = 1u64;
        while lo < p {
            let hi = lo.saturating_add(4096).min(p);
            let xs: Vec<BigUint> = (lo..hi).map(BigUint::from).collect();
            let invs = batch_invert(&xs, &m).expect("1..p-1 are units mod p^k");
            for v in invs {
                sum += v;
            }
            sum %= &m;
            lo = hi;
        }
        sum
    }
}

/// Exact ν_p(H(p−1)), escalating the modulus from p^3 until the residue
/// shows. Residues are exact projections, so a nonzero one pins the value.
fn h_p_minus_1_valuation(p: u64) -> Result<i64> {
    let mut k = 3u32;
    loop {
        let s = inverse_sum_mod(p, k);
        if !s.is_zero() {
            let (v, _) = split_valuation(&s, p);
            return Ok(v as i64);
        }
        if k >= 8 {
            return Err(Error::Undetermined {
                bound: k as i64,
                ceiling: k,
            });
        }
        k += 1;
    }
}

fn require_odd_prime_ge5(p: u64, context: &'static str) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall { p, min: 5, context });
    }
    Ok(())
}

/// The harmonic criterion alone: does p^3 divide the numerator of H(p−1)?
pub(crate) fn wolstenholme_harmonic_only(p: u64) -> Result<bool> {
    require_odd_prime_ge5(p, "Wolstenholme test")?;
    Ok(inverse_sum_mod(p, 3).is_zero())
}

/// Full Wolstenholme test: harmonic measurement of ν_p(H(p−1)), cross-checked
/// against the Bernoulli criterion whenever the shared table covers B_{p−3}.
/// The two methods agreeing is a hard contract; disagreement aborts.
pub fn wolstenholme_test(p: u64) -> Result<WolstenholmeResult> {
    require_odd_prime_ge5(p, "Wolstenholme test")?;
    let nu = h_p_minus_1_valuation(p)?;
    debug_assert!(nu >= 2, "Wolstenholme's congruence fails at {p}");
    let is_w = nu >= 3;
    let cap = initialized_cap().unwrap_or(DEFAULT_BERNOULLI_CAP);
    let method = if p - 3 <= cap {
        let via_bernoulli = is_wolstenholme_via_bernoulli(p)?;
        assert_eq!(
            via_bernoulli, is_w,
            "harmonic and Bernoulli Wolstenholme tests disagree at p = {p}"
        );
        Method::Both
    } else {
        Method::Harmonic
    };
    Ok(WolstenholmeResult {
        prime: p,
        is_wolstenholme: is_w,
        h_p_minus_1_valuation: nu,
        method,
    })
}

/// Test every prime in `[lo, hi]` across a worker pool. Results come back in
/// ascending prime order regardless of completion order.
pub fn wolstenholme_scan(lo: u64, hi: u64, workers: usize) -> Result<Vec<WolstenholmeResult>> {
    if lo > hi {
        return Err(Error::Domain(format!("empty scan range [{lo}, {hi}]")));
    }
    let primes = primes_in_range(lo.max(5), hi);
    if primes.is_empty() {
        return Ok(Vec::new());
    }
    let workers = workers.max(1).min(primes.len());
    let chunks: Vec<&[u64]> = primes.chunks(256).collect();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Vec<WolstenholmeResult>>>>> =
        Mutex::new((0..chunks.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= chunks.len() {
                    break;
                }
                let out: Result<Vec<_>> =
                    chunks[i].iter().map(|&q| wolstenholme_test(q)).collect();
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });

    let mut merged = Vec::with_capacity(primes.len());
    for slot in slots.into_inner().unwrap() {
        merged.extend(slot.expect("every chunk was claimed by a worker")?);
    }
    Ok(merged)
}

/// Tower pattern families; see the module docs for what each label means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerClass {
    Descent,
    Thm26Case1,
    Thm26Case2Prefix,
    Thm26Case3,
    Thm27Case1,
    Thm27Case2Prefix,
    Thm27Case3,
    Violation,
}

impl TowerClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TowerClass::Descent => "Descent",
            TowerClass::Thm26Case1 => "Thm2.6-case1",
            TowerClass::Thm26Case2Prefix => "Thm2.6-case2(prefix)",
            TowerClass::Thm26Case3 => "Thm2.6-case3",
            TowerClass::Thm27Case1 => "Thm2.7-case1",
            TowerClass::Thm27Case2Prefix => "Thm2.7-case2(prefix)",
            TowerClass::Thm27Case3 => "Thm2.7-case3",
            TowerClass::Violation => "Violation",
        }
    }
}

impl std::fmt::Display for TowerClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TowerClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Measured tower ν_p(H(p^m·n)) for m = 0..=m_max with its classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternReport {
    #[serde(rename = "p")]
    pub prime: u64,
    #[serde(rename = "n", serialize_with = "crate::ser::biguint_string")]
    pub base_n: BigUint,
    pub tower: Vec<i64>,
    pub base_valuation: i64,
    pub classification: TowerClass,
    /// The level where the descending tail crosses zero (tail ν = M − m),
    /// present for the case-3 families.
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// First measured level on the descending tail, present for case 3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_index: Option<u32>,
}

fn classify_vector(t: &[i64], wolstenholme: bool) -> (TowerClass, Option<u32>, Option<u32>) {
    let none = (TowerClass::Violation, None, None);
    let base = t[0];
    let descent_from = |start: usize, v0: i64| {
        t.iter()
            .enumerate()
            .skip(start)
            .all(|(m, &v)| v == v0 - (m - start) as i64)
    };

    if base <= 2 {
        return if descent_from(0, base) {
            (TowerClass::Descent, None, None)
        } else {
            none
        };
    }

    // base ≥ 3 splits by Wolstenholme-ness and then by base = 3 vs base ≥ 4
    let drop_then_descend = descent_from(1, 2);
    if !wolstenholme {
        if base == 3 {
            if t.iter().enumerate().all(|(m, &v)| v == 2 * m as i64 + 3) {
                return (TowerClass::Thm26Case2Prefix, None, None);
            }
            let s = t
                .iter()
                .enumerate()
                .position(|(m, &v)| v != 2 * m as i64 + 3)
                .expect("not all levels matched");
            let m_zero = t[s] + s as i64;
            if m_zero >= s as i64 && descent_from(s, t[s]) {
                return (TowerClass::Thm26Case3, Some(m_zero as u32), Some(s as u32));
            }
            none
        } else if drop_then_descend {
            (TowerClass::Thm26Case1, None, None)
        } else {
            none
        }
    } else if base == 3 {
        if drop_then_descend {
            (TowerClass::Thm27Case1, None, None)
        } else {
            none
        }
    } else {
        if t.iter().enumerate().all(|(m, &v)| v >= 2 * m as i64 + 4) {
            return (TowerClass::Thm27Case2Prefix, None, None);
        }
        let s = t
            .iter()
            .enumerate()
            .position(|(m, &v)| v < 2 * m as i64 + 4)
            .expect("not all levels matched");
        let m_zero = t[s] + s as i64;
        if m_zero >= s as i64 && descent_from(s, t[s]) {
            return (TowerClass::Thm27Case3, Some(m_zero as u32), Some(s as u32));
        }
        none
    }
}

/// Measure the tower ν_p(H(p^m·n)) for m = 0..=m_max with the digit
/// evaluator and classify it. Requires p ≥ 5, n ≥ 1 coprime to p, and
/// m_max ≥ 1. An undetermined valuation anywhere withholds classification by
/// propagating the error.
pub fn classify_tower(p: u64, n: &BigUint, m_max: u32) -> Result<PatternReport> {
    require_odd_prime_ge5(p, "tower classification")?;
    if n.is_zero() {
        return Err(Error::Domain("tower base n must be positive".into()));
    }
    if (n % p).is_zero() {
        return Err(Error::Domain(format!(
            "tower base n must be coprime to p = {p}"
        )));
    }
    if m_max == 0 {
        return Err(Error::Domain(
            "tower classification needs at least one level above the base".into(),
        ));
    }

    let mut tower = Vec::with_capacity(m_max as usize + 1);
    let mut arg = n.clone();
    for _ in 0..=m_max {
        match nu_p_harmonic(&arg, p)? {
            Valuation::Finite(v) => tower.push(v),
            Valuation::Infinite => unreachable!("H vanishes only at 0"),
        }
        arg *= p;
    }

    let wolst = wolstenholme_test(p)?.is_wolstenholme;
    let (classification, m, switch_index) = classify_vector(&tower, wolst);
    let base_valuation = tower[0];
    Ok(PatternReport {
        prime: p,
        base_n: n.clone(),
        tower,
        base_valuation,
        classification,
        m,
        switch_index,
    })
}

/// Exact table of ν_p(H(pm + k)) for m = 0..m_rows, k = 0..p−1, computed by
/// the streaming exact representation. Entry (0,0) is +infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationTable {
    pub prime: u64,
    /// `entries[m][k]` = ν_p(H(pm + k))
    pub entries: Vec<Vec<Valuation>>,
}

impl ValuationTable {
    pub fn entry(&self, m: usize, k: usize) -> Valuation {
        self.entries[m][k]
    }

    /// CSV with a header row `m,k=0,...`; +infinity renders as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m");
        for k in 0..self.prime {
            out.push_str(&format!(",k={k}"));
        }
        out.push('\n');
        for (m, row) in self.entries.iter().enumerate() {
            out.push_str(&m.to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Generate the table by exact streaming; every entry is an exact valuation.
pub fn table_generate(p: u64, m_rows: u32) -> Result<ValuationTable> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if m_rows == 0 {
        return Err(Error::Domain("the table needs at least one row".into()));
    }
    let n_max_wide = p as u128 * m_rows as u128 - 1;
    if n_max_wide > EXACT_MODE_BOUND as u128 {
        return Err(Error::ExactBoundExceeded {
            n: BigUint::from(n_max_wide),
            bound: EXACT_MODE_BOUND,
        });
    }
    let n_max = n_max_wide as u64;

    let mut entries: Vec<Vec<Valuation>> = Vec::with_capacity(m_rows as usize);
    let mut first = Vec::with_capacity(p as usize);
    first.push(Valuation::Infinite);
    entries.push(first);
    for (n, v) in valuation_stream(p, n_max)? {
        let m = (n / p) as usize;
        if entries.len() == m {
            entries.push(Vec::with_capacity(p as usize));
        }
        entries[m].push(v);
    }
    debug_assert_eq!(entries.len(), m_rows as usize);
    debug_assert!(entries.iter().all(|r| r.len() == p as usize));
    Ok(ValuationTable { prime: p, entries })
}
