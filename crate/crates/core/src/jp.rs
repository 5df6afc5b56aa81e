//! Enumeration of J_p = {n ≥ 1 : ν_p(H(n)) ≥ 1}, by exact scan for small
//! bounds and by breadth-first digit lifting for the full set.
//!
//! Membership only survives down digit-extension chains: writing
//! n = pm + k with 0 ≤ k < p,
//!
//! ```text
//! H(pm + k) = H(m)/p + W(m) + D(m, k)
//! ```
//!
//! where W and D have valuation ≥ 0 (for p ≥ 5, W even has ν ≥ 2). If
//! ν_p(H(m)) ≤ 0 the ultrametric forces ν_p(H(pm + k)) = ν_p(H(m)) − 1 < 0,
//! and inductively every deeper extension stays negative. A breadth-first
//! search that expands only nodes with ν ≥ 1 therefore sees every member of
//! J_p, and an empty frontier is a completeness certificate.
//!
//! Each node carries the scaled residue u = p^{d−1}·H(n) mod p^{Wfix}, where
//! d is the digit count of n and Wfix is fixed for the whole run. Children
//! update u exactly (one W evaluation and one batch inversion per parent), so
//! the valuation read off a nonzero u is exact, never an approximation. Only
//! u ≡ 0 leaves a node's valuation open, and that takes ν_p(H(n)) to exceed
//! the precision budget plus the digit budget at once.

use num::{BigUint, Zero};

use crate::error::{Error, Result};
use crate::harmonic::{
    d_prefix_sums, harmonic_mod_pk, pw, valuation_stream, wpoly_cached, DigitsBaseP,
    DEFAULT_PRECISION_CEILING, EXACT_MODE_BOUND,
};
use crate::modular::split_valuation;
use crate::padic::{PadicApprox, Valuation};
use crate::primes::is_prime_u64;

/// Default digit budget for the lifting search (base-p digits of n).
pub const DEFAULT_LEVEL_CAP: u32 = 40;

/// Default residue precision K; the working modulus is p^(K + level_cap + 2).
pub const DEFAULT_SEARCH_PRECISION: u32 = 96;

/// A valuation this close to the working modulus triggers an independent
/// recomputation of the node before it is trusted.
const RESIDUE_GUARD: u32 = 3;

/// One accepted node of the lifting search.
#[derive(Debug, Clone)]
pub struct SearchNode {
    /// The member itself, as base-p digits.
    pub n: DigitsBaseP,
    /// H(n) with exact valuation, or a certified zero-to-precision bound in
    /// the rare case the residue vanished at the working modulus.
    pub h_approx: PadicApprox,
    /// Digit count of n.
    pub level: u32,
    /// ν_p(H(n)); exact unless `h_approx` is zero-to-precision, in which case
    /// this is the certified lower bound.
    pub valuation: i64,
}

/// How an enumeration run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JpStatus {
    /// The frontier emptied: the member list is all of J_p.
    Complete,
    /// The digit budget ran out with live nodes remaining.
    Truncated { level_cap: u32 },
    /// Some nodes hit the precision ceiling with residue still zero; they are
    /// certified members, but their exact valuations are unknown.
    Undetermined { ambiguous: Vec<BigUint> },
}

impl JpStatus {
    pub fn label(&self) -> &'static str {
        match self {
            JpStatus::Complete => "Complete",
            JpStatus::Truncated { .. } => "Truncated",
            JpStatus::Undetermined { .. } => "Undetermined",
        }
    }
}

impl std::fmt::Display for JpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JpStatus::Complete => write!(f, "Complete"),
            JpStatus::Truncated { level_cap } => write!(f, "Truncated(level_cap={level_cap})"),
            JpStatus::Undetermined { ambiguous } => {
                write!(f, "Undetermined({} ambiguous)", ambiguous.len())
            }
        }
    }
}

/// Result of a J_p enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JpResult {
    pub prime: u64,
    /// Members in increasing order.
    pub members: Vec<BigUint>,
    pub status: JpStatus,
    /// Largest digit count whose candidates were generated.
    pub levels_explored: u32,
    /// Number of nodes expanded, counting the root.
    pub nodes_expanded: u64,
    /// Largest exact valuation observed among members.
    pub max_valuation_seen: i64,
}

/// J_p ∩ [1, bound] by exact streaming arithmetic. Works for every prime,
/// including p = 2 and p = 3, which the lifting search does not cover.
pub fn jp_scan_exact(p: u64, bound: u64) -> Result<Vec<u64>> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if bound > EXACT_MODE_BOUND {
        return Err(Error::ExactBoundExceeded {
            n: BigUint::from(bound),
            bound: EXACT_MODE_BOUND,
        });
    }
    Ok(valuation_stream(p, bound)?
        .filter(|(_, v)| matches!(v, Valuation::Finite(x) if *x >= 1))
        .map(|(n, _)| n)
        .collect())
}

struct Search {
    p: u64,
    wfix: u32,
    modulus: BigUint,
    k_digits: u32,
    ceiling: u32,
    members: Vec<BigUint>,
    ambiguous: Vec<BigUint>,
    max_val: i64,
}

impl Search {
    /// Decide the child from its exact residue u = p^(level−1)·H(value)
    /// mod p^wfix; returns a node iff the child belongs to J_p.
    fn classify(&mut self, value: BigUint, level: u32, u: BigUint) -> Result<Option<SearchNode>> {
        let d = level as i64 - 1;
        if u.is_zero() {
            return self.escalate(value, level);
        }
        let (vu, unit) = split_valuation(&u, self.p);
        let vu = vu as i64;
        let nu = vu - d;
        if nu < 1 {
            return Ok(None);
        }
        if vu > self.wfix as i64 - RESIDUE_GUARD as i64 {
            self.crosscheck(&value, nu)?;
        }
        let approx = PadicApprox {
            prime: self.p,
            valuation: nu,
            unit,
            precision: self.wfix - vu as u32,
            is_zero_to_precision: false,
        };
        Ok(Some(self.accept(value, level, nu, approx)))
    }

    fn accept(&mut self, value: BigUint, level: u32, nu: i64, approx: PadicApprox) -> SearchNode {
        let digits = DigitsBaseP::from_biguint(self.p, &value);
        self.members.push(value);
        self.max_val = self.max_val.max(nu);
        SearchNode {
            n: digits,
            h_approx: approx,
            level,
            valuation: nu,
        }
    }

    /// The residue vanished at the working modulus: recompute the node
    /// independently at escalating precision.
    fn escalate(&mut self, value: BigUint, level: u32) -> Result<Option<SearchNode>> {
        let d = level - 1;
        let digits = DigitsBaseP::from_biguint(self.p, &value);
        // large enough that the result can be folded back into the fixed
        // working modulus without losing exactness
        let floor_k = (self.wfix - d).saturating_sub(2).max(self.k_digits + 1);
        let mut k2 = (2 * self.k_digits).max(floor_k);
        loop {
            let approx = harmonic_mod_pk(&digits, k2)?;
            if !approx.is_zero_to_precision {
                let nu = approx.valuation;
                if nu < 1 {
                    return Ok(None);
                }
                return Ok(Some(self.accept(value, level, nu, approx)));
            }
            if k2 >= self.ceiling {
                // membership is still certain (the certified bound is at
                // least wfix − d ≥ K + 2), but the exact valuation is not
                // known at the ceiling
                let bound = approx.valuation;
                self.ambiguous.push(value.clone());
                self.members.push(value);
                self.max_val = self.max_val.max(bound);
                return Ok(Some(SearchNode {
                    n: digits,
                    h_approx: approx,
                    level,
                    valuation: bound,
                }));
            }
            k2 = k2.saturating_mul(2).min(self.ceiling);
        }
    }

    /// Belt-and-suspenders for residues within the guard band: re-derive the
    /// valuation from scratch and insist it matches.
    fn crosscheck(&self, value: &BigUint, nu: i64) -> Result<()> {
        let digits = DigitsBaseP::from_biguint(self.p, value);
        let k2 = (2 * self.k_digits).max(nu as u32 + 3);
        let again = harmonic_mod_pk(&digits, k2)?;
        assert!(
            !again.is_zero_to_precision && again.valuation == nu,
            "independent recomputation disagrees at n = {value}: {nu} vs {again}"
        );
        Ok(())
    }

    /// p^(level−1)·H(n) mod p^wfix, reconstructed from the node.
    fn u_residue(&self, node: &SearchNode) -> BigUint {
        let d = node.level as i64 - 1;
        let a = &node.h_approx;
        if a.is_zero_to_precision {
            debug_assert!(a.valuation + d >= self.wfix as i64);
            return BigUint::zero();
        }
        let e = a.valuation + d;
        if e >= self.wfix as i64 {
            return BigUint::zero();
        }
        let e = e as u32;
        debug_assert!(a.precision >= self.wfix - e, "node unit too short for the modulus");
        pw(self.p, e) * &a.unit % &self.modulus
    }
}

/// Breadth-first digit-lifting enumeration of J_p with default budgets.
pub fn jp_enumerate(p: u64) -> Result<JpResult> {
    jp_enumerate_with(
        p,
        DEFAULT_LEVEL_CAP,
        DEFAULT_SEARCH_PRECISION,
        DEFAULT_PRECISION_CEILING,
    )
}

/// Breadth-first digit-lifting enumeration of J_p.
///
/// `level_cap` bounds the base-p digit count of candidates, `precision` is
/// the residue precision K (the run works modulo p^(K + level_cap + 2)), and
/// `precision_ceiling` bounds the escalation used when a residue vanishes.
/// Children are generated in increasing digit order, so two runs with the
/// same arguments produce identical results.
pub fn jp_enumerate_with(
    p: u64,
    level_cap: u32,
    precision: u32,
    precision_ceiling: u32,
) -> Result<JpResult> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::PrimeTooSmall {
            p,
            min: 5,
            context: "digit-lifting search (use jp_scan_exact for p = 2 and p = 3)",
        });
    }
    if level_cap == 0 || precision == 0 {
        return Err(Error::Domain(
            "level cap and precision must be positive".into(),
        ));
    }
    let ceiling = precision_ceiling.max(precision);
    let wfix = precision + level_cap + 2;
    let wpoly = wpoly_cached(p, wfix)?;
    let m_modulus = pw(p, wfix + wpoly.vshift());
    let mut search = Search {
        p,
        wfix,
        modulus: pw(p, wfix),
        k_digits: precision,
        ceiling,
        members: Vec::new(),
        ambiguous: Vec::new(),
        max_val: 0,
    };

    // level 1: the root's children are 1..p−1 with H(k) a plain prefix sum
    let mut nodes_expanded: u64 = 1;
    let mut frontier: Vec<SearchNode> = Vec::new();
    let root_prefix = d_prefix_sums(p, &BigUint::zero(), wfix, p - 1);
    for k in 1..p {
        let u = root_prefix[k as usize].clone();
        if let Some(node) = search.classify(BigUint::from(k), 1, u)? {
            frontier.push(node);
        }
    }
    let mut levels_explored = 1;

    while !frontier.is_empty() && levels_explored < level_cap {
        levels_explored += 1;
        let mut next = Vec::new();
        for node in &frontier {
            nodes_expanded += 1;
            let value = node.n.to_biguint();
            let m_mod = &value % &m_modulus;
            let scale = pw(p, node.level);
            let w_term = wpoly.eval(&m_mod) * &scale % &search.modulus;
            let base = (search.u_residue(node) + w_term) % &search.modulus;
            let prefix = d_prefix_sums(p, &m_mod, wfix, p - 1);
            for k in 0..p {
                let u = (&base + &prefix[k as usize] * &scale) % &search.modulus;
                let child = &value * p + k;
                if let Some(accepted) = search.classify(child, levels_explored, u)? {
                    next.push(accepted);
                }
            }
        }
        frontier = next;
    }

    let status = if !search.ambiguous.is_empty() {
        JpStatus::Undetermined {
            ambiguous: search.ambiguous,
        }
    } else if frontier.is_empty() {
        JpStatus::Complete
    } else {
        JpStatus::Truncated { level_cap }
    };
    debug_assert!(search.members.windows(2).all(|w| w[0] < w[1]));
    Ok(JpResult {
        prime: p,
        members: search.members,
        status,
        levels_explored,
        nodes_expanded,
        max_valuation_seen: search.max_val,
    })
}

/// Whether a completed enumeration certifies p as a harmonic prime, meaning
/// J_p is exactly {p−1, p(p−1), p²−1}. Refuses anything short of a
/// completeness certificate.
pub fn certify_result(result: &JpResult) -> Result<bool> {
    if result.status != JpStatus::Complete {
        return Err(Error::NotComplete {
            status: result.status.to_string(),
        });
    }
    let p = result.prime;
    let expected: Vec<BigUint> = [p - 1, p * (p - 1), p * p - 1]
        .into_iter()
        .map(BigUint::from)
        .collect();
    Ok(result.members == expected)
}

/// Run the enumeration with default budgets and certify the outcome.
pub fn certify_harmonic_prime(p: u64) -> Result<bool> {
    certify_result(&jp_enumerate(p)?)
}
