//! Tiling and Coven-Meyerowitz machinery: (T1)/(T2) checks, detection and
//! classification of unsupported divisors, tiling verification, the Sands
//! divisor-set criterion and standard complements.

use crate::bounds::standard_set;
use crate::cyclotomic::{all_divisors, as_prime_power, divides, phi_at_one, ScaleSet};
use crate::error::{Error, Result};
use crate::multiset::NonnegMultiset;
use crate::structure::truncate;
use crate::zmod::{gcd, CyclicModulus};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};

/// Position of an unsupported divisor relative to the prime-power window
/// `[alpha_i, beta_i]` of each prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnsupportedTag {
    /// `gamma_i > beta_i` for every prime of the divisor.
    AboveAllBeta,
    /// `alpha_i < gamma_i < beta_i` for every prime of the divisor.
    Central,
    /// `gamma_i` outside `[alpha_i, beta_i]` for at least one prime.
    Edge,
    Other,
}

impl UnsupportedTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnsupportedTag::AboveAllBeta => "above-all-beta",
            UnsupportedTag::Central => "central",
            UnsupportedTag::Edge => "edge",
            UnsupportedTag::Other => "other",
        }
    }
}

/// Coven-Meyerowitz audit report.
#[derive(Debug, Clone)]
pub struct CmReport {
    /// Prime powers `p^alpha` with `Phi_{p^alpha} | A`.
    pub s_star: Vec<u64>,
    pub t1: bool,
    pub t2: bool,
    /// (T2) products that fail to divide.
    pub t2_failing: Vec<u64>,
    /// Unsupported divisors with their window classification.
    pub unsupported: Vec<(u64, UnsupportedTag)>,
    /// Per prime of M: (min, max) exponent with a prime-power divisor, if any.
    pub extremes: Vec<Option<(u32, u32)>>,
}

impl CmReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "s_star": self.s_star,
            "t1": self.t1,
            "t2": self.t2,
            "t2_failing": self.t2_failing,
            "unsupported": self.unsupported.iter()
                .map(|(s, tag)| json!({"scale": s, "tag": tag.as_str()}))
                .collect::<Vec<_>>(),
            "extremes": self.extremes.iter().map(|e| match e {
                Some((a, b)) => json!([a, b]),
                None => json!(null),
            }).collect::<Vec<_>>(),
        })
    }
}

/// `|A| = prod_{s in S_A^*} Phi_s(1)`.
pub fn t1_check(a: &NonnegMultiset) -> Result<(bool, Vec<u64>)> {
    let s_star = crate::cyclotomic::prime_power_divisors(a)?;
    let mut prod: u128 = 1;
    for &s in &s_star {
        prod *= phi_at_one(s)? as u128;
    }
    Ok((prod == a.mass() as u128, s_star))
}

/// (T2): every product of prime powers from `S_A^*` over distinct primes
/// must divide. Only those products are enumerated, never all of `D(M)`.
pub fn t2_check(a: &NonnegMultiset) -> Result<(bool, Vec<u64>)> {
    let s_star = crate::cyclotomic::prime_power_divisors(a)?;
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &s in &s_star {
        let (p, _) = as_prime_power(s).expect("prime power");
        by_prime.entry(p).or_default().push(s);
    }
    let groups: Vec<&Vec<u64>> = by_prime.values().collect();
    // products over subsets of >= 2 distinct primes
    let mut products = vec![1u64];
    for g in &groups {
        let prev = products.clone();
        for &pp in g.iter() {
            for &q in &prev {
                if let Some(v) = q.checked_mul(pp) {
                    products.push(v);
                }
            }
        }
    }
    let mut failing = Vec::new();
    for &prod in &products {
        if prod == 1 || as_prime_power(prod).is_some() {
            continue;
        }
        if !divides(prod, a.as_multiset())? {
            failing.push(prod);
        }
    }
    failing.sort_unstable();
    failing.dedup();
    Ok((failing.is_empty(), failing))
}

/// Divisors `Phi_s | A` such that (i) every prime of `s` divides `|A|` and
/// (ii) no maximal prime-power component of `s` divides `A`, each tagged by
/// the position of its exponents relative to the prime-power window.
pub fn unsupported_divisors(a: &NonnegMultiset) -> Result<Vec<(u64, UnsupportedTag)>> {
    let m = a.modulus();
    let divisors = all_divisors(a)?;
    let s_star: BTreeSet<u64> = crate::cyclotomic::prime_power_divisors(a)?
        .into_iter()
        .collect();
    // window per prime index
    let mut window: Vec<Option<(u32, u32)>> = vec![None; m.num_primes()];
    for &pp in &s_star {
        let (p, e) = as_prime_power(pp).unwrap();
        let i = m.prime_index(p).unwrap();
        window[i] = Some(match window[i] {
            None => (e, e),
            Some((lo, hi)) => (lo.min(e), hi.max(e)),
        });
    }
    let mass = a.mass() as u64;
    let mut out = Vec::new();
    for &s in &divisors {
        let mut clause_i = true;
        let mut clause_ii = true;
        let mut gammas: Vec<(usize, u32)> = Vec::new();
        for i in 0..m.num_primes() {
            let g = m.valuation(s, i);
            if g == 0 {
                continue;
            }
            gammas.push((i, g));
            if mass % m.prime(i) != 0 {
                clause_i = false;
            }
            if s_star.contains(&m.prime(i).pow(g)) {
                clause_ii = false;
            }
        }
        if !(clause_i && clause_ii) {
            continue;
        }
        // classify
        let above = gammas
            .iter()
            .all(|&(i, g)| window[i].map_or(true, |(_, hi)| g > hi));
        let central = gammas
            .iter()
            .all(|&(i, g)| window[i].map_or(false, |(lo, hi)| lo < g && g < hi));
        let edge = gammas
            .iter()
            .any(|&(i, g)| window[i].map_or(true, |(lo, hi)| g < lo || g > hi));
        let tag = if above {
            UnsupportedTag::AboveAllBeta
        } else if central {
            UnsupportedTag::Central
        } else if edge {
            UnsupportedTag::Edge
        } else {
            UnsupportedTag::Other
        };
        out.push((s, tag));
    }
    Ok(out)
}

/// Full Coven-Meyerowitz audit.
pub fn cm_report(a: &NonnegMultiset) -> Result<CmReport> {
    let (t1, s_star) = t1_check(a)?;
    let (t2, t2_failing) = t2_check(a)?;
    let unsupported = unsupported_divisors(a)?;
    let m = a.modulus();
    let mut extremes = vec![None; m.num_primes()];
    for &pp in &s_star {
        let (p, e) = as_prime_power(pp).unwrap();
        let i = m.prime_index(p).unwrap();
        extremes[i] = Some(match extremes[i] {
            None => (e, e),
            Some((lo, hi)) => (u32::min(lo, e), u32::max(hi, e)),
        });
    }
    Ok(CmReport {
        s_star,
        t1,
        t2,
        t2_failing,
        unsupported,
        extremes,
    })
}

/// `A ⊕ B = Z_M`: masses multiply to `M` and the convolution is the
/// uniform weight-1 multiset.
pub fn tiling_check(a: &NonnegMultiset, b: &NonnegMultiset) -> Result<bool> {
    if a.modulus().value() != b.modulus().value() {
        return Err(Error::ModulusMismatch(
            a.modulus().value(),
            b.modulus().value(),
        ));
    }
    let m = a.modulus().value();
    if (a.mass() as u128) * (b.mass() as u128) != m as u128 {
        return Ok(false);
    }
    let conv = a.convolve(b)?;
    Ok((0..m).all(|x| conv.weight(x) == 1))
}

/// `Div(A) = {(a - a', M)}` for a set `A`.
pub fn divisor_set(a: &NonnegMultiset) -> Result<BTreeSet<u64>> {
    if !a.is_set() {
        return Err(Error::Precondition(
            "divisor sets are defined for sets (weights in {0,1})".into(),
        ));
    }
    let m = a.modulus().value();
    let support: Vec<u64> = a.support().collect();
    if support.len() > 20_000 {
        return Err(Error::CapExceeded(format!(
            "divisor-set enumeration over {} elements",
            support.len()
        )));
    }
    let mut out = BTreeSet::new();
    for (i, &x) in support.iter().enumerate() {
        for &y in support.iter().skip(i) {
            let d = (x + m - y) % m;
            out.insert(gcd(d, m));
        }
    }
    Ok(out)
}

/// Result of a Sands-criterion audit.
#[derive(Debug, Clone)]
pub struct SandsReport {
    pub ok: bool,
    pub intersection: Vec<u64>,
    pub div_a_len: usize,
    pub div_b_len: usize,
}

/// Exact Sands check for materialized sets:
/// `Div(A) ∩ Div(B) = {M}` together with `|A||B| = M` is equivalent to
/// `A ⊕ B = Z_M`.
pub fn sands_check(a: &NonnegMultiset, b: &NonnegMultiset) -> Result<SandsReport> {
    if a.modulus().value() != b.modulus().value() {
        return Err(Error::ModulusMismatch(
            a.modulus().value(),
            b.modulus().value(),
        ));
    }
    let da = divisor_set(a)?;
    let db = divisor_set(b)?;
    let inter: Vec<u64> = da.intersection(&db).copied().collect();
    Ok(SandsReport {
        ok: inter == vec![a.modulus().value()],
        intersection: inter,
        div_a_len: da.len(),
        div_b_len: db.len(),
    })
}

/// For a verified tiling, the prime-power divisor sets partition those of
/// `M` and both `Phi(1)`-product identities hold.
pub fn prime_power_partition_check(a: &NonnegMultiset, b: &NonnegMultiset) -> Result<bool> {
    if !tiling_check(a, b)? {
        return Err(Error::Precondition("not a tiling".into()));
    }
    let sa: BTreeSet<u64> = crate::cyclotomic::prime_power_divisors(a)?
        .into_iter()
        .collect();
    let sb: BTreeSet<u64> = crate::cyclotomic::prime_power_divisors(b)?
        .into_iter()
        .collect();
    if !sa.is_disjoint(&sb) {
        return Ok(false);
    }
    let m = a.modulus();
    let all: BTreeSet<u64> = m
        .divisors()
        .into_iter()
        .filter(|&s| s >= 2 && as_prime_power(s).is_some())
        .collect();
    if sa.union(&sb).copied().collect::<BTreeSet<u64>>() != all {
        return Ok(false);
    }
    let prod = |set: &BTreeSet<u64>| -> Result<u128> {
        let mut p: u128 = 1;
        for &s in set {
            p *= phi_at_one(s)? as u128;
        }
        Ok(p)
    };
    Ok(prod(&sa)? == a.mass() as u128 && prod(&sb)? == b.mass() as u128)
}

/// Truncate `A` relative to `S_A^*`; under (T2) the result must be a
/// constant-weight multiset. Returns the constant.
pub fn t2_truncation_uniformity(a: &NonnegMultiset) -> Result<i64> {
    let (t2, _) = t2_check(a)?;
    if !t2 {
        return Err(Error::Precondition("(T2) does not hold".into()));
    }
    let s_star = crate::cyclotomic::prime_power_divisors(a)?;
    if s_star.is_empty() {
        return Err(Error::Precondition("no prime-power divisors".into()));
    }
    let set = ScaleSet::new(a.modulus().clone(), s_star)?;
    let t = truncate(a, &set)?;
    let mp = t.truncated.modulus().value();
    let w = t.truncated.weight(0);
    for x in 0..mp {
        if t.truncated.weight(x) != w {
            return Err(Error::Precondition(format!(
                "truncation is not constant-weight at {x}"
            )));
        }
    }
    // with an unsupported divisor above every prime-power window, the
    // constant is at least the least prime of M
    let has_top_unsupported = unsupported_divisors(a)?
        .iter()
        .any(|&(_, tag)| tag == UnsupportedTag::AboveAllBeta);
    if has_top_unsupported {
        let minp = a.modulus().prime(0);
        if (w as u64) < minp {
            return Err(Error::Precondition(format!(
                "uniform weight {w} below the least prime {minp}"
            )));
        }
    }
    Ok(w)
}

/// The standard tiling complement determined by a prime-power divisor set:
/// one fiber factor per prime power of `M` **not** in `s_star`.
pub fn standard_complement(s_star: &[u64], m: &CyclicModulus) -> Result<NonnegMultiset> {
    let mut star_exps: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); m.num_primes()];
    for &s in s_star {
        match as_prime_power(s) {
            Some((p, e)) if m.is_divisor(s) => {
                let i = m.prime_index(p).expect("prime of a divisor");
                if e > m.exponent(i) {
                    return Err(Error::Malformed(format!("{s} exceeds the modulus")));
                }
                star_exps[i].insert(e);
            }
            _ => {
                return Err(Error::Malformed(format!(
                    "{s} is not a prime-power divisor of M = {}",
                    m.value()
                )))
            }
        }
    }
    let mut comp_exps: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); m.num_primes()];
    for i in 0..m.num_primes() {
        for e in 1..=m.exponent(i) {
            if !star_exps[i].contains(&e) {
                comp_exps[i].insert(e);
            }
        }
    }
    standard_set(m, &comp_exps)
}
