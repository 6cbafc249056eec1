//! The fibered bound `FIB(S)` via assignment functions with standard-set
//! witnesses, analytic lower-bound rules, the exact minimum `MIN(S)` by
//! branch-and-bound, and an independent brute-force oracle.

use crate::cyclotomic::{as_prime_power, divides, ExponentProfile, ScaleSet};
use crate::error::{Error, Result};
use crate::multiset::{Multiset, NonnegMultiset};
use crate::structure::is_fibered;
use crate::zmod::CyclicModulus;
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::AtomicU64;

/// A choice, per scale, of one prime direction dividing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentFunction {
    choices: BTreeMap<u64, usize>,
}

impl AssignmentFunction {
    pub fn direction(&self, s: u64) -> Option<usize> {
        self.choices.get(&s).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.choices.iter().map(|(&s, &i)| (s, i))
    }

    pub fn to_json(&self, m: &CyclicModulus) -> serde_json::Value {
        let map: BTreeMap<String, u64> = self
            .choices
            .iter()
            .map(|(&s, &i)| (s.to_string(), m.prime(i)))
            .collect();
        json!(map)
    }
}

/// `EXP_i(S)`: exponents `alpha >= 1` with `p_i^alpha || s` for some `s in S`.
pub fn exp_profile(set: &ScaleSet) -> ExponentProfile {
    let m = set.modulus();
    let mut exponents = vec![BTreeSet::new(); m.num_primes()];
    for s in set.scales() {
        for (i, exp) in exponents.iter_mut().enumerate() {
            let v = m.valuation(s, i);
            if v > 0 {
                exp.insert(v);
            }
        }
    }
    ExponentProfile { exponents }
}

/// `EXP_i(S, sigma)`: only scales assigned to direction `i` contribute.
pub fn exp_profile_sigma(set: &ScaleSet, sigma: &AssignmentFunction) -> ExponentProfile {
    let m = set.modulus();
    let mut exponents = vec![BTreeSet::new(); m.num_primes()];
    for s in set.scales() {
        if let Some(i) = sigma.direction(s) {
            let v = m.valuation(s, i);
            if v > 0 {
                exponents[i].insert(v);
            }
        }
    }
    ExponentProfile { exponents }
}

fn fib_of_profile(m: &CyclicModulus, profile: &ExponentProfile) -> u64 {
    profile
        .exponents
        .iter()
        .enumerate()
        .map(|(i, e)| m.prime(i).pow(e.len() as u32))
        .product()
}

/// Enumerate assignment functions and minimize `prod p_i^{E_i(S, sigma)}`.
/// Returns the value, the minimizing assignment (first in enumeration
/// order) and its exponent profile.
fn fib_value(set: &ScaleSet) -> Result<(u64, AssignmentFunction, ExponentProfile)> {
    let m = set.modulus();
    let scales: Vec<u64> = set.scales().collect();
    let options: Vec<Vec<usize>> = scales
        .iter()
        .map(|&s| {
            (0..m.num_primes())
                .filter(|&i| s % m.prime(i) == 0)
                .collect()
        })
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return Err(Error::Malformed("scale with no prime divisor".into()));
    }
    let total: u64 = options.iter().map(|o| o.len() as u64).product();
    if total > 4_000_000 {
        return Err(Error::CapExceeded(format!(
            "{total} assignment functions to enumerate"
        )));
    }
    let mut pick = vec![0usize; scales.len()];
    let mut best: Option<(u64, AssignmentFunction, ExponentProfile)> = None;
    loop {
        let sigma = AssignmentFunction {
            choices: scales
                .iter()
                .zip(pick.iter())
                .map(|(&s, &c)| (s, options_at(&options, &scales, s, c)))
                .collect(),
        };
        let profile = exp_profile_sigma(set, &sigma);
        let value = fib_of_profile(m, &profile);
        if best.as_ref().map_or(true, |(bv, _, _)| value < *bv) {
            best = Some((value, sigma, profile));
        }
        // odometer
        let mut i = 0;
        loop {
            if i == pick.len() {
                let (v, s, p) = best.expect("at least one assignment");
                return Ok((v, s, p));
            }
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn options_at(options: &[Vec<usize>], scales: &[u64], s: u64, c: usize) -> usize {
    let idx = scales.iter().position(|&x| x == s).unwrap();
    options[idx][c]
}

/// The standard set: convolution of one fiber factor per kept exponent,
/// `prod_i prod_{alpha in exps[i]} Phi_{p_i}(X^{M_i p_i^{alpha-1}})`.
pub fn standard_set(m: &CyclicModulus, exps: &[BTreeSet<u32>]) -> Result<NonnegMultiset> {
    let mut a = Multiset::from_set(m.clone(), [0u64])?;
    for (i, exp) in exps.iter().enumerate() {
        for &alpha in exp {
            let step = (m.cofactor(i) as u128 * (m.prime(i) as u128).pow(alpha - 1))
                % m.value() as u128;
            let fiber = Multiset::from_set(
                m.clone(),
                (0..m.prime(i)).map(|v| ((v as u128 * step) % m.value() as u128) as u64),
            )?;
            a = a.convolve(&fiber)?;
        }
    }
    NonnegMultiset::new(a)
}

/// Result of the fibered-bound computation.
#[derive(Debug, Clone)]
pub struct FibResult {
    pub value: u64,
    pub sigma: AssignmentFunction,
    pub witness: NonnegMultiset,
}

/// `FIB(S) = min_sigma prod p_i^{E_i(S, sigma)}`, with a standard-set
/// witness whose mass, divisors and fibering are machine-verified.
pub fn fib(set: &ScaleSet) -> Result<FibResult> {
    let m = set.modulus();
    let (value, sigma, profile) = fib_value(set)?;
    let witness = standard_set(m, &profile.exponents)?;
    if witness.mass() != value as i64 {
        return Err(Error::Precondition(
            "internal: standard set mass does not match the fibered bound".into(),
        ));
    }
    for s in set.scales() {
        if !divides(s, &witness)? {
            return Err(Error::Precondition(format!(
                "internal: standard set misses the divisor at scale {s}"
            )));
        }
        let dir = sigma.direction(s).expect("assignment covers S");
        if !is_fibered(&witness, s, dir)? {
            return Err(Error::Precondition(format!(
                "internal: standard set not fibered on scale {s}"
            )));
        }
    }
    Ok(FibResult {
        value,
        sigma,
        witness,
    })
}

/// One analytic lower-bound rule with its applicability certificate.
#[derive(Debug, Clone)]
pub struct BoundRule {
    pub name: &'static str,
    pub applicable: bool,
    pub value: u64,
    pub detail: String,
}

/// Report of all analytic rules; `combined` is the best applicable value.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub rules: Vec<BoundRule>,
    pub combined: u64,
}

impl BoundReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "combined": self.combined,
            "rules": self.rules.iter().map(|r| json!({
                "rule": r.name,
                "applicable": r.applicable,
                "value": if r.applicable { json!(r.value) } else { json!(null) },
                "detail": r.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

fn min_prime(m: &CyclicModulus, s: u64) -> u64 {
    (0..m.num_primes())
        .map(|i| m.prime(i))
        .filter(|&p| s % p == 0)
        .min()
        .expect("s > 1 has a prime divisor")
}

/// Product of `Phi_{p^alpha}(1) = p` over the prime-power scales of `S`;
/// this always divides the mass of any feasible multiset.
pub fn forced_mass_divisor(set: &ScaleSet) -> u64 {
    set.scales()
        .filter_map(as_prime_power)
        .map(|(p, _)| p)
        .product::<u64>()
        .max(1)
}

/// Machine-verified lower-bound rules. Every reported value is a valid
/// lower bound for `MIN(S)` whenever its hypotheses (checked here) hold.
pub fn analytic_lower_bounds(set: &ScaleSet) -> Result<BoundReport> {
    let m = set.modulus();
    let scales: Vec<u64> = set.scales().collect();
    let mut rules = Vec::new();

    // Lam-Leung: each scale forces at least its least prime factor.
    let ll = scales.iter().map(|&s| min_prime(m, s)).max().unwrap();
    rules.push(BoundRule {
        name: "lam-leung",
        applicable: true,
        value: ll,
        detail: format!("max over scales of the least prime factor = {ll}"),
    });

    // Prime-power product: distinct prime-power scales multiply.
    let forced = forced_mass_divisor(set);
    rules.push(BoundRule {
        name: "prime-power-product",
        applicable: forced > 1,
        value: forced,
        detail: format!("product of Phi(1) over prime-power scales = {forced}"),
    });

    // Diagonal chains: s_j | D(s_{j+1}) multiplies least primes.
    {
        let mut best_chain: Option<u64> = None;
        let n = scales.len();
        // best_any[i]: best chain product ending at scales[i] (length >= 1)
        let mut best_any = vec![0u64; n];
        for i in 0..n {
            let d_i = m.grid_step(scales[i])?;
            let mp = min_prime(m, scales[i]);
            best_any[i] = mp;
            for j in 0..n {
                if i != j && d_i % scales[j] == 0 {
                    let cand = best_any[j].saturating_mul(mp);
                    if cand > best_any[i] {
                        best_any[i] = cand;
                    }
                    best_chain = Some(best_chain.unwrap_or(0).max(cand));
                }
            }
        }
        rules.push(BoundRule {
            name: "diagonal-chain",
            applicable: best_chain.is_some(),
            value: best_chain.unwrap_or(0),
            detail: match best_chain {
                Some(v) => format!("best chain product of least primes = {v}"),
                None => "no pair with s | D(s')".into(),
            },
        });
    }

    // Growth condition: p_2 > p_1^{n_1} forces |A| >= p_1^{E_1}.
    {
        let profile = exp_profile(set);
        let applicable =
            m.num_primes() == 1 || m.prime(1) > m.prime(0).pow(m.exponent(0));
        let value = m.prime(0).pow(profile.exponents[0].len() as u32);
        rules.push(BoundRule {
            name: "growth-condition",
            applicable,
            value,
            detail: if applicable {
                format!("separated primes give p_1^E_1 = {value}")
            } else {
                "p_2 <= p_1^{n_1}".into()
            },
        });
    }

    // Two-prime boosts (both exponent orderings, both prime orientations).
    if m.num_primes() == 2 {
        let mut best_hi: Option<u64> = None;
        let mut best_lo: Option<u64> = None;
        for (pi, qi) in [(0usize, 1usize), (1, 0)] {
            let p = m.prime(pi);
            let q = m.prime(qi);
            let p_pows: Vec<u32> = scales
                .iter()
                .filter_map(|&s| as_prime_power(s).filter(|&(pp, _)| pp == p))
                .map(|(_, e)| e)
                .collect();
            let q_pows: Vec<u32> = scales
                .iter()
                .filter_map(|&s| as_prime_power(s).filter(|&(pp, _)| pp == q))
                .map(|(_, e)| e)
                .collect();
            for &s in &scales {
                let alpha = m.valuation(s, pi);
                let beta = m.valuation(s, qi);
                if alpha == 0 || beta == 0 {
                    continue;
                }
                // exponents above alpha with some q^gamma, gamma != beta
                let r_hi = p_pows.iter().filter(|&&e| e > alpha).count() as u32;
                if r_hi >= 1 && q_pows.iter().any(|&g| g != beta) {
                    let v = p.pow(r_hi) * q * p.min(q);
                    best_hi = Some(best_hi.unwrap_or(0).max(v));
                }
                // exponents below alpha with some q^gamma, gamma < beta
                let r_lo = p_pows.iter().filter(|&&e| e < alpha).count() as u32;
                if r_lo >= 1 && q_pows.iter().any(|&g| g < beta) {
                    let v = p.pow(r_lo) * q * p.min(q);
                    best_lo = Some(best_lo.unwrap_or(0).max(v));
                }
            }
        }
        rules.push(BoundRule {
            name: "two-prime-boost",
            applicable: best_hi.is_some(),
            value: best_hi.unwrap_or(0),
            detail: "prime-power block above a mixed scale".into(),
        });
        rules.push(BoundRule {
            name: "two-prime-boost-low",
            applicable: best_lo.is_some(),
            value: best_lo.unwrap_or(0),
            detail: "prime-power block below a mixed scale".into(),
        });
    }

    // Exponent ladder: the downward closure condition makes FIB(S) itself a
    // lower bound.
    if m.num_primes() <= 2 {
        let profile = exp_profile(set);
        let holds = if m.num_primes() == 1 {
            true
        } else {
            let p = m.prime(0);
            let q = m.prime(1);
            let e1: Vec<u32> = profile.exponents[0].iter().copied().collect();
            let e2: Vec<u32> = profile.exponents[1].iter().copied().collect();
            let has = |a: u32, b: u32| -> bool {
                let val = p.pow(a).checked_mul(q.pow(b));
                val.map_or(false, |v| set.contains(v))
            };
            let mut ok = true;
            'outer: for &alpha in &e1 {
                for &alpha_p in &e1 {
                    if alpha_p >= alpha {
                        continue;
                    }
                    for &beta in &e2 {
                        for &beta_p in &e2 {
                            if beta_p >= beta {
                                continue;
                            }
                            if has(alpha, beta) && !has(alpha_p, beta_p)
                                && !has(alpha_p, beta)
                                && !has(alpha, beta_p)
                            {
                                ok = false;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            ok
        };
        let (fv, _, _) = fib_value(set)?;
        rules.push(BoundRule {
            name: "exponent-ladder",
            applicable: holds,
            value: fv,
            detail: if holds {
                format!("ladder condition holds; bound = FIB(S) = {fv}")
            } else {
                "ladder condition fails".into()
            },
        });

        // Two-exponent corollary: |EXP_i(S)| <= 2 for some i.
        let small = profile.exponents.iter().any(|e| e.len() <= 2)
            || m.num_primes() == 1;
        rules.push(BoundRule {
            name: "two-exponents",
            applicable: small,
            value: fv,
            detail: if small {
                format!("some EXP_i has at most 2 elements; bound = FIB(S) = {fv}")
            } else {
                "all exponent sets have 3 or more elements".into()
            },
        });
    }

    // Large-prime strictness: top blocks of both primes plus the scale pq,
    // with p > q^b, force |A| > p^a q^b.
    if m.num_primes() == 2 {
        let mut best: Option<u64> = None;
        for (pi, qi) in [(0usize, 1usize), (1, 0)] {
            let p = m.prime(pi);
            let q = m.prime(qi);
            let n = m.exponent(pi);
            let mm = m.exponent(qi);
            if !set.contains(p * q) {
                continue;
            }
            let run = |prime: u64, top: u32| -> u32 {
                let mut a = 0;
                while a < top && set.contains(prime.pow(top - a)) {
                    a += 1;
                }
                a
            };
            let a_run = run(p, n).min(n.saturating_sub(1));
            let b_run = run(q, mm).min(mm.saturating_sub(1));
            if a_run == 0 || b_run == 0 {
                continue;
            }
            for b in (1..=b_run).rev() {
                if p > q.pow(b) {
                    let v = p.pow(a_run) * q.pow(b) + 1;
                    best = Some(best.unwrap_or(0).max(v));
                    break;
                }
            }
        }
        rules.push(BoundRule {
            name: "large-prime-strict",
            applicable: best.is_some(),
            value: best.unwrap_or(0),
            detail: "strict bound p^a q^b + 1".into(),
        });
    }

    let combined = rules
        .iter()
        .filter(|r| r.applicable)
        .map(|r| r.value)
        .max()
        .unwrap_or(1);
    Ok(BoundReport { rules, combined })
}

/// Options for the exact search.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Largest `lcm(S)` the full search will attempt.
    pub lcm_cap: u64,
    /// Node budget; exceeding it yields a bounded-only outcome.
    pub max_nodes: u64,
    /// Worker threads for the feasibility search (1 = deterministic witness).
    pub workers: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            lcm_cap: 10_000,
            max_nodes: 200_000_000,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum MinOutcome {
    Exact { value: u64, witness: NonnegMultiset },
    /// Cap exceeded: only the bracket [analytic lower bound, FIB] is known.
    Bounded { lower: u64, upper: u64 },
}

/// Full result of a `MIN(S)` computation.
#[derive(Debug, Clone)]
pub struct MinResult {
    pub outcome: MinOutcome,
    pub fib: FibResult,
    pub bounds: BoundReport,
}

/// Exact `MIN(S)`: least mass of a nonnegative multiset over `Z_lcm(S)`
/// divisible by every `Phi_s`, `s in S`. Masses are scanned in ascending
/// multiples of the forced divisor starting from the best analytic bound;
/// the witness is re-verified against every scale before returning.
pub fn min_exact(set: &ScaleSet, opts: &SolveOptions) -> Result<MinResult> {
    let work = ScaleSet::over_lcm(set.scales())?;
    let fib_res = fib(&work)?;
    let bounds = analytic_lower_bounds(&work)?;
    if work.lcm() > opts.lcm_cap {
        return Ok(MinResult {
            outcome: MinOutcome::Bounded {
                lower: bounds.combined,
                upper: fib_res.value,
            },
            fib: fib_res,
            bounds,
        });
    }
    let forced = forced_mass_divisor(&work);
    let lb = bounds.combined.max(forced).max(1);
    let mut mass = lb.div_ceil(forced) * forced;
    let plan = crate::solver::build_plan(&work)?;
    let budget = AtomicU64::new(opts.max_nodes);
    while mass <= fib_res.value {
        match crate::solver::feasible(&plan, mass, &budget, opts.workers) {
            Ok(Some(weights)) => {
                let witness = NonnegMultiset::new(Multiset::from_weights(
                    plan.modulus.clone(),
                    weights
                        .iter()
                        .enumerate()
                        .map(|(x, &w)| (x as u64, w)),
                )?)?;
                for s in work.scales() {
                    if !divides(s, &witness)? {
                        return Err(Error::Precondition(format!(
                            "internal: witness fails the divisor at scale {s}"
                        )));
                    }
                }
                if witness.mass() != mass as i64 {
                    return Err(Error::Precondition("internal: witness mass".into()));
                }
                return Ok(MinResult {
                    outcome: MinOutcome::Exact {
                        value: mass,
                        witness,
                    },
                    fib: fib_res,
                    bounds,
                });
            }
            Ok(None) => {
                mass += forced;
            }
            Err(Error::CapExceeded(_)) => {
                return Ok(MinResult {
                    outcome: MinOutcome::Bounded {
                        lower: mass,
                        upper: fib_res.value,
                    },
                    fib: fib_res,
                    bounds,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Precondition(
        "internal: the fibered witness mass was not reached by the search".into(),
    ))
}

#[derive(Debug, Clone)]
pub enum BruteOutcome {
    Found { value: u64, witness: NonnegMultiset },
    /// Every mass up to the cap is infeasible.
    ExhaustedUpTo(u64),
}

/// Independent oracle: exhaustive stars-and-bars enumeration of nonnegative
/// multisets over `Z_lcm(S)` with weight pinned at 0, checked per scale by
/// incremental cyclotomic remainders. Intended for tiny instances only.
pub fn min_bruteforce(set: &ScaleSet, mass_cap: u64) -> Result<BruteOutcome> {
    let work = ScaleSet::over_lcm(set.scales())?;
    let m_val = work.lcm();
    if m_val > 60 {
        return Err(Error::CapExceeded(format!(
            "brute force restricted to lcm(S) <= 60, got {m_val}"
        )));
    }
    let modulus = CyclicModulus::factor(m_val)?;
    // residue tables: for every scale, the remainder vector of X^r mod Phi_s
    let scales: Vec<u64> = work.scales().collect();
    let mut tables: Vec<Vec<Vec<i64>>> = Vec::new();
    for &s in &scales {
        let phi = crate::cyclotomic::cyclotomic_poly(s)?;
        let deg = phi.len() - 1;
        let mut table = Vec::with_capacity(s as usize);
        for r in 0..s {
            let mut v = vec![0i128; r as usize + 1];
            v[r as usize] = 1;
            let rem = crate::poly::rem_monic(&v, &phi);
            let mut row = vec![0i64; deg];
            for (i, &c) in rem.iter().enumerate() {
                row[i] = c as i64;
            }
            table.push(row);
        }
        tables.push(table);
    }

    struct Bf<'a> {
        m_val: u64,
        scales: &'a [u64],
        tables: &'a [Vec<Vec<i64>>],
        acc: Vec<Vec<i64>>,
        nnz: Vec<usize>,
        placed: Vec<u64>,
    }
    impl<'a> Bf<'a> {
        fn push(&mut self, x: u64) {
            for (k, &s) in self.scales.iter().enumerate() {
                let row = &self.tables[k][(x % s) as usize];
                for (i, &c) in row.iter().enumerate() {
                    if c != 0 {
                        let before = self.acc[k][i];
                        self.acc[k][i] += c;
                        if before == 0 {
                            self.nnz[k] += 1;
                        } else if self.acc[k][i] == 0 {
                            self.nnz[k] -= 1;
                        }
                    }
                }
            }
            self.placed.push(x);
        }
        fn pop(&mut self) {
            let x = self.placed.pop().unwrap();
            for (k, &s) in self.scales.iter().enumerate() {
                let row = &self.tables[k][(x % s) as usize];
                for (i, &c) in row.iter().enumerate() {
                    if c != 0 {
                        let before = self.acc[k][i];
                        self.acc[k][i] -= c;
                        if before == 0 {
                            self.nnz[k] += 1;
                        } else if self.acc[k][i] == 0 {
                            self.nnz[k] -= 1;
                        }
                    }
                }
            }
        }
        fn run(&mut self, from: u64, left: u64) -> bool {
            if left == 0 {
                return self.nnz.iter().all(|&n| n == 0);
            }
            for x in from..self.m_val {
                self.push(x);
                if self.run(x, left - 1) {
                    return true;
                }
                self.pop();
            }
            false
        }
    }

    let mut bf = Bf {
        m_val,
        scales: &scales,
        tables: &tables,
        acc: tables
            .iter()
            .map(|t| vec![0i64; t[0].len()])
            .collect(),
        nnz: vec![0; scales.len()],
        placed: Vec::new(),
    };
    for mass in 1..=mass_cap {
        bf.push(0); // translation pinning
        if bf.run(0, mass - 1) {
            let witness = NonnegMultiset::new(Multiset::from_weights(
                modulus,
                bf.placed.iter().map(|&x| (x, 1i64)),
            )?)?;
            return Ok(BruteOutcome::Found {
                value: mass,
                witness,
            });
        }
        bf.pop();
    }
    Ok(BruteOutcome::ExhaustedUpTo(mass_cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(scales: &[u64]) -> ScaleSet {
        ScaleSet::over_lcm(scales.iter().copied()).unwrap()
    }

    #[test]
    fn exp_profile_examples() {
        let s = set(&[512, 256, 128, 6, 729, 243, 81]);
        let p = exp_profile(&s);
        assert_eq!(
            p.exponents[0].iter().copied().collect::<Vec<_>>(),
            vec![1, 7, 8, 9]
        );
        assert_eq!(
            p.exponents[1].iter().copied().collect::<Vec<_>>(),
            vec![1, 4, 5, 6]
        );

        let s2 = set(&[8]);
        let p2 = exp_profile(&s2);
        assert_eq!(p2.exponents[0].iter().copied().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn exp_profile_truncation_example() {
        // S = {q^2, p^3, q^4, p^3 q^4, p^10, q^10, p^10 q^10}
        let p = 2u64;
        let q = 3u64;
        let m = CyclicModulus::from_factors(vec![(p, 10), (q, 10)]).unwrap();
        let s = ScaleSet::new(
            m,
            [
                q * q,
                p.pow(3),
                q.pow(4),
                p.pow(3) * q.pow(4),
                p.pow(10),
                q.pow(10),
                p.pow(10) * q.pow(10),
            ],
        )
        .unwrap();
        let prof = exp_profile(&s);
        assert_eq!(
            prof.exponents[0].iter().copied().collect::<Vec<_>>(),
            vec![3, 10]
        );
        assert_eq!(
            prof.exponents[1].iter().copied().collect::<Vec<_>>(),
            vec![2, 4, 10]
        );
    }

    #[test]
    fn fib_prime_powers() {
        // S = {p^a1 .. p^am} with distinct exponents: FIB = p^m.
        let s = set(&[2, 4, 8]);
        let f = fib(&s).unwrap();
        assert_eq!(f.value, 8);
        let s3 = set(&[3, 27]);
        assert_eq!(fib(&s3).unwrap().value, 9);
    }

    #[test]
    fn fib_three_prime_example() {
        // S = {p1 p2, p3} with (2,3,5): FIB = min(p1,p2) * p3 = 10.
        let s = set(&[6, 5]);
        let f = fib(&s).unwrap();
        assert_eq!(f.value, 10);
        assert_eq!(f.witness.mass(), 10);
    }

    #[test]
    fn fib_mixed_block() {
        // Enumerating both sigma(6) choices: 2^4 3^3 = 432 vs 2^3 3^4 = 648.
        let s = set(&[512, 256, 128, 6, 729, 243, 81]);
        let f = fib(&s).unwrap();
        assert_eq!(f.value, 432);
        // the winning assignment routes scale 6 to the prime 2
        assert_eq!(f.sigma.direction(6), Some(0));
    }

    #[test]
    fn analytic_rules_examples() {
        // S = {6,5}: Lam-Leung gives 5, diagonal chains inapplicable.
        let s = set(&[6, 5]);
        let rep = analytic_lower_bounds(&s).unwrap();
        assert_eq!(rep.combined, 5);
        let diag = rep.rules.iter().find(|r| r.name == "diagonal-chain").unwrap();
        assert!(!diag.applicable);

        // S = {2,4,8,3,9}: prime-power product 72.
        let s = set(&[2, 4, 8, 3, 9]);
        let rep = analytic_lower_bounds(&s).unwrap();
        let pp = rep
            .rules
            .iter()
            .find(|r| r.name == "prime-power-product")
            .unwrap();
        assert!(pp.applicable);
        assert_eq!(pp.value, 72);

        // Boost pattern with p=2, q=3, r=1: {q^gamma, p^alpha q^beta, p^m}
        // with alpha < m and beta != gamma gives 2*3*2 = 12.
        let s = set(&[3, 2 * 9, 4]);
        let rep = analytic_lower_bounds(&s).unwrap();
        let boost = rep
            .rules
            .iter()
            .find(|r| r.name == "two-prime-boost")
            .unwrap();
        assert!(boost.applicable, "{rep:?}");
        assert_eq!(boost.value, 12);
    }

    #[test]
    fn diagonal_chain_applies() {
        // 6 | D(36) = 6 and 36 | D(216) = 36: chain of three.
        let s = set(&[6, 36, 216]);
        let rep = analytic_lower_bounds(&s).unwrap();
        let diag = rep.rules.iter().find(|r| r.name == "diagonal-chain").unwrap();
        assert!(diag.applicable);
        assert_eq!(diag.value, 8);
    }

    #[test]
    fn min_single_scale() {
        let s = set(&[6]);
        let r = min_exact(&s, &SolveOptions::default()).unwrap();
        match r.outcome {
            MinOutcome::Exact { value, ref witness } => {
                assert_eq!(value, 2);
                assert_eq!(witness.mass(), 2);
            }
            _ => panic!("expected exact"),
        }
    }

    #[test]
    fn min_gap_example() {
        // S = {6, 5}: MIN = 5 < FIB = 10.
        let s = set(&[6, 5]);
        let r = min_exact(&s, &SolveOptions::default()).unwrap();
        match r.outcome {
            MinOutcome::Exact { value, .. } => assert_eq!(value, 5),
            _ => panic!("expected exact"),
        }
        assert_eq!(r.fib.value, 10);
    }

    #[test]
    fn min_prime_power_block() {
        let s = set(&[2, 4, 8]);
        let r = min_exact(&s, &SolveOptions::default()).unwrap();
        match r.outcome {
            MinOutcome::Exact { value, ref witness } => {
                assert_eq!(value, 8);
                assert_eq!(witness.support_len(), 8);
            }
            _ => panic!("expected exact"),
        }
    }

    #[test]
    fn brute_force_matches() {
        for scales in [vec![6u64], vec![6, 5], vec![12, 18], vec![2, 3]] {
            let s = set(&scales);
            let bf = min_bruteforce(&s, 8).unwrap();
            let ex = min_exact(&s, &SolveOptions::default()).unwrap();
            match (bf, ex.outcome) {
                (BruteOutcome::Found { value: v1, .. }, MinOutcome::Exact { value: v2, .. }) => {
                    assert_eq!(v1, v2, "scales {scales:?}")
                }
                (BruteOutcome::ExhaustedUpTo(cap), MinOutcome::Exact { value, .. }) => {
                    assert!(value > cap, "scales {scales:?}")
                }
                other => panic!("unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let s = set(&[6, 5]);
        let seq = min_exact(&s, &SolveOptions::default()).unwrap();
        let par = min_exact(
            &s,
            &SolveOptions {
                workers: 4,
                ..Default::default()
            },
        )
        .unwrap();
        match (seq.outcome, par.outcome) {
            (MinOutcome::Exact { value: a, .. }, MinOutcome::Exact { value: b, .. }) => {
                assert_eq!(a, b)
            }
            _ => panic!("expected exact results"),
        }
    }
}
