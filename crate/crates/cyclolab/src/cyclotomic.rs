//! Cyclotomic polynomials and divisibility of mask polynomials.
//!
//! Two independent test methods are provided: exact integer polynomial
//! remainder (the workhorse) and vanishing of all canonical cuboid
//! evaluations (a cross-check, capped by enumeration size). Zero-testing is
//! always exact; nothing here evaluates at floating-point roots of unity.

use crate::error::{Error, Result};
use crate::multiset::{CuboidSpec, Multiset};
use crate::poly;
use crate::zmod::CyclicModulus;
use once_cell::sync::Lazy;
use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

/// Hard cap on `N * prod (p_j - 1)` for the cuboid method.
pub const CUBOID_ENUMERATION_CAP: u64 = 10_000_000;

static CYCLO_CACHE: Lazy<Mutex<HashMap<u64, Vec<i128>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn radical(s: u64) -> Result<(u64, Vec<u64>)> {
    let m = CyclicModulus::factor(s)?;
    let primes: Vec<u64> = m.factors().iter().map(|&(p, _)| p).collect();
    Ok((primes.iter().product(), primes))
}

fn cyclotomic_of_squarefree(rad: u64, primes: &[u64]) -> Vec<i128> {
    if let Some(v) = CYCLO_CACHE.lock().unwrap().get(&rad) {
        return v.clone();
    }
    // Peel the largest prime: Phi_{pr}(X) = Phi_r(X^p) / Phi_r(X) for p
    // coprime to r, with Phi_p = 1 + X + ... + X^{p-1} as the base case.
    let p = *primes.last().expect("nonempty factorization") as usize;
    let out = if primes.len() == 1 {
        vec![1i128; p]
    } else {
        let rest = cyclotomic_of_squarefree(rad / p as u64, &primes[..primes.len() - 1]);
        let mut stretched = vec![0i128; (rest.len() - 1) * p + 1];
        for (i, &c) in rest.iter().enumerate() {
            stretched[i * p] = c;
        }
        poly::div_exact_monic(&stretched, &rest).expect("cyclotomic identity divides exactly")
    };
    CYCLO_CACHE.lock().unwrap().insert(rad, out.clone());
    out
}

/// Coefficients of `Phi_s`, ascending degree. Uses the identity
/// `Phi_s(X) = Phi_{rad(s)}(X^{s/rad(s)})` with `Phi_{rad}` obtained by
/// iterated exact division of `X^rad - 1`.
pub fn cyclotomic_poly(s: u64) -> Result<Vec<i128>> {
    if s == 0 {
        return Err(Error::Malformed("Phi_0 undefined".into()));
    }
    if s == 1 {
        return Ok(vec![-1, 1]);
    }
    let (rad, primes) = radical(s)?;
    let base = cyclotomic_of_squarefree(rad, &primes);
    let stretch = (s / rad) as usize;
    if stretch == 1 {
        return Ok(base);
    }
    let mut out = vec![0i128; (base.len() - 1) * stretch + 1];
    for (i, &c) in base.iter().enumerate() {
        out[i * stretch] = c;
    }
    Ok(out)
}

/// Sparse form of `Phi_s` as (exponent, coefficient) pairs, ascending.
pub fn cyclotomic_sparse(s: u64) -> Result<Vec<(usize, i128)>> {
    let (rad, primes) = radical(s)?;
    let base = cyclotomic_of_squarefree(rad, &primes);
    let stretch = (s / rad) as usize;
    Ok(base
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != 0)
        .map(|(e, &c)| (e * stretch, c))
        .collect())
}

/// `Phi_s(1)`: `p` when `s = p^alpha`, else 1 (for `s > 1`).
pub fn phi_at_one(s: u64) -> Result<u64> {
    if s <= 1 {
        return Err(Error::Malformed("phi_at_one needs s > 1".into()));
    }
    let m = CyclicModulus::factor(s)?;
    Ok(if m.num_primes() == 1 { m.prime(0) } else { 1 })
}

/// `Some((p, alpha))` when `s = p^alpha` with `alpha >= 1`.
pub fn as_prime_power(s: u64) -> Option<(u64, u32)> {
    if s < 2 {
        return None;
    }
    let m = CyclicModulus::factor(s).ok()?;
    (m.num_primes() == 1).then(|| m.factors()[0])
}

fn check_scale(a: &Multiset, s: u64) -> Result<()> {
    if s < 2 || !a.modulus().is_divisor(s) {
        return Err(Error::InvalidScale {
            scale: s,
            reason: format!("not a divisor >= 2 of M = {}", a.modulus().value()),
        });
    }
    Ok(())
}

/// Exact test `Phi_s | A(X)` by integer polynomial remainder of `A mod s`.
///
/// Prime powers take a sparse path: `Phi_{p^a} | A` iff the reduction mod
/// `p^a` is invariant under translation by `p^{a-1}`.
pub fn divides(s: u64, a: &Multiset) -> Result<bool> {
    check_scale(a, s)?;
    if let Some((p, alpha)) = as_prime_power(s) {
        let red = a.reduce_mod(s)?;
        let step = p.pow(alpha - 1);
        for (x, w) in red.iter() {
            if red.weight((x + step) % s) != w {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    // Composite s: with t = s/rad(s) and Y = X^t, the ring Z[X]/(X^s - 1)
    // is a free module over Z[Y]/(Y^rad - 1) with basis X^a, a < t, and
    // Phi_s(X) = Phi_rad(Y). Divisibility therefore splits into one small
    // remainder test per occupied basis residue.
    let red = a.reduce_mod(s)?;
    let (rad, primes) = radical(s)?;
    let t = s / rad;
    let phi_rad = cyclotomic_of_squarefree(rad, &primes);
    let mut buckets: HashMap<u64, Vec<i128>> = HashMap::new();
    for (x, w) in red.iter() {
        let res = x % t;
        let b = (x / t) as usize;
        buckets.entry(res).or_insert_with(|| vec![0i128; rad as usize])[b] += w as i128;
    }
    for f in buckets.values() {
        if !poly::rem_monic(f, &phi_rad).is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Canonical s-cuboids: all `(corner, offsets)` pairs, deduplicated by the
/// sign-normalized vertex multiset. For `Z_6` this yields exactly 3 cuboids.
pub fn canonical_cuboids(scale: u64) -> Result<Vec<CuboidSpec>> {
    let m = CyclicModulus::factor(scale)?;
    let work: u64 = m
        .factors()
        .iter()
        .map(|&(p, _)| p - 1)
        .product::<u64>()
        .saturating_mul(scale);
    if work > CUBOID_ENUMERATION_CAP {
        return Err(Error::UseRemainderMethod);
    }
    let mut seen: BTreeSet<Vec<(u64, i64)>> = BTreeSet::new();
    let mut out = Vec::new();
    let k = m.num_primes();
    let mut offsets = vec![1u64; k];
    loop {
        for corner in 0..scale {
            let spec = CuboidSpec::new(scale, corner, offsets.clone(), None)?;
            let mut vw: Vec<(u64, i64)> = spec.vertex_weights()?.into_iter().collect();
            if let Some(&(_, w0)) = vw.first() {
                if w0 < 0 {
                    for e in vw.iter_mut() {
                        e.1 = -e.1;
                    }
                }
            }
            if seen.insert(vw) {
                out.push(spec);
            }
        }
        // next offset vector, odometer style
        let mut j = 0;
        loop {
            if j == k {
                return Ok(out);
            }
            offsets[j] += 1;
            if offsets[j] < m.prime(j) {
                break;
            }
            offsets[j] = 1;
            j += 1;
        }
    }
}

/// Cuboid-based divisibility test: `Phi_s | A` iff every canonical s-cuboid
/// evaluation vanishes. Must agree with [`divides`] wherever both run.
pub fn divides_via_cuboids(s: u64, a: &Multiset) -> Result<bool> {
    check_scale(a, s)?;
    let red = a.reduce_mod(s)?;
    for spec in canonical_cuboids(s)? {
        if red.delta_eval(&spec)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All `s in D(M)` with `Phi_s | A`, ascending. Errors on the zero multiset.
pub fn all_divisors(a: &Multiset) -> Result<Vec<u64>> {
    if a.is_zero() {
        return Err(Error::ZeroMultiset);
    }
    let mut out = Vec::new();
    for s in a.modulus().divisors() {
        if s >= 2 && divides(s, a)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// `S_A^*`: the prime powers `p^alpha` with `Phi_{p^alpha} | A`.
pub fn prime_power_divisors(a: &Multiset) -> Result<Vec<u64>> {
    if a.is_zero() {
        return Err(Error::ZeroMultiset);
    }
    let mut out = Vec::new();
    for s in a.modulus().divisors() {
        if s >= 2 && as_prime_power(s).is_some() && divides(s, a)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// `Phi_{N/p^beta} | A` for all `0 <= beta <= alpha`, where `p^alpha || N`.
/// Scales that collapse to 1 are trivially satisfied.
pub fn chain_divides(a: &Multiset, n: u64, p: u64, alpha: u32) -> Result<bool> {
    check_scale(a, n)?;
    if n % p != 0 {
        return Err(Error::InvalidScale {
            scale: n,
            reason: format!("prime {p} does not divide the scale"),
        });
    }
    let mut v = 0u32;
    let mut t = n;
    while t % p == 0 {
        t /= p;
        v += 1;
    }
    if v != alpha {
        return Err(Error::Precondition(format!(
            "p^alpha must exactly divide N: got alpha = {alpha}, valuation = {v}"
        )));
    }
    let mut scale = n;
    for _ in 0..=alpha {
        if scale >= 2 && !divides(scale, a)? {
            return Ok(false);
        }
        scale /= p;
    }
    Ok(true)
}

/// A nonempty set of scales `S ⊆ D(M)` (divisors of M, excluding 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleSet {
    modulus: CyclicModulus,
    scales: BTreeSet<u64>,
}

impl ScaleSet {
    pub fn new<I: IntoIterator<Item = u64>>(modulus: CyclicModulus, scales: I) -> Result<Self> {
        let scales: BTreeSet<u64> = scales.into_iter().collect();
        if scales.is_empty() {
            return Err(Error::Malformed("scale set must be nonempty".into()));
        }
        for &s in &scales {
            if s < 2 || !modulus.is_divisor(s) {
                return Err(Error::InvalidScale {
                    scale: s,
                    reason: format!("not a divisor >= 2 of M = {}", modulus.value()),
                });
            }
        }
        Ok(ScaleSet { modulus, scales })
    }

    /// Build over `M = lcm(S)`.
    pub fn over_lcm<I: IntoIterator<Item = u64>>(scales: I) -> Result<Self> {
        let scales: Vec<u64> = scales.into_iter().collect();
        if scales.is_empty() {
            return Err(Error::Malformed("scale set must be nonempty".into()));
        }
        let mut l: u64 = 1;
        for &s in &scales {
            if s < 2 {
                return Err(Error::InvalidScale {
                    scale: s,
                    reason: "scales must be >= 2".into(),
                });
            }
            let g = crate::zmod::gcd(l, s);
            l = l
                .checked_mul(s / g)
                .ok_or_else(|| Error::CapExceeded("lcm(S) overflows u64".into()))?;
        }
        Self::new(CyclicModulus::factor(l)?, scales)
    }

    pub fn modulus(&self) -> &CyclicModulus {
        &self.modulus
    }

    pub fn scales(&self) -> impl Iterator<Item = u64> + '_ {
        self.scales.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn contains(&self, s: u64) -> bool {
        self.scales.contains(&s)
    }

    pub fn lcm(&self) -> u64 {
        let mut l = 1u64;
        for &s in &self.scales {
            l = l / crate::zmod::gcd(l, s) * s;
        }
        l
    }
}

/// Per-prime exponent sets `EXP_i(S)` (exponent 0 never stored).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExponentProfile {
    /// One sorted exponent set per prime of the ambient modulus.
    pub exponents: Vec<BTreeSet<u32>>,
}

impl ExponentProfile {
    pub fn cardinality(&self, i: usize) -> usize {
        self.exponents[i].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::FiberSpec;

    fn ms(m: u64, xs: &[u64]) -> Multiset {
        Multiset::from_set(CyclicModulus::factor(m).unwrap(), xs.iter().copied()).unwrap()
    }

    #[test]
    fn phi_of_primes_and_prime_powers() {
        assert_eq!(cyclotomic_poly(5).unwrap(), vec![1, 1, 1, 1, 1]);
        // Phi_{p^a}(X) = Phi_p(X^{p^{a-1}})
        assert_eq!(cyclotomic_poly(4).unwrap(), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(9).unwrap(), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(6).unwrap(), vec![1, -1, 1]);
    }

    #[test]
    fn product_of_phis_is_xn_minus_one() {
        for n in [1u64, 2, 6, 12, 30, 36, 105, 210] {
            let mut prod = vec![1i128];
            let m = CyclicModulus::factor(n.max(2)).unwrap();
            let mut divs = if n == 1 { vec![1] } else { m.divisors() };
            if n == 1 {
                divs = vec![1];
            }
            for d in divs {
                if n % d == 0 {
                    prod = poly::mul(&prod, &cyclotomic_poly(d).unwrap());
                }
            }
            assert_eq!(prod, poly::x_pow_minus_one(n as usize), "n = {n}");
        }
    }

    #[test]
    fn phi_at_one_values() {
        assert_eq!(phi_at_one(8).unwrap(), 2);
        assert_eq!(phi_at_one(9).unwrap(), 3);
        assert_eq!(phi_at_one(6).unwrap(), 1);
        assert_eq!(phi_at_one(36).unwrap(), 1);
    }

    #[test]
    fn divides_fiber_cases() {
        // A = F^12_2 = {0, 6}: Phi_s | A iff 4 | s | 12.
        let a = ms(12, &[0, 6]);
        assert!(divides(4, &a).unwrap());
        assert!(divides(12, &a).unwrap());
        assert!(!divides(6, &a).unwrap());
        assert!(!divides(3, &a).unwrap());
        assert!(!divides(2, &a).unwrap());
        assert!(divides(5, &a).is_err());
    }

    #[test]
    fn divides_uniform_everything() {
        let m = CyclicModulus::factor(36).unwrap();
        let u = Multiset::uniform(m.clone(), 1).unwrap();
        for s in m.divisors() {
            if s >= 2 {
                assert!(divides(s, &u).unwrap());
            }
        }
    }

    #[test]
    fn all_divisors_examples() {
        let a = ms(12, &[0, 6]);
        assert_eq!(all_divisors(&a).unwrap(), vec![4, 12]);
        assert_eq!(prime_power_divisors(&a).unwrap(), vec![4]);

        // {0..7} in Z_8 has every prime power divisor of 8.
        let b = ms(8, &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(prime_power_divisors(&b).unwrap(), vec![2, 4, 8]);
    }

    #[test]
    fn canonical_cuboids_z6_count() {
        assert_eq!(canonical_cuboids(6).unwrap().len(), 3);
    }

    #[test]
    fn cuboid_method_agrees_small() {
        let a = ms(6, &[0]);
        assert!(!divides_via_cuboids(6, &a).unwrap());
        let u = Multiset::uniform(CyclicModulus::factor(6).unwrap(), 1).unwrap();
        assert!(divides_via_cuboids(6, &u).unwrap());
    }

    #[test]
    fn chain_divides_examples() {
        // F^12_2 = {0,6}: at N = 12, p = 2, alpha = 2 the chain needs Phi_3,
        // which fails.
        let a = ms(12, &[0, 6]);
        assert!(!chain_divides(&a, 12, 2, 2).unwrap());
        let m = CyclicModulus::factor(12).unwrap();
        let u = Multiset::uniform(m, 1).unwrap();
        assert!(chain_divides(&u, 12, 2, 2).unwrap());
        assert!(chain_divides(&u, 12, 3, 1).unwrap());
        assert!(chain_divides(&u, 4, 2, 2).unwrap());
        assert!(chain_divides(&a, 12, 5, 1).is_err());
    }

    #[test]
    fn long_fiber_divisor_window() {
        // Phi_L | F_{i,alpha} iff p_i^{n_i - alpha + 1} | L | M.
        let m = CyclicModulus::factor(8 * 3).unwrap();
        let lf = crate::zmod::LongFiberSpec::new(&m, 0, 2, 5).unwrap();
        let a = Multiset::from_set(m.clone(), lf.elements(&m)).unwrap();
        for s in m.divisors() {
            if s < 2 {
                continue;
            }
            let expect = s % 4 == 0; // 2^{3-2+1} = 4 divides s
            assert_eq!(divides(s, &a).unwrap(), expect, "s = {s}");
        }
    }

    #[test]
    fn translation_invariance() {
        let m = CyclicModulus::factor(36).unwrap();
        let f = FiberSpec::new(&m, 36, 1, 2).unwrap();
        let a = Multiset::from_set(m.clone(), f.elements(&m)).unwrap();
        for s in [4u64, 6, 9, 12, 36] {
            let d0 = divides(s, &a).unwrap();
            for t in [1u64, 5, 17] {
                assert_eq!(divides(s, &a.translate(t)).unwrap(), d0);
            }
        }
    }
}
