//! Cyclic-group arithmetic: factored moduli, CRT array coordinates, digit
//! expansions, grids, fibers and long fibers.
//!
//! Elements of `Z_M` are canonically represented in `[0, M)`; all arithmetic
//! reduces eagerly so values hash and serialize deterministically.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Trial division bound; beyond it the remaining cofactor must be prime.
const TRIAL_DIVISION_BOUND: u64 = 10_000_000;

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc: u64 = 1;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Modular inverse of `a` mod `m` for coprime `a`, `m`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// A modulus `M` together with its prime factorization, cofactors
/// `M_i = M / p_i^{n_i}`, and the CRT array-coordinate system they induce.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicModulus {
    value: u64,
    /// Sorted list of (prime, exponent) pairs.
    factors: Vec<(u64, u32)>,
    /// `cofactors[i] = M / p_i^{n_i}`.
    cofactors: Vec<u64>,
}

impl CyclicModulus {
    /// Factor `m >= 2` by trial division, falling back to a deterministic
    /// primality test for a large remaining cofactor.
    pub fn factor(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidModulus(format!("{m} < 2")));
        }
        let mut factors = Vec::new();
        let mut rest = m;
        let mut p = 2u64;
        while p <= TRIAL_DIVISION_BOUND && p * p <= rest {
            if rest % p == 0 {
                let mut e = 0u32;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p = if p == 2 { 3 } else { p + 2 };
        }
        if rest > 1 {
            if is_prime(rest) {
                factors.push((rest, 1));
            } else {
                return Err(Error::InvalidModulus(format!(
                    "cofactor {rest} is composite and exceeds the trial division bound"
                )));
            }
        }
        Self::from_factors(factors)
    }

    /// Build from an explicit factorization; validates primality, ordering
    /// and that the product fits in u64.
    pub fn from_factors(mut factors: Vec<(u64, u32)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidModulus("empty factorization".into()));
        }
        factors.sort();
        let mut value: u64 = 1;
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidModulus(format!("repeated prime {}", w[0].0)));
            }
        }
        for &(p, e) in &factors {
            if !is_prime(p) {
                return Err(Error::InvalidModulus(format!("{p} is not prime")));
            }
            if e == 0 {
                return Err(Error::InvalidModulus(format!("prime {p} with exponent 0")));
            }
            for _ in 0..e {
                value = value
                    .checked_mul(p)
                    .ok_or_else(|| Error::InvalidModulus("modulus overflows u64".into()))?;
            }
        }
        let cofactors = factors
            .iter()
            .map(|&(p, e)| value / p.pow(e))
            .collect();
        Ok(CyclicModulus {
            value,
            factors,
            cofactors,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn num_primes(&self) -> usize {
        self.factors.len()
    }

    pub fn prime(&self, i: usize) -> u64 {
        self.factors[i].0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.factors[i].1
    }

    /// `p_i^{n_i}`.
    pub fn prime_power(&self, i: usize) -> u64 {
        self.factors[i].0.pow(self.factors[i].1)
    }

    /// `M_i = M / p_i^{n_i}`.
    pub fn cofactor(&self, i: usize) -> u64 {
        self.cofactors[i]
    }

    pub fn prime_index(&self, p: u64) -> Option<usize> {
        self.factors.iter().position(|&(q, _)| q == p)
    }

    pub fn is_divisor(&self, n: u64) -> bool {
        n >= 1 && self.value % n == 0
    }

    fn check_divisor(&self, n: u64) -> Result<()> {
        if !self.is_divisor(n) {
            return Err(Error::InvalidScale {
                scale: n,
                reason: format!("does not divide M = {}", self.value),
            });
        }
        Ok(())
    }

    /// p-adic valuation of a divisor `n` at the i-th prime.
    pub fn valuation(&self, n: u64, i: usize) -> u32 {
        let p = self.prime(i);
        let mut v = 0;
        let mut n = n;
        while n % p == 0 {
            n /= p;
            v += 1;
        }
        v
    }

    /// All divisors of M, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = out.clone();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                out.extend(prev.iter().map(|d| d * pk));
            }
        }
        out.sort_unstable();
        out
    }

    /// The prime set `P(N)` of a divisor `N | M`.
    pub fn prime_set(&self, n: u64) -> Result<Vec<u64>> {
        self.check_divisor(n)?;
        Ok(self
            .factors
            .iter()
            .map(|&(p, _)| p)
            .filter(|&p| n % p == 0)
            .collect())
    }

    /// `D(N) = N / rad(N)`, the grid step below which all N-cuboids live.
    pub fn grid_step(&self, n: u64) -> Result<u64> {
        let rad: u64 = self.prime_set(n)?.iter().product();
        Ok(if rad == 0 { 1 } else { n / rad.max(1) })
    }

    /// Radical of a divisor.
    pub fn radical(&self, n: u64) -> Result<u64> {
        Ok(self.prime_set(n)?.iter().product::<u64>().max(1))
    }

    /// Array coordinates of `x`: `x = sum_i x_i M_i (mod M)` with
    /// `x_i in Z_{p_i^{n_i}}`, plus the p_i-adic digits of each `x_i`.
    pub fn to_coords(&self, x: u64) -> ArrayCoords {
        let x = x % self.value;
        let mut coords = Vec::with_capacity(self.factors.len());
        let mut digits = Vec::with_capacity(self.factors.len());
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            let q = p.pow(e);
            let inv = inv_mod(self.cofactors[i] % q, q).expect("cofactor is a unit");
            let xi = mul_mod(x % q, inv, q);
            coords.push(xi);
            let mut ds = Vec::with_capacity(e as usize);
            let mut t = xi;
            for _ in 0..e {
                ds.push((t % p) as u32);
                t /= p;
            }
            digits.push(ds);
        }
        ArrayCoords { coords, digits }
    }

    /// Inverse of [`to_coords`]: `sum_i x_i M_i mod M`.
    pub fn from_coords(&self, coords: &[u64]) -> u64 {
        let mut acc: u128 = 0;
        for (i, &xi) in coords.iter().enumerate() {
            let q = self.prime_power(i);
            acc += (xi % q) as u128 * self.cofactors[i] as u128;
        }
        (acc % self.value as u128) as u64
    }

    /// CRT combine per-prime residues given modulo `p_i^{e_i}` for arbitrary
    /// exponent vector `e_i <= n_i`; result is mod `prod p_i^{e_i}`.
    pub fn crt_mixed(&self, residues: &[(usize, u64, u64)]) -> u64 {
        // residues: (prime index, residue, p_i^{e_i})
        let modulus: u64 = residues.iter().map(|&(_, _, q)| q).product();
        let mut acc: u128 = 0;
        for &(_, r, q) in residues {
            let c = modulus / q;
            let inv = inv_mod(c % q, q).expect("unit");
            acc += (r % q) as u128 * mul_mod(c, inv, modulus) as u128;
            acc %= modulus as u128;
        }
        acc as u64
    }
}

/// CRT array coordinates with per-prime digit expansions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayCoords {
    /// `x_i in Z_{p_i^{n_i}}`, one per prime of the modulus.
    pub coords: Vec<u64>,
    /// `digits[i][j] = x_{i,j}`, the coefficient of `p_i^j` in `x_i`.
    pub digits: Vec<Vec<u32>>,
}

/// A coset `{x' : D | (x - x')}` of `D Z_N` in `Z_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub scale: u64,
    pub base: u64,
    pub step: u64,
}

impl GridSpec {
    pub fn new(m: &CyclicModulus, scale: u64, base: u64, step: u64) -> Result<Self> {
        m.check_divisor(scale)?;
        if step == 0 || scale % step != 0 {
            return Err(Error::InvalidScale {
                scale: step,
                reason: format!("grid step must divide the ambient scale {scale}"),
            });
        }
        Ok(GridSpec {
            scale,
            base: base % scale,
            step,
        })
    }

    /// The `N/D` elements of the coset, ascending.
    pub fn elements(&self) -> Vec<u64> {
        let count = self.scale / self.step;
        let first = self.base % self.step;
        (0..count).map(|k| first + k * self.step).collect()
    }
}

/// A `p_j`-fiber on scale `N | M`: translate of `{0, N/p_j, ..., (p_j-1)N/p_j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub scale: u64,
    /// Index of the direction prime in the ambient modulus factorization.
    pub dir: usize,
    pub shift: u64,
}

impl FiberSpec {
    pub fn new(m: &CyclicModulus, scale: u64, dir: usize, shift: u64) -> Result<Self> {
        m.check_divisor(scale)?;
        if dir >= m.num_primes() || scale % m.prime(dir) != 0 {
            return Err(Error::InvalidDirection { dir, scale });
        }
        Ok(FiberSpec {
            scale,
            dir,
            shift: shift % scale,
        })
    }

    pub fn elements(&self, m: &CyclicModulus) -> Vec<u64> {
        let p = m.prime(self.dir);
        let step = self.scale / p;
        (0..p)
            .map(|v| ((self.shift as u128 + v as u128 * step as u128) % self.scale as u128) as u64)
            .collect()
    }
}

/// A `p_i^alpha`-fiber on scale `M`: translate of the arithmetic progression
/// with step `M/p_i^alpha` and `p_i^alpha` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongFiberSpec {
    pub dir: usize,
    pub depth: u32,
    pub shift: u64,
}

impl LongFiberSpec {
    pub fn new(m: &CyclicModulus, dir: usize, depth: u32, shift: u64) -> Result<Self> {
        if dir >= m.num_primes() {
            return Err(Error::InvalidDirection {
                dir,
                scale: m.value(),
            });
        }
        if depth == 0 || depth > m.exponent(dir) {
            return Err(Error::Malformed(format!(
                "long fiber depth {depth} out of range 1..={}",
                m.exponent(dir)
            )));
        }
        Ok(LongFiberSpec {
            dir,
            depth,
            shift: shift % m.value(),
        })
    }

    pub fn count(&self, m: &CyclicModulus) -> u64 {
        m.prime(self.dir).pow(self.depth)
    }

    pub fn step(&self, m: &CyclicModulus) -> u64 {
        m.value() / self.count(m)
    }

    pub fn elements(&self, m: &CyclicModulus) -> Vec<u64> {
        let count = self.count(m);
        let step = self.step(m);
        let mv = m.value();
        (0..count)
            .map(|v| ((self.shift as u128 + v as u128 * step as u128) % mv as u128) as u64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        let m = CyclicModulus::factor(12).unwrap();
        assert_eq!(m.factors(), &[(2, 2), (3, 1)]);
        assert_eq!(m.cofactor(0), 3);
        assert_eq!(m.cofactor(1), 4);
        let m = CyclicModulus::factor(2).unwrap();
        assert_eq!(m.factors(), &[(2, 1)]);
    }

    #[test]
    fn factor_countex_modulus() {
        let m = CyclicModulus::factor(373248).unwrap();
        assert_eq!(m.factors(), &[(2, 9), (3, 6)]);
    }

    #[test]
    fn factor_rejects_small() {
        assert!(CyclicModulus::factor(1).is_err());
        assert!(CyclicModulus::factor(0).is_err());
    }

    #[test]
    fn coords_roundtrip_z12() {
        let m = CyclicModulus::factor(12).unwrap();
        assert_eq!(m.to_coords(0).coords, vec![0, 0]);
        // 1*3 + 1*4 = 7
        assert_eq!(m.to_coords(7).coords, vec![1, 1]);
        // 2*3 = 6
        assert_eq!(m.to_coords(6).coords, vec![2, 0]);
        for x in 0..12 {
            let c = m.to_coords(x);
            assert_eq!(m.from_coords(&c.coords), x);
        }
    }

    #[test]
    fn coords_bijection_exhaustive() {
        for mv in [16u64, 30, 36, 2 * 3 * 5 * 7, 9973] {
            let m = CyclicModulus::factor(mv).unwrap();
            let mut seen = vec![false; mv as usize];
            for x in 0..mv {
                let y = m.from_coords(&m.to_coords(x).coords);
                assert_eq!(x, y);
                assert!(!seen[y as usize]);
                seen[y as usize] = true;
            }
        }
    }

    #[test]
    fn digits_expand() {
        let m = CyclicModulus::factor(8 * 9).unwrap();
        let c = m.to_coords(m.from_coords(&[6, 7]));
        assert_eq!(c.coords, vec![6, 7]);
        assert_eq!(c.digits[0], vec![0, 1, 1]); // 6 = 0 + 1*2 + 1*4
        assert_eq!(c.digits[1], vec![1, 2]); // 7 = 1 + 2*3
    }

    #[test]
    fn radical_reduced() {
        let m = CyclicModulus::factor(1296).unwrap();
        assert_eq!(m.grid_step(6).unwrap(), 1);
        assert_eq!(m.grid_step(1296).unwrap(), 216);
        let m12 = CyclicModulus::factor(12).unwrap();
        assert_eq!(m12.grid_step(12).unwrap(), 2);
        assert!(m12.grid_step(5).is_err());
    }

    #[test]
    fn fiber_elements_examples() {
        let m = CyclicModulus::factor(12).unwrap();
        let f2 = FiberSpec::new(&m, 12, 0, 0).unwrap();
        assert_eq!(f2.elements(&m), vec![0, 6]);
        let f3 = FiberSpec::new(&m, 12, 1, 0).unwrap();
        assert_eq!(f3.elements(&m), vec![0, 4, 8]);
        let m8 = CyclicModulus::factor(8).unwrap();
        let lf = LongFiberSpec::new(&m8, 0, 2, 0).unwrap();
        assert_eq!(lf.elements(&m8), vec![0, 2, 4, 6]);
    }

    #[test]
    fn fiber_invalid_direction() {
        let m = CyclicModulus::factor(12).unwrap();
        // scale 4 has no factor 3
        assert!(FiberSpec::new(&m, 4, 1, 0).is_err());
    }

    #[test]
    fn fiber_difference_gcd() {
        // pairwise differences d of a fiber on scale N satisfy (d, N) = N/p.
        for (mv, scale) in [(36u64, 36u64), (36, 12), (60, 30)] {
            let m = CyclicModulus::factor(mv).unwrap();
            for dir in 0..m.num_primes() {
                if scale % m.prime(dir) != 0 {
                    continue;
                }
                for shift in [0u64, 1, 7] {
                    let f = FiberSpec::new(&m, scale, dir, shift).unwrap();
                    let els = f.elements(&m);
                    for a in &els {
                        for b in &els {
                            if a != b {
                                let d = (a + scale - b) % scale;
                                assert_eq!(gcd(d, scale), scale / m.prime(dir));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn grid_elements() {
        let m = CyclicModulus::factor(12).unwrap();
        let g = GridSpec::new(&m, 12, 5, 3).unwrap();
        assert_eq!(g.elements(), vec![2, 5, 8, 11]);
        assert_eq!(g.elements().len() as u64, 12 / 3);
    }

    #[test]
    fn d_times_radical() {
        let m = CyclicModulus::factor(2u64.pow(4) * 3u64.pow(4)).unwrap();
        for n in m.divisors() {
            if n == 1 {
                continue;
            }
            assert_eq!(m.grid_step(n).unwrap() * m.radical(n).unwrap(), n);
        }
    }
}
