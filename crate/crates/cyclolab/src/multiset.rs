//! Integer-weighted multisets on `Z_M` with the mask-polynomial view:
//! reduction between scales, restriction, convolution and cuboid evaluations.
//!
//! Weights are 64-bit signed integers; any overflow aborts with a diagnostic
//! rather than wrapping, since a silently wrapped weight would poison every
//! divisibility test downstream. The sparse map is keyed by the canonical
//! residue and iterated in ascending key order so that witnesses and file
//! output are reproducible.

use crate::error::{Error, Result};
use crate::zmod::CyclicModulus;
use serde_json::json;
use std::collections::BTreeMap;

fn checked_add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b)
        .ok_or_else(|| Error::WeightOverflow(format!("{a} + {b}")))
}

fn cell_cap() -> u64 {
    std::env::var("CYCLOLAB_MAX_CELLS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000_000)
}

/// An integer-weight function on `Z_M`. Absent keys mean weight zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiset {
    modulus: CyclicModulus,
    weights: BTreeMap<u64, i64>,
    mass: i64,
}

impl Multiset {
    pub fn empty(modulus: CyclicModulus) -> Self {
        Multiset {
            modulus,
            weights: BTreeMap::new(),
            mass: 0,
        }
    }

    pub fn from_weights<I: IntoIterator<Item = (u64, i64)>>(
        modulus: CyclicModulus,
        iter: I,
    ) -> Result<Self> {
        let mut a = Multiset::empty(modulus);
        for (x, w) in iter {
            a.add_weight(x, w)?;
        }
        Ok(a)
    }

    pub fn from_set<I: IntoIterator<Item = u64>>(modulus: CyclicModulus, iter: I) -> Result<Self> {
        Self::from_weights(modulus, iter.into_iter().map(|x| (x, 1)))
    }

    /// Constant weight `w` on all of `Z_M`; materializes, so M is capped.
    pub fn uniform(modulus: CyclicModulus, w: i64) -> Result<Self> {
        if modulus.value() > cell_cap() {
            return Err(Error::CapExceeded(format!(
                "uniform multiset over Z_{}",
                modulus.value()
            )));
        }
        let mv = modulus.value();
        Self::from_weights(modulus, (0..mv).map(|x| (x, w)))
    }

    pub fn add_weight(&mut self, x: u64, w: i64) -> Result<()> {
        if w == 0 {
            return Ok(());
        }
        let key = x % self.modulus.value();
        let entry = self.weights.entry(key).or_insert(0);
        *entry = checked_add(*entry, w)?;
        if *entry == 0 {
            self.weights.remove(&key);
        }
        self.mass = checked_add(self.mass, w)?;
        Ok(())
    }

    pub fn modulus(&self) -> &CyclicModulus {
        &self.modulus
    }

    pub fn weight(&self, x: u64) -> i64 {
        *self
            .weights
            .get(&(x % self.modulus.value()))
            .unwrap_or(&0)
    }

    /// Total mass `|A|`.
    pub fn mass(&self) -> i64 {
        self.mass
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.weights.iter().map(|(&x, &w)| (x, w))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.weights.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_set(&self) -> bool {
        self.weights.values().all(|&w| w == 1)
    }

    pub fn is_nonneg(&self) -> bool {
        self.weights.values().all(|&w| w > 0)
    }

    /// The induced multiset `A mod N` with `w^N(x) = sum_{y = x mod N} w(y)`.
    pub fn reduce_mod(&self, n: u64) -> Result<Multiset> {
        if !self.modulus.is_divisor(n) || n == 0 {
            return Err(Error::InvalidScale {
                scale: n,
                reason: format!("does not divide M = {}", self.modulus.value()),
            });
        }
        let target = if n == self.modulus.value() {
            self.modulus.clone()
        } else if n == 1 {
            return Err(Error::InvalidScale {
                scale: 1,
                reason: "reduction target must be at least 2".into(),
            });
        } else {
            CyclicModulus::factor(n)?
        };
        let mut out = Multiset::empty(target);
        for (&x, &w) in &self.weights {
            out.add_weight(x % n, w)?;
        }
        Ok(out)
    }

    pub fn translate(&self, t: u64) -> Multiset {
        let m = self.modulus.value();
        let mut weights = BTreeMap::new();
        for (&x, &w) in &self.weights {
            weights.insert((x as u128 + t as u128) as u64 % m, w);
        }
        Multiset {
            modulus: self.modulus.clone(),
            weights,
            mass: self.mass,
        }
    }

    /// Restriction `A ∩ Y` to a set: weights `w_A * w_Y`.
    pub fn restrict<I: IntoIterator<Item = u64>>(&self, y: I) -> Multiset {
        let m = self.modulus.value();
        let mut out = Multiset::empty(self.modulus.clone());
        for x in y {
            let x = x % m;
            if let Some(&w) = self.weights.get(&x) {
                out.add_weight(x, w).expect("restriction cannot overflow");
            }
        }
        out
    }

    /// Weighted union: `(A + B)(X) = A(X) + B(X)`.
    pub fn add(&self, other: &Multiset) -> Result<Multiset> {
        if self.modulus.value() != other.modulus.value() {
            return Err(Error::ModulusMismatch(
                self.modulus.value(),
                other.modulus.value(),
            ));
        }
        let mut out = self.clone();
        for (x, w) in other.iter() {
            out.add_weight(x, w)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, k: i64) -> Result<Multiset> {
        let mut out = Multiset::empty(self.modulus.clone());
        for (x, w) in self.iter() {
            let ww = w
                .checked_mul(k)
                .ok_or_else(|| Error::WeightOverflow(format!("{w} * {k}")))?;
            out.add_weight(x, ww)?;
        }
        Ok(out)
    }

    /// Convolution / sumset: `(A * B)(X) = A(X) B(X) mod X^M - 1`.
    pub fn convolve(&self, other: &Multiset) -> Result<Multiset> {
        if self.modulus.value() != other.modulus.value() {
            return Err(Error::ModulusMismatch(
                self.modulus.value(),
                other.modulus.value(),
            ));
        }
        let m = self.modulus.value();
        let mut out = Multiset::empty(self.modulus.clone());
        for (x, wx) in self.iter() {
            for (y, wy) in other.iter() {
                let w = wx
                    .checked_mul(wy)
                    .ok_or_else(|| Error::WeightOverflow(format!("{wx} * {wy}")))?;
                out.add_weight(((x as u128 + y as u128) % m as u128) as u64, w)?;
            }
        }
        Ok(out)
    }

    /// Dense coefficient vector of the mask polynomial (length M).
    pub fn dense(&self) -> Result<Vec<i64>> {
        let m = self.modulus.value();
        if m > cell_cap() {
            return Err(Error::CapExceeded(format!("dense vector over Z_{m}")));
        }
        let mut v = vec![0i64; m as usize];
        for (x, w) in self.iter() {
            v[x as usize] = w;
        }
        Ok(v)
    }

    /// The Delta-evaluation `A^N[Delta] = sum_x w^N_A(x) w_Delta(x)`.
    pub fn delta_eval(&self, delta: &CuboidSpec) -> Result<i64> {
        if !self.modulus.is_divisor(delta.scale) {
            return Err(Error::InvalidScale {
                scale: delta.scale,
                reason: format!("does not divide M = {}", self.modulus.value()),
            });
        }
        let n = delta.scale;
        let mut acc: i64 = 0;
        for (x, sign) in delta.vertices()? {
            // sum the reduced weight of residue x mod n on the fly
            let mut w: i64 = 0;
            let mut y = x;
            while y < self.modulus.value() {
                w = checked_add(w, self.weight(y))?;
                y = match y.checked_add(n) {
                    Some(v) => v,
                    None => break,
                };
            }
            acc = checked_add(acc, sign.checked_mul(w).ok_or_else(|| {
                Error::WeightOverflow("delta evaluation".into())
            })?)?;
        }
        Ok(acc)
    }

    /// Serialize in the interchange format: positions and weights are decimal
    /// strings so round-trips are bit-exact.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "modulus": { "factors": self.modulus.factors() },
            "weights": self
                .weights
                .iter()
                .map(|(x, w)| json!([x.to_string(), w.to_string()]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Multiset> {
        let factors = v
            .get("modulus")
            .and_then(|m| m.get("factors"))
            .and_then(|f| f.as_array())
            .ok_or_else(|| Error::Malformed("missing modulus.factors".into()))?;
        let mut fs = Vec::new();
        for pair in factors {
            let p = pair
                .get(0)
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Malformed("bad factor entry".into()))?;
            let n = pair
                .get(1)
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Malformed("bad factor entry".into()))?;
            fs.push((p, n as u32));
        }
        let modulus = CyclicModulus::from_factors(fs)?;
        let weights = v
            .get("weights")
            .and_then(|w| w.as_array())
            .ok_or_else(|| Error::Malformed("missing weights".into()))?;
        let mut a = Multiset::empty(modulus);
        for pair in weights {
            let x: u64 = pair
                .get(0)
                .and_then(|s| s.as_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Malformed("weight position must be a decimal string".into()))?;
            let w: i64 = pair
                .get(1)
                .and_then(|s| s.as_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Malformed("weight value must be a decimal string".into()))?;
            a.add_weight(x, w)?;
        }
        Ok(a)
    }
}

/// A nonnegative multiset with positive total mass (`M^+(Z_M)` membership).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonnegMultiset(Multiset);

impl NonnegMultiset {
    pub fn new(a: Multiset) -> Result<Self> {
        if !a.is_nonneg() {
            return Err(Error::NegativeInput);
        }
        if a.mass() <= 0 {
            return Err(Error::ZeroMultiset);
        }
        Ok(NonnegMultiset(a))
    }

    pub fn as_multiset(&self) -> &Multiset {
        &self.0
    }

    pub fn into_multiset(self) -> Multiset {
        self.0
    }
}

impl std::ops::Deref for NonnegMultiset {
    type Target = Multiset;
    fn deref(&self) -> &Multiset {
        &self.0
    }
}

/// An N-cuboid (or flat cuboid, when one direction is omitted): the vertex
/// multiset of a full-dimensional box in a `D(N)`-grid with alternating
/// `+-1` weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuboidSpec {
    pub scale: u64,
    pub corner: u64,
    /// One offset `d_j` (unit mod `p_j`) per prime of `scale`, ascending.
    pub offsets: Vec<u64>,
    /// Index (into the scale's primes) of the omitted direction, for flat
    /// cuboids.
    pub omit: Option<usize>,
}

impl CuboidSpec {
    pub fn new(scale: u64, corner: u64, offsets: Vec<u64>, omit: Option<usize>) -> Result<Self> {
        let m = CyclicModulus::factor(scale)?;
        if offsets.len() != m.num_primes() {
            return Err(Error::Malformed(format!(
                "expected {} offsets for scale {scale}",
                m.num_primes()
            )));
        }
        for (j, &d) in offsets.iter().enumerate() {
            if Some(j) == omit {
                continue;
            }
            if d % m.prime(j) == 0 {
                return Err(Error::Malformed(format!(
                    "offset {d} shares a factor with p_{j} = {}",
                    m.prime(j)
                )));
            }
        }
        if let Some(o) = omit {
            if o >= m.num_primes() {
                return Err(Error::Malformed("omitted direction out of range".into()));
            }
        }
        Ok(CuboidSpec {
            scale,
            corner: corner % scale,
            offsets,
            omit,
        })
    }

    /// Vertices `(position in Z_scale, sign)`.
    pub fn vertices(&self) -> Result<Vec<(u64, i64)>> {
        let m = CyclicModulus::factor(self.scale)?;
        let dirs: Vec<usize> = (0..m.num_primes())
            .filter(|&j| Some(j) != self.omit)
            .collect();
        let mut out = Vec::with_capacity(1 << dirs.len());
        for mask in 0u32..(1 << dirs.len()) {
            let mut pos = self.corner as u128;
            let mut sign = 1i64;
            for (b, &j) in dirs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    pos += self.offsets[j] as u128 * (self.scale / m.prime(j)) as u128;
                    sign = -sign;
                }
            }
            out.push(((pos % self.scale as u128) as u64, sign));
        }
        Ok(out)
    }

    /// The signed vertex multiset as a map (vertices may collide).
    pub fn vertex_weights(&self) -> Result<BTreeMap<u64, i64>> {
        let mut map = BTreeMap::new();
        for (x, s) in self.vertices()? {
            *map.entry(x).or_insert(0) += s;
        }
        map.retain(|_, w| *w != 0);
        Ok(map)
    }
}
