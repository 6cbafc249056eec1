//! Structured representation for multisets too large to enumerate
//! pointwise: weighted sums of points, fibers, long fibers, and coordinate
//! boxes convolved with long fibers.
//!
//! A coordinate box stores one half-open range per prime of `M` on the
//! "bar" coordinates: it denotes `{ sum_i p_i xbar_i M_i : lo_i <= xbar_i <
//! hi_i }`. Total mass is available in closed form, and reduction modulo any
//! divisor is computed by per-prime residue counting without ever
//! materializing the set.

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::zmod::{gcd, CyclicModulus, FiberSpec, LongFiberSpec};
use rand::Rng;
use serde_json::json;
use std::collections::BTreeMap;

fn cell_cap() -> u64 {
    std::env::var("CYCLOLAB_MAX_CELLS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000_000)
}

/// Product of per-prime digit-interval constraints on the bar coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordBox {
    /// One `[lo, hi)` range per prime of the ambient modulus; the actual
    /// coordinate is `x_i = p_i * xbar_i`.
    pub ranges: Vec<(u64, u64)>,
}

impl CoordBox {
    pub fn new(m: &CyclicModulus, ranges: Vec<(u64, u64)>) -> Result<Self> {
        if ranges.len() != m.num_primes() {
            return Err(Error::Malformed(format!(
                "expected {} ranges",
                m.num_primes()
            )));
        }
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            let bound = m.prime(i).pow(m.exponent(i) - 1);
            if lo >= hi || hi > bound {
                return Err(Error::Malformed(format!(
                    "range [{lo}, {hi}) invalid for bar coordinate {i} (bound {bound})"
                )));
            }
        }
        Ok(CoordBox { ranges })
    }

    pub fn cardinality(&self) -> u128 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo) as u128)
            .product()
    }

    /// The element for a choice of bar coordinates.
    pub fn element(&self, m: &CyclicModulus, bars: &[u64]) -> u64 {
        let coords: Vec<u64> = bars
            .iter()
            .enumerate()
            .map(|(i, &b)| b * m.prime(i))
            .collect();
        m.from_coords(&coords)
    }
}

/// One structural summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Component {
    Point(u64),
    Fiber(FiberSpec),
    LongFiber(LongFiberSpec),
    BoxFiber { cbox: CoordBox, fiber: LongFiberSpec },
}

/// A weighted sum of structural components over `Z_M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicMultiset {
    modulus: CyclicModulus,
    terms: Vec<(u64, Component)>,
}

impl SymbolicMultiset {
    pub fn new(modulus: CyclicModulus) -> Self {
        SymbolicMultiset {
            modulus,
            terms: Vec::new(),
        }
    }

    pub fn modulus(&self) -> &CyclicModulus {
        &self.modulus
    }

    pub fn terms(&self) -> &[(u64, Component)] {
        &self.terms
    }

    pub fn push(&mut self, coeff: u64, component: Component) -> Result<()> {
        if coeff == 0 {
            return Err(Error::Malformed("zero coefficient".into()));
        }
        self.terms.push((coeff, component));
        Ok(())
    }

    fn component_mass(&self, c: &Component) -> u128 {
        match c {
            Component::Point(_) => 1,
            Component::Fiber(f) => self.modulus.prime(f.dir) as u128,
            Component::LongFiber(f) => f.count(&self.modulus) as u128,
            Component::BoxFiber { cbox, fiber } => {
                cbox.cardinality() * fiber.count(&self.modulus) as u128
            }
        }
    }

    /// Total mass, in closed form.
    pub fn mass(&self) -> u128 {
        self.terms
            .iter()
            .map(|(c, comp)| *c as u128 * self.component_mass(comp))
            .sum()
    }

    /// Reduce mod `n | M` by per-component counting. The output support is
    /// capped; symbolic structure keeps it small even for huge `n`.
    pub fn reduce_mod(&self, n: u64) -> Result<Multiset> {
        if n < 2 || !self.modulus.is_divisor(n) {
            return Err(Error::InvalidScale {
                scale: n,
                reason: format!("not a divisor >= 2 of M = {}", self.modulus.value()),
            });
        }
        let target = CyclicModulus::factor(n)?;
        let mut out = Multiset::empty(target.clone());
        let m = &self.modulus;
        for (coeff, comp) in &self.terms {
            match comp {
                Component::Point(x) => {
                    out.add_weight(x % n, *coeff as i64)?;
                }
                Component::Fiber(f) => {
                    for e in f.elements(m) {
                        out.add_weight(e % n, *coeff as i64)?;
                    }
                }
                Component::LongFiber(f) => {
                    reduce_shifted_box_fiber(m, &target, None, f, *coeff, &mut out)?;
                }
                Component::BoxFiber { cbox, fiber } => {
                    reduce_shifted_box_fiber(m, &target, Some(cbox), fiber, *coeff, &mut out)?;
                }
            }
        }
        Ok(out)
    }

    /// Enumerate every element (with multiplicity) into a plain multiset.
    pub fn materialize(&self) -> Result<Multiset> {
        if self.mass() > cell_cap() as u128 {
            return Err(Error::CapExceeded(format!(
                "materializing mass {}",
                self.mass()
            )));
        }
        let m = &self.modulus;
        let mut out = Multiset::empty(m.clone());
        for (coeff, comp) in &self.terms {
            match comp {
                Component::Point(x) => out.add_weight(*x, *coeff as i64)?,
                Component::Fiber(f) => {
                    for e in f.elements(m) {
                        out.add_weight(e, *coeff as i64)?;
                    }
                }
                Component::LongFiber(f) => {
                    for e in f.elements(m) {
                        out.add_weight(e, *coeff as i64)?;
                    }
                }
                Component::BoxFiber { cbox, fiber } => {
                    let mut bars: Vec<u64> = cbox.ranges.iter().map(|&(lo, _)| lo).collect();
                    loop {
                        let base = cbox.element(m, &bars);
                        for e in fiber.elements(m) {
                            out.add_weight(
                                ((base as u128 + e as u128) % m.value() as u128) as u64,
                                *coeff as i64,
                            )?;
                        }
                        // odometer over the box
                        let mut i = 0;
                        loop {
                            if i == bars.len() {
                                break;
                            }
                            bars[i] += 1;
                            if bars[i] < cbox.ranges[i].1 {
                                break;
                            }
                            bars[i] = cbox.ranges[i].0;
                            i += 1;
                        }
                        if bars.iter().zip(&cbox.ranges).all(|(&b, &(lo, _))| b == lo) {
                            break;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Draw one element, components weighted by mass.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let total = self.mass();
        let mut pick = rng.gen_range(0..total);
        let m = &self.modulus;
        for (coeff, comp) in &self.terms {
            let w = *coeff as u128 * self.component_mass(comp);
            if pick >= w {
                pick -= w;
                continue;
            }
            return match comp {
                Component::Point(x) => *x,
                Component::Fiber(f) => {
                    let els = f.elements(m);
                    els[rng.gen_range(0..els.len())]
                }
                Component::LongFiber(f) => {
                    let v = rng.gen_range(0..f.count(m));
                    ((f.shift as u128 + v as u128 * f.step(m) as u128) % m.value() as u128) as u64
                }
                Component::BoxFiber { cbox, fiber } => {
                    let bars: Vec<u64> = cbox
                        .ranges
                        .iter()
                        .map(|&(lo, hi)| rng.gen_range(lo..hi))
                        .collect();
                    let base = cbox.element(m, &bars);
                    let v = rng.gen_range(0..fiber.count(m));
                    ((base as u128
                        + fiber.shift as u128
                        + v as u128 * fiber.step(m) as u128)
                        % m.value() as u128) as u64
                }
            };
        }
        unreachable!("mass accounted for every component")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(c, comp)| match comp {
                Component::Point(x) => json!({"coeff": c, "kind": "point", "x": x}),
                Component::Fiber(f) => json!({
                    "coeff": c, "kind": "fiber",
                    "scale": f.scale, "dir": f.dir, "shift": f.shift,
                }),
                Component::LongFiber(f) => json!({
                    "coeff": c, "kind": "long_fiber",
                    "dir": f.dir, "alpha": f.depth, "shift": f.shift,
                }),
                Component::BoxFiber { cbox, fiber } => json!({
                    "coeff": c, "kind": "box_fiber",
                    "ranges": cbox.ranges,
                    "dir": fiber.dir, "alpha": fiber.depth, "shift": fiber.shift,
                }),
            })
            .collect();
        json!({
            "modulus": {"factors": self.modulus.factors()},
            "terms": terms,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let factors = v
            .get("modulus")
            .and_then(|m| m.get("factors"))
            .and_then(|f| f.as_array())
            .ok_or_else(|| Error::Malformed("missing modulus.factors".into()))?;
        let mut fs = Vec::new();
        for pair in factors {
            let p = pair.get(0).and_then(|x| x.as_u64());
            let n = pair.get(1).and_then(|x| x.as_u64());
            match (p, n) {
                (Some(p), Some(n)) => fs.push((p, n as u32)),
                _ => return Err(Error::Malformed("bad factor entry".into())),
            }
        }
        let modulus = CyclicModulus::from_factors(fs)?;
        let mut out = SymbolicMultiset::new(modulus.clone());
        let terms = v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Malformed("missing terms".into()))?;
        for t in terms {
            let coeff = t
                .get("coeff")
                .and_then(|c| c.as_u64())
                .ok_or_else(|| Error::Malformed("missing coeff".into()))?;
            let kind = t
                .get("kind")
                .and_then(|k| k.as_str())
                .ok_or_else(|| Error::Malformed("missing kind".into()))?;
            let get = |k: &str| -> Result<u64> {
                t.get(k)
                    .and_then(|x| x.as_u64())
                    .ok_or_else(|| Error::Malformed(format!("missing field {k}")))
            };
            let comp = match kind {
                "point" => Component::Point(get("x")? % modulus.value()),
                "fiber" => Component::Fiber(FiberSpec::new(
                    &modulus,
                    get("scale")?,
                    get("dir")? as usize,
                    get("shift")?,
                )?),
                "long_fiber" => Component::LongFiber(LongFiberSpec::new(
                    &modulus,
                    get("dir")? as usize,
                    get("alpha")? as u32,
                    get("shift")?,
                )?),
                "box_fiber" => {
                    let ranges = t
                        .get("ranges")
                        .and_then(|r| r.as_array())
                        .ok_or_else(|| Error::Malformed("missing ranges".into()))?
                        .iter()
                        .map(|pair| {
                            let lo = pair.get(0).and_then(|x| x.as_u64());
                            let hi = pair.get(1).and_then(|x| x.as_u64());
                            match (lo, hi) {
                                (Some(lo), Some(hi)) => Ok((lo, hi)),
                                _ => Err(Error::Malformed("bad range".into())),
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Component::BoxFiber {
                        cbox: CoordBox::new(&modulus, ranges)?,
                        fiber: LongFiberSpec::new(
                            &modulus,
                            get("dir")? as usize,
                            get("alpha")? as u32,
                            get("shift")?,
                        )?,
                    }
                }
                other => return Err(Error::Malformed(format!("unknown kind {other}"))),
            };
            out.push(coeff, comp)?;
        }
        Ok(out)
    }
}

/// Count `xbar in [lo, hi)` with `xbar = t (mod period)`.
fn count_in_range(lo: u64, hi: u64, t: u64, period: u64) -> u64 {
    let below = |x: u64| -> u64 {
        // #{ xbar < x : xbar = t mod period }
        if x <= t {
            0
        } else {
            (x - t - 1) / period + 1
        }
    };
    below(hi) - below(lo)
}

/// Per-prime residue distribution of a (box x long-fiber) component, then a
/// CRT tensor combine into the target modulus.
fn reduce_shifted_box_fiber(
    m: &CyclicModulus,
    target: &CyclicModulus,
    cbox: Option<&CoordBox>,
    fiber: &LongFiberSpec,
    coeff: u64,
    out: &mut Multiset,
) -> Result<()> {
    let n = target.value();
    // distributions per prime of M appearing in n
    let mut dists: Vec<(u64, BTreeMap<u64, u128>)> = Vec::new(); // (p^m, residue -> count)
    let mut support_size: u128 = 1;
    // primes of M missing from n still contribute their cardinality factors
    let mut multiplier: u128 = 1;
    for i in 0..m.num_primes() {
        let mut mexp = 0u32;
        let p = m.prime(i);
        let mut t = n;
        while t % p == 0 {
            t /= p;
            mexp += 1;
        }
        if mexp == 0 {
            if let Some(b) = cbox {
                let (lo, hi) = b.ranges[i];
                multiplier *= (hi - lo) as u128;
            }
            if fiber.dir == i {
                multiplier *= fiber.count(m) as u128;
            }
            continue;
        }
        let pm = p.pow(mexp);
        let mut dist: BTreeMap<u64, u128> = BTreeMap::new();
        // box axis contribution
        if let Some(b) = cbox {
            let (lo, hi) = b.ranges[i];
            let c = ((p as u128 * (m.cofactor(i) % pm) as u128) % pm as u128) as u64;
            if c == 0 {
                dist.insert(0, (hi - lo) as u128);
            } else {
                let d = gcd(c, pm);
                let period = pm / d;
                for t in 0..period {
                    let cnt = count_in_range(lo, hi, t, period);
                    if cnt > 0 {
                        let res = ((c as u128 * t as u128) % pm as u128) as u64;
                        *dist.entry(res).or_insert(0) += cnt as u128;
                    }
                }
            }
        } else {
            dist.insert(0, 1);
        }
        // fiber contribution in its own direction (other primes see 0)
        if fiber.dir == i {
            let step = fiber.step(m) % pm;
            let count = fiber.count(m);
            let mut fdist: BTreeMap<u64, u128> = BTreeMap::new();
            if step == 0 {
                fdist.insert(0, count as u128);
            } else {
                let d = gcd(step, pm);
                let orbit = pm / d; // distinct multiples of step mod pm
                let reps = count as u128 / orbit as u128;
                for j in 0..orbit {
                    fdist.insert(((step as u128 * j as u128) % pm as u128) as u64, reps);
                }
            }
            // convolve dist with fdist mod pm
            let mut conv: BTreeMap<u64, u128> = BTreeMap::new();
            for (&a, &ca) in &dist {
                for (&b, &cb) in &fdist {
                    *conv.entry((a + b) % pm).or_insert(0) += ca * cb;
                }
            }
            dist = conv;
        }
        // shift contribution
        let sh = fiber.shift % pm;
        if sh != 0 {
            dist = dist
                .into_iter()
                .map(|(r, c)| ((r + sh) % pm, c))
                .collect();
        }
        support_size = support_size.saturating_mul(dist.len() as u128);
        dists.push((pm, dist));
    }
    if support_size > cell_cap() as u128 {
        return Err(Error::CapExceeded(format!(
            "symbolic reduction support {support_size}"
        )));
    }
    // tensor-combine via CRT
    let mut acc: Vec<(u64, u128)> = vec![(0, 1)];
    let mut partial_mod = 1u64;
    for (pm, dist) in dists {
        let mut next = Vec::with_capacity(acc.len() * dist.len());
        let new_mod = partial_mod * pm;
        for &(r0, c0) in &acc {
            for (&r1, &c1) in &dist {
                // x = r0 mod partial_mod, x = r1 mod pm
                let x = if partial_mod == 1 {
                    r1
                } else {
                    let c = new_mod / pm;
                    let inv = crate::zmod::inv_mod(c % pm, pm).expect("unit");
                    let t = crate::zmod::mul_mod(
                        ((r1 + pm - (r0 % pm)) % pm) as u64,
                        inv,
                        pm,
                    );
                    (r0 as u128 + c as u128 * t as u128) as u64 % new_mod
                };
                next.push((x, c0 * c1));
            }
        }
        acc = next;
        partial_mod = new_mod;
    }
    debug_assert_eq!(partial_mod, n);
    for (r, c) in acc {
        let total = (c * multiplier) as i128 * coeff as i128;
        let w = i64::try_from(total)
            .map_err(|_| Error::WeightOverflow("symbolic reduction weight".into()))?;
        out.add_weight(r, w)?;
    }
    Ok(())
}

/// How a congruence between symbolic multisets was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongruenceEvidence {
    /// Both sides reduced and compared.
    Exact,
    /// Terms paired with shift differences divisible by the modulus.
    Structural,
}

/// Check `A = B (mod l)` either exactly (when `l` is materializable) or
/// structurally: terms must pair up with identical shapes and shift
/// differences divisible by `l`.
pub fn symbolic_congruent_mod(
    a: &SymbolicMultiset,
    b: &SymbolicMultiset,
    l: u64,
) -> Result<(bool, CongruenceEvidence)> {
    if a.modulus().value() != b.modulus().value() {
        return Err(Error::ModulusMismatch(
            a.modulus().value(),
            b.modulus().value(),
        ));
    }
    if l <= cell_cap() {
        let ra = a.reduce_mod(l)?;
        let rb = b.reduce_mod(l)?;
        return Ok((ra == rb, CongruenceEvidence::Exact));
    }
    // structural pairing on shape (component with shift removed)
    fn shape_key(c: &Component) -> (u8, Vec<u64>) {
        match c {
            Component::Point(_) => (0, vec![]),
            Component::Fiber(f) => (1, vec![f.scale, f.dir as u64]),
            Component::LongFiber(f) => (2, vec![f.dir as u64, f.depth as u64]),
            Component::BoxFiber { cbox, fiber } => {
                let mut v = vec![fiber.dir as u64, fiber.depth as u64];
                for &(lo, hi) in &cbox.ranges {
                    v.push(lo);
                    v.push(hi);
                }
                (3, v)
            }
        }
    }
    fn shift_of(c: &Component) -> u64 {
        match c {
            Component::Point(x) => *x,
            Component::Fiber(f) => f.shift,
            Component::LongFiber(f) => f.shift,
            Component::BoxFiber { fiber, .. } => fiber.shift,
        }
    }
    let keyed = |s: &SymbolicMultiset| -> Vec<(u64, (u8, Vec<u64>), u64)> {
        let mut v: Vec<_> = s
            .terms()
            .iter()
            .map(|(c, comp)| (*c, shape_key(comp), shift_of(comp) % l))
            .collect();
        v.sort();
        v
    };
    let ka = keyed(a);
    let kb = keyed(b);
    Ok((ka == kb, CongruenceEvidence::Structural))
}
