//! Exact feasibility engine behind `bounds::min_exact`.
//!
//! The search enumerates candidate multisets over `Z_M` (`M = lcm(S)`) level
//! by level along a divisor chain `c_0 | c_1 | ... | M` built from the
//! scales. A level refines each residue class of the previous modulus into
//! its subclasses and distributes the class mass. Scales are checked at the
//! first level whose modulus they divide; residues of a scale freeze as soon
//! as the iteration passes the last cell mapping onto them, which is where
//! the pruning happens:
//!
//! * prime-power scales `p^e` require the reduced weights to be constant
//!   along steps of `p^{e-1}` (exact characterization of `Phi_{p^e} | A`);
//! * composite scales require all canonical cuboid evaluations to vanish
//!   (exact by the cuboid criterion). A cuboid whose open vertices can no
//!   longer change the evaluation sign is dead and cuts the branch.
//!
//! Translation symmetry is removed by pinning weight at 0. The first found
//! assignment in the deterministic iteration order is returned.

use crate::cyclotomic::{as_prime_power, canonical_cuboids, divides, ScaleSet};
use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::zmod::CyclicModulus;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

enum ScaleKind {
    PrimePower {
        step: u64,
    },
    Cuboids {
        /// Per cuboid: (residue mod s, signed weight) vertex list.
        cuboids: Vec<Vec<(u64, i64)>>,
        /// Per residue: (cuboid index, signed weight) incidences.
        incidence: Vec<Vec<(u32, i64)>>,
    },
    /// No incremental structure; checked by remainder when the level ends.
    Remainder,
}

struct ScalePlan {
    s: u64,
    kind: ScaleKind,
    /// Residue mod `s` of each cell, in iteration order.
    cell_residue: Vec<u32>,
    /// Residues that freeze right after the given cell.
    freeze_after: Vec<Vec<u32>>,
}

struct LevelPlan {
    prev_mod: u64,
    cur_mod: u64,
    k: u64,
    checks: Vec<ScalePlan>,
}

pub(crate) struct SearchPlan {
    levels: Vec<LevelPlan>,
    pub(crate) modulus: CyclicModulus,
}

fn build_scale_plan(s: u64, prev_mod: u64, cur_mod: u64) -> Result<ScalePlan> {
    let k = cur_mod / prev_mod;
    let cells = cur_mod as usize;
    let mut cell_residue = vec![0u32; cells];
    let mut last_cell = vec![0usize; s as usize];
    for r in 0..prev_mod {
        for j in 0..k {
            let idx = (r * k + j) as usize;
            let res = ((r + j * prev_mod) % s) as u32;
            cell_residue[idx] = res;
            last_cell[res as usize] = last_cell[res as usize].max(idx);
        }
    }
    let mut freeze_after = vec![Vec::new(); cells];
    for (res, &idx) in last_cell.iter().enumerate() {
        freeze_after[idx].push(res as u32);
    }
    let kind = if let Some((p, e)) = as_prime_power(s) {
        ScaleKind::PrimePower { step: p.pow(e - 1) }
    } else {
        match canonical_cuboids(s) {
            Ok(specs) => {
                let mut cuboids = Vec::with_capacity(specs.len());
                let mut incidence: Vec<Vec<(u32, i64)>> = vec![Vec::new(); s as usize];
                for (qi, spec) in specs.iter().enumerate() {
                    let vw: Vec<(u64, i64)> = spec.vertex_weights()?.into_iter().collect();
                    for &(res, w) in &vw {
                        incidence[res as usize].push((qi as u32, w));
                    }
                    cuboids.push(vw);
                }
                ScaleKind::Cuboids { cuboids, incidence }
            }
            Err(Error::UseRemainderMethod) => ScaleKind::Remainder,
            Err(e) => return Err(e),
        }
    };
    Ok(ScalePlan {
        s,
        kind,
        cell_residue,
        freeze_after,
    })
}

pub(crate) fn build_plan(set: &ScaleSet) -> Result<SearchPlan> {
    let lcm = set.lcm();
    let modulus = CyclicModulus::factor(lcm)?;
    let mut scales: Vec<u64> = set.scales().collect();
    scales.sort_unstable();
    // divisor chain: lcm of prefixes
    let mut chain: Vec<u64> = Vec::new();
    let mut assigned: Vec<Vec<u64>> = Vec::new();
    let mut cur = 1u64;
    for &s in &scales {
        let next = cur / crate::zmod::gcd(cur, s) * s;
        if next > cur {
            chain.push(next);
            assigned.push(vec![]);
            cur = next;
        }
        // attach to the first level whose modulus s divides
        let lvl = chain.iter().position(|&c| c % s == 0).expect("s | lcm");
        assigned[lvl].push(s);
    }
    debug_assert_eq!(cur, lcm);
    let mut levels = Vec::new();
    let mut prev = 1u64;
    for (i, &c) in chain.iter().enumerate() {
        let mut checks = Vec::new();
        for &s in &assigned[i] {
            checks.push(build_scale_plan(s, prev, c)?);
        }
        levels.push(LevelPlan {
            prev_mod: prev,
            cur_mod: c,
            k: c / prev,
            checks,
        });
        prev = c;
    }
    Ok(SearchPlan { levels, modulus })
}

struct ScaleState {
    reduced: Vec<i64>,
    frozen: Vec<bool>,
    evals: Vec<i64>,
    open_pos: Vec<u32>,
    open_neg: Vec<u32>,
}

struct LevelState {
    out: Vec<i64>,
    scales: Vec<ScaleState>,
}

struct Search<'a> {
    plan: &'a SearchPlan,
    states: Vec<LevelState>,
    budget: &'a AtomicU64,
    stop: Option<&'a AtomicBool>,
    local_nodes: u64,
}

const BUDGET_CHUNK: u64 = 1 << 14;

impl<'a> Search<'a> {
    fn new(plan: &'a SearchPlan, budget: &'a AtomicU64, stop: Option<&'a AtomicBool>) -> Self {
        let states = plan
            .levels
            .iter()
            .map(|lvl| LevelState {
                out: vec![0i64; lvl.cur_mod as usize],
                scales: lvl
                    .checks
                    .iter()
                    .map(|sp| {
                        let (evals, open_pos, open_neg) = match &sp.kind {
                            ScaleKind::Cuboids { cuboids, .. } => {
                                let mut op = Vec::with_capacity(cuboids.len());
                                let mut on = Vec::with_capacity(cuboids.len());
                                for c in cuboids {
                                    op.push(c.iter().filter(|&&(_, w)| w > 0).count() as u32);
                                    on.push(c.iter().filter(|&&(_, w)| w < 0).count() as u32);
                                }
                                (vec![0i64; cuboids.len()], op, on)
                            }
                            _ => (Vec::new(), Vec::new(), Vec::new()),
                        };
                        ScaleState {
                            reduced: vec![0i64; sp.s as usize],
                            frozen: vec![false; sp.s as usize],
                            evals,
                            open_pos,
                            open_neg,
                        }
                    })
                    .collect(),
            })
            .collect();
        Search {
            plan,
            states,
            budget,
            stop,
            local_nodes: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.local_nodes += 1;
        if self.local_nodes % BUDGET_CHUNK == 0 {
            if self
                .budget
                .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |b| {
                    b.checked_sub(BUDGET_CHUNK)
                })
                .is_err()
            {
                return Err(Error::CapExceeded("search node budget".into()));
            }
            if let Some(stop) = self.stop {
                if stop.load(Ordering::Relaxed) {
                    return Err(Error::CapExceeded("stopped".into()));
                }
            }
        }
        Ok(())
    }

    /// Apply weight `w` at `cell` of level `lvl`; returns false if a check
    /// prunes the branch (the caller must still unapply).
    fn apply(&mut self, lvl: usize, cell: usize, w: i64) -> bool {
        let plan = &self.plan.levels[lvl];
        let state = &mut self.states[lvl];
        // cell (class r, slot j) holds residue r + j * prev_mod of cur_mod
        let res_out = (cell as u64 / plan.k + (cell as u64 % plan.k) * plan.prev_mod) as usize;
        state.out[res_out] += w;
        let mut ok = true;
        for (sp, st) in plan.checks.iter().zip(state.scales.iter_mut()) {
            let res = sp.cell_residue[cell] as usize;
            st.reduced[res] += w;
            if let ScaleKind::Cuboids { incidence, .. } = &sp.kind {
                if w != 0 {
                    for &(qi, wt) in &incidence[res] {
                        st.evals[qi as usize] += w * wt;
                    }
                }
            }
            for &fres in &sp.freeze_after[cell] {
                let fres = fres as usize;
                st.frozen[fres] = true;
                match &sp.kind {
                    ScaleKind::PrimePower { step } => {
                        let s = sp.s as usize;
                        let up = (fres + *step as usize) % s;
                        let dn = (fres + s - *step as usize) % s;
                        if st.frozen[up] && st.reduced[up] != st.reduced[fres] {
                            ok = false;
                        }
                        if st.frozen[dn] && st.reduced[dn] != st.reduced[fres] {
                            ok = false;
                        }
                    }
                    ScaleKind::Cuboids { incidence, .. } => {
                        for &(qi, wt) in &incidence[fres] {
                            let q = qi as usize;
                            if wt > 0 {
                                st.open_pos[q] -= 1;
                            } else {
                                st.open_neg[q] -= 1;
                            }
                            let e = st.evals[q];
                            if (st.open_neg[q] == 0 && e > 0)
                                || (st.open_pos[q] == 0 && e < 0)
                            {
                                ok = false;
                            }
                        }
                    }
                    ScaleKind::Remainder => {}
                }
            }
        }
        ok
    }

    fn unapply(&mut self, lvl: usize, cell: usize, w: i64) {
        let plan = &self.plan.levels[lvl];
        let state = &mut self.states[lvl];
        let res_out = (cell as u64 / plan.k + (cell as u64 % plan.k) * plan.prev_mod) as usize;
        state.out[res_out] -= w;
        for (sp, st) in plan.checks.iter().zip(state.scales.iter_mut()) {
            let res = sp.cell_residue[cell] as usize;
            st.reduced[res] -= w;
            if let ScaleKind::Cuboids { incidence, .. } = &sp.kind {
                if w != 0 {
                    for &(qi, wt) in &incidence[res] {
                        st.evals[qi as usize] -= w * wt;
                    }
                }
            }
            for &fres in &sp.freeze_after[cell] {
                let fres = fres as usize;
                st.frozen[fres] = false;
                if let ScaleKind::Cuboids { incidence, .. } = &sp.kind {
                    for &(qi, wt) in &incidence[fres] {
                        if wt > 0 {
                            st.open_pos[qi as usize] += 1;
                        } else {
                            st.open_neg[qi as usize] += 1;
                        }
                    }
                }
            }
        }
    }

    /// Level-end remainder fallback for scales too large to enumerate
    /// cuboids for.
    fn level_end_ok(&self, lvl: usize) -> Result<bool> {
        let plan = &self.plan.levels[lvl];
        for (sp, st) in plan.checks.iter().zip(self.states[lvl].scales.iter()) {
            if matches!(sp.kind, ScaleKind::Remainder) {
                let m = CyclicModulus::factor(sp.s)?;
                let a = Multiset::from_weights(
                    m,
                    st.reduced
                        .iter()
                        .enumerate()
                        .map(|(x, &w)| (x as u64, w)),
                )?;
                if !divides(sp.s, &a)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// DFS over the cells of level `lvl`, class by class.
    fn run_level(&mut self, lvl: usize, class: u64, cell_in_class: u64, left: i64) -> Result<bool> {
        let plan = &self.plan.levels[lvl];
        let prev = plan.prev_mod;
        let k = plan.k;
        if class == prev {
            if !self.level_end_ok(lvl)? {
                return Ok(false);
            }
            if lvl + 1 == self.plan.levels.len() {
                return Ok(true);
            }
            return self.run_level(lvl + 1, 0, 0, 0);
        }
        let class_mass = if lvl == 0 {
            left // level 0 has a single class whose mass is the target
        } else if cell_in_class == 0 {
            self.states[lvl - 1].out[class as usize]
        } else {
            left
        };
        if cell_in_class == k {
            debug_assert_eq!(class_mass, 0);
            return self.run_level(lvl, class + 1, 0, 0);
        }
        let cell = (class * k + cell_in_class) as usize;
        let pinned = class == 0 && cell_in_class == 0;
        let last = cell_in_class == k - 1;
        self.tick()?;

        if last {
            let w = class_mass;
            if pinned && w < 1 {
                return Ok(false);
            }
            let ok = self.apply(lvl, cell, w);
            let found = if ok {
                self.run_level(lvl, class + 1, 0, 0)?
            } else {
                false
            };
            if !found {
                self.unapply(lvl, cell, w);
            }
            return Ok(found);
        }

        let lo = if pinned { 1 } else { 0 };
        for w in lo..=class_mass {
            let ok = self.apply(lvl, cell, w);
            if ok {
                if self.run_level(lvl, class, cell_in_class + 1, class_mass - w)? {
                    return Ok(true);
                }
            }
            self.unapply(lvl, cell, w);
        }
        Ok(false)
    }

    fn into_solution(self) -> Vec<i64> {
        self.states
            .last()
            .map(|st| st.out.clone())
            .unwrap_or_default()
    }
}

/// Search for a nonnegative multiset of the given mass over `Z_lcm(S)` with
/// weight at 0 pinned positive; returns the weight vector of the first hit.
pub(crate) fn feasible(
    plan: &SearchPlan,
    mass: u64,
    budget: &AtomicU64,
    workers: usize,
) -> Result<Option<Vec<i64>>> {
    let mass = i64::try_from(mass).map_err(|_| Error::CapExceeded("mass".into()))?;
    if plan.levels.is_empty() {
        return Ok(None);
    }
    if workers <= 1 || plan.levels[0].cur_mod < 2 || mass < 2 {
        let mut search = Search::new(plan, budget, None);
        return match search.run_level(0, 0, 0, mass) {
            Ok(true) => Ok(Some(search.into_solution())),
            Ok(false) => Ok(None),
            Err(e) => Err(e),
        };
    }
    // Parallel mode: split on the weight of cell 0 (which is pinned >= 1).
    use rayon::prelude::*;
    let stop = AtomicBool::new(false);
    let results: Vec<Result<Option<Vec<i64>>>> = (1..=mass)
        .into_par_iter()
        .map(|w0| {
            if stop.load(Ordering::Relaxed) {
                return Ok(None);
            }
            let mut search = Search::new(plan, budget, Some(&stop));
            let ok = search.apply(0, 0, w0);
            if !ok {
                return Ok(None);
            }
            match search.run_level(0, 0, 1, mass - w0) {
                Ok(true) => {
                    stop.store(true, Ordering::Relaxed);
                    Ok(Some(search.into_solution()))
                }
                Ok(false) => Ok(None),
                Err(Error::CapExceeded(msg)) if msg == "stopped" => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut found = None;
    for r in results {
        match r {
            Ok(Some(sol)) => {
                found = Some(sol);
            }
            Ok(None) => {}
            Err(e) => {
                // a budget error only matters if nothing was found
                if found.is_none() {
                    return Err(e);
                }
            }
        }
    }
    Ok(found)
}
