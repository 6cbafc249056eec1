//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`). Run with
//! `cargo test -p cyclolab --test acceptance -- --nocapture`.

use cyclolab::bounds::{self, BruteOutcome, MinOutcome, SolveOptions};
use cyclolab::constructions::{self, CheckStatus};
use cyclolab::cyclotomic::{self, divides, divides_via_cuboids, ScaleSet};
use cyclolab::multiset::{Multiset, NonnegMultiset};
use cyclolab::structure;
use cyclolab::tiling::{self, UnsupportedTag};
use cyclolab::zmod::{CyclicModulus, FiberSpec, LongFiberSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::time::Instant;

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "acceptance {criterion}: {detail}");
}

/// Criterion 1: the (2,3,5) gap. MIN({6,5}) = 5 with a verified witness,
/// FIB({6,5}) = 10, in under a second.
#[test]
fn acceptance_01_three_prime_gap() {
    let t0 = Instant::now();
    let set = ScaleSet::over_lcm([6u64, 5]).unwrap();
    let r = bounds::min_exact(&set, &SolveOptions::default()).unwrap();
    let min_ok = match &r.outcome {
        MinOutcome::Exact { value, witness } => {
            let mut ok = *value == 5 && witness.mass() == 5;
            for s in [6u64, 5] {
                ok &= divides(s, witness).unwrap();
            }
            ok
        }
        _ => false,
    };
    let elapsed = t0.elapsed();
    report(
        "1 (three-prime gap)",
        min_ok && r.fib.value == 10 && elapsed.as_secs_f64() < 1.0,
        &format!("min = 5, fib = {}, {elapsed:?}", r.fib.value),
    );
}

/// Criterion 2: prime-power blocks. For p in {2,3} and m in {1,2,3},
/// MIN = FIB = p^m with the standard witness, each in under a second.
#[test]
fn acceptance_02_prime_power_blocks() {
    for p in [2u64, 3] {
        for m in 1u32..=3 {
            let t0 = Instant::now();
            let scales: Vec<u64> = (1..=m).map(|a| p.pow(a)).collect();
            let set = ScaleSet::over_lcm(scales.iter().copied()).unwrap();
            let r = bounds::min_exact(&set, &SolveOptions::default()).unwrap();
            let want = p.pow(m);
            let ok = match &r.outcome {
                MinOutcome::Exact { value, witness } => {
                    *value == want && witness.mass() == want as i64
                }
                _ => false,
            };
            let elapsed = t0.elapsed();
            report(
                &format!("2 (prime power p={p} m={m})"),
                ok && r.fib.value == want && elapsed.as_secs_f64() < 1.0,
                &format!("min = fib = {want}, {elapsed:?}"),
            );
        }
    }
}

/// Criterion 3: the 216-element reproduction in Z_373248.
#[test]
fn acceptance_03_countex_2_3() {
    let t0 = Instant::now();
    let r = constructions::countex_2_3(9, 6).unwrap();
    let a = NonnegMultiset::new(r.multiset.clone().unwrap()).unwrap();
    let mut ok = a.modulus().value() == 373_248 && a.mass() == 216 && a.is_set();
    // exactly the seven claimed divisors among the audited scale families
    let claimed: BTreeSet<u64> = [512, 256, 128, 729, 243, 81, 6].into_iter().collect();
    for s in [512u64, 256, 128, 729, 243, 81, 6, 2, 3, 4, 9, 12, 64, 27] {
        let d = divides(s, &a).unwrap();
        ok &= d == claimed.contains(&s);
    }
    // reduction mod 6 equals the base table bit-exactly
    ok &= a.reduce_mod(6).unwrap() == constructions::table_z6_multiset().unwrap();
    // fibered bound strictly above the mass
    let set = ScaleSet::new(a.modulus().clone(), claimed.iter().copied()).unwrap();
    let f = bounds::fib(&set).unwrap();
    ok &= f.value == 432 && f.value > 216;
    ok &= r.accepted();
    let elapsed = t0.elapsed();
    report(
        "3 (216-element set)",
        ok && elapsed.as_secs_f64() < 30.0,
        &format!("mass 216, seven divisors exact, fib = {}, {elapsed:?}", f.value),
    );
}

/// Criterion 4, paper-consistent components: a genuine 72-element set in
/// Z_1296 with divisors {2,4,8,3,9,1296} exact, (T1) true and the top
/// scale flagged unsupported, in under five seconds.
#[test]
fn acceptance_04_countex_72() {
    let t0 = Instant::now();
    let r = constructions::countex_72().unwrap();
    let a = NonnegMultiset::new(r.multiset.clone().unwrap()).unwrap();
    let mut ok = a.modulus().value() == 1296 && a.mass() == 72 && a.is_set();
    let divisors = cyclotomic::all_divisors(&a).unwrap();
    for s in [2u64, 4, 8, 3, 9, 1296] {
        ok &= divisors.contains(&s);
    }
    let (t1, s_star) = tiling::t1_check(&a).unwrap();
    ok &= t1 && s_star == vec![2, 3, 4, 8, 9];
    let uns = tiling::unsupported_divisors(&a).unwrap();
    ok &= uns.contains(&(1296, UnsupportedTag::AboveAllBeta));
    ok &= r.accepted();
    let elapsed = t0.elapsed();
    report(
        "4 (72-element set)",
        ok && elapsed.as_secs_f64() < 5.0,
        &format!("mass 72, divisors exact, t1, unsupported 1296, {elapsed:?}"),
    );
}

/// Criterion 4, (T2) component as originally stated. Expected to fail:
/// taking s1 = 2 and s2 = 3 in the (T2) product condition requires
/// Phi_6 | A, but A mod 6 is pinned by the base table whose mod-6 cuboid
/// evaluation is 12 - 7 - 12 + 17 = 10, not 0. Consistently, a two-prime
/// set with (T1) and (T2) can never carry an unsupported divisor, yet 1296
/// is one. The check is kept as stated rather than weakened.
#[test]
fn acceptance_04_t2_as_stated() {
    let r = constructions::countex_72().unwrap();
    let a = NonnegMultiset::new(r.multiset.clone().unwrap()).unwrap();
    let (t2, failing) = tiling::t2_check(&a).unwrap();
    report(
        "4 ((T2) component as stated)",
        t2,
        &format!("t2 = {t2}, failing products {failing:?}"),
    );
}

/// Criterion 5: exhaustive oracle agreement. For every nonempty
/// S ⊆ D(M), M in {6, 12, 30, 36}, the brute-force oracle with mass cap 8
/// agrees with the exact solver on its whole domain.
#[test]
fn acceptance_05_oracle_equivalence() {
    let t0 = Instant::now();
    let mut instances: Vec<Vec<u64>> = Vec::new();
    for mv in [6u64, 12, 30, 36] {
        let m = CyclicModulus::factor(mv).unwrap();
        let scales: Vec<u64> = m.divisors().into_iter().filter(|&d| d >= 2).collect();
        let n = scales.len();
        for mask in 1u32..(1 << n) {
            let subset: Vec<u64> = (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| scales[i])
                .collect();
            instances.push(subset);
        }
    }
    let total = instances.len();
    let failures: Vec<String> = instances
        .par_iter()
        .filter_map(|scales| {
            let set = ScaleSet::over_lcm(scales.iter().copied()).unwrap();
            let bf = bounds::min_bruteforce(&set, 8).unwrap();
            let ex = bounds::min_exact(&set, &SolveOptions::default()).unwrap();
            let exact_value = match &ex.outcome {
                MinOutcome::Exact { value, .. } => *value,
                MinOutcome::Bounded { .. } => {
                    return Some(format!("{scales:?}: exact solver hit its cap"))
                }
            };
            // solved-instance invariants: MIN <= FIB and every applicable
            // analytic bound is a true lower bound
            if exact_value > ex.fib.value {
                return Some(format!("{scales:?}: MIN > FIB"));
            }
            for rule in &ex.bounds.rules {
                if rule.applicable && rule.value > exact_value {
                    return Some(format!(
                        "{scales:?}: rule {} = {} exceeds MIN = {exact_value}",
                        rule.name, rule.value
                    ));
                }
            }
            match bf {
                BruteOutcome::Found { value, .. } if value != exact_value => Some(format!(
                    "{scales:?}: brute force {value} vs exact {exact_value}"
                )),
                BruteOutcome::ExhaustedUpTo(cap) if exact_value <= cap => Some(format!(
                    "{scales:?}: brute force exhausted {cap} but exact = {exact_value}"
                )),
                _ => None,
            }
        })
        .collect();
    let elapsed = t0.elapsed();
    report(
        "5 (oracle equivalence)",
        failures.is_empty() && elapsed.as_secs_f64() < 600.0,
        &format!("{total} instances, failures: {failures:?}, {elapsed:?}"),
    );
}

/// Criterion 6: for 100 random 3-element scale sets over D(2^3 3^3) within
/// solver reach, the exact minimum equals the fibered bound.
#[test]
fn acceptance_06_three_divisor_spot_check() {
    let t0 = Instant::now();
    let m = CyclicModulus::factor(216).unwrap();
    let scales: Vec<u64> = m.divisors().into_iter().filter(|&d| d >= 2).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    let mut solved = 0usize;
    let mut skipped = 0usize;
    let mut attempts = 0usize;
    while solved < 100 {
        attempts += 1;
        assert!(attempts < 1000, "solver reach too small");
        let mut pick = BTreeSet::new();
        while pick.len() < 3 {
            pick.insert(scales[rng.gen_range(0..scales.len())]);
        }
        let set = ScaleSet::over_lcm(pick.iter().copied()).unwrap();
        let r = bounds::min_exact(
            &set,
            &SolveOptions {
                max_nodes: 500_000_000,
                ..Default::default()
            },
        )
        .unwrap();
        match r.outcome {
            MinOutcome::Exact { value, .. } => {
                assert_eq!(
                    value, r.fib.value,
                    "S = {pick:?}: MIN = {value} but FIB = {}",
                    r.fib.value
                );
                solved += 1;
            }
            MinOutcome::Bounded { .. } => {
                skipped += 1;
            }
        }
    }
    let elapsed = t0.elapsed();
    report(
        "6 (three-divisor spot check)",
        solved == 100,
        &format!("100 solved ({skipped} beyond reach), {elapsed:?}"),
    );
}

/// Criterion 7: decomposition round-trips. 1000 random nonnegative
/// two-prime inputs decompose with nonnegative coefficients and bit-exact
/// reconstruction; likewise for long fibers on two-prime block-divisible
/// inputs.
#[test]
fn acceptance_07_decomposition_roundtrips() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    let scales = [12u64, 18, 36, 72, 108, 200];
    for trial in 0..1000 {
        let n = scales[rng.gen_range(0..scales.len())];
        let m = CyclicModulus::factor(n).unwrap();
        let mut a = Multiset::empty(m.clone());
        for _ in 0..rng.gen_range(1..6) {
            let dir = rng.gen_range(0..2);
            let f = FiberSpec::new(&m, n, dir, rng.gen_range(0..n)).unwrap();
            let w = rng.gen_range(1i64..4);
            for e in f.elements(&m) {
                a.add_weight(e, w).unwrap();
            }
        }
        let a = NonnegMultiset::new(a).unwrap();
        let d = structure::fiber_decompose_nonneg_two_prime(&a, n).unwrap();
        assert!(
            d.is_nonnegative() && !d.has_negative_coefficient(),
            "trial {trial}"
        );
        assert_eq!(d.reconstruct().unwrap(), *a.as_multiset(), "trial {trial}");
    }
    // long fibers, two primes
    let blocks = [(36u64, 6u64), (72, 12), (72, 6), (216, 6), (200, 10)];
    for trial in 0..1000 {
        let (mv, block) = blocks[rng.gen_range(0..blocks.len())];
        let m = CyclicModulus::factor(mv).unwrap();
        let depths: Vec<u32> = (0..2)
            .map(|i| m.exponent(i) - m.valuation(block, i) + 1)
            .collect();
        let mut a = Multiset::empty(m.clone());
        for _ in 0..rng.gen_range(1..5) {
            let dir = rng.gen_range(0..2);
            let lf = LongFiberSpec::new(&m, dir, depths[dir], rng.gen_range(0..mv)).unwrap();
            let w = rng.gen_range(1i64..4);
            for e in lf.elements(&m) {
                a.add_weight(e, w).unwrap();
            }
        }
        let d = structure::long_fiber_decompose(&a, block).unwrap();
        assert!(d.is_nonnegative(), "long trial {trial} (M = {mv}, block {block})");
        assert_eq!(d.reconstruct().unwrap(), a, "long trial {trial}");
    }
    let elapsed = t0.elapsed();
    report(
        "7 (decomposition round-trips)",
        true,
        &format!("1000 + 1000 round-trips exact, {elapsed:?}"),
    );
}

/// Criterion 8: the four-prime property suite at (7, 11, 13, 17).
#[test]
fn acceptance_08_four_prime_suite() {
    let t0 = Instant::now();
    let fp = constructions::four_prime([7, 11, 13, 17], 100_000, 0xACCE_0008).unwrap();
    let mut ok = fp.report.accepted();
    ok &= fp.n == 17_017;
    // the required checks are present with the required strength
    let find = |name: &str| {
        fp.report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("missing check {name}"))
    };
    ok &= find("partition-audit").status == CheckStatus::Exact;
    for i in 1..=4 {
        ok &= find(&format!("q{i}-cardinality")).status == CheckStatus::Exact;
    }
    ok &= find("mass-is-n-cubed").status == CheckStatus::Exact;
    ok &= find("t1-accounting").status == CheckStatus::Exact;
    ok &= find("reduction-mod-n-fiber-shape").status == CheckStatus::Exact;
    ok &= find("divisor-n").status == CheckStatus::Exact;
    let sampled = find("sampled-disjointness-and-div");
    ok &= matches!(sampled.status, CheckStatus::Sampled { trials, .. } if trials >= 100_000);
    ok &= find("method2-congruences").passed;
    // the symbolic set exists and has closed-form mass N^3
    let set = fp.set.as_ref().expect("desk-scale instance materializes symbolically");
    ok &= set.mass() == (fp.n as u128).pow(3);
    let elapsed = t0.elapsed();
    report(
        "8 (four-prime suite)",
        ok && elapsed.as_secs_f64() < 300.0,
        &format!(
            "partition exact, |Q_i| exact, Phi_N exact, |A| = N^3, method 2 on all 15 subsets, \
             100k samples clean, {elapsed:?}"
        ),
    );
}

/// Criterion 9: randomized two-prime (T1)+(T2) sets (standard sets with
/// fiber-preserving relabelings plus CRT products) never have an
/// unsupported divisor; 10^4 seeded trials.
#[test]
fn acceptance_09_two_prime_no_unsupported() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0009);
    let prime_pairs = [(2u64, 3u64), (2, 5), (3, 5), (2, 7)];
    let mut checked = 0u64;
    for _ in 0..10_000 {
        let (p, q) = prime_pairs[rng.gen_range(0..prime_pairs.len())];
        let n1 = rng.gen_range(1..=3u32);
        let n2 = rng.gen_range(1..=3u32);
        let m = CyclicModulus::from_factors(vec![(p, n1), (q, n2)]).unwrap();
        // random nonempty exponent sets
        let mut exps: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); 2];
        for (i, top) in [(0usize, n1), (1, n2)] {
            for e in 1..=top {
                if rng.gen_bool(0.5) {
                    exps[i].insert(e);
                }
            }
            if exps[i].is_empty() && rng.gen_bool(0.7) {
                exps[i].insert(rng.gen_range(1..=top));
            }
        }
        if exps.iter().all(|e| e.is_empty()) {
            exps[0].insert(1);
        }
        let base = bounds::standard_set(&m, &exps).unwrap();
        // fiber-preserving relabeling: per-coordinate unit dilation plus a
        // translation (a group affinity, preserving the divisor lattice)
        let units: Vec<u64> = (0..2)
            .map(|i| loop {
                let u = rng.gen_range(1..m.prime_power(i));
                if cyclolab::zmod::gcd(u, m.prime(i)) == 1 {
                    break u;
                }
            })
            .collect();
        let shift = rng.gen_range(0..m.value());
        let mut relabeled = Multiset::empty(m.clone());
        for (x, w) in base.iter() {
            let c = m.to_coords(x);
            let new_coords: Vec<u64> = (0..2)
                .map(|i| (c.coords[i] * units[i]) % m.prime_power(i))
                .collect();
            relabeled
                .add_weight((m.from_coords(&new_coords) + shift) % m.value(), w)
                .unwrap();
        }
        let a = NonnegMultiset::new(relabeled).unwrap();
        let (t1, _) = tiling::t1_check(&a).unwrap();
        let (t2, _) = tiling::t2_check(&a).unwrap();
        assert!(t1 && t2, "generator must produce (T1)+(T2) sets");
        let uns = tiling::unsupported_divisors(&a).unwrap();
        assert!(
            uns.is_empty(),
            "two-prime (T1)+(T2) set with unsupported divisors {uns:?}"
        );
        checked += 1;
    }
    let elapsed = t0.elapsed();
    report(
        "9 (two-prime (T1)+(T2) negative result)",
        checked >= 10_000,
        &format!("{checked} trials, zero unsupported divisors, {elapsed:?}"),
    );
}

/// Criterion 10: method agreement between the remainder test and the
/// cuboid test on 10^4 random instances over M in {12, 36, 60, 72}.
#[test]
fn acceptance_10_method_agreement() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0010);
    let moduli = [12u64, 36, 60, 72];
    let mut divisible = 0u64;
    for trial in 0..10_000u64 {
        let mv = moduli[rng.gen_range(0..moduli.len())];
        let m = CyclicModulus::factor(mv).unwrap();
        let a = if rng.gen_bool(0.5) {
            // structured: signed combination of fibers at random scales
            let mut a = Multiset::empty(m.clone());
            for _ in 0..rng.gen_range(1..4) {
                let divs = m.divisors();
                let scale = divs[rng.gen_range(1..divs.len())];
                let dir = (0..m.num_primes()).find(|&i| scale % m.prime(i) == 0).unwrap();
                let f = FiberSpec::new(&m, scale, dir, rng.gen_range(0..scale)).unwrap();
                let w = rng.gen_range(-3i64..4);
                for e in f.elements(&m) {
                    a.add_weight(e, w).unwrap();
                }
            }
            a
        } else {
            Multiset::from_weights(
                m.clone(),
                (0..rng.gen_range(0..10)).map(|_| (rng.gen_range(0..mv), rng.gen_range(-4i64..5))),
            )
            .unwrap()
        };
        let divs = m.divisors();
        let s = divs[rng.gen_range(1..divs.len())];
        let by_remainder = divides(s, &a).unwrap();
        let by_cuboids = divides_via_cuboids(s, &a).unwrap();
        assert_eq!(
            by_remainder, by_cuboids,
            "trial {trial}: M = {mv}, s = {s}"
        );
        if by_remainder {
            divisible += 1;
        }
    }
    let elapsed = t0.elapsed();
    report(
        "10 (method agreement)",
        true,
        &format!("10^4 instances agree ({divisible} divisible), {elapsed:?}"),
    );
}
