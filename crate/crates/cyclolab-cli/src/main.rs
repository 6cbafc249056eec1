//! Command-line front end: file I/O, subcommands for every operation
//! family, and DOT rendering of divisor lattices.
//!
//! Exit codes: 0 = all requested properties verified, 1 = a property
//! failed, 2 = invalid input, 3 = cap exceeded (bounded-only result).

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use cyclolab::bounds::{self, MinOutcome, SolveOptions};
use cyclolab::constructions;
use cyclolab::cyclotomic::{self, ScaleSet};
use cyclolab::multiset::{Multiset, NonnegMultiset};
use cyclolab::structure;
use cyclolab::symbolic::SymbolicMultiset;
use cyclolab::tiling;
use cyclolab::zmod::CyclicModulus;
use serde_json::json;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_PROPERTY_FAILED: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_CAP_EXCEEDED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cyclolab",
    about = "mask polynomials with prescribed cyclotomic divisors",
    version
)]
struct Cli {
    /// Emit the machine-readable JSON payload instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ScalesArg {
    /// Comma-separated scales; factored syntax is accepted (e.g. "2^9*3^6,6").
    #[arg(long, value_delimiter = ',')]
    scales: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Modulus, mass and support summary of a multiset file.
    Info { file: PathBuf },
    /// All cyclotomic divisors, the prime-power set and unsupported scales.
    Divisors {
        file: PathBuf,
        /// Emit a DOT rendering of the divisor lattice instead.
        #[arg(long)]
        dot: bool,
    },
    /// Divisor lattice rendering (DOT on stdout).
    Lattice { file: PathBuf },
    /// Test prescribed divisibility per scale.
    Check {
        file: PathBuf,
        #[command(flatten)]
        scales: ScalesArg,
        /// Cross-check with the cuboid method where feasible.
        #[arg(long)]
        cuboids: bool,
    },
    /// Exact MIN(S) with witness.
    Min {
        #[command(flatten)]
        scales: ScalesArg,
        #[arg(long, default_value_t = 10_000)]
        lcm_cap: u64,
        #[arg(long, default_value_t = 200_000_000)]
        max_nodes: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the witness multiset to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Fibered bound FIB(S) with assignment and standard-set witness.
    Fib {
        #[command(flatten)]
        scales: ScalesArg,
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Truncate a multiset relative to a scale set.
    Truncate {
        file: PathBuf,
        #[command(flatten)]
        scales: ScalesArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fiber decomposition at a scale.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        scale: Option<String>,
        /// Nonnegative decomposition (two-prime scales only).
        #[arg(long)]
        nonneg: bool,
        /// Long-fiber decomposition with this block base instead.
        #[arg(long)]
        long_block: Option<String>,
    },
    /// Run a construction generator.
    Construct {
        /// prime-power | three-primes | countex-2-3 | countex-72 |
        /// general-two-prime | four-prime
        #[arg(long)]
        kind: String,
        /// JSON parameters for the generator.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Write the produced multiset here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the construction report here.
        #[arg(long)]
        report_out: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// (T1) check.
    T1 { file: PathBuf },
    /// Full Coven-Meyerowitz report: (T1), (T2), unsupported divisors.
    T2 { file: PathBuf },
    /// Unsupported divisors with classification.
    Unsupported { file: PathBuf },
    /// Verify A + B = Z_M as a tiling.
    TilingCheck { file_a: PathBuf, file_b: PathBuf },
    /// Sands divisor-set criterion.
    Sands { file_a: PathBuf, file_b: PathBuf },
}

fn parse_scale(s: &str) -> anyhow::Result<u64> {
    let mut acc: u64 = 1;
    for part in s.split('*') {
        let part = part.trim();
        let v = if let Some((base, exp)) = part.split_once('^') {
            let b: u64 = base.trim().parse()?;
            let e: u32 = exp.trim().parse()?;
            b.checked_pow(e).ok_or_else(|| anyhow!("scale overflows"))?
        } else {
            part.parse()?
        };
        acc = acc.checked_mul(v).ok_or_else(|| anyhow!("scale overflows"))?;
    }
    Ok(acc)
}

fn parse_scales(args: &ScalesArg) -> anyhow::Result<Vec<u64>> {
    if args.scales.is_empty() {
        return Err(anyhow!("--scales must be nonempty"));
    }
    args.scales.iter().map(|s| parse_scale(s)).collect()
}

fn load_multiset(path: &PathBuf) -> anyhow::Result<Multiset> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    if v.get("terms").is_some() {
        let sym = SymbolicMultiset::from_json(&v)?;
        return Ok(sym.materialize()?);
    }
    Ok(Multiset::from_json(&v)?)
}

fn load_nonneg(path: &PathBuf) -> anyhow::Result<NonnegMultiset> {
    Ok(NonnegMultiset::new(load_multiset(path)?)?)
}

fn write_multiset(path: &PathBuf, a: &Multiset) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&a.to_json())?)?;
    Ok(())
}

fn classify_exit(e: &anyhow::Error) -> u8 {
    if let Some(le) = e.downcast_ref::<cyclolab::Error>() {
        match le {
            cyclolab::Error::CapExceeded(_) | cyclolab::Error::UseRemainderMethod => {
                EXIT_CAP_EXCEEDED
            }
            _ => EXIT_INVALID_INPUT,
        }
    } else {
        EXIT_INVALID_INPUT
    }
}

/// DOT rendering of the divisor lattice of M with marker classes. Nodes are
/// positioned by their valuation vectors and emitted in ascending order so
/// diagram diffs stay meaningful.
fn lattice_dot(
    m: &CyclicModulus,
    divisors_of_a: &BTreeSet<u64>,
    s_star: &BTreeSet<u64>,
    unsupported: &BTreeSet<u64>,
) -> String {
    let mut out = String::from("digraph divisors {\n  rankdir=BT;\n");
    out.push_str("  // green box = prime-power divisor, blue ellipse = other divisor,\n");
    out.push_str("  // red diamond = unsupported divisor, gray = not a divisor\n");
    let divisors = m.divisors();
    for &d in &divisors {
        let vals: Vec<String> = (0..m.num_primes())
            .map(|i| m.valuation(d, i).to_string())
            .collect();
        let (shape, color) = if unsupported.contains(&d) {
            ("diamond", "red")
        } else if s_star.contains(&d) {
            ("box", "green")
        } else if divisors_of_a.contains(&d) {
            ("ellipse", "blue")
        } else {
            ("ellipse", "gray")
        };
        out.push_str(&format!(
            "  \"{d}\" [shape={shape}, color={color}, pos=\"{}!\"];\n",
            vals.join(",")
        ));
    }
    for &d in &divisors {
        for i in 0..m.num_primes() {
            if let Some(next) = d.checked_mul(m.prime(i)) {
                if m.is_divisor(next) {
                    out.push_str(&format!("  \"{d}\" -> \"{next}\";\n"));
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

fn divisors_payload(a: &NonnegMultiset) -> anyhow::Result<(BTreeSet<u64>, BTreeSet<u64>, BTreeSet<u64>)> {
    let divisors: BTreeSet<u64> = cyclotomic::all_divisors(a)?.into_iter().collect();
    let s_star: BTreeSet<u64> = cyclotomic::prime_power_divisors(a)?.into_iter().collect();
    let unsupported: BTreeSet<u64> = tiling::unsupported_divisors(a)?
        .into_iter()
        .map(|(s, _)| s)
        .collect();
    Ok((divisors, s_star, unsupported))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let json_out = cli.json;
    match cli.cmd {
        Cmd::Info { file } => {
            let a = load_multiset(&file)?;
            let payload = json!({
                "modulus": a.modulus().value(),
                "factors": a.modulus().factors(),
                "mass": a.mass(),
                "support": a.support_len(),
                "is_set": a.is_set(),
                "nonnegative": a.is_nonneg(),
            });
            if json_out {
                println!("{}", serde_json::to_string_pretty(&payload)?);
            } else {
                println!(
                    "Z_{} = {:?}; mass {}, support {}, set: {}",
                    a.modulus().value(),
                    a.modulus().factors(),
                    a.mass(),
                    a.support_len(),
                    a.is_set()
                );
            }
            Ok(EXIT_OK)
        }

        Cmd::Divisors { file, dot } => {
            let a = load_nonneg(&file)?;
            let (divisors, s_star, unsupported) = divisors_payload(&a)?;
            if dot {
                print!("{}", lattice_dot(a.modulus(), &divisors, &s_star, &unsupported));
            } else if json_out {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "divisors": divisors,
                        "s_star": s_star,
                        "unsupported": unsupported,
                    }))?
                );
            } else {
                println!("divisors:     {divisors:?}");
                println!("prime powers: {s_star:?}");
                println!("unsupported:  {unsupported:?}");
            }
            Ok(EXIT_OK)
        }

        Cmd::Lattice { file } => {
            let a = load_nonneg(&file)?;
            let (divisors, s_star, unsupported) = divisors_payload(&a)?;
            print!("{}", lattice_dot(a.modulus(), &divisors, &s_star, &unsupported));
            Ok(EXIT_OK)
        }

        Cmd::Check { file, scales, cuboids } => {
            let a = load_multiset(&file)?;
            let scales = parse_scales(&scales)?;
            let mut all_ok = true;
            let mut results = Vec::new();
            for &s in &scales {
                let by_remainder = cyclotomic::divides(s, &a)?;
                let by_cuboids = if cuboids {
                    match cyclotomic::divides_via_cuboids(s, &a) {
                        Ok(v) => {
                            if v != by_remainder {
                                return Err(anyhow!(
                                    "method disagreement at scale {s}: remainder {by_remainder}, cuboids {v}"
                                ));
                            }
                            Some(v)
                        }
                        Err(cyclolab::Error::UseRemainderMethod) => None,
                        Err(e) => return Err(e.into()),
                    }
                } else {
                    None
                };
                all_ok &= by_remainder;
                results.push(json!({
                    "scale": s,
                    "divides": by_remainder,
                    "cuboid_method": by_cuboids,
                }));
                if !json_out {
                    println!("Phi_{s} | A: {by_remainder}");
                }
            }
            if json_out {
                println!("{}", serde_json::to_string_pretty(&json!(results))?);
            }
            Ok(if all_ok { EXIT_OK } else { EXIT_PROPERTY_FAILED })
        }

        Cmd::Min {
            scales,
            lcm_cap,
            max_nodes,
            workers,
            witness_out,
        } => {
            let scales = parse_scales(&scales)?;
            let set = ScaleSet::over_lcm(scales.iter().copied())?;
            let opts = SolveOptions {
                lcm_cap,
                max_nodes,
                workers,
            };
            let r = bounds::min_exact(&set, &opts)?;
            let (min_v, witness_json, code) = match &r.outcome {
                MinOutcome::Exact { value, witness } => {
                    if let Some(path) = &witness_out {
                        write_multiset(path, witness.as_multiset())?;
                    }
                    (json!(value), Some(witness.to_json()), EXIT_OK)
                }
                MinOutcome::Bounded { lower, upper } => {
                    eprintln!("bounded-only: MIN(S) in [{lower}, {upper}]");
                    (json!(null), None, EXIT_CAP_EXCEEDED)
                }
            };
            let payload = json!({
                "scales": scales,
                "min": min_v,
                "fib": r.fib.value,
                "sigma": r.fib.sigma.to_json(set.modulus()),
                "witness": witness_json,
                "bounds": r.bounds.to_json()["rules"],
            });
            if json_out {
                println!("{}", serde_json::to_string_pretty(&payload)?);
            } else {
                match &r.outcome {
                    MinOutcome::Exact { value, .. } => {
                        println!("MIN(S) = {value} (FIB = {})", r.fib.value)
                    }
                    MinOutcome::Bounded { lower, upper } => {
                        println!("MIN(S) in [{lower}, {upper}] (bounded only)")
                    }
                }
            }
            Ok(code)
        }

        Cmd::Fib { scales, witness_out } => {
            let scales = parse_scales(&scales)?;
            let set = ScaleSet::over_lcm(scales.iter().copied())?;
            let f = bounds::fib(&set)?;
            if let Some(path) = &witness_out {
                write_multiset(path, f.witness.as_multiset())?;
            }
            if json_out {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "scales": scales,
                        "fib": f.value,
                        "sigma": f.sigma.to_json(set.modulus()),
                        "witness": f.witness.to_json(),
                    }))?
                );
            } else {
                println!("FIB(S) = {}", f.value);
            }
            Ok(EXIT_OK)
        }

        Cmd::Truncate { file, scales, out } => {
            let a = load_multiset(&file)?;
            let scales = parse_scales(&scales)?;
            let set = ScaleSet::new(a.modulus().clone(), scales)?;
            let t = structure::truncate(&a, &set)?;
            if let Some(path) = &out {
                write_multiset(path, &t.truncated)?;
            }
            let payload = json!({
                "modulus": t.truncated.modulus().value(),
                "mass": t.truncated.mass(),
                "scale_map": t.scale_map,
                "truncated": t.truncated.to_json(),
            });
            if json_out {
                println!("{}", serde_json::to_string_pretty(&payload)?);
            } else {
                println!(
                    "truncated to Z_{}, scale map {:?}",
                    t.truncated.modulus().value(),
                    t.scale_map
                );
            }
            Ok(EXIT_OK)
        }

        Cmd::Decompose {
            file,
            scale,
            nonneg,
            long_block,
        } => {
            let a = load_multiset(&file)?;
            let d = if let Some(block) = long_block {
                structure::long_fiber_decompose(&a, parse_scale(&block)?)?
            } else {
                let scale =
                    parse_scale(&scale.ok_or_else(|| anyhow!("--scale or --long-block required"))?)?;
                if nonneg {
                    structure::fiber_decompose_nonneg_two_prime(&NonnegMultiset::new(a)?, scale)?
                } else {
                    structure::fiber_decompose(&a, scale)?
                }
            };
            println!("{}", serde_json::to_string_pretty(&d.to_json())?);
            Ok(EXIT_OK)
        }

        Cmd::Construct {
            kind,
            params,
            out,
            report_out,
            trials,
            seed,
        } => {
            let p: serde_json::Value = serde_json::from_str(&params)?;
            let geti = |k: &str| -> anyhow::Result<u64> {
                p.get(k)
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| anyhow!("missing construction parameter {k}"))
            };
            let (report, symbolic): (constructions::ConstructionReport, Option<SymbolicMultiset>) =
                match kind.as_str() {
                    "prime-power" => {
                        let exps: Vec<u32> = p
                            .get("exponents")
                            .and_then(|v| v.as_array())
                            .ok_or_else(|| anyhow!("missing exponents"))?
                            .iter()
                            .filter_map(|x| x.as_u64().map(|v| v as u32))
                            .collect();
                        (constructions::prime_power_standard(geti("p")?, &exps)?, None)
                    }
                    "three-primes" => (
                        constructions::example_three_primes(geti("p1")?, geti("p2")?, geti("p3")?)?,
                        None,
                    ),
                    "countex-2-3" => (
                        constructions::countex_2_3(geti("n")? as u32, geti("m")? as u32)?,
                        None,
                    ),
                    "countex-72" => (constructions::countex_72()?, None),
                    "general-two-prime" => {
                        (constructions::general_two_prime(geti("p")?, geti("q")?)?, None)
                    }
                    "four-prime" => {
                        let ps = p
                            .get("primes")
                            .and_then(|v| v.as_array())
                            .ok_or_else(|| anyhow!("missing primes"))?;
                        if ps.len() != 4 {
                            return Err(anyhow!("need exactly 4 primes"));
                        }
                        let arr = [
                            ps[0].as_u64().unwrap_or(0),
                            ps[1].as_u64().unwrap_or(0),
                            ps[2].as_u64().unwrap_or(0),
                            ps[3].as_u64().unwrap_or(0),
                        ];
                        let fp = constructions::four_prime(arr, trials, seed)?;
                        (fp.report, fp.set)
                    }
                    other => return Err(anyhow!("unknown construction kind: {other}")),
                };
            if let Some(path) = &out {
                if let Some(a) = &report.multiset {
                    write_multiset(path, a)?;
                } else if let Some(s) = &symbolic {
                    std::fs::write(path, serde_json::to_string_pretty(&s.to_json())?)?;
                }
            }
            if let Some(path) = &report_out {
                std::fs::write(path, serde_json::to_string_pretty(&report.to_json())?)?;
            }
            if json_out {
                println!("{}", serde_json::to_string_pretty(&report.to_json())?);
            } else {
                for c in &report.checks {
                    println!(
                        "[{}] {} {}",
                        if c.passed { "ok" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
                println!("accepted: {}", report.accepted());
            }
            Ok(if report.accepted() {
                EXIT_OK
            } else {
                EXIT_PROPERTY_FAILED
            })
        }

        Cmd::T1 { file } => {
            let a = load_nonneg(&file)?;
            let (t1, s_star) = tiling::t1_check(&a)?;
            if json_out {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"t1": t1, "s_star": s_star}))?
                );
            } else {
                println!("t1: {t1}  (S_A^* = {s_star:?})");
            }
            Ok(if t1 { EXIT_OK } else { EXIT_PROPERTY_FAILED })
        }

        Cmd::T2 { file } => {
            let a = load_nonneg(&file)?;
            let report = tiling::cm_report(&a)?;
            if json_out {
                println!("{}", serde_json::to_string_pretty(&report.to_json())?);
            } else {
                println!("t1: {}", report.t1);
                println!("t2: {} (failing: {:?})", report.t2, report.t2_failing);
                println!("unsupported: {:?}", report.unsupported);
            }
            Ok(if report.t1 && report.t2 {
                EXIT_OK
            } else {
                EXIT_PROPERTY_FAILED
            })
        }

        Cmd::Unsupported { file } => {
            let a = load_nonneg(&file)?;
            let uns = tiling::unsupported_divisors(&a)?;
            if json_out {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!(uns
                        .iter()
                        .map(|(s, t)| json!({"scale": s, "tag": t.as_str()}))
                        .collect::<Vec<_>>()))?
                );
            } else {
                for (s, t) in &uns {
                    println!("{s}: {}", t.as_str());
                }
                if uns.is_empty() {
                    println!("none");
                }
            }
            Ok(EXIT_OK)
        }

        Cmd::TilingCheck { file_a, file_b } => {
            let a = load_nonneg(&file_a)?;
            let b = load_nonneg(&file_b)?;
            let ok = tiling::tiling_check(&a, &b)?;
            let partition = if ok {
                Some(tiling::prime_power_partition_check(&a, &b)?)
            } else {
                None
            };
            if json_out {
                println!(
                    "{}",
                    serde_json::to_string_pretty(
                        &json!({"tiling": ok, "prime_power_partition": partition})
                    )?
                );
            } else {
                println!("tiling: {ok} (prime-power partition: {partition:?})");
            }
            Ok(if ok { EXIT_OK } else { EXIT_PROPERTY_FAILED })
        }

        Cmd::Sands { file_a, file_b } => {
            let a = load_nonneg(&file_a)?;
            let b = load_nonneg(&file_b)?;
            let r = tiling::sands_check(&a, &b)?;
            if json_out {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "ok": r.ok,
                        "intersection": r.intersection,
                        "div_a_len": r.div_a_len,
                        "div_b_len": r.div_b_len,
                    }))?
                );
            } else {
                println!("Div(A) ∩ Div(B) = {:?}: {}", r.intersection, r.ok);
            }
            Ok(if r.ok { EXIT_OK } else { EXIT_PROPERTY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_exit(&e))
        }
    }
}
