//! Command-line driver: verify kernels against the oracle, benchmark the
//! reduction strategies, and generate the text artifacts.
//!
//! Exit codes: 0 pass, 1 mismatch or infeasible generation, 2 usage errors
//! or missing artifacts. All reports are JSON lines.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rtrig::artifacts;
use rtrig::fpcore::{FpFormat, RoundingMode};
use rtrig::generator;
use rtrig::kernels::{self, CoeffSet, Func};
use rtrig::oracle;
use rtrig::rangered::{pi_constants, ReductionStrategy};
use rtrig::tables::sin_table;

#[derive(Parser)]
#[command(name = "rtrig", about = "correctly rounded binary32 trigonometry")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare kernel output against the oracle over a chosen input scope.
    Verify(VerifyArgs),
    /// Measure per-strategy latency on a fixed input stream.
    Bench(BenchArgs),
    /// Emit the constants, table, or coefficient artifact files.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// sin, cos, or tan
    #[arg(long)]
    func: Func,
    /// Target format total bits: N or N..M (8 exponent bits throughout)
    #[arg(long, default_value = "32")]
    fmt: String,
    /// rne, rna, rtz, rtp, rtn, or all
    #[arg(long, default_value = "all")]
    mode: String,
    /// fpv1, fpv2, int, hybrid, or all
    #[arg(long, default_value = "hybrid")]
    strategy: String,
    /// exhaustive, random:N:SEED, or file:PATH (hex patterns, one per line)
    #[arg(long, default_value = "random:100000:42")]
    scope: String,
    /// Worker threads for oracle evaluation
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Binary cache of oracle results, read and extended in place
    #[arg(long)]
    oracle_cache: Option<PathBuf>,
    /// Directory of generated artifacts; coefficients are loaded from it
    /// instead of the embedded set
    #[arg(long)]
    artifacts: Option<PathBuf>,
    /// Write report lines here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    func: Func,
    #[arg(long, default_value = "all")]
    strategy: String,
    /// uniform, small (|x| < 2^30), or large
    #[arg(long, default_value = "uniform")]
    workload: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Repetitions; the median is reported
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// constants, table, or poly
    what: String,
    /// Output directory
    #[arg(long, default_value = "artifacts")]
    out: PathBuf,
    /// Stratified training draws per binary32 exponent (poly only)
    #[arg(long, default_value_t = 192)]
    per_exp: u32,
}

#[derive(Serialize)]
struct FailureRecord {
    input: String,
    expected: String,
    got: String,
}

#[derive(Serialize)]
struct VerifyReport {
    #[serde(rename = "type")]
    kind: &'static str,
    func: &'static str,
    fmt: u32,
    mode: &'static str,
    strategy: &'static str,
    total: usize,
    mismatches: usize,
    first_failures: Vec<FailureRecord>,
    wall_time_seconds: f64,
}

#[derive(Serialize)]
struct BenchReport {
    #[serde(rename = "type")]
    kind: &'static str,
    func: &'static str,
    workload: String,
    n: usize,
    reps: usize,
    ns_per_call: HashMap<&'static str, f64>,
    hybrid_vs_fpv1: Option<f64>,
    hybrid_vs_int: Option<f64>,
    sink: String,
    note: &'static str,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(code)
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Generate(a) => cmd_generate(a),
    };
    std::process::exit(code)
}

fn parse_fmt_range(s: &str) -> Vec<FpFormat> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let lo: u32 = lo.parse().unwrap_or_else(|_| fail(2, format!("bad format {s:?}")));
    let hi: u32 = hi.parse().unwrap_or_else(|_| fail(2, format!("bad format {s:?}")));
    if lo > hi {
        fail(2, format!("empty format range {s:?}"));
    }
    (lo..=hi)
        .map(|n| FpFormat::new(n).unwrap_or_else(|e| fail(2, format!("{e:?}"))))
        .collect()
}

fn parse_modes(s: &str) -> Vec<RoundingMode> {
    if s == "all" {
        return RoundingMode::IEEE.to_vec();
    }
    s.split(',')
        .map(|m| m.parse().unwrap_or_else(|e| fail(2, e)))
        .collect()
}

fn parse_strategies(s: &str) -> Vec<ReductionStrategy> {
    if s == "all" {
        return ReductionStrategy::ALL.to_vec();
    }
    s.split(',')
        .map(|m| m.parse().unwrap_or_else(|e| fail(2, e)))
        .collect()
}

/// Patterns of `fmt` selected by the scope string. Random draws come from a
/// fixed-increment LCG so runs are reproducible given the seed.
fn scope_patterns(scope: &str, fmt: FpFormat) -> Vec<u32> {
    if scope == "exhaustive" {
        let n = fmt.total_bits();
        return if n == 32 {
            (0..=u32::MAX).collect()
        } else {
            (0..1u64 << n).map(|p| p as u32).collect()
        };
    }
    if let Some(rest) = scope.strip_prefix("random:") {
        let (n, seed) = rest
            .split_once(':')
            .unwrap_or_else(|| fail(2, format!("scope {scope:?} needs random:N:SEED")));
        let n: usize = n.parse().unwrap_or_else(|_| fail(2, "bad random count"));
        let seed: u64 = seed.parse().unwrap_or_else(|_| fail(2, "bad random seed"));
        let mask = if fmt.total_bits() == 32 {
            u32::MAX
        } else {
            (1u32 << fmt.total_bits()) - 1
        };
        let mut state = seed;
        return (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 32) as u32 & mask
            })
            .collect();
    }
    if let Some(path) = scope.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .unwrap_or_else(|e| fail(2, format!("cannot read {path}: {e}")));
        return text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                u32::from_str_radix(l.trim_start_matches("0x"), 16)
                    .unwrap_or_else(|_| fail(2, format!("bad pattern {l:?} in {path}")))
            })
            .collect();
    }
    fail(2, format!("unknown scope {scope:?}"))
}

fn load_coeffs(dir: Option<&Path>) -> CoeffSet {
    let Some(dir) = dir else {
        return kernels::coeffs().clone();
    };
    for name in ["constants.txt", "sintable.txt", "coeffs.txt"] {
        if !dir.join(name).exists() {
            fail(2, format!("missing artifact {}", dir.join(name).display()));
        }
    }
    let text = std::fs::read_to_string(dir.join("coeffs.txt"))
        .unwrap_or_else(|e| fail(2, format!("cannot read coefficients: {e}")));
    artifacts::parse_coeffs(&text, sin_table())
        .unwrap_or_else(|e| fail(2, format!("bad coefficient file: {e}")))
}

/// 34-bit oracle results for every pattern, cache-first. The cache maps
/// widened binary32 bits of (func, x) pairs, so it is per function; misses
/// are computed and the merged cache is written back.
fn oracle_results(
    func: Func,
    inputs: &[u32],
    jobs: usize,
    cache_path: Option<&Path>,
) -> HashMap<u32, f64> {
    let mut map: HashMap<u32, f64> = HashMap::new();
    if let Some(p) = cache_path {
        if p.exists() {
            for (k, v) in oracle::cache::read_cache(p)
                .unwrap_or_else(|e| fail(2, format!("cannot read cache: {e}")))
            {
                map.insert(k, v);
            }
        }
    }
    let mut missing: Vec<u32> = inputs
        .iter()
        .copied()
        .filter(|b| !map.contains_key(b))
        .collect();
    missing.sort_unstable();
    missing.dedup();
    let jobs = jobs.max(1).min(missing.len().max(1));
    let chunk = missing.len().div_ceil(jobs);
    let computed: Vec<(u32, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = missing
            .chunks(chunk.max(1))
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|&b| {
                            let r = oracle::eval34(func, b)
                                .unwrap_or_else(|e| fail(1, format!("oracle: {e:?}")));
                            (b, r)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    map.extend(computed.iter().copied());
    if let Some(p) = cache_path {
        if !computed.is_empty() {
            let mut all: Vec<(u32, f64)> = map.iter().map(|(&k, &v)| (k, v)).collect();
            all.sort_unstable_by_key(|r| r.0);
            oracle::cache::write_cache(p, &all)
                .unwrap_or_else(|e| fail(2, format!("cannot write cache: {e}")));
        }
    }
    map
}

fn emit_line(out: &mut Option<std::fs::File>, line: &str) {
    match out {
        Some(f) => writeln!(f, "{line}").unwrap_or_else(|e| fail(2, e)),
        None => println!("{line}"),
    }
}

fn cmd_verify(a: VerifyArgs) -> i32 {
    let fmts = parse_fmt_range(&a.fmt);
    let modes = parse_modes(&a.mode);
    let strategies = parse_strategies(&a.strategy);
    let cs = load_coeffs(a.artifacts.as_deref());
    let mut out = a.out.as_ref().map(|p| {
        std::fs::File::create(p).unwrap_or_else(|e| fail(2, format!("cannot create output: {e}")))
    });
    let mut any_mismatch = false;
    for fmt in fmts {
        let start = Instant::now();
        let patterns = scope_patterns(&a.scope, fmt);
        // narrow-format patterns widen exactly to binary32, which is what
        // both the kernel and the oracle consume
        let widened: Vec<u32> = patterns
            .iter()
            .map(|&p| (fmt.to_f64(p) as f32).to_bits())
            .collect();
        let oracle34 = oracle_results(a.func, &widened, a.jobs, a.oracle_cache.as_deref());
        for &strategy in &strategies {
            let kernel34: Vec<f64> = widened
                .iter()
                .map(|&wb| kernels::eval34_with(a.func, wb, strategy, &cs))
                .collect();
            for &mode in &modes {
                let mut mismatches = 0usize;
                let mut first_failures = Vec::new();
                for (i, &p) in patterns.iter().enumerate() {
                    let want = rtrig::fpcore::round_from_34(oracle34[&widened[i]], fmt, mode);
                    let got = rtrig::fpcore::round_from_34(kernel34[i], fmt, mode);
                    if want != got {
                        mismatches += 1;
                        if first_failures.len() < 100 {
                            first_failures.push(FailureRecord {
                                input: format!("{p:#x}"),
                                expected: format!("{want:#x}"),
                                got: format!("{got:#x}"),
                            });
                        }
                    }
                }
                any_mismatch |= mismatches > 0;
                let report = VerifyReport {
                    kind: "verify",
                    func: a.func.name(),
                    fmt: fmt.total_bits(),
                    mode: mode.short_name(),
                    strategy: strategy.name(),
                    total: patterns.len(),
                    mismatches,
                    first_failures,
                    wall_time_seconds: start.elapsed().as_secs_f64(),
                };
                emit_line(&mut out, &serde_json::to_string(&report).unwrap());
            }
        }
    }
    if any_mismatch {
        1
    } else {
        0
    }
}

fn cmd_bench(a: BenchArgs) -> i32 {
    let strategies = parse_strategies(&a.strategy);
    if a.reps < 5 {
        fail(2, "bench needs at least 5 repetitions");
    }
    let mut state = a.seed;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 32) as u32
    };
    let inputs: Vec<u32> = (0..a.n)
        .map(|_| {
            let b = next();
            match a.workload.as_str() {
                "uniform" => b,
                // finite, exponent below/at-or-above the 2^30 threshold
                "small" => (b & 0x8000_0000) | ((b >> 8) % 157) << 23 | (b & 0x7fffff),
                "large" => (b & 0x8000_0000) | (157 + (b >> 8) % 98) << 23 | (b & 0x7fffff),
                other => fail(2, format!("unknown workload {other:?}")),
            }
        })
        .collect();
    let mut ns_per_call = HashMap::new();
    let mut sink = 0.0f64;
    for &strategy in &strategies {
        let mut times: Vec<f64> = (0..a.reps)
            .map(|_| {
                let t0 = Instant::now();
                let mut acc = 0.0f64;
                for &b in &inputs {
                    acc += kernels::eval34(a.func, b, strategy);
                }
                let dt = t0.elapsed().as_secs_f64();
                sink += acc;
                dt * 1e9 / a.n as f64
            })
            .collect();
        times.sort_by(f64::total_cmp);
        ns_per_call.insert(strategy.name(), times[times.len() / 2]);
    }
    let ratio = |num: &str, den: &str| -> Option<f64> {
        Some(ns_per_call.get(num)? / ns_per_call.get(den)?)
    };
    let report = BenchReport {
        kind: "bench",
        func: a.func.name(),
        workload: a.workload,
        n: a.n,
        reps: a.reps,
        hybrid_vs_fpv1: ratio("fpv1", "hybrid"),
        hybrid_vs_int: ratio("int", "hybrid"),
        ns_per_call,
        sink: format!("{:#x}", sink.to_bits()),
        note: "wall-clock medians; expect machine-dependent variance",
    };
    let mut out = a.out.as_ref().map(|p| {
        std::fs::File::create(p).unwrap_or_else(|e| fail(2, format!("cannot create output: {e}")))
    });
    emit_line(&mut out, &serde_json::to_string(&report).unwrap());
    0
}

fn cmd_generate(a: GenerateArgs) -> i32 {
    std::fs::create_dir_all(&a.out).unwrap_or_else(|e| fail(2, format!("cannot create out dir: {e}")));
    let write = |name: &str, text: &str| {
        std::fs::write(a.out.join(name), text)
            .unwrap_or_else(|e| fail(2, format!("cannot write {name}: {e}")));
    };
    match a.what.as_str() {
        "constants" => {
            write("constants.txt", &artifacts::emit_constants(pi_constants()));
            println!("{}", serde_json::to_string(&serde_json::json!({
                "type": "generate", "what": "constants", "lines": 26,
            })).unwrap());
            0
        }
        "table" => {
            write("sintable.txt", &artifacts::emit_table(sin_table()));
            let checksum = format!("{:#018x}", artifacts::table_checksum(sin_table()));
            println!("{}", serde_json::to_string(&serde_json::json!({
                "type": "generate", "what": "table", "entries": 512, "checksum": checksum,
            })).unwrap());
            0
        }
        "poly" => {
            let train = generator::stratified_inputs(a.per_exp, 0x5eed_cafe);
            match generator::generate(&train, ReductionStrategy::Hybrid) {
                Ok((cs, rrep, srep)) => {
                    let mut failures = 0usize;
                    for f in Func::ALL {
                        failures += generator::validate(&cs, f, &train, ReductionStrategy::Hybrid)
                            .unwrap_or_else(|e| fail(1, format!("{e}")))
                            .len();
                    }
                    write("coeffs.txt", &artifacts::emit_coeffs(&cs, sin_table()));
                    println!("{}", serde_json::to_string(&serde_json::json!({
                        "type": "generate", "what": "poly",
                        "reduced": rrep, "small": srep,
                        "validation_failures": failures,
                    })).unwrap());
                    if failures > 0 {
                        1
                    } else {
                        0
                    }
                }
                Err(e) => {
                    println!("{}", serde_json::to_string(&serde_json::json!({
                        "type": "generate", "what": "poly", "error": e.to_string(),
                    })).unwrap());
                    1
                }
            }
        }
        other => fail(2, format!("unknown artifact kind {other:?}")),
    }
}
