//! Runs polynomial synthesis on a large stratified sample, refines against
//! held-out samples until validation is clean, and prints the resulting
//! coefficients as bit-pattern literals suitable for embedding.

use rtrig::generator::{generate, stratified_inputs, validate};
use rtrig::kernels::Func;
use rtrig::rangered::ReductionStrategy;

fn main() {
    let per_exp: u32 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(192);
    // constraints are tightest where the polynomials carry the whole
    // result, so the sparse all-exponent sample is topped up with a dense
    // one over the exponents the small path actually evaluates
    let dense = |per_exp: u32, seed: u64| -> Vec<u32> {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 32) as u32
        };
        let mut v = Vec::new();
        for e in 105..=122u32 {
            for _ in 0..per_exp {
                v.push((next() & 0x8000_0000) | (e << 23) | (next() & 0x7fffff));
            }
        }
        v
    };
    let mut train = stratified_inputs(per_exp, 0x5eed_cafe);
    train.extend(dense(3000, 0xdeb5_0000));
    train.push(0xbc67c99f);
    train.push(0x3be772b7);
    train.push(0x7dc0f718);
    train.push(0xfdbbc5d3);
    let mut checks: Vec<Vec<u32>> = [
        0x0dd_ba11u64,
        0xfeed_f00d,
        0x1234_5678,
        0xabcd_ef01,
        0x5555_aaaa,
        0x9e37_79b9,
    ]
    .iter()
    .map(|&s| stratified_inputs(per_exp, s))
    .collect();
    checks.push(dense(4000, 0xc0ffee));
    checks.push(dense(4000, 0xdecade));
    checks.push(stratified_inputs(120, 11));
    // uniform bit patterns weight the high exponents the stratified sets
    // only sample sparsely
    let uniform = |n: usize, seed: u64| -> Vec<u32> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 32) as u32
            })
            .collect()
    };
    for seed in [7u64, 41, 42, 99, 0x8841d0f2, 0x77777777] {
        checks.push(uniform(60_000, seed));
    }
    let mut cs = None;
    for iter in 1..=10 {
        eprintln!("iter {iter}: {} training inputs", train.len());
        let (c, rrep, srep) = generate(&train, ReductionStrategy::Hybrid).unwrap();
        eprintln!("  reduced rounds {} margin {:e}", rrep.lp_rounds, rrep.final_margin);
        eprintln!("  small   rounds {} margin {:e}", srep.lp_rounds, srep.final_margin);
        let mut fails: Vec<u32> = Vec::new();
        for set in &checks {
            for f in Func::ALL {
                for strat in ReductionStrategy::ALL {
                    fails.extend(validate(&c, f, set, strat).unwrap());
                }
            }
        }
        fails.sort_unstable();
        fails.dedup();
        eprintln!("  held-out failures: {}", fails.len());
        if fails.is_empty() {
            cs = Some(c);
            break;
        }
        train.extend(&fails);
    }
    let cs = cs.expect("refinement did not converge in 10 iterations");
    for (name, pp) in [("reduced", &cs.reduced), ("small", &cs.small)] {
        for (which, v) in [("sin", &pp.sin_coeffs), ("cos", &pp.cos_coeffs)] {
            println!("{name} {which}:");
            for c in v {
                println!("    f64::from_bits({:#018x}), // {c:e}", c.to_bits());
            }
        }
    }
}
