//! Coefficient synthesis: rounding intervals become linear constraints on
//! the joint sin/cos coefficient vector, solved as a max-margin LP.
//!
//! Output compensation is linear in both polynomials' coefficients, so each
//! input contributes one two-sided constraint on a_sin*P_s(x') +
//! a_cos*P_c(x'). tan emits no constraints of its own: its numerator and
//! denominator are already pinned by the sin/cos constraints at the same
//! reduced points, and exhaustive validation is the authority for the
//! quotient.
//!
//! The LP is solved in floating point over variables scaled to the domain
//! half-width (so every basis value stays in [-1, 1]) with each constraint
//! normalized to unit half-width; the solved coefficients are then
//! re-checked against every constraint in exact rational arithmetic.

use crate::fpcore::{decode32, exp2i, FpFormat};
use crate::kernels::{self, CoeffSet, Func};
use crate::oracle;
use crate::poly::{eval_cos_poly, eval_sin_poly, PolyPair};
use crate::rangered::{pi_over_128, reduce, ReductionStrategy};
use crate::tables::sin_table;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::Serialize;

/// Which polynomial pair a constraint belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// [-pi/512, pi/512], reached through range reduction.
    Reduced,
    /// [-pi/128, pi/128], evaluated directly.
    Small,
}

impl Domain {
    pub fn half_width(self) -> f64 {
        match self {
            // the reduction fraction can overshoot pi/512 by a relative 2^-40
            Domain::Reduced => std::f64::consts::PI / 512.0 * (1.0 + exp2i(-40)),
            Domain::Small => pi_over_128(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub xp: f64,
    /// Multiplier on P_s(xp); exactly the value the kernel multiplies by.
    pub a_sin: f64,
    /// Multiplier on P_c(xp).
    pub a_cos: f64,
    /// Shrunk bounds: the compensated value must satisfy lo <= v <= hi.
    /// tan rows are one-sided: exactly one bound is infinite.
    pub lo: f64,
    pub hi: f64,
    /// Margin unit for LP normalization: half the interval width, or the
    /// equivalent scale for one-sided tan rows.
    pub sigma: f64,
    pub origin: (Func, u32),
    pub domain: Domain,
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub constraints: Vec<Constraint>,
    pub sin_terms: usize,
    pub cos_terms: usize,
    pub domain: Domain,
}

#[derive(Debug, Serialize)]
pub struct GenReport {
    pub sin_degree: usize,
    pub cos_degree: usize,
    pub constraint_count: usize,
    pub lp_rounds: usize,
    pub final_margin: f64,
    pub hard_inputs: Vec<u32>,
    pub validation_failures: usize,
}

#[derive(Debug)]
pub enum GenError {
    Oracle(oracle::EscalationExceeded),
    /// The max-margin LP came back with a nonpositive margin: some subset of
    /// constraints cannot be satisfied at these degrees.
    Infeasible {
        margin: f64,
        witnesses: Vec<(Func, u32)>,
    },
    /// The exact rational re-check rejected a constraint the float LP
    /// claimed to satisfy.
    RecheckFailed { origin: (Func, u32) },
    RoundsExhausted,
    /// The float simplex panicked (for example on a singular basis).
    Solver(String),
}

impl std::fmt::Display for GenError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenError::Oracle(e) => write!(f, "oracle escalation exceeded: {e}"),
            GenError::Infeasible { margin, witnesses } => write!(
                f,
                "LP infeasible (margin {margin:e}); {} witnesses; consider raising degrees",
                witnesses.len()
            ),
            GenError::RecheckFailed { origin } => {
                write!(f, "exact re-check failed at {:?} {:#x}", origin.0, origin.1)
            }
            GenError::RoundsExhausted => write!(f, "LP sampling did not settle in 50 rounds"),
            GenError::Solver(msg) => write!(f, "LP solver failure: {msg}"),
        }
    }
}

impl std::error::Error for GenError {}

impl From<oracle::EscalationExceeded> for GenError {
    fn from(e: oracle::EscalationExceeded) -> Self {
        GenError::Oracle(e)
    }
}

/// Two binary64 ulps of the larger bound magnitude: absorbs the runtime
/// Horner/compensation rounding that the real-arithmetic LP does not model.
fn margin(lo: f64, hi: f64) -> f64 {
    let m = lo.abs().max(hi.abs());
    2.0 * (m.next_up() - m)
}

/// Derives one constraint per polynomial-path input; exact-path inputs
/// (zeros, specials, tiny) contribute nothing. Inputs whose interval closes
/// under the margin shrink come back in the hard list.
pub fn make_constraints(
    f: Func,
    inputs: &[u32],
    strategy: ReductionStrategy,
) -> Result<(Vec<Constraint>, Vec<u32>), GenError> {
    let t32 = FpFormat::binary32();
    let table = sin_table();
    let mut out = Vec::new();
    let mut hard = Vec::new();
    for &xb in inputs {
        let t = decode32(xb);
        if t.is_nan || t.is_inf || t.is_zero {
            continue;
        }
        let x = t32.to_f64(xb);
        if x.abs() < exp2i(kernels::TINY_CUTOFF_EXP) {
            continue;
        }
        let iv = oracle::rounding_interval(f, xb)?;
        let mu = margin(iv.lo, iv.hi);
        let (lo, hi) = (iv.lo + mu, iv.hi - mu);
        if lo > hi {
            hard.push(xb);
            continue;
        }
        let small = x.abs() < pi_over_128();
        // multipliers of P_s and P_c in the sin and cos compensations
        let (ss, sc, cs, cc, xp, domain) = if small {
            (1.0, 0.0, 0.0, 1.0, x, Domain::Small)
        } else {
            let red = reduce(x, strategy);
            let se = table.sin_entry(red.kp);
            let ce = table.cos_entry(red.kp);
            (ce, se, -se, ce, red.xp, Domain::Reduced)
        };
        if f == Func::Tan {
            // linearize l <= S/C <= h through the sign of C: two one-sided
            // rows per input; the multiplier rounding here is why the tan
            // margin is doubled, and exhaustive validation stays the
            // authority for the quotient
            let c_est = oracle::eval34(Func::Cos, xb)?;
            let sigma = (hi - lo).abs() / 2.0 * c_est.abs();
            let mu_t = 2.0 * mu * c_est.abs();
            let pos = c_est > 0.0;
            for (bound, upper_when_pos) in [(lo, false), (hi, true)] {
                let a_sin = ss - bound * cs;
                let a_cos = sc - bound * cc;
                let upper = upper_when_pos == pos;
                let (lo, hi) = if upper {
                    (f64::NEG_INFINITY, -mu_t)
                } else {
                    (mu_t, f64::INFINITY)
                };
                out.push(Constraint {
                    xp,
                    a_sin,
                    a_cos,
                    lo,
                    hi,
                    sigma,
                    origin: (f, xb),
                    domain,
                });
            }
            continue;
        }
        let (a_sin, a_cos) = match f {
            Func::Sin => (ss, sc),
            Func::Cos => (cs, cc),
            Func::Tan => unreachable!(),
        };
        let sigma = (hi - lo) / 2.0;
        out.push(Constraint {
            xp,
            a_sin,
            a_cos,
            lo,
            hi,
            sigma,
            origin: (f, xb),
            domain,
        });
    }
    Ok((out, hard))
}

/// Compensated value in the kernel's exact operation order: the two rounded
/// products and one rounded sum the runtime performs.
fn eval_constraint(c: &Constraint, pp: &PolyPair) -> f64 {
    let s = eval_sin_poly(pp, c.xp);
    let cc = eval_cos_poly(pp, c.xp);
    c.a_cos * cc + c.a_sin * s
}

fn basis_powers(z: f64, sin_terms: usize, cos_terms: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(sin_terms + cos_terms);
    for k in 0..sin_terms {
        v.push(z.powi(2 * k as i32 + 1));
    }
    for k in 0..cos_terms {
        v.push(z.powi(2 * k as i32));
    }
    v
}

/// One float LP solve over the given active constraints, maximizing the
/// normalized margin.
///
/// Solved as a correction to reference (Taylor) coefficients: the simplex
/// works in double precision, and in absolute coefficient space the
/// interval half-widths sit ~2^-27 below the constraint values, far under
/// any float LP tolerance. With the reference value subtracted the
/// right-hand sides are interval-sized, the correction variables are scaled
/// to O(1), and the margin is numerically visible.
fn lp_solve_active(
    p: &LpProblem,
    active: &[usize],
    shifts: &[(f64, f64)],
) -> Result<(PolyPair, f64), GenError> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
    let h = p.domain.half_width();
    let nv = p.sin_terms + p.cos_terms;
    // reference coefficients in domain-scaled units u_k = c_k * h^deg(k)
    let taylor_sin = [1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0];
    let taylor_cos = [1.0, -0.5, 1.0 / 24.0, -1.0 / 720.0];
    let mut u_ref = Vec::with_capacity(nv);
    for k in 0..p.sin_terms {
        u_ref.push(taylor_sin[k] * h.powi(2 * k as i32 + 1));
    }
    for k in 0..p.cos_terms {
        u_ref.push(taylor_cos[k] * h.powi(2 * k as i32));
    }
    // correction variable scale: g_k = (u_k - u_ref_k) / CORR
    const CORR: f64 = 9.5367431640625e-7; // 2^-20

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    // minilp's handling of fully free variables is unreliable (spurious
    // Unbounded), so box everything; the boxes are far outside any
    // correction the intervals allow.
    let vars: Vec<Variable> = (0..nv).map(|_| lp.add_var(0.0, (-16.0, 16.0))).collect();
    let delta = lp.add_var(1.0, (0.0, 1e3));
    for &i in active {
        let c = &p.constraints[i];
        let sigma = c.sigma;
        debug_assert!(sigma > 0.0);
        let phi = basis_powers(c.xp / h, p.sin_terms, p.cos_terms);
        let mut coefs = Vec::with_capacity(nv);
        let mut t = 0.0f64;
        for (k, &b) in phi.iter().enumerate() {
            let a = if k < p.sin_terms { c.a_sin } else { c.a_cos };
            coefs.push(a * b);
            t = (a * b).mul_add(u_ref[k], t);
        }
        let mut maxc = 1.0f64;
        for &v in &coefs {
            maxc = maxc.max((v * CORR / sigma).abs());
        }
        let sc = 1.0 / maxc;
        let row: Vec<(Variable, f64)> = coefs
            .iter()
            .enumerate()
            .map(|(k, &v)| (vars[k], v * CORR / sigma * sc))
            .collect();
        // lo/hi and t agree to interval scale, so the subtractions are exact
        // shifts tighten rows the float solver previously left violated
        if c.lo.is_finite() {
            let mut lo_row = row.clone();
            lo_row.push((delta, -sc));
            lp.add_constraint(
                &lo_row,
                ComparisonOp::Ge,
                ((c.lo - t) / sigma + shifts[i].0) * sc,
            );
        }
        if c.hi.is_finite() {
            let mut hi_row = row;
            hi_row.push((delta, sc));
            lp.add_constraint(
                &hi_row,
                ComparisonOp::Le,
                ((c.hi - t) / sigma - shifts[i].1) * sc,
            );
        }
    }
    let solved = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| lp.solve()))
        .map_err(|_| GenError::Solver("simplex panic (singular basis)".into()))?;
    let sol = match solved {
        Ok(s) => s,
        Err(_) => {
            return Err(GenError::Infeasible {
                margin: f64::NEG_INFINITY,
                witnesses: active
                    .iter()
                    .take(20)
                    .map(|&i| p.constraints[i].origin)
                    .collect(),
            })
        }
    };
    let mut sin_coeffs = Vec::with_capacity(p.sin_terms);
    let mut cos_coeffs = Vec::with_capacity(p.cos_terms);
    for k in 0..p.sin_terms {
        let u = sol[vars[k]].mul_add(CORR, u_ref[k]);
        sin_coeffs.push(u / h.powi(2 * k as i32 + 1));
    }
    for k in 0..p.cos_terms {
        let u = sol[vars[p.sin_terms + k]].mul_add(CORR, u_ref[p.sin_terms + k]);
        cos_coeffs.push(u / h.powi(2 * k as i32));
    }
    Ok((
        PolyPair {
            sin_coeffs,
            cos_coeffs,
        },
        sol[delta],
    ))
}

fn rational(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite")
}

/// Exact re-check: the solved coefficients must satisfy every constraint in
/// real (rational) arithmetic. The float LP's arithmetic is not trusted.
pub fn recheck_exact(p: &LpProblem, pp: &PolyPair) -> Result<(), GenError> {
    for c in &p.constraints {
        let x = rational(c.xp);
        let xx = &x * &x;
        let mut s = BigRational::from_integer(BigInt::from(0));
        let mut pow = x.clone();
        for &co in &pp.sin_coeffs {
            s += rational(co) * &pow;
            pow *= &xx;
        }
        let mut cc = BigRational::from_integer(BigInt::from(0));
        let mut pow = BigRational::from_integer(BigInt::from(1));
        for &co in &pp.cos_coeffs {
            cc += rational(co) * &pow;
            pow *= &xx;
        }
        let v = rational(c.a_sin) * s + rational(c.a_cos) * cc;
        if (c.lo.is_finite() && v < rational(c.lo)) || (c.hi.is_finite() && v > rational(c.hi)) {
            return Err(GenError::RecheckFailed { origin: c.origin });
        }
    }
    Ok(())
}

pub const MAX_ROUNDS: usize = 50;
const INITIAL_SAMPLE: usize = 5000;
const MAX_ADDED: usize = 500;

/// Iterative sampling solve: start from an even sample, solve, check the
/// whole set with rounded evaluation, pull in the worst violators, repeat.
/// Ends with the exact rational re-check over all constraints.
pub fn solve_lp(p: &LpProblem) -> Result<(PolyPair, usize, f64), GenError> {
    assert!(!p.constraints.is_empty());
    let n = p.constraints.len();
    let stride = n.div_ceil(INITIAL_SAMPLE);
    let mut active: Vec<usize> = (0..n).step_by(stride).collect();
    let mut in_active = vec![false; n];
    for &i in &active {
        in_active[i] = true;
    }
    let mut shifts = vec![(0.0f64, 0.0f64); n];
    let mut resamples = 0usize;
    for round in 1..=MAX_ROUNDS {
        let solved = lp_solve_active(p, &active, &shifts);
        // a singular basis, or the solver erroring out entirely (margin
        // -inf), is a property of the particular subsample; restart from a
        // shifted sample rather than giving up
        let spurious = matches!(&solved, Err(GenError::Solver(_)))
            || matches!(&solved, Err(GenError::Infeasible { margin, .. }) if margin.is_infinite());
        let (pp, delta) = match solved {
            Err(_) if spurious && resamples < 4 => {
                resamples += 1;
                active = (resamples.min(stride.saturating_sub(1))..n)
                    .step_by(stride)
                    .collect();
                in_active = vec![false; n];
                for &i in &active {
                    in_active[i] = true;
                }
                shifts = vec![(0.0, 0.0); n];
                continue;
            }
            other => other?,
        };
        if delta <= 0.0 {
            let witnesses = active
                .iter()
                .map(|&i| &p.constraints[i])
                .filter(|c| {
                    let v = eval_constraint(c, &pp);
                    !(c.lo..=c.hi).contains(&v)
                })
                .map(|c| c.origin)
                .take(50)
                .collect();
            return Err(GenError::Infeasible {
                margin: delta,
                witnesses,
            });
        }
        // rounded-evaluation sweep of the full set; anything outside its
        // bounds, or inside with less than half the sampled margin, joins
        // the active set so the next solve does not chase one point
        let mut strict = 0usize;
        let mut violators: Vec<(f64, usize)> = Vec::new();
        for (i, c) in p.constraints.iter().enumerate() {
            let v = eval_constraint(c, &pp);
            let out = (c.lo - v).max(v - c.hi) / c.sigma;
            if out > 0.0 {
                strict += 1;
                if in_active[i] {
                    // the float solver already saw this row and still left
                    // it outside; tighten the violated side and re-solve
                    if v < c.lo {
                        shifts[i].0 += out + delta / 2.0;
                    } else {
                        shifts[i].1 += out + delta / 2.0;
                    }
                }
            }
            if !in_active[i] && out + delta / 2.0 > 0.0 {
                violators.push((out, i));
            }
        }
        if strict == 0 {
            match recheck_exact(p, &pp) {
                Ok(()) => return Ok((pp, round, delta)),
                Err(GenError::RecheckFailed { origin }) => {
                    // pull the rejected constraint in and keep iterating
                    let idx = p
                        .constraints
                        .iter()
                        .position(|c| c.origin == origin)
                        .unwrap();
                    if in_active[idx] {
                        return Err(GenError::RecheckFailed { origin });
                    }
                    violators.push((0.0, idx));
                }
                Err(e) => return Err(e),
            }
        }
        if violators.is_empty() {
            // margin shortfalls only; accept on the next exact pass
            continue;
        }
        violators.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for &(_, i) in violators.iter().take(MAX_ADDED) {
            if !in_active[i] {
                active.push(i);
                in_active[i] = true;
            }
        }
    }
    Err(GenError::RoundsExhausted)
}

/// Runs the production kernel with the candidate coefficients and compares
/// the 34-bit intermediate against the oracle for every input. An empty
/// return is the shipping certificate for this input set.
pub fn validate(
    cs: &CoeffSet,
    f: Func,
    inputs: &[u32],
    strategy: ReductionStrategy,
) -> Result<Vec<u32>, GenError> {
    let mut failures = Vec::new();
    for &xb in inputs {
        let got = kernels::eval34_with(f, xb, strategy, cs);
        let want = oracle::eval34(f, xb)?;
        if got.to_bits() != want.to_bits() && !(got.is_nan() && want.is_nan()) {
            failures.push(xb);
        }
    }
    Ok(failures)
}

/// Stratified sample of binary32 bit patterns: `per_exp` draws from every
/// finite exponent, both signs, from a fixed-seed LCG.
pub fn stratified_inputs(per_exp: u32, seed: u64) -> Vec<u32> {
    let mut state = seed;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 32) as u32
    };
    let mut v = Vec::new();
    for e in 0..255u32 {
        for _ in 0..per_exp {
            v.push((next() & 0x8000_0000) | (e << 23) | (next() & 0x7fffff));
        }
    }
    v
}

/// End-to-end synthesis of both coefficient pairs from sin and cos
/// constraints over the given inputs.
pub fn generate(
    inputs: &[u32],
    strategy: ReductionStrategy,
) -> Result<(CoeffSet, GenReport, GenReport), GenError> {
    // duplicate inputs would produce identical LP rows, which the float
    // simplex handles poorly (singular bases)
    let mut inputs = inputs.to_vec();
    inputs.sort_unstable();
    inputs.dedup();
    let inputs = &inputs[..];
    let mut reduced = Vec::new();
    let mut small = Vec::new();
    let mut hard = Vec::new();
    for f in Func::ALL {
        let (cs, h) = make_constraints(f, inputs, strategy)?;
        hard.extend(h);
        for c in cs {
            match c.domain {
                Domain::Reduced => reduced.push(c),
                Domain::Small => small.push(c),
            }
        }
    }
    let solve = |constraints: Vec<Constraint>, domain| -> Result<(PolyPair, GenReport), GenError> {
        let p = LpProblem {
            constraints,
            sin_terms: 4,
            cos_terms: 4,
            domain,
        };
        let (pp, rounds, delta) = solve_lp(&p)?;
        let report = GenReport {
            sin_degree: pp.sin_degree(),
            cos_degree: pp.cos_degree(),
            constraint_count: p.constraints.len(),
            lp_rounds: rounds,
            final_margin: delta,
            hard_inputs: hard.clone(),
            validation_failures: 0,
        };
        Ok((pp, report))
    };
    let (rpp, rrep) = solve(reduced, Domain::Reduced)?;
    let (spp, srep) = solve(small, Domain::Small)?;
    Ok((
        CoeffSet {
            reduced: rpp,
            small: spp,
        },
        rrep,
        srep,
    ))
}
