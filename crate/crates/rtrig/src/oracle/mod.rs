//! Arbitrary-precision ground truth for sin, cos, tan over binary32 inputs.
//!
//! Results are produced at a starting precision of 128 fraction bits and the
//! precision doubles (up to 1024 bits) whenever a rounding decision is
//! ambiguous; hitting the cap is a hard error, never a silent guess. Inputs
//! below 2^-33 in magnitude take an analytic path: there the function value
//! differs from its anchor (x, or 1 for cos) by less than 2^-68 of the
//! anchor, which decides every rounding at every supported format directly.

pub mod consts;
pub mod engine;
pub mod fx;

pub mod cache;

pub use cache::{read_cache, write_cache};
pub use engine::HpValue;

use crate::fpcore::{
    self, decode32, parts_of_f64, pred34, round_from_34, round_sig_parts, step34_away_from_zero,
    step34_toward_zero, FpFormat, RoundingMode,
};
use crate::kernels::Func;
use fx::Fx;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EscalationExceeded {
    pub func: Func,
    pub input: u32,
}

impl std::fmt::Display for EscalationExceeded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "oracle precision cap (1024 bits) exceeded for {}({:#010x})",
            self.func.name(),
            self.input
        )
    }
}

impl std::error::Error for EscalationExceeded {}

pub type OracleResult<T> = Result<T, EscalationExceeded>;

/// Inputs below 2^-33 (biased exponent field <= 93, including subnormals)
/// take the analytic small-argument path.
fn is_tiny(xbits: u32) -> bool {
    (xbits >> 23) & 0xff <= 93
}

/// Evaluates at a fixed precision of at least `bits` fraction bits
/// (128 <= bits <= 1024). Pre: x finite, nonzero, |x| >= 2^-33.
pub fn hp_eval(f: Func, xbits: u32, bits: u32) -> HpValue {
    assert!((128..=1024).contains(&bits));
    if bits <= 128 {
        engine::eval_fixed::<3>(f, xbits)
    } else if bits <= 256 {
        engine::eval_fixed::<5>(f, xbits)
    } else if bits <= 512 {
        engine::eval_fixed::<9>(f, xbits)
    } else {
        engine::eval_fixed::<17>(f, xbits)
    }
}

fn escalate<T>(
    f: Func,
    xbits: u32,
    mut decide: impl FnMut(&HpValue) -> Option<T>,
) -> OracleResult<T> {
    for bits in [128u32, 256, 512, 1024] {
        let v = hp_eval(f, xbits, bits);
        if let Some(r) = decide(&v) {
            return Ok(r);
        }
    }
    Err(EscalationExceeded { func: f, input: xbits })
}

/// The correctly rounded 34-bit round-to-odd value of f(x).
/// NaN and infinity inputs yield NaN (invalid operation).
pub fn eval34(f: Func, xbits: u32) -> OracleResult<f64> {
    let t = decode32(xbits);
    if t.is_nan || t.is_inf {
        return Ok(f64::NAN);
    }
    let x = FpFormat::binary32().to_f64(xbits);
    if t.is_zero {
        return Ok(match f {
            Func::Sin | Func::Tan => x, // signed zero preserved
            Func::Cos => 1.0,
        });
    }
    if is_tiny(xbits) {
        // |sin x| and |tan x| differ from |x| by less than |x|*2^-68, and
        // cos x from 1 by less than 2^-67; the adjacent 34-bit value in the
        // right direction is therefore the round-to-odd result.
        return Ok(match f {
            Func::Sin => step34_toward_zero(x),
            Func::Tan => step34_away_from_zero(x),
            Func::Cos => pred34(1.0),
        });
    }
    escalate(f, xbits, |v| v.ro34())
}

/// The correctly rounded result of f(x) in `fmt` under `mode`, computed by
/// rounding the true value directly (independent of the 34-bit pipeline).
pub fn eval_bits(f: Func, xbits: u32, fmt: FpFormat, mode: RoundingMode) -> OracleResult<u32> {
    let t = decode32(xbits);
    if t.is_nan || t.is_inf {
        return Ok(fmt.qnan_bits());
    }
    if t.is_zero {
        let exact = match f {
            Func::Sin | Func::Tan => FpFormat::binary32().to_f64(xbits),
            Func::Cos => 1.0,
        };
        return Ok(round_from_34(exact, fmt, mode));
    }
    if is_tiny(xbits) {
        let x = FpFormat::binary32().to_f64(xbits);
        let (anchor, below) = match f {
            Func::Sin => (x, true),
            Func::Tan => (x, false),
            Func::Cos => (1.0, true),
        };
        let (neg, units, qe, round, sticky) = parts_adjacent(anchor, fmt, below);
        return Ok(round_sig_parts(neg, units, qe, round, sticky, fmt, mode));
    }
    escalate(f, xbits, |v| v.round(fmt, mode))
}

/// Rounding parts of a value infinitesimally below (or above) `anchor` in
/// magnitude, where "infinitesimally" means closer than any half-quantum gap
/// of `fmt` around the anchor.
fn parts_adjacent(anchor: f64, fmt: FpFormat, below: bool) -> (bool, u64, i32, bool, bool) {
    let (neg, units, qe, round, sticky) = parts_of_f64(anchor, fmt);
    let p = fmt.precision();
    let min_qe = fpcore::MIN_NORMAL_EXP - fmt.frac_bits() as i32;
    if below {
        match (round, sticky) {
            (false, false) => {
                // Anchor exactly on the grid; step down one quantum with a
                // nonzero fraction left over.
                if units == 1u64 << (p - 1) && qe > min_qe {
                    (neg, (units << 1) - 1, qe - 1, true, true)
                } else {
                    debug_assert!(units > 0);
                    (neg, units - 1, qe, true, true)
                }
            }
            (true, false) => (neg, units, qe, false, true),
            _ => (neg, units, qe, round, true),
        }
    } else {
        match (round, sticky) {
            (false, false) => (neg, units, qe, false, true),
            (true, false) => (neg, units, qe, true, true),
            _ => (neg, units, qe, round, true),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundingInterval {
    pub lo: f64,
    pub hi: f64,
    pub func: Func,
    pub input: u32,
}

/// The closed interval of binary64 values whose 34-bit round-to-odd rounding
/// equals the oracle result. Degenerate for exact results (zero inputs).
pub fn rounding_interval(f: Func, xbits: u32) -> OracleResult<RoundingInterval> {
    let r = eval34(f, xbits)?;
    let t = decode32(xbits);
    if t.is_zero || r.is_nan() {
        return Ok(RoundingInterval {
            lo: r,
            hi: r,
            func: f,
            input: xbits,
        });
    }
    // Nonzero finite inputs always produce a result with an odd 34-bit
    // significand (the true value is irrational), so the interval is the
    // open span between the neighboring even values, closed in binary64.
    let lo = pred34(r).next_up();
    let hi = fpcore::succ34(r).next_down();
    Ok(RoundingInterval {
        lo,
        hi,
        func: f,
        input: xbits,
    })
}

#[derive(Clone, Debug)]
pub struct HpReduction {
    pub k_mod_512: u32,
    pub r_negative: bool,
    /// |r| as a pure fraction, 256 bits, little-endian.
    pub r_mag: [u64; 4],
    pub precision_bits: u32,
}

impl HpReduction {
    /// r as a hi/lo binary64 pair.
    pub fn r_f64(&self) -> (f64, f64) {
        let mut v = Fx::<5>::zero();
        v.w[..4].copy_from_slice(&self.r_mag);
        let (hi, lo) = v.to_f64_pair();
        if self.r_negative {
            (-hi, -lo)
        } else {
            (hi, lo)
        }
    }

    /// x' = r * pi/256 as a hi/lo binary64 pair.
    pub fn xp_f64(&self) -> (f64, f64) {
        let mut v = Fx::<5>::zero();
        v.w[..4].copy_from_slice(&self.r_mag);
        let pi256 = {
            let e = &consts::pi_expansions().pi_over_256;
            let mut out = Fx::<5>::zero();
            for j in 0..5 {
                out.w[4 - j] = e[consts::WORDS - 1 - j];
            }
            out
        };
        let (hi, lo) = v.mul(&pi256).to_f64_pair();
        if self.r_negative {
            (-hi, -lo)
        } else {
            (hi, lo)
        }
    }
}

/// High-precision range reduction: 256*x/pi = 512*m + k_mod_512 + r with
/// |r| <= 1/2, at 256 fraction bits. Pre: x finite, |x| >= pi/128.
pub fn hp_reduce(xbits: u32) -> HpReduction {
    let t = decode32(xbits);
    debug_assert!(!t.is_nan && !t.is_inf && !t.is_zero);
    let m = t.int_significand() as u64;
    let e = t.lsb_exp();
    let (k, f, fneg) = engine::reduce_window::<5>(m, e);
    let (k_mod_512, r_negative) = if t.negative {
        let k2 = if k == 0 { 0 } else { 512 - k };
        (k2, !fneg)
    } else {
        (k, fneg)
    };
    let mut r_mag = [0u64; 4];
    r_mag.copy_from_slice(&f.w[..4]);
    HpReduction {
        k_mod_512,
        r_negative: r_negative && !f.is_zero(),
        r_mag,
        precision_bits: 256,
    }
}
