//! Fixed-precision trig evaluation core.
//!
//! For one working precision (N words, 64*(N-1) fraction bits) this computes
//! sin/cos/tan of a binary32 input as a normalized big-significand value with
//! an absolute error bound. The escalating driver in `mod.rs` retries at
//! doubled precision when a rounding decision is ambiguous.
//!
//! Method: u = 256*|x|/pi by multiplying the stored 1600-bit expansion of
//! 256/pi with the integer significand and windowing out the fraction at the
//! binary point; k = nearest integer to u (mod 512); the residual angle is
//! folded to beta = (d + sigma*f)*pi/256 with |beta| <= 64.5*pi/256 < 0.8,
//! where d = k - 128*q; sin/cos of beta come from the Taylor series in fixed
//! point and the quadrant q maps them back.

use super::consts::{self, pi_expansions};
use super::fx::{self, Fx};
use crate::fpcore;
use crate::kernels::Func;

pub const MAX_WORDS: usize = 17;

/// A high-precision function value: sign * 0.mant * 2^(exp+1), with the
/// significand normalized so the top bit of w[len-1] is set. Bit g of the
/// word array has weight 2^(exp - (64*len - 1) + g).
#[derive(Clone, Copy, Debug)]
pub struct HpValue {
    pub sign: bool,
    pub exp: i32,
    pub len: usize,
    pub w: [u64; MAX_WORDS],
    /// |true value - represented value| <= 2^err_exp.
    pub err_exp: i32,
}

/// Splits u = 256*|x|/pi for |x| = m * 2^e into k (nearest integer, mod 512)
/// and the fraction f in [0, 1/2] with u = k + sigma*f (mod 512),
/// sigma = -1 when `fneg`. Truncation error in f is below 2 ulps of Fx<N>.
pub fn reduce_window<const N: usize>(m: u64, e: i32) -> (u32, Fx<N>, bool) {
    debug_assert!(m != 0);
    let inv = &pi_expansions().inv_pi_256;
    let mut p = [0u64; consts::WORDS + 1];
    let mut carry = 0u128;
    for i in 0..consts::WORDS {
        let t = inv[i] as u128 * m as u128 + carry;
        p[i] = t as u64;
        carry = t >> 64;
    }
    p[consts::WORDS] = carry as u64;
    // Bit g of p has weight 2^(g - FRAC_BITS + e).
    let g0 = consts::FRAC_BITS - e as i64;
    let mut k = (fx::extract64(&p, g0) & 0x1ff) as u32;
    let mut f = Fx::<N>::zero();
    for j in 1..N {
        f.w[N - 1 - j] = fx::extract64(&p, g0 - 64 * j as i64);
    }
    let mut fneg = false;
    if f.w[N - 2] >> 63 == 1 {
        k = (k + 1) & 0x1ff;
        fneg = true;
        let mut t = Fx::<N>::from_int(1);
        t.sub_assign(&f);
        f = t;
    }
    (k, f, fneg)
}

fn fx_from_expansion<const N: usize>(v: &[u64]) -> Fx<N> {
    let mut out = Fx::<N>::zero();
    for j in 0..N {
        out.w[N - 1 - j] = v[consts::WORDS - 1 - j];
    }
    out
}

pub(crate) fn sincos_taylor<const N: usize>(beta: &Fx<N>) -> (Fx<N>, Fx<N>) {
    let t = beta.mul(beta);
    let mut s = *beta;
    let mut term = *beta;
    let mut k = 1u64;
    loop {
        term = term.mul(&t).div_small((2 * k) * (2 * k + 1));
        if term.is_zero() {
            break;
        }
        if k % 2 == 1 {
            s.sub_assign(&term);
        } else {
            s.add_assign(&term);
        }
        k += 1;
    }
    let mut c = Fx::<N>::from_int(1);
    let mut term = t.div_small(2);
    let mut k = 1u64;
    while !term.is_zero() {
        if k % 2 == 1 {
            c.sub_assign(&term);
        } else {
            c.add_assign(&term);
        }
        k += 1;
        term = term.mul(&t).div_small((2 * k - 1) * (2 * k));
    }
    (s, c)
}

fn normalize<const N: usize>(sign: bool, mag: &Fx<N>, err_exp: i32) -> HpValue {
    let e = mag.msb_exp().expect("zero magnitude in oracle engine");
    let g_m = e + 64 * (N as i32 - 1);
    let shifted = mag.shl((64 * N as i32 - 1 - g_m) as u32);
    let mut w = [0u64; MAX_WORDS];
    w[..N].copy_from_slice(&shifted.w);
    HpValue {
        sign,
        exp: e,
        len: N,
        w,
        err_exp,
    }
}

/// num/den for normalized positive magnitudes, via Newton reciprocal.
fn divide<const N: usize>(sign: bool, num: &Fx<N>, den: &Fx<N>) -> HpValue {
    let es = num.msb_exp().expect("zero numerator");
    let ec = den.msb_exp().expect("zero denominator");
    // Scale both into [1/2, 1): v' = v * 2^-(e+1).
    let to_frac = |v: &Fx<N>, e: i32| -> Fx<N> {
        if e >= 0 {
            v.shr((e + 1) as u32)
        } else {
            v.shl((-1 - e) as u32)
        }
    };
    let nf = to_frac(num, es);
    let df = to_frac(den, ec);
    // z ~= 1/df in (1, 2]; truncating products keep z at or below the true
    // reciprocal, so the integer word never exceeds 2.
    let mut z = Fx::<N>::from_f64_exact(1.0 / df.to_f64());
    for _ in 0..6 {
        let zy = df.mul(&z);
        let mut corr = Fx::<N>::from_int(2);
        corr.sub_assign(&zy);
        z = z.mul(&corr);
    }
    let q = nf.mul(&z); // in (1/2, 2)
    // Relative error: inputs carry 2^(12-FRAC) absolute error against
    // magnitudes 2^es / 2^ec, plus reciprocal and product truncation.
    let rel = 14 - 64 * (N as i32 - 1) - es.min(ec).min(0);
    let mut hv = normalize(sign, &q, 0);
    hv.exp += es - ec;
    hv.err_exp = hv.exp + 1 + rel;
    hv
}

/// Evaluates f at the binary32 pattern `xbits` with N-word working precision.
/// Pre: x finite, nonzero, |x| >= 2^-33 (smaller inputs take the analytic
/// small-argument path in the driver and never reach here).
pub fn eval_fixed<const N: usize>(f: Func, xbits: u32) -> HpValue {
    let t = fpcore::decode32(xbits);
    debug_assert!(!t.is_nan && !t.is_inf && !t.is_zero);
    let m = t.int_significand() as u64;
    let e = t.lsb_exp();
    let (k, frac, fneg) = reduce_window::<N>(m, e);
    let q = ((k + 64) >> 7) as i32;
    let d = k as i32 - 128 * q; // in [-64, 63]
    // beta/(pi/256) = d + sigma*f with sigma = -1 when fneg.
    let (bneg, mag) = if frac.is_zero() {
        (d < 0, Fx::<N>::from_int(d.unsigned_abs() as u64))
    } else {
        match (d >= 0, fneg) {
            (true, false) => {
                let mut v = frac;
                v.w[N - 1] = d as u64;
                (false, v)
            }
            (false, false) => {
                let mut v = Fx::<N>::from_int((-d) as u64);
                v.sub_assign(&frac);
                (true, v)
            }
            (true, true) => {
                if d == 0 {
                    (true, frac)
                } else {
                    let mut v = Fx::<N>::from_int(d as u64);
                    v.sub_assign(&frac);
                    (false, v)
                }
            }
            (false, true) => {
                let mut v = frac;
                v.w[N - 1] = (-d) as u64;
                (true, v)
            }
        }
    };
    let pi256 = fx_from_expansion::<N>(&pi_expansions().pi_over_256);
    let beta = mag.mul(&pi256);
    let (s, c) = sincos_taylor(&beta);
    // sin(|x|) and cos(|x|) from the quadrant; beta's sign affects sin only.
    let (sv, cv) = match q.rem_euclid(4) {
        0 => ((bneg, s), (false, c)),
        1 => ((false, c), (!bneg, s)),
        2 => ((!bneg, s), (true, c)),
        _ => ((true, c), (bneg, s)),
    };
    let abs_err = 12 - 64 * (N as i32 - 1);
    match f {
        Func::Sin => normalize(sv.0 ^ t.negative, &sv.1, abs_err),
        Func::Cos => normalize(cv.0, &cv.1, abs_err),
        Func::Tan => divide(sv.0 ^ cv.0 ^ t.negative, &sv.1, &cv.1),
    }
}

impl HpValue {
    fn bit_index_of_weight(&self, we: i32) -> i64 {
        (we - self.exp) as i64 + 64 * self.len as i64 - 1
    }

    /// Unambiguous-rounding check: true value provably strictly between two
    /// consecutive multiples of 2^qe (grid step `step_exp`).
    fn strictly_inside(&self, step_exp: i32) -> bool {
        let g_step = self.bit_index_of_weight(step_exp);
        let lo_bit = self.bit_index_of_weight(self.err_exp) + 2;
        if lo_bit >= g_step {
            return false;
        }
        let ws = &self.w[..self.len];
        fx::any_bits_in(ws, lo_bit, g_step) && !fx::all_bits_in(ws, lo_bit, g_step)
    }

    /// The 34-bit round-to-odd result, or None if ambiguous at this
    /// precision. Assumes the true value is irrational (never exactly on the
    /// 34-bit grid), which holds for sin/cos/tan at nonzero binary32 inputs.
    pub fn ro34(&self) -> Option<f64> {
        let qe = (self.exp - 25).max(-151);
        if !self.strictly_inside(qe) {
            return None;
        }
        let g_q = self.bit_index_of_weight(qe);
        let units = fx::extract64(&self.w[..self.len], g_q);
        let odd = units | 1;
        let mag = odd as f64 * fpcore::exp2i(qe);
        Some(if self.sign { -mag } else { mag })
    }

    /// Directly rounds the true value to `fmt` under `mode`, or None if
    /// ambiguous. The conservative check keeps the value away from every
    /// half-quantum boundary, which covers grid points and midpoints for all
    /// five modes.
    pub fn round(&self, fmt: fpcore::FpFormat, mode: fpcore::RoundingMode) -> Option<u32> {
        let p = fmt.precision() as i32;
        let qe = (self.exp - (p - 1)).max(fpcore::MIN_NORMAL_EXP - fmt.frac_bits() as i32);
        if !self.strictly_inside(qe - 1) {
            return None;
        }
        let g_q = self.bit_index_of_weight(qe);
        let ws = &self.w[..self.len];
        let units = fx::extract64(ws, g_q);
        let round = g_q >= 1 && fx::extract64(ws, g_q - 1) & 1 == 1;
        // The true value sits strictly inside a half-quantum cell, so bits
        // below the round position are never all zero.
        Some(fpcore::round_sig_parts(
            self.sign, units, qe, round, true, fmt, mode,
        ))
    }

    /// Approximate value for reports.
    pub fn to_f64(&self) -> f64 {
        let hi = self.w[self.len - 1] as f64;
        let lo = if self.len > 1 {
            self.w[self.len - 2] as f64
        } else {
            0.0
        };
        let mag = hi * fpcore::exp2i(self.exp - 63) + lo * fpcore::exp2i(self.exp - 127);
        if self.sign {
            -mag
        } else {
            mag
        }
    }
}
