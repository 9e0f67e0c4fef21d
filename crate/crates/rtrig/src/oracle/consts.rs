//! High-precision constants for the oracle.
//!
//! pi is computed from scratch with Machin's formula
//! (pi = 16*atan(1/5) - 4*atan(1/239)) in plain vector fixed point, and
//! 256/pi is derived from it by Newton reciprocal iteration. Layout matches
//! `Fx`: little-endian u64 words with a single integer word at the top, so
//! WORDS words give 64*(WORDS-1) fraction bits.
//!
//! A test cross-checks the expansion against an embedded hex transcription
//! of pi's leading fraction bits and against the MPFR engine.

use std::sync::OnceLock;

/// Total words per constant: 1 integer word + 25 fraction words (1600 bits).
pub const WORDS: usize = 26;

/// Number of fraction bits carried by each expansion.
pub const FRAC_BITS: i64 = 64 * (WORDS as i64 - 1);

pub struct PiExpansions {
    /// pi, integer word 3.
    pub pi: Vec<u64>,
    /// pi/256, integer word 0.
    pub pi_over_256: Vec<u64>,
    /// 256/pi, integer word 81.
    pub inv_pi_256: Vec<u64>,
}

fn vdiv_small(v: &mut [u64], d: u64) {
    let mut rem = 0u128;
    for i in (0..v.len()).rev() {
        let cur = (rem << 64) | v[i] as u128;
        v[i] = (cur / d as u128) as u64;
        rem = cur % d as u128;
    }
}

fn vadd(a: &mut [u64], b: &[u64]) {
    let mut carry = 0u64;
    for i in 0..a.len() {
        let (s1, c1) = a[i].overflowing_add(b[i]);
        let (s2, c2) = s1.overflowing_add(carry);
        a[i] = s2;
        carry = (c1 as u64) + (c2 as u64);
    }
}

fn vsub(a: &mut [u64], b: &[u64]) {
    let mut borrow = 0u64;
    for i in 0..a.len() {
        let (d1, b1) = a[i].overflowing_sub(b[i]);
        let (d2, b2) = d1.overflowing_sub(borrow);
        a[i] = d2;
        borrow = (b1 as u64) + (b2 as u64);
    }
    assert_eq!(borrow, 0, "expansion underflow");
}

fn vmul_small(a: &mut [u64], m: u64) {
    let mut carry = 0u128;
    for x in a.iter_mut() {
        let t = *x as u128 * m as u128 + carry;
        *x = t as u64;
        carry = t >> 64;
    }
    assert_eq!(carry, 0, "expansion overflow");
}

fn vis_zero(a: &[u64]) -> bool {
    a.iter().all(|&x| x == 0)
}

/// Truncating product in the shared layout (drops the low len-1 words).
fn vmul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len();
    let mut prod = vec![0u64; 2 * n];
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        let ai = a[i] as u128;
        let mut carry = 0u128;
        for j in 0..n {
            let t = ai * b[j] as u128 + prod[i + j] as u128 + carry;
            prod[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut idx = i + n;
        while carry != 0 {
            let t = prod[idx] as u128 + carry;
            prod[idx] = t as u64;
            carry = t >> 64;
            idx += 1;
        }
    }
    prod[n - 1..2 * n - 1].to_vec()
}

/// atan(1/d) for integer d, by the alternating Taylor series.
fn atan_inv(d: u64) -> Vec<u64> {
    let mut term = vec![0u64; WORDS];
    term[WORDS - 1] = 1;
    vdiv_small(&mut term, d);
    let d2 = d * d;
    let mut acc = vec![0u64; WORDS];
    let mut k = 0u64;
    while !vis_zero(&term) {
        let mut t = term.clone();
        vdiv_small(&mut t, 2 * k + 1);
        if k % 2 == 0 {
            vadd(&mut acc, &t);
        } else {
            vsub(&mut acc, &t);
        }
        vdiv_small(&mut term, d2);
        k += 1;
    }
    acc
}

fn compute() -> PiExpansions {
    let mut pi = atan_inv(5);
    vmul_small(&mut pi, 16);
    let mut a239 = atan_inv(239);
    vmul_small(&mut a239, 4);
    vsub(&mut pi, &a239);
    assert_eq!(pi[WORDS - 1], 3);

    let mut pi_over_256 = pi.clone();
    for _ in 0..8 {
        vdiv_small(&mut pi_over_256, 2);
    }

    // Newton reciprocal: z <- z*(2 - (pi/256)*z), quadratic convergence from
    // a ~50-bit f64 seed.
    let seed = 256.0 / std::f64::consts::PI;
    let mut z = vec![0u64; WORDS];
    z[WORDS - 1] = seed as u64;
    let frac = seed - (seed as u64) as f64;
    z[WORDS - 2] = (frac * 18446744073709551616.0) as u64;
    let two = {
        let mut t = vec![0u64; WORDS];
        t[WORDS - 1] = 2;
        t
    };
    for _ in 0..6 {
        let zy = vmul(&z, &pi_over_256);
        let mut corr = two.clone();
        vsub(&mut corr, &zy);
        z = vmul(&z, &corr);
    }
    assert_eq!(z[WORDS - 1], 81);
    // Residual check: z*(pi/256) must be 1 up to a few ulps of the expansion.
    let resid = vmul(&z, &pi_over_256);
    assert_eq!(resid[WORDS - 1], 1);
    for i in 1..WORDS - 1 {
        assert_eq!(resid[i], 0);
    }
    assert!(resid[0] < 64, "reciprocal residual too large");

    PiExpansions {
        pi,
        pi_over_256,
        inv_pi_256: z,
    }
}

pub fn pi_expansions() -> &'static PiExpansions {
    static CELL: OnceLock<PiExpansions> = OnceLock::new();
    CELL.get_or_init(compute)
}
