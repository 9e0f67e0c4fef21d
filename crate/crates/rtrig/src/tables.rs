//! The 512-entry sin(j*pi/256) table shared by sin, cos and tan output
//! compensation. cos lookups go through the same table shifted by a quarter
//! turn, so no second table exists.
//!
//! Entries are single binary64 values, each the nearest binary64 to the
//! exact real sin(j*pi/256). The polynomial generator constrains the final
//! computed value, so the half-ulp entry error is absorbed there rather
//! than carried as a double-double tail.

use crate::oracle::consts;
use crate::oracle::engine::sincos_taylor;
use crate::oracle::fx::Fx;
use std::sync::OnceLock;

pub struct SinTable {
    pub(crate) entries: [f64; 512],
}

/// Builds the table from the shared pi expansion. Only the first octant is
/// evaluated (Taylor at 512 fraction bits); the rest follows by symmetry,
/// which also makes the symmetry invariants hold bit-exactly.
pub fn build_sin_table() -> SinTable {
    let e = consts::pi_expansions();
    let mut pi = Fx::<9>::zero();
    for j in 0..9 {
        pi.w[8 - j] = e.pi[consts::WORDS - 1 - j];
    }
    let mut entries = [0.0f64; 512];
    for j in 0..=64u64 {
        let beta = pi.mul_small(j).shr(8);
        let (s, c) = sincos_taylor(&beta);
        entries[j as usize] = s.to_f64_rn();
        entries[128 - j as usize] = c.to_f64_rn();
    }
    for j in 129..=255 {
        entries[j] = entries[256 - j];
    }
    // entry 256 is +0.0, not -0.0: an exactly-zero compensated term never
    // decides a 34-bit rounding, and the kernel owns the signed-zero cases.
    entries[256] = 0.0;
    for j in 257..=511 {
        entries[j] = -entries[512 - j];
    }
    SinTable { entries }
}

pub fn sin_table() -> &'static SinTable {
    static CELL: OnceLock<SinTable> = OnceLock::new();
    CELL.get_or_init(build_sin_table)
}

impl SinTable {
    pub fn sin_entry(&self, kp: u32) -> f64 {
        assert!(kp < 512, "table index out of range: {kp}");
        self.entries[kp as usize]
    }

    /// cos(kp*pi/256) = sin((kp + 128)*pi/256).
    pub fn cos_entry(&self, kp: u32) -> f64 {
        assert!(kp < 512, "table index out of range: {kp}");
        self.entries[(kp as usize + 128) & 0x1ff]
    }

    pub fn entries(&self) -> &[f64; 512] {
        &self.entries
    }
}
