//! Floating-point formats, bit-level decoding, and rounding.
//!
//! All target formats share the binary32 exponent layout (8 exponent bits,
//! bias 127) and differ only in significand width: a format with `total_bits`
//! total bits stores `total_bits - 9` fraction bits, i.e. `total_bits - 8`
//! significand bits including the hidden bit. `total_bits = 32` is IEEE
//! binary32 and `total_bits = 16` is bfloat16. The internal 34-bit format
//! (26 significand bits) is never materialized as a storage type; it lives as
//! a constraint on binary64 values.

pub const EXP_BITS: u32 = 8;
pub const EXP_BIAS: i32 = 127;
pub const MIN_NORMAL_EXP: i32 = -126;
pub const MAX_UNBIASED_EXP: i32 = 127;

/// Significand bits (incl. hidden) of the internal round-to-odd format.
pub const RO34_PRECISION: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatError(pub u32);

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "total bit-width {} outside 10..=34", self.0)
    }
}

impl std::error::Error for FormatError {}

/// A floating-point format with 8 exponent bits and `total_bits` total bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpFormat {
    total_bits: u32,
}

impl FpFormat {
    pub fn new(total_bits: u32) -> Result<Self, FormatError> {
        if (10..=34).contains(&total_bits) {
            Ok(FpFormat { total_bits })
        } else {
            Err(FormatError(total_bits))
        }
    }

    pub const fn binary32() -> Self {
        FpFormat { total_bits: 32 }
    }

    pub const fn bfloat16() -> Self {
        FpFormat { total_bits: 16 }
    }

    pub const fn total_bits(self) -> u32 {
        self.total_bits
    }

    /// Stored fraction bits.
    pub const fn frac_bits(self) -> u32 {
        self.total_bits - 9
    }

    /// Significand bits including the hidden bit.
    pub const fn precision(self) -> u32 {
        self.total_bits - 8
    }

    /// Canonical quiet NaN: all-ones exponent, top fraction bit set.
    pub const fn qnan_bits(self) -> u32 {
        (0xff << self.frac_bits()) | (1 << (self.frac_bits() - 1))
    }

    pub const fn inf_bits(self, negative: bool) -> u32 {
        let mag = 0xff << self.frac_bits();
        if negative {
            mag | (1 << (self.total_bits - 1))
        } else {
            mag
        }
    }

    pub const fn max_finite_bits(self, negative: bool) -> u32 {
        let mag = (0xff << self.frac_bits()) - 1;
        if negative {
            mag | (1 << (self.total_bits - 1))
        } else {
            mag
        }
    }

    /// Exact binary64 value of the pattern `bits` (right-aligned in a u32).
    pub fn to_f64(self, bits: u32) -> f64 {
        let fb = self.frac_bits();
        let sign = (bits >> (self.total_bits - 1)) & 1;
        let exp = (bits >> fb) & 0xff;
        let frac = bits & ((1 << fb) - 1);
        let mag = if exp == 0xff {
            if frac == 0 {
                f64::INFINITY
            } else {
                f64::NAN
            }
        } else if exp == 0 {
            frac as f64 * (MIN_NORMAL_EXP - fb as i32).exp2_int()
        } else {
            let sig = (1u64 << fb) | frac as u64;
            sig as f64 * (exp as i32 - EXP_BIAS - fb as i32).exp2_int()
        };
        if sign == 1 {
            -mag
        } else {
            mag
        }
    }
}

/// Exact power of two as f64; valid for exponents in the f64 normal/subnormal range.
trait Exp2Int {
    fn exp2_int(self) -> f64;
}

impl Exp2Int for i32 {
    fn exp2_int(self) -> f64 {
        debug_assert!((-1074..=1023).contains(&self));
        if self >= -1022 {
            f64::from_bits(((self + 1023) as u64) << 52)
        } else {
            f64::from_bits(1u64 << (self + 1074))
        }
    }
}

pub(crate) fn exp2i(e: i32) -> f64 {
    e.exp2_int()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    NearestEven,
    NearestAway,
    TowardZero,
    TowardPositive,
    TowardNegative,
    /// Internal-only; used for the 34-bit intermediate.
    ToOdd,
}

impl RoundingMode {
    /// The five user-selectable IEEE modes.
    pub const IEEE: [RoundingMode; 5] = [
        RoundingMode::NearestEven,
        RoundingMode::NearestAway,
        RoundingMode::TowardZero,
        RoundingMode::TowardPositive,
        RoundingMode::TowardNegative,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            RoundingMode::NearestEven => "rne",
            RoundingMode::NearestAway => "rna",
            RoundingMode::TowardZero => "rtz",
            RoundingMode::TowardPositive => "rtp",
            RoundingMode::TowardNegative => "rtn",
            RoundingMode::ToOdd => "ro",
        }
    }
}

impl std::str::FromStr for RoundingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rne" => Ok(RoundingMode::NearestEven),
            "rna" => Ok(RoundingMode::NearestAway),
            "rtz" => Ok(RoundingMode::TowardZero),
            "rtp" => Ok(RoundingMode::TowardPositive),
            "rtn" => Ok(RoundingMode::TowardNegative),
            other => Err(format!("unknown rounding mode `{other}`")),
        }
    }
}

/// Sign/exponent/significand decomposition of a binary32 pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpTriple {
    pub negative: bool,
    pub biased_exp: u32,
    /// Stored 23-bit fraction field (no hidden bit).
    pub significand: u32,
    pub is_nan: bool,
    pub is_inf: bool,
    pub is_zero: bool,
    pub is_subnormal: bool,
}

impl FpTriple {
    /// Unbiased exponent of the least significant significand bit, for finite
    /// nonzero values. Subnormals share the minimum quantum 2^-149.
    pub fn lsb_exp(&self) -> i32 {
        debug_assert!(!self.is_nan && !self.is_inf && !self.is_zero);
        if self.is_subnormal {
            MIN_NORMAL_EXP - 23
        } else {
            self.biased_exp as i32 - EXP_BIAS - 23
        }
    }

    /// Integer significand with the hidden bit applied (24 bits for normals).
    pub fn int_significand(&self) -> u32 {
        if self.is_subnormal || self.is_zero {
            self.significand
        } else {
            self.significand | (1 << 23)
        }
    }
}

/// Total over all 2^32 patterns; `encode32` reverses it exactly.
pub fn decode32(bits: u32) -> FpTriple {
    let negative = bits >> 31 == 1;
    let biased_exp = (bits >> 23) & 0xff;
    let significand = bits & 0x7f_ffff;
    FpTriple {
        negative,
        biased_exp,
        significand,
        is_nan: biased_exp == 0xff && significand != 0,
        is_inf: biased_exp == 0xff && significand == 0,
        is_zero: biased_exp == 0 && significand == 0,
        is_subnormal: biased_exp == 0 && significand != 0,
    }
}

pub fn encode32(t: &FpTriple) -> u32 {
    ((t.negative as u32) << 31) | (t.biased_exp << 23) | t.significand
}

/// Rounds a binary64 value to the 34-bit internal format with round-to-odd.
///
/// The result is returned as a binary64 (34-bit values embed losslessly:
/// 27 trailing fraction bits are zero). Specials pass through; NaN
/// canonicalizes. Finite values beyond the 34-bit range clamp to the odd
/// max-finite neighbor, never to infinity.
pub fn round_to_odd_34(v: f64) -> f64 {
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_infinite() || v == 0.0 {
        return v;
    }
    let sign = v.is_sign_negative();
    let bits = v.abs().to_bits();
    let e = (bits >> 52) as i32 - 1023;
    // Bits to drop so that the quantum is max(2^(e-25), 2^-151).
    let drop = if e >= MIN_NORMAL_EXP {
        52 - (RO34_PRECISION as i32 - 1)
    } else {
        52 - (RO34_PRECISION as i32 - 1) + (MIN_NORMAL_EXP - e)
    };
    let m = (bits & ((1u64 << 52) - 1)) | (1u64 << 52); // 53-bit significand
    let out_mag = if drop >= 64 || (drop > 53 && e < MIN_NORMAL_EXP - 1) {
        // Entirely below the smallest 34-bit quantum: round to it (odd).
        exp2i(MIN_NORMAL_EXP - RO34_PRECISION as i32 + 1)
    } else {
        let drop = drop.min(63) as u32;
        let kept = m >> drop;
        let lost = m & ((1u64 << drop) - 1);
        let odd = if lost != 0 { kept | 1 } else { kept };
        // Reassemble: odd * 2^(e - 52 + drop). Magnitude fits f64 exactly.
        odd as f64 * exp2i(e - 52 + drop as i32)
    };
    // Finite values beyond the 34-bit range clamp to max-finite (odd pattern).
    let out_mag = out_mag.min(max_finite_34());
    if sign {
        -out_mag
    } else {
        out_mag
    }
}

/// True iff `v` is exactly representable in the 34-bit format (or 0/inf).
pub fn is_34bit_value(v: f64) -> bool {
    if !v.is_finite() {
        return !v.is_nan();
    }
    round_to_odd_34(v) == v || v == 0.0
}

/// Largest finite 34-bit value.
pub fn max_finite_34() -> f64 {
    ((1u64 << 26) - 1) as f64 * exp2i(MAX_UNBIASED_EXP - 25)
}

/// Maps a finite 34-bit value to a dense sign-magnitude ordinal and back.
/// Used to step to adjacent 34-bit values for interval endpoints.
fn ro34_code(v: f64) -> (bool, u64) {
    debug_assert!(v.is_finite());
    if v == 0.0 {
        return (v.is_sign_negative(), 0);
    }
    let sign = v < 0.0;
    let bits = v.abs().to_bits();
    let e = (bits >> 52) as i32 - 1023;
    let frac52 = bits & ((1u64 << 52) - 1);
    let code = if e >= MIN_NORMAL_EXP {
        let frac25 = frac52 >> 27;
        debug_assert_eq!(frac25 << 27, frac52, "not a 34-bit value");
        (((e - MIN_NORMAL_EXP + 1) as u64) << 25) | frac25
    } else {
        // Subnormal: units of 2^-151.
        let shift = 27 + (MIN_NORMAL_EXP - e);
        debug_assert!(shift < 64);
        let m = frac52 | (1u64 << 52);
        debug_assert_eq!((m >> shift) << shift, m, "not a 34-bit value");
        m >> shift
    };
    (sign, code)
}

fn ro34_from_code(sign: bool, code: u64) -> f64 {
    let mag = if code < (1u64 << 25) {
        code as f64 * exp2i(MIN_NORMAL_EXP - 25)
    } else {
        let e = (code >> 25) as i32 + MIN_NORMAL_EXP - 1;
        let frac = code & ((1u64 << 25) - 1);
        ((1u64 << 25) | frac) as f64 * exp2i(e - 25)
    };
    if sign {
        -mag
    } else {
        mag
    }
}

/// Next 34-bit value toward +inf.
pub fn succ34(v: f64) -> f64 {
    let (sign, code) = ro34_code(v);
    if sign {
        match code {
            0 => ro34_from_code(false, 1),
            1 => 0.0,
            _ => ro34_from_code(true, code - 1),
        }
    } else {
        ro34_from_code(false, code + 1)
    }
}

/// Next 34-bit value toward -inf.
pub fn pred34(v: f64) -> f64 {
    let (sign, code) = ro34_code(v);
    if sign {
        ro34_from_code(true, code + 1)
    } else if code == 0 {
        ro34_from_code(true, 1)
    } else {
        ro34_from_code(false, code - 1)
    }
}

/// One 34-bit step toward zero (input must be nonzero).
pub fn step34_toward_zero(v: f64) -> f64 {
    if v > 0.0 {
        pred34(v)
    } else {
        succ34(v)
    }
}

/// One 34-bit step away from zero.
pub fn step34_away_from_zero(v: f64) -> f64 {
    if v > 0.0 {
        succ34(v)
    } else {
        pred34(v)
    }
}

/// Rounds a magnitude given as truncated quantum count + rounding/sticky bits.
///
/// `units` is floor(|value| / 2^qe) where qe is the format's quantum exponent
/// at this magnitude, `round` the next bit below, `sticky` the OR of the rest.
/// This is the three-pieces-of-information kernel shared by `round_from_34`
/// and the oracle's direct rounding path.
pub fn round_sig_parts(
    negative: bool,
    mut units: u64,
    mut qe: i32,
    round: bool,
    sticky: bool,
    fmt: FpFormat,
    mode: RoundingMode,
) -> u32 {
    let p = fmt.precision();
    let increment = match mode {
        RoundingMode::NearestEven => round && (sticky || units & 1 == 1),
        RoundingMode::NearestAway => round,
        RoundingMode::TowardZero => false,
        RoundingMode::TowardPositive => !negative && (round || sticky),
        RoundingMode::TowardNegative => negative && (round || sticky),
        RoundingMode::ToOdd => (round || sticky) && units & 1 == 0,
    };
    if increment {
        units += 1;
        if units == 1u64 << p {
            units >>= 1;
            qe += 1;
        }
    }
    let sign_bit = (negative as u32) << (fmt.total_bits() - 1);
    if units == 0 {
        return sign_bit;
    }
    // units is in [2^(p-1), 2^p) for normals, below for subnormals.
    let msb_exp = qe + p as i32 - 1;
    if units >= 1u64 << (p - 1) && msb_exp > MAX_UNBIASED_EXP {
        // Overflow per IEEE: to-nearest goes to inf; directed modes go to inf
        // only when moving away from zero.
        let to_inf = match mode {
            RoundingMode::NearestEven | RoundingMode::NearestAway => true,
            RoundingMode::TowardZero => false,
            RoundingMode::TowardPositive => !negative,
            RoundingMode::TowardNegative => negative,
            RoundingMode::ToOdd => false,
        };
        return if to_inf {
            fmt.inf_bits(negative)
        } else {
            fmt.max_finite_bits(negative)
        };
    }
    let fb = fmt.frac_bits();
    if units < 1u64 << (p - 1) {
        // Subnormal (qe must be the format's minimum quantum exponent).
        debug_assert_eq!(qe, MIN_NORMAL_EXP - fb as i32);
        sign_bit | units as u32
    } else {
        let biased = (msb_exp + EXP_BIAS) as u32;
        sign_bit | (biased << fb) | (units as u32 & ((1 << fb) - 1))
    }
}

/// Rounds a 34-bit round-to-odd value (held in binary64) to `fmt` under `mode`.
///
/// Because the 34-bit intermediate preserves the truncated value, rounding bit
/// and sticky bit of the underlying real, this equals rounding the real value
/// directly whenever `v34` is the round-to-odd result of that real.
pub fn round_from_34(v34: f64, fmt: FpFormat, mode: RoundingMode) -> u32 {
    debug_assert!(fmt.total_bits() <= 32);
    if v34.is_nan() {
        return fmt.qnan_bits();
    }
    let negative = v34.is_sign_negative();
    if v34.is_infinite() {
        return fmt.inf_bits(negative);
    }
    if v34 == 0.0 {
        return (negative as u32) << (fmt.total_bits() - 1);
    }
    debug_assert!(is_34bit_value(v34), "round_from_34 input not 34-bit");
    let (negative, units, qe, round, sticky) = parts_of_f64(v34, fmt);
    round_sig_parts(negative, units, qe, round, sticky, fmt, mode)
}

/// Decomposes a finite nonzero binary64 into truncated significand units at
/// the quantum exponent `fmt` would use, plus round and sticky bits.
pub(crate) fn parts_of_f64(v: f64, fmt: FpFormat) -> (bool, u64, i32, bool, bool) {
    debug_assert!(v.is_finite() && v != 0.0);
    let negative = v.is_sign_negative();
    let bits = v.abs().to_bits();
    let biased = (bits >> 52) as i32;
    let (e, m) = if biased == 0 {
        // Binary64 subnormal (can only reach here from intermediate values,
        // not 34-bit results, but keep the decomposition exact).
        (-1022 - 52, bits)
    } else {
        (biased - 1023 - 52, bits & ((1u64 << 52) - 1) | (1u64 << 52))
    };
    // value = m * 2^e exactly
    let e_top = e + 63 - m.leading_zeros() as i32;
    let p = fmt.precision();
    let qe = (e_top - (p as i32 - 1)).max(MIN_NORMAL_EXP - fmt.frac_bits() as i32);
    let shift = qe - e;
    if shift <= 0 {
        // qe >= e_top - 25 and m carries at most 53 significant bits, so the
        // quantum never sits below the lsb by more than zero positions.
        debug_assert_eq!(shift, 0);
        (negative, m, qe, false, false)
    } else if shift >= 64 {
        (negative, 0, qe, false, true) // m != 0, entirely below the round bit
    } else {
        let units = m >> shift;
        let round = (m >> (shift - 1)) & 1 == 1;
        let sticky = m & ((1u64 << (shift - 1)) - 1) != 0;
        (negative, units, qe, round, sticky)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        let t = decode32(0x3f80_0000);
        assert!(!t.negative && t.biased_exp == 127 && t.significand == 0);
        assert!(!t.is_nan && !t.is_subnormal);

        let t = decode32(0x0000_0001);
        assert!(t.is_subnormal);
        assert_eq!(FpFormat::binary32().to_f64(0x0000_0001), exp2i(-149));

        assert!(decode32(0x7fc0_0000).is_nan);
    }

    #[test]
    fn decode_encode_roundtrip_samples() {
        for bits in [0u32, 1, 0x7f7f_ffff, 0x7f80_0000, 0x7fc0_0001, 0xffff_ffff, 0x8000_0000] {
            assert_eq!(encode32(&decode32(bits)), bits);
        }
    }

    #[test]
    fn round_to_odd_34_examples() {
        assert_eq!(round_to_odd_34(1.0), 1.0);
        // 1 + 2^-26 sits between 1 (even) and 1 + 2^-25 (odd trailing bit).
        let v = 1.0 + exp2i(-26);
        assert_eq!(round_to_odd_34(v), 1.0 + exp2i(-25));
        // Strictly below an odd value: picks the odd lower neighbor.
        let lower = 1.0 + exp2i(-25);
        assert_eq!(round_to_odd_34(lower + exp2i(-30)), lower);
        // Odd symmetry.
        assert_eq!(round_to_odd_34(-v), -(1.0 + exp2i(-25)));
    }

    #[test]
    fn round_to_odd_34_exact_and_specials() {
        assert!(round_to_odd_34(f64::NAN).is_nan());
        assert_eq!(round_to_odd_34(f64::INFINITY), f64::INFINITY);
        assert_eq!(round_to_odd_34(0.0), 0.0);
        assert_eq!(round_to_odd_34(-0.0), -0.0);
        assert!(round_to_odd_34(-0.0).is_sign_negative());
        for v in [0.5, 0.75, exp2i(-149), exp2i(-126), exp2i(100), 1.0 - exp2i(-26)] {
            assert_eq!(round_to_odd_34(v), v, "exact 34-bit value must pass through");
        }
    }

    #[test]
    fn succ_pred_34() {
        assert_eq!(succ34(1.0), 1.0 + exp2i(-25));
        assert_eq!(pred34(1.0), 1.0 - exp2i(-26));
        assert_eq!(succ34(pred34(1.0)), 1.0);
        assert_eq!(pred34(exp2i(-149)), exp2i(-149) - exp2i(-151));
        assert_eq!(succ34(-0.0), exp2i(-151));
        assert_eq!(pred34(0.0), -exp2i(-151));
    }

    #[test]
    fn round_from_34_examples() {
        let b32 = FpFormat::binary32();
        assert_eq!(round_from_34(1.0, b32, RoundingMode::NearestEven), 0x3f80_0000);
        // Just above binary32 max finite, toward zero: clamps to max finite.
        let above = max_finite_34();
        assert!(above > f32::MAX as f64);
        assert_eq!(round_from_34(above, b32, RoundingMode::TowardZero), 0x7f7f_ffff);
        assert_eq!(round_from_34(above, b32, RoundingMode::NearestEven), 0x7f80_0000);
        assert_eq!(round_from_34(-above, b32, RoundingMode::TowardPositive), 0xff7f_ffff);
    }

    #[test]
    fn round_from_34_matches_native_f32() {
        // For every 34-bit value derived from f32 neighborhoods, RNE must
        // agree with the hardware f64 -> f32 conversion.
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..200_000 {
            state = state.wrapping_mul(0xd1342543de82ef95).wrapping_add(1);
            let bits = (state >> 32) as u32;
            let t = decode32(bits);
            if t.is_nan || t.is_inf {
                continue;
            }
            let x = f32::from_bits(bits) as f64;
            let v = round_to_odd_34(x * 1.000000001f64);
            let expect = (v as f32).to_bits();
            assert_eq!(
                round_from_34(v, FpFormat::binary32(), RoundingMode::NearestEven),
                expect,
                "v={v:e}"
            );
        }
    }

    #[test]
    fn round_from_34_bfloat16_zero_cos_case() {
        let bf16 = FpFormat::bfloat16();
        let one = round_from_34(1.0, bf16, RoundingMode::TowardZero);
        assert_eq!(one, 0x3f80);
        assert_eq!(bf16.to_f64(one), 1.0);
    }

    #[test]
    fn nan_canonicalizes() {
        for fmt_bits in 10..=32 {
            let fmt = FpFormat::new(fmt_bits).unwrap();
            let out = round_from_34(f64::NAN, fmt, RoundingMode::NearestEven);
            assert_eq!(out, fmt.qnan_bits());
            assert!(fmt.to_f64(out).is_nan());
        }
    }

    #[test]
    fn subnormal_rounding() {
        let b32 = FpFormat::binary32();
        // Smallest positive 34-bit value rounds to zero or min subnormal
        // depending on mode.
        let tiny = exp2i(-151);
        assert_eq!(round_from_34(tiny, b32, RoundingMode::TowardZero), 0);
        assert_eq!(round_from_34(tiny, b32, RoundingMode::TowardPositive), 1);
        assert_eq!(round_from_34(tiny, b32, RoundingMode::NearestEven), 0);
        assert_eq!(round_from_34(-tiny, b32, RoundingMode::TowardNegative), 0x8000_0001);
        // Halfway between 0 and min subnormal: 2^-150.
        let half = exp2i(-150);
        assert_eq!(round_from_34(half, b32, RoundingMode::NearestEven), 0);
        assert_eq!(round_from_34(half, b32, RoundingMode::NearestAway), 1);
    }

    #[test]
    fn max34_value() {
        assert_eq!(max_finite_34(), ((1u64 << 26) - 1) as f64 * exp2i(102));
        assert!(is_34bit_value(max_finite_34()));
        assert!(round_to_odd_34(f64::MAX).is_finite());
    }
}
