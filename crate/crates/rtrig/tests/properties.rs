//! Randomized invariants that need no oracle: encode/decode, round-to-odd
//! shape, reduction ranges, parity, and artifact literal round-trips.

use proptest::prelude::*;

use rtrig::artifacts::{format_hex_f64, parse_hex_f64};
use rtrig::fpcore::{
    decode32, encode32, is_34bit_value, round_from_34, round_to_odd_34, FpFormat, RoundingMode,
};
use rtrig::kernels::{eval34, Func};
use rtrig::rangered::{pi_constants, pi_over_128, reduce, ReductionStrategy};

proptest! {
    #[test]
    fn decode_encode_round_trip(bits in any::<u32>()) {
        let t = decode32(bits);
        if t.is_nan {
            prop_assert!(f32::from_bits(bits).is_nan());
        } else {
            prop_assert_eq!(encode32(&t), bits);
        }
    }

    #[test]
    fn round_to_odd_is_idempotent_34bit(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let r = round_to_odd_34(v);
        prop_assert!(is_34bit_value(r) || r == 0.0 || r.is_infinite());
        prop_assert_eq!(round_to_odd_34(r).to_bits(), r.to_bits());
    }

    #[test]
    fn rounding_modes_are_ordered(bits in any::<u64>(), total in 10u32..=32) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let v = round_to_odd_34(v);
        let fmt = FpFormat::new(total).unwrap();
        let dn = fmt.to_f64(round_from_34(v, fmt, RoundingMode::TowardNegative));
        let up = fmt.to_f64(round_from_34(v, fmt, RoundingMode::TowardPositive));
        let ne = fmt.to_f64(round_from_34(v, fmt, RoundingMode::NearestEven));
        let tz = fmt.to_f64(round_from_34(v, fmt, RoundingMode::TowardZero));
        prop_assert!(dn <= v || dn == f64::NEG_INFINITY);
        prop_assert!(up >= v || up == f64::INFINITY);
        prop_assert!(dn <= ne && ne <= up);
        prop_assert!(tz.abs() <= v.abs());
    }

    #[test]
    fn reduction_stays_in_range(bits in any::<u32>(), strat_ix in 0usize..4) {
        let x = FpFormat::binary32().to_f64(bits);
        prop_assume!(x.is_finite() && x.abs() >= pi_over_128());
        let s = ReductionStrategy::ALL[strat_ix];
        let red = reduce(x, s);
        prop_assert!(red.kp < 512);
        // |r| <= 1/2 + 2^-40 in units of pi/256
        let r = red.xp / pi_constants().pi_over_256;
        prop_assert!(r.abs() <= 0.5 + 2f64.powi(-40), "r = {}", r);
    }

    #[test]
    fn parity_of_kernels(mag in 0u32..0x7f80_0000) {
        let neg = mag | 0x8000_0000;
        let s = ReductionStrategy::Hybrid;
        prop_assert_eq!(
            eval34(Func::Sin, mag, s).to_bits(),
            (-eval34(Func::Sin, neg, s)).to_bits()
        );
        prop_assert_eq!(
            eval34(Func::Tan, mag, s).to_bits(),
            (-eval34(Func::Tan, neg, s)).to_bits()
        );
        prop_assert_eq!(
            eval34(Func::Cos, mag, s).to_bits(),
            eval34(Func::Cos, neg, s).to_bits()
        );
    }

    #[test]
    fn hex_float_literals_round_trip(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let back = parse_hex_f64(&format_hex_f64(v)).unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}
