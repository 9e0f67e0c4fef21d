//! Polynomial evaluation over the reduced domain and the sin/cos/tan output
//! compensation formulas.
//!
//! Evaluation order is frozen: Horner in binary64 over t = x'^2, with a
//! final multiply by x' for the odd polynomial, no fused multiply-add
//! anywhere. The coefficient certificate only covers this exact sequence of
//! rounded operations; changing the order invalidates it.

use crate::tables::sin_table;

/// Names the frozen evaluation sequence above; recorded in coefficient
/// files so a certificate can't silently outlive an evaluator change.
pub const EVAL_ORDER_TAG: &str = "horner-t-split-nofma-v1";

#[derive(Clone, Debug, PartialEq)]
pub struct PolyPair {
    /// Coefficients of the odd powers x', x'^3, x'^5, ... in that order.
    pub sin_coeffs: Vec<f64>,
    /// Coefficients of the even powers 1, x'^2, x'^4, ... in that order.
    pub cos_coeffs: Vec<f64>,
}

impl PolyPair {
    pub fn sin_degree(&self) -> usize {
        2 * self.sin_coeffs.len() - 1
    }

    pub fn cos_degree(&self) -> usize {
        2 * (self.cos_coeffs.len() - 1)
    }
}

/// P_s(x') = c1 x' + c3 x'^3 + ...
pub fn eval_sin_poly(pp: &PolyPair, xp: f64) -> f64 {
    let t = xp * xp;
    let mut acc = *pp.sin_coeffs.last().expect("empty sin polynomial");
    for c in pp.sin_coeffs.iter().rev().skip(1) {
        acc = acc * t + c;
    }
    acc * xp
}

/// P_c(x') = d0 + d2 x'^2 + ...
pub fn eval_cos_poly(pp: &PolyPair, xp: f64) -> f64 {
    let t = xp * xp;
    let mut acc = *pp.cos_coeffs.last().expect("empty cos polynomial");
    for c in pp.cos_coeffs.iter().rev().skip(1) {
        acc = acc * t + c;
    }
    acc
}

/// sin(k'pi/256) cos(x') + cos(k'pi/256) sin(x'): two rounded products, one
/// rounded sum, in this order.
pub fn compensate_sin(kp: u32, s: f64, c: f64) -> f64 {
    let t = sin_table();
    t.sin_entry(kp) * c + t.cos_entry(kp) * s
}

/// cos(k'pi/256) cos(x') - sin(k'pi/256) sin(x').
pub fn compensate_cos(kp: u32, s: f64, c: f64) -> f64 {
    let t = sin_table();
    t.cos_entry(kp) * c - t.sin_entry(kp) * s
}

/// tan via one binary64 division of the two compensations. The denominator
/// is nonzero for every input that reaches here: cos compensation vanishes
/// only at exact multiples of pi/2, which no binary32 value hits.
pub fn compensate_tan(kp: u32, s: f64, c: f64) -> f64 {
    compensate_sin(kp, s, c) / compensate_cos(kp, s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Binary64-rounded Taylor coefficients; accurate far below the table's
    /// half-ulp on the reduced domain, good enough for structural tests.
    fn taylor_pair() -> PolyPair {
        PolyPair {
            sin_coeffs: vec![1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0],
            cos_coeffs: vec![1.0, -0.5, 1.0 / 24.0, -1.0 / 720.0],
        }
    }

    #[test]
    fn zero_input() {
        let pp = taylor_pair();
        assert_eq!(eval_sin_poly(&pp, 0.0), 0.0);
        assert_eq!(eval_cos_poly(&pp, 0.0), pp.cos_coeffs[0]);
    }

    #[test]
    fn degrees() {
        let pp = taylor_pair();
        assert_eq!(pp.sin_degree(), 7);
        assert_eq!(pp.cos_degree(), 6);
    }

    #[test]
    fn compensation_identities() {
        let (s, c) = (0.001234, 0.9999992);
        assert_eq!(compensate_sin(0, s, c), s);
        assert_eq!(compensate_sin(128, s, c), c);
        assert_eq!(compensate_cos(0, s, c), c);
        assert_eq!(compensate_cos(128, s, c), -s);
        assert_eq!(compensate_cos(384, s, c), s);
        assert_eq!(compensate_tan(0, s, c), s / c);
    }

    #[test]
    fn sin_of_binary32_pi() {
        // reduction of the binary32 nearest pi gives kp = 256 and
        // x' = pi32 - pi; the compensated sin is -sin(x') ~ -8.7422777e-8
        let x = std::f32::consts::PI as f64;
        let red = crate::rangered::reduce(x, crate::rangered::ReductionStrategy::Hybrid);
        assert_eq!(red.kp, 256);
        let pp = taylor_pair();
        let s = eval_sin_poly(&pp, red.xp);
        let c = eval_cos_poly(&pp, red.xp);
        let v = compensate_sin(red.kp, s, c);
        assert!((v - -8.7422777e-8).abs() < 1e-14, "{v:e}");
        let r32 = (v as f32).to_bits();
        assert_eq!(r32, (-8.742278e-8f32).to_bits());
    }

    #[test]
    fn poly_tracks_reference_on_domain() {
        let pp = taylor_pair();
        let half = std::f64::consts::PI / 512.0;
        for i in 0..=1000 {
            let xp = -half + (2.0 * half) * (i as f64) / 1000.0;
            assert!((eval_sin_poly(&pp, xp) - xp.sin()).abs() < 1e-16);
            assert!((eval_cos_poly(&pp, xp) - xp.cos()).abs() < 1e-16);
        }
    }
}
