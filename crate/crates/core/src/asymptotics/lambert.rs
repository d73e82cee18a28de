//! Principal-branch Lambert W and the saddle point `(1/r) log(1/r) = x log kappa`.

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, NumericContext};

/// f64 starting value: the small-argument expansion, a log1p blend, or the
/// large-argument expansion `L1 - L2 + L2/L1 + (L2^2 - 2 L2)/(2 L1^2)`.
fn seed(y: f64) -> f64 {
    if y < 0.3 {
        y * (1.0 - y + 1.5 * y * y)
    } else if y <= std::f64::consts::E {
        let l = y.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = y.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1 + (l2 * l2 - 2.0 * l2) / (2.0 * l1 * l1)
    }
}

/// `W(y)` for `y >= 0` by Halley iteration at the precision of `ctx`.
pub fn lambert_w(y: &Float, ctx: &NumericContext) -> Result<Float> {
    if y.is_nan() || (y.is_sign_negative() && !y.is_zero()) {
        return Err(Error::Domain(format!("lambert_w takes y >= 0 on the principal branch, got {y}")));
    }
    let prec = ctx.precision_bits();
    if y.is_zero() {
        return Ok(Float::with_val(prec, 0));
    }
    let y = Float::with_val(prec, y);
    let yf = y.to_f64();
    let mut w = if yf.is_finite() {
        Float::with_val(prec, seed(yf))
    } else {
        let l1 = Float::with_val(prec, y.ln_ref());
        let l2 = Float::with_val(prec, l1.ln_ref());
        l1 - l2
    };
    let tol = Float::with_val(prec, 1) >> (prec - 4);
    for _ in 0..200 {
        let ew = Float::with_val(prec, w.exp_ref());
        let f = Float::with_val(prec, &w * &ew) - &y;
        if f.is_zero() {
            return Ok(w);
        }
        let w1 = Float::with_val(prec, &w + 1u32);
        // Halley: dw = f / (e^w (w+1) - (w+2) f / (2(w+1)))
        let corr = Float::with_val(prec, &w + 2u32) * &f / (Float::with_val(prec, &w1 * 2u32));
        let denom = Float::with_val(prec, &ew * &w1) - corr;
        let dw = f / denom;
        w -= &dw;
        let scale = Float::with_val(prec, w.abs_ref()).max(&Float::with_val(prec, 1));
        if Float::with_val(prec, dw.abs_ref()) <= Float::with_val(prec, &tol * &scale) {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence(format!("lambert_w at y = {yf}")))
}

/// Relative residual `|W e^W - y| / y`.
pub fn lambert_residual(w: &Float, y: &Float) -> Float {
    let prec = w.prec();
    let lhs = Float::with_val(prec, w.exp_ref()) * w;
    Float::with_val(prec, &lhs - y).abs() / y
}

/// The saddle point of the Laplace inversion at `x`, with its integer part
/// `N = floor(log_kappa(1/r))`, offset `eta = N - log_kappa(1/r)` in `(-1, 0]`
/// and `Q = q^N / r` in `[1, 1/q)`.
#[derive(Clone, Debug, Serialize)]
pub struct SaddleData {
    #[serde(serialize_with = "ser_float")]
    pub x: Float,
    #[serde(serialize_with = "ser_float")]
    pub r: Float,
    pub n: i64,
    #[serde(serialize_with = "ser_float")]
    pub eta: Float,
    #[serde(serialize_with = "ser_float")]
    pub q_offset: Float,
    /// `log_kappa(1/r)`.
    #[serde(serialize_with = "ser_float")]
    pub log_kappa_inv_r: Float,
}

pub(crate) fn ser_float<S: serde::Serializer>(v: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(v.to_f64())
}

impl SaddleData {
    pub fn new(x: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<Self> {
        let prec = ctx.precision_bits();
        let lk = params.log_kappa(prec);
        let y = Float::with_val(prec, x * &lk);
        if y <= std::f64::consts::E {
            return Err(Error::Domain(format!("saddle point needs x log kappa > e, got {}", y.to_f64())));
        }
        let w = lambert_w(&y, ctx)?;
        let r = Float::with_val(prec, &w / &y);
        let l = Float::with_val(prec, &w / &lk);
        let n = l.to_f64().floor() as i64;
        let eta = Float::with_val(prec, n) - &l;
        let q = params.q_real(prec);
        let q_offset = Float::with_val(prec, eta.clone() * q.ln()).exp();
        Ok(SaddleData { x: Float::with_val(prec, x), r, n, eta, q_offset, log_kappa_inv_r: l })
    }

    /// Relative residual of `(1/r) log(1/r) = x log kappa`.
    pub fn residual(&self, params: &ModelParams) -> Float {
        let prec = self.r.prec();
        let inv = Float::with_val(prec, self.r.recip_ref());
        let lhs = Float::with_val(prec, inv.ln_ref()) * &inv;
        let rhs = Float::with_val(prec, &self.x * params.log_kappa(prec));
        Float::with_val(prec, &lhs - &rhs).abs() / rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn exact_points() {
        let ctx = NumericContext::new(128).unwrap();
        assert_eq!(lambert_w(&Float::with_val(128, 0), &ctx).unwrap(), 0);
        let e = Float::with_val(128, 1).exp();
        let w = lambert_w(&e, &ctx).unwrap();
        assert!(Float::with_val(128, &w - 1u32).abs() < Float::with_val(64, 1) >> 120);
        assert!(lambert_w(&Float::with_val(128, -0.1), &ctx).is_err());
    }

    #[test]
    fn residuals_across_decades() {
        let ctx = NumericContext::new(128).unwrap();
        for k in -6..=40 {
            let y = Float::with_val(128, 10f64.powi(k));
            let w = lambert_w(&y, &ctx).unwrap();
            assert!(lambert_residual(&w, &y) < Float::with_val(64, 1) >> 120, "y=1e{k}");
        }
        let y = Float::with_val(128, 10);
        let w = lambert_w(&y, &ctx).unwrap();
        assert!(lambert_residual(&w, &y) < 1e-30);
    }

    #[test]
    fn saddle_invariants() {
        let ctx = NumericContext::default();
        for (a, b) in [(1, 3), (1, 2), (2, 3)] {
            let params = ModelParams::from_ratio(a, b).unwrap();
            let q = params.q_real(256);
            for x in [20.0, 100.0, 1000.0, 1e6] {
                let s = SaddleData::new(&Float::with_val(256, x), &params, &ctx).unwrap();
                assert!(s.r > 0 && s.r < 1);
                assert!(s.residual(&params) < Float::with_val(64, 1) >> 248);
                assert!(s.eta <= 0 && s.eta > -1);
                assert!(s.q_offset >= 1 && s.q_offset < Float::with_val(256, q.recip_ref()));
                // Q = q^N / r
                let direct = Float::with_val(256, q.clone().pow(s.n as i32)) / &s.r;
                assert!(crate::model::agreement_bits(&direct, &s.q_offset) > 200.0);
            }
        }
    }
}
