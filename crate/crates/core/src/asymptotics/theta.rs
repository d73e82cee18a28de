//! The theta-like series `F`, `theta`, the periodic amplitude `G` and the
//! entire function `M`.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::model::{ModelParams, NumericContext};

/// Stop a one-sided sweep after this many consecutive terms below threshold.
const QUIET_TERMS: usize = 3;
const MAX_TERMS: i64 = 1_000_000;

/// Sums `term(j)` over all integers `j`, sweeping outward from `center` in
/// both directions until `QUIET_TERMS` consecutive terms fall below
/// `eps * |sum|`.
fn bilateral<T>(center: i64, eps: &Float, prec: u32, mut term: T) -> Result<Float>
where
    T: FnMut(i64) -> Float,
{
    let mut up = Float::with_val(prec, 0);
    let mut down = Float::with_val(prec, 0);
    let mut quiet = (0, 0);
    let (mut ju, mut jd) = (center, center - 1);
    while quiet.0 < QUIET_TERMS || quiet.1 < QUIET_TERMS {
        if ju - center > MAX_TERMS {
            return Err(Error::NoConvergence("bilateral theta series".into()));
        }
        if quiet.0 < QUIET_TERMS {
            let t = term(ju);
            up += &t;
            let total = Float::with_val(prec, &up + &down).abs();
            quiet.0 = if t.abs() <= total * eps { quiet.0 + 1 } else { 0 };
            ju += 1;
        }
        if quiet.1 < QUIET_TERMS {
            let t = term(jd);
            down += &t;
            let total = Float::with_val(prec, &up + &down).abs();
            quiet.1 = if t.abs() <= total * eps { quiet.1 + 1 } else { 0 };
            jd -= 1;
        }
    }
    Ok(up + down)
}

/// `log_kappa(s)` rounded, the index of the largest term of `F(s)` and
/// `theta(s)`.
fn peak(s: &Float, params: &ModelParams) -> i64 {
    let lk = params.log_kappa(53).to_f64();
    (s.to_f64().ln() / lk).round() as i64
}

fn falling(a: i64, k: u32) -> Float {
    let mut out = 1f64;
    for i in 0..k as i64 {
        out *= (a - i) as f64;
    }
    Float::with_val(64, out)
}

/// `d^m/ds^m [ s^{j+1} / (1 + a s) ]` by Leibniz.
fn term_derivative(s: &Float, j: i64, a: &Float, m: u32, prec: u32) -> Float {
    let den = Float::with_val(prec, a * s) + 1u32;
    let mut acc = Float::with_val(prec, 0);
    for k in 0..=m {
        let f = falling(j + 1, k);
        if f.is_zero() {
            continue;
        }
        let rest = m - k;
        let mut t = Float::with_val(prec, crate::model::binomial(m, k));
        t *= f;
        t *= Float::with_val(prec, s.pow(j + 1 - k as i64));
        // d^rest (1+as)^{-1} = (-1)^rest rest! a^rest (1+as)^{-rest-1}
        let fact: Float = (1..=rest).fold(Float::with_val(prec, 1), |acc, i| acc * i);
        t *= fact;
        t *= Float::with_val(prec, a.pow(rest));
        t /= Float::with_val(prec, (&den).pow(rest + 1));
        if rest % 2 == 1 {
            t = -t;
        }
        acc += t;
    }
    acc
}

/// `F^{(m)}(s)` for `F(s) = sum_{j in Z} q^{j(j+1)/2} s^{j+1} / (1 + q^j s)`.
#[allow(non_snake_case)]
pub fn theta_F(s: &Float, m: u32, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    if !(s.is_finite() && *s > 0) {
        return Err(Error::Domain(format!("F(s) needs s > 0, got {s}")));
    }
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let s = Float::with_val(prec, s);
    bilateral(peak(&s, params), ctx.series_epsilon(), prec, |j| {
        let c = Float::with_val(prec, (&q).pow(j * (j + 1) / 2));
        let a = Float::with_val(prec, (&q).pow(j));
        c * term_derivative(&s, j, &a, m, prec)
    })
}

/// `F, F', ..., F^{(m_max)}` at `s`.
#[allow(non_snake_case)]
pub fn theta_F_derivatives(s: &Float, m_max: u32, params: &ModelParams, ctx: &NumericContext) -> Result<Vec<Float>> {
    (0..=m_max).map(|m| theta_F(s, m, params, ctx)).collect()
}

/// Relative residual of `F(s) = s F(qs)`.
#[allow(non_snake_case)]
pub fn theta_F_residual(s: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    let prec = ctx.precision_bits();
    let lhs = theta_F(s, 0, params, ctx)?;
    let qs = Float::with_val(prec, s * params.q_real(prec));
    let rhs = theta_F(&qs, 0, params, ctx)? * s;
    Ok(Float::with_val(prec, &lhs - &rhs).abs() / lhs)
}

/// `theta(x) = sum_{j in Z} q^{j(j-1)/2} x^j`, the majorant of `F`.
pub fn theta_bound(x: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::Domain(format!("theta(x) needs x > 0, got {x}")));
    }
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let x = Float::with_val(prec, x);
    bilateral(peak(&x, params), ctx.series_epsilon(), prec, |j| Float::with_val(prec, (&q).pow(j * (j - 1) / 2)) * Float::with_val(prec, (&x).pow(j)))
}

/// Relative residual of `theta(x) = x theta(qx)`.
pub fn theta_bound_residual(x: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    let prec = ctx.precision_bits();
    let lhs = theta_bound(x, params, ctx)?;
    let qx = Float::with_val(prec, x * params.q_real(prec));
    let rhs = theta_bound(&qx, params, ctx)? * x;
    Ok(Float::with_val(prec, &lhs - &rhs).abs() / lhs)
}

/// Both printed forms of the periodic amplitude at `u`.
#[derive(Clone, Debug)]
pub struct PeriodicG {
    /// `q^{({u}^2+{u})/2} F(q^{-{u}})`.
    pub lemma: Float,
    /// `q^{({u}^2-{u})/2} sum_j q^{j(j+1)/2} q^{-j{u}} / (1 + q^{j-{u}})`.
    pub theorem: Float,
}

impl PeriodicG {
    pub fn value(&self) -> &Float {
        &self.lemma
    }

    /// `|lemma - theorem| / lemma`.
    pub fn discrepancy(&self) -> Float {
        Float::with_val(self.lemma.prec(), &self.lemma - &self.theorem).abs() / &self.lemma
    }
}

fn frac(u: &Float) -> Float {
    let fl = Float::with_val(u.prec(), u.floor_ref());
    Float::with_val(u.prec(), u - fl)
}

pub fn periodic_g(u: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<PeriodicG> {
    let prec = ctx.precision_bits();
    let f = frac(&Float::with_val(prec, u));
    let q = params.q_real(prec);
    let lq = Float::with_val(prec, q.ln_ref());
    let qpow = |e: Float| Float::with_val(prec, e * &lq).exp();
    let f2 = Float::with_val(prec, f.square_ref());
    let arg = qpow(Float::with_val(prec, -&f));
    let lemma = qpow(Float::with_val(prec, &f2 + &f) / 2u32) * theta_F(&arg, 0, params, ctx)?;
    let series = bilateral(0, ctx.series_epsilon(), prec, |j| {
        let c = Float::with_val(prec, (&q).pow(j * (j + 1) / 2));
        let shift = qpow(Float::with_val(prec, -(j as f64)) * &f);
        let den = qpow(Float::with_val(prec, j) - &f) + 1u32;
        c * shift / den
    })?;
    let theorem = qpow(Float::with_val(prec, &f2 - &f) / 2u32) * series;
    Ok(PeriodicG { lemma, theorem })
}

/// `M(x) = sum_{j>=0} q^{C(j,2)} x^j / j!` and its derivatives
/// `M^{(k)}(x) = sum_j q^{C(j+k,2)} x^j / j!`.
pub fn m_series(x: &Float, k: u32, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::Domain(format!("M(x) needs x >= 0, got {x}")));
    }
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let eps = ctx.series_epsilon();
    let k = k as u64;
    // t_j = q^{C(j+k,2)} x^j / j!, ratio t_{j+1}/t_j = q^{j+k} x / (j+1)
    let mut t = Float::with_val(prec, (&q).pow(k * k.saturating_sub(1) / 2));
    let mut qjk = Float::with_val(prec, (&q).pow(k));
    let mut sum = Float::with_val(prec, 0);
    let mut quiet = 0;
    for j in 0u64.. {
        sum += &t;
        let ratio = Float::with_val(prec, &qjk * x) / (j + 1);
        let small = Float::with_val(prec, t.abs_ref()) <= Float::with_val(prec, &sum * eps);
        quiet = if small && ratio < 1 { quiet + 1 } else { 0 };
        if quiet >= QUIET_TERMS || t.is_zero() && ratio < 1 {
            return Ok(sum);
        }
        if j > MAX_TERMS as u64 {
            return Err(Error::NoConvergence("M(x) series".into()));
        }
        t *= ratio;
        qjk *= &q;
    }
    unreachable!()
}

/// Relative residual of `M'(x) = M(qx)`.
pub fn m_series_residual(x: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    let prec = ctx.precision_bits();
    let lhs = m_series(x, 1, params, ctx)?;
    let qx = Float::with_val(prec, x * params.q_real(prec));
    let rhs = m_series(&qx, 0, params, ctx)?;
    Ok(Float::with_val(prec, &lhs - &rhs).abs() / lhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> ModelParams {
        ModelParams::from_ratio(1, 2).unwrap()
    }

    fn tiny() -> Float {
        Float::with_val(64, 1e-30)
    }

    /// Fixed window `[-60, 60]`, no truncation logic.
    fn f_window(s: &Float, params: &ModelParams) -> Float {
        let q = params.q_real(256);
        let mut sum = Float::with_val(256, 0);
        for j in -60i64..=60 {
            let c = Float::with_val(256, (&q).pow(j * (j + 1) / 2));
            let a = Float::with_val(256, (&q).pow(j));
            let num = Float::with_val(256, s.pow(j + 1));
            sum += c * num / (a * s + 1u32);
        }
        sum
    }

    #[test]
    fn f_functional_equation_and_window() {
        let ctx = NumericContext::default();
        let params = half();
        let two = Float::with_val(256, 2);
        assert!(theta_F_residual(&two, &params, &ctx).unwrap() < tiny());
        let three = Float::with_val(256, 3);
        let f3 = theta_F(&three, 0, &params, &ctx).unwrap();
        assert!(crate::model::agreement_bits(&f3, &f_window(&three, &params)) > 120.0);
        // F(1/q) = F(1)/q
        let one = Float::with_val(256, 1);
        let inv_q = Float::with_val(256, params.q_real(256).recip_ref());
        let a = theta_F(&inv_q, 0, &params, &ctx).unwrap();
        let b = theta_F(&one, 0, &params, &ctx).unwrap() * &inv_q;
        assert!(crate::model::agreement_bits(&a, &b) > 120.0);
        assert!(theta_F(&Float::with_val(256, 0), 0, &params, &ctx).is_err());
    }

    #[test]
    fn f_derivatives_match_differences() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(1, 3).unwrap();
        let s = Float::with_val(256, 1.2);
        let h = Float::with_val(256, 1e-20);
        let d = theta_F_derivatives(&s, 3, &params, &ctx).unwrap();
        for m in 0..3 {
            let up = theta_F(&Float::with_val(256, &s + &h), m, &params, &ctx).unwrap();
            let dn = theta_F(&Float::with_val(256, &s - &h), m, &params, &ctx).unwrap();
            let fd = (up - dn) / (Float::with_val(256, &h * 2u32));
            let rel = Float::with_val(256, &fd - &d[m as usize + 1]).abs() / d[m as usize + 1].clone().abs();
            assert!(rel < 1e-30, "m={m}");
        }
    }

    #[test]
    fn theta_functional_equation() {
        let ctx = NumericContext::default();
        let params = half();
        assert!(theta_bound_residual(&Float::with_val(256, 5), &params, &ctx).unwrap() < tiny());
        let one = Float::with_val(256, 1);
        let inv_q = Float::with_val(256, params.q_real(256).recip_ref());
        let a = theta_bound(&inv_q, &params, &ctx).unwrap();
        let b = theta_bound(&one, &params, &ctx).unwrap() * &inv_q;
        assert!(crate::model::agreement_bits(&a, &b) > 120.0);
        let q = params.q_real(256);
        let window: Float = (-60i64..=60).fold(Float::with_val(256, 0), |acc, j| acc + Float::with_val(256, (&q).pow(j * (j - 1) / 2)));
        let th1 = theta_bound(&one, &params, &ctx).unwrap();
        assert!(crate::model::agreement_bits(&th1, &window) > 120.0);
    }

    #[test]
    fn periodic_amplitude() {
        let ctx = NumericContext::default();
        let params = half();
        let g03 = periodic_g(&Float::with_val(256, 0.3), &params, &ctx).unwrap();
        let g13 = periodic_g(&(Float::with_val(256, 0.3) + 1u32), &params, &ctx).unwrap();
        assert!(crate::model::agreement_bits(g03.value(), g13.value()) > 200.0);
        let g0 = periodic_g(&Float::with_val(256, 0), &params, &ctx).unwrap();
        let f1 = theta_F(&Float::with_val(256, 1), 0, &params, &ctx).unwrap();
        assert_eq!(*g0.value(), f1);
        for u in [0.0, 0.25, 0.5, 0.75] {
            let g = periodic_g(&Float::with_val(256, u), &params, &ctx).unwrap();
            assert!(*g.value() > 0);
            assert!(g.discrepancy() < 1e-60, "u={u}");
        }
    }

    #[test]
    fn m_series_checks() {
        let ctx = NumericContext::default();
        let params = half();
        assert_eq!(m_series(&Float::with_val(256, 0), 0, &params, &ctx).unwrap(), 1);
        assert!(m_series_residual(&Float::with_val(256, 50), &params, &ctx).unwrap() < tiny());
        // M'(x) by central difference
        let x = Float::with_val(256, 7.5);
        let h = Float::with_val(256, 1e-25);
        let up = m_series(&Float::with_val(256, &x + &h), 0, &params, &ctx).unwrap();
        let dn = m_series(&Float::with_val(256, &x - &h), 0, &params, &ctx).unwrap();
        let fd = (up - dn) / (Float::with_val(256, &h * 2u32));
        let d1 = m_series(&x, 1, &params, &ctx).unwrap();
        assert!(crate::model::agreement_bits(&fd, &d1) > 100.0);
    }
}
