//! The Poisson transform `f~(x) = e^{-x} sum_n mu_n x^n / n!` and its
//! derivatives.
//!
//! Two routes:
//! * from a table of `mu_n`: `f~^{(j)}(x) = e^{-x} sum_n (Delta^j mu)_n x^n/n!`,
//!   all terms positive, so the table precision is the result precision;
//! * from the coefficients: `f~^{(j)}(x) = sum_n mu~_{n+j} x^n/n!`, which needs
//!   no table but cancels about `1.44 x` bits and therefore runs at
//!   `required_precision(x)`.

use rug::Float;

use super::mu::mu_recurrence;
use crate::error::{Error, Result};
use crate::model::{agreement_bits, binomial, required_precision, ModelParams, NumericContext};

/// Extra factor below `series_epsilon` at which the series stop, so that the
/// geometric tail beyond the last term stays under the threshold.
const TAIL_GUARD: u32 = 6;

/// Past the peak at `n ~ x`, stop after this many consecutive small terms.
const QUIET_TERMS: usize = 3;

#[derive(Clone, Debug)]
pub struct PoissonGf {
    params: ModelParams,
    ctx: NumericContext,
    mu: Vec<Float>,
}

impl PoissonGf {
    /// Builds a real-mode `mu` table up to `max_n`.
    pub fn new(params: &ModelParams, ctx: &NumericContext, max_n: usize) -> Self {
        let mu = mu_recurrence::<Float>(max_n, params, ctx);
        Self::from_mu(params, ctx, mu)
    }

    pub fn from_mu(params: &ModelParams, ctx: &NumericContext, mu: Vec<Float>) -> Self {
        PoissonGf { params: params.clone(), ctx: ctx.clone(), mu }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn context(&self) -> &NumericContext {
        &self.ctx
    }

    pub fn mu(&self) -> &[Float] {
        &self.mu
    }

    /// Table length needed to evaluate at `x`: the first `n > x` where the
    /// Poisson weight drops below the stopping threshold, plus slack for the
    /// growth of `mu_n`, the quiet terms and the `j` differences.
    pub fn table_len_for(x: f64, j: usize, ctx: &NumericContext) -> usize {
        let log_eps = ctx.series_epsilon().to_f64().ln() - (TAIL_GUARD as f64 + 16.0) * std::f64::consts::LN_2;
        let mut n = x.floor() + 1.0;
        if x > 0.0 {
            while n * x.ln() - x - libm::lgamma(n + 1.0) > log_eps {
                n += 1.0;
            }
        }
        n as usize + j + 16
    }

    fn forward_difference(&self, n: usize, j: usize) -> Result<Float> {
        let top = self.mu.len() - 1;
        if n + j > top {
            return Err(Error::TableTooShort { needed: n + j, have: top });
        }
        let mut d = Float::with_val(self.ctx.precision_bits(), 0);
        for i in 0..=j {
            let c = Float::with_val(self.ctx.precision_bits(), binomial(j as u32, i as u32));
            if (j - i).is_multiple_of(2) {
                d += c * &self.mu[n + i];
            } else {
                d -= c * &self.mu[n + i];
            }
        }
        Ok(d)
    }

    /// `f~^{(j)}(x)` for `x >= 0` by the positive route.
    pub fn eval(&self, x: &Float, j: usize) -> Result<Float> {
        if x.is_sign_negative() && !x.is_zero() {
            return Err(Error::Domain(format!("f~ needs x >= 0, got {x}")));
        }
        let prec = self.ctx.precision_bits();
        let eps = Float::with_val(prec, self.ctx.series_epsilon() >> TAIL_GUARD);
        let xf = x.to_f64();
        let mut weight = Float::with_val(prec, -x).exp();
        let mut sum = Float::with_val(prec, 0);
        let mut n = 0usize;
        let mut quiet = 0;
        loop {
            let term = Float::with_val(prec, &weight * self.forward_difference(n, j)?);
            sum += &term;
            quiet = if n as f64 > xf && term.abs() <= Float::with_val(prec, sum.abs_ref()) * &eps { quiet + 1 } else { 0 };
            if quiet >= QUIET_TERMS {
                return Ok(sum);
            }
            n += 1;
            weight *= x;
            weight /= n as u32;
        }
    }

    /// Relative residual of `f~'(x) = f~(qx) + e^{-x}`.
    pub fn functional_residual(&self, x: &Float) -> Result<Float> {
        let prec = self.ctx.precision_bits();
        let lhs = self.eval(x, 1)?;
        let qx = Float::with_val(prec, x * self.params.q_real(prec));
        let rhs = self.eval(&qx, 0)? + Float::with_val(prec, -x).exp();
        let diff = Float::with_val(prec, &lhs - &rhs).abs();
        Ok(diff / lhs.abs())
    }
}

/// `f~^{(j)}(x)` from the `mu~` coefficients. Requires
/// `required_precision(x)` bits in `ctx`.
pub fn eval_alternating(params: &ModelParams, x: &Float, j: usize, ctx: &NumericContext) -> Result<Float> {
    let xf = x.to_f64();
    if xf < 0.0 {
        return Err(Error::Domain(format!("f~ needs x >= 0, got {xf}")));
    }
    let need = required_precision(xf);
    let prec = ctx.precision_bits();
    if prec < need {
        return Err(Error::PrecisionInsufficient { have: prec, need, x: xf });
    }
    let q = params.q_real(prec);
    let eps = Float::with_val(prec, ctx.series_epsilon() >> TAIL_GUARD);
    // tilde = mu~_k, qk = q^k, advanced together
    let mut tilde = Float::with_val(prec, 0);
    let mut qk = Float::with_val(prec, 1);
    let mut k = 0usize;
    let advance = |tilde: &mut Float, qk: &mut Float, k: &mut usize| {
        *tilde *= &*qk;
        if k.is_multiple_of(2) {
            *tilde += 1u32;
        } else {
            *tilde -= 1u32;
        }
        *qk *= &q;
        *k += 1;
    };
    for _ in 0..j {
        advance(&mut tilde, &mut qk, &mut k);
    }
    let mut weight = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut n = 0usize;
    let mut quiet = 0;
    loop {
        let term = Float::with_val(prec, &weight * &tilde);
        sum += &term;
        quiet = if n as f64 > xf && term.abs() <= Float::with_val(prec, sum.abs_ref()) * &eps { quiet + 1 } else { 0 };
        if quiet >= QUIET_TERMS {
            return Ok(sum);
        }
        n += 1;
        weight *= x;
        weight /= n as u32;
        advance(&mut tilde, &mut qk, &mut k);
    }
}

/// Minimum agreement between the result at `P` and at `2P` bits that the
/// checked evaluation accepts: the 64 significant bits the precision policy
/// promises, less 16 bits of slack.
pub const MIN_AGREEMENT_BITS: f64 = 48.0;

/// [`eval_alternating`] plus a re-run at doubled precision; fails with
/// `CancellationCheck` if the two disagree in more than the last 16 of
/// the promised 64 bits.
pub fn eval_alternating_checked(params: &ModelParams, x: &Float, j: usize, ctx: &NumericContext) -> Result<Float> {
    let a = eval_alternating(params, x, j, ctx)?;
    let b = eval_alternating(params, &Float::with_val(2 * ctx.precision_bits(), x), j, &ctx.doubled())?;
    let agree = agreement_bits(&a, &b);
    if agree < MIN_AGREEMENT_BITS {
        return Err(Error::CancellationCheck { x: x.to_f64(), agree_bits: agree });
    }
    Ok(a)
}
