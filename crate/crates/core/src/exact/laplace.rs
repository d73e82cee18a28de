//! The modified Laplace transform
//! `f~*(s) = sum_{j>=0} q^{j(j+1)/2} s^{j+1} / (1 + q^j s)`.

use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::model::{ModelParams, NumericContext};

/// Minimal complex arithmetic over MPFR reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::with_val(re.prec(), 0);
        Complex { re, im }
    }

    fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &Complex) -> Complex {
        Complex::new(Float::with_val(self.prec(), &self.re + &o.re), Float::with_val(self.prec(), &self.im + &o.im))
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        Complex::new(Float::with_val(self.prec(), &self.re - &o.re), Float::with_val(self.prec(), &self.im - &o.im))
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Complex::new(re, im)
    }

    pub fn scale(&self, k: &Float) -> Complex {
        Complex::new(Float::with_val(self.prec(), &self.re * k), Float::with_val(self.prec(), &self.im * k))
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.square_ref()) + Float::with_val(self.prec(), self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, o: &Complex) -> Complex {
        let p = self.prec();
        let d = o.norm_sqr();
        let re = (Float::with_val(p, &self.re * &o.re) + Float::with_val(p, &self.im * &o.im)) / &d;
        let im = (Float::with_val(p, &self.im * &o.re) - Float::with_val(p, &self.re * &o.im)) / &d;
        Complex::new(re, im)
    }

    pub fn add_real(&self, k: u32) -> Complex {
        Complex::new(Float::with_val(self.prec(), &self.re + k), self.im.clone())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.re, self.im)
    }
}

/// Stop after this many consecutive terms below the threshold.
const QUIET_TERMS: usize = 3;

/// `f~*(s)` for complex `s` with positive real part.
pub fn laplace_star_complex(s: &Complex, params: &ModelParams, ctx: &NumericContext) -> Result<Complex> {
    if s.re.is_sign_negative() || s.re.is_zero() {
        return Err(Error::Domain(format!("f~* needs Re(s) > 0, got s = {s}")));
    }
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let eps = ctx.series_epsilon();
    let s = Complex::new(Float::with_val(prec, &s.re), Float::with_val(prec, &s.im));
    let mut coef = Float::with_val(prec, 1); // q^{j(j+1)/2}
    let mut qj = Float::with_val(prec, 1); // q^j
    let mut spow = s.clone(); // s^{j+1}
    let mut sum = Complex::from_real(Float::with_val(prec, 0));
    let mut quiet = 0;
    for j in 0.. {
        let denom = s.scale(&qj).add_real(1);
        let term = spow.div(&denom).scale(&coef);
        sum = sum.add(&term);
        let small = term.abs() <= Float::with_val(prec, eps * sum.abs());
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= QUIET_TERMS {
            break;
        }
        if j > 1_000_000 {
            return Err(Error::NoConvergence("f~* series".into()));
        }
        qj *= &q;
        coef *= &qj;
        spow = spow.mul(&s);
    }
    Ok(sum)
}

/// `f~*(s)` for real `s > 0`.
pub fn laplace_star(s: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    let z = Complex::from_real(s.clone());
    Ok(laplace_star_complex(&z, params, ctx)?.re)
}

/// Relative residual of `f~*(s) = s f~*(qs) + s/(1+s)`.
pub fn laplace_star_residual(s: &Complex, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let lhs = laplace_star_complex(s, params, ctx)?;
    let shifted = laplace_star_complex(&s.scale(&q), params, ctx)?;
    let rhs = s.mul(&shifted).add(&s.div(&s.add_real(1)));
    Ok(lhs.sub(&rhs).abs() / lhs.abs())
}

/// `(1/(1+s)) sum_{n<terms} mu_n (s/(1+s))^n`, the Euler transform of the
/// ordinary generating function of `mu`.
pub fn euler_transform_partial(mu: &[Float], s: &Float, terms: usize) -> Float {
    let prec = s.prec();
    let one_s = Float::with_val(prec, s + 1u32);
    let ratio = Float::with_val(prec, s / &one_s);
    let mut w = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    for m in mu.iter().take(terms) {
        sum += Float::with_val(prec, m * &w);
        w *= &ratio;
    }
    sum / one_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::mu_recurrence;

    #[test]
    fn small_s_limit_and_domain() {
        let params = ModelParams::from_ratio(1, 2).unwrap();
        let ctx = NumericContext::default();
        let tiny = Float::with_val(256, 1e-40);
        let v = laplace_star(&tiny, &params, &ctx).unwrap();
        assert!(v < Float::with_val(64, 1e-39));
        assert!(laplace_star(&Float::with_val(256, 0), &params, &ctx).is_err());
        assert!(laplace_star(&Float::with_val(256, -1), &params, &ctx).is_err());
    }

    #[test]
    fn functional_equation_at_one() {
        let params = ModelParams::from_ratio(1, 2).unwrap();
        let ctx = NumericContext::default();
        let s = Complex::from_real(Float::with_val(256, 1));
        let r = laplace_star_residual(&s, &params, &ctx).unwrap();
        assert!(r < Float::with_val(64, 1e-30));
        let z = Complex::new(Float::with_val(256, 0.7), Float::with_val(256, 2.5));
        assert!(laplace_star_residual(&z, &params, &ctx).unwrap() < Float::with_val(64, 1e-30));
    }

    #[test]
    fn euler_transform_identity() {
        let params = ModelParams::from_ratio(1, 2).unwrap();
        let ctx = NumericContext::default();
        let mu = mu_recurrence::<Float>(200, &params, &ctx);
        let s = Float::with_val(256, 0.1);
        let a = laplace_star(&s, &params, &ctx).unwrap();
        let b = euler_transform_partial(&mu, &s, 200);
        assert!(Float::with_val(256, &a - &b).abs() < 1e-25);
    }
}
