//! Leading-order, Poisson-Charlier and saddle-point approximations of `mu_n`
//! and `f~(x)`, the ratio relations, and the variance law.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use super::lambert::SaddleData;
use super::theta::{periodic_g, theta_F_derivatives};
use crate::error::{Error, Result};
use crate::exact::PoissonGf;
use crate::model::{binomial, ModelParams, NumericContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateOrder {
    Leading,
    /// The saddle-point leading term in `r` (before the `log x` rewrite).
    SaddleLeading,
    CharlierCorrected(u32),
    AltExpansion(u32),
}

impl fmt::Display for EstimateOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateOrder::Leading => write!(f, "leading"),
            EstimateOrder::SaddleLeading => write!(f, "saddle_leading"),
            EstimateOrder::CharlierCorrected(j) => write!(f, "charlier_corrected({j})"),
            EstimateOrder::AltExpansion(m) => write!(f, "alt_expansion({m})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticEstimate {
    pub value: Float,
    pub log_value: Float,
    pub order: EstimateOrder,
    pub periodic_amplitude: Option<Float>,
}

impl AsymptoticEstimate {
    fn from_log(log_value: Float, order: EstimateOrder, g: Option<Float>) -> Self {
        let value = Float::with_val(log_value.prec(), log_value.exp_ref());
        AsymptoticEstimate { value, log_value, order, periodic_amplitude: g }
    }

    fn from_value(value: Float, order: EstimateOrder) -> Self {
        let log_value = Float::with_val(value.prec(), value.abs_ref()).ln();
        AsymptoticEstimate { value, log_value, order, periodic_amplitude: None }
    }
}

/// The leading-order estimate of `mu_n` together with the quantities the
/// printed statement is built from.
#[derive(Clone, Debug)]
pub struct LeadingEstimate {
    /// `G(u)/sqrt(2 pi) * n^{1/log kappa + 1/2} / log_kappa n * exp(log(n/log_kappa n)^2 / (2 log kappa))`.
    pub estimate: AsymptoticEstimate,
    /// The same amplitude in `r`, before `W` is expanded in `log n`.
    pub saddle: AsymptoticEstimate,
    /// `u = log_kappa(n / log_kappa n)`.
    pub u: Float,
    /// `P_0(u)` as printed: `-1/2 log 2 pi - log kappa + log G(u)`.
    pub p0_printed: Float,
    /// `P_0(u)` as implied by the leading term: `-1/2 log 2 pi + log log kappa + log G(u)`.
    pub p0_consistent: Float,
    /// `log mu_n` rebuilt from the log-scale statement with `p0_consistent`.
    pub log_from_p0: Float,
}

fn require_n(n: f64, min: f64, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("{what} needs n >= {min}, got {n}")));
    }
    Ok(())
}

fn log_2pi(prec: u32) -> Float {
    (Float::with_val(prec, rug::float::Constant::Pi) * 2u32).ln()
}

pub fn mu_leading(n: f64, params: &ModelParams, ctx: &NumericContext) -> Result<LeadingEstimate> {
    require_n(n, 16.0, "mu_leading")?;
    let prec = ctx.precision_bits();
    let lk = params.log_kappa(prec);
    let nf = Float::with_val(prec, n);
    let log_n = Float::with_val(prec, nf.ln_ref());
    let l = Float::with_val(prec, &log_n / &lk); // log_kappa n
    let log_ratio = Float::with_val(prec, &log_n - Float::with_val(prec, l.ln_ref()));
    let u = Float::with_val(prec, &log_ratio / &lk);
    let g = periodic_g(&u, params, ctx)?;
    let log_g = Float::with_val(prec, g.value().ln_ref());
    let half_log_2pi = log_2pi(prec) / 2u32;
    let expo = Float::with_val(prec, lk.recip_ref()) + Float::with_val(prec, 0.5);
    let quad = Float::with_val(prec, log_ratio.square_ref()) / (Float::with_val(prec, &lk * 2u32));
    let log_est = Float::with_val(prec, &log_g - &half_log_2pi) + Float::with_val(prec, &expo * &log_n) - Float::with_val(prec, l.ln_ref()) + &quad;

    let log_lk = Float::with_val(prec, lk.ln_ref());
    let p0_printed = Float::with_val(prec, &log_g - &half_log_2pi) - &lk;
    let p0_consistent = Float::with_val(prec, &log_g - &half_log_2pi) + &log_lk;
    let log_log_n = Float::with_val(prec, log_n.ln_ref());
    let log_from_p0 = Float::with_val(prec, &quad + Float::with_val(prec, &expo * &log_n)) - log_log_n + &p0_consistent;

    let saddle = saddle_leading(&nf, params, ctx)?;
    Ok(LeadingEstimate {
        estimate: AsymptoticEstimate::from_log(log_est, EstimateOrder::Leading, Some(g.value().clone())),
        saddle,
        u,
        p0_printed,
        p0_consistent,
        log_from_p0,
    })
}

/// `exp(log(1/r)^2/(2 log kappa)) G(log_kappa(1/r)) / (r^{1/log kappa + 1/2} sqrt(2 pi log_kappa(1/r)))`.
pub fn saddle_leading(x: &Float, params: &ModelParams, ctx: &NumericContext) -> Result<AsymptoticEstimate> {
    let prec = ctx.precision_bits();
    let lk = params.log_kappa(prec);
    let sd = SaddleData::new(x, params, ctx)?;
    let log_inv_r = Float::with_val(prec, &sd.log_kappa_inv_r * &lk);
    let g = periodic_g(&sd.log_kappa_inv_r, params, ctx)?;
    let expo = Float::with_val(prec, lk.recip_ref()) + Float::with_val(prec, 0.5);
    let mut log_v = Float::with_val(prec, log_inv_r.square_ref()) / (Float::with_val(prec, &lk * 2u32));
    log_v += Float::with_val(prec, g.value().ln_ref());
    log_v += Float::with_val(prec, &expo * &log_inv_r);
    log_v -= (log_2pi(prec) + Float::with_val(prec, sd.log_kappa_inv_r.ln_ref())) / 2u32;
    Ok(AsymptoticEstimate::from_log(log_v, EstimateOrder::SaddleLeading, Some(g.value().clone())))
}

/// The Poisson-Charlier polynomial
/// `tau_j(n) = sum_l C(j,l) (-1)^l n^l n!/(n-j+l)!`.
pub fn tau(j: u32, n: u64) -> Integer {
    let mut acc = Integer::new();
    for l in 0..=j {
        // n!/(n-j+l)! = falling factorial of n of length j-l; zero once j-l > n
        let len = (j - l) as u64;
        let fall = if len > n { Integer::new() } else { (0..len).fold(Integer::from(1), |a, i| a * (n - i)) };
        let term = binomial(j, l) * Integer::from(n).pow(l) * fall;
        if l % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `f~(n) + sum_{2<=j<=terms} f~^{(j)}(n) tau_j(n) / j!`.
pub fn charlier_correction(n: u64, terms: u32, gf: &PoissonGf) -> Result<AsymptoticEstimate> {
    if !(2..=4).contains(&terms) {
        return Err(Error::InvalidParameter(format!("charlier terms must be 2, 3 or 4, got {terms}")));
    }
    let prec = gf.context().precision_bits();
    let x = Float::with_val(prec, n);
    let mut acc = gf.eval(&x, 0)?;
    let mut fact = Integer::from(1);
    for j in 2..=terms {
        fact *= j;
        let d = gf.eval(&x, j as usize)?;
        acc += d * Float::with_val(prec, tau(j, n)) / Float::with_val(prec, &fact);
    }
    Ok(AsymptoticEstimate::from_value(acc, EstimateOrder::CharlierCorrected(terms)))
}

/// Which `r` the alternative expansion is centred on: `r = N/x` (the
/// default) or `r = (N+1)/x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AltCentre {
    #[default]
    N,
    NPlusOne,
}

/// `T_m(N) = sum_j C(m,j) (-1)^j N! rho^j / (N+j)!` with `rho = r x`.
pub fn t_m(m: u32, n: u64, rho: u64, prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 0);
    let mut ratio = Float::with_val(prec, 1); // N! rho^j / (N+j)!
    for j in 0..=m {
        if j > 0 {
            ratio *= rho;
            ratio /= n + j as u64;
        }
        let t = Float::with_val(prec, &ratio * Float::with_val(prec, binomial(m, j)));
        if j % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct AltExpansion {
    pub saddle: SaddleData,
    pub centre: AltCentre,
    /// `Q = q^N x / rho`.
    pub q_point: Float,
    /// `f~` approximations using terms `m = 0..=k`, for `k = 0..=M`.
    pub partial_sums: Vec<AsymptoticEstimate>,
}

impl AltExpansion {
    pub fn last(&self) -> &AsymptoticEstimate {
        self.partial_sums.last().expect("at least one term")
    }
}

/// `f~(x) ~ q^{C(N,2)} x^N/N! sum_{m<=M} (-1)^m Q^m / m! F^{(m)}(Q) T_m(N)`.
pub fn alt_expansion(x: &Float, terms: u32, centre: AltCentre, params: &ModelParams, ctx: &NumericContext) -> Result<AltExpansion> {
    let prec = ctx.precision_bits();
    let saddle = SaddleData::new(x, params, ctx)?;
    if saddle.n < 2 {
        return Err(Error::Domain(format!("alt_expansion needs N >= 2, got N = {} at x = {x}", saddle.n)));
    }
    let n = saddle.n as u64;
    let rho = match centre {
        AltCentre::N => n,
        AltCentre::NPlusOne => n + 1,
    };
    let q = params.q_real(prec);
    let q_point = Float::with_val(prec, (&q).pow(n)) * x / rho;
    let derivs = theta_F_derivatives(&q_point, terms, params, ctx)?;
    let xf = Float::with_val(prec, x);
    let log_pref = Float::with_val(prec, (n * (n - 1) / 2) as f64) * Float::with_val(prec, q.ln_ref()) + Float::with_val(prec, xf.ln_ref()) * n
        - Float::with_val(prec, n + 1).ln_gamma();
    let pref = Float::with_val(prec, log_pref.exp_ref());
    let mut sum = Float::with_val(prec, 0);
    let mut qm = Float::with_val(prec, 1); // Q^m / m!
    let mut partial_sums = Vec::with_capacity(terms as usize + 1);
    for m in 0..=terms {
        if m > 0 {
            qm *= &q_point;
            qm /= m;
        }
        let mut t = Float::with_val(prec, &qm * &derivs[m as usize]) * t_m(m, n, rho, prec);
        if m % 2 == 1 {
            t = -t;
        }
        sum += t;
        let value = Float::with_val(prec, &sum * &pref);
        partial_sums.push(AsymptoticEstimate::from_value(value, EstimateOrder::AltExpansion(m)));
    }
    Ok(AltExpansion { saddle, centre, q_point, partial_sums })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub x: f64,
    pub j: u32,
    /// `f~^{(j)}(x) / f~(x) / (log_kappa x / x)^j`.
    pub derivative_ratio: f64,
    /// `f~(q^j x) / f~(x) / (q^{-j(j-1)/2} (log_kappa x / x)^j)`.
    pub shift_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    /// `f~(x + sqrt x) / f~(x)` at each `x`.
    pub sqrt_shift: Vec<(f64, f64)>,
    /// `sqrt(x) log(x) / x`, the scale of the shift's deviation from 1.
    pub sqrt_shift_scale: Vec<(f64, f64)>,
}

/// The derivative and shift ratio relations of `f~`, for `j = 0..=3`.
pub fn ratio_checks(xs: &[f64], gf: &PoissonGf) -> Result<RatioReport> {
    let prec = gf.context().precision_bits();
    let params = gf.params();
    let lk = params.log_kappa(prec);
    let q = params.q_real(prec);
    let mut rows = Vec::new();
    let mut sqrt_shift = Vec::new();
    let mut sqrt_shift_scale = Vec::new();
    for &x in xs {
        let xf = Float::with_val(prec, x);
        let f0 = gf.eval(&xf, 0)?;
        let scale = Float::with_val(prec, xf.ln_ref()) / &lk / &xf;
        for j in 0..=3u32 {
            let dj = gf.eval(&xf, j as usize)?;
            let sp = Float::with_val(prec, (&scale).pow(j));
            let derivative_ratio = (Float::with_val(prec, &dj / &f0) / &sp).to_f64();
            let qj = Float::with_val(prec, (&q).pow(j));
            let shifted = gf.eval(&Float::with_val(prec, &xf * &qj), 0)?;
            let pred = Float::with_val(prec, (&q).pow(-((j * j.saturating_sub(1) / 2) as i32))) * &sp;
            let shift_ratio = (shifted / &f0 / pred).to_f64();
            rows.push(RatioRow { x, j, derivative_ratio, shift_ratio });
        }
        let y = x.sqrt();
        let fy = gf.eval(&Float::with_val(prec, x + y), 0)?;
        sqrt_shift.push((x, (fy / &f0).to_f64()));
        sqrt_shift_scale.push((x, y * x.ln() / x));
    }
    Ok(RatioReport { rows, sqrt_shift, sqrt_shift_scale })
}

#[derive(Clone, Debug)]
pub struct VarianceEstimate {
    /// `C_sigma = p / (2q)`.
    pub c_sigma: Float,
    /// `C_sigma n^{-2} (log_kappa n)^3 f~(n)^2`.
    pub variance: Float,
    /// `(p/q) n^{-3} (log_kappa n)^4 f~(n)^2`.
    pub t2: Float,
}

pub fn c_sigma(params: &ModelParams, prec: u32) -> Float {
    params.p_real(prec) / (params.q_real(prec) * 2u32)
}

pub fn variance_asymptotic(n: u64, gf: &PoissonGf) -> Result<VarianceEstimate> {
    let prec = gf.context().precision_bits();
    let params = gf.params();
    let nf = Float::with_val(prec, n);
    let f = gf.eval(&nf, 0)?;
    let f2 = Float::with_val(prec, f.square_ref());
    let l = Float::with_val(prec, nf.ln_ref()) / params.log_kappa(prec);
    let cs = c_sigma(params, prec);
    let variance = Float::with_val(prec, &cs * &f2) * Float::with_val(prec, (&l).pow(3u32)) / Float::with_val(prec, (&nf).pow(2u32));
    let ratio = params.p_real(prec) / params.q_real(prec);
    let t2 = ratio * &f2 * Float::with_val(prec, (&l).pow(4u32)) / Float::with_val(prec, (&nf).pow(3u32));
    Ok(VarianceEstimate { c_sigma: cs, variance, t2 })
}
