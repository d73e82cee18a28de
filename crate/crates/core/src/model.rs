//! Model parameters, numeric context and the scalar abstraction shared by all
//! exact and asymptotic engines.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which scalar kind an engine ran with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Real,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Real => "real",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "real" => Ok(Mode::Real),
            _ => Err(Error::InvalidParameter(format!("unknown mode '{s}' (expected exact|real)"))),
        }
    }
}

/// Edge probability `p` of G(n,p), kept as an exact rational, with `q = 1 - p`
/// and `kappa = 1/q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParams {
    p: Rational,
    q: Rational,
}

impl ModelParams {
    pub fn new(p: Rational) -> Result<Self> {
        if p <= 0 || p >= 1 {
            return Err(Error::InvalidParameter(format!("p = {p} is not in (0,1)")));
        }
        let q = Rational::from(1) - &p;
        Ok(ModelParams { p, q })
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Self::new(Rational::from((num, den)))
    }

    /// Parses `"a/b"`. Decimal input is refused so exact mode stays exact; the
    /// error names the equivalent fraction.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(['.', 'e', 'E']) {
            let hint = decimal_to_rational(s).map(|r| format!(" (write it as {r})")).unwrap_or_default();
            return Err(Error::InvalidParameter(format!("p must be an exact fraction like 1/2, got decimal '{s}'{hint}")));
        }
        let p = Rational::from_str(s).map_err(|e| Error::InvalidParameter(format!("cannot parse p = '{s}': {e}")))?;
        Self::new(p)
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn kappa(&self) -> Rational {
        self.q.clone().recip()
    }

    /// `"num/den"`, the canonical text form used in reports and cache keys.
    pub fn label(&self) -> String {
        format!("{}/{}", self.p.numer(), self.p.denom())
    }

    pub fn p_real(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.p)
    }

    pub fn q_real(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.q)
    }

    /// `log kappa = -log q`.
    pub fn log_kappa(&self, prec: u32) -> Float {
        -Float::with_val(prec, &self.q).ln()
    }

    pub fn p_f64(&self) -> f64 {
        self.p.to_f64()
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn decimal_to_rational(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: Integer = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = Rational::from(10);
    let r = Rational::from(digits) * ten.pow(scale);
    Some(r)
}

/// Working precision and series truncation threshold for real arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericContext {
    precision_bits: u32,
    series_epsilon: Float,
}

impl NumericContext {
    pub const MIN_PRECISION: u32 = 64;

    /// Context with `series_epsilon = 2^(-bits/2)`.
    pub fn new(precision_bits: u32) -> Result<Self> {
        if precision_bits < Self::MIN_PRECISION {
            return Err(Error::InvalidParameter(format!("precision {precision_bits} bits is below the minimum of {}", Self::MIN_PRECISION)));
        }
        let series_epsilon = Float::with_val(precision_bits, 1) >> (precision_bits / 2);
        Ok(NumericContext { precision_bits, series_epsilon })
    }

    pub fn with_series_epsilon(mut self, eps: Float) -> Result<Self> {
        if !(eps.is_finite() && eps > 0) {
            return Err(Error::InvalidParameter("series_epsilon must be positive".into()));
        }
        self.series_epsilon = Float::with_val(self.precision_bits, eps);
        Ok(self)
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn series_epsilon(&self) -> &Float {
        &self.series_epsilon
    }

    /// Same settings at twice the precision, for stability re-runs.
    pub fn doubled(&self) -> Self {
        let bits = self.precision_bits * 2;
        let eps = Float::with_val(bits, &self.series_epsilon);
        NumericContext { precision_bits: bits, series_epsilon: eps }
    }

    pub fn float<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.precision_bits, v)
    }
}

impl Default for NumericContext {
    fn default() -> Self {
        NumericContext::new(256).expect("256 bits is valid")
    }
}

/// Bits needed so that the `e^x`-scale cancellation in Poisson-transform
/// evaluation at `x` still leaves at least 64 significant bits.
pub fn required_precision(x: f64) -> u32 {
    debug_assert!(x >= 0.0);
    (1.5 * x.max(0.0)).ceil() as u32 + 64
}

/// Number of leading bits on which two reals agree, `-log2 |a-b|/|b|`.
pub fn agreement_bits(a: &Float, b: &Float) -> f64 {
    if a == b {
        return f64::INFINITY;
    }
    let prec = a.prec().max(b.prec());
    let diff = Float::with_val(prec, a - b).abs();
    if b.is_zero() {
        return -diff.to_f64().log2();
    }
    let rel = diff / b.clone().abs();
    -rel.log2().to_f64()
}

/// Arithmetic needed by the generic engines. Implemented for exact rationals
/// and for fixed-precision MPFR reals; the precision of a real result is the
/// one carried by `self`.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Send + Sync + 'static {
    const MODE: Mode;

    fn from_rational(r: &Rational, ctx: &NumericContext) -> Self;

    fn from_i64(v: i64, ctx: &NumericContext) -> Self {
        Self::from_rational(&Rational::from(v), ctx)
    }

    fn zero(ctx: &NumericContext) -> Self {
        Self::from_i64(0, ctx)
    }

    fn one(ctx: &NumericContext) -> Self {
        Self::from_i64(1, ctx)
    }

    fn add_assign(&mut self, rhs: &Self);
    fn sub_assign(&mut self, rhs: &Self);
    fn mul_assign(&mut self, rhs: &Self);
    fn div_assign(&mut self, rhs: &Self);
    /// `self += a * b`.
    fn mul_add_assign(&mut self, a: &Self, b: &Self);
    fn mul_u64(&mut self, k: u64);
    fn div_u64(&mut self, k: u64);
    fn neg_assign(&mut self);
    fn pow_u32(&self, e: u32) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn to_float(&self, prec: u32) -> Float;

    /// Text form that [`Scalar::decode`] reads back without loss.
    fn encode(&self) -> String;
    fn decode(s: &str, ctx: &NumericContext) -> Result<Self>;
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(r: &Rational, _: &NumericContext) -> Self {
        r.clone()
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_assign(&mut self, rhs: &Self) {
        *self *= rhs;
    }
    fn div_assign(&mut self, rhs: &Self) {
        *self /= rhs;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
    fn mul_u64(&mut self, k: u64) {
        *self *= Integer::from(k);
    }
    fn div_u64(&mut self, k: u64) {
        *self /= Integer::from(k);
    }
    fn neg_assign(&mut self) {
        *self = -std::mem::take(self);
    }
    fn pow_u32(&self, e: u32) -> Self {
        Rational::from(self.pow(e))
    }
    fn is_zero(&self) -> bool {
        self.cmp0().is_eq()
    }
    fn is_negative(&self) -> bool {
        self.cmp0().is_lt()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn encode(&self) -> String {
        self.to_string()
    }
    fn decode(s: &str, _: &NumericContext) -> Result<Self> {
        Rational::from_str(s).map_err(|e| Error::Cache(format!("bad rational '{s}': {e}")))
    }
}

impl Scalar for Float {
    const MODE: Mode = Mode::Real;

    fn from_rational(r: &Rational, ctx: &NumericContext) -> Self {
        Float::with_val(ctx.precision_bits, r)
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_assign(&mut self, rhs: &Self) {
        *self *= rhs;
    }
    fn div_assign(&mut self, rhs: &Self) {
        *self /= rhs;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn mul_u64(&mut self, k: u64) {
        *self *= k;
    }
    fn div_u64(&mut self, k: u64) {
        *self /= k;
    }
    fn neg_assign(&mut self) {
        *self = -std::mem::replace(self, Float::new(2));
    }
    fn pow_u32(&self, e: u32) -> Self {
        Float::with_val(self.prec(), self.pow(e))
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.is_sign_negative() && !Float::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn encode(&self) -> String {
        self.to_string_radix(10, None)
    }
    fn decode(s: &str, ctx: &NumericContext) -> Result<Self> {
        let parsed = Float::parse(s).map_err(|e| Error::Cache(format!("bad real '{s}': {e}")))?;
        Ok(Float::with_val(ctx.precision_bits, parsed))
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}
