//! mu_n = E(X_n) = E(Y_n) by the recurrence and by the two closed forms.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::weights::pi_recurrence;
use crate::error::{Error, Result};
use crate::model::{binomial, required_precision, ModelParams, NumericContext, Scalar};

/// `mu_0..=mu_max_n` from `mu_n = mu_{n-1} + sum_k pi_{n,k} mu_k`.
pub fn mu_recurrence<S: Scalar>(max_n: usize, params: &ModelParams, ctx: &NumericContext) -> Vec<S> {
    pi_recurrence(vec![S::zero(ctx), S::one(ctx)], max_n, params, ctx)
}

/// Coefficients of the Poisson transform, `mu~_0..=mu~_max_n`, from
/// `mu~_{k+1} = q^k mu~_k + (-1)^k`.
pub fn mu_tilde_table<S: Scalar>(max_n: usize, params: &ModelParams, ctx: &NumericContext) -> Vec<S> {
    let q = S::from_rational(params.q(), ctx);
    let mut qk = S::one(ctx);
    let mut out = vec![S::zero(ctx)];
    for k in 0..max_n {
        let mut next = out[k].clone();
        next.mul_assign(&qk);
        let sign = S::from_i64(if k % 2 == 0 { 1 } else { -1 }, ctx);
        next.add_assign(&sign);
        out.push(next);
        qk.mul_assign(&q);
    }
    out
}

/// `(b, c)` with `q = c/b` in lowest terms.
fn q_parts(params: &ModelParams) -> (Integer, Integer) {
    (params.q().denom().clone(), params.q().numer().clone())
}

fn ipow(base: &Integer, e: u64) -> Integer {
    Integer::from(base.pow(u32::try_from(e).expect("exponent fits u32")))
}

fn c2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// Numerators of `mu~_k = sum_{j<k} (-1)^j q^{(k-1-j)(k+j)/2}` over the
/// common denominator `b^{C(k,2)}`.
fn tilde_numerators(max_n: usize, b: &Integer, c: &Integer) -> Vec<Integer> {
    let mut out = vec![Integer::new()];
    for k in 1..=max_n as u64 {
        let top = c2(k);
        let mut acc = Integer::new();
        for j in 0..k {
            let e = (k - 1 - j) * (k + j) / 2;
            let term = ipow(c, e) * ipow(b, top - e);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        out.push(acc);
    }
    out
}

/// `mu_1..=mu_max_n` (index 0 holds 0) from the alternating closed form
/// `mu_n = sum_k C(n,k) sum_{j<k} (-1)^j q^{(k-1-j)(k+j)/2}`, in exact
/// integer arithmetic over a power-of-denominator common base.
pub fn mu_closed_form_exact_table(max_n: usize, params: &ModelParams) -> Vec<Rational> {
    let (b, c) = q_parts(params);
    let tilde = tilde_numerators(max_n, &b, &c);
    let mut out = vec![Rational::new()];
    for n in 1..=max_n as u64 {
        let top = c2(n);
        let mut acc = Integer::new();
        for k in 1..=n {
            acc += binomial(n as u32, k as u32) * &tilde[k as usize] * ipow(&b, top - c2(k));
        }
        out.push(Rational::from((acc, ipow(&b, top))));
    }
    out
}

pub fn mu_closed_form_exact(n: usize, params: &ModelParams) -> Rational {
    mu_closed_form_exact_table(n, params).pop().unwrap()
}

/// Closed form in floating point. The alternating inner sums cancel badly,
/// so the context must carry `required_precision(n)` bits.
pub fn mu_closed_form_real(n: usize, params: &ModelParams, ctx: &NumericContext) -> Result<Float> {
    let need = required_precision(n as f64);
    if ctx.precision_bits() < need {
        return Err(Error::PrecisionInsufficient { have: ctx.precision_bits(), need, x: n as f64 });
    }
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let mut total = Float::with_val(prec, 0);
    for k in 1..=n as u64 {
        let mut inner = Float::with_val(prec, 0);
        for j in 0..k {
            let e = (k - 1 - j) * (k + j) / 2;
            let t = Float::with_val(prec, (&q).pow(e as u32));
            if j % 2 == 0 {
                inner += t;
            } else {
                inner -= t;
            }
        }
        total += inner * Float::with_val(prec, binomial(n as u32, k as u32));
    }
    Ok(total)
}

fn lcm_upto(n: u64) -> Integer {
    let mut l = Integer::from(1);
    for k in 2..=n {
        l.lcm_u_mut(k as u32);
    }
    l
}

/// The all-positive form
/// `mu_n = n sum_j C(n-1,j) q^{C(j+1,2)} sum_l C(n-1-j,l) q^{jl} (1-q^j)^{n-1-j-l} / (j+l+1)`
/// in exact integer arithmetic. The inner sum is a Horner scheme in
/// `A = c^j`, `B = b^j - c^j` with weights scaled by `lcm(1..n)`.
pub fn mu_positive_form_exact(n: usize, params: &ModelParams) -> Rational {
    if n == 0 {
        return Rational::new();
    }
    let (b, c) = q_parts(params);
    let n64 = n as u64;
    let d = lcm_upto(n64);
    let exps: Vec<u64> = (0..n64).map(|j| c2(j + 1) + j * (n64 - 1 - j)).collect();
    let top = *exps.iter().max().unwrap();
    let mut total = Integer::new();
    for j in 0..n64 {
        let m = n64 - 1 - j;
        let a_pow = ipow(&c, j);
        let b_base = ipow(&b, j) - &a_pow;
        let mut b_pows = Vec::with_capacity(m as usize + 1);
        b_pows.push(Integer::from(1));
        for i in 1..=m as usize {
            let next = Integer::from(&b_pows[i - 1] * &b_base);
            b_pows.push(next);
        }
        let weight = |l: u64| binomial(m as u32, l as u32) * Integer::from(&d / (j + l + 1));
        let mut acc = weight(m);
        for l in (0..m).rev() {
            acc *= &a_pow;
            acc += weight(l) * &b_pows[(m - l) as usize];
        }
        total += binomial(n as u32 - 1, j as u32) * ipow(&c, c2(j + 1)) * acc * ipow(&b, top - exps[j as usize]);
    }
    Rational::from((total * n64, d * ipow(&b, top)))
}

/// The all-positive form evaluated term by term in floating point.
pub fn mu_positive_form_real(n: usize, params: &ModelParams, ctx: &NumericContext) -> Float {
    let prec = ctx.precision_bits();
    let q = params.q_real(prec);
    let mut total = Float::with_val(prec, 0);
    for j in 0..n as u32 {
        let m = n as u32 - 1 - j;
        let qj = Float::with_val(prec, (&q).pow(j));
        let one_minus = Float::with_val(prec, 1u32 - &qj);
        let mut inner = Float::with_val(prec, 0);
        for l in 0..=m {
            let mut t = Float::with_val(prec, binomial(m, l));
            t *= Float::with_val(prec, (&qj).pow(l));
            t *= Float::with_val(prec, (&one_minus).pow(m - l));
            t /= j + l + 1;
            inner += t;
        }
        inner *= Float::with_val(prec, binomial(n as u32 - 1, j));
        inner *= Float::with_val(prec, (&q).pow(j * (j + 1) / 2));
        total += inner;
    }
    total * n as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> ModelParams {
        ModelParams::from_ratio(1, 2).unwrap()
    }

    #[test]
    fn small_values() {
        let ctx = NumericContext::default();
        let mu = mu_recurrence::<Rational>(3, &half(), &ctx);
        assert_eq!(mu, vec![Rational::from(0), 1.into(), (3, 2).into(), (19, 8).into()]);
        let third = ModelParams::from_ratio(1, 3).unwrap();
        let mu = mu_recurrence::<Rational>(2, &third, &ctx);
        assert_eq!(mu[2], Rational::from(1) + third.q());
    }

    #[test]
    fn hand_step_for_mu3() {
        // mu_3 = (1+q) + 2pq + q^2 (1+q)
        let params = ModelParams::from_ratio(2, 5).unwrap();
        let (p, q) = (params.p().clone(), params.q().clone());
        let one_q = Rational::from(1) + &q;
        let expect = one_q.clone() + Rational::from(2) * &p * &q + q.clone() * &q * one_q;
        let mu = mu_recurrence::<Rational>(3, &params, &NumericContext::default());
        assert_eq!(mu[3], expect);
    }

    #[test]
    fn closed_forms_agree_small() {
        let ctx = NumericContext::default();
        for (a, b) in [(1, 4), (1, 2), (3, 4), (5, 7)] {
            let params = ModelParams::from_ratio(a, b).unwrap();
            let rec = mu_recurrence::<Rational>(30, &params, &ctx);
            let closed = mu_closed_form_exact_table(30, &params);
            for n in 1..=30 {
                assert_eq!(closed[n], rec[n], "closed n={n}");
                assert_eq!(mu_positive_form_exact(n, &params), rec[n], "positive n={n}");
            }
        }
        assert_eq!(mu_closed_form_exact(1, &half()), 1);
        assert_eq!(mu_positive_form_exact(1, &half()), 1);
    }

    #[test]
    fn tilde_recurrence_matches_double_sum() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(2, 3).unwrap();
        let (b, c) = q_parts(&params);
        let nums = tilde_numerators(25, &b, &c);
        let tilde = mu_tilde_table::<Rational>(25, &params, &ctx);
        for k in 0..=25u64 {
            assert_eq!(tilde[k as usize], Rational::from((nums[k as usize].clone(), ipow(&b, c2(k)))));
        }
    }

    #[test]
    fn real_forms() {
        let params = ModelParams::from_ratio(1, 3).unwrap();
        let exact = mu_recurrence::<Rational>(40, &params, &NumericContext::default());
        let ctx = NumericContext::new(256).unwrap();
        let pos = mu_positive_form_real(40, &params, &ctx);
        let want = Float::with_val(256, &exact[40]);
        assert!(crate::model::agreement_bits(&pos, &want) > 240.0);
        assert!(matches!(mu_closed_form_real(200, &params, &ctx), Err(Error::PrecisionInsufficient { need: 364, .. })));
        let closed = mu_closed_form_real(40, &params, &ctx).unwrap();
        assert!(crate::model::agreement_bits(&closed, &want) > 150.0);
        let rec = mu_recurrence::<Float>(40, &params, &ctx);
        assert!(crate::model::agreement_bits(&rec[40], &want) > 240.0);
    }
}
