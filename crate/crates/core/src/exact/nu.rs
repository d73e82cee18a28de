//! The uniform-split cost Z_n: its mean nu_n, exact second moments, and the
//! limit moments zeta_m of Z_n / nu_n.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::model::{NumericContext, Scalar};

/// `nu_0..=nu_max_n` with `nu_n = nu_{n-1} + (1/n) sum_{j<n} nu_j`.
pub fn nu_recurrence<S: Scalar>(max_n: usize, ctx: &NumericContext) -> Vec<S> {
    let mut nu = vec![S::zero(ctx), S::one(ctx)];
    let mut prefix = S::one(ctx); // sum_{j<n} nu_j
    nu.truncate(max_n + 1);
    while nu.len() <= max_n {
        let n = nu.len();
        let mut avg = prefix.clone();
        avg.div_u64(n as u64);
        let mut next = nu[n - 1].clone();
        next.add_assign(&avg);
        prefix.add_assign(&next);
        nu.push(next);
    }
    nu
}

/// `n! nu_n` as integers; fails if any is not integral.
pub fn nu_factorial_integers(nu: &[Rational]) -> Result<Vec<Integer>> {
    let mut fact = Integer::from(1);
    nu.iter()
        .enumerate()
        .map(|(n, v)| {
            if n > 0 {
                fact *= n as u32;
            }
            let scaled = Rational::from(v * &fact);
            if scaled.denom() == &1 {
                Ok(scaled.numer().clone())
            } else {
                Err(Error::Domain(format!("{n}! nu_{n} = {scaled} is not an integer")))
            }
        })
        .collect()
}

/// `E(Z_n^2)` for `n <= max_n`, from
/// `E Z_n^2 = E Z_{n-1}^2 + (2 nu_{n-1} / n) sum_{j<n} nu_j + (1/n) sum_{j<n} E Z_j^2`.
pub fn z_second_moments<S: Scalar>(max_n: usize, ctx: &NumericContext) -> Vec<S> {
    let nu = nu_recurrence::<S>(max_n, ctx);
    let mut out = vec![S::zero(ctx), S::one(ctx)];
    out.truncate(max_n + 1);
    let (mut nu_sum, mut sq_sum) = (S::one(ctx), S::one(ctx));
    while out.len() <= max_n {
        let n = out.len();
        let mut cross = nu_sum.clone();
        cross.mul_assign(&nu[n - 1]);
        cross.mul_u64(2);
        cross.add_assign(&sq_sum);
        cross.div_u64(n as u64);
        let mut next = out[n - 1].clone();
        next.add_assign(&cross);
        nu_sum.add_assign(&nu[n]);
        sq_sum.add_assign(&next);
        out.push(next);
    }
    out
}

/// `zeta_0..=zeta_m_max` with `zeta_0 = zeta_1 = 1` and
/// `zeta_m = (1/(m - 1/m)) sum_{1<=j<m} C(m,j) (zeta_j/j) zeta_{m-j}`.
pub fn zeta_moments(m_max: usize) -> Vec<Rational> {
    let mut z: Vec<Rational> = vec![1.into(), 1.into()];
    for m in 2..=m_max {
        let mut acc = Rational::new();
        for j in 1..m {
            let c = Integer::from(Integer::binomial_u(m as u32, j as u32));
            acc += Rational::from(&z[j] / j as u32) * &z[m - j] * c;
        }
        let m = m as i64;
        z.push(acc / Rational::from((m * m - 1, m)));
    }
    z.truncate(m_max + 1);
    z
}

fn poly_mul(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::new(); len];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] += Rational::from(x * y);
            }
        }
    }
    out
}

fn derivative(a: &[Rational]) -> Vec<Rational> {
    let mut d: Vec<Rational> = a.iter().enumerate().skip(1).map(|(i, x)| Rational::from(x * i as u32)).collect();
    d.push(Rational::new());
    d
}

/// Coefficients of `y^0..=y^order` in `y^2 z'' + y z' - z - y z z'` for the
/// truncated series `z(y) = sum_{m>=1} zeta_m y^m / (m m!)`; all zero when
/// the moments are right.
pub fn zeta_ode_residuals(zeta: &[Rational], order: usize) -> Vec<Rational> {
    let len = order + 1;
    let mut series = vec![Rational::new(); len];
    let mut fact = Integer::from(1);
    for m in 1..len.min(zeta.len()) {
        fact *= m as u32;
        series[m] = Rational::from(&zeta[m] / Integer::from(&fact * m as u32));
    }
    let d1 = derivative(&series);
    let d2 = derivative(&d1);
    let y = {
        let mut v = vec![Rational::new(); 2];
        v[1] = 1.into();
        v
    };
    let y2 = poly_mul(&y, &y, len);
    let lhs_a = poly_mul(&y2, &d2, len);
    let lhs_b = poly_mul(&y, &d1, len);
    let rhs = poly_mul(&y, &poly_mul(&series, &d1, len), len);
    (0..len).map(|k| Rational::from(&lhs_a[k] + &lhs_b[k]) - &series[k] - &rhs[k]).collect()
}
