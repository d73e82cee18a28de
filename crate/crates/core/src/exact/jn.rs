//! J_n, the expected number of nonempty independent sets.

use rug::Rational;

use super::weights::pi_recurrence;
use crate::model::{binomial, ModelParams, NumericContext, Scalar};

/// `J_n = sum_{1<=j<=n} C(n,j) q^{j(j-1)/2}`.
pub fn j_direct<S: Scalar>(n: usize, params: &ModelParams, ctx: &NumericContext) -> S {
    let q = S::from_rational(params.q(), ctx);
    let mut qj = S::one(ctx); // q^{j-1}
    let mut qc = S::one(ctx); // q^{C(j,2)}
    let mut total = S::zero(ctx);
    for j in 1..=n as u32 {
        if j > 1 {
            qc.mul_assign(&qj);
        }
        let mut t = S::from_rational(&Rational::from(binomial(n as u32, j)), ctx);
        t.mul_assign(&qc);
        total.add_assign(&t);
        qj.mul_assign(&q);
    }
    total
}

/// `J_0..=J_max_n` by direct summation (`J_0 = 0`).
pub fn j_direct_table<S: Scalar>(max_n: usize, params: &ModelParams, ctx: &NumericContext) -> Vec<S> {
    (0..=max_n).map(|n| j_direct(n, params, ctx)).collect()
}

/// `Jbar_n = J_n + 1` from the mu-recurrence with `Jbar_0 = 1`.
pub fn jbar_recurrence<S: Scalar>(max_n: usize, params: &ModelParams, ctx: &NumericContext) -> Vec<S> {
    pi_recurrence(vec![S::one(ctx)], max_n, params, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(1, 2).unwrap();
        assert_eq!(j_direct::<Rational>(1, &params, &ctx), 1);
        assert_eq!(j_direct::<Rational>(2, &params, &ctx), Rational::from((5, 2)));
        assert_eq!(j_direct::<Rational>(3, &params, &ctx), Rational::from((37, 8)));
    }

    #[test]
    fn recurrence_matches_direct() {
        let ctx = NumericContext::default();
        for (a, b) in [(1, 4), (2, 3)] {
            let params = ModelParams::from_ratio(a, b).unwrap();
            let bar = jbar_recurrence::<Rational>(40, &params, &ctx);
            let direct = j_direct_table::<Rational>(40, &params, &ctx);
            for n in 0..=40 {
                assert_eq!(bar[n].clone() - 1u32, direct[n], "n={n}");
            }
        }
    }
}
