use crate::model::{ModelParams, NumericContext, Scalar};

/// Row `n` of `pi_{n,k} = C(n-1,k) p^{n-1-k} q^k`, the probability that `k`
/// vertices survive removal of a vertex and its neighbours.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialWeights<S> {
    pub n: usize,
    pub w: Vec<S>,
}

impl<S: Scalar> BinomialWeights<S> {
    pub fn sum(&self, ctx: &NumericContext) -> S {
        let mut s = S::zero(ctx);
        for x in &self.w {
            s.add_assign(x);
        }
        s
    }
}

/// Built with the ratio recurrence `pi_{n,k+1} = pi_{n,k} (n-1-k)/(k+1) (q/p)`.
pub fn binomial_weights<S: Scalar>(n: usize, params: &ModelParams, ctx: &NumericContext) -> BinomialWeights<S> {
    if n == 0 {
        return BinomialWeights { n, w: Vec::new() };
    }
    let p = S::from_rational(params.p(), ctx);
    let mut ratio = S::from_rational(params.q(), ctx);
    ratio.div_assign(&p);
    let mut cur = p.pow_u32(n as u32 - 1);
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        w.push(cur.clone());
        if k + 1 < n {
            cur.mul_u64((n - 1 - k) as u64);
            cur.div_u64((k + 1) as u64);
            cur.mul_assign(&ratio);
        }
    }
    BinomialWeights { n, w }
}

/// Extends `init` by `x_n = x_{n-1} + sum_{k<n} pi_{n,k} x_k` up to `max_n`.
/// This is the recurrence shared by mu_n and by J_n + 1.
pub fn pi_recurrence<S: Scalar>(init: Vec<S>, max_n: usize, params: &ModelParams, ctx: &NumericContext) -> Vec<S> {
    let mut x = init;
    x.truncate(max_n + 1);
    while x.len() <= max_n {
        let n = x.len();
        let pi = binomial_weights::<S>(n, params, ctx);
        let mut next = x[n - 1].clone();
        for (w, xk) in pi.w.iter().zip(&x) {
            next.mul_add_assign(w, xk);
        }
        x.push(next);
    }
    x
}

/// `Delta_{n,j} = mu_j + mu_{n-1} - mu_n` for `j < n`.
pub fn delta_row<S: Scalar>(mu: &[S], n: usize) -> Vec<S> {
    let mut shift = mu[n - 1].clone();
    shift.sub_assign(&mu[n]);
    mu[..n]
        .iter()
        .map(|m| {
            let mut d = m.clone();
            d.add_assign(&shift);
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::{Float, Rational};

    #[test]
    fn rows_are_normalized_exactly() {
        let ctx = NumericContext::default();
        for (a, b) in [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)] {
            let params = ModelParams::from_ratio(a, b).unwrap();
            for n in 1..=60 {
                let row = binomial_weights::<Rational>(n, &params, &ctx);
                assert_eq!(row.sum(&ctx), 1, "n={n} p={a}/{b}");
            }
        }
    }

    #[test]
    fn real_rows_are_normalized() {
        let ctx = NumericContext::new(128).unwrap();
        let params = ModelParams::from_ratio(1, 3).unwrap();
        let row = binomial_weights::<Float>(500, &params, &ctx);
        let err = (row.sum(&ctx) - 1u32).abs();
        assert!(err < Float::with_val(128, 1) >> 112);
    }

    #[test]
    fn row_entries() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(1, 3).unwrap();
        let row = binomial_weights::<Rational>(4, &params, &ctx);
        // C(3,k) (1/3)^{3-k} (2/3)^k
        let expect = [(1, 27), (6, 27), (12, 27), (8, 27)];
        for (w, (a, b)) in row.w.iter().zip(expect) {
            assert_eq!(*w, Rational::from((a, b)));
        }
    }
}
