//! Central moments `M_{n,m} = E(Y_n - mu_n)^m` of the independent-split cost.

use rug::ops::Pow;
use rug::Float;

use super::weights::{binomial_weights, delta_row};
use crate::model::{ModelParams, NumericContext, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct CentralMoments<S> {
    pub m_max: usize,
    /// `m[n][k] = M_{n,k}`.
    pub m: Vec<Vec<S>>,
    /// `t[n][k] = T_{n,k}`, the inhomogeneous part of the recurrence.
    pub t: Vec<Vec<S>>,
}

impl<S: Scalar> CentralMoments<S> {
    pub fn max_n(&self) -> usize {
        self.m.len() - 1
    }

    pub fn get(&self, n: usize, k: usize) -> &S {
        &self.m[n][k]
    }

    pub fn sigma2(&self, n: usize) -> &S {
        &self.m[n][2]
    }

    pub fn t(&self, n: usize, k: usize) -> &S {
        &self.t[n][k]
    }

    /// `M_{n,k} / sigma_n^k`, or `None` while the variance is zero.
    pub fn standardized(&self, n: usize, k: usize, prec: u32) -> Option<Float> {
        let var = self.sigma2(n).to_float(prec);
        if var.is_zero() {
            return None;
        }
        let scale = var.sqrt().pow(k as u32);
        Some(self.get(n, k).to_float(prec) / scale)
    }
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

fn multinomial(m: usize, k: usize, l: usize, h: usize) -> u64 {
    (factorial(m) / (factorial(k) * factorial(l) * factorial(h))) as u64
}

fn binom(m: usize, k: usize) -> u64 {
    (factorial(m) / (factorial(k) * factorial(m - k))) as u64
}

fn anchors<S: Scalar>(m_max: usize, ctx: &NumericContext) -> Vec<S> {
    (0..=m_max).map(|k| if k == 0 { S::one(ctx) } else { S::zero(ctx) }).collect()
}

/// Builds `M_{n,m}` for `n <= mu.len()-1`, `m <= m_max` from
/// `M_{n,m} = M_{n-1,m} + sum_j pi_{n,j} M_{j,m} + T_{n,m}` where
/// `T_{n,m} = sum_{k+l+h=m; k,l<m} (m; k,l,h) M_{n-1,k} S_n(l,h)` and
/// `S_n(l,h) = sum_j pi_{n,j} M_{j,l} Delta_{n,j}^h`. All `S_n(l,h)` for one
/// `n` come out of a single pass over `j`.
pub fn central_moments<S: Scalar>(mu: &[S], m_max: usize, params: &ModelParams, ctx: &NumericContext) -> CentralMoments<S> {
    assert!((2..=20).contains(&m_max), "m_max must be in 2..=20");
    let max_n = mu.len() - 1;
    let zero = S::zero(ctx);
    let mut m: Vec<Vec<S>> = vec![anchors(m_max, ctx); max_n.min(1) + 1];
    let mut t: Vec<Vec<S>> = vec![vec![zero.clone(); m_max + 1]; max_n.min(1) + 1];
    for n in 2..=max_n {
        let pi = binomial_weights::<S>(n, params, ctx);
        let delta = delta_row(mu, n);
        let mut s = vec![vec![zero.clone(); m_max + 1]; m_max + 1];
        let mut dpow = vec![S::one(ctx); m_max + 1];
        for j in 0..n {
            for h in 1..=m_max {
                let mut next = dpow[h - 1].clone();
                next.mul_assign(&delta[j]);
                dpow[h] = next;
            }
            for l in (0..=m_max).filter(|&l| l != 1) {
                if j < 2 && l > 0 {
                    continue;
                }
                let mut w = pi.w[j].clone();
                if l > 0 {
                    w.mul_assign(&m[j][l]);
                }
                for h in 0..=m_max - l {
                    s[l][h].mul_add_assign(&w, &dpow[h]);
                }
            }
        }
        let prev = &m[n - 1];
        let mut row = anchors::<S>(m_max, ctx);
        let mut trow = vec![zero.clone(); m_max + 1];
        for mm in 2..=m_max {
            let mut tv = zero.clone();
            for k in (0..mm).filter(|&k| k != 1) {
                for l in (0..=mm - k).filter(|&l| l != 1 && l < mm) {
                    let h = mm - k - l;
                    let mut term = s[l][h].clone();
                    term.mul_assign(&prev[k]);
                    term.mul_u64(multinomial(mm, k, l, h));
                    tv.add_assign(&term);
                }
            }
            let mut v = prev[mm].clone();
            v.add_assign(&s[mm][0]);
            v.add_assign(&tv);
            row[mm] = v;
            trow[mm] = tv;
        }
        m.push(row);
        t.push(trow);
    }
    CentralMoments { m_max, m, t }
}

/// Same table through the two-group expansion of `T_{n,m}` (the `k = 0`
/// group, then `2 <= k <= m-2`), recomputing every `j`-sum afresh. Slow;
/// kept as an independent route for cross-checking.
pub fn central_moments_split<S: Scalar>(mu: &[S], m_max: usize, params: &ModelParams, ctx: &NumericContext) -> CentralMoments<S> {
    let max_n = mu.len() - 1;
    let zero = S::zero(ctx);
    let mut m: Vec<Vec<S>> = vec![anchors(m_max, ctx); max_n.min(1) + 1];
    let mut t: Vec<Vec<S>> = vec![vec![zero.clone(); m_max + 1]; max_n.min(1) + 1];
    for n in 2..=max_n {
        let pi = binomial_weights::<S>(n, params, ctx);
        let delta = delta_row(mu, n);
        let sum = |m: &Vec<Vec<S>>, l: usize, h: usize| {
            let mut acc = zero.clone();
            for j in 0..n {
                let mut term = pi.w[j].clone();
                term.mul_assign(&m[j][l]);
                term.mul_assign(&delta[j].pow_u32(h as u32));
                acc.add_assign(&term);
            }
            acc
        };
        let mut row = anchors::<S>(m_max, ctx);
        let mut trow = vec![zero.clone(); m_max + 1];
        for mm in 2..=m_max {
            let mut tv = zero.clone();
            for l in 0..mm {
                let mut g = sum(&m, l, mm - l);
                g.mul_u64(binom(mm, l));
                tv.add_assign(&g);
            }
            for k in 2..=mm.saturating_sub(2) {
                let mut inner = zero.clone();
                for l in 0..=mm - k {
                    let mut g = sum(&m, l, mm - k - l);
                    g.mul_u64(binom(mm - k, l));
                    inner.add_assign(&g);
                }
                inner.mul_assign(&m[n - 1][k]);
                inner.mul_u64(binom(mm, k));
                tv.add_assign(&inner);
            }
            let mut v = m[n - 1][mm].clone();
            v.add_assign(&sum(&m, mm, 0));
            v.add_assign(&tv);
            row[mm] = v;
            trow[mm] = tv;
        }
        m.push(row);
        t.push(trow);
    }
    CentralMoments { m_max, m, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::mu_recurrence;
    use rug::ops::Pow;
    use rug::Rational;

    /// Exact law of Y_n by convolving the recurrence in rationals.
    fn y_law(max_n: usize, params: &ModelParams, ctx: &NumericContext) -> Vec<Vec<Rational>> {
        let mut laws: Vec<Vec<Rational>> = vec![vec![1.into()], vec![0.into(), 1.into()]];
        for n in 2..=max_n {
            let pi = binomial_weights::<Rational>(n, params, ctx);
            let mut mixture = vec![Rational::new(); laws[n - 1].len()];
            for (k, w) in pi.w.iter().enumerate() {
                for (v, x) in laws[k].iter().enumerate() {
                    mixture[v] += Rational::from(w * x);
                }
            }
            let prev = &laws[n - 1];
            let mut out = vec![Rational::new(); prev.len() + mixture.len() - 1];
            for (a, x) in prev.iter().enumerate() {
                for (b, y) in mixture.iter().enumerate() {
                    out[a + b] += Rational::from(x * y);
                }
            }
            laws.push(out);
        }
        laws
    }

    #[test]
    fn matches_exact_distribution() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(1, 3).unwrap();
        let mu = mu_recurrence::<Rational>(9, &params, &ctx);
        let cm = central_moments(&mu, 5, &params, &ctx);
        let laws = y_law(9, &params, &ctx);
        for n in 0..=9 {
            let mean: Rational = laws[n].iter().enumerate().map(|(v, w)| Rational::from(w * v as u32)).sum();
            assert_eq!(mean, mu[n]);
            for k in 0..=5u32 {
                let mk: Rational = laws[n]
                    .iter()
                    .enumerate()
                    .map(|(v, w)| {
                        let d = Rational::from(v as u32) - &mean;
                        w * d.pow(k)
                    })
                    .sum();
                assert_eq!(*cm.get(n, k as usize), mk, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn split_form_agrees() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(1, 2).unwrap();
        let mu = mu_recurrence::<Rational>(25, &params, &ctx);
        let a = central_moments(&mu, 6, &params, &ctx);
        let b = central_moments_split(&mu, 6, &params, &ctx);
        assert_eq!(a, b);
    }

    #[test]
    fn anchors_and_small_cases() {
        let ctx = NumericContext::default();
        let params = ModelParams::from_ratio(1, 2).unwrap();
        let mu = mu_recurrence::<Rational>(30, &params, &ctx);
        let cm = central_moments(&mu, 4, &params, &ctx);
        assert_eq!(*cm.sigma2(1), 0);
        assert_eq!(*cm.sigma2(2), Rational::from((1, 4)));
        for n in 0..=30 {
            assert_eq!(*cm.get(n, 0), 1);
            assert_eq!(*cm.get(n, 1), 0);
            assert!(!cm.sigma2(n).is_negative());
        }
        // T_{n,2} = sum_j pi_{n,j} Delta_{n,j}^2
        for n in 2..=30 {
            let pi = binomial_weights::<Rational>(n, &params, &ctx);
            let d = delta_row(&mu, n);
            let t2: Rational = pi.w.iter().zip(&d).map(|(w, x)| Rational::from(w * x) * x).sum();
            assert_eq!(*cm.t(n, 2), t2);
            let first: Rational = pi.w.iter().zip(&d).map(|(w, x)| Rational::from(w * x)).sum();
            assert_eq!(first, 0);
        }
    }
}
