//! Exact engines against brute-force oracles that share no code with them:
//! full enumeration of labelled graphs, and exact cost distributions built
//! by convolving probability mass functions.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Integer, Rational};

use mislab::exact::{central_moments, j_direct_table, mu_recurrence, nu_recurrence, z_second_moments};
use mislab::graphs::{count_independent_sets, GraphInstance};
use mislab::search::run_exhaustive_mis;
use mislab::{ModelParams, NumericContext};

type Pmf = BTreeMap<u64, Rational>;

fn params(a: u64, b: u64) -> ModelParams {
    ModelParams::from_ratio(a, b).unwrap()
}

fn pow(r: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::from(1), |acc, _| acc * r)
}

/// `E X_n` and `E J(G)` over all `2^C(n,2)` graphs, weighted exactly.
fn enumerate(n: usize, params: &ModelParams) -> (Rational, Rational) {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let m = pairs.len();
    let (mut cost, mut count) = (Rational::new(), Rational::new());
    for mask in 0u64..(1 << m) {
        let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        let e = edges.len();
        let w = pow(params.p(), e) * pow(params.q(), m - e);
        let g = GraphInstance::from_edges(n, &edges).unwrap();
        cost += Rational::from(&w * Integer::from(run_exhaustive_mis(&g, u64::MAX).unwrap().cost));
        count += w * Integer::from(count_independent_sets(&g).unwrap());
    }
    (cost, count)
}

#[test]
fn mean_cost_and_set_count_by_enumeration() {
    let ctx = NumericContext::default();
    for p in [params(1, 2), params(1, 3), params(3, 4)] {
        let mu = mu_recurrence::<Rational>(6, &p, &ctx);
        let j = j_direct_table::<Rational>(6, &p, &ctx);
        for n in 0..=6 {
            let (cost, count) = enumerate(n, &p);
            assert_eq!(cost, mu[n], "mu_{n} at p = {}", p.label());
            assert_eq!(count, j[n], "J_{n} at p = {}", p.label());
        }
    }
}

fn convolve(a: &Pmf, b: &Pmf) -> Pmf {
    let mut out = Pmf::new();
    for (x, px) in a {
        for (y, py) in b {
            *out.entry(x + y).or_default() += Rational::from(px * py);
        }
    }
    out
}

fn mix(parts: impl Iterator<Item = (Rational, Pmf)>) -> Pmf {
    let mut out = Pmf::new();
    for (w, pmf) in parts {
        for (x, px) in pmf {
            *out.entry(x).or_default() += Rational::from(&w * &px);
        }
    }
    out
}

fn point(v: u64) -> Pmf {
    Pmf::from([(v, Rational::from(1))])
}

/// Exact laws of `Y_0..=Y_max`: `Y_n = Y_{n-1} + Y'_{n-1-B}`, `B ~ Bin(n-1, p)`.
fn y_laws(max_n: usize, params: &ModelParams) -> Vec<Pmf> {
    let mut laws = vec![point(0), point(1)];
    for n in 2..=max_n {
        let k = n - 1;
        let right = mix((0..=k).map(|b| {
            let w = Rational::from(Integer::from(Integer::binomial_u(k as u32, b as u32))) * pow(params.p(), b) * pow(params.q(), k - b);
            (w, laws[k - b].clone())
        }));
        laws.push(convolve(&laws[n - 1], &right));
    }
    laws
}

/// Exact laws of `Z_n = Z_{n-1} + Z'_U`, `U` uniform on `0..n`.
fn z_laws(max_n: usize) -> Vec<Pmf> {
    let mut laws = vec![point(0), point(1)];
    for n in 2..=max_n {
        let right = mix((0..n).map(|u| (Rational::from((1, n as u32)), laws[u].clone())));
        laws.push(convolve(&laws[n - 1], &right));
    }
    laws
}

fn raw_moment(pmf: &Pmf, k: u32) -> Rational {
    pmf.iter().map(|(x, p)| Rational::from(p * Integer::from(*x).pow(k))).sum()
}

fn central(pmf: &Pmf, k: u32) -> Rational {
    let mean = raw_moment(pmf, 1);
    pmf.iter()
        .map(|(x, p)| {
            let d = Rational::from(Integer::from(*x)) - &mean;
            pow(&d, k as usize) * p
        })
        .sum()
}

#[test]
fn idealized_cost_moments_by_convolution() {
    let ctx = NumericContext::default();
    for p in [params(1, 2), params(2, 3)] {
        let laws = y_laws(10, &p);
        let mu = mu_recurrence::<Rational>(10, &p, &ctx);
        let cm = central_moments(&mu, 4, &p, &ctx);
        for (n, law) in laws.iter().enumerate() {
            assert_eq!(law.values().sum::<Rational>(), 1);
            assert_eq!(raw_moment(law, 1), mu[n], "mean of Y_{n}");
            for k in 2..=4 {
                assert_eq!(central(law, k), *cm.get(n, k as usize), "M_{{{n},{k}}} at p = {}", p.label());
            }
        }
    }
}

#[test]
fn uniform_split_moments_by_convolution() {
    let ctx = NumericContext::default();
    let laws = z_laws(11);
    let nu = nu_recurrence::<Rational>(11, &ctx);
    let second = z_second_moments::<Rational>(11, &ctx);
    for (n, law) in laws.iter().enumerate() {
        assert_eq!(raw_moment(law, 1), nu[n], "nu_{n}");
        assert_eq!(raw_moment(law, 2), second[n], "E Z_{n}^2");
    }
}
