//! The instrumented exhaustive search and the idealized cost recurrences.
//!
//! Cost is leaf-anchored: an empty subproblem costs 0 and a single vertex
//! costs 1, so `X_0 = 0`, `X_1 = 1` and every other call just adds the costs
//! of its two children.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::GraphInstance;
use crate::model::ModelParams;

/// Default cap on leaf calls per sample.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostKind {
    X,
    Y,
    Z,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::X => "X",
            CostKind::Y => "Y",
            CostKind::Z => "Z",
        })
    }
}

impl FromStr for CostKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(CostKind::X),
            "Y" | "y" => Ok(CostKind::Y),
            "Z" | "z" => Ok(CostKind::Z),
            _ => Err(Error::InvalidParameter(format!("unknown cost kind '{s}' (expected X|Y|Z)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSample {
    pub kind: CostKind,
    pub n: usize,
    pub cost: u64,
    /// Stability number found by the search; X samples only.
    pub alpha: Option<usize>,
    pub replicate_id: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MisOutcome {
    pub alpha: usize,
    pub cost: u64,
}

/// Runs `alpha(G) = max(alpha(G - v), 1 + alpha(G - N*(v)))` with the lowest
/// alive label as pivot, counting leaf calls. Uses an explicit stack of alive
/// sets, so depth is bounded by memory rather than the call stack.
pub fn run_exhaustive_mis(g: &GraphInstance, budget: u64) -> Result<MisOutcome> {
    let n = g.n();
    if n == 0 {
        return Ok(MisOutcome { alpha: 0, cost: 0 });
    }
    let w = g.words();
    let mut alive: Vec<u64> = Vec::with_capacity(w * (n + 2));
    let mut taken: Vec<u32> = Vec::with_capacity(n + 2);
    for i in 0..w {
        let bits = (n - 64 * i).min(64);
        alive.push(if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 });
    }
    taken.push(0);

    let (mut cost, mut alpha) = (0u64, 0u32);
    while let Some(t) = taken.pop() {
        let base = alive.len() - w;
        let frame = &alive[base..];
        let count: u32 = frame.iter().map(|x| x.count_ones()).sum();
        if count <= 1 {
            if count == 1 {
                cost += 1;
                if cost > budget {
                    return Err(Error::BudgetExceeded { limit: budget });
                }
            }
            alpha = alpha.max(t + count);
            alive.truncate(base);
            continue;
        }
        let word = frame.iter().position(|&x| x != 0).unwrap();
        let v = 64 * word + frame[word].trailing_zeros() as usize;
        alive[base + word] &= !(1u64 << (v % 64));
        let nb = g.neighbors(v);
        for i in 0..w {
            let x = alive[base + i] & !nb[i];
            alive.push(x);
        }
        taken.push(t);
        taken.push(t + 1);
    }
    Ok(MisOutcome { alpha: alpha as usize, cost })
}

/// Sampling distribution of a cost value, stored as a CDF over `0..len`.
#[derive(Clone, Debug)]
struct Cdf(Vec<f64>);

impl Cdf {
    fn from_pmf(pmf: &[f64]) -> Self {
        let mut acc = 0.0;
        Cdf(pmf
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect())
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.0.partition_point(|&c| c <= u).min(self.0.len() - 1)
    }
}

/// Upper-tail mass below which leaf-table entries are dropped. Far below the
/// 2^-53 resolution of the uniform draws used for inversion.
const LEAF_TAIL: f64 = 1e-30;

/// How the idealized recurrences pick the size of the second subproblem.
#[derive(Clone, Debug)]
enum Split {
    /// `n - 1 - Binom(n-1, p)`; row `m` holds the CDF of that size for a
    /// parent of size `m`.
    Binomial(Vec<Cdf>),
    /// Uniform on `0..n`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Leaf tables are built for sizes whose cost distribution fits in this
    /// many support points; 0 disables them (pure recursion).
    pub leaf_support_cap: usize,
    pub budget: u64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { leaf_support_cap: 4096, budget: DEFAULT_BUDGET }
    }
}

/// Sampler for `Y_n = Y_{n-1} + Y*_{n-1-B}` or `Z_n = Z_{n-1} + Z_U`.
///
/// Subproblems up to a small size are drawn in one step from their exact
/// distribution (computed in f64 by convolving the recurrence), which is
/// distributionally the same as recursing but far cheaper. Larger sizes
/// recurse with an explicit stack.
#[derive(Clone, Debug)]
pub struct RecurrenceSampler {
    kind: CostKind,
    max_n: usize,
    split: Split,
    leaves: Vec<Cdf>,
    budget: u64,
}

impl RecurrenceSampler {
    pub fn y(params: &ModelParams, max_n: usize, opts: SamplerOptions) -> Self {
        let rows = survivor_rows(params, max_n);
        let split = Split::Binomial(rows.iter().map(|r| Cdf::from_pmf(r)).collect());
        let leaves = build_leaves(opts.leaf_support_cap, max_n, |m, pmfs| mix(pmfs, rows[m].iter().copied().enumerate()));
        RecurrenceSampler { kind: CostKind::Y, max_n, split, leaves, budget: opts.budget }
    }

    pub fn z(max_n: usize, opts: SamplerOptions) -> Self {
        let leaves = build_leaves(opts.leaf_support_cap, max_n, |m, pmfs| {
            let w = 1.0 / m as f64;
            mix(pmfs, (0..m).map(|j| (j, w)))
        });
        RecurrenceSampler { kind: CostKind::Z, max_n, split: Split::Uniform, leaves, budget: opts.budget }
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    /// Largest size drawn directly from a table.
    pub fn leaf_size(&self) -> usize {
        self.leaves.len().saturating_sub(1)
    }

    /// Exact (to f64) distribution of the cost at a tabled size.
    pub fn leaf_pmf(&self, m: usize) -> Option<Vec<f64>> {
        let cdf = &self.leaves.get(m)?.0;
        Some(
            cdf.iter()
                .scan(0.0, |prev, &c| {
                    let x = c - *prev;
                    *prev = c;
                    Some(x)
                })
                .collect(),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<u64> {
        if n > self.max_n {
            return Err(Error::InvalidParameter(format!("n = {n} exceeds sampler size {}", self.max_n)));
        }
        let mut total = 0u64;
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            let add = if let Some(cdf) = self.leaves.get(m) {
                cdf.draw(rng) as u64
            } else if m <= 1 {
                m as u64
            } else {
                let other = match &self.split {
                    Split::Binomial(rows) => rows[m].draw(rng),
                    Split::Uniform => rng.random_range(0..m),
                };
                stack.push(m - 1);
                stack.push(other);
                0
            };
            total += add;
            if total > self.budget {
                return Err(Error::BudgetExceeded { limit: self.budget });
            }
        }
        Ok(total)
    }
}

/// `pi_{m,k} = C(m-1,k) p^{m-1-k} q^k` for `k < m`, rows `0..=max_n`, each
/// entry correctly rounded from a 128-bit evaluation so tables are identical
/// on every platform.
fn survivor_rows(params: &ModelParams, max_n: usize) -> Vec<Vec<f64>> {
    const PREC: u32 = 160;
    let ratio = Float::with_val(PREC, params.q()) / Float::with_val(PREC, params.p());
    let p = params.p_real(PREC);
    let mut rows = vec![Vec::new(), vec![1.0]];
    for m in 2..=max_n {
        let mut w = Float::with_val(PREC, p.clone().pow(m as u32 - 1u32));
        let mut row = Vec::with_capacity(m);
        for k in 0..m {
            row.push(w.to_f64());
            w *= (m - 1 - k) as u32;
            w /= (k + 1) as u32;
            w *= &ratio;
        }
        rows.push(row);
    }
    rows.truncate(max_n + 1);
    rows
}

fn mix(pmfs: &[Vec<f64>], weights: impl Iterator<Item = (usize, f64)>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for (k, w) in weights {
        let pk = &pmfs[k];
        if out.len() < pk.len() {
            out.resize(pk.len(), 0.0);
        }
        for (o, &x) in out.iter_mut().zip(pk) {
            *o += w * x;
        }
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn trim_tail(pmf: &mut Vec<f64>) {
    let mut tail = 0.0;
    while let Some(&last) = pmf.last() {
        if tail + last >= LEAF_TAIL {
            break;
        }
        tail += last;
        pmf.pop();
    }
}

/// Leaf CDFs for sizes `0..=m0`, growing `m0` while the support stays under
/// `cap`. `mixture(m, pmfs)` gives the law of the second subproblem.
fn build_leaves(cap: usize, max_n: usize, mixture: impl Fn(usize, &[Vec<f64>]) -> Vec<f64>) -> Vec<Cdf> {
    if cap == 0 {
        return Vec::new();
    }
    let mut pmfs: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0, 1.0]];
    for m in 2..=max_n {
        let second = mixture(m, &pmfs);
        let mut pm = convolve(&pmfs[m - 1], &second);
        trim_tail(&mut pm);
        if pm.len() > cap {
            break;
        }
        pmfs.push(pm);
    }
    pmfs.truncate(max_n + 1);
    pmfs.iter().map(|p| Cdf::from_pmf(p)).collect()
}

pub const SAMPLE_CSV_HEADER: &str = "kind,n,p,replicate,cost,alpha,seed";

/// Streams samples as CSV rows; `p` is left empty for Z samples.
pub fn write_samples_csv<W: Write>(out: &mut W, p: Option<&ModelParams>, samples: &[CostSample]) -> io::Result<()> {
    writeln!(out, "{SAMPLE_CSV_HEADER}")?;
    let p = p.map(|m| m.label()).unwrap_or_default();
    for s in samples {
        let alpha = s.alpha.map(|a| a.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{},{}", s.kind, s.n, p, s.replicate_id, s.cost, alpha, s.seed)?;
    }
    Ok(())
}
