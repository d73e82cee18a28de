//! G(n,p) sampling and brute-force oracles on small graphs.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::{self, RationalCoin};

/// Largest vertex count accepted by the subset-enumeration oracles.
pub const BRUTE_FORCE_LIMIT: usize = 25;

/// Labeled simple graph on `0..n` with bitset adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    /// Seed the graph was drawn from (0 for hand-built graphs).
    pub seed: u64,
    /// Stream index under `seed`.
    pub stream: u64,
}

pub fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl GraphInstance {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        GraphInstance { n, words, adj: vec![0; n * words], seed: 0, stream: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidParameter(format!("bad edge ({u},{v}) for n = {n}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `u64` words in one vertex set.
    pub fn words(&self) -> usize {
        self.words
    }

    /// Open neighbourhood of `v` as a bitset.
    pub fn neighbors(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u)[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| (u + 1..self.n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
    }

    /// `"n m seed"` followed by one `"u v"` line per edge.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.edge_count(), self.seed);
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("graph dump: {msg}"));
        let mut lines = text.lines();
        let header: Vec<u64> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("non-numeric header")))
            .collect::<Result<_>>()?;
        let [n, m, seed] = header[..] else { return Err(bad("header must be 'n m seed'")) };
        let mut edges = Vec::with_capacity(m as usize);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(bad(&format!("bad edge line '{line}'"))),
            }
        }
        if edges.len() as u64 != m {
            return Err(bad("edge count does not match header"));
        }
        let mut g = Self::from_edges(n as usize, &edges)?;
        g.seed = seed;
        Ok(g)
    }

    fn small_masks(&self) -> Result<Vec<u32>> {
        if self.n > BRUTE_FORCE_LIMIT {
            return Err(Error::SizeTooLarge { n: self.n, limit: BRUTE_FORCE_LIMIT });
        }
        Ok((0..self.n).map(|v| self.neighbors(v)[0] as u32).collect())
    }
}

/// Draws G(n,p) from `rng`: each pair `u < v`, in lexicographic order, is an
/// edge with probability exactly `p`.
pub fn sample_gnp_with<R: Rng + ?Sized>(n: usize, coin: &RationalCoin, rng: &mut R) -> GraphInstance {
    let mut g = GraphInstance::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if coin.flip(rng) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// G(n,p) from stream `stream` of `seed`.
pub fn sample_gnp(n: usize, params: &ModelParams, seed: u64, stream: u64) -> Result<GraphInstance> {
    let coin = RationalCoin::new(params)?;
    let mut g = sample_gnp_with(n, &coin, &mut rng::seeded(seed, stream));
    g.seed = seed;
    g.stream = stream;
    Ok(g)
}

/// Walks all `2^n` vertex subsets, marking a subset independent when its
/// lowest vertex has no neighbour in it and the rest is independent.
fn for_each_independent(masks: &[u32], mut visit: impl FnMut(u32)) {
    let n = masks.len();
    let mut indep = vec![false; 1usize << n];
    indep[0] = true;
    for s in 1u32..(1u32 << n) {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        if indep[rest as usize] && masks[v] & s == 0 {
            indep[s as usize] = true;
            visit(s);
        }
    }
}

/// Stability number by exhaustive subset enumeration.
pub fn brute_force_alpha(g: &GraphInstance) -> Result<usize> {
    let masks = g.small_masks()?;
    let mut best = 0;
    for_each_independent(&masks, |s| best = best.max(s.count_ones() as usize));
    Ok(best)
}

/// Number of nonempty independent sets by exhaustive subset enumeration.
pub fn count_independent_sets(g: &GraphInstance) -> Result<u64> {
    let masks = g.small_masks()?;
    let mut count = 0;
    for_each_independent(&masks, |_| count += 1);
    Ok(count)
}
