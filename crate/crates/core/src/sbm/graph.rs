use std::ops::Range;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::params::SbmParams;
use crate::rng::{derive_seed, substream};
use crate::{Error, Result};

pub type NodeId = u32;

/// A realized SBM graph in compressed sparse row form.
///
/// Node ids are global and contiguous per community: community `i` owns
/// `starts[i]..starts[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmGraph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    starts: Vec<usize>,
    r: u32,
    params: Option<SbmParams>,
    rng_seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct GenerateOptions {
    /// Refuse to sample when the expected number of edges exceeds this.
    pub max_expected_edges: f64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            max_expected_edges: 2.5e8,
        }
    }
}

impl SbmGraph {
    /// Build a graph from an explicit undirected edge list. Self-loops,
    /// duplicates and out-of-range ids are rejected.
    pub fn from_edges(
        sizes: &[usize],
        r: u32,
        edges: &[(NodeId, NodeId)],
        rng_seed: u64,
    ) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        if n > NodeId::MAX as usize {
            return Err(Error::InvalidParams(format!("{n} nodes exceed the id range")));
        }
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidParams(format!("self-loop at node {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParams(format!("edge ({u},{v}) out of range")));
            }
        }
        let graph = Self::assemble(sizes, r, None, rng_seed, edges.iter().copied(), edges.len());
        for v in 0..n as NodeId {
            if graph.neighbors(v).windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!("duplicate edge at node {v}")));
            }
        }
        Ok(graph)
    }

    fn assemble(
        sizes: &[usize],
        r: u32,
        params: Option<SbmParams>,
        rng_seed: u64,
        edges: impl Iterator<Item = (NodeId, NodeId)> + Clone,
        edge_count: usize,
    ) -> Self {
        let mut starts = Vec::with_capacity(sizes.len() + 1);
        starts.push(0);
        for s in sizes {
            starts.push(starts.last().unwrap() + s);
        }
        let n = *starts.last().unwrap();
        let mut degree = vec![0usize; n];
        for (u, v) in edges.clone() {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        debug_assert_eq!(*offsets.last().unwrap(), 2 * edge_count);
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0 as NodeId; 2 * edge_count];
        for (u, v) in edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        let mut rows: Vec<&mut [NodeId]> = Vec::with_capacity(n);
        let mut rest = neighbors.as_mut_slice();
        for d in &degree {
            let (head, tail) = rest.split_at_mut(*d);
            rows.push(head);
            rest = tail;
        }
        rows.par_iter_mut().for_each(|row| row.sort_unstable());
        Self {
            offsets,
            neighbors,
            starts,
            r,
            params,
            rng_seed,
        }
    }

    pub fn n(&self) -> usize {
        *self.starts.last().unwrap()
    }

    pub fn k(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn threshold(&self) -> u32 {
        self.r
    }

    pub fn params(&self) -> Option<&SbmParams> {
        self.params.as_ref()
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.starts.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn community_range(&self, i: usize) -> Range<usize> {
        self.starts[i]..self.starts[i + 1]
    }

    pub fn community_of(&self, v: NodeId) -> usize {
        self.starts.partition_point(|&s| s <= v as usize) - 1
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.n() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// Number of edges with one endpoint in community `i` and the other in `j`.
    pub fn block_edge_count(&self, i: usize, j: usize) -> usize {
        self.edges()
            .filter(|&(u, v)| {
                let (a, b) = (self.community_of(u), self.community_of(v));
                (a == i && b == j) || (a == j && b == i)
            })
            .count()
    }

    /// Verify symmetry, absence of loops and duplicates, and label counts.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.n();
        for u in 0..n as NodeId {
            let row = self.neighbors(u);
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("row {u} not strictly increasing"));
            }
            for &v in row {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if self.neighbors(v).binary_search(&u).is_err() {
                    return Err(format!("edge ({u},{v}) not mirrored"));
                }
            }
        }
        let mut counts = vec![0usize; self.k()];
        for v in 0..n as NodeId {
            counts[self.community_of(v)] += 1;
        }
        if counts != self.sizes() {
            return Err("label counts differ from community sizes".into());
        }
        Ok(())
    }
}

/// Sample a graph with [`GenerateOptions::default`].
pub fn generate_sbm(params: &SbmParams, seed: u64) -> Result<SbmGraph> {
    generate_sbm_with(params, seed, &GenerateOptions::default())
}

/// Sample a graph from `params`. Each block `(i, j)`, `i <= j`, draws from its
/// own sub-stream of `seed` and walks its pair sequence with geometric jumps,
/// so the cost is proportional to the number of edges.
pub fn generate_sbm_with(
    params: &SbmParams,
    seed: u64,
    options: &GenerateOptions,
) -> Result<SbmGraph> {
    params.check()?;
    let expected = params.expected_edges();
    if expected > options.max_expected_edges {
        return Err(Error::EdgeCap {
            expected,
            cap: options.max_expected_edges,
        });
    }
    if params.n() > NodeId::MAX as usize {
        return Err(Error::InvalidParams(format!(
            "{} nodes exceed the id range",
            params.n()
        )));
    }
    let k = params.k();
    let mut starts = vec![0usize];
    for s in &params.sizes {
        starts.push(starts.last().unwrap() + s);
    }
    let blocks: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let key = derive_seed(seed, &[0x5B4D]);
    let block_edges: Vec<Vec<(NodeId, NodeId)>> = blocks
        .par_iter()
        .enumerate()
        .map(|(b, &(i, j))| {
            let mut rng = substream(key, b as u64);
            if i == j {
                sample_within(&mut rng, starts[i], params.sizes[i], params.p(i))
            } else {
                sample_between(
                    &mut rng,
                    (starts[i], params.sizes[i]),
                    (starts[j], params.sizes[j]),
                    params.q(i, j),
                )
            }
        })
        .collect();
    let count = block_edges.iter().map(Vec::len).sum();
    Ok(SbmGraph::assemble(
        &params.sizes,
        params.r,
        Some(params.clone()),
        seed,
        block_edges.iter().flatten().copied(),
        count,
    ))
}

/// Gap to the next success of a Bernoulli(`p`) sequence, minus one.
fn geometric_skip<R: Rng>(rng: &mut R, log_q: f64) -> f64 {
    let u: f64 = rng.random();
    ((1.0 - u).ln() / log_q).floor()
}

fn sample_within<R: Rng>(rng: &mut R, start: usize, m: usize, p: f64) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    if p <= 0.0 || m < 2 {
        return edges;
    }
    let log_q = (-p).ln_1p();
    let mut reserve = (m as f64 * (m as f64 - 1.0) / 2.0 * p).ceil();
    reserve += 4.0 * reserve.sqrt();
    edges.reserve(reserve as usize);
    // pairs (v, w) with w < v, lexicographic in v then w
    let m = m as u64;
    let mut v: u64 = 1;
    let mut w: i64 = -1;
    loop {
        let skip = geometric_skip(rng, log_q);
        if skip >= (m * m) as f64 {
            break;
        }
        w += 1 + skip as i64;
        while v < m && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v >= m {
            break;
        }
        edges.push(((start as u64 + w as u64) as NodeId, (start as u64 + v) as NodeId));
    }
    edges
}

fn sample_between<R: Rng>(
    rng: &mut R,
    (si, ni): (usize, usize),
    (sj, nj): (usize, usize),
    q: f64,
) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    if q <= 0.0 || ni == 0 || nj == 0 {
        return edges;
    }
    let log_q = (-q).ln_1p();
    let total = ni as u64 * nj as u64;
    let mut reserve = (total as f64 * q).ceil();
    reserve += 4.0 * reserve.sqrt();
    edges.reserve(reserve as usize);
    let mut idx: i64 = -1;
    loop {
        let skip = geometric_skip(rng, log_q);
        if skip >= total as f64 {
            break;
        }
        idx += 1 + skip as i64;
        if idx as u64 >= total {
            break;
        }
        let (a, b) = (idx as u64 / nj as u64, idx as u64 % nj as u64);
        edges.push(((si as u64 + a) as NodeId, (sj as u64 + b) as NodeId));
    }
    edges
}

/// Pick exactly `counts[i]` distinct nodes uniformly from each community.
/// The result is sorted.
pub fn select_seeds(graph: &SbmGraph, counts: &[usize], seed: u64) -> Result<Vec<NodeId>> {
    if counts.len() != graph.k() {
        return Err(Error::InvalidParams(format!(
            "expected {} seed counts, got {}",
            graph.k(),
            counts.len()
        )));
    }
    let key = derive_seed(seed, &[0x5EED]);
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (i, &a) in counts.iter().enumerate() {
        let range = graph.community_range(i);
        let size = range.len();
        if a > size {
            return Err(Error::SeedCount {
                community: i,
                requested: a,
                size,
            });
        }
        let mut rng = substream(key, i as u64);
        let mut picked: Vec<NodeId> = index::sample(&mut rng, size, a)
            .into_iter()
            .map(|x| (range.start + x) as NodeId)
            .collect();
        picked.sort_unstable();
        out.extend(picked);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability_gives_no_edges() {
        let p = SbmParams::identical(3, 50, 0.0, 0.0, 2, 0);
        let g = generate_sbm(&p, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.n(), 150);
        g.check_invariants().unwrap();
    }

    #[test]
    fn near_complete_graph() {
        let eps = 1e-9;
        let p = SbmParams::identical(1, 10, 1.0 - eps, 0.0, 2, 0);
        let g = generate_sbm(&p, 3).unwrap();
        let mean = 45.0 * (1.0 - eps);
        let sd = (45.0 * eps * (1.0 - eps)).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() <= 3.0 * sd + 1e-9);
        g.check_invariants().unwrap();
    }

    #[test]
    fn deterministic_given_seed() {
        let p = SbmParams::identical(2, 300, 0.05, 0.01, 2, 0);
        let a = generate_sbm(&p, 77).unwrap();
        let b = generate_sbm(&p, 77).unwrap();
        let c = generate_sbm(&p, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.neighbors, c.neighbors);
    }

    #[test]
    fn labels_are_contiguous() {
        let p = SbmParams {
            sizes: vec![3, 5, 2],
            edge_probs: vec![vec![0.5; 3]; 3],
            r: 2,
            seeds: vec![0; 3],
        };
        let g = generate_sbm(&p, 0).unwrap();
        let labels: Vec<_> = (0..10).map(|v| g.community_of(v)).collect();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1, 1, 1, 2, 2]);
        assert_eq!(g.community_range(1), 3..8);
    }

    #[test]
    fn edge_cap_is_enforced() {
        let p = SbmParams::identical(1, 100_000, 0.5, 0.0, 2, 0);
        let err = generate_sbm(&p, 0).unwrap_err();
        assert!(matches!(err, Error::EdgeCap { .. }));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(SbmGraph::from_edges(&[3], 2, &[(0, 0)], 0).is_err());
        assert!(SbmGraph::from_edges(&[3], 2, &[(0, 1), (1, 0)], 0).is_err());
        assert!(SbmGraph::from_edges(&[3], 2, &[(0, 3)], 0).is_err());
        let g = SbmGraph::from_edges(&[3], 2, &[(0, 1), (1, 2)], 0).unwrap();
        assert_eq!(g.neighbors(1), &[0, 2]);
        g.check_invariants().unwrap();
    }

    #[test]
    fn seed_selection_bounds() {
        let p = SbmParams::identical(2, 10, 0.1, 0.1, 2, 0);
        let g = generate_sbm(&p, 0).unwrap();
        let all = select_seeds(&g, &[10, 10], 1).unwrap();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert!(select_seeds(&g, &[0, 0], 1).unwrap().is_empty());
        assert!(matches!(
            select_seeds(&g, &[11, 0], 1),
            Err(Error::SeedCount { community: 0, .. })
        ));
        let s = select_seeds(&g, &[2, 3], 5).unwrap();
        assert_eq!(s.iter().filter(|&&v| v < 10).count(), 2);
        assert_eq!(s.iter().filter(|&&v| v >= 10).count(), 3);
        assert_eq!(s, select_seeds(&g, &[2, 3], 5).unwrap());
    }
}
