//! Erdős–Rényi graphs `G(n+1, p)`.
//!
//! Vertices are `0..n_plus_1` internally; the text edge format is 1-based.
//! Adjacency is stored densely since the desk-scale regime is `n <= ~3000`
//! and the eigen stage needs an `(n+1)^2` matrix anyway.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;

use crate::rng::{substream, Purpose, StreamRng};
use crate::{Error, Result};

pub const DEFAULT_MAX_ATTEMPTS: u32 = 1000;

/// A realization of `G(n+1, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_plus_1: usize,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    degrees: Vec<usize>,
    edge_count: usize,
    p: f64,
    seed: u64,
    connected: bool,
    attempts: u32,
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

impl Graph {
    /// Build a graph from 0-based undirected edges. Duplicate edges are
    /// ignored; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(n_plus_1: usize, edges: &[(usize, usize)], p: f64, seed: u64) -> Result<Self> {
        if n_plus_1 < 2 {
            return Err(Error::TooFewVertices(n_plus_1));
        }
        let mut adjacency = vec![false; n_plus_1 * n_plus_1];
        for &(i, j) in edges {
            if i >= n_plus_1 || j >= n_plus_1 || i == j {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) invalid for {} vertices",
                    i + 1,
                    j + 1,
                    n_plus_1
                )));
            }
            adjacency[i * n_plus_1 + j] = true;
            adjacency[j * n_plus_1 + i] = true;
        }
        Ok(Self::from_adjacency(n_plus_1, adjacency, p, seed, 1))
    }

    fn from_adjacency(n_plus_1: usize, adjacency: Vec<bool>, p: f64, seed: u64, attempts: u32) -> Self {
        let neighbors: Vec<Vec<usize>> = (0..n_plus_1)
            .map(|i| {
                let row = &adjacency[i * n_plus_1..(i + 1) * n_plus_1];
                row.iter().enumerate().filter(|(_, &a)| a).map(|(j, _)| j).collect()
            })
            .collect();
        let degrees: Vec<usize> = neighbors.iter().map(Vec::len).collect();
        let edge_count = degrees.iter().sum::<usize>() / 2;
        let mut g = Self {
            n_plus_1,
            adjacency,
            neighbors,
            degrees,
            edge_count,
            p,
            seed,
            connected: false,
            attempts,
        };
        g.connected = g.reachable_from(0) == n_plus_1;
        g
    }

    fn reachable_from(&self, start: usize) -> usize {
        let mut seen = vec![false; self.n_plus_1];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count
    }

    /// Complete graph `K_m`.
    pub fn complete(m: usize) -> Result<Self> {
        let edges: Vec<_> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        Self::from_edges(m, &edges, 1.0 - 1e-12, 0)
    }

    /// Path `1 - 2 - ... - m`.
    pub fn path(m: usize) -> Result<Self> {
        let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        Self::from_edges(m, &edges, 0.5, 0)
    }

    /// Star with centre 1 and `m - 1` leaves.
    pub fn star(m: usize) -> Result<Self> {
        let edges: Vec<_> = (1..m).map(|i| (0, i)).collect();
        Self::from_edges(m, &edges, 0.5, 0)
    }

    /// Same graph with a different nominal edge probability.
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    /// Number of vertices (`n + 1`).
    pub fn n_plus_1(&self) -> usize {
        self.n_plus_1
    }

    /// The size parameter `n` (each vertex has `n` potential neighbours).
    pub fn n(&self) -> usize {
        self.n_plus_1 - 1
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n_plus_1 + j]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Number of sampling attempts it took to obtain this graph.
    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    /// Edges as 0-based pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_plus_1).flat_map(move |i| {
            self.neighbors[i].iter().copied().filter(move |&j| j > i).map(move |j| (i, j))
        })
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if let Some(v) = self.degrees.iter().position(|&d| d == 0) {
            return Err(Error::Disconnected { vertex: v + 1 });
        }
        if !self.connected {
            let mut seen = vec![false; self.n_plus_1];
            seen[0] = true;
            let mut queue = VecDeque::from([0]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            let v = seen.iter().position(|s| !s).unwrap_or(0);
            return Err(Error::Disconnected { vertex: v + 1 });
        }
        Ok(())
    }

    /// Line-oriented text form: header `n_plus_1 p seed connected_flag`, then
    /// one 1-based `i j` line per edge with `i < j`, sorted.
    pub fn to_edge_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {} {}", self.n_plus_1, self.p, self.seed, u8::from(self.connected));
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{} {}", i + 1, j + 1);
        }
        out
    }

    /// Parse the format written by [`Graph::to_edge_text`]. Blank lines and
    /// lines starting with `#` are skipped. The stored connected flag is
    /// recomputed rather than trusted.
    pub fn from_edge_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("header must be `n_plus_1 p seed connected_flag`, got `{header}`")));
        }
        let n_plus_1: usize = parse_field(fields[0], "n_plus_1")?;
        let p: f64 = parse_field(fields[1], "p")?;
        let seed: u64 = parse_field(fields[2], "seed")?;
        let _flag: u8 = parse_field(fields[3], "connected_flag")?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("bad edge line `{line}`")));
            };
            let i: usize = parse_field(a, "vertex")?;
            let j: usize = parse_field(b, "vertex")?;
            if i == 0 || j == 0 {
                return Err(Error::Parse(format!("vertices are 1-based, got `{line}`")));
            }
            edges.push((i - 1, j - 1));
        }
        Self::from_edges(n_plus_1, &edges, p, seed)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("cannot parse {what} from `{s}`")))
}

fn check_size(n_plus_1: usize) -> Result<()> {
    if n_plus_1 < 2 {
        Err(Error::TooFewVertices(n_plus_1))
    } else {
        Ok(())
    }
}

fn draw_adjacency(n_plus_1: usize, p: f64, rng: &mut StreamRng) -> Vec<bool> {
    let mut adjacency = vec![false; n_plus_1 * n_plus_1];
    for i in 0..n_plus_1 {
        for j in i + 1..n_plus_1 {
            if rng.gen_bool(p) {
                adjacency[i * n_plus_1 + j] = true;
                adjacency[j * n_plus_1 + i] = true;
            }
        }
    }
    adjacency
}

/// Sample `G(n_plus_1, p)`. Deterministic given `seed`.
pub fn sample_er(n_plus_1: usize, p: f64, seed: u64) -> Result<Graph> {
    check_size(n_plus_1)?;
    check_probability(p)?;
    let mut rng = substream(seed, Purpose::Graph, &[]);
    Ok(Graph::from_adjacency(n_plus_1, draw_adjacency(n_plus_1, p, &mut rng), p, seed, 1))
}

/// Sample `G(n_plus_1, p)` conditioned on connectivity by rejection. Attempt
/// `a` draws from its own substream, so the accepted graph depends only on
/// `(n_plus_1, p, seed)`.
pub fn sample_connected_er(n_plus_1: usize, p: f64, seed: u64, max_attempts: u32) -> Result<Graph> {
    check_size(n_plus_1)?;
    check_probability(p)?;
    if max_attempts == 0 {
        return Err(Error::InvalidArgument("max_attempts must be at least 1".into()));
    }
    for attempt in 0..max_attempts {
        let mut rng = substream(seed, Purpose::ConnectivityAttempt, &[u64::from(attempt)]);
        let g = Graph::from_adjacency(n_plus_1, draw_adjacency(n_plus_1, p, &mut rng), p, seed, attempt + 1);
        if g.connected {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityExhausted { n_plus_1, p, attempts: max_attempts })
}

/// Whether a coupled sequence is built directly or through its complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingDirection {
    /// Non-increasing `p`: edges are only ever deleted.
    Decreasing,
    /// Non-decreasing `p`: the complement graph is built by deletion.
    Increasing,
}

/// Graphs of increasing size coupled edge by edge.
#[derive(Clone, Debug)]
pub struct GraphSequence {
    pub graphs: Vec<Graph>,
    pub p_schedule: Vec<f64>,
    pub direction: CouplingDirection,
}

impl GraphSequence {
    /// Retention probabilities `q` per step (`q[0]` is 1 by convention), for
    /// the graph itself (decreasing) or its complement (increasing).
    pub fn retention(&self) -> Vec<f64> {
        retention_probabilities(&self.p_schedule, self.direction)
    }
}

fn retention_probabilities(p: &[f64], direction: CouplingDirection) -> Vec<f64> {
    let kept = |x: f64| match direction {
        CouplingDirection::Decreasing => x,
        CouplingDirection::Increasing => 1.0 - x,
    };
    std::iter::once(1.0)
        .chain(p.windows(2).map(|w| kept(w[1]) / kept(w[0])))
        .collect()
}

/// Sample a monotone coupled sequence `G(sizes[t], p_schedule[t])`.
///
/// For a non-increasing schedule, an edge among old vertices survives step `t`
/// with probability `q = p_t / p_{t-1}`; edges touching new vertices are fresh
/// `Bernoulli(p_t)`. A non-decreasing schedule applies the same construction
/// to the complement with `1 - p_t`. A constant schedule counts as
/// decreasing.
pub fn sample_coupled_sequence(p_schedule: &[f64], sizes: &[usize], seed: u64) -> Result<GraphSequence> {
    if p_schedule.is_empty() || p_schedule.len() != sizes.len() {
        return Err(Error::InvalidArgument("p_schedule and sizes must be non-empty and of equal length".into()));
    }
    for &p in p_schedule {
        check_probability(p)?;
    }
    check_size(sizes[0])?;
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("sizes must be strictly increasing".into()));
    }
    let non_increasing = p_schedule.windows(2).all(|w| w[1] <= w[0]);
    let non_decreasing = p_schedule.windows(2).all(|w| w[1] >= w[0]);
    let direction = if non_increasing {
        CouplingDirection::Decreasing
    } else if non_decreasing {
        CouplingDirection::Increasing
    } else {
        return Err(Error::NonMonotoneSchedule);
    };
    // Work on the "deleted-only" layer: the graph itself or its complement.
    let layer_p: Vec<f64> = match direction {
        CouplingDirection::Decreasing => p_schedule.to_vec(),
        CouplingDirection::Increasing => p_schedule.iter().map(|p| 1.0 - p).collect(),
    };
    let q = retention_probabilities(p_schedule, direction);

    let max = *sizes.last().unwrap();
    let mut layer = vec![false; max * max];
    let mut graphs = Vec::with_capacity(sizes.len());
    let mut prev = 0usize;
    for (t, &m) in sizes.iter().enumerate() {
        let mut rng = substream(seed, Purpose::Coupling, &[t as u64]);
        for i in 0..m {
            for j in i + 1..m {
                let present = if j < prev {
                    layer[i * max + j] && (q[t] >= 1.0 || rng.gen_bool(q[t]))
                } else {
                    rng.gen_bool(layer_p[t])
                };
                layer[i * max + j] = present;
                layer[j * max + i] = present;
            }
        }
        prev = m;

        let mut adjacency = vec![false; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let bit = layer[i * max + j];
                    adjacency[i * m + j] = match direction {
                        CouplingDirection::Decreasing => bit,
                        CouplingDirection::Increasing => !bit,
                    };
                }
            }
        }
        graphs.push(Graph::from_adjacency(m, adjacency, p_schedule[t], seed, 1));
    }
    Ok(GraphSequence { graphs, p_schedule: p_schedule.to_vec(), direction })
}

/// `pi_i = d_i / (2|E|)`.
pub fn stationary_distribution(g: &Graph) -> Result<Vec<f64>> {
    if let Some(v) = g.degrees.iter().position(|&d| d == 0) {
        return Err(Error::Disconnected { vertex: v + 1 });
    }
    let total = (2 * g.edge_count) as f64;
    Ok(g.degrees.iter().map(|&d| d as f64 / total).collect())
}

/// Number of neighbours of `i` outside `excluded ∪ {i}`.
pub fn reduced_degree(g: &Graph, i: usize, excluded: &[usize]) -> Result<usize> {
    if i >= g.n_plus_1 || excluded.iter().any(|&j| j >= g.n_plus_1) {
        return Err(Error::InvalidArgument("vertex index out of range".into()));
    }
    if excluded.contains(&i) {
        return Err(Error::InvalidArgument(format!("vertex {} is in its own exclusion set", i + 1)));
    }
    let mut ex = excluded.to_vec();
    ex.sort_unstable();
    ex.dedup();
    let removed = ex.iter().filter(|&&j| g.has_edge(i, j)).count();
    Ok(g.degrees[i] - removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_vertex_edge_frequency_is_bernoulli() {
        let m = 100_000u64;
        let hits = (0..m).filter(|&s| sample_er(2, 0.5, s).unwrap().edge_count() == 1).count();
        let freq = hits as f64 / m as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn near_one_probability_gives_complete_graph() {
        let g = sample_er(5, 0.999_999, 3).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!(g.degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn edge_count_within_four_sd_of_binomial_mean() {
        let g = sample_er(100, 0.3, 42).unwrap();
        let pairs = 4950.0;
        let sd = (pairs * 0.3 * 0.7f64).sqrt();
        assert!((g.edge_count() as f64 - 1485.0).abs() <= 4.0 * sd);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(sample_er(10, 0.0, 1), Err(Error::InvalidProbability(_))));
        assert!(matches!(sample_er(10, 1.0, 1), Err(Error::InvalidProbability(_))));
        assert!(matches!(sample_er(10, f64::NAN, 1), Err(Error::InvalidProbability(_))));
        assert!(matches!(sample_er(1, 0.5, 1), Err(Error::TooFewVertices(1))));
        assert!(sample_connected_er(10, 0.5, 1, 0).is_err());
    }

    #[test]
    fn connected_sampling() {
        let k4 = sample_connected_er(4, 0.999_999, 9, 5).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(k4.attempts(), 1);

        let g = sample_connected_er(200, 0.1, 11, DEFAULT_MAX_ATTEMPTS).unwrap();
        assert!(g.is_connected());
        assert!(g.attempts() <= 3);

        let err = sample_connected_er(50, 0.01, 11, 20).unwrap_err();
        assert!(matches!(err, Error::ConnectivityExhausted { attempts: 20, .. }));
    }

    #[test]
    fn connectivity_probability_at_sparse_threshold_is_tiny() {
        // Monte Carlo estimate of P(connected) for G(50, 0.01): np = 0.5.
        let connected = (0..2000).filter(|&s| sample_er(50, 0.01, s).unwrap().is_connected()).count();
        assert_eq!(connected, 0);
    }

    #[test]
    fn stationary_distribution_examples() {
        let k4 = Graph::complete(4).unwrap();
        assert_eq!(stationary_distribution(&k4).unwrap(), vec![0.25; 4]);
        let p3 = Graph::path(3).unwrap();
        assert_eq!(stationary_distribution(&p3).unwrap(), vec![0.25, 0.5, 0.25]);
        let star = Graph::star(4).unwrap();
        let pi = stationary_distribution(&star).unwrap();
        let expect = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        for (a, b) in pi.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let lonely = Graph::from_edges(3, &[(0, 1)], 0.5, 0).unwrap();
        assert!(matches!(stationary_distribution(&lonely), Err(Error::Disconnected { vertex: 3 })));
    }

    #[test]
    fn stationary_distribution_is_a_fixed_point() {
        let g = sample_connected_er(500, 0.05, 5, 100).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        let n = g.n_plus_1();
        let mut next = vec![0.0; n];
        for i in 0..n {
            let w = pi[i] / g.degrees()[i] as f64;
            for &j in g.neighbors(i) {
                next[j] += w;
            }
        }
        let err = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // reversibility pi_i P_ij = pi_j P_ji
        for (i, j) in g.edges().take(200) {
            let lhs = pi[i] / g.degrees()[i] as f64;
            let rhs = pi[j] / g.degrees()[j] as f64;
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn reduced_degree_examples() {
        let k4 = Graph::complete(4).unwrap();
        assert_eq!(reduced_degree(&k4, 0, &[1]).unwrap(), 2);
        let p3 = Graph::path(3).unwrap();
        assert_eq!(reduced_degree(&p3, 1, &[0, 2]).unwrap(), 0);
        let g = sample_er(30, 0.3, 2).unwrap();
        for i in 0..30 {
            assert_eq!(reduced_degree(&g, i, &[]).unwrap(), g.degrees()[i]);
        }
        assert!(reduced_degree(&k4, 0, &[0]).is_err());
    }

    #[test]
    fn edge_text_round_trip() {
        let g = sample_er(40, 0.2, 17).unwrap();
        let text = g.to_edge_text();
        let back = Graph::from_edge_text(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_edge_text(), text);
        assert!(text.starts_with(&format!("40 0.2 17 {}\n", u8::from(g.is_connected()))));
    }

    #[test]
    fn edge_text_rejects_garbage() {
        assert!(Graph::from_edge_text("").is_err());
        assert!(Graph::from_edge_text("3 0.5 1\n").is_err());
        assert!(Graph::from_edge_text("3 0.5 1 1\n0 1\n").is_err());
        assert!(Graph::from_edge_text("3 0.5 1 1\n1 2 3\n").is_err());
        assert!(Graph::from_edge_text("3 0.5 1 1\n1 4\n").is_err());
    }

    #[test]
    fn constant_schedule_never_changes_old_edges() {
        let seq = sample_coupled_sequence(&[0.3, 0.3, 0.3], &[20, 25, 30], 4).unwrap();
        assert_eq!(seq.retention(), vec![1.0, 1.0, 1.0]);
        for w in seq.graphs.windows(2) {
            let m = w[0].n_plus_1();
            for i in 0..m {
                for j in 0..m {
                    assert_eq!(w[0].has_edge(i, j), w[1].has_edge(i, j));
                }
            }
        }
    }

    #[test]
    fn coupled_sequence_validation() {
        assert!(matches!(
            sample_coupled_sequence(&[0.5, 0.2, 0.4], &[5, 6, 7], 1),
            Err(Error::NonMonotoneSchedule)
        ));
        assert!(sample_coupled_sequence(&[0.5, 0.2], &[5, 5], 1).is_err());
        assert!(sample_coupled_sequence(&[0.5], &[5, 6], 1).is_err());
        assert!(sample_coupled_sequence(&[1.0, 0.5], &[5, 6], 1).is_err());
        let inc = sample_coupled_sequence(&[0.25, 0.5], &[10, 11], 1).unwrap();
        assert_eq!(inc.direction, CouplingDirection::Increasing);
        assert!((inc.retention()[1] - 0.5 / 0.75).abs() < 1e-15);
    }

    #[test]
    fn increasing_schedule_marginal_via_complement() {
        let runs = 20_000u64;
        let mut hits = 0usize;
        for s in 0..runs {
            let seq = sample_coupled_sequence(&[0.25, 0.5], &[10, 11], s).unwrap();
            // monotone in the complement: an edge present at step 1 stays
            for i in 0..10 {
                for j in 0..10 {
                    if seq.graphs[0].has_edge(i, j) {
                        assert!(seq.graphs[1].has_edge(i, j));
                    }
                }
            }
            hits += usize::from(!seq.graphs[1].has_edge(0, 1));
        }
        let f = hits as f64 / runs as f64;
        let sd = (0.25 / runs as f64).sqrt();
        assert!((f - 0.5).abs() <= 4.0 * sd, "complement marginal {f}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sampled_graphs_satisfy_invariants(n in 2usize..40, p in 0.01f64..0.99, seed in any::<u64>()) {
            let g = sample_er(n, p, seed).unwrap();
            let mut sum = 0;
            for i in 0..n {
                prop_assert!(!g.has_edge(i, i));
                let mut d = 0;
                for j in 0..n {
                    prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                    d += usize::from(g.has_edge(i, j));
                }
                prop_assert_eq!(d, g.degrees()[i]);
                sum += d;
            }
            prop_assert_eq!(sum, 2 * g.edge_count());
            prop_assert_eq!(g.is_connected(), g.reachable_from(0) == n);
            prop_assert_eq!(sample_er(n, p, seed).unwrap().to_edge_text(), g.to_edge_text());
        }

        #[test]
        fn decreasing_coupling_only_deletes(seed in any::<u64>()) {
            let seq = sample_coupled_sequence(&[0.6, 0.4, 0.3], &[8, 10, 13], seed).unwrap();
            for w in seq.graphs.windows(2) {
                let m = w[0].n_plus_1();
                for i in 0..m {
                    for j in 0..m {
                        prop_assert!(w[1].has_edge(i, j) <= w[0].has_edge(i, j));
                    }
                }
            }
        }
    }
}
