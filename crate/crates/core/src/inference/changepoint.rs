//! Change-point detection on graph sequences.
//!
//! A chatter anomaly raises the connection probability inside an m-vertex
//! community from p to p + eps while the rest of the graph stays an
//! independent-edge graph at level p. Detection compares consecutive
//! graphs with invariant statistics (edge and triangle counts, normalized
//! to a standard normal null limit), locality statistics (max degree,
//! scan), their exhaustive subset variants, and the largest eigenvalue.
//!
//! All statistics treat graphs as simple: diagonals are ignored even when
//! a model sampled with loops.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{sample_adjacency, AdjacencyMatrix, BlockModel, EdgeProbabilityMatrix};
use crate::rng::SeedFamily;

/// Guards for the exhaustive subset statistics; larger inputs are
/// combinatorially prohibitive and rejected.
pub const MAX_SUBSET_N: usize = 24;
pub const MAX_SUBSET_M: usize = 8;

/// Chatter-anomaly scenario: community size m, base edge probability p,
/// chatter probability p + signal_eps from graph `change_index` onward in
/// a sequence of `length` graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangePointSpec {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub signal_eps: f64,
    pub change_index: usize,
    pub length: usize,
}

impl ChangePointSpec {
    pub fn new(
        n: usize,
        m: usize,
        p: f64,
        signal_eps: f64,
        change_index: usize,
        length: usize,
    ) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(format!(
                "community size must satisfy 1 <= m <= n, got m = {m}, n = {n}"
            )));
        }
        if !(p > 0.0 && signal_eps >= 0.0 && p + signal_eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "require 0 < p and 0 <= eps with p + eps <= 1, got p = {p}, eps = {signal_eps}"
            )));
        }
        if change_index == 0 || length < change_index {
            return Err(Error::InvalidParameter(format!(
                "require 1 <= change index <= length, got {change_index} and {length}"
            )));
        }
        Ok(Self {
            n,
            m,
            p,
            signal_eps,
            change_index,
            length,
        })
    }

    pub fn chatter_probability(&self) -> f64 {
        self.p + self.signal_eps
    }

    /// Hollow edge-probability matrix of the post-change graph.
    pub fn chatter_probability_matrix(&self) -> EdgeProbabilityMatrix {
        let model = if self.m == self.n {
            BlockModel::new(
                DMatrix::from_element(1, 1, self.chatter_probability()),
                vec![self.n],
            )
        } else {
            let pe = self.chatter_probability();
            BlockModel::new(
                DMatrix::from_row_slice(2, 2, &[pe, self.p, self.p, self.p]),
                vec![self.m, self.n - self.m],
            )
        }
        .expect("validated parameters");
        crate::models::sbm_probability_matrix(&model)
            .expect("probabilities in range")
            .hollow()
    }

    /// Hollow edge-probability matrix of the pre-change graphs.
    pub fn null_probability_matrix(&self) -> EdgeProbabilityMatrix {
        EdgeProbabilityMatrix::erdos_renyi(self.n, self.p)
            .expect("probability in range")
            .hollow()
    }
}

/// An ordered list of adjacency matrices with the index of the first
/// post-change graph (1-based, matching the scenario description).
#[derive(Debug, Clone)]
pub struct GraphSequence {
    graphs: Vec<AdjacencyMatrix>,
    change_index: usize,
}

impl GraphSequence {
    pub fn graphs(&self) -> &[AdjacencyMatrix] {
        &self.graphs
    }

    pub fn change_index(&self) -> usize {
        self.change_index
    }

    /// The two-sample pair straddling the change: the last pre-change
    /// graph and the first post-change graph.
    pub fn straddling_pair(&self) -> Option<(&AdjacencyMatrix, &AdjacencyMatrix)> {
        if self.change_index < 2 || self.change_index > self.graphs.len() {
            return None;
        }
        Some((
            &self.graphs[self.change_index - 2],
            &self.graphs[self.change_index - 1],
        ))
    }
}

/// Samples the scenario: graphs before the change index are level-p
/// independent-edge graphs, graphs from it onward carry the chatter block.
pub fn sample_sequence(spec: &ChangePointSpec, rng: &mut crate::rng::Stream) -> GraphSequence {
    let null = spec.null_probability_matrix();
    let chatter = spec.chatter_probability_matrix();
    let graphs = (1..=spec.length)
        .map(|time| {
            if time < spec.change_index {
                sample_adjacency(&null, rng)
            } else {
                sample_adjacency(&chatter, rng)
            }
        })
        .collect();
    GraphSequence {
        graphs,
        change_index: spec.change_index,
    }
}

/// Bitset neighborhood rows, diagonal masked out.
fn neighborhood_rows(a: &AdjacencyMatrix) -> Vec<Vec<u64>> {
    let n = a.n();
    let words = n.div_ceil(64);
    let mut rows = vec![vec![0u64; words]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for j in 0..n {
            if j != i && a.has_edge(i, j) {
                row[j / 64] |= 1u64 << (j % 64);
            }
        }
    }
    rows
}

/// Number of edges (2-cliques), loops ignored.
pub fn edge_count(a: &AdjacencyMatrix) -> u64 {
    let n = a.n();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            count += a.has_edge(i, j) as u64;
        }
    }
    count
}

/// Number of triangles (3-cliques), loops ignored: the value of
/// trace(A^3)/6 on the hollow matrix, computed by neighborhood
/// intersection so large graphs stay cheap.
pub fn triangle_count(a: &AdjacencyMatrix) -> u64 {
    let rows = neighborhood_rows(a);
    let n = a.n();
    let mut triple_count = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if a.has_edge(i, j) {
                triple_count += rows[i]
                    .iter()
                    .zip(&rows[j])
                    .map(|(x, y)| (x & y).count_ones() as u64)
                    .sum::<u64>();
            }
        }
    }
    // each triangle is counted once per edge with the third vertex common
    triple_count / 3
}

/// Max degree, loops ignored.
pub fn max_degree(a: &AdjacencyMatrix) -> u64 {
    let n = a.n();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && a.has_edge(i, j)).count() as u64)
        .max()
        .unwrap_or(0)
}

/// Scan statistic: the largest, over vertices i, of the double sum of
/// adjacency entries over ordered neighbor pairs j, k of i. Each
/// undirected edge inside a neighborhood contributes twice, exactly as
/// the double sum reads.
pub fn scan_statistic(a: &AdjacencyMatrix) -> u64 {
    let n = a.n();
    let mut best = 0u64;
    for i in 0..n {
        let neighbors: Vec<usize> = (0..n).filter(|&j| j != i && a.has_edge(i, j)).collect();
        let mut total = 0u64;
        for &j in &neighbors {
            for &k in &neighbors {
                if k != j && a.has_edge(j, k) {
                    total += 1;
                }
            }
        }
        best = best.max(total);
    }
    best
}

fn check_subset_guard(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "subset size must satisfy 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    if n > MAX_SUBSET_N || m > MAX_SUBSET_M {
        return Err(Error::SubsetGuard {
            n,
            m,
            max_n: MAX_SUBSET_N,
            max_m: MAX_SUBSET_M,
        });
    }
    Ok(())
}

/// Visits every m-subset of 0..n in lexicographic order.
fn for_each_subset(n: usize, m: usize, mut visit: impl FnMut(&[usize])) {
    if m == 0 || m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        visit(&idx);
        let mut i = m - 1;
        while idx[i] == n - m + i {
            if i == 0 {
                return;
            }
            i -= 1;
        }
        idx[i] += 1;
        for j in (i + 1)..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustive modified scan: the maximum number of edges in any induced
/// m-vertex subgraph. Guarded to small inputs.
pub fn modified_scan(a: &AdjacencyMatrix, m: usize) -> Result<u64> {
    check_subset_guard(a.n(), m)?;
    let mut best = 0u64;
    for_each_subset(a.n(), m, |subset| {
        let mut edges = 0u64;
        for (pos, &i) in subset.iter().enumerate() {
            for &j in &subset[pos + 1..] {
                edges += a.has_edge(i, j) as u64;
            }
        }
        best = best.max(edges);
    });
    Ok(best)
}

/// Exhaustive local eigenvalue statistic: the maximum largest eigenvalue
/// over induced m-vertex subgraphs. Guarded to small inputs.
pub fn local_eigenvalue_statistic(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
    check_subset_guard(a.n(), m)?;
    let mut best = f64::NEG_INFINITY;
    for_each_subset(a.n(), m, |subset| {
        let sub = DMatrix::from_fn(m, m, |r, c| {
            let (i, j) = (subset[r], subset[c]);
            if i != j && a.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        });
        let top = sub
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        best = best.max(top);
    });
    Ok(best)
}

/// Count statistics with a standard normal null limit after differencing
/// and normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountStatistic {
    Edges,
    Triangles,
}

impl CountStatistic {
    fn name(&self) -> &'static str {
        match self {
            CountStatistic::Edges => "edge_count",
            CountStatistic::Triangles => "triangle_count",
        }
    }

    fn evaluate(&self, a: &AdjacencyMatrix) -> f64 {
        match self {
            CountStatistic::Edges => edge_count(a) as f64,
            CountStatistic::Triangles => triangle_count(a) as f64,
        }
    }

    /// The null normalizer: n sqrt(p(1-p)) for edges,
    /// n^2 p^2 sqrt(p (p + eps)) for triangles.
    fn normalizer(&self, n: usize, p: f64, signal_eps: f64) -> f64 {
        let nf = n as f64;
        match self {
            CountStatistic::Edges => nf * (p * (1.0 - p)).sqrt(),
            CountStatistic::Triangles => nf * nf * p * p * (p * (p + signal_eps)).sqrt(),
        }
    }
}

/// A differenced, normalized count statistic with its null reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticReport {
    pub statistic: &'static str,
    pub value_before: f64,
    pub value_after: f64,
    pub normalized_difference: f64,
    /// The normalized difference converges to a standard normal under the
    /// null hypothesis.
    pub null_mean: f64,
    pub null_variance: f64,
}

/// Difference of the count statistic across a graph pair, divided by its
/// null normalizer.
pub fn normalized_statistic(
    statistic: CountStatistic,
    previous: &AdjacencyMatrix,
    current: &AdjacencyMatrix,
    p: f64,
    signal_eps: f64,
) -> Result<StatisticReport> {
    if previous.n() != current.n() {
        return Err(Error::InvalidParameter(format!(
            "graph sizes differ: {} vs {}",
            previous.n(),
            current.n()
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "normalization requires 0 < p < 1, got {p}"
        )));
    }
    if !(signal_eps >= 0.0 && p + signal_eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "chatter probability p + eps must lie in (0, 1], got {}",
            p + signal_eps
        )));
    }
    let value_before = statistic.evaluate(previous);
    let value_after = statistic.evaluate(current);
    let normalizer = statistic.normalizer(previous.n(), p, signal_eps);
    Ok(StatisticReport {
        statistic: statistic.name(),
        value_before,
        value_after,
        normalized_difference: (value_after - value_before) / normalizer,
        null_mean: 0.0,
        null_variance: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftStatistic {
    Edges,
    Triangles,
    LargestEigenvalue,
}

/// Expected change of the detection statistic under the alternative:
/// normalized for the count statistics, raw for the largest eigenvalue
/// (whose displacement is m^2 p eps / (np - m eps) up to a bounded error
/// when the community is small relative to the graph).
pub fn expected_shift(statistic: ShiftStatistic, spec: &ChangePointSpec) -> f64 {
    let (n, m) = (spec.n as f64, spec.m as f64);
    let p = spec.p;
    let eps = spec.signal_eps;
    let pe = p + eps;
    match statistic {
        ShiftStatistic::Edges => {
            // m(m-1)/2 extra expected edges, over the null normalizer
            let extra = m * (m - 1.0) / 2.0 * eps;
            extra / CountStatistic::Edges.normalizer(spec.n, p, eps)
        }
        ShiftStatistic::Triangles => {
            // expected triangle surplus, leading order in the block sizes:
            // m^3 (pe^3 - p^3)/6 from all-chatter triples plus
            // m^2 (n - m)/2 * p^2 (pe - p) from pairs inside the community
            let mu = m.powi(3) * (pe.powi(3) - p.powi(3)) / 6.0
                + m * m * (n - m) / 2.0 * p * p * (pe - p);
            mu / CountStatistic::Triangles.normalizer(spec.n, p, eps)
        }
        ShiftStatistic::LargestEigenvalue => m * m * p * eps / (n * p - m * eps),
    }
}

/// Detectability index: the Bernoulli relative entropy of the chatter
/// level against the base level, scaled by community size against
/// 2 log(n/m). Below one in the limit, no test is consistent.
pub fn detectability_index(spec: &ChangePointSpec) -> Result<f64> {
    if spec.m >= spec.n {
        return Err(Error::InvalidParameter(
            "detectability index requires 0 < m < n".into(),
        ));
    }
    let pe = spec.chatter_probability();
    if spec.p == 0.0 || pe == 1.0 {
        return Err(Error::InvalidParameter(
            "detectability index diverges at p = 0 or p + eps = 1".into(),
        ));
    }
    if spec.signal_eps == 0.0 {
        return Ok(0.0);
    }
    let p = spec.p;
    let kl = pe * (pe / p).ln() + (1.0 - pe) * ((1.0 - pe) / (1.0 - p)).ln();
    Ok(spec.m as f64 * kl / (2.0 * (spec.n as f64 / spec.m as f64).ln()))
}

/// Statistics available to the power harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerStatistic {
    Edges,
    Triangles,
    MaxDegree,
    Scan,
    ModifiedScan,
    LocalEigenvalue,
}

impl PowerStatistic {
    /// The comparison value for a graph pair: normalized difference for
    /// the count statistics, raw difference for the locality statistics,
    /// absolute difference for the subset eigenvalue statistic.
    fn evaluate(
        &self,
        previous: &AdjacencyMatrix,
        current: &AdjacencyMatrix,
        spec: &ChangePointSpec,
    ) -> Result<f64> {
        Ok(match self {
            PowerStatistic::Edges => {
                normalized_statistic(CountStatistic::Edges, previous, current, spec.p, spec.signal_eps)?
                    .normalized_difference
            }
            PowerStatistic::Triangles => {
                normalized_statistic(
                    CountStatistic::Triangles,
                    previous,
                    current,
                    spec.p,
                    spec.signal_eps,
                )?
                .normalized_difference
            }
            PowerStatistic::MaxDegree => {
                max_degree(current) as f64 - max_degree(previous) as f64
            }
            PowerStatistic::Scan => {
                scan_statistic(current) as f64 - scan_statistic(previous) as f64
            }
            PowerStatistic::ModifiedScan => {
                modified_scan(current, spec.m)? as f64 - modified_scan(previous, spec.m)? as f64
            }
            PowerStatistic::LocalEigenvalue => (local_eigenvalue_statistic(current, spec.m)?
                - local_eigenvalue_statistic(previous, spec.m)?)
            .abs(),
        })
    }
}

/// How the rejection threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum ThresholdRule {
    /// Upper standard normal quantile at the given level; calibrated for
    /// the normalized count statistics.
    GaussianQuantile { level: f64 },
    /// Empirical upper quantile of the statistic over dedicated null
    /// calibration replicates.
    EmpiricalNullQuantile {
        level: f64,
        calibration_replicates: usize,
    },
    /// Fixed threshold coefficient * sqrt(m log n), the scale at which the
    /// subset eigenvalue statistic separates under the alternative.
    SqrtMLogN { coefficient: f64 },
}

/// Replicate streams: even indices drive null pairs, odd indices drive
/// alternative pairs; calibration replicates live far above both.
const CALIBRATION_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub statistic: PowerStatistic,
    pub replicates: usize,
    pub seed: u64,
    pub threshold: f64,
    pub null_rejection_rate: f64,
    pub alt_rejection_rate: f64,
    pub null_stderr: f64,
    pub alt_stderr: f64,
}

impl PowerReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("power report serialization")
    }
}

/// Monte Carlo rejection rates of the two-sample change test. Each
/// replicate draws an independent null pair and an independent
/// alternative pair; the test rejects when the statistic exceeds the
/// threshold.
pub fn changepoint_power(
    spec: &ChangePointSpec,
    statistic: PowerStatistic,
    rule: ThresholdRule,
    replicates: usize,
    seeds: SeedFamily,
) -> Result<PowerReport> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let null_p = spec.null_probability_matrix();
    let chatter_p = spec.chatter_probability_matrix();

    let null_pair_value = |stream: u64| -> Result<f64> {
        let mut rng = seeds.stream(stream);
        let a = sample_adjacency(&null_p, &mut rng);
        let b = sample_adjacency(&null_p, &mut rng);
        statistic.evaluate(&a, &b, spec)
    };

    let threshold = match rule {
        ThresholdRule::GaussianQuantile { level } => {
            if !(0.0 < level && level < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "level must lie in (0, 1), got {level}"
                )));
            }
            normal_quantile(1.0 - level)
        }
        ThresholdRule::EmpiricalNullQuantile {
            level,
            calibration_replicates,
        } => {
            if !(0.0 < level && level < 1.0) || calibration_replicates == 0 {
                return Err(Error::InvalidParameter(
                    "empirical quantile needs a level in (0, 1) and calibration replicates".into(),
                ));
            }
            let mut values = (0..calibration_replicates as u64)
                .into_par_iter()
                .map(|r| null_pair_value(CALIBRATION_STREAM_OFFSET + r))
                .collect::<Result<Vec<f64>>>()?;
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
            let rank = ((1.0 - level) * calibration_replicates as f64).ceil() as usize;
            values[rank.min(calibration_replicates - 1)]
        }
        ThresholdRule::SqrtMLogN { coefficient } => {
            coefficient * (spec.m as f64 * (spec.n as f64).ln()).sqrt()
        }
    };

    let outcomes = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(bool, bool)> {
            let null_value = null_pair_value(2 * r)?;
            let mut rng = seeds.stream(2 * r + 1);
            let a = sample_adjacency(&null_p, &mut rng);
            let b = sample_adjacency(&chatter_p, &mut rng);
            let alt_value = statistic.evaluate(&a, &b, spec)?;
            Ok((null_value > threshold, alt_value > threshold))
        })
        .collect::<Result<Vec<_>>>()?;

    let r = replicates as f64;
    let null_rejections = outcomes.iter().filter(|o| o.0).count() as f64;
    let alt_rejections = outcomes.iter().filter(|o| o.1).count() as f64;
    let null_rate = null_rejections / r;
    let alt_rate = alt_rejections / r;
    Ok(PowerReport {
        statistic,
        replicates,
        seed: seeds.master(),
        threshold,
        null_rejection_rate: null_rate,
        alt_rejection_rate: alt_rate,
        null_stderr: (null_rate * (1.0 - null_rate) / r).sqrt(),
        alt_stderr: (alt_rate * (1.0 - alt_rate) / r).sqrt(),
    })
}

/// Inverse standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9 on (0, 1)).
pub fn normal_quantile(prob: f64) -> f64 {
    assert!(prob > 0.0 && prob < 1.0, "quantile needs prob in (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if prob < P_LOW {
        let q = (-2.0 * prob.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if prob <= 1.0 - P_LOW {
        let q = prob - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - prob).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedFamily;

    fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> AdjacencyMatrix {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
        AdjacencyMatrix::new(m).unwrap()
    }

    fn complete_graph(n: usize) -> AdjacencyMatrix {
        let mut m = DMatrix::from_element(n, n, 1.0);
        m.fill_diagonal(0.0);
        AdjacencyMatrix::new(m).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> AdjacencyMatrix {
        let epm = EdgeProbabilityMatrix::erdos_renyi(n, p).unwrap().hollow();
        sample_adjacency(&epm, &mut SeedFamily::new(seed).stream(0))
    }

    fn brute_triangles(a: &AdjacencyMatrix) -> u64 {
        let n = a.n();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    if a.has_edge(i, j) && a.has_edge(j, k) && a.has_edge(i, k) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn counts_on_complete_and_empty_graphs() {
        let k4 = complete_graph(4);
        assert_eq!(edge_count(&k4), 6);
        assert_eq!(triangle_count(&k4), 4);

        let empty = graph_from_edges(5, &[]);
        assert_eq!(edge_count(&empty), 0);
        assert_eq!(triangle_count(&empty), 0);
    }

    #[test]
    fn triangle_count_matches_trace_and_enumeration() {
        for seed in 0..10 {
            let a = random_graph(12, 0.4, seed);
            let fast = triangle_count(&a);
            assert_eq!(fast, brute_triangles(&a), "seed {seed}");
            // trace route: hollow cube over 6
            let h = a.entries().clone();
            let cube = &h * &h * &h;
            assert_eq!(fast, (cube.trace() / 6.0).round() as u64, "seed {seed}");
        }
    }

    #[test]
    fn degree_and_scan_on_named_graphs() {
        // star with five leaves: max degree 5, no edges in any neighborhood
        let star = graph_from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        assert_eq!(max_degree(&star), 5);
        assert_eq!(scan_statistic(&star), 0);

        // triangle: each vertex sees one edge among its two neighbors,
        // counted in both orders
        let tri = graph_from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(max_degree(&tri), 2);
        assert_eq!(scan_statistic(&tri), 2);
    }

    #[test]
    fn scan_matches_literal_double_sum() {
        for seed in 0..10 {
            let a = random_graph(12, 0.4, 100 + seed);
            let n = a.n();
            let mut expected = 0u64;
            for i in 0..n {
                let mut local = 0u64;
                for j in 0..n {
                    for k in 0..n {
                        if j != i
                            && k != i
                            && j != k
                            && a.has_edge(i, j)
                            && a.has_edge(i, k)
                            && a.has_edge(j, k)
                        {
                            local += 1;
                        }
                    }
                }
                expected = expected.max(local);
            }
            assert_eq!(scan_statistic(&a), expected, "seed {seed}");
        }
    }

    #[test]
    fn modified_scan_special_cases() {
        let a = random_graph(10, 0.3, 7);
        // m = 2: indicator that any edge exists
        let any_edge = (edge_count(&a) > 0) as u64;
        assert_eq!(modified_scan(&a, 2).unwrap(), any_edge);
        // m = n: the full edge count
        assert!(modified_scan(&a, 8).is_ok());
        let b = random_graph(8, 0.5, 8);
        assert_eq!(modified_scan(&b, 8).unwrap(), edge_count(&b));

        // planted 4-clique in an otherwise empty graph
        let planted = graph_from_edges(10, &[(2, 4), (2, 6), (2, 8), (4, 6), (4, 8), (6, 8)]);
        assert_eq!(modified_scan(&planted, 4).unwrap(), 6);
    }

    #[test]
    fn subset_guards_are_enforced() {
        let a = random_graph(25, 0.2, 9);
        assert!(matches!(
            modified_scan(&a, 3),
            Err(Error::SubsetGuard { .. })
        ));
        let b = random_graph(20, 0.2, 9);
        assert!(matches!(
            local_eigenvalue_statistic(&b, 9),
            Err(Error::SubsetGuard { .. })
        ));
        assert!(modified_scan(&b, 0).is_err());
    }

    #[test]
    fn local_eigenvalue_on_planted_clique() {
        let planted = graph_from_edges(10, &[(1, 3), (1, 5), (1, 7), (3, 5), (3, 7), (5, 7)]);
        let value = local_eigenvalue_statistic(&planted, 4).unwrap();
        assert!((value - 3.0).abs() < 1e-10, "largest eigenvalue of a 4-clique is 3");

        let empty = graph_from_edges(6, &[]);
        assert_eq!(local_eigenvalue_statistic(&empty, 3).unwrap(), 0.0);
    }

    #[test]
    fn local_eigenvalue_matches_subset_enumeration() {
        // recursive test-side enumeration, independent of the iterator
        fn recurse(
            a: &AdjacencyMatrix,
            start: usize,
            chosen: &mut Vec<usize>,
            m: usize,
            best: &mut f64,
        ) {
            if chosen.len() == m {
                let sub = DMatrix::from_fn(m, m, |r, c| {
                    let (i, j) = (chosen[r], chosen[c]);
                    if i != j && a.has_edge(i, j) {
                        1.0
                    } else {
                        0.0
                    }
                });
                let top = sub
                    .symmetric_eigenvalues()
                    .iter()
                    .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
                *best = best.max(top);
                return;
            }
            for i in start..a.n() {
                chosen.push(i);
                recurse(a, i + 1, chosen, m, best);
                chosen.pop();
            }
        }
        for seed in 0..5 {
            let a = random_graph(10, 0.4, 200 + seed);
            let mut best = f64::NEG_INFINITY;
            recurse(&a, 0, &mut Vec::new(), 3, &mut best);
            let got = local_eigenvalue_statistic(&a, 3).unwrap();
            assert!((got - best).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn normalized_statistic_basics() {
        let a = random_graph(30, 0.3, 11);
        let report = normalized_statistic(CountStatistic::Edges, &a, &a, 0.3, 0.0).unwrap();
        assert_eq!(report.normalized_difference, 0.0);
        assert_eq!(report.value_before, report.value_after);
        assert_eq!(report.null_mean, 0.0);
        assert_eq!(report.null_variance, 1.0);

        assert!(normalized_statistic(CountStatistic::Edges, &a, &a, 0.0, 0.0).is_err());
        assert!(normalized_statistic(CountStatistic::Edges, &a, &a, 1.0, 0.0).is_err());
        let b = random_graph(20, 0.3, 12);
        assert!(normalized_statistic(CountStatistic::Edges, &a, &b, 0.3, 0.0).is_err());
    }

    #[test]
    fn expected_shifts_vanish_without_signal() {
        let spec = ChangePointSpec::new(500, 50, 0.2, 0.0, 2, 2).unwrap();
        assert_eq!(expected_shift(ShiftStatistic::Edges, &spec), 0.0);
        assert_eq!(expected_shift(ShiftStatistic::Triangles, &spec), 0.0);
        assert_eq!(expected_shift(ShiftStatistic::LargestEigenvalue, &spec), 0.0);
    }

    #[test]
    fn triangle_surplus_in_the_all_chatter_case() {
        // m = n: the surplus is n^3 (pe^3 - p^3) / 6 over the normalizer
        let spec = ChangePointSpec::new(100, 100, 0.2, 0.1, 2, 2).unwrap();
        let n = 100.0f64;
        let expected = n.powi(3) * (0.3f64.powi(3) - 0.2f64.powi(3)) / 6.0
            / (n * n * 0.04 * (0.2f64 * 0.3).sqrt());
        let got = expected_shift(ShiftStatistic::Triangles, &spec);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn triangle_surplus_matches_exact_clique_expectations() {
        // Independent oracle: exact expected triangle counts by triple type.
        let spec = ChangePointSpec::new(400, 40, 0.2, 0.2, 2, 2).unwrap();
        let (n, m) = (spec.n as f64, spec.m as f64);
        let (p, pe) = (spec.p, spec.chatter_probability());
        let choose2 = |x: f64| x * (x - 1.0) / 2.0;
        let choose3 = |x: f64| x * (x - 1.0) * (x - 2.0) / 6.0;
        let exact_alt = choose3(m) * pe.powi(3)
            + choose2(m) * (n - m) * pe * p * p
            + (m * choose2(n - m) + choose3(n - m)) * p.powi(3);
        let exact_null = choose3(n) * p.powi(3);
        let exact = (exact_alt - exact_null)
            / CountStatistic::Triangles.normalizer(spec.n, spec.p, spec.signal_eps);
        let asymptotic = expected_shift(ShiftStatistic::Triangles, &spec);
        // the asymptotic form drops lower-order terms in the block sizes
        assert!(
            (asymptotic - exact).abs() / exact.abs() < 0.05,
            "asymptotic {asymptotic} vs exact {exact}"
        );
    }

    #[test]
    fn eigenvalue_shift_against_quadratic_root() {
        // The two signal eigenvalues of the chatter expectation solve
        // x^2 - (np + m eps) x + m(n-m) p eps = 0.
        let spec = ChangePointSpec::new(200, 20, 0.1, 0.05, 2, 2).unwrap();
        let (n, m) = (spec.n as f64, spec.m as f64);
        let (p, eps) = (spec.p, spec.signal_eps);
        let trace = n * p + m * eps;
        let det = m * (n - m) * p * eps;
        let root = (trace + (trace * trace - 4.0 * det).sqrt()) / 2.0;
        let shift = root - n * p;
        let formula = expected_shift(ShiftStatistic::LargestEigenvalue, &spec);
        assert!(
            (shift - formula).abs() < 1.0,
            "root shift {shift} vs formula {formula}"
        );
    }

    #[test]
    fn detectability_index_properties() {
        let base = ChangePointSpec::new(1000, 50, 0.1, 0.1, 2, 2).unwrap();
        let value = detectability_index(&base).unwrap();
        // independent relative-entropy oracle
        let kl = |a: f64, b: f64| a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
        let expected = 50.0 * kl(0.2, 0.1) / (2.0 * 20.0f64.ln());
        assert!((value - expected).abs() < 1e-12);

        let zero = ChangePointSpec::new(1000, 50, 0.1, 0.0, 2, 2).unwrap();
        assert_eq!(detectability_index(&zero).unwrap(), 0.0);

        // increasing in the signal and in the community size
        let mut previous = 0.0;
        for eps in [0.02, 0.05, 0.1, 0.2] {
            let spec = ChangePointSpec::new(1000, 50, 0.1, eps, 2, 2).unwrap();
            let v = detectability_index(&spec).unwrap();
            assert!(v > previous);
            previous = v;
        }
        let mut previous = 0.0;
        for m in [20, 50, 100, 200] {
            let spec = ChangePointSpec::new(1000, m, 0.1, 0.1, 2, 2).unwrap();
            let v = detectability_index(&spec).unwrap();
            assert!(v > previous);
            previous = v;
        }

        // divergent configurations are rejected
        let saturated = ChangePointSpec::new(1000, 50, 0.5, 0.5, 2, 2).unwrap();
        assert!(detectability_index(&saturated).is_err());
        let all = ChangePointSpec::new(1000, 1000, 0.1, 0.1, 2, 2).unwrap();
        assert!(detectability_index(&all).is_err());
    }

    #[test]
    fn sequence_changes_at_the_marked_index() {
        let spec = ChangePointSpec::new(60, 20, 0.1, 0.6, 3, 4).unwrap();
        let mut rng = SeedFamily::new(13).stream(0);
        let seq = sample_sequence(&spec, &mut rng);
        assert_eq!(seq.graphs().len(), 4);
        assert_eq!(seq.change_index(), 3);
        let (before, after) = seq.straddling_pair().unwrap();
        // the chatter block at p + 0.6 is dramatically denser
        let count_block = |a: &AdjacencyMatrix| {
            let mut c = 0u64;
            for i in 0..20 {
                for j in (i + 1)..20 {
                    c += a.has_edge(i, j) as u64;
                }
            }
            c
        };
        assert!(count_block(after) > count_block(before) + 40);
    }

    #[test]
    fn normal_quantile_reference_values() {
        assert!((normal_quantile(0.5)).abs() < 1e-9);
        assert!((normal_quantile(0.95) - 1.6448536269514722).abs() < 1e-8);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-8);
        assert!((normal_quantile(0.01) + normal_quantile(0.99)).abs() < 1e-9);
    }

    #[test]
    fn power_at_zero_signal_matches_the_level() {
        let spec = ChangePointSpec::new(120, 20, 0.2, 0.0, 2, 2).unwrap();
        let report = changepoint_power(
            &spec,
            PowerStatistic::Edges,
            ThresholdRule::GaussianQuantile { level: 0.05 },
            400,
            SeedFamily::new(17),
        )
        .unwrap();
        assert!(
            report.null_rejection_rate > 0.01 && report.null_rejection_rate < 0.12,
            "null rate {}",
            report.null_rejection_rate
        );
        assert!(
            report.alt_rejection_rate > 0.01 && report.alt_rejection_rate < 0.12,
            "alt rate {}",
            report.alt_rejection_rate
        );
    }

    #[test]
    fn power_report_is_deterministic() {
        let spec = ChangePointSpec::new(80, 16, 0.2, 0.2, 2, 2).unwrap();
        let run = || {
            changepoint_power(
                &spec,
                PowerStatistic::Edges,
                ThresholdRule::GaussianQuantile { level: 0.05 },
                60,
                SeedFamily::new(23),
            )
            .unwrap()
            .to_json()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empirical_quantile_rule_runs() {
        let spec = ChangePointSpec::new(60, 12, 0.2, 0.4, 2, 2).unwrap();
        let report = changepoint_power(
            &spec,
            PowerStatistic::Scan,
            ThresholdRule::EmpiricalNullQuantile {
                level: 0.05,
                calibration_replicates: 200,
            },
            200,
            SeedFamily::new(29),
        )
        .unwrap();
        assert!(report.null_rejection_rate < 0.15);
        assert!(report.alt_rejection_rate > report.null_rejection_rate);
    }
}
