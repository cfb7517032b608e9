//! Random-graph and random-matrix model families: independent-edge graphs
//! with a prescribed edge-probability matrix, block models, dot-product
//! models, and the additive spike model with Gaussian noise.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{standard_normal, Stream};
use crate::spectral::check_symmetric;
use rand::RngExt;

/// Symmetric matrix of Bernoulli edge probabilities.
///
/// With `allow_loops` the diagonal is retained and the matrix equals the
/// expectation of a sampled adjacency matrix entrywise. With loops
/// disallowed the diagonal must be zero and sampling never draws it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbabilityMatrix {
    entries: DMatrix<f64>,
    allow_loops: bool,
}

impl EdgeProbabilityMatrix {
    pub fn new(entries: DMatrix<f64>, allow_loops: bool) -> Result<Self> {
        check_symmetric(&entries, 0.0)?;
        let n = entries.nrows();
        for i in 0..n {
            for j in i..n {
                let value = entries[(i, j)];
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::ProbabilityOutOfRange { i, j, value });
                }
            }
            if !allow_loops && entries[(i, i)] != 0.0 {
                return Err(Error::NonzeroDiagonal {
                    i,
                    value: entries[(i, i)],
                });
            }
        }
        Ok(Self { entries, allow_loops })
    }

    pub fn erdos_renyi(n: usize, p: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(n, n, p), true)
    }

    /// Zeroes the diagonal, producing the hollow variant of this matrix.
    /// The expectation of a sampled adjacency matrix then differs from the
    /// original on the diagonal only.
    pub fn hollow(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.fill_diagonal(0.0);
        Self {
            entries,
            allow_loops: false,
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn allow_loops(&self) -> bool {
        self.allow_loops
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Maximum expected degree: the largest row sum (diagonal included).
    pub fn max_expected_degree(&self) -> f64 {
        (0..self.n())
            .map(|i| self.entries.row(i).sum())
            .fold(0.0, f64::max)
    }
}

/// Binary symmetric adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: DMatrix<f64>,
}

impl AdjacencyMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&entries, 0.0)?;
        let n = entries.nrows();
        for i in 0..n {
            for j in i..n {
                let value = entries[(i, j)];
                if value != 0.0 && value != 1.0 {
                    return Err(Error::NotBinary { i, j, value });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.entries[(i, j)] == 1.0
    }
}

/// A stochastic block model: a K x K block edge-probability matrix together
/// with the block sizes. Vertices are assigned to blocks contiguously in
/// index order; the spectrum is invariant under vertex relabeling.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    block_probabilities: DMatrix<f64>,
    block_sizes: Vec<usize>,
}

impl BlockModel {
    pub fn new(block_probabilities: DMatrix<f64>, block_sizes: Vec<usize>) -> Result<Self> {
        check_symmetric(&block_probabilities, 0.0)?;
        let k = block_probabilities.nrows();
        if block_sizes.len() != k {
            return Err(Error::InvalidBlockModel(format!(
                "{} blocks but {} block sizes",
                k,
                block_sizes.len()
            )));
        }
        if block_sizes.contains(&0) {
            return Err(Error::InvalidBlockModel("empty block".into()));
        }
        for i in 0..k {
            for j in i..k {
                let value = block_probabilities[(i, j)];
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::ProbabilityOutOfRange { i, j, value });
                }
            }
        }
        Ok(Self {
            block_probabilities,
            block_sizes,
        })
    }

    pub fn block_probabilities(&self) -> &DMatrix<f64> {
        &self.block_probabilities
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn block_of(&self, vertex: usize) -> usize {
        let mut offset = 0;
        for (k, &size) in self.block_sizes.iter().enumerate() {
            offset += size;
            if vertex < offset {
                return k;
            }
        }
        panic!("vertex {vertex} out of range for n = {}", self.n());
    }

    /// The nonzero ("signal") eigenvalues of the full edge-probability
    /// matrix, ascending, computed from the size-weighted K x K reduction
    /// D^{1/2} B D^{1/2} with D = diag(block sizes).
    pub fn signal_eigenvalues(&self) -> Vec<f64> {
        self.reduced_eigenpairs().0
    }

    /// Signal eigenvalues together with orthonormal eigenvectors of the
    /// full n x n edge-probability matrix. Each eigenvector is constant on
    /// blocks, so it is reconstructed exactly from the K x K reduction.
    pub fn signal_eigenpairs(&self) -> (Vec<f64>, Vec<DVector<f64>>) {
        let (values, reduced_vectors) = self.reduced_eigenpairs();
        let n = self.n();
        let k = self.block_sizes.len();
        let mut vectors = Vec::with_capacity(k);
        for col in 0..k {
            let mut w = DVector::zeros(n);
            let mut offset = 0;
            for (block, &size) in self.block_sizes.iter().enumerate() {
                let component = reduced_vectors[(block, col)] / (size as f64).sqrt();
                for idx in offset..offset + size {
                    w[idx] = component;
                }
                offset += size;
            }
            vectors.push(w);
        }
        (values, vectors)
    }

    fn reduced_eigenpairs(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.block_sizes.len();
        let scale = DVector::from_iterator(k, self.block_sizes.iter().map(|&s| (s as f64).sqrt()));
        let reduced = DMatrix::from_fn(k, k, |i, j| {
            scale[i] * self.block_probabilities[(i, j)] * scale[j]
        });
        let decomp = nalgebra::SymmetricEigen::new(reduced);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            decomp.eigenvalues[a]
                .partial_cmp(&decomp.eigenvalues[b])
                .expect("non-finite eigenvalue")
        });
        let values: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(k, k);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &decomp.eigenvectors.column(i));
        }
        (values, vectors)
    }
}

/// A full-rank square signal matrix with three repeated singular-value
/// levels 1, kappa + 1 and tau + kappa + 1, observed under i.i.d. standard
/// normal additive noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeModelSpec {
    /// Multiplicity of the lowest level (value 1).
    pub low: usize,
    /// Multiplicity of the middle level (value kappa + 1).
    pub mid: usize,
    /// Multiplicity of the highest level (value tau + kappa + 1).
    pub high: usize,
    pub kappa: f64,
    pub tau: f64,
}

impl SpikeModelSpec {
    pub fn new(low: usize, mid: usize, high: usize, kappa: f64, tau: f64) -> Result<Self> {
        if low == 0 || mid == 0 || high == 0 {
            return Err(Error::InvalidParameter(
                "spike model multiplicities must be at least 1".into(),
            ));
        }
        if !(kappa.is_finite() && kappa > 0.0 && tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spike model level gaps must be positive, got kappa = {kappa}, tau = {tau}"
            )));
        }
        Ok(Self {
            low,
            mid,
            high,
            kappa,
            tau,
        })
    }

    /// Matrix dimension: the sum of the three multiplicities.
    pub fn dim(&self) -> usize {
        self.low + self.mid + self.high
    }

    /// The three distinct singular-value levels, ascending.
    pub fn levels(&self) -> [f64; 3] {
        [1.0, self.kappa + 1.0, self.tau + self.kappa + 1.0]
    }

    /// All singular values with multiplicity, ascending.
    pub fn singular_values(&self) -> Vec<f64> {
        let [lo, mid, hi] = self.levels();
        let mut out = Vec::with_capacity(self.dim());
        out.extend(std::iter::repeat_n(lo, self.low));
        out.extend(std::iter::repeat_n(mid, self.mid));
        out.extend(std::iter::repeat_n(hi, self.high));
        out
    }
}

/// Edge-probability matrix of a block model, with loops retained so the
/// matrix equals the sampled adjacency expectation exactly.
pub fn sbm_probability_matrix(model: &BlockModel) -> Result<EdgeProbabilityMatrix> {
    let n = model.n();
    let mut blocks = Vec::with_capacity(n);
    for (k, &size) in model.block_sizes().iter().enumerate() {
        blocks.extend(std::iter::repeat_n(k, size));
    }
    let entries = DMatrix::from_fn(n, n, |i, j| model.block_probabilities()[(blocks[i], blocks[j])]);
    EdgeProbabilityMatrix::new(entries, true)
}

/// Edge-probability matrix X X^T of a dot-product model with latent
/// position rows X. Any inner product outside [0, 1] is rejected outright;
/// silent clipping would change the sampled law.
pub fn rdpg_probability_matrix(latent: &DMatrix<f64>) -> Result<EdgeProbabilityMatrix> {
    let gram = latent * latent.transpose();
    let n = gram.nrows();
    for i in 0..n {
        for j in i..n {
            let value = gram[(i, j)];
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { i, j, value });
            }
        }
    }
    EdgeProbabilityMatrix::new(gram, true)
}

/// Samples an adjacency matrix: the upper triangle (diagonal included iff
/// loops are allowed) is drawn independently in fixed row-major order and
/// mirrored, so the output is a deterministic function of the stream state.
pub fn sample_adjacency(p: &EdgeProbabilityMatrix, rng: &mut Stream) -> AdjacencyMatrix {
    let n = p.n();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let start = if p.allow_loops() { i } else { i + 1 };
        for j in start..n {
            if rng.random::<f64>() < p.entries()[(i, j)] {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    AdjacencyMatrix { entries: a }
}

/// Builds the spike model pair (M, E): M is the diagonal matrix carrying
/// the prescribed singular values (the bounds are invariant to the choice
/// of singular vectors, and a diagonal M keeps the level windows explicit),
/// E has i.i.d. standard normal entries.
pub fn spike_model_matrices(spec: &SpikeModelSpec, rng: &mut Stream) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = spec.dim();
    let mut m = DMatrix::zeros(q, q);
    for (i, sigma) in spec.singular_values().into_iter().enumerate() {
        m[(i, i)] = sigma;
    }
    let e = DMatrix::from_fn(q, q, |_, _| standard_normal(rng));
    (m, e)
}

/// Plain JSON description of a model, the exchange format used by the CLI
/// and the C API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Sbm {
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        block_sizes: Vec<usize>,
    },
    Er {
        n: usize,
        p: f64,
    },
    Rdpg {
        #[serde(rename = "X")]
        x: Vec<Vec<f64>>,
    },
    Spike {
        m: usize,
        n: usize,
        p: usize,
        kappa: f64,
        tau: f64,
    },
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serialization")
    }

    /// Vertex count for graph models, matrix dimension for the spike model.
    pub fn dimension(&self) -> usize {
        match self {
            ModelSpec::Sbm { block_sizes, .. } => block_sizes.iter().sum(),
            ModelSpec::Er { n, .. } => *n,
            ModelSpec::Rdpg { x } => x.len(),
            ModelSpec::Spike { m, n, p, .. } => m + n + p,
        }
    }

    pub fn as_block_model(&self) -> Result<BlockModel> {
        match self {
            ModelSpec::Sbm { b, block_sizes } => {
                BlockModel::new(rows_to_matrix(b)?, block_sizes.clone())
            }
            ModelSpec::Er { n, p } => {
                BlockModel::new(DMatrix::from_element(1, 1, *p), vec![*n])
            }
            _ => Err(Error::InvalidParameter(
                "model is not a block model".into(),
            )),
        }
    }

    pub fn as_spike_spec(&self) -> Result<SpikeModelSpec> {
        match self {
            ModelSpec::Spike { m, n, p, kappa, tau } => SpikeModelSpec::new(*m, *n, *p, *kappa, *tau),
            _ => Err(Error::InvalidParameter("model is not a spike model".into())),
        }
    }

    /// Builds the full edge-probability matrix for graph models; the spike
    /// model has no edge probabilities and is rejected.
    pub fn build_probability_matrix(&self) -> Result<EdgeProbabilityMatrix> {
        match self {
            ModelSpec::Sbm { .. } | ModelSpec::Er { .. } => {
                sbm_probability_matrix(&self.as_block_model()?)
            }
            ModelSpec::Rdpg { x } => rdpg_probability_matrix(&rows_to_matrix(x)?),
            ModelSpec::Spike { .. } => Err(Error::InvalidParameter(
                "the spike model is a signal-plus-noise matrix model, not an edge-probability model"
                    .into(),
            )),
        }
    }
}
