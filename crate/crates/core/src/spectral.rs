//! Dense spectral computations: symmetric eigenvalues, singular values,
//! the Hermitian dilation, and window localization of a spectrum.
//!
//! The dilation of an m x n matrix M is the symmetric block matrix
//! [[0, M], [M^T, 0]]; its nonzero eigenvalues are the signed singular
//! values of M, which lets every eigenvalue-interval statement transfer
//! to singular values.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance below which a matrix is accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance for unit-norm checks on vectors.
pub const UNIT_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Eigenvalues,
    SingularValues,
}

/// An ascending list of eigenvalues or singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    kind: SpectrumKind,
}

impl Spectrum {
    pub fn eigenvalues(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("non-finite eigenvalue"));
        Self {
            values,
            kind: SpectrumKind::Eigenvalues,
        }
    }

    pub fn singular_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("non-finite singular value"));
        debug_assert!(values.first().is_none_or(|&v| v >= 0.0));
        Self {
            values,
            kind: SpectrumKind::SingularValues,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Groups equal consecutive values into distinct levels, treating values
    /// within `tol` of each other as one level. Returns ascending level values.
    pub fn levels(&self, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &v in &self.values {
            match out.last() {
                Some(&last) if (v - last).abs() <= tol => {}
                _ => out.push(v),
            }
        }
        out
    }
}

fn check_square(s: &DMatrix<f64>) -> Result<usize> {
    if s.nrows() != s.ncols() {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    Ok(s.nrows())
}

pub(crate) fn check_symmetric(s: &DMatrix<f64>, tol: f64) -> Result<()> {
    let n = check_square(s)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let dev = (s[(i, j)] - s[(j, i)]).abs();
            if dev > tol {
                return Err(Error::NotSymmetric { i, j, deviation: dev });
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(s: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(s, SYMMETRY_TOL)?;
    let ev = s.clone().symmetric_eigenvalues();
    Ok(Spectrum::eigenvalues(ev.iter().copied().collect()))
}

/// Eigenvalues (ascending) together with matching orthonormal eigenvectors
/// as the columns of the returned matrix.
pub fn symmetric_eigenpairs(s: &DMatrix<f64>) -> Result<(Spectrum, DMatrix<f64>)> {
    check_symmetric(s, SYMMETRY_TOL)?;
    let decomp = nalgebra::SymmetricEigen::new(s.clone());
    let n = s.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .expect("non-finite eigenvalue")
    });
    let values: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &decomp.eigenvectors.column(i));
    }
    Ok((Spectrum::eigenvalues(values), vectors))
}

/// Spectral norm of a symmetric matrix (largest eigenvalue magnitude).
pub fn spectral_norm_symmetric(s: &DMatrix<f64>) -> Result<f64> {
    let spectrum = symmetric_eigenvalues(s)?;
    let lo = spectrum.values().first().copied().unwrap_or(0.0);
    let hi = spectrum.values().last().copied().unwrap_or(0.0);
    Ok(lo.abs().max(hi.abs()))
}

/// The symmetric block matrix [[0, M], [M^T, 0]].
pub fn hermitian_dilation(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = DMatrix::zeros(r + c, r + c);
    out.view_mut((0, r), (r, c)).copy_from(m);
    out.view_mut((r, 0), (c, r)).copy_from(&m.transpose());
    out
}

/// Ascending singular values of an arbitrary real matrix.
///
/// Computed by direct factorization; agreement with the positive part of
/// the dilation spectrum is enforced by tests.
pub fn singular_values(m: &DMatrix<f64>) -> Spectrum {
    let sv = m.clone().singular_values();
    Spectrum::singular_values(sv.iter().copied().collect())
}

/// Concatenates a left/right singular-vector pair into the unit vector
/// (u, v) / sqrt(2). If (u, v, sigma) is a singular triple of M, the result
/// is an eigenvector of the dilation of M with eigenvalue sigma.
pub fn dilation_vector(u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    for w in [u, v] {
        let norm = w.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm { norm });
        }
    }
    let scale = 1.0 / 2.0_f64.sqrt();
    let mut out = DVector::zeros(u.len() + v.len());
    out.rows_mut(0, u.len()).copy_from(&(u * scale));
    out.rows_mut(u.len(), v.len()).copy_from(&(v * scale));
    Ok(out)
}

/// An open interval (alpha, beta) on the positive half line; beta may be
/// `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    alpha: f64,
    beta: f64,
}

impl SpectralWindow {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < beta) {
            return Err(Error::InvalidWindow { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn unbounded_above(alpha: f64) -> Result<Self> {
        Self::new(alpha, f64::INFINITY)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_unbounded(&self) -> bool {
        self.beta.is_infinite()
    }

    /// Strict membership; endpoint ties are excluded by construction.
    pub fn contains(&self, x: f64) -> bool {
        x > self.alpha && x < self.beta
    }
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    alpha: f64,
    /// `None` encodes an interval unbounded above.
    beta: Option<f64>,
}

impl Serialize for SpectralWindow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        WindowRepr {
            alpha: self.alpha,
            beta: if self.beta.is_infinite() { None } else { Some(self.beta) },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralWindow {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = WindowRepr::deserialize(deserializer)?;
        SpectralWindow::new(repr.alpha, repr.beta.unwrap_or(f64::INFINITY))
            .map_err(serde::de::Error::custom)
    }
}

/// The part of a spectrum strictly inside a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowContent {
    pub count: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

/// Strictly locates spectrum entries inside the window; a count of zero is
/// valid output.
pub fn locate_in_window(spectrum: &Spectrum, window: &SpectralWindow) -> WindowContent {
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (i, &v) in spectrum.values().iter().enumerate() {
        if window.contains(v) {
            indices.push(i);
            values.push(v);
        }
    }
    WindowContent {
        count: indices.len(),
        indices,
        values,
    }
}
