use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

/// Eigenvalues in descending order (clipped to `[0, 1]`) and the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    /// `Σ_j p_j |j⟩⟨j|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (j, &p) in self.values.iter().enumerate() {
            let v = self.vectors.column(j);
            out += (v * v.adjoint()) * C64::new(p, 0.0);
        }
        out
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(crate::cabs).fold(0.0, f64::max)
}

/// Hermitian eigendecomposition, eigenvalues descending, no clipping.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Checks the three density-matrix invariants and names the first one
/// that fails.
pub fn validate(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Validation {
            invariant: "square",
            deviation: (m.nrows() as f64 - m.ncols() as f64).abs(),
        });
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Validation {
            invariant: "finite",
            deviation: f64::NAN,
        });
    }
    let herm = max_abs(&(m - m.adjoint()));
    if herm > HERMITIAN_TOL {
        return Err(Error::Validation {
            invariant: "Hermitian",
            deviation: herm,
        });
    }
    let tr = (m.trace().re - 1.0).abs();
    if tr > TRACE_TOL {
        return Err(Error::Validation {
            invariant: "unit-trace",
            deviation: tr,
        });
    }
    let (vals, _) = eigh(m);
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::Validation {
            invariant: "positive semidefinite",
            deviation: -min,
        });
    }
    Ok(())
}

/// Validates `m` and returns its spectrum.
pub fn spectral_decompose(m: &CMatrix) -> Result<Spectrum> {
    validate(m)?;
    Ok(spectrum_unchecked(m))
}

pub(crate) fn spectrum_unchecked(m: &CMatrix) -> Spectrum {
    let (values, vectors) = eigh(m);
    Spectrum {
        values: values.into_iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        vectors,
    }
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate(&m)?;
        Ok(DensityMatrix { m })
    }

    /// `diag(p_0, p_1, ...)`.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn spectrum(&self) -> Spectrum {
        spectrum_unchecked(&self.m)
    }

    /// Direct sum `Σ_k w_k ρ_k` on the block-diagonal space. Weights must
    /// sum to 1.
    pub fn direct_sum(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let n: usize = parts.iter().map(|(_, r)| r.dim()).sum();
        let mut m = CMatrix::zeros(n, n);
        let mut off = 0;
        for (w, r) in parts {
            let d = r.dim();
            m.view_mut((off, off), (d, d))
                .copy_from(&(r.matrix() * C64::new(*w, 0.0)));
            off += d;
        }
        Self::new(m)
    }
}

/// `√ρ` with eigenvalues below `1e-14` set to zero.
pub(crate) fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut out = CMatrix::zeros(n, n);
    for (j, &p) in vals.iter().enumerate() {
        if p < 1e-14 {
            continue;
        }
        let v = vecs.column(j);
        out += (v * v.adjoint()) * C64::new(libm::sqrt(p), 0.0);
    }
    out
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}
