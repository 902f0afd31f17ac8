//! Dense complex linear algebra shared by the model, Floquet and cavity
//! modules.
//!
//! Matrices are `Array2<C64>` in row-major order. Eigenvectors are stored as
//! the columns of [`Spectrum::vectors`].

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entry of `|M - M†|`.
pub fn hermitian_defect(m: ArrayView2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Largest entry modulus, or zero for an empty matrix.
pub fn max_abs(m: ArrayView2<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn is_hermitian(m: ArrayView2<C64>, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: ArrayView2<C64>, b: ArrayView2<C64>) -> Array2<C64> {
    ndarray::linalg::kron(&a, &b)
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

/// `⟨u|v⟩`, antilinear in the first argument.
pub fn inner(u: ArrayView1<C64>, v: ArrayView1<C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: ArrayView2<C64>, b: ArrayView2<C64>) -> Array2<C64> {
    a.dot(&b) - b.dot(&a)
}

/// Full eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub values: Array1<f64>,
    /// Orthonormal eigenvectors, one per column, aligned with `values`.
    pub vectors: Array2<C64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, k: usize) -> ArrayView1<'_, C64> {
        self.vectors.column(k)
    }

    /// `max_k ‖M v_k − ε_k v_k‖`.
    pub fn max_residual(&self, m: ArrayView2<C64>) -> f64 {
        let mv = m.dot(&self.vectors);
        let mut worst = 0.0_f64;
        for (k, col) in mv.axis_iter(Axis(1)).enumerate() {
            let eps = self.values[k];
            let r: f64 = col
                .iter()
                .zip(self.vectors.column(k).iter())
                .map(|(a, b)| (a - b * eps).norm_sqr())
                .sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }

    /// Largest entry of `|V†V − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.vectors;
        let g = v.t().mapv(|z| z.conj()).dot(v);
        let mut worst = 0.0_f64;
        for ((i, j), z) in g.indexed_iter() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((z - target).norm());
        }
        worst
    }
}

/// Diagonalizes a dense Hermitian matrix, returning the full spectrum with
/// eigenvalues ascending.
///
/// The input must be Hermitian to `1e-10 · max(1, max|M_ij|)`. Each
/// eigenvector's phase is fixed so that its first entry of non-negligible
/// modulus is real and positive.
pub fn diagonalize_hermitian(m: ArrayView2<C64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "diagonalize_hermitian",
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("matrix contains non-finite entries".into()));
    }
    let scale = max_abs(m).max(1.0);
    let defect = hermitian_defect(m);
    if defect > 1e-10 * scale {
        return Err(Error::Input(format!(
            "matrix is not Hermitian (max |M - M†| = {defect:.3e})"
        )));
    }
    if m.nrows() == 0 {
        return Ok(Spectrum {
            values: Array1::zeros(0),
            vectors: Array2::zeros((0, 0)),
        });
    }
    // column-major copy: LAPACK sees the matrix itself rather than its
    // transpose, which for complex Hermitian input would conjugate the vectors
    let mut fortran = Array2::zeros(m.raw_dim().f());
    fortran.assign(&m);
    let (values, vectors) = fortran
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numeric(format!("Hermitian eigensolver failed: {e}")))?;
    let mut vectors = vectors.as_standard_layout().into_owned();
    for mut col in vectors.axis_iter_mut(Axis(1)) {
        fix_phase(col.view_mut());
    }
    Ok(Spectrum { values, vectors })
}

/// Rotates `v` so that its first entry with modulus above `1e-8 · ‖v‖∞` is
/// real and positive.
pub fn fix_phase(mut v: ndarray::ArrayViewMut1<C64>) {
    let peak = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if peak == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().copied().find(|z| z.norm() > 1e-8 * peak) {
        let phase = pivot.conj() / pivot.norm();
        v.mapv_inplace(|z| z * phase);
    }
}
