//! Truncated Sambe-space treatment of periodically driven matter.
//!
//! A Floquet mode `φ(t) = Σ_m c_m e^{imΩt}` is stored as its harmonic
//! coefficient blocks `c_m` for `m ∈ [−N_h, N_h]`. In that basis the Floquet
//! Hamiltonian `H(t) − i∂_t` has block `(m, m′)` equal to
//! `H_{m−m′} + δ_{mm′} mΩ`, where `H_k` is the k-th Fourier block of `H(t)`.
//!
//! Quasienergies are folded into the zone `[−Ω/2, Ω/2)`. A replica of a mode
//! shifted by `n` has coefficients `c′_m = c_{m−n}` and quasienergy `ε + nΩ`.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum, C64};
use crate::model::{DriveSpec, MatterOperator};

/// Largest Sambe-space dimension that will be assembled.
pub const MAX_SAMBE_DIM: usize = 6000;

/// Harmonic window `m ∈ [−N_h, N_h]` over an `N_b`-dimensional matter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SambeSpec {
    harmonic_cutoff: usize,
    matter_dim: usize,
}

impl SambeSpec {
    pub fn new(harmonic_cutoff: usize, matter_dim: usize) -> Result<Self> {
        if matter_dim == 0 {
            return Err(Error::Input("matter dimension must be positive".into()));
        }
        let dim = (2 * harmonic_cutoff + 1) * matter_dim;
        if dim > MAX_SAMBE_DIM {
            return Err(Error::Size {
                what: "Sambe space",
                dim,
                limit: MAX_SAMBE_DIM,
            });
        }
        Ok(Self {
            harmonic_cutoff,
            matter_dim,
        })
    }

    pub fn harmonic_cutoff(&self) -> usize {
        self.harmonic_cutoff
    }

    pub fn matter_dim(&self) -> usize {
        self.matter_dim
    }

    pub fn harmonics(&self) -> usize {
        2 * self.harmonic_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.harmonics() * self.matter_dim
    }

    /// Row of harmonic `m` in the block layout, if inside the window.
    pub fn block_row(&self, m: i64) -> Option<usize> {
        let row = m + self.harmonic_cutoff as i64;
        (0..self.harmonics() as i64).contains(&row).then_some(row as usize)
    }

    pub fn harmonic_of_row(&self, row: usize) -> i64 {
        row as i64 - self.harmonic_cutoff as i64
    }
}

/// Fourier blocks `H_k` of a periodic Hamiltonian `H(t) = Σ_k H_k e^{ikΩt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBlockSet {
    blocks: BTreeMap<i64, Array2<C64>>,
    dim: usize,
}

impl FourierBlockSet {
    /// Validates `H_0 = H_0†` and `H_{−k} = H_k†` to `1e-12` relative.
    pub fn new(blocks: BTreeMap<i64, Array2<C64>>) -> Result<Self> {
        let h0 = blocks
            .get(&0)
            .ok_or_else(|| Error::Input("Fourier block set needs a k = 0 block".into()))?;
        let dim = h0.nrows();
        let scale = blocks
            .values()
            .map(|m| linalg::max_abs(m.view()))
            .fold(1.0_f64, f64::max);
        for (k, m) in &blocks {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Dimension {
                    context: "Fourier block",
                    expected: dim,
                    actual: m.nrows(),
                });
            }
            let partner = blocks.get(&-k).ok_or_else(|| {
                Error::Input(format!("Fourier block {k} has no partner at {}", -k))
            })?;
            let worst = m
                .indexed_iter()
                .map(|((i, j), z)| (z - partner[[j, i]].conj()).norm())
                .fold(0.0_f64, f64::max);
            if worst > 1e-12 * scale {
                return Err(Error::Input(format!(
                    "Fourier blocks violate H_-k = H_k† at k = {k} (defect {worst:.3e})"
                )));
            }
        }
        Ok(Self { blocks, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest `|k|` carrying a block.
    pub fn max_k(&self) -> usize {
        self.blocks.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn get(&self, k: i64) -> Option<ArrayView2<'_, C64>> {
        self.blocks.get(&k).map(|m| m.view())
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.blocks.keys().copied()
    }
}

/// Fourier blocks of `H(t) = H_M − d E(t)`.
///
/// Each component `E_k cos(kΩt + φ_k)` contributes
/// `H_{±k} = −(E_k/2) e^{±iφ_k} d`. Zero-amplitude components are skipped.
pub fn fourier_blocks_of_hamiltonian(
    h_matter: &MatterOperator,
    dipole: &MatterOperator,
    drive: &DriveSpec,
) -> Result<FourierBlockSet> {
    if h_matter.dim() != dipole.dim() {
        return Err(Error::Dimension {
            context: "dipole vs matter Hamiltonian",
            expected: h_matter.dim(),
            actual: dipole.dim(),
        });
    }
    let mut blocks = BTreeMap::new();
    blocks.insert(0, h_matter.matrix().to_owned());
    for c in drive.components() {
        if c.amplitude == 0.0 {
            continue;
        }
        let k = c.harmonic as i64;
        let plus = C64::from_polar(-0.5 * c.amplitude, c.phase);
        let minus = plus.conj();
        blocks.insert(k, dipole.matrix().mapv(|z| z * plus));
        blocks.insert(-k, dipole.matrix().mapv(|z| z * minus));
    }
    FourierBlockSet::new(blocks)
}

/// Dense matrix of `H(t) − i∂_t` on the truncated harmonic window.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    matrix: Array2<C64>,
    spec: SambeSpec,
    omega: f64,
}

impl FloquetMatrix {
    pub fn matrix(&self) -> ArrayView2<'_, C64> {
        self.matrix.view()
    }

    pub fn spec(&self) -> SambeSpec {
        self.spec
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn diagonalize(&self) -> Result<Spectrum> {
        linalg::diagonalize_hermitian(self.matrix.view())
    }

    /// `D ⊗ I` promoted to this Sambe space, as a block-diagonal matrix.
    pub fn promote(&self, op: &MatterOperator) -> Result<Array2<C64>> {
        if op.dim() != self.spec.matter_dim() {
            return Err(Error::Dimension {
                context: "operator promoted to Sambe space",
                expected: self.spec.matter_dim(),
                actual: op.dim(),
            });
        }
        let id = linalg::identity(self.spec.harmonics());
        Ok(linalg::kron(id.view(), op.matrix()))
    }
}

/// Assembles the Floquet matrix with harmonic cutoff `n_h`.
///
/// `n_h` must be at least the largest Fourier index so no coupling is lost
/// inside the window.
pub fn assemble_floquet_matrix(
    blocks: &FourierBlockSet,
    omega: f64,
    n_h: usize,
) -> Result<FloquetMatrix> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Input(format!("Ω must be positive (got {omega})")));
    }
    if n_h < blocks.max_k() {
        return Err(Error::Configuration(format!(
            "harmonic cutoff {n_h} is below the largest drive harmonic {}",
            blocks.max_k()
        )));
    }
    let spec = SambeSpec::new(n_h, blocks.dim())?;
    let nb = spec.matter_dim();
    let mut matrix = Array2::zeros((spec.dim(), spec.dim()));
    for row in 0..spec.harmonics() {
        let m = spec.harmonic_of_row(row);
        for col in 0..spec.harmonics() {
            let mp = spec.harmonic_of_row(col);
            if let Some(hk) = blocks.get(m - mp) {
                matrix
                    .slice_mut(s![row * nb..(row + 1) * nb, col * nb..(col + 1) * nb])
                    .assign(&hk);
            }
        }
        let shift = C64::new(m as f64 * omega, 0.0);
        for a in 0..nb {
            matrix[[row * nb + a, row * nb + a]] += shift;
        }
    }
    Ok(FloquetMatrix {
        matrix,
        spec,
        omega,
    })
}

/// Diagonalizes independent Floquet matrices in parallel, preserving order.
pub fn diagonalize_many(matrices: &[FloquetMatrix]) -> Vec<Result<Spectrum>> {
    matrices.par_iter().map(FloquetMatrix::diagonalize).collect()
}

/// Quasienergy and harmonic coefficient blocks of one Sambe eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMode {
    quasienergy: f64,
    /// Row `m + N_h` holds `c_m`.
    coeffs: Array2<C64>,
    omega: f64,
    edge_weight: f64,
    dropped_weight: f64,
    sambe_index: Option<usize>,
}

impl FloquetMode {
    /// Builds a mode from a flat Sambe vector (block-major).
    pub fn from_sambe_vector(
        quasienergy: f64,
        vector: ArrayView1<C64>,
        spec: SambeSpec,
        omega: f64,
    ) -> Result<Self> {
        if vector.len() != spec.dim() {
            return Err(Error::Dimension {
                context: "Sambe vector",
                expected: spec.dim(),
                actual: vector.len(),
            });
        }
        let coeffs = vector
            .to_owned()
            .into_shape_with_order((spec.harmonics(), spec.matter_dim()))
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let mut mode = Self {
            quasienergy,
            coeffs,
            omega,
            edge_weight: 0.0,
            dropped_weight: 0.0,
            sambe_index: None,
        };
        mode.edge_weight = mode.outer_weight();
        Ok(mode)
    }

    fn outer_weight(&self) -> f64 {
        let last = self.coeffs.nrows() - 1;
        let w0 = linalg::norm_sqr(self.coeffs.row(0));
        if last == 0 {
            w0
        } else {
            w0 + linalg::norm_sqr(self.coeffs.row(last))
        }
    }

    pub fn quasienergy(&self) -> f64 {
        self.quasienergy
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn harmonic_cutoff(&self) -> usize {
        (self.coeffs.nrows() - 1) / 2
    }

    pub fn matter_dim(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn coefficient_blocks(&self) -> ArrayView2<'_, C64> {
        self.coeffs.view()
    }

    /// `c_m`, or `None` outside the window.
    pub fn block(&self, m: i64) -> Option<ArrayView1<'_, C64>> {
        let row = m + self.harmonic_cutoff() as i64;
        (0..self.coeffs.nrows() as i64)
            .contains(&row)
            .then(|| self.coeffs.row(row as usize))
    }

    pub fn block_weight(&self, m: i64) -> f64 {
        self.block(m).map_or(0.0, linalg::norm_sqr)
    }

    /// `Σ_m ‖c_m‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Weight in the outermost harmonic blocks `m = ±N_h`.
    pub fn edge_weight(&self) -> f64 {
        self.edge_weight
    }

    /// Weight discarded by lossy replica shifts.
    pub fn dropped_weight(&self) -> f64 {
        self.dropped_weight
    }

    /// Column of the source spectrum this mode came from.
    pub fn sambe_index(&self) -> Option<usize> {
        self.sambe_index
    }

    pub fn to_sambe_vector(&self) -> Array1<C64> {
        self.coeffs.iter().copied().collect()
    }

    /// `Σ_m |⟨g|c_m⟩|²`: weight of a matter state summed over all harmonics.
    pub fn matter_overlap(&self, state: ArrayView1<C64>) -> f64 {
        self.coeffs
            .rows()
            .into_iter()
            .map(|c| linalg::inner(state, c).norm_sqr())
            .sum()
    }

    pub fn label(&self) -> FoldedLabel {
        fold_quasienergy(self.quasienergy, self.omega)
    }
}

/// `ε = epsilon_folded + n_shift · Ω` with `epsilon_folded ∈ [−Ω/2, Ω/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldedLabel {
    pub epsilon_folded: f64,
    pub n_shift: i64,
}

/// Folds a quasienergy into the half-open zone `[−Ω/2, Ω/2)`.
pub fn fold_quasienergy(epsilon: f64, omega: f64) -> FoldedLabel {
    let half = 0.5 * omega;
    let mut n = (epsilon / omega).round();
    let mut folded = epsilon - omega * n;
    // round() leaves ±Ω/2 ambiguous and rounding error can push past either edge
    while folded >= half {
        folded -= omega;
        n += 1.0;
    }
    while folded < -half {
        folded += omega;
        n -= 1.0;
    }
    FoldedLabel {
        epsilon_folded: folded,
        n_shift: n as i64,
    }
}

pub fn in_zone(epsilon: f64, omega: f64) -> bool {
    -0.5 * omega <= epsilon && epsilon < 0.5 * omega
}

/// Truncation problems detected while selecting zone representatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncationWarning {
    /// Number of in-zone eigenpairs differs from the matter dimension.
    ZoneCount { found: usize, expected: usize },
    /// A representative has more than `tolerance` weight in the edge blocks.
    EdgeWeight {
        representative: usize,
        quasienergy: f64,
        edge_weight: f64,
        tolerance: f64,
    },
}

impl fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationWarning::ZoneCount { found, expected } => write!(
                f,
                "zone holds {found} eigenpairs, expected {expected} (zone-edge degeneracy or harmonic cutoff too small)"
            ),
            TruncationWarning::EdgeWeight {
                representative,
                quasienergy,
                edge_weight,
                tolerance,
            } => write!(
                f,
                "representative {representative} (ε = {quasienergy:.12e}) has edge weight {edge_weight:.3e} > {tolerance:.3e}"
            ),
        }
    }
}

/// Zone representatives of a truncated Floquet spectrum.
#[derive(Debug, Clone)]
pub struct ZoneSelection {
    pub representatives: Vec<FloquetMode>,
    /// Folded label of every eigenpair, aligned with the spectrum.
    pub labels: Vec<FoldedLabel>,
    pub warnings: Vec<TruncationWarning>,
    pub expected: usize,
}

impl ZoneSelection {
    pub fn is_complete(&self) -> bool {
        self.representatives.len() == self.expected
    }

    /// Representatives whose edge weight exceeded the tolerance.
    pub fn edge_flagged(&self) -> Vec<usize> {
        self.warnings
            .iter()
            .filter_map(|w| match w {
                TruncationWarning::EdgeWeight { representative, .. } => Some(*representative),
                _ => None,
            })
            .collect()
    }

    /// Representative with the largest total weight on the given matter
    /// state, the usual choice being the undriven ground state.
    pub fn max_overlap_reference(&self, state: ArrayView1<C64>) -> Option<usize> {
        self.representatives
            .iter()
            .enumerate()
            .map(|(i, m)| (i, m.matter_overlap(state)))
            .fold(None, |best: Option<(usize, f64)>, (i, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((i, w)),
            })
            .map(|(i, _)| i)
    }
}

/// Picks the eigenpairs whose raw eigenvalue lies in `[−Ω/2, Ω/2)`.
///
/// Representatives are ordered by quasienergy; inside a degenerate group
/// (spacing below `1e-9 Ω`) by descending `m = 0` weight. Modes whose edge
/// weight exceeds `edge_tol` are flagged in the warnings, never dropped.
pub fn fold_and_select_ffbz(
    spectrum: &Spectrum,
    omega: f64,
    spec: SambeSpec,
    edge_tol: f64,
) -> Result<ZoneSelection> {
    if spectrum.dim() != spec.dim() || spectrum.len() != spec.dim() {
        return Err(Error::Input(format!(
            "spectrum has {} eigenpairs of length {}, Sambe dimension is {}",
            spectrum.len(),
            spectrum.dim(),
            spec.dim()
        )));
    }
    let labels: Vec<FoldedLabel> = spectrum
        .values
        .iter()
        .map(|&e| fold_quasienergy(e, omega))
        .collect();

    let mut reps = Vec::new();
    for (k, &eps) in spectrum.values.iter().enumerate() {
        if in_zone(eps, omega) {
            let mut mode = FloquetMode::from_sambe_vector(eps, spectrum.vector(k), spec, omega)?;
            mode.sambe_index = Some(k);
            reps.push(mode);
        }
    }
    order_degenerate(&mut reps, 1e-9 * omega);

    let mut warnings = Vec::new();
    if reps.len() != spec.matter_dim() {
        warnings.push(TruncationWarning::ZoneCount {
            found: reps.len(),
            expected: spec.matter_dim(),
        });
    }
    for (i, m) in reps.iter().enumerate() {
        if m.edge_weight() > edge_tol {
            warnings.push(TruncationWarning::EdgeWeight {
                representative: i,
                quasienergy: m.quasienergy(),
                edge_weight: m.edge_weight(),
                tolerance: edge_tol,
            });
        }
    }
    Ok(ZoneSelection {
        representatives: reps,
        labels,
        warnings,
        expected: spec.matter_dim(),
    })
}

fn order_degenerate(modes: &mut [FloquetMode], tol: f64) {
    // eigenvalues arrive ascending, so degenerate groups are contiguous
    let mut start = 0;
    while start < modes.len() {
        let mut end = start + 1;
        while end < modes.len() && modes[end].quasienergy - modes[end - 1].quasienergy <= tol {
            end += 1;
        }
        modes[start..end].sort_by(|a, b| b.block_weight(0).total_cmp(&a.block_weight(0)));
        start = end;
    }
}

/// Replica of `mode` shifted by `n` harmonics: `c′_m = c_{m−n}` at
/// quasienergy `ε + nΩ`.
///
/// Blocks pushed outside the window are dropped; the lost weight is added to
/// [`FloquetMode::dropped_weight`] and the remainder renormalized.
pub fn shift_replica(mode: &FloquetMode, n: i64) -> FloquetMode {
    if n == 0 {
        return mode.clone();
    }
    let rows = mode.coeffs.nrows();
    let mut coeffs = Array2::zeros(mode.coeffs.raw_dim());
    let mut dropped = 0.0;
    for (row, c) in mode.coeffs.rows().into_iter().enumerate() {
        let target = row as i64 + n;
        if (0..rows as i64).contains(&target) {
            coeffs.row_mut(target as usize).assign(&c);
        } else {
            dropped += linalg::norm_sqr(c);
        }
    }
    let kept: f64 = coeffs.iter().map(|z: &C64| z.norm_sqr()).sum();
    if dropped > 0.0 && kept > 0.0 {
        let scale = 1.0 / kept.sqrt();
        coeffs.mapv_inplace(|z| z * scale);
    }
    let total = mode.norm_sqr();
    let mut shifted = FloquetMode {
        quasienergy: mode.quasienergy + n as f64 * mode.omega,
        coeffs,
        omega: mode.omega,
        edge_weight: 0.0,
        dropped_weight: mode.dropped_weight + if total > 0.0 { dropped / total } else { 0.0 },
        sambe_index: None,
    };
    shifted.edge_weight = shifted.outer_weight();
    shifted
}

/// Matrix, spectrum and zone selection of one driven system.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub matrix: FloquetMatrix,
    pub spectrum: Spectrum,
    pub zone: ZoneSelection,
}

/// Builds, diagonalizes and folds `H_M − d E(t)` with cutoff `n_h`.
pub fn solve(
    h_matter: &MatterOperator,
    dipole: &MatterOperator,
    drive: &DriveSpec,
    n_h: usize,
    edge_tol: f64,
) -> Result<FloquetSolution> {
    let blocks = fourier_blocks_of_hamiltonian(h_matter, dipole, drive)?;
    let matrix = assemble_floquet_matrix(&blocks, drive.omega(), n_h)?;
    let spectrum = matrix.diagonalize()?;
    let zone = fold_and_select_ffbz(&spectrum, drive.omega(), matrix.spec(), edge_tol)?;
    Ok(FloquetSolution {
        matrix,
        spectrum,
        zone,
    })
}
