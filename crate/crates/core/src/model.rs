//! Discretized matter models: one- and two-electron Hamiltonians on a 1D
//! grid, the dipole operator, finite level models and the classical drive.
//!
//! Atomic units throughout. The grid uses Dirichlet boundaries: the
//! wavefunction vanishes one spacing beyond either end of the grid.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Largest matter-space dimension accepted by the builders.
pub const MAX_MATTER_DIM: usize = 4096;
/// Largest per-electron grid for the two-electron tensor model.
pub const MAX_TWO_ELECTRON_POINTS: usize = 64;

/// Uniform 1D grid `x_j = x_min + j·spacing` for `j` in `0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridBasis {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl GridBasis {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Input("grid bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::Input(format!(
                "grid requires x_max > x_min (got [{x_min}, {x_max}])"
            )));
        }
        if n_points < 3 {
            return Err(Error::Input(format!(
                "grid requires at least 3 points (got {n_points})"
            )));
        }
        if n_points > MAX_MATTER_DIM {
            return Err(Error::Size {
                what: "matter grid",
                dim: n_points,
                limit: MAX_MATTER_DIM,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Array1<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    fn tag(&self, electrons: usize) -> String {
        format!(
            "grid{}e[{},{};{}]",
            electrons, self.x_min, self.x_max, self.n_points
        )
    }
}

/// External (electron-nuclear) potential `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `ω² x² / 2`.
    Harmonic { omega: f64 },
    /// `−charge / √(x² + softening)`.
    SoftCoulomb { charge: f64, softening: f64 },
    /// Free particle between the Dirichlet walls.
    Box,
    /// `barrier · ((2x/separation)² − 1)²`, minima at `±separation/2`.
    DoubleWell { barrier: f64, separation: f64 },
    /// One value per grid point.
    Tabulated { values: Vec<f64> },
}

impl PotentialSpec {
    /// Potential sampled on the grid.
    pub fn sample(&self, grid: &GridBasis) -> Result<Array1<f64>> {
        let x = grid.points();
        let v = match self {
            PotentialSpec::Harmonic { omega } => x.mapv(|x| 0.5 * omega * omega * x * x),
            PotentialSpec::SoftCoulomb { charge, softening } => {
                if !(*softening > 0.0) {
                    return Err(Error::Input(format!(
                        "soft-Coulomb softening must be positive (got {softening})"
                    )));
                }
                x.mapv(|x| -charge / (x * x + softening).sqrt())
            }
            PotentialSpec::Box => Array1::zeros(grid.n_points()),
            PotentialSpec::DoubleWell {
                barrier,
                separation,
            } => {
                if !(*separation > 0.0) {
                    return Err(Error::Input(format!(
                        "double-well separation must be positive (got {separation})"
                    )));
                }
                let a = 0.5 * separation;
                x.mapv(|x| {
                    let q = (x / a) * (x / a) - 1.0;
                    barrier * q * q
                })
            }
            PotentialSpec::Tabulated { values } => {
                if values.len() != grid.n_points() {
                    return Err(Error::Dimension {
                        context: "tabulated potential",
                        expected: grid.n_points(),
                        actual: values.len(),
                    });
                }
                Array1::from(values.clone())
            }
        };
        if v.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("potential has non-finite values on the grid".into()));
        }
        Ok(v)
    }
}

/// Discretization of `−(1/2) d²/dx²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticScheme {
    /// Second-order central difference.
    #[default]
    ThreePoint,
    /// Sinc discrete variable representation.
    SincDvr,
}

/// Electron-electron interaction for the two-electron model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interaction {
    #[default]
    None,
    /// `strength / √((x₁ − x₂)² + softening)`.
    SoftCoulomb { strength: f64, softening: f64 },
}

/// Number of electrons, restricted to the one- and two-electron models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ElectronCount(u8);

impl ElectronCount {
    pub const ONE: ElectronCount = ElectronCount(1);
    pub const TWO: ElectronCount = ElectronCount(2);

    pub fn new(n: u32) -> Result<Self> {
        match n {
            1 | 2 => Ok(Self(n as u8)),
            _ => Err(Error::Input(format!(
                "electron count must be 1 or 2 (got {n})"
            ))),
        }
    }

    pub fn get(self) -> u32 {
        self.0 as u32
    }
}

/// Dense Hermitian operator on a matter basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MatterOperator {
    matrix: Array2<C64>,
    basis_tag: String,
}

impl MatterOperator {
    /// Wraps `matrix`, checking it is square and Hermitian to
    /// `1e-12 · max(1, max|M_ij|)`.
    pub fn new(matrix: Array2<C64>, basis_tag: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension {
                context: "matter operator",
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let scale = linalg::max_abs(matrix.view()).max(1.0);
        let defect = linalg::hermitian_defect(matrix.view());
        if defect > 1e-12 * scale {
            return Err(Error::Input(format!(
                "operator is not Hermitian (max |M - M†| = {defect:.3e})"
            )));
        }
        Ok(Self {
            matrix,
            basis_tag: basis_tag.into(),
        })
    }

    pub fn from_real_diagonal(diag: ArrayView1<f64>, basis_tag: impl Into<String>) -> Self {
        let n = diag.len();
        let mut m = Array2::zeros((n, n));
        for (j, v) in diag.iter().enumerate() {
            m[[j, j]] = C64::new(*v, 0.0);
        }
        Self {
            matrix: m,
            basis_tag: basis_tag.into(),
        }
    }

    pub fn matrix(&self) -> ArrayView2<'_, C64> {
        self.matrix.view()
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis_tag(&self) -> &str {
        &self.basis_tag
    }
}

fn kinetic_matrix(grid: &GridBasis, scheme: KineticScheme) -> Array2<f64> {
    let n = grid.n_points();
    let dx2 = grid.spacing() * grid.spacing();
    let mut t = Array2::zeros((n, n));
    match scheme {
        KineticScheme::ThreePoint => {
            for j in 0..n {
                t[[j, j]] = 1.0 / dx2;
                if j + 1 < n {
                    t[[j, j + 1]] = -0.5 / dx2;
                    t[[j + 1, j]] = -0.5 / dx2;
                }
            }
        }
        KineticScheme::SincDvr => {
            for j in 0..n {
                for k in 0..n {
                    t[[j, k]] = if j == k {
                        PI * PI / (6.0 * dx2)
                    } else {
                        let d = j as f64 - k as f64;
                        let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                        sign / (dx2 * d * d)
                    };
                }
            }
        }
    }
    t
}

/// Single-electron Hamiltonian `p²/2 + V(x)` on the grid.
pub fn build_grid_hamiltonian(
    grid: &GridBasis,
    potential: &PotentialSpec,
    kinetic: KineticScheme,
) -> Result<MatterOperator> {
    let v = potential.sample(grid)?;
    let mut h = kinetic_matrix(grid, kinetic);
    for (j, vj) in v.iter().enumerate() {
        h[[j, j]] += vj;
    }
    Ok(MatterOperator {
        matrix: h.mapv(|x| C64::new(x, 0.0)),
        basis_tag: grid.tag(1),
    })
}

/// Dipole operator `d = −Σ_i x_i`.
///
/// For two electrons the basis is the tensor grid with composite index
/// `a · n_points + b`.
pub fn build_dipole(grid: &GridBasis, electrons: ElectronCount) -> Result<MatterOperator> {
    let x = grid.points();
    match electrons.get() {
        1 => Ok(MatterOperator::from_real_diagonal(
            x.mapv(|x| -x).view(),
            grid.tag(1),
        )),
        _ => {
            check_two_electron_grid(grid)?;
            let n = grid.n_points();
            let diag: Array1<f64> = (0..n * n).map(|ab| -(x[ab / n] + x[ab % n])).collect();
            Ok(MatterOperator::from_real_diagonal(diag.view(), grid.tag(2)))
        }
    }
}

fn check_two_electron_grid(grid: &GridBasis) -> Result<()> {
    if grid.n_points() > MAX_TWO_ELECTRON_POINTS {
        return Err(Error::Size {
            what: "two-electron grid",
            dim: grid.n_points(),
            limit: MAX_TWO_ELECTRON_POINTS,
        });
    }
    Ok(())
}

/// Two distinguishable electrons: `h⊗I + I⊗h + V_ee` on the tensor grid.
pub fn build_two_electron_hamiltonian(
    grid: &GridBasis,
    potential: &PotentialSpec,
    interaction: Interaction,
    kinetic: KineticScheme,
) -> Result<MatterOperator> {
    check_two_electron_grid(grid)?;
    let n = grid.n_points();
    let h = build_grid_hamiltonian(grid, potential, kinetic)?;
    let id = linalg::identity(n);
    let mut total = linalg::kron(h.matrix(), id.view()) + linalg::kron(id.view(), h.matrix());
    if let Interaction::SoftCoulomb {
        strength,
        softening,
    } = interaction
    {
        if !(softening > 0.0) || !strength.is_finite() {
            return Err(Error::Input(format!(
                "interaction needs finite strength and positive softening (got {strength}, {softening})"
            )));
        }
        let x = grid.points();
        for a in 0..n {
            for b in 0..n {
                let r = x[a] - x[b];
                total[[a * n + b, a * n + b]] += C64::new(strength / (r * r + softening).sqrt(), 0.0);
            }
        }
    }
    Ok(MatterOperator {
        matrix: total,
        basis_tag: grid.tag(2),
    })
}

/// Finite level system given by its energies and a Hermitian dipole matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FewLevelModel {
    energies: Vec<f64>,
    dipole: Array2<C64>,
}

impl FewLevelModel {
    pub fn new(energies: Vec<f64>, dipole: Array2<C64>) -> Result<Self> {
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Input("level energies must be sorted ascending".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Input("level energies must be finite".into()));
        }
        if dipole.nrows() != energies.len() || dipole.ncols() != energies.len() {
            return Err(Error::Dimension {
                context: "few-level dipole",
                expected: energies.len(),
                actual: dipole.nrows(),
            });
        }
        // validates hermiticity
        MatterOperator::new(dipole.clone(), "")?;
        Ok(Self { energies, dipole })
    }

    /// Levels `0` and `gap` coupled by a real transition dipole `mu`.
    pub fn two_level(gap: f64, mu: f64) -> Result<Self> {
        let mut d = Array2::zeros((2, 2));
        d[[0, 1]] = C64::new(mu, 0.0);
        d[[1, 0]] = C64::new(mu, 0.0);
        Self::new(vec![0.0, gap], d)
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn tag(&self) -> String {
        format!("levels[{}]", self.energies.len())
    }

    pub fn hamiltonian(&self) -> MatterOperator {
        MatterOperator::from_real_diagonal(Array1::from(self.energies.clone()).view(), self.tag())
    }

    pub fn dipole(&self) -> MatterOperator {
        MatterOperator {
            matrix: self.dipole.clone(),
            basis_tag: self.tag(),
        }
    }
}

/// One cosine component `E_k cos(kΩt + φ_k)` of the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveComponent {
    pub harmonic: u32,
    pub amplitude: f64,
    pub phase: f64,
}

/// Periodic classical field `E(t) = Σ_k E_k cos(kΩt + φ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveSpec {
    omega: f64,
    components: Vec<DriveComponent>,
}

impl DriveSpec {
    pub fn new(omega: f64, components: Vec<DriveComponent>) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Input(format!(
                "drive frequency must be positive and finite (got {omega})"
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if c.harmonic == 0 {
                return Err(Error::Input("drive harmonic index must be at least 1".into()));
            }
            if !c.amplitude.is_finite() || !c.phase.is_finite() {
                return Err(Error::Input(format!(
                    "drive component {} has non-finite parameters",
                    c.harmonic
                )));
            }
            if components[..i].iter().any(|p| p.harmonic == c.harmonic) {
                return Err(Error::Input(format!(
                    "drive harmonic {} listed twice",
                    c.harmonic
                )));
            }
        }
        Ok(Self { omega, components })
    }

    /// Single harmonic `amplitude · cos(Ωt)`.
    pub fn monochromatic(omega: f64, amplitude: f64) -> Result<Self> {
        Self::new(
            omega,
            vec![DriveComponent {
                harmonic: 1,
                amplitude,
                phase: 0.0,
            }],
        )
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn components(&self) -> &[DriveComponent] {
        &self.components
    }

    pub fn max_harmonic(&self) -> u32 {
        self.components.iter().map(|c| c.harmonic).max().unwrap_or(0)
    }

    /// Field value at time `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * (c.harmonic as f64 * self.omega * t + c.phase).cos())
            .sum()
    }
}

/// `⟨ψ| [d, [H, d]] |ψ⟩` by direct operator algebra.
///
/// Evaluated through matrix-vector products, `⟨dψ|Kψ⟩ − ⟨ψ|K dψ⟩` with
/// `K = Hd − dH`, so it never touches the spectrum of `H`.
pub fn double_commutator_expectation(
    h: ArrayView2<C64>,
    d: ArrayView2<C64>,
    state: ArrayView1<C64>,
) -> Result<f64> {
    let n = state.len();
    for (context, m) in [("hamiltonian", h), ("dipole", d)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                context,
                expected: n,
                actual: m.nrows(),
            });
        }
    }
    double_commutator_with(|v| h.dot(&v), |v| d.dot(&v), state)
}

/// Same as [`double_commutator_expectation`] with `H` and `d` given as
/// linear maps, for operators too large to store densely.
pub fn double_commutator_with<FH, FD>(apply_h: FH, apply_d: FD, state: ArrayView1<C64>) -> Result<f64>
where
    FH: Fn(ArrayView1<C64>) -> Array1<C64>,
    FD: Fn(ArrayView1<C64>) -> Array1<C64>,
{
    let norm = linalg::norm_sqr(state).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Input(format!(
            "state must be normalized (norm = {norm:.12})"
        )));
    }
    let apply_k = |v: ArrayView1<C64>| -> Array1<C64> {
        apply_h(apply_d(v).view()) - apply_d(apply_h(v).view())
    };
    let dpsi = apply_d(state);
    let k_psi = apply_k(state);
    let k_dpsi = apply_k(dpsi.view());
    let value = linalg::inner(dpsi.view(), k_psi.view()) - linalg::inner(state, k_dpsi.view());
    let tol = 1e-8 * value.re.abs().max(1.0);
    if value.im.abs() > tol {
        return Err(Error::Numeric(format!(
            "double commutator expectation has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Dense `[d, [H, d]]`.
pub fn double_commutator_matrix(h: ArrayView2<C64>, d: ArrayView2<C64>) -> Array2<C64> {
    let inner = linalg::commutator(h, d);
    linalg::commutator(d, inner.view())
}

/// Normalized lowest eigenvector and the full spectrum of `h`.
pub fn ground_state(h: &MatterOperator) -> Result<(f64, Array1<C64>)> {
    let s = linalg::diagonalize_hermitian(h.matrix())?;
    if s.is_empty() {
        return Err(Error::Input("empty operator has no ground state".into()));
    }
    Ok((s.values[0], s.vector(0).to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn eigenvalues(h: &MatterOperator) -> Vec<f64> {
        linalg::diagonalize_hermitian(h.matrix())
            .unwrap()
            .values
            .to_vec()
    }

    fn harmonic_defect(n: usize) -> f64 {
        let grid = GridBasis::new(-10.0, 10.0, n).unwrap();
        let h = build_grid_hamiltonian(&grid, &PotentialSpec::Harmonic { omega: 1.0 }, KineticScheme::ThreePoint)
            .unwrap();
        let d = build_dipole(&grid, ElectronCount::ONE).unwrap();
        let (_, psi) = ground_state(&h).unwrap();
        (double_commutator_expectation(h.matrix(), d.matrix(), psi.view()).unwrap() - 1.0).abs()
    }

    #[test]
    fn grid_rejects_bad_bounds() {
        assert!(GridBasis::new(1.0, 1.0, 10).is_err());
        assert!(GridBasis::new(0.0, 1.0, 2).is_err());
        assert!(matches!(
            GridBasis::new(0.0, 1.0, MAX_MATTER_DIM + 1),
            Err(Error::Size { .. })
        ));
        let g = GridBasis::new(-5.0, 5.0, 11).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.point(10), 5.0);
    }

    #[test]
    fn harmonic_ground_energy() {
        let grid = GridBasis::new(-10.0, 10.0, 201).unwrap();
        let h = build_grid_hamiltonian(&grid, &PotentialSpec::Harmonic { omega: 1.0 }, KineticScheme::ThreePoint)
            .unwrap();
        let e = eigenvalues(&h);
        assert!((e[0] - 0.5).abs() < 1e-3, "{}", e[0]);
        // E_1 = 3/2 as well, the discretization error grows with n
        assert!((e[1] - 1.5).abs() < 5e-3, "{}", e[1]);
    }

    #[test]
    fn sinc_dvr_harmonic_is_spectrally_accurate() {
        let grid = GridBasis::new(-8.0, 8.0, 64).unwrap();
        let h = build_grid_hamiltonian(&grid, &PotentialSpec::Harmonic { omega: 1.0 }, KineticScheme::SincDvr)
            .unwrap();
        let e = eigenvalues(&h);
        for (k, ek) in e.iter().take(5).enumerate() {
            assert!((ek - (k as f64 + 0.5)).abs() < 1e-9, "E_{k} = {ek}");
        }
    }

    #[test]
    fn box_ground_energy() {
        // walls sit one spacing beyond the end points, so the box is L + 2Δx wide
        let grid = GridBasis::new(0.0, 1.0, 401).unwrap();
        let h = build_grid_hamiltonian(&grid, &PotentialSpec::Box, KineticScheme::ThreePoint).unwrap();
        let e0 = eigenvalues(&h)[0];
        let width = 1.0 + 2.0 * grid.spacing();
        let analytic = PI * PI / (2.0 * width * width);
        assert!((e0 - analytic).abs() < 1e-3, "{e0} vs {analytic}");
        // and within 5e-2 of the wall-at-grid-end value π²/2
        assert!((e0 - PI * PI / 2.0).abs() < 5e-2);
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let grid = GridBasis::new(-4.0, 4.0, 17).unwrap();
        let potentials = [
            PotentialSpec::Harmonic { omega: 0.7 },
            PotentialSpec::SoftCoulomb {
                charge: 1.0,
                softening: 2.0,
            },
            PotentialSpec::Box,
            PotentialSpec::DoubleWell {
                barrier: 0.2,
                separation: 3.0,
            },
            PotentialSpec::Tabulated {
                values: (0..17).map(|j| (j as f64).sin()).collect(),
            },
        ];
        for p in &potentials {
            for scheme in [KineticScheme::ThreePoint, KineticScheme::SincDvr] {
                let h = build_grid_hamiltonian(&grid, p, scheme).unwrap();
                assert_eq!(linalg::hermitian_defect(h.matrix()), 0.0);
            }
        }
    }

    #[test]
    fn potential_errors() {
        let grid = GridBasis::new(-1.0, 1.0, 5).unwrap();
        let short = PotentialSpec::Tabulated {
            values: vec![0.0; 4],
        };
        assert!(matches!(
            build_grid_hamiltonian(&grid, &short, KineticScheme::ThreePoint),
            Err(Error::Dimension { .. })
        ));
        let nan = PotentialSpec::Tabulated {
            values: vec![0.0, f64::NAN, 0.0, 0.0, 0.0],
        };
        assert!(matches!(
            build_grid_hamiltonian(&grid, &nan, KineticScheme::ThreePoint),
            Err(Error::Input(_))
        ));
        let bad = PotentialSpec::SoftCoulomb {
            charge: 1.0,
            softening: 0.0,
        };
        assert!(build_grid_hamiltonian(&grid, &bad, KineticScheme::ThreePoint).is_err());
    }

    #[test]
    fn dipole_one_electron() {
        let grid = GridBasis::new(-5.0, 5.0, 11).unwrap();
        let d = build_dipole(&grid, ElectronCount::ONE).unwrap();
        let m = d.matrix();
        let mut trace = 0.0;
        for i in 0..11 {
            for j in 0..11 {
                if i != j {
                    assert_eq!(m[[i, j]], ZERO);
                }
            }
            assert_eq!(m[[i, i]].im, 0.0);
            assert_eq!(m[[i, i]].re, -grid.point(i));
            trace += m[[i, i]].re;
        }
        assert_eq!(trace, 0.0);
    }

    #[test]
    fn dipole_two_electron_tensor_sum() {
        let grid = GridBasis::new(0.0, 3.0, 4).unwrap();
        let d = build_dipole(&grid, ElectronCount::TWO).unwrap();
        assert_eq!(d.dim(), 16);
        for a in 0..4 {
            for b in 0..4 {
                let k = a * 4 + b;
                assert_eq!(d.matrix()[[k, k]].re, -(grid.point(a) + grid.point(b)));
            }
        }
        assert_eq!(linalg::max_abs(d.matrix()), 6.0);
    }

    #[test]
    fn two_electron_noninteracting_is_separable() {
        let grid = GridBasis::new(-4.0, 4.0, 10).unwrap();
        let pot = PotentialSpec::Harmonic { omega: 1.0 };
        let h1 = build_grid_hamiltonian(&grid, &pot, KineticScheme::ThreePoint).unwrap();
        let h2 = build_two_electron_hamiltonian(&grid, &pot, Interaction::None, KineticScheme::ThreePoint).unwrap();
        let e1 = eigenvalues(&h1);
        let mut pairs: Vec<f64> = e1.iter().flat_map(|a| e1.iter().map(move |b| a + b)).collect();
        pairs.sort_by(f64::total_cmp);
        for (a, b) in pairs.iter().zip(eigenvalues(&h2).iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn two_electron_ground_energy() {
        let grid = GridBasis::new(-8.0, 8.0, 32).unwrap();
        let pot = PotentialSpec::Harmonic { omega: 1.0 };
        let h1 = build_grid_hamiltonian(&grid, &pot, KineticScheme::SincDvr).unwrap();
        let single = eigenvalues(&h1)[0];
        let free = build_two_electron_hamiltonian(&grid, &pot, Interaction::None, KineticScheme::SincDvr).unwrap();
        let e_free = eigenvalues(&free)[0];
        assert!((e_free - 2.0 * single).abs() < 1e-10);
        assert!((e_free - 1.0).abs() < 5e-3);
        let coulomb = Interaction::SoftCoulomb {
            strength: 1.0,
            softening: 1.0,
        };
        let interacting = build_two_electron_hamiltonian(&grid, &pot, coulomb, KineticScheme::SincDvr).unwrap();
        assert!(eigenvalues(&interacting)[0] > e_free);
    }

    #[test]
    fn two_electron_size_guard() {
        let grid = GridBasis::new(-8.0, 8.0, 65).unwrap();
        let pot = PotentialSpec::Box;
        assert!(matches!(
            build_two_electron_hamiltonian(&grid, &pot, Interaction::None, KineticScheme::ThreePoint),
            Err(Error::Size { .. })
        ));
        assert!(build_dipole(&grid, ElectronCount::TWO).is_err());
    }

    #[test]
    fn drive_evaluation() {
        let d = DriveSpec::monochromatic(0.35, 0.1).unwrap();
        assert_eq!(d.evaluate(0.0), 0.1);
        assert!((d.evaluate(d.period()) - 0.1).abs() < 1e-15);
        let two = DriveSpec::new(
            1.0,
            vec![
                DriveComponent {
                    harmonic: 1,
                    amplitude: 0.1,
                    phase: 0.0,
                },
                DriveComponent {
                    harmonic: 2,
                    amplitude: 0.05,
                    phase: PI / 2.0,
                },
            ],
        )
        .unwrap();
        assert!((two.evaluate(0.0) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn drive_validation() {
        assert!(DriveSpec::monochromatic(0.0, 0.1).is_err());
        let dup = vec![
            DriveComponent {
                harmonic: 1,
                amplitude: 0.1,
                phase: 0.0,
            };
            2
        ];
        assert!(DriveSpec::new(1.0, dup).is_err());
        let zero = vec![DriveComponent {
            harmonic: 0,
            amplitude: 0.1,
            phase: 0.0,
        }];
        assert!(DriveSpec::new(1.0, zero).is_err());
    }

    #[test]
    fn electron_count_range() {
        assert!(ElectronCount::new(0).is_err());
        assert!(ElectronCount::new(3).is_err());
        assert_eq!(ElectronCount::new(2).unwrap().get(), 2);
    }

    #[test]
    fn double_commutator_near_one_for_harmonic_ground_state() {
        assert!(harmonic_defect(201) < 1e-2);
    }

    #[test]
    fn double_commutator_second_order_in_spacing() {
        // Δx = 0.1 → 0.05
        let ratio = harmonic_defect(201) / harmonic_defect(401);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn double_commutator_matches_dense_matrix() {
        let grid = GridBasis::new(-3.0, 3.0, 12).unwrap();
        let h = build_grid_hamiltonian(&grid, &PotentialSpec::Harmonic { omega: 1.3 }, KineticScheme::SincDvr)
            .unwrap();
        let d = build_dipole(&grid, ElectronCount::ONE).unwrap();
        let (_, psi) = ground_state(&h).unwrap();
        let c = double_commutator_matrix(h.matrix(), d.matrix());
        let dense = linalg::inner(psi.view(), c.dot(&psi).view());
        let direct = double_commutator_expectation(h.matrix(), d.matrix(), psi.view()).unwrap();
        assert!((dense.re - direct).abs() < 1e-12);
    }

    #[test]
    fn double_commutator_independent_of_interaction() {
        let grid = GridBasis::new(-5.0, 5.0, 16).unwrap();
        let pot = PotentialSpec::Harmonic { omega: 1.0 };
        let free = build_two_electron_hamiltonian(&grid, &pot, Interaction::None, KineticScheme::ThreePoint).unwrap();
        let coulomb = Interaction::SoftCoulomb {
            strength: 1.0,
            softening: 1.0,
        };
        let inter = build_two_electron_hamiltonian(&grid, &pot, coulomb, KineticScheme::ThreePoint).unwrap();
        let d = build_dipole(&grid, ElectronCount::TWO).unwrap();
        let (_, psi) = ground_state(&inter).unwrap();
        let a = double_commutator_expectation(free.matrix(), d.matrix(), psi.view()).unwrap();
        let b = double_commutator_expectation(inter.matrix(), d.matrix(), psi.view()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn double_commutator_rejects_unnormalized_state() {
        let grid = GridBasis::new(-1.0, 1.0, 3).unwrap();
        let h = build_grid_hamiltonian(&grid, &PotentialSpec::Box, KineticScheme::ThreePoint).unwrap();
        let d = build_dipole(&grid, ElectronCount::ONE).unwrap();
        let v = Array1::from_elem(3, C64::new(1.0, 0.0));
        assert!(matches!(
            double_commutator_expectation(h.matrix(), d.matrix(), v.view()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn few_level_validation() {
        assert!(FewLevelModel::two_level(1.0, 0.3).is_ok());
        let d = Array2::zeros((2, 2));
        assert!(FewLevelModel::new(vec![1.0, 0.0], d.clone()).is_err());
        assert!(FewLevelModel::new(vec![0.0, 1.0, 2.0], d).is_err());
    }
}
