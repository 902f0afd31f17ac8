//! Matter coupled to one quantized field mode.
//!
//! The joint basis is `|a⟩ ⊗ |k⟩` with matter index `a` and photon number
//! `k ∈ 0..=n_max`, flattened as `a · (n_max + 1) + k`. The Hamiltonian is
//! `H_M ⊗ I + I ⊗ ω_c a†a − g d ⊗ (a + a†)`; the zero-point energy and any
//! dipole self-energy term are left out.

use ndarray::{Array1, Array2, ArrayView1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum, C64};
use crate::model::{self, ElectronCount, MatterOperator};
use crate::sumrule::{self, SumRuleForm, SumRuleReport};

/// Largest joint matter-photon dimension.
pub const MAX_JOINT_DIM: usize = 6000;

/// Change between successive cutoffs below which a row counts as converged.
pub const PHOTON_DELTA_TOL: f64 = 1e-8;
/// Largest reference population allowed in the two highest Fock levels.
pub const PHOTON_POPULATION_TOL: f64 = 1e-10;

/// Single field mode with `Ê = g (a + a†)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockSpec {
    n_max: usize,
    omega_c: f64,
    g: f64,
}

impl FockSpec {
    pub fn new(n_max: usize, omega_c: f64, g: f64) -> Result<Self> {
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return Err(Error::Input(format!(
                "cavity frequency must be positive (got {omega_c})"
            )));
        }
        if !g.is_finite() {
            return Err(Error::Input("coupling must be finite".into()));
        }
        Ok(Self { n_max, omega_c, g })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn with_cutoff(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    /// `a + a†` on the truncated Fock space.
    pub fn field_quadrature(&self) -> Array2<C64> {
        let n = self.levels();
        let mut q = Array2::zeros((n, n));
        for k in 1..n {
            let v = C64::new((k as f64).sqrt(), 0.0);
            q[[k - 1, k]] = v;
            q[[k, k - 1]] = v;
        }
        q
    }

    /// `ω_c a†a`.
    pub fn number_energy(&self) -> Array2<C64> {
        let n = self.levels();
        let mut m = Array2::zeros((n, n));
        for k in 0..n {
            m[[k, k]] = C64::new(self.omega_c * k as f64, 0.0);
        }
        m
    }
}

fn check_joint(h: &MatterOperator, d: &MatterOperator, fock: &FockSpec) -> Result<usize> {
    if h.dim() != d.dim() {
        return Err(Error::Dimension {
            context: "dipole vs matter Hamiltonian",
            expected: h.dim(),
            actual: d.dim(),
        });
    }
    let dim = h.dim() * fock.levels();
    if dim > MAX_JOINT_DIM {
        return Err(Error::Size {
            what: "joint matter-photon space",
            dim,
            limit: MAX_JOINT_DIM,
        });
    }
    Ok(dim)
}

fn joint_tag(d: &MatterOperator, fock: &FockSpec) -> String {
    format!("{}⊗fock[{}]", d.basis_tag(), fock.n_max)
}

/// Joint Hamiltonian `H_M ⊗ I + I ⊗ ω_c a†a − g d ⊗ (a + a†)`.
pub fn build_joint_hamiltonian(
    h: &MatterOperator,
    d: &MatterOperator,
    fock: &FockSpec,
) -> Result<MatterOperator> {
    check_joint(h, d, fock)?;
    let id_f = linalg::identity(fock.levels());
    let id_m = linalg::identity(h.dim());
    let mut joint = linalg::kron(h.matrix(), id_f.view())
        + linalg::kron(id_m.view(), fock.number_energy().view());
    if fock.g != 0.0 {
        let coupling = linalg::kron(d.matrix(), fock.field_quadrature().view());
        joint.scaled_add(C64::new(-fock.g, 0.0), &coupling);
    }
    MatterOperator::new(joint, joint_tag(d, fock))
}

/// `d ⊗ I` on the joint space.
pub fn joint_dipole(d: &MatterOperator, fock: &FockSpec) -> Result<MatterOperator> {
    check_joint(d, d, fock)?;
    let id_f = linalg::identity(fock.levels());
    MatterOperator::new(linalg::kron(d.matrix(), id_f.view()), joint_tag(d, fock))
}

/// Eigenstate of the joint Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonState {
    pub energy: f64,
    pub coefficients: Array1<C64>,
}

impl PolaritonState {
    pub fn from_spectrum(spectrum: &Spectrum, k: usize) -> Self {
        Self {
            energy: spectrum.values[k],
            coefficients: spectrum.vector(k).to_owned(),
        }
    }

    /// Mean photon number.
    pub fn photon_number(&self, fock: &FockSpec) -> f64 {
        fock_populations(self.coefficients.view(), fock.levels())
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }
}

/// Population of each Fock level in a joint state.
pub fn fock_populations(state: ArrayView1<C64>, levels: usize) -> Vec<f64> {
    let mut pop = vec![0.0; levels];
    for (i, z) in state.iter().enumerate() {
        pop[i % levels] += z.norm_sqr();
    }
    pop
}

/// Quantum-light sum `2 Σ_β (ε_β − ε_α) |⟨Φ_α|d|Φ_β⟩|²` over a complete
/// joint spectrum, checked against `⟨Φ_α|[d⊗I, [ℋ, d⊗I]]|Φ_α⟩`.
pub fn sumrule_qed(
    h_joint: &MatterOperator,
    spectrum: &Spectrum,
    d_joint: &MatterOperator,
    reference: usize,
    electrons: ElectronCount,
) -> Result<SumRuleReport> {
    if spectrum.len() != h_joint.dim() || spectrum.dim() != h_joint.dim() {
        return Err(Error::Input(format!(
            "joint sum needs the complete spectrum ({} of {} eigenpairs given)",
            spectrum.len(),
            h_joint.dim()
        )));
    }
    let mut report =
        sumrule::static_trk_with_spectrum(h_joint, d_joint, spectrum, reference, electrons)?;
    report.form = SumRuleForm::Joint;
    Ok(report)
}

/// `⟨Φ|[d,[H_M,d]] ⊗ I|Φ⟩`, the matter-only form of the joint oracle.
pub fn matter_oracle(
    h: &MatterOperator,
    d: &MatterOperator,
    fock: &FockSpec,
    state: ArrayView1<C64>,
) -> Result<f64> {
    check_joint(h, d, fock)?;
    let levels = fock.levels();
    let apply = |op: &MatterOperator, v: ArrayView1<C64>| -> Array1<C64> {
        // v reshaped as (matter, photon) so the matter operator acts on rows
        let m = v
            .to_owned()
            .into_shape_with_order((op.dim(), levels))
            .expect("joint vector length is matter × photon levels");
        op.matrix()
            .dot(&m)
            .into_shape_with_order(op.dim() * levels)
            .expect("flatten")
    };
    model::double_commutator_with(|v| apply(h, v), |v| apply(d, v), state)
}

/// Diagnostic: sum with the reference taken from `ℋ` but `β` running over
/// eigenstates of the uncoupled `ℋ₀`. It carries no exact oracle; the
/// oracle fields hold the interacting-basis closure value for comparison.
pub fn sumrule_qed_bare_basis(
    h_matter: &MatterOperator,
    d: &MatterOperator,
    fock: &FockSpec,
    reference: usize,
    electrons: ElectronCount,
) -> Result<SumRuleReport> {
    let h_joint = build_joint_hamiltonian(h_matter, d, fock)?;
    let h_free = build_joint_hamiltonian(h_matter, d, &FockSpec { g: 0.0, ..*fock })?;
    let d_joint = joint_dipole(d, fock)?;
    let dressed = linalg::diagonalize_hermitian(h_joint.matrix())?;
    let bare = linalg::diagonalize_hermitian(h_free.matrix())?;
    if reference >= dressed.len() {
        return Err(Error::Input(format!(
            "reference state {reference} out of range (have {} states)",
            dressed.len()
        )));
    }
    let state = dressed.vector(reference);
    let e_ref = dressed.values[reference];
    let d_ref = d_joint.matrix().dot(&state);
    let overlaps = bare.vectors.t().mapv(|z| z.conj()).dot(&d_ref);
    let contributions: Vec<sumrule::Contribution> = overlaps
        .iter()
        .enumerate()
        .map(|(beta, o)| {
            let diff = bare.values[beta] - e_ref;
            sumrule::Contribution {
                state: beta,
                n: 0,
                quasienergy_diff: diff,
                dipole_abs2: o.norm_sqr(),
                weight: 2.0 * diff * o.norm_sqr(),
            }
        })
        .collect();
    let value: f64 = contributions.iter().map(|c| c.weight).sum();
    let oracle = model::double_commutator_expectation(h_joint.matrix(), d_joint.matrix(), state)?;
    let target = electrons.get() as f64;
    Ok(SumRuleReport {
        form: SumRuleForm::Joint,
        reference,
        value,
        target,
        residual: value - target,
        oracle_value: oracle,
        oracle_residual: value - oracle,
        contributions,
        degenerate_contributions: Vec::new(),
        warnings: vec!["β summed over eigenstates of the uncoupled Hamiltonian".into()],
    })
}

/// Joint Hamiltonian, dipole, spectrum and sum-rule report at one cutoff.
#[derive(Debug, Clone)]
pub struct QedRun {
    pub hamiltonian: MatterOperator,
    pub dipole: MatterOperator,
    pub spectrum: Spectrum,
    pub report: SumRuleReport,
}

pub fn run_qed(
    h: &MatterOperator,
    d: &MatterOperator,
    fock: &FockSpec,
    reference: usize,
    electrons: ElectronCount,
) -> Result<QedRun> {
    let hamiltonian = build_joint_hamiltonian(h, d, fock)?;
    let dipole = joint_dipole(d, fock)?;
    let spectrum = linalg::diagonalize_hermitian(hamiltonian.matrix())?;
    let report = sumrule_qed(&hamiltonian, &spectrum, &dipole, reference, electrons)?;
    Ok(QedRun {
        hamiltonian,
        dipole,
        spectrum,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonCutoffRow {
    pub n_max: usize,
    pub value: f64,
    pub oracle_residual: f64,
    pub delta: Option<f64>,
    /// Reference-state population in Fock levels `n_max − 1` and `n_max`.
    pub top_population: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonConvergence {
    pub rows: Vec<PhotonCutoffRow>,
    pub converged_at: Option<usize>,
}

impl PhotonConvergence {
    /// Whether `|Δ|` never grows from one row to the next, treating changes
    /// below `floor` as zero.
    pub fn delta_monotone(&self, floor: f64) -> bool {
        let deltas: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r.delta)
            .map(|d| if d.abs() <= floor { 0.0 } else { d.abs() })
            .collect();
        deltas.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Sum-rule values over a family of photon cutoffs, each row diagonalized
/// independently (in parallel) and merged in cutoff order.
pub fn photon_cutoff_convergence(
    h: &MatterOperator,
    d: &MatterOperator,
    fock: &FockSpec,
    cutoffs: &[usize],
    reference: usize,
    electrons: ElectronCount,
) -> Result<PhotonConvergence> {
    use rayon::prelude::*;
    if cutoffs.len() < 3 {
        return Err(Error::Input(format!(
            "photon convergence needs at least 3 cutoffs (got {})",
            cutoffs.len()
        )));
    }
    if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("photon cutoffs must be strictly increasing".into()));
    }
    let runs: Vec<Result<(f64, f64, f64)>> = cutoffs
        .par_iter()
        .map(|&n_max| {
            let f = fock.with_cutoff(n_max);
            let run = run_qed(h, d, &f, reference, electrons)?;
            let pop = fock_populations(run.spectrum.vector(reference), f.levels());
            let top: f64 = pop.iter().rev().take(2).sum();
            Ok((run.report.value, run.report.oracle_residual, top))
        })
        .collect();
    let mut rows: Vec<PhotonCutoffRow> = Vec::with_capacity(cutoffs.len());
    for (run, &n_max) in runs.into_iter().zip(cutoffs) {
        let (value, oracle_residual, top_population) = run?;
        let delta = rows.last().map(|p| value - p.value);
        rows.push(PhotonCutoffRow {
            n_max,
            value,
            oracle_residual,
            delta,
            top_population,
            converged: delta.is_some_and(|d| d.abs() < PHOTON_DELTA_TOL)
                && top_population < PHOTON_POPULATION_TOL,
        });
    }
    let converged_at = rows.iter().find(|r| r.converged).map(|r| r.n_max);
    Ok(PhotonConvergence { rows, converged_at })
}
