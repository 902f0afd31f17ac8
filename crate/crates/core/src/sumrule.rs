//! Energy-weighted dipole sums and their double-commutator oracles.
//!
//! Every sum is evaluated twice: once over a complete spectrum,
//! `2 Σ_β (ε_β − ε_α) |⟨α|d|β⟩|²`, and once as `⟨α|[d,[H,d]]|α⟩` straight
//! from the operators. In finite dimension the two agree exactly; the
//! continuum target is the electron count.
//!
//! Dipole Fourier components follow the replica convention of
//! [`crate::floquet`]: `d^(n)_{λ′λ}` is the Sambe matrix element between `λ′`
//! and the replica of `λ` shifted by `n`, i.e.
//! `d^(n) = Σ_m ⟨c^{λ′}_{m+n}| d |c^λ_m⟩`, the time average of
//! `⟨φ_{λ′}(t)|d|φ_λ(t)⟩ e^{inΩt}`. Its partner energy is `ε_λ − ε_{λ′} + nΩ`.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{self, FloquetMatrix, FloquetMode};
use crate::linalg::{self, Spectrum, C64};
use crate::model::{self, DriveSpec, ElectronCount, MatterOperator};

/// Relative degeneracy tolerance used when aggregating contributions.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// `d^(n)_{λ′λ}` for `n ∈ [−2N_h, 2N_h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleFourierSet {
    entries: BTreeMap<i64, C64>,
    max_index: usize,
}

impl DipoleFourierSet {
    /// Component `n`; zero outside the truncated range.
    pub fn get(&self, n: i64) -> C64 {
        self.entries.get(&n).copied().unwrap_or_default()
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.entries.iter().map(|(n, z)| (*n, *z))
    }

    /// `Σ_n d^(n)`, which equals the full Sambe matrix element.
    pub fn total(&self) -> C64 {
        self.entries.values().sum()
    }
}

fn check_mode_pair(bra: &FloquetMode, ket: &FloquetMode, d: &MatterOperator) -> Result<()> {
    if bra.matter_dim() != ket.matter_dim() || bra.matter_dim() != d.dim() {
        return Err(Error::Dimension {
            context: "Floquet modes vs dipole",
            expected: d.dim(),
            actual: if bra.matter_dim() != d.dim() {
                bra.matter_dim()
            } else {
                ket.matter_dim()
            },
        });
    }
    if bra.harmonic_cutoff() != ket.harmonic_cutoff() {
        return Err(Error::Dimension {
            context: "Floquet mode harmonic windows",
            expected: bra.harmonic_cutoff(),
            actual: ket.harmonic_cutoff(),
        });
    }
    if bra.omega() != ket.omega() {
        return Err(Error::Input(format!(
            "Floquet modes have different drive frequencies ({} vs {})",
            bra.omega(),
            ket.omega()
        )));
    }
    Ok(())
}

/// `d · c_m` for every block of `mode`.
fn apply_dipole_blocks(mode: &FloquetMode, d: &MatterOperator) -> Array2<C64> {
    mode.coefficient_blocks().dot(&d.matrix().t())
}

fn fourier_from_blocks(bra: &FloquetMode, d_ket: &Array2<C64>) -> DipoleFourierSet {
    let rows = d_ket.nrows() as i64;
    let max = 2 * bra.harmonic_cutoff() as i64;
    let bra_blocks = bra.coefficient_blocks();
    let mut entries = BTreeMap::new();
    for n in -max..=max {
        let mut acc = C64::default();
        for m in 0.max(-n)..rows.min(rows - n) {
            acc += linalg::inner(bra_blocks.row((m + n) as usize), d_ket.row(m as usize));
        }
        entries.insert(n, acc);
    }
    DipoleFourierSet {
        entries,
        max_index: max as usize,
    }
}

/// Fourier components of the time-periodic transition dipole from `ket` to
/// `bra`.
pub fn dipole_fourier_components(
    bra: &FloquetMode,
    ket: &FloquetMode,
    d: &MatterOperator,
) -> Result<DipoleFourierSet> {
    check_mode_pair(bra, ket, d)?;
    Ok(fourier_from_blocks(bra, &apply_dipole_blocks(ket, d)))
}

/// Which sum produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumRuleForm {
    /// Bare matter spectrum.
    Static,
    /// All eigenpairs of the truncated Sambe space.
    Sambe,
    /// Zone representatives with Fourier-resolved dipoles.
    Zone,
    /// Joint matter-photon spectrum.
    Joint,
}

/// One term `2 (ε_{state} − ε_ref + nΩ) |d|²` of a sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub state: usize,
    pub n: i64,
    pub quasienergy_diff: f64,
    pub dipole_abs2: f64,
    pub weight: f64,
}

/// Contributions summed over a degenerate group of states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceContribution {
    pub states: Vec<usize>,
    pub n: i64,
    pub quasienergy_diff: f64,
    pub dipole_abs2: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleReport {
    pub form: SumRuleForm,
    pub reference: usize,
    pub value: f64,
    pub target: f64,
    pub residual: f64,
    pub oracle_value: f64,
    pub oracle_residual: f64,
    pub contributions: Vec<Contribution>,
    pub degenerate_contributions: Vec<SubspaceContribution>,
    pub warnings: Vec<String>,
}

impl SumRuleReport {
    fn assemble(
        form: SumRuleForm,
        reference: usize,
        target: ElectronCount,
        oracle_value: f64,
        contributions: Vec<Contribution>,
        degenerate_contributions: Vec<SubspaceContribution>,
        warnings: Vec<String>,
    ) -> Self {
        let value: f64 = contributions.iter().map(|c| c.weight).sum();
        let target = target.get() as f64;
        Self {
            form,
            reference,
            value,
            target,
            residual: value - target,
            oracle_value,
            oracle_residual: value - oracle_value,
            contributions,
            degenerate_contributions,
            warnings,
        }
    }

    /// `|value − oracle| / max(1, |oracle|)`.
    pub fn relative_oracle_error(&self) -> f64 {
        self.oracle_residual.abs() / self.oracle_value.abs().max(1.0)
    }

    /// Sum of `|weight|` over terms with `n ≠ 0`, relative to `|value|`.
    pub fn sideband_fraction(&self) -> f64 {
        let side: f64 = self
            .contributions
            .iter()
            .filter(|c| c.n != 0)
            .map(|c| c.weight.abs())
            .sum();
        side / self.value.abs()
    }
}

/// Groups states whose energies lie within `tol` of their neighbor. Input
/// energies must be sorted.
fn degenerate_groups(energies: &[(usize, f64)], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &(state, e) in energies {
        match groups.last_mut() {
            Some(g) if e - last <= tol => g.push(state),
            _ => groups.push(vec![state]),
        }
        last = e;
    }
    groups
}

fn aggregate(
    contributions: &[Contribution],
    energies: &[(usize, f64)],
    tol: f64,
) -> Vec<SubspaceContribution> {
    let mut out = Vec::new();
    for group in degenerate_groups(energies, tol).into_iter().filter(|g| g.len() > 1) {
        let mut by_n: BTreeMap<i64, SubspaceContribution> = BTreeMap::new();
        for c in contributions.iter().filter(|c| group.contains(&c.state)) {
            let entry = by_n.entry(c.n).or_insert_with(|| SubspaceContribution {
                states: group.clone(),
                n: c.n,
                quasienergy_diff: c.quasienergy_diff,
                dipole_abs2: 0.0,
                weight: 0.0,
            });
            entry.dipole_abs2 += c.dipole_abs2;
            entry.weight += c.weight;
        }
        out.extend(by_n.into_values());
    }
    out
}

fn spectral_scale(values: &Array1<f64>) -> f64 {
    match (values.first(), values.last()) {
        (Some(lo), Some(hi)) => (hi - lo).abs().max(1.0),
        _ => 1.0,
    }
}

/// Spectral sum over a complete eigenbasis, labelling each term with `n(β)`.
fn spectral_sum(
    spectrum: &Spectrum,
    d_ref: ArrayView1<C64>,
    reference: usize,
    harmonic_of: impl Fn(usize) -> i64,
) -> Vec<Contribution> {
    let overlaps = spectrum.vectors.t().mapv(|z| z.conj()).dot(&d_ref);
    let e_ref = spectrum.values[reference];
    overlaps
        .iter()
        .enumerate()
        .map(|(beta, o)| {
            let diff = spectrum.values[beta] - e_ref;
            let abs2 = o.norm_sqr();
            Contribution {
                state: beta,
                n: harmonic_of(beta),
                quasienergy_diff: diff,
                dipole_abs2: abs2,
                weight: 2.0 * diff * abs2,
            }
        })
        .collect()
}

fn check_reference(reference: usize, len: usize) -> Result<()> {
    if reference >= len {
        return Err(Error::Input(format!(
            "reference state {reference} out of range (have {len} states)"
        )));
    }
    Ok(())
}

/// Bare-matter TRK sum `2 Σ_β (E_β − E_α) |⟨α|d|β⟩|²`.
pub fn static_trk(
    h: &MatterOperator,
    d: &MatterOperator,
    reference: usize,
    electrons: ElectronCount,
) -> Result<SumRuleReport> {
    if h.dim() != d.dim() {
        return Err(Error::Dimension {
            context: "dipole vs Hamiltonian",
            expected: h.dim(),
            actual: d.dim(),
        });
    }
    let spectrum = linalg::diagonalize_hermitian(h.matrix())?;
    static_trk_with_spectrum(h, d, &spectrum, reference, electrons)
}

/// [`static_trk`] reusing an existing eigendecomposition of `h`.
pub fn static_trk_with_spectrum(
    h: &MatterOperator,
    d: &MatterOperator,
    spectrum: &Spectrum,
    reference: usize,
    electrons: ElectronCount,
) -> Result<SumRuleReport> {
    if spectrum.len() != h.dim() || spectrum.dim() != h.dim() {
        return Err(Error::Input("spectrum does not match the Hamiltonian".into()));
    }
    check_reference(reference, spectrum.len())?;
    let state = spectrum.vector(reference);
    let d_ref = d.matrix().dot(&state);
    let contributions = spectral_sum(spectrum, d_ref.view(), reference, |_| 0);
    let oracle = model::double_commutator_expectation(h.matrix(), d.matrix(), state)?;
    let energies: Vec<(usize, f64)> = spectrum.values.iter().copied().enumerate().collect();
    let degenerate = aggregate(
        &contributions,
        &energies,
        DEGENERACY_TOL * spectral_scale(&spectrum.values),
    );
    Ok(SumRuleReport::assemble(
        SumRuleForm::Static,
        reference,
        electrons,
        oracle,
        contributions,
        degenerate,
        Vec::new(),
    ))
}

/// Applies `I ⊗ d` blockwise to a flat Sambe vector.
fn apply_promoted(d: &MatterOperator, harmonics: usize, v: ArrayView1<C64>) -> Array1<C64> {
    let nb = d.dim();
    let blocks = v
        .to_owned()
        .into_shape_with_order((harmonics, nb))
        .expect("Sambe vector length is harmonics × matter dimension");
    blocks
        .dot(&d.matrix().t())
        .into_shape_with_order(harmonics * nb)
        .expect("reshape back to a flat vector")
}

/// Sum over every eigenpair of one truncated Floquet matrix.
///
/// The oracle is `⟨⟨α|[d,[Γ,d]]|α⟩⟩` evaluated with the assembled `Γ`.
pub fn sumrule_sambe(
    gamma: &FloquetMatrix,
    spectrum: &Spectrum,
    d: &MatterOperator,
    reference: usize,
    electrons: ElectronCount,
) -> Result<SumRuleReport> {
    let spec = gamma.spec();
    if d.dim() != spec.matter_dim() {
        return Err(Error::Dimension {
            context: "dipole vs Sambe matter block",
            expected: spec.matter_dim(),
            actual: d.dim(),
        });
    }
    if spectrum.len() != gamma.dim() || spectrum.dim() != gamma.dim() {
        return Err(Error::Input(format!(
            "Sambe sum needs the complete spectrum ({} of {} eigenpairs given)",
            spectrum.len(),
            gamma.dim()
        )));
    }
    check_reference(reference, spectrum.len())?;
    let omega = gamma.omega();
    let harmonics = spec.harmonics();
    let state = spectrum.vector(reference);
    let d_ref = apply_promoted(d, harmonics, state);
    let contributions = spectral_sum(spectrum, d_ref.view(), reference, |beta| {
        floquet::fold_quasienergy(spectrum.values[beta], omega).n_shift
    });
    let oracle = model::double_commutator_with(
        |v| gamma.matrix().dot(&v),
        |v| apply_promoted(d, harmonics, v),
        state,
    )?;
    let energies: Vec<(usize, f64)> = spectrum.values.iter().copied().enumerate().collect();
    let degenerate = aggregate(&contributions, &energies, DEGENERACY_TOL * omega);
    Ok(SumRuleReport::assemble(
        SumRuleForm::Sambe,
        reference,
        electrons,
        oracle,
        contributions,
        degenerate,
        Vec::new(),
    ))
}

/// What to do when the zone holds fewer representatives than the matter
/// dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZonePolicy {
    /// Fail with [`Error::Zone`].
    Strict,
    /// Evaluate over the representatives present and attach a warning.
    #[default]
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZoneSumOptions {
    /// Largest `|n|`; `None` means `2 N_h`.
    pub n_max: Option<usize>,
    pub policy: ZonePolicy,
    /// Edge weight above which the reference mode is reported.
    pub edge_tol: f64,
}

impl Default for ZoneSumOptions {
    fn default() -> Self {
        Self {
            n_max: None,
            policy: ZonePolicy::Warn,
            edge_tol: 1e-8,
        }
    }
}

/// Sum over zone representatives `λ` and Fourier index `n` of
/// `2 (ε_λ − ε_{λ′} + nΩ) |d^(n)_{λ′λ}|²`.
///
/// The oracle is `Σ_m ⟨c_m|[d,[H_M,d]]|c_m⟩` for the reference mode, the
/// Sambe double commutator with the drive and `mΩ` terms dropped since they
/// commute with `d`.
pub fn sumrule_ffbz(
    representatives: &[FloquetMode],
    h_matter: &MatterOperator,
    d: &MatterOperator,
    reference: usize,
    electrons: ElectronCount,
    options: ZoneSumOptions,
) -> Result<SumRuleReport> {
    if representatives.is_empty() {
        return Err(Error::Zone("no zone representatives were found".into()));
    }
    check_reference(reference, representatives.len())?;
    if h_matter.dim() != d.dim() {
        return Err(Error::Dimension {
            context: "dipole vs matter Hamiltonian",
            expected: h_matter.dim(),
            actual: d.dim(),
        });
    }
    let mut warnings = Vec::new();
    if representatives.len() != d.dim() {
        let msg = format!(
            "zone incomplete: {} of {} representatives",
            representatives.len(),
            d.dim()
        );
        match options.policy {
            ZonePolicy::Strict => return Err(Error::Zone(msg)),
            ZonePolicy::Warn => warnings.push(msg),
        }
    }
    let bra = &representatives[reference];
    let n_h = bra.harmonic_cutoff();
    let n_max = options.n_max.unwrap_or(2 * n_h);
    if n_max > 2 * n_h {
        return Err(Error::Input(format!(
            "n_max {n_max} exceeds the truncated Fourier range 2·N_h = {}",
            2 * n_h
        )));
    }
    if bra.edge_weight() > options.edge_tol {
        warnings.push(format!(
            "reference mode {reference} has edge weight {:.3e} > {:.3e}",
            bra.edge_weight(),
            options.edge_tol
        ));
    }
    let omega = bra.omega();
    let mut contributions = Vec::with_capacity(representatives.len() * (2 * n_max + 1));
    for (lambda, ket) in representatives.iter().enumerate() {
        check_mode_pair(bra, ket, d)?;
        let fourier = fourier_from_blocks(bra, &apply_dipole_blocks(ket, d));
        let base = ket.quasienergy() - bra.quasienergy();
        for n in -(n_max as i64)..=n_max as i64 {
            let diff = base + n as f64 * omega;
            let abs2 = fourier.get(n).norm_sqr();
            contributions.push(Contribution {
                state: lambda,
                n,
                quasienergy_diff: diff,
                dipole_abs2: abs2,
                weight: 2.0 * diff * abs2,
            });
        }
    }

    let blocks = bra.coefficient_blocks();
    let oracle = model::double_commutator_with(
        |v| apply_promoted(h_matter, blocks.nrows(), v),
        |v| apply_promoted(d, blocks.nrows(), v),
        bra.to_sambe_vector().view(),
    )?;

    let energies: Vec<(usize, f64)> = representatives
        .iter()
        .map(|m| m.quasienergy())
        .enumerate()
        .collect();
    let mut sorted = energies.clone();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let degenerate = aggregate(&contributions, &sorted, DEGENERACY_TOL * omega);
    Ok(SumRuleReport::assemble(
        SumRuleForm::Zone,
        reference,
        electrons,
        oracle,
        contributions,
        degenerate,
        warnings,
    ))
}

/// A spectral line at `omega` with weight `|d^(n)_{λ′λ}|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stick {
    pub omega: f64,
    pub weight: f64,
    pub lambda: usize,
    pub n: i64,
}

/// Stick spectrum `S(ω)` seen from a reference mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensity {
    pub reference: usize,
    pub sticks: Vec<Stick>,
}

impl SpectralDensity {
    /// Re-expresses the ledger of a zone (or static/joint) report as sticks,
    /// keeping every term with non-zero weight.
    pub fn from_report(report: &SumRuleReport) -> Self {
        let sticks = report
            .contributions
            .iter()
            .filter(|c| c.dipole_abs2 > 0.0)
            .map(|c| Stick {
                omega: c.quasienergy_diff,
                weight: c.dipole_abs2,
                lambda: c.state,
                n: c.n,
            })
            .collect();
        Self {
            reference: report.reference,
            sticks,
        }
    }
}

/// Stick spectrum of the zone sum; see [`sumrule_ffbz`].
pub fn spectral_density(
    representatives: &[FloquetMode],
    h_matter: &MatterOperator,
    d: &MatterOperator,
    reference: usize,
    options: ZoneSumOptions,
) -> Result<SpectralDensity> {
    let report = sumrule_ffbz(
        representatives,
        h_matter,
        d,
        reference,
        ElectronCount::ONE,
        options,
    )?;
    Ok(SpectralDensity::from_report(&report))
}

/// `2 Σ ω · weight`, normalized like the sum-rule ledgers.
pub fn first_moment(density: &SpectralDensity) -> f64 {
    density
        .sticks
        .iter()
        .map(|s| 2.0 * s.omega * s.weight)
        .sum()
}

/// How to pick the reference mode of a driven system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceChoice {
    /// Representative with the largest weight on the undriven ground state.
    #[default]
    Auto,
    Index(usize),
}

/// Zone and Sambe sums of one driven system at one harmonic cutoff.
#[derive(Debug, Clone)]
pub struct DrivenSumRules {
    pub solution: floquet::FloquetSolution,
    pub reference: usize,
    pub zone: SumRuleReport,
    pub sambe: SumRuleReport,
}

pub fn resolve_reference(
    zone: &floquet::ZoneSelection,
    h_matter: &MatterOperator,
    choice: ReferenceChoice,
) -> Result<usize> {
    match choice {
        ReferenceChoice::Index(i) => {
            check_reference(i, zone.representatives.len())?;
            Ok(i)
        }
        ReferenceChoice::Auto => {
            let (_, ground) = model::ground_state(h_matter)?;
            zone.max_overlap_reference(ground.view())
                .ok_or_else(|| Error::Zone("no zone representatives were found".into()))
        }
    }
}

/// Solves one driven system and evaluates both sums from the same reference.
///
/// Zone warnings from the Floquet selection are copied into the zone report.
pub fn driven_sum_rules(
    h_matter: &MatterOperator,
    d: &MatterOperator,
    drive: &DriveSpec,
    n_h: usize,
    electrons: ElectronCount,
    reference: ReferenceChoice,
    options: ZoneSumOptions,
) -> Result<DrivenSumRules> {
    let solution = floquet::solve(h_matter, d, drive, n_h, options.edge_tol)?;
    let reference = resolve_reference(&solution.zone, h_matter, reference)?;
    let mut zone = sumrule_ffbz(
        &solution.zone.representatives,
        h_matter,
        d,
        reference,
        electrons,
        options,
    )?;
    let selection_warnings: Vec<String> =
        solution.zone.warnings.iter().map(|w| w.to_string()).collect();
    zone.warnings.splice(0..0, selection_warnings);
    let alpha = solution.zone.representatives[reference]
        .sambe_index()
        .expect("zone representatives carry their spectrum index");
    let sambe = sumrule_sambe(&solution.matrix, &solution.spectrum, d, alpha, electrons)?;
    Ok(DrivenSumRules {
        solution,
        reference,
        zone,
        sambe,
    })
}

/// One harmonic cutoff of a convergence scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffRow {
    pub harmonic_cutoff: usize,
    pub zone_value: f64,
    pub sambe_value: f64,
    pub oracle_value: f64,
    /// `zone_value − N_e`.
    pub residual: f64,
    /// Change of `residual` from the previous row.
    pub delta: Option<f64>,
    /// `|zone_value − sambe_value|`.
    pub zone_sambe_gap: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffTable {
    pub rows: Vec<CutoffRow>,
    pub tolerance: f64,
    /// First cutoff whose residual moved by less than `tolerance`.
    pub converged_at: Option<usize>,
}

/// Change in the zone-sum residual below which a cutoff is converged.
pub const CUTOFF_TOLERANCE: f64 = 1e-6;

/// Runs [`driven_sum_rules`] for each cutoff (in parallel) and marks
/// convergence when the residual changes by less than [`CUTOFF_TOLERANCE`]
/// from the previous cutoff.
pub fn harmonic_cutoff_scan(
    h_matter: &MatterOperator,
    d: &MatterOperator,
    drive: &DriveSpec,
    cutoffs: &[usize],
    electrons: ElectronCount,
    reference: ReferenceChoice,
    options: ZoneSumOptions,
) -> Result<CutoffTable> {
    if cutoffs.len() < 2 || cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input(
            "cutoff scan needs at least two strictly increasing cutoffs".into(),
        ));
    }
    let runs: Vec<Result<DrivenSumRules>> = cutoffs
        .par_iter()
        .map(|&n_h| driven_sum_rules(h_matter, d, drive, n_h, electrons, reference, options))
        .collect();
    let mut rows: Vec<CutoffRow> = Vec::with_capacity(cutoffs.len());
    for (run, &n_h) in runs.into_iter().zip(cutoffs) {
        let run = run?;
        let residual = run.zone.residual;
        let delta = rows.last().map(|prev| residual - prev.residual);
        rows.push(CutoffRow {
            harmonic_cutoff: n_h,
            zone_value: run.zone.value,
            sambe_value: run.sambe.value,
            oracle_value: run.sambe.oracle_value,
            residual,
            delta,
            zone_sambe_gap: (run.zone.value - run.sambe.value).abs(),
            converged: delta.is_some_and(|d| d.abs() < CUTOFF_TOLERANCE),
            warnings: run.zone.warnings,
        });
    }
    let converged_at = rows.iter().find(|r| r.converged).map(|r| r.harmonic_cutoff);
    Ok(CutoffTable {
        rows,
        tolerance: CUTOFF_TOLERANCE,
        converged_at,
    })
}
