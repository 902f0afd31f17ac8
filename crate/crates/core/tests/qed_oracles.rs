use trk_core::linalg;
use trk_core::model::{self, ElectronCount, FewLevelModel, GridBasis, KineticScheme, PotentialSpec};
use trk_core::qed::{self, FockSpec};
use trk_core::sumrule;

fn oscillator(n: usize) -> (model::MatterOperator, model::MatterOperator) {
    let grid = GridBasis::new(-5.0, 5.0, n).unwrap();
    let h = model::build_grid_hamiltonian(&grid, &PotentialSpec::Harmonic { omega: 1.0 }, KineticScheme::ThreePoint)
        .unwrap();
    (h, model::build_dipole(&grid, ElectronCount::ONE).unwrap())
}

#[test]
fn field_terms_drop_out_of_the_double_commutator() {
    let m = FewLevelModel::new(
        vec![0.0, 0.8, 1.9],
        ndarray::Array2::from_shape_fn((3, 3), |(i, j)| {
            trk_core::C64::new(if i == j { 0.0 } else { 0.4 + 0.2 * (i * j) as f64 }, 0.0)
        }),
    )
    .unwrap();
    let fock = FockSpec::new(6, 1.1, 0.3).unwrap();
    let run = qed::run_qed(&m.hamiltonian(), &m.dipole(), &fock, 0, ElectronCount::ONE).unwrap();
    for k in 0..run.spectrum.len() {
        let state = run.spectrum.vector(k);
        let joint = model::double_commutator_expectation(run.hamiltonian.matrix(), run.dipole.matrix(), state).unwrap();
        let matter = qed::matter_oracle(&m.hamiltonian(), &m.dipole(), &fock, state).unwrap();
        assert!((joint - matter).abs() < 1e-12, "state {k}: {joint} vs {matter}");
    }
}

#[test]
fn vanishing_coupling_recovers_the_static_sum() {
    let (h, d) = oscillator(61);
    let stat = sumrule::static_trk(&h, &d, 0, ElectronCount::ONE).unwrap();
    let mut last = f64::INFINITY;
    for g in [1e-2, 1e-3, 1e-4] {
        let fock = FockSpec::new(3, 1.2, g).unwrap();
        let run = qed::run_qed(&h, &d, &fock, 0, ElectronCount::ONE).unwrap();
        let gap = (run.report.value - stat.value).abs();
        assert!(gap <= last + 1e-12);
        last = gap;
    }
    assert!(last < 1e-6, "{last:e}");
}

#[test]
fn joint_sum_closes_on_grid_oscillator() {
    let (h, d) = oscillator(101);
    let fock = FockSpec::new(4, 1.2, 0.05).unwrap();
    let run = qed::run_qed(&h, &d, &fock, 0, ElectronCount::ONE).unwrap();
    assert!(run.report.relative_oracle_error() < 1e-8);
    assert!(run.report.residual.abs() < 1e-2);
    assert!(run.spectrum.max_residual(run.hamiltonian.matrix()) < 1e-8);
}

#[test]
fn bare_basis_diagnostic_differs_but_closes_at_zero_coupling() {
    let (h, d) = oscillator(61);
    let free = qed::sumrule_qed_bare_basis(&h, &d, &FockSpec::new(3, 1.2, 0.0).unwrap(), 0, ElectronCount::ONE).unwrap();
    assert!(free.relative_oracle_error() < 1e-8);
    let strong = qed::sumrule_qed_bare_basis(&h, &d, &FockSpec::new(3, 1.2, 0.3).unwrap(), 0, ElectronCount::ONE).unwrap();
    assert!(strong.relative_oracle_error() > 1e-6);
}

#[test]
fn photon_cutoff_family_converges() {
    let (h, d) = oscillator(61);
    let fock = FockSpec::new(0, 1.2, 0.01).unwrap();
    let conv = qed::photon_cutoff_convergence(&h, &d, &fock, &[1, 2, 3, 4], 0, ElectronCount::ONE).unwrap();
    assert!(conv.delta_monotone(1e-13));
    for r in &conv.rows {
        assert!(r.oracle_residual.abs() < 1e-8);
    }
    let top = conv.rows.last().unwrap();
    assert!(top.top_population < 1e-6);
    let spectrum = linalg::diagonalize_hermitian(h.matrix()).unwrap();
    assert!(spectrum.values[0] > 0.0);
}
