//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trk_core::floquet::{self, FloquetMode, FloquetSolution};
use trk_core::linalg;
use trk_core::model::{
    self, DriveComponent, DriveSpec, ElectronCount, FewLevelModel, GridBasis, Interaction, KineticScheme,
    MatterOperator, PotentialSpec,
};
use trk_core::qed::{self, FockSpec};
use trk_core::sumrule::{self, ReferenceChoice, SpectralDensity, SumRuleReport, ZoneSumOptions};
use trk_core::C64;
use trk_lab::{parse_config, run_job};

struct Outcome {
    criterion: u32,
    pass: bool,
    detail: String,
}

fn report(criterion: u32, pass: bool, detail: String) -> Outcome {
    println!(
        "criterion {criterion} ... {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    Outcome {
        criterion,
        pass,
        detail,
    }
}

fn oscillator(x: f64, n: usize, scheme: KineticScheme) -> (MatterOperator, MatterOperator) {
    let grid = GridBasis::new(-x, x, n).unwrap();
    let h = model::build_grid_hamiltonian(&grid, &PotentialSpec::Harmonic { omega: 1.0 }, scheme).unwrap();
    (h, model::build_dipole(&grid, ElectronCount::ONE).unwrap())
}

fn moment_gap(r: &SumRuleReport) -> f64 {
    (sumrule::first_moment(&SpectralDensity::from_report(r)) - r.value).abs()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    // truncated ladder basis: x_{n,n+1} = √((n+1)/2ω)
    let w = 1.3;
    let levels = 12;
    let energies: Vec<f64> = (0..levels).map(|n| (n as f64 + 0.5) * w).collect();
    let x = Array2::from_shape_fn((levels, levels), |(i, j)| {
        let k = i.min(j);
        if i.abs_diff(j) == 1 {
            C64::new(((k + 1) as f64 / (2.0 * w)).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let ladder = FewLevelModel::new(energies, x).unwrap();
    let lad = sumrule::static_trk(&ladder.hamiltonian(), &ladder.dipole(), 0, ElectronCount::ONE).unwrap();
    let single_term = lad.contributions.iter().filter(|c| c.weight.abs() > 1e-14).count() == 1;

    let (h, d) = oscillator(10.0, 201, KineticScheme::ThreePoint);
    let coarse = sumrule::static_trk(&h, &d, 0, ElectronCount::ONE).unwrap();
    let (h, d) = oscillator(10.0, 401, KineticScheme::ThreePoint);
    let fine = sumrule::static_trk(&h, &d, 0, ElectronCount::ONE).unwrap();
    let ratio = (coarse.value - 1.0).abs() / (fine.value - 1.0).abs();
    let secs = t.elapsed().as_secs_f64();
    let pass = (lad.value - 1.0).abs() < 1e-12
        && single_term
        && coarse.relative_oracle_error() < 1e-8
        && (coarse.value - 1.0).abs() <= 1e-2
        && (3.5..=4.5).contains(&ratio)
        && secs < 10.0;
    report(
        1,
        pass,
        format!(
            "ladder={:.15} grid value={:.10} oracle_rel={:.2e} halving ratio={ratio:.4} ({secs:.1}s)",
            lad.value,
            coarse.value,
            coarse.relative_oracle_error()
        ),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let grid = GridBasis::new(-8.0, 8.0, 32).unwrap();
    let coulomb = Interaction::SoftCoulomb {
        strength: 1.0,
        softening: 1.0,
    };
    let h = model::build_two_electron_hamiltonian(
        &grid,
        &PotentialSpec::Harmonic { omega: 1.0 },
        coulomb,
        KineticScheme::SincDvr,
    )
    .unwrap();
    let d = model::build_dipole(&grid, ElectronCount::TWO).unwrap();
    let r = sumrule::static_trk(&h, &d, 0, ElectronCount::TWO).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let pass = r.relative_oracle_error() < 1e-8 && (r.value - 2.0).abs() <= 2e-2 && secs < 120.0;
    report(
        2,
        pass,
        format!(
            "dim={} value={:.10} oracle_rel={:.2e} ({secs:.1}s)",
            h.dim(),
            r.value,
            r.relative_oracle_error()
        ),
    )
}

struct DrivenRow {
    n_h: usize,
    sambe_dim: usize,
    zone: SumRuleReport,
    sambe: SumRuleReport,
    max_edge: f64,
    secs: f64,
}

fn driven_family() -> Vec<DrivenRow> {
    // Δx = 0.1 with 130 points
    let (h, d) = oscillator(6.45, 130, KineticScheme::ThreePoint);
    let drive = DriveSpec::monochromatic(0.35, 0.05).unwrap();
    [6, 8, 10, 12]
        .into_iter()
        .map(|n_h| {
            let t = Instant::now();
            let run = sumrule::driven_sum_rules(
                &h,
                &d,
                &drive,
                n_h,
                ElectronCount::ONE,
                ReferenceChoice::Auto,
                ZoneSumOptions::default(),
            )
            .unwrap();
            let max_edge = run
                .solution
                .zone
                .representatives
                .iter()
                .map(|m| m.edge_weight())
                .fold(0.0, f64::max);
            DrivenRow {
                n_h,
                sambe_dim: run.solution.matrix.dim(),
                zone: run.zone,
                sambe: run.sambe,
                max_edge,
                secs: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn criterion_3(rows: &[DrivenRow]) -> Outcome {
    let row = rows.iter().find(|r| r.n_h == 10).unwrap();
    let err = row.sambe.relative_oracle_error();
    let pass = err < 1e-8 && row.secs < 120.0;
    report(
        3,
        pass,
        format!(
            "N_h=10 dim={} sambe={:.12} oracle={:.12} rel={err:.2e} ({:.1}s)",
            row.sambe_dim, row.sambe.value, row.sambe.oracle_value, row.secs
        ),
    )
}

fn criterion_4(rows: &[DrivenRow]) -> Outcome {
    let gaps: Vec<f64> = rows.iter().map(|r| (r.zone.value - r.sambe.value).abs()).collect();
    // converged by the cutoff policy: zone residual moved by < 1e-6 from the previous cutoff
    let converged = rows
        .windows(2)
        .position(|w| (w[1].zone.residual - w[0].zone.residual).abs() < 1e-6)
        .map(|i| i + 1);
    let close = converged.is_some_and(|i| gaps[i] < 1e-4);
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let table: Vec<String> = rows
        .iter()
        .zip(&gaps)
        .map(|(r, g)| format!("N_h={}: gap={g:.3e} max_edge={:.3e}", r.n_h, r.max_edge))
        .collect();
    report(
        4,
        close && monotone,
        format!(
            "converged at N_h={} within 1e-4: {close}; monotone: {monotone}; {}",
            converged.map_or("-".to_string(), |i| rows[i].n_h.to_string()),
            table.join(", ")
        ),
    )
}

const ZERO_DRIVE: &str = r#"
job_kind = "floquet"
[model.grid]
x_min = -5.0
x_max = 5.0
n_points = 41
[model.potential]
kind = "harmonic"
omega = 1.0
[drive]
omega = 1000.0
components = [{ amplitude = 0.0 }]
[sambe]
harmonic_cutoff = 2
"#;

fn criterion_5() -> (Outcome, Vec<f64>) {
    let out = run_job(&parse_config(ZERO_DRIVE).unwrap()).unwrap();
    let point = &out.points[0];
    let stat = point.sum("static_trk").unwrap();
    let zone = point.sum("sumrule_ffbz").unwrap();
    let side = zone
        .contributions
        .iter()
        .filter(|c| c.n != 0)
        .map(|c| c.weight.abs())
        .fold(0.0, f64::max);
    let diff = (zone.value - stat.value).abs();
    let moment = (sumrule::first_moment(point.spectral_density.as_ref().unwrap()) - zone.value).abs();
    let gaps = vec![moment, moment_gap(zone), moment_gap(point.sum("sumrule_sambe").unwrap())];
    (
        report(
            5,
            diff < 1e-10 && side < 1e-12,
            format!("|zone − static|={diff:.2e} max n≠0 weight={side:.2e}"),
        ),
        gaps,
    )
}

fn criterion_6() -> (Outcome, Vec<f64>) {
    let four = FewLevelModel::new(
        vec![0.0, 0.7, 1.3, 1.9],
        Array2::from_shape_fn((4, 4), |(i, j)| {
            C64::new(if i == j { 0.0 } else { 0.3 + 0.1 * (i + j) as f64 }, 0.0)
        }),
    )
    .unwrap();
    let cases = [
        ("two-level", FewLevelModel::two_level(1.0, 0.8).unwrap(), 1.0, 1.0, 0.8),
        ("four-level", four, 1.9, 0.6, 0.8),
    ];
    let mut worst = 0.0_f64;
    let mut gaps = Vec::new();
    let mut parts = Vec::new();
    for (name, m, span, gap, mu) in cases {
        let drive = DriveSpec::monochromatic(10.0 * span, 1e-3 * gap / mu).unwrap();
        let run = sumrule::driven_sum_rules(
            &m.hamiltonian(),
            &m.dipole(),
            &drive,
            8,
            ElectronCount::ONE,
            ReferenceChoice::Auto,
            ZoneSumOptions::default(),
        )
        .unwrap();
        let frac = run.zone.sideband_fraction();
        worst = worst.max(frac);
        gaps.push(moment_gap(&run.zone));
        gaps.push(moment_gap(&run.sambe));
        parts.push(format!("{name}: n≠0 fraction={frac:.2e}"));
    }
    (report(6, worst < 1e-6, parts.join(", ")), gaps)
}

fn criterion_7(gaps: &[f64]) -> Outcome {
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    report(
        7,
        worst < 1e-10,
        format!("{} runs, max |first_moment − value|={worst:.2e}", gaps.len()),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let rabi = FewLevelModel::two_level(1.0, 1.0).unwrap();
    let mut rabi_worst = 0.0_f64;
    for g in [0.01, 0.1, 0.5, 1.0, 2.0] {
        let fock = FockSpec::new(24, 1.0, g).unwrap();
        let run = qed::run_qed(&rabi.hamiltonian(), &rabi.dipole(), &fock, 0, ElectronCount::ONE).unwrap();
        rabi_worst = rabi_worst.max(run.report.relative_oracle_error());
    }

    let (h, d) = oscillator(5.0, 101, KineticScheme::ThreePoint);
    let family = [4, 8, 16];
    let strong = qed::photon_cutoff_convergence(
        &h,
        &d,
        &FockSpec::new(0, 1.2, 0.05).unwrap(),
        &family,
        0,
        ElectronCount::ONE,
    )
    .unwrap();
    let grid_worst = strong
        .rows
        .iter()
        .map(|r| r.oracle_residual.abs() / r.value.abs().max(1.0))
        .fold(0.0, f64::max);
    let value = strong.rows.last().unwrap().value;
    let weak = qed::photon_cutoff_convergence(
        &h,
        &d,
        &FockSpec::new(0, 1.2, 0.01).unwrap(),
        &family,
        0,
        ElectronCount::ONE,
    )
    .unwrap();
    // changes below this are accumulated rounding in sums of ~1700 terms
    let floor = 1e-12;
    let monotone = weak.delta_monotone(floor);
    let deltas: Vec<String> = weak
        .rows
        .iter()
        .filter_map(|r| r.delta)
        .map(|d| format!("{d:.2e}"))
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let pass = rabi_worst < 1e-8
        && grid_worst < 1e-8
        && strong.converged_at.is_some()
        && (value - 1.0).abs() <= 1e-2
        && monotone
        && secs < 120.0;
    report(
        8,
        pass,
        format!(
            "rabi oracle_rel={rabi_worst:.2e} grid oracle_rel={grid_worst:.2e} converged_at={:?} value={value:.10} \
             g=0.01 deltas=[{}] monotone={monotone} ({secs:.1}s)",
            strong.converged_at,
            deltas.join(", ")
        ),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[[i, j]] = z;
            m[[j, i]] = z.conj();
        }
    }
    m
}

fn driven_solution(rng: &mut ChaCha8Rng) -> (FloquetSolution, FewLevelModel) {
    let levels = rng.random_range(2..=4);
    let mut energies: Vec<f64> = (0..levels).map(|_| rng.random_range(0.0..3.0)).collect();
    energies.sort_by(f64::total_cmp);
    let mut dip = random_hermitian(rng, levels);
    dip.diag_mut().fill(C64::new(0.0, 0.0));
    let model = FewLevelModel::new(energies, dip).unwrap();
    let drive = DriveSpec::new(
        rng.random_range(0.4..2.0),
        vec![
            DriveComponent {
                harmonic: 1,
                amplitude: rng.random_range(0.0..0.3),
                phase: rng.random_range(-3.0..3.0),
            },
            DriveComponent {
                harmonic: 2,
                amplitude: rng.random_range(0.0..0.1),
                phase: rng.random_range(-3.0..3.0),
            },
        ],
    )
    .unwrap();
    let n_h = rng.random_range(4..=8);
    let sol = floquet::solve(&model.hamiltonian(), &model.dipole(), &drive, n_h, 1e-8).unwrap();
    (sol, model)
}

fn mode_at(sol: &FloquetSolution, k: usize) -> FloquetMode {
    FloquetMode::from_sambe_vector(
        sol.spectrum.values[k],
        sol.spectrum.vector(k),
        sol.matrix.spec(),
        sol.matrix.omega(),
    )
    .unwrap()
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let mut closure = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=64);
        let h = MatterOperator::new(random_hermitian(&mut rng, n), "random").unwrap();
        let d = MatterOperator::new(random_hermitian(&mut rng, n), "random").unwrap();
        let spectrum = linalg::diagonalize_hermitian(h.matrix()).unwrap();
        for alpha in 0..n {
            let r = sumrule::static_trk_with_spectrum(&h, &d, &spectrum, alpha, ElectronCount::ONE).unwrap();
            closure = closure.max(r.relative_oracle_error());
        }
    }

    let mut fourier = 0.0_f64;
    for _ in 0..100 {
        let (sol, model) = driven_solution(&mut rng);
        let d = model.dipole();
        let n = sol.spectrum.len();
        let a = mode_at(&sol, rng.random_range(0..n));
        let b = mode_at(&sol, rng.random_range(0..n));
        let ab = sumrule::dipole_fourier_components(&a, &b, &d).unwrap();
        let ba = sumrule::dipole_fourier_components(&b, &a, &d).unwrap();
        let phi_a: Array1<C64> = a.coefficient_blocks().sum_axis(Axis(0));
        let phi_b: Array1<C64> = b.coefficient_blocks().sum_axis(Axis(0));
        let direct = linalg::inner(phi_a.view(), d.matrix().dot(&phi_b).view());
        fourier = fourier.max((ab.total() - direct).norm());
        for (k, z) in ab.iter() {
            fourier = fourier.max((z - ba.get(-k).conj()).norm());
        }
    }

    let mut replica = 0.0_f64;
    let mut replica_cases = 0;
    for _ in 0..100 {
        let (sol, _) = driven_solution(&mut rng);
        let gamma = sol.matrix.matrix().to_owned();
        for k in 0..sol.spectrum.len() {
            let mode = mode_at(&sol, k);
            let nh = mode.harmonic_cutoff() as i64;
            if !(nh - 2..=nh).chain(-nh..=-nh + 2).all(|row| mode.block_weight(row) < 1e-12) {
                continue;
            }
            for shift in -2..=2 {
                let v = floquet::shift_replica(&mode, shift).to_sambe_vector();
                let q = linalg::inner(v.view(), gamma.dot(&v).view()).re / linalg::norm_sqr(v.view());
                let want = mode.quasienergy() + shift as f64 * mode.omega();
                replica = replica.max((q - want).abs() / want.abs().max(1.0));
                replica_cases += 1;
            }
        }
    }

    let mut folding_ok = true;
    for _ in 0..1000 {
        let eps = rng.random_range(-1e3..1e3);
        let omega = rng.random_range(1e-2..10.0);
        let label = floquet::fold_quasienergy(eps, omega);
        let back = label.epsilon_folded + label.n_shift as f64 * omega;
        folding_ok &= floquet::in_zone(label.epsilon_folded, omega) && (back - eps).abs() < 1e-9 * (1.0 + eps.abs());
    }

    let secs = t.elapsed().as_secs_f64();
    let pass = closure < 1e-10 && fourier < 1e-12 && replica_cases > 0 && replica <= 1e-6 && folding_ok;
    report(
        9,
        pass,
        format!(
            "closure max_rel={closure:.2e} fourier max={fourier:.2e} replica max_rel={replica:.2e} \
             over {replica_cases} shifts, folding unique: {folding_ok} ({secs:.1}s)"
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut outcomes = vec![criterion_1(), criterion_2()];
    let rows = driven_family();
    let mut gaps: Vec<f64> = rows
        .iter()
        .flat_map(|r| [moment_gap(&r.zone), moment_gap(&r.sambe)])
        .collect();
    outcomes.push(criterion_3(&rows));
    outcomes.push(criterion_4(&rows));
    drop(rows);
    let (c5, g5) = criterion_5();
    let (c6, g6) = criterion_6();
    outcomes.extend([c5, c6]);
    gaps.extend(g5);
    gaps.extend(g6);
    outcomes.push(criterion_7(&gaps));
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());
    outcomes.sort_by_key(|o| o.criterion);

    let total = start.elapsed().as_secs_f64();
    let failed: Vec<&Outcome> = outcomes.iter().filter(|o| !o.pass).collect();
    println!(
        "acceptance: {} of {} criteria pass ({total:.0}s total)",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    for o in &failed {
        println!("  failed criterion {}: {}", o.criterion, o.detail);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
