//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL` line to
//! stderr (uncaptured) and then asserts the same checks.

use darkmode::codes::{self, LogicalBasis};
use darkmode::dynamics::{
    self, coupling_hamiltonian, langevin_solve, LindbladSolver, LinearModes, SystemParams, TimeGrid,
};
use darkmode::errorbudget::{self, BudgetParams};
use darkmode::hilbert::{coherent_state, ladder, make_space, QuantumState};
use darkmode::linalg;
use darkmode::protocol::{
    self, apply_kerr_phase, bell_fidelity, kerr_absorbing_basis, run_dmm, teleport_cardinal, CheckOutcome,
    DmmOptions, NoiseFlags, TeleportKnobs, VacuumCheckModel,
};
use darkmode::scenario::{run_scenario, Scenario, ScenarioConfig};
use darkmode::tomography::{self, Axis, BasisTarget, GridSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::{SQRT_2, TAU};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

struct Report {
    id: u32,
    checks: Vec<(String, bool)>,
}

impl Report {
    fn new(id: u32) -> Self {
        Self { id, checks: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push((label.into(), ok));
    }

    fn finish(self) {
        let ok = self.checks.iter().all(|c| c.1);
        let detail: Vec<String> =
            self.checks.iter().map(|(l, p)| format!("[{}] {l}", if *p { "ok" } else { "FAIL" })).collect();
        let line = format!("criterion {}: {} | {}\n", self.id, if ok { "PASS" } else { "FAIL" }, detail.join("; "));
        let _ = std::io::stderr().write_all(line.as_bytes());
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        assert!(failed.is_empty(), "criterion {} failed: {}", self.id, failed.join("; "));
    }
}

fn ideal_params(kappa_hz: f64) -> SystemParams {
    let mut p = SystemParams::lossless_cavities();
    p.kappa_b = TAU * kappa_hz;
    p.t_dump = dynamics::settle_time(p.g1, p.kappa_b, 1e-7).unwrap();
    p
}

fn ideal_run(kappa_hz: f64, alpha: f64) -> protocol::DmmOutcome {
    run_dmm(&ideal_params(kappa_hz), alpha, &VacuumCheckModel::ideal(), &NoiseFlags::ideal(), &DmmOptions::default())
        .unwrap()
}

fn error_model_run(alpha: f64) -> protocol::DmmOutcome {
    let noise = NoiseFlags { cavity_loss: true, kerr: false, p_decode: 0.017 };
    run_dmm(&SystemParams::default(), alpha, &VacuumCheckModel::reference(), &noise, &DmmOptions::default()).unwrap()
}

fn pure_dark_state(alpha: f64, d: usize) -> QuantumState {
    let v = codes::ideal_dark_state(alpha, d, d);
    let s = make_space(&[d, d], &["a1", "a2"]).unwrap();
    QuantumState::density(&s, &v * v.adjoint()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_1_dark_state_immunity() {
    let mut r = Report::new(1);
    let start = Instant::now();
    let fids: Vec<f64> = [160e3, 600e3, 905e3, 2000e3].iter().map(|&k| ideal_run(k, SQRT_2).bell_fidelity).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let min = fids.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = fids.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    r.check(format!("min F = {min:.9} >= 1 - 1e-6"), min >= 1.0 - 1e-6);
    r.check(format!("spread {:.2e} < 1e-6", max - min), max - min < 1e-6);
    r.check(format!("runtime {elapsed:.2} s < 120 s"), elapsed < 120.0);
    r.finish();
}

#[test]
fn criterion_2_success_probability() {
    let mut r = Report::new(2);
    for alpha in [0.5, 1.0, 1.414, 2.0] {
        let sim = ideal_run(600e3, alpha).p_pass;
        let formula = protocol::success_probability(alpha);
        r.check(format!("α={alpha}: simulated {sim:.6} vs formula {formula:.6}"), (sim - formula).abs() <= 1e-6);
    }
    let at_sqrt2 = protocol::success_probability(SQRT_2);
    r.check(format!("formula at √2 = {at_sqrt2:.6} ≈ 0.3738"), (at_sqrt2 - 0.3738).abs() < 5e-5);
    r.finish();
}

fn bright_init() -> [C64; 3] {
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    [s, C64::from(0.0), s]
}

/// Dominant quadrature of the bus amplitude.
fn bus_quadrature(b: &[C64]) -> Vec<f64> {
    let re = b.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let im = b.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    b.iter().map(|z| if re >= im { z.re } else { z.im }).collect()
}

/// Linearly interpolated sign changes after the first sample.
fn zero_crossings(t: &[f64], x: &[f64]) -> Vec<f64> {
    (2..x.len())
        .filter(|&i| x[i - 1] * x[i] < 0.0)
        .map(|i| t[i - 1] + (t[i] - t[i - 1]) * x[i - 1] / (x[i - 1] - x[i]))
        .collect()
}

fn bus_oscillates(g: f64, kappa: f64, window: f64) -> bool {
    let grid = TimeGrid::with_steps(0.0, window, 6000).unwrap();
    let tr = langevin_solve(g, 0.0, kappa, bright_init(), &grid);
    !zero_crossings(&tr.times, &bus_quadrature(&tr.b)).is_empty()
}

#[test]
fn criterion_3_damping_regimes() {
    let mut r = Report::new(3);
    let g = SystemParams::default().g1;

    let grid = TimeGrid::with_steps(0.0, 20e-6, 20_000).unwrap();
    let tr = langevin_solve(g, 0.0, TAU * 160e3, bright_init(), &grid);
    let zeros = zero_crossings(&tr.times, &bus_quadrature(&tr.b));
    let omega = if zeros.len() >= 2 {
        std::f64::consts::PI * (zeros.len() - 1) as f64 / (zeros[zeros.len() - 1] - zeros[0])
    } else {
        0.0
    };
    r.check(
        format!("underdamped ω = {:.2} kHz vs √2g = {:.2} kHz", omega / TAU / 1e3, SQRT_2 * g / TAU / 1e3),
        rel(omega, SQRT_2 * g) <= 0.02,
    );

    let (mut lo, mut hi) = (TAU * 700e3, TAU * 1100e3);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if bus_oscillates(g, mid, 30e-6) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let critical = 0.5 * (lo + hi);
    r.check(
        format!("critical κ_b = {:.1} kHz vs 4√2g = {:.1} kHz", critical / TAU / 1e3, 4.0 * SQRT_2 * g / TAU / 1e3),
        rel(critical, 4.0 * SQRT_2 * g) <= 0.02,
    );

    let kappa = TAU * 2000e3;
    let grid = TimeGrid::with_steps(0.0, 20e-6, 4000).unwrap();
    let tr = langevin_solve(g, 0.0, kappa, bright_init(), &grid);
    let bright = tr.bright();
    let pts: Vec<(f64, f64)> =
        tr.times.iter().zip(&bright).filter(|(t, _)| **t >= 5e-6).map(|(t, z)| (*t, z.norm().ln())).collect();
    let n = pts.len() as f64;
    let (mt, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
    let rate = -slope;
    let expected = 2.0 * g * g / kappa;
    r.check(
        format!("overdamped rate {:.2} kHz vs 2g²/κ_b = {:.2} kHz", rate / TAU / 1e3, expected / TAU / 1e3),
        rel(rate, expected) <= 0.02,
    );

    let kappa = TAU * 600e3;
    let space = make_space(&[5, 5, 5], &["a1", "b", "a2"]).unwrap();
    let a0 = [C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.05)];
    let rho0 = coherent_state(&space, &a0).unwrap().to_density();
    let h = coupling_hamiltonian(&space, g, g).unwrap();
    let lb = ladder(&space, 1).unwrap().0.scale(C64::from(kappa.sqrt()));
    let solver = LindbladSolver::new(&h, &[lb]).unwrap();
    let t = 1.5e-6;
    let rho = QuantumState::density(&space, solver.evolve(&rho0, t, 1e-9).unwrap()).unwrap();
    let classical = LinearModes::protocol(g, g, 0.0, kappa, 0.0).evolve(&DVector::from_vec(a0.to_vec()), t);
    let worst = (0..3)
        .map(|m| (ladder(&space, m).unwrap().0.expectation(&rho).unwrap() - classical[m]).norm())
        .fold(0.0, f64::max);
    r.check(format!("quantum/classical ⟨a⟩ mismatch {worst:.2e} <= 1e-6"), worst <= 1e-6);
    r.finish();
}

#[test]
fn criterion_4_transfer_efficiency() {
    let mut r = Report::new(4);
    let p = SystemParams::default();
    let res = dynamics::transfer_efficiency(p.g1, p.kappa_b, 3e-6).unwrap();
    r.check(format!("t1 = {:.1} ns", res.t1 * 1e9), (res.t1 * 1e9 - 1016.0).abs() <= 25.0);
    r.check(format!("t2 = {:.1} ns", res.t2 * 1e9), (res.t2 * 1e9 - 1016.0).abs() <= 25.0);
    r.check(format!("η = {:.4}", res.eta), (res.eta - 0.022).abs() <= 0.002);
    let lossless = dynamics::transfer_efficiency(p.g1, 0.0, 3e-6).unwrap();
    r.check(format!("κ_b = 0: η = {:.9}", lossless.eta), lossless.eta >= 1.0 - 1e-6);
    r.finish();
}

#[test]
fn criterion_5_error_model_fidelity() {
    let mut r = Report::new(5);
    let model = VacuumCheckModel::reference();
    let gg = (CheckOutcome::G, CheckOutcome::G);
    let p0 = (-2.0f64).exp();
    let occ = [(true, 1.0 - p0), (false, p0)];
    let p_dark: f64 =
        occ.iter().flat_map(|a| occ.iter().map(move |b| a.1 * b.1 * model.likelihood(gg, (a.0, b.0)))).sum();
    let f_dmm = protocol::dmm_false_positive(model.likelihood(gg, (false, false)), p_dark);
    r.check(format!("confusion model F_DMM = {f_dmm:.4}"), (f_dmm - 0.021).abs() < 5e-4);

    let o = error_model_run(1.414);
    let fit = tomography::optimize_basis(&o.rho_pass, o.basis_used, 0.017, BasisTarget::Cavity1).unwrap();
    r.check(format!("simulated F = {:.4} (optimized basis) in [0.90, 0.94]", fit.fidelity), (0.90..=0.94).contains(&fit.fidelity));

    let bp = BudgetParams::default();
    let total = errorbudget::predicted_infidelity(1.414, &bp).total;
    r.check(format!("budget total = {total:.4}"), (total - 0.088).abs() <= 0.005);
    let opt = errorbudget::optimum_alpha(&bp, 0.5, 2.5).unwrap();
    r.check(format!("budget optimum α = {:.4}", opt.alpha), (opt.alpha - 1.09).abs() <= 0.03);
    r.finish();
}

#[test]
fn criterion_6_teleportation() {
    let mut r = Report::new(6);
    let p = ideal_params(600e3);
    let o = ideal_run(600e3, SQRT_2);
    let (res, avg) = teleport_cardinal(&o.rho_pass, &o.basis_used.0, &o.basis_used.1, &p, &TeleportKnobs::ideal()).unwrap();
    let worst = res.iter().flat_map(|t| t.per_outcome_fidelity).fold(1.0, f64::min);
    r.check(format!("ideal: worst per-outcome F = {worst:.9}, average {avg:.9}"), worst >= 1.0 - 1e-6 && avg >= 1.0 - 1e-6);

    let o = error_model_run(1.414);
    let fit = tomography::optimize_basis(&o.rho_pass, o.basis_used, 0.017, BasisTarget::Cavity1).unwrap();
    let (res, avg) =
        teleport_cardinal(&o.rho_pass, &fit.basis1, &fit.basis2, &SystemParams::default(), &TeleportKnobs::reference())
            .unwrap();
    r.check(format!("error model: F_QST avg = {avg:.4} in [0.88, 0.92]"), (0.88..=0.92).contains(&avg));
    let probs: Vec<f64> = res.iter().flat_map(|t| t.outcome_probs).collect();
    let dev = probs.iter().map(|q| (q - 0.25).abs()).fold(0.0, f64::max);
    r.check(format!("outcome probabilities within {dev:.4} of 0.25"), dev <= 0.005);
    r.finish();
}

fn pad(rho: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    let n = rho.nrows().min(dim);
    out.view_mut((0, 0), (n, n)).copy_from(&rho.view((0, 0), (n, n)));
    out
}

#[test]
fn criterion_7_tomography_round_trip() {
    let mut r = Report::new(7);
    let alpha = 1.414;
    let o = error_model_run(alpha);
    let branch = &tomography::conditional_decomposition(&o.rho_pass, &o.basis_used.1, Axis::X, 0.017).unwrap()[0];
    let d = branch.rho1.nrows();
    let state = QuantumState::density(&make_space(&[d], &["a1"]).unwrap(), branch.rho1.clone()).unwrap();
    let grid = GridSpec::square(2.5, 41);
    let exact = tomography::wigner_map(&state, 0, &grid).unwrap();
    let dim = 10usize.max(d);
    let fid = |rho: &DMatrix<C64>| linalg::uhlmann_fidelity(&pad(&branch.rho1, dim), &pad(rho, dim));
    let noiseless = fid(&tomography::mle_density(&exact, 10, true).unwrap().rho);
    r.check(format!("noiseless MLE F = {noiseless:.4} >= 0.99"), noiseless >= 0.99);
    let sampled = tomography::sample_wigner(&exact, 10_000, 2024).unwrap();
    let f_sampled = fid(&tomography::mle_density(&sampled, 10, true).unwrap().rho);
    r.check(format!("10^4-shot MLE F = {f_sampled:.4} >= 0.97"), f_sampled >= 0.97);

    let dc = protocol::default_cavity_dim(alpha);
    let theta = 0.3;
    let k = 1.0e4;
    let kerred = apply_kerr_phase(&pure_dark_state(alpha, dc), k, k, theta / k).unwrap();
    let plain = (LogicalBasis::plain(alpha).unwrap(), LogicalBasis::plain(alpha).unwrap());
    let kfit = tomography::optimize_basis(&kerred, plain, 0.0, BasisTarget::Both).unwrap();
    let err = (codes::wrap_angle(kfit.basis1.theta_k + theta)).abs().max(codes::wrap_angle(kfit.basis2.theta_k + theta).abs());
    r.check(format!("injected θ_K = −{theta} recovered to {err:.1e}"), err <= 1e-3);

    let afit = tomography::optimize_basis(&o.rho_pass, o.basis_used, 0.017, BasisTarget::Cavity1).unwrap();
    let a_basis = afit.basis1.alpha.norm();
    r.check(format!("α_basis = {a_basis:.4} vs 1.33 ± 0.02"), (a_basis - 1.33).abs() <= 0.02);
    r.finish();
}

#[test]
fn criterion_8_dual_rail() {
    let mut r = Report::new(8);
    let res = protocol::dual_rail_dmm(&SystemParams::default(), None).unwrap();
    r.check(format!("steady trace distance {:.2e} <= 1e-3", res.steady_distance), res.steady_distance <= 1e-3);
    r.check(format!("p_distill = {:.6}", res.p_distill), (res.p_distill - 0.125).abs() <= 1e-3);
    r.check(format!("distilled F = {:.9}", res.distilled_fidelity), res.distilled_fidelity >= 1.0 - 1e-6);
    r.finish();
}

#[test]
fn criterion_9_multiround() {
    let mut r = Report::new(9);
    let s = protocol::multiround_stats(1.0 / 2.6, 8.85e-6, 0.0).unwrap();
    r.check(format!("mean wait {:.3} µs", s.mean_wait * 1e6), (s.mean_wait * 1e6 - 23.0).abs() <= 0.5);
    r.check(format!("rate {:.3} kHz", s.rate / 1e3), (s.rate / 1e3 - 43.0).abs() <= 1.0);
    r.finish();
}

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("darkmode-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn csv_bytes(dir: &PathBuf) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    files.iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap())).collect()
}

#[test]
fn criterion_10_property_suites() {
    let mut r = Report::new(10);
    let p = SystemParams::default();
    let space = make_space(&[4, 4, 4], &["a1", "b", "a2"]).unwrap();
    let a0 = [C64::new(0.4, 0.1), C64::new(0.0, 0.2), C64::new(-0.3, 0.0)];
    let rho0 = coherent_state(&space, &a0).unwrap().to_density();
    let h = coupling_hamiltonian(&space, p.g1, p.g2).unwrap();
    let (ka1, ka2) = p.kappa_a();
    let collapses = vec![
        ladder(&space, 0).unwrap().0.scale(C64::from(ka1.sqrt())),
        ladder(&space, 1).unwrap().0.scale(C64::from(p.kappa_b.sqrt())),
        ladder(&space, 2).unwrap().0.scale(C64::from(ka2.sqrt())),
    ];
    let solver = LindbladSolver::new(&h, &collapses).unwrap().with_max_rate(p.max_rate());
    let t = 2e-6;
    let h0 = solver.step_size(f64::INFINITY);
    let coarse = solver.evolve(&rho0, t, h0).unwrap();
    let fine = solver.evolve(&rho0, t, 0.5 * h0).unwrap();
    let drift = (linalg::trace(&coarse).re - 1.0).abs().max((linalg::trace(&fine).re - 1.0).abs());
    r.check(format!("Lindblad trace drift {drift:.1e} <= 1e-8"), drift <= 1e-8);
    let doubling = linalg::max_abs(&(&coarse - &fine));
    r.check(format!("step-doubling difference {doubling:.1e} <= 1e-7"), doubling <= 1e-7);

    let mode = make_space(&[12], &["a"]).unwrap();
    let v1 = darkmode::hilbert::cat_vector(12, C64::new(1.2, 0.3), 1.0);
    let v2 = darkmode::hilbert::fock_vector(12, 3);
    let (m1, m2) = (&v1 * v1.adjoint(), &v2 * v2.adjoint());
    let w = 0.35;
    let mix = &m1 * C64::from(w) + &m2 * C64::from(1.0 - w);
    let grid = GridSpec::square(2.0, 21);
    let wm = |m: &DMatrix<C64>| tomography::wigner_map(&QuantumState::density(&mode, m.clone()).unwrap(), 0, &grid).unwrap().values;
    let lin = (wm(&mix) - (wm(&m1) * w + wm(&m2) * (1.0 - w))).abs().max();
    r.check(format!("Wigner linearity error {lin:.1e} <= 1e-12"), lin <= 1e-12);

    let alpha = SQRT_2;
    let dc = protocol::default_cavity_dim(alpha);
    let dark = pure_dark_state(alpha, dc);
    let t_k = 12e-6;
    let f0 = bell_fidelity(&dark, &LogicalBasis::plain(alpha).unwrap(), &LogicalBasis::plain(alpha).unwrap()).unwrap();
    let kerred = apply_kerr_phase(&dark, p.k1, p.k2, t_k).unwrap();
    let f1 = bell_fidelity(
        &kerred,
        &kerr_absorbing_basis(alpha, p.k1, t_k).unwrap(),
        &kerr_absorbing_basis(alpha, p.k2, t_k).unwrap(),
    )
    .unwrap();
    r.check(format!("Kerr-absorption identity |ΔF| = {:.1e} <= 1e-9", (f1 - f0).abs()), (f1 - f0).abs() <= 1e-9);

    let mut identical = true;
    for scenario in [Scenario::TomoDemo, Scenario::ErrorBudget] {
        let run = |tag: &str, threads: usize| {
            let dir = scratch_dir(&format!("{}-{tag}", scenario.name()));
            let cfg = ScenarioConfig {
                scenario: Some(scenario),
                seed: Some(11),
                out: Some(dir.clone()),
                threads: Some(threads),
                ..ScenarioConfig::default()
            };
            run_scenario(&cfg).unwrap();
            let bytes = csv_bytes(&dir);
            let _ = std::fs::remove_dir_all(&dir);
            bytes
        };
        let first = run("a", 2);
        identical &= !first.is_empty() && first == run("b", 2) && first == run("c", 1);
    }
    r.check("seeded CSV reruns byte-identical", identical);
    r.finish();
}
