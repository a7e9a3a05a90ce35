use super::config::{Scenario, ScenarioConfig};
use super::{num, Table};
use crate::codes::LogicalBasis;
use crate::dynamics::{classify_regime, langevin_solve, transfer_efficiency, SystemParams, TimeGrid};
use crate::error::{DmmError, DmmResult};
use crate::errorbudget::{self, BudgetParams};
use crate::hilbert::{make_space, QuantumState};
use crate::linalg;
use crate::protocol::{self, run_dmm, teleport_cardinal, TeleportKnobs};
use crate::tomography::{self, Axis, BasisTarget, GridSpec, CSV_HEADER_COUNTS};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

pub(super) fn run(scenario: Scenario, cfg: &ScenarioConfig) -> DmmResult<Vec<Table>> {
    let params = cfg.params()?;
    match scenario {
        Scenario::Regimes => regimes(cfg, &params),
        Scenario::TransferEfficiency => transfer(cfg, &params),
        Scenario::PhaseSweep => phase_sweep(cfg, &params),
        Scenario::Entangle => entangle(cfg, &params),
        Scenario::AlphaSweep => alpha_sweep(cfg, &params),
        Scenario::Teleport => teleport(cfg, &params),
        Scenario::TomoDemo => tomo_demo(cfg, &params),
        Scenario::DualRail => dual_rail(cfg, &params),
        Scenario::ErrorBudget => error_budget(cfg, &params),
        Scenario::Multiround => multiround(cfg),
    }
}

fn regimes(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let s = &cfg.sweep;
    if s.regimes_points < 2 {
        return Err(DmmError::config("sweep.regimes_points must be at least 2"));
    }
    let grid = TimeGrid::with_steps(0.0, s.regimes_t_max * 1e-6, s.regimes_points - 1)?;
    let g = params.g1;
    let blocks: Vec<DmmResult<Vec<Vec<String>>>> = s
        .kappa_list
        .par_iter()
        .map(|&k_hz| {
            let kappa = TAU * k_hz;
            let regime = classify_regime(g, kappa)?;
            let init = [C64::from(FRAC_1_SQRT_2), C64::from(0.0), C64::from(FRAC_1_SQRT_2)];
            let tr = langevin_solve(g, 0.0, kappa, init, &grid);
            let bright = tr.bright();
            Ok(tr
                .times
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    vec![num(k_hz), regime.to_string(), num(t * 1e6), num(bright[i].norm_sqr()), num(tr.b[i].norm_sqr())]
                })
                .collect())
        })
        .collect();
    let mut t = Table::new("regimes", &["kappa_b_hz", "regime", "t_us", "bright_pop", "bus_pop"]);
    for b in blocks {
        for r in b? {
            t.push(r);
        }
    }
    Ok(vec![t])
}

fn transfer(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let r = transfer_efficiency(params.g1, params.kappa_b, cfg.sweep.transfer_t_max * 1e-6)?;
    let mut t = Table::new("transfer_efficiency", &["g_hz", "kappa_b_hz", "t1_ns", "t2_ns", "eta"]);
    t.push(vec![num(params.g1 / TAU), num(params.kappa_b / TAU), num(r.t1 * 1e9), num(r.t2 * 1e9), num(r.eta)]);
    Ok(vec![t])
}

fn phase_sweep(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let s = &cfg.sweep;
    if s.phase_points < 2 || s.time_points < 2 {
        return Err(DmmError::config("phase and time grids need at least 2 points"));
    }
    let alpha = cfg.protocol.checked_alpha()?;
    let model = cfg.protocol.vacuum_model();
    let phis: Vec<f64> = (0..s.phase_points).map(|i| TAU * i as f64 / (s.phase_points - 1) as f64).collect();
    let times: Vec<f64> = (0..s.time_points).map(|j| s.phase_t_max * 1e-6 * j as f64 / (s.time_points - 1) as f64).collect();
    let blocks: Vec<DmmResult<Vec<Vec<String>>>> = phis
        .par_iter()
        .map(|&phi| {
            times
                .iter()
                .map(|&t| {
                    let p = protocol::coherent_pass_probability(params, alpha, phi, t, &model)?;
                    Ok(vec![num(phi), num(t * 1e6), num(1.0 - p)])
                })
                .collect()
        })
        .collect();
    let mut t = Table::new("phase_sweep", &["phi_rad", "t_us", "p_not_gg"]);
    for b in blocks {
        for r in b? {
            t.push(r);
        }
    }
    Ok(vec![t])
}

struct EntanglePoint {
    alpha: f64,
    outcome: protocol::DmmOutcome,
    bases: (LogicalBasis, LogicalBasis),
    f_opt: f64,
    correlations: tomography::PauliCorrelations,
    f_tomography: f64,
}

fn entangle_point(cfg: &ScenarioConfig, params: &SystemParams, alpha: f64) -> DmmResult<EntanglePoint> {
    let pc = &cfg.protocol;
    let outcome = run_dmm(params, alpha, &pc.vacuum_model(), &pc.noise(), &pc.options(alpha))?;
    let (bases, f_opt) = if pc.optimize_basis {
        let fit = tomography::optimize_basis(&outcome.rho_pass, outcome.basis_used, pc.p_decode, BasisTarget::Cavity1)?;
        ((fit.basis1, fit.basis2), fit.fidelity)
    } else {
        (outcome.basis_used, outcome.bell_fidelity)
    };
    let correlations = tomography::measure_correlations(&outcome.rho_pass, &bases.0, &bases.1, pc.p_decode)?;
    let f_tomography = tomography::singlet_fidelity(&tomography::logical_two_qubit(&correlations).rho);
    Ok(EntanglePoint { alpha, outcome, bases, f_opt, correlations, f_tomography })
}

fn entangle(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let p = entangle_point(cfg, params, cfg.protocol.checked_alpha()?)?;
    let o = &p.outcome;
    let b = &p.bases.0;
    let mut t = Table::new(
        "entangle",
        &[
            "alpha", "p_pass", "p_gg", "p_ge", "p_eg", "p_ee", "leakage", "f_bell", "f_bell_opt", "alpha_basis", "theta_k",
            "theta_r", "f_tomography",
        ],
    );
    t.push(vec![
        num(p.alpha),
        num(o.p_pass),
        num(o.outcome_probs[0]),
        num(o.outcome_probs[1]),
        num(o.outcome_probs[2]),
        num(o.outcome_probs[3]),
        num(o.leakage),
        num(o.bell_fidelity),
        num(p.f_opt),
        num(b.alpha.norm()),
        num(b.theta_k),
        num(b.theta_r + b.alpha.arg()),
        num(p.f_tomography),
    ]);
    let labels = ["I", "X", "Y", "Z"];
    let mut c = Table::new("pauli_correlations", &["cavity1", "cavity2", "value"]);
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            c.push(vec![li.to_string(), lj.to_string(), num(p.correlations.get(i, j))]);
        }
    }
    Ok(vec![t, c])
}

fn budget_params(cfg: &ScenarioConfig, params: &SystemParams) -> BudgetParams {
    BudgetParams {
        system: *params,
        t_protocol: cfg.sweep.budget_t_protocol * 1e-6,
        p_decode: cfg.protocol.p_decode,
        bright_leak: cfg.sweep.bright_leak,
    }
}

fn alpha_sweep(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    if cfg.protocol.alphas.is_empty() {
        return Err(DmmError::config("protocol.alphas is empty"));
    }
    let bp = budget_params(cfg, params);
    let points: Vec<DmmResult<EntanglePoint>> =
        cfg.protocol.alphas.par_iter().map(|&a| entangle_point(cfg, params, a)).collect();
    let mut t = Table::new(
        "alpha_sweep",
        &["alpha", "p_success", "p_formula", "f_bell", "f_bell_opt", "alpha_basis", "f_predicted"],
    );
    for p in points {
        let p = p?;
        t.push(vec![
            num(p.alpha),
            num(p.outcome.p_pass),
            num(protocol::success_probability(p.alpha)),
            num(p.outcome.bell_fidelity),
            num(p.f_opt),
            num(p.bases.0.alpha.norm()),
            num(errorbudget::predicted_infidelity(p.alpha, &bp).fidelity()),
        ]);
    }
    Ok(vec![t])
}

fn teleport(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let p = entangle_point(cfg, params, cfg.protocol.checked_alpha()?)?;
    let knobs = TeleportKnobs {
        p_decode: cfg.protocol.p_decode,
        cavity_loss: cfg.protocol.cavity_loss,
        ..TeleportKnobs::reference()
    };
    let (results, avg) = teleport_cardinal(&p.outcome.rho_pass, &p.bases.0, &p.bases.1, params, &knobs)?;
    let names = ["0", "1", "+", "+i"];
    let mut t = Table::new("teleport", &["input", "m1", "m2", "probability", "fidelity"]);
    let mut s = Table::new("teleport_summary", &["input", "f_qst"]);
    for (name, r) in names.iter().zip(&results) {
        for k in 0..4 {
            t.push(vec![
                name.to_string(),
                (k / 2).to_string(),
                (k % 2).to_string(),
                num(r.outcome_probs[k]),
                num(r.per_outcome_fidelity[k]),
            ]);
        }
        s.push(vec![name.to_string(), num(r.f_qst)]);
    }
    s.push(vec!["average".to_string(), num(avg)]);
    Ok(vec![t, s])
}

fn pad(rho: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    let n = rho.nrows().min(dim);
    out.view_mut((0, 0), (n, n)).copy_from(&rho.view((0, 0), (n, n)));
    out
}

fn tomo_demo(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let seed = cfg.seed.ok_or_else(|| DmmError::config("tomo-demo needs a seed"))?;
    let tc = &cfg.tomography;
    let pc = &cfg.protocol;
    let alpha = pc.checked_alpha()?;
    let o = run_dmm(params, alpha, &pc.vacuum_model(), &pc.noise(), &pc.options(alpha))?;
    let branch = &tomography::conditional_decomposition(&o.rho_pass, &o.basis_used.1, Axis::X, pc.p_decode)?[0];
    let d = branch.rho1.nrows();
    let space = make_space(&[d], &["a1"])?;
    let state = QuantumState::density(&space, branch.rho1.clone())?;
    let grid = GridSpec::square(tc.grid_extent, tc.grid_points);
    let exact = tomography::wigner_map(&state, 0, &grid)?;
    let sampled = tomography::sample_wigner(&exact, tc.shots, seed)?;
    let dim = tc.mle_dim.max(d);
    let fid = |r: &DMatrix<C64>| linalg::uhlmann_fidelity(&pad(&branch.rho1, dim), &pad(r, dim));
    let noiseless = tomography::mle_density(&exact, tc.mle_dim, true)?;
    let recon = tomography::mle_density(&sampled, tc.mle_dim, true)?;

    let header: Vec<&'static str> = CSV_HEADER_COUNTS.split(',').collect();
    let mut w = Table::new("wigner", &header);
    let counts = sampled.counts.as_ref().ok_or_else(|| DmmError::numerical("tomography", "sampling produced no counts"))?;
    for (i, re) in sampled.re_axis.iter().enumerate() {
        for (j, im) in sampled.im_axis.iter().enumerate() {
            w.push(vec![num(*re), num(*im), num(sampled.values[(i, j)]), tc.shots.to_string(), counts[(i, j)].to_string()]);
        }
    }
    let mut s = Table::new(
        "tomography",
        &["alpha", "shots", "grid_points", "mle_dim", "f_noiseless", "f_sampled", "converged", "iterations", "residual"],
    );
    s.push(vec![
        num(alpha),
        tc.shots.to_string(),
        tc.grid_points.to_string(),
        tc.mle_dim.to_string(),
        num(fid(&noiseless.rho)),
        num(fid(&recon.rho)),
        recon.converged.to_string(),
        recon.iterations.to_string(),
        num(recon.residual),
    ]);
    Ok(vec![w, s])
}

fn dual_rail(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let t = (cfg.dual_rail.t > 0.0).then_some(cfg.dual_rail.t * 1e-6);
    let r = protocol::dual_rail_dmm(params, t)?;
    let mut tab = Table::new("dual_rail", &["t_us", "steady_distance", "p_distill", "distilled_fidelity"]);
    tab.push(vec![num(r.t_used * 1e6), num(r.steady_distance), num(r.p_distill), num(r.distilled_fidelity)]);
    Ok(vec![tab])
}

fn error_budget(cfg: &ScenarioConfig, params: &SystemParams) -> DmmResult<Vec<Table>> {
    let s = &cfg.sweep;
    if s.budget_points < 2 {
        return Err(DmmError::config("sweep.budget_points must be at least 2"));
    }
    let bp = budget_params(cfg, params);
    let alphas: Vec<f64> = (0..s.budget_points)
        .map(|i| s.budget_alpha_min + (s.budget_alpha_max - s.budget_alpha_min) * i as f64 / (s.budget_points - 1) as f64)
        .collect();
    let mut t = Table::new("error_budget", &["alpha", "p_loss", "p_decode", "f_dmm", "total", "fidelity"]);
    for b in errorbudget::budget_curve(&alphas, &bp) {
        t.push(vec![num(b.alpha), num(b.p_loss), num(b.p_decode), num(b.f_dmm), num(b.total), num(b.fidelity())]);
    }
    let opt = errorbudget::optimum_alpha(&bp, s.budget_alpha_min, s.budget_alpha_max)?;
    let mut o = Table::new(
        "budget_optimum",
        &["alpha_opt", "total_opt", "eps_harmonics", "eps_spl", "kappa_purcell_hz", "f_purcell"],
    );
    o.push(vec![
        num(opt.alpha),
        num(opt.total),
        num(opt.eps_harmonics),
        num(opt.eps_spl),
        num(opt.kappa_purcell / TAU),
        num(opt.f_purcell),
    ]);
    Ok(vec![t, o])
}

fn multiround(cfg: &ScenarioConfig) -> DmmResult<Vec<Table>> {
    let m = &cfg.multiround;
    let s = protocol::multiround_stats(m.p_success, m.t_attempt * 1e-6, m.t_reset * 1e-6)?;
    let mut t = Table::new(
        "multiround",
        &["p_success", "t_attempt_us", "t_reset_us", "mean_attempts", "mean_wait_us", "rate_khz"],
    );
    t.push(vec![
        num(m.p_success),
        num(m.t_attempt),
        num(m.t_reset),
        num(s.mean_attempts),
        num(s.mean_wait * 1e6),
        num(s.rate / 1e3),
    ]);
    Ok(vec![t])
}
