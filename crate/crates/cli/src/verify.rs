//! Built-in invariant suite: one named check per mathematical property
//! the solver stack certifies, reported as a pass/fail line each.
//!
//! Checks are grouped into stages; an error inside a stage becomes a
//! failing entry for that stage instead of aborting the suite, so a
//! broken configuration still yields a full report.

use serde::Serialize;

use vortex_core::biot_savart::{StreamSolver, advect, velocity_with_solver};
use vortex_core::config::SpectralConfig;
use vortex_core::error::{Result, VortexError};
use vortex_core::field::ModeField;
use vortex_core::grid::make_grid;
use vortex_core::operators::{apply_l, apply_lambda_with, apply_m, spectrum_l};
use vortex_core::profiles::{g_lambda_profile, gaussian_profile};
use vortex_core::report;
use vortex_core::stability::{
    EvolutionConfig, LinearizedOp, evolve_nonlinear, evolve_perturbation,
};
use vortex_core::vortex::{expansion_check_lambda, picard_solve};
use vortex_core::winfty::{compute_w_infty, solve_homogeneous, stream_bvp_direct};

use crate::commands::write_text;
use crate::params::Params;

#[derive(Debug, Serialize)]
pub struct Invariant {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Invariant {
    Invariant { name, pass, detail }
}

/// Kernel identities and symmetry of the building-block operators.
fn stage_operators(cfg: &SpectralConfig) -> Result<Vec<Invariant>> {
    let mut list = Vec::new();
    let grid = make_grid(cfg)?;
    let g = gaussian_profile(&grid);

    let lg = apply_l(&g).norm_x();
    list.push(check("gaussian_in_kernel", lg < 1e-8, format!("|L G|_X = {lg:.3e}")));

    let stream2 = StreamSolver::new(&grid, 2)?;
    let vg = velocity_with_solver(&stream2, &g)?;
    let self_adv = advect(&vg, &g, cfg.theta_points())?.norm_x();
    list.push(check(
        "gaussian_no_self_advection",
        self_adv < 1e-10,
        format!("|v_G . grad G|_X = {self_adv:.3e}"),
    ));

    let g_lam = g_lambda_profile(&grid, 0.1, 16)?;
    let strained = apply_l(&g_lam).plus(&apply_m(&g_lam).scaled_by(0.1)).norm_x();
    list.push(check(
        "strained_gaussian_in_kernel",
        strained < 1e-7,
        format!("|(L + 0.1 M) G_0.1|_X = {strained:.3e}"),
    ));

    let stream = StreamSolver::new(&grid, cfg.n_modes)?;
    let mut worst_skew: f64 = 0.0;
    for seed in 0..20u64 {
        let a = ModeField::random(&grid, cfg.n_modes, 1000 + seed, true);
        let b = ModeField::random(&grid, cfg.n_modes, 2000 + seed, true);
        let defect = (a.inner_x(&apply_lambda_with(&stream, &b)?)
            + b.inner_x(&apply_lambda_with(&stream, &a)?))
        .abs();
        worst_skew = worst_skew.max(defect);
    }
    list.push(check(
        "swirl_skew_symmetry",
        worst_skew < 1e-8,
        format!("max defect over 20 pairs = {worst_skew:.3e}"),
    ));

    let eigs = spectrum_l(&grid, 9)?;
    let targets = [0.5, 0.5, 1.0, 1.0, 1.0, 1.5, 1.5, 1.5, 1.5];
    let spec_err = eigs
        .iter()
        .zip(targets)
        .map(|(have, want)| (have - want).abs())
        .fold(0.0f64, f64::max);
    list.push(check(
        "oscillator_spectrum",
        spec_err < 1e-6,
        format!("max eigenvalue error = {spec_err:.3e}"),
    ));
    Ok(list)
}

/// Structure of the limiting correction: Wronskian constancy, branch
/// monotonicity, vorticity sign, defining residual, dual-route stream
/// agreement, and the asymptotic constants.
fn stage_limit_profile(cfg: &SpectralConfig) -> Result<Vec<Invariant>> {
    let mut list = Vec::new();
    let grid = make_grid(cfg)?;
    let pair = solve_homogeneous(&grid)?;
    list.push(check(
        "wronskian_constant",
        pair.w0_variation < 1e-6,
        format!("relative variation = {:.3e}", pair.w0_variation),
    ));

    let interior = grid.len() - 1;
    let monotone = (0..interior).all(|j| pair.dpsi_minus[j] > 0.0 && pair.dpsi_plus[j] < 0.0);
    list.push(check(
        "stream_branch_monotonicity",
        monotone,
        "psi-' > 0 and psi+' < 0 at all interior nodes".into(),
    ));

    let (profile, _) = compute_w_infty(&grid)?;
    let negative = (0..interior).all(|j| profile.vorticity[j] < 0.0);
    list.push(check(
        "limit_vorticity_negative",
        negative,
        "omega(r) < 0 at all interior nodes".into(),
    ));
    list.push(check(
        "limit_defining_residual",
        profile.residual < 1e-6,
        format!("relative residual = {:.3e}", profile.residual),
    ));

    let direct = stream_bvp_direct(&grid)?;
    let bvp_gap = profile
        .stream
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    list.push(check(
        "stream_dual_route",
        bvp_gap < 1e-7,
        format!("max |Green - BVP| = {bvp_gap:.3e}"),
    ));

    let plus_err = (profile.omega_plus + 0.38).abs();
    let minus_err = (profile.omega_minus + 17.5).abs();
    list.push(check(
        "limit_asymptotic_constants",
        plus_err < 0.02 && minus_err < 0.3,
        format!(
            "Omega+ = {:.4} (target -0.38), Omega- = {:.3} (target -17.5)",
            profile.omega_plus, profile.omega_minus
        ),
    ));
    Ok(list)
}

/// Fixed-point convergence, its exact eigenpairs, and the quadratic
/// asymmetry expansion.
fn stage_fixed_point(cfg: &SpectralConfig) -> Result<Vec<Invariant>> {
    let mut list = Vec::new();
    let mut wide = *cfg;
    wide.n_modes = cfg.n_modes.max(12);
    let sol = picard_solve(&wide, 10.0, 0.1)?;
    list.push(check(
        "fixed_point_certified_corner",
        sol.residual_x < 1e-10 && sol.iterations < 50,
        format!(
            "residual = {:.3e} after {} iterations",
            sol.residual_x, sol.iterations
        ),
    ));

    let op = LinearizedOp::new(&sol)?;
    let (r1, r2) = op.translation_residuals(&sol.omega)?;
    list.push(check(
        "translation_eigenpairs",
        r1 < 1e-5 && r2 < 1e-5,
        format!("residuals {r1:.3e}, {r2:.3e}"),
    ));

    let ratio = expansion_check_lambda(cfg, 1.0, 0.1)?.ratio;
    list.push(check(
        "asymmetry_expansion_quadratic",
        (3.5..=4.5).contains(&ratio),
        format!("d(0.1)/d(0.05) = {ratio:.3}"),
    ));
    Ok(list)
}

/// Evolution diagnostics: exact and strained decay rates, the energy
/// floor, and conservation with positivity.
fn stage_evolution(cfg: &SpectralConfig) -> Result<Vec<Invariant>> {
    let mut list = Vec::new();
    let grid = make_grid(cfg)?;
    let evo = EvolutionConfig::default();

    let trivial = picard_solve(cfg, 0.0, 0.0)?;
    let d1g = gaussian_profile(&grid).dx1();
    let w0 = d1g.scaled_by(1e-3 / d1g.norm_x());
    let (exact, _) = evolve_perturbation(&trivial, &w0, &evo)?;
    list.push(check(
        "exact_decay_rate",
        (exact.fitted_mu - 0.5).abs() < 1e-3,
        format!("fitted mu = {:.6}", exact.fitted_mu),
    ));

    let strained_sol = picard_solve(cfg, 10.0, 0.05)?;
    let d2 = strained_sol.omega.dx2();
    let w0s = d2.scaled_by(1e-3 * 11.0 / d2.norm_x());
    let (strained_rep, _) = evolve_perturbation(&strained_sol, &w0s, &evo)?;
    let mu_target = (1.0 - 0.05) / 2.0;
    list.push(check(
        "strained_decay_rate",
        (strained_rep.fitted_mu - mu_target).abs() < 0.05 * mu_target,
        format!(
            "fitted mu = {:.4} (target {mu_target})",
            strained_rep.fitted_mu
        ),
    ));
    list.push(check(
        "energy_decay_floor",
        strained_rep.energy_decay_floor > 0.8,
        format!("floor = {:.3}", strained_rep.energy_decay_floor),
    ));

    let omega0 = gaussian_profile(&grid).resized(cfg.n_modes);
    let traj = evolve_nonlinear(&omega0, 0.05, &evo, None)?;
    let m0 = traj.samples[0].mean;
    let drift = traj
        .samples
        .iter()
        .map(|s| (s.mean - m0).abs())
        .fold(0.0f64, f64::max)
        / m0.abs();
    let sign_ok = traj.samples.iter().all(|s| s.min >= -1e-10 * s.max);
    list.push(check(
        "mass_conservation",
        drift < 1e-8,
        format!("relative drift = {drift:.3e}"),
    ));
    list.push(check(
        "sign_preservation",
        sign_ok,
        "min omega >= -1e-10 max omega along the trajectory".into(),
    ));
    Ok(list)
}

pub fn run_verify(p: &Params) -> Result<()> {
    let stages: [(&'static str, fn(&SpectralConfig) -> Result<Vec<Invariant>>); 4] = [
        ("operators", stage_operators),
        ("limit_profile", stage_limit_profile),
        ("fixed_point", stage_fixed_point),
        ("evolution", stage_evolution),
    ];
    let mut list: Vec<Invariant> = Vec::new();
    for (name, stage) in stages {
        match stage(&p.spectral) {
            Ok(mut items) => list.append(&mut items),
            Err(err) => list.push(check(name, false, format!("stage error: {err}"))),
        }
    }

    let failed = list.iter().filter(|c| !c.pass).count();
    for c in &list {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag}  {:<32} {}", c.name, c.detail);
    }
    println!("verified {}/{} invariants", list.len() - failed, list.len());
    write_text(&p.out, "verify.json", &report::to_json(&list)?)?;

    if failed > 0 {
        return Err(VortexError::numeric(format!(
            "{failed} invariant check(s) failed"
        )));
    }
    Ok(())
}
