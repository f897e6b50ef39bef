//! One entry point per subcommand.  Every run writes its files under
//! the output directory and prints the primary summary JSON to stdout.

use std::fs;
use std::path::Path;
use std::thread;

use serde::Serialize;

use vortex_core::error::{Result, VortexError};
use vortex_core::field::ModeField;
use vortex_core::grid::make_grid;
use vortex_core::profiles::gaussian_profile;
use vortex_core::report::{
    self, SolveSummary, SweepRow, WinftySummary, contour_csv, mode_profile_csv, sweep_csv,
    trajectory_csv, winfty_profile_csv,
};
use vortex_core::stability::{LinearizedOp, estimate_basin, evolve_perturbation, leading_eigenvalue};
use vortex_core::vortex::{
    VortexSolution, expansion_check_lambda, large_r_check, picard_solve, small_r_check,
};
use vortex_core::winfty::compute_w_infty;

use crate::params::{Params, parse_list};
use crate::{EvolveCheck, Perturb, SolveCheck};

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

pub fn run_winfty(p: &Params) -> Result<()> {
    let grid = make_grid(&p.spectral)?;
    let (profile, _) = compute_w_infty(&grid)?;
    let summary = report::to_json(&WinftySummary::from_profile(&profile))?;
    write_text(&p.out, "winfty_profile.csv", &winfty_profile_csv(grid.nodes(), &profile))?;
    write_text(&p.out, "winfty_summary.json", &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn run_solve(p: &Params, check: Option<SolveCheck>, alphas: Option<&str>) -> Result<()> {
    let alpha = p.require_alpha()?;
    let sol = picard_solve(&p.spectral, alpha, p.lambda)?;
    let summary = report::to_json(&SolveSummary::from_solution(&sol))?;
    let n_theta = p.spectral.theta_points().max(64);
    write_text(&p.out, "solution_modes.csv", &mode_profile_csv(&sol.omega))?;
    write_text(&p.out, "omega_contour.csv", &contour_csv(&sol.omega, n_theta))?;
    write_text(&p.out, "solve_summary.json", &summary)?;
    print!("{summary}");

    match check {
        None => {}
        Some(SolveCheck::Lambda2) => {
            let rep = expansion_check_lambda(&p.spectral, alpha, p.lambda)?;
            write_text(&p.out, "check_lambda2.json", &report::to_json(&rep)?)?;
        }
        Some(SolveCheck::LargeR) => {
            let list = match alphas {
                Some(text) => parse_list("alphas", text)?,
                None => vec![10.0, 30.0, 100.0],
            };
            let grid = make_grid(&p.spectral)?;
            let (_, w_inf) = compute_w_infty(&grid)?;
            let rows = large_r_check(&p.spectral, p.lambda, &list, &w_inf)?;
            write_text(&p.out, "check_largeR.json", &report::to_json(&rows)?)?;
        }
        Some(SolveCheck::SmallR) => {
            let list = match alphas {
                Some(text) => parse_list("alphas", text)?,
                None => vec![0.5, 0.25],
            };
            let rows = small_r_check(&p.spectral, p.lambda, &list)?;
            write_text(&p.out, "check_smallR.json", &report::to_json(&rows)?)?;
        }
    }
    Ok(())
}

/// Builds the initial perturbation: a translation derivative of the
/// vortex (of the unit Gaussian when the vortex is trivial), or a
/// seeded random zero-mean field, scaled to the basin amplitude.
fn perturbation(sol: &VortexSolution, kind: Perturb, seed: u64) -> ModeField {
    let eps = 1e-3 * (1.0 + sol.alpha.abs());
    let grid = sol.w.grid();
    let base = if sol.omega.norm_x() > 0.0 {
        sol.omega.clone()
    } else {
        gaussian_profile(grid)
    };
    let dir = match kind {
        Perturb::D1 => base.dx1(),
        Perturb::D2 => base.dx2(),
        Perturb::Random => ModeField::random(grid, sol.w.n_modes(), seed, true),
    };
    dir.scaled_by(eps / dir.norm_x())
}

pub fn run_evolve(p: &Params, perturb: Perturb, check: Option<EvolveCheck>) -> Result<()> {
    let alpha = p.require_alpha()?;
    let sol = picard_solve(&p.spectral, alpha, p.lambda)?;
    let w0 = perturbation(&sol, perturb, p.seed);
    let (mut report_out, _) = evolve_perturbation(&sol, &w0, &p.evolution)?;
    if let Some(EvolveCheck::Basin) = check {
        report_out.basin_epsilon = Some(estimate_basin(&sol, &w0, &p.evolution, 8)?);
    }
    write_text(&p.out, "trajectory.csv", &trajectory_csv(&report_out.energy_series))?;
    write_text(
        &p.out,
        "stability_report.json",
        &report::stability_report_json(&report_out)?,
    )?;

    #[derive(Serialize)]
    struct Brief {
        alpha: f64,
        lambda: f64,
        fitted_mu: f64,
        fit_residual: f64,
        eigen_residual_1: f64,
        eigen_residual_2: f64,
        energy_decay_floor: f64,
        basin_epsilon: Option<f64>,
    }
    let brief = report::to_json(&Brief {
        alpha,
        lambda: p.lambda,
        fitted_mu: report_out.fitted_mu,
        fit_residual: report_out.fit_residual,
        eigen_residual_1: report_out.eigen_residual_1,
        eigen_residual_2: report_out.eigen_residual_2,
        energy_decay_floor: report_out.energy_decay_floor,
        basin_epsilon: report_out.basin_epsilon,
    })?;
    print!("{brief}");
    Ok(())
}

pub fn run_spectrum(p: &Params) -> Result<()> {
    let alpha = p.require_alpha()?;
    let sol = picard_solve(&p.spectral, alpha, p.lambda)?;
    let subspace = 6;
    let eigenvalues = leading_eigenvalue(&sol, subspace)?;

    #[derive(Serialize)]
    struct SpectrumOut {
        alpha: f64,
        lambda: f64,
        subspace: usize,
        /// Rightmost first, as (real, imaginary) pairs.
        eigenvalues: Vec<(f64, f64)>,
    }
    let text = report::to_json(&SpectrumOut {
        alpha,
        lambda: p.lambda,
        subspace,
        eigenvalues,
    })?;
    write_text(&p.out, "spectrum.json", &text)?;
    print!("{text}");
    Ok(())
}

fn sweep_point(p: &Params, alpha: f64, lambda: f64) -> Result<SweepRow> {
    // Certification measures mode-truncation residuals, so it needs a
    // band wide enough for the largest supported asymmetry.
    let mut cfg = p.spectral;
    if !p.nmodes_explicit {
        cfg.n_modes = cfg.n_modes.max(12);
    }
    let sol = picard_solve(&cfg, alpha, lambda)?;
    let op = LinearizedOp::new(&sol)?;
    let (r1, r2) = op.translation_residuals(&sol.omega)?;
    let summary = SolveSummary::from_solution(&sol);
    let pass = sol.residual_x < 1e-10
        && r1 < 1e-5
        && r2 < 1e-5
        && sol.mass_defect < 1e-8 * (1.0 + alpha.abs())
        && sol.certified;
    Ok(SweepRow {
        alpha,
        lambda,
        iterations: summary.iterations,
        residual: summary.residual,
        norm_y: summary.norm_y,
        contraction_max: summary.contraction_max,
        mass_defect: sol.mass_defect,
        eigen_residual_1: r1,
        eigen_residual_2: r2,
        pass,
    })
}

pub fn run_sweep(p: &Params, alphas: &str, lambdas: &str) -> Result<()> {
    let alphas = parse_list("alphas", alphas)?;
    let lambdas = parse_list("lambdas", lambdas)?;
    let tuples: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| lambdas.iter().map(move |&l| (a, l)))
        .collect();

    let outcomes: Vec<Result<SweepRow>> = thread::scope(|scope| {
        let handles: Vec<_> = tuples
            .iter()
            .map(|&(a, l)| scope.spawn(move || sweep_point(p, a, l)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut rows = Vec::with_capacity(tuples.len());
    let mut first_failure = None;
    for (&(alpha, lambda), outcome) in tuples.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(VortexError::Convergence {
                iterations,
                residual,
                history,
            }) => {
                rows.push(SweepRow {
                    alpha,
                    lambda,
                    iterations,
                    residual,
                    norm_y: 0.0,
                    contraction_max: 0.0,
                    mass_defect: 0.0,
                    eigen_residual_1: 0.0,
                    eigen_residual_2: 0.0,
                    pass: false,
                });
                first_failure.get_or_insert(VortexError::Convergence {
                    iterations,
                    residual,
                    history,
                });
            }
            Err(other) => return Err(other),
        }
    }

    let json = report::to_json(&rows)?;
    write_text(&p.out, "sweep.csv", &sweep_csv(&rows))?;
    write_text(&p.out, "sweep.json", &json)?;
    print!("{json}");
    match first_failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}
