//! Dual-route checks of the weighted-norm machinery.  Mode-space norms,
//! means, and profiles are compared against closed forms and against a
//! direct two-dimensional tensor quadrature (composite Simpson in r,
//! trapezoid in theta) that shares no code with the radial grid.

use std::f64::consts::PI;
use std::sync::Arc;

use vortex_core::field::C64;
use vortex_core::grid::{RadialGrid, make_grid};
use vortex_core::operators::apply_l;
use vortex_core::profiles::{g_lambda_profile, g_of, gaussian_profile};
use vortex_core::{ModeField, SpectralConfig};

fn grid() -> Arc<RadialGrid> {
    make_grid(&SpectralConfig::default()).unwrap()
}

/// Integral of f(r, theta) over the disk r <= r_max, by composite
/// Simpson in r (n_r odd counts) and trapezoid in theta.
fn integrate_2d(r_max: f64, n_r: usize, n_theta: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    assert!(n_r % 2 == 1);
    let hr = r_max / (n_r - 1) as f64;
    let ht = 2.0 * PI / n_theta as f64;
    let mut total = 0.0;
    for j in 0..n_r {
        let r = j as f64 * hr;
        let simpson = if j == 0 || j == n_r - 1 {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let mut ring = 0.0;
        for k in 0..n_theta {
            ring += f(r, k as f64 * ht);
        }
        total += simpson * ring * r;
    }
    total * hr / 3.0 * ht
}

/// Projects an analytic function onto a mode field by trapezoid sums in
/// the angle at every radial node.
fn project_analytic(
    grid: &Arc<RadialGrid>,
    n_modes: usize,
    n_theta: usize,
    f: impl Fn(f64, f64) -> f64,
) -> ModeField {
    let mut out = ModeField::zeros(grid, n_modes);
    let nodes = grid.nodes().to_vec();
    for n in 0..=n_modes {
        let prof: Vec<C64> = nodes
            .iter()
            .map(|&r| {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n_theta {
                    let theta = 2.0 * PI * k as f64 / n_theta as f64;
                    let phase = C64::new(0.0, -(n as f64) * theta).exp();
                    acc += f(r, theta) * phase;
                }
                acc / n_theta as f64
            })
            .collect();
        out.set_physical(n, &prof);
    }
    out
}

#[test]
fn gaussian_derivative_norm_matches_closed_form() {
    // d1 G = -(x1/2) G, so its squared weighted norm is the second
    // moment int (x1^2/4) G dx = 1/2, exactly.
    let grid = grid();
    let d1 = gaussian_profile(&grid).dx1();
    assert!((d1.norm_x_sq() - 0.5).abs() < 1e-10, "got {}", d1.norm_x_sq());
    let d2 = gaussian_profile(&grid).dx2();
    assert!((d2.norm_x_sq() - 0.5).abs() < 1e-10, "got {}", d2.norm_x_sq());
}

#[test]
fn strained_gaussian_norm_matches_closed_form() {
    // The Gaussian integrals separate: int G_lambda^2 / G dx
    // = (1 - lambda^2) / sqrt(1 - 4 lambda^2).
    let grid = grid();
    for &lambda in &[0.05, 0.1] {
        let gl = g_lambda_profile(&grid, lambda, 16).unwrap();
        let exact = (1.0 - lambda * lambda) / (1.0 - 4.0 * lambda * lambda).sqrt();
        let got = gl.norm_x_sq();
        assert!(
            (got - exact).abs() < 1e-8 * exact,
            "lambda {lambda}: {got} vs {exact}"
        );
    }
}

#[test]
fn strained_gaussian_modes_match_direct_angular_projection() {
    let grid = grid();
    let lambda = 0.1;
    let gl = g_lambda_profile(&grid, lambda, 16).unwrap();
    let amp = (1.0 - lambda * lambda).sqrt() / (4.0 * PI);
    let direct = project_analytic(&grid, 16, 256, |r, theta| {
        amp * (-r * r / 4.0 * (1.0 + lambda * (2.0 * theta).cos())).exp()
    });
    for n in 0..=16 {
        let a = gl.physical(n);
        let b = direct.physical(n);
        let worst = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-12, "mode {n} ladder mismatch {worst}");
    }
}

#[test]
fn norm_and_mean_match_independent_tensor_quadrature() {
    // A non-separable band-3 test function with no closed-form norm.
    let f = |r: f64, theta: f64| {
        let x1 = r * theta.cos();
        let x2 = r * theta.sin();
        (x1.powi(3) - 2.0 * x1 * x2 * x2 + x2 + 1.3) * (-r * r / 3.5).exp()
    };
    let grid = grid();
    let field = project_analytic(&grid, 8, 64, f);

    let r_max = grid.r_max();
    let norm_direct = integrate_2d(r_max, 8001, 64, |r, t| f(r, t) * f(r, t) / g_of(r));
    let norm_modes = field.norm_x_sq();
    assert!(
        (norm_modes - norm_direct).abs() < 1e-8 * norm_direct,
        "{norm_modes} vs {norm_direct}"
    );

    let mean_direct = integrate_2d(r_max, 8001, 64, f);
    let mean_modes = field.mean();
    assert!(
        (mean_modes - mean_direct).abs() < 1e-8 * mean_direct.abs(),
        "{mean_modes} vs {mean_direct}"
    );
}

#[test]
fn energy_matches_drift_diffusion_quadratic_form() {
    // Conjugating the drift-diffusion operator by sqrt G turns it into
    // half the identity minus the oscillator form, so for every field
    // E(w) = (w, -L w)_X + ||w||^2_X / 2.
    let grid = grid();
    for seed in 0..10u64 {
        let w = ModeField::random(&grid, 6, 1000 + seed, false);
        let energy = w.energy();
        let dual = w.inner_x(&apply_l(&w).scaled_by(-1.0)) + 0.5 * w.norm_x_sq();
        assert!(
            (energy - dual).abs() < 1e-7 * energy.abs(),
            "seed {seed}: {energy} vs {dual}"
        );
    }
}
