//! Reference vorticity and velocity profiles of the isotropic vortex and
//! its strained deformation.

use std::sync::Arc;

use crate::error::{Result, VortexError};
use crate::field::{C64, ModeField, VelocityField};
use crate::grid::RadialGrid;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Radially symmetric Gaussian vorticity g(r) = e^{-r^2/4} / (4 pi),
/// normalized to unit circulation.
pub fn g_of(r: f64) -> f64 {
    (-r * r / 4.0).exp() / FOUR_PI
}

/// Angular frequency v_theta / r of the velocity field induced by the
/// Gaussian vortex; smooth and positive, with phi(0) = 1/(8 pi).
pub fn phi_swirl(r: f64) -> f64 {
    let x = r * r / 4.0;
    if x < 1e-30 {
        return 1.0 / (8.0 * std::f64::consts::PI);
    }
    -(-x).exp_m1() / (8.0 * std::f64::consts::PI * x)
}

/// Swirl velocity of the Gaussian vortex, v_theta(r) = r * phi(r).
pub fn vg_swirl(r: f64) -> f64 {
    r * phi_swirl(r)
}

/// Unit-circulation Gaussian vortex as a mode field.
pub fn gaussian_profile(grid: &Arc<RadialGrid>) -> ModeField {
    let mut out = ModeField::zeros(grid, 2);
    let prof: Vec<C64> = grid.sqrt_gauss().iter().map(|&s| C64::new(s, 0.0)).collect();
    // c_0 = g means the scaled profile is sqrt(g) itself.
    out.set_scaled(0, prof);
    out
}

/// Velocity field induced by the unit Gaussian vortex: purely angular,
/// v_theta = (1 - e^{-r^2/4}) / (2 pi r).
pub fn vg_profile(grid: &Arc<RadialGrid>) -> VelocityField {
    let mut out = VelocityField::zeros(grid, 2);
    for (j, &r) in grid.nodes().iter().enumerate() {
        out.vt_mut(0)[j] = C64::new(vg_swirl(r), 0.0);
    }
    out
}

/// Image of the Gaussian vortex under the strain generator: a pure
/// cos(2 theta) field with c_2 = -r^2 g / 8.
pub fn mg_profile(grid: &Arc<RadialGrid>) -> ModeField {
    let mut out = ModeField::zeros(grid, 2);
    // c_2 = -r^2 g / 8 rescales to f_2 = -r^2 sqrt(g) / 8.
    let prof: Vec<C64> = grid
        .nodes()
        .iter()
        .zip(grid.sqrt_gauss())
        .map(|(&r, &s)| C64::new(-r * r * s / 8.0, 0.0))
        .collect();
    out.set_scaled(2, prof);
    out
}

/// Anisotropic Gaussian that the strained diffusion operator annihilates:
/// G_lambda = (sqrt(1 - lambda^2) / 4 pi)
///            exp(-(1+lambda) x1^2/4 - (1-lambda) x2^2/4).
///
/// Its even azimuthal modes are Gaussian-times-Bessel profiles:
/// c_{2k}(r) = (sqrt(1-lambda^2)/4pi) e^{-r^2/4} (-1)^k I_k(lambda r^2/4).
pub fn g_lambda_profile(
    grid: &Arc<RadialGrid>,
    lambda: f64,
    n_modes: usize,
) -> Result<ModeField> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(VortexError::domain(format!(
            "strain ratio lambda = {lambda} outside [0, 1)"
        )));
    }
    let amp = (1.0 - lambda * lambda).sqrt() / FOUR_PI;
    let mut out = ModeField::zeros(grid, n_modes);
    for k in 0..=(n_modes / 2) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let prof: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|&r| {
                let z = lambda * r * r / 4.0;
                C64::new(amp * sign * (-r * r / 4.0).exp() * bessel_i(k, z), 0.0)
            })
            .collect();
        out.set_physical(2 * k, &prof);
    }
    Ok(out)
}

/// Modified Bessel function I_k(z) for integer order and moderate
/// arguments, by its power series.
pub fn bessel_i(k: usize, z: f64) -> f64 {
    if z == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let half = z / 2.0;
    // First term (z/2)^k / k!
    let mut term = 1.0;
    for m in 1..=k {
        term *= half / m as f64;
    }
    let mut sum = term;
    let q = half * half;
    for m in 1..400 {
        term *= q / (m as f64 * (m + k) as f64);
        sum += term;
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SpectralConfig;
    use crate::grid::make_grid;

    fn grid() -> Arc<RadialGrid> {
        make_grid(&SpectralConfig::default()).unwrap()
    }

    #[test]
    fn gaussian_has_unit_mass_and_norm() {
        let grid = grid();
        let g = gaussian_profile(&grid);
        assert!((g.mean() - 1.0).abs() < 1e-12);
        assert!((g.norm_x() - 1.0).abs() < 1e-12);
        let c0 = g.physical(0);
        assert!((grid.interp_c(&c0, 0.0).unwrap().re - 1.0 / FOUR_PI).abs() < 1e-10);
    }

    #[test]
    fn swirl_profile_matches_closed_form_values() {
        // phi(0) = 1/(8 pi); v_theta(2) = (1 - e^{-1}) / (4 pi).
        assert!((phi_swirl(0.0) - 1.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-16);
        let v2 = vg_swirl(2.0);
        let expect = (1.0 - (-1.0_f64).exp()) / FOUR_PI;
        assert!((v2 - expect).abs() < 1e-14);
        assert!((expect - 0.0503).abs() < 1e-4);
        // Small-r behavior v ~ r / (8 pi).
        assert!((vg_swirl(1e-6) - 1e-6 / (8.0 * std::f64::consts::PI)).abs() < 1e-18);
    }

    #[test]
    fn strain_image_profile_matches_point_values() {
        let grid = grid();
        let mg = mg_profile(&grid);
        // Physical value at (x1, x2) = (2, 0) is -g(2); at (0, 2) it is +g(2).
        let c2 = mg.physical(2);
        let at2 = grid.interp_c(&c2, 2.0).unwrap();
        let val_x = 2.0 * at2.re; // theta = 0
        let val_y = -2.0 * at2.re; // theta = pi/2 gives cos(2 theta) = -1
        assert!((val_x + g_of(2.0)).abs() < 1e-12);
        assert!((val_y - g_of(2.0)).abs() < 1e-12);
        assert!(mg.mean().abs() < 1e-14);
        // Frozen closed form: the weighted norm of this profile is exactly 1.
        assert!((mg.norm_x() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn anisotropic_gaussian_reduces_to_isotropic_at_zero_strain() {
        let grid = grid();
        let g0 = g_lambda_profile(&grid, 0.0, 8).unwrap();
        let g = gaussian_profile(&grid);
        assert!(g0.minus(&g).norm_x() < 1e-14);
        assert!(g_lambda_profile(&grid, 1.0, 8).is_err());
        assert!(g_lambda_profile(&grid, -0.1, 8).is_err());
    }

    #[test]
    fn anisotropic_gaussian_keeps_unit_mass() {
        let grid = grid();
        for &lambda in &[0.05, 0.1, 0.2] {
            let gl = g_lambda_profile(&grid, lambda, 12).unwrap();
            assert!(
                (gl.mean() - 1.0).abs() < 1e-9,
                "lambda={lambda}: mean {}",
                gl.mean()
            );
        }
    }

    #[test]
    fn bessel_series_matches_reference_values() {
        // I_0(1) and I_1(1) to 15 digits (Abramowitz & Stegun 9.8).
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_3).abs() < 1e-14);
        assert!((bessel_i(1, 1.0) - 0.565_159_103_992_485_0).abs() < 1e-14);
        // Recurrence I_{k-1}(z) - I_{k+1}(z) = (2k/z) I_k(z).
        for &z in &[0.5, 2.0, 6.4, 12.8] {
            for k in 1..6 {
                let lhs = bessel_i(k - 1, z) - bessel_i(k + 1, z);
                let rhs = 2.0 * k as f64 / z * bessel_i(k, z);
                assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
            }
        }
    }
}
