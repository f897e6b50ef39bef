//! Limiting profile of the asymmetric vortex correction at large
//! circulation: the field w satisfying Lambda w = M G.
//!
//! With the ansatz w = omega(r) sin(2 theta), the commutator equation
//! reduces to a radial two-point problem for the streamfunction
//! amplitude Omega,
//!
//!   -(1/r)(r Omega')' + (4/r^2 - h) Omega = -r^2 h / 4,
//!   Omega(0) = Omega(infinity) = 0,   h(r) = (r^2/4)/(e^{r^2/4} - 1),
//!
//! solved here by variation of constants: the homogeneous pair psi+ ~
//! 1/r^2 (decaying) and psi- ~ r^2 (regular) comes from integrating
//! F'' = (4 - H) F in the log radius from far outside the potential's
//! support, and the particular solution is a two-sided quadrature
//! against their Green kernel.  The vorticity amplitude follows as
//! omega = h (Omega - r^2/4).

use std::sync::Arc;

use crate::banded::BandMatrix;
use crate::error::{Result, VortexError};
use crate::field::{C64, ModeField};
use crate::grid::{Parity, RadialGrid, STENCIL};
use crate::ivp::Dopri5;
use crate::operators::apply_l;
use crate::profiles::{g_of, phi_swirl};

/// Ratio h = g / (2 phi), the ratio of the Gaussian to twice its swirl
/// potential: h(r) = (r^2/4) / (e^{r^2/4} - 1), with h(0) = 1.
pub fn h_potential(r: f64) -> f64 {
    let z = r * r / 4.0;
    if z == 0.0 { 1.0 } else { z / z.exp_m1() }
}

/// Homogeneous solutions of the radial operator and their Wronskian.
#[derive(Debug, Clone)]
pub struct HomogeneousPair {
    pub psi_plus: Vec<f64>,
    pub psi_minus: Vec<f64>,
    pub dpsi_plus: Vec<f64>,
    pub dpsi_minus: Vec<f64>,
    /// Constant value of r (psi+ psi-' - psi+' psi-).
    pub w0: f64,
    /// Relative variation of that product over r in [0.1, 10].
    pub w0_variation: f64,
}

/// Integrates the homogeneous equation from both ends of the domain.
///
/// In t = +/- log r the equation reads F'' = (4 - H(t)) F with
/// H(t) = r^2 h(r); each branch starts where H < 1e-14 with the decaying
/// seed (F, F') = e^{-2T} (1, -2) and is integrated backwards, which is
/// the stable direction for the selected solution.
pub fn solve_homogeneous(grid: &Arc<RadialGrid>) -> Result<HomogeneousPair> {
    let r = grid.nodes();
    let nr = grid.len();
    let rhs = |t_to_r: fn(f64) -> f64| {
        move |t: f64, y: &[f64], dy: &mut [f64]| {
            let rr = t_to_r(t);
            let h_log = rr * rr * h_potential(rr);
            dy[0] = y[1];
            dy[1] = (4.0 - h_log) * y[0];
        }
    };
    let solver = Dopri5::default();

    // Decaying branch: t = log r, integrated down from the potential rim.
    let start_plus = grid.r_max().max(14.0).ln();
    let seed = (-2.0 * start_plus).exp();
    let targets_plus: Vec<f64> = r.iter().rev().map(|&x| x.ln()).collect();
    let sol_plus = solver.solve(
        rhs(|t| t.exp()),
        start_plus,
        &[seed, -2.0 * seed],
        &targets_plus,
    )?;

    // Regular branch: t = -log r, integrated down towards the rim.
    let start_minus = (16.2f64).max(-r[0].ln() + 0.5);
    let seed_m = (-2.0 * start_minus).exp();
    let targets_minus: Vec<f64> = r.iter().map(|&x| -x.ln()).collect();
    let sol_minus = solver.solve(
        rhs(|t| (-t).exp()),
        start_minus,
        &[seed_m, -2.0 * seed_m],
        &targets_minus,
    )?;

    let mut psi_plus = vec![0.0; nr];
    let mut dpsi_plus = vec![0.0; nr];
    for (k, s) in sol_plus.iter().enumerate() {
        let j = nr - 1 - k;
        psi_plus[j] = s[0];
        dpsi_plus[j] = s[1] / r[j];
    }
    let mut psi_minus = vec![0.0; nr];
    let mut dpsi_minus = vec![0.0; nr];
    for (j, s) in sol_minus.iter().enumerate() {
        psi_minus[j] = s[0];
        dpsi_minus[j] = -s[1] / r[j];
    }

    let wronskian =
        |j: usize| r[j] * (psi_plus[j] * dpsi_minus[j] - dpsi_plus[j] * psi_minus[j]);
    let mid = r.partition_point(|&x| x < 1.0).min(nr - 1);
    let w0 = wronskian(mid);
    if !(w0.is_finite() && w0 > 0.0) {
        return Err(VortexError::numeric(format!(
            "homogeneous pair degenerated: w0 = {w0}"
        )));
    }
    let mut w0_variation: f64 = 0.0;
    for j in 0..nr {
        if (0.1..=10.0).contains(&r[j]) {
            w0_variation = w0_variation.max((wronskian(j) / w0 - 1.0).abs());
        }
    }
    Ok(HomogeneousPair {
        psi_plus,
        psi_minus,
        dpsi_plus,
        dpsi_minus,
        w0,
        w0_variation,
    })
}

/// Solves the radial operator equation A u = s by the two-sided Green
/// quadrature built from the homogeneous pair.  The source must vanish
/// at least linearly at the axis so the inner kernel integrand stays
/// bounded.
fn green_solve(grid: &Arc<RadialGrid>, pair: &HomogeneousPair, s: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let nr = grid.len();
    let f_minus: Vec<f64> = (0..nr).map(|j| r[j] * s[j] * pair.psi_minus[j]).collect();
    let f_plus: Vec<f64> = (0..nr).map(|j| r[j] * s[j] * pair.psi_plus[j]).collect();
    let i_minus = grid.cumulative(&f_minus);
    let i_plus = grid.cumulative(&f_plus);
    let total_plus = *i_plus.last().unwrap();
    (0..nr)
        .map(|j| {
            (pair.psi_plus[j] * i_minus[j] + pair.psi_minus[j] * (total_plus - i_plus[j]))
                / pair.w0
        })
        .collect()
}

/// Angular phase of a real mode-2 profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

/// Result of inverting the swirl commutator on a single real mode-2
/// profile.
#[derive(Debug, Clone)]
pub struct Mode2Inversion {
    /// Streamfunction amplitude of the output field.
    pub stream: Vec<f64>,
    /// Vorticity amplitude of the output field.
    pub vorticity: Vec<f64>,
    /// The output field itself, carrying the opposite phase to the input.
    pub field: ModeField,
}

/// Solves Lambda w = R(r) x phase(2 theta) for the mode-2 field w.
///
/// A cosine input produces a sine output and vice versa; in both cases
/// the streamfunction amplitude solves A Omega = +/- R/(2 phi) and the
/// vorticity amplitude is (+/-R + g Omega)/(2 phi).
pub fn invert_lambda_mode2(
    grid: &Arc<RadialGrid>,
    pair: &HomogeneousPair,
    rhs: &[f64],
    phase: Phase,
) -> Result<Mode2Inversion> {
    if rhs.len() != grid.len() {
        return Err(VortexError::domain("rhs length does not match the grid"));
    }
    let r = grid.nodes();
    let sign = match phase {
        Phase::Cos => 1.0,
        Phase::Sin => -1.0,
    };
    let source: Vec<f64> = (0..grid.len())
        .map(|j| sign * rhs[j] / (2.0 * phi_swirl(r[j])))
        .collect();
    let stream = green_solve(grid, pair, &source);
    let vorticity: Vec<f64> = (0..grid.len())
        .map(|j| (sign * rhs[j] + g_of(r[j]) * stream[j]) / (2.0 * phi_swirl(r[j])))
        .collect();
    let mut field = ModeField::zeros(grid, 2);
    let c2: Vec<C64> = vorticity
        .iter()
        .map(|&v| match phase {
            // Cos input -> sine output: c2 = -i q / 2.
            Phase::Cos => C64::new(0.0, -v / 2.0),
            // Sin input -> cosine output: c2 = p / 2.
            Phase::Sin => C64::new(v / 2.0, 0.0),
        })
        .collect();
    field.set_physical(2, &c2);
    Ok(Mode2Inversion {
        stream,
        vorticity,
        field,
    })
}

/// Profile bundle of the limiting correction.
#[derive(Debug, Clone)]
pub struct WInftyProfile {
    pub psi_plus: Vec<f64>,
    pub psi_minus: Vec<f64>,
    pub w0: f64,
    pub w0_variation: f64,
    /// Streamfunction amplitude Omega(r).
    pub stream: Vec<f64>,
    /// Vorticity amplitude omega(r) = h (Omega - r^2/4); negative on
    /// (0, r_max).
    pub vorticity: Vec<f64>,
    /// Quadratic coefficient of Omega at the axis (window fit).
    pub omega_plus: f64,
    /// Coefficient of 1/r^2 in Omega at the rim (window fit).
    pub omega_minus: f64,
    /// The same constants from the direct kernel integrals.
    pub omega_plus_integral: f64,
    pub omega_minus_integral: f64,
    /// Relative defect of the defining equation, measured through the
    /// discrete commutator.
    pub residual: f64,
}

/// Computes the limiting correction and its profile diagnostics.
pub fn compute_w_infty(grid: &Arc<RadialGrid>) -> Result<(WInftyProfile, ModeField)> {
    let pair = solve_homogeneous(grid)?;
    compute_w_infty_with(grid, &pair)
}

/// Same as [`compute_w_infty`] with a precomputed homogeneous pair.
pub fn compute_w_infty_with(
    grid: &Arc<RadialGrid>,
    pair: &HomogeneousPair,
) -> Result<(WInftyProfile, ModeField)> {
    let r = grid.nodes();
    let nr = grid.len();
    let rhs: Vec<f64> = r.iter().map(|&x| -x * x * g_of(x) / 4.0).collect();
    let inv = invert_lambda_mode2(grid, pair, &rhs, Phase::Cos)?;

    // Asymptotic constants, by windowed fits and by the kernel integrals.
    let r_hi = 0.2;
    let lo: Vec<usize> = (0..nr).filter(|&j| r[j] <= r_hi).collect();
    let data_lo: Vec<f64> = lo.iter().map(|&j| inv.stream[j] / (r[j] * r[j])).collect();
    let x_lo: Vec<f64> = lo.iter().map(|&j| r[j]).collect();
    let omega_plus = fit_with_corrections(&x_lo, &data_lo, &[0.0, 2.0, 4.0])?;

    let window = (0.6 * grid.r_max(), 0.9 * grid.r_max());
    let hi: Vec<usize> = (0..nr)
        .filter(|&j| (window.0..=window.1).contains(&r[j]))
        .collect();
    let data_hi: Vec<f64> = hi.iter().map(|&j| inv.stream[j] * r[j] * r[j]).collect();
    let x_hi: Vec<f64> = hi.iter().map(|&j| r[j]).collect();
    let omega_minus = fit_with_corrections(&x_hi, &data_hi, &[0.0, -2.0, -4.0])?;

    let kernel_p: Vec<f64> = (0..nr)
        .map(|j| -r[j] * r[j] * h_potential(r[j]) * pair.psi_plus[j] / (4.0 * pair.w0))
        .collect();
    let kernel_m: Vec<f64> = (0..nr)
        .map(|j| -r[j] * r[j] * h_potential(r[j]) * pair.psi_minus[j] / (4.0 * pair.w0))
        .collect();
    let omega_plus_integral = grid.integrate_r(&kernel_p);
    let omega_minus_integral = grid.integrate_r(&kernel_m);

    let mg = crate::profiles::mg_profile(grid);
    let residual = crate::operators::apply_lambda(&inv.field)?
        .minus(&mg)
        .norm_x()
        / mg.norm_x();

    let profile = WInftyProfile {
        psi_plus: pair.psi_plus.clone(),
        psi_minus: pair.psi_minus.clone(),
        w0: pair.w0,
        w0_variation: pair.w0_variation,
        stream: inv.stream,
        vorticity: inv.vorticity,
        omega_plus,
        omega_minus,
        omega_plus_integral,
        omega_minus_integral,
        residual,
    };
    Ok((profile, inv.field))
}

/// Companion field z with Lambda z = L w, where w is the limiting
/// correction; it carries the cosine phase.
pub fn compute_z_infty(
    grid: &Arc<RadialGrid>,
    pair: &HomogeneousPair,
    w_infty: &ModeField,
) -> Result<ModeField> {
    let lw = apply_l(w_infty);
    // Sine-phase amplitude of the image: q = -2 Im c_2.
    let c2 = lw.physical(2);
    let q: Vec<f64> = c2.iter().map(|z| -2.0 * z.im).collect();
    let inv = invert_lambda_mode2(grid, pair, &q, Phase::Sin)?;
    Ok(inv.field)
}

/// Direct banded solve of the streamfunction boundary-value problem,
/// kept as an independent check on the Green quadrature.
pub fn stream_bvp_direct(grid: &Arc<RadialGrid>) -> Result<Vec<f64>> {
    let nr = grid.len();
    if nr < STENCIL {
        return Err(VortexError::domain("grid too small for stencils"));
    }
    let r = grid.nodes();
    let band = STENCIL - 1;
    let mut m = BandMatrix::new(nr, band, band);
    let parity = Parity::Even;
    for j in 0..nr - 1 {
        let d2 = grid.d2_row(parity, j);
        let d1 = grid.d1_row(parity, j);
        for (k, &w) in d2.w.iter().enumerate() {
            m.add(j, d2.start + k, C64::new(-w, 0.0));
        }
        for (k, &w) in d1.w.iter().enumerate() {
            m.add(j, d1.start + k, C64::new(-w / r[j], 0.0));
        }
        m.add(
            j,
            j,
            C64::new(4.0 / (r[j] * r[j]) - h_potential(r[j]), 0.0),
        );
    }
    // Rim closure matching the 1/r^2 decay.
    let j = nr - 1;
    let d1 = grid.d1_row(parity, j);
    for (k, &w) in d1.w.iter().enumerate() {
        m.add(j, d1.start + k, C64::new(w, 0.0));
    }
    m.add(j, j, C64::new(2.0 / r[j], 0.0));

    let lu = m.factor()?;
    let mut b: Vec<C64> = r
        .iter()
        .map(|&x| C64::new(-x * x * h_potential(x) / 4.0, 0.0))
        .collect();
    b[nr - 1] = C64::new(0.0, 0.0);
    lu.solve_in_place(&mut b);
    Ok(b.iter().map(|z| z.re).collect())
}

/// Least-squares fit of data against powers of r, returning the
/// coefficient of the first listed power.
fn fit_with_corrections(x: &[f64], y: &[f64], powers: &[f64]) -> Result<f64> {
    if x.len() < powers.len() + 2 {
        return Err(VortexError::numeric(
            "fit window holds too few grid nodes".to_string(),
        ));
    }
    let m = x.len();
    let n = powers.len();
    let mut a = nalgebra::DMatrix::zeros(m, n);
    for i in 0..m {
        for (k, &p) in powers.iter().enumerate() {
            a[(i, k)] = x[i].powf(p);
        }
    }
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-13)
        .map_err(|e| VortexError::numeric(format!("fit solve failed: {e}")))?;
    Ok(sol[0])
}

/// Relative size of the odd Taylor coefficients of a profile near the
/// axis, from a windowed polynomial fit in the normalized radius.
pub fn even_taylor_defect(grid: &Arc<RadialGrid>, f: &[f64], window: f64) -> Result<f64> {
    let r = grid.nodes();
    let idx: Vec<usize> = (0..grid.len()).filter(|&j| r[j] <= window).collect();
    if idx.len() < 12 {
        return Err(VortexError::numeric(
            "parity fit window holds too few grid nodes".to_string(),
        ));
    }
    let m = idx.len();
    let degrees: Vec<i32> = (2..=9).collect();
    let mut a = nalgebra::DMatrix::zeros(m, degrees.len());
    for (i, &j) in idx.iter().enumerate() {
        let rho = r[j] / window;
        for (k, &d) in degrees.iter().enumerate() {
            a[(i, k)] = rho.powi(d);
        }
    }
    let b = nalgebra::DVector::from_iterator(m, idx.iter().map(|&j| f[j]));
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-13)
        .map_err(|e| VortexError::numeric(format!("parity fit failed: {e}")))?;
    let even = sol[0].abs().max(sol[2].abs()).max(sol[4].abs()).max(sol[6].abs());
    let odd = sol[1].abs().max(sol[3].abs()).max(sol[5].abs()).max(sol[7].abs());
    if even == 0.0 {
        return Ok(0.0);
    }
    Ok(odd / even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SpectralConfig;
    use crate::grid::make_grid;
    use crate::profiles::mg_profile;

    fn grid() -> Arc<RadialGrid> {
        make_grid(&SpectralConfig::default()).unwrap()
    }

    #[test]
    fn potential_ratio_values_and_positivity() {
        assert_eq!(h_potential(0.0), 1.0);
        let e = std::f64::consts::E;
        assert!((h_potential(2.0) - 1.0 / (e - 1.0)).abs() < 1e-15);
        // The full coefficient 4/r^2 - h stays strictly positive.
        let mut min = f64::INFINITY;
        for k in 1..=100_000 {
            let z = 64.0 * k as f64 / 100_000.0;
            min = min.min(1.0 / z - z / z.exp_m1());
        }
        assert!(min > 0.0, "coefficient minimum {min}");
    }

    #[test]
    fn homogeneous_pair_matches_its_asymptotics() {
        let grid = grid();
        let r = grid.nodes();
        let pair = solve_homogeneous(&grid).unwrap();
        let n = grid.len();

        let r0 = r[0];
        assert!((pair.psi_minus[0] / (r0 * r0) - 1.0).abs() < 1e-4);
        let rn = r[n - 1];
        assert!((pair.psi_plus[n - 1] * rn * rn - 1.0).abs() < 1e-4);

        // Dual asymptotics through the Wronskian constant.
        assert!(pair.w0 > 0.0);
        assert!(pair.w0_variation < 1e-6, "variation {}", pair.w0_variation);
        assert!((4.0 * r0 * r0 * pair.psi_plus[0] / pair.w0 - 1.0).abs() < 0.01);
        assert!((4.0 * pair.psi_minus[n - 1] / (pair.w0 * rn * rn) - 1.0).abs() < 0.01);

        for j in 0..n - 1 {
            assert!(pair.dpsi_minus[j] > 0.0, "psi-' sign at r={}", r[j]);
            assert!(pair.dpsi_plus[j] < 0.0, "psi+' sign at r={}", r[j]);
        }
    }

    #[test]
    fn green_and_banded_routes_agree() {
        let grid = grid();
        let (profile, _) = compute_w_infty(&grid).unwrap();
        let direct = stream_bvp_direct(&grid).unwrap();
        let scale = profile
            .stream
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let worst = profile
            .stream
            .iter()
            .zip(&direct)
            .fold(0.0f64, |acc, (&a, &b)| acc.max((a - b).abs()));
        assert!(worst < 1e-7 * scale, "route disagreement {worst} vs {scale}");
    }

    #[test]
    fn stream_amplitude_has_the_quoted_asymptotic_constants() {
        let grid = grid();
        let (profile, _) = compute_w_infty(&grid).unwrap();
        assert!(
            (profile.omega_plus + 0.38).abs() < 0.02,
            "omega_plus {}",
            profile.omega_plus
        );
        assert!(
            (profile.omega_minus + 17.5).abs() < 0.3,
            "omega_minus {}",
            profile.omega_minus
        );
        // Fits and kernel integrals are independent routes.
        assert!((profile.omega_plus / profile.omega_plus_integral - 1.0).abs() < 1e-4);
        assert!((profile.omega_minus / profile.omega_minus_integral - 1.0).abs() < 1e-4);
    }

    #[test]
    fn stream_amplitude_boundary_behavior() {
        let grid = grid();
        let r = grid.nodes();
        let (profile, _) = compute_w_infty(&grid).unwrap();
        let scale = profile
            .stream
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        assert!(profile.stream[0].abs() < 1e-6 * scale);
        let n = grid.len();
        let rim = profile.omega_minus / (r[n - 1] * r[n - 1]);
        assert!((profile.stream[n - 1] / rim - 1.0).abs() < 0.01);

        // Log-log slopes at the two ends.
        let slope = |j0: usize, j1: usize| {
            (profile.stream[j1].abs().ln() - profile.stream[j0].abs().ln())
                / (r[j1].ln() - r[j0].ln())
        };
        let lo1 = r.partition_point(|&x| x < 0.02);
        let lo2 = r.partition_point(|&x| x < 0.05);
        assert!((slope(lo1, lo2) - 2.0).abs() < 0.01, "{}", slope(lo1, lo2));
        let hi1 = r.partition_point(|&x| x < 0.7 * grid.r_max());
        let hi2 = r.partition_point(|&x| x < 0.85 * grid.r_max());
        assert!((slope(hi1, hi2) + 2.0).abs() < 0.05, "{}", slope(hi1, hi2));
    }

    #[test]
    fn vorticity_amplitude_sign_and_parity() {
        let grid = grid();
        let (profile, _) = compute_w_infty(&grid).unwrap();
        let peak = profile
            .vorticity
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        assert!(profile.vorticity[0].abs() < 1e-6 * peak);
        for (j, &v) in profile.vorticity.iter().enumerate().skip(1) {
            assert!(v < 0.0, "vorticity sign at node {j}: {v}");
        }
        let defect = even_taylor_defect(&grid, &profile.vorticity, 0.3).unwrap();
        assert!(defect < 1e-6, "odd/even ratio {defect}");
    }

    #[test]
    fn defining_equation_residual_is_small() {
        let grid = grid();
        let (profile, _) = compute_w_infty(&grid).unwrap();
        assert!(profile.residual < 1e-6, "residual {}", profile.residual);
    }

    #[test]
    fn residual_tightens_under_refinement() {
        let config = SpectralConfig::default().with_n_r(1024);
        let grid = make_grid(&config).unwrap();
        let (profile, _) = compute_w_infty(&grid).unwrap();
        assert!(profile.residual < 1e-7, "residual {}", profile.residual);
    }

    #[test]
    fn zero_source_inverts_to_zero() {
        let grid = grid();
        let pair = solve_homogeneous(&grid).unwrap();
        let rhs = vec![0.0; grid.len()];
        let inv = invert_lambda_mode2(&grid, &pair, &rhs, Phase::Cos).unwrap();
        assert!(inv.field.norm_x() == 0.0);
        assert!(inv.stream.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn companion_field_solves_its_equation() {
        let grid = grid();
        let pair = solve_homogeneous(&grid).unwrap();
        let (_, w) = compute_w_infty_with(&grid, &pair).unwrap();
        let z = compute_z_infty(&grid, &pair, &w).unwrap();
        // Pure mode 2, cosine phase.
        assert!(z.scaled(0).iter().all(|v| v.norm_sqr() == 0.0));
        assert!(z.scaled(1).iter().all(|v| v.norm_sqr() == 0.0));
        let lw = apply_l(&w);
        let res = crate::operators::apply_lambda(&z)
            .unwrap()
            .minus(&lw)
            .norm_x()
            / lw.norm_x();
        assert!(res < 1e-6, "companion residual {res}");
    }
}
