//! Velocity reconstruction from vorticity on the disk and the advection
//! of mode fields by divergence-free velocities.
//!
//! Mode n >= 1 of the streamfunction solves the radial Helmholtz problem
//! -(psi'' + psi'/r - n^2 psi/r^2) = c_n with the regularity closure at
//! the origin and the decay condition psi' + (n/r) psi = 0 at the rim,
//! which is exact for vorticity supported inside the disk.  Mode 0 of the
//! swirl velocity is the running circulation integral divided by r.

use std::sync::Arc;

use crate::banded::{BandLU, BandMatrix};
use crate::error::{Result, VortexError};
use crate::field::{same_grid, C64, ModeField, VelocityField};
use crate::grid::{Parity, RadialGrid, STENCIL};

/// Factored streamfunction solvers for modes 1..=n_modes on one grid.
#[derive(Debug)]
pub struct StreamSolver {
    grid: Arc<RadialGrid>,
    n_modes: usize,
    lus: Vec<BandLU>,
}

impl StreamSolver {
    pub fn new(grid: &Arc<RadialGrid>, n_modes: usize) -> Result<StreamSolver> {
        let mut lus = Vec::with_capacity(n_modes);
        for n in 1..=n_modes {
            lus.push(helmholtz_matrix(grid, n)?.factor()?);
        }
        Ok(StreamSolver {
            grid: grid.clone(),
            n_modes,
            lus,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Streamfunction profile psi_n from the physical vorticity profile
    /// c_n, for 1 <= n <= n_modes.
    pub fn solve_mode(&self, n: usize, c: &[C64]) -> Vec<C64> {
        assert!((1..=self.n_modes).contains(&n), "mode {n} not factored");
        assert_eq!(c.len(), self.grid.len());
        let mut rhs = c.to_vec();
        // The rim row carries the decay condition, not the equation.
        *rhs.last_mut().unwrap() = C64::new(0.0, 0.0);
        self.lus[n - 1].solve_in_place(&mut rhs);
        rhs
    }
}

/// Assembles the banded operator of the mode-n streamfunction problem.
fn helmholtz_matrix(grid: &Arc<RadialGrid>, n: usize) -> Result<BandMatrix> {
    let nr = grid.len();
    if nr < STENCIL {
        return Err(VortexError::domain("grid too small for stencils"));
    }
    let band = STENCIL - 1;
    let mut m = BandMatrix::new(nr, band, band);
    let parity = Parity::of_mode(n);
    let nn = (n * n) as f64;
    let r = grid.nodes();
    for j in 0..nr - 1 {
        let d2 = grid.d2_row(parity, j);
        let d1 = grid.d1_row(parity, j);
        for (k, &w) in d2.w.iter().enumerate() {
            m.add(j, d2.start + k, C64::new(-w, 0.0));
        }
        for (k, &w) in d1.w.iter().enumerate() {
            m.add(j, d1.start + k, C64::new(-w / r[j], 0.0));
        }
        m.add(j, j, C64::new(nn / (r[j] * r[j]), 0.0));
    }
    // Rim row: psi' + (n/r) psi = 0.
    let j = nr - 1;
    let d1 = grid.d1_row(parity, j);
    for (k, &w) in d1.w.iter().enumerate() {
        m.add(j, d1.start + k, C64::new(w, 0.0));
    }
    m.add(j, j, C64::new(n as f64 / r[j], 0.0));
    Ok(m)
}

/// Velocity induced by a mode-resolved vorticity field.
pub fn velocity_from_vorticity(w: &ModeField) -> Result<VelocityField> {
    let solver = StreamSolver::new(w.grid(), w.n_modes())?;
    velocity_with_solver(&solver, w)
}

/// Same as [`velocity_from_vorticity`] with a prebuilt solver.
pub fn velocity_with_solver(solver: &StreamSolver, w: &ModeField) -> Result<VelocityField> {
    same_grid(&solver.grid, w.grid())?;
    assert!(solver.n_modes >= w.n_modes(), "solver misses modes");
    let grid = w.grid();
    let nr = grid.len();
    let r = grid.nodes();
    let mut v = VelocityField::zeros(grid, w.n_modes());

    // Mode 0: v_theta = (1/r) int_0^r s c_0(s) ds, v_r = 0.
    let c0 = w.physical(0);
    let re: Vec<f64> = c0.iter().zip(r).map(|(z, &ri)| z.re * ri).collect();
    let im: Vec<f64> = c0.iter().zip(r).map(|(z, &ri)| z.im * ri).collect();
    let cum_re = grid.cumulative(&re);
    let cum_im = grid.cumulative(&im);
    for j in 0..nr {
        v.vt_mut(0)[j] = C64::new(cum_re[j], cum_im[j]) / r[j];
    }

    for n in 1..=w.n_modes() {
        let c = w.physical(n);
        let psi = solver.solve_mode(n, &c);
        let dpsi = grid.d1_c(Parity::of_mode(n), &psi);
        let i_n = C64::new(0.0, n as f64);
        for j in 0..nr {
            v.vr_mut(n)[j] = i_n * psi[j] / r[j];
            v.vt_mut(n)[j] = -dpsi[j];
        }
    }
    Ok(v)
}

/// Streamfunction profile for a single mode of a physical vorticity
/// profile; thin wrapper used by diagnostics.
pub fn streamfunction_mode(grid: &Arc<RadialGrid>, n: usize, c: &[C64]) -> Result<Vec<C64>> {
    let solver = StreamSolver::new(grid, n)?;
    Ok(solver.solve_mode(n, c))
}

/// Azimuthal curl of a velocity field: one vorticity mode per velocity
/// mode, (1/r) [ (r v_theta_n)' - i n v_r_n ].
pub fn curl(v: &VelocityField) -> ModeField {
    let grid = v.grid();
    let r = grid.nodes();
    let mut w = ModeField::zeros(grid, v.n_modes());
    for n in 0..=v.n_modes() {
        let rvt: Vec<C64> = v.vt(n).iter().zip(r).map(|(&z, &ri)| z * ri).collect();
        let d = grid.d1_c(Parity::of_mode(n), &rvt);
        let i_n = C64::new(0.0, n as f64);
        let prof: Vec<C64> = (0..grid.len())
            .map(|j| (d[j] - i_n * v.vr(n)[j]) / r[j])
            .collect();
        w.set_physical(n, &prof);
    }
    w
}

/// Largest mode-wise divergence residual (1/r)(r v_r_n)' + (i n / r) v_t_n,
/// measured in the weighted norm relative to the field amplitude.
pub fn divergence_defect(v: &VelocityField) -> f64 {
    let grid = v.grid();
    let r = grid.nodes();
    let mut worst: f64 = 0.0;
    let amp = v.amplitude().max(1e-300);
    for n in 0..=v.n_modes() {
        // r v_r_n = i n psi_n carries the parity of the mode itself.
        let rvr: Vec<C64> = v.vr(n).iter().zip(r).map(|(&z, &ri)| z * ri).collect();
        let d = grid.d1_c(Parity::of_mode(n), &rvr);
        let i_n = C64::new(0.0, n as f64);
        for j in 0..grid.len() {
            let div = (d[j] + i_n * v.vt(n)[j]) / r[j];
            worst = worst.max(div.norm());
        }
    }
    worst / amp
}

/// Advection term v . grad w projected back onto the retained modes,
/// evaluated pseudo-spectrally on a dealiased angular grid.
///
/// In the rescaled representation the product reads
/// v_r (f' - (r/4) f) + v_theta (1/r) f_theta.
pub fn advect(v: &VelocityField, w: &ModeField, n_theta: usize) -> Result<ModeField> {
    same_grid(v.grid(), w.grid())?;
    let grid = w.grid();
    let nr = grid.len();
    let nm = w.n_modes();
    assert!(
        n_theta >= 2 * nm.max(v.n_modes()) + 1,
        "angular grid too coarse for dealiasing"
    );
    let r = grid.nodes();

    // Radial and angular derivative factors of the scaled field, stored
    // as mode profiles of real fields.
    let mut radial = Vec::with_capacity(nm + 1);
    let mut angular = Vec::with_capacity(nm + 1);
    for n in 0..=nm {
        let f = w.scaled(n);
        let df = grid.d1_c(Parity::of_mode(n), f);
        let rad: Vec<C64> = (0..nr).map(|j| df[j] - 0.25 * r[j] * f[j]).collect();
        let ang: Vec<C64> = (0..nr)
            .map(|j| C64::new(0.0, n as f64) * f[j] / r[j])
            .collect();
        radial.push(rad);
        angular.push(ang);
    }

    let (vr_s, vt_s) = v.synthesize(n_theta);
    let rad_s = synth_real(&radial, n_theta);
    let ang_s = synth_real(&angular, n_theta);

    let mut product = vec![0.0; nr * n_theta];
    for idx in 0..nr * n_theta {
        product[idx] = vr_s[idx] * rad_s[idx] + vt_s[idx] * ang_s[idx];
    }

    // Project the scaled product back onto modes 0..=nm.
    let table = unit_roots(n_theta);
    let mut out = ModeField::zeros(grid, nm);
    for n in 0..=nm {
        let prof = out.scaled_mut(n);
        for j in 0..nr {
            let base = j * n_theta;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n_theta {
                let (c, s) = table[(n * k) % n_theta];
                acc += product[base + k] * C64::new(c, -s);
            }
            prof[j] = acc / n_theta as f64;
        }
    }
    Ok(out)
}

/// (cos, sin) of the n_theta-th roots of unity.
fn unit_roots(n_theta: usize) -> Vec<(f64, f64)> {
    (0..n_theta)
        .map(|m| {
            let t = 2.0 * std::f64::consts::PI * m as f64 / n_theta as f64;
            (t.cos(), t.sin())
        })
        .collect()
}

/// Synthesizes a conjugate-symmetric mode stack to real tensor samples.
fn synth_real(modes: &[Vec<C64>], n_theta: usize) -> Vec<f64> {
    let nm = modes.len() - 1;
    let nr = modes[0].len();
    let table = unit_roots(n_theta);
    let mut out = vec![0.0; nr * n_theta];
    for j in 0..nr {
        for k in 0..n_theta {
            let mut s = modes[0][j].re;
            for n in 1..=nm {
                let (c, sn) = table[(n * k) % n_theta];
                let z = modes[n][j];
                s += 2.0 * (z.re * c - z.im * sn);
            }
            out[j * n_theta + k] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SpectralConfig;
    use crate::grid::make_grid;
    use crate::profiles::{gaussian_profile, mg_profile, vg_profile};

    fn grid() -> Arc<RadialGrid> {
        make_grid(&SpectralConfig::default()).unwrap()
    }

    #[test]
    fn gaussian_vortex_induces_its_closed_form_swirl() {
        let grid = grid();
        let g = gaussian_profile(&grid);
        let v = velocity_from_vorticity(&g).unwrap();
        let vg = vg_profile(&grid);
        let mut worst: f64 = 0.0;
        for j in 0..grid.len() {
            worst = worst.max((v.vt(0)[j] - vg.vt(0)[j]).norm());
            assert_eq!(v.vr(0)[j], C64::new(0.0, 0.0));
        }
        assert!(worst < 1e-12, "swirl error {worst}");
    }

    #[test]
    fn manufactured_mode_two_streamfunction_is_recovered() {
        let grid = grid();
        // psi = r^2 e^{-r^2/2} solves -Delta_2 psi = (6 r^2 - r^4) e^{-r^2/2}.
        let c: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|&r| C64::new((6.0 * r * r - r.powi(4)) * (-r * r / 2.0).exp(), 0.0))
            .collect();
        let psi = streamfunction_mode(&grid, 2, &c).unwrap();
        let mut worst: f64 = 0.0;
        for (j, &r) in grid.nodes().iter().enumerate() {
            let exact = r * r * (-r * r / 2.0).exp();
            worst = worst.max((psi[j].re - exact).abs());
            assert!(psi[j].im.abs() < 1e-14);
        }
        assert!(worst < 1e-10, "streamfunction error {worst}");
    }

    #[test]
    fn zero_vorticity_gives_zero_velocity() {
        let grid = grid();
        let w = ModeField::zeros(&grid, 4);
        let v = velocity_from_vorticity(&w).unwrap();
        assert_eq!(v.amplitude(), 0.0);
    }

    #[test]
    fn velocity_is_divergence_free_and_inverts_curl() {
        let grid = grid();
        let w = ModeField::random(&grid, 4, 11, true);
        let v = velocity_from_vorticity(&w).unwrap();
        assert!(divergence_defect(&v) < 1e-8);
        // Velocities decay algebraically, so the curl carries flat
        // roundoff in absolute terms; compare physical profiles, where
        // the weighted norm would amplify rim roundoff by e^{32}.
        let back = curl(&v);
        for n in 0..=w.n_modes() {
            let want = w.physical(n);
            let got = back.physical(n);
            let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let err = want
                .iter()
                .zip(&got)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-8 * scale.max(1e-300), "mode {n}: {err} vs {scale}");
        }
    }

    #[test]
    fn gaussian_self_advection_vanishes() {
        let grid = grid();
        let g = gaussian_profile(&grid);
        let v = velocity_from_vorticity(&g).unwrap();
        let a = advect(&v, &g, 28).unwrap();
        assert!(a.norm_x() < 1e-10);
    }

    #[test]
    fn strain_image_self_advection_fills_only_modes_zero_and_four() {
        let grid = grid();
        let mg = mg_profile(&grid).resized(6);
        let v = velocity_from_vorticity(&mg).unwrap();
        let a = advect(&v, &mg, 28).unwrap();
        let total = a.norm_x();
        assert!(total > 1e-6, "self-advection unexpectedly tiny");
        for n in [1usize, 2, 3, 5, 6] {
            let m: f64 = a.scaled(n).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(m < 1e-13 * total, "mode {n} leaked: {m}");
        }
        assert!(a.mean().abs() < 1e-10, "advection mean {}", a.mean());
    }

    #[test]
    fn advection_is_dealiased() {
        let grid = grid();
        let w = ModeField::random(&grid, 8, 5, true);
        let v = velocity_from_vorticity(&w).unwrap();
        let coarse = advect(&v, &w, 28).unwrap();
        let fine = advect(&v, &w, 64).unwrap();
        let diff = coarse.minus(&fine).norm_x();
        assert!(diff < 1e-12 * coarse.norm_x().max(1.0), "aliasing {diff}");
    }
}
