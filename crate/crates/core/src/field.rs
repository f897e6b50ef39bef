//! Scalar fields on the disk as azimuthal Fourier modes with radial
//! profiles on the collocation grid.
//!
//! A real field w(r, theta) = sum_n c_n(r) e^{i n theta} is stored through
//! its nonnegative modes only; reality fixes c_{-n} = conj(c_n) and forces
//! c_0 to be real.  Profiles are kept in the Gaussian-rescaled form
//! f_n = c_n / sqrt(G) in which the weighted norms are plain L^2 sums and
//! the linearized operators stay well conditioned out to the rim of the
//! disk, where 1/G reaches e^{64}.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VortexError};
use crate::grid::{Parity, RadialGrid};

pub type C64 = Complex64;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Checks that two objects were built on the same grid instance.
pub fn same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || (a.len() == b.len() && a.r_max() == b.r_max()) {
        Ok(())
    } else {
        Err(VortexError::domain(
            "fields live on different grids".to_string(),
        ))
    }
}

/// Mode-resolved scalar field in the rescaled representation.
#[derive(Debug, Clone)]
pub struct ModeField {
    grid: Arc<RadialGrid>,
    /// scaled[n][j] = c_n(r_j) / sqrt(G(r_j)), for n = 0..=n_modes.
    scaled: Vec<Vec<C64>>,
}

impl ModeField {
    pub fn zeros(grid: &Arc<RadialGrid>, n_modes: usize) -> ModeField {
        ModeField {
            grid: grid.clone(),
            scaled: vec![vec![C64::new(0.0, 0.0); grid.len()]; n_modes + 1],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.scaled.len() - 1
    }

    pub fn scaled(&self, n: usize) -> &[C64] {
        &self.scaled[n]
    }

    pub fn scaled_mut(&mut self, n: usize) -> &mut [C64] {
        &mut self.scaled[n]
    }

    pub fn set_scaled(&mut self, n: usize, profile: Vec<C64>) {
        assert_eq!(profile.len(), self.grid.len());
        self.scaled[n] = profile;
    }

    /// Physical profile c_n(r_j).
    pub fn physical(&self, n: usize) -> Vec<C64> {
        let sg = self.grid.sqrt_gauss();
        self.scaled[n]
            .iter()
            .zip(sg)
            .map(|(&f, &s)| f * s)
            .collect()
    }

    pub fn set_physical(&mut self, n: usize, profile: &[C64]) {
        assert_eq!(profile.len(), self.grid.len());
        let sg = self.grid.sqrt_gauss();
        self.scaled[n] = profile.iter().zip(sg).map(|(&c, &s)| c / s).collect();
    }

    /// Grows or truncates the retained mode range; new modes are zero.
    pub fn resized(&self, n_modes: usize) -> ModeField {
        let mut out = ModeField::zeros(&self.grid, n_modes);
        for n in 0..=n_modes.min(self.n_modes()) {
            out.scaled[n] = self.scaled[n].clone();
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        for modes in &self.scaled {
            for z in modes {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(VortexError::numeric(
                        "field contains non-finite coefficients",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Largest imaginary part left in the mode-0 profile, which reality
    /// requires to vanish.  Reported relative to the field scale.
    pub fn reality_defect(&self) -> f64 {
        let scale = self
            .scaled
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.scaled[0]
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Integral of the field over the plane.
    pub fn mean(&self) -> f64 {
        self.mean_complex().re
    }

    pub fn mean_complex(&self) -> C64 {
        let sg = self.grid.sqrt_gauss();
        let w = self.grid.weights_r();
        let mut s = C64::new(0.0, 0.0);
        for j in 0..self.grid.len() {
            s += w[j] * sg[j] * self.scaled[0][j];
        }
        TWO_PI * s
    }

    /// Removes the mean by subtracting a multiple of the reference
    /// Gaussian, which integrates to one.
    pub fn remove_mean(&mut self) {
        let m = self.mean_complex();
        let sg = self.grid.sqrt_gauss();
        for j in 0..self.grid.len() {
            self.scaled[0][j] -= m * sg[j];
        }
    }

    /// Weighted L^2 norm: ||w||^2 = int |w|^2 / G dx.
    pub fn norm_x(&self) -> f64 {
        self.norm_x_sq().sqrt()
    }

    pub fn norm_x_sq(&self) -> f64 {
        let w = self.grid.weights_r();
        let mut total = 0.0;
        for (n, modes) in self.scaled.iter().enumerate() {
            let fac = if n == 0 { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for j in 0..w.len() {
                s += w[j] * modes[j].norm_sqr();
            }
            total += fac * s;
        }
        TWO_PI * total
    }

    /// Weighted inner product (w, v) = int w v / G dx.
    pub fn inner_x(&self, other: &ModeField) -> f64 {
        let w = self.grid.weights_r();
        let nmax = self.n_modes().min(other.n_modes());
        let mut total = 0.0;
        for n in 0..=nmax {
            let fac = if n == 0 { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for j in 0..w.len() {
                s += w[j] * (self.scaled[n][j] * other.scaled[n][j].conj()).re;
            }
            total += fac * s;
        }
        TWO_PI * total
    }

    /// Squared weighted norm of the gradient: int |grad w|^2 / G dx,
    /// evaluated mode by mode as |c_n'|^2 + n^2 |c_n|^2 / r^2 under the
    /// weight, which in the rescaled representation becomes
    /// |f_n' - (r/4) f_n|^2 + n^2 |f_n|^2 / r^2.
    pub fn grad_sq_x(&self) -> f64 {
        let w = self.grid.weights_r();
        let r = self.grid.nodes();
        let mut total = 0.0;
        for (n, modes) in self.scaled.iter().enumerate() {
            let fac = if n == 0 { 1.0 } else { 2.0 };
            let df = self.grid.d1_c(Parity::of_mode(n), modes);
            let nn = (n * n) as f64;
            let mut s = 0.0;
            for j in 0..w.len() {
                let radial = df[j] - 0.25 * r[j] * modes[j];
                s += w[j] * (radial.norm_sqr() + nn * modes[j].norm_sqr() / (r[j] * r[j]));
            }
            total += fac * s;
        }
        TWO_PI * total
    }

    /// Norm of the space carrying one weighted derivative:
    /// ||w||_Y^2 = ||w||_X^2 + ||grad w||_X^2.
    pub fn norm_y(&self) -> f64 {
        (self.norm_x_sq() + self.grad_sq_x()).sqrt()
    }

    /// Oscillator quadratic form int |grad f|^2 + |x|^2 f^2 / 16 dx of the
    /// rescaled profile f = w / sqrt(G).
    pub fn energy(&self) -> f64 {
        let w = self.grid.weights_r();
        let r = self.grid.nodes();
        let mut total = 0.0;
        for (n, modes) in self.scaled.iter().enumerate() {
            let fac = if n == 0 { 1.0 } else { 2.0 };
            let df = self.grid.d1_c(Parity::of_mode(n), modes);
            let nn = (n * n) as f64;
            let mut s = 0.0;
            for j in 0..w.len() {
                s += w[j]
                    * (df[j].norm_sqr()
                        + (nn / (r[j] * r[j]) + r[j] * r[j] / 16.0) * modes[j].norm_sqr());
            }
            total += fac * s;
        }
        TWO_PI * total
    }

    pub fn scale(&mut self, a: f64) {
        for modes in &mut self.scaled {
            for z in modes.iter_mut() {
                *z *= a;
            }
        }
    }

    pub fn scaled_by(&self, a: f64) -> ModeField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// self += a * other (modes beyond either range treated as zero).
    pub fn add_scaled(&mut self, a: f64, other: &ModeField) {
        if other.n_modes() > self.n_modes() {
            let mut grown = self.resized(other.n_modes());
            grown.add_scaled(a, other);
            *self = grown;
            return;
        }
        for n in 0..=other.n_modes() {
            for j in 0..self.grid.len() {
                self.scaled[n][j] += a * other.scaled[n][j];
            }
        }
    }

    pub fn minus(&self, other: &ModeField) -> ModeField {
        let mut out = self.resized(self.n_modes().max(other.n_modes()));
        out.add_scaled(-1.0, other);
        out
    }

    pub fn plus(&self, other: &ModeField) -> ModeField {
        let mut out = self.resized(self.n_modes().max(other.n_modes()));
        out.add_scaled(1.0, other);
        out
    }

    /// Real samples w(r_j, theta_k) on the tensor grid with n_theta
    /// equispaced angles.
    pub fn synthesize(&self, n_theta: usize) -> PhysicalField {
        assert!(n_theta >= 2 * self.n_modes() + 1, "angular grid too coarse");
        let nr = self.grid.len();
        let sg = self.grid.sqrt_gauss();
        let mut values = vec![0.0; nr * n_theta];
        let table = trig_table(self.n_modes(), n_theta);
        for j in 0..nr {
            for k in 0..n_theta {
                let mut s = self.scaled[0][j].re;
                for n in 1..=self.n_modes() {
                    let (c, sn) = table[n][k];
                    let z = self.scaled[n][j];
                    s += 2.0 * (z.re * c - z.im * sn);
                }
                values[j * n_theta + k] = s * sg[j];
            }
        }
        PhysicalField {
            grid: self.grid.clone(),
            n_theta,
            values,
        }
    }

    /// Projects tensor-grid samples onto modes 0..=n_modes.
    pub fn project(grid: &Arc<RadialGrid>, samples: &PhysicalField, n_modes: usize) -> ModeField {
        same_grid(grid, &samples.grid).expect("projection grid mismatch");
        let nr = grid.len();
        let m = samples.n_theta;
        let table = trig_table(n_modes, m);
        let sg = grid.sqrt_gauss();
        let mut out = ModeField::zeros(grid, n_modes);
        for n in 0..=n_modes {
            let row = &table[n];
            let prof = out.scaled_mut(n);
            for j in 0..nr {
                let base = j * m;
                let mut acc = C64::new(0.0, 0.0);
                for (k, &(c, s)) in row.iter().enumerate() {
                    // e^{-i n theta_k}
                    acc += samples.values[base + k] * C64::new(c, -s);
                }
                prof[j] = acc / (m as f64 * sg[j]);
            }
        }
        out
    }

    /// Partial derivative along x1, with the mode range grown by one.
    pub fn dx1(&self) -> ModeField {
        self.derivative(true)
    }

    /// Partial derivative along x2, with the mode range grown by one.
    pub fn dx2(&self) -> ModeField {
        self.derivative(false)
    }

    fn derivative(&self, along_x1: bool) -> ModeField {
        let nm = self.n_modes();
        let nr = self.grid.len();
        let r = self.grid.nodes();
        // Signed accumulation: source modes -nm..=nm contribute to
        // n +/- 1; reality of the result is restored at the end.
        let width = 2 * (nm + 1) + 1;
        let offset = (nm + 1) as isize;
        let mut acc = vec![vec![C64::new(0.0, 0.0); nr]; width];
        for n in 0..=nm {
            let f = &self.scaled[n];
            let df = self.grid.d1_c(Parity::of_mode(n), f);
            for &sign in &[1isize, -1] {
                if n == 0 && sign < 0 {
                    continue;
                }
                let sn = sign * n as isize;
                let fs: Vec<C64> = if sign > 0 {
                    f.clone()
                } else {
                    f.iter().map(|z| z.conj()).collect()
                };
                let dfs: Vec<C64> = if sign > 0 {
                    df.clone()
                } else {
                    df.iter().map(|z| z.conj()).collect()
                };
                for &shift in &[1isize, -1] {
                    let target = sn + shift;
                    let idx = (target + offset) as usize;
                    for j in 0..nr {
                        // radial part f' -/+ n f / r - (r/4) f for shifts
                        // up/down in mode number
                        let radial = dfs[j] - (shift as f64) * (sn as f64) * fs[j] / r[j]
                            - 0.25 * r[j] * fs[j];
                        let coeff = if along_x1 {
                            C64::new(0.5, 0.0)
                        } else {
                            C64::new(0.0, -0.5 * shift as f64)
                        };
                        acc[idx][j] += coeff * radial;
                    }
                }
            }
        }
        let mut out = ModeField::zeros(&self.grid, nm + 1);
        for n in 0..=nm + 1 {
            out.scaled[n] = acc[(n as isize + offset) as usize].clone();
        }
        out
    }

    /// Random normalized field with polynomial-times-Gaussian profiles,
    /// reproducible from the seed.
    pub fn random(
        grid: &Arc<RadialGrid>,
        n_modes: usize,
        seed: u64,
        zero_mean: bool,
    ) -> ModeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = ModeField::zeros(grid, n_modes);
        let r = grid.nodes();
        for n in 0..=n_modes {
            let damp = 1.0 / (1.0 + (n * n) as f64);
            let coeffs: Vec<C64> = (0..4)
                .map(|k| {
                    let re = rng.gen_range(-1.0..1.0);
                    let im = if n == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
                    C64::new(re, im) * 0.5_f64.powi(k)
                })
                .collect();
            let prof = out.scaled_mut(n);
            for j in 0..r.len() {
                let x = r[j] / 4.0;
                let mut poly = C64::new(0.0, 0.0);
                let mut xp = 1.0;
                for c in &coeffs {
                    poly += c * xp;
                    xp *= x * x;
                }
                let envelope = r[j].powi(n as i32) * (-r[j] * r[j] / 7.0).exp();
                prof[j] = damp * envelope * poly;
            }
        }
        if zero_mean {
            out.remove_mean();
        }
        let nrm = out.norm_x();
        if nrm > 0.0 {
            out.scale(1.0 / nrm);
        }
        out
    }
}

fn trig_table(n_modes: usize, n_theta: usize) -> Vec<Vec<(f64, f64)>> {
    (0..=n_modes)
        .map(|n| {
            (0..n_theta)
                .map(|k| {
                    let t = TWO_PI * (n * k) as f64 / n_theta as f64;
                    (t.cos(), t.sin())
                })
                .collect()
        })
        .collect()
}

/// Real samples of a field on the polar tensor grid.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    grid: Arc<RadialGrid>,
    n_theta: usize,
    /// Row-major: values[j * n_theta + k] = w(r_j, theta_k).
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_theta + k]
    }

    pub fn theta(&self, k: usize) -> f64 {
        TWO_PI * k as f64 / self.n_theta as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Integral over the plane by tensor quadrature.
    pub fn mean(&self) -> f64 {
        let w = self.grid.weights_r();
        let mut s = 0.0;
        for j in 0..self.grid.len() {
            let base = j * self.n_theta;
            let ring: f64 = self.values[base..base + self.n_theta].iter().sum();
            s += w[j] * ring;
        }
        TWO_PI * s / self.n_theta as f64
    }
}

/// Divergence-free velocity field, stored mode by mode in physical
/// (unscaled) polar components.
#[derive(Debug, Clone)]
pub struct VelocityField {
    grid: Arc<RadialGrid>,
    /// Radial component modes; v_r of mode 0 vanishes identically.
    vr: Vec<Vec<C64>>,
    /// Angular component modes.
    vt: Vec<Vec<C64>>,
}

impl VelocityField {
    pub fn zeros(grid: &Arc<RadialGrid>, n_modes: usize) -> VelocityField {
        VelocityField {
            grid: grid.clone(),
            vr: vec![vec![C64::new(0.0, 0.0); grid.len()]; n_modes + 1],
            vt: vec![vec![C64::new(0.0, 0.0); grid.len()]; n_modes + 1],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.vr.len() - 1
    }

    pub fn vr(&self, n: usize) -> &[C64] {
        &self.vr[n]
    }

    pub fn vt(&self, n: usize) -> &[C64] {
        &self.vt[n]
    }

    pub fn vr_mut(&mut self, n: usize) -> &mut [C64] {
        &mut self.vr[n]
    }

    pub fn vt_mut(&mut self, n: usize) -> &mut [C64] {
        &mut self.vt[n]
    }

    pub fn add_scaled(&mut self, a: f64, other: &VelocityField) {
        assert!(other.n_modes() <= self.n_modes());
        for n in 0..=other.n_modes() {
            for j in 0..self.grid.len() {
                self.vr[n][j] += a * other.vr[n][j];
                self.vt[n][j] += a * other.vt[n][j];
            }
        }
    }

    /// Largest magnitude over modes and nodes, a cheap stability gauge.
    pub fn amplitude(&self) -> f64 {
        self.vr
            .iter()
            .chain(self.vt.iter())
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Real samples of both components on the tensor grid.
    pub fn synthesize(&self, n_theta: usize) -> (Vec<f64>, Vec<f64>) {
        let nr = self.grid.len();
        let table = trig_table(self.n_modes(), n_theta);
        let mut out_r = vec![0.0; nr * n_theta];
        let mut out_t = vec![0.0; nr * n_theta];
        for j in 0..nr {
            for k in 0..n_theta {
                let mut sr = self.vr[0][j].re;
                let mut st = self.vt[0][j].re;
                for n in 1..=self.n_modes() {
                    let (c, s) = table[n][k];
                    let zr = self.vr[n][j];
                    let zt = self.vt[n][j];
                    sr += 2.0 * (zr.re * c - zr.im * s);
                    st += 2.0 * (zt.re * c - zt.im * s);
                }
                out_r[j * n_theta + k] = sr;
                out_t[j * n_theta + k] = st;
            }
        }
        (out_r, out_t)
    }
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
    fn synthesis_of_single_modes_has_expected_angular_shape() {
        let grid = grid();
        let mut w = ModeField::zeros(&grid, 4);
        // c_2 = (1 - i) * e^{-r^2/4} gives 2 cos(2t) + 2 sin(2t) at the
        // radial scale of the envelope.
        let prof: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|&r| C64::new(1.0, -1.0) * (-r * r / 4.0).exp())
            .collect();
        w.set_physical(2, &prof);
        let phys = w.synthesize(32);
        let j = 100;
        let env = (-grid.nodes()[j] * grid.nodes()[j] / 4.0).exp();
        for k in 0..32 {
            let t = phys.theta(k);
            let expect = env * (2.0 * (2.0 * t).cos() + 2.0 * (2.0 * t).sin());
            assert!((phys.sample(j, k) - expect).abs() < 1e-12 * env.max(1e-300));
        }
    }

    #[test]
    fn project_round_trips_synthesis() {
        let grid = grid();
        let w = ModeField::random(&grid, 6, 42, false);
        let phys = w.synthesize(20);
        let back = ModeField::project(&grid, &phys, 6);
        let diff = back.minus(&w);
        assert!(diff.norm_x() < 1e-12 * w.norm_x());
    }

    #[test]
    fn mean_of_random_zero_mean_field_vanishes() {
        let grid = grid();
        let w = ModeField::random(&grid, 8, 7, true);
        assert!(w.mean().abs() < 1e-13);
        assert!((w.norm_x() - 1.0).abs() < 1e-12);
        assert!(w.reality_defect() < 1e-14);
    }

    #[test]
    fn derivative_of_gaussian_matches_closed_form() {
        let grid = grid();
        let mut g = ModeField::zeros(&grid, 2);
        let prof: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|&r| C64::new((-r * r / 4.0).exp() / (4.0 * std::f64::consts::PI), 0.0))
            .collect();
        g.set_physical(0, &prof);
        let d1 = g.dx1();
        let d2 = g.dx2();
        // d1 G has c_1 = -(r/4) g, d2 G has c_1 = i (r/4) g.
        let c1 = d1.physical(1);
        let c1b = d2.physical(1);
        for (j, &r) in grid.nodes().iter().enumerate() {
            let gj = (-r * r / 4.0).exp() / (4.0 * std::f64::consts::PI);
            assert!((c1[j].re - (-(r / 4.0) * gj)).abs() < 1e-12);
            assert!(c1[j].im.abs() < 1e-14);
            assert!((c1b[j].im - (r / 4.0) * gj).abs() < 1e-12);
            assert!(c1b[j].re.abs() < 1e-14);
        }
        // ||d1 G||_X = 1/sqrt(2), ||G||_Y = sqrt(2).
        assert!((d1.norm_x() - 0.5_f64.sqrt()).abs() < 1e-10);
        assert!((g.norm_y() - 2.0_f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn physical_mean_agrees_with_mode_mean() {
        let grid = grid();
        let w = ModeField::random(&grid, 5, 3, false);
        let phys = w.synthesize(24);
        assert!((phys.mean() - w.mean()).abs() < 1e-12);
    }
}
