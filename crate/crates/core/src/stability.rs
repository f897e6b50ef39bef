//! Linearization around a stationary vortex, time evolution of
//! perturbations and of the full equation, and decay-rate measurement.
//!
//! Writing the vorticity as alpha G + w + w~ with w the stationary
//! correction, the perturbation satisfies
//!
//!   d/dt w~ = L w~ + lambda M w~ - alpha Lambda w~ - N w~ - u~ . grad w~,
//!
//! where N w~ = v[w] . grad w~ + u~ . grad w collects the coupling to the
//! correction.  Translating the vortex generates the exact eigenpairs
//! d_i omega with eigenvalues -(1 + lambda)/2 and -(1 - lambda)/2.
//!
//! Time stepping splits the operator: L and the local swirl rotation
//! i alpha n phi are advanced implicitly by banded per-mode solves, the
//! bounded remainder explicitly by a second-order multistep formula.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::banded::{BandLU, BandMatrix};
use crate::biot_savart::{StreamSolver, advect, velocity_with_solver};
use crate::error::{Result, VortexError};
use crate::field::{C64, ModeField, VelocityField, same_grid};
use crate::grid::{Parity, RadialGrid, STENCIL};
use crate::operators::{apply_l, apply_lambda_stream, apply_lambda_with, apply_m};
use crate::profiles::phi_swirl;
use crate::vortex::VortexSolution;

/// Time-integration parameters for perturbation and full trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Time window of the log-linear decay fit.
    pub fit_window: (f64, f64),
    /// Spacing of recorded samples.
    pub sample_interval: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 5e-3,
            t_final: 8.0,
            fit_window: (2.0, 8.0),
            sample_interval: 0.05,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(VortexError::config(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !self.t_final.is_finite() || self.t_final < self.dt {
            return Err(VortexError::config(
                "t_final",
                format!("must be at least one step, got {}", self.t_final),
            ));
        }
        if !(self.fit_window.0 >= 0.0 && self.fit_window.0 < self.fit_window.1) {
            return Err(VortexError::config(
                "fit_window",
                format!("needs 0 <= t_a < t_b, got {:?}", self.fit_window),
            ));
        }
        if self.fit_window.1 > self.t_final + 1e-12 {
            return Err(VortexError::config(
                "fit_window",
                "fit window extends past t_final",
            ));
        }
        if !self.sample_interval.is_finite() || self.sample_interval <= 0.0 {
            return Err(VortexError::config(
                "sample_interval",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// One recorded point along a perturbation trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub norm_x: f64,
    pub energy: f64,
    pub mean: f64,
}

/// Outcome of a perturbation run: the exact-eigenpair residuals of the
/// underlying vortex, the measured decay rate, and the recorded series.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub eigen_residual_1: f64,
    pub eigen_residual_2: f64,
    pub fitted_mu: f64,
    /// Root-mean-square deviation of log norm from the fitted line.
    pub fit_residual: f64,
    /// Largest c with Delta(norm^2)/Delta t <= -c norm^2 at every
    /// recorded step.
    pub energy_decay_floor: f64,
    pub energy_series: Vec<EnergySample>,
    pub leading_eigenvalue_estimate: Option<(f64, f64)>,
    /// Largest amplitude whose trajectory decayed monotonically, when a
    /// basin search was requested.
    pub basin_epsilon: Option<f64>,
}

/// Quadratic forms controlling the decay estimate: the squared weighted
/// norm and the oscillator energy of the rescaled profile f = w / sqrt G.
pub fn energy_functional(w: &ModeField) -> (f64, f64) {
    (w.norm_x_sq(), w.energy())
}

/// The operator obtained by linearizing the strained vorticity equation
/// around a stationary solution, with its factored helpers.
pub struct LinearizedOp {
    grid: Arc<RadialGrid>,
    alpha: f64,
    lambda: f64,
    n_modes: usize,
    n_theta: usize,
    /// Stationary correction, widened to the operating band.
    w: ModeField,
    v_w: VelocityField,
    stream: StreamSolver,
    has_base: bool,
}

impl LinearizedOp {
    /// Builds the operator around a converged solution.  The band is one
    /// mode wider than the solution's so that derivative fields fit.
    pub fn new(sol: &VortexSolution) -> Result<LinearizedOp> {
        let grid = sol.w.grid().clone();
        let n_modes = sol.w.n_modes() + 1;
        let n_theta = (3 * n_modes + 1).div_ceil(4) * 4;
        let stream = StreamSolver::new(&grid, n_modes)?;
        let w = sol.w.resized(n_modes);
        let has_base = sol.w.norm_x() > 0.0;
        let v_w = velocity_with_solver(&stream, &w)?;
        Ok(LinearizedOp {
            grid,
            alpha: sol.alpha,
            lambda: sol.lambda,
            n_modes,
            n_theta,
            w,
            v_w,
            stream,
            has_base,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Applies the full linearized operator to a zero-mean field.
    pub fn apply(&self, wt: &ModeField) -> Result<ModeField> {
        same_grid(&self.grid, wt.grid())?;
        if wt.n_modes() > self.n_modes {
            return Err(VortexError::domain(format!(
                "perturbation carries mode {} beyond the operator band {}",
                wt.n_modes(),
                self.n_modes
            )));
        }
        let wt = wt.resized(self.n_modes);
        let mut out = apply_l(&wt);
        if self.lambda != 0.0 {
            out.add_scaled(self.lambda, &apply_m(&wt));
        }
        if self.alpha != 0.0 {
            out.add_scaled(-self.alpha, &apply_lambda_with(&self.stream, &wt)?);
        }
        if self.has_base {
            out.add_scaled(-1.0, &advect(&self.v_w, &wt, self.n_theta)?);
            let vt = velocity_with_solver(&self.stream, &wt)?;
            out.add_scaled(-1.0, &advect(&vt, &self.w, self.n_theta)?);
        }
        Ok(out)
    }

    /// The part handled explicitly by the stepper: strain, the nonlocal
    /// half of the swirl commutator, coupling to the stationary
    /// correction, and optionally the perturbation's self-advection.
    fn explicit_part(&self, wt: &ModeField, nonlinear: bool) -> Result<ModeField> {
        let mut out = ModeField::zeros(&self.grid, self.n_modes);
        if self.lambda != 0.0 {
            out.add_scaled(self.lambda, &apply_m(wt));
        }
        if self.alpha != 0.0 {
            out.add_scaled(-self.alpha, &apply_lambda_stream(&self.stream, wt)?);
        }
        if self.has_base || nonlinear {
            let vt = velocity_with_solver(&self.stream, wt)?;
            if self.has_base {
                out.add_scaled(-1.0, &advect(&self.v_w, wt, self.n_theta)?);
                let target = if nonlinear { self.w.plus(wt) } else { self.w.clone() };
                out.add_scaled(-1.0, &advect(&vt, &target, self.n_theta)?);
            } else {
                out.add_scaled(-1.0, &advect(&vt, wt, self.n_theta)?);
            }
        }
        Ok(out)
    }

    /// Residuals of the translation eigenpairs d_i omega, whose exact
    /// eigenvalues are -(1 + lambda)/2 and -(1 - lambda)/2.
    pub fn translation_residuals(&self, omega: &ModeField) -> Result<(f64, f64)> {
        let mut out = [0.0; 2];
        for (slot, (deriv, rate)) in [
            (omega.dx1(), -(1.0 + self.lambda) / 2.0),
            (omega.dx2(), -(1.0 - self.lambda) / 2.0),
        ]
        .into_iter()
        .enumerate()
        {
            let image = self.apply(&deriv)?;
            out[slot] = image.minus(&deriv.resized(self.n_modes).scaled_by(rate)).norm_x()
                / deriv.norm_x();
        }
        Ok((out[0], out[1]))
    }
}

/// Banded factor of a I - b (L_n - i n alpha phi) with a Dirichlet rim
/// row, the implicit side of one stepper stage.
fn implicit_factor(
    grid: &Arc<RadialGrid>,
    n: usize,
    alpha: f64,
    a: f64,
    b: f64,
) -> Result<BandLU> {
    let nr = grid.len();
    let r = grid.nodes();
    let band = STENCIL - 1;
    let mut m = BandMatrix::new(nr, band, band);
    let parity = Parity::of_mode(n);
    let nn = (n * n) as f64;
    for j in 0..nr - 1 {
        let d2 = grid.d2_row(parity, j);
        for (k, &wk) in d2.w.iter().enumerate() {
            m.add(j, d2.start + k, C64::new(-b * wk, 0.0));
        }
        let d1 = grid.d1_row(parity, j);
        for (k, &wk) in d1.w.iter().enumerate() {
            m.add(j, d1.start + k, C64::new(-b * wk / r[j], 0.0));
        }
        let local = 0.5 - nn / (r[j] * r[j]) - r[j] * r[j] / 16.0;
        let swirl = n as f64 * alpha * phi_swirl(r[j]);
        m.add(j, j, C64::new(a - b * local, b * swirl));
    }
    m.set(nr - 1, nr - 1, C64::new(1.0, 0.0));
    m.factor()
}

/// Second-order implicit-explicit multistep integrator sharing one
/// linearized operator.
struct ImexStepper {
    dt: f64,
    starter: Vec<BandLU>,
    main: Vec<BandLU>,
}

impl ImexStepper {
    fn new(grid: &Arc<RadialGrid>, alpha: f64, n_modes: usize, dt: f64) -> Result<ImexStepper> {
        let mut starter = Vec::with_capacity(n_modes + 1);
        let mut main = Vec::with_capacity(n_modes + 1);
        for n in 0..=n_modes {
            starter.push(implicit_factor(grid, n, alpha, 1.0, dt)?);
            main.push(implicit_factor(grid, n, alpha, 3.0, 2.0 * dt)?);
        }
        Ok(ImexStepper { dt, starter, main })
    }

    fn solve(&self, factors: &[BandLU], rhs: &ModeField) -> ModeField {
        let grid = rhs.grid();
        let nr = grid.len();
        let mut out = ModeField::zeros(grid, rhs.n_modes());
        for n in 0..=rhs.n_modes() {
            let mut b: Vec<C64> = rhs.scaled(n).to_vec();
            b[nr - 1] = C64::new(0.0, 0.0);
            factors[n].solve_in_place(&mut b);
            out.set_scaled(n, b);
        }
        out
    }

    /// One backward-Euler stage from the initial state.
    fn start(&self, w0: &ModeField, e0: &ModeField) -> ModeField {
        let mut rhs = w0.clone();
        rhs.add_scaled(self.dt, e0);
        self.solve(&self.starter, &rhs)
    }

    /// One multistep stage from the two previous states and their
    /// explicit evaluations.
    fn step(
        &self,
        w_prev: &ModeField,
        w_curr: &ModeField,
        e_prev: &ModeField,
        e_curr: &ModeField,
    ) -> ModeField {
        let mut rhs = w_curr.scaled_by(4.0);
        rhs.add_scaled(-1.0, w_prev);
        rhs.add_scaled(4.0 * self.dt, e_curr);
        rhs.add_scaled(-2.0 * self.dt, e_prev);
        self.solve(&self.main, &rhs)
    }
}

fn require_mean_free(w: &ModeField, what: &str) -> Result<()> {
    let mean = w.mean().abs();
    if mean > 1e-8 * (1.0 + w.norm_x()) {
        return Err(VortexError::domain(format!(
            "{what} requires a zero-mean field, got mean {mean:.3e}"
        )));
    }
    Ok(())
}

fn blowup_check(w: &ModeField, initial: f64, t: f64) -> Result<()> {
    w.check_finite()?;
    if w.norm_x() > 1e8 * initial.max(1e-300) {
        return Err(VortexError::numeric(format!(
            "perturbation norm exploded near t = {t:.3}; reduce dt"
        )));
    }
    Ok(())
}

/// Integrates the perturbation equation around a stationary vortex and
/// measures the realized decay rate.  Returns the report and the final
/// state.
pub fn evolve_perturbation(
    sol: &VortexSolution,
    w0: &ModeField,
    cfg: &EvolutionConfig,
) -> Result<(StabilityReport, ModeField)> {
    cfg.validate()?;
    require_mean_free(w0, "perturbation evolution")?;
    let op = LinearizedOp::new(sol)?;
    let (eigen_residual_1, eigen_residual_2) = op.translation_residuals(&sol.omega)?;
    let (series, state) = run_trajectory(&op, w0, cfg, true)?;

    let (fitted_mu, fit_residual) = fit_decay_rate(&series, cfg.fit_window);
    let energy_decay_floor = decay_floor(&series);
    Ok((
        StabilityReport {
            eigen_residual_1,
            eigen_residual_2,
            fitted_mu,
            fit_residual,
            energy_decay_floor,
            energy_series: series,
            leading_eigenvalue_estimate: None,
            basin_epsilon: None,
        },
        state,
    ))
}

/// Doubles the perturbation amplitude along a fixed direction until
/// monotone norm decay fails, returning the largest amplitude that still
/// decayed at every recorded step.  The starting amplitude grows with
/// the circulation, matching how the attraction basin scales.
pub fn estimate_basin(
    sol: &VortexSolution,
    direction: &ModeField,
    cfg: &EvolutionConfig,
    max_doublings: usize,
) -> Result<f64> {
    cfg.validate()?;
    require_mean_free(direction, "basin estimation")?;
    let scale = direction.norm_x();
    if scale == 0.0 {
        return Err(VortexError::domain("basin direction must be nonzero"));
    }
    let op = LinearizedOp::new(sol)?;
    let mut best = 0.0;
    for doubling in 0..=max_doublings {
        let eps = 1e-3 * (1.0 + sol.alpha.abs()) * (1 << doubling) as f64;
        let w0 = direction.scaled_by(eps / scale);
        let monotone = match run_trajectory(&op, &w0, cfg, true) {
            Ok((series, _)) => series
                .windows(2)
                .all(|p| p[1].norm_x <= p[0].norm_x * (1.0 + 1e-9)),
            Err(VortexError::Numeric(_)) => false,
            Err(other) => return Err(other),
        };
        if !monotone {
            break;
        }
        best = eps;
    }
    Ok(best)
}

fn run_trajectory(
    op: &LinearizedOp,
    w0: &ModeField,
    cfg: &EvolutionConfig,
    nonlinear: bool,
) -> Result<(Vec<EnergySample>, ModeField)> {
    let steps = (cfg.t_final / cfg.dt).round().max(2.0) as usize;
    let dt = cfg.t_final / steps as f64;
    let stride = (cfg.sample_interval / dt).round().max(1.0) as usize;
    let stepper = ImexStepper::new(&op.grid, op.alpha, op.n_modes, dt)?;

    let mut w_prev = w0.resized(op.n_modes);
    let initial = w_prev.norm_x();
    let mut series = Vec::with_capacity(steps / stride + 2);
    let sample = |w: &ModeField, t: f64| {
        let (n2, e) = energy_functional(w);
        EnergySample {
            t,
            norm_x: n2.sqrt(),
            energy: e,
            mean: w.mean(),
        }
    };
    series.push(sample(&w_prev, 0.0));

    let mut e_prev = op.explicit_part(&w_prev, nonlinear)?;
    let mut w_curr = stepper.start(&w_prev, &e_prev);
    blowup_check(&w_curr, initial, dt)?;
    if stride == 1 {
        series.push(sample(&w_curr, dt));
    }
    let mut e_curr = op.explicit_part(&w_curr, nonlinear)?;

    for k in 2..=steps {
        let t = k as f64 * dt;
        let w_next = stepper.step(&w_prev, &w_curr, &e_prev, &e_curr);
        blowup_check(&w_next, initial, t)?;
        w_prev = w_curr;
        w_curr = w_next;
        e_prev = e_curr;
        e_curr = op.explicit_part(&w_curr, nonlinear)?;
        if k % stride == 0 || k == steps {
            series.push(sample(&w_curr, t));
        }
    }
    Ok((series, w_curr))
}

/// Least-squares slope of log norm over the fit window; returns the
/// decay rate and the root-mean-square log deviation.
fn fit_decay_rate(series: &[EnergySample], window: (f64, f64)) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|s| s.t >= window.0 - 1e-12 && s.t <= window.1 + 1e-12 && s.norm_x > 0.0)
        .map(|s| (s.t, s.norm_x.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| {
            let d = p.1 - ym - slope * (p.0 - tm);
            d * d
        })
        .sum();
    (-slope, (rss / n).sqrt())
}

/// Largest c such that the squared norm satisfies the one-sided decay
/// inequality with rate c at every recorded interval.
fn decay_floor(series: &[EnergySample]) -> f64 {
    let mut floor = f64::INFINITY;
    for pair in series.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let n2a = a.norm_x * a.norm_x;
        let n2b = b.norm_x * b.norm_x;
        if n2a <= 0.0 {
            continue;
        }
        let c = -(n2b - n2a) / ((b.t - a.t) * n2a);
        floor = floor.min(c);
    }
    floor
}

/// One recorded point along a full nonlinear trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonlinearSample {
    pub t: f64,
    pub norm_x: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Weighted distance to the reference field, when one was supplied.
    pub distance: Option<f64>,
}

/// Trajectory of the full strained vorticity equation.
#[derive(Debug, Clone, Serialize)]
pub struct NonlinearTrajectory {
    pub dt: f64,
    pub samples: Vec<NonlinearSample>,
}

/// Integrates the full equation d/dt omega + u . grad omega =
/// L omega + lambda M omega from an arbitrary initial field, recording
/// conservation and sign diagnostics, and optionally the distance to a
/// reference field.
pub fn evolve_nonlinear(
    omega0: &ModeField,
    lambda: f64,
    cfg: &EvolutionConfig,
    reference: Option<&ModeField>,
) -> Result<NonlinearTrajectory> {
    cfg.validate()?;
    let grid = omega0.grid().clone();
    if let Some(rf) = reference {
        same_grid(&grid, rf.grid())?;
    }
    let n_modes = omega0.n_modes();
    let n_theta = (3 * n_modes + 1).div_ceil(4) * 4;
    let stream = StreamSolver::new(&grid, n_modes)?;

    let steps = (cfg.t_final / cfg.dt).round().max(2.0) as usize;
    let dt = cfg.t_final / steps as f64;
    let stride = (cfg.sample_interval / dt).round().max(1.0) as usize;
    // The swirl of the full field is advected explicitly here, so the
    // implicit side is plain diffusion-drift.
    let stepper = ImexStepper::new(&grid, 0.0, n_modes, dt)?;

    let explicit = |w: &ModeField| -> Result<ModeField> {
        let v = velocity_with_solver(&stream, w)?;
        if dt * v.amplitude() * v.amplitude() > 1.0 {
            return Err(VortexError::numeric(
                "advection speed too large for the time step; reduce dt",
            ));
        }
        let mut out = advect(&v, w, n_theta)?.scaled_by(-1.0);
        if lambda != 0.0 {
            out.add_scaled(lambda, &apply_m(w));
        }
        Ok(out)
    };

    let mut w_prev = omega0.clone();
    let initial = w_prev.norm_x();
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let sample = |w: &ModeField, t: f64| {
        let phys = w.synthesize(n_theta.max(32));
        NonlinearSample {
            t,
            norm_x: w.norm_x(),
            mean: w.mean(),
            min: phys.min(),
            max: phys.max(),
            distance: reference.map(|rf| w.minus(rf).norm_x()),
        }
    };
    samples.push(sample(&w_prev, 0.0));

    let mut e_prev = explicit(&w_prev)?;
    let mut w_curr = stepper.start(&w_prev, &e_prev);
    blowup_check(&w_curr, initial, dt)?;
    if stride == 1 {
        samples.push(sample(&w_curr, dt));
    }
    let mut e_curr = explicit(&w_curr)?;

    for k in 2..=steps {
        let t = k as f64 * dt;
        let w_next = stepper.step(&w_prev, &w_curr, &e_prev, &e_curr);
        blowup_check(&w_next, initial, t)?;
        w_prev = w_curr;
        w_curr = w_next;
        e_prev = e_curr;
        e_curr = explicit(&w_curr)?;
        if k % stride == 0 || k == steps {
            samples.push(sample(&w_curr, t));
        }
    }
    Ok(NonlinearTrajectory { dt, samples })
}

/// Rightmost eigenvalues of the linearized operator, estimated by
/// subspace iteration on the time-tau propagator: each Ritz value gamma
/// maps to log(gamma) / tau.
pub fn leading_eigenvalue(sol: &VortexSolution, k: usize) -> Result<Vec<(f64, f64)>> {
    if k < 4 {
        return Err(VortexError::domain(
            "subspace size must be at least 4 to separate the leading cluster",
        ));
    }
    let op = LinearizedOp::new(sol)?;
    let tau = 1.0;
    let cfg = EvolutionConfig {
        dt: 0.01,
        t_final: tau,
        fit_window: (0.0, tau),
        sample_interval: tau,
    };

    let mut basis: Vec<ModeField> = (0..k)
        .map(|i| ModeField::random(&op.grid, op.n_modes, 0x5EED_0000 + i as u64, true))
        .collect();
    orthonormalize(&mut basis);

    let mut prev: Vec<C64> = Vec::new();
    for sweep in 0..60 {
        let mut images = Vec::with_capacity(k);
        for q in &basis {
            let (_, mut state) = run_trajectory(&op, q, &cfg, false)?;
            state.remove_mean();
            images.push(state);
        }
        let mut h = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                h[(i, j)] = basis[i].inner_x(&images[j]);
            }
        }
        let gammas = h.complex_eigenvalues();
        let mut eigs: Vec<C64> = gammas
            .iter()
            .map(|g| {
                let ln = C64::new(g.re, g.im).ln();
                C64::new(ln.re / tau, ln.im / tau)
            })
            .collect();
        eigs.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());

        let settled = !prev.is_empty()
            && prev
                .iter()
                .zip(&eigs)
                .take(2)
                .all(|(a, b)| (a - b).norm() < 2e-5);
        if settled {
            return Ok(eigs.into_iter().map(|z| (z.re, z.im)).collect());
        }
        prev = eigs;

        basis = images;
        orthonormalize(&mut basis);
        if sweep == 59 {
            return Err(VortexError::numeric(format!(
                "eigenvalue iteration did not settle; last estimates {:?}",
                prev.iter().take(3).collect::<Vec<_>>()
            )));
        }
    }
    unreachable!()
}

/// Modified Gram-Schmidt in the weighted inner product, applied twice
/// for stability.
fn orthonormalize(fields: &mut [ModeField]) {
    for _ in 0..2 {
        for i in 0..fields.len() {
            for j in 0..i {
                let c = fields[j].inner_x(&fields[i]);
                let prior = fields[j].scaled_by(c);
                fields[i].add_scaled(-1.0, &prior);
            }
            let nrm = fields[i].norm_x();
            if nrm > 0.0 {
                fields[i].scale(1.0 / nrm);
            }
        }
    }
}
