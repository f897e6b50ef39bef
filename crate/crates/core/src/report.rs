//! Plot-ready CSV exports and JSON summaries with fixed schemas.
//!
//! Every writer is deterministic: fixed column and key order, no
//! timestamps, and shortest round-trip float formatting, so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::ModeField;
use crate::stability::{EnergySample, NonlinearSample, StabilityReport};
use crate::vortex::VortexSolution;
use crate::winfty::WInftyProfile;

/// Summary of a limiting-profile computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WinftySummary {
    pub w0: f64,
    #[serde(rename = "Omega_plus")]
    pub omega_plus: f64,
    #[serde(rename = "Omega_minus")]
    pub omega_minus: f64,
    pub residual: f64,
}

impl WinftySummary {
    pub fn from_profile(p: &WInftyProfile) -> WinftySummary {
        WinftySummary {
            w0: p.w0,
            omega_plus: p.omega_plus,
            omega_minus: p.omega_minus,
            residual: p.residual,
        }
    }
}

/// Summary of a stationary solve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveSummary {
    pub alpha: f64,
    pub lambda: f64,
    pub residual: f64,
    #[serde(rename = "norm_Y")]
    pub norm_y: f64,
    pub iterations: usize,
    pub contraction_max: f64,
}

impl SolveSummary {
    pub fn from_solution(sol: &VortexSolution) -> SolveSummary {
        SolveSummary {
            alpha: sol.alpha,
            lambda: sol.lambda,
            residual: sol.residual_x,
            norm_y: sol.norm_y,
            iterations: sol.iterations,
            contraction_max: sol
                .contraction
                .iter()
                .copied()
                .fold(0.0, f64::max),
        }
    }
}

/// One sweep line: solver outcome plus the certification diagnostics of
/// the computed vortex.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(rename = "norm_Y")]
    pub norm_y: f64,
    pub contraction_max: f64,
    pub mass_defect: f64,
    pub eigen_residual_1: f64,
    pub eigen_residual_2: f64,
    pub pass: bool,
}

/// Radial profiles of the limiting correction:
/// `r,psi_plus,psi_minus,Omega,omega`.
pub fn winfty_profile_csv(r: &[f64], p: &WInftyProfile) -> String {
    let mut out = String::from("r,psi_plus,psi_minus,Omega,omega\n");
    for j in 0..r.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r[j], p.psi_plus[j], p.psi_minus[j], p.stream[j], p.vorticity[j]
        );
    }
    out
}

/// Radial mode amplitudes of a field:
/// `r,mode_re_0,mode_im_0,...` up to the carried band.
pub fn mode_profile_csv(w: &ModeField) -> String {
    let mut out = String::from("r");
    for n in 0..=w.n_modes() {
        let _ = write!(out, ",mode_re_{n},mode_im_{n}");
    }
    out.push('\n');
    let profiles: Vec<Vec<crate::field::C64>> =
        (0..=w.n_modes()).map(|n| w.physical(n)).collect();
    for (j, &rj) in w.grid().nodes().iter().enumerate() {
        let _ = write!(out, "{rj}");
        for prof in &profiles {
            let _ = write!(out, ",{},{}", prof[j].re, prof[j].im);
        }
        out.push('\n');
    }
    out
}

/// Physical samples on the polar tensor grid mapped to Cartesian
/// coordinates: `x1,x2,value`.
pub fn contour_csv(w: &ModeField, n_theta: usize) -> String {
    let phys = w.synthesize(n_theta);
    let r = w.grid().nodes();
    let mut out = String::from("x1,x2,value\n");
    for j in 0..r.len() {
        for k in 0..n_theta {
            let th = phys.theta(k);
            let _ = writeln!(
                out,
                "{},{},{}",
                r[j] * th.cos(),
                r[j] * th.sin(),
                phys.sample(j, k)
            );
        }
    }
    out
}

/// Perturbation trajectory: `t,norm_X,energy,mean`.
pub fn trajectory_csv(series: &[EnergySample]) -> String {
    let mut out = String::from("t,norm_X,energy,mean\n");
    for s in series {
        let _ = writeln!(out, "{},{},{},{}", s.t, s.norm_x, s.energy, s.mean);
    }
    out
}

/// Full-equation trajectory: `t,norm_X,mean,min,max,distance`; the
/// distance column is empty when no reference field was supplied.
pub fn nonlinear_csv(samples: &[NonlinearSample]) -> String {
    let mut out = String::from("t,norm_X,mean,min,max,distance\n");
    for s in samples {
        let _ = write!(out, "{},{},{},{},{},", s.t, s.norm_x, s.mean, s.min, s.max);
        if let Some(d) = s.distance {
            let _ = write!(out, "{d}");
        }
        out.push('\n');
    }
    out
}

/// Sweep table, one row per parameter pair, mirroring [`SweepRow`].
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "alpha,lambda,iterations,residual,norm_Y,contraction_max,mass_defect,\
         eigen_residual_1,eigen_residual_2,pass\n",
    );
    for w in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            w.alpha,
            w.lambda,
            w.iterations,
            w.residual,
            w.norm_y,
            w.contraction_max,
            w.mass_defect,
            w.eigen_residual_1,
            w.eigen_residual_2,
            w.pass
        );
    }
    out
}

/// Pretty JSON with a trailing newline, the shared summary format.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Serializes a stability report, keeping the full energy series.
pub fn stability_report_json(report: &StabilityReport) -> Result<String> {
    to_json(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SpectralConfig;
    use crate::grid::make_grid;
    use crate::profiles::gaussian_profile;

    #[test]
    fn csv_headers_match_the_documented_schemas() {
        let grid = make_grid(&SpectralConfig::default().with_n_r(64)).unwrap();
        let w = gaussian_profile(&grid);

        let modes = mode_profile_csv(&w);
        assert!(modes.starts_with("r,mode_re_0,mode_im_0,mode_re_1,mode_im_1,mode_re_2,mode_im_2\n"));
        assert_eq!(modes.lines().count(), 1 + grid.len());

        let contour = contour_csv(&w, 8);
        assert!(contour.starts_with("x1,x2,value\n"));
        assert_eq!(contour.lines().count(), 1 + 8 * grid.len());

        let series = vec![EnergySample {
            t: 0.0,
            norm_x: 1.0,
            energy: 2.0,
            mean: 0.0,
        }];
        assert_eq!(trajectory_csv(&series), "t,norm_X,energy,mean\n0,1,2,0\n");
    }

    #[test]
    fn summary_json_has_fixed_keys_in_order() {
        let summary = WinftySummary {
            w0: 1.5,
            omega_plus: -0.38,
            omega_minus: -17.5,
            residual: 1e-8,
        };
        let text = to_json(&summary).unwrap();
        let w0_at = text.find("\"w0\"").unwrap();
        let plus_at = text.find("\"Omega_plus\"").unwrap();
        let minus_at = text.find("\"Omega_minus\"").unwrap();
        let res_at = text.find("\"residual\"").unwrap();
        assert!(w0_at < plus_at && plus_at < minus_at && minus_at < res_at);

        let back: WinftySummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back.omega_minus, -17.5);
    }

    #[test]
    fn identical_inputs_produce_identical_bytes() {
        let grid = make_grid(&SpectralConfig::default().with_n_r(64)).unwrap();
        let w = gaussian_profile(&grid);
        assert_eq!(contour_csv(&w, 8), contour_csv(&w, 8));
        assert_eq!(mode_profile_csv(&w), mode_profile_csv(&w));
    }

    #[test]
    fn nonlinear_rows_leave_the_distance_cell_empty_without_reference() {
        let s = NonlinearSample {
            t: 1.0,
            norm_x: 2.0,
            mean: 3.0,
            min: -0.5,
            max: 4.0,
            distance: None,
        };
        assert_eq!(nonlinear_csv(&[s]), "t,norm_X,mean,min,max,distance\n1,2,3,-0.5,4,\n");
        let s2 = NonlinearSample {
            distance: Some(0.25),
            ..s
        };
        assert!(nonlinear_csv(&[s2]).ends_with(",0.25\n"));
    }
}
