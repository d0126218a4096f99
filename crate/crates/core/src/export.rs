//! Deterministic text serialization for grids, sweeps, and eigen solutions.
//!
//! Floats are written with `{:e}`, which emits the shortest digit string that
//! parses back to the same f64, so identical inputs always produce identical
//! bytes. JSON goes through serde_json with sorted keys for the same reason.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::groundstate::GaussianGroundState;
use crate::groundstate::WavefunctionGrid;
use crate::model::{DeviceParams, PhysicalConstants};
use crate::potential::PotentialGrid;
use crate::schrodinger::EigenSolution;
use crate::{Error, Result};

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn pretty(doc: &serde_json::Value) -> Result<String> {
    to_pretty_json(doc)
}

/// Newline-terminated pretty JSON of any serializable value; struct fields
/// keep declaration order, maps sort their keys, so the bytes are stable.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
    s.push('\n');
    Ok(s)
}

/// CSV of a sampled potential surface, one row per node, Φ as the slow index.
pub fn potential_grid_csv(grid: &PotentialGrid) -> String {
    let nj = grid.theta_axis.len();
    let mut out = String::with_capacity(48 * grid.values.len() + 32);
    out.push_str("phi_wb,theta_rad,V_over_h_hz\n");
    for (i, &phi) in grid.phi_axis.iter().enumerate() {
        for (j, &theta) in grid.theta_axis.iter().enumerate() {
            let _ = writeln!(out, "{phi:e},{theta:e},{:e}", grid.values[i * nj + j]);
        }
    }
    out
}

/// JSON sidecar for [`potential_grid_csv`]: device, window, resolution, and
/// the contour hints carried by the grid metadata.
pub fn potential_grid_sidecar(grid: &PotentialGrid) -> Result<String> {
    pretty(&json!({
        "params": grid.metadata.params,
        "window": grid.metadata.window,
        "n_phi": grid.phi_axis.len(),
        "n_theta": grid.theta_axis.len(),
        "contour_interval_hz": grid.metadata.contour_interval_hz,
        "n_levels": grid.metadata.n_levels,
        "value_unit": "Hz",
    }))
}

/// CSV of a sampled Gaussian ground state, one row per node, φ as the slow
/// index. Coordinates are offsets from the well.
pub fn wavefunction_grid_csv(grid: &WavefunctionGrid) -> String {
    let nj = grid.delta_axis.len();
    let mut out = String::with_capacity(60 * grid.psi.len() + 40);
    out.push_str("phi_wb,delta_rad,psi,abs_psi_sq\n");
    for (i, &phi) in grid.phi_axis.iter().enumerate() {
        for (j, &delta) in grid.delta_axis.iter().enumerate() {
            let p = i * nj + j;
            let _ = writeln!(
                out,
                "{phi:e},{delta:e},{:e},{:e}",
                grid.psi[p], grid.abs_psi_sq[p]
            );
        }
    }
    out
}

/// JSON sidecar for [`wavefunction_grid_csv`]: the exponent coefficients in
/// SI units and rescaled by the bare-mode ground widths σ_φ = √(ħ/2Cω_φ),
/// σ_δ = √(ħ/2I_mω_δ), where they are dimensionless and O(1).
pub fn wavefunction_sidecar(
    state: &GaussianGroundState,
    params: &DeviceParams,
    consts: &PhysicalConstants,
) -> Result<String> {
    let s_phi = (consts.hbar / (2.0 * params.capacitance * state.modes.omega_phi)).sqrt();
    let s_delta = (consts.hbar / (2.0 * params.moment_of_inertia * state.modes.omega_delta)).sqrt();
    pretty(&json!({
        "exponent_si": {
            "a_phiphi_per_wb2": state.a_phiphi,
            "a_deltadelta_per_rad2": state.a_deltadelta,
            "a_phidelta_per_wb_rad": state.a_phidelta,
        },
        "exponent_natural": {
            "a_phiphi": state.a_phiphi * s_phi * s_phi,
            "a_deltadelta": state.a_deltadelta * s_delta * s_delta,
            "a_phidelta": state.a_phidelta * s_phi * s_delta,
        },
        "sigma_phi_wb": s_phi,
        "sigma_delta_rad": s_delta,
        "normalization": state.norm,
        "modes": state.modes,
    }))
}

/// One field setting in a coupling sweep. The mode entries are `None` when
/// the selected well index does not exist at this field (BₓA < nΦ₀); such
/// rows are kept and flagged rather than dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// T.
    pub b_x: f64,
    /// J/(Wb·rad).
    pub kappa: Option<f64>,
    /// rad/s.
    pub omega_delta: Option<f64>,
    pub omega_x: Option<f64>,
    pub omega_y: Option<f64>,
    pub valid_for_n: bool,
}

/// CSV of a field sweep, one row per setting, invalid rows with empty mode
/// columns.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(96 * rows.len() + 80);
    out.push_str("b_x_t,kappa_j_per_wb_rad,omega_delta_rad_s,omega_x_rad_s,omega_y_rad_s,valid_for_n\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{},{},{},{},{}",
            r.b_x,
            opt(r.kappa),
            opt(r.omega_delta),
            opt(r.omega_x),
            opt(r.omega_y),
            r.valid_for_n
        );
    }
    out
}

/// JSON form of a sweep, same content as [`sweep_csv`].
pub fn sweep_json(rows: &[SweepRow]) -> Result<String> {
    pretty(&json!({ "rows": rows }))
}

/// JSON manifest of a tunnel-splitting analysis: the doublet energies and
/// parity diagnostics plus everything [`eigen_manifest_json`] carries.
pub fn tunnel_manifest_json(
    ts: &crate::schrodinger::TunnelSplitting,
    consts: &PhysicalConstants,
) -> Result<String> {
    let sol = &ts.solution;
    let files: Vec<String> = (0..sol.states.len()).map(|s| format!("state_{s}.csv")).collect();
    let hz: Vec<f64> = sol.energies.iter().map(|e| e / consts.h).collect();
    pretty(&json!({
        "even_energy_j": ts.even_energy,
        "odd_energy_j": ts.odd_energy,
        "delta_e_j": ts.delta_e,
        "splitting_frequency_hz": ts.splitting_frequency,
        "even_mirror_overlap": ts.even_mirror_overlap,
        "odd_mirror_overlap": ts.odd_mirror_overlap,
        "grid": sol.grid,
        "energies_j": sol.energies,
        "energies_over_h_hz": hz,
        "residuals_j": sol.residuals,
        "state_files": files,
    }))
}

/// JSON manifest of an eigen solution: grid, energies, residuals, and the
/// per-state CSV file names written next to it.
pub fn eigen_manifest_json(sol: &EigenSolution, consts: &PhysicalConstants) -> Result<String> {
    let files: Vec<String> = (0..sol.states.len()).map(|s| format!("state_{s}.csv")).collect();
    let hz: Vec<f64> = sol.energies.iter().map(|e| e / consts.h).collect();
    pretty(&json!({
        "grid": sol.grid,
        "energies_j": sol.energies,
        "energies_over_h_hz": hz,
        "residuals_j": sol.residuals,
        "cell_measure_wb_rad": sol.cell_measure,
        "n_states": sol.states.len(),
        "state_files": files,
    }))
}

/// CSV of one numeric eigenstate over the full grid, boundary ring included
/// (identically zero there), Φ as the slow index.
pub fn eigen_state_csv(sol: &EigenSolution, state: usize) -> Result<String> {
    if state >= sol.states.len() {
        return Err(Error::InvalidParameter(format!(
            "state {state} requested from a solution holding {}",
            sol.states.len()
        )));
    }
    let mut out =
        String::with_capacity(48 * sol.grid.n_phi * sol.grid.n_theta + 16);
    out.push_str("phi,theta,psi\n");
    for (i, &phi) in sol.phi_axis.iter().enumerate() {
        for (j, &theta) in sol.theta_axis.iter().enumerate() {
            let _ = writeln!(out, "{phi:e},{theta:e},{:e}", sol.value_at(state, i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::{ground_state_phidelta, wavefunction_grid, LocalWindow};
    use crate::harmonic::mode_frequencies;
    use crate::model::{derive, DeviceParams, PhysicalConstants};
    use crate::potential::{classify_landscape, export_grid, GridWindow};
    use crate::schrodinger::{GridSpec, ScaleFactors};

    fn device() -> (DeviceParams, PhysicalConstants) {
        (DeviceParams::example_device(), PhysicalConstants::codata2018())
    }

    #[test]
    fn exp_format_round_trips_exactly() {
        for &x in &[
            0.0,
            -0.0,
            1.0,
            -2.5e-300,
            2.0678338484619295e-15,
            6.62607015e-34,
            f64::MAX,
            f64::MIN_POSITIVE,
            1.0 / 3.0,
        ] {
            let s = format!("{x:e}");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn tiny_grid_has_header_and_four_rows() {
        let (p, c) = device();
        let dq = derive(&p, &c).unwrap();
        let w = GridWindow {
            phi_min: -1.0e-15,
            phi_max: 1.0e-15,
            theta_min: 1.5,
            theta_max: 1.6,
        };
        let g = export_grid(&p, &dq, &c, w, 2, 2, 10).unwrap();
        let csv = potential_grid_csv(&g);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "phi_wb,theta_rad,V_over_h_hz");
        assert!(csv.ends_with('\n'));

        let sidecar = potential_grid_sidecar(&g).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
        assert_eq!(doc["n_phi"], 2);
        assert_eq!(doc["value_unit"], "Hz");
        assert!((doc["window"]["theta_min"].as_f64().unwrap() - 1.5).abs() == 0.0);
    }

    #[test]
    fn serialization_is_deterministic() {
        let (p, c) = device();
        let dq = derive(&p, &c).unwrap();
        let w = GridWindow {
            phi_min: -2.0e-15,
            phi_max: 2.0e-15,
            theta_min: 1.4,
            theta_max: 1.7,
        };
        let a = export_grid(&p, &dq, &c, w, 7, 5, 12).unwrap();
        let b = export_grid(&p, &dq, &c, w, 7, 5, 12).unwrap();
        assert_eq!(potential_grid_csv(&a), potential_grid_csv(&b));
        assert_eq!(
            potential_grid_sidecar(&a).unwrap(),
            potential_grid_sidecar(&b).unwrap()
        );
    }

    #[test]
    fn uncoupled_state_has_quarter_natural_diagonal() {
        let (mut p, c) = device();
        p.b_x = 0.0;
        let dq = derive(&p, &c).unwrap();
        let lc = classify_landscape(&p, &dq, &c).unwrap();
        let modes = mode_frequencies(&lc.global_minima[0], &p, &dq, &c).unwrap();
        let g = ground_state_phidelta(&modes, &p, &c).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&wavefunction_sidecar(&g, &p, &c).unwrap()).unwrap();
        let nat = &doc["exponent_natural"];
        assert!((nat["a_phiphi"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert!((nat["a_deltadelta"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(nat["a_phidelta"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn wavefunction_csv_covers_the_window() {
        let (p, c) = device();
        let dq = derive(&p, &c).unwrap();
        let lc = classify_landscape(&p, &dq, &c).unwrap();
        let modes = mode_frequencies(&lc.global_minima[0], &p, &dq, &c).unwrap();
        let g = ground_state_phidelta(&modes, &p, &c).unwrap();
        let s_phi = g.marginal_variance_phi().sqrt();
        let s_delta = g.marginal_variance_delta().sqrt();
        let w = LocalWindow {
            phi_min: -3.0 * s_phi,
            phi_max: 3.0 * s_phi,
            delta_min: -3.0 * s_delta,
            delta_max: 3.0 * s_delta,
        };
        let grid = wavefunction_grid(&g, &w, 4, 6).unwrap();
        let csv = wavefunction_grid_csv(&grid);
        assert_eq!(csv.lines().count(), 1 + 4 * 6);
        assert_eq!(csv.lines().next().unwrap(), "phi_wb,delta_rad,psi,abs_psi_sq");
    }

    #[test]
    fn sweep_rows_keep_invalid_settings() {
        let rows = [
            SweepRow {
                b_x: 0.002,
                kappa: None,
                omega_delta: None,
                omega_x: None,
                omega_y: None,
                valid_for_n: false,
            },
            SweepRow {
                b_x: 0.02,
                kappa: Some(0.012),
                omega_delta: Some(1.6e5),
                omega_x: Some(5.0e11),
                omega_y: Some(1.3e5),
                valid_for_n: true,
            },
        ];
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "2e-3,,,,,false");
        assert!(lines[2].starts_with("2e-2,1.2e-2,"));
        assert!(lines[2].ends_with(",true"));

        let doc: serde_json::Value = serde_json::from_str(&sweep_json(&rows).unwrap()).unwrap();
        assert!(doc["rows"][0]["kappa"].is_null());
        assert_eq!(doc["rows"][1]["valid_for_n"], true);
    }

    #[test]
    fn eigen_export_lists_every_state_and_zeroes_the_boundary() {
        let grid = GridSpec {
            window: GridWindow {
                phi_min: 0.0,
                phi_max: 3.0,
                theta_min: 0.0,
                theta_max: 4.0,
            },
            n_phi: 16,
            n_theta: 16,
            scaling: ScaleFactors::identity(),
        };
        let n = 14 * 14;
        let mut state = vec![0.0; n];
        state[n / 2] = 1.0;
        let sol = EigenSolution {
            grid,
            phi_axis: (0..16).map(|i| i as f64 * 0.2).collect(),
            theta_axis: (0..16).map(|i| i as f64 * 0.25).collect(),
            energies: vec![1.25e-24],
            states: vec![state],
            residuals: vec![3.0e-33],
            cell_measure: 0.05,
        };
        let manifest: serde_json::Value =
            serde_json::from_str(&eigen_manifest_json(&sol, &PhysicalConstants::codata2018()).unwrap()).unwrap();
        assert_eq!(manifest["n_states"], 1);
        assert_eq!(manifest["state_files"][0], "state_0.csv");
        assert_eq!(manifest["energies_j"][0].as_f64().unwrap(), 1.25e-24);

        let csv = eigen_state_csv(&sol, 0).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 16 * 16);
        assert!(lines[1].ends_with(",0e0"), "corner node must be zero: {}", lines[1]);
        assert!(csv.contains(",1e0\n"));
        assert!(eigen_state_csv(&sol, 1).is_err());
    }
}
