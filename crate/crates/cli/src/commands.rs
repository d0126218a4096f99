//! Subcommand implementations. Each computes through the library, prints a
//! short deterministic report, and (only when an output directory is given)
//! writes its data files there via the `export` builders.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use serde_json::json;

use fluxcant::export;
use fluxcant::groundstate::{
    entanglement_entropy, ground_state_phidelta, separability_check, wavefunction_grid,
    LocalWindow,
};
use fluxcant::harmonic::{mode_frequencies, HarmonicModes};
use fluxcant::model::{derive, DerivedQuantities, DeviceParams, PhysicalConstants};
use fluxcant::potential::{
    classify_landscape, enumerate_candidate_minima, export_grid, Branch, PointKind,
    StationaryPoint,
};
use fluxcant::schrodinger::{discretize, solve_lowest, suggested_window, tunnel_splitting, GridSpec, ScaleFactors};
use fluxcant::{Error, Result};

use crate::config::{OutputFormat, RunConfig, WellSelect};
use crate::reference::{reference_rows, RefCase};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn consts() -> PhysicalConstants {
    PhysicalConstants::codata2018()
}

/// File names are fixed constants, so everything lands inside `dir`.
fn write_out(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn select_well(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    c: &PhysicalConstants,
    sel: Option<WellSelect>,
) -> Result<StationaryPoint> {
    let lc = classify_landscape(params, dq, c)?;
    match sel {
        None => lc.global_minima.first().copied().ok_or_else(|| {
            Error::Computation("landscape has no global minimum".into())
        }),
        Some(w) => lc
            .minima
            .iter()
            .find(|m| m.n_index == w.n_index && m.branch == w.branch)
            .copied()
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no minimum with n = {} on the {:?} branch; BxA = {:e} Wb",
                    w.n_index, w.branch, dq.flux_scale
                ))
            }),
    }
}

pub fn analyze(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<ExitCode> {
    let c = consts();
    let dq = derive(&cfg.device, &c)?;
    let lc = classify_landscape(&cfg.device, &dq, &c)?;
    let well = select_well(&cfg.device, &dq, &c, cfg.well)?;
    let m = mode_frequencies(&well, &cfg.device, &dq, &c)?;
    let coupling = if m.kappa == 0.0 { "uncoupled" } else { "coupled" };

    println!(
        "derived: E_j = {:e} J, beta_L = {:e}, BxA = {:e} Wb, mu = {:e}, m_max = {}",
        dq.e_j, dq.beta_l, dq.flux_scale, dq.mu, dq.m_max
    );
    println!(
        "landscape: {:?}, {} global of {} minima",
        lc.regime,
        lc.global_minima.len(),
        lc.minima.len()
    );
    println!(
        "well: n = {}, branch = {:?}, phi = {:e} Wb, theta = {:e} rad, V = {:e} J",
        well.n_index, well.branch, well.location.phi, well.location.theta, well.value
    );
    println!(
        "modes: omega_phi = {:e} rad/s, omega_delta = {:e} rad/s, kappa = {:e} A ({coupling}), beta = {:e} rad",
        m.omega_phi, m.omega_delta, m.kappa, m.beta
    );
    println!(
        "normal modes /2pi: omega_x = {:e} Hz, omega_y = {:e} Hz",
        m.omega_x / TWO_PI,
        m.omega_y / TWO_PI
    );

    if let Some(dir) = out_dir {
        match cfg.output_format {
            OutputFormat::Json => {
                let doc = json!({
                    "derived": dq,
                    "regime": lc.regime,
                    "n_global_minima": lc.global_minima.len(),
                    "n_minima": lc.minima.len(),
                    "well": well,
                    "modes": m,
                    "uncoupled": m.kappa == 0.0,
                    "frequencies_hz": {
                        "omega_phi_over_2pi": m.omega_phi / TWO_PI,
                        "omega_delta_over_2pi": m.omega_delta / TWO_PI,
                        "omega_x_over_2pi": m.omega_x / TWO_PI,
                        "omega_y_over_2pi": m.omega_y / TWO_PI,
                    },
                });
                write_out(dir, "analyze.json", &export::to_pretty_json(&doc)?)?;
            }
            OutputFormat::Csv => {
                let mut s = String::from("key,value\n");
                let rows: &[(&str, String)] = &[
                    ("e_j_j", format!("{:e}", dq.e_j)),
                    ("beta_l", format!("{:e}", dq.beta_l)),
                    ("flux_scale_wb", format!("{:e}", dq.flux_scale)),
                    ("mu", format!("{:e}", dq.mu)),
                    ("m_max", format!("{}", dq.m_max)),
                    ("regime", format!("{:?}", lc.regime)),
                    ("n_global_minima", format!("{}", lc.global_minima.len())),
                    ("n_minima", format!("{}", lc.minima.len())),
                    ("well_n_index", format!("{}", well.n_index)),
                    ("well_branch", format!("{:?}", well.branch)),
                    ("well_phi_wb", format!("{:e}", well.location.phi)),
                    ("well_theta_rad", format!("{:e}", well.location.theta)),
                    ("well_value_j", format!("{:e}", well.value)),
                    ("omega_phi_rad_s", format!("{:e}", m.omega_phi)),
                    ("omega_delta_rad_s", format!("{:e}", m.omega_delta)),
                    ("kappa_a", format!("{:e}", m.kappa)),
                    ("beta_rad", format!("{:e}", m.beta)),
                    ("omega_x_rad_s", format!("{:e}", m.omega_x)),
                    ("omega_y_rad_s", format!("{:e}", m.omega_y)),
                    ("omega_phi_over_2pi_hz", format!("{:e}", m.omega_phi / TWO_PI)),
                    ("omega_delta_over_2pi_hz", format!("{:e}", m.omega_delta / TWO_PI)),
                    ("omega_x_over_2pi_hz", format!("{:e}", m.omega_x / TWO_PI)),
                    ("omega_y_over_2pi_hz", format!("{:e}", m.omega_y / TWO_PI)),
                    ("uncoupled", format!("{}", m.kappa == 0.0)),
                ];
                for (k, v) in rows {
                    s.push_str(k);
                    s.push(',');
                    s.push_str(v);
                    s.push('\n');
                }
                write_out(dir, "analyze.csv", &s)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn grid(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<ExitCode> {
    let c = consts();
    let dq = derive(&cfg.device, &c)?;
    let window = cfg.window.ok_or_else(|| {
        Error::InvalidParameter("grid needs a `window` in the config".into())
    })?;
    let g = export_grid(&cfg.device, &dq, &c, window, cfg.n_phi, cfg.n_theta, cfg.n_levels)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &g.values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    println!(
        "grid: {}x{} nodes, V/h in [{lo:e}, {hi:e}] Hz, contour interval {:e} Hz",
        cfg.n_phi, cfg.n_theta, g.metadata.contour_interval_hz
    );
    if let Some(dir) = out_dir {
        match cfg.output_format {
            OutputFormat::Csv => {
                write_out(dir, "grid.csv", &export::potential_grid_csv(&g))?;
                write_out(dir, "grid_meta.json", &export::potential_grid_sidecar(&g)?)?;
            }
            OutputFormat::Json => {
                write_out(dir, "grid.json", &export::to_pretty_json(&g)?)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn sweep(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<ExitCode> {
    let c = consts();
    cfg.device.validate()?;
    let sw = cfg.sweep;
    if !(sw.points >= 1
        && sw.b_min.is_finite()
        && sw.b_max.is_finite()
        && sw.b_min >= 0.0
        && sw.b_max >= sw.b_min)
    {
        return Err(Error::InvalidParameter(format!(
            "sweep range must satisfy 0 <= b_min <= b_max with points >= 1, got [{:e}, {:e}] x {}",
            sw.b_min, sw.b_max, sw.points
        )));
    }
    let sel = cfg.well.unwrap_or(WellSelect { n_index: 0, branch: Branch::Plus });
    let mut rows = Vec::with_capacity(sw.points);
    for i in 0..sw.points {
        let t = if sw.points == 1 { 0.0 } else { i as f64 / (sw.points - 1) as f64 };
        let b = sw.b_min + t * (sw.b_max - sw.b_min);
        let mut dev = cfg.device;
        dev.b_x = b;
        let dq_i = derive(&dev, &c)?;
        let exists = dq_i.flux_scale >= sel.n_index.unsigned_abs() as f64 * c.flux_quantum;
        let modes = if exists {
            select_well(&dev, &dq_i, &c, Some(sel))
                .and_then(|w| mode_frequencies(&w, &dev, &dq_i, &c))
                .ok()
        } else {
            None
        };
        rows.push(match modes {
            Some(m) => export::SweepRow {
                b_x: b,
                kappa: Some(m.kappa),
                omega_delta: Some(m.omega_delta),
                omega_x: Some(m.omega_x),
                omega_y: Some(m.omega_y),
                valid_for_n: true,
            },
            None => export::SweepRow {
                b_x: b,
                kappa: None,
                omega_delta: None,
                omega_x: None,
                omega_y: None,
                valid_for_n: false,
            },
        });
    }
    let valid = rows.iter().filter(|r| r.valid_for_n).count();
    println!(
        "sweep: {} settings in [{:e}, {:e}] T, {valid} valid for n = {}",
        sw.points, sw.b_min, sw.b_max, sel.n_index
    );
    if let Some(dir) = out_dir {
        match cfg.output_format {
            OutputFormat::Csv => write_out(dir, "sweep.csv", &export::sweep_csv(&rows))?,
            OutputFormat::Json => write_out(dir, "sweep.json", &export::sweep_json(&rows)?)?,
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn groundstate(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<ExitCode> {
    let c = consts();
    let dq = derive(&cfg.device, &c)?;
    let well = select_well(&cfg.device, &dq, &c, cfg.well)?;
    let m = mode_frequencies(&well, &cfg.device, &dq, &c)?;
    let g = ground_state_phidelta(&m, &cfg.device, &c)?;
    let report = entanglement_entropy(&g)?;
    let separable = separability_check(&g, cfg.separability_tol);
    println!(
        "ground state at n = {}, {:?}: separable = {separable}, schmidt = {:e}, entropy = {:e} nats",
        well.n_index, well.branch, report.schmidt_parameter, report.entropy
    );
    if let Some(dir) = out_dir {
        let doc = json!({
            "well": well,
            "separable": separable,
            "separability_tol": cfg.separability_tol,
            "entanglement": report,
        });
        write_out(dir, "groundstate.json", &export::to_pretty_json(&doc)?)?;
        write_out(dir, "wavefunction_meta.json", &export::wavefunction_sidecar(&g, &cfg.device, &c)?)?;
        let s_phi = g.marginal_variance_phi().sqrt();
        let s_delta = g.marginal_variance_delta().sqrt();
        let w = LocalWindow {
            phi_min: -cfg.local_margin * s_phi,
            phi_max: cfg.local_margin * s_phi,
            delta_min: -cfg.local_margin * s_delta,
            delta_max: cfg.local_margin * s_delta,
        };
        let grid = wavefunction_grid(&g, &w, cfg.n_local, cfg.n_local)?;
        match cfg.output_format {
            OutputFormat::Csv => {
                write_out(dir, "wavefunction.csv", &export::wavefunction_grid_csv(&grid))?
            }
            OutputFormat::Json => {
                write_out(dir, "wavefunction.json", &export::to_pretty_json(&grid)?)?
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn numeric_grid(cfg: &RunConfig, c: &PhysicalConstants, dq: &DerivedQuantities) -> Result<GridSpec> {
    let window = match cfg.window {
        Some(w) => w,
        None => suggested_window(&cfg.device, dq, c, cfg.margin)?,
    };
    let scaling = ScaleFactors::auto(&cfg.device, dq, c, &window, cfg.n_phi, cfg.n_theta)?;
    Ok(GridSpec { window, n_phi: cfg.n_phi, n_theta: cfg.n_theta, scaling })
}

pub fn doublewell(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<ExitCode> {
    let c = consts();
    let dq = derive(&cfg.device, &c)?;
    let grid = numeric_grid(cfg, &c, &dq)?;
    let ts = tunnel_splitting(&cfg.device, &dq, &c, &grid)?;
    println!(
        "tunnel splitting: delta_e = {:e} J ({:e} Hz), even = {:e} J, odd = {:e} J, mirror overlaps {:e} / {:e}",
        ts.delta_e,
        ts.splitting_frequency,
        ts.even_energy,
        ts.odd_energy,
        ts.even_mirror_overlap,
        ts.odd_mirror_overlap
    );
    if let Some(dir) = out_dir {
        write_out(dir, "doublewell.json", &export::tunnel_manifest_json(&ts, &c)?)?;
        for s in 0..ts.solution.states.len() {
            write_out(dir, &format!("state_{s}.csv"), &export::eigen_state_csv(&ts.solution, s)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn eigen(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<ExitCode> {
    let c = consts();
    let dq = derive(&cfg.device, &c)?;
    let grid = numeric_grid(cfg, &c, &dq)?;
    let h = discretize(&cfg.device, &dq, &c, &grid)?;
    let sol = solve_lowest(&h, cfg.n_states)?;
    for (s, (e, r)) in sol.energies.iter().zip(&sol.residuals).enumerate() {
        println!("state {s}: E = {e:e} J, residual = {r:e} J");
    }
    if let Some(dir) = out_dir {
        write_out(dir, "eigen.json", &export::eigen_manifest_json(&sol, &c)?)?;
        for s in 0..sol.states.len() {
            write_out(dir, &format!("state_{s}.csv"), &export::eigen_state_csv(&sol, s)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn case_modes(dev: &DeviceParams, c: &PhysicalConstants) -> Result<(DerivedQuantities, HarmonicModes)> {
    let dq = derive(dev, c)?;
    let e = enumerate_candidate_minima(dev, &dq, c)?;
    let well = e
        .points
        .iter()
        .find(|p| p.kind == PointKind::Minimum && p.n_index == 0 && p.branch == Branch::Plus)
        .copied()
        .ok_or_else(|| Error::Computation("n = 0 well not found".into()))?;
    let m = mode_frequencies(&well, dev, &dq, c)?;
    Ok((dq, m))
}

pub struct ReproduceArgs {
    /// Inductance override (H), for demonstrating reference mismatches.
    pub inductance: Option<f64>,
    /// Machine-readable stdout.
    pub json: bool,
    /// Replaces every row tolerance when set.
    pub tolerance: Option<f64>,
}

pub fn reproduce(args: &ReproduceArgs, out_dir: Option<&Path>, format: OutputFormat) -> Result<ExitCode> {
    let c = consts();
    let mut stiff = DeviceParams::example_device();
    if let Some(l) = args.inductance {
        stiff.inductance = l;
    }
    let mut free = stiff;
    free.omega_i = 0.0;
    let (dq, m_stiff) = case_modes(&stiff, &c)?;
    let (_, m_free) = case_modes(&free, &c)?;

    let mut reports = Vec::new();
    let mut all_pass = true;
    for row in reference_rows()? {
        let m = match row.case_ {
            RefCase::Stiff => &m_stiff,
            RefCase::Free => &m_free,
        };
        let computed = match row.quantity.as_str() {
            "beta_l" => dq.beta_l,
            "kappa" => m.kappa,
            "omega_phi_over_2pi" => m.omega_phi / TWO_PI,
            "omega_delta_over_2pi" => m.omega_delta / TWO_PI,
            "omega_x_over_2pi" => m.omega_x / TWO_PI,
            "omega_y_over_2pi" => m.omega_y / TWO_PI,
            q => {
                return Err(Error::InvalidParameter(format!(
                    "reference table names unknown quantity `{q}`"
                )))
            }
        };
        let rel_delta = (computed - row.published).abs() / row.published.abs();
        let rel_tol = args.tolerance.unwrap_or(row.rel_tol);
        let pass = rel_delta <= rel_tol;
        all_pass &= pass;
        reports.push(json!({
            "case": row.case_,
            "quantity": row.quantity,
            "published": row.published,
            "computed": computed,
            "rel_delta": rel_delta,
            "rel_tol": rel_tol,
            "unit": row.unit,
            "provenance": row.provenance,
            "citation": row.citation,
            "pass": pass,
        }));
    }

    let doc = json!({ "all_pass": all_pass, "rows": reports });
    if args.json {
        print!("{}", export::to_pretty_json(&doc)?);
    } else {
        println!(
            "{:<6} {:<22} {:>12} {:>24} {:>12} {:>8} verdict",
            "case", "quantity", "published", "computed", "rel_delta", "rel_tol"
        );
        for r in doc["rows"].as_array().unwrap() {
            println!(
                "{:<6} {:<22} {:>12} {:>24} {:>12} {:>8} {}",
                r["case"].as_str().unwrap(),
                r["quantity"].as_str().unwrap(),
                format!("{:e}", r["published"].as_f64().unwrap()),
                format!("{:e}", r["computed"].as_f64().unwrap()),
                format!("{:.1e}", r["rel_delta"].as_f64().unwrap()),
                format!("{:.1e}", r["rel_tol"].as_f64().unwrap()),
                if r["pass"].as_bool().unwrap() { "PASS" } else { "FAIL" }
            );
        }
        println!("result: {}", if all_pass { "all rows PASS" } else { "some rows FAIL" });
    }
    if let Some(dir) = out_dir {
        match format {
            OutputFormat::Json => write_out(dir, "reproduce_paper.json", &export::to_pretty_json(&doc)?)?,
            OutputFormat::Csv => {
                let mut s = String::from(
                    "case,quantity,published,computed,rel_delta,rel_tol,unit,provenance,pass\n",
                );
                for r in doc["rows"].as_array().unwrap() {
                    s.push_str(&format!(
                        "{},{},{:e},{:e},{:e},{:e},{},{},{}\n",
                        r["case"].as_str().unwrap(),
                        r["quantity"].as_str().unwrap(),
                        r["published"].as_f64().unwrap(),
                        r["computed"].as_f64().unwrap(),
                        r["rel_delta"].as_f64().unwrap(),
                        r["rel_tol"].as_f64().unwrap(),
                        r["unit"].as_str().unwrap(),
                        r["provenance"].as_str().unwrap(),
                        r["pass"].as_bool().unwrap()
                    ));
                }
                write_out(dir, "reproduce_paper.csv", &s)?;
            }
        }
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
