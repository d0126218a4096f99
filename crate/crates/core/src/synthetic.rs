//! Scaled synthetic devices for the numerical verifier.
//!
//! At the example device's physical parameters the two mode frequencies are
//! six orders of magnitude apart, which no affordable 2D grid can resolve.
//! These constructors build devices that keep the exact potential structure
//! (junction lattice, magnetic valley, elastic term) but bring the mode ratio
//! down to single digits, so eigensolves at a few hundred points per axis are
//! meaningful.
//!
//! Construction recipe, driven by target quantities: flux mode frequency
//! ω_φ = 10⁴ rad/s, screening ratio β_L = 0.8 (single well per branch in Φ),
//! field window BₓA = 25.5·Φ₀ with the working wells at n = 25, θ = ±θ_s,
//! θ_s = arccos(25/25.5). Free knobs per regime:
//!   - `sigma_fraction`: flux ground-state width as a fraction of Φ₀, which
//!     fixes C and thereby L, E_j, I_c;
//!   - `ratio_delta`: ω_δ/ω_φ, which fixes I_m;
//!   - `valley_weight`: elastic energy of the working wells in units of E_j
//!     (½·k_el·θ_s² = valley_weight·E_j), which fixes ω_i and controls the
//!     barrier between the mirrored wells;
//!   - `theta_0`: equilibrium angle; 0 makes the ±θ_s pair exactly
//!     degenerate, θ_s captures a single well, small offsets bias the pair.

use crate::model::{DeviceParams, PhysicalConstants};
use std::f64::consts::PI;

/// Flux index of the working wells.
pub const WELL_INDEX: i64 = 25;

/// BₓA in units of Φ₀.
pub const FIELD_WINDOW: f64 = 25.5;

/// Target flux mode frequency (rad/s).
pub const OMEGA_PHI: f64 = 1e4;

/// Target screening ratio.
pub const BETA_L: f64 = 0.8;

/// Half-separation of the working wells: θ_s = arccos(25/25.5).
pub fn well_angle() -> f64 {
    (WELL_INDEX as f64 / FIELD_WINDOW).acos()
}

fn scaled_device(
    consts: &PhysicalConstants,
    sigma_fraction: f64,
    ratio_delta: f64,
    valley_weight: f64,
    theta_0: f64,
) -> DeviceParams {
    let phi0 = consts.flux_quantum;
    let sigma_phi = sigma_fraction * phi0;
    let capacitance = consts.hbar / (2.0 * sigma_phi * sigma_phi * OMEGA_PHI);
    let inductance = (1.0 + BETA_L) / (capacitance * OMEGA_PHI * OMEGA_PHI);
    let e_j = BETA_L * phi0 * phi0 / (4.0 * PI * PI * inductance);
    let critical_current = 2.0 * PI * e_j / phi0;
    let ba = FIELD_WINDOW * phi0;
    let theta_s = well_angle();
    let k_magnetic = (ba * theta_s.sin()).powi(2) / inductance;
    let k_elastic = 2.0 * valley_weight * e_j / (theta_s * theta_s);
    let omega_delta = ratio_delta * OMEGA_PHI;
    let moment_of_inertia = (k_magnetic + k_elastic) / (omega_delta * omega_delta);
    let omega_i = (k_elastic / moment_of_inertia).sqrt();
    let mut p = DeviceParams::example_device();
    p.inductance = inductance;
    p.capacitance = capacitance;
    p.critical_current = critical_current;
    p.moment_of_inertia = moment_of_inertia;
    p.omega_i = omega_i;
    p.theta_0 = theta_0;
    p.b_x = ba / p.area();
    p
}

/// Single global well at (25Φ₀, +θ_s): the equilibrium angle sits on the
/// well, so every other candidate pays an elastic penalty.
pub fn single_well_regime(consts: &PhysicalConstants) -> DeviceParams {
    scaled_device(consts, 0.007, 3.0, 0.40, well_angle())
}

/// Deep symmetric pair at (25Φ₀, ±θ_s) with a barrier well above ħω_Y:
/// tunneling is resolvable but the wells keep their identity.
pub fn deep_double_well_regime(consts: &PhysicalConstants) -> DeviceParams {
    scaled_device(consts, 0.02, 2.77, 0.40, 0.0)
}

/// Symmetric pair whose barrier is controlled by `valley_weight`; larger
/// values raise the wells toward the saddle and widen the tunnel splitting.
pub fn split_double_well_regime(consts: &PhysicalConstants, valley_weight: f64) -> DeviceParams {
    scaled_device(consts, 0.03, 9.0, valley_weight, 0.0)
}

/// Barrier far below ħω_Y: the pair acts as one anharmonic well and the
/// two-Gaussian picture breaks down.
pub fn merged_double_well_regime(consts: &PhysicalConstants) -> DeviceParams {
    split_double_well_regime(consts, 2.6)
}

/// Symmetric pair tilted by moving the equilibrium angle to `bias`; the
/// lower well is the one on the bias side.
pub fn biased_double_well_regime(consts: &PhysicalConstants, bias: f64) -> DeviceParams {
    scaled_device(consts, 0.03, 9.0, 1.0, bias)
}
