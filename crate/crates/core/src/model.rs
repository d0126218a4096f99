//! Physical constants, device parameters, and derived scalars shared by every
//! other module.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fundamental constants. CODATA 2018 fixes h and e exactly; everything else
/// is computed from them so the stored values are self-consistent by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Planck constant (J·s).
    pub h: f64,
    /// Reduced Planck constant h/2π (J·s).
    pub hbar: f64,
    /// Elementary charge (C).
    pub e: f64,
    /// Superconducting flux quantum Φ₀ = h/2e (Wb).
    pub flux_quantum: f64,
}

impl PhysicalConstants {
    pub fn codata2018() -> Self {
        let h = 6.626_070_15e-34;
        let e = 1.602_176_634e-19;
        PhysicalConstants {
            h,
            hbar: h / (2.0 * std::f64::consts::PI),
            e,
            flux_quantum: h / (2.0 * e),
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

/// All physical inputs describing one device. Mass and moment of inertia are
/// direct inputs rather than being computed from the cantilever dimensions;
/// see [`slab_mass_estimate`] for why.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Loop self-inductance L (H).
    pub inductance: f64,
    /// Junction capacitance C (F).
    pub capacitance: f64,
    /// Junction critical current I_c (A).
    pub critical_current: f64,
    /// Cantilever length l (m).
    pub length: f64,
    /// Cantilever width w (m).
    pub width: f64,
    /// Cantilever thickness t (m).
    pub thickness: f64,
    /// Cantilever mass (kg).
    pub mass: f64,
    /// Moment of inertia I_m about the torsion (z) axis (kg·m²).
    pub moment_of_inertia: f64,
    /// Intrinsic torsional angular frequency ω_i (rad/s).
    pub omega_i: f64,
    /// Equilibrium twist angle θ₀ (rad), in [-π, π].
    pub theta_0: f64,
    /// External in-plane magnetic field magnitude Bₓ (T).
    pub b_x: f64,
}

impl DeviceParams {
    /// Paddle area A = l·w (m²).
    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    /// The 5 µA / 100 pH / 0.1 pF device with a 6 µm × 4 µm niobium paddle
    /// used as the running example throughout the crate and CLI.
    pub fn example_device() -> Self {
        DeviceParams {
            inductance: 100e-12,
            capacitance: 0.1e-12,
            critical_current: 5e-6,
            length: 6e-6,
            width: 4e-6,
            thickness: 0.5e-6,
            mass: 3.64e-14,
            moment_of_inertia: 7.28e-25,
            omega_i: 2.0 * std::f64::consts::PI * 12_000.0,
            theta_0: std::f64::consts::FRAC_PI_2,
            b_x: 5e-2,
        }
    }

    /// Rejects non-physical parameter sets; `derive` runs this first.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.inductance, "inductance"),
            (self.capacitance, "capacitance"),
            (self.critical_current, "critical_current"),
            (self.moment_of_inertia, "moment_of_inertia"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v:e}"
                )));
            }
        }
        if !(self.area() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "paddle area l·w must be positive, got {:e} × {:e}",
                self.length, self.width
            )));
        }
        if !(self.omega_i >= 0.0) || !self.omega_i.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega_i must be nonnegative and finite, got {:e}",
                self.omega_i
            )));
        }
        if !(self.b_x >= 0.0) || !self.b_x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b_x must be nonnegative and finite, got {:e}",
                self.b_x
            )));
        }
        if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&self.theta_0) {
            return Err(Error::InvalidParameter(format!(
                "theta_0 must lie in [-pi, pi], got {}",
                self.theta_0
            )));
        }
        Ok(())
    }
}

/// Scalars derived from [`DeviceParams`], computed once and passed around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Josephson energy E_j = I_c·Φ₀/2π (J).
    pub e_j: f64,
    /// Screening parameter β_L = 2πLI_c/Φ₀ (dimensionless).
    pub beta_l: f64,
    /// Effective mass μ = √(C·I_m) shared by both rescaled modes.
    pub mu: f64,
    /// Flux scale BₓA (Wb): the applied flux when the paddle lies in-plane.
    pub flux_scale: f64,
    /// Largest integer m with mΦ₀ < BₓA, i.e. floor(BₓA/Φ₀). Flux indices n
    /// with |n| ≤ m_max admit a real twist angle cos θ = nΦ₀/BₓA.
    pub m_max: i64,
}

/// Computes every derived scalar, validating the parameter invariants first.
pub fn derive(params: &DeviceParams, consts: &PhysicalConstants) -> Result<DerivedQuantities> {
    params.validate()?;
    let phi0 = consts.flux_quantum;
    let flux_scale = params.b_x * params.area();
    Ok(DerivedQuantities {
        e_j: params.critical_current * phi0 / (2.0 * std::f64::consts::PI),
        beta_l: 2.0 * std::f64::consts::PI * params.inductance * params.critical_current / phi0,
        mu: (params.capacitance * params.moment_of_inertia).sqrt(),
        flux_scale,
        m_max: (flux_scale / phi0).floor() as i64,
    })
}

/// Uniform-slab estimates m = ρ·l·w·t and I = m·l²/3 for a thin plate pivoting
/// about one end. Real paddles quote measured mass and inertia that these
/// formulas do not reproduce (the example device's figures differ by ~3×), so
/// they are offered for rough sanity checks only, never used by [`derive`].
pub fn slab_mass_estimate(density: f64, length: f64, width: f64, thickness: f64) -> (f64, f64) {
    let mass = density * length * width * thickness;
    (mass, mass * length * length / 3.0)
}
