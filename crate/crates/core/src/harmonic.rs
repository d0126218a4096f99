//! Quadratic analysis around a potential minimum: Taylor coefficients of the
//! coupled (φ, δ) oscillators, the flux-angle coupling constant, and the
//! rotation that decouples them into (X, Y) normal modes.
//!
//! Around the well (nΦ₀, θ±_n) with offsets φ = Φ − nΦ₀ and δ = θ − θ±_n the
//! potential is c_φφ·φ² + c_φδ·φδ + c_δδ·δ², and with the conjugate momenta it
//! describes two coupled oscillators of masses C and I_m. Rescaling both to
//! the common mass μ = √(C·I_m) and rotating by β diagonalizes the form.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::model::{DerivedQuantities, DeviceParams, PhysicalConstants};
use crate::potential::{potential, LandscapePoint, PointKind, StationaryPoint};
use crate::{Error, Result};

/// Offsets from a reference minimum: φ = Φ − nΦ₀, δ = θ − θ±_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCoordinates {
    /// Flux offset (Wb).
    pub phi: f64,
    /// Angle offset (rad).
    pub delta: f64,
    pub reference: StationaryPoint,
}

impl LocalCoordinates {
    pub fn new(phi: f64, delta: f64, reference: StationaryPoint) -> Result<Self> {
        if reference.kind != PointKind::Minimum {
            return Err(Error::InvalidParameter(
                "local coordinates must be anchored at a minimum".into(),
            ));
        }
        Ok(LocalCoordinates { phi, delta, reference })
    }

    /// The absolute (Φ, θ) point these offsets address.
    pub fn absolute(&self) -> LandscapePoint {
        LandscapePoint {
            phi: self.reference.location.phi + self.phi,
            theta: self.reference.location.theta + self.delta,
        }
    }
}

/// Quadratic form of the well: V ≈ c_φφ·φ² + c_δδ·δ² + c_φδ·φδ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    /// J/Wb².
    pub c_phiphi: f64,
    /// J/rad².
    pub c_deltadelta: f64,
    /// J/(Wb·rad); sign follows the branch (θ⁻_n reverses it).
    pub c_phidelta: f64,
}

/// Normal-mode data of one well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicModes {
    /// Bare flux mode frequency ω_φ (rad/s).
    pub omega_phi: f64,
    /// Bare deflection mode frequency ω_δ (rad/s).
    pub omega_delta: f64,
    /// Coupling constant κ = ±√(Bₓ²A² − n²Φ₀²)/L (A).
    pub kappa: f64,
    /// Common rescaled mass μ = √(C·I_m).
    pub mu: f64,
    /// Basis rotation angle β (rad).
    pub beta: f64,
    /// Decoupled frequencies, labeled so ω_X ≥ ω_Y.
    pub omega_x: f64,
    pub omega_y: f64,
    /// +1 for the θ⁺_n branch, −1 for θ⁻_n.
    pub branch_sign: f64,
}

fn discriminant(well: &StationaryPoint, dq: &DerivedQuantities, consts: &PhysicalConstants) -> Result<f64> {
    if well.kind != PointKind::Minimum {
        return Err(Error::InvalidParameter(
            "harmonic analysis requires a minimum".into(),
        ));
    }
    let n_phi = well.n_index as f64 * consts.flux_quantum;
    let disc = dq.flux_scale * dq.flux_scale - n_phi * n_phi;
    if disc < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "flux index n={} lies outside the field window BₓA={:e} Wb",
            well.n_index, dq.flux_scale
        )));
    }
    Ok(disc)
}

/// Closed-form quadratic coefficients of the well (nΦ₀, θ±_n). Exact when
/// θ₀ = θ±_n; for off-condition equilibria they describe the unshifted well.
pub fn taylor_coefficients(
    well: &StationaryPoint,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Result<TaylorCoefficients> {
    let disc = discriminant(well, dq, consts)?;
    let phi0 = consts.flux_quantum;
    let l = params.inductance;
    Ok(TaylorCoefficients {
        c_phiphi: 0.5 / l + 2.0 * PI * PI * dq.e_j / (phi0 * phi0),
        c_deltadelta: disc / (2.0 * l)
            + 0.5 * params.moment_of_inertia * params.omega_i * params.omega_i,
        c_phidelta: well.branch.sign() * disc.sqrt() / l,
    })
}

/// Bare frequencies, coupling, rotation angle, and decoupled frequencies for
/// one well.
///
/// ω_Y² is evaluated as det/ω_X² rather than by the textbook mean−ρ/2 closed
/// form, which cancels catastrophically when ω_φ ≫ ω_δ (the trace is then
/// twenty orders of magnitude above the small eigenvalue). The two forms are
/// algebraically identical.
pub fn mode_frequencies(
    well: &StationaryPoint,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Result<HarmonicModes> {
    let disc = discriminant(well, dq, consts)?;
    let phi0 = consts.flux_quantum;
    let l = params.inductance;
    let omega_phi_sq =
        (1.0 / params.capacitance) * (1.0 / l + 4.0 * PI * PI * dq.e_j / (phi0 * phi0));
    let omega_delta_sq =
        disc / (params.moment_of_inertia * l) + params.omega_i * params.omega_i;
    if omega_delta_sq <= 0.0 {
        return Err(Error::Computation(
            "deflection mode is not restoring; well is not harmonic".into(),
        ));
    }
    let kappa = well.branch.sign() * disc.sqrt() / l;
    let mu = dq.mu;

    let coupling = 2.0 * kappa / mu;
    let diff = omega_phi_sq - omega_delta_sq;
    let beta = 0.5 * coupling.atan2(diff);
    let rho = diff.hypot(coupling);
    let omega_x_sq = 0.5 * (omega_phi_sq + omega_delta_sq) + 0.5 * rho;
    let det = omega_phi_sq * omega_delta_sq - (kappa / mu) * (kappa / mu);
    if det <= 0.0 || omega_x_sq <= 0.0 {
        return Err(Error::Computation(
            "coupled quadratic form is not positive definite".into(),
        ));
    }
    let omega_y_sq = det / omega_x_sq;
    Ok(HarmonicModes {
        omega_phi: omega_phi_sq.sqrt(),
        omega_delta: omega_delta_sq.sqrt(),
        kappa,
        mu,
        beta,
        omega_x: omega_x_sq.sqrt(),
        omega_y: omega_y_sq.sqrt(),
        branch_sign: well.branch.sign(),
    })
}

/// Applies the mass rescaling and β rotation to the coupled quadratic form
/// and returns the result in the (X, Y) basis: ideally diag(½μω_X², ½μω_Y²),
/// with the off-diagonal killed by the choice of β.
pub fn decoupled_quadratic_form(modes: &HarmonicModes) -> Matrix2<f64> {
    let m = 0.5
        * modes.mu
        * Matrix2::new(
            modes.omega_phi * modes.omega_phi,
            modes.kappa / modes.mu,
            modes.kappa / modes.mu,
            modes.omega_delta * modes.omega_delta,
        );
    let (s, c) = modes.beta.sin_cos();
    let r = Matrix2::new(c, -s, s, c);
    r.transpose() * m * r
}

/// Quadratic-approximation health check: the largest |V − V_quad| / V_quad
/// over the compass points one ground-state width from the well. Diagnostic
/// only; large values flag wells too shallow for the harmonic treatment.
pub fn anharmonicity_ratio(
    well: &StationaryPoint,
    modes: &HarmonicModes,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Result<f64> {
    let tc = taylor_coefficients(well, params, dq, consts)?;
    let sigma_phi = (consts.hbar / (2.0 * params.capacitance * modes.omega_phi)).sqrt();
    let sigma_delta =
        (consts.hbar / (2.0 * params.moment_of_inertia * modes.omega_delta)).sqrt();
    let center = LandscapePoint {
        phi: well.n_index as f64 * consts.flux_quantum,
        theta: well.branch.sign()
            * (well.n_index as f64 * consts.flux_quantum / dq.flux_scale)
                .clamp(-1.0, 1.0)
                .acos(),
    };
    let v0 = potential(&center, params, dq, consts);
    let mut worst: f64 = 0.0;
    for (a, b) in [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ] {
        let phi = a * sigma_phi;
        let delta = b * sigma_delta;
        let quad =
            tc.c_phiphi * phi * phi + tc.c_deltadelta * delta * delta + tc.c_phidelta * phi * delta;
        let v = potential(
            &LandscapePoint { phi: center.phi + phi, theta: center.theta + delta },
            params,
            dq,
            consts,
        ) - v0;
        if quad > 0.0 {
            worst = worst.max(((v - quad) / quad).abs());
        }
    }
    Ok(worst)
}
