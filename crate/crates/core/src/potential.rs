//! The two dimensional potential energy surface V(Φ,θ): evaluation, analytic
//! derivatives, stationary-point search and classification, barrier location,
//! and grid export for contour plots.
//!
//! V(Φ,θ) = (Φ − BₓA·cosθ)²/2L + E_j(1 − cos 2πΦ/Φ₀) + ½ I_m ω_i² (θ − θ₀)²
//!
//! The first term is the inductive energy of the loop with a θ-dependent
//! applied flux, the second the Josephson energy of the junction, the third
//! the elastic torsion energy of the cantilever.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::model::{DerivedQuantities, DeviceParams, PhysicalConstants};
use crate::{Error, Result};

/// Arguments of the standalone flux-qubit potential (rigid loop, fixed
/// applied flux Φ_a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxQubitPotentialInput {
    /// Loop flux Φ (Wb).
    pub phi: f64,
    /// Applied flux Φ_a (Wb).
    pub phi_a: f64,
}

/// A point of the (Φ, θ) configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    /// Flux coordinate Φ (Wb).
    pub phi: f64,
    /// Twist angle θ (rad).
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Minimum,
    Saddle,
    Maximum,
}

/// Which of the two twist angles ±cos⁻¹(nΦ₀/BₓA) seeded a stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    /// The mirrored branch (θ⁺_n ↔ θ⁻_n).
    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// A refined stationary point of V with its Hessian classification.
/// `n_index` and `branch` record which analytic candidate (nΦ₀, θ±_n) seeded
/// the refinement; the refined location can differ when ω_i > 0 pulls θ
/// toward θ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub location: LandscapePoint,
    /// V at `location` (J).
    pub value: f64,
    pub kind: PointKind,
    /// Second partials [[V_ΦΦ, V_Φθ], [V_Φθ, V_θθ]] at `location`.
    pub hessian: Matrix2<f64>,
    pub n_index: i64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SingleGlobalWell,
    SymmetricDoubleWell,
    AsymmetricDoubleWell,
    MultiWellLattice,
}

/// Saddle between two wells plus the barrier height above the higher well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierInfo {
    pub saddle: StationaryPoint,
    /// V(saddle) − max(V(left), V(right)) (J).
    pub height: f64,
}

/// Overall shape of the landscape for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeClass {
    pub regime: Regime,
    /// Minima within the degeneracy tolerance of the lowest one.
    pub global_minima: Vec<StationaryPoint>,
    /// All refined minima, ascending in V.
    pub minima: Vec<StationaryPoint>,
    /// Present for the double-well regimes: the saddle between the two
    /// lowest wells.
    pub barrier: Option<BarrierInfo>,
}

/// Result of candidate enumeration. Candidates whose Newton refinement did
/// not converge are skipped and recorded in `warnings`.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// Refined, deduplicated stationary points (any kind; callers filter).
    pub points: Vec<StationaryPoint>,
    pub warnings: Vec<String>,
}

/// Rectangular sampling window in (Φ, θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridWindow {
    pub phi_min: f64,
    pub phi_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub params: DeviceParams,
    pub window: GridWindow,
    /// Suggested contour spacing (max−min)/n_levels, in Hz.
    pub contour_interval_hz: f64,
    pub n_levels: usize,
}

/// Uniform sampling of V/h (Hz) over a window. `values` is row-major with Φ
/// as the slow (row) index: `values[i_phi * n_theta + j_theta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialGrid {
    pub phi_axis: Vec<f64>,
    pub theta_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: GridMetadata,
}

impl PotentialGrid {
    pub fn value_at(&self, i_phi: usize, j_theta: usize) -> f64 {
        self.values[i_phi * self.theta_axis.len() + j_theta]
    }
}

/// Potential of the standalone flux qubit: (Φ−Φ_a)²/2L + E_j(1 − cos 2πΦ/Φ₀).
/// Kinetic (charging) energy excluded.
pub fn flux_qubit_potential(
    input: &FluxQubitPotentialInput,
    dq: &DerivedQuantities,
    inductance: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    if !(inductance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inductance must be positive, got {inductance:e}"
        )));
    }
    let d = input.phi - input.phi_a;
    Ok(d * d / (2.0 * inductance)
        + dq.e_j * (1.0 - (2.0 * PI * input.phi / consts.flux_quantum).cos()))
}

/// Full coupled potential V(Φ,θ) in joules.
pub fn potential(
    p: &LandscapePoint,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> f64 {
    let r = p.phi - dq.flux_scale * p.theta.cos();
    let dtheta = p.theta - params.theta_0;
    r * r / (2.0 * params.inductance)
        + dq.e_j * (1.0 - (2.0 * PI * p.phi / consts.flux_quantum).cos())
        + 0.5 * params.moment_of_inertia * params.omega_i * params.omega_i * dtheta * dtheta
}

/// Analytic gradient (∂V/∂Φ, ∂V/∂θ).
pub fn gradient(
    p: &LandscapePoint,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Vector2<f64> {
    let phi0 = consts.flux_quantum;
    let r = p.phi - dq.flux_scale * p.theta.cos();
    let g_phi = r / params.inductance
        + (2.0 * PI * dq.e_j / phi0) * (2.0 * PI * p.phi / phi0).sin();
    let g_theta = r * dq.flux_scale * p.theta.sin() / params.inductance
        + params.moment_of_inertia * params.omega_i * params.omega_i * (p.theta - params.theta_0);
    Vector2::new(g_phi, g_theta)
}

/// Analytic Hessian of V; symmetric by construction.
pub fn hessian(
    p: &LandscapePoint,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Matrix2<f64> {
    let phi0 = consts.flux_quantum;
    let l = params.inductance;
    let r = p.phi - dq.flux_scale * p.theta.cos();
    let (s, c) = p.theta.sin_cos();
    let h_pp = 1.0 / l + (4.0 * PI * PI * dq.e_j / (phi0 * phi0)) * (2.0 * PI * p.phi / phi0).cos();
    let h_pt = dq.flux_scale * s / l;
    let h_tt = (dq.flux_scale * s) * (dq.flux_scale * s) / l + r * dq.flux_scale * c / l
        + params.moment_of_inertia * params.omega_i * params.omega_i;
    Matrix2::new(h_pp, h_pt, h_pt, h_tt)
}

/// Gradient in dimensionless form: components scaled by (Φ₀, 1 rad) and
/// divided by E_j. Newton acceptance below is stated in these units because
/// the raw θ component has an f64 noise floor of order H_θθ·ulp(θ), far above
/// any fixed absolute gate.
fn scaled_gradient_norm(
    p: &LandscapePoint,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> f64 {
    let g = gradient(p, params, dq, consts);
    (g.x * consts.flux_quantum / dq.e_j).abs().max((g.y / dq.e_j).abs())
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_GRAD_TOL: f64 = 1e-7;

/// Newton-refines a seed to the nearest stationary point and classifies it by
/// Hessian signature. `n_index`/`branch` are provenance labels passed through
/// to the result.
pub fn refine_stationary(
    seed: LandscapePoint,
    n_index: i64,
    branch: Branch,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Result<StationaryPoint> {
    let phi0 = consts.flux_quantum;
    let mut p = seed;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let g = gradient(&p, params, dq, consts);
        let h = hessian(&p, params, dq, consts);
        let step = h.lu().solve(&(-g)).ok_or_else(|| {
            Error::Computation(format!(
                "singular Hessian during Newton refinement near (phi={:e}, theta={})",
                p.phi, p.theta
            ))
        })?;
        p.phi += step.x;
        p.theta += step.y;
        if !p.phi.is_finite() || !p.theta.is_finite() {
            return Err(Error::Computation(format!(
                "Newton refinement diverged from seed (phi={:e}, theta={})",
                seed.phi, seed.theta
            )));
        }
        // Step stagnation: quadratic convergence has stalled at the floating
        // point floor of the coordinates.
        if step.x.abs() <= 1e-14 * phi0.max(p.phi.abs())
            && step.y.abs() <= 1e-14 * 1.0_f64.max(p.theta.abs())
        {
            converged = true;
            break;
        }
    }
    if !converged && scaled_gradient_norm(&p, params, dq, consts) > NEWTON_GRAD_TOL {
        return Err(Error::Computation(format!(
            "Newton refinement did not converge from seed (phi={:e}, theta={})",
            seed.phi, seed.theta
        )));
    }
    let residual = scaled_gradient_norm(&p, params, dq, consts);
    if residual > NEWTON_GRAD_TOL {
        return Err(Error::Computation(format!(
            "stationary point residual {residual:e} exceeds tolerance at (phi={:e}, theta={})",
            p.phi, p.theta
        )));
    }
    let h = hessian(&p, params, dq, consts);
    Ok(StationaryPoint {
        location: p,
        value: potential(&p, params, dq, consts),
        kind: classify_hessian(&h)?,
        hessian: h,
        n_index,
        branch,
    })
}

/// Closed-form eigenvalues of a symmetric 2×2 matrix, ascending. The small
/// eigenvalue is computed as det/dominant: the textbook mean−rho form cancels
/// catastrophically here, where the two Hessian eigenvalues can differ by
/// twenty orders of magnitude.
pub fn symmetric_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, k) = (m[(0, 0)], m[(1, 1)], m[(0, 1)]);
    let mean = 0.5 * (a + b);
    let rho = (0.5 * (a - b)).hypot(k);
    if rho == 0.0 {
        return (mean, mean);
    }
    let dominant = if mean >= 0.0 { mean + rho } else { mean - rho };
    let other = (a * b - k * k) / dominant;
    if dominant >= other {
        (other, dominant)
    } else {
        (dominant, other)
    }
}

fn classify_hessian(h: &Matrix2<f64>) -> Result<PointKind> {
    let (lo, hi) = symmetric_eigenvalues(h);
    if lo == 0.0 || hi == 0.0 {
        return Err(Error::Computation(
            "degenerate Hessian: zero eigenvalue, cannot classify stationary point".into(),
        ));
    }
    Ok(if lo > 0.0 {
        PointKind::Minimum
    } else if hi < 0.0 {
        PointKind::Maximum
    } else {
        PointKind::Saddle
    })
}

/// Emits the analytic well candidates (nΦ₀, ±cos⁻¹[nΦ₀/BₓA]) for every
/// |n| ≤ m_max, refines each by Newton, deduplicates, and classifies. With
/// BₓA = 0 the field term vanishes and the single candidate is (0, θ₀).
pub fn enumerate_candidate_minima(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Result<Enumeration> {
    let phi0 = consts.flux_quantum;
    let mut seeds: Vec<(LandscapePoint, i64, Branch)> = Vec::new();
    if dq.flux_scale == 0.0 {
        seeds.push((LandscapePoint { phi: 0.0, theta: params.theta_0 }, 0, Branch::Plus));
    } else {
        for n in -dq.m_max..=dq.m_max {
            let x = n as f64 * phi0 / dq.flux_scale;
            let theta_plus = x.clamp(-1.0, 1.0).acos();
            let phi = n as f64 * phi0;
            seeds.push((LandscapePoint { phi, theta: theta_plus }, n, Branch::Plus));
            if theta_plus != 0.0 {
                seeds.push((LandscapePoint { phi, theta: -theta_plus }, n, Branch::Minus));
            }
        }
    }

    // Seeds whose true stationary point no longer exists (the elastic term
    // can erase a branch entirely) make Newton wander into another basin.
    // Dedup keeps the entry whose seed was closest to the converged point, so
    // n_index/branch labels stay meaningful.
    let mut kept: Vec<(StationaryPoint, f64)> = Vec::new();
    let mut warnings = Vec::new();
    'seed: for (seed, n, branch) in seeds {
        let refined = match refine_stationary(seed, n, branch, params, dq, consts) {
            Ok(sp) => sp,
            Err(e) => {
                warnings.push(format!("candidate n={n} branch={branch:?} skipped: {e}"));
                continue;
            }
        };
        let drift = ((refined.location.phi - seed.phi) / phi0).abs()
            + (refined.location.theta - seed.theta).abs();
        for (existing, existing_drift) in &mut kept {
            if (existing.location.phi - refined.location.phi).abs() < 1e-6 * phi0
                && (existing.location.theta - refined.location.theta).abs() < 1e-6
            {
                if drift < *existing_drift {
                    *existing = refined;
                    *existing_drift = drift;
                }
                continue 'seed;
            }
        }
        kept.push((refined, drift));
    }
    Ok(Enumeration {
        points: kept.into_iter().map(|(sp, _)| sp).collect(),
        warnings,
    })
}

/// Degeneracy tolerance: two wells count as degenerate when their values
/// agree within 1e−9 of the 2E_j landscape scale.
pub fn degeneracy_tolerance(dq: &DerivedQuantities) -> f64 {
    1e-9 * 2.0 * dq.e_j
}

/// Classifies the landscape from the refined minima.
///
/// With ω_i = 0 every well of every flux index is exactly degenerate at V = 0
/// and the minima tile a lattice. Otherwise the two lowest wells decide:
/// degenerate within tolerance → symmetric double well; split beyond
/// tolerance but still detached from the remaining minima → asymmetric double
/// well; anything else → single global well.
pub fn classify_landscape(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Result<LandscapeClass> {
    let enumeration = enumerate_candidate_minima(params, dq, consts)?;
    let mut minima: Vec<StationaryPoint> = enumeration
        .points
        .into_iter()
        .filter(|p| p.kind == PointKind::Minimum)
        .collect();
    if minima.is_empty() {
        return Err(Error::Computation(
            "no minima found; landscape cannot be classified".into(),
        ));
    }
    minima.sort_by(|a, b| a.value.total_cmp(&b.value));
    let tol = degeneracy_tolerance(dq);
    let v0 = minima[0].value;
    let global_minima: Vec<StationaryPoint> = minima
        .iter()
        .copied()
        .take_while(|p| p.value - v0 <= tol)
        .collect();

    if params.omega_i == 0.0 {
        return Ok(LandscapeClass {
            regime: Regime::MultiWellLattice,
            global_minima,
            minima,
            barrier: None,
        });
    }

    let regime = if minima.len() < 2 {
        Regime::SingleGlobalWell
    } else {
        let pair_gap = minima[1].value - v0;
        if pair_gap <= tol {
            if minima.len() > 2 && minima[2].value - v0 <= tol {
                return Err(Error::Computation(format!(
                    "ambiguous landscape: {} minima degenerate within tolerance",
                    global_minima.len()
                )));
            }
            Regime::SymmetricDoubleWell
        } else {
            // The two lowest form a double well only when the rest of the
            // spectrum of minima sits far above the pair's own splitting.
            let rest_gap = if minima.len() > 2 {
                minima[2].value - minima[1].value
            } else {
                f64::INFINITY
            };
            if rest_gap > 10.0 * pair_gap {
                Regime::AsymmetricDoubleWell
            } else {
                Regime::SingleGlobalWell
            }
        }
    };

    let barrier = match regime {
        Regime::SymmetricDoubleWell | Regime::AsymmetricDoubleWell => {
            Some(barrier_between(params, dq, consts, &minima[0], &minima[1])?)
        }
        _ => None,
    };

    Ok(LandscapeClass { regime, global_minima, minima, barrier })
}

/// Locates the saddle between two wells and returns it with the barrier
/// height V(saddle) − max(V(left), V(right)).
///
/// Newton iteration converges to whatever stationary point is nearest, so the
/// search seeds at the midpoint first, then walks a fallback ladder of seeds
/// along the straight segment, accepting the first refined point with saddle
/// signature that lies strictly above both wells.
pub fn barrier_between(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    left: &StationaryPoint,
    right: &StationaryPoint,
) -> Result<BarrierInfo> {
    let phi0 = consts.flux_quantum;
    let same_phi = (left.location.phi - right.location.phi).abs() < 1e-6 * phi0;
    let same_theta = (left.location.theta - right.location.theta).abs() < 1e-6;
    if same_phi && same_theta {
        return Err(Error::InvalidParameter(
            "barrier endpoints must be distinct minima".into(),
        ));
    }
    let mut fractions = vec![0.5];
    for k in 1..=4 {
        let off = 0.1 * k as f64;
        fractions.push(0.5 - off);
        fractions.push(0.5 + off);
    }
    let v_floor = left.value.max(right.value);
    for t in fractions {
        let seed = LandscapePoint {
            phi: left.location.phi + t * (right.location.phi - left.location.phi),
            theta: left.location.theta + t * (right.location.theta - left.location.theta),
        };
        let Ok(sp) = refine_stationary(seed, left.n_index, left.branch, params, dq, consts)
        else {
            continue;
        };
        if sp.kind == PointKind::Saddle && sp.value > v_floor {
            return Ok(BarrierInfo { saddle: sp, height: sp.value - v_floor });
        }
    }
    Err(Error::Computation(
        "no saddle found between the given minima".into(),
    ))
}

/// Samples V/h (Hz) on a uniform grid, endpoints inclusive, and attaches a
/// suggested contour interval (max−min)/n_levels.
pub fn export_grid(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    window: GridWindow,
    n_phi: usize,
    n_theta: usize,
    n_levels: usize,
) -> Result<PotentialGrid> {
    if n_phi < 2 || n_theta < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be at least 2 per axis, got {n_phi}×{n_theta}"
        )));
    }
    if !(window.phi_max > window.phi_min) || !(window.theta_max > window.theta_min) {
        return Err(Error::InvalidParameter("degenerate grid window".into()));
    }
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be positive".into()));
    }
    let phi_axis: Vec<f64> = (0..n_phi)
        .map(|i| {
            window.phi_min
                + (window.phi_max - window.phi_min) * i as f64 / (n_phi - 1) as f64
        })
        .collect();
    let theta_axis: Vec<f64> = (0..n_theta)
        .map(|j| {
            window.theta_min
                + (window.theta_max - window.theta_min) * j as f64 / (n_theta - 1) as f64
        })
        .collect();
    let mut values = Vec::with_capacity(n_phi * n_theta);
    for &phi in &phi_axis {
        for &theta in &theta_axis {
            let v = potential(&LandscapePoint { phi, theta }, params, dq, consts);
            values.push(v / consts.h);
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(PotentialGrid {
        phi_axis,
        theta_axis,
        values,
        metadata: GridMetadata {
            params: *params,
            window,
            contour_interval_hz: (hi - lo) / n_levels as f64,
            n_levels,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive, DeviceParams, PhysicalConstants};
    use approx::assert_relative_eq;

    fn setup() -> (DeviceParams, DerivedQuantities, PhysicalConstants) {
        let p = DeviceParams::example_device();
        let c = PhysicalConstants::codata2018();
        let d = derive(&p, &c).unwrap();
        (p, d, c)
    }

    #[test]
    fn standalone_qubit_potential_closed_forms() {
        let (_, d, c) = setup();
        let l = 100e-12;
        let v0 = flux_qubit_potential(
            &FluxQubitPotentialInput { phi: 0.0, phi_a: 0.0 },
            &d,
            l,
            &c,
        )
        .unwrap();
        assert_eq!(v0, 0.0);

        let half = c.flux_quantum / 2.0;
        let v_half = flux_qubit_potential(
            &FluxQubitPotentialInput { phi: half, phi_a: half },
            &d,
            l,
            &c,
        )
        .unwrap();
        assert_relative_eq!(v_half, 2.0 * d.e_j, epsilon = 0.0, max_relative = 1e-14);

        assert!(flux_qubit_potential(
            &FluxQubitPotentialInput { phi: 0.0, phi_a: 0.0 },
            &d,
            -1.0,
            &c
        )
        .is_err());
    }

    #[test]
    fn standalone_qubit_half_quantum_bias_is_symmetric_double_well() {
        let (_, d, c) = setup();
        let l = 100e-12;
        let half = c.flux_quantum / 2.0;
        for k in 0..50 {
            let x = (k as f64 / 49.0 - 0.5) * c.flux_quantum;
            let a = flux_qubit_potential(
                &FluxQubitPotentialInput { phi: half + x, phi_a: half },
                &d,
                l,
                &c,
            )
            .unwrap();
            let b = flux_qubit_potential(
                &FluxQubitPotentialInput { phi: half - x, phi_a: half },
                &d,
                l,
                &c,
            )
            .unwrap();
            assert_relative_eq!(a, b, epsilon = 0.0, max_relative = 1e-12);
        }
        // beta_L > 1 here, so the biased qubit really is a double well: the
        // bias point is a local maximum flanked by two minima.
        let at = |phi: f64| {
            flux_qubit_potential(
                &FluxQubitPotentialInput { phi, phi_a: half },
                &d,
                l,
                &c,
            )
            .unwrap()
        };
        let eps = 1e-3 * c.flux_quantum;
        assert!(at(half + eps) < at(half));
        assert!(at(half - eps) < at(half));
    }

    #[test]
    fn potential_vanishes_at_analytic_minimum() {
        let (mut p, _, c) = setup();
        // Pick n = 3 and put theta_0 exactly on the well angle so all three
        // terms vanish there.
        let d0 = derive(&p, &c).unwrap();
        let n = 3.0;
        let theta_n = (n * c.flux_quantum / d0.flux_scale).acos();
        p.theta_0 = theta_n;
        let d = derive(&p, &c).unwrap();
        let v = potential(
            &LandscapePoint { phi: n * c.flux_quantum, theta: theta_n },
            &p,
            &d,
            &c,
        );
        assert!(v.abs() < 1e-12 * d.e_j, "V = {v:e} J at the analytic minimum");
    }

    #[test]
    fn potential_no_field_closed_form() {
        let (mut p, _, c) = setup();
        p.b_x = 0.0;
        let d = derive(&p, &c).unwrap();
        let v = potential(
            &LandscapePoint { phi: c.flux_quantum / 2.0, theta: p.theta_0 },
            &p,
            &d,
            &c,
        );
        let expect = c.flux_quantum * c.flux_quantum / (8.0 * p.inductance) + 2.0 * d.e_j;
        assert_relative_eq!(v, expect, epsilon = 0.0, max_relative = 1e-14);
    }

    #[test]
    fn gradient_zero_at_analytic_minimum_and_decoupled_theta() {
        let (mut p, _, c) = setup();
        let d0 = derive(&p, &c).unwrap();
        let theta_1 = (c.flux_quantum / d0.flux_scale).acos();
        p.theta_0 = theta_1;
        let d = derive(&p, &c).unwrap();
        let g = gradient(
            &LandscapePoint { phi: c.flux_quantum, theta: theta_1 },
            &p,
            &d,
            &c,
        );
        // Gate sits above the f64 floor: cos(acos(x)) round-trips with error
        // ~sin(theta)*ulp(theta), which feeds the residual inductive force.
        assert!((g.x * c.flux_quantum / d.e_j).abs() < 1e-8);
        assert!((g.y / d.e_j).abs() < 1e-8);

        // B_x = 0 and omega_i = 0: theta force vanishes identically.
        let mut q = DeviceParams::example_device();
        q.b_x = 0.0;
        q.omega_i = 0.0;
        let dq = derive(&q, &c).unwrap();
        for k in 0..20 {
            let g = gradient(
                &LandscapePoint {
                    phi: c.flux_quantum / 4.0,
                    theta: -3.0 + 0.3 * k as f64,
                },
                &q,
                &dq,
                &c,
            );
            assert_eq!(g.y, 0.0);
        }
    }

    #[test]
    fn hessian_closed_form_at_analytic_minimum() {
        let (p, d, c) = setup();
        let phi0 = c.flux_quantum;
        for n in [0i64, 2, -5, 100] {
            let x = n as f64 * phi0 / d.flux_scale;
            let theta = x.acos();
            let h = hessian(
                &LandscapePoint { phi: n as f64 * phi0, theta },
                &p,
                &d,
                &c,
            );
            let h_pp = 1.0 / p.inductance + 4.0 * PI * PI * d.e_j / (phi0 * phi0);
            let cross = (d.flux_scale * d.flux_scale
                - (n as f64 * phi0) * (n as f64 * phi0))
                .sqrt()
                / p.inductance;
            let h_tt = (d.flux_scale * d.flux_scale - (n as f64 * phi0) * (n as f64 * phi0))
                / p.inductance
                + p.moment_of_inertia * p.omega_i * p.omega_i;
            assert_relative_eq!(h[(0, 0)], h_pp, epsilon = 0.0, max_relative = 1e-12);
            assert_relative_eq!(h[(0, 1)], cross, epsilon = 0.0, max_relative = 1e-9);
            assert_relative_eq!(h[(1, 1)], h_tt, epsilon = 0.0, max_relative = 1e-9);
            assert_eq!(h[(0, 1)], h[(1, 0)]);
        }
    }

    #[test]
    fn hessian_cross_term_vanishes_without_field() {
        let (mut p, _, c) = setup();
        p.b_x = 0.0;
        let d = derive(&p, &c).unwrap();
        let h = hessian(&LandscapePoint { phi: 1e-16, theta: 0.7 }, &p, &d, &c);
        assert_eq!(h[(0, 1)], 0.0);
    }

    #[test]
    fn enumeration_counts_wells_without_intrinsic_stiffness() {
        let (mut p, _, c) = setup();
        p.omega_i = 0.0;
        let d = derive(&p, &c).unwrap();
        let e = enumerate_candidate_minima(&p, &d, &c).unwrap();
        assert!(e.warnings.is_empty(), "{:?}", e.warnings);
        let minima = e.points.iter().filter(|q| q.kind == PointKind::Minimum).count();
        assert_eq!(minima, 2 * (2 * d.m_max as usize + 1));
        assert_eq!(e.points.len(), minima);
        // Every well of the lattice is exactly degenerate at V = 0.
        for q in &e.points {
            assert!(q.value.abs() < 1e-9 * d.e_j);
        }
    }

    #[test]
    fn enumeration_single_index_below_one_quantum() {
        let (mut p, _, c) = setup();
        p.omega_i = 0.0;
        // Field small enough that only n = 0 has a real well angle.
        p.b_x = 0.5 * c.flux_quantum / p.area();
        let d = derive(&p, &c).unwrap();
        assert_eq!(d.m_max, 0);
        let e = enumerate_candidate_minima(&p, &d, &c).unwrap();
        assert_eq!(e.points.len(), 2);
        for q in &e.points {
            assert!(q.kind == PointKind::Minimum);
            assert!(q.location.phi.abs() < 1e-9 * c.flux_quantum);
            assert_relative_eq!(
                q.location.theta.abs(),
                std::f64::consts::FRAC_PI_2,
                epsilon = 0.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn fig_window_has_global_minimum_and_two_neighbors() {
        let (p, d, c) = setup();
        let e = enumerate_candidate_minima(&p, &d, &c).unwrap();
        let phi0 = c.flux_quantum;
        let in_window: Vec<&StationaryPoint> = e
            .points
            .iter()
            .filter(|q| {
                q.kind == PointKind::Minimum
                    && q.location.phi.abs() < 1.5 * phi0
                    && (q.location.theta - std::f64::consts::FRAC_PI_2).abs() < 0.01
            })
            .collect();
        assert_eq!(in_window.len(), 3);
        let global = in_window.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
        assert!(global.location.phi.abs() < 1e-9 * phi0);
        assert_relative_eq!(
            global.location.theta,
            std::f64::consts::FRAC_PI_2,
            epsilon = 0.0,
            max_relative = 1e-12
        );
        assert!(global.value.abs() < 1e-9 * d.e_j);
        for q in &in_window {
            if q.n_index != 0 {
                assert!(q.value > d.e_j, "side well V = {:e}", q.value);
            }
        }
    }

    #[test]
    fn classify_single_global_well() {
        let (p, d, c) = setup();
        let lc = classify_landscape(&p, &d, &c).unwrap();
        assert_eq!(lc.regime, Regime::SingleGlobalWell);
        assert_eq!(lc.global_minima.len(), 1);
        assert!(lc.barrier.is_none());
    }

    #[test]
    fn classify_lattice_at_zero_stiffness() {
        let (mut p, _, c) = setup();
        p.omega_i = 0.0;
        let d = derive(&p, &c).unwrap();
        let lc = classify_landscape(&p, &d, &c).unwrap();
        assert_eq!(lc.regime, Regime::MultiWellLattice);
        assert_eq!(lc.global_minima.len(), lc.minima.len());
    }

    #[test]
    fn classify_double_well_confirms_two_wells_and_barrier() {
        let (mut p, _, c) = setup();
        let d0 = derive(&p, &c).unwrap();
        p.theta_0 = (c.flux_quantum / (2.0 * d0.flux_scale)).acos();
        let d = derive(&p, &c).unwrap();
        let lc = classify_landscape(&p, &d, &c).unwrap();
        assert!(
            lc.regime == Regime::SymmetricDoubleWell
                || lc.regime == Regime::AsymmetricDoubleWell
        );
        let b = lc.barrier.expect("double well must carry a barrier");
        assert!(b.height > 0.0);
        assert!(b.height < 2.0 * d.e_j);
        assert_eq!(b.saddle.kind, PointKind::Saddle);
        // Wells straddle the saddle in phi.
        let s = b.saddle.location.phi;
        assert!(
            (lc.minima[0].location.phi - s).signum()
                != (lc.minima[1].location.phi - s).signum()
        );
    }

    #[test]
    fn barrier_decreases_with_intrinsic_frequency() {
        let c = PhysicalConstants::codata2018();
        let mut heights = Vec::new();
        for f in [12_000.0, 24_000.0] {
            let mut p = DeviceParams::example_device();
            p.omega_i = 2.0 * PI * f;
            let d0 = derive(&p, &c).unwrap();
            p.theta_0 = (c.flux_quantum / (2.0 * d0.flux_scale)).acos();
            let d = derive(&p, &c).unwrap();
            let lc = classify_landscape(&p, &d, &c).unwrap();
            heights.push(lc.barrier.unwrap().height);
        }
        assert!(
            heights[1] < heights[0],
            "barrier must drop as omega_i rises: {heights:?}"
        );
    }

    #[test]
    fn barrier_rejects_identical_endpoints() {
        let (p, d, c) = setup();
        let e = enumerate_candidate_minima(&p, &d, &c).unwrap();
        let m = e.points.iter().find(|q| q.kind == PointKind::Minimum).unwrap();
        assert!(barrier_between(&p, &d, &c, m, m).is_err());
    }

    #[test]
    fn grid_export_shape_and_contour_hint() {
        let (p, d, c) = setup();
        let phi0 = c.flux_quantum;
        let w = GridWindow {
            phi_min: -1.05 * phi0,
            phi_max: 1.05 * phi0,
            theta_min: std::f64::consts::FRAC_PI_2 - 2.2e-3,
            theta_max: std::f64::consts::FRAC_PI_2 + 2.2e-3,
        };
        let g = export_grid(&p, &d, &c, w, 41, 31, 33).unwrap();
        assert_eq!(g.phi_axis.len(), 41);
        assert_eq!(g.theta_axis.len(), 31);
        assert_eq!(g.values.len(), 41 * 31);
        assert_eq!(g.phi_axis[0], w.phi_min);
        assert_eq!(*g.phi_axis.last().unwrap(), w.phi_max);
        let lo = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(lo >= 0.0);
        assert!(lo < 1e-3 * d.e_j / c.h);
        assert!(g.metadata.contour_interval_hz > 0.0);

        assert!(export_grid(&p, &d, &c, w, 1, 31, 33).is_err());
        let mut degenerate = w;
        degenerate.phi_max = w.phi_min;
        assert!(export_grid(&p, &d, &c, degenerate, 4, 4, 33).is_err());
    }

    #[test]
    fn grid_constant_region_all_equal() {
        let (mut p, _, c) = setup();
        p.b_x = 0.0;
        p.omega_i = 0.0;
        let d = derive(&p, &c).unwrap();
        // Without field or stiffness V is even in phi and independent of
        // theta, so a symmetric 2x2 window samples one value four times.
        let a = 0.3 * c.flux_quantum;
        let w = GridWindow { phi_min: -a, phi_max: a, theta_min: 0.1, theta_max: 0.9 };
        let g = export_grid(&p, &d, &c, w, 2, 2, 10).unwrap();
        for &v in &g.values {
            assert_relative_eq!(v, g.values[0], epsilon = 0.0, max_relative = 1e-14);
        }
    }
}
