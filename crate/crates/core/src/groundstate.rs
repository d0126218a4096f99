//! Analytic Gaussian ground state of one well, in both the decoupled (X, Y)
//! basis and the physical (φ, δ) basis, plus separability and entanglement
//! measures.
//!
//! In the (X, Y) basis the state is a product of two oscillator Gaussians.
//! Rotating back to (φ, δ) mixes them into exp(−a_φφφ² − a_δδδ² − a_φδφδ);
//! a nonzero cross coefficient makes the state non-separable. Entanglement is
//! quantified through the Schmidt spectrum of the correlated Gaussian, which
//! is geometric with a ratio fixed by the dimensionless correlation
//! r = a_φδ / (2√(a_φφ·a_δδ)); local rescalings of either coordinate leave r,
//! and hence the entropy, unchanged.

use serde::{Deserialize, Serialize};

use crate::harmonic::HarmonicModes;
use crate::model::{DeviceParams, PhysicalConstants};
use crate::{Error, Result};

/// Correlations below this are treated as exactly separable.
pub const SEPARABILITY_TOL: f64 = 1e-12;

/// Product-Gaussian ground state in the decoupled basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyGroundState {
    pub modes: HarmonicModes,
    hbar: f64,
}

impl XyGroundState {
    /// Ψ(X, Y), with X and Y in the mass-scaled normal coordinates.
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let m = &self.modes;
        let norm = (m.mu * m.mu * m.omega_x * m.omega_y
            / (std::f64::consts::PI * std::f64::consts::PI * self.hbar * self.hbar))
            .powf(0.25);
        norm * (-(m.mu * (m.omega_x * x * x + m.omega_y * y * y)) / (2.0 * self.hbar)).exp()
    }

    /// Ground-state width √(ħ/2μω_X) of the X marginal.
    pub fn sigma_x(&self) -> f64 {
        (self.hbar / (2.0 * self.modes.mu * self.modes.omega_x)).sqrt()
    }

    pub fn sigma_y(&self) -> f64 {
        (self.hbar / (2.0 * self.modes.mu * self.modes.omega_y)).sqrt()
    }
}

/// Correlated Gaussian ground state in the physical (φ, δ) offsets from the
/// well center: Ψ = norm · exp(−a_φφφ² − a_δδδ² − a_φδφδ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianGroundState {
    /// Wb⁻².
    pub a_phiphi: f64,
    /// rad⁻².
    pub a_deltadelta: f64,
    /// Wb⁻¹·rad⁻¹.
    pub a_phidelta: f64,
    pub norm: f64,
    pub modes: HarmonicModes,
}

/// Separability verdict and entanglement measures of a ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub separable: bool,
    /// The exponent cross coefficient a_φδ (Wb⁻¹·rad⁻¹).
    pub cross_coefficient: f64,
    /// Geometric ratio w of the Schmidt spectrum λ_k = (1−w)wᵏ, in [0, 1).
    pub schmidt_parameter: f64,
    /// Entanglement entropy −Σ λ_k ln λ_k (nats).
    pub entropy: f64,
}

/// Ground state of the decoupled oscillators.
pub fn ground_state_xy(modes: &HarmonicModes, consts: &PhysicalConstants) -> XyGroundState {
    XyGroundState { modes: *modes, hbar: consts.hbar }
}

/// Ground state in the physical basis, from the posted closed forms.
pub fn ground_state_phidelta(
    modes: &HarmonicModes,
    params: &DeviceParams,
    consts: &PhysicalConstants,
) -> Result<GaussianGroundState> {
    let mu = (params.capacitance * params.moment_of_inertia).sqrt();
    if !((mu - modes.mu).abs() <= 1e-12 * modes.mu) {
        return Err(Error::InvalidParameter(
            "modes were derived for a different device".into(),
        ));
    }
    let hbar = consts.hbar;
    let (s, c) = modes.beta.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let cap = params.capacitance;
    let im = params.moment_of_inertia;
    Ok(GaussianGroundState {
        a_phiphi: cap * (modes.omega_x * c2 + modes.omega_y * s2) / (2.0 * hbar),
        a_deltadelta: im * (modes.omega_x * s2 + modes.omega_y * c2) / (2.0 * hbar),
        a_phidelta: (cap * im).sqrt() * (modes.omega_x - modes.omega_y) * (2.0 * modes.beta).sin()
            / (2.0 * hbar),
        norm: (cap * im * modes.omega_x * modes.omega_y
            / (std::f64::consts::PI * std::f64::consts::PI * hbar * hbar))
            .powf(0.25),
        modes: *modes,
    })
}

impl GaussianGroundState {
    /// Ψ(φ, δ) for offsets from the well center.
    pub fn evaluate(&self, phi: f64, delta: f64) -> f64 {
        self.norm
            * (-(self.a_phiphi * phi * phi
                + self.a_deltadelta * delta * delta
                + self.a_phidelta * phi * delta))
                .exp()
    }

    /// Dimensionless correlation r = a_φδ / (2√(a_φφ·a_δδ)), in (−1, 1) for
    /// a normalizable state.
    pub fn correlation(&self) -> f64 {
        self.a_phidelta / (2.0 * (self.a_phiphi * self.a_deltadelta).sqrt())
    }

    /// ⟨φ²⟩ of the marginal flux distribution.
    pub fn marginal_variance_phi(&self) -> f64 {
        self.a_deltadelta / self.exponent_determinant()
    }

    /// ⟨δ²⟩ of the marginal deflection distribution.
    pub fn marginal_variance_delta(&self) -> f64 {
        self.a_phiphi / self.exponent_determinant()
    }

    fn exponent_determinant(&self) -> f64 {
        4.0 * self.a_phiphi * self.a_deltadelta - self.a_phidelta * self.a_phidelta
    }
}

/// Maps physical offsets to the mass-scaled normal coordinates:
/// X = √(C/μ)·φ·cosβ + √(I_m/μ)·δ·sinβ and Y the orthogonal combination.
pub fn to_normal_coordinates(
    modes: &HarmonicModes,
    params: &DeviceParams,
    phi: f64,
    delta: f64,
) -> (f64, f64) {
    let fp = (params.capacitance / modes.mu).sqrt() * phi;
    let fd = (params.moment_of_inertia / modes.mu).sqrt() * delta;
    let (s, c) = modes.beta.sin_cos();
    (c * fp + s * fd, -s * fp + c * fd)
}

/// True when the cross term is negligible at the given dimensionless
/// tolerance on the correlation r.
pub fn separability_check(state: &GaussianGroundState, tol: f64) -> bool {
    state.correlation().abs() < tol
}

/// Schmidt spectrum and entanglement entropy of the correlated Gaussian.
///
/// With r the dimensionless correlation, the spectrum is geometric,
/// λ_k = (1−w)wᵏ, where w = [(1−√(1−r²))/|r|]²; the equivalent form below in
/// r̃ = r²/(2−r²) avoids the 0/0 at r = 0.
pub fn entanglement_entropy(state: &GaussianGroundState) -> Result<EntanglementReport> {
    if !(state.a_phiphi > 0.0
        && state.a_deltadelta > 0.0
        && state.exponent_determinant() > 0.0)
    {
        return Err(Error::InvalidParameter(
            "exponent quadratic form is not positive definite".into(),
        ));
    }
    let r = state.correlation();
    let rt = r * r / (2.0 - r * r);
    let w = if rt > 0.0 { (1.0 - (1.0 - rt * rt).sqrt()) / rt } else { 0.0 };
    let entropy = if w > 0.0 {
        -(1.0 - w).ln() - w * w.ln() / (1.0 - w)
    } else {
        0.0
    };
    Ok(EntanglementReport {
        separable: r.abs() < SEPARABILITY_TOL,
        cross_coefficient: state.a_phidelta,
        schmidt_parameter: w,
        entropy,
    })
}

/// Rectangular sampling window in local (φ, δ) offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalWindow {
    pub phi_min: f64,
    pub phi_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
}

/// Sampled Ψ and |Ψ|², row-major with φ as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionGrid {
    pub phi_axis: Vec<f64>,
    pub delta_axis: Vec<f64>,
    pub psi: Vec<f64>,
    pub abs_psi_sq: Vec<f64>,
}

impl WavefunctionGrid {
    pub fn psi_at(&self, i_phi: usize, j_delta: usize) -> f64 {
        self.psi[i_phi * self.delta_axis.len() + j_delta]
    }

    pub fn density_at(&self, i_phi: usize, j_delta: usize) -> f64 {
        self.abs_psi_sq[i_phi * self.delta_axis.len() + j_delta]
    }
}

/// Uniform sampling of the state over the window, endpoints included.
pub fn wavefunction_grid(
    state: &GaussianGroundState,
    window: &LocalWindow,
    n_phi: usize,
    n_delta: usize,
) -> Result<WavefunctionGrid> {
    if n_phi < 2 || n_delta < 2 {
        return Err(Error::InvalidParameter(
            "wavefunction grid needs at least 2 samples per axis".into(),
        ));
    }
    if !(window.phi_max > window.phi_min && window.delta_max > window.delta_min)
        || !(window.phi_min.is_finite()
            && window.phi_max.is_finite()
            && window.delta_min.is_finite()
            && window.delta_max.is_finite())
    {
        return Err(Error::InvalidParameter("degenerate wavefunction window".into()));
    }
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let phi_axis = axis(window.phi_min, window.phi_max, n_phi);
    let delta_axis = axis(window.delta_min, window.delta_max, n_delta);
    let mut psi = Vec::with_capacity(n_phi * n_delta);
    let mut abs_psi_sq = Vec::with_capacity(n_phi * n_delta);
    for &p in &phi_axis {
        for &d in &delta_axis {
            let v = state.evaluate(p, d);
            psi.push(v);
            abs_psi_sq.push(v * v);
        }
    }
    Ok(WavefunctionGrid { phi_axis, delta_axis, psi, abs_psi_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::mode_frequencies;
    use crate::model::{derive, DeviceParams, PhysicalConstants};
    use crate::potential::{classify_landscape, Branch};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_state() -> (DeviceParams, PhysicalConstants, HarmonicModes, GaussianGroundState) {
        let p = DeviceParams::example_device();
        let c = PhysicalConstants::codata2018();
        let d = derive(&p, &c).unwrap();
        let lc = classify_landscape(&p, &d, &c).unwrap();
        let m = mode_frequencies(&lc.global_minima[0], &p, &d, &c).unwrap();
        let g = ground_state_phidelta(&m, &p, &c).unwrap();
        (p, c, m, g)
    }

    #[test]
    fn bases_agree_pointwise() {
        let (p, c, m, g) = example_state();
        let xy = ground_state_xy(&m, &c);
        let sp = g.marginal_variance_phi().sqrt();
        let sd = g.marginal_variance_delta().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        for _ in 0..100 {
            let phi = rng.gen_range(-4.0..4.0) * sp;
            let delta = rng.gen_range(-4.0..4.0) * sd;
            let (x, y) = to_normal_coordinates(&m, &p, phi, delta);
            let a = xy.evaluate(x, y);
            let b = g.evaluate(phi, delta);
            assert_relative_eq!(a, b, epsilon = 0.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn example_device_state_is_entangled() {
        let (_, _, _, g) = example_state();
        assert!(g.a_phidelta != 0.0);
        assert!(!separability_check(&g, SEPARABILITY_TOL));
        let rep = entanglement_entropy(&g).unwrap();
        assert!(!rep.separable);
        assert!(rep.entropy > 0.0);
        assert!(rep.schmidt_parameter > 0.0 && rep.schmidt_parameter < 1.0);
        // Weakly correlated device: r ~ 3e-4, so the entropy is small.
        assert!(rep.entropy < 1e-4, "entropy {}", rep.entropy);
    }

    #[test]
    fn no_coupling_separates_exactly() {
        let c = PhysicalConstants::codata2018();
        let mut p = DeviceParams::example_device();
        p.b_x = 0.0;
        p.theta_0 = 0.7;
        let d = derive(&p, &c).unwrap();
        let wells = crate::potential::enumerate_candidate_minima(&p, &d, &c).unwrap();
        let m = mode_frequencies(&wells.points[0], &p, &d, &c).unwrap();
        let g = ground_state_phidelta(&m, &p, &c).unwrap();
        assert_eq!(g.a_phidelta, 0.0);
        assert!(separability_check(&g, SEPARABILITY_TOL));
        let rep = entanglement_entropy(&g).unwrap();
        assert!(rep.separable);
        assert_eq!(rep.entropy, 0.0);
        assert_eq!(rep.schmidt_parameter, 0.0);
    }

    #[test]
    fn branch_flip_negates_cross_term_only() {
        let c = PhysicalConstants::codata2018();
        let mut p = DeviceParams::example_device();
        p.omega_i = 0.0;
        let d = derive(&p, &c).unwrap();
        let e = crate::potential::enumerate_candidate_minima(&p, &d, &c).unwrap();
        let plus = e.points.iter().find(|w| w.n_index == 3 && w.branch == Branch::Plus).unwrap();
        let minus = e.points.iter().find(|w| w.n_index == 3 && w.branch == Branch::Minus).unwrap();
        let gp =
            ground_state_phidelta(&mode_frequencies(plus, &p, &d, &c).unwrap(), &p, &c).unwrap();
        let gm =
            ground_state_phidelta(&mode_frequencies(minus, &p, &d, &c).unwrap(), &p, &c).unwrap();
        assert_eq!(gp.a_phidelta, -gm.a_phidelta);
        assert!(gp.a_phidelta != 0.0);
        assert_eq!(gp.a_phiphi, gm.a_phiphi);
        assert_eq!(gp.a_deltadelta, gm.a_deltadelta);
        assert_eq!(gp.norm, gm.norm);
        let (ep, em) =
            (entanglement_entropy(&gp).unwrap(), entanglement_entropy(&gm).unwrap());
        assert_eq!(ep.entropy, em.entropy);
    }

    #[test]
    fn entropy_zero_iff_modes_degenerate_or_unrotated() {
        let (_, _, m, g) = example_state();
        // Hand-degenerate copy: omega_x == omega_y kills the cross term even
        // at nonzero beta.
        let mut dm = m;
        dm.omega_y = dm.omega_x;
        let p = DeviceParams::example_device();
        let c = PhysicalConstants::codata2018();
        let dg = ground_state_phidelta(&dm, &p, &c).unwrap();
        assert_eq!(dg.a_phidelta, 0.0);
        assert_eq!(entanglement_entropy(&dg).unwrap().entropy, 0.0);
        assert!(entanglement_entropy(&g).unwrap().entropy > 0.0);
    }

    #[test]
    fn hand_scaled_cross_term_reads_separable() {
        let (_, _, _, g) = example_state();
        let mut tiny = g;
        tiny.a_phidelta *= 1e-20;
        assert!(separability_check(&tiny, SEPARABILITY_TOL));
        assert!(entanglement_entropy(&tiny).unwrap().separable);
    }

    #[test]
    fn non_positive_definite_exponent_rejected() {
        let (_, _, _, g) = example_state();
        let mut bad = g;
        bad.a_phidelta = 3.0 * (bad.a_phiphi * bad.a_deltadelta).sqrt();
        assert!(entanglement_entropy(&bad).is_err());
        bad = g;
        bad.a_phiphi = -bad.a_phiphi;
        assert!(entanglement_entropy(&bad).is_err());
    }

    #[test]
    fn grid_peaks_at_origin_and_orients_with_cross_sign() {
        let (_, _, _, g) = example_state();
        let sp = g.marginal_variance_phi().sqrt();
        let sd = g.marginal_variance_delta().sqrt();
        let window = LocalWindow {
            phi_min: -3.0 * sp,
            phi_max: 3.0 * sp,
            delta_min: -3.0 * sd,
            delta_max: 3.0 * sd,
        };
        let grid = wavefunction_grid(&g, &window, 61, 61).unwrap();
        let peak = grid.density_at(30, 30);
        assert!(grid.abs_psi_sq.iter().all(|&v| v <= peak));
        // Plus-branch example state has a_phidelta > 0: density is depleted
        // along the ++ diagonal relative to the +- one.
        assert!(g.a_phidelta > 0.0);
        assert!(grid.density_at(45, 45) < grid.density_at(45, 15));
        let mut flipped = g;
        flipped.a_phidelta = -g.a_phidelta;
        let fgrid = wavefunction_grid(&flipped, &window, 61, 61).unwrap();
        assert!(fgrid.density_at(45, 45) > fgrid.density_at(45, 15));
    }

    #[test]
    fn degenerate_windows_and_resolutions_rejected() {
        let (_, _, _, g) = example_state();
        let w = LocalWindow { phi_min: 0.0, phi_max: 0.0, delta_min: -1.0, delta_max: 1.0 };
        assert!(wavefunction_grid(&g, &w, 8, 8).is_err());
        let w2 = LocalWindow { phi_min: -1.0, phi_max: 1.0, delta_min: -1.0, delta_max: 1.0 };
        assert!(wavefunction_grid(&g, &w2, 1, 8).is_err());
        let w3 = LocalWindow { phi_min: -1.0, phi_max: f64::INFINITY, delta_min: -1.0, delta_max: 1.0 };
        assert!(wavefunction_grid(&g, &w3, 8, 8).is_err());
    }

    #[test]
    fn mismatched_device_rejected() {
        let (_, c, m, _) = example_state();
        let mut other = DeviceParams::example_device();
        other.capacitance *= 2.0;
        assert!(ground_state_phidelta(&m, &other, &c).is_err());
    }

    #[test]
    fn symmetric_profile_when_modes_degenerate() {
        let (_, c, m, _) = example_state();
        let mut dm = m;
        dm.omega_y = dm.omega_x;
        let xy = ground_state_xy(&dm, &c);
        let s = xy.sigma_x();
        for (a, b) in [(0.3, 1.1), (-0.7, 0.2), (1.9, -2.4)] {
            assert_eq!(xy.evaluate(a * s, b * s), xy.evaluate(b * s, a * s));
        }
    }

    #[test]
    fn exponent_positive_definite_over_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        let c = PhysicalConstants::codata2018();
        for i in 0..1000 {
            let mu = 10f64.powf(rng.gen_range(-26.0..-18.0));
            let omega_y = 10f64.powf(rng.gen_range(3.0..10.0));
            let omega_x = omega_y * 10f64.powf(rng.gen_range(0.0..2.0));
            let beta = rng.gen_range(-0.78..0.78);
            let m = synthetic_modes(mu, omega_x, omega_y, beta);
            let mut p = DeviceParams::example_device();
            p.capacitance = 10f64.powf(rng.gen_range(-14.0..-12.0));
            p.moment_of_inertia = mu * mu / p.capacitance;
            let g = ground_state_phidelta(&m, &p, &c).unwrap();
            assert!(g.a_phiphi > 0.0, "draw {i}");
            assert!(g.a_deltadelta > 0.0, "draw {i}");
            assert!(
                g.a_phiphi * g.a_deltadelta > 0.25 * g.a_phidelta * g.a_phidelta,
                "draw {i}: not positive definite"
            );
            let rep = entanglement_entropy(&g).unwrap();
            assert!(rep.schmidt_parameter >= 0.0 && rep.schmidt_parameter < 1.0, "draw {i}");
            assert!(rep.entropy >= 0.0, "draw {i}");
        }
    }

    /// Modes with the given decoupled data and the bare quantities
    /// reconstructed through the inverse rotation, so the struct is
    /// self-consistent.
    pub(super) fn synthetic_modes(mu: f64, omega_x: f64, omega_y: f64, beta: f64) -> HarmonicModes {
        let (x2, y2) = (omega_x * omega_x, omega_y * omega_y);
        let (s, c) = beta.sin_cos();
        HarmonicModes {
            omega_phi: (x2 * c * c + y2 * s * s).sqrt(),
            omega_delta: (x2 * s * s + y2 * c * c).sqrt(),
            kappa: 0.5 * mu * (x2 - y2) * (2.0 * beta).sin(),
            mu,
            beta,
            omega_x,
            omega_y,
            branch_sign: if beta >= 0.0 { 1.0 } else { -1.0 },
        }
    }
}
