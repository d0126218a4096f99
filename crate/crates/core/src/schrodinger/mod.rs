//! Finite-difference Schrödinger solver on the (Φ, θ) plane, used as an
//! independent check on the harmonic/Gaussian layer. The Hamiltonian is
//! discretized with the 5-point stencil on a uniform rectangular grid with
//! Dirichlet walls, stored matrix-free, and diagonalized iteratively for the
//! lowest few states.
//!
//! Everything internal runs in scaled units (coordinates divided by
//! `ScaleFactors::{phi, theta}`, energies by `ScaleFactors::energy`) so the
//! operator entries are O(1) regardless of the SI magnitudes; results are
//! converted back to joules and to wavefunctions normalized against the
//! physical cell measure h_Φ·h_θ.

mod solver;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::groundstate::ground_state_phidelta;
use crate::harmonic::mode_frequencies;
use crate::model::{DerivedQuantities, DeviceParams, PhysicalConstants};
use crate::potential::{
    classify_landscape, gradient, hessian, potential, GridWindow, LandscapePoint, Regime,
};
use crate::{Error, Result};
use solver::SymmetricOperator;

/// Seed for `solve_lowest`; reruns are bitwise reproducible.
pub const DEFAULT_SEED: u64 = 0x5eed_e16e;

/// Cap on the Lanczos basis footprint.
const BASIS_MEMORY_BYTES: usize = 512 << 20;
const MAX_KRYLOV_DIM: usize = 900;

/// Probability fraction allowed within `BOUNDARY_MARGIN_CELLS` of the walls.
const BOUNDARY_MASS_LIMIT: f64 = 1e-6;
const BOUNDARY_MARGIN_CELLS: usize = 3;

/// Natural-unit conversion used inside the discretization. Coordinate
/// factors cancel identically in the assembled stencil (a hop is
/// ħ²/(2m s² (h/s)²) = ħ²/(2m h²)), so only `energy` affects the floating
/// point conditioning; all three are kept so callers can state the units
/// they reason in and verify the advertised invariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactors {
    /// Wb per scaled flux unit.
    pub phi: f64,
    /// rad per scaled angle unit.
    pub theta: f64,
    /// J per scaled energy unit.
    pub energy: f64,
}

impl ScaleFactors {
    pub fn identity() -> Self {
        ScaleFactors { phi: 1.0, theta: 1.0, energy: 1.0 }
    }

    /// Window widths for the coordinates and the dominant energy scale
    /// (kinetic hop or potential magnitude, whichever is larger) for the
    /// energy, sampled on a coarse sublattice.
    pub fn auto(
        params: &DeviceParams,
        dq: &DerivedQuantities,
        consts: &PhysicalConstants,
        window: &GridWindow,
        n_phi: usize,
        n_theta: usize,
    ) -> Result<Self> {
        params.validate()?;
        check_window(window)?;
        if n_phi < 2 || n_theta < 2 {
            return Err(Error::InvalidParameter(
                "scale estimation needs at least a 2×2 grid".into(),
            ));
        }
        let h_phi = (window.phi_max - window.phi_min) / (n_phi - 1) as f64;
        let h_theta = (window.theta_max - window.theta_min) / (n_theta - 1) as f64;
        let kin_phi = consts.hbar * consts.hbar / (2.0 * params.capacitance * h_phi * h_phi);
        let kin_theta =
            consts.hbar * consts.hbar / (2.0 * params.moment_of_inertia * h_theta * h_theta);
        let mut v_max: f64 = 0.0;
        let m = 16usize;
        for i in 0..=m {
            for j in 0..=m {
                let p = LandscapePoint {
                    phi: window.phi_min + h_phi * ((n_phi - 1) * i) as f64 / m as f64,
                    theta: window.theta_min + h_theta * ((n_theta - 1) * j) as f64 / m as f64,
                };
                v_max = v_max.max(potential(&p, params, dq, consts).abs());
            }
        }
        let energy = kin_phi.max(kin_theta).max(v_max);
        if !energy.is_finite() || energy <= 0.0 {
            return Err(Error::Computation(format!(
                "could not pick an energy scale (candidate {energy:e})"
            )));
        }
        Ok(ScaleFactors {
            phi: window.phi_max - window.phi_min,
            theta: window.theta_max - window.theta_min,
            energy,
        })
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("phi", self.phi), ("theta", self.theta), ("energy", self.energy)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "scale factor {name} must be positive and finite, got {v:e}"
                )));
            }
        }
        Ok(())
    }
}

fn check_window(w: &GridWindow) -> Result<()> {
    let vals = [w.phi_min, w.phi_max, w.theta_min, w.theta_max];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("grid window must be finite".into()));
    }
    if !(w.phi_max > w.phi_min) || !(w.theta_max > w.theta_min) {
        return Err(Error::InvalidParameter(
            "grid window must have positive extent in both directions".into(),
        ));
    }
    Ok(())
}

/// Sampling plan for the discretization: window, node counts (boundary nodes
/// included), and the unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub window: GridWindow,
    pub n_phi: usize,
    pub n_theta: usize,
    pub scaling: ScaleFactors,
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        check_window(&self.window)?;
        if self.n_phi < 16 || self.n_theta < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 16 nodes per direction, got {}×{}",
                self.n_phi, self.n_theta
            )));
        }
        self.scaling.validate()
    }
}

/// Axis with nodes exactly symmetric about the window midpoint: node j and
/// node n−1−j sit at bitwise-negated offsets. For a window centered on zero
/// the axis is bitwise antisymmetric, which makes the θ-mirror of a grid
/// function an exact lattice operation.
fn mirrored_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut axis = vec![mid; n];
    for j in 0..n / 2 {
        let t = (2.0 * j as f64 - (n - 1) as f64) / (n - 1) as f64;
        axis[j] = mid + half * t;
        axis[n - 1 - j] = mid - half * t;
    }
    axis
}

/// Matrix-free 5-point discretization of −(ħ²/2C)∂²_Φ − (ħ²/2I)∂²_θ + V on
/// the interior nodes of the grid, in scaled units. Dirichlet: the boundary
/// ring carries ψ = 0 and is excluded from the unknowns.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    grid: GridSpec,
    phi_axis: Vec<f64>,
    theta_axis: Vec<f64>,
    /// Scaled diagonal (kinetic 2k_Φ + 2k_θ plus V/e_s), interior row-major
    /// with Φ slow.
    diag: Vec<f64>,
    /// Scaled hop magnitudes; off-diagonal entries are −hop.
    hop_phi: f64,
    hop_theta: f64,
    /// Physical spacings (Wb, rad).
    h_phi: f64,
    h_theta: f64,
}

impl DiscreteHamiltonian {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Full axis including the boundary nodes, Wb.
    pub fn phi_axis(&self) -> &[f64] {
        &self.phi_axis
    }

    /// Full axis including the boundary nodes, rad.
    pub fn theta_axis(&self) -> &[f64] {
        &self.theta_axis
    }

    pub fn interior_dim(&self) -> usize {
        self.diag.len()
    }

    fn interior_shape(&self) -> (usize, usize) {
        (self.grid.n_phi - 2, self.grid.n_theta - 2)
    }

    /// Physical cell measure h_Φ·h_θ (Wb·rad).
    pub fn cell_measure(&self) -> f64 {
        self.h_phi * self.h_theta
    }

    /// Dense scaled matrix for cross-checking; small grids only.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.interior_dim();
        if n > 4096 {
            return Err(Error::InvalidParameter(format!(
                "dense form is for small grids; {n} unknowns requested"
            )));
        }
        let (ni, nj) = self.interior_shape();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..ni {
            for j in 0..nj {
                let p = i * nj + j;
                m[(p, p)] = self.diag[p];
                if i + 1 < ni {
                    m[(p, p + nj)] = -self.hop_phi;
                    m[(p + nj, p)] = -self.hop_phi;
                }
                if j + 1 < nj {
                    m[(p, p + 1)] = -self.hop_theta;
                    m[(p + 1, p)] = -self.hop_theta;
                }
            }
        }
        Ok(m)
    }
}

impl SymmetricOperator for DiscreteHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (ni, nj) = self.interior_shape();
        for i in 0..ni {
            let row = i * nj;
            for j in 0..nj {
                let p = row + j;
                let mut acc = self.diag[p] * x[p];
                if i > 0 {
                    acc -= self.hop_phi * x[p - nj];
                }
                if i + 1 < ni {
                    acc -= self.hop_phi * x[p + nj];
                }
                if j > 0 {
                    acc -= self.hop_theta * x[p - 1];
                }
                if j + 1 < nj {
                    acc -= self.hop_theta * x[p + 1];
                }
                y[p] = acc;
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        let hops = 2.0 * (self.hop_phi + self.hop_theta);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &d in &self.diag {
            lo = lo.min(d - hops);
            hi = hi.max(d + hops);
        }
        lo.abs().max(hi.abs())
    }
}

/// Discretizes ħ²/(2·capacitance) in Φ, ħ²/(2·inertia) in θ, plus an
/// arbitrary potential sampled at the nodes. The device path goes through
/// [`discretize`]; this entry point exists so exactly solvable potentials
/// (box, quadratic) can be run through the identical machinery.
pub fn assemble(
    grid: &GridSpec,
    capacitance: f64,
    inertia: f64,
    consts: &PhysicalConstants,
    v: impl Fn(f64, f64) -> f64,
) -> Result<DiscreteHamiltonian> {
    grid.validate()?;
    if !(capacitance > 0.0 && capacitance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "capacitance must be positive, got {capacitance:e}"
        )));
    }
    if !(inertia > 0.0 && inertia.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "moment of inertia must be positive, got {inertia:e}"
        )));
    }
    let w = &grid.window;
    let phi_axis = mirrored_axis(w.phi_min, w.phi_max, grid.n_phi);
    let theta_axis = mirrored_axis(w.theta_min, w.theta_max, grid.n_theta);
    let h_phi = (w.phi_max - w.phi_min) / (grid.n_phi - 1) as f64;
    let h_theta = (w.theta_max - w.theta_min) / (grid.n_theta - 1) as f64;
    let e_s = grid.scaling.energy;
    let hop_phi = consts.hbar * consts.hbar / (2.0 * capacitance * h_phi * h_phi) / e_s;
    let hop_theta = consts.hbar * consts.hbar / (2.0 * inertia * h_theta * h_theta) / e_s;
    let kin = 2.0 * (hop_phi + hop_theta);
    let mut diag = Vec::with_capacity((grid.n_phi - 2) * (grid.n_theta - 2));
    for i in 1..grid.n_phi - 1 {
        for j in 1..grid.n_theta - 1 {
            let val = v(phi_axis[i], theta_axis[j]);
            if !val.is_finite() {
                return Err(Error::Computation(format!(
                    "potential is not finite at (Φ={:e}, θ={:e})",
                    phi_axis[i], theta_axis[j]
                )));
            }
            diag.push(kin + val / e_s);
        }
    }
    Ok(DiscreteHamiltonian {
        grid: *grid,
        phi_axis,
        theta_axis,
        diag,
        hop_phi,
        hop_theta,
        h_phi,
        h_theta,
    })
}

/// Discrete Hamiltonian of a device over the given grid.
pub fn discretize(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    grid: &GridSpec,
) -> Result<DiscreteHamiltonian> {
    assemble(grid, params.capacitance, params.moment_of_inertia, consts, |phi, theta| {
        potential(&LandscapePoint { phi, theta }, params, dq, consts)
    })
}

/// Lowest eigenpairs of a discretized Hamiltonian. Energies ascending in J;
/// states on the interior nodes, normalized so Σψ²·h_Φh_θ = 1.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub grid: GridSpec,
    pub phi_axis: Vec<f64>,
    pub theta_axis: Vec<f64>,
    /// J.
    pub energies: Vec<f64>,
    /// Interior row-major (Φ slow), units (Wb·rad)^(−1/2).
    pub states: Vec<Vec<f64>>,
    /// ‖Hψ − Eψ‖·√(h_Φh_θ) per state, J.
    pub residuals: Vec<f64>,
    /// h_Φ·h_θ (Wb·rad).
    pub cell_measure: f64,
}

impl EigenSolution {
    fn interior_shape(&self) -> (usize, usize) {
        (self.grid.n_phi - 2, self.grid.n_theta - 2)
    }

    /// ψ at a full-grid node; the boundary ring is identically zero.
    pub fn value_at(&self, state: usize, i_phi: usize, j_theta: usize) -> f64 {
        let (ni, nj) = self.interior_shape();
        if i_phi == 0 || j_theta == 0 || i_phi > ni || j_theta > nj {
            return 0.0;
        }
        self.states[state][(i_phi - 1) * nj + (j_theta - 1)]
    }

    /// Probability fraction within `BOUNDARY_MARGIN_CELLS` grid cells of the
    /// walls; the solver rejects states where this exceeds 1e-6.
    pub fn boundary_mass(&self, state: usize) -> f64 {
        let (ni, nj) = self.interior_shape();
        let psi = &self.states[state];
        let mut edge = 0.0;
        let mut total = 0.0;
        for i in 0..ni {
            for j in 0..nj {
                let w = psi[i * nj + j].powi(2);
                total += w;
                let d = (i + 1).min(ni - i).min(j + 1).min(nj - j);
                if d <= BOUNDARY_MARGIN_CELLS {
                    edge += w;
                }
            }
        }
        edge / total
    }

    /// Probability split across the line θ = split: (below, at-or-above).
    pub fn angular_mass_split(&self, state: usize, split: f64) -> (f64, f64) {
        let (ni, nj) = self.interior_shape();
        let psi = &self.states[state];
        let mut below = 0.0;
        let mut above = 0.0;
        for i in 0..ni {
            for j in 0..nj {
                let w = psi[i * nj + j].powi(2);
                if self.theta_axis[j + 1] < split {
                    below += w;
                } else {
                    above += w;
                }
            }
        }
        let total = below + above;
        (below / total, above / total)
    }
}

/// `solve_lowest` with the default seed.
pub fn solve_lowest(h: &DiscreteHamiltonian, k: usize) -> Result<EigenSolution> {
    solve_lowest_seeded(h, k, DEFAULT_SEED)
}

/// k lowest eigenpairs, deterministic for a fixed seed. Fails if the
/// iteration stalls or if any returned state carries more than 1e-6 of its
/// probability within three cells of the Dirichlet walls (window too small
/// for the physics; results would be box artifacts).
pub fn solve_lowest_seeded(
    h: &DiscreteHamiltonian,
    k: usize,
    seed: u64,
) -> Result<EigenSolution> {
    let solution = solve_lowest_raw(h, k, seed)?;
    for s in 0..k {
        let bm = solution.boundary_mass(s);
        if bm > BOUNDARY_MASS_LIMIT {
            return Err(Error::Computation(format!(
                "state {s} holds {bm:.3e} of its probability within \
                 {BOUNDARY_MARGIN_CELLS} cells of the grid boundary; enlarge the window"
            )));
        }
    }
    Ok(solution)
}

/// As `solve_lowest_seeded` but without the boundary-contamination gate, for
/// potentials where the Dirichlet walls are the physics (hard-wall oracles)
/// rather than an artifact of windowing.
pub fn solve_lowest_raw(
    h: &DiscreteHamiltonian,
    k: usize,
    seed: u64,
) -> Result<EigenSolution> {
    let n = h.interior_dim();
    let m_cap = MAX_KRYLOV_DIM.min((BASIS_MEMORY_BYTES / (8 * n)).max(2 * k + 2));
    let pairs = solver::lowest_eigenpairs(h, k, seed, m_cap)?;
    let e_s = h.grid.scaling.energy;
    let meas = h.cell_measure();
    let inv = 1.0 / meas.sqrt();
    Ok(EigenSolution {
        grid: h.grid,
        phi_axis: h.phi_axis.clone(),
        theta_axis: h.theta_axis.clone(),
        energies: pairs.values.iter().map(|v| v * e_s).collect(),
        states: pairs
            .vectors
            .into_iter()
            .map(|x| x.into_iter().map(|v| v * inv).collect())
            .collect(),
        residuals: pairs.residuals.iter().map(|r| r * e_s).collect(),
        cell_measure: meas,
    })
}

fn mirror_theta(state: &[f64], ni: usize, nj: usize) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    for i in 0..ni {
        for j in 0..nj {
            out[i * nj + j] = state[i * nj + (nj - 1 - j)];
        }
    }
    out
}

fn grid_overlap(a: &[f64], b: &[f64], meas: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * meas
}

/// Rayleigh quotient and true residual of an SI-normalized state, in J.
fn rayleigh(h: &DiscreteHamiltonian, psi: &[f64]) -> (f64, f64) {
    let meas = h.cell_measure();
    let x: Vec<f64> = psi.iter().map(|v| v * meas.sqrt()).collect();
    let mut y = vec![0.0; x.len()];
    h.apply(&x, &mut y);
    let nx2: f64 = x.iter().map(|v| v * v).sum();
    let e = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / nx2;
    let r2: f64 = x.iter().zip(&y).map(|(a, b)| (b - e * a).powi(2)).sum();
    let e_s = h.grid.scaling.energy;
    (e * e_s, r2.sqrt() / nx2.sqrt() * e_s)
}

/// Even/odd pair of a symmetric double well and the tunnel splitting between
/// them. The two lowest numeric states are projected onto definite parity
/// under the θ-mirror exchange before the splitting is read off, so the
/// labels stay meaningful even when the doublet is degenerate to solver
/// precision and the iteration returns an arbitrary mixture.
#[derive(Debug, Clone)]
pub struct TunnelSplitting {
    /// Energy of the even (node-free) state, J.
    pub even_energy: f64,
    /// Energy of the odd state, J.
    pub odd_energy: f64,
    /// odd − even, J.
    pub delta_e: f64,
    /// delta_e / h, Hz.
    pub splitting_frequency: f64,
    /// ⟨ψ₀|Sψ₀⟩ with S the θ-mirror; +1 for a pure even state.
    pub even_mirror_overlap: f64,
    /// ⟨ψ₁|Sψ₁⟩; −1 for a pure odd state.
    pub odd_mirror_overlap: f64,
    /// Canonicalized pair: state 0 even, state 1 odd.
    pub solution: EigenSolution,
}

/// Checks that the grid and the potential share the θ-mirror symmetry the
/// parity analysis relies on.
fn check_mirror_symmetry(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    grid: &GridSpec,
) -> Result<()> {
    let w = &grid.window;
    let span = w.theta_max - w.theta_min;
    if (w.theta_min + w.theta_max).abs() > 1e-12 * span {
        return Err(Error::InvalidParameter(
            "the θ window must be symmetric about zero for the mirror analysis".into(),
        ));
    }
    // The exchange symmetry must hold for V itself, not just the window.
    let mut v_scale = dq.e_j;
    let mut v_asym: f64 = 0.0;
    for i in 0..=8 {
        for j in 0..=8 {
            let phi = w.phi_min + (w.phi_max - w.phi_min) * i as f64 / 8.0;
            let theta = w.theta_min + span * j as f64 / 8.0;
            let a = potential(&LandscapePoint { phi, theta }, params, dq, consts);
            let b = potential(&LandscapePoint { phi, theta: -theta }, params, dq, consts);
            v_scale = v_scale.max(a.abs());
            v_asym = v_asym.max((a - b).abs());
        }
    }
    if v_asym > 1e-10 * v_scale {
        return Err(Error::InvalidParameter(format!(
            "potential is not mirror-symmetric in θ (asymmetry {v_asym:e} J)"
        )));
    }
    Ok(())
}

/// Lowest doublet of a θ-mirror-symmetric device, projected onto definite
/// parity. Returns the solution with state 0 even and state 1 odd, plus the
/// two mirror overlaps. Needed because a doublet that is degenerate to
/// solver precision comes back from the iteration as an arbitrary mixture.
fn canonical_parity_pair(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    grid: &GridSpec,
) -> Result<(EigenSolution, f64, f64)> {
    check_mirror_symmetry(params, dq, consts, grid)?;
    let h = discretize(params, dq, consts, grid)?;
    let mut sol = solve_lowest(&h, 2)?;
    let (ni, nj) = (grid.n_phi - 2, grid.n_theta - 2);
    let meas = sol.cell_measure;
    let s0 = mirror_theta(&sol.states[0], ni, nj);
    let s1 = mirror_theta(&sol.states[1], ni, nj);
    let m00 = grid_overlap(&sol.states[0], &s0, meas);
    let m01 = grid_overlap(&sol.states[0], &s1, meas);
    let m11 = grid_overlap(&sol.states[1], &s1, meas);

    if !(m00 > 0.999 && m11 < -0.999) {
        // Diagonalize the mirror restricted to span{ψ₀, ψ₁}: rotating by t
        // yields the definite-parity combinations (the cosine branch carries
        // the +1 mirror eigenvalue). Energies are re-read as Rayleigh
        // quotients because the rotation trades energy resolution for
        // symmetry.
        let t = 0.5 * (2.0 * m01).atan2(m00 - m11);
        let (st, ct) = t.sin_cos();
        let mut even: Vec<f64> = Vec::with_capacity(sol.states[0].len());
        let mut odd: Vec<f64> = Vec::with_capacity(sol.states[0].len());
        for p in 0..sol.states[0].len() {
            even.push(ct * sol.states[0][p] + st * sol.states[1][p]);
            odd.push(-st * sol.states[0][p] + ct * sol.states[1][p]);
        }
        for v in [&mut even, &mut odd] {
            let n = grid_overlap(v, v, meas).sqrt();
            for x in v.iter_mut() {
                *x /= n;
            }
        }
        let (ee, re) = rayleigh(&h, &even);
        let (eo, ro) = rayleigh(&h, &odd);
        sol.states = vec![even, odd];
        sol.energies = vec![ee, eo];
        sol.residuals = vec![re, ro];
    }

    let s0 = mirror_theta(&sol.states[0], ni, nj);
    let s1 = mirror_theta(&sol.states[1], ni, nj);
    let even_overlap = grid_overlap(&sol.states[0], &s0, meas);
    let odd_overlap = grid_overlap(&sol.states[1], &s1, meas);
    if !(even_overlap > 0.999 && odd_overlap < -0.999) {
        return Err(Error::Computation(format!(
            "parity canonicalization failed: mirror overlaps {even_overlap:.6} / {odd_overlap:.6}"
        )));
    }
    Ok((sol, even_overlap, odd_overlap))
}

/// Solves the double-well spectrum and reads off the ground doublet
/// splitting. Requires a symmetric double well, a θ-symmetric window, and a
/// potential that is actually mirror-symmetric across θ = 0. Fails when the
/// splitting is smaller than the eigensolver can resolve (very deep wells):
/// a number would come back, but it would be rounding noise.
pub fn tunnel_splitting(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    grid: &GridSpec,
) -> Result<TunnelSplitting> {
    let lc = classify_landscape(params, dq, consts)?;
    if lc.regime != Regime::SymmetricDoubleWell {
        return Err(Error::InvalidParameter(format!(
            "tunnel splitting needs a symmetric double well; landscape is {:?}",
            lc.regime
        )));
    }
    let (sol, even_overlap, odd_overlap) = canonical_parity_pair(params, dq, consts, grid)?;
    let delta = sol.energies[1] - sol.energies[0];
    let floor = 4.0 * sol.residuals.iter().cloned().fold(0.0f64, f64::max);
    if delta <= floor {
        return Err(Error::Computation(format!(
            "tunnel splitting {delta:e} J is below the solver resolution {floor:e} J"
        )));
    }
    Ok(TunnelSplitting {
        even_energy: sol.energies[0],
        odd_energy: sol.energies[1],
        delta_e: delta,
        splitting_frequency: delta / consts.h,
        even_mirror_overlap: even_overlap,
        odd_mirror_overlap: odd_overlap,
        solution: sol,
    })
}

/// Overlap between the numeric ground state and the normalized sum of the
/// analytic Gaussian ground states centered on each global well (the
/// even-cat ansatz; for a single well this is just the one Gaussian).
/// Returns |⟨Ψ_numeric|Ψ_cat⟩|² in [0, 1].
///
/// With two wells the doublet can be degenerate beyond solver resolution, in
/// which case the iteration returns an arbitrary even/odd mixture (and can
/// never produce the second cluster member from a single start vector); the
/// numeric ground state is therefore projected onto the even mirror sector,
/// which is where the true ground state lives in exact arithmetic. For a
/// resolved doublet the ground state is already even and the projection is a
/// no-op.
pub fn cat_state_fidelity(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    grid: &GridSpec,
) -> Result<f64> {
    let lc = classify_landscape(params, dq, consts)?;
    if lc.global_minima.is_empty() || lc.global_minima.len() > 2 {
        return Err(Error::InvalidParameter(format!(
            "cat comparison needs one or two global wells, found {}",
            lc.global_minima.len()
        )));
    }
    let sol = if lc.global_minima.len() == 2 {
        check_mirror_symmetry(params, dq, consts, grid)?;
        let h = discretize(params, dq, consts, grid)?;
        let (ni, nj) = (grid.n_phi - 2, grid.n_theta - 2);
        let mut projected = None;
        // If the start vector happens to be almost purely odd, the even
        // component is lost to noise; retry on a shifted seed.
        for attempt in 0..3u64 {
            let mut sol = solve_lowest_seeded(&h, 1, DEFAULT_SEED + attempt)?;
            let mirrored = mirror_theta(&sol.states[0], ni, nj);
            let meas = sol.cell_measure;
            let even_weight =
                0.5 * (1.0 + grid_overlap(&sol.states[0], &mirrored, meas));
            if even_weight < 0.1 {
                continue;
            }
            let mut even: Vec<f64> = sol.states[0]
                .iter()
                .zip(&mirrored)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let n = grid_overlap(&even, &even, meas).sqrt();
            for v in &mut even {
                *v /= n;
            }
            let (e, r) = rayleigh(&h, &even);
            sol.states[0] = even;
            sol.energies[0] = e;
            sol.residuals[0] = r;
            projected = Some(sol);
            break;
        }
        projected.ok_or_else(|| {
            Error::Computation(
                "could not isolate the even ground state of the well pair".into(),
            )
        })?
    } else {
        let h = discretize(params, dq, consts, grid)?;
        solve_lowest(&h, 1)?
    };
    let (ni, nj) = (grid.n_phi - 2, grid.n_theta - 2);
    let mut cat = vec![0.0; ni * nj];
    for well in &lc.global_minima {
        let modes = mode_frequencies(well, params, dq, consts)?;
        let g = ground_state_phidelta(&modes, params, consts)?;
        for i in 0..ni {
            for j in 0..nj {
                cat[i * nj + j] += g.evaluate(
                    sol.phi_axis[i + 1] - well.location.phi,
                    sol.theta_axis[j + 1] - well.location.theta,
                );
            }
        }
    }
    let meas = sol.cell_measure;
    let nn = grid_overlap(&cat, &cat, meas).sqrt();
    for v in &mut cat {
        *v /= nn;
    }
    Ok(grid_overlap(&cat, &sol.states[0], meas).powi(2))
}

/// Newton iteration for the φ minimizer of V(·, θ) on the branch holding
/// `phi_seed`. Returns `None` when the iteration leaves the convex region or
/// fails to settle.
fn valley_phi(
    phi_seed: f64,
    theta: f64,
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
) -> Option<f64> {
    let cap = 0.25 * consts.flux_quantum;
    let mut phi = phi_seed;
    for _ in 0..60 {
        let p = LandscapePoint { phi, theta };
        let g = gradient(&p, params, dq, consts)[0];
        let h = hessian(&p, params, dq, consts)[(0, 0)];
        if !(g.is_finite() && h.is_finite()) || h <= 0.0 {
            return None;
        }
        let step = (-g / h).clamp(-cap, cap);
        phi += step;
        if step.abs() <= 1e-12 * consts.flux_quantum {
            return Some(phi);
        }
    }
    None
}

/// Window covering every global well out to `margin` standard deviations of
/// its local Gaussian ground state in each direction. The φ range also
/// follows the valley floor across the θ window: the flux bias goes as
/// BₓA·cosθ, so a wide θ window drags the φ well center a sizable fraction
/// of Φ₀ away from the minima themselves. For a mirrored well pair the
/// result is θ-symmetric to the last bit.
pub fn suggested_window(
    params: &DeviceParams,
    dq: &DerivedQuantities,
    consts: &PhysicalConstants,
    margin: f64,
) -> Result<GridWindow> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window margin must be positive, got {margin}"
        )));
    }
    let lc = classify_landscape(params, dq, consts)?;
    let mut w = GridWindow {
        phi_min: f64::INFINITY,
        phi_max: f64::NEG_INFINITY,
        theta_min: f64::INFINITY,
        theta_max: f64::NEG_INFINITY,
    };
    let mut s_phi_max: f64 = 0.0;
    for well in &lc.global_minima {
        let modes = mode_frequencies(well, params, dq, consts)?;
        let g = ground_state_phidelta(&modes, params, consts)?;
        let s_phi = g.marginal_variance_phi().sqrt();
        let s_theta = g.marginal_variance_delta().sqrt();
        s_phi_max = s_phi_max.max(s_phi);
        w.phi_min = w.phi_min.min(well.location.phi - margin * s_phi);
        w.phi_max = w.phi_max.max(well.location.phi + margin * s_phi);
        w.theta_min = w.theta_min.min(well.location.theta - margin * s_theta);
        w.theta_max = w.theta_max.max(well.location.theta + margin * s_theta);
    }
    let span = w.theta_max - w.theta_min;
    if span.is_finite() && span > 0.0 {
        for i in 0..=32 {
            let theta = w.theta_min + span * (i as f64 / 32.0);
            for well in &lc.global_minima {
                if let Some(c) = valley_phi(well.location.phi, theta, params, dq, consts) {
                    w.phi_min = w.phi_min.min(c - margin * s_phi_max);
                    w.phi_max = w.phi_max.max(c + margin * s_phi_max);
                }
            }
        }
    }
    check_window(&w)?;
    Ok(w)
}
