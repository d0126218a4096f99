//! Lanczos iteration with full reorthogonalization for the lowest eigenpairs
//! of a large symmetric operator. Krylov accumulation handles the wide
//! spectral spread of the discretized Hamiltonians (kinetic edge several
//! orders above the low end) without needing a sparse factorization, and the
//! explicit double Gram-Schmidt pass keeps the basis orthogonal to machine
//! precision so near-degenerate tunneling doublets are resolved cleanly.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub(super) trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// y = A·x.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
}

pub(super) struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit l2 norm, matching `values`.
    pub vectors: Vec<Vec<f64>>,
    /// ‖A·x − λx‖₂ per pair.
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two classical Gram-Schmidt passes of w against the basis; twice is enough
/// to restore orthogonality lost to rounding.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(w, v);
            axpy(w, -c, v);
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    for x in &mut v {
        *x /= nv;
    }
    v
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    })
}

/// Eigen-decomposition of the projected tridiagonal, sorted ascending.
/// Returns (ritz values, ritz vectors as columns of U in sorted order).
fn projected_eig(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let se = SymmetricEigen::new(tridiagonal(alpha, beta));
    let m = alpha.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let u = DMatrix::from_fn(m, m, |r, c| se.eigenvectors[(r, order[c])]);
    (values, u)
}

/// Assembles the k lowest Ritz vectors in the full space and measures their
/// true residuals.
fn extract<O: SymmetricOperator>(
    op: &O,
    basis: &[Vec<f64>],
    values: &[f64],
    u: &DMatrix<f64>,
    k: usize,
) -> EigenPairs {
    let n = op.dim();
    let m = basis.len();
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut work = vec![0.0; n];
    for i in 0..k {
        let mut x = vec![0.0; n];
        for j in 0..m {
            axpy(&mut x, u[(j, i)], &basis[j]);
        }
        let nx = norm(&x);
        for xi in &mut x {
            *xi /= nx;
        }
        op.apply(&x, &mut work);
        axpy(&mut work, -values[i], &x);
        residuals.push(norm(&work));
        vectors.push(x);
    }
    EigenPairs { values: values[..k].to_vec(), vectors, residuals }
}

/// k lowest eigenpairs of a symmetric operator, deterministic for a fixed
/// seed. `m_cap` bounds the Krylov dimension (and so the basis memory).
pub(super) fn lowest_eigenpairs<O: SymmetricOperator>(
    op: &O,
    k: usize,
    seed: u64,
    m_cap: usize,
) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > 32 || 4 * k >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {k} eigenpairs from an operator of dimension {n}"
        )));
    }
    let m_cap = m_cap.min(n).max(2 * k + 2);
    let hb = op.norm_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut basis: Vec<Vec<f64>> = vec![random_unit(&mut rng, n)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut exhausted = false;
    let check_start = (2 * k + 10).max(30).min(m_cap);
    let check_every = 20;

    loop {
        let j = alpha.len();
        let mut w = vec![0.0; n];
        op.apply(&basis[j], &mut w);
        if j > 0 {
            axpy(&mut w, -beta[j - 1], &basis[j - 1]);
        }
        let a = dot(&w, &basis[j]);
        axpy(&mut w, -a, &basis[j]);
        alpha.push(a);
        reorthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = alpha.len();

        let mut grew = false;
        if m < m_cap && !exhausted {
            if b > 1e-13 * hb {
                for x in &mut w {
                    *x /= b;
                }
                beta.push(b);
                basis.push(w);
                grew = true;
            } else {
                // Invariant subspace: continue in a fresh direction, leaving
                // the blocks disconnected in the projected matrix.
                let mut f = random_unit(&mut rng, n);
                reorthogonalize(&mut f, &basis);
                let nf = norm(&f);
                if nf > 1e-8 {
                    for x in &mut f {
                        *x /= nf;
                    }
                    beta.push(0.0);
                    basis.push(f);
                    grew = true;
                } else {
                    exhausted = true;
                }
            }
        }

        let finished = !grew;
        if m >= check_start && ((m - check_start) % check_every == 0 || finished) {
            let (values, u) = projected_eig(&alpha, &beta[..m - 1]);
            if values.len() >= k {
                let tol = (1e-9 * values[0].abs()).max(2e-14 * hb);
                let last = beta.get(m - 1).copied().unwrap_or(0.0);
                let bounds_ok =
                    (0..k).all(|i| (last * u[(m - 1, i)]).abs() <= 0.5 * tol) || finished;
                if bounds_ok {
                    let pairs = extract(op, &basis[..m], &values, &u, k);
                    let worst =
                        pairs.residuals.iter().cloned().fold(0.0f64, f64::max);
                    if worst <= tol {
                        return Ok(pairs);
                    }
                    if finished {
                        // Allow the stated solver contract even when the
                        // aggressive internal target was missed.
                        if worst <= 1e-8 * values[0].abs().max(1e-300) {
                            return Ok(pairs);
                        }
                        return Err(Error::Computation(format!(
                            "eigensolver did not converge: residual {worst:e} \
                             after {m} Lanczos steps"
                        )));
                    }
                }
            } else if finished {
                return Err(Error::Computation(
                    "eigensolver exhausted the space before finding the requested pairs".into(),
                ));
            }
        }
        if finished {
            return Err(Error::Computation(format!(
                "eigensolver did not converge within {m} Lanczos steps"
            )));
        }
    }
}
