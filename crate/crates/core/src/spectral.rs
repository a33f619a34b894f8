//! Spectral checks for reversible Metropolis chains: Gibbs stationarity, the
//! symmetrization identity, classical and phase gaps, and the bipartite
//! Szegedy walk built from the chain.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::cwalk::TransitionMatrix;
use crate::error::{Error, Result};
use crate::landscape::EnergyLandscape;

/// Largest Hilbert-space dimension `d^2` for the bipartite walk.
pub const DEFAULT_MAX_BIPARTITE_DIM: usize = 1 << 12;

const SPECTRUM_TOL: f64 = 1e-9;
const BOUND_SLACK: f64 = 1e-9;
const SCHUR_MAX_ITER: usize = 100_000;

/// Normalized Gibbs weights `exp(-beta E) / Z`, shifted by the minimum energy
/// so the ground weight never underflows.
pub fn gibbs(landscape: &EnergyLandscape, beta: f64) -> Vec<f64> {
    let e = landscape.energies();
    let e_min = e.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.iter().map(|&x| (-beta * (x - e_min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub beta: f64,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Classical gap `1 - lambda_1`.
    pub delta: f64,
    /// Phase gap `2 arccos(lambda_1)`.
    pub phase_gap: f64,
    pub bounds_applicable: bool,
    pub bounds_hold: Option<bool>,
}

impl SpectralReport {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(f64::NAN)
    }

    /// `(upper, lower)` = `(Delta^2 / 8, Delta^2 / 8 * (1 - pi^2 / 48))`.
    pub fn bounds(&self) -> (f64, f64) {
        let upper = self.phase_gap * self.phase_gap / 8.0;
        (upper, upper * (1.0 - PI * PI / 48.0))
    }
}

fn to_dmatrix(w: &TransitionMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(w.dim(), w.dim(), w.entries())
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Real parts of the eigenvalues of `w`, sorted descending, after checking the
/// imaginary parts stay within `tol`.
fn real_spectrum(w: &DMatrix<f64>, tol: f64) -> Result<Vec<f64>> {
    let eig = Schur::try_new(w.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Domain("real Schur decomposition did not converge".into()))?
        .complex_eigenvalues();
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tol {
        return Err(Error::NonRealSpectrum { max_imag });
    }
    Ok(sorted_desc(eig.iter().map(|z| z.re).collect()))
}

/// Eigenvalues, gaps and bound applicability of a Metropolis chain.
///
/// Eigenvalues come from the symmetric matrix `M_ij = sqrt(W_ij W_ji)`, which
/// is similar to `W` whenever detailed balance holds.
pub fn classical_gap(w: &TransitionMatrix) -> Result<SpectralReport> {
    let dense = to_dmatrix(w);
    real_spectrum(&dense, SPECTRUM_TOL)?;
    let d = w.dim();
    let sym = DMatrix::from_fn(d, d, |i, j| (w.get(i, j) * w.get(j, i)).sqrt());
    let eigenvalues = sorted_desc(SymmetricEigen::new(sym).eigenvalues.iter().copied().collect());
    let lambda1 = eigenvalues.get(1).copied().unwrap_or(-1.0);
    let delta = 1.0 - lambda1;
    let phase_gap = 2.0 * lambda1.clamp(-1.0, 1.0).acos();
    let bounds_applicable = (0.0..1.0).contains(&lambda1);
    let mut report = SpectralReport {
        beta: w.beta(),
        eigenvalues,
        delta,
        phase_gap,
        bounds_applicable,
        bounds_hold: None,
    };
    if bounds_applicable {
        report.bounds_hold = Some(verify_gap_bounds(&report)?);
    }
    Ok(report)
}

/// `Delta^2 / 8 >= delta >= Delta^2 / 8 * (1 - pi^2 / 48)` with `1e-9` slack.
/// Only defined for `lambda_1` in `[0, 1)`.
pub fn verify_gap_bounds(report: &SpectralReport) -> Result<bool> {
    let lambda1 = report.lambda1();
    if !(0.0..1.0).contains(&lambda1) {
        return Err(Error::BoundsNotApplicable { lambda1 });
    }
    let (upper, lower) = report.bounds();
    Ok(upper + BOUND_SLACK >= report.delta && report.delta >= lower - BOUND_SLACK)
}

/// Checks `D^{-1/2} W D^{1/2}` is symmetric and shares the spectrum of `W`.
pub fn spectrum_similarity_check(w: &TransitionMatrix, gibbs: &[f64]) -> Result<bool> {
    let d = w.dim();
    if gibbs.len() != d {
        return Err(Error::Domain(format!(
            "gibbs vector has {} entries, matrix has dimension {d}",
            gibbs.len()
        )));
    }
    if let Some(state) = gibbs.iter().position(|&p| !(p >= f64::MIN_POSITIVE)) {
        return Err(Error::ZeroGibbsWeight { state });
    }
    let sqrt_pi: Vec<f64> = gibbs.iter().map(|p| p.sqrt()).collect();
    let m = DMatrix::from_fn(d, d, |i, j| w.get(i, j) * sqrt_pi[j] / sqrt_pi[i]);
    let asym = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > SPECTRUM_TOL {
        return Ok(false);
    }
    let w_spec = match real_spectrum(&to_dmatrix(w), SPECTRUM_TOL) {
        Ok(s) => s,
        Err(Error::NonRealSpectrum { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    let m_sym = (&m + m.transpose()) * 0.5;
    let m_spec = sorted_desc(SymmetricEigen::new(m_sym).eigenvalues.iter().copied().collect());
    Ok(w_spec
        .iter()
        .zip(&m_spec)
        .all(|(a, b)| (a - b).abs() <= SPECTRUM_TOL))
}

/// Largest detailed-balance residual `|W_ji pi_i - W_ij pi_j|` and its pair.
pub fn detailed_balance_residual(w: &TransitionMatrix, gibbs: &[f64]) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..w.dim() {
        for j in 0..w.dim() {
            let r = (w.get(j, i) * gibbs[i] - w.get(i, j) * gibbs[j]).abs();
            if r > worst.0 {
                worst = (r, i, j);
            }
        }
    }
    worst
}

/// Real orthogonal matrix whose first column is the unit vector `col`
/// (Householder reflection onto `e_0`).
fn complete_from_column(col: &[f64]) -> DMatrix<f64> {
    let d = col.len();
    let mut v: Vec<f64> = col.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    DMatrix::from_fn(d, d, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        if vv < 1e-300 {
            id
        } else {
            id - 2.0 * v[r] * v[c] / vv
        }
    })
}

/// Bipartite Szegedy walk `U^T S U R_A U^T S U R_A` on `C^d (x) C^d`.
///
/// Basis index of `|a>|b>` is `a * d + b`. `U|j>|0> = |j> sum_i sqrt(P(j -> i)) |i>`
/// with each block completed to an orthogonal matrix; `S` swaps the factors and
/// `R_A = 2 (1 (x) |0><0|) - 1`.
pub fn build_szegedy_bipartite(w: &TransitionMatrix, gibbs: &[f64]) -> Result<DMatrix<f64>> {
    build_szegedy_bipartite_guarded(w, gibbs, DEFAULT_MAX_BIPARTITE_DIM)
}

pub fn build_szegedy_bipartite_guarded(
    w: &TransitionMatrix,
    gibbs: &[f64],
    max_dim: usize,
) -> Result<DMatrix<f64>> {
    let d = w.dim();
    let n = d * d;
    if n > max_dim {
        return Err(Error::SizeGuard {
            what: "bipartite walk dimension",
            size: n,
            limit: max_dim,
        });
    }
    if gibbs.len() != d {
        return Err(Error::Domain("gibbs vector length mismatch".into()));
    }
    let (residual, i, j) = detailed_balance_residual(w, gibbs);
    if residual > SPECTRUM_TOL {
        return Err(Error::DetailedBalance { i, j, residual });
    }

    let mut u = DMatrix::<f64>::zeros(n, n);
    for a in 0..d {
        let col: Vec<f64> = (0..d).map(|i| w.get(i, a).max(0.0).sqrt()).collect();
        let block = complete_from_column(&col);
        u.view_mut((a * d, a * d), (d, d)).copy_from(&block);
    }
    let swap = DMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (c / d, c % d);
        if r == b * d + a {
            1.0
        } else {
            0.0
        }
    });
    let reflect_a = DMatrix::from_fn(n, n, |r, c| match (r == c, c % d == 0) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    });
    let usu = u.transpose() * &swap * &u;
    let half = &usu * &reflect_a;
    let walk = &half * &half;

    let err = unitarity_error(&walk);
    if err > SPECTRUM_TOL {
        return Err(Error::Domain(format!(
            "bipartite walk not unitary (max deviation {err:e})"
        )));
    }
    Ok(walk)
}

/// `max |W^T W - I|` for a real matrix.
pub fn unitarity_error(m: &DMatrix<f64>) -> f64 {
    let prod = m.transpose() * m;
    let n = m.nrows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Eigenphases in `(-pi, pi]` of a real orthogonal matrix.
///
/// An eigenvector `v` of `W` with phase `theta` is also an eigenvector of the
/// Hermitian matrix `S - i c K` (`S`, `K` the symmetric and skew parts) with
/// eigenvalue `cos(theta) + c sin(theta)`. Diagonalizing that matrix and taking
/// `arg(v^H W v)` avoids the ill-conditioned `arccos` near `theta = 0, pi`.
/// Coincident pencil eigenvalues from distinct phases are caught by the
/// residual check and retried with another `c`.
pub fn eigenphases(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let wc: DMatrix<Complex<f64>> = m.map(|x| Complex::new(x, 0.0));
    for c in [0.318_309_886_183_790_7, 0.577_215_664_901_532_9, 1.414_213_562_373_095] {
        let h = DMatrix::from_fn(n, n, |r, k| {
            let sym = 0.5 * (m[(r, k)] + m[(k, r)]);
            let skew = 0.5 * (m[(r, k)] - m[(k, r)]);
            Complex::new(sym, -c * skew)
        });
        let eig = SymmetricEigen::new(h);
        let mut phases = Vec::with_capacity(n);
        let mut worst = 0.0f64;
        for k in 0..n {
            let v: DVector<Complex<f64>> = eig.eigenvectors.column(k).into_owned();
            let wv = &wc * &v;
            let mu = v.dotc(&wv);
            worst = worst.max((wv - &v * mu).norm());
            phases.push(mu.arg());
        }
        if worst <= 1e-9 {
            return Ok(phases);
        }
    }
    Err(Error::Domain("eigenphase decomposition failed residual check".into()))
}

fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Worst distance from each predicted phase `+-2 arccos(lambda_j)` to its
/// nearest eigenphase of `walk`.
pub fn bipartite_phase_mismatch(eigenvalues: &[f64], walk: &DMatrix<f64>) -> Result<f64> {
    let phases = eigenphases(walk)?;
    Ok(eigenvalues
        .iter()
        .flat_map(|&lambda| {
            let phi = 2.0 * lambda.clamp(-1.0, 1.0).acos();
            [phi, -phi]
        })
        .map(|target| {
            phases
                .iter()
                .map(|&p| wrapped_distance(p, target))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}
