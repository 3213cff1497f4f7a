//! Characteristic matrices, their spectra and the scaled determinant polynomials.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, C64};
use crate::model::{is_strictly_tridiagonal, ModelParams};

/// Eigenvalue gaps below this make branch labels unreliable.
pub const EIGEN_GAP_TOL: f64 = 1e-8;

/// Which local polynomial sits on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    /// `lam/beta + mu1*alpha + mu2*beta/alpha`
    Interior,
    /// `lam/beta + mu1 + mu2*beta/alpha`
    Boundary1,
    /// `lam/beta + mu1*alpha + mu2`
    Boundary2,
}

#[derive(Debug, Clone)]
pub struct CharMatrix {
    pub kind: BoundaryKind,
    pub beta: C64,
    pub alpha: C64,
    pub entries: DMatrix<C64>,
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<C64>,
    pub vectors: Vec<DVector<C64>>,
    /// All eigenvalues real, so the descending order is meaningful.
    pub sorted_real: bool,
}

pub fn local_poly(params: &ModelParams, kind: BoundaryKind, beta: C64, alpha: C64, m: usize) -> C64 {
    let (l, a, b) = (params.lam()[m], params.mu1()[m], params.mu2()[m]);
    match kind {
        BoundaryKind::Interior => l / beta + a * alpha + b * beta / alpha,
        BoundaryKind::Boundary1 => l / beta + a + b * beta / alpha,
        BoundaryKind::Boundary2 => l / beta + a * alpha + b,
    }
}

fn fill_matrix(params: &ModelParams, kind: BoundaryKind, beta: C64, alpha: C64) -> DMatrix<C64> {
    let p = params.p();
    let n = params.num_regimes();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            p[(i, i)] * local_poly(params, kind, beta, alpha, i)
        } else {
            c64(p[(i, j)])
        }
    })
}

pub fn build_char_matrix(
    params: &ModelParams,
    beta: C64,
    alpha: C64,
    kind: BoundaryKind,
) -> Result<CharMatrix> {
    if beta == c64(0.0) {
        return Err(Error::Domain("beta must be nonzero".into()));
    }
    if alpha == c64(0.0) && kind != BoundaryKind::Boundary2 {
        return Err(Error::Domain("alpha must be nonzero".into()));
    }
    Ok(CharMatrix {
        kind,
        beta,
        alpha,
        entries: fill_matrix(params, kind, beta, alpha),
    })
}

/// Interior matrix at a real point, for the branch root finders.
pub fn real_char_matrix(params: &ModelParams, beta: f64, alpha: f64) -> DMatrix<f64> {
    let p = params.p();
    let n = params.num_regimes();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let (l, a, b) = (params.lam()[i], params.mu1()[i], params.mu2()[i]);
            p[(i, i)] * (l / beta + a * alpha + b * beta / alpha)
        } else {
            p[(i, j)]
        }
    })
}

/// Real eigenvalues in descending order; complex spectra are an error.
pub fn real_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let ev = a.complex_eigenvalues();
    let scale = a.amax().max(1.0);
    let mut out = Vec::with_capacity(ev.len());
    for z in ev.iter() {
        if z.im.abs() > 1e-10 * scale {
            return Err(Error::numeric(
                "eigenvalue branch",
                format!("complex eigenvalue {z} at a real point"),
            ));
        }
        out.push(z.re);
    }
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(out)
}

/// `Lambda_j(beta, alpha)` for real positive arguments (`j` is 1-based).
pub fn branch_eigenvalue(params: &ModelParams, beta: f64, alpha: f64, j: usize) -> Result<f64> {
    let ev = real_eigenvalues(&real_char_matrix(params, beta, alpha))?;
    ev.get(j - 1)
        .copied()
        .ok_or_else(|| Error::Domain(format!("branch {j} does not exist")))
}

/// Smallest gap between consecutive sorted eigenvalues.
pub fn min_gap(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn perron_root(params: &ModelParams, beta: f64, alpha: f64) -> f64 {
    let a = real_char_matrix(params, beta, alpha);
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn is_real_matrix(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Eigenpairs sorted by descending real part, eigenvectors normalized so the
/// largest-magnitude entry is `+1`.
pub fn eigen_sorted(mat: &CharMatrix) -> Result<EigenSystem> {
    let a = &mat.entries;
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("eigen_sorted", "non-finite matrix entry"));
    }
    let mut values = linalg::eigenvalues(a)?;
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let real = is_real_matrix(a) && values.iter().all(|z| z.im.abs() <= 1e-10 * scale);
    if real {
        for v in values.iter_mut() {
            v.im = 0.0;
        }
    }
    values.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap().then(y.im.partial_cmp(&x.im).unwrap()));
    let n = a.nrows();
    let mut vectors = Vec::with_capacity(n);
    for &lam in &values {
        let shifted = a - DMatrix::<C64>::identity(n, n) * lam;
        let (v, _) = linalg::null_vector(&shifted)?;
        vectors.push(linalg::normalize_max(&v));
    }
    Ok(EigenSystem {
        values,
        vectors,
        sorted_real: real,
    })
}

/// Which variable of `det(I - A(beta, alpha))` is held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixed {
    Beta(C64),
    Alpha(C64),
}

/// `z^{|M|} det(I - A)` with the free variable set to `z`.
pub fn scaled_det(params: &ModelParams, fixed: Fixed, z: C64) -> C64 {
    let n = params.num_regimes();
    let a = match fixed {
        Fixed::Beta(b) => fill_matrix(params, BoundaryKind::Interior, b, z),
        Fixed::Alpha(al) => fill_matrix(params, BoundaryKind::Interior, z, al),
    };
    let d = (DMatrix::<C64>::identity(n, n) - a).determinant();
    d * z.powi(n as i32)
}

/// Ascending coefficients of the degree-`2|M|` scaled determinant polynomial in
/// the free variable, recovered by interpolation at `2|M|+1` points on the unit
/// circle.
pub fn char_poly_in(params: &ModelParams, fixed: Fixed) -> Result<Vec<C64>> {
    let f = match fixed {
        Fixed::Beta(b) | Fixed::Alpha(b) => b,
    };
    if f == c64(0.0) {
        return Err(Error::Domain("fixed variable must be nonzero".into()));
    }
    let deg = 2 * params.num_regimes();
    let npts = deg + 1;
    let nodes: Vec<C64> = (0..npts)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / npts as f64))
        .collect();
    let vander = DMatrix::from_fn(npts, npts, |i, j| nodes[i].powi(j as i32));
    let rhs = DVector::from_iterator(npts, nodes.iter().map(|&z| scaled_det(params, fixed, z)));
    let cond = linalg::condition_number(&vander);
    if cond > linalg::COND_WARN {
        return Err(Error::IllConditioned {
            context: "interpolation of the characteristic polynomial".into(),
            cond,
        });
    }
    let coeffs = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned {
            context: "interpolation of the characteristic polynomial".into(),
            cond,
        })?;
    Ok(coeffs.iter().copied().collect())
}

/// `-log Lambda_1(e^{q1}, e^{q2})`.
pub fn hamiltonian(params: &ModelParams, q: [f64; 2]) -> f64 {
    -perron_root(params, q[0].exp(), q[1].exp()).ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct SimpleEigenReport {
    pub points_checked: usize,
    pub min_gap: f64,
    pub complex_points: Vec<(f64, f64)>,
    pub tridiagonal_strict: bool,
}

impl SimpleEigenReport {
    pub fn is_simple(&self) -> bool {
        self.complex_points.is_empty() && self.min_gap >= EIGEN_GAP_TOL
    }
}

pub fn check_simple_real_eigenvalues(params: &ModelParams, grid: &[(f64, f64)]) -> SimpleEigenReport {
    let results: Vec<std::result::Result<f64, (f64, f64)>> = grid
        .par_iter()
        .map(|&(b, a)| match real_eigenvalues(&real_char_matrix(params, b, a)) {
            Ok(ev) => Ok(min_gap(&ev)),
            Err(_) => Err((b, a)),
        })
        .collect();
    let mut gap = f64::INFINITY;
    let mut complex = Vec::new();
    for r in results {
        match r {
            Ok(g) => gap = gap.min(g),
            Err(pt) => complex.push(pt),
        }
    }
    SimpleEigenReport {
        points_checked: grid.len(),
        min_gap: gap,
        complex_points: complex,
        tridiagonal_strict: is_strictly_tridiagonal(params.p()),
    }
}

/// Log-spaced sample of the positive quadrant.
pub fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<(f64, f64)> {
    let axis = log_space(lo, hi, steps);
    axis.iter()
        .flat_map(|&b| axis.iter().map(move |&a| (b, a)))
        .collect()
}

fn log_space(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..steps)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (steps.max(2) - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCurveSample {
    pub branch: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Scan window for [`trace_level_curves`]; both axes are log-spaced.
#[derive(Debug, Clone, Copy)]
pub struct CurveResolution {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_steps: usize,
}

impl Default for CurveResolution {
    fn default() -> Self {
        CurveResolution {
            alpha_min: 1e-3,
            alpha_max: 10.0,
            alpha_steps: 200,
            beta_min: 1e-3,
            beta_max: 10.0,
            beta_steps: 400,
        }
    }
}

/// Bisection on `f` over `[lo, hi]`, which must bracket a sign change.
/// Stops once the bracket is within `rtol` relative to its larger end.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rtol: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rtol * lo.abs().max(hi.abs()) || mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points of `{Lambda_j(beta, alpha) = 1}` found by bracketing in `beta` along
/// each `alpha` of the sweep. Sweeps without a bracket contribute nothing.
pub fn trace_level_curves(params: &ModelParams, branch: usize, res: CurveResolution) -> Vec<LevelCurveSample> {
    let alphas = log_space(res.alpha_min, res.alpha_max, res.alpha_steps);
    let betas = log_space(res.beta_min, res.beta_max, res.beta_steps);
    let per_alpha: Vec<Vec<LevelCurveSample>> = alphas
        .par_iter()
        .map(|&alpha| {
            let f = |b: f64| {
                branch_eigenvalue(params, b, alpha, branch)
                    .map(|v| v - 1.0)
                    .unwrap_or(f64::NAN)
            };
            let vals: Vec<f64> = betas.iter().map(|&b| f(b)).collect();
            let mut out = Vec::new();
            for i in 1..betas.len() {
                let (a, b) = (vals[i - 1], vals[i]);
                if a.is_finite() && b.is_finite() && (a > 0.0) != (b > 0.0) {
                    let beta = bisect(f, betas[i - 1], betas[i], 1e-12);
                    out.push(LevelCurveSample { branch, alpha, beta });
                }
            }
            out
        })
        .collect();
    per_alpha.into_iter().flatten().collect()
}
