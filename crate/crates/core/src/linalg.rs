//! Small dense helpers shared by the root finders and the coefficient solves.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Condition numbers above this are reported as warnings.
pub const COND_WARN: f64 = 1e10;

pub fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Scale `v` so its largest-magnitude entry is exactly `1`.
///
/// Ties within a relative `1e-12` go to the lowest index so the result does
/// not depend on rounding noise in the eigensolver.
pub fn normalize_max(v: &DVector<C64>) -> DVector<C64> {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return v.clone();
    }
    let idx = v
        .iter()
        .position(|z| z.norm() >= big * (1.0 - 1e-12))
        .unwrap_or(0);
    let pivot = v[idx];
    let mut out = v.map(|z| z / pivot);
    out[idx] = c64(1.0);
    out
}

/// Right singular vector for the smallest singular value, plus that value
/// relative to the largest one.
pub fn null_vector(m: &DMatrix<C64>) -> Result<(DVector<C64>, f64)> {
    let n = m.ncols();
    // pad to square so the SVD exposes a full right basis
    let sq = if m.nrows() < n {
        let mut s = DMatrix::zeros(n, n);
        s.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        s
    } else {
        m.clone()
    };
    let svd = sq.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::numeric("null vector", "SVD did not return V"))?;
    let (imin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let smax = svd.singular_values.max();
    let v = vt.row(imin).transpose().map(|z| z.conj());
    let rel = if smax > 0.0 { smin / smax } else { 0.0 };
    Ok((v, rel))
}

pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Outcome of a checked dense solve.
#[derive(Debug, Clone)]
pub struct Solved {
    pub x: DVector<C64>,
    pub cond: f64,
    pub rank: usize,
    pub residual: f64,
}

/// Solve `a x = b` by LU with partial pivoting (square) or least squares
/// (rectangular). Rank-deficient or numerically singular systems are refused.
pub fn solve_checked(context: &str, a: &DMatrix<C64>, b: &DVector<C64>) -> Result<Solved> {
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let tol = smax * 1e-13 * a.nrows().max(a.ncols()) as f64;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let cond = if sv.min() > 0.0 { smax / sv.min() } else { f64::INFINITY };
    let x = if a.is_square() && rank == a.ncols() {
        a.clone()
            .lu()
            .solve(b)
            .ok_or_else(|| Error::IllConditioned {
                context: context.into(),
                cond,
            })?
    } else {
        svd.solve(b, tol)
            .map_err(|e| Error::numeric(context, e.to_string()))?
    };
    let residual = (a * &x - b).camax();
    let scale = 1.0 + b.camax();
    if rank < a.ncols() {
        return Err(Error::RankDeficient {
            context: context.into(),
            rank,
            cols: a.ncols(),
            residual,
        });
    }
    if residual > 1e-9 * scale {
        return Err(Error::RankDeficient {
            context: context.into(),
            rank,
            cols: a.ncols(),
            residual,
        });
    }
    Ok(Solved {
        x,
        cond,
        rank,
        residual,
    })
}

/// Eigenvalues of a complex square matrix via the Schur form.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    m.clone()
        .try_schur(1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::numeric("eigen solver", "Schur iteration failed to converge"))
}

/// Evaluate a polynomial with ascending coefficients by Horner's rule.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of a polynomial with ascending coefficients.
///
/// Leading coefficients below `1e-12` times the largest one are dropped, so
/// the number of roots returned can be smaller than `coeffs.len() - 1`. Roots
/// come from the companion matrix and are polished with a few Newton steps.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let big = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return Err(Error::numeric("polynomial roots", "zero polynomial"));
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-12 * big {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = c64(1.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let mut roots = eigenvalues(&comp)?;
    let trimmed = &coeffs[..=deg];
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = horner_with_derivative(trimmed, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *r - p / dp;
            if horner(trimmed, next).norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// Group values closer than `tol`; returns representatives and multiplicities.
pub fn merge_close(values: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize)> = Vec::new();
    for &v in values {
        match out.iter_mut().find(|(w, _)| (*w - v).norm() <= tol) {
            Some(slot) => slot.1 += 1,
            None => out.push((v, 1)),
        }
    }
    out
}
