//! Distinguished points of the characteristic surface and the root catalog.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::characteristic::{
    self, bisect, branch_eigenvalue, min_gap, real_char_matrix, real_eigenvalues, BoundaryKind,
    Fixed, EIGEN_GAP_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, C64};
use crate::model::{check_stability, ModelParams};

/// Relative bracket width at which root bisection stops. Roots near zero
/// (branch roots of order 1e-2) need it relative to keep residuals at 1e-13.
pub const BISECTION_TOL: f64 = 1e-14;
pub const MERGE_TOL: f64 = 1e-8;
pub const EXCLUDE_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 2000;
const SCAN_EDGE: f64 = 1e-6;

/// A triple `(beta, alpha, d)` with `A(beta, alpha) d = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub beta: C64,
    pub alpha: C64,
    pub d: DVector<C64>,
    pub branch: Option<usize>,
    /// `||A d - d||_inf / ||d||_inf`
    pub residual: f64,
}

impl SurfacePoint {
    /// Attach the unit-eigenvalue eigenvector of `A(beta, alpha)`.
    pub fn at(params: &ModelParams, beta: C64, alpha: C64, branch: Option<usize>) -> Result<Self> {
        let a = characteristic::build_char_matrix(params, beta, alpha, BoundaryKind::Interior)?.entries;
        let n = params.num_regimes();
        let (v, _) = linalg::null_vector(&(DMatrix::<C64>::identity(n, n) - &a))?;
        let d = linalg::normalize_max(&v);
        Ok(Self::with_vector(params, beta, alpha, d, branch))
    }

    pub fn with_vector(
        params: &ModelParams,
        beta: C64,
        alpha: C64,
        d: DVector<C64>,
        branch: Option<usize>,
    ) -> Self {
        let residual = eigen_residual(params, beta, alpha, &d);
        SurfacePoint {
            beta,
            alpha,
            d,
            branch,
            residual,
        }
    }

    /// Real parts of `d`, for points known to be real.
    pub fn d_real(&self) -> Vec<f64> {
        self.d.iter().map(|z| z.re).collect()
    }
}

pub fn eigen_residual(params: &ModelParams, beta: C64, alpha: C64, d: &DVector<C64>) -> f64 {
    match characteristic::build_char_matrix(params, beta, alpha, BoundaryKind::Interior) {
        Ok(a) => (&a.entries * d - d).camax() / d.camax().max(f64::MIN_POSITIVE),
        Err(_) => f64::INFINITY,
    }
}

/// A base point together with the conjugates used to cancel its boundary defect.
#[derive(Debug, Clone)]
pub struct ConjugateFamily {
    pub base: SurfacePoint,
    pub conjugates: Vec<SurfacePoint>,
    /// In-disk conjugates available before truncation to `|M|`.
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct CircleFamily {
    pub k: usize,
    pub j: usize,
    pub family: ConjugateFamily,
}

/// Rank and residual of a "target in span of columns" test.
#[derive(Debug, Clone, Serialize)]
pub struct SpanCheck {
    pub rank: usize,
    pub columns: usize,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionFlags {
    pub conj_sum: f64,
    pub conj: bool,
    /// `rho1 != rho2`
    pub rho_distinct: bool,
    /// Boundary defect of `(rho2, 1, d2)` cancellable by the `alpha*_j` family.
    pub rho2_span: Option<SpanCheck>,
    /// Same test for every `rho_{2,j}` family, then every circle family.
    pub branch_spans: Vec<SpanCheck>,
    pub circle_spans: Vec<SpanCheck>,
    /// All-ones vector in the span of `d2, e_2, ..., e_|M|`.
    pub ones_span: SpanCheck,
    /// Every family with a real base keeps a conjugation-closed set of conjugates.
    pub conjugation_closed: bool,
}

#[derive(Debug, Clone)]
pub struct RootCatalog {
    pub k: usize,
    pub r: f64,
    pub rho1: SurfacePoint,
    pub rho2: SurfacePoint,
    /// `(rho2, alpha*_j, d_{2,j})`, `j = 1..|M|`; empty when the conjugate
    /// assumption fails.
    pub alpha_star: Vec<SurfacePoint>,
    pub rho2_branches: Vec<SurfacePoint>,
    pub rho1_branches: Vec<SurfacePoint>,
    /// Conjugate families of the `rho_{2,j}` points, in the same order.
    pub rho2_branch_families: Vec<ConjugateFamily>,
    pub circle_families: Vec<CircleFamily>,
    pub flags: AssumptionFlags,
}

impl RootCatalog {
    pub fn num_regimes(&self) -> usize {
        self.rho2.d.len()
    }

    /// Number of boundary-determined harmonic functions the catalog supports:
    /// the limit function, `h_rho1`, the `rho_{1,j}` functions and one per
    /// circle family.
    pub fn harmonic_function_count(&self) -> usize {
        1 + 1 + self.rho1_branches.len() + self.circle_families.len()
    }

    pub fn rho1_value(&self) -> f64 {
        self.rho1.beta.re
    }

    pub fn rho2_value(&self) -> f64 {
        self.rho2.beta.re
    }

    /// Every point in the catalog, in a fixed order.
    pub fn all_points(&self) -> Vec<&SurfacePoint> {
        let mut v: Vec<&SurfacePoint> = vec![&self.rho1, &self.rho2];
        v.extend(self.alpha_star.iter());
        v.extend(self.rho2_branches.iter());
        v.extend(self.rho1_branches.iter());
        for f in &self.rho2_branch_families {
            v.extend(f.conjugates.iter());
        }
        for c in &self.circle_families {
            v.push(&c.family.base);
            v.extend(c.family.conjugates.iter());
        }
        v
    }
}

fn real_point(params: &ModelParams, beta: f64, alpha: f64, branch: usize) -> Result<SurfacePoint> {
    let a = real_char_matrix(params, beta, alpha);
    let ev = real_eigenvalues(&a)?;
    let lam = ev[branch - 1];
    let n = params.num_regimes();
    let shifted = (a - DMatrix::<f64>::identity(n, n) * lam).map(c64);
    let (v, _) = linalg::null_vector(&shifted)?;
    let d = linalg::normalize_max(&v).map(|z| c64(z.re));
    Ok(SurfacePoint::with_vector(params, c64(beta), c64(alpha), d, Some(branch)))
}

/// Largest root of `f` below `top`, found by scanning downward to `bottom`
/// for the first sign change from `<= 0` to `> 0`, then bisecting.
fn descending_root<F: Fn(f64) -> Result<f64>>(f: F, top: f64, bottom: f64) -> Result<Option<f64>> {
    let step = (top - bottom) / SCAN_POINTS as f64;
    let mut hi = top;
    let mut fhi = f(hi)?;
    if fhi > 0.0 {
        return Ok(None);
    }
    for i in 1..=SCAN_POINTS {
        let lo = top - step * i as f64;
        let flo = f(lo)?;
        if flo > 0.0 {
            let g = |x: f64| f(x).unwrap_or(f64::NAN);
            return Ok(Some(bisect(g, lo, hi, BISECTION_TOL)));
        }
        hi = lo;
        fhi = flo;
    }
    let _ = fhi;
    Ok(None)
}

fn require_stable(params: &ModelParams) -> Result<()> {
    let r = check_stability(params);
    if r.is_stable() {
        Ok(())
    } else {
        Err(Error::Unstable(r.stability_margins[0], r.stability_margins[1]))
    }
}

/// `(rho1, rho1, d1)` with `Lambda_1(rho1, rho1) = 1`.
pub fn find_rho1(params: &ModelParams) -> Result<SurfacePoint> {
    require_stable(params)?;
    let f = |b: f64| branch_eigenvalue(params, b, b, 1).map(|v| v - 1.0);
    let r = descending_root(f, 1.0 - SCAN_EDGE, SCAN_EDGE)?.ok_or_else(|| {
        Error::numeric("rho1", "no sign change of Lambda_1(b,b) - 1 on (0,1); contradicts stability")
    })?;
    real_point(params, r, r, 1)
}

/// `(rho2, 1, d2)` with `Lambda_1(rho2, 1) = 1`.
pub fn find_rho2(params: &ModelParams) -> Result<SurfacePoint> {
    require_stable(params)?;
    let f = |b: f64| branch_eigenvalue(params, b, 1.0, 1).map(|v| v - 1.0);
    let r = descending_root(f, 1.0 - SCAN_EDGE, SCAN_EDGE)?.ok_or_else(|| {
        Error::numeric("rho2", "no sign change of Lambda_1(b,1) - 1 on (0,1); contradicts stability")
    })?;
    real_point(params, r, 1.0, 1)
}

/// `v(i) = det((I - G)^{i,i})`, a left eigenvector of a stochastic `G`.
pub fn minor_determinant_vector(g: &DMatrix<f64>) -> DVector<f64> {
    let n = g.nrows();
    let a = DMatrix::<f64>::identity(n, n) - g;
    DVector::from_fn(n, |i, _| {
        if n == 1 {
            1.0
        } else {
            a.clone().remove_row(i).remove_column(i).determinant()
        }
    })
}

/// The signed sum of the conjugate assumption and whether it is negative.
pub fn check_conj_assumption(params: &ModelParams, rho2: f64) -> (f64, bool) {
    let a = real_char_matrix(params, rho2, 1.0);
    let minors = minor_determinant_vector(&a);
    let p = params.p();
    let sum: f64 = (0..params.num_regimes())
        .map(|m| (rho2 * params.mu2()[m] - params.mu1()[m]) * p[(m, m)] * minors[m])
        .sum();
    (sum, sum < 0.0)
}

/// `(rho2, alpha*_1, d_{2,1})`, the other point of branch 1 on `beta = rho2`.
pub fn find_alpha_star1(params: &ModelParams, rho2: f64) -> Result<SurfacePoint> {
    let (sum, ok) = check_conj_assumption(params, rho2);
    if !ok {
        return Err(Error::Unsupported(format!(
            "conjugate assumption fails (sum {sum:.6e} is not negative)"
        )));
    }
    let f = |a: f64| branch_eigenvalue(params, rho2, a, 1).map(|v| v - 1.0);
    let r = descending_root(f, 1.0 - SCAN_EDGE, SCAN_EDGE * 1e-3)?
        .ok_or_else(|| Error::numeric("alpha*_1", "no sign change of Lambda_1(rho2, a) - 1 below 1"))?;
    real_point(params, rho2, r, 1)
}

/// Which line the branch roots live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line {
    /// `alpha = 1`, roots below `rho2`
    AlphaOne,
    /// `alpha = beta`, roots below `rho1`
    Diagonal,
}

fn scan_branch<F>(params: &ModelParams, j: usize, top: f64, eval: F) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let f = |x: f64| -> Result<f64> {
        let (b, a) = eval(x);
        let ev = real_eigenvalues(&real_char_matrix(params, b, a))?;
        let gap = min_gap(&ev);
        if gap < EIGEN_GAP_TOL {
            return Err(Error::BranchCrossing {
                j: j - 1,
                next: j,
                gap,
                beta: b,
                alpha: a,
            });
        }
        Ok(ev[j - 1] - 1.0)
    };
    descending_root(f, top * (1.0 - 1e-9), top * 1e-6)?
        .ok_or_else(|| Error::numeric(format!("branch {j} root"), "no sign change below the Perron root"))
}

/// Roots of `Lambda_j = 1`, `j = 2..|M|`, on the requested line.
pub fn find_branch_roots(params: &ModelParams, line: Line) -> Result<Vec<SurfacePoint>> {
    let n = params.num_regimes();
    if n == 1 {
        return Ok(Vec::new());
    }
    let top = match line {
        Line::AlphaOne => find_rho2(params)?.beta.re,
        Line::Diagonal => find_rho1(params)?.beta.re,
    };
    (2..=n)
        .map(|j| {
            let r = match line {
                Line::AlphaOne => scan_branch(params, j, top, |x| (x, 1.0))?,
                Line::Diagonal => scan_branch(params, j, top, |x| (x, x))?,
            };
            match line {
                Line::AlphaOne => real_point(params, r, 1.0, j),
                Line::Diagonal => real_point(params, r, r, j),
            }
        })
        .collect()
}

/// Result of [`conjugate_alphas`] or [`betas_for_alpha`].
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<C64>,
    pub multiplicities: Vec<usize>,
    pub degree_drop: bool,
}

fn polynomial_roots(params: &ModelParams, fixed: Fixed) -> Result<RootSet> {
    let coeffs = characteristic::char_poly_in(params, fixed)?;
    let mut raw = linalg::poly_roots(&coeffs)?;
    // The interpolated coefficients carry absolute error of order eps times
    // their size, which is a large relative error for roots far inside the
    // unit disk. Newton on the directly evaluated determinant, with the
    // interpolant's derivative as slope, restores them.
    let slope: Vec<C64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect();
    for r in raw.iter_mut() {
        let mut f = characteristic::scaled_det(params, fixed, *r).norm();
        for _ in 0..8 {
            let d = linalg::horner(&slope, *r);
            if f == 0.0 || d.norm() == 0.0 {
                break;
            }
            let next = *r - characteristic::scaled_det(params, fixed, *r) / d;
            let fnext = characteristic::scaled_det(params, fixed, next).norm();
            if !(fnext < f) {
                break;
            }
            *r = next;
            f = fnext;
        }
    }
    let fixed_value = match fixed {
        Fixed::Beta(z) | Fixed::Alpha(z) => z,
    };
    if fixed_value.im == 0.0 {
        // real coefficients: roots are real or come in conjugate pairs
        for r in raw.iter_mut() {
            if r.im.abs() <= 1e-10 * (1.0 + r.norm()) {
                r.im = 0.0;
            }
        }
    }
    let degree_drop = raw.len() < 2 * params.num_regimes();
    let merged = linalg::merge_close(&raw, MERGE_TOL);
    Ok(RootSet {
        roots: merged.iter().map(|m| m.0).collect(),
        multiplicities: merged.iter().map(|m| m.1).collect(),
        degree_drop,
    })
}

/// All `alpha` with `det(I - A(beta, alpha)) = 0`, each with its eigenvector.
pub fn conjugate_alphas(params: &ModelParams, beta: C64) -> Result<Vec<SurfacePoint>> {
    if beta == c64(0.0) {
        return Err(Error::Domain("beta must be nonzero".into()));
    }
    let set = polynomial_roots(params, Fixed::Beta(beta))?;
    set.roots
        .iter()
        .map(|&a| SurfacePoint::at(params, beta, a, None))
        .collect()
}

/// Roots in `beta` at fixed `alpha0`, filtered to the open unit disk and sorted
/// by modulus.
pub fn betas_for_alpha(params: &ModelParams, alpha0: C64) -> Result<Vec<C64>> {
    if alpha0 == c64(0.0) {
        return Err(Error::Domain("alpha must be nonzero".into()));
    }
    let set = polynomial_roots(params, Fixed::Alpha(alpha0))?;
    let mut inside: Vec<C64> = set.roots.into_iter().filter(|b| b.norm() < 1.0).collect();
    sort_by_modulus(&mut inside, |z| *z);
    let need = params.num_regimes();
    if inside.len() < need {
        return Err(Error::InsufficientRoots {
            context: format!("beta roots at alpha = {alpha0}"),
            found: inside.len(),
            needed: need,
        });
    }
    Ok(inside)
}

/// Order by modulus; near-equal moduli (conjugate pairs) by imaginary part.
fn sort_by_modulus<T, F: Fn(&T) -> C64>(v: &mut [T], key: F) {
    v.sort_by(|x, y| {
        let (a, b) = (key(x), key(y));
        if (a.norm() - b.norm()).abs() <= 1e-10 * (1.0 + a.norm()) {
            a.im.partial_cmp(&b.im).unwrap()
        } else {
            a.norm().partial_cmp(&b.norm()).unwrap()
        }
    });
}

/// In-disk conjugates of `base`, keeping the `|M|` of smallest modulus.
fn select_conjugates(params: &ModelParams, base: &SurfacePoint) -> Result<(Vec<SurfacePoint>, usize)> {
    let all = conjugate_alphas(params, base.beta)?;
    let mut inside: Vec<SurfacePoint> = all
        .into_iter()
        .filter(|p| p.alpha.norm() < 1.0 && (p.alpha - base.alpha).norm() > EXCLUDE_TOL)
        .collect();
    let candidates = inside.len();
    sort_by_modulus(&mut inside, |p| p.alpha);
    inside.truncate(params.num_regimes());
    Ok((inside, candidates))
}

fn family_for(params: &ModelParams, base: SurfacePoint) -> Result<ConjugateFamily> {
    let (conjugates, candidates) = select_conjugates(params, &base)?;
    Ok(ConjugateFamily {
        base,
        conjugates,
        candidates,
    })
}

/// Remaining real conjugates `alpha*_j` in `(0, alpha*_1)`, from branch `j`.
fn alpha_star_rest(params: &ModelParams, rho2: f64, a1: f64) -> Result<Vec<SurfacePoint>> {
    (2..=params.num_regimes())
        .map(|j| {
            let r = scan_branch(params, j, a1, |x| (rho2, x))?;
            real_point(params, rho2, r, j)
        })
        .collect()
}

/// Per-regime boundary defect `P(m,m) mu2(m) d(m) (1 - beta/alpha)`.
pub fn c_vector(params: &ModelParams, point: &SurfacePoint) -> DVector<C64> {
    let p = params.p();
    let factor = c64(1.0) - point.beta / point.alpha;
    DVector::from_fn(params.num_regimes(), |m, _| {
        point.d[m] * p[(m, m)] * params.mu2()[m] * factor
    })
}

pub fn span_check(columns: &[DVector<C64>], target: &DVector<C64>) -> SpanCheck {
    let rows = target.len();
    if columns.is_empty() {
        let residual = target.camax();
        return SpanCheck {
            rank: 0,
            columns: 0,
            residual,
            ok: residual <= 1e-12,
        };
    }
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-13 * rows.max(columns.len()) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let x = svd.solve(target, tol).unwrap_or_else(|_| DVector::zeros(columns.len()));
    let residual = (a * x - target).camax();
    SpanCheck {
        rank,
        columns: columns.len(),
        residual,
        ok: rank == columns.len() && residual <= 1e-9 * (1.0 + target.camax()),
    }
}

fn family_span(params: &ModelParams, f: &ConjugateFamily) -> SpanCheck {
    let cols: Vec<DVector<C64>> = f.conjugates.iter().map(|p| c_vector(params, p)).collect();
    span_check(&cols, &c_vector(params, &f.base))
}

fn closed_under_conjugation(f: &ConjugateFamily) -> bool {
    if f.base.beta.im != 0.0 || f.base.alpha.im != 0.0 {
        return true;
    }
    f.conjugates.iter().all(|p| {
        f.conjugates
            .iter()
            .any(|q| (q.alpha - p.alpha.conj()).norm() <= 1e-9 * (1.0 + p.alpha.norm()))
    })
}

/// Every distinguished point plus `K` circle families at radius `R`.
pub fn build_root_catalog(params: &ModelParams, k: usize, r: f64) -> Result<RootCatalog> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("R must lie in (0,1), got {r}")));
    }
    let rho1 = find_rho1(params)?;
    let rho2 = find_rho2(params)?;
    let r2 = rho2.beta.re;
    let (conj_sum, conj) = check_conj_assumption(params, r2);
    let alpha_star = if conj {
        let first = find_alpha_star1(params, r2)?;
        let rest = alpha_star_rest(params, r2, first.alpha.re)?;
        std::iter::once(first).chain(rest).collect()
    } else {
        Vec::new()
    };
    let rho2_branches = find_branch_roots(params, Line::AlphaOne)?;
    let rho1_branches = find_branch_roots(params, Line::Diagonal)?;
    let rho2_branch_families = rho2_branches
        .iter()
        .map(|p| family_for(params, p.clone()))
        .collect::<Result<Vec<_>>>()?;

    let n = params.num_regimes();
    let per_k: Vec<Result<Vec<CircleFamily>>> = (1..=k)
        .into_par_iter()
        .map(|kk| {
            let alpha0 = C64::from_polar(r, kk as f64 * 2.0 * PI / (k as f64 + 1.0));
            let betas = betas_for_alpha(params, alpha0)?;
            betas
                .into_iter()
                .take(n)
                .enumerate()
                .map(|(j, beta)| {
                    let base = SurfacePoint::at(params, beta, alpha0, None)?;
                    Ok(CircleFamily {
                        k: kk,
                        j: j + 1,
                        family: family_for(params, base)?,
                    })
                })
                .collect()
        })
        .collect();
    let mut circle_families = Vec::new();
    for fam in per_k {
        circle_families.extend(fam?);
    }

    let rho2_span = conj.then(|| {
        let cols: Vec<DVector<C64>> = alpha_star.iter().map(|p| c_vector(params, p)).collect();
        span_check(&cols, &c_vector(params, &rho2))
    });
    let mut ones_cols = vec![rho2.d.clone()];
    ones_cols.extend(rho2_branches.iter().map(|p| p.d.clone()));
    let ones = DVector::from_element(n, c64(1.0));
    let conjugation_closed = rho2_branch_families
        .iter()
        .chain(circle_families.iter().map(|c| &c.family))
        .all(closed_under_conjugation);
    let flags = AssumptionFlags {
        conj_sum,
        conj,
        rho_distinct: (rho1.beta.re - r2).abs() > MERGE_TOL,
        rho2_span,
        branch_spans: rho2_branch_families.iter().map(|f| family_span(params, f)).collect(),
        circle_spans: circle_families.iter().map(|c| family_span(params, &c.family)).collect(),
        ones_span: span_check(&ones_cols, &ones),
        conjugation_closed,
    };
    Ok(RootCatalog {
        k,
        r,
        rho1,
        rho2,
        alpha_star,
        rho2_branches,
        rho1_branches,
        rho2_branch_families,
        circle_families,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> ModelParams {
        ModelParams::from_rows(&[vec![1.0]], &[0.2], &[0.3], &[0.5]).unwrap()
    }

    #[test]
    fn scalar_closed_forms() {
        let p = scalar();
        assert!((find_rho1(&p).unwrap().beta.re - 2.0 / 3.0).abs() < 1e-12);
        assert!((find_rho2(&p).unwrap().beta.re - 0.4).abs() < 1e-12);
        let a = find_alpha_star1(&p, 0.4).unwrap();
        assert!((a.alpha.re - 2.0 / 3.0).abs() < 1e-12);
        let (sum, ok) = check_conj_assumption(&p, 0.4);
        assert!(ok);
        assert!((sum + 0.1).abs() < 1e-12);
    }

    #[test]
    fn scalar_conjugates_and_betas() {
        let p = scalar();
        let mut al: Vec<f64> = conjugate_alphas(&p, c64(0.4))
            .unwrap()
            .iter()
            .map(|s| s.alpha.re)
            .collect();
        al.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((al[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((al[1] - 1.0).abs() < 1e-12);
        let b = betas_for_alpha(&p, c64(1.0)).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0] - c64(0.4)).norm() < 1e-12);
    }

    #[test]
    fn two_state_minor_vector() {
        let (a, b) = (0.3, 0.1);
        let g = DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]);
        let v = minor_determinant_vector(&g);
        assert!((v[0] - b).abs() < 1e-15);
        assert!((v[1] - a).abs() < 1e-15);
    }

    #[test]
    fn scalar_catalog_without_circles() {
        let c = build_root_catalog(&scalar(), 0, 0.7).unwrap();
        assert_eq!(c.all_points().len(), 3);
        assert_eq!(c.harmonic_function_count(), 2);
        assert!(c.rho2_branches.is_empty());
    }

    #[test]
    fn unstable_model_is_rejected() {
        let p = ModelParams::from_rows(&[vec![1.0]], &[0.6], &[0.2], &[0.2]).unwrap();
        assert!(matches!(find_rho1(&p), Err(Error::Unstable(..))));
    }
}
