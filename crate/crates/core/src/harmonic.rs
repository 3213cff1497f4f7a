//! Harmonic functions of the limit process built from surface points, the
//! approximants assembled from them, and the certified bounds.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, C64};
use crate::model::ModelParams;
use crate::roots::{c_vector, ConjugateFamily, RootCatalog, SurfacePoint};

/// Relative tail tolerance for every scan of the infinite diagonal boundary.
pub const TAIL_RTOL: f64 = 1e-9;
/// Margin over the smallest admissible `c0`.
pub const C0_MARGIN: f64 = 1.1;
/// Above this condition number the boundary system is treated as singular.
pub const COND_ABORT: f64 = 1e14;
const MAX_SCAN: usize = 1_000_000;
const GRID_BASE: f64 = 1.0 / 1048576.0;
const GRID_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HarmonicKind {
    Harmonic,
    Superharmonic,
    Subharmonic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisTerm {
    pub point: SurfacePoint,
    pub weight: C64,
}

/// `h(y, m) = sum_i w_i beta_i^{y1 - y2} alpha_i^{y2} d_i(m)` on `Z x Z_+`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFn {
    terms: Vec<BasisTerm>,
    kind: HarmonicKind,
    boundary_determined: bool,
}

/// `beta^{y1 - y2} alpha^{y2} d(m)`.
pub fn eval_basis(point: &SurfacePoint, y1: i64, y2: i64, m: usize) -> Result<C64> {
    if y2 < 0 {
        return Err(Error::Domain("y2 must be nonnegative".into()));
    }
    let e = y1 - y2;
    if e < 0 && point.beta == c64(0.0) {
        return Err(Error::Domain("beta = 0 with a negative exponent".into()));
    }
    Ok(basis(point, y1, y2, m))
}

#[inline]
fn basis(point: &SurfacePoint, y1: i64, y2: i64, m: usize) -> C64 {
    point.beta.powi((y1 - y2) as i32) * point.alpha.powi(y2 as i32) * point.d[m]
}

fn is_one(z: C64) -> bool {
    (z - c64(1.0)).norm() <= 1e-12
}

impl HarmonicFn {
    /// Boundary-determined functions may only use `|beta| < 1`, `|alpha| <= 1`.
    pub fn new(terms: Vec<BasisTerm>, kind: HarmonicKind, boundary_determined: bool) -> Result<Self> {
        if boundary_determined {
            if let Some(t) = terms
                .iter()
                .find(|t| t.point.beta.norm() >= 1.0 || t.point.alpha.norm() > 1.0 + 1e-12)
            {
                return Err(Error::Domain(format!(
                    "term (beta={}, alpha={}) cannot appear in a boundary-determined function",
                    t.point.beta, t.point.alpha
                )));
            }
        }
        Ok(HarmonicFn {
            terms,
            kind,
            boundary_determined,
        })
    }

    pub fn single(point: SurfacePoint, kind: HarmonicKind, boundary_determined: bool) -> Result<Self> {
        Self::new(
            vec![BasisTerm {
                point,
                weight: c64(1.0),
            }],
            kind,
            boundary_determined,
        )
    }

    /// Flatten `sum_i s_i h_i` into one term list.
    pub fn combine(parts: &[(C64, &HarmonicFn)], kind: HarmonicKind, boundary_determined: bool) -> Result<Self> {
        let terms = parts
            .iter()
            .flat_map(|(s, h)| {
                h.terms.iter().map(move |t| BasisTerm {
                    point: t.point.clone(),
                    weight: t.weight * s,
                })
            })
            .collect();
        Self::new(terms, kind, boundary_determined)
    }

    pub fn terms(&self) -> &[BasisTerm] {
        &self.terms
    }

    pub fn kind(&self) -> HarmonicKind {
        self.kind
    }

    pub fn is_boundary_determined(&self) -> bool {
        self.boundary_determined
    }

    pub fn eval(&self, y1: i64, y2: i64, m: usize) -> C64 {
        self.terms
            .iter()
            .map(|t| t.weight * basis(&t.point, y1, y2, m))
            .sum()
    }

    /// Value on the diagonal boundary, where `beta` drops out.
    pub fn boundary(&self, k: i64, m: usize) -> C64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.point.alpha.powi(k as i32) * t.point.d[m])
            .sum()
    }

    /// Value at `T_n(x) = (n - x1, x2)`.
    pub fn eval_at_exit(&self, n: i64, x1: i64, x2: i64, m: usize) -> C64 {
        self.eval(n - x1, x2, m)
    }

    /// Real part evaluation.
    pub fn real_part(&self) -> RealPart<'_> {
        RealPart(self)
    }

    fn num_regimes(&self) -> usize {
        self.terms.first().map_or(0, |t| t.point.d.len())
    }
}

/// `Re h`, the quantity used as an approximation.
#[derive(Debug, Clone, Copy)]
pub struct RealPart<'a>(pub &'a HarmonicFn);

impl RealPart<'_> {
    pub fn eval(&self, y1: i64, y2: i64, m: usize) -> f64 {
        self.0.eval(y1, y2, m).re
    }

    pub fn eval_at_exit(&self, n: i64, x1: i64, x2: i64, m: usize) -> f64 {
        self.0.eval_at_exit(n, x1, x2, m).re
    }
}

/// `E[h(Y_1, M_1)] - h(y, m)` by enumerating the one-step law of `(Y, M)`.
pub fn one_step_residual(params: &ModelParams, h: &HarmonicFn, y1: i64, y2: i64, m: usize) -> C64 {
    let p = params.p();
    let mut e = c64(0.0);
    for n in 0..params.num_regimes() {
        if n != m {
            e += h.eval(y1, y2, n) * p[(m, n)];
        }
    }
    let here = h.eval(y1, y2, m);
    let down = if y2 > 0 { h.eval(y1, y2 - 1, m) } else { here };
    let jumps = h.eval(y1 - 1, y2, m) * params.lam()[m]
        + h.eval(y1 + 1, y2 + 1, m) * params.mu1()[m]
        + down * params.mu2()[m];
    e + jumps * p[(m, m)] - here
}

/// `[(rho1, rho1, d1)]`, harmonic on all of `Z x Z_+`.
pub fn build_h_rho1(catalog: &RootCatalog) -> Result<HarmonicFn> {
    HarmonicFn::single(catalog.rho1.clone(), HarmonicKind::Harmonic, true)
}

fn real_vec(v: &DVector<C64>) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

fn vmax(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn vmin(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn require_conj(catalog: &RootCatalog) -> Result<()> {
    if !catalog.flags.conj {
        return Err(Error::Unsupported(format!(
            "conjugate assumption fails (sum {:.6e} is not negative); bounds unavailable",
            catalog.flags.conj_sum
        )));
    }
    if !catalog.flags.rho_distinct {
        return Err(Error::Unsupported("rho1 = rho2 is not supported".into()));
    }
    Ok(())
}

/// `h_rho2 = [(rho2,1,d2)] + c0 [(rho2, alpha*_1, d_{2,1})]`, superharmonic.
pub fn build_h_rho2_super(params: &ModelParams, catalog: &RootCatalog) -> Result<(HarmonicFn, f64)> {
    require_conj(catalog)?;
    let star = &catalog.alpha_star[0];
    let c = real_vec(&c_vector(params, &catalog.rho2));
    let cs = real_vec(&c_vector(params, star));
    let dmax = vmax(&c);
    let c0 = if star.alpha.re < catalog.rho2.beta.re {
        -C0_MARGIN * dmax / vmax(&cs)
    } else {
        -C0_MARGIN * dmax / vmin(&cs)
    };
    let h = HarmonicFn::new(
        vec![
            BasisTerm {
                point: catalog.rho2.clone(),
                weight: c64(1.0),
            },
            BasisTerm {
                point: star.clone(),
                weight: c64(c0),
            },
        ],
        HarmonicKind::Superharmonic,
        false,
    )?;
    Ok((h, c0))
}

/// Constant (`alpha = 1`) part of the boundary values and the decaying terms
/// as `(|w| ||d||, |alpha|)`.
fn boundary_parts(h: &HarmonicFn) -> Result<(Vec<C64>, Vec<(f64, f64)>)> {
    let n = h.num_regimes();
    let mut constant = vec![c64(0.0); n];
    let mut decaying = Vec::new();
    for t in h.terms() {
        if is_one(t.point.alpha) {
            for (m, c) in constant.iter_mut().enumerate() {
                *c += t.weight * t.point.d[m];
            }
        } else if t.point.alpha.norm() < 1.0 {
            let amp = t.weight.norm() * t.point.d.iter().map(|z| z.norm()).fold(0.0, f64::max);
            decaying.push((amp, t.point.alpha.norm()));
        } else {
            return Err(Error::BoundUnavailable(format!(
                "non-constant term with |alpha| = {} >= 1",
                t.point.alpha.norm()
            )));
        }
    }
    Ok((constant, decaying))
}

fn tail(decaying: &[(f64, f64)], k: usize) -> f64 {
    decaying.iter().map(|&(a, r)| a * r.powi(k as i32)).sum()
}

/// First `k` with the boundary tail bound at most `margin`.
fn tail_start(decaying: &[(f64, f64)], margin: f64) -> usize {
    (0..MAX_SCAN).find(|&k| tail(decaying, k) <= margin).unwrap_or(MAX_SCAN)
}

/// Certified extrema of a real function over the diagonal boundary.
#[derive(Debug, Clone, Copy)]
struct BoundaryRange {
    lower: f64,
    upper: f64,
    kmax: usize,
}

fn real_boundary_range(h: &HarmonicFn, tail_rtol: f64) -> Result<BoundaryRange> {
    let (constant, decaying) = boundary_parts(h)?;
    let n = h.num_regimes();
    let cre: Vec<f64> = constant.iter().map(|z| z.re).collect();
    let scale = cre.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut k = 0;
    loop {
        for m in 0..n {
            let v = h.boundary(k as i64, m).re;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let t = tail(&decaying, k + 1);
        if t <= tail_rtol * scale.max(hi.abs()).max(lo.abs()) || k >= MAX_SCAN {
            return Ok(BoundaryRange {
                lower: lo.min(vmin(&cre) - t),
                upper: hi.max(vmax(&cre) + t),
                kmax: k,
            });
        }
        k += 1;
    }
}

/// Constants of the upper and relative-error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c9: Option<f64>,
    pub c10: Option<f64>,
    pub c11: Option<f64>,
    pub c_star: Option<f64>,
    pub tail_cutoff: usize,
}

/// First value on the grid `{0, base * 2^i}` satisfying `ok`.
fn grid_search<F: Fn(f64) -> bool>(ok: F) -> Option<f64> {
    if ok(0.0) {
        return Some(0.0);
    }
    (0..GRID_STEPS)
        .map(|i| GRID_BASE * 2f64.powi(i as i32))
        .find(|&c| ok(c))
}

/// Lift `h` by `c * h_rho1` so it stays above `threshold` on `k <= k0`.
fn lift_constant(h: &HarmonicFn, hr1: &HarmonicFn, k0: usize, threshold: f64, what: &str) -> Result<f64> {
    let n = h.num_regimes();
    grid_search(|c| {
        (0..=k0).all(|k| {
            (0..n).all(|m| {
                h.boundary(k as i64, m).re + c * hr1.boundary(k as i64, m).re >= threshold
            })
        })
    })
    .ok_or_else(|| Error::numeric(what, "no feasible lifting constant on the search grid"))
}

/// `c0, c1, c2` and the upper bound `(1/c2)(h_rho2 + c1 h_rho1)` for
/// `P(tau < infinity)`.
pub fn build_bound_certificate(params: &ModelParams, catalog: &RootCatalog) -> Result<(BoundCertificate, HarmonicFn)> {
    let (hr2, c0) = build_h_rho2_super(params, catalog)?;
    let hr1 = build_h_rho1(catalog)?;
    let d2 = catalog.rho2.d_real();
    let threshold = vmin(&d2) / 2.0;
    let c1 = if catalog.alpha_star[0].alpha.re < catalog.rho2.beta.re {
        0.0
    } else {
        let (_, decaying) = boundary_parts(&hr2)?;
        let k0 = tail_start(&decaying, vmin(&d2) - threshold);
        lift_constant(&hr2, &hr1, k0, threshold, "c1")?
    };
    let g = HarmonicFn::combine(
        &[(c64(1.0), &hr2), (c64(c1), &hr1)],
        HarmonicKind::Superharmonic,
        false,
    )?;
    let range = real_boundary_range(&g, TAIL_RTOL)?;
    let c2 = range.lower;
    if !(c2 > 0.0) {
        return Err(Error::numeric("c2", format!("boundary minimum {c2:.3e} is not positive")));
    }
    let upper = HarmonicFn::combine(&[(c64(1.0 / c2), &g)], HarmonicKind::Superharmonic, false)?;
    let cert = BoundCertificate {
        c0,
        c1,
        c2,
        c9: None,
        c10: None,
        c11: None,
        c_star: None,
        tail_cutoff: range.kmax,
    };
    Ok((cert, upper))
}

/// `[base] + sum_l b_l [conj_l]` with weights cancelling the boundary defect.
pub fn conjugate_combination(params: &ModelParams, family: &ConjugateFamily, context: &str) -> Result<HarmonicFn> {
    let n = params.num_regimes();
    let cols: Vec<DVector<C64>> = family.conjugates.iter().map(|p| c_vector(params, p)).collect();
    if cols.is_empty() {
        return Err(Error::RankDeficient {
            context: context.into(),
            rank: 0,
            cols: 0,
            residual: c_vector(params, &family.base).camax(),
        });
    }
    let a = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let rhs = -c_vector(params, &family.base);
    let sol = linalg::solve_checked(context, &a, &rhs)?;
    let mut terms = vec![BasisTerm {
        point: family.base.clone(),
        weight: c64(1.0),
    }];
    terms.extend(family.conjugates.iter().zip(sol.x.iter()).map(|(p, &w)| BasisTerm {
        point: p.clone(),
        weight: w,
    }));
    HarmonicFn::new(terms, HarmonicKind::Harmonic, true)
}

fn rho2_family(catalog: &RootCatalog) -> ConjugateFamily {
    ConjugateFamily {
        base: catalog.rho2.clone(),
        conjugates: catalog.alpha_star.clone(),
        candidates: catalog.alpha_star.len(),
    }
}

/// The harmonic completion of `(rho2, 1, d2)` by its `alpha*_j` conjugates.
pub fn build_frak_h_rho2(params: &ModelParams, catalog: &RootCatalog) -> Result<HarmonicFn> {
    require_conj(catalog)?;
    conjugate_combination(params, &rho2_family(catalog), "rho2 conjugate weights")
}

/// `h^{a,0} = c11 (frak_h_rho2 + c10 h_rho1)` with its certificate.
pub fn build_h_a0(params: &ModelParams, catalog: &RootCatalog) -> Result<(HarmonicFn, BoundCertificate)> {
    let (mut cert, _) = build_bound_certificate(params, catalog)?;
    let frak = build_frak_h_rho2(params, catalog)?;
    let hr1 = build_h_rho1(catalog)?;
    let d2 = catalog.rho2.d_real();
    let threshold = vmin(&d2) / 2.0;
    let (_, decaying) = boundary_parts(&frak)?;
    let k0 = tail_start(&decaying, vmin(&d2) - threshold);
    let c10 = lift_constant(&frak, &hr1, k0, threshold, "c10")?;
    let c11 = 1.0 / threshold;
    let h = HarmonicFn::combine(
        &[(c64(c11), &frak), (c64(c11 * c10), &hr1)],
        HarmonicKind::Harmonic,
        true,
    )?;
    let range = real_boundary_range(&h, TAIL_RTOL)?;
    cert.c9 = Some(range.upper);
    cert.c10 = Some(c10);
    cert.c11 = Some(c11);
    cert.c_star = Some(c_star(&h, TAIL_RTOL)?);
    Ok((h, cert))
}

/// The limit function whose diagonal boundary values tend to `1`.
pub fn build_frak_h(params: &ModelParams, catalog: &RootCatalog) -> Result<HarmonicFn> {
    let frak2 = build_frak_h_rho2(params, catalog)?;
    let branches = catalog
        .rho2_branch_families
        .iter()
        .enumerate()
        .map(|(i, f)| conjugate_combination(params, f, &format!("rho2 branch {} conjugate weights", i + 2)))
        .collect::<Result<Vec<_>>>()?;
    let n = params.num_regimes();
    let mut cols = vec![catalog.rho2.d.clone()];
    cols.extend(catalog.rho2_branches.iter().map(|p| p.d.clone()));
    let a = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let ones = DVector::from_element(n, c64(1.0));
    let b2 = linalg::solve_checked("all-ones expansion", &a, &ones)?.x;
    let mut parts: Vec<(C64, &HarmonicFn)> = vec![(b2[0], &frak2)];
    parts.extend(branches.iter().enumerate().map(|(i, h)| (b2[i + 1], h)));
    HarmonicFn::combine(&parts, HarmonicKind::Harmonic, true)
}

/// The fitted approximant and the data of its boundary solve.
#[derive(Debug, Clone)]
pub struct Approximant {
    /// Complex function; its real part is the approximation.
    pub function: HarmonicFn,
    pub frak_h: HarmonicFn,
    /// Coefficients of `h_rho1`, the `rho_{1,j}` terms, then the circle
    /// families in `(k, j)` order.
    pub coefficients: Vec<C64>,
    pub condition: f64,
    pub nodes: usize,
    pub warnings: Vec<String>,
}

impl Approximant {
    pub fn real_part(&self) -> RealPart<'_> {
        self.function.real_part()
    }
}

/// Fit `frak_h + phi_1 h_rho1 + sum phi_j [rho_{1,j}] + sum phi_{kj} frak_h_{kj}`
/// to `1` at the diagonal nodes `y = 0..K` for every regime.
pub fn assemble_ha_k(params: &ModelParams, catalog: &RootCatalog) -> Result<Approximant> {
    let frak = build_frak_h(params, catalog)?;
    let mut columns = vec![build_h_rho1(catalog)?];
    for p in &catalog.rho1_branches {
        columns.push(HarmonicFn::single(p.clone(), HarmonicKind::Harmonic, true)?);
    }
    for c in &catalog.circle_families {
        columns.push(conjugate_combination(
            params,
            &c.family,
            &format!("circle family ({}, {}) conjugate weights", c.k, c.j),
        )?);
    }
    let n = params.num_regimes();
    let nodes = catalog.k + 1;
    let rows = nodes * n;
    if columns.len() != rows {
        return Err(Error::numeric(
            "boundary fit",
            format!("{} unknowns for {} conditions", columns.len(), rows),
        ));
    }
    let a = DMatrix::from_fn(rows, rows, |r, c| columns[c].boundary((r / n) as i64, r % n));
    let rhs = DVector::from_fn(rows, |r, _| c64(1.0) - frak.boundary((r / n) as i64, r % n));
    let cond = linalg::condition_number(&a);
    if cond > COND_ABORT {
        return Err(Error::IllConditioned {
            context: "boundary fit".into(),
            cond,
        });
    }
    let mut warnings = Vec::new();
    if cond > linalg::COND_WARN {
        warnings.push(format!("boundary fit condition number {cond:.3e}"));
    }
    let sol = linalg::solve_checked("boundary fit", &a, &rhs)?;
    let mut parts: Vec<(C64, &HarmonicFn)> = vec![(c64(1.0), &frak)];
    parts.extend(sol.x.iter().zip(columns.iter()).map(|(&w, h)| (w, h)));
    let function = HarmonicFn::combine(&parts, HarmonicKind::Harmonic, true)?;
    Ok(Approximant {
        function,
        frak_h: frak,
        coefficients: sol.x.iter().copied().collect(),
        condition: cond,
        nodes,
        warnings,
    })
}

/// `max_{k >= 0, m} |h(k, k, m) - 1|`.
///
/// The scan stops once the geometric tail bound of the decaying terms drops
/// below `tail_rtol` times the running maximum, so the true supremum is at most
/// the returned value times `1 + 2 tail_rtol`.
pub fn c_star(h: &HarmonicFn, tail_rtol: f64) -> Result<f64> {
    let (_, decaying) = boundary_parts(h)?;
    let n = h.num_regimes();
    let mut best = 0.0f64;
    for k in 0..MAX_SCAN {
        for m in 0..n {
            best = best.max((h.boundary(k as i64, m) - c64(1.0)).norm());
        }
        if tail(&decaying, k + 1) <= tail_rtol * best {
            return Ok(best);
        }
    }
    Ok(best)
}

/// The explicit lower bound for `p_n` and the max function behind it.
#[derive(Debug, Clone)]
pub struct LowerBound {
    n: i64,
    rho1: f64,
    rho2: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    norm: f64,
    offset: f64,
}

impl LowerBound {
    pub fn new(catalog: &RootCatalog, n: usize) -> Self {
        let d1 = catalog.rho1.d_real();
        let d2 = catalog.rho2.d_real();
        let rho1 = catalog.rho1_value();
        let rho2 = catalog.rho2_value();
        let norm = d1.iter().chain(d2.iter()).copied().fold(f64::NEG_INFINITY, f64::max);
        let offset = (rho2.powi(n as i32) * vmax(&d2)).max(rho1.powi(n as i32) * vmax(&d1));
        LowerBound {
            n: n as i64,
            rho1,
            rho2,
            d1,
            d2,
            norm,
            offset,
        }
    }

    /// `rho2^{n - x1 - x2} d2(m)  max  rho1^{n - x1} d1(m)`, subharmonic for `X`.
    pub fn max_function(&self, x1: i64, x2: i64, m: usize) -> f64 {
        let a = self.rho2.powi((self.n - x1 - x2) as i32) * self.d2[m];
        let b = self.rho1.powi((self.n - x1) as i32) * self.d1[m];
        a.max(b)
    }

    /// The subtracted constant: the max function's largest value at the origin.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn value(&self, x1: i64, x2: i64, m: usize) -> f64 {
        (self.max_function(x1, x2, m) - self.offset) / self.norm
    }

    /// `E[g(X_1, M_1)] - g(x, m)` under the constrained `(X, M)` law.
    pub fn x_residual(&self, params: &ModelParams, x1: i64, x2: i64, m: usize) -> f64 {
        x_one_step(params, |a, b, k| self.max_function(a, b, k), x1, x2, m)
    }
}

/// `E[g(X_1, M_1)] - g(x, m)` for the walk on the quarter plane.
pub fn x_one_step<G: Fn(i64, i64, usize) -> f64>(params: &ModelParams, g: G, x1: i64, x2: i64, m: usize) -> f64 {
    let p = params.p();
    let mut e = 0.0;
    for n in 0..params.num_regimes() {
        if n != m {
            e += p[(m, n)] * g(x1, x2, n);
        }
    }
    let here = g(x1, x2, m);
    let serve1 = if x1 > 0 { g(x1 - 1, x2 + 1, m) } else { here };
    let serve2 = if x2 > 0 { g(x1, x2 - 1, m) } else { here };
    e += p[(m, m)] * (params.lam()[m] * g(x1 + 1, x2, m) + params.mu1()[m] * serve1 + params.mu2()[m] * serve2);
    e - here
}

pub fn eval_lower_bound_pn(catalog: &RootCatalog, n: usize, x: (usize, usize), m: usize) -> f64 {
    LowerBound::new(catalog, n).value(x.0 as i64, x.1 as i64, m)
}
