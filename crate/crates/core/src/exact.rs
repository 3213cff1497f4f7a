//! Ground-truth oracles: value iteration for `p_n` and `P(tau < infinity)`,
//! Monte Carlo, and comparison of an approximation against an exact grid.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{HarmonicFn, LowerBound};
use crate::model::ModelParams;
use crate::roots::RootCatalog;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Cells where the lower bound's subtracted constant is at least this
/// fraction of the max function form the near-origin layer.
pub const LAYER_RATIO: f64 = 1e-3;
const PATHS_PER_STREAM: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridDomain {
    /// `{x in Z_+^2 : x1 + x2 <= n}`, indexed by `(x1, x2)`.
    Exit { n: usize },
    /// `{0 <= y1 - y2 <= width, 0 <= y2 <= width}`, indexed by `(y1 - y2, y2)`.
    Strip { width: usize },
}

/// Values on a square `(side x side x |M|)` array; cells outside the domain stay 0.
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityGrid {
    pub domain: GridDomain,
    pub regimes: usize,
    values: Vec<f64>,
    pub iterations: usize,
    /// Largest relative change of any cell during the last sweep.
    pub final_sup_change: f64,
    /// Upper bound on the error introduced by the absorbing truncation faces.
    pub truncation_bound: Option<f64>,
}

impl ProbabilityGrid {
    fn new(domain: GridDomain, regimes: usize) -> Self {
        let side = Self::side_of(domain);
        ProbabilityGrid {
            domain,
            regimes,
            values: vec![0.0; side * side * regimes],
            iterations: 0,
            final_sup_change: 0.0,
            truncation_bound: None,
        }
    }

    fn side_of(domain: GridDomain) -> usize {
        match domain {
            GridDomain::Exit { n } => n + 1,
            GridDomain::Strip { width } => width + 1,
        }
    }

    pub fn side(&self) -> usize {
        Self::side_of(self.domain)
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, m: usize) -> usize {
        (a * self.side() + b) * self.regimes + m
    }

    /// Raw access by grid coordinates.
    pub fn at(&self, a: usize, b: usize, m: usize) -> f64 {
        self.values[self.idx(a, b, m)]
    }

    /// `p_n(x, m)` for an exit grid.
    pub fn get(&self, x1: usize, x2: usize, m: usize) -> Option<f64> {
        match self.domain {
            GridDomain::Exit { n } if x1 + x2 <= n && m < self.regimes => Some(self.at(x1, x2, m)),
            _ => None,
        }
    }

    /// `P_{(y,m)}(tau < infinity)` for a strip grid.
    pub fn get_y(&self, y1: i64, y2: i64, m: usize) -> Option<f64> {
        match self.domain {
            GridDomain::Strip { width } => {
                let u = y1 - y2;
                let w = width as i64;
                if (0..=w).contains(&u) && (0..=w).contains(&y2) && m < self.regimes {
                    Some(self.at(u as usize, y2 as usize, m))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Every cell of the domain as `(a, b, m, value)`.
    pub fn cells(&self) -> Vec<(usize, usize, usize, f64)> {
        let side = self.side();
        let mut out = Vec::new();
        for a in 0..side {
            for b in 0..side {
                if let GridDomain::Exit { n } = self.domain {
                    if a + b > n {
                        continue;
                    }
                }
                for m in 0..self.regimes {
                    out.push((a, b, m, self.at(a, b, m)));
                }
            }
        }
        out
    }
}

/// `(I - D_self - P_offdiag)^{-1}`, the local block solve for one cell type.
fn block_inverse(params: &ModelParams, self_loop: impl Fn(usize) -> f64) -> Result<DMatrix<f64>> {
    let n = params.num_regimes();
    let p = params.p();
    let b = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 - p[(i, i)] * self_loop(i)
        } else {
            -p[(i, j)]
        }
    });
    b.try_inverse()
        .ok_or_else(|| Error::numeric("value iteration", "singular local block"))
}

fn rel_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(f64::MIN_POSITIVE)
}

/// `p_n(x, m) = P(tau_n < tau_0)` on `A_n` by block Gauss-Seidel.
///
/// Each sweep visits the levels `x1 + x2 = n-1, ..., 1` (outermost first) and
/// solves the `|M|` regime equations of a cell jointly. Convergence is declared
/// when no cell changes by more than `tol` relative to its value, so the
/// tiny probabilities near the origin are resolved to the same relative
/// accuracy as the rest.
pub fn solve_pn(params: &ModelParams, n: usize, tol: f64, max_iter: usize) -> Result<ProbabilityGrid> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    let mm = params.num_regimes();
    let (lam, mu1, mu2) = (params.lam(), params.mu1(), params.mu2());
    let pd: Vec<f64> = (0..mm).map(|m| params.p()[(m, m)]).collect();
    let inner = block_inverse(params, |_| 0.0)?;
    let axis1 = block_inverse(params, |m| mu1[m])?;
    let axis2 = block_inverse(params, |m| mu2[m])?;
    let mut g = ProbabilityGrid::new(GridDomain::Exit { n }, mm);
    for x1 in 0..=n {
        for m in 0..mm {
            let i = g.idx(x1, n - x1, m);
            g.values[i] = 1.0;
        }
    }
    let mut rhs = DVector::<f64>::zeros(mm);
    for iter in 1..=max_iter {
        let mut change = 0.0f64;
        for s in (1..n).rev() {
            for x1 in 0..=s {
                let x2 = s - x1;
                for m in 0..mm {
                    let mut r = lam[m] * g.at(x1 + 1, x2, m);
                    if x1 > 0 {
                        r += mu1[m] * g.at(x1 - 1, x2 + 1, m);
                    }
                    if x2 > 0 {
                        r += mu2[m] * g.at(x1, x2 - 1, m);
                    }
                    rhs[m] = pd[m] * r;
                }
                let block = if x1 == 0 {
                    &axis1
                } else if x2 == 0 {
                    &axis2
                } else {
                    &inner
                };
                let new = block * &rhs;
                for m in 0..mm {
                    let i = g.idx(x1, x2, m);
                    change = change.max(rel_change(new[m], g.values[i]));
                    g.values[i] = new[m];
                }
            }
        }
        g.iterations = iter;
        g.final_sup_change = change;
        if change < tol {
            return Ok(g);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        change: g.final_sup_change,
    })
}

/// `P_{(y,m)}(tau < infinity)` on a truncated strip by block Gauss-Seidel.
///
/// Coordinates are `u = y1 - y2` and `y2`. The value is `1` at `u = 0`; the
/// faces `u = width` and `y2 = width` absorb with value `0`, so the result is a
/// lower bound. See [`truncation_certificate`] for the matching error bound.
pub fn solve_tau_inf(params: &ModelParams, width: usize, tol: f64, max_iter: usize) -> Result<ProbabilityGrid> {
    if width < 4 {
        return Err(Error::Domain(format!("strip width must be at least 4, got {width}")));
    }
    let mm = params.num_regimes();
    let (lam, mu1, mu2) = (params.lam(), params.mu1(), params.mu2());
    let pd: Vec<f64> = (0..mm).map(|m| params.p()[(m, m)]).collect();
    let inner = block_inverse(params, |_| 0.0)?;
    let floor = block_inverse(params, |m| mu2[m])?;
    let mut g = ProbabilityGrid::new(GridDomain::Strip { width }, mm);
    for y2 in 0..=width {
        for m in 0..mm {
            let i = g.idx(0, y2, m);
            g.values[i] = 1.0;
        }
    }
    let mut rhs = DVector::<f64>::zeros(mm);
    for iter in 1..=max_iter {
        let mut change = 0.0f64;
        for u in 1..width {
            for y2 in 0..width {
                for m in 0..mm {
                    let mut r = lam[m] * g.at(u - 1, y2, m) + mu1[m] * g.at(u, y2 + 1, m);
                    if y2 > 0 {
                        r += mu2[m] * g.at(u + 1, y2 - 1, m);
                    }
                    rhs[m] = pd[m] * r;
                }
                let block = if y2 == 0 { &floor } else { &inner };
                let new = block * &rhs;
                for m in 0..mm {
                    let i = g.idx(u, y2, m);
                    change = change.max(rel_change(new[m], g.values[i]));
                    g.values[i] = new[m];
                }
            }
        }
        g.iterations = iter;
        g.final_sup_change = change;
        if change < tol {
            return Ok(g);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        change: g.final_sup_change,
    })
}

/// Largest value of the upper bound `upper` over the truncation faces of a
/// strip grid. The truncated solution underestimates `P(tau < infinity)` by at
/// most this amount at every cell.
pub fn truncation_certificate(grid: &ProbabilityGrid, upper: &HarmonicFn) -> Result<f64> {
    let GridDomain::Strip { width } = grid.domain else {
        return Err(Error::Domain("truncation certificate needs a strip grid".into()));
    };
    let w = width as i64;
    let mut best = 0.0f64;
    for m in 0..grid.regimes {
        for y2 in 0..w {
            best = best.max(upper.eval(w + y2, y2, m).re);
        }
        for u in 1..=w {
            best = best.max(upper.eval(u + w, w, m).re);
        }
    }
    Ok(best)
}

/// Outcome of one simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathSample {
    /// Random stream the path was drawn from.
    pub stream: u64,
    pub hit: bool,
    pub steps: u64,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    /// Paths that finished; capped paths are excluded.
    pub paths: u64,
    pub capped: u64,
    pub seed: u64,
}

/// Per-regime samplers for the modulating chain and the jump law.
struct Sampler {
    regime: Vec<WeightedIndex<f64>>,
    jump: Vec<WeightedIndex<f64>>,
}

impl Sampler {
    fn new(params: &ModelParams) -> Result<Self> {
        let mm = params.num_regimes();
        let p = params.p();
        let regime = (0..mm)
            .map(|m| WeightedIndex::new(p.row(m).iter().copied()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::numeric("sampler", e.to_string()))?;
        let jump = (0..mm)
            .map(|m| WeightedIndex::new([params.lam()[m], params.mu1()[m], params.mu2()[m]]))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::numeric("sampler", e.to_string()))?;
        Ok(Sampler { regime, jump })
    }

    fn path<R: Rng>(&self, rng: &mut R, n: usize, start: (usize, usize, usize), cap: u64) -> (bool, u64, bool) {
        let (mut x1, mut x2, mut m) = start;
        let mut steps = 0;
        loop {
            if x1 + x2 >= n {
                return (true, steps, false);
            }
            if x1 == 0 && x2 == 0 {
                return (false, steps, false);
            }
            if steps >= cap {
                return (false, steps, true);
            }
            steps += 1;
            let next = self.regime[m].sample(rng);
            if next != m {
                m = next;
                continue;
            }
            match self.jump[m].sample(rng) {
                0 => x1 += 1,
                1 => {
                    if x1 > 0 {
                        x1 -= 1;
                        x2 += 1;
                    }
                }
                _ => x2 = x2.saturating_sub(1),
            }
        }
    }
}

/// One trajectory from stream `stream` of `seed`.
pub fn simulate_path(
    params: &ModelParams,
    n: usize,
    start: (usize, usize, usize),
    seed: u64,
    stream: u64,
    step_cap: u64,
) -> Result<PathSample> {
    let sampler = Sampler::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (hit, steps, capped) = sampler.path(&mut rng, n, start, step_cap);
    Ok(PathSample {
        stream,
        hit,
        steps,
        capped,
    })
}

/// Monte Carlo estimate of `p_n(x, m)` from `reps` paths.
///
/// Paths are split into blocks of 4096; block `i` uses ChaCha8 stream `i` of
/// `seed`, so the estimate does not depend on thread count. Paths that reach
/// `step_cap` are excluded and counted in `capped`.
pub fn simulate_pn(
    params: &ModelParams,
    n: usize,
    start: (usize, usize, usize),
    reps: u64,
    seed: u64,
    step_cap: u64,
) -> Result<McEstimate> {
    if reps == 0 {
        return Err(Error::Domain("reps must be at least 1".into()));
    }
    if start.2 >= params.num_regimes() || start.0 + start.1 > n {
        return Err(Error::Domain(format!("start {start:?} is outside A_n")));
    }
    let sampler = Sampler::new(params)?;
    let streams = reps.div_ceil(PATHS_PER_STREAM);
    let (hits, paths, capped) = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let count = PATHS_PER_STREAM.min(reps - s * PATHS_PER_STREAM);
            let mut acc = (0u64, 0u64, 0u64);
            for _ in 0..count {
                let (hit, _, cap) = sampler.path(&mut rng, n, start, step_cap);
                if cap {
                    acc.2 += 1;
                } else {
                    acc.1 += 1;
                    acc.0 += hit as u64;
                }
            }
            acc
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    if paths == 0 {
        return Err(Error::numeric("simulation", "every path hit the step cap"));
    }
    let p = hits as f64 / paths as f64;
    Ok(McEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / paths as f64).sqrt(),
        hits,
        paths,
        capped,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorCell {
    pub x1: usize,
    pub x2: usize,
    pub m: usize,
    pub approx: f64,
    pub exact: f64,
    pub abs_err: f64,
    /// `|log approx - log exact| / |log exact|`; `None` when undefined.
    pub log_rel_err: Option<f64>,
    /// Inside the near-origin layer where the lower bound degenerates.
    pub layer: bool,
    /// `x1 = 0` and `x2/n < 1 - log rho1 / log rho2` (requires `rho1 > rho2`).
    pub excluded_theorem: bool,
    /// `x1 = 0` and `1 - x2/n < log rho2 / log rho1` (requires `rho1 > rho2`).
    pub excluded_alt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub cells: usize,
    pub undefined: usize,
    pub max_abs_err: f64,
    pub max_log_rel_err: f64,
    pub argmax: Option<(usize, usize, usize)>,
    pub max_log_rel_err_outside_layer: f64,
    pub layer_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorGrid {
    pub n: usize,
    pub cells: Vec<ErrorCell>,
}

impl ErrorGrid {
    /// Statistics over every cell, or only regime `m`.
    pub fn summary(&self, m: Option<usize>) -> ErrorSummary {
        let mut s = ErrorSummary {
            cells: 0,
            undefined: 0,
            max_abs_err: 0.0,
            max_log_rel_err: 0.0,
            argmax: None,
            max_log_rel_err_outside_layer: 0.0,
            layer_cells: 0,
        };
        for c in self.cells.iter().filter(|c| m.is_none_or(|m| c.m == m)) {
            s.cells += 1;
            s.max_abs_err = s.max_abs_err.max(c.abs_err);
            s.layer_cells += c.layer as usize;
            match c.log_rel_err {
                None => s.undefined += 1,
                Some(e) => {
                    if e > s.max_log_rel_err || s.argmax.is_none() {
                        s.max_log_rel_err = e;
                        s.argmax = Some((c.x1, c.x2, c.m));
                    }
                    if !c.layer {
                        s.max_log_rel_err_outside_layer = s.max_log_rel_err_outside_layer.max(e);
                    }
                }
            }
        }
        s
    }
}

/// Compare `approx(x1, x2, m)`, an approximation of `p_n`, with an exact grid
/// over the interior of `A_n` minus the origin.
pub fn compare_grids<F>(catalog: &RootCatalog, approx: F, exact: &ProbabilityGrid) -> Result<ErrorGrid>
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    let GridDomain::Exit { n } = exact.domain else {
        return Err(Error::Domain("comparison needs an exit grid".into()));
    };
    let lb = LowerBound::new(catalog, n);
    let (r1, r2) = (catalog.rho1_value(), catalog.rho2_value());
    let ordered = r1 > r2;
    let band_thm = 1.0 - r1.ln() / r2.ln();
    let band_alt = r2.ln() / r1.ln();
    let coords: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|x1| (0..n - x1).map(move |x2| (x1, x2)))
        .filter(|&(a, b)| a + b > 0)
        .flat_map(|(a, b)| (0..exact.regimes).map(move |m| (a, b, m)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(x1, x2, m)| {
            let e = exact.at(x1, x2, m);
            let a = approx(x1, x2, m);
            let log_rel_err = if a > 0.0 && e > 0.0 && e != 1.0 {
                Some((a.ln() - e.ln()).abs() / e.ln().abs())
            } else {
                None
            };
            let g = lb.max_function(x1 as i64, x2 as i64, m);
            let s = x2 as f64 / n as f64;
            ErrorCell {
                x1,
                x2,
                m,
                approx: a,
                exact: e,
                abs_err: (a - e).abs(),
                log_rel_err,
                layer: lb.offset() >= LAYER_RATIO * g,
                excluded_theorem: ordered && x1 == 0 && s < band_thm,
                excluded_alt: ordered && x1 == 0 && 1.0 - s < band_alt,
            }
        })
        .collect();
    Ok(ErrorGrid { n, cells })
}
