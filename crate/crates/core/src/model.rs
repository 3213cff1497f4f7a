//! Model parameters, input validation, stationary analysis and stability.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub const ROW_SUM_TOL: f64 = 1e-10;
pub const RATE_SUM_TOL: f64 = 1e-10;

/// Modulating transition matrix and per-regime jump probabilities.
///
/// Given no regime switch, regime `m` moves the walk by `(1,0)` with
/// probability `lam[m]`, by `(-1,1)` with `mu1[m]` and by `(0,-1)` with `mu2[m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    p: DMatrix<f64>,
    lam: Vec<f64>,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
}

impl ModelParams {
    pub fn new(p: DMatrix<f64>, lam: Vec<f64>, mu1: Vec<f64>, mu2: Vec<f64>) -> Result<Self> {
        let report = validate_inputs(&p, &lam, &mu1, &mu2);
        if !report.inputs_ok() {
            return Err(Error::InvalidModel(report.messages.join("; ")));
        }
        Ok(ModelParams { p, lam, mu1, mu2 })
    }

    /// Convenience constructor from row-major rows of `P`.
    pub fn from_rows(rows: &[Vec<f64>], lam: &[f64], mu1: &[f64], mu2: &[f64]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel("P is not square".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(n, n, &flat),
            lam.to_vec(),
            mu1.to_vec(),
            mu2.to_vec(),
        )
    }

    pub fn num_regimes(&self) -> usize {
        self.lam.len()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn lam(&self) -> &[f64] {
        &self.lam
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    pub fn mu2(&self) -> &[f64] {
        &self.mu2
    }

    pub fn stationary(&self) -> StationaryDistribution {
        stationary_distribution(&self.p).expect("validated transition matrix")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub stochastic_ok: bool,
    pub irreducible_ok: bool,
    pub aperiodic_ok: bool,
    pub rates_normalized_ok: bool,
    /// Drift sums for the first and second queue; NaN when `P` is unusable.
    pub stability_margins: [f64; 2],
    pub tridiagonal_strict: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn inputs_ok(&self) -> bool {
        self.stochastic_ok && self.irreducible_ok && self.aperiodic_ok && self.rates_normalized_ok
    }

    pub fn is_stable(&self) -> bool {
        self.stability_margins[0] < 0.0 && self.stability_margins[1] < 0.0
    }
}

/// Run every input check without failing early.
pub fn validate_inputs(
    p: &DMatrix<f64>,
    lam: &[f64],
    mu1: &[f64],
    mu2: &[f64],
) -> ValidationReport {
    let mut msgs = Vec::new();
    let n = lam.len();
    let square = p.nrows() == p.ncols() && p.nrows() == n && n > 0;
    if !square {
        msgs.push(format!(
            "P is {}x{} but {} regimes were given",
            p.nrows(),
            p.ncols(),
            n
        ));
    }
    let mut rates_ok = mu1.len() == n && mu2.len() == n;
    if !rates_ok {
        msgs.push(format!(
            "rate vectors have lengths lam={}, mu1={}, mu2={}",
            n,
            mu1.len(),
            mu2.len()
        ));
    }
    if rates_ok {
        for m in 0..n {
            let r = [lam[m], mu1[m], mu2[m]];
            if r.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                rates_ok = false;
                msgs.push(format!("regime {}: rates must lie in (0,1)", m + 1));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > RATE_SUM_TOL {
                rates_ok = false;
                msgs.push(format!(
                    "regime {}: lam + mu1 + mu2 = {} (must equal 1)",
                    m + 1,
                    s
                ));
            }
        }
    }
    let mut stochastic = square;
    if square {
        for i in 0..n {
            let row = p.row(i);
            if row.iter().any(|&x| !x.is_finite() || x < 0.0) {
                stochastic = false;
                msgs.push(format!("P row {}: entries must be finite and >= 0", i + 1));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                stochastic = false;
                msgs.push(format!("P row {} sums to {} (must be 1)", i + 1, s));
            }
            if !(p[(i, i)] > 0.0) {
                stochastic = false;
                msgs.push(format!("P({0},{0}) must be strictly positive", i + 1));
            }
        }
    }
    let irreducible = square && is_irreducible(p);
    if square && !irreducible {
        msgs.push("P is not irreducible".into());
    }
    let aperiodic = irreducible && period(p) == 1;
    if irreducible && !aperiodic {
        msgs.push(format!("P has period {}", period(p)));
    }
    let margins = if stochastic && irreducible && rates_ok {
        match stationary_distribution(p) {
            Ok(pi) => stability_sums(p, &pi.pi, lam, mu1, mu2),
            Err(e) => {
                msgs.push(e.to_string());
                [f64::NAN; 2]
            }
        }
    } else {
        [f64::NAN; 2]
    };
    ValidationReport {
        stochastic_ok: stochastic,
        irreducible_ok: irreducible,
        aperiodic_ok: aperiodic,
        rates_normalized_ok: rates_ok,
        stability_margins: margins,
        tridiagonal_strict: square && is_strictly_tridiagonal(p),
        messages: msgs,
    }
}

fn stability_sums(p: &DMatrix<f64>, pi: &[f64], lam: &[f64], mu1: &[f64], mu2: &[f64]) -> [f64; 2] {
    let mut s = [0.0; 2];
    for m in 0..pi.len() {
        let w = pi[m] * p[(m, m)];
        s[0] += (lam[m] - mu1[m]) * w;
        s[1] += (lam[m] - mu2[m]) * w;
    }
    s
}

/// Stability margins and structural flags for a validated model.
pub fn check_stability(params: &ModelParams) -> ValidationReport {
    let mut r = validate_inputs(&params.p, &params.lam, &params.mu1, &params.mu2);
    if !r.is_stable() {
        r.messages.push(format!(
            "unstable: stability margins ({:.6e}, {:.6e}) must both be negative",
            r.stability_margins[0], r.stability_margins[1]
        ));
    }
    r
}

fn reachable(p: &DMatrix<f64>, start: usize, transpose: bool) -> Vec<bool> {
    let n = p.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            let w = if transpose { p[(j, i)] } else { p[(i, j)] };
            if w > 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

pub fn is_irreducible(p: &DMatrix<f64>) -> bool {
    p.nrows() > 0
        && reachable(p, 0, false).iter().all(|&b| b)
        && reachable(p, 0, true).iter().all(|&b| b)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of an irreducible chain: gcd of `level(i) + 1 - level(j)` over edges.
pub fn period(p: &DMatrix<f64>) -> usize {
    let n = p.nrows();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if p[(i, j)] > 0.0 && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut g = 0;
    for i in 0..n {
        for j in 0..n {
            if p[(i, j)] > 0.0 && level[i] != usize::MAX && level[j] != usize::MAX {
                let d = (level[i] as i64 + 1 - level[j] as i64).unsigned_abs() as usize;
                g = gcd(g, d);
            }
        }
    }
    g
}

/// Positive entries exactly on the three central diagonals.
pub fn is_strictly_tridiagonal(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let band = (i as i64 - j as i64).abs() <= 1;
            if band {
                p[(i, j)] > 0.0
            } else {
                p[(i, j)] == 0.0
            }
        })
    })
}

/// Solve `pi P = pi`, `sum(pi) = 1` with the normalization row appended.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<StationaryDistribution> {
    let n = p.nrows();
    if n == 0 || p.ncols() != n {
        return Err(Error::InvalidModel("P must be a non-empty square matrix".into()));
    }
    for i in 0..n {
        let s: f64 = p.row(i).sum();
        if (s - 1.0).abs() > ROW_SUM_TOL || p.row(i).iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidModel(format!(
                "P row {} is not a probability vector (sum {})",
                i + 1,
                s
            )));
        }
    }
    if !is_irreducible(p) {
        return Err(Error::InvalidModel("P is not irreducible".into()));
    }
    let mut a = DMatrix::<f64>::zeros(n + 1, n);
    a.view_mut((0, 0), (n, n))
        .copy_from(&(p.transpose() - DMatrix::identity(n, n)));
    a.row_mut(n).fill(1.0);
    let mut b = DVector::<f64>::zeros(n + 1);
    b[n] = 1.0;
    let pi = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidModel(format!("stationary solve failed: {e}")))?;
    let resid = (pi.transpose() * p - pi.transpose()).amax();
    if resid > 1e-12 || pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidModel(format!(
            "stationary solve is inaccurate (residual {resid:.3e})"
        )));
    }
    Ok(StationaryDistribution {
        pi: pi.iter().copied().collect(),
    })
}
