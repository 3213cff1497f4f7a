//! Text renderings shared by the commands.

use serde_json::{json, Value};
use tandem_core::harmonic::HarmonicFn;
use tandem_core::roots::ConjugateFamily;
use tandem_core::{SurfacePoint, C64};

use crate::RunConfig;

/// `# key = value` lines echoing the configuration, shared by every output.
pub fn header(c: &RunConfig) -> String {
    let trunc = c.trunc.map_or("none".to_string(), |t| t.to_string());
    format!(
        "# tandem {}\n# command = {}\n# model = {}\n# K = {}\n# R = {}\n# n = {}\n# tol = {:e}\n# seed = {}\n# trunc = {}\n",
        env!("CARGO_PKG_VERSION"),
        c.command.name(),
        c.model.display(),
        c.k,
        c.r,
        c.n,
        c.tol,
        c.seed,
        trunc
    )
}

pub fn config_json(c: &RunConfig) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": c.command.name(),
        "model": c.model.display().to_string(),
        "K": c.k,
        "R": c.r,
        "n": c.n,
        "tol": c.tol,
        "seed": c.seed,
        "trunc": c.trunc,
    })
}

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn point(p: &SurfacePoint) -> Value {
    json!({
        "beta": complex(p.beta),
        "alpha": complex(p.alpha),
        "d": p.d.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
        "branch": p.branch,
        "residual": p.residual,
    })
}

pub fn points(ps: &[SurfacePoint]) -> Value {
    Value::Array(ps.iter().map(point).collect())
}

pub fn family(f: &ConjugateFamily) -> Value {
    json!({
        "base": point(&f.base),
        "conjugates": points(&f.conjugates),
        "candidates": f.candidates,
    })
}

pub fn function(h: &HarmonicFn) -> Value {
    json!({
        "kind": format!("{:?}", h.kind()).to_lowercase(),
        "terms": h.terms().iter().map(|t| json!({
            "weight": complex(t.weight),
            "beta": complex(t.point.beta),
            "alpha": complex(t.point.alpha),
            "d": t.point.d.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are finite or null");
    s.push('\n');
    s
}

/// `{:e}` gives the shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
