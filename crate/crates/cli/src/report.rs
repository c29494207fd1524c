//! JSON report assembly. Every real number is written as a decimal string with
//! 17 significant digits.

use num_complex::Complex64;
use pcinterp::minimax::SaddleReport;
use pcinterp::{CMatrix, CVector, InterpSolution, MinimaxSolution, Taps, VectorFunctional};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub fn num(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn vector(v: &CVector) -> Value {
    Value::Array(v.iter().map(|&z| complex(z)).collect())
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

pub fn parse_num(v: &Value) -> Option<f64> {
    v.as_str()?.parse().ok()
}

fn functional(a: &VectorFunctional) -> Value {
    Value::Array(a.coeffs().iter().map(|(j, v)| json!({ "j": j, "value": vector(v) })).collect())
}

fn taps(h: &Taps) -> Value {
    Value::Array(h.taps().iter().map(|(lag, v)| json!({ "lag": lag, "value": vector(v) })).collect())
}

pub fn interpolation(sol: &InterpSolution, period: Option<usize>) -> Value {
    let d = &sol.diagnostics;
    let mut out = json!({
        "delta": num(sol.delta),
        "delta_noiseless": sol.delta_noiseless.map_or(Value::Null, num),
        "T": sol.taps.dim(),
        "B": matrix(&sol.blocks.b),
        "c": functional(&sol.coefficients),
        "taps": taps(&sol.taps),
        "diagnostics": {
            "condition": num(d.condition),
            "relative_residual": num(d.relative_residual),
            "minimality": {
                "ok": d.minimality.ok,
                "max_condition": num(d.minimality.max_condition),
                "min_eigenvalue": num(d.minimality.min_eigenvalue),
            },
            "pattern_residual": num(d.pattern_residual),
            "window": [d.window.0, d.window.1],
            "exact": d.exact,
        },
    });
    if let Some(t) = period {
        let scalar = pcinterp::unblock_taps(sol.taps.taps(), t);
        out["scalar_taps"] =
            Value::Array(scalar.iter().map(|(j, z)| json!({ "index": j, "value": complex(*z) })).collect());
    }
    out
}

pub fn minimax(sol: &MinimaxSolution, period: Option<usize>, saddle: Option<&SaddleReport>) -> Value {
    let h = &sol.hypothesis;
    let mut out = json!({
        "delta": num(sol.delta),
        "R": sol.r.coeffs().iter().map(matrix).collect::<Vec<_>>(),
        "Q": sol.factor.coeffs().iter().map(matrix).collect::<Vec<_>>(),
        "ar": sol.ar.coeffs().iter().map(matrix).collect::<Vec<_>>(),
        "multipliers": functional(&sol.multipliers),
        "multiplier_residual": num(sol.multiplier_residual),
        "hypothesis": {
            "min_eigenvalue": num(h.min_eigenvalue),
            "max_condition": num(h.max_condition),
            "min_abs_det": num(h.min_abs_det),
        },
        "interpolation": interpolation(&sol.solution, period),
    });
    if let Some(s) = saddle {
        out["saddle"] = json!({
            "holds": s.holds(),
            "delta0": num(s.delta0),
            "values": s.values.iter().map(|&v| num(v)).collect::<Vec<_>>(),
            "max_excess": num(s.max_excess),
            "violations": s.violations,
        });
    }
    out
}

/// `lag,component,re,im` rows of a blocked filter.
pub fn filter_csv(h: &Taps) -> String {
    let mut out = String::from("lag,component,re,im\n");
    for (lag, v) in h.taps() {
        for (p, z) in v.iter().enumerate() {
            out.push_str(&format!("{lag},{p},{:.16e},{:.16e}\n", z.re, z.im));
        }
    }
    out
}

pub fn errors_csv(errors: &[f64]) -> String {
    let mut out = String::from("trial,squared_error\n");
    for (i, e) in errors.iter().enumerate() {
        out.push_str(&format!("{i},{e:.16e}\n"));
    }
    out
}
