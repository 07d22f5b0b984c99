//! Kernel files, report files, and number formatting.
//!
//! A kernel file is a JSON object with `"scalar"` (`"exact"`, the default,
//! or `"float"`), an optional `"tol"` (float mode only), and exactly one of
//! `"matrix"` or `"spec"`. Matrix entries are numbers, `"p/q"` strings (exact
//! mode only), or `{"re": x, "im": y}` objects for the sweep. In exact mode
//! numbers are read from their decimal text, so `0.1` is `1/10`.
//!
//! Spec objects:
//!
//! ```text
//! {"type": "density", "expr": "<s,t>"}
//! {"type": "rank_one", "shape": "<s>", "measure": M}
//! {"type": "c0_factored", "terms": [{"coef": "<s>", "measure": M}, ...]}
//! {"type": "atomic", "atoms": [{"location": L, "weight": "<s>"}, ...]}
//! {"type": "preset", "name": "neg-dirac-half" | "three-atom-factored" | "cos-kernel"}
//! M = {"density": "<t>"} | {"atoms": [{"location": L, "weight": R}, ...]}
//! ```
//!
//! Locations `L` and weights `R` are numbers or `"p/q"` strings.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use daugavet_core::daugavet::{DaugavetReport, RowStat};
use daugavet_core::models::{
    parse_expression_in, presets, Expr, FactorTerm, FixedAtom, KernelAtom, KernelSpec, MeasureSpec,
    Var,
};
use daugavet_core::scalar::{format_rational, parse_rational};
use daugavet_core::{Rational, Scalar, Surd, Tolerance};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    Exact,
    Float,
}

impl ScalarMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Float => "float",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Exact(Vec<Vec<Complex<Rational>>>),
    Float(Vec<Vec<Complex<f64>>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Matrix { matrix: Matrix, complex: bool },
    Spec(KernelSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFile {
    pub mode: ScalarMode,
    pub tol: Tolerance,
    pub body: Body,
    /// The parsed JSON, echoed into reports.
    pub raw: Value,
}

fn bad(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Format(format!("{path}: {msg}"))
}

pub fn parse_kernel_file(text: &str) -> Result<KernelFile, CliError> {
    let raw: Value =
        serde_json::from_str(text).map_err(|e| CliError::Format(format!("malformed JSON: {e}")))?;
    let obj = raw
        .as_object()
        .ok_or_else(|| bad("$", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "scalar" | "tol" | "matrix" | "spec") {
            return Err(bad("$", format!("unknown field `{key}`")));
        }
    }
    let mode = match obj.get("scalar") {
        None => ScalarMode::Exact,
        Some(Value::String(s)) if s == "exact" => ScalarMode::Exact,
        Some(Value::String(s)) if s == "float" => ScalarMode::Float,
        Some(other) => {
            return Err(bad(
                "$.scalar",
                format!("expected \"exact\" or \"float\", got {other}"),
            ))
        }
    };
    let tol = match (obj.get("tol"), mode) {
        (None, ScalarMode::Exact) => Tolerance::exact(),
        (None, ScalarMode::Float) => Tolerance::default(),
        (Some(_), ScalarMode::Exact) => {
            return Err(bad("$.tol", "tolerance applies to float mode only"))
        }
        (Some(v), ScalarMode::Float) => {
            let t = v.as_f64().filter(|t| t.is_finite() && *t >= 0.0);
            Tolerance::new(t.ok_or_else(|| bad("$.tol", "expected a nonnegative number"))?)
        }
    };
    let body = match (obj.get("matrix"), obj.get("spec")) {
        (Some(m), None) => parse_matrix(m, mode)?,
        (None, Some(s)) => Body::Spec(parse_spec(s, "$.spec")?),
        _ => return Err(bad("$", "exactly one of `matrix` or `spec` is required")),
    };
    Ok(KernelFile {
        mode,
        tol,
        body,
        raw,
    })
}

fn parse_matrix(v: &Value, mode: ScalarMode) -> Result<Body, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad("$.matrix", "expected an array of rows"))?;
    let n = rows.len();
    if n == 0 {
        return Err(bad("$.matrix", "empty matrix"));
    }
    let mut complex = false;
    let mut exact = Vec::with_capacity(n);
    let mut float = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let path = format!("$.matrix[{i}]");
        let row = row
            .as_array()
            .ok_or_else(|| bad(&path, "expected an array"))?;
        if row.len() != n {
            return Err(bad(
                &path,
                format!("expected {n} entries, got {}", row.len()),
            ));
        }
        let mut er = Vec::with_capacity(n);
        let mut fr = Vec::with_capacity(n);
        for (j, x) in row.iter().enumerate() {
            let path = format!("$.matrix[{i}][{j}]");
            let (re, im) = match x {
                Value::Object(o) => {
                    complex = true;
                    for key in o.keys() {
                        if key != "re" && key != "im" {
                            return Err(bad(&path, format!("unknown field `{key}`")));
                        }
                    }
                    let part = |k: &str| o.get(k).cloned().unwrap_or(json!(0));
                    (part("re"), part("im"))
                }
                other => (other.clone(), json!(0)),
            };
            match mode {
                ScalarMode::Exact => {
                    er.push(Complex::new(rational(&re, &path)?, rational(&im, &path)?))
                }
                ScalarMode::Float => fr.push(Complex::new(
                    float_entry(&re, &path)?,
                    float_entry(&im, &path)?,
                )),
            }
        }
        exact.push(er);
        float.push(fr);
    }
    let matrix = match mode {
        ScalarMode::Exact => Matrix::Exact(exact),
        ScalarMode::Float => Matrix::Float(float),
    };
    Ok(Body::Matrix { matrix, complex })
}

/// A rational from a JSON number (read from its text) or a `"p/q"` string.
pub fn rational(v: &Value, path: &str) -> Result<Rational, CliError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => {
            return Err(bad(
                path,
                format!("expected a number or \"p/q\" string, got {other}"),
            ))
        }
    };
    parse_rational(text.trim()).ok_or_else(|| bad(path, format!("not a rational number: {text:?}")))
}

fn float_entry(v: &Value, path: &str) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(path, "number out of range")),
        Value::String(_) => Err(bad(
            path,
            "rational strings are accepted only in exact mode",
        )),
        other => Err(bad(path, format!("expected a number, got {other}"))),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, CliError> {
    obj.get(key)
        .ok_or_else(|| bad(path, format!("missing field `{key}`")))
}

fn expr_field(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
    vars: &[Var],
) -> Result<Expr, CliError> {
    let path = format!("{path}.{key}");
    let text = field(obj, key, &path)?
        .as_str()
        .ok_or_else(|| bad(&path, "expected an expression string"))?;
    parse_expression_in(text, vars).map_err(|e| bad(&path, e))
}

fn array<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a Vec<Value>, CliError> {
    field(obj, key, path)?
        .as_array()
        .ok_or_else(|| bad(&format!("{path}.{key}"), "expected an array"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

pub fn parse_spec(v: &Value, path: &str) -> Result<KernelSpec, CliError> {
    let obj = object(v, path)?;
    let kind = field(obj, "type", path)?
        .as_str()
        .ok_or_else(|| bad(path, "`type` must be a string"))?;
    match kind {
        "density" => Ok(KernelSpec::Density(expr_field(
            obj,
            "expr",
            path,
            &[Var::S, Var::T],
        )?)),
        "rank_one" => Ok(KernelSpec::RankOne {
            shape: expr_field(obj, "shape", path, &[Var::S])?,
            measure: parse_measure(field(obj, "measure", path)?, &format!("{path}.measure"))?,
        }),
        "c0_factored" => {
            let terms = array(obj, "terms", path)?
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let p = format!("{path}.terms[{k}]");
                    let o = object(t, &p)?;
                    Ok(FactorTerm {
                        coef: expr_field(o, "coef", &p, &[Var::S])?,
                        measure: parse_measure(field(o, "measure", &p)?, &format!("{p}.measure"))?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(KernelSpec::C0Factored(terms))
        }
        "atomic" => {
            let atoms = array(obj, "atoms", path)?
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let p = format!("{path}.atoms[{k}]");
                    let o = object(a, &p)?;
                    Ok(KernelAtom {
                        location: rational(field(o, "location", &p)?, &format!("{p}.location"))?,
                        weight: expr_field(o, "weight", &p, &[Var::S])?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(KernelSpec::Atomic(atoms))
        }
        "preset" => match field(obj, "name", path)?.as_str() {
            Some("neg-dirac-half") => Ok(presets::neg_dirac_half()),
            Some("three-atom-factored") => Ok(presets::three_atom_factored()),
            Some("cos-kernel") => Ok(presets::cos_kernel()),
            _ => Err(bad(
                &format!("{path}.name"),
                "expected neg-dirac-half, three-atom-factored or cos-kernel",
            )),
        },
        other => Err(bad(
            &format!("{path}.type"),
            format!("unknown spec type `{other}`"),
        )),
    }
}

fn parse_measure(v: &Value, path: &str) -> Result<MeasureSpec, CliError> {
    let obj = object(v, path)?;
    match (obj.get("density"), obj.get("atoms")) {
        (Some(_), None) => Ok(MeasureSpec::Density(expr_field(
            obj,
            "density",
            path,
            &[Var::T],
        )?)),
        (None, Some(_)) => {
            let atoms = array(obj, "atoms", path)?
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let p = format!("{path}.atoms[{k}]");
                    let o = object(a, &p)?;
                    Ok(FixedAtom {
                        location: rational(field(o, "location", &p)?, &format!("{p}.location"))?,
                        weight: rational(field(o, "weight", &p)?, &format!("{p}.weight"))?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(MeasureSpec::Atoms(atoms))
        }
        _ => Err(bad(
            path,
            "a measure has exactly one of `density` or `atoms`",
        )),
    }
}

/// Scalars the command line can read and write.
pub trait CliScalar: Scalar {
    const MODE: ScalarMode;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, path: &str) -> Result<Self, CliError>;
    /// Human-readable form: terminating decimals where exact.
    fn show(&self) -> String;
    fn from_rational(r: &Rational) -> Self;
    fn entries(m: &Matrix) -> Option<&Vec<Vec<Complex<Self>>>>;
}

impl CliScalar for Rational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value, path: &str) -> Result<Self, CliError> {
        match v {
            Value::String(_) => rational(v, path),
            _ => Err(bad(path, "exact values are \"p/q\" strings")),
        }
    }

    fn show(&self) -> String {
        format_decimal(self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn entries(m: &Matrix) -> Option<&Vec<Vec<Complex<Self>>>> {
        match m {
            Matrix::Exact(e) => Some(e),
            Matrix::Float(_) => None,
        }
    }
}

impl CliScalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value, path: &str) -> Result<Self, CliError> {
        v.as_f64().ok_or_else(|| bad(path, "expected a number"))
    }

    fn show(&self) -> String {
        format!("{self}")
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn entries(m: &Matrix) -> Option<&Vec<Vec<Complex<Self>>>> {
        match m {
            Matrix::Float(f) => Some(f),
            Matrix::Exact(_) => None,
        }
    }
}

/// `p/q` as a terminating decimal when `q` has no prime factors besides 2
/// and 5, otherwise as `p/q`.
pub fn format_decimal(r: &Rational) -> String {
    let mut q = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut a, mut b) = (0u32, 0u32);
    while (&q % &two).is_zero() {
        q /= &two;
        a += 1;
    }
    while (&q % &five).is_zero() {
        q /= &five;
        b += 1;
    }
    if !q.is_one() {
        return format_rational(r);
    }
    let k = a.max(b);
    let scaled = (r * Rational::from_integer(BigInt::from(10).pow(k))).to_integer();
    let digits = scaled.abs().to_string();
    let sign = if scaled.is_negative() { "-" } else { "" };
    if k == 0 {
        return format!("{sign}{digits}");
    }
    let k = k as usize;
    let padded = format!("{digits:0>width$}", width = k + 1);
    let (int, frac) = padded.split_at(padded.len() - k);
    format!("{sign}{int}.{frac}")
}

pub fn show_complex<S: CliScalar>(z: &Complex<S>) -> String {
    if z.im.is_zero() {
        return z.re.show();
    }
    let im = if z.im.is_negative() { "-" } else { "+" };
    format!("{} {im} {}i", z.re.show(), z.im.abs().show())
}

pub fn show_surd<S: CliScalar>(v: &Surd<S>) -> String {
    match v.to_scalar() {
        Some(x) => x.show(),
        None => {
            let mut out = format!("sqrt({})", v.radicand.show());
            if !v.offset.is_zero() {
                let _ = write!(out, " + {}", v.offset.show());
            }
            let _ = write!(out, " (≈ {})", v.to_f64());
            out
        }
    }
}

pub const TOOL: &str = "daugavet";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn report_to_json<S: CliScalar>(r: &DaugavetReport<S>, tol: Tolerance) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            json!({
                "s": row.s,
                "d": row.d.to_json(),
                "r": row.r.to_json(),
                "rownorm": row.rownorm.to_json(),
                "attains": row.attains,
            })
        })
        .collect();
    json!({
        "opnorm": r.opnorm.to_json(),
        "norm_id_plus": r.norm_id_plus.to_json(),
        "norm_id_minus": r.norm_id_minus.to_json(),
        "defect": r.defect.to_json(),
        "defect_bound": r.defect_bound.to_json(),
        "star": r.star,
        "double_star": r.double_star,
        "holds": r.holds(tol),
        "rows": rows,
    })
}

pub fn report_file<S: CliScalar>(
    r: &DaugavetReport<S>,
    file: &KernelFile,
    input: &str,
    level: Option<usize>,
) -> Value {
    let mut echo = json!({
        "path": input,
        "scalar": file.mode.name(),
        "level": level,
        "kernel": file.raw,
    });
    if file.mode == ScalarMode::Float {
        echo["tol"] = json!(file.tol.value());
    }
    json!({
        "tool": TOOL,
        "version": VERSION,
        "input": echo,
        "report": report_to_json(r, file.tol),
    })
}

fn get_bool(o: &Map<String, Value>, key: &str, path: &str) -> Result<bool, CliError> {
    field(o, key, path)?
        .as_bool()
        .ok_or_else(|| bad(&format!("{path}.{key}"), "expected a boolean"))
}

fn get_scalar<S: CliScalar>(o: &Map<String, Value>, key: &str, path: &str) -> Result<S, CliError> {
    S::from_json(field(o, key, path)?, &format!("{path}.{key}"))
}

/// Reads the `report` member of a report file back.
pub fn report_from_json<S: CliScalar>(v: &Value) -> Result<DaugavetReport<S>, CliError> {
    let path = "$.report";
    let o = object(
        v.get("report")
            .ok_or_else(|| bad("$", "missing field `report`"))?,
        path,
    )?;
    let rows = array(o, "rows", path)?
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let p = format!("{path}.rows[{k}]");
            let ro = object(row, &p)?;
            Ok(RowStat {
                s: field(ro, "s", &p)?
                    .as_u64()
                    .and_then(|s| s.to_usize())
                    .ok_or_else(|| bad(&p, "bad row index"))?,
                d: get_scalar(ro, "d", &p)?,
                r: get_scalar(ro, "r", &p)?,
                rownorm: get_scalar(ro, "rownorm", &p)?,
                attains: get_bool(ro, "attains", &p)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(DaugavetReport {
        opnorm: get_scalar(o, "opnorm", path)?,
        norm_id_plus: get_scalar(o, "norm_id_plus", path)?,
        norm_id_minus: get_scalar(o, "norm_id_minus", path)?,
        defect: get_scalar(o, "defect", path)?,
        star: get_bool(o, "star", path)?,
        double_star: get_bool(o, "double_star", path)?,
        defect_bound: get_scalar(o, "defect_bound", path)?,
        rows,
    })
}
