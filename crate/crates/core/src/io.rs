//! File formats: operator/state JSON, hashing JSON, tabulated functions,
//! and the CSV emitters used by the CLI.
//!
//! Schema problems are reported as [`Error::Schema`] with a JSON pointer to
//! the offending field. Axis numbers in files are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::phase_space::{Axis, PhaseSpaceGrid, WavefunctionGrid, CONVENTION};
use crate::qjsd::{HashingFactor, HashingSpec, HashingTerm, OperatorMeasure};
use crate::spectral::{DensityOperator, HermitianOperator};
use crate::transform::{QjpDistribution, QjpPoint, TabulatedFunction};

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| schema("", format!("malformed JSON: {e}")))
}

fn field<'a>(obj: &'a Value, key: &str, pointer: &str) -> Result<&'a Value> {
    let map = obj
        .as_object()
        .ok_or_else(|| schema(pointer, "expected an object"))?;
    map.get(key)
        .ok_or_else(|| schema(format!("{pointer}/{key}"), "missing field"))
}

fn as_f64(v: &Value, pointer: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| schema(pointer, "expected a number"))?;
    if !x.is_finite() {
        return Err(schema(pointer, "number is not finite"));
    }
    Ok(x)
}

fn as_usize(v: &Value, pointer: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(pointer, "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, pointer: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema(pointer, "expected an array"))
}

/// `[re, im]` or a bare real number.
fn as_complex(v: &Value, pointer: &str) -> Result<Complex64> {
    if v.is_number() {
        return Ok(Complex64::new(as_f64(v, pointer)?, 0.0));
    }
    let pair = as_array(v, pointer)?;
    if pair.len() != 2 {
        return Err(schema(pointer, "expected a [re, im] pair"));
    }
    Ok(Complex64::new(
        as_f64(&pair[0], &format!("{pointer}/0"))?,
        as_f64(&pair[1], &format!("{pointer}/1"))?,
    ))
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn parse_matrix(doc: &Value, dim: usize) -> Result<CMatrix> {
    let rows = as_array(field(doc, "matrix", "")?, "/matrix")?;
    if rows.len() != dim {
        return Err(schema(
            "/matrix",
            format!("expected {dim} rows, found {}", rows.len()),
        ));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        let p = format!("/matrix/{r}");
        let cols = as_array(row, &p)?;
        if cols.len() != dim {
            return Err(schema(
                &p,
                format!("expected {dim} entries, found {}", cols.len()),
            ));
        }
        for (c, v) in cols.iter().enumerate() {
            m[(r, c)] = as_complex(v, &format!("{p}/{c}"))?;
        }
    }
    Ok(m)
}

fn parse_dim(doc: &Value) -> Result<usize> {
    let dim = as_usize(field(doc, "dim", "")?, "/dim")?;
    if dim == 0 {
        return Err(schema("/dim", "dimension must be positive"));
    }
    Ok(dim)
}

pub fn parse_operator(text: &str) -> Result<HermitianOperator> {
    let doc = parse_json(text)?;
    let dim = parse_dim(&doc)?;
    HermitianOperator::new(parse_matrix(&doc, dim)?)
}

pub fn load_operator(path: &Path) -> Result<HermitianOperator> {
    parse_operator(&read_text(path)?)
}

/// Contents of a state file before any interpretation.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Density(CMatrix),
    Ket(CVector),
    /// Position samples `psi(q0 + j dq)`.
    Wavefunction {
        q0: f64,
        dq: f64,
        samples: Vec<Complex64>,
    },
}

pub fn parse_state_file(text: &str) -> Result<StateFile> {
    let doc = parse_json(text)?;
    let kind = match doc.get("kind") {
        None => "density",
        Some(v) => v
            .as_str()
            .ok_or_else(|| schema("/kind", "expected a string"))?,
    };
    match kind {
        "density" => {
            let dim = parse_dim(&doc)?;
            Ok(StateFile::Density(parse_matrix(&doc, dim)?))
        }
        "ket" => {
            let dim = parse_dim(&doc)?;
            let (key, entries) = match (doc.get("matrix"), doc.get("vector")) {
                (Some(v), _) => ("matrix", v),
                (None, Some(v)) => ("vector", v),
                (None, None) => return Err(schema("/matrix", "missing field")),
            };
            let p = format!("/{key}");
            let entries = as_array(entries, &p)?;
            if entries.len() != dim {
                return Err(schema(
                    &p,
                    format!("expected {dim} entries, found {}", entries.len()),
                ));
            }
            let values = entries
                .iter()
                .enumerate()
                .map(|(k, v)| as_complex(v, &format!("{p}/{k}")))
                .collect::<Result<Vec<_>>>()?;
            Ok(StateFile::Ket(CVector::from_vec(values)))
        }
        "wavefunction" => {
            let q0 = as_f64(field(&doc, "q0", "")?, "/q0")?;
            let dq = as_f64(field(&doc, "dq", "")?, "/dq")?;
            let samples = as_array(field(&doc, "samples", "")?, "/samples")?
                .iter()
                .enumerate()
                .map(|(k, v)| as_complex(v, &format!("/samples/{k}")))
                .collect::<Result<Vec<_>>>()?;
            Ok(StateFile::Wavefunction { q0, dq, samples })
        }
        other => Err(schema("/kind", format!("unknown state kind {other:?}"))),
    }
}

impl StateFile {
    /// Density operator; kets are promoted to `|psi><psi|`.
    pub fn into_density(self, renormalize: bool) -> Result<DensityOperator> {
        match self {
            StateFile::Density(m) => DensityOperator::new(m),
            StateFile::Ket(v) => DensityOperator::from_ket(&v, renormalize),
            StateFile::Wavefunction { .. } => Err(Error::InvalidArgument(
                "a sampled wavefunction cannot be used as a finite-dimensional state".into(),
            )),
        }
    }
}

pub fn load_state(path: &Path, renormalize: bool) -> Result<DensityOperator> {
    parse_state_file(&read_text(path)?)?.into_density(renormalize)
}

pub fn operator_json(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|r| Value::Array((0..m.ncols()).map(|c| complex_json(m[(r, c)])).collect()))
        .collect();
    json!({ "dim": m.nrows(), "matrix": rows })
}

pub fn density_json(rho: &DensityOperator) -> Value {
    let mut v = operator_json(rho.matrix());
    v["kind"] = json!("density");
    v
}

pub fn ket_json(v: &CVector) -> Value {
    json!({
        "kind": "ket",
        "dim": v.len(),
        "matrix": v.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
    })
}

pub fn wavefunction_json(psi: &WavefunctionGrid) -> Value {
    let axis = psi.axis();
    json!({
        "kind": "wavefunction",
        "q0": axis.origin,
        "dq": axis.step,
        "samples": psi.samples().iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
    })
}

pub fn parse_hashing(text: &str) -> Result<HashingSpec> {
    let doc = parse_json(text)?;
    let n_axes = as_usize(field(&doc, "n_axes", "")?, "/n_axes")?;
    let terms = as_array(field(&doc, "terms", "")?, "/terms")?;
    let mut out = Vec::with_capacity(terms.len());
    for (t, term) in terms.iter().enumerate() {
        let p = format!("/terms/{t}");
        let coefficient = as_complex(field(term, "coeff", &p)?, &format!("{p}/coeff"))?;
        let factors = as_array(field(term, "factors", &p)?, &format!("{p}/factors"))?;
        let mut fs = Vec::with_capacity(factors.len());
        for (k, f) in factors.iter().enumerate() {
            let fp = format!("{p}/factors/{k}");
            let axis = as_usize(field(f, "axis", &fp)?, &format!("{fp}/axis"))?;
            if axis == 0 || axis > n_axes {
                return Err(schema(
                    format!("{fp}/axis"),
                    format!("axis must lie in 1..={n_axes}"),
                ));
            }
            let fraction = as_f64(field(f, "fraction", &fp)?, &format!("{fp}/fraction"))?;
            fs.push(HashingFactor::new(axis - 1, fraction));
        }
        out.push(HashingTerm::new(coefficient, fs));
    }
    HashingSpec::new(n_axes, out)
}

pub fn hashing_json(spec: &HashingSpec) -> Value {
    json!({
        "n_axes": spec.n_axes(),
        "terms": spec.terms().iter().map(|t| json!({
            "coeff": complex_json(t.coefficient),
            "factors": t.factors.iter().map(|f| json!({
                "axis": f.axis + 1,
                "fraction": f.fraction,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// A preset name (`kd`, `mh`, `alpha:0.3+0.7i`, ...) or a path to a hashing file.
pub fn resolve_hashing(arg: &str) -> Result<HashingSpec> {
    match HashingSpec::preset(arg) {
        Ok(spec) => Ok(spec),
        Err(preset_error) => {
            let path = Path::new(arg);
            if path.exists() {
                parse_hashing(&read_text(path)?)
            } else {
                Err(preset_error)
            }
        }
    }
}

pub fn parse_tabulated(text: &str) -> Result<TabulatedFunction> {
    let doc = parse_json(text)?;
    let entries = as_array(&doc, "")?;
    let mut out = Vec::with_capacity(entries.len());
    for (k, e) in entries.iter().enumerate() {
        let p = format!("/{k}");
        let point = as_array(field(e, "point", &p)?, &format!("{p}/point"))?
            .iter()
            .enumerate()
            .map(|(j, x)| as_f64(x, &format!("{p}/point/{j}")))
            .collect::<Result<Vec<_>>>()?;
        let value = as_complex(field(e, "value", &p)?, &format!("{p}/value"))?;
        out.push((point, value));
    }
    Ok(TabulatedFunction::new(out))
}

pub fn tabulated_json(f: &TabulatedFunction) -> Value {
    Value::Array(
        f.entries
            .iter()
            .map(|(p, v)| json!({ "point": p, "value": complex_json(*v) }))
            .collect(),
    )
}

/// 17 significant digits: every f64 survives a round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column names for an `n`-axis point: `a, b, c, ...`.
pub fn axis_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| {
            if k < 26 {
                ((b'a' + k as u8) as char).to_string()
            } else {
                format!("x{}", k + 1)
            }
        })
        .collect()
}

pub fn qjp_csv(qjp: &QjpDistribution) -> String {
    let n = qjp.support.first().map_or(0, |p| p.point.len());
    let mut out = axis_names(n).join(",");
    out.push_str(if n == 0 { "re,im\n" } else { ",re,im\n" });
    for p in &qjp.support {
        for x in &p.point {
            out.push_str(&fmt_f64(*x));
            out.push(',');
        }
        let _ = writeln!(out, "{},{}", fmt_f64(p.value.re), fmt_f64(p.value.im));
    }
    out
}

fn csv_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| schema("", "empty CSV"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .enumerate()
            .map(|(j, s)| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| schema(format!("/{}/{j}", i + 1), "expected a number"))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(schema(format!("/{}", i + 1), "wrong number of columns"));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn parse_qjp_csv(text: &str) -> Result<QjpDistribution> {
    let (header, rows) = csv_rows(text)?;
    let n = header
        .len()
        .checked_sub(2)
        .ok_or_else(|| schema("/0", "missing re,im columns"))?;
    if header[n] != "re" || header[n + 1] != "im" {
        return Err(schema("/0", "last columns must be re,im"));
    }
    Ok(QjpDistribution {
        support: rows
            .into_iter()
            .map(|r| QjpPoint {
                point: r[..n].to_vec(),
                value: Complex64::new(r[n], r[n + 1]),
            })
            .collect(),
    })
}

/// One row per support point: coordinates then the weight flattened
/// row-major as `re,im` pairs.
pub fn measure_csv<M: OperatorMeasure + ?Sized>(q: &M) -> String {
    let n = q.n_axes();
    let d = q.dim();
    let mut cols = axis_names(n);
    for r in 0..d {
        for c in 0..d {
            cols.push(format!("w{}{}_re", r + 1, c + 1));
            cols.push(format!("w{}{}_im", r + 1, c + 1));
        }
    }
    let mut out = cols.join(",");
    out.push('\n');
    for s in q.support() {
        let mut fields: Vec<String> = s.point.iter().map(|x| fmt_f64(*x)).collect();
        for r in 0..d {
            for c in 0..d {
                fields.push(fmt_f64(s.weight[(r, c)].re));
                fields.push(fmt_f64(s.weight[(r, c)].im));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Phase-space grid as `q,p,re,im`, q outer, p inner.
pub fn grid_csv(grid: &PhaseSpaceGrid) -> String {
    let mut out = String::with_capacity(grid.values.len() * 96 + 16);
    out.push_str("q,p,re,im\n");
    for j in 0..grid.q.length {
        let q = fmt_f64(grid.q.value(j));
        for l in 0..grid.p.length {
            let z = grid.at(j, l);
            let _ = writeln!(
                out,
                "{q},{},{},{}",
                fmt_f64(grid.p.value(l)),
                fmt_f64(z.re),
                fmt_f64(z.im)
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub q: Axis,
    pub p: Axis,
    pub convention: String,
}

pub fn grid_sidecar(grid: &PhaseSpaceGrid) -> GridSidecar {
    GridSidecar {
        q: grid.q,
        p: grid.p,
        convention: grid.convention.clone(),
    }
}

pub fn parse_grid(csv: &str, sidecar: &str) -> Result<PhaseSpaceGrid> {
    let meta: GridSidecar =
        serde_json::from_str(sidecar).map_err(|e| schema("", format!("bad grid sidecar: {e}")))?;
    let (header, rows) = csv_rows(csv)?;
    if header != ["q", "p", "re", "im"] {
        return Err(schema("/0", "header must be q,p,re,im"));
    }
    let expected = meta.q.length * meta.p.length;
    if rows.len() != expected {
        return Err(schema(
            "",
            format!("expected {expected} rows, found {}", rows.len()),
        ));
    }
    let values = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
    let mut grid = PhaseSpaceGrid::new(meta.q, meta.p, values)?;
    grid.convention = meta.convention;
    Ok(grid)
}

/// Sidecar path for a grid written to `out`: `<out>.json`.
pub fn sidecar_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Writes `text` to `dest`, or to stdout when `dest` is `-`.
pub fn emit(dest: &str, text: &str) -> Result<()> {
    if dest == "-" {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|source| Error::Io {
                path: "-".into(),
                source,
            });
    }
    fs::write(dest, text).map_err(|source| Error::Io {
        path: dest.to_string(),
        source,
    })
}

pub fn write_grid(dest: &str, grid: &PhaseSpaceGrid) -> Result<()> {
    emit(dest, &grid_csv(grid))?;
    if dest != "-" {
        let meta = serde_json::to_string_pretty(&grid_sidecar(grid)).expect("sidecar serialises");
        emit(&sidecar_path(Path::new(dest)).display().to_string(), &meta)?;
    }
    Ok(())
}

pub fn grid_convention() -> &'static str {
    CONVENTION
}
