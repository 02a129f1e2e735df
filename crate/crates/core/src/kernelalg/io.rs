use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::{DiscreteKernel, FieldVector, KernelError, QuadratureGrid};

/// A kernel or a vector read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedField {
    Kernel(DiscreteKernel),
    Vector(FieldVector),
}

impl LoadedField {
    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        match self {
            LoadedField::Kernel(k) => k.grid(),
            LoadedField::Vector(v) => v.grid(),
        }
    }

    /// JSON container `{kind, dim, weights, entries}`; complex entries are `[re, im]`.
    /// On input `kind` is optional: a `dim x dim` nested array is a kernel.
    pub fn to_json(&self) -> Value {
        let grid = self.grid();
        let (kind, entries) = match self {
            LoadedField::Kernel(k) => {
                let m = k.entries();
                let rows = (0..m.nrows()).map(|i| Value::Array(m.row(i).iter().map(complex_json).collect()));
                ("kernel", Value::Array(rows.collect()))
            }
            LoadedField::Vector(v) => ("vector", Value::Array(v.values().iter().map(complex_json).collect())),
        };
        json!({ "kind": kind, "dim": grid.dim(), "weights": grid.weights(), "entries": entries })
    }

    pub fn from_json(value: &Value) -> Result<Self, KernelError> {
        let bad = |m: &str| KernelError::Parse { line: 0, message: m.to_string() };
        let dim = value.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing 'dim'"))? as usize;
        let weights = match value.get("weights") {
            Some(Value::Array(ws)) => {
                ws.iter().map(|w| w.as_f64().ok_or_else(|| bad("weights must be numbers"))).collect::<Result<Vec<_>, _>>()?
            }
            None | Some(Value::Null) => vec![1.0; dim],
            _ => return Err(bad("'weights' must be an array")),
        };
        if weights.len() != dim {
            return Err(KernelError::ShapeMismatch { expected: dim, found: weights.len() });
        }
        let grid = Arc::new(QuadratureGrid::new(weights)?);
        let entries = value.get("entries").and_then(Value::as_array).ok_or_else(|| bad("missing 'entries'"))?;
        let is_kernel = match value.get("kind").and_then(Value::as_str) {
            Some("kernel") => true,
            Some("vector") => false,
            Some(other) => return Err(bad(&format!("unknown kind '{other}'"))),
            None => entries.len() == dim && entries.iter().all(|e| e.as_array().is_some_and(|r| r.len() == dim)),
        };
        if is_kernel {
            let mut rows = Vec::with_capacity(entries.len());
            for row in entries {
                let row = row.as_array().expect("checked above");
                rows.push(row.iter().map(|e| parse_json_complex(e).ok_or_else(|| bad("bad kernel entry"))).collect::<Result<Vec<_>, _>>()?);
            }
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(KernelError::ShapeMismatch { expected: dim * dim, found: rows.iter().map(Vec::len).sum() });
            }
            let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
            Ok(LoadedField::Kernel(DiscreteKernel::new(grid, m)?))
        } else {
            let vals = entries.iter().map(|e| parse_json_complex(e).ok_or_else(|| bad("bad vector entry"))).collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedField::Vector(FieldVector::new(grid, vals)?))
        }
    }
}

fn complex_json(z: &Complex64) -> Value {
    if z.im == 0.0 && !(z.im.is_sign_negative()) {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn parse_json_complex(v: &Value) -> Option<Complex64> {
    match v {
        Value::Number(n) => Some(Complex64::new(n.as_f64()?, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?)),
        Value::String(s) => parse_complex(s),
        _ => None,
    }
}

/// Parses `3`, `-1.5e-3`, `2i`, `-i`, `1+2i`, `0.5-0.25i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().ok().map(|x| Complex64::new(x, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

fn format_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn read_csv_rows(text: &str) -> Result<Vec<Vec<Complex64>>, KernelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| KernelError::Parse { line: line + 1, message: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|cell| {
                parse_complex(cell).ok_or_else(|| KernelError::Parse { line: line + 1, message: format!("bad number '{cell}'") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a square kernel; unit weights unless a grid is supplied.
pub fn read_kernel_csv(text: &str, grid: Option<Arc<QuadratureGrid>>) -> Result<DiscreteKernel, KernelError> {
    let rows = read_csv_rows(text)?;
    let d = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(KernelError::ShapeMismatch { expected: d, found: bad.len() });
    }
    let grid = grid.unwrap_or_else(|| Arc::new(QuadratureGrid::uniform(d)));
    DiscreteKernel::new(grid, DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// Reads a vector laid out as one row or one column.
pub fn read_vector_csv(text: &str, grid: Option<Arc<QuadratureGrid>>) -> Result<FieldVector, KernelError> {
    let rows = read_csv_rows(text)?;
    let values: Vec<Complex64> = if rows.len() == 1 {
        rows.into_iter().next().unwrap_or_default()
    } else if rows.iter().all(|r| r.len() == 1) {
        rows.into_iter().map(|r| r[0]).collect()
    } else {
        return Err(KernelError::Parse { line: 0, message: "vector CSV must be a single row or column".into() });
    };
    let grid = grid.unwrap_or_else(|| Arc::new(QuadratureGrid::uniform(values.len())));
    FieldVector::new(grid, values)
}

/// CSV text: one row per line, `a+bi` literals when complex.
pub fn to_csv(field: &LoadedField) -> String {
    match field {
        LoadedField::Kernel(k) => {
            let m = k.entries();
            (0..m.nrows()).map(|i| m.row(i).iter().map(format_complex).collect::<Vec<_>>().join(",") + "\n").collect()
        }
        LoadedField::Vector(v) => v.values().iter().map(format_complex).collect::<Vec<_>>().join(",") + "\n",
    }
}

/// Loads `.json` containers or `.csv` tables. A CSV with one row or one column
/// is a vector; otherwise a kernel. The optional grid applies to CSV input.
pub fn load_field(path: &Path, grid: Option<Arc<QuadratureGrid>>) -> Result<LoadedField, KernelError> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
    if is_json {
        return LoadedField::from_json(&serde_json::from_str(&text)?);
    }
    let rows = read_csv_rows(&text)?;
    if rows.len() == 1 || (rows.len() > 1 && rows.iter().all(|r| r.len() == 1)) {
        Ok(LoadedField::Vector(read_vector_csv(&text, grid)?))
    } else {
        Ok(LoadedField::Kernel(read_kernel_csv(&text, grid)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("3"), Some(Complex64::new(3.0, 0.0)));
        assert_eq!(parse_complex("1+2i"), Some(Complex64::new(1.0, 2.0)));
        assert_eq!(parse_complex("-i"), Some(Complex64::new(0.0, -1.0)));
        assert_eq!(parse_complex("2.5e-3-1e+2i"), Some(Complex64::new(2.5e-3, -100.0)));
        assert_eq!(parse_complex(" -0.5i "), Some(Complex64::new(0.0, -0.5)));
        assert_eq!(parse_complex("abc"), None);
    }

    #[test]
    fn csv_kernels_and_vectors() {
        let k = read_kernel_csv("1, 0.5\n0.5, 2\n", None).unwrap();
        assert_eq!(k.dim(), 2);
        assert!(k.is_symmetric());
        let v = read_vector_csv("1\n2\n3\n", None).unwrap();
        assert_eq!(v.values().len(), 3);
        let c = read_kernel_csv("1,i\n-i,1", None).unwrap();
        assert!(c.is_self_adjoint());
        assert!(matches!(read_kernel_csv("1,2\n3\n", None), Err(KernelError::ShapeMismatch { .. })));
        assert!(matches!(read_kernel_csv("1,x\n3,4\n", None), Err(KernelError::Parse { line: 1, .. })));
        let round = read_kernel_csv(&to_csv(&LoadedField::Kernel(c.clone())), None).unwrap();
        assert_eq!(round, c);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let grid = Arc::new(QuadratureGrid::new(vec![0.1, 1.0 / 3.0]).unwrap());
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.1 + 0.2, 0.0),
            Complex64::new(1e-300, -2.0 / 7.0),
            Complex64::new(std::f64::consts::PI, 0.0),
            Complex64::new(-0.0, 1.0),
        ]);
        let k = LoadedField::Kernel(DiscreteKernel::new(grid.clone(), m).unwrap());
        let text = serde_json::to_string(&k.to_json()).unwrap();
        let back = LoadedField::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, k);
        let v = LoadedField::Vector(FieldVector::new(grid, vec![Complex64::new(1.0 / 3.0, 0.0), Complex64::new(2.0, 1e-17)]).unwrap());
        let text = serde_json::to_string(&v.to_json()).unwrap();
        let back = LoadedField::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, v);
        if let (LoadedField::Vector(a), LoadedField::Vector(b)) = (&back, &v) {
            for (x, y) in a.values().iter().zip(b.values().iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn two_by_two_real_kernel_is_not_a_complex_vector() {
        let v: Value = serde_json::from_str(r#"{"dim":2,"weights":[1,1],"entries":[[1,2],[3,4]]}"#).unwrap();
        assert!(matches!(LoadedField::from_json(&v).unwrap(), LoadedField::Kernel(_)));
        let v: Value = serde_json::from_str(r#"{"kind":"vector","dim":2,"entries":[[1,2],[3,4]]}"#).unwrap();
        assert!(matches!(LoadedField::from_json(&v).unwrap(), LoadedField::Vector(_)));
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        std::fs::write(&p, "2,0\n0,3\n").unwrap();
        assert!(matches!(load_field(&p, None).unwrap(), LoadedField::Kernel(_)));
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "1,2,3\n").unwrap();
        assert!(matches!(load_field(&p, None).unwrap(), LoadedField::Vector(_)));
    }
}
