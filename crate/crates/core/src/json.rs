//! JSON encodings of instruments and density matrices.
//!
//! Complex numbers are `[re, im]` pairs. An instrument is
//! `{"dim": d, "kraus": [op, ...], "partition": [[j, ...], ...]}` where each
//! operator is a row-major list of `d*d` pairs (a list of `d` rows of `d`
//! pairs is accepted too). A density matrix is
//! `{"dim": d, "matrix": [[[re, im], ...], ...]}`.
//!
//! Parse errors name the offending field, e.g. `kraus[1][3]`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, C64};
use crate::qmeas::KrausInstrument;
use crate::qstate::DensityMatrix;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value> {
    let map = obj
        .as_object()
        .ok_or_else(|| parse_err("top level: expected an object"))?;
    map.get(name)
        .ok_or_else(|| parse_err(format!("{name}: missing field")))
}

fn parse_dim(v: &Value) -> Result<usize> {
    match v.as_u64() {
        Some(d) if (1..=64).contains(&d) => Ok(d as usize),
        _ => Err(parse_err(format!(
            "dim: expected an integer in 1..=64, found {v}"
        ))),
    }
}

fn parse_complex(v: &Value, path: &str) -> Result<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| parse_err(format!("{path}: expected [re, im]")))?;
    let part = |x: &Value, which: &str| {
        x.as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| parse_err(format!("{path}: {which} part is not a finite number")))
    };
    Ok(C64::new(
        part(&pair[0], "real")?,
        part(&pair[1], "imaginary")?,
    ))
}

fn parse_rows(v: &Value, dim: usize, path: &str) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| parse_err(format!("{path}: expected a list of rows")))?;
    if rows.len() != dim {
        return Err(parse_err(format!(
            "{path}: expected {dim} rows, found {}",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        let entries = row
            .as_array()
            .ok_or_else(|| parse_err(format!("{path}[{i}]: expected a row")))?;
        if entries.len() != dim {
            return Err(parse_err(format!(
                "{path}[{i}]: expected {dim} entries, found {} (matrix must be square)",
                entries.len()
            )));
        }
        for (j, e) in entries.iter().enumerate() {
            data.push(parse_complex(e, &format!("{path}[{i}][{j}]"))?);
        }
    }
    Ok(ComplexMatrix::new(dim, dim, data).expect("shape checked"))
}

fn parse_operator(v: &Value, dim: usize, path: &str) -> Result<ComplexMatrix> {
    let items = v
        .as_array()
        .ok_or_else(|| parse_err(format!("{path}: expected a list of [re, im] pairs")))?;
    let nested = items
        .first()
        .and_then(Value::as_array)
        .and_then(|first| first.first())
        .is_some_and(Value::is_array);
    if nested {
        return parse_rows(v, dim, path);
    }
    if items.len() != dim * dim {
        return Err(parse_err(format!(
            "{path}: expected {} entries for a {dim}x{dim} operator, found {}",
            dim * dim,
            items.len()
        )));
    }
    let data = items
        .iter()
        .enumerate()
        .map(|(n, e)| parse_complex(e, &format!("{path}[{n}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::new(dim, dim, data).expect("shape checked"))
}

fn parse_partition(v: &Value) -> Result<Vec<Vec<usize>>> {
    let cells = v
        .as_array()
        .ok_or_else(|| parse_err("partition: expected a list of index lists"))?;
    cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            let cell = cell
                .as_array()
                .ok_or_else(|| parse_err(format!("partition[{k}]: expected a list of indices")))?;
            cell.iter()
                .enumerate()
                .map(|(n, j)| {
                    j.as_u64().map(|j| j as usize).ok_or_else(|| {
                        parse_err(format!(
                            "partition[{k}][{n}]: expected a non-negative integer"
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

fn parse_document(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("invalid JSON: {e}")))
}

/// Parses and validates an instrument, with completeness checked to `tol`.
pub fn instrument_from_json(text: &str, tol: f64) -> Result<KrausInstrument> {
    let doc = parse_document(text)?;
    let dim = parse_dim(field(&doc, "dim")?)?;
    let ops = field(&doc, "kraus")?
        .as_array()
        .ok_or_else(|| parse_err("kraus: expected a list of operators"))?;
    if ops.is_empty() {
        return Err(parse_err("kraus: at least one operator is required"));
    }
    let kraus = ops
        .iter()
        .enumerate()
        .map(|(j, op)| parse_operator(op, dim, &format!("kraus[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    let partition = parse_partition(field(&doc, "partition")?)?;
    KrausInstrument::with_tolerance(kraus, partition, tol)
}

/// Parses and validates a density matrix to `tol`.
pub fn density_from_json(text: &str, tol: f64) -> Result<DensityMatrix> {
    let doc = parse_document(text)?;
    let dim = parse_dim(field(&doc, "dim")?)?;
    let mat = parse_rows(field(&doc, "matrix")?, dim, "matrix")?;
    DensityMatrix::with_tolerance(mat, tol).map_err(|e| parse_err(format!("matrix: {e}")))
}

fn pair(z: &C64) -> Value {
    json!([z.re, z.im])
}

pub fn instrument_to_json(instr: &KrausInstrument) -> Value {
    let kraus: Vec<Value> = instr
        .kraus()
        .iter()
        .map(|k| Value::Array(k.data().iter().map(pair).collect()))
        .collect();
    json!({
        "dim": instr.dim(),
        "kraus": kraus,
        "partition": instr.partition(),
    })
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| Value::Array((0..m.cols()).map(|j| pair(&m[(i, j)])).collect()))
        .collect();
    Value::Array(rows)
}

pub fn density_to_json(rho: &DensityMatrix) -> Value {
    json!({
        "dim": rho.dim(),
        "matrix": matrix_to_json(rho.matrix()),
    })
}
