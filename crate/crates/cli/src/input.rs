//! Parsers for inline flags and JSON input files.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;
use twistfix::linalg::CMatrix;
use twistfix::phase::parse_rational;
use twistfix::proper::GAlgebra;
use twistfix::{Cocycle, GroupDescriptor, GroupElement, Phase};

/// Parses `[[0,0],[1/4,0]]` into rational rows.
pub fn parse_rational_matrix(text: &str) -> Result<Vec<Vec<num_rational::Rational64>>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = s
        .strip_prefix("[[")
        .and_then(|r| r.strip_suffix("]]"))
        .ok_or_else(|| anyhow!("matrix must look like [[a,b],[c,d]], got '{text}'"))?;
    inner
        .split("],[")
        .map(|row| {
            row.split(',')
                .map(|e| {
                    let e = e.trim_matches('"');
                    parse_rational(e).ok_or_else(|| anyhow!("cannot parse rational '{e}'"))
                })
                .collect()
        })
        .collect()
}

/// Builds a cocycle from `--matrix` or from a JSON spec file.
pub fn cocycle_from_inputs(group: Option<&str>, matrix: Option<&str>, spec: Option<&str>) -> Result<Cocycle> {
    if let Some(path) = spec {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return cocycle_from_json(&text);
    }
    let group: GroupDescriptor = group
        .ok_or_else(|| anyhow!("--group is required without --spec"))?
        .parse()?;
    match matrix {
        Some(m) => Ok(Cocycle::from_bicharacter(&group, parse_rational_matrix(m)?)?),
        None => Ok(Cocycle::trivial(&group)?),
    }
}

fn json_error(e: serde_json::Error) -> anyhow::Error {
    let text = e.to_string();
    let message = text.split(" at line ").next().unwrap_or(&text);
    anyhow!("malformed JSON at line {}, column {}: {message}", e.line(), e.column())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CocycleSpec {
    group: String,
    matrix: Option<Vec<Vec<Value>>>,
    table: Option<Vec<Value>>,
}

fn rational_value(v: &Value) -> Result<num_rational::Rational64> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| anyhow!("cannot parse rational '{s}'")),
        Value::Number(n) => n
            .as_i64()
            .map(num_rational::Rational64::from_integer)
            .ok_or_else(|| anyhow!("non-integer number {n}; write fractions as strings \"p/q\"")),
        other => bail!("expected a rational, got {other}"),
    }
}

pub fn cocycle_from_json(text: &str) -> Result<Cocycle> {
    let spec: CocycleSpec = serde_json::from_str(text).map_err(json_error)?;
    let group: GroupDescriptor = spec.group.parse()?;
    match (spec.matrix, spec.table) {
        (Some(m), None) => {
            let rows = m
                .iter()
                .map(|r| r.iter().map(rational_value).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(Cocycle::from_bicharacter(&group, rows)?)
        }
        (None, Some(t)) => {
            let flat: Vec<&Value> = t
                .iter()
                .flat_map(|v| match v {
                    Value::Array(row) => row.iter().collect::<Vec<_>>(),
                    other => vec![other],
                })
                .collect();
            let phases = flat
                .into_iter()
                .map(|v| rational_value(v).map(Phase::from_rational))
                .collect::<Result<Vec<_>>>()?;
            Ok(Cocycle::from_table(&group, phases)?)
        }
        _ => bail!("cocycle spec needs exactly one of \"matrix\" or \"table\""),
    }
}

fn complex_value(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| anyhow!("bad real part {}", p[0]))?;
            let im = p[1].as_f64().ok_or_else(|| anyhow!("bad imaginary part {}", p[1]))?;
            Ok(Complex64::new(re, im))
        }
        other => bail!("expected a number or [re, im], got {other}"),
    }
}

fn matrix_value(rows: &[Vec<Value>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        bail!("ragged matrix");
    }
    let mut out = CMatrix::zeros(n, m);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = complex_value(v)?;
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionSpec {
    group: String,
    size: usize,
    basis: Vec<Vec<Vec<Value>>>,
    unitaries: Option<Vec<Vec<Vec<Value>>>>,
    action: Option<Vec<Vec<Vec<Value>>>>,
    generators: Option<Vec<Vec<Vec<Value>>>>,
}

/// Reads an action file; returns the action and the generating subspace.
pub fn action_from_json(text: &str) -> Result<(GAlgebra, Vec<CMatrix>)> {
    let spec: ActionSpec = serde_json::from_str(text).map_err(json_error)?;
    let group: GroupDescriptor = spec.group.parse()?;
    let mats = |list: &[Vec<Vec<Value>>]| list.iter().map(|m| matrix_value(m)).collect::<Result<Vec<_>>>();
    let basis = mats(&spec.basis)?;
    let act = match (spec.unitaries, spec.action) {
        (Some(u), None) => GAlgebra::from_unitaries(&group, spec.size, basis, mats(&u)?)?,
        (None, Some(a)) => GAlgebra::new(&group, spec.size, basis, mats(&a)?)?,
        _ => bail!("action spec needs exactly one of \"unitaries\" or \"action\""),
    };
    let generators = match spec.generators {
        Some(g) => mats(&g)?,
        None => act.basis().to_vec(),
    };
    Ok((act, generators))
}

/// Parses `1;0,1` into one group element per generator.
pub fn parse_elements(text: &str) -> Result<Vec<GroupElement>> {
    text.split(';')
        .map(|part| {
            part.split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| anyhow!("bad coordinate '{c}'")))
                .collect::<Result<Vec<_>>>()
                .map(GroupElement)
        })
        .collect()
}
