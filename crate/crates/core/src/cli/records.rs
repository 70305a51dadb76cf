//! Solution records read back from CSV or JSON output.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::analytic::{EvenSolution, ProblemParams};
use crate::noneven::{OuterProfile, PiecewiseSolution};

use super::CliError;

type Fields = BTreeMap<String, String>;

/// One solution rebuilt from a record, or why it could not be.
pub struct Record {
    pub index: usize,
    pub kind: &'static str,
    pub solution: Result<PiecewiseSolution, String>,
    /// `lambda` column of an even record, checked against `Lambda(beta)`.
    pub stored_lambda: Option<f64>,
}

fn num(fields: &Fields, key: &str) -> Result<f64, String> {
    let raw = fields.get(key).ok_or_else(|| format!("missing field {key}"))?;
    raw.trim().parse::<f64>().map_err(|_| format!("field {key} = {raw:?} is not a number"))
}

fn params(fields: &Fields) -> Result<ProblemParams, String> {
    ProblemParams::new(num(fields, "alpha")?).map_err(|e| e.to_string())
}

fn piecewise(fields: &Fields) -> Result<PiecewiseSolution, String> {
    let sol = PiecewiseSolution {
        params: params(fields)?,
        lambda: num(fields, "lambda")?,
        a: num(fields, "a")?,
        b: num(fields, "b")?,
        left: OuterProfile { d: num(fields, "d_l")?, m: num(fields, "m_l")? },
        right: OuterProfile { d: num(fields, "d_r")?, m: num(fields, "m_r")? },
    };
    if !(sol.lambda > 0.0 && sol.left.d > 0.0 && sol.right.d > 0.0) {
        return Err("lambda, d_l and d_r must be positive".into());
    }
    Ok(sol)
}

fn even(fields: &Fields, key: &str) -> Result<PiecewiseSolution, String> {
    let e = EvenSolution::new(params(fields)?, num(fields, key)?).map_err(|e| e.to_string())?;
    Ok(PiecewiseSolution::from_even(&e))
}

fn records_from(rows: Vec<Fields>) -> Vec<Record> {
    let mut out = Vec::new();
    for fields in rows {
        let has = |k: &str| fields.contains_key(k);
        if ["a", "b", "d_l", "m_l", "d_r", "m_r", "lambda"].iter().all(|k| has(k)) {
            out.push(Record { index: 0, kind: "non-even", solution: piecewise(&fields), stored_lambda: None });
        } else if has("alpha") && has("beta") {
            let stored_lambda = num(&fields, "lambda").ok();
            out.push(Record { index: 0, kind: "even", solution: even(&fields, "beta"), stored_lambda });
        } else if has("alpha") && has("beta1") && has("beta2") {
            for key in ["beta1", "beta2"] {
                let stored_lambda = num(&fields, &key.replace("beta", "lambda")).ok();
                out.push(Record { index: 0, kind: "even", solution: even(&fields, key), stored_lambda });
            }
        }
    }
    for (i, r) in out.iter_mut().enumerate() {
        r.index = i + 1;
    }
    out
}

fn csv_rows(text: &str) -> Result<Vec<Fields>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Config(format!("unreadable CSV header: {e}")))?.clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Config(format!("malformed CSV: {e}")))?;
        rows.push(headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_owned(), v.to_owned())).collect());
    }
    Ok(rows)
}

fn collect_objects(v: &Value, out: &mut Vec<Fields>) {
    match v {
        Value::Array(items) => items.iter().for_each(|i| collect_objects(i, out)),
        Value::Object(map) => {
            let fields: Fields = map
                .iter()
                .filter_map(|(k, v)| match v {
                    Value::Number(n) => Some((k.clone(), n.to_string())),
                    Value::String(s) => Some((k.clone(), s.clone())),
                    Value::Null => Some((k.clone(), "null".into())),
                    _ => None,
                })
                .collect();
            out.push(fields);
            map.values().for_each(|c| collect_objects(c, out));
        }
        _ => {}
    }
}

fn json_rows(text: &str) -> Result<Vec<Fields>, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
    let results = doc.get("results").ok_or_else(|| CliError::Config("JSON has no results field".into()))?;
    let mut rows = Vec::new();
    collect_objects(results, &mut rows);
    // the branch origin summarises special points, it is not a record
    if let Some(origin) = results.get("origin") {
        let mut skip = Vec::new();
        collect_objects(origin, &mut skip);
        rows.retain(|r| !skip.contains(r));
    }
    Ok(rows)
}

/// Parse a file written by this tool. `None` means the file is empty.
pub fn parse(text: &str) -> Result<Option<Vec<Record>>, CliError> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(None);
    }
    let rows = if trimmed.starts_with('{') { json_rows(text)? } else { csv_rows(text)? };
    let records = records_from(rows);
    if records.is_empty() {
        return Err(CliError::Config("file holds no solution records".into()));
    }
    Ok(Some(records))
}
