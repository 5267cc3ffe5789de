//! CSV ingestion with a declared or inferred column schema.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use subanneal_core::{Dataset, Datum, FeatureKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical { cardinality: u32 },
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub rows: Option<usize>,
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::InvalidArgument("schema needs at least one column".into()));
        }
        for c in &self.columns {
            if let ColumnKind::Categorical { cardinality } = c.kind {
                if cardinality < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "column {}: cardinality must be at least 2",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum SchemaSource {
    Infer,
    Declared(DatasetSchema),
}

/// A typed dataset plus the level labels of its categorical columns.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub schema: DatasetSchema,
    /// Level labels per column in index order (empty for real columns).
    pub levels: Vec<Vec<String>>,
}

/// Reads a headed CSV file. Inference makes a column real when every value
/// parses as a finite number, categorical otherwise, with levels numbered in
/// order of first appearance. Empty fields are rejected.
pub fn ingest_csv(path: &Path, schema: &SchemaSource) -> Result<Ingested> {
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let mut raw: Vec<Vec<String>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            path: name.clone(),
            row: i + 1,
            column: "-".into(),
            msg: e.to_string(),
        })?;
        let row: Vec<String> = rec.iter().map(|s| s.trim().to_string()).collect();
        for (j, v) in row.iter().enumerate() {
            if v.is_empty() {
                return Err(Error::Parse {
                    path: name.clone(),
                    row: i + 1,
                    column: header[j].clone(),
                    msg: "missing value".into(),
                });
            }
        }
        raw.push(row);
    }
    parse_table(&name, header, raw, schema)
}

pub(crate) fn parse_table(
    name: &str,
    header: Vec<String>,
    raw: Vec<Vec<String>>,
    schema: &SchemaSource,
) -> Result<Ingested> {
    let err = |row: usize, column: &str, msg: String| Error::Parse {
        path: name.to_string(),
        row,
        column: column.to_string(),
        msg,
    };
    let schema = match schema {
        SchemaSource::Declared(s) => {
            s.validate()?;
            let names: Vec<&str> = s.columns.iter().map(|c| c.name.as_str()).collect();
            if names != header.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(err(0, "-", format!("header {header:?} does not match schema {names:?}")));
            }
            s.clone()
        }
        SchemaSource::Infer => infer_schema(&header, &raw)?,
    };
    if let Some(n) = schema.rows {
        if n != raw.len() {
            return Err(err(0, "-", format!("schema declares {n} rows, file has {}", raw.len())));
        }
    }
    let width = schema.columns.len();
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); width];
    let mut lookup: Vec<HashMap<String, u32>> = vec![HashMap::new(); width];
    let mut rows = Vec::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        let row_no = i + 1;
        let mut row = Vec::with_capacity(width);
        for (j, col) in schema.columns.iter().enumerate() {
            let v = &r[j];
            row.push(match col.kind {
                ColumnKind::Real => {
                    let x: f64 = v
                        .parse()
                        .map_err(|_| err(row_no, &col.name, format!("cannot parse {v:?} as a real")))?;
                    if !x.is_finite() {
                        return Err(err(row_no, &col.name, format!("non-finite value {v:?}")));
                    }
                    Datum::Real(x)
                }
                ColumnKind::Categorical { cardinality } => {
                    let next = lookup[j].len() as u32;
                    let idx = *lookup[j].entry(v.clone()).or_insert(next);
                    if idx == next {
                        if next >= cardinality {
                            return Err(err(
                                row_no,
                                &col.name,
                                format!("level {v:?} exceeds declared cardinality {cardinality}"),
                            ));
                        }
                        levels[j].push(v.clone());
                    }
                    Datum::Cat(idx)
                }
            });
        }
        rows.push(row);
    }
    let kinds = schema
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Real => FeatureKind::Real,
            ColumnKind::Categorical { cardinality } => FeatureKind::Categorical { levels: cardinality },
        })
        .collect();
    let names = schema.columns.iter().map(|c| c.name.clone()).collect();
    let dataset = Dataset::new(names, kinds, rows)?;
    Ok(Ingested { dataset, schema, levels })
}

fn infer_schema(header: &[String], raw: &[Vec<String>]) -> Result<DatasetSchema> {
    let columns = header
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let real = !raw.is_empty() && raw.iter().all(|r| r[j].parse::<f64>().is_ok_and(f64::is_finite));
            let kind = if real {
                ColumnKind::Real
            } else {
                let mut seen = std::collections::HashSet::new();
                for r in raw {
                    seen.insert(r[j].as_str());
                }
                ColumnKind::Categorical {
                    cardinality: (seen.len() as u32).max(2),
                }
            };
            ColumnSpec { name: name.clone(), kind }
        })
        .collect();
    let schema = DatasetSchema {
        columns,
        rows: Some(raw.len()),
    };
    schema.validate()?;
    Ok(schema)
}

/// Writes a dataset as CSV, using level labels when given and `L<k>`
/// otherwise.
pub fn write_csv(path: &Path, data: &Dataset, levels: Option<&[Vec<String>]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(data.names())?;
    for row in data.rows() {
        let rec: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, x)| match x {
                Datum::Real(v) => format!("{v}"),
                Datum::Cat(k) => match levels.and_then(|l| l.get(j)).and_then(|l| l.get(*k as usize)) {
                    Some(s) => s.clone(),
                    None => format!("L{k}"),
                },
                Datum::Bool(b) => b.to_string(),
            })
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
