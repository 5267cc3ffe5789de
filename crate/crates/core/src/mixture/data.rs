use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Datum {
    Bool(bool),
    /// Level index in `[0, levels)`.
    Cat(u32),
    Real(f64),
}

impl Datum {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Datum::Bool(_) => "boolean",
            Datum::Cat(_) => "categorical",
            Datum::Real(_) => "real",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Boolean,
    Categorical { levels: u32 },
    Real,
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Boolean => "boolean",
            FeatureKind::Categorical { .. } => "categorical",
            FeatureKind::Real => "real",
        }
    }

    pub fn check(&self, x: &Datum) -> Result<()> {
        match (self, x) {
            (FeatureKind::Boolean, Datum::Bool(_)) => Ok(()),
            (FeatureKind::Categorical { levels }, Datum::Cat(l)) => {
                if l < levels {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "categorical level {l} outside declared cardinality {levels}"
                    )))
                }
            }
            (FeatureKind::Real, Datum::Real(v)) => {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("non-finite real value {v}")))
                }
            }
            _ => Err(Error::KindMismatch {
                expected: self.name(),
                found: x.kind_name(),
            }),
        }
    }
}

/// Row-major table of typed datapoints. Rows are the clustering unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
    values: Vec<Datum>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(names: Vec<String>, kinds: Vec<FeatureKind>, rows: Vec<Vec<Datum>>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one feature".into()));
        }
        if names.len() != kinds.len() {
            return Err(Error::InvalidArgument(format!(
                "{} column names for {} features",
                names.len(),
                kinds.len()
            )));
        }
        for kind in &kinds {
            if let FeatureKind::Categorical { levels } = kind {
                if *levels < 2 {
                    return Err(Error::InvalidArgument(
                        "categorical features need cardinality >= 2".into(),
                    ));
                }
            }
        }
        let n_rows = rows.len();
        let mut values = Vec::with_capacity(n_rows * kinds.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != kinds.len() {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    kinds.len()
                )));
            }
            for (kind, x) in kinds.iter().zip(&row) {
                kind.check(x)
                    .map_err(|e| Error::InvalidArgument(format!("row {i}: {e}")))?;
            }
            values.extend(row);
        }
        Ok(Self {
            names,
            kinds,
            values,
            n_rows,
        })
    }

    /// Single-feature dataset, handy for tests and toy problems.
    pub fn single(kind: FeatureKind, xs: Vec<Datum>) -> Result<Self> {
        Self::new(
            vec!["x".into()],
            vec![kind],
            xs.into_iter().map(|x| vec![x]).collect(),
        )
    }

    pub fn booleans(xs: &[bool]) -> Self {
        Self::single(
            FeatureKind::Boolean,
            xs.iter().map(|&b| Datum::Bool(b)).collect(),
        )
        .expect("boolean data is always valid")
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Datum] {
        let f = self.kinds.len();
        &self.values[i * f..(i + 1) * f]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Datum]> {
        self.values.chunks(self.kinds.len())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, f: usize) -> impl Iterator<Item = &Datum> + '_ {
        self.rows().map(move |r| &r[f])
    }

    /// Copies the given rows (in order) into a new dataset.
    pub fn subset(&self, ids: &[usize]) -> Dataset {
        let f = self.kinds.len();
        let mut values = Vec::with_capacity(ids.len() * f);
        for &i in ids {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            values,
            n_rows: ids.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        let kinds = vec![FeatureKind::Categorical { levels: 3 }, FeatureKind::Real];
        let names = vec!["a".to_string(), "b".to_string()];
        let ok = Dataset::new(
            names.clone(),
            kinds.clone(),
            vec![vec![Datum::Cat(2), Datum::Real(1.5)]],
        );
        assert!(ok.is_ok());
        let overflow = Dataset::new(
            names.clone(),
            kinds.clone(),
            vec![vec![Datum::Cat(3), Datum::Real(1.5)]],
        );
        assert!(overflow.is_err());
        let nan = Dataset::new(
            names.clone(),
            kinds.clone(),
            vec![vec![Datum::Cat(0), Datum::Real(f64::NAN)]],
        );
        assert!(nan.is_err());
        let swapped = Dataset::new(names, kinds, vec![vec![Datum::Real(0.0), Datum::Cat(0)]]);
        assert!(matches!(swapped, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn subset_copies_rows() {
        let d = Dataset::booleans(&[true, false, false, true]);
        let s = d.subset(&[3, 1]);
        assert_eq!(s.n_rows(), 2);
        assert_eq!(s.row(0), &[Datum::Bool(true)]);
        assert_eq!(s.row(1), &[Datum::Bool(false)]);
    }
}
