//! Named summary-statistic vectors with a shared coordinate schema.

use std::fmt;
use std::sync::Arc;

use crate::error::CoreError;

/// An ordered list of coordinate names shared by summary vectors and trajectories.
///
/// Cloning is cheap (the name list is reference-counted); equality compares contents.
#[derive(Debug, Clone)]
pub struct Schema {
    names: Arc<[String]>,
}

impl Schema {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        Self {
            names: names.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Position of a coordinate name, if present.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for Schema {}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.names.join(","))
    }
}

/// A finite real vector tagged with its coordinate schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryVec {
    schema: Schema,
    values: Vec<f64>,
}

impl SummaryVec {
    /// Builds a summary vector, rejecting length mismatches and non-finite entries.
    pub fn new(schema: Schema, values: Vec<f64>) -> Result<Self, CoreError> {
        if values.len() != schema.len() {
            return Err(CoreError::LengthMismatch {
                expected: schema.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite(format!(
                "summary coordinate '{}'",
                schema.names()[i]
            )));
        }
        Ok(Self { schema, values })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value of a named coordinate, if the schema contains it.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.schema.index_of(name).map(|i| self.values[i])
    }

    /// Euclidean distance to another vector with the same schema.
    pub fn euclidean_distance(&self, other: &SummaryVec) -> Result<f64, CoreError> {
        if self.schema != other.schema {
            return Err(CoreError::SchemaMismatch(format!(
                "{} vs {}",
                self.schema, other.schema
            )));
        }
        Ok(euclidean(&self.values, &other.values))
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
