use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative grid function sampled at cell centers, stamped with a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(values: Vec<f64>, time: f64) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "field value {v} at cell {i} is negative or not finite"
            )));
        }
        Ok(Field { values, time })
    }

    pub fn constant(value: f64, cells: usize) -> Result<Self> {
        Field::new(vec![value; cells], 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_nan() {
        assert!(Field::new(vec![1.0, -1e-300], 0.0).is_err());
        assert!(Field::new(vec![f64::NAN], 0.0).is_err());
        assert!(Field::new(vec![0.0, 2.0], 0.5).is_ok());
    }

    #[test]
    fn norms() {
        let f = Field::new(vec![0.5, 3.0, 1.0, 3.0], 0.0).unwrap();
        assert_eq!(f.sup_norm(), 3.0);
        assert_eq!(f.argmax(), 1);
        assert_eq!(f.min(), 0.5);
    }
}
