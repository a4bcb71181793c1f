use serde::{Deserialize, Serialize};

use super::{c, ComplexMatrix};
use crate::error::{Error, Result};

/// Matrix exchange format: real and imaginary parts in column-stacking order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: m.as_slice().iter().map(|z| z.re).collect(),
            im: m.as_slice().iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::Shape(format!(
                "re has {} entries but im has {}",
                j.re.len(),
                j.im.len()
            )));
        }
        let data = j.re.iter().zip(&j.im).map(|(&a, &b)| c(a, b)).collect();
        ComplexMatrix::from_column_major(j.rows, j.cols, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_uses_column_order() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(3.0, 0.5)], vec![c(2.0, 0.0), c(4.0, -1.0)]])
            .unwrap();
        let j = MatrixJson::from(&m);
        assert_eq!(j.re, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(j.im, vec![0.0, 0.0, 0.5, -1.0]);
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(ComplexMatrix::try_from(&back).unwrap(), m);
    }

    #[test]
    fn json_rejects_mismatched_parts() {
        let j = MatrixJson {
            rows: 1,
            cols: 2,
            re: vec![1.0, 2.0],
            im: vec![0.0],
        };
        assert!(ComplexMatrix::try_from(&j).is_err());
    }
}
