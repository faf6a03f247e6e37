//! JSON encoding of complex matrices: row-major `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// Version tag written into every document and verdict record.
pub const SCHEMA: &str = "qnmlab/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let z = m[(r, col)];
                data.push([z.re, z.im]);
            }
        }
        MatrixDoc { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Serialization(format!(
                "matrix declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |r, col| {
            let [re, im] = self.data[r * self.cols + col];
            c(re, im)
        }))
    }
}
