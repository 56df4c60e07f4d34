//! Dense rank-2 tensors of 64-bit floats, row-major.
//!
//! Serialization uses nested row arrays so checkpoints stay readable.

use serde::de;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, v: f64) -> Self {
        Tensor { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor { rows: 1, cols: 1, data: vec![v] }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} values cannot fill a {rows}x{cols} tensor",
                data.len()
            )));
        }
        Ok(Tensor { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("a tensor needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::InvalidInput("a tensor needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "ragged tensor rows: {} and {cols} columns",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Tensor { rows: rows.len(), cols, data })
    }

    /// A single-column tensor from a vector.
    pub fn from_col(values: &[f64]) -> Result<Self> {
        Tensor::from_flat(values.len(), 1, values.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// The single value of a 1x1 tensor.
    pub fn item(&self) -> Result<f64> {
        if self.shape() != (1, 1) {
            return Err(Error::InvalidInput(format!(
                "item() on a {}x{} tensor",
                self.rows, self.cols
            )));
        }
        Ok(self.data[0])
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self (m,k) * other (k,n) -> (m,n)`.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.cols != other.rows {
            return Err(Error::InvalidInput(format!(
                "matmul shape mismatch: {:?} * {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let (m, k) = self.shape();
        let n = other.cols;
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let arow = self.row(i);
            let orow = &mut out[i * n..(i + 1) * n];
            for (kk, &aik) in arow.iter().enumerate() {
                let brow = &other.data[kk * n..(kk + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        }
        Tensor::from_flat(m, n, out).map_err(|_| unreachable_shape(m, k))
    }

    /// `self (m,n) * other^T (k,n) -> (m,k)`.
    pub fn matmul_nt(&self, other: &Tensor) -> Result<Tensor> {
        if self.cols != other.cols {
            return Err(Error::InvalidInput(format!(
                "matmul_nt shape mismatch: {:?} * {:?}^T",
                self.shape(),
                other.shape()
            )));
        }
        let m = self.rows;
        let k = other.rows;
        let mut out = vec![0.0; m * k];
        for i in 0..m {
            let arow = self.row(i);
            for kk in 0..k {
                let brow = other.row(kk);
                out[i * k + kk] = arow.iter().zip(brow).map(|(a, b)| a * b).sum();
            }
        }
        Tensor::from_flat(m, k, out).map_err(|_| unreachable_shape(m, k))
    }

    /// `self^T (m,k) * other (m,n) -> (k,n)`.
    pub fn matmul_tn(&self, other: &Tensor) -> Result<Tensor> {
        if self.rows != other.rows {
            return Err(Error::InvalidInput(format!(
                "matmul_tn shape mismatch: {:?}^T * {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let k = self.cols;
        let n = other.cols;
        let mut out = vec![0.0; k * n];
        for i in 0..self.rows {
            let arow = self.row(i);
            let brow = other.row(i);
            for (kk, &a) in arow.iter().enumerate() {
                let orow = &mut out[kk * n..(kk + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Tensor::from_flat(k, n, out).map_err(|_| unreachable_shape(k, n))
    }

    /// Elementwise in-place accumulation.
    pub fn add_in_place(&mut self, other: &Tensor) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::InvalidInput(format!(
                "cannot accumulate {:?} into {:?}",
                other.shape(),
                self.shape()
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }
}

fn unreachable_shape(r: usize, c: usize) -> Error {
    Error::Numerical(format!("internal tensor shape bug at {r}x{c}"))
}

impl Serialize for Tensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        Tensor::from_rows(&rows).map_err(de::Error::custom)
    }
}
