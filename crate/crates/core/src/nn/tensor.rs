use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
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

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out[k] += Σ_j input[j] * self[j, k]` for the row range starting at
    /// `row_offset`. The matrix is laid out input-major, so the inner loop
    /// walks a contiguous row.
    pub fn accumulate_vec_mul(&self, input: &[f64], row_offset: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cols);
        debug_assert!(row_offset + input.len() <= self.rows);
        for (j, &x) in input.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = self.row(row_offset + j);
            for (o, &w) in out.iter_mut().zip(row) {
                *o += x * w;
            }
        }
    }

    /// `self[row_offset + j, k] += input[j] * delta[k]` (rank-one update).
    pub fn accumulate_outer(&mut self, input: &[f64], row_offset: usize, delta: &[f64]) {
        debug_assert_eq!(delta.len(), self.cols);
        for (j, &x) in input.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = self.row_mut(row_offset + j);
            for (g, &d) in row.iter_mut().zip(delta) {
                *g += x * d;
            }
        }
    }

    /// `out[j] += Σ_k self[row_offset + j, k] * delta[k]`, i.e. the product
    /// with the transposed matrix used when propagating gradients.
    pub fn accumulate_transposed_mul(&self, delta: &[f64], row_offset: usize, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let row = self.row(row_offset + j);
            *o += row.iter().zip(delta).map(|(w, d)| w * d).sum::<f64>();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Self { data }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Glorot (Xavier) uniform initialization: entries drawn from
/// `U[-L, L]` with `L = sqrt(6 / (rows + cols))`.
pub fn glorot_init(rows: usize, cols: usize, seed: u64) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidShape(format!(
            "glorot init needs non-zero dimensions, got {rows}x{cols}"
        )));
    }
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut rng = rng::seeded(seed);
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-limit..=limit))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// Uniform initialization in `[-limit, limit]`.
pub fn uniform_init(rows: usize, cols: usize, limit: f64, seed: u64) -> Matrix {
    let mut rng = rng::seeded(seed);
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-limit..=limit))
        .collect();
    Matrix {
        rows,
        cols,
        data,
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
