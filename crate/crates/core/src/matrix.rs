use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{LartError, Result};

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for x in 0..dim {
            m.data[x * dim + x] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.dim + y]
    }

    #[inline]
    pub(crate) fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[x * self.dim + y] = v;
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.dim..(x + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Comma-separated values, one matrix row per line, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.dim * self.dim * 12);
        for row in self.rows() {
            for (y, v) in row.iter().enumerate() {
                if y > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| LartError::io(path, e))
    }
}
