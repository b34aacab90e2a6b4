//! Orthonormal cosine basis on a compact interval.
//!
//! On A = [lower, upper] with L = upper - lower and y = (x - lower)/L, the
//! family is
//!
//! ```text
//! phi_0(x) = 1/sqrt(L)
//! phi_l(x) = sqrt(2/L) cos(pi l y),   l = 1, 2, ...
//! ```
//!
//! The model of index m keeps the first D_m = 2m + 1 functions, so the
//! spaces are nested: the index-m family is a prefix of the index-(m+1) one.
//! Every function is defined as 0 outside A. The family is orthonormal in
//! L^2(A), and any t = sum alpha_l phi_l satisfies the sup-norm bound
//! `||t||_inf^2 <= (2/L) D_m ||t||^2` because the squared values of the
//! first D basis functions sum to at most (2 D - 1)/L at any point.
//!
//! Cosine frequencies are half-period multiples (pi l / L, not 2 pi l / L):
//! expansions of non-periodic smooth functions then converge like the
//! cosine series of their even reflection, without an endpoint penalty.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Number of basis functions in the model of index `m`.
pub fn model_dim(m: usize) -> usize {
    2 * m + 1
}

/// Cosine basis attached to a compact interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineBasis {
    lower: f64,
    upper: f64,
}

impl CosineBasis {
    /// Basis on `[lower, upper]`. Requires a nondegenerate finite interval.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(Error::InvalidParameter {
                name: "interval",
                reason: format!("need finite lower < upper, got [{lower}, {upper}]"),
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Sup-norm constant phi_1 in `||t||_inf^2 <= phi_1 D_m ||t||^2`.
    pub fn sup_norm_constant(&self) -> f64 {
        2.0 / self.length()
    }

    /// Whether `x` lies in the closed interval.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// Writes the first `dim` basis functions at `x` into `out`.
    ///
    /// Out-of-interval points get all zeros, matching the convention that
    /// the basis (and anything it spans) is supported on the interval.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        if !self.contains(x) {
            out.fill(0.0);
            return;
        }
        let len = self.length();
        let y = (x - self.lower) / len;
        if let Some(first) = out.first_mut() {
            *first = 1.0 / len.sqrt();
        }
        let scale = (2.0 / len).sqrt();
        for (l, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = scale * (std::f64::consts::PI * l as f64 * y).cos();
        }
    }

    /// Values of the D_m = 2m+1 basis functions of model `m` at `x`.
    pub fn eval(&self, m: usize, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; model_dim(m)];
        self.eval_into(x, &mut out);
        out
    }

    /// Design matrix of model `m` at the points `xs` (one row per point).
    ///
    /// Rows for out-of-interval points are zero.
    pub fn design_matrix(&self, m: usize, xs: &[f64]) -> DMatrix<f64> {
        let dim = model_dim(m);
        let mut mat = DMatrix::zeros(xs.len(), dim);
        let mut row = vec![0.0; dim];
        for (i, &x) in xs.iter().enumerate() {
            self.eval_into(x, &mut row);
            for (j, &v) in row.iter().enumerate() {
                mat[(i, j)] = v;
            }
        }
        mat
    }
}
