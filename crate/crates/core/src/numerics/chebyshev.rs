use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Chebyshev–Gauss–Lobatto collocation on `[0, L]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialGrid {
    /// Nodes, strictly increasing from 0 to `length`.
    pub points: Vec<f64>,
    /// First-derivative operator, row-major N×N, 1/m.
    pub diff_matrix: Vec<f64>,
    /// Clenshaw–Curtis weights on the nodes, m.
    pub weights: Vec<f64>,
    pub length: f64,
    /// Spectral antiderivative from z = 0: row j integrates a function
    /// sampled on the nodes over [0, z_j]. Row-major N×N.
    #[serde(skip)]
    integration: Vec<f64>,
}

impl SpatialGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.diff_matrix[i * n..(i + 1) * n]
                    .iter()
                    .zip(f)
                    .map(|(d, v)| d * v)
                    .sum()
            })
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// out[j] = ∫₀^{z_j} s(z) dz, obtained by collocating ∂_z y = s with
    /// y(0) = 0.
    pub fn integrate_from_origin(&self, s: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.integration[j * n..(j + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, v) in row.iter().zip(s) {
                acc += v * *m;
            }
            *o = acc;
        }
    }

    /// Largest distance between neighbouring nodes.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

pub fn chebyshev_grid(length: f64, n_z: usize) -> Result<SpatialGrid> {
    if n_z < 4 {
        return Err(Error::invalid("n_z", format!("{n_z} < 4 collocation points")));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::invalid("length", "must be positive"));
    }
    let n = n_z - 1;
    let nf = n as f64;
    // x_j = cos(πj/n) runs from 1 to −1; z = L(1 − x)/2 runs from 0 to L
    let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / nf).cos()).collect();
    let points: Vec<f64> = (0..=n)
        .map(|j| {
            // sin² form keeps the nodes exact near both ends
            let s = (PI * j as f64 / (2.0 * nf)).sin();
            length * s * s
        })
        .collect();

    let c = |j: usize| -> f64 {
        let base = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            base
        } else {
            -base
        }
    };
    let mut d = vec![0.0; n_z * n_z];
    for i in 0..n_z {
        let mut row_sum = 0.0;
        for j in 0..n_z {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[i * n_z + j] = v;
                row_sum += v;
            }
        }
        d[i * n_z + i] = -row_sum;
    }
    // dz = −(L/2) dx
    let scale = -2.0 / length;
    for v in d.iter_mut() {
        *v *= scale;
    }

    let weights = clenshaw_curtis(n)
        .into_iter()
        .map(|w| w * length / 2.0)
        .collect();

    // invert the derivative restricted to nodes 1..n (boundary row removed)
    let inner = DMatrix::from_fn(n, n, |i, j| d[(i + 1) * n_z + (j + 1)]);
    let inv = inner
        .try_inverse()
        .ok_or_else(|| Error::NotConverged("singular Chebyshev derivative block".into()))?;
    let mut integration = vec![0.0; n_z * n_z];
    for i in 0..n {
        for j in 0..n {
            integration[(i + 1) * n_z + (j + 1)] = inv[(i, j)];
        }
    }

    Ok(SpatialGrid {
        points,
        diff_matrix: d,
        weights,
        length,
        integration,
    })
}

/// Clenshaw–Curtis weights on [−1, 1] for the n+1 Lobatto nodes.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / nf).collect();
    let mut w = vec![0.0; n + 1];
    let mut v = vec![1.0; n - 1];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for i in 1..n {
        w[i] = 2.0 * v[i - 1] / nf;
    }
    w
}
