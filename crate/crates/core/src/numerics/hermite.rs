use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Discrete Maxwell–Boltzmann velocity classes.
///
/// `Σᵢ weights[i] · g(nodes[i]) ≈ ∫ f(v) g(v) dv` with
/// f(v) = exp(−v²/v_T²)/(√π v_T); exact for polynomials of degree < 2N_v.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub v_thermal: f64,
}

impl VelocityGrid {
    /// A single class at rest carrying the full weight.
    pub fn at_rest() -> Self {
        VelocityGrid {
            nodes: vec![0.0],
            weights: vec![1.0],
            v_thermal: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn average(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * g(v))
            .sum()
    }
}

pub fn velocity_grid(v_thermal: f64, n_v: usize) -> Result<VelocityGrid> {
    if n_v == 0 {
        return Err(Error::invalid("n_v", "at least one velocity class is required"));
    }
    if !(v_thermal >= 0.0) || !v_thermal.is_finite() {
        return Err(Error::invalid("v_thermal", "must be finite and ≥ 0"));
    }
    if v_thermal == 0.0 {
        return Ok(VelocityGrid::at_rest());
    }
    let (x, w) = gauss_hermite(n_v)?;
    let norm = PI.sqrt();
    Ok(VelocityGrid {
        nodes: x.iter().map(|&xi| xi * v_thermal).collect(),
        weights: w.iter().map(|&wi| wi / norm).collect(),
        v_thermal,
    })
}

/// Physicists' Gauss–Hermite rule (weight e^{−x²}), nodes ascending.
///
/// Newton iteration on the orthonormal recurrence with the usual asymptotic
/// starting guesses; nodes are mirrored so the rule is exactly symmetric.
fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged(format!("Gauss–Hermite node {i} of {n}")));
        }
        x[i] = z;
        w[i] = 2.0 / (pp * pp);
    }
    // x[0..m] holds the largest nodes in descending order
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..m {
        nodes[n - 1 - i] = x[i];
        nodes[i] = -x[i];
        weights[n - 1 - i] = w[i];
        weights[i] = w[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ f(v) vᵏ dv for the Maxwell–Boltzmann density: (k−1)!! v_Tᵏ / 2^{k/2}
    /// for even k, zero for odd k.
    fn gaussian_moment(k: u32, v_t: f64) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let mut dfact = 1.0;
        let mut j = k as i64 - 1;
        while j > 1 {
            dfact *= j as f64;
            j -= 2;
        }
        dfact * v_t.powi(k as i32) / 2f64.powi(k as i32 / 2)
    }

    #[test]
    fn normalisation_symmetry_and_second_moment() {
        for &n in &[1usize, 2, 3, 8, 16, 33, 64, 128] {
            let g = velocity_grid(194.0, n).unwrap();
            let s: f64 = g.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "n = {n}: Σw = {s}");
            let mean = g.average(|v| v);
            assert!(mean.abs() < 1e-12 * 194.0);
            for i in 0..n {
                assert_eq!(g.nodes[i], -g.nodes[n - 1 - i]);
            }
            if n >= 2 {
                let m2 = g.average(|v| v * v);
                assert!((m2 - 194.0f64.powi(2) / 2.0).abs() < 1e-10 * 194.0f64.powi(2));
            }
        }
    }

    #[test]
    fn moments_through_degree_five() {
        let v_t = 3.0;
        let g = velocity_grid(v_t, 8).unwrap();
        for k in 0..=5u32 {
            let q = g.average(|v| v.powi(k as i32));
            let exact = gaussian_moment(k, v_t);
            let scale = v_t.powi(k as i32);
            assert!((q - exact).abs() < 1e-10 * scale, "k = {k}: {q} vs {exact}");
        }
    }

    #[test]
    fn exact_to_degree_2n_minus_1() {
        let g = velocity_grid(1.0, 6).unwrap();
        for k in 0..12u32 {
            let q = g.average(|v| v.powi(k as i32));
            assert!((q - gaussian_moment(k, 1.0)).abs() < 1e-11, "k = {k}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(velocity_grid(1.0, 0).is_err());
        let g = velocity_grid(0.0, 16).unwrap();
        assert_eq!(g.nodes, vec![0.0]);
        assert_eq!(g.weights, vec![1.0]);
    }
}
