use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::{Error, Result};

pub trait RkScalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn is_finite_value(&self) -> bool;
}

impl RkScalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl RkScalar for Complex64 {
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Classic fourth-order Runge–Kutta with reusable stage buffers.
#[derive(Debug, Clone, Default)]
pub struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: RkScalar> Rk4<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![T::default(); dim];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advance `y` from `t` to `t + dt` in place. `rhs(t, y, dy)` writes the
    /// derivative into `dy`.
    pub fn step<F>(&mut self, mut rhs: F, y: &mut [T], t: f64, dt: f64) -> Result<()>
    where
        F: FnMut(f64, &[T], &mut [T]) -> Result<()>,
    {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "time step must be positive"));
        }
        let n = y.len();
        if self.k1.len() != n {
            *self = Self::new(n);
        }
        let half = 0.5 * dt;

        rhs(t, y, &mut self.k1)?;
        check(&self.k1, t)?;
        for i in 0..n {
            self.tmp[i] = y[i] + self.k1[i] * half;
        }
        rhs(t + half, &self.tmp, &mut self.k2)?;
        check(&self.k2, t + half)?;
        for i in 0..n {
            self.tmp[i] = y[i] + self.k2[i] * half;
        }
        rhs(t + half, &self.tmp, &mut self.k3)?;
        check(&self.k3, t + half)?;
        for i in 0..n {
            self.tmp[i] = y[i] + self.k3[i] * dt;
        }
        rhs(t + dt, &self.tmp, &mut self.k4)?;
        check(&self.k4, t + dt)?;

        let sixth = dt / 6.0;
        for i in 0..n {
            y[i] = y[i] + (self.k1[i] + self.k2[i] * 2.0 + self.k3[i] * 2.0 + self.k4[i]) * sixth;
        }
        Ok(())
    }
}

fn check<T: RkScalar>(k: &[T], t: f64) -> Result<()> {
    match k.iter().position(|v| !v.is_finite_value()) {
        Some(index) => Err(Error::NonFinite { t, index }),
        None => Ok(()),
    }
}

/// One RK4 step returning the new state.
pub fn rk4_step<T, F>(rhs: F, state: &[T], t: f64, dt: f64) -> Result<Vec<T>>
where
    T: RkScalar,
    F: FnMut(f64, &[T], &mut [T]) -> Result<()>,
{
    let mut y = state.to_vec();
    Rk4::new(y.len()).step(rhs, &mut y, t, dt)?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(lambda: f64, t_end: f64, steps: usize) -> f64 {
        let dt = t_end / steps as f64;
        let mut rk = Rk4::new(1);
        let mut y = [1.0];
        for k in 0..steps {
            rk.step(
                |_, y: &[f64], dy: &mut [f64]| {
                    dy[0] = lambda * y[0];
                    Ok(())
                },
                &mut y,
                k as f64 * dt,
                dt,
            )
            .unwrap();
        }
        y[0]
    }

    #[test]
    fn zero_rhs_leaves_state() {
        let y = rk4_step(
            |_, _: &[f64], dy: &mut [f64]| {
                dy.fill(0.0);
                Ok(())
            },
            &[1.5, -2.0],
            0.0,
            0.3,
        )
        .unwrap();
        assert_eq!(y, vec![1.5, -2.0]);
    }

    #[test]
    fn exponential_single_step() {
        let y = integrate(1.0, 0.1, 1);
        assert!((y - 1.105_170_83).abs() < 1e-7);
        assert!((y - 0.1f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (-1.0f64).exp();
        let e1 = (integrate(-1.0, 1.0, 10) - exact).abs();
        let e2 = (integrate(-1.0, 1.0, 20) - exact).abs();
        let ratio = e1 / e2;
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn non_finite_derivative_aborts() {
        let err = rk4_step(
            |_, _: &[f64], dy: &mut [f64]| {
                dy[0] = f64::NAN;
                Ok(())
            },
            &[1.0],
            0.0,
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        assert!(rk4_step(|_, _: &[f64], _: &mut [f64]| Ok(()), &[1.0], 0.0, 0.0).is_err());
    }
}
