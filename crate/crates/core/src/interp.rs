//! Periodic cubic spline interpolation on the uniform θ grid.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use crate::field::grid_step;

/// C² periodic cubic spline through samples at `θ_j = 2πj/n`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline<T> {
    values: Vec<T>,
    // second derivatives at the knots
    moments: Vec<T>,
    step: f64,
}

impl<T> PeriodicSpline<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    pub fn new(values: &[T]) -> Self {
        let n = values.len();
        let step = grid_step(n);
        // Uniform periodic spline: M_{j-1} + 4 M_j + M_{j+1} = 6 (y_{j+1} − 2y_j + y_{j−1}) / h².
        let rhs: Vec<T> = (0..n)
            .map(|j| {
                let prev = values[(j + n - 1) % n];
                let next = values[(j + 1) % n];
                (next + prev - values[j] * 2.0) * (6.0 / (step * step))
            })
            .collect();
        let moments = solve_cyclic_141(&rhs);
        Self {
            values: values.to_vec(),
            moments,
            step,
        }
    }

    /// Evaluates at an arbitrary angle; the argument is reduced mod 2π.
    pub fn eval(&self, theta: f64) -> T {
        let n = self.values.len();
        let x = theta.rem_euclid(TAU) / self.step;
        let mut j = x.floor() as usize;
        let mut t = x - j as f64;
        if j >= n {
            j = n - 1;
            t = 1.0;
        }
        let k = (j + 1) % n;
        let s = 1.0 - t;
        let h2 = self.step * self.step / 6.0;
        self.values[j] * s
            + self.values[k] * t
            + self.moments[j] * ((s * s * s - s) * h2)
            + self.moments[k] * ((t * t * t - t) * h2)
    }
}

/// Solves the cyclic system with 4 on the diagonal and 1 on both
/// off-diagonals (wrapping) by Sherman–Morrison on top of a Thomas sweep.
fn solve_cyclic_141<T>(rhs: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = rhs.len();
    // A = B + u vᵀ with u = (γ, 0, …, 0, 1), v = (1, 0, …, 0, 1/γ).
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;

    let thomas = |d: &[T]| -> Vec<T> {
        let mut c_prime = vec![0.0; n];
        let mut d_prime: Vec<T> = d.to_vec();
        let mut denom = diag[0];
        c_prime[0] = 1.0 / denom;
        d_prime[0] = d[0] * (1.0 / denom);
        for i in 1..n {
            denom = diag[i] - c_prime[i - 1];
            c_prime[i] = 1.0 / denom;
            d_prime[i] = (d[i] - d_prime[i - 1]) * (1.0 / denom);
        }
        let mut x = d_prime;
        for i in (0..n - 1).rev() {
            x[i] = x[i] - x[i + 1] * c_prime[i];
        }
        x
    };

    let y = thomas(rhs);
    let mut u_scalar = vec![0.0; n];
    u_scalar[0] = gamma;
    u_scalar[n - 1] = 1.0;
    let z = thomas_scalar(&diag, &u_scalar);
    let vz = z[0] + z[n - 1] / gamma;
    let factor = 1.0 / (1.0 + vz);
    let vy = y[0] + y[n - 1] * (1.0 / gamma);
    y.iter()
        .zip(&z)
        .map(|(&yi, &zi)| yi - vy * (zi * factor))
        .collect()
}

fn thomas_scalar(diag: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c_prime = vec![0.0; n];
    let mut x = d.to_vec();
    c_prime[0] = 1.0 / diag[0];
    x[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - c_prime[i - 1];
        c_prime[i] = 1.0 / denom;
        x[i] = (x[i] - x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= x[i + 1] * c_prime[i];
    }
    x
}
