//! Periodic grid functions on the uniform parameter grid `θ_j = 2πj/n`.
//!
//! [`ScalarField`] holds real-valued coefficients such as curvature or the
//! normal/tangential components of a deformation, [`TangentField`] holds a
//! planar vector per grid point and represents an element of `T_c Imm`.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DVector, Vector2};

use crate::error::{check_grid, Result};

pub type Vec2 = Vector2<f64>;

/// Parameter spacing of an `n`-point periodic grid.
pub fn grid_step(n: usize) -> f64 {
    TAU / n as f64
}

/// Grid points `θ_j = 2πj/n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// Rotation by +π/2.
#[inline]
pub fn rotate_quarter(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

fn central_difference<T>(values: &[T]) -> Vec<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    let inv = 1.0 / (2.0 * grid_step(n));
    (0..n)
        .map(|j| (values[(j + 1) % n] - values[(j + n - 1) % n]) * inv)
        .collect()
}

fn second_difference<T>(values: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    let h = grid_step(n);
    let inv = 1.0 / (h * h);
    (0..n)
        .map(|j| {
            let prev = values[(j + n - 1) % n];
            let next = values[(j + 1) % n];
            (next + prev - values[j] * 2.0) * inv
        })
        .collect()
}

/// A periodic real function sampled on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    /// Samples `f(θ_j)`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self(theta_grid(n).into_iter().map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Second-order periodic central difference `(f_{j+1} − f_{j−1}) / 2h`.
    pub fn derivative_theta(&self) -> Self {
        Self(central_difference(&self.0))
    }

    /// Three-point second difference `(f_{j+1} − 2f_j + f_{j−1}) / h²`.
    pub fn second_derivative_theta(&self) -> Self {
        Self(second_difference(&self.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().copied().map(f).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(self.len(), other.len())?;
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// Pointwise product `f·h`.
    pub fn times_field(&self, field: &TangentField) -> Result<TangentField> {
        check_grid(self.len(), field.len())?;
        Ok(TangentField(
            self.0
                .iter()
                .zip(field.values())
                .map(|(&s, &v)| v * s)
                .collect(),
        ))
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / self.len() as f64;
        var.sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// A planar vector field along a curve, one vector per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField(Vec<Vec2>);

impl TangentField {
    pub fn new(values: Vec<Vec2>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Vec2::zeros(); n])
    }

    /// The constant (translation) field.
    pub fn constant(n: usize, v: Vec2) -> Self {
        Self(vec![v; n])
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec2) -> Self {
        Self(theta_grid(n).into_iter().map(f).collect())
    }

    /// Field with a single nonzero component: the `index`-th coordinate of
    /// the stacked layout (x-components first, then y-components).
    pub fn basis(n: usize, index: usize) -> Self {
        let mut field = Self::zeros(n);
        if index < n {
            field.0[index].x = 1.0;
        } else {
            field.0[index - n].y = 1.0;
        }
        field
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Vec2] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Vec2> {
        self.0
    }

    pub fn derivative_theta(&self) -> Self {
        Self(central_difference(&self.0))
    }

    pub fn second_derivative_theta(&self) -> Self {
        Self(second_difference(&self.0))
    }

    /// Pointwise Euclidean pairing `⟨h_j, k_j⟩`.
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        check_grid(self.len(), other.len())?;
        Ok(ScalarField(
            self.0.iter().zip(&other.0).map(|(a, b)| a.dot(b)).collect(),
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Stacked coordinates `(x_0..x_{n−1}, y_0..y_{n−1})`.
    pub fn to_stacked(&self) -> DVector<f64> {
        let n = self.len();
        DVector::from_fn(
            2 * n,
            |i, _| if i < n { self.0[i].x } else { self.0[i - n].y },
        )
    }

    pub fn from_stacked(stacked: &DVector<f64>) -> Self {
        let n = stacked.len() / 2;
        Self(
            (0..n)
                .map(|j| Vec2::new(stacked[j], stacked[n + j]))
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for TangentField {
    type Output = Vec2;
    fn index(&self, j: usize) -> &Vec2 {
        &self.0[j]
    }
}

// Arithmetic on same-grid fields. Mismatched lengths are a programming error
// here; the fallible entry points live on the curve and operator types.
impl Add for &TangentField {
    type Output = TangentField;
    fn add(self, rhs: &TangentField) -> TangentField {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        TangentField(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &TangentField {
    type Output = TangentField;
    fn sub(self, rhs: &TangentField) -> TangentField {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        TangentField(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &TangentField {
    type Output = TangentField;
    fn neg(self) -> TangentField {
        self.scale(-1.0)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        ScalarField(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        ScalarField(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, s: f64) -> ScalarField {
        self.map(|x| x * s)
    }
}
