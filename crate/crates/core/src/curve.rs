//! Discretized closed planar curves and their differential geometry.
//!
//! A [`DiscreteCurve`] stores `n` uniform samples `c(θ_j)` of an immersion
//! `S¹ → ℝ²` together with the derived quantities every other module
//! consumes: speed `|c′|`, quadrature weights `|c′|·2π/n` (the discrete
//! `ds`), unit tangent `v = c′/|c′|`, unit normal `n = iv` and curvature.
//!
//! Derivatives are second-order periodic central differences. Curvature is
//! evaluated as `det(c′, c″)/|c′|³` with the three-point stencil for `c″`,
//! which agrees with `⟨D_s v, n⟩` to second order.

use std::f64::consts::TAU;

use crate::error::{check_grid, Error, Result};
use crate::field::{grid_step, rotate_quarter, theta_grid, ScalarField, TangentField, Vec2};
use crate::interp::PeriodicSpline;

/// Speeds below this multiple of the mean speed are treated as degenerate.
pub const IMMERSION_THRESHOLD: f64 = 1e-8;

/// Relative speed deviation tolerated by operations that need a
/// constant-speed parametrization.
pub const CONSTANT_SPEED_TOLERANCE: f64 = 1e-3;

/// Oversampling factor used when measuring arclength for resampling.
pub const RESAMPLE_OVERSAMPLING: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    points: Vec<Vec2>,
    speed: ScalarField,
    ds: ScalarField,
    tangent: TangentField,
    normal: TangentField,
    curvature: ScalarField,
    length: f64,
}

impl DiscreteCurve {
    /// Builds a curve from `n` samples at uniform θ, rejecting grids that are
    /// too small or odd and parametrizations that are not immersions.
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        let n = points.len();
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::GridTooSmall(n));
        }
        let position = TangentField::new(points);
        let velocity = position.derivative_theta();
        let acceleration = position.second_derivative_theta();

        let speed = ScalarField::new(velocity.values().iter().map(|v| v.norm()).collect());
        let threshold = IMMERSION_THRESHOLD * speed.mean();
        if let Some((index, &s)) = speed
            .values()
            .iter()
            .enumerate()
            .find(|(_, &s)| s.is_nan() || s <= threshold)
        {
            return Err(Error::NotImmersed {
                index,
                speed: s,
                threshold,
            });
        }

        let tangent = TangentField::new(
            velocity
                .values()
                .iter()
                .zip(speed.values())
                .map(|(v, s)| v / *s)
                .collect(),
        );
        let normal = TangentField::new(
            tangent
                .values()
                .iter()
                .map(|&v| rotate_quarter(v))
                .collect(),
        );
        let curvature = ScalarField::new(
            velocity
                .values()
                .iter()
                .zip(acceleration.values())
                .zip(speed.values())
                .map(|((d1, d2), s)| (d1.x * d2.y - d1.y * d2.x) / (s * s * s))
                .collect(),
        );
        let h = grid_step(n);
        let ds = speed.map(|s| s * h);
        let length = ds.sum();

        Ok(Self {
            points: position.into_values(),
            speed,
            ds,
            tangent,
            normal,
            curvature,
            length,
        })
    }

    /// Samples a parametrized curve at the uniform grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec2) -> Result<Self> {
        Self::new(theta_grid(n).into_iter().map(f).collect())
    }

    /// Counterclockwise circle of the given radius centred at the origin.
    pub fn circle(n: usize, radius: f64) -> Result<Self> {
        Self::from_fn(n, |t| Vec2::new(radius * t.cos(), radius * t.sin()))
    }

    /// Counterclockwise axis-aligned ellipse with semi-axes `a`, `b`.
    pub fn ellipse(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(n, |t| Vec2::new(a * t.cos(), b * t.sin()))
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn position_field(&self) -> TangentField {
        TangentField::new(self.points.clone())
    }

    pub fn speed(&self) -> &ScalarField {
        &self.speed
    }

    /// Quadrature weights `|c′_j|·2π/n`.
    pub fn ds_weights(&self) -> &ScalarField {
        &self.ds
    }

    pub fn tangent(&self) -> &TangentField {
        &self.tangent
    }

    pub fn normal(&self) -> &TangentField {
        &self.normal
    }

    pub fn curvature(&self) -> &ScalarField {
        &self.curvature
    }

    pub fn total_length(&self) -> f64 {
        self.length
    }

    /// Largest relative deviation of the speed from its mean.
    pub fn speed_deviation(&self) -> f64 {
        let mean = self.speed.mean();
        self.speed
            .values()
            .iter()
            .fold(0.0_f64, |m, s| m.max((s - mean).abs()))
            / mean
    }

    pub fn is_constant_speed(&self, tolerance: f64) -> bool {
        self.speed_deviation() < tolerance
    }

    pub(crate) fn require_constant_speed(&self) -> Result<()> {
        let deviation = self.speed_deviation();
        if deviation < CONSTANT_SPEED_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotConstantSpeed {
                deviation,
                tolerance: CONSTANT_SPEED_TOLERANCE,
            })
        }
    }

    /// Arclength derivative `D_s f = ∂_θ f / |c′|` of a scalar field.
    pub fn arc_derivative(&self, f: &ScalarField) -> Result<ScalarField> {
        check_grid(self.n(), f.len())?;
        f.derivative_theta().zip_with(&self.speed, |d, s| d / s)
    }

    /// Arclength derivative of a vector field along the curve.
    pub fn arc_derivative_field(&self, h: &TangentField) -> Result<TangentField> {
        check_grid(self.n(), h.len())?;
        self.speed
            .map(f64::recip)
            .times_field(&h.derivative_theta())
    }

    /// `∫ ⟨h, k⟩ ds` by the rectangle rule.
    pub fn l2_inner(&self, h: &TangentField, k: &TangentField) -> Result<f64> {
        check_grid(self.n(), h.len())?;
        check_grid(self.n(), k.len())?;
        Ok(h.values()
            .iter()
            .zip(k.values())
            .zip(self.ds.values())
            .map(|((a, b), w)| a.dot(b) * w)
            .sum())
    }

    /// `∫ f ds` for a scalar field.
    pub fn integrate(&self, f: &ScalarField) -> Result<f64> {
        check_grid(self.n(), f.len())?;
        Ok(f.values()
            .iter()
            .zip(self.ds.values())
            .map(|(a, w)| a * w)
            .sum())
    }

    /// Density `⟨v, D_s h⟩` of the first variation of `ds` in direction `h`.
    pub fn volume_form_variation(&self, h: &TangentField) -> Result<ScalarField> {
        self.tangent.dot(&self.arc_derivative_field(h)?)
    }

    /// Normal and tangential coefficients `(⟨h, n⟩, ⟨h, v⟩)` of a field.
    pub fn frame_coefficients(&self, h: &TangentField) -> Result<(ScalarField, ScalarField)> {
        Ok((self.normal.dot(h)?, self.tangent.dot(h)?))
    }

    /// Field `a·n + b·v` from frame coefficients.
    pub fn from_frame(&self, a: &ScalarField, b: &ScalarField) -> Result<TangentField> {
        check_grid(self.n(), a.len())?;
        check_grid(self.n(), b.len())?;
        Ok(TangentField::new(
            (0..self.n())
                .map(|j| self.normal[j] * a[j] + self.tangent[j] * b[j])
                .collect(),
        ))
    }

    /// Translates every sample by `h`, i.e. the curve `c + h`.
    pub fn displaced(&self, h: &TangentField) -> Result<Self> {
        check_grid(self.n(), h.len())?;
        Self::new(
            self.points
                .iter()
                .zip(h.values())
                .map(|(p, d)| p + d)
                .collect(),
        )
    }

    /// Resamples the curve at constant speed `ℓ/2π`, keeping `c(0)` fixed.
    ///
    /// Arclength is accumulated along the chords of an oversampled periodic
    /// cubic spline through the samples and inverted by piecewise-linear
    /// lookup. The pass is repeated until the samples stop moving, so the
    /// result is a fixed point of the procedure.
    pub fn reparametrize_constant_speed(&self) -> Result<Self> {
        const MAX_PASSES: usize = 60;
        let scale = self.length.max(f64::MIN_POSITIVE);
        let mut points = self.points.clone();
        for _ in 0..MAX_PASSES {
            let next = resample_once(&points);
            let moved = points
                .iter()
                .zip(&next)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
            points = next;
            if moved <= 1e-14 * scale {
                break;
            }
        }
        Self::new(points)
    }

    /// The reparametrized curve `c∘φ`.
    pub fn apply_diffeo(&self, phi: &Diffeo) -> Result<Self> {
        check_grid(self.n(), phi.n())?;
        Self::new(compose_samples(&self.points, phi))
    }

    /// `h∘φ` for a field along this curve.
    pub fn apply_diffeo_field(&self, h: &TangentField, phi: &Diffeo) -> Result<TangentField> {
        check_grid(self.n(), h.len())?;
        check_grid(self.n(), phi.n())?;
        Ok(TangentField::new(compose_samples(h.values(), phi)))
    }
}

fn resample_once(points: &[Vec2]) -> Vec<Vec2> {
    let n = points.len();
    let spline = PeriodicSpline::new(points);
    let fine = RESAMPLE_OVERSAMPLING * n;
    let fine_theta: Vec<f64> = (0..=fine).map(|i| TAU * i as f64 / fine as f64).collect();
    let fine_points: Vec<Vec2> = fine_theta.iter().map(|&t| spline.eval(t)).collect();
    let mut arclength = Vec::with_capacity(fine + 1);
    arclength.push(0.0);
    for pair in fine_points.windows(2) {
        let last = *arclength.last().unwrap();
        arclength.push(last + (pair[1] - pair[0]).norm());
    }
    let total = arclength[fine];

    let mut out = Vec::with_capacity(n);
    out.push(points[0]);
    let mut seg = 0;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while arclength[seg + 1] < target {
            seg += 1;
        }
        let span = arclength[seg + 1] - arclength[seg];
        let t = if span > 0.0 {
            (target - arclength[seg]) / span
        } else {
            0.0
        };
        let theta = fine_theta[seg] + t * (fine_theta[seg + 1] - fine_theta[seg]);
        out.push(spline.eval(theta));
    }
    out
}

fn compose_samples(values: &[Vec2], phi: &Diffeo) -> Vec<Vec2> {
    let n = values.len();
    if let Some(shift) = phi.grid_shift() {
        return (0..n).map(|j| values[(j + shift) % n]).collect();
    }
    let spline = PeriodicSpline::new(values);
    phi.values().iter().map(|&t| spline.eval(t)).collect()
}

/// Orientation-preserving circle diffeomorphism sampled on the grid.
///
/// Stores the lifted values `φ(θ_j)`, which must strictly increase and
/// satisfy `φ(θ_{n−1}) < φ(θ_0) + 2π` (winding number one).
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeo {
    values: Vec<f64>,
}

impl Diffeo {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::NotADiffeo(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NotADiffeo(format!("non-finite value at index {j}")));
        }
        if let Some(j) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NotADiffeo(format!(
                "values not strictly increasing at index {}",
                j + 1
            )));
        }
        if values[n - 1] >= values[0] + TAU {
            return Err(Error::NotADiffeo("winding number exceeds one".into()));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(theta_grid(n).into_iter().map(f).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            values: theta_grid(n),
        }
    }

    /// Rotation by `shift` grid cells, `φ(θ) = θ + 2π·shift/n`.
    pub fn grid_rotation(n: usize, shift: usize) -> Self {
        let offset = TAU * (shift % n) as f64 / n as f64;
        Self {
            values: theta_grid(n).into_iter().map(|t| t + offset).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Returns `Some(k)` when `φ` is a rotation by exactly `k` grid cells.
    pub fn grid_shift(&self) -> Option<usize> {
        let n = self.n();
        let h = grid_step(n);
        let offset = self.values[0];
        let cells = (offset / h).round();
        if ((cells * h) - offset).abs() > 1e-12 {
            return None;
        }
        let aligned = self
            .values
            .iter()
            .enumerate()
            .all(|(j, v)| (v - j as f64 * h - offset).abs() <= 1e-12);
        aligned.then(|| (cells as i64).rem_euclid(n as i64) as usize)
    }

    /// The discrete inverse: `φ⁻¹(θ_j)` found by inverting the periodic
    /// spline of the displacement `φ(θ) − θ`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n();
        let grid = theta_grid(n);
        let displacement: Vec<f64> = self.values.iter().zip(&grid).map(|(v, t)| v - t).collect();
        let spline = PeriodicSpline::new(&displacement);
        let phi = |t: f64| {
            // the lift of φ: θ ↦ θ + d(θ), with d 2π-periodic
            t + spline.eval(t)
        };
        let start = self.values[0];
        let mut out = Vec::with_capacity(n);
        for &target in &grid {
            // lift the target above φ(0) so the root lies in [0, 2π)
            let lifted = start + (target - start).rem_euclid(TAU);
            let (mut lo, mut hi) = (0.0, TAU);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if phi(mid) < lifted {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        // the root for the smallest target may sit anywhere; rotate into a
        // monotone lift starting below 2π
        let mut lifted = Vec::with_capacity(n);
        let mut prev = f64::NEG_INFINITY;
        for v in out {
            let mut value = v;
            while value <= prev {
                value += TAU;
            }
            lifted.push(value);
            prev = value;
        }
        Self::new(lifted)
    }
}
