//! Discrete paths of curves, path energy and horizontal geodesics.
//!
//! A [`CurvePath`] is a sequence `c_0, …, c_{M−1}` of curves at times
//! `t_k = k/(M−1)`. Its energy under a metric recipe is
//!
//! ```text
//! E = Σ_k ½ (G_{c_k}(v_k, v_k) + G_{c_{k+1}}(v_k, v_k)) Δt,   v_k = (c_{k+1} − c_k)/Δt,
//! ```
//!
//! i.e. each segment is measured with the average of the metrics at its two
//! ends, which keeps the energy invariant under reversing the path.
//!
//! [`horizontal_geodesic`] minimizes this energy over the interior curves by
//! path straightening. Each outer iteration freezes the inertia operators at
//! the current curves, which makes the energy quadratic in the positions,
//! and takes a block-Jacobi step whose per-curve directions are restricted
//! to the horizontal subspace of the chosen splitting. Steps are accepted
//! only if the true energy (operators rebuilt at the new curves) decreases.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::curve::DiscreteCurve;
use crate::error::{check_grid, Error, Result};
use crate::field::TangentField;
use crate::metric::Metric;
use crate::recipe::Recipe;
use crate::splitting::{arc0_splitting_unchecked, tan_nor_splitting, SplittingKind};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePath {
    curves: Vec<DiscreteCurve>,
}

impl CurvePath {
    pub fn new(curves: Vec<DiscreteCurve>) -> Result<Self> {
        if curves.len() < 2 {
            return Err(Error::InvalidCoefficients(format!(
                "a path needs at least 2 curves, got {}",
                curves.len()
            )));
        }
        let n = curves[0].n();
        for c in &curves[1..] {
            check_grid(n, c.n())?;
        }
        Ok(Self { curves })
    }

    /// Straight-line homotopy `(1−t)c₀ + t c₁` in position space.
    pub fn linear(c0: &DiscreteCurve, c1: &DiscreteCurve, m: usize) -> Result<Self> {
        check_grid(c0.n(), c1.n())?;
        if m < 2 {
            return Err(Error::InvalidCoefficients(format!(
                "a path needs at least 2 curves, got {m}"
            )));
        }
        let mut curves = Vec::with_capacity(m);
        curves.push(c0.clone());
        for k in 1..m - 1 {
            let t = k as f64 / (m - 1) as f64;
            let points = c0
                .points()
                .iter()
                .zip(c1.points())
                .map(|(a, b)| a * (1.0 - t) + b * t)
                .collect();
            curves.push(DiscreteCurve::new(points)?);
        }
        curves.push(c1.clone());
        Ok(Self { curves })
    }

    pub fn curves(&self) -> &[DiscreteCurve] {
        &self.curves
    }

    pub fn m(&self) -> usize {
        self.curves.len()
    }

    pub fn n(&self) -> usize {
        self.curves[0].n()
    }

    pub fn time_step(&self) -> f64 {
        1.0 / (self.m() - 1) as f64
    }

    /// Forward differences `(c_{k+1} − c_k)/Δt`, one per segment.
    pub fn velocities(&self) -> Vec<TangentField> {
        let inv_dt = 1.0 / self.time_step();
        self.curves
            .windows(2)
            .map(|pair| {
                TangentField::new(
                    pair[0]
                        .points()
                        .iter()
                        .zip(pair[1].points())
                        .map(|(a, b)| (b - a) * inv_dt)
                        .collect(),
                )
            })
            .collect()
    }

    pub fn reversed(&self) -> Self {
        Self {
            curves: self.curves.iter().rev().cloned().collect(),
        }
    }
}

/// Symmetric `L²(ds)` Gram matrix `W L` of each curve's inertia operator.
fn frame_grams(path: &CurvePath, recipe: &Recipe) -> Result<Vec<DMatrix<f64>>> {
    path.curves
        .iter()
        .map(|c| {
            let g = recipe.build(c)?.gram();
            Ok((&g + g.transpose()) * 0.5)
        })
        .collect()
}

fn displacement(a: &DiscreteCurve, b: &DiscreteCurve) -> DVector<f64> {
    b.position_field().to_stacked() - a.position_field().to_stacked()
}

fn energy_from_grams(path: &CurvePath, grams: &[DMatrix<f64>]) -> f64 {
    let inv_dt = 1.0 / path.time_step();
    path.curves
        .windows(2)
        .zip(grams.windows(2))
        .map(|(pair, g)| {
            let d = displacement(&pair[0], &pair[1]);
            0.5 * (d.dot(&(&g[0] * &d)) + d.dot(&(&g[1] * &d))) * inv_dt
        })
        .sum()
}

/// Discrete path energy; zero exactly for constant paths.
pub fn path_energy(path: &CurvePath, recipe: &Recipe) -> Result<f64> {
    Ok(energy_from_grams(path, &frame_grams(path, recipe)?))
}

/// Horizontality residual of each velocity `v_k` at its base curve `c_k`.
pub fn path_horizontality_report(path: &CurvePath, recipe: &Recipe) -> Result<Vec<f64>> {
    path.curves
        .iter()
        .zip(path.velocities())
        .map(|(c, v)| Metric::unchecked(c, recipe.build(c)?).horizontality_residual(&v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicOptions {
    /// Stop once an accepted step lowers the energy by less than this
    /// fraction.
    pub tol: f64,
    pub max_iters: usize,
    /// Splitting whose second (horizontal) projection constrains updates.
    pub splitting: SplittingKind,
    /// Halvings tried before a step is given up.
    pub max_backtracks: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 500,
            splitting: SplittingKind::TanNor,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub max_horizontality_residual: f64,
    pub step_size: f64,
}

#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub path: CurvePath,
    /// One record per accepted iteration, preceded by the initial path.
    pub history: Vec<IterationRecord>,
    pub horizontality: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl GeodesicResult {
    pub fn energy(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.energy)
    }
}

fn initial_path(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    m: usize,
    splitting: SplittingKind,
) -> Result<CurvePath> {
    let path = CurvePath::linear(c0, c1, m)?;
    if splitting != SplittingKind::Arc0 {
        return Ok(path);
    }
    let mut curves = path.curves;
    for c in &mut curves[1..m - 1] {
        *c = c.reparametrize_constant_speed()?;
    }
    Ok(CurvePath { curves })
}

fn max_residual(path: &CurvePath, recipe: &Recipe) -> Result<f64> {
    Ok(path_horizontality_report(path, recipe)?
        .into_iter()
        .fold(0.0, f64::max))
}

fn solve_spd(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let off_diagonal = matrix
        .iter()
        .enumerate()
        .any(|(idx, x)| *x != 0.0 && idx % matrix.nrows() != idx / matrix.nrows());
    if !off_diagonal {
        return rhs.component_div(&matrix.diagonal());
    }
    match Cholesky::new(matrix.clone()) {
        Some(chol) => chol.solve(rhs),
        None => rhs.component_div(&matrix.diagonal()),
    }
}

/// Path-straightening minimizer between two fixed curves.
///
/// Starts from the straight-line homotopy (interior curves resampled to
/// constant speed when the `Arc⁰` splitting is selected). Endpoints are never
/// modified. Returns with `converged == false` when `max_iters` is reached.
pub fn horizontal_geodesic(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    m: usize,
    recipe: &Recipe,
    opts: &GeodesicOptions,
) -> Result<GeodesicResult> {
    check_grid(c0.n(), c1.n())?;
    if m < 3 {
        return Err(Error::InvalidCoefficients(format!(
            "need at least 3 curves, got {m}"
        )));
    }
    let mut path = initial_path(c0, c1, m, opts.splitting)?;
    let mut grams = frame_grams(&path, recipe)?;
    let mut energy = energy_from_grams(&path, &grams);
    let mut history = vec![IterationRecord {
        iteration: 0,
        energy,
        max_horizontality_residual: max_residual(&path, recipe)?,
        step_size: 0.0,
    }];
    let mut converged = energy == 0.0;
    let mut iterations = 0;
    let inv_dt = 1.0 / path.time_step();

    while !converged && iterations < opts.max_iters {
        let positions: Vec<DVector<f64>> = path
            .curves
            .iter()
            .map(|c| c.position_field().to_stacked())
            .collect();
        let segment: Vec<DMatrix<f64>> = grams.windows(2).map(|g| (&g[0] + &g[1]) * 0.5).collect();

        // projected block-Jacobi direction for every interior curve
        let mut directions = Vec::with_capacity(m - 2);
        let mut slope = 0.0;
        for j in 1..m - 1 {
            let back = &segment[j - 1] * (&positions[j] - &positions[j - 1]);
            let ahead = &segment[j] * (&positions[j + 1] - &positions[j]);
            let grad = (back - ahead) * (2.0 * inv_dt);
            let precond = (&segment[j - 1] + &segment[j]) * (2.0 * inv_dt);
            let projection = match opts.splitting {
                SplittingKind::TanNor => tan_nor_splitting(&path.curves[j]),
                SplittingKind::Arc0 => arc0_splitting_unchecked(&path.curves[j]),
            };
            let p = projection.second().matrix();
            let restricted = p.transpose() * &grad;
            let direction = -(p * solve_spd(&precond, &restricted));
            slope += grad.dot(&direction);
            directions.push(direction);
        }
        if slope.is_nan() || slope >= 0.0 {
            converged = true;
            break;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            if let Some(candidate) = try_step(&path, &positions, &directions, step) {
                let candidate_grams = frame_grams(&candidate, recipe)?;
                let candidate_energy = energy_from_grams(&candidate, &candidate_grams);
                if candidate_energy < energy {
                    accepted = Some((candidate, candidate_grams, candidate_energy));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((candidate, candidate_grams, candidate_energy)) = accepted else {
            // no decrease is available along the projected direction
            converged = true;
            break;
        };
        let decrease = (energy - candidate_energy) / energy;
        path = candidate;
        grams = candidate_grams;
        energy = candidate_energy;
        iterations += 1;
        history.push(IterationRecord {
            iteration: iterations,
            energy,
            max_horizontality_residual: max_residual(&path, recipe)?,
            step_size: step,
        });
        if decrease < opts.tol {
            converged = true;
        }
    }

    let horizontality = path_horizontality_report(&path, recipe)?;
    Ok(GeodesicResult {
        path,
        history,
        horizontality,
        converged,
        iterations,
    })
}

/// Moves every interior curve by `step·direction`; `None` if a moved curve
/// is not an immersion.
fn try_step(
    path: &CurvePath,
    positions: &[DVector<f64>],
    directions: &[DVector<f64>],
    step: f64,
) -> Option<CurvePath> {
    let m = path.m();
    let mut curves = Vec::with_capacity(m);
    curves.push(path.curves[0].clone());
    for j in 1..m - 1 {
        let moved = &positions[j] + &directions[j - 1] * step;
        curves.push(DiscreteCurve::new(TangentField::from_stacked(&moved).into_values()).ok()?);
    }
    curves.push(path.curves[m - 1].clone());
    Some(CurvePath { curves })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    #[test]
    fn constant_path_has_zero_energy() {
        let c = DiscreteCurve::ellipse(32, 2.0, 1.0).unwrap();
        let path = CurvePath::linear(&c, &c, 5).unwrap();
        assert_eq!(path_energy(&path, &Recipe::L2).unwrap(), 0.0);
        assert!(path_horizontality_report(&path, &Recipe::L2)
            .unwrap()
            .iter()
            .all(|&r| r == 0.0));
    }

    #[test]
    fn normal_homotopy_is_horizontal() {
        let c0 = DiscreteCurve::circle(64, 1.0).unwrap();
        let c1 = DiscreteCurve::circle(64, 1.1).unwrap();
        let path = CurvePath::linear(&c0, &c1, 8).unwrap();
        let report = path_horizontality_report(&path, &Recipe::L2).unwrap();
        assert!(report.iter().all(|&r| r < 1e-10), "{report:?}");
    }

    #[test]
    fn energy_of_growing_circle() {
        // radius r(t) = 1 + 0.1 t: E = ∫ 2π r (0.1)² dt = 2π · 0.01 · 1.05
        let c0 = DiscreteCurve::circle(128, 1.0).unwrap();
        let c1 = DiscreteCurve::circle(128, 1.1).unwrap();
        let e = path_energy(&CurvePath::linear(&c0, &c1, 16).unwrap(), &Recipe::L2).unwrap();
        assert!((e - TAU * 0.0105).abs() < 1e-3 * TAU * 0.0105, "{e}");
    }

    #[test]
    fn rejects_short_paths() {
        let c = DiscreteCurve::circle(16, 1.0).unwrap();
        assert!(horizontal_geodesic(&c, &c, 2, &Recipe::L2, &GeodesicOptions::default()).is_err());
        assert!(CurvePath::new(vec![c.clone()]).is_err());
    }

    #[test]
    fn identical_endpoints_need_no_iterations() {
        let c = DiscreteCurve::ellipse(32, 2.0, 1.0).unwrap();
        let result =
            horizontal_geodesic(&c, &c, 5, &Recipe::L2, &GeodesicOptions::default()).unwrap();
        assert_eq!(result.iterations, 0);
        assert_eq!(result.energy(), 0.0);
        assert!(result.converged);
    }
}
