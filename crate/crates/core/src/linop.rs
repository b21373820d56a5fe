//! Dense linear operators on tangent fields.
//!
//! A [`LinOp`] acts on the `2n` stacked coordinates of a [`TangentField`]
//! (all x-components, then all y-components) and carries the quadrature
//! weights of the curve it lives on, so that adjoints are taken with respect
//! to the `L²(ds)` pairing rather than the Euclidean one.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::DiscreteCurve;
use crate::error::{check_grid, Error, Result};
use crate::field::{grid_step, ScalarField, TangentField};

#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    matrix: DMatrix<f64>,
    // ds weights, one per grid point
    weights: Vec<f64>,
}

impl LinOp {
    /// Wraps a `2n × 2n` matrix acting on fields over `curve`.
    pub fn from_matrix(curve: &DiscreteCurve, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = 2 * curve.n();
        check_grid(dim, matrix.nrows())?;
        check_grid(dim, matrix.ncols())?;
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCoefficients(
                "operator has non-finite entries".into(),
            ));
        }
        Ok(Self {
            matrix,
            weights: curve.ds_weights().values().to_vec(),
        })
    }

    pub fn identity(curve: &DiscreteCurve) -> Self {
        let dim = 2 * curve.n();
        Self {
            matrix: DMatrix::identity(dim, dim),
            weights: curve.ds_weights().values().to_vec(),
        }
    }

    pub fn zero(curve: &DiscreteCurve) -> Self {
        let dim = 2 * curve.n();
        Self {
            matrix: DMatrix::zeros(dim, dim),
            weights: curve.ds_weights().values().to_vec(),
        }
    }

    /// Pointwise multiplication `h ↦ f·h`.
    pub fn multiplication(curve: &DiscreteCurve, f: &ScalarField) -> Result<Self> {
        check_grid(curve.n(), f.len())?;
        let n = curve.n();
        let diag = DVector::from_fn(2 * n, |i, _| f[i % n]);
        Ok(Self {
            matrix: DMatrix::from_diagonal(&diag),
            weights: curve.ds_weights().values().to_vec(),
        })
    }

    /// The discrete arclength derivative `D_s = |c′|⁻¹ ∂_θ`, componentwise.
    pub fn arc_derivative(curve: &DiscreteCurve) -> Self {
        let n = curve.n();
        let scalar = scalar_arc_derivative(curve);
        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        matrix.view_mut((0, 0), (n, n)).copy_from(&scalar);
        matrix.view_mut((n, n), (n, n)).copy_from(&scalar);
        Self {
            matrix,
            weights: curve.ds_weights().values().to_vec(),
        }
    }

    /// Assembles an operator column by column from its action on the
    /// coordinate basis fields.
    pub fn from_columns(
        curve: &DiscreteCurve,
        mut column: impl FnMut(&TangentField) -> Result<TangentField>,
    ) -> Result<Self> {
        let n = curve.n();
        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            let image = column(&TangentField::basis(n, i))?;
            check_grid(n, image.len())?;
            matrix.set_column(i, &image.to_stacked());
        }
        Self::from_matrix(curve, matrix)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn stacked_weights(&self) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(2 * n, |i, _| self.weights[i % n])
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        check_grid(self.n(), other.n())
    }

    pub fn apply(&self, h: &TangentField) -> Result<TangentField> {
        check_grid(self.n(), h.len())?;
        Ok(TangentField::from_stacked(&(&self.matrix * h.to_stacked())))
    }

    /// `A* = W⁻¹ Aᵀ W`, the adjoint for `∫⟨·,·⟩ ds`.
    pub fn adjoint_l2(&self) -> Self {
        let w = self.stacked_weights();
        let mut adj = self.matrix.transpose();
        for (i, mut row) in adj.row_iter_mut().enumerate() {
            row /= w[i];
        }
        for (j, mut col) in adj.column_iter_mut().enumerate() {
            col *= w[j];
        }
        Self {
            matrix: adj,
            weights: self.weights.clone(),
        }
    }

    /// `A ∘ B`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            weights: self.weights.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            weights: self.weights.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
            weights: self.weights.clone(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * factor,
            weights: self.weights.clone(),
        }
    }

    /// `(A + A*)/2`.
    pub fn symmetrized(&self) -> Self {
        let adj = self.adjoint_l2();
        Self {
            matrix: (&self.matrix + adj.matrix) * 0.5,
            weights: self.weights.clone(),
        }
    }

    /// `P* ∘ A ∘ P`.
    pub fn sandwich(&self, projection: &Self) -> Result<Self> {
        projection.adjoint_l2().compose(&self.compose(projection)?)
    }

    /// Largest entry in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    /// The `L²(ds)` Gram form `W·A`, a plain matrix with
    /// `G(h, k) = kᵀ (W A) h`.
    pub fn gram(&self) -> DMatrix<f64> {
        let w = self.stacked_weights();
        let mut g = self.matrix.clone();
        for (i, mut row) in g.row_iter_mut().enumerate() {
            row *= w[i];
        }
        g
    }

    fn pairing(&self, h: &DVector<f64>, k: &DVector<f64>) -> f64 {
        let n = self.n();
        h.iter()
            .zip(k.iter())
            .enumerate()
            .map(|(i, (a, b))| a * b * self.weights[i % n])
            .sum()
    }

    /// Sampled symmetry and positivity check with respect to `∫⟨·,·⟩ ds`.
    pub fn is_symmetric_positive(&self, tol: f64, sampling: &SymmetryCheck) -> SymmetryReport {
        let dim = 2 * self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
        let mut random_field = || DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));

        let mut asymmetry = 0.0_f64;
        let mut scale = 0.0_f64;
        for _ in 0..sampling.pairs {
            let h = random_field();
            let k = random_field();
            let ah = &self.matrix * &h;
            let ak = &self.matrix * &k;
            let lhs = self.pairing(&ah, &k);
            let rhs = self.pairing(&h, &ak);
            asymmetry = asymmetry.max((lhs - rhs).abs());
            let bound = self.pairing(&ah, &ah).sqrt() * self.pairing(&k, &k).sqrt()
                + self.pairing(&h, &h).sqrt() * self.pairing(&ak, &ak).sqrt();
            scale = scale.max(bound);
        }
        let relative_asymmetry = if scale > 0.0 { asymmetry / scale } else { 0.0 };

        let mut min_rayleigh = f64::INFINITY;
        for _ in 0..sampling.rayleigh_samples {
            let h = random_field();
            let q = self.pairing(&(&self.matrix * &h), &h) / self.pairing(&h, &h);
            min_rayleigh = min_rayleigh.min(q);
        }
        let min_eigenvalue = sampling.exact.then(|| self.min_eigenvalue_l2());
        let positive = min_rayleigh > 0.0 && min_eigenvalue.is_none_or(|e| e > 0.0);
        SymmetryReport {
            asymmetry,
            relative_asymmetry,
            min_rayleigh,
            min_eigenvalue,
            pass: relative_asymmetry < tol && positive,
        }
    }

    /// Smallest eigenvalue of the `L²(ds)`-symmetric part, computed exactly
    /// from `W^{1/2} A W^{-1/2}`.
    pub fn min_eigenvalue_l2(&self) -> f64 {
        let w = self.stacked_weights();
        let sqrt_w = w.map(f64::sqrt);
        let mut s = self.matrix.clone();
        for (i, mut row) in s.row_iter_mut().enumerate() {
            row *= sqrt_w[i];
        }
        for (j, mut col) in s.column_iter_mut().enumerate() {
            col /= sqrt_w[j];
        }
        let sym = (&s + s.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Row-major text dump: a header line with `n`, then `2n` rows.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n());
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses [`LinOp::to_text`] output for an operator on `curve`.
    pub fn from_text(curve: &DiscreteCurve, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty operator text".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad operator header: {e}")))?;
        check_grid(curve.n(), n)?;
        let mut entries = Vec::with_capacity(4 * n * n);
        for line in lines {
            for token in line.split_whitespace() {
                entries.push(
                    token
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad operator entry {token:?}: {e}")))?,
                );
            }
        }
        if entries.len() != 4 * n * n {
            return Err(Error::Parse(format!(
                "expected {} operator entries, found {}",
                4 * n * n,
                entries.len()
            )));
        }
        Self::from_matrix(curve, DMatrix::from_row_slice(2 * n, 2 * n, &entries))
    }
}

/// Sampling parameters for [`LinOp::is_symmetric_positive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub pairs: usize,
    pub rayleigh_samples: usize,
    pub seed: u64,
    /// Also compute the exact smallest eigenvalue.
    pub exact: bool,
}

impl Default for SymmetryCheck {
    fn default() -> Self {
        Self {
            pairs: 20,
            rayleigh_samples: 200,
            seed: 0,
            exact: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `max |⟨Ah,k⟩ − ⟨h,Ak⟩|` over sampled pairs.
    pub asymmetry: f64,
    /// Asymmetry divided by the Cauchy–Schwarz bound of the pairings.
    pub relative_asymmetry: f64,
    pub min_rayleigh: f64,
    pub min_eigenvalue: Option<f64>,
    pub pass: bool,
}

fn scalar_arc_derivative(curve: &DiscreteCurve) -> DMatrix<f64> {
    let n = curve.n();
    let inv = 1.0 / (2.0 * grid_step(n));
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        let s = curve.speed()[j];
        d[(j, (j + 1) % n)] += inv / s;
        d[(j, (j + n - 1) % n)] -= inv / s;
    }
    d
}

/// `Σ_m coeffs[m] (−1)^m D_s^{2m}`, symmetrized with respect to `ds`.
pub fn sobolev_operator(curve: &DiscreteCurve, order: usize, coeffs: &[f64]) -> Result<LinOp> {
    if coeffs.len() != order + 1 {
        return Err(Error::InvalidCoefficients(format!(
            "order {order} needs {} coefficients, got {}",
            order + 1,
            coeffs.len()
        )));
    }
    if let Some(c) = coeffs.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(Error::InvalidCoefficients(format!(
            "coefficients must be non-negative, got {c}"
        )));
    }
    if coeffs[0] <= 0.0 {
        return Err(Error::InvalidCoefficients(
            "the zeroth-order coefficient must be positive".into(),
        ));
    }
    let n = curve.n();
    let d = scalar_arc_derivative(curve);
    let neg_laplace = -(&d * &d);
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut scalar = DMatrix::<f64>::identity(n, n) * coeffs[0];
    for &c in &coeffs[1..] {
        power = &power * &neg_laplace;
        scalar += &power * c;
    }
    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    matrix.view_mut((0, 0), (n, n)).copy_from(&scalar);
    matrix.view_mut((n, n), (n, n)).copy_from(&scalar);
    Ok(LinOp::from_matrix(curve, matrix)?.symmetrized())
}

/// Pointwise multiplication by a strictly positive coefficient field.
pub fn almost_local_operator(curve: &DiscreteCurve, phi: &ScalarField) -> Result<LinOp> {
    check_grid(curve.n(), phi.len())?;
    if let Some((index, &value)) = phi
        .values()
        .iter()
        .enumerate()
        .find(|(_, &v)| v.is_nan() || v <= 0.0)
    {
        return Err(Error::NonPositiveCoefficient { index, value });
    }
    LinOp::multiplication(curve, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Vec2;

    fn random_fields(n: usize, count: usize, seed: u64) -> Vec<TangentField> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                TangentField::new(
                    (0..n)
                        .map(|_| {
                            Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        })
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn identity_and_scaling() {
        let c = DiscreteCurve::circle(32, 1.0).unwrap();
        let h = random_fields(32, 1, 1).remove(0);
        assert_eq!(LinOp::identity(&c).apply(&h).unwrap(), h);
        let two = LinOp::multiplication(&c, &ScalarField::constant(32, 2.0)).unwrap();
        assert_eq!(two.apply(c.normal()).unwrap(), c.normal().scale(2.0));
    }

    #[test]
    fn arc_derivative_operator_matches_frenet() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let ds = LinOp::arc_derivative(&c);
        let dv = ds.apply(c.tangent()).unwrap();
        assert!((&dv - c.normal()).sup_norm() < 2e-2);
    }

    #[test]
    fn adjoint_defining_property_for_arc_derivative() {
        let c = DiscreteCurve::ellipse(64, 2.0, 1.0).unwrap();
        let a = LinOp::arc_derivative(&c);
        let adj = a.adjoint_l2();
        let fields = random_fields(64, 40, 7);
        for pair in fields.chunks(2) {
            let lhs = c.l2_inner(&a.apply(&pair[0]).unwrap(), &pair[1]).unwrap();
            let rhs = c.l2_inner(&pair[0], &adj.apply(&pair[1]).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn adjoint_is_involution() {
        let c = DiscreteCurve::ellipse(32, 2.0, 1.0).unwrap();
        let a = sobolev_operator(&c, 1, &[1.0, 0.3])
            .unwrap()
            .compose(&LinOp::arc_derivative(&c))
            .unwrap();
        let back = a.adjoint_l2().adjoint_l2();
        assert!((back.matrix() - a.matrix()).amax() < 1e-12 * a.max_abs());
    }

    #[test]
    fn multiplication_is_self_adjoint() {
        let c = DiscreteCurve::ellipse(32, 2.0, 1.0).unwrap();
        let m = LinOp::multiplication(&c, c.curvature()).unwrap();
        assert!((m.adjoint_l2().matrix() - m.matrix()).amax() < 1e-12);
    }

    #[test]
    fn algebra_identities() {
        let c = DiscreteCurve::ellipse(32, 2.0, 1.0).unwrap();
        let a = LinOp::arc_derivative(&c);
        assert_eq!(a.compose(&LinOp::identity(&c)).unwrap(), a);
        assert_eq!(a.add(&a.scale(-1.0)).unwrap(), LinOp::zero(&c));
        let other = LinOp::identity(&DiscreteCurve::circle(16, 1.0).unwrap());
        assert!(matches!(a.compose(&other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn sobolev_zeroth_order_is_identity() {
        let c = DiscreteCurve::ellipse(32, 2.0, 1.0).unwrap();
        assert_eq!(
            sobolev_operator(&c, 0, &[1.0]).unwrap(),
            LinOp::identity(&c)
        );
    }

    #[test]
    fn sobolev_eigenfunction_on_circle() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let l = sobolev_operator(&c, 1, &[1.0, 1.0]).unwrap();
        let h = TangentField::from_fn(256, |t| Vec2::new(t.sin(), 0.0));
        let lh = l.apply(&h).unwrap();
        assert!((&lh - &h.scale(2.0)).sup_norm() < 5e-3);
    }

    #[test]
    fn sobolev_rejects_bad_coefficients() {
        let c = DiscreteCurve::circle(16, 1.0).unwrap();
        assert!(matches!(
            sobolev_operator(&c, 1, &[1.0]),
            Err(Error::InvalidCoefficients(_))
        ));
        assert!(matches!(
            sobolev_operator(&c, 1, &[0.0, 1.0]),
            Err(Error::InvalidCoefficients(_))
        ));
        assert!(matches!(
            sobolev_operator(&c, 1, &[1.0, -1.0]),
            Err(Error::InvalidCoefficients(_))
        ));
    }

    #[test]
    fn sobolev_is_symmetric_positive() {
        let c = DiscreteCurve::ellipse(128, 2.0, 1.0).unwrap();
        let l = sobolev_operator(&c, 2, &[1.0, 0.5, 0.1]).unwrap();
        let report = l.is_symmetric_positive(1e-10, &SymmetryCheck::default());
        assert!(report.pass, "{report:?}");

        let l1 = sobolev_operator(&c, 1, &[1.0, 1.0]).unwrap();
        let report = l1.is_symmetric_positive(
            1e-10,
            &SymmetryCheck {
                exact: true,
                ..Default::default()
            },
        );
        assert!(report.pass);
        assert!(report.min_rayleigh >= 1.0 - 1e-6);
        assert!(report.min_eigenvalue.unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn identity_report() {
        let c = DiscreteCurve::circle(32, 1.0).unwrap();
        let report = LinOp::identity(&c).is_symmetric_positive(1e-12, &SymmetryCheck::default());
        assert!(report.pass);
        assert!((report.min_rayleigh - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arc_derivative_fails_symmetry_check() {
        let c = DiscreteCurve::ellipse(64, 2.0, 1.0).unwrap();
        let report =
            LinOp::arc_derivative(&c).is_symmetric_positive(1e-8, &SymmetryCheck::default());
        assert!(!report.pass);
        // ⟨D h, k⟩ = −⟨h, D k⟩, so the defect is twice the pairing itself
        assert!(report.relative_asymmetry > 0.1);
    }

    #[test]
    fn almost_local_examples() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let one = almost_local_operator(&c, &ScalarField::constant(256, 1.0)).unwrap();
        assert_eq!(one, LinOp::identity(&c));
        let phi = c.curvature().map(|k| 1.0 + k * k);
        let op = almost_local_operator(&c, &phi).unwrap();
        assert!((op.matrix().diagonal().add_scalar(-2.0)).amax() < 2e-2);
        let mut bad = vec![1.0; 256];
        bad[5] = 0.0;
        assert!(matches!(
            almost_local_operator(&c, &ScalarField::new(bad)),
            Err(Error::NonPositiveCoefficient { index: 5, .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let c = DiscreteCurve::ellipse(8, 2.0, 1.0).unwrap();
        let a = LinOp::arc_derivative(&c);
        let back = LinOp::from_text(&c, &a.to_text()).unwrap();
        assert_eq!(back, a);
        assert!(LinOp::from_text(&c, "8\n1 2 3").is_err());
    }
}
