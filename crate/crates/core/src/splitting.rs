//! Complementary splittings of `T_c Imm` and their projections.
//!
//! Two concrete splittings are provided:
//!
//! * tangential/normal, `P^tan h = ⟨h,v⟩v` and `P^nor h = ⟨h,n⟩n`, both
//!   pointwise and self-adjoint;
//! * tangential/`Arc⁰`, where `Arc⁰` consists of the fields `a·n + b·v`
//!   that preserve a constant-speed parametrization to first order, with
//!   `b` normalized by `b(0) = 0`.

use serde::Serialize;

use crate::curve::DiscreteCurve;
use crate::error::{check_grid, Result};
use crate::field::{ScalarField, TangentField};
use crate::linop::LinOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SplittingKind {
    /// `Tan(c) ⊕ Nor(c)`
    TanNor,
    /// `Tan(c) ⊕ Arc⁰(c)`
    Arc0,
}

impl SplittingKind {
    pub fn tag(self) -> &'static str {
        match self {
            SplittingKind::TanNor => "tan_nor",
            SplittingKind::Arc0 => "arc0",
        }
    }

    pub fn build(self, curve: &DiscreteCurve) -> Result<Splitting> {
        match self {
            SplittingKind::TanNor => Ok(tan_nor_splitting(curve)),
            SplittingKind::Arc0 => arc0_splitting(curve),
        }
    }
}

impl std::str::FromStr for SplittingKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tan_nor" => Ok(SplittingKind::TanNor),
            "arc0" => Ok(SplittingKind::Arc0),
            other => Err(crate::error::Error::Parse(format!(
                "unknown splitting {other:?} (expected tan_nor or arc0)"
            ))),
        }
    }
}

/// A pair of complementary projections `(P_first, P_second)`.
#[derive(Debug, Clone)]
pub struct Splitting {
    first: LinOp,
    second: LinOp,
    labels: (String, String),
}

impl Splitting {
    pub fn new(first: LinOp, second: LinOp, labels: (&str, &str)) -> Result<Self> {
        check_grid(first.n(), second.n())?;
        Ok(Self {
            first,
            second,
            labels: (labels.0.to_owned(), labels.1.to_owned()),
        })
    }

    pub fn first(&self) -> &LinOp {
        &self.first
    }

    pub fn second(&self) -> &LinOp {
        &self.second
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    pub fn n(&self) -> usize {
        self.first.n()
    }

    /// Returns `(P_first h, P_second h)`.
    pub fn project(&self, h: &TangentField) -> Result<(TangentField, TangentField)> {
        Ok((self.first.apply(h)?, self.second.apply(h)?))
    }

    /// Same splitting with the first projection replaced.
    pub fn with_first(&self, first: LinOp) -> Result<Self> {
        Self::new(first, self.second.clone(), (&self.labels.0, &self.labels.1))
    }
}

fn frame_projection(curve: &DiscreteCurve, frame: &TangentField) -> LinOp {
    let n = curve.n();
    let mut matrix = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let f = frame[j];
        matrix[(j, j)] = f.x * f.x;
        matrix[(j, n + j)] = f.x * f.y;
        matrix[(n + j, j)] = f.y * f.x;
        matrix[(n + j, n + j)] = f.y * f.y;
    }
    LinOp::from_matrix(curve, matrix).expect("frame projection has matching size")
}

/// `Tan ⊕ Nor` with `P^tan h = ⟨h,v⟩v`, `P^nor h = ⟨h,n⟩n`.
pub fn tan_nor_splitting(curve: &DiscreteCurve) -> Splitting {
    Splitting {
        first: frame_projection(curve, curve.tangent()),
        second: frame_projection(curve, curve.normal()),
        labels: ("Tan".into(), "Nor".into()),
    }
}

/// Periodic solution of `D_s² b = D_s(aκ)` with `b(0) = 0`.
///
/// Integrating once gives `D_s b = aκ + C`; periodicity of `b` forces
/// `C = −(1/ℓ)∮ aκ ds`. The second integration is a cumulative trapezoid
/// sum in `ds` starting from grid index 0, which closes up exactly because
/// the trapezoid and rectangle rules agree over a full period.
pub fn solve_b(curve: &DiscreteCurve, a: &ScalarField) -> Result<ScalarField> {
    check_grid(curve.n(), a.len())?;
    curve.require_constant_speed()?;
    Ok(integrate_b(curve, a))
}

fn integrate_b(curve: &DiscreteCurve, a: &ScalarField) -> ScalarField {
    let n = curve.n();
    let w = curve.ds_weights();
    let source: Vec<f64> = (0..n).map(|j| a[j] * curve.curvature()[j]).collect();
    let flux: f64 = source.iter().zip(w.values()).map(|(f, w)| f * w).sum();
    let constant = -flux / curve.total_length();
    let weighted: Vec<f64> = (0..n).map(|j| (source[j] + constant) * w[j]).collect();
    let mut b = Vec::with_capacity(n);
    let mut acc = 0.0;
    b.push(0.0);
    for j in 0..n - 1 {
        acc += 0.5 * (weighted[j] + weighted[j + 1]);
        b.push(acc);
    }
    ScalarField::new(b)
}

/// `Arc⁰` part `⟨k,n⟩n + b v` of a field.
fn arc0_part(curve: &DiscreteCurve, k: &TangentField) -> Result<TangentField> {
    let a = curve.normal().dot(k)?;
    let b = integrate_b(curve, &a);
    curve.from_frame(&a, &b)
}

/// `Tan ⊕ Arc⁰` with `P^Arc⁰ k = ⟨k,n⟩n + bv` and `P^Tan k = ⟨k,v⟩v − bv`.
pub fn arc0_splitting(curve: &DiscreteCurve) -> Result<Splitting> {
    curve.require_constant_speed()?;
    Ok(arc0_splitting_unchecked(curve))
}

/// Builds the `Arc⁰` projections without the constant-speed precondition,
/// for curves that are only approximately constant speed.
pub(crate) fn arc0_splitting_unchecked(curve: &DiscreteCurve) -> Splitting {
    let arc = LinOp::from_columns(curve, |e| arc0_part(curve, e))
        .expect("Arc0 projection columns are finite");
    // P^Tan = Id − P^Arc⁰ entrywise, so complementarity holds up to rounding.
    let tan = LinOp::identity(curve).sub(&arc).expect("same grid");
    Splitting {
        first: tan,
        second: arc,
        labels: ("Tan".into(), "Arc0".into()),
    }
}

/// `⟨D_s²h, v⟩ + κ⟨D_s h, n⟩`, which vanishes iff `h` preserves the
/// constant-speed parametrization to first order.
pub fn speed_preservation_residual(curve: &DiscreteCurve, h: &TangentField) -> Result<ScalarField> {
    curve.require_constant_speed()?;
    let dh = curve.arc_derivative_field(h)?;
    let ddh = curve.arc_derivative_field(&dh)?;
    let tangential = ddh.dot(curve.tangent())?;
    let normal = dh.dot(curve.normal())?;
    let bending = normal.zip_with(curve.curvature(), |x, k| x * k)?;
    tangential.zip_with(&bending, |a, b| a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingReport {
    pub idempotence_first: f64,
    pub idempotence_second: f64,
    pub complementarity: f64,
    pub annihilation: f64,
    pub pass: bool,
}

/// Max-entry norms of `P² − P` (both), `P_first + P_second − Id` and
/// `P_first P_second`.
pub fn verify_splitting(splitting: &Splitting, tol: f64) -> SplittingReport {
    let p = splitting.first.matrix();
    let q = splitting.second.matrix();
    let dim = p.nrows();
    let identity = nalgebra::DMatrix::<f64>::identity(dim, dim);
    let idempotence_first = (p * p - p).amax();
    let idempotence_second = (q * q - q).amax();
    let complementarity = (p + q - identity).amax();
    let annihilation = (p * q).amax();
    let pass = [
        idempotence_first,
        idempotence_second,
        complementarity,
        annihilation,
    ]
    .iter()
    .all(|d| *d < tol);
    SplittingReport {
        idempotence_first,
        idempotence_second,
        complementarity,
        annihilation,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::field::{theta_grid, Vec2};

    #[test]
    fn tan_nor_on_tangent_field() {
        let c = DiscreteCurve::circle(64, 1.0).unwrap();
        let s = tan_nor_splitting(&c);
        let (t, n) = s.project(c.tangent()).unwrap();
        assert!((&t - c.tangent()).sup_norm() < 1e-15);
        assert!(n.sup_norm() < 1e-15);
    }

    #[test]
    fn tan_nor_is_pointwise() {
        let c = DiscreteCurve::circle(64, 1.0).unwrap();
        let s = tan_nor_splitting(&c);
        let ex = TangentField::constant(64, Vec2::new(1.0, 0.0));
        let nor = s.second().apply(&ex).unwrap();
        for j in 0..64 {
            let expected = c.normal()[j] * c.normal()[j].x;
            assert!((nor[j] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn tan_projection_is_self_adjoint() {
        let c = DiscreteCurve::ellipse(64, 2.0, 1.0).unwrap();
        let s = tan_nor_splitting(&c);
        let p = s.first();
        assert!((p.adjoint_l2().matrix() - p.matrix()).amax() < 1e-12);
    }

    #[test]
    fn solve_b_constant_source_vanishes() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let b = solve_b(&c, &ScalarField::constant(256, 1.0)).unwrap();
        assert!(b.sup_norm() < 1e-10);
    }

    #[test]
    fn solve_b_cosine() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let b = solve_b(&c, &ScalarField::from_fn(256, f64::cos)).unwrap();
        let err = theta_grid(256)
            .iter()
            .zip(b.values())
            .fold(0.0_f64, |m, (t, b)| m.max((b - t.sin()).abs()));
        assert!(err < 1e-3, "err {err}");
        assert_eq!(b[0], 0.0);
    }

    #[test]
    fn solve_b_zero() {
        let c = DiscreteCurve::circle(64, 1.0).unwrap();
        let b = solve_b(&c, &ScalarField::zeros(64)).unwrap();
        assert!(b.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn solve_b_requires_constant_speed() {
        let c = DiscreteCurve::ellipse(64, 2.0, 1.0).unwrap();
        assert!(matches!(
            solve_b(&c, &ScalarField::zeros(64)),
            Err(Error::NotConstantSpeed { .. })
        ));
        assert!(matches!(
            arc0_splitting(&c),
            Err(Error::NotConstantSpeed { .. })
        ));
    }

    #[test]
    fn arc0_examples_on_unit_circle() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let s = arc0_splitting(&c).unwrap();

        let (tan, arc) = s.project(c.normal()).unwrap();
        assert!((&arc - c.normal()).sup_norm() < 1e-10);
        assert!(tan.sup_norm() < 1e-10);

        let k = ScalarField::from_fn(256, f64::cos)
            .times_field(c.normal())
            .unwrap();
        let expected = c
            .from_frame(
                &ScalarField::from_fn(256, f64::cos),
                &ScalarField::from_fn(256, f64::sin),
            )
            .unwrap();
        let (_, arc) = s.project(&k).unwrap();
        assert!((&arc - &expected).sup_norm() < 1e-3);

        let (tan, arc) = s.project(c.tangent()).unwrap();
        assert!(arc.sup_norm() < 1e-14);
        assert!((&tan - c.tangent()).sup_norm() < 1e-14);
    }

    #[test]
    fn inflation_preserves_constant_speed() {
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let r = speed_preservation_residual(&c, c.normal()).unwrap();
        assert!(r.sup_norm() < 2e-2);
    }

    #[test]
    fn tangential_sine_does_not_preserve_speed() {
        // h = sin θ · v on the unit circle: D_s h = cos θ v + sin θ n and
        // ⟨D_s² h, v⟩ = −sin θ − sin θ, κ⟨D_s h, n⟩ = sin θ, so the residual
        // is −sin θ with sup-norm 1 (up to O(n⁻²)).
        let c = DiscreteCurve::circle(256, 1.0).unwrap();
        let h = ScalarField::from_fn(256, f64::sin)
            .times_field(c.tangent())
            .unwrap();
        let r = speed_preservation_residual(&c, &h).unwrap();
        let err = theta_grid(256)
            .iter()
            .zip(r.values())
            .fold(0.0_f64, |m, (t, r)| m.max((r + t.sin()).abs()));
        assert!(err < 2e-2, "err {err}");
    }

    #[test]
    fn verify_detects_corruption() {
        let c = DiscreteCurve::ellipse(64, 2.0, 1.0).unwrap();
        let s = tan_nor_splitting(&c);
        assert!(verify_splitting(&s, 1e-10).pass);
        let corrupted = s.with_first(s.first().scale(1.01)).unwrap();
        let report = verify_splitting(&corrupted, 1e-10);
        assert!(!report.pass);
        assert!((report.idempotence_first - 0.01).abs() < 2e-3, "{report:?}");
    }

    #[test]
    fn arc0_splitting_verifies() {
        let c = DiscreteCurve::circle(128, 1.0).unwrap();
        let report = verify_splitting(&arc0_splitting(&c).unwrap(), 1e-8);
        assert!(report.pass, "{report:?}");
        assert!(report.complementarity < 1e-15);
    }
}
