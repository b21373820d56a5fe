//! Metrics `G_c(h, k) = ∫⟨L_c h, k⟩ ds` and their verification.
//!
//! A splitting `T_c Imm = H ⊕ K` with projections `P_H`, `P_K` is
//! `G`-orthogonal exactly when the inertia operator decomposes as
//! `L = P_H* L̃ P_H + P_K* L̃ P_K` for some `L̃`. This module constructs such
//! operators ([`prescribed_splitting_metric`]) and measures both sides of the
//! equivalence: [`Metric::orthogonality_defect`] and
//! [`Metric::decomposition_residual`].

use nalgebra::DVector;
use serde::Serialize;

use crate::curve::{Diffeo, DiscreteCurve};
use crate::error::{check_grid, Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::linop::{LinOp, SymmetryCheck, SymmetryReport};
use crate::recipe::Recipe;
use crate::splitting::{solve_b, Splitting};

/// Relative asymmetry tolerated for an inertia operator.
pub const OPERATOR_SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Direct,
    Prescribed {
        labels: (String, String),
        inner: LinOp,
    },
}

#[derive(Debug, Clone)]
pub struct Metric {
    operator: LinOp,
    curve: DiscreteCurve,
    provenance: Provenance,
}

fn require_symmetric_positive(op: &LinOp) -> Result<SymmetryReport> {
    let report = op.is_symmetric_positive(OPERATOR_SYMMETRY_TOLERANCE, &SymmetryCheck::default());
    if report.pass {
        Ok(report)
    } else {
        Err(Error::NotSymmetricPositive {
            asymmetry: report.relative_asymmetry,
            min_rayleigh: report.min_rayleigh,
        })
    }
}

/// Wraps an inertia operator after checking symmetry and positivity.
pub fn metric_from_operator(curve: &DiscreteCurve, operator: LinOp) -> Result<Metric> {
    check_grid(curve.n(), operator.n())?;
    require_symmetric_positive(&operator)?;
    Ok(Metric {
        operator,
        curve: curve.clone(),
        provenance: Provenance::Direct,
    })
}

/// The metric with inertia operator `P₁* L̃ P₁ + P₂* L̃ P₂`, which makes the
/// two subbundles of `splitting` orthogonal.
pub fn prescribed_splitting_metric(
    curve: &DiscreteCurve,
    splitting: &Splitting,
    inner: &LinOp,
) -> Result<Metric> {
    check_grid(curve.n(), splitting.n())?;
    check_grid(curve.n(), inner.n())?;
    require_symmetric_positive(inner)?;
    let operator = inner
        .sandwich(splitting.first())?
        .add(&inner.sandwich(splitting.second())?)?;
    let (a, b) = splitting.labels();
    Ok(Metric {
        operator,
        curve: curve.clone(),
        provenance: Provenance::Prescribed {
            labels: (a.to_owned(), b.to_owned()),
            inner: inner.clone(),
        },
    })
}

impl Metric {
    pub(crate) fn unchecked(curve: &DiscreteCurve, operator: LinOp) -> Self {
        Self {
            operator,
            curve: curve.clone(),
            provenance: Provenance::Direct,
        }
    }

    pub fn operator(&self) -> &LinOp {
        &self.operator
    }

    pub fn curve(&self) -> &DiscreteCurve {
        &self.curve
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `G_c(h, k) = ∫⟨L h, k⟩ ds`.
    pub fn eval(&self, h: &TangentField, k: &TangentField) -> Result<f64> {
        self.curve.l2_inner(&self.operator.apply(h)?, k)
    }

    /// Largest normalized cross term `|G(P₁eᵢ, P₂eⱼ)| / √(G(P₁eᵢ,P₁eᵢ)·G(P₂eⱼ,P₂eⱼ))`
    /// over all pairs of coordinate basis fields.
    pub fn orthogonality_defect(&self, splitting: &Splitting) -> Result<f64> {
        check_grid(self.curve.n(), splitting.n())?;
        let gram = self.operator.gram();
        let p = splitting.first().matrix();
        let q = splitting.second().matrix();
        let gp = &gram * p;
        let gq = &gram * q;
        let cross = q.transpose() * &gp;
        let norm_p = DVector::from_fn(p.ncols(), |i, _| p.column(i).dot(&gp.column(i)));
        let norm_q = DVector::from_fn(q.ncols(), |j, _| q.column(j).dot(&gq.column(j)));
        // basis fields a projection annihilates carry no orthogonality information
        let floor_p = 1e-14 * norm_p.amax();
        let floor_q = 1e-14 * norm_q.amax();
        let mut defect = 0.0_f64;
        for i in 0..p.ncols() {
            if norm_p[i] <= floor_p {
                continue;
            }
            for j in 0..q.ncols() {
                if norm_q[j] <= floor_q {
                    continue;
                }
                defect = defect.max(cross[(j, i)].abs() / (norm_p[i] * norm_q[j]).sqrt());
            }
        }
        Ok(defect)
    }

    /// `max|L − P₁* L P₁ − P₂* L P₂| / max|L|`: how far `L` is from
    /// decomposing along the splitting with `L̃ = L`.
    pub fn decomposition_residual(&self, splitting: &Splitting) -> Result<f64> {
        check_grid(self.curve.n(), splitting.n())?;
        let l = &self.operator;
        let rebuilt = l
            .sandwich(splitting.first())?
            .add(&l.sandwich(splitting.second())?)?;
        Ok(l.sub(&rebuilt)?.max_abs() / l.max_abs())
    }

    /// Relative size of the tangential part of `L h`: zero exactly when
    /// `L h` is normal, i.e. `h` is horizontal for the vertical bundle
    /// `Tan(c)`. A zero field reports zero.
    pub fn horizontality_residual(&self, h: &TangentField) -> Result<f64> {
        let lh = self.operator.apply(h)?;
        let tangential = lh.dot(self.curve.tangent())?;
        let total = self.curve.l2_inner(&lh, &lh)?;
        if total == 0.0 {
            return Ok(0.0);
        }
        let tan_sq = self.curve.integrate(&tangential.map(|t| t * t))?;
        Ok((tan_sq / total).sqrt())
    }

    /// Orthogonality, decomposition and symmetry diagnostics against a
    /// splitting.
    pub fn report(
        &self,
        splitting: &Splitting,
        tolerances: &VerifyTolerances,
        sampling: &SymmetryCheck,
    ) -> Result<MetricReport> {
        let orthogonality_defect = self.orthogonality_defect(splitting)?;
        let decomposition_residual = self.decomposition_residual(splitting)?;
        let symmetry = self
            .operator
            .is_symmetric_positive(tolerances.symmetry, sampling);
        let pass = orthogonality_defect < tolerances.orthogonality
            && decomposition_residual < tolerances.decomposition
            && symmetry.pass;
        Ok(MetricReport {
            orthogonality_defect,
            decomposition_residual,
            symmetry_defect: symmetry.relative_asymmetry,
            min_rayleigh: symmetry.min_rayleigh,
            pass,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    pub orthogonality: f64,
    pub decomposition: f64,
    pub symmetry: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            orthogonality: 1e-10,
            decomposition: 1e-8,
            symmetry: OPERATOR_SYMMETRY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub orthogonality_defect: f64,
    pub decomposition_residual: f64,
    pub symmetry_defect: f64,
    pub min_rayleigh: f64,
    pub pass: bool,
}

struct Arc0Coefficients {
    a: ScalarField,
    b: ScalarField,
    b_tilde: ScalarField,
}

fn arc0_coefficients(curve: &DiscreteCurve, h: &TangentField) -> Result<Arc0Coefficients> {
    let (a, b_tilde) = curve.frame_coefficients(h)?;
    let b = solve_b(curve, &a)?;
    Ok(Arc0Coefficients { a, b, b_tilde })
}

fn integrate_pairwise(
    curve: &DiscreteCurve,
    h: &TangentField,
    k: &TangentField,
    integrand: impl Fn(f64, f64, f64, f64, f64, f64) -> f64,
) -> Result<f64> {
    let x = arc0_coefficients(curve, h)?;
    let y = arc0_coefficients(curve, k)?;
    let values = (0..curve.n())
        .map(|j| integrand(x.a[j], x.b[j], x.b_tilde[j], y.a[j], y.b[j], y.b_tilde[j]))
        .collect();
    curve.integrate(&ScalarField::new(values))
}

/// `∫ 2a₁a₂ + b̃₁b̃₂ − b₁b̃₂ − b̃₁b₂ + b₁b₂ ds` with `a = ⟨h,n⟩`, `b̃ = ⟨h,v⟩`
/// and `b` the `Arc⁰` coefficient. This is what one gets by taking
/// `h − b v` as the tangential part (which keeps the normal component) and
/// dropping one `b₁b₂` term. It disagrees with the operator metric whenever
/// `a ≠ 0` or `b ≠ 0`; kept for comparison only.
pub fn uncorrected_closed_form_arc0(
    curve: &DiscreteCurve,
    h: &TangentField,
    k: &TangentField,
) -> Result<f64> {
    integrate_pairwise(curve, h, k, |a1, b1, t1, a2, b2, t2| {
        2.0 * a1 * a2 + t1 * t2 - b1 * t2 - t1 * b2 + b1 * b2
    })
}

/// `∫ a₁a₂ + b₁b₂ + (b̃₁−b₁)(b̃₂−b₂) ds`: the expansion of
/// `⟨P^Tan h, P^Tan k⟩ + ⟨P^Arc⁰ h, P^Arc⁰ k⟩` in frame coefficients.
pub fn oracle_closed_form_arc0(
    curve: &DiscreteCurve,
    h: &TangentField,
    k: &TangentField,
) -> Result<f64> {
    integrate_pairwise(curve, h, k, |a1, b1, t1, a2, b2, t2| {
        a1 * a2 + b1 * b2 + (t1 - b1) * (t2 - b2)
    })
}

/// `|G_{c∘φ}(h∘φ, k∘φ) − G_c(h, k)| / |G_c(h, k)|` with both operators
/// built from the same recipe.
pub fn reparam_invariance_defect(
    recipe: &Recipe,
    curve: &DiscreteCurve,
    phi: &Diffeo,
    h: &TangentField,
    k: &TangentField,
) -> Result<f64> {
    let moved = curve.apply_diffeo(phi)?;
    let h_moved = curve.apply_diffeo_field(h, phi)?;
    let k_moved = curve.apply_diffeo_field(k, phi)?;
    let before = curve.l2_inner(&recipe.build(curve)?.apply(h)?, k)?;
    let after = moved.l2_inner(&recipe.build(&moved)?.apply(&h_moved)?, &k_moved)?;
    Ok((after - before).abs() / before.abs())
}
