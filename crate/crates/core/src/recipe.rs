//! Operator recipes: rules that build an inertia operator on any curve.
//!
//! Textual forms, as accepted by [`Recipe::from_str`]:
//!
//! ```text
//! l2
//! sobolev(1,[1,1])
//! almost_local(1+k^2)
//! almost_local(2+0.5*k^2+0.1*l)
//! prescribed(tan_nor, sobolev(1,[1,1]))
//! ```
//!
//! In `almost_local` expressions `k` is the curvature and `l` the total
//! length of the curve.

use std::fmt;
use std::str::FromStr;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linop::{almost_local_operator, sobolev_operator, LinOp};
use crate::splitting::SplittingKind;

/// `Φ = constant + curvature_sq·κ² + length·ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmostLocalCoefficient {
    pub constant: f64,
    pub curvature_sq: f64,
    pub length: f64,
}

impl AlmostLocalCoefficient {
    /// `Φ = 1 + κ²`.
    pub const ONE_PLUS_KAPPA_SQ: Self = Self {
        constant: 1.0,
        curvature_sq: 1.0,
        length: 0.0,
    };

    pub fn evaluate(&self, curve: &DiscreteCurve) -> ScalarField {
        let ell = curve.total_length();
        curve
            .curvature()
            .map(|k| self.constant + self.curvature_sq * k * k + self.length * ell)
    }
}

impl fmt::Display for AlmostLocalCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        if self.constant != 0.0 {
            terms.push(format!("{}", self.constant));
        }
        if self.curvature_sq != 0.0 {
            terms.push(if self.curvature_sq == 1.0 {
                "k^2".to_owned()
            } else {
                format!("{}*k^2", self.curvature_sq)
            });
        }
        if self.length != 0.0 {
            terms.push(if self.length == 1.0 {
                "l".to_owned()
            } else {
                format!("{}*l", self.length)
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        f.write_str(&terms.join("+"))
    }
}

impl FromStr for AlmostLocalCoefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut coeff = Self {
            constant: 0.0,
            curvature_sq: 0.0,
            length: 0.0,
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty almost_local expression".into()));
        }
        for term in compact.split('+') {
            let (factor, atom) = match term.split_once('*') {
                Some((f, a)) => (parse_number(f)?, a),
                None => match term {
                    "k^2" | "l" => (1.0, term),
                    number => (parse_number(number)?, ""),
                },
            };
            match atom {
                "" => coeff.constant += factor,
                "k^2" => coeff.curvature_sq += factor,
                "l" => coeff.length += factor,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown almost_local term {other:?} (expected k^2 or l)"
                    )))
                }
            }
        }
        Ok(coeff)
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("expected a number, found {s:?}")))
}

/// How to build the inertia operator `L_c` from a curve `c`.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// The identity, giving the `L²(ds)` metric.
    L2,
    /// `Σ_m coeffs[m] (−1)^m D_s^{2m}`.
    Sobolev { order: usize, coeffs: Vec<f64> },
    /// Multiplication by a positive function of curvature and length.
    AlmostLocal(AlmostLocalCoefficient),
    /// `P₁* L̃ P₁ + P₂* L̃ P₂` for a splitting and an inner recipe `L̃`.
    Prescribed {
        splitting: SplittingKind,
        inner: Box<Recipe>,
    },
}

impl Recipe {
    pub fn build(&self, curve: &DiscreteCurve) -> Result<LinOp> {
        match self {
            Recipe::L2 => Ok(LinOp::identity(curve)),
            Recipe::Sobolev { order, coeffs } => sobolev_operator(curve, *order, coeffs),
            Recipe::AlmostLocal(phi) => almost_local_operator(curve, &phi.evaluate(curve)),
            Recipe::Prescribed { splitting, inner } => {
                let s = splitting.build(curve)?;
                let inner = inner.build(curve)?;
                inner.sandwich(s.first())?.add(&inner.sandwich(s.second())?)
            }
        }
    }

    /// The splitting a prescribed recipe is built around.
    pub fn splitting(&self) -> Option<SplittingKind> {
        match self {
            Recipe::Prescribed { splitting, .. } => Some(*splitting),
            _ => None,
        }
    }

    /// Whether building needs a constant-speed curve.
    pub fn needs_constant_speed(&self) -> bool {
        match self {
            Recipe::Prescribed { splitting, inner } => {
                *splitting == SplittingKind::Arc0 || inner.needs_constant_speed()
            }
            _ => false,
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recipe::L2 => f.write_str("l2"),
            Recipe::Sobolev { order, coeffs } => {
                let list: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "sobolev({order},[{}])", list.join(","))
            }
            Recipe::AlmostLocal(phi) => write!(f, "almost_local({phi})"),
            Recipe::Prescribed { splitting, inner } => {
                write!(f, "prescribed({},{inner})", splitting.tag())
            }
        }
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "l2" {
            return Ok(Recipe::L2);
        }
        let (name, args) = s
            .split_once('(')
            .and_then(|(name, rest)| rest.strip_suffix(')').map(|args| (name.trim(), args)))
            .ok_or_else(|| Error::Parse(format!("malformed recipe {s:?}")))?;
        match name {
            "sobolev" => {
                let (order, list) = args.split_once(',').ok_or_else(|| {
                    Error::Parse(format!("sobolev needs (l,[coeffs]), got {args:?}"))
                })?;
                let order: usize = order.trim().parse().map_err(|_| {
                    Error::Parse(format!("invalid sobolev order {:?}", order.trim()))
                })?;
                let list = list
                    .trim()
                    .strip_prefix('[')
                    .and_then(|l| l.strip_suffix(']'))
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "sobolev coefficients must be a [list], got {list:?}"
                        ))
                    })?;
                let coeffs = list
                    .split(',')
                    .map(|c| parse_number(c.trim()))
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.len() != order + 1 {
                    return Err(Error::Parse(format!(
                        "sobolev order {order} needs {} coefficients, got {}",
                        order + 1,
                        coeffs.len()
                    )));
                }
                if coeffs[0] <= 0.0 || coeffs.iter().any(|c| *c < 0.0) {
                    return Err(Error::Parse(format!(
                        "sobolev coefficients must be non-negative with a positive leading term, got {coeffs:?}"
                    )));
                }
                Ok(Recipe::Sobolev { order, coeffs })
            }
            "almost_local" => Ok(Recipe::AlmostLocal(args.parse()?)),
            "prescribed" => {
                let (tag, inner) = args.split_once(',').ok_or_else(|| {
                    Error::Parse(format!(
                        "prescribed needs (splitting, recipe), got {args:?}"
                    ))
                })?;
                Ok(Recipe::Prescribed {
                    splitting: tag.parse()?,
                    inner: Box::new(inner.parse()?),
                })
            }
            other => Err(Error::Parse(format!("unknown recipe kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!("l2".parse::<Recipe>().unwrap(), Recipe::L2);
        assert_eq!(
            "sobolev(1,[1,1])".parse::<Recipe>().unwrap(),
            Recipe::Sobolev {
                order: 1,
                coeffs: vec![1.0, 1.0]
            }
        );
        assert_eq!(
            "almost_local(1+k^2)".parse::<Recipe>().unwrap(),
            Recipe::AlmostLocal(AlmostLocalCoefficient::ONE_PLUS_KAPPA_SQ)
        );
        let nested: Recipe = "prescribed(arc0, sobolev(2,[1, 0.5, 0.1]))"
            .parse()
            .unwrap();
        assert_eq!(nested.splitting(), Some(SplittingKind::Arc0));
        assert!(nested.needs_constant_speed());
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "l2",
            "sobolev(2,[1,0.5,0.1])",
            "almost_local(2+0.5*k^2+l)",
            "prescribed(tan_nor,almost_local(1+k^2))",
        ] {
            let recipe: Recipe = text.parse().unwrap();
            assert_eq!(recipe.to_string().parse::<Recipe>().unwrap(), recipe);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        for bad in [
            "sobolev(-1,[1])",
            "sobolev(1,[1])",
            "sobolev(1,[0,1])",
            "h1",
            "almost_local(x)",
            "prescribed(foo,l2)",
            "sobolev(1,1,1)",
        ] {
            assert!(bad.parse::<Recipe>().is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn almost_local_coefficient_values() {
        let c = DiscreteCurve::circle(64, 2.0).unwrap();
        let phi: AlmostLocalCoefficient = "1+4*k^2+0.5*l".parse().unwrap();
        let values = phi.evaluate(&c);
        let expected = 1.0 + 4.0 * 0.25 + 0.5 * c.total_length();
        assert!((values[0] - expected).abs() < 1e-2);
    }
}
