#![allow(dead_code)]

use curvemetrics::{DiscreteCurve, TangentField, Vec2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn polar(n: usize, r: impl Fn(f64) -> f64) -> DiscreteCurve {
    DiscreteCurve::from_fn(n, |t| r(t) * Vec2::new(t.cos(), t.sin())).unwrap()
}

/// Circle, ellipse, two perturbed circles and a constant-speed limaçon.
pub fn test_curves(n: usize) -> Vec<(&'static str, DiscreteCurve)> {
    vec![
        ("circle", DiscreteCurve::circle(n, 1.0).unwrap()),
        ("ellipse", DiscreteCurve::ellipse(n, 2.0, 1.0).unwrap()),
        ("wavy3", polar(n, |t| 1.0 + 0.1 * (3.0 * t).cos())),
        (
            "wavy25",
            polar(n, |t| 1.0 + 0.05 * (5.0 * t).sin() + 0.05 * (2.0 * t).cos()),
        ),
        (
            "limacon",
            polar(n, |t| 1.0 + 2.0 / 3.0 * t.cos())
                .reparametrize_constant_speed()
                .unwrap(),
        ),
    ]
}

/// The same curves resampled to constant speed.
pub fn constant_speed_curves(n: usize) -> Vec<(&'static str, DiscreteCurve)> {
    test_curves(n)
        .into_iter()
        .map(|(name, c)| (name, c.reparametrize_constant_speed().unwrap()))
        .collect()
}

/// Random trigonometric polynomial field with modes up to `modes`.
pub fn smooth_field(rng: &mut ChaCha8Rng, n: usize, modes: usize) -> TangentField {
    let coeffs: Vec<[f64; 4]> = (0..=modes)
        .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
        .collect();
    TangentField::from_fn(n, |t| {
        coeffs
            .iter()
            .enumerate()
            .fold(Vec2::zeros(), |acc, (m, c)| {
                let (s, co) = (m as f64 * t).sin_cos();
                acc + Vec2::new(c[0] * co + c[1] * s, c[2] * co + c[3] * s)
            })
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
