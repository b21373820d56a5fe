mod common;

use curvemetrics::path::{path_energy, path_horizontality_report};
use curvemetrics::{
    horizontal_geodesic, CurvePath, DiscreteCurve, GeodesicOptions, Recipe, SplittingKind,
};

fn ellipse_to_circle() -> (DiscreteCurve, DiscreteCurve) {
    (
        DiscreteCurve::ellipse(48, 1.3, 0.8).unwrap(),
        common::polar(48, |t| 1.0 + 0.1 * (3.0 * t).cos()),
    )
}

#[test]
fn geodesic_energy_is_reversal_symmetric() {
    let (c0, c1) = ellipse_to_circle();
    let opts = GeodesicOptions {
        tol: 1e-12,
        ..GeodesicOptions::default()
    };
    let forward = horizontal_geodesic(&c0, &c1, 6, &Recipe::L2, &opts).unwrap();
    let backward = horizontal_geodesic(&c1, &c0, 6, &Recipe::L2, &opts).unwrap();
    let (a, b) = (forward.energy(), backward.energy());
    assert!((a - b).abs() / a < 1e-6, "{a} vs {b}");
}

#[test]
fn path_energy_ignores_direction() {
    let (c0, c1) = ellipse_to_circle();
    let path = CurvePath::linear(&c0, &c1, 5).unwrap();
    let recipe: Recipe = "almost_local(1+k^2)".parse().unwrap();
    let a = path_energy(&path, &recipe).unwrap();
    let b = path_energy(&path.reversed(), &recipe).unwrap();
    assert!((a - b).abs() <= 1e-13 * a);
}

#[test]
fn geodesic_contract_holds() {
    let (c0, c1) = ellipse_to_circle();
    let recipe: Recipe = "sobolev(1,[1,0.1])".parse().unwrap();
    let result = horizontal_geodesic(&c0, &c1, 5, &recipe, &GeodesicOptions::default()).unwrap();
    let curves = result.path.curves();
    assert_eq!(curves[0], c0);
    assert_eq!(curves[curves.len() - 1], c1);
    for w in result.history.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-14, "{w:?}");
    }
    let initial =
        path_horizontality_report(&CurvePath::linear(&c0, &c1, 5).unwrap(), &recipe).unwrap();
    let initial_max = initial.iter().fold(0.0_f64, |m, r| m.max(*r));
    let final_max = result.horizontality.iter().fold(0.0_f64, |m, r| m.max(*r));
    assert!(final_max <= initial_max, "{final_max} > {initial_max}");
}

#[test]
fn arc0_geodesic_keeps_interior_constant_speed() {
    let c0 = DiscreteCurve::circle(32, 1.0).unwrap();
    let c1 = DiscreteCurve::ellipse(32, 1.2, 0.9)
        .unwrap()
        .reparametrize_constant_speed()
        .unwrap();
    let opts = GeodesicOptions {
        splitting: SplittingKind::Arc0,
        max_iters: 20,
        ..GeodesicOptions::default()
    };
    let result = horizontal_geodesic(&c0, &c1, 4, &Recipe::L2, &opts).unwrap();
    assert!(result.history.len() > 1);
    for w in result.history.windows(2) {
        assert!(w[1].energy < w[0].energy);
    }
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let (c0, c1) = ellipse_to_circle();
    let opts = GeodesicOptions {
        max_iters: 1,
        tol: 0.0,
        ..GeodesicOptions::default()
    };
    let result = horizontal_geodesic(&c0, &c1, 5, &Recipe::L2, &opts).unwrap();
    assert!(!result.converged);
    assert_eq!(result.iterations, 1);
}

#[test]
fn uniform_speed_in_time_beats_reparametrized_time() {
    let n = 64;
    let m = 17;
    let frames = |time: &dyn Fn(f64) -> f64| {
        let curves = (0..m)
            .map(|k| {
                let r = 1.0 + 0.2 * time(k as f64 / (m - 1) as f64);
                DiscreteCurve::circle(n, r).unwrap()
            })
            .collect();
        CurvePath::new(curves).unwrap()
    };
    let uniform = path_energy(&frames(&|t| t), &Recipe::L2).unwrap();
    let warped = path_energy(&frames(&|t| t * t * (3.0 - 2.0 * t)), &Recipe::L2).unwrap();
    assert!(warped > uniform, "{warped} <= {uniform}");
}

#[test]
fn tangential_drift_raises_residual_linearly() {
    let n = 64;
    let c0 = DiscreteCurve::circle(n, 1.0).unwrap();
    let c1 = DiscreteCurve::circle(n, 1.1).unwrap();
    let straight = CurvePath::linear(&c0, &c1, 5).unwrap();
    let mut previous = 0.0;
    for eps in [1e-4, 1e-3, 1e-2] {
        let curves = straight
            .curves()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let drift = c0.tangent().scale(eps * k as f64);
                DiscreteCurve::new((&c.position_field() + &drift).into_values()).unwrap()
            })
            .collect();
        let report =
            path_horizontality_report(&CurvePath::new(curves).unwrap(), &Recipe::L2).unwrap();
        // the first velocity is 0.1·(outward) + 4·eps·v
        let t = 4.0 * eps;
        let expected = t / (t * t + 0.01_f64).sqrt();
        assert!(
            (report[0] / expected - 1.0).abs() < 1e-3,
            "{eps}: {report:?}"
        );
        assert!(report[0] > previous);
        previous = report[0];
    }
}
