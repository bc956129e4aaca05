mod common;

use proptest::prelude::*;
use signet_core::edgefn::{EdgeFnError, Extrapolation, SampledTable, Sign};
use signet_core::{EdgeFunction, Grid};

fn sample_functions() -> Vec<EdgeFunction> {
    vec![
        EdgeFunction::linear(1.5).unwrap(),
        EdgeFunction::linear(-0.3).unwrap(),
        EdgeFunction::dead_zone(2.0, 0.7).unwrap(),
        EdgeFunction::power_sign(3.0, 0.4).unwrap(),
        EdgeFunction::sinusoid(1.2).unwrap(),
        EdgeFunction::negated(EdgeFunction::power_sign(1.0, 0.6).unwrap()).unwrap(),
        EdgeFunction::sum(vec![
            EdgeFunction::linear(0.5).unwrap(),
            EdgeFunction::sinusoid(1.0).unwrap(),
            EdgeFunction::dead_zone(1.0, 2.0).unwrap(),
        ])
        .unwrap(),
        EdgeFunction::table(
            SampledTable::from_points(
                &[
                    (-2.0, -3.0),
                    (-0.5, -0.2),
                    (0.0, 0.0),
                    (1.0, 0.4),
                    (3.0, 5.0),
                ],
                Extrapolation::Linear,
            )
            .unwrap(),
        )
        .unwrap(),
    ]
}

#[test]
fn cocontent_matches_quadrature() {
    for f in sample_functions() {
        for z in [-7.3, -2.0, -0.4, 0.0, 0.25, 1.0, 2.9, 6.1] {
            // split at 0 and at the kinks so Simpson sees smooth pieces
            let mut cuts = vec![0.0, z, 0.5, -0.5, 0.7, -0.7, 2.0, -2.0, 1.0, 3.0, -3.0];
            cuts.retain(|c: &f64| *c == 0.0 || (c.abs() <= z.abs() && c * z > 0.0));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut q = 0.0;
            for w in cuts.windows(2) {
                q += common::simpson(|s| f.eval(s), w[0], w[1], 2000);
            }
            if z < 0.0 {
                q = -q;
            }
            let tol = 1e-6 * (1.0 + q.abs());
            assert!(
                (f.cocontent(z) - q).abs() < tol,
                "{f} at {z}: {} vs {q}",
                f.cocontent(z)
            );
        }
    }
}

#[test]
fn derivative_matches_central_differences() {
    let h = 1e-6;
    for f in sample_functions() {
        for z in [-5.1, -1.3, 0.3, 1.9, 4.4] {
            let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            let d = f.derivative(z);
            assert!(
                (fd - d).abs() < 1e-5 * (1.0 + d.abs()),
                "{f} at {z}: {d} vs {fd}"
            );
        }
    }
}

#[test]
fn sign_classes_of_basic_kinds() {
    let grid = Grid::default();
    let cases = [
        (EdgeFunction::linear(2.0).unwrap(), Sign::StrictlyPositive),
        (EdgeFunction::linear(-2.0).unwrap(), Sign::StrictlyNegative),
        (EdgeFunction::dead_zone(1.0, 1.0).unwrap(), Sign::Positive),
        (
            EdgeFunction::negated(EdgeFunction::dead_zone(1.0, 1.0).unwrap()).unwrap(),
            Sign::Negative,
        ),
        (
            EdgeFunction::power_sign(2.0, 0.5).unwrap(),
            Sign::StrictlyPositive,
        ),
        (
            EdgeFunction::negated(EdgeFunction::power_sign(2.0, 0.5).unwrap()).unwrap(),
            Sign::StrictlyNegative,
        ),
        (EdgeFunction::sinusoid(1.0).unwrap(), Sign::Indefinite),
        (EdgeFunction::linear(0.0).unwrap(), Sign::Positive),
    ];
    for (f, want) in cases {
        let c = f.classify_sign(&grid);
        assert_eq!(c.sign, want, "{f}");
    }
}

#[test]
fn strict_margin_of_power_sign_is_attained_at_grid_edge() {
    // w |z|^(a-1) is smallest at |z| = N
    let f = EdgeFunction::power_sign(3.0, 0.4).unwrap();
    let c = f.classify_sign(&Grid::default());
    let want = 3.0 * 100f64.powf(-0.6);
    assert!((c.margin - want).abs() < 1e-12);
}

#[test]
fn indefinite_witness_violates_passivity() {
    let f = EdgeFunction::sinusoid(1.0).unwrap();
    let c = f.classify_sign(&Grid::default());
    let z = c.witness.unwrap();
    assert!(z * f.eval(z) < 0.0);
}

#[test]
fn equilibria_intervals() {
    let dz = EdgeFunction::dead_zone(1.0, 1.5).unwrap();
    let iv = dz.equilibria().unwrap();
    assert_eq!((iv.lower, iv.upper), (-1.5, 1.5));
    let lin = EdgeFunction::linear(0.1).unwrap();
    assert_eq!(lin.equilibria().unwrap().width(), 0.0);
    assert!(matches!(
        EdgeFunction::sinusoid(1.0).unwrap().equilibria(),
        Err(EdgeFnError::NotAnInterval)
    ));
    // sum of dead zone and its negative vanishes everywhere
    let zero = EdgeFunction::sum(vec![dz.clone(), EdgeFunction::negated(dz).unwrap()]).unwrap();
    assert!(zero.equilibria().unwrap().is_whole_line());
}

#[test]
fn table_holds_or_extends_beyond_samples() {
    let pts = [(-1.0, -2.0), (0.0, 0.0), (1.0, 1.0), (2.0, 4.0)];
    let hold = SampledTable::from_points(&pts, Extrapolation::Hold).unwrap();
    let lin = SampledTable::from_points(&pts, Extrapolation::Linear).unwrap();
    assert_eq!(hold.eval(5.0), 4.0);
    assert_eq!(lin.eval(5.0), 13.0);
    assert_eq!(lin.eval(-3.0), -6.0);
    assert_eq!(hold.eval(0.5), 0.5);
    assert!((hold.integral(3.0) - (0.5 + 2.5 + 4.0)).abs() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(EdgeFunction::power_sign(1.0, 1.5).is_err());
    assert!(EdgeFunction::power_sign(1.0, 0.0).is_err());
    assert!(EdgeFunction::dead_zone(1.0, -1.0).is_err());
    assert!(EdgeFunction::linear(f64::NAN).is_err());
    assert!(EdgeFunction::sum(vec![]).is_err());
    assert!(
        SampledTable::from_points(&[(0.0, 1.0), (1.0, 2.0)], Extrapolation::Hold)
            .and_then(EdgeFunction::table)
            .is_err()
    );
}

proptest! {
    #[test]
    fn conjugate_flips_orientation(z in -50.0f64..50.0, w in 0.1f64..5.0, a in 0.05f64..0.95) {
        let table = SampledTable::from_points(
            &[(-3.0, -1.0), (0.0, 0.0), (2.0, 5.0), (4.0, 6.0)],
            Extrapolation::Linear,
        ).unwrap();
        for f in [
            EdgeFunction::power_sign(w, a).unwrap(),
            EdgeFunction::table(table.clone()).unwrap(),
            EdgeFunction::negated(EdgeFunction::table(table.clone()).unwrap()).unwrap(),
        ] {
            let c = f.conjugate();
            prop_assert!((c.eval(z) + f.eval(-z)).abs() < 1e-12 * (1.0 + f.eval(-z).abs()));
            prop_assert!((c.cocontent(z) - f.cocontent(-z)).abs() < 1e-9 * (1.0 + f.cocontent(-z).abs()));
        }
    }

    #[test]
    fn passive_cocontent_is_nonnegative(z in -100.0f64..100.0, w in 0.0f64..5.0, a in 0.05f64..0.95, b in 0.0f64..3.0) {
        for f in [
            EdgeFunction::linear(w).unwrap(),
            EdgeFunction::power_sign(w, a).unwrap(),
            EdgeFunction::dead_zone(w, b).unwrap(),
        ] {
            prop_assert!(f.cocontent(z) >= 0.0);
            prop_assert!(z * f.eval(z) >= 0.0);
        }
    }
}
