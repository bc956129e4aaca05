mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signet_core::analysis::{
    balance_condition, cluster_count_prediction, distance_bounds, predict,
    signed_laplacian_eigen_oracle, Basis,
};
use signet_core::circuit::effective_resistance;
use signet_core::{EdgeFunction, Graph, Grid, NetworkSystem, Verdict};

fn lin(w: f64) -> EdgeFunction {
    EdgeFunction::linear(w).unwrap()
}

#[test]
fn series_balance_thresholds() {
    // psi_bar = zeta / 3 between the ends of the 0.5 / 1 series pair
    let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
    let fs = vec![lin(0.5), lin(1.0)];
    let check = |w: f64| balance_condition(&g, &fs, &lin(w), 0, 2, 100.0, 2001).unwrap();
    let below = check(-0.25);
    assert!(below.holds && below.strict);
    assert!((below.margin - 1.0 / 12.0).abs() < 1e-9);
    let at = check(-1.0 / 3.0);
    assert!(at.holds && !at.strict);
    let above = check(-0.5);
    assert!(!above.holds);
}

/// 100 random positive linear networks closed by one negative linear edge:
/// the verdict follows the sign of the smallest nontrivial eigenvalue of the
/// signed Laplacian, and the switch sits at `w = -1 / r_eff`.
#[test]
fn linear_verdicts_follow_the_signed_laplacian() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = Grid::new(10.0, 201).unwrap();
    let mut seen = [0usize; 3];
    for trial in 0..100 {
        let n = rng.gen_range(2..9);
        let extra = rng.gen_range(0..5);
        let mut pairs = common::random_connected_edges(&mut rng, n, extra);
        let w: Vec<f64> = pairs.iter().map(|_| rng.gen_range(0.1..5.0)).collect();
        let p = rng.gen_range(0..n);
        let q = (p + rng.gen_range(1..n)) % n;
        let base = Graph::new(n, &pairs).unwrap();
        let r = effective_resistance(&base, &w, p, q).unwrap();
        // every fourth trial sits exactly on the boundary
        let w_bar = if trial % 4 == 0 {
            -1.0 / r
        } else {
            -rng.gen_range(0.2..1.8) / r
        };
        pairs.push((p, q));
        let mut fs: Vec<EdgeFunction> = w.iter().map(|&x| lin(x)).collect();
        fs.push(lin(w_bar));
        let net = NetworkSystem::with_integrators(Graph::new(n, &pairs).unwrap(), fs).unwrap();
        let lambda = signed_laplacian_eigen_oracle(&net).unwrap();
        let check = balance_condition(
            &base,
            &net.edge_functions()[..pairs.len() - 1],
            &lin(w_bar),
            p,
            q,
            10.0,
            201,
        )
        .unwrap();
        assert_eq!(check.holds, lambda >= -1e-9, "lambda {lambda:e}");
        assert_eq!(check.strict, lambda > 1e-9, "lambda {lambda:e}");
        if lambda.abs() < 1e-9 {
            seen[2] += 1;
            continue;
        }
        let pred = predict(&net, &grid);
        if lambda > 0.0 {
            assert_eq!(
                pred.verdict,
                Verdict::AgreementGuaranteed,
                "w_bar r = {}",
                w_bar * r
            );
            assert_eq!(pred.basis, Basis::StrictEquivalentBalance);
            seen[0] += 1;
        } else {
            assert_eq!(
                pred.verdict,
                Verdict::NoGuarantee,
                "w_bar r = {}",
                w_bar * r
            );
            seen[1] += 1;
        }
        assert_eq!(lambda > 0.0, w_bar * r > -1.0);
    }
    assert!(seen[0] > 20 && seen[1] > 20 && seen[2] == 25, "{seen:?}");
}

#[test]
fn positive_network_verdicts() {
    let grid = Grid::default();
    let g = Graph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    let strict = NetworkSystem::with_integrators(g.clone(), vec![lin(1.0); 3]).unwrap();
    let p = predict(&strict, &grid);
    assert_eq!(p.verdict, Verdict::AgreementGuaranteed);
    assert_eq!(p.basis, Basis::StrictlyPositiveNetwork);

    let dz = EdgeFunction::dead_zone(1.0, 1.0).unwrap();
    let spanning =
        NetworkSystem::with_integrators(g.clone(), vec![lin(1.0), lin(1.0), dz.clone()]).unwrap();
    let p = predict(&spanning, &grid);
    assert_eq!(p.basis, Basis::StrictlyPositiveSpanningSubgraph);

    let loose = NetworkSystem::with_integrators(g, vec![dz.clone(), dz, lin(1.0)]).unwrap();
    let p = predict(&loose, &grid);
    assert_eq!(p.verdict, Verdict::ConvergenceGuaranteed);
    assert_eq!(p.basis, Basis::PositiveNetwork);
}

#[test]
fn single_cycle_cluster_counts() {
    // unit path 0-1-2-3 closed by a dead-zone edge of negative slope
    let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
    let neg = EdgeFunction::negated(EdgeFunction::dead_zone(0.1, 1.0).unwrap()).unwrap();
    let net = NetworkSystem::with_integrators(g, vec![lin(1.0), lin(1.0), lin(1.0), neg]).unwrap();
    assert_eq!(cluster_count_prediction(&net, 3).unwrap(), vec![1, 4]);
    assert!(cluster_count_prediction(&net, 0).is_err());
}

#[test]
fn dead_zone_distance_bounds() {
    // two dead-zone paths between 0 and 2: 0->1->2 (bands 1, 2) and 0->2 (band 1.5)
    let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let fs = vec![
        EdgeFunction::dead_zone(1.0, 1.0).unwrap(),
        EdgeFunction::dead_zone(1.0, 2.0).unwrap(),
        EdgeFunction::dead_zone(1.0, 1.5).unwrap(),
    ];
    let net = NetworkSystem::with_integrators(g, fs).unwrap();
    let (lo, hi) = distance_bounds(&net, 0, 2).unwrap();
    assert_eq!((lo, hi), (-1.5, 1.5));
    let (lo, hi) = distance_bounds(&net, 0, 1).unwrap();
    // direct edge gives [-1, 1]; around the triangle [-1.5 - 2, 1.5 + 2]
    assert_eq!((lo, hi), (-1.0, 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Reversing an edge and conjugating its function leaves the dynamics
    /// unchanged.
    #[test]
    fn orientation_covariance(seed in any::<u64>(), flip in any::<u16>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..7);
        let extra = rng.gen_range(0..4);
        let pairs = common::random_connected_edges(&mut rng, n, extra);
        let fs: Vec<EdgeFunction> = pairs
            .iter()
            .map(|_| {
                let pts = [(-2.0, -rng.gen_range(0.5..3.0)), (0.0, 0.0), (1.0, rng.gen_range(0.1..2.0)), (3.0, rng.gen_range(2.0..4.0))];
                let t = signet_core::SampledTable::from_points(&pts, signet_core::Extrapolation::Linear).unwrap();
                EdgeFunction::sum(vec![EdgeFunction::table(t).unwrap(), EdgeFunction::sinusoid(rng.gen_range(0.0..1.0)).unwrap()]).unwrap()
            })
            .collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let net = NetworkSystem::with_integrators(Graph::new(n, &pairs).unwrap(), fs.clone()).unwrap();
        let (mut pairs2, mut fs2) = (pairs.clone(), fs.clone());
        for k in 0..pairs.len() {
            if flip & (1 << k) != 0 {
                pairs2[k] = (pairs[k].1, pairs[k].0);
                fs2[k] = fs[k].conjugate();
            }
        }
        let net2 = NetworkSystem::with_integrators(Graph::new(n, &pairs2).unwrap(), fs2).unwrap();
        let a = net.vector_field(&x).unwrap();
        let b = net2.vector_field(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-12 * (1.0 + u.abs()));
        }
    }

    /// Power balance: zeta^T psi(zeta) = -y^T u.
    #[test]
    fn power_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..8);
        let extra = rng.gen_range(0..5);
        let g = common::random_connected_graph(&mut rng, n, extra);
        let fs: Vec<EdgeFunction> = (0..g.edge_count())
            .map(|_| EdgeFunction::power_sign(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..0.9)).unwrap())
            .collect();
        let net = NetworkSystem::with_integrators(g, fs).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let zeta = net.tension(&y).unwrap();
        let mu = net.flow(&zeta).unwrap();
        let u = net.coupling_input(&y).unwrap();
        let lhs: f64 = zeta.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let rhs: f64 = -y.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
}
