use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use lagflock::control::{sgn_smooth, SignMode};
use lagflock::plant::{EulerLagrange, Regressor, Spacecraft, SpacecraftParams, EARTH_MU};
use lagflock::potential::{PotentialSpec, Regime};
use lagflock::report::Table;
use lagflock::topology::{self, ProximityGraph};

fn point() -> impl Strategy<Value = DVector<f64>> {
    prop::array::uniform3(-300.0..300.0f64).prop_map(|a| DVector::from_row_slice(&a))
}

fn layout() -> impl Strategy<Value = (DVector<f64>, Vec<DVector<f64>>)> {
    (point(), prop::collection::vec(point(), 1..8))
}

fn graph() -> impl Strategy<Value = ProximityGraph> {
    layout().prop_map(|(l, f)| topology::build_graph(&l, &f, 200.0).unwrap())
}

fn vec3() -> impl Strategy<Value = DVector<f64>> {
    prop::array::uniform3(-10.0..10.0f64).prop_map(|a| DVector::from_row_slice(&a))
}

proptest! {
    #[test]
    fn laplacian_is_incidence_product(g in graph()) {
        let m = topology::matrices(&g);
        prop_assert_eq!(&m.laplacian, &(&m.incidence * m.incidence.transpose()));
    }

    #[test]
    fn h_definiteness_follows_reachability(g in graph()) {
        let lmin = topology::min_eig_sym(&topology::matrices(&g).h).unwrap();
        if topology::leader_reaches_all(&g) {
            prop_assert!(lmin > 1e-10, "lambda_min {}", lmin);
        } else {
            prop_assert!(lmin.abs() < 1e-9, "lambda_min {}", lmin);
        }
    }

    #[test]
    fn dropping_links_never_raises_lambda_min(g in graph(), mask in prop::collection::vec(any::<bool>(), 64)) {
        let edges = g.follower_edges().iter().zip(&mask).filter(|(_, &k)| k).map(|(&e, _)| e);
        let leader = g.leader_adj().iter().zip(mask.iter().rev()).map(|(&a, &k)| a && k).collect();
        let sub = ProximityGraph::from_parts(g.n(), edges, leader, g.radius()).unwrap();
        prop_assert!(topology::is_subgraph(&sub, &g).unwrap());
        let big = topology::min_eig_sym(&topology::matrices(&g).h).unwrap();
        let small = topology::min_eig_sym(&topology::matrices(&sub).h).unwrap();
        prop_assert!(small <= big + 1e-10, "{} > {}", small, big);
    }

    #[test]
    fn spectrum_ignores_follower_order((l, f) in layout(), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by_key(|&k| (k as u64).wrapping_mul(seed | 1).rotate_left(17));
        let shuffled: Vec<_> = order.iter().map(|&k| f[k].clone()).collect();
        let a = topology::sym_eigenvalues(&topology::matrices(&topology::build_graph(&l, &f, 200.0).unwrap()).h).unwrap();
        let b = topology::sym_eigenvalues(&topology::matrices(&topology::build_graph(&l, &shuffled, 200.0).unwrap()).h).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn coriolis_term_does_no_work(m in 1.0..500.0f64, q in point(), qd in vec3(), s in vec3()) {
        let sc = Spacecraft::new(SpacecraftParams::new(m, 7.0e6, EARTH_MU).unwrap());
        let c = sc.coriolis(&q, &qd);
        prop_assert!(s.dot(&(&c * &s)).abs() <= 1e-12 * (1.0 + s.norm_squared() * m));
        let mm = sc.mass_matrix(&q);
        prop_assert_eq!(&mm, &mm.transpose());
    }

    #[test]
    fn regressor_reproduces_dynamics(m in 1.0..500.0f64, q in point(), qd in vec3(), x in vec3(), y in vec3()) {
        let sc = Spacecraft::new(SpacecraftParams::new(m, 7.0e6, EARTH_MU).unwrap());
        let yy: DMatrix<f64> = sc.regressor(&q, &qd, &x, &y).unwrap();
        let lhs = sc.lhs(&q, &qd, &x, &y).unwrap();
        let rhs = yy * sc.true_params();
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn gradient_is_antisymmetric_and_radial(qi in point(), qj in point(), connected in any::<bool>()) {
        let spec = PotentialSpec::new(200.0, 80.0).unwrap();
        let regime = if connected { Regime::Connected } else { Regime::Unconnected };
        let d = (&qi - &qj).norm();
        prop_assume!(d > 1.0 && (!connected || d < 199.0));
        let gij = spec.gradient(&qi, &qj, regime).unwrap();
        let gji = spec.gradient(&qj, &qi, regime).unwrap();
        prop_assert_eq!(&gij, &(-&gji));
        let dir = (&qi - &qj) / d;
        prop_assert!((&gij - &dir * gij.dot(&dir)).norm() <= 1e-12 * (1.0 + gij.norm()));
    }

    #[test]
    fn smooth_sign_stays_in_range(x in vec3(), slope in 1.0..1e4f64) {
        for mode in [SignMode::Exact, SignMode::Tanh { slope }] {
            let s = sgn_smooth(&x, mode);
            for (si, xi) in s.iter().zip(x.iter()) {
                prop_assert!(si.abs() <= 1.0);
                prop_assert!(si * xi >= 0.0);
            }
        }
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 3), 0..20)) {
        let table = Table { header: vec!["t".into(), "a".into(), "b".into()], rows };
        let back: Table = table.to_csv().parse().unwrap();
        prop_assert_eq!(&back.header, &table.header);
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (r, s) in back.rows.iter().zip(&table.rows) {
            for (x, y) in r.iter().zip(s) {
                prop_assert!((x - y).abs() <= 1e-8 * y.abs());
            }
        }
    }
}
