use std::sync::Arc;

use faer::{c64, Mat};
use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::scenarios::{random_sf_path, scalar_path};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn linear_scalar_path_has_flow_one() {
    let path = scalar_path(linspace(0.0, 1.0, 11), |t| 2.0 * t - 1.0).unwrap();
    let id = endpoint_identity(&path, &tol()).unwrap();
    assert_eq!((id.crossings, id.partition, id.relative_index, id.trivialising), (1, 1, 1, 1));
    let rep = sf_crossings(&path, &CrossingOptions::default()).unwrap();
    assert_eq!(rep.crossings.len(), 1);
    assert!((rep.crossings[0].t - 0.5).abs() < 1e-10);
}

#[test]
fn opposite_diagonal_branches_cancel() {
    let path = PotentialPath::diagonal(
        linspace(0.0, 1.0, 17),
        vec![Arc::new(|t: f64| 2.0 * t - 1.0), Arc::new(|t: f64| 1.0 - 2.0 * t)],
    )
    .unwrap();
    let rep = sf_crossings(&path, &CrossingOptions::default()).unwrap();
    assert_eq!(rep.flow, 0);
    assert_eq!(rep.crossings.len(), 2);
    assert_eq!(endpoint_relative_index(&path, &tol()).unwrap(), 0);
}

#[test]
fn constant_path_has_no_flow() {
    let h = HermitianOperator::from_real_diagonal(&[1.0, -2.0, 3.0]);
    let path = PotentialPath::constant(&h, linspace(0.0, 1.0, 5)).unwrap();
    let id = endpoint_identity(&path, &tol()).unwrap();
    assert!(id.holds);
    assert_eq!(id.crossings, 0);
}

#[test]
fn singular_endpoint_is_rejected() {
    let path = scalar_path(linspace(0.0, 1.0, 5), |t| t).unwrap();
    assert!(matches!(sf_crossings(&path, &CrossingOptions::default()), Err(Error::NotInvertible { .. })));
}

#[test]
fn rotating_degenerate_pair_is_resolved() {
    // Two branches swap through an avoided crossing while one of them changes sign.
    let path = PotentialPath::from_fn(2, linspace(0.0, 1.0, 9), |t| {
        let a = 2.0 * t - 1.0;
        let (c, s) = ((3.0 * t).cos(), (3.0 * t).sin());
        let d = [a, 0.5];
        Mat::from_fn(2, 2, |i, j| {
            let u = [[c, -s], [s, c]];
            c64::new(u[i][0] * d[0] * u[j][0] + u[i][1] * d[1] * u[j][1], 0.0)
        })
    })
    .unwrap();
    assert_eq!(sf_crossings(&path, &CrossingOptions::default()).unwrap().flow, 1);
}

#[test]
fn gap_shift_examples() {
    let h = HermitianOperator::from_real_diagonal(&[-1.0, 0.05, 1.0]);
    let b = make_trivialising_gapshift(&h, 0.2).unwrap();
    let shifted = h.try_add(&b).unwrap().eigenvalues().unwrap();
    assert!(shifted.iter().all(|v| v.abs() >= 0.1));
    let bad = HermitianOperator::from_real_diagonal(&[-0.15]);
    assert!(matches!(make_trivialising_gapshift(&bad, 0.2), Err(Error::ShiftFailure(_))));
}

#[test]
fn endpoint_family_keeps_path_invertible() {
    let path = random_sf_path(11, 4, 64).unwrap();
    let fam = make_trivialising_endpoint(&path, &tol()).unwrap();
    assert!(fam.verify(&path, &tol()).unwrap() >= 0.2 - 1e-12);
}

#[test]
fn partition_levels_avoid_spectrum() {
    let path = random_sf_path(5, 3, 64).unwrap();
    let pf = sf_partition(&path, &PartitionOptions::default()).unwrap();
    assert_eq!(pf.levels.len() + 1, pf.partition.len());
    for (w, &a) in pf.partition.windows(2).zip(&pf.levels) {
        for t in linspace(w[0], w[1], 9) {
            let d = path.sample(t).unwrap().eigenvalues().unwrap().iter().fold(f64::INFINITY, |m, v| m.min((v - a).abs()));
            assert!(d > 0.0);
        }
    }
}

#[test]
fn reversal_negates_flow() {
    let path = random_sf_path(21, 5, 64).unwrap();
    let f = sf_crossings(&path, &CrossingOptions::default()).unwrap().flow;
    let r = sf_crossings(&path.reversed().unwrap(), &CrossingOptions::default()).unwrap().flow;
    assert_eq!(f, -r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn all_flow_computations_agree(seed in any::<u64>(), k in 1usize..7) {
        let path = random_sf_path(seed, k, 64).unwrap();
        let id = endpoint_identity(&path, &tol()).unwrap();
        prop_assert!(id.holds, "{:?}", id);
    }

    #[test]
    fn concatenation_adds(s1 in any::<u64>(), s2 in any::<u64>(), k in 1usize..5) {
        let a = random_sf_path(s1, k, 32).unwrap();
        let b = random_sf_path(s2, k, 32).unwrap();
        // Join a and b through the straight segment between a(1) and b(0).
        let a1 = a.sample(1.0).unwrap().into_matrix();
        let b0 = b.sample(0.0).unwrap().into_matrix();
        let (ac, bc) = (a.clone(), b.clone());
        let joined = PotentialPath::from_fn(k, linspace(0.0, 3.0, 96), move |t| {
            if t <= 1.0 {
                ac.raw(t)
            } else if t <= 2.0 {
                let s = t - 1.0;
                Mat::from_fn(k, k, |i, j| a1[(i, j)] * (1.0 - s) + b0[(i, j)] * s)
            } else {
                bc.raw(t - 2.0)
            }
        }).unwrap();
        let bridge = PotentialPath::from_fn(k, linspace(0.0, 1.0, 64), {
            let (x, y) = (a.sample(1.0).unwrap().into_matrix(), b.sample(0.0).unwrap().into_matrix());
            move |s| Mat::from_fn(k, k, |i, j| x[(i, j)] * (1.0 - s) + y[(i, j)] * s)
        }).unwrap();
        let opts = CrossingOptions::default();
        let total = sf_crossings(&joined, &opts);
        let parts = (sf_crossings(&a, &opts), sf_crossings(&bridge, &opts), sf_crossings(&b, &opts));
        if let (Ok(t), (Ok(x), Ok(y), Ok(z))) = (total, parts) {
            prop_assert_eq!(t.flow, x.flow + y.flow + z.flow);
        }
    }
}
