use std::sync::Arc;

use faer::Mat;

use super::*;
use crate::c64;
use crate::error::Error;
use crate::opcore::{linalg, Tolerances};
use crate::scenarios::{bump, scalar_path};
use crate::specflow::linspace;

fn tanh_path(sign: f64) -> PotentialPath {
    scalar_path(linspace(-8.0, 8.0, 161), move |t| sign * t.tanh()).unwrap().with_compact_set(&[(-1.0, 1.0)]).unwrap()
}

fn grid() -> GridSpec {
    GridSpec::with_spacing(8.0, 0.05).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn tanh_has_index_one() {
    let path = tanh_path(1.0);
    let rep = solve_index(&path, grid(), 1.0, &IndexOptions::default()).unwrap();
    assert_eq!((rep.index, rep.dim_ker, rep.dim_coker), (1, 1, 0));
    assert_eq!(rep.refined, Some((1, 0)));
    let oracle = kernel_oracle_diagonal(&path, &grid()).unwrap();
    assert_eq!((oracle.dim_ker, oracle.dim_coker), (1, 0));
}

#[test]
fn negative_tanh_has_index_minus_one() {
    let rep = solve_index(&tanh_path(-1.0), grid(), 1.0, &IndexOptions::default()).unwrap();
    assert_eq!((rep.index, rep.dim_ker, rep.dim_coker), (-1, 0, 1));
}

#[test]
fn opposite_diagonal_has_balanced_kernel() {
    let path = PotentialPath::diagonal(linspace(-8.0, 8.0, 161), vec![Arc::new(f64::tanh), Arc::new(|t: f64| -t.tanh())])
        .unwrap()
        .with_compact_set(&[(-1.0, 1.0)])
        .unwrap();
    let rep = solve_index(&path, grid(), 1.0, &IndexOptions::default()).unwrap();
    assert_eq!((rep.index, rep.dim_ker, rep.dim_coker), (0, 1, 1));
    let oracle = kernel_oracle_diagonal(&path, &grid()).unwrap();
    assert_eq!((oracle.dim_ker, oracle.dim_coker), (1, 1));
}

#[test]
fn tanh_kernel_matches_sech_and_converges() {
    let path = tanh_path(1.0);
    let err = |g: GridSpec| {
        let op = assemble(&path, g, BoundaryCondition::Aps, 1.0, &tol()).unwrap();
        let kv = kernel_vectors(&op, &tol()).unwrap();
        assert_eq!(kv.len(), 1);
        let vals: Vec<c64> = (0..kv[0].nrows()).map(|i| kv[0][(i, 0)]).collect();
        profile_error(&vals, &g.nodes(), |t| 1.0 / t.cosh())
    };
    let coarse = err(grid());
    let fine = err(grid().refined());
    assert!(coarse <= 1e-3, "{coarse}");
    assert!(fine < coarse);
    let ratio = coarse / fine;
    assert!((2.0 / 3.0..=6.0).contains(&ratio), "{ratio}");
}

#[test]
fn invertible_constant_has_trivial_index() {
    let h = crate::opcore::HermitianOperator::from_real_diagonal(&[1.0, -2.0]);
    let path = PotentialPath::constant(&h, linspace(-1.0, 1.0, 3)).unwrap();
    let rep = solve_index(&path, GridSpec::new(20.0, 200).unwrap(), 1.0, &IndexOptions::default()).unwrap();
    assert_eq!((rep.index, rep.dim_ker, rep.dim_coker), (0, 0, 0));
}

#[test]
fn dirichlet_matrix_is_square_without_boundary_nodes() {
    let path = scalar_path(linspace(-1.0, 1.0, 3), |t| t).unwrap();
    let op = assemble(&path, GridSpec::new(1.0, 4).unwrap(), BoundaryCondition::Dirichlet, 1.0, &tol()).unwrap();
    assert_eq!((op.rows(), op.cols()), (3, 3));
    assert_eq!(op.removed_boundary_dims(), 2);
}

#[test]
fn aps_bookkeeping_matches_spectral_flow() {
    let path = tanh_path(1.0);
    let op = assemble(&path, GridSpec::new(8.0, 40).unwrap(), BoundaryCondition::Aps, 1.0, &tol()).unwrap();
    assert_eq!(op.structural_index(), 1);
    assert_eq!(op.removed_boundary_dims(), 0);
}

#[test]
fn doubled_operator_is_odd_with_symmetric_spectrum() {
    let op = assemble(&tanh_path(1.0), GridSpec::new(8.0, 60).unwrap(), BoundaryCondition::Dirichlet, 1.0, &tol()).unwrap();
    let d = DoubledOperator::new(&op).unwrap();
    assert_eq!(d.anticommutator_norm(), 0.0);
    assert!(d.spectrum_symmetry_residual().unwrap() < 1e-10);
}

#[test]
fn reflected_negated_potential_has_same_singular_values() {
    let path = crate::scenarios::random_sf_path(3, 3, 32).unwrap();
    let shifted = path.mapped(|_, m| m).unwrap();
    let p = shifted.with_grid(linspace(0.0, 1.0, 32)).unwrap();
    let reflected = PotentialPath::from_fn(3, linspace(-1.0, 0.0, 32), {
        let p = p.clone();
        move |t| linalg::scale(p.raw(-t).as_ref(), -1.0)
    })
    .unwrap();
    let g = GridSpec::new(2.0, 40).unwrap();
    // Center both on the same symmetric grid.
    let a = assemble(&p, g, BoundaryCondition::Aps, 1.0, &tol()).unwrap();
    let b = assemble(&reflected, g, BoundaryCondition::Aps, 1.0, &tol()).unwrap();
    let sa = linalg::singular_values(a.matrix.as_ref()).unwrap();
    let sb = linalg::singular_values(b.matrix.as_ref()).unwrap();
    assert_eq!(sa.len(), sb.len());
    for (x, y) in sa.iter().zip(&sb) {
        assert!((x - y).abs() < 1e-10 * sa[0], "{x} vs {y}");
    }
}

#[test]
fn non_commuting_family_is_rejected_by_oracle() {
    let path = crate::scenarios::random_sf_path(8, 2, 16).unwrap();
    let err = kernel_oracle_diagonal(&path, &GridSpec::new(2.0, 10).unwrap()).unwrap_err();
    assert!(matches!(err, Error::NotDiagonalizable { .. }));
}

#[test]
fn engineered_gap_allows_unit_coupling() {
    let path = crate::scenarios::unit_gap_path();
    let g = GridSpec::auto(&path, 0.1).unwrap();
    let rep = fredholm_bounds(&path, 1.0, None, g, &tol()).unwrap();
    let c = rep.constants;
    assert!((c.c_hat - 1.0).abs() < 1e-6, "{c:?}");
    assert!((c.delta_hat - 0.4).abs() < 1e-3, "{c:?}");
    assert!(c.unit_coupling && c.lambda0 == 1.0);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn sweep_below_threshold_is_rejected() {
    let path = crate::scenarios::unit_gap_path();
    let g = GridSpec::auto(&path, 0.2).unwrap();
    let err = lambda_sweep(&path, &[0.5], g, &IndexOptions::default()).unwrap_err();
    assert!(matches!(err, Error::HypothesisUnmet(_)));
}

#[test]
fn undersized_cutoff_is_rejected() {
    let path = tanh_path(1.0);
    let cut = Cutoff { amplitude: 0.1, plateau: vec![(-1.0, 1.0)], ramp: 0.5 };
    let lambda0 = fredholm_constants(&path, &grid()).unwrap().lambda0;
    let err = fredholm_bounds(&path, lambda0, Some(cut), GridSpec::new(8.0, 80).unwrap(), &tol()).unwrap_err();
    assert!(matches!(err, Error::CutoffTooSmall { .. }));
}

#[test]
fn bump_inside_k_keeps_index() {
    let path = tanh_path(1.0);
    let r = scalar_path(linspace(-8.0, 8.0, 161), |t| 0.4 * bump(t, -1.0, 1.0)).unwrap();
    let rep = perturbation_invariance(&path, &r, GridSpec::new(8.0, 160).unwrap(), 1.0, &IndexOptions::default()).unwrap();
    assert!(rep.equal);
    let outside = scalar_path(linspace(-8.0, 8.0, 161), |t| bump(t, 2.0, 3.0)).unwrap();
    assert!(perturbation_invariance(&path, &outside, GridSpec::new(8.0, 160).unwrap(), 1.0, &IndexOptions::default()).is_err());
}

#[test]
fn dirichlet_lower_bound_improves_with_refinement() {
    let path = tanh_path(1.0);
    let l0 = fredholm_constants(&path, &grid()).unwrap().lambda0;
    let g = GridSpec::new(8.0, 80).unwrap();
    let a = fredholm_bounds(&path, l0, None, g, &tol()).unwrap();
    let b = fredholm_bounds(&path, l0, None, g.refined(), &tol()).unwrap();
    assert!(a.pass && b.pass, "{a:?} {b:?}");
    assert!(b.deficit <= a.deficit);
    let _ = Mat::<c64>::zeros(0, 0);
}

