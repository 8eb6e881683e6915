use faer::{c64, Mat};
use proptest::prelude::*;

use super::*;
use crate::testutil::{arb_hermitian, random_hermitian_seeded};

fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

#[test]
fn eigh_of_diagonal_is_sorted() {
    let h = HermitianOperator::from_real_diagonal(&[3.0, 1.0, 2.0]);
    let eig = h.eigh().unwrap();
    assert_eq!(eig.values.len(), 3);
    for (v, want) in eig.values.iter().zip([1.0, 2.0, 3.0]) {
        assert!((v - want).abs() < 1e-14);
    }
}

#[test]
fn pauli_x_projection_and_transform() {
    let x = HermitianOperator::new(Mat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })).unwrap();
    let p = positive_projection(&x, 1e-8).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((p.entries()[(i, j)] - c(0.5, 0.0)).norm() < 1e-14);
        }
    }
    let f = bounded_transform(&x).unwrap();
    let s = 1.0 / 2f64.sqrt();
    assert!((f.entries()[(0, 1)] - c(s, 0.0)).norm() < 1e-14);
    assert!(f.entries()[(0, 0)].norm() < 1e-14);
}

#[test]
fn quadrature_of_identity() {
    let q = inv_sqrt_via_quadrature(&HermitianOperator::identity(2), 64).unwrap();
    let want = 1.0 / 2f64.sqrt();
    assert!((q.value.entries()[(0, 0)].re - want).abs() < 1e-12);
    assert!(q.error < 1e-12);
}

#[test]
fn quadrature_rejects_too_few_nodes() {
    assert!(matches!(inv_sqrt_via_quadrature(&HermitianOperator::identity(2), 4), Err(crate::Error::InvalidInput(_))));
}

#[test]
fn null_space_with_clear_gap() {
    let m = linalg::real_diagonal(&[1.0, 1e-14, 2.0]);
    let ns = null_space(m.as_ref(), &Tolerances::default()).unwrap();
    assert_eq!(ns.dim, 1);
    assert!(ns.decision.gap_ratio >= 1e12);
    assert!(ns.basis[(1, 0)].norm() > 1.0 - 1e-12);
}

#[test]
fn null_space_of_wide_matrix_includes_structural_kernel() {
    let m = Mat::from_fn(2, 4, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let ns = null_space(m.as_ref(), &Tolerances::default()).unwrap();
    assert_eq!(ns.dim, 2);
    assert_eq!(ns.structural, 2);
}

#[test]
fn null_space_of_zero_matrix_is_everything() {
    let ns = null_space(linalg::zeros(3, 3).as_ref(), &Tolerances::default()).unwrap();
    assert_eq!(ns.dim, 3);
}

#[test]
fn ambiguous_rank_is_reported() {
    let sv = [1.0, 1.1e-6, 0.9e-6, 0.5e-6];
    match decide_rank(&sv, &Tolerances::default()) {
        Err(crate::Error::AmbiguousRank { candidates, .. }) => assert_eq!(candidates.1, 4),
        other => panic!("expected ambiguity, got {other:?}"),
    }
}

#[test]
fn non_finite_input_is_rejected() {
    let m = Mat::from_fn(2, 2, |_, _| c(f64::NAN, 0.0));
    assert!(matches!(HermitianOperator::new(m), Err(crate::Error::InvalidInput(_))));
}

#[test]
fn near_hermitian_input_is_symmetrized() {
    let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0 + 1e-9, 0.0) } else if i == 1 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let h = HermitianOperator::new(m).unwrap();
    assert!(h.input_residual() > 1e-10);
    assert_eq!(h.hermitian_residual(), 0.0);
}

#[test]
fn tower_template_sections_nest() {
    let tower = TruncationTower::from_templates(vec![2, 4], Template::Alternating { scale: 1.0 }, Template::Zero).unwrap();
    let inst = tower.instantiate(4).unwrap();
    let d: Vec<f64> = (0..4).map(|i| inst.operator.entries()[(i, i)].re).collect();
    assert_eq!(d, vec![1.0, -1.0, 2.0, -2.0]);
}

struct Inconsistent;
impl TowerGenerator for Inconsistent {
    fn operator(&self, n: usize) -> crate::Result<HermitianOperator> {
        Ok(HermitianOperator::scalar(n, n as f64))
    }
    fn perturbation(&self, n: usize) -> crate::Result<HermitianOperator> {
        Ok(HermitianOperator::zeros(n))
    }
}

#[test]
fn non_nested_generator_is_rejected() {
    let tower = TruncationTower::new(vec![2, 3], std::sync::Arc::new(Inconsistent)).unwrap();
    assert!(matches!(tower.instantiate(3), Err(crate::Error::GeneratorError(_))));
}

#[test]
fn tower_dims_must_increase() {
    assert!(TruncationTower::from_templates(vec![4, 4], Template::Zero, Template::Zero).is_err());
}

#[test]
fn quadrature_matches_spectral_formula_at_128_nodes() {
    for seed in 0..20 {
        let h = random_hermitian_seeded(seed, 8, 5.0);
        let q = inv_sqrt_via_quadrature(&h, 128).unwrap();
        assert!(q.error <= 1e-8, "seed {seed}: {}", q.error);
    }
}

#[test]
fn quadrature_error_does_not_grow_with_nodes() {
    let h = random_hermitian_seeded(7, 6, 4.0);
    let mut prev = f64::INFINITY;
    for n in [16, 32, 64, 128] {
        let e = inv_sqrt_via_quadrature(&h, n).unwrap().error;
        assert!(e <= 2.0 * prev.max(1e-14), "n = {n}: {e} after {prev}");
        prev = e;
    }
}

#[test]
fn function_undefined_on_spectrum() {
    let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
    assert!(matches!(apply_function(&h, |x| 1.0 / x), Err(crate::Error::DomainError(_))));
    let sq = apply_function(&HermitianOperator::from_real_diagonal(&[1.0, -2.0]), |x| x * x).unwrap();
    assert!((sq.entries()[(1, 1)].re - 4.0).abs() < 1e-14);
}

#[test]
fn banded_template_nests() {
    let t = Template::Banded { diag: 0.0, off: 1.0 };
    let a = t.compress(3).unwrap();
    let b = t.compress(5).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(a.entries()[(i, j)], b.entries()[(i, j)]);
        }
    }
    let r = Template::BasisProjection { index: 0 };
    for n in [1, 4, 9] {
        assert!((r.compress(n).unwrap().spectral_norm().unwrap() - 1.0).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs(h in arb_hermitian(1..10, 10.0)) {
        let eig = h.eigh().unwrap();
        let back = eig.reconstruct(|x| x);
        let scale = h.spectral_norm().unwrap().max(1.0);
        prop_assert!(linalg::max_abs_diff(back.entries(), h.entries()) <= 1e-10 * scale);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = eig.vectors.adjoint() * &eig.vectors;
        prop_assert!(linalg::max_abs_diff(gram.as_ref(), linalg::identity(h.dim()).as_ref()) <= 1e-12);
    }

    #[test]
    fn stored_operator_is_hermitian(h in arb_hermitian(1..10, 10.0)) {
        prop_assert!(h.hermitian_residual() <= 1e-12);
    }

    #[test]
    fn positive_projection_is_projection(h in arb_hermitian(1..10, 10.0)) {
        if h.min_abs_eigenvalue().unwrap() > 1e-6 {
            let p = positive_projection(&h, 1e-8).unwrap();
            let eig = h.eigh().unwrap();
            prop_assert_eq!(p.rank(), eig.count_positive());
            prop_assert!((p.trace() - p.rank() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_calculus_matches_matrix_arithmetic(h in arb_hermitian(1..17, 3.0)) {
        let p = |x: f64| 2.0 * x * x * x - x + 0.5;
        let via_eig = apply_function(&h, p).unwrap();
        let m = h.entries();
        let m3 = m * m * m;
        let direct = Mat::from_fn(h.dim(), h.dim(), |i, j| {
            let id = if i == j { 0.5 } else { 0.0 };
            m3[(i, j)] * 2.0 - m[(i, j)] + c64::new(id, 0.0)
        });
        let norm = h.spectral_norm().unwrap();
        prop_assert!(linalg::max_abs_diff(via_eig.entries(), direct.as_ref()) <= 1e-9 * (1.0 + norm).powi(3));
    }

    #[test]
    fn bounded_transform_preserves_signs(h in arb_hermitian(1..10, 5.0)) {
        let a = h.eigenvalues().unwrap();
        let b = bounded_transform(&h).unwrap().eigenvalues().unwrap();
        for (x, y) in a.iter().zip(&b) {
            if x.abs() > 1e-9 {
                prop_assert_eq!(x.signum(), y.signum());
            }
        }
        let f2 = bounded_transform(&h).unwrap();
        let lhs = f2.entries() * f2.entries();
        let rhs = apply_function(&h, |x| x * x / (1.0 + x * x)).unwrap();
        prop_assert!(linalg::max_abs_diff(lhs.as_ref(), rhs.entries()) <= 1e-10);
    }

    #[test]
    fn positive_projections_of_h_and_minus_h_sum_to_one(h in arb_hermitian(1..10, 5.0)) {
        if h.min_abs_eigenvalue().unwrap() > 1e-6 {
            let p = positive_projection(&h, 1e-8).unwrap();
            let q = positive_projection(&h.scaled(-1.0), 1e-8).unwrap();
            let sum = &p.entries().to_owned() + &q.entries().to_owned();
            prop_assert!(linalg::max_abs_diff(sum.as_ref(), linalg::identity(h.dim()).as_ref()) <= 1e-10);
        }
    }

    #[test]
    fn bounded_transform_is_a_contraction(h in arb_hermitian(1..10, 50.0)) {
        let f = bounded_transform(&h).unwrap();
        prop_assert!(f.spectral_norm().unwrap() < 1.0);
    }

    #[test]
    fn null_space_vectors_are_annihilated(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let h = random_hermitian_seeded(seed, rows.max(cols), 1.0);
        // Rank deficient by construction: drop one column's worth of range.
        let m = Mat::from_fn(rows, cols, |i, j| if j + 1 == cols { h.entries()[(i, 0)] } else { h.entries()[(i, j)] });
        let m = Mat::from_fn(rows, cols, |i, j| if j + 1 == cols && cols > 1 { m[(i, 0)] } else { m[(i, j)] });
        if let Ok(ns) = null_space(m.as_ref(), &Tolerances::default()) {
            let smax = ns.singular_values.first().copied().unwrap_or(0.0).max(1.0);
            prop_assert!(linalg::frobenius((&m * &ns.basis).as_ref()) <= 1e-8 * smax);
            let adj = linalg::adjoint(m.as_ref());
            let ns_adj = null_space(adj.as_ref(), &Tolerances::default()).unwrap();
            for (a, b) in ns.singular_values.iter().zip(&ns_adj.singular_values) {
                prop_assert!((a - b).abs() <= 1e-12 * smax);
            }
        }
    }
}
