use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signed_spectra::linalg::DenseMatrix;
use signed_spectra::perturb::{
    approx_node_coordinate, approx_perturbed_subspace, build_workspace, classify_regime, first_order_ladder,
    matched_exact_vectors, positivity_exponent, single_edge_rotation, EdgeDirection, PerturbationModel, Regime,
    Rotation, RotationRule,
};

fn model(seed: u64) -> PerturbationModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.random_range(6..=14);
    let b = rng.random_range(6..=14);
    PerturbationModel::random_blocks(&[a, b], 0.35, seed).unwrap()
}

/// Boolean powering: smallest m <= cap with every entry of the 0/1 pattern's m-th power nonzero.
fn pattern_exponent(a: &[Vec<bool>], cap: usize) -> Option<usize> {
    let n = a.len();
    let mut p = a.to_vec();
    for m in 1..=cap {
        if p.iter().all(|r| r.iter().all(|&x| x)) {
            return Some(m);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in (0..n).filter(|&k| p[i][k]) {
                for j in 0..n {
                    next[i][j] |= a[k][j];
                }
            }
        }
        p = next;
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn workspace_is_orthonormal_and_invariant(seed in 0u64..5000) {
        let m = model(seed);
        let w = build_workspace(&m, seed).unwrap();
        let n = m.n();
        let mut cols: Vec<Vec<f64>> = (0..w.x.ncols()).map(|j| w.x.col(j).to_vec()).collect();
        cols.extend((0..w.q.ncols()).map(|j| w.q.col(j).to_vec()));
        let b = DenseMatrix::from_columns(&cols).unwrap();
        let gram = b.transpose().matmul(&b).unwrap().add(&DenseMatrix::identity(n).scaled(-1.0)).unwrap();
        prop_assert!(gram.max_abs() <= 1e-10);
        let ax = m.base.matmul(&w.x).unwrap();
        for (j, &lam) in w.lambdas.iter().enumerate() {
            for i in 0..n {
                prop_assert!((ax[(i, j)] - lam * w.x[(i, j)]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn node_coordinate_matches_subspace_row(seed in 0u64..5000, u_pick in 0usize..1000) {
        let m = model(seed).with_random_inter(0.15, 0.5, seed + 1);
        let w = build_workspace(&m, seed).unwrap();
        let full = approx_perturbed_subspace(&w, &m.inter).unwrap();
        let u = u_pick % m.n();
        let row = approx_node_coordinate(&w, &m.inter, u).unwrap();
        for (j, r) in row.iter().enumerate() {
            prop_assert!((r - full[(u, j)]).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_edge_target_stays_and_resolvent_rule_holds(seed in 0u64..5000, sign in prop_oneof![Just(1i8), Just(-1i8)], back in any::<bool>()) {
        let m = model(seed);
        let (l0, _) = m.block_perron(0).unwrap();
        let (l1, _) = m.block_perron(1).unwrap();
        prop_assume!((l0 - l1).abs() > 1e-6 * l0.max(l1));
        let u = m.block_nodes(0)[seed as usize % m.block_sizes[0]];
        let v = m.block_nodes(1)[(seed as usize / 7) % m.block_sizes[1]];
        let dir = if back { EdgeDirection::Backward } else { EdgeDirection::Forward };
        let r = single_edge_rotation(&m, u, v, sign, dir).unwrap();
        let target = if back { &r.u } else { &r.v };
        prop_assert_eq!(target.verdict, Rotation::Unchanged);
        prop_assert!(r.movers_match(RotationRule::Resolvent));
    }

    #[test]
    fn nonnegative_strong_blocks_are_pfn(seed in 0u64..5000) {
        let m = model(seed);
        let nodes = m.block_nodes(0);
        let s = nodes.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::<f64>::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                if m.base[(nodes[i], nodes[j])] != 0.0 {
                    a[(i, j)] = 0.1 + rng.random::<f64>();
                }
            }
        }
        prop_assert_eq!(classify_regime(&a, None).unwrap().regime, Regime::PFn);
    }

    #[test]
    fn positivity_probe_matches_boolean_powering(seed in 0u64..5000) {
        let m = model(seed);
        let nodes = m.block_nodes(1);
        let s = nodes.len();
        let pattern: Vec<Vec<bool>> = nodes.iter().map(|&i| nodes.iter().map(|&j| m.base[(i, j)] != 0.0).collect()).collect();
        let a = DenseMatrix::from_rows(&pattern.iter().map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).collect::<Vec<_>>()).unwrap();
        let cap = s * s + 1;
        prop_assert_eq!(positivity_exponent(&a, cap), pattern_exponent(&pattern, cap));
    }
}

#[test]
fn single_edge_leaves_source_perron_column_in_place() {
    let m = model(17);
    let w = build_workspace(&m, 0).unwrap();
    let u = m.block_nodes(0)[0];
    let v = m.block_nodes(1)[0];
    let mut e = DenseMatrix::zeros(m.n(), m.n());
    e[(u, v)] = 1.0;
    // E x_1 = 0 since x_1 vanishes on the target block
    let approx = approx_perturbed_subspace(&w, &e.scaled(0.01)).unwrap();
    assert_eq!(approx.col(0), w.x.col(0));
    let (exact, _) = matched_exact_vectors(&w, &m.base.add(&e.scaled(0.01)).unwrap()).unwrap();
    for i in 0..m.n() {
        assert!((exact[(i, 0)] - w.x[(i, 0)]).abs() <= 1e-10);
    }
    // A + eps E is block triangular, so (lambda_2 - A) r = E x_2 holds exactly for the
    // perturbed vector x_2 + eps r and the first-order span has no remainder
    let steps = first_order_ladder(&m, &w, &e, &[0.2, 0.02]).unwrap();
    for s in &steps {
        assert!(s.subspace_residual <= 1e-12, "{}", s.subspace_residual);
    }
}

#[test]
fn colliding_perron_values_still_scale_quadratically() {
    // equal-size complete blocks with Perron values 4 and 4.04: cross coupling
    // mixes the two vectors strongly, while the span still moves at second order
    let n = 5;
    let mut base = DenseMatrix::<f64>::zeros(2 * n, 2 * n);
    for b in 0..2 {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    base[(b * n + i, b * n + j)] = 1.0 + 0.01 * b as f64;
                }
            }
        }
    }
    let cluster: Vec<usize> = (0..2 * n).map(|i| i / n).collect();
    let mut inter = DenseMatrix::zeros(2 * n, 2 * n);
    inter[(0, n)] = 1.0;
    inter[(n + 1, 2)] = -1.0;
    let m = PerturbationModel::new(base, DenseMatrix::zeros(2 * n, 2 * n), inter, cluster).unwrap();
    let w = build_workspace(&m, 0).unwrap();
    let steps = first_order_ladder(&m, &w, &m.inter, &[0.02, 0.01, 0.005]).unwrap();
    for pair in steps.windows(2) {
        let ratio = pair[0].subspace_residual / pair[1].subspace_residual;
        assert!((2.5..=6.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn eventually_positive_with_negative_entry() {
    // all-ones matrix with one entry pulled negative: the square is still positive
    let mut rows = vec![vec![1.0f64; 4]; 4];
    rows[0][1] = -0.5;
    let a = DenseMatrix::from_rows(&rows).unwrap();
    let r = classify_regime(&a, None).unwrap();
    assert_eq!(r.regime, Regime::PFn);
    assert_eq!(r.positivity_exponent, Some(2));
}
