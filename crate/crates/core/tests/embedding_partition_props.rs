use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signed_spectra::eigen::{top_eigenpairs, EigenConfig, EigenPair, EigenSet};
use signed_spectra::embedding::{normalize_rows, pairwise_cluster_angles, split_pairs};
use signed_spectra::graph::DirectedSignedGraph;
use signed_spectra::linalg::DenseMatrix;
use signed_spectra::partition::{accuracy, kmeans, signed_modularity, KMeansConfig};

fn complex_set(v: Vec<(f64, f64)>) -> EigenSet<f64> {
    let vector: Vec<Complex<f64>> = v.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
    let norm = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let vector = vector.into_iter().map(|c| c / norm).collect();
    EigenSet {
        pairs: vec![EigenPair { value: Complex::new(0.5, 1.0), vector, residual: 0.0 }],
        conjugates_deduplicated: true,
    }
}

fn projector(m: &DenseMatrix<f64>) -> DenseMatrix<f64> {
    // columns of a split unit vector are not orthonormal; orthonormalise first
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut c = m.col(j).to_vec();
        for q in &cols {
            let d: f64 = c.iter().zip(q).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= n);
        cols.push(c);
    }
    let q = DenseMatrix::from_columns(&cols).unwrap();
    q.matmul(&q.transpose()).unwrap()
}

fn inertia(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut cen = vec![vec![0.0; d]; k];
    let mut cnt = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        cnt[l] += 1;
        cen[l].iter_mut().zip(p).for_each(|(c, x)| *c += x);
    }
    for (c, &n) in cen.iter_mut().zip(&cnt) {
        c.iter_mut().for_each(|x| *x /= n.max(1) as f64);
    }
    points.iter().zip(labels).map(|(p, &l)| p.iter().zip(&cen[l]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sum()
}

proptest! {
    #[test]
    fn split_rows_keep_complex_modulus(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..40)) {
        prop_assume!(v.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
        prop_assume!(v.iter().any(|&(_, b)| b.abs() > 1e-3));
        let set = complex_set(v);
        let e = split_pairs(&set, &[0]).unwrap();
        prop_assert_eq!(e.d(), 2);
        for u in 0..e.n() {
            let r = e.row(u);
            let split = (r[0] * r[0] + r[1] * r[1]).sqrt();
            prop_assert!((split - set.pairs[0].vector[u].norm()).abs() <= 1e-12);
        }
        let fro = e.coords.frobenius_norm();
        prop_assert!((fro - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn conjugate_spans_the_same_plane(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..30)) {
        let set = complex_set(v);
        let a = split_pairs(&set, &[0]).unwrap();
        // a rank-deficient split has no well-defined plane to compare
        let re: f64 = a.coords.col(0).iter().map(|x| x * x).sum();
        let im: f64 = a.coords.col(1).iter().map(|x| x * x).sum();
        let cross: f64 = a.coords.col(0).iter().zip(a.coords.col(1)).map(|(x, y)| x * y).sum();
        prop_assume!(re * im - cross * cross > 1e-6);
        let mut conj = set.clone();
        conj.pairs[0].value = conj.pairs[0].value.conj();
        conj.pairs[0].vector.iter_mut().for_each(|c| *c = c.conj());
        let b = split_pairs(&conj, &[0]).unwrap();
        let diff = projector(&a.coords).add(&projector(&b.coords).scaled(-1.0)).unwrap().max_abs();
        prop_assert!(diff <= 1e-10);
    }

    #[test]
    fn normalized_rows_are_unit_or_zero(m in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 1..30)) {
        let coords = DenseMatrix::from_rows(&m).unwrap();
        let e = signed_spectra::embedding::SpectralEmbedding { coords, column_origin: vec![], zero_rows: vec![] };
        let nrm = normalize_rows(&e, 1e-12);
        for u in 0..nrm.n() {
            let len = nrm.row(u).iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm.zero_rows.contains(&u) {
                prop_assert_eq!(len, 0.0);
            } else {
                prop_assert!((len - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn accuracy_ignores_label_names(labels in proptest::collection::vec(0usize..5, 1..60), truth_seed in 0u64..1000, perm_seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(truth_seed);
        let truth: Vec<usize> = labels.iter().map(|_| rng.random_range(0..4)).collect();
        let mut perm: Vec<usize> = (0..5).collect();
        let mut prng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..5).rev() {
            perm.swap(i, prng.random_range(0..=i));
        }
        let renamed: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
        prop_assert_eq!(accuracy(&labels, &truth).unwrap(), accuracy(&renamed, &truth).unwrap());
        prop_assert_eq!(accuracy(&truth, &truth).unwrap(), 1.0);
    }

    #[test]
    fn kmeans_inertia_never_increases(seed in 0u64..1000, n in 6usize..60, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]).collect();
        let r = kmeans(&DenseMatrix::from_rows(&pts).unwrap(), &KMeansConfig::new(k, seed)).unwrap();
        for w in r.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", r.inertia_history);
        }
        prop_assert!((inertia(&pts, &r.labels, k) - r.inertia).abs() <= 1e-9);
    }
}

#[test]
fn kmeans_finds_the_best_assignment_on_separated_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centers = [[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]];
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for (c, cen) in centers.iter().enumerate() {
        for _ in 0..10 {
            // Box-Muller normal noise
            let (a, b): (f64, f64) = (rng.random::<f64>().max(1e-12), rng.random());
            let r = (-2.0 * a.ln()).sqrt() * 0.5;
            let t = std::f64::consts::TAU * b;
            pts.push(vec![cen[0] + r * t.cos(), cen[1] + r * t.sin()]);
            truth.push(c);
        }
    }
    let fit = kmeans(&DenseMatrix::from_rows(&pts).unwrap(), &KMeansConfig::new(3, 0)).unwrap();
    assert_eq!(accuracy(&fit.labels, &truth).unwrap(), 1.0);
    // local-search certificate: no single-point move lowers the inertia
    let base = inertia(&pts, &fit.labels, 3);
    for i in 0..pts.len() {
        for c in 0..3 {
            let mut moved = fit.labels.clone();
            moved[i] = c;
            assert!(inertia(&pts, &moved, 3) >= base - 1e-12);
        }
    }
}

#[test]
fn correct_split_maximises_modularity_on_two_positive_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 4..=10usize {
        let half = n / 2;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                let same = (u < half) == (v < half);
                if u != v && same && (v == (u + 1) % n || v + 1 == u || rng.random::<f64>() < 0.5) {
                    edges.push((u, v, 1));
                }
            }
        }
        let g = DirectedSignedGraph::from_edges(n, &edges).unwrap();
        let correct: Vec<usize> = (0..n).map(|u| usize::from(u >= half)).collect();
        let q_correct: f64 = signed_modularity(&g, &correct).unwrap();
        for mask in 1..(1u32 << n) - 1 {
            let labels: Vec<usize> = (0..n).map(|u| ((mask >> u) & 1) as usize).collect();
            let q: f64 = signed_modularity(&g, &labels).unwrap();
            assert!(q <= q_correct + 1e-12, "n={n} mask={mask:b}: {q} > {q_correct}");
        }
    }
}

#[test]
fn block_graph_rows_point_along_one_axis() {
    let mut edges = Vec::new();
    let sizes = [6usize, 9, 12];
    let mut truth = Vec::new();
    let mut off = 0;
    for (b, &s) in sizes.iter().enumerate() {
        // complete blocks: Perron values s - 1 are distinct, the rest sit at -1
        for u in 0..s {
            for v in (0..s).filter(|&v| v != u) {
                edges.push((off + u, off + v, 1));
            }
        }
        truth.extend(std::iter::repeat_n(b, s));
        off += s;
    }
    let g = DirectedSignedGraph::from_edges(off, &edges).unwrap();
    let set = top_eigenpairs(&g, &EigenConfig::<f64>::new(3, 0)).unwrap();
    let e = normalize_rows(&split_pairs(&set, &[0, 1, 2]).unwrap(), 1e-12);
    let mut axis_of_block = vec![None; 3];
    for u in 0..off {
        let r = e.row(u);
        let axis = (0..3).find(|&j| (r[j].abs() - 1.0).abs() <= 1e-8).expect("one unit coordinate");
        assert!(r.iter().enumerate().all(|(j, x)| j == axis || x.abs() <= 1e-8));
        let slot = &mut axis_of_block[truth[u]];
        assert_eq!(*slot.get_or_insert(axis), axis);
    }
    let angles = pairwise_cluster_angles(&e, &truth).unwrap();
    assert!((angles.average.unwrap() - 90.0).abs() <= 1e-8);
}
