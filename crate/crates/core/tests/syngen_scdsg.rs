use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signed_spectra::eigen::{top_eigenpairs, EigenConfig};
use signed_spectra::graph::DirectedSignedGraph;
use signed_spectra::partition::accuracy;
use signed_spectra::scdsg::{evaluate_candidate, run_scdsg, run_scdsg_with_eigs, ScdsgConfig, ScdsgError};
use signed_spectra::syngen::{
    builtin_spec, builtin_specs, generate, inter_positive_moments, intra_positive_moments, EdgeSampling, SynSpec,
};

fn counts(g: &DirectedSignedGraph, truth: &[usize]) -> (usize, usize, usize, usize) {
    let (mut ip, mut in_, mut op, mut on) = (0, 0, 0, 0);
    for (u, v, s) in g.edges() {
        match (truth[u] == truth[v], s > 0) {
            (true, true) => ip += 1,
            (true, false) => in_ += 1,
            (false, true) => op += 1,
            (false, false) => on += 1,
        }
    }
    (ip, in_, op, on)
}

fn small_spec(sizes: &[usize], intra: (f64, f64), inter: (f64, f64), seed: u64) -> SynSpec {
    SynSpec {
        block_sizes: sizes.to_vec(),
        intra_pos_density: intra.0,
        intra_neg_density: intra.1,
        inter_pos_density: inter.0,
        inter_neg_density: inter.1,
        seed,
        sampling: EdgeSampling::Bernoulli,
    }
}

#[test]
fn syn1_intra_count_with_uniform_draws_is_near_table_value() {
    let spec = builtin_spec("Syn-1").unwrap().with_sampling(EdgeSampling::UniformDraws);
    let syn = generate(&spec).unwrap();
    let (ip, _, _, _) = counts(&syn.graph, &syn.truth);
    let rel = (ip as f64 - 67_653.0).abs() / 67_653.0;
    assert!(rel <= 0.03, "intra count {ip} is {rel:.4} away from 67653");
}

#[test]
fn counts_stay_within_three_sigma_of_expectation() {
    for name in ["Syn-1", "Syn-5"] {
        for sampling in [EdgeSampling::Bernoulli, EdgeSampling::UniformDraws] {
            let base = builtin_spec(name).unwrap().with_sampling(sampling);
            let (mi, vi) = intra_positive_moments(&base);
            let (mo, vo) = inter_positive_moments(&base);
            for seed in 0..10 {
                let syn = generate(&base.clone().with_seed(seed)).unwrap();
                let (ip, _, op, _) = counts(&syn.graph, &syn.truth);
                assert!((ip as f64 - mi).abs() <= 3.0 * vi.sqrt(), "{name} {sampling:?} seed {seed}: intra {ip} vs {mi}");
                if vo > 0.0 {
                    assert!((op as f64 - mo).abs() <= 3.0 * vo.sqrt(), "{name} {sampling:?} seed {seed}: inter {op} vs {mo}");
                }
            }
        }
    }
}

#[test]
fn truth_partitions_nodes_with_exact_sizes() {
    let spec = builtin_spec("Syn-2").unwrap();
    let syn = generate(&spec).unwrap();
    assert_eq!(syn.truth.len(), 1000);
    for (b, &size) in spec.block_sizes.iter().enumerate() {
        assert_eq!(syn.truth.iter().filter(|&&t| t == b).count(), size);
    }
}

#[test]
fn syn3_inter_edges_are_all_negative() {
    let syn = generate(&builtin_spec("Syn-3").unwrap()).unwrap();
    let (_, _, op, on) = counts(&syn.graph, &syn.truth);
    assert_eq!(op, 0);
    assert!(on > 0);
}

#[test]
fn generation_is_deterministic_per_seed() {
    let spec = small_spec(&[30, 20], (0.3, 0.05), (0.05, 0.05), 9);
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a, b);
    let c = generate(&spec.clone().with_seed(10)).unwrap();
    assert_ne!(a.graph, c.graph);
}

#[test]
fn spec_json_round_trip() {
    let spec = builtin_spec("Syn-8").unwrap().with_seed(4);
    let text = serde_json::to_string(&spec).unwrap();
    let back: SynSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(spec, back);
    assert_eq!(builtin_specs().len(), 9);
}

fn disconnected_blocks(sizes: &[usize], seed: u64) -> (DirectedSignedGraph, Vec<usize>) {
    let syn = generate(&small_spec(sizes, (0.5, 0.0), (0.0, 0.0), seed)).unwrap();
    (syn.graph, syn.truth)
}

#[test]
fn disconnected_blocks_recovered_near_unit_alpha() {
    for seed in 1..4 {
        let (g, truth) = disconnected_blocks(&[24, 22, 20, 18, 16], seed);
        for alpha in [0.95, 1.0] {
            let out = run_scdsg(&g, &ScdsgConfig::<f64>::new(alpha, 0)).unwrap();
            assert_eq!(out.result.k, 5, "seed {seed} alpha {alpha}");
            assert_eq!(accuracy(&out.result.labels, &truth).unwrap(), 1.0, "seed {seed} alpha {alpha}");
        }
    }
}

#[test]
fn low_alpha_ratchets_the_best_score_down() {
    // each acceptance replaces M, so a 0.5 threshold keeps admitting splits
    // that each cost less than half of the previous score
    let (g, _) = disconnected_blocks(&[24, 22, 20, 18, 16], 1);
    let out = run_scdsg(&g, &ScdsgConfig::<f64>::new(0.5, 0)).unwrap();
    assert!(out.result.k > 5);
    assert!(out.result.modularity < out.trace.baseline_modularity.unwrap());
}

#[test]
fn negative_inter_edges_recovered() {
    let syn = generate(&small_spec(&[60, 55, 50, 45, 40], (0.4, 0.0), (0.0, 0.2), 2)).unwrap();
    let out = run_scdsg(&syn.graph, &ScdsgConfig::<f64>::new(1.0, 0)).unwrap();
    assert_eq!(out.result.k, 5);
    assert_eq!(accuracy(&out.result.labels, &syn.truth).unwrap(), 1.0);
}

#[test]
fn single_strong_cluster_stays_whole() {
    // complete digraph: every split scores -s(n-s)/n < 0 per part, so nothing beats the baseline
    let syn = generate(&small_spec(&[20], (1.0, 0.0), (0.0, 0.0), 3)).unwrap();
    let out = run_scdsg(&syn.graph, &ScdsgConfig::<f64>::new(1.0, 0)).unwrap();
    assert_eq!(out.result.k, 1);
    assert!(out.result.labels.iter().all(|&l| l == 0));
}

#[test]
fn trace_follows_the_acceptance_rule() {
    let syn = generate(&builtin_spec("Syn-5").unwrap().with_seed(1)).unwrap();
    for alpha in [1.0, 0.9] {
        let out = run_scdsg(&syn.graph, &ScdsgConfig::<f64>::new(alpha, 1)).unwrap();
        let t = &out.trace;
        assert_eq!(t.candidate_order.len(), t.accepted.len());
        assert_eq!(t.accepted.iter().filter(|&&a| a).count(), t.modularity_path.len());
        let mut best = t.baseline_modularity.unwrap();
        for (score, &acc) in t.candidate_scores.iter().zip(&t.accepted) {
            match score {
                Some(q) if acc => {
                    assert!(*q >= alpha * best);
                    if alpha == 1.0 && best >= 0.0 {
                        assert!(*q >= best);
                    }
                    best = *q;
                }
                Some(q) => assert!(*q < alpha * best),
                None => assert!(!acc),
            }
        }
        assert_eq!(out.result.modularity, best);
        assert_eq!(out.result.k, t.initial_basis.len() + t.modularity_path.len());
    }
}

#[test]
fn identical_inputs_give_identical_results() {
    let syn = generate(&small_spec(&[50, 40, 30], (0.3, 0.05), (0.05, 0.05), 5)).unwrap();
    let cfg = ScdsgConfig::<f64>::new(0.95, 8);
    let a = run_scdsg(&syn.graph, &cfg).unwrap();
    let b = run_scdsg(&syn.graph, &cfg).unwrap();
    assert_eq!(a.result, b.result);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn complex_candidate_adds_two_columns_and_one_cluster() {
    // two positive blocks plus a signed rotation-like block that yields complex pairs
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut edges = Vec::new();
    for (off, s) in [(0usize, 12usize), (12, 10)] {
        for u in 0..s {
            for v in 0..s {
                if u != v && rng.random::<f64>() < 0.6 {
                    edges.push((off + u, off + v, 1));
                }
            }
            edges.push((off + u, off + (u + 1) % s, 1));
        }
    }
    for u in 0..8 {
        edges.push((22 + u, 22 + (u + 1) % 8, if u == 0 { -1 } else { 1 }));
    }
    let g = DirectedSignedGraph::from_edges(30, &edges).unwrap();
    let set = top_eigenpairs(&g, &EigenConfig::<f64>::new(12, 0)).unwrap();
    let basis: Vec<usize> = (0..set.len()).filter(|&i| set.pairs[i].is_real()).take(2).collect();
    let complex = (0..set.len()).find(|&i| !set.pairs[i].is_real()).expect("a complex pair");
    let cfg = ScdsgConfig::<f64>::new(1.0, 0);
    let eval = evaluate_candidate(&g, &set, &basis, Some(complex), &cfg).unwrap();
    assert_eq!(eval.embedding.d(), 4);
    assert_eq!(eval.k, 3);
    let base = evaluate_candidate(&g, &set, &basis, None, &cfg).unwrap();
    assert_eq!(base.k, 2);
    assert!(run_scdsg_with_eigs(&g, set, &cfg).is_ok());
}

#[test]
fn invalid_alpha_rejected() {
    let (g, _) = disconnected_blocks(&[5, 5], 0);
    assert!(matches!(run_scdsg(&g, &ScdsgConfig::<f64>::new(1.5, 0)), Err(ScdsgError::InvalidAlpha(_))));
    let mut cfg = ScdsgConfig::<f64>::new(1.0, 0);
    cfg.tau = 0;
    assert!(matches!(run_scdsg(&g, &cfg), Err(ScdsgError::TauZero)));
}

#[test]
fn single_precision_pipeline_agrees() {
    let (g, truth) = disconnected_blocks(&[30, 25, 20], 7);
    let out = run_scdsg(&g, &ScdsgConfig::<f32>::new(1.0, 0)).unwrap();
    assert_eq!(out.result.k, 3);
    assert_eq!(accuracy(&out.result.labels, &truth).unwrap(), 1.0);
}
