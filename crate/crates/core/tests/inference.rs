use hb_core::inference::{
    expected_yield, posterior, posterior_with_order, strength_of_influence, BayesNet, InferenceError,
};
use hb_core::model::{BinScheme, Cpt, Dag, EvidenceSet, VariableCatalog, VariableKind, VariableSpec};
use hb_core::synthetic::{random_cpts, random_network, unit_catalog, RandomNetConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// P(query | evidence) by summing the full joint; `None` if P(evidence) = 0.
fn enumerate(net: &BayesNet, evidence: &EvidenceSet, query: &str) -> Option<Vec<f64>> {
    let cat = net.catalog();
    let cards = cat.cardinalities();
    let n = cards.len();
    let q = cat.index_of(query).unwrap();
    let ev: Vec<Option<usize>> = (0..n).map(|i| evidence.get(&cat.get(i).name)).collect();
    let mut out = vec![0.0; cards[q]];
    let mut x = vec![0usize; n];
    loop {
        if (0..n).all(|i| ev[i].is_none_or(|b| b == x[i])) {
            let mut p = 1.0;
            for i in 0..n {
                let cpt = net.cpt(&cat.get(i).name).unwrap();
                let states: Vec<usize> = cpt
                    .parents()
                    .iter()
                    .map(|name| x[cat.index_of(name).unwrap()])
                    .collect();
                p *= cpt.prob(&states, x[i]);
            }
            out[x[q]] += p;
        }
        let mut k = n;
        loop {
            if k == 0 {
                let z: f64 = out.iter().sum();
                return (z > 0.0).then(|| out.iter().map(|v| v / z).collect());
            }
            k -= 1;
            x[k] += 1;
            if x[k] < cards[k] {
                break;
            }
            x[k] = 0;
        }
    }
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_evidence(rng: &mut ChaCha8Rng, net: &BayesNet, query: usize) -> EvidenceSet {
    let cat = net.catalog();
    let mut pairs = Vec::new();
    for i in 0..cat.len() {
        if i != query && rng.random_bool(0.5) {
            let b = rng.random_range(0..cat.get(i).bins.bin_count());
            pairs.push((cat.get(i).name.clone(), b));
        }
    }
    EvidenceSet::new(cat, pairs).unwrap()
}

fn chain() -> BayesNet {
    let catalog = unit_catalog(&[2, 3, 2]);
    let dag = Dag::with_edges(["V0", "V1", "V2"], [("V0", "V1"), ("V1", "V2")]).unwrap();
    let cpts = vec![
        Cpt::new("V0", vec![], vec![], 2, vec![vec![0.35, 0.65]]).unwrap(),
        Cpt::new(
            "V1",
            vec!["V0".into()],
            vec![2],
            3,
            vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.25, 0.25]],
        )
        .unwrap(),
        Cpt::new(
            "V2",
            vec!["V1".into()],
            vec![3],
            2,
            vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.05, 0.95]],
        )
        .unwrap(),
    ];
    BayesNet::new(catalog, dag, cpts).unwrap()
}

#[test]
fn root_marginal_is_prior_row() {
    let net = chain();
    let p = posterior(&net, &EvidenceSet::empty(), "V0").unwrap();
    assert_eq!(p.variable, "V0");
    assert!(max_abs(&p.probs, &[0.35, 0.65]) < 1e-15);
}

#[test]
fn observed_parents_give_cpt_row() {
    let net = chain();
    let ev = EvidenceSet::new(net.catalog(), [("V0".to_string(), 1)]).unwrap();
    let p = posterior(&net, &ev, "V1").unwrap();
    assert!(max_abs(&p.probs, &[0.5, 0.25, 0.25]) < 1e-15);
}

#[test]
fn chain_matches_enumeration() {
    let net = chain();
    let ev = EvidenceSet::new(net.catalog(), [("V0".to_string(), 0)]).unwrap();
    let p = posterior(&net, &ev, "V2").unwrap();
    // hand oracle: sum_b P(b|a=0) P(c|b)
    let expect0 = 0.1 * 0.9 + 0.6 * 0.4 + 0.3 * 0.05;
    assert!(max_abs(&p.probs, &[expect0, 1.0 - expect0]) < 1e-12);
    assert!(max_abs(&p.probs, &enumerate(&net, &ev, "V2").unwrap()) < 1e-12);

    // diagnostic direction
    let ev = EvidenceSet::new(net.catalog(), [("V2".to_string(), 1)]).unwrap();
    let p = posterior(&net, &ev, "V0").unwrap();
    assert!(max_abs(&p.probs, &enumerate(&net, &ev, "V0").unwrap()) < 1e-12);
}

#[test]
fn query_errors() {
    let net = chain();
    assert!(matches!(
        posterior(&net, &EvidenceSet::empty(), "nope"),
        Err(InferenceError::UnknownVariable(_))
    ));
    let ev = EvidenceSet::new(net.catalog(), [("V1".to_string(), 0)]).unwrap();
    assert!(matches!(
        posterior(&net, &ev, "V1"),
        Err(InferenceError::QueryObserved(_))
    ));
}

#[test]
fn zero_probability_evidence_is_impossible() {
    let catalog = unit_catalog(&[2, 2]);
    let dag = Dag::with_edges(["V0", "V1"], [("V0", "V1")]).unwrap();
    let cpts = vec![
        Cpt::new("V0", vec![], vec![], 2, vec![vec![1.0, 0.0]]).unwrap(),
        Cpt::new("V1", vec!["V0".into()], vec![2], 2, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
    ];
    let net = BayesNet::new(catalog, dag, cpts).unwrap();
    let ev = EvidenceSet::new(net.catalog(), [("V0".to_string(), 1)]).unwrap();
    assert!(matches!(
        posterior(&net, &ev, "V1"),
        Err(InferenceError::ImpossibleEvidence { .. })
    ));
}

#[test]
fn network_rejects_mismatched_cpts() {
    let catalog = unit_catalog(&[2, 2]);
    let dag = Dag::with_edges(["V0", "V1"], [("V0", "V1")]).unwrap();
    let root = Cpt::new("V0", vec![], vec![], 2, vec![vec![0.5, 0.5]]).unwrap();
    let orphan = Cpt::new("V1", vec![], vec![], 2, vec![vec![0.5, 0.5]]).unwrap();
    assert!(matches!(
        BayesNet::new(catalog.clone(), dag.clone(), vec![root.clone(), orphan]),
        Err(InferenceError::InvalidNetwork(_))
    ));
    assert!(matches!(
        BayesNet::new(catalog, dag, vec![root]),
        Err(InferenceError::InvalidNetwork(_))
    ));
}

#[test]
fn randomized_networks_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let cfg = RandomNetConfig {
            nodes: rng.random_range(2..=8),
            min_card: 2,
            max_card: 4,
            max_parents: 3,
            edge_prob: 0.45,
            zero_prob: if case % 4 == 0 { 0.2 } else { 0.0 },
        };
        let net = random_network(&mut rng, &cfg);
        let q = rng.random_range(0..net.len());
        let ev = random_evidence(&mut rng, &net, q);
        let name = net.catalog().get(q).name.clone();
        match (enumerate(&net, &ev, &name), posterior(&net, &ev, &name)) {
            (Some(oracle), Ok(p)) => {
                worst = worst.max(max_abs(&oracle, &p.probs));
                assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            (None, Err(InferenceError::ImpossibleEvidence { .. })) => {}
            (o, p) => panic!("case {case}: oracle {o:?} vs {p:?}"),
        }
    }
    assert!(worst <= 1e-10, "max abs error {worst}");
}

#[test]
fn elimination_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let cfg = RandomNetConfig {
            nodes: 7,
            edge_prob: 0.5,
            ..RandomNetConfig::default()
        };
        let net = random_network(&mut rng, &cfg);
        let q = rng.random_range(0..net.len());
        let ev = random_evidence(&mut rng, &net, q);
        let query = net.catalog().get(q).name.clone();
        let mut names: Vec<String> = net
            .catalog()
            .names()
            .filter(|n| *n != query && !ev.contains(n))
            .map(String::from)
            .collect();
        let base = posterior(&net, &ev, &query).unwrap();
        for _ in 0..3 {
            names.shuffle(&mut rng);
            let order: Vec<&str> = names.iter().map(String::as_str).collect();
            let p = posterior_with_order(&net, &ev, &query, &order).unwrap();
            assert!(max_abs(&base.probs, &p.probs) <= 1e-10);
        }
    }
}

#[test]
fn incomplete_order_is_rejected() {
    let net = chain();
    assert!(matches!(
        posterior_with_order(&net, &EvidenceSet::empty(), "V2", &["V0"]),
        Err(InferenceError::InvalidOrder)
    ));
}

fn yield_only(prior: Vec<f64>) -> BayesNet {
    let bins = BinScheme::non_negative(vec![131.0, 149.0, 178.0])
        .unwrap()
        .with_bin_means(vec![100.0, 140.0, 160.0, 200.0])
        .unwrap();
    let catalog = VariableCatalog::new(vec![VariableSpec {
        name: "Yield".into(),
        kind: VariableKind::Target,
        tier: 1,
        bins,
    }])
    .unwrap();
    let dag = Dag::new(["Yield"]).unwrap();
    let cpt = Cpt::new("Yield", vec![], vec![], 4, vec![prior]).unwrap();
    BayesNet::new(catalog, dag, vec![cpt]).unwrap()
}

#[test]
fn expected_yield_examples() {
    let f = expected_yield(&yield_only(vec![0.25; 4]), &EvidenceSet::empty()).unwrap();
    assert_eq!(f.expected_yield, 150.0);
    for (k, mean) in [100.0, 140.0, 160.0, 200.0].into_iter().enumerate() {
        let mut row = vec![0.0; 4];
        row[k] = 1.0;
        let f = expected_yield(&yield_only(row), &EvidenceSet::empty()).unwrap();
        assert_eq!(f.expected_yield, mean);
    }
}

#[test]
fn expected_yield_needs_bin_means() {
    let catalog = VariableCatalog::new(vec![VariableSpec {
        name: "Yield".into(),
        kind: VariableKind::Target,
        tier: 1,
        bins: BinScheme::new(vec![1.0]).unwrap(),
    }])
    .unwrap();
    let net = BayesNet::new(
        catalog,
        Dag::new(["Yield"]).unwrap(),
        vec![Cpt::new("Yield", vec![], vec![], 2, vec![vec![0.5, 0.5]]).unwrap()],
    )
    .unwrap();
    assert!(matches!(
        expected_yield(&net, &EvidenceSet::empty()),
        Err(InferenceError::MissingBinMeans(_))
    ));
}

#[test]
fn expected_yield_with_full_evidence_matches_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let net = random_network(&mut rng, &RandomNetConfig::default());
        let cat = net.catalog();
        let target = cat.target().name.clone();
        let pairs: Vec<(String, usize)> = (0..cat.len())
            .filter(|&i| cat.get(i).name != target)
            .map(|i| (cat.get(i).name.clone(), rng.random_range(0..cat.get(i).bins.bin_count())))
            .collect();
        let ev = EvidenceSet::for_forecast(cat, pairs).unwrap();
        let f = expected_yield(&net, &ev).unwrap();
        let oracle = enumerate(&net, &ev, &target).unwrap();
        let means = cat.target().bins.bin_means().unwrap();
        let e: f64 = oracle.iter().zip(means).map(|(p, m)| p * m).sum();
        assert!((f.expected_yield - e).abs() < 1e-9);
        let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(f.expected_yield >= lo - 1e-12 && f.expected_yield <= hi + 1e-12);
        assert_eq!(f.evidence_used, ev);
    }
}

fn two_node(rows: Vec<Vec<f64>>) -> BayesNet {
    let k = rows[0].len();
    let catalog = unit_catalog(&[rows.len(), k]);
    let dag = Dag::with_edges(["V0", "V1"], [("V0", "V1")]).unwrap();
    let p = rows.len();
    let cpts = vec![
        Cpt::new("V0", vec![], vec![], p, vec![vec![1.0 / p as f64; p]]).unwrap(),
        Cpt::new("V1", vec!["V0".into()], vec![p], k, rows).unwrap(),
    ];
    BayesNet::new(catalog, dag, cpts).unwrap()
}

#[test]
fn strength_examples() {
    let same = two_node(vec![vec![0.3, 0.7], vec![0.3, 0.7]]);
    assert_eq!(strength_of_influence(&same, "V0", "V1", None).unwrap(), 0.0);
    let copy = two_node(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(strength_of_influence(&copy, "V0", "V1", None).unwrap(), 1.0);
    let tv = two_node(vec![vec![0.9, 0.1], vec![0.6, 0.4]]);
    let s = strength_of_influence(&tv, "V0", "V1", None).unwrap();
    assert!((s - 0.3).abs() < 1e-12);
    assert!(matches!(
        strength_of_influence(&tv, "V1", "V0", None),
        Err(InferenceError::UnknownEdge(..))
    ));
}

#[test]
fn strength_weights_other_parent_configurations() {
    // V2 has parents V0 and V1; V0 moves V2 only when V1 = 1.
    let catalog = unit_catalog(&[2, 2, 2]);
    let dag = Dag::with_edges(["V0", "V1", "V2"], [("V0", "V2"), ("V1", "V2")]).unwrap();
    let cpts = vec![
        Cpt::new("V0", vec![], vec![], 2, vec![vec![0.5, 0.5]]).unwrap(),
        Cpt::new("V1", vec![], vec![], 2, vec![vec![0.5, 0.5]]).unwrap(),
        Cpt::new(
            "V2",
            vec!["V0".into(), "V1".into()],
            vec![2, 2],
            2,
            vec![vec![0.5, 0.5], vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]],
        )
        .unwrap(),
    ];
    let net = BayesNet::new(catalog.clone(), dag, cpts).unwrap();
    assert_eq!(strength_of_influence(&net, "V0", "V2", None).unwrap(), 0.5);

    use hb_core::pipeline::{DiscreteRow, DiscretizedDataset};
    let rows = (0..4)
        .map(|k| DiscreteRow {
            county_fips: "1".into(),
            year: k,
            bins: vec![Some(0), Some(usize::from(k == 0)), None],
        })
        .collect();
    let data = DiscretizedDataset::new(catalog, rows).unwrap();
    // V1 = 1 in one row of four
    let s = strength_of_influence(&net, "V0", "V2", Some(&data)).unwrap();
    assert!((s - 0.25).abs() < 1e-15);
}

proptest! {
    #[test]
    fn strength_is_invariant_to_parent_relabelling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cards = [rng.random_range(2..=4usize), rng.random_range(2..=4usize), rng.random_range(2..=4usize)];
        let catalog = unit_catalog(&cards);
        let dag = Dag::with_edges(["V0", "V1", "V2"], [("V0", "V2"), ("V1", "V2")]).unwrap();
        let cpts = random_cpts(&mut rng, &catalog, &dag, 0.0);
        let net = BayesNet::new(catalog.clone(), dag.clone(), cpts.clone()).unwrap();

        let mut perm: Vec<usize> = (0..cards[0]).collect();
        perm.shuffle(&mut rng);
        // relabel V0 state s as perm[s]
        let child = &cpts[2];
        let mut rows = vec![Vec::new(); child.row_count()];
        for s0 in 0..cards[0] {
            for s1 in 0..cards[1] {
                rows[child.row_index(&[perm[s0], s1])] = child.row(child.row_index(&[s0, s1])).to_vec();
            }
        }
        let relabelled = Cpt::new("V2", child.parents().to_vec(), child.parent_cards().to_vec(), child.card(), rows).unwrap();
        let net2 = BayesNet::new(catalog, dag, vec![cpts[0].clone(), cpts[1].clone(), relabelled]).unwrap();
        let a = strength_of_influence(&net, "V0", "V2", None).unwrap();
        let b = strength_of_influence(&net2, "V0", "V2", None).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}
