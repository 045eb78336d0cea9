use hb_core::analysis::{
    accuracy_at_threshold, cases_from_dataset, confusion_matrix, county_error, evaluate, evidence_sweep, whatif,
    AnalysisError, EvidenceSchedule,
};
use hb_core::inference::{expected_yield, BayesNet};
use hb_core::model::{Cpt, Dag, EvidenceSet};
use hb_core::synthetic::{
    forward_sample, random_network, samples_to_dataset, unit_catalog, whatif_fixture, RandomNetConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 97 (true, predicted) pairs behind the published confusion matrix.
fn reference_confusion_pairs() -> Vec<(usize, usize)> {
    let cells = [[6, 0, 0, 0], [4, 11, 0, 0], [0, 1, 14, 7], [2, 0, 6, 46]];
    let mut pairs = Vec::new();
    for (t, row) in cells.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            pairs.extend(std::iter::repeat_n((t, p), n));
        }
    }
    pairs
}

#[test]
fn reference_confusion_accuracy() {
    let pairs = reference_confusion_pairs();
    assert_eq!(pairs.len(), 97);
    let cm = confusion_matrix(&pairs, 4).unwrap();
    assert_eq!(cm.total(), 97);
    assert_eq!(cm.trace(), 77);
    assert!((cm.accuracy().unwrap() - 77.0 / 97.0).abs() < 1e-12);
}

#[test]
fn confusion_matrix_edge_cases() {
    let perfect: Vec<(usize, usize)> = (0..10).map(|i| (i % 4, i % 4)).collect();
    let cm = confusion_matrix(&perfect, 4).unwrap();
    assert_eq!(cm.accuracy(), Some(1.0));
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert_eq!(cm.counts[i][j], 0);
            }
        }
    }
    let empty = confusion_matrix(&[], 4).unwrap();
    assert_eq!(empty.total(), 0);
    assert_eq!(empty.accuracy(), None);
    assert_eq!(
        confusion_matrix(&[(0, 4)], 4).unwrap_err(),
        AnalysisError::BinOutOfRange { bin: 4, bins: 4 }
    );
}

#[test]
fn reference_county_errors() {
    assert_eq!(county_error(171.6, 171.71).unwrap(), 0.06);
    assert_eq!(county_error(174.6, 174.39).unwrap(), 0.12);
    assert_eq!(county_error(174.0, 174.39).unwrap(), 0.22);
    assert_eq!(county_error(173.3, 174.39).unwrap(), 0.63);
    assert_eq!(county_error(150.0, 150.0).unwrap(), 0.0);
    assert!(matches!(county_error(0.0, 1.0), Err(AnalysisError::NonPositiveActual(_))));
}

#[test]
fn threshold_counts() {
    assert_eq!(accuracy_at_threshold(&[0.06, 0.12, 30.0], 20.0), 2);
    assert_eq!(accuracy_at_threshold(&[], 20.0), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let errors: Vec<f64> = (0..99).map(|_| rng.random_range(0.0..40.0)).collect();
    let mut naive = 0;
    for e in &errors {
        if *e <= 20.0 {
            naive += 1;
        }
    }
    assert_eq!(accuracy_at_threshold(&errors, 20.0), naive);
}

proptest! {
    #[test]
    fn county_error_is_scale_invariant(a in 1.0f64..300.0, p in 0.0f64..300.0, c in 0.1f64..10.0) {
        let base = 100.0 * (p - a).abs() / a;
        let scaled = 100.0 * (c * p - c * a).abs() / (c * a);
        // away from rounding boundaries the reported values agree exactly
        let frac = (base * 100.0).fract();
        prop_assume!((frac - 0.5).abs() > 1e-6);
        prop_assert!((base - scaled).abs() < 1e-9);
        prop_assert_eq!(county_error(a, p).unwrap(), county_error(c * a, c * p).unwrap());
    }

    #[test]
    fn confusion_total_matches_input(pairs in proptest::collection::vec((0usize..4, 0usize..4), 0..200)) {
        let cm = confusion_matrix(&pairs, 4).unwrap();
        prop_assert_eq!(cm.total() as usize, pairs.len());
        prop_assert!(cm.trace() <= cm.total());
    }
}

fn fixture_net(seed: u64) -> BayesNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_network(
        &mut rng,
        &RandomNetConfig {
            nodes: 6,
            edge_prob: 0.5,
            ..RandomNetConfig::default()
        },
    )
}

#[test]
fn sweep_matches_direct_calls() {
    let net = fixture_net(1);
    let cat = net.catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ev = EvidenceSet::empty();
    let mut steps = vec![("prior".to_string(), ev.clone())];
    for i in 0..cat.len() - 1 {
        let spec = cat.get(i);
        ev = ev.with(spec.name.clone(), rng.random_range(0..spec.bins.bin_count()));
        steps.push((format!("step{i}"), ev.clone()));
    }
    let schedule = EvidenceSchedule::new(steps.clone()).unwrap();
    let out = evidence_sweep(&net, &schedule).unwrap();
    assert_eq!(out.len(), steps.len());
    for (step, (label, ev)) in out.iter().zip(&steps) {
        assert_eq!(&step.label, label);
        assert_eq!(step.forecast, expected_yield(&net, ev).unwrap());
    }
}

#[test]
fn schedule_must_be_monotone() {
    let net = fixture_net(3);
    let a = EvidenceSet::new(net.catalog(), [("V0".to_string(), 0)]).unwrap();
    assert_eq!(EvidenceSchedule::new(vec![]).unwrap_err(), AnalysisError::EmptySchedule);
    assert_eq!(
        EvidenceSchedule::new(vec![("a".into(), a), ("b".into(), EvidenceSet::empty())]).unwrap_err(),
        AnalysisError::NotMonotone("b".into())
    );
}

#[test]
fn sweep_attaches_step_label_to_errors() {
    let catalog = unit_catalog(&[2, 2]);
    let dag = Dag::with_edges(["V0", "V1"], [("V0", "V1")]).unwrap();
    let cpts = vec![
        Cpt::new("V0", vec![], vec![], 2, vec![vec![1.0, 0.0]]).unwrap(),
        Cpt::new("V1", vec!["V0".into()], vec![2], 2, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
    ];
    let net = BayesNet::new(catalog, dag, cpts).unwrap();
    let bad = EvidenceSet::new(net.catalog(), [("V0".to_string(), 1)]).unwrap();
    let schedule = EvidenceSchedule::new(vec![
        ("prior".into(), EvidenceSet::empty()),
        ("impossible".into(), bad.clone()),
    ])
    .unwrap();
    match evidence_sweep(&net, &schedule) {
        Err(AnalysisError::Step { label, .. }) => assert_eq!(label, "impossible"),
        other => panic!("unexpected {other:?}"),
    }
    // what-if marks the impossible bin instead of failing
    let w = whatif(&net, "V0", &EvidenceSet::empty()).unwrap();
    assert!(w[0].expected_yield.is_some());
    assert_eq!(w[1].expected_yield, None);
}

#[test]
fn whatif_shapes_on_fixture() {
    let net = whatif_fixture();
    let base = EvidenceSet::empty();
    let csr2: Vec<f64> = whatif(&net, "CSR2", &base)
        .unwrap()
        .iter()
        .map(|e| e.expected_yield.unwrap())
        .collect();
    assert!(csr2.windows(2).all(|w| w[1] >= w[0]), "{csr2:?}");
    let pdsi: Vec<f64> = whatif(&net, "PDSI", &base)
        .unwrap()
        .iter()
        .map(|e| e.expected_yield.unwrap())
        .collect();
    let peak = pdsi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(peak > 0 && peak < pdsi.len() - 1, "{pdsi:?}");
    assert!(pdsi[0] < pdsi[peak] && pdsi[3] < pdsi[peak]);
}

#[test]
fn whatif_argument_errors() {
    let net = whatif_fixture();
    assert!(matches!(
        whatif(&net, "Yield", &EvidenceSet::empty()),
        Err(AnalysisError::TargetVariable(_))
    ));
    let base = EvidenceSet::new(net.catalog(), [("CSR2".to_string(), 1)]).unwrap();
    assert!(matches!(
        whatif(&net, "CSR2", &base),
        Err(AnalysisError::AlreadyObserved(_))
    ));
}

#[test]
fn whatif_on_disconnected_variable_is_flat() {
    // V0 is isolated from the target V2.
    let catalog = unit_catalog(&[3, 2, 3]);
    let dag = Dag::with_edges(["V0", "V1", "V2"], [("V1", "V2")]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cpts = hb_core::synthetic::random_cpts(&mut rng, &catalog, &dag, 0.0);
    let net = BayesNet::new(catalog, dag, cpts).unwrap();
    let w = whatif(&net, "V0", &EvidenceSet::empty()).unwrap();
    assert_eq!(w.len(), 3);
    for e in &w {
        assert!((e.expected_yield.unwrap() - w[0].expected_yield.unwrap()).abs() < 1e-10);
    }
}

#[test]
fn evaluation_report_counts_every_case() {
    let net = fixture_net(5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let samples = forward_sample(&mut rng, &net, 60);
    let data = samples_to_dataset(&mut rng, net.catalog(), &samples, 0.1);
    let cases = cases_from_dataset(&data, None);
    let report = evaluate(&net, &cases, &[20.0]).unwrap();
    assert_eq!(report.confusion.total() as usize + report.skipped.len(), cases.len());
    assert_eq!(report.counties.len(), report.confusion.total() as usize);
    for (c, case) in report.counties.iter().zip(&cases) {
        let f = expected_yield(&net, &case.evidence).unwrap();
        assert_eq!(c.predicted, f.expected_yield);
        assert_eq!(c.predicted_bin, f.posterior.argmax());
    }
    let mut csv = Vec::new();
    report.write_county_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), report.counties.len() + 1);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["thresholds"][0]["threshold"], 20.0);
}
