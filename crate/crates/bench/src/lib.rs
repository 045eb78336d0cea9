//! Shared fixtures for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hb_core::inference::BayesNet;
use hb_core::model::EvidenceSet;
use hb_core::pipeline::DiscretizedDataset;
use hb_core::synthetic::{forward_sample, ground_truth_six, random_network, samples_to_dataset, RandomNetConfig};

/// `n` samples from the six-node ground truth, each cell hidden with
/// probability `missing`.
pub fn six_node_data(n: usize, missing: f64, seed: u64) -> (BayesNet, DiscretizedDataset) {
    let net = ground_truth_six();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = forward_sample(&mut rng, &net, n);
    let data = samples_to_dataset(&mut rng, net.catalog(), &samples, missing);
    (net, data)
}

pub fn random_net(nodes: usize, seed: u64) -> BayesNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_network(
        &mut rng,
        &RandomNetConfig {
            nodes,
            edge_prob: 0.5,
            ..RandomNetConfig::default()
        },
    )
}

/// Observe each non-target variable with probability one half.
pub fn random_evidence(net: &BayesNet, seed: u64) -> EvidenceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalog = net.catalog();
    let t = catalog.target_index();
    let mut ev = EvidenceSet::empty();
    for i in 0..catalog.len() {
        if i != t && rng.random_bool(0.5) {
            let spec = catalog.get(i);
            ev = ev.with(spec.name.clone(), rng.random_range(0..spec.bins.bin_count()));
        }
    }
    ev
}
