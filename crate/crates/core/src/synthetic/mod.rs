//! Synthetic networks, samples and panels for tests, benchmarks and demos.

mod fixtures;
mod iowa;
mod random;

pub use fixtures::{ground_truth_six, whatif_fixture, WHATIF_YIELD_MEANS};
pub use iowa::{
    default_tiers, iowa_like_panel, iowa_recipe, modal_yield_bin, yield_distribution, IowaLikeConfig,
    IowaLikePanel, LatentRow, DROUGHT_COLUMN, SOIL_COLUMN, YIELD_COLUMN, YIELD_MODE_PROB,
};
pub use random::{
    forward_sample, random_cpts, random_distribution, random_network, samples_to_dataset, unit_catalog,
    unit_scheme, RandomNetConfig,
};
