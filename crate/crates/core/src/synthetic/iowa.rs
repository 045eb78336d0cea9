//! Synthetic county-year panel shaped like the Iowa corn data: daily weather
//! for May through September plus annual soil, drought and yield columns.
//!
//! Yield is driven by two discrete latent classes. A county's soil class
//! (fixed across years) sets the typical yield bin, and an extreme drought
//! class (very dry or very wet) knocks it down one bin. The weather columns
//! carry no yield signal.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::model::ConstraintFile;
use crate::pipeline::{DailyRow, DailyTable, PanelRow, RawPanel, Recipe, DEFAULT_YIELD_EDGES};

pub const SOIL_COLUMN: &str = "Soil_WA";
pub const DROUGHT_COLUMN: &str = "DI_Avg";
pub const YIELD_COLUMN: &str = "Yield";

const SOIL_CENTERS: [f64; 4] = [35.0, 55.0, 72.0, 88.0];
const DROUGHT_CENTERS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
const DROUGHT_PROBS: [f64; 4] = [0.2, 0.3, 0.3, 0.2];
const DROUGHT_PENALTY: [usize; 4] = [1, 0, 0, 1];
const YIELD_LOWER: f64 = 100.0;
const YIELD_UPPER: f64 = 215.0;
/// Probability of the modal yield bin given both latent classes.
pub const YIELD_MODE_PROB: f64 = 0.88;

/// Mean daily high per month, May..Sep.
const BASE_TMAX: [f64; 5] = [72.0, 81.0, 85.0, 83.0, 76.0];

#[derive(Debug, Clone)]
pub struct IowaLikeConfig {
    pub counties: usize,
    pub first_year: i32,
    pub years: usize,
    pub seed: u64,
    /// Chance that a daily record is absent.
    pub day_drop_rate: f64,
}

impl Default for IowaLikeConfig {
    fn default() -> Self {
        IowaLikeConfig {
            counties: 99,
            first_year: 2005,
            years: 6,
            seed: 7,
            day_drop_rate: 0.02,
        }
    }
}

/// The hidden classes behind one county-year.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentRow {
    pub county_fips: String,
    pub year: i32,
    pub soil_class: usize,
    pub drought_class: usize,
    pub yield_bin: usize,
}

#[derive(Debug, Clone)]
pub struct IowaLikePanel {
    pub daily: DailyTable,
    pub annual: RawPanel,
    pub recipe: Recipe,
    pub constraints: ConstraintFile,
    pub latent: Vec<LatentRow>,
}

/// Modal yield bin for a soil and drought class.
pub fn modal_yield_bin(soil: usize, drought: usize) -> usize {
    soil.saturating_sub(DROUGHT_PENALTY[drought])
}

/// Generating distribution of the yield bin.
pub fn yield_distribution(soil: usize, drought: usize) -> [f64; 4] {
    let mode = modal_yield_bin(soil, drought);
    let neighbours: Vec<usize> = [mode.checked_sub(1), Some(mode + 1).filter(|&b| b < 4)]
        .into_iter()
        .flatten()
        .collect();
    let mut p = [0.0; 4];
    p[mode] = YIELD_MODE_PROB;
    for &b in &neighbours {
        p[b] = (1.0 - YIELD_MODE_PROB) / neighbours.len() as f64;
    }
    p
}

/// Seven-tier ordering: soil and drought first, then the weather months in
/// season order, yield last.
pub fn default_tiers() -> BTreeMap<String, u32> {
    let mut t = BTreeMap::new();
    t.insert(SOIL_COLUMN.to_string(), 1);
    t.insert(DROUGHT_COLUMN.to_string(), 1);
    for (k, m) in ["May", "Jun", "Jul", "Aug", "Sep"].iter().enumerate() {
        t.insert(format!("GDD_{m}"), 2 + k as u32);
        t.insert(format!("RF_{m}"), 2 + k as u32);
    }
    t.remove("GDD_Sep");
    t.insert(YIELD_COLUMN.to_string(), 7);
    t
}

/// Monthly GDD sums for May..Aug and rainfall totals for May..Sep.
pub fn iowa_recipe() -> Recipe {
    let mut r = Recipe::monthly_gdd_and_rain(&[5, 6, 7, 8, 9]);
    r.entries.retain(|e| e.output_name != "GDD_Sep");
    r
}

fn pick<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn yield_value<R: Rng + ?Sized>(rng: &mut R, bin: usize) -> f64 {
    let mut cuts = vec![YIELD_LOWER];
    cuts.extend(DEFAULT_YIELD_EDGES);
    cuts.push(YIELD_UPPER);
    let (lo, hi) = (cuts[bin] + 0.5, cuts[bin + 1] - 0.5);
    let v = rng.random_range(lo..hi);
    (v * 10.0).round() / 10.0
}

fn round_to(v: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    (v * f).round() / f
}

pub fn iowa_like_panel(cfg: &IowaLikeConfig) -> IowaLikePanel {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let anomaly = Normal::new(0.0, 3.0).expect("valid sd");
    let daily_noise = Normal::new(0.0, 5.0).expect("valid sd");
    let rain = Exp::new(1.0 / 0.45).expect("valid rate");

    let counties: Vec<String> = (0..cfg.counties).map(|i| format!("19{:03}", 2 * i + 1)).collect();
    let soil: Vec<(usize, f64)> = counties
        .iter()
        .map(|_| {
            let c = rng.random_range(0..4);
            (c, round_to(SOIL_CENTERS[c] + rng.random_range(-4.0..4.0), 1))
        })
        .collect();

    let mut daily_rows = Vec::new();
    let mut annual_rows = Vec::new();
    let mut latent = Vec::new();
    for (ci, county) in counties.iter().enumerate() {
        for y in 0..cfg.years {
            let year = cfg.first_year + y as i32;
            let drought = pick(&mut rng, &DROUGHT_PROBS);
            let di = round_to(DROUGHT_CENTERS[drought] + rng.random_range(-0.6..0.6), 2);
            let (soil_class, soil_value) = soil[ci];
            let bin = pick(&mut rng, &yield_distribution(soil_class, drought));
            let yv = yield_value(&mut rng, bin);

            let wet_prob = 0.2 + 0.07 * drought as f64;
            for (k, month) in (5u32..=9).enumerate() {
                let shift = anomaly.sample(&mut rng);
                let mut date = NaiveDate::from_ymd_opt(year, month, 1).expect("valid date");
                while date.month() == month {
                    let t_max = BASE_TMAX[k] + shift + daily_noise.sample(&mut rng);
                    let t_min = t_max - rng.random_range(14.0..24.0);
                    let precip = if rng.random::<f64>() < wet_prob {
                        rain.sample(&mut rng)
                    } else {
                        0.0
                    };
                    if rng.random::<f64>() >= cfg.day_drop_rate {
                        daily_rows.push(DailyRow {
                            county_fips: county.clone(),
                            date,
                            values: vec![
                                Some(round_to(t_max, 1)),
                                Some(round_to(t_min, 1)),
                                Some(round_to(precip, 2)),
                            ],
                        });
                    }
                    date = date.succ_opt().expect("in range");
                }
            }
            annual_rows.push(PanelRow {
                county_fips: county.clone(),
                year,
                values: vec![Some(di), Some(soil_value), Some(yv)],
            });
            latent.push(LatentRow {
                county_fips: county.clone(),
                year,
                soil_class,
                drought_class: drought,
                yield_bin: bin,
            });
        }
    }
    let annual = RawPanel::new(
        vec![DROUGHT_COLUMN.into(), SOIL_COLUMN.into(), YIELD_COLUMN.into()],
        annual_rows,
    )
    .expect("generated keys are unique");
    IowaLikePanel {
        daily: DailyTable {
            columns: vec!["t_max".into(), "t_min".into(), "precip".into()],
            rows: daily_rows,
        },
        annual,
        recipe: iowa_recipe(),
        constraints: ConstraintFile {
            forbidden: vec![],
            forced: vec![],
            tiers: default_tiers(),
        },
        latent,
    }
}
