use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::PipelineError;

/// Daily maximum temperature is capped here before computing GDD (°F).
pub const GDD_TMAX_CAP: f64 = 86.0;
/// Daily minimum temperature is floored here before computing GDD (°F).
pub const GDD_TMIN_FLOOR: f64 = 50.0;
/// Default base temperature (°F).
pub const DEFAULT_T_BASE: f64 = 50.0;

/// One day of station weather for a county.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyWeather {
    date: NaiveDate,
    t_max: Option<f64>,
    t_min: Option<f64>,
    precip: Option<f64>,
}

impl DailyWeather {
    pub fn new(
        date: NaiveDate,
        t_max: Option<f64>,
        t_min: Option<f64>,
        precip: Option<f64>,
    ) -> Result<Self, PipelineError> {
        if let (Some(hi), Some(lo)) = (t_max, t_min) {
            if hi < lo {
                return Err(PipelineError::InvalidRange { t_max: hi, t_min: lo });
            }
        }
        Ok(DailyWeather {
            date,
            t_max,
            t_min,
            precip,
        })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn t_max(&self) -> Option<f64> {
        self.t_max
    }

    pub fn t_min(&self) -> Option<f64> {
        self.t_min
    }

    pub fn precip(&self) -> Option<f64> {
        self.precip
    }
}

/// Growing degree days for one day: `(min(t_max, 86) + max(t_min, 50)) / 2 - t_base`.
pub fn compute_gdd(t_max: f64, t_min: f64, t_base: f64) -> Result<f64, PipelineError> {
    if t_max < t_min {
        return Err(PipelineError::InvalidRange { t_max, t_min });
    }
    // Both readings clamp into [50, 86], so for t_base = 50 the result lies
    // in [0, 36], and in [0, 18] whenever t_min <= 50.
    let hi = t_max.clamp(GDD_TMIN_FLOOR, GDD_TMAX_CAP);
    let lo = t_min.clamp(GDD_TMIN_FLOOR, GDD_TMAX_CAP);
    Ok((hi + lo) / 2.0 - t_base)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateMode {
    /// Sum of daily GDD over the month.
    GddSum,
    /// Mean daily GDD over the usable days of the month.
    GddMean,
    /// Total precipitation.
    RainTotal,
    /// Mean of daily `(t_max + t_min) / 2`.
    TempMean,
}

impl AggregateMode {
    fn needs_temperature(self) -> bool {
        !matches!(self, AggregateMode::RainTotal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateConfig {
    pub t_base: f64,
    /// Inclusive range of calendar months that may be aggregated.
    pub season: (u32, u32),
}

impl Default for AggregateConfig {
    fn default() -> Self {
        AggregateConfig {
            t_base: DEFAULT_T_BASE,
            season: (5, 9),
        }
    }
}

/// Result of aggregating one month.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthlyAggregate {
    pub value: f64,
    /// Days in `daily` for this month that had the required fields.
    pub used_days: usize,
    /// Days in `daily` for this month that were skipped for missing fields.
    pub skipped_days: usize,
}

/// Aggregate the records of `daily` falling in calendar `month`.
pub fn aggregate_month(
    daily: &[DailyWeather],
    month: u32,
    mode: AggregateMode,
    cfg: &AggregateConfig,
) -> Result<MonthlyAggregate, PipelineError> {
    if month < cfg.season.0 || month > cfg.season.1 {
        return Err(PipelineError::MonthOutOfSeason(month));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for day in daily.iter().filter(|d| d.date.month() == month) {
        let contribution = if mode.needs_temperature() {
            match (day.t_max, day.t_min) {
                (Some(hi), Some(lo)) => Some(match mode {
                    AggregateMode::TempMean => (hi + lo) / 2.0,
                    _ => compute_gdd(hi, lo, cfg.t_base)?,
                }),
                _ => None,
            }
        } else {
            day.precip
        };
        match contribution {
            Some(v) => {
                total += v;
                used += 1;
            }
            None => skipped += 1,
        }
    }
    if used == 0 {
        return Err(PipelineError::EmptyMonth(month));
    }
    let value = match mode {
        AggregateMode::GddSum | AggregateMode::RainTotal => total,
        AggregateMode::GddMean | AggregateMode::TempMean => total / used as f64,
    };
    Ok(MonthlyAggregate {
        value,
        used_days: used,
        skipped_days: skipped,
    })
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .expect("valid month");
    (next - first).num_days() as u32
}
