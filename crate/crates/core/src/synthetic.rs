//! Seeded synthetic series for tests, examples and benchmarks.

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::changepoint::ChangePointSet;
use crate::ingest::{NamedFlags, NamedSeries, RawSeries};

/// Linear response of the target to temperature within one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub intercept: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeStream {
    pub start_year: i32,
    pub years: u32,
    /// Day-of-year starts of regimes 1.., repeated every year.
    pub boundaries: Vec<u16>,
    /// One regime per segment, `boundaries.len() + 1` entries.
    pub regimes: Vec<Regime>,
    pub daily_amplitude: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl RegimeStream {
    /// Four annual shifts with distinct linear responses.
    pub fn four_shifts(years: u32, seed: u64) -> Self {
        Self {
            start_year: 2013,
            years,
            boundaries: vec![75, 135, 260, 310],
            regimes: vec![
                Regime {
                    intercept: 400.0,
                    slope: -12.0,
                },
                Regime {
                    intercept: 220.0,
                    slope: -4.0,
                },
                Regime {
                    intercept: 90.0,
                    slope: 1.5,
                },
                Regime {
                    intercept: 260.0,
                    slope: -6.0,
                },
                Regime {
                    intercept: 480.0,
                    slope: -15.0,
                },
            ],
            daily_amplitude: 20.0,
            noise_sd: 4.0,
            seed,
        }
    }

    pub fn change_points(&self) -> ChangePointSet {
        ChangePointSet::new(self.boundaries.clone()).expect("valid boundaries")
    }

    /// Hourly series with a `temp` exogenous column, a `temp_fc` forecast
    /// column (truth plus noise) and a `holiday` flag on January 1.
    pub fn generate(&self) -> RawSeries {
        assert_eq!(self.regimes.len(), self.boundaries.len() + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise_sd.max(1e-12)).expect("valid sd");
        let weather = Normal::new(0.0, 1.0).expect("valid sd");
        let start = NaiveDate::from_ymd_opt(self.start_year, 1, 1)
            .expect("valid year")
            .and_hms_opt(0, 0, 0)
            .expect("midnight");
        let end = NaiveDate::from_ymd_opt(self.start_year + self.years as i32, 1, 1)
            .expect("valid year")
            .and_hms_opt(0, 0, 0)
            .expect("midnight");
        let hours = (end - start).num_hours() as usize;
        let cps = self.change_points();

        let mut timestamps = Vec::with_capacity(hours);
        let mut target = Vec::with_capacity(hours);
        let mut temp = Vec::with_capacity(hours);
        let mut temp_fc = Vec::with_capacity(hours);
        let mut holiday = Vec::with_capacity(hours);
        let mut anomaly = 0.0;
        for h in 0..hours {
            let t = start + chrono::Duration::hours(h as i64);
            let doy = t.ordinal() as f64;
            let hour = t.hour() as f64;
            anomaly = 0.97 * anomaly + 0.5 * weather.sample(&mut rng);
            let seasonal = 10.0 - 12.0 * (2.0 * std::f64::consts::PI * (doy - 15.0) / 365.0).cos();
            let diurnal = 4.0 * (2.0 * std::f64::consts::PI * (hour - 9.0) / 24.0).sin();
            let tv = seasonal + diurnal + anomaly;
            let r = self.regimes[cps.segment_of(t.ordinal())];
            let y = r.intercept
                + r.slope * tv
                + self.daily_amplitude * (2.0 * std::f64::consts::PI * (hour - 6.0) / 24.0).sin()
                + noise.sample(&mut rng);
            timestamps.push(t);
            target.push(y);
            temp.push(tv);
            temp_fc.push(tv + 0.5 * weather.sample(&mut rng));
            holiday.push(Some(t.month() == 1 && t.day() == 1));
        }
        RawSeries {
            timestamps,
            target,
            exogenous: vec![NamedSeries {
                name: "temp".into(),
                values: temp,
            }],
            forecast: Some(NamedSeries {
                name: "temp_fc".into(),
                values: temp_fc,
            }),
            flags: vec![NamedFlags {
                name: "holiday".into(),
                values: holiday,
            }],
        }
    }
}

/// `count` distinct day-of-year positions drawn uniformly from 2..=365.
pub fn random_change_points(count: usize, seed: u64) -> ChangePointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut days = std::collections::BTreeSet::new();
    while days.len() < count.min(364) {
        days.insert(rng.random_range(2u16..=365));
    }
    ChangePointSet::new(days.into_iter().collect()).expect("valid positions")
}

/// Piecewise-constant Gaussian series: `levels[i]` holds from `breaks[i-1]`
/// to `breaks[i]`.
pub fn piecewise_constant(
    n: usize,
    breaks: &[usize],
    levels: &[f64],
    noise_sd: f64,
    seed: u64,
) -> Vec<f64> {
    assert_eq!(levels.len(), breaks.len() + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd.max(1e-12)).expect("valid sd");
    (0..n)
        .map(|i| levels[breaks.partition_point(|&b| b <= i)] + noise.sample(&mut rng))
        .collect()
}

/// Hourly timestamps starting at midnight of `start`.
pub fn hourly_index(start: NaiveDateTime, n: usize) -> Vec<NaiveDateTime> {
    (0..n)
        .map(|h| start + chrono::Duration::hours(h as i64))
        .collect()
}
