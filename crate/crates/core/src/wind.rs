//! Wind speed time series: seeded synthetic profiles and CSV ingestion.
//!
//! Lookup between samples is a zero-order hold.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::format::sig9;

/// Floor applied to synthetic wind speeds, m/s.
pub const MIN_SYNTHETIC_SPEED: f64 = 0.5;

/// Periods of the deterministic gust components, s.
const GUST_PERIODS: [f64; 3] = [50.0, 23.0, 11.0];
/// Corner time constant of the turbulence filter, s.
const TURBULENCE_TIME_CONSTANT: f64 = 2.0;
/// Share of the fluctuation variance carried by the gust sinusoids.
const GUST_VARIANCE_SHARE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Synthetic,
    Ingested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindProfile {
    times: Vec<f64>,
    speeds: Vec<f64>,
    pub mean_target: f64,
    pub seed: u64,
    pub kind: ProfileKind,
}

impl WindProfile {
    /// Builds a profile from raw samples, checking ordering and positivity.
    pub fn from_samples(times: Vec<f64>, speeds: Vec<f64>) -> Result<Self> {
        if times.len() != speeds.len() {
            return Err(Error::Domain("times and speeds differ in length".into()));
        }
        if times.is_empty() {
            return Err(Error::Domain("wind profile has no samples".into()));
        }
        for i in 0..times.len() {
            if !(speeds[i] > 0.0 && speeds[i].is_finite()) {
                return Err(Error::Domain(format!(
                    "sample {i}: speed {} is not positive",
                    speeds[i]
                )));
            }
            if i > 0 && !(times[i] > times[i - 1]) {
                return Err(Error::Domain(format!("sample {i}: time is not increasing")));
            }
        }
        let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
        Ok(Self {
            times,
            speeds,
            mean_target: mean,
            seed: 0,
            kind: ProfileKind::Ingested,
        })
    }

    /// A constant-speed profile covering `[0, duration]`.
    pub fn constant(speed: f64, duration: f64) -> Result<Self> {
        let mut p = Self::from_samples(vec![0.0, duration], vec![speed, speed])?;
        p.kind = ProfileKind::Synthetic;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn t_first(&self) -> f64 {
        self.times[0]
    }

    pub fn t_last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn sample_mean(&self) -> f64 {
        self.speeds.iter().sum::<f64>() / self.speeds.len() as f64
    }

    pub fn sample_std(&self) -> f64 {
        let m = self.sample_mean();
        let var =
            self.speeds.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.speeds.len() as f64;
        var.sqrt()
    }

    /// Wind speed at `t` with zero-order hold.
    pub fn wind_at(&self, t: f64) -> Result<f64> {
        const SLACK: f64 = 1e-9;
        if !(t >= self.t_first() - SLACK && t <= self.t_last() + SLACK) {
            return Err(Error::Domain(format!(
                "t = {t} outside wind profile range [{}, {}]",
                self.t_first(),
                self.t_last()
            )));
        }
        let idx = self.times.partition_point(|&s| s <= t + SLACK);
        Ok(self.speeds[idx.saturating_sub(1)])
    }

    /// Writes the profile as a `t,v` CSV.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "t,v")?;
            for (t, v) in self.times.iter().zip(&self.speeds) {
                writeln!(w, "{},{}", sig9(*t), sig9(*v))?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }
}

/// Parameters of the synthetic wind generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindSpec {
    pub mean: f64,
    pub turbulence_intensity: f64,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
}

impl WindSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0 && self.mean.is_finite()) {
            return Err(Error::config("wind.mean", "must be > 0"));
        }
        if !(0.0..0.5).contains(&self.turbulence_intensity) {
            return Err(Error::config(
                "wind.turbulence_intensity",
                "must lie in [0, 0.5)",
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("wind.dt", "must be > 0"));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::config("wind.duration", "must be >= wind.dt"));
        }
        Ok(())
    }
}

/// Generates a seeded synthetic profile.
///
/// The fluctuation is the sum of three incommensurate sinusoids (periods 50,
/// 23 and 11 s, random phases) and white noise passed through two cascaded
/// first-order low-pass stages. The combined fluctuation is centred and scaled
/// to the requested turbulence intensity, then speeds are floored at
/// [`MIN_SYNTHETIC_SPEED`].
pub fn generate_wind(spec: &WindSpec) -> Result<WindProfile> {
    spec.validate()?;
    let n = (spec.duration / spec.dt + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * spec.dt).collect();

    if spec.turbulence_intensity == 0.0 {
        return Ok(WindProfile {
            times,
            speeds: vec![spec.mean; n],
            mean_target: spec.mean,
            seed: spec.seed,
            kind: ProfileKind::Synthetic,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phases: Vec<f64> = GUST_PERIODS
        .iter()
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect();
    let gusts: Vec<f64> = times
        .iter()
        .map(|&t| {
            GUST_PERIODS
                .iter()
                .zip(&phases)
                .map(|(period, phase)| (2.0 * PI * t / period + phase).sin())
                .sum()
        })
        .collect();

    let alpha = 1.0 - (-spec.dt / TURBULENCE_TIME_CONSTANT).exp();
    let (mut stage1, mut stage2) = (0.0f64, 0.0f64);
    let mut filter = |white: f64| {
        stage1 += alpha * (white - stage1);
        stage2 += alpha * (stage1 - stage2);
        stage2
    };
    // Run the filter past its start-up transient before t = 0.
    let burn_in = (5.0 * TURBULENCE_TIME_CONSTANT / spec.dt).ceil() as usize;
    for _ in 0..burn_in {
        filter(rng.sample(StandardNormal));
    }
    let noise: Vec<f64> = (0..n).map(|_| filter(rng.sample(StandardNormal))).collect();

    let gusts = standardize(&gusts);
    let noise = standardize(&noise);
    let share = GUST_VARIANCE_SHARE.sqrt();
    let rest = (1.0 - GUST_VARIANCE_SHARE).sqrt();
    let fluct: Vec<f64> = gusts
        .iter()
        .zip(&noise)
        .map(|(g, w)| share * g + rest * w)
        .collect();
    let fluct = standardize(&fluct);

    let sigma = spec.turbulence_intensity * spec.mean;
    let speeds = fluct
        .iter()
        .map(|f| (spec.mean + sigma * f).max(MIN_SYNTHETIC_SPEED))
        .collect();
    Ok(WindProfile {
        times,
        speeds,
        mean_target: spec.mean,
        seed: spec.seed,
        kind: ProfileKind::Synthetic,
    })
}

/// Zero mean, unit population variance. Constant input maps to zeros.
fn standardize(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std == 0.0 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - mean) / std).collect()
}

/// Reads a `t,v` CSV wind profile.
pub fn load_wind(path: &Path) -> Result<WindProfile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| Error::Ingest {
        row: 1,
        reason: e.to_string(),
    })?;
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "v" {
        return Err(Error::Ingest {
            row: 1,
            reason: format!(
                "expected header `t,v`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut times = Vec::new();
    let mut speeds = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Ingest {
            row,
            reason: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::Ingest {
                row,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Ingest {
                    row,
                    reason: format!("{what} `{s}` is not a finite number"),
                })
        };
        let t = parse(&rec[0], "t")?;
        let v = parse(&rec[1], "v")?;
        if v <= 0.0 {
            return Err(Error::Ingest {
                row,
                reason: format!("wind speed {v} must be > 0"),
            });
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Ingest {
                    row,
                    reason: format!("time {t} does not increase (previous {prev})"),
                });
            }
        }
        times.push(t);
        speeds.push(v);
    }
    if times.is_empty() {
        return Err(Error::Ingest {
            row: 2,
            reason: "no samples".into(),
        });
    }
    WindProfile::from_samples(times, speeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ti: f64, duration: f64, dt: f64, seed: u64) -> WindSpec {
        WindSpec {
            mean: 8.0,
            turbulence_intensity: ti,
            duration,
            dt,
            seed,
        }
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn zero_turbulence_is_constant() {
        let p = generate_wind(&spec(0.0, 10.0, 0.01, 9)).unwrap();
        assert_eq!(p.len(), 1001);
        assert!(p.speeds().iter().all(|&v| v == 8.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_wind(&spec(0.12, 600.0, 0.001, 42)).unwrap();
        let b = generate_wind(&spec(0.12, 600.0, 0.001, 42)).unwrap();
        assert_eq!(a, b);
        let c = generate_wind(&spec(0.12, 600.0, 0.001, 43)).unwrap();
        assert_ne!(a.speeds(), c.speeds());
    }

    #[test]
    fn synthetic_mean_and_intensity() {
        let p = generate_wind(&spec(0.12, 600.0, 0.001, 42)).unwrap();
        let m = p.sample_mean();
        assert!((7.6..=8.4).contains(&m), "mean {m}");
        assert!((m - 8.0).abs() <= 0.05 * 8.0);
        let ti = p.sample_std() / m;
        assert!((ti - 0.12).abs() < 0.01, "intensity {ti}");
        assert!(p.speeds().iter().all(|&v| v >= MIN_SYNTHETIC_SPEED));
    }

    #[test]
    fn floor_engages_at_high_intensity() {
        let p = WindSpec {
            mean: 1.0,
            turbulence_intensity: 0.49,
            duration: 200.0,
            dt: 0.01,
            seed: 3,
        };
        let p = generate_wind(&p).unwrap();
        assert!(p.speeds().iter().all(|&v| v >= MIN_SYNTHETIC_SPEED));
        assert!(p.speeds().contains(&MIN_SYNTHETIC_SPEED));
    }

    #[test]
    fn generator_rejects_bad_params() {
        assert!(generate_wind(&spec(0.5, 10.0, 0.01, 0)).is_err());
        assert!(generate_wind(&spec(-0.1, 10.0, 0.01, 0)).is_err());
        assert!(generate_wind(&spec(0.1, 0.001, 0.01, 0)).is_err());
        assert!(generate_wind(&spec(0.1, 10.0, 0.0, 0)).is_err());
        let mut s = spec(0.1, 10.0, 0.01, 0);
        s.mean = 0.0;
        assert!(matches!(generate_wind(&s), Err(Error::Config { key, .. }) if key == "wind.mean"));
    }

    #[test]
    fn load_two_rows() {
        let f = write_tmp("t,v\n0,8\n0.1,8.2\n");
        let p = load_wind(f.path()).unwrap();
        assert_eq!(p.times(), &[0.0, 0.1]);
        assert_eq!(p.speeds(), &[8.0, 8.2]);
        assert_eq!(p.kind, ProfileKind::Ingested);
    }

    #[test]
    fn load_rejects_negative_speed_with_row() {
        let f = write_tmp("t,v\n0,8\n0.1,-1\n");
        match load_wind(f.path()) {
            Err(Error::Ingest { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_rejects_non_monotonic_and_malformed() {
        let f = write_tmp("t,v\n0,8\n0.2,8\n0.1,8\n");
        assert!(matches!(
            load_wind(f.path()),
            Err(Error::Ingest { row: 4, .. })
        ));
        let f = write_tmp("t,v\n0,8\n0.1,abc\n");
        assert!(matches!(
            load_wind(f.path()),
            Err(Error::Ingest { row: 3, .. })
        ));
        let f = write_tmp("time,speed\n0,8\n");
        assert!(matches!(
            load_wind(f.path()),
            Err(Error::Ingest { row: 1, .. })
        ));
        let f = write_tmp("t,v\n0,8,1\n");
        assert!(matches!(
            load_wind(f.path()),
            Err(Error::Ingest { row: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let p = generate_wind(&spec(0.12, 30.0, 0.01, 7)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wind.csv");
        p.write_csv(&path).unwrap();
        let q = load_wind(&path).unwrap();
        assert_eq!(p.len(), q.len());
        for (a, b) in p.speeds().iter().zip(q.speeds()) {
            assert_eq!(sig9(*a), sig9(*b));
            assert!((a - b).abs() <= 1e-8 * a.abs());
        }
        for (a, b) in p.times().iter().zip(q.times()) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn zero_order_hold_lookup() {
        let p = WindProfile::from_samples(vec![0.0, 1.0, 2.0], vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(p.wind_at(0.0).unwrap(), 5.0);
        assert_eq!(p.wind_at(0.5).unwrap(), 5.0);
        assert_eq!(p.wind_at(1.0).unwrap(), 6.0);
        assert_eq!(p.wind_at(1.999).unwrap(), 6.0);
        assert_eq!(p.wind_at(2.0).unwrap(), 7.0);
        assert!(matches!(p.wind_at(2.5), Err(Error::Domain(_))));
        assert!(matches!(p.wind_at(-0.1), Err(Error::Domain(_))));
    }
}
