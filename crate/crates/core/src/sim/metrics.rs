use crate::error::{Error, Result};
use crate::sim::record::RunRecord;

/// Mean of squares.
pub fn mse(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Domain("mean square error of an empty series".into()));
    }
    Ok(series.iter().map(|x| x * x).sum::<f64>() / series.len() as f64)
}

/// Population standard deviation (divisor N).
pub fn std_dev(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::Domain(
            "standard deviation needs at least 2 samples".into(),
        ));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    Ok((series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// Generated energy over optimal aerodynamic energy, both integrated with the
/// trapezoid rule over the recorded rows.
pub fn energy_efficiency(record: &RunRecord) -> Result<f64> {
    if record.len() < 2 {
        return Err(Error::Domain(
            "energy efficiency needs at least 2 rows".into(),
        ));
    }
    let t = record.column(|r| r.t);
    let generated = trapezoid(&t, &record.column(|r| r.p_gen));
    let available = trapezoid(&t, &record.column(|r| r.p_aero_opt));
    if available == 0.0 {
        return Err(Error::Domain("optimal aerodynamic energy is zero".into()));
    }
    Ok(generated / available)
}

/// Online monitor results gathered at every integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSummary {
    /// Smallest stability margin after the transient window.
    pub min_stability_margin: f64,
    /// Steps that started outside the boundary layer |s| ≤ tanh_width.
    pub v1_outside_steps: u64,
    /// Of those, steps where s²/2 increased.
    pub v1_increase_steps: u64,
    /// Steps where the ζ condition held.
    pub zeta_cond_steps: u64,
    pub total_steps: u64,
    /// Largest |d̂| from 10 s onwards.
    pub max_abs_d_hat_after_10s: f64,
}

impl MonitorSummary {
    /// Share of outside-boundary-layer steps where V1 did not increase.
    pub fn v1_nonincreasing_fraction(&self) -> f64 {
        if self.v1_outside_steps == 0 {
            1.0
        } else {
            1.0 - self.v1_increase_steps as f64 / self.v1_outside_steps as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Mean square speed-tracking error, (rad/s)².
    pub mse_speed: f64,
    /// Mean square of λ − λ_opt.
    pub mse_lambda: f64,
    /// Population standard deviation of the generator torque, N·m.
    pub torque_std: f64,
    pub energy_efficiency: f64,
    /// Time after which |e| stays within 2% of ω_ref, s.
    pub settle_time: f64,
    pub monitors: MonitorSummary,
}

impl RunMetrics {
    pub fn from_record(
        record: &RunRecord,
        lambda_opt: f64,
        monitors: MonitorSummary,
    ) -> Result<Self> {
        let settle_time = record
            .rows
            .iter()
            .rposition(|r| r.e.abs() > 0.02 * r.omega_ref.abs())
            .map(|i| record.rows.get(i + 1).map_or(record.rows[i].t, |r| r.t))
            .unwrap_or(0.0);
        Ok(Self {
            mse_speed: mse(&record.column(|r| r.e))?,
            mse_lambda: mse(&record.column(|r| r.lambda - lambda_opt))?,
            torque_std: std_dev(&record.column(|r| r.tau_gen))?,
            energy_efficiency: energy_efficiency(record)?,
            settle_time,
            monitors,
        })
    }

    /// `key = value` lines written to `metrics.txt`.
    pub fn to_key_values(&self) -> String {
        format!(
            "mse_speed = {}\nmse_lambda = {}\ntorque_std = {}\nenergy_efficiency = {}\nmin_stability_margin = {}\nsettle_time = {}\nv1_nonincreasing_fraction = {}\n",
            self.mse_speed,
            self.mse_lambda,
            self.torque_std,
            self.energy_efficiency,
            self.monitors.min_stability_margin,
            self.settle_time,
            self.monitors.v1_nonincreasing_fraction(),
        )
    }
}

/// (baseline − candidate) / baseline. Zero when both are zero.
pub fn relative_improvement(candidate: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        if candidate == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (baseline - candidate) / baseline
    }
}

/// Fixed-point for ordinary magnitudes, scientific for tiny ones.
fn cell(x: f64) -> String {
    if x == 0.0 || x.abs() >= 1e-3 {
        format!("{x:.6}")
    } else {
        format!("{x:.6e}")
    }
}

/// Paired metrics of candidate `a` against baseline `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub a: RunMetrics,
    pub b: RunMetrics,
    pub speed_mse_improvement: f64,
    pub lambda_mse_improvement: f64,
    /// Relative change of the torque standard deviation, positive when `a` is smoother.
    pub torque_std_change: f64,
    /// Efficiency difference a − b, as a fraction.
    pub energy_gain: f64,
}

impl Comparison {
    pub fn new(a: RunMetrics, b: RunMetrics) -> Self {
        Self {
            a,
            b,
            speed_mse_improvement: relative_improvement(a.mse_speed, b.mse_speed),
            lambda_mse_improvement: relative_improvement(a.mse_lambda, b.mse_lambda),
            torque_std_change: relative_improvement(a.torque_std, b.torque_std),
            energy_gain: a.energy_efficiency - b.energy_efficiency,
        }
    }

    /// Side-by-side table: four metric rows, then the two improvement rows.
    pub fn table(&self, label_a: &str, label_b: &str) -> String {
        let mut out = format!("{:<20} {:>16} {:>16}\n", "metric", label_a, label_b);
        for (name, x, y) in [
            ("mse_speed", self.a.mse_speed, self.b.mse_speed),
            ("mse_lambda", self.a.mse_lambda, self.b.mse_lambda),
            ("torque_std", self.a.torque_std, self.b.torque_std),
            (
                "energy_efficiency",
                self.a.energy_efficiency,
                self.b.energy_efficiency,
            ),
        ] {
            out.push_str(&format!("{name:<20} {:>16} {:>16}\n", cell(x), cell(y)));
        }
        out.push_str(&format!(
            "speed-MSE improvement: {:.1}%\n",
            100.0 * self.speed_mse_improvement
        ));
        out.push_str(&format!(
            "lambda-MSE improvement: {:.1}%\n",
            100.0 * self.lambda_mse_improvement
        ));
        out
    }
}
