use crate::error::{Error, Result};

/// PID baseline on the speed error `e = ω − ω_ref`; positive output is
/// generator (braking) torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Time constant of the derivative low-pass, s. Zero disables filtering.
    pub derivative_filter_tau: f64,
    pub torque_limit: Option<f64>,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self {
            kp: 50.0,
            ki: 20.0,
            kd: 0.0,
            derivative_filter_tau: 0.05,
            torque_limit: None,
        }
    }
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("pid.kp", self.kp),
            ("pid.ki", self.ki),
            ("pid.kd", self.kd),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be finite and >= 0"));
            }
        }
        if self.kp == 0.0 && self.ki == 0.0 && self.kd == 0.0 {
            return Err(Error::config(
                "pid.kp",
                "at least one PID gain must be nonzero",
            ));
        }
        if !(self.derivative_filter_tau >= 0.0) {
            return Err(Error::config("pid.derivative_filter_tau", "must be >= 0"));
        }
        if let Some(limit) = self.torque_limit {
            if !(limit > 0.0) {
                return Err(Error::config("pid.torque_limit", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Integrator and derivative-filter memory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub derivative: f64,
    prev_error: Option<f64>,
}

/// One controller update. The integral uses the trapezoid rule; the derivative
/// is a backward difference through a first-order low-pass. While the output
/// is saturated the integral is frozen if integrating would push further into
/// saturation.
pub fn pid_torque(e: f64, state: PidState, dt: f64, cfg: &PidConfig) -> (f64, PidState) {
    let prev = state.prev_error.unwrap_or(e);
    let integral = state.integral + 0.5 * dt * (prev + e);
    let raw = (e - prev) / dt;
    let blend = dt / (cfg.derivative_filter_tau + dt);
    let derivative = state.derivative + blend * (raw - state.derivative);

    let output = |i: f64| cfg.kp * e + cfg.ki * i + cfg.kd * derivative;
    let mut next = PidState {
        integral,
        derivative,
        prev_error: Some(e),
    };
    let mut u = output(integral);
    if let Some(limit) = cfg.torque_limit {
        if u.abs() > limit && (integral - state.integral) * u.signum() > 0.0 {
            next.integral = state.integral;
            u = output(state.integral);
        }
        u = u.clamp(-limit, limit);
    }
    (u, next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn run(cfg: &PidConfig, errors: impl IntoIterator<Item = f64>, dt: f64) -> (f64, PidState) {
        let mut state = PidState::default();
        let mut u = 0.0;
        for e in errors {
            (u, state) = pid_torque(e, state, dt, cfg);
        }
        (u, state)
    }

    #[test]
    fn zero_error_zero_output() {
        let (u, _) = run(&PidConfig::default(), std::iter::repeat_n(0.0, 100), 0.01);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn pure_proportional() {
        let cfg = PidConfig {
            kp: 3.0,
            ki: 0.0,
            kd: 0.0,
            ..PidConfig::default()
        };
        let (u, _) = run(&cfg, [2.0], 0.01);
        assert_eq!(u, 6.0);
    }

    #[test]
    fn constant_error_integrates_exactly() {
        let cfg = PidConfig {
            kp: 0.0,
            ki: 2.0,
            kd: 0.0,
            ..PidConfig::default()
        };
        let dt = 0.01;
        // First call seeds the trapezoid with the current sample, so n calls
        // integrate over n·dt.
        let (u, _) = run(&cfg, std::iter::repeat_n(1.0, 500), dt);
        assert_abs_diff_eq!(u, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn derivative_responds_to_ramp() {
        let cfg = PidConfig {
            kp: 0.0,
            ki: 0.0,
            kd: 1.0,
            derivative_filter_tau: 0.0,
            torque_limit: None,
        };
        let dt = 0.01;
        let (u, _) = run(&cfg, (0..10).map(|k| 0.5 * k as f64 * dt), dt);
        assert_abs_diff_eq!(u, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn anti_windup_freezes_integral() {
        let cfg = PidConfig {
            kp: 1.0,
            ki: 10.0,
            kd: 0.0,
            derivative_filter_tau: 0.0,
            torque_limit: Some(5.0),
        };
        let (u, state) = run(&cfg, std::iter::repeat_n(2.0, 1000), 0.01);
        assert_eq!(u, 5.0);
        // Integral stops once 2 + 10·I exceeds the limit.
        assert!(
            state.integral < 0.31,
            "integral wound up to {}",
            state.integral
        );
        // Recovery: a reversed error unwinds immediately.
        let (u, _) = pid_torque(-2.0, state, 0.01, &cfg);
        assert!(u < 5.0);
    }

    #[test]
    fn validation() {
        let zero = PidConfig {
            kp: 0.0,
            ki: 0.0,
            kd: 0.0,
            ..PidConfig::default()
        };
        assert!(zero.validate().is_err());
        let neg = PidConfig {
            ki: -1.0,
            ..PidConfig::default()
        };
        assert!(matches!(neg.validate(), Err(Error::Config { key, .. }) if key == "pid.ki"));
        assert!(PidConfig::default().validate().is_ok());
    }
}
