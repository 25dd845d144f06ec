//! Speed reference, filtered differentiation, sliding-mode control law and
//! the PID baseline.
//!
//! Sign conventions follow the plant in [`crate::plant`]: a positive
//! disturbance `d` brakes the rotor, so the equivalent control subtracts the
//! disturbance estimate.

mod pid;

pub use pid::{pid_torque, PidConfig, PidState};

use crate::error::{Error, Result};
use crate::plant::TurbineParams;

/// Gains of the PI sliding-surface controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcConfig {
    pub k_p: f64,
    pub k_i: f64,
    /// Linear reaching gain, 1/s.
    pub k1: f64,
    /// Switching gain.
    pub k2: f64,
    /// Boundary-layer width of the smoothed signum, `tanh(s / tanh_width)`.
    pub tanh_width: f64,
    pub torque_limit: Option<f64>,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            k_p: 1.0,
            k_i: 5.0,
            k1: 20.0,
            k2: 8.0,
            tanh_width: 0.001,
            torque_limit: None,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("smc.k_p", self.k_p),
            ("smc.k_i", self.k_i),
            ("smc.k1", self.k1),
            ("smc.k2", self.k2),
            ("smc.tanh_width", self.tanh_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be finite and > 0"));
            }
        }
        if let Some(limit) = self.torque_limit {
            if !(limit > 0.0) {
                return Err(Error::config("smc.torque_limit", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// ω_ref = λ_opt·v / R
pub fn reference_speed(v_wind: f64, params: &TurbineParams) -> Result<f64> {
    if !(v_wind > 0.0) {
        return Err(Error::Domain(format!(
            "wind speed must be positive, got {v_wind}"
        )));
    }
    Ok(params.lambda_opt * v_wind / params.radius)
}

/// Backward difference followed by a first-order low-pass:
/// `y ← y + (dt/τ)·(Δx/dt − y)`.
///
/// The first sample only seeds the difference; the output stays at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DerivativeFilter {
    prev: Option<f64>,
    output: f64,
}

impl DerivativeFilter {
    pub fn output(&self) -> f64 {
        self.output
    }

    #[must_use]
    pub fn advance(self, signal: f64, dt: f64, tau_f: f64) -> Self {
        let output = match self.prev {
            None => self.output,
            Some(prev) => {
                let raw = (signal - prev) / dt;
                self.output + dt / tau_f * (raw - self.output)
            }
        };
        Self {
            prev: Some(signal),
            output,
        }
    }
}

/// Filtered derivative of a sampled signal. Returns the derivative estimate
/// and the updated filter memory.
pub fn filtered_derivative(
    signal_now: f64,
    state: DerivativeFilter,
    dt: f64,
    tau_f: f64,
) -> (f64, DerivativeFilter) {
    let next = state.advance(signal_now, dt, tau_f);
    (next.output, next)
}

/// Reference speed and its filtered derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceState {
    pub omega_ref: f64,
    pub omega_ref_dot: f64,
    pub filter: DerivativeFilter,
}

impl ReferenceState {
    pub fn update(self, v_wind: f64, params: &TurbineParams, dt: f64, tau_f: f64) -> Result<Self> {
        let omega_ref = reference_speed(v_wind, params)?;
        let (omega_ref_dot, filter) = filtered_derivative(omega_ref, self.filter, dt, tau_f);
        Ok(Self {
            omega_ref,
            omega_ref_dot,
            filter,
        })
    }
}

/// Speed tracking error and the sliding variable built from it.
///
/// The surface is proportional-integral in the speed error,
/// `s = k_p·e + k_i·∫e`, so that `ds/dt = k_p·ė + k_i·e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    /// ω_rot − ω_ref, rad/s.
    pub e: f64,
    /// ∫e dt, rad.
    pub e_int: f64,
    /// Filtered dė/dt, rad/s².
    pub e_dot: f64,
    pub s: f64,
}

impl TrackingError {
    pub fn new(e: f64, e_int: f64, e_dot: f64, cfg: &SmcConfig) -> Self {
        Self {
            e,
            e_int,
            e_dot,
            s: sliding_variable(e_int, e, cfg),
        }
    }
}

/// `k_p·rate + k_i·level`. The simulator feeds the error integral as `level`
/// and the speed error as its rate.
pub fn sliding_variable(level: f64, rate: f64, cfg: &SmcConfig) -> f64 {
    cfg.k_p * rate + cfg.k_i * level
}

/// u_eq = τ_aero − Bt·ω − Jt·ω̇_ref + (Jt·k_i/k_p)·e − d̂
pub fn equivalent_control(
    tau_aero: f64,
    omega_rot: f64,
    omega_ref_dot: f64,
    e: f64,
    d_hat: f64,
    params: &TurbineParams,
    cfg: &SmcConfig,
) -> f64 {
    let j = params.j_total;
    tau_aero - params.b_total * omega_rot - j * omega_ref_dot + j * cfg.k_i / cfg.k_p * e - d_hat
}

/// u_sw = (Jt/k_p)·(k1·s + k2·tanh(s/w))
pub fn switching_control(s: f64, params: &TurbineParams, cfg: &SmcConfig) -> f64 {
    params.j_total / cfg.k_p * (cfg.k1 * s + cfg.k2 * (s / cfg.tanh_width).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcInputs {
    pub tau_aero: f64,
    pub omega_rot: f64,
    pub omega_ref_dot: f64,
    pub e: f64,
    pub s: f64,
    pub d_hat: f64,
}

/// Generator torque u_eq + u_sw, saturated at the configured limit.
pub fn smc_torque(inputs: &SmcInputs, params: &TurbineParams, cfg: &SmcConfig) -> f64 {
    let u = equivalent_control(
        inputs.tau_aero,
        inputs.omega_rot,
        inputs.omega_ref_dot,
        inputs.e,
        inputs.d_hat,
        params,
        cfg,
    ) + switching_control(inputs.s, params, cfg);
    match cfg.torque_limit {
        Some(limit) => u.clamp(-limit, limit),
        None => u,
    }
}

/// Jt·k2/k_p − |d̃|. Positive while the reaching condition holds.
pub fn stability_margin(d_tilde: f64, params: &TurbineParams, cfg: &SmcConfig) -> f64 {
    params.j_total * cfg.k2 / cfg.k_p - d_tilde.abs()
}
