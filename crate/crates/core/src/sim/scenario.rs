use std::path::PathBuf;
use std::sync::Arc;

use crate::afdo::AfdoConfig;
use crate::control::{PidConfig, SmcConfig};
use crate::error::{Error, Result};
use crate::integrate::Scheme;
use crate::plant::TurbineParams;
use crate::wind::{generate_wind, load_wind, WindProfile, WindSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    /// Sliding-mode control with the adaptive fuzzy disturbance observer.
    SmcAfdo,
    /// Sliding-mode control without disturbance estimation.
    SmcPlain,
    Pid,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::SmcAfdo => "smc_afdo",
            ControllerKind::SmcPlain => "smc_plain",
            ControllerKind::Pid => "pid",
        }
    }

    pub fn is_smc(self) -> bool {
        !matches!(self, ControllerKind::Pid)
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smc_afdo" => Ok(ControllerKind::SmcAfdo),
            "smc_plain" => Ok(ControllerKind::SmcPlain),
            "pid" => Ok(ControllerKind::Pid),
            other => Err(format!(
                "unknown controller `{other}` (smc_afdo, smc_plain, pid)"
            )),
        }
    }
}

/// Injected lumped disturbance torque, N·m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Disturbance {
    #[default]
    None,
    Constant(f64),
    Sinusoid {
        amp: f64,
        period: f64,
    },
    Step {
        d0: f64,
        t_on: f64,
    },
}

impl Disturbance {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Disturbance::None => 0.0,
            Disturbance::Constant(d0) => d0,
            Disturbance::Sinusoid { amp, period } => {
                amp * (2.0 * std::f64::consts::PI * t / period).sin()
            }
            Disturbance::Step { d0, t_on } => {
                if t >= t_on {
                    d0
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Disturbance::None => Ok(()),
            Disturbance::Constant(d0) if d0.is_finite() => Ok(()),
            Disturbance::Sinusoid { amp, period } if amp.is_finite() && period > 0.0 => Ok(()),
            Disturbance::Step { d0, t_on } if d0.is_finite() && t_on >= 0.0 => Ok(()),
            _ => Err(Error::config("disturbance", "parameters out of range")),
        }
    }
}

/// Initial rotor speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpeed {
    /// Fixed value, rad/s.
    Fixed(f64),
    /// The reference speed of the first wind sample, so runs start on track.
    Reference,
}

impl InitialSpeed {
    /// Resolves the initial speed for a wind speed `v0` at t = 0.
    pub fn resolve(self, v0: f64, params: &TurbineParams) -> f64 {
        match self {
            InitialSpeed::Fixed(w) => w,
            InitialSpeed::Reference => params.lambda_opt * v0 / params.radius,
        }
    }
}

/// Where the wind profile comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum WindSource {
    /// Seeded synthetic profile over the run horizon. `dt` defaults to the
    /// simulation step.
    Synthetic {
        mean: f64,
        turbulence_intensity: f64,
        dt: Option<f64>,
    },
    File(PathBuf),
    Profile(Arc<WindProfile>),
}

/// Runtime monitor settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// Start-up window excluded from the stability-margin monitor, s.
    pub transient: f64,
    /// Abort an SMC run once the stability margin has been negative for this
    /// long without interruption after the transient. `None` only logs.
    pub margin_abort_after: Option<f64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            transient: 5.0,
            margin_abort_after: Some(1.0),
        }
    }
}

/// A complete closed-loop experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: TurbineParams,
    /// Blade pitch, degrees.
    pub beta: f64,
    pub wind: WindSource,
    pub controller: ControllerKind,
    pub smc: SmcConfig,
    pub pid: PidConfig,
    pub afdo: AfdoConfig,
    pub disturbance: Disturbance,
    /// Time constant of the differentiating filters, s.
    pub tau_f: f64,
    pub t_end: f64,
    pub dt: f64,
    pub omega0: InitialSpeed,
    pub seed: u64,
    pub plant_scheme: Scheme,
    /// Keep every n-th step in the run record.
    pub record_every: usize,
    pub monitors: MonitorConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            params: TurbineParams::table1(),
            beta: 0.0,
            wind: WindSource::Synthetic {
                mean: 8.0,
                turbulence_intensity: 0.12,
                dt: None,
            },
            controller: ControllerKind::SmcAfdo,
            smc: SmcConfig::default(),
            pid: PidConfig::default(),
            afdo: AfdoConfig::default(),
            disturbance: Disturbance::None,
            tau_f: 0.05,
            t_end: 600.0,
            dt: 1e-4,
            omega0: InitialSpeed::Reference,
            seed: 42,
            plant_scheme: Scheme::Rk4,
            record_every: 10,
            monitors: MonitorConfig::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.beta.is_finite() {
            return Err(Error::config("plant.beta", "must be finite"));
        }
        self.smc.validate()?;
        self.pid.validate()?;
        self.afdo.validate()?;
        self.disturbance.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("sim.dt", "must be > 0"));
        }
        if !(self.t_end >= 10.0 * self.dt && self.t_end.is_finite()) {
            return Err(Error::config("sim.t_end", "must be at least 10 * sim.dt"));
        }
        if let InitialSpeed::Fixed(w) = self.omega0 {
            if !(w > self.params.omega_floor && w.is_finite()) {
                return Err(Error::config("sim.omega0", "must exceed plant.omega_floor"));
            }
        }
        if !(self.tau_f > 0.0 && self.tau_f.is_finite()) {
            return Err(Error::config("controller.tau_f", "must be > 0"));
        }
        if self.record_every == 0 {
            return Err(Error::config("sim.record_every", "must be >= 1"));
        }
        if let WindSource::Synthetic {
            mean,
            turbulence_intensity,
            dt,
        } = self.wind
        {
            self.wind_spec(mean, turbulence_intensity, dt).validate()?;
        }
        Ok(())
    }

    /// Number of integration steps, floor(t_end / dt).
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt + 1e-9).floor() as u64
    }

    fn wind_spec(&self, mean: f64, turbulence_intensity: f64, dt: Option<f64>) -> WindSpec {
        WindSpec {
            mean,
            turbulence_intensity,
            duration: self.t_end,
            dt: dt.unwrap_or(self.dt),
            seed: self.seed,
        }
    }

    /// Materializes the wind profile this scenario refers to.
    pub fn wind_profile(&self) -> Result<Arc<WindProfile>> {
        match &self.wind {
            WindSource::Synthetic {
                mean,
                turbulence_intensity,
                dt,
            } => Ok(Arc::new(generate_wind(&self.wind_spec(
                *mean,
                *turbulence_intensity,
                *dt,
            ))?)),
            WindSource::File(path) => Ok(Arc::new(load_wind(path)?)),
            WindSource::Profile(p) => Ok(Arc::clone(p)),
        }
    }

    /// True when both scenarios share plant, wind, disturbance and horizon.
    pub fn same_environment(&self, other: &Scenario) -> bool {
        self.params == other.params
            && self.beta == other.beta
            && self.wind == other.wind
            && self.disturbance == other.disturbance
            && self.t_end == other.t_end
            && self.dt == other.dt
            && self.omega0 == other.omega0
            && self.seed == other.seed
    }
}
