//! Flat `key = value` scenario files.
//!
//! One assignment per line, keys carry a dotted section prefix
//! (`plant.`, `wind.`, `controller.`, `smc.`, `pid.`, `afdo.`,
//! `disturbance.`, `sim.`). `#` starts a comment. Unknown keys are rejected.
//! `sim.omega0` takes a speed in rad/s or `reference`, which starts the
//! rotor on the reference speed of the first wind sample.
//! Only `controller.kind`, `sim.dt`, `sim.t_end` and `sim.omega0` are
//! required; everything else falls back to the defaults of [`Scenario`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::afdo::{FuzzyBasisConfig, MembershipFamily};
use crate::error::{Error, Result};
use crate::integrate::Scheme;
use crate::sim::{ControllerKind, Disturbance, InitialSpeed, Scenario, WindSource};

pub const KNOWN_KEYS: &[&str] = &[
    "plant.rho",
    "plant.radius",
    "plant.j_total",
    "plant.b_total",
    "plant.lambda_opt",
    "plant.cp_opt",
    "plant.mu1",
    "plant.mu2",
    "plant.mu3",
    "plant.mu4",
    "plant.mu5",
    "plant.mu_x",
    "plant.omega_floor",
    "plant.beta",
    "wind.source",
    "wind.mean",
    "wind.turbulence_intensity",
    "wind.dt",
    "wind.path",
    "controller.kind",
    "controller.tau_f",
    "smc.k_p",
    "smc.k_i",
    "smc.k1",
    "smc.k2",
    "smc.tanh_width",
    "smc.torque_limit",
    "pid.kp",
    "pid.ki",
    "pid.kd",
    "pid.derivative_filter_tau",
    "pid.torque_limit",
    "afdo.m",
    "afdo.omega_min",
    "afdo.omega_max",
    "afdo.accel_min",
    "afdo.accel_max",
    "afdo.family",
    "afdo.sigma",
    "afdo.gamma_bar",
    "afdo.epsilon_bound",
    "afdo.divergence_limit",
    "disturbance.kind",
    "disturbance.d0",
    "disturbance.amp",
    "disturbance.period",
    "disturbance.t_on",
    "sim.dt",
    "sim.t_end",
    "sim.omega0",
    "sim.seed",
    "sim.integrator",
    "sim.record_every",
    "sim.transient",
    "sim.margin_abort_after",
];

const REQUIRED_KEYS: &[&str] = &["controller.kind", "sim.dt", "sim.t_end", "sim.omega0"];

/// Raw key/value pairs of a scenario file plus the directory relative paths
/// resolve against.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", i + 1), "expected `key = value`")
            })?;
            let key = key.trim();
            check_known(key)?;
            if values
                .insert(key.to_owned(), value.trim().to_owned())
                .is_some()
            {
                return Err(Error::config(
                    key,
                    format!("duplicate key on line {}", i + 1),
                ));
            }
        }
        Ok(Self {
            values,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse_str(&text, base)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
        let key = key.trim();
        check_known(key)?;
        self.values.insert(key.to_owned(), value.trim().to_owned());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::config(key, format!("`{v}` is not a number"))),
        }
    }

    fn opt_f64_or(&self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(default),
            Some("none") => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::config(key, format!("`{v}` is neither a number nor `none`"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    /// Builds and validates the scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        for key in REQUIRED_KEYS {
            if self.get(key).is_none() {
                return Err(Error::config(*key, "required key is missing"));
            }
        }
        let d = Scenario::default();
        let mut sc = d.clone();

        let p = &mut sc.params;
        p.rho = self.f64_or("plant.rho", p.rho)?;
        p.radius = self.f64_or("plant.radius", p.radius)?;
        p.j_total = self.f64_or("plant.j_total", p.j_total)?;
        p.b_total = self.f64_or("plant.b_total", p.b_total)?;
        p.lambda_opt = self.f64_or("plant.lambda_opt", p.lambda_opt)?;
        p.cp_opt = self.f64_or("plant.cp_opt", p.cp_opt)?;
        p.mu.mu1 = self.f64_or("plant.mu1", p.mu.mu1)?;
        p.mu.mu2 = self.f64_or("plant.mu2", p.mu.mu2)?;
        p.mu.mu3 = self.f64_or("plant.mu3", p.mu.mu3)?;
        p.mu.mu4 = self.f64_or("plant.mu4", p.mu.mu4)?;
        p.mu.mu5 = self.f64_or("plant.mu5", p.mu.mu5)?;
        p.mu.x = self.f64_or("plant.mu_x", p.mu.x)?;
        p.omega_floor = self.f64_or("plant.omega_floor", p.omega_floor)?;
        sc.beta = self.f64_or("plant.beta", d.beta)?;

        sc.wind = match self.get("wind.source").unwrap_or("synthetic") {
            "synthetic" => WindSource::Synthetic {
                mean: self.f64_or("wind.mean", 8.0)?,
                turbulence_intensity: self.f64_or("wind.turbulence_intensity", 0.12)?,
                dt: self.opt_f64_or("wind.dt", None)?,
            },
            "file" => {
                let rel = self.get("wind.path").ok_or_else(|| {
                    Error::config("wind.path", "required when wind.source = file")
                })?;
                WindSource::File(self.base_dir.join(rel))
            }
            other => {
                return Err(Error::config(
                    "wind.source",
                    format!("unknown source `{other}` (synthetic, file)"),
                ))
            }
        };

        sc.controller = self
            .get("controller.kind")
            .unwrap_or("smc_afdo")
            .parse::<ControllerKind>()
            .map_err(|e| Error::config("controller.kind", e))?;
        sc.tau_f = self.f64_or("controller.tau_f", d.tau_f)?;

        let smc = &mut sc.smc;
        smc.k_p = self.f64_or("smc.k_p", smc.k_p)?;
        smc.k_i = self.f64_or("smc.k_i", smc.k_i)?;
        smc.k1 = self.f64_or("smc.k1", smc.k1)?;
        smc.k2 = self.f64_or("smc.k2", smc.k2)?;
        smc.tanh_width = self.f64_or("smc.tanh_width", smc.tanh_width)?;
        smc.torque_limit = self.opt_f64_or("smc.torque_limit", smc.torque_limit)?;

        let pid = &mut sc.pid;
        pid.kp = self.f64_or("pid.kp", pid.kp)?;
        pid.ki = self.f64_or("pid.ki", pid.ki)?;
        pid.kd = self.f64_or("pid.kd", pid.kd)?;
        pid.derivative_filter_tau =
            self.f64_or("pid.derivative_filter_tau", pid.derivative_filter_tau)?;
        pid.torque_limit = self.opt_f64_or("pid.torque_limit", pid.torque_limit)?;

        let m = self.usize_or("afdo.m", 5)?;
        let omega_range = (
            self.f64_or("afdo.omega_min", 0.0)?,
            self.f64_or("afdo.omega_max", 80.0)?,
        );
        let accel_range = (
            self.f64_or("afdo.accel_min", -20.0)?,
            self.f64_or("afdo.accel_max", 20.0)?,
        );
        if m < 2 {
            return Err(Error::config(
                "afdo.m",
                "need at least 2 membership functions",
            ));
        }
        if !(omega_range.1 > omega_range.0) {
            return Err(Error::config(
                "afdo.omega_max",
                "must exceed afdo.omega_min",
            ));
        }
        if !(accel_range.1 > accel_range.0) {
            return Err(Error::config(
                "afdo.accel_max",
                "must exceed afdo.accel_min",
            ));
        }
        let mut basis = FuzzyBasisConfig::uniform(m, omega_range, accel_range);
        basis.family = match self.get("afdo.family").unwrap_or("gaussian") {
            "gaussian" => MembershipFamily::Gaussian,
            "triangular" => MembershipFamily::Triangular,
            other => {
                return Err(Error::config(
                    "afdo.family",
                    format!("unknown family `{other}` (gaussian, triangular)"),
                ))
            }
        };
        let afdo = &mut sc.afdo;
        afdo.basis = basis;
        afdo.sigma = self.f64_or("afdo.sigma", afdo.sigma)?;
        afdo.gamma_bar = self.f64_or("afdo.gamma_bar", afdo.gamma_bar)?;
        afdo.epsilon_bound = self.f64_or("afdo.epsilon_bound", afdo.epsilon_bound)?;
        afdo.divergence_limit = self.f64_or("afdo.divergence_limit", afdo.divergence_limit)?;

        sc.disturbance = match self.get("disturbance.kind").unwrap_or("none") {
            "none" => Disturbance::None,
            "constant" => Disturbance::Constant(self.f64_or("disturbance.d0", 0.0)?),
            "sinusoid" => Disturbance::Sinusoid {
                amp: self.f64_or("disturbance.amp", 0.0)?,
                period: self.f64_or("disturbance.period", 10.0)?,
            },
            "step" => Disturbance::Step {
                d0: self.f64_or("disturbance.d0", 0.0)?,
                t_on: self.f64_or("disturbance.t_on", 0.0)?,
            },
            other => {
                return Err(Error::config(
                    "disturbance.kind",
                    format!("unknown disturbance `{other}` (none, constant, sinusoid, step)"),
                ))
            }
        };

        sc.dt = self.f64_or("sim.dt", d.dt)?;
        sc.t_end = self.f64_or("sim.t_end", d.t_end)?;
        sc.omega0 = match self.get("sim.omega0") {
            Some("reference") | None => InitialSpeed::Reference,
            Some(v) => InitialSpeed::Fixed(v.parse::<f64>().map_err(|_| {
                Error::config(
                    "sim.omega0",
                    format!("`{v}` is neither a number nor `reference`"),
                )
            })?),
        };
        sc.seed = self.u64_or("sim.seed", d.seed)?;
        sc.plant_scheme = match self.get("sim.integrator").unwrap_or("rk4") {
            "rk4" => Scheme::Rk4,
            "euler" => Scheme::Euler,
            other => {
                return Err(Error::config(
                    "sim.integrator",
                    format!("unknown integrator `{other}` (rk4, euler)"),
                ))
            }
        };
        sc.record_every = self.usize_or("sim.record_every", d.record_every)?;
        sc.monitors.transient = self.f64_or("sim.transient", d.monitors.transient)?;
        sc.monitors.margin_abort_after =
            self.opt_f64_or("sim.margin_abort_after", d.monitors.margin_abort_after)?;

        sc.validate()?;
        Ok(sc)
    }
}

fn check_known(key: &str) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::config(key, "unknown key"))
    }
}

/// Reads a scenario file, applies `key=value` overrides and an optional seed.
pub fn parse_scenario(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Scenario> {
    let mut raw = RawConfig::load(path)?;
    for o in overrides {
        raw.set(o)?;
    }
    if let Some(seed) = seed {
        raw.set(&format!("sim.seed={seed}"))?;
    }
    raw.to_scenario()
}
