//! Fixed-step closed-loop simulation.
//!
//! Each step: wind lookup, reference speed, filtered derivatives, controller,
//! observer and parameter update (forward Euler), then the plant (RK4 by
//! default) with torque, wind and disturbance held over the step.

mod metrics;
mod record;
mod scenario;

pub use metrics::{
    energy_efficiency, mse, relative_improvement, std_dev, Comparison, MonitorSummary, RunMetrics,
};
pub use record::{RunRecord, RunRow, RECORD_HEADER};
pub use scenario::{
    ControllerKind, Disturbance, InitialSpeed, MonitorConfig, Scenario, WindSource,
};

use std::sync::Arc;

use crate::afdo::{
    adapt_theta, disturbance_estimate, fuzzy_basis_into, observer_step, zeta_condition, AfdoState,
};
use crate::control::{
    pid_torque, sliding_variable, smc_torque, stability_margin, DerivativeFilter, PidState,
    ReferenceState, SmcInputs, TrackingError,
};
use crate::error::{Error, Result};
use crate::plant::{
    aerodynamic_torque, power_coefficient, rotor_derivative, tip_speed_ratio, PlantState,
};
use crate::wind::WindProfile;

/// Everything that evolves during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: u64,
    pub t: f64,
    pub omega_rot: f64,
    /// ∫(ω_rot − ω_ref) dt
    pub e_int: f64,
    pub reference: ReferenceState,
    pub omega_filter: DerivativeFilter,
    pub error_filter: DerivativeFilter,
    pub pid: PidState,
    pub afdo: Option<AfdoState>,
}

impl SimState {
    /// Start state for `omega0`, the resolved initial rotor speed.
    pub fn initial(scenario: &Scenario, omega0: f64) -> Self {
        let afdo = (scenario.controller == ControllerKind::SmcAfdo)
            .then(|| AfdoState::new(omega0, &scenario.afdo));
        Self {
            step: 0,
            t: 0.0,
            omega_rot: omega0,
            e_int: 0.0,
            reference: ReferenceState::default(),
            omega_filter: DerivativeFilter::default(),
            error_filter: DerivativeFilter::default(),
            pid: PidState::default(),
            afdo,
        }
    }
}

/// Closed-loop runner bound to one scenario and wind profile.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    wind: &'a WindProfile,
    state: SimState,
    psi: Vec<f64>,
    monitors: MonitorSummary,
    prev_s: Option<f64>,
    negative_margin_since: Option<f64>,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario, wind: &'a WindProfile) -> Result<Self> {
        scenario.validate()?;
        if wind.t_first() > 0.0 || wind.t_last() < scenario.t_end - 1e-9 {
            return Err(Error::config(
                "wind",
                format!(
                    "profile covers [{}, {}] but the run needs [0, {}]",
                    wind.t_first(),
                    wind.t_last(),
                    scenario.t_end
                ),
            ));
        }
        let omega0 = scenario
            .omega0
            .resolve(wind.wind_at(0.0)?, &scenario.params);
        if !(omega0 > scenario.params.omega_floor && omega0.is_finite()) {
            return Err(Error::config(
                "sim.omega0",
                "initial speed must exceed plant.omega_floor",
            ));
        }
        Ok(Self {
            scenario,
            wind,
            state: SimState::initial(scenario, omega0),
            psi: Vec::with_capacity(scenario.afdo.basis.dimension()),
            monitors: MonitorSummary {
                min_stability_margin: f64::INFINITY,
                v1_outside_steps: 0,
                v1_increase_steps: 0,
                zeta_cond_steps: 0,
                total_steps: 0,
                max_abs_d_hat_after_10s: 0.0,
            },
            prev_s: None,
            negative_margin_since: None,
        })
    }

    /// Replaces the current state, e.g. to start from a prepared equilibrium.
    pub fn with_state(mut self, state: SimState) -> Self {
        self.state = state;
        self
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn monitors(&self) -> &MonitorSummary {
        &self.monitors
    }

    /// Evaluates sensors, controller and observer at the current state and
    /// returns the row plus what is needed to advance.
    fn observe(&mut self) -> Result<(RunRow, StepInputs)> {
        let sc = self.scenario;
        let params = &sc.params;
        let dt = sc.dt;
        let st = &mut self.state;
        let t = st.t;

        let v = self.wind.wind_at(t)?;
        st.reference = st.reference.update(v, params, dt, sc.tau_f)?;
        let omega = st.omega_rot;
        st.omega_filter = st.omega_filter.advance(omega, dt, sc.tau_f);
        let e = omega - st.reference.omega_ref;
        st.error_filter = st.error_filter.advance(e, dt, sc.tau_f);
        let tracking = TrackingError::new(e, st.e_int, st.error_filter.output(), &sc.smc);

        let tau_aero = aerodynamic_torque(omega, v, sc.beta, params)?;
        let d = sc.disturbance.at(t);

        let (d_hat, zeta) = match &st.afdo {
            Some(afdo) => {
                fuzzy_basis_into(
                    [omega, st.omega_filter.output()],
                    &sc.afdo.basis,
                    &mut self.psi,
                )?;
                (
                    disturbance_estimate(&afdo.theta_hat, &self.psi)?,
                    omega - afdo.z,
                )
            }
            None => (0.0, 0.0),
        };

        let tau_gen = match sc.controller {
            ControllerKind::SmcAfdo | ControllerKind::SmcPlain => smc_torque(
                &SmcInputs {
                    tau_aero,
                    omega_rot: omega,
                    omega_ref_dot: st.reference.omega_ref_dot,
                    e,
                    s: tracking.s,
                    d_hat,
                },
                params,
                &sc.smc,
            ),
            ControllerKind::Pid => {
                let (u, pid) = pid_torque(e, st.pid, dt, &sc.pid);
                st.pid = pid;
                u
            }
        };

        let margin = stability_margin(d_hat - d, params, &sc.smc);
        let zeta_ok =
            st.afdo.is_some() && zeta_condition(zeta, sc.afdo.epsilon_bound, sc.afdo.sigma);
        let lambda = tip_speed_ratio(omega, v, params)?;
        let cp = power_coefficient(lambda, sc.beta, params)?;

        let row = RunRow {
            t,
            v_wind: v,
            omega_ref: st.reference.omega_ref,
            omega_rot: omega,
            e,
            s: tracking.s,
            tau_gen,
            tau_aero,
            d,
            d_hat,
            zeta,
            lambda,
            cp,
            p_gen: tau_gen * omega,
            p_aero_opt: params.optimal_power(v),
            stability_margin: margin,
            zeta_cond: zeta_ok,
        };
        if !row.is_finite() {
            return Err(Error::Integration { step: st.step, t });
        }
        Ok((
            row,
            StepInputs {
                v,
                d,
                d_hat,
                tau_aero,
                tau_gen,
            },
        ))
    }

    fn update_monitors(&mut self, row: &RunRow) -> Result<()> {
        let sc = self.scenario;
        let m = &mut self.monitors;
        m.total_steps += 1;
        if row.zeta_cond {
            m.zeta_cond_steps += 1;
        }
        if row.t >= 10.0 {
            m.max_abs_d_hat_after_10s = m.max_abs_d_hat_after_10s.max(row.d_hat.abs());
        }
        if let Some(prev) = self.prev_s {
            if prev.abs() > sc.smc.tanh_width {
                m.v1_outside_steps += 1;
                if row.s * row.s > prev * prev {
                    m.v1_increase_steps += 1;
                }
            }
        }
        self.prev_s = Some(row.s);

        if row.t >= sc.monitors.transient {
            m.min_stability_margin = m.min_stability_margin.min(row.stability_margin);
            if sc.controller.is_smc() {
                if row.stability_margin < 0.0 {
                    let since = *self.negative_margin_since.get_or_insert(row.t);
                    if let Some(limit) = sc.monitors.margin_abort_after {
                        if row.t - since >= limit {
                            return Err(Error::Monitor {
                                monitor: "stability_margin",
                                t: row.t,
                                reason: format!(
                                    "Jt·k2/k_p − |d̃| has been negative since t = {since:.3} s (now {:.4})",
                                    row.stability_margin
                                ),
                            });
                        }
                    }
                } else {
                    self.negative_margin_since = None;
                }
            }
        }
        Ok(())
    }

    /// Advances observer, parameters and plant by one step.
    fn advance(&mut self, inputs: &StepInputs) -> Result<()> {
        let sc = self.scenario;
        let params = &sc.params;
        let dt = sc.dt;
        let st = &mut self.state;

        if let Some(afdo) = &st.afdo {
            let next = observer_step(
                afdo,
                st.omega_rot,
                inputs.tau_aero,
                inputs.tau_gen,
                inputs.d_hat,
                params,
                dt,
            );
            let next = adapt_theta(&next, &self.psi, dt);
            let norm = next.theta_norm();
            if !(norm <= sc.afdo.divergence_limit) {
                return Err(Error::Monitor {
                    monitor: "theta_divergence",
                    t: st.t,
                    reason: format!("‖θ̂‖ = {norm:.3e} exceeds {:.3e}", sc.afdo.divergence_limit),
                });
            }
            st.afdo = Some(next);
        }

        let mut aero_error = None;
        let omega_next = sc.plant_scheme.step(st.t, st.omega_rot, dt, |t, w| {
            let tau_aero = match aerodynamic_torque(w, inputs.v, sc.beta, params) {
                Ok(tau) => tau,
                Err(e) => {
                    aero_error.get_or_insert(e);
                    f64::NAN
                }
            };
            rotor_derivative(
                &PlantState { omega_rot: w, t },
                tau_aero,
                inputs.tau_gen,
                inputs.d,
                params,
            )
        });
        if let Some(e) = aero_error {
            return Err(e);
        }
        if !omega_next.is_finite() {
            return Err(Error::Integration {
                step: st.step,
                t: st.t,
            });
        }

        st.e_int += dt * (st.omega_rot - st.reference.omega_ref);
        st.omega_rot = omega_next;
        st.step += 1;
        st.t = st.step as f64 * dt;
        Ok(())
    }

    /// Observes the current state and integrates one step.
    pub fn step(&mut self) -> Result<RunRow> {
        let (row, inputs) = self.observe()?;
        self.update_monitors(&row)?;
        self.advance(&inputs)?;
        Ok(row)
    }

    /// Runs to `t_end`, keeping every `record_every`-th row and the final one.
    pub fn run_to_end(mut self) -> Result<(RunRecord, MonitorSummary)> {
        let n = self.scenario.steps();
        let every = self.scenario.record_every as u64;
        let mut rows = Vec::with_capacity((n / every + 2) as usize);
        for k in 0..n {
            let row = self.step()?;
            if k.is_multiple_of(every) {
                rows.push(row);
            }
        }
        let (row, _) = self.observe()?;
        self.update_monitors(&row)?;
        if n.is_multiple_of(every) {
            rows.push(row);
        }
        Ok((RunRecord { rows }, self.monitors))
    }
}

struct StepInputs {
    v: f64,
    d: f64,
    d_hat: f64,
    tau_aero: f64,
    tau_gen: f64,
}

/// Runs a scenario against a prepared wind profile.
pub fn run_with_profile(
    scenario: &Scenario,
    wind: &WindProfile,
) -> Result<(RunRecord, RunMetrics)> {
    let (record, monitors) = Simulation::new(scenario, wind)?.run_to_end()?;
    let metrics = RunMetrics::from_record(&record, scenario.params.lambda_opt, monitors)?;
    Ok((record, metrics))
}

/// Builds the wind profile and runs the scenario.
pub fn run(scenario: &Scenario) -> Result<(RunRecord, RunMetrics)> {
    scenario.validate()?;
    let wind = scenario.wind_profile()?;
    run_with_profile(scenario, &wind)
}

/// Runs candidate `a` and baseline `b` on a shared environment.
pub fn compare(a: &Scenario, b: &Scenario) -> Result<Comparison> {
    if !a.same_environment(b) {
        return Err(Error::Comparison(
            "scenarios differ in plant, wind, disturbance or horizon".into(),
        ));
    }
    a.validate()?;
    b.validate()?;
    let wind = a.wind_profile()?;
    let (ra, rb) = rayon::join(|| run_with_profile(a, &wind), || run_with_profile(b, &wind));
    Ok(Comparison::new(ra?.1, rb?.1))
}

/// Shares one profile across scenarios that would otherwise regenerate it.
pub fn with_shared_wind(scenario: &Scenario, wind: Arc<WindProfile>) -> Scenario {
    Scenario {
        wind: WindSource::Profile(wind),
        ..scenario.clone()
    }
}

/// Recomputes the sliding variable from recorded rows of a full-resolution run.
pub fn recompute_sliding_variable(record: &RunRecord, scenario: &Scenario) -> Vec<f64> {
    let mut e_int = 0.0;
    record
        .rows
        .iter()
        .map(|r| {
            let s = sliding_variable(e_int, r.e, &scenario.smc);
            e_int += scenario.dt * r.e;
            s
        })
        .collect()
}
