//! Rotor aerodynamics and drivetrain dynamics.
//!
//! The simulated plant is the one-mass reduction of the two-mass drivetrain:
//!
//! ```text
//! Jt * dω/dt = τ_aero − Bt·ω − τ_gen − d
//! ```
//!
//! where `τ_gen` is the generator torque reflected to the low-speed shaft and
//! `d` is the lumped disturbance. Shaft stiffness is neglected. The two-mass
//! parameters are kept so the reduction identities can be checked.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Betz limit, the upper bound on any physical power coefficient.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

/// Coefficients of the empirical power-coefficient surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpCoefficients {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    /// Exponent applied to the pitch angle in the μ3 term.
    pub x: f64,
}

impl Default for CpCoefficients {
    fn default() -> Self {
        Self {
            mu1: 110.23,
            mu2: 0.4234,
            mu3: 0.00146,
            mu4: 9.636,
            mu5: 18.4,
            x: 2.14,
        }
    }
}

/// Physical constants of the reduced (one-mass) turbine model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineParams {
    /// Air density, kg/m³.
    pub rho: f64,
    /// Rotor radius, m.
    pub radius: f64,
    /// Lumped inertia on the low-speed side, kg·m².
    pub j_total: f64,
    /// Lumped viscous damping, N·m·s/rad.
    pub b_total: f64,
    pub lambda_opt: f64,
    /// Peak power coefficient used for the reference power in the energy metric.
    pub cp_opt: f64,
    pub mu: CpCoefficients,
    /// Lower bound on the rotor speed used as divisor in the torque formula, rad/s.
    pub omega_floor: f64,
}

impl TurbineParams {
    /// Maximum of the Cp surface at zero pitch, located by a golden-section
    /// search with the default coefficients.
    pub const SURFACE_CP_MAX: f64 = 0.441_199_381;

    /// Small wind turbine used for the Region-2 experiments.
    pub fn table1() -> Self {
        Self {
            rho: 1.29,
            radius: 1.26,
            j_total: 1.5,
            b_total: 0.0,
            lambda_opt: 6.9,
            cp_opt: Self::SURFACE_CP_MAX,
            mu: CpCoefficients::default(),
            omega_floor: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("plant.rho", self.rho)?;
        positive("plant.radius", self.radius)?;
        positive("plant.j_total", self.j_total)?;
        if !(self.b_total >= 0.0 && self.b_total.is_finite()) {
            return Err(Error::config("plant.b_total", "must be finite and >= 0"));
        }
        positive("plant.lambda_opt", self.lambda_opt)?;
        if !(self.cp_opt > 0.0 && self.cp_opt <= BETZ_LIMIT) {
            return Err(Error::config(
                "plant.cp_opt",
                format!("must lie in (0, {BETZ_LIMIT:.3}] (Betz limit)"),
            ));
        }
        positive("plant.omega_floor", self.omega_floor)?;
        let mu = &self.mu;
        for (key, v) in [
            ("plant.mu1", mu.mu1),
            ("plant.mu2", mu.mu2),
            ("plant.mu3", mu.mu3),
            ("plant.mu4", mu.mu4),
            ("plant.mu5", mu.mu5),
            ("plant.mu_x", mu.x),
        ] {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Swept area times half the air density, ½ρπR².
    fn half_rho_area(&self) -> f64 {
        0.5 * self.rho * PI * self.radius * self.radius
    }

    /// Aerodynamic power available at the optimal operating point, W.
    pub fn optimal_power(&self, v_wind: f64) -> f64 {
        self.half_rho_area() * self.cp_opt * v_wind.powi(3)
    }
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self::table1()
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, "must be finite and > 0"))
    }
}

/// Parameters of the two-mass drivetrain (rotor, gearbox, generator).
///
/// Only used to check the one-mass reduction; stiffness terms are carried
/// for completeness but do not enter [`TwoMassParams::rigid_acceleration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoMassParams {
    pub j_rot: f64,
    pub j_gen: f64,
    pub b_rot: f64,
    pub b_gen: f64,
    pub k_rot: f64,
    pub k_gen: f64,
    /// Gearbox ratio ω_gen / ω_rot.
    pub eta: f64,
}

impl TwoMassParams {
    pub fn validate(&self) -> Result<()> {
        positive("two_mass.j_rot", self.j_rot)?;
        positive("two_mass.j_gen", self.j_gen)?;
        positive("two_mass.eta", self.eta)?;
        Ok(())
    }

    /// Jt = J_rot + η²·J_gen
    pub fn j_total(&self) -> f64 {
        self.j_rot + self.eta * self.eta * self.j_gen
    }

    /// Bt = B_rot + η²·B_gen
    pub fn b_total(&self) -> f64 {
        self.b_rot + self.eta * self.eta * self.b_gen
    }

    /// Generator torque reflected onto the low-speed shaft.
    pub fn reflected_torque(&self, tau_elec: f64) -> f64 {
        self.eta * tau_elec
    }

    /// Solves the rotor and generator equations of a rigid shaft for the rotor
    /// acceleration and the low-speed shaft torque.
    ///
    /// Unknowns are `a = dω_rot/dt` and `τ_low`, with `ω_gen = η·ω_rot`,
    /// `dω_gen/dt = η·a` and `τ_high = τ_low / η`:
    ///
    /// ```text
    /// J_rot·a   + τ_low   = τ_aero − B_rot·ω_rot
    /// J_gen·η·a − τ_low/η = −τ_elec − B_gen·η·ω_rot
    /// ```
    pub fn rigid_acceleration(&self, omega_rot: f64, tau_aero: f64, tau_elec: f64) -> (f64, f64) {
        let (a11, a12) = (self.j_rot, 1.0);
        let (a21, a22) = (self.j_gen * self.eta, -1.0 / self.eta);
        let b1 = tau_aero - self.b_rot * omega_rot;
        let b2 = -tau_elec - self.b_gen * self.eta * omega_rot;
        let det = a11 * a22 - a12 * a21;
        let accel = (b1 * a22 - a12 * b2) / det;
        let tau_low = (a11 * b2 - a21 * b1) / det;
        (accel, tau_low)
    }

    /// One-mass parameters with the lumped inertia and damping of this drivetrain.
    pub fn reduce(&self, base: &TurbineParams) -> TurbineParams {
        TurbineParams {
            j_total: self.j_total(),
            b_total: self.b_total(),
            ..*base
        }
    }
}

/// State of the one-mass plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub omega_rot: f64,
    pub t: f64,
}

/// λ = ω·R / v
pub fn tip_speed_ratio(omega_rot: f64, v_wind: f64, params: &TurbineParams) -> Result<f64> {
    if !(v_wind > 0.0) {
        return Err(Error::Domain(format!(
            "wind speed must be positive, got {v_wind}"
        )));
    }
    Ok(omega_rot * params.radius / v_wind)
}

/// Auxiliary term φ(λ, β) of the power-coefficient surface.
fn phi(lambda: f64, beta: f64) -> Result<f64> {
    let b2 = beta * beta;
    let b3 = b2 * beta;
    let num = b3 + 6e-6 * beta - 3e-3 * lambda + 1.0;
    let den = -0.02 * b2 * b2 + lambda * b3 - 0.02 * beta + lambda;
    if den.abs() < 1e-12 {
        return Err(Error::Singularity { lambda, beta });
    }
    Ok(num / den)
}

/// Power coefficient Cp(λ, β), β in degrees. Negative values are clamped to 0.
pub fn power_coefficient(lambda: f64, beta: f64, params: &TurbineParams) -> Result<f64> {
    let mu = &params.mu;
    let pitch_power = if beta == 0.0 {
        0.0
    } else if beta < 0.0 && mu.x.fract() != 0.0 {
        return Err(Error::Domain(format!(
            "negative pitch {beta} with non-integer exponent {}",
            mu.x
        )));
    } else {
        beta.powf(mu.x)
    };
    let phi = phi(lambda, beta)?;
    let cp = (mu.mu1 * phi - mu.mu2 * beta - mu.mu3 * pitch_power - mu.mu4) * (-mu.mu5 * phi).exp();
    Ok(cp.max(0.0))
}

/// τ_aero = ρπR²·Cp(λ, β)·v³ / (2·max(ω, ω_floor)); λ uses the unfloored ω.
pub fn aerodynamic_torque(
    omega_rot: f64,
    v_wind: f64,
    beta: f64,
    params: &TurbineParams,
) -> Result<f64> {
    let lambda = tip_speed_ratio(omega_rot, v_wind, params)?;
    let cp = power_coefficient(lambda, beta, params)?;
    let divisor = omega_rot.max(params.omega_floor);
    Ok(params.half_rho_area() * cp * v_wind.powi(3) / divisor)
}

/// dω/dt of the one-mass plant.
pub fn rotor_derivative(
    state: &PlantState,
    tau_aero: f64,
    tau_gen: f64,
    d: f64,
    params: &TurbineParams,
) -> f64 {
    let j = params.j_total;
    tau_aero / j - params.b_total / j * state.omega_rot - tau_gen / j - d / j
}

/// Grid maximum of Cp over λ at a fixed pitch. Singular grid points are skipped.
pub fn cp_argmax(
    lambda_min: f64,
    lambda_max: f64,
    lambda_step: f64,
    beta: f64,
    params: &TurbineParams,
) -> Option<(f64, f64)> {
    let n = ((lambda_max - lambda_min) / lambda_step + 1e-9).floor() as u64;
    (0..=n)
        .filter_map(|i| {
            let lambda = lambda_min + i as f64 * lambda_step;
            power_coefficient(lambda, beta, params)
                .ok()
                .map(|cp| (lambda, cp))
        })
        .fold(None, |best: Option<(f64, f64)>, (l, cp)| match best {
            Some((_, best_cp)) if best_cp >= cp => best,
            _ => Some((l, cp)),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::rk4_step;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p() -> TurbineParams {
        TurbineParams::table1()
    }

    #[test]
    fn tip_speed_ratio_examples() {
        assert_eq!(tip_speed_ratio(0.0, 8.0, &p()).unwrap(), 0.0);
        assert_abs_diff_eq!(
            tip_speed_ratio(43.8095, 8.0, &p()).unwrap(),
            6.9,
            epsilon = 1e-4
        );
        let v = 6.9 * 1.26;
        assert_abs_diff_eq!(
            tip_speed_ratio(v / 1.26, v, &p()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            tip_speed_ratio(1.0, 0.0, &p()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            tip_speed_ratio(1.0, -2.0, &p()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cp_at_optimal_lambda() {
        // Independent evaluation (numpy): Cp(6.9, 0) = 0.441197413...
        let cp = power_coefficient(6.9, 0.0, &p()).unwrap();
        assert_abs_diff_eq!(cp, 0.441_197_413, epsilon = 1e-8);
    }

    #[test]
    fn cp_singular_at_origin() {
        assert!(matches!(
            power_coefficient(0.0, 0.0, &p()),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn cp_negative_pitch_rejected() {
        assert!(matches!(
            power_coefficient(6.9, -1.0, &p()),
            Err(Error::Domain(_))
        ));
        let mut q = p();
        q.mu.x = 2.0;
        assert!(power_coefficient(6.9, -0.5, &q).is_ok());
    }

    #[test]
    fn cp_clamped_to_zero() {
        // At λ = 30, μ1·φ < μ4 and the raw surface is negative.
        assert_eq!(power_coefficient(30.0, 0.0, &p()).unwrap(), 0.0);
        assert_eq!(
            aerodynamic_torque(30.0 * 8.0 / 1.26, 8.0, 0.0, &p()).unwrap(),
            0.0
        );
    }

    #[test]
    fn cp_grid_argmax_near_lambda_opt() {
        // Brute-force scan, independent of `cp_argmax`.
        let mut best = (0.0, f64::MIN);
        for i in 0..=11_000 {
            let l = 1.0 + i as f64 * 1e-3;
            let c = power_coefficient(l, 0.0, &p()).unwrap();
            if c > best.1 {
                best = (l, c);
            }
        }
        let (l, c) = cp_argmax(1.0, 12.0, 1e-3, 0.0, &p()).unwrap();
        assert_abs_diff_eq!(l, best.0, epsilon = 1e-9);
        assert_eq!(c, best.1);
        assert!((l - 6.9).abs() < 0.01, "argmax at {l}");
        assert!(c <= TurbineParams::SURFACE_CP_MAX + 1e-9);
        assert!(TurbineParams::SURFACE_CP_MAX - c < 1e-8);
    }

    #[test]
    fn cp_surface_peak_on_grid() {
        let peak = power_coefficient(p().lambda_opt, 0.0, &p()).unwrap();
        // 6.9 sits 8e-3 left of the continuous maximum; allow the flat-top slack.
        for i in 0..=11_000 {
            let l = 1.0 + i as f64 * 1e-3;
            let c = power_coefficient(l, 0.0, &p()).unwrap();
            assert!(c <= peak + 1e-5, "Cp({l}) = {c} exceeds Cp(λ_opt) = {peak}");
        }
    }

    #[test]
    fn torque_at_reference_speed() {
        // ½·1.29·π·1.26²·Cp(6.9)·8³ / 43.8095 = 16.5877 (independent script)
        let omega = 6.9 * 8.0 / 1.26;
        let tau = aerodynamic_torque(omega, 8.0, 0.0, &p()).unwrap();
        assert_abs_diff_eq!(tau, 16.587_657_650, epsilon = 1e-6);
    }

    #[test]
    fn torque_floor_engages() {
        let q = p();
        let tau = aerodynamic_torque(0.05, 8.0, 0.0, &q).unwrap();
        assert!(tau.is_finite() && tau >= 0.0);
        let lambda = tip_speed_ratio(0.05, 8.0, &q).unwrap();
        let cp = power_coefficient(lambda, 0.0, &q).unwrap();
        let expect = 0.5 * q.rho * PI * q.radius.powi(2) * cp * 512.0 / q.omega_floor;
        assert_abs_diff_eq!(tau, expect, epsilon = 1e-12);
    }

    #[test]
    fn rotor_derivative_examples() {
        let q = p();
        let s = PlantState {
            omega_rot: 10.0,
            t: 0.0,
        };
        assert_abs_diff_eq!(
            rotor_derivative(&s, 16.6, 10.0, 0.0, &q),
            4.4,
            epsilon = 1e-12
        );
        // balanced torques
        let mut q2 = q;
        q2.b_total = 0.3;
        let tau_aero = 7.0 + 0.3 * 10.0 + 1.5;
        assert_abs_diff_eq!(
            rotor_derivative(&s, tau_aero, 7.0, 1.5, &q2),
            0.0,
            epsilon = 1e-12
        );
        let base = rotor_derivative(&s, 16.6, 10.0, 1.0, &q);
        let bumped = rotor_derivative(&s, 16.6, 10.0, 1.25, &q);
        assert_abs_diff_eq!(base - bumped, 0.25 / 1.5, epsilon = 1e-12);
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut q = p();
        q.cp_opt = 0.7;
        assert!(matches!(q.validate(), Err(Error::Config { key, .. }) if key == "plant.cp_opt"));
        let mut q = p();
        q.j_total = 0.0;
        assert!(q.validate().is_err());
        assert!(p().validate().is_ok());
    }

    #[test]
    fn two_mass_reduction_identities() {
        let tm = TwoMassParams {
            j_rot: 1.2,
            j_gen: 0.012,
            b_rot: 0.02,
            b_gen: 0.001,
            k_rot: 0.0,
            k_gen: 0.0,
            eta: 5.0,
        };
        assert!(tm.validate().is_ok());
        assert_abs_diff_eq!(tm.j_total(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(tm.b_total(), 0.045, epsilon = 1e-12);
    }

    #[test]
    fn power_identity_above_floor() {
        let q = p();
        for &(omega, v) in &[(20.0, 5.0), (43.8, 8.0), (60.0, 11.0)] {
            let tau = aerodynamic_torque(omega, v, 0.0, &q).unwrap();
            let lambda = tip_speed_ratio(omega, v, &q).unwrap();
            let cp = power_coefficient(lambda, 0.0, &q).unwrap();
            let power = 0.5 * q.rho * PI * q.radius.powi(2) * cp * v.powi(3);
            assert_abs_diff_eq!(tau * omega, power, epsilon = 1e-9 * power.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn cp_zero_pitch_closed_form(lambda in 0.5f64..15.0) {
            let mu = CpCoefficients::default();
            let phi = (1.0 - 3e-3 * lambda) / lambda;
            let closed = ((mu.mu1 * phi - mu.mu4) * (-mu.mu5 * phi).exp()).max(0.0);
            let general = power_coefficient(lambda, 0.0, &p()).unwrap();
            prop_assert!((closed - general).abs() <= 1e-14);
        }

        #[test]
        fn two_mass_rigid_matches_one_mass(
            omega0 in 20.0f64..60.0,
            tau_elec in 0.5f64..5.0,
            eta in 2.0f64..20.0,
            j_rot in 0.5f64..1.4,
            b_rot in 0.0f64..0.05,
            b_gen in 0.0f64..1e-3,
        ) {
            let j_gen = (1.5 - j_rot) / (eta * eta);
            let tm = TwoMassParams { j_rot, j_gen, b_rot, b_gen, k_rot: 0.0, k_gen: 0.0, eta };
            let one = tm.reduce(&p());
            let v = 8.0;
            let dt = 0.01;
            let (mut w_two, mut w_one) = (omega0, omega0);
            for _ in 0..200 {
                w_two = rk4_step(0.0, w_two, dt, |_, w| {
                    let tau = aerodynamic_torque(w, v, 0.0, &one).unwrap();
                    tm.rigid_acceleration(w, tau, tau_elec).0
                });
                w_one = rk4_step(0.0, w_one, dt, |_, w| {
                    let tau = aerodynamic_torque(w, v, 0.0, &one).unwrap();
                    let st = PlantState { omega_rot: w, t: 0.0 };
                    rotor_derivative(&st, tau, tm.reflected_torque(tau_elec), 0.0, &one)
                });
            }
            prop_assert!((w_two - w_one).abs() < 1e-9, "{} vs {}", w_two, w_one);
        }
    }
}
