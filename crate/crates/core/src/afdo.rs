//! Adaptive fuzzy disturbance observer.
//!
//! The lumped disturbance is approximated as `d̂ = θ̂ᵀψ(ω̄)` where `ψ` is the
//! normalized fuzzy basis over `ω̄ = [ω_rot, dω_rot/dt]`. The observer state
//! `z` tracks the rotor speed; its residual `ζ = ω_rot − z` obeys
//!
//! ```text
//! dζ/dt = −σ·ζ + (d̂ − d)/Jt
//! ```
//!
//! and drives the parameter update `dθ̂/dt = −γ̄·ζ·ψ`, which makes
//! `ζ²/2 + θ̃ᵀθ̃/(2γ)` non-increasing up to the approximation error.

use crate::error::{Error, Result};
use crate::plant::TurbineParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MembershipFamily {
    /// `exp(−½((x − c)/w)²)`
    #[default]
    Gaussian,
    /// `max(0, 1 − |x − c|/w)`
    Triangular,
}

/// Membership functions for the two observer inputs. Both inputs use the
/// same count `m`, giving `p = m²` rules.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyBasisConfig {
    pub omega_centers: Vec<f64>,
    pub omega_widths: Vec<f64>,
    pub accel_centers: Vec<f64>,
    pub accel_widths: Vec<f64>,
    pub family: MembershipFamily,
}

impl FuzzyBasisConfig {
    /// `m` evenly spaced centers per input, each width equal to the spacing.
    pub fn uniform(m: usize, omega_range: (f64, f64), accel_range: (f64, f64)) -> Self {
        let grid = |(lo, hi): (f64, f64)| -> (Vec<f64>, Vec<f64>) {
            if m < 2 {
                return (vec![0.5 * (lo + hi)], vec![(hi - lo).max(1.0)]);
            }
            let step = (hi - lo) / (m - 1) as f64;
            (
                (0..m).map(|i| lo + i as f64 * step).collect(),
                vec![step; m],
            )
        };
        let (omega_centers, omega_widths) = grid(omega_range);
        let (accel_centers, accel_widths) = grid(accel_range);
        Self {
            omega_centers,
            omega_widths,
            accel_centers,
            accel_widths,
            family: MembershipFamily::Gaussian,
        }
    }

    pub fn m(&self) -> usize {
        self.omega_centers.len()
    }

    /// Number of rules, m².
    pub fn dimension(&self) -> usize {
        self.omega_centers.len() * self.accel_centers.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.omega_centers.len();
        if m < 2 {
            return Err(Error::config(
                "afdo.m",
                "need at least 2 membership functions",
            ));
        }
        let inputs = [
            ("afdo.omega", &self.omega_centers, &self.omega_widths),
            ("afdo.accel", &self.accel_centers, &self.accel_widths),
        ];
        for (key, centers, widths) in inputs {
            if centers.len() != m || widths.len() != m {
                return Err(Error::config(
                    key,
                    "centers and widths must both have m entries",
                ));
            }
            if centers.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config(key, "centers must be strictly increasing"));
            }
            if widths.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(Error::config(key, "widths must be positive"));
            }
        }
        Ok(())
    }
}

impl Default for FuzzyBasisConfig {
    fn default() -> Self {
        Self::uniform(5, (0.0, 80.0), (-20.0, 20.0))
    }
}

/// Per-input memberships divided by their sum.
fn normalized_memberships(
    x: f64,
    centers: &[f64],
    widths: &[f64],
    family: MembershipFamily,
    out: &mut [f64],
) -> Result<()> {
    match family {
        MembershipFamily::Gaussian => {
            // Work with exponents so far-out inputs do not underflow every term.
            let mut max_exp = f64::NEG_INFINITY;
            for ((o, c), w) in out.iter_mut().zip(centers).zip(widths) {
                let z = (x - c) / w;
                *o = -0.5 * z * z;
                max_exp = max_exp.max(*o);
            }
            if !max_exp.is_finite() {
                return Err(Error::Domain(format!(
                    "fuzzy basis input {x} is not finite"
                )));
            }
            for o in out.iter_mut() {
                *o = (*o - max_exp).exp();
            }
        }
        MembershipFamily::Triangular => {
            for ((o, c), w) in out.iter_mut().zip(centers).zip(widths) {
                *o = (1.0 - (x - c).abs() / w).max(0.0);
            }
        }
    }
    let sum: f64 = out.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Domain(format!(
            "degenerate fuzzy basis input {x}: all memberships are zero"
        )));
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    Ok(())
}

/// Fuzzy basis ψ(ω̄), written into `out` (resized to m²). Entry `i·m + j`
/// pairs the i-th speed set with the j-th acceleration set.
///
/// The rule product normalized by the sum over all rule products factorizes
/// into the product of per-input normalized memberships, which is what is
/// evaluated here.
pub fn fuzzy_basis_into(
    omega_bar: [f64; 2],
    cfg: &FuzzyBasisConfig,
    out: &mut Vec<f64>,
) -> Result<()> {
    let m1 = cfg.omega_centers.len();
    let m2 = cfg.accel_centers.len();
    let mut a = vec![0.0; m1];
    let mut b = vec![0.0; m2];
    normalized_memberships(
        omega_bar[0],
        &cfg.omega_centers,
        &cfg.omega_widths,
        cfg.family,
        &mut a,
    )?;
    normalized_memberships(
        omega_bar[1],
        &cfg.accel_centers,
        &cfg.accel_widths,
        cfg.family,
        &mut b,
    )?;
    out.clear();
    out.extend(a.iter().flat_map(|ai| b.iter().map(move |bj| ai * bj)));
    Ok(())
}

pub fn fuzzy_basis(omega_bar: [f64; 2], cfg: &FuzzyBasisConfig) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cfg.dimension());
    fuzzy_basis_into(omega_bar, cfg, &mut out)?;
    Ok(out)
}

/// d̂ = θ̂ᵀψ
pub fn disturbance_estimate(theta_hat: &[f64], psi: &[f64]) -> Result<f64> {
    if theta_hat.len() != psi.len() {
        return Err(Error::config(
            "afdo.m",
            format!(
                "parameter vector has {} entries but the basis has {}",
                theta_hat.len(),
                psi.len()
            ),
        ));
    }
    Ok(theta_hat.iter().zip(psi).map(|(t, p)| t * p).sum())
}

/// Observer tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct AfdoConfig {
    pub basis: FuzzyBasisConfig,
    /// Observer gain σ, 1/s.
    pub sigma: f64,
    /// Adaptation rate γ̄ = γ/Jt.
    pub gamma_bar: f64,
    /// Assumed bound on |ϵ| for the ζ monitor, rad/s².
    pub epsilon_bound: f64,
    /// ‖θ̂‖ above which the run is aborted.
    pub divergence_limit: f64,
}

impl Default for AfdoConfig {
    fn default() -> Self {
        Self {
            basis: FuzzyBasisConfig::default(),
            sigma: 5.0,
            gamma_bar: 100.0,
            epsilon_bound: 0.01,
            divergence_limit: 1e3,
        }
    }
}

impl AfdoConfig {
    pub fn validate(&self) -> Result<()> {
        self.basis.validate()?;
        for (key, v) in [
            ("afdo.sigma", self.sigma),
            ("afdo.divergence_limit", self.divergence_limit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be finite and > 0"));
            }
        }
        // γ̄ = 0 freezes θ̂.
        if !(self.gamma_bar >= 0.0 && self.gamma_bar.is_finite()) {
            return Err(Error::config("afdo.gamma_bar", "must be finite and >= 0"));
        }
        if !(self.epsilon_bound >= 0.0) {
            return Err(Error::config("afdo.epsilon_bound", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AfdoState {
    pub theta_hat: Vec<f64>,
    /// Observer state, rad/s.
    pub z: f64,
    /// Residual ω_rot − z from the latest observer step, rad/s.
    pub zeta: f64,
    pub sigma: f64,
    pub gamma_bar: f64,
}

impl AfdoState {
    /// θ̂ = 0 and z = ω_rot(0), so ζ starts at zero.
    pub fn new(omega0: f64, cfg: &AfdoConfig) -> Self {
        Self {
            theta_hat: vec![0.0; cfg.basis.dimension()],
            z: omega0,
            zeta: 0.0,
            sigma: cfg.sigma,
            gamma_bar: cfg.gamma_bar,
        }
    }

    pub fn theta_norm(&self) -> f64 {
        self.theta_hat.iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

/// Forward-Euler step of the observer:
/// `dz/dt = σζ + (τ_aero − Bt·ω − τ_gen − d̂)/Jt` with `ζ = ω_rot − z`
/// evaluated at the start of the step.
pub fn observer_step(
    state: &AfdoState,
    omega_rot: f64,
    tau_aero: f64,
    tau_gen: f64,
    d_hat: f64,
    params: &TurbineParams,
    dt: f64,
) -> AfdoState {
    let zeta = omega_rot - state.z;
    let j = params.j_total;
    let z_dot = state.sigma * zeta + (tau_aero - params.b_total * omega_rot - tau_gen - d_hat) / j;
    AfdoState {
        z: state.z + dt * z_dot,
        zeta,
        ..state.clone()
    }
}

/// Forward-Euler step of `dθ̂/dt = −γ̄·ζ·ψ` using the residual stored in `state`.
pub fn adapt_theta(state: &AfdoState, psi: &[f64], dt: f64) -> AfdoState {
    let gain = -dt * state.gamma_bar * state.zeta;
    let theta_hat = state
        .theta_hat
        .iter()
        .zip(psi)
        .map(|(t, p)| t + gain * p)
        .collect();
    AfdoState {
        theta_hat,
        ..state.clone()
    }
}

/// ζ² ≥ ϵ²/σ², the residual condition under which the composite Lyapunov
/// function decreases. Monitored, not enforced.
pub fn zeta_condition(zeta: f64, epsilon_bound: f64, sigma: f64) -> bool {
    zeta * zeta * sigma * sigma >= epsilon_bound * epsilon_bound
}
