//! Fixed-step integrators for scalar states.

/// Integration scheme used for the plant channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Classic fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Forward Euler, for ablation runs.
    Euler,
}

/// One classic RK4 step of `dx/dt = f(t, x)`.
pub fn rk4_step<F>(t: f64, x: f64, h: f64, mut f: F) -> f64
where
    F: FnMut(f64, f64) -> f64,
{
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    let k4 = f(t + h, x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

pub fn euler_step<F>(t: f64, x: f64, h: f64, mut f: F) -> f64
where
    F: FnMut(f64, f64) -> f64,
{
    x + h * f(t, x)
}

impl Scheme {
    pub fn step<F>(self, t: f64, x: f64, h: f64, f: F) -> f64
    where
        F: FnMut(f64, f64) -> f64,
    {
        match self {
            Scheme::Rk4 => rk4_step(t, x, h, f),
            Scheme::Euler => euler_step(t, x, h, f),
        }
    }
}
