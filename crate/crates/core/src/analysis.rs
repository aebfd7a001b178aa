//! Phase-plane analysis, efficiency sensitivity and Coulomb-coefficient identification.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::Complex;
use serde::Serialize;

use crate::dynamics::{simulate_jump, LinkageDynamics, SimOptions, State, Termination};
use crate::error::{Error, Result};
use crate::geometry::LegAngleInterval;

const SCAN_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    Saddle,
    Center,
    Degenerate,
}

/// Rest point of the undamped leg dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub theta: f64,
    pub kind: EquilibriumKind,
    /// Eigenvalues of the Jacobian of `(θ̇, θ̈)` at `(θ*, 0)`.
    #[serde(skip)]
    pub eigenvalues: [Complex<f64>; 2],
    /// `|θ̈(θ*, 0)|`.
    pub residual: f64,
}

/// Rest points of the conservative skeleton on `interval`. Friction is ignored: the Coulomb
/// term is not differentiable at zero velocity.
pub fn find_equilibria(dynamics: &LinkageDynamics, interval: &LegAngleInterval) -> Vec<Equilibrium> {
    let conservative = LinkageDynamics {
        masses: dynamics.masses.undamped(),
        ..*dynamics
    };
    let mc = conservative.masses.coefficients();
    let g = conservative.masses.gravity;
    let balance = |theta: f64| theta.cos() * (g * mc.gravity_moment - 4.0 * conservative.thrust(theta));

    let mut roots: Vec<f64> = Vec::new();
    let grid: Vec<f64> = interval.grid(SCAN_POINTS).collect();
    let values: Vec<f64> = grid.iter().map(|&t| balance(t)).collect();
    for i in 0..grid.len() - 1 {
        let (t0, t1) = (grid[i], grid[i + 1]);
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == 0.0 {
            roots.push(t0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            roots.push(bisect(&balance, t0, t1));
        }
    }
    if values[values.len() - 1] == 0.0 {
        roots.push(grid[grid.len() - 1]);
    }
    // cos θ vanishes at the upper stop.
    if (interval.theta_max - FRAC_PI_2).abs() < 1e-12 {
        roots.push(FRAC_PI_2);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    roots
        .into_iter()
        .map(|theta| classify(&conservative, interval, theta))
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn classify(dynamics: &LinkageDynamics, interval: &LegAngleInterval, theta: f64) -> Equilibrium {
    let acc = |t: f64| dynamics.theta_ddot(t, 0.0);
    let step = 1e-6;
    let (lo, hi) = (
        (theta - step).max(interval.theta_min),
        (theta + step).min(interval.theta_max),
    );
    let stiffness = (acc(hi) - acc(lo)) / (hi - lo);
    // θ̈ is quadratic in θ̇, so ∂θ̈/∂θ̇ vanishes at rest and the eigenvalues are ±√stiffness.
    let (kind, eigenvalues) = if stiffness.abs() < 1e-9 {
        (EquilibriumKind::Degenerate, [Complex::new(0.0, 0.0); 2])
    } else if stiffness > 0.0 {
        let r = stiffness.sqrt();
        (EquilibriumKind::Saddle, [Complex::new(r, 0.0), Complex::new(-r, 0.0)])
    } else {
        let w = (-stiffness).sqrt();
        (EquilibriumKind::Center, [Complex::new(0.0, w), Complex::new(0.0, -w)])
    };
    Equilibrium {
        theta,
        kind,
        eigenvalues,
        residual: acc(theta).abs(),
    }
}

/// Which knee branch a trajectory ends up on when released near the folded configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KneeBranch {
    /// Reached θ ≤ 0: the knee folds the wrong way.
    Inverted,
    /// Opened past `open_angle` with positive velocity.
    Upright,
    Undecided,
}

/// Integrates the undamped leg from `(theta, theta_dot)` ignoring ground contact until it picks
/// a knee branch or `horizon` elapses.
pub fn release_branch(
    dynamics: &LinkageDynamics,
    theta: f64,
    theta_dot: f64,
    open_angle: f64,
    step: f64,
    horizon: f64,
) -> KneeBranch {
    let conservative = LinkageDynamics {
        masses: dynamics.masses.undamped(),
        ..*dynamics
    };
    let mut y: State = [theta, theta_dot, 0.0, 0.0];
    let mut t = 0.0;
    while t < horizon {
        y = conservative.rk4_step(&y, step);
        t += step;
        if y[0] <= 0.0 {
            return KneeBranch::Inverted;
        }
        if y[0] >= open_angle && y[1] > 0.0 {
            return KneeBranch::Upright;
        }
    }
    KneeBranch::Undecided
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitSpec {
    /// Release angles; every trajectory starts from rest.
    pub release_angles: Vec<f64>,
    /// Integration span in each time direction [s].
    pub duration: f64,
    pub step: f64,
    /// Use the joint friction of the mass model instead of the conservative skeleton.
    pub damped: bool,
}

impl Default for PortraitSpec {
    fn default() -> Self {
        Self {
            release_angles: vec![0.066, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2],
            duration: 0.3,
            step: 1e-5,
            damped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitPoint {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    /// Kinetic plus gravitational energy minus thrust work since release.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PortraitStatus {
    Complete,
    /// Left `[0, π/2]`.
    LeftDomain,
    /// Damped leg came to rest.
    AtRest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitTrajectory {
    pub theta0: f64,
    pub damped: bool,
    pub status: PortraitStatus,
    pub points: Vec<PortraitPoint>,
}

/// Release trajectories in the `(θ, θ̇)` plane. Undamped curves are traced in both time
/// directions from the release point; damped curves run forward only.
pub fn phase_portrait(dynamics: &LinkageDynamics, spec: &PortraitSpec) -> Result<Vec<PortraitTrajectory>> {
    if !(spec.step > 0.0 && spec.duration > 0.0) {
        return Err(Error::invalid("portrait", "step and duration must be > 0"));
    }
    dynamics.validate()?;
    spec.release_angles
        .iter()
        .map(|&theta0| {
            if !(0.0..=FRAC_PI_2).contains(&theta0) {
                return Err(Error::AngleOutOfRange(theta0));
            }
            Ok(if spec.damped {
                let (points, status) = trace(dynamics, theta0, spec.step, spec.duration, true);
                PortraitTrajectory {
                    theta0,
                    damped: true,
                    status,
                    points,
                }
            } else {
                let conservative = LinkageDynamics {
                    masses: dynamics.masses.undamped(),
                    ..*dynamics
                };
                let (mut back, s_back) = trace(&conservative, theta0, -spec.step, spec.duration, false);
                let (forward, s_fwd) = trace(&conservative, theta0, spec.step, spec.duration, false);
                back.reverse();
                back.pop();
                back.extend(forward);
                let status = if s_back == PortraitStatus::Complete {
                    s_fwd
                } else {
                    s_back
                };
                PortraitTrajectory {
                    theta0,
                    damped: false,
                    status,
                    points: back,
                }
            })
        })
        .collect()
}

fn trace(
    dynamics: &LinkageDynamics,
    theta0: f64,
    step: f64,
    duration: f64,
    stop_at_rest: bool,
) -> (Vec<PortraitPoint>, PortraitStatus) {
    let energy = |y: &State| dynamics.kinetic_energy(y[0], y[1]) + dynamics.potential_energy(y[0]) - y[2];
    let mut y: State = [theta0, 0.0, 0.0, 0.0];
    let mut t = 0.0;
    let mut points = vec![PortraitPoint {
        t,
        theta: y[0],
        theta_dot: y[1],
        energy: energy(&y),
    }];
    let steps = (duration / step.abs()).ceil() as usize;
    for _ in 0..steps {
        let next = dynamics.rk4_step(&y, step);
        let reversed = y[1] != 0.0 && (next[1] == 0.0 || next[1].signum() != y[1].signum());
        y = next;
        t += step;
        points.push(PortraitPoint {
            t,
            theta: y[0],
            theta_dot: y[1],
            energy: energy(&y),
        });
        if !(0.0..=FRAC_PI_2).contains(&y[0]) {
            return (points, PortraitStatus::LeftDomain);
        }
        if stop_at_rest && reversed && dynamics.holding_coulomb(y[0]) <= dynamics.masses.coulomb {
            return (points, PortraitStatus::AtRest);
        }
    }
    (points, PortraitStatus::Complete)
}

/// Parameters that the efficiency sweep can scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SensitivityParameter {
    Gravity,
    M1,
    M2,
    M3,
    M4,
    M5,
    I1,
    I2,
    A,
    P,
    Q,
    Theta0,
}

/// Absolute release-angle range swept for [`SensitivityParameter::Theta0`].
pub const THETA0_SWEEP: (f64, f64) = (0.01, 1.3);

impl SensitivityParameter {
    pub const ALL: [SensitivityParameter; 12] = [
        Self::Gravity,
        Self::M1,
        Self::M2,
        Self::M3,
        Self::M4,
        Self::M5,
        Self::I1,
        Self::I2,
        Self::A,
        Self::P,
        Self::Q,
        Self::Theta0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gravity => "g",
            Self::M1 => "m1",
            Self::M2 => "m2",
            Self::M3 => "m3",
            Self::M4 => "m4",
            Self::M5 => "m5",
            Self::I1 => "I1",
            Self::I2 => "I2",
            Self::A => "a",
            Self::P => "p",
            Self::Q => "q",
            Self::Theta0 => "theta0",
        }
    }

    /// Copy of the inputs with this parameter set from `proportion`. Every parameter except the
    /// release angle is scaled; the release angle is mapped linearly onto [`THETA0_SWEEP`].
    pub fn apply(self, dynamics: &LinkageDynamics, options: &SimOptions, proportion: f64) -> (LinkageDynamics, SimOptions, f64) {
        let mut d = *dynamics;
        let mut o = *options;
        let value = match self {
            Self::Gravity => scale(&mut d.masses.gravity, proportion),
            Self::M1 => scale(&mut d.masses.m1, proportion),
            Self::M2 => scale(&mut d.masses.m2, proportion),
            Self::M3 => scale(&mut d.masses.m3, proportion),
            Self::M4 => scale(&mut d.masses.m4, proportion),
            Self::M5 => scale(&mut d.masses.m5, proportion),
            Self::I1 => scale(&mut d.masses.i1, proportion),
            Self::I2 => scale(&mut d.masses.i2, proportion),
            Self::A => scale(&mut d.geometry.a, proportion),
            Self::P => scale(&mut d.geometry.p, proportion),
            Self::Q => scale(&mut d.geometry.q, proportion),
            Self::Theta0 => {
                o.theta0 = THETA0_SWEEP.0 + proportion * (THETA0_SWEEP.1 - THETA0_SWEEP.0);
                o.theta0
            }
        };
        (d, o, value)
    }
}

fn scale(field: &mut f64, proportion: f64) -> f64 {
    *field *= proportion;
    *field
}

impl fmt::Display for SensitivityParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensitivityParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown sensitivity parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub proportion: f64,
    /// Parameter value actually simulated.
    pub value: f64,
    pub eta: Option<f64>,
    /// `ok`, a non-take-off termination name, or `invalid` when the scaled inputs fail validation.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityCurve {
    pub parameter: SensitivityParameter,
    pub points: Vec<SensitivityPoint>,
}

impl SensitivityCurve {
    pub fn eta_at(&self, proportion: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.proportion == proportion)
            .and_then(|p| p.eta)
    }
}

/// `n` proportions evenly spaced on `[0, 1]`.
pub fn proportion_grid(n: usize) -> Vec<f64> {
    let last = n.saturating_sub(1).max(1) as f64;
    (0..n).map(|i| i as f64 / last).collect()
}

/// Undamped efficiency as one parameter varies, all others at their nominal values.
pub fn sensitivity(
    dynamics: &LinkageDynamics,
    options: &SimOptions,
    parameter: SensitivityParameter,
    proportions: &[f64],
) -> Result<SensitivityCurve> {
    let nominal = LinkageDynamics {
        masses: dynamics.masses.undamped(),
        ..*dynamics
    };
    let points = proportions
        .iter()
        .map(|&proportion| {
            if !(0.0..=1.0).contains(&proportion) {
                return Err(Error::invalid("proportion", format!("must lie in [0, 1], got {proportion}")));
            }
            let (d, o, value) = parameter.apply(&nominal, options, proportion);
            let (eta, status) = match simulate_jump(&d.geometry, &d.model, &d.masses, &o) {
                Ok((_, s)) if s.termination == Termination::TakeOff => (s.eta, "ok".to_string()),
                Ok((_, s)) => (None, s.termination.as_str().to_string()),
                Err(_) => (None, "invalid".to_string()),
            };
            Ok(SensitivityPoint {
                proportion,
                value,
                eta,
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityCurve { parameter, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoulombIdentification {
    #[serde(rename = "mu_C")]
    pub coulomb: f64,
    /// Take-off velocity simulated at the identified coefficient.
    #[serde(rename = "v0_mps")]
    pub v0: f64,
    #[serde(rename = "target_v0_mps")]
    pub target_v0: f64,
    #[serde(rename = "undamped_v0_mps")]
    pub undamped_v0: f64,
    /// Upper end of the search bracket: friction that holds the leg at release.
    #[serde(rename = "mu_stiction")]
    pub stiction_limit: f64,
    pub iterations: usize,
}

/// Take-off velocity for a given Coulomb coefficient; zero when the leg never takes off.
pub fn takeoff_speed(dynamics: &LinkageDynamics, options: &SimOptions, coulomb: f64) -> Result<f64> {
    let masses = dynamics.masses.with_coulomb(coulomb);
    let (_, summary) = simulate_jump(&dynamics.geometry, &dynamics.model, &masses, options)?;
    Ok(summary.v0.unwrap_or(0.0))
}

/// Coulomb coefficient whose simulated take-off velocity equals `target_v0`, by bisection on
/// `[0, μ_stiction)`. Relies on take-off velocity being non-increasing in friction.
pub fn identify_coulomb(dynamics: &LinkageDynamics, options: &SimOptions, target_v0: f64) -> Result<CoulombIdentification> {
    const REL_TOL: f64 = 1e-8;
    let undamped_v0 = takeoff_speed(dynamics, options, 0.0)?;
    if !(target_v0 > 0.0) || target_v0 > undamped_v0 * (1.0 + 1e-12) {
        return Err(Error::NoSolution(format!(
            "target take-off velocity {target_v0} m/s outside (0, {undamped_v0}] m/s"
        )));
    }
    let stiction_limit = LinkageDynamics {
        masses: dynamics.masses.undamped(),
        ..*dynamics
    }
    .holding_coulomb(options.theta0);

    let mut result = CoulombIdentification {
        coulomb: 0.0,
        v0: undamped_v0,
        target_v0,
        undamped_v0,
        stiction_limit,
        iterations: 0,
    };
    if (undamped_v0 - target_v0).abs() <= 1e-12 * undamped_v0 {
        return Ok(result);
    }

    let (mut lo, mut hi) = (0.0, stiction_limit);
    while hi - lo > REL_TOL * hi && result.iterations < 200 {
        let mid = 0.5 * (lo + hi);
        result.iterations += 1;
        if takeoff_speed(dynamics, options, mid)? > target_v0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.coulomb = 0.5 * (lo + hi);
    result.v0 = takeoff_speed(dynamics, options, result.coulomb)?;
    Ok(result)
}
