//! Decompression dynamics of one leg of the linkage up to take-off, followed by ballistic flight.
//!
//! The generalised coordinate is the leg angle θ. Masses are per-leg shares of the three-legged
//! robot (foot and head plates enter at one third), so one band drives one leg's worth of mass.
//! Efficiency is identical in per-leg and whole-robot bookkeeping.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::elastic::ElasticModel;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::geometry::LinkageGeometry;
use crate::thrust::{thrust_from, DerivativeConvention};

/// Lumped masses and inertias of one leg, gravity, and the joint Coulomb coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassModel {
    /// Foot plate share [kg].
    pub m1: f64,
    /// Lower leg segment [kg].
    pub m2: f64,
    /// Knee [kg].
    pub m3: f64,
    /// Upper leg segment [kg].
    pub m4: f64,
    /// Head plate share [kg].
    pub m5: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "g")]
    pub gravity: f64,
    /// Coulomb friction torque coefficient [N·m].
    #[serde(rename = "mu_C")]
    pub coulomb: f64,
}

/// Combinations of the leg masses that appear in the kinetic and potential energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCoefficients {
    /// Weight of the `cos 2θ` inertia term, `m4 + 2 m5`.
    pub cos2_inertia: f64,
    /// Constant inertia term, `m2 + 4 m3 + 5 m4 + 8 m5`.
    pub base_inertia: f64,
    /// Gravity moment, `m2 + 2 m3 + 3 m4 + 4 m5`.
    pub gravity_moment: f64,
    /// Weight lifted by the knee offset, `m3 + 2 m4 + 2 m5`.
    pub offset_weight: f64,
}

/// Coulomb coefficient identified for the laboratory demonstrator.
pub const DEMONSTRATOR_COULOMB: f64 = 16.811e-3;

impl MassModel {
    /// Laboratory demonstrator, including its identified joint friction.
    pub fn demonstrator() -> Self {
        Self {
            m1: 2.70e-3,
            m2: 1.60e-3,
            m3: 3.10e-3,
            m4: 1.60e-3,
            m5: 16.10e-3,
            i1: 6.28e-7,
            i2: 6.28e-7,
            gravity: 9.81,
            coulomb: DEMONSTRATOR_COULOMB,
        }
    }

    pub fn with_coulomb(self, coulomb: f64) -> Self {
        Self { coulomb, ..self }
    }

    pub fn undamped(self) -> Self {
        self.with_coulomb(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, m) in [
            ("m1", self.m1),
            ("m2", self.m2),
            ("m3", self.m3),
            ("m4", self.m4),
            ("m5", self.m5),
            ("I1", self.i1),
            ("I2", self.i2),
            ("mu_C", self.coulomb),
        ] {
            ensure_non_negative(name, m)?;
        }
        ensure_positive("m_T", self.total_mass())?;
        ensure_positive("g", self.gravity)?;
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2 + self.m3 + self.m4 + self.m5
    }

    /// Mass that moves during decompression (everything above the foot).
    pub fn moving_mass(&self) -> f64 {
        self.total_mass() - self.m1
    }

    pub fn coefficients(&self) -> MassCoefficients {
        let (m2, m3, m4, m5) = (self.m2, self.m3, self.m4, self.m5);
        MassCoefficients {
            cos2_inertia: m4 + 2.0 * m5,
            base_inertia: m2 + 4.0 * m3 + 5.0 * m4 + 8.0 * m5,
            gravity_moment: m2 + 3.0 * m4 + 2.0 * m3 + 4.0 * m5,
            offset_weight: m3 + 2.0 * m4 + 2.0 * m5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOptions {
    /// Fixed RK4 step [s].
    pub step: f64,
    /// Integration horizon [s].
    pub t_max: f64,
    /// Width to which event times are bisected [s].
    pub event_tolerance: f64,
    /// Release leg angle [rad].
    pub theta0: f64,
    #[serde(default)]
    pub derivative: DerivativeConvention,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            t_max: 1.0,
            event_tolerance: 1e-7,
            theta0: 0.066,
            derivative: DerivativeConvention::FixedLeg,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("step", self.step)?;
        ensure_positive("event_tolerance", self.event_tolerance)?;
        ensure_positive("t_max", self.t_max)?;
        if self.t_max <= self.step {
            return Err(Error::invalid("t_max", "must exceed the step"));
        }
        if !(self.theta0 > 0.0 && self.theta0 < FRAC_PI_2) {
            return Err(Error::invalid(
                "theta0",
                format!("must lie in (0, pi/2), got {}", self.theta0),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TakeOff,
    /// Drive torque cannot overcome joint friction, at release or after the leg stalls.
    Stiction,
    /// θ reached zero: the knee opens inverted.
    KneeInversion,
    /// Horizon exhausted or the θ = π/2 hard stop reached before take-off.
    HorizonExceeded,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TakeOff => "TakeOff",
            Termination::Stiction => "Stiction",
            Termination::KneeInversion => "KneeInversion",
            Termination::HorizonExceeded => "HorizonExceeded",
        }
    }
}

/// One recorded sample of the decompression phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub h: f64,
    pub h_dot: f64,
    pub h_ddot: f64,
    pub lambda: f64,
    #[serde(rename = "F_l")]
    pub drive_force: f64,
    #[serde(rename = "F_y")]
    pub thrust: f64,
    #[serde(rename = "F_N")]
    pub ground_reaction: f64,
    #[serde(rename = "T_kin")]
    pub kinetic: f64,
    #[serde(rename = "V_pot")]
    pub potential: f64,
    #[serde(rename = "E_band")]
    pub band_energy: f64,
    /// Work done on the leg by the thrust force since release.
    #[serde(skip)]
    pub drive_work: f64,
    /// Energy dissipated by joint friction since release.
    #[serde(skip)]
    pub friction_work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn first(&self) -> &TrajectoryRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectory always holds the release row")
    }
}

/// Scalar outcomes of a jump. Take-off quantities are `None` when the run ends otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpSummary {
    #[serde(rename = "t_off_s")]
    pub t_off: Option<f64>,
    #[serde(rename = "h_dot_off_mps")]
    pub h_dot_off: Option<f64>,
    #[serde(rename = "v0_mps")]
    pub v0: Option<f64>,
    #[serde(rename = "h_max_m")]
    pub h_max: Option<f64>,
    #[serde(rename = "t_aer_s")]
    pub t_aer: Option<f64>,
    #[serde(rename = "eta_pct")]
    pub eta: Option<f64>,
    /// Band energy at release.
    #[serde(rename = "E_P0_J")]
    pub e_p0: f64,
    #[serde(rename = "E_K_J")]
    pub e_k: Option<f64>,
    #[serde(rename = "friction_work_J")]
    pub friction_work: f64,
    /// Work done by the thrust on the leg up to the end of the run.
    #[serde(rename = "drive_work_J")]
    pub drive_work: f64,
    /// Band energy at release minus band energy at the end of the run.
    #[serde(rename = "band_release_J")]
    pub band_release: f64,
    /// `drive_work − ΔT − ΔV − friction_work`; zero up to integration error.
    #[serde(rename = "energy_residual_J")]
    pub energy_residual: f64,
    #[serde(rename = "t_end_s")]
    pub t_end: f64,
    pub termination: Termination,
}

/// Geometry, drive law, masses and derivative convention bundled for evaluation of the
/// equation of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkageDynamics {
    pub geometry: LinkageGeometry,
    pub model: ElasticModel,
    pub masses: MassModel,
    pub convention: DerivativeConvention,
}

/// Integrator state: θ, θ̇, thrust work, friction work.
pub(crate) type State = [f64; 4];

impl LinkageDynamics {
    pub fn new(geometry: LinkageGeometry, model: ElasticModel, masses: MassModel) -> Self {
        Self {
            geometry,
            model,
            masses,
            convention: DerivativeConvention::FixedLeg,
        }
    }

    pub fn with_convention(self, convention: DerivativeConvention) -> Self {
        Self { convention, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.model.validate()?;
        self.masses.validate()
    }

    pub fn thrust(&self, theta: f64) -> f64 {
        let k = self.geometry.kinematics_unchecked(theta);
        if k.radicand <= 0.0 {
            return 0.0;
        }
        thrust_from(&self.geometry, &self.model, &k, self.convention)
    }

    /// `a² (4 M1 cos 2θ + M2) + 4 (I1 + I2)`, four times the effective inertia.
    fn inertia4(&self, theta: f64) -> f64 {
        let a = self.geometry.a;
        let mc = self.masses.coefficients();
        a * a * (4.0 * mc.cos2_inertia * (2.0 * theta).cos() + mc.base_inertia)
            + 4.0 * (self.masses.i1 + self.masses.i2)
    }

    /// Numerator of the equation of motion without the friction term.
    fn free_numerator(&self, theta: f64, theta_dot: f64) -> f64 {
        let a = self.geometry.a;
        let mc = self.masses.coefficients();
        4.0 * mc.cos2_inertia * a * a * (2.0 * theta).sin() * theta_dot * theta_dot
            - 2.0 * a * theta.cos() * (self.masses.gravity * mc.gravity_moment - 4.0 * self.thrust(theta))
    }

    /// Angular acceleration of the leg, with `sgn(0) = 0` in the Coulomb term.
    pub fn theta_ddot(&self, theta: f64, theta_dot: f64) -> f64 {
        let friction = 4.0 * self.masses.coulomb * sgn(theta_dot);
        (self.free_numerator(theta, theta_dot) - friction) / self.inertia4(theta)
    }

    /// Angular acceleration used by the integrator. At zero velocity the Coulomb torque opposes
    /// the impending motion, or holds the leg if it can; elsewhere it matches [`Self::theta_ddot`].
    fn theta_ddot_coulomb(&self, theta: f64, theta_dot: f64) -> f64 {
        let free = self.free_numerator(theta, theta_dot);
        let limit = 4.0 * self.masses.coulomb;
        let numerator = if theta_dot != 0.0 {
            free - limit * theta_dot.signum()
        } else if free.abs() <= limit {
            0.0
        } else {
            free - limit * free.signum()
        };
        numerator / self.inertia4(theta)
    }

    /// Largest Coulomb coefficient for which the leg stays put at `theta` from rest.
    pub fn holding_coulomb(&self, theta: f64) -> f64 {
        self.free_numerator(theta, 0.0).abs() / 4.0
    }

    pub fn kinetic_energy(&self, theta: f64, theta_dot: f64) -> f64 {
        self.inertia4(theta) * theta_dot * theta_dot / 8.0
    }

    pub fn potential_energy(&self, theta: f64) -> f64 {
        let mc = self.masses.coefficients();
        let g = self.masses.gravity;
        0.5 * self.geometry.a * g * mc.gravity_moment * theta.sin() + self.geometry.p * g * mc.offset_weight
    }

    pub fn band_energy(&self, theta: f64) -> f64 {
        let k = self.geometry.kinematics_unchecked(theta);
        self.model.stored_energy(k.stretch)
    }

    pub fn h_dot(&self, theta: f64, theta_dot: f64) -> f64 {
        2.0 * self.geometry.a * theta.cos() * theta_dot
    }

    pub fn h_ddot(&self, theta: f64, theta_dot: f64, theta_ddot: f64) -> f64 {
        let a = self.geometry.a;
        2.0 * a * theta.cos() * theta_ddot - 2.0 * a * theta.sin() * theta_dot * theta_dot
    }

    fn ground_reaction_at(&self, theta: f64, theta_dot: f64) -> f64 {
        let acc = self.theta_ddot_coulomb(theta, theta_dot);
        ground_reaction(&self.masses, self.h_ddot(theta, theta_dot, acc))
    }

    fn rhs(&self, y: &State) -> State {
        let [theta, omega, ..] = *y;
        [
            omega,
            self.theta_ddot_coulomb(theta, omega),
            self.thrust(theta) * self.h_dot(theta, omega),
            self.masses.coulomb * omega.abs(),
        ]
    }

    pub(crate) fn rk4_step(&self, y: &State, dt: f64) -> State {
        let k1 = self.rhs(y);
        let k2 = self.rhs(&axpy(y, 0.5 * dt, &k1));
        let k3 = self.rhs(&axpy(y, 0.5 * dt, &k2));
        let k4 = self.rhs(&axpy(y, dt, &k3));
        let mut out = *y;
        for i in 0..4 {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    pub(crate) fn row(&self, t: f64, y: &State) -> TrajectoryRow {
        let [theta, theta_dot, drive_work, friction_work] = *y;
        let k = self.geometry.kinematics_unchecked(theta);
        let acc = self.theta_ddot_coulomb(theta, theta_dot);
        let h_ddot = self.h_ddot(theta, theta_dot, acc);
        TrajectoryRow {
            t,
            theta,
            theta_dot,
            h: k.height,
            h_dot: self.h_dot(theta, theta_dot),
            h_ddot,
            lambda: k.stretch,
            drive_force: self.model.force_unchecked(k.stretch),
            thrust: self.thrust(theta),
            ground_reaction: ground_reaction(&self.masses, h_ddot),
            kinetic: self.kinetic_energy(theta, theta_dot),
            potential: self.potential_energy(theta),
            band_energy: self.model.stored_energy(k.stretch),
            drive_work,
            friction_work,
        }
    }

    /// Vertical velocity of the centre of mass of the whole leg (foot at rest), for comparison
    /// with the momentum-transfer take-off velocity.
    pub fn centre_of_mass_velocity(&self, theta: f64, theta_dot: f64) -> f64 {
        let m = &self.masses;
        let rate = self.geometry.a * theta.cos() * theta_dot;
        (m.m2 * 0.5 * rate + m.m3 * rate + m.m4 * 1.5 * rate + m.m5 * 2.0 * rate) / m.total_mass()
    }

    /// Integrates the decompression phase from rest at `options.theta0`.
    pub fn integrate(&self, options: &SimOptions) -> Result<Trajectory> {
        self.validate()?;
        options.validate()?;
        self.geometry.kinematics(options.theta0)?;

        let mut y: State = [options.theta0, 0.0, 0.0, 0.0];
        let mut t = 0.0;
        let mut rows = vec![self.row(t, &y)];

        if self.masses.coulomb >= self.holding_coulomb(options.theta0) {
            return Ok(Trajectory {
                rows,
                termination: Termination::Stiction,
            });
        }
        if rows[0].ground_reaction <= 0.0 {
            return Ok(Trajectory {
                rows,
                termination: Termination::TakeOff,
            });
        }

        loop {
            if t >= options.t_max {
                return Ok(Trajectory {
                    rows,
                    termination: Termination::HorizonExceeded,
                });
            }
            let dt = options.step.min(options.t_max - t);
            let next = self.rk4_step(&y, dt);

            let mut earliest: Option<(f64, Event)> = None;
            for event in Event::ALL {
                if event.crossed(self, &y, &next) {
                    let tau = self.locate(&y, dt, options.event_tolerance, |s| event.crossed(self, &y, s));
                    if earliest.map_or(true, |(best, _)| tau < best) {
                        earliest = Some((tau, event));
                    }
                }
            }

            match earliest {
                None => {
                    y = next;
                    t += dt;
                    rows.push(self.row(t, &y));
                }
                Some((tau, event)) => {
                    y = self.rk4_step(&y, tau);
                    t += tau;
                    rows.push(self.row(t, &y));
                    if let Some(termination) = event.termination(self, &y) {
                        return Ok(Trajectory { rows, termination });
                    }
                }
            }
        }
    }

    /// Smallest step in `(0, dt]` for which `crossed` holds, bisected to `tolerance`.
    fn locate(&self, y: &State, dt: f64, tolerance: f64, crossed: impl Fn(&State) -> bool) -> f64 {
        let (mut lo, mut hi) = (0.0, dt);
        while hi - lo > tolerance {
            let mid = 0.5 * (lo + hi);
            if crossed(&self.rk4_step(y, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    TakeOff,
    KneeInversion,
    HardStop,
    /// Band reaches its rest length; the step is split there so no RK4 step straddles the kink.
    Slack,
    /// Leg comes to rest during decompression.
    Stall,
}

impl Event {
    const ALL: [Event; 5] = [
        Event::TakeOff,
        Event::KneeInversion,
        Event::HardStop,
        Event::Slack,
        Event::Stall,
    ];

    /// Whether the event lies between `from` and `to`.
    fn crossed(self, dynamics: &LinkageDynamics, from: &State, to: &State) -> bool {
        match self {
            Event::TakeOff => dynamics.ground_reaction_at(to[0], to[1]) <= 0.0,
            Event::KneeInversion => to[0] <= 0.0,
            Event::HardStop => to[0] >= FRAC_PI_2,
            Event::Slack => {
                let before = dynamics.geometry.kinematics_unchecked(from[0]).stretch > 1.0;
                let after = dynamics.geometry.kinematics_unchecked(to[0]).stretch > 1.0;
                before != after
            }
            Event::Stall => from[1] != 0.0 && (to[1] == 0.0 || to[1].signum() != from[1].signum()),
        }
    }

    fn termination(self, dynamics: &LinkageDynamics, at: &State) -> Option<Termination> {
        match self {
            Event::TakeOff => Some(Termination::TakeOff),
            Event::KneeInversion => Some(Termination::KneeInversion),
            Event::HardStop => Some(Termination::HorizonExceeded),
            Event::Slack => None,
            Event::Stall => {
                let held = dynamics.masses.coulomb > 0.0 && dynamics.holding_coulomb(at[0]) <= dynamics.masses.coulomb;
                held.then_some(Termination::Stiction)
            }
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn axpy(y: &State, alpha: f64, x: &State) -> State {
    let mut out = *y;
    for i in 0..4 {
        out[i] += alpha * x[i];
    }
    out
}

/// Angular acceleration of the leg from the equation of motion.
pub fn theta_ddot(
    geom: &LinkageGeometry,
    model: &ElasticModel,
    masses: &MassModel,
    theta: f64,
    theta_dot: f64,
) -> Result<f64> {
    if !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(Error::AngleOutOfRange(theta));
    }
    Ok(LinkageDynamics::new(*geom, *model, *masses).theta_ddot(theta, theta_dot))
}

/// Ground reaction on the foot, `(m_T − m1)(ḧ + g) + m1 g`.
pub fn ground_reaction(masses: &MassModel, h_ddot: f64) -> f64 {
    let moving = masses.moving_mass();
    moving * h_ddot + moving * masses.gravity + masses.m1 * masses.gravity
}

pub fn integrate_decompression(
    geom: &LinkageGeometry,
    model: &ElasticModel,
    masses: &MassModel,
    options: &SimOptions,
) -> Result<Trajectory> {
    LinkageDynamics::new(*geom, *model, *masses)
        .with_convention(options.derivative)
        .integrate(options)
}

/// Velocity of the whole robot just after the foot is picked up, by conservation of momentum.
pub fn takeoff_velocity(masses: &MassModel, h_dot_off: f64) -> f64 {
    masses.moving_mass() / masses.total_mass() * h_dot_off
}

/// Apex height and flight time of a vertical ballistic hop.
pub fn ballistic(v0: f64, gravity: f64) -> (f64, f64) {
    (v0 * v0 / (2.0 * gravity), 2.0 * v0 / gravity)
}

/// Energy conversion efficiency in percent.
pub fn efficiency(kinetic: f64, stored: f64) -> Result<f64> {
    if !(stored > 0.0) {
        return Err(Error::invalid("E_P", format!("stored energy must be > 0, got {stored}")));
    }
    Ok(100.0 * kinetic / stored)
}

/// Take-off kinetic energy of the whole (per-leg) mass.
pub fn kinetic_energy_at_takeoff(masses: &MassModel, v0: f64) -> f64 {
    0.5 * masses.total_mass() * v0 * v0
}

/// Full jump: decompression, momentum transfer to the foot, flight and efficiency.
///
/// Efficiency is referred to the band energy stored at release.
pub fn simulate_jump(
    geom: &LinkageGeometry,
    model: &ElasticModel,
    masses: &MassModel,
    options: &SimOptions,
) -> Result<(Trajectory, JumpSummary)> {
    let dynamics = LinkageDynamics::new(*geom, *model, *masses).with_convention(options.derivative);
    let trajectory = dynamics.integrate(options)?;
    let summary = summarise(&dynamics, &trajectory);
    Ok((trajectory, summary))
}

/// Scalar outcomes of an integrated trajectory.
pub fn summarise(dynamics: &LinkageDynamics, trajectory: &Trajectory) -> JumpSummary {
    let first = trajectory.first();
    let last = trajectory.last();
    let masses = &dynamics.masses;
    let e_p0 = first.band_energy;
    let energy_residual =
        last.drive_work - (last.kinetic - first.kinetic) - (last.potential - first.potential) - last.friction_work;

    let mut summary = JumpSummary {
        t_off: None,
        h_dot_off: None,
        v0: None,
        h_max: None,
        t_aer: None,
        eta: None,
        e_p0,
        e_k: None,
        friction_work: last.friction_work,
        drive_work: last.drive_work,
        band_release: e_p0 - last.band_energy,
        energy_residual,
        t_end: last.t,
        termination: trajectory.termination,
    };
    if trajectory.termination == Termination::TakeOff {
        let v0 = takeoff_velocity(masses, last.h_dot.max(0.0));
        let (h_max, t_aer) = ballistic(v0, masses.gravity);
        let e_k = kinetic_energy_at_takeoff(masses, v0);
        summary.t_off = Some(last.t);
        summary.h_dot_off = Some(last.h_dot);
        summary.v0 = Some(v0);
        summary.h_max = Some(h_max);
        summary.t_aer = Some(t_aer);
        summary.e_k = Some(e_k);
        summary.eta = efficiency(e_k, e_p0).ok();
    }
    summary
}
