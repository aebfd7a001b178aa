//! Thrust force of the linkage from the band tension by virtual work.

use serde::{Deserialize, Serialize};

use crate::elastic::ElasticModel;
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{LegAngleInterval, LegKinematics, LinkageGeometry};

/// How `dl/dh` is evaluated when the effective leg `b` varies with the leg angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeConvention {
    /// Differentiate `l(h)` holding `b` at its instantaneous value. This is the published model
    /// and the default.
    #[default]
    FixedLeg,
    /// Full chain rule including `db/dh`; the exact virtual work of the band.
    ChainRule,
}

impl DerivativeConvention {
    pub(crate) fn anchor_rate(self, k: &LegKinematics, geom: &LinkageGeometry) -> f64 {
        match self {
            DerivativeConvention::FixedLeg => k.anchor_rate_fixed_leg(),
            DerivativeConvention::ChainRule => k.anchor_rate_chain_rule(geom),
        }
    }
}

/// Thrust `F_y` at leg angle `theta`, using the default (fixed-leg) derivative convention.
pub fn thrust_force(geom: &LinkageGeometry, model: &ElasticModel, theta: f64) -> Result<f64> {
    thrust_force_with(geom, model, theta, DerivativeConvention::FixedLeg)
}

pub fn thrust_force_with(
    geom: &LinkageGeometry,
    model: &ElasticModel,
    theta: f64,
    convention: DerivativeConvention,
) -> Result<f64> {
    let k = representable(geom, theta)?;
    Ok(thrust_from(geom, model, &k, convention))
}

/// Closed-form thrust for a constant-stiffness band, with the slack clamp.
pub fn thrust_force_linear(geom: &LinkageGeometry, stiffness: f64, theta: f64) -> Result<f64> {
    let k = representable(geom, theta)?;
    if k.anchor_distance <= geom.l0 {
        return Ok(0.0);
    }
    let h = k.height;
    let root = (k.radicand * h.powi(4)).sqrt();
    let sqrt3 = 3f64.sqrt();
    Ok(stiffness * h * (2.0 * sqrt3 * (geom.c - geom.l0) * h * h + 3.0 * root) / (4.0 * root))
}

pub(crate) fn thrust_from(
    geom: &LinkageGeometry,
    model: &ElasticModel,
    k: &LegKinematics,
    convention: DerivativeConvention,
) -> f64 {
    let tension = model.force_unchecked(k.stretch);
    if tension == 0.0 {
        return 0.0;
    }
    tension * convention.anchor_rate(k, geom)
}

fn representable(geom: &LinkageGeometry, theta: f64) -> Result<LegKinematics> {
    let k = geom.kinematics(theta)?;
    if k.radicand <= 0.0 {
        return Err(Error::NonRepresentable {
            theta,
            radicand: k.radicand,
            height: k.height,
        });
    }
    Ok(k)
}

/// Height of maximum thrust for the single-pin knee (`p = q = 0`, `b = a`) with a linear band.
///
/// Requires `c < l0` and `a > |c − l0| / √3`; for `c = l0` the peak sits at full extension.
pub fn peak_height(a: f64, c: f64, l0: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    let offset = c - l0;
    if offset > 0.0 {
        return Err(Error::Precondition(format!(
            "peak before full extension needs c <= l0 (c - l0 = {offset})"
        )));
    }
    if a * a <= offset * offset / 3.0 {
        return Err(Error::Precondition(format!(
            "peak needs a > |c - l0|/sqrt(3) (a = {a}, c - l0 = {offset})"
        )));
    }
    let inner = (a.powi(4) * offset * offset / 3.0).cbrt();
    Ok(2.0 * (a * a - inner).sqrt())
}

/// Height at which the band reaches its rest length (`p = q = 0`, `b = a`).
pub fn distension_height(a: f64, c: f64, l0: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    let offset = c - l0;
    let slack = 3.0 * a * a - offset * offset;
    if slack < 0.0 {
        return Err(Error::Precondition(format!(
            "band never slackens before full extension (3a^2 - (c - l0)^2 = {slack})"
        )));
    }
    Ok(2.0 * (slack / 3.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThrustSample {
    pub theta: f64,
    pub h: f64,
    pub lambda: f64,
    #[serde(rename = "F_l")]
    pub drive_force: f64,
    #[serde(rename = "F_y")]
    pub thrust: f64,
    pub h_norm: f64,
    #[serde(rename = "Fy_norm")]
    pub thrust_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThrustProfile {
    pub geometry: LinkageGeometry,
    pub model: ElasticModel,
    pub samples: Vec<ThrustSample>,
}

impl ThrustProfile {
    /// Sample with the largest thrust.
    pub fn peak(&self) -> Option<&ThrustSample> {
        self.samples
            .iter()
            .max_by(|a, b| a.thrust.total_cmp(&b.thrust))
    }

    /// Linear interpolation of the first height at which the band stops pulling.
    pub fn first_slack_height(&self) -> Option<f64> {
        self.samples.windows(2).find_map(|w| {
            let (s0, s1) = (&w[0], &w[1]);
            (s0.lambda > 1.0 && s1.lambda <= 1.0).then(|| {
                let f = (s0.lambda - 1.0) / (s0.lambda - s1.lambda);
                s0.h + f * (s1.h - s0.h)
            })
        })
    }
}

/// Uniformly θ-sampled thrust profile with columns normalised to their maxima.
pub fn thrust_profile(
    geom: &LinkageGeometry,
    model: &ElasticModel,
    interval: &LegAngleInterval,
    n_samples: usize,
    convention: DerivativeConvention,
) -> Result<ThrustProfile> {
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", "need at least 2 samples"));
    }
    let mut samples = interval
        .grid(n_samples)
        .map(|theta| {
            let k = representable(geom, theta)?;
            Ok(ThrustSample {
                theta,
                h: k.height,
                lambda: k.stretch,
                drive_force: model.force_unchecked(k.stretch),
                thrust: thrust_from(geom, model, &k, convention),
                h_norm: 0.0,
                thrust_norm: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let h_max = samples.iter().map(|s| s.h).fold(f64::MIN, f64::max);
    let f_max = samples.iter().map(|s| s.thrust).fold(0.0, f64::max);
    for s in &mut samples {
        s.h_norm = s.h / h_max;
        s.thrust_norm = if f_max > 0.0 { s.thrust / f_max } else { 0.0 };
    }
    Ok(ThrustProfile {
        geometry: *geom,
        model: *model,
        samples,
    })
}
