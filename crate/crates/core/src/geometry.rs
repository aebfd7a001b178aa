//! Kinematic maps of one leg plane of the three-dyad (S-1) Sarrus linkage.
//!
//! Dyad planes sit 120° apart and the band anchors subtend a 60° aperture; the
//! `SQRT_3` factors below hard-code that aperture.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Constant dimensions of one leg plane plus the band cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkageGeometry {
    /// Leg segment length [m].
    pub a: f64,
    /// Fixed leg separation [m].
    pub c: f64,
    /// Knee offset along the height direction [m].
    pub p: f64,
    /// Knee offset across the height direction [m].
    pub q: f64,
    /// Undistorted band length [m].
    pub l0: f64,
    /// Band cross-sectional area [m²].
    #[serde(rename = "A0")]
    pub area: f64,
}

impl LinkageGeometry {
    pub fn new(a: f64, c: f64, p: f64, q: f64, l0: f64, area: f64) -> Result<Self> {
        let geom = Self {
            a,
            c,
            p,
            q,
            l0,
            area,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Laboratory demonstrator dimensions (7 mm² TheraBand strip).
    pub fn demonstrator() -> Self {
        Self {
            a: 6.82e-2,
            c: 5.50e-2,
            p: 0.70e-2,
            q: 0.50e-2,
            l0: 8.50e-2,
            area: 7.0e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("a", self.a)?;
        ensure_positive("l0", self.l0)?;
        ensure_positive("A0", self.area)?;
        ensure_non_negative("c", self.c)?;
        ensure_non_negative("p", self.p)?;
        ensure_non_negative("q", self.q)?;
        Ok(())
    }

    /// Linkage height `h = 2 a sin(theta) + 2 p`.
    pub fn height(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.height_unchecked(theta))
    }

    /// Effective leg length `b` from the body-leg joint to the band anchor.
    pub fn effective_leg(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.effective_leg_unchecked(theta))
    }

    /// Distance between the band anchor points, `l = c + (√3/2)·√(4b² − h²)`.
    pub fn anchor_distance(&self, theta: f64) -> Result<f64> {
        Ok(self.kinematics(theta)?.anchor_distance)
    }

    /// Same quantity evaluated through the expanded form `c + √(12 b² h⁴ − 3 h⁶) / (2 h²)`.
    pub fn anchor_distance_expanded(&self, theta: f64) -> Result<f64> {
        let k = self.kinematics(theta)?;
        let (b, h) = (k.effective_leg, k.height);
        let radicand = 12.0 * b * b * h.powi(4) - 3.0 * h.powi(6);
        Ok(self.c + radicand.max(0.0).sqrt() / (2.0 * h * h))
    }

    /// Band stretch ratio `λ = l / l0`.
    pub fn stretch(&self, theta: f64) -> Result<f64> {
        Ok(self.kinematics(theta)?.stretch)
    }

    /// All scalar kinematic quantities at `theta`, with the range and representability checks applied.
    pub fn kinematics(&self, theta: f64) -> Result<LegKinematics> {
        check_angle(theta)?;
        let k = self.kinematics_unchecked(theta);
        if k.height <= 0.0 || k.radicand < 0.0 {
            return Err(Error::NonRepresentable {
                theta,
                radicand: k.radicand,
                height: k.height,
            });
        }
        Ok(k)
    }

    /// Checks that every sampled angle of `interval` gives a representable configuration.
    pub fn check_interval(&self, interval: &LegAngleInterval, samples: usize) -> Result<()> {
        for theta in interval.grid(samples.max(2)) {
            let k = self.kinematics(theta)?;
            if k.radicand <= 0.0 {
                return Err(Error::NonRepresentable {
                    theta,
                    radicand: k.radicand,
                    height: k.height,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn height_unchecked(&self, theta: f64) -> f64 {
        2.0 * self.a * theta.sin() + 2.0 * self.p
    }

    pub(crate) fn effective_leg_unchecked(&self, theta: f64) -> f64 {
        let (a, p, q) = (self.a, self.p, self.q);
        (a * a + p * p + q * q + 2.0 * a * (p * theta.sin() + q * theta.cos())).sqrt()
    }

    /// Evaluates the kinematic maps without range checks. Used inside integrator stages, which
    /// may probe slightly outside the valid interval before an event is detected.
    pub(crate) fn kinematics_unchecked(&self, theta: f64) -> LegKinematics {
        let height = self.height_unchecked(theta);
        let effective_leg = self.effective_leg_unchecked(theta);
        let mut radicand = 4.0 * effective_leg * effective_leg - height * height;
        // Full extension (h = 2b) cancels to round-off.
        if radicand < 0.0 && radicand > -1e-12 * effective_leg * effective_leg {
            radicand = 0.0;
        }
        let anchor_distance = self.c + 0.5 * SQRT_3 * radicand.max(0.0).sqrt();
        LegKinematics {
            theta,
            height,
            effective_leg,
            radicand,
            anchor_distance,
            stretch: anchor_distance / self.l0,
        }
    }
}

/// Snapshot of the kinematic maps at one leg angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegKinematics {
    pub theta: f64,
    pub height: f64,
    pub effective_leg: f64,
    /// `4 b² − h²`.
    pub radicand: f64,
    pub anchor_distance: f64,
    pub stretch: f64,
}

impl LegKinematics {
    /// `|dl/dh|` with `b` held fixed at its current value.
    pub fn anchor_rate_fixed_leg(&self) -> f64 {
        0.5 * SQRT_3 * self.height / self.radicand.sqrt()
    }

    /// `-dl/dh` including the variation of `b` with the leg angle.
    pub fn anchor_rate_chain_rule(&self, geom: &LinkageGeometry) -> f64 {
        let (a, p, q) = (geom.a, geom.p, geom.q);
        let (s, c) = self.theta.sin_cos();
        let db_dtheta = a * (p * c - q * s) / self.effective_leg;
        let dh_dtheta = 2.0 * a * c;
        let db_dh = db_dtheta / dh_dtheta;
        0.5 * SQRT_3 * (self.height - 4.0 * self.effective_leg * db_dh) / self.radicand.sqrt()
    }
}

/// Operating range of the leg angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegAngleInterval {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl LegAngleInterval {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite()) {
            return Err(Error::invalid("interval", "bounds must be finite"));
        }
        if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= FRAC_PI_2) {
            return Err(Error::invalid(
                "interval",
                format!("need 0 <= theta_min < theta_max <= pi/2, got [{theta_min}, {theta_max}]"),
            ));
        }
        Ok(Self {
            theta_min,
            theta_max,
        })
    }

    pub fn full() -> Self {
        Self {
            theta_min: 0.0,
            theta_max: FRAC_PI_2,
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        (self.theta_min..=self.theta_max).contains(&theta)
    }

    /// `n` uniformly spaced angles including both ends.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let span = self.theta_max - self.theta_min;
        let last = n.saturating_sub(1).max(1) as f64;
        (0..n).map(move |i| {
            if i + 1 == n {
                self.theta_max
            } else {
                self.theta_min + span * i as f64 / last
            }
        })
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() && (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn demo() -> LinkageGeometry {
        LinkageGeometry::demonstrator()
    }

    #[test]
    fn height_examples() {
        let g = demo();
        assert_eq!(g.height(0.0).unwrap(), 0.014);
        assert!((g.height(0.066).unwrap() - 0.023).abs() < 1e-5);
        assert_relative_eq!(g.height(FRAC_PI_2).unwrap(), 0.1504, max_relative = 1e-12);
    }

    #[test]
    fn effective_leg_examples() {
        let g = demo();
        let plain = LinkageGeometry { p: 0.0, q: 0.0, ..g };
        for theta in [0.0, 0.4, 1.2] {
            assert_relative_eq!(plain.effective_leg(theta).unwrap(), plain.a, max_relative = 1e-15);
        }
        assert_relative_eq!(g.effective_leg(0.066).unwrap(), 0.073_950_836_390_72, max_relative = 1e-10);
        assert!((g.effective_leg(0.0).unwrap() - 0.073532).abs() < 5e-6);
    }

    #[test]
    fn anchor_distance_and_stretch_examples() {
        let g = demo();
        assert_relative_eq!(g.anchor_distance(0.066).unwrap(), 0.181_528_934_358_31, max_relative = 1e-10);
        assert!((g.anchor_distance(0.066).unwrap() - 0.18152).abs() < 1e-5);
        assert!((g.anchor_distance(1.3).unwrap() - 0.0952).abs() < 1e-4);
        assert!((g.stretch(0.066).unwrap() - 2.1355).abs() < 2e-4);
        assert!((g.stretch(1.3).unwrap() - 1.12).abs() < 1e-3);
    }

    #[test]
    fn full_extension_gives_separation() {
        // q = 0 makes h = 2b reachable at theta = pi/2.
        let g = LinkageGeometry { q: 0.0, ..demo() };
        let k = g.kinematics(FRAC_PI_2).unwrap();
        assert_eq!(k.radicand, 0.0);
        assert_relative_eq!(k.anchor_distance, g.c, max_relative = 1e-12);
    }

    #[test]
    fn stretch_is_one_at_rest_length() {
        let g = demo();
        // Choose l0 equal to the anchor distance at some angle.
        let l = g.anchor_distance(0.9).unwrap();
        let g = LinkageGeometry { l0: l, ..g };
        assert_eq!(g.stretch(0.9).unwrap(), 1.0);
    }

    #[test]
    fn rejects_out_of_range_angles() {
        let g = demo();
        assert_eq!(g.height(-0.01), Err(Error::AngleOutOfRange(-0.01)));
        assert!(matches!(g.effective_leg(1.6), Err(Error::AngleOutOfRange(_))));
        assert!(matches!(g.anchor_distance(f64::NAN), Err(Error::AngleOutOfRange(_))));
    }

    #[test]
    fn zero_height_is_not_representable() {
        let g = LinkageGeometry { p: 0.0, ..demo() };
        assert!(matches!(g.anchor_distance(0.0), Err(Error::NonRepresentable { .. })));
    }

    #[test]
    fn validation() {
        assert!(LinkageGeometry::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(LinkageGeometry::new(1.0, -0.1, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(LinkageGeometry::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(LinkageGeometry::new(1.0, 0.5, 0.0, 0.0, 1.0, 1.0).is_ok());
        assert!(LegAngleInterval::new(0.5, 0.5).is_err());
        assert!(LegAngleInterval::new(-0.1, 0.5).is_err());
        assert!(LegAngleInterval::new(0.0, 1.6).is_err());
    }

    #[test]
    fn monotone_on_fine_grid() {
        let g = demo();
        let interval = LegAngleInterval::new(1e-6, FRAC_PI_2 - 1e-6).unwrap();
        let ks: Vec<_> = interval.grid(1000).map(|t| g.kinematics(t).unwrap()).collect();
        for w in ks.windows(2) {
            assert!(w[1].height > w[0].height);
            assert!(w[1].anchor_distance < w[0].anchor_distance);
        }
    }

    #[test]
    fn expanded_and_simplified_forms_agree() {
        let g = demo();
        let interval = LegAngleInterval::new(0.0, FRAC_PI_2).unwrap();
        for theta in interval.grid(1000) {
            let simplified = g.anchor_distance(theta).unwrap();
            let expanded = g.anchor_distance_expanded(theta).unwrap();
            assert_relative_eq!(simplified, expanded, max_relative = 1e-12);
        }
    }

    #[test]
    fn fixed_leg_rate_matches_central_difference_when_offsets_vanish() {
        // With p = q = 0, b is constant and the fixed-leg derivative is exact.
        let g = LinkageGeometry { p: 0.0, q: 0.0, ..demo() };
        let l_of_theta = |t: f64| g.anchor_distance(t).unwrap();
        for theta in LegAngleInterval::new(0.05, 1.5).unwrap().grid(200) {
            let dt = 1e-6;
            let dl = l_of_theta(theta + dt) - l_of_theta(theta - dt);
            let dh = g.height(theta + dt).unwrap() - g.height(theta - dt).unwrap();
            let k = g.kinematics(theta).unwrap();
            assert_relative_eq!(-dl / dh, k.anchor_rate_fixed_leg(), max_relative = 1e-6);
        }
    }

    #[test]
    fn chain_rule_rate_matches_central_difference() {
        let g = demo();
        for theta in LegAngleInterval::new(0.05, 1.5).unwrap().grid(200) {
            let dt = 1e-6;
            let dl = g.anchor_distance(theta + dt).unwrap() - g.anchor_distance(theta - dt).unwrap();
            let dh = g.height(theta + dt).unwrap() - g.height(theta - dt).unwrap();
            let k = g.kinematics(theta).unwrap();
            assert_relative_eq!(-dl / dh, k.anchor_rate_chain_rule(&g), max_relative = 1e-6);
        }
    }
}
