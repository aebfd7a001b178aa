//! Plücker screws and the mobility analysis of n-sided Sarrus mechanisms.
//!
//! A screw is stored as `[S; S0]`. The reciprocal product pairs the direction of one screw with
//! the moment of the other, so a reciprocal system is the nullspace of `M·Δ` where `M` stacks the
//! screws as rows and `Δ = [[0, I], [I, 0]]`.

use std::fmt;

use nalgebra::{DMatrix, Matrix6, Vector3, Vector6};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Screw {
    pub direction: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl Screw {
    pub fn new(direction: Vector3<f64>, moment: Vector3<f64>) -> Self {
        Self { direction, moment }
    }

    /// Zero-pitch screw along `direction` through `point`.
    pub fn line(point: Vector3<f64>, direction: Vector3<f64>) -> Self {
        Self::new(direction, point.cross(&direction))
    }

    /// Infinite-pitch screw: a pure couple or a pure translation.
    pub fn couple(direction: Vector3<f64>) -> Self {
        Self::new(Vector3::zeros(), direction)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self::new(
            Vector3::new(v[0], v[1], v[2]),
            Vector3::new(v[3], v[4], v[5]),
        )
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let (s, m) = (&self.direction, &self.moment);
        Vector6::new(s.x, s.y, s.z, m.x, m.y, m.z)
    }

    pub fn reciprocal_product(&self, other: &Screw) -> f64 {
        reciprocal_product(self, other)
    }

    /// `(S·S0)/(S·S)`; `None` for couples.
    pub fn pitch(&self) -> Option<f64> {
        let n2 = self.direction.norm_squared();
        (n2 > 0.0).then(|| self.direction.dot(&self.moment) / n2)
    }

    pub fn is_couple(&self) -> bool {
        self.direction.norm_squared() == 0.0 && self.moment.norm_squared() > 0.0
    }

    /// Scaled so that `|S| = 1`, or `|S0| = 1` for couples.
    /// A direction part below `1e-12` of the moment part is treated as round-off and dropped.
    pub fn normalized(&self) -> Self {
        let (n, m) = (self.direction.norm(), self.moment.norm());
        if n > 1e-12 * m {
            Self::new(self.direction / n, self.moment / n)
        } else if m > 0.0 {
            Self::couple(self.moment / m)
        } else {
            *self
        }
    }
}

impl Serialize for Screw {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let arr = |v: &Vector3<f64>| [v.x, v.y, v.z];
        let mut st = serializer.serialize_struct("Screw", 2)?;
        st.serialize_field("S", &arr(&self.direction))?;
        st.serialize_field("S0", &arr(&self.moment))?;
        st.end()
    }
}

impl fmt::Display for Screw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, m) = (&self.direction, &self.moment);
        write!(
            f,
            "[{:.4}, {:.4}, {:.4}; {:.4}, {:.4}, {:.4}]",
            s.x, s.y, s.z, m.x, m.y, m.z
        )
    }
}

pub fn reciprocal_product(s1: &Screw, s2: &Screw) -> f64 {
    s1.direction.dot(&s2.moment) + s2.direction.dot(&s1.moment)
}

fn pairing() -> Matrix6<f64> {
    let mut d = Matrix6::zeros();
    for i in 0..3 {
        d[(i, i + 3)] = 1.0;
        d[(i + 3, i)] = 1.0;
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScrewSystem {
    pub screws: Vec<Screw>,
}

impl ScrewSystem {
    pub fn new(screws: Vec<Screw>) -> Self {
        Self { screws }
    }

    pub fn len(&self) -> usize {
        self.screws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screws.is_empty()
    }

    /// Screws as rows, padded with zero rows to at least six.
    fn matrix(&self) -> DMatrix<f64> {
        let rows = self.screws.len().max(6);
        let mut m = DMatrix::zeros(rows, 6);
        for (i, s) in self.screws.iter().enumerate() {
            m.row_mut(i).copy_from(&s.to_vector().transpose());
        }
        m
    }

    fn singular_values(m: DMatrix<f64>) -> Vec<f64> {
        m.singular_values().iter().copied().collect()
    }

    /// Numeric rank with the threshold `max(dim)·ε·σ_max`.
    pub fn rank(&self) -> usize {
        let dim = self.screws.len().max(6) as f64;
        self.rank_with_tolerance(dim * f64::EPSILON)
    }

    /// Numeric rank counting singular values above `relative·σ_max`.
    pub fn rank_with_tolerance(&self, relative: f64) -> usize {
        if self.screws.is_empty() {
            return 0;
        }
        let sv = Self::singular_values(self.matrix());
        let max = sv.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > relative * max).count()
    }

    /// Basis of all screws reciprocal to every member of the system.
    pub fn reciprocal(&self) -> ScrewSystem {
        let m = self.matrix() * DMatrix::from_iterator(6, 6, pairing().iter().copied());
        let dim = m.nrows() as f64;
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let tol = dim * f64::EPSILON * max;
        let screws = (0..6)
            .filter(|&i| max == 0.0 || svd.singular_values[i] <= tol)
            .map(|i| {
                let row = v_t.row(i);
                Screw::from_vector(&Vector6::from_iterator(row.iter().copied())).normalized()
            })
            .collect();
        ScrewSystem::new(screws)
    }

    /// Orthonormal basis of the span, as 6-vectors.
    fn basis(&self) -> Vec<Vector6<f64>> {
        let rank = self.rank();
        if rank == 0 {
            return Vec::new();
        }
        let svd = self.matrix().svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order
            .into_iter()
            .take(rank)
            .map(|i| Vector6::from_iterator(v_t.row(i).iter().copied()))
            .collect()
    }

    /// Principal angles between the spans of two systems, ascending. Empty when either is empty.
    pub fn principal_angles(&self, other: &ScrewSystem) -> Vec<f64> {
        let (a, b) = (self.basis(), other.basis());
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
        // Sines of the angles from the part of `b` outside span(a); acos loses small angles.
        let residual = DMatrix::from_fn(6, b.len(), |r, j| {
            let proj: Vector6<f64> = a.iter().map(|q| q * q.dot(&b[j])).sum();
            (b[j] - proj)[r]
        });
        let mut angles: Vec<f64> = residual
            .singular_values()
            .iter()
            .map(|s| s.clamp(0.0, 1.0).asin())
            .collect();
        angles.sort_by(f64::total_cmp);
        angles
    }

    /// Same span, judged by rank and the largest principal angle.
    pub fn spans_equal(&self, other: &ScrewSystem, angle_tol: f64) -> bool {
        let r = self.rank();
        r == other.rank()
            && self
                .principal_angles(other)
                .iter()
                .all(|&a| a <= angle_tol)
    }

    pub fn concat<'a>(systems: impl IntoIterator<Item = &'a ScrewSystem>) -> ScrewSystem {
        ScrewSystem::new(systems.into_iter().flat_map(|s| s.screws.iter().copied()).collect())
    }
}

/// Direction of the line where two planes with normals `e1`, `e2` meet.
pub fn intersection_direction(e1: &Vector3<f64>, e2: &Vector3<f64>) -> Result<Vector3<f64>> {
    let c = e1.cross(e2);
    let n = c.norm();
    if n <= 1e-12 * e1.norm() * e2.norm() {
        return Err(Error::ParallelPlanes);
    }
    Ok(c / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Joint {
    A,
    B,
    C,
}

impl std::str::FromStr for Joint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Joint::A),
            "B" | "b" => Ok(Joint::B),
            "C" | "c" => Ok(Joint::C),
            _ => Err(Error::Input(format!("unknown joint `{s}`, expected A, B or C"))),
        }
    }
}

/// One planar RRR chain: three revolute axes parallel to `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarrusChain {
    pub normal: Vector3<f64>,
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
}

impl SarrusChain {
    pub fn joint(&self, joint: Joint) -> Vector3<f64> {
        match joint {
            Joint::A => self.a,
            Joint::B => self.b,
            Joint::C => self.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarrusMechanism {
    pub chains: Vec<SarrusChain>,
    /// Common direction of the chain planes.
    pub common: Vector3<f64>,
}

impl SarrusMechanism {
    /// Assembles a mechanism from explicit chains. Parallel planes are accepted so degenerate
    /// layouts can be analysed; `common` must be a unit vector lying in every chain plane.
    pub fn from_chains(chains: Vec<SarrusChain>, common: Vector3<f64>) -> Result<Self> {
        if chains.len() < 2 {
            return Err(Error::invalid("n", "at least two chains are required"));
        }
        if (common.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("e_C", "must be a unit vector"));
        }
        for (i, ch) in chains.iter().enumerate() {
            if (ch.normal.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("e_i", format!("normal of chain {i} is not a unit vector")));
            }
            if ch.normal.dot(&common).abs() > 1e-9 {
                return Err(Error::invalid("e_i", format!("chain {i} plane does not contain e_C")));
            }
            for p in [ch.b, ch.c] {
                if (p - ch.a).dot(&ch.normal).abs() > 1e-9 {
                    return Err(Error::invalid("joints", format!("chain {i} is not planar")));
                }
            }
        }
        Ok(Self { chains, common })
    }

    pub fn n(&self) -> usize {
        self.chains.len()
    }

    fn chain(&self, i: usize) -> Result<&SarrusChain> {
        self.chains
            .get(i)
            .ok_or_else(|| Error::invalid("chain", format!("index {i} out of range for n = {}", self.n())))
    }
}

/// Symmetric-style construction: chain `i` lies in the vertical plane at azimuth `azimuths[i]`
/// (radians), with its base joint on a circle of `base_radius` and links of length `a` folded
/// at leg angle `theta`.
pub fn build_sarrus(n: usize, azimuths: &[f64], a: f64, theta: f64, base_radius: f64) -> Result<SarrusMechanism> {
    if n < 2 {
        return Err(Error::invalid("n", "at least two chains are required"));
    }
    if azimuths.len() != n {
        return Err(Error::invalid("azimuths", format!("expected {n} values, got {}", azimuths.len())));
    }
    crate::error::ensure_positive("a", a)?;
    crate::error::ensure_non_negative("base_radius", base_radius)?;
    crate::error::ensure_finite("theta", theta)?;
    let z = Vector3::z();
    let chains: Vec<SarrusChain> = azimuths
        .iter()
        .map(|&phi| {
            let u = Vector3::new(phi.cos(), phi.sin(), 0.0);
            let normal = Vector3::new(-phi.sin(), phi.cos(), 0.0);
            let pa = base_radius * u;
            SarrusChain {
                normal,
                a: pa,
                b: pa + a * theta.cos() * u + a * theta.sin() * z,
                c: pa + 2.0 * a * theta.sin() * z,
            }
        })
        .collect();
    let independent = chains
        .iter()
        .skip(1)
        .any(|ch| intersection_direction(&chains[0].normal, &ch.normal).is_ok());
    if !independent {
        return Err(Error::ParallelPlanes);
    }
    SarrusMechanism::from_chains(chains, z)
}

pub fn chain_joint_screws(mech: &SarrusMechanism, i: usize) -> Result<ScrewSystem> {
    let ch = mech.chain(i)?;
    Ok(ScrewSystem::new(
        [ch.a, ch.b, ch.c]
            .iter()
            .map(|&r| Screw::line(r, ch.normal))
            .collect(),
    ))
}

/// Closed-form constraint wrenches of chain `i`: a force along the joint axes through C and
/// two couples, one about e_C and one about e_C × e_i.
pub fn chain_constraint_screws(mech: &SarrusMechanism, i: usize) -> Result<ScrewSystem> {
    let ch = mech.chain(i)?;
    let e_c = mech.common;
    Ok(ScrewSystem::new(vec![
        Screw::line(ch.c, ch.normal),
        Screw::couple(e_c),
        Screw::couple(e_c.cross(&ch.normal)),
    ]))
}

/// Constraint wrenches of chain `i` computed as the reciprocal of its joint screws.
pub fn chain_constraint_screws_numeric(mech: &SarrusMechanism, i: usize) -> Result<ScrewSystem> {
    Ok(chain_joint_screws(mech, i)?.reciprocal())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlatformConstraints {
    pub system: ScrewSystem,
    pub rank: usize,
    /// Constraints shared by every chain.
    pub common: ScrewSystem,
    /// Rank below five: the layout is not a one-DOF Sarrus mechanism.
    pub degenerate: bool,
}

pub fn platform_constraint_system(mech: &SarrusMechanism) -> Result<PlatformConstraints> {
    let per_chain = (0..mech.n())
        .map(|i| chain_constraint_screws(mech, i))
        .collect::<Result<Vec<_>>>()?;
    let system = ScrewSystem::concat(&per_chain);
    let joints = (0..mech.n())
        .map(|i| chain_joint_screws(mech, i))
        .collect::<Result<Vec<_>>>()?;
    // Wrenches every chain can exert are those reciprocal to all joints together.
    let common = ScrewSystem::concat(&joints).reciprocal();
    let rank = system.rank();
    Ok(PlatformConstraints {
        system,
        rank,
        common,
        degenerate: rank < 5,
    })
}

/// Twists of the upper platform allowed by the constraint union.
pub fn platform_freedoms(mech: &SarrusMechanism) -> Result<ScrewSystem> {
    Ok(platform_constraint_system(mech)?.system.reciprocal())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationOutcome {
    /// Platform still moves with the chosen joints locked.
    Mobile,
    /// Locking the joints immobilises the platform and no lock is superfluous.
    Controlled,
    /// Immobilised, and at least one lock could be dropped.
    Redundant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActuationVerdict {
    pub locks: Vec<(usize, Joint)>,
    pub constraint_rank: usize,
    pub dof: usize,
    pub outcome: ActuationOutcome,
}

fn locked_rank(mech: &SarrusMechanism, locks: &[(usize, Joint)]) -> Result<usize> {
    let mut systems = Vec::with_capacity(mech.n());
    for i in 0..mech.n() {
        let locked: Vec<Joint> = locks.iter().filter(|(c, _)| *c == i).map(|&(_, j)| j).collect();
        if locked.is_empty() {
            systems.push(chain_constraint_screws(mech, i)?);
        } else {
            let ch = mech.chain(i)?;
            let free = ScrewSystem::new(
                [Joint::A, Joint::B, Joint::C]
                    .into_iter()
                    .filter(|j| !locked.contains(j))
                    .map(|j| Screw::line(ch.joint(j), ch.normal))
                    .collect(),
            );
            systems.push(free.reciprocal());
        }
    }
    Ok(ScrewSystem::concat(&systems).rank())
}

/// Constraint rank and mobility with the listed joints locked, e.g. by an actuator.
pub fn actuation_analysis(mech: &SarrusMechanism, locks: &[(usize, Joint)]) -> Result<ActuationVerdict> {
    for &(i, _) in locks {
        mech.chain(i)?;
    }
    let rank = locked_rank(mech, locks)?;
    let outcome = if rank < 6 {
        ActuationOutcome::Mobile
    } else {
        let mut redundant = false;
        for skip in 0..locks.len() {
            let fewer: Vec<_> = locks
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &l)| l)
                .collect();
            if locked_rank(mech, &fewer)? == 6 {
                redundant = true;
                break;
            }
        }
        if redundant {
            ActuationOutcome::Redundant
        } else {
            ActuationOutcome::Controlled
        }
    };
    Ok(ActuationVerdict {
        locks: locks.to_vec(),
        constraint_rank: rank,
        dof: 6 - rank,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub index: usize,
    pub normal: [f64; 3],
    pub joint_screws: ScrewSystem,
    pub constraint_screws: ScrewSystem,
    pub joint_rank: usize,
    pub constraint_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MobilityReport {
    pub n: usize,
    pub common_direction: [f64; 3],
    pub chains: Vec<ChainReport>,
    pub constraint_rank: usize,
    pub common_constraints: ScrewSystem,
    pub degenerate: bool,
    pub dof: usize,
    pub motion_screws: ScrewSystem,
    pub actuation: Vec<ActuationVerdict>,
}

pub fn mobility_report(mech: &SarrusMechanism, lock_sets: &[Vec<(usize, Joint)>]) -> Result<MobilityReport> {
    let arr = |v: &Vector3<f64>| [v.x, v.y, v.z];
    let chains = (0..mech.n())
        .map(|i| {
            let joints = chain_joint_screws(mech, i)?;
            let constraints = chain_constraint_screws(mech, i)?;
            Ok(ChainReport {
                index: i,
                normal: arr(&mech.chains[i].normal),
                joint_rank: joints.rank(),
                constraint_rank: constraints.rank(),
                joint_screws: joints,
                constraint_screws: constraints,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let platform = platform_constraint_system(mech)?;
    let motion = platform.system.reciprocal();
    let actuation = lock_sets
        .iter()
        .map(|locks| actuation_analysis(mech, locks))
        .collect::<Result<Vec<_>>>()?;
    Ok(MobilityReport {
        n: mech.n(),
        common_direction: arr(&mech.common),
        chains,
        constraint_rank: platform.rank,
        common_constraints: platform.common,
        degenerate: platform.degenerate,
        dof: motion.rank(),
        motion_screws: motion,
        actuation,
    })
}
