//! Rigid-motion trajectories `h(t) = (A(t), b(t))` on `t ∈ [0, 1]` with two time derivatives.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Quaternion, Rotation3, Unit, UnitQuaternion, Vector4};

use crate::spline::CubicSpline;
use crate::{Mat3, Result, SweepError, Vec3};

/// Rigid motion at one instant together with its first and second time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionJet {
    pub t: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub d_rotation: Mat3,
    pub d_translation: Vec3,
    pub dd_rotation: Mat3,
    pub dd_translation: Vec3,
}

/// Position, velocity and acceleration of a moving point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointJet {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl MotionJet {
    pub fn identity(t: f64) -> Self {
        MotionJet {
            t,
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
            d_rotation: Mat3::zeros(),
            d_translation: Vec3::zeros(),
            dd_rotation: Mat3::zeros(),
            dd_translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, x: &Vec3) -> PointJet {
        PointJet {
            position: self.rotation * x + self.translation,
            velocity: self.d_rotation * x + self.d_translation,
            acceleration: self.dd_rotation * x + self.dd_translation,
        }
    }

    /// The motion `x ↦ outer(self(x))`, differentiated by the product rule.
    pub fn then(&self, outer: &MotionJet) -> MotionJet {
        let (a1, b1) = (self.rotation, self.translation);
        let (a2, b2) = (outer.rotation, outer.translation);
        MotionJet {
            t: self.t,
            rotation: a2 * a1,
            translation: a2 * b1 + b2,
            d_rotation: outer.d_rotation * a1 + a2 * self.d_rotation,
            d_translation: outer.d_rotation * b1 + a2 * self.d_translation + outer.d_translation,
            dd_rotation: outer.dd_rotation * a1 + 2.0 * outer.d_rotation * self.d_rotation + a2 * self.dd_rotation,
            dd_translation: outer.dd_rotation * b1
                + 2.0 * outer.d_rotation * self.d_translation
                + a2 * self.dd_translation
                + outer.dd_translation,
        }
    }

    /// Pointwise group inverse `(Aᵀ, -Aᵀb)` with its time derivatives.
    pub fn inverse(&self) -> MotionJet {
        let at = self.rotation.transpose();
        let dat = self.d_rotation.transpose();
        let ddat = self.dd_rotation.transpose();
        let b = self.translation;
        let db = self.d_translation;
        let ddb = self.dd_translation;
        MotionJet {
            t: self.t,
            rotation: at,
            translation: -(at * b),
            d_rotation: dat,
            d_translation: -(dat * b) - at * db,
            dd_rotation: ddat,
            dd_translation: -(ddat * b) - 2.0 * dat * db - at * ddb,
        }
    }

    /// `h(t) ∘ h(t0)⁻¹`: the same motion expressed so that it is the identity at `base.t`.
    pub fn rebased(&self, base: &MotionJet) -> MotionJet {
        let a0t = base.rotation.transpose();
        let shift = a0t * base.translation;
        MotionJet {
            t: self.t,
            rotation: self.rotation * a0t,
            translation: self.translation - self.rotation * shift,
            d_rotation: self.d_rotation * a0t,
            d_translation: self.d_translation - self.d_rotation * shift,
            dd_rotation: self.dd_rotation * a0t,
            dd_translation: self.dd_translation - self.dd_rotation * shift,
        }
    }

    /// Frobenius norm of `AᵀA - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Mat3::identity()).norm()
    }

    /// Frobenius norm of `A'ᵀA + AᵀA'`, the derivative of the orthogonality constraint.
    pub fn skew_defect(&self) -> f64 {
        let m = self.d_rotation.transpose() * self.rotation + self.rotation.transpose() * self.d_rotation;
        m.norm()
    }
}

/// A C² rigid motion on `[0, 1]` that is the identity at `t = 0`.
pub trait Trajectory: Send + Sync + fmt::Debug {
    /// Jet at `t`. Callers check the time range; implementations may extrapolate.
    fn jet(&self, t: f64) -> MotionJet;

    /// True when the rotation part is the identity for all `t`.
    fn is_translation(&self) -> bool {
        (0..=32).all(|k| {
            let j = self.jet(k as f64 / 32.0);
            (j.rotation - Mat3::identity()).norm() <= 1e-12
                && j.d_rotation.norm() <= 1e-12
                && j.dd_rotation.norm() <= 1e-12
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(SweepError::TimeOutOfRange { t })
    }
}

pub fn sample_motion(traj: &dyn Trajectory, t: f64) -> Result<MotionJet> {
    check_time(t)?;
    Ok(traj.jet(t))
}

pub fn inverse_motion(traj: &dyn Trajectory, t: f64) -> Result<MotionJet> {
    Ok(sample_motion(traj, t)?.inverse())
}

pub fn point_trajectory(traj: &dyn Trajectory, x: &Vec3, t: f64) -> Result<PointJet> {
    Ok(sample_motion(traj, t)?.apply(x))
}

/// Path of the fixed space point `x` seen from the moving solid, with the motion re-based
/// so that it is the identity at `t0`: `ȳ(t) = Ã(t)ᵀ(x - b̃(t))`.
pub fn inverse_point_trajectory(traj: &dyn Trajectory, x: &Vec3, t0: f64, t: f64) -> Result<PointJet> {
    let base = sample_motion(traj, t0)?;
    let jet = sample_motion(traj, t)?.rebased(&base);
    Ok(jet.inverse().apply(x))
}

/// Checks the jet invariants of a trajectory at `samples + 1` uniform times.
pub fn validate_trajectory(traj: &dyn Trajectory, samples: usize) -> Result<()> {
    let j0 = traj.jet(0.0);
    if (j0.rotation - Mat3::identity()).norm() > 1e-12 || j0.translation.norm() > 1e-12 {
        return Err(SweepError::InvalidTrajectory(
            "motion must be the identity at t = 0".into(),
        ));
    }
    for k in 0..=samples.max(1) {
        let t = k as f64 / samples.max(1) as f64;
        let j = traj.jet(t);
        let finite = j
            .rotation
            .iter()
            .chain(j.d_rotation.iter())
            .chain(j.dd_rotation.iter())
            .chain(j.translation.iter())
            .chain(j.d_translation.iter())
            .chain(j.dd_translation.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(SweepError::InvalidTrajectory(format!("non-finite jet at t = {t}")));
        }
        if j.orthogonality_defect() > 1e-12 || (j.rotation.determinant() - 1.0).abs() > 1e-12 {
            return Err(SweepError::InvalidTrajectory(format!(
                "rotation part is not in SO(3) at t = {t}"
            )));
        }
        if j.skew_defect() > 1e-9 * (1.0 + j.d_rotation.norm()) {
            return Err(SweepError::InvalidTrajectory(format!(
                "rotation derivative is not tangent to SO(3) at t = {t}"
            )));
        }
    }
    Ok(())
}

fn unit_axis(axis: Vec3, what: &str) -> Result<Unit<Vec3>> {
    if !(axis.norm() > 1e-12) || axis.iter().any(|x| !x.is_finite()) {
        return Err(SweepError::InvalidTrajectory(format!(
            "{what} must be a nonzero vector"
        )));
    }
    Ok(Unit::new_normalize(axis))
}

fn cross_matrix(k: &Vec3) -> Mat3 {
    Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0)
}

/// No motion at all. Sweeps with it are degenerate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stationary;

impl Trajectory for Stationary {
    fn jet(&self, t: f64) -> MotionJet {
        MotionJet::identity(t)
    }

    fn is_translation(&self) -> bool {
        true
    }
}

/// `b(t) = v t + a t² / 2`.
#[derive(Debug, Clone, Copy)]
pub struct LinearTranslation {
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl LinearTranslation {
    pub fn uniform(velocity: Vec3) -> Self {
        LinearTranslation {
            velocity,
            acceleration: Vec3::zeros(),
        }
    }
}

impl Trajectory for LinearTranslation {
    fn jet(&self, t: f64) -> MotionJet {
        MotionJet {
            translation: self.velocity * t + self.acceleration * (0.5 * t * t),
            d_translation: self.velocity + self.acceleration * t,
            dd_translation: self.acceleration,
            ..MotionJet::identity(t)
        }
    }

    fn is_translation(&self) -> bool {
        true
    }
}

/// Translation along a circle: `b(t) = r((cos ωt - 1) e1 + sin ωt e2)`.
#[derive(Debug, Clone, Copy)]
pub struct CircularTranslation {
    radius: f64,
    rate: f64,
    e1: Vec3,
    e2: Vec3,
}

impl CircularTranslation {
    /// `e1` points from the circle's center to the start position, `e2` is the initial heading.
    pub fn new(radius: f64, rate: f64, e1: Vec3, e2: Vec3) -> Result<Self> {
        if !(radius > 0.0) || !rate.is_finite() {
            return Err(SweepError::InvalidTrajectory(
                "circular path needs a positive radius and finite rate".into(),
            ));
        }
        let e1 = unit_axis(e1, "e1")?.into_inner();
        let e2 = unit_axis(e2, "e2")?.into_inner();
        if e1.dot(&e2).abs() > 1e-12 {
            return Err(SweepError::InvalidTrajectory("e1 and e2 must be orthogonal".into()));
        }
        Ok(CircularTranslation { radius, rate, e1, e2 })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Center of the circle traced by the body origin.
    pub fn center(&self) -> Vec3 {
        -self.radius * self.e1
    }

    /// Unit normal of the plane of the circle.
    pub fn plane_normal(&self) -> Vec3 {
        self.e1.cross(&self.e2)
    }
}

impl Trajectory for CircularTranslation {
    fn jet(&self, t: f64) -> MotionJet {
        let (s, c) = (self.rate * t).sin_cos();
        let (r, w) = (self.radius, self.rate);
        MotionJet {
            translation: r * ((c - 1.0) * self.e1 + s * self.e2),
            d_translation: r * w * (-s * self.e1 + c * self.e2),
            dd_translation: -r * w * w * (c * self.e1 + s * self.e2),
            ..MotionJet::identity(t)
        }
    }

    fn is_translation(&self) -> bool {
        true
    }
}

/// Rotation about a fixed axis through `pivot` by the angle `ω t + α t² / 2`,
/// optionally advancing along the axis by `advance · t` (a screw motion).
#[derive(Debug, Clone, Copy)]
pub struct AxisRotation {
    axis: Unit<Vec3>,
    pivot: Vec3,
    rate: f64,
    angular_acceleration: f64,
    advance: f64,
}

impl AxisRotation {
    pub fn new(axis: Vec3, pivot: Vec3, rate: f64) -> Result<Self> {
        Ok(AxisRotation {
            axis: unit_axis(axis, "rotation axis")?,
            pivot,
            rate,
            angular_acceleration: 0.0,
            advance: 0.0,
        })
    }

    pub fn with_angular_acceleration(mut self, alpha: f64) -> Self {
        self.angular_acceleration = alpha;
        self
    }

    /// Screw motion: translation along the axis at `advance` length units per unit time.
    pub fn screw(axis: Vec3, pivot: Vec3, rate: f64, advance: f64) -> Result<Self> {
        let mut r = Self::new(axis, pivot, rate)?;
        r.advance = advance;
        Ok(r)
    }
}

impl Trajectory for AxisRotation {
    fn jet(&self, t: f64) -> MotionJet {
        let angle = self.rate * t + 0.5 * self.angular_acceleration * t * t;
        let d_angle = self.rate + self.angular_acceleration * t;
        let dd_angle = self.angular_acceleration;
        let k = cross_matrix(&self.axis);
        let (s, c) = angle.sin_cos();
        let rot = Mat3::identity() + s * k + (1.0 - c) * k * k;
        let d_rot = d_angle * k * rot;
        let dd_rot = dd_angle * k * rot + d_angle * d_angle * k * k * rot;
        let a = self.axis.into_inner();
        let p = self.pivot;
        MotionJet {
            t,
            rotation: rot,
            translation: p - rot * p + self.advance * t * a,
            d_rotation: d_rot,
            d_translation: -(d_rot * p) + self.advance * a,
            dd_rotation: dd_rot,
            dd_translation: -(dd_rot * p),
        }
    }

    fn is_translation(&self) -> bool {
        self.rate == 0.0 && self.angular_acceleration == 0.0
    }
}

/// Product of motions: `first` is applied to the body, then `then`.
#[derive(Debug, Clone)]
pub struct Composition {
    stages: Vec<Arc<dyn Trajectory>>,
}

impl Composition {
    pub fn new(stages: Vec<Arc<dyn Trajectory>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(SweepError::InvalidTrajectory(
                "composition needs at least one stage".into(),
            ));
        }
        Ok(Composition { stages })
    }
}

impl Trajectory for Composition {
    fn jet(&self, t: f64) -> MotionJet {
        self.stages
            .iter()
            .fold(MotionJet::identity(t), |acc, s| acc.then(&s.jet(t)))
    }

    fn is_translation(&self) -> bool {
        self.stages.iter().all(|s| s.is_translation())
    }
}

/// One sampled pose of a keyframed motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub time: f64,
    pub rotation: Mat3,
    pub position: Vec3,
}

/// Keyframed motion: natural cubic splines through the quaternion components
/// (normalized afterwards) and through the positions.
#[derive(Debug, Clone)]
pub struct KeyframeTrajectory {
    quat: [CubicSpline; 4],
    pos: [CubicSpline; 3],
}

impl KeyframeTrajectory {
    pub fn new(frames: &[Keyframe]) -> Result<Self> {
        if frames.len() < 2 {
            return Err(SweepError::InvalidTrajectory("need at least two keyframes".into()));
        }
        let first = &frames[0];
        let last = &frames[frames.len() - 1];
        if first.time != 0.0 || last.time != 1.0 {
            return Err(SweepError::InvalidTrajectory(
                "keyframe times must start at 0 and end at 1".into(),
            ));
        }
        if frames.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(SweepError::InvalidTrajectory(
                "keyframe times must be strictly increasing".into(),
            ));
        }
        if (first.rotation - Mat3::identity()).norm() > 1e-12 || first.position.norm() > 1e-12 {
            return Err(SweepError::InvalidTrajectory(
                "the first keyframe must be the identity pose".into(),
            ));
        }
        let mut quats: Vec<Vector4<f64>> = Vec::with_capacity(frames.len());
        for (i, f) in frames.iter().enumerate() {
            let m = f.rotation;
            let defect = (m.transpose() * m - Mat3::identity()).norm();
            if defect > 1e-9 || (m.determinant() - 1.0).abs() > 1e-9 {
                return Err(SweepError::InvalidTrajectory(format!(
                    "keyframe {i}: rotation matrix is not orthonormal (defect {defect:e})"
                )));
            }
            let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m));
            let mut c = q.into_inner().coords;
            // keep the shorter arc between neighbours
            if let Some(prev) = quats.last() {
                if prev.dot(&c) < 0.0 {
                    c = -c;
                }
            }
            quats.push(c);
        }
        let times: Vec<f64> = frames.iter().map(|f| f.time).collect();
        let comp = |k: usize| -> Result<CubicSpline> {
            let ys: Vec<f64> = quats.iter().map(|q| q[k]).collect();
            CubicSpline::natural(&times, &ys)
        };
        let pcomp = |k: usize| -> Result<CubicSpline> {
            let ys: Vec<f64> = frames.iter().map(|f| f.position[k]).collect();
            CubicSpline::natural(&times, &ys)
        };
        Ok(KeyframeTrajectory {
            quat: [comp(0)?, comp(1)?, comp(2)?, comp(3)?],
            pos: [pcomp(0)?, pcomp(1)?, pcomp(2)?],
        })
    }
}

// Homogeneous quadratic rotation map; equals the rotation of q when |q| = 1.
// Component order follows nalgebra: (i, j, k, w).
fn quat_matrix_bilinear(p: &Vector4<f64>, q: &Vector4<f64>) -> Mat3 {
    let r = |a: &Vector4<f64>| -> Mat3 {
        let (x, y, z, w) = (a[0], a[1], a[2], a[3]);
        Mat3::new(
            w * w + x * x - y * y - z * z,
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            w * w - x * x + y * y - z * z,
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            w * w - x * x - y * y + z * z,
        )
    };
    0.5 * (r(&(p + q)) - r(p) - r(q))
}

impl Trajectory for KeyframeTrajectory {
    fn jet(&self, t: f64) -> MotionJet {
        let mut q = Vector4::zeros();
        let mut dq = Vector4::zeros();
        let mut ddq = Vector4::zeros();
        for k in 0..4 {
            let j = self.quat[k].eval(t);
            q[k] = j[0];
            dq[k] = j[1];
            ddq[k] = j[2];
        }
        let n = q.norm();
        let dn = q.dot(&dq) / n;
        let ddn = (dq.dot(&dq) + q.dot(&ddq)) / n - dn * dn / n;
        let qh = q / n;
        let dqh = dq / n - q * (dn / (n * n));
        let ddqh = ddq / n - dq * (2.0 * dn / (n * n)) - q * (ddn / (n * n)) + q * (2.0 * dn * dn / (n * n * n));
        // normalize once more through nalgebra so the rotation is orthonormal to rounding
        let unit = UnitQuaternion::from_quaternion(Quaternion::from(qh));
        let rotation = unit.to_rotation_matrix().into_inner();
        let d_rotation = 2.0 * quat_matrix_bilinear(&qh, &dqh);
        let dd_rotation = 2.0 * quat_matrix_bilinear(&dqh, &dqh) + 2.0 * quat_matrix_bilinear(&qh, &ddqh);
        let mut b = Vec3::zeros();
        let mut db = Vec3::zeros();
        let mut ddb = Vec3::zeros();
        for k in 0..3 {
            let j = self.pos[k].eval(t);
            b[k] = j[0];
            db[k] = j[1];
            ddb[k] = j[2];
        }
        MotionJet {
            t,
            rotation,
            translation: b,
            d_rotation,
            d_translation: db,
            dd_rotation,
            dd_translation: ddb,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn example1() -> Composition {
        Composition::new(vec![
            Arc::new(AxisRotation::new(Vec3::x(), Vec3::zeros(), 0.1 * PI).unwrap()),
            Arc::new(CircularTranslation::new(3.0, 0.5 * PI, Vec3::x(), Vec3::y()).unwrap()),
        ])
        .unwrap()
    }

    fn example2() -> CircularTranslation {
        CircularTranslation::new(3.0, 0.5 * PI, Vec3::x(), Vec3::y()).unwrap()
    }

    fn keyframed() -> KeyframeTrajectory {
        let r1 = Rotation3::from_axis_angle(&Vector3Unit::new_normalize(Vec3::new(1.0, 2.0, 0.5)), 0.7);
        let r2 = Rotation3::from_axis_angle(&Vector3Unit::new_normalize(Vec3::new(-0.3, 1.0, 1.0)), 1.4);
        KeyframeTrajectory::new(&[
            Keyframe {
                time: 0.0,
                rotation: Mat3::identity(),
                position: Vec3::zeros(),
            },
            Keyframe {
                time: 0.4,
                rotation: r1.into_inner(),
                position: Vec3::new(1.0, 0.5, 0.0),
            },
            Keyframe {
                time: 1.0,
                rotation: r2.into_inner(),
                position: Vec3::new(2.0, -1.0, 0.3),
            },
        ])
        .unwrap()
    }

    type Vector3Unit = Unit<Vec3>;

    fn catalog() -> Vec<Arc<dyn Trajectory>> {
        vec![
            Arc::new(Stationary),
            Arc::new(LinearTranslation {
                velocity: Vec3::new(1.0, -2.0, 0.5),
                acceleration: Vec3::new(0.0, 1.0, 3.0),
            }),
            Arc::new(example2()),
            Arc::new(
                AxisRotation::new(Vec3::new(0.3, 1.0, -0.2), Vec3::new(1.0, 0.0, 2.0), 2.1)
                    .unwrap()
                    .with_angular_acceleration(-1.3),
            ),
            Arc::new(AxisRotation::screw(Vec3::z(), Vec3::new(0.5, 0.5, 0.0), 3.0, 0.7).unwrap()),
            Arc::new(example1()),
            Arc::new(keyframed()),
        ]
    }

    fn fd_jet(traj: &dyn Trajectory, t: f64, h: f64) -> (Mat3, Vec3, Mat3, Vec3) {
        let p = traj.jet(t + h);
        let m = traj.jet(t - h);
        let c = traj.jet(t);
        (
            (p.rotation - m.rotation) / (2.0 * h),
            (p.translation - m.translation) / (2.0 * h),
            (p.rotation - 2.0 * c.rotation + m.rotation) / (h * h),
            (p.translation - 2.0 * c.translation + m.translation) / (h * h),
        )
    }

    fn rel(a: f64, scale: f64) -> f64 {
        a / scale.max(1.0)
    }

    #[test]
    fn identity_at_start_for_catalog() {
        for traj in catalog() {
            let j = sample_motion(traj.as_ref(), 0.0).unwrap();
            assert!((j.rotation - Mat3::identity()).norm() < 1e-12, "{traj:?}");
            assert!(j.translation.norm() < 1e-12);
            validate_trajectory(traj.as_ref(), 100).unwrap();
        }
    }

    #[test]
    fn example1_end_pose() {
        let j = sample_motion(&example1(), 1.0).unwrap();
        let expected = Rotation3::from_axis_angle(&Vec3::x_axis(), 0.1 * PI).into_inner();
        assert!((j.rotation - expected).norm() < 1e-14);
        assert!((j.translation - Vec3::new(-3.0, 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_differences() {
        let (m, v, mm, vv) = fd_jet(&example1(), 0.3, 1e-5);
        let j = example1().jet(0.3);
        assert!((j.d_rotation - m).norm() / j.d_rotation.norm() < 1e-6);
        assert!((j.d_translation - v).norm() / j.d_translation.norm() < 1e-6);
        for traj in catalog() {
            for t in [0.1, 0.37, 0.5, 0.83] {
                let j = traj.jet(t);
                let (m, v, mm, vv) = fd_jet(traj.as_ref(), t, 1e-4);
                assert!(
                    rel((j.d_rotation - m).norm(), j.d_rotation.norm()) < 1e-6,
                    "{traj:?} t={t}"
                );
                assert!(rel((j.d_translation - v).norm(), j.d_translation.norm()) < 1e-6);
                assert!(rel((j.dd_rotation - mm).norm(), j.dd_rotation.norm()) < 1e-5);
                assert!(rel((j.dd_translation - vv).norm(), j.dd_translation.norm()) < 1e-5);
            }
        }
        let _ = (mm, vv);
    }

    #[test]
    fn point_trajectory_examples() {
        let x = Vec3::new(0.3, -1.0, 2.0);
        let p = point_trajectory(&Stationary, &x, 0.6).unwrap();
        assert_eq!(p.position, x);
        assert_eq!(p.velocity, Vec3::zeros());
        let lin = LinearTranslation::uniform(Vec3::x());
        let p = point_trajectory(&lin, &x, 0.25).unwrap();
        assert_eq!(p.velocity, Vec3::x());
        assert_eq!(p.acceleration, Vec3::zeros());
        let ex2 = example2();
        let o = Vec3::zeros();
        let h = 1e-6;
        let p = point_trajectory(&ex2, &o, 0.5).unwrap();
        let fd = (point_trajectory(&ex2, &o, 0.5 + h).unwrap().position
            - point_trajectory(&ex2, &o, 0.5 - h).unwrap().position)
            / (2.0 * h);
        assert!((p.velocity - fd).norm() / p.velocity.norm() < 1e-6);
        assert!(point_trajectory(&ex2, &o, 1.5).is_err());
        assert!(sample_motion(&ex2, -0.01).is_err());
    }

    #[test]
    fn inverse_motion_examples() {
        let traj = example1();
        let j0 = inverse_motion(&traj, 0.0).unwrap();
        assert!((j0.rotation - Mat3::identity()).norm() < 1e-15);
        let inv = inverse_motion(&traj, 0.7).unwrap();
        assert_eq!(inv.rotation, traj.jet(0.7).rotation.transpose());
        let x = Vec3::new(1.0, 2.0, -0.5);
        let y = sample_motion(&traj, 0.7).unwrap().apply(&x).position;
        assert!((inv.apply(&y).position - x).norm() < 1e-12);
        // the inverse jet differentiates the inverse motion
        let h = 1e-5;
        let fd = (inverse_motion(&traj, 0.7 + h).unwrap().translation
            - inverse_motion(&traj, 0.7 - h).unwrap().translation)
            / (2.0 * h);
        assert!((inv.d_translation - fd).norm() < 1e-8);
    }

    #[test]
    fn inverse_point_trajectory_examples() {
        let x = Vec3::new(0.4, 1.0, -2.0);
        let traj = example1();
        let p = inverse_point_trajectory(&traj, &x, 0.4, 0.4).unwrap();
        assert!((p.position - x).norm() < 1e-14);

        let lin = LinearTranslation {
            velocity: Vec3::new(1.0, 2.0, 0.0),
            acceleration: Vec3::new(0.0, 0.0, 1.0),
        };
        let t0 = 0.3;
        let p = inverse_point_trajectory(&lin, &x, t0, 0.8).unwrap();
        let expected = x - (lin.jet(0.8).translation - lin.jet(t0).translation);
        assert!((p.position - expected).norm() < 1e-14);
        let p0 = inverse_point_trajectory(&lin, &x, t0, t0).unwrap();
        assert!((p0.velocity + lin.jet(t0).d_translation).norm() < 1e-14);

        // rotation about z at t0 = 0; the jet extrapolates to t < 0 for the stencil
        let rot = AxisRotation::new(Vec3::z(), Vec3::zeros(), 1.7).unwrap();
        let x = Vec3::x();
        let h = 1e-4;
        let base = rot.jet(0.0);
        let ybar = |t: f64| rot.jet(t).rebased(&base).inverse().apply(&x).position;
        let c = inverse_point_trajectory(&rot, &x, 0.0, 0.0).unwrap();
        let fd2 = (ybar(h) - 2.0 * ybar(0.0) + ybar(-h)) / (h * h);
        assert!((c.acceleration - fd2).norm() / c.acceleration.norm() < 1e-5);
    }

    #[test]
    fn rebased_identities_hold_for_catalog() {
        let x = Vec3::new(0.7, -0.2, 1.3);
        for traj in catalog() {
            for t0 in [0.2, 0.5, 0.9] {
                let base = traj.jet(t0);
                let fwd = traj.jet(t0).rebased(&base).apply(&x);
                let inv = inverse_point_trajectory(traj.as_ref(), &x, t0, t0).unwrap();
                let da = base.d_rotation * base.rotation.transpose();
                assert!((inv.velocity + fwd.velocity).norm() < 1e-9);
                let rhs = -fwd.acceleration + 2.0 * da * fwd.velocity;
                assert!((inv.acceleration - rhs).norm() < 1e-9 * (1.0 + rhs.norm()), "{traj:?}");
                let h = 1e-4;
                let fd1 = (inverse_point_trajectory(traj.as_ref(), &x, t0, t0 + h)
                    .unwrap()
                    .position
                    - inverse_point_trajectory(traj.as_ref(), &x, t0, t0 - h)
                        .unwrap()
                        .position)
                    / (2.0 * h);
                let fd2 = (inverse_point_trajectory(traj.as_ref(), &x, t0, t0 + h)
                    .unwrap()
                    .position
                    - 2.0 * x
                    + inverse_point_trajectory(traj.as_ref(), &x, t0, t0 - h)
                        .unwrap()
                        .position)
                    / (h * h);
                assert!(rel((inv.velocity - fd1).norm(), inv.velocity.norm()) < 1e-5);
                assert!(rel((inv.acceleration - fd2).norm(), inv.acceleration.norm()) < 1e-5);
            }
        }
    }

    #[test]
    fn keyframes_interpolate_and_validate() {
        let k = keyframed();
        validate_trajectory(&k, 200).unwrap();
        let j = k.jet(0.4);
        assert!((j.translation - Vec3::new(1.0, 0.5, 0.0)).norm() < 1e-12);
        let bad = KeyframeTrajectory::new(&[
            Keyframe {
                time: 0.0,
                rotation: Mat3::identity(),
                position: Vec3::zeros(),
            },
            Keyframe {
                time: 1.0,
                rotation: Mat3::identity() * 1.1,
                position: Vec3::zeros(),
            },
        ]);
        assert!(bad.is_err());
        let late_start = KeyframeTrajectory::new(&[
            Keyframe {
                time: 0.1,
                rotation: Mat3::identity(),
                position: Vec3::zeros(),
            },
            Keyframe {
                time: 1.0,
                rotation: Mat3::identity(),
                position: Vec3::x(),
            },
        ]);
        assert!(late_start.is_err());
    }

    #[test]
    fn translation_flags() {
        assert!(example2().is_translation());
        assert!(!example1().is_translation());
        assert!(LinearTranslation::uniform(Vec3::y()).is_translation());
        assert!(!keyframed().is_translation());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rotation_stays_in_so3(idx in 0usize..7, t in 0.0f64..=1.0) {
            let cat = catalog();
            let j = sample_motion(cat[idx].as_ref(), t).unwrap();
            prop_assert!(j.orthogonality_defect() <= 1e-12);
            prop_assert!((j.rotation.determinant() - 1.0).abs() <= 1e-12);
            prop_assert!(j.skew_defect() <= 1e-9);
        }

        #[test]
        fn inverse_undoes_motion(idx in 0usize..7, t in 0.0f64..=1.0,
                                 x in prop::array::uniform3(-5.0f64..5.0)) {
            let cat = catalog();
            let x = Vec3::from(x);
            let j = sample_motion(cat[idx].as_ref(), t).unwrap();
            let back = j.inverse().apply(&j.apply(&x).position).position;
            prop_assert!((back - x).norm() < 1e-12);
        }
    }
}
