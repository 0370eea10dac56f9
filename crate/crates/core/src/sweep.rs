//! The sweep map `σ = A S + b`, the funnel function `f = ⟨σ_t, A N⟩` and its partials.

use std::sync::Arc;

use nalgebra::Vector4;

use crate::kinematics::{sample_motion, validate_trajectory, MotionJet, Trajectory};
use crate::surface::{Surface, SurfaceJet};
use crate::{Mat3, Result, SweepError, Vec2, Vec3};

/// Characteristic magnitudes used to turn relative tolerances into absolute ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// Bounding-box diagonal of the surface.
    pub length: f64,
    /// Largest sampled `|σ_t|` over the domain and time window.
    pub velocity: f64,
    /// Diagonal of the parameter domain.
    pub param_diag: f64,
}

/// A surface, the trajectory carrying it, and the time window of interest.
#[derive(Debug, Clone)]
pub struct SweepScene {
    id: String,
    surface: Surface,
    trajectory: Arc<dyn Trajectory>,
    window: [f64; 2],
    scales: Scales,
}

const SCALE_GRID: usize = 9;

impl SweepScene {
    pub fn new(id: impl Into<String>, surface: Surface, trajectory: Arc<dyn Trajectory>) -> Result<Self> {
        validate_trajectory(trajectory.as_ref(), 64)?;
        let dom = surface.domain();
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for (u, v) in grid_points(&dom, SCALE_GRID) {
            let j = surface.eval_jet(u, v)?;
            lo = lo.inf(&j.point);
            hi = hi.sup(&j.point);
        }
        let scales = Scales {
            length: (hi - lo).norm(),
            velocity: 0.0,
            param_diag: dom.diagonal(),
        };
        let mut scene = SweepScene {
            id: id.into(),
            surface,
            trajectory,
            window: [0.0, 1.0],
            scales,
        };
        scene.scales.velocity = scene.sample_velocity_scale()?;
        Ok(scene)
    }

    /// Restricts sampling and seeding to `[t0, t1] ⊆ [0, 1]`.
    pub fn with_time_window(mut self, t0: f64, t1: f64) -> Result<Self> {
        if !(0.0 <= t0 && t0 < t1 && t1 <= 1.0) {
            return Err(SweepError::InvalidArgument(format!(
                "time window [{t0}, {t1}] must satisfy 0 <= t0 < t1 <= 1"
            )));
        }
        self.window = [t0, t1];
        self.scales.velocity = self.sample_velocity_scale()?;
        Ok(self)
    }

    fn sample_velocity_scale(&self) -> Result<f64> {
        let dom = self.surface.domain();
        let mut vmax: f64 = 0.0;
        for k in 0..5 {
            let t = self.window[0] + (self.window[1] - self.window[0]) * k as f64 / 4.0;
            let m = sample_motion(self.trajectory.as_ref(), t)?;
            for (u, v) in grid_points(&dom, SCALE_GRID) {
                let j = self.surface.eval_jet(u, v)?;
                vmax = vmax.max((m.d_rotation * j.point + m.d_translation).norm());
            }
        }
        Ok(vmax)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn trajectory(&self) -> &dyn Trajectory {
        self.trajectory.as_ref()
    }

    pub fn window(&self) -> [f64; 2] {
        self.window
    }

    pub fn scales(&self) -> Scales {
        self.scales
    }

    /// Funnel membership tolerance.
    pub fn eps_fun(&self) -> f64 {
        1e-10 * self.scales.velocity
    }

    /// Below this `|(f_u, f_v)|` the {α, β} frame is considered degenerate.
    pub fn eps_frame(&self) -> f64 {
        1e-10 * self.scales.velocity
    }

    /// True when nothing moves: every sampled velocity vanishes.
    pub fn is_stationary(&self) -> bool {
        self.scales.velocity <= 1e-14 * self.scales.length.max(1.0)
    }
}

/// `n × n` grid of parameter points including the domain corners.
pub(crate) fn grid_points(dom: &crate::surface::Domain, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = dom.u[0] + (dom.u[1] - dom.u[0]) * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let v = dom.v[0] + (dom.v[1] - dom.v[0]) * k as f64 / (n - 1) as f64;
            out.push((u, v));
        }
    }
    out
}

/// Everything the funnel condition needs at one `(u, v, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEval {
    pub u: f64,
    pub v: f64,
    pub t: f64,
    pub jet: SurfaceJet,
    pub motion: MotionJet,
    pub point: Vec3,
    pub su: Vec3,
    pub sv: Vec3,
    /// `σ_t`.
    pub velocity: Vec3,
    /// Transported unit normal `A N`.
    pub normal: Vec3,
    pub f: f64,
    pub fu: f64,
    pub fv: f64,
    pub ft: f64,
    /// Least-squares coefficients of `σ_t ≈ l σ_u + m σ_v`.
    pub l: f64,
    pub m: f64,
}

impl SweepEval {
    fn build(jet: SurfaceJet, motion: MotionJet) -> Result<Self> {
        let (u, v, t) = (jet.u, jet.v, motion.t);
        let a = motion.rotation;
        let da = motion.d_rotation;
        let point = a * jet.point + motion.translation;
        let su = a * jet.su;
        let sv = a * jet.sv;
        let velocity = da * jet.point + motion.d_translation;
        let normal = a * jet.normal;
        let f = velocity.dot(&normal);
        let fu = (da * jet.su).dot(&normal) + velocity.dot(&(a * jet.nu));
        let fv = (da * jet.sv).dot(&normal) + velocity.dot(&(a * jet.nv));
        let accel = motion.dd_rotation * jet.point + motion.dd_translation;
        let ft = accel.dot(&normal) + velocity.dot(&(da * jet.normal));
        // the Gram matrix of {σ_u, σ_v} equals the surface metric since A is a rotation
        let rhs = Vec2::new(su.dot(&velocity), sv.dot(&velocity));
        let lm = jet
            .metric
            .lu()
            .solve(&rhs)
            .filter(|x| x.iter().all(|c| c.is_finite()))
            .ok_or(SweepError::SingularGram { u, v, t })?;
        Ok(SweepEval {
            u,
            v,
            t,
            jet,
            motion,
            point,
            su,
            sv,
            velocity,
            normal,
            f,
            fu,
            fv,
            ft,
            l: lm.x,
            m: lm.y,
        })
    }

    pub fn uv(&self) -> Vec2 {
        Vec2::new(self.u, self.v)
    }

    /// `∇f = (f_u, f_v, f_t)`.
    pub fn grad(&self) -> Vec3 {
        Vec3::new(self.fu, self.fv, self.ft)
    }

    /// `l f_u + m f_v - f_t`, defined off the funnel through the least-squares `(l, m)`.
    pub fn theta(&self) -> f64 {
        self.l * self.fu + self.m * self.fv - self.ft
    }

    /// `|σ_t - l σ_u - m σ_v|`.
    pub fn tangential_residual(&self) -> f64 {
        (self.velocity - self.l * self.su - self.m * self.sv).norm()
    }

    pub fn suu(&self) -> Vec3 {
        self.motion.rotation * self.jet.suu
    }

    pub fn suv(&self) -> Vec3 {
        self.motion.rotation * self.jet.suv
    }

    pub fn svv(&self) -> Vec3 {
        self.motion.rotation * self.jet.svv
    }

    /// `σ_ut = A' S_u`.
    pub fn sut(&self) -> Vec3 {
        self.motion.d_rotation * self.jet.su
    }

    /// `σ_vt = A' S_v`.
    pub fn svt(&self) -> Vec3 {
        self.motion.d_rotation * self.jet.sv
    }

    /// `σ_tt = A'' S + b''`.
    pub fn acceleration(&self) -> Vec3 {
        self.motion.dd_rotation * self.jet.point + self.motion.dd_translation
    }

    /// Columns `σ_u, σ_v, σ_t`.
    pub fn jacobian(&self) -> Mat3 {
        Mat3::from_columns(&[self.su, self.sv, self.velocity])
    }
}

pub fn sweep_map(scene: &SweepScene, u: f64, v: f64, t: f64) -> Result<Vec3> {
    let m = sample_motion(scene.trajectory(), t)?;
    let j = scene.surface().eval_jet(u, v)?;
    Ok(m.rotation * j.point + m.translation)
}

/// `(σ(u, v, t), t)`.
pub fn extended_sweep(scene: &SweepScene, u: f64, v: f64, t: f64) -> Result<Vector4<f64>> {
    let p = sweep_map(scene, u, v, t)?;
    Ok(Vector4::new(p.x, p.y, p.z, t))
}

pub fn evaluate(scene: &SweepScene, u: f64, v: f64, t: f64) -> Result<SweepEval> {
    let motion = sample_motion(scene.trajectory(), t)?;
    let jet = scene.surface().eval_jet(u, v)?;
    SweepEval::build(jet, motion)
}

/// Like [`evaluate`] but accepts parameters outside the surface domain.
pub fn evaluate_unchecked(scene: &SweepScene, u: f64, v: f64, t: f64) -> Result<SweepEval> {
    let motion = sample_motion(scene.trajectory(), t)?;
    let jet = scene.surface().jet_unchecked(u, v)?;
    SweepEval::build(jet, motion)
}

pub fn jacobian(scene: &SweepScene, u: f64, v: f64, t: f64) -> Result<Mat3> {
    Ok(evaluate(scene, u, v, t)?.jacobian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::kinematics::{AxisRotation, LinearTranslation, Stationary};
    use crate::surface::Ellipsoid;
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    fn unit_sphere() -> Surface {
        Surface::new(Arc::new(Ellipsoid::sphere(Vec3::zeros(), 1.0).unwrap()), true)
    }

    fn scenes() -> Vec<SweepScene> {
        corpus::all().into_iter().map(|(_, s)| s).collect()
    }

    fn random_point(scene: &SweepScene, a: f64, b: f64, c: f64) -> (f64, f64, f64) {
        let d = scene.surface().domain();
        (d.u[0] + a * (d.u[1] - d.u[0]), d.v[0] + b * (d.v[1] - d.v[0]), c)
    }

    #[test]
    fn start_of_sweep_is_the_surface() {
        for scene in scenes() {
            let j = scene.surface().eval_jet(0.1, 0.2).unwrap();
            let p = sweep_map(&scene, 0.1, 0.2, 0.0).unwrap();
            assert!((p - j.point).norm() < 1e-14);
            let e = extended_sweep(&scene, 0.1, 0.2, 0.0).unwrap();
            assert_eq!(e.w, 0.0);
        }
    }

    #[test]
    fn example2_end_point() {
        let scene = corpus::ellipsoid_example2();
        let p = sweep_map(&scene, 0.0, 0.0, 1.0).unwrap();
        assert!((p - Vec3::new(-6.0, 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn extended_sweep_projects_to_sweep_map() {
        let scene = corpus::cylinder_example1();
        let mut runner = TestRunner::new(Config {
            cases: 100,
            ..Config::default()
        });
        runner
            .run(&(0.0f64..1.0, 0.0f64..1.0, 0.0f64..=1.0), |(a, b, t)| {
                let (u, v, t) = random_point(&scene, a, b, t);
                let e = extended_sweep(&scene, u, v, t).unwrap();
                let p = sweep_map(&scene, u, v, t).unwrap();
                prop_assert_eq!(e.w, t);
                prop_assert_eq!(Vec3::new(e.x, e.y, e.z), p);
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn rotating_centered_sphere_stays_on_unit_sphere() {
        let scene = SweepScene::new(
            "spin",
            unit_sphere(),
            Arc::new(AxisRotation::new(Vec3::z(), Vec3::zeros(), 2.0).unwrap()),
        )
        .unwrap();
        for t in [0.0, 0.3, 0.9] {
            for (u, v) in [(0.1, 0.2), (-1.0, 3.0), (0.7, -2.0)] {
                assert!((sweep_map(&scene, u, v, t).unwrap().norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn translating_sphere_funnel_is_normal_component() {
        let scene = SweepScene::new("tx", unit_sphere(), Arc::new(LinearTranslation::uniform(Vec3::x()))).unwrap();
        for (u, v) in [(0.1, 0.2), (-1.0, 3.0), (0.7, -2.0), (0.0, 0.5 * std::f64::consts::PI)] {
            let e = evaluate(&scene, u, v, 0.4).unwrap();
            assert!((e.f - e.normal.x).abs() < 1e-15);
        }
        // N ⟂ x exactly at v = ±π/2
        let e = evaluate(&scene, 0.3, 0.5 * std::f64::consts::PI, 0.4).unwrap();
        assert!(e.f.abs() < 1e-15);
    }

    #[test]
    fn stationary_sweep_has_singular_jacobian() {
        let scene = SweepScene::new("still", unit_sphere(), Arc::new(Stationary)).unwrap();
        assert!(scene.is_stationary());
        let j = jacobian(&scene, 0.2, 0.3, 0.5).unwrap();
        assert_eq!(j.determinant(), 0.0);
    }

    #[test]
    fn partials_of_f_match_differences() {
        let h = 1e-5;
        let mut runner = TestRunner::new(Config {
            cases: 100,
            ..Config::default()
        });
        for scene in scenes() {
            runner
                .run(&(0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95), |(a, b, c)| {
                    let (u, v, t) = random_point(&scene, a, b, c);
                    let e = evaluate(&scene, u, v, t).unwrap();
                    let f = |u: f64, v: f64, t: f64| evaluate(&scene, u, v, t).unwrap().f;
                    let fu = (f(u + h, v, t) - f(u - h, v, t)) / (2.0 * h);
                    let fv = (f(u, v + h, t) - f(u, v - h, t)) / (2.0 * h);
                    let ft = (f(u, v, t + h) - f(u, v, t - h)) / (2.0 * h);
                    let scale = e.grad().norm().max(1.0);
                    prop_assert!((e.fu - fu).abs() < 1e-5 * scale, "{} fu {} vs {}", scene.id(), e.fu, fu);
                    prop_assert!((e.fv - fv).abs() < 1e-5 * scale);
                    prop_assert!((e.ft - ft).abs() < 1e-5 * scale);
                    Ok(())
                })
                .unwrap();
        }
    }

    #[test]
    fn jacobian_determinant_is_scaled_funnel_function() {
        let mut runner = TestRunner::new(Config {
            cases: 1000,
            ..Config::default()
        });
        for scene in scenes() {
            let s = scene.surface().normal_sign();
            let scale = scene.scales().length.powi(2) * scene.scales().velocity;
            runner
                .run(&(0.0f64..1.0, 0.0f64..1.0, 0.0f64..=1.0), |(a, b, c)| {
                    let (u, v, t) = random_point(&scene, a, b, c);
                    let e = evaluate(&scene, u, v, t).unwrap();
                    let det = e.jacobian().determinant();
                    let rhs = s * e.su.cross(&e.sv).norm() * e.f;
                    prop_assert!((det - rhs).abs() <= 1e-9 * scale.max(1e-300));
                    // σ_u, σ_v independent: rank at least two
                    let sv = e.jacobian().singular_values();
                    let mut sv: Vec<f64> = sv.iter().copied().collect();
                    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
                    prop_assert!(sv[1] > 1e-6 * sv[0]);
                    Ok(())
                })
                .unwrap();
        }
    }

    #[test]
    fn velocity_scale_and_window() {
        let scene = corpus::translating_sphere();
        assert!((scene.scales().velocity - 1.0).abs() < 1e-12);
        assert!(scene.clone().with_time_window(0.5, 0.5).is_err());
        let w = scene.with_time_window(0.2, 0.6).unwrap();
        assert_eq!(w.window(), [0.2, 0.6]);
    }

    #[test]
    fn out_of_range_time_is_rejected() {
        let scene = corpus::translating_sphere();
        assert!(matches!(
            evaluate(&scene, 0.0, 0.0, 1.2),
            Err(SweepError::TimeOutOfRange { .. })
        ));
    }
}
