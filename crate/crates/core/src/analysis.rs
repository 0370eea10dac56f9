//! The θ invariant, `det D`, clearance of inverse trajectories, and L.S.I. classification.

use serde::Serialize;

use crate::funnel::{frame, snap_to_funnel, ContactCurve, FunnelPoint, FunnelSample};
use crate::kinematics::sample_motion;
use crate::surface::Surface;
use crate::sweep::SweepScene;
use crate::{Mat2, Result, SweepError, Vec2, Vec3};

/// `l f_u + m f_v - f_t` at a funnel point.
pub fn theta(_scene: &SweepScene, fp: &FunnelPoint) -> Result<f64> {
    Ok(fp.eval().theta())
}

/// Determinant of the matrix taking the {α, β} frame to the `{∂_u, ∂_v}` directions on
/// the contact set; equals `(f_u² + f_v²) θ`.
pub fn det_frame_transform(scene: &SweepScene, fp: &FunnelPoint) -> Result<f64> {
    frame(scene, fp)?;
    Ok(frame_transform(fp).determinant())
}

fn frame_transform(fp: &FunnelPoint) -> Mat2 {
    let e = fp.eval();
    let g = e.fu * e.fu + e.fv * e.fv;
    Mat2::new(-e.ft * e.fu + e.l * g, -e.fv, -e.ft * e.fv + e.m * g, e.fu)
}

/// Second time derivative of the clearance at `t0`, from the motion and the shape operator:
/// `⟨-σ_tt + 2 Ω V, N̂⟩ + ⟨W(V), V⟩` with `Ω = A' Aᵀ`.
pub fn lambda_ddot(scene: &SweepScene, fp: &FunnelPoint) -> Result<f64> {
    let e = fp.eval();
    let omega = e.motion.d_rotation * e.motion.rotation.transpose();
    let body_velocity = e.motion.rotation.transpose() * e.velocity;
    let kappa_v2 = e
        .jet
        .normal_curvature_form(&body_velocity)
        .ok_or(SweepError::SingularGram { u: e.u, v: e.v, t: e.t })?;
    let _ = scene;
    Ok((-e.acceleration() + 2.0 * omega * e.velocity).dot(&e.normal) + kappa_v2)
}

/// θ together with the quantities it is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSample {
    pub point: FunnelPoint,
    pub l: f64,
    pub m: f64,
    pub theta: f64,
    pub det_d: f64,
    pub lambda_ddot: f64,
}

pub fn theta_sample(scene: &SweepScene, fp: &FunnelPoint) -> Result<ThetaSample> {
    Ok(ThetaSample {
        point: *fp,
        l: fp.eval().l,
        m: fp.eval().m,
        theta: theta(scene, fp)?,
        det_d: det_frame_transform(scene, fp)?,
        lambda_ddot: lambda_ddot(scene, fp)?,
    })
}

/// Signed distances of the inverse trajectory of `σ(fp)` to the placement at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceProfile {
    pub point: FunnelPoint,
    pub t0: f64,
    pub ts: Vec<f64>,
    /// `None` where the closest-point projection failed.
    pub lambdas: Vec<Option<f64>>,
}

impl ClearanceProfile {
    pub fn min_lambda(&self) -> Option<f64> {
        self.lambdas.iter().flatten().copied().reduce(f64::min)
    }

    pub fn failures(&self) -> usize {
        self.lambdas.iter().filter(|l| l.is_none()).count()
    }
}

/// Closest point of `surface` to the body-frame point `z`, by Newton on the distance gradient.
/// Returns the foot parameters and the signed distance `⟨z - S, N⟩`.
pub fn project_to_surface(surface: &Surface, z: &Vec3, seed: Vec2) -> Result<(Vec2, f64)> {
    let mut uv = seed;
    let scale = surface.domain().diagonal();
    for _ in 0..50 {
        let j = surface.jet_unchecked(uv.x, uv.y)?;
        let r = z - j.point;
        let g = Vec2::new(-r.dot(&j.su), -r.dot(&j.sv));
        let hess = Mat2::new(
            j.metric[(0, 0)] - r.dot(&j.suu),
            j.metric[(0, 1)] - r.dot(&j.suv),
            j.metric[(1, 0)] - r.dot(&j.suv),
            j.metric[(1, 1)] - r.dot(&j.svv),
        );
        let positive = hess[(0, 0)] > 0.0 && hess.determinant() > 0.0;
        let system = if positive { hess } else { j.metric };
        let delta = system.lu().solve(&(-g)).ok_or(SweepError::SingularSystem {
            what: "closest-point projection",
        })?;
        uv += delta;
        if delta.norm() <= 1e-14 * (1.0 + uv.norm()) {
            let j = surface.jet_unchecked(uv.x, uv.y)?;
            return Ok((uv, (z - j.point).dot(&j.normal)));
        }
        if !(delta.norm() < scale) {
            break;
        }
    }
    let j = surface.jet_unchecked(uv.x, uv.y)?;
    let r = z - j.point;
    // accept stagnation at rounding level
    if r.dot(&j.su).abs() + r.dot(&j.sv).abs() <= 1e-12 * (1.0 + j.su.norm() + j.sv.norm()) * (1.0 + r.norm()) {
        return Ok((uv, r.dot(&j.normal)));
    }
    Err(SweepError::NewtonDiverged {
        what: "closest-point projection",
        iterations: 50,
        residual: r.dot(&j.su).abs() + r.dot(&j.sv).abs(),
        last: [uv.x, uv.y],
    })
}

/// Samples `λ(t)` on `n` uniform times in `[t0 - halfwidth, t0 + halfwidth] ∩ [0, 1]`.
pub fn clearance_profile(scene: &SweepScene, fp: &FunnelPoint, halfwidth: f64, n: usize) -> Result<ClearanceProfile> {
    if n < 2 || !(halfwidth > 0.0) {
        return Err(SweepError::InvalidArgument(
            "clearance profile needs n >= 2 and a positive halfwidth".into(),
        ));
    }
    let t0 = fp.t();
    let mut ts: Vec<f64> = (0..n)
        .map(|k| t0 + halfwidth * (2.0 * k as f64 / (n - 1) as f64 - 1.0))
        .collect();
    if n % 2 == 1 {
        ts[n / 2] = t0;
    }
    ts.retain(|t| (0.0..=1.0).contains(t));
    let base = sample_motion(scene.trajectory(), t0)?;
    let x = fp.eval().point;
    let surface = scene.surface();
    let at = base.rotation.transpose();
    let lam = |t: f64, seed: Vec2| -> Result<(Vec2, f64)> {
        let rel = sample_motion(scene.trajectory(), t)?.rebased(&base);
        let ybar = rel.inverse().apply(&x).position;
        let z = at * (ybar - base.translation);
        project_to_surface(surface, &z, seed)
    };
    let center = ts
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t0).abs().partial_cmp(&(b.1 - t0).abs()).unwrap())
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut lambdas = vec![None; ts.len()];
    // continuation outward from t0, each projection seeded by its neighbour
    for range in [
        Box::new(center..ts.len()) as Box<dyn Iterator<Item = usize>>,
        Box::new((0..center).rev()),
    ] {
        let mut seed = fp.uv();
        for k in range {
            match lam(ts[k], seed) {
                Ok((uv, l)) => {
                    lambdas[k] = Some(l);
                    seed = uv;
                }
                Err(_) => lambdas[k] = None,
            }
        }
    }
    Ok(ClearanceProfile {
        point: *fp,
        t0,
        ts,
        lambdas,
    })
}

/// Per-point outcome of the θ test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Clean,
    /// `|θ| <= εθ` and the clearance never goes negative.
    SingularBoundary,
    /// `|θ| <= εθ` but the inverse trajectory enters the solid.
    Type2Boundary,
    /// `θ < -εθ`: both kinds of local self-intersection.
    Type1And2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub eps_theta: f64,
    pub eps_lambda: f64,
    pub halfwidth: f64,
    pub samples: usize,
}

impl Thresholds {
    pub const DEFAULT_HALFWIDTH: f64 = 0.05;
    pub const DEFAULT_SAMPLES: usize = 21;

    /// `εθ = 1e-6 · theta_scale`, `ελ = 1e-8 · scene length scale`.
    pub fn new(scene: &SweepScene, theta_scale: f64) -> Self {
        Thresholds {
            eps_theta: 1e-6 * theta_scale,
            eps_lambda: 1e-8 * scene.scales().length,
            halfwidth: Self::DEFAULT_HALFWIDTH,
            samples: Self::DEFAULT_SAMPLES,
        }
    }
}

pub fn classify_point(scene: &SweepScene, fp: &FunnelPoint, th: &Thresholds) -> Result<PointClass> {
    let th_value = theta(scene, fp)?;
    if th_value < -th.eps_theta {
        return Ok(PointClass::Type1And2);
    }
    if th_value > th.eps_theta {
        return Ok(PointClass::Clean);
    }
    let profile = clearance_profile(scene, fp, th.halfwidth, th.samples)?;
    match profile.min_lambda() {
        Some(l) if l < -th.eps_lambda => Ok(PointClass::Type2Boundary),
        _ => Ok(PointClass::SingularBoundary),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Clean,
    Singular,
    Type1Lsi,
    Type2Lsi,
    Degenerate,
}

impl Verdict {
    /// Process exit code of the detection command.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Clean => 0,
            Verdict::Singular | Verdict::Type1Lsi | Verdict::Type2Lsi => 1,
            Verdict::Degenerate => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Excision {
    pub count: usize,
    /// `(u, v, t)` bounds of the samples with `θ <= εθ`.
    pub bbox_min: Option<[f64; 3]>,
    pub bbox_max: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SliceSummary {
    pub t: f64,
    pub curves: usize,
    pub samples: usize,
    pub min_theta: Option<f64>,
    pub excised: usize,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsiReport {
    pub scene_id: String,
    pub samples: Vec<ThetaSample>,
    pub min_theta: Option<f64>,
    pub max_theta: Option<f64>,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
    pub excised: Excision,
    pub slices: Vec<SliceSummary>,
    /// Points with `|θ| <= εθ` and the smallest clearance seen among them.
    pub boundary_points: usize,
    pub min_boundary_lambda: Option<f64>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub halfwidth: f64,
    pub samples: usize,
    /// Locate θ minima and zeros between samples along each curve.
    pub refine: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            halfwidth: Thresholds::DEFAULT_HALFWIDTH,
            samples: Thresholds::DEFAULT_SAMPLES,
            refine: true,
        }
    }
}

// Piecewise-linear point of a polyline at fractional index s, snapped back to the funnel.
fn snapped_at(scene: &SweepScene, curve: &ContactCurve, uv: &[Vec2], s: f64) -> Option<FunnelPoint> {
    let n = uv.len();
    let wrap = |k: isize| -> Vec2 {
        let m = n as isize;
        let idx = k.rem_euclid(m) as usize;
        // unwrap across the closing segment
        let laps = k.div_euclid(m) as f64;
        let close = if curve.closed && n > 1 {
            let dom = scene.surface().domain();
            let last = uv[n - 1];
            last + dom.min_image(uv[0] - last) - uv[0]
        } else {
            Vec2::zeros()
        };
        uv[idx] + close * laps
    };
    let k = s.floor();
    let frac = s - k;
    let a = wrap(k as isize);
    let b = wrap(k as isize + 1);
    let p = a + (b - a) * frac;
    snap_to_funnel(scene, p.x, p.y, curve.t).ok()
}

fn golden_min(scene: &SweepScene, curve: &ContactCurve, uv: &[Vec2], lo: f64, hi: f64) -> Option<FunnelPoint> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |s: f64| snapped_at(scene, curve, uv, s).map(|p| (p.eval().theta(), p));
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..60 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc.0 < fd.0 {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d)?;
        }
    }
    Some(if fc.0 < fd.0 { fc.1 } else { fd.1 })
}

fn bisect_zero(
    scene: &SweepScene,
    curve: &ContactCurve,
    uv: &[Vec2],
    lo: f64,
    hi: f64,
    th_lo: f64,
) -> Option<FunnelPoint> {
    let (mut a, mut b) = (lo, hi);
    let mut best = None;
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let p = snapped_at(scene, curve, uv, m)?;
        let th = p.eval().theta();
        best = Some(p);
        if th == 0.0 || (b - a) < 1e-13 {
            break;
        }
        if (th > 0.0) == (th_lo > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    best
}

/// Extra funnel points at θ minima and θ sign changes between polyline samples.
fn refine_curve(scene: &SweepScene, curve: &ContactCurve) -> Vec<FunnelPoint> {
    let n = curve.points.len();
    if n < 3 {
        return Vec::new();
    }
    let uv = curve.uv();
    let th: Vec<f64> = curve.points.iter().map(|p| p.eval().theta()).collect();
    let at = |k: isize| th[k.rem_euclid(n as isize) as usize];
    let (first, last) = if curve.closed {
        (0isize, n as isize)
    } else {
        (1, n as isize - 1)
    };
    let mut out = Vec::new();
    for k in first..last {
        let (a, c, b) = (at(k - 1), at(k), at(k + 1));
        if c <= a && c <= b && (c < a || c < b) {
            if let Some(p) = golden_min(scene, curve, &uv, k as f64 - 1.0, k as f64 + 1.0) {
                out.push(p);
            }
        }
    }
    let seg_end = if curve.closed { n } else { n - 1 };
    for k in 0..seg_end {
        let (a, b) = (th[k], th[(k + 1) % n]);
        if a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0) {
            if let Some(p) = bisect_zero(scene, curve, &uv, k as f64, k as f64 + 1.0, a) {
                out.push(p);
            }
        }
    }
    out
}

fn median_abs(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Evaluates θ on every sampled funnel point and classifies the sweep.
pub fn detect_singularity(scene: &SweepScene, sample: &FunnelSample, opts: &DetectOptions) -> LsiReport {
    let mut diagnostics: Vec<String> = sample.diagnostic.iter().cloned().collect();
    let mut samples = Vec::new();
    let mut slice_of: Vec<usize> = Vec::new();
    for (si, slice) in sample.slices.iter().enumerate() {
        for e in &slice.errors {
            diagnostics.push(format!("t = {}: {e}", slice.t));
        }
        for curve in &slice.curves {
            let mut pts: Vec<FunnelPoint> = curve.points.clone();
            if opts.refine {
                pts.extend(refine_curve(scene, curve));
            }
            for p in pts {
                match theta_sample(scene, &p) {
                    Ok(s) => {
                        samples.push(s);
                        slice_of.push(si);
                    }
                    Err(e) => diagnostics.push(format!("t = {}: {e}", slice.t)),
                }
            }
        }
    }
    let thetas: Vec<f64> = samples.iter().map(|s| s.theta).collect();
    let mut thresholds = Thresholds::new(scene, median_abs(&thetas));
    thresholds.halfwidth = opts.halfwidth;
    thresholds.samples = opts.samples;
    let min_theta = thetas.iter().copied().reduce(f64::min);
    let max_theta = thetas.iter().copied().reduce(f64::max);

    let mut excised = Excision {
        count: 0,
        bbox_min: None,
        bbox_max: None,
    };
    let mut boundary_points = 0;
    let mut min_boundary_lambda: Option<f64> = None;
    let mut per_slice_excised = vec![0usize; sample.slices.len()];
    let mut per_slice_min = vec![None::<f64>; sample.slices.len()];
    let mut per_slice_count = vec![0usize; sample.slices.len()];
    for (s, &si) in samples.iter().zip(&slice_of) {
        per_slice_count[si] += 1;
        per_slice_min[si] = Some(per_slice_min[si].map_or(s.theta, |m: f64| m.min(s.theta)));
        if s.theta <= thresholds.eps_theta {
            excised.count += 1;
            per_slice_excised[si] += 1;
            let p = [s.point.u(), s.point.v(), s.point.t()];
            excised.bbox_min = Some(
                excised
                    .bbox_min
                    .map_or(p, |b| [b[0].min(p[0]), b[1].min(p[1]), b[2].min(p[2])]),
            );
            excised.bbox_max = Some(
                excised
                    .bbox_max
                    .map_or(p, |b| [b[0].max(p[0]), b[1].max(p[1]), b[2].max(p[2])]),
            );
        }
        if s.theta.abs() <= thresholds.eps_theta {
            boundary_points += 1;
            match clearance_profile(scene, &s.point, thresholds.halfwidth, thresholds.samples) {
                Ok(profile) => {
                    if profile.failures() > 0 {
                        diagnostics.push(format!(
                            "clearance projection failed at {} of {} times near ({}, {}, {})",
                            profile.failures(),
                            profile.ts.len(),
                            s.point.u(),
                            s.point.v(),
                            s.point.t()
                        ));
                    }
                    if let Some(l) = profile.min_lambda() {
                        min_boundary_lambda = Some(min_boundary_lambda.map_or(l, |m| m.min(l)));
                    }
                }
                Err(e) => diagnostics.push(e.to_string()),
            }
        }
    }
    let verdict = match min_theta {
        None => Verdict::Degenerate,
        Some(m) if m < -thresholds.eps_theta => Verdict::Type1Lsi,
        Some(_) if min_boundary_lambda.is_some_and(|l| l < -thresholds.eps_lambda) => Verdict::Type2Lsi,
        Some(m) if m <= thresholds.eps_theta => Verdict::Singular,
        Some(_) => Verdict::Clean,
    };
    let slices = sample
        .slices
        .iter()
        .enumerate()
        .map(|(i, s)| SliceSummary {
            t: s.t,
            curves: s.curves.len(),
            samples: per_slice_count[i],
            min_theta: per_slice_min[i],
            excised: per_slice_excised[i],
            errors: s.errors.iter().map(|e| e.to_string()).collect(),
        })
        .collect();
    LsiReport {
        scene_id: scene.id().to_string(),
        samples,
        min_theta,
        max_theta,
        verdict,
        thresholds,
        excised,
        slices,
        boundary_points,
        min_boundary_lambda,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::funnel::{find_seed, sample_funnel, trace_pcurve, SampleOptions, TraceOptions};

    #[test]
    fn uniform_translation_gives_unit_theta() {
        let scene = corpus::translating_sphere();
        let seed = find_seed(&scene, 0.3).unwrap();
        let c = trace_pcurve(&scene, 0.3, &seed, &TraceOptions::new(0.05)).unwrap();
        for p in &c.points {
            let s = theta_sample(&scene, p).unwrap();
            assert!((s.theta - 1.0).abs() < 1e-9);
            assert!((s.lambda_ddot - 1.0).abs() < 1e-9);
            assert!(s.det_d > 0.0);
            let g = p.eval().fu.powi(2) + p.eval().fv.powi(2);
            assert!((s.det_d - g * s.theta).abs() <= 1e-9 * g);
            assert_eq!(
                classify_point(&scene, p, &Thresholds::new(&scene, 1.0)).unwrap(),
                PointClass::Clean
            );
        }
    }

    #[test]
    fn clearance_of_translating_sphere_is_a_positive_bump() {
        let scene = corpus::translating_sphere();
        let fp = find_seed(&scene, 0.5).unwrap();
        let prof = clearance_profile(&scene, &fp, 0.05, 21).unwrap();
        assert_eq!(prof.ts.len(), 21);
        for (t, l) in prof.ts.iter().zip(&prof.lambdas) {
            let l = l.unwrap();
            if *t == prof.t0 {
                assert!(l.abs() < 1e-8);
            } else {
                assert!(l > 0.0);
            }
        }
    }

    #[test]
    fn clearance_window_is_clipped_to_time_range() {
        let scene = corpus::translating_sphere();
        let fp = find_seed(&scene, 0.0).unwrap();
        let prof = clearance_profile(&scene, &fp, 0.05, 21).unwrap();
        assert_eq!(prof.ts.len(), 11);
        assert_eq!(prof.ts[0], 0.0);
    }

    #[test]
    fn projection_recovers_known_distance() {
        let scene = corpus::translating_sphere();
        let z = Vec3::new(0.0, 0.0, 2.5);
        let (uv, l) = project_to_surface(scene.surface(), &z, Vec2::new(0.1, 1.4)).unwrap();
        assert!((l - 1.5).abs() < 1e-12);
        assert!(uv.x.abs() < 1e-10);
        let (_, l) = project_to_surface(scene.surface(), &Vec3::new(0.3, 0.0, 0.0), Vec2::new(0.1, 3.0)).unwrap();
        assert!((l + 0.7).abs() < 1e-12);
    }

    #[test]
    fn translating_sphere_is_clean() {
        let scene = corpus::translating_sphere();
        let sample = sample_funnel(&scene, &SampleOptions::new(5, 0.02)).unwrap();
        let r = detect_singularity(&scene, &sample, &DetectOptions::default());
        assert_eq!(r.verdict, Verdict::Clean);
        assert!((r.min_theta.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r.excised.count, 0);
    }

    #[test]
    fn empty_sample_is_degenerate() {
        let scene = corpus::translating_sphere();
        let r = detect_singularity(&scene, &FunnelSample::default(), &DetectOptions::default());
        assert_eq!(r.verdict, Verdict::Degenerate);
        assert_eq!(r.verdict.exit_code(), 2);
    }

    #[test]
    fn tangent_sphere_is_singular_without_penetration() {
        let scene = corpus::tangent_sphere();
        let sample = sample_funnel(&scene, &SampleOptions::new(3, 0.02)).unwrap();
        let r = detect_singularity(&scene, &sample, &DetectOptions::default());
        assert!(r.min_theta.unwrap() <= 1e-6, "{:?}", r.min_theta);
        assert_eq!(r.verdict, Verdict::Singular, "{:?}", r.diagnostics);
        assert!(r.boundary_points > 0);
        assert!(r.min_boundary_lambda.unwrap() >= -r.thresholds.eps_lambda);
        let p = r
            .samples
            .iter()
            .min_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap())
            .unwrap();
        assert!(p.det_d.abs() < 1e-6);
        assert_eq!(
            classify_point(&scene, &p.point, &r.thresholds).unwrap(),
            PointClass::SingularBoundary
        );
    }
}
