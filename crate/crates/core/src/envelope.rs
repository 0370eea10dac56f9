//! Procedural envelope faces `E(p, t)`: a spline seed refined by Newton onto the contact set.

use rayon::prelude::*;

use crate::funnel::{snap_to_funnel, trace_slice, ContactCurve, FunnelPoint, SampleOptions, DEFAULT_SEED_GRID};
use crate::spline::CubicSpline;
use crate::surface::Domain;
use crate::sweep::{evaluate_unchecked, SweepEval, SweepScene};
use crate::{Mat2, Result, SweepError, Vec2, Vec3};

/// `(ū, v̄)` and their partials at one `(p, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedJet {
    pub u: f64,
    pub v: f64,
    pub u_p: f64,
    pub v_p: f64,
    pub u_pp: f64,
    pub v_pp: f64,
    pub u_t: f64,
    pub v_t: f64,
    pub u_pt: f64,
    pub v_pt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedStats {
    /// Largest `|f(ū, v̄, t)|` over the interpolation nodes.
    pub max_abs_f_nodes: f64,
    /// Largest `|f|` at the centers of the node cells.
    pub max_abs_f_midpoints: f64,
}

/// Interpolating cubic tensor-product spline `(p, t) ↦ (ū, v̄)` through resampled contact curves.
#[derive(Debug, Clone)]
pub struct SeedSurface {
    times: Vec<f64>,
    p_sites: Vec<f64>,
    u_rows: Vec<CubicSpline>,
    v_rows: Vec<CubicSpline>,
    closed: bool,
    stats: SeedStats,
}

impl SeedSurface {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn p_sites(&self) -> &[f64] {
        &self.p_sites
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn stats(&self) -> SeedStats {
        self.stats
    }

    /// Node values `(ū, v̄)` of slice `i`.
    pub fn node_values(&self, i: usize) -> (&[f64], &[f64]) {
        (self.u_rows[i].values(), self.v_rows[i].values())
    }

    pub fn eval(&self, p: f64, t: f64) -> SeedJet {
        let n = self.times.len();
        let mut cols = [
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        for i in 0..n {
            let ju = self.u_rows[i].eval(p);
            let jv = self.v_rows[i].eval(p);
            for k in 0..3 {
                cols[k][i] = ju[k];
                cols[3 + k][i] = jv[k];
            }
        }
        // interpolation across slices is linear in the data, so each p-derivative is interpolated directly
        let across = |vals: &[f64]| {
            CubicSpline::natural(&self.times, vals)
                .expect("validated sites")
                .eval(t)
        };
        let u = across(&cols[0]);
        let up = across(&cols[1]);
        let upp = across(&cols[2]);
        let v = across(&cols[3]);
        let vp = across(&cols[4]);
        let vpp = across(&cols[5]);
        SeedJet {
            u: u[0],
            v: v[0],
            u_p: up[0],
            v_p: vp[0],
            u_pp: upp[0],
            v_pp: vpp[0],
            u_t: u[1],
            v_t: v[1],
            u_pt: up[1],
            v_pt: vp[1],
        }
    }
}

// Arclength resampling of a parameter polyline to `np` points.
fn resample(poly: &[Vec2], np: usize) -> Vec<Vec2> {
    let mut cum = vec![0.0];
    for w in poly.windows(2) {
        cum.push(cum[cum.len() - 1] + (w[1] - w[0]).norm());
    }
    let total = cum[cum.len() - 1];
    let mut out = Vec::with_capacity(np);
    let mut seg = 0;
    for k in 0..np {
        let s = total * k as f64 / (np - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let a = if len > 0.0 {
            ((s - cum[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(poly[seg] + (poly[seg + 1] - poly[seg]) * a);
    }
    out
}

fn period_shift(dom: &Domain, from: Vec2, to: Vec2) -> Vec2 {
    let d = to - from;
    let m = dom.min_image(d);
    d - m
}

// Candidate polylines for one contact curve: both orientations, and for closed curves every start.
fn orientations(curve: &ContactCurve, dom: &Domain, anchor: Option<Vec2>) -> Vec<Vec<Vec2>> {
    let uv = curve.uv();
    let n = uv.len();
    if !curve.closed {
        let mut rev = uv.clone();
        rev.reverse();
        return if anchor.is_some() { vec![uv, rev] } else { vec![uv] };
    }
    let last = uv[n - 1];
    let lap = last + dom.min_image(uv[0] - last) - uv[0];
    let q = |j: isize| uv[j.rem_euclid(n as isize) as usize] + lap * j.div_euclid(n as isize) as f64;
    let start = match anchor {
        Some(a) => (0..n)
            .min_by(|&i, &j| {
                let di = dom.min_image(uv[i] - a).norm();
                let dj = dom.min_image(uv[j] - a).norm();
                di.partial_cmp(&dj).unwrap()
            })
            .unwrap_or(0) as isize,
        None => 0,
    };
    let fwd: Vec<Vec2> = (0..=n as isize).map(|j| q(start + j)).collect();
    if anchor.is_none() {
        return vec![fwd];
    }
    let bwd: Vec<Vec2> = (0..=n as isize).map(|j| q(start - j)).collect();
    vec![fwd, bwd]
}

fn resample_curve(scene: &SweepScene, curve: &ContactCurve, np: usize, prev: Option<&[Vec2]>) -> Result<Vec<Vec2>> {
    let dom = scene.surface().domain();
    let mut best: Option<(f64, Vec<Vec2>)> = None;
    for poly in orientations(curve, &dom, prev.map(|p| p[0])) {
        let mut pts = resample(&poly, np);
        if let Some(prev) = prev {
            let shift = period_shift(&dom, pts[0], prev[0]);
            for p in pts.iter_mut() {
                *p += shift;
            }
        }
        let cost = prev.map_or(0.0, |prev| pts.iter().zip(prev).map(|(a, b)| (a - b).norm()).sum());
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, pts));
        }
    }
    let (_, pts) = best.expect("at least one orientation");
    let lap = pts[np - 1] - pts[0];
    let mut out = Vec::with_capacity(np);
    for (k, p) in pts.iter().enumerate() {
        if curve.closed && k == np - 1 {
            out.push(out[0] + lap);
            continue;
        }
        let fp = snap_to_funnel(scene, p.x, p.y, curve.t)?;
        // keep the unwrapped chart even if the corrector crossed a seam
        out.push(fp.uv() + period_shift(&dom, fp.uv(), *p));
    }
    Ok(out)
}

/// Traces `nt` slices of the scene window and fits one seed surface per contact component.
pub fn build_seeds(scene: &SweepScene, nt: usize, np: usize, step: f64) -> Result<Vec<SeedSurface>> {
    if nt < 2 {
        return Err(SweepError::InvalidArgument(format!(
            "seed needs at least two time slices, got {nt}"
        )));
    }
    if np < 4 {
        return Err(SweepError::InvalidArgument(format!(
            "seed needs at least four points per slice, got {np}"
        )));
    }
    let [t0, t1] = scene.window();
    let times: Vec<f64> = (0..nt).map(|k| t0 + (t1 - t0) * k as f64 / (nt - 1) as f64).collect();
    let opts = SampleOptions {
        nt,
        step,
        grid: DEFAULT_SEED_GRID,
        max_components: 64,
    };
    let slices: Vec<_> = times.par_iter().map(|&t| trace_slice(scene, t, &opts)).collect();
    for s in &slices {
        if let Some(e) = s.errors.first() {
            return Err(e.clone());
        }
        if s.curves.is_empty() {
            return Err(SweepError::SeedNotFound { t: s.t });
        }
    }
    let ncomp = slices[0].curves.len();
    for w in slices.windows(2) {
        if w[1].curves.len() != ncomp {
            return Err(SweepError::TopologyChange {
                t0: w[0].t,
                t1: w[1].t,
                n0: w[0].curves.len(),
                n1: w[1].curves.len(),
            });
        }
        let closed0: Vec<bool> = w[0].curves.iter().map(|c| c.closed).collect();
        let mut closed1: Vec<bool> = w[1].curves.iter().map(|c| c.closed).collect();
        let mut c0 = closed0.clone();
        c0.sort();
        closed1.sort();
        if c0 != closed1 {
            return Err(SweepError::TopologyChange {
                t0: w[0].t,
                t1: w[1].t,
                n0: ncomp,
                n1: ncomp,
            });
        }
    }
    let dom = scene.surface().domain();
    let p_sites: Vec<f64> = (0..np).map(|k| k as f64 / (np - 1) as f64).collect();
    let mut seeds = Vec::with_capacity(ncomp);
    for comp in 0..ncomp {
        let mut rows: Vec<Vec<Vec2>> = Vec::with_capacity(nt);
        let mut curve = &slices[0].curves[comp];
        let closed = curve.closed;
        rows.push(resample_curve(scene, curve, np, None)?);
        for s in &slices[1..] {
            let prev = rows.last().expect("first row");
            // component continuing the previous one: nearest to its resampled start
            curve = s
                .curves
                .iter()
                .min_by(|a, b| {
                    let da = min_distance(&dom, a, prev[0]);
                    let db = min_distance(&dom, b, prev[0]);
                    da.partial_cmp(&db).unwrap()
                })
                .expect("nonempty slice");
            if curve.closed != closed {
                return Err(SweepError::TopologyChange {
                    t0: curve.t,
                    t1: curve.t,
                    n0: ncomp,
                    n1: ncomp,
                });
            }
            let row = resample_curve(scene, curve, np, Some(prev))?;
            rows.push(row);
        }
        let row_spline = |k: usize| -> Result<Vec<CubicSpline>> {
            rows.iter()
                .map(|r| CubicSpline::natural(&p_sites, &r.iter().map(|x| x[k]).collect::<Vec<_>>()))
                .collect()
        };
        let mut seed = SeedSurface {
            times: times.clone(),
            p_sites: p_sites.clone(),
            u_rows: row_spline(0)?,
            v_rows: row_spline(1)?,
            closed,
            stats: SeedStats {
                max_abs_f_nodes: 0.0,
                max_abs_f_midpoints: 0.0,
            },
        };
        seed.stats = seed_stats(scene, &seed)?;
        seeds.push(seed);
    }
    Ok(seeds)
}

fn min_distance(dom: &Domain, c: &ContactCurve, a: Vec2) -> f64 {
    c.points
        .iter()
        .map(|p| dom.min_image(p.uv() - a).norm())
        .fold(f64::INFINITY, f64::min)
}

fn seed_stats(scene: &SweepScene, seed: &SeedSurface) -> Result<SeedStats> {
    let mut nodes: f64 = 0.0;
    let mut mids: f64 = 0.0;
    for (i, &t) in seed.times.iter().enumerate() {
        for &p in &seed.p_sites {
            let j = seed.eval(p, t);
            nodes = nodes.max(evaluate_unchecked(scene, j.u, j.v, t)?.f.abs());
        }
        if let Some(&t_next) = seed.times.get(i + 1) {
            for w in seed.p_sites.windows(2) {
                let j = seed.eval(0.5 * (w[0] + w[1]), 0.5 * (t + t_next));
                mids = mids.max(evaluate_unchecked(scene, j.u, j.v, 0.5 * (t + t_next))?.f.abs());
            }
        }
    }
    Ok(SeedStats {
        max_abs_f_nodes: nodes,
        max_abs_f_midpoints: mids,
    })
}

/// Seed for a scene whose contact set has exactly one component per slice.
pub fn build_seed(scene: &SweepScene, nt: usize, np: usize) -> Result<SeedSurface> {
    let step = 0.01 * scene.scales().param_diag;
    let mut seeds = build_seeds(scene, nt, np, step)?;
    if seeds.len() != 1 {
        return Err(SweepError::InvalidArgument(format!(
            "contact set has {} components per slice; use build_seeds",
            seeds.len()
        )));
    }
    Ok(seeds.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Relative residual target.
    pub tol: f64,
    /// Residuals up to this relative level are still accepted after `max_iter` steps.
    pub accept: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tol: 1e-12,
            accept: 1e-10,
            max_iter: 50,
        }
    }
}

/// An envelope face evaluated on demand.
#[derive(Debug, Clone)]
pub struct ProceduralEnvelope {
    scene: SweepScene,
    seed: SeedSurface,
    settings: NewtonSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    P,
    T,
}

/// A converged envelope point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeJet {
    pub p: f64,
    pub t: f64,
    pub point: Vec3,
    pub ep: Option<Vec3>,
    pub et: Option<Vec3>,
    /// `A(t) N(u, v)`.
    pub normal: Vec3,
    pub u: f64,
    pub v: f64,
    pub iterations: usize,
    /// `|f| / velocity scale`.
    pub residual_funnel: f64,
    /// `|⟨E - Ē, Ē_p⟩| / (length scale · |Ē_p|)`.
    pub residual_plane: f64,
}

struct Solved {
    eval: SweepEval,
    seed: SeedJet,
    seed_eval: SweepEval,
    ebar_p: Vec3,
    iterations: usize,
    res: (f64, f64),
}

impl ProceduralEnvelope {
    pub fn new(scene: SweepScene, seed: SeedSurface) -> Self {
        ProceduralEnvelope {
            scene,
            seed,
            settings: NewtonSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: NewtonSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn scene(&self) -> &SweepScene {
        &self.scene
    }

    pub fn seed(&self) -> &SeedSurface {
        &self.seed
    }

    pub fn settings(&self) -> NewtonSettings {
        self.settings
    }

    fn check_params(&self, p: f64, t: f64) -> Result<()> {
        let [t0, t1] = self.scene.window();
        let slack = 1e-12;
        if !(p >= -slack && p <= 1.0 + slack) || !(t >= t0 - slack && t <= t1 + slack) {
            return Err(SweepError::InvalidArgument(format!(
                "(p, t) = ({p}, {t}) outside the seed domain"
            )));
        }
        Ok(())
    }

    fn residuals(&self, e: &SweepEval, ebar: &Vec3, ebar_p: &Vec3) -> (f64, f64, Vec2) {
        let sc = self.scene.scales();
        let f1 = e.f;
        let f2 = (e.point - ebar).dot(ebar_p);
        let r1 = f1.abs() / sc.velocity;
        let r2 = f2.abs() / (sc.length * ebar_p.norm());
        (r1, r2, Vec2::new(f1, f2))
    }

    fn solve(&self, p: f64, t: f64) -> Result<Solved> {
        self.check_params(p, t)?;
        let sj = self.seed.eval(p, t);
        let se = evaluate_unchecked(&self.scene, sj.u, sj.v, t)?;
        let ebar = se.point;
        let ebar_p = se.su * sj.u_p + se.sv * sj.v_p;
        if !(ebar_p.norm() > 0.0) {
            return Err(SweepError::SingularSystem {
                what: "seed tangent vanishes",
            });
        }
        let mut x = Vec2::new(sj.u, sj.v);
        let mut e = se;
        let (mut r1, mut r2, mut fvec) = self.residuals(&e, &ebar, &ebar_p);
        let mut iterations = 0;
        let st = self.settings;
        while r1.max(r2) > st.tol && iterations < st.max_iter {
            iterations += 1;
            let jac = Mat2::new(e.fu, e.fv, e.su.dot(&ebar_p), e.sv.dot(&ebar_p));
            let delta = jac.lu().solve(&(-fvec)).ok_or(SweepError::SingularSystem {
                what: "envelope Newton step",
            })?;
            let current = r1.max(r2);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let cand = x + delta * lambda;
                if let Ok(ce) = evaluate_unchecked(&self.scene, cand.x, cand.y, t) {
                    let (c1, c2, cf) = self.residuals(&ce, &ebar, &ebar_p);
                    if c1.max(c2) < current {
                        accepted = Some((cand, ce, c1, c2, cf));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((cand, ce, c1, c2, cf)) => {
                    x = cand;
                    e = ce;
                    r1 = c1;
                    r2 = c2;
                    fvec = cf;
                }
                None => break,
            }
        }
        if r1.max(r2) > st.accept {
            return Err(SweepError::NewtonDiverged {
                what: "envelope evaluation",
                iterations,
                residual: r1.max(r2),
                last: [x.x, x.y],
            });
        }
        Ok(Solved {
            eval: e,
            seed: sj,
            seed_eval: se,
            ebar_p,
            iterations,
            res: (r1, r2),
        })
    }

    fn jet_of(&self, p: f64, t: f64, s: &Solved) -> EnvelopeJet {
        EnvelopeJet {
            p,
            t,
            point: s.eval.point,
            ep: None,
            et: None,
            normal: s.eval.normal,
            u: s.eval.u,
            v: s.eval.v,
            iterations: s.iterations,
            residual_funnel: s.res.0,
            residual_plane: s.res.1,
        }
    }

    fn derivative_from(&self, s: &Solved, which: Direction) -> Result<Vec3> {
        let e = &s.eval;
        let se = &s.seed_eval;
        let sj = &s.seed;
        let ebp = s.ebar_p;
        let diff = e.point - se.point;
        let jac = Mat2::new(e.fu, e.fv, e.su.dot(&ebp), e.sv.dot(&ebp));
        let rhs = match which {
            Direction::P => {
                let ebar_pp = se.suu() * (sj.u_p * sj.u_p)
                    + se.suv() * (2.0 * sj.u_p * sj.v_p)
                    + se.svv() * (sj.v_p * sj.v_p)
                    + se.su * sj.u_pp
                    + se.sv * sj.v_pp;
                Vec2::new(0.0, ebp.dot(&ebp) - diff.dot(&ebar_pp))
            }
            Direction::T => {
                let ebar_t = se.su * sj.u_t + se.sv * sj.v_t + se.velocity;
                let ebar_pt = (se.suu() * sj.u_t + se.suv() * sj.v_t + se.sut()) * sj.u_p
                    + se.su * sj.u_pt
                    + (se.suv() * sj.u_t + se.svv() * sj.v_t + se.svt()) * sj.v_p
                    + se.sv * sj.v_pt;
                Vec2::new(-e.ft, -(e.velocity - ebar_t).dot(&ebp) - diff.dot(&ebar_pt))
            }
        };
        let d = jac
            .lu()
            .solve(&rhs)
            .filter(|d| d.iter().all(|x| x.is_finite()))
            .ok_or(SweepError::SingularSystem {
                what: "envelope derivative",
            })?;
        let mut out = e.su * d.x + e.sv * d.y;
        if which == Direction::T {
            out += e.velocity;
        }
        Ok(out)
    }
}

/// Position of the envelope at `(p, t)`.
pub fn eval_envelope(env: &ProceduralEnvelope, p: f64, t: f64) -> Result<EnvelopeJet> {
    let s = env.solve(p, t)?;
    Ok(env.jet_of(p, t, &s))
}

/// `∂E/∂p` or `∂E/∂t` at `(p, t)`.
pub fn eval_envelope_derivative(env: &ProceduralEnvelope, p: f64, t: f64, which: Direction) -> Result<Vec3> {
    let s = env.solve(p, t)?;
    env.derivative_from(&s, which)
}

/// Position and both first derivatives from a single Newton solve.
pub fn eval_envelope_jet(env: &ProceduralEnvelope, p: f64, t: f64) -> Result<EnvelopeJet> {
    let s = env.solve(p, t)?;
    let mut j = env.jet_of(p, t, &s);
    j.ep = Some(env.derivative_from(&s, Direction::P)?);
    j.et = Some(env.derivative_from(&s, Direction::T)?);
    Ok(j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionViolation {
    pub p: f64,
    pub t: f64,
    /// Co-oriented crossings of the normal plane with the traced contact curve.
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssumptionReport {
    pub checked: usize,
    pub violations: Vec<AssumptionViolation>,
    pub errors: Vec<String>,
}

/// Counts how often the plane through `Ē(p, t)` normal to `Ē_p` meets the traced curve of contact
/// in the direction of `Ē_p`; anything other than once is a violation.
pub fn validate_assumption(env: &ProceduralEnvelope, samples: usize) -> AssumptionReport {
    let scene = &env.scene;
    let n = samples.max(2);
    let [t0, t1] = scene.window();
    let step = 0.01 * scene.scales().param_diag;
    let mut report = AssumptionReport::default();
    for i in 0..n {
        let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
        let slice = trace_slice(scene, t, &SampleOptions::new(2, step));
        for e in &slice.errors {
            report.errors.push(format!("t = {t}: {e}"));
        }
        if slice.curves.is_empty() {
            continue;
        }
        for k in 0..n {
            // open curves end on the domain boundary, where the plane meets the curve at its endpoint
            let p = if env.seed.closed {
                k as f64 / n as f64
            } else {
                (k as f64 + 0.5) / n as f64
            };
            let sj = env.seed.eval(p, t);
            let se = match evaluate_unchecked(scene, sj.u, sj.v, t) {
                Ok(e) => e,
                Err(e) => {
                    report.errors.push(e.to_string());
                    continue;
                }
            };
            let anchor = se.point;
            let normal = se.su * sj.u_p + se.sv * sj.v_p;
            let curve = slice
                .curves
                .iter()
                .min_by(|a, b| {
                    let da = polyline_distance(&a.image, a.closed, &anchor);
                    let db = polyline_distance(&b.image, b.closed, &anchor);
                    da.partial_cmp(&db).unwrap()
                })
                .expect("nonempty");
            let crossings = plane_crossings(&curve.image, curve.closed, &anchor, &normal);
            report.checked += 1;
            if crossings != 1 {
                report.violations.push(AssumptionViolation { p, t, crossings });
            }
        }
    }
    report
}

fn segments(poly: &[Vec3], closed: bool) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
    let n = poly.len();
    let extra = if closed && n > 1 {
        Some((poly[n - 1], poly[0]))
    } else {
        None
    };
    poly.windows(2).map(|w| (w[0], w[1])).chain(extra)
}

fn polyline_distance(poly: &[Vec3], closed: bool, x: &Vec3) -> f64 {
    segments(poly, closed)
        .map(|(a, b)| {
            let d = b - a;
            let l2 = d.norm_squared();
            let s = if l2 > 0.0 {
                ((x - a).dot(&d) / l2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (a + d * s - x).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn plane_crossings(poly: &[Vec3], closed: bool, anchor: &Vec3, normal: &Vec3) -> usize {
    segments(poly, closed)
        .filter(|(a, b)| {
            let sa = (a - anchor).dot(normal);
            let sb = (b - anchor).dot(normal);
            sa < 0.0 && sb >= 0.0
        })
        .count()
}

/// Gaussian curvature of the contact set of a purely translational sweep at a funnel point:
/// `⟨N, V_t⟩ / (⟨N, V_t⟩ - ⟨W(V), V⟩) · det W`.
pub fn gaussian_curvature_translational(scene: &SweepScene, fp: &FunnelPoint) -> Result<f64> {
    if !scene.trajectory().is_translation() {
        return Err(SweepError::NotTranslational);
    }
    let e = fp.eval();
    let accel = e.motion.dd_translation;
    let num = e.normal.dot(&accel);
    let wvv = e
        .jet
        .normal_curvature_form(&e.velocity)
        .ok_or(SweepError::SingularGram { u: e.u, v: e.v, t: e.t })?;
    let den = num - wvv;
    if !(den.abs() > 1e-14 * (num.abs() + wvv.abs())) {
        return Err(SweepError::CurvatureDegenerate);
    }
    Ok(num / den * e.jet.gaussian_curvature())
}
