//! Tracing the funnel `f = 0` slice by slice, with the {α, β} frame.

use rayon::prelude::*;

use crate::surface::Domain;
use crate::sweep::{evaluate, evaluate_unchecked, SweepEval, SweepScene};
use crate::{Result, SweepError, Vec2, Vec3};

/// A point of the funnel with its frame. `β` is tangent to the time slice, `α = ∇f × β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelPoint {
    eval: SweepEval,
    alpha: Vec3,
    beta: Vec3,
}

impl FunnelPoint {
    /// Wraps an evaluation that satisfies `|f| <= eps_fun` and has `(f_u, f_v) != 0`.
    pub fn new(scene: &SweepScene, eval: SweepEval) -> Result<Self> {
        if !(eval.f.abs() <= scene.eps_fun()) {
            return Err(SweepError::OffFunnel {
                u: eval.u,
                v: eval.v,
                t: eval.t,
                residual: eval.f.abs(),
            });
        }
        let (alpha, beta) = frame_vectors(scene, &eval)?;
        Ok(FunnelPoint { eval, alpha, beta })
    }

    pub fn eval(&self) -> &SweepEval {
        &self.eval
    }

    pub fn u(&self) -> f64 {
        self.eval.u
    }

    pub fn v(&self) -> f64 {
        self.eval.v
    }

    pub fn t(&self) -> f64 {
        self.eval.t
    }

    pub fn uv(&self) -> Vec2 {
        self.eval.uv()
    }

    pub fn alpha(&self) -> Vec3 {
        self.alpha
    }

    pub fn beta(&self) -> Vec3 {
        self.beta
    }

    /// Unit tangent of the time slice in the parameter plane.
    pub fn tangent(&self) -> Vec2 {
        Vec2::new(self.beta.x, self.beta.y).normalize()
    }
}

fn frame_vectors(scene: &SweepScene, e: &SweepEval) -> Result<(Vec3, Vec3)> {
    let g = e.fu * e.fu + e.fv * e.fv;
    if !(g.sqrt() > scene.eps_frame()) {
        return Err(SweepError::FrameDegenerate { u: e.u, v: e.v, t: e.t });
    }
    let beta = Vec3::new(-e.fv, e.fu, 0.0);
    let alpha = Vec3::new(-e.fu * e.ft, -e.fv * e.ft, g);
    Ok((alpha, beta))
}

/// `(α, β)` at a funnel point.
pub fn frame(scene: &SweepScene, fp: &FunnelPoint) -> Result<(Vec3, Vec3)> {
    frame_vectors(scene, fp.eval())
}

const CORRECTOR_ITERS: usize = 25;

/// Newton on `f` at fixed `t`, moving `(u, v)` along `(f_u, f_v)`.
fn correct(scene: &SweepScene, mut uv: Vec2, t: f64, iters: usize, max_jump: f64) -> Result<SweepEval> {
    let eps = scene.eps_fun();
    let mut last = f64::INFINITY;
    for _ in 0..iters {
        let e = evaluate_unchecked(scene, uv.x, uv.y, t)?;
        last = e.f.abs();
        if last <= eps {
            return Ok(e);
        }
        let g = e.fu * e.fu + e.fv * e.fv;
        if !(g.sqrt() > scene.eps_frame()) {
            return Err(SweepError::FrameDegenerate { u: uv.x, v: uv.y, t });
        }
        let delta = Vec2::new(e.fu, e.fv) * (-e.f / g);
        if !(delta.norm() <= max_jump) {
            break;
        }
        uv += delta;
    }
    Err(SweepError::NewtonDiverged {
        what: "funnel corrector",
        iterations: iters,
        residual: last,
        last: [uv.x, uv.y],
    })
}

/// Projects `(u, v)` onto the funnel at time `t` and builds the funnel point.
pub fn snap_to_funnel(scene: &SweepScene, u: f64, v: f64, t: f64) -> Result<FunnelPoint> {
    let jump = 0.25 * scene.scales().param_diag;
    let e = correct(scene, Vec2::new(u, v), t, CORRECTOR_ITERS, jump)?;
    FunnelPoint::new(scene, e)
}

/// Ordered funnel points of one component of a time slice and their images `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactCurve {
    pub t: f64,
    pub points: Vec<FunnelPoint>,
    pub closed: bool,
    /// The curve of contact `σ(points, t)`.
    pub image: Vec<Vec3>,
}

impl ContactCurve {
    fn new(t: f64, points: Vec<FunnelPoint>, closed: bool) -> Self {
        let image = points.iter().map(|p| p.eval().point).collect();
        ContactCurve {
            t,
            points,
            closed,
            image,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parameter-space polyline as traced (periodic coordinates are not wrapped).
    pub fn uv(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.uv()).collect()
    }

    /// Length of the image polyline, including the closing segment of closed curves.
    pub fn image_length(&self) -> f64 {
        let mut len: f64 = self.image.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        if self.closed && self.image.len() > 1 {
            len += (self.image[0] - self.image[self.image.len() - 1]).norm();
        }
        len
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Parameter-space arclength per marching step.
    pub step: f64,
    /// Steps shrink by halving down to `step * min_step_ratio` before giving up.
    pub min_step_ratio: f64,
    pub closure_min_steps: usize,
    pub max_points: usize,
}

impl TraceOptions {
    pub fn new(step: f64) -> Self {
        TraceOptions {
            step,
            min_step_ratio: 1.0 / 64.0,
            closure_min_steps: 10,
            max_points: 0,
        }
    }

    fn point_budget(&self, dom: &Domain) -> usize {
        if self.max_points > 0 {
            self.max_points
        } else {
            (200.0 * dom.diagonal() / self.step) as usize + 1000
        }
    }
}

enum MarchEnd {
    Closed,
    Boundary,
}

fn outside(dom: &Domain, p: Vec2) -> bool {
    (!dom.periodic_u && (p.x < dom.u[0] || p.x > dom.u[1])) || (!dom.periodic_v && (p.y < dom.v[0] || p.y > dom.v[1]))
}

/// Funnel point where the segment `a → b` (a inside, b outside) leaves the domain.
fn boundary_point(scene: &SweepScene, t: f64, a: Vec2, b: Vec2, step: f64) -> Result<SweepEval> {
    let dom = scene.surface().domain();
    let mut best: Option<(f64, usize, f64)> = None;
    let checks = [(0usize, dom.periodic_u, dom.u), (1usize, dom.periodic_v, dom.v)];
    for (c, periodic, range) in checks {
        if periodic {
            continue;
        }
        for bound in range {
            let (ac, bc) = (a[c], b[c]);
            let crosses = (bound == range[0] && bc < bound) || (bound == range[1] && bc > bound);
            if crosses && bc != ac {
                let s = ((bound - ac) / (bc - ac)).clamp(0.0, 1.0);
                if best.is_none_or(|(bs, _, _)| s < bs) {
                    best = Some((s, c, bound));
                }
            }
        }
    }
    let fail = |reason: &str| SweepError::TraceFailed {
        t,
        reason: reason.into(),
        partial: vec![],
    };
    let (s, c, bound) = best.ok_or_else(|| fail("boundary crossing not found"))?;
    let mut q = a + (b - a) * s;
    q[c] = bound;
    let o = 1 - c;
    let eps = scene.eps_fun();
    let start = q[o];
    for _ in 0..CORRECTOR_ITERS {
        let e = evaluate_unchecked(scene, q.x, q.y, t)?;
        if e.f.abs() <= eps {
            if outside(&dom, q) {
                return Err(fail("funnel leaves the domain through a corner"));
            }
            return Ok(e);
        }
        let d = if o == 0 { e.fu } else { e.fv };
        if !(d.abs() > scene.eps_frame()) {
            return Err(fail("funnel tangent to the domain boundary"));
        }
        q[o] -= e.f / d;
        if (q[o] - start).abs() > 2.0 * step {
            break;
        }
    }
    Err(fail("boundary projection did not converge"))
}

fn march(
    scene: &SweepScene,
    seed: &FunnelPoint,
    sign: f64,
    opts: &TraceOptions,
) -> Result<(Vec<FunnelPoint>, MarchEnd)> {
    let dom = scene.surface().domain();
    let t = seed.t();
    let budget = opts.point_budget(&dom);
    let start = seed.uv();
    let mut pts = vec![*seed];
    let mut dir = seed.tangent() * sign;
    let partial = |pts: &[FunnelPoint]| pts.iter().map(|p| [p.u(), p.v()]).collect::<Vec<_>>();
    loop {
        if pts.len() >= budget {
            return Err(SweepError::TraceFailed {
                t,
                reason: "point budget exhausted".into(),
                partial: partial(&pts),
            });
        }
        let last = pts[pts.len() - 1].uv();
        let mut h = opts.step;
        let next = loop {
            let pred = last + dir * h;
            let accepted = correct(scene, pred, t, CORRECTOR_ITERS, h).ok().filter(|e| {
                let chord = e.uv() - last;
                let len = chord.norm();
                len > 0.0 && len <= 2.0 * h && chord.dot(&dir) >= 0.5 * len
            });
            if let Some(e) = accepted {
                break e;
            }
            h *= 0.5;
            if h < opts.step * opts.min_step_ratio {
                return Err(SweepError::TraceFailed {
                    t,
                    reason: format!("corrector failed near ({:.6}, {:.6})", last.x, last.y),
                    partial: partial(&pts),
                });
            }
        };
        if outside(&dom, next.uv()) {
            let e = boundary_point(scene, t, last, next.uv(), opts.step).map_err(|err| match err {
                SweepError::TraceFailed { reason, .. } => SweepError::TraceFailed {
                    t,
                    reason,
                    partial: partial(&pts),
                },
                other => other,
            })?;
            // the last point may already sit on the boundary
            if (e.uv() - last).norm() > 1e-12 * opts.step {
                pts.push(FunnelPoint::new(scene, e)?);
            }
            return Ok((pts, MarchEnd::Boundary));
        }
        if pts.len() > opts.closure_min_steps {
            let a = dom.min_image(last - start);
            let b = a + (next.uv() - last);
            if segment_distance(a, b) < 0.5 * opts.step {
                return Ok((pts, MarchEnd::Closed));
            }
        }
        if wound(&dom, next.uv() - start) {
            return Err(SweepError::TraceFailed {
                t,
                reason: "curve winds past a full period without closing; branches cross where (f_u, f_v) vanishes"
                    .into(),
                partial: partial(&pts),
            });
        }
        let fp = FunnelPoint::new(scene, next)?;
        let mut tangent = fp.tangent();
        if tangent.dot(&dir) < 0.0 {
            tangent = -tangent;
        }
        // next to a branch crossing β is unreliable; keep going straight
        let chord = (next.uv() - last).normalize();
        dir = if tangent.dot(&chord) >= std::f64::consts::FRAC_1_SQRT_2 {
            tangent
        } else {
            chord
        };
        pts.push(fp);
    }
}

fn wound(dom: &Domain, d: Vec2) -> bool {
    let over = |x: f64, p: Option<f64>| p.is_some_and(|p| x.abs() > 1.5 * p);
    over(d.x, dom.period_u()) || over(d.y, dom.period_v())
}

/// Distance from the origin to the segment `[a, b]`.
fn segment_distance(a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let s = if len2 > 0.0 {
        (-a.dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * s).norm()
}

/// Marches along `β` from `seed` until the curve closes or reaches the domain boundary;
/// in the latter case the other direction is traced as well.
pub fn trace_pcurve(scene: &SweepScene, t: f64, seed: &FunnelPoint, opts: &TraceOptions) -> Result<ContactCurve> {
    if seed.t() != t {
        return Err(SweepError::InvalidArgument(format!(
            "seed time {} differs from slice time {t}",
            seed.t()
        )));
    }
    if !(opts.step > 0.0) {
        return Err(SweepError::InvalidArgument("trace step must be positive".into()));
    }
    let (fwd, end) = march(scene, seed, 1.0, opts)?;
    if let MarchEnd::Closed = end {
        return Ok(ContactCurve::new(t, fwd, true));
    }
    let (bwd, _) = march(scene, seed, -1.0, opts)?;
    let mut points: Vec<FunnelPoint> = bwd.into_iter().skip(1).rev().collect();
    points.extend(fwd);
    Ok(ContactCurve::new(t, points, false))
}

/// Sign-change scan of `f` on a regular `(n+1) × (n+1)` node grid at fixed `t`.
struct SignGrid {
    n: usize,
    dom: Domain,
    values: Vec<f64>,
}

impl SignGrid {
    fn new(scene: &SweepScene, t: f64, n: usize) -> Result<Self> {
        let dom = scene.surface().domain();
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                let (u, v) = Self::node_of(&dom, n, i, j);
                values.push(evaluate(scene, u, v, t)?.f);
            }
        }
        Ok(SignGrid { n, dom, values })
    }

    fn node_of(dom: &Domain, n: usize, i: usize, j: usize) -> (f64, f64) {
        (
            dom.u[0] + (dom.u[1] - dom.u[0]) * i as f64 / n as f64,
            dom.v[0] + (dom.v[1] - dom.v[0]) * j as f64 / n as f64,
        )
    }

    fn node(&self, i: usize, j: usize) -> Vec2 {
        let (u, v) = Self::node_of(&self.dom, self.n, i, j);
        Vec2::new(u, v)
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Grid edges whose endpoint values differ in sign (zero counts as positive).
    fn sign_changes(&self) -> Vec<((usize, usize), (usize, usize))> {
        let n = self.n;
        let pos = |i, j| self.value(i, j) >= 0.0;
        let mut out = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                if j < n && pos(i, j) != pos(i, j + 1) {
                    out.push(((i, j), (i, j + 1)));
                }
                if i < n && pos(i, j) != pos(i + 1, j) {
                    out.push(((i, j), (i + 1, j)));
                }
            }
        }
        out
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let (u, v) = self.dom.wrap(p.x, p.y);
        let n = self.n as f64;
        let ci = ((u - self.dom.u[0]) / (self.dom.u[1] - self.dom.u[0]) * n).floor();
        let cj = ((v - self.dom.v[0]) / (self.dom.v[1] - self.dom.v[0]) * n).floor();
        let clamp = |x: f64| x.max(0.0).min(n - 1.0) as usize;
        (clamp(ci), clamp(cj))
    }

    fn cell_size(&self) -> f64 {
        let du = (self.dom.u[1] - self.dom.u[0]) / self.n as f64;
        let dv = (self.dom.v[1] - self.dom.v[0]) / self.n as f64;
        du.min(dv)
    }
}

/// Cells near traced curves; sign changes on their edges are considered explained.
struct Coverage {
    n: usize,
    periodic: (bool, bool),
    covered: Vec<bool>,
}

impl Coverage {
    fn new(grid: &SignGrid) -> Self {
        Coverage {
            n: grid.n,
            periodic: (grid.dom.periodic_u, grid.dom.periodic_v),
            covered: vec![false; grid.n * grid.n],
        }
    }

    fn mark_cell(&mut self, ci: usize, cj: usize) {
        let n = self.n as isize;
        for di in -1..=1isize {
            for dj in -1..=1isize {
                let (mut i, mut j) = (ci as isize + di, cj as isize + dj);
                if self.periodic.0 {
                    i = i.rem_euclid(n);
                }
                if self.periodic.1 {
                    j = j.rem_euclid(n);
                }
                if (0..n).contains(&i) && (0..n).contains(&j) {
                    self.covered[(i * n + j) as usize] = true;
                }
            }
        }
    }

    fn mark_polyline(&mut self, grid: &SignGrid, pts: &[Vec2]) {
        let h = 0.5 * grid.cell_size();
        for (k, p) in pts.iter().enumerate() {
            let (ci, cj) = grid.cell_of(*p);
            self.mark_cell(ci, cj);
            if let Some(q) = pts.get(k + 1) {
                let d = q - p;
                let steps = (d.norm() / h).ceil() as usize;
                for s in 1..steps {
                    let (ci, cj) = grid.cell_of(p + d * (s as f64 / steps as f64));
                    self.mark_cell(ci, cj);
                }
            }
        }
    }

    fn edge_covered(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        // cells adjacent to the edge between nodes a and b
        let n = self.n as isize;
        let (i0, j0) = (a.0 as isize, a.1 as isize);
        let cells: [(isize, isize); 2] = if a.0 == b.0 {
            [(i0 - 1, j0), (i0, j0)]
        } else {
            [(i0, j0 - 1), (i0, j0)]
        };
        cells
            .iter()
            .any(|&(i, j)| (0..n).contains(&i) && (0..n).contains(&j) && self.covered[(i * n + j) as usize])
    }
}

fn bisect_edge(scene: &SweepScene, t: f64, mut a: Vec2, mut b: Vec2, fa: f64) -> Result<FunnelPoint> {
    let eps = scene.eps_fun();
    let pos_a = fa >= 0.0;
    let mut mid = 0.5 * (a + b);
    for _ in 0..60 {
        mid = 0.5 * (a + b);
        let fm = evaluate(scene, mid.x, mid.y, t)?.f;
        if fm.abs() <= eps {
            break;
        }
        if (fm >= 0.0) == pos_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    snap_to_funnel(scene, mid.x, mid.y, t)
}

fn check_degenerate(scene: &SweepScene, grid: &SignGrid) -> Result<()> {
    if scene.is_stationary() {
        return Err(SweepError::DegenerateSweep(
            "the trajectory does not move the surface".into(),
        ));
    }
    if grid.max_abs() <= 1e-9 * scene.scales().velocity {
        return Err(SweepError::DegenerateSweep(
            "the funnel function vanishes identically (motion tangent to the surface)".into(),
        ));
    }
    Ok(())
}

pub const DEFAULT_SEED_GRID: usize = 64;

/// First funnel point found by scanning a grid for sign changes and bisecting.
pub fn find_seed(scene: &SweepScene, t: f64) -> Result<FunnelPoint> {
    find_seed_on_grid(scene, t, DEFAULT_SEED_GRID)
}

pub fn find_seed_on_grid(scene: &SweepScene, t: f64, n: usize) -> Result<FunnelPoint> {
    let grid = SignGrid::new(scene, t, n.max(2))?;
    check_degenerate(scene, &grid)?;
    let mut last_err = SweepError::SeedNotFound { t };
    for (a, b) in grid.sign_changes() {
        match bisect_edge(scene, t, grid.node(a.0, a.1), grid.node(b.0, b.1), grid.value(a.0, a.1)) {
            Ok(fp) => return Ok(fp),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// All traced components at one time, plus the errors met while tracing.
#[derive(Debug, Clone)]
pub struct FunnelSlice {
    pub t: f64,
    pub curves: Vec<ContactCurve>,
    pub errors: Vec<SweepError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub nt: usize,
    pub step: f64,
    pub grid: usize,
    pub max_components: usize,
}

impl SampleOptions {
    pub fn new(nt: usize, step: f64) -> Self {
        SampleOptions {
            nt,
            step,
            grid: DEFAULT_SEED_GRID,
            max_components: 64,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FunnelSample {
    pub slices: Vec<FunnelSlice>,
    /// Set when the sweep is degenerate and nothing was traced.
    pub diagnostic: Option<String>,
}

impl FunnelSample {
    pub fn curves(&self) -> impl Iterator<Item = &ContactCurve> {
        self.slices.iter().flat_map(|s| s.curves.iter())
    }

    pub fn points(&self) -> impl Iterator<Item = &FunnelPoint> {
        self.curves().flat_map(|c| c.points.iter())
    }

    pub fn point_count(&self) -> usize {
        self.curves().map(|c| c.len()).sum()
    }
}

/// Traces every component found at time `t`.
pub fn trace_slice(scene: &SweepScene, t: f64, opts: &SampleOptions) -> FunnelSlice {
    let mut slice = FunnelSlice {
        t,
        curves: Vec::new(),
        errors: Vec::new(),
    };
    let grid = match SignGrid::new(scene, t, opts.grid.max(2)) {
        Ok(g) => g,
        Err(e) => {
            slice.errors.push(e);
            return slice;
        }
    };
    if let Err(e) = check_degenerate(scene, &grid) {
        slice.errors.push(e);
        return slice;
    }
    let topts = TraceOptions::new(opts.step);
    let mut cover = Coverage::new(&grid);
    for (a, b) in grid.sign_changes() {
        if slice.curves.len() >= opts.max_components || cover.edge_covered(a, b) {
            continue;
        }
        let na = grid.node(a.0, a.1);
        let nb = grid.node(b.0, b.1);
        let traced =
            bisect_edge(scene, t, na, nb, grid.value(a.0, a.1)).and_then(|seed| trace_pcurve(scene, t, &seed, &topts));
        match traced {
            Ok(curve) => {
                cover.mark_polyline(&grid, &curve.uv());
                slice.curves.push(curve);
            }
            Err(e) => {
                if let SweepError::TraceFailed { partial, .. } = &e {
                    let pts: Vec<Vec2> = partial.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                    cover.mark_polyline(&grid, &pts);
                }
                cover.mark_polyline(&grid, &[na, nb]);
                slice.errors.push(e);
            }
        }
    }
    slice
}

/// Traces `nt` uniformly spaced slices of the scene's time window in parallel.
pub fn sample_funnel(scene: &SweepScene, opts: &SampleOptions) -> Result<FunnelSample> {
    if opts.nt < 2 {
        return Err(SweepError::InvalidArgument(format!(
            "need at least two time samples, got {}",
            opts.nt
        )));
    }
    if !(opts.step > 0.0) {
        return Err(SweepError::InvalidArgument("trace step must be positive".into()));
    }
    let [t0, t1] = scene.window();
    let times: Vec<f64> = (0..opts.nt)
        .map(|k| t0 + (t1 - t0) * k as f64 / (opts.nt - 1) as f64)
        .collect();
    let mid = times[opts.nt / 2];
    let probe = SignGrid::new(scene, mid, opts.grid.max(2))?;
    if let Err(e) = check_degenerate(scene, &probe) {
        return Ok(FunnelSample {
            slices: Vec::new(),
            diagnostic: Some(e.to_string()),
        });
    }
    let slices = times.par_iter().map(|&t| trace_slice(scene, t, opts)).collect();
    Ok(FunnelSample {
        slices,
        diagnostic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::kinematics::{LinearTranslation, Stationary};
    use crate::surface::{Cylinder, Ellipsoid, Surface};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn sphere_along(v: Vec3) -> SweepScene {
        SweepScene::new(
            "s",
            Surface::new(Arc::new(Ellipsoid::sphere(Vec3::zeros(), 1.0).unwrap()), true),
            Arc::new(LinearTranslation::uniform(v)),
        )
        .unwrap()
    }

    #[test]
    fn seed_on_translating_sphere() {
        let scene = corpus::translating_sphere();
        let fp = find_seed(&scene, 0.5).unwrap();
        assert!(fp.eval().f.abs() < 1e-10);
        // great circle: the normal is orthogonal to the velocity
        assert!(fp.eval().normal.y.abs() < 1e-10);
        let (alpha, beta) = frame(&scene, &fp).unwrap();
        // f_t = 0 for a constant velocity, so α points along t only
        assert!(alpha.x.abs() < 1e-12 && alpha.y.abs() < 1e-12 && alpha.z > 0.0);
        assert!(beta.norm() > 0.0);
    }

    #[test]
    fn seed_on_example1() {
        let scene = corpus::cylinder_example1();
        let fp = find_seed(&scene, 0.1).unwrap();
        assert!(fp.eval().f.abs() < 1e-10);
    }

    #[test]
    fn stationary_and_tangential_sweeps_are_degenerate() {
        let still = SweepScene::new(
            "still",
            Surface::new(Arc::new(Ellipsoid::sphere(Vec3::zeros(), 1.0).unwrap()), true),
            Arc::new(Stationary),
        )
        .unwrap();
        assert!(matches!(find_seed(&still, 0.5), Err(SweepError::DegenerateSweep(_))));
        let axial = SweepScene::new(
            "axial",
            Surface::new(Arc::new(Cylinder::new(Vec3::zeros(), 1.0, [-1.0, 1.0]).unwrap()), true),
            Arc::new(LinearTranslation::uniform(Vec3::y())),
        )
        .unwrap();
        assert!(matches!(find_seed(&axial, 0.5), Err(SweepError::DegenerateSweep(_))));
        let s = sample_funnel(&axial, &SampleOptions::new(5, 0.01)).unwrap();
        assert!(s.slices.is_empty() && s.diagnostic.is_some());
    }

    #[test]
    fn translating_sphere_traces_great_circle() {
        let scene = corpus::translating_sphere();
        let seed = find_seed(&scene, 0.5).unwrap();
        let c = trace_pcurve(&scene, 0.5, &seed, &TraceOptions::new(0.01)).unwrap();
        assert!(c.closed);
        let len = c.image_length();
        assert!((len - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "length {len}");
        for p in &c.points {
            assert!(p.eval().f.abs() <= scene.eps_fun());
        }
        let uv = c.uv();
        for w in uv.windows(2) {
            assert!((w[1] - w[0]).norm() <= 0.01 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn translating_sphere_slices_advance() {
        let scene = corpus::translating_sphere();
        let s = sample_funnel(&scene, &SampleOptions::new(5, 0.01)).unwrap();
        assert_eq!(s.slices.len(), 5);
        for (k, slice) in s.slices.iter().enumerate() {
            assert_eq!(slice.curves.len(), 1, "errors {:?}", slice.errors);
            let c = &slice.curves[0];
            let centroid: Vec3 = c.image.iter().sum::<Vec3>() / c.image.len() as f64;
            assert!((centroid - Vec3::new(0.0, k as f64 / 4.0, 0.0)).norm() < 1e-2);
        }
    }

    #[test]
    fn frame_is_orthogonal_and_image_tangent() {
        let scene = corpus::ellipsoid_example2();
        let seed = find_seed(&scene, 0.8).unwrap();
        let c = trace_pcurve(&scene, 0.8, &seed, &TraceOptions::new(0.02)).unwrap();
        for p in &c.points {
            let g = p.eval().grad();
            let scale = g.norm().powi(3).max(1.0);
            assert!(p.alpha().dot(&g).abs() <= 1e-10 * scale);
            assert!(p.beta().dot(&g).abs() <= 1e-10 * scale);
            assert!(p.alpha().dot(&p.beta()).abs() <= 1e-10 * scale);
            let e = p.eval();
            let jb = e.jacobian() * p.beta();
            assert!(jb.dot(&e.normal).abs() <= 1e-9 * jb.norm().max(1.0));
        }
    }

    #[test]
    fn beta_is_tangent_to_polyline() {
        let scene = corpus::ellipsoid_example2();
        let seed = find_seed(&scene, 0.5).unwrap();
        let c = trace_pcurve(&scene, 0.5, &seed, &TraceOptions::new(0.005)).unwrap();
        let uv = c.uv();
        for k in 1..uv.len() - 1 {
            let fd = (uv[k + 1] - uv[k - 1]).normalize();
            let b = c.points[k].tangent();
            let ang = fd.dot(&b).abs().min(1.0).acos().to_degrees();
            assert!(ang < 1.0, "angle {ang} at {k}");
        }
    }

    #[test]
    fn sphere_translated_sideways_crosses_periodic_seam() {
        // velocity along x puts the funnel on the meridians v = ±π/2 which end at the pole margin
        let scene = sphere_along(Vec3::x());
        let s = sample_funnel(&scene, &SampleOptions::new(2, 0.01)).unwrap();
        for slice in &s.slices {
            assert!(slice.errors.is_empty(), "{:?}", slice.errors);
            assert_eq!(slice.curves.len(), 2);
            for c in &slice.curves {
                assert!(!c.closed);
            }
        }
    }

    #[test]
    fn off_funnel_point_is_rejected() {
        let scene = corpus::translating_sphere();
        let e = evaluate(&scene, 0.3, 0.0, 0.5).unwrap();
        assert!(matches!(FunnelPoint::new(&scene, e), Err(SweepError::OffFunnel { .. })));
        let fp = snap_to_funnel(&scene, 0.3, 0.0, 0.5).unwrap();
        assert!(fp.u().abs() < 1e-9);
    }
}
