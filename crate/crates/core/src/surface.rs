//! Parametric surfaces with 2-jets, oriented unit normals and the Weingarten matrix.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::bspline::{basis_derivatives, find_span, validate_knots};
use crate::{Mat2, Result, SweepError, Vec2, Vec3};

/// Rectangular parameter domain; periodic directions wrap instead of ending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl Domain {
    pub fn new(u: [f64; 2], v: [f64; 2]) -> Result<Self> {
        if !(u[1] > u[0]) || !(v[1] > v[0]) || !u.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(SweepError::InvalidSurface(format!(
                "empty or non-finite domain {u:?} x {v:?}"
            )));
        }
        Ok(Domain {
            u,
            v,
            periodic_u: false,
            periodic_v: false,
        })
    }

    pub fn diagonal(&self) -> f64 {
        ((self.u[1] - self.u[0]).powi(2) + (self.v[1] - self.v[0]).powi(2)).sqrt()
    }

    pub fn period_u(&self) -> Option<f64> {
        self.periodic_u.then(|| self.u[1] - self.u[0])
    }

    pub fn period_v(&self) -> Option<f64> {
        self.periodic_v.then(|| self.v[1] - self.v[0])
    }

    /// True when the non-periodic coordinates lie inside the bounds, up to `slack`.
    pub fn contains(&self, u: f64, v: f64, slack: f64) -> bool {
        let inside = |x: f64, r: [f64; 2], periodic: bool| {
            x.is_finite() && (periodic || (x >= r[0] - slack && x <= r[1] + slack))
        };
        inside(u, self.u, self.periodic_u) && inside(v, self.v, self.periodic_v)
    }

    /// Maps periodic coordinates into their fundamental interval.
    pub fn wrap(&self, u: f64, v: f64) -> (f64, f64) {
        let w = |x: f64, r: [f64; 2], periodic: bool| {
            if periodic {
                let p = r[1] - r[0];
                r[0] + (x - r[0]).rem_euclid(p)
            } else {
                x
            }
        };
        (w(u, self.u, self.periodic_u), w(v, self.v, self.periodic_v))
    }

    /// Shortest representative of a parameter difference under the periodic identifications.
    pub fn min_image(&self, d: Vec2) -> Vec2 {
        let m = |x: f64, p: Option<f64>| match p {
            Some(p) => x - p * (x / p).round(),
            None => x,
        };
        Vec2::new(m(d.x, self.period_u()), m(d.y, self.period_v()))
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.u[0] + self.u[1]), 0.5 * (self.v[0] + self.v[1]))
    }
}

/// Position and partial derivatives up to order two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub point: Vec3,
    pub su: Vec3,
    pub sv: Vec3,
    pub suu: Vec3,
    pub suv: Vec3,
    pub svv: Vec3,
}

/// A C² map from a rectangular domain into space.
pub trait ParametricSurface: Send + Sync + fmt::Debug {
    fn domain(&self) -> Domain;

    /// Partials at `(u, v)`. Defined slightly beyond the domain so Newton iterates may overshoot.
    fn partials(&self, u: f64, v: f64) -> Partials;
}

/// Oriented surface point: partials, unit normal, its derivatives and the Weingarten matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub u: f64,
    pub v: f64,
    pub point: Vec3,
    pub su: Vec3,
    pub sv: Vec3,
    pub suu: Vec3,
    pub suv: Vec3,
    pub svv: Vec3,
    pub normal: Vec3,
    pub nu: Vec3,
    pub nv: Vec3,
    /// First fundamental form.
    pub metric: Mat2,
    /// `[N_u N_v] = [S_u S_v] W`.
    pub weingarten: Mat2,
}

impl SurfaceJet {
    fn from_partials(u: f64, v: f64, p: Partials, sign: f64, eps_reg: f64) -> Result<Self> {
        let n = p.su.cross(&p.sv);
        let len = n.norm();
        if !(len > eps_reg) {
            return Err(SweepError::DegenerateSurface { u, v, norm: len });
        }
        let nhat = n / len;
        let n_u = p.suu.cross(&p.sv) + p.su.cross(&p.suv);
        let n_v = p.suv.cross(&p.sv) + p.su.cross(&p.svv);
        let nu = sign * (n_u - nhat * nhat.dot(&n_u)) / len;
        let nv = sign * (n_v - nhat * nhat.dot(&n_v)) / len;
        let metric = Mat2::new(p.su.dot(&p.su), p.su.dot(&p.sv), p.su.dot(&p.sv), p.sv.dot(&p.sv));
        let proj = Mat2::new(p.su.dot(&nu), p.su.dot(&nv), p.sv.dot(&nu), p.sv.dot(&nv));
        let weingarten = metric
            .try_inverse()
            .ok_or(SweepError::DegenerateSurface { u, v, norm: len })?
            * proj;
        Ok(SurfaceJet {
            u,
            v,
            point: p.point,
            su: p.su,
            sv: p.sv,
            suu: p.suu,
            suv: p.suv,
            svv: p.svv,
            normal: sign * nhat,
            nu,
            nv,
            metric,
            weingarten,
        })
    }

    /// Gaussian curvature `det W`.
    pub fn gaussian_curvature(&self) -> f64 {
        self.weingarten.determinant()
    }

    /// Coefficients `(a, b)` of the tangent vector `w ≈ a S_u + b S_v` (least squares).
    pub fn tangent_coords(&self, w: &Vec3) -> Option<Vec2> {
        let rhs = Vec2::new(self.su.dot(w), self.sv.dot(w));
        self.metric.lu().solve(&rhs)
    }

    /// Normal curvature times squared length, `⟨dN(w), w⟩`, for a tangent vector `w`.
    pub fn normal_curvature_form(&self, w: &Vec3) -> Option<f64> {
        let c = self.tangent_coords(w)?;
        let dn = self.nu * c.x + self.nv * c.y;
        Some(dn.dot(w))
    }
}

/// A parametric surface with a chosen normal orientation.
#[derive(Debug, Clone)]
pub struct Surface {
    geometry: Arc<dyn ParametricSurface>,
    flip_normal: bool,
    eps_reg: f64,
}

impl Surface {
    /// `flip_normal = false` takes `N = S_u × S_v / |S_u × S_v|`.
    pub fn new(geometry: Arc<dyn ParametricSurface>, flip_normal: bool) -> Self {
        let eps_reg = 1e-9 * geometry.domain().diagonal();
        Surface {
            geometry,
            flip_normal,
            eps_reg,
        }
    }

    pub fn geometry(&self) -> &dyn ParametricSurface {
        self.geometry.as_ref()
    }

    pub fn domain(&self) -> Domain {
        self.geometry.domain()
    }

    pub fn normal_sign(&self) -> f64 {
        if self.flip_normal {
            -1.0
        } else {
            1.0
        }
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    /// Jet at a domain point; periodic coordinates are wrapped first.
    pub fn eval_jet(&self, u: f64, v: f64) -> Result<SurfaceJet> {
        let dom = self.domain();
        if !dom.contains(u, v, 1e-12 * dom.diagonal()) {
            return Err(SweepError::OutOfDomain { u, v });
        }
        let (wu, wv) = dom.wrap(u, v);
        let mut jet = self.jet_unchecked(wu, wv)?;
        jet.u = u;
        jet.v = v;
        Ok(jet)
    }

    /// Jet without the domain check, for iterates that briefly leave the domain.
    pub fn jet_unchecked(&self, u: f64, v: f64) -> Result<SurfaceJet> {
        if !u.is_finite() || !v.is_finite() {
            return Err(SweepError::OutOfDomain { u, v });
        }
        let p = self.geometry.partials(u, v);
        SurfaceJet::from_partials(u, v, p, self.normal_sign(), self.eps_reg)
    }

    pub fn shape_operator(&self, u: f64, v: f64) -> Result<Mat2> {
        Ok(self.eval_jet(u, v)?.weingarten)
    }
}

/// `S(u, v) = origin + u·du + v·dv`.
#[derive(Debug, Clone, Copy)]
pub struct Plane {
    origin: Vec3,
    du: Vec3,
    dv: Vec3,
    domain: Domain,
}

impl Plane {
    pub fn new(origin: Vec3, du: Vec3, dv: Vec3, domain: Domain) -> Result<Self> {
        if du.cross(&dv).norm() <= 1e-12 * du.norm() * dv.norm() {
            return Err(SweepError::InvalidSurface("plane directions are parallel".into()));
        }
        Ok(Plane { origin, du, dv, domain })
    }
}

impl ParametricSurface for Plane {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn partials(&self, u: f64, v: f64) -> Partials {
        Partials {
            point: self.origin + u * self.du + v * self.dv,
            su: self.du,
            sv: self.dv,
            suu: Vec3::zeros(),
            suv: Vec3::zeros(),
            svv: Vec3::zeros(),
        }
    }
}

/// `S = center + (-a cos u cos v, b sin u, c cos u sin v)`, poles on the y axis.
/// `u` is latitude (kept `pole_margin` away from the poles), `v` is periodic longitude.
#[derive(Debug, Clone, Copy)]
pub struct Ellipsoid {
    center: Vec3,
    radii: Vec3,
    domain: Domain,
}

pub const DEFAULT_POLE_MARGIN: f64 = 1e-3;

impl Ellipsoid {
    pub fn new(center: Vec3, radii: Vec3, pole_margin: f64) -> Result<Self> {
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(SweepError::InvalidSurface("ellipsoid radii must be positive".into()));
        }
        if !(pole_margin > 0.0 && pole_margin < 0.5 * PI) {
            return Err(SweepError::InvalidSurface("pole margin must lie in (0, π/2)".into()));
        }
        let h = 0.5 * PI - pole_margin;
        let mut domain = Domain::new([-h, h], [-PI, PI])?;
        domain.periodic_v = true;
        Ok(Ellipsoid { center, radii, domain })
    }

    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        Self::new(center, Vec3::repeat(radius), DEFAULT_POLE_MARGIN)
    }
}

impl ParametricSurface for Ellipsoid {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn partials(&self, u: f64, v: f64) -> Partials {
        let (a, b, c) = (self.radii.x, self.radii.y, self.radii.z);
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Partials {
            point: self.center + Vec3::new(-a * cu * cv, b * su, c * cu * sv),
            su: Vec3::new(a * su * cv, b * cu, -c * su * sv),
            sv: Vec3::new(a * cu * sv, 0.0, c * cu * cv),
            suu: Vec3::new(a * cu * cv, -b * su, -c * cu * sv),
            suv: Vec3::new(-a * su * sv, 0.0, -c * su * cv),
            svv: Vec3::new(a * cu * cv, 0.0, -c * cu * sv),
        }
    }
}

/// `S = center + (r cos v, u, -r sin v)`: axis along y, `u` the axial coordinate.
#[derive(Debug, Clone, Copy)]
pub struct Cylinder {
    center: Vec3,
    radius: f64,
    domain: Domain,
}

impl Cylinder {
    pub fn new(center: Vec3, radius: f64, axial: [f64; 2]) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(SweepError::InvalidSurface("cylinder radius must be positive".into()));
        }
        let mut domain = Domain::new(axial, [-PI, PI])?;
        domain.periodic_v = true;
        Ok(Cylinder { center, radius, domain })
    }
}

impl ParametricSurface for Cylinder {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn partials(&self, u: f64, v: f64) -> Partials {
        let r = self.radius;
        let (sv, cv) = v.sin_cos();
        Partials {
            point: self.center + Vec3::new(r * cv, u, -r * sv),
            su: Vec3::y(),
            sv: Vec3::new(-r * sv, 0.0, -r * cv),
            suu: Vec3::zeros(),
            suv: Vec3::zeros(),
            svv: Vec3::new(-r * cv, 0.0, r * sv),
        }
    }
}

/// `S = center + ((R + r cos u) cos v, r sin u, -(R + r cos u) sin v)`, axis along y.
#[derive(Debug, Clone, Copy)]
pub struct Torus {
    center: Vec3,
    major: f64,
    minor: f64,
    domain: Domain,
}

impl Torus {
    pub fn new(center: Vec3, major: f64, minor: f64) -> Result<Self> {
        if !(minor > 0.0 && major > minor) {
            return Err(SweepError::InvalidSurface(
                "torus needs 0 < minor radius < major radius".into(),
            ));
        }
        let mut domain = Domain::new([-PI, PI], [-PI, PI])?;
        domain.periodic_u = true;
        domain.periodic_v = true;
        Ok(Torus {
            center,
            major,
            minor,
            domain,
        })
    }
}

impl ParametricSurface for Torus {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn partials(&self, u: f64, v: f64) -> Partials {
        let (big, r) = (self.major, self.minor);
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let rho = big + r * cu;
        Partials {
            point: self.center + Vec3::new(rho * cv, r * su, -rho * sv),
            su: Vec3::new(-r * su * cv, r * cu, r * su * sv),
            sv: Vec3::new(-rho * sv, 0.0, -rho * cv),
            suu: Vec3::new(-r * cu * cv, -r * su, r * cu * sv),
            suv: Vec3::new(r * su * sv, 0.0, r * su * cv),
            svv: Vec3::new(-rho * cv, 0.0, rho * sv),
        }
    }
}

/// Tensor-product B-spline patch. Control points are stored row-major, `u` index first.
#[derive(Debug, Clone)]
pub struct BSplinePatch {
    degree_u: usize,
    degree_v: usize,
    knots_u: Vec<f64>,
    knots_v: Vec<f64>,
    n_u: usize,
    n_v: usize,
    ctrl: Vec<Vec3>,
}

impl BSplinePatch {
    pub fn new(
        degree_u: usize,
        degree_v: usize,
        knots_u: Vec<f64>,
        knots_v: Vec<f64>,
        n_u: usize,
        n_v: usize,
        ctrl: Vec<Vec3>,
    ) -> Result<Self> {
        validate_knots(&knots_u, degree_u, n_u)?;
        validate_knots(&knots_v, degree_v, n_v)?;
        if ctrl.len() != n_u * n_v {
            return Err(SweepError::InvalidSurface(format!(
                "expected {} control points, got {}",
                n_u * n_v,
                ctrl.len()
            )));
        }
        if ctrl.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(SweepError::InvalidSurface("non-finite control point".into()));
        }
        Ok(BSplinePatch {
            degree_u,
            degree_v,
            knots_u,
            knots_v,
            n_u,
            n_v,
            ctrl,
        })
    }
}

impl ParametricSurface for BSplinePatch {
    fn domain(&self) -> Domain {
        Domain {
            u: [self.knots_u[self.degree_u], self.knots_u[self.n_u]],
            v: [self.knots_v[self.degree_v], self.knots_v[self.n_v]],
            periodic_u: false,
            periodic_v: false,
        }
    }

    fn partials(&self, u: f64, v: f64) -> Partials {
        let (p, q) = (self.degree_u, self.degree_v);
        let su = find_span(&self.knots_u, p, self.n_u, u);
        let sv = find_span(&self.knots_v, q, self.n_v, v);
        let bu = basis_derivatives(&self.knots_u, p, su, u, 2);
        let bv = basis_derivatives(&self.knots_v, q, sv, v, 2);
        // d[k][l] = ∂^{k+l} S / ∂u^k ∂v^l
        let mut d = [[Vec3::zeros(); 3]; 3];
        for i in 0..=p {
            for j in 0..=q {
                let c = self.ctrl[(su - p + i) * self.n_v + (sv - q + j)];
                for k in 0..3 {
                    for l in 0..3 - k {
                        d[k][l] += c * (bu[k][i] * bv[l][j]);
                    }
                }
            }
        }
        Partials {
            point: d[0][0],
            su: d[1][0],
            sv: d[0][1],
            suu: d[2][0],
            suv: d[1][1],
            svv: d[0][2],
        }
    }
}
