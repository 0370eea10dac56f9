//! Natural cubic interpolation on strictly increasing sites.

use crate::{Result, SweepError};

/// Value, first and second derivative at a point.
pub type Jet1 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the sites
    m: Vec<f64>,
}

impl CubicSpline {
    /// C² interpolant with zero curvature at both ends. Two sites give a line.
    pub fn natural(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(SweepError::InvalidArgument(format!(
                "spline sites ({}) and values ({}) differ in length",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(SweepError::InvalidArgument("spline needs at least two sites".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SweepError::InvalidArgument(
                "spline sites must be strictly increasing".into(),
            ));
        }
        let m = natural_moments(xs, ys);
        Ok(CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    pub fn sites(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Evaluates the piece containing `x`; outside the sites the end pieces are extended.
    pub fn eval(&self, x: f64) -> Jet1 {
        let n = self.xs.len();
        let i = match self.xs[1..n - 1].iter().position(|&s| x < s) {
            Some(k) => k,
            None => n - 2,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let d2 = a * m0 + b * m1;
        [value, d1, d2]
    }
}

/// Solves the tridiagonal moment system of the natural spline (Thomas algorithm).
fn natural_moments(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        diag[j] = 2.0 * (h0 + h1);
        upper[j] = h1;
        rhs[j] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    // lower[j] = h0 of row j = upper[j-1]
    for j in 1..k {
        let w = upper[j - 1] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for j in (0..k - 1).rev() {
        m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
    }
    m
}
