//! B-spline basis functions and their derivatives (Cox-de Boor recursion).

use crate::{Result, SweepError};

/// Knot span index `i` with `knots[i] <= x < knots[i+1]`, clamped to the valid range.
pub fn find_span(knots: &[f64], degree: usize, n_ctrl: usize, x: f64) -> usize {
    let n = n_ctrl - 1;
    if x >= knots[n + 1] {
        return n;
    }
    if x <= knots[degree] {
        return degree;
    }
    let (mut lo, mut hi) = (degree, n + 1);
    let mut mid = (lo + hi) / 2;
    while x < knots[mid] || x >= knots[mid + 1] {
        if x < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
        mid = (lo + hi) / 2;
    }
    mid
}

/// Nonzero basis functions on `span` and their derivatives up to `nders`.
/// `out[k][j]` is the k-th derivative of `N_{span-degree+j}`.
pub fn basis_derivatives(knots: &[f64], degree: usize, span: usize, x: f64, nders: usize) -> Vec<Vec<f64>> {
    let p = degree;
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; nders + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nders.min(p) {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=nders.min(p) {
        for j in 0..=p {
            ders[k][j] *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Checks a knot vector for `n_ctrl` control points of the given degree.
pub fn validate_knots(knots: &[f64], degree: usize, n_ctrl: usize) -> Result<()> {
    if degree == 0 {
        return Err(SweepError::InvalidSurface("spline degree must be positive".into()));
    }
    if n_ctrl <= degree {
        return Err(SweepError::InvalidSurface(format!(
            "degree {degree} needs more than {degree} control points, got {n_ctrl}"
        )));
    }
    if knots.len() != n_ctrl + degree + 1 {
        return Err(SweepError::InvalidSurface(format!(
            "expected {} knots, got {}",
            n_ctrl + degree + 1,
            knots.len()
        )));
    }
    if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(SweepError::InvalidSurface(
            "knots must be finite and non-decreasing".into(),
        ));
    }
    if !(knots[n_ctrl] > knots[degree]) {
        return Err(SweepError::InvalidSurface("spline parameter range is empty".into()));
    }
    Ok(())
}

/// Clamped uniform knot vector on [0, 1].
pub fn clamped_uniform_knots(degree: usize, n_ctrl: usize) -> Vec<f64> {
    let inner = n_ctrl - degree;
    let mut knots = vec![0.0; degree + 1];
    for i in 1..inner {
        knots.push(i as f64 / inner as f64);
    }
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    knots
}
