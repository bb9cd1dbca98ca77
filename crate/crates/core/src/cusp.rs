//! Flat-cusp profile construction by quadrature.
//!
//! From boundary observable traces v_plus, v_minus on a cusp of flatness
//! beta > 2 (tail index alpha = beta/(beta-1)), the associated profile is
//!
//!   P(t) = (1/2) int_0^{t pi} { v_plus(theta) + v_minus(pi - theta) }
//!          (sin theta)^{1/alpha} dtheta,
//!
//! normalized so |P(1)| = 1. The theta variable is rescaled to t = theta/pi;
//! the integrand vanishes at both endpoints, so composite trapezoid
//! quadrature converges at its usual second order.

use crate::error::{Error, Result};
use crate::paths::{norm, Path, PolylinePath, Profile};

const DEGENERATE_TOL: f64 = 1e-8;

/// Tabulated cusp traces on a common theta grid over [0, pi].
#[derive(Debug, Clone, PartialEq)]
pub struct CuspData {
    alpha: f64,
    dim: usize,
    /// theta grid, strictly increasing from 0 to pi.
    thetas: Vec<f64>,
    v_plus: Vec<Vec<f64>>,
    v_minus: Vec<Vec<f64>>,
}

impl CuspData {
    pub fn new(
        beta: f64,
        thetas: Vec<f64>,
        v_plus: Vec<Vec<f64>>,
        v_minus: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(beta > 2.0) {
            return Err(Error::domain("cusp flatness beta must exceed 2"));
        }
        if thetas.len() < 2
            || thetas[0] != 0.0
            || (thetas.last().unwrap() - std::f64::consts::PI).abs() > 1e-12
        {
            return Err(Error::domain("theta grid must span [0, pi]"));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("theta grid must be strictly increasing"));
        }
        if v_plus.len() != thetas.len() || v_minus.len() != thetas.len() {
            return Err(Error::domain("traces must match the theta grid"));
        }
        let dim = v_plus[0].len();
        if v_plus.iter().chain(&v_minus).any(|v| v.len() != dim) {
            return Err(Error::domain("trace components must have equal dim"));
        }
        Ok(CuspData {
            alpha: beta / (beta - 1.0),
            dim,
            thetas,
            v_plus,
            v_minus,
        })
    }

    /// Scalar traces given as closures, tabulated on a uniform grid.
    pub fn from_fns(
        beta: f64,
        grid: usize,
        v_plus: impl Fn(f64) -> f64,
        v_minus: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let thetas: Vec<f64> = (0..=grid)
            .map(|i| i as f64 * std::f64::consts::PI / grid as f64)
            .collect();
        let vp = thetas.iter().map(|&t| vec![v_plus(t)]).collect();
        let vm = thetas.iter().map(|&t| vec![v_minus(t)]).collect();
        CuspData::new(beta, thetas, vp, vm)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn interp(&self, table: &[Vec<f64>], theta: f64) -> Vec<f64> {
        let theta = theta.clamp(0.0, std::f64::consts::PI);
        let i = self
            .thetas
            .partition_point(|t| *t <= theta)
            .clamp(1, self.thetas.len() - 1);
        let (t0, t1) = (self.thetas[i - 1], self.thetas[i]);
        let w = (theta - t0) / (t1 - t0);
        table[i - 1]
            .iter()
            .zip(&table[i])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Integrand (1/2){v_plus(theta) + v_minus(pi - theta)}(sin theta)^{1/alpha}.
    fn integrand(&self, theta: f64) -> Vec<f64> {
        let w = theta.sin().max(0.0).powf(1.0 / self.alpha);
        let vp = self.interp(&self.v_plus, theta);
        let vm = self.interp(&self.v_minus, std::f64::consts::PI - theta);
        vp.iter().zip(&vm).map(|(a, b)| 0.5 * (a + b) * w).collect()
    }
}

fn cumulative_trapezoid(data: &CuspData, m: usize) -> Vec<(f64, Vec<f64>)> {
    let h = std::f64::consts::PI / m as f64;
    let mut acc = vec![0.0; data.dim];
    let mut prev = data.integrand(0.0);
    let mut out = Vec::with_capacity(m + 1);
    out.push((0.0, acc.clone()));
    for i in 1..=m {
        let theta = i as f64 * h;
        let cur = data.integrand(theta);
        for k in 0..data.dim {
            acc[k] += 0.5 * h * (prev[k] + cur[k]);
        }
        out.push((theta / std::f64::consts::PI, acc.clone()));
        prev = cur;
    }
    out
}

/// Profile by m-panel composite trapezoid quadrature, normalized to
/// |P(1)| = 1.
pub fn cusp_profile(data: &CuspData, m: usize) -> Result<Profile> {
    Ok(cusp_profile_with_tol(data, m)?.0)
}

/// As [`cusp_profile`], also returning a classifier tolerance derived from
/// the m vs 2m quadrature difference.
pub fn cusp_profile_with_tol(data: &CuspData, m: usize) -> Result<(Profile, f64)> {
    if m < 8 {
        return Err(Error::domain("quadrature needs at least 8 panels"));
    }
    let coarse = cumulative_trapezoid(data, m);
    let fine = cumulative_trapezoid(data, 2 * m);
    let p1 = fine.last().unwrap().1.clone();
    let scale = norm(&p1);
    if scale < DEGENERATE_TOL {
        return Err(Error::DegenerateProfile { norm: scale });
    }
    // sup difference between the two quadrature levels, after normalization
    let mut quad_err: f64 = 0.0;
    for (c, f) in coarse.iter().zip(fine.iter().step_by(2)) {
        let d: f64 = c
            .1
            .iter()
            .zip(&f.1)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        quad_err = quad_err.max(d / scale);
    }
    let bps: Vec<(f64, Vec<f64>)> = fine
        .into_iter()
        .map(|(t, v)| (t, v.iter().map(|x| x / scale).collect()))
        .collect();
    let profile = Profile::new(Path::Polyline(PolylinePath::new(data.dim, bps)?))?;
    let tol = (2.0 * quad_err).max(1e-9);
    Ok((profile, tol))
}

/// The three canonical trace families used for the classifier checks, in
/// label order (monotone / dipping / late-negative).
pub fn canonical_traces(beta: f64, grid: usize) -> Result<[CuspData; 3]> {
    // (a) constant positive sign: monotone profile.
    let a = CuspData::from_fns(beta, grid, |_| 1.0, |_| 1.0)?;
    // (b) symmetric sign change cos(2 theta) + 0.55: the profile dips but
    // stays inside the segment [0, P(1)].
    let b = CuspData::from_fns(beta, grid, |t| (2.0 * t).cos() + 0.55, |_| 0.0)?;
    // (c) heavy late negative mass: the running integral exceeds its final
    // value, leaving the segment.
    let c = CuspData::from_fns(beta, grid, |t| {
        1.0 - 5.0 * (t / std::f64::consts::PI).powi(6)
    }, |_| 0.0)?;
    Ok([a, b, c])
}
