//! First-order averaging around the zero-Hopf point at the origin.
//!
//! With `b = eps * beta` and the scaling `(x, y, z) = eps (X, Y, Z)`,
//! `X = u`, `Y = -sqrt(a) v`, `Z = w`, `u = r cos(theta)`,
//! `v = r sin(theta)`, the system becomes `(dr, dw)/dtheta = eps (F1, F2) +
//! O(eps^2)` with
//!
//! ```text
//! F1 = r w sin^2(theta) / sqrt(a)
//! F2 = beta |r| |sin(theta)| + c r^2 cos(theta) sin(theta) - r^2 cos^2(theta) / sqrt(a)
//! ```
//!
//! Simple zeros of the averages `F10`, `F20` seed periodic orbits of the
//! full system.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{State, SystemParams};

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const MAX_HALVINGS: usize = 20;
const MAX_RESTARTS: usize = 5;
/// Central-difference step for the Jacobian cross-check.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AveragingError {
    #[error("eps must be positive for the coordinate scaling, got {0}")]
    DegenerateScale(f64),
    #[error("a must be positive, got {0}")]
    NonPositiveA(f64),
    #[error("beta must be positive for a root with r* > 0, got {0}")]
    NonPositiveBeta(f64),
    #[error("parameter {0} is required by the averaging pipeline")]
    Missing(&'static str),
    #[error("initial guess must have r > 0")]
    BadGuess,
    #[error("node count {0} must be even and at least 8")]
    NodeCount(usize),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton iterates kept crossing r <= 0")]
    NonPositiveBranch,
}

/// Cylindrical coordinates of the averaged system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvgCoords {
    pub r: f64,
    /// In `[0, 2 pi)`.
    pub theta: f64,
    pub w: f64,
}

fn positive_a(p: &SystemParams) -> Result<f64, AveragingError> {
    if p.a > 0.0 {
        Ok(p.a)
    } else {
        Err(AveragingError::NonPositiveA(p.a))
    }
}

fn positive_eps(p: &SystemParams) -> Result<f64, AveragingError> {
    match p.eps {
        Some(e) if e > 0.0 => Ok(e),
        Some(e) => Err(AveragingError::DegenerateScale(e)),
        None => Err(AveragingError::Missing("eps")),
    }
}

fn beta_of(p: &SystemParams) -> Result<f64, AveragingError> {
    p.beta.ok_or(AveragingError::Missing("beta"))
}

pub fn to_avg_coords(s: &State, p: &SystemParams) -> Result<AvgCoords, AveragingError> {
    let eps = positive_eps(p)?;
    let a = positive_a(p)?;
    let u = s.x / eps;
    let v = -(s.y / eps) / a.sqrt();
    let w = s.z / eps;
    let r = u.hypot(v);
    let theta = if r == 0.0 { 0.0 } else { v.atan2(u).rem_euclid(TAU) };
    // rem_euclid can round up to exactly 2 pi
    let theta = if theta >= TAU { 0.0 } else { theta };
    Ok(AvgCoords { r, theta, w })
}

pub fn from_avg_coords(c: &AvgCoords, p: &SystemParams) -> Result<State, AveragingError> {
    let eps = positive_eps(p)?;
    let a = positive_a(p)?;
    let (sin, cos) = c.theta.sin_cos();
    Ok(State::new(
        eps * c.r * cos,
        -eps * a.sqrt() * c.r * sin,
        eps * c.w,
    ))
}

/// The theta-periodic right-hand side `(F1, F2)`.
pub fn f1_closed(c: &AvgCoords, p: &SystemParams) -> Result<(f64, f64), AveragingError> {
    let sa = positive_a(p)?.sqrt();
    let beta = beta_of(p)?;
    let (s, co) = c.theta.sin_cos();
    let r = c.r;
    let f1 = r * c.w * s * s / sa;
    let f2 = beta * r.abs() * s.abs() + p.c * r * r * co * s - r * r * co * co / sa;
    Ok((f1, f2))
}

/// Closed-form averages `(F10, F20)`.
pub fn averaged_closed(r: f64, w: f64, p: &SystemParams) -> Result<(f64, f64), AveragingError> {
    let sa = positive_a(p)?.sqrt();
    let beta = beta_of(p)?;
    let f10 = r * w / (2.0 * sa);
    let f20 = (4.0 * beta * sa * r.abs() - PI * r * r) / (2.0 * PI * sa);
    Ok((f10, f20))
}

// Gregory end-correction coefficients for forward/backward differences of
// order 1..=4.
const GREGORY: [f64; 4] = [1.0 / 12.0, 1.0 / 24.0, 19.0 / 720.0, 3.0 / 160.0];

/// Trapezoid rule with Gregory end corrections on `m` equal intervals of
/// `[lo, hi]`. Exact for polynomials of degree <= 4; needs `m >= 4`.
pub fn gregory_trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, m: usize) -> f64 {
    assert!(m >= 4, "need at least 4 intervals");
    let h = (hi - lo) / m as f64;
    let vals: Vec<f64> = (0..=m).map(|k| f(lo + k as f64 * h)).collect();
    let interior: f64 = vals[1..m].iter().sum();
    let mut total = 0.5 * (vals[0] + vals[m]) + interior;

    let mut fwd: Vec<f64> = vals[..5].to_vec();
    let mut bwd: Vec<f64> = vals[m - 4..].iter().rev().copied().collect();
    for (order, coef) in GREGORY.iter().enumerate() {
        for i in 0..fwd.len() - 1 {
            fwd[i] = fwd[i + 1] - fwd[i];
            bwd[i] -= bwd[i + 1];
        }
        fwd.pop();
        bwd.pop();
        // odd-order differences enter as (backward - forward)
        let end = if order % 2 == 0 { bwd[0] - fwd[0] } else { fwd[0] + bwd[0] };
        total -= coef * end;
    }
    total * h
}

/// Numerical average of [`f1_closed`] over one period. The period is split
/// at `theta = pi`, where `|sin(theta)|` has a kink; each half uses `n / 2`
/// intervals.
pub fn averaged_numeric(r: f64, w: f64, p: &SystemParams, n: usize) -> Result<(f64, f64), AveragingError> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(AveragingError::NodeCount(n));
    }
    positive_a(p)?;
    beta_of(p)?;
    let m = n / 2;
    let component = |idx: usize| {
        let f = |theta: f64| {
            let (f1, f2) = f1_closed(&AvgCoords { r, theta, w }, p).expect("validated");
            if idx == 0 {
                f1
            } else {
                f2
            }
        };
        (gregory_trapezoid(f, 0.0, PI, m) + gregory_trapezoid(f, PI, TAU, m)) / TAU
    };
    Ok((component(0), component(1)))
}

/// Analytic Jacobian of `(F10, F20)` with respect to `(r, w)`.
pub fn averaged_jacobian(r: f64, w: f64, p: &SystemParams) -> Result<[[f64; 2]; 2], AveragingError> {
    let sa = positive_a(p)?.sqrt();
    let beta = beta_of(p)?;
    let sign = if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    };
    Ok([
        [w / (2.0 * sa), r / (2.0 * sa)],
        [(4.0 * beta * sa * sign - 2.0 * PI * r) / (2.0 * PI * sa), 0.0],
    ])
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Eigenvalues of a real 2x2 matrix; a complex pair is returned with the
/// positive imaginary part first.
pub fn eig2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let disc = half_tr * half_tr - det2(m);
    if disc >= 0.0 {
        let s = disc.sqrt();
        // avoid cancellation in the smaller root
        let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
        let det = det2(m);
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half_tr, s), Complex64::new(half_tr, -s)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedRoot {
    pub r_star: f64,
    pub w_star: f64,
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub eigenvalues: [Complex64; 2],
    /// `det != 0`, the hypothesis of the averaging theorem.
    pub degree_nonzero: bool,
    pub residual: f64,
    pub iterations: usize,
}

fn norm2(v: (f64, f64)) -> f64 {
    v.0.hypot(v.1)
}

/// Every point `(0, w)` is a zero of `(F10, F20)`; that line is the
/// equilibrium itself. Newton therefore runs on the deflated map
/// `G = F / r`, whose zeros with `r > 0` are exactly the nontrivial zeros
/// of `F`.
type ValueAndJacobian = ((f64, f64), [[f64; 2]; 2]);

fn deflated(r: f64, w: f64, p: &SystemParams) -> Result<ValueAndJacobian, AveragingError> {
    let f = averaged_closed(r, w, p)?;
    let j = averaged_jacobian(r, w, p)?;
    let g = (f.0 / r, f.1 / r);
    let r2 = r * r;
    let jg = [
        [j[0][0] / r - f.0 / r2, j[0][1] / r],
        [j[1][0] / r - f.1 / r2, j[1][1] / r],
    ];
    Ok((g, jg))
}

/// Damped Newton on `(F10, F20) = 0` from `guess = (r, w)`, converging to
/// the root with `r > 0`.
pub fn find_root(p: &SystemParams, guess: (f64, f64)) -> Result<AveragedRoot, AveragingError> {
    positive_a(p)?;
    let beta = beta_of(p)?;
    if !(beta > 0.0) {
        return Err(AveragingError::NonPositiveBeta(beta));
    }
    if !(guess.0 > 0.0) || !guess.1.is_finite() {
        return Err(AveragingError::BadGuess);
    }
    let (mut r, mut w) = guess;
    let mut restarts = 0;
    for iter in 0..NEWTON_MAX_ITER {
        let residual = norm2(averaged_closed(r, w, p)?);
        if residual <= NEWTON_TOL {
            return finish_root(r, w, p, iter);
        }
        let (g, j) = deflated(r, w, p)?;
        let d = det2(&j);
        if d == 0.0 || !d.is_finite() {
            return Err(AveragingError::NoConvergence { iterations: iter, residual });
        }
        let dr = -(j[1][1] * g.0 - j[0][1] * g.1) / d;
        let dw = -(-j[1][0] * g.0 + j[0][0] * g.1) / d;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let (rt, wt) = (r + lambda * dr, w + lambda * dw);
            if rt <= 0.0 {
                accepted = Some((rt, wt));
                break;
            }
            if norm2(deflated(rt, wt, p)?.0) < norm2(g) {
                accepted = Some((rt, wt));
                break;
            }
            lambda *= 0.5;
        }
        let Some((rt, wt)) = accepted else {
            return Err(AveragingError::NoConvergence { iterations: iter, residual });
        };
        if rt <= 0.0 {
            // |r| makes the map kinked at r = 0; restart on the positive side
            restarts += 1;
            if restarts > MAX_RESTARTS || rt == 0.0 {
                return Err(AveragingError::NonPositiveBranch);
            }
        }
        r = rt.abs();
        w = wt;
    }
    let residual = norm2(averaged_closed(r, w, p)?);
    if residual <= NEWTON_TOL {
        return finish_root(r, w, p, NEWTON_MAX_ITER);
    }
    Err(AveragingError::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

fn finish_root(r: f64, w: f64, p: &SystemParams, iterations: usize) -> Result<AveragedRoot, AveragingError> {
    let jac = averaged_jacobian(r, w, p)?;
    let det = det2(&jac);
    Ok(AveragedRoot {
        r_star: r,
        w_star: w,
        jac,
        det,
        eigenvalues: eig2(&jac),
        degree_nonzero: det != 0.0,
        residual: norm2(averaged_closed(r, w, p)?),
        iterations,
    })
}

/// Closed-form root `(4 beta sqrt(a) / pi, 0)`.
pub fn root_closed_form(p: &SystemParams) -> Result<(f64, f64), AveragingError> {
    let sa = positive_a(p)?.sqrt();
    Ok((4.0 * beta_of(p)? * sa / PI, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    pub eigenvalues: [Complex64; 2],
    /// No eigenvalue on the imaginary axis.
    pub hyperbolic: bool,
    /// `|det| = 4 beta^2 / pi^2` to 1e-10 relative.
    pub claim_magnitude_match: bool,
    /// Published determinant `-4 beta^2 / pi^2`.
    pub claimed_det: f64,
    /// Published eigenvalues `+-2 beta / pi`.
    pub claimed_eigenvalues: [f64; 2],
    pub fd_jacobian: [[f64; 2]; 2],
    pub fd_max_deviation: f64,
    pub fd_agrees: bool,
}

/// Central-difference Jacobian of [`averaged_closed`].
pub fn averaged_jacobian_fd(r: f64, w: f64, p: &SystemParams, step: f64) -> Result<[[f64; 2]; 2], AveragingError> {
    let (fr_p, fr_m) = (averaged_closed(r + step, w, p)?, averaged_closed(r - step, w, p)?);
    let (fw_p, fw_m) = (averaged_closed(r, w + step, p)?, averaged_closed(r, w - step, p)?);
    let inv = 0.5 / step;
    Ok([
        [(fr_p.0 - fr_m.0) * inv, (fw_p.0 - fw_m.0) * inv],
        [(fr_p.1 - fr_m.1) * inv, (fw_p.1 - fw_m.1) * inv],
    ])
}

pub fn stability(root: &AveragedRoot, p: &SystemParams) -> Result<StabilityReport, AveragingError> {
    let beta = beta_of(p)?;
    let jac = averaged_jacobian(root.r_star, root.w_star, p)?;
    let det = det2(&jac);
    let eigenvalues = eig2(&jac);
    let scale = eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::max);
    let hyperbolic = eigenvalues.iter().all(|l| l.re.abs() > 1e-9 * scale);
    let claimed = 4.0 * beta * beta / (PI * PI);
    let fd = averaged_jacobian_fd(root.r_star, root.w_star, p, FD_STEP)?;
    let fd_max_deviation = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (fd[i][j] - jac[i][j]).abs())
        .fold(0.0, f64::max);
    Ok(StabilityReport {
        jacobian: jac,
        det,
        eigenvalues,
        hyperbolic,
        claim_magnitude_match: (det.abs() - claimed).abs() <= 1e-10 * claimed,
        claimed_det: -claimed,
        claimed_eigenvalues: [2.0 * beta / PI, -2.0 * beta / PI],
        fd_jacobian: fd,
        fd_max_deviation,
        fd_agrees: fd_max_deviation <= 1e-6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleSeed {
    pub state: State,
    /// `2 pi / sqrt(a)`, the period of the linear center.
    pub period_estimate: f64,
    pub root: (f64, f64),
}

/// Initial point `(eps r*, 0, eps w*)` of the predicted cycle.
pub fn predict_cycle_seed(p: &SystemParams) -> Result<CycleSeed, AveragingError> {
    positive_eps(p)?;
    let a = positive_a(p)?;
    let guess = root_closed_form(p)?;
    let guess = (if guess.0 > 0.0 { guess.0 } else { 1.0 }, 1.0);
    let root = find_root(p, guess)?;
    let coords = AvgCoords {
        r: root.r_star,
        theta: 0.0,
        w: root.w_star,
    };
    Ok(CycleSeed {
        state: from_avg_coords(&coords, p)?,
        period_estimate: TAU / a.sqrt(),
        root: (root.r_star, root.w_star),
    })
}
