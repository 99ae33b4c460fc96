//! Periodic orbits of the full system by shooting on the Poincaré section
//! `{y = 0, x > 0, dy/dt < 0}`.
//!
//! The section is where the averaged angle `theta` vanishes, so the seed
//! `(eps r*, 0, eps w*)` from [`crate::averaging::predict_cycle_seed`] lies
//! on it. Section points are `(x, z)` pairs. The return-map Jacobian is
//! taken by central differences of the return map itself: `|y|` makes the
//! variational flow jump at every crossing, while the return map is smooth.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::averaging::{det2, eig2};
use crate::dynamics::{DynamicsError, Integrator, Mode, State, SystemParams, Trajectory};

/// Integrator tolerance used for shooting; the smallest the integrator
/// accepts.
pub const SHOOTING_TOL: f64 = 1e-13;
pub const MAX_NEWTON_ITER: usize = 25;
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("section point must have x > 0, got x = {0}")]
    OffSection(f64),
    #[error("a must be positive for the section to be transversal, got {0}")]
    NonPositiveA(f64),
    #[error("eps must be positive, got {0}")]
    DegenerateScale(f64),
    #[error("orbit escaped at t = {t}")]
    Escape { t: f64 },
    #[error("no return to the section within t = {t_max}")]
    NoReturn { t_max: f64 },
    #[error("shooting did not converge; best residual {:e}", best.residual)]
    NoConvergence { best: Box<CycleResult> },
    #[error("I - DP is singular (condition number {0:e})")]
    SingularJacobian(f64),
    #[error("cycle has not converged")]
    NotConverged,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Return {
    /// `(x, z)` at the next crossing of the section.
    pub point: [f64; 2],
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleResult {
    pub section_point: [f64; 2],
    pub period: f64,
    /// `|P(q) - q|` at `section_point`.
    pub residual: f64,
    /// Finite-difference return-map Jacobian at `section_point`.
    pub jacobian: [[f64; 2]; 2],
    pub multipliers: [Complex64; 2],
    pub converged: bool,
    pub iterations: usize,
}

fn check_a(p: &SystemParams) -> Result<f64, CycleError> {
    if p.a > 0.0 {
        Ok(p.a)
    } else {
        Err(CycleError::NonPositiveA(p.a))
    }
}

fn map_dynamics(e: DynamicsError) -> CycleError {
    match e {
        DynamicsError::NonFinite { t } => CycleError::Escape { t },
        other => CycleError::Dynamics(other),
    }
}

/// Follows the full system from `(x, 0, z)` to its next crossing of the
/// section.
pub fn poincare_return(q: [f64; 2], p: &SystemParams, tol: f64) -> Result<Return, CycleError> {
    let a = check_a(p)?;
    if !(q[0] > 0.0) {
        return Err(CycleError::OffSection(q[0]));
    }
    let t_max = 10.0 * TAU / a.sqrt();
    let start = State::new(q[0], 0.0, q[1]);
    let mut integ = Integrator::new(&start, p, Mode::Full, tol).map_err(map_dynamics)?;
    loop {
        let step = integ.step(t_max).map_err(map_dynamics)?;
        if let Some(c) = step.crossing {
            if c.direction < 0 && c.state.x > 0.0 {
                return Ok(Return {
                    point: [c.state.x, c.state.z],
                    elapsed: c.state.t,
                });
            }
        }
        if step.state.t >= t_max {
            return Err(CycleError::NoReturn { t_max });
        }
    }
}

fn fd_step(q: [f64; 2]) -> f64 {
    (1e-3 * q[0].hypot(q[1])).max(1e-7)
}

/// Central-difference Jacobian of the return map at `q`.
pub fn return_map_jacobian(q: [f64; 2], p: &SystemParams, tol: f64) -> Result<[[f64; 2]; 2], CycleError> {
    let h = fd_step(q);
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let mut plus = q;
        let mut minus = q;
        plus[j] += h;
        minus[j] -= h;
        let fp = poincare_return(plus, p, tol)?.point;
        let fm = poincare_return(minus, p, tol)?.point;
        for i in 0..2 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn condition_2x2(m: &[[f64; 2]; 2]) -> f64 {
    // singular values from the eigenvalues of m^T m
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let mean = 0.5 * (a + d);
    let dev = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let smax = (mean + dev).sqrt();
    let smin = (mean - dev).max(0.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn converged_threshold(q: [f64; 2]) -> f64 {
    1e-10 * norm(q).max(1.0)
}

/// Newton iteration on `G(q) = P(q) - q`.
pub fn refine_cycle(seed: [f64; 2], p: &SystemParams, tol: f64) -> Result<CycleResult, CycleError> {
    if let Some(eps) = p.eps {
        if !(eps > 0.0) {
            return Err(CycleError::DegenerateScale(eps));
        }
    }
    let mut q = seed;
    let mut ret = poincare_return(q, p, tol)?;
    let mut g = [ret.point[0] - q[0], ret.point[1] - q[1]];
    let mut best = (q, ret, norm(g));
    let mut iterations = 0;
    while norm(g) > converged_threshold(q) {
        if iterations == MAX_NEWTON_ITER {
            let (bq, bret, bres) = best;
            let jacobian = return_map_jacobian(bq, p, tol)?;
            return Err(CycleError::NoConvergence {
                best: Box::new(CycleResult {
                    section_point: bq,
                    period: bret.elapsed,
                    residual: bres,
                    jacobian,
                    multipliers: eig2(&jacobian),
                    converged: false,
                    iterations,
                }),
            });
        }
        iterations += 1;
        let dp = return_map_jacobian(q, p, tol)?;
        let m = [[dp[0][0] - 1.0, dp[0][1]], [dp[1][0], dp[1][1] - 1.0]];
        let cond = condition_2x2(&m);
        if cond > MAX_CONDITION {
            return Err(CycleError::SingularJacobian(cond));
        }
        let d = det2(&m);
        let dx = -(m[1][1] * g[0] - m[0][1] * g[1]) / d;
        let dz = -(-m[1][0] * g[0] + m[0][0] * g[1]) / d;

        let mut lambda = 1.0;
        let mut next = None;
        for _ in 0..10 {
            let trial = [q[0] + lambda * dx, q[1] + lambda * dz];
            if trial[0] > 0.0 {
                if let Ok(r) = poincare_return(trial, p, tol) {
                    let gt = [r.point[0] - trial[0], r.point[1] - trial[1]];
                    if norm(gt) < norm(g) {
                        next = Some((trial, r, gt));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((nq, nret, ng)) = next else {
            // no decrease along the Newton direction: stop at the best iterate
            iterations = MAX_NEWTON_ITER;
            continue;
        };
        q = nq;
        ret = nret;
        g = ng;
        if norm(g) < best.2 {
            best = (q, ret, norm(g));
        }
    }
    let jacobian = return_map_jacobian(q, p, tol)?;
    Ok(CycleResult {
        section_point: q,
        period: ret.elapsed,
        residual: norm(g),
        jacobian,
        multipliers: eig2(&jacobian),
        converged: true,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unstable,
    Stable,
    /// All multipliers within `tol_f` of the unit circle.
    Marginal,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::Unstable => "unstable",
            Verdict::Stable => "stable",
            Verdict::Marginal => "marginal at this eps, first-order inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetReport {
    pub multipliers: [Complex64; 2],
    pub moduli: [f64; 2],
    pub tol_f: f64,
    pub verdict: Verdict,
    pub verdict_text: &'static str,
    /// The stability asserted for this cycle in the literature.
    pub claimed: &'static str,
    pub agrees_with_claim: bool,
}

/// Classifies multipliers with the band `1 +- tol_f` around the unit circle.
pub fn classify_multipliers(multipliers: &[Complex64; 2], tol_f: f64) -> Verdict {
    let moduli = multipliers.map(|m| m.norm());
    if moduli.iter().any(|&r| r > 1.0 + tol_f) {
        Verdict::Unstable
    } else if moduli.iter().all(|&r| r < 1.0 - tol_f) {
        Verdict::Stable
    } else {
        Verdict::Marginal
    }
}

/// Multipliers of a converged cycle with the band `tol_f = 10 eps^2`.
pub fn floquet(c: &CycleResult, p: &SystemParams) -> Result<FloquetReport, CycleError> {
    if !c.converged {
        return Err(CycleError::NotConverged);
    }
    let eps = p.eps.unwrap_or(0.0);
    let tol_f = 10.0 * eps * eps;
    let verdict = classify_multipliers(&c.multipliers, tol_f);
    Ok(FloquetReport {
        multipliers: c.multipliers,
        moduli: c.multipliers.map(|m| m.norm()),
        tol_f,
        verdict,
        verdict_text: verdict.describe(),
        claimed: "unstable",
        agrees_with_claim: verdict == Verdict::Unstable,
    })
}

/// One period of the refined orbit, for export.
pub fn cycle_orbit(c: &CycleResult, p: &SystemParams, tol: f64) -> Result<Trajectory, CycleError> {
    let s0 = State::new(c.section_point[0], 0.0, c.section_point[1]);
    crate::dynamics::integrate(&s0, p, Mode::Full, c.period, tol).map_err(map_dynamics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::predict_cycle_seed;

    fn desk() -> SystemParams {
        SystemParams::perturbed(2.5, 9.0, 1e-3, 2.0)
    }

    #[test]
    fn return_requires_section_point() {
        assert_eq!(
            poincare_return([-1e-3, 0.0], &desk(), SHOOTING_TOL),
            Err(CycleError::OffSection(-1e-3))
        );
        assert_eq!(
            poincare_return([0.0, 0.0], &desk(), SHOOTING_TOL),
            Err(CycleError::OffSection(0.0))
        );
        let p = SystemParams::new(-1.0, 0.0, 0.0);
        assert_eq!(poincare_return([1.0, 0.0], &p, SHOOTING_TOL), Err(CycleError::NonPositiveA(-1.0)));
    }

    #[test]
    fn seed_nearly_returns_to_itself() {
        let p = desk();
        let seed = predict_cycle_seed(&p).unwrap();
        let q = [seed.state.x, seed.state.z];
        let ret = poincare_return(q, &p, SHOOTING_TOL).unwrap();
        let dist = norm([ret.point[0] - q[0], ret.point[1] - q[1]]);
        assert!(dist < 1e-5, "return distance {dist:e}");
        assert!((ret.elapsed - seed.period_estimate).abs() < 0.01 * seed.period_estimate);
    }

    #[test]
    fn identity_map_has_unit_multipliers() {
        let m = eig2(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m, [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(classify_multipliers(&m, 1e-5), Verdict::Marginal);
    }

    #[test]
    fn classification_bands() {
        let c = |r: f64| [Complex64::new(r, 0.0), Complex64::new(0.5, 0.0)];
        assert_eq!(classify_multipliers(&c(1.1), 1e-3), Verdict::Unstable);
        assert_eq!(classify_multipliers(&c(0.9), 1e-3), Verdict::Stable);
        assert_eq!(classify_multipliers(&c(1.0005), 1e-3), Verdict::Marginal);
    }

    #[test]
    fn floquet_needs_converged_cycle() {
        let c = CycleResult {
            section_point: [1.0, 0.0],
            period: 1.0,
            residual: 1.0,
            jacobian: [[1.0, 0.0], [0.0, 1.0]],
            multipliers: [Complex64::new(1.0, 0.0); 2],
            converged: false,
            iterations: 0,
        };
        assert_eq!(floquet(&c, &desk()), Err(CycleError::NotConverged));
    }

    #[test]
    fn zero_eps_is_rejected() {
        let p = SystemParams::perturbed(2.5, 9.0, 0.0, 2.0);
        assert_eq!(refine_cycle([1e-3, 0.0], &p, SHOOTING_TOL), Err(CycleError::DegenerateScale(0.0)));
    }

    #[test]
    fn condition_number_of_rotation_is_one() {
        let (s, c) = 0.3f64.sin_cos();
        assert!((condition_2x2(&[[c, -s], [s, c]]) - 1.0).abs() < 1e-12);
        assert_eq!(condition_2x2(&[[1.0, 2.0], [2.0, 4.0]]), f64::INFINITY);
    }
}
