//! Right-hand side and adaptive integration of the piecewise-smooth system,
//! with bookkeeping of the crossings of the switching plane `y = 0`.
//!
//! The integrator is the Dormand-Prince 5(4) pair with local extrapolation.
//! The field is only continuous across `y = 0`, so no accepted step is
//! allowed to straddle the plane: when the sign of `y` changes inside a step,
//! the step is shortened to end on the crossing, which is refined to
//! `|y| <= CROSSING_TOL`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::darboux::Branch;

/// Crossing refinement target for `|y|`.
pub const CROSSING_TOL: f64 = 1e-12;
/// States with a component beyond this magnitude are treated as escaped.
pub const ESCAPE_RADIUS: f64 = 1e8;
pub const DEFAULT_TOL: f64 = 1e-10;
const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("required step {h:e} at t = {t} is below the minimum step")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state left the finite range at t = {t}")]
    NonFinite { t: f64 },
    #[error("tolerance {0:e} outside [1e-13, 1e-3]")]
    Tolerance(f64),
    #[error("end time {t_end} is not after start time {t0}")]
    TimeSpan { t0: f64, t_end: f64 },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("step budget exhausted at t = {t}")]
    StepBudget { t: f64 },
}

/// Parameters `a, b, c`, optionally with the perturbation scale `eps` and
/// `beta`, in which case `b = eps * beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl SystemParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        SystemParams {
            a,
            b,
            c,
            eps: None,
            beta: None,
        }
    }

    /// Parameters with `b = eps * beta`.
    pub fn perturbed(a: f64, c: f64, eps: f64, beta: f64) -> Self {
        SystemParams {
            a,
            b: eps * beta,
            c,
            eps: Some(eps),
            beta: Some(beta),
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if ![self.a, self.b, self.c].iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::Params("a, b, c must be finite".into()));
        }
        match (self.eps, self.beta) {
            (None, None) => Ok(()),
            (Some(eps), Some(beta)) => {
                if !eps.is_finite() || !beta.is_finite() || eps < 0.0 {
                    return Err(DynamicsError::Params("eps must be >= 0 and beta finite".into()));
                }
                if self.b != eps * beta {
                    return Err(DynamicsError::Params(format!(
                        "b = {} but eps * beta = {}",
                        self.b,
                        eps * beta
                    )));
                }
                Ok(())
            }
            _ => Err(DynamicsError::Params("eps and beta must be given together".into())),
        }
    }
}

/// Whether `|y|` is evaluated as such or replaced by `sigma * y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Full,
    Branch(Branch),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl State {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        State { x, y, z, t: 0.0 }
    }

    pub fn at(x: f64, y: f64, z: f64, t: f64) -> Self {
        State { x, y, z, t }
    }

    pub fn point(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn from_point(v: [f64; 3], t: f64) -> Self {
        State::at(v[0], v[1], v[2], t)
    }

    pub fn is_finite(&self) -> bool {
        self.point().iter().all(|v| v.is_finite()) && self.t.is_finite()
    }
}

fn field(v: [f64; 3], p: &SystemParams, mode: Mode) -> [f64; 3] {
    let [x, y, z] = v;
    let abs_y = match mode {
        Mode::Full => y.abs(),
        Mode::Branch(br) => br.sigma() as f64 * y,
    };
    [y, -p.a * x + y * z, p.b * abs_y - p.c * x * y - x * x]
}

pub fn rhs(s: &State, p: &SystemParams, mode: Mode) -> [f64; 3] {
    field(s.point(), p, mode)
}

/// Analytic Jacobian of the right-hand side. In full mode the derivative of
/// `|y|` at `y = 0` is taken as 0.
pub fn jacobian(s: &State, p: &SystemParams, mode: Mode) -> [[f64; 3]; 3] {
    let (x, y, z) = (s.x, s.y, s.z);
    let d_abs = match mode {
        Mode::Full => {
            if y > 0.0 {
                1.0
            } else if y < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
        Mode::Branch(br) => br.sigma() as f64,
    };
    [
        [0.0, 1.0, 0.0],
        [-p.a, z, y],
        [-p.c * y - 2.0 * x, p.b * d_abs - p.c * x, 0.0],
    ]
}

/// Trace of [`jacobian`]; equals `z` wherever the field is differentiable.
pub fn divergence(s: &State, p: &SystemParams, mode: Mode) -> f64 {
    let j = jacobian(s, p, mode);
    j[0][0] + j[1][1] + j[2][2]
}

/// The system is invariant under `(x, y, z) -> (-x, -y, z)`.
pub fn symmetry_image(s: &State) -> State {
    State::at(-s.x, -s.y, s.z, s.t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumCheck {
    pub passed: bool,
    /// Points whose right-hand side is not exactly zero, with that value.
    pub failures: Vec<([f64; 3], [f64; 3])>,
}

pub fn check_equilibria(p: &SystemParams, points: &[[f64; 3]]) -> EquilibriumCheck {
    let failures: Vec<_> = points
        .iter()
        .map(|&v| (v, field(v, p, Mode::Full)))
        .filter(|(_, f)| f.iter().any(|c| *c != 0.0))
        .collect();
    EquilibriumCheck {
        passed: failures.is_empty(),
        failures,
    }
}

/// Checks that `(0, 0, z0)` is an exact equilibrium for every sample.
pub fn check_equilibrium_line(p: &SystemParams, z_samples: &[f64]) -> EquilibriumCheck {
    let points: Vec<[f64; 3]> = z_samples.iter().map(|&z| [0.0, 0.0, z]).collect();
    check_equilibria(p, &points)
}

/// A transversal passage through `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub state: State,
    /// Sign of `y` after the crossing: `-1` for `+ -> -`, `+1` for `- -> +`.
    pub direction: i8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub crossings: Vec<Crossing>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.samples.last().expect("trajectory has at least the initial state")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y", "z"])?;
        for s in &self.samples {
            w.write_record([s.t, s.x, s.y, s.z].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_crossings_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "z"])?;
        for c in &self.crossings {
            let s = c.state;
            w.write_record([s.t, s.x, s.z].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th and 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct StepResult {
    y: [f64; 3],
    k_last: [f64; 3],
    err: [f64; 3],
}

fn dp_step(v: [f64; 3], k1: [f64; 3], h: f64, p: &SystemParams, mode: Mode) -> StepResult {
    let mut k = [[0.0; 3]; 7];
    k[0] = k1;
    for s in 1..7 {
        let mut arg = v;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..3 {
                    arg[i] += h * a * kj[i];
                }
            }
        }
        k[s] = field(arg, p, mode);
    }
    // stage 7 is evaluated at the 5th order solution (FSAL)
    let mut y = v;
    for i in 0..3 {
        let mut acc = 0.0;
        for s in 0..6 {
            acc += A[6][s] * k[s][i];
        }
        y[i] += h * acc;
    }
    let mut err = [0.0; 3];
    for (i, e) in err.iter_mut().enumerate() {
        *e = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
    }
    StepResult { y, k_last: k[6], err }
}

fn side_of(v: [f64; 3], p: &SystemParams) -> i8 {
    if v[1] > 0.0 {
        1
    } else if v[1] < 0.0 {
        -1
    } else {
        // on the plane: the side the flow is heading to
        let dy = -p.a * v[0] + v[1] * v[2];
        if dy < 0.0 {
            -1
        } else {
            1
        }
    }
}

fn escaped(v: &[f64; 3]) -> bool {
    v.iter().any(|c| !c.is_finite() || c.abs() > ESCAPE_RADIUS)
}

/// One accepted step of [`Integrator::step`].
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub state: State,
    pub crossing: Option<Crossing>,
}

/// Stepwise adaptive integrator; [`integrate`] drives it to a fixed end time,
/// the Poincaré map drives it to a section crossing.
pub struct Integrator<'a> {
    p: &'a SystemParams,
    mode: Mode,
    tol: f64,
    v: [f64; 3],
    t: f64,
    h: f64,
    k1: [f64; 3],
    side: i8,
    pub stats: IntegrationStats,
}

impl<'a> Integrator<'a> {
    pub fn new(s0: &State, p: &'a SystemParams, mode: Mode, tol: f64) -> Result<Self, DynamicsError> {
        if !(1e-13..=1e-3).contains(&tol) {
            return Err(DynamicsError::Tolerance(tol));
        }
        p.validate()?;
        let v = s0.point();
        if escaped(&v) || !s0.t.is_finite() {
            return Err(DynamicsError::NonFinite { t: s0.t });
        }
        let k1 = field(v, p, mode);
        let scale = v.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let speed = k1.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let h = if speed > 0.0 {
            (0.01 * scale / speed).min(tol.powf(0.2))
        } else {
            tol.powf(0.2)
        };
        Ok(Integrator {
            p,
            mode,
            tol,
            v,
            t: s0.t,
            h,
            k1,
            side: side_of(v, p),
            stats: IntegrationStats {
                rhs_evals: 1,
                ..Default::default()
            },
        })
    }

    pub fn state(&self) -> State {
        State::from_point(self.v, self.t)
    }

    fn error_norm(&self, v0: &[f64; 3], r: &StepResult) -> f64 {
        (0..3)
            .map(|i| {
                let sc = self.tol * (1.0 + v0[i].abs().max(r.y[i].abs()));
                (r.err[i] / sc).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Advances by one accepted step, never past `t_limit` and never across
    /// `y = 0` without stopping on it.
    pub fn step(&mut self, t_limit: f64) -> Result<Step, DynamicsError> {
        loop {
            let remaining = t_limit - self.t;
            let h = self.h.min(remaining);
            let last = h >= remaining;
            if h < MIN_STEP * self.t.abs().max(1.0) && !last {
                return Err(DynamicsError::StepUnderflow { t: self.t, h });
            }
            let r = dp_step(self.v, self.k1, h, self.p, self.mode);
            self.stats.rhs_evals += 6;
            let err = self.error_norm(&self.v, &r);
            if !err.is_finite() || err > 1.0 {
                self.stats.rejected += 1;
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.2
                };
                self.h = h * shrink;
                if self.h < MIN_STEP * self.t.abs().max(1.0) {
                    return Err(DynamicsError::StepUnderflow { t: self.t, h: self.h });
                }
                continue;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let new_side = if r.y[1] > 0.0 {
                1
            } else if r.y[1] < 0.0 {
                -1
            } else {
                self.side
            };
            if new_side != self.side {
                return self.finish_at_crossing(h, new_side, grow);
            }
            self.stats.accepted += 1;
            if !last {
                self.h = h * grow;
            }
            self.v = r.y;
            self.k1 = r.k_last;
            self.t = if last { t_limit } else { self.t + h };
            if escaped(&self.v) {
                return Err(DynamicsError::NonFinite { t: self.t });
            }
            return Ok(Step {
                state: self.state(),
                crossing: None,
            });
        }
    }

    /// Shortens the step `h`, whose end lies on side `new_side`, so that it
    /// ends on the switching plane.
    fn finish_at_crossing(&mut self, h: f64, new_side: i8, grow: f64) -> Result<Step, DynamicsError> {
        let old = -(new_side as f64);
        // g(tau) = y(tau) signed so that g > 0 on the old side
        let g = |tau: f64| {
            let r = dp_step(self.v, self.k1, tau, self.p, self.mode);
            (old * r.y[1], r)
        };
        let (mut lo, mut hi) = (0.0, h);
        let mut g_lo = old * self.v[1];
        let (mut g_hi, mut hi_result) = g(h);
        self.stats.rhs_evals += 6;
        let mut found = None;
        let mut last_moved = 0i8;
        for _ in 0..200 {
            if g_hi.abs() <= CROSSING_TOL {
                break;
            }
            if hi - lo <= f64::EPSILON * (self.t.abs() + hi) {
                break;
            }
            // Illinois variant of regula falsi, bisection as fallback
            let mut tau = if g_lo > 0.0 {
                hi - g_hi * (hi - lo) / (g_hi - g_lo)
            } else {
                0.5 * (lo + hi)
            };
            if !(tau > lo && tau < hi) {
                tau = 0.5 * (lo + hi);
            }
            let (g_tau, r) = g(tau);
            self.stats.rhs_evals += 6;
            if g_tau.abs() <= CROSSING_TOL {
                found = Some((tau, r));
                break;
            }
            if g_tau > 0.0 {
                lo = tau;
                g_lo = g_tau;
                if last_moved == 1 {
                    g_hi *= 0.5;
                }
                last_moved = 1;
            } else {
                hi = tau;
                g_hi = g_tau;
                hi_result = r;
                if last_moved == -1 {
                    g_lo *= 0.5;
                }
                last_moved = -1;
            }
        }
        let (tau, r) = found.unwrap_or((hi, hi_result));
        self.stats.accepted += 1;
        self.v = r.y;
        self.k1 = r.k_last;
        self.t += tau;
        self.h = h * grow;
        self.side = new_side;
        if escaped(&self.v) {
            return Err(DynamicsError::NonFinite { t: self.t });
        }
        let state = self.state();
        Ok(Step {
            state,
            crossing: Some(Crossing {
                state,
                direction: new_side,
            }),
        })
    }
}

/// Adaptive integration from `s0` to `t_end`, recording every accepted step
/// and every crossing of `y = 0`.
pub fn integrate(
    s0: &State,
    p: &SystemParams,
    mode: Mode,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory, DynamicsError> {
    if !(t_end > s0.t) {
        return Err(DynamicsError::TimeSpan { t0: s0.t, t_end });
    }
    let mut integ = Integrator::new(s0, p, mode, tol)?;
    let mut samples = vec![*s0];
    let mut crossings = Vec::new();
    while integ.t < t_end {
        if integ.stats.accepted + integ.stats.rejected > MAX_STEPS {
            return Err(DynamicsError::StepBudget { t: integ.t });
        }
        let step = integ.step(t_end)?;
        samples.push(step.state);
        if let Some(c) = step.crossing {
            crossings.push(c);
        }
    }
    Ok(Trajectory {
        samples,
        crossings,
        stats: integ.stats,
    })
}

/// `n` equal steps of the 5th order Dormand-Prince formula without error
/// control or crossing handling. Intended for convergence studies on
/// segments where the field is smooth.
pub fn integrate_fixed(s0: &State, p: &SystemParams, mode: Mode, t_end: f64, n: usize) -> State {
    let h = (t_end - s0.t) / n as f64;
    let mut v = s0.point();
    let mut k1 = field(v, p, mode);
    for _ in 0..n {
        let r = dp_step(v, k1, h, p, mode);
        v = r.y;
        k1 = r.k_last;
    }
    State::from_point(v, t_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params() -> SystemParams {
        SystemParams::perturbed(2.5, 9.0, 1e-4, 2.0)
    }

    #[test]
    fn rhs_examples() {
        let p = SystemParams::new(1.0, 3.0, 2.0);
        assert_eq!(rhs(&State::new(0.0, 0.0, 7.0), &p, Mode::Full), [0.0, 0.0, 0.0]);
        assert_eq!(rhs(&State::new(1.0, 0.0, 0.0), &p, Mode::Full), [0.0, -1.0, -1.0]);
        let p = SystemParams::new(1.0, 1.0, 0.0);
        assert_eq!(rhs(&State::new(0.0, -2.0, 0.0), &p, Mode::Full)[2], 2.0);
    }

    #[test]
    fn branches_agree_with_full_on_their_half_space() {
        let p = SystemParams::new(2.0, 0.7, -1.3);
        let up = State::new(0.3, 0.8, -0.2);
        let down = State::new(0.3, -0.8, -0.2);
        assert_eq!(rhs(&up, &p, Mode::Full), rhs(&up, &p, Mode::Branch(Branch::Upper)));
        assert_eq!(rhs(&down, &p, Mode::Full), rhs(&down, &p, Mode::Branch(Branch::Lower)));
        assert_ne!(rhs(&down, &p, Mode::Full), rhs(&down, &p, Mode::Branch(Branch::Upper)));
    }

    #[test]
    fn params_validation() {
        assert!(reference_params().validate().is_ok());
        let mut bad = reference_params();
        bad.b = 1.0;
        assert!(bad.validate().is_err());
        bad = reference_params();
        bad.beta = None;
        assert!(bad.validate().is_err());
        assert!(SystemParams::new(f64::NAN, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn symmetry_examples() {
        let s = symmetry_image(&State::new(1.0, 2.0, 3.0));
        assert_eq!(s.point(), [-1.0, -2.0, 3.0]);
        let e = State::new(0.0, 0.0, 4.0);
        assert_eq!(symmetry_image(&e).point(), [-0.0, -0.0, 4.0]);
        assert_eq!(symmetry_image(&e), e);
    }

    #[test]
    fn equilibrium_line_examples() {
        let p = SystemParams::new(2.5, 0.3, 9.0);
        assert!(check_equilibrium_line(&p, &[-10.0, 0.0, 10.0]).passed);
        assert!(check_equilibrium_line(&p, &[]).passed);
        let perturbed = check_equilibria(&p, &[[1e-3, 0.0, 1.0]]);
        assert!(!perturbed.passed);
        assert_eq!(perturbed.failures[0].1[1], -2.5e-3);
    }

    #[test]
    fn equilibrium_trajectory_is_constant() {
        let p = SystemParams::new(1.0, 1.0, 1.0);
        let traj = integrate(&State::new(0.0, 0.0, 5.0), &p, Mode::Full, 10.0, 1e-10).unwrap();
        assert!(traj.samples.iter().all(|s| s.point() == [0.0, 0.0, 5.0]));
        assert_eq!(traj.last().t, 10.0);
        assert!(traj.crossings.is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = reference_params();
        let s = State::new(1e-3, 0.0, 0.0);
        assert_eq!(
            integrate(&s, &p, Mode::Full, 1.0, 1e-2).unwrap_err(),
            DynamicsError::Tolerance(1e-2)
        );
        assert!(matches!(
            integrate(&s, &p, Mode::Full, 0.0, 1e-8).unwrap_err(),
            DynamicsError::TimeSpan { .. }
        ));
    }

    #[test]
    fn blowup_is_reported() {
        // a < 0 makes the origin a saddle, and c < 0 feeds z along the
        // unstable direction
        let p = SystemParams::new(-1.0, 0.0, -2.0);
        let err = integrate(&State::new(1.0, 1.0, 0.0), &p, Mode::Full, 100.0, 1e-8).unwrap_err();
        assert!(matches!(err, DynamicsError::NonFinite { .. }));
    }

    #[test]
    fn crossings_are_refined_and_samples_increase() {
        let p = reference_params();
        let traj = integrate(&State::new(4.026336968e-4, 0.0, 0.0), &p, Mode::Full, 20.0, 1e-10).unwrap();
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(traj.crossings.len() >= 9);
        for c in &traj.crossings {
            assert!(c.state.y.abs() <= CROSSING_TOL);
        }
        // alternating directions, first one - -> + since we start heading down
        assert_eq!(traj.crossings[0].direction, 1);
        assert!(traj.crossings.windows(2).all(|w| w[0].direction != w[1].direction));
        let half = std::f64::consts::PI / 2.5f64.sqrt();
        for w in traj.crossings.windows(2) {
            let dt = w[1].state.t - w[0].state.t;
            assert!((dt - half).abs() < 1e-2 * half, "spacing {dt}");
        }
    }

    #[test]
    fn csv_export_has_headers() {
        let p = reference_params();
        let traj = integrate(&State::new(4.026336968e-4, 0.0, 0.0), &p, Mode::Full, 5.0, 1e-9).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y,z\n0,0.0004026336968,0,0\n"));
        assert_eq!(text.lines().count(), traj.samples.len() + 1);
        let mut buf = Vec::new();
        traj.write_crossings_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,z\n"));
        assert_eq!(text.lines().count(), traj.crossings.len() + 1);
    }
}
