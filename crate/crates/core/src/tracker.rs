//! Predictor–corrector path tracking for square homotopies `H(y, t) = 0`
//! from `t = 1` down to `t = 0`.
//!
//! The scheme is deliberately plain: an Euler tangent predictor, at most a
//! few Newton corrections at fixed `t`, step halving on failure and growth
//! after a run of successes. The final point at `t = 0` is polished by a
//! longer Newton run. There is no singular endgame.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{solve, CMat, CVec};

/// A square homotopy in `y ∈ C^m` with real path parameter `t ∈ [0, 1]`.
///
/// Implementations must be immutable during tracking; `track_all` shares
/// them across worker threads.
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, y: &CVec, t: f64) -> CVec;

    fn jac_y(&self, y: &CVec, t: f64) -> CMat;

    /// Partial derivative with respect to `t`.
    fn dt(&self, y: &CVec, t: f64) -> CVec;

    fn eval_and_jac(&self, y: &CVec, t: f64) -> (CVec, CMat) {
        (self.eval(y, t), self.jac_y(y, t))
    }

    fn jac_and_dt(&self, y: &CVec, t: f64) -> (CMat, CVec) {
        (self.jac_y(y, t), self.dt(y, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSettings {
    pub newton_tol: f64,
    pub refine_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub max_newton_iters: usize,
    pub divergence_norm: f64,
    pub max_steps: usize,
}

impl Default for TrackSettings {
    fn default() -> Self {
        TrackSettings {
            newton_tol: 1e-9,
            refine_tol: 1e-11,
            min_step: 1e-8,
            max_step: 0.1,
            initial_step: 0.05,
            max_newton_iters: 3,
            divergence_norm: 1e8,
            max_steps: 10_000,
        }
    }
}

impl TrackSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step < 1.0)
        {
            return Err(format!(
                "step sizes must satisfy 0 < min ≤ initial ≤ max < 1, got {} / {} / {}",
                self.min_step, self.initial_step, self.max_step
            ));
        }
        if self.newton_tol <= 0.0 || self.refine_tol <= 0.0 || self.max_newton_iters == 0 {
            return Err("tolerances and iteration counts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathStatus {
    Converged,
    /// `‖y‖` grew past the divergence threshold: a path to infinity.
    Diverged,
    StepSizeCollapse,
    MaxSteps,
    /// The start point does not satisfy `H(y, 1) = 0`.
    InvalidStart,
}

impl PathStatus {
    /// Statuses that indicate a numerical problem rather than a legitimate
    /// outcome of the homotopy.
    pub fn is_failure(self) -> bool {
        !matches!(self, PathStatus::Converged | PathStatus::Diverged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    pub endpoint: CVec,
    /// `‖H(endpoint, t_final)‖`.
    pub residual: f64,
    pub t_final: f64,
    pub steps_taken: usize,
    pub rejected_steps: usize,
    pub start_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub y: CVec,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton's method on a square system given as a value/Jacobian closure.
///
/// Iterates until the update is at roundoff level (quadratic convergence
/// has finished) or `max_iters` is reached; convergence is then judged by
/// `‖F(y*)‖ ≤ tol · (1 + ‖y*‖)`. A singular Jacobian stops the iteration.
pub fn newton_refine<F>(system: F, y: &CVec, tol: f64, max_iters: usize) -> RefineResult
where
    F: Fn(&CVec) -> (CVec, CMat),
{
    let mut y = y.clone();
    let mut iterations = 0;
    let (mut value, mut jac) = system(&y);
    while iterations < max_iters && value.norm() > 0.0 {
        let Some(delta) = solve(&jac, &(-&value)) else {
            break;
        };
        if !delta.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        y += &delta;
        iterations += 1;
        (value, jac) = system(&y);
        if delta.norm() <= 1e-14 * (1.0 + y.norm()) {
            break;
        }
    }
    let residual = value.norm();
    RefineResult { converged: residual <= tol * (1.0 + y.norm()), y, residual, iterations }
}

/// Newton corrector at fixed `t`: at most `iters` steps, requiring the
/// update norm to shrink and to fall below `tol · (1 + ‖y‖)`.
fn correct<H: Homotopy + ?Sized>(h: &H, y: &CVec, t: f64, tol: f64, iters: usize) -> Option<CVec> {
    let mut y = y.clone();
    let mut last = f64::INFINITY;
    for _ in 0..iters {
        let (value, jac) = h.eval_and_jac(&y, t);
        let delta = solve(&jac, &(-value))?;
        let size = delta.norm();
        if !size.is_finite() || size > last {
            return None;
        }
        y += delta;
        if size <= tol * (1.0 + y.norm()) {
            return Some(y);
        }
        last = size;
    }
    None
}

fn finite(y: &CVec) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Tracks one path from `y_start` at `t = 1` to `t = 0`.
pub fn track_path<H: Homotopy + ?Sized>(h: &H, y_start: &CVec, settings: &TrackSettings) -> PathResult {
    let mut result = PathResult {
        status: PathStatus::InvalidStart,
        endpoint: y_start.clone(),
        residual: h.eval(y_start, 1.0).norm(),
        t_final: 1.0,
        steps_taken: 0,
        rejected_steps: 0,
        start_index: 0,
    };
    if y_start.len() != h.dim() || result.residual > settings.newton_tol * (1.0 + y_start.norm()) {
        return result;
    }

    let start_norm = y_start.norm();
    let mut y = y_start.clone();
    let mut t = 1.0_f64;
    let mut step = settings.initial_step;
    let mut streak = 0;

    let status = loop {
        if result.steps_taken + result.rejected_steps >= settings.max_steps {
            break PathStatus::MaxSteps;
        }
        if y.norm() > settings.divergence_norm {
            break PathStatus::Diverged;
        }
        if step < settings.min_step {
            // Paths heading to infinity stall here with a large norm once
            // the last approach to t = 0 keeps failing.
            if y.norm() > 1e4 * (1.0 + start_norm) {
                break PathStatus::Diverged;
            }
            break PathStatus::StepSizeCollapse;
        }
        let h_step = step.min(t);
        let t_next = if h_step >= t { 0.0 } else { t - h_step };

        let (jac, dt) = h.jac_and_dt(&y, t);
        let corrected = solve(&jac, &(-dt)).and_then(|tangent| {
            let predicted = &y + tangent * nalgebra::Complex::new(t_next - t, 0.0);
            if !finite(&predicted) {
                return None;
            }
            if t_next == 0.0 {
                let r = newton_refine(|v| h.eval_and_jac(v, 0.0), &predicted, settings.refine_tol, 20);
                // a relative residual test is meaningless once Newton has
                // thrown the point towards infinity
                (r.converged && r.y.norm() <= settings.divergence_norm).then_some(r.y)
            } else {
                correct(h, &predicted, t_next, settings.newton_tol, settings.max_newton_iters)
            }
        });

        match corrected {
            Some(next) => {
                y = next;
                t = t_next;
                result.steps_taken += 1;
                streak += 1;
                if streak >= 5 {
                    step = (step * 1.5).min(settings.max_step);
                    streak = 0;
                }
                if t == 0.0 {
                    break PathStatus::Converged;
                }
            }
            None => {
                result.rejected_steps += 1;
                step /= 2.0;
                streak = 0;
            }
        }
    };

    result.residual = h.eval(&y, t).norm();
    result.endpoint = y;
    result.t_final = t;
    result.status = status;
    result
}

/// Tracks every start point; results are aligned with `starts` regardless
/// of how the work is scheduled across threads.
pub fn track_all<H: Homotopy + ?Sized>(h: &H, starts: &[CVec], settings: &TrackSettings) -> Vec<PathResult> {
    starts
        .par_iter()
        .enumerate()
        .map(|(index, start)| {
            let mut r = track_path(h, start, settings);
            r.start_index = index;
            r
        })
        .collect()
}
