//! Homotopy membership test and the filter that drops cascade candidates
//! lying on higher-dimensional pieces of the intersection.
//!
//! The test moves the witness slice of the target set to a slice of the same
//! codimension through the query point and tracks the witness points along;
//! the point is on the component iff some endpoint lands on it. This is the
//! usual slice-through-point construction; the tolerance regime and the
//! inconclusive outcome are choices of this crate.

use rayon::prelude::*;

use crate::linalg::{CMat, CVec, C64};
use crate::random::{derived_rng, random_matrix, random_unit};
use crate::tracker::{track_all, Homotopy, PathStatus, TrackSettings};
use crate::witness::{SliceSystem, WitnessError, WitnessSet};

/// System residual above which a point is rejected without tracking.
pub const RESIDUAL_SHORTCUT: f64 = 1e-4;
/// Default endpoint-matching distance.
pub const MATCH_TOL: f64 = 1e-6;

const STREAM: u64 = 0x6d62;

#[derive(Debug, thiserror::Error)]
pub enum MembershipError {
    #[error("query point has length {got}, witness set lives in C^{expected}")]
    Dimension { expected: usize, got: usize },
    #[error("tolerance {0} outside (0, 1e-2)")]
    Tolerance(f64),
    #[error("query point is not finite")]
    NonFinite,
    #[error("membership inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipResult {
    pub member: bool,
    /// Distance (max-norm) from the query to the nearest tracked endpoint, or
    /// to the nearest witness point for zero-dimensional sets. Infinite when
    /// the residual shortcut fired.
    pub distance: f64,
    /// Residual of the target system at the query point.
    pub residual: f64,
    pub tracked: bool,
}

fn max_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[R f(x); (1 − t) L_new(x) + γ t L_old(x)]` on `C^k`.
struct SliceMove<'a> {
    ws: &'a WitnessSet,
    randomizer: Option<CMat>,
    new_slice: SliceSystem,
    gamma: C64,
}

impl SliceMove<'_> {
    fn system(&self, x: &CVec) -> (CVec, CMat) {
        let (v, j) = self.ws.system().evaluate_with_jacobian(x.as_slice()).expect("length checked");
        match &self.randomizer {
            Some(r) => (r * v, r * j),
            None => (v, j),
        }
    }

    fn blend(&self, t: f64) -> (C64, C64) {
        (C64::new(1.0 - t, 0.0), self.gamma * t)
    }
}

impl Homotopy for SliceMove<'_> {
    fn dim(&self) -> usize {
        self.ws.ambient_dim()
    }

    fn eval(&self, x: &CVec, t: f64) -> CVec {
        self.eval_and_jac(x, t).0
    }

    fn jac_y(&self, x: &CVec, t: f64) -> CMat {
        self.eval_and_jac(x, t).1
    }

    fn dt(&self, x: &CVec, _t: f64) -> CVec {
        let c = self.ws.codim();
        let mut out = CVec::zeros(self.dim());
        let d = self.ws.slice().evaluate(x) * self.gamma - self.new_slice.evaluate(x);
        out.rows_mut(c, self.ws.dim()).copy_from(&d);
        out
    }

    fn eval_and_jac(&self, x: &CVec, t: f64) -> (CVec, CMat) {
        let (c, k) = (self.ws.codim(), self.dim());
        let (s_new, s_old) = self.blend(t);
        let (fv, fj) = self.system(x);
        let mut value = CVec::zeros(k);
        let mut jac = CMat::zeros(k, k);
        value.rows_mut(0, c).copy_from(&fv);
        jac.view_mut((0, 0), (c, k)).copy_from(&fj);
        let lv = self.new_slice.evaluate(x) * s_new + self.ws.slice().evaluate(x) * s_old;
        let lj = &self.new_slice.coeff * s_new + &self.ws.slice().coeff * s_old;
        value.rows_mut(c, k - c).copy_from(&lv);
        jac.view_mut((c, 0), (k - c, k)).copy_from(&lj);
        (value, jac)
    }
}

/// Decides whether `point` lies on the component described by `ws`.
///
/// Deterministic in `seed`. Path failures trigger one retry with a fresh
/// slice; a second failure is reported as inconclusive rather than as a
/// negative answer.
pub fn member(
    ws: &WitnessSet,
    point: &CVec,
    tol: f64,
    seed: u64,
    settings: &TrackSettings,
) -> Result<MembershipResult, MembershipError> {
    let k = ws.ambient_dim();
    if point.len() != k {
        return Err(MembershipError::Dimension { expected: k, got: point.len() });
    }
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(MembershipError::Tolerance(tol));
    }
    if !point.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(MembershipError::NonFinite);
    }
    let residual = max_norm(&ws.system().evaluate(point.as_slice()).map_err(WitnessError::from)?);
    if residual > RESIDUAL_SHORTCUT * (1.0 + max_norm(point)) {
        return Ok(MembershipResult { member: false, distance: f64::INFINITY, residual, tracked: false });
    }
    let nearest = |pts: &mut dyn Iterator<Item = &CVec>| {
        pts.map(|p| max_norm(&(p - point))).fold(f64::INFINITY, f64::min)
    };
    if ws.dim() == 0 {
        let distance = nearest(&mut ws.points().iter());
        return Ok(MembershipResult { member: distance <= tol, distance, residual, tracked: false });
    }

    let c = ws.codim();
    let npolys = ws.system().num_polys();
    if npolys < c {
        return Err(MembershipError::Inconclusive(format!(
            "system has {npolys} equations, component has codimension {c}"
        )));
    }
    let mut last = String::new();
    for attempt in 0..2 {
        let mut rng = derived_rng(seed, STREAM, attempt);
        let randomizer = (npolys > c).then(|| random_matrix(&mut rng, c, npolys));
        let new_slice = SliceSystem::random_through(&mut rng, ws.dim(), point)?;
        let gamma = random_unit(&mut rng);
        let h = SliceMove { ws, randomizer, new_slice, gamma };
        let results = track_all(&h, ws.points(), settings);
        if let Some(bad) = results.iter().find(|r| r.status.is_failure()) {
            last = format!("path {} ended with {:?}", bad.start_index, bad.status);
            log::debug!("membership attempt {attempt}: {last}");
            continue;
        }
        let distance = nearest(
            &mut results.iter().filter(|r| r.status == PathStatus::Converged).map(|r| &r.endpoint),
        );
        return Ok(MembershipResult { member: distance <= tol, distance, residual, tracked: true });
    }
    Err(MembershipError::Inconclusive(last))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<CVec>,
    /// Aligned with `kept`: membership could not be decided for this point.
    pub suspect: Vec<bool>,
    pub removed: Vec<CVec>,
}

/// Keeps the candidates that lie on none of the `higher` witness sets.
/// Query `i` uses membership seed `seed + i`, so the outcome does not depend
/// on scheduling.
pub fn filter(
    candidates: &[CVec],
    higher: &[WitnessSet],
    tol: f64,
    seed: u64,
    settings: &TrackSettings,
) -> FilterOutcome {
    if higher.is_empty() {
        return FilterOutcome {
            kept: candidates.to_vec(),
            suspect: vec![false; candidates.len()],
            removed: Vec::new(),
        };
    }
    // (on a higher set, inconclusive)
    let verdicts: Vec<(bool, bool)> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut inconclusive = false;
            for (s, ws) in higher.iter().enumerate() {
                let query_seed = seed.wrapping_add(i as u64).wrapping_mul(31).wrapping_add(s as u64);
                match member(ws, x, tol, query_seed, settings) {
                    Ok(r) if r.member => return (true, false),
                    Ok(_) => {}
                    Err(e) => {
                        log::warn!("candidate {i}: {e}");
                        inconclusive = true;
                    }
                }
            }
            (false, inconclusive)
        })
        .collect();
    let mut out = FilterOutcome::default();
    for (x, (on_higher, suspect)) in candidates.iter().zip(verdicts) {
        if on_higher {
            out.removed.push(x.clone());
        } else {
            out.kept.push(x.clone());
            out.suspect.push(suspect);
        }
    }
    out
}
