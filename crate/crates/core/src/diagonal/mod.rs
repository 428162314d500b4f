//! Diagonal homotopy cascade for `A ∩ B`.
//!
//! Both inputs are lifted to `A × B ⊂ C^{2k}` with `w = (u, v)`. A start
//! homotopy moves the product of the witness slices to the top level of the
//! cascade; each further stage drops one slack hyperplane and recycles the
//! nonsolutions as start points. Two formulations are provided: tracking
//! `y ∈ C^m` on moving affine planes ([`Mode::Intrinsic`]) and tracking
//! `(w, z) ∈ C^{3k}` with explicit linear equations ([`Mode::Extrinsic`]).

mod extrinsic;
mod intrinsic;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    least_squares, null_space_basis, particular_solution_epsilon, basis_efg, CMat, CVec,
    LinalgError, C64, RANK_TOL,
};
use crate::membership::{self, member, MembershipError};
use crate::polysys::{combine, CombinedSystem, PolyError, PolySystem};
use crate::random::{derived_rng, random_matrix, random_unit, random_vector};
use crate::tracker::{PathResult, PathStatus, TrackSettings};
use crate::witness::{SliceSystem, WitnessError, WitnessSet, LOAD_TOL};

pub use intrinsic::{cascade_plane, start_plane, transform, CascadePlane};

const STREAM_DATA: u64 = 1;
const STREAM_GAMMA: u64 = 2;
const STREAM_MEMBER: u64 = 3;

/// Distance between `u` and `v` accepted as "on the diagonal".
pub const DIAGONAL_TOL: f64 = 1e-6;
/// Slack values above this (relative) are never refined before classifying.
pub const AMBIGUOUS_SLACK: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum DiagonalError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Membership(#[from] MembershipError),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("random data stayed degenerate after {attempts} draws: {last}")]
    Degenerate { attempts: usize, last: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Intrinsic,
    Extrinsic,
}

/// Two witness sets to intersect, ordered so that `a ≥ b`, plus the range of
/// cascade levels to visit.
#[derive(Debug, Clone)]
pub struct DiagonalProblem {
    w_a: WitnessSet,
    w_b: WitnessSet,
    hmax: usize,
    h0: usize,
    seed: u64,
    swapped: bool,
}

impl DiagonalProblem {
    /// Uses the default level range `hmax = b`, `h0 = max(a + b − k, 0)`.
    pub fn new(w_a: WitnessSet, w_b: WitnessSet, seed: u64) -> Result<Self, DiagonalError> {
        if w_a.ambient_dim() != w_b.ambient_dim() {
            return Err(DiagonalError::Invalid(format!(
                "A lives in C^{}, B in C^{}",
                w_a.ambient_dim(),
                w_b.ambient_dim()
            )));
        }
        let swapped = w_a.dim() < w_b.dim();
        let (w_a, w_b) = if swapped { (w_b, w_a) } else { (w_a, w_b) };
        for (name, ws) in [("A", &w_a), ("B", &w_b)] {
            if ws.system().num_polys() < ws.codim() {
                return Err(DiagonalError::Invalid(format!(
                    "system of {name} has {} equations but codimension {}",
                    ws.system().num_polys(),
                    ws.codim()
                )));
            }
        }
        let k = w_a.ambient_dim();
        let hmax = w_b.dim();
        let h0 = (w_a.dim() + w_b.dim()).saturating_sub(k);
        Ok(DiagonalProblem { w_a, w_b, hmax, h0, seed, swapped })
    }

    /// Narrows the level range when bounds on `dim(A ∩ B)` are known:
    /// `b ≥ hmax > dim(A ∩ B)` and `max(a + b − k, 0) ≤ h0 ≤` every
    /// component dimension.
    pub fn with_bounds(mut self, hmax: Option<usize>, h0: Option<usize>) -> Result<Self, DiagonalError> {
        let hmax = hmax.unwrap_or(self.hmax);
        let h0 = h0.unwrap_or(self.h0);
        let floor = (self.a() + self.b()).saturating_sub(self.k());
        if hmax > self.b() {
            return Err(DiagonalError::Invalid(format!("hmax = {hmax} exceeds b = {}", self.b())));
        }
        if h0 < floor || h0 > hmax {
            return Err(DiagonalError::Invalid(format!(
                "h0 = {h0} outside [{floor}, hmax = {hmax}]"
            )));
        }
        self.hmax = hmax;
        self.h0 = h0;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.w_a.ambient_dim()
    }

    pub fn a(&self) -> usize {
        self.w_a.dim()
    }

    pub fn b(&self) -> usize {
        self.w_b.dim()
    }

    /// Number of intrinsic coordinates, `2k − a − b`.
    pub fn m(&self) -> usize {
        2 * self.k() - self.a() - self.b()
    }

    pub fn hmax(&self) -> usize {
        self.hmax
    }

    pub fn h0(&self) -> usize {
        self.h0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// True when the inputs were exchanged to make `a ≥ b`.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn witness_a(&self) -> &WitnessSet {
        &self.w_a
    }

    pub fn witness_b(&self) -> &WitnessSet {
        &self.w_b
    }

    pub fn f_a(&self) -> &PolySystem {
        self.w_a.system()
    }

    pub fn f_b(&self) -> &PolySystem {
        self.w_b.system()
    }

    /// Homotopies run: the start homotopy plus one per level below `hmax`.
    pub fn stage_count(&self) -> usize {
        1 + self.hmax - self.h0
    }

    fn product_points(&self) -> Vec<CVec> {
        let k = self.k();
        let mut out = Vec::with_capacity(self.w_a.degree() * self.w_b.degree());
        for alpha in self.w_a.points() {
            for beta in self.w_b.points() {
                let mut w = CVec::zeros(2 * k);
                w.rows_mut(0, k).copy_from(alpha);
                w.rows_mut(k, k).copy_from(beta);
                out.push(w);
            }
        }
        out
    }
}

/// The generic constants of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomData {
    /// Randomizes `f_A` to `k − a` equations.
    pub m: CMat,
    /// Randomizes `f_B` to `k − b` equations.
    pub n: CMat,
    /// `(a + b) × k`; the diagonal equations are `abb · (u − v) = 0`.
    pub abb: CMat,
    /// `[abb | −abb]`.
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CVec,
    pub epsilon: CVec,
    pub gamma_start: C64,
    /// One γ per cascade homotopy, indexed by its upper level `i`.
    pub gamma_cascade: Vec<C64>,
}

impl RandomData {
    /// `A + B P_h C`: only the first `h` columns of `B` and rows of `C` enter.
    pub fn y_h(&self, h: usize) -> CMat {
        let mut y = self.a.clone();
        if h > 0 {
            y += self.b.columns(0, h) * self.c.rows(0, h);
        }
        y
    }

    /// The first `j` entries of `C w + d`.
    pub fn slack(&self, w: &CVec, j: usize) -> CVec {
        (self.c.rows(0, j) * w) + self.d.rows(0, j)
    }

    /// γ of the cascade homotopy leaving level `i`.
    pub fn cascade_gamma(&self, i: usize) -> C64 {
        self.gamma_cascade[i]
    }

    /// Same matrices, fresh unit-modulus γ constants.
    pub fn with_fresh_gammas(&self, seed: u64, restart: u64) -> RandomData {
        let mut rng = derived_rng(seed, STREAM_GAMMA, restart);
        let gamma_start = random_unit(&mut rng);
        let gamma_cascade = (0..self.gamma_cascade.len()).map(|_| random_unit(&mut rng)).collect();
        RandomData { gamma_start, gamma_cascade, ..self.clone() }
    }
}

/// Draws the run's random data from the problem seed, redrawing (at most
/// five times) when a rank condition of the cascade fails.
pub fn initialize(problem: &DiagonalProblem) -> Result<RandomData, DiagonalError> {
    let (k, a, b) = (problem.k(), problem.a(), problem.b());
    let mut last = String::new();
    for attempt in 0..5 {
        let mut rng = derived_rng(problem.seed, STREAM_DATA, attempt);
        let m = random_matrix(&mut rng, k - a, problem.f_a().num_polys());
        let n = random_matrix(&mut rng, k - b, problem.f_b().num_polys());
        let abb = random_matrix(&mut rng, a + b, k);
        let bm = random_matrix(&mut rng, a + b, k);
        let c = random_matrix(&mut rng, k, 2 * k);
        let d = random_vector(&mut rng, k);
        let gamma_start = random_unit(&mut rng);
        let gamma_cascade: Vec<C64> = (0..=k).map(|_| random_unit(&mut rng)).collect();
        let mut am = CMat::zeros(a + b, 2 * k);
        am.view_mut((0, 0), (a + b, k)).copy_from(&abb);
        am.view_mut((0, k), (a + b, k)).copy_from(&(-&abb));
        let epsilon = match particular_solution_epsilon(&c, &d) {
            Ok(p) if !p.degenerate => p.epsilon,
            Ok(_) => {
                last = "particular solution vanished".into();
                continue;
            }
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let rd = RandomData { m, n, abb, a: am, b: bm, c, d, epsilon, gamma_start, gamma_cascade };
        match check_random_data(problem, &rd) {
            Ok(()) => return Ok(rd),
            Err(e) => {
                log::debug!("random data attempt {attempt} rejected: {e}");
                last = e;
            }
        }
    }
    Err(DiagonalError::Degenerate { attempts: 5, last })
}

fn check_random_data(problem: &DiagonalProblem, rd: &RandomData) -> Result<(), String> {
    let scale = 1.0 + rd.epsilon.norm();
    let r1 = (&rd.a * &rd.epsilon).norm();
    let r2 = (&rd.c * &rd.epsilon + &rd.d).norm();
    if r1 > 1e-10 * scale || r2 > 1e-10 * scale {
        return Err(format!("particular solution residuals {r1:.2e}, {r2:.2e}"));
    }
    let m = problem.m();
    for h in problem.h0..=problem.hmax {
        let dim = null_space_basis(&rd.y_h(h), RANK_TOL).ncols();
        if dim != m {
            return Err(format!("Null Y_{h} has dimension {dim}, expected {m}"));
        }
        if h > problem.h0 {
            basis_efg(&rd.y_h(h), &rd.y_h(h - 1), &rd.c, h - 1, h).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

/// Outcome of one homotopy of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// Level the paths start from; `None` for the start homotopy.
    pub from_level: Option<usize>,
    pub to_level: usize,
    pub paths: usize,
    pub converged: usize,
    pub diverged: usize,
    pub failed: usize,
    pub statuses: Vec<PathStatus>,
    pub steps: usize,
    pub rejected_steps: usize,
    pub seconds: f64,
    /// Converged endpoints in `C^{2k}`, in start order.
    #[serde(skip)]
    pub endpoints: Vec<CVec>,
}

/// Classification results for one dimension of `A ∩ B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub dim: usize,
    /// Witness candidates after filtering, collapsed to `C^k`.
    #[serde(with = "crate::report::points")]
    pub candidates: Vec<CVec>,
    /// Aligned with `candidates`: the filter could not decide this point.
    pub suspect: Vec<bool>,
    /// Candidates found on a higher-dimensional piece of `A ∩ B`.
    #[serde(with = "crate::report::points")]
    pub junk: Vec<CVec>,
    /// Points with vanishing slack whose `u` and `v` halves disagree.
    pub off_diagonal: usize,
    pub nonsolutions: usize,
    /// Endpoints on which the full slack test and the last-entry test differ.
    pub slack_disagreements: usize,
    /// Endpoints refined because their slack fell in the ambiguous band.
    pub refined: usize,
    /// Largest `‖u − v‖∞` over candidates before collapsing.
    pub max_diagonal_gap: f64,
    /// Largest residual of `f_A`, `f_B` and the level slice over candidates.
    pub max_residual: f64,
}

impl LevelResult {
    pub fn count(&self) -> usize {
        self.candidates.len()
    }
}

/// Per-dimension witness candidates for `A ∩ B` with run statistics.
#[derive(Debug, Clone)]
pub struct WitnessSuperset {
    pub mode: Mode,
    pub k: usize,
    pub a: usize,
    pub b: usize,
    pub hmax: usize,
    pub h0: usize,
    /// Unknowns tracked per path.
    pub tracked_vars: usize,
    pub levels: Vec<LevelResult>,
    pub stages: Vec<StageReport>,
    /// Witness sets assembled from the nonempty levels, highest first.
    pub witness_sets: Vec<WitnessSet>,
    pub restarts: usize,
    /// Paths that ended neither converged nor diverged in the final attempt.
    pub failed_paths: usize,
    pub setup_seconds: f64,
    pub total_seconds: f64,
}

impl WitnessSuperset {
    pub fn level(&self, dim: usize) -> Option<&LevelResult> {
        self.levels.iter().find(|l| l.dim == dim)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.level(dim).map_or(0, LevelResult::count)
    }

    pub fn total_paths(&self) -> usize {
        self.stages.iter().map(|s| s.paths).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|l| l.candidates.is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub track: TrackSettings,
    /// Relative slack threshold separating candidates from nonsolutions.
    pub classify_tol: f64,
    /// Endpoint-matching distance of the membership filter.
    pub member_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { track: TrackSettings::default(), classify_tol: 1e-6, member_tol: membership::MATCH_TOL }
    }
}

fn max_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(u + v) / 2`, or the gap `‖u − v‖∞` when it exceeds [`DIAGONAL_TOL`].
pub fn collapse(w: &CVec) -> Result<CVec, f64> {
    let k = w.len() / 2;
    let (u, v) = (w.rows(0, k), w.rows(k, k));
    let gap = max_norm(&(u - v).into_owned());
    if gap > DIAGONAL_TOL * (1.0 + max_norm(w)) {
        return Err(gap);
    }
    Ok((u + v) * C64::new(0.5, 0.0))
}

/// Split of converged endpoints at level `j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Classification {
    /// Indices (into the input) of points on the level-`j` slice.
    pub candidates: Vec<usize>,
    /// Candidate points, refined when their slack was ambiguous.
    pub candidate_points: Vec<CVec>,
    pub nonsolutions: Vec<usize>,
    pub disagreements: usize,
    pub refined: usize,
}

/// Sorts endpoints `(w, z)` of level `j` into witness candidates (`z = 0`
/// on the first `j` entries) and nonsolutions. Slack values between
/// `tol` and [`AMBIGUOUS_SLACK`] (both relative to `1 + ‖w‖∞`) get a
/// Gauss–Newton polish onto `{𝒮F = 0, A w = 0, z = 0}` before deciding.
pub fn classify(
    rd: &RandomData,
    sf: &CombinedSystem,
    endpoints: &[(CVec, CVec)],
    j: usize,
    tol: f64,
) -> Classification {
    let mut out = Classification::default();
    for (idx, (w, z)) in endpoints.iter().enumerate() {
        let scale = 1.0 + max_norm(w);
        let z = z.rows(0, j).into_owned();
        let full = max_norm(&z) <= tol * scale;
        let last = j == 0 || z[j - 1].norm() <= tol * scale;
        if full != last {
            out.disagreements += 1;
            log::warn!("level {j}: slack prefix and last entry disagree at endpoint {idx}");
        }
        if full {
            out.candidates.push(idx);
            out.candidate_points.push(w.clone());
            continue;
        }
        if max_norm(&z) <= AMBIGUOUS_SLACK * scale {
            out.refined += 1;
            if let Some(p) = refine_onto_slice(rd, sf, w, j, tol) {
                out.candidates.push(idx);
                out.candidate_points.push(p);
                continue;
            }
        }
        out.nonsolutions.push(idx);
    }
    out
}

fn refine_onto_slice(rd: &RandomData, sf: &CombinedSystem, w: &CVec, j: usize, tol: f64) -> Option<CVec> {
    let (ne, na) = (sf.num_equations(), rd.a.nrows());
    let n = w.len();
    let mut w = w.clone();
    for _ in 0..5 {
        let (fv, fj) = sf.evaluate_with_jacobian(w.as_slice()).ok()?;
        let mut value = CVec::zeros(ne + na + j);
        let mut jac = CMat::zeros(ne + na + j, n);
        value.rows_mut(0, ne).copy_from(&fv);
        jac.view_mut((0, 0), (ne, n)).copy_from(&fj);
        value.rows_mut(ne, na).copy_from(&(&rd.a * &w));
        jac.view_mut((ne, 0), (na, n)).copy_from(&rd.a);
        value.rows_mut(ne + na, j).copy_from(&rd.slack(&w, j));
        jac.view_mut((ne + na, 0), (j, n)).copy_from(&rd.c.rows(0, j));
        w += least_squares(&jac, &(-value));
    }
    let scale = 1.0 + max_norm(&w);
    let ok = max_norm(&rd.slack(&w, j)) <= tol * scale
        && max_norm(&sf.evaluate(w.as_slice()).ok()?) <= 1e-8 * scale;
    ok.then_some(w)
}

/// The level-`j` witness data in `C^k`: `f_A` and `f_B` stacked, and the
/// slice `P_j((C_u + C_v) x + d) = 0` that `w = (x, x)` inherits.
fn level_witness_set(
    problem: &DiagonalProblem,
    rd: &RandomData,
    j: usize,
    points: Vec<CVec>,
) -> Result<WitnessSet, DiagonalError> {
    let k = problem.k();
    let system = problem.f_a().stack(problem.f_b())?;
    let coeff = rd.c.view((0, 0), (j, k)) + rd.c.view((0, k), (j, k));
    let slice = SliceSystem::new(coeff, rd.d.rows(0, j).into_owned())?;
    Ok(WitnessSet::new(j, system, slice, points, LOAD_TOL)?)
}

/// What the driver needs from a formulation.
trait Engine {
    fn tracked_vars(&self) -> usize;
    /// Tracks the product points to level `hmax`.
    fn start_stage(&mut self, product: &[CVec]) -> Result<Vec<PathResult>, DiagonalError>;
    /// Tracks endpoints of the previous stage from level `i` to `j`.
    fn cascade_stage(&mut self, i: usize, j: usize, starts: &[CVec]) -> Result<Vec<PathResult>, DiagonalError>;
    /// `(w, z)` for an endpoint of the latest stage, `z = C w + d` padded
    /// or read from the slack variables.
    fn point(&self, endpoint: &CVec) -> (CVec, CVec);
}

/// Whether a generic point of `B` lies on `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Containment {
    BContainedInA,
    Proceed,
}

/// Membership test of a witness point of `B` (a generic point of `B`) in `A`.
pub fn containment_precheck(problem: &DiagonalProblem, opts: &RunOptions) -> Result<Containment, DiagonalError> {
    let beta = &problem.w_b.points()[0];
    let seed = derived_rng(problem.seed, STREAM_MEMBER, u64::MAX).random::<u64>();
    let r = member(&problem.w_a, beta, opts.member_tol, seed, &opts.track)?;
    Ok(if r.member { Containment::BContainedInA } else { Containment::Proceed })
}

/// Intrinsic cascade with default options.
pub fn run_cascade(problem: &DiagonalProblem) -> Result<WitnessSuperset, DiagonalError> {
    run(problem, Mode::Intrinsic, &RunOptions::default())
}

/// Extrinsic cascade with default options.
pub fn run_cascade_extrinsic(problem: &DiagonalProblem) -> Result<WitnessSuperset, DiagonalError> {
    run(problem, Mode::Extrinsic, &RunOptions::default())
}

/// Runs the cascade. If any path fails numerically, the whole cascade is
/// repeated once with fresh γ constants; failures that persist are counted
/// in [`WitnessSuperset::failed_paths`].
pub fn run(problem: &DiagonalProblem, mode: Mode, opts: &RunOptions) -> Result<WitnessSuperset, DiagonalError> {
    opts.track.validate().map_err(DiagonalError::Invalid)?;
    let clock = Instant::now();
    let rd = initialize(problem)?;
    let setup = clock.elapsed().as_secs_f64();
    let mut out = run_with(problem, &rd, mode, opts)?;
    if out.failed_paths > 0 {
        log::warn!("{} path(s) failed; restarting with fresh γ", out.failed_paths);
        out = run_with(problem, &rd.with_fresh_gammas(problem.seed, 1), mode, opts)?;
        out.restarts = 1;
    }
    out.setup_seconds += setup;
    out.total_seconds = clock.elapsed().as_secs_f64();
    Ok(out)
}

/// One pass of the cascade with the given random data.
pub fn run_with(
    problem: &DiagonalProblem,
    rd: &RandomData,
    mode: Mode,
    opts: &RunOptions,
) -> Result<WitnessSuperset, DiagonalError> {
    let clock = Instant::now();
    let sf = combine(problem.f_a(), problem.f_b(), &rd.m, &rd.n)?;
    let mut engine: Box<dyn Engine + '_> = match mode {
        Mode::Intrinsic => Box::new(intrinsic::IntrinsicEngine::new(problem, rd, &sf, &opts.track)?),
        Mode::Extrinsic => Box::new(extrinsic::ExtrinsicEngine::new(problem, rd, &sf, &opts.track)),
    };
    let product = problem.product_points();
    let mut out = WitnessSuperset {
        mode,
        k: problem.k(),
        a: problem.a(),
        b: problem.b(),
        hmax: problem.hmax,
        h0: problem.h0,
        tracked_vars: engine.tracked_vars(),
        levels: Vec::new(),
        stages: Vec::new(),
        witness_sets: Vec::new(),
        restarts: 0,
        failed_paths: 0,
        setup_seconds: clock.elapsed().as_secs_f64(),
        total_seconds: 0.0,
    };

    let mut level = problem.hmax;
    let mut from = None;
    let mut starts = product;
    loop {
        let clock = Instant::now();
        let results = match from {
            None => engine.start_stage(&starts)?,
            Some(i) => engine.cascade_stage(i, level, &starts)?,
        };
        let converged: Vec<&PathResult> =
            results.iter().filter(|r| r.status == PathStatus::Converged).collect();
        let points: Vec<(CVec, CVec)> = converged.iter().map(|r| engine.point(&r.endpoint)).collect();
        let class = classify(rd, &sf, &points, level, opts.classify_tol);

        let mut lr = LevelResult {
            dim: level,
            candidates: Vec::new(),
            suspect: Vec::new(),
            junk: Vec::new(),
            off_diagonal: 0,
            nonsolutions: class.nonsolutions.len(),
            slack_disagreements: class.disagreements,
            refined: class.refined,
            max_diagonal_gap: 0.0,
            max_residual: 0.0,
        };
        let mut collapsed = Vec::new();
        for w in &class.candidate_points {
            let k = problem.k();
            let gap = max_norm(&(w.rows(0, k) - w.rows(k, k)).into_owned());
            lr.max_diagonal_gap = lr.max_diagonal_gap.max(gap);
            match collapse(w) {
                Ok(x) => {
                    let fa = max_norm(&problem.f_a().evaluate(x.as_slice())?);
                    let fb = max_norm(&problem.f_b().evaluate(x.as_slice())?);
                    let sl = max_norm(&rd.slack(w, level));
                    lr.max_residual = lr.max_residual.max(fa).max(fb).max(sl);
                    collapsed.push(x);
                }
                Err(gap) => {
                    log::warn!("level {level}: candidate off the diagonal by {gap:.2e}");
                    lr.off_diagonal += 1;
                }
            }
        }
        let member_seed = derived_rng(problem.seed, STREAM_MEMBER, level as u64).random::<u64>();
        let filtered = membership::filter(&collapsed, &out.witness_sets, opts.member_tol, member_seed, &opts.track);
        lr.candidates = filtered.kept;
        lr.suspect = filtered.suspect;
        lr.junk = filtered.removed;
        if !lr.candidates.is_empty() {
            match level_witness_set(problem, rd, level, lr.candidates.clone()) {
                Ok(ws) => out.witness_sets.push(ws),
                Err(e) => log::warn!("level {level}: candidates do not form a witness set: {e}"),
            }
        }

        let failed = results.iter().filter(|r| r.status.is_failure()).count();
        out.failed_paths += failed;
        out.stages.push(StageReport {
            from_level: from,
            to_level: level,
            paths: results.len(),
            converged: converged.len(),
            diverged: results.iter().filter(|r| r.status == PathStatus::Diverged).count(),
            failed,
            statuses: results.iter().map(|r| r.status).collect(),
            steps: results.iter().map(|r| r.steps_taken).sum(),
            rejected_steps: results.iter().map(|r| r.rejected_steps).sum(),
            seconds: clock.elapsed().as_secs_f64(),
            endpoints: points.into_iter().map(|(w, _)| w).collect(),
        });
        starts = class.nonsolutions.iter().map(|&i| converged[i].endpoint.clone()).collect();
        out.levels.push(lr);
        if level == problem.h0 || starts.is_empty() {
            break;
        }
        from = Some(level);
        level -= 1;
    }
    Ok(out)
}

/// Greedy nearest-neighbour matching distance (max-norm) between two point
/// multisets; infinite when the sizes differ.
pub fn multiset_distance(xs: &[CVec], ys: &[CVec]) -> f64 {
    if xs.len() != ys.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; ys.len()];
    let mut worst: f64 = 0.0;
    for x in xs {
        let best = ys
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, max_norm(&(x - y))))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((i, d)) => {
                used[i] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Largest matching distance between two runs over the converged endpoints
/// of every stage and the collapsed candidates of every level.
pub fn match_distance(x: &WitnessSuperset, y: &WitnessSuperset) -> f64 {
    if x.stages.len() != y.stages.len() || x.levels.len() != y.levels.len() {
        return f64::INFINITY;
    }
    let stages = x
        .stages
        .iter()
        .zip(&y.stages)
        .map(|(s, t)| multiset_distance(&s.endpoints, &t.endpoints));
    let levels = x
        .levels
        .iter()
        .zip(&y.levels)
        .map(|(s, t)| multiset_distance(&s.candidates, &t.candidates));
    stages.chain(levels).fold(0.0, f64::max)
}

/// Residual of the extrinsic cascade equations
/// `A w + B (P_j + τ P_ji)(C w + d)` at `w = W_{i,j}(t, y)`, relative to
/// `1 + ‖w‖`, with `τ = t / (t + γ(1 − t))`.
pub fn plane_equivalence_residual(rd: &RandomData, plane: &CascadePlane, t: f64, y: &CVec) -> f64 {
    let w = plane.point(t, y);
    let tau = C64::new(t, 0.0) / (C64::new(t, 0.0) + plane.gamma * (1.0 - t));
    let mut z = &rd.c * &w + &rd.d;
    for r in 0..z.len() {
        let scale = if r < plane.j {
            C64::new(1.0, 0.0)
        } else if r < plane.i {
            tau
        } else {
            C64::new(0.0, 0.0)
        };
        z[r] *= scale;
    }
    (&rd.a * &w + &rd.b * z).norm() / (1.0 + w.norm())
}
