//! Tracking in intrinsic coordinates `y ∈ C^m` on moving affine planes.

use crate::linalg::{basis_efg, null_space_basis, AffinePlane, CMat, CVec, LinalgError, C64, RANK_TOL};
use crate::polysys::CombinedSystem;
use crate::tracker::{newton_refine, track_all, Homotopy, PathResult, TrackSettings};
use crate::witness::SliceSystem;

use super::{DiagonalError, DiagonalProblem, Engine, RandomData};

/// Points `(u, v)` with `L_A(u) = 0` and `L_B(v) = 0`, as an affine plane in
/// `C^{2k}` with orthonormal basis.
pub fn start_plane(l_a: &SliceSystem, l_b: &SliceSystem) -> Result<AffinePlane, LinalgError> {
    let k = l_a.ambient_dim();
    if l_b.ambient_dim() != k {
        return Err(LinalgError::Dimension(format!(
            "slices live in C^{} and C^{}",
            k,
            l_b.ambient_dim()
        )));
    }
    let (a, b) = (l_a.num_equations(), l_b.num_equations());
    let mut coeff = CMat::zeros(a + b, 2 * k);
    coeff.view_mut((0, 0), (a, k)).copy_from(&l_a.coeff);
    coeff.view_mut((a, k), (b, k)).copy_from(&l_b.coeff);
    let mut constant = CVec::zeros(a + b);
    constant.rows_mut(0, a).copy_from(&l_a.offset);
    constant.rows_mut(a, b).copy_from(&l_b.offset);
    AffinePlane::from_equations(&coeff, &constant)
}

/// The moving plane `ε + [E | tF + γ(1 − t)G] y` between `Null Y_i` and
/// `Null Y_j`.
#[derive(Debug, Clone)]
pub struct CascadePlane {
    pub i: usize,
    pub j: usize,
    pub e: CMat,
    pub f: CMat,
    pub g: CMat,
    pub epsilon: CVec,
    pub gamma: C64,
}

pub fn cascade_plane(rd: &RandomData, i: usize, j: usize) -> Result<CascadePlane, LinalgError> {
    let efg = basis_efg(&rd.y_h(i), &rd.y_h(j), &rd.c, j, i)?;
    Ok(CascadePlane {
        i,
        j,
        e: efg.e,
        f: efg.f,
        g: efg.g,
        epsilon: rd.epsilon.clone(),
        gamma: rd.cascade_gamma(i),
    })
}

impl CascadePlane {
    pub fn dim(&self) -> usize {
        self.e.ncols() + self.f.ncols()
    }

    pub fn basis_at(&self, t: f64) -> CMat {
        let ne = self.e.ncols();
        let mut basis = CMat::zeros(self.e.nrows(), self.dim());
        basis.columns_mut(0, ne).copy_from(&self.e);
        let moving = &self.f * C64::new(t, 0.0) + &self.g * (self.gamma * (1.0 - t));
        basis.columns_mut(ne, self.f.ncols()).copy_from(&moving);
        basis
    }

    pub fn point(&self, t: f64, y: &CVec) -> CVec {
        &self.epsilon + self.basis_at(t) * y
    }

    /// The plane at `t = 1`: `ε + [E F]`.
    pub fn start(&self) -> AffinePlane {
        AffinePlane::new(self.epsilon.clone(), self.basis_at(1.0)).expect("E, F independent")
    }

    /// The plane at `t = 0`: `ε + [E γG]`.
    pub fn end(&self) -> AffinePlane {
        AffinePlane::new(self.epsilon.clone(), self.basis_at(0.0)).expect("E, G independent")
    }
}

/// Re-expresses intrinsic points of `old` in the coordinates of `new`.
/// Fails when an embedded point is not on `new` (the planes disagree).
pub fn transform(points: &[CVec], old: &AffinePlane, new: &AffinePlane) -> Result<Vec<CVec>, LinalgError> {
    points.iter().map(|y| new.project(&old.embed(y)?, 1e-8)).collect()
}

/// `𝒮F(σ(w₁ + W₁y) + (1 − σ)(w₂ + W₂y))` with `σ = γt / (γt + 1 − t)`.
struct StartHomotopy<'a> {
    sf: &'a CombinedSystem,
    start: &'a AffinePlane,
    target: &'a AffinePlane,
    gamma: C64,
}

impl StartHomotopy<'_> {
    fn sigma(&self, t: f64) -> (C64, C64) {
        let den = self.gamma * t + (1.0 - t);
        (self.gamma * t / den, self.gamma / (den * den))
    }

    fn point(&self, y: &CVec, s: C64) -> CVec {
        (self.start.offset() + self.start.basis() * y) * s
            + (self.target.offset() + self.target.basis() * y) * (C64::new(1.0, 0.0) - s)
    }

    fn basis(&self, s: C64) -> CMat {
        self.start.basis() * s + self.target.basis() * (C64::new(1.0, 0.0) - s)
    }

    fn system(&self, w: &CVec) -> (CVec, CMat) {
        self.sf.evaluate_with_jacobian(w.as_slice()).expect("length fixed by construction")
    }
}

impl Homotopy for StartHomotopy<'_> {
    fn dim(&self) -> usize {
        self.start.dim()
    }

    fn eval(&self, y: &CVec, t: f64) -> CVec {
        let (s, _) = self.sigma(t);
        self.sf.evaluate(self.point(y, s).as_slice()).expect("length fixed by construction")
    }

    fn jac_y(&self, y: &CVec, t: f64) -> CMat {
        self.eval_and_jac(y, t).1
    }

    fn dt(&self, y: &CVec, t: f64) -> CVec {
        self.jac_and_dt(y, t).1
    }

    fn eval_and_jac(&self, y: &CVec, t: f64) -> (CVec, CMat) {
        let (s, _) = self.sigma(t);
        let (v, j) = self.system(&self.point(y, s));
        (v, j * self.basis(s))
    }

    fn jac_and_dt(&self, y: &CVec, t: f64) -> (CMat, CVec) {
        let (s, ds) = self.sigma(t);
        let (_, j) = self.system(&self.point(y, s));
        let direction = (self.start.offset() + self.start.basis() * y)
            - (self.target.offset() + self.target.basis() * y);
        let jb = &j * self.basis(s);
        (jb, j * direction * ds)
    }
}

/// `𝒮F(W_{i,j}(t, y))`.
struct CascadeHomotopy<'a> {
    sf: &'a CombinedSystem,
    plane: &'a CascadePlane,
    /// `F − γG`, the `t`-derivative of the moving block.
    moving_dt: CMat,
}

impl<'a> CascadeHomotopy<'a> {
    fn new(sf: &'a CombinedSystem, plane: &'a CascadePlane) -> Self {
        let moving_dt = &plane.f - &plane.g * plane.gamma;
        CascadeHomotopy { sf, plane, moving_dt }
    }

    fn system(&self, y: &CVec, t: f64) -> (CVec, CMat) {
        self.sf
            .evaluate_with_jacobian(self.plane.point(t, y).as_slice())
            .expect("length fixed by construction")
    }

    fn dt_from(&self, j: &CMat, y: &CVec) -> CVec {
        let ne = self.plane.e.ncols();
        j * (&self.moving_dt * y.rows(ne, y.len() - ne))
    }
}

impl Homotopy for CascadeHomotopy<'_> {
    fn dim(&self) -> usize {
        self.plane.dim()
    }

    fn eval(&self, y: &CVec, t: f64) -> CVec {
        self.sf.evaluate(self.plane.point(t, y).as_slice()).expect("length fixed by construction")
    }

    fn jac_y(&self, y: &CVec, t: f64) -> CMat {
        self.eval_and_jac(y, t).1
    }

    fn dt(&self, y: &CVec, t: f64) -> CVec {
        self.jac_and_dt(y, t).1
    }

    fn eval_and_jac(&self, y: &CVec, t: f64) -> (CVec, CMat) {
        let (v, j) = self.system(y, t);
        (v, j * self.plane.basis_at(t))
    }

    fn jac_and_dt(&self, y: &CVec, t: f64) -> (CMat, CVec) {
        let (_, j) = self.system(y, t);
        let dt = self.dt_from(&j, y);
        (j * self.plane.basis_at(t), dt)
    }
}

pub(super) struct IntrinsicEngine<'a> {
    sf: &'a CombinedSystem,
    rd: &'a RandomData,
    settings: TrackSettings,
    start: AffinePlane,
    /// Plane holding the latest endpoints.
    current: AffinePlane,
    /// The first cascade's plane, whose `t = 1` end is the start target.
    first: Option<CascadePlane>,
}

impl<'a> IntrinsicEngine<'a> {
    pub(super) fn new(
        problem: &DiagonalProblem,
        rd: &'a RandomData,
        sf: &'a CombinedSystem,
        settings: &TrackSettings,
    ) -> Result<Self, DiagonalError> {
        let start = start_plane(problem.witness_a().slice(), problem.witness_b().slice())?;
        let h = problem.hmax();
        let (target, first) = if h > problem.h0() {
            let plane = cascade_plane(rd, h, h - 1)?;
            (plane.start(), Some(plane))
        } else {
            let basis = null_space_basis(&rd.y_h(h), RANK_TOL);
            (AffinePlane::new(rd.epsilon.clone(), basis)?, None)
        };
        Ok(IntrinsicEngine { sf, rd, settings: *settings, start, current: target, first })
    }
}

impl Engine for IntrinsicEngine<'_> {
    fn tracked_vars(&self) -> usize {
        self.start.dim()
    }

    fn start_stage(&mut self, product: &[CVec]) -> Result<Vec<PathResult>, DiagonalError> {
        let h = StartHomotopy {
            sf: self.sf,
            start: &self.start,
            target: &self.current,
            gamma: self.rd.gamma_start,
        };
        let starts = product
            .iter()
            .map(|w| {
                let y = self.start.project(w, 1e-8)?;
                Ok(newton_refine(|y| h.eval_and_jac(y, 1.0), &y, self.settings.refine_tol, 3).y)
            })
            .collect::<Result<Vec<_>, LinalgError>>()?;
        Ok(track_all(&h, &starts, &self.settings))
    }

    fn cascade_stage(&mut self, i: usize, j: usize, starts: &[CVec]) -> Result<Vec<PathResult>, DiagonalError> {
        let (plane, starts) = match self.first.take() {
            Some(p) if p.i == i && p.j == j => (p, starts.to_vec()),
            _ => {
                let p = cascade_plane(self.rd, i, j)?;
                let moved = transform(starts, &self.current, &p.start())?;
                (p, moved)
            }
        };
        let h = CascadeHomotopy::new(self.sf, &plane);
        let results = track_all(&h, &starts, &self.settings);
        self.current = plane.end();
        Ok(results)
    }

    fn point(&self, endpoint: &CVec) -> (CVec, CVec) {
        let w = self.current.embed(endpoint).expect("endpoint length matches plane");
        let z = &self.rd.c * &w + &self.rd.d;
        (w, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::{initialize, tests::finite_difference_error};
    use crate::fixtures::Example;
    use crate::polysys::combine;
    use crate::random::{random_vector, seeded_rng};

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = seeded_rng(9);
        for ex in [Example::CylinderSphere, Example::CoordinatePlanes] {
            let p = ex.problem(1).unwrap();
            let rd = initialize(&p).unwrap();
            let sf = combine(p.f_a(), p.f_b(), &rd.m, &rd.n).unwrap();
            let start = start_plane(p.witness_a().slice(), p.witness_b().slice()).unwrap();
            let plane = cascade_plane(&rd, p.hmax(), p.hmax() - 1).unwrap();
            let target = plane.start();
            let sh = StartHomotopy { sf: &sf, start: &start, target: &target, gamma: rd.gamma_start };
            let ch = CascadeHomotopy::new(&sf, &plane);
            for t in [0.1, 0.5, 0.9] {
                let y = random_vector(&mut rng, p.m());
                assert!(finite_difference_error(&sh, &y, t) <= 1e-6, "{ex} start t={t}");
                assert!(finite_difference_error(&ch, &y, t) <= 1e-6, "{ex} cascade t={t}");
                let (j, dt) = ch.jac_and_dt(&y, t);
                assert_eq!((j, dt), (ch.jac_y(&y, t), ch.dt(&y, t)));
            }
        }
    }
}
