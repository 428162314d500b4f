//! Tracking `(w, z) ∈ C^{3k}` with the cascade's linear equations imposed
//! explicitly.

use crate::linalg::{CMat, CVec, C64};
use crate::polysys::CombinedSystem;
use crate::tracker::{newton_refine, track_all, Homotopy, PathResult, TrackSettings};
use crate::witness::SliceSystem;

use super::{DiagonalError, DiagonalProblem, Engine, RandomData};

/// Shared pieces of the extrinsic systems.
struct Layout<'a> {
    sf: &'a CombinedSystem,
    rd: &'a RandomData,
    k: usize,
}

impl Layout<'_> {
    fn n(&self) -> usize {
        3 * self.k
    }

    fn split(&self, x: &CVec) -> (CVec, CVec) {
        let k2 = 2 * self.k;
        (x.rows(0, k2).into_owned(), x.rows(k2, self.k).into_owned())
    }

    fn system(&self, w: &CVec) -> (CVec, CMat) {
        self.sf.evaluate_with_jacobian(w.as_slice()).expect("length fixed by construction")
    }

    /// `[A w + B P_h z; z − D (C w + d)]` and its Jacobian, where `D` is the
    /// diagonal scaling of the slack rows.
    fn linear_rows(&self, w: &CVec, z: &CVec, h: usize, diag: &[C64]) -> (CVec, CMat) {
        let (k, ab) = (self.k, self.rd.a.nrows());
        let mut value = CVec::zeros(ab + k);
        let mut jac = CMat::zeros(ab + k, 3 * k);
        let mut top = &self.rd.a * w;
        if h > 0 {
            top += self.rd.b.columns(0, h) * z.rows(0, h);
        }
        value.rows_mut(0, ab).copy_from(&top);
        jac.view_mut((0, 0), (ab, 2 * k)).copy_from(&self.rd.a);
        jac.view_mut((0, 2 * k), (ab, h)).copy_from(&self.rd.b.columns(0, h));
        let cw = &self.rd.c * w + &self.rd.d;
        for r in 0..k {
            value[ab + r] = z[r] - diag[r] * cw[r];
            for col in 0..2 * k {
                jac[(ab + r, col)] = -diag[r] * self.rd.c[(r, col)];
            }
            jac[(ab + r, 2 * k + r)] = C64::new(1.0, 0.0);
        }
        (value, jac)
    }

    fn assemble(&self, top: (CVec, CMat), rest: (CVec, CMat)) -> (CVec, CMat) {
        let (m, n) = (top.0.len(), self.n());
        let mut value = CVec::zeros(n);
        let mut jac = CMat::zeros(n, n);
        value.rows_mut(0, m).copy_from(&top.0);
        jac.view_mut((0, 0), (m, 2 * self.k)).copy_from(&top.1);
        value.rows_mut(m, n - m).copy_from(&rest.0);
        jac.view_mut((m, 0), (n - m, n)).copy_from(&rest.1);
        (value, jac)
    }
}

fn projector(k: usize, h: usize) -> Vec<C64> {
    (0..k).map(|r| C64::new(if r < h { 1.0 } else { 0.0 }, 0.0)).collect()
}

/// `[𝒮F(w); (1 − t)[A w + B P_h z; z − P_h(C w + d)] + tγ[L_A(u); L_B(v); z]]`.
struct StartHomotopy<'a> {
    lay: Layout<'a>,
    l_a: &'a SliceSystem,
    l_b: &'a SliceSystem,
    hmax: usize,
    gamma: C64,
}

impl StartHomotopy<'_> {
    fn start_rows(&self, w: &CVec, z: &CVec) -> (CVec, CMat) {
        let k = self.lay.k;
        let (a, b) = (self.l_a.num_equations(), self.l_b.num_equations());
        let mut value = CVec::zeros(a + b + k);
        let mut jac = CMat::zeros(a + b + k, 3 * k);
        value.rows_mut(0, a).copy_from(&self.l_a.evaluate(&w.rows(0, k).into_owned()));
        value.rows_mut(a, b).copy_from(&self.l_b.evaluate(&w.rows(k, k).into_owned()));
        value.rows_mut(a + b, k).copy_from(z);
        jac.view_mut((0, 0), (a, k)).copy_from(&self.l_a.coeff);
        jac.view_mut((a, k), (b, k)).copy_from(&self.l_b.coeff);
        for r in 0..k {
            jac[(a + b + r, 2 * k + r)] = C64::new(1.0, 0.0);
        }
        (value, jac)
    }

    fn parts(&self, x: &CVec) -> ((CVec, CMat), (CVec, CMat), (CVec, CMat)) {
        let (w, z) = self.lay.split(x);
        let target = self.lay.linear_rows(&w, &z, self.hmax, &projector(self.lay.k, self.hmax));
        (self.lay.system(&w), target, self.start_rows(&w, &z))
    }
}

impl Homotopy for StartHomotopy<'_> {
    fn dim(&self) -> usize {
        self.lay.n()
    }

    fn eval(&self, x: &CVec, t: f64) -> CVec {
        self.eval_and_jac(x, t).0
    }

    fn jac_y(&self, x: &CVec, t: f64) -> CMat {
        self.eval_and_jac(x, t).1
    }

    fn dt(&self, x: &CVec, _t: f64) -> CVec {
        let (top, target, start) = self.parts(x);
        let mut out = CVec::zeros(self.dim());
        let m = top.0.len();
        out.rows_mut(m, self.dim() - m).copy_from(&(start.0 * self.gamma - target.0));
        out
    }

    fn eval_and_jac(&self, x: &CVec, t: f64) -> (CVec, CMat) {
        let (top, target, start) = self.parts(x);
        let (s, g) = (C64::new(1.0 - t, 0.0), self.gamma * t);
        let rest = (target.0 * s + start.0 * g, target.1 * s + start.1 * g);
        self.lay.assemble(top, rest)
    }
}

/// `[𝒮F(w); A w + B P_i z; z − (P_j + τ P_ji)(C w + d)]`, `τ = t/(t + γ(1 − t))`.
struct CascadeHomotopy<'a> {
    lay: Layout<'a>,
    i: usize,
    j: usize,
    gamma: C64,
}

impl CascadeHomotopy<'_> {
    fn tau(&self, t: f64) -> (C64, C64) {
        let den = C64::new(t, 0.0) + self.gamma * (1.0 - t);
        (C64::new(t, 0.0) / den, self.gamma / (den * den))
    }

    fn diag(&self, tau: C64) -> Vec<C64> {
        (0..self.lay.k)
            .map(|r| {
                if r < self.j {
                    C64::new(1.0, 0.0)
                } else if r < self.i {
                    tau
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    }
}

impl Homotopy for CascadeHomotopy<'_> {
    fn dim(&self) -> usize {
        self.lay.n()
    }

    fn eval(&self, x: &CVec, t: f64) -> CVec {
        self.eval_and_jac(x, t).0
    }

    fn jac_y(&self, x: &CVec, t: f64) -> CMat {
        self.eval_and_jac(x, t).1
    }

    fn dt(&self, x: &CVec, t: f64) -> CVec {
        let (w, _) = self.lay.split(x);
        let (_, dtau) = self.tau(t);
        let cw = &self.lay.rd.c * &w + &self.lay.rd.d;
        let mut out = CVec::zeros(self.dim());
        let offset = self.dim() - self.lay.k;
        for r in self.j..self.i {
            out[offset + r] = -dtau * cw[r];
        }
        out
    }

    fn eval_and_jac(&self, x: &CVec, t: f64) -> (CVec, CMat) {
        let (w, z) = self.lay.split(x);
        let (tau, _) = self.tau(t);
        let rest = self.lay.linear_rows(&w, &z, self.i, &self.diag(tau));
        self.lay.assemble(self.lay.system(&w), rest)
    }
}

pub(super) struct ExtrinsicEngine<'a> {
    sf: &'a CombinedSystem,
    rd: &'a RandomData,
    l_a: &'a SliceSystem,
    l_b: &'a SliceSystem,
    k: usize,
    hmax: usize,
    settings: TrackSettings,
}

impl<'a> ExtrinsicEngine<'a> {
    pub(super) fn new(
        problem: &'a DiagonalProblem,
        rd: &'a RandomData,
        sf: &'a CombinedSystem,
        settings: &TrackSettings,
    ) -> Self {
        ExtrinsicEngine {
            sf,
            rd,
            l_a: problem.witness_a().slice(),
            l_b: problem.witness_b().slice(),
            k: problem.k(),
            hmax: problem.hmax(),
            settings: *settings,
        }
    }

    fn layout(&self) -> Layout<'a> {
        Layout { sf: self.sf, rd: self.rd, k: self.k }
    }
}

impl Engine for ExtrinsicEngine<'_> {
    fn tracked_vars(&self) -> usize {
        3 * self.k
    }

    fn start_stage(&mut self, product: &[CVec]) -> Result<Vec<PathResult>, DiagonalError> {
        let h = StartHomotopy {
            lay: self.layout(),
            l_a: self.l_a,
            l_b: self.l_b,
            hmax: self.hmax,
            gamma: self.rd.gamma_start,
        };
        let starts: Vec<CVec> = product
            .iter()
            .map(|w| {
                let mut x = CVec::zeros(3 * self.k);
                x.rows_mut(0, 2 * self.k).copy_from(w);
                newton_refine(|x| h.eval_and_jac(x, 1.0), &x, self.settings.refine_tol, 3).y
            })
            .collect();
        Ok(track_all(&h, &starts, &self.settings))
    }

    fn cascade_stage(&mut self, i: usize, j: usize, starts: &[CVec]) -> Result<Vec<PathResult>, DiagonalError> {
        let h = CascadeHomotopy { lay: self.layout(), i, j, gamma: self.rd.cascade_gamma(i) };
        Ok(track_all(&h, starts, &self.settings))
    }

    fn point(&self, endpoint: &CVec) -> (CVec, CVec) {
        self.layout().split(endpoint)
    }
}
