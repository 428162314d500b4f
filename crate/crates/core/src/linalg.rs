//! Dense complex linear algebra: null spaces, affine planes in intrinsic
//! coordinates, the constant offset of the cascade and the E/F/G bases that
//! tie consecutive cascade levels together, plus univariate root finding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default numerical rank cutoff, relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("degenerate random data: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point lies {distance:.3e} off the plane (tolerance {tol:.1e})")]
    OffPlane { distance: f64, tol: f64 },
    #[error("leading coefficient vanishes for every degree")]
    ZeroPolynomial,
}

/// Singular value decomposition `m = U Σ Vᴴ` with singular values in
/// descending order. `v` is always the full `n × n` unitary factor; `u` holds
/// one column per singular value (zero columns where `σ = 0`).
struct OrderedSvd {
    sigma: Vec<f64>,
    u: CMat,
    v: CMat,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of `m` are orthogonalized pairwise by unitary plane rotations
/// accumulated into `V`; the column norms of `m V` are the singular values.
/// Works for any shape and delivers the full `V`, which the null-space
/// routines need for wide matrices.
fn ordered_svd(m: &CMat) -> OrderedSvd {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = CMat::identity(n, n);
    // columns below this norm are numerically zero; rotating them only
    // accumulates roundoff in V
    let negligible = (1e-14 * m.norm()).powi(2);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = 1.0 / (zeta + zeta.signum() * (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let rot = |mat: &mut CMat, len: usize| {
                    for r in 0..len {
                        let xp = mat[(r, p)];
                        let xq = mat[(r, q)] * phase.conj();
                        mat[(r, p)] = xp * c - xq * s;
                        mat[(r, q)] = xp * s + xq * c;
                    }
                };
                rot(&mut a, rows);
                rot(&mut v, n);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|c| a.column(c).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let v = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    let u = CMat::from_fn(rows, n, |r, c| {
        let s = sigma[c];
        if s > 0.0 {
            a[(r, order[c])] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OrderedSvd { sigma, u, v }
}

/// Singular values of `m`, largest first. Wide matrices report `ncols`
/// values, the trailing ones zero.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let s = ordered_svd(m).sigma;
    s.into_iter().take(m.nrows().max(1).min(m.ncols())).collect()
}

/// Orthonormal basis of the null space of `m`, one column per direction.
///
/// The numerical rank counts singular values above `rank_tol` times the
/// largest one. A zero matrix yields the identity.
pub fn null_space_basis(m: &CMat, rank_tol: f64) -> CMat {
    let n = m.ncols();
    if m.nrows() == 0 || m.iter().all(|z| z.norm() == 0.0) {
        return CMat::identity(n, n);
    }
    let svd = ordered_svd(m);
    let smax = svd.sigma[0];
    let rank = svd.sigma.iter().filter(|&&s| s > rank_tol * smax).count();
    svd.v.columns(rank, n - rank).into_owned()
}

/// Orthonormal basis for the span of the `count` dominant left singular
/// directions of `m`, with the smallest retained singular value.
fn dominant_range(m: &CMat, count: usize) -> (CMat, f64) {
    let svd = ordered_svd(m);
    let smallest = if count == 0 { f64::INFINITY } else { svd.sigma[count - 1] };
    (svd.u.columns(0, count).into_owned(), smallest)
}

/// Rows of `m` made orthonormal by modified Gram–Schmidt. Fails when the
/// rows are numerically dependent.
pub fn orthonormalize_rows(m: &CMat) -> Result<CMat, LinalgError> {
    let mut out = m.clone();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for r in 0..out.nrows() {
        for prev in 0..r {
            let proj = out.row(prev).conjugate().dot(&out.row(r));
            let sub = out.row(prev) * proj;
            let mut row = out.row_mut(r);
            row -= sub;
        }
        let norm = out.row(r).norm();
        if norm <= 1e-12 * scale {
            return Err(LinalgError::Degenerate("rows are linearly dependent".into()));
        }
        out.row_mut(r).unscale_mut(norm);
    }
    Ok(out)
}

/// Square solve by LU with partial pivoting. `None` if a pivot vanishes.
pub fn solve(a: &CMat, b: &CVec) -> Option<CVec> {
    a.clone().lu().solve(b)
}

/// Moore–Penrose pseudo-inverse, truncating singular values below
/// `RANK_TOL` relative.
pub fn pseudo_inverse(a: &CMat) -> CMat {
    let svd = ordered_svd(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s > RANK_TOL * smax && s > 0.0 {
            out += svd.v.column(k) * svd.u.column(k).adjoint() / C64::new(s, 0.0);
        }
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &CMat, b: &CVec) -> CVec {
    pseudo_inverse(a) * b
}

/// Ratio of smallest to largest singular value; 0 for singular input.
pub fn inverse_condition(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Result of the particular-solution solve: the offset shared by every
/// cascade plane, and whether it collapsed to zero because `d = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticularSolution {
    pub epsilon: CVec,
    pub degenerate: bool,
}

/// Solves `[I -I; C] ε = [0; -d]` for the unique point on the diagonal with
/// `C ε + d = 0`.
pub fn particular_solution_epsilon(c: &CMat, d: &CVec) -> Result<ParticularSolution, LinalgError> {
    let k = d.len();
    if c.shape() != (k, 2 * k) {
        return Err(LinalgError::Dimension(format!(
            "C is {:?}, expected ({k}, {})",
            c.shape(),
            2 * k
        )));
    }
    let mut stacked = CMat::zeros(2 * k, 2 * k);
    for i in 0..k {
        stacked[(i, i)] = C64::new(1.0, 0.0);
        stacked[(i, k + i)] = C64::new(-1.0, 0.0);
    }
    stacked.view_mut((k, 0), (k, 2 * k)).copy_from(c);
    if inverse_condition(&stacked) < 1e-12 {
        return Err(LinalgError::Degenerate("[I -I; C] is numerically singular".into()));
    }
    let mut rhs = CVec::zeros(2 * k);
    rhs.rows_mut(k, k).copy_from(&(-d));
    let epsilon = solve(&stacked, &rhs)
        .ok_or_else(|| LinalgError::Degenerate("[I -I; C] is singular".into()))?;
    let degenerate = d.iter().all(|z| z.norm() == 0.0);
    Ok(ParticularSolution { epsilon, degenerate })
}

/// Bases tying the null spaces of two consecutive cascade systems together:
/// `[E F]` spans `Null Y_i`, `[E G]` spans `Null Y_j`, and rows `j..i` of
/// `C F` and `C G` form the identity.
#[derive(Debug, Clone)]
pub struct EfgBasis {
    pub e: CMat,
    pub f: CMat,
    pub g: CMat,
}

/// Constructs E, F, G for levels `j < i` from `Y_i`, `Y_j` and `C`.
///
/// `E` is the joint null space; `F̂`/`Ĝ` complete it inside each null space
/// orthogonally, then get normalized by the inverse of their `(i-j)` square
/// block of `C F̂` (resp. `C Ĝ`).
pub fn basis_efg(
    y_i: &CMat,
    y_j: &CMat,
    c: &CMat,
    j: usize,
    i: usize,
) -> Result<EfgBasis, LinalgError> {
    if j >= i {
        return Err(LinalgError::Dimension(format!("need j < i, got j={j}, i={i}")));
    }
    let n = y_i.ncols();
    if y_j.shape() != y_i.shape() || c.ncols() != n || c.nrows() < i {
        return Err(LinalgError::Dimension(format!(
            "Y_i {:?}, Y_j {:?}, C {:?}",
            y_i.shape(),
            y_j.shape(),
            c.shape()
        )));
    }
    let m = n - y_i.nrows();
    let step = i - j;
    if step > m {
        return Err(LinalgError::Dimension(format!("level gap {step} exceeds m = {m}")));
    }

    let mut stacked = CMat::zeros(2 * y_i.nrows(), n);
    stacked.view_mut((0, 0), y_i.shape()).copy_from(y_i);
    stacked.view_mut((y_i.nrows(), 0), y_j.shape()).copy_from(y_j);
    let e = null_space_basis(&stacked, RANK_TOL);
    if e.ncols() != m - step {
        return Err(LinalgError::Degenerate(format!(
            "joint null space has dimension {}, expected {}",
            e.ncols(),
            m - step
        )));
    }

    let complete = |y: &CMat, label: &str| -> Result<CMat, LinalgError> {
        let null = null_space_basis(y, RANK_TOL);
        if null.ncols() != m {
            return Err(LinalgError::Degenerate(format!(
                "Null Y_{label} has dimension {}, expected {m}",
                null.ncols()
            )));
        }
        let residual = &null - &e * (e.adjoint() * &null);
        let (hat, smallest) = dominant_range(&residual, step);
        if smallest < 1e-8 {
            return Err(LinalgError::Degenerate(format!(
                "Null Y_{label} does not extend E (σ = {smallest:.2e})"
            )));
        }
        let q = (c * &hat).rows(j, step).into_owned();
        if inverse_condition(&q) < 1e-12 {
            return Err(LinalgError::Degenerate(format!("Q block for Y_{label} is singular")));
        }
        let q_inv = q
            .try_inverse()
            .ok_or_else(|| LinalgError::Degenerate(format!("Q block for Y_{label} is singular")))?;
        Ok(hat * q_inv)
    };
    let f = complete(y_i, "i")?;
    let g = complete(y_j, "j")?;
    Ok(EfgBasis { e, f, g })
}

/// The affine plane `offset + basis · y`, `y ∈ C^m`.
#[derive(Debug, Clone)]
pub struct AffinePlane {
    offset: CVec,
    basis: CMat,
    pinv: CMat,
}

impl AffinePlane {
    pub fn new(offset: CVec, basis: CMat) -> Result<Self, LinalgError> {
        if offset.len() != basis.nrows() {
            return Err(LinalgError::Dimension(format!(
                "offset has length {}, basis has {} rows",
                offset.len(),
                basis.nrows()
            )));
        }
        if basis.ncols() > 0 {
            let s = singular_values(&basis);
            if s[s.len() - 1] <= RANK_TOL * s[0] {
                return Err(LinalgError::Degenerate("plane basis is rank deficient".into()));
            }
        }
        let pinv = pseudo_inverse(&basis);
        Ok(AffinePlane { offset, basis, pinv })
    }

    /// The solution set of `coeff · x + constant = 0` as an affine plane with
    /// orthonormal basis and minimum-norm offset.
    pub fn from_equations(coeff: &CMat, constant: &CVec) -> Result<Self, LinalgError> {
        if coeff.nrows() != constant.len() {
            return Err(LinalgError::Dimension("equation count mismatch".into()));
        }
        let n = coeff.ncols();
        if coeff.nrows() > 0 {
            let s = singular_values(coeff);
            if s.len() < coeff.nrows() || s[coeff.nrows() - 1] <= RANK_TOL * s[0] {
                return Err(LinalgError::Degenerate("linear equations are rank deficient".into()));
            }
        }
        let offset = if coeff.nrows() == 0 {
            CVec::zeros(n)
        } else {
            least_squares(coeff, &(-constant))
        };
        AffinePlane::new(offset, null_space_basis(coeff, RANK_TOL))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn offset(&self) -> &CVec {
        &self.offset
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn embed(&self, y: &CVec) -> Result<CVec, LinalgError> {
        if y.len() != self.dim() {
            return Err(LinalgError::Dimension(format!(
                "intrinsic point has length {}, plane has dimension {}",
                y.len(),
                self.dim()
            )));
        }
        Ok(&self.offset + &self.basis * y)
    }

    /// Intrinsic coordinates of `point`; fails when the point is more than
    /// `tol · (1 + ‖point‖)` away from the plane.
    pub fn project(&self, point: &CVec, tol: f64) -> Result<CVec, LinalgError> {
        if point.len() != self.ambient_dim() {
            return Err(LinalgError::Dimension(format!(
                "point has length {}, plane lives in C^{}",
                point.len(),
                self.ambient_dim()
            )));
        }
        let y = &self.pinv * (point - &self.offset);
        let distance = (self.embed(&y)? - point).norm();
        let limit = tol * (1.0 + point.norm());
        if distance > limit {
            return Err(LinalgError::OffPlane { distance, tol: limit });
        }
        Ok(y)
    }
}

/// Roots of `Σ coeffs[i] z^i` (constant term first) by Aberth–Ehrlich
/// simultaneous iteration.
///
/// Leading coefficients below `1e-12` of the largest are dropped (with a
/// warning) before solving, so fewer roots than `coeffs.len() - 1` may be
/// returned.
pub fn univariate_roots(coeffs: &[C64]) -> Result<Vec<C64>, LinalgError> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(LinalgError::ZeroPolynomial);
    }
    let mut deg = coeffs.len() - 1;
    while coeffs[deg].norm() <= 1e-12 * scale {
        deg -= 1;
    }
    if deg + 1 < coeffs.len() {
        log::warn!("leading coefficient underflow: degree reduced from {} to {deg}", coeffs.len() - 1);
    }
    let p = &coeffs[..=deg];
    match deg {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-p[0] / p[1]]),
        _ => {}
    }

    let eval = |z: C64| -> (C64, C64) {
        let mut v = p[deg];
        let mut dv = C64::new(0.0, 0.0);
        for c in p[..deg].iter().rev() {
            dv = dv * z + v;
            v = v * z + c;
        }
        (v, dv)
    };

    let lead = p[deg];
    let radius = 1.0 + p[..deg].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let mut roots: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * k as f64 / deg as f64 + 0.4))
        .collect();

    for _ in 0..200 {
        let mut converged = true;
        for k in 0..deg {
            let (v, dv) = eval(roots[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulsion: C64 = (0..deg)
                .filter(|&l| l != k)
                .map(|l| (roots[k] - roots[l]).inv())
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            roots[k] -= step;
            if step.norm() >= 1e-12 * (1.0 + roots[k].norm()) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    // short Newton polish per root
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let (v, dv) = eval(*r);
            if dv.norm() == 0.0 {
                break;
            }
            let next = *r - v / dv;
            if eval(next).0.norm() < v.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}
