//! Witness sets: a component's dimension and degree, a generic linear slice
//! of matching codimension and the slice's intersection points with the
//! component. Includes generators for hypersurfaces and linear components
//! and the text file format.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::linalg::{
    null_space_basis, orthonormalize_rows, solve, univariate_roots, AffinePlane, CMat, CVec,
    LinalgError, C64, RANK_TOL,
};
use crate::polysys::{parse_system, PolyError, PolySystem};
use crate::random::{random_matrix, random_vector, seeded_rng};
use crate::tracker::newton_refine;

/// Residual bound for freshly constructed witness sets.
pub const CONSTRUCTION_TOL: f64 = 1e-8;
/// Looser bound applied when loading files produced elsewhere.
pub const LOAD_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum WitnessError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("witness file line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("invalid witness set: {0}")]
    Invariant(String),
    #[error("witness generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The linear equations `coeff · x + offset = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSystem {
    pub coeff: CMat,
    pub offset: CVec,
}

impl SliceSystem {
    pub fn new(coeff: CMat, offset: CVec) -> Result<Self, WitnessError> {
        if coeff.nrows() != offset.len() {
            return Err(WitnessError::Invariant(format!(
                "slice has {} rows but {} offsets",
                coeff.nrows(),
                offset.len()
            )));
        }
        if coeff.nrows() > 0 && null_space_basis(&coeff.adjoint(), RANK_TOL).ncols() > 0 {
            return Err(WitnessError::Invariant("slice equations are rank deficient".into()));
        }
        Ok(SliceSystem { coeff, offset })
    }

    /// `rows` random hyperplanes in `C^k`, rows orthonormalized.
    pub fn random(rng: &mut impl Rng, rows: usize, k: usize) -> Result<Self, WitnessError> {
        let coeff = orthonormalize_rows(&random_matrix(rng, rows, k))?;
        SliceSystem::new(coeff, random_vector(rng, rows))
    }

    /// Random hyperplanes all passing through `point`.
    pub fn random_through(rng: &mut impl Rng, rows: usize, point: &CVec) -> Result<Self, WitnessError> {
        let coeff = orthonormalize_rows(&random_matrix(rng, rows, point.len()))?;
        let offset = -(&coeff * point);
        SliceSystem::new(coeff, offset)
    }

    pub fn num_equations(&self) -> usize {
        self.coeff.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.coeff.ncols()
    }

    pub fn evaluate(&self, x: &CVec) -> CVec {
        &self.coeff * x + &self.offset
    }

    /// The solution set of the slice as an affine plane.
    pub fn plane(&self) -> Result<AffinePlane, LinalgError> {
        AffinePlane::from_equations(&self.coeff, &self.offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSet {
    ambient_dim: usize,
    dim: usize,
    system: PolySystem,
    slice: SliceSystem,
    points: Vec<CVec>,
}

fn max_abs(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl WitnessSet {
    /// Validates and assembles a witness set. Every point must satisfy the
    /// system and the slice to `tol · (1 + ‖x‖∞)`.
    pub fn new(
        dim: usize,
        system: PolySystem,
        slice: SliceSystem,
        points: Vec<CVec>,
        tol: f64,
    ) -> Result<Self, WitnessError> {
        let ambient_dim = system.num_vars();
        if dim > ambient_dim {
            return Err(WitnessError::Invariant(format!(
                "dimension {dim} exceeds ambient dimension {ambient_dim}"
            )));
        }
        if slice.ambient_dim() != ambient_dim || slice.num_equations() != dim {
            return Err(WitnessError::Invariant(format!(
                "slice is {}×{}, expected {dim}×{ambient_dim}",
                slice.num_equations(),
                slice.ambient_dim()
            )));
        }
        if points.is_empty() {
            return Err(WitnessError::Invariant("witness set has no points".into()));
        }
        let ws = WitnessSet { ambient_dim, dim, system, slice, points };
        for (idx, p) in ws.points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(WitnessError::Invariant(format!(
                    "point {idx} has length {}, expected {ambient_dim}",
                    p.len()
                )));
            }
            let r = ws.residual(p)?;
            if !(r <= tol * (1.0 + max_abs(p))) {
                return Err(WitnessError::Invariant(format!(
                    "point {idx} has residual {r:.3e} above tolerance {tol:.1e}"
                )));
            }
        }
        Ok(ws)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.dim
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn system(&self) -> &PolySystem {
        &self.system
    }

    pub fn slice(&self) -> &SliceSystem {
        &self.slice
    }

    pub fn points(&self) -> &[CVec] {
        &self.points
    }

    /// Largest absolute entry of `[f(x); L(x)]`.
    pub fn residual(&self, x: &CVec) -> Result<f64, WitnessError> {
        let f = self.system.evaluate(x.as_slice())?;
        Ok(max_abs(&f).max(max_abs(&self.slice.evaluate(x))))
    }
}

/// Witness set of the hypersurface `f = 0` in `C^k`.
///
/// The slice is `k − 1` random hyperplanes meeting in a line `p + s·v`; `f`
/// restricted to the line is interpolated at the `(deg+1)`-th roots of unity
/// (a Vandermonde system whose inverse is the discrete Fourier transform)
/// and its roots give the witness points.
pub fn witness_hypersurface(f: &PolySystem, seed: u64) -> Result<WitnessSet, WitnessError> {
    if f.num_polys() != 1 {
        return Err(WitnessError::Generation(format!(
            "hypersurface needs exactly one polynomial, got {}",
            f.num_polys()
        )));
    }
    let degree = f.max_degree() as usize;
    if degree == 0 {
        return Err(WitnessError::Generation("polynomial is constant".into()));
    }
    let k = f.num_vars();
    let mut rng = seeded_rng(seed);
    let mut last_err = String::new();
    for attempt in 0..5 {
        let slice = SliceSystem::random(&mut rng, k - 1, k)?;
        let line = slice.plane()?;
        let p = line.offset().clone();
        let v = line.basis().column(0).into_owned();

        let n = degree + 1;
        let nodes: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64))
            .collect();
        let samples: Vec<C64> = nodes
            .iter()
            .map(|&s| f.evaluate((&p + &v * s).as_slice()).map(|r| r[0]))
            .collect::<Result<_, _>>()?;
        let coeffs: Vec<C64> = (0..n)
            .map(|e| {
                samples
                    .iter()
                    .zip(&nodes)
                    .map(|(g, s)| g * s.powu(e as u32).conj())
                    .sum::<C64>()
                    / n as f64
            })
            .collect();
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if coeffs[degree].norm() <= 1e-12 * scale {
            last_err = format!("attempt {attempt}: leading coefficient collapsed");
            continue;
        }
        let roots = univariate_roots(&coeffs)?;
        if roots.len() != degree {
            last_err = format!("attempt {attempt}: found {} of {degree} roots", roots.len());
            continue;
        }
        let square = |x: &CVec| -> (CVec, CMat) {
            let (fv, fj) = f.evaluate_with_jacobian(x.as_slice()).expect("length checked");
            let mut value = CVec::zeros(k);
            let mut jac = CMat::zeros(k, k);
            value[0] = fv[0];
            jac.row_mut(0).copy_from(&fj.row(0));
            value.rows_mut(1, k - 1).copy_from(&slice.evaluate(x));
            jac.view_mut((1, 0), (k - 1, k)).copy_from(&slice.coeff);
            (value, jac)
        };
        let points: Vec<CVec> = roots
            .iter()
            .map(|&s| newton_refine(square, &(&p + &v * s), CONSTRUCTION_TOL * 1e-3, 3).y)
            .collect();
        match WitnessSet::new(k - 1, f.clone(), slice, points, CONSTRUCTION_TOL) {
            Ok(ws) => return Ok(ws),
            Err(e) => last_err = format!("attempt {attempt}: {e}"),
        }
    }
    Err(WitnessError::Generation(last_err))
}

/// Splits a system of polynomials of degree at most one into `(A, b)` with
/// the equations reading `A x + b = 0`.
pub fn linear_parts(eqs: &PolySystem) -> Result<(CMat, CVec), WitnessError> {
    let k = eqs.num_vars();
    let mut a = CMat::zeros(eqs.num_polys(), k);
    let mut b = CVec::zeros(eqs.num_polys());
    for (r, p) in eqs.polynomials().iter().enumerate() {
        for t in p.terms() {
            match t.degree() {
                0 => b[r] += t.coeff,
                1 => {
                    let j = t.exponents.iter().position(|&e| e == 1).expect("degree one");
                    a[(r, j)] += t.coeff;
                }
                _ => {
                    return Err(WitnessError::Generation(format!(
                        "equation {} is not linear",
                        r + 1
                    )))
                }
            }
        }
    }
    Ok((a, b))
}

/// Witness set of the linear component `{component_eqs = 0}` of
/// `full_system`: one point, cut out by `dim` random hyperplanes.
pub fn witness_linear(
    component_eqs: &PolySystem,
    full_system: &PolySystem,
    seed: u64,
) -> Result<WitnessSet, WitnessError> {
    let k = full_system.num_vars();
    if component_eqs.num_vars() != k {
        return Err(WitnessError::Generation(format!(
            "component lives in C^{}, system in C^{k}",
            component_eqs.num_vars()
        )));
    }
    let c = component_eqs.num_polys();
    if c == 0 || c > k {
        return Err(WitnessError::Generation(format!(
            "need 1 ≤ #equations ≤ {k}, got {c}"
        )));
    }
    let (a, b) = linear_parts(component_eqs)?;
    let dim = k - c;
    let mut rng = seeded_rng(seed);
    let slice = SliceSystem::random(&mut rng, dim, k)?;
    let mut square = CMat::zeros(k, k);
    square.view_mut((0, 0), (c, k)).copy_from(&a);
    square.view_mut((c, 0), (dim, k)).copy_from(&slice.coeff);
    let mut rhs = CVec::zeros(k);
    rhs.rows_mut(0, c).copy_from(&(-b));
    rhs.rows_mut(c, dim).copy_from(&(-&slice.offset));
    if crate::linalg::inverse_condition(&square) < 1e-12 {
        return Err(WitnessError::Generation("component equations are singular".into()));
    }
    let point = solve(&square, &rhs)
        .ok_or_else(|| WitnessError::Generation("component equations are singular".into()))?;
    let residual = max_abs(&full_system.evaluate(point.as_slice())?);
    if residual > 1e-10 * (1.0 + max_abs(&point)) {
        return Err(WitnessError::Generation(format!(
            "linear component does not solve the system (residual {residual:.2e})"
        )));
    }
    WitnessSet::new(dim, full_system.clone(), slice, vec![point], CONSTRUCTION_TOL)
}

fn push_complex(out: &mut String, z: C64) {
    let _ = write!(out, " {:.16e} {:.16e}", z.re, z.im);
}

/// Serializes to the witness file format:
///
/// ```text
/// ambient_dim: 3
/// dim: 2
/// degree: 2
/// system:
///   vars: x y z;
///   x^2 + y^2 - 1;
/// end
/// slice:
///   <re im> × ambient_dim | <re im>      # coefficients, then the offset
/// end
/// points:
///   <re im> × ambient_dim
/// end
/// ```
pub fn format_witness(ws: &WitnessSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ambient_dim: {}", ws.ambient_dim);
    let _ = writeln!(out, "dim: {}", ws.dim);
    let _ = writeln!(out, "degree: {}", ws.degree());
    out.push_str("system:\n");
    for line in ws.system.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
    out.push_str("end\nslice:\n");
    for r in 0..ws.slice.num_equations() {
        out.push(' ');
        for j in 0..ws.ambient_dim {
            push_complex(&mut out, ws.slice.coeff[(r, j)]);
        }
        out.push_str(" |");
        push_complex(&mut out, ws.slice.offset[r]);
        out.push('\n');
    }
    out.push_str("end\npoints:\n");
    for p in &ws.points {
        out.push(' ');
        for z in p.iter() {
            push_complex(&mut out, *z);
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

fn parse_complex_row(text: &str, line: usize) -> Result<Vec<C64>, WitnessError> {
    let nums: Vec<f64> = text
        .split_whitespace()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| WitnessError::Schema { line, msg: format!("bad number `{s}`") })
        })
        .collect::<Result<_, _>>()?;
    if !nums.len().is_multiple_of(2) {
        return Err(WitnessError::Schema { line, msg: "odd number of real fields".into() });
    }
    Ok(nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
}

/// Parses the witness file format and validates the result with the load
/// tolerance.
pub fn parse_witness(text: &str) -> Result<WitnessSet, WitnessError> {
    let mut ambient: Option<usize> = None;
    let mut dim: Option<usize> = None;
    let mut degree: Option<usize> = None;
    let mut system_text: Option<String> = None;
    let mut slice_rows: Vec<(usize, Vec<C64>, C64)> = Vec::new();
    let mut points: Vec<(usize, Vec<C64>)> = Vec::new();
    let mut seen_slice = false;
    let mut seen_points = false;

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((no, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| WitnessError::Schema { line: no, msg: format!("expected `key: value`, got `{line}`") })?;
        let value = value.trim();
        let mut block = |no: usize| -> Result<Vec<(usize, String)>, WitnessError> {
            if !value.is_empty() {
                return Err(WitnessError::Schema { line: no, msg: format!("`{key}:` starts a block") });
            }
            let mut body = Vec::new();
            for (n, l) in lines.by_ref() {
                if l.trim() == "end" {
                    return Ok(body);
                }
                body.push((n, l.to_string()));
            }
            Err(WitnessError::Schema { line: no, msg: format!("unterminated `{key}` block") })
        };
        let int = |no: usize| -> Result<usize, WitnessError> {
            value
                .parse()
                .map_err(|_| WitnessError::Schema { line: no, msg: format!("`{key}` needs an integer") })
        };
        match key.trim() {
            "ambient_dim" => ambient = Some(int(no)?),
            "dim" => dim = Some(int(no)?),
            "degree" => degree = Some(int(no)?),
            "system" => {
                let body = block(no)?;
                system_text = Some(body.into_iter().map(|(_, l)| l + "\n").collect());
            }
            "slice" => {
                seen_slice = true;
                for (n, l) in block(no)? {
                    let (coeffs, off) = l.split_once('|').ok_or_else(|| WitnessError::Schema {
                        line: n,
                        msg: "slice row needs `|` before the offset".into(),
                    })?;
                    let off = parse_complex_row(off, n)?;
                    if off.len() != 1 {
                        return Err(WitnessError::Schema { line: n, msg: "offset must be one complex number".into() });
                    }
                    slice_rows.push((n, parse_complex_row(coeffs, n)?, off[0]));
                }
            }
            "points" => {
                seen_points = true;
                for (n, l) in block(no)? {
                    if !l.trim().is_empty() {
                        points.push((n, parse_complex_row(&l, n)?));
                    }
                }
            }
            other => {
                return Err(WitnessError::Schema { line: no, msg: format!("unknown key `{other}`") })
            }
        }
    }

    let missing = |what: &str| WitnessError::Schema { line: 0, msg: format!("missing `{what}`") };
    let ambient = ambient.ok_or_else(|| missing("ambient_dim"))?;
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let degree = degree.ok_or_else(|| missing("degree"))?;
    let system = parse_system(&system_text.ok_or_else(|| missing("system"))?)
        .map_err(PolyError::from)?;
    if !seen_slice {
        return Err(missing("slice"));
    }
    if !seen_points {
        return Err(missing("points"));
    }
    if system.num_vars() != ambient {
        return Err(WitnessError::Invariant(format!(
            "system has {} variables but ambient_dim is {ambient}",
            system.num_vars()
        )));
    }
    let mut coeff = CMat::zeros(slice_rows.len(), ambient);
    let mut offset = CVec::zeros(slice_rows.len());
    for (r, (n, row, off)) in slice_rows.iter().enumerate() {
        if row.len() != ambient {
            return Err(WitnessError::Schema { line: *n, msg: format!("slice row has {} entries, expected {ambient}", row.len()) });
        }
        for (j, z) in row.iter().enumerate() {
            coeff[(r, j)] = *z;
        }
        offset[r] = *off;
    }
    let mut pts = Vec::with_capacity(points.len());
    for (n, p) in points {
        if p.len() != ambient {
            return Err(WitnessError::Schema { line: n, msg: format!("point has {} entries, expected {ambient}", p.len()) });
        }
        pts.push(CVec::from_vec(p));
    }
    if pts.len() != degree {
        return Err(WitnessError::Invariant(format!(
            "degree is {degree} but {} points are listed",
            pts.len()
        )));
    }
    WitnessSet::new(dim, system, SliceSystem::new(coeff, offset)?, pts, LOAD_TOL)
}

pub fn write_witness(ws: &WitnessSet, path: impl AsRef<Path>) -> Result<(), WitnessError> {
    std::fs::write(path, format_witness(ws))?;
    Ok(())
}

pub fn read_witness(path: impl AsRef<Path>) -> Result<WitnessSet, WitnessError> {
    parse_witness(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{Monomial, Polynomial};
    use crate::random::random_polydisk;

    fn sys(text: &str) -> PolySystem {
        parse_system(text).unwrap()
    }

    fn sphere() -> PolySystem {
        sys("vars: x y z; (x + 0.5)^2 + y^2 + z^2 - 1;")
    }

    #[test]
    fn sphere_has_degree_two() {
        let ws = witness_hypersurface(&sphere(), 1).unwrap();
        assert_eq!(ws.degree(), 2);
        assert_eq!(ws.dim(), 2);
        assert_eq!(ws.slice().num_equations(), 2);
        for p in ws.points() {
            assert!(ws.residual(p).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn hyperplane_has_degree_one() {
        let ws = witness_hypersurface(&sys("vars: x y z; x;"), 4).unwrap();
        assert_eq!(ws.degree(), 1);
        assert!(ws.points()[0][0].norm() < 1e-12);
    }

    #[test]
    fn constant_is_rejected() {
        assert!(witness_hypersurface(&sys("vars: x y; 3;"), 0).is_err());
        assert!(witness_hypersurface(&sys("vars: x y; x; y;"), 0).is_err());
    }

    fn random_dense(rng: &mut impl Rng, k: usize, deg: u32) -> PolySystem {
        // all monomials of total degree ≤ deg
        fn exps(k: usize, deg: u32) -> Vec<Vec<u32>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for e in 0..=deg {
                for mut rest in exps(k - 1, deg - e) {
                    rest.insert(0, e);
                    out.push(rest);
                }
            }
            out
        }
        let terms = exps(k, deg)
            .into_iter()
            .map(|e| Monomial { coeff: random_polydisk(rng), exponents: e });
        let vars = (0..k).map(|i| format!("x{i}")).collect();
        PolySystem::new(vars, vec![Polynomial::from_terms(terms)]).unwrap()
    }

    #[test]
    fn random_dense_cubic() {
        let mut rng = seeded_rng(7);
        let f = random_dense(&mut rng, 3, 3);
        let ws = witness_hypersurface(&f, 3).unwrap();
        assert_eq!(ws.degree(), 3);
        for p in ws.points() {
            assert!(f.evaluate(p.as_slice()).unwrap()[0].norm() <= 1e-8);
            assert!(ws.slice().evaluate(p).norm() <= 1e-8);
        }
    }

    #[test]
    fn point_count_equals_total_degree() {
        let mut rng = seeded_rng(8);
        for trial in 0..20 {
            let k = rng.random_range(1..=4);
            let deg = rng.random_range(1..=5);
            let f = random_dense(&mut rng, k, deg);
            let ws = witness_hypersurface(&f, trial).unwrap();
            assert_eq!(ws.degree(), deg as usize, "k={k} deg={deg}");
        }
    }

    #[test]
    fn seeds_change_slice_not_degree() {
        let a = witness_hypersurface(&sphere(), 1).unwrap();
        let b = witness_hypersurface(&sphere(), 2).unwrap();
        assert_ne!(a.slice(), b.slice());
        assert_eq!(a.degree(), b.degree());
    }

    #[test]
    fn linear_component_of_coordinate_planes() {
        let f = sys("vars: x y z w; x*z; x*w; y*z; y*w;");
        let comp = sys("vars: x y z w; x; y;");
        let ws = witness_linear(&comp, &f, 5).unwrap();
        assert_eq!((ws.dim(), ws.degree()), (2, 1));
        let p = &ws.points()[0];
        assert!(p[0].norm() < 1e-14 && p[1].norm() < 1e-14);
        assert!(max_abs(&f.evaluate(p.as_slice()).unwrap()) <= 1e-10);
    }

    #[test]
    fn linear_component_edge_cases() {
        let f = sys("vars: x y; x*y;");
        assert!(witness_linear(&sys("vars: x y; x; y; x + y;"), &f, 0).is_err());
        // not a component of the system
        assert!(witness_linear(&sys("vars: x y; x - 1;"), &f, 0).is_err());
        // not linear
        assert!(witness_linear(&sys("vars: x y; x^2;"), &f, 0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let ws = witness_hypersurface(&sphere(), 11).unwrap();
        let back = parse_witness(&format_witness(&ws)).unwrap();
        assert_eq!(back.degree(), ws.degree());
        assert_eq!(back.dim(), ws.dim());
        for (a, b) in ws.points().iter().zip(back.points()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).norm() <= 1e-15 * (1.0 + x.norm()));
            }
        }
        assert_eq!(back.slice(), ws.slice());
    }

    #[test]
    fn file_write_and_read() {
        let ws = witness_hypersurface(&sphere(), 12).unwrap();
        let dir = std::env::temp_dir().join(format!("dhom-wit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sphere.wit");
        write_witness(&ws, &path).unwrap();
        assert_eq!(read_witness(&path).unwrap().points(), ws.points());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn degree_point_mismatch_is_rejected() {
        let ws = witness_hypersurface(&sphere(), 13).unwrap();
        let text = format_witness(&ws);
        let mut lines: Vec<&str> = text.lines().collect();
        let last_point = lines.len() - 2;
        lines.remove(last_point);
        let err = parse_witness(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, WitnessError::Invariant(ref m) if m.contains("degree")), "{err}");
    }

    #[test]
    fn perturbed_point_fails_residual_check() {
        let ws = witness_hypersurface(&sphere(), 14).unwrap();
        let mut pts = ws.points().to_vec();
        pts[0][0] += C64::new(1e-3, 0.0);
        let bad = WitnessSet { points: pts, ..ws.clone() };
        let err = parse_witness(&format_witness(&bad)).unwrap_err();
        assert!(err.to_string().contains("residual"), "{err}");
    }

    #[test]
    fn schema_violations() {
        assert!(matches!(parse_witness("dim: 1\n"), Err(WitnessError::Schema { .. })));
        assert!(matches!(parse_witness("bogus: 1\n"), Err(WitnessError::Schema { .. })));
        assert!(matches!(
            parse_witness("ambient_dim: x\n"),
            Err(WitnessError::Schema { line: 1, .. })
        ));
        assert!(matches!(
            parse_witness("system:\n vars: x;\n x;\n"),
            Err(WitnessError::Schema { .. })
        ));
    }

    #[test]
    fn slice_through_point_contains_it() {
        let mut rng = seeded_rng(3);
        let p = random_vector(&mut rng, 4);
        let s = SliceSystem::random_through(&mut rng, 2, &p).unwrap();
        assert!(s.evaluate(&p).norm() < 1e-14);
    }
}
