//! Complex multivariate polynomial systems: dense exponent-vector monomials,
//! deterministic evaluation, analytic Jacobians and the randomized product
//! system used by the diagonal homotopy.

mod parse;

use std::fmt;

use crate::linalg::{CMat, CVec, C64};

pub use parse::{parse_constant, parse_polynomials, parse_system, ParseError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PolyError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("point has length {got}, system has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// A single term `coeff * x_1^e_1 * ... * x_n^e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn eval(&self, x: &[C64]) -> C64 {
        let mut acc = self.coeff;
        for (xi, &e) in x.iter().zip(&self.exponents) {
            if e > 0 {
                acc *= xi.powu(e);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    /// Builds a polynomial from terms, merging repeated exponent vectors
    /// (first occurrence keeps its position) and dropping exact zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut merged: Vec<Monomial> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.exponents == t.exponents) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|m| m.coeff != C64::new(0.0, 0.0));
        Polynomial { terms: merged }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, t| acc + t.eval(x))
    }

    /// Value and gradient in one sweep over the terms.
    fn eval_with_gradient(&self, x: &[C64], grad: &mut [C64]) -> C64 {
        let n = x.len();
        let mut value = C64::new(0.0, 0.0);
        for t in &self.terms {
            value += t.eval(x);
            for j in 0..n {
                let ej = t.exponents[j];
                if ej == 0 {
                    continue;
                }
                let mut d = t.coeff * ej as f64;
                for (l, (xl, &el)) in x.iter().zip(&t.exponents).enumerate() {
                    let p = if l == j { el - 1 } else { el };
                    if p > 0 {
                        d *= xl.powu(p);
                    }
                }
                grad[j] += d;
            }
        }
        value
    }
}

/// An immutable system of polynomials over named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    vars: Vec<String>,
    polys: Vec<Polynomial>,
}

impl PolySystem {
    pub fn new(vars: Vec<String>, polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        if vars.is_empty() {
            return Err(PolyError::Invalid("no variables".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(PolyError::Invalid(format!("duplicate variable `{v}`")));
            }
        }
        for p in &polys {
            for t in &p.terms {
                if t.exponents.len() != vars.len() {
                    return Err(PolyError::Invalid(format!(
                        "monomial has {} exponents, expected {}",
                        t.exponents.len(),
                        vars.len()
                    )));
                }
                if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                    return Err(PolyError::Invalid("non-finite coefficient".into()));
                }
            }
        }
        Ok(PolySystem { vars, polys })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_polys(&self) -> usize {
        self.polys.len()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.vars
    }

    pub fn polynomials(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn max_degree(&self) -> u32 {
        self.polys.iter().map(Polynomial::total_degree).max().unwrap_or(0)
    }

    fn check_len(&self, n: usize) -> Result<(), PolyError> {
        if n != self.num_vars() {
            return Err(PolyError::DimensionMismatch { expected: self.num_vars(), got: n });
        }
        Ok(())
    }

    pub fn evaluate(&self, point: &[C64]) -> Result<CVec, PolyError> {
        self.check_len(point.len())?;
        Ok(CVec::from_iterator(self.polys.len(), self.polys.iter().map(|p| p.eval(point))))
    }

    pub fn jacobian(&self, point: &[C64]) -> Result<CMat, PolyError> {
        Ok(self.evaluate_with_jacobian(point)?.1)
    }

    pub fn evaluate_with_jacobian(&self, point: &[C64]) -> Result<(CVec, CMat), PolyError> {
        self.check_len(point.len())?;
        let n = self.num_vars();
        let mut values = CVec::zeros(self.polys.len());
        let mut jac = CMat::zeros(self.polys.len(), n);
        let mut grad = vec![C64::new(0.0, 0.0); n];
        for (i, p) in self.polys.iter().enumerate() {
            grad.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
            values[i] = p.eval_with_gradient(point, &mut grad);
            for j in 0..n {
                jac[(i, j)] = grad[j];
            }
        }
        Ok((values, jac))
    }

    /// Concatenates the equations of two systems over the same variables.
    pub fn stack(&self, other: &PolySystem) -> Result<PolySystem, PolyError> {
        if other.num_vars() != self.num_vars() {
            return Err(PolyError::Shape(format!(
                "cannot stack systems in {} and {} variables",
                self.num_vars(),
                other.num_vars()
            )));
        }
        let mut polys = self.polys.clone();
        polys.extend(other.polys.iter().cloned());
        PolySystem::new(self.vars.clone(), polys)
    }
}

impl fmt::Display for PolySystem {
    /// Writes the system in the same grammar `parse_system` accepts.
    /// Coefficients use shortest round-trip float formatting, so parsing the
    /// output reproduces the system exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars: {};", self.vars.join(" "))?;
        for p in &self.polys {
            if p.terms.is_empty() {
                writeln!(f, "0;")?;
                continue;
            }
            let mut first = true;
            for t in &p.terms {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                if t.coeff.im == 0.0 {
                    write!(f, "{:e}", t.coeff.re)?;
                } else {
                    write!(f, "({:e} + {:e}*i)", t.coeff.re, t.coeff.im)?;
                }
                for (name, &e) in self.vars.iter().zip(&t.exponents) {
                    match e {
                        0 => {}
                        1 => write!(f, "*{name}")?,
                        _ => write!(f, "*{name}^{e}")?,
                    }
                }
            }
            writeln!(f, ";")?;
        }
        Ok(())
    }
}

/// Builds the randomized product system `[M f_A(u); N f_B(v)]` over the
/// doubled coordinates `w = (u, v)`: the first `k` variables are `u`, the
/// last `k` are `v`.
pub fn combine(
    f_a: &PolySystem,
    f_b: &PolySystem,
    m: &CMat,
    n: &CMat,
) -> Result<CombinedSystem, PolyError> {
    if f_a.num_vars() != f_b.num_vars() {
        return Err(PolyError::Shape(format!(
            "f_A has {} variables, f_B has {}",
            f_a.num_vars(),
            f_b.num_vars()
        )));
    }
    if m.ncols() != f_a.num_polys() {
        return Err(PolyError::Shape(format!(
            "M has {} columns but f_A has {} equations",
            m.ncols(),
            f_a.num_polys()
        )));
    }
    if n.ncols() != f_b.num_polys() {
        return Err(PolyError::Shape(format!(
            "N has {} columns but f_B has {} equations",
            n.ncols(),
            f_b.num_polys()
        )));
    }
    Ok(CombinedSystem { f_a: f_a.clone(), f_b: f_b.clone(), m: m.clone(), n: n.clone() })
}

/// The system `𝒮F(w) = [M f_A(u); N f_B(v)]` in `2k` variables.
///
/// Kept in factored form: evaluation runs `f_A`, `f_B` once and applies the
/// random matrices afterwards, which is cheaper than expanding the products.
#[derive(Debug, Clone)]
pub struct CombinedSystem {
    f_a: PolySystem,
    f_b: PolySystem,
    m: CMat,
    n: CMat,
}

impl CombinedSystem {
    pub fn ambient_dim(&self) -> usize {
        self.f_a.num_vars()
    }

    pub fn num_vars(&self) -> usize {
        2 * self.ambient_dim()
    }

    pub fn num_equations(&self) -> usize {
        self.m.nrows() + self.n.nrows()
    }

    pub fn evaluate(&self, w: &[C64]) -> Result<CVec, PolyError> {
        if w.len() != self.num_vars() {
            return Err(PolyError::DimensionMismatch { expected: self.num_vars(), got: w.len() });
        }
        let k = self.ambient_dim();
        let fa = &self.m * self.f_a.evaluate(&w[..k])?;
        let fb = &self.n * self.f_b.evaluate(&w[k..])?;
        let mut out = CVec::zeros(self.num_equations());
        out.rows_mut(0, fa.len()).copy_from(&fa);
        out.rows_mut(fa.len(), fb.len()).copy_from(&fb);
        Ok(out)
    }

    pub fn evaluate_with_jacobian(&self, w: &[C64]) -> Result<(CVec, CMat), PolyError> {
        if w.len() != self.num_vars() {
            return Err(PolyError::DimensionMismatch { expected: self.num_vars(), got: w.len() });
        }
        let k = self.ambient_dim();
        let (va, ja) = self.f_a.evaluate_with_jacobian(&w[..k])?;
        let (vb, jb) = self.f_b.evaluate_with_jacobian(&w[k..])?;
        let (ra, rb) = (self.m.nrows(), self.n.nrows());
        let mut values = CVec::zeros(ra + rb);
        values.rows_mut(0, ra).copy_from(&(&self.m * va));
        values.rows_mut(ra, rb).copy_from(&(&self.n * vb));
        let mut jac = CMat::zeros(ra + rb, 2 * k);
        jac.view_mut((0, 0), (ra, k)).copy_from(&(&self.m * ja));
        jac.view_mut((ra, k), (rb, k)).copy_from(&(&self.n * jb));
        Ok((values, jac))
    }

    /// Expands the combined system into an explicit [`PolySystem`] over
    /// variables `u_*` then `v_*`.
    pub fn to_poly_system(&self) -> PolySystem {
        let k = self.ambient_dim();
        let names = self.f_a.variable_names();
        let mut vars: Vec<String> = names.iter().map(|s| format!("{s}_u")).collect();
        vars.extend(names.iter().map(|s| format!("{s}_v")));
        let lift = |p: &Polynomial, scale: C64, offset: usize| -> Vec<Monomial> {
            p.terms
                .iter()
                .map(|t| {
                    let mut e = vec![0u32; 2 * k];
                    e[offset..offset + k].copy_from_slice(&t.exponents);
                    Monomial { coeff: t.coeff * scale, exponents: e }
                })
                .collect()
        };
        let mut polys = Vec::new();
        for r in 0..self.m.nrows() {
            let terms = self
                .f_a
                .polys
                .iter()
                .enumerate()
                .flat_map(|(c, p)| lift(p, self.m[(r, c)], 0));
            polys.push(Polynomial::from_terms(terms));
        }
        for r in 0..self.n.nrows() {
            let terms = self
                .f_b
                .polys
                .iter()
                .enumerate()
                .flat_map(|(c, p)| lift(p, self.n[(r, c)], k));
            polys.push(Polynomial::from_terms(terms));
        }
        PolySystem::new(vars, polys).expect("lifted system is well formed")
    }
}
