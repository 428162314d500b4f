//! Built-in intersection problems: the cylinder/sphere and coordinate-plane
//! examples, a synthetic hypersurface pair in C^5 for timing, and two
//! degenerate configurations (disjoint lines, a circle inside a cylinder).

use std::fmt;
use std::str::FromStr;

use crate::diagonal::{DiagonalError, DiagonalProblem};
use crate::linalg::{univariate_roots, CVec, C64};
use crate::polysys::{parse_system, Monomial, Polynomial, PolySystem};
use crate::random::{derived_rng, random_polydisk, seeded_rng};
use crate::witness::{
    witness_hypersurface, witness_linear, SliceSystem, WitnessError, WitnessSet, CONSTRUCTION_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    /// Cylinder `x² + y² = 1` against the sphere `(x + ½)² + y² + z² = 1`.
    CylinderSphere,
    /// The planes `{x = y = 0}` and `{z = w = 0}` of `[xz, xw, yz, yw] = 0`,
    /// meeting only at the origin.
    CoordinatePlanes,
    /// Random dense hypersurfaces of degrees 2 and 3 in `C^5`.
    Synthetic3,
    /// The parallel lines `{x = 0}` and `{x = 1}` in `C^2`.
    Disjoint,
    /// The cylinder against the circle `{x² + y² = 1, z = 0}` it contains.
    Containment,
}

impl Example {
    pub const ALL: [Example; 5] = [
        Example::CylinderSphere,
        Example::CoordinatePlanes,
        Example::Synthetic3,
        Example::Disjoint,
        Example::Containment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Example::CylinderSphere => "1",
            Example::CoordinatePlanes => "2",
            Example::Synthetic3 => "synthetic3",
            Example::Disjoint => "disjoint",
            Example::Containment => "containment",
        }
    }

    /// Witness sets for both inputs. Slices are drawn from `seed`.
    pub fn witness_sets(self, seed: u64) -> Result<(WitnessSet, WitnessSet), WitnessError> {
        let s = |i| derived_rng(seed, 0x6678, i);
        let sa = rand::Rng::random::<u64>(&mut s(0));
        let sb = rand::Rng::random::<u64>(&mut s(1));
        match self {
            Example::CylinderSphere => Ok((
                witness_hypersurface(&sys("vars: x y z; x^2 + y^2 - 1;"), sa)?,
                witness_hypersurface(&sys("vars: x y z; (x + 0.5)^2 + y^2 + z^2 - 1;"), sb)?,
            )),
            Example::CoordinatePlanes => {
                let f = sys("vars: x y z w; x*z; x*w; y*z; y*w;");
                Ok((
                    witness_linear(&sys("vars: x y z w; x; y;"), &f, sa)?,
                    witness_linear(&sys("vars: x y z w; z; w;"), &f, sb)?,
                ))
            }
            Example::Synthetic3 => {
                let mut rng = seeded_rng(0x5e3);
                let f_a = random_dense(&mut rng, 5, 2);
                let f_b = random_dense(&mut rng, 5, 3);
                Ok((witness_hypersurface(&f_a, sa)?, witness_hypersurface(&f_b, sb)?))
            }
            Example::Disjoint => Ok((
                witness_hypersurface(&sys("vars: x y; x;"), sa)?,
                witness_hypersurface(&sys("vars: x y; x - 1;"), sb)?,
            )),
            Example::Containment => Ok((
                witness_hypersurface(&sys("vars: x y z; x^2 + y^2 - 1;"), sa)?,
                circle_witness(sb)?,
            )),
        }
    }

    pub fn problem(self, seed: u64) -> Result<DiagonalProblem, DiagonalError> {
        let (a, b) = self.witness_sets(seed)?;
        DiagonalProblem::new(a, b, seed)
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Example::ALL.iter().map(|e| e.name()).collect();
                format!("unknown example `{s}` (expected one of {})", names.join(", "))
            })
    }
}

fn sys(text: &str) -> PolySystem {
    parse_system(text).expect("built-in system parses")
}

/// A polynomial in `k` variables with every monomial of total degree at
/// most `deg` and coefficients from the unit disk.
pub fn random_dense(rng: &mut impl rand::Rng, k: usize, deg: u32) -> PolySystem {
    fn exponents(k: usize, deg: u32) -> Vec<Vec<u32>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for e in 0..=deg {
            for mut rest in exponents(k - 1, deg - e) {
                rest.insert(0, e);
                out.push(rest);
            }
        }
        out
    }
    let terms: Vec<Monomial> = exponents(k, deg)
        .into_iter()
        .map(|e| Monomial { coeff: random_polydisk(rng), exponents: e })
        .collect();
    let vars = (1..=k).map(|i| format!("x{i}")).collect();
    PolySystem::new(vars, vec![Polynomial::from_terms(terms)]).expect("well-formed")
}

/// Witness set of the circle `{x² + y² − 1 = 0, z = 0}` in `C^3`: the slice
/// hyperplane restricted to `z = 0` is a line in the `(x, y)` plane, whose
/// two intersections with the circle solve a quadratic.
pub fn circle_witness(seed: u64) -> Result<WitnessSet, WitnessError> {
    let system = sys("vars: x y z; x^2 + y^2 - 1; z;");
    let mut rng = seeded_rng(seed);
    for _ in 0..5 {
        let slice = SliceSystem::random(&mut rng, 1, 3)?;
        let (c0, c1, o) = (slice.coeff[(0, 0)], slice.coeff[(0, 1)], slice.offset[0]);
        let scale = c0.norm_sqr() + c1.norm_sqr();
        // p + s v with c·p = −o and c·v = 0
        let p = [-o * c0.conj() / scale, -o * c1.conj() / scale];
        let v = [-c1, c0];
        let dot = |a: [C64; 2], b: [C64; 2]| a[0] * b[0] + a[1] * b[1];
        let coeffs = [dot(p, p) - 1.0, dot(p, v) * 2.0, dot(v, v)];
        let Ok(roots) = univariate_roots(&coeffs) else { continue };
        if roots.len() != 2 {
            continue;
        }
        let points = roots
            .iter()
            .map(|&s| CVec::from_vec(vec![p[0] + s * v[0], p[1] + s * v[1], C64::new(0.0, 0.0)]))
            .collect();
        if let Ok(ws) = WitnessSet::new(1, system.clone(), slice, points, CONSTRUCTION_TOL) {
            return Ok(ws);
        }
    }
    Err(WitnessError::Generation("circle slice kept degenerating".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Example::ALL {
            assert_eq!(e.name().parse::<Example>().unwrap(), e);
        }
        assert!("3".parse::<Example>().is_err());
    }

    #[test]
    fn fixture_dimensions() {
        let dims = |e: Example| {
            let (a, b) = e.witness_sets(1).unwrap();
            (a.ambient_dim(), a.dim(), a.degree(), b.dim(), b.degree())
        };
        assert_eq!(dims(Example::CylinderSphere), (3, 2, 2, 2, 2));
        assert_eq!(dims(Example::CoordinatePlanes), (4, 2, 1, 2, 1));
        assert_eq!(dims(Example::Synthetic3), (5, 4, 2, 4, 3));
        assert_eq!(dims(Example::Disjoint), (2, 1, 1, 1, 1));
        assert_eq!(dims(Example::Containment), (3, 2, 2, 1, 2));
    }

    #[test]
    fn circle_points_solve_both_equations() {
        let ws = circle_witness(4).unwrap();
        for p in ws.points() {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).norm() < 1e-12);
            assert_eq!(p[2], C64::new(0.0, 0.0));
        }
    }
}
