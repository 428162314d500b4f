//! Witness supersets for the intersection of two irreducible algebraic sets
//! by diagonal homotopy cascades, tracked either in intrinsic coordinates on
//! moving affine planes or extrinsically with slack variables.

pub mod linalg;
pub mod polysys;
pub mod random;
pub mod tracker;
pub mod witness;
pub mod diagonal;
pub mod fixtures;
pub mod membership;
pub mod report;
