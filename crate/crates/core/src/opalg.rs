//! Finite-dimensional inversion identities used by the scaling analysis.

use crate::linalg::{frobenius, identity, singular_values, CMat, Lu};
use crate::{Error, Result, C64};

/// Outcome of inverting `A` through a projection `S`.
#[derive(Debug, Clone)]
pub enum JnOutcome {
    Inverse(CMat),
    /// `B = S - S (A + S)^{-1} S` is singular on the range of `S`, hence so is `A`.
    Singular { sigma: f64 },
}

/// Relative cutoff for singular values treated as zero.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

/// Orthonormal basis of the range of `s` (columns).
fn range_basis(s: &CMat) -> CMat {
    let n = s.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let svd = s.svd().expect("SVD failed");
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|x| **x > 1e-10 * top.max(1.0)).count();
    let u = svd.U();
    CMat::from_fn(n, rank, |i, j| u[(i, j)])
}

/// `A^{-1} = (A+S)^{-1} + (A+S)^{-1} S B^{-1} S (A+S)^{-1}` with
/// `B = S - S (A+S)^{-1} S` inverted on the range of `S`.
///
/// `S` must be a (not necessarily orthogonal) projection and `A + S` must be
/// invertible.
pub fn jn_invert(a: &CMat, s: &CMat) -> Result<JnOutcome> {
    let n = a.nrows();
    if a.ncols() != n || s.nrows() != n || s.ncols() != n {
        return Err(Error::Precondition("operands must be square and of equal size".into()));
    }
    let scale = frobenius(s).max(1.0);
    let idem = frobenius(&(s * s - s));
    if idem > 1e-10 * scale {
        return Err(Error::Precondition(format!("S is not a projection: |S^2 - S| = {idem:.3e}")));
    }
    let a_s = a + s;
    let sv = singular_values(&a_s);
    let (hi, lo) = (sv[0], *sv.last().unwrap());
    if !(lo > SINGULAR_CUTOFF * hi) {
        return Err(Error::Precondition(format!("A + S is not invertible (smallest singular value {lo:.3e})")));
    }
    let lu = Lu::new(&a_s);
    let inv = lu.inverse();
    let q = range_basis(s);
    let r = q.ncols();
    if r == 0 {
        return Ok(JnOutcome::Inverse(inv));
    }
    let b = s - s * &inv * s;
    // matrix of B restricted to Ran S in the basis q
    let br = q.adjoint() * &b * &q;
    let bsv = singular_values(&br);
    let bmin = *bsv.last().unwrap();
    if !(bmin > SINGULAR_CUTOFF * bsv[0].max(1.0)) {
        return Ok(JnOutcome::Singular { sigma: bmin });
    }
    let br_inv = Lu::new(&br).inverse();
    let middle = &q * br_inv * q.adjoint() * s;
    Ok(JnOutcome::Inverse(&inv + &inv * middle * &inv))
}

/// `(1 + A L B G)^{-1}`, the reduced factor of the Deift identity
/// `A (1 + L B G A)^{-1} = (1 + A L B G)^{-1} A`.
#[derive(Debug, Clone)]
pub struct DeiftFactor {
    pub factor: CMat,
    pub sigma_min: f64,
}

/// Reduces `(1 + L B G A)^{-1}` on the big space (`n x n`, `L` block
/// diagonal in practice) to an `N x N` problem.  Shapes: `L: n x n`,
/// `B: n x N`, `G: N x N`, `A: N x n`.  `k` only labels errors.
pub fn deift_reduce(l: &CMat, b: &CMat, g: &CMat, a: &CMat, k: C64) -> Result<DeiftFactor> {
    let n = l.nrows();
    let m = g.nrows();
    if l.ncols() != n || b.nrows() != n || b.ncols() != m || g.ncols() != m || a.nrows() != m || a.ncols() != n {
        return Err(Error::Precondition("inconsistent shapes in the reduction".into()));
    }
    let small = identity(m) + a * l * b * g;
    let sv = singular_values(&small);
    let lo = *sv.last().unwrap();
    if !(lo > SINGULAR_CUTOFF * sv[0].max(1.0)) {
        return Err(Error::SingularFactor { k, sigma: lo });
    }
    Ok(DeiftFactor { factor: Lu::new(&small).inverse(), sigma_min: lo })
}

/// `|| A (1 + L B G A)^{-1} - (1 + A L B G)^{-1} A ||_F` with a dense
/// inversion of the large side.
pub fn deift_residual(l: &CMat, b: &CMat, g: &CMat, a: &CMat, reduced: &DeiftFactor) -> f64 {
    let n = l.nrows();
    let big = identity(n) + l * b * g * a;
    let lhs = a * Lu::new(&big).inverse();
    let rhs = &reduced.factor * a;
    frobenius(&(lhs - rhs))
}

/// `(V^{-1} + Z)^{-1}`, evaluated as `(1 + V Z)^{-1} V` to avoid forming
/// `V^{-1}`; this is the lower-right block of the inverse of
/// `[[W, X], [Y, -V^{-1}]]` once the upper-left block has been eliminated.
pub fn block_inverse(v: &CMat, z: &CMat) -> Result<CMat> {
    let p = v.nrows();
    if v.ncols() != p || z.nrows() != p || z.ncols() != p {
        return Err(Error::Precondition("block operands must be square and of equal size".into()));
    }
    let sv = singular_values(v);
    if !(sv.last().copied().unwrap_or(0.0) > SINGULAR_CUTOFF * sv.first().copied().unwrap_or(0.0)) {
        return Err(Error::Precondition("V is not invertible".into()));
    }
    let m = identity(p) + v * z;
    let sm = singular_values(&m);
    let lo = *sm.last().unwrap();
    if !(lo > SINGULAR_CUTOFF * sm[0].max(1.0)) {
        return Err(Error::SingularFactor { k: C64::new(f64::NAN, 0.0), sigma: lo });
    }
    Ok(Lu::new(&m).solve(v))
}

/// Embeds the block inverse: for the `2x2` operator matrix
/// `T = [[W, X], [Y, -V^{-1}]]` with `W` invertible, the lower-right block
/// of `T^{-1}` is `-(V^{-1} + Y W^{-1} X)^{-1}`.  Returns that block via
/// [`block_inverse`] with `Z = Y W^{-1} X`.
pub fn schur_block(w: &CMat, x: &CMat, y: &CMat, v: &CMat) -> Result<CMat> {
    let wi = Lu::new(w).inverse();
    let z = y * wi * x;
    Ok(-block_inverse(v, &z)?)
}

/// Residual of [`schur_block`] against dense inversion of `T`.
pub fn block_residual(w: &CMat, x: &CMat, y: &CMat, v: &CMat) -> Result<f64> {
    let p = w.nrows();
    let q = v.nrows();
    let vi = Lu::new(v).inverse();
    let t = CMat::from_fn(p + q, p + q, |i, j| match (i < p, j < p) {
        (true, true) => w[(i, j)],
        (true, false) => x[(i, j - p)],
        (false, true) => y[(i - p, j)],
        (false, false) => -vi[(i - p, j - p)],
    });
    let ti = Lu::new(&t).inverse();
    let block = schur_block(w, x, y, v)?;
    let diff = CMat::from_fn(q, q, |i, j| ti[(p + i, p + j)] - block[(i, j)]);
    Ok(frobenius(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scaled_identity;

    fn mat(n: usize, m: usize, seed: u64) -> CMat {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(n, m, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn zero_projection_returns_plain_inverse() {
        let a = mat(4, 4, 1) + scaled_identity(4, 3.0);
        let s = CMat::zeros(4, 4);
        match jn_invert(&a, &s).unwrap() {
            JnOutcome::Inverse(inv) => assert!(frobenius(&(&a * inv - identity(4))) < 1e-13),
            _ => panic!("expected an inverse"),
        }
    }

    #[test]
    fn rejects_non_projection() {
        let a = identity(3);
        let s = scaled_identity(3, 2.0);
        assert!(matches!(jn_invert(&a, &s), Err(Error::Precondition(_))));
    }

    #[test]
    fn singular_a_is_detected() {
        // A = 1 - P with P the projection onto e_0: A + P = 1, A singular.
        let mut p = CMat::zeros(3, 3);
        p[(0, 0)] = C64::new(1.0, 0.0);
        let a = identity(3) - &p;
        assert!(matches!(jn_invert(&a, &p).unwrap(), JnOutcome::Singular { .. }));
    }

    #[test]
    fn deift_identity_small() {
        let l = mat(10, 10, 3);
        let b = mat(10, 2, 4);
        let g = mat(2, 2, 5);
        let a = mat(2, 10, 6);
        let f = deift_reduce(&l, &b, &g, &a, C64::new(1.0, 0.0)).unwrap();
        assert!(deift_residual(&l, &b, &g, &a, &f) < 1e-12);
    }

    #[test]
    fn block_identity_small() {
        let w = mat(3, 3, 7) + scaled_identity(3, 2.0);
        let x = mat(3, 2, 8);
        let y = mat(2, 3, 9);
        let v = mat(2, 2, 10) + identity(2);
        assert!(block_residual(&w, &x, &y, &v).unwrap() < 1e-12);
    }
}
