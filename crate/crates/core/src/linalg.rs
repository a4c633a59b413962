//! Dense complex matrix helpers shared by the circuit, loss and sampler modules.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::C64;

/// Dense complex matrix. Column `i` holds the image of input mode `i`.
pub type CMatrix = DMatrix<C64>;

/// Place `local` inside an identity of size `full_dim` at rows/columns `targets`.
pub fn embed(full_dim: usize, local: &CMatrix, targets: &[usize]) -> Result<CMatrix> {
    if !local.is_square() {
        return Err(Error::NotSquare {
            rows: local.nrows(),
            cols: local.ncols(),
        });
    }
    if local.nrows() != targets.len() {
        return Err(Error::Dimension {
            expected: local.nrows(),
            found: targets.len(),
        });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= full_dim {
            return Err(Error::ChannelOutOfRange {
                channel: t,
                nchannels: full_dim,
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }
    let mut out = CMatrix::identity(full_dim, full_dim);
    for (a, &ra) in targets.iter().enumerate() {
        for (b, &cb) in targets.iter().enumerate() {
            out[(ra, cb)] = local[(a, b)];
        }
    }
    Ok(out)
}

/// Largest entry of |M†M - I|.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && unitarity_defect(m) <= tol
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of R's diagonal
/// moved into Q.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random matrix with all singular values at most one: a Haar unitary scaled column-wise
/// then multiplied by a second Haar unitary.
pub fn random_contraction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let a = random_unitary(n, rng);
    let b = random_unitary(n, rng);
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(rng.random::<f64>(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    a * d * b
}
