//! Lossy circuits: embed a contraction M in a unitary on twice the modes,
//! `[[M, R√(I−D²)V], [R√(I−D²)V, −M]]` with `M = R D V`, and trace the virtual loss
//! modes out afterwards.

use crate::error::{Error, Result};
use crate::fock::State;
use crate::linalg::CMatrix;
use crate::measurement::{ProbabilityBins, Reduction};
use crate::modes::ModeMap;
use crate::C64;

/// Singular values up to `1 + SV_TOL` are clamped to one.
pub const SV_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DilatedCircuit {
    matrix: CMatrix,
    n: usize,
}

impl DilatedCircuit {
    /// The 2n×2n unitary; modes `0..n` are physical, `n..2n` are loss modes.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn nphysical(&self) -> usize {
        self.n
    }

    /// Loss-mode block `R√(I−D²)V`.
    pub fn loss_block(&self) -> CMatrix {
        self.matrix.view((0, self.n), (self.n, self.n)).into_owned()
    }

    /// Right-compose a physical-space map `E` (applied first) as `E ⊕ I`.
    pub fn then_after(&self, first: &CMatrix) -> Result<DilatedCircuit> {
        if first.nrows() != self.n || first.ncols() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: first.nrows(),
            });
        }
        let mut e = CMatrix::identity(2 * self.n, 2 * self.n);
        e.view_mut((0, 0), (self.n, self.n)).copy_from(first);
        Ok(DilatedCircuit {
            matrix: &self.matrix * e,
            n: self.n,
        })
    }
}

/// `M = R diag(s) V`. The plain SVD occasionally reconstructs M only to ~1e-12, so the
/// factorization is re-run on `R† M V†` until the residual reaches round-off, keeping
/// the best factors seen.
fn svd_refined(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let factor = |a: CMatrix| -> Result<(CMatrix, Vec<f64>, CMatrix)> {
        let svd = a.svd(true, true);
        let u = svd.u.ok_or(Error::Parameter("SVD failed".into()))?;
        let v = svd.v_t.ok_or(Error::Parameter("SVD failed".into()))?;
        Ok((u, svd.singular_values.iter().copied().collect(), v))
    };
    let residual = |r: &CMatrix, s: &[f64], v: &CMatrix| {
        let mut rd = r.clone();
        for (k, &x) in s.iter().enumerate() {
            rd.column_mut(k).scale_mut(x);
        }
        (rd * v - m).norm()
    };
    let target = 1e-14 * m.norm().max(1.0);
    let mut best = factor(m.clone())?;
    let mut best_err = residual(&best.0, &best.1, &best.2);
    let (mut r, mut v) = (best.0.clone(), best.2.clone());
    for _ in 0..6 {
        if best_err <= target {
            break;
        }
        let (r2, s2, v2) = factor(r.adjoint() * m * v.adjoint())?;
        r = &r * r2;
        v = v2 * &v;
        let err = residual(&r, &s2, &v);
        if err < best_err {
            best = (r.clone(), s2, v.clone());
            best_err = err;
        }
    }
    Ok(best)
}

/// Unitary dilation of a contraction.
pub fn dilate(m: &CMatrix) -> Result<DilatedCircuit> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let (mut r, sv, mut v) = svd_refined(m)?;
    let mut d = Vec::with_capacity(n);
    for &s in &sv {
        if s > 1.0 + SV_TOL {
            return Err(Error::Gain(s));
        }
        d.push(s.min(1.0));
    }
    // Make R's diagonal real and non-negative; the opposite phase goes into V's row.
    for k in 0..n {
        let x = r[(k, k)];
        if x.norm() > 1e-300 {
            let ph = x / x.norm();
            for i in 0..n {
                r[(i, k)] *= ph.conj();
                v[(k, i)] *= ph;
            }
        }
    }
    let mut sq = CMatrix::zeros(n, n);
    for (k, &s) in d.iter().enumerate() {
        sq[(k, k)] = C64::new((1.0 - s * s).max(0.0).sqrt(), 0.0);
    }
    let s = &r * sq * &v;
    let mut u = CMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(m);
    u.view_mut((0, n), (n, n)).copy_from(&s);
    u.view_mut((n, 0), (n, n)).copy_from(&s);
    u.view_mut((n, n), (n, n)).copy_from(&(-m));
    Ok(DilatedCircuit { matrix: u, n })
}

/// Marginal outcome probabilities on the physical modes.
pub fn trace_out_losses(state: &State, modes: &ModeMap) -> Result<ProbabilityBins> {
    let red = Reduction::new(modes.clone(), modes.nmodes(), Vec::new(), Vec::new());
    let bins = ProbabilityBins::from_state(state, modes.clone());
    red.reduce_bins(&bins, false)
}

/// Physical pure states, one per loss-mode configuration; their projectors sum to the
/// reduced density matrix.
pub fn loss_branches(state: &State, modes: &ModeMap) -> Result<Vec<State>> {
    Reduction::new(modes.clone(), modes.nmodes(), Vec::new(), Vec::new()).branches(state)
}
