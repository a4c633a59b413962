//! Ket-by-ket circuit transformation with two amplitude engines: direct expansion of
//! the creation-operator products, and one permanent per output ket.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{factorial, Ket, State, DEFAULT_MAX_OCCUPANCY, PRUNE_TOL};
use crate::linalg::CMatrix;
use crate::permanent::permanent_row_major;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreKind {
    #[default]
    Direct,
    Glynn,
}

impl std::str::FromStr for CoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(CoreKind::Direct),
            "glynn" => Ok(CoreKind::Glynn),
            _ => Err(Error::Parameter(format!("unknown core '{s}'"))),
        }
    }
}

/// Output ensemble.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BasisSpec {
    /// Every ket with the input's photon number.
    #[default]
    Full,
    /// Kets with at most one photon per mode.
    Restricted,
    UserList(Vec<Ket>),
}

impl BasisSpec {
    fn admits(&self, occ: &[u8]) -> bool {
        match self {
            BasisSpec::Full => true,
            BasisSpec::Restricted => occ.iter().all(|&x| x <= 1),
            BasisSpec::UserList(list) => list.iter().any(|k| k.as_slice() == occ),
        }
    }
}

/// Kets over `nmodes` modes holding `nphotons` photons, in descending lexicographic order.
/// Full kets are capped at [`DEFAULT_MAX_OCCUPANCY`] photons per mode; a user list is
/// filtered to the matching photon number.
pub fn enumerate_basis(nmodes: usize, nphotons: usize, basis: &BasisSpec) -> Vec<Ket> {
    match basis {
        BasisSpec::Full => compositions(nmodes, nphotons, DEFAULT_MAX_OCCUPANCY as usize),
        BasisSpec::Restricted => compositions(nmodes, nphotons, 1),
        BasisSpec::UserList(list) => list
            .iter()
            .filter(|k| k.nmodes() == nmodes && k.photons() == nphotons)
            .cloned()
            .collect(),
    }
}

/// Weak compositions of `n` into `m` parts bounded by `cap`, descending lexicographic.
pub fn compositions(m: usize, n: usize, cap: usize) -> Vec<Ket> {
    fn rec(pos: usize, left: usize, cap: usize, cur: &mut Vec<u8>, out: &mut Vec<Ket>) {
        let m = cur.len();
        if pos == m - 1 {
            if left <= cap {
                cur[pos] = left as u8;
                out.push(Ket::new(cur.clone()));
            }
            return;
        }
        // Remaining positions must be able to absorb what is left.
        let rest = (m - pos - 1) * cap;
        let hi = left.min(cap);
        let lo = left.saturating_sub(rest);
        for k in (lo..=hi).rev() {
            cur[pos] = k as u8;
            rec(pos + 1, left - k, cap, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if m == 0 {
        if n == 0 {
            out.push(Ket::new(Vec::new()));
        }
        return out;
    }
    let cap = cap.min(u8::MAX as usize);
    rec(0, n, cap, &mut vec![0; m], &mut out);
    out
}

fn check_dims(ket: &Ket, u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    if ket.nmodes() != u.nrows() {
        return Err(Error::Dimension {
            expected: u.nrows(),
            found: ket.nmodes(),
        });
    }
    Ok(())
}

/// ⟨output|T(U)|input⟩ = perm(U[out rows, in cols]) / √(Π n_in! Π n_out!).
/// Kets with different photon numbers give zero.
pub fn amplitude(input: &Ket, output: &Ket, u: &CMatrix) -> Result<C64> {
    check_dims(input, u)?;
    check_dims(output, u)?;
    if input.photons() != output.photons() {
        return Ok(C64::default());
    }
    let cols = input.photon_modes();
    let rows = output.photon_modes();
    Ok(amplitude_from_lists(&rows, &cols, u) / (input.factorial_product() * output.factorial_product()).sqrt())
}

fn amplitude_from_lists(rows: &[usize], cols: &[usize], u: &CMatrix) -> C64 {
    let n = rows.len();
    let mut sub = Vec::with_capacity(n * n);
    for &r in rows {
        for &c in cols {
            sub.push(u[(r, c)]);
        }
    }
    permanent_row_major(n, &sub)
}

/// Direct core: expand Π_i (Σ_j U_{j,i} a_j†)^{n_i} as a multinomial sum, one branch
/// per placement of the photons of each input mode, pruning structural zeros.
pub fn direct_ket_transform(ket: &Ket, u: &CMatrix, basis: &BasisSpec) -> Result<State> {
    check_dims(ket, u)?;
    let nmodes = ket.nmodes();
    let photons = ket.photon_modes();
    let restricted = matches!(basis, BasisSpec::Restricted);
    let mut out = State::new(nmodes);
    let occ = vec![0u8; nmodes];
    let norm_in = ket.factorial_product().sqrt();

    struct Walk<'a> {
        u: &'a CMatrix,
        photons: &'a [usize],
        restricted: bool,
        occ: Vec<u8>,
        out: &'a mut State,
        norm_in: f64,
        basis: &'a BasisSpec,
    }

    impl Walk<'_> {
        // `group_pos`: 1-based position of this photon within its input-mode group;
        // `min_out`/`run`: previous photon's output in the same group and its run length.
        fn step(&mut self, p: usize, amp: C64, group_pos: usize, min_out: usize, run: usize) {
            if p == self.photons.len() {
                if self.basis.admits(&self.occ) {
                    let f: f64 = self.occ.iter().map(|&m| factorial(m as usize)).product();
                    self.out
                        .push_unchecked(amp * (f.sqrt() / self.norm_in), Ket::new(self.occ.clone()));
                }
                return;
            }
            let col = self.photons[p];
            let same_group = p > 0 && self.photons[p - 1] == col;
            let (gpos, start) = if same_group {
                (group_pos + 1, min_out)
            } else {
                (1, 0)
            };
            for j in start..self.u.nrows() {
                let x = self.u[(j, col)];
                if x == C64::default() {
                    continue;
                }
                if self.restricted && self.occ[j] >= 1 {
                    continue;
                }
                let r = if same_group && j == min_out { run + 1 } else { 1 };
                let coef = gpos as f64 / r as f64;
                self.occ[j] += 1;
                self.step(p + 1, amp * x * coef, gpos, j, r);
                self.occ[j] -= 1;
            }
        }
    }

    let mut walk = Walk {
        u,
        photons: &photons,
        restricted,
        occ,
        out: &mut out,
        norm_in,
        basis,
    };
    walk.step(0, C64::new(1.0, 0.0), 0, 0, 0);
    out.prune_below(PRUNE_TOL);
    Ok(out)
}

/// Modes reachable from the occupied input columns (rows with a nonzero entry).
fn reachable_modes(ket: &Ket, u: &CMatrix) -> Vec<usize> {
    let cols: Vec<usize> = (0..ket.nmodes()).filter(|&i| ket[i] > 0).collect();
    (0..u.nrows())
        .filter(|&j| cols.iter().any(|&c| u[(j, c)] != C64::default()))
        .collect()
}

/// Permanent core: one amplitude per basis ket, computed in parallel.
pub fn glynn_ket_transform(ket: &Ket, u: &CMatrix, basis: &BasisSpec) -> Result<State> {
    check_dims(ket, u)?;
    let n = ket.photons();
    let nmodes = ket.nmodes();
    let kets: Vec<Ket> = match basis {
        BasisSpec::UserList(_) => enumerate_basis(nmodes, n, basis),
        _ => {
            let reach = reachable_modes(ket, u);
            enumerate_basis(reach.len(), n, basis)
                .into_iter()
                .map(|k| {
                    let mut occ = vec![0u8; nmodes];
                    for (pos, &m) in reach.iter().enumerate() {
                        occ[m] = k[pos];
                    }
                    Ket::new(occ)
                })
                .collect()
        }
    };
    let cols = ket.photon_modes();
    let norm_in = ket.factorial_product();
    let amps: Vec<C64> = kets
        .par_iter()
        .map(|k| {
            let rows = k.photon_modes();
            amplitude_from_lists(&rows, &cols, u) / (norm_in * k.factorial_product()).sqrt()
        })
        .collect();
    let mut out = State::new(nmodes);
    for (a, k) in amps.into_iter().zip(kets) {
        if a.norm() >= PRUNE_TOL {
            out.push_unchecked(a, k);
        }
    }
    Ok(out)
}

pub fn ket_transform(ket: &Ket, u: &CMatrix, core: CoreKind, basis: &BasisSpec) -> Result<State> {
    match core {
        CoreKind::Direct => direct_ket_transform(ket, u, basis),
        CoreKind::Glynn => glynn_ket_transform(ket, u, basis),
    }
}

/// Σ_i α_i T(|φ_i⟩) restricted to `basis`; duplicates summed, zeros dropped.
pub fn transform(input: &State, u: &CMatrix, core: CoreKind, basis: &BasisSpec) -> Result<State> {
    if input.nmodes() != u.nrows() {
        return Err(Error::Dimension {
            expected: u.nrows(),
            found: input.nmodes(),
        });
    }
    if let BasisSpec::UserList(list) = basis {
        for k in list {
            if k.nmodes() != input.nmodes() {
                return Err(Error::Dimension {
                    expected: input.nmodes(),
                    found: k.nmodes(),
                });
            }
            if !input.terms().any(|(_, ik)| ik.photons() == k.photons()) {
                return Err(Error::PhotonNumber {
                    expected: input.terms().next().map(|(_, ik)| ik.photons()).unwrap_or(0),
                    found: k.photons(),
                });
            }
        }
    }
    let terms: Vec<(C64, Ket)> = input.terms().map(|(a, k)| (a, k.clone())).collect();
    let parts: Vec<Result<State>> = terms
        .par_iter()
        .map(|(_, k)| ket_transform(k, u, core, basis))
        .collect();
    let mut out = State::new(input.nmodes());
    for ((a, _), part) in terms.iter().zip(parts) {
        out.add_scaled(*a, &part?)?;
    }
    out.prune_below(PRUNE_TOL);
    Ok(out)
}
