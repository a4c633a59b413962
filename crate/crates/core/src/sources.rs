//! Stochastic quantum-dot source: each call draws one branch of the
//! biexciton-exciton cascade (entangled, cross-dephased or noise) as a pure state.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Ket, State};
use crate::modes::{ModeMap, Pol};
use crate::packets::PacketSpec;
use crate::C64;

/// Parameters of one emitted XX-X pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdParams {
    /// Fraction of photons coming from the dot.
    pub k: f64,
    /// Coherence characteristic time.
    #[serde(alias = "tss")]
    pub t_ss: f64,
    /// Cross-dephasing characteristic time.
    #[serde(alias = "thv")]
    pub t_hv: f64,
    /// Fine-structure splitting (ħ = 1).
    #[serde(rename = "S", alias = "s")]
    pub s: f64,
    /// Biexciton photon packet.
    pub xx: PacketSpec,
    /// Exciton photon packet.
    pub x: PacketSpec,
    /// Mean of the exponential Δt distribution; defaults to the X packet's decay time.
    #[serde(default)]
    pub delta_mean: Option<f64>,
    /// Fixed time entering p_s and p_d; when absent the sampled Δt is used.
    #[serde(default)]
    pub t_fixed: Option<f64>,
}

impl QdParams {
    pub fn new(xx: PacketSpec, x: PacketSpec, s: f64, k: f64, t_ss: f64, t_hv: f64) -> Self {
        Self {
            k,
            t_ss,
            t_hv,
            s,
            xx,
            x,
            delta_mean: None,
            t_fixed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.k) {
            return Err(Error::Parameter(format!("k = {} outside [0, 1]", self.k)));
        }
        if !(self.t_ss > 0.0 && self.t_hv > 0.0) {
            return Err(Error::Parameter("t_ss and t_hv must be > 0".into()));
        }
        if !self.s.is_finite() {
            return Err(Error::Parameter("S must be finite".into()));
        }
        if let Some(m) = self.delta_mean {
            if !(m > 0.0) {
                return Err(Error::Parameter("delta_mean must be > 0".into()));
            }
        }
        if let Some(t) = self.t_fixed {
            if !(t >= 0.0) {
                return Err(Error::Parameter("t_fixed must be >= 0".into()));
            }
        }
        self.xx.validate()?;
        self.x.validate()
    }

    pub fn delta_mean(&self) -> f64 {
        self.delta_mean.unwrap_or(self.x.width)
    }
}

/// (p_s, p_d) = (e^{−t/t_ss}, e^{−t/t_hv}).
pub fn qd_probabilities(p: &QdParams, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("emission time {t} < 0")));
    }
    Ok(((-t / p.t_ss).exp(), (-t / p.t_hv).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Entangled,
    DephasedHH,
    DephasedVV,
    NoiseHH,
    NoiseHV,
    NoiseVH,
    NoiseVV,
}

impl Branch {
    pub const ALL: [Branch; 7] = [
        Branch::Entangled,
        Branch::DephasedHH,
        Branch::DephasedVV,
        Branch::NoiseHH,
        Branch::NoiseHV,
        Branch::NoiseVH,
        Branch::NoiseVV,
    ];
}

/// One draw: polarization terms (XX pol, X pol, amplitude) of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedState {
    pub branch: Branch,
    pub delta_t: f64,
    /// e^{−iSΔt}; one for the other branches.
    pub phase: C64,
    pub terms: Vec<(Pol, Pol, C64)>,
}

impl EmittedState {
    /// The pair as a state on `modes`, XX photon in (`ch_xx`, `pk_xx`), X in (`ch_x`, `pk_x`).
    pub fn state(&self, modes: &ModeMap, ch_xx: usize, pk_xx: usize, ch_x: usize, pk_x: usize) -> Result<State> {
        if !modes.polarized() {
            return Err(Error::Unpolarized);
        }
        let mut s = State::new(modes.nmodes());
        for &(pa, pb, amp) in &self.terms {
            let mut occ = vec![0u8; modes.nmodes()];
            occ[modes.mode(ch_xx, pa.index(), pk_xx)?] += 1;
            occ[modes.mode(ch_x, pb.index(), pk_x)?] += 1;
            let f = Ket::new(occ.clone()).factorial_product().sqrt();
            s.add_term(amp * f, Ket::new(occ))?;
        }
        Ok(s)
    }
}

/// Draw one pair following the branching tree with weights k·p_s·p_d, k·p_s·(1−p_d)
/// and 1 − k·p_s.
pub fn sample_qd_pair<R: Rng + ?Sized>(p: &QdParams, rng: &mut R) -> Result<EmittedState> {
    p.validate()?;
    let exp = Exp::new(1.0 / p.delta_mean()).map_err(|e| Error::Parameter(e.to_string()))?;
    let dt: f64 = exp.sample(rng);
    let (ps, pd) = qd_probabilities(p, p.t_fixed.unwrap_or(dt))?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let one = C64::new(1.0, 0.0);
    let u: f64 = rng.random();
    let (branch, phase, terms) = if u < p.k * ps * pd {
        let phase = C64::from_polar(1.0, -p.s * dt);
        (
            Branch::Entangled,
            phase,
            vec![(Pol::H, Pol::H, one * h), (Pol::V, Pol::V, phase * h)],
        )
    } else if u < p.k * ps {
        if rng.random::<bool>() {
            (Branch::DephasedHH, one, vec![(Pol::H, Pol::H, one)])
        } else {
            (Branch::DephasedVV, one, vec![(Pol::V, Pol::V, one)])
        }
    } else {
        let (b, a, c) = match rng.random_range(0..4) {
            0 => (Branch::NoiseHH, Pol::H, Pol::H),
            1 => (Branch::NoiseHV, Pol::H, Pol::V),
            2 => (Branch::NoiseVH, Pol::V, Pol::H),
            _ => (Branch::NoiseVV, Pol::V, Pol::V),
        };
        (b, one, vec![(a, c, one)])
    };
    Ok(EmittedState {
        branch,
        delta_t: dt,
        phase,
        terms,
    })
}

/// Expected branch weights (entangled, dephased, noise) averaged over the Δt draw.
pub fn branch_weights(p: &QdParams) -> (f64, f64, f64) {
    let tau = p.delta_mean();
    let (a, b) = (1.0 / p.t_ss, 1.0 / p.t_hv);
    let (e_s, e_sd) = match p.t_fixed {
        Some(t) => ((-t * a).exp(), (-t * (a + b)).exp()),
        None => (1.0 / (1.0 + tau * a), 1.0 / (1.0 + tau * (a + b))),
    };
    let en = p.k * e_sd;
    let pd = p.k * e_s - en;
    (en, pd, 1.0 - p.k * e_s)
}

/// Expected two-photon polarization density matrix in the basis HH, HV, VH, VV.
pub fn source_density(p: &QdParams) -> [[C64; 4]; 4] {
    let (en, pd, noise) = branch_weights(p);
    let tau = p.delta_mean();
    let (a, b) = (1.0 / p.t_ss, 1.0 / p.t_hv);
    // E[k p_s p_d e^{−iSΔt}] for Δt ~ Exp(mean τ).
    let coh = match p.t_fixed {
        Some(t) => p.k * (-t * (a + b)).exp() / C64::new(1.0, p.s * tau),
        None => p.k / C64::new(1.0 + tau * (a + b), p.s * tau),
    };
    let z = C64::default();
    let r = |x: f64| C64::new(x, 0.0);
    let diag_same = r(0.5 * en + 0.5 * pd + 0.25 * noise);
    let diag_cross = r(0.25 * noise);
    [
        [diag_same, z, z, coh.conj() * 0.5],
        [z, diag_cross, z, z],
        [z, z, diag_cross, z],
        [coh * 0.5, z, z, diag_same],
    ]
}
