//! Fock states: occupation-vector kets and sparse superpositions of them.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeMap;
use crate::C64;

/// Amplitudes with modulus below this are treated as zero.
pub const PRUNE_TOL: f64 = 1e-14;

/// Default cap on photons per mode used when enumerating bases.
pub const DEFAULT_MAX_OCCUPANCY: u8 = 15;

/// Photon occupation per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ket(Vec<u8>);

impl Ket {
    pub fn new(occ: Vec<u8>) -> Self {
        Ket(occ)
    }

    pub fn vacuum(nmodes: usize) -> Self {
        Ket(vec![0; nmodes])
    }

    pub fn nmodes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    /// Product of n_j! over modes.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n as usize)).product()
    }

    /// Mode index of every photon, repeated by occupation, in mode order.
    pub fn photon_modes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.photons());
        for (m, &n) in self.0.iter().enumerate() {
            for _ in 0..n {
                out.push(m);
            }
        }
        out
    }
}

impl From<Vec<u8>> for Ket {
    fn from(v: Vec<u8>) -> Self {
        Ket(v)
    }
}

impl From<&[u8]> for Ket {
    fn from(v: &[u8]) -> Self {
        Ket(v.to_vec())
    }
}

impl std::ops::Index<usize> for Ket {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "| ")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, " >")
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Sparse superposition of kets. Not forced to unit norm: post-selected states carry
/// their success probability in the norm.
#[derive(Debug, Clone, Default)]
pub struct State {
    nmodes: usize,
    terms: Vec<(C64, Ket)>,
    index: HashMap<Ket, usize>,
}

/// One serialized term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub ket: Vec<u8>,
    pub re: f64,
    pub im: f64,
}

impl State {
    pub fn new(nmodes: usize) -> Self {
        Self {
            nmodes,
            terms: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Single-ket state with amplitude one.
    pub fn from_ket(ket: Ket) -> Self {
        let mut s = Self::new(ket.nmodes());
        s.push_unchecked(C64::new(1.0, 0.0), ket);
        s
    }

    pub fn nmodes(&self) -> usize {
        self.nmodes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (C64, &Ket)> {
        self.terms.iter().map(|(a, k)| (*a, k))
    }

    /// Add `amplitude * ket`, summing into an existing term with the same ket.
    pub fn add_term(&mut self, amplitude: C64, ket: Ket) -> Result<()> {
        if ket.nmodes() != self.nmodes {
            return Err(Error::Dimension {
                expected: self.nmodes,
                found: ket.nmodes(),
            });
        }
        self.push_unchecked(amplitude, ket);
        Ok(())
    }

    pub fn with_term(mut self, amplitude: C64, ket: Ket) -> Result<Self> {
        self.add_term(amplitude, ket)?;
        Ok(self)
    }

    pub(crate) fn push_unchecked(&mut self, amplitude: C64, ket: Ket) {
        match self.index.get(&ket) {
            Some(&pos) => self.terms[pos].0 += amplitude,
            None => {
                self.index.insert(ket.clone(), self.terms.len());
                self.terms.push((amplitude, ket));
            }
        }
    }

    /// Add every term of `other` scaled by `factor`.
    pub fn add_scaled(&mut self, factor: C64, other: &State) -> Result<()> {
        if other.nmodes != self.nmodes {
            return Err(Error::Dimension {
                expected: self.nmodes,
                found: other.nmodes,
            });
        }
        for (a, k) in &other.terms {
            self.push_unchecked(factor * a, k.clone());
        }
        Ok(())
    }

    pub fn amplitude(&self, ket: &Ket) -> C64 {
        self.index
            .get(ket)
            .map(|&i| self.terms[i].0)
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a.norm_sqr()).sum()
    }

    /// Drop terms with |amplitude| below `tol` and rebuild the index.
    pub fn prune_below(&mut self, tol: f64) {
        self.terms.retain(|(a, _)| a.norm() >= tol);
        self.reindex();
    }

    pub fn prune(&mut self) {
        self.prune_below(PRUNE_TOL);
    }

    fn reindex(&mut self) {
        self.index.clear();
        for (i, (_, k)) in self.terms.iter().enumerate() {
            self.index.insert(k.clone(), i);
        }
    }

    pub fn scale(&mut self, factor: C64) {
        for (a, _) in &mut self.terms {
            *a *= factor;
        }
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        self.scale(C64::new(1.0 / n.sqrt(), 0.0));
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// ⟨self|other⟩.
    pub fn braket(&self, other: &State) -> Result<C64> {
        if other.nmodes != self.nmodes {
            return Err(Error::Dimension {
                expected: self.nmodes,
                found: other.nmodes,
            });
        }
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = C64::default();
        for (a, k) in &small.terms {
            let b = large.amplitude(k);
            acc += if conj_small { a.conj() * b } else { b.conj() * a };
        }
        Ok(acc)
    }

    /// Terms sorted lexicographically on the occupation vector.
    pub fn sorted_terms(&self) -> Vec<(C64, Ket)> {
        let mut v = self.terms.clone();
        v.sort_by(|a, b| a.1.cmp(&b.1));
        v
    }

    /// Term-by-term comparison after pruning below `tol`.
    pub fn approx_eq(&self, other: &State, tol: f64) -> bool {
        if self.nmodes != other.nmodes {
            return false;
        }
        let check = |a: &State, b: &State| {
            a.terms
                .iter()
                .all(|(amp, k)| (amp - b.amplitude(k)).norm() <= tol)
        };
        check(self, other) && check(other, self)
    }

    /// Bosonic product of two states on the same modes: applies the creation operators
    /// of `other` on top of `self`.
    pub fn product(&self, other: &State) -> Result<State> {
        if other.nmodes != self.nmodes {
            return Err(Error::Dimension {
                expected: self.nmodes,
                found: other.nmodes,
            });
        }
        let mut out = State::new(self.nmodes);
        for (a, ka) in &self.terms {
            for (b, kb) in &other.terms {
                let mut occ = Vec::with_capacity(self.nmodes);
                let mut factor = 1.0;
                for (&x, &y) in ka.0.iter().zip(&kb.0) {
                    let n = x as usize + y as usize;
                    if n > u8::MAX as usize {
                        return Err(Error::Capacity("occupation exceeds 255".into()));
                    }
                    factor *= factorial(n) / (factorial(x as usize) * factorial(y as usize));
                    occ.push(n as u8);
                }
                out.push_unchecked(a * b * factor.sqrt(), Ket(occ));
            }
        }
        Ok(out)
    }

    /// Same terms embedded into a larger mode space; new modes are empty.
    pub fn padded(&self, nmodes: usize) -> Result<State> {
        if nmodes < self.nmodes {
            return Err(Error::Dimension {
                expected: self.nmodes,
                found: nmodes,
            });
        }
        let mut out = State::new(nmodes);
        for (a, k) in &self.terms {
            let mut occ = k.0.clone();
            occ.resize(nmodes, 0);
            out.push_unchecked(*a, Ket(occ));
        }
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.sorted_terms()
            .into_iter()
            .map(|(a, k)| TermRecord {
                ket: k.0,
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    /// Inverse of [`State::to_records`]. `nmodes` is needed only for an empty list.
    pub fn from_records(records: &[TermRecord], nmodes: Option<usize>) -> Result<State> {
        let n = match (records.first(), nmodes) {
            (_, Some(n)) => n,
            (Some(r), None) => r.ket.len(),
            (None, None) => 0,
        };
        let mut s = State::new(n);
        for r in records {
            s.add_term(C64::new(r.re, r.im), Ket(r.ket.clone()))?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_records()).expect("state records serialize")
    }

    /// Plain listing: one `| kets >: re + im j` line per term, 8 decimals.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for (a, k) in self.sorted_terms() {
            let sign = if a.im < 0.0 { '-' } else { '+' };
            out.push_str(&format!("{k}: {:.8} {sign} {:.8} j\n", a.re, a.im.abs()));
        }
        out
    }
}

/// Path-encoded qubits: pair `(first, second)` per logical qubit. A photon in `second`
/// ("01") is logical 0, a photon in `first` ("10") is logical 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitMap {
    pairs: Vec<(usize, usize)>,
}

impl QubitMap {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::new();
        for &(a, b) in &pairs {
            for c in [a, b] {
                if seen.contains(&c) {
                    return Err(Error::Encoding(format!("channel {c} used twice")));
                }
                seen.push(c);
            }
        }
        Ok(Self { pairs })
    }

    /// Builds from the two-row layout `[[first channels...], [second channels...]]`.
    pub fn from_rows(rows: [&[usize]; 2]) -> Result<Self> {
        if rows[0].len() != rows[1].len() {
            return Err(Error::Encoding("qubit map rows differ in length".into()));
        }
        Self::new(rows[0].iter().copied().zip(rows[1].iter().copied()).collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn nqubits(&self) -> usize {
        self.pairs.len()
    }

    pub fn channels(&self) -> Vec<usize> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    fn validate(&self, modes: &ModeMap) -> Result<()> {
        for c in self.channels() {
            if !modes.contains_channel(c) {
                return Err(Error::ChannelOutOfRange {
                    channel: c,
                    nchannels: modes.nchannels(),
                });
            }
        }
        Ok(())
    }

    /// Logical bits for per-channel photon totals, or `None` when some pair does not
    /// hold exactly one photon.
    pub fn bits_of(&self, channel_total: impl Fn(usize) -> usize) -> Option<Vec<u8>> {
        self.pairs
            .iter()
            .map(|&(a, b)| match (channel_total(a), channel_total(b)) {
                (1, 0) => Some(1),
                (0, 1) => Some(0),
                _ => None,
            })
            .collect()
    }
}

fn channel_total(modes: &ModeMap, ket: &Ket, channel: usize) -> usize {
    modes
        .channel_modes(channel)
        .map(|ms| ms.iter().map(|&m| ket[m] as usize).sum())
        .unwrap_or(0)
}

/// How kets outside the qubit subspace are treated by [`encode_qubits`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodePolicy {
    /// Any invalid ket is an error.
    #[default]
    Strict,
    /// Invalid kets are dropped.
    Discard,
}

/// Translate a photonic state on `modes` into logical qubit kets.
pub fn encode_qubits(
    state: &State,
    map: &QubitMap,
    modes: &ModeMap,
    policy: EncodePolicy,
) -> Result<State> {
    if state.nmodes() != modes.nmodes() {
        return Err(Error::Dimension {
            expected: modes.nmodes(),
            found: state.nmodes(),
        });
    }
    map.validate(modes)?;
    let qubit_channels = map.channels();
    let others: Vec<usize> = modes
        .channels()
        .iter()
        .copied()
        .filter(|c| !qubit_channels.contains(c))
        .collect();
    let mut reference: Option<Vec<usize>> = None;
    let mut out = State::new(map.nqubits());
    for (a, ket) in state.terms() {
        let bits = map.bits_of(|c| channel_total(modes, ket, c));
        let ancilla: Vec<usize> = others
            .iter()
            .map(|&c| channel_total(modes, ket, c))
            .collect();
        let consistent = match &reference {
            Some(r) => *r == ancilla,
            None => true,
        };
        match (bits, consistent) {
            (Some(b), true) => {
                reference.get_or_insert(ancilla);
                out.push_unchecked(a, Ket(b));
            }
            _ if policy == EncodePolicy::Discard => {}
            _ => {
                return Err(Error::Encoding(format!(
                    "ket {ket} is outside the qubit subspace"
                )))
            }
        }
    }
    Ok(out)
}

/// Inverse of [`encode_qubits`]. `ancilla` lists the occupations of the channels not in
/// `map`, in channel order; photons land in polarization H, packet 0.
pub fn decode_qubits(
    qubits: &State,
    map: &QubitMap,
    ancilla: &[u8],
    modes: &ModeMap,
) -> Result<State> {
    if qubits.nmodes() != map.nqubits() {
        return Err(Error::Dimension {
            expected: map.nqubits(),
            found: qubits.nmodes(),
        });
    }
    map.validate(modes)?;
    let qubit_channels = map.channels();
    let others: Vec<usize> = modes
        .channels()
        .iter()
        .copied()
        .filter(|c| !qubit_channels.contains(c))
        .collect();
    if ancilla.len() != others.len() {
        return Err(Error::Dimension {
            expected: others.len(),
            found: ancilla.len(),
        });
    }
    let mut base = vec![0u8; modes.nmodes()];
    for (&c, &n) in others.iter().zip(ancilla) {
        base[modes.mode(c, 0, 0)?] = n;
    }
    let mut out = State::new(modes.nmodes());
    for (a, ket) in qubits.terms() {
        let mut occ = base.clone();
        for (q, &(first, second)) in map.pairs().iter().enumerate() {
            let ch = match ket[q] {
                0 => second,
                1 => first,
                other => {
                    return Err(Error::Encoding(format!(
                        "qubit value {other} is not binary"
                    )))
                }
            };
            occ[modes.mode(ch, 0, 0)?] += 1;
        }
        out.push_unchecked(a, Ket(occ));
    }
    Ok(out)
}
