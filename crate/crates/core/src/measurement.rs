//! Detectors, post-selection, probability bins, density matrices and the detection
//! pipeline: probabilities, dark counts, dead time, post-selection, relabeling, noise.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::cores::compositions;
use crate::error::{Error, Result};
use crate::fock::{Ket, State, PRUNE_TOL};
use crate::linalg::CMatrix;
use crate::modes::ModeMap;
use crate::C64;

fn one() -> f64 {
    1.0
}

/// Detector on one channel. `condition` is a polarization- and packet-blind photon count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    #[serde(alias = "ch")]
    pub channel: usize,
    #[serde(default, alias = "cond")]
    pub condition: Option<u32>,
    #[serde(default = "one", alias = "eff")]
    pub efficiency: f64,
    /// Fraction of time the detector is off.
    #[serde(default, alias = "blnk")]
    pub dead_fraction: f64,
    /// Mean dark counts per run.
    #[serde(default, alias = "gamma")]
    pub dark_rate: f64,
}

impl DetectorSpec {
    pub fn new(channel: usize, condition: Option<u32>) -> Self {
        Self {
            channel,
            condition,
            efficiency: 1.0,
            dead_fraction: 0.0,
            dark_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Parameter(format!(
                "detector efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        if !(0.0..=1.0).contains(&self.dead_fraction) {
            return Err(Error::Parameter(format!(
                "dead-time fraction {} outside [0, 1]",
                self.dead_fraction
            )));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::Parameter(format!(
                "dark count rate {} must be >= 0",
                self.dark_rate
            )));
        }
        Ok(())
    }
}

/// What a detector reports about the photons it sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Photon counts per channel and polarization.
    #[default]
    Counter,
    /// Counts per channel, polarization and period.
    Timed,
    /// Counts per orthonormalized packet.
    Full,
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counter" => Ok(DetectorKind::Counter),
            "timed" => Ok(DetectorKind::Timed),
            "full" => Ok(DetectorKind::Full),
            _ => Err(Error::Parameter(format!("unknown detector kind '{s}'"))),
        }
    }
}

/// Occupation pattern over a set of modes, as (mode, photons) pairs.
pub type Projector = Vec<(usize, u8)>;

/// Every occupation of the conditioned channels' sub-modes whose per-channel totals match.
pub fn enumerate_projectors(conditions: &[(usize, u32)], modes: &ModeMap) -> Result<Vec<Projector>> {
    let mut out: Vec<Projector> = vec![Vec::new()];
    for &(ch, n) in conditions {
        let sub = modes.channel_modes(ch)?;
        let parts = compositions(sub.len(), n as usize, n as usize);
        let mut next = Vec::with_capacity(out.len() * parts.len());
        for p in &out {
            for k in &parts {
                let mut q = p.clone();
                q.extend(sub.iter().zip(k.as_slice()).map(|(&m, &x)| (m, x)));
                next.push(q);
            }
        }
        out = next;
    }
    Ok(out)
}

fn channel_total(modes: &ModeMap, occ: &[u8], ch: usize) -> Result<u32> {
    Ok(modes
        .channel_modes(ch)?
        .iter()
        .map(|&m| occ[m] as u32)
        .sum())
}

/// Coherent post-selection: keep kets meeting every condition and strip the conditioned
/// channels. Exact whenever at most one projector matches each ket pattern; multi-valued
/// conditions that need an incoherent sum go through [`Reduction::branches`].
pub fn apply_condition(state: &State, modes: &ModeMap, conditions: &[(usize, u32)]) -> Result<State> {
    let red = Reduction::new(modes.clone(), 0, conditions.to_vec(), Vec::new());
    red.apply_coherent(state)
}

/// Bookkeeping for removing detected, ignored and loss modes from states on the
/// (possibly loss-extended) circuit space.
#[derive(Debug, Clone)]
pub struct Reduction {
    modes: ModeMap,
    nloss: usize,
    conditions: Vec<(usize, u32)>,
    ignored: Vec<usize>,
    kept: Vec<usize>,
    out_modes: ModeMap,
}

impl Reduction {
    /// `nloss` virtual loss modes follow the `modes.nmodes()` physical ones.
    pub fn new(
        modes: ModeMap,
        nloss: usize,
        conditions: Vec<(usize, u32)>,
        ignored: Vec<usize>,
    ) -> Self {
        let mut removed: Vec<usize> = conditions.iter().map(|&(c, _)| c).collect();
        removed.extend(ignored.iter().copied());
        let out_modes = modes.without_channels(&removed);
        let kept = (0..modes.nmodes())
            .filter(|&m| !removed.contains(&modes.label(m).channel))
            .collect();
        Self {
            modes,
            nloss,
            conditions,
            ignored,
            kept,
            out_modes,
        }
    }

    pub fn modes(&self) -> &ModeMap {
        &self.modes
    }

    pub fn out_modes(&self) -> &ModeMap {
        &self.out_modes
    }

    pub fn nloss(&self) -> usize {
        self.nloss
    }

    pub fn conditions(&self) -> &[(usize, u32)] {
        &self.conditions
    }

    pub fn ignored(&self) -> &[usize] {
        &self.ignored
    }

    fn check(&self, state: &State) -> Result<()> {
        let n = self.modes.nmodes() + self.nloss;
        if state.nmodes() != n {
            return Err(Error::Dimension {
                expected: n,
                found: state.nmodes(),
            });
        }
        Ok(())
    }

    pub fn accepts(&self, occ: &[u8]) -> Result<bool> {
        for &(ch, n) in &self.conditions {
            if channel_total(&self.modes, occ, ch)? != n {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn kept_ket(&self, occ: &[u8]) -> Ket {
        Ket::new(self.kept.iter().map(|&m| occ[m]).collect())
    }

    /// Discarded part of a ket: everything outside the kept modes, loss modes included.
    fn traced_key(&self, occ: &[u8]) -> Vec<u8> {
        (0..occ.len())
            .filter(|m| !self.kept.binary_search(m).is_ok())
            .map(|m| occ[m])
            .collect()
    }

    /// Post-selected state with conditioned channels stripped, summing coherently over
    /// matching projectors. Ignored channels and loss modes must be empty for this view
    /// to be a pure state, so this is reserved for reductions without them.
    pub fn apply_coherent(&self, state: &State) -> Result<State> {
        self.check(state)?;
        if self.nloss > 0 || !self.ignored.is_empty() {
            return Err(Error::Parameter(
                "coherent post-selection is undefined with ignored or loss modes".into(),
            ));
        }
        let mut out = State::new(self.out_modes.nmodes());
        for (a, k) in state.terms() {
            if self.accepts(k.as_slice())? {
                out.push_unchecked(a, self.kept_ket(k.as_slice()));
            }
        }
        out.prune_below(PRUNE_TOL);
        Ok(out)
    }

    /// One reduced pure state per accepted pattern of the traced modes (conditioned
    /// channels, ignored channels, loss modes). Their projectors sum to the reduced
    /// density matrix.
    pub fn branches(&self, state: &State) -> Result<Vec<State>> {
        self.check(state)?;
        let mut groups: BTreeMap<Vec<u8>, State> = BTreeMap::new();
        for (a, k) in state.terms() {
            if !self.accepts(&k.as_slice()[..self.modes.nmodes()])? {
                continue;
            }
            groups
                .entry(self.traced_key(k.as_slice()))
                .or_insert_with(|| State::new(self.out_modes.nmodes()))
                .push_unchecked(a, self.kept_ket(k.as_slice()));
        }
        Ok(groups
            .into_values()
            .map(|mut s| {
                s.prune_below(PRUNE_TOL);
                s
            })
            .filter(|s| !s.is_empty())
            .collect())
    }

    /// Apply a general projector `proj` (a state on the conditioned channels' modes, in
    /// mode order) and strip those channels.
    pub fn project(&self, state: &State, proj: &State) -> Result<State> {
        self.check(state)?;
        let cond_modes: Vec<usize> = (0..self.modes.nmodes())
            .filter(|&m| {
                let ch = self.modes.label(m).channel;
                self.conditions.iter().any(|&(c, _)| c == ch)
            })
            .collect();
        if proj.nmodes() != cond_modes.len() {
            return Err(Error::Dimension {
                expected: cond_modes.len(),
                found: proj.nmodes(),
            });
        }
        let mut out = State::new(self.out_modes.nmodes());
        for (a, k) in state.terms() {
            let occ = k.as_slice();
            let key = Ket::new(cond_modes.iter().map(|&m| occ[m]).collect());
            let b = proj.amplitude(&key);
            if b != C64::default() {
                out.push_unchecked(b.conj() * a, self.kept_ket(occ));
            }
        }
        out.prune_below(PRUNE_TOL);
        Ok(out)
    }

    /// Classical version on bins: drop rejected outcomes and sum away traced modes.
    pub fn reduce_bins(&self, bins: &ProbabilityBins, keep_loss_modes: bool) -> Result<ProbabilityBins> {
        let extra = if keep_loss_modes { self.nloss } else { 0 };
        let mut out = ProbabilityBins::new(self.out_modes.clone(), extra);
        let np = self.modes.nmodes();
        for (k, p) in bins.iter() {
            let occ = k.as_slice();
            if !self.accepts(&occ[..np])? {
                continue;
            }
            let mut v: Vec<u8> = self.kept.iter().map(|&m| occ[m]).collect();
            if keep_loss_modes {
                v.extend_from_slice(&occ[np..]);
            }
            out.add(Ket::new(v), p);
        }
        Ok(out)
    }
}

/// Outcome → probability accumulator. Outcome kets are over `modes` followed by
/// `extra` unlabeled modes (exposed loss modes).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityBins {
    modes: ModeMap,
    extra: usize,
    bins: BTreeMap<Ket, f64>,
}

impl ProbabilityBins {
    pub fn new(modes: ModeMap, extra: usize) -> Self {
        Self {
            modes,
            extra,
            bins: BTreeMap::new(),
        }
    }

    /// |amplitude|² of every ket.
    pub fn from_state(state: &State, modes: ModeMap) -> Self {
        let extra = state.nmodes().saturating_sub(modes.nmodes());
        let mut b = Self::new(modes, extra);
        for (a, k) in state.terms() {
            b.add(k.clone(), a.norm_sqr());
        }
        b
    }

    pub fn modes(&self) -> &ModeMap {
        &self.modes
    }

    pub fn extra_modes(&self) -> usize {
        self.extra
    }

    pub fn add(&mut self, ket: Ket, p: f64) {
        *self.bins.entry(ket).or_insert(0.0) += p;
    }

    pub fn get(&self, ket: &Ket) -> f64 {
        self.bins.get(ket).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.bins.values().sum()
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Outcomes in lexicographic ket order.
    pub fn iter(&self) -> impl Iterator<Item = (&Ket, f64)> {
        self.bins.iter().map(|(k, &p)| (k, p))
    }

    pub fn merge(&mut self, other: &ProbabilityBins) {
        for (k, p) in other.iter() {
            self.add(k.clone(), p);
        }
    }

    pub fn scale(&mut self, f: f64) {
        for p in self.bins.values_mut() {
            *p *= f;
        }
    }

    /// Sum over packet labels (counter) or over packets within a period (timed).
    pub fn relabel(&self, kind: DetectorKind, nbase: usize) -> Result<ProbabilityBins> {
        let target = match kind {
            DetectorKind::Full => return Ok(self.clone()),
            DetectorKind::Counter => 1,
            DetectorKind::Timed => self.modes.npackets().div_ceil(nbase.max(1)),
        };
        let new_modes =
            ModeMap::with_channels(self.modes.channels().to_vec(), self.modes.npol(), target);
        let np = self.modes.nmodes();
        let mut map = Vec::with_capacity(np);
        for m in 0..np {
            let l = self.modes.label(m);
            let pk = match kind {
                DetectorKind::Counter => 0,
                _ => l.packet / nbase.max(1),
            };
            map.push(new_modes.mode(l.channel, l.pol.map_or(0, |p| p.index()), pk)?);
        }
        let mut out = ProbabilityBins::new(new_modes.clone(), self.extra);
        for (k, p) in self.iter() {
            let occ = k.as_slice();
            let mut v = vec![0u8; new_modes.nmodes() + self.extra];
            for m in 0..np {
                v[map[m]] += occ[m];
            }
            v[new_modes.nmodes()..].copy_from_slice(&occ[np..]);
            out.add(Ket::new(v), p);
        }
        Ok(out)
    }

    /// Human-readable outcome label, e.g. `| H(0)0, V(0)1 >`, or `|1 0 2>` when modes
    /// are plain channels.
    pub fn label(&self, ket: &Ket) -> String {
        if !self.modes.polarized() && self.modes.npackets() == 1 {
            compact(ket)
        } else {
            ket_label(ket, &self.modes)
        }
    }

    /// CSV with columns `ket,probability`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ket,probability\n");
        for (k, p) in self.iter() {
            let _ = writeln!(s, "{},{:.9}", compact(k), p);
        }
        s
    }
}

/// `|1 0 2>` form without commas, for CSV cells.
pub fn compact(ket: &Ket) -> String {
    let parts: Vec<String> = ket.as_slice().iter().map(|x| x.to_string()).collect();
    format!("|{}>", parts.join(" "))
}

/// Lists the occupied modes by label, repeated by occupation; modes past the map are
/// printed as `L<i>` (loss modes).
pub fn ket_label(ket: &Ket, modes: &ModeMap) -> String {
    let mut parts = Vec::new();
    for (m, &n) in ket.as_slice().iter().enumerate() {
        for _ in 0..n {
            if m < modes.nmodes() {
                parts.push(modes.label(m).to_string());
            } else {
                parts.push(format!("L{}", m - modes.nmodes()));
            }
        }
    }
    format!("| {} >", parts.join(", "))
}

/// Add Poisson(λ) photons to each detector with a positive dark rate. Each bin is split
/// into `trials` runs of weight p / trials.
pub fn dark_counts<R: Rng + ?Sized>(
    bins: &ProbabilityBins,
    rates: &[(usize, f64)],
    trials: usize,
    rng: &mut R,
) -> Result<ProbabilityBins> {
    if rates.iter().all(|&(_, l)| l <= 0.0) {
        return Ok(bins.clone());
    }
    run_trials(bins, trials, rng, |occ, rng| add_dark(occ, bins.modes(), rates, rng))
}

/// Zero each detector's channel with probability `blnk` when it holds photons.
pub fn dead_time<R: Rng + ?Sized>(
    bins: &ProbabilityBins,
    fractions: &[(usize, f64)],
    trials: usize,
    rng: &mut R,
) -> Result<ProbabilityBins> {
    if fractions.iter().all(|&(_, f)| f <= 0.0) {
        return Ok(bins.clone());
    }
    run_trials(bins, trials, rng, |occ, rng| blank(occ, bins.modes(), fractions, rng))
}

fn add_dark<R: Rng + ?Sized>(
    occ: &mut [u8],
    modes: &ModeMap,
    rates: &[(usize, f64)],
    rng: &mut R,
) -> Result<()> {
    for &(ch, lambda) in rates {
        if lambda <= 0.0 {
            continue;
        }
        let pois = Poisson::new(lambda).map_err(|e| Error::Parameter(e.to_string()))?;
        let k: f64 = pois.sample(rng);
        let m = modes.mode(ch, 0, 0)?;
        occ[m] = occ[m].saturating_add(k as u8);
    }
    Ok(())
}

fn blank<R: Rng + ?Sized>(
    occ: &mut [u8],
    modes: &ModeMap,
    fractions: &[(usize, f64)],
    rng: &mut R,
) -> Result<()> {
    for &(ch, f) in fractions {
        if f <= 0.0 {
            continue;
        }
        let sub = modes.channel_modes(ch)?;
        if sub.iter().any(|&m| occ[m] > 0) && rng.random::<f64>() < f {
            for m in sub {
                occ[m] = 0;
            }
        }
    }
    Ok(())
}

fn run_trials<R, F>(bins: &ProbabilityBins, trials: usize, rng: &mut R, mut f: F) -> Result<ProbabilityBins>
where
    R: Rng + ?Sized,
    F: FnMut(&mut [u8], &mut R) -> Result<()>,
{
    let trials = trials.max(1);
    let mut out = ProbabilityBins::new(bins.modes.clone(), bins.extra);
    for (k, p) in bins.iter() {
        let w = p / trials as f64;
        for _ in 0..trials {
            let mut occ = k.as_slice().to_vec();
            f(&mut occ, rng)?;
            out.add(Ket::new(occ), w);
        }
    }
    Ok(out)
}

/// Perturb every bin by N(0, stdev2) and clamp at zero; no renormalization.
pub fn add_noise<R: Rng + ?Sized>(bins: &ProbabilityBins, stdev2: f64, rng: &mut R) -> Result<ProbabilityBins> {
    if !(stdev2 >= 0.0) {
        return Err(Error::Parameter(format!("noise variance {stdev2} < 0")));
    }
    if stdev2 == 0.0 {
        return Ok(bins.clone());
    }
    let normal = Normal::new(0.0, stdev2.sqrt()).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut out = bins.clone();
    for p in out.bins.values_mut() {
        *p = (*p + normal.sample(rng)).max(0.0);
    }
    Ok(out)
}

/// Everything the detection pipeline needs besides the state.
#[derive(Debug, Clone)]
pub struct DetectionSetup {
    pub reduction: Reduction,
    pub detectors: Vec<DetectorSpec>,
    pub kind: DetectorKind,
    /// Base packets per period, for timed relabeling.
    pub nbase: usize,
    pub noise: f64,
    pub keep_loss_modes: bool,
    /// Runs per bin for the stochastic detector effects.
    pub trials: usize,
}

impl DetectionSetup {
    fn has_stochastic_effects(&self) -> bool {
        self.detectors
            .iter()
            .any(|d| d.dark_rate > 0.0 || d.dead_fraction > 0.0)
    }

    /// The six steps in order: probabilities, dark counts, dead time, post-selection
    /// with loss and ignored-channel elimination, relabeling, noise.
    pub fn run<R: Rng + ?Sized>(&self, state: &State, rng: &mut R) -> Result<ProbabilityBins> {
        let modes = self.reduction.modes().clone();
        let mut bins = ProbabilityBins::from_state(state, modes);
        if self.has_stochastic_effects() {
            let rates: Vec<(usize, f64)> = self.detectors.iter().map(|d| (d.channel, d.dark_rate)).collect();
            let fractions: Vec<(usize, f64)> =
                self.detectors.iter().map(|d| (d.channel, d.dead_fraction)).collect();
            bins = run_trials(&bins, self.trials, rng, |occ, rng| {
                add_dark(occ, self.reduction.modes(), &rates, rng)?;
                blank(occ, self.reduction.modes(), &fractions, rng)
            })?;
        }
        let bins = self.reduction.reduce_bins(&bins, self.keep_loss_modes)?;
        let bins = bins.relabel(self.kind, self.nbase)?;
        add_noise(&bins, self.noise, rng)
    }
}

/// How a density matrix is normalized at read-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// Divide by the number of accumulated runs.
    #[default]
    Runs,
    /// Divide by the trace (the post-selected, renormalized state).
    Trace,
}

/// Dynamically grown outcome × outcome accumulator of |ψ⟩⟨ψ| terms.
#[derive(Debug, Clone, Default)]
pub struct DensityMatrix {
    labels: Vec<Ket>,
    index: HashMap<Ket, usize>,
    rho: Vec<Vec<C64>>,
    runs: u64,
    nmodes: Option<usize>,
}

impl DensityMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&mut self, ket: &Ket) -> usize {
        if let Some(&i) = self.index.get(ket) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(ket.clone());
        self.index.insert(ket.clone(), i);
        for row in &mut self.rho {
            row.push(C64::default());
        }
        self.rho.push(vec![C64::default(); i + 1]);
        i
    }

    /// ρ += weight · |ψ⟩⟨ψ|. Does not count as a run.
    pub fn add_state(&mut self, state: &State, weight: f64) -> Result<()> {
        match self.nmodes {
            Some(n) if n != state.nmodes() => {
                return Err(Error::Dimension {
                    expected: n,
                    found: state.nmodes(),
                })
            }
            _ => self.nmodes = Some(state.nmodes()),
        }
        let idx: Vec<(usize, C64)> = state.terms().map(|(a, k)| (self.slot(k), a)).collect();
        for &(i, a) in &idx {
            for &(j, b) in &idx {
                self.rho[i][j] += a * b.conj() * weight;
            }
        }
        Ok(())
    }

    /// Accumulate one run made of incoherent branches.
    pub fn add_run(&mut self, branches: &[State]) -> Result<()> {
        for b in branches {
            self.add_state(b, 1.0)?;
        }
        self.runs += 1;
        Ok(())
    }

    pub fn add_runs(&mut self, n: u64) {
        self.runs += n;
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }

    pub fn labels(&self) -> &[Ket] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[i][i].re).sum()
    }

    /// Unnormalized entry.
    pub fn raw(&self, i: usize, j: usize) -> C64 {
        self.rho[i][j]
    }

    /// Entrywise sum of two accumulators, runs included.
    pub fn merge(&mut self, other: &DensityMatrix) -> Result<()> {
        if let (Some(a), Some(b)) = (self.nmodes, other.nmodes) {
            if a != b {
                return Err(Error::Dimension { expected: a, found: b });
            }
        }
        if self.nmodes.is_none() {
            self.nmodes = other.nmodes;
        }
        let map: Vec<usize> = other.labels.iter().map(|k| self.slot(k)).collect();
        for (i, &mi) in map.iter().enumerate() {
            for (j, &mj) in map.iter().enumerate() {
                self.rho[mi][mj] += other.rho[i][j];
            }
        }
        self.runs += other.runs;
        Ok(())
    }

    /// Normalized matrix in label order.
    pub fn matrix(&self, readout: Readout) -> Result<CMatrix> {
        let d = match readout {
            Readout::Runs => self.runs as f64,
            Readout::Trace => self.trace(),
        };
        if !(d > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let n = self.dim();
        Ok(CMatrix::from_fn(n, n, |i, j| self.rho[i][j] / d))
    }

    /// Copy without labels whose diagonal share of the trace is below `min_fraction`.
    pub fn truncated(&self, min_fraction: f64) -> DensityMatrix {
        let tr = self.trace();
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| self.rho[i][i].re >= min_fraction * tr)
            .collect();
        let mut out = DensityMatrix {
            runs: self.runs,
            nmodes: self.nmodes,
            ..Default::default()
        };
        for &i in &keep {
            out.slot(&self.labels[i]);
        }
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                out.rho[a][b] = self.rho[i][j];
            }
        }
        out
    }

    /// Copy with labels sorted lexicographically descending (H before V, early packets first).
    pub fn sorted(&self) -> DensityMatrix {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| self.labels[b].cmp(&self.labels[a]));
        let mut out = DensityMatrix {
            runs: self.runs,
            nmodes: self.nmodes,
            ..Default::default()
        };
        for &i in &order {
            out.slot(&self.labels[i]);
        }
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                out.rho[a][b] = self.rho[i][j];
            }
        }
        out
    }

    /// Rows of `label  re re re ...`, the real parts printed with `decimals` digits.
    pub fn listing(&self, modes: &ModeMap, readout: Readout, decimals: usize) -> Result<String> {
        let m = self.matrix(readout)?;
        let labels: Vec<String> = self.labels.iter().map(|k| ket_label(k, modes)).collect();
        let width = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        let mut s = String::new();
        for (i, l) in labels.iter().enumerate() {
            let _ = write!(s, "{l:<width$}");
            for j in 0..self.dim() {
                let _ = write!(s, " {:>w$.decimals$}", m[(i, j)].re, w = decimals + 3);
            }
            s.push('\n');
        }
        Ok(s)
    }
}
