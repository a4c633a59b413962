//! Photon-level device description: input photons with their wavepackets, quantum-dot
//! sources, circuit elements and detectors. A device is declarative; [`Device::circuit`]
//! and [`Device::prepare`] finalize it (emitter first, then the user elements).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::circuit::{Circuit, Element};
use crate::cores::{transform, BasisSpec, CoreKind};
use crate::error::{Error, Result};
use crate::fock::{Ket, QubitMap, State, TermRecord};
use crate::linalg::{random_unitary, CMatrix};
use crate::losses::dilate;
use crate::measurement::{DensityMatrix, DetectionSetup, DetectorKind, DetectorSpec, ProbabilityBins, Reduction};
use crate::modes::{ModeMap, Pol};
use crate::packets::{PacketSpec, PacketTable};
use crate::sources::{sample_qd_pair, QdParams};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
struct Photons {
    n: u8,
    channel: usize,
    pol: Pol,
    /// Base packet index; `None` means packet label 0.
    base: Option<usize>,
    period: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct QdSource {
    ch_xx: usize,
    ch_x: usize,
    params: QdParams,
    base_xx: usize,
    base_x: usize,
}

#[derive(Debug, Clone)]
pub struct Device {
    nchannels: usize,
    polarized: bool,
    packets: PacketTable,
    max_packets: Option<usize>,
    kind: DetectorKind,
    photons: Vec<Photons>,
    explicit: Option<State>,
    qds: Vec<QdSource>,
    elements: Vec<Element>,
    detectors: Vec<DetectorSpec>,
    ignored: Vec<usize>,
    open: Vec<usize>,
    noise: f64,
}

/// Simulation switches shared by [`Device::run`] and [`Device::ensemble`].
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub core: CoreKind,
    pub basis: BasisSpec,
    /// Dilate lossy circuits; when off the contraction is applied as is.
    pub losses: bool,
    pub keep_loss_modes: bool,
    /// Runs per bin for dark counts and dead time.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            core: CoreKind::Direct,
            basis: BasisSpec::Full,
            losses: true,
            keep_loss_modes: false,
            trials: 1000,
            seed: 0,
        }
    }
}

/// Finalized device: circuit, the matrix actually simulated and the detection setup.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub circuit: Circuit,
    /// `U·E`, or its dilation when losses are on.
    pub matrix: CMatrix,
    pub nloss: usize,
    pub setup: DetectionSetup,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Raw output on the circuit (plus loss) modes.
    pub output: State,
    /// Coherently post-selected state; only defined without loss modes and ignored
    /// channels.
    pub post_selected: Option<State>,
    /// Modes of `post_selected`: the circuit modes minus conditioned channels.
    pub out_modes: ModeMap,
    pub bins: ProbabilityBins,
    /// Accepted probability before relabeling and noise, relative to the input norm.
    pub success: f64,
}

impl Device {
    pub fn new(nchannels: usize, polarized: bool) -> Self {
        Self {
            nchannels,
            polarized,
            packets: PacketTable::new(1),
            max_packets: None,
            kind: DetectorKind::Counter,
            photons: Vec::new(),
            explicit: None,
            qds: Vec::new(),
            elements: Vec::new(),
            detectors: Vec::new(),
            ignored: Vec::new(),
            open: Vec::new(),
            noise: 0.0,
        }
    }

    /// Photon time is split into `nperiods` periods; must be set before packets are added.
    pub fn with_periods(mut self, nperiods: usize) -> Result<Self> {
        if self.packets.nbase() > 0 {
            return Err(Error::Parameter("periods must be set before packets".into()));
        }
        self.packets = PacketTable::new(nperiods);
        Ok(self)
    }

    /// Cap on the number of distinct base packets.
    pub fn with_max_packets(mut self, max: usize) -> Self {
        self.max_packets = Some(max);
        self
    }

    pub fn with_detection(mut self, kind: DetectorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn nchannels(&self) -> usize {
        self.nchannels
    }

    pub fn polarized(&self) -> bool {
        self.polarized
    }

    pub fn detection(&self) -> DetectorKind {
        self.kind
    }

    pub fn packets(&self) -> &PacketTable {
        &self.packets
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn detectors(&self) -> &[DetectorSpec] {
        &self.detectors
    }

    pub fn open_channels(&self) -> &[usize] {
        &self.open
    }

    pub fn has_sources(&self) -> bool {
        !self.qds.is_empty()
    }

    /// Mode map of the finalized circuit.
    pub fn modes(&self) -> ModeMap {
        ModeMap::new(self.nchannels, self.polarized, self.packets.nlabels())
    }

    fn check_channel(&self, ch: usize) -> Result<()> {
        if ch >= self.nchannels {
            return Err(Error::ChannelOutOfRange {
                channel: ch,
                nchannels: self.nchannels,
            });
        }
        Ok(())
    }

    fn register(&mut self, spec: PacketSpec) -> Result<usize> {
        let mut table = self.packets.clone();
        let b = table.register(spec)?;
        if let Some(max) = self.max_packets {
            if table.nbase() > max {
                return Err(Error::Capacity(format!("more than {max} packets")));
            }
        }
        self.packets = table;
        Ok(b)
    }

    fn resolve_pol(&self, pol: Option<Pol>) -> Result<Pol> {
        match (self.polarized, pol) {
            (false, Some(Pol::V)) => Err(Error::Unpolarized),
            (_, p) => Ok(p.unwrap_or(Pol::H)),
        }
    }

    /// `n` photons in `channel`, packet label 0.
    pub fn add_photon(&mut self, n: u8, channel: usize) -> Result<()> {
        self.check_channel(channel)?;
        self.photons.push(Photons {
            n,
            channel,
            pol: Pol::H,
            base: None,
            period: 0,
        });
        Ok(())
    }

    /// `n` photons with polarization `pol` in wavepacket `packet`. Identical packets are
    /// registered once.
    pub fn add_photons(&mut self, n: u8, channel: usize, pol: Option<Pol>, packet: PacketSpec) -> Result<()> {
        self.check_channel(channel)?;
        let pol = self.resolve_pol(pol)?;
        let base = self.register(packet)?;
        self.photons.push(Photons {
            n,
            channel,
            pol,
            base: Some(base),
            period: packet.period,
        });
        Ok(())
    }

    /// Replace the photon list by an explicit state on the finalized mode space.
    pub fn set_input_state(&mut self, state: State) {
        self.explicit = Some(state);
    }

    /// Quantum-dot pair source: XX photon in `ch_xx`, X photon in `ch_x`.
    pub fn add_qd(&mut self, ch_xx: usize, ch_x: usize, params: QdParams) -> Result<()> {
        if !self.polarized {
            return Err(Error::Unpolarized);
        }
        self.check_channel(ch_xx)?;
        self.check_channel(ch_x)?;
        params.validate()?;
        let base_xx = self.register(params.xx)?;
        let base_x = self.register(params.x)?;
        self.qds.push(QdSource {
            ch_xx,
            ch_x,
            params,
            base_xx,
            base_x,
        });
        Ok(())
    }

    /// Mark a gate-composition port.
    pub fn open_channel(&mut self, ch: usize) -> Result<()> {
        self.check_channel(ch)?;
        if !self.open.contains(&ch) {
            self.open.push(ch);
        }
        Ok(())
    }

    /// Path-encoded input: value 1 puts a photon in the first channel of the pair, 0 in
    /// the second.
    pub fn qubits(&mut self, values: &[u8], map: &QubitMap) -> Result<()> {
        if values.len() != map.nqubits() {
            return Err(Error::Encoding(format!(
                "{} values for {} qubits",
                values.len(),
                map.nqubits()
            )));
        }
        for (&v, &(a, b)) in values.iter().zip(map.pairs()) {
            let ch = match v {
                1 => a,
                0 => b,
                _ => return Err(Error::Encoding(format!("qubit value {v}"))),
            };
            self.add_photon(1, ch)?;
        }
        Ok(())
    }

    /// Display marker; no effect on the simulation.
    pub fn separator(&mut self) {}

    pub fn apply(&mut self, element: Element) -> Result<()> {
        for &ch in &element.channels() {
            self.check_channel(ch)?;
        }
        if element.is_polarization_element() && !self.polarized {
            return Err(Error::Unpolarized);
        }
        if let Element::Delay { periods, .. } = element {
            if periods >= self.packets.nperiods() {
                return Err(Error::Capacity(format!(
                    "delay of {periods} periods with {} periods",
                    self.packets.nperiods()
                )));
            }
        } else {
            element.local_matrix()?;
        }
        self.elements.push(element);
        Ok(())
    }

    pub fn beamsplitter(&mut self, a: usize, b: usize, theta: f64, phi: f64) -> Result<()> {
        self.apply(Element::Beamsplitter {
            ch: [a, b],
            theta,
            phi,
        })
    }

    pub fn phase_shifter(&mut self, ch: usize, phi: f64) -> Result<()> {
        self.apply(Element::PhaseShifter { ch, phi })
    }

    pub fn loss(&mut self, ch: usize, l: f64) -> Result<()> {
        self.apply(Element::Loss { ch, l })
    }

    pub fn add_detector(&mut self, spec: DetectorSpec) -> Result<()> {
        spec.validate()?;
        self.check_channel(spec.channel)?;
        if self.detectors.iter().any(|d| d.channel == spec.channel) {
            return Err(Error::DuplicateDetector(spec.channel));
        }
        self.detectors.push(spec);
        Ok(())
    }

    pub fn detector(&mut self, channel: usize, condition: Option<u32>) -> Result<()> {
        self.add_detector(DetectorSpec::new(channel, condition))
    }

    pub fn ignore(&mut self, ch: usize) -> Result<()> {
        self.check_channel(ch)?;
        if !self.ignored.contains(&ch) {
            self.ignored.push(ch);
        }
        Ok(())
    }

    pub fn noise(&mut self, stdev2: f64) -> Result<()> {
        if !(stdev2 >= 0.0) {
            return Err(Error::Parameter(format!("noise variance {stdev2} < 0")));
        }
        self.noise = stdev2;
        Ok(())
    }

    /// Embed `sub` with its channel `c` placed on `channels[c]`: elements, photons,
    /// sources, detectors and ignored channels are replayed in order.
    pub fn add_gate(&mut self, channels: &[usize], sub: &Device) -> Result<()> {
        if channels.len() != sub.nchannels {
            return Err(Error::Gate(format!(
                "{} channels given for a {}-channel gate",
                channels.len(),
                sub.nchannels
            )));
        }
        if sub.polarized && !self.polarized {
            return Err(Error::Unpolarized);
        }
        if sub.explicit.is_some() {
            return Err(Error::Gate("gates with an explicit input state cannot be embedded".into()));
        }
        for (i, &c) in channels.iter().enumerate() {
            self.check_channel(c)?;
            if channels[..i].contains(&c) {
                return Err(Error::DuplicateTarget(c));
            }
        }
        let mut next = self.clone();
        let mut bases = Vec::with_capacity(sub.packets.nbase());
        for spec in sub.packets.base() {
            bases.push(next.register(*spec)?);
        }
        for e in &sub.elements {
            next.apply(e.remapped(channels)?)?;
        }
        for p in &sub.photons {
            next.photons.push(Photons {
                channel: channels[p.channel],
                base: p.base.map(|b| bases[b]),
                ..p.clone()
            });
        }
        for q in &sub.qds {
            next.qds.push(QdSource {
                ch_xx: channels[q.ch_xx],
                ch_x: channels[q.ch_x],
                base_xx: bases[q.base_xx],
                base_x: bases[q.base_x],
                params: q.params.clone(),
            });
        }
        for d in &sub.detectors {
            next.add_detector(DetectorSpec {
                channel: channels[d.channel],
                ..d.clone()
            })?;
        }
        for &i in &sub.ignored {
            next.ignore(channels[i])?;
        }
        *self = next;
        Ok(())
    }

    /// Finalized circuit: emitter, user elements, then detector efficiency losses.
    pub fn circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::with_packets(self.nchannels, self.polarized, self.packets.clone());
        if self.packets.nbase() > 0 {
            c.apply_emitter()?;
        }
        for e in &self.elements {
            c.apply_element(e.clone())?;
        }
        for d in &self.detectors {
            c.add_detector(d.clone())?;
        }
        for &i in &self.ignored {
            c.ignore(i)?;
        }
        c.set_noise(self.noise)?;
        Ok(c)
    }

    fn label(&self, base: Option<usize>, period: usize) -> usize {
        match base {
            Some(b) => self.packets.label(b, period),
            None => 0,
        }
    }

    /// Deterministic part of the input (declared photons or the explicit state).
    pub fn input(&self) -> Result<State> {
        let modes = self.modes();
        if let Some(s) = &self.explicit {
            if s.nmodes() != modes.nmodes() {
                return Err(Error::Dimension {
                    expected: modes.nmodes(),
                    found: s.nmodes(),
                });
            }
            return Ok(s.clone());
        }
        let mut occ = vec![0u8; modes.nmodes()];
        for p in &self.photons {
            let m = modes.mode(p.channel, p.pol.index().min(modes.npol() - 1), self.label(p.base, p.period))?;
            occ[m] = occ[m]
                .checked_add(p.n)
                .ok_or(Error::Capacity("occupation exceeds 255".into()))?;
        }
        Ok(State::from_ket(Ket::new(occ)))
    }

    /// Input with every quantum-dot source drawn once.
    pub fn sample_input<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<State> {
        let modes = self.modes();
        let mut s = self.input()?;
        for q in &self.qds {
            let pair = sample_qd_pair(&q.params, rng)?;
            let frag = pair.state(
                &modes,
                q.ch_xx,
                self.packets.label(q.base_xx, q.params.xx.period),
                q.ch_x,
                self.packets.label(q.base_x, q.params.x.period),
            )?;
            s = s.product(&frag)?;
        }
        Ok(s)
    }

    pub fn prepare(&self, opts: &SimOptions) -> Result<Prepared> {
        let circuit = self.circuit()?;
        let n = circuit.nmodes();
        let (matrix, nloss) = if circuit.is_lossy() && opts.losses {
            let mut d = dilate(circuit.element_matrix())?;
            if let Some(e) = circuit.emitter() {
                d = d.then_after(e)?;
            }
            (d.matrix().clone(), n)
        } else {
            (circuit.matrix(), 0)
        };
        let reduction = Reduction::new(
            circuit.modes().clone(),
            nloss,
            circuit.conditions(),
            circuit.ignored().to_vec(),
        );
        let setup = DetectionSetup {
            reduction,
            detectors: circuit.detectors().to_vec(),
            kind: self.kind,
            nbase: self.packets.nbase().max(1),
            noise: circuit.noise(),
            keep_loss_modes: opts.keep_loss_modes,
            trials: opts.trials,
        };
        Ok(Prepared {
            circuit,
            matrix,
            nloss,
            setup,
        })
    }

    /// One simulation. Quantum-dot sources are drawn from `opts.seed`.
    pub fn run(&self, opts: &SimOptions) -> Result<RunResult> {
        let prep = self.prepare(opts)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let input = self.sample_input(&mut rng)?.padded(prep.matrix.nrows())?;
        prep.run_state(&input, opts, &mut rng)
    }

    /// `runs` independent simulations accumulated into a density matrix over the
    /// reduced outcome kets. Run `i` uses stream `i` of the seed, so results do not
    /// depend on the thread count.
    pub fn ensemble(&self, runs: u64, opts: &SimOptions) -> Result<DensityMatrix> {
        let prep = self.prepare(opts)?;
        let nbase = self.packets.nbase().max(1);
        let outcomes: Vec<Result<Vec<State>>> = (0..runs)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(i);
                let input = self.sample_input(&mut rng)?.padded(prep.matrix.nrows())?;
                let out = transform(&input, &prep.matrix, opts.core, &opts.basis)?;
                let branches = prep.setup.reduction.branches(&out)?;
                coarse_branches(&branches, prep.setup.reduction.out_modes(), self.kind, nbase)
            })
            .collect();
        let mut dm = DensityMatrix::new();
        for o in outcomes {
            dm.add_run(&o?)?;
        }
        Ok(dm)
    }

    /// Mode map of ensemble density-matrix labels.
    pub fn ensemble_modes(&self) -> ModeMap {
        let circuit_modes = self.modes();
        let mut removed: Vec<usize> = self
            .detectors
            .iter()
            .filter(|d| d.condition.is_some())
            .map(|d| d.channel)
            .collect();
        removed.extend(self.ignored.iter().copied());
        let out = circuit_modes.without_channels(&removed);
        coarse_modes(&out, self.kind, self.packets.nbase().max(1))
    }
}

impl Prepared {
    pub fn run_state<R: Rng + ?Sized>(&self, input: &State, opts: &SimOptions, rng: &mut R) -> Result<RunResult> {
        let output = transform(input, &self.matrix, opts.core, &opts.basis)?;
        let red = &self.setup.reduction;
        let post_selected = if self.nloss == 0 && red.ignored().is_empty() {
            Some(red.apply_coherent(&output)?)
        } else {
            None
        };
        let norm = input.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let mut unit = output.clone();
        unit.scale(C64::new(norm.sqrt().recip(), 0.0));
        let raw = ProbabilityBins::from_state(&unit, red.modes().clone());
        let success = red.reduce_bins(&raw, false)?.total();
        let bins = self.setup.run(&unit, rng)?;
        Ok(RunResult {
            output,
            post_selected,
            out_modes: red.out_modes().clone(),
            bins,
            success,
        })
    }
}

fn coarse_modes(modes: &ModeMap, kind: DetectorKind, nbase: usize) -> ModeMap {
    let npk = match kind {
        DetectorKind::Full => return modes.clone(),
        DetectorKind::Counter => 1,
        DetectorKind::Timed => modes.npackets().div_ceil(nbase),
    };
    ModeMap::with_channels(modes.channels().to_vec(), modes.npol(), npk)
}

/// Drop the packet detail the detector kind does not resolve. The per-label photon
/// totals act as the traced environment: terms sharing them stay coherent.
fn coarse_branches(branches: &[State], modes: &ModeMap, kind: DetectorKind, nbase: usize) -> Result<Vec<State>> {
    if kind == DetectorKind::Full {
        return Ok(branches.to_vec());
    }
    let target = coarse_modes(modes, kind, nbase);
    let npk = modes.npackets();
    let mut out = Vec::new();
    for b in branches {
        let mut groups: BTreeMap<Vec<u32>, State> = BTreeMap::new();
        for (a, k) in b.terms() {
            let mut occ = vec![0u8; target.nmodes()];
            let mut env = vec![0u32; npk];
            for (m, &x) in k.as_slice().iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let l = modes.label(m);
                let pk = match kind {
                    DetectorKind::Counter => 0,
                    _ => l.packet / nbase,
                };
                occ[target.mode(l.channel, l.pol.map_or(0, |p| p.index()), pk)?] += x;
                env[l.packet] += x as u32;
            }
            groups
                .entry(env)
                .or_insert_with(|| State::new(target.nmodes()))
                .add_term(a, Ket::new(occ))?;
        }
        out.extend(groups.into_values().filter(|s| !s.is_empty()));
    }
    Ok(out)
}

/// Element entry of a device file: `{"kind": ..., "ch": [...], "params": {...}}`.
/// Kind `gate` embeds a nested device; kind `random` draws a Haar-random unitary from
/// `params.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub kind: String,
    pub ch: Vec<usize>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<Box<DeviceFile>>,
}

impl ElementRecord {
    pub fn from_element(e: &Element) -> ElementRecord {
        let mut obj = match serde_json::to_value(e) {
            Ok(Value::Object(o)) => o,
            _ => Map::new(),
        };
        let kind = obj.remove("kind").and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        obj.remove("ch");
        ElementRecord {
            kind,
            ch: e.channels(),
            params: obj,
            device: None,
        }
    }

    fn to_element(&self) -> Result<Element> {
        if self.kind == "random" {
            let seed = self.params.get("seed").and_then(Value::as_u64).unwrap_or(0);
            let u = random_unitary(self.ch.len(), &mut ChaCha8Rng::seed_from_u64(seed));
            let matrix = (0..u.nrows())
                .map(|i| (0..u.ncols()).map(|j| u[(i, j)]).collect())
                .collect();
            return Ok(Element::Custom {
                ch: self.ch.clone(),
                matrix,
            });
        }
        let build = |ch: Value| -> std::result::Result<Element, serde_json::Error> {
            let mut obj = self.params.clone();
            obj.insert("kind".into(), Value::String(self.kind.clone()));
            obj.insert("ch".into(), ch);
            serde_json::from_value(Value::Object(obj))
        };
        let as_list = Value::from(self.ch.clone());
        let res = match build(as_list) {
            Err(_) if self.ch.len() == 1 => build(Value::from(self.ch[0])),
            r => r,
        };
        res.map_err(|e| Error::InvalidElement(format!("{}: {e}", self.kind)))
    }
}

/// Photon group of a device file. Without `packet` the photons take packet label 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonRecord {
    #[serde(default = "one")]
    pub n: u8,
    #[serde(alias = "channel")]
    pub ch: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pol: Option<Pol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketSpec>,
}

fn one() -> u8 {
    1
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitRecord {
    pub values: Vec<u8>,
    /// `[[first channels], [second channels]]`.
    pub map: [Vec<usize>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdRecord {
    /// XX channel, X channel.
    pub ch: [usize; 2],
    #[serde(flatten)]
    pub params: QdParams,
}

/// Serialized device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub channels: usize,
    #[serde(default)]
    pub polarized: bool,
    #[serde(default = "one_usize")]
    pub periods: usize,
    #[serde(default)]
    pub detection: DetectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_packets: Option<usize>,
    /// Packets registered up front, fixing their label order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub packets: Vec<PacketSpec>,
    #[serde(default, alias = "input", skip_serializing_if = "Vec::is_empty")]
    pub photons: Vec<PhotonRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<QubitRecord>,
    /// Explicit input state over the finalized modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qd: Vec<QdRecord>,
    #[serde(default)]
    pub elements: Vec<ElementRecord>,
    #[serde(default)]
    pub detectors: Vec<DetectorSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ignore: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub open: Vec<usize>,
    #[serde(default)]
    pub noise: f64,
}

impl DeviceFile {
    pub fn build(&self) -> Result<Device> {
        let mut d = Device::new(self.channels, self.polarized)
            .with_periods(self.periods)?
            .with_detection(self.detection);
        if let Some(m) = self.max_packets {
            d = d.with_max_packets(m);
        }
        for p in &self.packets {
            d.register(*p)?;
        }
        for q in &self.qd {
            d.add_qd(q.ch[0], q.ch[1], q.params.clone())?;
        }
        for p in &self.photons {
            match p.packet {
                Some(pk) => d.add_photons(p.n, p.ch, p.pol, pk)?,
                None => {
                    let pol = d.resolve_pol(p.pol)?;
                    d.check_channel(p.ch)?;
                    d.photons.push(Photons {
                        n: p.n,
                        channel: p.ch,
                        pol,
                        base: None,
                        period: 0,
                    });
                }
            }
        }
        if let Some(q) = &self.qubits {
            let map = QubitMap::from_rows([&q.map[0], &q.map[1]])?;
            d.qubits(&q.values, &map)?;
        }
        for &c in &self.open {
            d.open_channel(c)?;
        }
        for (i, e) in self.elements.iter().enumerate() {
            let res = match (&e.device, e.kind.as_str()) {
                (Some(sub), "gate") => sub.build().and_then(|s| d.add_gate(&e.ch, &s)),
                (None, "gate") => Err(Error::InvalidElement("gate without device".into())),
                (Some(_), _) => Err(Error::InvalidElement("only gates carry a device".into())),
                (None, _) => e.to_element().and_then(|el| d.apply(el)),
            };
            res.map_err(|err| match err {
                Error::InvalidElement(m) => Error::InvalidElement(format!("element {i}: {m}")),
                other => other,
            })?;
        }
        for s in &self.detectors {
            d.add_detector(s.clone())?;
        }
        for &c in &self.ignore {
            d.ignore(c)?;
        }
        d.noise(self.noise)?;
        if let Some(recs) = &self.state {
            let n = d.modes().nmodes();
            d.set_input_state(State::from_records(recs, Some(n))?);
        }
        Ok(d)
    }
}

impl Device {
    /// Parse a device file. Schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Device> {
        let file: DeviceFile =
            serde_json::from_str(text).map_err(|e| Error::Parameter(format!("device file: {e}")))?;
        file.build()
    }

    /// Serializable form. Photon records keep their packets; gates appear flattened.
    pub fn to_file(&self) -> DeviceFile {
        DeviceFile {
            channels: self.nchannels,
            polarized: self.polarized,
            periods: self.packets.nperiods(),
            detection: self.kind,
            max_packets: self.max_packets,
            packets: self.packets.base().to_vec(),
            photons: self
                .photons
                .iter()
                .map(|p| PhotonRecord {
                    n: p.n,
                    ch: p.channel,
                    pol: self.polarized.then_some(p.pol),
                    packet: p.base.map(|b| self.packets.base()[b].in_period(p.period)),
                })
                .collect(),
            qubits: None,
            state: self.explicit.as_ref().map(State::to_records),
            qd: self
                .qds
                .iter()
                .map(|q| QdRecord {
                    ch: [q.ch_xx, q.ch_x],
                    params: q.params.clone(),
                })
                .collect(),
            elements: self.elements.iter().map(ElementRecord::from_element).collect(),
            detectors: self.detectors.clone(),
            ignore: self.ignored.clone(),
            open: self.open.clone(),
            noise: self.noise,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("device file serializes")
    }
}
