//! Circuits: the element catalog, its local matrices, and the composed mode-space
//! transformation `U = U_n ... U_2 U_1`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, CMatrix};
use crate::measurement::DetectorSpec;
use crate::modes::{ModeMap, Pol};
use crate::packets::{delay_matrix, emitter_matrix, PacketTable};
use crate::C64;

/// Beamsplitter angle inside the NSX gate, in degrees.
pub const NSX_ANGLE: f64 = 65.5302;

/// One entry of the element catalog. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Beamsplitter {
        ch: [usize; 2],
        theta: f64,
        phi: f64,
    },
    /// Thin dielectric film with transmission `t` and reflection `r`.
    Dielectric { ch: [usize; 2], t: C64, r: C64 },
    Mmi2 { ch: [usize; 2] },
    Rewire { ch: [usize; 2] },
    PhaseShifter { ch: usize, phi: f64 },
    /// Lossy medium removing a fraction `l` of the photons.
    Loss { ch: usize, l: f64 },
    /// Nonlinear sign gate on `ch[0]` with ancillas `ch[1]`, `ch[2]`.
    Nsx { ch: [usize; 3] },
    Rotator { ch: usize, theta: f64, phi: f64 },
    /// Routes polarization `pol` across the two channels; the other polarization passes.
    PolBeamsplitter { ch: [usize; 2], pol: Pol },
    HalfWave { ch: usize, alpha: f64 },
    QuarterWave { ch: usize, alpha: f64 },
    /// Shift packets on `ch` forward by whole periods.
    Delay { ch: usize, periods: usize },
    /// Arbitrary channel-level matrix, e.g. a random circuit.
    Custom { ch: Vec<usize>, matrix: Vec<Vec<C64>> },
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn expi(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn beamsplitter(theta_deg: f64, phi_deg: f64) -> CMatrix {
    let (s, co) = theta_deg.to_radians().sin_cos();
    let phi = phi_deg.to_radians();
    CMatrix::from_row_slice(
        2,
        2,
        &[c(co), -expi(phi) * s, expi(-phi) * s, c(co)],
    )
}

impl Element {
    pub fn channels(&self) -> Vec<usize> {
        match self {
            Element::Beamsplitter { ch, .. }
            | Element::Dielectric { ch, .. }
            | Element::Mmi2 { ch }
            | Element::Rewire { ch }
            | Element::PolBeamsplitter { ch, .. } => ch.to_vec(),
            Element::Nsx { ch } => ch.to_vec(),
            Element::PhaseShifter { ch, .. }
            | Element::Loss { ch, .. }
            | Element::Rotator { ch, .. }
            | Element::HalfWave { ch, .. }
            | Element::QuarterWave { ch, .. }
            | Element::Delay { ch, .. } => vec![*ch],
            Element::Custom { ch, .. } => ch.clone(),
        }
    }

    /// Same element acting on `map[c]` instead of channel `c`.
    pub fn remapped(&self, map: &[usize]) -> Result<Element> {
        let m = |c: usize| -> Result<usize> {
            map.get(c).copied().ok_or(Error::Gate(format!(
                "channel {c} has no mapping ({} channels given)",
                map.len()
            )))
        };
        let mut e = self.clone();
        match &mut e {
            Element::Beamsplitter { ch, .. }
            | Element::Dielectric { ch, .. }
            | Element::Mmi2 { ch }
            | Element::Rewire { ch }
            | Element::PolBeamsplitter { ch, .. } => {
                *ch = [m(ch[0])?, m(ch[1])?];
            }
            Element::Nsx { ch } => *ch = [m(ch[0])?, m(ch[1])?, m(ch[2])?],
            Element::PhaseShifter { ch, .. }
            | Element::Loss { ch, .. }
            | Element::Rotator { ch, .. }
            | Element::HalfWave { ch, .. }
            | Element::QuarterWave { ch, .. }
            | Element::Delay { ch, .. } => *ch = m(*ch)?,
            Element::Custom { ch, .. } => {
                for c in ch.iter_mut() {
                    *c = m(*c)?;
                }
            }
        }
        Ok(e)
    }

    pub fn is_polarization_element(&self) -> bool {
        matches!(
            self,
            Element::Rotator { .. }
                | Element::PolBeamsplitter { .. }
                | Element::HalfWave { .. }
                | Element::QuarterWave { .. }
        )
    }

    fn check_params(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidElement(format!("{what} is not finite")))
            }
        };
        match self {
            Element::Beamsplitter { theta, phi, .. } | Element::Rotator { theta, phi, .. } => {
                finite(*theta, "theta")?;
                finite(*phi, "phi")
            }
            Element::PhaseShifter { phi, .. } => finite(*phi, "phi"),
            Element::HalfWave { alpha, .. } | Element::QuarterWave { alpha, .. } => {
                finite(*alpha, "alpha")
            }
            Element::Dielectric { t, r, .. } => {
                if t.norm_sqr() + r.norm_sqr() > 1.0 + 1e-12 {
                    Err(Error::InvalidElement(format!(
                        "dielectric |t|²+|r|² = {} exceeds 1",
                        t.norm_sqr() + r.norm_sqr()
                    )))
                } else {
                    Ok(())
                }
            }
            Element::Loss { l, .. } => {
                if (0.0..=1.0).contains(l) {
                    Ok(())
                } else {
                    Err(Error::InvalidElement(format!("loss {l} outside [0, 1]")))
                }
            }
            Element::Custom { ch, matrix } => {
                if matrix.len() != ch.len() || matrix.iter().any(|r| r.len() != ch.len()) {
                    Err(Error::InvalidElement(
                        "custom matrix size does not match its channels".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Whether the local matrix may shrink probability.
    pub fn is_lossy(&self) -> bool {
        match self {
            Element::Loss { l, .. } => *l > 0.0,
            Element::Dielectric { .. } | Element::Custom { .. } => self
                .local_matrix()
                .map(|m| unitarity_defect(&m) > 1e-12)
                .unwrap_or(true),
            _ => false,
        }
    }

    /// Local matrix. Channel-level elements give a k×k matrix over their channels;
    /// single-channel polarization elements give a 2×2 over (H, V); the polarizing
    /// beamsplitter gives a 4×4 over (ch0 H, ch0 V, ch1 H, ch1 V).
    /// Delays have no local matrix (they act on packet labels).
    pub fn local_matrix(&self) -> Result<CMatrix> {
        self.check_params()?;
        let m = match self {
            Element::Beamsplitter { theta, phi, .. } => beamsplitter(*theta, *phi),
            Element::Dielectric { t, r, .. } => CMatrix::from_row_slice(2, 2, &[*t, *r, *r, *t]),
            Element::Mmi2 { .. } => CMatrix::from_row_slice(
                2,
                2,
                &[
                    c(FRAC_1_SQRT_2),
                    C64::new(0.0, FRAC_1_SQRT_2),
                    C64::new(0.0, FRAC_1_SQRT_2),
                    c(FRAC_1_SQRT_2),
                ],
            ),
            Element::Rewire { .. } => {
                CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
            }
            Element::PhaseShifter { phi, .. } => {
                CMatrix::from_element(1, 1, expi(phi.to_radians()))
            }
            Element::Loss { l, .. } => CMatrix::from_element(1, 1, c((1.0 - l).sqrt())),
            Element::Nsx { .. } => {
                let ps = crate::linalg::embed(3, &CMatrix::from_element(1, 1, c(-1.0)), &[0])?;
                let b1 = crate::linalg::embed(3, &beamsplitter(22.5, 0.0), &[1, 2])?;
                let b2 = crate::linalg::embed(3, &beamsplitter(NSX_ANGLE, 0.0), &[0, 1])?;
                let b3 = crate::linalg::embed(3, &beamsplitter(-22.5, 0.0), &[1, 2])?;
                b3 * b2 * b1 * ps
            }
            Element::Rotator { theta, phi, .. } => beamsplitter(*theta, *phi),
            Element::PolBeamsplitter { pol, .. } => {
                let mut m = CMatrix::zeros(4, 4);
                let (swap, keep) = match pol {
                    Pol::H => (0, 1),
                    Pol::V => (1, 0),
                };
                m[(2 + swap, swap)] = c(1.0);
                m[(swap, 2 + swap)] = c(1.0);
                m[(keep, keep)] = c(1.0);
                m[(2 + keep, 2 + keep)] = c(1.0);
                m
            }
            Element::HalfWave { alpha, .. } => {
                let (s, co) = (2.0 * alpha.to_radians()).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c(co), c(s), c(s), c(-co)])
            }
            Element::QuarterWave { alpha, .. } => {
                let (s, co) = alpha.to_radians().sin_cos();
                let i = C64::new(0.0, 1.0);
                let off = (c(1.0) - i) * s * co;
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[c(co * co) + i * s * s, off, off, c(s * s) + i * co * co],
                )
            }
            Element::Delay { .. } => {
                return Err(Error::InvalidElement(
                    "delay acts on packet labels and has no local matrix".into(),
                ))
            }
            Element::Custom { matrix, .. } => {
                let n = matrix.len();
                CMatrix::from_fn(n, n, |i, j| matrix[i][j])
            }
        };
        Ok(m)
    }
}

/// Mode map plus composed transformation and the virtual elements (packets, detectors)
/// that steer simulation and measurement.
#[derive(Debug, Clone)]
pub struct Circuit {
    modes: ModeMap,
    matrix: CMatrix,
    emitter: Option<CMatrix>,
    packets: PacketTable,
    elements: Vec<Element>,
    detectors: Vec<DetectorSpec>,
    ignored: Vec<usize>,
    noise: f64,
    lossy: bool,
}

impl Circuit {
    /// Identity circuit over `nchannels` channels with a single packet label.
    pub fn new(nchannels: usize) -> Self {
        Self::with_modes(ModeMap::new(nchannels, false, 1))
    }

    pub fn with_modes(modes: ModeMap) -> Self {
        let n = modes.nmodes();
        Self {
            modes,
            matrix: CMatrix::identity(n, n),
            emitter: None,
            packets: PacketTable::new(1),
            elements: Vec::new(),
            detectors: Vec::new(),
            ignored: Vec::new(),
            noise: 0.0,
            lossy: false,
        }
    }

    /// Circuit whose packet labels come from `packets`; the mode map must hold
    /// `packets.nlabels()` labels per (channel, polarization).
    pub fn with_packets(nchannels: usize, polarized: bool, packets: PacketTable) -> Self {
        let modes = ModeMap::new(nchannels, polarized, packets.nlabels());
        let mut c = Self::with_modes(modes);
        c.packets = packets;
        c
    }

    pub fn modes(&self) -> &ModeMap {
        &self.modes
    }

    pub fn nmodes(&self) -> usize {
        self.modes.nmodes()
    }

    pub fn nchannels(&self) -> usize {
        self.modes.nchannels()
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

    pub fn ignored(&self) -> &[usize] {
        &self.ignored
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// True when a non-unitary element has been applied.
    pub fn is_lossy(&self) -> bool {
        self.lossy
    }

    /// Composed element matrix, excluding the emitter.
    pub fn element_matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn emitter(&self) -> Option<&CMatrix> {
        self.emitter.as_ref()
    }

    /// Full transformation `U · E` (elements after the emitter).
    pub fn matrix(&self) -> CMatrix {
        match &self.emitter {
            Some(e) => &self.matrix * e,
            None => self.matrix.clone(),
        }
    }

    fn check_channels(&self, chs: &[usize]) -> Result<()> {
        for (i, &ch) in chs.iter().enumerate() {
            if !self.modes.contains_channel(ch) {
                return Err(Error::ChannelOutOfRange {
                    channel: ch,
                    nchannels: self.nchannels(),
                });
            }
            if chs[..i].contains(&ch) {
                return Err(Error::DuplicateTarget(ch));
            }
        }
        Ok(())
    }

    /// Mode-space matrix of `element` for this circuit's mode map.
    pub fn full_matrix(&self, element: &Element) -> Result<CMatrix> {
        let chs = element.channels();
        self.check_channels(&chs)?;
        let n = self.nmodes();
        if let Element::Delay { ch, periods } = element {
            return delay_matrix(&self.modes, self.packets.nbase().max(1), *ch, *periods);
        }
        if element.is_polarization_element() && !self.modes.polarized() {
            return Err(Error::Unpolarized);
        }
        let local = element.local_matrix()?;
        let mut full = CMatrix::identity(n, n);
        let npk = self.modes.npackets();
        let mut write_block = |targets: &[usize]| {
            for (a, &ra) in targets.iter().enumerate() {
                for (b, &cb) in targets.iter().enumerate() {
                    full[(ra, cb)] = local[(a, b)];
                }
            }
        };
        if element.is_polarization_element() {
            for pk in 0..npk {
                let mut targets = Vec::with_capacity(4);
                for &ch in &chs {
                    for pol in 0..2 {
                        targets.push(self.modes.mode(ch, pol, pk)?);
                    }
                }
                write_block(&targets);
            }
        } else {
            for pol in 0..self.modes.npol() {
                for pk in 0..npk {
                    let targets = chs
                        .iter()
                        .map(|&ch| self.modes.mode(ch, pol, pk))
                        .collect::<Result<Vec<_>>>()?;
                    write_block(&targets);
                }
            }
        }
        Ok(full)
    }

    /// `U ← U_element · U`.
    pub fn apply_element(&mut self, element: Element) -> Result<()> {
        let full = self.full_matrix(&element)?;
        self.matrix = full * &self.matrix;
        self.lossy |= element.is_lossy();
        self.elements.push(element);
        Ok(())
    }

    pub fn beamsplitter(&mut self, a: usize, b: usize, theta: f64, phi: f64) -> Result<()> {
        self.apply_element(Element::Beamsplitter {
            ch: [a, b],
            theta,
            phi,
        })
    }

    pub fn phase_shifter(&mut self, ch: usize, phi: f64) -> Result<()> {
        self.apply_element(Element::PhaseShifter { ch, phi })
    }

    pub fn loss(&mut self, ch: usize, l: f64) -> Result<()> {
        self.apply_element(Element::Loss { ch, l })
    }

    /// Compose the Gram-Schmidt emitter of the packet table. Allowed once.
    pub fn apply_emitter(&mut self) -> Result<()> {
        if self.emitter.is_some() {
            return Err(Error::EmitterApplied);
        }
        let coeffs = self.packets.coefficients()?;
        self.emitter = Some(emitter_matrix(&self.modes, &coeffs)?);
        Ok(())
    }

    /// Declare a detector. Efficiency below one inserts a loss element on the channel.
    pub fn add_detector(&mut self, spec: DetectorSpec) -> Result<()> {
        spec.validate()?;
        self.check_channels(&[spec.channel])?;
        if self.detectors.iter().any(|d| d.channel == spec.channel) {
            return Err(Error::DuplicateDetector(spec.channel));
        }
        if spec.efficiency < 1.0 {
            self.apply_element(Element::Loss {
                ch: spec.channel,
                l: 1.0 - spec.efficiency,
            })?;
        }
        self.detectors.push(spec);
        Ok(())
    }

    /// Shorthand for a detector with an optional post-selection condition.
    pub fn detector(&mut self, channel: usize, condition: Option<u32>) -> Result<()> {
        self.add_detector(DetectorSpec::new(channel, condition))
    }

    pub fn ignore(&mut self, channel: usize) -> Result<()> {
        self.check_channels(&[channel])?;
        if !self.ignored.contains(&channel) {
            self.ignored.push(channel);
        }
        Ok(())
    }

    pub fn set_noise(&mut self, stdev2: f64) -> Result<()> {
        if !(stdev2 >= 0.0) {
            return Err(Error::Parameter(format!("noise variance {stdev2} < 0")));
        }
        self.noise = stdev2;
        Ok(())
    }

    /// Channels carrying a post-selection condition, with the required counts.
    pub fn conditions(&self) -> Vec<(usize, u32)> {
        self.detectors
            .iter()
            .filter_map(|d| d.condition.map(|c| (d.channel, c)))
            .collect()
    }

    /// Mode map left after conditioned channels are stripped.
    pub fn post_selected_modes(&self) -> ModeMap {
        let removed: Vec<usize> = self.conditions().iter().map(|&(c, _)| c).collect();
        self.modes.without_channels(&removed)
    }
}
