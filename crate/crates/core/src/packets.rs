//! Photon wavepackets and partial distinguishability.
//!
//! Packets are Gaussian or exponential single-photon wavefunctions. Their pairwise
//! overlaps are orthonormalized by Gram-Schmidt; the resulting lower-triangular
//! coefficient matrix becomes the emitter element that maps each declared packet onto
//! the orthonormal packet labels carried by the mode map. Time is split into periods
//! holding shifted copies of the same packets, so a delay is a relabeling between
//! periods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::modes::ModeMap;
use crate::C64;

/// Pivot threshold below which a packet is considered linearly dependent.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Gaussian,
    Exponential,
}

/// Wavepacket parameters. `width` is the frequency width Δω for Gaussians and the decay
/// time τ for exponentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub shape: Shape,
    #[serde(rename = "t")]
    pub time: f64,
    #[serde(rename = "f")]
    pub freq: f64,
    #[serde(rename = "w", alias = "tau")]
    pub width: f64,
    #[serde(default)]
    pub period: usize,
}

impl PacketSpec {
    pub fn gaussian(time: f64, freq: f64, width: f64) -> Self {
        Self {
            shape: Shape::Gaussian,
            time,
            freq,
            width,
            period: 0,
        }
    }

    pub fn exponential(time: f64, freq: f64, tau: f64) -> Self {
        Self {
            shape: Shape::Exponential,
            time,
            freq,
            width: tau,
            period: 0,
        }
    }

    pub fn in_period(mut self, period: usize) -> Self {
        self.period = period;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::Parameter(format!(
                "packet width must be positive, got {}",
                self.width
            )));
        }
        if !self.time.is_finite() || !self.freq.is_finite() {
            return Err(Error::Parameter("packet time/frequency not finite".into()));
        }
        Ok(())
    }

    /// Same packet up to the period index.
    fn same_shape_params(&self, other: &PacketSpec) -> bool {
        self.shape == other.shape
            && self.time == other.time
            && self.freq == other.freq
            && self.width == other.width
    }
}

/// ⟨a|b⟩ for normalized wavefunctions. Packets in different periods are orthogonal.
pub fn packet_overlap(a: &PacketSpec, b: &PacketSpec) -> Result<C64> {
    if a.shape != b.shape {
        return Err(Error::MixedShapes);
    }
    a.validate()?;
    b.validate()?;
    if a.period != b.period {
        return Ok(C64::default());
    }
    Ok(match a.shape {
        Shape::Gaussian => gaussian_overlap(a, b),
        Shape::Exponential => exponential_overlap(a, b),
    })
}

/// Closed form of ∫ conj(φ_a) φ_b dt for
/// φ(t) ∝ exp(-(t - t0)² Δω² - i ω (t - t0)), normalized.
fn gaussian_overlap(a: &PacketSpec, b: &PacketSpec) -> C64 {
    let pa = a.width * a.width;
    let pb = b.width * b.width;
    let p = pa + pb;
    let q = C64::new(2.0 * (pa * a.time + pb * b.time), a.freq - b.freq);
    let r = C64::new(
        -pa * a.time * a.time - pb * b.time * b.time,
        -a.freq * a.time + b.freq * b.time,
    );
    let prefactor = (2.0 * (pa * pb).sqrt() / p).sqrt();
    (q * q / (4.0 * p) + r).exp() * prefactor
}

/// Closed form of ∫ conj(φ_a) φ_b dt for
/// φ(t) = τ^(-1/2) Θ(t - t0) exp(-(t - t0)/(2τ) - i ω (t - t0)).
fn exponential_overlap(a: &PacketSpec, b: &PacketSpec) -> C64 {
    let start = a.time.max(b.time);
    let gamma = C64::new(
        0.5 / a.width + 0.5 / b.width,
        -(a.freq - b.freq),
    );
    let exponent = C64::new(
        -(start - a.time) / (2.0 * a.width) - (start - b.time) / (2.0 * b.width),
        a.freq * (start - a.time) - b.freq * (start - b.time),
    );
    exponent.exp() / gamma / (a.width * b.width).sqrt()
}

/// Overlap matrix `G[i][j] = ⟨P_i|P_j⟩`.
pub fn overlap_matrix(packets: &[PacketSpec]) -> Result<CMatrix> {
    let n = packets.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = packet_overlap(&packets[i], &packets[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
        g[(i, i)] = C64::new(1.0, 0.0);
    }
    Ok(g)
}

/// Gram-Schmidt on the packets described by `overlaps`.
///
/// Returns the lower-triangular `C` with `c[i][j] = ⟨P̃_j|P_i⟩`, so
/// `|P_i⟩ = Σ_j c[i][j] |P̃_j⟩`. Then `(C C†)[i][k] = ⟨P_k|P_i⟩`, i.e. `C C† = Gᵀ`.
pub fn gram_schmidt(overlaps: &CMatrix) -> Result<CMatrix> {
    if !overlaps.is_square() {
        return Err(Error::NotSquare {
            rows: overlaps.nrows(),
            cols: overlaps.ncols(),
        });
    }
    let n = overlaps.nrows();
    let mut c = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let mut v = overlaps[(j, i)];
            for k in 0..j {
                v -= c[(j, k)].conj() * c[(i, k)];
            }
            c[(i, j)] = v / c[(j, j)];
        }
        let rest: f64 = (0..i).map(|k| c[(i, k)].norm_sqr()).sum();
        let pivot = overlaps[(i, i)].re - rest;
        if pivot < DEGENERACY_TOL {
            return Err(Error::DegeneratePacket { index: i });
        }
        c[(i, i)] = C64::new(pivot.sqrt(), 0.0);
    }
    Ok(c)
}

/// Packets declared for one period plus the number of periods they repeat over.
/// Packet label of base packet `b` in period `p` is `p * nbase + b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PacketTable {
    base: Vec<PacketSpec>,
    nperiods: usize,
}

impl PacketTable {
    pub fn new(nperiods: usize) -> Self {
        Self {
            base: Vec::new(),
            nperiods: nperiods.max(1),
        }
    }

    pub fn nbase(&self) -> usize {
        self.base.len()
    }

    pub fn nperiods(&self) -> usize {
        self.nperiods
    }

    /// Number of packet labels needed in the mode map.
    pub fn nlabels(&self) -> usize {
        (self.base.len() * self.nperiods).max(1)
    }

    pub fn base(&self) -> &[PacketSpec] {
        &self.base
    }

    pub fn shape(&self) -> Option<Shape> {
        self.base.first().map(|p| p.shape)
    }

    /// Register `spec`, reusing an identical base packet. Returns the base index; the
    /// packet label follows from [`PacketTable::label`] once registration is complete.
    pub fn register(&mut self, spec: PacketSpec) -> Result<usize> {
        spec.validate()?;
        if let Some(shape) = self.shape() {
            if shape != spec.shape {
                return Err(Error::MixedShapes);
            }
        }
        if spec.period >= self.nperiods {
            return Err(Error::Capacity(format!(
                "period {} outside {} periods",
                spec.period, self.nperiods
            )));
        }
        Ok(match self.base.iter().position(|p| p.same_shape_params(&spec)) {
            Some(b) => b,
            None => {
                self.base.push(PacketSpec { period: 0, ..spec });
                self.base.len() - 1
            }
        })
    }

    /// Label of base packet `b` in `period`, valid once the table is complete.
    pub fn label(&self, base: usize, period: usize) -> usize {
        period * self.base.len() + base
    }

    pub fn period_of(&self, label: usize) -> usize {
        if self.base.is_empty() {
            0
        } else {
            label / self.base.len()
        }
    }

    /// Gram-Schmidt coefficients of the base packets (one period).
    pub fn coefficients(&self) -> Result<CMatrix> {
        if self.base.is_empty() {
            return Ok(CMatrix::identity(1, 1));
        }
        gram_schmidt(&overlap_matrix(&self.base)?)
    }
}

/// Full-mode emitter: acts as `C` on the packet labels within each period, identity on
/// channel and polarization.
pub fn emitter_matrix(modes: &ModeMap, coefficients: &CMatrix) -> Result<CMatrix> {
    let nbase = coefficients.nrows();
    let npk = modes.npackets();
    if nbase == 0 || npk % nbase != 0 {
        return Err(Error::Dimension {
            expected: npk,
            found: nbase,
        });
    }
    let nm = modes.nmodes();
    let mut u = CMatrix::zeros(nm, nm);
    for block in 0..nm / npk {
        let off = block * npk;
        for period in 0..npk / nbase {
            let p0 = off + period * nbase;
            for k in 0..nbase {
                for j in 0..nbase {
                    u[(p0 + j, p0 + k)] = coefficients[(k, j)];
                }
            }
        }
    }
    Ok(u)
}

/// Shift the packets on `channel` forward by `periods` periods. Labels pushed past the
/// last period wrap around to the first, so the matrix is always a permutation; size
/// the table so occupied packets never wrap.
pub fn delay_matrix(modes: &ModeMap, nbase: usize, channel: usize, periods: usize) -> Result<CMatrix> {
    let nm = modes.nmodes();
    let mut u = CMatrix::identity(nm, nm);
    if periods == 0 {
        return Ok(u);
    }
    let npk = modes.npackets();
    if nbase == 0 || npk % nbase != 0 {
        return Err(Error::Dimension {
            expected: npk,
            found: nbase,
        });
    }
    let nperiods = npk / nbase;
    if periods >= nperiods {
        return Err(Error::Capacity(format!(
            "delay of {periods} periods needs more than {nperiods} periods"
        )));
    }
    let cmodes = modes.channel_modes(channel)?;
    for pol in 0..modes.npol() {
        let first = cmodes[pol * npk];
        for label in 0..npk {
            let target = (label + periods * nbase) % npk;
            u[(first + label, first + label)] = C64::default();
            u[(first + target, first + label)] = C64::new(1.0, 0.0);
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    /// Composite Simpson on [lo, hi] with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> C64, lo: f64, hi: f64, n: usize) -> C64 {
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(lo + i as f64 * h) * w;
        }
        acc * (h / 3.0)
    }

    /// Normalized inner product of the raw wavefunction shapes, by quadrature.
    fn quadrature_overlap(a: &PacketSpec, b: &PacketSpec) -> C64 {
        let wave = |p: &PacketSpec, t: f64| -> C64 {
            let s = t - p.time;
            match p.shape {
                Shape::Gaussian => {
                    C64::new(-(s * s) * p.width * p.width, -p.freq * s).exp()
                        * (p.width.sqrt() / std::f64::consts::PI.powf(0.25))
                }
                Shape::Exponential => {
                    if s < 0.0 {
                        C64::default()
                    } else {
                        C64::new(-s / (2.0 * p.width), -p.freq * s).exp() / p.width.sqrt()
                    }
                }
            }
        };
        let n = 200_000;
        // Each integral runs over the support of its integrand so Simpson never
        // straddles the exponential's switch-on edge.
        let (lo_ab, lo_a, lo_b, hi) = match a.shape {
            Shape::Gaussian => {
                let span = 12.0 / a.width.min(b.width);
                let lo = a.time.min(b.time) - span;
                (lo, lo, lo, a.time.max(b.time) + span)
            }
            Shape::Exponential => (
                a.time.max(b.time),
                a.time,
                b.time,
                a.time.max(b.time) + 80.0 * a.width.max(b.width),
            ),
        };
        let ab = simpson(|t| wave(a, t).conj() * wave(b, t), lo_ab, hi, n);
        let aa = simpson(|t| wave(a, t).norm_sqr().into(), lo_a, hi, n);
        let bb = simpson(|t| wave(b, t).norm_sqr().into(), lo_b, hi, n);
        ab / (aa.re * bb.re).sqrt()
    }

    #[test]
    fn self_overlap_is_one() {
        for p in [
            PacketSpec::gaussian(0.3, 1.2, 0.7),
            PacketSpec::exponential(2.0, 5.0, 0.4),
        ] {
            assert!((packet_overlap(&p, &p).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_overlap_matches_quadrature() {
        let cases = [
            (PacketSpec::gaussian(0.0, 1.0, 1.0), PacketSpec::gaussian(0.8, 1.0, 1.0)),
            (PacketSpec::gaussian(0.0, 1.0, 1.0), PacketSpec::gaussian(1.7, 1.0, 1.0)),
            (PacketSpec::gaussian(-0.4, 1.0, 0.8), PacketSpec::gaussian(0.5, 1.6, 1.3)),
        ];
        for (a, b) in cases {
            let exact = packet_overlap(&a, &b).unwrap();
            let quad = quadrature_overlap(&a, &b);
            assert!((exact - quad).norm() < 1e-8, "{exact} vs {quad}");
        }
    }

    #[test]
    fn exponential_overlap_matches_quadrature() {
        let cases = [
            (PacketSpec::exponential(0.0, 3.0, 1.0), PacketSpec::exponential(0.21, 3.0, 1.0)),
            (PacketSpec::exponential(1.0, 2.0, 0.5), PacketSpec::exponential(0.2, 2.5, 0.9)),
        ];
        for (a, b) in cases {
            let exact = packet_overlap(&a, &b).unwrap();
            let quad = quadrature_overlap(&a, &b);
            assert!((exact - quad).norm() < 1e-7, "{exact} vs {quad}");
        }
    }

    #[test]
    fn equal_width_gaussians_decay_as_expected() {
        let a = PacketSpec::gaussian(0.0, 1.0, 1.3);
        let b = PacketSpec::gaussian(0.9, 1.0, 1.3);
        let g = packet_overlap(&a, &b).unwrap();
        let expect = (-(1.3f64 * 1.3 * 0.9 * 0.9) / 2.0).exp();
        assert!((g.norm() - expect).abs() < 1e-14);
    }

    #[test]
    fn far_apart_packets_do_not_overlap() {
        let a = PacketSpec::gaussian(0.0, 1.0, 1.0);
        let b = PacketSpec::gaussian(50.0, 1.0, 1.0);
        assert!(packet_overlap(&a, &b).unwrap().norm() < 1e-10);
        let a = PacketSpec::exponential(0.0, 1.0, 1.0);
        let b = PacketSpec::exponential(100.0, 1.0, 1.0);
        assert!(packet_overlap(&a, &b).unwrap().norm() < 1e-10);
        let a = PacketSpec::gaussian(0.0, 1.0, 1.0);
        assert!(packet_overlap(&a, &a.in_period(1)).unwrap().norm() == 0.0);
    }

    #[test]
    fn mixed_shapes_unsupported() {
        let a = PacketSpec::gaussian(0.0, 1.0, 1.0);
        let b = PacketSpec::exponential(0.0, 1.0, 1.0);
        assert_eq!(packet_overlap(&a, &b), Err(Error::MixedShapes));
    }

    #[test]
    fn gram_schmidt_identity() {
        let c = gram_schmidt(&CMatrix::identity(3, 3)).unwrap();
        assert_eq!(c, CMatrix::identity(3, 3));
    }

    #[test]
    fn gram_schmidt_two_packets() {
        let g = 0.6;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(g, 0.0), C64::new(g, 0.0), C64::new(1.0, 0.0)],
        );
        let c = gram_schmidt(&m).unwrap();
        assert!((c[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(c[(0, 1)], C64::default());
        assert!((c[(1, 0)] - C64::new(g, 0.0)).norm() < 1e-15);
        assert!((c[(1, 1)] - C64::new((1.0 - g * g).sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gram_schmidt_reconstructs_overlaps() {
        let packets = [
            PacketSpec::gaussian(0.0, 1.0, 1.0),
            PacketSpec::gaussian(0.5, 1.2, 0.9),
            PacketSpec::gaussian(1.1, 0.8, 1.1),
            PacketSpec::gaussian(-0.7, 1.0, 1.4),
        ];
        let g = overlap_matrix(&packets).unwrap();
        let c = gram_schmidt(&g).unwrap();
        let rec = &c * c.adjoint();
        assert!((rec - g.transpose()).camax() < 1e-10);
        for i in 0..4 {
            let norm: f64 = (0..4).map(|j| c[(i, j)].norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_packets_are_degenerate() {
        let m = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert_eq!(gram_schmidt(&m), Err(Error::DegeneratePacket { index: 1 }));
    }

    #[test]
    fn table_deduplicates() {
        let mut t = PacketTable::new(2);
        let a = t.register(PacketSpec::gaussian(0.0, 1.0, 1.0)).unwrap();
        let b = t.register(PacketSpec::gaussian(0.0, 1.0, 1.0)).unwrap();
        let c = t.register(PacketSpec::gaussian(1.0, 1.0, 1.0)).unwrap();
        assert_eq!((a, b, c), (0, 0, 1));
        assert_eq!(t.nbase(), 2);
        assert_eq!(t.nlabels(), 4);
        assert_eq!(t.label(1, 1), 3);
        assert!(t.register(PacketSpec::exponential(0.0, 1.0, 1.0)).is_err());
        assert!(t
            .register(PacketSpec::gaussian(0.0, 1.0, 1.0).in_period(2))
            .is_err());
    }

    #[test]
    fn single_packet_emitter_is_identity() {
        let modes = ModeMap::new(3, true, 1);
        let e = emitter_matrix(&modes, &CMatrix::identity(1, 1)).unwrap();
        assert_eq!(e, CMatrix::identity(6, 6));
    }

    #[test]
    fn delay_relabels_packets() {
        let modes = ModeMap::new(2, false, 2);
        assert_eq!(
            delay_matrix(&modes, 1, 0, 0).unwrap(),
            CMatrix::identity(4, 4)
        );
        let d = delay_matrix(&modes, 1, 0, 1).unwrap();
        // Channel 0 packet 0 (mode 0) -> packet 1 (mode 1); channel 1 untouched.
        assert_eq!(d[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(d[(0, 0)], C64::default());
        assert_eq!(d[(2, 2)], C64::new(1.0, 0.0));
        assert!(unitarity_defect(&d) < 1e-15);
        assert!(delay_matrix(&modes, 1, 0, 2).is_err());
    }
}
