#![allow(dead_code)]

use std::collections::BTreeMap;

use fockforge::device::Device;
use fockforge::fock::{factorial, QubitMap};
use fockforge::linalg::CMatrix;
use fockforge::packets::PacketSpec;
use fockforge::sources::QdParams;
use fockforge::{Ket, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Permanent as a plain sum over all permutations (Heap's algorithm).
pub fn naive_permanent(m: &CMatrix) -> C64 {
    let n = m.nrows();
    if n == 0 {
        return c(1.0);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let term = |p: &[usize]| -> C64 { (0..n).map(|i| m[(i, p[i])]).product() };
    let mut total = term(&perm);
    let mut stack = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            total += term(&perm);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    total
}

/// Amplitude ⟨out|U|in⟩ from the permutation-sum permanent.
pub fn brute_amplitude(input: &Ket, output: &Ket, u: &CMatrix) -> C64 {
    if input.photons() != output.photons() {
        return C64::default();
    }
    let rows = output.photon_modes();
    let cols = input.photon_modes();
    let sub = CMatrix::from_fn(rows.len(), cols.len(), |i, j| u[(rows[i], cols[j])]);
    naive_permanent(&sub) / (input.factorial_product() * output.factorial_product()).sqrt()
}

/// Every ket with `n` photons over `m` modes.
pub fn all_kets(m: usize, n: usize) -> Vec<Ket> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Ket>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u8;
            out.push(Ket::new(cur.clone()));
            return;
        }
        for x in 0..=left {
            cur[pos] = x as u8;
            rec(pos + 1, left - x, cur, out);
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    rec(0, n, &mut vec![0; m], &mut out);
    out
}

/// Physical-mode marginals by enumerating every output of the dilated unitary.
pub fn brute_marginals(input: &[u8], u: &CMatrix) -> BTreeMap<Ket, f64> {
    let n = input.len();
    let mut full = input.to_vec();
    full.resize(2 * n, 0);
    let full = Ket::new(full);
    let mut out = BTreeMap::new();
    for k in all_kets(2 * n, full.photons()) {
        let p = brute_amplitude(&full, &k, u).norm_sqr();
        *out.entry(Ket::new(k.as_slice()[..n].to_vec())).or_insert(0.0) += p;
    }
    out
}

pub fn multinomial_count(m: usize, n: usize) -> f64 {
    factorial(m + n - 1) / (factorial(n) * factorial(m - 1))
}

pub fn total_variation(a: &BTreeMap<Ket, f64>, b: &BTreeMap<Ket, f64>) -> f64 {
    let mut keys: Vec<&Ket> = a.keys().collect();
    keys.extend(b.keys());
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Overlap of two Gaussian packets φ(t) ∝ exp(−(t−t0)²Δω² − iω(t−t0)) by Simpson
/// quadrature, each wavefunction normalized numerically.
pub fn gaussian_overlap_quadrature(a: &PacketSpec, b: &PacketSpec) -> C64 {
    let wave = |p: &PacketSpec, t: f64| {
        let s = t - p.time;
        C64::new(-(s * s) * p.width * p.width, -p.freq * s).exp()
    };
    let span = 12.0 / a.width.min(b.width);
    let (lo, hi) = (a.time.min(b.time) - span, a.time.max(b.time) + span);
    let n = 40_000;
    let h = (hi - lo) / n as f64;
    let simpson = |f: &dyn Fn(f64) -> C64| {
        let mut acc = f(lo) + f(hi);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(lo + k as f64 * h) * w;
        }
        acc * (h / 3.0)
    };
    let ab = simpson(&|t| wave(a, t).conj() * wave(b, t));
    let aa = simpson(&|t| wave(a, t).norm_sqr().into());
    let bb = simpson(&|t| wave(b, t).norm_sqr().into());
    ab / (aa.re * bb.re).sqrt()
}

pub fn nsx_gate() -> Device {
    let mut d = Device::new(3, false);
    d.open_channel(0).unwrap();
    d.add_photon(1, 1).unwrap();
    d.add_photon(0, 2).unwrap();
    d.phase_shifter(0, 180.0).unwrap();
    d.beamsplitter(1, 2, 22.5, 0.0).unwrap();
    d.beamsplitter(0, 1, 65.5302, 0.0).unwrap();
    d.beamsplitter(1, 2, -22.5, 0.0).unwrap();
    d.detector(1, Some(1)).unwrap();
    d.detector(2, Some(0)).unwrap();
    d
}

pub fn cz_qubit_map() -> QubitMap {
    QubitMap::from_rows([&[0, 2], &[1, 3]]).unwrap()
}

/// CZ from two NSX gates; input photons are left to the caller.
pub fn cz_device() -> Device {
    let nsx = nsx_gate();
    let mut d = Device::new(8, false);
    d.beamsplitter(0, 2, 45.0, 0.0).unwrap();
    d.add_gate(&[0, 4, 5], &nsx).unwrap();
    d.add_gate(&[2, 6, 7], &nsx).unwrap();
    d.beamsplitter(0, 2, -45.0, 0.0).unwrap();
    for ch in 0..4 {
        d.detector(ch, None).unwrap();
    }
    d
}

pub fn cnot_qubit_map() -> QubitMap {
    QubitMap::from_rows([&[1, 3], &[2, 4]]).unwrap()
}

/// Post-selected CNOT on six channels with vacuum ancillas 0 and 5.
pub fn cnot_device(values: &[u8]) -> Device {
    let theta = (1.0f64 / 3.0f64.sqrt()).acos().to_degrees();
    let mut d = Device::new(6, false);
    d.qubits(values, &cnot_qubit_map()).unwrap();
    d.beamsplitter(3, 4, -45.0, 0.0).unwrap();
    d.beamsplitter(0, 1, theta, 0.0).unwrap();
    d.beamsplitter(2, 3, theta, 0.0).unwrap();
    d.beamsplitter(4, 5, theta, 0.0).unwrap();
    d.beamsplitter(3, 4, -45.0, 0.0).unwrap();
    d.phase_shifter(1, 180.0).unwrap();
    d.phase_shifter(3, 180.0).unwrap();
    d.detector(0, Some(0)).unwrap();
    d.detector(5, Some(0)).unwrap();
    d
}

/// The two-dot entanglement-swapping setup with full packet resolution.
pub fn swap_device() -> Device {
    use fockforge::measurement::DetectorKind;
    let e = |t| PacketSpec::exponential(t, 10000.0, 1.0);
    let mut d = Device::new(3, true).with_detection(DetectorKind::Full);
    d.add_qd(0, 1, QdParams::new(e(0.0), e(46.71), 1.0, 0.8, 1.0, 1.0)).unwrap();
    d.add_qd(0, 2, QdParams::new(e(16.0), e(46.5), 1.0, 0.8, 1.0, 1.0)).unwrap();
    d.beamsplitter(1, 2, 45.0, 0.0).unwrap();
    d.detector(0, None).unwrap();
    d.detector(1, Some(1)).unwrap();
    d.detector(2, Some(1)).unwrap();
    d
}
