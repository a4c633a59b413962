//! Outcome sampling without the full output distribution: the Clifford-Clifford
//! chain-rule sampler (algorithm A) and a Metropolised independence sampler with the
//! distinguishable-photon distribution as proposal.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};
use serde::{Deserialize, Serialize};

use crate::cores::amplitude;
use crate::error::{Error, Result};
use crate::fock::{factorial, Ket};
use crate::linalg::CMatrix;
use crate::permanent::permanent_real;
use crate::C64;

/// Columns used by a sampler must be orthonormal to this tolerance.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub nsamples: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
}

impl SampleConfig {
    pub fn new(nsamples: usize, seed: u64) -> Self {
        Self {
            nsamples,
            seed,
            burn_in: 1000,
            thinning: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nsamples == 0 {
            return Err(Error::Parameter("nsamples must be > 0".into()));
        }
        if self.thinning == 0 {
            return Err(Error::Parameter("thinning must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    #[default]
    Clifford,
    Metropolis,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clifford" => Ok(SamplerKind::Clifford),
            "metropolis" => Ok(SamplerKind::Metropolis),
            _ => Err(Error::Parameter(format!("unknown sampler '{s}'"))),
        }
    }
}

pub fn sample(kind: SamplerKind, input: &Ket, u: &CMatrix, cfg: &SampleConfig) -> Result<Vec<Ket>> {
    match kind {
        SamplerKind::Clifford => clifford_a_sample(input, u, cfg),
        SamplerKind::Metropolis => metropolis_sample(input, u, cfg),
    }
}

/// Outcome counts.
pub fn histogram(samples: &[Ket]) -> BTreeMap<Ket, usize> {
    let mut h = BTreeMap::new();
    for s in samples {
        *h.entry(s.clone()).or_insert(0) += 1;
    }
    h
}

fn check_input(input: &Ket, u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    if input.nmodes() != u.ncols() {
        return Err(Error::Dimension {
            expected: u.ncols(),
            found: input.nmodes(),
        });
    }
    Ok(())
}

/// Occupied input modes and their photon counts.
fn occupied(input: &Ket) -> (Vec<usize>, Vec<u8>) {
    (0..input.nmodes())
        .filter(|&j| input[j] > 0)
        .map(|j| (j, input[j]))
        .unzip()
}

/// Precomputed state of the chain-rule sampler for one input ket. For multiply occupied
/// inputs the weight of candidate mode i after rows r is
/// Σ_{u ≤ t, |u| = k} Π_j C(t_j, u_j)² (t_j − u_j)! |Per(A_{(r,i),u})|²,
/// with A the occupied columns of U repeated per u. The permanents grow one row at a
/// time by Laplace expansion: Per(A_{(r,i),u}) = Σ_l u_l A_{i,l} Per(A_{r,u−e_l}).
pub struct CliffordSampler {
    cols: Vec<usize>,
    /// Sub-multisets of the input occupation, grouped by size.
    levels: Vec<Vec<Vec<u8>>>,
    index: Vec<HashMap<Vec<u8>, usize>>,
    weights: Vec<Vec<f64>>,
    u: CMatrix,
    nphotons: usize,
    nmodes: usize,
    /// Conditional distributions already met, keyed by the ordered prefix of drawn modes.
    cache: RefCell<HashMap<Vec<usize>, Rc<Node>>>,
}

struct Node {
    dist: WeightedIndex<f64>,
    perms: Vec<C64>,
}

/// Prefixes memoized per sampler; beyond this the sampler recomputes.
const CACHE_LIMIT: usize = 1 << 16;

impl CliffordSampler {
    pub fn new(input: &Ket, u: &CMatrix) -> Result<Self> {
        check_input(input, u)?;
        let (cols, t) = occupied(input);
        for (a, &ca) in cols.iter().enumerate() {
            for &cb in &cols[a..] {
                let dot: C64 = u.column(ca).dotc(&u.column(cb));
                let target = if ca == cb { 1.0 } else { 0.0 };
                if (dot - C64::new(target, 0.0)).norm() > ORTHONORMAL_TOL {
                    return Err(Error::Sampler(
                        "input columns of U are not orthonormal; dilate lossy circuits first".into(),
                    ));
                }
            }
        }
        let n = input.photons();
        let mut levels = vec![Vec::new(); n + 1];
        let mut cur = vec![0u8; t.len()];
        fn rec(pos: usize, t: &[u8], cur: &mut Vec<u8>, levels: &mut Vec<Vec<Vec<u8>>>) {
            if pos == t.len() {
                let k: usize = cur.iter().map(|&x| x as usize).sum();
                levels[k].push(cur.clone());
                return;
            }
            for x in 0..=t[pos] {
                cur[pos] = x;
                rec(pos + 1, t, cur, levels);
            }
            cur[pos] = 0;
        }
        rec(0, &t, &mut cur, &mut levels);
        let index = levels
            .iter()
            .map(|lv| lv.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect())
            .collect();
        let weights = levels
            .iter()
            .map(|lv| {
                lv.iter()
                    .map(|sub| {
                        sub.iter()
                            .zip(&t)
                            .map(|(&uj, &tj)| {
                                let b = binomial(tj as usize, uj as usize);
                                b * b * factorial((tj - uj) as usize)
                            })
                            .product()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            cols,
            levels,
            index,
            weights,
            u: u.clone(),
            nphotons: n,
            nmodes: u.nrows(),
            cache: RefCell::new(HashMap::new()),
        })
    }

    /// Extend the permanent table for rows r by one more row `i`.
    fn extend(&self, k: usize, prev: &[C64], i: usize) -> Vec<C64> {
        self.levels[k]
            .iter()
            .map(|sub| {
                let mut acc = C64::default();
                for (l, &ul) in sub.iter().enumerate() {
                    if ul == 0 {
                        continue;
                    }
                    let mut smaller = sub.clone();
                    smaller[l] -= 1;
                    let p = prev[self.index[k - 1][&smaller]];
                    acc += self.u[(i, self.cols[l])] * p * ul as f64;
                }
                acc
            })
            .collect()
    }

    /// Conditional weights (unnormalized) of the next mode given the permanent table.
    fn step_weights(&self, k: usize, prev: &[C64]) -> Vec<f64> {
        (0..self.nmodes)
            .map(|i| {
                self.extend(k, prev, i)
                    .iter()
                    .zip(&self.weights[k])
                    .map(|(p, w)| w * p.norm_sqr())
                    .sum()
            })
            .collect()
    }

    fn node(&self, prefix: &[usize], perms: impl FnOnce() -> Vec<C64>) -> Result<Rc<Node>> {
        if let Some(n) = self.cache.borrow().get(prefix) {
            return Ok(n.clone());
        }
        let perms = perms();
        let w = self.step_weights(prefix.len() + 1, &perms);
        let dist = WeightedIndex::new(&w).map_err(|_| Error::Sampler("zero total probability".into()))?;
        let node = Rc::new(Node { dist, perms });
        let mut cache = self.cache.borrow_mut();
        if cache.len() < CACHE_LIMIT {
            cache.insert(prefix.to_vec(), node.clone());
        }
        Ok(node)
    }

    /// Ordered mode sequence of one sample.
    pub fn draw_sequence<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        let mut seq = Vec::with_capacity(self.nphotons);
        if self.nphotons == 0 {
            return Ok(seq);
        }
        let mut node = self.node(&seq, || vec![C64::new(1.0, 0.0)])?;
        for k in 1..=self.nphotons {
            let i = node.dist.sample(rng);
            seq.push(i);
            if k < self.nphotons {
                let parent = node.clone();
                node = self.node(&seq, || self.extend(k, &parent.perms, i))?;
            }
        }
        Ok(seq)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Ket> {
        let mut occ = vec![0u8; self.nmodes];
        for i in self.draw_sequence(rng)? {
            occ[i] += 1;
        }
        Ok(Ket::new(occ))
    }

    /// Product of the chain-rule conditionals along `seq`.
    pub fn sequence_probability(&self, seq: &[usize]) -> f64 {
        let mut perms = vec![C64::new(1.0, 0.0)];
        let mut p = 1.0;
        for (k, &i) in seq.iter().enumerate() {
            let w = self.step_weights(k + 1, &perms);
            let total: f64 = w.iter().sum();
            p *= w[i] / total;
            perms = self.extend(k + 1, &perms, i);
        }
        p
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub fn clifford_a_sample(input: &Ket, u: &CMatrix, cfg: &SampleConfig) -> Result<Vec<Ket>> {
    cfg.validate()?;
    let s = CliffordSampler::new(input, u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.nsamples).map(|_| s.draw(&mut rng)).collect()
}

/// Distinguishable-photon model: every photon leaves its input column j for mode k with
/// probability |U_kj|² / Σ_k |U_kj|².
pub struct ClassicalModel {
    /// (input mode, photon count, output distribution).
    columns: Vec<(usize, u8, WeightedIndex<f64>)>,
    /// Row-normalized |U|², row-major.
    w: Vec<Vec<f64>>,
    nmodes: usize,
    photon_cols: Vec<usize>,
}

impl ClassicalModel {
    pub fn new(input: &Ket, u: &CMatrix) -> Result<Self> {
        check_input(input, u)?;
        let nmodes = u.nrows();
        let mut w = vec![vec![0.0; u.ncols()]; nmodes];
        let mut columns = Vec::new();
        for j in 0..u.ncols() {
            let norm: f64 = (0..nmodes).map(|k| u[(k, j)].norm_sqr()).sum();
            if input[j] == 0 {
                continue;
            }
            if !(norm > 0.0) {
                return Err(Error::Sampler(format!("column {j} of U has zero norm")));
            }
            let probs: Vec<f64> = (0..nmodes).map(|k| u[(k, j)].norm_sqr() / norm).collect();
            for k in 0..nmodes {
                w[k][j] = probs[k];
            }
            let dist = WeightedIndex::new(&probs).map_err(|e| Error::Sampler(e.to_string()))?;
            columns.push((j, input[j], dist));
        }
        Ok(Self {
            columns,
            w,
            nmodes,
            photon_cols: input.photon_modes(),
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Ket {
        let mut occ = vec![0u8; self.nmodes];
        for (_, count, dist) in &self.columns {
            for _ in 0..*count {
                occ[dist.sample(rng)] += 1;
            }
        }
        Ket::new(occ)
    }

    /// Pc(s) = Per(W[s rows, photon columns]) / Π s_j!.
    pub fn probability(&self, out: &Ket) -> f64 {
        let rows = out.photon_modes();
        if rows.len() != self.photon_cols.len() {
            return 0.0;
        }
        let n = rows.len();
        let mut sub = Vec::with_capacity(n * n);
        for &r in &rows {
            for &c in &self.photon_cols {
                sub.push(self.w[r][c]);
            }
        }
        permanent_real(n, &sub) / out.factorial_product()
    }
}

pub fn classical_sample<R: Rng + ?Sized>(input: &Ket, u: &CMatrix, rng: &mut R) -> Result<Ket> {
    Ok(ClassicalModel::new(input, u)?.draw(rng))
}

/// Independence Metropolis chain targeting |⟨s|T|input⟩|², proposing from the classical
/// model. Burn-in and thinning count chain iterations.
pub fn metropolis_sample(input: &Ket, u: &CMatrix, cfg: &SampleConfig) -> Result<Vec<Ket>> {
    cfg.validate()?;
    let classical = ClassicalModel::new(input, u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache: HashMap<Ket, (f64, f64)> = HashMap::new();
    let mut eval = |s: &Ket| -> Result<(f64, f64)> {
        if let Some(&v) = cache.get(s) {
            return Ok(v);
        }
        let p = amplitude(input, s, u)?.norm_sqr();
        let v = (p, classical.probability(s));
        cache.insert(s.clone(), v);
        Ok(v)
    };
    let mut current = None;
    for _ in 0..10_000 {
        let s = classical.draw(&mut rng);
        let (p, pc) = eval(&s)?;
        if p > 0.0 {
            current = Some((s, p, pc));
            break;
        }
    }
    let (mut s, mut p, mut pc) =
        current.ok_or(Error::Sampler("no proposal with nonzero probability".into()))?;
    let mut out = Vec::with_capacity(cfg.nsamples);
    let total = cfg.burn_in + cfg.nsamples * cfg.thinning;
    for it in 1..=total {
        let cand = classical.draw(&mut rng);
        let (p2, pc2) = eval(&cand)?;
        let ratio = if p * pc2 > 0.0 { (p2 * pc) / (p * pc2) } else { 0.0 };
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            s = cand;
            p = p2;
            pc = pc2;
        }
        if it > cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0 {
            out.push(s.clone());
        }
    }
    Ok(out)
}
