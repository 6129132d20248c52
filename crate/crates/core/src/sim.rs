//! Bit-parallel Pauli-frame simulation (64 trials per word), single-fault injection, a
//! stabilizer-tableau determinism check and logical error-rate estimation.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::{BitMatrix, BitSet};
use crate::circuit::{outcome_pauli, DetectorCoord, FlagCoord, Instr, NoisyCircuit};
use crate::decode::{CorrectionResult, Decoder};
use crate::error::{Error, Result};
use crate::rng::{trial_rng, unit};

/// Record indices that make up each detector, flag bit and observable.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub detectors: Vec<Vec<usize>>,
    pub detector_coords: Vec<DetectorCoord>,
    pub flags: Vec<usize>,
    pub flag_coords: Vec<FlagCoord>,
    pub observables: Vec<Vec<usize>>,
}

impl Compiled {
    pub fn new(circuit: &NoisyCircuit) -> Self {
        let mut c = Compiled {
            detectors: Vec::new(),
            detector_coords: Vec::new(),
            flags: Vec::new(),
            flag_coords: Vec::new(),
            observables: vec![Vec::new(); circuit.num_observables()],
        };
        for ins in &circuit.instrs {
            match ins {
                Instr::Detector { coord, recs } => {
                    c.detectors.push(recs.clone());
                    c.detector_coords.push(*coord);
                }
                Instr::FlagBit { coord, rec } => {
                    c.flags.push(*rec);
                    c.flag_coords.push(*coord);
                }
                Instr::Observable { index, recs } => c.observables[*index].extend(recs),
                _ => {}
            }
        }
        c
    }
}

/// Supplies per-lane Pauli masks for each noise channel in circuit order.
trait NoiseSource {
    fn pauli1(&mut self, channel: usize, probs: [f64; 3]) -> (u64, u64);
    fn pauli2(&mut self, channel: usize, probs: &[f64; 15]) -> [(u64, u64); 2];
}

struct Sampler {
    lanes: Vec<ChaCha8Rng>,
}

impl NoiseSource for Sampler {
    fn pauli1(&mut self, _channel: usize, p: [f64; 3]) -> (u64, u64) {
        let (mut x, mut z) = (0u64, 0u64);
        for (l, rng) in self.lanes.iter_mut().enumerate() {
            let u = unit(rng);
            let bit = 1u64 << l;
            if u < p[0] {
                x |= bit;
            } else if u < p[0] + p[1] {
                x |= bit;
                z |= bit;
            } else if u < p[0] + p[1] + p[2] {
                z |= bit;
            }
        }
        (x, z)
    }

    fn pauli2(&mut self, _channel: usize, probs: &[f64; 15]) -> [(u64, u64); 2] {
        let mut out = [(0u64, 0u64); 2];
        for (l, rng) in self.lanes.iter_mut().enumerate() {
            let u = unit(rng);
            let mut acc = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    let o = i + 1;
                    for (slot, m) in out.iter_mut().enumerate() {
                        let (px, pz) = outcome_pauli(2, o, slot);
                        m.0 |= (px as u64) << l;
                        m.1 |= (pz as u64) << l;
                    }
                    break;
                }
            }
        }
        out
    }
}

/// Deterministic faults: channel → (lane, outcome) list.
struct Injector {
    faults: HashMap<usize, Vec<(usize, usize)>>,
}

impl Injector {
    fn masks(&self, channel: usize, arity: usize) -> [(u64, u64); 2] {
        let mut out = [(0u64, 0u64); 2];
        if let Some(list) = self.faults.get(&channel) {
            for &(lane, o) in list {
                for (slot, m) in out.iter_mut().enumerate().take(arity) {
                    let (px, pz) = outcome_pauli(arity, o, slot);
                    m.0 ^= (px as u64) << lane;
                    m.1 ^= (pz as u64) << lane;
                }
            }
        }
        out
    }
}

impl NoiseSource for Injector {
    fn pauli1(&mut self, channel: usize, _p: [f64; 3]) -> (u64, u64) {
        self.masks(channel, 1)[0]
    }

    fn pauli2(&mut self, channel: usize, _p: &[f64; 15]) -> [(u64, u64); 2] {
        self.masks(channel, 2)
    }
}

/// Propagates 64 Pauli frames through the circuit; returns one lane mask per measurement.
fn run_frames(circuit: &NoisyCircuit, noise: &mut impl NoiseSource) -> Vec<u64> {
    let n = circuit.num_qubits;
    let mut x = vec![0u64; n];
    let mut z = vec![0u64; n];
    let mut records = Vec::with_capacity(circuit.num_measurements());
    let mut channel = 0usize;
    for ins in &circuit.instrs {
        match ins {
            Instr::Reset(qs) => {
                for &q in qs {
                    x[q] = 0;
                    z[q] = 0;
                }
            }
            Instr::H(qs) => {
                for &q in qs {
                    std::mem::swap(&mut x[q], &mut z[q]);
                }
            }
            Instr::Cx(pairs) => {
                for &(c, t) in pairs {
                    x[t] ^= x[c];
                    z[c] ^= z[t];
                }
            }
            Instr::Measure(qs) => {
                for &q in qs {
                    records.push(x[q]);
                }
            }
            Instr::Pauli1 { px, py, pz, qubits } => {
                for &q in qubits {
                    let (mx, mz) = noise.pauli1(channel, [*px, *py, *pz]);
                    x[q] ^= mx;
                    z[q] ^= mz;
                    channel += 1;
                }
            }
            Instr::Pauli2 { probs, pairs } => {
                for &(a, b) in pairs {
                    let m = noise.pauli2(channel, probs);
                    x[a] ^= m[0].0;
                    z[a] ^= m[0].1;
                    x[b] ^= m[1].0;
                    z[b] ^= m[1].1;
                    channel += 1;
                }
            }
            Instr::Detector { .. } | Instr::Observable { .. } | Instr::FlagBit { .. } | Instr::Tick => {}
        }
    }
    records
}

fn xor_recs(records: &[u64], recs: &[usize]) -> u64 {
    recs.iter().fold(0, |acc, &r| acc ^ records[r])
}

/// Lane masks of detectors, flags and observables for one block.
struct BlockBits {
    detectors: Vec<u64>,
    flags: Vec<u64>,
    observables: Vec<u64>,
}

fn extract(compiled: &Compiled, records: &[u64]) -> BlockBits {
    BlockBits {
        detectors: compiled.detectors.iter().map(|r| xor_recs(records, r)).collect(),
        flags: compiled.flags.iter().map(|&r| records[r]).collect(),
        observables: compiled.observables.iter().map(|r| xor_recs(records, r)).collect(),
    }
}

fn lane_set(masks: &[u64], lane: usize) -> BitSet {
    BitSet::from_indices(masks.len(), (0..masks.len()).filter(|&i| masks[i] >> lane & 1 == 1))
}

fn sample_block(circuit: &NoisyCircuit, compiled: &Compiled, seed: u64, first: u64, lanes: usize) -> BlockBits {
    let mut s = Sampler { lanes: (0..lanes as u64).map(|l| trial_rng(seed, first + l)).collect() };
    extract(compiled, &run_frames(circuit, &mut s))
}

/// Runs `f` on a thread pool capped by `FPN_THREADS` when that variable is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("FPN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Sampled detector, flag and observable bits, one row per trial.
#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeBatch {
    pub trials: usize,
    pub seed: u64,
    pub detectors: BitMatrix,
    pub flags: BitMatrix,
    pub observables: BitMatrix,
    pub detector_coords: Vec<DetectorCoord>,
    pub flag_coords: Vec<FlagCoord>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct BatchHeader {
    format: String,
    trials: usize,
    seed: u64,
    detectors: usize,
    flags: usize,
    observables: usize,
    detector_coords: Vec<DetectorCoord>,
    flag_coords: Vec<FlagCoord>,
}

const BATCH_FORMAT: &str = "fpn-shots-v1";

impl SyndromeBatch {
    /// One JSON header line, then the detector, flag and observable matrices as packed rows
    /// (little-endian within bytes).
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = BatchHeader {
            format: BATCH_FORMAT.into(),
            trials: self.trials,
            seed: self.seed,
            detectors: self.detectors.cols(),
            flags: self.flags.cols(),
            observables: self.observables.cols(),
            detector_coords: self.detector_coords.clone(),
            flag_coords: self.flag_coords.clone(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        for m in [&self.detectors, &self.flags, &self.observables] {
            out.extend(m.to_packed_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let parse = |m: &str| Error::Parse { context: "shot file".into(), message: m.into() };
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| parse("missing header line"))?;
        let h: BatchHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::json("shot header", e))?;
        if h.format != BATCH_FORMAT {
            return Err(parse(&format!("unknown format {:?}", h.format)));
        }
        if h.detector_coords.len() != h.detectors || h.flag_coords.len() != h.flags {
            return Err(parse("coordinate tables do not match the declared widths"));
        }
        let mut rest = &bytes[nl + 1..];
        let mut take = |cols: usize| -> Result<BitMatrix> {
            let len = h.trials * cols.div_ceil(8);
            if rest.len() < len {
                return Err(parse("truncated bit matrix"));
            }
            let m = BitMatrix::from_packed_bytes(h.trials, cols, &rest[..len]).ok_or_else(|| parse("bad bit matrix"))?;
            rest = &rest[len..];
            Ok(m)
        };
        let detectors = take(h.detectors)?;
        let flags = take(h.flags)?;
        let observables = take(h.observables)?;
        if !rest.is_empty() {
            return Err(parse("trailing bytes after the observable matrix"));
        }
        Ok(SyndromeBatch {
            trials: h.trials,
            seed: h.seed,
            detectors,
            flags,
            observables,
            detector_coords: h.detector_coords,
            flag_coords: h.flag_coords,
        })
    }
}

/// Samples `trials` independent shots. Trial `t` draws from stream `t` of `seed`.
pub fn sample(circuit: &NoisyCircuit, trials: usize, seed: u64) -> SyndromeBatch {
    let compiled = Compiled::new(circuit);
    let blocks = trials.div_ceil(64);
    let bits: Vec<BlockBits> = with_thread_cap(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lanes = (trials - b * 64).min(64);
                sample_block(circuit, &compiled, seed, (b * 64) as u64, lanes)
            })
            .collect()
    });
    let mut out = SyndromeBatch {
        trials,
        seed,
        detectors: BitMatrix::new(trials, compiled.detectors.len()),
        flags: BitMatrix::new(trials, compiled.flags.len()),
        observables: BitMatrix::new(trials, compiled.observables.len()),
        detector_coords: compiled.detector_coords.clone(),
        flag_coords: compiled.flag_coords.clone(),
    };
    for (b, block) in bits.iter().enumerate() {
        let lanes = (trials - b * 64).min(64);
        for lane in 0..lanes {
            let row = b * 64 + lane;
            for (m, masks) in [
                (&mut out.detectors, &block.detectors),
                (&mut out.flags, &block.flags),
                (&mut out.observables, &block.observables),
            ] {
                for (c, &w) in masks.iter().enumerate() {
                    if w >> lane & 1 == 1 {
                        m.set(row, c, true);
                    }
                }
            }
        }
    }
    out
}

/// Detector, flag and observable flips caused by a set of faults.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub detectors: BitSet,
    pub flags: BitSet,
    pub observables: BitSet,
}

/// Forward-propagates each fault set (list of `(channel, outcome)`) through the noiseless
/// circuit and reports its signature.
pub fn inject_faults(circuit: &NoisyCircuit, fault_sets: &[Vec<(usize, usize)>]) -> Vec<Signature> {
    let compiled = Compiled::new(circuit);
    let chunks: Vec<&[Vec<(usize, usize)>]> = fault_sets.chunks(64).collect();
    let per_chunk: Vec<Vec<Signature>> = with_thread_cap(|| {
        chunks
            .par_iter()
            .map(|chunk| {
                let mut inj = Injector { faults: HashMap::new() };
                for (lane, set) in chunk.iter().enumerate() {
                    for &(ch, o) in set {
                        inj.faults.entry(ch).or_default().push((lane, o));
                    }
                }
                let bits = extract(&compiled, &run_frames(circuit, &mut inj));
                (0..chunk.len())
                    .map(|lane| Signature {
                        detectors: lane_set(&bits.detectors, lane),
                        flags: lane_set(&bits.flags, lane),
                        observables: lane_set(&bits.observables, lane),
                    })
                    .collect()
            })
            .collect()
    });
    per_chunk.into_iter().flatten().collect()
}

/// Stabilizer tableau (destabilizers, stabilizers, scratch row) in the standard CHP form.
struct Tableau {
    n: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    r: Vec<bool>,
}

impl Tableau {
    fn new(n: usize) -> Self {
        let mut t = Tableau {
            n,
            x: vec![vec![false; n]; 2 * n + 1],
            z: vec![vec![false; n]; 2 * n + 1],
            r: vec![false; 2 * n + 1],
        };
        for i in 0..n {
            t.x[i][i] = true;
            t.z[n + i][i] = true;
        }
        t
    }

    fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] & self.z[i][a];
            std::mem::swap(&mut self.x[i][a], &mut self.z[i][a]);
        }
    }

    fn cx(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] & self.z[i][b] & !(self.x[i][b] ^ self.z[i][a]);
            self.x[i][b] ^= self.x[i][a];
            self.z[i][a] ^= self.z[i][b];
        }
    }

    fn x_gate(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.z[i][a];
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut sum: i32 = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            let (x1, z1, x2, z2) = (self.x[i][j], self.z[i][j], self.x[h][j], self.z[h][j]);
            sum += match (x1, z1) {
                (false, false) => 0,
                (true, true) => z2 as i32 - x2 as i32,
                (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
                (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
            };
        }
        self.r[h] = sum.rem_euclid(4) == 2;
        for j in 0..self.n {
            self.x[h][j] ^= self.x[i][j];
            self.z[h][j] ^= self.z[i][j];
        }
    }

    /// Z measurement; `coin` decides random outcomes. Returns (outcome, was_random).
    fn measure(&mut self, a: usize, coin: bool) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.x[p][a]) {
            for i in 0..2 * n {
                if i != p && self.x[i][a] {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p] = vec![false; n];
            self.z[p] = vec![false; n];
            self.z[p][a] = true;
            self.r[p] = coin;
            (coin, true)
        } else {
            let s = 2 * n;
            self.x[s] = vec![false; n];
            self.z[s] = vec![false; n];
            self.r[s] = false;
            for i in 0..n {
                if self.x[i][a] {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], false)
        }
    }
}

/// Runs the noiseless circuit on a stabilizer tableau `runs` times with random outcomes for
/// non-deterministic measurements and checks that every detector, flag bit and observable is
/// deterministically zero. This is what licenses Pauli-frame sampling.
pub fn check_determinism(circuit: &NoisyCircuit, runs: usize, seed: u64) -> Result<()> {
    use rand_core::RngCore;
    let compiled = Compiled::new(circuit);
    for run in 0..runs {
        let mut rng = trial_rng(seed, run as u64);
        let mut t = Tableau::new(circuit.num_qubits);
        let mut records = Vec::new();
        for ins in &circuit.instrs {
            match ins {
                Instr::Reset(qs) => {
                    for &q in qs {
                        if t.measure(q, rng.next_u32() & 1 == 1).0 {
                            t.x_gate(q);
                        }
                    }
                }
                Instr::H(qs) => qs.iter().for_each(|&q| t.h(q)),
                Instr::Cx(pairs) => pairs.iter().for_each(|&(a, b)| t.cx(a, b)),
                Instr::Measure(qs) => {
                    for &q in qs {
                        records.push(t.measure(q, rng.next_u32() & 1 == 1).0 as u64);
                    }
                }
                _ => {}
            }
        }
        let bits = extract(&compiled, &records);
        let named = |kind: &str, i: usize| Error::Circuit(format!("{kind} {i} is not deterministic (run {run})"));
        if let Some(i) = bits.detectors.iter().position(|&b| b != 0) {
            return Err(named("detector", i));
        }
        if let Some(i) = bits.flags.iter().position(|&b| b != 0) {
            return Err(named("flag bit", i));
        }
        if let Some(i) = bits.observables.iter().position(|&b| b != 0) {
            return Err(named("observable", i));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerResult {
    pub trials: u64,
    pub failures: u64,
    pub ber: f64,
    pub ber_norm: f64,
    /// Failures per observable.
    pub per_observable: Vec<u64>,
    /// Shots where the decoder reported failure (already counted in `failures`).
    pub decoder_failures: u64,
    /// Half-width of the one-sigma Wilson score interval.
    pub stderr: f64,
}

/// One-sigma Wilson score half-width for `k` successes in `n` trials.
pub fn wilson_stderr(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = 1.0;
    (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

fn ber_from_counts(trials: u64, failures: u64, per_obs: Vec<u64>, dec_fail: u64, k: usize) -> BerResult {
    let ber = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
    BerResult {
        trials,
        failures,
        ber,
        ber_norm: ber / k.max(1) as f64,
        per_observable: per_obs,
        decoder_failures: dec_fail,
        stderr: wilson_stderr(failures, trials),
    }
}

/// Logical error rates of several decoders on the same sampled shots. A shot fails when the
/// predicted flip differs from the sampled flip on any observable, or the decoder gives up.
pub fn estimate_ber_paired(
    circuit: &NoisyCircuit,
    decoders: &[&dyn Decoder],
    trials: usize,
    seed: u64,
) -> Vec<BerResult> {
    let compiled = Compiled::new(circuit);
    let k = compiled.observables.len();
    let blocks = trials.div_ceil(64);
    let nd = decoders.len();
    let counts: Vec<(Vec<u64>, Vec<Vec<u64>>, Vec<u64>)> = with_thread_cap(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lanes = (trials - b * 64).min(64);
                let bits = sample_block(circuit, &compiled, seed, (b * 64) as u64, lanes);
                let mut fails = vec![0u64; nd];
                let mut per_obs = vec![vec![0u64; k]; nd];
                let mut dec_fail = vec![0u64; nd];
                for lane in 0..lanes {
                    let det = lane_set(&bits.detectors, lane);
                    let flg = lane_set(&bits.flags, lane);
                    let obs = lane_set(&bits.observables, lane);
                    for (d, dec) in decoders.iter().enumerate() {
                        let res = dec.decode(&det, &flg);
                        let mut wrong = res.failed;
                        dec_fail[d] += res.failed as u64;
                        for o in 0..k {
                            let predicted = !res.failed && res.frames.len() > o && res.frames.get(o);
                            if predicted != obs.get(o) {
                                per_obs[d][o] += 1;
                                wrong = true;
                            }
                        }
                        fails[d] += wrong as u64;
                    }
                }
                (fails, per_obs, dec_fail)
            })
            .collect()
    });
    (0..nd)
        .map(|d| {
            let failures = counts.iter().map(|c| c.0[d]).sum();
            let per_obs = (0..k).map(|o| counts.iter().map(|c| c.1[d][o]).sum()).collect();
            let dec_fail = counts.iter().map(|c| c.2[d]).sum();
            ber_from_counts(trials as u64, failures, per_obs, dec_fail, k)
        })
        .collect()
}

/// Decodes every shot of a batch.
pub fn decode_batch(batch: &SyndromeBatch, decoder: &dyn Decoder) -> Vec<CorrectionResult> {
    with_thread_cap(|| {
        (0..batch.trials)
            .into_par_iter()
            .map(|t| decoder.decode(&batch.detectors.row(t), &batch.flags.row(t)))
            .collect()
    })
}

/// Logical error rate of decoded shots against the sampled observables.
pub fn ber_from_batch(batch: &SyndromeBatch, results: &[CorrectionResult]) -> BerResult {
    let k = batch.observables.cols();
    let mut per_obs = vec![0u64; k];
    let (mut failures, mut dec_fail) = (0u64, 0u64);
    for (t, res) in results.iter().enumerate() {
        let mut wrong = res.failed;
        dec_fail += res.failed as u64;
        for (o, count) in per_obs.iter_mut().enumerate() {
            let predicted = !res.failed && res.frames.len() > o && res.frames.get(o);
            if predicted != batch.observables.get(t, o) {
                *count += 1;
                wrong = true;
            }
        }
        failures += wrong as u64;
    }
    ber_from_counts(results.len() as u64, failures, per_obs, dec_fail, k)
}

pub fn estimate_ber(circuit: &NoisyCircuit, decoder: &dyn Decoder, trials: usize, seed: u64) -> BerResult {
    estimate_ber_paired(circuit, &[decoder], trials, seed).remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{gen_rotated_surface, Basis};

    fn small_circuit(p: f64) -> NoisyCircuit {
        let code = gen_rotated_surface(3).unwrap();
        let layout = crate::layout::build_naive_layout(&code);
        let s = crate::schedule::schedule_code(&code).unwrap();
        crate::circuit::build_memory_circuit(&layout, &s, 2, Basis::Z, p).unwrap()
    }

    #[test]
    fn noiseless_is_all_zero_and_deterministic() {
        let c = small_circuit(0.0);
        let b = sample(&c, 100, 1);
        assert_eq!(b.detectors.count_ones() + b.flags.count_ones() + b.observables.count_ones(), 0);
        check_determinism(&c, 4, 9).unwrap();
    }

    #[test]
    fn sampling_is_reproducible() {
        let c = small_circuit(0.01);
        assert_eq!(sample(&c, 130, 5), sample(&c, 130, 5));
        assert_ne!(sample(&c, 130, 5).detectors, sample(&c, 130, 6).detectors);
    }

    #[test]
    fn wilson_is_sane() {
        assert!(wilson_stderr(0, 100) > 0.0);
        assert!((wilson_stderr(50, 100) - 0.05).abs() < 1e-3);
    }
}

#[cfg(test)]
mod fpn_tests {
    use super::*;
    use crate::code::{gen_triangular_color, gen_rotated_surface, Basis};

    #[test]
    fn flag_and_proxy_circuits_are_deterministic() {
        for (code, delta) in [(gen_rotated_surface(3).unwrap(), 3), (gen_triangular_color(3).unwrap(), 4)] {
            let layout = crate::layout::build_fpn(&code, delta, true).unwrap();
            let s = crate::schedule::schedule_layout(&layout).unwrap();
            for basis in [Basis::Z, Basis::X] {
                let c = crate::circuit::build_memory_circuit(&layout, &s, 2, basis, 0.0).unwrap();
                check_determinism(&c, 6, 3).unwrap();
            }
        }
    }
}
