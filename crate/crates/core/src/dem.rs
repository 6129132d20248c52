//! Decoding hypergraph extraction and error equivalence classes.
//!
//! Extraction runs a backward sensitivity sweep: for every qubit we track which outputs
//! (detectors, flag bits, observables) an X or Z error at the current point would flip. That
//! is the adjoint of forward frame propagation and shares no code with it, so the two can
//! check each other.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::circuit::{outcome_pauli, CheckInfo, DetectorCoord, FlagCoord, Instr, NoisyCircuit};
use crate::code::Basis;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    /// Flipped detectors, sorted.
    pub sigma: Vec<usize>,
    /// Flipped flag bits, sorted.
    pub flags: Vec<usize>,
    pub prob: f64,
    /// Flipped observables, sorted.
    pub frames: Vec<usize>,
}

impl Hyperedge {
    pub fn is_flag(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Hyperedges sharing one detector set. Members are ordered by descending probability, then
/// lexicographically by flag set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    pub sigma: Vec<usize>,
    pub members: Vec<usize>,
}

/// How a representative's probability is adjusted when flags were observed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Renorm {
    /// `p_M^{|f ⊕ F|} · π^{|σ| - 1}`.
    #[default]
    Paper,
    /// Keep the raw probability.
    Off,
}

impl FromStr for Renorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Renorm::Paper),
            "off" => Ok(Renorm::Off),
            _ => Err(Error::Parse { context: "renorm".into(), message: format!("expected paper|off, got {s:?}") }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingHypergraph {
    pub basis: Basis,
    pub checks: Vec<CheckInfo>,
    pub detectors: Vec<DetectorCoord>,
    pub flag_bits: Vec<FlagCoord>,
    pub num_observables: usize,
    /// Measurement error probability.
    pub p_m: f64,
    pub hyperedges: Vec<Hyperedge>,
    pub classes: Vec<EquivalenceClass>,
    #[serde(skip)]
    class_index: HashMap<Vec<usize>, usize>,
}

fn merge_prob(a: f64, b: f64) -> f64 {
    a + b - 2.0 * a * b
}

/// Partitions hyperedges by exact detector set.
pub fn build_equiv_classes(hyperedges: &[Hyperedge]) -> Vec<EquivalenceClass> {
    let mut by_sigma: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (i, e) in hyperedges.iter().enumerate() {
        by_sigma.entry(&e.sigma).or_default().push(i);
    }
    by_sigma
        .into_iter()
        .map(|(sigma, mut members)| {
            members.sort_by(|&a, &b| {
                let (ea, eb) = (&hyperedges[a], &hyperedges[b]);
                eb.prob.total_cmp(&ea.prob).then_with(|| ea.flags.cmp(&eb.flags)).then(a.cmp(&b))
            });
            EquivalenceClass { sigma: sigma.to_vec(), members }
        })
        .collect()
}

impl DecodingHypergraph {
    /// Assembles a hypergraph from raw hyperedges, merging equal `(σ, f, λ)` and building
    /// classes.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        basis: Basis,
        checks: Vec<CheckInfo>,
        detectors: Vec<DetectorCoord>,
        flag_bits: Vec<FlagCoord>,
        num_observables: usize,
        p_m: f64,
        raw: impl IntoIterator<Item = Hyperedge>,
    ) -> Self {
        let mut merged: BTreeMap<(Vec<usize>, Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
        for e in raw {
            if e.sigma.is_empty() && e.flags.is_empty() && e.frames.is_empty() {
                continue;
            }
            let slot = merged.entry((e.sigma, e.flags, e.frames)).or_insert(0.0);
            *slot = merge_prob(*slot, e.prob);
        }
        let hyperedges: Vec<Hyperedge> = merged
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|((sigma, flags, frames), prob)| Hyperedge { sigma, flags, prob, frames })
            .collect();
        let mut hg = DecodingHypergraph {
            basis,
            checks,
            detectors,
            flag_bits,
            num_observables,
            p_m,
            classes: build_equiv_classes(&hyperedges),
            hyperedges,
            class_index: HashMap::new(),
        };
        hg.reindex();
        hg
    }

    fn reindex(&mut self) {
        self.class_index = self.classes.iter().enumerate().map(|(i, c)| (c.sigma.clone(), i)).collect();
    }

    pub fn class_of(&self, sigma: &[usize]) -> Option<usize> {
        self.class_index.get(sigma).copied()
    }

    pub fn check_of_detector(&self, d: usize) -> &CheckInfo {
        &self.checks[self.detectors[d].check]
    }

    /// Pairs of hyperedges that agree on `σ` and `f` but flip different observables. A decoder
    /// cannot tell them apart.
    pub fn ambiguous_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in &self.classes {
            for (i, &a) in c.members.iter().enumerate() {
                for &b in &c.members[i + 1..] {
                    if self.hyperedges[a].flags == self.hyperedges[b].flags {
                        out.push((a.min(b), a.max(b)));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Detector flip marginals treating hyperedges as independent: a detector flips when an
    /// odd number of its incident hyperedges fire, `(1 - Π(1 - 2π(e))) / 2`. To first order
    /// this is `1 - Π(1 - π(e))`.
    pub fn detector_marginals(&self) -> Vec<f64> {
        let mut keep = vec![1.0; self.detectors.len()];
        for e in &self.hyperedges {
            for &d in &e.sigma {
                keep[d] *= 1.0 - 2.0 * e.prob;
            }
        }
        keep.into_iter().map(|k| (1.0 - k) / 2.0).collect()
    }

    /// Keeps only detectors of checks in `basis` and re-merges. Flag bits are kept.
    pub fn restrict_to_basis(&self, basis: Basis) -> (DecodingHypergraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.detectors.len()];
        let mut dets = Vec::new();
        for (i, c) in self.detectors.iter().enumerate() {
            if self.checks[c.check].basis == basis {
                map[i] = Some(dets.len());
                dets.push(*c);
            }
        }
        let raw = self.hyperedges.iter().map(|e| {
            let mut sigma: Vec<usize> = e.sigma.iter().filter_map(|&d| map[d]).collect();
            sigma.sort_unstable();
            Hyperedge { sigma, flags: e.flags.clone(), prob: e.prob, frames: e.frames.clone() }
        });
        let hg = DecodingHypergraph::from_parts(
            self.basis,
            self.checks.clone(),
            dets,
            self.flag_bits.clone(),
            self.num_observables,
            self.p_m,
            raw,
        );
        (hg, map)
    }

    /// Rounds touched by a class: detector rounds of its key plus flag rounds of its members.
    fn class_rounds(&self, class: &EquivalenceClass) -> BTreeSet<usize> {
        let mut rounds: BTreeSet<usize> = class.sigma.iter().map(|&d| self.detectors[d].round).collect();
        for &m in &class.members {
            rounds.extend(self.hyperedges[m].flags.iter().map(|&f| self.flag_bits[f].round));
        }
        rounds
    }

    /// Observed flags restricted to the rounds the class spans.
    pub fn local_flags(&self, class: usize, observed: &BitSet) -> Vec<usize> {
        let rounds = self.class_rounds(&self.classes[class]);
        observed.ones().filter(|&f| rounds.contains(&self.flag_bits[f].round)).collect()
    }

    /// Chooses the class member whose flags are closest to the observed flags (restricted to
    /// the class's rounds); ties go to higher probability, then class order. Returns the member
    /// and its adjusted probability.
    pub fn select_representative(&self, class: usize, observed: &BitSet, renorm: Renorm) -> (usize, f64) {
        let local = self.local_flags(class, observed);
        let c = &self.classes[class];
        let mut best: Option<(usize, usize)> = None;
        for &m in &c.members {
            let dist = sym_diff_len(&self.hyperedges[m].flags, &local);
            if best.is_none_or(|(_, bd)| dist < bd) {
                best = Some((m, dist));
            }
        }
        let (m, dist) = best.expect("classes are never empty");
        let e = &self.hyperedges[m];
        let prob = if !local.is_empty() && renorm == Renorm::Paper {
            self.p_m.powi(dist as i32) * e.prob.powi(e.sigma.len() as i32 - 1)
        } else {
            e.prob
        };
        (m, prob)
    }

    /// Representatives used to build decoding graphs for observed flags `observed`. A class is
    /// left out when no flag near it fired and all of its members need flags.
    pub fn representatives(&self, observed: &BitSet, renorm: Renorm) -> Vec<Option<(usize, f64)>> {
        (0..self.classes.len())
            .map(|c| {
                let (m, p) = self.select_representative(c, observed, renorm);
                let none_fired = self.local_flags(c, observed).is_empty();
                (!(none_fired && self.hyperedges[m].is_flag())).then_some((m, p))
            })
            .collect()
    }

    /// Among flag hyperedges of `class`, the one whose flags are closest to `observed`
    /// (ties: higher probability).
    pub fn most_similar_flag_edge(&self, class: usize, observed: &BitSet) -> Option<usize> {
        let local = self.local_flags(class, observed);
        self.classes[class]
            .members
            .iter()
            .copied()
            .filter(|&m| self.hyperedges[m].is_flag())
            .min_by_key(|&m| sym_diff_len(&self.hyperedges[m].flags, &local))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hypergraph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut hg: DecodingHypergraph = serde_json::from_str(text).map_err(|e| Error::json("hypergraph", e))?;
        hg.validate()?;
        hg.reindex();
        Ok(hg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        for (i, e) in self.hyperedges.iter().enumerate() {
            if !(e.prob > 0.0 && e.prob < 1.0) {
                return bad(format!("hyperedge {i} has probability {} outside (0, 1)", e.prob));
            }
            if e.sigma.iter().any(|&d| d >= self.detectors.len())
                || e.flags.iter().any(|&f| f >= self.flag_bits.len())
                || e.frames.iter().any(|&o| o >= self.num_observables)
            {
                return bad(format!("hyperedge {i} references an unknown coordinate"));
            }
            if e.sigma.is_empty() && e.flags.is_empty() && e.frames.is_empty() {
                return bad(format!("hyperedge {i} is trivial"));
            }
            if e.sigma.windows(2).any(|w| w[0] >= w[1]) || e.flags.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("hyperedge {i} has unsorted index lists"));
            }
        }
        if self.detectors.iter().any(|c| c.check >= self.checks.len()) {
            return bad("detector references an unknown check".into());
        }
        if build_equiv_classes(&self.hyperedges) != self.classes {
            return bad("classes do not partition the hyperedges by detector set".into());
        }
        Ok(())
    }
}

/// Size of the symmetric difference of two sorted index lists.
pub fn sym_diff_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                n += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                n += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    n + (a.len() - i) + (b.len() - j)
}

/// Signature of every (channel, outcome) pair with nonzero probability, in channel order.
/// The signature bit layout is detectors, then flag bits, then observables.
pub fn channel_signatures(circuit: &NoisyCircuit) -> Vec<(usize, usize, f64, BitSet)> {
    let mut rec_outputs: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_measurements()];
    let (mut nd, mut nf) = (0, 0);
    let no = circuit.num_observables();
    for ins in &circuit.instrs {
        match ins {
            Instr::Detector { recs, .. } => {
                for &r in recs {
                    rec_outputs[r].push(nd);
                }
                nd += 1;
            }
            Instr::FlagBit { .. } => nf += 1,
            _ => {}
        }
    }
    let (mut fi, width) = (0, nd + nf + no);
    for ins in &circuit.instrs {
        match ins {
            Instr::FlagBit { rec, .. } => {
                rec_outputs[*rec].push(nd + fi);
                fi += 1;
            }
            Instr::Observable { index, recs } => {
                for &r in recs {
                    rec_outputs[r].push(nd + nf + index);
                }
            }
            _ => {}
        }
    }
    let rec_sets: Vec<BitSet> = rec_outputs.iter().map(|o| BitSet::from_indices(width, o.iter().copied())).collect();

    let n = circuit.num_qubits;
    let mut sx = vec![BitSet::new(width); n];
    let mut sz = vec![BitSet::new(width); n];
    let mut rec = circuit.num_measurements();
    let mut channel = circuit.num_channels();
    let mut out = Vec::new();
    let sig_of = |sx: &[BitSet], sz: &[BitSet], qs: &[usize], o: usize| {
        let mut s = BitSet::new(width);
        for (slot, &q) in qs.iter().enumerate() {
            let (x, z) = outcome_pauli(qs.len(), o, slot);
            if x {
                s.xor_with(&sx[q]);
            }
            if z {
                s.xor_with(&sz[q]);
            }
        }
        s
    };
    for ins in circuit.instrs.iter().rev() {
        match ins {
            Instr::Reset(qs) => {
                for &q in qs {
                    sx[q] = BitSet::new(width);
                    sz[q] = BitSet::new(width);
                }
            }
            Instr::H(qs) => {
                for &q in qs {
                    let t = std::mem::take(&mut sx[q]);
                    sx[q] = std::mem::replace(&mut sz[q], t);
                }
            }
            Instr::Cx(pairs) => {
                for &(c, t) in pairs.iter().rev() {
                    let xt = sx[t].clone();
                    sx[c].xor_with(&xt);
                    let zc = sz[c].clone();
                    sz[t].xor_with(&zc);
                }
            }
            Instr::Measure(qs) => {
                for &q in qs.iter().rev() {
                    rec -= 1;
                    sx[q].xor_with(&rec_sets[rec]);
                }
            }
            Instr::Pauli1 { px, py, pz, qubits } => {
                for &q in qubits.iter().rev() {
                    channel -= 1;
                    for (o, &p) in [*px, *py, *pz].iter().enumerate() {
                        if p > 0.0 {
                            out.push((channel, o + 1, p, sig_of(&sx, &sz, &[q], o + 1)));
                        }
                    }
                }
            }
            Instr::Pauli2 { probs, pairs } => {
                for &(a, b) in pairs.iter().rev() {
                    channel -= 1;
                    for (o, &p) in probs.iter().enumerate() {
                        if p > 0.0 {
                            out.push((channel, o + 1, p, sig_of(&sx, &sz, &[a, b], o + 1)));
                        }
                    }
                }
            }
            Instr::Detector { .. } | Instr::Observable { .. } | Instr::FlagBit { .. } | Instr::Tick => {}
        }
    }
    out.reverse();
    out.sort_by_key(|s| (s.0, s.1));
    out
}

/// Splits a packed signature into (detectors, flags, observables) index lists.
pub fn split_signature(sig: &BitSet, nd: usize, nf: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut d, mut f, mut o) = (Vec::new(), Vec::new(), Vec::new());
    for i in sig.ones() {
        if i < nd {
            d.push(i);
        } else if i < nd + nf {
            f.push(i - nd);
        } else {
            o.push(i - nd - nf);
        }
    }
    (d, f, o)
}

/// Builds the decoding hypergraph of `circuit` from every single elementary fault.
pub fn extract_hypergraph(circuit: &NoisyCircuit) -> Result<DecodingHypergraph> {
    circuit.validate()?;
    let detectors = circuit.detectors();
    let flag_bits = circuit.flag_bits();
    let (nd, nf) = (detectors.len(), flag_bits.len());
    let raw = channel_signatures(circuit).into_iter().map(|(_, _, prob, sig)| {
        let (sigma, flags, frames) = split_signature(&sig, nd, nf);
        Hyperedge { sigma, flags, prob, frames }
    });
    Ok(DecodingHypergraph::from_parts(
        circuit.basis,
        circuit.checks.clone(),
        detectors,
        flag_bits,
        circuit.num_observables(),
        circuit.p,
        raw,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::gen_rotated_surface;

    fn circuit(p: f64) -> NoisyCircuit {
        let code = gen_rotated_surface(3).unwrap();
        let layout = crate::layout::build_naive_layout(&code);
        let s = crate::schedule::schedule_code(&code).unwrap();
        crate::circuit::build_memory_circuit(&layout, &s, 3, Basis::Z, p).unwrap()
    }

    #[test]
    fn noiseless_circuit_has_empty_hypergraph() {
        let hg = extract_hypergraph(&circuit(0.0)).unwrap();
        assert!(hg.hyperedges.is_empty() && hg.classes.is_empty());
    }

    #[test]
    fn classes_partition_and_json_round_trips() {
        let hg = extract_hypergraph(&circuit(1e-3)).unwrap();
        let total: usize = hg.classes.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, hg.hyperedges.len());
        let back = DecodingHypergraph::from_json(&hg.to_json()).unwrap();
        assert_eq!(back, hg);
        assert_eq!(back.class_of(&hg.classes[3].sigma), Some(3));
    }

    #[test]
    fn symmetric_difference() {
        assert_eq!(sym_diff_len(&[1, 2, 3], &[2, 4]), 3);
        assert_eq!(sym_diff_len(&[], &[]), 0);
    }

    #[test]
    fn backward_sweep_matches_forward_injection() {
        let code = crate::code::gen_triangular_color(3).unwrap();
        let layout = crate::layout::build_fpn(&code, 3, true).unwrap();
        let s = crate::schedule::schedule_layout(&layout).unwrap();
        let c = crate::circuit::build_memory_circuit(&layout, &s, 2, Basis::X, 1e-3).unwrap();
        let sigs = channel_signatures(&c);
        let faults: Vec<Vec<(usize, usize)>> = sigs.iter().map(|s| vec![(s.0, s.1)]).collect();
        let fwd = crate::sim::inject_faults(&c, &faults);
        let (nd, nf) = (c.detectors().len(), c.flag_bits().len());
        for (s, f) in sigs.iter().zip(&fwd) {
            let (d, fl, o) = split_signature(&s.3, nd, nf);
            assert_eq!(d, f.detectors.ones().collect::<Vec<_>>());
            assert_eq!(fl, f.flags.ones().collect::<Vec<_>>());
            assert_eq!(o, f.observables.ones().collect::<Vec<_>>());
        }
        let hg = extract_hypergraph(&c).unwrap();
        assert!(hg.hyperedges.iter().any(|e| e.is_flag()));
    }
}
