//! Flag-aware decoders over a decoding hypergraph.

use crate::bits::BitSet;

/// Observable flips a decoder predicts for one shot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrectionResult {
    /// Predicted flip of each observable (XOR of λ over applied hyperedges).
    pub frames: BitSet,
    /// Applied hyperedge ids; a hyperedge applied twice cancels and is dropped.
    pub applied: Vec<usize>,
    /// Set when the decoder could not produce a correction. Counted as a logical error.
    pub failed: bool,
    pub diagnostics: Vec<String>,
}

impl CorrectionResult {
    pub fn empty(num_observables: usize) -> Self {
        CorrectionResult { frames: BitSet::new(num_observables), ..Default::default() }
    }

    pub fn failure(num_observables: usize, why: impl Into<String>) -> Self {
        CorrectionResult {
            frames: BitSet::new(num_observables),
            applied: Vec::new(),
            failed: true,
            diagnostics: vec![why.into()],
        }
    }
}

/// A decoder maps observed detector and flag bits to predicted observable flips.
pub trait Decoder: Sync {
    fn decode(&self, detectors: &BitSet, flags: &BitSet) -> CorrectionResult;
}

pub mod graph;
pub mod mwpm;
pub mod oracle;
pub mod restriction;

pub use mwpm::FlaggedMwpm;
pub use oracle::MlOracle;
pub use restriction::FlaggedRestriction;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use crate::dem::{DecodingHypergraph, Renorm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderOptions {
    /// When false the decoder behaves as if no flag ever fired.
    pub use_flags: bool,
    pub renorm: Renorm,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        DecoderOptions { use_flags: true, renorm: Renorm::Paper }
    }
}

/// Memory-basis part of a hypergraph and the map from circuit detectors into it.
#[derive(Clone, Debug)]
pub(crate) struct Projection {
    pub hg: DecodingHypergraph,
    map: Vec<Option<usize>>,
    opts: DecoderOptions,
}

impl Projection {
    pub fn new(full: &DecodingHypergraph, opts: DecoderOptions) -> Self {
        let (hg, map) = full.restrict_to_basis(full.basis);
        Projection { hg, map, opts }
    }

    pub fn flipped(&self, detectors: &BitSet) -> Vec<usize> {
        detectors.ones().filter_map(|d| self.map.get(d).copied().flatten()).collect()
    }

    pub fn observed_flags(&self, flags: &BitSet) -> BitSet {
        if self.opts.use_flags {
            flags.clone()
        } else {
            BitSet::new(self.hg.flag_bits.len())
        }
    }

    pub fn representatives(&self, observed: &BitSet) -> Vec<Option<(usize, f64)>> {
        self.hg.representatives(observed, self.opts.renorm)
    }

    /// Result from a multiset of applied hyperedges; even multiplicities cancel.
    pub fn result(&self, applied: impl IntoIterator<Item = usize>, diagnostics: Vec<String>) -> CorrectionResult {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for h in applied {
            *counts.entry(h).or_default() += 1;
        }
        let mut out = CorrectionResult::empty(self.hg.num_observables);
        for (h, c) in counts {
            if c % 2 == 1 {
                out.applied.push(h);
                for &o in &self.hg.hyperedges[h].frames {
                    out.frames.toggle(o);
                }
            }
        }
        out.diagnostics = diagnostics;
        out
    }
}

/// Per-flag-set tables shared read-only between decode calls.
pub(crate) struct TableCache<T> {
    map: RwLock<HashMap<BitSet, Arc<T>>>,
}

const CACHE_LIMIT: usize = 4096;

impl<T> TableCache<T> {
    pub fn new() -> Self {
        TableCache { map: RwLock::new(HashMap::new()) }
    }

    pub fn get(&self, key: &BitSet, build: impl FnOnce() -> T) -> Arc<T> {
        if let Some(t) = self.map.read().expect("cache lock").get(key) {
            return t.clone();
        }
        let t = Arc::new(build());
        let mut map = self.map.write().expect("cache lock");
        if map.len() < CACHE_LIMIT {
            map.entry(key.clone()).or_insert_with(|| t.clone());
        }
        t
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::circuit::{CheckInfo, DetectorCoord, FlagCoord};
    use crate::code::Basis;
    use crate::dem::Hyperedge;

    /// Three classes over four Z detectors and three flags, all in round 1. Each hyperedge
    /// flips its own observable so the chosen ones can be read off the frames.
    pub(crate) fn three_classes() -> DecodingHypergraph {
        let e = |sigma: &[usize], flags: &[usize], obs: usize| Hyperedge {
            sigma: sigma.to_vec(),
            flags: flags.to_vec(),
            prob: 0.01,
            frames: vec![obs],
        };
        DecodingHypergraph::from_parts(
            Basis::Z,
            (0..4).map(|id| CheckInfo { id, basis: Basis::Z, color: None }).collect(),
            (0..4).map(|check| DetectorCoord { check, round: 1 }).collect(),
            (0..3).map(|qubit| FlagCoord { qubit, round: 1 }).collect(),
            5,
            0.01,
            [
                e(&[0, 1, 2], &[], 0),
                e(&[0, 1, 2], &[0, 1, 2], 1),
                e(&[1, 2, 3], &[], 2),
                e(&[0, 3], &[0], 3),
                e(&[0, 3], &[1, 2], 4),
            ],
        )
    }

    fn frames(r: &CorrectionResult) -> Vec<usize> {
        assert!(!r.failed, "{:?}", r.diagnostics);
        r.frames.ones().collect()
    }

    fn flags(on: &[usize]) -> BitSet {
        BitSet::from_indices(3, on.iter().copied())
    }

    #[test]
    fn oracle_follows_flag_similarity() {
        let hg = three_classes();
        for renorm in [Renorm::Paper, Renorm::Off] {
            let o = MlOracle::new(&hg, 4, DecoderOptions { use_flags: true, renorm }).unwrap();
            assert_eq!(frames(&o.decode_projected(&[0, 3], &flags(&[]))), vec![0, 2]);
            assert_eq!(frames(&o.decode_projected(&[0, 3], &flags(&[0]))), vec![3]);
            assert_eq!(frames(&o.decode_projected(&[0, 1, 2], &flags(&[1, 2]))), vec![1]);
        }
    }

    #[test]
    fn mwpm_follows_flag_similarity() {
        let hg = three_classes();
        let m = FlaggedMwpm::new(&hg, DecoderOptions::default());
        assert_eq!(frames(&m.decode_projected(&[0, 3], &flags(&[]))), vec![0, 2]);
        assert_eq!(frames(&m.decode_projected(&[0, 3], &flags(&[0]))), vec![3]);
        // Three defects and no boundary cannot be paired.
        assert!(m.decode_projected(&[0, 1, 2], &flags(&[1, 2])).failed);
    }

    #[test]
    fn ignoring_flags_drops_flag_classes() {
        let hg = three_classes();
        let opts = DecoderOptions { use_flags: false, renorm: Renorm::Paper };
        let o = MlOracle::new(&hg, 4, opts).unwrap();
        assert_eq!(frames(&o.decode_projected(&[0, 3], &flags(&[0]))), vec![0, 2]);
        let m = FlaggedMwpm::new(&hg, opts);
        assert_eq!(frames(&m.decode_projected(&[0, 3], &flags(&[0]))), vec![0, 2]);
    }

    #[test]
    fn empty_syndrome_is_trivial() {
        let hg = three_classes();
        let m = FlaggedMwpm::new(&hg, DecoderOptions::default());
        let o = MlOracle::new(&hg, 4, DecoderOptions::default()).unwrap();
        for d in [&m as &dyn Decoder, &o] {
            let r = d.decode(&BitSet::new(4), &flags(&[0, 1]));
            assert!(!r.failed && r.applied.is_empty() && r.frames.count_ones() == 0);
        }
    }

    #[test]
    fn restriction_needs_colors() {
        assert!(matches!(
            FlaggedRestriction::new(&three_classes(), DecoderOptions::default()),
            Err(crate::Error::Unsupported(_))
        ));
    }

    #[test]
    fn oracle_guards_cost() {
        assert!(matches!(
            MlOracle::new(&three_classes(), 5, DecoderOptions::default()),
            Err(crate::Error::CostGuard(_))
        ));
    }

    #[test]
    fn even_multiplicity_cancels() {
        let p = Projection::new(&three_classes(), DecoderOptions::default());
        let r = p.result([0, 2, 0], Vec::new());
        assert_eq!(r.applied, vec![2]);
        assert_eq!(r.frames.ones().collect::<Vec<_>>(), vec![p.hg.hyperedges[2].frames[0]]);
    }
}
