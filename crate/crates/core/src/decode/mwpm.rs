//! Flagged minimum-weight perfect matching for surface-type codes.

use crate::bits::BitSet;
use crate::dem::DecodingHypergraph;

use super::graph::{DecodingGraph, PathTables};
use super::{CorrectionResult, Decoder, DecoderOptions, Projection, TableCache};

pub struct FlaggedMwpm {
    proj: Projection,
    tables: TableCache<PathTables>,
}

impl FlaggedMwpm {
    pub fn new(hg: &DecodingHypergraph, opts: DecoderOptions) -> Self {
        FlaggedMwpm { proj: Projection::new(hg, opts), tables: TableCache::new() }
    }

    /// The memory-basis hypergraph the decoder works on; `applied` ids index into it.
    pub fn hypergraph(&self) -> &DecodingHypergraph {
        &self.proj.hg
    }

    /// Decodes detector ids of the projected hypergraph directly.
    pub fn decode_projected(&self, flipped: &[usize], flags: &BitSet) -> CorrectionResult {
        let hg = &self.proj.hg;
        if flipped.is_empty() {
            return CorrectionResult::empty(hg.num_observables);
        }
        let observed = self.proj.observed_flags(flags);
        let tables = self.tables.get(&observed, || {
            PathTables::new(DecodingGraph::build(hg, &self.proj.representatives(&observed), |_| true))
        });
        let Some(paths) = tables.match_and_walk(flipped) else {
            return CorrectionResult::failure(hg.num_observables, "no perfect matching over flipped detectors");
        };
        let mut parity = vec![false; tables.graph.edges.len()];
        for e in paths.into_iter().flatten() {
            parity[e] ^= true;
        }
        let mut applied = Vec::new();
        let mut diagnostics = Vec::new();
        for (ei, _) in parity.iter().enumerate().filter(|(_, &odd)| odd) {
            let edge = &tables.graph.edges[ei];
            let mut chosen = edge.source;
            if edge.flag_substitutable {
                let key: Vec<usize> = if edge.v == tables.graph.boundary() {
                    vec![edge.u]
                } else {
                    vec![edge.u.min(edge.v), edge.u.max(edge.v)]
                };
                if let Some(sub) = hg.class_of(&key).and_then(|c| hg.most_similar_flag_edge(c, &observed)) {
                    diagnostics.push(format!("edge {key:?}: substituted flag hyperedge {sub} for {chosen}"));
                    chosen = sub;
                }
            }
            applied.push(chosen);
        }
        self.proj.result(applied, diagnostics)
    }
}

impl Decoder for FlaggedMwpm {
    fn decode(&self, detectors: &BitSet, flags: &BitSet) -> CorrectionResult {
        self.decode_projected(&self.proj.flipped(detectors), flags)
    }
}
