//! Brute-force maximum-likelihood oracle over small hyperedge subsets.

use crate::bits::BitSet;
use crate::dem::DecodingHypergraph;
use crate::error::{Error, Result};

use super::{CorrectionResult, Decoder, DecoderOptions, Projection, TableCache};

pub const MAX_HYPEREDGES: usize = 200;
pub const MAX_K: usize = 4;

struct Candidates {
    /// (hyperedge, detector set, log probability)
    edges: Vec<(usize, BitSet, f64)>,
    by_detector: Vec<Vec<usize>>,
    max_sigma: usize,
}

pub struct MlOracle {
    proj: Projection,
    k_max: usize,
    tables: TableCache<Candidates>,
}

impl MlOracle {
    pub fn new(hg: &DecodingHypergraph, k_max: usize, opts: DecoderOptions) -> Result<Self> {
        let proj = Projection::new(hg, opts);
        if proj.hg.hyperedges.len() > MAX_HYPEREDGES || k_max > MAX_K {
            return Err(Error::CostGuard(format!(
                "oracle needs at most {MAX_HYPEREDGES} hyperedges and k_max <= {MAX_K}; got {} and {k_max}",
                proj.hg.hyperedges.len()
            )));
        }
        Ok(MlOracle { proj, k_max, tables: TableCache::new() })
    }

    pub fn hypergraph(&self) -> &DecodingHypergraph {
        &self.proj.hg
    }

    fn candidates(&self, observed: &BitSet) -> Candidates {
        let hg = &self.proj.hg;
        let nd = hg.detectors.len();
        let mut edges = Vec::new();
        let mut by_detector = vec![Vec::new(); nd];
        for &(h, p) in self.proj.representatives(observed).iter().flatten() {
            let sigma = &hg.hyperedges[h].sigma;
            if sigma.is_empty() {
                continue;
            }
            for &d in sigma {
                by_detector[d].push(edges.len());
            }
            edges.push((h, BitSet::from_indices(nd, sigma.iter().copied()), p.min(1.0).ln()));
        }
        let max_sigma = edges.iter().map(|e| e.1.count_ones() as usize).max().unwrap_or(1);
        Candidates { edges, by_detector, max_sigma }
    }

    pub fn decode_projected(&self, flipped: &[usize], flags: &BitSet) -> CorrectionResult {
        let hg = &self.proj.hg;
        if flipped.is_empty() {
            return CorrectionResult::empty(hg.num_observables);
        }
        let observed = self.proj.observed_flags(flags);
        let cand = self.tables.get(&observed, || self.candidates(&observed));
        let target = BitSet::from_indices(hg.detectors.len(), flipped.iter().copied());
        let mut search = Search { cand: &cand, k_max: self.k_max, best: None, chosen: Vec::new() };
        search.run(target, 0.0);
        match search.best {
            Some((_, set)) => self.proj.result(set.into_iter().map(|i| cand.edges[i].0), Vec::new()),
            None => CorrectionResult::failure(hg.num_observables, format!("no subset of size <= {}", self.k_max)),
        }
    }
}

struct Search<'a> {
    cand: &'a Candidates,
    k_max: usize,
    best: Option<(f64, Vec<usize>)>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    /// Every solution contains an edge through the lowest residual detector, so branching on
    /// those edges is complete. Log probabilities are non-positive, so partial sums bound.
    fn run(&mut self, residual: BitSet, logp: f64) {
        if self.best.as_ref().is_some_and(|(b, _)| logp <= *b) {
            return;
        }
        let Some(d) = residual.first_one() else {
            self.best = Some((logp, self.chosen.clone()));
            return;
        };
        let need = (residual.count_ones() as usize).div_ceil(self.cand.max_sigma);
        if self.chosen.len() + need > self.k_max {
            return;
        }
        for &i in &self.cand.by_detector[d] {
            if self.chosen.contains(&i) {
                continue;
            }
            let (_, sigma, lp) = &self.cand.edges[i];
            let mut next = residual.clone();
            next.xor_with(sigma);
            self.chosen.push(i);
            self.run(next, logp + lp);
            self.chosen.pop();
        }
    }
}

impl Decoder for MlOracle {
    fn decode(&self, detectors: &BitSet, flags: &BitSet) -> CorrectionResult {
        self.decode_projected(&self.proj.flipped(detectors), flags)
    }
}
