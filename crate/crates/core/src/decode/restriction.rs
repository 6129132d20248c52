//! Flagged Restriction decoder for color codes: matching on the three restricted lattices,
//! the duplicate-flag rule, flattening to check ids and local lifting.

use std::collections::{BTreeMap, BTreeSet};

use crate::bits::BitSet;
use crate::code::Color;
use crate::dem::DecodingHypergraph;
use crate::error::{Error, Result};

use super::graph::{DecodingGraph, PathTables};
use super::{CorrectionResult, Decoder, DecoderOptions, Projection, TableCache};

/// Restricted lattices RG, RB and GB.
pub const LATTICES: [[Color; 2]; 3] = [[Color::R, Color::G], [Color::R, Color::B], [Color::G, Color::B]];

/// Endpoint of a flattened edge: a check or the boundary of one lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum End {
    Check(usize),
    Boundary(usize),
}

type FlatEdge = (End, End);

fn flat(a: End, b: End) -> FlatEdge {
    (a.min(b), a.max(b))
}

/// Largest subset size tried when lifting at one vertex.
const MAX_LIFT: usize = 4;

struct Lift {
    hyperedge: usize,
    prob: f64,
    image: BTreeSet<FlatEdge>,
}

struct Tables {
    lattices: Vec<PathTables>,
    /// Lift candidates touching each check.
    lifts: Vec<Lift>,
    by_check: BTreeMap<usize, Vec<usize>>,
}

pub struct FlaggedRestriction {
    proj: Projection,
    /// Color of each check, by check id.
    check_color: Vec<Option<Color>>,
    tables: TableCache<Tables>,
}

fn toggle(set: &mut BTreeSet<FlatEdge>, e: FlatEdge) {
    if !set.remove(&e) {
        set.insert(e);
    }
}

impl FlaggedRestriction {
    pub fn new(hg: &DecodingHypergraph, opts: DecoderOptions) -> Result<Self> {
        let proj = Projection::new(hg, opts);
        let check_color: Vec<Option<Color>> = proj.hg.checks.iter().map(|c| c.color).collect();
        if proj.hg.detectors.iter().any(|d| check_color[d.check].is_none()) {
            return Err(Error::Unsupported("restriction decoding needs a colored code".into()));
        }
        Ok(FlaggedRestriction { proj, check_color, tables: TableCache::new() })
    }

    pub fn hypergraph(&self) -> &DecodingHypergraph {
        &self.proj.hg
    }

    fn det_color(&self, d: usize) -> Color {
        self.check_color[self.proj.hg.detectors[d].check].expect("checked at construction")
    }

    /// Flattened image of a set of checks: per lattice, one check gives a boundary edge and
    /// several give all pairs.
    fn image(&self, checks: &BTreeSet<usize>) -> BTreeSet<FlatEdge> {
        let mut img = BTreeSet::new();
        for (l, colors) in LATTICES.iter().enumerate() {
            let inside: Vec<usize> =
                checks.iter().copied().filter(|&c| colors.contains(&self.check_color[c].unwrap())).collect();
            if inside.len() == 1 {
                toggle(&mut img, flat(End::Check(inside[0]), End::Boundary(l)));
            } else {
                for i in 0..inside.len() {
                    for j in i + 1..inside.len() {
                        toggle(&mut img, flat(End::Check(inside[i]), End::Check(inside[j])));
                    }
                }
            }
        }
        img
    }

    fn build(&self, observed: &BitSet) -> Tables {
        let hg = &self.proj.hg;
        let reps = self.proj.representatives(observed);
        let lattices = LATTICES
            .iter()
            .map(|colors| PathTables::new(DecodingGraph::build(hg, &reps, |d| colors.contains(&self.det_color(d)))))
            .collect();
        // Flattening merges classes from different rounds, so the flag-similarity rule is
        // applied again per flattened image (globally this time), then probability.
        let fired: Vec<usize> = observed.ones().collect();
        let mut by_image: BTreeMap<BTreeSet<FlatEdge>, (usize, f64, usize)> = BTreeMap::new();
        for &(h, p) in reps.iter().flatten() {
            let mut checks = BTreeSet::new();
            for &d in &hg.hyperedges[h].sigma {
                let c = hg.detectors[d].check;
                if !checks.remove(&c) {
                    checks.insert(c);
                }
            }
            let img = self.image(&checks);
            if img.is_empty() {
                continue;
            }
            let dist = crate::dem::sym_diff_len(&hg.hyperedges[h].flags, &fired);
            match by_image.get(&img) {
                Some(&(_, q, qd)) if (qd, -q) <= (dist, -p) => {}
                _ => {
                    by_image.insert(img, (h, p, dist));
                }
            }
        }
        let mut lifts = Vec::new();
        let mut by_check: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (image, (hyperedge, prob, _)) in by_image {
            let touched: BTreeSet<usize> = image
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .filter_map(|e| if let End::Check(c) = e { Some(c) } else { None })
                .collect();
            for c in touched {
                by_check.entry(c).or_default().push(lifts.len());
            }
            lifts.push(Lift { hyperedge, prob, image });
        }
        Tables { lattices, lifts, by_check }
    }

    pub fn decode_projected(&self, flipped: &[usize], flags: &BitSet) -> CorrectionResult {
        let hg = &self.proj.hg;
        let nobs = hg.num_observables;
        if flipped.is_empty() {
            return CorrectionResult::empty(nobs);
        }
        let observed = self.proj.observed_flags(flags);
        let tables = self.tables.get(&observed, || self.build(&observed));

        // Match on each restricted lattice. A flag hyperedge used by several lattice paths
        // is applied directly; its detectors leave the syndrome and the rest is matched again.
        let mut applied = Vec::new();
        let mut diagnostics = Vec::new();
        let mut residual: BTreeSet<usize> = flipped.iter().copied().collect();
        let mut path_edges: Vec<(usize, usize)>;
        loop {
            path_edges = Vec::new();
            for (l, colors) in LATTICES.iter().enumerate() {
                let sub: Vec<usize> =
                    residual.iter().copied().filter(|&d| colors.contains(&self.det_color(d))).collect();
                if sub.is_empty() {
                    continue;
                }
                let Some(paths) = tables.lattices[l].match_and_walk(&sub) else {
                    return CorrectionResult::failure(nobs, format!("no perfect matching on lattice {l}"));
                };
                let mut parity: BTreeMap<usize, bool> = BTreeMap::new();
                for e in paths.into_iter().flatten() {
                    *parity.entry(e).or_default() ^= true;
                }
                path_edges.extend(parity.into_iter().filter(|&(_, odd)| odd).map(|(e, _)| (l, e)));
            }
            let mut uses: BTreeMap<usize, usize> = BTreeMap::new();
            for &(l, e) in &path_edges {
                *uses.entry(tables.lattices[l].graph.edges[e].source).or_default() += 1;
            }
            let duplicated: Vec<usize> =
                uses.into_iter().filter(|&(h, n)| n >= 2 && hg.hyperedges[h].is_flag()).map(|(h, _)| h).collect();
            if duplicated.is_empty() || applied.len() > flipped.len() {
                break;
            }
            for h in duplicated {
                diagnostics.push(format!("flag hyperedge {h} appears on several lattice paths"));
                applied.push(h);
                for &d in &hg.hyperedges[h].sigma {
                    if !residual.remove(&d) {
                        residual.insert(d);
                    }
                }
            }
        }

        // Flatten to check ids; time-like edges vanish.
        let mut em: BTreeSet<FlatEdge> = BTreeSet::new();
        for &(l, e) in &path_edges {
            let g = &tables.lattices[l].graph;
            let edge = &g.edges[e];
            let end = |v: usize| if v == g.boundary() { End::Boundary(l) } else { End::Check(hg.detectors[v].check) };
            let (a, b) = (end(edge.u), end(edge.v));
            if a != b {
                toggle(&mut em, flat(a, b));
            }
        }

        // Lifting, R vertices first.
        let mut order: Vec<usize> = tables.by_check.keys().copied().collect();
        order.sort_by_key(|&c| (self.check_color[c].unwrap().index(), c));
        let mut budget = 4 * em.len() + 16;
        while !em.is_empty() {
            if budget == 0 {
                return CorrectionResult::failure(nobs, "lifting did not terminate");
            }
            budget -= 1;
            let mut progressed = false;
            for &v in &order {
                let incident: BTreeSet<FlatEdge> =
                    em.iter().copied().filter(|&(a, b)| a == End::Check(v) || b == End::Check(v)).collect();
                if incident.is_empty() {
                    continue;
                }
                if let Some(set) = self.lift_at(&tables, v, &incident) {
                    for i in set {
                        applied.push(tables.lifts[i].hyperedge);
                        for &e in &tables.lifts[i].image {
                            toggle(&mut em, e);
                        }
                    }
                    progressed = true;
                    break;
                }
            }
            if !progressed {
                return CorrectionResult::failure(nobs, format!("lifting stuck with {} edges left", em.len()));
            }
        }
        self.proj.result(applied, diagnostics)
    }

    /// Smallest set of lift candidates at `v` whose edges incident to `v` reproduce
    /// `incident`; ties go to the most probable set.
    fn lift_at(&self, tables: &Tables, v: usize, incident: &BTreeSet<FlatEdge>) -> Option<Vec<usize>> {
        let cands = tables.by_check.get(&v)?;
        let local: Vec<BTreeSet<FlatEdge>> = cands
            .iter()
            .map(|&i| {
                tables.lifts[i]
                    .image
                    .iter()
                    .copied()
                    .filter(|&(a, b)| a == End::Check(v) || b == End::Check(v))
                    .collect()
            })
            .collect();
        for size in 1..=MAX_LIFT.min(cands.len()) {
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut pick = Vec::with_capacity(size);
            subsets(cands.len(), size, 0, &mut pick, &mut |s| {
                let mut acc = BTreeSet::new();
                for &k in s {
                    for &e in &local[k] {
                        toggle(&mut acc, e);
                    }
                }
                if &acc == incident {
                    let logp: f64 = s.iter().map(|&k| tables.lifts[cands[k]].prob.min(1.0).ln()).sum();
                    if best.as_ref().is_none_or(|(b, _)| logp > *b) {
                        best = Some((logp, s.iter().map(|&k| cands[k]).collect()));
                    }
                }
            });
            if let Some((_, set)) = best {
                return Some(set);
            }
        }
        None
    }
}

fn subsets(n: usize, size: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == size {
        f(pick);
        return;
    }
    for i in start..n {
        if n - i < size - pick.len() {
            break;
        }
        pick.push(i);
        subsets(n, size, i + 1, pick, f);
        pick.pop();
    }
}

impl Decoder for FlaggedRestriction {
    fn decode(&self, detectors: &BitSet, flags: &BitSet) -> CorrectionResult {
        self.decode_projected(&self.proj.flipped(detectors), flags)
    }
}
