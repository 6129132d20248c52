//! Decoding graphs built from class representatives, with shortest paths.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::OnceLock;

use crate::dem::DecodingHypergraph;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub u: usize,
    /// The boundary vertex when the edge came from a single detector.
    pub v: usize,
    /// `-ln π` of the source representative.
    pub weight: f64,
    pub source: usize,
    /// The edge is one pair of a clique expansion, so no hyperedge has exactly these endpoints.
    pub flag_substitutable: bool,
}

#[derive(Clone, Debug)]
pub struct DecodingGraph {
    pub num_detectors: usize,
    pub edges: Vec<GraphEdge>,
    pub has_boundary: bool,
    adj: Vec<Vec<usize>>,
}

pub fn weight_of(prob: f64) -> f64 {
    if prob >= 1.0 {
        0.0
    } else {
        -prob.ln()
    }
}

impl DecodingGraph {
    /// Vertex id of the virtual boundary.
    pub fn boundary(&self) -> usize {
        self.num_detectors
    }

    /// Builds the graph over detectors accepted by `keep`. Each representative contributes
    /// its detectors restricted to `keep`: one detector gives a boundary edge, two give an
    /// edge, more give a clique at full weight. Parallel edges keep the lightest.
    pub fn build(hg: &DecodingHypergraph, reps: &[Option<(usize, f64)>], keep: impl Fn(usize) -> bool) -> Self {
        let n = hg.detectors.len();
        let mut best: BTreeMap<(usize, usize), GraphEdge> = BTreeMap::new();
        let mut offer = |e: GraphEdge| {
            let key = (e.u, e.v);
            match best.get(&key) {
                Some(old) if old.weight <= e.weight => {}
                _ => {
                    best.insert(key, e);
                }
            }
        };
        for &(h, prob) in reps.iter().flatten() {
            let sigma: Vec<usize> = hg.hyperedges[h].sigma.iter().copied().filter(|&d| keep(d)).collect();
            let weight = weight_of(prob);
            let full = hg.hyperedges[h].sigma.len();
            match sigma.len() {
                0 => {}
                1 => offer(GraphEdge { u: sigma[0], v: n, weight, source: h, flag_substitutable: full != 1 }),
                _ => {
                    for i in 0..sigma.len() {
                        for j in i + 1..sigma.len() {
                            offer(GraphEdge {
                                u: sigma[i],
                                v: sigma[j],
                                weight,
                                source: h,
                                flag_substitutable: full != 2,
                            });
                        }
                    }
                }
            }
        }
        let edges: Vec<GraphEdge> = best.into_values().collect();
        let mut adj = vec![Vec::new(); n + 1];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push(i);
            adj[e.v].push(i);
        }
        let has_boundary = !adj[n].is_empty();
        DecodingGraph { num_detectors: n, edges, has_boundary, adj }
    }

    pub fn other_end(&self, edge: usize, from: usize) -> usize {
        let e = &self.edges[edge];
        if e.u == from {
            e.v
        } else {
            e.u
        }
    }

    pub fn shortest_paths(&self, src: usize) -> ShortestPaths {
        let nv = self.num_detectors + 1;
        let mut dist = vec![f64::INFINITY; nv];
        let mut pred = vec![None; nv];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Entry(0.0, src));
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &ei in &self.adj[v] {
                let w = self.other_end(ei, v);
                let nd = d + self.edges[ei].weight;
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = Some(ei);
                    heap.push(Entry(nd, w));
                }
            }
        }
        ShortestPaths { src, dist, pred }
    }
}

/// Min-heap entry ordered by distance, then vertex.
#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub src: usize,
    pub dist: Vec<f64>,
    pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Edge ids on the stored path from the source to `target`.
    pub fn path(&self, graph: &DecodingGraph, target: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut v = target;
        while v != self.src {
            let Some(e) = self.pred[v] else { return Vec::new() };
            out.push(e);
            v = graph.other_end(e, v);
        }
        out
    }
}

/// A graph with lazily computed single-source shortest paths.
pub struct PathTables {
    pub graph: DecodingGraph,
    rows: Vec<OnceLock<ShortestPaths>>,
}

impl PathTables {
    pub fn new(graph: DecodingGraph) -> Self {
        let rows = (0..graph.num_detectors + 1).map(|_| OnceLock::new()).collect();
        PathTables { graph, rows }
    }

    pub fn row(&self, src: usize) -> &ShortestPaths {
        self.rows[src].get_or_init(|| self.graph.shortest_paths(src))
    }

    /// Exact matching over `flipped` detectors. Returns matched pairs (`None` = boundary)
    /// with their path edges, or `None` when no perfect matching exists.
    pub fn match_and_walk(&self, flipped: &[usize]) -> Option<Vec<Vec<usize>>> {
        let m = flipped.len();
        let rows: Vec<&ShortestPaths> = flipped.iter().map(|&d| self.row(d)).collect();
        let weights: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| rows[i].dist[flipped[j]]).collect()).collect();
        let bnd: Vec<f64> = (0..m).map(|i| rows[i].dist[self.graph.boundary()]).collect();
        let boundary = self.graph.has_boundary.then_some(bnd.as_slice());
        let matching = crate::matching::mwpm_exact(&weights, boundary).ok()?;
        Some(
            matching
                .pairs
                .iter()
                .map(|&(i, j)| {
                    let target = j.map_or(self.graph.boundary(), |j| flipped[j]);
                    rows[i].path(&self.graph, target)
                })
                .collect(),
        )
    }
}
