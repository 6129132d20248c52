//! Flag-proxy network layouts: the physical qubit graph that realizes syndrome extraction for a
//! code under a degree budget.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::code::{Basis, TannerCode};
use crate::error::{Error, Result};
use crate::matching::max_weight_matching;

pub const DEFAULT_DEGREE_BUDGET: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Parity,
    Flag,
    Proxy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalQubit {
    pub id: usize,
    pub role: Role,
    /// Data index for data qubits, check id for parity qubits, host qubit for proxies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
}

/// One check served by a flag, together with the data qubits the flag couples for it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagCover {
    pub check: usize,
    pub data: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FpnLayout {
    pub code: TannerCode,
    pub qubits: Vec<PhysicalQubit>,
    /// Sorted `(a, b)` pairs with `a < b`.
    pub edges: BTreeSet<(usize, usize)>,
    pub flag_assignments: BTreeMap<usize, Vec<FlagCover>>,
    /// Proxy id → the qubit it was split off from.
    pub proxy_chains: BTreeMap<usize, usize>,
    pub degree_budget: Option<usize>,
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl FpnLayout {
    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn parity_of(&self, check: usize) -> usize {
        self.code.n + check
    }

    pub fn role(&self, q: usize) -> Role {
        self.qubits[q].role
    }

    pub fn qubits_with_role(&self, role: Role) -> impl Iterator<Item = usize> + '_ {
        self.qubits.iter().filter(move |q| q.role == role).map(|q| q.id)
    }

    pub fn has_flags(&self) -> bool {
        !self.flag_assignments.is_empty()
    }

    pub fn has_proxies(&self) -> bool {
        !self.proxy_chains.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_qubits()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_qubits()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Flags serving `check`, each with the data qubits it couples for that check.
    pub fn flags_of_check(&self, check: usize) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (&f, covers) in &self.flag_assignments {
            for c in covers {
                if c.check == check {
                    out.push((f, c.data.clone()));
                }
            }
        }
        out
    }

    /// Flag that couples data qubit `q` to `check`, if flags are assigned.
    pub fn flag_for(&self, check: usize, q: usize) -> Option<usize> {
        self.flag_assignments.iter().find_map(|(&f, covers)| {
            covers
                .iter()
                .any(|c| c.check == check && c.data.contains(&q))
                .then_some(f)
        })
    }

    /// Basis of the checks a flag serves (all its checks share one basis).
    pub fn flag_basis(&self, flag: usize) -> Basis {
        let covers = &self.flag_assignments[&flag];
        self.code.check(covers[0].check).basis
    }

    /// The two-qubit interactions syndrome extraction needs, independent of proxy routing.
    /// Pairs are `(data, parity)` without flags, else `(data, flag)` and `(flag, parity)`.
    pub fn links(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for check in &self.code.checks {
            let flags = self.flags_of_check(check.id);
            if flags.is_empty() {
                for &q in &check.support {
                    out.insert(edge(q, self.parity_of(check.id)));
                }
            } else {
                for (f, data) in flags {
                    out.insert(edge(f, self.parity_of(check.id)));
                    for q in data {
                        out.insert(edge(q, f));
                    }
                }
            }
        }
        out
    }

    /// Shortest path from `a` to `b` whose interior vertices are all proxies.
    pub fn proxy_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if self.edges.contains(&edge(a, b)) {
            return Some(vec![a, b]);
        }
        let adj = self.neighbors();
        let mut prev = vec![usize::MAX; self.num_qubits()];
        let mut queue = VecDeque::new();
        prev[a] = a;
        queue.push_back(a);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if prev[w] != usize::MAX {
                    continue;
                }
                if w == b {
                    prev[w] = v;
                    let mut path = vec![b];
                    let mut cur = v;
                    while cur != a {
                        path.push(cur);
                        cur = prev[cur];
                    }
                    path.push(a);
                    path.reverse();
                    return Some(path);
                }
                if self.qubits[w].role == Role::Proxy {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> String {
        let file = LayoutFile {
            code: serde_json::from_str(&self.code.to_json()).expect("code json"),
            qubits: self.qubits.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            flag_assignments: self
                .flag_assignments
                .iter()
                .map(|(&flag, covers)| FlagRecord { flag, covers: covers.clone() })
                .collect(),
            proxy_chains: self
                .proxy_chains
                .iter()
                .map(|(&proxy, &host)| ProxyRecord { proxy, host })
                .collect(),
            degree_budget: self.degree_budget,
        };
        serde_json::to_string_pretty(&file).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<FpnLayout> {
        let file: LayoutFile =
            serde_json::from_str(text).map_err(|e| Error::json("layout file", e))?;
        let code = TannerCode::from_json(&file.code.to_string())?;
        let layout = FpnLayout {
            code,
            qubits: file.qubits,
            edges: file.edges.iter().map(|e| edge(e[0], e[1])).collect(),
            flag_assignments: file
                .flag_assignments
                .into_iter()
                .map(|r| (r.flag, r.covers))
                .collect(),
            proxy_chains: file
                .proxy_chains
                .into_iter()
                .map(|r| (r.proxy, r.host))
                .collect(),
            degree_budget: file.degree_budget,
        };
        layout.check_consistency()?;
        Ok(layout)
    }

    fn check_consistency(&self) -> Result<()> {
        let nq = self.num_qubits();
        for (i, q) in self.qubits.iter().enumerate() {
            if q.id != i {
                return Err(Error::Layout(format!("qubit ids must be dense, found {} at {i}", q.id)));
            }
        }
        let n = self.code.n;
        let m = self.code.checks.len();
        if nq < n + m
            || self.qubits[..n].iter().any(|q| q.role != Role::Data)
            || self.qubits[n..n + m].iter().any(|q| q.role != Role::Parity)
        {
            return Err(Error::Layout(
                "data qubits must occupy ids 0..n and parity qubits the next n-k ids".into(),
            ));
        }
        for &(a, b) in &self.edges {
            if a == b || b >= nq {
                return Err(Error::Layout(format!("bad edge ({a}, {b})")));
            }
        }
        for (&f, covers) in &self.flag_assignments {
            if f >= nq || self.qubits[f].role != Role::Flag || covers.is_empty() {
                return Err(Error::Layout(format!("flag assignment on non-flag qubit {f}")));
            }
            let basis = self.code.checks.get(covers[0].check).map(|c| c.basis);
            for c in covers {
                let check = self
                    .code
                    .checks
                    .get(c.check)
                    .ok_or_else(|| Error::Layout(format!("flag {f} names unknown check {}", c.check)))?;
                if Some(check.basis) != basis {
                    return Err(Error::Layout(format!("flag {f} serves checks of both bases")));
                }
                if c.data.iter().any(|q| !check.support.contains(q)) {
                    return Err(Error::Layout(format!(
                        "flag {f} covers a qubit outside check {}",
                        c.check
                    )));
                }
            }
        }
        for link in self.links() {
            if self.proxy_path(link.0, link.1).is_none() {
                return Err(Error::Layout(format!(
                    "no proxy-only path between qubits {} and {}",
                    link.0, link.1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagRecord {
    flag: usize,
    covers: Vec<FlagCover>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProxyRecord {
    proxy: usize,
    host: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    code: serde_json::Value,
    qubits: Vec<PhysicalQubit>,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    flag_assignments: Vec<FlagRecord>,
    #[serde(default)]
    proxy_chains: Vec<ProxyRecord>,
    degree_budget: Option<usize>,
}

/// Bipartite data–parity graph with one parity qubit per check.
pub fn build_naive_layout(code: &TannerCode) -> FpnLayout {
    let n = code.n;
    let mut qubits: Vec<PhysicalQubit> = (0..n)
        .map(|i| PhysicalQubit { id: i, role: Role::Data, source: Some(i) })
        .collect();
    let mut edges = BTreeSet::new();
    for check in &code.checks {
        let p = n + check.id;
        qubits.push(PhysicalQubit { id: p, role: Role::Parity, source: Some(check.id) });
        for &q in &check.support {
            edges.insert(edge(q, p));
        }
    }
    FpnLayout {
        code: code.clone(),
        qubits,
        edges,
        flag_assignments: BTreeMap::new(),
        proxy_chains: BTreeMap::new(),
        degree_budget: None,
    }
}

fn consecutive_pairs(qs: &[usize]) -> Vec<Vec<usize>> {
    qs.chunks(2).map(<[usize]>::to_vec).collect()
}

/// Rebuilds flag qubits and edges from a list of flag groups, each a set of covers.
fn rebuild_with_flags(base: &FpnLayout, groups: Vec<Vec<FlagCover>>) -> FpnLayout {
    let code = &base.code;
    let n = code.n;
    let mut qubits: Vec<PhysicalQubit> = base.qubits[..n + code.checks.len()].to_vec();
    let mut edges = BTreeSet::new();
    let mut flag_assignments = BTreeMap::new();
    for covers in groups {
        let f = qubits.len();
        qubits.push(PhysicalQubit { id: f, role: Role::Flag, source: Some(covers[0].check) });
        for c in &covers {
            edges.insert(edge(f, n + c.check));
            for &q in &c.data {
                edges.insert(edge(q, f));
            }
        }
        flag_assignments.insert(f, covers);
    }
    FpnLayout {
        code: code.clone(),
        qubits,
        edges,
        flag_assignments,
        proxy_chains: BTreeMap::new(),
        degree_budget: base.degree_budget,
    }
}

/// Replaces every check's data–parity edges by ⌈δ/2⌉ flags, each coupling two consecutive
/// support qubits (the last one a single qubit when δ is odd).
pub fn assign_flags(layout: &FpnLayout) -> FpnLayout {
    let groups = layout
        .code
        .checks
        .iter()
        .flat_map(|check| {
            consecutive_pairs(&check.support)
                .into_iter()
                .map(move |data| vec![FlagCover { check: check.id, data }])
        })
        .collect();
    rebuild_with_flags(layout, groups)
}

/// Common same-basis checks of each data-qubit pair, keeping only bases with at least two.
fn shareable_checks(code: &TannerCode) -> BTreeMap<(usize, usize), Vec<usize>> {
    let by_qubit = code.checks_by_qubit();
    let mut out = BTreeMap::new();
    for a in 0..code.n {
        for b in a + 1..code.n {
            let common: Vec<usize> = by_qubit[a]
                .iter()
                .filter(|c| by_qubit[b].contains(c))
                .copied()
                .collect();
            let mut keep = Vec::new();
            for basis in [Basis::X, Basis::Z] {
                let same: Vec<usize> = common
                    .iter()
                    .copied()
                    .filter(|&c| code.check(c).basis == basis)
                    .collect();
                if same.len() >= 2 {
                    keep.extend(same);
                }
            }
            if !keep.is_empty() {
                out.insert((a, b), keep);
            }
        }
    }
    out
}

/// Total weight of the sharing matching, exposed for exactness tests.
pub fn sharing_candidates(code: &TannerCode) -> Vec<(usize, usize, i64)> {
    shareable_checks(code)
        .into_iter()
        .map(|((a, b), cs)| (a, b, cs.len() as i64))
        .collect()
}

/// Pairs data qubits by maximum-weight matching on their shared-check counts and merges the
/// matched pairs' flags into one flag per basis. A flag carries one Pauli type, so only checks
/// of the same basis can share it.
pub fn share_flags(layout: &FpnLayout) -> FpnLayout {
    let code = &layout.code;
    let shareable = shareable_checks(code);
    let edges: Vec<(usize, usize, i64)> = shareable
        .iter()
        .map(|(&(a, b), cs)| (a, b, cs.len() as i64))
        .collect();
    let mate = max_weight_matching(code.n, &edges, false);
    // Fixed pairs per check, and the shared groups in deterministic order.
    let mut fixed: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut groups: Vec<Vec<FlagCover>> = Vec::new();
    for a in 0..code.n {
        let Some(b) = mate[a] else { continue };
        if b < a {
            continue;
        }
        let checks = &shareable[&(a, b)];
        for basis in [Basis::X, Basis::Z] {
            let same: Vec<usize> = checks
                .iter()
                .copied()
                .filter(|&c| code.check(c).basis == basis)
                .collect();
            if same.len() < 2 {
                continue;
            }
            for &c in &same {
                fixed.entry(c).or_default().push((a, b));
            }
            groups.push(
                same.iter()
                    .map(|&c| FlagCover { check: c, data: vec![a, b] })
                    .collect(),
            );
        }
    }
    for check in &code.checks {
        let taken: BTreeSet<usize> = fixed
            .get(&check.id)
            .into_iter()
            .flatten()
            .flat_map(|&(a, b)| [a, b])
            .collect();
        let rest: Vec<usize> = check
            .support
            .iter()
            .copied()
            .filter(|q| !taken.contains(q))
            .collect();
        for data in consecutive_pairs(&rest) {
            groups.push(vec![FlagCover { check: check.id, data }]);
        }
    }
    // Order flags by (first check, data) so ids are stable and readable.
    groups.sort_by(|x, y| (x[0].check, &x[0].data).cmp(&(y[0].check, &y[0].data)));
    rebuild_with_flags(layout, groups)
}

/// Splits every vertex of degree above `max_degree` by moving the lower-id half of its
/// neighbors to a fresh proxy, until all degrees fit.
pub fn insert_proxies(layout: &FpnLayout, max_degree: usize) -> Result<FpnLayout> {
    if max_degree < 3 {
        return Err(Error::Layout(format!(
            "degree budget {max_degree} is below 3, too small for a proxy"
        )));
    }
    let mut out = layout.clone();
    out.degree_budget = Some(max_degree);
    loop {
        let adj = out.neighbors();
        let Some(v) = (0..adj.len()).find(|&v| adj[v].len() > max_degree) else {
            break;
        };
        let x = out.qubits.len();
        out.qubits.push(PhysicalQubit { id: x, role: Role::Proxy, source: Some(v) });
        let moved = adj[v].len().div_ceil(2);
        for &u in &adj[v][..moved] {
            out.edges.remove(&edge(u, v));
            out.edges.insert(edge(u, x));
        }
        out.edges.insert(edge(v, x));
        out.proxy_chains.insert(x, v);
    }
    Ok(out)
}

/// The full construction: flags, optional sharing, then proxies under `max_degree`.
pub fn build_fpn(code: &TannerCode, max_degree: usize, flag_sharing: bool) -> Result<FpnLayout> {
    let naive = build_naive_layout(code);
    let flagged = assign_flags(&naive);
    let flagged = if flag_sharing { share_flags(&flagged) } else { flagged };
    insert_proxies(&flagged, max_degree)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutMetrics {
    #[serde(serialize_with = "ser_ratio")]
    pub effective_rate: Ratio<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub ideal_rate: Ratio<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub mean_degree: Ratio<i64>,
    pub max_degree: usize,
    pub total_qubits: usize,
    pub edges: usize,
    pub data: usize,
    pub parity: usize,
    pub flag: usize,
    pub proxy: usize,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

pub fn layout_metrics(layout: &FpnLayout) -> LayoutMetrics {
    let total = layout.num_qubits();
    let count = |r: Role| layout.qubits_with_role(r).count();
    let degrees = layout.degrees();
    let k = layout.code.k as i64;
    LayoutMetrics {
        effective_rate: Ratio::new(k, total.max(1) as i64),
        ideal_rate: Ratio::new(k, layout.code.n.max(1) as i64),
        mean_degree: Ratio::new(2 * layout.edges.len() as i64, total.max(1) as i64),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        total_qubits: total,
        edges: layout.edges.len(),
        data: count(Role::Data),
        parity: count(Role::Parity),
        flag: count(Role::Flag),
        proxy: count(Role::Proxy),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{gen_rotated_surface, gen_triangular_color};

    #[test]
    fn naive_rotated_degrees() {
        let l = build_naive_layout(&gen_rotated_surface(3).unwrap());
        let m = layout_metrics(&l);
        assert_eq!(m.total_qubits, 17);
        assert_eq!(m.mean_degree, Ratio::new(48, 17));
    }

    #[test]
    fn flag_counts_follow_weights() {
        let code = gen_rotated_surface(3).unwrap();
        let l = assign_flags(&build_naive_layout(&code));
        let expected: usize = code.checks.iter().map(|c| c.weight().div_ceil(2)).sum();
        assert_eq!(l.qubits_with_role(Role::Flag).count(), expected);
        for check in &code.checks {
            for &q in &check.support {
                assert!(l.flag_for(check.id, q).is_some());
            }
        }
    }

    #[test]
    fn sharing_reduces_color_flags() {
        let code = gen_triangular_color(3).unwrap();
        let flagged = assign_flags(&build_naive_layout(&code));
        let shared = share_flags(&flagged);
        assert!(
            shared.qubits_with_role(Role::Flag).count() < flagged.qubits_with_role(Role::Flag).count()
        );
        for check in &code.checks {
            assert_eq!(shared.flags_of_check(check.id).len(), check.weight().div_ceil(2));
        }
    }

    #[test]
    fn proxies_respect_budget_and_paths() {
        let code = gen_triangular_color(5).unwrap();
        let l = build_fpn(&code, 4, true).unwrap();
        assert!(layout_metrics(&l).max_degree <= 4);
        for (a, b) in l.links() {
            assert!(l.proxy_path(a, b).is_some());
        }
        assert!(insert_proxies(&l, 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let l = build_fpn(&gen_triangular_color(3).unwrap(), 3, true).unwrap();
        let back = FpnLayout::from_json(&l.to_json()).unwrap();
        assert_eq!(back, l);
    }
}
