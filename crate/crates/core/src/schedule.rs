//! Syndrome-extraction CNOT scheduling: a greedy per-check exact search, its extension to
//! flag-proxy layouts, an independent verifier and the round-latency model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::code::{Basis, Check, TannerCode};
use crate::error::{Error, Result};
use crate::layout::FpnLayout;

/// Opposite-basis check sharing qubits with the one being solved. `other[i]` is the fixed
/// time of the other check on support position `positions[i]`.
#[derive(Clone, Debug, Default)]
pub struct ParityConstraint {
    pub other_check: usize,
    pub positions: Vec<usize>,
    pub other: Vec<u32>,
    /// Crossings already decided elsewhere that count toward the parity.
    pub offset: u32,
}

/// Constraints on one check imposed by the checks scheduled before it.
#[derive(Clone, Debug, Default)]
pub struct FixedConstraints {
    /// Times each support position must avoid.
    pub forbidden: Vec<BTreeSet<u32>>,
    /// Times a support position must take (shared flag with an already scheduled check).
    pub equal: Vec<Option<u32>>,
    pub parity: Vec<ParityConstraint>,
    /// Inclusive domain for positions without an equality constraint.
    pub lo: u32,
    pub hi: u32,
}

impl FixedConstraints {
    pub fn unconstrained(weight: usize, hi: u32) -> Self {
        FixedConstraints {
            forbidden: vec![BTreeSet::new(); weight],
            equal: vec![None; weight],
            parity: Vec::new(),
            lo: 1,
            hi,
        }
    }
}

struct Search<'a> {
    basis: Basis,
    fixed: &'a FixedConstraints,
    cur: Vec<u32>,
    best: Option<(u32, Vec<u32>)>,
    lower: u32,
}

impl Search<'_> {
    /// Even number of common qubits where the X check acts first.
    fn parity_ok(&self) -> bool {
        self.fixed.parity.iter().all(|pc| {
            let x_first = pc
                .positions
                .iter()
                .zip(&pc.other)
                .filter(|(&pos, &o)| match self.basis {
                    Basis::Z => o < self.cur[pos],
                    Basis::X => self.cur[pos] < o,
                })
                .count();
            (x_first as u32 + pc.offset).is_multiple_of(2)
        })
    }

    fn dfs(&mut self, pos: usize, cur_max: u32) -> bool {
        if pos == self.cur.len() {
            if self.parity_ok() {
                self.best = Some((cur_max, self.cur.clone()));
                return cur_max <= self.lower;
            }
            return false;
        }
        let limit = match &self.best {
            Some((b, _)) => b.saturating_sub(1).min(self.fixed.hi),
            None => self.fixed.hi,
        };
        let candidates: Vec<u32> = match self.fixed.equal[pos] {
            Some(v) => vec![v],
            None => (self.fixed.lo..=limit).collect(),
        };
        for v in candidates {
            if let Some((b, _)) = &self.best {
                if v >= *b {
                    break;
                }
            }
            if self.fixed.forbidden[pos].contains(&v) || self.cur[..pos].contains(&v) {
                continue;
            }
            self.cur[pos] = v;
            if self.dfs(pos + 1, cur_max.max(v)) {
                return true;
            }
        }
        false
    }
}

/// Exact minimum-`t_max` assignment of CNOT times to the support of `check`.
///
/// Values are tried in ascending order along the support, so among optimal assignments the
/// lexicographically smallest is returned.
pub fn solve_check(check: &Check, fixed: &FixedConstraints) -> Result<Vec<u32>> {
    let w = check.weight();
    let forced_max = fixed.equal.iter().flatten().copied().max().unwrap_or(0);
    let mut s = Search {
        basis: check.basis,
        fixed,
        cur: vec![0; w],
        best: None,
        lower: (fixed.lo + w as u32).saturating_sub(1).max(forced_max),
    };
    s.dfs(0, 0);
    s.best.map(|(_, t)| t).ok_or_else(|| {
        Error::Infeasible(format!(
            "check {} has no assignment in [{}, {}]",
            check.id, fixed.lo, fixed.hi
        ))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnotSchedule {
    /// `(check, data qubit) → t`.
    pub times: BTreeMap<(usize, usize), u32>,
    pub t_max: u32,
    /// Order in which checks were scheduled.
    pub order: Vec<usize>,
    /// Physical CNOT layers as `(control, target)` pairs.
    pub layers: Vec<Vec<(usize, usize)>>,
}

impl CnotSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn time(&self, check: usize, q: usize) -> Option<u32> {
        self.times.get(&(check, q)).copied()
    }

    pub fn to_json(&self, timing: &TimingModel) -> String {
        let file = ScheduleFile {
            times: self.times.iter().map(|(&(c, q), &t)| [c, q, t as usize]).collect(),
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|&(a, b)| [a, b]).collect())
                .collect(),
            depth: self.depth(),
            t_max: self.t_max,
            order: self.order.clone(),
            latency_ns: round_latency(self, timing),
        };
        serde_json::to_string_pretty(&file).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<CnotSchedule> {
        let file: ScheduleFile =
            serde_json::from_str(text).map_err(|e| Error::json("schedule file", e))?;
        if file.depth != file.layers.len() {
            return Err(Error::Parse {
                context: "schedule file".into(),
                message: format!("depth {} but {} layers", file.depth, file.layers.len()),
            });
        }
        Ok(CnotSchedule {
            times: file
                .times
                .iter()
                .map(|t| ((t[0], t[1]), t[2] as u32))
                .collect(),
            t_max: file.t_max,
            order: file.order,
            layers: file
                .layers
                .iter()
                .map(|l| l.iter().map(|p| (p[0], p[1])).collect())
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    times: Vec<[usize; 3]>,
    layers: Vec<Vec<[usize; 2]>>,
    depth: usize,
    t_max: u32,
    order: Vec<usize>,
    latency_ns: u64,
}

/// Z checks first, then X checks, each in ascending id.
pub fn check_order(code: &TannerCode) -> Vec<usize> {
    let mut order: Vec<usize> = code.checks_of(Basis::Z).map(|c| c.id).collect();
    order.extend(code.checks_of(Basis::X).map(|c| c.id));
    order
}

/// Greedy scheduling of every check in [`check_order`]. `shared(k1, k2, q)` reports whether
/// checks `k1` and `k2` couple to `q` through one shared flag, which forces equal times.
fn schedule_times(
    code: &TannerCode,
    shared: &dyn Fn(usize, usize, usize) -> bool,
) -> Result<(BTreeMap<(usize, usize), u32>, Vec<usize>)> {
    greedy_pass(code, shared, false).or_else(|_| greedy_pass(code, shared, true))
}

/// One greedy pass. With `separated`, X checks only use times after every Z time, which
/// satisfies all commutation parities and leaves only uniqueness and shared-flag equalities.
fn greedy_pass(
    code: &TannerCode,
    shared: &dyn Fn(usize, usize, usize) -> bool,
    separated: bool,
) -> Result<(BTreeMap<(usize, usize), u32>, Vec<usize>)> {
    let delta_max = code.checks.iter().map(Check::weight).max().unwrap_or(0) as u32;
    let by_qubit = code.checks_by_qubit();
    let order = check_order(code);
    let mut times: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut done = vec![false; code.checks.len()];
    for &cid in &order {
        let check = code.check(cid);
        let w = check.weight();
        let mut fixed = FixedConstraints::unconstrained(w, 2 * delta_max);
        let mut base = 0;
        if separated && check.basis == Basis::X {
            base = times.values().copied().max().unwrap_or(0);
            fixed.lo = base + 1;
            fixed.hi = base + 2 * delta_max;
        }
        let mut parity: BTreeMap<usize, ParityConstraint> = BTreeMap::new();
        for (pos, &q) in check.support.iter().enumerate() {
            for &other in &by_qubit[q] {
                if !done[other] {
                    continue;
                }
                let t = times[&(other, q)];
                let other_check = code.check(other);
                if other_check.basis == check.basis && shared(cid, other, q) {
                    fixed.equal[pos] = Some(t);
                } else {
                    fixed.forbidden[pos].insert(t);
                }
                if other_check.basis != check.basis {
                    let pc = parity.entry(other).or_insert_with(|| ParityConstraint {
                        other_check: other,
                        ..Default::default()
                    });
                    pc.positions.push(pos);
                    pc.other.push(t);
                }
            }
        }
        // An equality also forbids times used on that qubit by non-sharing checks.
        for (pos, eq) in fixed.equal.iter().enumerate() {
            if let Some(v) = eq {
                if fixed.forbidden[pos].contains(v) {
                    return Err(Error::Infeasible(format!(
                        "shared flag forces check {cid} onto an occupied time {v}"
                    )));
                }
            }
        }
        fixed.parity = parity.into_values().collect();
        // Lookahead: a later same-basis check bound to this one by shared flags inherits these
        // times, plus times from scheduled checks it shares other flags with. Its distinctness
        // and, where every common qubit is inherited, its commutation parity are decided now.
        for &later in &order {
            if done[later] || later == cid || code.check(later).basis != check.basis {
                continue;
            }
            let later_check = code.check(later);
            let mut inherited_free: BTreeMap<usize, usize> = BTreeMap::new();
            let mut inherited_fixed: BTreeMap<usize, u32> = BTreeMap::new();
            for &q in &later_check.support {
                if let Some(pos) = check.support.iter().position(|&s| s == q) {
                    if shared(cid, later, q) {
                        inherited_free.insert(q, pos);
                        continue;
                    }
                }
                if let Some(&d) = by_qubit[q]
                    .iter()
                    .find(|&&d| done[d] && code.check(d).basis == check.basis && shared(d, later, q))
                {
                    inherited_fixed.insert(q, times[&(d, q)]);
                }
            }
            if inherited_free.is_empty() {
                continue;
            }
            for &pos in inherited_free.values() {
                fixed.forbidden[pos].extend(inherited_fixed.values().copied());
            }
            for opp in code.checks_of(check.basis.other()) {
                if !done[opp.id] {
                    continue;
                }
                let common: Vec<usize> = later_check
                    .support
                    .iter()
                    .copied()
                    .filter(|q| opp.support.contains(q))
                    .collect();
                let decided = common
                    .iter()
                    .all(|q| inherited_free.contains_key(q) || inherited_fixed.contains_key(q));
                if common.iter().all(|q| !inherited_free.contains_key(q)) || !decided {
                    continue;
                }
                let mut pc = ParityConstraint { other_check: opp.id, ..Default::default() };
                for &q in &common {
                    let o = times[&(opp.id, q)];
                    match inherited_free.get(&q) {
                        Some(&pos) => {
                            pc.positions.push(pos);
                            pc.other.push(o);
                        }
                        None => {
                            let t = inherited_fixed[&q];
                            let x_first = match check.basis {
                                Basis::Z => o < t,
                                Basis::X => t < o,
                            };
                            pc.offset += x_first as u32;
                        }
                    }
                }
                fixed.parity.push(pc);
            }
        }
        let solved = solve_check(check, &fixed)
            .or_else(|_| {
                fixed.hi = base + 2 * delta_max + w as u32;
                solve_check(check, &fixed)
            })
            .or_else(|_| {
                // Everything up to a trailing window after all scheduled times. Free positions
                // placed in the window avoid every uniqueness conflict.
                let gmax = times.values().copied().max().unwrap_or(0);
                fixed.lo = fixed.lo.min(gmax + 1);
                fixed.hi = gmax + w as u32;
                solve_check(check, &fixed)
            })?;
        for (&q, t) in check.support.iter().zip(solved) {
            times.insert((cid, q), t);
        }
        done[cid] = true;
    }
    Ok((times, order))
}

fn t_max_of(times: &BTreeMap<(usize, usize), u32>) -> u32 {
    times.values().copied().max().unwrap_or(0)
}

/// Schedules the abstract code: one parity qubit per check, direct data–parity CNOTs.
pub fn schedule_code(code: &TannerCode) -> Result<CnotSchedule> {
    let (times, order) = schedule_times(code, &|_, _, _| false)?;
    let mut s = CnotSchedule { t_max: t_max_of(&times), times, order, layers: Vec::new() };
    let naive = crate::layout::build_naive_layout(code);
    s.layers = physical_layers(&naive, &s)?;
    Ok(s)
}

/// Schedules a layout: shared flags bind their checks' data times, then physical layers are
/// built on the layout graph.
pub fn schedule_layout(layout: &FpnLayout) -> Result<CnotSchedule> {
    let shared = |k1: usize, k2: usize, q: usize| -> bool {
        match (layout.flag_for(k1, q), layout.flag_for(k2, q)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    };
    let (times, order) = schedule_times(&layout.code, &shared)?;
    let base = CnotSchedule { t_max: t_max_of(&times), times, order, layers: Vec::new() };
    schedule_fpn(layout, &base)
}

/// Expands `base` into physical layers on `layout`. Fails if a shared flag would need two
/// different data times, or a required interaction has no proxy-only route.
pub fn schedule_fpn(layout: &FpnLayout, base: &CnotSchedule) -> Result<CnotSchedule> {
    for (&f, covers) in &layout.flag_assignments {
        for pair in covers.windows(2) {
            for &q in &pair[0].data {
                if base.time(pair[0].check, q) != base.time(pair[1].check, q) {
                    return Err(Error::Layout(format!(
                        "shared flag {f} needs equal times for checks {} and {} on qubit {q}",
                        pair[0].check, pair[1].check
                    )));
                }
            }
        }
    }
    let mut s = base.clone();
    s.layers = physical_layers(layout, base)?;
    Ok(s)
}

/// Physical CNOTs realizing CNOT(c → t) along a proxy-only path. Proxies start and end in
/// |0⟩: each hop copies the control into the proxy, recurses, then uncopies.
pub fn expand_cnot(layout: &FpnLayout, control: usize, target: usize) -> Result<Vec<(usize, usize)>> {
    let path = layout.proxy_path(control, target).ok_or_else(|| {
        Error::Layout(format!("no proxy-only path from {control} to {target}"))
    })?;
    fn rec(path: &[usize], out: &mut Vec<(usize, usize)>) {
        if path.len() == 2 {
            out.push((path[0], path[1]));
        } else {
            out.push((path[0], path[1]));
            rec(&path[1..], out);
            out.push((path[0], path[1]));
        }
    }
    let mut out = Vec::new();
    rec(&path, &mut out);
    Ok(out)
}

/// As-soon-as-possible layering that keeps each qubit's gate order.
fn asap(num_qubits: usize, gates: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut next = vec![0usize; num_qubits];
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for &(a, b) in gates {
        let l = next[a].max(next[b]);
        if layers.len() <= l {
            layers.resize(l + 1, Vec::new());
        }
        layers[l].push((a, b));
        next[a] = l + 1;
        next[b] = l + 1;
    }
    layers
}

/// Flag–parity CNOT for one (flag, check) coupling, oriented by the check basis.
fn flag_parity_cnot(basis: Basis, flag: usize, parity: usize) -> (usize, usize) {
    match basis {
        Basis::Z => (flag, parity),
        Basis::X => (parity, flag),
    }
}

fn data_cnot(basis: Basis, data: usize, ancilla: usize) -> (usize, usize) {
    match basis {
        Basis::Z => (data, ancilla),
        Basis::X => (ancilla, data),
    }
}

/// Flag init block, data window (one slot per base time), flag out block.
fn physical_layers(layout: &FpnLayout, base: &CnotSchedule) -> Result<Vec<Vec<(usize, usize)>>> {
    let code = &layout.code;
    let nq = layout.num_qubits();
    let mut flag_links = Vec::new();
    for check in &code.checks {
        for (f, _) in layout.flags_of_check(check.id) {
            flag_links.push(flag_parity_cnot(check.basis, f, layout.parity_of(check.id)));
        }
    }
    let mut block = Vec::new();
    for &(c, t) in &flag_links {
        block.extend(expand_cnot(layout, c, t)?);
    }
    let init = asap(nq, &block);

    let mut by_time: BTreeMap<u32, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (&(cid, q), &t) in &base.times {
        let check = code.check(cid);
        let anc = layout.flag_for(cid, q).unwrap_or_else(|| layout.parity_of(cid));
        // A shared flag's single CNOT serves all its checks.
        by_time.entry(t).or_default().insert(data_cnot(check.basis, q, anc));
    }
    let mut window = Vec::new();
    for gates in by_time.values() {
        let mut seq = Vec::new();
        for &(c, t) in gates {
            seq.extend(expand_cnot(layout, c, t)?);
        }
        window.extend(asap(nq, &seq));
    }

    let out = init.clone();
    let mut layers = init;
    layers.extend(window);
    layers.extend(out);
    Ok(layers)
}

/// Gate latencies in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingModel {
    pub one_qubit_ns: u64,
    pub two_qubit_ns: u64,
    pub measure_ns: u64,
    pub reset_ns: u64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel { one_qubit_ns: 30, two_qubit_ns: 40, measure_ns: 800, reset_ns: 30 }
    }
}

/// Two Hadamard layers, the CNOT layers, then measurement and reset.
pub fn round_latency(schedule: &CnotSchedule, timing: &TimingModel) -> u64 {
    2 * timing.one_qubit_ns
        + timing.two_qubit_ns * schedule.depth() as u64
        + timing.measure_ns
        + timing.reset_ns
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleViolation {
    MissingTime { check: usize, qubit: usize },
    OutOfBounds { check: usize, qubit: usize, t: u32, bound: u32 },
    DoubleBooked { qubit: usize, t: u32, checks: (usize, usize) },
    Commutation { x_check: usize, z_check: usize },
    LayerConflict { layer: usize, qubit: usize },
    NotAnEdge { layer: usize, a: usize, b: usize },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::MissingTime { check, qubit } => {
                write!(f, "check {check} has no time for qubit {qubit}")
            }
            ScheduleViolation::OutOfBounds { check, qubit, t, bound } => {
                write!(f, "check {check} qubit {qubit} at t={t} outside [1, {bound}]")
            }
            ScheduleViolation::DoubleBooked { qubit, t, checks } => write!(
                f,
                "uniqueness: qubit {qubit} used by checks {} and {} at t={t}",
                checks.0, checks.1
            ),
            ScheduleViolation::Commutation { x_check, z_check } => write!(
                f,
                "commutation: X check {x_check} and Z check {z_check} cross an odd number of times"
            ),
            ScheduleViolation::LayerConflict { layer, qubit } => {
                write!(f, "layer {layer} uses qubit {qubit} twice")
            }
            ScheduleViolation::NotAnEdge { layer, a, b } => {
                write!(f, "layer {layer} has CNOT ({a}, {b}) off the layout graph")
            }
        }
    }
}

/// Re-derives the uniqueness, bound and commutation constraints from the code and checks the
/// time table against them.
pub fn verify_schedule(schedule: &CnotSchedule, code: &TannerCode) -> Vec<ScheduleViolation> {
    let bound = 2 * code.checks.iter().map(Check::weight).max().unwrap_or(0) as u32;
    verify_times(schedule, code, &|_, _, _| false, bound)
}

fn verify_times(
    schedule: &CnotSchedule,
    code: &TannerCode,
    shared: &dyn Fn(usize, usize, usize) -> bool,
    bound: u32,
) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    for check in &code.checks {
        for &q in &check.support {
            match schedule.time(check.id, q) {
                None => out.push(ScheduleViolation::MissingTime { check: check.id, qubit: q }),
                Some(t) if t < 1 || t > bound => out.push(ScheduleViolation::OutOfBounds {
                    check: check.id,
                    qubit: q,
                    t,
                    bound,
                }),
                _ => {}
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    // Uniqueness on data qubits.
    for (q, checks) in code.checks_by_qubit().iter().enumerate() {
        for (i, &a) in checks.iter().enumerate() {
            for &b in &checks[i + 1..] {
                let (ta, tb) = (schedule.time(a, q).unwrap(), schedule.time(b, q).unwrap());
                if ta == tb && !shared(a, b, q) {
                    out.push(ScheduleViolation::DoubleBooked { qubit: q, t: ta, checks: (a, b) });
                }
            }
        }
    }
    // Uniqueness on each check's own ancilla.
    for check in &code.checks {
        let mut seen = BTreeMap::new();
        for &q in &check.support {
            let t = schedule.time(check.id, q).unwrap();
            if let Some(&prev) = seen.get(&t) {
                out.push(ScheduleViolation::DoubleBooked {
                    qubit: prev,
                    t,
                    checks: (check.id, check.id),
                });
            }
            seen.insert(t, q);
        }
    }
    for x in code.checks_of(Basis::X) {
        for z in code.checks_of(Basis::Z) {
            let comm: Vec<usize> = x.support.iter().copied().filter(|q| z.support.contains(q)).collect();
            if comm.is_empty() {
                continue;
            }
            let positive = comm
                .iter()
                .map(|&q| schedule.time(x.id, q).unwrap() as i64 - schedule.time(z.id, q).unwrap() as i64)
                .try_fold(1i64, |acc, d| if d == 0 { None } else { Some(acc * d.signum()) });
            if positive != Some(1) {
                out.push(ScheduleViolation::Commutation { x_check: x.id, z_check: z.id });
            }
        }
    }
    out
}

/// Verifies the time table against the layout's shared flags and the physical layers against
/// the layout graph. Times may exceed 2δ_max here: shared-flag equalities can force the
/// separated fallback, which places X checks after all Z checks.
pub fn verify_fpn_schedule(schedule: &CnotSchedule, layout: &FpnLayout) -> Vec<ScheduleViolation> {
    let shared = |k1: usize, k2: usize, q: usize| -> bool {
        matches!((layout.flag_for(k1, q), layout.flag_for(k2, q)), (Some(a), Some(b)) if a == b)
    };
    let mut out = verify_times(schedule, &layout.code, &shared, u32::MAX);
    for (i, layer) in schedule.layers.iter().enumerate() {
        let mut used = BTreeSet::new();
        for &(a, b) in layer {
            for q in [a, b] {
                if !used.insert(q) {
                    out.push(ScheduleViolation::LayerConflict { layer: i, qubit: q });
                }
            }
            if !layout.edges.contains(&(a.min(b), a.max(b))) {
                out.push(ScheduleViolation::NotAnEdge { layer: i, a, b });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::gen_rotated_surface;

    fn check(basis: Basis, support: Vec<usize>) -> Check {
        Check { id: 0, basis, support, color: None }
    }

    #[test]
    fn isolated_check() {
        let c = check(Basis::Z, vec![0, 1, 2, 3]);
        let t = solve_check(&c, &FixedConstraints::unconstrained(4, 8)).unwrap();
        assert_eq!(t, vec![1, 2, 3, 4]);
    }

    #[test]
    fn forbidden_time_is_avoided() {
        let c = check(Basis::Z, vec![0, 1]);
        let mut f = FixedConstraints::unconstrained(2, 4);
        f.forbidden[0].insert(1);
        let t = solve_check(&c, &f).unwrap();
        assert_ne!(t[0], 1);
        assert_eq!(t.iter().max(), Some(&2));
    }

    #[test]
    fn parity_forces_even_crossing() {
        let c = check(Basis::Z, vec![0, 1]);
        let mut f = FixedConstraints::unconstrained(2, 4);
        f.forbidden[0].insert(1);
        f.forbidden[1].insert(2);
        f.parity.push(ParityConstraint { other_check: 1, positions: vec![0, 1], other: vec![1, 2], offset: 0 });
        let t = solve_check(&c, &f).unwrap();
        let x_first = (1 < t[0]) as u32 + (2 < t[1]) as u32;
        assert_eq!(x_first % 2, 0);
    }

    #[test]
    fn rotated_schedule_is_valid() {
        let code = gen_rotated_surface(3).unwrap();
        let s = schedule_code(&code).unwrap();
        assert!(verify_schedule(&s, &code).is_empty());
        assert!(s.depth() <= 8);
    }

    #[test]
    fn verifier_catches_double_booking() {
        let code = gen_rotated_surface(3).unwrap();
        let mut s = schedule_code(&code).unwrap();
        let (&(c, q), _) = s.times.iter().next().unwrap();
        let other = code.checks_by_qubit()[q].iter().copied().find(|&o| o != c).unwrap();
        let t = s.times[&(c, q)];
        s.times.insert((other, q), t);
        let v = verify_schedule(&s, &code);
        assert!(v.iter().any(|v| matches!(v, ScheduleViolation::DoubleBooked { .. })));
    }

    #[test]
    fn proxy_expansion_is_three_cnots() {
        let code = gen_rotated_surface(3).unwrap();
        let l = crate::layout::insert_proxies(&crate::layout::build_naive_layout(&code), 3).unwrap();
        let (&x, &host) = l.proxy_chains.iter().next().unwrap();
        let moved = l.neighbors()[x].iter().copied().find(|&u| u != host).unwrap();
        let seq = expand_cnot(&l, moved, host).unwrap();
        assert_eq!(seq, vec![(moved, x), (x, host), (moved, x)]);
    }
}
