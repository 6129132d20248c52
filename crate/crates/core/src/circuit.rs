//! Noisy memory-experiment circuits: lowering a layout and schedule into Clifford instructions
//! with Pauli noise, detectors, flag bits and observables, plus a line-oriented text format.

use std::fmt::Write as _;

use crate::code::{Basis, Color};
use crate::error::{Error, Result};
use crate::layout::{FpnLayout, Role};
use crate::schedule::{round_latency, CnotSchedule, TimingModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwirlProbabilities {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

/// Pauli-twirled amplitude and phase damping over an idle of `t` ns.
pub fn twirl_probs(t: f64, t1: f64, t2: f64) -> Result<TwirlProbabilities> {
    if !(t1 > 0.0 && t2 > 0.0) || !(t >= 0.0) {
        return Err(Error::Validation(format!(
            "twirl needs t >= 0 and positive T1, T2 (got t={t}, T1={t1}, T2={t2})"
        )));
    }
    // expm1 keeps full relative precision for t much smaller than T1.
    let a = -(-t / t1).exp_m1();
    let b = -(-t / t2).exp_m1();
    let p_xy = a / 4.0;
    Ok(TwirlProbabilities { p_x: p_xy, p_y: p_xy, p_z: (2.0 * b - a) / 4.0 })
}

/// T1 in ns for physical error rate `p`: (1/p) µs.
pub fn t1_for(p: f64) -> f64 {
    1e3 / p
}

/// Coordinates of one detector: the check it belongs to and the round, 1-based. The round
/// after the last is reconstructed from the final data measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct DetectorCoord {
    pub check: usize,
    pub round: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct FlagCoord {
    pub qubit: usize,
    pub round: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CheckInfo {
    pub id: usize,
    pub basis: Basis,
    pub color: Option<Color>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Reset(Vec<usize>),
    H(Vec<usize>),
    Cx(Vec<(usize, usize)>),
    /// Z-basis measurement; each qubit appends one record.
    Measure(Vec<usize>),
    Pauli1 { px: f64, py: f64, pz: f64, qubits: Vec<usize> },
    /// Outcome `i` (1..16) applies Pauli `i / 4` to the first qubit and `i % 4` to the second,
    /// with 0 = I, 1 = X, 2 = Y, 3 = Z.
    Pauli2 { probs: [f64; 15], pairs: Vec<(usize, usize)> },
    Detector { coord: DetectorCoord, recs: Vec<usize> },
    Observable { index: usize, recs: Vec<usize> },
    FlagBit { coord: FlagCoord, rec: usize },
    Tick,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyCircuit {
    pub num_qubits: usize,
    pub rounds: usize,
    pub basis: Basis,
    pub p: f64,
    pub latency_ns: u64,
    pub checks: Vec<CheckInfo>,
    pub instrs: Vec<Instr>,
}

impl NoisyCircuit {
    pub fn num_measurements(&self) -> usize {
        self.instrs
            .iter()
            .map(|i| if let Instr::Measure(q) = i { q.len() } else { 0 })
            .sum()
    }

    pub fn detectors(&self) -> Vec<DetectorCoord> {
        self.instrs
            .iter()
            .filter_map(|i| if let Instr::Detector { coord, .. } = i { Some(*coord) } else { None })
            .collect()
    }

    pub fn flag_bits(&self) -> Vec<FlagCoord> {
        self.instrs
            .iter()
            .filter_map(|i| if let Instr::FlagBit { coord, .. } = i { Some(*coord) } else { None })
            .collect()
    }

    pub fn num_observables(&self) -> usize {
        self.instrs
            .iter()
            .filter_map(|i| if let Instr::Observable { index, .. } = i { Some(index + 1) } else { None })
            .max()
            .unwrap_or(0)
    }

    /// Number of independent noise channels (one per qubit or pair of a noise instruction).
    pub fn num_channels(&self) -> usize {
        self.instrs
            .iter()
            .map(|i| match i {
                Instr::Pauli1 { qubits, .. } => qubits.len(),
                Instr::Pauli2 { pairs, .. } => pairs.len(),
                _ => 0,
            })
            .sum()
    }

    /// Same circuit with every noise instruction removed.
    pub fn without_noise(&self) -> NoisyCircuit {
        let mut c = self.clone();
        c.instrs.retain(|i| !matches!(i, Instr::Pauli1 { .. } | Instr::Pauli2 { .. }));
        c.p = 0.0;
        c
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let basis = match self.basis {
            Basis::X => "x",
            Basis::Z => "z",
        };
        writeln!(
            s,
            "META qubits={} rounds={} basis={basis} p={} latency_ns={}",
            self.num_qubits, self.rounds, self.p, self.latency_ns
        )
        .unwrap();
        for c in &self.checks {
            let color = c.color.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
            writeln!(s, "CHECK {} {} {color}", c.id, c.basis).unwrap();
        }
        let join = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        let pairs = |v: &[(usize, usize)]| {
            v.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(" ")
        };
        for ins in &self.instrs {
            match ins {
                Instr::Reset(q) => writeln!(s, "R {}", join(q)),
                Instr::H(q) => writeln!(s, "H {}", join(q)),
                Instr::Cx(p) => writeln!(s, "CX {}", pairs(p)),
                Instr::Measure(q) => writeln!(s, "M {}", join(q)),
                Instr::Pauli1 { px, py, pz, qubits } => {
                    writeln!(s, "PAULI1 {px} {py} {pz} {}", join(qubits))
                }
                Instr::Pauli2 { probs, pairs: p } => {
                    let ps = probs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                    writeln!(s, "PAULI2 {ps} {}", pairs(p))
                }
                Instr::Detector { coord, recs } => {
                    writeln!(s, "DETECTOR {} {} {}", coord.check, coord.round, join(recs))
                }
                Instr::Observable { index, recs } => writeln!(s, "OBSERVABLE {index} {}", join(recs)),
                Instr::FlagBit { coord, rec } => {
                    writeln!(s, "FLAG_BIT {} {} {rec}", coord.qubit, coord.round)
                }
                Instr::Tick => writeln!(s, "TICK"),
            }
            .unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<NoisyCircuit> {
        let mut circuit = NoisyCircuit {
            num_qubits: 0,
            rounds: 0,
            basis: Basis::Z,
            p: 0.0,
            latency_ns: 0,
            checks: Vec::new(),
            instrs: Vec::new(),
        };
        let mut saw_meta = false;
        for (lineno, line) in text.lines().enumerate() {
            let ctx = || format!("circuit line {}", lineno + 1);
            let err = |m: String| Error::Parse { context: ctx(), message: m };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let op = parts.next().unwrap();
            let args: Vec<&str> = parts.collect();
            let ints = |a: &[&str]| -> Result<Vec<usize>> {
                a.iter()
                    .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad integer `{t}`"))))
                    .collect()
            };
            let floats = |a: &[&str]| -> Result<Vec<f64>> {
                a.iter()
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
                    .collect()
            };
            let pairs = |v: Vec<usize>| -> Result<Vec<(usize, usize)>> {
                if !v.len().is_multiple_of(2) {
                    return Err(err("odd number of qubit targets for a two-qubit op".into()));
                }
                Ok(v.chunks(2).map(|c| (c[0], c[1])).collect())
            };
            match op {
                "META" => {
                    for a in &args {
                        let (k, v) = a
                            .split_once('=')
                            .ok_or_else(|| err(format!("META field `{a}` is not key=value")))?;
                        let bad = || err(format!("bad META value `{a}`"));
                        match k {
                            "qubits" => circuit.num_qubits = v.parse().map_err(|_| bad())?,
                            "rounds" => circuit.rounds = v.parse().map_err(|_| bad())?,
                            "basis" => {
                                circuit.basis = match v {
                                    "x" => Basis::X,
                                    "z" => Basis::Z,
                                    _ => return Err(bad()),
                                }
                            }
                            "p" => circuit.p = v.parse().map_err(|_| bad())?,
                            "latency_ns" => circuit.latency_ns = v.parse().map_err(|_| bad())?,
                            _ => return Err(err(format!("unknown META field `{k}`"))),
                        }
                    }
                    saw_meta = true;
                }
                "CHECK" => {
                    if args.len() != 3 {
                        return Err(err("CHECK takes id, basis, color".into()));
                    }
                    let basis = match args[1] {
                        "X" => Basis::X,
                        "Z" => Basis::Z,
                        b => return Err(err(format!("bad basis `{b}`"))),
                    };
                    let color = match args[2] {
                        "R" => Some(Color::R),
                        "G" => Some(Color::G),
                        "B" => Some(Color::B),
                        "-" => None,
                        c => return Err(err(format!("bad color `{c}`"))),
                    };
                    circuit.checks.push(CheckInfo { id: ints(&args[..1])?[0], basis, color });
                }
                "R" => circuit.instrs.push(Instr::Reset(ints(&args)?)),
                "H" => circuit.instrs.push(Instr::H(ints(&args)?)),
                "M" => circuit.instrs.push(Instr::Measure(ints(&args)?)),
                "CX" => circuit.instrs.push(Instr::Cx(pairs(ints(&args)?)?)),
                "TICK" => circuit.instrs.push(Instr::Tick),
                "PAULI1" => {
                    if args.len() < 3 {
                        return Err(err("PAULI1 needs three probabilities".into()));
                    }
                    let p = floats(&args[..3])?;
                    circuit.instrs.push(Instr::Pauli1 {
                        px: p[0],
                        py: p[1],
                        pz: p[2],
                        qubits: ints(&args[3..])?,
                    });
                }
                "PAULI2" => {
                    if args.len() < 15 {
                        return Err(err("PAULI2 needs fifteen probabilities".into()));
                    }
                    let p = floats(&args[..15])?;
                    let mut probs = [0.0; 15];
                    probs.copy_from_slice(&p);
                    circuit.instrs.push(Instr::Pauli2 { probs, pairs: pairs(ints(&args[15..])?)? });
                }
                "DETECTOR" => {
                    let v = ints(&args)?;
                    if v.len() < 2 {
                        return Err(err("DETECTOR needs check and round".into()));
                    }
                    circuit.instrs.push(Instr::Detector {
                        coord: DetectorCoord { check: v[0], round: v[1] },
                        recs: v[2..].to_vec(),
                    });
                }
                "OBSERVABLE" => {
                    let v = ints(&args)?;
                    if v.is_empty() {
                        return Err(err("OBSERVABLE needs an index".into()));
                    }
                    circuit.instrs.push(Instr::Observable { index: v[0], recs: v[1..].to_vec() });
                }
                "FLAG_BIT" => {
                    let v = ints(&args)?;
                    if v.len() != 3 {
                        return Err(err("FLAG_BIT takes qubit, round, record".into()));
                    }
                    circuit.instrs.push(Instr::FlagBit {
                        coord: FlagCoord { qubit: v[0], round: v[1] },
                        rec: v[2],
                    });
                }
                _ => return Err(err(format!("unknown instruction `{op}`"))),
            }
        }
        if !saw_meta {
            return Err(Error::Parse { context: "circuit".into(), message: "missing META line".into() });
        }
        circuit.validate()?;
        Ok(circuit)
    }

    /// Structural checks: qubit and record ranges, probability ranges.
    pub fn validate(&self) -> Result<()> {
        let mut nrec = 0;
        let bad = |m: String| Err(Error::Circuit(m));
        for ins in &self.instrs {
            let qs: Vec<usize> = match ins {
                Instr::Reset(q) | Instr::H(q) | Instr::Measure(q) => q.clone(),
                Instr::Pauli1 { qubits, .. } => qubits.clone(),
                Instr::Cx(p) | Instr::Pauli2 { pairs: p, .. } => {
                    if p.iter().any(|(a, b)| a == b) {
                        return bad("two-qubit op on a single qubit".into());
                    }
                    p.iter().flat_map(|&(a, b)| [a, b]).collect()
                }
                _ => Vec::new(),
            };
            if let Some(q) = qs.iter().find(|&&q| q >= self.num_qubits) {
                return bad(format!("qubit {q} out of range"));
            }
            match ins {
                Instr::Measure(q) => nrec += q.len(),
                Instr::Pauli1 { px, py, pz, .. } => {
                    let ps = [*px, *py, *pz];
                    if ps.iter().any(|p| !(0.0..=1.0).contains(p)) || ps.iter().sum::<f64>() > 1.0 + 1e-12 {
                        return bad("PAULI1 probabilities out of range".into());
                    }
                }
                Instr::Pauli2 { probs, .. } => {
                    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || probs.iter().sum::<f64>() > 1.0 + 1e-12 {
                        return bad("PAULI2 probabilities out of range".into());
                    }
                }
                Instr::Detector { recs, .. } | Instr::Observable { recs, .. } => {
                    if recs.iter().any(|&r| r >= nrec) {
                        return bad("annotation refers to a future measurement".into());
                    }
                }
                Instr::FlagBit { rec, .. }
                    if *rec >= nrec => {
                        return bad("flag bit refers to a future measurement".into());
                    }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One independent noise location: a qubit of a PAULI1 or a pair of a PAULI2.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub instr: usize,
    pub qubits: Vec<usize>,
    /// Outcome probabilities; outcome `i + 1` has probability `probs[i]`.
    pub probs: Vec<f64>,
}

/// Pauli (x, z) bits of outcome `o` on the qubit at `slot` of a channel with `arity` qubits.
pub fn outcome_pauli(arity: usize, o: usize, slot: usize) -> (bool, bool) {
    let code = if arity == 1 { o } else if slot == 0 { o / 4 } else { o % 4 };
    (code == 1 || code == 2, code == 2 || code == 3)
}

impl NoisyCircuit {
    /// Noise channels in circuit order; the position is the channel index.
    pub fn channels(&self) -> Vec<Channel> {
        let mut out = Vec::new();
        for (i, ins) in self.instrs.iter().enumerate() {
            match ins {
                Instr::Pauli1 { px, py, pz, qubits } => {
                    for &q in qubits {
                        out.push(Channel { instr: i, qubits: vec![q], probs: vec![*px, *py, *pz] });
                    }
                }
                Instr::Pauli2 { probs, pairs } => {
                    for &(a, b) in pairs {
                        out.push(Channel { instr: i, qubits: vec![a, b], probs: probs.to_vec() });
                    }
                }
                _ => {}
            }
        }
        out
    }
}

fn depolarize1(p: f64, qubits: Vec<usize>) -> Option<Instr> {
    (p > 0.0 && !qubits.is_empty()).then(|| Instr::Pauli1 { px: p / 3.0, py: p / 3.0, pz: p / 3.0, qubits })
}

fn x_flip(p: f64, qubits: Vec<usize>) -> Option<Instr> {
    (p > 0.0 && !qubits.is_empty()).then_some(Instr::Pauli1 { px: p, py: 0.0, pz: 0.0, qubits })
}

/// Lowers `layout` + `schedule` into a memory experiment in `basis` over `rounds` rounds at
/// physical error rate `p`.
pub fn build_memory_circuit(
    layout: &FpnLayout,
    schedule: &CnotSchedule,
    rounds: usize,
    basis: Basis,
    p: f64,
) -> Result<NoisyCircuit> {
    if rounds < 1 {
        return Err(Error::Validation("a memory experiment needs at least one round".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!("p = {p} is not a probability")));
    }
    let code = &layout.code;
    let nq = layout.num_qubits();
    for layer in &schedule.layers {
        for &(a, b) in layer {
            if a >= nq || b >= nq || !layout.edges.contains(&(a.min(b), a.max(b))) {
                return Err(Error::Circuit(format!(
                    "schedule CNOT ({a}, {b}) is not an edge of the layout"
                )));
            }
        }
    }
    let latency = round_latency(schedule, &TimingModel::default());
    let twirl = if p > 0.0 {
        let t1 = t1_for(p);
        Some(twirl_probs(latency as f64, t1, 0.5 * t1)?)
    } else {
        None
    };

    let data: Vec<usize> = layout.qubits_with_role(Role::Data).collect();
    let parity: Vec<usize> = code.checks.iter().map(|c| layout.parity_of(c.id)).collect();
    let flags: Vec<usize> = layout.qubits_with_role(Role::Flag).collect();
    let ancillas: Vec<usize> = (code.n..nq).collect();
    let all: Vec<usize> = (0..nq).collect();
    // Ancillas prepared in |+⟩ and measured in the X basis.
    let mut h_set: Vec<usize> = code
        .checks_of(Basis::X)
        .map(|c| layout.parity_of(c.id))
        .chain(flags.iter().copied().filter(|&f| layout.flag_basis(f) == Basis::Z))
        .collect();
    h_set.sort_unstable();
    let measured: Vec<usize> = parity.iter().chain(&flags).copied().collect();

    let mut ins = Vec::new();
    let push = |ins: &mut Vec<Instr>, i: Option<Instr>| {
        if let Some(i) = i {
            ins.push(i);
        }
    };
    let mut nrec = 0usize;

    ins.push(Instr::Reset(data.clone()));
    push(&mut ins, x_flip(0.1 * p, data.clone()));
    if basis == Basis::X {
        ins.push(Instr::H(data.clone()));
        push(&mut ins, depolarize1(0.1 * p, data.clone()));
    }
    ins.push(Instr::Tick);

    let mut prev_rec: Vec<usize> = Vec::new();
    for r in 1..=rounds {
        if !ancillas.is_empty() {
            ins.push(Instr::Reset(ancillas.clone()));
            push(&mut ins, x_flip(0.1 * p, ancillas.clone()));
        }
        if let Some(tw) = twirl {
            ins.push(Instr::Pauli1 { px: tw.p_x, py: tw.p_y, pz: tw.p_z, qubits: all.clone() });
        }
        ins.push(Instr::Tick);
        if !h_set.is_empty() {
            ins.push(Instr::H(h_set.clone()));
            push(&mut ins, depolarize1(0.1 * p, h_set.clone()));
            ins.push(Instr::Tick);
        }
        for layer in &schedule.layers {
            ins.push(Instr::Cx(layer.clone()));
            if p > 0.0 {
                ins.push(Instr::Pauli2 { probs: [p / 15.0; 15], pairs: layer.clone() });
                let mut busy = vec![false; nq];
                for &(a, b) in layer {
                    busy[a] = true;
                    busy[b] = true;
                }
                let idle: Vec<usize> = (0..nq).filter(|&q| !busy[q]).collect();
                push(&mut ins, depolarize1(0.1 * p, idle));
            }
            ins.push(Instr::Tick);
        }
        if !h_set.is_empty() {
            ins.push(Instr::H(h_set.clone()));
            push(&mut ins, depolarize1(0.1 * p, h_set.clone()));
            ins.push(Instr::Tick);
        }
        if measured.is_empty() {
            continue;
        }
        push(&mut ins, x_flip(p, measured.clone()));
        ins.push(Instr::Measure(measured.clone()));
        let base = nrec;
        nrec += measured.len();
        for (i, &f) in flags.iter().enumerate() {
            ins.push(Instr::FlagBit {
                coord: FlagCoord { qubit: f, round: r },
                rec: base + parity.len() + i,
            });
        }
        for (i, check) in code.checks.iter().enumerate() {
            let coord = DetectorCoord { check: check.id, round: r };
            if r == 1 {
                if check.basis == basis {
                    ins.push(Instr::Detector { coord, recs: vec![base + i] });
                }
            } else {
                ins.push(Instr::Detector { coord, recs: vec![prev_rec[i], base + i] });
            }
        }
        prev_rec = (base..base + parity.len()).collect();
        ins.push(Instr::Tick);
    }

    if basis == Basis::X {
        ins.push(Instr::H(data.clone()));
        push(&mut ins, depolarize1(0.1 * p, data.clone()));
    }
    push(&mut ins, x_flip(p, data.clone()));
    ins.push(Instr::Measure(data.clone()));
    let data_rec = |q: usize| nrec + q;
    for (i, check) in code.checks.iter().enumerate() {
        if check.basis != basis {
            continue;
        }
        let mut recs: Vec<usize> = check.support.iter().map(|&q| data_rec(q)).collect();
        if let Some(&last) = prev_rec.get(i) {
            recs.push(last);
        }
        recs.sort_unstable();
        ins.push(Instr::Detector { coord: DetectorCoord { check: check.id, round: rounds + 1 }, recs });
    }
    for l in code.logicals_of(basis) {
        ins.push(Instr::Observable {
            index: l.index,
            recs: l.support.iter().map(|&q| data_rec(q)).collect(),
        });
    }

    let circuit = NoisyCircuit {
        num_qubits: nq,
        rounds,
        basis,
        p,
        latency_ns: latency,
        checks: code
            .checks
            .iter()
            .map(|c| CheckInfo { id: c.id, basis: c.basis, color: c.color })
            .collect(),
        instrs: ins,
    };
    circuit.validate()?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twirl_limits() {
        let z = twirl_probs(0.0, 1e6, 5e5).unwrap();
        assert_eq!((z.p_x, z.p_y, z.p_z), (0.0, 0.0, 0.0));
        let inf = twirl_probs(f64::INFINITY, 1e6, 5e5).unwrap();
        assert_eq!((inf.p_x, inf.p_y, inf.p_z), (0.25, 0.25, 0.25));
        assert!(twirl_probs(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let code = crate::code::gen_rotated_surface(3).unwrap();
        let layout = crate::layout::build_naive_layout(&code);
        let s = crate::schedule::schedule_code(&code).unwrap();
        let c = build_memory_circuit(&layout, &s, 2, Basis::Z, 1e-3).unwrap();
        let back = NoisyCircuit::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert!(NoisyCircuit::from_text("META qubits=1\nFOO 1").is_err());
    }
}
