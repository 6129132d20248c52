//! Effective-distance certificates by exhaustive fault enumeration.
//!
//! Faults are propagated with the forward frame simulator, independent of the hypergraph the
//! decoder was built from.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::NoisyCircuit;
use crate::decode::Decoder;
use crate::error::{Error, Result};
use crate::sim::{inject_faults, with_thread_cap, Signature};

pub const MAX_LOCATIONS_W1: usize = 5000;
pub const MAX_PAIRS_W2: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub channel: usize,
    pub outcome: usize,
    /// Instruction index of the channel, for reading the witness against the circuit text.
    pub instr: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub w: usize,
    pub pass: bool,
    /// Distinct fault combinations decoded.
    pub combinations: u64,
    pub failures: u64,
    /// True when w = 2 pairs were sampled rather than enumerated.
    pub sampled: bool,
    pub witness: Option<Vec<Fault>>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("certificate", e))
    }
}

fn corrects(decoder: &dyn Decoder, s: &Signature) -> bool {
    let r = decoder.decode(&s.detectors, &s.flags);
    !r.failed && (0..s.observables.len()).all(|o| r.frames.len() > o && r.frames.get(o) == s.observables.get(o))
}

fn xor(a: &Signature, b: &Signature) -> Signature {
    let mut s = a.clone();
    s.detectors.xor_with(&b.detectors);
    s.flags.xor_with(&b.flags);
    s.observables.xor_with(&b.observables);
    s
}

/// Checks every combination of up to `w` (1 or 2) elementary faults. For `w = 2`, when the
/// number of pairs exceeds `pair_budget`, that many pairs are sampled with `seed` instead.
pub fn certify_effective_distance(
    circuit: &NoisyCircuit,
    decoder: &dyn Decoder,
    w: usize,
    pair_budget: Option<usize>,
    seed: u64,
) -> Result<Certificate> {
    if !(1..=2).contains(&w) {
        return Err(Error::Unsupported(format!("certificates support w = 1 or 2, got {w}")));
    }
    let channels = circuit.channels();
    if channels.len() > MAX_LOCATIONS_W1 {
        return Err(Error::CostGuard(format!(
            "{} fault locations exceed the limit of {MAX_LOCATIONS_W1}",
            channels.len()
        )));
    }
    let faults: Vec<Fault> = channels
        .iter()
        .enumerate()
        .flat_map(|(c, ch)| {
            ch.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(move |(o, _)| Fault {
                channel: c,
                outcome: o + 1,
                instr: ch.instr,
            })
        })
        .collect();
    let sets: Vec<Vec<(usize, usize)>> = faults.iter().map(|f| vec![(f.channel, f.outcome)]).collect();
    let sigs = inject_faults(circuit, &sets);

    // Faults with equal signatures decode identically; keep one source per signature plus
    // the set of channels that produce it.
    let mut unique: BTreeMap<&Signature, Vec<usize>> = BTreeMap::new();
    for (i, s) in sigs.iter().enumerate() {
        unique.entry(s).or_default().push(i);
    }
    let unique: Vec<(&Signature, Vec<usize>)> = unique.into_iter().collect();

    let singles: Vec<bool> = with_thread_cap(|| unique.par_iter().map(|(s, _)| corrects(decoder, s)).collect());
    if w == 1 {
        let failing: Vec<usize> = (0..unique.len()).filter(|&i| !singles[i]).collect();
        return Ok(Certificate {
            w,
            pass: failing.is_empty(),
            combinations: unique.len() as u64,
            failures: failing.iter().map(|&i| unique[i].1.len() as u64).sum(),
            sampled: false,
            witness: failing.first().map(|&i| vec![faults[unique[i].1[0]]]),
        });
    }

    let n = unique.len();
    let total = n * (n - 1) / 2;
    let budget = pair_budget.unwrap_or(MAX_PAIRS_W2);
    let sampled = total > budget;
    if sampled && pair_budget.is_none() {
        return Err(Error::CostGuard(format!("{total} fault pairs exceed {MAX_PAIRS_W2}; pass a pair budget")));
    }
    // Row-major index into the strict upper triangle.
    let row_start: Vec<usize> = (0..n).scan(0, |acc, i| {
        let start = *acc;
        *acc += n - 1 - i;
        Some(start)
    }).collect();
    let pair_at = |k: usize| {
        let i = row_start.partition_point(|&s| s <= k) - 1;
        (i, i + 1 + k - row_start[i])
    };
    let picks: Vec<usize> = if sampled {
        // Uniform draws with replacement; duplicates are dropped.
        let mut rng = crate::rng::trial_rng(seed, 0);
        let mut v: Vec<usize> =
            (0..budget).map(|_| ((crate::rng::unit(&mut rng) * total as f64) as usize).min(total - 1)).collect();
        v.sort_unstable();
        v.dedup();
        v
    } else {
        (0..total).collect()
    };
    // A pair is physical when its two faults can sit on different channels.
    let distinct = |a: &[usize], b: &[usize]| {
        a.iter().any(|&x| b.iter().any(|&y| faults[x].channel != faults[y].channel))
    };
    let results: Vec<Option<(usize, usize)>> = with_thread_cap(|| {
        picks
            .par_iter()
            .map(|&k| {
                let (i, j) = pair_at(k);
                if !distinct(&unique[i].1, &unique[j].1) {
                    return None;
                }
                (!corrects(decoder, &xor(unique[i].0, unique[j].0))).then_some((i, j))
            })
            .collect()
    });
    let failing: Vec<(usize, usize)> = results.into_iter().flatten().collect();
    let single_fail = (0..n).find(|&i| !singles[i]);
    let witness = match (single_fail, failing.first()) {
        (Some(i), _) => Some(vec![faults[unique[i].1[0]]]),
        (None, Some(&(i, j))) => {
            let (a, b) = unique[i]
                .1
                .iter()
                .flat_map(|&x| unique[j].1.iter().map(move |&y| (x, y)))
                .find(|&(x, y)| faults[x].channel != faults[y].channel)
                .expect("pair was checked to be physical");
            Some(vec![faults[a], faults[b]])
        }
        (None, None) => None,
    };
    Ok(Certificate {
        w,
        pass: witness.is_none(),
        combinations: (n + picks.len()) as u64,
        failures: failing.len() as u64 + singles.iter().filter(|&&ok| !ok).count() as u64,
        sampled,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{generate, Basis};
    use crate::decode::{DecoderOptions, FlaggedMwpm};
    use crate::dem::{extract_hypergraph, Renorm};
    use crate::layout::build_naive_layout;
    use crate::schedule::schedule_layout;

    fn rotated3(rounds: usize, p: f64) -> NoisyCircuit {
        let layout = build_naive_layout(&generate("rotated:3").unwrap());
        let s = schedule_layout(&layout).unwrap();
        crate::circuit::build_memory_circuit(&layout, &s, rounds, Basis::Z, p).unwrap()
    }

    fn mwpm(c: &NoisyCircuit) -> FlaggedMwpm {
        let hg = extract_hypergraph(c).unwrap();
        FlaggedMwpm::new(&hg, DecoderOptions { use_flags: true, renorm: Renorm::Off })
    }

    #[test]
    fn rotated_single_faults_are_corrected() {
        let c = rotated3(1, 1e-3);
        let cert = certify_effective_distance(&c, &mwpm(&c), 1, None, 0).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(cert.combinations > 0 && cert.witness.is_none());
        assert_eq!(Certificate::from_json(&cert.to_json()).unwrap(), cert);
    }

    #[test]
    fn distance_three_fails_some_pair() {
        let c = rotated3(1, 1e-3);
        let cert = certify_effective_distance(&c, &mwpm(&c), 2, Some(20_000), 7).unwrap();
        assert!(!cert.pass);
        let w = cert.witness.unwrap();
        assert_eq!(w.len(), 2);
        assert_ne!(w[0].channel, w[1].channel);
    }

    #[test]
    fn noiseless_circuit_certifies_trivially() {
        let c = rotated3(1, 0.0);
        let cert = certify_effective_distance(&c, &mwpm(&c), 1, None, 0).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.combinations, 0);
    }

    #[test]
    fn unsupported_weight() {
        let c = rotated3(1, 1e-3);
        assert!(matches!(certify_effective_distance(&c, &mwpm(&c), 3, None, 0), Err(Error::Unsupported(_))));
    }
}
