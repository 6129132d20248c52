use std::collections::BTreeSet;

use proptest::prelude::*;

use fpn::bits::{gf2_rank, BitSet};
use fpn::circuit::{build_memory_circuit, twirl_probs, CheckInfo, DetectorCoord, FlagCoord, NoisyCircuit};
use fpn::code::{generate, Basis};
use fpn::decode::{Decoder, DecoderOptions, FlaggedMwpm, FlaggedRestriction, MlOracle};
use fpn::dem::{extract_hypergraph, DecodingHypergraph, Hyperedge, Renorm};
use fpn::layout::{build_fpn, build_naive_layout};
use fpn::matching::mwpm_exact;
use fpn::schedule::schedule_layout;
use fpn::sim::{inject_faults, sample, SyndromeBatch};

/// Exhaustive minimum over all pairings, each vertex optionally sent to the boundary.
fn brute_force(w: &[Vec<f64>], b: Option<&[f64]>) -> Option<f64> {
    fn go(left: &mut Vec<usize>, w: &[Vec<f64>], b: Option<&[f64]>) -> Option<f64> {
        let Some(i) = left.pop() else { return Some(0.0) };
        let mut best: Option<f64> = None;
        let mut consider = |c: Option<f64>| {
            if let Some(c) = c {
                best = Some(best.map_or(c, |x: f64| x.min(c)));
            }
        };
        if let Some(b) = b {
            if b[i].is_finite() {
                consider(go(left, w, Some(b)).map(|r| r + b[i]));
            }
        }
        for k in 0..left.len() {
            let j = left[k];
            if !w[i][j].is_finite() {
                continue;
            }
            left.remove(k);
            consider(go(left, w, b).map(|r| r + w[i][j]));
            left.insert(k, j);
        }
        left.push(i);
        best
    }
    go(&mut (0..w.len()).collect(), w, b)
}

fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Option<Vec<f64>>)> {
    (1usize..=8, any::<bool>()).prop_flat_map(|(n, with_b)| {
        let cell = prop_oneof![9 => (0u32..50).prop_map(|x| x as f64), 1 => Just(f64::INFINITY)];
        (
            proptest::collection::vec(cell.clone(), n * n),
            proptest::collection::vec(cell, n),
            Just(n),
            Just(with_b),
        )
            .prop_map(|(flat, b, n, with_b)| {
                let mut w = vec![vec![f64::INFINITY; n]; n];
                for i in 0..n {
                    for j in i + 1..n {
                        w[i][j] = flat[i * n + j];
                        w[j][i] = flat[i * n + j];
                    }
                }
                (w, with_b.then_some(b))
            })
    })
}

fn circuit(spec: &str, degree: Option<usize>, rounds: usize, basis: Basis, p: f64) -> NoisyCircuit {
    let code = generate(spec).unwrap();
    let layout = match degree {
        None => build_naive_layout(&code),
        Some(d) => build_fpn(&code, d, true).unwrap(),
    };
    let s = schedule_layout(&layout).unwrap();
    build_memory_circuit(&layout, &s, rounds, basis, p).unwrap()
}

fn hyperedge() -> impl Strategy<Value = Hyperedge> {
    (
        proptest::collection::btree_set(0usize..6, 1..4),
        proptest::collection::btree_set(0usize..3, 0..3),
        1u32..100,
        proptest::collection::btree_set(0usize..2, 0..2),
    )
        .prop_map(|(s, f, p, o)| Hyperedge {
            sigma: s.into_iter().collect(),
            flags: f.into_iter().collect(),
            prob: p as f64 / 1000.0,
            frames: o.into_iter().collect(),
        })
}

fn small_hypergraph(edges: Vec<Hyperedge>) -> DecodingHypergraph {
    DecodingHypergraph::from_parts(
        Basis::Z,
        (0..6).map(|id| CheckInfo { id, basis: Basis::Z, color: None }).collect(),
        (0..6).map(|check| DetectorCoord { check, round: 1 }).collect(),
        (0..3).map(|qubit| FlagCoord { qubit, round: 1 }).collect(),
        2,
        1e-3,
        edges,
    )
}

/// XOR of the detector sets of the applied hyperedges.
fn applied_syndrome(hg: &DecodingHypergraph, applied: &[usize]) -> BTreeSet<usize> {
    let mut s = BTreeSet::new();
    for &h in applied {
        for &d in &hg.hyperedges[h].sigma {
            if !s.remove(&d) {
                s.insert(d);
            }
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matching_is_optimal((w, b) in instance()) {
        let exact = mwpm_exact(&w, b.as_deref());
        match brute_force(&w, b.as_deref()) {
            None => prop_assert!(exact.is_err()),
            Some(opt) => {
                let m = exact.unwrap();
                prop_assert_eq!(m.weight, opt);
                let mut seen = BTreeSet::new();
                for &(u, v) in &m.pairs {
                    prop_assert!(seen.insert(u));
                    if let Some(v) = v {
                        prop_assert!(seen.insert(v));
                    }
                }
                prop_assert_eq!(seen.len(), w.len());
            }
        }
    }

    #[test]
    fn twirl_stays_physical(t in 0.0f64..1e7, t1 in 1e3f64..1e6, ratio in 0.05f64..2.0) {
        let q = twirl_probs(t, t1, ratio * t1).unwrap();
        prop_assert!(q.p_x >= 0.0 && q.p_y >= 0.0 && q.p_z >= -1e-15);
        prop_assert!(q.p_x + q.p_y + q.p_z <= 0.75 + 1e-12);
    }

    #[test]
    fn twirl_grows_with_idle_time(u in 0.0f64..1.0, v in 0.0f64..1.0, t1 in 1e3f64..1e6) {
        // With T2 = T1 / 2, p_z rises only until t = T1 ln 4 and then relaxes towards 1/4;
        // the total keeps rising.
        let (a, b) = (u.min(v), u.max(v));
        let span = t1 * 4f64.ln();
        let (qa, qb) = (twirl_probs(a * span, t1, t1 / 2.0).unwrap(), twirl_probs(b * span, t1, t1 / 2.0).unwrap());
        prop_assert!(qa.p_x <= qb.p_x && qa.p_z <= qb.p_z + 1e-15);
        let (la, lb) = (twirl_probs(a * 20.0 * t1, t1, t1 / 2.0).unwrap(), twirl_probs(b * 20.0 * t1, t1, t1 / 2.0).unwrap());
        prop_assert!(la.p_x + la.p_y + la.p_z <= lb.p_x + lb.p_y + lb.p_z + 1e-15);
    }

    #[test]
    fn classes_partition(edges in proptest::collection::vec(hyperedge(), 0..20)) {
        let hg = small_hypergraph(edges);
        hg.validate().unwrap();
        let mut seen = vec![0usize; hg.hyperedges.len()];
        for (c, class) in hg.classes.iter().enumerate() {
            prop_assert_eq!(hg.class_of(&class.sigma), Some(c));
            for w in class.members.windows(2) {
                prop_assert!(hg.hyperedges[w[0]].prob >= hg.hyperedges[w[1]].prob);
            }
            for &m in &class.members {
                prop_assert_eq!(&hg.hyperedges[m].sigma, &class.sigma);
                seen[m] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
        prop_assert_eq!(DecodingHypergraph::from_json(&hg.to_json()).unwrap(), hg);
    }

    #[test]
    fn representative_is_flag_closest(edges in proptest::collection::vec(hyperedge(), 1..20), f in 0u8..8) {
        let hg = small_hypergraph(edges);
        let observed = BitSet::from_indices(3, (0..3).filter(|i| f >> i & 1 == 1));
        let fired: Vec<usize> = observed.ones().collect();
        for (c, class) in hg.classes.iter().enumerate() {
            let (m, _) = hg.select_representative(c, &observed, Renorm::Off);
            let dist = |e: usize| fpn::dem::sym_diff_len(&hg.hyperedges[e].flags, &fired);
            prop_assert!(class.members.iter().all(|&o| dist(m) <= dist(o)));
        }
    }

    #[test]
    fn rank_ignores_dependent_rows(rows in proptest::collection::vec(proptest::collection::btree_set(0usize..70, 0..10), 1..8), i in 0usize..8, j in 0usize..8) {
        let rows: Vec<BitSet> = rows.into_iter().map(|s| BitSet::from_indices(70, s)).collect();
        let r = gf2_rank(&rows);
        prop_assert!(r <= rows.len());
        let mut sum = rows[i % rows.len()].clone();
        sum.xor_with(&rows[j % rows.len()]);
        let mut more = rows.clone();
        more.push(sum);
        prop_assert_eq!(gf2_rank(&more), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fault_signatures_are_linear(a in 0usize..10_000, b in 0usize..10_000, oa in 1usize..16, ob in 1usize..16) {
        let c = circuit("rotated:3", Some(4), 1, Basis::Z, 1e-3);
        let chans = c.channels();
        let (ca, cb) = (a % chans.len(), b % chans.len());
        prop_assume!(ca != cb);
        let fa = (ca, 1 + (oa - 1) % chans[ca].probs.len());
        let fb = (cb, 1 + (ob - 1) % chans[cb].probs.len());
        let s = inject_faults(&c, &[vec![fa], vec![fb], vec![fa, fb]]);
        let mut x = s[0].clone();
        x.detectors.xor_with(&s[1].detectors);
        x.flags.xor_with(&s[1].flags);
        x.observables.xor_with(&s[1].observables);
        prop_assert_eq!(&x, &s[2]);
    }

    #[test]
    fn corrections_reproduce_the_syndrome(seed in any::<u64>()) {
        let c = circuit("rotated:3", Some(4), 2, Basis::Z, 5e-3);
        let hg = extract_hypergraph(&c).unwrap();
        let opts = DecoderOptions { use_flags: true, renorm: Renorm::Off };
        let m = FlaggedMwpm::new(&hg, opts);
        let batch = sample(&c, 64, seed);
        for t in 0..64 {
            let dets = batch.detectors.row(t);
            let r = m.decode(&dets, &batch.flags.row(t));
            prop_assert!(!r.failed);
            let proj = m.hypergraph();
            let want: BTreeSet<usize> = dets
                .ones()
                .filter_map(|d| proj.detectors.iter().position(|x| *x == hg.detectors[d]))
                .collect();
            prop_assert_eq!(applied_syndrome(proj, &r.applied), want);
        }
    }

    #[test]
    fn restriction_reproduces_the_check_syndrome(seed in any::<u64>()) {
        let c = circuit("color:3", Some(4), 1, Basis::Z, 3e-3);
        let hg = extract_hypergraph(&c).unwrap();
        let dec = FlaggedRestriction::new(&hg, DecoderOptions { use_flags: true, renorm: Renorm::Off }).unwrap();
        let batch = sample(&c, 64, seed);
        for t in 0..64 {
            let dets = batch.detectors.row(t);
            let r = dec.decode(&dets, &batch.flags.row(t));
            if r.failed {
                continue;
            }
            // Lifting works on check ids, so the correction matches the syndrome only after
            // time-like moves: compare the per-check parity.
            let proj = dec.hypergraph();
            let parity = |ds: &mut dyn Iterator<Item = usize>| {
                let mut s = BTreeSet::new();
                for c in ds {
                    if !s.remove(&c) {
                        s.insert(c);
                    }
                }
                s
            };
            let want = parity(&mut dets.ones().filter(|&d| hg.check_of_detector(d).basis == Basis::Z).map(|d| hg.detectors[d].check));
            let got = parity(&mut applied_syndrome(proj, &r.applied).into_iter().map(|d| proj.detectors[d].check));
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn oracle_is_at_least_as_likely_as_truth(picks in proptest::collection::btree_set(0usize..1000, 1..4)) {
        let c = circuit("rotated:3", None, 1, Basis::Z, 1e-3);
        let hg = extract_hypergraph(&c).unwrap();
        let opts = DecoderOptions { use_flags: true, renorm: Renorm::Off };
        let o = MlOracle::new(&hg, 4, opts).unwrap();
        let proj = o.hypergraph();
        let reps: Vec<usize> = proj.representatives(&BitSet::new(proj.flag_bits.len()), Renorm::Off)
            .into_iter()
            .flatten()
            .map(|(h, _)| h)
            .filter(|&h| !proj.hyperedges[h].sigma.is_empty())
            .collect();
        let truth: BTreeSet<usize> = picks.iter().map(|&i| reps[i % reps.len()]).collect();
        let syndrome = applied_syndrome(proj, &truth.iter().copied().collect::<Vec<_>>());
        let flipped: Vec<usize> = syndrome.into_iter().collect();
        let r = o.decode_projected(&flipped, &BitSet::new(proj.flag_bits.len()));
        prop_assert!(!r.failed);
        let logp = |s: &[usize]| s.iter().map(|&h| proj.hyperedges[h].prob.ln()).sum::<f64>();
        prop_assert_eq!(applied_syndrome(proj, &r.applied).into_iter().collect::<Vec<_>>(), flipped);
        prop_assert!(logp(&r.applied) >= logp(&truth.into_iter().collect::<Vec<_>>()) - 1e-9);
    }
}

#[test]
fn shot_files_round_trip() {
    let c = circuit("color:3", Some(4), 2, Basis::X, 1e-2);
    let batch = sample(&c, 130, 5);
    let back = SyndromeBatch::from_bytes(&batch.to_bytes()).unwrap();
    assert_eq!(back.detectors, batch.detectors);
    assert_eq!(back.flags, batch.flags);
    assert_eq!(back.observables, batch.observables);
    assert_eq!((back.trials, back.seed), (batch.trials, batch.seed));
    assert!(SyndromeBatch::from_bytes(b"garbage").is_err());
}
