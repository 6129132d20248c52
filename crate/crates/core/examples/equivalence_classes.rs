//! Three equivalence classes over four detectors, decoded under three flag patterns. Each
//! hyperedge flips its own observable, so the frames name the chosen events.

use fpn::bits::BitSet;
use fpn::circuit::{CheckInfo, DetectorCoord, FlagCoord};
use fpn::code::Basis;
use fpn::decode::{DecoderOptions, FlaggedMwpm, MlOracle};
use fpn::dem::{DecodingHypergraph, Hyperedge};

fn main() -> fpn::Result<()> {
    let names = ["e1", "e1'", "e2", "e3", "e3'"];
    let e = |sigma: &[usize], flags: &[usize], obs: usize| Hyperedge {
        sigma: sigma.to_vec(),
        flags: flags.to_vec(),
        prob: 0.01,
        frames: vec![obs],
    };
    let hg = DecodingHypergraph::from_parts(
        Basis::Z,
        (0..4).map(|id| CheckInfo { id, basis: Basis::Z, color: None }).collect(),
        (0..4).map(|check| DetectorCoord { check, round: 1 }).collect(),
        (1..=3).map(|qubit| FlagCoord { qubit, round: 1 }).collect(),
        5,
        0.01,
        [
            e(&[0, 1, 2], &[], 0),
            e(&[0, 1, 2], &[0, 1, 2], 1),
            e(&[1, 2, 3], &[], 2),
            e(&[0, 3], &[0], 3),
            e(&[0, 3], &[1, 2], 4),
        ],
    );
    let oracle = MlOracle::new(&hg, 4, DecoderOptions::default())?;
    let mwpm = FlaggedMwpm::new(&hg, DecoderOptions::default());
    let show = |r: fpn::decode::CorrectionResult| {
        if r.failed {
            "no correction".to_string()
        } else {
            r.frames.ones().map(|o| names[o]).collect::<Vec<_>>().join(" + ")
        }
    };
    for (syndrome, flags) in [(vec![0, 3], vec![]), (vec![0, 3], vec![0]), (vec![0, 1, 2], vec![1, 2])] {
        let f = BitSet::from_indices(3, flags.iter().copied());
        let reps: Vec<&str> = hg
            .representatives(&f, Default::default())
            .iter()
            .map(|r| r.map_or("-", |(h, _)| names[h]))
            .collect();
        println!(
            "syndrome {syndrome:?} flags {flags:?}: representatives {reps:?}; oracle {}, mwpm {}",
            show(oracle.decode_projected(&syndrome, &f)),
            show(mwpm.decode_projected(&syndrome, &f))
        );
    }
    Ok(())
}
