//! Paired logical error rates: flagged MWPM against the brute-force oracle on a small
//! circuit, and flagged Restriction with and without flag information on the color code.

use fpn::circuit::build_memory_circuit;
use fpn::code::{generate, Basis};
use fpn::decode::{DecoderOptions, FlaggedMwpm, FlaggedRestriction, MlOracle};
use fpn::dem::{extract_hypergraph, Renorm};
use fpn::layout::{build_fpn, build_naive_layout};
use fpn::schedule::schedule_layout;
use fpn::sim::estimate_ber_paired;

fn main() -> fpn::Result<()> {
    let trials = 100_000;
    let on = DecoderOptions { use_flags: true, renorm: Renorm::Off };
    let off = DecoderOptions { use_flags: false, renorm: Renorm::Off };

    let naive = build_naive_layout(&generate("rotated:3")?);
    let c = build_memory_circuit(&naive, &schedule_layout(&naive)?, 3, Basis::Z, 2e-3)?;
    let hg = extract_hypergraph(&c)?;
    let (m, o) = (FlaggedMwpm::new(&hg, on), MlOracle::new(&hg, 4, on)?);
    let r = estimate_ber_paired(&c, &[&m, &o], trials, 1);
    println!("rotated d=3: mwpm {} failures, oracle {} failures", r[0].failures, r[1].failures);

    let fpn = build_fpn(&generate("color:3")?, 4, true)?;
    let c = build_memory_circuit(&fpn, &schedule_layout(&fpn)?, 3, Basis::Z, 2e-3)?;
    let hg = extract_hypergraph(&c)?;
    let (with, without) = (FlaggedRestriction::new(&hg, on)?, FlaggedRestriction::new(&hg, off)?);
    let r = estimate_ber_paired(&c, &[&with, &without], trials, 2);
    println!("color d=3 FPN: flags used {} failures, flags ignored {} failures", r[0].failures, r[1].failures);
    Ok(())
}
