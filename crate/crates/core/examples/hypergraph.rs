//! Extracts the decoding hypergraph of a flagged color-code circuit and summarizes its
//! classes, flag hyperedges and predicted detector marginals.

use fpn::circuit::build_memory_circuit;
use fpn::code::{generate, Basis};
use fpn::dem::extract_hypergraph;
use fpn::layout::build_fpn;
use fpn::schedule::schedule_layout;

fn main() -> fpn::Result<()> {
    let layout = build_fpn(&generate("color:3")?, 4, true)?;
    let schedule = schedule_layout(&layout)?;
    let circuit = build_memory_circuit(&layout, &schedule, 3, Basis::Z, 1e-3)?;
    let hg = extract_hypergraph(&circuit)?;
    let flagged = hg.hyperedges.iter().filter(|e| e.is_flag()).count();
    let mixed = hg
        .classes
        .iter()
        .filter(|c| c.members.iter().any(|&m| hg.hyperedges[m].is_flag()) && c.members.len() > 1)
        .count();
    println!(
        "{} channels, {} detectors, {} flag bits, {} hyperedges ({flagged} flagged), {} classes ({mixed} mix flag patterns)",
        circuit.num_channels(),
        hg.detectors.len(),
        hg.flag_bits.len(),
        hg.hyperedges.len(),
        hg.classes.len()
    );
    println!("indistinguishable pairs: {}", hg.ambiguous_pairs().len());
    let m = hg.detector_marginals();
    let mean = m.iter().sum::<f64>() / m.len() as f64;
    println!("mean detector marginal {mean:.3e}");
    if let Some(c) = hg.classes.iter().filter(|c| !c.sigma.is_empty()).max_by_key(|c| c.members.len()) {
        println!("largest class sigma={:?}, {} members, first few:", c.sigma, c.members.len());
        for &i in c.members.iter().take(6) {
            let e = &hg.hyperedges[i];
            println!("  flags={:?} prob={:.2e} frames={:?}", e.flags, e.prob, e.frames);
        }
    }
    Ok(())
}
