//! Samples shots from a flagged rotated-surface circuit, writes them in the shot-file format,
//! reads them back and decodes with flagged MWPM, with and without renormalized probabilities.

use fpn::circuit::build_memory_circuit;
use fpn::code::{generate, Basis};
use fpn::decode::{DecoderOptions, FlaggedMwpm};
use fpn::dem::{extract_hypergraph, Renorm};
use fpn::layout::build_fpn;
use fpn::schedule::schedule_layout;
use fpn::sim::{ber_from_batch, decode_batch, sample, SyndromeBatch};

fn main() -> fpn::Result<()> {
    let layout = build_fpn(&generate("rotated:3")?, 4, true)?;
    let schedule = schedule_layout(&layout)?;
    let circuit = build_memory_circuit(&layout, &schedule, 3, Basis::X, 2e-3)?;
    let batch = sample(&circuit, 20_000, 42);
    let bytes = batch.to_bytes();
    let back = SyndromeBatch::from_bytes(&bytes)?;
    println!(
        "{} shots, {} bytes, {} detector clicks, {} flag clicks",
        back.trials,
        bytes.len(),
        back.detectors.count_ones(),
        back.flags.count_ones()
    );
    let hg = extract_hypergraph(&circuit)?;
    for renorm in [Renorm::Paper, Renorm::Off] {
        let decoder = FlaggedMwpm::new(&hg, DecoderOptions { use_flags: true, renorm });
        let r = ber_from_batch(&back, &decode_batch(&back, &decoder));
        println!("renorm {renorm:?}: BER {:.2e} +/- {:.1e} ({} failures)", r.ber, r.stderr, r.failures);
    }
    Ok(())
}
