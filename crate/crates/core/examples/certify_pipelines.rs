//! Single-fault certificates for the bundled pipelines, with and without flags and proxies.

use fpn::certify::certify_effective_distance;
use fpn::circuit::build_memory_circuit;
use fpn::code::{generate, Basis};
use fpn::decode::{Decoder, DecoderOptions, FlaggedMwpm, FlaggedRestriction};
use fpn::dem::extract_hypergraph;
use fpn::layout::{build_fpn, build_naive_layout};
use fpn::schedule::schedule_layout;

fn main() -> fpn::Result<()> {
    let renorm: fpn::dem::Renorm = std::env::args().nth(1).unwrap_or_else(|| "paper".into()).parse()?;
    let rounds = 3;
    let p = 1e-3;
    let cases: [(&str, Option<usize>, bool); 6] = [
        ("rotated:3", None, true),
        ("rotated:3", Some(4), true),
        ("rotated:3", Some(3), true),
        ("color:3", Some(4), true),
        ("color:3", Some(3), true),
        ("color:3", Some(4), false),
    ];
    for (spec, budget, flags) in cases {
        let code = generate(spec)?;
        let layout = match budget {
            None => build_naive_layout(&code),
            Some(delta) => build_fpn(&code, delta, true)?,
        };
        let schedule = schedule_layout(&layout)?;
        for basis in [Basis::Z, Basis::X] {
            let circuit = build_memory_circuit(&layout, &schedule, rounds, basis, p)?;
            let hg = extract_hypergraph(&circuit)?;
            let opts = DecoderOptions { use_flags: flags, renorm };
            let decoder: Box<dyn Decoder> = if code.is_color_code() {
                Box::new(FlaggedRestriction::new(&hg, opts)?)
            } else {
                Box::new(FlaggedMwpm::new(&hg, opts))
            };
            let cert = certify_effective_distance(&circuit, decoder.as_ref(), 1, None, 0)?;
            println!(
                "{spec:<10} budget={budget:?} flags={flags:<5} basis={basis} channels={:>5} hyperedges={:>5} w=1 {} ({} of {} signatures fail) witness={:?}",
                circuit.num_channels(),
                hg.hyperedges.len(),
                if cert.pass { "pass" } else { "FAIL" },
                cert.failures,
                cert.combinations,
                cert.witness
            );
        }
    }
    Ok(())
}
