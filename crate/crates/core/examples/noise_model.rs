//! Idle noise for one syndrome-extraction round at several physical error rates.

use fpn::circuit::{t1_for, twirl_probs};
use fpn::code::generate;
use fpn::layout::build_fpn;
use fpn::schedule::{round_latency, schedule_layout, TimingModel};

fn main() -> fpn::Result<()> {
    let layout = build_fpn(&generate("rotated:3")?, 4, true)?;
    let t = round_latency(&schedule_layout(&layout)?, &TimingModel::default()) as f64;
    println!("round latency {t} ns");
    for p in [1e-4, 5e-4, 1e-3, 5e-3] {
        let t1 = t1_for(p);
        let q = twirl_probs(t, t1, 0.5 * t1)?;
        println!("p={p:e}: T1={t1:.0}ns p_x=p_y={:.3e} p_z={:.3e}", q.p_x, q.p_z);
    }
    Ok(())
}
