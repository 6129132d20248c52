//! Schedules the bundled generator codes, naive and as flag-proxy networks, and prints
//! depths and round latencies.

use fpn::code::generate;
use fpn::layout::{build_fpn, build_naive_layout, layout_metrics};
use fpn::schedule::{
    round_latency, schedule_code, schedule_layout, verify_fpn_schedule, verify_schedule,
    TimingModel,
};

fn main() -> fpn::Result<()> {
    let timing = TimingModel::default();
    for spec in ["rotated:3", "rotated:5", "toric:2", "toric:3", "color:3", "color:5"] {
        let code = generate(spec)?;
        let s = schedule_code(&code)?;
        let naive = build_naive_layout(&code);
        println!(
            "{spec:10} naive: t_max={} depth={} latency={}ns violations={} qubits={}",
            s.t_max,
            s.depth(),
            round_latency(&s, &timing),
            verify_schedule(&s, &code).len(),
            naive.num_qubits()
        );
        for (budget, sharing) in [(4, false), (4, true), (3, true)] {
            let layout = build_fpn(&code, budget, sharing)?;
            let fs = schedule_layout(&layout)?;
            let m = layout_metrics(&layout);
            println!(
                "{:10} fpn(max_degree={budget}, sharing={sharing}): N={} flags={} proxies={} depth={} latency={}ns violations={}",
                "",
                m.total_qubits,
                m.flag,
                m.proxy,
                fs.depth(),
                round_latency(&fs, &timing),
                verify_fpn_schedule(&fs, &layout).len()
            );
        }
    }
    Ok(())
}
