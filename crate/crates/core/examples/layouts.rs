//! Compares the naive layout with flag-proxy networks at several degree budgets and
//! prints the architectural metrics as JSON.

use fpn::code::generate;
use fpn::layout::{build_fpn, build_naive_layout, layout_metrics};

fn main() -> fpn::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "color:3".into());
    let code = generate(&spec)?;
    let naive = layout_metrics(&build_naive_layout(&code));
    println!("naive: {}", serde_json::to_string(&naive).unwrap());
    for (budget, sharing) in [(4, false), (4, true), (3, true)] {
        let layout = build_fpn(&code, budget, sharing)?;
        let m = layout_metrics(&layout);
        println!("max degree {budget}, sharing {sharing}: {}", serde_json::to_string(&m).unwrap());
    }
    Ok(())
}
