//! Generates the bundled codes, validates their stabilizer algebra and confirms distances by
//! exhaustive search. Also prints asymptotic rate bounds for a few {r, s} tilings.

use fpn::code::{code_distance_bruteforce, generate, hyperbolic_family_check, validate_code};

fn main() -> fpn::Result<()> {
    for spec in ["rotated:3", "rotated:5", "toric:3", "color:3", "color:5"] {
        let code = generate(spec)?;
        let report = validate_code(&code);
        let d = code_distance_bruteforce(&code, code.d_x.max(code.d_z))?;
        println!(
            "{spec:10} [[{}, {}, {}]] checks={} valid={} distance x={:?} z={:?}",
            code.n,
            code.k,
            code.d_x.min(code.d_z),
            code.checks.len(),
            report.is_valid(),
            d.x,
            d.z
        );
    }
    for (r, s) in [(4, 4), (4, 5), (5, 5), (4, 8), (5, 8)] {
        let (hyperbolic, rate) = hyperbolic_family_check(r, s);
        println!("{{{r},{s}}} hyperbolic={hyperbolic} rate bound={rate}");
    }
    Ok(())
}
