//! CSS codes: representation, validation, small generators and the JSON code-file format.

use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bits::{gf2_rank, BitSet};
use crate::error::{read_file, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    R,
    G,
    B,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::R, Color::G, Color::B];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::R => "R",
            Color::G => "G",
            Color::B => "B",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub id: usize,
    pub basis: Basis,
    pub support: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
}

impl Check {
    pub fn weight(&self) -> usize {
        self.support.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogicalOperator {
    pub basis: Basis,
    pub index: usize,
    pub support: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub r: u32,
    pub s: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TannerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d_x: usize,
    pub d_z: usize,
    pub checks: Vec<Check>,
    pub logicals: Vec<LogicalOperator>,
    pub family: Option<Family>,
}

impl TannerCode {
    pub fn check(&self, id: usize) -> &Check {
        &self.checks[id]
    }

    pub fn checks_of(&self, basis: Basis) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.basis == basis)
    }

    pub fn logicals_of(&self, basis: Basis) -> impl Iterator<Item = &LogicalOperator> {
        self.logicals.iter().filter(move |l| l.basis == basis)
    }

    pub fn max_weight(&self, basis: Basis) -> usize {
        self.checks_of(basis).map(Check::weight).max().unwrap_or(0)
    }

    pub fn is_color_code(&self) -> bool {
        self.checks.iter().any(|c| c.color.is_some())
    }

    /// Checks containing each data qubit, in ascending id order.
    pub fn checks_by_qubit(&self) -> Vec<Vec<usize>> {
        let mut by = vec![Vec::new(); self.n];
        for c in &self.checks {
            for &q in &c.support {
                if q < self.n {
                    by[q].push(c.id);
                }
            }
        }
        by
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CodeFile::from(self)).expect("code serializes")
    }

    pub fn from_json(text: &str) -> Result<TannerCode> {
        let file: CodeFile = serde_json::from_str(text).map_err(|e| Error::json("code file", e))?;
        file.into_code()
    }
}

fn support_set(n: usize, support: &[usize]) -> BitSet {
    BitSet::from_indices(n, support.iter().copied().filter(|&q| q < n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SupportOutOfRange { check: usize, qubit: usize },
    DuplicateSupport { check: usize },
    NonDenseCheckIds { position: usize, id: usize },
    ColorPresence { check: usize },
    ChecksAnticommute { x_check: usize, z_check: usize, overlap: usize },
    LogicalAnticommutesWithCheck { basis: Basis, index: usize, check: usize },
    LogicalPairing { x_index: usize, z_index: usize, overlap: usize },
    LogicalEmpty { basis: Basis, index: usize },
    LogicalIndexOutOfRange { basis: Basis, index: usize },
    LogicalTooShort { basis: Basis, index: usize, weight: usize, distance: usize },
    MissingLogical { basis: Basis, index: usize },
    CheckRank { rank: usize, expected: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SupportOutOfRange { check, qubit } => {
                write!(f, "check {check} references qubit {qubit} outside 0..n")
            }
            Violation::DuplicateSupport { check } => {
                write!(f, "check {check} has repeated support entries")
            }
            Violation::NonDenseCheckIds { position, id } => {
                write!(f, "check at position {position} has id {id}; ids must be dense")
            }
            Violation::ColorPresence { check } => write!(
                f,
                "check {check}: colors must be present on every check or on none"
            ),
            Violation::ChecksAnticommute {
                x_check,
                z_check,
                overlap,
            } => write!(
                f,
                "X check {x_check} and Z check {z_check} overlap on {overlap} qubits (odd)"
            ),
            Violation::LogicalAnticommutesWithCheck {
                basis,
                index,
                check,
            } => write!(f, "logical {basis}{index} anticommutes with check {check}"),
            Violation::LogicalPairing {
                x_index,
                z_index,
                overlap,
            } => write!(
                f,
                "logical X{x_index} and Z{z_index} overlap on {overlap} qubits (wrong parity)"
            ),
            Violation::LogicalEmpty { basis, index } => {
                write!(f, "logical {basis}{index} has empty support")
            }
            Violation::LogicalIndexOutOfRange { basis, index } => {
                write!(f, "logical {basis}{index} index outside 0..k")
            }
            Violation::LogicalTooShort {
                basis,
                index,
                weight,
                distance,
            } => write!(
                f,
                "logical {basis}{index} has weight {weight} below the declared distance {distance}"
            ),
            Violation::MissingLogical { basis, index } => {
                write!(f, "logical {basis}{index} is missing")
            }
            Violation::CheckRank { rank, expected } => write!(
                f,
                "independent checks number {rank}, expected n - k = {expected}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the stabilizer algebra of `code`. The report is empty iff the code is valid.
///
/// The check-count invariant is taken over GF(2) rank, so codes that list redundant
/// checks (the toric code lists every star and plaquette) still validate.
pub fn validate_code(code: &TannerCode) -> ValidationReport {
    let n = code.n;
    let mut v = Vec::new();
    for (pos, c) in code.checks.iter().enumerate() {
        if c.id != pos {
            v.push(Violation::NonDenseCheckIds { position: pos, id: c.id });
        }
        for &q in &c.support {
            if q >= n {
                v.push(Violation::SupportOutOfRange { check: c.id, qubit: q });
            }
        }
        let mut s = c.support.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != c.support.len() {
            v.push(Violation::DuplicateSupport { check: c.id });
        }
    }
    let colored = code.is_color_code();
    for c in &code.checks {
        if c.color.is_some() != colored {
            v.push(Violation::ColorPresence { check: c.id });
        }
    }

    let sets: Vec<BitSet> = code.checks.iter().map(|c| support_set(n, &c.support)).collect();
    for x in code.checks_of(Basis::X) {
        for z in code.checks_of(Basis::Z) {
            let overlap = sets[x.id].and_count(&sets[z.id]) as usize;
            if overlap % 2 == 1 {
                v.push(Violation::ChecksAnticommute {
                    x_check: x.id,
                    z_check: z.id,
                    overlap,
                });
            }
        }
    }

    for l in &code.logicals {
        if l.support.is_empty() {
            v.push(Violation::LogicalEmpty { basis: l.basis, index: l.index });
        }
        if l.index >= code.k {
            v.push(Violation::LogicalIndexOutOfRange { basis: l.basis, index: l.index });
        }
        let d = match l.basis {
            Basis::X => code.d_x,
            Basis::Z => code.d_z,
        };
        if l.support.len() < d.min(code.d_x.min(code.d_z)) {
            v.push(Violation::LogicalTooShort {
                basis: l.basis,
                index: l.index,
                weight: l.support.len(),
                distance: d,
            });
        }
        let ls = support_set(n, &l.support);
        for c in code.checks_of(l.basis.other()) {
            if ls.and_count(&sets[c.id]) % 2 == 1 {
                v.push(Violation::LogicalAnticommutesWithCheck {
                    basis: l.basis,
                    index: l.index,
                    check: c.id,
                });
            }
        }
    }
    for basis in [Basis::X, Basis::Z] {
        for i in 0..code.k {
            if !code.logicals.iter().any(|l| l.basis == basis && l.index == i) {
                v.push(Violation::MissingLogical { basis, index: i });
            }
        }
    }
    for lx in code.logicals_of(Basis::X) {
        for lz in code.logicals_of(Basis::Z) {
            let overlap = support_set(n, &lx.support).and_count(&support_set(n, &lz.support)) as usize;
            let want_odd = lx.index == lz.index;
            if (overlap % 2 == 1) != want_odd {
                v.push(Violation::LogicalPairing {
                    x_index: lx.index,
                    z_index: lz.index,
                    overlap,
                });
            }
        }
    }

    let xs: Vec<BitSet> = code.checks_of(Basis::X).map(|c| sets[c.id].clone()).collect();
    let zs: Vec<BitSet> = code.checks_of(Basis::Z).map(|c| sets[c.id].clone()).collect();
    let rank = gf2_rank(&xs) + gf2_rank(&zs);
    if rank + code.k != n {
        v.push(Violation::CheckRank {
            rank,
            expected: n.saturating_sub(code.k),
        });
    }
    ValidationReport { violations: v }
}

/// Outcome of a bounded distance search for one Pauli type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistanceBound {
    Exact(usize),
    AtLeast(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Distances {
    pub x: DistanceBound,
    pub z: DistanceBound,
}

/// Minimum weight of an X-type (resp. Z-type) logical operator, searched exhaustively up to
/// weight `w_max`.
pub fn code_distance_bruteforce(code: &TannerCode, w_max: usize) -> Result<Distances> {
    if code.n > 30 && w_max > 4 {
        return Err(Error::CostGuard(format!(
            "exhaustive distance search needs n <= 30 or w_max <= 4 (n = {}, w_max = {w_max})",
            code.n
        )));
    }
    Ok(Distances {
        x: min_logical_weight(code, Basis::X, w_max),
        z: min_logical_weight(code, Basis::Z, w_max),
    })
}

fn min_logical_weight(code: &TannerCode, basis: Basis, w_max: usize) -> DistanceBound {
    // An error of type `basis` is caught by checks of the other type and flips logicals of the
    // other type. Columns pack both into one bit row per qubit.
    let detectors: Vec<&Check> = code.checks_of(basis.other()).collect();
    let logicals: Vec<&LogicalOperator> = code.logicals_of(basis.other()).collect();
    let width = detectors.len() + logicals.len();
    let mut cols = vec![BitSet::new(width); code.n];
    for (i, c) in detectors.iter().enumerate() {
        for &q in &c.support {
            cols[q].toggle(i);
        }
    }
    for (j, l) in logicals.iter().enumerate() {
        for &q in &l.support {
            cols[q].toggle(detectors.len() + j);
        }
    }
    let nd = detectors.len();
    for w in 1..=w_max.min(code.n) {
        let mut acc = BitSet::new(width);
        if search(&cols, nd, 0, w, &mut acc) {
            return DistanceBound::Exact(w);
        }
    }
    DistanceBound::AtLeast(w_max + 1)
}

fn search(cols: &[BitSet], nd: usize, start: usize, left: usize, acc: &mut BitSet) -> bool {
    if left == 0 {
        let silent = acc.ones().all(|i| i >= nd);
        return silent && !acc.is_empty();
    }
    for q in start..=cols.len() - left {
        acc.xor_with(&cols[q]);
        let hit = search(cols, nd, q + 1, left - 1, acc);
        acc.xor_with(&cols[q]);
        if hit {
            return true;
        }
    }
    false
}

/// Whether `{r, s}` tiles the hyperbolic plane, and the asymptotic rate bound `1 - 2/r - 2/s`.
pub fn hyperbolic_family_check(r: u32, s: u32) -> (bool, Ratio<i64>) {
    let (r, s) = (r as i64, s as i64);
    let valid = 2 * (r + s) < r * s;
    let rate = Ratio::from_integer(1) - Ratio::new(2, r) - Ratio::new(2, s);
    (valid, rate)
}

/// Rotated surface code `[[d^2, 1, d]]`. Qubit `(row, col)` has index `row * d + col`.
pub fn gen_rotated_surface(d: usize) -> Result<TannerCode> {
    if d == 0 || d.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "rotated surface code needs odd d >= 1, got {d}"
        )));
    }
    let q = |r: usize, c: usize| r * d + c;
    let mut raw: Vec<(Basis, Vec<usize>)> = Vec::new();
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            let basis = if (i + j) % 2 == 0 { Basis::X } else { Basis::Z };
            raw.push((basis, vec![q(i, j), q(i, j + 1), q(i + 1, j), q(i + 1, j + 1)]));
        }
    }
    for j in (1..d.saturating_sub(1)).step_by(2) {
        raw.push((Basis::X, vec![q(0, j), q(0, j + 1)]));
    }
    for j in (0..d.saturating_sub(1)).step_by(2) {
        raw.push((Basis::X, vec![q(d - 1, j), q(d - 1, j + 1)]));
    }
    for i in (0..d.saturating_sub(1)).step_by(2) {
        raw.push((Basis::Z, vec![q(i, 0), q(i + 1, 0)]));
    }
    for i in (1..d.saturating_sub(1)).step_by(2) {
        raw.push((Basis::Z, vec![q(i, d - 1), q(i + 1, d - 1)]));
    }
    let checks = raw
        .into_iter()
        .enumerate()
        .map(|(id, (basis, support))| Check { id, basis, support, color: None })
        .collect();
    let logicals = vec![
        LogicalOperator { basis: Basis::X, index: 0, support: (0..d).map(|r| q(r, 0)).collect() },
        LogicalOperator { basis: Basis::Z, index: 0, support: (0..d).map(|c| q(0, c)).collect() },
    ];
    Ok(TannerCode {
        name: format!("rotated-surface-d{d}"),
        n: d * d,
        k: 1,
        d_x: d,
        d_z: d,
        checks,
        logicals,
        family: None,
    })
}

/// Toric code `[[2d^2, 2, d]]` on a periodic `d x d` lattice. Every star and plaquette is
/// listed, so each qubit sits in exactly two X and two Z checks.
pub fn gen_toric(d: usize) -> Result<TannerCode> {
    if d < 2 {
        return Err(Error::Unsupported(format!("toric code needs d >= 2, got {d}")));
    }
    let h = |i: usize, j: usize| (i % d) * d + (j % d);
    let v = |i: usize, j: usize| d * d + (i % d) * d + (j % d);
    let mut checks = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let mut s = vec![h(i, j), h(i, j + d - 1), v(i, j), v(i + d - 1, j)];
            s.sort_unstable();
            checks.push(Check { id: checks.len(), basis: Basis::X, support: s, color: None });
        }
    }
    for i in 0..d {
        for j in 0..d {
            let mut s = vec![h(i, j), h(i + 1, j), v(i, j), v(i, j + 1)];
            s.sort_unstable();
            checks.push(Check { id: checks.len(), basis: Basis::Z, support: s, color: None });
        }
    }
    let logicals = vec![
        LogicalOperator { basis: Basis::X, index: 0, support: (0..d).map(|i| h(i, 0)).collect() },
        LogicalOperator { basis: Basis::X, index: 1, support: (0..d).map(|j| v(0, j)).collect() },
        LogicalOperator { basis: Basis::Z, index: 0, support: (0..d).map(|j| h(0, j)).collect() },
        LogicalOperator { basis: Basis::Z, index: 1, support: (0..d).map(|i| v(i, 0)).collect() },
    ];
    Ok(TannerCode {
        name: format!("toric-d{d}"),
        n: 2 * d * d,
        k: 2,
        d_x: d,
        d_z: d,
        checks,
        logicals,
        family: None,
    })
}

/// Triangular 6.6.6 color code with distance 3 or 5.
///
/// Faces sit on a triangular lattice `a + b w` (w a sixth root of unity) coloured by
/// `(a - b) mod 3`; qubits are the lattice triangles whose centroid lies in a triangle rotated
/// 30 degrees from the lattice axes. Each face yields an X and a Z check on the same support.
pub fn gen_triangular_color(d: usize) -> Result<TannerCode> {
    if d != 3 && d != 5 {
        return Err(Error::Unsupported(format!(
            "triangular color code generator supports d in {{3, 5}}, got {d}"
        )));
    }
    // Centroid coordinates scaled by 3: up triangles at (3a+1, 3b+1), down at (3a+2, 3b+2).
    let far = (3 * (3 * d as i64 - 5)) / 2;
    let span = d as i64 + 2;
    let mut tris: Vec<((i64, i64), [(i64, i64); 3])> = Vec::new();
    for a in -span..span {
        for b in -span..span {
            for up in [true, false] {
                let (x, y) = if up { (3 * a + 1, 3 * b + 1) } else { (3 * a + 2, 3 * b + 2) };
                if x - y >= -4 && 2 * x + y <= far && x + 2 * y >= -2 {
                    let verts = if up {
                        [(a, b), (a + 1, b), (a, b + 1)]
                    } else {
                        [(a + 1, b), (a, b + 1), (a + 1, b + 1)]
                    };
                    tris.push(((y, x), verts));
                }
            }
        }
    }
    tris.sort();
    let mut faces: std::collections::BTreeMap<(i64, i64), Vec<usize>> = Default::default();
    for (qi, (_, verts)) in tris.iter().enumerate() {
        for &p in verts {
            faces.entry(p).or_default().push(qi);
        }
    }
    let faces: Vec<((i64, i64), Vec<usize>)> =
        faces.into_iter().filter(|(_, qs)| qs.len() >= 3).collect();
    let mut checks = Vec::new();
    for basis in [Basis::X, Basis::Z] {
        for ((a, b), support) in &faces {
            let color = Color::ALL[(a - b).rem_euclid(3) as usize];
            checks.push(Check {
                id: checks.len(),
                basis,
                support: support.clone(),
                color: Some(color),
            });
        }
    }
    let side_min = tris.iter().map(|((y, x), _)| x + 2 * y).min().unwrap_or(0);
    let side: Vec<usize> = tris
        .iter()
        .enumerate()
        .filter(|(_, ((y, x), _))| x + 2 * y == side_min)
        .map(|(i, _)| i)
        .collect();
    let logicals = vec![
        LogicalOperator { basis: Basis::X, index: 0, support: side.clone() },
        LogicalOperator { basis: Basis::Z, index: 0, support: side },
    ];
    Ok(TannerCode {
        name: format!("triangular-color-d{d}"),
        n: tris.len(),
        k: 1,
        d_x: d,
        d_z: d,
        checks,
        logicals,
        family: None,
    })
}

/// Code file on disk. Arrays are sorted ascending and unknown fields are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeFile {
    name: String,
    params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
    checks: Vec<Check>,
    logicals: Vec<LogicalOperator>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    n: usize,
    k: usize,
    dx: usize,
    dz: usize,
}

impl From<&TannerCode> for CodeFile {
    fn from(c: &TannerCode) -> Self {
        CodeFile {
            name: c.name.clone(),
            params: Params { n: c.n, k: c.k, dx: c.d_x, dz: c.d_z },
            family: c.family,
            checks: c.checks.clone(),
            logicals: c.logicals.clone(),
        }
    }
}

impl CodeFile {
    fn into_code(self) -> Result<TannerCode> {
        for (i, c) in self.checks.iter().enumerate() {
            if !c.support.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Parse {
                    context: format!("checks[{i}].support"),
                    message: "support must be strictly ascending".into(),
                });
            }
        }
        for (i, l) in self.logicals.iter().enumerate() {
            if !l.support.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Parse {
                    context: format!("logicals[{i}].support"),
                    message: "support must be strictly ascending".into(),
                });
            }
        }
        if !self.checks.windows(2).all(|w| w[0].id < w[1].id) {
            return Err(Error::Parse {
                context: "checks".into(),
                message: "checks must be sorted by ascending id".into(),
            });
        }
        Ok(TannerCode {
            name: self.name,
            n: self.params.n,
            k: self.params.k,
            d_x: self.params.dx,
            d_z: self.params.dz,
            checks: self.checks,
            logicals: self.logicals,
            family: self.family,
        })
    }
}

/// Reads and validates a code file. Declared distances are trusted unless `verify_distance`
/// is set, in which case they are confirmed by exhaustive search.
pub fn load_code(path: &Path, verify_distance: bool) -> Result<TannerCode> {
    let code = TannerCode::from_json(&read_file(path)?)?;
    let report = validate_code(&code);
    if !report.is_valid() {
        return Err(Error::Validation(report.to_string()));
    }
    if verify_distance {
        let w = code.d_x.max(code.d_z);
        let found = code_distance_bruteforce(&code, w)?;
        if found.x != DistanceBound::Exact(code.d_x) || found.z != DistanceBound::Exact(code.d_z) {
            return Err(Error::Validation(format!(
                "declared distances ({}, {}) disagree with search result {:?}",
                code.d_x, code.d_z, found
            )));
        }
    }
    Ok(code)
}

/// Generator spec such as `rotated:3`, `toric:2` or `color:5`.
pub fn generate(spec: &str) -> Result<TannerCode> {
    let (family, d) = spec
        .split_once(':')
        .ok_or_else(|| Error::Unsupported(format!("generator spec `{spec}` is not FAMILY:D")))?;
    let d: usize = d
        .parse()
        .map_err(|_| Error::Unsupported(format!("generator spec `{spec}` has a bad distance")))?;
    match family {
        "rotated" => gen_rotated_surface(d),
        "toric" => gen_toric(d),
        "color" => gen_triangular_color(d),
        _ => Err(Error::Unsupported(format!("unknown code family `{family}`"))),
    }
}

/// Resolves `source` as a generator spec when it has that shape, otherwise as a file path.
pub fn resolve_code(source: &str, verify_distance: bool) -> Result<TannerCode> {
    let is_spec = source
        .split_once(':')
        .map(|(f, _)| matches!(f, "rotated" | "toric" | "color"))
        .unwrap_or(false);
    if is_spec {
        generate(source)
    } else {
        load_code(Path::new(source), verify_distance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotated_d3_shape() {
        let c = gen_rotated_surface(3).unwrap();
        assert_eq!((c.n, c.k, c.checks.len()), (9, 1, 8));
        assert!(validate_code(&c).is_valid(), "{}", validate_code(&c));
    }

    #[test]
    fn rotated_d1_is_bare_qubit() {
        let c = gen_rotated_surface(1).unwrap();
        assert_eq!((c.n, c.k, c.checks.len()), (1, 1, 0));
        assert!(validate_code(&c).is_valid());
    }

    #[test]
    fn even_distance_rejected() {
        assert!(gen_rotated_surface(4).is_err());
        assert!(gen_triangular_color(7).is_err());
        assert!(gen_toric(1).is_err());
    }

    #[test]
    fn rotated_d5_weights() {
        let c = gen_rotated_surface(5).unwrap();
        let w4 = c.checks.iter().filter(|c| c.weight() == 4).count();
        let w2 = c.checks.iter().filter(|c| c.weight() == 2).count();
        assert_eq!((w4, w2), (16, 8));
    }

    #[test]
    fn toric_degrees() {
        for d in 2..=4 {
            let c = gen_toric(d).unwrap();
            assert!(validate_code(&c).is_valid(), "{}", validate_code(&c));
            let by = c.checks_by_qubit();
            for checks in by {
                let x = checks.iter().filter(|&&i| c.checks[i].basis == Basis::X).count();
                assert_eq!((x, checks.len() - x), (2, 2));
            }
        }
    }

    #[test]
    fn color_codes_are_valid() {
        let c3 = gen_triangular_color(3).unwrap();
        assert_eq!((c3.n, c3.checks.len() / 2), (7, 3));
        assert!(validate_code(&c3).is_valid(), "{}", validate_code(&c3));
        let c5 = gen_triangular_color(5).unwrap();
        assert_eq!((c5.n, c5.checks.len() / 2), (19, 9));
        assert!(validate_code(&c5).is_valid(), "{}", validate_code(&c5));
        for c in [&c3, &c5] {
            for q in c.checks_by_qubit() {
                let faces = q.len() / 2;
                assert!((1..=3).contains(&faces));
            }
        }
    }

    #[test]
    fn anticommuting_logical_is_named() {
        let mut c = gen_rotated_surface(3).unwrap();
        c.logicals[1].support = vec![0, 1, 4];
        let report = validate_code(&c);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::LogicalAnticommutesWithCheck { basis: Basis::Z, .. })));
    }

    #[test]
    fn odd_overlap_rejected_on_load() {
        let mut c = gen_rotated_surface(3).unwrap();
        c.checks[1].support = vec![1, 2];
        let dir = std::env::temp_dir().join(format!("fpn-code-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, c.to_json()).unwrap();
        let err = load_code(&path, false).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"name":"x","params":{"n":1,"k":1,"dx":1,"dz":1},"checks":[],"logicals":[],"extra":1}"#;
        assert!(matches!(TannerCode::from_json(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn rate_bounds() {
        assert_eq!(hyperbolic_family_check(4, 5), (true, Ratio::new(1, 10)));
        assert!(!hyperbolic_family_check(4, 4).0);
        assert_eq!(hyperbolic_family_check(5, 8), (true, Ratio::new(7, 20)));
    }

    #[test]
    fn small_distances() {
        let c = gen_rotated_surface(3).unwrap();
        let d = code_distance_bruteforce(&c, 3).unwrap();
        assert_eq!(d, Distances { x: DistanceBound::Exact(3), z: DistanceBound::Exact(3) });
        let t = gen_toric(2).unwrap();
        let d = code_distance_bruteforce(&t, 2).unwrap();
        assert_eq!(d.x, DistanceBound::Exact(2));
        let d = code_distance_bruteforce(&c, 2).unwrap();
        assert_eq!(d.x, DistanceBound::AtLeast(3));
    }

    #[test]
    fn cost_guard() {
        let c = gen_rotated_surface(7).unwrap();
        assert!(matches!(code_distance_bruteforce(&c, 5), Err(Error::CostGuard(_))));
        assert!(code_distance_bruteforce(&c, 2).is_ok());
    }
}
