use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, Basis};
use crate::pauli::{bits_of, support_mask, PauliOp, MAX_QUBITS};

/// Pauli type of a CSS generator or of a pure error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliType {
    X,
    Z,
}

impl PauliType {
    pub fn other(self) -> PauliType {
        match self {
            PauliType::X => PauliType::Z,
            PauliType::Z => PauliType::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    InStabilizer,
    Logical,
    Detectable,
}

/// CSS stabilizer code with generator supports stored in CNOT order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub z_supports: Vec<Vec<usize>>,
    pub x_supports: Vec<Vec<usize>>,
    pub z_generators: Vec<PauliOp>,
    pub x_generators: Vec<PauliOp>,
    pub x_logicals: Vec<PauliOp>,
    pub z_logicals: Vec<PauliOp>,
}

impl StabilizerCode {
    /// Builds a CSS code from generator supports and checks that all
    /// generators commute. `k` is computed from the rank.
    pub fn new(
        name: &str,
        n: usize,
        d: usize,
        z_supports: Vec<Vec<usize>>,
        x_supports: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        for s in z_supports.iter().chain(&x_supports) {
            if s.is_empty() {
                return Err(Error::InvalidCode("empty generator".into()));
            }
            if let Some(&q) = s.iter().find(|&&q| q >= n) {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if support_mask(s).count_ones() as usize != s.len() {
                return Err(Error::InvalidCode(format!("repeated qubit in {s:?}")));
            }
        }
        if z_supports.len() + x_supports.len() > 64 {
            return Err(Error::InvalidCode("more than 64 generators".into()));
        }
        let z_generators: Vec<PauliOp> = z_supports.iter().map(|s| PauliOp::z_on(n, s)).collect();
        let x_generators: Vec<PauliOp> = x_supports.iter().map(|s| PauliOp::x_on(n, s)).collect();
        for gz in &z_generators {
            for gx in &x_generators {
                if gz.anticommutes_unchecked(gx) {
                    return Err(Error::InvalidCode(format!("generators {gz} and {gx} anticommute")));
                }
            }
        }
        let rz = gf2::rank(&z_generators.iter().map(|g| g.z_bits()).collect::<Vec<_>>());
        let rx = gf2::rank(&x_generators.iter().map(|g| g.x_bits()).collect::<Vec<_>>());
        if rz + rx > n {
            return Err(Error::InvalidCode("rank exceeds qubit count".into()));
        }
        let mut code = StabilizerCode {
            name: name.to_string(),
            n,
            k: n - rz - rx,
            d,
            z_supports,
            x_supports,
            z_generators,
            x_generators,
            x_logicals: Vec::new(),
            z_logicals: Vec::new(),
        };
        if code.k > 0 {
            let (xl, zl) = code.logical_basis()?;
            code.x_logicals = xl;
            code.z_logicals = zl;
        }
        Ok(code)
    }

    pub fn num_generators(&self) -> usize {
        self.z_generators.len() + self.x_generators.len()
    }

    pub fn supports(&self, t: PauliType) -> &[Vec<usize>] {
        match t {
            PauliType::Z => &self.z_supports,
            PauliType::X => &self.x_supports,
        }
    }

    pub fn support_masks(&self, t: PauliType) -> Vec<u64> {
        self.supports(t).iter().map(|s| support_mask(s)).collect()
    }

    /// Full syndrome packed into a word: bit i for Z-generator i, then bit
    /// `mz + j` for X-generator j. Bit set means anticommuting.
    pub fn syndrome(&self, e: &PauliOp) -> Result<u64> {
        if e.n() != self.n {
            return Err(Error::Dimension { expected: self.n, got: e.n() });
        }
        let mz = self.z_supports.len();
        Ok(self.z_syndrome(e.x_bits()) | self.x_syndrome(e.z_bits()) << mz)
    }

    pub fn syndrome_bits(&self, e: &PauliOp) -> Result<Vec<u8>> {
        let s = self.syndrome(e)?;
        Ok((0..self.num_generators()).map(|i| (s >> i & 1) as u8).collect())
    }

    /// Syndrome of an X-error pattern under the Z generators.
    #[inline]
    pub fn z_syndrome(&self, x_bits: u64) -> u64 {
        let mut s = 0u64;
        for (i, g) in self.z_generators.iter().enumerate() {
            s |= (((g.z_bits() & x_bits).count_ones() & 1) as u64) << i;
        }
        s
    }

    /// Syndrome of a Z-error pattern under the X generators.
    #[inline]
    pub fn x_syndrome(&self, z_bits: u64) -> u64 {
        let mut s = 0u64;
        for (i, g) in self.x_generators.iter().enumerate() {
            s |= (((g.x_bits() & z_bits).count_ones() & 1) as u64) << i;
        }
        s
    }

    /// Syndrome of a pure error of type `t` (X errors are seen by Z generators).
    pub fn sector_syndrome(&self, t: PauliType, bits: u64) -> u64 {
        match t {
            PauliType::X => self.z_syndrome(bits),
            PauliType::Z => self.x_syndrome(bits),
        }
    }

    pub fn stabilizer_basis(&self, t: PauliType) -> Basis {
        match t {
            PauliType::X => Basis::from_rows(self.x_generators.iter().map(|g| g.x_bits())),
            PauliType::Z => Basis::from_rows(self.z_generators.iter().map(|g| g.z_bits())),
        }
    }

    pub fn classify(&self, p: &PauliOp) -> Result<Classification> {
        if self.syndrome(p)? != 0 {
            return Ok(Classification::Detectable);
        }
        let in_x = self.stabilizer_basis(PauliType::X).contains(p.x_bits());
        let in_z = self.stabilizer_basis(PauliType::Z).contains(p.z_bits());
        Ok(if in_x && in_z { Classification::InStabilizer } else { Classification::Logical })
    }

    /// Commutation bit of `error` with a logical representative.
    pub fn logical_class(&self, error: &PauliOp, logical_rep: &PauliOp) -> Result<u8> {
        error.commutes(logical_rep)
    }

    /// One X and one Z logical per encoded qubit, paired so that
    /// `x_logicals[i]` anticommutes with `z_logicals[j]` iff `i == j`.
    fn logical_basis(&self) -> Result<(Vec<PauliOp>, Vec<PauliOp>)> {
        let zmasks: Vec<u64> = self.z_generators.iter().map(|g| g.z_bits()).collect();
        let xmasks: Vec<u64> = self.x_generators.iter().map(|g| g.x_bits()).collect();
        let pick = |checks: &[u64], stabs: &[u64]| {
            let mut basis = Basis::from_rows(stabs.iter().copied());
            let mut out = Vec::new();
            for v in gf2::nullspace(checks, self.n) {
                if basis.insert(v) {
                    out.push(v);
                }
            }
            out
        };
        let mut xs = pick(&zmasks, &xmasks);
        let mut zs = pick(&xmasks, &zmasks);
        if xs.len() != self.k || zs.len() != self.k {
            return Err(Error::InvalidCode("logical count does not match k".into()));
        }
        // Symplectic Gram-Schmidt so that the pairing is diagonal.
        for i in 0..self.k {
            let j = (i..self.k)
                .find(|&j| (xs[i] & zs[j]).count_ones() & 1 == 1)
                .ok_or_else(|| Error::InvalidCode("degenerate logical pairing".into()))?;
            zs.swap(i, j);
            for j in 0..self.k {
                if j != i && (xs[j] & zs[i]).count_ones() & 1 == 1 {
                    xs[j] ^= xs[i];
                }
                if j != i && (xs[i] & zs[j]).count_ones() & 1 == 1 {
                    zs[j] ^= zs[i];
                }
            }
        }
        Ok((
            xs.into_iter().map(|v| PauliOp::from_bits(self.n, v, 0)).collect(),
            zs.into_iter().map(|v| PauliOp::from_bits(self.n, 0, v)).collect(),
        ))
    }

    /// Logical operators reduced to minimal weight, searched up to `max_weight`.
    pub fn derive_logicals(&self, max_weight: usize) -> Result<(Vec<PauliOp>, Vec<PauliOp>)> {
        if self.k != 1 {
            return self.logical_basis();
        }
        let x = self
            .min_weight_logical(PauliType::X, max_weight)
            .unwrap_or(self.x_logicals[0].x_bits());
        let z = self
            .min_weight_logical(PauliType::Z, max_weight)
            .unwrap_or(self.z_logicals[0].z_bits());
        Ok((vec![PauliOp::from_bits(self.n, x, 0)], vec![PauliOp::from_bits(self.n, 0, z)]))
    }

    /// Smallest-weight pure logical of type `t` with weight at most
    /// `max_weight`, found by meeting syndromes of two half-size supports.
    pub fn min_weight_logical(&self, t: PauliType, max_weight: usize) -> Option<u64> {
        let stabs = self.stabilizer_basis(t);
        let cols = self.syndrome_columns(t);
        let syn = |m: u64| bits_of(m).iter().fold(0u64, |s, &q| s ^ cols[q]);
        for w in 1..=max_weight.min(self.n) {
            let a = w / 2;
            let b = w - a;
            let mut half: HashMap<u64, Vec<u64>> = HashMap::new();
            for m in gf2::subsets(self.n, a) {
                half.entry(syn(m)).or_default().push(m);
            }
            for m in gf2::subsets(self.n, b) {
                if let Some(list) = half.get(&syn(m)) {
                    for &h in list {
                        if h & m == 0 && !stabs.contains(h | m) {
                            return Some(h | m);
                        }
                    }
                }
            }
        }
        None
    }

    /// Per-qubit syndrome contribution of a pure error of type `t`.
    pub fn syndrome_columns(&self, t: PauliType) -> Vec<u64> {
        (0..self.n).map(|q| self.sector_syndrome(t, 1 << q)).collect()
    }

    /// All pure logicals of type `t` and weight exactly `w`, as support masks
    /// in colexicographic order.
    pub fn enumerate_logicals(&self, w: usize, t: PauliType, budget: u64) -> Result<Vec<PauliOp>> {
        if w == 0 {
            return Ok(Vec::new());
        }
        let total = gf2::binomial(self.n as u64, w as u64);
        if total > budget {
            return Err(Error::Budget(format!("C({},{}) = {total} supports", self.n, w)));
        }
        let stabs = self.stabilizer_basis(t);
        let cols = self.syndrome_columns(t);
        let mut out = Vec::new();
        for m in gf2::subsets(self.n, w) {
            let s = bits_of(m).iter().fold(0u64, |s, &q| s ^ cols[q]);
            if s == 0 && !stabs.contains(m) {
                out.push(match t {
                    PauliType::X => PauliOp::from_bits(self.n, m, 0),
                    PauliType::Z => PauliOp::from_bits(self.n, 0, m),
                });
            }
        }
        Ok(out)
    }

    /// Weight histogram of all generators (both types).
    pub fn weight_histogram(&self) -> Vec<(usize, usize)> {
        let mut h: std::collections::BTreeMap<usize, usize> = Default::default();
        for s in self.z_supports.iter().chain(&self.x_supports) {
            *h.entry(s.len()).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// Copy of the code with a new CNOT order for some generators; the
    /// supports as sets must not change.
    pub fn with_orders(&self, name: &str, z: Vec<Vec<usize>>, x: Vec<Vec<usize>>) -> Result<Self> {
        let same = |a: &[Vec<usize>], b: &[Vec<usize>]| {
            a.len() == b.len() && a.iter().zip(b).all(|(u, v)| support_mask(u) == support_mask(v) && u.len() == v.len())
        };
        if !same(&self.z_supports, &z) || !same(&self.x_supports, &x) {
            return Err(Error::InvalidCode("reordering changed a generator support".into()));
        }
        let mut c = self.clone();
        c.name = name.to_string();
        c.z_supports = z;
        c.x_supports = x;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CodeJson {
            name: self.name.clone(),
            n: self.n,
            k: self.k,
            d: self.d,
            z_generators: self.z_supports.clone(),
            x_generators: self.x_supports.clone(),
            logicals: LogicalsJson {
                x: self.x_logicals.iter().map(|p| p.to_string()).collect(),
                z: self.z_logicals.iter().map(|p| p.to_string()).collect(),
            },
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CodeJson = serde_json::from_str(s)?;
        let mut code = StabilizerCode::new(&doc.name, doc.n, doc.d, doc.z_generators, doc.x_generators)?;
        if code.k != doc.k {
            return Err(Error::InvalidCode(format!("declared k={} but rank gives {}", doc.k, code.k)));
        }
        let parse = |v: &[String]| -> Result<Vec<PauliOp>> { v.iter().map(|s| s.parse()).collect() };
        code.x_logicals = parse(&doc.logicals.x)?;
        code.z_logicals = parse(&doc.logicals.z)?;
        Ok(code)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    name: String,
    n: usize,
    k: usize,
    d: usize,
    z_generators: Vec<Vec<usize>>,
    x_generators: Vec<Vec<usize>>,
    logicals: LogicalsJson,
}

#[derive(Serialize, Deserialize)]
struct LogicalsJson {
    x: Vec<String>,
    z: Vec<String>,
}

fn with_transversal_logicals(mut code: StabilizerCode) -> StabilizerCode {
    let all: Vec<usize> = (0..code.n).collect();
    code.x_logicals = vec![PauliOp::x_on(code.n, &all)];
    code.z_logicals = vec![PauliOp::z_on(code.n, &all)];
    code
}

/// Rows of the [[7,1,3]] generator matrix; X and Z generators share supports.
pub const STEANE_ROWS: [[usize; 4]; 3] = [[0, 3, 5, 6], [1, 3, 4, 6], [2, 4, 5, 6]];

pub fn build_steane7() -> StabilizerCode {
    let rows: Vec<Vec<usize>> = STEANE_ROWS.iter().map(|r| r.to_vec()).collect();
    let mut code = with_transversal_logicals(
        StabilizerCode::new("steane7", 7, 3, rows.clone(), rows).expect("Steane generators commute"),
    );
    let reps = code.enumerate_logicals(3, PauliType::X, 1000).expect("small enumeration");
    code.x_logicals.extend(reps);
    let reps = code.enumerate_logicals(3, PauliType::Z, 1000).expect("small enumeration");
    code.z_logicals.extend(reps);
    code
}

/// Generator rows of the [[49,1,9]] concatenated Steane code in CNOT order,
/// grouped by colour (red, green, blue).
pub const STEANE49_ROWS: [&[usize]; 24] = [
    &[4, 5, 0, 6],
    &[9, 10, 11, 13],
    &[14, 15, 16, 20],
    &[21, 22, 23, 27],
    &[30, 31, 32, 34],
    &[39, 40, 35, 41],
    &[44, 45, 46, 48],
    &[1, 12, 17, 47, 2, 7, 18, 42, 3, 8, 19, 43],
    &[2, 3, 4, 6],
    &[11, 12, 7, 13],
    &[18, 19, 14, 20],
    &[23, 24, 25, 27],
    &[28, 29, 30, 34],
    &[35, 36, 37, 41],
    &[46, 47, 42, 48],
    &[15, 26, 31, 43, 16, 21, 32, 44, 17, 22, 33, 45],
    &[0, 1, 2, 6],
    &[7, 8, 9, 13],
    &[16, 17, 18, 20],
    &[25, 26, 21, 27],
    &[32, 33, 28, 34],
    &[37, 38, 39, 41],
    &[42, 43, 44, 48],
    &[29, 40, 3, 45, 30, 35, 4, 46, 31, 36, 5, 47],
];

/// CNOT order variant for the [[49,1,9]] weight-12 generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Steane49Ordering {
    /// The tabulated order.
    Table,
    /// First and second qubit swapped on every weight-12 generator.
    SwapFirstTwo,
}

pub fn build_concat_steane49() -> StabilizerCode {
    build_concat_steane49_with(Steane49Ordering::Table)
}

pub fn build_concat_steane49_with(ordering: Steane49Ordering) -> StabilizerCode {
    let mut rows: Vec<Vec<usize>> = STEANE49_ROWS.iter().map(|r| r.to_vec()).collect();
    let name = match ordering {
        Steane49Ordering::Table => "steane49",
        Steane49Ordering::SwapFirstTwo => "steane49-swapped",
    };
    if ordering == Steane49Ordering::SwapFirstTwo {
        for r in rows.iter_mut().filter(|r| r.len() == 12) {
            r.swap(0, 1);
        }
    }
    with_transversal_logicals(
        StabilizerCode::new(name, 49, 9, rows.clone(), rows).expect("tabulated generators commute"),
    )
}

/// Generator rows of the [[61,1,9]] 6.6.6 colour code in CNOT order,
/// grouped by colour (red, green, blue).
pub const COLOR666_ROWS: [&[usize]; 30] = [
    &[0, 2, 3, 1],
    &[4, 10, 11, 7],
    &[14, 24, 25, 19],
    &[30, 44, 45, 37],
    &[5, 6, 9, 13, 12, 8],
    &[15, 16, 21, 27, 26, 20],
    &[17, 18, 23, 29, 28, 22],
    &[31, 32, 39, 47, 46, 38],
    &[33, 34, 41, 49, 48, 40],
    &[35, 36, 43, 51, 50, 42],
    &[1, 6, 5, 3],
    &[9, 18, 17, 13],
    &[23, 36, 35, 29],
    &[43, 60, 59, 51],
    &[7, 8, 12, 16, 15, 11],
    &[19, 20, 26, 32, 31, 25],
    &[21, 22, 28, 34, 33, 27],
    &[37, 38, 46, 54, 53, 45],
    &[39, 40, 48, 56, 55, 47],
    &[41, 42, 50, 58, 57, 49],
    &[44, 45, 53, 52],
    &[46, 47, 55, 54],
    &[48, 49, 57, 56],
    &[50, 51, 59, 58],
    &[2, 3, 5, 8, 7, 4],
    &[10, 11, 15, 20, 19, 14],
    &[12, 13, 17, 22, 21, 16],
    &[24, 25, 31, 38, 37, 30],
    &[26, 27, 33, 40, 39, 32],
    &[28, 29, 35, 42, 41, 34],
];

pub fn build_color666_d9() -> StabilizerCode {
    let rows: Vec<Vec<usize>> = COLOR666_ROWS.iter().map(|r| r.to_vec()).collect();
    with_transversal_logicals(
        StabilizerCode::new("color666-9", 61, 9, rows.clone(), rows).expect("tabulated generators commute"),
    )
}

// Triangular 4.8.8 patches. Qubits are numbered so that the distance-d patch
// uses indices 0..n(d) and each larger patch adds a strip along the bottom
// boundary, so the embedding of a smaller patch is the identity on indices.
const C488_D5: [&[usize]; 8] = [
    &[4, 3, 1, 0],
    &[5, 3, 1, 2],
    &[7, 9, 2, 5],
    &[8, 11, 10, 7, 5, 3, 4, 6],
    &[13, 12, 8, 6],
    &[14, 10, 7, 9],
    &[15, 12, 8, 11],
    &[15, 12, 13, 16],
];

const C488_D7: [&[usize]; 15] = [
    &[4, 3, 1, 0],
    &[5, 3, 1, 2],
    &[7, 9, 2, 5],
    &[8, 11, 10, 7, 5, 3, 4, 6],
    &[13, 12, 8, 6],
    &[14, 10, 7, 9],
    &[15, 12, 8, 11],
    &[18, 22, 21, 17, 14, 10, 11, 15],
    &[19, 24, 23, 18, 15, 12, 13, 16],
    &[26, 25, 19, 16],
    &[27, 21, 17, 20],
    &[28, 23, 18, 22],
    &[29, 25, 19, 24],
    &[27, 21, 22, 28],
    &[29, 25, 26, 30],
];

const C488_D9: [&[usize]; 24] = [
    &[4, 3, 1, 0],
    &[5, 3, 1, 2],
    &[7, 9, 2, 5],
    &[8, 11, 10, 7, 5, 3, 4, 6],
    &[13, 12, 8, 6],
    &[14, 10, 7, 9],
    &[15, 12, 8, 11],
    &[18, 22, 21, 17, 14, 10, 11, 15],
    &[19, 24, 23, 18, 15, 12, 13, 16],
    &[26, 25, 19, 16],
    &[27, 21, 17, 20],
    &[28, 23, 18, 22],
    &[29, 25, 19, 24],
    &[31, 35, 20, 27],
    &[32, 37, 36, 31, 27, 21, 22, 28],
    &[33, 39, 38, 32, 28, 23, 24, 29],
    &[34, 41, 40, 33, 29, 25, 26, 30],
    &[43, 42, 34, 30],
    &[44, 36, 31, 35],
    &[45, 38, 32, 37],
    &[46, 40, 33, 39],
    &[47, 42, 34, 41],
    &[45, 38, 39, 46],
    &[47, 42, 43, 48],
];

pub fn color488_n(d: usize) -> usize {
    (d * d + 2 * d - 1) / 2
}

pub fn build_color488(d: usize) -> Result<StabilizerCode> {
    let rows: &[&[usize]] = match d {
        5 => &C488_D5,
        7 => &C488_D7,
        9 => &C488_D9,
        _ => return Err(Error::Unsupported(format!("4.8.8 distance {d} (supported: 5, 7, 9)"))),
    };
    let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.to_vec()).collect();
    let name = format!("color488-{d}");
    Ok(with_transversal_logicals(StabilizerCode::new(&name, color488_n(d), d, rows.clone(), rows)?))
}

/// Qubits of the distance-d 4.8.8 patch on its bottom boundary: those that
/// gain a generator when the patch is embedded in the distance-(d+2) patch.
pub fn color488_bottom_boundary(d: usize) -> Result<Vec<usize>> {
    let small = build_color488(d)?;
    let big = build_color488(d + 2)?;
    let degree = |c: &StabilizerCode, q: usize| c.z_supports.iter().filter(|s| s.contains(&q)).count();
    Ok((0..small.n).filter(|&q| degree(&small, q) < degree(&big, q)).collect())
}

/// Registry of named codes for the CLI and configs.
pub fn code_by_name(name: &str) -> Result<StabilizerCode> {
    match name {
        "steane7" => Ok(build_steane7()),
        "steane49" => Ok(build_concat_steane49()),
        "steane49-swapped" => Ok(build_concat_steane49_with(Steane49Ordering::SwapFirstTwo)),
        "color666-9" => Ok(build_color666_d9()),
        "color488-5" => build_color488(5),
        "color488-7" => build_color488(7),
        "color488-9" => build_color488(9),
        other => Err(Error::Unsupported(format!("unknown code {other:?}"))),
    }
}

pub const CODE_NAMES: [&str; 7] =
    ["steane7", "steane49", "steane49-swapped", "color666-9", "color488-5", "color488-7", "color488-9"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steane_parameters() {
        let c = build_steane7();
        assert_eq!((c.n, c.k, c.d), (7, 1, 3));
        assert_eq!(c.syndrome(&PauliOp::x_on(7, &(0..7).collect::<Vec<_>>())).unwrap(), 0);
        // X on qubit 0 trips the first Z generator only.
        assert_eq!(c.syndrome_bits(&PauliOp::x_on(7, &[0])).unwrap(), vec![1, 0, 0, 0, 0, 0]);
        // Seven weight-3 Z logicals.
        assert_eq!(c.enumerate_logicals(3, PauliType::Z, 100).unwrap().len(), 7);
    }

    #[test]
    fn steane_weight3_count_by_brute_force() {
        // Independent oracle: scan all 2^7 Z-Paulis.
        let c = build_steane7();
        let count = (0u64..128)
            .filter(|&m| m.count_ones() == 3)
            .filter(|&m| c.classify(&PauliOp::from_bits(7, 0, m)).unwrap() == Classification::Logical)
            .count();
        assert_eq!(count, 7);
    }

    #[test]
    fn classification_examples() {
        let c = build_steane7();
        assert_eq!(c.classify(&c.z_generators[0]).unwrap(), Classification::InStabilizer);
        assert_eq!(c.classify(&PauliOp::z_on(7, &(0..7).collect::<Vec<_>>())).unwrap(), Classification::Logical);
        assert_eq!(c.classify(&PauliOp::x_on(7, &[0])).unwrap(), Classification::Detectable);
        assert_eq!(c.logical_class(&PauliOp::identity(7), &c.x_logicals[0]).unwrap(), 0);
        assert_eq!(c.logical_class(&PauliOp::z_on(7, &[2]), &c.x_logicals[0]).unwrap(), 1);
    }

    #[test]
    fn steane49_structure() {
        let c = build_concat_steane49();
        assert_eq!((c.n, c.k), (49, 1));
        assert_eq!(c.weight_histogram(), vec![(4, 42), (12, 6)]);
        assert_eq!(c.z_supports[7], vec![1, 12, 17, 47, 2, 7, 18, 42, 3, 8, 19, 43]);
        for s in c.z_supports.iter().filter(|s| s.len() == 12) {
            let mut blocks: Vec<usize> = s.iter().map(|q| q / 7).collect();
            blocks.sort();
            blocks.dedup();
            assert_eq!(blocks.len(), 4);
        }
        let all: Vec<u64> = c.z_generators.iter().map(|g| g.z_bits()).chain(c.x_generators.iter().map(|g| g.x_bits())).collect();
        assert_eq!(gf2::rank(&all[..24]) + gf2::rank(&all[24..]), 48);
    }

    #[test]
    fn color666_structure() {
        let c = build_color666_d9();
        assert_eq!((c.n, c.k), (61, 1));
        assert_eq!(c.weight_histogram(), vec![(4, 24), (6, 36)]);
    }

    #[test]
    fn color488_structure() {
        for (d, n, gens) in [(5, 17, 8), (7, 31, 15), (9, 49, 24)] {
            let c = build_color488(d).unwrap();
            assert_eq!((c.n, c.k), (n, 1));
            assert_eq!(c.z_supports.len(), gens);
        }
        let c5 = build_color488(5).unwrap();
        assert_eq!(c5.weight_histogram(), vec![(4, 14), (8, 2)]);
        assert!(build_color488(11).is_err());
        assert_eq!(color488_bottom_boundary(5).unwrap().len(), 5);
    }

    #[test]
    fn small_distances() {
        let c = build_steane7();
        assert_eq!(c.min_weight_logical(PauliType::X, 7).unwrap().count_ones(), 3);
        let c5 = build_color488(5).unwrap();
        assert_eq!(c5.min_weight_logical(PauliType::Z, 9).unwrap().count_ones(), 5);
        let c7 = build_color488(7).unwrap();
        assert_eq!(c7.min_weight_logical(PauliType::X, 9).unwrap().count_ones(), 7);
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        for name in CODE_NAMES {
            let c = code_by_name(name).unwrap();
            let s = c.to_json().unwrap();
            let back = StabilizerCode::from_json(&s).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_json().unwrap(), s);
        }
    }

    #[test]
    fn logical_pairing() {
        for name in CODE_NAMES {
            let c = code_by_name(name).unwrap();
            assert!(c.x_logicals[0].anticommutes_unchecked(&c.z_logicals[0]));
            assert_eq!(c.syndrome(&c.x_logicals[0]).unwrap(), 0);
            assert_eq!(c.syndrome(&c.z_logicals[0]).unwrap(), 0);
        }
    }
}
