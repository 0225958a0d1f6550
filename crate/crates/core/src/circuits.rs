use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codes::{PauliType, StabilizerCode};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateOp {
    PrepZ(usize),
    H(usize),
    /// (control, target)
    Cnot(usize, usize),
    MeasZ(usize),
}

impl GateOp {
    pub fn is_gate(&self) -> bool {
        matches!(self, GateOp::H(_) | GateOp::Cnot(..))
    }
}

/// Syndrome-extraction circuit for one generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionCircuit {
    pub generator: usize,
    pub ptype: PauliType,
    pub gates: Vec<GateOp>,
    /// Data qubits in CNOT order.
    pub order: Vec<usize>,
    /// `None` for a bare circuit.
    pub flag_pair: Option<(usize, usize)>,
    pub syndrome_qubit: usize,
    pub flag_qubit: Option<usize>,
}

fn check_support(support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidCode("empty generator support".into()));
    }
    Ok(())
}

/// Single-flag circuit. Flag CNOTs go after `s` and after `e` data CNOTs.
///
/// Z type: data controls, syndrome target; the flag starts in |+> and is the
/// control of its two CNOTs onto the syndrome ancilla. X type is the mirror:
/// syndrome ancilla in |+>, syndrome controls onto data, and the syndrome
/// ancilla controls two CNOTs onto a |0> flag.
pub fn build_flag_circuit(
    support: &[usize],
    ptype: PauliType,
    flag_pair: (usize, usize),
    syndrome_qubit: usize,
    flag_qubit: usize,
) -> Result<ExtractionCircuit> {
    check_support(support)?;
    let w = support.len();
    let (s, e) = flag_pair;
    if s >= e || e > w {
        return Err(Error::FlagPair { s, e, w });
    }
    let (a, f) = (syndrome_qubit, flag_qubit);
    let mut g = vec![GateOp::PrepZ(a), GateOp::PrepZ(f)];
    let flag_cnot = match ptype {
        PauliType::Z => {
            g.push(GateOp::H(f));
            GateOp::Cnot(f, a)
        }
        PauliType::X => {
            g.push(GateOp::H(a));
            GateOp::Cnot(a, f)
        }
    };
    for (i, &q) in support.iter().enumerate() {
        if i == s || i == e {
            g.push(flag_cnot);
        }
        g.push(match ptype {
            PauliType::Z => GateOp::Cnot(q, a),
            PauliType::X => GateOp::Cnot(a, q),
        });
    }
    if e == w {
        g.push(flag_cnot);
    }
    g.push(match ptype {
        PauliType::Z => GateOp::H(f),
        PauliType::X => GateOp::H(a),
    });
    g.push(GateOp::MeasZ(a));
    g.push(GateOp::MeasZ(f));
    Ok(ExtractionCircuit {
        generator: 0,
        ptype,
        gates: g,
        order: support.to_vec(),
        flag_pair: Some(flag_pair),
        syndrome_qubit: a,
        flag_qubit: Some(f),
    })
}

pub fn build_bare_circuit(support: &[usize], ptype: PauliType, syndrome_qubit: usize) -> Result<ExtractionCircuit> {
    check_support(support)?;
    let a = syndrome_qubit;
    let mut g = vec![GateOp::PrepZ(a)];
    if ptype == PauliType::X {
        g.push(GateOp::H(a));
    }
    for &q in support {
        g.push(match ptype {
            PauliType::Z => GateOp::Cnot(q, a),
            PauliType::X => GateOp::Cnot(a, q),
        });
    }
    if ptype == PauliType::X {
        g.push(GateOp::H(a));
    }
    g.push(GateOp::MeasZ(a));
    Ok(ExtractionCircuit {
        generator: 0,
        ptype,
        gates: g,
        order: support.to_vec(),
        flag_pair: None,
        syndrome_qubit: a,
        flag_qubit: None,
    })
}

/// Which circuit each generator gets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlagPolicy {
    Bare,
    /// (1, w-1) for every generator.
    Straddle,
    /// Explicit pairs keyed by generator weight; other weights use (1, w-1).
    ByWeight(BTreeMap<usize, (usize, usize)>),
}

impl FlagPolicy {
    pub fn pair_for(&self, w: usize) -> Option<(usize, usize)> {
        match self {
            FlagPolicy::Bare => None,
            FlagPolicy::Straddle => Some((1, w.saturating_sub(1).max(2))),
            FlagPolicy::ByWeight(m) => Some(m.get(&w).copied().unwrap_or((1, w.saturating_sub(1).max(2)))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FlagPolicy::Bare => "bare".into(),
            FlagPolicy::Straddle => "straddle".into(),
            FlagPolicy::ByWeight(m) => {
                let parts: Vec<String> = m.iter().map(|(w, (s, e))| format!("{w}:{s},{e}")).collect();
                format!("straddle+{}", parts.join(";"))
            }
        }
    }
}

/// One full measurement round: Z-type circuits, then X-type circuits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSchedule {
    pub code_name: String,
    pub n: usize,
    pub circuits: Vec<ExtractionCircuit>,
    /// Number of Z-type circuits; they come first.
    pub num_z: usize,
    pub policy: FlagPolicy,
}

impl RoundSchedule {
    pub fn num_ancillas(&self) -> usize {
        self.circuits.iter().map(|c| 1 + c.flag_qubit.is_some() as usize).sum()
    }

    pub fn circuits_of(&self, t: PauliType) -> std::ops::Range<usize> {
        match t {
            PauliType::Z => 0..self.num_z,
            PauliType::X => self.num_z..self.circuits.len(),
        }
    }
}

/// Circuit index `c` uses ancillas `n + 2c` (syndrome) and `n + 2c + 1` (flag).
pub fn build_round(code: &StabilizerCode, policy: &FlagPolicy) -> Result<RoundSchedule> {
    let mut circuits = Vec::new();
    for (ptype, supports) in [(PauliType::Z, &code.z_supports), (PauliType::X, &code.x_supports)] {
        for (gi, s) in supports.iter().enumerate() {
            let c = circuits.len();
            let (a, f) = (code.n + 2 * c, code.n + 2 * c + 1);
            let mut circ = match policy.pair_for(s.len()) {
                None => build_bare_circuit(s, ptype, a)?,
                Some(pair) => build_flag_circuit(s, ptype, pair, a, f)?,
            };
            circ.generator = gi;
            circuits.push(circ);
        }
    }
    Ok(RoundSchedule {
        code_name: code.name.clone(),
        n: code.n,
        num_z: code.z_supports.len(),
        circuits,
        policy: policy.clone(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCensus {
    pub gates: usize,
    pub prep_meas: usize,
    pub data_cnots: usize,
    pub flag_cnots: usize,
    pub hadamards: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationCensus {
    pub z: TypeCensus,
    pub x: TypeCensus,
}

pub fn count_locations(schedule: &RoundSchedule) -> LocationCensus {
    let mut out = LocationCensus::default();
    for c in &schedule.circuits {
        let t = match c.ptype {
            PauliType::Z => &mut out.z,
            PauliType::X => &mut out.x,
        };
        for g in &c.gates {
            match *g {
                GateOp::PrepZ(_) | GateOp::MeasZ(_) => t.prep_meas += 1,
                GateOp::H(_) => {
                    t.gates += 1;
                    t.hadamards += 1;
                }
                GateOp::Cnot(a, b) => {
                    t.gates += 1;
                    if a < schedule.n || b < schedule.n {
                        t.data_cnots += 1;
                    } else {
                        t.flag_cnots += 1;
                    }
                }
            }
        }
    }
    out
}

/// Line-oriented dump of one circuit.
pub fn dump_circuit(code_name: &str, ordering: &str, c: &ExtractionCircuit) -> String {
    let mut s = String::new();
    let pair = match c.flag_pair {
        Some((a, b)) => format!("{a},{b}"),
        None => "none".into(),
    };
    let _ = writeln!(
        s,
        "# code={code_name} generator={} type={:?} ordering={ordering} flag_pair={pair}",
        c.generator, c.ptype
    );
    for g in &c.gates {
        let _ = match *g {
            GateOp::PrepZ(q) => writeln!(s, "PREPZ {q}"),
            GateOp::H(q) => writeln!(s, "H {q}"),
            GateOp::Cnot(a, b) => writeln!(s, "CNOT {a} {b}"),
            GateOp::MeasZ(q) => writeln!(s, "MZ {q}"),
        };
    }
    s
}
