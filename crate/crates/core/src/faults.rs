use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::circuits::{ExtractionCircuit, GateOp, RoundSchedule};
use crate::codes::{Classification, PauliType, StabilizerCode};
use crate::error::{Error, Result};
use crate::pauli::PauliOp;
use crate::table::KeyTable;

/// Ancilla bits used during single-circuit simulation.
const SYN_BIT: u32 = 62;
const FLAG_BIT: u32 = 63;
const DATA_MASK: u64 = (1 << 62) - 1;

/// Largest code size the fault machinery accepts (error words carry a
/// fault count in their top bits).
pub const MAX_DATA_QUBITS: usize = 61;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocationKind {
    TwoQubit,
    OneQubit,
    Prep,
    Measure,
}

impl LocationKind {
    pub fn outcomes(self) -> usize {
        match self {
            LocationKind::TwoQubit => 15,
            LocationKind::OneQubit => 3,
            LocationKind::Prep | LocationKind::Measure => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultLocation {
    pub circuit: usize,
    pub gate: usize,
    pub kind: LocationKind,
}

/// A location index into [`FaultTable::locations`] plus an outcome index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fault {
    pub location: u32,
    pub outcome: u8,
}

/// Effect of a fault on its own circuit: data error left behind and flips of
/// the two ancilla measurements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocalEffect {
    pub dx: u64,
    pub dz: u64,
    pub syndrome: bool,
    pub flag: bool,
}

/// End-of-round effect of a set of faults relative to the fault-free round.
/// `syndrome_bits` are flips of the measured syndrome (bit = circuit index),
/// `flag_bits` flips of the flag outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaultOutcome {
    pub data_error: PauliOp,
    pub syndrome_bits: u64,
    pub flag_bits: u64,
}

impl FaultOutcome {
    pub fn trivial(n: usize) -> Self {
        FaultOutcome { data_error: PauliOp::identity(n), syndrome_bits: 0, flag_bits: 0 }
    }
}

pub fn combine(n: usize, outcomes: &[FaultOutcome]) -> FaultOutcome {
    outcomes.iter().fold(FaultOutcome::trivial(n), |a, b| FaultOutcome {
        data_error: a.data_error.mul_unchecked(&b.data_error),
        syndrome_bits: a.syndrome_bits ^ b.syndrome_bits,
        flag_bits: a.flag_bits ^ b.flag_bits,
    })
}

/// Two-bit Pauli code: bit 0 is X, bit 1 is Z.
fn pauli_letter(p: u8) -> char {
    ['I', 'X', 'Z', 'Y'][p as usize & 3]
}

/// Paulis injected by outcome `o` at a location of `kind`, as
/// (first qubit code, second qubit code).
pub fn outcome_paulis(kind: LocationKind, o: u8) -> (u8, u8) {
    match kind {
        LocationKind::TwoQubit => {
            let c = o + 1;
            (c & 3, c >> 2)
        }
        LocationKind::OneQubit => (o + 1, 0),
        LocationKind::Prep | LocationKind::Measure => (1, 0),
    }
}

/// Gate-level Pauli-frame simulation of one circuit.
///
/// `frame` holds data errors on bits `< 62`; the syndrome and flag ancillas
/// live on bits 62 and 63. `inject` lists (gate index, first code, second
/// code); gate faults act after the gate, measurement faults flip the result.
pub fn simulate_circuit(c: &ExtractionCircuit, frame: (u64, u64), inject: &[(usize, u8, u8)]) -> (u64, u64, bool, bool) {
    let bit = |q: usize| -> u32 {
        if q == c.syndrome_qubit {
            SYN_BIT
        } else if Some(q) == c.flag_qubit {
            FLAG_BIT
        } else {
            q as u32
        }
    };
    let (mut x, mut z) = (frame.0 & DATA_MASK, frame.1 & DATA_MASK);
    let (mut syn, mut flag) = (false, false);
    let apply = |x: &mut u64, z: &mut u64, q: u32, p: u8| {
        *x ^= ((p & 1) as u64) << q;
        *z ^= ((p >> 1 & 1) as u64) << q;
    };
    for (gi, g) in c.gates.iter().enumerate() {
        match *g {
            GateOp::PrepZ(q) => {
                let b = bit(q);
                x &= !(1 << b);
                z &= !(1 << b);
            }
            GateOp::H(q) => {
                let b = bit(q);
                let (xb, zb) = (x >> b & 1, z >> b & 1);
                x = x & !(1 << b) | zb << b;
                z = z & !(1 << b) | xb << b;
            }
            GateOp::Cnot(ct, tg) => {
                let (bc, bt) = (bit(ct), bit(tg));
                x ^= (x >> bc & 1) << bt;
                z ^= (z >> bt & 1) << bc;
            }
            GateOp::MeasZ(q) => {
                let b = bit(q);
                let flips = inject.iter().filter(|i| i.0 == gi).count();
                let r = (x >> b & 1 == 1) ^ (flips % 2 == 1);
                if b == SYN_BIT {
                    syn = r;
                } else {
                    flag = r;
                }
                continue;
            }
        }
        for &(_, p1, p2) in inject.iter().filter(|i| i.0 == gi) {
            match *g {
                GateOp::PrepZ(q) | GateOp::H(q) => apply(&mut x, &mut z, bit(q), p1),
                GateOp::Cnot(ct, tg) => {
                    apply(&mut x, &mut z, bit(ct), p1);
                    apply(&mut x, &mut z, bit(tg), p2);
                }
                GateOp::MeasZ(_) => unreachable!(),
            }
        }
    }
    (x & DATA_MASK, z & DATA_MASK, syn, flag)
}

fn kind_of(g: &GateOp) -> LocationKind {
    match g {
        GateOp::PrepZ(_) => LocationKind::Prep,
        GateOp::H(_) => LocationKind::OneQubit,
        GateOp::Cnot(..) => LocationKind::TwoQubit,
        GateOp::MeasZ(_) => LocationKind::Measure,
    }
}

/// Local effect of every fault in every location of a schedule.
#[derive(Clone, Debug)]
pub struct FaultTable {
    pub n: usize,
    pub num_z: usize,
    pub locations: Vec<FaultLocation>,
    pub effects: Vec<Vec<LocalEffect>>,
    pub circuit_types: Vec<PauliType>,
    pub circuit_generators: Vec<usize>,
    pub support_masks: Vec<u64>,
    pub circuit_locations: Vec<Range<usize>>,
}

impl FaultTable {
    pub fn new(schedule: &RoundSchedule) -> Result<Self> {
        if schedule.n > MAX_DATA_QUBITS {
            return Err(Error::TooManyQubits(schedule.n));
        }
        if schedule.circuits.len() > 64 {
            return Err(Error::Unsupported("more than 64 circuits per round".into()));
        }
        let mut t = FaultTable {
            n: schedule.n,
            num_z: schedule.num_z,
            locations: Vec::new(),
            effects: Vec::new(),
            circuit_types: Vec::new(),
            circuit_generators: Vec::new(),
            support_masks: Vec::new(),
            circuit_locations: Vec::new(),
        };
        for (ci, c) in schedule.circuits.iter().enumerate() {
            let start = t.locations.len();
            for (gi, g) in c.gates.iter().enumerate() {
                let kind = kind_of(g);
                let effects = (0..kind.outcomes() as u8)
                    .map(|o| {
                        let (p1, p2) = outcome_paulis(kind, o);
                        let (dx, dz, syndrome, flag) = simulate_circuit(c, (0, 0), &[(gi, p1, p2)]);
                        LocalEffect { dx, dz, syndrome, flag }
                    })
                    .collect();
                t.locations.push(FaultLocation { circuit: ci, gate: gi, kind });
                t.effects.push(effects);
            }
            t.circuit_locations.push(start..t.locations.len());
            t.circuit_types.push(c.ptype);
            t.circuit_generators.push(c.generator);
            t.support_masks.push(crate::pauli::support_mask(&c.order));
        }
        Ok(t)
    }

    pub fn num_circuits(&self) -> usize {
        self.circuit_types.len()
    }

    /// Location indices of all circuits of one type.
    pub fn locations_of(&self, t: PauliType) -> Range<usize> {
        let cs = match t {
            PauliType::Z => 0..self.num_z,
            PauliType::X => self.num_z..self.num_circuits(),
        };
        if cs.is_empty() {
            return 0..0;
        }
        self.circuit_locations[cs.start].start..self.circuit_locations[cs.end - 1].end
    }

    pub fn effect(&self, f: Fault) -> LocalEffect {
        self.effects[f.location as usize][f.outcome as usize]
    }

    /// Ideal measurement of circuit `c` on a data frame.
    #[inline]
    pub fn measure(&self, c: usize, x: u64, z: u64) -> bool {
        let m = self.support_masks[c];
        let bits = match self.circuit_types[c] {
            PauliType::Z => x & m,
            PauliType::X => z & m,
        };
        bits.count_ones() & 1 == 1
    }

    /// All single faults in canonical (location, outcome) order.
    pub fn enumerate_single_faults(&self) -> Vec<Fault> {
        let mut v = Vec::new();
        for (li, e) in self.effects.iter().enumerate() {
            for o in 0..e.len() {
                v.push(Fault { location: li as u32, outcome: o as u8 });
            }
        }
        v
    }

    pub fn propagate(&self, f: Fault) -> FaultOutcome {
        let loc = self.locations[f.location as usize];
        let e = self.effect(f);
        let mut syn = (e.syndrome as u64) << loc.circuit;
        for c in loc.circuit + 1..self.num_circuits() {
            syn |= (self.measure(c, e.dx, e.dz) as u64) << c;
        }
        FaultOutcome {
            data_error: PauliOp::from_bits(self.n, e.dx, e.dz),
            syndrome_bits: syn,
            flag_bits: (e.flag as u64) << loc.circuit,
        }
    }

    pub fn propagate_all(&self, faults: &[Fault]) -> FaultOutcome {
        let v: Vec<FaultOutcome> = faults.iter().map(|&f| self.propagate(f)).collect();
        combine(self.n, &v)
    }

    /// Runs the circuits in `circuits` on an input data frame with the given
    /// faults, which must be sorted by location.
    pub fn run_circuits(&self, circuits: Range<usize>, frame: (u64, u64), faults: &[Fault]) -> RoundResult {
        let (mut x, mut z) = frame;
        let (mut measured, mut flags) = (0u64, 0u64);
        let mut k = 0;
        for c in circuits {
            let mut bit = self.measure(c, x, z);
            let end = self.circuit_locations[c].end as u32;
            while k < faults.len() && faults[k].location < end {
                let e = self.effect(faults[k]);
                bit ^= e.syndrome;
                flags ^= (e.flag as u64) << c;
                x ^= e.dx;
                z ^= e.dz;
                k += 1;
            }
            measured |= (bit as u64) << c;
        }
        RoundResult { x, z, measured, flags }
    }

    pub fn describe(&self, schedule: &RoundSchedule, f: Fault) -> FaultRecord {
        let loc = self.locations[f.location as usize];
        let (p1, p2) = outcome_paulis(loc.kind, f.outcome);
        let pauli = match loc.kind {
            LocationKind::TwoQubit => format!("{}{}", pauli_letter(p1), pauli_letter(p2)),
            LocationKind::OneQubit => pauli_letter(p1).to_string(),
            LocationKind::Prep | LocationKind::Measure => "flip".into(),
        };
        FaultRecord {
            location: f.location,
            outcome: f.outcome,
            circuit: loc.circuit,
            generator: self.circuit_generators[loc.circuit],
            circuit_type: self.circuit_types[loc.circuit],
            gate: loc.gate,
            gate_text: format!("{:?}", schedule.circuits[loc.circuit].gates[loc.gate]),
            pauli,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundResult {
    pub x: u64,
    pub z: u64,
    /// Measured syndrome bits by circuit index.
    pub measured: u64,
    pub flags: u64,
}

/// Gate-level simulation of a whole round, used as an oracle for the
/// effect tables.
pub fn simulate_round_gates(schedule: &RoundSchedule, table: &FaultTable, frame: (u64, u64), faults: &[Fault]) -> RoundResult {
    let (mut x, mut z) = frame;
    let (mut measured, mut flags) = (0u64, 0u64);
    for (ci, c) in schedule.circuits.iter().enumerate() {
        let inj: Vec<(usize, u8, u8)> = faults
            .iter()
            .filter(|f| table.locations[f.location as usize].circuit == ci)
            .map(|f| {
                let loc = table.locations[f.location as usize];
                let (p1, p2) = outcome_paulis(loc.kind, f.outcome);
                (loc.gate, p1, p2)
            })
            .collect();
        let (nx, nz, s, fl) = simulate_circuit(c, (x, z), &inj);
        x = nx;
        z = nz;
        measured |= (s as u64) << ci;
        flags |= (fl as u64) << ci;
    }
    RoundResult { x, z, measured, flags }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRecord {
    pub location: u32,
    pub outcome: u8,
    pub circuit: usize,
    pub generator: usize,
    pub circuit_type: PauliType,
    pub gate: usize,
    pub gate_text: String,
    pub pauli: String,
}

/// One CSS sector of the decoding problem. The X sector holds X data errors,
/// keyed by the Z-generator syndrome and the flags of the X-type circuits;
/// the Z sector is the mirror.
#[derive(Clone, Debug)]
pub struct Sector {
    pub err_type: PauliType,
    pub n: usize,
    pub checks: Vec<u64>,
    /// Opposite-type logical; odd overlap means a logical class flip.
    pub logical: u64,
    pub num_z: usize,
    pub num_x: usize,
}

impl Sector {
    pub fn new(code: &StabilizerCode, err_type: PauliType) -> Self {
        let (checks, logical) = match err_type {
            PauliType::X => (code.support_masks(PauliType::Z), code.z_logicals[0].z_bits()),
            PauliType::Z => (code.support_masks(PauliType::X), code.x_logicals[0].x_bits()),
        };
        Sector { err_type, n: code.n, checks, logical, num_z: code.z_supports.len(), num_x: code.x_supports.len() }
    }

    #[inline]
    pub fn syndrome(&self, err: u64) -> u64 {
        let mut s = 0;
        for (i, m) in self.checks.iter().enumerate() {
            s |= (((m & err).count_ones() & 1) as u64) << i;
        }
        s
    }

    #[inline]
    pub fn class(&self, err: u64) -> bool {
        (err & self.logical).count_ones() & 1 == 1
    }

    /// Flags of this sector's circuits taken from a round-wide flag word.
    #[inline]
    pub fn own_flags(&self, flags: u64) -> u64 {
        match self.err_type {
            PauliType::X => flags >> self.num_z & low(self.num_x),
            PauliType::Z => flags & low(self.num_z),
        }
    }

    /// Circuit type whose flags belong to this sector.
    pub fn flag_type(&self) -> PauliType {
        self.err_type
    }

    #[inline]
    pub fn key_from_parts(&self, syndrome: u64, own_flags: u64) -> u64 {
        syndrome | own_flags << self.checks.len()
    }

    #[inline]
    pub fn key(&self, err: u64, flags: u64) -> u64 {
        self.key_from_parts(self.syndrome(err), self.own_flags(flags))
    }

    pub fn key_bits(&self) -> usize {
        self.checks.len()
            + match self.err_type {
                PauliType::X => self.num_x,
                PauliType::Z => self.num_z,
            }
    }

    /// Sector part of a round-wide error.
    #[inline]
    pub fn part(&self, x: u64, z: u64) -> u64 {
        match self.err_type {
            PauliType::X => x,
            PauliType::Z => z,
        }
    }

    /// Splits a sector key into (syndrome, own flags).
    pub fn split_key(&self, key: u64) -> (u64, u64) {
        let m = self.checks.len();
        (key & low(m), key >> m)
    }
}

#[inline]
pub(crate) fn low(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Distinct single-fault outcome within a sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorSingle {
    pub key: u64,
    pub err: u64,
    /// Representative fault, preferring one with no effect on the other sector.
    pub fault: Fault,
}

/// Distinct nontrivial sector outcomes of all single faults, in canonical
/// fault order of their first occurrence.
pub fn sector_singles(table: &FaultTable, sector: &Sector) -> Vec<SectorSingle> {
    let mut out: Vec<SectorSingle> = Vec::new();
    let mut index: HashMap<(u64, u64), (usize, bool)> = HashMap::new();
    for f in table.enumerate_single_faults() {
        let e = table.effect(f);
        let c = table.locations[f.location as usize].circuit;
        let flags = (e.flag as u64) << c;
        let err = sector.part(e.dx, e.dz);
        let key = sector.key(err, flags);
        if key == 0 && err == 0 {
            continue;
        }
        let other_err = match sector.err_type {
            PauliType::X => e.dz,
            PauliType::Z => e.dx,
        };
        let other_flag = e.flag && table.circuit_types[c] != sector.flag_type();
        let pure = other_err == 0 && !other_flag;
        match index.get(&(key, err)) {
            None => {
                index.insert((key, err), (out.len(), pure));
                out.push(SectorSingle { key, err, fault: f });
            }
            Some(&(i, was_pure)) => {
                if pure && !was_pure {
                    out[i].fault = f;
                    index.insert((key, err), (i, true));
                }
            }
        }
    }
    out
}

/// Single-qubit data errors as sector outcomes (code-capacity model).
pub fn data_singles(sector: &Sector) -> Vec<SectorSingle> {
    (0..sector.n)
        .map(|q| SectorSingle { key: sector.syndrome(1 << q), err: 1 << q, fault: Fault { location: q as u32, outcome: 0 } })
        .collect()
}

pub(crate) const LEVEL_SHIFT: u32 = 61;
pub(crate) const ERR_MASK: u64 = (1 << LEVEL_SHIFT) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopMode {
    /// Abort at the first collision of inequivalent errors.
    FirstViolation,
    /// Finish the level where the first collision appears and keep the one
    /// with the smallest merged fault count.
    MinimalViolation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub key: u64,
    pub level_new: usize,
    pub level_stored: usize,
    pub err_new: u64,
    pub err_stored: u64,
    pub parent_key: u64,
    pub parent_err: u64,
    pub single: usize,
}

impl Violation {
    pub fn merged_faults(&self) -> usize {
        self.level_new + self.level_stored
    }
}

#[derive(Clone, Debug)]
pub struct SectorBfs {
    /// key -> error | (fault count << 61)
    pub table: KeyTable,
    pub new_per_level: Vec<u64>,
    pub violation: Option<Violation>,
}

/// Level-wise enumeration of all fault combinations of at most `t` sector
/// faults, deduplicated by key. Each key keeps the error of the first
/// combination that reached it, so stored counts are minimal; only newly
/// seen keys are expanded, which is exact as long as no two combinations
/// with the same key differ by a logical.
pub fn sector_bfs(sector: &Sector, singles: &[SectorSingle], t: usize, mode: StopMode, max_entries: usize) -> Result<SectorBfs> {
    if t > 7 {
        return Err(Error::Unsupported(format!("t = {t} exceeds the packed fault-count range")));
    }
    let mut table = KeyTable::with_capacity(1024);
    table.insert_new(0, 0);
    let mut frontier: Vec<(u64, u64)> = vec![(0, 0)];
    let mut new_per_level = vec![1u64];
    let mut best: Option<Violation> = None;
    for level in 1..=t {
        let mut next = Vec::new();
        let mut added = 0u64;
        let tag = (level as u64) << LEVEL_SHIFT;
        for &(k, e) in &frontier {
            for (si, s) in singles.iter().enumerate() {
                let nk = k ^ s.key;
                let ne = e ^ s.err;
                match table.insert_new(nk, ne | tag) {
                    None => {
                        added += 1;
                        if level < t {
                            next.push((nk, ne));
                        }
                    }
                    Some(v) => {
                        if sector.class((v & ERR_MASK) ^ ne) {
                            let viol = Violation {
                                key: nk,
                                level_new: level,
                                level_stored: (v >> LEVEL_SHIFT) as usize,
                                err_new: ne,
                                err_stored: v & ERR_MASK,
                                parent_key: k,
                                parent_err: e,
                                single: si,
                            };
                            if mode == StopMode::FirstViolation {
                                new_per_level.push(added);
                                return Ok(SectorBfs { table, new_per_level, violation: Some(viol) });
                            }
                            if best.is_none_or(|b| viol.merged_faults() < b.merged_faults()) {
                                best = Some(viol);
                            }
                        }
                    }
                }
            }
            if table.len() > max_entries {
                return Err(Error::Budget(format!("lookup table exceeds {max_entries} entries")));
            }
        }
        new_per_level.push(added);
        if best.is_some() {
            break;
        }
        frontier = next;
    }
    Ok(SectorBfs { table, new_per_level, violation: best })
}

/// Recovers one minimal combination (as single indices) that produced a
/// stored entry.
pub fn reconstruct(table: &KeyTable, singles: &[SectorSingle], mut key: u64, mut err: u64, mut level: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while level > 0 {
        let found = singles.iter().position(|s| {
            table
                .get(key ^ s.key)
                .is_some_and(|v| (v >> LEVEL_SHIFT) as usize == level - 1 && v & ERR_MASK == err ^ s.err)
        });
        let si = found.expect("stored entry has a parent one level down");
        out.push(si);
        key ^= singles[si].key;
        err ^= singles[si].err;
        level -= 1;
    }
    out.reverse();
    out
}

/// Two fault combinations with the same full syndrome whose data errors
/// differ by a logical operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sector: PauliType,
    pub faults_a: Vec<FaultRecord>,
    pub faults_b: Vec<FaultRecord>,
    /// Shared sector syndrome and flag bits.
    pub syndrome: u64,
    pub flags: u64,
    pub product: String,
    pub classification: Classification,
    /// Joint outcome of all faults of both sets together.
    pub merged_faults: usize,
    pub merged_syndrome: u64,
    pub merged_flags: u64,
    pub merged_classification: Classification,
}

impl Counterexample {
    pub fn merged_is_silent_logical(&self) -> bool {
        self.merged_syndrome == 0 && self.merged_flags == 0 && self.merged_classification == Classification::Logical
    }

    pub fn faults(&self) -> Vec<Fault> {
        self.faults_a
            .iter()
            .chain(&self.faults_b)
            .map(|r| Fault { location: r.location, outcome: r.outcome })
            .collect()
    }
}

/// Everything needed to enumerate fault combinations of one schedule.
#[derive(Clone, Debug)]
pub struct FaultContext<'a> {
    pub code: &'a StabilizerCode,
    pub schedule: &'a RoundSchedule,
    pub table: FaultTable,
    pub sectors: [Sector; 2],
    pub singles: [Vec<SectorSingle>; 2],
}

impl<'a> FaultContext<'a> {
    pub fn new(code: &'a StabilizerCode, schedule: &'a RoundSchedule) -> Result<Self> {
        if code.k != 1 {
            return Err(Error::Unsupported("fault enumeration needs k = 1".into()));
        }
        let table = FaultTable::new(schedule)?;
        let sectors = [Sector::new(code, PauliType::X), Sector::new(code, PauliType::Z)];
        let singles = [sector_singles(&table, &sectors[0]), sector_singles(&table, &sectors[1])];
        Ok(FaultContext { code, schedule, table, sectors, singles })
    }

    fn counterexample(&self, s: usize, bfs: &SectorBfs) -> Counterexample {
        let v = bfs.violation.expect("violation present");
        let singles = &self.singles[s];
        let a = reconstruct(&bfs.table, singles, v.key, v.err_stored, v.level_stored);
        let mut b = reconstruct(&bfs.table, singles, v.parent_key, v.parent_err, v.level_new - 1);
        b.push(v.single);
        let rec = |ix: &[usize]| -> Vec<FaultRecord> {
            ix.iter().map(|&i| self.table.describe(self.schedule, singles[i].fault)).collect()
        };
        let sector = &self.sectors[s];
        let prod = v.err_new ^ v.err_stored;
        let n = self.code.n;
        let product = match sector.err_type {
            PauliType::X => PauliOp::from_bits(n, prod, 0),
            PauliType::Z => PauliOp::from_bits(n, 0, prod),
        };
        let faults: Vec<Fault> = a.iter().chain(&b).map(|&i| singles[i].fault).collect();
        let merged = self.table.propagate_all(&faults);
        let (syn, own) = sector.split_key(v.key);
        Counterexample {
            sector: sector.err_type,
            faults_a: rec(&a),
            faults_b: rec(&b),
            syndrome: syn,
            flags: own,
            classification: self.code.classify(&product).expect("sizes match"),
            product: product.to_string(),
            merged_faults: faults.len(),
            merged_syndrome: self.code.syndrome(&merged.data_error).expect("sizes match"),
            merged_flags: merged.flag_bits,
            merged_classification: self.code.classify(&merged.data_error).expect("sizes match"),
        }
    }

    /// Checks both sectors for collisions among combinations of at most `t`
    /// faults.
    pub fn check_distinguishable(&self, t: usize, max_entries: usize) -> Result<Distinguishability> {
        let mut entries = [0usize; 2];
        for s in 0..2 {
            let bfs = sector_bfs(&self.sectors[s], &self.singles[s], t, StopMode::FirstViolation, max_entries)?;
            if bfs.violation.is_some() {
                return Ok(Distinguishability::Violated(Box::new(self.counterexample(s, &bfs))));
            }
            entries[s] = bfs.table.len();
        }
        Ok(Distinguishability::Ok { x_entries: entries[0], z_entries: entries[1] })
    }

    /// Smallest number of faults producing a logical error with trivial
    /// sector syndrome and flags, or `f_max + 1` if none up to `f_max`.
    pub fn effective_distance(&self, f_max: usize, max_entries: usize) -> Result<(usize, Option<Counterexample>)> {
        let depth = f_max.div_ceil(2);
        let mut best: Option<(usize, Counterexample)> = None;
        for s in 0..2 {
            let bfs = sector_bfs(&self.sectors[s], &self.singles[s], depth, StopMode::MinimalViolation, max_entries)?;
            if let Some(v) = bfs.violation {
                let f = v.merged_faults();
                if f <= f_max && best.as_ref().is_none_or(|b| f < b.0) {
                    best = Some((f, self.counterexample(s, &bfs)));
                }
            }
        }
        Ok(match best {
            Some((f, c)) => (f, Some(c)),
            None => (f_max + 1, None),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distinguishability {
    Ok { x_entries: usize, z_entries: usize },
    Violated(Box<Counterexample>),
}

impl Distinguishability {
    pub fn is_ok(&self) -> bool {
        matches!(self, Distinguishability::Ok { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_bare_circuit, build_flag_circuit, build_round, FlagPolicy};
    use crate::codes::build_steane7;

    /// Truth table for conjugation, written out by hand.
    #[test]
    fn conjugation_truth_table() {
        // CNOT(0 -> 1): X0 -> X0 X1, Z1 -> Z0 Z1, X1 -> X1, Z0 -> Z0.
        let c = ExtractionCircuit {
            generator: 0,
            ptype: PauliType::Z,
            gates: vec![GateOp::Cnot(0, 1)],
            order: vec![0],
            flag_pair: None,
            syndrome_qubit: 60,
            flag_qubit: None,
        };
        let expect = |x: u64, z: u64| -> (u64, u64) {
            // Independent rule: X on the control copies to the target, Z on the target copies to the control.
            let (x0, x1, z0, z1) = (x & 1, x >> 1 & 1, z & 1, z >> 1 & 1);
            (x0 | (x1 ^ x0) << 1, (z0 ^ z1) | z1 << 1)
        };
        for x in 0..4u64 {
            for z in 0..4u64 {
                let (ox, oz, _, _) = simulate_circuit(&c, (x, z), &[]);
                assert_eq!((ox, oz), expect(x, z), "x={x} z={z}");
            }
        }
        let h = ExtractionCircuit { gates: vec![GateOp::H(0)], ..c };
        for (x, z, ox, oz) in [(1, 0, 0, 1), (0, 1, 1, 0), (1, 1, 1, 1)] {
            assert_eq!(simulate_circuit(&h, (x, z), &[]).0, ox);
            assert_eq!(simulate_circuit(&h, (x, z), &[]).1, oz);
        }
    }

    #[test]
    fn ideal_circuits_measure_generators() {
        let code = build_steane7();
        let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
        for e in 0..(1u64 << 14) {
            let (x, z) = (e & 127, e >> 7);
            for (ci, c) in sched.circuits.iter().enumerate() {
                let (ox, oz, s, f) = simulate_circuit(c, (x, z), &[]);
                assert_eq!((ox, oz), (x, z));
                assert!(!f);
                let m = crate::pauli::support_mask(&c.order);
                let want = match sched.circuits[ci].ptype {
                    PauliType::Z => (x & m).count_ones() & 1 == 1,
                    PauliType::X => (z & m).count_ones() & 1 == 1,
                };
                assert_eq!(s, want);
            }
        }
    }

    #[test]
    fn hook_is_flagged() {
        // Z circuit on data 0..4, pair (1,3); syndrome ancilla 4, flag 5.
        let c = build_flag_circuit(&[0, 1, 2, 3], PauliType::Z, (1, 3), 4, 5).unwrap();
        // Gate 6 is the 2nd data CNOT (1 -> 4)... locate it.
        let gi = c.gates.iter().position(|g| *g == GateOp::Cnot(1, 4)).unwrap();
        // Z on the syndrome ancilla after it reaches data qubits 2 and 3.
        let (x, z, _, flag) = simulate_circuit(&c, (0, 0), &[(gi, 0, 2)]);
        assert_eq!((x, z, flag), (0, 0b1100, true));
        // Every single fault leaving weight >= 2 on the data raises the flag.
        for (gi, g) in c.gates.iter().enumerate() {
            let kind = kind_of(g);
            for o in 0..kind.outcomes() as u8 {
                let (p1, p2) = outcome_paulis(kind, o);
                let (_, z, _, flag) = simulate_circuit(&c, (0, 0), &[(gi, p1, p2)]);
                // Weight up to the generator itself.
                let w = z.count_ones().min((z ^ 0b1111).count_ones());
                if w >= 2 {
                    assert!(flag, "gate {gi} outcome {o}");
                }
            }
        }
    }

    #[test]
    fn measurement_flip() {
        let c = build_bare_circuit(&[0, 1, 2, 3], PauliType::Z, 4).unwrap();
        let (x, z, s, _) = simulate_circuit(&c, (0, 0), &[(5, 1, 0)]);
        assert_eq!((x, z, s), (0, 0, true));
    }

    #[test]
    fn bare_single_fault_count() {
        let c = build_bare_circuit(&[0, 1, 2, 3], PauliType::Z, 4).unwrap();
        let total: usize = c.gates.iter().map(|g| kind_of(g).outcomes()).sum();
        assert_eq!(total, 62);
    }

    #[test]
    fn propagation_is_linear() {
        let code = build_steane7();
        let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
        let t = FaultTable::new(&sched).unwrap();
        let faults = t.enumerate_single_faults();
        for (i, &a) in faults.iter().enumerate() {
            for &b in &faults[i + 1..] {
                let joint = simulate_round_gates(&sched, &t, (0, 0), &[a, b]);
                let sum = combine(7, &[t.propagate(a), t.propagate(b)]);
                assert_eq!((joint.x, joint.z), (sum.data_error.x_bits(), sum.data_error.z_bits()));
                assert_eq!(joint.measured, sum.syndrome_bits);
                assert_eq!(joint.flags, sum.flag_bits);
                let fast = t.run_circuits(0..6, (0, 0), &[a, b]);
                assert_eq!(fast, joint);
            }
        }
    }

    #[test]
    fn data_error_seen_by_later_circuits() {
        let code = build_steane7();
        let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
        let t = FaultTable::new(&sched).unwrap();
        // A Z on a data qubit from the first Z circuit shows up only in X circuits.
        let f = t
            .enumerate_single_faults()
            .into_iter()
            .find(|&f| {
                let e = t.effect(f);
                t.locations[f.location as usize].circuit == 0 && e.dx == 0 && e.dz.count_ones() == 1 && !e.syndrome && !e.flag
            })
            .unwrap();
        let o = t.propagate(f);
        assert_eq!(o.syndrome_bits & 0b111, 0);
        assert_ne!(o.syndrome_bits >> 3, 0);
    }

    #[test]
    fn steane_flag_schedule_is_distinguishable_at_t1() {
        let code = build_steane7();
        let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
        let ctx = FaultContext::new(&code, &sched).unwrap();
        assert!(ctx.check_distinguishable(1, 1 << 20).unwrap().is_ok());
        assert!(ctx.check_distinguishable(0, 1 << 20).unwrap().is_ok());
        assert_eq!(ctx.effective_distance(2, 1 << 20).unwrap().0, 3);
    }

    #[test]
    fn bare_steane_loses_distance() {
        let code = build_steane7();
        let sched = build_round(&code, &FlagPolicy::Bare).unwrap();
        let ctx = FaultContext::new(&code, &sched).unwrap();
        let (d, w) = ctx.effective_distance(2, 1 << 20).unwrap();
        assert!(d < 3);
        assert!(w.unwrap().merged_is_silent_logical());
        assert!(!ctx.check_distinguishable(1, 1 << 20).unwrap().is_ok());
    }
}
