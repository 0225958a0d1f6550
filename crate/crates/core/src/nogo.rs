//! Exhaustive check that no single-flag circuit for the weight-8 face of the
//! distance-5 4.8.8 color code preserves the distance, and the extension of
//! its witnesses to larger distances.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_flag_circuit, build_round, FlagPolicy, RoundSchedule};
use crate::codes::{build_color488, color488_bottom_boundary, Classification, PauliType, StabilizerCode};
use crate::error::{Error, Result};
use crate::faults::{Fault, FaultTable};
use crate::pauli::{bits_of, PauliOp};

pub const ORDERINGS: usize = 40_320;

/// Weight-5 Z logicals of the distance-5 code by overlap with the weight-8
/// generator `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalSets {
    pub generator: usize,
    pub q: Vec<usize>,
    pub w2l: Vec<u64>,
    pub w4l: Vec<u64>,
}

impl LogicalSets {
    /// Overlap of `l` with Q as an 8-bit mask over positions in `q`.
    pub fn overlap(&self, l: u64) -> u8 {
        self.q.iter().enumerate().fold(0u8, |m, (i, &qb)| m | (((l >> qb) & 1) as u8) << i)
    }

    pub fn q_mask(&self) -> u64 {
        self.q.iter().fold(0, |m, &b| m | 1 << b)
    }
}

pub fn build_w2l_w4l(code: &StabilizerCode) -> Result<LogicalSets> {
    let generator = code
        .z_supports
        .iter()
        .position(|s| s.len() == 8)
        .ok_or_else(|| Error::InvalidCode("no weight-8 generator".into()))?;
    let q = code.z_supports[generator].clone();
    let mut sets = LogicalSets { generator, q, w2l: Vec::new(), w4l: Vec::new() };
    let qm = sets.q_mask();
    for l in code.enumerate_logicals(5, PauliType::Z, 1 << 20)? {
        let m = l.z_bits();
        match (m & qm).count_ones() {
            2 => sets.w2l.push(m),
            4 => sets.w4l.push(m),
            _ => {}
        }
    }
    if sets.w2l.is_empty() || sets.w4l.is_empty() {
        return Err(Error::InvalidCode("empty W2L or W4L set".into()));
    }
    Ok(sets)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessCase {
    W2lSingleFault,
    W4lTwoFault,
}

/// One fault in the weight-8 circuit, by gate index within that circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitFault {
    pub gate: usize,
    pub outcome: u8,
    pub gate_text: String,
    pub pauli: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoGoWitness {
    /// Qubits of Q in data-CNOT order.
    pub ordering: Vec<usize>,
    pub flag_pair: (usize, usize),
    pub case: WitnessCase,
    pub faults: Vec<CircuitFault>,
    /// Data error of the circuit faults, possibly times the generator.
    pub error: Vec<usize>,
    pub logical: Vec<usize>,
    /// Single-qubit errors that complete the logical.
    pub completions: Vec<usize>,
}

/// Distinct outcomes of the weight-8 Z flag circuit for one flag pair, in
/// slot space (bit k = k-th data CNOT).
struct PairOutcomes {
    /// (Z data mask, first fault) for single faults with no flag.
    unflagged: Vec<(u8, Fault)>,
    /// Combined Z mask of two faults whose flags cancel.
    doubles: Vec<(u8, Fault, Fault)>,
}

fn slot_table(pair: (usize, usize)) -> Result<FaultTable> {
    let slots: Vec<usize> = (0..8).collect();
    let c = build_flag_circuit(&slots, PauliType::Z, pair, 8, 9)?;
    FaultTable::new(&RoundSchedule {
        code_name: "slots".into(),
        n: 8,
        circuits: vec![c],
        num_z: 1,
        policy: FlagPolicy::Straddle,
    })
}

fn pair_outcomes(pair: (usize, usize)) -> Result<PairOutcomes> {
    let table = slot_table(pair)?;
    // First fault per (mask, flag), preferring ones without an X part.
    let mut first: BTreeMap<(u8, bool), (bool, Fault)> = BTreeMap::new();
    for f in table.enumerate_single_faults() {
        let e = table.effect(f);
        let key = (e.dz as u8, e.flag);
        let clean = e.dx == 0;
        match first.get(&key) {
            Some(&(c, _)) if c || !clean => {}
            _ => {
                first.insert(key, (clean, f));
            }
        }
    }
    let unflagged = first.iter().filter(|(k, _)| !k.1).map(|(k, v)| (k.0, v.1)).collect();
    let all: Vec<(u8, bool, Fault)> = table
        .enumerate_single_faults()
        .into_iter()
        .map(|f| {
            let e = table.effect(f);
            (e.dz as u8, e.flag, f)
        })
        .collect();
    let mut seen = [false; 256];
    let mut doubles = Vec::new();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if a.1 != b.1 || a.2.location == b.2.location {
                continue;
            }
            let m = a.0 ^ b.0;
            if !seen[m as usize] {
                seen[m as usize] = true;
                doubles.push((m, a.2, b.2));
            }
        }
    }
    Ok(PairOutcomes { unflagged, doubles })
}

/// All 36 pairs (s, e) with s < e over 0..=8.
pub fn flag_pairs() -> Vec<(usize, usize)> {
    (0..9).flat_map(|s| (s + 1..9).map(move |e| (s, e))).collect()
}

/// The `index`-th permutation of 0..8 in lexicographic order.
pub fn nth_permutation(mut index: usize) -> [u8; 8] {
    let mut pool: Vec<u8> = (0..8).collect();
    let mut out = [0u8; 8];
    for (i, slot) in out.iter_mut().enumerate() {
        let f = (1..8 - i).product::<usize>();
        *slot = pool.remove(index / f);
        index %= f;
    }
    out
}

struct Targets {
    /// Overlap masks of W2L members.
    w2: [bool; 256],
    /// Weight-3 and weight-4 subsets of W4L overlaps.
    w4: [bool; 256],
}

impl Targets {
    fn new(sets: &LogicalSets) -> Self {
        let mut w2 = [false; 256];
        let mut w4 = [false; 256];
        for &l in &sets.w2l {
            w2[sets.overlap(l) as usize] = true;
        }
        for &l in &sets.w4l {
            let o = sets.overlap(l);
            for m in 0..=255u8 {
                if m & !o == 0 && matches!(m.count_ones(), 3 | 4) {
                    w4[m as usize] = true;
                }
            }
        }
        Targets { w2, w4 }
    }
}

fn map_table(perm: &[u8; 8]) -> [u8; 256] {
    let mut t = [0u8; 256];
    for m in 1..256usize {
        let low = m.trailing_zeros() as usize;
        t[m] = t[m & (m - 1)] | 1 << perm[low];
    }
    t
}

/// Internal witness: case, faults (slot space) and the matched Q-position mask.
type RawWitness = (WitnessCase, Vec<Fault>, u8);

fn check(po: &PairOutcomes, map: &[u8; 256], tg: &Targets) -> Option<RawWitness> {
    for &(m, f) in &po.unflagged {
        let pm = map[m as usize];
        for c in [pm, !pm] {
            if c.count_ones() == 2 && tg.w2[c as usize] {
                return Some((WitnessCase::W2lSingleFault, vec![f], c));
            }
        }
    }
    for &(m, a, b) in &po.doubles {
        let pm = map[m as usize];
        for c in [pm, !pm] {
            if tg.w4[c as usize] {
                return Some((WitnessCase::W4lTwoFault, vec![a, b], c));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoGoReport {
    pub d: usize,
    pub generator: usize,
    pub q: Vec<usize>,
    pub w2l: usize,
    pub w4l: usize,
    pub orderings_tested: usize,
    pub flag_pairs_tested: usize,
    pub failures: usize,
    pub case_a: usize,
    pub case_b: usize,
    /// Configurations without a witness, as (ordering, flag pair).
    pub passes: Vec<(Vec<usize>, (usize, usize))>,
    /// Witnesses for the identity ordering under every flag pair.
    pub witnesses: Vec<NoGoWitness>,
}

impl NoGoReport {
    pub fn summary_line(&self) -> String {
        format!("orderings={} pairs={} passes={}", self.orderings_tested, self.flag_pairs_tested, self.passes.len())
    }
}

/// Searches orderings `0..orderings` (lexicographic) times all flag pairs.
pub fn exhaustive_search(code: &StabilizerCode, sets: &LogicalSets, orderings: usize, workers: usize) -> Result<NoGoReport> {
    let pairs = flag_pairs();
    let outs: Vec<PairOutcomes> = pairs.iter().map(|&p| pair_outcomes(p)).collect::<Result<_>>()?;
    let tg = Targets::new(sets);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let per: Vec<(usize, usize, Vec<(usize, usize)>)> = pool.install(|| {
        (0..orderings.min(ORDERINGS))
            .into_par_iter()
            .map(|oi| {
                let map = map_table(&nth_permutation(oi));
                let (mut a, mut b, mut passes) = (0, 0, Vec::new());
                for (pi, po) in outs.iter().enumerate() {
                    match check(po, &map, &tg) {
                        Some((WitnessCase::W2lSingleFault, ..)) => a += 1,
                        Some((WitnessCase::W4lTwoFault, ..)) => b += 1,
                        None => passes.push((oi, pi)),
                    }
                }
                (a, b, passes)
            })
            .collect()
    });
    let mut report = NoGoReport {
        d: 5,
        generator: sets.generator,
        q: sets.q.clone(),
        w2l: sets.w2l.len(),
        w4l: sets.w4l.len(),
        orderings_tested: orderings.min(ORDERINGS),
        flag_pairs_tested: pairs.len(),
        failures: 0,
        case_a: 0,
        case_b: 0,
        passes: Vec::new(),
        witnesses: Vec::new(),
    };
    for (a, b, p) in per {
        report.case_a += a;
        report.case_b += b;
        for (oi, pi) in p {
            report.passes.push((ordering_qubits(sets, &nth_permutation(oi)), pairs[pi]));
        }
    }
    report.failures = report.case_a + report.case_b;
    for &pair in &pairs {
        if let Some(w) = ordering_fails(code, sets, &sets.q, pair)? {
            report.witnesses.push(w);
        }
    }
    Ok(report)
}

fn ordering_qubits(sets: &LogicalSets, perm: &[u8; 8]) -> Vec<usize> {
    perm.iter().map(|&p| sets.q[p as usize]).collect()
}

/// Looks for a distance-reducing fault pattern of the weight-8 circuit with
/// data CNOTs in `ordering` (a permutation of Q) and flag pair `pair`.
pub fn ordering_fails(
    code: &StabilizerCode,
    sets: &LogicalSets,
    ordering: &[usize],
    pair: (usize, usize),
) -> Result<Option<NoGoWitness>> {
    let mut perm = [0u8; 8];
    for (k, qb) in ordering.iter().enumerate() {
        perm[k] = sets
            .q
            .iter()
            .position(|x| x == qb)
            .ok_or_else(|| Error::Unsupported(format!("qubit {qb} not in the weight-8 generator")))? as u8;
    }
    let mut check_perm = perm;
    check_perm.sort_unstable();
    if ordering.len() != 8 || check_perm != [0, 1, 2, 3, 4, 5, 6, 7] {
        return Err(Error::Unsupported("ordering must be a permutation of the weight-8 support".into()));
    }
    let po = pair_outcomes(pair)?;
    let Some((case, faults, cand)) = check(&po, &map_table(&perm), &Targets::new(sets)) else {
        return Ok(None);
    };
    let cand_mask = sets.q.iter().enumerate().filter(|(i, _)| cand >> i & 1 == 1).fold(0u64, |m, (_, &b)| m | 1 << b);
    let pool = match case {
        WitnessCase::W2lSingleFault => &sets.w2l,
        WitnessCase::W4lTwoFault => &sets.w4l,
    };
    let logical = *pool
        .iter()
        .find(|&&l| cand_mask & !l == 0 && (case == WitnessCase::W4lTwoFault || l & sets.q_mask() == cand_mask))
        .expect("target table built from the same sets");
    // Describe faults on the real circuit; gate indices coincide.
    let real = build_flag_circuit(ordering, PauliType::Z, pair, code.n, code.n + 1)?;
    let sched = RoundSchedule { code_name: code.name.clone(), n: code.n, circuits: vec![real], num_z: 1, policy: FlagPolicy::Straddle };
    let table = FaultTable::new(&sched)?;
    let faults = faults
        .iter()
        .map(|&f| {
            let r = table.describe(&sched, f);
            CircuitFault { gate: r.gate, outcome: f.outcome, gate_text: r.gate_text, pauli: r.pauli }
        })
        .collect();
    Ok(Some(NoGoWitness {
        ordering: ordering.to_vec(),
        flag_pair: pair,
        case,
        faults,
        error: bits_of(cand_mask),
        logical: bits_of(logical),
        completions: bits_of(logical & !cand_mask),
    }))
}

/// Outcome of replaying a witness on the full distance-5 schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayCheck {
    pub faults: usize,
    pub circuit_faults: usize,
    pub flags: u64,
    pub data_error: String,
    pub classification: Classification,
    pub equivalent_to_logical: bool,
}

/// Builds the full round with the witness ordering and flag pair on the
/// weight-8 generator, injects its faults plus one single-qubit Z fault per
/// completion qubit on other circuits, and classifies the result.
pub fn replay_witness(code: &StabilizerCode, sets: &LogicalSets, w: &NoGoWitness) -> Result<ReplayCheck> {
    let mut z = code.z_supports.clone();
    z[sets.generator] = w.ordering.clone();
    let mut x = code.x_supports.clone();
    x[sets.generator] = w.ordering.clone();
    let reordered = code.with_orders(&code.name, z, x)?;
    let mut pairs = BTreeMap::new();
    pairs.insert(8, w.flag_pair);
    pairs.insert(4, (1, 3));
    let sched = build_round(&reordered, &FlagPolicy::ByWeight(pairs))?;
    let table = FaultTable::new(&sched)?;
    let c8 = sets.generator;
    let base = table.circuit_locations[c8].start;
    let mut faults: Vec<Fault> = w.faults.iter().map(|f| Fault { location: (base + f.gate) as u32, outcome: f.outcome }).collect();
    let singles = table.enumerate_single_faults();
    for &qb in &w.completions {
        let f = singles
            .iter()
            .copied()
            .find(|&f| {
                let c = table.locations[f.location as usize].circuit;
                let e = table.effect(f);
                table.circuit_generators[c] != c8 && e.dz == 1 << qb && e.dx == 0 && !e.flag
            })
            .ok_or_else(|| Error::Unsupported(format!("no single fault leaves Z on qubit {qb}")))?;
        faults.push(f);
    }
    faults.sort_unstable();
    let out = table.propagate_all(&faults);
    let zpart = PauliOp::from_bits(code.n, 0, out.data_error.z_bits());
    let logical = w.logical.iter().fold(0u64, |m, &b| m | 1 << b);
    let diff = PauliOp::from_bits(code.n, 0, out.data_error.z_bits() ^ logical);
    Ok(ReplayCheck {
        faults: faults.len(),
        circuit_faults: w.faults.len(),
        flags: out.flag_bits,
        data_error: zpart.to_string(),
        classification: code.classify(&zpart)?,
        equivalent_to_logical: code.classify(&diff)? == Classification::InStabilizer,
    })
}

/// Number of qubits of `l` on the bottom boundary of the distance-d patch.
pub fn bottom_contacts(l: u64, d: usize) -> Result<usize> {
    Ok(color488_bottom_boundary(d)?.iter().filter(|&&b| l >> b & 1 == 1).count())
}

/// Extends a Z logical of the distance-5 patch to the distance-(5+2i) patch
/// by adding two qubits of each new strip (first pair in lexicographic
/// order).
pub fn extend_logical(l: u64, i: usize) -> Result<u64> {
    let mut cur = l;
    let mut d = 5;
    for _ in 0..i {
        let small = crate::codes::color488_n(d);
        let big = build_color488(d + 2)?;
        let new: Vec<usize> = (small..big.n).collect();
        let mut found = None;
        'search: for (ai, &a) in new.iter().enumerate() {
            for &b in &new[ai + 1..] {
                let cand = cur | 1 << a | 1 << b;
                if big.classify(&PauliOp::from_bits(big.n, 0, cand))? == Classification::Logical {
                    found = Some(cand);
                    break 'search;
                }
            }
        }
        cur = found.ok_or_else(|| Error::Unsupported(format!("no two-qubit extension onto distance {}", d + 2)))?;
        d += 2;
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub d: usize,
    pub extended: usize,
    pub all_logical: bool,
    /// Extended logicals touching the distance-5 bottom boundary in more
    /// than one qubit.
    pub multi_contact: usize,
    /// Logicals of the distance-5 sets that could not be extended.
    pub not_extendable: Vec<Vec<usize>>,
    /// Search over all orderings and pairs with only extendable logicals.
    pub search: NoGoReport,
}

impl ExtensionReport {
    pub fn summary_line(&self) -> String {
        format!(
            "d={} extended={} all_logical={} multi_contact={} not_extendable={} {}",
            self.d,
            self.extended,
            self.all_logical,
            self.multi_contact,
            self.not_extendable.len(),
            self.search.summary_line()
        )
    }
}

/// Extends every W2L/W4L member to distance `d`, checks each is a logical of
/// weight d there, and reruns the search with the extendable members only.
pub fn verify_extension(d: usize, workers: usize) -> Result<ExtensionReport> {
    if d < 7 || d % 2 == 0 {
        return Err(Error::Unsupported(format!("extension target distance {d} (use 7 or 9)")));
    }
    let big = build_color488(d)?;
    let i = (d - 5) / 2;
    let code5 = build_color488(5)?;
    let sets = build_w2l_w4l(&code5)?;
    let mut kept = LogicalSets { w2l: Vec::new(), w4l: Vec::new(), ..sets.clone() };
    let mut not_extendable = Vec::new();
    let mut all_logical = true;
    let mut extended = 0;
    let mut multi_contact = 0;
    for (src, dst) in [(&sets.w2l, &mut kept.w2l), (&sets.w4l, &mut kept.w4l)] {
        for &l in src {
            match extend_logical(l, i) {
                Ok(e) => {
                    extended += 1;
                    multi_contact += (bottom_contacts(l, 5)? != 1) as usize;
                    let op = PauliOp::from_bits(big.n, 0, e);
                    all_logical &= op.weight() == d && big.classify(&op)? == Classification::Logical;
                    dst.push(l);
                }
                Err(_) => not_extendable.push(bits_of(l)),
            }
        }
    }
    if kept.w2l.is_empty() || kept.w4l.is_empty() {
        return Err(Error::InvalidCode("no extendable logicals".into()));
    }
    let search = exhaustive_search(&code5, &kept, ORDERINGS, workers)?;
    Ok(ExtensionReport { d, extended, all_logical, multi_contact, not_extendable, search })
}
