use std::io::{Read, Write};

use crate::circuits::RoundSchedule;
use crate::codes::{PauliType, StabilizerCode};
use crate::error::{Error, Result};
use crate::faults::{
    data_singles, low, sector_bfs, FaultContext, Sector, SectorSingle, StopMode, ERR_MASK, LEVEL_SHIFT,
};
use crate::pauli::PauliOp;
use crate::table::FrozenTable;

/// Decoder input: syndrome bits (Z generators, then X generators) and flag
/// bits (one per circuit, Z circuits first).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FullSyndromeKey {
    pub syndrome: u64,
    pub flags: u64,
}

impl Sector {
    /// Sector key from a round-wide key.
    #[inline]
    pub fn key_from_full(&self, k: &FullSyndromeKey) -> u64 {
        let syn = match self.err_type {
            PauliType::X => k.syndrome & low(self.num_z),
            PauliType::Z => k.syndrome >> self.num_z & low(self.num_x),
        };
        self.key_from_parts(syn, self.own_flags(k.flags))
    }

    /// Inverse of [`Sector::key_from_full`].
    pub fn key_to_full(&self, key: u64) -> FullSyndromeKey {
        let (syn, own) = self.split_key(key);
        match self.err_type {
            PauliType::X => FullSyndromeKey { syndrome: syn, flags: own << self.num_z },
            PauliType::Z => FullSyndromeKey { syndrome: syn << self.num_z, flags: own },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeSource {
    Table,
    Mim(usize),
    Miss,
}

/// Lookup table for one CSS sector.
#[derive(Clone, Debug)]
pub struct SectorLut {
    pub sector: Sector,
    pub singles: Vec<SectorSingle>,
    pub table: FrozenTable,
}

impl SectorLut {
    /// Recovery and minimal fault count.
    #[inline]
    pub fn lookup(&self, key: u64) -> Option<(u64, u8)> {
        self.table.get(key).map(|v| (v & ERR_MASK, (v >> LEVEL_SHIFT) as u8))
    }

    /// Searches combinations of up to `radius` single outcomes `c`, in
    /// increasing size and lexicographic order, for `key ^ key(c)` in the
    /// table. Returns the stored recovery times the error of `c`.
    pub fn mim(&self, key: u64, radius: usize) -> Option<(u64, usize)> {
        if let Some((e, _)) = self.lookup(key) {
            return Some((e, 0));
        }
        let s = &self.singles;
        if radius >= 1 {
            for a in s {
                if let Some((e, _)) = self.lookup(key ^ a.key) {
                    return Some((e ^ a.err, 1));
                }
            }
        }
        if radius >= 2 {
            for (i, a) in s.iter().enumerate() {
                for b in &s[i + 1..] {
                    if let Some((e, _)) = self.lookup(key ^ a.key ^ b.key) {
                        return Some((e ^ a.err ^ b.err, 2));
                    }
                }
            }
        }
        if radius >= 3 {
            for (i, a) in s.iter().enumerate() {
                for (j, b) in s.iter().enumerate().skip(i + 1) {
                    let kab = key ^ a.key ^ b.key;
                    for c in &s[j + 1..] {
                        if let Some((e, _)) = self.lookup(kab ^ c.key) {
                            return Some((e ^ a.err ^ b.err ^ c.err, 3));
                        }
                    }
                }
            }
        }
        None
    }

    /// Table, then MIM, then identity.
    pub fn space_decode(&self, key: u64, radius: usize) -> (u64, DecodeSource) {
        match self.mim(key, radius) {
            Some((e, 0)) => (e, DecodeSource::Table),
            Some((e, r)) => (e, DecodeSource::Mim(r)),
            None => (0, DecodeSource::Miss),
        }
    }
}

/// Two sector tables. `sectors[0]` corrects X errors, `sectors[1]` Z errors.
#[derive(Clone, Debug)]
pub struct LookupTable {
    pub code_id: u64,
    pub t: usize,
    pub n: usize,
    pub sectors: [SectorLut; 2],
}

/// Identifier of a (code, circuits) pair, stored in table files.
pub fn code_id(code: &StabilizerCode, schedule: Option<&RoundSchedule>) -> u64 {
    let mut h = crc32fast::Hasher::new();
    h.update(code.to_json().unwrap_or_default().as_bytes());
    let mut g = crc32fast::Hasher::new();
    match schedule {
        Some(s) => {
            for c in &s.circuits {
                g.update(format!("{:?}{:?}", c.flag_pair, c.gates).as_bytes());
            }
        }
        None => g.update(b"code-capacity"),
    }
    (h.finalize() as u64) << 32 | g.finalize() as u64
}

impl LookupTable {
    pub fn len(&self) -> usize {
        self.sectors[0].table.len() + self.sectors[1].table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resident_bytes(&self) -> usize {
        self.sectors.iter().map(|s| s.table.resident_bytes()).sum()
    }

    pub fn sector(&self, t: PauliType) -> &SectorLut {
        match t {
            PauliType::X => &self.sectors[0],
            PauliType::Z => &self.sectors[1],
        }
    }

    fn join(&self, x: u64, z: u64) -> PauliOp {
        PauliOp::from_bits(self.n, x, z)
    }

    /// Exact lookup in both sectors.
    pub fn lut_decode(&self, key: &FullSyndromeKey) -> Option<PauliOp> {
        let x = self.sectors[0].lookup(self.sectors[0].sector.key_from_full(key))?;
        let z = self.sectors[1].lookup(self.sectors[1].sector.key_from_full(key))?;
        Some(self.join(x.0, z.0))
    }

    pub fn mim_decode(&self, key: &FullSyndromeKey, radius: usize) -> Option<PauliOp> {
        let x = self.sectors[0].mim(self.sectors[0].sector.key_from_full(key), radius)?;
        let z = self.sectors[1].mim(self.sectors[1].sector.key_from_full(key), radius)?;
        Some(self.join(x.0, z.0))
    }

    /// Per-sector table, MIM, identity.
    pub fn space_decode(&self, key: &FullSyndromeKey, radius: usize) -> (PauliOp, [DecodeSource; 2]) {
        let (x, sx) = self.sectors[0].space_decode(self.sectors[0].sector.key_from_full(key), radius);
        let (z, sz) = self.sectors[1].space_decode(self.sectors[1].sector.key_from_full(key), radius);
        (self.join(x, z), [sx, sz])
    }

    /// Entry count per fault count, per sector.
    pub fn level_counts(&self) -> [Vec<u64>; 2] {
        let count = |s: &SectorLut| {
            let mut v = vec![0u64; self.t + 1];
            for &(_, val) in s.table.entries() {
                v[(val >> LEVEL_SHIFT) as usize] += 1;
            }
            v
        };
        [count(&self.sectors[0]), count(&self.sectors[1])]
    }
}

/// Builds the circuit-level table for all combinations of at most `t` faults.
/// Fails with the counterexample if the fault set is not distinguishable.
pub fn build_lut(ctx: &FaultContext, t: usize, max_entries: usize) -> Result<LookupTable> {
    let mut out = Vec::with_capacity(2);
    for s in 0..2 {
        let bfs = sector_bfs(&ctx.sectors[s], &ctx.singles[s], t, StopMode::FirstViolation, max_entries)?;
        if bfs.violation.is_some() {
            let ce = match ctx.check_distinguishable(t, max_entries)? {
                crate::faults::Distinguishability::Violated(c) => c,
                crate::faults::Distinguishability::Ok { .. } => unreachable!("enumeration is deterministic"),
            };
            return Err(Error::NotDistinguishable(ce));
        }
        out.push(SectorLut { sector: ctx.sectors[s].clone(), singles: ctx.singles[s].clone(), table: bfs.table.freeze() });
    }
    let z = out.pop().expect("two sectors");
    let x = out.pop().expect("two sectors");
    Ok(LookupTable { code_id: code_id(ctx.code, Some(ctx.schedule)), t, n: ctx.code.n, sectors: [x, z] })
}

/// Table of pure data errors of weight at most `t` per sector, keyed by
/// syndrome alone; values are minimum-weight representatives.
pub fn code_capacity_lut(code: &StabilizerCode, t: usize) -> Result<LookupTable> {
    if code.n > crate::faults::MAX_DATA_QUBITS {
        return Err(Error::TooManyQubits(code.n));
    }
    let mut out = Vec::with_capacity(2);
    for ty in [PauliType::X, PauliType::Z] {
        let sector = Sector::new(code, ty);
        let singles = data_singles(&sector);
        let bfs = sector_bfs(&sector, &singles, t, StopMode::FirstViolation, usize::MAX)?;
        if let Some(v) = bfs.violation {
            return Err(Error::InvalidCode(format!(
                "weight-{} and weight-{} {:?} errors share a syndrome but differ by a logical",
                v.level_stored, v.level_new, ty
            )));
        }
        out.push(SectorLut { sector, singles, table: bfs.table.freeze() });
    }
    let z = out.pop().expect("two sectors");
    let x = out.pop().expect("two sectors");
    Ok(LookupTable { code_id: code_id(code, None), t, n: code.n, sectors: [x, z] })
}

const MAGIC: &[u8; 4] = b"FLUT";
pub const FORMAT_VERSION: u32 = 1;
/// Set in the second key word of Z-sector records.
const Z_SECTOR_BIT: u64 = 1 << 63;

fn recovery_bytes(n: usize) -> usize {
    (2 * n).div_ceil(8)
}

fn pack_recovery(n: usize, x: u64, z: u64, out: &mut Vec<u8>) {
    let bits = x as u128 | (z as u128) << n;
    out.extend_from_slice(&bits.to_le_bytes()[..recovery_bytes(n)]);
}

fn unpack_recovery(n: usize, b: &[u8]) -> (u64, u64) {
    let mut buf = [0u8; 16];
    buf[..b.len()].copy_from_slice(b);
    let bits = u128::from_le_bytes(buf);
    let m = low(n) as u128;
    ((bits & m) as u64, (bits >> n & m) as u64)
}

impl LookupTable {
    /// Writes header, fixed-width records (X sector then Z sector, each in
    /// storage order) and a trailing CRC-32 of everything before it.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(1 << 20);
        let mut crc = crc32fast::Hasher::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.code_id.to_le_bytes());
        buf.extend_from_slice(&(self.t as u32).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for (si, s) in self.sectors.iter().enumerate() {
            for &(key, val) in s.table.entries() {
                let full = s.sector.key_to_full(key);
                let tag = if si == 1 { Z_SECTOR_BIT } else { 0 };
                buf.extend_from_slice(&full.syndrome.to_le_bytes());
                buf.extend_from_slice(&(full.flags | tag).to_le_bytes());
                let e = val & ERR_MASK;
                let (x, z) = if si == 0 { (e, 0) } else { (0, e) };
                pack_recovery(self.n, x, z, &mut buf);
                buf.push((val >> LEVEL_SHIFT) as u8);
                if buf.len() >= 1 << 20 {
                    crc.update(&buf);
                    w.write_all(&buf)?;
                    buf.clear();
                }
            }
        }
        crc.update(&buf);
        w.write_all(&buf)?;
        w.write_all(&crc.finalize().to_le_bytes())?;
        Ok(())
    }

    /// Reads a table written by [`LookupTable::write_to`] for the same code
    /// and circuits; `ctx` supplies the sector data and MIM singles.
    pub fn read_from(r: &mut impl Read, ctx: &FaultContext) -> Result<Self> {
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        if data.len() < 32 || &data[..4] != MAGIC {
            return Err(Error::LutFile("bad magic".into()));
        }
        let (body, tail) = data.split_at(data.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().expect("4 bytes")) {
            return Err(Error::LutFile("CRC mismatch".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().expect("in range"));
        let u64_at = |o: usize| u64::from_le_bytes(body[o..o + 8].try_into().expect("in range"));
        if u32_at(4) != FORMAT_VERSION {
            return Err(Error::LutFile(format!("unsupported version {}", u32_at(4))));
        }
        let id = u64_at(8);
        if id != code_id(ctx.code, Some(ctx.schedule)) {
            return Err(Error::LutFile("table was built for different code or circuits".into()));
        }
        let t = u32_at(16) as usize;
        let count = u64_at(20) as usize;
        let n = ctx.code.n;
        let rec = 16 + recovery_bytes(n) + 1;
        if body.len() != 28 + count * rec {
            return Err(Error::LutFile("length does not match entry count".into()));
        }
        let mut parts: [Vec<(u64, u64)>; 2] = [Vec::new(), Vec::new()];
        for i in 0..count {
            let o = 28 + i * rec;
            let syndrome = u64_at(o);
            let flags_word = u64_at(o + 8);
            let si = (flags_word & Z_SECTOR_BIT != 0) as usize;
            let full = FullSyndromeKey { syndrome, flags: flags_word & !Z_SECTOR_BIT };
            let (x, z) = unpack_recovery(n, &body[o + 16..o + 16 + recovery_bytes(n)]);
            let level = body[o + rec - 1] as u64;
            let e = if si == 0 { x } else { z };
            parts[si].push((ctx.sectors[si].key_from_full(&full), e | level << LEVEL_SHIFT));
        }
        let [px, pz] = parts;
        let mk = |s: usize, p: Vec<(u64, u64)>| SectorLut {
            sector: ctx.sectors[s].clone(),
            singles: ctx.singles[s].clone(),
            table: FrozenTable::from_entries(p),
        };
        Ok(LookupTable { code_id: id, t, n, sectors: [mk(0, px), mk(1, pz)] })
    }
}

/// Per-type state of the adaptive repetition rule.
///
/// The fault estimate is a minimum set of rounds that explains every flagged
/// round and every syndrome change (a change between rounds i-1 and i needs
/// a fault in one of them), built greedily. Rounds in that set do not count
/// as clean repeats.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimeDecoderState {
    pub rounds: usize,
    pub estimated_faults: usize,
    pub last_syndrome: u64,
    /// Clean rounds in the current run of identical syndromes.
    pub repeats: usize,
    pub flags: u64,
    pub history: Vec<(u64, u64)>,
    last_pick: Option<usize>,
}

impl TimeDecoderState {
    /// Records one round; returns true once the latest syndrome has been seen
    /// in `max(1, t - estimate + 1)` clean rounds in a row.
    pub fn push(&mut self, syndrome: u64, flags: u64, t: usize) -> bool {
        let i = self.rounds;
        let pick = |st: &mut Self| {
            if st.last_pick != Some(i) {
                st.last_pick = Some(i);
                st.estimated_faults += 1;
            }
        };
        if i > 0 && syndrome != self.last_syndrome {
            self.repeats = 0;
            if self.last_pick != Some(i - 1) {
                pick(self);
            }
        }
        if flags != 0 {
            pick(self);
        }
        if self.last_pick != Some(i) {
            self.repeats += 1;
        }
        self.last_syndrome = syndrome;
        self.flags ^= flags;
        self.rounds += 1;
        self.history.push((syndrome, flags));
        self.repeats >= (t + 1).saturating_sub(self.estimated_faults).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeDecodeResult {
    pub key: FullSyndromeKey,
    pub z: TimeDecoderState,
    pub x: TimeDecoderState,
    pub truncated: bool,
}

/// Repeats Z-type rounds until the Z rule stops, then X-type rounds.
/// `source(type)` runs one noisy round of that type and returns the
/// measured syndrome and flags in the round-wide layout. At most
/// `max_rounds` rounds per type.
pub fn time_decode_zx(
    mut source: impl FnMut(PauliType) -> (u64, u64),
    t: usize,
    max_rounds: usize,
) -> TimeDecodeResult {
    let mut truncated = false;
    let mut run = |ty: PauliType| {
        let mut st = TimeDecoderState::default();
        loop {
            let (s, f) = source(ty);
            if st.push(s, f, t) {
                break;
            }
            if st.rounds >= max_rounds {
                truncated = true;
                break;
            }
        }
        st
    };
    let z = run(PauliType::Z);
    let x = run(PauliType::X);
    let key = FullSyndromeKey { syndrome: z.last_syndrome | x.last_syndrome, flags: z.flags | x.flags };
    TimeDecodeResult { key, z, x, truncated }
}
