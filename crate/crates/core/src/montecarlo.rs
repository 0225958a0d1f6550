use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::PauliType;
use crate::decode::{time_decode_zx, DecodeSource, LookupTable};
use crate::error::{Error, Result};
use crate::faults::{Fault, FaultContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    CircuitLevel,
    CodeCapacity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub regime: Regime,
}

/// Positions `< len` hit by independent Bernoulli(p) trials, via geometric
/// skips.
pub fn sample_hits(rng: &mut impl Rng, p: f64, len: usize, out: &mut Vec<usize>) {
    out.clear();
    if p <= 0.0 || len == 0 {
        return;
    }
    if p >= 1.0 {
        out.extend(0..len);
        return;
    }
    let denom = (-p).ln_1p();
    let mut pos: usize = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / denom).floor();
        if skip >= (len - pos) as f64 {
            return;
        }
        pos += skip as usize;
        out.push(pos);
        pos += 1;
        if pos >= len {
            return;
        }
    }
}

/// Outcome of one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialResult {
    pub failure: bool,
    pub rounds_z: u32,
    pub rounds_x: u32,
    pub lut_miss: u32,
    pub mim_rescue: u32,
    pub truncated: bool,
    /// Faults that occurred, sampled or injected.
    pub faults: u32,
}

/// Faults to force into specific rounds, for replay and injection.
#[derive(Clone, Debug, Default)]
pub struct Injection {
    pub input: (u64, u64),
    /// (round index within its type's phase, fault)
    pub faults: Vec<(usize, Fault)>,
}

/// Everything a circuit-level trial needs.
pub struct Protocol<'a> {
    pub ctx: &'a FaultContext<'a>,
    pub lut: &'a LookupTable,
    pub cc: &'a LookupTable,
    pub t: usize,
    pub mim_radius: usize,
    pub cc_radius: usize,
    pub max_rounds: usize,
    pub both_observables: bool,
}

/// State left by the noisy part of the protocol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProtocolOutput {
    pub x: u64,
    pub z: u64,
    /// Flags of X-type circuits, raised after the Z syndrome was fixed.
    pub pending_flags: u64,
    pub result: TrialResult,
}

fn tally(r: &mut TrialResult, s: DecodeSource) {
    match s {
        DecodeSource::Table => {}
        DecodeSource::Mim(_) => {
            r.lut_miss += 1;
            r.mim_rescue += 1;
        }
        DecodeSource::Miss => r.lut_miss += 1,
    }
}

impl<'a> Protocol<'a> {
    pub fn new(ctx: &'a FaultContext<'a>, lut: &'a LookupTable, cc: &'a LookupTable) -> Self {
        Protocol {
            ctx,
            lut,
            cc,
            t: lut.t,
            mim_radius: 3,
            cc_radius: 2,
            max_rounds: 4 * ctx.code.d,
            both_observables: false,
        }
    }

    /// Noisy rounds under the time decoder followed by the space decoder.
    pub fn run_noisy(&self, p: f64, rng: &mut impl Rng, inj: &Injection) -> ProtocolOutput {
        self.run_noisy_rec(p, rng, inj, None)
    }

    /// As [`Protocol::run_noisy`], appending every fault with its round
    /// index to `rec`.
    pub fn run_noisy_rec(
        &self,
        p: f64,
        rng: &mut impl Rng,
        inj: &Injection,
        mut rec: Option<&mut Vec<(usize, Fault)>>,
    ) -> ProtocolOutput {
        let table = &self.ctx.table;
        let (mut x, mut z) = inj.input;
        let mut hits = Vec::new();
        let mut faults: Vec<Fault> = Vec::new();
        let mut round = [0usize; 2];
        let mut total = 0u32;
        let td = time_decode_zx(
            |ty| {
                let locs = table.locations_of(ty);
                let ti = (ty == PauliType::X) as usize;
                sample_hits(rng, p, locs.len(), &mut hits);
                faults.clear();
                for &h in &hits {
                    let li = locs.start + h;
                    let k = table.effects[li].len();
                    let o = if k == 1 { 0 } else { rng.random_range(0..k) as u8 };
                    faults.push(Fault { location: li as u32, outcome: o });
                }
                for &(r, f) in &inj.faults {
                    let c = table.locations[f.location as usize].circuit;
                    if r == round[ti] && table.circuit_types[c] == ty {
                        faults.push(f);
                    }
                }
                faults.sort_unstable();
                total += faults.len() as u32;
                if let Some(r) = rec.as_deref_mut() {
                    r.extend(faults.iter().map(|&f| (round[ti], f)));
                }
                round[ti] += 1;
                let cs = match ty {
                    PauliType::Z => 0..table.num_z,
                    PauliType::X => table.num_z..table.num_circuits(),
                };
                let res = table.run_circuits(cs, (x, z), &faults);
                x = res.x;
                z = res.z;
                (res.measured, res.flags)
            },
            self.t,
            self.max_rounds,
        );
        let mut result = TrialResult {
            rounds_z: td.z.rounds as u32,
            rounds_x: td.x.rounds as u32,
            truncated: td.truncated,
            faults: total,
            ..Default::default()
        };
        let [sx, sz] = &self.lut.sectors;
        let key_x = sx.sector.key_from_parts(td.z.last_syndrome, 0);
        let (rx, src) = sx.space_decode(key_x, self.mim_radius);
        tally(&mut result, src);
        let key_z = sz.sector.key_from_full(&td.key);
        let (rz, src) = sz.space_decode(key_z, self.mim_radius);
        tally(&mut result, src);
        ProtocolOutput { x: x ^ rx, z: z ^ rz, pending_flags: sx.sector.own_flags(td.x.flags), result }
    }

    /// Ideal recovery used after the last noisy round: the circuit table
    /// (X errors keyed with the pending flags), then the code-capacity
    /// decoder when the key is absent.
    pub fn ideal_recovery(&self, x: u64, z: u64, pending_flags: u64, r: &mut TrialResult) -> (u64, u64) {
        let rec = |s: usize, e: u64, flags: u64, r: &mut TrialResult| {
            let lut = &self.lut.sectors[s];
            if let Some((v, _)) = lut.lookup(lut.sector.key_from_parts(lut.sector.syndrome(e), flags)) {
                return v;
            }
            if flags != 0 {
                let (v, src) = lut.space_decode(lut.sector.key_from_parts(lut.sector.syndrome(e), flags), self.mim_radius);
                tally(r, src);
                return v;
            }
            let c = &self.cc.sectors[s];
            c.space_decode(c.sector.syndrome(e), self.cc_radius).0
        };
        (rec(0, x, pending_flags, r), rec(1, z, 0, r))
    }

    pub fn is_failure(&self, x: u64, z: u64) -> bool {
        let [sx, sz] = &self.lut.sectors;
        sx.sector.class(x) || (self.both_observables && sz.sector.class(z))
    }

    pub fn run_trial(&self, p: f64, rng: &mut impl Rng) -> TrialResult {
        self.run_trial_with(p, rng, &Injection::default())
    }

    pub fn run_trial_with(&self, p: f64, rng: &mut impl Rng, inj: &Injection) -> TrialResult {
        self.finish(self.run_noisy(p, rng, inj))
    }

    /// Runs a trial and returns its faults for later replay.
    pub fn run_trial_recorded(&self, p: f64, rng: &mut impl Rng) -> (TrialResult, Vec<(usize, Fault)>) {
        let mut rec = Vec::new();
        let out = self.run_noisy_rec(p, rng, &Injection::default(), Some(&mut rec));
        (self.finish(out), rec)
    }

    /// Replays recorded faults without further noise.
    pub fn replay(&self, faults: &[(usize, Fault)]) -> TrialResult {
        let inj = Injection { input: (0, 0), faults: faults.to_vec() };
        self.run_trial_with(0.0, &mut trial_rng(0, 0, 0), &inj)
    }

    fn finish(&self, mut out: ProtocolOutput) -> TrialResult {
        let (rx, rz) = self.ideal_recovery(out.x, out.z, out.pending_flags, &mut out.result);
        out.result.failure = self.is_failure(out.x ^ rx, out.z ^ rz);
        out.result
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFault {
    pub round: usize,
    pub location: u32,
    pub outcome: u8,
}

/// A failing trial, reproducible from its faults alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub p: f64,
    pub p_index: u64,
    pub trial: u64,
    pub faults: Vec<ReplayFault>,
}

impl ReplayRecord {
    pub fn faults(&self) -> Vec<(usize, Fault)> {
        self.faults.iter().map(|f| (f.round, Fault { location: f.location, outcome: f.outcome })).collect()
    }
}

/// Scans trials in order and records the first `limit` failures.
pub fn collect_failures(proto: &Protocol, seed: u64, p_index: u64, p: f64, limit: usize, max_trials: u64) -> Vec<ReplayRecord> {
    let mut out = Vec::new();
    for i in 0..max_trials {
        if out.len() >= limit {
            break;
        }
        let (r, rec) = proto.run_trial_recorded(p, &mut trial_rng(seed, p_index, i));
        if r.failure {
            let faults = rec.into_iter().map(|(round, f)| ReplayFault { round, location: f.location, outcome: f.outcome }).collect();
            out.push(ReplayRecord { p, p_index, trial: i, faults });
        }
    }
    out
}

/// Code-capacity trial: depolarizing noise on every data qubit, then the
/// data-error table (with MIM up to `radius`) decodes each sector.
pub fn run_code_capacity_trial(cc: &LookupTable, p: f64, radius: usize, both: bool, rng: &mut impl Rng) -> TrialResult {
    let mut hits = Vec::new();
    sample_hits(rng, p, cc.n, &mut hits);
    let (mut x, mut z) = (0u64, 0u64);
    for &q in &hits {
        let pauli = rng.random_range(1..4u8);
        x ^= ((pauli & 1) as u64) << q;
        z ^= ((pauli >> 1) as u64) << q;
    }
    let mut r = TrialResult::default();
    let decode = |s: &crate::decode::SectorLut, e: u64, r: &mut TrialResult| {
        let (rec, src) = s.space_decode(s.sector.syndrome(e), radius);
        tally(r, src);
        e ^ rec
    };
    let rx = decode(&cc.sectors[0], x, &mut r);
    let rz = decode(&cc.sectors[1], z, &mut r);
    r.failure = cc.sectors[0].sector.class(rx) || (both && cc.sectors[1].sector.class(rz));
    r
}

/// Per-trial generator keyed by (master seed, p index, trial index).
pub fn trial_rng(seed: u64, p_index: u64, trial: u64) -> ChaCha8Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&p_index.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(s);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ps: Vec<f64>,
    pub max_samples: u64,
    pub failure_target: u64,
    pub seed: u64,
    pub workers: usize,
    pub batch: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { ps: Vec::new(), max_samples: 1_000_000, failure_target: 1000, seed: 1, workers: 1, batch: 1 << 14 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub mean_rounds: f64,
    pub lut_miss: u64,
    pub mim_rescue: u64,
}

pub const CSV_HEADER: &str = "p,trials,failures,p_L,bound_lo,bound_hi,mean_rounds,lut_miss,mim_rescue";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.p, self.trials, self.failures, self.p_l, self.bound_lo, self.bound_hi, self.mean_rounds, self.lut_miss, self.mim_rescue
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse(format!("expected 9 fields, got {}", f.len())));
        }
        let fl = |i: usize| f[i].parse::<f64>().map_err(|e| Error::Parse(format!("field {i}: {e}")));
        let int = |i: usize| f[i].parse::<u64>().map_err(|e| Error::Parse(format!("field {i}: {e}")));
        Ok(SweepRow {
            p: fl(0)?,
            trials: int(1)?,
            failures: int(2)?,
            p_l: fl(3)?,
            bound_lo: fl(4)?,
            bound_hi: fl(5)?,
            mean_rounds: fl(6)?,
            lut_miss: int(7)?,
            mim_rescue: int(8)?,
        })
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse("missing sweep CSV header".into())),
    }
    lines.map(SweepRow::parse_csv_line).collect()
}

/// Runs trials at each p until `failure_target` failures or `max_samples`
/// trials. Trials are evaluated in parallel batches and scanned in order,
/// so the result does not depend on the worker count.
pub fn run_sweep<F>(cfg: &SweepConfig, trial: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64, &mut ChaCha8Rng) -> TrialResult + Sync,
{
    let all: Vec<usize> = (0..cfg.ps.len()).collect();
    run_sweep_points(cfg, &all, trial)
}

/// Runs only the grid points `indices`; rows match those of a full sweep.
pub fn run_sweep_points<F>(cfg: &SweepConfig, indices: &[usize], trial: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64, &mut ChaCha8Rng) -> TrialResult + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let mut rows = Vec::new();
    for &pi in indices {
        let p = *cfg.ps.get(pi).ok_or_else(|| Error::Unsupported(format!("grid index {pi}")))?;
        let (mut trials, mut failures, mut rounds, mut miss, mut rescue) = (0u64, 0u64, 0u64, 0u64, 0u64);
        'outer: while trials < cfg.max_samples && (cfg.failure_target == 0 || failures < cfg.failure_target) {
            let end = (trials + cfg.batch.max(1)).min(cfg.max_samples);
            let batch: Vec<TrialResult> = pool.install(|| {
                (trials..end)
                    .into_par_iter()
                    .map(|i| trial(p, &mut trial_rng(cfg.seed, pi as u64, i)))
                    .collect()
            });
            for r in batch {
                trials += 1;
                failures += r.failure as u64;
                rounds += (r.rounds_z + r.rounds_x) as u64;
                miss += r.lut_miss as u64;
                rescue += r.mim_rescue as u64;
                if cfg.failure_target > 0 && failures >= cfg.failure_target {
                    break 'outer;
                }
            }
        }
        let (p_l, (lo, hi)) = if trials == 0 {
            (0.0, (0.0, 1.0))
        } else {
            (failures as f64 / trials as f64, likelihood_bounds(failures, trials, 1e3))
        };
        rows.push(SweepRow {
            p,
            trials,
            failures,
            p_l,
            bound_lo: lo,
            bound_hi: hi,
            mean_rounds: if trials == 0 { 0.0 } else { rounds as f64 / (2 * trials) as f64 },
            lut_miss: miss,
            mim_rescue: rescue,
        });
    }
    Ok(rows)
}

/// Values of q where the binomial likelihood drops to `1/ratio` of its
/// maximum, on each side of the sample mean.
pub fn likelihood_bounds(failures: u64, trials: u64, ratio: f64) -> (f64, f64) {
    assert!(trials >= 1 && failures <= trials);
    let (f, n) = (failures as f64, trials as f64);
    let ph = f / n;
    let log_l = |q: f64| -> f64 {
        let a = if failures == 0 { 0.0 } else { f * q.ln() };
        let b = if failures == trials { 0.0 } else { (n - f) * (-q).ln_1p() };
        a + b
    };
    let target = log_l(ph) - ratio.ln();
    let bisect = |mut lo: f64, mut hi: f64, rising: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let above = log_l(mid) >= target;
            if above == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let lo = if failures == 0 { 0.0 } else { bisect(0.0, ph, true) };
    let hi = if failures == trials { 1.0 } else { bisect(ph, 1.0, false) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pseudothreshold {
    pub value: f64,
    pub err: f64,
}

/// First crossing of the piecewise-linear curve (p, y) with y = 2p/3.
fn crossing(pts: &[(f64, f64)]) -> Option<f64> {
    let g = |(p, y): (f64, f64)| y - 2.0 * p / 3.0;
    for w in pts.windows(2) {
        let (g0, g1) = (g(w[0]), g(w[1]));
        if g0 == 0.0 {
            return Some(w[0].0);
        }
        if g0 * g1 < 0.0 {
            return Some(w[0].0 + (w[1].0 - w[0].0) * g0 / (g0 - g1));
        }
    }
    pts.last().filter(|&&pt| g(pt) == 0.0).map(|pt| pt.0)
}

/// Crossing of the interpolated sample mean with p_L = 2p/3; the error is
/// the larger distance to the crossings of the bound curves.
pub fn pseudothreshold(rows: &[SweepRow]) -> Result<Pseudothreshold> {
    let mut r: Vec<&SweepRow> = rows.iter().filter(|r| r.trials > 0).collect();
    r.sort_by(|a, b| a.p.total_cmp(&b.p));
    let curve = |f: &dyn Fn(&SweepRow) -> f64| r.iter().map(|x| (x.p, f(x))).collect::<Vec<_>>();
    let value = crossing(&curve(&|x| x.p_l)).ok_or(Error::NoCrossing)?;
    let errs: Vec<f64> = [crossing(&curve(&|x| x.bound_lo)), crossing(&curve(&|x| x.bound_hi))]
        .into_iter()
        .flatten()
        .map(|c| (c - value).abs())
        .collect();
    let err = errs.into_iter().reduce(f64::max).unwrap_or(f64::INFINITY);
    Ok(Pseudothreshold { value, err })
}

/// Experiment description accepted by the command-line tool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub code: String,
    pub ordering: String,
    pub flag_policy: String,
    pub regime: Regime,
    pub ps: Vec<f64>,
    pub t: usize,
    pub mim_radius: usize,
    pub seed: u64,
    pub failure_target: u64,
    pub max_samples: u64,
}

/// Result of randomized fault injection against both conditions of
/// t-fault tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionReport {
    pub trials: u64,
    pub condition1_failures: u64,
    pub condition2_failures: u64,
    pub logical_failures: u64,
}

impl InjectionReport {
    pub fn passed(&self) -> bool {
        self.condition1_failures == 0 && self.condition2_failures == 0 && self.logical_failures == 0
    }

    pub fn add(&mut self, o: &InjectionReport) {
        self.trials += o.trials;
        self.condition1_failures += o.condition1_failures;
        self.condition2_failures += o.condition2_failures;
        self.logical_failures += o.logical_failures;
    }
}

impl<'a> Protocol<'a> {
    /// Residual logical class per sector after ideal decoding of (x, z)
    /// with the given X-circuit flags.
    fn ideal_class(&self, x: u64, z: u64, x_flags: u64) -> Option<(bool, bool)> {
        let [sx, sz] = &self.lut.sectors;
        let dec = |s: &crate::decode::SectorLut, cc: &crate::decode::SectorLut, e: u64, flags: u64| -> Option<bool> {
            let key = s.sector.key_from_parts(s.sector.syndrome(e), flags);
            let rec = s.lookup(key).map(|v| v.0).or_else(|| cc.lookup(cc.sector.syndrome(e)).map(|v| v.0))?;
            Some(s.sector.class(e ^ rec))
        };
        Some((dec(sx, &self.cc.sectors[0], x, x_flags)?, dec(sz, &self.cc.sectors[1], z, 0)?))
    }

    /// Whether (x, z) with the given X-circuit flags matches the table's
    /// recovery for at most `s` faults.
    fn producible(&self, x: u64, z: u64, x_flags: u64, s: usize) -> bool {
        let [sx, sz] = &self.lut.sectors;
        let ok = |lut: &crate::decode::SectorLut, e: u64, flags: u64| {
            let key = lut.sector.key_from_parts(lut.sector.syndrome(e), flags);
            lut.lookup(key).is_some_and(|(rec, c)| (c as usize) <= s && !lut.sector.class(e ^ rec))
        };
        ok(sx, x, x_flags) && ok(sz, z, 0)
    }

    /// Runs one noiseless protocol with the given input error (from faults
    /// with trivial flags) and in-protocol faults placed in the first round
    /// of their phase, and checks both conditions.
    pub fn check_injection(&self, input: (u64, u64), faults: &[Fault], s: usize) -> InjectionReport {
        let inj = Injection { input, faults: faults.iter().map(|&f| (0, f)).collect() };
        let mut rng = trial_rng(0, 0, 0);
        let mut out = self.run_noisy(0.0, &mut rng, &inj);
        let mut rep = InjectionReport { trials: 1, ..Default::default() };
        let before = self.ideal_class(input.0, input.1, 0);
        let after = self.ideal_class(out.x, out.z, out.pending_flags);
        if before.is_none() || before != after {
            rep.condition1_failures = 1;
        }
        if !self.producible(out.x, out.z, out.pending_flags, s) {
            rep.condition2_failures = 1;
        }
        let (rx, rz) = self.ideal_recovery(out.x, out.z, out.pending_flags, &mut out.result);
        if self.is_failure(out.x ^ rx, out.z ^ rz) != before.is_some_and(|c| c.0 || (self.both_observables && c.1)) {
            rep.logical_failures = 1;
        }
        rep
    }

    /// Random injections: `r` faults build the input error (redrawn until
    /// their flags are trivial), `s` faults hit the protocol.
    pub fn ft_injection_test(&self, trials: u64, s: usize, r: usize, seed: u64) -> InjectionReport {
        let singles = self.ctx.table.enumerate_single_faults();
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, (s * 16 + r) as u64, i);
                let input = loop {
                    let fs: Vec<Fault> = (0..r).map(|_| singles[rng.random_range(0..singles.len())]).collect();
                    let o = self.ctx.table.propagate_all(&fs);
                    if o.flag_bits == 0 {
                        break (o.data_error.x_bits(), o.data_error.z_bits());
                    }
                };
                let fs: Vec<Fault> = (0..s).map(|_| singles[rng.random_range(0..singles.len())]).collect();
                self.check_injection(input, &fs, s)
            })
            .reduce(InjectionReport::default, |mut a, b| {
                a.add(&b);
                a
            })
    }
}
