use flagft::circuits::build_round;
use flagft::codes::build_steane7;
use flagft::decode::{build_lut, code_capacity_lut};
use flagft::montecarlo::{collect_failures, InjectionReport, Protocol};
use flagft::{FaultContext, FlagPolicy};

#[test]
fn steane_single_faults_exhaustive() {
    let code = build_steane7();
    let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
    let ctx = FaultContext::new(&code, &sched).unwrap();
    let lut = build_lut(&ctx, 1, 1 << 20).unwrap();
    let cc = code_capacity_lut(&code, 1).unwrap();
    let proto = Protocol::new(&ctx, &lut, &cc);
    let singles = ctx.table.enumerate_single_faults();
    let mut rep = InjectionReport::default();
    // s = 1 on a clean input.
    for &f in &singles {
        rep.add(&proto.check_injection((0, 0), &[f], 1));
    }
    // r = 1: every unflagged single fault as the input error, no new faults.
    for &f in &singles {
        let o = ctx.table.propagate(f);
        if o.flag_bits == 0 {
            rep.add(&proto.check_injection((o.data_error.x_bits(), o.data_error.z_bits()), &[], 0));
        }
    }
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.trials > singles.len() as u64);
}

#[test]
fn recorded_failures_replay_as_failures() {
    let code = build_steane7();
    let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
    let ctx = FaultContext::new(&code, &sched).unwrap();
    let lut = build_lut(&ctx, 1, 1 << 20).unwrap();
    let cc = code_capacity_lut(&code, 1).unwrap();
    let proto = Protocol::new(&ctx, &lut, &cc);
    let recs = collect_failures(&proto, 9, 0, 1e-2, 10, 100_000);
    assert_eq!(recs.len(), 10);
    for r in &recs {
        assert!(r.faults.len() >= 2, "a single fault cannot fail a t=1 protocol");
        assert!(proto.replay(&r.faults()).failure);
    }
    // The JSON form round-trips.
    let text = serde_json::to_string(&recs).unwrap();
    let back: Vec<flagft::montecarlo::ReplayRecord> = serde_json::from_str(&text).unwrap();
    assert_eq!(back.len(), recs.len());
    assert!(proto.replay(&back[0].faults()).failure);
}
