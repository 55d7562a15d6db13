//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p astrogate --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use astrogate::astrocyte::{self, AstrocyteParams, AstrocyteState};
use astrogate::metrics::{
    accuracy, build_bin_grid, classify_confusion, encode_bits, evaluate, expected_bits, ler, BinGrid, MetricsReport,
    Phase,
};
use astrogate::network::{
    build_gate, run_simulation, run_simulation_with, GateKind, GatePreset, LogicInputs, NoNoise, StimulusProtocol,
};
use astrogate::neuron::{self, NeuronState};
use astrogate::output::run_single;
use astrogate::sweep::{self, SweepSpec, SweepSummary, TrialObservation};
use astrogate::synapse::{decay_step, SynapseState};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_inputs() -> [LogicInputs; 4] {
    LogicInputs::ALL
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

// 1. Noiseless tonic truth tables, exact metrics, < 1 s per run.
fn noiseless_truth_tables() -> Outcome {
    let mut slowest = Duration::ZERO;
    for preset in [GatePreset::OrTonic, GatePreset::AndTonic] {
        for inputs in all_inputs() {
            let cfg = build_gate(preset, inputs, 0.0, 0).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let trace = run_simulation(&cfg).map_err(|e| e.to_string())?;
            let report = evaluate(&trace, &cfg).map_err(|e| e.to_string())?;
            let elapsed = start.elapsed();
            slowest = slowest.max(elapsed);
            check(report.accuracy == 1.0 && report.ler_percent == 0.0, || {
                format!("{preset} [{inputs}]: {} observed {}", report.caption(), report.observed_bits)
            })?;
            check(elapsed < Duration::from_secs(1), || format!("{preset} [{inputs}] took {elapsed:?}"))?;
        }
    }
    Ok(format!("8 runs at accuracy=1.00, LER=0.00%; slowest run {slowest:?}"))
}

// 2. Phasic gates fire one onset spike exactly when the gate is true.
fn phasic_gates() -> Outcome {
    let mut counts = Vec::new();
    for preset in [GatePreset::OrPhasic, GatePreset::AndPhasic] {
        let kind = preset.spec().unwrap().kind;
        for inputs in all_inputs() {
            let cfg = build_gate(preset, inputs, 0.0, 0).map_err(|e| e.to_string())?;
            let trace = run_simulation(&cfg).map_err(|e| e.to_string())?;
            let spikes = trace.output_spikes();
            let want = usize::from(kind.apply(inputs));
            check(spikes.len() == want, || {
                format!("{preset} [{inputs}]: {} spikes {spikes:?}, expected {want}", spikes.len())
            })?;
            // near onset: within the first 100 ms of the ON phase
            if let Some(&t) = spikes.first() {
                check((500.0..600.0).contains(&t), || format!("{preset} [{inputs}]: spike at {t} ms"))?;
            }
            counts.push(format!("{preset}[{inputs}]={}", spikes.len()));
        }
    }
    Ok(counts.join(" "))
}

fn on_bits_set(report: &MetricsReport) -> usize {
    report
        .grid
        .bins
        .iter()
        .zip(&report.observed_bits.0)
        .filter(|(b, &bit)| b.phase == Phase::On && bit)
        .count()
}

// 3. w=0.11 AND without astrocytes misfires; astrocyte feedback suppresses it.
fn mismatch_demonstration() -> Outcome {
    let inputs = LogicInputs([true, false]);
    let mut bare = build_gate(GatePreset::AndTonic, inputs, 0.0, 0).map_err(|e| e.to_string())?;
    for s in &mut bare.synapse_params {
        s.w = 0.11;
    }
    bare.preset = GatePreset::Custom;
    let trace = run_simulation(&bare).map_err(|e| e.to_string())?;
    let report = evaluate(&trace, &bare).map_err(|e| e.to_string())?;
    let n_on = report.grid.bins.iter().filter(|b| b.phase == Phase::On).count();
    let bare_set = on_bits_set(&report);
    check(n_on == 8 && bare_set >= 4, || {
        format!("astrocytes off: {bare_set} of {n_on} ON bins set, need >= 4 of 8")
    })?;

    let denoised = build_gate(GatePreset::AndDenoised, inputs, 0.0, 0).map_err(|e| e.to_string())?;
    let gains = denoised.astro_params[0].gains();
    check(gains[1] == 0.05 && gains[2] == 1.5 && gains[3] == 10.0, || format!("unexpected gains {gains:?}"))?;
    let trace = run_simulation(&denoised).map_err(|e| e.to_string())?;
    let report = evaluate(&trace, &denoised).map_err(|e| e.to_string())?;
    let spurious = on_bits_set(&report);
    check(spurious <= 1, || format!("astrocytes on: {spurious} spurious ON bins"))?;
    Ok(format!("astrocytes off {bare_set}/{n_on} ON bins set; astrocytes on {spurious} spurious"))
}

fn default_sweep() -> Result<(SweepSummary, Duration), String> {
    let spec = SweepSpec::default();
    let start = Instant::now();
    let records = sweep::execute(&spec).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if records.len() != 800 {
        return Err(format!("sweep produced {} runs, expected 800", records.len()));
    }
    let obs: Vec<TrialObservation> = records.iter().map(TrialObservation::from).collect();
    let summary = sweep::aggregate(&obs).map_err(|e| e.to_string())?;
    Ok((summary, elapsed))
}

fn cell(summary: &SweepSummary, variant: GatePreset, inputs: &str, sigma: f64) -> Result<(f64, f64), String> {
    summary
        .cell(variant.name(), inputs, sigma)
        .map(|r| (r.acc_mean, r.ler_mean))
        .ok_or_else(|| format!("missing cell {variant} [{inputs}] sigma={sigma}"))
}

// 4. Astrocyte variants do not regress accuracy for [1 1]; OR_denoised improves LER at sigma=5 for [1 0].
fn denoising_benefit(summary: &SweepSummary, elapsed: Duration) -> Outcome {
    const TOL: f64 = 0.02;
    let mut regressions = Vec::new();
    for sigma in (1..=10).map(f64::from) {
        for (base, astro) in [
            (GatePreset::OrTonic, GatePreset::OrDenoised),
            (GatePreset::AndTonic, GatePreset::AndDenoised),
        ] {
            let (acc_base, _) = cell(summary, base, "11", sigma)?;
            let (acc_astro, _) = cell(summary, astro, "11", sigma)?;
            if acc_astro < acc_base - TOL {
                regressions.push(format!("{astro} {acc_astro:.3} < {base} {acc_base:.3} at sigma={sigma}"));
            }
        }
    }
    let (_, ler_base) = cell(summary, GatePreset::OrTonic, "10", 5.0)?;
    let (_, ler_astro) = cell(summary, GatePreset::OrDenoised, "10", 5.0)?;
    let mut failures = regressions;
    if !(ler_astro < ler_base) {
        failures.push(format!("[10] sigma=5 LER {ler_astro:.2}% not below {ler_base:.2}%"));
    }
    if elapsed >= Duration::from_secs(60) {
        failures.push(format!("sweep took {elapsed:?}"));
    }
    if failures.is_empty() {
        Ok(format!(
            "no [11] regression > {TOL}; [10] sigma=5 LER {ler_astro:.2}% < {ler_base:.2}%; sweep {elapsed:.2?}"
        ))
    } else {
        Err(format!(
            "{} (other clauses: [10] sigma=5 LER {ler_astro:.2}% vs {ler_base:.2}%, sweep {elapsed:.2?})",
            failures.join("; ")
        ))
    }
}

// 5. Mean LER for [1 1] stays below 55% for every variant and sigma.
fn ler_ceiling(summary: &SweepSummary) -> Outcome {
    let mut worst = (0.0, String::new());
    for row in summary.rows.iter().filter(|r| r.inputs == "11") {
        if row.ler_mean > worst.0 {
            worst = (row.ler_mean, format!("{} sigma={}", row.variant, row.sigma));
        }
    }
    check(worst.0 < 55.0, || format!("mean LER {:.2}% at {}", worst.0, worst.1))?;
    Ok(format!("max mean LER {:.2}% ({})", worst.0, worst.1))
}

fn regular_grid() -> BinGrid {
    let refs: Vec<f64> = (0..8).map(|k| 550.0 + 100.0 * k as f64).collect();
    build_bin_grid(&refs, &StimulusProtocol::standard(4.0)).unwrap()
}

fn centres(grid: &BinGrid, phase: Phase) -> Vec<f64> {
    grid.bins
        .iter()
        .filter(|b| b.phase == phase)
        .map(|b| (b.start + b.end) / 2.0)
        .collect()
}

// 6. Hand-built spike/bin fixtures reproduce the caption arithmetic.
fn confusion_fixtures() -> Outcome {
    let grid = regular_grid();
    let on = centres(&grid, Phase::On);
    let off = centres(&grid, Phase::Off);
    let both = LogicInputs([true, true]);

    // every ON bin answered, three spurious OFF spikes
    let mut a: Vec<f64> = on.clone();
    a.extend(&off[..3]);
    // every ON bin answered, one of them with a doublet
    let mut b: Vec<f64> = on.clone();
    b.push(on[0] + 3.0);
    // every ON bin answered, four spurious OFF spikes
    let mut c: Vec<f64> = on.clone();
    c.extend(&off[2..6]);

    let cases = [(a, 13.0 / 16.0, 18.75, "0.81"), (b, 16.0 / 17.0, 0.0, "0.94"), (c, 0.75, 25.0, "0.75")];
    let mut out = Vec::new();
    for (spikes, acc, ler_pct, shown) in cases {
        let mut sorted = spikes;
        sorted.sort_by(f64::total_cmp);
        let r = MetricsReport::from_grid(grid.clone(), &sorted, GateKind::Or, both).map_err(|e| e.to_string())?;
        let want = format!("accuracy={shown}, LER={ler_pct:.2}%");
        check(r.accuracy == acc && r.ler_percent == ler_pct && r.caption() == want, || {
            format!("got {} ({}), want {want}", r.caption(), r.accuracy)
        })?;
        out.push(r.caption());
    }
    Ok(out.join(" | "))
}

// 7. Dynamics oracles.
fn dynamics_oracles() -> Outcome {
    // flux at (1, 1) against exact rational arithmetic
    let p = AstrocyteParams::default();
    let k2_4 = q(9, 10).pow(4);
    let exact = q(13, 100) * q(1, 2) - q(1, 2) * (q(1, 1) / (k2_4 + q(1, 1))) - q(4, 1000);
    let exact = exact.to_f64().unwrap();
    let f = astrocyte::flux(1.0, 1.0, &p);
    check((f - exact).abs() <= 1e-12, || format!("flux(1,1)={f} vs exact {exact}"))?;

    // neuron fixed point
    let tonic = neuron::preset("tonic").map_err(|e| e.to_string())?.params;
    let mut s = NeuronState::new(-70.0, -14.0);
    for _ in 0..10_000 {
        s = neuron::step(&s, &tonic, 0.0, 0.5).map_err(|e| e.to_string())?;
        check(
            (s.v + 70.0).abs() <= 2.0 * 70.0 * f64::EPSILON && (s.u + 14.0).abs() <= 2.0 * 14.0 * f64::EPSILON && !s.fired,
            || format!("fixed point drifted to ({}, {})", s.v, s.u),
        )?;
    }

    // conductance decay against (19/20)^n
    let mut g = SynapseState { g_syn: 1.0 };
    let mut closed = q(1, 1);
    for n in 1..=200 {
        g = decay_step(g, 10.0, 0.5);
        closed *= q(19, 20);
        let c = closed.to_f64().unwrap();
        check((g.g_syn - c).abs() <= 2.0 * n as f64 * f64::EPSILON * c, || {
            format!("decay n={n}: {} vs {c}", g.g_syn)
        })?;
    }

    // mediators confined to [0, 1] under random drive
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut st = AstrocyteState {
        s_m: rng.gen(),
        g_m: rng.gen(),
        ..Default::default()
    };
    for k in 0..1_000_000 {
        let g_syn: f64 = rng.gen_range(0.0..5.0);
        st.c = rng.gen_range(0.0..3.0);
        let s_m = astrocyte::sm_step(&st, g_syn, &p, 0.5);
        let g_m = astrocyte::gm_step(&st, &p, 0.5);
        st.s_m = s_m;
        st.g_m = g_m;
        check((0.0..=1.0).contains(&s_m) && (0.0..=1.0).contains(&g_m), || {
            format!("step {k}: S_m={s_m} G_m={g_m}")
        })?;
    }

    // sigma = 0 equals the noise-free build bit for bit
    for preset in GatePreset::REGISTERED {
        let cfg = build_gate(preset, LogicInputs([true, true]), 0.0, 99).map_err(|e| e.to_string())?;
        let a = run_simulation(&cfg).map_err(|e| e.to_string())?;
        let b = run_simulation_with(&cfg, &mut NoNoise).map_err(|e| e.to_string())?;
        check(a == b, || format!("{preset}: sigma=0 trace differs from noise-free trace"))?;
    }

    // same seed, byte-identical files
    let cfg = build_gate(GatePreset::AndDenoised, LogicInputs([true, false]), 5.0, 1234).map_err(|e| e.to_string())?;
    let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let o1 = run_single(&cfg, &[], d1.path()).map_err(|e| e.to_string())?;
    let o2 = run_single(&cfg, &[], d2.path()).map_err(|e| e.to_string())?;
    for (x, y) in [(&o1.trace_path, &o2.trace_path), (&o1.metrics_path, &o2.metrics_path)] {
        let bx = std::fs::read(x).map_err(|e| e.to_string())?;
        let by = std::fs::read(y).map_err(|e| e.to_string())?;
        check(bx == by, || format!("{} differs between identical runs", x.display()))?;
    }
    Ok(format!("flux(1,1)={f:.10}; fixed point, decay, mediator bounds, sigma=0 and seed determinism hold"))
}

fn random_grid(rng: &mut ChaCha8Rng) -> BinGrid {
    let protocol = StimulusProtocol::standard(4.0);
    let n = rng.gen_range(2..=12);
    let mut refs: Vec<f64> = (0..n).map(|_| rng.gen_range(500.0..1500.0)).collect();
    refs.sort_by(f64::total_cmp);
    refs.dedup();
    if refs.len() < 2 {
        refs = vec![600.0, 700.0];
    }
    build_bin_grid(&refs, &protocol).unwrap()
}

// 8. Randomized metrics invariants.
fn metrics_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..10_000 {
        let grid = random_grid(&mut rng);
        let kind = if rng.gen() { GateKind::Or } else { GateKind::And };
        let inputs = LogicInputs([rng.gen(), rng.gen()]);
        let expected = expected_bits(kind, inputs, &grid);

        // spikes: at most one per bin, placed inside the bin
        let mut single = Vec::new();
        for bin in grid.bins.iter().filter(|b| b.end > b.start) {
            if rng.gen_bool(0.5) {
                single.push(rng.gen_range(bin.start..bin.end));
            }
        }
        single.sort_by(f64::total_cmp);
        let observed = encode_bits(&single, &grid);
        let l = ler(&observed, &expected).map_err(|e| e.to_string())?;
        let conf = classify_confusion(&single, &grid, &expected);
        let acc = accuracy(&conf).map_err(|e| e.to_string())?;
        check((acc - (1.0 - l / 100.0)).abs() <= 1e-12, || format!("case {case}: accuracy {acc} vs LER {l}"))?;

        // extra spikes in correct 1-bins leave the LER unchanged
        let mut extra = single.clone();
        for (bin, (&o, &e)) in grid.bins.iter().zip(observed.0.iter().zip(&expected.0)) {
            if o && e {
                for _ in 0..rng.gen_range(0..4) {
                    extra.push(rng.gen_range(bin.start..bin.end));
                }
            }
        }
        extra.sort_by(f64::total_cmp);
        let l2 = ler(&encode_bits(&extra, &grid), &expected).map_err(|e| e.to_string())?;
        check(l2 == l, || format!("case {case}: LER changed {l} -> {l2}"))?;

        // plus arbitrary spikes anywhere in the recording
        for _ in 0..rng.gen_range(0..5) {
            extra.push(rng.gen_range(0.0..2500.0));
        }
        // totals identity on the unrestricted train
        extra.sort_by(f64::total_cmp);
        let conf = classify_confusion(&extra, &grid, &expected);
        let want: usize = grid.bins.iter().map(|b| b.count(&extra).max(1)).sum();
        check(conf.total() == want, || format!("case {case}: total {} vs {want}", conf.total()))?;
        check(conf.tp + conf.fn_ == expected.0.iter().filter(|&&b| b).count(), || {
            format!("case {case}: TP+FN does not match expected ones")
        })?;
    }
    Ok("10000 randomized instances".into())
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let sweep_data = panic::catch_unwind(default_sweep).unwrap_or_else(|_| Err("sweep panicked".into()));

    let results: Vec<(&str, Outcome)> = vec![
        ("1 noiseless truth tables", guarded(noiseless_truth_tables)),
        ("2 phasic gates", guarded(phasic_gates)),
        ("3 mismatch demonstration", guarded(mismatch_demonstration)),
        (
            "4 denoising benefit",
            match &sweep_data {
                Ok((s, t)) => guarded(|| denoising_benefit(s, *t)),
                Err(e) => Err(e.clone()),
            },
        ),
        (
            "5 LER ceiling",
            match &sweep_data {
                Ok((s, _)) => guarded(|| ler_ceiling(s)),
                Err(e) => Err(e.clone()),
            },
        ),
        ("6 confusion fixtures", guarded(confusion_fixtures)),
        ("7 dynamics oracles", guarded(dynamics_oracles)),
        ("8 metrics invariants", guarded(metrics_invariants)),
    ];

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
