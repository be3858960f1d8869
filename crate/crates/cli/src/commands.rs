//! Subcommand implementations: run the analyses and write deterministic
//! CSV reports plus a human-readable summary.
//!
//! Every rational cell is written twice, as the exact fraction and as a
//! 12-significant-digit decimal derived from it. Output iterates ordered
//! maps only, so identical configurations produce byte-identical files.

use crate::instance::{default_flag, ParsedInstance};
use anyhow::{Context, Result};
use okounkov_core::{
    body_approximation, check_divisibility_monotonicity, check_section_inclusion,
    coefficient_decay, collect_semigroup, default_schedule, limit_divisor_estimate,
    rank_ratio_check, saturation_table, sup_pole_divisor, validate_model, verdict_from_table,
    volume_sequence, Scalar, ScheduleEntry, Verdict,
};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

const DECIMALS: usize = 12;

fn dec(s: &Scalar) -> String {
    s.to_decimal(DECIMALS)
}

fn writer(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(fs::File::create(path).with_context(
        || format!("cannot create {}", path.display()),
    )?))
}

/// Findings are analysis-level failures; they drive the process exit code.
pub struct RunOutcome {
    pub findings: Vec<String>,
    pub summary: Vec<String>,
}

impl RunOutcome {
    fn new() -> Self {
        RunOutcome {
            findings: Vec::new(),
            summary: Vec::new(),
        }
    }
}

pub fn run_validate(
    inst: &ParsedInstance,
    out: &Path,
    samples: u32,
    seed: u64,
) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new();
    let report = validate_model(&inst.model, samples, seed)?;
    let mut w = writer(&out.join("validate.csv"))?;
    writeln!(w, "check,detail,status,witness")?;
    writeln!(
        w,
        "unit_piece,B_0 is the constants,{},{}",
        if report.unit_piece.passed() { "pass" } else { "fail" },
        match &report.unit_piece {
            okounkov_core::algebra::CheckOutcome::Pass => String::new(),
            okounkov_core::algebra::CheckOutcome::Fail { witness } => witness.clone(),
        }
    )?;
    for (m1, m2, check) in &report.closure {
        writeln!(
            w,
            "closure,B_{m1} * B_{m2} in B_{},{},{}",
            m1 + m2,
            if check.passed() { "pass" } else { "fail" },
            match check {
                okounkov_core::algebra::CheckOutcome::Pass => String::new(),
                okounkov_core::algebra::CheckOutcome::Fail { witness } =>
                    witness.replace(',', ";"),
            }
        )?;
    }
    let (lo, hi) = report.checked_nonempty_range;
    let tail_zeros = report.tail_zero_degrees();
    writeln!(
        w,
        "nonempty,degrees {lo}..={hi},{},{}",
        if tail_zeros.is_empty() { "pass" } else { "fail" },
        report
            .zero_degrees
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(";")
    )?;
    w.flush()?;

    outcome
        .summary
        .push(format!("validate: unit piece {}", if report.unit_piece.passed() { "ok" } else { "FAILED" }));
    let failures = report.closure_failures();
    if failures.is_empty() {
        outcome
            .summary
            .push(format!("validate: closure ok on {} sampled pairs", report.closure.len()));
    } else {
        for (m1, m2, check) in &failures {
            let witness = match check {
                okounkov_core::algebra::CheckOutcome::Fail { witness } => witness.clone(),
                _ => String::new(),
            };
            outcome
                .findings
                .push(format!("closure failure at ({m1}, {m2}): {witness}"));
        }
        outcome.summary.push(format!(
            "validate: {} closure failure(s); the family is a graded linear series but not a \
             multiplicatively closed algebra",
            failures.len()
        ));
    }
    if !report.unit_piece.passed() {
        outcome.findings.push("unit piece is not the constants".into());
    }
    if !tail_zeros.is_empty() {
        outcome.findings.push(format!(
            "zero pieces at large degrees {:?} within {:?}",
            tail_zeros, report.checked_nonempty_range
        ));
    } else if !report.zero_degrees.is_empty() {
        outcome.summary.push(format!(
            "validate: zero pieces at small degrees {:?} (allowed: nonemptiness is asymptotic)",
            report.zero_degrees
        ));
    }
    if let Some(m) = report.first_nonempty_positive {
        outcome
            .summary
            .push(format!("validate: first nonempty positive degree {m}"));
    }
    for note in &report.notes {
        outcome.summary.push(format!("note: {note}"));
    }
    Ok(outcome)
}

pub fn run_ranks(
    inst: &ParsedInstance,
    out: &Path,
    bound: u32,
    step: u32,
    window: usize,
) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new();
    let model = &inst.model;
    let seq = volume_sequence(model, bound)?;
    let mut w = writer(&out.join("volume_sequence.csv"))?;
    writeln!(w, "m,dim,v_m,v_m_decimal")?;
    for (m, v) in &seq {
        let dim = model.graded_piece(*m)?.dimension();
        writeln!(w, "{m},{dim},{v},{}", dec(v))?;
    }
    w.flush()?;

    let ratios = rank_ratio_check(model, step, bound, window)?;
    let mut w = writer(&out.join("rank_ratios.csv"))?;
    writeln!(w, "n,dim_n,dim_n_plus_{step},ratio,ratio_decimal")?;
    for e in &ratios.entries {
        match &e.ratio {
            Some(r) => writeln!(w, "{},{},{},{},{}", e.n, e.dim_lower, e.dim_upper, r, dec(r))?,
            None => writeln!(w, "{},{},{},inf,inf", e.n, e.dim_lower, e.dim_upper)?,
        }
    }
    w.flush()?;

    outcome.summary.push(format!(
        "ranks: v_m = d! dim B_m / m^d with d = {} (the factorial normalization is used \
         throughout; reported windows are truncation proxies)",
        model.dim()
    ));
    if let Some((m, v)) = seq.last() {
        outcome
            .summary
            .push(format!("ranks: v_{m} = {v} ~ {}", dec(v)));
    }
    match &ratios.max_tail_deviation {
        Some(d) => outcome.summary.push(format!(
            "ranks: max |ratio - 1| over the last {} entries = {d} ~ {}",
            ratios.window,
            dec(d)
        )),
        None => outcome.summary.push(format!(
            "ranks: infinite-ratio witnesses at n in {:?} (zero piece below a nonzero piece)",
            ratios.infinite_witnesses
        )),
    }
    outcome.summary.push(format!(
        "ranks: growth proxies of dim B_m / m^d over the window: liminf ~ {}, limsup ~ {} \
         (both shown; the asymptotic reading is ambiguous between them)",
        dec(&ratios.growth_liminf_proxy),
        dec(&ratios.growth_limsup_proxy)
    ));
    if !ratios.infinite_witnesses.is_empty() {
        outcome.findings.push(format!(
            "rank ratio blow-up at n in {:?}",
            ratios.infinite_witnesses
        ));
    }
    Ok(outcome)
}

pub fn run_cond3(
    inst: &ParsedInstance,
    out: &Path,
    p_values: &[u32],
    n_max: u32,
    epsilons: Option<&[Scalar]>,
    window: Option<usize>,
    expect_approximable: bool,
) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new();
    let model = &inst.model;
    let table = saturation_table(model, p_values, n_max)?;
    let mut schedule: Vec<ScheduleEntry> = match epsilons {
        Some(eps) => okounkov_core::schedule_for_epsilons(eps, n_max as usize),
        None => default_schedule(n_max as usize),
    };
    if let Some(wdw) = window {
        for s in &mut schedule {
            s.window = wdw;
        }
    }
    let verdict = verdict_from_table(model, &table, &schedule);

    let mut w = writer(&out.join("cond3.csv"))?;
    writeln!(w, "p,n,dim_power,dim_piece,ratio,ratio_decimal")?;
    for ((p, n), e) in &table.entries {
        writeln!(
            w,
            "{p},{n},{},{},{},{}",
            e.dim_power,
            e.dim_piece,
            e.ratio,
            dec(&e.ratio)
        )?;
    }
    w.flush()?;

    let mut w = writer(&out.join("cond3_verdict.txt"))?;
    writeln!(w, "verdict: {}", verdict.label())?;
    match &verdict {
        Verdict::Violated { witness, notes } => {
            writeln!(w, "epsilon: {}", witness.epsilon)?;
            writeln!(w, "p: {}", witness.p)?;
            writeln!(w, "n_window: {}..{}", witness.n_window.0, witness.n_window.1)?;
            writeln!(w, "bound: {} ~ {}", witness.bound, dec(&witness.bound))?;
            writeln!(w, "structural: {}", witness.structural)?;
            for n in notes {
                writeln!(w, "note: {n}")?;
            }
        }
        Verdict::ConsistentWithApproximable { notes } | Verdict::Inconclusive { notes } => {
            for n in notes {
                writeln!(w, "note: {n}")?;
            }
        }
    }
    w.flush()?;

    outcome.summary.push(format!("cond3: verdict {verdict}"));
    if expect_approximable && !verdict.is_consistent() {
        outcome.findings.push(format!(
            "expected an approximable-consistent instance, got {}",
            verdict.label()
        ));
    }
    Ok(outcome)
}

pub fn run_okounkov(inst: &ParsedInstance, out: &Path, bound: u32) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new();
    let model = &inst.model;
    let flag = match &inst.flag {
        Some(f) => f.clone(),
        None => default_flag(model)?,
    };
    let sample = collect_semigroup(model, &flag, bound)?;
    let d = flag.dim();
    let mut w = writer(&out.join("sample.csv"))?;
    let header: Vec<String> = (1..=d).map(|i| format!("v{i}")).collect();
    writeln!(w, "m,{}", header.join(","))?;
    for (m, v) in sample.points() {
        let coords: Vec<String> = v.0.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{m},{}", coords.join(","))?;
    }
    w.flush()?;

    let seq = volume_sequence(model, bound)?;
    let mut w = writer(&out.join("volume_sequence.csv"))?;
    writeln!(w, "m,v_m,v_m_decimal")?;
    for (m, v) in &seq {
        writeln!(w, "{m},{v},{}", dec(v))?;
    }
    w.flush()?;

    let body = body_approximation(&sample)?;
    let mut w = writer(&out.join("body.csv"))?;
    let header: Vec<String> = (1..=d)
        .flat_map(|i| [format!("c{i}"), format!("c{i}_decimal")])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for v in &body.vertices {
        let cells: Vec<String> = v.iter().flat_map(|c| [c.to_string(), dec(c)]).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;

    let identity = okounkov_core::check_volume_identity(model, &flag, bound)?;
    let mut w = writer(&out.join("identity.txt"))?;
    writeln!(w, "flag: {flag}")?;
    writeln!(w, "degree_bound: {bound}")?;
    let h = &identity.hypotheses;
    writeln!(w, "hypothesis nonnegative_valuations: {}", h.nonnegative)?;
    if let Some((m, v)) = &h.first_negative {
        writeln!(w, "  first negative point: level {m}, {v}")?;
    }
    writeln!(
        w,
        "hypothesis lattice_generation: rank {} index {}",
        h.lattice_rank,
        h.lattice_index
            .as_ref()
            .map(|i| i.to_string())
            .unwrap_or_else(|| "-".into())
    )?;
    match (&h.box_bound, &h.bounded) {
        (Some(b), Some(ok)) => writeln!(w, "hypothesis bounded: {ok} (box bound {b})")?,
        _ => writeln!(w, "hypothesis bounded: no instance box bound available")?,
    }
    writeln!(w, "hypothesis full_dimensional_hull: {}", h.full_dimensional)?;
    match &identity.comparison {
        None => {
            writeln!(w, "comparison: skipped (hypothesis failure)")?;
            outcome
                .summary
                .push("okounkov: volume identity hypotheses failed; comparison skipped".into());
            outcome
                .findings
                .push("volume identity hypotheses failed at truncation".into());
        }
        Some(c) => {
            writeln!(
                w,
                "d_factorial_times_body_volume: {} ~ {}",
                c.scaled_body_volume,
                dec(&c.scaled_body_volume)
            )?;
            writeln!(w, "v_last: {} ~ {}", c.last_value, dec(&c.last_value))?;
            writeln!(
                w,
                "abs_difference: {} ~ {}",
                c.abs_difference,
                dec(&c.abs_difference)
            )?;
            writeln!(w, "sequence_tail:")?;
            for (m, v) in &c.sequence_tail {
                writeln!(w, "  v_{m} = {v} ~ {}", dec(v))?;
            }
            outcome.summary.push(format!(
                "okounkov: |d! vol(body) - v_{{{bound}}}| = {} ~ {}",
                c.abs_difference,
                dec(&c.abs_difference)
            ));
        }
    }
    w.flush()?;
    outcome.summary.push(format!(
        "okounkov: {} sample points up to degree {bound}, body with {} vertices",
        sample.total_points(),
        body.vertices.len()
    ));
    Ok(outcome)
}

pub fn run_divisor(inst: &ParsedInstance, out: &Path, bound: u32) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new();
    let model = &inst.model;
    let estimate = limit_divisor_estimate(model, bound)?;

    let mut w = writer(&out.join("divisors.csv"))?;
    writeln!(w, "m,id,coefficient,coefficient_over_m,coefficient_over_m_decimal")?;
    for (m, d) in &estimate.per_degree {
        for (id, c) in d.iter() {
            let norm = Scalar::ratio(c, *m as i64);
            writeln!(w, "{m},{id},{c},{norm},{}", dec(&norm))?;
        }
    }
    w.flush()?;

    let mut w = writer(&out.join("estimate.csv"))?;
    writeln!(w, "id,sup,sup_decimal,argmax_m,chain")?;
    for (id, r) in &estimate.records {
        let chain: Vec<String> = r
            .divisor_chain
            .iter()
            .map(|(m, v)| format!("{m}:{v}"))
            .collect();
        writeln!(
            w,
            "{id},{},{},{},{}",
            r.sup,
            dec(&r.sup),
            r.argmax,
            chain.join(";")
        )?;
    }
    w.flush()?;

    let decay = coefficient_decay(model, &estimate);
    let mut w = writer(&out.join("decay.csv"))?;
    writeln!(w, "threshold_l,observed_count,analytic_count")?;
    for (l, observed, analytic) in &decay.threshold_counts {
        writeln!(
            w,
            "{l},{observed},{}",
            analytic.map(|a| a.to_string()).unwrap_or_else(|| "-".into())
        )?;
    }
    w.flush()?;

    // every divisibility pair inside the bound
    let mut pairs = Vec::new();
    for a in 1..=bound {
        for b in (2 * a..=bound).step_by(a as usize) {
            if b % a == 0 {
                pairs.push((a, b));
            }
        }
    }
    let mono = check_divisibility_monotonicity(model, &pairs)?;
    if mono.passed() {
        outcome.summary.push(format!(
            "divisor: normalized monotonicity holds on all {} divisibility pairs up to {bound}",
            mono.checked_pairs
        ));
    } else {
        for (a, b, id) in &mono.violations {
            outcome
                .findings
                .push(format!("monotonicity violated at ({a} | {b}) on {id}"));
        }
    }

    let inclusion = check_section_inclusion(model, &estimate, bound)?;
    if inclusion.passed() {
        outcome.summary.push(format!(
            "divisor: inclusion holds for every basis element up to degree {bound} against the \
             estimate at truncation {}",
            estimate.truncation
        ));
    } else {
        for f in &inclusion.failures {
            outcome.findings.push(format!(
                "inclusion failure at degree {} on {}: pole {} exceeds allowed {} (truncation \
                 too small)",
                f.degree, f.id, f.pole, f.allowed
            ));
        }
    }
    outcome.summary.push(format!(
        "divisor: estimate carries {} prime(s); largest degree divisor D_{bound} = {}",
        estimate.records.len(),
        sup_pole_divisor(model, bound)
            .map(|d| d.to_string())
            .unwrap_or_else(|_| "0".into())
    ));
    Ok(outcome)
}

/// Bounds shared by the `report` subcommand.
pub struct ReportConfig {
    pub validate_samples: u32,
    pub seed: u64,
    pub ranks_bound: u32,
    pub ranks_step: u32,
    pub window: usize,
    pub cond3_p: Vec<u32>,
    pub cond3_n: u32,
    pub okounkov_bound: u32,
    pub divisor_bound: u32,
}

pub fn run_report(inst: &ParsedInstance, out: &Path, cfg: &ReportConfig) -> Result<RunOutcome> {
    let mut total = RunOutcome::new();
    total.summary.push(format!("instance: {}", inst.name));
    total
        .summary
        .push(format!("model: {} (truncation {})", inst.model.name(), inst.model.truncation()));
    let sections: Vec<(&str, RunOutcome)> = vec![
        (
            "validate",
            run_validate(inst, &out.join("validate"), cfg.validate_samples, cfg.seed)?,
        ),
        (
            "ranks",
            run_ranks(inst, &out.join("ranks"), cfg.ranks_bound, cfg.ranks_step, cfg.window)?,
        ),
        (
            "cond3",
            run_cond3(
                inst,
                &out.join("cond3"),
                &cfg.cond3_p,
                cfg.cond3_n,
                None,
                Some(cfg.window),
                false,
            )?,
        ),
        (
            "okounkov",
            run_okounkov(inst, &out.join("okounkov"), cfg.okounkov_bound)?,
        ),
        (
            "divisor",
            run_divisor(inst, &out.join("divisor"), cfg.divisor_bound)?,
        ),
    ];
    for (name, outcome) in sections {
        total.summary.push(format!("--- {name} ---"));
        total.summary.extend(outcome.summary);
        total
            .findings
            .extend(outcome.findings.into_iter().map(|f| format!("{name}: {f}")));
    }
    Ok(total)
}

/// Write the summary file and return the process exit code.
pub fn finish(out: &Path, outcome: &RunOutcome) -> Result<i32> {
    let mut w = writer(&out.join("summary.txt"))?;
    for line in &outcome.summary {
        writeln!(w, "{line}")?;
    }
    if outcome.findings.is_empty() {
        writeln!(w, "findings: none")?;
    } else {
        writeln!(w, "findings:")?;
        for f in &outcome.findings {
            writeln!(w, "  - {f}")?;
        }
    }
    w.flush()?;
    Ok(if outcome.findings.is_empty() { 0 } else { 1 })
}
