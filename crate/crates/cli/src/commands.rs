use std::path::Path;

use anyhow::Context;
use serde_json::json;

use qed_core::dimensioning::{
    delay_staffing, joint_improvement, maximize_asymptotic, maximize_exact, refined_gamma, DelayObjective,
    GammaInterval, OptimResult,
};
use qed_core::expansion::{delay_coeffs, expansion_coeffs, idle_coeffs, queue_coeffs};
use qed_core::gap_lab::{
    fit_decay, gap_sweep, joint_tables, round_half_away, with_threads, DecayModel, SweepParams, GAP_COLUMNS,
    TABLE_R1, TABLE_R2,
};
use qed_core::markov::{
    performance_metrics, revenue_rate_hat, AdmissionPolicy, Economic, JoinSequence, RevenueStructure,
    ScaledProfile, SystemConfig,
};
use qed_core::report::{gap_table, joint_table, Cell, Table};
use qed_core::sim::{simulate, SimConfig};

use crate::args::*;
use crate::Usage;

fn policy(p: &PolicyArgs) -> anyhow::Result<AdmissionPolicy> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Usage(format!("--policy {name} requires --{name}")));
    Ok(match p.policy {
        PolicyKind::Threshold => AdmissionPolicy::threshold(p.eta)?,
        PolicyKind::Always => AdmissionPolicy::Exact(JoinSequence::always()),
        PolicyKind::Loss => AdmissionPolicy::Exact(JoinSequence::never()),
        PolicyKind::Constant => AdmissionPolicy::Exact(JoinSequence::constant(
            p.p.ok_or_else(|| Usage("--policy constant requires --p".into()))?,
        )?),
        PolicyKind::Abandonment => {
            // the servers count is filled in per system size
            AdmissionPolicy::Exact(JoinSequence::abandonment(need(p.theta, "theta")?, 1)?)
        }
        PolicyKind::Exponential => AdmissionPolicy::Profile(ScaledProfile::exponential(need(p.rate, "rate")?)?),
    })
}

/// Policy for a concrete system of `s` servers.
fn policy_for(p: &PolicyArgs, s: u64) -> anyhow::Result<AdmissionPolicy> {
    if p.policy == PolicyKind::Abandonment {
        let theta = p.theta.ok_or_else(|| Usage("--policy abandonment requires --theta".into()))?;
        return Ok(AdmissionPolicy::Exact(JoinSequence::abandonment(theta, s)?));
    }
    policy(p)
}

fn scaled_policy(p: &PolicyArgs) -> anyhow::Result<AdmissionPolicy> {
    let pol = policy(p)?;
    if !pol.is_scaled() {
        return Err(Usage(format!("{} has no scaled limit; use --policy threshold or exponential", pol.describe())).into());
    }
    Ok(pol)
}

fn econ(e: &EconArgs) -> anyhow::Result<Economic> {
    Ok(Economic::new(e.a, e.b, e.d)?)
}

fn interval(i: &IntervalArgs) -> anyhow::Result<GammaInterval> {
    Ok(GammaInterval::new(i.gamma_lo, i.gamma_hi)?)
}

fn need_s(s: Option<u64>, what: &str) -> anyhow::Result<u64> {
    s.ok_or_else(|| Usage(format!("{what} requires --s")).into())
}

fn policy_json(p: &PolicyArgs) -> serde_json::Value {
    json!({"policy": format!("{:?}", p.policy).to_lowercase(), "eta": p.eta, "p": p.p, "theta": p.theta, "rate": p.rate})
}

pub fn eval(a: &EvalArgs) -> anyhow::Result<Table> {
    let pol = policy_for(&a.policy, a.s)?;
    let cfg = SystemConfig::new(a.s, a.gamma, pol)?;
    let economics = econ(&a.econ)?;
    let m = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0))?;
    let rhat = revenue_rate_hat(&cfg, &economics)?;
    let params = json!({"s": a.s, "gamma": a.gamma, "admission": policy_json(&a.policy), "a": a.econ.a, "b": a.econ.b, "d": a.econ.d});
    let mut t = Table::new(
        "eval",
        params,
        &["s", "gamma", "lambda", "delay_prob", "rejection_prob", "mean_queue", "mean_idle", "expected_wait", "rhat_s"],
    )?;
    t.push(vec![
        a.s.into(),
        a.gamma.into(),
        cfg.lambda().into(),
        m.delay_prob.into(),
        m.rejection_prob.into(),
        m.mean_queue.into(),
        m.mean_idle.into(),
        m.expected_wait.into(),
        rhat.into(),
    ]);
    Ok(t)
}

pub fn expand(a: &ExpandArgs) -> anyhow::Result<Table> {
    let pol = scaled_policy(&a.policy)?;
    let economics = econ(&a.econ)?;
    let rc = expansion_coeffs(&economics.profile(a.gamma), &pol, a.gamma)?;
    let rows = [
        ("delay", delay_coeffs(a.gamma, &pol)?),
        ("queue", queue_coeffs(a.gamma, &pol)?),
        ("idle", idle_coeffs(a.gamma, &pol)?),
        ("rhat", (rc.r0, rc.r1)),
    ];
    let exact = match a.s {
        Some(s) => {
            let cfg = SystemConfig::new(s, a.gamma, pol.clone())?;
            let m = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0))?;
            let root = (s as f64).sqrt();
            // delay is O(1); queue and idle are O(sqrt s); rhat is already centred
            Some([m.delay_prob, m.mean_queue / root, m.mean_idle / root, revenue_rate_hat(&cfg, &economics)?])
        }
        None => None,
    };
    let params = json!({"gamma": a.gamma, "s": a.s, "admission": policy_json(&a.policy), "a": a.econ.a, "b": a.econ.b, "d": a.econ.d});
    let mut t = Table::new("expand", params, &["quantity", "order0", "order1", "approx", "exact"])?;
    for (i, (name, (c0, c1))) in rows.iter().enumerate() {
        let approx = a.s.map_or(f64::NAN, |s| c0 + c1 / (s as f64).sqrt());
        let ex = exact.map_or(f64::NAN, |e| e[i]);
        t.push(vec![(*name).into(), (*c0).into(), (*c1).into(), approx.into(), ex.into()]);
    }
    Ok(t)
}

fn optim_row(t: &mut Table, label: &str, s: Option<u64>, r: &OptimResult) {
    t.push(vec![
        label.into(),
        s.map_or(Cell::Num(f64::NAN), Cell::from),
        r.gamma_star.into(),
        r.value.into(),
        (r.iterations as u64).into(),
        r.bracket_width.into(),
        r.at_boundary.into(),
    ]);
}

pub fn optimize(a: &OptimizeArgs) -> anyhow::Result<Table> {
    let economics = econ(&a.econ)?;
    let iv = interval(&a.interval)?;
    let (label, r) = match a.order {
        Order::Exact => {
            let s = need_s(a.s, "--order exact")?;
            ("exact", maximize_exact(s, &economics, &policy_for(&a.policy, s)?, &iv)?)
        }
        Order::Zero => ("0", maximize_asymptotic(0, None, &economics, &scaled_policy(&a.policy)?, &iv)?),
        Order::One => {
            let s = need_s(a.s, "--order 1")?;
            ("1", maximize_asymptotic(1, Some(s), &economics, &scaled_policy(&a.policy)?, &iv)?)
        }
        Order::Refined => return Err(Usage("--order refined applies to delay-staff only".into()).into()),
    };
    let params = json!({"order": label, "s": a.s, "admission": policy_json(&a.policy), "a": a.econ.a, "b": a.econ.b, "d": a.econ.d,
        "gamma_lo": iv.lo, "gamma_hi": iv.hi});
    let mut t = Table::new(
        "optimize",
        params,
        &["order", "s", "gamma_star", "value", "iterations", "bracket_width", "at_boundary"],
    )?;
    optim_row(&mut t, label, a.s, &r);
    Ok(t)
}

pub fn delay_staff(a: &DelayStaffArgs) -> anyhow::Result<Table> {
    let iv = interval(&a.interval)?;
    let params = json!({"epsilon": a.epsilon, "order": format!("{:?}", a.order).to_lowercase(), "s": a.s,
        "n_max": a.n_max, "admission": policy_json(&a.policy), "gamma_lo": iv.lo, "gamma_hi": iv.hi});
    let cols = ["order", "s", "gamma", "residual", "gamma0", "terms", "fell_back"];
    let mut t = Table::new("delay_staff", params, &cols)?;
    let s_cell = |s: Option<u64>| s.map_or(Cell::Num(f64::NAN), Cell::from);
    match a.order {
        Order::Refined => {
            let s = need_s(a.s, "--order refined")?;
            let r = refined_gamma(a.epsilon, s, &scaled_policy(&a.policy)?, a.n_max, &iv)?;
            t.push(vec![
                "refined".into(),
                s.into(),
                r.gamma.into(),
                f64::NAN.into(),
                r.gamma0.into(),
                (r.terms.len() as u64).into(),
                r.fell_back.into(),
            ]);
        }
        order => {
            let (label, objective, pol) = match order {
                Order::Zero => ("0", DelayObjective::Order0, scaled_policy(&a.policy)?),
                Order::One => {
                    let s = need_s(a.s, "--order 1")?;
                    ("1", DelayObjective::Order1 { s }, scaled_policy(&a.policy)?)
                }
                _ => {
                    let s = need_s(a.s, "--order exact")?;
                    ("exact", DelayObjective::Exact { s }, policy_for(&a.policy, s)?)
                }
            };
            let r = delay_staffing(a.epsilon, objective, &pol, &iv)?;
            t.push(vec![
                label.into(),
                s_cell(a.s),
                r.gamma.into(),
                r.residual.into(),
                f64::NAN.into(),
                0u64.into(),
                false.into(),
            ]);
        }
    }
    Ok(t)
}

fn joint_box(j: &JointBoxArgs) -> anyhow::Result<(GammaInterval, GammaInterval)> {
    Ok((GammaInterval::new(j.gamma_lo, j.gamma_hi)?, GammaInterval::new(j.eta_lo, j.eta_hi)?))
}

const JOINT_COLUMNS: [&str; 10] = [
    "gamma_opt", "eta_opt", "value", "gamma_inf", "value_inf", "gamma_ratio", "pct_improvement", "gamma_opt_1dp",
    "eta_opt_1dp", "at_boundary",
];

pub fn joint(a: &JointArgs) -> anyhow::Result<Table> {
    let economics = econ(&a.econ)?;
    let (g, e) = joint_box(&a.search)?;
    let r = joint_improvement(&economics, &g, &e)?;
    let params = json!({"a": a.econ.a, "b": a.econ.b, "d": a.econ.d, "gamma_lo": g.lo, "gamma_hi": g.hi, "eta_lo": e.lo, "eta_hi": e.hi});
    let mut t = Table::new("joint", params, &JOINT_COLUMNS)?;
    t.push(vec![
        r.joint.gamma.into(),
        r.joint.eta.into(),
        r.joint.value.into(),
        r.gamma_inf.into(),
        r.value_inf.into(),
        r.gamma_ratio.into(),
        r.pct_improvement.into(),
        round_half_away(r.joint.gamma, 1).into(),
        round_half_away(r.joint.eta, 1).into(),
        r.joint.at_boundary.into(),
    ]);
    Ok(t)
}

pub fn joint_table_cmd(a: &JointTableArgs, threads: Option<usize>) -> anyhow::Result<Table> {
    let r1 = if a.r1.is_empty() { TABLE_R1.to_vec() } else { a.r1.clone() };
    let r2 = if a.r2.is_empty() { TABLE_R2.to_vec() } else { a.r2.clone() };
    let (g, e) = joint_box(&a.search)?;
    let tables = with_threads(threads, || joint_tables(&r1, &r2, &g, &e))??;
    let mut t = joint_table(&tables)?;
    t.params = json!({"r1": r1, "r2": r2, "gamma_lo": g.lo, "gamma_hi": g.hi, "eta_lo": e.lo, "eta_hi": e.hi});
    Ok(t)
}

fn sweep_params(a: &GapSweepArgs) -> anyhow::Result<SweepParams> {
    if a.s_min == 0 || a.s_min > a.s_max {
        return Err(Usage(format!("need 1 <= s-min <= s-max (got {}..{})", a.s_min, a.s_max)).into());
    }
    Ok(SweepParams {
        econ: econ(&a.econ)?,
        eta: a.eta,
        gamma_eval: a.gamma_eval,
        s_values: (a.s_min..=a.s_max).collect(),
        interval: interval(&a.interval)?,
    })
}

pub fn gap_sweep_cmd(a: &GapSweepArgs, threads: Option<usize>) -> anyhow::Result<Table> {
    let params = sweep_params(a)?;
    let report = with_threads(threads, || gap_sweep(&params))??;
    Ok(gap_table(&report)?)
}

fn read_series(path: &Path) -> anyhow::Result<Vec<(String, Vec<f64>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Usage(format!("{} is empty", path.display())))?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();
    let mut cols: Vec<(String, Vec<f64>)> = header.into_iter().map(|h| (h, vec![])).collect();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Usage(format!("{}: row {} has {} fields, expected {}", path.display(), n + 2, fields.len(), cols.len())).into());
        }
        for ((_, col), f) in cols.iter_mut().zip(fields) {
            col.push(f.trim().parse().with_context(|| format!("row {}: '{f}' is not a number", n + 2)).map_err(|e| Usage(format!("{e:#}")))?);
        }
    }
    Ok(cols)
}

fn decay_model(m: ModelArg) -> DecayModel {
    match m {
        ModelArg::FreeExponent => DecayModel::FreeExponent,
        ModelArg::InvSqrt => DecayModel::InvSqrt,
        ModelArg::Inv => DecayModel::Inv,
    }
}

pub fn fit(a: &FitArgs, threads: Option<usize>) -> anyhow::Result<Table> {
    let columns: Vec<(String, Vec<f64>)> = match &a.input {
        Some(path) => read_series(path)?,
        None => {
            let report = with_threads(threads, || gap_sweep(&SweepParams::default()))??;
            GAP_COLUMNS
                .iter()
                .enumerate()
                .map(|(i, c)| (c.to_string(), report.rows.iter().map(|r| r.values()[i]).collect()))
                .collect()
        }
    };
    let find = |name: &str| {
        columns
            .iter()
            .find(|(c, _)| c == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Usage(format!("column '{name}' not found")))
    };
    let s = find("s")?;
    let jobs: Vec<(String, DecayModel)> = match (&a.column, a.model) {
        (Some(c), Some(m)) => vec![(c.clone(), decay_model(m))],
        (Some(c), None) => vec![(c.clone(), DecayModel::FreeExponent)],
        (None, model) => {
            let pick = |d| model.map_or(d, decay_model);
            vec![
                ("err_expansion".into(), pick(DecayModel::FreeExponent)),
                ("gap_gamma_0".into(), pick(DecayModel::InvSqrt)),
                ("gap_gamma_1".into(), pick(DecayModel::Inv)),
            ]
        }
    };
    let params = json!({"input": a.input.as_ref().map(|p| p.display().to_string())});
    let mut t = Table::new("fit", params, &["column", "model", "c1", "c2", "c3", "rss", "iterations"])?;
    for (col, model) in jobs {
        let ys = find(&col)?;
        let pts: Vec<(f64, f64)> = s.iter().copied().zip(ys).collect();
        let f = fit_decay(&pts, model)?;
        t.push(vec![
            col.into(),
            model.name().into(),
            f.c1.into(),
            f.c2.into(),
            f.c3.unwrap_or(f64::NAN).into(),
            f.rss.into(),
            (f.iterations as u64).into(),
        ]);
    }
    Ok(t)
}

pub fn simulate_cmd(a: &SimulateArgs) -> anyhow::Result<Table> {
    let cfg = SystemConfig::new(a.s, a.gamma, policy_for(&a.policy, a.s)?)?;
    let exact = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0))?;
    let sim = simulate(&SimConfig {
        horizon_events: a.events,
        warmup_events: a.warmup,
        batches: a.batches,
        ..SimConfig::new(cfg, a.seed)
    })?;
    let params = json!({"s": a.s, "gamma": a.gamma, "admission": policy_json(&a.policy), "events": a.events,
        "warmup": a.warmup, "batches": a.batches, "seed": a.seed, "simulated_time": sim.simulated_time});
    let mut t = Table::new("simulate", params, &["metric", "exact", "sim_mean", "halfwidth_99", "covered"])?;
    for (name, est, v) in [
        ("delay_prob", sim.delay_prob, exact.delay_prob),
        ("rejection_prob", sim.rejection_prob, exact.rejection_prob),
        ("mean_queue", sim.mean_queue, exact.mean_queue),
        ("mean_idle", sim.mean_idle, exact.mean_idle),
        ("expected_wait", sim.expected_wait, exact.expected_wait),
    ] {
        t.push(vec![name.into(), v.into(), est.mean.into(), est.halfwidth_99.into(), est.covers(v).into()]);
    }
    Ok(t)
}
