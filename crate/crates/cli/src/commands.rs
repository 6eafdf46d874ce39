use serde::Serialize;

use qrand_core::capacity::{channel_mutual_information, holevo_information, CapacityReport};
use qrand_core::dw::{dw_sweep, DwOptions, DwReport, CSV_HEADER};
use qrand_core::protocol::{
    audit_trace, builtin, chi_converse_check, goodness, mi_audit, random_forward_protocol, random_protocol, run_sampled,
    shipped_suite, AuditReport, ChiConverse, Goodness, Protocol, SampledReport, TraceReport,
};
use qrand_core::quantum::spec_json::load_channel;
use qrand_core::quantum::{example_channel_f, maximally_entangled_state, Channel};

use crate::config::{Command, Format, RunConfig};
use crate::report::{emit, json_report, note, read_input, CliError, CliResult, Exit};

/// Slack for the χ ≤ I comparison between two numerical optima.
const CHI_LE_I_SLACK: f64 = 1e-6;

pub fn run(cfg: &RunConfig) -> CliResult<Exit> {
    match &cfg.args {
        Command::Capacity { d } => capacity(cfg, *d),
        Command::Protocol { builtin, d, trials } => protocol(cfg, builtin.as_deref(), *d, *trials),
        Command::Dw { d, n, delta, seeds, trials, mode } => dw(cfg, *d, n, *delta, *seeds, *trials, (*mode).into()),
        Command::Audit { random } => audit(cfg, *random),
    }
}

fn builtin_f(d: usize) -> CliResult<Channel> {
    if d < 2 {
        return Err(CliError::validation("--d must be at least 2"));
    }
    Ok(example_channel_f(d)?)
}

fn load_or_builtin_channel(cfg: &RunConfig, d: Option<usize>, default_d: Option<usize>) -> CliResult<(String, Channel)> {
    match (&cfg.common.input, d.or(default_d)) {
        (Some(_), Some(_)) if d.is_some() => Err(CliError::validation("give either --input or --d, not both")),
        (Some(path), _) => Ok((path.display().to_string(), load_channel(&read_input(path)?)?)),
        (None, Some(d)) => Ok((format!("F_{d}"), builtin_f(d)?)),
        (None, None) => Err(CliError::validation("a channel is required: --input FILE or --d N")),
    }
}

#[derive(Serialize)]
struct ChannelInfo {
    name: String,
    dim_in: usize,
    dim_out: usize,
}

#[derive(Serialize)]
struct CapacityBody {
    channel: ChannelInfo,
    holevo_information: CapacityReport,
    channel_mutual_information: CapacityReport,
    #[serde(rename = "gap_bits")]
    gap: f64,
    chi_le_i: bool,
}

fn capacity(cfg: &RunConfig, d: Option<usize>) -> CliResult<Exit> {
    let (name, ch) = load_or_builtin_channel(cfg, d, None)?;
    let opts = cfg.solver();
    let chi = holevo_information(&ch, &opts)?;
    let mi = channel_mutual_information(&ch, &opts)?;
    let chi_le_i = chi.value <= mi.value + CHI_LE_I_SLACK;
    let converged = chi.converged && mi.converged;
    let line = format!(
        "χ = {:.6} bits {} I = {:.6} bits",
        chi.value,
        if chi_le_i { "≤" } else { ">" },
        mi.value
    );
    let body = CapacityBody {
        channel: ChannelInfo { name, dim_in: ch.dim_in(), dim_out: ch.dim_out() },
        gap: mi.value - chi.value,
        holevo_information: chi,
        channel_mutual_information: mi,
        chi_le_i,
    };
    let text = match cfg.format {
        Format::Json => json_report(cfg, &body)?,
        Format::Csv => {
            let mut s = String::from("quantity,value_bits,upper_bound_bits,iterations,converged\n");
            for (q, r) in [("chi", &body.holevo_information), ("mutual_information", &body.channel_mutual_information)] {
                let ub = r.upper_bound.map(|u| u.to_string()).unwrap_or_default();
                s.push_str(&format!("{q},{},{ub},{},{}\n", r.value, r.iterations, r.converged));
            }
            s
        }
    };
    emit(cfg, &text)?;
    note(cfg, &line);
    Ok(if !chi_le_i {
        Exit::Violation
    } else if !converged {
        note(cfg, "solver did not converge");
        Exit::NonConvergence
    } else {
        Exit::Ok
    })
}

#[derive(Serialize)]
struct ProtocolBody {
    protocol: String,
    trace: TraceReport,
    goodness: Goodness,
    mi_audit: AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<SampledReport>,
}

fn load_protocol(cfg: &RunConfig, name: Option<&str>, d: Option<usize>) -> CliResult<Protocol> {
    let from_builtin = match (name, d) {
        (Some(_), Some(_)) => return Err(CliError::validation("give either --builtin or --d, not both")),
        (Some(n), None) => Some(n.to_string()),
        (None, Some(d)) => Some(format!("figure4:d={d}")),
        (None, None) => None,
    };
    match (&cfg.common.input, from_builtin) {
        (Some(_), Some(_)) => Err(CliError::validation("give either --input or a builtin protocol, not both")),
        (Some(path), None) => Ok(Protocol::from_json(&read_input(path)?)?),
        (None, Some(n)) => Ok(builtin(&n)?),
        (None, None) => Err(CliError::validation("a protocol is required: --input FILE, --builtin NAME or --d N")),
    }
}

fn protocol(cfg: &RunConfig, name: Option<&str>, d: Option<usize>, trials: Option<usize>) -> CliResult<Exit> {
    let p = load_protocol(cfg, name, d)?;
    let run = cfg.run_options();
    let (trace, audit) = mi_audit(&p, &run, &cfg.solver())?;
    let good = goodness(&trace, trace.c, trace.n);
    let sampled = match trials {
        Some(0) => return Err(CliError::validation("--trials must be positive")),
        Some(t) => Some(run_sampled(&p, t, cfg.common.seed, &run)?),
        None => None,
    };
    let ok = audit.passed() && good.fano_holds;
    let line = format!(
        "{}: Pr(J≠K) = {:.3e}, H(K) = {:.6} bits, net rate = {:.6} bits/use, audit violations = {}",
        trace.protocol, trace.pr_err, trace.h_k, trace.net_rate, audit.violations
    );
    let text = match cfg.format {
        Format::Json => {
            json_report(cfg, &ProtocolBody { protocol: p.name().to_string(), trace, goodness: good, mi_audit: audit, sampled })?
        }
        Format::Csv => trace.joint_csv(),
    };
    emit(cfg, &text)?;
    note(cfg, &line);
    Ok(if ok { Exit::Ok } else { Exit::Violation })
}

#[derive(Serialize)]
struct SweepSummary {
    n: usize,
    seeds: usize,
    mean_pr_err: f64,
    #[serde(rename = "mean_net_rate_bits_per_use")]
    mean_net_rate: f64,
}

#[derive(Serialize)]
struct DwBody {
    source: String,
    #[serde(rename = "h_y_bits")]
    h_y: f64,
    #[serde(rename = "h_y_given_r_bits")]
    h_y_given_r: f64,
    #[serde(rename = "i_yr_bits")]
    i_yr: f64,
    summary: Vec<SweepSummary>,
    rows: Vec<DwReport>,
}

#[allow(clippy::too_many_arguments)]
fn dw(
    cfg: &RunConfig,
    d: Option<usize>,
    ns: &[usize],
    delta: f64,
    seeds: u64,
    trials: usize,
    mode: qrand_core::dw::DwMode,
) -> CliResult<Exit> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CliError::validation("--delta must be positive"));
    }
    if ns.is_empty() || ns.contains(&0) || seeds == 0 || trials == 0 {
        return Err(CliError::validation("--n entries, --seeds and --trials must be positive"));
    }
    let (name, ch) = load_or_builtin_channel(cfg, d, Some(2))?;
    if !ch.is_qc() {
        return Err(CliError::validation("the binning source needs a channel with classical output"));
    }
    let psi = maximally_entangled_state(ch.dim_in());
    let mut opts = DwOptions { mode, trials, ..DwOptions::default() };
    if let Some(m) = cfg.max_dim_override {
        opts.max_dim = m;
    }
    let seed_list: Vec<u64> = (0..seeds).map(|s| cfg.common.seed.wrapping_add(s)).collect();
    let rows = dw_sweep(&psi, &ch, ns, delta, &seed_list, &opts)?;
    let summary: Vec<SweepSummary> = ns
        .iter()
        .map(|&n| {
            let at: Vec<&DwReport> = rows.iter().filter(|r| r.n == n).collect();
            let k = at.len() as f64;
            SweepSummary {
                n,
                seeds: at.len(),
                mean_pr_err: at.iter().map(|r| r.pr_err).sum::<f64>() / k,
                mean_net_rate: at.iter().map(|r| r.net_rate).sum::<f64>() / k,
            }
        })
        .collect();
    for s in &summary {
        note(cfg, &format!("n = {}: mean Pr(J≠K) = {:.4} over {} seeds", s.n, s.mean_pr_err, s.seeds));
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            for r in &rows {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let first = &rows[0];
            json_report(
                cfg,
                &DwBody {
                    source: format!("maximally entangled input into {name}"),
                    h_y: first.h_y,
                    h_y_given_r: first.h_y_given_r,
                    i_yr: first.i_yr,
                    summary,
                    rows,
                },
            )?
        }
    };
    emit(cfg, &text)?;
    Ok(Exit::Ok)
}

#[derive(Serialize)]
struct AuditEntry {
    protocol: String,
    violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mi_audit: Option<AuditReport>,
    goodness: Goodness,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi_converse: Option<ChiConverse>,
}

impl AuditEntry {
    fn new(trace: &TraceReport, audit: AuditReport, chi_n: Option<f64>) -> CliResult<Self> {
        let good = goodness(trace, trace.c, trace.n);
        let chi = chi_n.map(|c| chi_converse_check(trace, c)).transpose()?;
        let violations =
            audit.violations + usize::from(!good.fano_holds) + usize::from(chi.as_ref().is_some_and(|c| !c.holds));
        Ok(Self { protocol: trace.protocol.clone(), violations, mi_audit: Some(audit), goodness: good, chi_converse: chi })
    }
}

#[derive(Serialize)]
struct AuditBody {
    protocols: usize,
    violations: usize,
    entries: Vec<AuditEntry>,
}

fn audit(cfg: &RunConfig, random: u64) -> CliResult<Exit> {
    let run = cfg.run_options();
    let solver = cfg.solver();
    let mut entries = Vec::new();
    if let Some(path) = &cfg.common.input {
        let text = read_input(path)?;
        // A trace report is audited as recorded; a protocol is run first.
        if let Ok(trace) = serde_json::from_str::<TraceReport>(&text) {
            let a = audit_trace(&trace);
            entries.push(AuditEntry::new(&trace, a, None)?);
        } else {
            let p = Protocol::from_json(&text)?;
            let (trace, a) = mi_audit(&p, &run, &solver)?;
            entries.push(AuditEntry::new(&trace, a, None)?);
        }
    } else {
        for e in shipped_suite()? {
            let (trace, a) = mi_audit(&e.protocol, &run, &solver)?;
            entries.push(AuditEntry::new(&trace, a, e.chi_n)?);
        }
        for i in 0..random {
            let seed = cfg.common.seed.wrapping_add(i);
            let (trace, a) = mi_audit(&random_protocol(seed)?, &run, &solver)?;
            entries.push(AuditEntry::new(&trace, a, None)?);
            let (p, chi) = random_forward_protocol(seed)?;
            let (trace, a) = mi_audit(&p, &run, &solver)?;
            entries.push(AuditEntry::new(&trace, a, Some(chi))?);
        }
    }
    let violations: usize = entries.iter().map(|e| e.violations).sum();
    for e in entries.iter().filter(|e| e.violations > 0) {
        note(cfg, &format!("violation: {} ({} failed checks)", e.protocol, e.violations));
    }
    note(cfg, &format!("audited {} protocols, {violations} violations", entries.len()));
    let body = AuditBody { protocols: entries.len(), violations, entries };
    let text = match cfg.format {
        Format::Json => json_report(cfg, &body)?,
        Format::Csv => {
            let mut s = String::from("protocol,violations,epsilon,h_k_given_j_bits,fano_bound_bits,chi_converse_holds\n");
            for e in &body.entries {
                let chi = e.chi_converse.as_ref().map(|c| c.holds.to_string()).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{chi}\n",
                    e.protocol, e.violations, e.goodness.epsilon, e.goodness.h_k_given_j, e.goodness.fano_bound
                ));
            }
            s
        }
    };
    emit(cfg, &text)?;
    Ok(if violations == 0 { Exit::Ok } else { Exit::Violation })
}
