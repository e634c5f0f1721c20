use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use inject_core::experiments::{
    decode_trace, fig2_instance, injection_setup, named_code, run_config, Artifact, AuditInstance, ExperimentConfig, Mode, RunOptions, RunOutput,
};
use inject_core::distance::SearchBudget;
use inject_core::par::{with_workers, Execution};
use inject_core::spacetime::{build_spacetime, verify_spacetime_consistency};
use inject_core::surgery::{bounded_pair_counterexample, verify_surgery_conditions, DeformedCode};
use inject_core::BitMatrix;
use serde_json::json;

#[derive(Parser)]
#[command(name = "inject", version, about = "Magic state injection into qLDPC codes by code surgery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named code and check its invariants.
    Code {
        #[command(subcommand)]
        verb: BuildVerb,
    },
    /// Build the deformed code of the configured injection.
    Surgery {
        #[command(subcommand)]
        verb: BuildVerb,
    },
    /// Build the spacetime code of the configured injection.
    Spacetime {
        #[command(subcommand)]
        verb: BuildVerb,
    },
    Audit {
        #[command(subcommand)]
        verb: AuditVerb,
    },
    Sim {
        #[command(subcommand)]
        verb: RunVerb,
    },
    /// Per-shot decoding trace of the first configured point.
    Decode(Common),
    Distill {
        #[command(subcommand)]
        verb: SweepVerb,
    },
    Experiment {
        #[command(subcommand)]
        verb: RunVerb,
    },
}

#[derive(Subcommand)]
enum BuildVerb {
    Build(Common),
}

#[derive(Subcommand)]
enum AuditVerb {
    /// Error-wise distance bounds of the deformed and spacetime codes.
    Theorem1(Common),
    /// Exhaustive bounded-pair check of the thickened glue.
    BoundedPair(Common),
}

#[derive(Subcommand)]
enum RunVerb {
    Run(Common),
}

#[derive(Subcommand)]
enum SweepVerb {
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Code name for `code build`: bb18, bb90 or surface:<d>.
    #[arg(long)]
    code: Option<String>,
    /// Stop sampling after this many seconds and report partial results.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Audit instance: fig2 or injection.
    #[arg(long, value_parser = parse_instance)]
    instance: Option<AuditInstance>,
    /// Weight cap of the distance audit.
    #[arg(long)]
    cap: Option<usize>,
}

fn parse_instance(s: &str) -> Result<AuditInstance, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown instance {s:?}; expected fig2 or injection"))
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load(c: &Common, mode: Option<Mode>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::new(mode.unwrap_or(Mode::Audit)),
    };
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = c.shots {
        cfg.shots = s;
    }
    if let Some(i) = c.instance {
        cfg.audit_instance = i;
    }
    if let Some(cap) = c.cap {
        cfg.audit_cap = cap;
    }
    cfg.validate().map_err(|e| Usage(format!("invalid config: {e}")))?;
    Ok(cfg)
}

fn options(c: &Common) -> RunOptions {
    RunOptions {
        exec: Execution::default(),
        deadline: c.time_budget.map(|s| Instant::now() + Duration::from_secs_f64(s)),
    }
}

fn json_output(cfg: &ExperimentConfig, name: &str, value: serde_json::Value, passed: bool) -> RunOutput {
    let mut body = serde_json::Map::new();
    body.insert("config_sha256".into(), json!(cfg.hash()));
    body.insert("passed".into(), json!(passed));
    if let serde_json::Value::Object(m) = value {
        body.extend(m);
    }
    let value = serde_json::Value::Object(body);
    RunOutput {
        artifacts: vec![Artifact {
            name: name.into(),
            contents: serde_json::to_string_pretty(&value).expect("json") + "\n",
        }],
        passed,
        report: value,
    }
}

fn supports(m: &BitMatrix) -> Vec<Vec<usize>> {
    (0..m.rows()).map(|r| m.row(r).iter_ones().collect()).collect()
}

fn instance(cfg: &ExperimentConfig) -> anyhow::Result<DeformedCode> {
    Ok(match cfg.audit_instance {
        AuditInstance::Fig2 if cfg.mode == Mode::Audit => fig2_instance(cfg.d_r)?,
        _ => injection_setup(&cfg.register, &cfg.noisy, &cfg.targets, cfg.d_r, cfg.policy)?.deformed,
    })
}

fn code_build(c: &Common) -> anyhow::Result<RunOutput> {
    let cfg = load(c, Some(Mode::Audit))?;
    let name = c.code.clone().unwrap_or_else(|| cfg.register.clone());
    let (code, _) = named_code(&name).map_err(|e| Usage(e.to_string()))?;
    let valid = code.validate().is_ok();
    let value = json!({
        "code": name,
        "n": code.n(),
        "k": code.k(),
        "h_x": supports(&code.h_x),
        "h_z": supports(&code.h_z),
        "j_x": supports(&code.j_x),
        "j_z": supports(&code.j_z),
    });
    Ok(json_output(&cfg, "code.json", value, valid))
}

fn surgery_build(c: &Common) -> anyhow::Result<RunOutput> {
    let cfg = load(c, None)?;
    let dc = instance(&cfg)?;
    let rep = verify_surgery_conditions(&dc);
    let value = json!({
        "n": dc.n(),
        "r_g": dc.r_g(),
        "n_g": dc.n_g(),
        "r_m": dc.r_m(),
        "bar_h_x": supports(&dc.bar_h_x),
        "bar_h_z": supports(&dc.bar_h_z),
        "conditions": rep,
    });
    Ok(json_output(&cfg, "surgery.json", value, rep.all_pass()))
}

fn spacetime_build(c: &Common) -> anyhow::Result<RunOutput> {
    let cfg = load(c, None)?;
    let dc = instance(&cfg)?;
    let sc = build_spacetime(&dc, cfg.d_t)?;
    let rep = verify_spacetime_consistency(&sc, &dc, 64, cfg.seed);
    let shape = |m: &BitMatrix| [m.rows(), m.cols()];
    let value = json!({
        "d_t": cfg.d_t,
        "h_st_x": shape(&sc.h_st_x),
        "h_st_z": shape(&sc.h_st_z),
        "j_st_x": shape(&sc.j_st_x),
        "j_st_z": shape(&sc.j_st_z),
        "consistency": rep,
    });
    Ok(json_output(&cfg, "spacetime.json", value, rep.all_pass()))
}

fn bounded_pair(c: &Common) -> anyhow::Result<RunOutput> {
    let cfg = load(c, Some(Mode::Audit))?;
    let dc = instance(&cfg)?;
    let g = &dc.glue;
    let cex = bounded_pair_counterexample(&g.h_g, &g.h_m, &g.s, cfg.d_r, SearchBudget::default())?;
    let value = json!({
        "instance": cfg.audit_instance,
        "d_r": cfg.d_r,
        "r_g": g.h_g.rows(),
        "counterexample": cex.as_ref().map(|v| v.iter_ones().collect::<Vec<_>>()),
    });
    Ok(json_output(&cfg, "bounded_pair.json", value, cex.is_none()))
}

fn audit_theorem1(c: &Common) -> anyhow::Result<RunOutput> {
    Ok(run_config(&load(c, Some(Mode::Audit))?, options(c))?)
}

fn sim_run(c: &Common) -> anyhow::Result<RunOutput> {
    let cfg = load(c, None)?;
    if !matches!(cfg.mode, Mode::Memory | Mode::Surgery) {
        bail!(Usage("sim run needs a memory or surgery config".into()));
    }
    Ok(run_config(&cfg, options(c))?)
}

fn decode(c: &Common) -> anyhow::Result<RunOutput> {
    Ok(decode_trace(&load(c, None)?, options(c))?)
}

fn distill_sweep(c: &Common) -> anyhow::Result<RunOutput> {
    Ok(run_config(&load(c, Some(Mode::Distill))?, options(c))?)
}

fn experiment_run(c: &Common) -> anyhow::Result<RunOutput> {
    if c.config.is_none() {
        bail!(Usage("experiment run needs --config".into()));
    }
    Ok(run_config(&load(c, None)?, options(c))?)
}

type Handler = fn(&Common) -> anyhow::Result<RunOutput>;

fn dispatch(command: Command) -> (Common, Handler) {
    match command {
        Command::Code { verb: BuildVerb::Build(c) } => (c, code_build),
        Command::Surgery { verb: BuildVerb::Build(c) } => (c, surgery_build),
        Command::Spacetime { verb: BuildVerb::Build(c) } => (c, spacetime_build),
        Command::Audit { verb: AuditVerb::Theorem1(c) } => (c, audit_theorem1),
        Command::Audit { verb: AuditVerb::BoundedPair(c) } => (c, bounded_pair),
        Command::Sim { verb: RunVerb::Run(c) } => (c, sim_run),
        Command::Decode(c) => (c, decode),
        Command::Distill { verb: SweepVerb::Sweep(c) } => (c, distill_sweep),
        Command::Experiment { verb: RunVerb::Run(c) } => (c, experiment_run),
    }
}

fn execute(cli: Cli) -> anyhow::Result<RunOutput> {
    let (c, handler) = dispatch(cli.command);
    let out = with_workers(c.workers, || handler(&c))?;
    out.write_to(&c.out_dir).with_context(|| format!("writing {}", c.out_dir.display()))?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            for a in &out.artifacts {
                println!("wrote {}", a.name);
            }
            println!("{}", if out.passed { "PASS" } else { "FAIL" });
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Usage>().is_some() { 2 } else { 1 })
        }
    }
}
