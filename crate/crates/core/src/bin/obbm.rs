use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use obbm::bench::{self, BenchConfig, MetaJob, PolicySpec, TrainJob, TuneJob, VerifyJob};
use obbm::generators::{generate, GeneratorConfig};
use obbm::neural::{self, encode_state, load_model, save_model, NodeRef};
use obbm::{dp, Error, Instance, MatchingState, Result};

#[derive(Parser)]
#[command(name = "obbm", version, about = "Online Bayesian bipartite matching lab")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON job description for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample instances from a generator config.
    Generate {
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Exact expected value of OPT_on for an instance file.
    Vtg { instance: PathBuf },
    /// Play episodes of one policy on an instance file.
    Simulate {
        instance: PathBuf,
        /// Policy name (greedy, lp-round, opt-on, skip) or a JSON policy spec.
        #[arg(long, default_value = "greedy")]
        policy: String,
        #[arg(long, default_value_t = 5)]
        realizations: usize,
    },
    /// Run a benchmark grid and write CSV and JSON results.
    Bench,
    /// Grid-search the greedy-t threshold on validation instances.
    TuneThreshold,
    /// Run the locality verifiers and print one line per check.
    VerifyLocality,
    /// Train a VTG model on teacher-forced samples.
    Train,
    /// Model estimates for the first arrival of an instance.
    Predict {
        #[arg(long)]
        model: PathBuf,
        instance: PathBuf,
    },
    /// Compare a model's policy to greedy and OPT_on on an instance file.
    EvalPolicy {
        #[arg(long)]
        model: PathBuf,
        instance: PathBuf,
        #[arg(long, default_value_t = 5)]
        realizations: usize,
    },
    /// Fit the regime regressor and compare it to the ratio threshold.
    Meta,
    /// Rerun a benchmark config at several noise levels.
    NoiseSweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.25,0.5,1")]
        rho: Vec<f64>,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedFile { path: path.to_path_buf(), reason: e.to_string() })
}

fn need_config(cli: &Cli) -> Result<&Path> {
    cli.config.as_deref().ok_or_else(|| Error::InvalidConfig("this subcommand needs --config <json>".into()))
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn print(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn parse_policy(s: &str) -> Result<PolicySpec> {
    if s.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    Ok(serde_json::from_value(json!({ "kind": s }))?)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Generate { count } => {
            let cfg: GeneratorConfig = read_json(need_config(cli)?)?;
            cfg.validate()?;
            let insts: Vec<Instance> = (0..*count)
                .map(|i| generate(&cfg, obbm::rng::derive(cli.seed, &[obbm::rng::tags::INSTANCE, i as u64])))
                .collect::<Result<_>>()?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    for (i, inst) in insts.iter().enumerate() {
                        inst.save(dir.join(format!("instance-{i:04}.json")))?;
                    }
                    eprintln!("wrote {} instances to {}", insts.len(), dir.display());
                }
                None => print(&insts)?,
            }
        }
        Cmd::Vtg { instance } => {
            let inst = Instance::load(instance)?;
            print(&json!({ "vtg": dp::value(&inst)? }))?;
        }
        Cmd::Simulate { instance, policy, realizations } => {
            let inst = Instance::load(instance)?;
            let p = parse_policy(policy)?.build(&base_of(instance))?;
            let out = bench::competitive_ratio(&inst, p.as_ref(), *realizations, cli.seed)?;
            print(&out)?;
        }
        Cmd::Bench => {
            let path = need_config(cli)?;
            let cfg = BenchConfig::load(path)?;
            let run = bench::run_bench(&cfg, &base_of(path), cli.jobs)?;
            let (csv, js) = bench::write_outputs(&run, &out_dir(cli), "bench")?;
            for s in &run.report.summaries {
                println!("{:<16} {:<12} mean CR {}", s.config_id, s.policy, fmt_cr(s.mean_cr));
            }
            eprintln!("wrote {} and {}", csv.display(), js.display());
        }
        Cmd::TuneThreshold => {
            let job: TuneJob = read_json(need_config(cli)?)?;
            let tuning = bench::with_jobs(cli.jobs, || job.run(cli.seed))??;
            print(&tuning)?;
        }
        Cmd::VerifyLocality => {
            let job = match &cli.config {
                Some(p) => read_json(p)?,
                None => VerifyJob::default(),
            };
            let reports = bench::with_jobs(cli.jobs, || job.run(cli.seed))??;
            for r in &reports {
                println!("{}", r.line());
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("locality.json"), serde_json::to_string_pretty(&reports)?)?;
            }
            return Ok(reports.iter().all(|r| r.pass));
        }
        Cmd::Train => {
            let job: TrainJob = read_json(need_config(cli)?)?;
            let outcome = bench::with_jobs(cli.jobs, || job.run(cli.seed))??;
            let dir = out_dir(cli);
            std::fs::create_dir_all(&dir)?;
            save_model(&outcome.model, dir.join("model.json"))?;
            std::fs::write(
                dir.join("curve.json"),
                serde_json::to_string_pretty(&json!({
                    "initial_loss": outcome.initial_loss,
                    "final_loss": outcome.final_loss,
                    "epochs": outcome.curve,
                }))?,
            )?;
            println!("loss {:.6} -> {:.6}", outcome.initial_loss, outcome.final_loss);
        }
        Cmd::Predict { model, instance } => {
            let m = load_model(model)?;
            let inst = Instance::load(instance)?;
            let Some(t) = (0..inst.n_online).find(|&t| inst.arrival_probs[t] > 0.0) else {
                return Err(Error::InvalidParameter("no online node can arrive".into()));
            };
            let mut state = MatchingState::initial(&inst);
            state.t = t;
            state.arrived = true;
            let fg = encode_state(&inst, &state)?;
            let y = m.forward(&fg)?;
            let matches: Vec<_> = state
                .available
                .iter()
                .filter(|&u| inst.weight(t, u).is_some())
                .map(|u| json!({ "offline": u, "estimate": y[fg.position(NodeRef::Offline(u)).unwrap()] }))
                .collect();
            print(&json!({
                "t": t,
                "skip": y[fg.skip],
                "match": matches,
                "action": neural::neural_action(&m, &inst, &state)?.to_string(),
            }))?;
        }
        Cmd::EvalPolicy { model, instance, realizations } => {
            let inst = Instance::load(instance)?;
            let base = base_of(model);
            let name = model.file_name().map(PathBuf::from).unwrap_or_default();
            let specs = [
                PolicySpec::Neural { model: name, name: None },
                PolicySpec::Greedy,
                PolicySpec::OptOn { dp_limit: dp::DEFAULT_DP_LIMIT },
            ];
            let mut rows = Vec::new();
            for spec in &specs {
                let p = spec.build(&base)?;
                let cr = bench::competitive_ratio(&inst, p.as_ref(), *realizations, cli.seed)?.cr;
                let expected = if inst.n_online <= dp::ENUMERATION_CAP {
                    Some(dp::policy_expected_value(&inst, p.as_ref())?)
                } else {
                    None
                };
                rows.push(json!({ "policy": p.id(), "cr": cr, "expected_value": expected }));
            }
            print(&json!({ "vtg": dp::value(&inst).ok(), "policies": rows }))?;
        }
        Cmd::Meta => {
            let path = need_config(cli)?;
            let job: MetaJob = read_json(path)?;
            let cmp = bench::with_jobs(cli.jobs, || job.run(&base_of(path), cli.seed))??;
            println!("agreement with ratio threshold: {:.3}", cmp.agreement);
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&cmp)?)?;
            }
        }
        Cmd::NoiseSweep { rho } => {
            let path = need_config(cli)?;
            let cfg = BenchConfig::load(path)?;
            let runs = bench::noise_sweep(&cfg, &base_of(path), rho, cli.jobs)?;
            let dir = out_dir(cli);
            for (r, run) in rho.iter().zip(&runs) {
                bench::write_outputs(run, &dir, &format!("noise-{r}"))?;
                for s in &run.report.summaries {
                    println!("rho {r:<6} {:<16} {:<12} mean CR {}", s.config_id, s.policy, fmt_cr(s.mean_cr));
                }
            }
        }
    }
    Ok(true)
}

fn fmt_cr(cr: Option<f64>) -> String {
    cr.map_or_else(|| "undefined".into(), |c| format!("{c:.4}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
