use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use v2g_microgrid::config::parse_assignment;
use v2g_microgrid::io::{emit_plot_script, render_summary_table, trace_file_name, write_batch, write_trace_csv};
use v2g_microgrid::oracle;
use v2g_microgrid::scenario::run_batch;
use v2g_microgrid::sources::SolarCellParams;
use v2g_microgrid::{build_scenario, parse_config_from, run_scenario, summarize, RunConfig, RunError};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "V2G_SIM_OUT";

#[derive(Parser, Debug)]
#[command(name = "v2g-sim", version, about = "Microgrid frequency regulation with a V2G fleet")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario/case pair and write its trace.
    Run(CommonArgs),
    /// Simulate all nine scenario/case pairs and write traces and summaries.
    Batch(CommonArgs),
    /// Compare the solvers and the controller against independent oracles.
    Oracle(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// pv-drop, wind-trip or acm-start.
    #[arg(long)]
    scenario: Option<String>,
    /// v2g-off, ev100 or ev200.
    #[arg(long)]
    case: Option<String>,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step, s.
    #[arg(long)]
    dt: Option<String>,
    /// Simulated horizon, s.
    #[arg(long)]
    duration: Option<String>,
    /// Fleet size, replacing the case's.
    #[arg(long = "ev-count")]
    ev_count: Option<String>,
    /// Seed for the fleet roster.
    #[arg(long)]
    seed: Option<String>,
    /// Any configuration key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl CommonArgs {
    /// `--set` assignments first, then the dedicated flags.
    fn assignments(&self) -> Result<Vec<(String, String)>, RunError> {
        let mut flags = self
            .set
            .iter()
            .map(|s| parse_assignment(s))
            .collect::<Result<Vec<_>, _>>()?;
        let named = [
            ("run.scenario", &self.scenario),
            ("run.case", &self.case),
            ("sim.dt_s", &self.dt),
            ("sim.duration_s", &self.duration),
            ("fleet.count", &self.ev_count),
            ("fleet.seed", &self.seed),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                flags.push((key.to_string(), v.clone()));
            }
        }
        if let Some(out) = &self.out {
            flags.push(("run.output_dir".into(), out.display().to_string()));
        }
        Ok(flags)
    }

    fn resolve(&self) -> Result<RunConfig, RunError> {
        let mut base = RunConfig::default();
        if let Some(dir) = std::env::var_os(OUT_ENV).filter(|d| !d.is_empty()) {
            base.output_dir = PathBuf::from(dir);
        }
        Ok(parse_config_from(base, self.config.as_deref(), &self.assignments()?)?)
    }
}

fn cmd_run(args: &CommonArgs) -> Result<(), RunError> {
    let cfg = args.resolve()?;
    let spec = build_scenario(cfg.scenario_id, cfg.case_id, &cfg.scenario);
    let outcome = run_scenario::<f64>(&cfg, &spec)?;
    let dir = &cfg.output_dir;
    let trace_path = dir.join(trace_file_name(cfg.scenario_id, cfg.case_id));
    write_trace_csv(&outcome.trace, &trace_path)?;
    emit_plot_script(
        &[(cfg.scenario_id, cfg.case_id, trace_path.clone())],
        &dir.join("plot_frequency.py"),
    )?;
    println!("{} / {}", cfg.scenario_id.title(), cfg.case_id.title());
    println!("trace: {}", trace_path.display());
    if let Ok(s) = summarize(&outcome.trace, cfg.sim.f_nom_hz) {
        println!("f_min_hz        {:.6}", s.f_min_hz);
        println!("f_max_hz        {:.6}", s.f_max_hz);
        println!("max_abs_dev_hz  {:.6}", s.max_abs_dev_hz);
        println!("time_of_nadir_s {:.2}", s.time_of_nadir_s);
        if let Some(soc) = s.final_mean_soc {
            println!("final_mean_soc  {soc:.6}");
        }
    }
    match outcome.fault {
        Some(fault) => Err(fault.into()),
        None => Ok(()),
    }
}

fn cmd_batch(args: &CommonArgs) -> Result<(), RunError> {
    let cfg = args.resolve()?;
    let (runs, table) = run_batch::<f64>(&cfg);
    let files = write_batch(&runs, &table, &cfg.output_dir)?;
    print!("{}", render_summary_table(&table));
    println!("summary: {}", files.summary_json.display());
    match runs.iter().find_map(|r| r.error.clone()) {
        Some(e) => Err(RunError::Sim(v2g_microgrid::SimError::Setup(format!(
            "at least one batch cell failed: {e}"
        )))),
        None => Ok(()),
    }
}

fn cmd_oracle(args: &CommonArgs) -> Result<(), RunError> {
    let cfg = args.resolve()?;
    let pv = &cfg.pv;
    let cell = SolarCellParams {
        i_l_a: pv.i_l_a,
        i_o_a: pv.i_o_a,
        xi: pv.xi,
        v_t_v: pv.v_t_v,
        r_s_ohm: pv.r_s_ohm,
        r_sh_ohm: pv.r_sh_ohm,
        n_series: 1,
        n_parallel: 1,
    };
    let checks = oracle::run_all(&cell, &cfg.fleet.params, cfg.fleet.seed);
    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {} | error {:.3e} <= {:.1e} | {}", c.name, c.error, c.tolerance, c.detail);
        failed += usize::from(!c.passed());
    }
    if failed > 0 {
        return Err(RunError::Sim(v2g_microgrid::SimError::Setup(format!(
            "{failed} oracle check(s) failed"
        ))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
