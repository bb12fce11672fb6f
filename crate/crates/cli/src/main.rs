//! `ici` — build, analyze, and simulate attacked interdependent
//! infrastructure scenarios.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use ici_core::blotto::{check_blotto_applicability, solve_symmetric_msne, BlottoVerdict};
use ici_core::labels::Infrastructure;
use ici_core::report::{fmt_f64, read_valuation_csv, scenario_hash, write_matrix, ReportMeta, Table};
use ici_core::scenario::ScenarioConfig;
use ici_core::sim::{
    compare_budget_ratios, emit_reports, interdependence_report, prepare, run_matches, RunOptions,
    Strategy,
};

#[derive(Parser)]
#[command(name = "ici", version, about = "Interdependent infrastructure security pipeline")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Scenario JSON document.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Master seed; overrides the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo replicas; overrides the scenario's.
    #[arg(long, global = true)]
    replicas: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the models and export A, B, C as CSV matrices.
    Build,
    /// Value every sensor cluster by its worst-case attack impact.
    Analyze {
        /// KL feasibility budget of the impulse attack.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Solve the resource-allocation equilibrium.
    Equilibrium {
        /// Attacker budget R^a.
        #[arg(long)]
        ra: f64,
        /// Defender budget R^d.
        #[arg(long)]
        rd: f64,
        /// Read cluster values from a valuation.csv instead of solving.
        #[arg(long)]
        values: Option<PathBuf>,
        /// Defend only these infrastructures (e.g. `gas` or `gas,water`).
        #[arg(long)]
        defend_subset: Option<String>,
        /// Print the Colonel Blotto applicability verdict.
        #[arg(long)]
        check_blotto: bool,
    },
    /// Run the full pipeline: matches plus attacked Kalman simulations.
    Simulate {
        /// Simulation horizon in steps; overrides the scenario's.
        #[arg(long)]
        horizon: Option<usize>,
        /// Attacker strategy: msne | proportional | best-response.
        #[arg(long)]
        attacker: Option<String>,
        /// Defender strategy: msne, proportional, best-response, or `single-ci:<subset>`.
        #[arg(long)]
        defender: Option<String>,
    },
    /// Emit the budget-ratio and interdependence comparison tables.
    Report {
        /// Budget pairs `ra/rd`, comma separated (e.g. `10/20,1/20`).
        #[arg(long, default_value = "10/20,1/20")]
        ratios: String,
        /// Single-CI defenses to evaluate, comma separated.
        #[arg(long, default_value = "gas,water,power")]
        defend: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_scenario(global: &Global) -> Result<(ScenarioConfig, String)> {
    let path = global
        .scenario
        .as_ref()
        .ok_or_else(|| anyhow!("--scenario <path> is required"))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let mut cfg = ScenarioConfig::from_json(&text).context("parsing scenario")?;
    if let Some(seed) = global.seed {
        cfg.game.seed = seed;
    }
    if let Some(replicas) = global.replicas {
        cfg.game.replicas = replicas;
    }
    Ok((cfg, text))
}

fn meta_for(cfg: &ScenarioConfig, text: &str) -> ReportMeta {
    ReportMeta {
        scenario_hash: scenario_hash(text),
        seed: cfg.game.seed,
        replicas: cfg.game.replicas,
    }
}

fn parse_subset(s: &str) -> Result<Vec<Infrastructure>> {
    s.split(',')
        .map(|p| match p.trim() {
            "power" => Ok(Infrastructure::Power),
            "gas" => Ok(Infrastructure::Gas),
            "water" => Ok(Infrastructure::Water),
            other => Err(anyhow!("unknown infrastructure `{other}`")),
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build => {
            let (cfg, _text) = load_scenario(&cli.global)?;
            let built = ici_core::scenario::build_scenario(&cfg)?;
            std::fs::create_dir_all(&cli.global.out)?;
            write_matrix(&built.continuous.a, &cli.global.out.join("a_continuous.csv"))?;
            write_matrix(&built.continuous.b, &cli.global.out.join("b_continuous.csv"))?;
            write_matrix(&built.discrete.a, &cli.global.out.join("a_discrete.csv"))?;
            write_matrix(&built.discrete.b, &cli.global.out.join("b_discrete.csv"))?;
            write_matrix(&built.sensors.c, &cli.global.out.join("c_sensors.csv"))?;
            println!(
                "built: {} states, {} inputs, {} sensors, {} clusters; spectral radius {:.6}",
                built.discrete.state_count(),
                built.discrete.input_count(),
                built.sensors.sensor_count(),
                built.sensors.clusters.cluster_count(),
                built.discrete.spectral_radius().unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Command::Analyze { alpha } => {
            let (mut cfg, text) = load_scenario(&cli.global)?;
            if let Some(a) = alpha {
                cfg.game.alpha = a;
            }
            let prepared = prepare(&cfg)?;
            let meta = meta_for(&cfg, &text);
            std::fs::create_dir_all(&cli.global.out)?;
            let mut table =
                Table::new(&["sc_id", "phi_raw", "phi_norm", "active_constraint", "objective_id"]);
            for (i, sol) in prepared.valuation.solutions.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    fmt_f64(prepared.valuation.raw[i]),
                    fmt_f64(prepared.valuation.normalized[i]),
                    sol.certificate.active_constraint.to_string(),
                    sol.certificate.objective.to_string(),
                ]);
            }
            table.write(&meta, &cli.global.out.join("valuation.csv"))?;
            println!(
                "valued {} clusters; total raw value {:.6e}",
                prepared.valuation.raw.len(),
                prepared.valuation.total_raw()
            );
            Ok(())
        }
        Command::Equilibrium { ra, rd, values, defend_subset, check_blotto } => {
            std::fs::create_dir_all(&cli.global.out)?;
            let (raw, meta): (Vec<f64>, ReportMeta) = match (&values, &cli.global.scenario) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path)?;
                    let rows = read_valuation_csv(&text)
                        .ok_or_else(|| anyhow!("malformed valuation csv"))?;
                    let meta = ReportMeta {
                        scenario_hash: scenario_hash(&text),
                        seed: cli.global.seed.unwrap_or(0),
                        replicas: 0,
                    };
                    (rows.into_iter().map(|(_, raw, _)| raw).collect(), meta)
                }
                (None, Some(_)) => {
                    let (cfg, text) = load_scenario(&cli.global)?;
                    let prepared = prepare(&cfg)?;
                    (prepared.valuation.raw.clone(), meta_for(&cfg, &text))
                }
                (None, None) => {
                    return Err(anyhow!("need either --values or --scenario"));
                }
            };
            let total: f64 = raw.iter().sum();
            let phi: Vec<f64> = raw.iter().map(|v| v / total).collect();

            let profile = match &defend_subset {
                None => solve_symmetric_msne(&phi, ra, rd, total).map_err(ici_core::Error::Blotto)?,
                Some(subset) => {
                    // subset resolution needs the scenario's cluster map
                    let (cfg, _) = load_scenario(&cli.global)
                        .context("--defend-subset needs --scenario to classify clusters")?;
                    let prepared = prepare(&cfg)?;
                    let infra = parse_subset(subset)?;
                    let clusters = prepared.clusters_of(&infra).map_err(ici_core::Error::Sim)?;
                    ici_core::blotto::single_ci_defense_ced(&raw, &clusters, ra, rd)
                        .map_err(ici_core::Error::Blotto)?
                        .profile
                }
            };
            if check_blotto {
                match check_blotto_applicability(&phi, ra, rd) {
                    BlottoVerdict::BlottoValid { grid_exponent, max_multiple } => println!(
                        "blotto-valid: grid 1e-{grid_exponent}, max integer multiple {max_multiple}"
                    ),
                    BlottoVerdict::LottoOnly { reason } => println!("lotto-only: {reason}"),
                }
            }
            let mut table = Table::new(&[
                "sc_id",
                "phi_a",
                "phi_d",
                "attacker_atom",
                "attacker_support",
                "defender_atom",
                "defender_support",
                "zeta_a",
                "zeta_d",
                "u_a",
                "pi",
                "verdict",
            ]);
            for (i, sc) in profile.per_sc.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    fmt_f64(sc.value_a),
                    fmt_f64(sc.value_d),
                    fmt_f64(sc.attacker.atom),
                    fmt_f64(sc.attacker.support),
                    fmt_f64(sc.defender.atom),
                    fmt_f64(sc.defender.support),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            let verdict = match &profile.verdict {
                BlottoVerdict::BlottoValid { .. } => "blotto-valid",
                BlottoVerdict::LottoOnly { .. } => "lotto-only",
            };
            table.push(vec![
                "summary".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt_f64(profile.zeta_a),
                fmt_f64(profile.zeta_d),
                fmt_f64(profile.u_a),
                fmt_f64(profile.expected_ced),
                verdict.into(),
            ]);
            table.write(&meta, &cli.global.out.join("equilibrium.csv"))?;
            println!(
                "U^a = {:.6}, expected CED = {:.6e} ({verdict})",
                profile.u_a, profile.expected_ced
            );
            Ok(())
        }
        Command::Simulate { horizon, attacker, defender } => {
            let (mut cfg, text) = load_scenario(&cli.global)?;
            if let Some(h) = horizon {
                cfg.game.horizon = h;
            }
            if let Some(a) = attacker {
                cfg.game.attacker_strategy = a;
            }
            if let Some(d) = defender {
                cfg.game.defender_strategy = d;
            }
            let prepared = prepare(&cfg)?;
            let attacker = Strategy::parse(&cfg.game.attacker_strategy)
                .map_err(ici_core::Error::Sim)?;
            let defender = Strategy::parse(&cfg.game.defender_strategy)
                .map_err(ici_core::Error::Sim)?;
            let opts = RunOptions {
                attacker,
                defender: defender.clone(),
                r_a: cfg.game.attacker_budget,
                r_d: cfg.game.defender_budget,
                replicas: cfg.game.replicas,
                seed: cfg.game.seed,
                with_trajectories: true,
                horizon: cfg.game.horizon,
            };
            let report = run_matches(&prepared, &opts)?;
            let profile =
                prepared.profile_for(&defender, cfg.game.attacker_budget, cfg.game.defender_budget)?;
            let meta = meta_for(&cfg, &text);
            emit_reports(&prepared, &profile, &report, &meta, &cli.global.out)?;
            let detail = ici_core::sim::plain_trajectories(&prepared, 1, cfg.game.horizon)?;
            ici_core::sim::write_trajectory_csv(
                &detail[0],
                &prepared.built.discrete,
                &meta,
                &cli.global.out.join("trajectory_detail.csv"),
            )?;
            println!(
                "{} replicas: mean compromised fraction {:.4} (se {:.4}), mean CED {:.6e}, closed-form {:.6e}",
                cfg.game.replicas,
                report.mean_fraction,
                report.se_fraction,
                report.mean_ced,
                profile.expected_ced
            );
            Ok(())
        }
        Command::Report { ratios, defend } => {
            let (cfg, text) = load_scenario(&cli.global)?;
            let prepared = prepare(&cfg)?;
            let meta = meta_for(&cfg, &text);
            std::fs::create_dir_all(&cli.global.out)?;

            let ratio_pairs: Vec<(f64, f64)> = ratios
                .split(',')
                .map(|pair| {
                    let (a, d) = pair
                        .split_once('/')
                        .ok_or_else(|| anyhow!("ratio `{pair}` is not of the form ra/rd"))?;
                    Ok((a.trim().parse()?, d.trim().parse()?))
                })
                .collect::<Result<_>>()?;
            let rows =
                compare_budget_ratios(&prepared, &ratio_pairs, cfg.game.replicas, cfg.game.seed)?;
            let mut table = Table::new(&[
                "r_a",
                "r_d",
                "pi_closed",
                "mc_mean_ced",
                "mc_se_ced",
                "mc_mean_fraction",
            ]);
            for row in &rows {
                table.push(vec![
                    fmt_f64(row.r_a),
                    fmt_f64(row.r_d),
                    fmt_f64(row.pi_closed),
                    fmt_f64(row.mc_mean_ced),
                    fmt_f64(row.mc_se_ced),
                    fmt_f64(row.mc_mean_fraction),
                ]);
            }
            table.write(&meta, &cli.global.out.join("budget_ratios.csv"))?;

            let subsets: Vec<Vec<Infrastructure>> = defend
                .split(',')
                .map(|s| parse_subset(s.trim()))
                .collect::<Result<_>>()?;
            let rows = interdependence_report(
                &prepared,
                &subsets,
                cfg.game.attacker_budget,
                cfg.game.defender_budget,
                cfg.game.replicas,
                cfg.game.seed,
            )?;
            let mut table =
                Table::new(&["defense", "kappa", "pi_bar_closed", "mc_mean_ced", "mc_mean_fraction"]);
            for row in &rows {
                table.push(vec![
                    row.label.clone(),
                    fmt_f64(row.kappa),
                    fmt_f64(row.pi_bar_closed),
                    fmt_f64(row.mc_mean_ced),
                    fmt_f64(row.mc_mean_fraction),
                ]);
            }
            table.write(&meta, &cli.global.out.join("interdependence.csv"))?;

            // monitored-state estimation-error trajectories: defend-all vs
            // the first single-CI defense
            let mut arms: Vec<(String, Strategy)> = vec![("all".into(), Strategy::Msne)];
            if let Some(first) = subsets.first() {
                let names: Vec<String> = first.iter().map(|s| s.to_string()).collect();
                arms.push((names.join("+"), Strategy::SingleCi(first.clone())));
            }
            let mut table = Table::new(&["series", "step", "value"]);
            for (label, defender) in arms {
                let opts = RunOptions {
                    attacker: Strategy::Msne,
                    defender,
                    r_a: cfg.game.attacker_budget,
                    r_d: cfg.game.defender_budget,
                    replicas: cfg.game.replicas.min(50),
                    seed: cfg.game.seed,
                    with_trajectories: true,
                    horizon: cfg.game.horizon,
                };
                let rep = run_matches(&prepared, &opts)?;
                for (series, values) in &rep.monitor_series {
                    for (k, v) in values.iter().enumerate() {
                        table.push(vec![format!("{label}:{series}"), k.to_string(), fmt_f64(*v)]);
                    }
                }
            }
            table.write(&meta, &cli.global.out.join("interdependence_trajectories.csv"))?;
            println!("wrote budget_ratios.csv, interdependence.csv, interdependence_trajectories.csv");
            Ok(())
        }
    }
}
