//! End-to-end scenario runner: build, estimate, value, solve, and verify by
//! Monte Carlo matches with attacked Kalman simulations.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::attack::{
    solve_max_ced, value_clusters, AttackInjection, ClusterValuation, ImpactMatrices,
};
use crate::blotto::{
    best_response, match_payoff, sample_allocation, single_ci_defense_ced, solve_symmetric_msne,
    BudgetEnforcement, EquilibriumProfile, Player, ScWinner,
};
use crate::error::{Error, SimError};
use crate::estimator::{kalman_gain, simulate, solve_riccati, EstimatorBundle, Trajectory};
use crate::labels::{Infrastructure, StateLabel};
use crate::rng::{self, Stream};
use crate::report::{fmt_f64, ReportMeta, Table};
use crate::scenario::{build_scenario, BuiltScenario, ScenarioConfig};
use crate::Result;

/// Allocation strategy of one player.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Sample the equilibrium marginals.
    Msne,
    /// Deterministic phi_i R^j split.
    Proportional,
    /// Clairvoyant knapsack best response to the opponent's realized draw.
    BestResponse,
    /// Defender-only: the degenerate profile that values one CI subset.
    SingleCi(Vec<Infrastructure>),
}

impl Strategy {
    pub fn parse(s: &str) -> std::result::Result<Strategy, SimError> {
        match s {
            "msne" => Ok(Strategy::Msne),
            "proportional" => Ok(Strategy::Proportional),
            "best-response" => Ok(Strategy::BestResponse),
            _ => {
                if let Some(rest) = s.strip_prefix("single-ci:") {
                    let mut subset = Vec::new();
                    for part in rest.split(',') {
                        match part {
                            "power" => subset.push(Infrastructure::Power),
                            "gas" => subset.push(Infrastructure::Gas),
                            "water" => subset.push(Infrastructure::Water),
                            _ => return Err(SimError::UnknownStrategy(s.to_string())),
                        }
                    }
                    if subset.is_empty() {
                        return Err(SimError::UnknownStrategy(s.to_string()));
                    }
                    Ok(Strategy::SingleCi(subset))
                } else {
                    Err(SimError::UnknownStrategy(s.to_string()))
                }
            }
        }
    }
}

/// Heavy once-per-scenario artifacts.
pub struct Prepared {
    pub built: BuiltScenario,
    pub bundle: EstimatorBundle,
    pub impact: ImpactMatrices,
    pub valuation: ClusterValuation,
    /// Per cluster: its CI, `None` when sensors mix infrastructures.
    pub cluster_infra: Vec<Option<Infrastructure>>,
}

/// Build models, solve the Riccati equation, and value every cluster.
pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    let built = build_scenario(cfg)?;
    let p = solve_riccati(&built.discrete, &built.sensors, &built.noise)?;
    let bundle = kalman_gain(&p, &built.discrete, &built.sensors, &built.noise)?;
    let impact = ImpactMatrices::new(&built.discrete, &built.sensors, &bundle, &built.noise.cost);
    let valuation = value_clusters(
        &impact,
        &built.sensors.clusters,
        built.alpha,
        built.sensors.sensor_count(),
    )?;
    let cluster_infra = (0..built.sensors.clusters.cluster_count())
        .map(|i| built.sensors.cluster_infrastructure(&built.discrete, i))
        .collect();
    Ok(Prepared { built, bundle, impact, valuation, cluster_infra })
}

impl Prepared {
    /// Clusters whose sensors live in one of the given infrastructures.
    pub fn clusters_of(&self, subset: &[Infrastructure]) -> std::result::Result<Vec<usize>, SimError> {
        let mut out = Vec::new();
        for (i, infra) in self.cluster_infra.iter().enumerate() {
            match infra {
                Some(k) if subset.contains(k) => out.push(i),
                Some(_) => {}
                None => return Err(SimError::MixedCluster(i)),
            }
        }
        if out.is_empty() {
            let names: Vec<String> = subset.iter().map(|s| s.to_string()).collect();
            return Err(SimError::EmptyDefense(names.join(",")));
        }
        Ok(out)
    }

    /// The equilibrium profile implied by the defender's strategy.
    pub fn profile_for(
        &self,
        defender: &Strategy,
        r_a: f64,
        r_d: f64,
    ) -> Result<EquilibriumProfile> {
        match defender {
            Strategy::SingleCi(subset) => {
                let clusters = self.clusters_of(subset).map_err(Error::Sim)?;
                let defense = single_ci_defense_ced(&self.valuation.raw, &clusters, r_a, r_d)
                    .map_err(Error::Blotto)?;
                Ok(defense.profile)
            }
            _ => solve_symmetric_msne(&self.valuation.normalized, r_a, r_d, self.valuation.total_raw())
                .map_err(Error::Blotto),
        }
    }
}

/// Options of one Monte Carlo run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub attacker: Strategy,
    pub defender: Strategy,
    pub r_a: f64,
    pub r_d: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Run the per-replica attacked Kalman simulation.
    pub with_trajectories: bool,
    pub horizon: usize,
}

/// Outcome of one replica.
#[derive(Debug, Clone)]
pub struct MatchRecord {
    pub replica: u64,
    pub u_a: f64,
    pub u_d: f64,
    /// Clusters the attacker strictly won.
    pub compromised: Vec<usize>,
    /// Fraction of clusters compromised; exact ties count one half.
    pub fraction: f64,
    /// Realized CED pi = u^a * sum of raw values.
    pub realized_ced: f64,
    /// Same outcome with draws rescaled onto the hard budget.
    pub u_a_capped: f64,
    pub fraction_capped: f64,
    pub realized_ced_capped: f64,
    /// Peak trajectory CED of the injected worst-case attack, when simulated.
    pub traj_peak_ced: Option<f64>,
    /// Jointly solved q^m_alpha over the compromised union, when simulated.
    pub solver_bound: Option<f64>,
}

/// Aggregates over all replicas.
#[derive(Debug, Clone)]
pub struct MatchReport {
    pub records: Vec<MatchRecord>,
    pub mean_fraction: f64,
    pub se_fraction: f64,
    pub mean_ced: f64,
    pub se_ced: f64,
    pub mean_fraction_capped: f64,
    pub mean_ced_capped: f64,
    pub mean_u_a: f64,
    /// Times each cluster was strictly compromised across the replicas.
    pub win_counts: Vec<usize>,
    /// Per-step mean absolute estimation error of monitored states,
    /// nominal and attacked, when trajectories were simulated.
    pub monitor_series: BTreeMap<String, Vec<f64>>,
    pub total_raw: f64,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Draw one player's allocation according to its strategy.
#[allow(clippy::too_many_arguments)]
fn allocate(
    strategy: &Strategy,
    player: Player,
    profile: &EquilibriumProfile,
    values: &[f64],
    budget: f64,
    opponent: Option<&DVector<f64>>,
    rng: &mut rand_chacha::ChaCha8Rng,
    enforcement: BudgetEnforcement,
) -> DVector<f64> {
    match strategy {
        Strategy::Msne | Strategy::SingleCi(_) => {
            sample_allocation(profile, player, enforcement, rng)
        }
        Strategy::Proportional => {
            DVector::from_iterator(values.len(), values.iter().map(|&v| v * budget))
        }
        Strategy::BestResponse => {
            let opp = opponent.expect("best responder draws after its opponent");
            best_response(opp, values, budget)
        }
    }
}

/// Run the replicated matches (and, optionally, the per-replica attacked
/// Kalman simulations driven by the jointly solved worst-case injection).
pub fn run_matches(prepared: &Prepared, opts: &RunOptions) -> Result<MatchReport> {
    if opts.replicas == 0 {
        return Err(Error::Sim(SimError::ZeroReplicas));
    }
    if opts.attacker == Strategy::BestResponse && opts.defender == Strategy::BestResponse {
        return Err(Error::Blotto(crate::error::BlottoError::BestResponseCycle));
    }
    if matches!(opts.attacker, Strategy::SingleCi(_)) {
        return Err(Error::Sim(SimError::UnknownStrategy("single-ci (attacker)".into())));
    }

    let profile = prepared.profile_for(&opts.defender, opts.r_a, opts.r_d)?;
    let phi = &prepared.valuation.normalized;
    let total_raw = prepared.valuation.total_raw();
    let n_clusters = phi.len() as f64;
    let monitors = monitor_states(&prepared.built);

    let records: Vec<(MatchRecord, Option<MonitorAccumulator>)> = (0..opts.replicas as u64)
        .into_par_iter()
        .map(|replica| -> Result<(MatchRecord, Option<MonitorAccumulator>)> {
            let mut rng_a = rng::rng_for(opts.seed, Stream::AttackerAllocation(replica));
            let mut rng_d = rng::rng_for(opts.seed, Stream::DefenderAllocation(replica));

            // raw (expectation-budget) play
            let draw = |enforcement: BudgetEnforcement,
                        rng_a: &mut rand_chacha::ChaCha8Rng,
                        rng_d: &mut rand_chacha::ChaCha8Rng| {
                let (r_a_vec, r_d_vec);
                if opts.attacker == Strategy::BestResponse {
                    let d = allocate(
                        &opts.defender,
                        Player::Defender,
                        &profile,
                        phi,
                        opts.r_d,
                        None,
                        rng_d,
                        enforcement,
                    );
                    let a = allocate(
                        &opts.attacker,
                        Player::Attacker,
                        &profile,
                        phi,
                        opts.r_a,
                        Some(&d),
                        rng_a,
                        enforcement,
                    );
                    (r_a_vec, r_d_vec) = (a, d);
                } else {
                    let a = allocate(
                        &opts.attacker,
                        Player::Attacker,
                        &profile,
                        phi,
                        opts.r_a,
                        None,
                        rng_a,
                        enforcement,
                    );
                    let d = allocate(
                        &opts.defender,
                        Player::Defender,
                        &profile,
                        phi,
                        opts.r_d,
                        Some(&a),
                        rng_d,
                        enforcement,
                    );
                    (r_a_vec, r_d_vec) = (a, d);
                }
                (r_a_vec, r_d_vec)
            };

            let (alloc_a, alloc_d) = draw(BudgetEnforcement::Expectation, &mut rng_a, &mut rng_d);
            let outcome = match_payoff(&alloc_a, &alloc_d, phi, phi);

            // budget-capped variant, fresh derived streams for identical draws
            let mut rng_a2 = rng::rng_for(opts.seed, Stream::AttackerAllocation(replica));
            let mut rng_d2 = rng::rng_for(opts.seed, Stream::DefenderAllocation(replica));
            let (capped_a, capped_d) = draw(BudgetEnforcement::CapToBudget, &mut rng_a2, &mut rng_d2);
            let outcome_capped = match_payoff(&capped_a, &capped_d, phi, phi);

            let fraction = |winners: &[ScWinner]| {
                winners
                    .iter()
                    .map(|w| match w {
                        ScWinner::Attacker => 1.0,
                        ScWinner::Tie => 0.5,
                        ScWinner::Defender => 0.0,
                    })
                    .sum::<f64>()
                    / n_clusters
            };
            let compromised: Vec<usize> = outcome
                .winners
                .iter()
                .enumerate()
                .filter(|(_, w)| matches!(w, ScWinner::Attacker))
                .map(|(i, _)| i)
                .collect();

            let mut record = MatchRecord {
                replica,
                u_a: outcome.u_a,
                u_d: outcome.u_d,
                fraction: fraction(&outcome.winners),
                realized_ced: outcome.u_a * total_raw,
                u_a_capped: outcome_capped.u_a,
                fraction_capped: fraction(&outcome_capped.winners),
                realized_ced_capped: outcome_capped.u_a * total_raw,
                compromised,
                traj_peak_ced: None,
                solver_bound: None,
            };

            let mut acc = None;
            if opts.with_trajectories {
                let (peak, bound, monitor) =
                    attacked_replica(prepared, &record.compromised, opts.horizon, replica, &monitors)?;
                record.traj_peak_ced = Some(peak);
                record.solver_bound = Some(bound);
                acc = Some(monitor);
            }
            Ok((record, acc))
        })
        .collect::<Result<_>>()?;

    let mut monitor_series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    if opts.with_trajectories {
        for (label, _) in &monitors {
            monitor_series.insert(format!("{label}:nominal"), vec![0.0; opts.horizon + 1]);
            monitor_series.insert(format!("{label}:attacked"), vec![0.0; opts.horizon + 1]);
        }
        for (_, acc) in &records {
            let acc = acc.as_ref().unwrap();
            for ((label, _), (nom, att)) in monitors.iter().zip(acc.iter()) {
                let series = monitor_series.get_mut(&format!("{label}:nominal")).unwrap();
                for (k, v) in nom.iter().enumerate() {
                    series[k] += v / opts.replicas as f64;
                }
                let series = monitor_series.get_mut(&format!("{label}:attacked")).unwrap();
                for (k, v) in att.iter().enumerate() {
                    series[k] += v / opts.replicas as f64;
                }
            }
        }
    }

    let records: Vec<MatchRecord> = records.into_iter().map(|(r, _)| r).collect();
    let fractions: Vec<f64> = records.iter().map(|r| r.fraction).collect();
    let ceds: Vec<f64> = records.iter().map(|r| r.realized_ced).collect();
    let (mean_fraction, se_fraction) = mean_se(&fractions);
    let (mean_ced, se_ced) = mean_se(&ceds);
    let capped_fracs: Vec<f64> = records.iter().map(|r| r.fraction_capped).collect();
    let capped_ceds: Vec<f64> = records.iter().map(|r| r.realized_ced_capped).collect();
    let u_as: Vec<f64> = records.iter().map(|r| r.u_a).collect();
    let mut win_counts = vec![0usize; phi.len()];
    for r in &records {
        for &c in &r.compromised {
            win_counts[c] += 1;
        }
    }

    Ok(MatchReport {
        mean_fraction,
        se_fraction,
        mean_ced,
        se_ced,
        mean_fraction_capped: mean_se(&capped_fracs).0,
        mean_ced_capped: mean_se(&capped_ceds).0,
        mean_u_a: mean_se(&u_as).0,
        win_counts,
        records,
        monitor_series,
        total_raw,
    })
}

/// (per-monitor nominal, attacked) mean-abs-error series of one replica.
type MonitorAccumulator = Vec<(Vec<f64>, Vec<f64>)>;

fn monitor_states(built: &BuiltScenario) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for label in built_monitors(built) {
        if let Some(idx) = built.discrete.state_index(&label) {
            out.push((label.to_string(), idx));
        }
    }
    out
}

fn built_monitors(built: &BuiltScenario) -> Vec<StateLabel> {
    if built.monitors.is_empty() {
        // default: first gas state, if any
        built
            .discrete
            .state_labels
            .iter()
            .find(|l| l.infrastructure() == Infrastructure::Gas)
            .into_iter()
            .cloned()
            .collect()
    } else {
        built.monitors.clone()
    }
}

/// Simulate the attacked/unattacked pair for a compromised set and return
/// (peak trajectory CED, joint solver bound, monitor series).
fn attacked_replica(
    prepared: &Prepared,
    compromised: &[usize],
    horizon: usize,
    replica: u64,
    monitors: &[(String, usize)],
) -> Result<(f64, f64, MonitorAccumulator)> {
    let built = &prepared.built;
    let m = built.sensors.sensor_count();

    let (vector, bound) = if compromised.is_empty() {
        (DVector::zeros(m), 0.0)
    } else {
        let rows = built.sensors.clusters.union(compromised);
        let sol = solve_max_ced(&prepared.impact, &rows, built.alpha, m)?;
        (sol.argmax, sol.value)
    };
    let attack = AttackInjection::new(
        compromised.to_vec(),
        vector,
        built.alpha,
        &built.sensors.clusters,
    )?;

    let trajectory = simulate(
        &built.discrete,
        &built.sensors,
        &prepared.bundle,
        &built.noise,
        &built.inputs,
        horizon,
        Some(&attack),
        replica,
    )?;
    let attacked = trajectory.attacked.as_ref().unwrap();

    // peak CED from the paired estimates: de(k) = xhat - xhat_bar
    let mut peak = 0.0_f64;
    for k in 0..=horizon {
        let de = &trajectory.xhat[k] - &attacked.xhat_bar[k];
        let q: f64 = de
            .iter()
            .zip(built.noise.cost.iter())
            .map(|(e, c)| c * e * e)
            .sum();
        peak = peak.max(q);
    }

    let mut acc = Vec::with_capacity(monitors.len());
    for &(_, idx) in monitors {
        let nominal: Vec<f64> = (0..=horizon)
            .map(|k| (trajectory.x[k][idx] - trajectory.xhat[k][idx]).abs())
            .collect();
        let att: Vec<f64> = (0..=horizon)
            .map(|k| (trajectory.x[k][idx] - attacked.xhat_bar[k][idx]).abs())
            .collect();
        acc.push((nominal, att));
    }
    Ok((peak, bound, acc))
}

/// One row of the budget-ratio comparison.
#[derive(Debug, Clone)]
pub struct BudgetRatioRow {
    pub r_a: f64,
    pub r_d: f64,
    pub pi_closed: f64,
    pub mc_mean_ced: f64,
    pub mc_se_ced: f64,
    pub mc_mean_fraction: f64,
}

/// Closed-form and Monte Carlo CED across budget ratios, MSNE vs MSNE.
pub fn compare_budget_ratios(
    prepared: &Prepared,
    ratios: &[(f64, f64)],
    replicas: usize,
    seed: u64,
) -> Result<Vec<BudgetRatioRow>> {
    let mut rows = Vec::new();
    for (i, &(r_a, r_d)) in ratios.iter().enumerate() {
        let profile =
            solve_symmetric_msne(&prepared.valuation.normalized, r_a, r_d, prepared.valuation.total_raw())
                .map_err(Error::Blotto)?;
        let opts = RunOptions {
            attacker: Strategy::Msne,
            defender: Strategy::Msne,
            r_a,
            r_d,
            replicas,
            seed: seed.wrapping_add(i as u64),
            with_trajectories: false,
            horizon: prepared.built.horizon,
        };
        let report = run_matches(prepared, &opts)?;
        rows.push(BudgetRatioRow {
            r_a,
            r_d,
            pi_closed: profile.expected_ced,
            mc_mean_ced: report.mean_ced,
            mc_se_ced: report.se_ced,
            mc_mean_fraction: report.mean_fraction,
        });
    }
    Ok(rows)
}

/// One row of the interdependence comparison.
#[derive(Debug, Clone)]
pub struct InterdependenceRow {
    pub label: String,
    pub kappa: f64,
    pub pi_bar_closed: f64,
    pub mc_mean_ced: f64,
    pub mc_mean_fraction: f64,
}

/// Single-CI defenses against the defend-everything baseline.
pub fn interdependence_report(
    prepared: &Prepared,
    subsets: &[Vec<Infrastructure>],
    r_a: f64,
    r_d: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<InterdependenceRow>> {
    let mut rows = Vec::new();

    let baseline =
        solve_symmetric_msne(&prepared.valuation.normalized, r_a, r_d, prepared.valuation.total_raw())
            .map_err(Error::Blotto)?;
    let opts = RunOptions {
        attacker: Strategy::Msne,
        defender: Strategy::Msne,
        r_a,
        r_d,
        replicas,
        seed,
        with_trajectories: false,
        horizon: prepared.built.horizon,
    };
    let report = run_matches(prepared, &opts)?;
    rows.push(InterdependenceRow {
        label: "all".to_string(),
        kappa: 1.0,
        pi_bar_closed: baseline.expected_ced,
        mc_mean_ced: report.mean_ced,
        mc_mean_fraction: report.mean_fraction,
    });

    for (i, subset) in subsets.iter().enumerate() {
        let clusters = prepared.clusters_of(subset).map_err(Error::Sim)?;
        let defense = single_ci_defense_ced(&prepared.valuation.raw, &clusters, r_a, r_d)
            .map_err(Error::Blotto)?;
        let opts = RunOptions {
            attacker: Strategy::Msne,
            defender: Strategy::SingleCi(subset.clone()),
            r_a,
            r_d,
            replicas,
            seed: seed.wrapping_add(1000 + i as u64),
            with_trajectories: false,
            horizon: prepared.built.horizon,
        };
        let report = run_matches(prepared, &opts)?;
        let names: Vec<String> = subset.iter().map(|s| s.to_string()).collect();
        rows.push(InterdependenceRow {
            label: names.join("+"),
            kappa: defense.kappa,
            pi_bar_closed: defense.pi_bar,
            mc_mean_ced: report.mean_ced,
            mc_mean_fraction: report.mean_fraction,
        });
    }
    Ok(rows)
}

/// Write the standard report files for one pipeline run.
pub fn emit_reports(
    prepared: &Prepared,
    profile: &EquilibriumProfile,
    report: &MatchReport,
    meta: &ReportMeta,
    outdir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(outdir)?;

    let mut valuation = Table::new(&["sc_id", "phi_raw", "phi_norm", "active_constraint", "objective_id"]);
    for (i, sol) in prepared.valuation.solutions.iter().enumerate() {
        valuation.push(vec![
            i.to_string(),
            fmt_f64(prepared.valuation.raw[i]),
            fmt_f64(prepared.valuation.normalized[i]),
            sol.certificate.active_constraint.to_string(),
            sol.certificate.objective.to_string(),
        ]);
    }
    valuation.write(meta, &outdir.join("valuation.csv"))?;

    let mut equilibrium = Table::new(&[
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
        equilibrium.push(vec![
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
        crate::blotto::BlottoVerdict::BlottoValid { .. } => "blotto-valid".to_string(),
        crate::blotto::BlottoVerdict::LottoOnly { .. } => "lotto-only".to_string(),
    };
    equilibrium.push(vec![
        "summary".to_string(),
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
        verdict,
    ]);
    equilibrium.write(meta, &outdir.join("equilibrium.csv"))?;

    let mut matches = Table::new(&[
        "replica",
        "u_a",
        "u_d",
        "compromised_count",
        "compromised_frac",
        "realized_ced",
        "u_a_capped",
        "compromised_frac_capped",
        "realized_ced_capped",
        "traj_peak_ced",
        "solver_bound",
        "compromised_ids",
    ]);
    for r in &report.records {
        matches.push(vec![
            r.replica.to_string(),
            fmt_f64(r.u_a),
            fmt_f64(r.u_d),
            r.compromised.len().to_string(),
            fmt_f64(r.fraction),
            fmt_f64(r.realized_ced),
            fmt_f64(r.u_a_capped),
            fmt_f64(r.fraction_capped),
            fmt_f64(r.realized_ced_capped),
            r.traj_peak_ced.map(fmt_f64).unwrap_or_default(),
            r.solver_bound.map(fmt_f64).unwrap_or_default(),
            r.compromised
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        ]);
    }
    matches.write(meta, &outdir.join("matches.csv"))?;

    let mut trajectories = Table::new(&["series", "step", "value"]);
    for (series, values) in &report.monitor_series {
        for (k, v) in values.iter().enumerate() {
            trajectories.push(vec![series.clone(), k.to_string(), fmt_f64(*v)]);
        }
    }
    trajectories.write(meta, &outdir.join("trajectories.csv"))?;

    let mut summary = Table::new(&["key", "value"]);
    let rows = [
        ("clusters", prepared.valuation.raw.len() as f64),
        ("total_raw_value", report.total_raw),
        ("u_a_closed_form", profile.u_a),
        ("pi_closed_form", profile.expected_ced),
        ("mean_u_a", report.mean_u_a),
        ("mean_compromised_fraction", report.mean_fraction),
        ("se_compromised_fraction", report.se_fraction),
        ("mean_realized_ced", report.mean_ced),
        ("se_realized_ced", report.se_ced),
        ("mean_compromised_fraction_capped", report.mean_fraction_capped),
        ("mean_realized_ced_capped", report.mean_ced_capped),
    ];
    for (k, v) in rows {
        summary.push(vec![k.to_string(), fmt_f64(v)]);
    }
    for (i, count) in report.win_counts.iter().enumerate() {
        summary.push(vec![format!("attacker_wins:{i}"), count.to_string()]);
    }
    summary.write(meta, &outdir.join("summary.csv"))?;
    Ok(())
}

/// Simulate a handful of plain (unattacked) trajectories; used by the CLI
/// `simulate` subcommand for trajectory export.
pub fn plain_trajectories(
    prepared: &Prepared,
    replicas: usize,
    horizon: usize,
) -> Result<Vec<Trajectory>> {
    (0..replicas as u64)
        .map(|r| {
            simulate(
                &prepared.built.discrete,
                &prepared.built.sensors,
                &prepared.bundle,
                &prepared.built.noise,
                &prepared.built.inputs,
                horizon,
                None,
                r,
            )
            .map_err(Error::Estimator)
        })
        .collect()
}

/// Per-step export of one trajectory: step, every state, estimate, residue,
/// detector value, alarm flag.
pub fn write_trajectory_csv(
    trajectory: &Trajectory,
    model: &crate::model::StateSpaceModel,
    meta: &ReportMeta,
    path: &Path,
) -> Result<()> {
    let mut columns: Vec<String> = vec!["step".to_string()];
    for label in &model.state_labels {
        columns.push(format!("x:{label}"));
    }
    for label in &model.state_labels {
        columns.push(format!("xhat:{label}"));
    }
    for i in 0..trajectory.z[0].len() {
        columns.push(format!("z:{i}"));
    }
    columns.push("g".to_string());
    columns.push("alarm".to_string());
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&refs);
    for k in 0..trajectory.g.len() {
        let mut row = Vec::with_capacity(columns.len());
        row.push(k.to_string());
        row.extend(trajectory.x[k].iter().map(|v| fmt_f64(*v)));
        row.extend(trajectory.xhat[k].iter().map(|v| fmt_f64(*v)));
        row.extend(trajectory.z[k].iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(trajectory.g[k]));
        row.push((trajectory.alarm[k] as u8).to_string());
        table.push(row);
    }
    table.write(meta, path)
}
