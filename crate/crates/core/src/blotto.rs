//! General Lotto / Colonel Blotto equilibria over sensor clusters.
//!
//! Each cluster is a battlefield with normalized value phi_i; the higher
//! allocation wins it, exact ties split it. Budgets bind in expectation
//! (General Lotto); the equilibrium marginals are all-pay-auction laws with
//! prize ratios phi_i^j / zeta^j:
//!
//! ```text
//! F_weak(r)   = (1 - v_w/v_s) + r / v_s      r in [0, v_w]
//! F_strong(r) = r / v_w                      r in [0, v_w]
//! ```
//!
//! The multipliers solve two expected-budget equations; with mu =
//! zeta^a/zeta^d fixed on a piece of the ratio order statistics they reduce
//! to a cubic in mu, which is solved exactly per piece. In the symmetric
//! case zeta^a = 1/(2 R^d), zeta^d = R^a/(2 (R^d)^2), the attacker's atom at
//! zero is 1 - R^a/R^d, both supports are 2 phi_i R^d, and the expected
//! attacker utility is R^a/(2 R^d).

use nalgebra::DVector;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::BlottoError;

/// Players of the allocation game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Attacker,
    Defender,
}

/// Game data: per-cluster values for both players, budgets, and the raw
/// value total used to convert utilities into CED units.
#[derive(Debug, Clone)]
pub struct GameSpec {
    pub phi_a: Vec<f64>,
    pub phi_d: Vec<f64>,
    pub r_a: f64,
    pub r_d: f64,
    /// Sum of raw cluster values (CED units).
    pub total_raw: f64,
}

impl GameSpec {
    pub fn new(
        phi_a: Vec<f64>,
        phi_d: Vec<f64>,
        r_a: f64,
        r_d: f64,
        total_raw: f64,
    ) -> Result<GameSpec, BlottoError> {
        if phi_a.is_empty() {
            return Err(BlottoError::NoClusters);
        }
        if phi_a.len() != phi_d.len() {
            return Err(BlottoError::LengthMismatch(phi_a.len(), phi_d.len()));
        }
        if !(r_a > 0.0 && r_a <= r_d) {
            return Err(BlottoError::BadBudgets(r_a, r_d));
        }
        for (i, &v) in phi_a.iter().chain(phi_d.iter()).enumerate() {
            if v < 0.0 {
                return Err(BlottoError::NegativeValue(i % phi_a.len(), v));
            }
        }
        Ok(GameSpec { phi_a, phi_d, r_a, r_d, total_raw })
    }

    pub fn symmetric(&self) -> bool {
        self.phi_a == self.phi_d
    }
}

/// Atom-plus-uniform marginal allocation law on one cluster.
///
/// cdf(r) = atom + r (1 - atom)/support on [0, support]; support = 0 encodes
/// a point mass at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalDistribution {
    pub atom: f64,
    pub support: f64,
    pub value: f64,
    pub owner: Player,
}

impl MarginalDistribution {
    pub fn cdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            0.0
        } else if self.support == 0.0 || r >= self.support {
            1.0
        } else {
            self.atom + r * (1.0 - self.atom) / self.support
        }
    }

    /// Expected allocation: (1 - atom) support / 2.
    pub fn mean(&self) -> f64 {
        (1.0 - self.atom) * self.support / 2.0
    }

    /// Inverse-cdf draw.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.support == 0.0 {
            return 0.0;
        }
        let u: f64 = rng.random();
        if u < self.atom {
            0.0
        } else {
            (u - self.atom) / (1.0 - self.atom) * self.support
        }
    }
}

/// Colonel Blotto applicability of the Lotto solution.
#[derive(Debug, Clone, PartialEq)]
pub enum BlottoVerdict {
    /// Values quantize to iota_i 10^-q with max iota < 2^N and every value
    /// below R^a/(2 R^d).
    BlottoValid { grid_exponent: u32, max_multiple: u64 },
    LottoOnly { reason: String },
}

impl BlottoVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, BlottoVerdict::BlottoValid { .. })
    }
}

/// Equilibrium marginals on one cluster.
#[derive(Debug, Clone)]
pub struct ScEquilibrium {
    pub value_a: f64,
    pub value_d: f64,
    pub attacker: MarginalDistribution,
    pub defender: MarginalDistribution,
    /// Probability the attacker wins this cluster at the MSNE.
    pub attacker_win_prob: f64,
}

/// Mixed-strategy Nash equilibrium of the Lotto relaxation.
#[derive(Debug, Clone)]
pub struct EquilibriumProfile {
    pub zeta_a: f64,
    pub zeta_d: f64,
    pub mu: f64,
    pub per_sc: Vec<ScEquilibrium>,
    pub u_a: f64,
    pub u_d: f64,
    /// Expected CED at the MSNE: U^a times the raw value total.
    pub expected_ced: f64,
    pub r_a: f64,
    pub r_d: f64,
    pub verdict: BlottoVerdict,
}

impl EquilibriumProfile {
    pub fn marginals(&self, player: Player) -> Vec<MarginalDistribution> {
        self.per_sc
            .iter()
            .map(|sc| match player {
                Player::Attacker => sc.attacker,
                Player::Defender => sc.defender,
            })
            .collect()
    }
}

/// Closed-form MSNE for equal values and R^a <= R^d.
pub fn solve_symmetric_msne(
    phi: &[f64],
    r_a: f64,
    r_d: f64,
    total_raw: f64,
) -> Result<EquilibriumProfile, BlottoError> {
    if phi.is_empty() {
        return Err(BlottoError::NoClusters);
    }
    if !(r_a > 0.0 && r_a <= r_d) {
        return Err(BlottoError::BadBudgets(r_a, r_d));
    }
    let atom = 1.0 - r_a / r_d;
    let u_a = r_a / (2.0 * r_d);
    let per_sc: Vec<ScEquilibrium> = phi
        .iter()
        .map(|&v| {
            let support = 2.0 * v * r_d;
            ScEquilibrium {
                value_a: v,
                value_d: v,
                attacker: MarginalDistribution { atom, support, value: v, owner: Player::Attacker },
                defender: MarginalDistribution {
                    atom: 0.0,
                    support,
                    value: v,
                    owner: Player::Defender,
                },
                attacker_win_prob: u_a,
            }
        })
        .collect();
    Ok(EquilibriumProfile {
        zeta_a: 1.0 / (2.0 * r_d),
        zeta_d: r_a / (2.0 * r_d * r_d),
        mu: r_d / r_a,
        per_sc,
        u_a,
        u_d: 1.0 - u_a,
        expected_ced: u_a * total_raw,
        r_a,
        r_d,
        verdict: check_blotto_applicability(phi, r_a, r_d),
    })
}

/// Piece coefficients of the budget-ratio equation at multiplier ratio mu.
fn piece_coefficients(phi_a: &[f64], phi_d: &[f64], mu: f64) -> (f64, f64, f64, f64) {
    let mut c1 = 0.0;
    let mut c2 = 0.0;
    let mut c3 = 0.0;
    let mut c4 = 0.0;
    for (&a, &d) in phi_a.iter().zip(phi_d.iter()) {
        if a / d > mu {
            c1 += 0.5 * d;
            c3 += 0.5 * d * d / a;
        } else {
            c2 += 0.5 * a * a / d;
            c4 += 0.5 * a;
        }
    }
    (c1, c2, c3, c4)
}

/// Real roots of a3 x^3 + a2 x^2 + a1 x + a0, Newton-polished.
fn real_cubic_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    let scale = a3.abs().max(a2.abs()).max(a1.abs()).max(a0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let (a3, a2, a1, a0) = (a3 / scale, a2 / scale, a1 / scale, a0 / scale);
    let mut roots = Vec::new();
    if a3.abs() < 1e-14 {
        if a2.abs() < 1e-14 {
            if a1.abs() >= 1e-14 {
                roots.push(-a0 / a1);
            }
        } else {
            let disc = a1 * a1 - 4.0 * a2 * a0;
            if disc >= 0.0 {
                let s = disc.sqrt();
                roots.push((-a1 + s) / (2.0 * a2));
                roots.push((-a1 - s) / (2.0 * a2));
            }
        }
    } else {
        // companion-matrix eigenvalues of the monic cubic
        let b2 = a2 / a3;
        let b1 = a1 / a3;
        let b0 = a0 / a3;
        let companion = nalgebra::Matrix3::new(
            0.0, 0.0, -b0, //
            1.0, 0.0, -b1, //
            0.0, 1.0, -b2,
        );
        for l in companion.complex_eigenvalues().iter() {
            if l.im.abs() < 1e-8 * (1.0 + l.re.abs()) {
                roots.push(l.re);
            }
        }
    }
    let f = |x: f64| ((a3 * x + a2) * x + a1) * x + a0;
    let fp = |x: f64| (3.0 * a3 * x + 2.0 * a2) * x + a1;
    roots
        .into_iter()
        .map(|mut x| {
            for _ in 0..6 {
                let d = fp(x);
                if d.abs() > 0.0 {
                    x -= f(x) / d;
                }
            }
            x
        })
        .collect()
}

/// Solve the budget system for general (strictly positive) value vectors.
///
/// The piecewise-constant strong set makes the budget-ratio equation a
/// rational function of mu on each piece of the sorted ratios
/// phi_i^a/phi_i^d; each piece reduces to a cubic solved exactly.
pub fn solve_general_lotto(
    phi_a: &[f64],
    phi_d: &[f64],
    r_a: f64,
    r_d: f64,
    total_raw: f64,
) -> Result<EquilibriumProfile, BlottoError> {
    let game = GameSpec::new(phi_a.to_vec(), phi_d.to_vec(), r_a, r_d, total_raw)?;
    for (i, &v) in phi_a.iter().enumerate() {
        if !(v > 0.0) {
            return Err(BlottoError::NonPositiveValue(i, v));
        }
    }
    for (i, &v) in phi_d.iter().enumerate() {
        if !(v > 0.0) {
            return Err(BlottoError::NonPositiveValue(i, v));
        }
    }

    let t = r_a / r_d;
    let mut breakpoints: Vec<f64> = phi_a
        .iter()
        .zip(phi_d.iter())
        .map(|(&a, &d)| a / d)
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    // piece edges in mu: (0, rho_1], (rho_1, rho_2], ..., (rho_k, inf)
    let mut edges = vec![0.0];
    edges.extend(breakpoints.iter().copied());
    edges.push(f64::INFINITY);

    let mut candidates: Vec<f64> = Vec::new();
    let mut diagnostics = String::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // classify the piece by any interior point
        let probe = if hi.is_infinite() { lo.max(1e-300) * 2.0 + 1.0 } else { 0.5 * (lo + hi) };
        let (c1, c2, c3, c4) = piece_coefficients(phi_a, phi_d, probe);
        // h(mu) = (c1 mu + c2/mu) / (c3 mu^2 + c4) = t
        // =>  t c3 mu^3 - c1 mu^2 + t c4 mu - c2 = 0
        let roots = real_cubic_roots(t * c3, -c1, t * c4, -c2);
        for mu in roots {
            if mu > 0.0 && mu > lo && (hi.is_infinite() || mu <= hi * (1.0 + 1e-12)) {
                candidates.push(mu);
            }
        }
        diagnostics.push_str(&format!("({lo:.3e},{hi:.3e}) "));
    }

    // Keep candidates whose implied budgets check out, preferring the best fit.
    let mut best: Option<(f64, f64)> = None;
    for mu in candidates {
        let (c1, c2, c3, c4) = piece_coefficients(phi_a, phi_d, mu);
        let denom = c3 * mu * mu + c4;
        if !(denom > 0.0) {
            continue;
        }
        let a = r_d / denom;
        let attacker_budget = a * (c1 * mu + c2 / mu);
        let err = (attacker_budget - r_a).abs() / r_a;
        if err < 1e-6 {
            match best {
                None => best = Some((mu, err)),
                Some((_, e)) if err < e => best = Some((mu, err)),
                _ => {}
            }
        }
    }
    let mu = match best {
        Some((mu, _)) => mu,
        None => return Err(BlottoError::NoConsistentPiece(diagnostics)),
    };

    let (_, _, c3, c4) = piece_coefficients(phi_a, phi_d, mu);
    let inv_zeta_a = r_d / (c3 * mu * mu + c4);
    let inv_zeta_d = mu * inv_zeta_a;

    let mut per_sc = Vec::with_capacity(phi_a.len());
    let mut u_a = 0.0;
    let mut u_d = 0.0;
    for (&va_raw, &vd_raw) in phi_a.iter().zip(phi_d.iter()) {
        let v_a = va_raw * inv_zeta_a;
        let v_d = vd_raw * inv_zeta_d;
        let (attacker, defender, win_a) = if v_a > v_d {
            // attacker strong: uniform on [0, v_d]; defender atom at zero
            let attacker =
                MarginalDistribution { atom: 0.0, support: v_d, value: va_raw, owner: Player::Attacker };
            let defender = MarginalDistribution {
                atom: 1.0 - v_d / v_a,
                support: v_d,
                value: vd_raw,
                owner: Player::Defender,
            };
            (attacker, defender, 1.0 - v_d / (2.0 * v_a))
        } else {
            let attacker = MarginalDistribution {
                atom: 1.0 - v_a / v_d,
                support: v_a,
                value: va_raw,
                owner: Player::Attacker,
            };
            let defender =
                MarginalDistribution { atom: 0.0, support: v_a, value: vd_raw, owner: Player::Defender };
            (attacker, defender, v_a / (2.0 * v_d))
        };
        u_a += va_raw * win_a;
        u_d += vd_raw * (1.0 - win_a);
        per_sc.push(ScEquilibrium { value_a: va_raw, value_d: vd_raw, attacker, defender, attacker_win_prob: win_a });
    }

    let verdict = if game.symmetric() {
        check_blotto_applicability(phi_a, r_a, r_d)
    } else {
        BlottoVerdict::LottoOnly {
            reason: "asymmetric values; integer-multiple check defined on the symmetric game".into(),
        }
    };

    Ok(EquilibriumProfile {
        zeta_a: 1.0 / inv_zeta_a,
        zeta_d: 1.0 / inv_zeta_d,
        mu,
        per_sc,
        u_a,
        u_d,
        expected_ced: u_a * total_raw,
        r_a,
        r_d,
        verdict,
    })
}

/// Single-CI defense profile and expected CED.
#[derive(Debug, Clone)]
pub struct SingleCiDefense {
    /// Fraction of total raw value inside the defended subset.
    pub kappa: f64,
    /// Expected CED when the defender ignores everything else.
    pub pi_bar: f64,
    pub profile: EquilibriumProfile,
}

/// Defender concentrates on `subset` (values elsewhere -> 0).
///
/// Outside the subset both equilibrium marginals collapse to a point mass at
/// zero and the tie rule hands the attacker half of each value, producing
///
/// ```text
/// Pi_bar = (R^a kappa / (2 R^d) + (1 - kappa)/2) * sum phi_raw
/// ```
pub fn single_ci_defense_ced(
    phi_raw: &[f64],
    subset: &[usize],
    r_a: f64,
    r_d: f64,
) -> Result<SingleCiDefense, BlottoError> {
    if phi_raw.is_empty() {
        return Err(BlottoError::NoClusters);
    }
    if !(r_a > 0.0 && r_a <= r_d) {
        return Err(BlottoError::BadBudgets(r_a, r_d));
    }
    if subset.is_empty() || subset.iter().any(|&i| i >= phi_raw.len()) {
        return Err(BlottoError::BadDefenseSubset);
    }
    let total: f64 = phi_raw.iter().sum();
    let mut in_subset = vec![false; phi_raw.len()];
    for &i in subset {
        in_subset[i] = true;
    }
    let defended: f64 = phi_raw
        .iter()
        .zip(in_subset.iter())
        .filter(|(_, &inside)| inside)
        .map(|(&v, _)| v)
        .sum();
    let kappa = defended / total;
    let u_a = r_a * kappa / (2.0 * r_d) + (1.0 - kappa) / 2.0;
    let pi_bar = u_a * total;

    let atom = 1.0 - r_a / r_d;
    let mut per_sc = Vec::with_capacity(phi_raw.len());
    let mut u_d = 0.0;
    for (i, &raw) in phi_raw.iter().enumerate() {
        let phi = raw / total;
        if in_subset[i] {
            let support = 2.0 * phi * r_d / kappa;
            let win_a = r_a / (2.0 * r_d);
            u_d += (phi / kappa) * (1.0 - win_a);
            per_sc.push(ScEquilibrium {
                value_a: phi,
                value_d: phi / kappa,
                attacker: MarginalDistribution { atom, support, value: phi, owner: Player::Attacker },
                defender: MarginalDistribution {
                    atom: 0.0,
                    support,
                    value: phi / kappa,
                    owner: Player::Defender,
                },
                attacker_win_prob: win_a,
            });
        } else {
            per_sc.push(ScEquilibrium {
                value_a: phi,
                value_d: 0.0,
                attacker: MarginalDistribution { atom: 1.0, support: 0.0, value: phi, owner: Player::Attacker },
                defender: MarginalDistribution { atom: 1.0, support: 0.0, value: 0.0, owner: Player::Defender },
                attacker_win_prob: 0.5,
            });
        }
    }

    let zeta_a = kappa / (2.0 * r_d);
    let zeta_d = r_a / (2.0 * r_d * r_d);
    Ok(SingleCiDefense {
        kappa,
        pi_bar,
        profile: EquilibriumProfile {
            zeta_a,
            zeta_d,
            mu: zeta_a / zeta_d,
            per_sc,
            u_a,
            u_d,
            expected_ced: pi_bar,
            r_a,
            r_d,
            verdict: BlottoVerdict::LottoOnly {
                reason: "single-CI defense profile; values degenerate off the subset".into(),
            },
        },
    })
}

/// Theorem-3/Corollary-1 check: every value below R^a/(2 R^d) and the
/// quantized integer multiples below 2^N.
pub fn check_blotto_applicability(phi: &[f64], r_a: f64, r_d: f64) -> BlottoVerdict {
    let bound = r_a / (2.0 * r_d);
    for (i, &v) in phi.iter().enumerate() {
        if v >= bound {
            return BlottoVerdict::LottoOnly {
                reason: format!("phi_{i} = {v} >= R^a/(2R^d) = {bound}; support exceeds the hard budget"),
            };
        }
    }
    // smallest grid 10^-q with relative quantization error < 1e-3 everywhere
    let mut chosen = None;
    'grid: for q in 1..=15u32 {
        let g = 10f64.powi(-(q as i32));
        for &v in phi {
            if v == 0.0 {
                continue;
            }
            let iota = (v / g).round();
            if (v - iota * g).abs() > 1e-3 * v {
                continue 'grid;
            }
        }
        chosen = Some(q);
        break;
    }
    let Some(q) = chosen else {
        return BlottoVerdict::LottoOnly {
            reason: "values do not quantize to a decimal grid at 1e-3 relative error".into(),
        };
    };
    let g = 10f64.powi(-(q as i32));
    let max_multiple = phi
        .iter()
        .map(|&v| (v / g).round())
        .fold(0.0_f64, f64::max);
    let n = phi.len();
    if max_multiple >= (n as f64).exp2() {
        return BlottoVerdict::LottoOnly {
            reason: format!(
                "max integer multiple {max_multiple} at grid 1e-{q} is not below 2^{n}"
            ),
        };
    }
    BlottoVerdict::BlottoValid { grid_exponent: q, max_multiple: max_multiple as u64 }
}

/// Budget handling when sampling an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetEnforcement {
    /// Lotto semantics: budgets bind in expectation, draws ship as-is.
    Expectation,
    /// Rescale the whole draw by R^j / sum when the sum exceeds R^j.
    CapToBudget,
}

/// Draw a full allocation vector from the per-cluster marginals.
pub fn sample_allocation(
    profile: &EquilibriumProfile,
    player: Player,
    enforcement: BudgetEnforcement,
    rng: &mut impl Rng,
) -> DVector<f64> {
    let budget = match player {
        Player::Attacker => profile.r_a,
        Player::Defender => profile.r_d,
    };
    let mut r = DVector::from_iterator(
        profile.per_sc.len(),
        profile.per_sc.iter().map(|sc| {
            match player {
                Player::Attacker => sc.attacker.sample(rng),
                Player::Defender => sc.defender.sample(rng),
            }
        }),
    );
    if enforcement == BudgetEnforcement::CapToBudget {
        let total: f64 = r.iter().sum();
        if total > budget {
            r *= budget / total;
        }
    }
    r
}

/// Who took a cluster in one match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScWinner {
    Attacker,
    Defender,
    Tie,
}

/// Realized payoffs of one allocation pair.
#[derive(Debug, Clone)]
pub struct MatchOutcome {
    pub u_a: f64,
    pub u_d: f64,
    pub winners: Vec<ScWinner>,
}

/// Score an allocation pair: higher bid takes phi_i, exact ties split it.
pub fn match_payoff(
    r_a: &DVector<f64>,
    r_d: &DVector<f64>,
    phi_a: &[f64],
    phi_d: &[f64],
) -> MatchOutcome {
    let mut u_a = 0.0;
    let mut u_d = 0.0;
    let mut winners = Vec::with_capacity(phi_a.len());
    for i in 0..phi_a.len() {
        if r_a[i] > r_d[i] {
            u_a += phi_a[i];
            winners.push(ScWinner::Attacker);
        } else if r_a[i] < r_d[i] {
            u_d += phi_d[i];
            winners.push(ScWinner::Defender);
        } else {
            u_a += phi_a[i] / 2.0;
            u_d += phi_d[i] / 2.0;
            winners.push(ScWinner::Tie);
        }
    }
    MatchOutcome { u_a, u_d, winners }
}

/// Pure best response to a known opponent allocation.
///
/// Winning cluster i costs r_i^opp plus a tick of 1e-9 R^j; the payoff
/// structure gives no partial credit, so this is a 0/1 knapsack. A greedy
/// pass by value density is checked against dynamic programming on a budget
/// grid of 1e4 ticks; the better of the two (DP authoritative on
/// disagreement) is returned as an allocation vector.
pub fn best_response(opponent: &DVector<f64>, values: &[f64], budget: f64) -> DVector<f64> {
    let n = values.len();
    let mut response = DVector::zeros(n);
    if !(budget > 0.0) {
        return response;
    }
    let tick = 1e-9 * budget;
    let costs: Vec<f64> = (0..n).map(|i| opponent[i] + tick).collect();

    // greedy by value per cost
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| (values[j] * costs[i]).total_cmp(&(values[i] * costs[j])));
    let mut greedy_set = Vec::new();
    let mut left = budget;
    for &i in &order {
        if costs[i] <= left {
            left -= costs[i];
            greedy_set.push(i);
        }
    }
    let greedy_value: f64 = greedy_set.iter().map(|&i| values[i]).sum();

    // knapsack DP on a 1e4-tick grid, rounding costs up to stay feasible
    const GRID: usize = 10_000;
    let step = budget / GRID as f64;
    let weights: Vec<usize> = costs
        .iter()
        .map(|&c| ((c / step).ceil() as usize).max(1))
        .collect();
    let mut value_at = vec![0.0_f64; GRID + 1];
    let mut chosen = vec![false; (GRID + 1) * n];
    for (i, &w) in weights.iter().enumerate() {
        if w > GRID {
            continue;
        }
        for cap in (w..=GRID).rev() {
            let candidate = value_at[cap - w] + values[i];
            if candidate > value_at[cap] {
                value_at[cap] = candidate;
                for j in 0..n {
                    chosen[cap * n + j] = chosen[(cap - w) * n + j];
                }
                chosen[cap * n + i] = true;
            }
        }
    }
    let dp_value = value_at[GRID];

    let set: Vec<usize> = if greedy_value > dp_value {
        greedy_set
    } else {
        (0..n).filter(|&i| chosen[GRID * n + i]).collect()
    };
    for i in set {
        response[i] = costs[i];
    }
    response
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_values(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    /// Trapezoid quadrature of int r dF over the uniform part plus the atom.
    fn numeric_mean(m: &MarginalDistribution) -> f64 {
        if m.support == 0.0 {
            return 0.0;
        }
        let density = (1.0 - m.atom) / m.support;
        let steps = 20_000;
        let h = m.support / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let a = i as f64 * h;
            let b = a + h;
            acc += 0.5 * (a * density + b * density) * h;
        }
        acc
    }

    #[test]
    fn symmetric_utilities_and_supports() {
        let phi = uniform_values(5);
        let p = solve_symmetric_msne(&phi, 1.0, 5.0, 2.0).unwrap();
        assert_eq!(p.u_a, 0.1); // R^a/(2R^d) exactly
        assert_abs_diff_eq!(p.expected_ced, 0.2, epsilon = 1e-15);
        for sc in &p.per_sc {
            assert_abs_diff_eq!(sc.attacker.atom, 0.8, epsilon = 1e-15);
            assert_abs_diff_eq!(sc.attacker.support, 2.0 * 0.2 * 5.0, epsilon = 1e-12);
            assert_eq!(sc.defender.atom, 0.0);
        }
    }

    #[test]
    fn equal_budgets_remove_the_atom() {
        let phi = uniform_values(3);
        let p = solve_symmetric_msne(&phi, 2.0, 2.0, 1.0).unwrap();
        for sc in &p.per_sc {
            assert_eq!(sc.attacker.atom, 0.0);
            assert_eq!(sc.attacker.support, sc.defender.support);
        }
        assert_eq!(p.u_a, 0.5);
    }

    #[test]
    fn budget_identities_by_numeric_integration() {
        let phi = vec![0.5, 0.3, 0.2];
        let p = solve_symmetric_msne(&phi, 1.0, 4.0, 1.0).unwrap();
        let attacker_total: f64 = p.per_sc.iter().map(|sc| numeric_mean(&sc.attacker)).sum();
        let defender_total: f64 = p.per_sc.iter().map(|sc| numeric_mean(&sc.defender)).sum();
        assert_abs_diff_eq!(attacker_total, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(defender_total, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn general_solver_reduces_to_symmetric() {
        let phi = vec![0.4, 0.35, 0.15, 0.1];
        let sym = solve_symmetric_msne(&phi, 1.5, 6.0, 3.0).unwrap();
        let gen = solve_general_lotto(&phi, &phi, 1.5, 6.0, 3.0).unwrap();
        assert_abs_diff_eq!(gen.zeta_a, sym.zeta_a, epsilon = 1e-12);
        assert_abs_diff_eq!(gen.zeta_d, sym.zeta_d, epsilon = 1e-12);
        assert_abs_diff_eq!(gen.u_a, sym.u_a, epsilon = 1e-12);
        assert_abs_diff_eq!(gen.u_d, sym.u_d, epsilon = 1e-12);
        assert_abs_diff_eq!(gen.expected_ced, sym.expected_ced, epsilon = 1e-12);
        for (a, b) in gen.per_sc.iter().zip(sym.per_sc.iter()) {
            assert_abs_diff_eq!(a.attacker.atom, b.attacker.atom, epsilon = 1e-12);
            assert_abs_diff_eq!(a.attacker.support, b.attacker.support, epsilon = 1e-12);
            assert_abs_diff_eq!(a.defender.atom, b.defender.atom, epsilon = 1e-12);
            assert_abs_diff_eq!(a.defender.support, b.defender.support, epsilon = 1e-12);
        }
    }

    #[test]
    fn water_only_defender_matches_theorem_multiplier() {
        // defender values concentrated on a subset, others at 1e-9
        let phi: Vec<f64> = vec![0.3, 0.25, 0.2, 0.15, 0.1];
        let water: Vec<usize> = vec![3, 4];
        let kappa: f64 = water.iter().map(|&i| phi[i]).sum::<f64>();
        let mut phi_d = vec![1e-9; phi.len()];
        for &i in &water {
            phi_d[i] = phi[i] / kappa;
        }
        let (r_a, r_d) = (1.0, 4.0);
        let p = solve_general_lotto(&phi, &phi_d, r_a, r_d, 1.0).unwrap();
        assert_abs_diff_eq!(p.mu, kappa * r_d / r_a, epsilon = 1e-6 * p.mu);
    }

    #[test]
    fn general_budget_identities() {
        let phi_a = vec![0.45, 0.3, 0.15, 0.1];
        let phi_d = vec![0.2, 0.25, 0.35, 0.2];
        let p = solve_general_lotto(&phi_a, &phi_d, 2.0, 5.0, 1.0).unwrap();
        let attacker_total: f64 = p
            .per_sc
            .iter()
            .map(|sc| numeric_mean(&sc.attacker))
            .sum();
        let defender_total: f64 = p
            .per_sc
            .iter()
            .map(|sc| numeric_mean(&sc.defender))
            .sum();
        assert_abs_diff_eq!(attacker_total, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(defender_total, 5.0, epsilon = 1e-8);
    }

    #[test]
    fn single_ci_defense_formulas() {
        // kappa = 0.38, ratio 0.25 -> penalty factor 2.86
        let phi_raw = vec![0.38, 0.62];
        let d = single_ci_defense_ced(&phi_raw, &[0], 1.0, 4.0).unwrap();
        assert_abs_diff_eq!(d.kappa, 0.38, epsilon = 1e-15);
        let pi = 1.0 / (2.0 * 4.0); // U^a at MSNE times total (=1)
        assert_abs_diff_eq!(d.pi_bar / pi, 2.86, epsilon = 1e-12);

        // full subset: no penalty
        let full = single_ci_defense_ced(&phi_raw, &[0, 1], 1.0, 4.0).unwrap();
        assert_abs_diff_eq!(full.pi_bar, pi, epsilon = 1e-15);

        // always worse off for proper subsets when R^a < R^d
        for kappa_case in [0.1, 0.38, 0.75, 0.99] {
            let raw = vec![kappa_case, 1.0 - kappa_case];
            let d = single_ci_defense_ced(&raw, &[0], 1.0, 4.0).unwrap();
            assert!(d.pi_bar > pi);
        }
    }

    #[test]
    fn applicability_checks() {
        // the reported instance: 32 clusters, values iota * 1e-4, max 661
        let mut phi: Vec<f64> = vec![661.0, 650.0, 420.0, 300.0, 222.0, 100.0]
            .into_iter()
            .map(|i| i * 1e-4)
            .collect();
        let used: f64 = phi.iter().sum();
        let rest = (1.0 - used) / 26.0;
        let rest = (rest / 1e-4).round() * 1e-4;
        for _ in 0..26 {
            phi.push(rest);
        }
        let v = check_blotto_applicability(&phi, 1.0, 5.0);
        assert!(matches!(
            v,
            BlottoVerdict::BlottoValid { grid_exponent: 4, max_multiple: 661 }
        ));

        let v = check_blotto_applicability(&[1.0], 1.0, 2.0);
        assert!(!v.is_valid());

        let v = check_blotto_applicability(&[0.5, 0.5], 1.8, 2.0);
        assert!(!v.is_valid());
    }

    #[test]
    fn sampling_respects_atom_mean_and_support() {
        let phi = uniform_values(4);
        let p = solve_symmetric_msne(&phi, 1.0, 5.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut zeros = 0usize;
        let mut means = [0.0; 4];
        for _ in 0..draws {
            let r = sample_allocation(&p, Player::Attacker, BudgetEnforcement::Expectation, &mut rng);
            for i in 0..4 {
                if r[i] == 0.0 {
                    zeros += 1;
                }
                means[i] += r[i];
            }
            let d = sample_allocation(&p, Player::Defender, BudgetEnforcement::Expectation, &mut rng);
            for i in 0..4 {
                assert!(d[i] <= p.per_sc[i].defender.support);
            }
        }
        let zero_rate = zeros as f64 / (4 * draws) as f64;
        assert_abs_diff_eq!(zero_rate, 0.8, epsilon = 0.005);
        for (i, total) in means.iter().enumerate() {
            let mean = total / draws as f64;
            let expected = p.per_sc[i].attacker.mean();
            // 3 standard errors of the uniform part
            let se = (p.per_sc[i].attacker.support / (12f64).sqrt()) / (draws as f64).sqrt();
            assert!((mean - expected).abs() < 3.0 * se, "sc {i}: {mean} vs {expected}");
        }
    }

    #[test]
    fn payoff_cases() {
        let phi = vec![0.5, 0.3, 0.2];
        let zero = DVector::zeros(3);
        let all_ties = match_payoff(&zero, &zero, &phi, &phi);
        assert_eq!(all_ties.u_a, 0.5);
        assert_eq!(all_ties.u_d, 0.5);

        let r_a = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let dominant = match_payoff(&r_a, &zero, &phi, &phi);
        assert_eq!(dominant.u_a, 1.0);
        assert_eq!(dominant.u_d, 0.0);

        let r_a = DVector::from_vec(vec![2.0, 0.0, 2.0]);
        let r_d = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let mixed = match_payoff(&r_a, &r_d, &phi, &phi);
        assert_abs_diff_eq!(mixed.u_a, 0.7, epsilon = 1e-15);
        assert_eq!(mixed.winners[1], ScWinner::Defender);
    }

    #[test]
    fn best_response_cases() {
        let phi = vec![0.5, 0.3, 0.2];
        // opponent all-in on cluster 0: win the others for ~nothing
        let opp = DVector::from_vec(vec![3.0, 0.0, 0.0]);
        let r = best_response(&opp, &phi, 3.0);
        assert_eq!(r[0], 0.0);
        assert!(r[1] > 0.0 && r[2] > 0.0);

        // zero budget
        let r = best_response(&opp, &phi, 0.0);
        assert_eq!(r, DVector::zeros(3));
    }

    #[test]
    fn best_response_beats_half_against_proportional_equal_budgets() {
        // 32 clusters, proportional opponent, equal budgets: the responder
        // wins strictly more than half the value (DP oracle instance)
        let mut phi: Vec<f64> = (0..32).map(|i| 1.0 + (i % 7) as f64).collect();
        let total: f64 = phi.iter().sum();
        for v in &mut phi {
            *v /= total;
        }
        let budget = 4.0;
        let opp = DVector::from_iterator(32, phi.iter().map(|&v| v * budget));
        let r = best_response(&opp, &phi, budget);
        let outcome = match_payoff(&r, &opp, &phi, &phi);
        assert!(outcome.u_a > 0.5, "won {}", outcome.u_a);
    }
}
