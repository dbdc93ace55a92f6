//! Regret-matching self-play (CFR+ by default, vanilla CFR available) with
//! full traversal, and exact best-response certification.
//!
//! Every traversal walks the public betting tree once, carrying a reach vector
//! per player indexed by card rank. A node therefore costs O(n * actions), and a
//! showdown is evaluated in O(n) with prefix sums.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Decision, GameTree, Node, NodeId, Player, Terminal};

const PROB_SUM_TOL: f64 = 1e-9;

/// Action probabilities for every information set owned by `player`.
///
/// `probs` is indexed by the tree's global information-set id; entries for the
/// other player's information sets are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehavioralStrategy {
    pub player: Player,
    pub probs: Vec<Vec<f64>>,
}

impl BehavioralStrategy {
    pub fn uniform(tree: &GameTree, player: Player) -> Self {
        Self::from_fn(tree, player, |_, k| vec![1.0 / k as f64; k])
    }

    /// Build a strategy from `f(infoset_id, num_actions)`.
    pub fn from_fn(
        tree: &GameTree,
        player: Player,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Self {
        let probs = tree
            .infosets()
            .iter()
            .enumerate()
            .map(|(id, s)| {
                if s.player == player {
                    f(id, s.num_actions)
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { player, probs }
    }

    pub fn validate(&self, tree: &GameTree) -> Result<()> {
        if self.probs.len() != tree.num_infosets() {
            return Err(Error::Contract(format!(
                "strategy covers {} infosets, tree has {}",
                self.probs.len(),
                tree.num_infosets()
            )));
        }
        for (s, dist) in tree.infosets().iter().zip(&self.probs) {
            if s.player != self.player {
                continue;
            }
            if dist.len() != s.num_actions {
                return Err(Error::Contract(format!(
                    "{} has {} probabilities, expected {}",
                    s.name(),
                    dist.len(),
                    s.num_actions
                )));
            }
            let sum: f64 = dist.iter().sum();
            if dist.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::Contract(format!(
                    "{} is not a distribution: {dist:?}",
                    s.name()
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, infoset: usize) -> &[f64] {
        &self.probs[infoset]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub p1: BehavioralStrategy,
    pub p2: BehavioralStrategy,
}

impl StrategyProfile {
    pub fn uniform(tree: &GameTree) -> Self {
        Self {
            p1: BehavioralStrategy::uniform(tree, Player::P1),
            p2: BehavioralStrategy::uniform(tree, Player::P2),
        }
    }

    pub fn of(&self, player: Player) -> &BehavioralStrategy {
        match player {
            Player::P1 => &self.p1,
            Player::P2 => &self.p2,
        }
    }

    pub fn validate(&self, tree: &GameTree) -> Result<()> {
        if self.p1.player != Player::P1 || self.p2.player != Player::P2 {
            return Err(Error::Contract("profile players are swapped".into()));
        }
        self.p1.validate(tree)?;
        self.p2.validate(tree)
    }

    /// Probability of the action at `infoset`, whichever player owns it.
    pub fn prob(&self, tree: &GameTree, infoset: usize, action: usize) -> f64 {
        self.of(tree.infosets()[infoset].player).probs[infoset][action]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Averaging {
    /// Iteration `t` contributes with weight `t`.
    #[default]
    Linear,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RegretUpdate {
    /// Simultaneous updates, cumulative regrets unbounded below.
    Vanilla,
    /// Alternating updates with cumulative regrets floored at zero (CFR+).
    #[default]
    Plus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: u32,
    /// Absolute exploitability target in chips; `None` means `1e-3 * pot`.
    pub target_exploitability: Option<f64>,
    /// Exploitability of the average strategy is measured every this many iterations.
    pub check_every: u32,
    pub averaging: Averaging,
    pub regret_update: RegretUpdate,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            target_exploitability: None,
            check_every: 10,
            averaging: Averaging::Linear,
            regret_update: RegretUpdate::Plus,
        }
    }
}

impl SolverConfig {
    pub fn target_for(&self, tree: &GameTree) -> f64 {
        self.target_exploitability.unwrap_or(1e-3 * tree.spec().pot)
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations", "must be > 0"));
        }
        if self.check_every == 0 {
            return Err(Error::validation("check_every", "must be > 0"));
        }
        if let Some(t) = self.target_exploitability {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::validation(
                    "target_exploitability",
                    format!("{t} must be > 0"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u32,
    pub exploitability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub profile: StrategyProfile,
    pub exploitability: f64,
    pub iterations: u32,
    /// Player 1's expected payoff under `profile`.
    pub game_value: f64,
    pub target_exploitability: f64,
    /// False when `max_iterations` ran out before reaching the target.
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

struct Cfr<'t> {
    tree: &'t GameTree,
    /// Per-deal transfer added to player 1's terminal payoffs, `[c1 - 1][c2 - 1]`.
    shift: Option<&'t [Vec<f64>]>,
    regrets: Vec<Vec<f64>>,
    strategy_sum: Vec<Vec<f64>>,
}

fn regret_match(regrets: &[f64], out: &mut [f64]) {
    let pos: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if pos > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / pos;
        }
    } else {
        out.fill(1.0 / out.len() as f64);
    }
}

/// Counterfactual values at a terminal: `v1[i] = sum_j r2[j] u1(i, j)` and
/// `v2[j] = sum_i r1[i] u2(i, j)`.
fn terminal_values(t: &Terminal, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match *t {
        Terminal::Fold { winner, amount } => {
            let u1 = match winner {
                Player::P1 => amount,
                Player::P2 => -amount,
            };
            let s1: f64 = r1.iter().sum();
            let s2: f64 = r2.iter().sum();
            (vec![u1 * s2; r1.len()], vec![-u1 * s1; r2.len()])
        }
        Terminal::Showdown { stake } => (showdown(stake, r2), showdown(stake, r1)),
    }
}

/// Value for each card against `opp` reach: wins `stake` over lower cards,
/// loses it to higher ones, ties split.
fn showdown(stake: f64, opp: &[f64]) -> Vec<f64> {
    let total: f64 = opp.iter().sum();
    let mut below = 0.0;
    opp.iter()
        .map(|&w| {
            let above = total - below - w;
            let v = stake * (below - above);
            below += w;
            v
        })
        .collect()
}

fn scaled(reach: &[f64], dists: &[&[f64]], action: usize) -> Vec<f64> {
    reach
        .iter()
        .zip(dists)
        .map(|(r, d)| r * d[action])
        .collect()
}

impl<'t> Cfr<'t> {
    fn new(tree: &'t GameTree, shift: Option<&'t [Vec<f64>]>) -> Self {
        let zeros: Vec<Vec<f64>> = tree
            .infosets()
            .iter()
            .map(|s| vec![0.0; s.num_actions])
            .collect();
        Self {
            tree,
            shift,
            regrets: zeros.clone(),
            strategy_sum: zeros,
        }
    }

    fn iterate(&mut self, weight: f64, update: RegretUpdate) {
        let spec = self.tree.spec();
        let n = spec.n;
        let p = spec.p.weights().to_vec();
        let q = spec.q.weights().to_vec();
        let ones = vec![1.0; n];
        let root = self.tree.root();
        match update {
            RegretUpdate::Vanilla => {
                self.walk(root, &p, &q, &ones, &ones, weight, None, false);
            }
            RegretUpdate::Plus => {
                for player in [Player::P1, Player::P2] {
                    self.walk(root, &p, &q, &ones, &ones, weight, Some(player), true);
                }
            }
        }
    }

    /// `r1`/`r2` include chance; `own1`/`own2` are each player's own action
    /// probabilities only, used to weight the average strategy. Only the
    /// `updating` player's tables change (both when `None`).
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        node: NodeId,
        r1: &[f64],
        r2: &[f64],
        own1: &[f64],
        own2: &[f64],
        weight: f64,
        updating: Option<Player>,
        floor: bool,
    ) -> (Vec<f64>, Vec<f64>) {
        let tree = self.tree;
        let d: &Decision = match tree.node(node) {
            Node::Terminal(t) => {
                let (mut v1, mut v2) = terminal_values(t, r1, r2);
                if let Some(shift) = self.shift {
                    for (i, row) in shift.iter().enumerate() {
                        for (j, &delta) in row.iter().enumerate() {
                            v1[i] += r2[j] * delta;
                            v2[j] -= r1[i] * delta;
                        }
                    }
                }
                return (v1, v2);
            }
            Node::Decision(d) => d,
        };
        let n = tree.n();
        let k = d.actions.len();
        let actor = d.player();

        let mut sigma = vec![vec![0.0; k]; n];
        for (card, s) in sigma.iter_mut().enumerate() {
            regret_match(&self.regrets[d.infoset(card + 1)], s);
        }
        let dists: Vec<&[f64]> = sigma.iter().map(Vec::as_slice).collect();

        let mut child_actor_values = Vec::with_capacity(k);
        let mut other_values = vec![0.0; n];
        for (a, &child) in d.children.iter().enumerate() {
            let (v1, v2) = match actor {
                Player::P1 => self.walk(
                    child,
                    &scaled(r1, &dists, a),
                    r2,
                    &scaled(own1, &dists, a),
                    own2,
                    weight,
                    updating,
                    floor,
                ),
                Player::P2 => self.walk(
                    child,
                    r1,
                    &scaled(r2, &dists, a),
                    own1,
                    &scaled(own2, &dists, a),
                    weight,
                    updating,
                    floor,
                ),
            };
            let (mine, theirs) = match actor {
                Player::P1 => (v1, v2),
                Player::P2 => (v2, v1),
            };
            for (o, t) in other_values.iter_mut().zip(&theirs) {
                *o += t;
            }
            child_actor_values.push(mine);
        }

        let own = match actor {
            Player::P1 => own1,
            Player::P2 => own2,
        };
        let update = updating.is_none_or(|p| p == actor);
        let mut actor_values = vec![0.0; n];
        for card in 0..n {
            let id = d.infoset(card + 1);
            let v: f64 = (0..k)
                .map(|a| sigma[card][a] * child_actor_values[a][card])
                .sum();
            actor_values[card] = v;
            if !update {
                continue;
            }
            for a in 0..k {
                let r = &mut self.regrets[id][a];
                *r += child_actor_values[a][card] - v;
                if floor && *r < 0.0 {
                    *r = 0.0;
                }
                self.strategy_sum[id][a] += weight * own[card] * sigma[card][a];
            }
        }
        match actor {
            Player::P1 => (actor_values, other_values),
            Player::P2 => (other_values, actor_values),
        }
    }

    fn average(&self) -> StrategyProfile {
        let avg = |player| {
            BehavioralStrategy::from_fn(self.tree, player, |id, k| {
                let sum: f64 = self.strategy_sum[id].iter().sum();
                if sum > 0.0 {
                    self.strategy_sum[id].iter().map(|x| x / sum).collect()
                } else {
                    vec![1.0 / k as f64; k]
                }
            })
        };
        StrategyProfile {
            p1: avg(Player::P1),
            p2: avg(Player::P2),
        }
    }
}

/// Run CFR until the average profile is within the exploitability target or
/// the iteration cap is hit. Deterministic for a given tree and config.
pub fn solve(tree: &GameTree, config: &SolverConfig) -> Result<SolveReport> {
    run(tree, config, None)
}

/// [`solve`] with `shift[c1 - 1][c2 - 1]` moved from player 2 to player 1 at
/// every terminal of deal `(c1, c2)`. A per-deal constant leaves every best
/// response unchanged, so the returned strategies should match [`solve`].
/// Reported values are for the unshifted game.
pub fn solve_with_payoff_shift(
    tree: &GameTree,
    config: &SolverConfig,
    shift: &[Vec<f64>],
) -> Result<SolveReport> {
    let n = tree.n();
    if shift.len() != n || shift.iter().any(|row| row.len() != n) {
        return Err(Error::validation("shift", format!("must be {n} x {n}")));
    }
    if shift.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::validation("shift", "entries must be finite"));
    }
    run(tree, config, Some(shift))
}

fn run(tree: &GameTree, config: &SolverConfig, shift: Option<&[Vec<f64>]>) -> Result<SolveReport> {
    config.validate()?;
    let target = config.target_for(tree);
    let mut cfr = Cfr::new(tree, shift);
    let mut trace = Vec::new();
    let mut t = 0;
    loop {
        t += 1;
        let w = match config.averaging {
            Averaging::Linear => t as f64,
            Averaging::Uniform => 1.0,
        };
        cfr.iterate(w, config.regret_update);
        if t % config.check_every == 0 || t == config.max_iterations {
            let profile = cfr.average();
            let expl = exploitability(tree, &profile)?;
            trace.push(TracePoint {
                iteration: t,
                exploitability: expl,
            });
            let converged = expl <= target;
            if converged || t >= config.max_iterations {
                let game_value = expected_value(tree, &profile)?;
                return Ok(SolveReport {
                    profile,
                    exploitability: expl,
                    iterations: t,
                    game_value,
                    target_exploitability: target,
                    converged,
                    trace,
                });
            }
        }
    }
}

fn reach_for(tree: &GameTree, player: Player) -> Vec<f64> {
    match player {
        Player::P1 => tree.spec().p.weights().to_vec(),
        Player::P2 => tree.spec().q.weights().to_vec(),
    }
}

fn eval_walk(
    tree: &GameTree,
    profile: &StrategyProfile,
    node: NodeId,
    r1: &[f64],
    r2: &[f64],
) -> Vec<f64> {
    let d = match tree.node(node) {
        Node::Terminal(t) => return terminal_values(t, r1, r2).0,
        Node::Decision(d) => d,
    };
    let n = tree.n();
    let strat = profile.of(d.player());
    let dists: Vec<&[f64]> = (1..=n).map(|c| strat.get(d.infoset(c))).collect();
    let mut v1 = vec![0.0; n];
    for (a, &child) in d.children.iter().enumerate() {
        match d.player() {
            Player::P1 => {
                let cv = eval_walk(tree, profile, child, &scaled(r1, &dists, a), r2);
                for c in 0..n {
                    v1[c] += dists[c][a] * cv[c];
                }
            }
            Player::P2 => {
                let cv = eval_walk(tree, profile, child, r1, &scaled(r2, &dists, a));
                for c in 0..n {
                    v1[c] += cv[c];
                }
            }
        }
    }
    v1
}

/// Player 1's expected payoff when both players follow `profile`.
pub fn expected_value(tree: &GameTree, profile: &StrategyProfile) -> Result<f64> {
    profile.validate(tree)?;
    let p = reach_for(tree, Player::P1);
    let q = reach_for(tree, Player::P2);
    let v1 = eval_walk(tree, profile, tree.root(), &p, &q);
    Ok(p.iter().zip(&v1).map(|(a, b)| a * b).sum())
}

/// Per-card value of the best response for `me`, against opponent reach
/// `opp` (chance included).
fn br_walk(
    tree: &GameTree,
    me: Player,
    opponent: &BehavioralStrategy,
    node: NodeId,
    opp: &[f64],
) -> Vec<f64> {
    let d = match tree.node(node) {
        Node::Terminal(t) => {
            // terminal_values needs both reaches; only the opponent side matters here.
            let zeros = vec![0.0; opp.len()];
            return match me {
                Player::P1 => terminal_values(t, &zeros, opp).0,
                Player::P2 => terminal_values(t, opp, &zeros).1,
            };
        }
        Node::Decision(d) => d,
    };
    let n = tree.n();
    if d.player() == me {
        let mut best = vec![f64::NEG_INFINITY; n];
        for &child in &d.children {
            let cv = br_walk(tree, me, opponent, child, opp);
            for c in 0..n {
                // strict comparison keeps the lowest-indexed maximizer
                if cv[c] > best[c] {
                    best[c] = cv[c];
                }
            }
        }
        best
    } else {
        let dists: Vec<&[f64]> = (1..=n).map(|c| opponent.get(d.infoset(c))).collect();
        let mut total = vec![0.0; n];
        for (a, &child) in d.children.iter().enumerate() {
            let cv = br_walk(tree, me, opponent, child, &scaled(opp, &dists, a));
            for c in 0..n {
                total[c] += cv[c];
            }
        }
        total
    }
}

/// Expected payoff for `player` (in its own terms) of a pure best response to
/// `opponent`, computed exactly by one traversal.
pub fn best_response_value(
    tree: &GameTree,
    opponent: &BehavioralStrategy,
    player: Player,
) -> Result<f64> {
    if opponent.player != player.opponent() {
        return Err(Error::Contract(format!(
            "best response for {player} needs a {} strategy, got {}",
            player.opponent(),
            opponent.player
        )));
    }
    opponent.validate(tree)?;
    let opp = reach_for(tree, player.opponent());
    let own = reach_for(tree, player);
    let v = br_walk(tree, player, opponent, tree.root(), &opp);
    Ok(own.iter().zip(&v).map(|(a, b)| a * b).sum())
}

/// Average best-response gain `(BR1 + BR2) / 2`; zero exactly at equilibrium.
pub fn exploitability(tree: &GameTree, profile: &StrategyProfile) -> Result<f64> {
    profile.validate(tree)?;
    let br1 = best_response_value(tree, &profile.p2, Player::P1)?;
    let br2 = best_response_value(tree, &profile.p1, Player::P2)?;
    Ok((br1 + br2) / 2.0)
}

#[derive(Serialize)]
struct InfosetEntry {
    actions: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    exploitability: f64,
    game_value: f64,
    iterations: u32,
    target_exploitability: f64,
    converged: bool,
    trace: &'a [TracePoint],
    strategies: BTreeMap<String, InfosetEntry>,
}

impl SolveReport {
    /// JSON document with strategies keyed by infoset name (`P1/root/card9`).
    pub fn to_json(&self, tree: &GameTree) -> String {
        let mut strategies = BTreeMap::new();
        for (_, d) in tree.decisions() {
            for card in 1..=tree.n() {
                let id = d.infoset(card);
                strategies.insert(
                    tree.infosets()[id].name(),
                    InfosetEntry {
                        actions: d
                            .actions
                            .iter()
                            .map(|&a| tree.action_label(d.point, a))
                            .collect(),
                        probs: self.profile.of(d.player()).get(id).to_vec(),
                    },
                );
            }
        }
        let doc = ReportJson {
            exploitability: self.exploitability,
            game_value: self.game_value,
            iterations: self.iterations,
            target_exploitability: self.target_exploitability,
            converged: self.converged,
            trace: &self.trace,
            strategies,
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    /// Total probability that player 1 bets at the root, weighted by `p`.
    pub fn p1_bet_mass(&self, tree: &GameTree) -> f64 {
        let root = match tree.node(tree.root()) {
            Node::Decision(d) => d,
            Node::Terminal(_) => return 0.0,
        };
        (1..=tree.n())
            .map(|c| {
                let dist = self.profile.p1.get(root.infoset(c));
                // action 0 is check
                tree.spec().p.weight(c) * dist[1..].iter().sum::<f64>()
            })
            .sum()
    }
}
