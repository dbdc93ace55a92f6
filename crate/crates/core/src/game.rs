//! The one-street game: player 1 checks or bets, player 2 calls/folds facing a
//! bet or checks/bets facing a check, and player 1 calls/folds facing that bet.
//! Cards are dealt independently from `p` and `q`, so both players may hold the
//! same rank.
//!
//! Payoffs use a half-pot baseline: each player is treated as having put `P/2`
//! into the pot, which makes every terminal exactly zero-sum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Probability weights over card ranks `1..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CardDistribution {
    weights: Vec<f64>,
}

impl CardDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::checked("weights", weights)
    }

    fn checked(field: &str, weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::validation(
                field,
                format!("need at least 2 cards, got {}", weights.len()),
            ));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::validation(
                field,
                format!("weight for card {} is {w}, must be finite and >= 0", i + 1),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::validation(
                field,
                format!("weights sum to {sum}, expected 1"),
            ));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// All mass on `rank` (1-based).
    pub fn point_mass(n: usize, rank: usize) -> Result<Self> {
        if rank == 0 || rank > n {
            return Err(Error::validation("rank", format!("{rank} not in 1..={n}")));
        }
        let mut w = vec![0.0; n];
        w[rank - 1] = 1.0;
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of `rank` (1-based).
    pub fn weight(&self, rank: usize) -> f64 {
        self.weights[rank - 1]
    }
}

impl TryFrom<Vec<f64>> for CardDistribution {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<CardDistribution> for Vec<f64> {
    fn from(d: CardDistribution) -> Self {
        d.weights
    }
}

#[derive(Deserialize)]
struct RawGameSpec {
    n: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    pot: f64,
    stack: f64,
    #[serde(default)]
    p1_bets: Vec<f64>,
    #[serde(default)]
    p2_bets: Vec<f64>,
}

/// Parameters of one game instance. Bet sizes are in chips, not pot fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameSpec")]
pub struct GameSpec {
    pub n: usize,
    pub p: CardDistribution,
    pub q: CardDistribution,
    pub pot: f64,
    pub stack: f64,
    pub p1_bets: Vec<f64>,
    pub p2_bets: Vec<f64>,
}

impl TryFrom<RawGameSpec> for GameSpec {
    type Error = Error;

    fn try_from(raw: RawGameSpec) -> Result<Self> {
        GameSpec::new(
            raw.n,
            raw.p,
            raw.q,
            raw.pot,
            raw.stack,
            raw.p1_bets,
            raw.p2_bets,
        )
    }
}

impl GameSpec {
    pub fn new(
        n: usize,
        p: Vec<f64>,
        q: Vec<f64>,
        pot: f64,
        stack: f64,
        p1_bets: Vec<f64>,
        p2_bets: Vec<f64>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("n", format!("deck size {n} < 2")));
        }
        let p = CardDistribution::checked("p", p)?;
        let q = CardDistribution::checked("q", q)?;
        for (field, d) in [("p", &p), ("q", &q)] {
            if d.len() != n {
                return Err(Error::validation(
                    field,
                    format!("has {} weights but n = {n}", d.len()),
                ));
            }
        }
        if !(pot.is_finite() && pot > 0.0) {
            return Err(Error::validation("pot", format!("{pot} must be > 0")));
        }
        if !(stack.is_finite() && stack > 0.0) {
            return Err(Error::validation("stack", format!("{stack} must be > 0")));
        }
        for (field, bets) in [("p1_bets", &p1_bets), ("p2_bets", &p2_bets)] {
            for (i, &b) in bets.iter().enumerate() {
                if !(b.is_finite() && b > 0.0 && b <= stack) {
                    return Err(Error::validation(
                        field,
                        format!("bet {b} must satisfy 0 < b <= stack ({stack})"),
                    ));
                }
                if i > 0 && b <= bets[i - 1] {
                    return Err(Error::validation(
                        field,
                        "bet sizes must be strictly increasing",
                    ));
                }
            }
        }
        Ok(Self {
            n,
            p,
            q,
            pot,
            stack,
            p1_bets,
            p2_bets,
        })
    }

    /// Pot `pot`, stack `stack`, and the same single bet size for both players.
    pub fn single_bet(
        p: CardDistribution,
        q: CardDistribution,
        pot: f64,
        stack: f64,
        bet: f64,
    ) -> Result<Self> {
        let n = p.len();
        Self::new(n, p.into(), q.into(), pot, stack, vec![bet], vec![bet])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("GameSpec always serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn index(self) -> usize {
        match self {
            Player::P1 => 0,
            Player::P2 => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index() + 1)
    }
}

/// Where in the betting sequence a decision happens. Bet indices refer to the
/// acting-before player's bet menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecisionPoint {
    Root,
    FacingBet(usize),
    FacingCheck,
    FacingCheckBet(usize),
}

impl DecisionPoint {
    pub fn player(self) -> Player {
        match self {
            DecisionPoint::Root | DecisionPoint::FacingCheckBet(_) => Player::P1,
            DecisionPoint::FacingBet(_) | DecisionPoint::FacingCheck => Player::P2,
        }
    }
}

impl fmt::Display for DecisionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionPoint::Root => write!(f, "root"),
            DecisionPoint::FacingBet(k) => write!(f, "facing_bet{k}"),
            DecisionPoint::FacingCheck => write!(f, "facing_check"),
            DecisionPoint::FacingCheckBet(k) => write!(f, "facing_check_bet{k}"),
        }
    }
}

/// `Bet(k)` is the k-th entry of the acting player's bet menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Check,
    Bet(usize),
    Call,
    Fold,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Terminal {
    /// Showdown where the higher card wins `stake` from the other player.
    Showdown { stake: f64 },
    /// Someone folded; `winner` collects `amount` (half the pot).
    Fold { winner: Player, amount: f64 },
}

impl Terminal {
    /// Player 1's payoff for the deal `(card1, card2)`.
    pub fn payoff(&self, card1: usize, card2: usize) -> f64 {
        match *self {
            Terminal::Showdown { stake } => match card1.cmp(&card2) {
                std::cmp::Ordering::Greater => stake,
                std::cmp::Ordering::Less => -stake,
                std::cmp::Ordering::Equal => 0.0,
            },
            Terminal::Fold { winner, amount } => match winner {
                Player::P1 => amount,
                Player::P2 => -amount,
            },
        }
    }
}

/// Resolve a complete action sequence to its terminal outcome.
pub fn terminal_of(spec: &GameSpec, actions: &[Action]) -> Result<Terminal> {
    let half = spec.pot / 2.0;
    let bet = |menu: &[f64], k: usize, field: &str| -> Result<f64> {
        menu.get(k)
            .copied()
            .ok_or_else(|| Error::Contract(format!("{field} has no bet index {k}")))
    };
    match *actions {
        [Action::Check, Action::Check] => Ok(Terminal::Showdown { stake: half }),
        [Action::Bet(k), Action::Fold] => {
            bet(&spec.p1_bets, k, "p1_bets")?;
            Ok(Terminal::Fold {
                winner: Player::P1,
                amount: half,
            })
        }
        [Action::Bet(k), Action::Call] => Ok(Terminal::Showdown {
            stake: half + bet(&spec.p1_bets, k, "p1_bets")?,
        }),
        [Action::Check, Action::Bet(k), Action::Fold] => {
            bet(&spec.p2_bets, k, "p2_bets")?;
            Ok(Terminal::Fold {
                winner: Player::P2,
                amount: half,
            })
        }
        [Action::Check, Action::Bet(k), Action::Call] => Ok(Terminal::Showdown {
            stake: half + bet(&spec.p2_bets, k, "p2_bets")?,
        }),
        _ => Err(Error::Contract(format!(
            "{actions:?} is not a terminal action sequence"
        ))),
    }
}

/// Player 1's payoff after `actions` with the given (1-based) cards.
pub fn payoff(spec: &GameSpec, actions: &[Action], card1: usize, card2: usize) -> Result<f64> {
    for (name, c) in [("card1", card1), ("card2", card2)] {
        if c == 0 || c > spec.n {
            return Err(Error::validation(
                name,
                format!("{c} not in 1..={}", spec.n),
            ));
        }
    }
    Ok(terminal_of(spec, actions)?.payoff(card1, card2))
}

/// Equity needed for a call to break even: `call_cost / (pot + 2 * call_cost)`.
pub fn pot_odds_threshold(pot: f64, call_cost: f64) -> Result<f64> {
    if !(pot.is_finite() && pot > 0.0) {
        return Err(Error::validation("pot", format!("{pot} must be > 0")));
    }
    if !(call_cost.is_finite() && call_cost > 0.0) {
        return Err(Error::validation(
            "call_cost",
            format!("{call_cost} must be > 0"),
        ));
    }
    Ok(call_cost / (pot + 2.0 * call_cost))
}

pub type NodeId = usize;

#[derive(Clone, Debug)]
pub struct Decision {
    pub point: DecisionPoint,
    pub actions: Vec<Action>,
    pub children: Vec<NodeId>,
    /// Information set of card rank `r` is `infoset_base + r - 1`.
    pub infoset_base: usize,
}

impl Decision {
    pub fn player(&self) -> Player {
        self.point.player()
    }

    pub fn infoset(&self, rank: usize) -> usize {
        self.infoset_base + rank - 1
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Decision(Decision),
    Terminal(Terminal),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSet {
    pub player: Player,
    pub point: DecisionPoint,
    pub card: usize,
    pub num_actions: usize,
}

impl InfoSet {
    /// Stable name, e.g. `P1/root/card9`.
    pub fn name(&self) -> String {
        format!("{}/{}/card{}", self.player, self.point, self.card)
    }
}

/// The public betting tree plus the information-set catalog. Node 0 is the root.
#[derive(Clone, Debug)]
pub struct GameTree {
    spec: GameSpec,
    nodes: Vec<Node>,
    infosets: Vec<InfoSet>,
}

pub fn build_game(spec: &GameSpec) -> Result<GameTree> {
    GameTree::new(spec.clone())
}

impl GameTree {
    pub fn new(spec: GameSpec) -> Result<Self> {
        // Re-validate: fields are public and may have been edited after construction.
        let spec = GameSpec::new(
            spec.n,
            spec.p.into(),
            spec.q.into(),
            spec.pot,
            spec.stack,
            spec.p1_bets,
            spec.p2_bets,
        )?;
        let mut tree = GameTree {
            spec,
            nodes: Vec::new(),
            infosets: Vec::new(),
        };
        tree.expand(DecisionPoint::Root, &mut Vec::new())?;
        Ok(tree)
    }

    fn actions_at(&self, point: DecisionPoint) -> Vec<Action> {
        let bets = |menu: &[f64]| (0..menu.len()).map(Action::Bet).collect::<Vec<_>>();
        match point {
            DecisionPoint::Root => {
                let mut a = vec![Action::Check];
                a.extend(bets(&self.spec.p1_bets));
                a
            }
            DecisionPoint::FacingCheck => {
                let mut a = vec![Action::Check];
                a.extend(bets(&self.spec.p2_bets));
                a
            }
            DecisionPoint::FacingBet(_) | DecisionPoint::FacingCheckBet(_) => {
                vec![Action::Call, Action::Fold]
            }
        }
    }

    fn expand(&mut self, point: DecisionPoint, history: &mut Vec<Action>) -> Result<NodeId> {
        let actions = self.actions_at(point);
        let id = self.nodes.len();
        let infoset_base = self.infosets.len();
        for card in 1..=self.spec.n {
            self.infosets.push(InfoSet {
                player: point.player(),
                point,
                card,
                num_actions: actions.len(),
            });
        }
        self.nodes
            .push(Node::Terminal(Terminal::Showdown { stake: 0.0 }));

        let mut children = Vec::with_capacity(actions.len());
        for &action in &actions {
            history.push(action);
            let next = match (point, action) {
                (DecisionPoint::Root, Action::Bet(k)) => Some(DecisionPoint::FacingBet(k)),
                (DecisionPoint::Root, Action::Check) => Some(DecisionPoint::FacingCheck),
                (DecisionPoint::FacingCheck, Action::Bet(k)) => {
                    Some(DecisionPoint::FacingCheckBet(k))
                }
                _ => None,
            };
            let child = match next {
                Some(p) => self.expand(p, history)?,
                None => {
                    let t = terminal_of(&self.spec, history)?;
                    self.nodes.push(Node::Terminal(t));
                    self.nodes.len() - 1
                }
            };
            children.push(child);
            history.pop();
        }
        self.nodes[id] = Node::Decision(Decision {
            point,
            actions,
            children,
            infoset_base,
        });
        Ok(id)
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn infosets(&self) -> &[InfoSet] {
        &self.infosets
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn decisions(&self) -> impl Iterator<Item = (NodeId, &Decision)> {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            Node::Decision(d) => Some((i, d)),
            Node::Terminal(_) => None,
        })
    }

    pub fn decision_at(&self, point: DecisionPoint) -> Option<&Decision> {
        self.decisions().map(|(_, d)| d).find(|d| d.point == point)
    }

    /// Information-set id of `(point, card)`, if that decision point exists.
    pub fn infoset_id(&self, point: DecisionPoint, card: usize) -> Option<usize> {
        if card == 0 || card > self.n() {
            return None;
        }
        self.decision_at(point).map(|d| d.infoset(card))
    }

    pub fn infoset_by_name(&self, name: &str) -> Option<usize> {
        self.infosets.iter().position(|s| s.name() == name)
    }

    /// Chips committed by the bet action `Bet(k)` at `point`.
    pub fn bet_size(&self, point: DecisionPoint, k: usize) -> f64 {
        match point {
            DecisionPoint::Root => self.spec.p1_bets[k],
            DecisionPoint::FacingCheck => self.spec.p2_bets[k],
            _ => panic!("no bets at {point}"),
        }
    }

    pub fn action_label(&self, point: DecisionPoint, action: Action) -> String {
        match action {
            Action::Check => "check".into(),
            Action::Call => "call".into(),
            Action::Fold => "fold".into(),
            Action::Bet(k) => format!("bet {}", self.bet_size(point, k)),
        }
    }
}
