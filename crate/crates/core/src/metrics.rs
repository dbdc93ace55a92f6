//! Minimum defense frequency, range advantage, and the optimal defense
//! frequency read off a solved profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{CardDistribution, DecisionPoint, GameTree, Player};
use crate::solver::BehavioralStrategy;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameMetrics {
    pub mdf: f64,
    pub range_advantage: f64,
    pub odf: f64,
}

/// `pot / (bet + pot)`: the calling frequency that makes a pure bluff break even.
pub fn mdf(pot: f64, bet: f64) -> Result<f64> {
    if !(pot.is_finite() && pot > 0.0) {
        return Err(Error::validation("pot", format!("{pot} must be > 0")));
    }
    if !(bet.is_finite() && bet > 0.0) {
        return Err(Error::validation("bet", format!("{bet} must be > 0")));
    }
    Ok(pot / (bet + pot))
}

/// Player 1's showdown equity: P(card1 > card2) + P(card1 == card2) / 2.
pub fn range_advantage(p: &CardDistribution, q: &CardDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::validation(
            "q",
            format!("deck sizes differ: p has {}, q has {}", p.len(), q.len()),
        ));
    }
    let (p, q) = (p.weights(), q.weights());
    let mut below = 0.0;
    let mut ra = 0.0;
    for (pi, qi) in p.iter().zip(q) {
        ra += pi * (below + 0.5 * qi);
        below += qi;
    }
    Ok(ra)
}

/// `sum_i q_i * c(i)` where `c(i)` is player 2's call probability holding card
/// `i` facing player 1's `bet_index`-th bet.
pub fn odf(
    tree: &GameTree,
    q: &CardDistribution,
    p2_strategy: &BehavioralStrategy,
    bet_index: usize,
) -> Result<f64> {
    if p2_strategy.player != Player::P2 {
        return Err(Error::Contract("odf needs a player 2 strategy".into()));
    }
    if q.len() != tree.n() {
        return Err(Error::validation("q", "deck size does not match the tree"));
    }
    let point = DecisionPoint::FacingBet(bet_index);
    let decision = tree
        .decision_at(point)
        .ok_or_else(|| Error::Contract(format!("tree has no {point} decision")))?;
    let mut total = 0.0;
    for card in 1..=tree.n() {
        let id = decision.infoset(card);
        let dist = p2_strategy
            .probs
            .get(id)
            .filter(|d| d.len() == decision.actions.len())
            .ok_or_else(|| {
                Error::Contract(format!("strategy does not cover {point} card{card}"))
            })?;
        // action 0 is call
        total += q.weight(card) * dist[0];
    }
    Ok(total.clamp(0.0, 1.0))
}
