//! Solver checks against independent oracles: a linear program for the game
//! value and hand-built equilibrium profiles certified by best response.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::lp_value;
use mdfrule::datagen::sample_simplex;
use mdfrule::game::{DecisionPoint, GameSpec, GameTree, Node, Player};
use mdfrule::solver::{
    self, best_response_value, expected_value, exploitability, solve, BehavioralStrategy,
    SolverConfig, StrategyProfile,
};

fn tree(p: Vec<f64>, q: Vec<f64>, bet: f64) -> GameTree {
    let n = p.len();
    GameTree::new(GameSpec::new(n, p, q, 1.0, 1.0, vec![bet], vec![bet]).unwrap()).unwrap()
}

fn polar(n: usize, lo: usize, hi: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[lo - 1] = 0.5;
    v[hi - 1] = 0.5;
    v
}

fn point(n: usize, card: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[card - 1] = 1.0;
    v
}

fn root_bet_prob(t: &GameTree, profile: &StrategyProfile, card: usize) -> f64 {
    let id = t.infoset_id(DecisionPoint::Root, card).unwrap();
    profile.prob(t, id, 1)
}

#[test]
fn clairvoyance_game() {
    let t = tree(polar(10, 1, 10), point(10, 5), 1.0);
    let r = solve(&t, &SolverConfig::default()).unwrap();
    assert!(r.converged);
    assert!(r.exploitability <= 1e-3, "{}", r.exploitability);
    assert!(root_bet_prob(&t, &r.profile, 10) >= 0.98);
    let bluff = root_bet_prob(&t, &r.profile, 1);
    assert!((bluff - 0.5).abs() <= 0.02, "{bluff}");
    let v = lp_value(t.spec().p.weights(), t.spec().q.weights(), 1.0, 1.0, None);
    assert!((r.game_value - v).abs() <= 1e-3, "{} vs {v}", r.game_value);
}

#[test]
fn reverse_clairvoyance_game() {
    let t = tree(point(10, 5), polar(10, 1, 10), 1.0);
    let r = solve(&t, &SolverConfig::default()).unwrap();
    assert!(r.exploitability <= 1e-3);
    assert!(1.0 - root_bet_prob(&t, &r.profile, 5) >= 0.98);
}

/// Player 1: card 1 bets half the time, card 10 always bets, card 1 folds to
/// a bet after checking. Player 2 with card 5 calls half the time and checks
/// behind. Unreached cards play anything.
fn clairvoyance_profile(t: &GameTree) -> StrategyProfile {
    let p1 = BehavioralStrategy::from_fn(t, Player::P1, |id, k| {
        let s = &t.infosets()[id];
        match (s.point, s.card) {
            (DecisionPoint::Root, 1) => vec![0.5, 0.5],
            (DecisionPoint::Root, 10) => vec![0.0, 1.0],
            (DecisionPoint::FacingCheckBet(_), 1) => vec![0.0, 1.0],
            (DecisionPoint::FacingCheckBet(_), 10) => vec![1.0, 0.0],
            _ => vec![1.0 / k as f64; k],
        }
    });
    let p2 = BehavioralStrategy::from_fn(t, Player::P2, |id, k| {
        let s = &t.infosets()[id];
        match (s.point, s.card) {
            (DecisionPoint::FacingBet(_), 5) => vec![0.5, 0.5],
            (DecisionPoint::FacingCheck, 5) => vec![1.0, 0.0],
            _ => vec![1.0 / k as f64; k],
        }
    });
    StrategyProfile { p1, p2 }
}

#[test]
fn clairvoyance_strategy_is_certified_by_best_response() {
    let t = tree(polar(10, 1, 10), point(10, 5), 1.0);
    let profile = clairvoyance_profile(&t);
    let ev = expected_value(&t, &profile).unwrap();
    // Card 10 wins 1.5 when called and 0.5 otherwise; card 1's bluff breaks even with its check.
    assert!((ev - 0.25).abs() < 1e-12, "{ev}");
    let br2 = best_response_value(&t, &profile.p1, Player::P2).unwrap();
    assert!((br2 + 0.25).abs() < 1e-12, "{br2}");
    let expl = exploitability(&t, &profile).unwrap();
    assert!(expl.abs() <= 1e-9, "{expl}");
}

#[test]
fn uniform_game_value_matches_linear_program() {
    let u = vec![0.1; 10];
    let t = tree(u.clone(), u.clone(), 1.0);
    let r = solve(&t, &SolverConfig::default()).unwrap();
    assert!(r.exploitability <= 1e-3);
    let v = lp_value(&u, &u, 1.0, 1.0, None);
    assert!((v + 23.0 / 600.0).abs() < 1e-9, "{v}");
    assert!(
        (r.game_value - v).abs() <= 2.0 * r.exploitability,
        "{} vs {v}",
        r.game_value
    );
}

#[test]
fn small_games_match_linear_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2, 3] {
        for bet in [0.5, 0.75, 1.0] {
            for _ in 0..4 {
                let p = sample_simplex(n, &mut rng).weights().to_vec();
                let q = sample_simplex(n, &mut rng).weights().to_vec();
                let t = tree(p.clone(), q.clone(), bet);
                // The value error is at most twice the exploitability.
                let cfg = SolverConfig {
                    target_exploitability: Some(1e-4),
                    ..SolverConfig::default()
                };
                let r = solve(&t, &cfg).unwrap();
                let v = lp_value(&p, &q, 1.0, bet, None);
                assert!(
                    (r.game_value - v).abs() <= 1e-3,
                    "n={n} bet={bet} p={p:?} q={q:?}: solver {} lp {v}",
                    r.game_value
                );
            }
        }
    }
}

#[test]
fn best_response_dominates_profile_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = sample_simplex(6, &mut rng).weights().to_vec();
        let q = sample_simplex(6, &mut rng).weights().to_vec();
        let t = tree(p, q, 0.75);
        let mut mixed = |player| {
            BehavioralStrategy::from_fn(&t, player, |_, k| {
                sample_simplex(k, &mut rng).weights().to_vec()
            })
        };
        let profile = StrategyProfile {
            p1: mixed(Player::P1),
            p2: mixed(Player::P2),
        };
        let ev = expected_value(&t, &profile).unwrap();
        let br1 = best_response_value(&t, &profile.p2, Player::P1).unwrap();
        let br2 = best_response_value(&t, &profile.p1, Player::P2).unwrap();
        assert!(br1 >= ev - 1e-12);
        assert!(br2 >= -ev - 1e-12);
        assert!(exploitability(&t, &profile).unwrap() >= -1e-12);
    }
}

fn non_increasing_share(r: &solver::SolveReport) -> Option<f64> {
    let pairs = r.trace.windows(2).count();
    let down = r
        .trace
        .windows(2)
        .filter(|w| w[1].exploitability <= w[0].exploitability)
        .count();
    (pairs > 0).then(|| down as f64 / pairs as f64)
}

fn assert_trace(name: &str, t: &GameTree) {
    let r = solve(t, &SolverConfig::default()).unwrap();
    let last = r.trace.last().unwrap();
    assert_eq!(last.exploitability, r.exploitability);
    assert_eq!(last.iteration, r.iterations);
    if let Some(share) = non_increasing_share(&r) {
        assert!(
            share >= 0.9,
            "{name}: only {share:.3} of trace steps are non-increasing"
        );
    }
}

#[test]
fn exploitability_trace_mostly_non_increasing_random_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert_trace("uniform", &tree(vec![0.1; 10], vec![0.1; 10], 1.0));
    for bet in [0.5, 0.75, 1.0] {
        for _ in 0..20 {
            let p = sample_simplex(10, &mut rng).weights().to_vec();
            let q = sample_simplex(10, &mut rng).weights().to_vec();
            assert_trace(&format!("p={p:?} q={q:?} bet={bet}"), &tree(p, q, bet));
        }
    }
}

#[test]
fn exploitability_trace_mostly_non_increasing_clairvoyance() {
    assert_trace("clairvoyance", &tree(polar(10, 1, 10), point(10, 5), 1.0));
}

#[test]
fn payoff_shift_leaves_strategies_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 10;
    // Shift to the convention where player 1 owns the whole pot up front.
    let own_pot = vec![vec![0.5; n]; n];
    let arbitrary: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| ((i * 7 + j * 3) % 5) as f64 * 0.25 - 0.5)
                .collect()
        })
        .collect();
    for bet in [0.5, 1.0] {
        let p = sample_simplex(n, &mut rng).weights().to_vec();
        let q = sample_simplex(n, &mut rng).weights().to_vec();
        let t = tree(p, q, bet);
        let cfg = SolverConfig {
            max_iterations: 200,
            target_exploitability: Some(1e-12),
            ..SolverConfig::default()
        };
        let base = solve(&t, &cfg).unwrap();
        for shift in [&own_pot, &arbitrary] {
            let shifted = solver::solve_with_payoff_shift(&t, &cfg, shift).unwrap();
            for (id, s) in t.infosets().iter().enumerate() {
                let a = base.profile.of(s.player).get(id);
                let b = shifted.profile.of(s.player).get(id);
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() <= 1e-9, "{}: {a:?} vs {b:?}", s.name());
                }
            }
        }
    }
}

#[test]
fn payoff_shift_rejects_bad_matrix() {
    let t = tree(vec![0.5, 0.5], vec![0.5, 0.5], 1.0);
    let err = solver::solve_with_payoff_shift(&t, &SolverConfig::default(), &[vec![0.0; 2]]);
    assert!(err.unwrap_err().is_validation());
}

#[test]
fn every_infoset_is_reachable_with_full_support() {
    let t = tree(vec![0.25; 4], vec![0.25; 4], 1.0);
    let mut seen = vec![false; t.num_infosets()];
    let mut stack = vec![t.root()];
    while let Some(id) = stack.pop() {
        if let Node::Decision(d) = t.node(id) {
            for card in 1..=t.n() {
                seen[d.infoset(card)] = true;
            }
            stack.extend(d.children.iter().copied());
        }
    }
    assert!(seen.iter().all(|&s| s));

    // Under a uniform profile every infoset has positive reach.
    let r = solve(
        &t,
        &SolverConfig {
            max_iterations: 1,
            check_every: 1,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    for s in t.infosets() {
        let probs = r
            .profile
            .of(s.player)
            .get(t.infoset_by_name(&s.name()).unwrap());
        assert_eq!(probs.len(), s.num_actions);
    }
}

#[test]
fn solve_is_deterministic() {
    let t = tree(polar(10, 2, 9), vec![0.1; 10], 0.5);
    let a = solve(&t, &SolverConfig::default()).unwrap();
    let b = solve(&t, &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
}
