//! Oracles shared by the integration tests. Each is independent of the code
//! it checks.
#![allow(dead_code, clippy::needless_range_loop)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};

/// Value of the game for player 1, by linear program over player 1's
/// realization plan against player 2's per-card best replies. `root_bet`
/// pins player 1's opening bet probability per card when given.
pub fn lp_value(p: &[f64], q: &[f64], pot: f64, bet: f64, root_bet: Option<&[f64]>) -> f64 {
    lp_solve(p, q, pot, bet, root_bet).value
}

pub struct LpSolution {
    pub value: f64,
    /// Opening bet probability per card.
    pub bet: Vec<f64>,
    /// Probability per card of checking and then calling a bet.
    pub check_call: Vec<f64>,
}

pub fn lp_solve(p: &[f64], q: &[f64], pot: f64, bet: f64, root_bet: Option<&[f64]>) -> LpSolution {
    let n = p.len();
    let half = pot / 2.0;
    let sign = |i: usize, j: usize| match i.cmp(&j) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    };
    let free = (f64::NEG_INFINITY, f64::INFINITY);

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xb: Vec<_> = (0..n)
        .map(|i| match root_bet {
            Some(r) => lp.add_var(0.0, (r[i], r[i])),
            None => lp.add_var(0.0, (0.0, 1.0)),
        })
        .collect();
    // Probability of checking and then calling a bet.
    let xcc: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for i in 0..n {
        lp.add_constraint([(xb[i], 1.0), (xcc[i], 1.0)], ComparisonOp::Le, 1.0);
    }
    for j in 0..n {
        let u = lp.add_var(1.0, free);
        let w = lp.add_var(1.0, free);
        // Player 2 folds to the bet.
        let mut fold = vec![(u, 1.0)];
        // Player 2 calls the bet.
        let mut call = vec![(u, 1.0)];
        // Player 2 checks back.
        let mut check = vec![(w, 1.0)];
        let mut check_rhs = 0.0;
        // Player 2 bets after the check.
        let mut probe = vec![(w, 1.0)];
        let mut probe_rhs = 0.0;
        for i in 0..n {
            let m = p[i] * q[j];
            let s = sign(i, j);
            fold.push((xb[i], -m * half));
            call.push((xb[i], -m * s * (half + bet)));
            check.push((xb[i], m * s * half));
            check_rhs += m * s * half;
            probe.push((xcc[i], -m * (s * (half + bet) + half)));
            probe.push((xb[i], -m * half));
            probe_rhs -= m * half;
        }
        lp.add_constraint(&fold, ComparisonOp::Le, 0.0);
        lp.add_constraint(&call, ComparisonOp::Le, 0.0);
        lp.add_constraint(&check, ComparisonOp::Le, check_rhs);
        lp.add_constraint(&probe, ComparisonOp::Le, probe_rhs);
    }
    let sol = lp.solve().expect("bounded LP");
    LpSolution {
        value: sol.objective(),
        bet: xb.iter().map(|&v| sol[v]).collect(),
        check_call: xcc.iter().map(|&v| sol[v]).collect(),
    }
}

fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!(),
    }
}

/// Least squares by Cramer's rule on the normal equations.
pub fn cramer_ols(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = x[0].len();
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| x.iter().map(|r| r[a] * r[b]).sum())
                .collect()
        })
        .collect();
    let xty: Vec<f64> = (0..k)
        .map(|a| x.iter().zip(y).map(|(r, y)| r[a] * y).sum())
        .collect();
    let d = det(&xtx);
    (0..k)
        .map(|c| {
            let mut m = xtx.clone();
            for (r, v) in m.iter_mut().zip(&xty) {
                r[c] = *v;
            }
            det(&m) / d
        })
        .collect()
}
