//! Independent oracles shared by the integration tests. Nothing here calls
//! the game engine; Kuhn poker is evaluated in closed form.
#![allow(dead_code)]

use nfsp::exact::{BehaviouralStrategy, GameTree, StrategyProfile};
use nfsp::game::PlayerId;
use rand::Rng;

const RANKS: [char; 3] = ['J', 'Q', 'K'];

/// Kuhn strategy in closed form: per card, probability of betting first
/// (or after a check, for the second seat) and of calling a bet.
#[derive(Clone, Copy, Debug)]
pub struct KuhnPlan {
    pub bet: [f64; 3],
    pub call: [f64; 3],
}

pub fn kuhn_value(p0: &KuhnPlan, p1: &KuhnPlan) -> f64 {
    let mut total = 0.0;
    for c0 in 0..3 {
        for c1 in 0..3 {
            if c0 == c1 {
                continue;
            }
            let sd = if c0 > c1 { 1.0 } else { -1.0 };
            let b = p0.bet[c0];
            let after_bet = p1.call[c1] * 2.0 * sd + (1.0 - p1.call[c1]);
            let b1 = p1.bet[c1];
            let after_check_bet = p0.call[c0] * 2.0 * sd - (1.0 - p0.call[c0]);
            let after_check = b1 * after_check_bet + (1.0 - b1) * sd;
            total += (b * after_bet + (1.0 - b) * after_check) / 6.0;
        }
    }
    total
}

pub fn pure_plans() -> Vec<KuhnPlan> {
    (0..64u32)
        .map(|m| KuhnPlan {
            bet: [0, 1, 2].map(|i| ((m >> i) & 1) as f64),
            call: [0, 1, 2].map(|i| ((m >> (i + 3)) & 1) as f64),
        })
        .collect()
}

pub fn to_profile(p0: &KuhnPlan, p1: &KuhnPlan) -> StrategyProfile {
    let mut s0 = BehaviouralStrategy::new();
    let mut s1 = BehaviouralStrategy::new();
    for (i, r) in RANKS.iter().enumerate() {
        s0.insert(format!("{r}:"), vec![1.0 - p0.bet[i], p0.bet[i]]);
        s0.insert(format!("{r}:cr"), vec![1.0 - p0.call[i], p0.call[i]]);
        s1.insert(format!("{r}:c"), vec![1.0 - p1.bet[i], p1.bet[i]]);
        s1.insert(format!("{r}:r"), vec![1.0 - p1.call[i], p1.call[i]]);
    }
    StrategyProfile::new(s0, s1)
}

pub fn from_profile(profile: &StrategyProfile) -> (KuhnPlan, KuhnPlan) {
    let get = |p: usize, k: String| profile.players[p].get(&k).unwrap()[1];
    let p0 = KuhnPlan {
        bet: [0, 1, 2].map(|i| get(0, format!("{}:", RANKS[i]))),
        call: [0, 1, 2].map(|i| get(0, format!("{}:cr", RANKS[i]))),
    };
    let p1 = KuhnPlan {
        bet: [0, 1, 2].map(|i| get(1, format!("{}:c", RANKS[i]))),
        call: [0, 1, 2].map(|i| get(1, format!("{}:r", RANKS[i]))),
    };
    (p0, p1)
}

pub fn uniform_plan() -> KuhnPlan {
    KuhnPlan { bet: [0.5; 3], call: [0.5; 3] }
}

pub fn random_plan(rng: &mut impl Rng) -> KuhnPlan {
    KuhnPlan { bet: [(); 3].map(|_| rng.gen()), call: [(); 3].map(|_| rng.gen()) }
}

/// Best pure-strategy payoff of each seat against the other's plan.
pub fn brute_force_br(p0: &KuhnPlan, p1: &KuhnPlan) -> (f64, f64) {
    let plans = pure_plans();
    let v0 = plans.iter().map(|q| kuhn_value(q, p1)).fold(f64::MIN, f64::max);
    let v1 = plans.iter().map(|q| -kuhn_value(p0, q)).fold(f64::MIN, f64::max);
    (v0, v1)
}

/// Bracket on the value of Kuhn poker for seat 0 from regret matching+ on
/// the 64 x 64 pure-strategy matrix game: (lower, upper).
pub fn kuhn_value_bracket() -> (f64, f64) {
    let plans = pure_plans();
    let n = plans.len();
    let a: Vec<Vec<f64>> = plans.iter().map(|x| plans.iter().map(|y| kuhn_value(x, y)).collect()).collect();
    let (mut rx, mut ry) = (vec![0.0; n], vec![0.0; n]);
    let (mut sx, mut sy) = (vec![0.0; n], vec![0.0; n]);
    let norm = |r: &[f64]| {
        let s: f64 = r.iter().sum();
        if s > 0.0 {
            r.iter().map(|v| v / s).collect::<Vec<_>>()
        } else {
            vec![1.0 / n as f64; n]
        }
    };
    for t in 1..=20_000 {
        let x = norm(&rx);
        let y = norm(&ry);
        let ux: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * y[j]).sum()).collect();
        let uy: Vec<f64> = (0..n).map(|j| -(0..n).map(|i| a[i][j] * x[i]).sum::<f64>()).collect();
        let vx: f64 = (0..n).map(|i| x[i] * ux[i]).sum();
        let vy: f64 = (0..n).map(|j| y[j] * uy[j]).sum();
        for i in 0..n {
            rx[i] = (rx[i] + ux[i] - vx).max(0.0);
            ry[i] = (ry[i] + uy[i] - vy).max(0.0);
            sx[i] += t as f64 * x[i];
            sy[i] += t as f64 * y[i];
        }
    }
    let x = norm(&sx);
    let y = norm(&sy);
    let lower = (0..n).map(|j| (0..n).map(|i| x[i] * a[i][j]).sum::<f64>()).fold(f64::MAX, f64::min);
    let upper = (0..n).map(|i| (0..n).map(|j| a[i][j] * y[j]).sum::<f64>()).fold(f64::MIN, f64::max);
    (lower, upper)
}

/// Strategy for `player` with rows drawn from `raw`, normalised.
pub fn arb_strategy(tree: &GameTree, player: PlayerId, raw: &[f64]) -> BehaviouralStrategy {
    let mut s = BehaviouralStrategy::new();
    let mut it = raw.iter().cycle();
    for &i in tree.player_infosets(player) {
        let info = &tree.infosets()[i];
        let w: Vec<f64> = (0..info.legal.count()).map(|_| *it.next().unwrap()).collect();
        let total: f64 = w.iter().sum();
        s.insert(info.key.clone(), w.iter().map(|x| x / total).collect());
    }
    s
}
