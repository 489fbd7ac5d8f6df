use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{PlayerId, NUM_ACTIONS};

use super::strategy::DensePolicy;
use super::tree::TreeNode;
use super::{BehaviouralStrategy, ExactError, GameTree, RealizationWeights, StrategyProfile};

/// Backward induction for one player against a fixed opponent. Values are
/// memoised per node, decisions per infoset; an infoset is resolved the
/// first time any of its nodes is evaluated, aggregating action values over
/// all of its nodes weighted by chance-and-opponent reach.
struct BestResponseSolver<'a, R> {
    tree: &'a GameTree,
    policy: &'a [[f64; NUM_ACTIONS]],
    player: PlayerId,
    reach: Vec<f64>,
    values: Vec<Option<f64>>,
    rows: Vec<Option<[f64; NUM_ACTIONS]>>,
    noise: f64,
    rng: R,
}

impl<'a, R: Rng> BestResponseSolver<'a, R> {
    fn new(tree: &'a GameTree, policy: &'a [[f64; NUM_ACTIONS]], player: PlayerId, noise: f64, rng: R) -> Self {
        let mut reach = vec![0.0; tree.nodes.len()];
        reach[0] = 1.0;
        for (id, node) in tree.nodes.iter().enumerate() {
            let r = reach[id];
            match node {
                TreeNode::Chance { outcomes } => {
                    for &(p, c) in outcomes {
                        reach[c] = r * p;
                    }
                }
                TreeNode::Decision { player: q, infoset, children } => {
                    for (a, c) in children.iter().enumerate() {
                        if let Some(c) = *c {
                            reach[c] = if *q == player { r } else { r * policy[*infoset][a] };
                        }
                    }
                }
                TreeNode::Terminal { .. } => {}
            }
        }
        BestResponseSolver {
            tree,
            policy,
            player,
            reach,
            values: vec![None; tree.nodes.len()],
            rows: vec![None; tree.infosets().len()],
            noise,
            rng,
        }
    }

    fn value(&mut self, node: usize) -> f64 {
        if let Some(v) = self.values[node] {
            return v;
        }
        let tree = self.tree;
        let v = match &tree.nodes[node] {
            TreeNode::Terminal { payoffs } => payoffs[self.player.index()],
            TreeNode::Chance { outcomes } => outcomes.iter().map(|&(p, c)| p * self.value(c)).sum(),
            TreeNode::Decision { player, infoset, children } => {
                let row = if *player == self.player { self.resolve(*infoset) } else { self.policy[*infoset] };
                let mut v = 0.0;
                for (a, c) in children.iter().enumerate() {
                    if let Some(c) = *c {
                        if row[a] > 0.0 {
                            v += row[a] * self.value(c);
                        }
                    }
                }
                v
            }
        };
        self.values[node] = Some(v);
        v
    }

    fn resolve(&mut self, infoset: usize) -> [f64; NUM_ACTIONS] {
        if let Some(row) = self.rows[infoset] {
            return row;
        }
        let tree = self.tree;
        let info = &tree.infosets()[infoset];
        let mut q = [0.0; NUM_ACTIONS];
        for &h in &info.nodes {
            let TreeNode::Decision { children, .. } = &tree.nodes[h] else { unreachable!() };
            let w = self.reach[h];
            for (a, c) in children.iter().enumerate() {
                if let Some(c) = *c {
                    q[a] += w * self.value(c);
                }
            }
        }
        let mut row = [0.0; NUM_ACTIONS];
        if self.noise > 0.0 && self.rng.gen::<f64>() < self.noise {
            let n = info.legal.count() as f64;
            for a in info.legal.iter() {
                row[a.index()] = 1.0 / n;
            }
        } else {
            // strict comparison keeps the lowest index on ties
            let mut best: Option<usize> = None;
            for a in info.legal.iter().map(|a| a.index()) {
                if best.is_none_or(|b| q[a] > q[b]) {
                    best = Some(a);
                }
            }
            row[best.expect("decision nodes have a legal action")] = 1.0;
        }
        self.rows[infoset] = Some(row);
        row
    }
}

impl GameTree {
    pub(crate) fn expected_payoff_dense(&self, policy: &[[f64; NUM_ACTIONS]]) -> [f64; 2] {
        let mut values = vec![[0.0; 2]; self.nodes.len()];
        for id in (0..self.nodes.len()).rev() {
            values[id] = match &self.nodes[id] {
                TreeNode::Terminal { payoffs } => *payoffs,
                TreeNode::Chance { outcomes } => outcomes
                    .iter()
                    .fold([0.0; 2], |acc, &(p, c)| [acc[0] + p * values[c][0], acc[1] + p * values[c][1]]),
                TreeNode::Decision { infoset, children, .. } => {
                    let mut v = [0.0; 2];
                    for (a, c) in children.iter().enumerate() {
                        if let Some(c) = *c {
                            let p = policy[*infoset][a];
                            v[0] += p * values[c][0];
                            v[1] += p * values[c][1];
                        }
                    }
                    v
                }
            };
        }
        values[0]
    }

    /// Best response of `player` to the other seat's rows of `policy`.
    /// Returns the dense best-response rows (only `player`'s infosets are
    /// filled) and its value.
    pub(crate) fn best_response_dense<R: Rng>(
        &self,
        policy: &[[f64; NUM_ACTIONS]],
        player: PlayerId,
        noise: f64,
        rng: R,
    ) -> (DensePolicy, f64) {
        let mut solver = BestResponseSolver::new(self, policy, player, noise, rng);
        let value = solver.value(0);
        // infosets never visited on the way down are unreachable for the
        // player's own best response; resolve them so the table is complete
        for &i in self.player_infosets(player) {
            solver.resolve(i);
        }
        let mut dense = vec![[0.0; NUM_ACTIONS]; self.infosets().len()];
        for &i in self.player_infosets(player) {
            dense[i] = solver.rows[i].expect("resolved above");
        }
        (dense, value)
    }

    pub(crate) fn exploitability_dense(&self, policy: &[[f64; NUM_ACTIONS]]) -> f64 {
        let rng = ChaCha8Rng::seed_from_u64(0);
        let v0 = self.best_response_dense(policy, PlayerId::ZERO, 0.0, rng.clone()).1;
        let v1 = self.best_response_dense(policy, PlayerId::ONE, 0.0, rng).1;
        (v0 + v1) / 2.0
    }

    /// Own-action realization probability per infoset of `player` (other
    /// entries are unspecified).
    pub(crate) fn realization_dense(&self, policy: &[[f64; NUM_ACTIONS]], player: PlayerId) -> Vec<f64> {
        let mut own = vec![0.0; self.nodes.len()];
        own[0] = 1.0;
        let mut weights = vec![0.0; self.infosets().len()];
        for (id, node) in self.nodes.iter().enumerate() {
            let r = own[id];
            match node {
                TreeNode::Chance { outcomes } => {
                    for &(_, c) in outcomes {
                        own[c] = r;
                    }
                }
                TreeNode::Decision { player: q, infoset, children } => {
                    if *q == player {
                        weights[*infoset] = r;
                    }
                    for (a, c) in children.iter().enumerate() {
                        if let Some(c) = *c {
                            own[c] = if *q == player { r * policy[*infoset][a] } else { r };
                        }
                    }
                }
                TreeNode::Terminal { .. } => {}
            }
        }
        weights
    }

    /// Realization-weighted mixture of two strategies of `player`, written
    /// into `player`'s rows of `out`.
    pub(crate) fn mix_dense(
        &self,
        first: &[[f64; NUM_ACTIONS]],
        first_weight: f64,
        second: &[[f64; NUM_ACTIONS]],
        second_weight: f64,
        player: PlayerId,
        out: &mut [[f64; NUM_ACTIONS]],
    ) {
        let x1 = self.realization_dense(first, player);
        let x2 = self.realization_dense(second, player);
        for &i in self.player_infosets(player) {
            let legal = self.infosets()[i].legal;
            let mut row = [0.0; NUM_ACTIONS];
            let mut norm = 0.0;
            for a in legal.iter().map(|a| a.index()) {
                row[a] = first_weight * x1[i] * first[i][a] + second_weight * x2[i] * second[i][a];
                norm += row[a];
            }
            if norm > 0.0 {
                for v in &mut row {
                    *v /= norm;
                }
            } else {
                let n = legal.count() as f64;
                for a in legal.iter() {
                    row[a.index()] = 1.0 / n;
                }
            }
            out[i] = row;
        }
    }

    /// Expected chip payoff of each seat under a full profile.
    pub fn expected_payoff(&self, profile: &StrategyProfile) -> Result<[f64; 2], ExactError> {
        Ok(self.expected_payoff_dense(&self.dense_profile(profile)?))
    }

    /// Best response of `player` against the opponent's strategy in
    /// `profile` (the player's own entry is ignored). With `noise` > 0 every
    /// backward-induction step passes back the uniform-random action's value
    /// with that probability, and the returned strategy is uniform there.
    pub fn best_response(
        &self,
        profile: &StrategyProfile,
        player: PlayerId,
        noise: f64,
        seed: u64,
    ) -> Result<(BehaviouralStrategy, f64), ExactError> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(ExactError::InvalidParameter(format!("noise {noise} outside [0, 1]")));
        }
        let opponent = player.opponent();
        let dense = self.dense_strategy(profile.player(opponent), opponent)?;
        let (rows, value) = self.best_response_dense(&dense, player, noise, ChaCha8Rng::seed_from_u64(seed));
        Ok((self.strategy_from_dense(&rows, player), value))
    }

    /// Mean payoff of the two best responses against the profile, in chips
    /// per hand. An exploitability of 2d certifies a d-Nash equilibrium.
    pub fn exploitability(&self, profile: &StrategyProfile) -> Result<f64, ExactError> {
        Ok(self.exploitability_dense(&self.dense_profile(profile)?))
    }

    pub fn realization_weights(
        &self,
        strategy: &BehaviouralStrategy,
        player: PlayerId,
    ) -> Result<RealizationWeights, ExactError> {
        let dense = self.dense_strategy(strategy, player)?;
        let x = self.realization_dense(&dense, player);
        let weights = self.player_infosets(player).iter().map(|&i| (self.infosets()[i].key.clone(), x[i])).collect();
        Ok(RealizationWeights { weights })
    }

    /// Behavioural strategy realization-equivalent to the convex combination
    /// `first_weight * first + second_weight * second` of the corresponding
    /// mixed strategies. Infosets unreachable under both get uniform rows.
    pub fn mix_strategies(
        &self,
        first: &BehaviouralStrategy,
        first_weight: f64,
        second: &BehaviouralStrategy,
        second_weight: f64,
        player: PlayerId,
    ) -> Result<BehaviouralStrategy, ExactError> {
        if first_weight < 0.0 || second_weight < 0.0 || (first_weight + second_weight - 1.0).abs() > 1e-9 {
            return Err(ExactError::InvalidParameter(format!(
                "mixture weights {first_weight} and {second_weight} must be nonnegative and sum to 1"
            )));
        }
        let d1 = self.dense_strategy(first, player)?;
        let d2 = self.dense_strategy(second, player)?;
        let mut out = vec![[0.0; NUM_ACTIONS]; self.infosets().len()];
        self.mix_dense(&d1, first_weight, &d2, second_weight, player, &mut out);
        Ok(self.strategy_from_dense(&out, player))
    }

    /// Probability of every terminal history under `profile`, in node order.
    pub fn terminal_distribution(&self, profile: &StrategyProfile) -> Result<Vec<f64>, ExactError> {
        let dense = self.dense_profile(profile)?;
        Ok(self.terminal_reach(&dense).into_iter().map(|(_, p)| p).collect())
    }
}
