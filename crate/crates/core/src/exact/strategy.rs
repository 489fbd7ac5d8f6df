use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::game::{PlayerId, NUM_ACTIONS};

use super::{ExactError, GameTree};

/// Tolerance on the sum of a probability row when validating input.
const ROW_TOLERANCE: f64 = 1e-6;

/// Dense table indexed by infoset id; entries of illegal actions are 0.
pub(crate) type DensePolicy = Vec<[f64; NUM_ACTIONS]>;

/// Per-infoset action distribution for one player, restricted to the legal
/// actions in (fold, call, raise) order. Serialises as a plain JSON object
/// from info-state key to probability array.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BehaviouralStrategy {
    table: BTreeMap<String, Vec<f64>>,
}

impl BehaviouralStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, probs: Vec<f64>) {
        self.table.insert(key.into(), probs);
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.table.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.table.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Union of two tables; entries of `other` win on key collisions.
    pub fn merged(&self, other: &BehaviouralStrategy) -> BehaviouralStrategy {
        let mut table = self.table.clone();
        table.extend(other.table.iter().map(|(k, v)| (k.clone(), v.clone())));
        BehaviouralStrategy { table }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("string keys always serialise")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ExactError> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExactError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One behavioural strategy per seat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrategyProfile {
    pub players: [BehaviouralStrategy; 2],
}

impl StrategyProfile {
    pub fn new(first: BehaviouralStrategy, second: BehaviouralStrategy) -> Self {
        StrategyProfile { players: [first, second] }
    }

    pub fn player(&self, player: PlayerId) -> &BehaviouralStrategy {
        &self.players[player.index()]
    }

    /// Both seats in one table, the on-disk form.
    pub fn combined(&self) -> BehaviouralStrategy {
        self.players[0].merged(&self.players[1])
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ExactError> {
        self.combined().save(path)
    }

    pub fn load(tree: &GameTree, path: impl AsRef<Path>) -> Result<Self, ExactError> {
        tree.split_profile(&BehaviouralStrategy::load(path)?)
    }
}

/// Realization probability of each of one player's information states.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealizationWeights {
    pub weights: BTreeMap<String, f64>,
}

impl RealizationWeights {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.weights.get(key).copied()
    }
}

impl GameTree {
    pub fn uniform_strategy(&self, player: PlayerId) -> BehaviouralStrategy {
        let mut s = BehaviouralStrategy::new();
        for &i in self.player_infosets(player) {
            let info = &self.infosets()[i];
            let n = info.legal.count();
            s.insert(info.key.clone(), vec![1.0 / n as f64; n]);
        }
        s
    }

    pub fn uniform_profile(&self) -> StrategyProfile {
        StrategyProfile::new(self.uniform_strategy(PlayerId::ZERO), self.uniform_strategy(PlayerId::ONE))
    }

    /// Splits a combined table into per-seat strategies. Keys unknown to
    /// this game are rejected.
    pub fn split_profile(&self, combined: &BehaviouralStrategy) -> Result<StrategyProfile, ExactError> {
        let mut profile = StrategyProfile::default();
        for (key, probs) in combined.iter() {
            let info = self.infoset(key).ok_or_else(|| ExactError::UnknownInfoState(key.to_string()))?;
            profile.players[info.player.index()].insert(key, probs.to_vec());
        }
        Ok(profile)
    }

    /// Writes `player`'s rows of `strategy` into a dense table, checking
    /// coverage and row validity.
    pub(crate) fn fill_dense(
        &self,
        dense: &mut DensePolicy,
        strategy: &BehaviouralStrategy,
        player: PlayerId,
    ) -> Result<(), ExactError> {
        for &i in self.player_infosets(player) {
            let info = &self.infosets()[i];
            let probs = strategy.get(&info.key).ok_or_else(|| ExactError::MissingInfoState(info.key.clone()))?;
            if probs.len() != info.legal.count() {
                return Err(ExactError::MalformedRow {
                    key: info.key.clone(),
                    reason: format!("expected {} probabilities, got {}", info.legal.count(), probs.len()),
                });
            }
            let sum: f64 = probs.iter().sum();
            if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(ExactError::MalformedRow {
                    key: info.key.clone(),
                    reason: format!("not a probability distribution: {probs:?}"),
                });
            }
            let mut row = [0.0; NUM_ACTIONS];
            for (a, p) in info.legal.iter().zip(probs) {
                row[a.index()] = *p;
            }
            dense[i] = row;
        }
        Ok(())
    }

    pub(crate) fn dense_strategy(
        &self,
        strategy: &BehaviouralStrategy,
        player: PlayerId,
    ) -> Result<DensePolicy, ExactError> {
        let mut dense = vec![[0.0; NUM_ACTIONS]; self.infosets().len()];
        self.fill_dense(&mut dense, strategy, player)?;
        Ok(dense)
    }

    pub(crate) fn dense_profile(&self, profile: &StrategyProfile) -> Result<DensePolicy, ExactError> {
        let mut dense = vec![[0.0; NUM_ACTIONS]; self.infosets().len()];
        for p in PlayerId::BOTH {
            self.fill_dense(&mut dense, profile.player(p), p)?;
        }
        Ok(dense)
    }

    pub(crate) fn strategy_from_dense(&self, dense: &[[f64; NUM_ACTIONS]], player: PlayerId) -> BehaviouralStrategy {
        let mut s = BehaviouralStrategy::new();
        for &i in self.player_infosets(player) {
            let info = &self.infosets()[i];
            s.insert(info.key.clone(), info.legal.iter().map(|a| dense[i][a.index()]).collect());
        }
        s
    }

    pub(crate) fn profile_from_dense(&self, dense: &[[f64; NUM_ACTIONS]]) -> StrategyProfile {
        StrategyProfile::new(
            self.strategy_from_dense(dense, PlayerId::ZERO),
            self.strategy_from_dense(dense, PlayerId::ONE),
        )
    }
}
