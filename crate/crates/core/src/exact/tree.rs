use std::collections::HashMap;

use crate::game::{Features, Game, GameState, LegalMask, NodeKind, PlayerId, NUM_ACTIONS};

use super::ExactError;

#[derive(Debug, Clone)]
pub(crate) enum TreeNode {
    Chance { outcomes: Vec<(f64, usize)> },
    Decision { player: PlayerId, infoset: usize, children: [Option<usize>; NUM_ACTIONS] },
    Terminal { payoffs: [f64; 2] },
}

/// One information state of the compiled tree.
#[derive(Debug, Clone)]
pub struct Infoset {
    pub key: String,
    pub player: PlayerId,
    pub legal: LegalMask,
    pub features: Features,
    pub(crate) nodes: Vec<usize>,
}

/// Fully expanded game tree with interned information states. Node ids are
/// assigned in pre-order, so every child id is larger than its parent's.
#[derive(Debug, Clone)]
pub struct GameTree {
    game: Game,
    pub(crate) nodes: Vec<TreeNode>,
    infosets: Vec<Infoset>,
    index: HashMap<String, usize>,
    by_player: [Vec<usize>; 2],
}

impl GameTree {
    /// Expands the whole tree. Only Kuhn and Leduc are small enough.
    pub fn build(game: Game) -> Result<Self, ExactError> {
        if game == Game::Lhe {
            return Err(ExactError::TooLarge(game));
        }
        let mut tree = GameTree {
            game,
            nodes: Vec::new(),
            infosets: Vec::new(),
            index: HashMap::new(),
            by_player: [Vec::new(), Vec::new()],
        };
        tree.expand(&GameState::new(game));
        Ok(tree)
    }

    fn expand(&mut self, state: &GameState) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Terminal { payoffs: [0.0; 2] });
        let node = match state.node() {
            NodeKind::Terminal => TreeNode::Terminal { payoffs: state.payoffs() },
            NodeKind::Chance => {
                let outcomes = state
                    .chance_outcomes()
                    .into_iter()
                    .map(|(cards, p)| (p, self.expand(&state.apply_chance(&cards))))
                    .collect();
                TreeNode::Chance { outcomes }
            }
            NodeKind::Decision(player) => {
                let info = state.info_state(player);
                let infoset = match self.index.get(info.key()) {
                    Some(&i) => i,
                    None => {
                        let i = self.infosets.len();
                        self.index.insert(info.key().to_string(), i);
                        self.by_player[player.index()].push(i);
                        self.infosets.push(Infoset {
                            key: info.key().to_string(),
                            player,
                            legal: info.legal(),
                            features: info.features().clone(),
                            nodes: Vec::new(),
                        });
                        i
                    }
                };
                self.infosets[infoset].nodes.push(id);
                let mut children = [None; NUM_ACTIONS];
                for a in state.legal_mask().iter() {
                    children[a.index()] = Some(self.expand(&state.apply_action(a)));
                }
                TreeNode::Decision { player, infoset, children }
            }
        };
        self.nodes[id] = node;
        id
    }

    pub fn game(&self) -> Game {
        self.game
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Terminal { .. })).count()
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, key: &str) -> Option<&Infoset> {
        self.index.get(key).map(|&i| &self.infosets[i])
    }

    /// Infoset ids belonging to `player`, in discovery order.
    pub fn player_infosets(&self, player: PlayerId) -> &[usize] {
        &self.by_player[player.index()]
    }

    /// Probability of reaching each terminal node under a dense profile,
    /// as (node id, probability) pairs in node order.
    pub(crate) fn terminal_reach(&self, policy: &[[f64; NUM_ACTIONS]]) -> Vec<(usize, f64)> {
        let mut reach = vec![0.0; self.nodes.len()];
        reach[0] = 1.0;
        let mut out = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            let r = reach[id];
            match node {
                TreeNode::Chance { outcomes } => {
                    for &(p, c) in outcomes {
                        reach[c] = r * p;
                    }
                }
                TreeNode::Decision { infoset, children, .. } => {
                    for (a, c) in children.iter().enumerate() {
                        if let Some(c) = *c {
                            reach[c] = r * policy[*infoset][a];
                        }
                    }
                }
                TreeNode::Terminal { .. } => out.push((id, r)),
            }
        }
        out
    }
}
