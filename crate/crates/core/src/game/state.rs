use rand::seq::SliceRandom;
use rand::Rng;

use super::hand_eval;
use super::{Card, Game, GameSpec, InfoState, LegalMask, PlayerId, PokerAction};

/// What kind of node a state is in the extensive-form tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Chance,
    Decision(PlayerId),
    Terminal,
}

/// One betting action together with the context it was taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BetRecord {
    pub round: u8,
    pub player: PlayerId,
    pub action: PokerAction,
    pub raises_before: u8,
}

/// Full state of one hand. Immutable: every transition returns a new value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    game: Game,
    hole: [[Card; 2]; 2],
    hole_dealt: bool,
    board: [Card; 5],
    board_len: u8,
    history: Vec<BetRecord>,
    contrib: [u32; 2],
    round: u8,
    raises: u8,
    round_actions: u8,
    node: NodeKind,
    folded: Option<PlayerId>,
}

impl GameState {
    /// Root of the game: a chance node that deals the hole cards.
    pub fn new(game: Game) -> Self {
        GameState {
            game,
            hole: [[Card::new(0); 2]; 2],
            hole_dealt: false,
            board: [Card::new(0); 5],
            board_len: 0,
            history: Vec::new(),
            contrib: game.spec().forced,
            round: 0,
            raises: 0,
            round_actions: 0,
            node: NodeKind::Chance,
            folded: None,
        }
    }

    pub fn game(&self) -> Game {
        self.game
    }

    pub fn spec(&self) -> &'static GameSpec {
        self.game.spec()
    }

    pub fn node(&self) -> NodeKind {
        self.node
    }

    pub fn is_terminal(&self) -> bool {
        self.node == NodeKind::Terminal
    }

    pub fn is_chance(&self) -> bool {
        self.node == NodeKind::Chance
    }

    pub fn current_player(&self) -> Option<PlayerId> {
        match self.node {
            NodeKind::Decision(p) => Some(p),
            _ => None,
        }
    }

    pub fn round(&self) -> u8 {
        self.round
    }

    pub fn raises_this_round(&self) -> u8 {
        self.raises
    }

    pub fn contributions(&self) -> [u32; 2] {
        self.contrib
    }

    pub fn history(&self) -> &[BetRecord] {
        &self.history
    }

    pub fn hole_cards(&self, player: PlayerId) -> &[Card] {
        if !self.hole_dealt {
            return &[];
        }
        &self.hole[player.index()][..self.spec().hole_cards as usize]
    }

    /// Public cards revealed so far.
    pub fn board(&self) -> &[Card] {
        &self.board[..self.board_len as usize]
    }

    fn dealt_count(&self) -> usize {
        let holes = if self.hole_dealt { 2 * self.spec().hole_cards as usize } else { 0 };
        holes + self.board_len as usize
    }

    /// Number of cards the pending chance node deals.
    fn cards_needed(&self) -> usize {
        let spec = self.spec();
        if self.hole_dealt {
            spec.board_cards[self.round as usize] as usize
        } else {
            2 * spec.hole_cards as usize
        }
    }

    fn undealt(&self) -> Vec<Card> {
        let mut used = [false; 52];
        for &c in self.hole_cards(PlayerId::ZERO).iter().chain(self.hole_cards(PlayerId::ONE)) {
            used[c.index() as usize] = true;
        }
        for &c in self.board() {
            used[c.index() as usize] = true;
        }
        (0..self.spec().deck_size).map(Card::new).filter(|c| !used[c.index() as usize]).collect()
    }

    /// Enumerates the outcomes of this chance node. Hands are unordered
    /// sets, so deals that differ only in the order a player's cards arrived
    /// appear once. All outcomes are equally likely.
    pub fn chance_outcomes(&self) -> Vec<(Vec<Card>, f64)> {
        assert!(self.is_chance(), "chance_outcomes on a non-chance node");
        let available = self.undealt();
        let outcomes: Vec<Vec<Card>> = if self.hole_dealt {
            combinations(&available, self.cards_needed())
        } else {
            let k = self.spec().hole_cards as usize;
            let mut deals = Vec::new();
            for first in combinations(&available, k) {
                let rest: Vec<Card> = available.iter().copied().filter(|c| !first.contains(c)).collect();
                for second in combinations(&rest, k) {
                    let mut deal = first.clone();
                    deal.extend(second);
                    deals.push(deal);
                }
            }
            deals
        };
        let p = 1.0 / outcomes.len() as f64;
        outcomes.into_iter().map(|o| (o, p)).collect()
    }

    /// Resolves this chance node with the given cards (hole cards for seat 0
    /// then seat 1 at the root, otherwise the new board cards).
    pub fn apply_chance(&self, cards: &[Card]) -> GameState {
        assert!(self.is_chance(), "apply_chance on a non-chance node");
        assert_eq!(cards.len(), self.cards_needed(), "wrong number of cards dealt");
        let spec = self.spec();
        let mut next = self.clone();
        if !self.hole_dealt {
            let k = spec.hole_cards as usize;
            next.hole[0][..k].copy_from_slice(&cards[..k]);
            next.hole[1][..k].copy_from_slice(&cards[k..2 * k]);
            next.hole_dealt = true;
        } else {
            for &c in cards {
                next.board[next.board_len as usize] = c;
                next.board_len += 1;
            }
        }
        next.node = NodeKind::Decision(PlayerId::new(spec.first_to_act[next.round as usize] as usize));
        next
    }

    /// Deals the next cards of a shuffled deck. `deck` must be a permutation
    /// of the game's cards; the hand consumes it front to back, so two hands
    /// given the same deck see the same cards in the same seats.
    pub fn deal_from(&self, deck: &[Card]) -> GameState {
        let start = self.dealt_count();
        self.apply_chance(&deck[start..start + self.cards_needed()])
    }

    /// Samples a uniformly random outcome of this chance node.
    pub fn sample_chance<R: Rng + ?Sized>(&self, rng: &mut R) -> GameState {
        let mut available = self.undealt();
        let n = self.cards_needed();
        let (picked, _) = available.partial_shuffle(rng, n);
        let picked = picked.to_vec();
        self.apply_chance(&picked)
    }

    pub fn legal_mask(&self) -> LegalMask {
        let NodeKind::Decision(p) = self.node else {
            panic!("legal actions queried at a {:?} node", self.node);
        };
        let me = self.contrib[p.index()];
        let other = self.contrib[p.opponent().index()];
        let mut bits = 1 << PokerAction::Call.index();
        if other > me {
            bits |= 1 << PokerAction::Fold.index();
        }
        if self.raises < self.spec().raise_cap {
            bits |= 1 << PokerAction::Raise.index();
        }
        LegalMask::from_bits(bits)
    }

    pub fn legal_actions(&self) -> Vec<PokerAction> {
        self.legal_mask().to_vec()
    }

    pub fn apply_action(&self, action: PokerAction) -> GameState {
        let mask = self.legal_mask();
        assert!(mask.contains(action), "illegal action {action:?} (legal: {:?})", mask.to_vec());
        let NodeKind::Decision(p) = self.node else { unreachable!() };
        let spec = self.spec();
        let mut next = self.clone();
        next.history.push(BetRecord { round: self.round, player: p, action, raises_before: self.raises });
        next.round_actions += 1;
        let (me, other) = (p.index(), p.opponent().index());
        match action {
            PokerAction::Fold => {
                next.folded = Some(p);
                next.node = NodeKind::Terminal;
            }
            PokerAction::Call => {
                next.contrib[me] = next.contrib[other];
                if next.round_actions >= 2 {
                    next.close_round();
                } else {
                    next.node = NodeKind::Decision(p.opponent());
                }
            }
            PokerAction::Raise => {
                next.contrib[me] = next.contrib[other] + spec.bet_sizes[self.round as usize];
                next.raises += 1;
                next.node = NodeKind::Decision(p.opponent());
            }
        }
        next
    }

    fn close_round(&mut self) {
        let spec = self.spec();
        if self.round + 1 == spec.rounds {
            self.node = NodeKind::Terminal;
            return;
        }
        self.round += 1;
        self.raises = 0;
        self.round_actions = 0;
        self.node = if spec.board_cards[self.round as usize] > 0 {
            NodeKind::Chance
        } else {
            NodeKind::Decision(PlayerId::new(spec.first_to_act[self.round as usize] as usize))
        };
    }

    /// Comparable showdown strength of a player's hand; higher wins.
    fn strength(&self, player: PlayerId) -> u32 {
        let spec = self.spec();
        let hole = self.hole_cards(player);
        match self.game {
            Game::Kuhn => spec.rank_of(hole[0]) as u32,
            Game::Leduc => {
                let rank = spec.rank_of(hole[0]) as u32;
                if spec.rank_of(self.board[0]) as u32 == rank {
                    100 + rank
                } else {
                    rank
                }
            }
            Game::Lhe => {
                let mut cards = [Card::new(0); 7];
                cards[..2].copy_from_slice(hole);
                cards[2..].copy_from_slice(self.board());
                hand_eval::rank7(&cards)
            }
        }
    }

    /// Chip payoffs at a terminal state, indexed by seat. Always zero-sum.
    pub fn payoffs(&self) -> [f64; 2] {
        assert!(self.is_terminal(), "payoffs of a non-terminal state");
        let mut out = [0.0; 2];
        let winner = match self.folded {
            Some(folder) => Some(folder.opponent()),
            None => match self.strength(PlayerId::ZERO).cmp(&self.strength(PlayerId::ONE)) {
                std::cmp::Ordering::Greater => Some(PlayerId::ZERO),
                std::cmp::Ordering::Less => Some(PlayerId::ONE),
                std::cmp::Ordering::Equal => None,
            },
        };
        if let Some(w) = winner {
            let won = self.contrib[w.opponent().index()] as f64;
            out[w.index()] = won;
            out[w.opponent().index()] = -won;
        }
        out
    }

    /// The view of this state available to `player`.
    pub fn info_state(&self, player: PlayerId) -> InfoState {
        InfoState::observe(self, player)
    }
}

/// All k-subsets of `items`, each in the input order.
fn combinations(items: &[Card], k: usize) -> Vec<Vec<Card>> {
    fn rec(items: &[Card], k: usize, start: usize, cur: &mut Vec<Card>, out: &mut Vec<Vec<Card>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Deals the hole cards of a fresh hand.
pub fn initial_chance_outcomes(game: Game) -> Vec<(GameState, f64)> {
    let root = GameState::new(game);
    root.chance_outcomes().into_iter().map(|(cards, p)| (root.apply_chance(&cards), p)).collect()
}
