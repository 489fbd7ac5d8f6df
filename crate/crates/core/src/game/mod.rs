//! Two-player limit poker engines (Kuhn, Leduc, heads-up limit hold'em)
//! behind one interface, with the domain-independent information-state
//! encoding used as network input.
//!
//! All chip amounts are integers in the smallest unit of the game: one ante
//! for Kuhn and Leduc, one small blind for limit hold'em.

mod cards;
pub mod hand_eval;
mod info;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cards::Card;
pub use info::{Features, InfoState};
pub use state::{initial_chance_outcomes, BetRecord, GameState, NodeKind};

/// Number of distinct poker actions (fold, call, raise).
pub const NUM_ACTIONS: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("unknown game id `{0}` (expected kuhn, leduc or lhe)")]
    UnknownGame(String),
}

/// Seat index in a two-player game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlayerId(u8);

impl PlayerId {
    pub const ZERO: PlayerId = PlayerId(0);
    pub const ONE: PlayerId = PlayerId(1);
    pub const BOTH: [PlayerId; 2] = [PlayerId(0), PlayerId(1)];

    pub fn new(index: usize) -> Self {
        assert!(index < 2, "two-player games only, got player {index}");
        PlayerId(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn opponent(self) -> PlayerId {
        PlayerId(1 - self.0)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A betting decision. Checking is a `Call` with nothing outstanding and
/// betting is a `Raise`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PokerAction {
    Fold = 0,
    Call = 1,
    Raise = 2,
}

impl PokerAction {
    pub const ALL: [PokerAction; NUM_ACTIONS] = [PokerAction::Fold, PokerAction::Call, PokerAction::Raise];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> PokerAction {
        Self::ALL[index]
    }

    /// Character used in betting strings of info-state keys.
    pub fn symbol(self) -> char {
        match self {
            PokerAction::Fold => 'f',
            PokerAction::Call => 'c',
            PokerAction::Raise => 'r',
        }
    }
}

/// Bit set over the three actions, ordered fold, call, raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LegalMask(u8);

impl LegalMask {
    pub const ALL: LegalMask = LegalMask(0b111);

    pub fn from_actions(actions: &[PokerAction]) -> Self {
        LegalMask(actions.iter().fold(0, |m, a| m | (1 << a.index())))
    }

    pub fn from_bits(bits: u8) -> Self {
        LegalMask(bits & 0b111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, action: PokerAction) -> bool {
        self.0 & (1 << action.index()) != 0
    }

    pub fn contains_index(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = PokerAction> {
        PokerAction::ALL.into_iter().filter(move |a| self.contains(*a))
    }

    pub fn to_vec(self) -> Vec<PokerAction> {
        self.iter().collect()
    }
}

/// Game identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Game {
    Kuhn,
    Leduc,
    Lhe,
}

impl Game {
    pub fn spec(self) -> &'static GameSpec {
        match self {
            Game::Kuhn => &KUHN,
            Game::Leduc => &LEDUC,
            Game::Lhe => &LHE,
        }
    }

    pub fn name(self) -> &'static str {
        self.spec().name
    }
}

impl FromStr for Game {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kuhn" => Ok(Game::Kuhn),
            "leduc" => Ok(Game::Leduc),
            "lhe" | "limit-holdem" | "holdem" => Ok(Game::Lhe),
            _ => Err(GameError::UnknownGame(s.to_string())),
        }
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Static description of a limit poker variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    pub name: &'static str,
    pub deck_size: u8,
    pub num_suits: u8,
    /// Rank characters, lowest first.
    pub rank_chars: &'static str,
    /// Suit characters; empty when suits are not observable.
    pub suit_chars: &'static str,
    pub hole_cards: u8,
    pub rounds: u8,
    /// Public cards revealed at the start of each round.
    pub board_cards: [u8; 4],
    pub raise_cap: u8,
    /// Raise size per round in chip units.
    pub bet_sizes: [u32; 4],
    /// Forced contribution per seat (antes or blinds).
    pub forced: [u32; 2],
    /// Seat that opens the betting in each round.
    pub first_to_act: [u8; 4],
    /// Chips in one stake unit for milli-unit win rates (the big blind in
    /// hold'em, the ante otherwise).
    pub stake_unit: u32,
    /// Whether card blocks in the encoding are indexed by card (true) or by
    /// rank only.
    pub encode_suits: bool,
}

pub static KUHN: GameSpec = GameSpec {
    name: "kuhn",
    deck_size: 3,
    num_suits: 1,
    rank_chars: "JQK",
    suit_chars: "",
    hole_cards: 1,
    rounds: 1,
    board_cards: [0, 0, 0, 0],
    raise_cap: 1,
    bet_sizes: [1, 0, 0, 0],
    forced: [1, 1],
    first_to_act: [0, 0, 0, 0],
    stake_unit: 1,
    encode_suits: false,
};

pub static LEDUC: GameSpec = GameSpec {
    name: "leduc",
    deck_size: 6,
    num_suits: 2,
    rank_chars: "JQK",
    suit_chars: "",
    hole_cards: 1,
    rounds: 2,
    board_cards: [0, 1, 0, 0],
    raise_cap: 2,
    bet_sizes: [2, 4, 0, 0],
    forced: [1, 1],
    first_to_act: [0, 0, 0, 0],
    stake_unit: 1,
    encode_suits: false,
};

/// Heads-up limit hold'em with seat 0 on the button (small blind). Chips are
/// counted in small blinds.
pub static LHE: GameSpec = GameSpec {
    name: "lhe",
    deck_size: 52,
    num_suits: 4,
    rank_chars: "23456789TJQKA",
    suit_chars: "cdhs",
    hole_cards: 2,
    rounds: 4,
    board_cards: [0, 3, 1, 1],
    raise_cap: 4,
    bet_sizes: [2, 2, 4, 4],
    forced: [1, 2],
    first_to_act: [0, 1, 1, 1],
    stake_unit: 2,
    encode_suits: true,
};

impl GameSpec {
    pub fn num_ranks(&self) -> u8 {
        self.deck_size / self.num_suits
    }

    pub fn rank_of(&self, card: Card) -> u8 {
        card.index() / self.num_suits
    }

    pub fn suit_of(&self, card: Card) -> u8 {
        card.index() % self.num_suits
    }

    /// Length of one per-round card block.
    pub fn card_block_len(&self) -> usize {
        if self.encode_suits {
            self.deck_size as usize
        } else {
            self.num_ranks() as usize
        }
    }

    pub fn card_section_len(&self) -> usize {
        self.rounds as usize * self.card_block_len()
    }

    /// Flattened player x round x raises-so-far x {call, raise} tensor.
    pub fn betting_section_len(&self) -> usize {
        2 * self.rounds as usize * (self.raise_cap as usize + 1) * 2
    }

    pub fn encoding_len(&self) -> usize {
        self.card_section_len() + self.betting_section_len()
    }

    /// Slot of a card inside its round block.
    pub fn card_slot(&self, card: Card) -> usize {
        if self.encode_suits {
            card.index() as usize
        } else {
            self.rank_of(card) as usize
        }
    }

    pub fn betting_slot(&self, player: PlayerId, round: u8, raises_before: u8, action: PokerAction) -> usize {
        debug_assert!(action != PokerAction::Fold);
        let cap = self.raise_cap as usize + 1;
        let cell = ((player.index() * self.rounds as usize + round as usize) * cap + raises_before as usize) * 2
            + usize::from(action == PokerAction::Raise);
        self.card_section_len() + cell
    }

    /// Total number of cards used by one fully dealt hand.
    pub fn cards_per_hand(&self) -> usize {
        2 * self.hole_cards as usize + self.board_cards.iter().map(|&b| b as usize).sum::<usize>()
    }
}
