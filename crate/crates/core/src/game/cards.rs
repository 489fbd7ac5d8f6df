use serde::{Deserialize, Serialize};

use super::GameSpec;

/// Index of a card in the game's deck. Rank is `index / num_suits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Card(u8);

impl Card {
    pub const fn new(index: u8) -> Self {
        Card(index)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Human-readable form: rank character, plus suit character in games
    /// whose suits are observable.
    pub fn notation(self, spec: &GameSpec) -> String {
        let rank = spec.rank_chars.as_bytes()[spec.rank_of(self) as usize] as char;
        match spec.suit_chars.as_bytes().get(spec.suit_of(self) as usize) {
            Some(&s) if !spec.suit_chars.is_empty() => format!("{rank}{}", s as char),
            _ => rank.to_string(),
        }
    }
}
