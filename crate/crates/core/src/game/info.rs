use smallvec::SmallVec;

use super::{GameState, LegalMask, PlayerId, PokerAction};

/// Packed 0/1 feature vector. Every encoding entry is binary, so replay
/// memories store this form and expand it to floats only when batching.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Features {
    len: u16,
    words: SmallVec<[u64; 1]>,
}

impl Features {
    pub fn zeros(len: usize) -> Self {
        Features { len: len as u16, words: SmallVec::from_elem(0, len.div_ceil(64)) }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut f = Features::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            if v != 0.0 {
                f.set(i);
            }
        }
        f
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len());
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of the set entries, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// Writes the dense form into `out`, which must have length `len()`.
    pub fn write_dense(&self, out: &mut [f64]) {
        out.fill(0.0);
        for i in self.ones() {
            out[i] = 1.0;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.write_dense(&mut out);
        out
    }
}

/// A player's view of a state: canonical key, encoding and legal actions.
///
/// The key is the player's hole cards, the public cards, a colon and the
/// betting string (`c`, `r`, `f`, rounds separated by `/`). Leduc and Kuhn
/// keys carry ranks only; hold'em keys carry rank and suit, hole cards
/// highest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InfoState {
    player: PlayerId,
    key: String,
    features: Features,
    legal: LegalMask,
}

impl InfoState {
    pub(super) fn observe(state: &GameState, player: PlayerId) -> Self {
        let spec = state.spec();
        let mut key = String::new();
        let mut hole: SmallVec<[_; 2]> = state.hole_cards(player).iter().copied().collect();
        hole.sort_by(|a, b| b.cmp(a));
        for c in &hole {
            key.push_str(&c.notation(spec));
        }
        for c in state.board() {
            key.push_str(&c.notation(spec));
        }
        key.push(':');
        let mut round = 0;
        for rec in state.history() {
            while round < rec.round {
                key.push('/');
                round += 1;
            }
            key.push(rec.action.symbol());
        }
        while round < state.round() {
            key.push('/');
            round += 1;
        }

        let mut features = Features::zeros(spec.encoding_len());
        let block = spec.card_block_len();
        for &c in &hole {
            features.set(spec.card_slot(c));
        }
        for r in 1..spec.rounds as usize {
            let start: usize = spec.board_cards[..r].iter().map(|&n| n as usize).sum();
            let end = start + spec.board_cards[r] as usize;
            if end > state.board().len() {
                break;
            }
            for &c in &state.board()[start..end] {
                features.set(r * block + spec.card_slot(c));
            }
        }
        for rec in state.history() {
            if rec.action != PokerAction::Fold {
                features.set(spec.betting_slot(rec.player, rec.round, rec.raises_before, rec.action));
            }
        }

        let legal = if state.current_player() == Some(player) { state.legal_mask() } else { LegalMask::default() };
        InfoState { player, key, features, legal }
    }

    pub fn player(&self) -> PlayerId {
        self.player
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    /// Legal actions; empty unless it is this player's turn.
    pub fn legal(&self) -> LegalMask {
        self.legal
    }

    /// Dense numeric encoding: per-round k-of-n card blocks followed by the
    /// flattened betting tensor.
    pub fn encode(&self) -> Vec<f64> {
        self.features.to_dense()
    }
}
