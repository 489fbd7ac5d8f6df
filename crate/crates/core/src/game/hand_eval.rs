//! Seven-card hold'em hand ranking.

use super::Card;

const HIGH_CARD: u32 = 0;
const PAIR: u32 = 1;
const TWO_PAIR: u32 = 2;
const TRIPS: u32 = 3;
const STRAIGHT: u32 = 4;
const FLUSH: u32 = 5;
const FULL_HOUSE: u32 = 6;
const QUADS: u32 = 7;
const STRAIGHT_FLUSH: u32 = 8;

fn score(category: u32, kickers: &[u8]) -> u32 {
    let mut v = category;
    for i in 0..5 {
        v = (v << 4) | kickers.get(i).copied().unwrap_or(0) as u32;
    }
    v
}

/// Highest rank of a five-card run in a 13-bit rank mask, counting the ace
/// as low for the wheel.
fn straight_high(mask: u16) -> Option<u8> {
    let ext = ((mask as u32) << 1) | ((mask as u32 >> 12) & 1);
    (4..=13u8).rev().find(|&h| (ext >> (h - 4)) & 0x1f == 0x1f).map(|h| h - 1)
}

fn top_ranks(mask: u16, n: usize) -> Vec<u8> {
    (0..13u8).rev().filter(|r| mask & (1 << r) != 0).take(n).collect()
}

/// Strength of the best five-card hand among 5 to 7 hold'em cards (card
/// index = rank * 4 + suit). Larger is stronger; equal values tie.
pub fn rank7(cards: &[Card]) -> u32 {
    let mut counts = [0u8; 13];
    let mut suits = [0u16; 4];
    let mut mask = 0u16;
    for c in cards {
        let (r, s) = (c.index() / 4, c.index() % 4);
        counts[r as usize] += 1;
        suits[s as usize] |= 1 << r;
        mask |= 1 << r;
    }

    let flush = suits.iter().copied().find(|m| m.count_ones() >= 5);
    if let Some(fm) = flush {
        if let Some(h) = straight_high(fm) {
            return score(STRAIGHT_FLUSH, &[h]);
        }
    }

    let by_count = |n: u8| -> Vec<u8> { (0..13u8).rev().filter(|&r| counts[r as usize] == n).collect() };
    let quads = by_count(4);
    let trips = by_count(3);
    let pairs = by_count(2);
    let kickers_excluding = |excluded: &[u8], n: usize| -> Vec<u8> {
        let m = excluded.iter().fold(mask, |m, &r| m & !(1 << r));
        top_ranks(m, n)
    };

    if let Some(&q) = quads.first() {
        let mut k = vec![q];
        k.extend(kickers_excluding(&[q], 1));
        return score(QUADS, &k);
    }
    if let Some(&t) = trips.first() {
        let pair = trips.get(1).copied().into_iter().chain(pairs.first().copied()).max();
        if let Some(p) = pair {
            return score(FULL_HOUSE, &[t, p]);
        }
    }
    if let Some(fm) = flush {
        return score(FLUSH, &top_ranks(fm, 5));
    }
    if let Some(h) = straight_high(mask) {
        return score(STRAIGHT, &[h]);
    }
    if let Some(&t) = trips.first() {
        let mut k = vec![t];
        k.extend(kickers_excluding(&[t], 2));
        return score(TRIPS, &k);
    }
    if pairs.len() >= 2 {
        let (a, b) = (pairs[0], pairs[1]);
        let mut k = vec![a, b];
        k.extend(kickers_excluding(&[a, b], 1));
        return score(TWO_PAIR, &k);
    }
    if let Some(&p) = pairs.first() {
        let mut k = vec![p];
        k.extend(kickers_excluding(&[p], 3));
        return score(PAIR, &k);
    }
    score(HIGH_CARD, &top_ranks(mask, 5))
}
