//! Independent oracles for the pattern matcher and the seeded shuffle.

use proptest::prelude::*;
use wordify_core::gamekit::{rng::Lcg64, CardStatus, MatchingConfig, MatchingGame};
use wordify_core::lexicon::{pattern_matches, seed, GraphemePattern, PatternItem};
use wordify_core::WordId;

/// Enumerates every contiguous span and checks the match conditions one by one.
fn brute_force(pattern: &GraphemePattern, spelling: &[u8], unit: &[usize]) -> bool {
    let items = pattern.items();
    let n = items.len();
    if n > spelling.len() {
        return false;
    }
    'spans: for start in 0..=spelling.len() - n {
        let mut literal_positions = Vec::new();
        for (k, item) in items.iter().enumerate() {
            let pos = start + k;
            let letter = spelling[pos];
            let in_unit = unit.contains(&pos);
            let ok = match item {
                PatternItem::Literal(c) => {
                    literal_positions.push(pos);
                    letter == *c && in_unit
                }
                PatternItem::AnyConsonant => !b"aeiou".contains(&letter) && !in_unit,
                PatternItem::AnyVowel => b"aeiou".contains(&letter) && !in_unit,
            };
            if !ok {
                continue 'spans;
            }
        }
        if literal_positions == unit {
            return true;
        }
    }
    false
}

#[test]
fn matcher_agrees_with_span_enumeration_on_seed() {
    let lex = seed::lexicon();
    let patterns: Vec<GraphemePattern> = ["oa", "ow", "oCe", "igh", "y", "iCe"]
        .iter()
        .map(|s| GraphemePattern::parse(s).unwrap())
        .collect();
    let mut checks = 0;
    let mut hits = 0;
    for w in lex.words() {
        for (ui, unit) in w.units.iter().enumerate() {
            for p in &patterns {
                let fast = pattern_matches(p, w, ui).unwrap();
                assert_eq!(fast, brute_force(p, w.spelling.as_bytes(), &unit.letters), "{p} {} {ui}", w.spelling);
                checks += 1;
                hits += usize::from(fast);
            }
        }
    }
    assert!(checks >= 300, "{checks}");
    // boat, know, home, phone, rope, light, sky, rice, hide, kite, ripe
    assert_eq!(hits, 11);
}

#[test]
fn boat_has_no_split_o_span() {
    let p = GraphemePattern::parse("oCe").unwrap();
    assert!(!brute_force(&p, b"boat", &[1, 2]));
}

fn word_and_unit() -> impl Strategy<Value = (Vec<u8>, Vec<usize>)> {
    proptest::collection::vec(prop::sample::select(b"abcehiknoprstuwy".to_vec()), 1..9).prop_flat_map(
        |letters| {
            let len = letters.len();
            (
                Just(letters),
                proptest::sample::subsequence((0..len).collect::<Vec<_>>(), 1..=len.min(4)),
            )
        },
    )
}

/// A pattern spelled from the unit itself with one wildcard per gap letter,
/// so a healthy share of cases match.
fn derived_pattern(spelling: &[u8], unit: &[usize], flip: bool) -> Option<GraphemePattern> {
    let mut src = String::new();
    for (i, &pos) in unit.iter().enumerate() {
        if i > 0 {
            for letter in &spelling[unit[i - 1] + 1..pos] {
                let v = b"aeiou".contains(letter);
                src.push(if v != flip { 'V' } else { 'C' });
            }
        }
        src.push(spelling[pos] as char);
    }
    GraphemePattern::parse(&src).ok()
}

proptest! {
    #[test]
    fn matcher_agrees_with_oracle_on_random_input(
        (spelling, unit) in word_and_unit(),
        src in "[aehiostyCV]{1,4}",
        flip in any::<bool>(),
    ) {
        if let Ok(p) = GraphemePattern::parse(&src) {
            prop_assert_eq!(p.matches_unit(&spelling, &unit), brute_force(&p, &spelling, &unit));
        }
        if let Some(p) = derived_pattern(&spelling, &unit, flip) {
            let expected = brute_force(&p, &spelling, &unit);
            prop_assert_eq!(p.matches_unit(&spelling, &unit), expected);
            if !flip {
                prop_assert!(expected);
            }
        }
    }
}

/// 128-bit reimplementation of the documented generator.
struct ReferenceLcg(u128);

impl ReferenceLcg {
    fn next(&mut self) -> u64 {
        self.0 = (self.0 * 6364136223846793005 + 1442695040888963407) % (1u128 << 64);
        (self.0 >> 32) as u64
    }

    fn shuffle<T>(&mut self, v: &mut [T]) {
        let mut i = v.len();
        while i > 1 {
            i -= 1;
            let j = (self.next() % (i as u64 + 1)) as usize;
            v.swap(i, j);
        }
    }
}

proptest! {
    #[test]
    fn lcg_matches_reference(seed in any::<u64>(), len in 0usize..40) {
        let mut a: Vec<usize> = (0..len).collect();
        let mut b = a.clone();
        Lcg64::from_seed(seed).shuffle(&mut a);
        ReferenceLcg(seed as u128).shuffle(&mut b);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn seed_42_layout_is_frozen() {
    let ids = |v: &[&str]| v.iter().map(|w| WordId::new(format!("w-{w}"))).collect::<Vec<_>>();
    let cfg = MatchingConfig {
        contrast: vec!["long-o".into(), "long-i".into()],
        cards_per_category: 2,
        word_pool: [
            ("long-o".to_string(), ids(&["rope", "boat", "know", "home"])),
            ("long-i".to_string(), ids(&["ripe", "light", "sky", "hide"])),
        ]
        .into_iter()
        .collect(),
        seed: 42,
    };
    let g = MatchingGame::new("g".into(), cfg, &seed::lexicon(), chrono::DateTime::UNIX_EPOCH).unwrap();
    let layout: Vec<(&str, &str)> = g.cards.iter().map(|c| (c.word_id.as_str(), c.category.as_str())).collect();
    assert_eq!(
        layout,
        [("w-sky", "long-i"), ("w-rope", "long-o"), ("w-home", "long-o"), ("w-ripe", "long-i")]
    );
    assert!(g.cards.iter().all(|c| c.status == CardStatus::FaceDown));
}

#[test]
fn first_draw_from_seed_zero() {
    assert_eq!(Lcg64::from_seed(0).next_u32(), 335903614);
}
