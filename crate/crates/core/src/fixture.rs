//! Seeded synthetic patent corpus with three planted topics.
//!
//! Each topic owns a set of two-word phrases. Documents string together
//! phrases of one topic with shared background words, so the topics are
//! separable by vocabulary. A handful of off-topic records carry none of the
//! phrases and are dropped by the phrase filter.
//!
//! Two triad tiers come with the corpus. `S1` pairs a base with another
//! document of its topic against one of a different topic. `S2` pairs a base
//! with two rewrites that share its bag of words exactly: one keeps every
//! phrase intact but reorders them, the other keeps the order but reverses
//! the words inside each phrase. Only word order tells them apart.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::corpus::{porter_stem, PatentRecord};
use crate::fvsm::Triad;
use crate::rng::{seeded, Rng};

pub const TOPICS: usize = 3;

const PHRASES: [[&str; 8]; TOPICS] = [
    [
        "smart meter",
        "energy grid",
        "power consumption",
        "home appliance",
        "thermostat control",
        "solar panel",
        "battery storage",
        "load balancing",
    ],
    [
        "rfid tag",
        "reader antenna",
        "inventory tracking",
        "supply chain",
        "barcode scanner",
        "warehouse shelf",
        "shipment container",
        "pallet label",
    ],
    [
        "heart rate",
        "wearable sensor",
        "blood pressure",
        "patient monitor",
        "sleep pattern",
        "glucose level",
        "fitness tracker",
        "medical alert",
    ],
];

const BACKGROUND: [&str; 14] = [
    "system",
    "method",
    "device",
    "data",
    "network",
    "wireless",
    "module",
    "signal",
    "user",
    "server",
    "communication",
    "information",
    "apparatus",
    "processor",
];

const CONNECTORS: [&str; 6] = ["the", "with", "for", "and", "of", "from"];

const OFF_TOPIC: [&str; 10] = [
    "recipe", "kitchen", "furniture", "chair", "wooden", "fabric", "garden", "flower", "paint",
    "brush",
];

/// Shape of the generated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureConfig {
    pub docs_per_topic: usize,
    /// `S2` triads per topic; each adds two rewritten documents.
    pub swap_triads_per_topic: usize,
    /// `S1` triads per topic.
    pub topic_triads_per_topic: usize,
    pub off_topic_docs: usize,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            docs_per_topic: 64,
            swap_triads_per_topic: 3,
            topic_triads_per_topic: 10,
            off_topic_docs: 6,
            seed: 20_240_101,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    /// Records carry their planted topic as the external label; off-topic
    /// records have none.
    pub records: Vec<PatentRecord>,
    pub triads: Vec<Triad>,
    /// Stemmed keywords: the head word of every topic phrase, then the
    /// phrases themselves.
    pub phrases: Vec<Vec<String>>,
}

type Unit = Vec<&'static str>;

struct Draft {
    title: Vec<Unit>,
    body: Vec<Unit>,
}

fn phrase(topic: usize, i: usize) -> Unit {
    PHRASES[topic][i].split(' ').collect()
}

fn draft(topic: usize, rng: &mut Rng) -> Draft {
    let mut title_idx: Vec<usize> = (0..PHRASES[topic].len()).collect();
    title_idx.shuffle(rng);
    let title = title_idx[..2].iter().map(|&i| phrase(topic, i)).collect();
    let units = rng.random_range(9..15);
    let body = (0..units)
        .map(|_| {
            if rng.random_bool(0.65) {
                phrase(topic, rng.random_range(0..PHRASES[topic].len()))
            } else {
                vec![*BACKGROUND.choose(rng).expect("non-empty")]
            }
        })
        .collect();
    Draft { title, body }
}

/// Joins units into prose: connectors between some units, a full stop every
/// few units.
fn render(units: &[Unit], rng: &mut Rng) -> String {
    let mut out = String::new();
    for (i, u) in units.iter().enumerate() {
        if i > 0 {
            if i % 5 == 0 {
                out.push_str(". ");
            } else {
                out.push(' ');
            }
            if rng.random_bool(0.4) {
                out.push_str(CONNECTORS.choose(rng).expect("non-empty"));
                out.push(' ');
            }
        }
        out.push_str(&u.join(" "));
    }
    out.push('.');
    out
}

fn record(id: String, d: &Draft, label: Option<usize>, rng: &mut Rng) -> PatentRecord {
    let title = d.title.iter().map(|u| u.join(" ")).collect::<Vec<_>>().join(" and ");
    PatentRecord {
        id,
        title,
        abstract_text: render(&d.body, rng),
        label,
    }
}

pub fn generate(cfg: &FixtureConfig) -> Fixture {
    let mut rng = seeded(cfg.seed, 0xf1c);
    let mut records = Vec::new();
    let mut by_topic: Vec<Vec<String>> = vec![Vec::new(); TOPICS];
    let mut drafts: Vec<Vec<Draft>> = (0..TOPICS).map(|_| Vec::new()).collect();

    // interleave topics so file order carries no label information
    for _ in 0..cfg.docs_per_topic {
        for topic in 0..TOPICS {
            let d = draft(topic, &mut rng);
            let id = format!("FX{:04}", records.len() + 1);
            records.push(record(id.clone(), &d, Some(topic), &mut rng));
            by_topic[topic].push(id);
            drafts[topic].push(d);
        }
    }

    let mut triads = Vec::new();
    for (topic, ids) in by_topic.iter().enumerate() {
        for _ in 0..cfg.topic_triads_per_topic {
            let pair: Vec<&String> = ids.choose_multiple(&mut rng, 2).collect();
            let other = (topic + rng.random_range(1..TOPICS)) % TOPICS;
            let negative = by_topic[other].choose(&mut rng).expect("non-empty topic");
            triads.push(Triad {
                set_tag: "S1".into(),
                ..Triad::new(pair[0], pair[1], negative)
            });
        }
    }

    for topic in 0..TOPICS {
        let all: Vec<usize> = (0..cfg.docs_per_topic).collect();
        let bases: Vec<usize> = all
            .choose_multiple(&mut rng, cfg.swap_triads_per_topic)
            .copied()
            .collect();
        for b in bases {
            let base = &drafts[topic][b];
            let mut reordered = Draft {
                title: base.title.clone(),
                body: base.body.clone(),
            };
            reordered.title.reverse();
            reordered.body.shuffle(&mut rng);
            let reversed = Draft {
                title: base.title.iter().map(|u| u.iter().rev().copied().collect()).collect(),
                body: base.body.iter().map(|u| u.iter().rev().copied().collect()).collect(),
            };
            let base_id = &by_topic[topic][b];
            let pos_id = format!("{base_id}-R");
            let neg_id = format!("{base_id}-W");
            records.push(record(pos_id.clone(), &reordered, Some(topic), &mut rng));
            records.push(record(neg_id.clone(), &reversed, Some(topic), &mut rng));
            triads.push(Triad {
                set_tag: "S2".into(),
                ..Triad::new(base_id, &pos_id, &neg_id)
            });
        }
    }

    for n in 0..cfg.off_topic_docs {
        let words: Vec<Unit> = (0..rng.random_range(8..14))
            .map(|_| {
                let pool: &[&'static str] = if rng.random_bool(0.8) { &OFF_TOPIC } else { &BACKGROUND };
                vec![*pool.choose(&mut rng).expect("non-empty")]
            })
            .collect();
        let d = Draft {
            title: words[..2].to_vec(),
            body: words[2..].to_vec(),
        };
        records.push(record(format!("FXN{:02}", n + 1), &d, None, &mut rng));
    }

    let stems = |p: &str| -> Vec<String> {
        p.split(' ')
            .map(|w| porter_stem(w).expect("fixture words are lowercase ASCII"))
            .collect()
    };
    // head words first, then the full phrases; the reversed rewrites keep
    // every word but no phrase, so they survive only through the head words
    let mut phrases: Vec<Vec<String>> = Vec::new();
    for p in PHRASES.iter().flatten() {
        let head = vec![stems(p)[0].clone()];
        if !phrases.contains(&head) {
            phrases.push(head);
        }
    }
    phrases.extend(PHRASES.iter().flatten().map(|p| stems(p)));
    Fixture {
        records,
        triads,
        phrases,
    }
}

/// Small corpus for quick runs: `n` on-topic records drawn round-robin.
pub fn sample(n: usize, seed: u64) -> Vec<PatentRecord> {
    let mut rng = seeded(seed, 0x5a7);
    (0..n)
        .map(|i| {
            let topic = i % TOPICS;
            let d = draft(topic, &mut rng);
            record(format!("SX{:03}", i + 1), &d, Some(topic), &mut rng)
        })
        .collect()
}

/// Triad CSV with header `base_id,positive_id,negative_id,set_tag`.
pub fn triads_csv(triads: &[Triad]) -> String {
    let mut out = String::from("base_id,positive_id,negative_id,set_tag\n");
    for t in triads {
        out.push_str(&format!("{},{},{},{}\n", t.base, t.positive, t.negative, t.set_tag));
    }
    out
}

/// Phrase file: one phrase per line, stems comma-separated.
pub fn phrases_text(phrases: &[Vec<String>]) -> String {
    phrases.iter().map(|p| p.join(",") + "\n").collect()
}

/// JSON-lines corpus text.
pub fn corpus_jsonl(records: &[PatentRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}
