//! Regenerates the synthetic corpora under `tests/fixtures/`.
//!
//! ```text
//! cargo run -p conceptvec --example synthetic_fixtures -- crates/core/tests/fixtures
//! ```
//!
//! Every file is a pure function of the constants below.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYLLABLES: &[&str] = &[
    "ba", "ko", "ri", "ta", "mu", "se", "lo", "ni", "pa", "vu", "de", "gi", "ha", "zo", "fe", "ly",
];

/// Distinct pronounceable pseudo-words.
struct Namer {
    rng: ChaCha8Rng,
    used: BTreeSet<String>,
}

impl Namer {
    fn new(seed: u64) -> Self {
        Namer {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: BTreeSet::new(),
        }
    }

    fn next(&mut self, syllables: usize) -> String {
        loop {
            let w: String = (0..syllables)
                .map(|_| *SYLLABLES.choose(&mut self.rng).unwrap())
                .collect();
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "to", "with", "was", "for", "on", "in", "is", "no", "at", "pt", "per", "as",
];

/// `tiny.txt`: 100 tokens over 12 types; 7 types occur at least 3 times.
fn tiny(dir: &Path) {
    let counts = [
        ("pain", 30),
        ("chest", 20),
        ("patient", 15),
        ("denies", 12),
        ("fever", 8),
        ("cough", 5),
        ("nausea", 3),
        ("rash", 2),
        ("edema", 2),
        ("syncope", 1),
        ("vertigo", 1),
        ("pruritus", 1),
    ];
    let mut tokens: Vec<&str> = counts
        .iter()
        .flat_map(|&(w, c)| std::iter::repeat_n(w, c))
        .collect();
    tokens.shuffle(&mut ChaCha8Rng::seed_from_u64(100));
    let mut out = String::new();
    for line in tokens.chunks(10) {
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    fs::write(dir.join("tiny.txt"), out).unwrap();

    let concepts = "# word\tconcept\npain\tC0030193\nchest\tC0817096\nfever\tC0015967\ncough\tC0010200\ncough\tC0232602\nsyncope\tC0039070\n";
    fs::write(dir.join("tiny_concepts.tsv"), concepts).unwrap();
}

/// Knowledge-injection corpus.
///
/// Documents are single-topic. Each concept group has one member per
/// topic in a distinct set of topics, so members of a group share a
/// concept but almost never a document. The similarity list scores
/// same-group pairs high and everything else low.
fn knowledge(dir: &Path) {
    const TOPICS: usize = 24;
    const TOPIC_WORDS: usize = 12;
    const GROUPS: usize = 16;
    const MEMBERS: usize = 3;
    const TARGET_TOKENS: usize = 100_000;

    let mut namer = Namer::new(7);
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let topic_words: Vec<Vec<String>> = (0..TOPICS)
        .map(|_| (0..TOPIC_WORDS).map(|_| namer.next(3)).collect())
        .collect();

    // members[g][m] = (word, topic)
    let mut members: Vec<Vec<(String, usize)>> = Vec::new();
    let mut concept_words_of_topic: Vec<Vec<String>> = vec![Vec::new(); TOPICS];
    for g in 0..GROUPS {
        let mut topics: Vec<usize> = (0..TOPICS).collect();
        topics.shuffle(&mut rng);
        let group: Vec<(String, usize)> = topics[..MEMBERS]
            .iter()
            .map(|&t| {
                let w = namer.next(2) + "x";
                concept_words_of_topic[t].push(w.clone());
                (w, t)
            })
            .collect();
        let _ = g;
        members.push(group);
    }

    let mut corpus = String::new();
    let mut n_tokens = 0;
    while n_tokens < TARGET_TOKENS {
        let topic = rng.gen_range(0..TOPICS);
        let len = rng.gen_range(8..=16);
        let mut doc = Vec::with_capacity(len);
        for _ in 0..len {
            let r: f64 = rng.gen();
            let concept_words = &concept_words_of_topic[topic];
            let w = if r < 0.15 && !concept_words.is_empty() {
                concept_words.choose(&mut rng).unwrap().clone()
            } else if r < 0.65 {
                topic_words[topic].choose(&mut rng).unwrap().clone()
            } else {
                FUNCTION_WORDS.choose(&mut rng).unwrap().to_string()
            };
            doc.push(w);
        }
        n_tokens += doc.len();
        writeln!(corpus, "{}", doc.join(" ")).unwrap();
    }
    fs::write(dir.join("knowledge_corpus.txt"), corpus).unwrap();

    let mut concepts = String::from("# word\tconcept\n");
    for (g, group) in members.iter().enumerate() {
        for (w, _) in group {
            writeln!(concepts, "{w}\tC{:07}", 9_000_000 + g).unwrap();
        }
    }
    fs::write(dir.join("knowledge_concepts.tsv"), concepts).unwrap();

    let words: Vec<(usize, &str)> = members
        .iter()
        .enumerate()
        .flat_map(|(g, group)| group.iter().map(move |(w, _)| (g, w.as_str())))
        .collect();
    let mut sim = String::from("phrase_a,phrase_b,score\n");
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let (gi, wi) = words[i];
            let (gj, wj) = words[j];
            let score = if gi == gj { 4.0 } else { 1.0 };
            writeln!(sim, "{wi},{wj},{score}").unwrap();
        }
    }
    fs::write(dir.join("knowledge_similarity.csv"), sim).unwrap();
}

/// Distributional corpus: in each planted triple `(a, b, z)`, `a` and `b`
/// are drawn interchangeably from the same topic slot while `z` belongs to
/// another topic.
fn distributional(dir: &Path) {
    const TOPICS: usize = 10;
    const TOPIC_WORDS: usize = 10;
    const TRIPLES: usize = 5;
    const TARGET_TOKENS: usize = 60_000;

    let mut namer = Namer::new(21);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let topic_words: Vec<Vec<String>> = (0..TOPICS)
        .map(|_| (0..TOPIC_WORDS).map(|_| namer.next(3)).collect())
        .collect();

    // Triple i: a, b in topic 2i; z in topic 2i+1.
    let triples: Vec<(String, String, String)> = (0..TRIPLES)
        .map(|_| (namer.next(2) + "a", namer.next(2) + "b", namer.next(2) + "z"))
        .collect();

    let mut corpus = String::new();
    let mut n_tokens = 0;
    while n_tokens < TARGET_TOKENS {
        let topic = rng.gen_range(0..TOPICS);
        let triple = &triples[(topic / 2) % TRIPLES];
        let len = rng.gen_range(6..=12);
        let mut doc = Vec::with_capacity(len);
        for _ in 0..len {
            let r: f64 = rng.gen();
            let w = if r < 0.15 {
                if topic % 2 == 0 {
                    if rng.gen_bool(0.5) { triple.0.clone() } else { triple.1.clone() }
                } else {
                    triple.2.clone()
                }
            } else if r < 0.8 {
                // Skewed within-topic distribution gives PMI some spread.
                let idx = ((rng.gen::<f64>().powi(2)) * TOPIC_WORDS as f64) as usize;
                topic_words[topic][idx].clone()
            } else {
                FUNCTION_WORDS.choose(&mut rng).unwrap().to_string()
            };
            doc.push(w);
        }
        n_tokens += doc.len();
        writeln!(corpus, "{}", doc.join(" ")).unwrap();
    }
    fs::write(dir.join("distributional_corpus.txt"), corpus).unwrap();

    let mut planted = String::from("a,b,z\n");
    for (a, b, z) in &triples {
        writeln!(planted, "{a},{b},{z}").unwrap();
    }
    fs::write(dir.join("distributional_triples.csv"), planted).unwrap();
}

/// Raw notes for end-to-end runs, exercising every normalization rule.
fn notes(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let findings = [
        ("chest pain", "C0008031"),
        ("shortness of breath", "C0013404"),
        ("heart attack", "C0027051"),
        ("myocardial infarction", "C0027051"),
        ("kidney failure", "C0035078"),
        ("renal failure", "C0035078"),
        ("high blood pressure", "C0020538"),
        ("hypertension", "C0020538"),
        ("fever", "C0015967"),
        ("pyrexia", "C0015967"),
    ];
    let openers = ["Pt is", "Patient is a", "This is a"];
    let ages = ["yo", "y/o", "year old", "-year-old"];
    let sexes = ["man", "woman", "M", "F"];
    let plans = [
        "Transferred to [**Hospital 123**] for further care.",
        "Seen by Dr. [**Last Name (NamePattern4) 456**] today.",
        "Follow up in [**2-10**] weeks.",
        "NO ACUTE DISTRESS on exam.",
        "Given 40mg IV, BP 120/80, HR 88.",
        "Started on aspirin and heparin.",
    ];

    let mut out = String::new();
    for i in 0..400 {
        let (finding, _) = findings.choose(&mut rng).unwrap();
        let (other, _) = findings.choose(&mut rng).unwrap();
        let age = rng.gen_range(18..99);
        writeln!(
            out,
            "note{i:04}\t{} {age} {} {} with hx of {finding}, now with {other}. {} {}",
            openers.choose(&mut rng).unwrap(),
            ages.choose(&mut rng).unwrap(),
            sexes.choose(&mut rng).unwrap(),
            plans.choose(&mut rng).unwrap(),
            plans.choose(&mut rng).unwrap(),
        )
        .unwrap();
    }
    fs::write(dir.join("notes.tsv"), out).unwrap();

    let mut concepts = String::from("# word\tconcept\n");
    let mut seen = BTreeSet::new();
    for (phrase, cui) in findings {
        for word in phrase.split(' ').filter(|w| w.len() > 3) {
            if seen.insert((word, cui)) {
                writeln!(concepts, "{word}\t{cui}").unwrap();
            }
        }
    }
    fs::write(dir.join("notes_concepts.tsv"), concepts).unwrap();

    let judgments = "phrase_a,phrase_b,score\n\
Heart Attack,Myocardial Infarction,4.0\n\
Kidney Failure,Renal Failure,3.9\n\
Hypertension,High Blood Pressure,3.8\n\
Fever,Pyrexia,3.7\n\
Chest Pain,Heart Attack,2.5\n\
Shortness of Breath,Chest Pain,2.0\n\
Fever,Kidney Failure,1.2\n\
Hypertension,Pyrexia,1.1\n\
Aspirin,Renal Failure,1.0\n\
Unknownium,Fever,1.0\n";
    fs::write(dir.join("notes_judgments.csv"), judgments).unwrap();
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "crates/core/tests/fixtures".into());
    let dir = Path::new(&dir);
    fs::create_dir_all(dir).unwrap();
    tiny(dir);
    knowledge(dir);
    distributional(dir);
    notes(dir);
}
