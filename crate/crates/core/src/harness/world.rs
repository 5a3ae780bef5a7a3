//! Synthetic worlds: embeddings, KB, lexicon and gold files with planted
//! relation offsets, so recovery can be checked against known answers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const KB_FILE: &str = "kb.kb";
pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const GOLD_FILE: &str = "gold.tsv";
pub const NAMES_FILE: &str = "names.csv";
pub const MACHINES_FILE: &str = "machines.txt";
pub const SSWR_FILE: &str = "sswr.txt";
pub const SAT_FILE: &str = "sat.txt";
pub const SPEC_FILE: &str = "world.toml";

/// Order of the four terms on an analogy line for a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairOrder {
    #[default]
    InputFirst,
    AnswerFirst,
}

/// One relation between two term families, e.g. country -> capital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelationSpec {
    /// Category name used in gold and analogy files.
    pub name: String,
    pub predicate: String,
    /// Facts read `(predicate Answer Input)` instead of `(predicate Input Answer)`.
    pub answer_first: bool,
    pub input_prefix: String,
    pub answer_prefix: String,
    pub input_type: String,
    pub answer_type: String,
    pub members: usize,
    /// Trailing members whose fact is left out of the KB.
    pub held_out: usize,
    pub center_norm: f64,
    /// Typical distance of a member from the family center.
    pub spread: f64,
    pub offset_norm: f64,
    /// Noise on answer vectors, as a fraction of the offset norm.
    pub noise: f64,
    /// Inputs given a second sense whose answer lies far away.
    pub decoys: usize,
    pub analogy_problems: usize,
    pub analogy_order: PairOrder,
}

impl Default for RelationSpec {
    fn default() -> Self {
        RelationSpec {
            name: "capitals".into(),
            predicate: "capitalCity".into(),
            answer_first: true,
            input_prefix: "country".into(),
            answer_prefix: "capital".into(),
            input_type: "Country".into(),
            answer_type: "City".into(),
            members: 30,
            held_out: 5,
            center_norm: 2.0,
            spread: 1.0,
            offset_norm: 1.0,
            noise: 0.0,
            decoys: 0,
            analogy_problems: 0,
            analogy_order: PairOrder::AnswerFirst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenderSpec {
    pub names_per_gender: usize,
    /// Names per gender with a KB fact; the rest form the test list.
    pub known_per_gender: usize,
    pub center_norm: f64,
    /// Distance between the two gender centers.
    pub separation: f64,
    pub spread: f64,
}

impl Default for GenderSpec {
    fn default() -> Self {
        GenderSpec {
            names_per_gender: 100,
            known_per_gender: 60,
            center_norm: 2.0,
            separation: 2.0,
            spread: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MachineSpec {
    pub families: usize,
    pub machines_per_family: usize,
    pub parts: usize,
    pub held_out_per_family: usize,
    pub center_norm: f64,
    pub family_spread: f64,
    pub machine_spread: f64,
    pub offset_norm: f64,
    pub noise: f64,
}

impl Default for MachineSpec {
    fn default() -> Self {
        MachineSpec {
            families: 4,
            machines_per_family: 8,
            parts: 6,
            held_out_per_family: 1,
            center_norm: 2.0,
            family_spread: 2.0,
            machine_spread: 0.3,
            offset_norm: 1.0,
            noise: 0.2,
        }
    }
}

/// Root / gerund / past-tense triples linked through their root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorphologySpec {
    pub roots: usize,
    pub center_norm: f64,
    pub spread: f64,
    pub offset_norm: f64,
    pub noise: f64,
    /// Roots given a second, unrelated past-tense form.
    pub variants: usize,
    pub analogy_problems: usize,
    pub sat_items: usize,
}

impl Default for MorphologySpec {
    fn default() -> Self {
        MorphologySpec {
            roots: 30,
            center_norm: 2.0,
            spread: 1.0,
            offset_norm: 1.0,
            noise: 0.8,
            variants: 8,
            analogy_problems: 40,
            sat_items: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticWorldSpec {
    pub seed: u64,
    pub dim: usize,
    pub filler_words: usize,
    pub filler_norm: f64,
    pub relations: Vec<RelationSpec>,
    pub gender: Option<GenderSpec>,
    pub machines: Option<MachineSpec>,
    pub morphology: Option<MorphologySpec>,
}

impl Default for SyntheticWorldSpec {
    fn default() -> Self {
        SyntheticWorldSpec {
            seed: 0,
            dim: 32,
            filler_words: 200,
            filler_norm: 2.0,
            relations: Vec::new(),
            gender: None,
            machines: None,
            morphology: None,
        }
    }
}

pub const PRESETS: [&str; 5] = ["capitals", "gender", "machines", "analogy", "demo"];

impl SyntheticWorldSpec {
    pub fn preset(name: &str, seed: u64) -> Result<Self, HarnessError> {
        let base = SyntheticWorldSpec {
            seed,
            ..Default::default()
        };
        let spec = match name {
            "capitals" => SyntheticWorldSpec {
                relations: vec![RelationSpec::default()],
                ..base
            },
            "gender" => SyntheticWorldSpec {
                gender: Some(GenderSpec::default()),
                ..base
            },
            "machines" => SyntheticWorldSpec {
                machines: Some(MachineSpec::default()),
                ..base
            },
            "analogy" => SyntheticWorldSpec {
                relations: vec![
                    RelationSpec {
                        held_out: 0,
                        noise: 0.8,
                        decoys: 6,
                        analogy_problems: 40,
                        ..RelationSpec::default()
                    },
                    currency_relation(),
                ],
                morphology: Some(MorphologySpec::default()),
                ..base
            },
            "demo" => SyntheticWorldSpec {
                relations: vec![
                    RelationSpec {
                        noise: 0.3,
                        analogy_problems: 20,
                        ..RelationSpec::default()
                    },
                    currency_relation(),
                ],
                gender: Some(GenderSpec::default()),
                machines: Some(MachineSpec::default()),
                morphology: Some(MorphologySpec::default()),
                ..base
            },
            other => {
                return Err(HarnessError::BadSpec(format!(
                    "unknown preset {other:?}; expected one of {PRESETS:?}"
                )))
            }
        };
        Ok(spec)
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::BadSpec(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::BadSpec(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        let fin = |x: f64| x.is_finite() && x >= 0.0;
        for r in &self.relations {
            if r.offset_norm <= 0.0 || !r.offset_norm.is_finite() {
                return bad(format!("{}: offset_norm must be positive", r.name));
            }
            if !fin(r.noise) || !fin(r.spread) || !fin(r.center_norm) {
                return bad(format!(
                    "{}: noise, spread and center_norm must be finite and >= 0",
                    r.name
                ));
            }
            if r.held_out > r.members || r.decoys > r.members - r.held_out {
                return bad(format!("{}: held_out and decoys must fit in members", r.name));
            }
            if r.analogy_problems > 0 && r.members - r.held_out < 2 {
                return bad(format!("{}: analogy problems need two KB members", r.name));
            }
        }
        if let Some(g) = &self.gender {
            if g.known_per_gender > g.names_per_gender || g.spread < 0.0 {
                return bad("gender: known_per_gender exceeds names_per_gender".into());
            }
        }
        if let Some(m) = &self.machines {
            if m.offset_norm <= 0.0 || m.noise < 0.0 || m.held_out_per_family >= m.machines_per_family {
                return bad("machines: need positive offsets, noise >= 0 and a KB-covered machine".into());
            }
        }
        if let Some(m) = &self.morphology {
            if m.offset_norm <= 0.0 || m.noise < 0.0 || m.variants > m.roots || (m.sat_items > 0 && m.roots < 4) {
                return bad("morphology: need positive offsets, noise >= 0, and 4 roots for SAT items".into());
            }
        }
        Ok(())
    }
}

fn currency_relation() -> RelationSpec {
    RelationSpec {
        name: "currency".into(),
        predicate: "currencyOf".into(),
        answer_first: false,
        input_prefix: "nation".into(),
        answer_prefix: "money".into(),
        input_type: "Country".into(),
        answer_type: "Currency".into(),
        members: 20,
        held_out: 0,
        noise: 0.8,
        decoys: 8,
        analogy_problems: 40,
        analogy_order: PairOrder::InputFirst,
        ..RelationSpec::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Kb,
    HeldOut,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Kb => "kb",
            Split::HeldOut => "held-out",
        })
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kb" => Ok(Split::Kb),
            "held-out" => Ok(Split::HeldOut),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

/// Planted answer for one input term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoldRow {
    pub relation: String,
    pub input: String,
    pub answer: String,
    pub split: Split,
}

/// Generated file contents keyed by file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedWorld {
    pub files: BTreeMap<&'static str, String>,
}

impl GeneratedWorld {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn write_to(&self, dir: impl AsRef<Path>) -> std::io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

struct Builder {
    rng: ChaCha8Rng,
    dim: usize,
    rows: Vec<(String, Vec<f64>)>,
    kb: String,
    lexicon: String,
    gold: Vec<GoldRow>,
}

impl Builder {
    /// Gaussian vector with expected norm `norm`.
    fn gaussian(&mut self, norm: f64) -> Vec<f64> {
        let s = norm / (self.dim as f64).sqrt();
        (0..self.dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                z * s
            })
            .collect()
    }

    /// Random direction scaled to exactly `norm`.
    fn direction(&mut self, norm: f64) -> Vec<f64> {
        loop {
            let v = self.gaussian(1.0);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-9 {
                return v.into_iter().map(|x| x * norm / n).collect();
            }
        }
    }

    fn vector(&mut self, term: &str, v: Vec<f64>) {
        self.rows.push((term.to_string(), v));
    }

    fn fact(&mut self, pred: &str, x: &str, y: &str) {
        writeln!(self.kb, "({pred} {x} {y})").unwrap();
    }

    fn lex(&mut self, term: &str, concept: &str, pos: &str, number: &str) {
        writeln!(self.lexicon, "{term}\t{concept}\t{pos}\t{number}").unwrap();
    }

    fn embeddings_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows.len(), self.dim);
        for (term, v) in &self.rows {
            out.push_str(term);
            for x in v {
                write!(out, " {}", *x as f32).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn camel(prefix: &str) -> String {
    let mut cs = prefix.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// Writes every file for `spec`; the same spec always yields the same bytes.
pub fn gen_synthetic_world(spec: &SyntheticWorldSpec) -> Result<GeneratedWorld, HarnessError> {
    spec.validate()?;
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        dim: spec.dim,
        rows: Vec::new(),
        kb: String::new(),
        lexicon: String::new(),
        gold: Vec::new(),
    };
    let mut sswr = String::new();
    let mut files = BTreeMap::new();

    for r in &spec.relations {
        let lines = gen_relation(&mut b, r);
        if !lines.is_empty() {
            writeln!(sswr, ": {}", r.name).unwrap();
            sswr.push_str(&lines);
        }
    }
    if let Some(g) = &spec.gender {
        files.insert(NAMES_FILE, gen_gender(&mut b, g));
    }
    if let Some(m) = &spec.machines {
        files.insert(MACHINES_FILE, gen_machines(&mut b, m));
    }
    if let Some(m) = &spec.morphology {
        let (lines, sat) = gen_morphology(&mut b, m);
        if !lines.is_empty() {
            sswr.push_str(": past-tense\n");
            sswr.push_str(&lines);
        }
        if !sat.is_empty() {
            files.insert(SAT_FILE, sat);
        }
    }
    for i in 0..spec.filler_words {
        let v = b.direction(spec.filler_norm);
        b.vector(&format!("filler_{i:04}"), v);
    }
    if !sswr.is_empty() {
        files.insert(SSWR_FILE, sswr);
    }

    let mut gold = String::from("# relation\tinput\tanswer\tsplit\n");
    for g in &b.gold {
        writeln!(gold, "{}\t{}\t{}\t{}", g.relation, g.input, g.answer, g.split).unwrap();
    }
    files.insert(GOLD_FILE, gold);
    files.insert(EMBEDDINGS_FILE, b.embeddings_text());
    files.insert(KB_FILE, std::mem::take(&mut b.kb));
    files.insert(LEXICON_FILE, std::mem::take(&mut b.lexicon));
    files.insert(SPEC_FILE, spec.to_toml());
    Ok(GeneratedWorld { files })
}

/// Returns analogy lines for the relation (without the category header).
fn gen_relation(b: &mut Builder, r: &RelationSpec) -> String {
    let center = b.direction(r.center_norm);
    let offset = b.direction(r.offset_norm);
    let (ip, ap) = (camel(&r.input_prefix), camel(&r.answer_prefix));
    let mut pairs = Vec::new();
    for i in 0..r.members {
        let (it, at) = (
            format!("{}_{i:02}", r.input_prefix),
            format!("{}_{i:02}", r.answer_prefix),
        );
        let (ic, ac) = (format!("{ip}{i:02}"), format!("{ap}{i:02}"));
        let dev = b.gaussian(r.spread);
        let u = add(&center, &dev);
        let noise = b.gaussian(r.noise * r.offset_norm);
        let v = add(&add(&u, &offset), &noise);
        b.vector(&it, u);
        b.vector(&at, v);
        b.lex(&it, &ic, "name", "singular");
        b.lex(&at, &ac, "name", "singular");
        b.fact("isa", &ic, &r.input_type);
        b.fact("isa", &ac, &r.answer_type);
        let held = i >= r.members - r.held_out;
        if !held {
            if r.answer_first {
                b.fact(&r.predicate, &ac, &ic);
            } else {
                b.fact(&r.predicate, &ic, &ac);
            }
            pairs.push((it.clone(), at.clone()));
        }
        b.gold.push(GoldRow {
            relation: r.name.clone(),
            input: it,
            answer: at,
            split: if held { Split::HeldOut } else { Split::Kb },
        });
    }
    // A decoy gives the term that opens analogy lines a second sense related
    // to a far-away term.
    for i in 0..r.decoys {
        let (it, at) = (
            format!("{}_{i:02}", r.input_prefix),
            format!("{}_{i:02}", r.answer_prefix),
        );
        let (ic, ac) = (format!("{ip}{i:02}Alt"), format!("{ap}{i:02}Alt"));
        let (ambiguous, other, other_concept, amb_concept) = match r.analogy_order {
            PairOrder::InputFirst => (it, format!("{at}_alt"), &ac, &ic),
            PairOrder::AnswerFirst => (at, format!("{it}_alt"), &ic, &ac),
        };
        let v = b.direction(r.center_norm);
        b.vector(&other, v);
        b.lex(&ambiguous, amb_concept, "name", "singular");
        b.lex(&other, other_concept, "name", "singular");
        if r.answer_first {
            b.fact(&r.predicate, &ac, &ic);
        } else {
            b.fact(&r.predicate, &ic, &ac);
        }
    }
    let mut lines = String::new();
    for _ in 0..r.analogy_problems {
        let i = b.rng.random_range(0..pairs.len());
        let mut j = b.rng.random_range(0..pairs.len() - 1);
        if j >= i {
            j += 1;
        }
        let ((x1, y1), (x2, y2)) = (&pairs[i], &pairs[j]);
        match r.analogy_order {
            PairOrder::InputFirst => writeln!(lines, "{x1} {y1} {x2} {y2}"),
            PairOrder::AnswerFirst => writeln!(lines, "{y1} {x1} {y2} {x2}"),
        }
        .unwrap();
    }
    lines
}

fn gen_gender(b: &mut Builder, g: &GenderSpec) -> String {
    let base = b.direction(g.center_norm);
    let axis = b.direction(g.separation / 2.0);
    let label_offset = b.direction(1.0);
    let centers = [
        ("male", "Male", add(&base, &axis)),
        (
            "female",
            "Female",
            base.iter().zip(&axis).map(|(x, y)| x - y).collect::<Vec<_>>(),
        ),
    ];
    let mut names = String::from("name,gender\n");
    for (label, concept, center) in &centers {
        let v = add(center, &label_offset);
        b.vector(label, v);
        b.lex(label, concept, "adjective", "n/a");
    }
    for i in 0..2 * g.names_per_gender {
        let (label, concept, center) = &centers[i % 2];
        let term = format!("name_{i:03}");
        let c = format!("Name{i:03}");
        let dev = b.gaussian(g.spread);
        b.vector(&term, add(center, &dev));
        b.lex(&term, &c, "name", "singular");
        let known = i / 2 < g.known_per_gender;
        if known {
            b.fact("gender", &c, concept);
        } else {
            writeln!(names, "{term},{label}").unwrap();
        }
        b.gold.push(GoldRow {
            relation: "gender".into(),
            input: term,
            answer: label.to_string(),
            split: if known { Split::Kb } else { Split::HeldOut },
        });
    }
    names
}

const FAMILY_NAMES: [&str; 8] = ["loader", "drill", "press", "crane", "mixer", "pump", "mower", "lathe"];
const PART_NAMES: [&str; 10] = [
    "blade", "bucket", "cab", "piston", "tank", "gear", "valve", "shaft", "wheel", "boom",
];

fn gen_machines(b: &mut Builder, m: &MachineSpec) -> String {
    let offsets: Vec<Vec<f64>> = (0..m.parts).map(|_| b.direction(m.offset_norm)).collect();
    let anchor = b.direction(m.center_norm);
    let mut list = String::new();
    for f in 0..m.families {
        let family = FAMILY_NAMES
            .get(f)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("family{f}"));
        let fam_dev = b.gaussian(m.family_spread);
        let center = add(&anchor, &fam_dev);
        let mut parts = Vec::new();
        for (p, off) in offsets.iter().enumerate() {
            let part = PART_NAMES
                .get(p)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("part{p}"));
            let term = format!("{family}_{part}");
            let concept = format!("{}{}", camel(&family), camel(&part));
            let noise = b.gaussian(m.noise * m.offset_norm);
            let v = add(&add(&center, off), &noise);
            b.vector(&term, v);
            b.lex(&term, &concept, "noun", "singular");
            parts.push((term, concept));
        }
        for j in 0..m.machines_per_family {
            let term = format!("{family}_{j}");
            let concept = format!("{}{j}", camel(&family));
            let dev = b.gaussian(m.machine_spread);
            b.vector(&term, add(&center, &dev));
            b.lex(&term, &concept, "noun", "singular");
            b.fact("isa", &concept, "Machine");
            let held = j >= m.machines_per_family - m.held_out_per_family;
            for (pt, pc) in &parts {
                if !held {
                    b.fact("physicalPartTypes", &concept, pc);
                }
                b.gold.push(GoldRow {
                    relation: "parts".into(),
                    input: term.clone(),
                    answer: pt.clone(),
                    split: if held { Split::HeldOut } else { Split::Kb },
                });
            }
            writeln!(list, "{term}").unwrap();
        }
    }
    list
}

/// Returns (analogy lines, SAT file).
fn gen_morphology(b: &mut Builder, m: &MorphologySpec) -> (String, String) {
    let center = b.direction(m.center_norm);
    let gerund = b.direction(m.offset_norm);
    let past = b.direction(m.offset_norm);
    let mut triples = Vec::new();
    for i in 0..m.roots {
        let (root, ing, ed) = (
            format!("verb_{i:02}"),
            format!("verb_{i:02}_ing"),
            format!("verb_{i:02}_ed"),
        );
        let (rc, ic, ec) = (format!("Verb{i:02}"), format!("Verb{i:02}Ing"), format!("Verb{i:02}Ed"));
        let dev = b.gaussian(m.spread);
        let u = add(&center, &dev);
        let n1 = b.gaussian(m.noise * m.offset_norm);
        let n2 = b.gaussian(m.noise * m.offset_norm);
        let vi = add(&add(&u, &gerund), &n1);
        let ve = add(&add(&u, &past), &n2);
        b.vector(&root, u);
        b.vector(&ing, vi);
        b.vector(&ed, ve);
        b.lex(&root, &rc, "verb", "n/a");
        b.lex(&ing, &ic, "verb", "n/a");
        if i % 3 == 0 {
            b.lex(&ing, &format!("{ic}Act"), "noun", "singular");
        }
        b.lex(&ed, &ec, "verb", "n/a");
        b.fact("gerundOf", &rc, &ic);
        b.fact("pastTenseOf", &rc, &ec);
        if i < m.variants {
            let (vt, vc) = (format!("verb_{i:02}_ed_alt"), format!("Verb{i:02}EdAlt"));
            let v = b.direction(m.center_norm);
            b.vector(&vt, v);
            b.lex(&vt, &vc, "verb", "n/a");
            b.fact("pastTenseOf", &rc, &vc);
        }
        triples.push((ing, ed));
    }
    let pick_two = |rng: &mut ChaCha8Rng| {
        let i = rng.random_range(0..triples.len());
        let mut j = rng.random_range(0..triples.len() - 1);
        if j >= i {
            j += 1;
        }
        (i, j)
    };
    let mut lines = String::new();
    for _ in 0..m.analogy_problems {
        let (i, j) = pick_two(&mut b.rng);
        writeln!(
            lines,
            "{} {} {} {}",
            triples[i].0, triples[i].1, triples[j].0, triples[j].1
        )
        .unwrap();
    }
    let mut sat = String::new();
    for item in 0..m.sat_items {
        let mut idx: Vec<usize> = (0..triples.len()).collect();
        idx.shuffle(&mut b.rng);
        let (stem, answer) = (idx[0], idx[1]);
        let gold = b.rng.random_range(0..4);
        if item > 0 {
            sat.push('\n');
        }
        writeln!(sat, "{} {}", triples[stem].0, triples[stem].1).unwrap();
        let mut distractor = 2;
        for slot in 0..4 {
            if slot == gold {
                writeln!(sat, "{} {}", triples[answer].0, triples[answer].1).unwrap();
            } else {
                // mismatched pairs: a gerund with some other verb's past form
                let (x, y) = (idx[distractor], idx[distractor + 1]);
                distractor += 2;
                writeln!(sat, "{} {}", triples[x].0, triples[y].1).unwrap();
            }
        }
        writeln!(sat, "{}", (b'a' + gold as u8) as char).unwrap();
    }
    (lines, sat)
}
