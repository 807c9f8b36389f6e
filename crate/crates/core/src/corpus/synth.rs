use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{self, Theme};
use super::{
    Corpus, DataItem, Department, Employee, EmployeeId, ItemId, ItemKind, CORPUS_SCHEMA_VERSION,
};
use crate::error::{CoreError, Result};

const STREAM_LEN: usize = 32;
const SIBLING_SHARE: f64 = 0.35;
const MIN_SLOTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub n_employees: usize,
    pub n_items: usize,
    pub duplicate_name_rate: f64,
    pub kind_mix: BTreeMap<ItemKind, f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 42,
            n_employees: 1000,
            n_items: 10_000,
            duplicate_name_rate: 0.01,
            kind_mix: BTreeMap::from([
                (ItemKind::Email, 0.4),
                (ItemKind::File, 0.3),
                (ItemKind::CalendarEvent, 0.15),
                (ItemKind::ChatMessage, 0.15),
            ]),
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_employees == 0 || self.n_items == 0 {
            return Err(CoreError::Config("employee and item counts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.duplicate_name_rate) {
            return Err(CoreError::Config(format!(
                "duplicate_name_rate {} outside [0, 1]",
                self.duplicate_name_rate
            )));
        }
        if let Some((kind, f)) = self.kind_mix.iter().find(|(_, f)| !(0.0..=1.0).contains(*f)) {
            return Err(CoreError::Config(format!("kind_mix fraction for {kind:?} is {f}")));
        }
        let total: f64 = self.kind_mix.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CoreError::Config(format!("kind_mix sums to {total}, expected 1")));
        }
        Ok(())
    }
}

pub fn generate_corpus(config: &GenConfig) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut employees = generate_employees(config.n_employees, &mut rng);
    inject_duplicate_names(&mut employees, config.duplicate_name_rate, &mut rng);

    let mut by_dept: BTreeMap<Department, Vec<usize>> = BTreeMap::new();
    for (i, e) in employees.iter().enumerate() {
        by_dept.entry(e.department).or_default().push(i);
    }

    let start = NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date");
    let items = (0..config.n_items)
        .map(|i| {
            let kind = pick_kind(&config.kind_mix, &mut rng);
            let dept = *Department::ALL.choose(&mut rng).expect("non-empty");
            let created_at = start + Days::new(rng.random_range(0..366));
            let mut writer = ItemWriter {
                rng: &mut rng,
                employees: &employees,
                by_dept: &by_dept,
            };
            writer.item(ItemId(format!("I{i:06}")), kind, dept, created_at)
        })
        .collect();

    Ok(Corpus {
        schema_version: CORPUS_SCHEMA_VERSION,
        employees,
        items,
    })
}

fn generate_employees(n: usize, rng: &mut ChaCha8Rng) -> Vec<Employee> {
    let firsts = vocab::FIRST_NAMES;
    let lasts = vocab::LAST_NAMES;
    let combos = firsts.len() * lasts.len();
    let mut order: Vec<usize> = (0..combos).collect();
    order.shuffle(rng);

    (0..n)
        .map(|i| {
            let slot = order[i % combos];
            let first = firsts[slot % firsts.len()];
            let last = lasts[slot / firsts.len()];
            // beyond the name grid, a middle initial keeps names distinct
            let full_name = match i / combos {
                0 => format!("{first} {last}"),
                round => {
                    let initial = char::from(b'A' + ((round - 1) % 26) as u8);
                    format!("{first} {initial}. {last}")
                }
            };
            let department = *Department::ALL.choose(rng).expect("non-empty");
            let title = vocab::job_titles(department).choose(rng).expect("non-empty").to_string();
            let focus = &vocab::themes(department)[rng.random_range(0..4)];
            let terms: Vec<&str> = focus.terms.choose_multiple(rng, 3).copied().collect();
            let background = vocab::BACKGROUNDS.choose(rng).expect("non-empty");
            let profile = format!(
                "{full_name} is a {title} on the {} team and {background}. \
                 Their work focuses on {}, covering {}, {} and {}.",
                department.display_name(),
                focus.name,
                terms[0],
                terms[1],
                terms[2],
            );
            Employee {
                id: EmployeeId(format!("E{i:05}")),
                full_name,
                title,
                department,
                profile,
            }
        })
        .collect()
}

/// Renames `⌊rate·n⌋` employees (at least one when `rate > 0` and `n ≥ 2`,
/// at most `n − 1`) to a full name already carried by another employee.
/// Ids are untouched. Returns the indices of renamed employees.
pub fn inject_duplicate_names<R: Rng + ?Sized>(
    employees: &mut [Employee],
    rate: f64,
    rng: &mut R,
) -> Vec<usize> {
    let n = employees.len();
    if rate <= 0.0 || n < 2 {
        return Vec::new();
    }
    let count = ((rate * n as f64 + 1e-9).floor() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let (victims, sources) = order.split_at(count);
    let mut renamed = Vec::with_capacity(count);
    for &v in victims {
        let src = *sources.choose(rng).expect("at least one source");
        let name = employees[src].full_name.clone();
        if employees[v].full_name != name {
            employees[v].profile = employees[v].profile.replacen(&employees[v].full_name, &name, 1);
            employees[v].full_name = name;
        }
        renamed.push(v);
    }
    renamed.sort_unstable();
    renamed
}

fn pick_kind(mix: &BTreeMap<ItemKind, f64>, rng: &mut ChaCha8Rng) -> ItemKind {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = ItemKind::Email;
    for (&kind, &f) in mix {
        if f <= 0.0 {
            continue;
        }
        acc += f;
        last = kind;
        if r < acc {
            return kind;
        }
    }
    last
}

struct ItemWriter<'a> {
    rng: &'a mut ChaCha8Rng,
    employees: &'a [Employee],
    by_dept: &'a BTreeMap<Department, Vec<usize>>,
}

impl ItemWriter<'_> {
    fn item(&mut self, id: ItemId, kind: ItemKind, dept: Department, created_at: NaiveDate) -> DataItem {
        let themes = vocab::themes(dept);
        let theme_idx = self.rng.random_range(0..themes.len());
        let theme = &themes[theme_idx];

        let (lo, hi) = match kind {
            ItemKind::Email => (2, 4),
            ItemKind::File => (1, 3),
            ItemKind::CalendarEvent => (2, 6),
            ItemKind::ChatMessage => (2, 3),
        };
        let participants = self.participants(dept, lo, hi);
        let first_name = |idx: usize| -> &str {
            let name = &self.employees[participants[idx]].full_name;
            name.split(' ').next().unwrap_or(name)
        };
        let sender = first_name(0).to_owned();
        let recipient = first_name(participants.len().min(2) - 1).to_owned();

        let mut terms = self.term_stream(themes, theme_idx);
        let n_sentences = match kind {
            ItemKind::Email | ItemKind::File => self.rng.random_range(2..=4),
            _ => 2,
        };
        let body = self.sentences(n_sentences, &mut terms);
        let lead = terms.next().unwrap_or(theme.terms[0]);
        let second = terms.next().unwrap_or(theme.terms[1]);

        let (title, content) = match kind {
            ItemKind::Email => (
                format!("Re: {} {}", crate::text::title_case(lead), second),
                format!("{recipient}, an update on {}. {body} {sender}", theme.name),
            ),
            ItemKind::File => {
                let ftype = *vocab::FILE_TYPES.choose(self.rng).expect("non-empty");
                (
                    format!("{} {} {}", crate::text::title_case(lead), second, ftype),
                    format!(
                        "{} on {} prepared by the {} team. {body}",
                        crate::text::title_case(ftype),
                        theme.name,
                        dept.display_name()
                    ),
                )
            }
            ItemKind::CalendarEvent => (
                format!("{} sync", crate::text::title_case(lead)),
                format!("Meeting to discuss {} with the {} team. {body}", theme.name, dept.display_name()),
            ),
            ItemKind::ChatMessage => (format!("Chat with {recipient}"), format!("On {}: {body}", theme.name)),
        };

        DataItem {
            id,
            kind,
            title,
            content,
            participants: participants.iter().map(|&i| self.employees[i].id.clone()).collect(),
            created_at,
            department: dept,
        }
    }

    fn participants(&mut self, dept: Department, lo: usize, hi: usize) -> Vec<usize> {
        let n = self.employees.len();
        let want = self.rng.random_range(lo..=hi).min(n);
        let pool = self.by_dept.get(&dept).filter(|p| !p.is_empty());
        let mut chosen: Vec<usize> = Vec::with_capacity(want);
        let mut attempts = 0;
        while chosen.len() < want && attempts < 64 {
            attempts += 1;
            let candidate = match pool {
                Some(pool) if chosen.is_empty() || self.rng.random_bool(0.8) => {
                    *pool.choose(self.rng).expect("non-empty")
                }
                _ => self.rng.random_range(0..n),
            };
            if !chosen.contains(&candidate) {
                chosen.push(candidate);
            }
        }
        chosen
    }

    /// Shuffled terms of the chosen theme; about a third of the draws come
    /// from sibling themes of the same department.
    fn term_stream(&mut self, themes: &'static [Theme], theme_idx: usize) -> impl Iterator<Item = &'static str> {
        let mut own: Vec<&'static str> = themes[theme_idx].terms.to_vec();
        own.shuffle(self.rng);
        let mut own = own.into_iter().cycle();
        let mut terms = Vec::with_capacity(STREAM_LEN);
        for _ in 0..STREAM_LEN {
            if self.rng.random_bool(SIBLING_SHARE) {
                let other = (theme_idx + self.rng.random_range(1..themes.len())) % themes.len();
                terms.push(*themes[other].terms.choose(self.rng).expect("non-empty"));
            } else {
                terms.push(own.next().expect("cycled"));
            }
        }
        terms.into_iter().cycle()
    }

    fn sentences(&mut self, n: usize, terms: &mut impl Iterator<Item = &'static str>) -> String {
        let mut out: Vec<String> = Vec::with_capacity(n + 1);
        let mut slots = 0;
        while out.len() < n || slots < MIN_SLOTS {
            let template = *vocab::SENTENCES.choose(self.rng).expect("non-empty");
            let mut sentence = String::with_capacity(template.len() + 32);
            let mut parts = template.split("{}");
            sentence.push_str(parts.next().unwrap_or(""));
            for part in parts {
                sentence.push_str(terms.next().expect("cycled stream"));
                sentence.push_str(part);
                slots += 1;
            }
            out.push(sentence);
        }
        out.join(" ")
    }
}
