//! Seeded synthetic corpora with planted centers of excellence.
//!
//! The generator builds a corpus in which the planted clusters are, by
//! construction, the only possible top scientist clusters:
//!
//! * background researchers only publish in their own macro-area, and no
//!   (unit, macro-area) pair holds more than `min_cluster_size - 1` of them;
//! * planted members share a unit, have unique names and co-author enough
//!   papers in their category's flagship journal (reserved to them) that
//!   their SS exceeds every background researcher's in that macro-area;
//! * the planted (unit, macro-area) pair holds no background researcher.
//!
//! Along with the corpus it returns the planted ground truth and the true
//! author of every mention.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    write_corpus_data, AuthorMention, Category, CategoryId, CorpusData, CorpusError, Decimal,
    DocType, GeoMacroArea, ImpactFactorEntry, InstType, Journal, JournalId, MacroAreaId,
    Organization, PubId, Publication, Researcher, ResearcherId, SiteId, UnitId,
    YearRange,
};
use crate::excellence::decile_rank;
use crate::identity::{normalize_name, NameKey};

pub const PLANTED_FILE: &str = "planted.csv";
pub const TRUTH_FILE: &str = "truth_links.csv";

const MACRO_AREAS: [(&str, &str); 6] = [
    ("BIO", "Biology"),
    ("CHE", "Chemistry"),
    ("EAR", "Earth and space sciences"),
    ("ENG", "Engineering"),
    ("MAT", "Mathematics"),
    ("PHY", "Physics"),
];

const CITIES: [(&str, &str, GeoMacroArea); 26] = [
    ("Turin", "piedmont", GeoMacroArea::NorthWest),
    ("Milan", "lombardy", GeoMacroArea::NorthWest),
    ("Pavia", "lombardy", GeoMacroArea::NorthWest),
    ("Brescia", "lombardy", GeoMacroArea::NorthWest),
    ("Genoa", "liguria", GeoMacroArea::NorthWest),
    ("Trento", "trentino_alto_adige", GeoMacroArea::NorthEast),
    ("Padua", "veneto", GeoMacroArea::NorthEast),
    ("Venice", "veneto", GeoMacroArea::NorthEast),
    ("Trieste", "friuli_venezia_giulia", GeoMacroArea::NorthEast),
    ("Bologna", "emilia_romagna", GeoMacroArea::NorthEast),
    ("Modena", "emilia_romagna", GeoMacroArea::NorthEast),
    ("Parma", "emilia_romagna", GeoMacroArea::NorthEast),
    ("Florence", "tuscany", GeoMacroArea::Center),
    ("Pisa", "tuscany", GeoMacroArea::Center),
    ("Siena", "tuscany", GeoMacroArea::Center),
    ("Perugia", "umbria", GeoMacroArea::Center),
    ("Ancona", "marche", GeoMacroArea::Center),
    ("Rome", "lazio", GeoMacroArea::Center),
    ("Pescara", "abruzzo", GeoMacroArea::Center),
    ("Naples", "campania", GeoMacroArea::South),
    ("Bari", "apulia", GeoMacroArea::South),
    ("Potenza", "basilicata", GeoMacroArea::South),
    ("Cosenza", "calabria", GeoMacroArea::South),
    ("Palermo", "sicily", GeoMacroArea::South),
    ("Catania", "sicily", GeoMacroArea::South),
    ("Cagliari", "sardinia", GeoMacroArea::South),
];

const FOREIGN: [(&str, &str); 6] = [
    ("Vienna", "Austria"),
    ("Leiden", "Netherlands"),
    ("Lyon", "France"),
    ("Uppsala", "Sweden"),
    ("Heidelberg", "Germany"),
    ("Boston", "USA"),
];

const EXTERNAL_SURNAMES: [&str; 12] = [
    "Smith", "Muller", "Dupont", "Garcia", "Novak", "Jensen", "Kowalski", "Silva", "Schmidt",
    "Martin", "Nilsson", "Brown",
];

const SYLLABLES: [&str; 24] = [
    "ro", "ma", "ri", "ne", "gal", "li", "fer", "ra", "bian", "chi", "col", "bo", "es", "po",
    "sit", "ru", "con", "ti", "mar", "gre", "bru", "ga", "lo", "vi",
];

const DEPARTMENTS: [&str; 6] = [
    "Dept of Physics",
    "Dept of Chemistry",
    "Dept of Biology",
    "Dept of Engineering",
    "Dept of Mathematics",
    "Dept of Earth Sciences",
];

const INITIALS: &[u8] = b"ABCDFGLMPS";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub researchers: usize,
    /// Target publication count; planted clusters may add a few more.
    pub publications: usize,
    /// Number of planted clusters, each in its own macro-area.
    pub planted: usize,
    pub planted_size: usize,
    /// Threshold the corpus is built for; background groups stay below it.
    pub min_cluster_size: usize,
    pub decile_fraction: f64,
    pub macro_areas: usize,
    pub categories_per_area: usize,
    pub researchers_per_unit: usize,
    /// Share of all mentions deliberately left without a usable address
    /// while their name is shared by several researchers.
    pub ambiguity: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            researchers: 200,
            publications: 1000,
            planted: 1,
            planted_size: 4,
            min_cluster_size: 4,
            decile_fraction: 0.10,
            macro_areas: 3,
            categories_per_area: 4,
            researchers_per_unit: 8,
            ambiguity: 0.05,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn infeasible<T>(msg: impl Into<String>) -> Result<T, SynthError> {
    Err(SynthError::Infeasible(msg.into()))
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(1..=MACRO_AREAS.len()).contains(&self.macro_areas) {
            return infeasible(format!("macro-areas must be in 1..={}", MACRO_AREAS.len()));
        }
        if self.categories_per_area == 0 || self.categories_per_area > 99 {
            return infeasible("categories per area must be in 1..=99");
        }
        if self.planted > self.macro_areas {
            return infeasible(format!(
                "{} planted clusters need as many macro-areas, only {} available",
                self.planted, self.macro_areas
            ));
        }
        if self.planted > 0 && self.planted_size == 0 {
            return infeasible("planted size must be positive");
        }
        if self.min_cluster_size == 0 {
            return infeasible("min cluster size must be positive");
        }
        if self.researchers_per_unit == 0 {
            return infeasible("researchers per unit must be positive");
        }
        if self.planted_size > self.researchers_per_unit {
            return infeasible(format!(
                "planted size {} exceeds researchers per unit {}",
                self.planted_size, self.researchers_per_unit
            ));
        }
        if self.planted * self.planted_size > self.researchers {
            return infeasible("planted members exceed the researcher count");
        }
        if !(0.0..1.0).contains(&self.ambiguity) {
            return infeasible("ambiguity must be in [0, 1)");
        }
        if !(self.decile_fraction > 0.0 && self.decile_fraction <= 1.0) {
            return infeasible("decile fraction must be in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedCluster {
    pub category: CategoryId,
    pub unit: UnitId,
    pub members: BTreeSet<ResearcherId>,
}

/// True author of one mention; `None` for authors outside the registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthLink {
    pub publication: PubId,
    pub mention_index: usize,
    pub researcher: Option<ResearcherId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub data: CorpusData,
    pub planted: Vec<PlantedCluster>,
    pub truth: Vec<TruthLink>,
    /// Mentions whose address was removed to make them ambiguous.
    pub ambiguous_mentions: usize,
}

impl SynthCorpus {
    pub fn write_planted_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["category_id", "org_id", "site_id", "member_ids"])?;
        for p in &self.planted {
            let members: Vec<&str> = p.members.iter().map(ResearcherId::as_str).collect();
            w.write_record([
                p.category.as_str(),
                p.unit.org.as_str(),
                p.unit.site_str(),
                &members.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_truth_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pub_id", "mention_index", "researcher_id"])?;
        for t in &self.truth {
            w.write_record([
                t.publication.as_str(),
                &t.mention_index.to_string(),
                t.researcher.as_ref().map_or("", ResearcherId::as_str),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the corpus files plus `planted.csv` and `truth_links.csv`.
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        write_corpus_data(dir, &self.data)?;
        let mut planted = Vec::new();
        let mut truth = Vec::new();
        let to_io = |name: &str, e: csv::Error| SynthError::Io {
            path: dir.join(name),
            source: std::io::Error::other(e),
        };
        self.write_planted_csv(&mut planted).map_err(|e| to_io(PLANTED_FILE, e))?;
        self.write_truth_csv(&mut truth).map_err(|e| to_io(TRUTH_FILE, e))?;
        for (name, bytes) in [(PLANTED_FILE, planted), (TRUTH_FILE, truth)] {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|source| SynthError::Io { path, source })?;
        }
        Ok(())
    }
}

/// Reads a `planted.csv` file back.
pub fn read_planted_csv(path: &Path) -> Result<Vec<PlantedCluster>, SynthError> {
    let io = |e: csv::Error| SynthError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        let site = rec.get(2).filter(|s| !s.is_empty()).map(SiteId::from);
        out.push(PlantedCluster {
            category: rec.get(0).unwrap_or_default().into(),
            unit: UnitId::new(rec.get(1).unwrap_or_default(), site),
            members: rec
                .get(3)
                .unwrap_or_default()
                .split(';')
                .filter(|s| !s.is_empty())
                .map(ResearcherId::from)
                .collect(),
        });
    }
    Ok(out)
}

struct Unit {
    id: UnitId,
    city: &'static str,
    /// Strings that identify the unit in an address.
    labels: Vec<String>,
}

fn build_units(n: usize) -> Result<(Vec<Unit>, Vec<Organization>), SynthError> {
    const KINDS: usize = 5;
    if n > KINDS * CITIES.len() {
        return infeasible(format!("at most {} units available", KINDS * CITIES.len()));
    }
    let mut units = Vec::with_capacity(n);
    let mut orgs = Vec::with_capacity(n);
    for i in 0..n {
        let (city, region, geo) = CITIES[i % CITIES.len()];
        let kind = (i + i / CITIES.len()) % KINDS;
        let code = city.to_uppercase();
        let (id, name, inst, alias) = match kind {
            0 | 2 => (
                UnitId::org_only(format!("UNI-{code}")),
                format!("University of {city}"),
                InstType::University,
                Some(format!("Univ {city}")),
            ),
            1 => (
                UnitId::new("CNR", Some(SiteId::new(format!("AREA-{code}")))),
                format!("National Research Council Area of {city}"),
                InstType::PublicResearchLab,
                Some(format!("CNR Area {city}")),
            ),
            3 => (
                UnitId::new("INFN", Some(SiteId::new(format!("SEC-{code}")))),
                format!("Nuclear Physics Institute Section of {city}"),
                InstType::PublicResearchLab,
                None,
            ),
            _ => (
                UnitId::org_only(format!("HOSP-{code}")),
                format!("{city} Research Hospital"),
                InstType::ResearchHospital,
                None,
            ),
        };
        // the second university slot of a city becomes its polytechnic
        let (id, name, alias) = if kind == 2 {
            (
                UnitId::org_only(format!("POLI-{code}")),
                format!("Polytechnic of {city}"),
                None,
            )
        } else {
            (id, name, alias)
        };
        let mut labels = vec![name.clone()];
        labels.extend(alias.clone());
        orgs.push(Organization {
            unit: id.clone(),
            name,
            inst_type: inst,
            region: region.into(),
            geo_macro_area: geo,
            aliases: alias.into_iter().collect(),
        });
        units.push(Unit { id, city, labels });
    }
    Ok((units, orgs))
}

fn surname(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=3);
    let mut s: String = (0..n).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
    s.push(*b"iaoe".choose(rng).expect("non-empty") as char);
    let mut chars = s.chars();
    let first = chars.next().expect("non-empty").to_ascii_uppercase();
    std::iter::once(first).chain(chars).collect()
}

fn initials(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    s.push(*INITIALS.choose(rng).expect("non-empty") as char);
    if rng.gen_bool(0.3) {
        s.push(*INITIALS.choose(rng).expect("non-empty") as char);
    }
    s
}

fn key_of(surname: &str, initials: &str) -> NameKey {
    normalize_name(surname, initials).expect("generated names are non-empty")
}

fn if_value(rng: &mut ChaCha8Rng, lo: u128, hi: u128) -> Decimal {
    Decimal::new(rng.gen_range(lo..=hi), 3)
}

struct Person {
    id: ResearcherId,
    surname: String,
    initials: String,
    key: NameKey,
    unit: usize,
    macro_area: usize,
}

/// Publication under construction: authors as registry indices or external
/// names, each with its address index.
struct Draft {
    year: i32,
    journal: JournalId,
    doc_type: DocType,
    authors: Vec<(Author, Option<usize>)>,
    addresses: Vec<String>,
    /// Lead mention must keep its address.
    protected_lead: bool,
    planted: bool,
}

#[derive(Clone)]
enum Author {
    Registered(usize),
    External(String, String),
}

impl Draft {
    fn new(year: i32, journal: JournalId, doc_type: DocType) -> Self {
        Self {
            year,
            journal,
            doc_type,
            authors: Vec::new(),
            addresses: Vec::new(),
            protected_lead: false,
            planted: false,
        }
    }

    fn address(&mut self, text: String) -> usize {
        match self.addresses.iter().position(|a| *a == text) {
            Some(i) => i,
            None => {
                self.addresses.push(text);
                self.addresses.len() - 1
            }
        }
    }

    fn has_key(&self, people: &[Person], key: &NameKey) -> bool {
        self.authors.iter().any(|(a, _)| match a {
            Author::Registered(i) => people[*i].key == *key,
            Author::External(..) => false,
        })
    }
}

struct Catalog {
    macro_ids: Vec<MacroAreaId>,
    /// Categories of each macro-area.
    categories: Vec<Vec<CategoryId>>,
    /// Non-flagship journals of each macro-area.
    regular: Vec<Vec<JournalId>>,
    /// Flagship journal of each category.
    flagship: BTreeMap<CategoryId, JournalId>,
}

fn build_catalog(spec: &SynthSpec, rng: &mut ChaCha8Rng, data: &mut CorpusData) -> Catalog {
    let mut cat = Catalog {
        macro_ids: Vec::new(),
        categories: Vec::new(),
        regular: Vec::new(),
        flagship: BTreeMap::new(),
    };
    let years = YearRange::default();
    let add_journal = |data: &mut CorpusData,
                           rng: &mut ChaCha8Rng,
                           id: String,
                           cats: Vec<CategoryId>,
                           flagship: bool| {
        let id = JournalId::new(id);
        data.journals.push(Journal {
            id: id.clone(),
            name: format!("Journal {id}"),
            categories: cats.into_iter().collect(),
        });
        // a few regular journals lack the last year and fall back
        let skip_last = !flagship && rng.gen_bool(0.15);
        for y in years.start..=years.end {
            if skip_last && y == years.end {
                continue;
            }
            let value = if flagship {
                if_value(rng, 10_000, 14_000)
            } else {
                if_value(rng, 500, 3_000)
            };
            data.impact_factors.push(ImpactFactorEntry {
                journal: id.clone(),
                year: y,
                value,
            });
        }
        id
    };
    for (code, name) in MACRO_AREAS.iter().take(spec.macro_areas) {
        let macro_id = MacroAreaId::from(*code);
        let mut cats = Vec::new();
        let mut regular = Vec::new();
        for c in 1..=spec.categories_per_area {
            let id = CategoryId::new(format!("{code}{c:02}"));
            data.categories.push(Category {
                id: id.clone(),
                name: format!("{name} {c}"),
                macro_area: macro_id.clone(),
            });
            let f = add_journal(data, rng, format!("J-{id}-F"), vec![id.clone()], true);
            cat.flagship.insert(id.clone(), f);
            for k in 1..=3 {
                regular.push(add_journal(data, rng, format!("J-{id}-{k}"), vec![id.clone()], false));
            }
            cats.push(id);
        }
        for w in cats.windows(2) {
            regular.push(add_journal(
                data,
                rng,
                format!("J-{}-{}-X", w[0], w[1]),
                w.to_vec(),
                false,
            ));
        }
        cat.macro_ids.push(macro_id);
        cat.categories.push(cats);
        cat.regular.push(regular);
    }
    cat
}

struct WeightBounds {
    /// Largest weight any regular journal can give.
    regular_max: f64,
    /// Largest weight any flagship can give.
    flagship_max: f64,
    /// Smallest weight each category's flagship can give.
    flagship_min: BTreeMap<CategoryId, f64>,
}

fn weight_bounds(data: &CorpusData, catalog: &Catalog) -> WeightBounds {
    let mut sums: BTreeMap<(&CategoryId, i32), (f64, usize)> = BTreeMap::new();
    let journals: BTreeMap<&JournalId, &Journal> = data.journals.iter().map(|j| (&j.id, j)).collect();
    for e in &data.impact_factors {
        for c in &journals[&e.journal].categories {
            let s = sums.entry((c, e.year)).or_insert((0.0, 0));
            s.0 += e.value.to_f64();
            s.1 += 1;
        }
    }
    let mean = |c: &CategoryId, y: i32| {
        let (s, n) = sums[&(c, y)];
        s / n as f64
    };
    let flagships: BTreeSet<&JournalId> = catalog.flagship.values().collect();
    let mut b = WeightBounds {
        regular_max: 0.0,
        flagship_max: 0.0,
        flagship_min: BTreeMap::new(),
    };
    for e in &data.impact_factors {
        let j = journals[&e.journal];
        for c in &j.categories {
            let ratio = e.value.to_f64() / mean(c, e.year);
            if flagships.contains(&e.journal) {
                let m = b.flagship_min.entry(c.clone()).or_insert(f64::INFINITY);
                *m = m.min(ratio);
                b.flagship_max = b.flagship_max.max(ratio);
            } else {
                b.regular_max = b.regular_max.max(ratio);
            }
        }
    }
    b
}

fn random_year(rng: &mut ChaCha8Rng) -> i32 {
    let window = YearRange::default();
    rng.gen_range(window.start..=window.end)
}

/// Generates a corpus for `spec`, deterministic in `spec.seed`.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = CorpusData::default();
    let catalog = build_catalog(spec, &mut rng, &mut data);

    let n_units = spec.researchers.div_ceil(spec.researchers_per_unit).max(spec.planted.max(1));
    let (units, orgs) = build_units(n_units)?;
    data.organizations = orgs;

    // planted placement
    let cap = spec.min_cluster_size - 1;
    let mut area_order: Vec<usize> = (0..spec.macro_areas).collect();
    area_order.shuffle(&mut rng);
    let mut unit_order: Vec<usize> = (0..n_units).collect();
    unit_order.shuffle(&mut rng);
    let placements: Vec<(usize, usize, CategoryId)> = (0..spec.planted)
        .map(|k| {
            let area = area_order[k];
            let category = catalog.categories[area]
                .choose(&mut rng)
                .expect("categories per area is positive")
                .clone();
            (unit_order[k], area, category)
        })
        .collect();
    let blocked: BTreeSet<(usize, usize)> = placements.iter().map(|(u, a, _)| (*u, *a)).collect();

    // background slots
    let background = spec.researchers - spec.planted * spec.planted_size;
    let mut slots = Vec::new();
    for u in 0..n_units {
        for a in 0..spec.macro_areas {
            if !blocked.contains(&(u, a)) {
                slots.extend(std::iter::repeat_n((u, a), cap));
            }
        }
    }
    if background > slots.len() {
        return infeasible(format!(
            "{background} background researchers do not fit in {} slots below the cluster threshold",
            slots.len()
        ));
    }
    slots.shuffle(&mut rng);
    slots.truncate(background);
    slots.sort_unstable();

    // fewer distinct name keys means more homonyms to draw ambiguity from
    let keys_per_researcher = (1.5 - 5.0 * spec.ambiguity).max(0.3);
    let pool_size = ((spec.researchers as f64 * keys_per_researcher / INITIALS.len() as f64)
        .round() as usize)
        .max(2);
    let mut pool: Vec<String> = Vec::new();
    while pool.len() < pool_size {
        let s = surname(&mut rng);
        if !pool.contains(&s) {
            pool.push(s);
        }
    }

    let mut people: Vec<Person> = Vec::with_capacity(spec.researchers);
    let mut keys_at_unit: BTreeSet<(usize, NameKey)> = BTreeSet::new();
    for (u, a) in slots {
        let (s, i, key) = loop {
            let s = pool.choose(&mut rng).expect("pool is non-empty").clone();
            let i = initials(&mut rng);
            let key = key_of(&s, &i);
            if !keys_at_unit.contains(&(u, key.clone())) {
                break (s, i, key);
            }
        };
        keys_at_unit.insert((u, key.clone()));
        people.push(Person {
            id: ResearcherId::new(format!("R{:04}", people.len() + 1)),
            surname: s,
            initials: i,
            key,
            unit: u,
            macro_area: a,
        });
    }
    let n_background = people.len();

    let mut used_surnames: BTreeSet<String> = pool.iter().map(|s| s.to_lowercase()).collect();
    let mut planted_people: Vec<Vec<usize>> = Vec::new();
    for (u, a, _) in &placements {
        let mut members = Vec::new();
        for _ in 0..spec.planted_size {
            let s = loop {
                let s = surname(&mut rng);
                if used_surnames.insert(s.to_lowercase()) {
                    break s;
                }
            };
            let i = initials(&mut rng);
            members.push(people.len());
            people.push(Person {
                id: ResearcherId::new(format!("R{:04}", people.len() + 1)),
                key: key_of(&s, &i),
                surname: s,
                initials: i,
                unit: *u,
                macro_area: *a,
            });
        }
        planted_people.push(members);
    }

    // the planted members must fit in their macro-area's top decile
    for (k, (_, area, _)) in placements.iter().enumerate() {
        let n = people[..n_background].iter().filter(|p| p.macro_area == *area).count()
            + planted_people[k].len();
        if decile_rank(spec.decile_fraction, n) < spec.planted_size {
            return infeasible(format!(
                "planted size {} exceeds the top decile of its macro-area ({n} researchers)",
                spec.planted_size
            ));
        }
    }

    let by_area: Vec<Vec<usize>> = (0..spec.macro_areas)
        .map(|a| (0..n_background).filter(|i| people[*i].macro_area == a).collect())
        .collect();
    let address_of = |rng: &mut ChaCha8Rng, unit: usize| {
        let u = &units[unit];
        let label = u.labels.choose(rng).expect("unit has a label");
        let dept = DEPARTMENTS.choose(rng).expect("non-empty");
        format!("{dept}, {label}, {}, Italy", u.city)
    };
    let external = |rng: &mut ChaCha8Rng| {
        let (city, country) = FOREIGN.choose(rng).expect("non-empty");
        let s = EXTERNAL_SURNAMES.choose(rng).expect("non-empty");
        (
            s.to_string(),
            initials(rng),
            format!("Institute of Science, University of {city}, {country}"),
        )
    };

    // background publications
    let budget = spec.publications.saturating_sub(spec.planted * 12).max(n_background);
    if n_background > 0 && spec.publications < n_background {
        return infeasible(format!(
            "{} publications cannot give each of {n_background} researchers a paper",
            spec.publications
        ));
    }
    let mut drafts: Vec<Draft> = Vec::new();
    for p in 0..budget {
        if n_background == 0 {
            break;
        }
        let guaranteed = p < n_background;
        let lead = if guaranteed { p } else { rng.gen_range(0..n_background) };
        let area = people[lead].macro_area;
        let journal = catalog.regular[area].choose(&mut rng).expect("regular journals").clone();
        let (year, doc_type) = if guaranteed {
            (random_year(&mut rng), DocType::Article)
        } else {
            let year = if rng.gen_bool(0.03) { 2000 } else { random_year(&mut rng) };
            let doc = match rng.gen_range(0..100) {
                0..=3 => DocType::Other,
                4..=15 => DocType::Review,
                _ => DocType::Article,
            };
            (year, doc)
        };
        let mut d = Draft::new(year, journal, doc_type);
        d.protected_lead = guaranteed;
        let addr = address_of(&mut rng, people[lead].unit);
        let idx = d.address(addr);
        d.authors.push((Author::Registered(lead), Some(idx)));
        let coauthors = rng.gen_range(0..=3);
        for _ in 0..coauthors {
            let Some(&c) = by_area[area].choose(&mut rng) else { break };
            if d.has_key(&people, &people[c].key) {
                continue;
            }
            let addr = address_of(&mut rng, people[c].unit);
            let idx = d.address(addr);
            d.authors.push((Author::Registered(c), Some(idx)));
        }
        if rng.gen_bool(0.15) {
            let (s, i, addr) = external(&mut rng);
            let idx = d.address(addr);
            d.authors.push((Author::External(s, i), Some(idx)));
        }
        drafts.push(d);
    }

    // planted publications
    let bounds = weight_bounds(&data, &catalog);
    let mut mentions = vec![0usize; n_background];
    for d in &drafts {
        for (a, _) in &d.authors {
            if let Author::Registered(i) = a {
                mentions[*i] += 1;
            }
        }
    }
    // a background researcher may also join one planted paper
    let bg_max = mentions.iter().copied().max().unwrap_or(0) as f64 * bounds.regular_max
        + bounds.flagship_max;
    let mut used_external: BTreeSet<usize> = BTreeSet::new();
    for (k, (_, area, category)) in placements.iter().enumerate() {
        let w_min = bounds.flagship_min[category];
        let count = (bg_max / w_min).floor() as usize + 2;
        for _ in 0..count {
            let mut d = Draft::new(
                random_year(&mut rng),
                catalog.flagship[category].clone(),
                DocType::Article,
            );
            d.planted = true;
            let mut members = planted_people[k].clone();
            members.shuffle(&mut rng);
            for m in members {
                let addr = address_of(&mut rng, people[m].unit);
                let idx = d.address(addr);
                d.authors.push((Author::Registered(m), Some(idx)));
            }
            if rng.gen_bool(0.3) {
                if let Some(&c) = by_area[*area].choose(&mut rng) {
                    if used_external.insert(c) {
                        let addr = address_of(&mut rng, people[c].unit);
                        let idx = d.address(addr);
                        d.authors.push((Author::Registered(c), Some(idx)));
                    }
                }
            }
            drafts.push(d);
        }
    }

    // deliberate ambiguity
    let mut by_key: BTreeMap<&NameKey, Vec<usize>> = BTreeMap::new();
    for (i, p) in people.iter().enumerate() {
        by_key.entry(&p.key).or_default().push(i);
    }
    // share of the mentions that survive loading
    let window = YearRange::default();
    let kept = |d: &Draft| window.contains(d.year) && d.doc_type.is_scored();
    let total_mentions: usize = drafts.iter().filter(|d| kept(d)).map(|d| d.authors.len()).sum();
    let target = (spec.ambiguity * total_mentions as f64).round() as usize;
    let mut ambiguous = 0;
    if target > 0 {
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for (di, d) in drafts.iter().enumerate() {
            if d.planted || !kept(d) {
                continue;
            }
            for (mi, (a, _)) in d.authors.iter().enumerate() {
                if let Author::Registered(i) = a {
                    if by_key[&people[*i].key].len() > 1 && !(mi == 0 && d.protected_lead) {
                        candidates.push((di, mi));
                    }
                }
            }
        }
        candidates.shuffle(&mut rng);
        for (di, mi) in candidates {
            if ambiguous == target {
                break;
            }
            let d = &drafts[di];
            let Author::Registered(i) = d.authors[mi].0 else { unreachable!() };
            // without its address the mention is matched against every unit
            // on the byline; it stays ambiguous only if no homonym sits there
            let other_units: BTreeSet<&UnitId> = d
                .authors
                .iter()
                .enumerate()
                .filter(|(j, (_, idx))| *j != mi && idx.is_some())
                .filter_map(|(_, (a, _))| match a {
                    Author::Registered(r) => Some(&units[people[*r].unit].id),
                    Author::External(..) => None,
                })
                .collect();
            let clear = by_key[&people[i].key]
                .iter()
                .all(|h| !other_units.contains(&units[people[*h].unit].id));
            if clear {
                drafts[di].authors[mi].1 = None;
                ambiguous += 1;
            }
        }
        if ambiguous < target {
            return infeasible(format!(
                "only {ambiguous} of {target} requested ambiguous mentions could be placed"
            ));
        }
    }

    // assemble
    let mut truth = Vec::new();
    for (n, d) in drafts.into_iter().enumerate() {
        let id = PubId::new(format!("P{:05}", n + 1));
        let (mentions, addresses) =
            finish_mentions(&d, |r| (people[r].surname.clone(), people[r].initials.clone()));
        for (mi, (a, _)) in d.authors.iter().enumerate() {
            truth.push(TruthLink {
                publication: id.clone(),
                mention_index: mi,
                researcher: match a {
                    Author::Registered(i) => Some(people[*i].id.clone()),
                    Author::External(..) => None,
                },
            });
        }
        data.publications.push(Publication {
            id,
            year: d.year,
            journal: d.journal,
            doc_type: d.doc_type,
            mentions,
            addresses,
        });
    }
    data.researchers = people
        .iter()
        .map(|p| Researcher {
            id: p.id.clone(),
            surname: p.surname.clone(),
            initials: p.initials.clone(),
            unit: units[p.unit].id.clone(),
        })
        .collect();

    let planted = placements
        .iter()
        .zip(&planted_people)
        .map(|((u, _, category), members)| PlantedCluster {
            category: category.clone(),
            unit: units[*u].id.clone(),
            members: members.iter().map(|m| people[*m].id.clone()).collect(),
        })
        .collect();

    Ok(SynthCorpus {
        data,
        planted,
        truth,
        ambiguous_mentions: ambiguous,
    })
}

/// Small unstructured corpus for property tests: few categories spread
/// over two macro-areas, multi-category journals (some across macro-areas),
/// gaps in impact factor years, homonyms, unregistered co-authors, missing
/// addresses, out-of-window years and unscored document types.
pub fn random_corpus(seed: u64, max_publications: usize) -> CorpusData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = CorpusData::default();
    let cats = [("C1", "M1"), ("C2", "M1"), ("C3", "M1"), ("C4", "M2"), ("C5", "M2")];
    for (c, m) in cats {
        data.categories.push(Category {
            id: c.into(),
            name: format!("Category {c}"),
            macro_area: m.into(),
        });
    }
    let n_journals = rng.gen_range(4..=7);
    for j in 0..n_journals {
        let id = JournalId::new(format!("J{j}"));
        let mut categories = BTreeSet::new();
        // every category gets at least one journal
        categories.insert(CategoryId::from(cats[j % cats.len()].0));
        if rng.gen_bool(0.35) {
            categories.insert(CategoryId::from(cats.choose(&mut rng).expect("non-empty").0));
        }
        data.journals.push(Journal {
            id: id.clone(),
            name: format!("Journal {j}"),
            categories,
        });
        for year in 2001..=2003 {
            if year > 2001 && rng.gen_bool(0.15) {
                continue;
            }
            data.impact_factors.push(ImpactFactorEntry {
                journal: id.clone(),
                year,
                value: if_value(&mut rng, 1, 9_999),
            });
        }
    }
    let units = [
        ("UA", None, "University of Alpha", "emilia_romagna", GeoMacroArea::NorthEast),
        ("UB", None, "University of Beta", "lazio", GeoMacroArea::Center),
        ("CNR", Some("S1"), "Research Area Gamma", "apulia", GeoMacroArea::South),
        ("CNR", Some("S2"), "Research Area Delta", "lazio", GeoMacroArea::Center),
    ];
    for (org, site, name, region, geo) in units {
        data.organizations.push(Organization {
            unit: UnitId::new(org, site.map(SiteId::from)),
            name: name.into(),
            inst_type: if site.is_some() {
                InstType::PublicResearchLab
            } else {
                InstType::University
            },
            region: region.into(),
            geo_macro_area: geo,
            aliases: Vec::new(),
        });
    }
    let surnames = ["Rossi", "Bianchi", "Verdi", "Neri", "Gallo", "Costa", "Ricci"];
    let n_researchers = rng.gen_range(6..=20);
    let mut taken: BTreeSet<(usize, NameKey)> = BTreeSet::new();
    let mut people: Vec<(usize, String, String)> = Vec::new();
    while people.len() < n_researchers {
        let u = rng.gen_range(0..units.len());
        let s = surnames.choose(&mut rng).expect("non-empty").to_string();
        let i = (*b"AB".choose(&mut rng).expect("non-empty") as char).to_string();
        if taken.insert((u, key_of(&s, &i))) {
            people.push((u, s, i));
        }
    }
    for (n, (u, s, i)) in people.iter().enumerate() {
        data.researchers.push(Researcher {
            id: ResearcherId::new(format!("R{n:02}")),
            surname: s.clone(),
            initials: i.clone(),
            unit: data.organizations[*u].unit.clone(),
        });
    }
    let n_pubs = rng.gen_range(1..=max_publications.max(1));
    for p in 0..n_pubs {
        let year = match rng.gen_range(0..20) {
            0 => 2000,
            1 => 2004,
            _ => rng.gen_range(2001..=2003),
        };
        let doc_type = match rng.gen_range(0..10) {
            0 => DocType::Other,
            1 => DocType::Review,
            _ => DocType::Article,
        };
        let journal = data.journals.choose(&mut rng).expect("non-empty").id.clone();
        let mut d = Draft::new(year, journal, doc_type);
        let n_mentions = rng.gen_range(1..=5);
        let mut used = BTreeSet::new();
        for _ in 0..n_mentions {
            if rng.gen_bool(0.2) {
                let idx = rng
                    .gen_bool(0.5)
                    .then(|| d.address("University of Omega, Norway".into()));
                let name = EXTERNAL_SURNAMES.choose(&mut rng).expect("non-empty").to_string();
                d.authors.push((Author::External(name, "J".into()), idx));
                continue;
            }
            let r = rng.gen_range(0..people.len());
            if !used.insert(r) {
                continue;
            }
            let idx = rng.gen_bool(0.7).then(|| {
                let u = people[r].0;
                d.address(format!("Dept of Science, {}", units[u].2))
            });
            d.authors.push((Author::Registered(r), idx));
        }
        let (mentions, addresses) = finish_mentions(&d, |r| (people[r].1.clone(), people[r].2.clone()));
        data.publications.push(Publication {
            id: PubId::new(format!("P{p:03}")),
            year,
            journal: d.journal,
            doc_type,
            mentions,
            addresses,
        });
    }
    data
}

/// Mentions and compacted address list of a draft.
fn finish_mentions(
    d: &Draft,
    name_of: impl Fn(usize) -> (String, String),
) -> (Vec<AuthorMention>, Vec<String>) {
    let used: BTreeSet<usize> = d.authors.iter().filter_map(|(_, i)| *i).collect();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(new, old)| (*old, new)).collect();
    let addresses = used.iter().map(|i| d.addresses[*i].clone()).collect();
    let mentions = d
        .authors
        .iter()
        .map(|(a, idx)| {
            let (s, i) = match a {
                Author::Registered(r) => name_of(*r),
                Author::External(s, i) => (s.clone(), i.clone()),
            };
            let m = AuthorMention::new(s, i);
            match idx {
                Some(i) => m.with_address(remap[i]),
                None => m,
            }
        })
        .collect();
    (mentions, addresses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::excellence::{run_pipeline_with, PipelineConfig};
    use crate::par::Execution;

    #[test]
    fn same_seed_same_corpus() {
        let spec = SynthSpec::default();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec {
            seed: 2,
            ..SynthSpec::default()
        };
        assert_ne!(generate(&spec).unwrap().data, generate(&other).unwrap().data);
    }

    #[test]
    fn corpus_loads_and_sizes_are_close() {
        let s = generate(&SynthSpec::default()).unwrap();
        assert_eq!(s.data.researchers.len(), 200);
        let n = s.data.publications.len();
        assert!((900..=1300).contains(&n), "{n}");
        Corpus::from_data(s.data, YearRange::default()).unwrap();
    }

    #[test]
    fn planted_cluster_is_sole_coe() {
        let s = generate(&SynthSpec::default()).unwrap();
        let c = Corpus::from_data(s.data.clone(), YearRange::default()).unwrap();
        let map = run_pipeline_with(&c, &PipelineConfig::default(), Execution::Sequential).unwrap();
        let found: Vec<_> = map.centers().map(|r| (&r.cluster.category, &r.cluster.unit, &r.cluster.members)).collect();
        let planted: Vec<_> = s.planted.iter().map(|p| (&p.category, &p.unit, &p.members)).collect();
        assert_eq!(found, planted);
    }

    #[test]
    fn below_threshold_is_not_recovered() {
        let spec = SynthSpec {
            planted_size: 3,
            ..SynthSpec::default()
        };
        let s = generate(&spec).unwrap();
        let c = Corpus::from_data(s.data, YearRange::default()).unwrap();
        let map = run_pipeline_with(&c, &PipelineConfig::default(), Execution::Sequential).unwrap();
        assert_eq!(map.coe_count(), 0);
    }

    #[test]
    fn infeasible_specs() {
        let too_big = SynthSpec {
            planted_size: 9,
            ..SynthSpec::default()
        };
        assert!(matches!(generate(&too_big), Err(SynthError::Infeasible(_))));
        let too_many = SynthSpec {
            planted: 4,
            ..SynthSpec::default()
        };
        assert!(matches!(generate(&too_many), Err(SynthError::Infeasible(_))));
        let crowded = SynthSpec {
            min_cluster_size: 1,
            ..SynthSpec::default()
        };
        assert!(matches!(generate(&crowded), Err(SynthError::Infeasible(_))));
    }

    #[test]
    fn truth_covers_every_mention_and_ambiguity_is_placed() {
        let spec = SynthSpec {
            ambiguity: 0.2,
            ..SynthSpec::default()
        };
        let s = generate(&spec).unwrap();
        let mentions: usize = s.data.publications.iter().map(|p| p.mentions.len()).sum();
        assert_eq!(s.truth.len(), mentions);
        let c = Corpus::from_data(s.data.clone(), YearRange::default()).unwrap();
        let loaded: usize = c.publications().values().map(|p| p.mentions.len()).sum();
        assert!(loaded < mentions);
        assert_eq!(s.ambiguous_mentions, (0.2 * loaded as f64).round() as usize);
    }

    #[test]
    fn random_corpora_are_valid() {
        for seed in 0..200 {
            let data = random_corpus(seed, 30);
            let c = Corpus::from_data(data, YearRange::default()).unwrap();
            run_pipeline_with(&c, &PipelineConfig::default(), Execution::Sequential).unwrap();
        }
    }

    #[test]
    fn written_files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = generate(&SynthSpec::default()).unwrap();
        s.write(dir.path()).unwrap();
        assert_eq!(read_planted_csv(&dir.path().join(PLANTED_FILE)).unwrap(), s.planted);
        let back = crate::corpus::read_corpus_data(dir.path()).unwrap();
        assert_eq!(back.publications, s.data.publications);
    }
}
