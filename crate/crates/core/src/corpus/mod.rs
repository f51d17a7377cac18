//! The validated input corpus: categories, journals, impact factors,
//! organizations, researchers and publications.
//!
//! A [`Corpus`] is built from a [`CorpusData`] (plain rows, in any order) by
//! [`Corpus::from_data`], which checks referential integrity, canonicalizes
//! ordering by token and drops publications that are outside the observation
//! window or not articles/reviews. The drops are kept in a [`LoadReport`].

mod decimal;
mod load;
mod model;
mod write;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

pub use decimal::{exact_ratio, Decimal, ParseDecimalError};
pub use load::{load_corpus, read_corpus_data, INPUT_FILES, ALIASES_FILE};
pub use model::*;
pub use write::write_corpus_data;

use crate::identity;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("missing input files in {}: {}", dir.display(), files.join(", "))]
    MissingFiles { dir: PathBuf, files: Vec<String> },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: row {row}: {source}")]
    Csv {
        file: String,
        row: u64,
        #[source]
        source: csv::Error,
    },
    #[error("{file}: row {row}: field {field}: {message}")]
    Malformed {
        file: String,
        row: u64,
        field: String,
        message: String,
    },
    #[error("{file}: duplicate key {key}")]
    DuplicateKey { file: String, key: String },
    #[error("{file}: field {field} references unknown token {token:?}")]
    DanglingReference {
        file: String,
        field: String,
        token: String,
    },
    #[error("{file}: {key}: {message}")]
    Invalid {
        file: String,
        key: String,
        message: String,
    },
    #[error("organizations.csv: region {region} mapped to both {first} and {second}")]
    RegionConflict {
        region: String,
        first: &'static str,
        second: &'static str,
    },
}

/// Why a publication row did not enter the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoadExclusion {
    OutOfWindow,
    DocTypeOther,
}

impl LoadExclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadExclusion::OutOfWindow => "out_of_window",
            LoadExclusion::DocTypeOther => "doc_type_other",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Sorted by publication id.
    pub excluded: Vec<(PubId, LoadExclusion)>,
}

impl LoadReport {
    pub fn count(&self, reason: LoadExclusion) -> usize {
        self.excluded.iter().filter(|(_, r)| *r == reason).count()
    }
}

/// Unvalidated corpus rows, as read from or written to the input files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusData {
    pub categories: Vec<Category>,
    pub journals: Vec<Journal>,
    pub impact_factors: Vec<ImpactFactorEntry>,
    /// Organization aliases may be filled in here directly or via `aliases`.
    pub organizations: Vec<Organization>,
    pub aliases: Vec<OrgAlias>,
    pub researchers: Vec<Researcher>,
    pub publications: Vec<Publication>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    window: YearRange,
    categories: BTreeMap<CategoryId, Category>,
    macro_areas: BTreeMap<MacroAreaId, BTreeSet<CategoryId>>,
    journals: BTreeMap<JournalId, Journal>,
    journals_by_category: BTreeMap<CategoryId, BTreeSet<JournalId>>,
    impact_factors: BTreeMap<JournalId, BTreeMap<i32, Decimal>>,
    organizations: BTreeMap<UnitId, Organization>,
    researchers: BTreeMap<ResearcherId, Researcher>,
    publications: BTreeMap<PubId, Publication>,
    report: LoadReport,
}

fn invalid(file: &str, key: impl ToString, message: impl Into<String>) -> CorpusError {
    CorpusError::Invalid {
        file: file.to_string(),
        key: key.to_string(),
        message: message.into(),
    }
}

fn dangling(file: &str, field: &str, token: impl ToString) -> CorpusError {
    CorpusError::DanglingReference {
        file: file.to_string(),
        field: field.to_string(),
        token: token.to_string(),
    }
}

fn duplicate(file: &str, key: impl ToString) -> CorpusError {
    CorpusError::DuplicateKey {
        file: file.to_string(),
        key: key.to_string(),
    }
}

impl Corpus {
    /// Validates `data` and builds the canonical corpus for `window`.
    pub fn from_data(data: CorpusData, window: YearRange) -> Result<Corpus, CorpusError> {
        let CorpusData {
            categories: category_rows,
            journals: journal_rows,
            impact_factors: if_rows,
            organizations: org_rows,
            aliases,
            researchers: researcher_rows,
            publications: publication_rows,
        } = data;

        let mut categories = BTreeMap::new();
        let mut macro_areas: BTreeMap<MacroAreaId, BTreeSet<CategoryId>> = BTreeMap::new();
        for c in category_rows {
            if c.id.as_str().is_empty() || c.macro_area.as_str().is_empty() {
                return Err(invalid("categories.csv", &c.id, "empty token"));
            }
            if categories.contains_key(&c.id) {
                return Err(duplicate("categories.csv", &c.id));
            }
            macro_areas
                .entry(c.macro_area.clone())
                .or_default()
                .insert(c.id.clone());
            categories.insert(c.id.clone(), c);
        }

        let mut journals = BTreeMap::new();
        let mut journals_by_category: BTreeMap<CategoryId, BTreeSet<JournalId>> = BTreeMap::new();
        for j in journal_rows {
            if j.id.as_str().is_empty() {
                return Err(invalid("journals.csv", &j.id, "empty journal_id"));
            }
            if j.categories.is_empty() {
                return Err(invalid("journals.csv", &j.id, "journal has no categories"));
            }
            for c in &j.categories {
                if !categories.contains_key(c) {
                    return Err(dangling("journals.csv", "category_ids", c));
                }
                journals_by_category
                    .entry(c.clone())
                    .or_default()
                    .insert(j.id.clone());
            }
            if journals.contains_key(&j.id) {
                return Err(duplicate("journals.csv", &j.id));
            }
            journals.insert(j.id.clone(), j);
        }

        let mut impact_factors: BTreeMap<JournalId, BTreeMap<i32, Decimal>> = BTreeMap::new();
        for e in if_rows {
            if !journals.contains_key(&e.journal) {
                return Err(dangling("impact_factors.csv", "journal_id", &e.journal));
            }
            let years = impact_factors.entry(e.journal.clone()).or_default();
            if years.insert(e.year, e.value).is_some() {
                return Err(duplicate(
                    "impact_factors.csv",
                    format!("{}/{}", e.journal, e.year),
                ));
            }
        }

        let mut organizations = BTreeMap::new();
        let mut regions: BTreeMap<RegionId, GeoMacroArea> = BTreeMap::new();
        for o in org_rows {
            if o.unit.org.as_str().is_empty() {
                return Err(invalid("organizations.csv", &o.unit, "empty org_id"));
            }
            if let Some(prev) = regions.insert(o.region.clone(), o.geo_macro_area) {
                if prev != o.geo_macro_area {
                    return Err(CorpusError::RegionConflict {
                        region: o.region.to_string(),
                        first: prev.as_str(),
                        second: o.geo_macro_area.as_str(),
                    });
                }
            }
            if organizations.contains_key(&o.unit) {
                return Err(duplicate("organizations.csv", &o.unit));
            }
            organizations.insert(o.unit.clone(), o);
        }
        for a in aliases {
            let org = organizations
                .get_mut(&a.unit)
                .ok_or_else(|| dangling("org_aliases.csv", "org_id,site_id", &a.unit))?;
            if a.alias.trim().is_empty() {
                return Err(invalid("org_aliases.csv", &a.unit, "empty alias"));
            }
            org.aliases.push(a.alias);
        }
        for org in organizations.values_mut() {
            org.aliases.sort();
            org.aliases.dedup();
        }

        let mut researchers = BTreeMap::new();
        for r in researcher_rows {
            if r.id.as_str().is_empty() {
                return Err(invalid("researchers.csv", &r.id, "empty researcher_id"));
            }
            if !organizations.contains_key(&r.unit) {
                return Err(dangling("researchers.csv", "org_id,site_id", &r.unit));
            }
            identity::normalize_name(&r.surname, &r.initials)
                .map_err(|e| invalid("researchers.csv", &r.id, e.to_string()))?;
            if researchers.contains_key(&r.id) {
                return Err(duplicate("researchers.csv", &r.id));
            }
            researchers.insert(r.id.clone(), r);
        }

        let mut publications = BTreeMap::new();
        let mut report = LoadReport::default();
        let mut seen = BTreeSet::new();
        for p in publication_rows {
            if p.id.as_str().is_empty() {
                return Err(invalid("publications.csv", &p.id, "empty pub_id"));
            }
            if !seen.insert(p.id.clone()) {
                return Err(duplicate("publications.csv", &p.id));
            }
            if !journals.contains_key(&p.journal) {
                return Err(dangling("publications.csv", "journal_id", &p.journal));
            }
            if p.mentions.is_empty() {
                return Err(invalid("publications.csv", &p.id, "no authors"));
            }
            for (i, m) in p.mentions.iter().enumerate() {
                identity::normalize_name(&m.surname, &m.initials).map_err(|e| {
                    invalid("publications.csv", &p.id, format!("author {i}: {e}"))
                })?;
                if let Some(idx) = m.address_index {
                    if idx >= p.addresses.len() {
                        return Err(invalid(
                            "publications.csv",
                            &p.id,
                            format!(
                                "author {i}: address_index {idx} out of range ({} addresses)",
                                p.addresses.len()
                            ),
                        ));
                    }
                }
            }
            if !window.contains(p.year) {
                report.excluded.push((p.id, LoadExclusion::OutOfWindow));
            } else if !p.doc_type.is_scored() {
                report.excluded.push((p.id, LoadExclusion::DocTypeOther));
            } else {
                publications.insert(p.id.clone(), p);
            }
        }
        report.excluded.sort();

        Ok(Corpus {
            window,
            categories,
            macro_areas,
            journals,
            journals_by_category,
            impact_factors,
            organizations,
            researchers,
            publications,
            report,
        })
    }

    pub fn window(&self) -> YearRange {
        self.window
    }

    pub fn categories(&self) -> &BTreeMap<CategoryId, Category> {
        &self.categories
    }

    pub fn category(&self, id: &CategoryId) -> Option<&Category> {
        self.categories.get(id)
    }

    /// Macro-areas with their member categories.
    pub fn macro_areas(&self) -> &BTreeMap<MacroAreaId, BTreeSet<CategoryId>> {
        &self.macro_areas
    }

    pub fn journals(&self) -> &BTreeMap<JournalId, Journal> {
        &self.journals
    }

    pub fn journal(&self, id: &JournalId) -> Option<&Journal> {
        self.journals.get(id)
    }

    pub fn journals_in_category(&self, id: &CategoryId) -> impl Iterator<Item = &JournalId> {
        self.journals_by_category.get(id).into_iter().flatten()
    }

    pub fn impact_factor(&self, journal: &JournalId, year: i32) -> Option<&Decimal> {
        self.impact_factors.get(journal)?.get(&year)
    }

    pub fn impact_factor_count(&self) -> usize {
        self.impact_factors.values().map(BTreeMap::len).sum()
    }

    pub fn organizations(&self) -> &BTreeMap<UnitId, Organization> {
        &self.organizations
    }

    /// Registry row for `unit`. For an org-level unit that has no row of its
    /// own, the first site row of the organization stands in.
    pub fn organization(&self, unit: &UnitId) -> Option<&Organization> {
        self.organizations.get(unit).or_else(|| {
            if unit.site.is_some() {
                return None;
            }
            self.organizations
                .range(unit.clone()..)
                .next()
                .map(|(_, o)| o)
                .filter(|o| o.unit.org == unit.org)
        })
    }

    pub fn researchers(&self) -> &BTreeMap<ResearcherId, Researcher> {
        &self.researchers
    }

    pub fn researcher(&self, id: &ResearcherId) -> Option<&Researcher> {
        self.researchers.get(id)
    }

    /// Scored publications (articles and reviews inside the window).
    pub fn publications(&self) -> &BTreeMap<PubId, Publication> {
        &self.publications
    }

    pub fn publication(&self, id: &PubId) -> Option<&Publication> {
        self.publications.get(id)
    }

    pub fn load_report(&self) -> &LoadReport {
        &self.report
    }

    /// Categories a publication counts in: those of its journal.
    pub fn publication_categories(&self, publication: &Publication) -> &BTreeSet<CategoryId> {
        &self.journals[&publication.journal].categories
    }

    /// Macro-areas touched by a publication's categories.
    pub fn publication_macro_areas(&self, publication: &Publication) -> BTreeSet<&MacroAreaId> {
        self.publication_categories(publication)
            .iter()
            .map(|c| &self.categories[c].macro_area)
            .collect()
    }

    /// The publication's categories that fall within `macro_area`.
    pub fn publication_categories_in<'a>(
        &'a self,
        publication: &'a Publication,
        macro_area: &'a MacroAreaId,
    ) -> impl Iterator<Item = &'a CategoryId> + 'a {
        self.publication_categories(publication)
            .iter()
            .filter(move |c| &self.categories[*c].macro_area == macro_area)
    }
}

/// Free-function form of [`Corpus::publication_categories`].
pub fn publication_categories<'a>(
    publication: &Publication,
    corpus: &'a Corpus,
) -> &'a BTreeSet<CategoryId> {
    corpus.publication_categories(publication)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("impact factor undefined: no items published in the previous two years")]
pub struct UndefinedImpactFactor;

/// Journal impact factor for a year: citations received this year by items
/// from the previous two years, divided by the number of those items.
pub fn compute_impact_factor(
    citations_to_prev2: u64,
    items_prev2: u64,
) -> Result<f64, UndefinedImpactFactor> {
    if items_prev2 == 0 {
        return Err(UndefinedImpactFactor);
    }
    Ok(citations_to_prev2 as f64 / items_prev2 as f64)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn category(id: &str, macro_area: &str) -> Category {
        Category {
            id: id.into(),
            name: format!("Category {id}"),
            macro_area: macro_area.into(),
        }
    }

    pub fn journal(id: &str, categories: &[&str]) -> Journal {
        Journal {
            id: id.into(),
            name: format!("Journal {id}"),
            categories: categories.iter().map(|c| CategoryId::from(*c)).collect(),
        }
    }

    pub fn impact(journal: &str, year: i32, value: &str) -> ImpactFactorEntry {
        ImpactFactorEntry {
            journal: journal.into(),
            year,
            value: value.parse().unwrap(),
        }
    }

    pub fn org(org: &str, site: Option<&str>, name: &str) -> Organization {
        Organization {
            unit: UnitId::new(org, site.map(SiteId::from)),
            name: name.to_string(),
            inst_type: InstType::University,
            region: "lazio".into(),
            geo_macro_area: GeoMacroArea::Center,
            aliases: Vec::new(),
        }
    }

    pub fn researcher(id: &str, surname: &str, initials: &str, org: &str) -> Researcher {
        Researcher {
            id: id.into(),
            surname: surname.to_string(),
            initials: initials.to_string(),
            unit: UnitId::org_only(org),
        }
    }

    pub fn publication(id: &str, journal: &str, authors: &[(&str, &str)]) -> Publication {
        Publication {
            id: id.into(),
            year: 2002,
            journal: journal.into(),
            doc_type: DocType::Article,
            mentions: authors
                .iter()
                .map(|(s, i)| AuthorMention::new(*s, *i))
                .collect(),
            addresses: Vec::new(),
        }
    }

    pub fn minimal() -> CorpusData {
        CorpusData {
            categories: vec![category("OCE", "EARTH")],
            journals: vec![journal("J1", &["OCE"])],
            impact_factors: vec![impact("J1", 2002, "2.0")],
            organizations: vec![org("U1", None, "University of Bologna")],
            aliases: Vec::new(),
            researchers: vec![researcher("R1", "Rossi", "M", "U1")],
            publications: vec![publication("P1", "J1", &[("Rossi", "M")])],
        }
    }
}
