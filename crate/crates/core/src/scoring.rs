//! Publication weights, Scientific Strength and Fractional Scientific Strength.
//!
//! A publication's weight in a macro-area is its journal's impact factor
//! divided by the mean impact factor of the journal's category, averaged over
//! the journal's categories inside that macro-area. Scientific Strength (SS)
//! is the sum of a researcher's publication weights per macro-area. The
//! fractional variant (FSS) credits a cluster with `weight * m / n` per
//! distinct publication, where `m` counts cluster members on the byline and
//! `n` is the byline length.
//!
//! All sums run in publication-id order, so results are bitwise reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::corpus::{
    exact_ratio, CategoryId, Corpus, Decimal, JournalId, LoadExclusion, MacroAreaId, PubId,
    Publication, ResearcherId,
};
use crate::identity::AuthorshipTable;
use crate::par::{map_ordered, Execution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("normalization undefined for category {category} in {year}: no positive impact factors")]
    NormalizationUndefined { category: CategoryId, year: i32 },
    #[error("publication {publication} has no category in macro-area {macro_area}")]
    NotInMacroArea {
        publication: PubId,
        macro_area: MacroAreaId,
    },
    #[error("publication {publication}: no impact factor for journal {journal} in {year} or earlier window years")]
    MissingImpactFactor {
        publication: PubId,
        journal: JournalId,
        year: i32,
    },
    #[error("unknown category {0}")]
    UnknownCategory(CategoryId),
}

/// Which publications count towards a cluster's FSS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum FssScope {
    /// Only publications in journals carrying the cluster's category.
    #[default]
    Category,
    /// Every publication touching the category's macro-area.
    All,
}

impl FssScope {
    pub fn as_str(self) -> &'static str {
        match self {
            FssScope::Category => "category",
            FssScope::All => "all",
        }
    }
}

impl fmt::Display for FssScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FssScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "category" => Ok(FssScope::Category),
            "all" => Ok(FssScope::All),
            other => Err(format!("invalid fss scope {other:?}, expected category|all")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CategoryYearStat {
    sum: Option<Decimal>,
    sum_f64: f64,
    journals: u64,
}

impl CategoryYearStat {
    fn collect(category: &CategoryId, year: i32, corpus: &Corpus) -> Option<Self> {
        let values: Vec<&Decimal> = corpus
            .journals_in_category(category)
            .filter_map(|j| corpus.impact_factor(j, year))
            .collect();
        if values.is_empty() {
            return None;
        }
        Some(CategoryYearStat {
            sum: Decimal::checked_sum(values.iter().copied()),
            sum_f64: values.iter().map(|v| v.to_f64()).sum(),
            journals: values.len() as u64,
        })
    }

    fn is_zero(&self) -> bool {
        match self.sum {
            Some(s) => s.is_zero(),
            None => self.sum_f64 == 0.0,
        }
    }

    fn mean(&self) -> f64 {
        self.sum_f64 / self.journals as f64
    }

    /// `value / mean`, computed exactly where possible.
    fn ratio(&self, value: &Decimal) -> f64 {
        match &self.sum {
            Some(sum) => exact_ratio(value, self.journals, sum),
            None => value.to_f64() * self.journals as f64 / self.sum_f64,
        }
    }
}

/// Mean impact factor over the category's journals that have an entry for
/// `year`.
pub fn category_mean_if(
    category: &CategoryId,
    year: i32,
    corpus: &Corpus,
) -> Result<f64, ScoringError> {
    if corpus.category(category).is_none() {
        return Err(ScoringError::UnknownCategory(category.clone()));
    }
    CategoryYearStat::collect(category, year, corpus)
        .filter(|s| !s.is_zero())
        .map(|s| s.mean())
        .ok_or_else(|| ScoringError::NormalizationUndefined {
            category: category.clone(),
            year,
        })
}

/// Year whose impact factor applies to `publication`: its own year, else the
/// nearest earlier year inside the observation window.
pub fn reference_year(publication: &Publication, corpus: &Corpus) -> Option<i32> {
    let window = corpus.window();
    (window.start..=publication.year)
        .rev()
        .find(|y| corpus.impact_factor(&publication.journal, *y).is_some())
}

fn weight_from<F>(
    publication: &Publication,
    macro_area: &MacroAreaId,
    corpus: &Corpus,
    mut stat: F,
) -> Result<f64, ScoringError>
where
    F: FnMut(&CategoryId, i32) -> Option<CategoryYearStat>,
{
    let categories: Vec<&CategoryId> = corpus
        .publication_categories_in(publication, macro_area)
        .collect();
    if categories.is_empty() {
        return Err(ScoringError::NotInMacroArea {
            publication: publication.id.clone(),
            macro_area: macro_area.clone(),
        });
    }
    let year = reference_year(publication, corpus).ok_or_else(|| {
        ScoringError::MissingImpactFactor {
            publication: publication.id.clone(),
            journal: publication.journal.clone(),
            year: publication.year,
        }
    })?;
    let value = corpus
        .impact_factor(&publication.journal, year)
        .expect("reference year has an entry");
    let mut total = 0.0;
    for c in &categories {
        let s = stat(c, year)
            .filter(|s| !s.is_zero())
            .ok_or_else(|| ScoringError::NormalizationUndefined {
                category: (*c).clone(),
                year,
            })?;
        total += s.ratio(value);
    }
    Ok(total / categories.len() as f64)
}

/// Category-normalized weight of `publication` in `macro_area`.
pub fn normalized_weight(
    publication: &Publication,
    macro_area: &MacroAreaId,
    corpus: &Corpus,
) -> Result<f64, ScoringError> {
    weight_from(publication, macro_area, corpus, |c, y| {
        CategoryYearStat::collect(c, y, corpus)
    })
}

/// Why a publication carries no weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExclusionReason {
    OutOfWindow,
    DocTypeOther,
    MissingImpactFactor,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::OutOfWindow => "out_of_window",
            ExclusionReason::DocTypeOther => "doc_type_other",
            ExclusionReason::MissingImpactFactor => "missing_if",
        }
    }
}

impl From<LoadExclusion> for ExclusionReason {
    fn from(value: LoadExclusion) -> Self {
        match value {
            LoadExclusion::OutOfWindow => ExclusionReason::OutOfWindow,
            LoadExclusion::DocTypeOther => ExclusionReason::DocTypeOther,
        }
    }
}

/// Normalized weight of every scored publication in each macro-area it
/// touches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightTable {
    weights: BTreeMap<PubId, BTreeMap<MacroAreaId, f64>>,
    excluded: Vec<(PubId, ExclusionReason)>,
}

impl WeightTable {
    pub fn compute(corpus: &Corpus, exec: Execution) -> Result<Self, ScoringError> {
        let mut stats: BTreeMap<(CategoryId, i32), Option<CategoryYearStat>> = BTreeMap::new();
        let pubs: Vec<&Publication> = corpus.publications().values().collect();
        for p in &pubs {
            if let Some(year) = reference_year(p, corpus) {
                for c in corpus.publication_categories(p) {
                    stats
                        .entry((c.clone(), year))
                        .or_insert_with(|| CategoryYearStat::collect(c, year, corpus));
                }
            }
        }

        let per_pub = map_ordered(&pubs, exec, |p| {
            if reference_year(p, corpus).is_none() {
                return Ok(None);
            }
            corpus
                .publication_macro_areas(p)
                .into_iter()
                .map(|m| {
                    let w = weight_from(p, m, corpus, |c, y| {
                        stats.get(&(c.clone(), y)).copied().flatten()
                    })?;
                    Ok((m.clone(), w))
                })
                .collect::<Result<BTreeMap<_, _>, ScoringError>>()
                .map(Some)
        });

        let mut table = WeightTable::default();
        for (p, result) in pubs.iter().zip(per_pub) {
            match result? {
                Some(w) => {
                    table.weights.insert(p.id.clone(), w);
                }
                None => table
                    .excluded
                    .push((p.id.clone(), ExclusionReason::MissingImpactFactor)),
            }
        }
        Ok(table)
    }

    pub fn weight(&self, publication: &PubId, macro_area: &MacroAreaId) -> Option<f64> {
        self.weights.get(publication)?.get(macro_area).copied()
    }

    pub fn macro_area_weights(&self, publication: &PubId) -> Option<&BTreeMap<MacroAreaId, f64>> {
        self.weights.get(publication)
    }

    /// Publications dropped at scoring time (no applicable impact factor).
    pub fn excluded(&self) -> &[(PubId, ExclusionReason)] {
        &self.excluded
    }

    /// Writes `excluded_pubs.csv`, merging load-time and scoring-time drops.
    pub fn write_excluded_csv<W: Write>(&self, corpus: &Corpus, out: W) -> csv::Result<()> {
        let mut rows: Vec<(&PubId, ExclusionReason)> = corpus
            .load_report()
            .excluded
            .iter()
            .map(|(p, r)| (p, ExclusionReason::from(*r)))
            .chain(self.excluded.iter().map(|(p, r)| (p, *r)))
            .collect();
        rows.sort();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pub_id", "reason"])?;
        for (p, r) in rows {
            w.write_record([p.as_str(), r.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scientific Strength per (researcher, macro-area).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    ss: BTreeMap<(ResearcherId, MacroAreaId), f64>,
}

impl ScoreTable {
    pub fn compute(
        authorships: &AuthorshipTable,
        weights: &WeightTable,
        exec: Execution,
    ) -> ScoreTable {
        let researchers: Vec<&ResearcherId> = authorships.linked_researchers().collect();
        let per_researcher = map_ordered(&researchers, exec, |r| {
            let mut sums: BTreeMap<&MacroAreaId, f64> = BTreeMap::new();
            for p in authorships.publications_of(r) {
                if let Some(ws) = weights.macro_area_weights(p) {
                    for (m, w) in ws {
                        *sums.entry(m).or_insert(0.0) += w;
                    }
                }
            }
            sums.into_iter()
                .map(|(m, s)| (m.clone(), s))
                .collect::<Vec<_>>()
        });
        let mut ss = BTreeMap::new();
        for (r, entries) in researchers.into_iter().zip(per_researcher) {
            for (m, s) in entries {
                ss.insert((r.clone(), m), s);
            }
        }
        ScoreTable { ss }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((ResearcherId, MacroAreaId), f64)>) -> Self {
        ScoreTable {
            ss: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, researcher: &ResearcherId, macro_area: &MacroAreaId) -> Option<f64> {
        self.ss
            .get(&(researcher.clone(), macro_area.clone()))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ResearcherId, &MacroAreaId, f64)> {
        self.ss.iter().map(|((r, m), s)| (r, m, *s))
    }

    /// (researcher, SS) for every researcher scored in `macro_area`.
    pub fn in_macro_area<'a>(
        &'a self,
        macro_area: &'a MacroAreaId,
    ) -> impl Iterator<Item = (&'a ResearcherId, f64)> + 'a {
        self.ss
            .iter()
            .filter(move |((_, m), _)| m == macro_area)
            .map(|((r, _), s)| (r, *s))
    }

    pub fn macro_areas(&self) -> BTreeSet<&MacroAreaId> {
        self.ss.keys().map(|(_, m)| m).collect()
    }

    pub fn len(&self) -> usize {
        self.ss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ss.is_empty()
    }

    /// Writes `scores.csv`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["researcher_id", "macro_area_id", "ss"])?;
        for ((r, m), s) in &self.ss {
            w.write_record([r.as_str(), m.as_str(), &s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// SS of one researcher in one macro-area, computed directly from the corpus.
pub fn scientific_strength(
    researcher: &ResearcherId,
    macro_area: &MacroAreaId,
    authorships: &AuthorshipTable,
    corpus: &Corpus,
) -> Result<f64, ScoringError> {
    let mut total = 0.0;
    for p in authorships.publications_of(researcher) {
        let Some(publication) = corpus.publication(p) else {
            continue;
        };
        match normalized_weight(publication, macro_area, corpus) {
            Ok(w) => total += w,
            Err(ScoringError::NotInMacroArea { .. }) | Err(ScoringError::MissingImpactFactor { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

/// Publications counted for a cluster: distinct publications linked to any
/// member, filtered by scope, that carry a weight in `macro_area`.
fn cluster_publications<'a>(
    members: &'a BTreeSet<ResearcherId>,
    category: &'a CategoryId,
    scope: FssScope,
    authorships: &'a AuthorshipTable,
    corpus: &'a Corpus,
) -> BTreeSet<&'a PubId> {
    members
        .iter()
        .flat_map(|r| authorships.publications_of(r))
        .filter(|p| match scope {
            FssScope::Category => corpus
                .publication(p)
                .is_some_and(|p| corpus.publication_categories(p).contains(category)),
            FssScope::All => true,
        })
        .collect()
}

/// FSS of a cluster using precomputed weights.
pub fn cluster_fss(
    members: &BTreeSet<ResearcherId>,
    category: &CategoryId,
    scope: FssScope,
    authorships: &AuthorshipTable,
    corpus: &Corpus,
    weights: &WeightTable,
) -> Result<f64, ScoringError> {
    let macro_area = &corpus
        .category(category)
        .ok_or_else(|| ScoringError::UnknownCategory(category.clone()))?
        .macro_area;
    let mut total = 0.0;
    for p in cluster_publications(members, category, scope, authorships, corpus) {
        let Some(w) = weights.weight(p, macro_area) else {
            continue;
        };
        let publication = corpus.publication(p).expect("linked publication exists");
        let m = authorships
            .authors_of(p)
            .iter()
            .filter(|r| members.contains(*r))
            .count();
        let n = publication.mentions.len();
        total += w * m as f64 / n as f64;
    }
    Ok(total)
}

/// FSS of a cluster computed directly from the corpus.
pub fn fractional_strength(
    members: &BTreeSet<ResearcherId>,
    category: &CategoryId,
    scope: FssScope,
    authorships: &AuthorshipTable,
    corpus: &Corpus,
) -> Result<f64, ScoringError> {
    let weights = WeightTable::compute(corpus, Execution::Sequential)?;
    cluster_fss(members, category, scope, authorships, corpus, &weights)
}
