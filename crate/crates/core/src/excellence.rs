//! Top-scientist selection, clustering and center-of-excellence ranking.
//!
//! The pipeline runs in this order:
//!
//! 1. resolve author mentions ([`crate::identity`]);
//! 2. weight publications and compute SS per macro-area ([`crate::scoring`]);
//! 3. take the first decile of SS in every macro-area as top scientists;
//! 4. give each top scientist the category holding most of their output;
//! 5. group top scientists by organization unit and category, keeping groups
//!    of at least `min_cluster_size` (top scientist clusters, TSC);
//! 6. rank each category's clusters by FSS and flag the first `top_k` as
//!    centers of excellence (COE).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::{CategoryId, Corpus, MacroAreaId, ResearcherId, UnitId, YearRange};
use crate::identity::{resolve_mentions_with, AuthorshipTable};
use crate::par::{map_ordered, Execution};
use crate::scoring::{cluster_fss, FssScope, ScoreTable, ScoringError, WeightTable};

/// Granularity of the organization unit clusters are formed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum UnitLevel {
    Org,
    #[default]
    Site,
}

impl UnitLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitLevel::Org => "org",
            UnitLevel::Site => "site",
        }
    }

    pub fn apply(self, unit: &UnitId) -> UnitId {
        match self {
            UnitLevel::Org => unit.rollup(),
            UnitLevel::Site => unit.clone(),
        }
    }
}

impl fmt::Display for UnitLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnitLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "org" => Ok(UnitLevel::Org),
            "site" => Ok(UnitLevel::Site),
            other => Err(format!("invalid unit level {other:?}, expected org|site")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("decile fraction must be in (0, 1], got {0}")]
    DecileFraction(f64),
    #[error("min cluster size must be positive")]
    MinClusterSize,
    #[error("top-k must be positive")]
    TopK,
    #[error("configured window {config} differs from the corpus window {corpus}")]
    WindowMismatch { config: YearRange, corpus: YearRange },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub decile_fraction: f64,
    pub min_cluster_size: usize,
    pub top_k: usize,
    pub unit_level: UnitLevel,
    pub fss_scope: FssScope,
    pub window: YearRange,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            decile_fraction: 0.10,
            min_cluster_size: 4,
            top_k: 3,
            unit_level: UnitLevel::Site,
            fss_scope: FssScope::Category,
            window: YearRange::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.decile_fraction > 0.0 && self.decile_fraction <= 1.0) {
            return Err(ConfigError::DecileFraction(self.decile_fraction));
        }
        if self.min_cluster_size == 0 {
            return Err(ConfigError::MinClusterSize);
        }
        if self.top_k == 0 {
            return Err(ConfigError::TopK);
        }
        Ok(())
    }

    /// `key=value` lines, sorted by key.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("decile", self.decile_fraction.to_string()),
            ("fss_scope", self.fss_scope.to_string()),
            ("min_cluster_size", self.min_cluster_size.to_string()),
            ("top_k", self.top_k.to_string()),
            ("unit_level", self.unit_level.to_string()),
            ("years", self.window.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("researcher {researcher} has no scored publication in macro-area {macro_area}")]
    NoSpecialization {
        researcher: ResearcherId,
        macro_area: MacroAreaId,
    },
}

/// Rank (1-based) of the decile boundary: `ceil(fraction * n)`, clamped to
/// `1..=n`. Products within 1e-9 of an integer are treated as that integer
/// so that, e.g., `0.1 * 30` gives 3.
pub fn decile_rank(fraction: f64, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let x = fraction * n as f64;
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, n)
}

/// Researchers in the first decile of SS within `macro_area`. Everyone tied
/// with the boundary researcher is included.
pub fn top_scientists(
    macro_area: &MacroAreaId,
    scores: &ScoreTable,
    cfg: &PipelineConfig,
) -> BTreeSet<ResearcherId> {
    let mut ranked: Vec<(&ResearcherId, f64)> = scores.in_macro_area(macro_area).collect();
    if ranked.is_empty() {
        log::warn!("macro-area {macro_area} has no scored researchers");
        return BTreeSet::new();
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let k = decile_rank(cfg.decile_fraction, ranked.len());
    let threshold = ranked[k - 1].1;
    ranked
        .into_iter()
        .take_while(|(_, ss)| *ss >= threshold)
        .map(|(r, _)| r.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Specialization {
    pub category: CategoryId,
    /// Scored publications of the researcher in that category.
    pub publications: usize,
    /// Summed macro-area weight of those publications.
    pub weight: f64,
}

/// Category of the macro-area holding most of the researcher's scored
/// publications. Ties go to the larger summed weight, then to the smaller
/// category id.
pub fn specialization_category(
    researcher: &ResearcherId,
    macro_area: &MacroAreaId,
    authorships: &AuthorshipTable,
    corpus: &Corpus,
    weights: &WeightTable,
) -> Result<Specialization, PipelineError> {
    let mut tally: BTreeMap<&CategoryId, (usize, f64)> = BTreeMap::new();
    for p in authorships.publications_of(researcher) {
        let (Some(publication), Some(w)) = (corpus.publication(p), weights.weight(p, macro_area))
        else {
            continue;
        };
        for c in corpus.publication_categories_in(publication, macro_area) {
            let e = tally.entry(c).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += w;
        }
    }
    tally
        .into_iter()
        .max_by(|(ca, (na, wa)), (cb, (nb, wb))| {
            na.cmp(nb)
                .then_with(|| wa.total_cmp(wb))
                .then_with(|| cb.cmp(ca))
        })
        .map(|(c, (n, w))| Specialization {
            category: c.clone(),
            publications: n,
            weight: w,
        })
        .ok_or_else(|| PipelineError::NoSpecialization {
            researcher: researcher.clone(),
            macro_area: macro_area.clone(),
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopScientist {
    pub researcher: ResearcherId,
    pub macro_area: MacroAreaId,
    pub ss: f64,
    pub specialization: Specialization,
}

/// A group of top scientists sharing an organization unit and a
/// specialization category.
#[derive(Debug, Clone, PartialEq)]
pub struct TscCluster {
    pub unit: UnitId,
    pub category: CategoryId,
    pub members: BTreeSet<ResearcherId>,
    /// Zero until scored.
    pub fss: f64,
}

/// For a researcher who is a top scientist in several macro-areas, the record
/// whose specialization is strongest (publication count, then weight, then
/// category id) is the one used for clustering.
fn primary_records(top: &[TopScientist]) -> Vec<&TopScientist> {
    let mut best: BTreeMap<&ResearcherId, &TopScientist> = BTreeMap::new();
    for t in top {
        best.entry(&t.researcher)
            .and_modify(|cur| {
                let a = &t.specialization;
                let b = &cur.specialization;
                let better = a
                    .publications
                    .cmp(&b.publications)
                    .then_with(|| a.weight.total_cmp(&b.weight))
                    .then_with(|| b.category.cmp(&a.category))
                    .is_gt();
                if better {
                    *cur = t;
                }
            })
            .or_insert(t);
    }
    best.into_values().collect()
}

/// Groups top scientists by (unit, specialization category) and keeps groups
/// with at least `min_cluster_size` members. Clusters come back in
/// (category, unit) order with `fss` unset.
pub fn cluster_top_scientists(
    top: &[TopScientist],
    cfg: &PipelineConfig,
    corpus: &Corpus,
) -> Vec<TscCluster> {
    let mut groups: BTreeMap<(CategoryId, UnitId), BTreeSet<ResearcherId>> = BTreeMap::new();
    for t in primary_records(top) {
        let Some(r) = corpus.researcher(&t.researcher) else {
            continue;
        };
        groups
            .entry((
                t.specialization.category.clone(),
                cfg.unit_level.apply(&r.unit),
            ))
            .or_default()
            .insert(t.researcher.clone());
    }
    groups
        .into_iter()
        .filter(|(_, members)| members.len() >= cfg.min_cluster_size)
        .map(|((category, unit), members)| TscCluster {
            unit,
            category,
            members,
            fss: 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCluster {
    pub cluster: TscCluster,
    /// 1-based position within the category.
    pub rank: usize,
    pub is_coe: bool,
}

/// Ranks one category's clusters by FSS (then member count, then unit) and
/// flags the first `top_k` as centers of excellence.
pub fn select_coe(
    category: &CategoryId,
    clusters: Vec<TscCluster>,
    cfg: &PipelineConfig,
) -> Vec<RankedCluster> {
    debug_assert!(clusters.iter().all(|c| &c.category == category));
    let mut clusters = clusters;
    clusters.sort_by(|a, b| {
        b.fss
            .total_cmp(&a.fss)
            .then_with(|| b.members.len().cmp(&a.members.len()))
            .then_with(|| a.unit.cmp(&b.unit))
    });
    clusters
        .into_iter()
        .enumerate()
        .map(|(i, cluster)| RankedCluster {
            cluster,
            rank: i + 1,
            is_coe: i < cfg.top_k,
        })
        .collect()
}

/// Everything the pipeline produces.
#[derive(Debug, Clone)]
pub struct ExcellenceMap {
    pub config: PipelineConfig,
    pub authorships: AuthorshipTable,
    pub weights: WeightTable,
    pub scores: ScoreTable,
    /// Ordered by (researcher, macro-area).
    pub top_scientists: Vec<TopScientist>,
    /// Ranked clusters per category; only categories with clusters appear.
    pub rankings: BTreeMap<CategoryId, Vec<RankedCluster>>,
}

impl ExcellenceMap {
    pub fn clusters(&self) -> impl Iterator<Item = &RankedCluster> {
        self.rankings.values().flatten()
    }

    pub fn centers(&self) -> impl Iterator<Item = &RankedCluster> {
        self.clusters().filter(|c| c.is_coe)
    }

    pub fn tsc_count(&self) -> usize {
        self.clusters().count()
    }

    pub fn coe_count(&self) -> usize {
        self.centers().count()
    }

    /// Writes `tsc.csv`.
    pub fn write_tsc_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "category_id",
            "org_id",
            "site_id",
            "rank",
            "fss",
            "is_coe",
            "member_ids",
        ])?;
        for (category, ranked) in &self.rankings {
            for rc in ranked {
                let members: Vec<&str> =
                    rc.cluster.members.iter().map(ResearcherId::as_str).collect();
                w.write_record([
                    category.as_str(),
                    rc.cluster.unit.org.as_str(),
                    rc.cluster.unit.site_str(),
                    &rc.rank.to_string(),
                    &rc.cluster.fss.to_string(),
                    if rc.is_coe { "true" } else { "false" },
                    &members.join(";"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `top_scientists.csv`.
    pub fn write_top_scientists_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["researcher_id", "macro_area_id", "ss", "specialization_category"])?;
        for t in &self.top_scientists {
            w.write_record([
                t.researcher.as_str(),
                t.macro_area.as_str(),
                &t.ss.to_string(),
                t.specialization.category.as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the audit files (`tsc.csv`, `top_scientists.csv`, `scores.csv`,
    /// `excluded_pubs.csv`, `unresolved_mentions.csv`) into `dir`.
    pub fn write_audit_files(&self, corpus: &Corpus, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut emit = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> csv::Result<()>| {
            let mut buf = Vec::new();
            f(&mut buf).map_err(std::io::Error::other)?;
            let path = dir.join(name);
            std::fs::write(&path, buf)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            written.push(path);
            Ok::<_, std::io::Error>(())
        };
        emit("tsc.csv", &|b| self.write_tsc_csv(b))?;
        emit("top_scientists.csv", &|b| self.write_top_scientists_csv(b))?;
        emit("scores.csv", &|b| self.scores.write_csv(b))?;
        emit("excluded_pubs.csv", &|b| self.weights.write_excluded_csv(corpus, b))?;
        emit("unresolved_mentions.csv", &|b| {
            self.authorships.write_unresolved_csv(corpus, b)
        })?;
        Ok(written)
    }
}

/// Runs the whole pipeline with default (parallel) execution.
pub fn run_pipeline(corpus: &Corpus, cfg: &PipelineConfig) -> Result<ExcellenceMap, PipelineError> {
    run_pipeline_with(corpus, cfg, Execution::default())
}

pub fn run_pipeline_with(
    corpus: &Corpus,
    cfg: &PipelineConfig,
    exec: Execution,
) -> Result<ExcellenceMap, PipelineError> {
    cfg.validate()?;
    if cfg.window != corpus.window() {
        return Err(ConfigError::WindowMismatch {
            config: cfg.window,
            corpus: corpus.window(),
        }
        .into());
    }

    let authorships = resolve_mentions_with(corpus, exec);
    let weights = WeightTable::compute(corpus, exec)?;
    let scores = ScoreTable::compute(&authorships, &weights, exec);

    let macro_areas: Vec<&MacroAreaId> = corpus.macro_areas().keys().collect();
    let per_area = map_ordered(&macro_areas, exec, |m| {
        top_scientists(m, &scores, cfg)
            .into_iter()
            .map(|r| {
                let specialization =
                    specialization_category(&r, m, &authorships, corpus, &weights)?;
                let ss = scores.get(&r, m).unwrap_or(0.0);
                Ok(TopScientist {
                    researcher: r,
                    macro_area: (*m).clone(),
                    ss,
                    specialization,
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()
    });
    let mut top = Vec::new();
    for records in per_area {
        top.extend(records?);
    }
    top.sort_by(|a, b| {
        (&a.researcher, &a.macro_area).cmp(&(&b.researcher, &b.macro_area))
    });

    let clusters = cluster_top_scientists(&top, cfg, corpus);
    let scored = map_ordered(&clusters, exec, |c| {
        cluster_fss(
            &c.members,
            &c.category,
            cfg.fss_scope,
            &authorships,
            corpus,
            &weights,
        )
    });
    let mut by_category: BTreeMap<CategoryId, Vec<TscCluster>> = BTreeMap::new();
    for (mut cluster, fss) in clusters.into_iter().zip(scored) {
        cluster.fss = fss?;
        by_category
            .entry(cluster.category.clone())
            .or_default()
            .push(cluster);
    }
    let rankings = by_category
        .into_iter()
        .map(|(category, clusters)| {
            let ranked = select_coe(&category, clusters, cfg);
            (category, ranked)
        })
        .collect();

    Ok(ExcellenceMap {
        config: cfg.clone(),
        authorships,
        weights,
        scores,
        top_scientists: top,
        rankings,
    })
}
