//! Aggregate views over an [`ExcellenceMap`]: distributions of clusters and
//! centers by macro-area, category, organization, institution type, region
//! and geographic macro-area, region × macro-area cross tables and Pearson
//! correlation.

mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{Corpus, GeoMacroArea, InstType, UnitId};
use crate::excellence::{ExcellenceMap, RankedCluster};

pub use report::{emit_reports, ReportError, ReportFormat, Table, REPORT_FILES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    MacroArea,
    Category,
    Organization,
    InstType,
    Region,
    GeoMacroArea,
}

impl Dimension {
    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::MacroArea => "macro_area",
            Dimension::Category => "category",
            Dimension::Organization => "organization",
            Dimension::InstType => "inst_type",
            Dimension::Region => "region",
            Dimension::GeoMacroArea => "geo_macro_area",
        }
    }

    /// Whether distributions list every known key, including empty ones.
    fn lists_empty_keys(self) -> bool {
        !matches!(self, Dimension::Category | Dimension::Organization)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which clusters are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    /// Every top scientist cluster.
    Tsc,
    /// Only centers of excellence.
    Coe,
}

impl Subject {
    pub fn as_str(self) -> &'static str {
        match self {
            Subject::Tsc => "tsc",
            Subject::Coe => "coe",
        }
    }

    fn includes(self, cluster: &RankedCluster) -> bool {
        match self {
            Subject::Tsc => true,
            Subject::Coe => cluster.is_coe,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub key: String,
    pub label: String,
    pub count: usize,
    /// Share of the total in percent; `None` when the total is zero.
    pub percentage: Option<f64>,
    pub cumulative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub dimension: Dimension,
    pub subject: Subject,
    pub total: usize,
    /// Sorted by count (descending), then key.
    pub rows: Vec<DistributionRow>,
}

impl DistributionTable {
    pub fn row(&self, key: &str) -> Option<&DistributionRow> {
        self.rows.iter().find(|r| r.key == key)
    }
}

/// Percentage of `part` in `whole`, `None` for an empty whole.
pub fn percentage(part: usize, whole: usize) -> Option<f64> {
    (whole > 0).then(|| part as f64 * 100.0 / whole as f64)
}

/// Every key the corpus knows for `dimension`, with a display label.
pub fn dimension_keys(corpus: &Corpus, dimension: Dimension) -> Vec<(String, String)> {
    let mut keys: BTreeMap<String, String> = BTreeMap::new();
    match dimension {
        Dimension::MacroArea => {
            for m in corpus.macro_areas().keys() {
                keys.insert(m.to_string(), m.to_string());
            }
        }
        Dimension::Category => {
            for c in corpus.categories().values() {
                keys.insert(c.id.to_string(), c.name.clone());
            }
        }
        Dimension::Organization => {
            for o in corpus.organizations().values() {
                keys.entry(o.unit.org.to_string()).or_insert_with(|| org_label(corpus, &o.unit));
            }
        }
        Dimension::InstType => {
            for t in InstType::ALL {
                keys.insert(t.as_str().into(), t.as_str().into());
            }
        }
        Dimension::Region => {
            for o in corpus.organizations().values() {
                keys.insert(o.region.to_string(), o.region.to_string());
            }
        }
        Dimension::GeoMacroArea => {
            for g in GeoMacroArea::ALL {
                keys.insert(g.as_str().into(), g.as_str().into());
            }
        }
    }
    keys.into_iter().collect()
}

fn org_label(corpus: &Corpus, unit: &UnitId) -> String {
    corpus
        .organization(&unit.rollup())
        .map(|o| o.name.clone())
        .unwrap_or_else(|| unit.org.to_string())
}

/// Key of `cluster` along `dimension`. Clusters formed at site level are
/// attributed to their organization for the organization dimension.
pub fn cluster_key(cluster: &RankedCluster, corpus: &Corpus, dimension: Dimension) -> String {
    let c = &cluster.cluster;
    let org = || corpus.organization(&c.unit);
    match dimension {
        Dimension::MacroArea => corpus
            .category(&c.category)
            .map(|cat| cat.macro_area.to_string())
            .unwrap_or_default(),
        Dimension::Category => c.category.to_string(),
        Dimension::Organization => c.unit.org.to_string(),
        Dimension::InstType => org().map(|o| o.inst_type.as_str().to_string()).unwrap_or_default(),
        Dimension::Region => org().map(|o| o.region.to_string()).unwrap_or_default(),
        Dimension::GeoMacroArea => org()
            .map(|o| o.geo_macro_area.as_str().to_string())
            .unwrap_or_default(),
    }
}

fn count_by(
    map: &ExcellenceMap,
    corpus: &Corpus,
    dimension: Dimension,
    subject: Subject,
) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for c in map.clusters().filter(|c| subject.includes(c)) {
        *counts.entry(cluster_key(c, corpus, dimension)).or_insert(0) += 1;
    }
    counts
}

/// Counts of clusters (or centers) along one dimension with percentage and
/// cumulative percentage columns.
pub fn distribution(
    map: &ExcellenceMap,
    corpus: &Corpus,
    dimension: Dimension,
    subject: Subject,
) -> DistributionTable {
    let mut counts = count_by(map, corpus, dimension, subject);
    let labels: BTreeMap<String, String> = dimension_keys(corpus, dimension).into_iter().collect();
    if dimension.lists_empty_keys() {
        for k in labels.keys() {
            counts.entry(k.clone()).or_insert(0);
        }
    }
    let total: usize = counts.values().sum();
    let mut rows: Vec<(String, usize)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut running = 0;
    let rows = rows
        .into_iter()
        .map(|(key, count)| {
            running += count;
            DistributionRow {
                label: labels.get(&key).cloned().unwrap_or_else(|| key.clone()),
                key,
                count,
                percentage: percentage(count, total),
                cumulative: percentage(running, total),
            }
        })
        .collect();
    DistributionTable {
        dimension,
        subject,
        total,
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Normalize {
    /// Each cell as a share of its column total.
    ByColumn,
    /// Each cell as a share of its row total.
    ByRow,
    /// Raw counts.
    #[default]
    None,
}

impl Normalize {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalize::ByColumn => "by_column",
            Normalize::ByRow => "by_row",
            Normalize::None => "none",
        }
    }
}

impl FromStr for Normalize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "by_column" => Ok(Normalize::ByColumn),
            "by_row" => Ok(Normalize::ByRow),
            "none" => Ok(Normalize::None),
            other => Err(format!("invalid normalization {other:?}")),
        }
    }
}

/// A two-way table of center counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTable {
    pub row_dim: Dimension,
    pub col_dim: Dimension,
    pub normalize: Normalize,
    pub row_keys: Vec<String>,
    pub col_keys: Vec<String>,
    /// `counts[row][col]`.
    pub counts: Vec<Vec<usize>>,
}

impl CrossTable {
    pub fn row_total(&self, row: usize) -> usize {
        self.counts[row].iter().sum()
    }

    pub fn col_total(&self, col: usize) -> usize {
        self.counts.iter().map(|r| r[col]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Normalized cell value; `None` where the normalizing total is zero
    /// (rendered as a dash).
    pub fn cell(&self, row: usize, col: usize) -> Option<f64> {
        let n = self.counts[row][col];
        match self.normalize {
            Normalize::ByColumn => percentage(n, self.col_total(col)),
            Normalize::ByRow => percentage(n, self.row_total(row)),
            Normalize::None => Some(n as f64),
        }
    }
}

/// Cross-tabulates centers of excellence by two dimensions.
pub fn cross_distribution(
    map: &ExcellenceMap,
    corpus: &Corpus,
    row_dim: Dimension,
    col_dim: Dimension,
    normalize: Normalize,
) -> CrossTable {
    let row_keys: Vec<String> = dimension_keys(corpus, row_dim).into_iter().map(|k| k.0).collect();
    let col_keys: Vec<String> = dimension_keys(corpus, col_dim).into_iter().map(|k| k.0).collect();
    let mut counts = vec![vec![0; col_keys.len()]; row_keys.len()];
    for c in map.centers() {
        let r = cluster_key(c, corpus, row_dim);
        let k = cluster_key(c, corpus, col_dim);
        if let (Ok(i), Ok(j)) = (row_keys.binary_search(&r), col_keys.binary_search(&k)) {
            counts[i][j] += 1;
        }
    }
    CrossTable {
        row_dim,
        col_dim,
        normalize,
        row_keys,
        col_keys,
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorrelationError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least two points are needed, got {0}")]
    TooFewPoints(usize),
    #[error("correlation is undefined for a constant vector")]
    Undefined,
}

/// Pearson product-moment correlation of `x` and `y`.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(CorrelationError::TooFewPoints(n));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::Undefined);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
pub(crate) mod testmap {
    use std::collections::BTreeSet;

    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{CategoryId, Corpus, CorpusData, Organization, YearRange};
    use crate::excellence::{PipelineConfig, TscCluster};
    use crate::identity::AuthorshipTable;
    use crate::par::Execution;
    use crate::scoring::{ScoreTable, WeightTable};

    pub fn located(id: &str, region: &str, geo: GeoMacroArea, inst: InstType) -> Organization {
        let mut o = org(id, None, &format!("Institute {id}"));
        o.region = region.into();
        o.geo_macro_area = geo;
        o.inst_type = inst;
        o
    }

    /// Corpus with categories A1, A2 (macro-area MA) and B1 (MB) and the
    /// given organizations.
    pub fn corpus(orgs: Vec<Organization>) -> Corpus {
        let mut data: CorpusData = minimal();
        data.categories = vec![category("A1", "MA"), category("A2", "MA"), category("B1", "MB")];
        data.journals = vec![journal("J1", &["A1"])];
        data.organizations = orgs;
        data.researchers.clear();
        data.publications.clear();
        Corpus::from_data(data, YearRange::default()).unwrap()
    }

    /// Map holding one cluster per `(category, org, is_coe)` triple.
    pub fn map(corpus: &Corpus, clusters: &[(&str, &str, bool)]) -> ExcellenceMap {
        let mut rankings: BTreeMap<CategoryId, Vec<RankedCluster>> = BTreeMap::new();
        for (i, (cat, org, coe)) in clusters.iter().enumerate() {
            let ranked = rankings.entry((*cat).into()).or_default();
            ranked.push(RankedCluster {
                cluster: TscCluster {
                    unit: UnitId::org_only(*org),
                    category: (*cat).into(),
                    members: BTreeSet::from([format!("X{i}").into()]),
                    fss: 0.0,
                },
                rank: ranked.len() + 1,
                is_coe: *coe,
            });
        }
        ExcellenceMap {
            config: PipelineConfig::default(),
            authorships: AuthorshipTable::from_parts(Vec::new(), Vec::new()),
            weights: WeightTable::compute(corpus, Execution::Sequential).unwrap(),
            scores: ScoreTable::from_entries([]),
            top_scientists: Vec::new(),
            rankings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testmap::*;
    use super::*;
    use proptest::prelude::*;

    fn geo_fixture(split: [usize; 4]) -> (Corpus, ExcellenceMap) {
        let orgs = GeoMacroArea::ALL
            .iter()
            .enumerate()
            .map(|(i, g)| located(&format!("O{i}"), &format!("r{i}"), *g, InstType::University))
            .collect();
        let c = corpus(orgs);
        let mut clusters = Vec::new();
        for (i, n) in split.iter().enumerate() {
            for _ in 0..*n {
                clusters.push(("A1", ["O0", "O1", "O2", "O3"][i], true));
            }
        }
        let m = map(&c, &clusters);
        (c, m)
    }

    fn pct1(x: Option<f64>) -> String {
        format!("{:.1}", x.unwrap())
    }

    #[test]
    fn geo_distribution_percentages() {
        let (c, m) = geo_fixture([44, 38, 52, 23]);
        let d = distribution(&m, &c, Dimension::GeoMacroArea, Subject::Coe);
        assert_eq!(d.total, 157);
        let got: Vec<String> = ["north_west", "north_east", "center", "south"]
            .iter()
            .map(|k| pct1(d.row(k).unwrap().percentage))
            .collect();
        assert_eq!(got, ["28.0", "24.2", "33.1", "14.6"]);
        assert_eq!(d.rows[0].key, "center");
        assert_eq!(pct1(d.rows.last().unwrap().cumulative), "100.0");
    }

    #[test]
    fn leading_organization_share() {
        let orgs = (0..10)
            .map(|i| located(&format!("O{i}"), "lazio", GeoMacroArea::Center, InstType::University))
            .collect();
        let c = corpus(orgs);
        let mut clusters = vec![("A1", "O0", true); 19];
        // 138 more centers spread over the other organizations
        for i in 0..138 {
            clusters.push(("A1", ["O1", "O2", "O3", "O4", "O5", "O6", "O7", "O8", "O9"][i % 9], true));
        }
        let m = map(&c, &clusters);
        let d = distribution(&m, &c, Dimension::Organization, Subject::Coe);
        assert_eq!(d.total, 157);
        assert_eq!(d.rows[0].key, "O0");
        assert_eq!(pct1(d.rows[0].percentage), "12.1");
        assert_eq!(pct1(d.rows[0].cumulative), "12.1");
        assert_eq!(d.rows[0].label, "Institute O0");
    }

    #[test]
    fn singleton_distribution() {
        let c = corpus(vec![located("O0", "r", GeoMacroArea::South, InstType::ResearchHospital)]);
        let m = map(&c, &[("A1", "O0", true)]);
        let d = distribution(&m, &c, Dimension::Category, Subject::Tsc);
        assert_eq!(d.rows.len(), 1);
        assert_eq!(d.rows[0].percentage, Some(100.0));
        assert_eq!(d.rows[0].cumulative, Some(100.0));

        // enumerated dimensions keep empty rows
        let d = distribution(&m, &c, Dimension::InstType, Subject::Tsc);
        assert_eq!(d.rows.len(), 3);
        assert_eq!(d.rows[0].key, "research_hospital");
        assert_eq!(d.rows[1].count, 0);
    }

    #[test]
    fn empty_map_has_no_percentages() {
        let c = corpus(vec![located("O0", "r", GeoMacroArea::South, InstType::University)]);
        let m = map(&c, &[]);
        let d = distribution(&m, &c, Dimension::GeoMacroArea, Subject::Coe);
        assert_eq!(d.total, 0);
        assert!(d.rows.iter().all(|r| r.percentage.is_none()));
        assert!(distribution(&m, &c, Dimension::Organization, Subject::Coe).rows.is_empty());
    }

    #[test]
    fn region_row_share() {
        // 29 centers in one region, 7 of them in the first macro-area
        let c = corpus(vec![
            located("O0", "lombardy", GeoMacroArea::NorthWest, InstType::University),
            located("O1", "lazio", GeoMacroArea::Center, InstType::University),
        ]);
        let mut clusters = vec![("A1", "O0", true); 7];
        clusters.extend(vec![("B1", "O0", true); 22]);
        clusters.extend(vec![("A2", "O1", true); 5]);
        let m = map(&c, &clusters);
        let t = cross_distribution(&m, &c, Dimension::Region, Dimension::MacroArea, Normalize::ByRow);
        let row = t.row_keys.iter().position(|k| k == "lombardy").unwrap();
        let col = t.col_keys.iter().position(|k| k == "MA").unwrap();
        assert_eq!(t.row_total(row), 29);
        assert_eq!(pct1(t.cell(row, col)), "24.1");
    }

    #[test]
    fn empty_rows_and_columns_are_undefined() {
        let c = corpus(vec![
            located("O0", "a", GeoMacroArea::NorthWest, InstType::University),
            located("O1", "b", GeoMacroArea::South, InstType::University),
        ]);
        let m = map(&c, &[("A1", "O0", true)]);
        let by_row = cross_distribution(&m, &c, Dimension::Region, Dimension::MacroArea, Normalize::ByRow);
        assert_eq!(by_row.cell(1, 0), None);
        let by_col =
            cross_distribution(&m, &c, Dimension::Region, Dimension::MacroArea, Normalize::ByColumn);
        assert_eq!(by_col.cell(0, 1), None);
        assert_eq!(by_col.cell(1, 0), Some(0.0));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0];
        assert!((pearson_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        // sxy = 5, sxx = 2, syy = 38/3
        let expected = 5.0 / (2.0f64 * 38.0 / 3.0).sqrt();
        let r = pearson_correlation(&x, &[2.0, 4.0, 7.0]).unwrap();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.9934).abs() < 1e-3);
        assert_eq!(
            pearson_correlation(&x, &[5.0, 5.0, 5.0]),
            Err(CorrelationError::Undefined)
        );
        assert_eq!(pearson_correlation(&[1.0], &[1.0]), Err(CorrelationError::TooFewPoints(1)));
        assert!(pearson_correlation(&x, &[1.0]).is_err());
    }

    fn clusters_strategy() -> impl Strategy<Value = Vec<(usize, usize, bool)>> {
        prop::collection::vec((0usize..3, 0usize..4, any::<bool>()), 0..40)
    }

    proptest! {
        #[test]
        fn counts_are_conserved(spec in clusters_strategy()) {
            let orgs = (0..4)
                .map(|i| located(&format!("O{i}"), &format!("r{}", i / 2), GeoMacroArea::ALL[i / 2], InstType::ALL[i % 3]))
                .collect();
            let c = corpus(orgs);
            let cats = ["A1", "A2", "B1"];
            let owned: Vec<(&str, String, bool)> =
                spec.iter().map(|(cat, o, coe)| (cats[*cat], format!("O{o}"), *coe)).collect();
            let refs: Vec<(&str, &str, bool)> = owned.iter().map(|(a, b, c)| (*a, b.as_str(), *c)).collect();
            let m = map(&c, &refs);
            let n_coe = spec.iter().filter(|s| s.2).count();
            for dim in [Dimension::MacroArea, Dimension::Category, Dimension::Organization,
                        Dimension::InstType, Dimension::Region, Dimension::GeoMacroArea] {
                let d = distribution(&m, &c, dim, Subject::Tsc);
                prop_assert_eq!(d.rows.iter().map(|r| r.count).sum::<usize>(), spec.len());
                let d = distribution(&m, &c, dim, Subject::Coe);
                prop_assert_eq!(d.rows.iter().map(|r| r.count).sum::<usize>(), n_coe);
                if n_coe > 0 {
                    let pct: f64 = d.rows.iter().filter_map(|r| r.percentage).sum();
                    prop_assert!((pct - 100.0).abs() < 1e-9);
                    let cum: Vec<f64> = d.rows.iter().filter_map(|r| r.cumulative).collect();
                    prop_assert!(cum.windows(2).all(|w| w[0] <= w[1]));
                    prop_assert!((cum.last().unwrap() - 100.0).abs() < 1e-9);
                }
            }
            let t = cross_distribution(&m, &c, Dimension::Region, Dimension::MacroArea, Normalize::None);
            let regions = distribution(&m, &c, Dimension::Region, Subject::Coe);
            for (i, k) in t.row_keys.iter().enumerate() {
                prop_assert_eq!(t.row_total(i), regions.row(k).unwrap().count);
            }
            let areas = distribution(&m, &c, Dimension::MacroArea, Subject::Coe);
            for (j, k) in t.col_keys.iter().enumerate() {
                prop_assert_eq!(t.col_total(j), areas.row(k).unwrap().count);
            }
            // raw mode equals a direct recount
            for (i, r) in t.row_keys.iter().enumerate() {
                for (j, col) in t.col_keys.iter().enumerate() {
                    let recount = m.centers().filter(|x| {
                        cluster_key(x, &c, Dimension::Region) == *r
                            && cluster_key(x, &c, Dimension::MacroArea) == *col
                    }).count();
                    prop_assert_eq!(t.cell(i, j), Some(recount as f64));
                }
            }
            let by_col = cross_distribution(&m, &c, Dimension::Region, Dimension::MacroArea, Normalize::ByColumn);
            for j in 0..by_col.col_keys.len() {
                if by_col.col_total(j) > 0 {
                    let s: f64 = (0..by_col.row_keys.len()).filter_map(|i| by_col.cell(i, j)).sum();
                    prop_assert!((s - 100.0).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn pearson_symmetry_and_affine_invariance(
            pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            a in 0.1f64..10.0, b in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let r = pearson_correlation(&x, &y).unwrap();
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((r - pearson_correlation(&y, &x).unwrap()).abs() < 1e-12);
            let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((r - pearson_correlation(&xt, &y).unwrap()).abs() < 1e-12);
        }
    }
}
