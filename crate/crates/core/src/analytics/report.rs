use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::*;
use crate::corpus::{Corpus, RegionId};
use crate::excellence::ExcellenceMap;
use crate::manifest::{RunManifest, MANIFEST_FILE};

/// Basenames of the report files, in emission order.
pub const REPORT_FILES: [&str; 10] = [
    "dist_macro_area_tsc",
    "dist_category_tsc",
    "dist_organization_tsc",
    "dist_organization_coe",
    "dist_inst_type_tsc",
    "dist_inst_type_coe",
    "cross_macroarea_geo_coe",
    "dist_region_tsc_coe",
    "cross_region_macroarea_by_column",
    "cross_region_macroarea_by_row",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum ReportFormat {
    #[default]
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "markdown",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("invalid format {other:?}, expected csv|markdown")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A rendered report: a header and rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to memory cannot fail
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_markdown(&self) -> String {
        let line = |cells: &[String]| {
            let escaped: Vec<String> = cells.iter().map(|c| c.replace('|', "\\|")).collect();
            format!("| {} |\n", escaped.join(" | "))
        };
        let mut out = line(&self.headers);
        out.push('|');
        for _ in &self.headers {
            out.push_str(" --- |");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }
}

fn pct(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
}

fn distribution_table(name: &str, d: &DistributionTable) -> Table {
    let mut t = Table::new(name, &[d.dimension.as_str(), "label", "count", "pct", "cumulative_pct"]);
    for r in &d.rows {
        t.rows.push(vec![
            r.key.clone(),
            r.label.clone(),
            r.count.to_string(),
            pct(r.percentage),
            pct(r.cumulative),
        ]);
    }
    t
}

/// Publications, authors and clusters per macro-area.
fn macro_area_summary(map: &ExcellenceMap, corpus: &Corpus) -> Table {
    let mut t = Table::new(
        "dist_macro_area_tsc",
        &[
            "macro_area",
            "categories",
            "publications",
            "publications_pct",
            "authors",
            "authors_pct",
            "categories_with_tsc",
            "tsc",
            "tsc_pct",
            "cumulative_pct",
        ],
    );
    let d = distribution(map, corpus, Dimension::MacroArea, Subject::Tsc);
    let mut pubs: BTreeMap<&str, usize> = BTreeMap::new();
    for p in corpus.publications().keys() {
        if let Some(w) = map.weights.macro_area_weights(p) {
            for m in w.keys() {
                *pubs.entry(m.as_str()).or_default() += 1;
            }
        }
    }
    let mut authors: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, m, _) in map.scores.iter() {
        *authors.entry(m.as_str()).or_default() += 1;
    }
    let mut with_tsc: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for c in map.clusters() {
        with_tsc
            .entry(cluster_key(c, corpus, Dimension::MacroArea))
            .or_default()
            .insert(c.cluster.category.as_str());
    }
    let pub_total: usize = pubs.values().sum();
    let author_total: usize = authors.values().sum();
    let mut cat_total = 0;
    let mut with_total = 0;
    for r in &d.rows {
        let cats = corpus
            .macro_areas()
            .get(r.key.as_str())
            .map_or(0, |s| s.len());
        let p = pubs.get(r.key.as_str()).copied().unwrap_or(0);
        let a = authors.get(r.key.as_str()).copied().unwrap_or(0);
        let w = with_tsc.get(&r.key).map_or(0, |s| s.len());
        cat_total += cats;
        with_total += w;
        t.rows.push(vec![
            r.key.clone(),
            cats.to_string(),
            p.to_string(),
            pct(percentage(p, pub_total)),
            a.to_string(),
            pct(percentage(a, author_total)),
            w.to_string(),
            r.count.to_string(),
            pct(r.percentage),
            pct(r.cumulative),
        ]);
    }
    t.rows.push(vec![
        "Total".into(),
        cat_total.to_string(),
        pub_total.to_string(),
        pct(percentage(pub_total, pub_total)),
        author_total.to_string(),
        pct(percentage(author_total, author_total)),
        with_total.to_string(),
        d.total.to_string(),
        pct(percentage(d.total, d.total)),
        String::new(),
    ]);
    t
}

/// Centers by scientific macro-area (rows) and geographic macro-area, with
/// row shares and each macro-area's share of all centers.
fn macro_area_geo(map: &ExcellenceMap, corpus: &Corpus) -> Table {
    let x = cross_distribution(map, corpus, Dimension::MacroArea, Dimension::GeoMacroArea, Normalize::ByRow);
    let geo: Vec<String> = GeoMacroArea::ALL.iter().map(|g| g.as_str().to_string()).collect();
    let cols: Vec<usize> = geo
        .iter()
        .map(|g| x.col_keys.iter().position(|k| k == g).expect("every geo key listed"))
        .collect();
    let mut headers = vec!["macro_area".to_string()];
    for g in &geo {
        headers.push(g.clone());
        headers.push(format!("{g}_pct"));
    }
    headers.push("total".into());
    headers.push("total_pct".into());
    let mut t = Table {
        name: "cross_macroarea_geo_coe".into(),
        headers,
        rows: Vec::new(),
    };
    let total = x.total();
    for (i, key) in x.row_keys.iter().enumerate() {
        let mut row = vec![key.clone()];
        for &j in &cols {
            row.push(x.counts[i][j].to_string());
            row.push(pct(x.cell(i, j)));
        }
        row.push(x.row_total(i).to_string());
        row.push(pct(percentage(x.row_total(i), total)));
        t.rows.push(row);
    }
    let mut row = vec!["Total".to_string()];
    for &j in &cols {
        row.push(x.col_total(j).to_string());
        row.push(pct(percentage(x.col_total(j), total)));
    }
    row.push(total.to_string());
    row.push(pct(percentage(total, total)));
    t.rows.push(row);
    t
}

/// Clusters and centers per region.
fn region_table(map: &ExcellenceMap, corpus: &Corpus) -> Table {
    let mut t = Table::new(
        "dist_region_tsc_coe",
        &["region", "geo_macro_area", "tsc", "tsc_pct", "coe", "coe_pct"],
    );
    let tsc = distribution(map, corpus, Dimension::Region, Subject::Tsc);
    let coe = distribution(map, corpus, Dimension::Region, Subject::Coe);
    let mut geo: BTreeMap<&RegionId, &str> = BTreeMap::new();
    for o in corpus.organizations().values() {
        geo.entry(&o.region).or_insert(o.geo_macro_area.as_str());
    }
    let mut rows: Vec<(&DistributionRow, &DistributionRow)> = tsc
        .rows
        .iter()
        .map(|r| (r, coe.row(&r.key).expect("same key set")))
        .collect();
    rows.sort_by(|a, b| {
        b.0.count
            .cmp(&a.0.count)
            .then_with(|| b.1.count.cmp(&a.1.count))
            .then_with(|| a.0.key.cmp(&b.0.key))
    });
    for (a, b) in rows {
        t.rows.push(vec![
            a.key.clone(),
            geo.get(&RegionId::from(a.key.as_str()))
                .copied()
                .unwrap_or_default()
                .to_string(),
            a.count.to_string(),
            pct(a.percentage),
            b.count.to_string(),
            pct(b.percentage),
        ]);
    }
    t.rows.push(vec![
        "Total".into(),
        String::new(),
        tsc.total.to_string(),
        pct(percentage(tsc.total, tsc.total)),
        coe.total.to_string(),
        pct(percentage(coe.total, coe.total)),
    ]);
    t
}

fn region_macro_area(map: &ExcellenceMap, corpus: &Corpus, normalize: Normalize) -> Table {
    let x = cross_distribution(map, corpus, Dimension::Region, Dimension::MacroArea, normalize);
    let mut headers = vec!["region".to_string()];
    headers.extend(x.col_keys.iter().cloned());
    if normalize == Normalize::ByRow {
        headers.push("total".into());
    }
    let mut t = Table {
        name: format!("cross_region_macroarea_{}", normalize.as_str()),
        headers,
        rows: Vec::new(),
    };
    for (i, key) in x.row_keys.iter().enumerate() {
        let mut row = vec![key.clone()];
        row.extend((0..x.col_keys.len()).map(|j| pct(x.cell(i, j))));
        if normalize == Normalize::ByRow {
            row.push(x.row_total(i).to_string());
        }
        t.rows.push(row);
    }
    let total = x.total();
    let mut row = vec!["Total".to_string()];
    for j in 0..x.col_keys.len() {
        let share = match normalize {
            Normalize::ByColumn => percentage(x.col_total(j), x.col_total(j)),
            _ => percentage(x.col_total(j), total),
        };
        row.push(pct(share));
    }
    if normalize == Normalize::ByRow {
        row.push(total.to_string());
    }
    t.rows.push(row);
    t
}

/// Builds every report table, in [`REPORT_FILES`] order.
pub fn build_reports(map: &ExcellenceMap, corpus: &Corpus) -> Vec<Table> {
    let dist = |dim, subject| {
        let d = distribution(map, corpus, dim, subject);
        distribution_table(&format!("dist_{}_{}", dim.as_str(), subject), &d)
    };
    vec![
        macro_area_summary(map, corpus),
        dist(Dimension::Category, Subject::Tsc),
        dist(Dimension::Organization, Subject::Tsc),
        dist(Dimension::Organization, Subject::Coe),
        dist(Dimension::InstType, Subject::Tsc),
        dist(Dimension::InstType, Subject::Coe),
        macro_area_geo(map, corpus),
        region_table(map, corpus),
        region_macro_area(map, corpus, Normalize::ByColumn),
        region_macro_area(map, corpus, Normalize::ByRow),
    ]
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, ReportError> {
    std::fs::write(&path, contents).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the report tables and `manifest` into `out_dir` and returns the
/// written paths (reports first, manifest last).
pub fn emit_reports(
    map: &ExcellenceMap,
    corpus: &Corpus,
    out_dir: &Path,
    format: ReportFormat,
    manifest: &RunManifest,
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for table in build_reports(map, corpus) {
        let path = out_dir.join(format!("{}.{}", table.name, format.extension()));
        written.push(write(path, &table.render(format))?);
    }
    written.push(write(out_dir.join(MANIFEST_FILE), &manifest.render())?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::super::testmap::*;
    use super::*;

    fn fixture() -> (Corpus, ExcellenceMap) {
        let c = corpus(vec![
            located("O0", "lombardy", GeoMacroArea::NorthWest, InstType::University),
            located("O1", "lazio", GeoMacroArea::Center, InstType::PublicResearchLab),
            located("O2", "aosta", GeoMacroArea::NorthWest, InstType::University),
        ]);
        let m = map(
            &c,
            &[
                ("A1", "O0", true),
                ("A1", "O1", true),
                ("A1", "O1", false),
                ("B1", "O0", true),
                ("A2", "O1", false),
            ],
        );
        (c, m)
    }

    #[test]
    fn ten_reports_plus_manifest() {
        let (c, m) = fixture();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_reports(&m, &c, dir.path(), ReportFormat::Csv, &RunManifest::new()).unwrap();
        assert_eq!(files.len(), 11);
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        for (name, expected) in names.iter().zip(REPORT_FILES) {
            assert_eq!(name, &format!("{expected}.csv"));
        }
        assert_eq!(names[10], MANIFEST_FILE);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let (c, m) = fixture();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let manifest = RunManifest::new();
        for dir in [a.path(), b.path()] {
            emit_reports(&m, &c, dir, ReportFormat::Csv, &manifest).unwrap();
        }
        for name in REPORT_FILES {
            let f = format!("{name}.csv");
            assert_eq!(
                std::fs::read(a.path().join(&f)).unwrap(),
                std::fs::read(b.path().join(&f)).unwrap()
            );
        }
    }

    #[test]
    fn markdown_rows_match_csv_rows() {
        let (c, m) = fixture();
        for t in build_reports(&m, &c) {
            let csv_rows = csv::Reader::from_reader(t.to_csv().as_bytes())
                .records()
                .count();
            let md = t.to_markdown();
            let md_rows = md.lines().filter(|l| l.starts_with('|')).count() - 2;
            assert_eq!(csv_rows, md_rows, "{}", t.name);
        }
    }

    #[test]
    fn cross_tables_render_dashes() {
        let (c, m) = fixture();
        let reports = build_reports(&m, &c);
        let by_row = reports.iter().find(|t| t.name.ends_with("by_row")).unwrap();
        let aosta = by_row.rows.iter().find(|r| r[0] == "aosta").unwrap();
        assert_eq!(aosta[1..3], ["-".to_string(), "-".to_string()]);
        let by_col = reports.iter().find(|t| t.name.ends_with("by_column")).unwrap();
        let aosta = by_col.rows.iter().find(|r| r[0] == "aosta").unwrap();
        assert_eq!(aosta[1..3], ["0.0".to_string(), "0.0".to_string()]);
        assert_eq!(by_col.rows.last().unwrap()[1..], ["100.0".to_string(), "100.0".to_string()]);
    }

    #[test]
    fn summary_counts_categories_with_clusters() {
        let (c, m) = fixture();
        let t = macro_area_summary(&m, &c);
        let ma = t.rows.iter().find(|r| r[0] == "MA").unwrap();
        assert_eq!(ma[1], "2");
        assert_eq!(ma[6], "2");
        assert_eq!(ma[7], "4");
        assert_eq!(t.rows.last().unwrap()[7], "5");
    }

    #[test]
    fn io_error_names_path() {
        let (c, m) = fixture();
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_reports(&m, &c, &blocker.join("sub"), ReportFormat::Csv, &RunManifest::new())
            .unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
