use std::path::Path;

use super::*;
use crate::text::{escape_item, join_escaped};

fn writer(dir: &Path, file: &str) -> Result<csv::Writer<std::fs::File>, CorpusError> {
    let path = dir.join(file);
    csv::Writer::from_path(&path).map_err(|e| csv_err(file, e))
}

fn csv_err(file: &str, source: csv::Error) -> CorpusError {
    CorpusError::Csv {
        file: file.to_string(),
        row: 0,
        source,
    }
}

fn flush(file: &str, mut w: csv::Writer<std::fs::File>) -> Result<(), CorpusError> {
    w.flush().map_err(|source| CorpusError::Io {
        path: file.into(),
        source,
    })
}

/// Writes `data` as the documented input files, preserving row order.
///
/// `org_aliases.csv` is written only when at least one alias exists.
pub fn write_corpus_data(dir: &Path, data: &CorpusData) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let file = "categories.csv";
    let mut w = writer(dir, file)?;
    let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
    rec(&["category_id", "name", "macro_area_id"])?;
    for c in &data.categories {
        rec(&[c.id.as_str(), &c.name, c.macro_area.as_str()])?;
    }
    flush(file, w)?;

    let file = "journals.csv";
    let mut w = writer(dir, file)?;
    let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
    rec(&["journal_id", "name", "category_ids"])?;
    for j in &data.journals {
        let cats: Vec<&str> = j.categories.iter().map(CategoryId::as_str).collect();
        rec(&[j.id.as_str(), &j.name, &cats.join(";")])?;
    }
    flush(file, w)?;

    let file = "impact_factors.csv";
    let mut w = writer(dir, file)?;
    let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
    rec(&["journal_id", "year", "if_value"])?;
    for e in &data.impact_factors {
        rec(&[e.journal.as_str(), &e.year.to_string(), &e.value.to_string()])?;
    }
    flush(file, w)?;

    let file = "organizations.csv";
    let mut w = writer(dir, file)?;
    let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
    rec(&["org_id", "site_id", "name", "inst_type", "region", "geo_macro_area"])?;
    for o in &data.organizations {
        rec(&[
            o.unit.org.as_str(),
            o.unit.site_str(),
            &o.name,
            o.inst_type.as_str(),
            o.region.as_str(),
            o.geo_macro_area.as_str(),
        ])?;
    }
    flush(file, w)?;

    let aliases: Vec<(&UnitId, &str)> = data
        .organizations
        .iter()
        .flat_map(|o| o.aliases.iter().map(move |a| (&o.unit, a.as_str())))
        .chain(data.aliases.iter().map(|a| (&a.unit, a.alias.as_str())))
        .collect();
    if !aliases.is_empty() {
        let file = ALIASES_FILE;
        let mut w = writer(dir, file)?;
        let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
        rec(&["org_id", "site_id", "alias"])?;
        for (unit, alias) in aliases {
            rec(&[unit.org.as_str(), unit.site_str(), alias])?;
        }
        flush(file, w)?;
    }

    let file = "researchers.csv";
    let mut w = writer(dir, file)?;
    let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
    rec(&["researcher_id", "surname", "initials", "org_id", "site_id"])?;
    for r in &data.researchers {
        rec(&[
            r.id.as_str(),
            &r.surname,
            &r.initials,
            r.unit.org.as_str(),
            r.unit.site_str(),
        ])?;
    }
    flush(file, w)?;

    let file = "publications.csv";
    let mut w = writer(dir, file)?;
    let mut rec = |fields: &[&str]| w.write_record(fields).map_err(|e| csv_err(file, e));
    rec(&["pub_id", "year", "journal_id", "doc_type", "authors", "addresses"])?;
    for p in &data.publications {
        let authors: Vec<String> = p
            .mentions
            .iter()
            .map(|m| {
                format!(
                    "{}|{}|{}",
                    escape_item(&m.surname),
                    escape_item(&m.initials),
                    m.address_index.map(|i| i.to_string()).unwrap_or_default()
                )
            })
            .collect();
        rec(&[
            p.id.as_str(),
            &p.year.to_string(),
            p.journal.as_str(),
            p.doc_type.as_str(),
            &authors.join(";"),
            &join_escaped(&p.addresses),
        ])?;
    }
    flush(file, w)
}
