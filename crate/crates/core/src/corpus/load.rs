use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use super::*;
use crate::text::split_escaped;

/// The six required input files.
pub const INPUT_FILES: [&str; 6] = [
    "categories.csv",
    "journals.csv",
    "impact_factors.csv",
    "organizations.csv",
    "researchers.csv",
    "publications.csv",
];

/// Optional organization alias table.
pub const ALIASES_FILE: &str = "org_aliases.csv";

/// Reads and validates the corpus stored in `input_dir`.
pub fn load_corpus(input_dir: &Path, window: YearRange) -> Result<Corpus, CorpusError> {
    let data = read_corpus_data(input_dir)?;
    Corpus::from_data(data, window)
}

struct Table {
    file: String,
    columns: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

struct Row<'a> {
    table: &'a Table,
    line: u64,
    record: &'a csv::StringRecord,
}

impl<'a> Row<'a> {
    fn get(&self, field: &str) -> &'a str {
        let idx = self
            .table
            .columns
            .iter()
            .position(|c| c == field)
            .expect("column checked at open");
        self.record.get(idx).unwrap_or("").trim()
    }

    fn malformed(&self, field: &str, message: impl Into<String>) -> CorpusError {
        CorpusError::Malformed {
            file: self.table.file.clone(),
            row: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn token(&self, field: &str) -> Result<&'a str, CorpusError> {
        let v = self.get(field);
        if v.is_empty() {
            Err(self.malformed(field, "empty value"))
        } else {
            Ok(v)
        }
    }

    fn optional(&self, field: &str) -> Option<&'a str> {
        Some(self.get(field)).filter(|v| !v.is_empty())
    }

    fn parse<T: std::str::FromStr>(&self, field: &str) -> Result<T, CorpusError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(field);
        v.parse::<T>()
            .map_err(|e| self.malformed(field, format!("{v:?}: {e}")))
    }
}

impl Table {
    fn read(dir: &Path, file: &str, required: &[&str]) -> Result<Table, CorpusError> {
        let path = dir.join(file);
        let handle = File::open(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(handle);
        let headers = reader.headers().map_err(|source| CorpusError::Csv {
            file: file.to_string(),
            row: 1,
            source,
        })?;
        let columns: Vec<String> = headers
            .iter()
            .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
            .collect();
        for col in required {
            if !columns.iter().any(|c| c == col) {
                return Err(CorpusError::Malformed {
                    file: file.to_string(),
                    row: 1,
                    field: col.to_string(),
                    message: "missing column in header".to_string(),
                });
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|source| CorpusError::Csv {
                file: file.to_string(),
                row: source.position().map(|p| p.line()).unwrap_or(0),
                source,
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            rows.push((line, record));
        }
        Ok(Table {
            file: file.to_string(),
            columns,
            rows,
        })
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, record)| Row {
            table: self,
            line: *line,
            record,
        })
    }
}

fn parse_authors(row: &Row<'_>) -> Result<Vec<AuthorMention>, CorpusError> {
    let raw = row.get("authors");
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    split_escaped(raw)
        .into_iter()
        .enumerate()
        .map(|(i, triple)| {
            let parts: Vec<&str> = triple.split('|').collect();
            if parts.len() != 3 {
                return Err(row.malformed(
                    "authors",
                    format!("author {i}: expected surname|initials|address_index, got {triple:?}"),
                ));
            }
            let address_index = match parts[2].trim() {
                "" => None,
                idx => Some(idx.parse::<usize>().map_err(|_| {
                    row.malformed("authors", format!("author {i}: bad address_index {idx:?}"))
                })?),
            };
            Ok(AuthorMention {
                surname: parts[0].trim().to_string(),
                initials: parts[1].trim().to_string(),
                address_index,
            })
        })
        .collect()
}

fn parse_unit(row: &Row<'_>) -> Result<UnitId, CorpusError> {
    Ok(UnitId::new(
        row.token("org_id")?,
        row.optional("site_id").map(SiteId::from),
    ))
}

/// Reads the raw rows of every input file without cross-validation.
pub fn read_corpus_data(dir: &Path) -> Result<CorpusData, CorpusError> {
    let missing: Vec<String> = INPUT_FILES
        .iter()
        .filter(|f| !dir.join(f).is_file())
        .map(|f| f.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CorpusError::MissingFiles {
            dir: dir.to_path_buf(),
            files: missing,
        });
    }

    let mut data = CorpusData::default();

    let t = Table::read(dir, "categories.csv", &["category_id", "name", "macro_area_id"])?;
    for row in t.rows() {
        data.categories.push(Category {
            id: row.token("category_id")?.into(),
            name: row.get("name").to_string(),
            macro_area: row.token("macro_area_id")?.into(),
        });
    }

    let t = Table::read(dir, "journals.csv", &["journal_id", "name", "category_ids"])?;
    for row in t.rows() {
        let categories: BTreeSet<CategoryId> = row
            .get("category_ids")
            .split(';')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(CategoryId::from)
            .collect();
        if categories.is_empty() {
            return Err(row.malformed("category_ids", "journal has no categories"));
        }
        data.journals.push(Journal {
            id: row.token("journal_id")?.into(),
            name: row.get("name").to_string(),
            categories,
        });
    }

    let t = Table::read(dir, "impact_factors.csv", &["journal_id", "year", "if_value"])?;
    for row in t.rows() {
        data.impact_factors.push(ImpactFactorEntry {
            journal: row.token("journal_id")?.into(),
            year: row.parse("year")?,
            value: row.parse("if_value")?,
        });
    }

    let t = Table::read(
        dir,
        "organizations.csv",
        &["org_id", "site_id", "name", "inst_type", "region", "geo_macro_area"],
    )?;
    for row in t.rows() {
        data.organizations.push(Organization {
            unit: parse_unit(&row)?,
            name: row.get("name").to_string(),
            inst_type: row.parse("inst_type")?,
            region: row.token("region")?.into(),
            geo_macro_area: row.parse("geo_macro_area")?,
            aliases: Vec::new(),
        });
    }

    if dir.join(ALIASES_FILE).is_file() {
        let t = Table::read(dir, ALIASES_FILE, &["org_id", "site_id", "alias"])?;
        for row in t.rows() {
            data.aliases.push(OrgAlias {
                unit: parse_unit(&row)?,
                alias: row.token("alias")?.to_string(),
            });
        }
    }

    let t = Table::read(
        dir,
        "researchers.csv",
        &["researcher_id", "surname", "initials", "org_id", "site_id"],
    )?;
    for row in t.rows() {
        data.researchers.push(Researcher {
            id: row.token("researcher_id")?.into(),
            surname: row.token("surname")?.to_string(),
            initials: row.get("initials").to_string(),
            unit: parse_unit(&row)?,
        });
    }

    let t = Table::read(
        dir,
        "publications.csv",
        &["pub_id", "year", "journal_id", "doc_type", "authors", "addresses"],
    )?;
    for row in t.rows() {
        let mentions = parse_authors(&row)?;
        if mentions.is_empty() {
            return Err(row.malformed("authors", "no authors"));
        }
        let raw_addresses = row.get("addresses");
        let addresses = if raw_addresses.is_empty() {
            Vec::new()
        } else {
            split_escaped(raw_addresses)
                .into_iter()
                .map(|a| a.trim().to_string())
                .collect()
        };
        data.publications.push(Publication {
            id: row.token("pub_id")?.into(),
            year: row.parse("year")?,
            journal: row.token("journal_id")?.into(),
            doc_type: row.parse("doc_type")?,
            mentions,
            addresses,
        });
    }

    Ok(data)
}
