#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use coemap::analytics::{emit_reports, ReportFormat};
use coemap::corpus::{CategoryId, Corpus, CorpusData, YearRange};
use coemap::manifest::RunManifest;
use coemap::synth::random_corpus;
use coemap::ExcellenceMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data(seed: u64) -> CorpusData {
    random_corpus(seed, 40)
}

pub fn corpus(data: CorpusData) -> Corpus {
    Corpus::from_data(data, YearRange::default()).expect("valid corpus")
}

/// Same content with every collection, and every publication's address
/// list, in a different order.
pub fn shuffled(data: &CorpusData, seed: u64) -> CorpusData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = data.clone();
    d.categories.shuffle(&mut rng);
    d.journals.shuffle(&mut rng);
    d.impact_factors.shuffle(&mut rng);
    d.organizations.shuffle(&mut rng);
    d.aliases.shuffle(&mut rng);
    d.researchers.shuffle(&mut rng);
    d.publications.shuffle(&mut rng);
    for p in &mut d.publications {
        let mut order: Vec<usize> = (0..p.addresses.len()).collect();
        order.shuffle(&mut rng);
        let mut new_index = vec![0; order.len()];
        for (new, old) in order.iter().enumerate() {
            new_index[*old] = new;
        }
        p.addresses = order.iter().map(|i| p.addresses[*i].clone()).collect();
        for m in &mut p.mentions {
            m.address_index = m.address_index.map(|i| new_index[i]);
        }
    }
    d
}

/// Categories reachable from `start` through journals listed in several
/// categories. Category means inside this set move together under scaling.
pub fn category_closure(data: &CorpusData, start: &CategoryId) -> BTreeSet<CategoryId> {
    let mut set = BTreeSet::from([start.clone()]);
    loop {
        let before = set.len();
        for j in &data.journals {
            if j.categories.iter().any(|c| set.contains(c)) {
                set.extend(j.categories.iter().cloned());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// Multiplies by `10^exp` every impact factor of every journal in the
/// closure of `category`.
pub fn scale_category(data: &CorpusData, category: &CategoryId, exp: i32) -> CorpusData {
    let closure = category_closure(data, category);
    let journals: BTreeSet<_> = data
        .journals
        .iter()
        .filter(|j| j.categories.iter().any(|c| closure.contains(c)))
        .map(|j| j.id.clone())
        .collect();
    let mut d = data.clone();
    for e in &mut d.impact_factors {
        if journals.contains(&e.journal) {
            e.value = e.value.mul_pow10(exp).expect("scaled value representable");
        }
    }
    d
}

/// Audit files and reports for `map`, keyed by file name.
pub fn export(map: &ExcellenceMap, corpus: &Corpus) -> BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    map.write_audit_files(corpus, dir.path()).unwrap();
    let manifest = RunManifest::for_run(map, corpus);
    emit_reports(map, corpus, dir.path(), ReportFormat::Csv, &manifest).unwrap();
    read_tree(dir.path())
}

pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

/// Permissive settings so that small corpora still produce clusters.
pub fn dense() -> coemap::PipelineConfig {
    coemap::PipelineConfig {
        decile_fraction: 0.5,
        min_cluster_size: 2,
        ..Default::default()
    }
}
