//! Linking author mentions to registered researchers.
//!
//! Mentions carry only a surname and initials, and the address list of a
//! publication is not tied to its byline. Resolution compares folded name
//! keys and, for homonyms, the organization units matched from the
//! publication's addresses. Anything that cannot be decided is recorded as
//! unresolved; no mention is ever guessed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use crate::corpus::{Corpus, PubId, Publication, ResearcherId, UnitId};
use crate::par::{map_ordered, Execution};
use crate::text::{fold_compact, fold_words};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentityError {
    #[error("surname {0:?} is empty after normalization")]
    EmptySurname(String),
}

/// Folded surname plus first initial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameKey {
    pub surname: String,
    pub initial: Option<char>,
}

impl fmt::Display for NameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.initial {
            Some(c) => write!(f, "{}/{}", self.surname, c),
            None => write!(f, "{}/", self.surname),
        }
    }
}

/// Builds the matching key for a name: surname case-folded with diacritics,
/// spaces, hyphens and punctuation removed; only the first initial is kept.
pub fn normalize_name(surname: &str, initials: &str) -> Result<NameKey, IdentityError> {
    let surname_norm = fold_compact(surname);
    if surname_norm.is_empty() {
        return Err(IdentityError::EmptySurname(surname.to_string()));
    }
    Ok(NameKey {
        surname: surname_norm,
        initial: fold_compact(initials).chars().next(),
    })
}

/// Matches raw affiliation strings against organization names and aliases.
#[derive(Debug, Clone)]
pub struct AffiliationMatcher {
    patterns: Vec<(UnitId, Vec<String>)>,
}

impl AffiliationMatcher {
    pub fn new(corpus: &Corpus) -> Self {
        let patterns = corpus
            .organizations()
            .values()
            .map(|o| {
                let mut pats: Vec<String> = std::iter::once(&o.name)
                    .chain(&o.aliases)
                    .map(|s| fold_words(s))
                    .filter(|s| !s.is_empty())
                    .map(|s| format!(" {s} "))
                    .collect();
                pats.sort();
                pats.dedup();
                (o.unit.clone(), pats)
            })
            .collect();
        Self { patterns }
    }

    /// Every unit whose name or an alias occurs (as whole words) in `raw`.
    pub fn matching_units(&self, raw: &str) -> Vec<&UnitId> {
        let folded = fold_words(raw);
        if folded.is_empty() {
            return Vec::new();
        }
        let haystack = format!(" {folded} ");
        self.patterns
            .iter()
            .filter(|(_, pats)| pats.iter().any(|p| haystack.contains(p.as_str())))
            .map(|(unit, _)| unit)
            .collect()
    }

    /// The single unit matching `raw`; `None` if no unit or several match.
    pub fn match_affiliation(&self, raw: &str) -> Option<&UnitId> {
        match self.matching_units(raw).as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

/// Convenience form building a throwaway matcher.
pub fn match_affiliation(raw: &str, corpus: &Corpus) -> Option<UnitId> {
    AffiliationMatcher::new(corpus).match_affiliation(raw).cloned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnresolvedReason {
    NoCandidate,
    AmbiguousName,
    AmbiguousAffiliation,
}

impl UnresolvedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnresolvedReason::NoCandidate => "no_candidate",
            UnresolvedReason::AmbiguousName => "ambiguous_name",
            UnresolvedReason::AmbiguousAffiliation => "ambiguous_affiliation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub publication: PubId,
    pub mention_index: usize,
    pub researcher: ResearcherId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unresolved {
    pub publication: PubId,
    pub mention_index: usize,
    pub reason: UnresolvedReason,
}

/// Resolved links and the unresolved ledger, both in (publication, mention)
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorshipTable {
    links: Vec<Link>,
    unresolved: Vec<Unresolved>,
    by_researcher: BTreeMap<ResearcherId, BTreeSet<PubId>>,
    by_publication: BTreeMap<PubId, BTreeSet<ResearcherId>>,
}

static EMPTY_PUBS: BTreeSet<PubId> = BTreeSet::new();
static EMPTY_RESEARCHERS: BTreeSet<ResearcherId> = BTreeSet::new();

impl AuthorshipTable {
    pub fn from_parts(mut links: Vec<Link>, mut unresolved: Vec<Unresolved>) -> Self {
        links.sort();
        unresolved.sort();
        let mut by_researcher: BTreeMap<ResearcherId, BTreeSet<PubId>> = BTreeMap::new();
        let mut by_publication: BTreeMap<PubId, BTreeSet<ResearcherId>> = BTreeMap::new();
        for l in &links {
            by_researcher
                .entry(l.researcher.clone())
                .or_default()
                .insert(l.publication.clone());
            by_publication
                .entry(l.publication.clone())
                .or_default()
                .insert(l.researcher.clone());
        }
        Self {
            links,
            unresolved,
            by_researcher,
            by_publication,
        }
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn unresolved(&self) -> &[Unresolved] {
        &self.unresolved
    }

    /// Distinct publications linked to `researcher`.
    pub fn publications_of(&self, researcher: &ResearcherId) -> &BTreeSet<PubId> {
        self.by_researcher.get(researcher).unwrap_or(&EMPTY_PUBS)
    }

    /// Distinct researchers linked to `publication`.
    pub fn authors_of(&self, publication: &PubId) -> &BTreeSet<ResearcherId> {
        self.by_publication
            .get(publication)
            .unwrap_or(&EMPTY_RESEARCHERS)
    }

    /// Researchers with at least one link, in id order.
    pub fn linked_researchers(&self) -> impl Iterator<Item = &ResearcherId> {
        self.by_researcher.keys()
    }

    pub fn mention_count(&self) -> usize {
        self.links.len() + self.unresolved.len()
    }

    /// Writes `unresolved_mentions.csv`.
    pub fn write_unresolved_csv<W: Write>(&self, corpus: &Corpus, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pub_id", "mention_index", "surname", "initials", "reason"])?;
        for u in &self.unresolved {
            let m = corpus
                .publication(&u.publication)
                .and_then(|p| p.mentions.get(u.mention_index));
            w.write_record([
                u.publication.as_str(),
                &u.mention_index.to_string(),
                m.map(|m| m.surname.as_str()).unwrap_or(""),
                m.map(|m| m.initials.as_str()).unwrap_or(""),
                u.reason.as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Outcome {
    Linked(ResearcherId),
    Unresolved(UnresolvedReason),
}

struct Resolver<'a> {
    corpus: &'a Corpus,
    matcher: AffiliationMatcher,
    by_name: BTreeMap<NameKey, Vec<&'a ResearcherId>>,
}

impl<'a> Resolver<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        let mut by_name: BTreeMap<NameKey, Vec<&ResearcherId>> = BTreeMap::new();
        for r in corpus.researchers().values() {
            let key = normalize_name(&r.surname, &r.initials)
                .expect("researcher names validated at load");
            by_name.entry(key).or_default().push(&r.id);
        }
        Self {
            corpus,
            matcher: AffiliationMatcher::new(corpus),
            by_name,
        }
    }

    fn unit_of(&self, id: &ResearcherId) -> &UnitId {
        &self.corpus.researchers()[id].unit
    }

    fn resolve_publication(&self, publication: &Publication) -> Vec<Outcome> {
        // Unit sets only grow as aliases are added, so an alias can turn a
        // link ambiguous but never move it to another researcher.
        let address_units: Vec<BTreeSet<&UnitId>> = publication
            .addresses
            .iter()
            .map(|a| self.matcher.matching_units(a).into_iter().collect())
            .collect();
        let all_units: BTreeSet<&UnitId> = address_units.iter().flatten().copied().collect();

        let mut outcomes: Vec<Outcome> = publication
            .mentions
            .iter()
            .map(|m| {
                let key = normalize_name(&m.surname, &m.initials)
                    .expect("mention names validated at load");
                let candidates = match self.by_name.get(&key) {
                    Some(c) => c,
                    None => return Outcome::Unresolved(UnresolvedReason::NoCandidate),
                };
                if let [only] = candidates.as_slice() {
                    return Outcome::Linked((*only).clone());
                }
                let units = match m.address_index {
                    Some(idx) => &address_units[idx],
                    None => &all_units,
                };
                let filtered: Vec<&ResearcherId> = candidates
                    .iter()
                    .copied()
                    .filter(|r| units.contains(self.unit_of(r)))
                    .collect();
                if let [only] = filtered.as_slice() {
                    return Outcome::Linked((*only).clone());
                }
                let pool = if filtered.is_empty() {
                    candidates.as_slice()
                } else {
                    filtered.as_slice()
                };
                let distinct_units: BTreeSet<&UnitId> =
                    pool.iter().map(|r| self.unit_of(r)).collect();
                if distinct_units.len() == 1 {
                    Outcome::Unresolved(UnresolvedReason::AmbiguousName)
                } else {
                    Outcome::Unresolved(UnresolvedReason::AmbiguousAffiliation)
                }
            })
            .collect();

        // Two byline entries cannot be the same person.
        let mut counts: BTreeMap<&ResearcherId, usize> = BTreeMap::new();
        for o in &outcomes {
            if let Outcome::Linked(r) = o {
                *counts.entry(r).or_default() += 1;
            }
        }
        let repeated: BTreeSet<ResearcherId> = counts
            .into_iter()
            .filter(|(_, n)| *n > 1)
            .map(|(r, _)| r.clone())
            .collect();
        if !repeated.is_empty() {
            for o in &mut outcomes {
                if matches!(o, Outcome::Linked(r) if repeated.contains(r)) {
                    *o = Outcome::Unresolved(UnresolvedReason::AmbiguousName);
                }
            }
        }
        outcomes
    }
}

/// Resolves every mention of every scored publication.
pub fn resolve_mentions(corpus: &Corpus) -> AuthorshipTable {
    resolve_mentions_with(corpus, Execution::default())
}

pub fn resolve_mentions_with(corpus: &Corpus, exec: Execution) -> AuthorshipTable {
    let resolver = Resolver::new(corpus);
    let pubs: Vec<&Publication> = corpus.publications().values().collect();
    let per_pub = map_ordered(&pubs, exec, |p| resolver.resolve_publication(p));

    let mut links = Vec::new();
    let mut unresolved = Vec::new();
    for (p, outcomes) in pubs.iter().zip(per_pub) {
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Outcome::Linked(researcher) => links.push(Link {
                    publication: p.id.clone(),
                    mention_index: i,
                    researcher,
                }),
                Outcome::Unresolved(reason) => unresolved.push(Unresolved {
                    publication: p.id.clone(),
                    mention_index: i,
                    reason,
                }),
            }
        }
    }
    AuthorshipTable::from_parts(links, unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{CorpusData, SiteId, YearRange};
    use proptest::prelude::*;

    #[test]
    fn name_examples() {
        let k = normalize_name("D'Amico", "GF").unwrap();
        assert_eq!(k.surname, "damico");
        assert_eq!(k.initial, Some('g'));
        let k = normalize_name("ROSSI", "M").unwrap();
        assert_eq!((k.surname.as_str(), k.initial), ("rossi", Some('m')));
        assert_eq!(
            normalize_name("Müller-Lüdenscheidt", "H.J."),
            normalize_name("muller ludenscheidt", "h")
        );
        assert!(normalize_name(" -' ", "A").is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(s in "\\PC{1,20}", i in "\\PC{0,4}") {
            if let Ok(k) = normalize_name(&s, &i) {
                let again = normalize_name(
                    &k.surname,
                    &k.initial.map(String::from).unwrap_or_default(),
                ).unwrap();
                prop_assert_eq!(again, k);
            }
        }
    }

    fn registry() -> CorpusData {
        let mut data = minimal();
        data.organizations = vec![
            org("UBO", None, "University of Bologna"),
            org("UPD", None, "University of Padua"),
            org("CNR", Some("BARI"), "CNR Bari Research Area"),
            org("CNR", Some("ROMA"), "CNR Rome Research Area"),
        ];
        data.organizations[0].aliases.push("Univ Bologna".into());
        data.organizations[1].aliases.push("Univ Padua".into());
        data.researchers = vec![researcher("R1", "Rossi", "M", "UBO")];
        data
    }

    #[test]
    fn affiliation_matching() {
        let c = Corpus::from_data(registry(), YearRange::default()).unwrap();
        assert_eq!(
            match_affiliation("Univ Bologna, Dept Phys, Bologna, Italy", &c),
            Some(UnitId::org_only("UBO"))
        );
        assert_eq!(match_affiliation("Bari Research Area, Italy", &c), None);
        assert_eq!(
            match_affiliation("CNR Bari Research Area, Inst X", &c),
            Some(UnitId::new("CNR", Some(SiteId::from("BARI"))))
        );
        assert_eq!(match_affiliation("Univ Bologna & Univ Padua joint lab", &c), None);
        assert_eq!(match_affiliation("", &c), None);
        assert_eq!(match_affiliation("Univ Bolognaa", &c), None);
    }

    fn resolve(data: CorpusData) -> (Corpus, AuthorshipTable) {
        let c = Corpus::from_data(data, YearRange::default()).unwrap();
        let t = resolve_mentions(&c);
        (c, t)
    }

    #[test]
    fn unique_candidate_links() {
        let mut data = registry();
        let mut p = publication("P1", "J1", &[("Rossi", "M")]);
        p.addresses.push("Univ Bologna, Italy".into());
        data.publications = vec![p];
        let (_, t) = resolve(data);
        assert_eq!(t.links().len(), 1);
        assert_eq!(t.links()[0].researcher, ResearcherId::from("R1"));
    }

    #[test]
    fn homonyms_split_by_address() {
        let mut data = registry();
        data.researchers.push(researcher("R2", "Rossi", "M", "UPD"));
        let mut p = publication("P1", "J1", &[("Rossi", "M"), ("Smith", "J")]);
        p.addresses.push("Dept Chem, Univ Bologna, Italy".into());
        data.publications = vec![p];
        let (_, t) = resolve(data);
        assert_eq!(t.links().len(), 1);
        assert_eq!(t.links()[0].researcher, ResearcherId::from("R1"));
        assert_eq!(t.unresolved()[0].reason, UnresolvedReason::NoCandidate);
    }

    #[test]
    fn indexed_address_takes_precedence() {
        let mut data = registry();
        data.researchers.push(researcher("R2", "Rossi", "M", "UPD"));
        let mut p = publication("P1", "J1", &[("Rossi", "M")]);
        p.addresses.push("Univ Bologna".into());
        p.addresses.push("Univ Padua".into());
        p.mentions[0].address_index = Some(1);
        data.publications = vec![p];
        let (_, t) = resolve(data);
        assert_eq!(t.links()[0].researcher, ResearcherId::from("R2"));
    }

    #[test]
    fn same_unit_homonyms_are_ambiguous_name() {
        let mut data = registry();
        data.researchers.push(researcher("R2", "Rossi", "M", "UBO"));
        let mut p = publication("P1", "J1", &[("Rossi", "M")]);
        p.addresses.push("Univ Bologna".into());
        data.publications = vec![p];
        let (_, t) = resolve(data);
        assert!(t.links().is_empty());
        assert_eq!(t.unresolved()[0].reason, UnresolvedReason::AmbiguousName);
    }

    #[test]
    fn unmatched_addresses_are_ambiguous_affiliation() {
        let mut data = registry();
        data.researchers.push(researcher("R2", "Rossi", "M", "UPD"));
        let mut p = publication("P1", "J1", &[("Rossi", "M")]);
        p.addresses.push("Somewhere else".into());
        data.publications = vec![p.clone()];
        let (_, t) = resolve(data.clone());
        assert_eq!(
            t.unresolved()[0].reason,
            UnresolvedReason::AmbiguousAffiliation
        );
        p.addresses = vec!["Univ Bologna".into(), "Univ Padua".into()];
        data.publications = vec![p];
        let (_, t) = resolve(data);
        assert_eq!(
            t.unresolved()[0].reason,
            UnresolvedReason::AmbiguousAffiliation
        );
    }

    #[test]
    fn repeated_researcher_on_byline_is_not_merged() {
        let mut data = registry();
        data.publications = vec![publication("P1", "J1", &[("Rossi", "M"), ("Rossi", "M.")])];
        let (_, t) = resolve(data);
        assert!(t.links().is_empty());
        assert_eq!(t.unresolved().len(), 2);
    }

    #[test]
    fn totality_and_order_independence() {
        let mut data = registry();
        data.researchers.push(researcher("R2", "Rossi", "M", "UPD"));
        data.researchers.push(researcher("R3", "Bianchi", "A", "UPD"));
        let mut p1 = publication("P1", "J1", &[("Rossi", "M"), ("Bianchi", "A"), ("X", "Y")]);
        p1.addresses = vec!["Univ Padua".into(), "Nowhere".into()];
        let mut p2 = publication("P2", "J1", &[("Rossi", "M")]);
        p2.addresses = vec!["Univ Bologna".into(), "Univ Padua".into()];
        data.publications = vec![p1, p2];
        let (_, t) = resolve(data.clone());
        assert_eq!(t.mention_count(), 4);

        data.researchers.reverse();
        data.organizations.reverse();
        data.publications.reverse();
        for p in &mut data.publications {
            p.addresses.reverse();
        }
        let (_, t2) = resolve(data);
        assert_eq!(t, t2);
    }

    #[test]
    fn unresolved_csv() {
        let mut data = registry();
        data.publications = vec![publication("P1", "J1", &[("Rossi", "M"), ("Verdi", "G")])];
        let (c, t) = resolve(data);
        let mut buf = Vec::new();
        t.write_unresolved_csv(&c, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "pub_id,mention_index,surname,initials,reason\nP1,1,Verdi,G,no_candidate\n"
        );
    }
}
