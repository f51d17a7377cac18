//! Domain types for the input corpus.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::decimal::Decimal;

macro_rules! token {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                Self(value.to_string())
            }
        }

        impl From<String> for $name {
            fn from(value: String) -> Self {
                Self(value)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

token!(
    /// Identifier of a scientific category.
    CategoryId
);
token!(
    /// Identifier of a macro-area (top-level grouping of categories).
    MacroAreaId
);
token!(JournalId);
token!(PubId);
token!(OrgId);
token!(
    /// Sub-unit of a multi-site organization, e.g. one research area.
    SiteId
);
token!(ResearcherId);
token!(RegionId);

/// An organization unit: the organization plus, optionally, one of its sites.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitId {
    pub org: OrgId,
    pub site: Option<SiteId>,
}

impl UnitId {
    pub fn new(org: impl Into<OrgId>, site: Option<SiteId>) -> Self {
        Self {
            org: org.into(),
            site,
        }
    }

    pub fn org_only(org: impl Into<OrgId>) -> Self {
        Self {
            org: org.into(),
            site: None,
        }
    }

    /// The org-level rollup of this unit.
    pub fn rollup(&self) -> UnitId {
        UnitId::org_only(self.org.clone())
    }

    pub fn site_str(&self) -> &str {
        self.site.as_ref().map(SiteId::as_str).unwrap_or("")
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.site {
            Some(site) => write!(f, "{}/{}", self.org, site),
            None => write!(f, "{}", self.org),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub id: CategoryId,
    pub name: String,
    pub macro_area: MacroAreaId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Journal {
    pub id: JournalId,
    pub name: String,
    pub categories: BTreeSet<CategoryId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpactFactorEntry {
    pub journal: JournalId,
    pub year: i32,
    pub value: Decimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocType {
    Article,
    Review,
    Other,
}

impl DocType {
    pub fn is_scored(self) -> bool {
        matches!(self, DocType::Article | DocType::Review)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Other => "other",
        }
    }
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "other" => Ok(DocType::Other),
            other => Err(format!("unknown doc_type {other:?}")),
        }
    }
}

/// One byline entry of a publication, as printed (surname plus initials).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorMention {
    pub surname: String,
    pub initials: String,
    pub address_index: Option<usize>,
}

impl AuthorMention {
    pub fn new(surname: impl Into<String>, initials: impl Into<String>) -> Self {
        Self {
            surname: surname.into(),
            initials: initials.into(),
            address_index: None,
        }
    }

    pub fn with_address(mut self, index: usize) -> Self {
        self.address_index = Some(index);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Publication {
    pub id: PubId,
    pub year: i32,
    pub journal: JournalId,
    pub doc_type: DocType,
    pub mentions: Vec<AuthorMention>,
    pub addresses: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InstType {
    University,
    PublicResearchLab,
    ResearchHospital,
}

impl InstType {
    pub const ALL: [InstType; 3] = [
        InstType::University,
        InstType::PublicResearchLab,
        InstType::ResearchHospital,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InstType::University => "university",
            InstType::PublicResearchLab => "public_research_lab",
            InstType::ResearchHospital => "research_hospital",
        }
    }
}

impl FromStr for InstType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "university" => Ok(InstType::University),
            "public_research_lab" => Ok(InstType::PublicResearchLab),
            "research_hospital" => Ok(InstType::ResearchHospital),
            other => Err(format!("unknown inst_type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeoMacroArea {
    NorthWest,
    NorthEast,
    Center,
    South,
}

impl GeoMacroArea {
    pub const ALL: [GeoMacroArea; 4] = [
        GeoMacroArea::NorthWest,
        GeoMacroArea::NorthEast,
        GeoMacroArea::Center,
        GeoMacroArea::South,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeoMacroArea::NorthWest => "north_west",
            GeoMacroArea::NorthEast => "north_east",
            GeoMacroArea::Center => "center",
            GeoMacroArea::South => "south",
        }
    }
}

impl FromStr for GeoMacroArea {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "north_west" => Ok(GeoMacroArea::NorthWest),
            "north_east" => Ok(GeoMacroArea::NorthEast),
            "center" => Ok(GeoMacroArea::Center),
            "south" => Ok(GeoMacroArea::South),
            other => Err(format!("unknown geo_macro_area {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Organization {
    pub unit: UnitId,
    pub name: String,
    pub inst_type: InstType,
    pub region: RegionId,
    pub geo_macro_area: GeoMacroArea,
    /// Alternative spellings used when matching raw affiliation strings.
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrgAlias {
    pub unit: UnitId,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Researcher {
    pub id: ResearcherId,
    pub surname: String,
    pub initials: String,
    pub unit: UnitId,
}

/// Inclusive range of publication years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self, String> {
        if start > end {
            return Err(format!("year range {start}-{end} is empty"));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }
}

impl Default for YearRange {
    fn default() -> Self {
        Self {
            start: 2001,
            end: 2003,
        }
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (a, b) = match s.split_once('-') {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        let start = a
            .trim()
            .parse::<i32>()
            .map_err(|_| format!("invalid year range {s:?}, expected A-B"))?;
        let end = b
            .trim()
            .parse::<i32>()
            .map_err(|_| format!("invalid year range {s:?}, expected A-B"))?;
        YearRange::new(start, end)
    }
}
