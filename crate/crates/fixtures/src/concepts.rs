//! Concept tables: the reduced codes each synthetic corpus is built around.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    /// Key of the baseline theme the concept belongs to.
    pub theme: String,
    pub name: String,
    pub description: String,
    /// What the respondent says; becomes the tail of each quote.
    pub gist: String,
}

const GAMING_TSV: &str = include_str!("../assets/gaming_codes.tsv");
const TEACHING_TSV: &str = include_str!("../assets/teaching_codes.tsv");

pub const GAMING_THEME_KEYS: [&str; 11] = ["EDU", "ETH", "MON", "ART", "DEV", "REP", "MOB", "ESP", "GAMI", "HEA", "COM"];
pub const TEACHING_THEME_KEYS: [&str; 7] = ["ANA", "MEN", "GIS", "COL", "RES", "PRO", "SUP"];

pub fn parse_tsv(text: &str) -> Vec<Concept> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            assert_eq!(f.len(), 4, "concept row needs 4 fields: {l}");
            Concept {
                theme: f[0].to_string(),
                name: f[1].to_string(),
                description: f[2].to_string(),
                gist: f[3].to_string(),
            }
        })
        .collect()
}

pub fn gaming() -> Vec<Concept> {
    parse_tsv(GAMING_TSV)
}

pub fn teaching() -> Vec<Concept> {
    parse_tsv(TEACHING_TSV)
}
