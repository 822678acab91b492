//! Where each fixture value comes from.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Transcribed from the published results.
    Published,
    /// Written for the fixtures to satisfy published counts or behaviour.
    Authored,
    /// Produced by the seeded generator.
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub item: &'static str,
    pub origin: Origin,
    pub source: &'static str,
}

pub fn manifest() -> Vec<Entry> {
    use Origin::*;
    vec![
        Entry { item: "gaming baseline theme names and descriptions", origin: Published, source: "published gaming theme table at temperature 0" },
        Entry { item: "gaming sweep theme names", origin: Published, source: "published gaming theme table for three runs at temperature 1" },
        Entry { item: "gaming sweep theme descriptions", origin: Authored, source: "not published; written to match each theme name" },
        Entry { item: "teaching baseline theme names and descriptions", origin: Published, source: "published teaching theme table at temperature 0" },
        Entry { item: "teaching sweep theme names", origin: Published, source: "published teaching theme tables at temperatures 1 and 0.5" },
        Entry { item: "teaching sweep theme descriptions", origin: Authored, source: "templated from the theme name" },
        Entry { item: "Education theme code names", origin: Published, source: "published list of codes behind the gaming education theme" },
        Entry { item: "renamed themes and summaries", origin: Published, source: "published blind-naming results for two gaming themes" },
        Entry { item: "first teaching codes and quotes", origin: Published, source: "published sample of initial teaching codes" },
        Entry { item: "chunk, code, reduced-code and theme counts", origin: Published, source: "published pipeline counts for both datasets" },
        Entry { item: "first gaming interview chunk sizes", origin: Published, source: "published chunk token counts of the first gaming interview" },
        Entry { item: "Italian poets probe answers", origin: Published, source: "published temperature illustration" },
        Entry { item: "gaming reference themes", origin: Published, source: "published human-analysis theme list for the gaming dataset" },
        Entry { item: "teaching reference themes", origin: Published, source: "published human-analysis theme list for the teaching dataset" },
        Entry { item: "reference keywords", origin: Authored, source: "chosen per reference theme for code search" },
        Entry { item: "keyword search hits for violence, marketing and psychology", origin: Published, source: "published code search results; pinned code names placed at the published indices" },
        Entry { item: "remaining concept names, descriptions and gists", origin: Authored, source: "written to fill the published theme structure" },
        Entry { item: "interview transcripts", origin: Generated, source: "seeded filler text sized to the planned chunk boundaries" },
        Entry { item: "raw code assignment and quotes", origin: Generated, source: "seeded assignment of concepts to code slots" },
    ]
}

pub fn manifest_json() -> String {
    serde_json::to_string_pretty(&manifest()).expect("manifest serializes")
}
