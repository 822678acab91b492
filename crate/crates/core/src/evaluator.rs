//! Comparison of generated themes against a human reference analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codegen::Codebook;
use crate::error::{Error, Result};
use crate::reviewer::RunThemes;
use crate::text::{contains_run, word_tokens, Stopwords};
use crate::themer::{Theme, ThemeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTheme {
    #[serde(rename = "id")]
    pub ref_id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceFile {
    theme: Vec<ReferenceTheme>,
}

pub fn parse_reference(text: &str, origin: &str) -> Result<Vec<ReferenceTheme>> {
    let file: ReferenceFile =
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("{origin}: {e}")))?;
    validate_reference(&file.theme)?;
    Ok(file.theme)
}

pub fn load_reference(path: &Path) -> Result<Vec<ReferenceTheme>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_reference(&text, &path.display().to_string())
}

pub fn validate_reference(refs: &[ReferenceTheme]) -> Result<()> {
    if refs.is_empty() {
        return Err(Error::InvalidInput("the reference analysis needs at least one theme".into()));
    }
    let mut seen = BTreeSet::new();
    for r in refs {
        if r.name.trim().is_empty() {
            return Err(Error::InvalidInput(format!("reference theme `{}` has no name", r.ref_id)));
        }
        if !seen.insert(r.ref_id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate reference id `{}`", r.ref_id)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Phase3,
    Phase4,
    AsCode,
    Unclear,
    Missed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Phase3 => "phase3",
            Verdict::Phase4 => "phase4",
            Verdict::AsCode => "as_code",
            Verdict::Unclear => "unclear",
            Verdict::Missed => "missed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Verdict::Phase3, Verdict::Phase4, Verdict::AsCode, Verdict::Unclear, Verdict::Missed]
            .into_iter()
            .find(|v| v.as_str() == s.trim())
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitField {
    Name,
    Description,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeHit {
    pub index: usize,
    pub name: String,
    pub matched_keyword: String,
    pub field: HitField,
}

fn phrase_in(keyword: &str, words: &[String]) -> bool {
    let k = word_tokens(keyword);
    !k.is_empty() && contains_run(words, &k)
}

/// Case-insensitive whole-word search; multi-word keywords match as
/// contiguous phrases. At most one hit per code, names before descriptions.
pub fn search_codes(book: &Codebook, keywords: &[String]) -> Vec<CodeHit> {
    let mut hits: Vec<CodeHit> = book
        .codes
        .iter()
        .filter_map(|c| {
            let fields = [(HitField::Name, word_tokens(&c.name)), (HitField::Description, word_tokens(&c.description))];
            fields.iter().find_map(|(field, words)| {
                keywords.iter().find(|k| phrase_in(k, words)).map(|k| CodeHit {
                    index: c.index,
                    name: c.name.clone(),
                    matched_keyword: k.clone(),
                    field: *field,
                })
            })
        })
        .collect();
    hits.sort_by_key(|h| h.index);
    hits
}

/// Similarity of a generated theme to a reference theme: 1.0 when a
/// reference keyword occurs as a phrase in the generated name, otherwise the
/// share of reference tokens found in the generated name and description.
pub fn match_score(reference: &ReferenceTheme, generated: &Theme, stop: &Stopwords) -> f64 {
    let name_words = word_tokens(&generated.name);
    if reference.keywords.iter().any(|k| phrase_in(k, &name_words)) {
        return 1.0;
    }
    let r = stop.token_set(&format!("{} {}", reference.name, reference.description));
    if r.is_empty() {
        return 0.0;
    }
    let g = stop.token_set(&format!("{} {}", generated.name, generated.description));
    r.intersection(&g).count() as f64 / r.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase3Match {
    pub theme_id: usize,
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase4Match {
    pub run: String,
    pub theme_id: usize,
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub ref_id: String,
    pub ref_name: String,
    pub verdict: Verdict,
    pub best_phase3_match: Option<Phase3Match>,
    pub best_phase4_match: Option<Phase4Match>,
    pub code_hits: Vec<CodeHit>,
    pub human_verdict: Option<Verdict>,
}

impl MatchRecord {
    pub fn effective_verdict(&self) -> Verdict {
        self.human_verdict.unwrap_or(self.verdict)
    }
}

fn best_in<'a>(reference: &ReferenceTheme, themes: impl Iterator<Item = (&'a str, &'a Theme)>, stop: &Stopwords) -> Option<(&'a str, &'a Theme, f64)> {
    let mut best: Option<(&str, &Theme, f64)> = None;
    for (run, t) in themes {
        let s = match_score(reference, t, stop);
        if best.is_none_or(|(_, _, b)| s > b) {
            best = Some((run, t, s));
        }
    }
    best
}

/// One record per reference theme. Verdict precedence: phase3, phase4,
/// as_code, unclear (best score in `[tau/2, tau)`), missed.
pub fn match_themes(
    phase3: &ThemeSet,
    phase4: &[RunThemes],
    codebook: &Codebook,
    reference: &[ReferenceTheme],
    tau: f64,
    stop: &Stopwords,
) -> Result<Vec<MatchRecord>> {
    validate_reference(reference)?;
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Config(format!("tau must lie in (0, 1], got {tau}")));
    }
    Ok(reference
        .iter()
        .map(|r| {
            let p3 = best_in(r, phase3.themes.iter().map(|t| ("", t)), stop).map(|(_, t, score)| Phase3Match {
                theme_id: t.theme_id,
                name: t.name.clone(),
                score,
            });
            let p4 = best_in(
                r,
                phase4.iter().filter(|run| !run.baseline).flat_map(|run| run.themes.iter().map(move |t| (run.label.as_str(), t))),
                stop,
            )
            .map(|(run, t, score)| Phase4Match {
                run: run.to_string(),
                theme_id: t.theme_id,
                name: t.name.clone(),
                score,
            });
            let code_hits = if r.keywords.is_empty() { Vec::new() } else { search_codes(codebook, &r.keywords) };
            let s3 = p3.as_ref().map_or(0.0, |m| m.score);
            let s4 = p4.as_ref().map_or(0.0, |m| m.score);
            let verdict = if s3 >= tau {
                Verdict::Phase3
            } else if s4 >= tau {
                Verdict::Phase4
            } else if !code_hits.is_empty() {
                Verdict::AsCode
            } else if s3.max(s4) >= tau / 2.0 {
                Verdict::Unclear
            } else {
                Verdict::Missed
            };
            MatchRecord {
                ref_id: r.ref_id.clone(),
                ref_name: r.name.clone(),
                verdict,
                best_phase3_match: p3,
                best_phase4_match: p4,
                code_hits,
                human_verdict: None,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictOverride {
    pub ref_id: String,
    pub verdict: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideFile {
    #[serde(rename = "override", default)]
    overrides: Vec<VerdictOverride>,
}

/// Applies `[[override]] ref_id = "..", verdict = ".."` entries.
pub fn apply_overrides(records: &mut [MatchRecord], text: &str) -> Result<()> {
    let file: OverrideFile = toml::from_str(text).map_err(|e| Error::InvalidInput(format!("overrides: {e}")))?;
    for o in file.overrides {
        let v = Verdict::parse(&o.verdict)
            .ok_or_else(|| Error::InvalidInput(format!("unknown verdict `{}` for `{}`", o.verdict, o.ref_id)))?;
        let rec = records
            .iter_mut()
            .find(|r| r.ref_id == o.ref_id)
            .ok_or_else(|| Error::InvalidInput(format!("override names unknown reference `{}`", o.ref_id)))?;
        rec.human_verdict = Some(v);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tau: f64,
    pub records: Vec<MatchRecord>,
    /// Generated themes whose best score against every reference is below tau.
    pub unmatched_generated: Vec<Phase3Match>,
    pub counts: BTreeMap<String, usize>,
}

impl ComparisonReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.counts.get(v.as_str()).copied().unwrap_or(0)
    }
}

pub fn build_report(
    records: Vec<MatchRecord>,
    phase3: &ThemeSet,
    reference: &[ReferenceTheme],
    tau: f64,
    stop: &Stopwords,
) -> Result<ComparisonReport> {
    if records.is_empty() {
        return Err(Error::InvalidInput("a report needs at least one reference theme".into()));
    }
    let unmatched_generated = phase3
        .themes
        .iter()
        .filter_map(|t| {
            let best = reference.iter().map(|r| match_score(r, t, stop)).fold(0.0, f64::max);
            (best < tau).then(|| Phase3Match {
                theme_id: t.theme_id,
                name: t.name.clone(),
                score: best,
            })
        })
        .collect();
    let mut counts = BTreeMap::new();
    for r in &records {
        *counts.entry(r.effective_verdict().as_str().to_string()).or_insert(0) += 1;
    }
    Ok(ComparisonReport {
        tau,
        records,
        unmatched_generated,
        counts,
    })
}

fn evidence_text(r: &MatchRecord) -> String {
    let mut parts = Vec::new();
    if let Some(m) = &r.best_phase3_match {
        parts.push(format!("phase3: '{}' ({:.3})", m.name, m.score));
    }
    if let Some(m) = &r.best_phase4_match {
        parts.push(format!("phase4: '{}' in {} ({:.3})", m.name, m.run, m.score));
    }
    if !r.code_hits.is_empty() {
        let codes: Vec<String> = r.code_hits.iter().map(|h| format!("'{}' (Index {})", h.name, h.index)).collect();
        parts.push(format!("codes: {}", codes.join(", ")));
    }
    parts.join("; ")
}

pub fn render_csv(report: &ComparisonReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
    w.write_record(["RefId", "Theme", "Verdict", "HumanVerdict", "Phase3Score", "Phase4Score", "CodeHits", "Evidence"])
        .map_err(err)?;
    for r in &report.records {
        w.write_record([
            r.ref_id.as_str(),
            &r.ref_name,
            r.verdict.as_str(),
            r.human_verdict.map_or("", Verdict::as_str),
            &r.best_phase3_match.as_ref().map_or(String::new(), |m| format!("{:.3}", m.score)),
            &r.best_phase4_match.as_ref().map_or(String::new(), |m| format!("{:.3}", m.score)),
            &r.code_hits.iter().map(|h| h.index.to_string()).collect::<Vec<_>>().join(";"),
            &evidence_text(r),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_markdown(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Comparison with the reference analysis (tau = {})\n", report.tau);
    out.push_str("| Nr. | Theme | Verdict | Evidence |\n|---|---|---|---|\n");
    for r in &report.records {
        let verdict = match r.human_verdict {
            Some(h) if h != r.verdict => format!("{h} (tool: {})", r.verdict),
            Some(h) => h.to_string(),
            None => r.verdict.to_string(),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            r.ref_id,
            r.ref_name.replace('|', "\\|"),
            verdict,
            evidence_text(r).replace('|', "\\|")
        );
    }
    out.push_str("\nEvery reference row counts equally, sub-themes included.\n\n");
    for (k, v) in &report.counts {
        let _ = writeln!(out, "- {k}: {v}");
    }
    out.push_str("\n## Generated themes matching no reference theme\n\n");
    if report.unmatched_generated.is_empty() {
        out.push_str("None.\n");
    }
    for m in &report.unmatched_generated {
        let _ = writeln!(out, "- {} (theme {}, best score {:.3})", m.name, m.theme_id, m.score);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::{Code, Stage};

    fn code(i: usize, name: &str, d: &str) -> Code {
        Code {
            index: i,
            name: name.into(),
            description: d.into(),
            evidence: vec![],
            merged_from: vec![i],
        }
    }

    fn theme(id: usize, name: &str, d: &str) -> Theme {
        Theme {
            theme_id: id,
            name: name.into(),
            description: d.into(),
            member_indices: vec![],
        }
    }

    fn set(themes: Vec<Theme>) -> ThemeSet {
        ThemeSet {
            themes,
            n_requested: 2,
            temperature: 0.0,
            codebook_stage: Stage::Reduced,
            run_ordinal: 0,
            unassigned: vec![],
            warnings: vec![],
            raw_response: String::new(),
        }
    }

    fn reference(id: &str, name: &str, kw: &[&str]) -> ReferenceTheme {
        ReferenceTheme {
            ref_id: id.into(),
            name: name.into(),
            description: String::new(),
            keywords: kw.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn whole_word_search() {
        let book = Codebook {
            codes: vec![
                code(0, "Marketing of Videogames", "x"),
                code(1, "Premarketing", "remarketing tricks"),
                code(2, "Sales", "online marketing channels"),
                code(3, "Game Development", "y"),
            ],
            run_id: "r".into(),
            stage: Stage::Reduced,
        };
        let hits = search_codes(&book, &["MARKETING".into()]);
        assert_eq!(hits.iter().map(|h| h.index).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(hits[1].field, HitField::Description);
        assert_eq!(search_codes(&book, &["game development".into()]).len(), 1);
        assert!(search_codes(&book, &["development game".into()]).is_empty());
        assert!(search_codes(&Codebook::new("r", Stage::Reduced), &["x".into()]).is_empty());
    }

    #[test]
    fn verdict_precedence() {
        let stop = Stopwords::english_with::<&str>(&[]);
        let p3 = set(vec![theme(1, "Gaming and Education", "learning")]);
        let p4 = vec![RunThemes {
            label: "run_0".into(),
            baseline: false,
            themes: vec![theme(1, "Gaming and Age Restrictions", "ratings")],
        }];
        let book = Codebook {
            codes: vec![code(0, "Marketing and Intent", "d")],
            run_id: "r".into(),
            stage: Stage::Reduced,
        };
        let refs = vec![
            reference("1", "Educational perspective", &["education"]),
            reference("10", "Regulations", &["age restrictions"]),
            reference("8", "Game Marketing", &["marketing"]),
            reference("2", "Psychological Perspective", &["psychology"]),
        ];
        let recs = match_themes(&p3, &p4, &book, &refs, 0.35, &stop).unwrap();
        let v: Vec<Verdict> = recs.iter().map(|r| r.verdict).collect();
        assert_eq!(v, vec![Verdict::Phase3, Verdict::Phase4, Verdict::AsCode, Verdict::Missed]);
        let report = build_report(recs, &p3, &refs, 0.35, &stop).unwrap();
        assert_eq!(report.count(Verdict::Phase3), 1);
        assert!(report.unmatched_generated.is_empty());
    }

    #[test]
    fn unclear_band() {
        let stop = Stopwords::none();
        let p3 = set(vec![theme(1, "alpha beta", "")]);
        let mut r = reference("x", "alpha gamma delta epsilon", &[]);
        r.description = "zeta".into();
        let recs = match_themes(&p3, &[], &Codebook::new("r", Stage::Reduced), &[r], 0.35, &stop).unwrap();
        assert_eq!(recs[0].verdict, Verdict::Unclear);
    }

    #[test]
    fn overrides_and_rendering() {
        let stop = Stopwords::none();
        let p3 = set(vec![theme(1, "Mentoring", "")]);
        let refs = vec![reference("1", "Data literacy", &[])];
        let mut recs = match_themes(&p3, &[], &Codebook::new("r", Stage::Reduced), &refs, 0.35, &stop).unwrap();
        apply_overrides(&mut recs, "[[override]]\nref_id = \"1\"\nverdict = \"phase3\"\n").unwrap();
        assert!(apply_overrides(&mut recs, "[[override]]\nref_id = \"9\"\nverdict = \"phase3\"\n").is_err());
        let report = build_report(recs, &p3, &refs, 0.35, &stop).unwrap();
        assert_eq!(report.count(Verdict::Phase3), 1);
        let md = render_markdown(&report);
        assert!(md.contains("phase3 (tool: missed)"));
        assert!(md.contains("- Mentoring (theme 1"));
        assert_eq!(render_markdown(&report), md);
        assert!(render_csv(&report).unwrap().starts_with("RefId,Theme,Verdict"));
    }

    #[test]
    fn reference_parsing() {
        let refs = parse_reference("[[theme]]\nid = \"3a\"\nname = \"Violence\"\nkeywords = [\"violence\"]\n", "t").unwrap();
        assert_eq!(refs[0].ref_id, "3a");
        assert!(parse_reference("theme = []", "t").is_err());
        assert!(parse_reference("[[theme]]\nid = \"1\"\nname = \"\"\n", "t").is_err());
        let stop = Stopwords::none();
        assert!(match_themes(&set(vec![]), &[], &Codebook::new("r", Stage::Reduced), &[], 0.35, &stop).is_err());
    }
}
