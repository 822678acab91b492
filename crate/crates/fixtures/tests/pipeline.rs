use std::sync::Arc;

use taforge_core::codegen::{code_corpus, CodingConfig};
use taforge_core::corpus::WordHeuristic;
use taforge_core::evaluator::{build_report, match_themes, parse_reference, search_codes, Verdict};
use taforge_core::gateway::{Gateway, ModelConfig};
use taforge_core::reducer::{merge, reduce, shorten_descriptions, MergePolicy};
use taforge_core::reviewer::{cluster_and_score, sweep, RunThemes, SweepConfig};
use taforge_core::themer::{generate_themes, name_theme};
use taforge_fixtures::{Dataset, DatasetPlan, ScriptedModel};

struct Outcome {
    raw: usize,
    reduced: usize,
    themes: Vec<String>,
    report: taforge_core::reviewer::StabilityReport,
    verdicts: Vec<(String, Verdict)>,
    unmatched: Vec<String>,
    hits: Vec<usize>,
}

fn run(plan: DatasetPlan) -> Outcome {
    let ds = Dataset::build(plan);
    let gw = Gateway::new(Arc::new(ScriptedModel::new(&ds)), Arc::new(WordHeuristic::default()));
    let model = ModelConfig::default().with_temperature(0.0);
    let coded = code_corpus(&ds.chunks, &gw, &CodingConfig::default(), &model, "t").unwrap();
    let red = reduce(&coded.codebook, &gw, Some(ds.plan.description_chars), &model).unwrap();
    let (reduced, _) = merge(&coded.codebook, &red.groups, &MergePolicy::default()).unwrap();
    let short = shorten_descriptions(&reduced, ds.plan.shorten_chars).unwrap();
    let base = generate_themes(&short, ds.plan.n_themes(), &gw, &model, 0).unwrap();
    for t in &base.themes {
        name_theme(t, &short, &gw, &model).unwrap();
    }
    let stop = ds.plan.stopwords();
    let mut runs = vec![RunThemes::baseline(&base)];
    let out = sweep(&short, &SweepConfig::new(ds.plan.n_themes(), 1.0), &gw, &model).unwrap();
    runs.extend(out.sets.iter().map(RunThemes::sweep_run));
    let report = cluster_and_score(&runs, 0.35, &stop).unwrap();
    let reference = parse_reference(&ds.plan.reference_toml, "ref").unwrap();
    let records = match_themes(&base, &runs, &reduced, &reference, 0.35, &stop).unwrap();
    let report_rows = build_report(records.clone(), &base, &reference, 0.35, &stop).unwrap();
    let hits = ["violence", "marketing", "psychology"]
        .iter()
        .map(|k| search_codes(&reduced, &[k.to_string()]).len())
        .collect();
    Outcome {
        raw: coded.codebook.len(),
        reduced: reduced.len(),
        themes: base.themes.iter().map(|t| t.name.clone()).collect(),
        report,
        verdicts: records.iter().map(|r| (r.ref_id.clone(), r.verdict)).collect(),
        unmatched: report_rows.unmatched_generated.iter().map(|m| m.name.clone()).collect(),
        hits,
    }
}

#[test]
fn gaming_pipeline() {
    let o = run(DatasetPlan::gaming());
    assert_eq!((o.raw, o.reduced, o.themes.len()), (161, 89, 11));
    for key in ["Ethic", "Monetization", "Esports", "Physical Health", "Representation"] {
        let c = o.report.clusters.iter().find(|c| c.members[0].name.contains(key)).unwrap();
        assert_eq!(c.runs.len(), 4, "{key}");
    }
    let age = o.report.clusters.iter().find(|c| c.members.iter().any(|m| m.name == "Gaming and Age Restrictions")).unwrap();
    assert!(o.report.candidates_overlooked.contains(&age.id));
    assert_eq!(o.verdicts.len(), 13);
    assert_eq!(o.verdicts.iter().filter(|v| v.1 == Verdict::Phase3).count(), 9);
    assert_eq!(o.hits, vec![1, 3, 0]);
}

#[test]
fn teaching_pipeline() {
    let o = run(DatasetPlan::teaching());
    assert_eq!((o.raw, o.reduced, o.themes.len()), (101, 63, 7));
    assert!(o.unmatched.iter().any(|n| n == "Mentoring and Diversifying the Field"), "{:?}", o.unmatched);
}
