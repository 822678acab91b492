//! Brute-force reference for theme clustering, plus random instances.

use std::collections::BTreeSet;

use rand::Rng;
use taforge_core::reviewer::RunThemes;
use taforge_core::text::Stopwords;
use taforge_core::themer::Theme;

/// One cluster: members as (run label, theme id), and the share of runs present.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCluster {
    pub members: Vec<(String, usize)>,
    pub stability: f64,
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Fills the full similarity matrix first, then places every theme in the
/// lowest-numbered cluster holding any earlier theme at or above `tau`.
pub fn brute_force_clusters(runs: &[RunThemes], tau: f64, stop: &Stopwords) -> Vec<OracleCluster> {
    let mut order: Vec<&RunThemes> = runs.iter().filter(|r| r.baseline).collect();
    order.extend(runs.iter().filter(|r| !r.baseline));
    let mut items: Vec<(String, usize, BTreeSet<String>)> = Vec::new();
    for run in &order {
        let mut themes: Vec<&Theme> = run.themes.iter().collect();
        themes.sort_by_key(|t| t.theme_id);
        for t in themes {
            items.push((run.label.clone(), t.theme_id, stop.token_set(&format!("{} {}", t.name, t.description))));
        }
    }
    let n = items.len();
    let sim: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| jaccard(&items[i].2, &items[j].2)).collect()).collect();

    let mut cluster_of = vec![usize::MAX; n];
    let mut count = 0;
    for i in 0..n {
        let linked: Option<usize> = (0..i).filter(|&j| sim[i][j] >= tau).map(|j| cluster_of[j]).min();
        cluster_of[i] = linked.unwrap_or_else(|| {
            count += 1;
            count - 1
        });
    }
    (0..count)
        .map(|c| {
            let members: Vec<(String, usize)> =
                (0..n).filter(|&i| cluster_of[i] == c).map(|i| (items[i].0.clone(), items[i].1)).collect();
            let runs: BTreeSet<&String> = members.iter().map(|m| &m.0).collect();
            OracleCluster { stability: runs.len() as f64 / order.len() as f64, members }
        })
        .collect()
}

const VOCAB: &[&str] = &[
    "ethics", "art", "money", "education", "learning", "health", "esports", "mobile", "community", "design",
    "story", "violence", "age", "rating", "players", "teachers", "data", "graphs", "skills", "support",
];

/// Between one and five runs whose theme counts add up to at most `max_themes`.
pub fn random_runs<R: Rng>(rng: &mut R, max_themes: usize) -> Vec<RunThemes> {
    let n_runs = rng.random_range(1..=5);
    let mut budget = rng.random_range(1..=max_themes.max(1));
    let with_baseline = rng.random_bool(0.5);
    let mut runs = Vec::new();
    for r in 0..n_runs {
        if budget == 0 {
            break;
        }
        let k = rng.random_range(1..=budget.min(15));
        budget -= k;
        let themes = (1..=k)
            .map(|id| {
                let mut words = |lo: usize, hi: usize| -> String {
                    (0..rng.random_range(lo..=hi)).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
                };
                Theme { theme_id: id, name: words(1, 4), description: words(0, 6), member_indices: vec![] }
            })
            .collect();
        let baseline = with_baseline && r == 0;
        runs.push(RunThemes { label: if baseline { "baseline".into() } else { format!("run_{r}") }, baseline, themes });
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(label: &str, names: &[&str]) -> RunThemes {
        RunThemes {
            label: label.into(),
            baseline: label == "baseline",
            themes: names
                .iter()
                .enumerate()
                .map(|(i, n)| Theme { theme_id: i + 1, name: n.to_string(), description: String::new(), member_indices: vec![] })
                .collect(),
        }
    }

    #[test]
    fn hand_worked_instance() {
        let runs = vec![run("run_0", &["ethics art", "money"]), run("baseline", &["ethics", "health"])];
        let got = brute_force_clusters(&runs, 0.35, &Stopwords::none());
        // baseline first: ethics | health, then ethics art (0.5 with ethics) | money
        assert_eq!(got.len(), 3);
        assert_eq!(got[0].members, vec![("baseline".to_string(), 1), ("run_0".to_string(), 1)]);
        assert_eq!(got[0].stability, 1.0);
        assert_eq!(got[2].members, vec![("run_0".to_string(), 2)]);
    }
}
