use taforge_core::codegen::{verify_quote, QuoteStatus};
use taforge_fixtures::dataset::QuoteKind;
use taforge_fixtures::tables::{GAMING_COUNTS, PLAY_1_CHUNK_TOKENS, TEACHING_COUNTS, TEACHING_FIRST_CODES};
use taforge_fixtures::{Dataset, DatasetPlan};

#[test]
fn gaming_corpus_chunks_as_published() {
    let ds = Dataset::build(DatasetPlan::gaming());
    assert_eq!(ds.documents.len(), 13);
    assert_eq!(ds.chunks.len(), GAMING_COUNTS.chunks);
    assert_eq!(ds.slots.len(), GAMING_COUNTS.raw_codes);
    let play1: Vec<usize> = ds.chunks.iter().filter(|c| c.doc_id == "Play_1").map(|c| c.tokens).collect();
    assert_eq!(play1, PLAY_1_CHUNK_TOKENS);
    assert!(ds.chunks.iter().all(|c| c.tokens <= 2625));
}

#[test]
fn teaching_corpus_chunks_as_published() {
    let ds = Dataset::build(DatasetPlan::teaching());
    assert_eq!(ds.documents.len(), 10);
    assert_eq!(ds.chunks.len(), TEACHING_COUNTS.chunks);
    assert_eq!(ds.slots.len(), TEACHING_COUNTS.raw_codes);
    for (k, (name, quote_start)) in TEACHING_FIRST_CODES.iter().enumerate() {
        let slot = &ds.slots[k];
        assert_eq!(ds.plan.concepts[slot.concept].name, *name);
        assert!(slot.quote.starts_with(quote_start), "{}", slot.quote);
    }
    assert_eq!(ds.slots[3].chunk, 1);
}

#[test]
fn quote_statuses_match_the_plan() {
    for plan in [DatasetPlan::gaming(), DatasetPlan::teaching()] {
        let ds = Dataset::build(plan);
        for s in &ds.slots {
            let got = verify_quote(&s.quote, &ds.chunks[s.chunk].interview_chunk, 0.8);
            let want = match s.kind {
                QuoteKind::Verified => QuoteStatus::Verified,
                QuoteKind::Fuzzy => QuoteStatus::Fuzzy,
                QuoteKind::Unverified => QuoteStatus::Unverified,
            };
            assert_eq!(got, want, "{}", s.quote);
        }
    }
}

#[test]
fn builds_are_deterministic() {
    let a = Dataset::build(DatasetPlan::mini());
    let b = Dataset::build(DatasetPlan::mini());
    assert_eq!(a.raw_files, b.raw_files);
    assert_eq!(a.coding_responses, b.coding_responses);
}
