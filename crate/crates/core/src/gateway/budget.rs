use serde::{Deserialize, Serialize};

use super::types::ChatRequest;
use crate::corpus::TokenEstimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub prompt_tokens: usize,
    pub reserved_response_tokens: usize,
    pub context_limit: usize,
    /// `context_limit - prompt_tokens - reserved_response_tokens`; negative when over.
    pub headroom: i64,
    pub verdict: Verdict,
}

impl BudgetReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Pure budget check; never fails.
pub fn preflight_budget(req: &ChatRequest, est: &dyn TokenEstimator) -> BudgetReport {
    let prompt_tokens = est.estimate(&req.prompt_text());
    let cfg = &req.config;
    let headroom = cfg.context_limit as i64 - prompt_tokens as i64 - cfg.reserved_response_tokens as i64;
    let verdict = if prompt_tokens == 0 || headroom < 0 {
        Verdict::Reject
    } else {
        Verdict::Accept
    };
    BudgetReport {
        prompt_tokens,
        reserved_response_tokens: cfg.reserved_response_tokens,
        context_limit: cfg.context_limit,
        headroom,
        verdict,
    }
}
