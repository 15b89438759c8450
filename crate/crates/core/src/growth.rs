//! Polynomial-versus-exponential growth classification on top of the
//! boundedness decider, with cumulative word counting for empirical
//! validation.

use alloc::string::String;
use alloc::vec::Vec;

use crate::models::{enumerate_language, Model, SimCaps, Tri};
use crate::unbounded::{decide_predicate, DecideError, DecisionCaps, PredicateSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthClass {
    Polynomial,
    Exponential,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub class: GrowthClass,
    /// For exponential languages, a non-commuting pump-side word pair.
    pub witness: Vec<String>,
    /// Cumulative counts g(≤m); `None` where enumeration capped out.
    pub counts: Vec<Option<u64>>,
    /// Soft empirical confirmation that the counts clear the exponential
    /// threshold at the largest exact m ≥ 8, when that data exists.
    pub empirical: Option<bool>,
}

/// Number of accepted words of length at most m, for each m ≤ m_max.
pub fn count_words(model: &Model, m_max: usize) -> Vec<Option<u64>> {
    (0..=m_max)
        .map(|m| {
            let r = enumerate_language(model, m, &SimCaps::for_len(m));
            r.exact.then_some(r.words.len() as u64)
        })
        .collect()
}

/// Whether the cumulative counts reach 1.3^m at the largest exact m ≥ 8,
/// checked in integers as g·10^m ≥ 13^m.
pub fn clears_exponential_threshold(counts: &[Option<u64>]) -> Option<bool> {
    let m = (8..counts.len()).rev().find(|&m| counts[m].is_some())?;
    let g = counts[m]? as u128;
    Some(g * 10u128.pow(m as u32) >= 13u128.pow(m as u32))
}

/// Growth dichotomy: a language has polynomial growth exactly when it is
/// bounded, so classification delegates to the boundedness decider.
pub fn classify_growth(
    model: &Model,
    caps: &DecisionCaps,
) -> Result<GrowthReport, DecideError> {
    let report = decide_predicate(model, &PredicateSpec::notbounded(), caps)?;
    let (class, witness) = match report.outcome {
        Tri::No => (GrowthClass::Polynomial, Vec::new()),
        Tri::Yes => (
            GrowthClass::Exponential,
            report.witness.map(|w| w.words).unwrap_or_default(),
        ),
        Tri::Unknown => (GrowthClass::Unknown, Vec::new()),
    };
    let m_max = if class == GrowthClass::Exponential { 12 } else { 8 };
    let counts = count_words(model, m_max);
    let empirical = if class == GrowthClass::Exponential {
        clears_exponential_threshold(&counts)
    } else {
        None
    };
    Ok(GrowthReport {
        class,
        witness,
        counts,
        empirical,
    })
}

/// Sample check of linear factor embeddability: every w₁ must appear as a
/// factor of its w₂ with |w₂| at most c·|w₁|.
pub fn check_linembed(sample_pairs: &[(String, String)], c: usize) -> bool {
    sample_pairs
        .iter()
        .all(|(w1, w2)| w2.contains(w1.as_str()) && w2.len() <= c * w1.len())
}
