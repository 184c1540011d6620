//! Relevance (approximation ratio, recall) and diversity (entropy, inverse
//! Simpson, distinct count) measurements of a returned set.

use std::collections::HashSet;

use serde::Serialize;

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::oracle::scan_topk;
use crate::selection::Corpus;
use crate::similarity::QueryScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn ln_divisor(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

/// `Σ_{v∈S} σ(q,v) / Σ_{v∈O} σ(q,v)`. An all-zero denominator gives 1 when the
/// numerator is zero too.
pub fn approx_ratio_against(scorer: &QueryScorer<'_>, selected: &[usize], optimal: &[usize]) -> Result<f64> {
    let num = sum_similarity(scorer, selected)?;
    let den = sum_similarity(scorer, optimal)?;
    if den == 0.0 {
        return if num == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::param("optimal similarity mass is zero but the selection's is not"))
        };
    }
    Ok(num / den)
}

/// Approximation ratio against the exact top-`k` of the whole corpus.
pub fn approx_ratio(corpus: &Corpus<'_>, query: &[f32], selected: &[usize], k: usize) -> Result<f64> {
    let scorer = corpus.scorer(query)?;
    let optimal = exact_optimal(&scorer, corpus.len(), k)?;
    approx_ratio_against(&scorer, selected, &optimal)
}

fn exact_optimal(scorer: &QueryScorer<'_>, n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    Ok(scan_topk(scorer, 0..n, k)?.into_iter().map(|e| e.id).collect())
}

fn sum_similarity(scorer: &QueryScorer<'_>, ids: &[usize]) -> Result<f64> {
    ids.iter().map(|&i| scorer.score(i)).sum()
}

/// `|S ∩ O| / |O|`.
pub fn recall(selected: &[usize], optimal: &[usize]) -> Result<f64> {
    if optimal.is_empty() {
        return Err(Error::Empty("reference set"));
    }
    let o: HashSet<usize> = optimal.iter().copied().collect();
    let hits = selected.iter().collect::<HashSet<_>>().into_iter().filter(|i| o.contains(i)).count();
    Ok(hits as f64 / o.len() as f64)
}

/// Attribute histogram of `ids`, optionally restricted to the attributes of one
/// class. Multi-attribute vectors contribute once per attribute.
pub fn histogram(ids: &[usize], attrs: &AttributeTable, restrict: Option<usize>) -> Result<Vec<usize>> {
    attrs.check_ids(ids)?;
    let allowed: Option<&[usize]> = match restrict {
        None => None,
        Some(class) => {
            let classes = attrs.classes().ok_or_else(|| Error::Config("attribute table has no classes".into()))?;
            Some(
                classes
                    .get(class)
                    .ok_or_else(|| Error::param(format!("class {class} out of range ({} classes)", classes.len())))?,
            )
        }
    };
    let mut counts = vec![0usize; attrs.num_attributes()];
    for &id in ids {
        for &a in attrs.of(id) {
            if allowed.is_none_or(|members| members.binary_search(&a).is_ok()) {
                counts[a] += 1;
            }
        }
    }
    Ok(counts)
}

/// Shannon entropy of a histogram, `p_ℓ = count_ℓ / Σ count`. Empty → 0.
pub fn entropy_of_counts(counts: &[usize], base: LogBase) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.ln()
        })
        .sum();
    // clears the -0.0 of a single bucket
    h.max(0.0) / base.ln_divisor()
}

/// `1 / Σ p_ℓ²`. Empty → 0.
pub fn inverse_simpson_of_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let s: f64 = counts.iter().map(|&c| (c as f64 / t).powi(2)).sum();
    1.0 / s
}

pub fn entropy(ids: &[usize], attrs: &AttributeTable, restrict: Option<usize>, base: LogBase) -> Result<f64> {
    Ok(entropy_of_counts(&histogram(ids, attrs, restrict)?, base))
}

pub fn inverse_simpson(ids: &[usize], attrs: &AttributeTable, restrict: Option<usize>) -> Result<f64> {
    Ok(inverse_simpson_of_counts(&histogram(ids, attrs, restrict)?))
}

/// Number of attributes with at least one selected vector.
pub fn distinct_count(ids: &[usize], attrs: &AttributeTable) -> Result<usize> {
    Ok(histogram(ids, attrs, None)?.iter().filter(|&&c| c > 0).count())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub entropy: f64,
    pub inverse_simpson: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub approx_ratio: f64,
    pub recall: f64,
    pub entropy: f64,
    pub inverse_simpson: f64,
    pub distinct_count: usize,
    pub per_class: Option<Vec<ClassMetrics>>,
}

impl MetricsReport {
    /// All metrics of `selected` for `query`, against the exact top-`k`
    /// regardless of which oracle produced the selection.
    pub fn compute(corpus: &Corpus<'_>, query: &[f32], selected: &[usize], k: usize, base: LogBase) -> Result<Self> {
        let scorer = corpus.scorer(query)?;
        let optimal = exact_optimal(&scorer, corpus.len(), k)?;
        let counts = histogram(selected, corpus.attrs, None)?;
        let per_class = match corpus.attrs.classes() {
            Some(classes) if classes.len() > 1 => Some(
                (0..classes.len())
                    .map(|class| {
                        let h = histogram(selected, corpus.attrs, Some(class))?;
                        Ok(ClassMetrics {
                            class,
                            entropy: entropy_of_counts(&h, base),
                            inverse_simpson: inverse_simpson_of_counts(&h),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        Ok(Self {
            approx_ratio: approx_ratio_against(&scorer, selected, &optimal)?,
            recall: recall(selected, &optimal)?,
            entropy: entropy_of_counts(&counts, base),
            inverse_simpson: inverse_simpson_of_counts(&counts),
            distinct_count: counts.iter().filter(|&&c| c > 0).count(),
            per_class,
        })
    }
}

/// Mean, sample standard deviation and standard error of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { count: 0, mean: f64::NAN, stddev: f64::NAN, stderr: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev =
            if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        Self { count: n, mean, stddev, stderr: stddev / (n as f64).sqrt() }
    }
}
