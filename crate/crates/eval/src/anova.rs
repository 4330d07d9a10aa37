//! Classical one-way ANOVA (equal-variance, not Welch).

use serde::{Deserialize, Serialize, Serializer};

use crate::error::EvalError;
use crate::fdist::f_survival;

/// Size, mean and sample variance (n - 1 denominator) of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: u32,
    pub mean: f64,
    pub variance: f64,
}

impl GroupSummary {
    pub fn new(n: u32, mean: f64, variance: f64) -> Result<Self, EvalError> {
        let s = Self { n, mean, variance };
        s.validate()?;
        Ok(s)
    }

    pub fn from_observations(obs: &[f64]) -> Result<Self, EvalError> {
        if obs.len() < 2 {
            return Err(EvalError::InsufficientData(format!(
                "group has {} observations, need at least 2",
                obs.len()
            )));
        }
        let n = obs.len() as f64;
        let mean = obs.iter().sum::<f64>() / n;
        let variance = obs.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self::new(obs.len() as u32, mean, variance)
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.n < 2 {
            return Err(EvalError::InsufficientData(format!(
                "group has n = {}, need at least 2",
                self.n
            )));
        }
        if !self.mean.is_finite() {
            return Err(EvalError::InvalidSummary(format!("mean {} is not finite", self.mean)));
        }
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(EvalError::InvalidSummary(format!(
                "variance {} must be finite and non-negative",
                self.variance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaResult {
    /// `+inf` when there is no within-group spread but the means differ.
    #[serde(serialize_with = "serialize_f_statistic")]
    pub f: f64,
    pub df_between: u32,
    pub df_within: u32,
    pub p: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub grand_mean: f64,
}

// JSON has no infinity literal.
fn serialize_f_statistic<S: Serializer>(f: &f64, s: S) -> Result<S::Ok, S::Error> {
    if f.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*f)
    }
}

/// Summaries are the canonical input; raw data is reduced to them first.
pub fn anova_from_summary(groups: &[GroupSummary]) -> Result<AnovaResult, EvalError> {
    if groups.len() < 2 {
        return Err(EvalError::InsufficientData(format!(
            "{} group(s) given, need at least 2",
            groups.len()
        )));
    }
    for g in groups {
        g.validate()?;
    }
    let total_n: u32 = groups.iter().map(|g| g.n).sum();
    let df_between = groups.len() as u32 - 1;
    let df_within = total_n - groups.len() as u32;

    let grand_mean =
        groups.iter().map(|g| f64::from(g.n) * g.mean).sum::<f64>() / f64::from(total_n);
    let ss_between: f64 = groups
        .iter()
        .map(|g| f64::from(g.n) * (g.mean - grand_mean).powi(2))
        .sum();
    let ss_within: f64 = groups.iter().map(|g| f64::from(g.n - 1) * g.variance).sum();

    let (f, p) = if ss_within > 0.0 {
        let f = (ss_between / f64::from(df_between)) / (ss_within / f64::from(df_within));
        (f, f_survival(f, df_between, df_within))
    } else if ss_between > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        // every observation identical: no evidence of a difference
        (0.0, 1.0)
    };

    Ok(AnovaResult { f, df_between, df_within, p, ss_between, ss_within, grand_mean })
}

pub fn anova_from_raw<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult, EvalError> {
    if groups.len() < 2 {
        return Err(EvalError::InsufficientData(format!(
            "{} group(s) given, need at least 2",
            groups.len()
        )));
    }
    let summaries = groups
        .iter()
        .map(|g| GroupSummary::from_observations(g.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    anova_from_summary(&summaries)
}
