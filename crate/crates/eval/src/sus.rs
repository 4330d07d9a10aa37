//! System Usability Scale scoring.
//!
//! Ten Likert items in `1..=5`. Items 1, 3, 5, 7, 9 are positively worded and
//! contribute `score - 1`; items 2, 4, 6, 8, 10 are negatively worded and
//! contribute `5 - score`. The adjusted sum (0..=40) is scaled by 2.5.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

pub const SUS_ITEMS: usize = 10;

/// One participant's answers, in questionnaire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct SusResponse {
    items: [u8; SUS_ITEMS],
}

impl SusResponse {
    pub fn new(items: &[i64]) -> Result<Self, EvalError> {
        if items.len() != SUS_ITEMS {
            return Err(EvalError::WrongItemCount(items.len()));
        }
        let mut out = [0u8; SUS_ITEMS];
        for (index, (&value, slot)) in items.iter().zip(out.iter_mut()).enumerate() {
            if !(1..=5).contains(&value) {
                return Err(EvalError::OutOfRangeItem { index: index + 1, value });
            }
            *slot = value as u8;
        }
        Ok(Self { items: out })
    }

    pub fn items(&self) -> &[u8; SUS_ITEMS] {
        &self.items
    }

    /// Adjusted contribution of each item, 0..=4.
    pub fn adjusted(&self) -> [u8; SUS_ITEMS] {
        let mut out = [0u8; SUS_ITEMS];
        for (i, (&raw, slot)) in self.items.iter().zip(out.iter_mut()).enumerate() {
            // index 0 is item 1, which is positively worded
            *slot = if i % 2 == 0 { raw - 1 } else { 5 - raw };
        }
        out
    }
}

impl TryFrom<Vec<i64>> for SusResponse {
    type Error = EvalError;

    fn try_from(value: Vec<i64>) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl From<SusResponse> for Vec<i64> {
    fn from(r: SusResponse) -> Self {
        r.items.iter().map(|&v| i64::from(v)).collect()
    }
}

/// SUS score on the 0..=100 scale.
pub fn sus_score(r: &SusResponse) -> f64 {
    let total: u32 = r.adjusted().iter().map(|&v| u32::from(v)).sum();
    2.5 * f64::from(total)
}

/// Mean SUS score of a cohort. `None` for an empty cohort.
pub fn sus_mean(rs: &[SusResponse]) -> Option<f64> {
    if rs.is_empty() {
        return None;
    }
    Some(rs.iter().map(sus_score).sum::<f64>() / rs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp(items: [i64; 10]) -> SusResponse {
        SusResponse::new(&items).unwrap()
    }

    #[test]
    fn maximal_midpoint_and_alternating() {
        assert_eq!(sus_score(&resp([5, 1, 5, 1, 5, 1, 5, 1, 5, 1])), 100.0);
        assert_eq!(sus_score(&resp([3; 10])), 50.0);
        assert_eq!(sus_score(&resp([4, 2, 4, 2, 4, 2, 4, 2, 4, 2])), 75.0);
        assert_eq!(sus_score(&resp([1, 5, 1, 5, 1, 5, 1, 5, 1, 5])), 0.0);
    }

    #[test]
    fn rejects_bad_items() {
        assert!(matches!(
            SusResponse::new(&[3, 3, 3, 0, 3, 3, 3, 3, 3, 3]),
            Err(EvalError::OutOfRangeItem { index: 4, value: 0 })
        ));
        assert!(matches!(
            SusResponse::new(&[3, 3, 3, 3, 3, 3, 3, 3, 3, 6]),
            Err(EvalError::OutOfRangeItem { index: 10, value: 6 })
        ));
        assert!(matches!(SusResponse::new(&[3; 9]), Err(EvalError::WrongItemCount(9))));
    }

    #[test]
    fn mean_of_single_and_empty() {
        assert_eq!(sus_mean(&[resp([3; 10])]), Some(50.0));
        assert_eq!(sus_mean(&[]), None);
    }

    #[test]
    fn item_polarity_steps() {
        let base = [3i64; 10];
        let s0 = sus_score(&resp(base));
        for i in 0..10 {
            let mut up = base;
            up[i] += 1;
            let delta = sus_score(&resp(up)) - s0;
            if i % 2 == 0 {
                assert_eq!(delta, 2.5, "positive item {}", i + 1);
            } else {
                assert_eq!(delta, -2.5, "negative item {}", i + 1);
            }
        }
    }

    #[test]
    fn serde_round_trip_validates() {
        let r: SusResponse = serde_json::from_str("[4,2,4,2,4,2,4,2,4,2]").unwrap();
        assert_eq!(sus_score(&r), 75.0);
        assert!(serde_json::from_str::<SusResponse>("[4,2,4,2,4,2,4,2,4,9]").is_err());
    }
}
