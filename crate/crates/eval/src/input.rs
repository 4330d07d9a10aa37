//! File formats read by the `eval` command.
//!
//! Participant CSV: a header row, then one row per participant with a group
//! label followed by the ten item scores:
//!
//! ```text
//! group,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10
//! rarely,4,2,4,1,5,2,4,2,4,2
//! ```
//!
//! Header names are not checked, only the column count (11). Summary JSON is
//! an array of `{"name"?, "n", "mean", "variance"}` objects.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::anova::GroupSummary;
use crate::error::EvalError;
use crate::sus::{sus_score, SusResponse, SUS_ITEMS};

#[derive(Debug, Clone, PartialEq)]
pub struct Participant {
    pub group: String,
    pub response: SusResponse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedSummary {
    #[serde(default)]
    pub name: Option<String>,
    pub n: u32,
    pub mean: f64,
    pub variance: f64,
}

pub fn read_participants<R: Read>(reader: R) -> Result<Vec<Participant>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != SUS_ITEMS + 1 {
            return Err(EvalError::MalformedInput(format!(
                "row {}: expected {} columns, found {}",
                row + 1,
                SUS_ITEMS + 1,
                record.len()
            )));
        }
        let items = record
            .iter()
            .skip(1)
            .map(|field| {
                field.parse::<i64>().map_err(|_| {
                    EvalError::MalformedInput(format!("row {}: `{field}` is not an integer", row + 1))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Participant { group: record[0].to_string(), response: SusResponse::new(&items)? });
    }
    Ok(out)
}

/// Groups participant scores by label, preserving first-appearance order.
pub fn scores_by_group(participants: &[Participant]) -> Vec<(String, Vec<f64>)> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for p in participants {
        let score = sus_score(&p.response);
        match groups.iter_mut().find(|(name, _)| *name == p.group) {
            Some((_, scores)) => scores.push(score),
            None => groups.push((p.group.clone(), vec![score])),
        }
    }
    groups
}

pub fn read_summaries<R: Read>(reader: R) -> Result<Vec<NamedSummary>, EvalError> {
    Ok(serde_json::from_reader(reader)?)
}

impl NamedSummary {
    pub fn to_summary(&self) -> Result<GroupSummary, EvalError> {
        GroupSummary::new(self.n, self.mean, self.variance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_participants_and_groups() {
        let csv = "group,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10\n\
                   a,3,3,3,3,3,3,3,3,3,3\n\
                   b,5,1,5,1,5,1,5,1,5,1\n\
                   a,4,2,4,2,4,2,4,2,4,2\n";
        let ps = read_participants(csv.as_bytes()).unwrap();
        assert_eq!(ps.len(), 3);
        let groups = scores_by_group(&ps);
        assert_eq!(groups, vec![("a".into(), vec![50.0, 75.0]), ("b".into(), vec![100.0])]);
    }

    #[test]
    fn rejects_short_rows_and_bad_items() {
        let short = "group,q1\na,3\n";
        assert!(matches!(read_participants(short.as_bytes()), Err(EvalError::MalformedInput(_)) | Err(EvalError::Csv(_))));
        let bad = "g,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10\na,3,3,3,3,3,3,3,3,3,7\n";
        assert!(matches!(read_participants(bad.as_bytes()), Err(EvalError::OutOfRangeItem { .. })));
        let nan = "g,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10\na,3,x,3,3,3,3,3,3,3,3\n";
        assert!(matches!(read_participants(nan.as_bytes()), Err(EvalError::MalformedInput(_))));
    }

    #[test]
    fn parses_summary_json() {
        let json = r#"[{"name":"rarely","n":20,"mean":64.38,"variance":50.32},{"n":15,"mean":80.71,"variance":42.17}]"#;
        let s = read_summaries(json.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].name.as_deref(), Some("rarely"));
        assert_eq!(s[1].to_summary().unwrap().n, 15);
    }
}
