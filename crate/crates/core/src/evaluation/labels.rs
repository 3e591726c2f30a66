use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::TaskLabel;
use crate::error::{Error, Result};
use crate::learners::{FeatureMatrix, SampleGroup};

/// What a sample is classified as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    /// NR vs TSR.
    Task,
    /// Recording session; SR sentences count when present.
    Session,
    /// Recording block.
    Block,
    /// Subject identity, all subjects pooled.
    Subject,
}

impl LabelScheme {
    pub const ALL: [LabelScheme; 4] = [LabelScheme::Task, LabelScheme::Session, LabelScheme::Block, LabelScheme::Subject];

    pub fn name(self) -> &'static str {
        match self {
            LabelScheme::Task => "task",
            LabelScheme::Session => "session",
            LabelScheme::Block => "block",
            LabelScheme::Subject => "subject",
        }
    }

    pub fn parse(s: &str) -> Result<LabelScheme> {
        LabelScheme::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "label scheme",
                name: s.to_string(),
                valid: LabelScheme::ALL.iter().map(|l| l.name().to_string()).collect(),
            })
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Replaces the labels of `m` according to `scheme`. Label ids follow the
/// sorted order of the distinct values. The task scheme keeps NR and TSR
/// rows only.
pub fn relabel(m: &FeatureMatrix, scheme: LabelScheme) -> Result<FeatureMatrix> {
    let keep: Vec<usize> = match scheme {
        LabelScheme::Task => (0..m.n_rows()).filter(|&i| m.groups[i].task != TaskLabel::SR).collect(),
        _ => (0..m.n_rows()).collect(),
    };
    let mut out = m.subset(&keep);
    let key = |g: &SampleGroup| -> String {
        match scheme {
            LabelScheme::Task => g.task.as_str().to_string(),
            LabelScheme::Session => format!("{:010}", g.session_id),
            LabelScheme::Block => format!("{:010}", g.block_id),
            LabelScheme::Subject => g.subject_id.clone(),
        }
    };
    let values: BTreeSet<String> = out.groups.iter().map(key).collect();
    if values.len() < 2 {
        return Err(Error::Data(format!(
            "{scheme} labels need at least two distinct values in {}, found {values:?}",
            m.set_name
        )));
    }
    let values: Vec<String> = values.into_iter().collect();
    out.labels = out
        .groups
        .iter()
        .map(|g| values.binary_search(&key(g)).expect("collected above"))
        .collect();
    out.label_names = values
        .into_iter()
        .map(|v| match scheme {
            LabelScheme::Session | LabelScheme::Block => v.trim_start_matches('0').to_string(),
            _ => v,
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> FeatureMatrix {
        let spec = [
            ("A", 1, 1, TaskLabel::NR),
            ("A", 1, 2, TaskLabel::TSR),
            ("B", 2, 10, TaskLabel::SR),
            ("B", 1, 2, TaskLabel::NR),
        ];
        FeatureMatrix {
            set_name: "t".into(),
            feature_names: vec!["x".into()],
            rows: vec![vec![0.0]; 4],
            labels: vec![0, 1, 2, 0],
            label_names: vec!["NR".into(), "TSR".into(), "SR".into()],
            groups: spec
                .iter()
                .enumerate()
                .map(|(i, &(s, sess, block, task))| SampleGroup {
                    subject_id: s.into(),
                    session_id: sess,
                    block_id: block,
                    sentence_id: format!("x{i}"),
                    task,
                })
                .collect(),
        }
    }

    #[test]
    fn schemes() {
        let t = relabel(&m(), LabelScheme::Task).unwrap();
        assert_eq!((t.labels, t.label_names), (vec![0, 1, 0], vec!["NR".to_string(), "TSR".into()]));
        let b = relabel(&m(), LabelScheme::Block).unwrap();
        // Numeric, not lexicographic, order: 1 < 2 < 10.
        assert_eq!((b.labels, b.label_names), (vec![0, 1, 2, 1], vec!["1".to_string(), "2".into(), "10".into()]));
        let s = relabel(&m(), LabelScheme::Session).unwrap();
        assert_eq!(s.labels, vec![0, 0, 1, 0]);
        let p = relabel(&m(), LabelScheme::Subject).unwrap();
        assert_eq!((p.labels, p.label_names), (vec![0, 0, 1, 1], vec!["A".to_string(), "B".into()]));
    }

    #[test]
    fn single_valued_metadata_is_an_error() {
        let mut x = m();
        x.groups.iter_mut().for_each(|g| g.session_id = 1);
        assert_eq!(relabel(&x, LabelScheme::Session).unwrap_err().kind(), "data");
        assert_eq!(LabelScheme::parse("blocks").unwrap_err().kind(), "unknown_name");
    }
}
