//! Grouping HDBSCAN labels into labeled subtopics; noise becomes "Other".

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::ItemId;
use crate::error::{CoreError, Result};
use crate::hdbscan::PointLabel;

pub const NOISE_LABEL: &str = "Other";

/// `"<topic>.<index>"`, both zero-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubtopicId(pub String);

impl SubtopicId {
    pub fn new(topic: usize, index: usize) -> Self {
        SubtopicId(format!("{topic}.{index}"))
    }

    pub fn topic(&self) -> Option<usize> {
        self.0.split('.').next()?.parse().ok()
    }

    /// Numeric `(topic, index)` ordering; malformed ids sort last.
    pub fn sort_key(&self) -> (usize, usize) {
        let mut parts = self.0.split('.').map(|p| p.parse().unwrap_or(usize::MAX));
        (parts.next().unwrap_or(usize::MAX), parts.next().unwrap_or(usize::MAX))
    }
}

impl fmt::Display for SubtopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SubtopicId {
    fn from(s: &str) -> Self {
        SubtopicId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtopic {
    pub id: SubtopicId,
    pub topic_id: usize,
    pub label: String,
    pub member_ids: Vec<ItemId>,
    pub is_noise_bucket: bool,
}

/// One subtopic per cluster, largest first (ties by smallest member id), with
/// noise appended as a single "Other" bucket when present.
pub fn collect_subtopics<F>(
    topic_id: usize,
    members: &[ItemId],
    labels: &[PointLabel],
    mut label: F,
) -> Result<Vec<Subtopic>>
where
    F: FnMut(&[ItemId]) -> Result<String>,
{
    if members.len() != labels.len() {
        return Err(CoreError::input(format!(
            "{} labels for {} topic members",
            labels.len(),
            members.len()
        )));
    }
    let mut groups: BTreeMap<usize, Vec<ItemId>> = BTreeMap::new();
    let mut noise = Vec::new();
    for (id, l) in members.iter().zip(labels) {
        match l {
            PointLabel::Cluster(c) => groups.entry(*c).or_default().push(id.clone()),
            PointLabel::Noise => noise.push(id.clone()),
        }
    }
    let mut clusters: Vec<Vec<ItemId>> = groups.into_values().collect();
    for c in &mut clusters {
        c.sort();
    }
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));

    let mut out = Vec::with_capacity(clusters.len() + 1);
    for (index, member_ids) in clusters.into_iter().enumerate() {
        out.push(Subtopic {
            id: SubtopicId::new(topic_id, index),
            topic_id,
            label: label(&member_ids)?,
            member_ids,
            is_noise_bucket: false,
        });
    }
    if !noise.is_empty() {
        noise.sort();
        out.push(Subtopic {
            id: SubtopicId::new(topic_id, out.len()),
            topic_id,
            label: NOISE_LABEL.to_owned(),
            member_ids: noise,
            is_noise_bucket: true,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<ItemId> {
        (0..n).map(|i| ItemId(format!("I{i:03}"))).collect()
    }

    #[test]
    fn ordered_by_size_with_noise_last() {
        let members = ids(62);
        let mut labels = vec![PointLabel::Cluster(0); 12];
        labels.extend(vec![PointLabel::Cluster(1); 40]);
        labels.extend(vec![PointLabel::Cluster(2); 7]);
        labels.extend(vec![PointLabel::Noise; 3]);
        let subs = collect_subtopics(2, &members, &labels, |m| Ok(format!("n{}", m.len()))).unwrap();
        let sizes: Vec<usize> = subs.iter().map(|s| s.member_ids.len()).collect();
        assert_eq!(sizes, vec![40, 12, 7, 3]);
        assert_eq!(subs[0].id.0, "2.0");
        assert_eq!(subs[3].label, NOISE_LABEL);
        assert!(subs[3].is_noise_bucket);
        assert_eq!(sizes.iter().sum::<usize>(), 62);
    }

    #[test]
    fn no_noise_no_other_bucket() {
        let labels = vec![PointLabel::Cluster(0); 5];
        let subs = collect_subtopics(0, &ids(5), &labels, |_| Ok("x".into())).unwrap();
        assert_eq!(subs.len(), 1);
        assert!(!subs[0].is_noise_bucket);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(collect_subtopics(0, &ids(2), &[PointLabel::Noise], |_| Ok(String::new())).is_err());
    }

    #[test]
    fn subtopic_id_topic_parse() {
        assert_eq!(SubtopicId::from("12.3").topic(), Some(12));
    }
}
