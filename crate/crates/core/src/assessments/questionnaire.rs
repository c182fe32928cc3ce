use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Domain {
    Usability,
    Engagement,
    Safety,
}

pub const QUESTION_COUNT: u8 = 7;

/// Domain a question belongs to; `None` outside 1..=7.
pub fn question_domain(question_id: u8) -> Option<Domain> {
    match question_id {
        1..=4 => Some(Domain::Usability),
        5 | 6 => Some(Domain::Engagement),
        7 => Some(Domain::Safety),
        _ => None,
    }
}

/// Q6 asks whether learning was difficult, so agreement is the bad outcome.
pub fn is_reverse_scored(question_id: u8) -> bool {
    question_id == 6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertResponse {
    pub question_id: u8,
    pub value: u8,
}

impl LikertResponse {
    pub fn new(question_id: u8, value: u8) -> Result<Self> {
        let r = Self { question_id, value };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if question_domain(self.question_id).is_none() {
            return Err(Error::Structure(format!("unknown question {}", self.question_id)));
        }
        if !(1..=5).contains(&self.value) {
            return Err(Error::Structure(format!(
                "question {}: value {} outside 1..=5",
                self.question_id, self.value
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        question_domain(self.question_id).expect("validated question id")
    }

    /// Value with reverse-scored items flipped onto the common direction.
    pub fn scored(&self) -> u8 {
        if is_reverse_scored(self.question_id) {
            6 - self.value
        } else {
            self.value
        }
    }
}

/// Mean scored value per domain. Every question must be answered exactly once.
pub fn questionnaire_domain_scores(responses: &[LikertResponse]) -> Result<BTreeMap<Domain, f64>> {
    let mut seen = [false; QUESTION_COUNT as usize];
    for r in responses {
        r.validate()?;
        let slot = &mut seen[(r.question_id - 1) as usize];
        if *slot {
            return Err(Error::Structure(format!("question {} answered twice", r.question_id)));
        }
        *slot = true;
    }
    let missing: Vec<String> = (1..=QUESTION_COUNT)
        .filter(|q| !seen[(*q - 1) as usize])
        .map(|q| q.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Structure(format!("missing questions: {}", missing.join(", "))));
    }
    let mut sums: BTreeMap<Domain, (f64, f64)> = BTreeMap::new();
    for r in responses {
        let e = sums.entry(r.domain()).or_default();
        e.0 += r.scored() as f64;
        e.1 += 1.0;
    }
    Ok(sums.into_iter().map(|(d, (s, n))| (d, s / n)).collect())
}
