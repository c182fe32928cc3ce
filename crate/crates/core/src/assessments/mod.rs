//! Clinical assessment records: Barthel index scoring, the usability
//! questionnaire and patient profiles, with TOML import and export.

mod barthel;
mod questionnaire;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use barthel::{barthel_total, validate_barthel_item, Activity, BarthelAssessment, BarthelItem, BARTHEL_MAX};
pub use questionnaire::{
    is_reverse_scored, question_domain, questionnaire_domain_scores, Domain, LikertResponse, QUESTION_COUNT,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientProfile {
    pub patient_id: String,
    pub handedness: Handedness,
    pub stroke_description: String,
    pub functional_capacity: String,
    #[serde(default)]
    pub goals: Vec<String>,
    #[serde(default)]
    pub feedback: Vec<FeedbackEntry>,
}

/// One patient's assessment document: Barthel scores keyed by activity
/// name, optionally with the patient's profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PatientProfile>,
    #[serde(default)]
    pub barthel_date: Option<NaiveDate>,
    pub barthel: BTreeMap<Activity, u32>,
}

impl AssessmentDocument {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Structure(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| Error::Structure(format!("{}: {}", e.path(), e.inner())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Structure(e.to_string()))
    }

    pub fn barthel_assessment(&self) -> Result<BarthelAssessment> {
        let items = self
            .barthel
            .iter()
            .map(|(activity, score)| BarthelItem {
                activity: *activity,
                score: *score,
            })
            .collect();
        let id = self.profile.as_ref().map_or("", |p| p.patient_id.as_str());
        BarthelAssessment::new(id, self.barthel_date, items)
    }
}

pub const PATIENT_A_DOC: &str = include_str!("../../fixtures/assessments/patient_a.toml");
pub const PATIENT_B_DOC: &str = include_str!("../../fixtures/assessments/patient_b.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_documents() {
        let a = AssessmentDocument::from_toml(PATIENT_A_DOC).unwrap();
        let b = AssessmentDocument::from_toml(PATIENT_B_DOC).unwrap();
        assert_eq!(a.barthel_assessment().unwrap().total, 70);
        assert_eq!(b.barthel_assessment().unwrap().total, 95);
        let (pa, pb) = (a.profile.unwrap(), b.profile.unwrap());
        assert_eq!(pa.handedness, Handedness::Right);
        assert_eq!(pa.goals.len(), 2);
        assert_eq!(pb.goals.len(), 3);
        assert_eq!(pb.feedback.len(), 2);
    }

    #[test]
    fn toml_round_trip() {
        let a = AssessmentDocument::from_toml(PATIENT_A_DOC).unwrap();
        let back = AssessmentDocument::from_toml(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn scores_without_profile() {
        let text = "[barthel]\nDINING = 10\nTRANSFER = 15\nGROOMING = 5\nTOILET = 10\nBATHING = 5\nMOBILITY = 15\nSTAIRS = 10\nDRESSING = 10\nBOWELS = 10\nBLADDER = 10\n";
        let doc = AssessmentDocument::from_toml(text).unwrap();
        assert_eq!(doc.barthel_assessment().unwrap().total, 100);
    }

    #[test]
    fn off_ladder_document_rejected() {
        let text = PATIENT_A_DOC.replace("GROOMING = 5", "GROOMING = 10");
        assert_ne!(text, PATIENT_A_DOC);
        let doc = AssessmentDocument::from_toml(&text).unwrap();
        assert!(matches!(doc.barthel_assessment(), Err(Error::InvalidScore { activity: "GROOMING", .. })));
    }

    #[test]
    fn unknown_activity_names_path() {
        let text = PATIENT_A_DOC.replace("STAIRS", "LADDERS");
        let err = AssessmentDocument::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("barthel"), "{err}");
    }
}
