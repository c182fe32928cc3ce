use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Activity {
    Dining,
    Transfer,
    Grooming,
    Toilet,
    Bathing,
    Mobility,
    Stairs,
    Dressing,
    Bowels,
    Bladder,
}

impl Activity {
    pub const ALL: [Activity; 10] = [
        Activity::Dining,
        Activity::Transfer,
        Activity::Grooming,
        Activity::Toilet,
        Activity::Bathing,
        Activity::Mobility,
        Activity::Stairs,
        Activity::Dressing,
        Activity::Bowels,
        Activity::Bladder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activity::Dining => "DINING",
            Activity::Transfer => "TRANSFER",
            Activity::Grooming => "GROOMING",
            Activity::Toilet => "TOILET",
            Activity::Bathing => "BATHING",
            Activity::Mobility => "MOBILITY",
            Activity::Stairs => "STAIRS",
            Activity::Dressing => "DRESSING",
            Activity::Bowels => "BOWELS",
            Activity::Bladder => "BLADDER",
        }
    }

    pub fn allowed(self) -> &'static [u32] {
        match self {
            Activity::Grooming | Activity::Bathing => &[0, 5],
            Activity::Transfer | Activity::Mobility => &[0, 5, 10, 15],
            _ => &[0, 5, 10],
        }
    }

    pub fn max_score(self) -> u32 {
        *self.allowed().last().expect("non-empty ladder")
    }

    /// Finnish form label for the activity.
    pub fn label_fi(self) -> &'static str {
        match self {
            Activity::Dining => "Ruokailu",
            Activity::Transfer => "Siirtyminen vuoteesta tuoliin",
            Activity::Grooming => "Siisteys: hiukset, hampaat ym.",
            Activity::Toilet => "WC:ssä käynti",
            Activity::Bathing => "Kylpeminen",
            Activity::Mobility => "Liikkuminen",
            Activity::Stairs => "Kävely portaissa",
            Activity::Dressing => "Pukeutuminen ja riisuutuminen",
            Activity::Bowels => "Suoli",
            Activity::Bladder => "Rakko",
        }
    }

    /// Finnish ladder labels, parallel to [`Activity::allowed`].
    pub fn ladder_fi(self) -> &'static [&'static str] {
        match self {
            Activity::Dining => &["Täysin autettava", "Osittain autettava, esim. ruoan leikkaus", "Itsenäinen"],
            Activity::Transfer => &[
                "Vuodepotilas",
                "Pystyy istumaan, täysin autettava siirroissa",
                "Tarvitsee vähän apua",
                "Itsenäinen",
            ],
            Activity::Grooming | Activity::Bathing => &["Tarvitsee apua", "Itsenäinen"],
            Activity::Toilet => &["Täysin autettava", "Tarvitsee vähän apua", "Itsenäinen"],
            Activity::Mobility => &[
                "Vuodepotilas",
                "Vain pyörätuolilla 50 m",
                "Tarvitsee apua, kävelee 50 m",
                "Kävelee itsenäisesti 50 m",
            ],
            Activity::Stairs => &["Ei", "Tarvitsee apua", "Itsenäinen"],
            Activity::Dressing => &["Täysin autettava", "Tarvitsee apua", "Itsenäinen"],
            Activity::Bowels => &["Täysin inkontinentti", "Ajoittain inkontinentti", "Normaali"],
            Activity::Bladder => &[
                "Täysin inkontinentti tai katetri",
                "Ajoittain inkontinentti, ei katetria",
                "Kontinentti",
            ],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maximum Barthel total.
pub const BARTHEL_MAX: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarthelItem {
    pub activity: Activity,
    pub score: u32,
}

impl BarthelItem {
    /// Finnish ladder label matching the score, if the score is valid.
    pub fn label_fi(&self) -> Option<&'static str> {
        let i = self.activity.allowed().iter().position(|s| *s == self.score)?;
        Some(self.activity.ladder_fi()[i])
    }
}

pub fn validate_barthel_item(activity: Activity, score: u32) -> Result<()> {
    let allowed = activity.allowed();
    if allowed.contains(&score) {
        Ok(())
    } else {
        Err(Error::InvalidScore {
            activity: activity.name(),
            score,
            allowed,
        })
    }
}

/// Sum of one valid item per activity.
pub fn barthel_total(items: &[BarthelItem]) -> Result<u32> {
    let mut seen = BTreeMap::new();
    for item in items {
        validate_barthel_item(item.activity, item.score)?;
        if seen.insert(item.activity, item.score).is_some() {
            return Err(Error::Structure(format!("duplicate activity {}", item.activity)));
        }
    }
    let missing: Vec<&str> = Activity::ALL
        .iter()
        .filter(|a| !seen.contains_key(a))
        .map(|a| a.name())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Structure(format!("missing activities: {}", missing.join(", "))));
    }
    Ok(seen.values().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarthelAssessment {
    pub patient_id: String,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    pub items: Vec<BarthelItem>,
    pub total: u32,
}

impl BarthelAssessment {
    pub fn new(patient_id: impl Into<String>, date: Option<NaiveDate>, items: Vec<BarthelItem>) -> Result<Self> {
        let total = barthel_total(&items)?;
        Ok(Self {
            patient_id: patient_id.into(),
            date,
            items,
            total,
        })
    }

    /// Build from scores in [`Activity::ALL`] order.
    pub fn from_vector(patient_id: impl Into<String>, scores: [u32; 10]) -> Result<Self> {
        let items = Activity::ALL
            .into_iter()
            .zip(scores)
            .map(|(activity, score)| BarthelItem { activity, score })
            .collect();
        Self::new(patient_id, None, items)
    }

    /// Check a deserialized record: items valid and the stored total agrees.
    pub fn validate(&self) -> Result<()> {
        let total = barthel_total(&self.items)?;
        if total != self.total {
            return Err(Error::Structure(format!(
                "total {} does not match item sum {total}",
                self.total
            )));
        }
        Ok(())
    }

    pub fn score(&self, activity: Activity) -> Option<u32> {
        self.items.iter().find(|i| i.activity == activity).map(|i| i.score)
    }
}
