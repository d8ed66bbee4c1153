use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LABEL_COLUMN;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Chromatin,
    Tf,
    Motif,
    Sequence,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 4] = [
        FeatureGroup::Chromatin,
        FeatureGroup::Tf,
        FeatureGroup::Motif,
        FeatureGroup::Sequence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Chromatin => "chromatin",
            FeatureGroup::Tf => "tf",
            FeatureGroup::Motif => "motif",
            FeatureGroup::Sequence => "sequence",
        }
    }

    /// Column count of this group in the default 45-feature schema.
    pub fn default_count(self) -> usize {
        match self {
            FeatureGroup::Chromatin => 20,
            FeatureGroup::Tf => 11,
            FeatureGroup::Motif => 11,
            FeatureGroup::Sequence => 3,
        }
    }

    /// Sequence-derived groups are genomic; measured occupancy and chromatin
    /// signals are epigenomic.
    pub fn default_category(self) -> Category {
        match self {
            FeatureGroup::Motif | FeatureGroup::Sequence => Category::Genomic,
            FeatureGroup::Chromatin | FeatureGroup::Tf => Category::Epigenomic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Genomic,
    Epigenomic,
}

/// Column subset used for training: everything, or one category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    All,
    Genomic,
    Epigenomic,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::All, FeatureSet::Genomic, FeatureSet::Epigenomic];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::All => "all",
            FeatureSet::Genomic => "genomic",
            FeatureSet::Epigenomic => "epigenomic",
        }
    }

    fn admits(self, category: Category) -> bool {
        match self {
            FeatureSet::All => true,
            FeatureSet::Genomic => category == Category::Genomic,
            FeatureSet::Epigenomic => category == Category::Epigenomic,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(FeatureSet::All),
            "genomic" => Ok(FeatureSet::Genomic),
            "epigenomic" => Ok(FeatureSet::Epigenomic),
            other => Err(Error::Config(format!(
                "unknown category '{other}' (expected all, genomic or epigenomic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feature {
    pub name: String,
    pub group: FeatureGroup,
}

/// Ordered feature columns with their groups, plus the group → category map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawManifest")]
pub struct FeatureManifest {
    features: Vec<Feature>,
    categories: BTreeMap<FeatureGroup, Category>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    features: Vec<Feature>,
    categories: BTreeMap<FeatureGroup, Category>,
}

impl TryFrom<RawManifest> for FeatureManifest {
    type Error = Error;

    fn try_from(raw: RawManifest) -> Result<Self> {
        FeatureManifest::new(raw.features, raw.categories)
    }
}

impl Default for FeatureManifest {
    /// The 45-column schema: `chromatin_01…chromatin_20`, `tf_01…tf_11`,
    /// `motif_01…motif_11`, `sequence_01…sequence_03`.
    fn default() -> Self {
        let features = FeatureGroup::ALL
            .iter()
            .flat_map(|&g| {
                (1..=g.default_count()).map(move |i| Feature {
                    name: format!("{}_{:02}", g.as_str(), i),
                    group: g,
                })
            })
            .collect();
        let categories = FeatureGroup::ALL.iter().map(|&g| (g, g.default_category())).collect();
        FeatureManifest { features, categories }
    }
}

impl FeatureManifest {
    pub fn new(features: Vec<Feature>, categories: BTreeMap<FeatureGroup, Category>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, f) in features.iter().enumerate() {
            if f.name.is_empty() || f.name == LABEL_COLUMN {
                return Err(Error::Schema(format!("feature {} has reserved or empty name '{}'", i + 1, f.name)));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name '{}'", f.name)));
            }
            if !categories.contains_key(&f.group) {
                return Err(Error::Schema(format!(
                    "feature '{}' belongs to group '{}' which has no category",
                    f.name,
                    f.group.as_str()
                )));
            }
        }
        Ok(FeatureManifest { features, categories })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn category_of(&self, group: FeatureGroup) -> Option<Category> {
        self.categories.get(&group).copied()
    }

    pub fn count_group(&self, group: FeatureGroup) -> usize {
        self.features.iter().filter(|f| f.group == group).count()
    }

    /// Column indices belonging to `set`, in manifest order.
    pub fn indices(&self, set: FeatureSet) -> Vec<usize> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, f)| set.admits(self.categories[&f.group]))
            .map(|(i, _)| i)
            .collect()
    }

    /// Manifest restricted to the given columns.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        FeatureManifest {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            categories: self.categories.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("invalid manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_counts() {
        let m = FeatureManifest::default();
        assert_eq!(m.len(), 45);
        assert_eq!(m.count_group(FeatureGroup::Chromatin), 20);
        assert_eq!(m.count_group(FeatureGroup::Tf), 11);
        assert_eq!(m.count_group(FeatureGroup::Motif), 11);
        assert_eq!(m.count_group(FeatureGroup::Sequence), 3);
        assert_eq!(m.features()[0].name, "chromatin_01");
        assert_eq!(m.features()[44].name, "sequence_03");
    }

    #[test]
    fn category_split() {
        let m = FeatureManifest::default();
        assert_eq!(m.indices(FeatureSet::All).len(), 45);
        assert_eq!(m.indices(FeatureSet::Genomic).len(), 14);
        assert_eq!(m.indices(FeatureSet::Epigenomic).len(), 31);
    }

    #[test]
    fn json_round_trip() {
        let m = FeatureManifest::default();
        let text = m.to_json().unwrap();
        assert!(text.contains("\"chromatin\": \"epigenomic\""));
        assert_eq!(FeatureManifest::from_json(&text).unwrap(), m);
    }

    #[test]
    fn validation() {
        let dup = r#"{"features":[{"name":"a","group":"tf"},{"name":"a","group":"tf"}],"categories":{"tf":"epigenomic"}}"#;
        assert!(FeatureManifest::from_json(dup).unwrap_err().to_string().contains("duplicate"));
        let uncategorized = r#"{"features":[{"name":"a","group":"motif"}],"categories":{"tf":"epigenomic"}}"#;
        assert!(FeatureManifest::from_json(uncategorized).is_err());
        let unknown = r#"{"features":[],"categories":{},"extra":1}"#;
        assert!(FeatureManifest::from_json(unknown).is_err());
        let reserved = r#"{"features":[{"name":"label","group":"tf"}],"categories":{"tf":"genomic"}}"#;
        assert!(FeatureManifest::from_json(reserved).is_err());
    }

    #[test]
    fn custom_mapping_changes_split() {
        let mut categories = BTreeMap::new();
        for g in FeatureGroup::ALL {
            categories.insert(g, Category::Epigenomic);
        }
        categories.insert(FeatureGroup::Sequence, Category::Genomic);
        let m = FeatureManifest::new(FeatureManifest::default().features().to_vec(), categories).unwrap();
        assert_eq!(m.indices(FeatureSet::Genomic).len(), 3);
        assert_eq!(m.indices(FeatureSet::Epigenomic).len(), 42);
    }

    #[test]
    fn feature_set_parsing() {
        assert_eq!("Genomic".parse::<FeatureSet>().unwrap(), FeatureSet::Genomic);
        assert!("other".parse::<FeatureSet>().is_err());
    }
}
