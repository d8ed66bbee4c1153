use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{expected_shapes, Layer, TrainedModel};
use super::spec::ModelSpec;
use crate::dataio::Standardizer;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model: spec, input width and flat parameter arrays per layer,
/// optionally bundled with the standardizer the model was trained behind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub input_width: usize,
    pub layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardizer: Option<Standardizer>,
}

impl ModelDocument {
    pub fn new(model: &TrainedModel, standardizer: Option<Standardizer>) -> Self {
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            spec: model.spec.clone(),
            input_width: model.input_width,
            layers: model.layers.clone(),
            standardizer,
        }
    }

    /// Checks the version and that every parameter block has the shape the
    /// spec implies.
    pub fn into_model(self) -> Result<(TrainedModel, Option<Standardizer>)> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "model format version {} is not supported (expected {})",
                self.format_version, MODEL_FORMAT_VERSION
            )));
        }
        let model = TrainedModel {
            spec: self.spec,
            input_width: self.input_width,
            layers: self.layers,
        };
        let expected = expected_shapes(&model.spec, model.input_width)?;
        let actual = model.parameter_shapes();
        if expected != actual {
            return Err(Error::Schema(format!(
                "parameter shapes {actual:?} do not match spec (expected {expected:?})"
            )));
        }
        if let Some(std) = &self.standardizer {
            if std.width() != model.input_width {
                return Err(Error::Schema(format!(
                    "standardizer covers {} features, model expects {}",
                    std.width(),
                    model.input_width
                )));
            }
        }
        Ok((model, self.standardizer))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Variant};
    use crate::numkernel::SeededRng;

    #[test]
    fn json_round_trip_is_exact() {
        for variant in Variant::ALL {
            let model = build_model(&ModelSpec::with_variant(variant), 45, &mut SeededRng::new(31)).unwrap();
            let std = Standardizer::from_parts(vec![0.1; 45], vec![1.0 / 3.0; 45]).unwrap();
            let doc = ModelDocument::new(&model, Some(std.clone()));
            let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
            let (restored, restored_std) = back.into_model().unwrap();
            assert_eq!(restored, model);
            assert_eq!(restored_std, Some(std));
        }
    }

    #[test]
    fn rejects_wrong_version_and_shapes() {
        let model = build_model(&ModelSpec::default(), 10, &mut SeededRng::new(1)).unwrap();
        let mut doc = ModelDocument::new(&model, None);
        doc.format_version = 99;
        assert!(matches!(doc.into_model(), Err(Error::Schema(_))));

        let mut doc = ModelDocument::new(&model, None);
        doc.input_width = 11;
        assert!(matches!(doc.into_model(), Err(Error::Schema(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = build_model(&ModelSpec::default(), 5, &mut SeededRng::new(2)).unwrap();
        ModelDocument::new(&model, None).save(&path).unwrap();
        let (back, std) = ModelDocument::load(&path).unwrap().into_model().unwrap();
        assert_eq!(back, model);
        assert!(std.is_none());
    }
}
