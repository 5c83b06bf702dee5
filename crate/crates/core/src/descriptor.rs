//! Model descriptor parsing and validation.
//!
//! The descriptor is a YAML document naming every model a scenario may use,
//! together with how to obtain its files. Validation is strict: unknown keys
//! are errors (catching typos like `dynamc_size`), and every rejection names
//! the offending key path.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_yaml::Value;
use thiserror::Error;

/// How a model's files are obtained, and whether it enters the simulated world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Fetched by name from the configured model database.
    #[serde(rename = "GAZEBO_MODEL")]
    GazeboModel,
    /// User-supplied, either under `models_dir` or downloaded from `url`.
    #[serde(rename = "CUSTOM_MODEL")]
    CustomModel,
    /// Sampled into scenes but emitted only to the mission file, never the world.
    #[serde(rename = "MISSION_ONLY")]
    MissionOnly,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::GazeboModel => "GAZEBO_MODEL",
            ModelKind::CustomModel => "CUSTOM_MODEL",
            ModelKind::MissionOnly => "MISSION_ONLY",
        }
    }

    fn from_str(s: &str) -> Option<ModelKind> {
        match s {
            "GAZEBO_MODEL" => Some(ModelKind::GazeboModel),
            "CUSTOM_MODEL" => Some(ModelKind::CustomModel),
            "MISSION_ONLY" => Some(ModelKind::MissionOnly),
            _ => None,
        }
    }
}

/// One user-declared model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub name: String,
    pub kind: ModelKind,
    pub url: Option<String>,
    /// Footprint override, meters (x-extent in the model frame).
    pub width: Option<f64>,
    /// Footprint override, meters (y-extent in the model frame).
    pub length: Option<f64>,
    /// Model heading offset, radians.
    pub heading: Option<f64>,
    /// Overrides the computed resizability classification.
    pub dynamic_size: Option<bool>,
}

impl ModelEntry {
    pub fn new(name: &str, kind: ModelKind) -> Self {
        ModelEntry {
            name: name.to_string(),
            kind,
            url: None,
            width: None,
            length: None,
            heading: None,
            dynamic_size: None,
        }
    }
}

/// The parsed model descriptor document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelDescriptor {
    /// Entry order defines deterministic processing order throughout the pipeline.
    pub models: Vec<ModelEntry>,
    pub models_dir: Option<PathBuf>,
    /// Optional path to an empty-world template.
    pub world: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("invalid YAML: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("{path}: expected {expected}")]
    TypeMismatch { path: String, expected: &'static str },
    #[error("{path}: unknown key")]
    UnknownKey { path: String },
    #[error("{path}: missing required key `{key}`")]
    MissingKey { path: String, key: &'static str },
    #[error("{path}: unknown model type `{value}` (expected GAZEBO_MODEL, CUSTOM_MODEL, or MISSION_ONLY)")]
    UnknownKind { path: String, value: String },
    #[error("{path}: model name must not be empty")]
    EmptyName { path: String },
    #[error("{path}: duplicate model name `{name}`")]
    DuplicateName { path: String, name: String },
    #[error("{path}: dimension must be > 0 (got {value})")]
    NonPositive { path: String, value: f64 },
    #[error("{path}: `url` is only allowed on CUSTOM_MODEL entries")]
    UrlNotAllowed { path: String },
    #[error("models_dir must be set when a CUSTOM_MODEL entry has no url (entry `{name}`)")]
    MissingModelsDir { name: String },
}

/// Parse and validate a model descriptor document.
pub fn parse_descriptor(text: &str) -> Result<ModelDescriptor, DescriptorError> {
    let value: Value = serde_yaml::from_str(text)?;
    let root = as_mapping(&value, "")?;

    let mut descriptor = ModelDescriptor::default();
    let mut saw_models = false;
    for (key, val) in root {
        let key = key_name(key, "")?;
        match key.as_str() {
            "models" => {
                saw_models = true;
                descriptor.models = parse_models(val)?;
            }
            "models_dir" => descriptor.models_dir = Some(PathBuf::from(scalar_str(val, "models_dir")?)),
            "world" => descriptor.world = Some(PathBuf::from(scalar_str(val, "world")?)),
            _ => return Err(DescriptorError::UnknownKey { path: key }),
        }
    }
    if !saw_models {
        return Err(DescriptorError::MissingKey {
            path: String::new(),
            key: "models",
        });
    }

    if descriptor.models_dir.is_none() {
        if let Some(entry) = descriptor
            .models
            .iter()
            .find(|e| e.kind == ModelKind::CustomModel && e.url.is_none())
        {
            return Err(DescriptorError::MissingModelsDir {
                name: entry.name.clone(),
            });
        }
    }
    Ok(descriptor)
}

fn parse_models(val: &Value) -> Result<Vec<ModelEntry>, DescriptorError> {
    let seq = match val {
        Value::Sequence(seq) => seq,
        Value::Null => return Ok(Vec::new()),
        _ => {
            return Err(DescriptorError::TypeMismatch {
                path: "models".into(),
                expected: "a list of model entries",
            })
        }
    };

    let mut entries = Vec::with_capacity(seq.len());
    let mut seen = std::collections::HashSet::new();
    for (i, item) in seq.iter().enumerate() {
        let path = format!("models[{i}]");
        let entry = parse_entry(item, &path)?;
        if !seen.insert(entry.name.clone()) {
            return Err(DescriptorError::DuplicateName {
                path: format!("{path}.name"),
                name: entry.name,
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

fn parse_entry(item: &Value, path: &str) -> Result<ModelEntry, DescriptorError> {
    let map = as_mapping(item, path)?;
    let mut name = None;
    let mut kind = None;
    let mut url = None;
    let mut width = None;
    let mut length = None;
    let mut heading = None;
    let mut dynamic_size = None;

    for (key, val) in map {
        let key = key_name(key, path)?;
        let kpath = format!("{path}.{key}");
        match key.as_str() {
            "name" => name = Some(scalar_str(val, &kpath)?),
            "type" => {
                let s = scalar_str(val, &kpath)?;
                kind = Some(ModelKind::from_str(&s).ok_or(DescriptorError::UnknownKind { path: kpath, value: s })?);
            }
            "url" => url = Some(scalar_str(val, &kpath)?),
            "width" => width = Some(positive_number(val, &kpath)?),
            "length" => length = Some(positive_number(val, &kpath)?),
            "heading" => heading = Some(number(val, &kpath)?),
            "dynamic_size" => dynamic_size = Some(boolean(val, &kpath)?),
            _ => return Err(DescriptorError::UnknownKey { path: kpath }),
        }
    }

    let name = name.ok_or(DescriptorError::MissingKey {
        path: path.to_string(),
        key: "name",
    })?;
    if name.is_empty() {
        return Err(DescriptorError::EmptyName {
            path: format!("{path}.name"),
        });
    }
    let kind = kind.ok_or(DescriptorError::MissingKey {
        path: path.to_string(),
        key: "type",
    })?;
    if url.is_some() && kind != ModelKind::CustomModel {
        return Err(DescriptorError::UrlNotAllowed {
            path: format!("{path}.url"),
        });
    }

    Ok(ModelEntry {
        name,
        kind,
        url,
        width,
        length,
        heading,
        dynamic_size,
    })
}

fn as_mapping<'v>(val: &'v Value, path: &str) -> Result<&'v serde_yaml::Mapping, DescriptorError> {
    val.as_mapping().ok_or(DescriptorError::TypeMismatch {
        path: if path.is_empty() { "document".into() } else { path.into() },
        expected: "a mapping",
    })
}

fn key_name(key: &Value, path: &str) -> Result<String, DescriptorError> {
    key.as_str().map(str::to_string).ok_or(DescriptorError::TypeMismatch {
        path: if path.is_empty() { "document".into() } else { path.into() },
        expected: "string keys",
    })
}

fn scalar_str(val: &Value, path: &str) -> Result<String, DescriptorError> {
    val.as_str().map(str::to_string).ok_or(DescriptorError::TypeMismatch {
        path: path.into(),
        expected: "a string",
    })
}

fn number(val: &Value, path: &str) -> Result<f64, DescriptorError> {
    val.as_f64().ok_or(DescriptorError::TypeMismatch {
        path: path.into(),
        expected: "a number",
    })
}

fn positive_number(val: &Value, path: &str) -> Result<f64, DescriptorError> {
    let n = number(val, path)?;
    if n <= 0.0 {
        return Err(DescriptorError::NonPositive {
            path: path.into(),
            value: n,
        });
    }
    Ok(n)
}

fn boolean(val: &Value, path: &str) -> Result<bool, DescriptorError> {
    val.as_bool().ok_or(DescriptorError::TypeMismatch {
        path: path.into(),
        expected: "a boolean",
    })
}

/// Serialize a descriptor back to YAML. `parse_descriptor(serialize_descriptor(d)) == d`
/// for every valid descriptor.
pub fn serialize_descriptor(d: &ModelDescriptor) -> String {
    let mut out = String::new();
    if d.models.is_empty() {
        out.push_str("models: []\n");
    } else {
        out.push_str("models:\n");
        for entry in &d.models {
            let _ = writeln!(out, "- name: {}", yaml_scalar(&entry.name));
            let _ = writeln!(out, "  type: {}", entry.kind.as_str());
            if let Some(url) = &entry.url {
                let _ = writeln!(out, "  url: {}", yaml_scalar(url));
            }
            if let Some(w) = entry.width {
                let _ = writeln!(out, "  width: {w}");
            }
            if let Some(l) = entry.length {
                let _ = writeln!(out, "  length: {l}");
            }
            if let Some(h) = entry.heading {
                let _ = writeln!(out, "  heading: {h}");
            }
            if let Some(ds) = entry.dynamic_size {
                let _ = writeln!(out, "  dynamic_size: {ds}");
            }
        }
    }
    if let Some(dir) = &d.models_dir {
        let _ = writeln!(out, "models_dir: {}", yaml_scalar(&dir.display().to_string()));
    }
    if let Some(world) = &d.world {
        let _ = writeln!(out, "world: {}", yaml_scalar(&world.display().to_string()));
    }
    out
}

/// Quote a string scalar only when YAML requires it.
fn yaml_scalar(s: &str) -> String {
    let rendered = serde_yaml::to_string(s).unwrap_or_default();
    rendered.trim_end().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FETCH_DESCRIPTOR: &str = "\
models:
- name: fetch
  type: MISSION_ONLY
  width: 0.57
  length: 0.53
  heading: -1.57
- name: waypoint
  type: MISSION_ONLY
- name: cafe_table
  type: GAZEBO_MODEL
- name: bookshelf
  type: GAZEBO_MODEL
- name: LampAndStand
  type: GAZEBO_MODEL
- name: demo_cube
  type: CUSTOM_MODEL
  dynamic_size: False
models_dir: models/
world: empty_world.world
";

    #[test]
    fn parses_fetch_descriptor() {
        let d = parse_descriptor(FETCH_DESCRIPTOR).unwrap();
        assert_eq!(d.models.len(), 6);
        let fetch = &d.models[0];
        assert_eq!(fetch.name, "fetch");
        assert_eq!(fetch.kind, ModelKind::MissionOnly);
        assert_eq!(fetch.width, Some(0.57));
        assert_eq!(fetch.length, Some(0.53));
        assert_eq!(fetch.heading, Some(-1.57));
        assert_eq!(d.models[4].name, "LampAndStand");
        assert_eq!(d.models[5].kind, ModelKind::CustomModel);
        assert_eq!(d.models[5].dynamic_size, Some(false));
        assert_eq!(d.models_dir.as_deref(), Some(std::path::Path::new("models/")));
        assert_eq!(d.world.as_deref(), Some(std::path::Path::new("empty_world.world")));
    }

    #[test]
    fn empty_models_list() {
        let d = parse_descriptor("models: []").unwrap();
        assert!(d.models.is_empty());
    }

    #[test]
    fn duplicate_name_rejected() {
        let err = parse_descriptor(
            "models:\n- name: cube\n  type: GAZEBO_MODEL\n- name: cube\n  type: GAZEBO_MODEL\n",
        )
        .unwrap_err();
        match err {
            DescriptorError::DuplicateName { path, name } => {
                assert_eq!(path, "models[1].name");
                assert_eq!(name, "cube");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_key_names_path() {
        let err =
            parse_descriptor("models:\n- name: cube\n  type: GAZEBO_MODEL\n  dynamc_size: False\n").unwrap_err();
        match err {
            DescriptorError::UnknownKey { path } => assert_eq!(path, "models[0].dynamc_size"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        let err = parse_descriptor("models:\n- name: cube\n  type: MESH_MODEL\n").unwrap_err();
        assert!(matches!(err, DescriptorError::UnknownKind { .. }));
    }

    #[test]
    fn missing_name_rejected() {
        let err = parse_descriptor("models:\n- type: GAZEBO_MODEL\n").unwrap_err();
        assert!(matches!(err, DescriptorError::MissingKey { key: "name", .. }));
    }

    #[test]
    fn nonpositive_dimension_rejected() {
        let err = parse_descriptor("models:\n- name: cube\n  type: MISSION_ONLY\n  width: 0\n").unwrap_err();
        match err {
            DescriptorError::NonPositive { path, value } => {
                assert_eq!(path, "models[0].width");
                assert_eq!(value, 0.0);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn custom_model_without_url_requires_models_dir() {
        let err = parse_descriptor("models:\n- name: cube\n  type: CUSTOM_MODEL\n").unwrap_err();
        assert!(matches!(err, DescriptorError::MissingModelsDir { .. }));
        // With a url it is fine.
        parse_descriptor("models:\n- name: cube\n  type: CUSTOM_MODEL\n  url: file:///tmp/cube.tar.gz\n").unwrap();
    }

    #[test]
    fn url_on_gazebo_model_rejected() {
        let err =
            parse_descriptor("models:\n- name: cube\n  type: GAZEBO_MODEL\n  url: http://x/y.zip\n").unwrap_err();
        assert!(matches!(err, DescriptorError::UrlNotAllowed { .. }));
    }

    #[test]
    fn malformed_yaml_rejected() {
        assert!(matches!(
            parse_descriptor("models: [unterminated").unwrap_err(),
            DescriptorError::Yaml(_)
        ));
    }

    #[test]
    fn round_trip() {
        let d = parse_descriptor(FETCH_DESCRIPTOR).unwrap();
        let text = serialize_descriptor(&d);
        let d2 = parse_descriptor(&text).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn round_trip_empty() {
        let d = ModelDescriptor::default();
        assert_eq!(parse_descriptor(&serialize_descriptor(&d)).unwrap(), d);
    }
}
