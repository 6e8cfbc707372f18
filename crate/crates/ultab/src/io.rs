//! JSON poset and model files.
//!
//! A poset file lists worlds and immediate covers (`[a, b]` meaning `a ≺ b`);
//! the order is the reflexive-transitive closure. A model file adds `vars`
//! and a `colors` map from world to a bitstring whose `i`-th character is
//! the value of `vars[i]`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ultab_core::{Model, Poset};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("cannot read `{file}`: {source}")]
    Read { file: String, source: std::io::Error },
}

impl FileError {
    fn at(path: impl Into<String>, msg: impl ToString) -> FileError {
        FileError::Schema { path: path.into(), msg: msg.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetFile {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub covers: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub covers: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    pub vars: Vec<String>,
    pub colors: BTreeMap<String, String>,
}

/// Either kind of file, told apart by the presence of `vars`.
#[derive(Clone, Debug)]
pub enum Loaded {
    Poset(Poset),
    Model(Model),
}

impl PosetFile {
    pub fn from_poset(p: &Poset) -> PosetFile {
        PosetFile {
            worlds: p.names().to_vec(),
            covers: p.covers().into_iter().map(|(a, b)| (p.name(a).to_string(), p.name(b).to_string())).collect(),
            root: p.root().map(|r| p.name(r).to_string()),
        }
    }

    pub fn to_poset(&self) -> Result<Poset, FileError> {
        build_poset(&self.worlds, &self.covers, self.root.as_deref())
    }
}

impl ModelFile {
    pub fn from_model(m: &Model) -> ModelFile {
        let p = m.frame();
        let colors = (0..m.len()).map(|w| (p.name(w).to_string(), m.color_string(w))).collect();
        let PosetFile { worlds, covers, root } = PosetFile::from_poset(p);
        ModelFile { worlds, covers, root, vars: m.vars().to_vec(), colors }
    }

    pub fn to_model(&self) -> Result<Model, FileError> {
        let p = build_poset(&self.worlds, &self.covers, self.root.as_deref())?;
        if p.root().is_none() {
            return Err(FileError::at("covers", "a model needs a rooted frame"));
        }
        let mut colors = vec![0u64; p.len()];
        for (name, bits) in &self.colors {
            let here = format!("colors.{name}");
            let w = p.index_of(name).map_err(|e| FileError::at(&here, e))?;
            if bits.chars().count() != self.vars.len() {
                return Err(FileError::at(
                    here,
                    format!("bitstring has {} characters, expected {}", bits.chars().count(), self.vars.len()),
                ));
            }
            for (i, ch) in bits.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => colors[w] |= 1 << i,
                    other => return Err(FileError::at(here, format!("unexpected character `{other}`"))),
                }
            }
        }
        if let Some(missing) = p.names().iter().find(|w| !self.colors.contains_key(*w)) {
            return Err(FileError::at("colors", format!("no color for world `{missing}`")));
        }
        Model::new(p, self.vars.clone(), colors).map_err(|e| FileError::at("colors", e))
    }
}

fn build_poset(worlds: &[String], covers: &[(String, String)], root: Option<&str>) -> Result<Poset, FileError> {
    let mut index = BTreeMap::new();
    for (i, w) in worlds.iter().enumerate() {
        if index.insert(w.as_str(), i).is_some() {
            return Err(FileError::at(format!("worlds[{i}]"), format!("duplicate world `{w}`")));
        }
    }
    let mut pairs = Vec::with_capacity(covers.len());
    for (j, (a, b)) in covers.iter().enumerate() {
        let look = |s: &str, k: usize| {
            index.get(s).copied().ok_or_else(|| FileError::at(format!("covers[{j}][{k}]"), format!("unknown world `{s}`")))
        };
        pairs.push((look(a, 0)?, look(b, 1)?));
    }
    let p = Poset::from_relation(worlds.to_vec(), &pairs).map_err(|e| FileError::at("covers", e))?;
    if let Some(r) = root {
        let w = p.index_of(r).map_err(|e| FileError::at("root", e))?;
        if p.root() != Some(w) {
            return Err(FileError::at("root", format!("`{r}` is not below every world")));
        }
    }
    Ok(p)
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, FileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        FileError::at(if path == "." { "$".to_string() } else { path }, e.into_inner())
    })
}

pub fn parse_poset(text: &str) -> Result<Poset, FileError> {
    from_json::<PosetFile>(text)?.to_poset()
}

pub fn parse_model(text: &str) -> Result<Model, FileError> {
    from_json::<ModelFile>(text)?.to_model()
}

pub fn parse_any(text: &str) -> Result<Loaded, FileError> {
    let probe: serde_json::Value = from_json(text)?;
    if probe.get("vars").is_some() {
        parse_model(text).map(Loaded::Model)
    } else {
        parse_poset(text).map(Loaded::Poset)
    }
}

pub fn poset_json(p: &Poset) -> String {
    serde_json::to_string_pretty(&PosetFile::from_poset(p)).expect("plain data serializes")
}

pub fn model_json(m: &Model) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(m)).expect("plain data serializes")
}

/// Reads a file, or standard input for `-`.
pub fn read_source(file: &Path) -> Result<String, FileError> {
    let name = file.display().to_string();
    if name == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|source| FileError::Read { file: name, source })?;
        return Ok(s);
    }
    std::fs::read_to_string(file).map_err(|source| FileError::Read { file: name, source })
}

pub fn load_poset(file: &Path) -> Result<Poset, FileError> {
    parse_poset(&read_source(file)?)
}

pub fn load_model(file: &Path) -> Result<Model, FileError> {
    parse_model(&read_source(file)?)
}

pub fn save_poset(file: &Path, p: &Poset) -> std::io::Result<()> {
    std::fs::write(file, poset_json(p) + "\n")
}

pub fn save_model(file: &Path, m: &Model) -> std::io::Result<()> {
    std::fs::write(file, model_json(m) + "\n")
}
