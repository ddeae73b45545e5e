//! Versioned JSON documents for bodies, genomes and individuals.
//!
//! Output is canonical: struct fields in declaration order, maps sorted by
//! key, two-space indentation and a trailing newline. Unknown fields are
//! rejected on input.

use std::fs;
use std::path::Path;

use morphevo_core::decoder::Individual;
use morphevo_core::genome::Cppn;
use morphevo_core::morphology::{BodyGraph, BodyNode};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDocument {
    pub format_version: u32,
    pub body: BodyNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenomeRole {
    Body,
    Brain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenomeDocument {
    pub format_version: u32,
    pub role: GenomeRole,
    pub genome: Cppn,
}

/// An individual with both genomes and its decoded body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndividualDocument {
    pub format_version: u32,
    pub id: u64,
    pub fitness: Option<f64>,
    pub body: BodyNode,
    pub body_genome: Cppn,
    pub brain_genome: Cppn,
}

impl BodyDocument {
    pub fn new(body: &BodyGraph) -> Self {
        BodyDocument {
            format_version: FORMAT_VERSION,
            body: body.root.clone(),
        }
    }

    /// The body, after version and validity checks.
    pub fn into_body(self) -> Result<BodyGraph, Error> {
        check_version(self.format_version)?;
        let body = BodyGraph::from_root(self.body);
        let report = body.validate();
        if !report.is_ok() {
            return Err(Error::Invalid(report.to_string()));
        }
        Ok(body)
    }
}

impl GenomeDocument {
    pub fn new(role: GenomeRole, genome: &Cppn) -> Self {
        GenomeDocument {
            format_version: FORMAT_VERSION,
            role,
            genome: genome.clone(),
        }
    }

    pub fn into_genome(self, expected: GenomeRole) -> Result<Cppn, Error> {
        check_version(self.format_version)?;
        if self.role != expected {
            return Err(Error::Invalid(format!("expected a {expected:?} genome, found {:?}", self.role).to_lowercase()));
        }
        self.genome.check().map_err(|e| Error::Invalid(format!("genome: {e}")))?;
        Ok(self.genome)
    }
}

impl IndividualDocument {
    pub fn new(ind: &Individual) -> Self {
        IndividualDocument {
            format_version: FORMAT_VERSION,
            id: ind.id,
            fitness: ind.fitness,
            body: ind.body.root.clone(),
            body_genome: ind.body_genome.clone(),
            brain_genome: ind.brain_genome.clone(),
        }
    }
}

fn check_version(v: u32) -> Result<(), Error> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::Invalid(format!("unsupported format_version {v} (expected {FORMAT_VERSION})")))
    }
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_canonical<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text).map_err(|e| e.in_file(path))
}

pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    fs::write(path, to_canonical(value)).map_err(|e| Error::io(path, e))
}

pub fn serialize_body(body: &BodyGraph) -> String {
    to_canonical(&BodyDocument::new(body))
}

pub fn deserialize_body(text: &str) -> Result<BodyGraph, Error> {
    from_str::<BodyDocument>(text)?.into_body()
}
