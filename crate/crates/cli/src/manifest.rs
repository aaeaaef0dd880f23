//! The JSON envelope every input and output file uses.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use gcov_core::amalgam::{InstanceSpec, RawAutomorphicProblem, RawProblem};
use gcov_core::cover::CoverManifest;
use gcov_core::extension::{RawCocycleData, RawExtensionInput};
use gcov_core::finstruct::RawStructure;
use gcov_core::groupoid::{NormalSubgroupSystem, RawFunctor, RawGroupoid};
use gcov_core::linear::{FlaggedSpace, SubspaceCode};

pub const SCHEMA_VERSION: u32 = 1;

/// A failed schema check, located by a JSON pointer into the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError { pointer: pointer.into(), message: message.into() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {:?}: {}", self.pointer, self.message)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorPayload {
    pub groupoid: RawGroupoid,
    pub functor: RawFunctor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructurePayload {
    pub structure: RawStructure,
    /// Sorts making up the base `M` of a cover.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_sorts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverManifest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalSystemPayload {
    pub groupoid: RawGroupoid,
    pub system: NormalSubgroupSystem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachmentPayload {
    pub base: RawStructure,
    pub groupoid: RawGroupoid,
    pub functor: RawFunctor,
    /// Base element for each object of the groupoid, in object order.
    pub anchor: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspacePayload {
    pub q: usize,
    pub ambient: usize,
    pub vectors: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedPairPayload {
    pub q: usize,
    pub left: FlaggedSpace,
    pub right: FlaggedSpace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedLinePayload {
    pub q: usize,
    /// Spanning vectors of the line.
    pub line: Vec<Vec<usize>>,
    pub flag: FlaggedSpace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetPayload {
    pub q: usize,
    pub n: usize,
    pub points: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPayload {
    /// Argument vectors, run in order.
    pub commands: Vec<Vec<String>>,
}

/// Provenance attached to every file the tool writes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub summary: String,
}

macro_rules! bodies {
    ($($variant:ident($ty:ty) = $name:literal,)*) => {
        #[derive(Debug, Clone, PartialEq)]
        pub enum Body {
            $($variant($ty),)*
        }

        /// Every manifest kind, as written in the `kind` field.
        pub const KINDS: &[&str] = &[$($name),*];

        impl Body {
            pub fn kind(&self) -> &'static str {
                match self {
                    $(Body::$variant(_) => $name,)*
                }
            }

            fn payload(&self) -> Value {
                match self {
                    $(Body::$variant(p) => serde_json::to_value(p).expect("payloads serialize"),)*
                }
            }

            fn parse(kind: &str, payload: Value) -> Result<Body, SchemaError> {
                match kind {
                    $($name => typed(payload).map(Body::$variant),)*
                    other => Err(SchemaError::new("/kind", format!("unknown kind {other:?}; expected one of {}", KINDS.join(", ")))),
                }
            }
        }
    };
}

bodies! {
    Groupoid(RawGroupoid) = "groupoid",
    Functor(FunctorPayload) = "functor",
    Structure(StructurePayload) = "structure",
    Cocycle(RawCocycleData) = "cocycle",
    Problem(RawProblem) = "problem",
    Report(Value) = "report",
    NormalSystem(NormalSystemPayload) = "normal-system",
    Extension(RawExtensionInput) = "extension",
    Attachment(AttachmentPayload) = "attachment",
    InstanceSpec(InstanceSpec) = "instance-spec",
    AutomorphicProblem(RawAutomorphicProblem) = "automorphic-problem",
    Subspace(SubspacePayload) = "subspace",
    SubspaceCode(SubspaceCode) = "subspace-code",
    FlaggedPair(FlaggedPairPayload) = "flagged-pair",
    FlaggedLine(FlaggedLinePayload) = "flagged-line",
    PointSet(PointSetPayload) = "point-set",
    Batch(BatchPayload) = "batch",
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub body: Body,
    pub meta: Option<Meta>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    #[serde(rename = "schema-version")]
    schema_version: u32,
    kind: String,
    payload: Value,
    #[serde(default)]
    meta: Option<Meta>,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

fn typed<T: DeserializeOwned>(payload: Value) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(payload).map_err(|e| {
        let at = format!("/payload{}", pointer(e.path()));
        SchemaError::new(at, e.into_inner().to_string())
    })
}

impl Manifest {
    pub fn new(body: Body) -> Self {
        Manifest { body, meta: None }
    }

    pub fn kind(&self) -> &'static str {
        self.body.kind()
    }

    pub fn from_value(doc: Value) -> Result<Manifest, SchemaError> {
        // check the envelope first so that errors in it are not reported
        // inside the payload
        let envelope: Envelope = serde_path_to_error::deserialize(doc)
            .map_err(|e| SchemaError::new(pointer(e.path()), e.into_inner().to_string()))?;
        if envelope.schema_version != SCHEMA_VERSION {
            return Err(SchemaError::new(
                "/schema-version",
                format!("unsupported schema version {}; this tool reads {SCHEMA_VERSION}", envelope.schema_version),
            ));
        }
        let body = Body::parse(&envelope.kind, envelope.payload)?;
        Ok(Manifest { body, meta: envelope.meta })
    }

    pub fn parse(text: &str) -> Result<Manifest, SchemaError> {
        let doc: Value = serde_json::from_str(text)
            .map_err(|e| SchemaError::new("", format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column())))?;
        Manifest::from_value(doc)
    }

    pub fn to_value(&self) -> Value {
        let mut doc = serde_json::json!({
            "schema-version": SCHEMA_VERSION,
            "kind": self.kind(),
            "payload": self.body.payload(),
        });
        if let Some(meta) = &self.meta {
            doc["meta"] = serde_json::to_value(meta).expect("meta serializes");
        }
        doc
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("manifests serialize")
    }
}
