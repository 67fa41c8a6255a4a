//! Serde image of a problem file. Everything here is purely syntactic;
//! cross-references and shapes are checked in [`crate::resolve`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_TAG: &str = "twistk/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<CocycleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gset: Option<GSetSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub models: BTreeMap<String, ModelSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bundles: BTreeMap<String, BundleSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub isomorphisms: BTreeMap<String, IsomorphismSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<TaskSpec>,
}

/// `mult[i][j]` names the product of `elements[i]` and `elements[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub elements: Vec<String>,
    pub mult: Vec<Vec<String>>,
}

/// `phases[i][j]` is `β(g_i, g_j)` as `"p/q"`, meaning `exp(2πi p/q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    pub phases: Vec<Vec<String>>,
}

/// `action[g][x]` names the image of point `x` under element `g`, rows in
/// the order of `group.elements`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSetSpec {
    pub points: Vec<String>,
    pub action: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    /// Exterior algebra on odd generators with `d = 0`.
    Exterior {
        names: Vec<String>,
        degrees: Vec<u32>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        actions: Vec<ActionSpec>,
    },
    /// Truncated polynomial de Rham complex.
    Jet {
        vars: usize,
        order: u32,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        actions: Vec<ActionSpec>,
    },
    /// Functions on finitely many points.
    Points {
        n: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        actions: Vec<ActionSpec>,
    },
    /// Any finite-dimensional model, given by sparse structure constants.
    Explicit {
        basis: Vec<String>,
        degrees: Vec<u32>,
        /// `[i, j, k, c]`: `e_i e_j` has coefficient `c` on `e_k`.
        structure: Vec<(String, String, String, Scalar)>,
        /// `[i, j, c]`: `d e_j` has coefficient `c` on `e_i`.
        #[serde(default)]
        differential: Vec<(String, String, Scalar)>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        actions: Vec<ActionSpec>,
    },
}

impl ModelSpec {
    pub fn actions(&self) -> &[ActionSpec] {
        match self {
            ModelSpec::Exterior { actions, .. }
            | ModelSpec::Jet { actions, .. }
            | ModelSpec::Points { actions, .. }
            | ModelSpec::Explicit { actions, .. } => actions,
        }
    }
}

/// How one group element acts on a model. Exactly one of the three maps
/// must be present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub element: String,
    /// Generator `i` goes to `signs[i]` times generator `perm[i]`
    /// (exterior and jet models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed_permutation: Option<SignedPermutation>,
    /// Point `x` goes to point `permutation[x]` (points models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    /// Dense matrix; column `j` is the image of basis element `j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i64>,
}

/// A complex number as `["re", "im"]`, or a bare string for a real value.
/// Components are decimals or exact rationals `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Complex([String; 2]),
    Real(String),
}

pub type MatrixSpec = Vec<Vec<Scalar>>;

/// A form as a map from basis names to coefficients; omitted names are zero.
pub type FormSpec = BTreeMap<String, Scalar>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tier", rename_all = "lowercase", deny_unknown_fields)]
pub enum BundleSpec {
    /// A bundle over the finite G-set of the file.
    Exact {
        /// `[even, odd]` fiber ranks per point.
        fibers: Vec<[usize; 2]>,
        /// Element name to one matrix per point; the identity may be omitted.
        rho: BTreeMap<String, Vec<MatrixSpec>>,
        /// One odd matrix per point; omitted means zero.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a0: Option<Vec<MatrixSpec>>,
    },
    /// A bundle given by one packet per conjugacy class.
    Graded { packets: Vec<PacketSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub class_rep: String,
    pub model: String,
    /// `[even, odd]`; even basis vectors come first.
    pub rank: [usize; 2],
    pub m: Vec<Vec<FormSpec>>,
    /// Centralizer generator name to its matrix of forms.
    #[serde(default)]
    pub generators: BTreeMap<String, Vec<Vec<FormSpec>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tier", rename_all = "lowercase", deny_unknown_fields)]
pub enum IsomorphismSpec {
    /// One even matrix per point.
    Exact { blocks: Vec<MatrixSpec> },
    /// Class representative name to an even matrix of forms.
    Graded { classes: BTreeMap<String, Vec<Vec<FormSpec>>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Validate,
    Character { bundle: String },
    Cs {
        bundles: [String; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<String>,
    },
    KhatRank,
    KhatClass { bundle: String },
    StableIso { bundles: [String; 2] },
    RegularClasses,
}

/// Reads and schema-checks a problem file. Errors carry the JSON path and
/// the line and column.
pub fn parse(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_str(&text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_str(text: &str) -> Result<ProblemFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Parse(format!("at `{path}`: {inner}"))
    })?;
    if file.schema != SCHEMA_TAG {
        return Err(CliError::Parse(format!(
            "at `schema`: expected \"{SCHEMA_TAG}\", found \"{}\"",
            file.schema
        )));
    }
    Ok(file)
}
