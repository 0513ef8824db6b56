//! The shipped decision tree, `data/capi-tree.json`.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::format::{parse_tree, ParseError, Severity};
use crate::lint::{lint_tree, Finding, LintConfig};
use crate::model::DecisionTree;

/// Workspace-relative location of the shipped tree.
pub const DEFAULT_CATALOG_PATH: &str = "data/capi-tree.json";

/// Text of the shipped tree, compiled into the library.
pub const DEFAULT_CATALOG: &str = include_str!("../../../data/capi-tree.json");

/// SHA-256 of [`DEFAULT_CATALOG`]. Update together with the data file.
pub const DEFAULT_CATALOG_SHA256: &str =
    "57c1e29c6becf6e8b82c1c43790ba390a030c7d7164d42ff0548ceda8709f0d8";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("catalog fails lint: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Lint(Vec<Finding>),
}

pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Parses a catalog and rejects it if lint reports any error.
pub fn load_catalog_str(text: &str) -> Result<DecisionTree, CatalogError> {
    let tree = parse_tree(text)?;
    let errors: Vec<Finding> = lint_tree(&tree, &LintConfig::default())
        .into_iter()
        .filter(|f| f.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(tree)
    } else {
        Err(CatalogError::Lint(errors))
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<DecisionTree, CatalogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_catalog_str(&text)
}

pub fn load_default_catalog() -> Result<DecisionTree, CatalogError> {
    load_catalog_str(DEFAULT_CATALOG)
}

/// Reads and parses a tree without linting it, falling back to the shipped
/// tree when `path` is `None`. Used by tools that run user-supplied trees.
pub fn open_tree(path: Option<&Path>) -> Result<DecisionTree, CatalogError> {
    match path {
        None => Ok(parse_tree(DEFAULT_CATALOG)?),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(parse_tree(&text)?)
        }
    }
}
