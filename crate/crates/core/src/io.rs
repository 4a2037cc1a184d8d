//! Instance and code documents.
//!
//! Instances: `{"m": 3, "absent": [[3], [1, 3]]}`, or the same with `present`
//! instead of `absent`. Codes: `{"q": 2, "rows": [[1, 0, 1], ...]}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::CodeMatrix;
use crate::field::{FieldError, PrimeField};
use crate::instance::{InstanceError, PicInstance};
use crate::set::{MessageSet, MAX_MESSAGES};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    absent: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    present: Option<Vec<Vec<usize>>>,
}

fn to_set(m: usize, list: &[usize]) -> Result<MessageSet, DocumentError> {
    let mut set = MessageSet::EMPTY;
    for &i in list {
        if i == 0 || i > m {
            return Err(InstanceError::MessageIndexOutOfRange { index: i, m }.into());
        }
        if set.contains(i) {
            return Err(DocumentError::Semantic(format!(
                "message {i} repeated inside one receiver"
            )));
        }
        set = set.with(i);
    }
    Ok(set)
}

pub fn parse_instance(text: &str) -> Result<PicInstance, DocumentError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if !(2..=MAX_MESSAGES).contains(&doc.m) {
        return Err(InstanceError::MessageCount(doc.m).into());
    }
    let m = doc.m;
    match (doc.absent, doc.present) {
        (Some(absent), None) => {
            let sets = absent
                .iter()
                .map(|l| to_set(m, l))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PicInstance::from_absent(m, sets)?)
        }
        (None, Some(present)) => {
            let sets = present
                .iter()
                .map(|l| to_set(m, l))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PicInstance::from_present(m, sets)?)
        }
        _ => Err(DocumentError::Semantic(
            "exactly one of `absent` and `present` is required".into(),
        )),
    }
}

/// Canonical single-line form, always by absent family.
pub fn serialize_instance(inst: &PicInstance) -> String {
    serde_json::to_string(&instance_value(inst)).expect("plain data")
}

pub fn instance_value(inst: &PicInstance) -> serde_json::Value {
    let doc = InstanceDoc {
        m: inst.m(),
        absent: Some(inst.absent().iter().map(|s| s.to_vec()).collect()),
        present: None,
    };
    serde_json::to_value(doc).expect("plain data")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeDoc {
    q: u32,
    rows: Vec<Vec<u32>>,
}

/// Parses a code document. `m` is taken from the instance it will be checked
/// against, since a code with no rows carries no width.
pub fn parse_code(text: &str, m: usize) -> Result<CodeMatrix, DocumentError> {
    let doc: CodeDoc = serde_json::from_str(text)?;
    let field = PrimeField::new(doc.q)?;
    for (r, row) in doc.rows.iter().enumerate() {
        if row.len() != m {
            return Err(DocumentError::Semantic(format!(
                "row {r} has {} entries, expected {m}",
                row.len()
            )));
        }
        if let Some(&bad) = row.iter().find(|&&x| x >= doc.q) {
            return Err(DocumentError::Semantic(format!(
                "row {r} entry {bad} not reduced mod {}",
                doc.q
            )));
        }
    }
    Ok(CodeMatrix::from_rows(field, m, doc.rows))
}

pub fn code_value(code: &CodeMatrix) -> serde_json::Value {
    serde_json::to_value(CodeDoc {
        q: code.field().modulus(),
        rows: code.rows().to_vec(),
    })
    .expect("plain data")
}

pub fn serialize_code(code: &CodeMatrix) -> String {
    serde_json::to_string(&code_value(code)).expect("plain data")
}
