//! Canonical leaf encoding and SHA-256 Merkle trees.
//!
//! A component's provenance is reduced to `(key, value)` leaves, leaves are
//! encoded canonically (injectively) into bytes, and a balanced Merkle tree
//! over the sorted leaves yields a 32-byte signature. Domain-separation
//! prefixes keep leaf digests, interior digests, and the empty tree in
//! disjoint hash domains:
//!
//! - leaf digest:     `H(0x00 || canonical-bytes)`
//! - interior digest: `H(0x01 || left || right)`
//! - empty tree root: `H(0x02)`
//!
//! Leaves are sorted before hashing, so a signature depends on the leaf
//! multiset, never on provenance-capture order. An odd node at any level is
//! paired with itself. Building a tree over `n` leaves costs `O(n log n)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::model::AttributeValue;

const LEAF_PREFIX: u8 = 0x00;
const NODE_PREFIX: u8 = 0x01;
const EMPTY_PREFIX: u8 = 0x02;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MerkleError {
    #[error("unsupported attribute value: {0}")]
    UnsupportedValueType(String),
}

/// A 32-byte digest rendered as 64 lowercase hex characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature([u8; 32]);

impl Signature {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Signature(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Five-character prefix used in human-readable tables; machine output
    /// always carries the full digest.
    pub fn short(&self) -> String {
        self.hex()[..5].to_string()
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        let bytes = hex::decode(s)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| hex::FromHexError::InvalidStringLength)?;
        Ok(Signature(arr))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Signature::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

fn sha256(parts: &[&[u8]]) -> Signature {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    Signature(hasher.finalize().into())
}

/// Escape `\` and the given separators so joined encodings stay parseable.
fn escape(s: &str, separators: &[char]) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        if ch == '\\' || separators.contains(&ch) {
            out.push('\\');
        }
        out.push(ch);
    }
    out
}

/// Encode an attribute value as its canonical typed string: a one-letter
/// type tag (`s:`, `i:`, `d:`, `l:`) followed by the payload. Decimals render
/// with no trailing zeros; list elements are encoded recursively and joined
/// with commas (commas inside string payloads are escaped, which keeps the
/// encoding injective). Nested lists are rejected.
pub fn canonical_value(value: &AttributeValue) -> Result<String, MerkleError> {
    match value {
        AttributeValue::Str(s) => Ok(format!("s:{}", escape(s, &[',', '=']))),
        AttributeValue::Int(i) => Ok(format!("i:{i}")),
        AttributeValue::Dec(d) => Ok(format!("d:{d}")),
        AttributeValue::List(items) => {
            let mut parts = Vec::with_capacity(items.len());
            for item in items {
                if !item.is_scalar() {
                    return Err(MerkleError::UnsupportedValueType("nested list".to_string()));
                }
                parts.push(canonical_value(item)?);
            }
            Ok(format!("l:{}", parts.join(",")))
        }
    }
}

/// Canonical byte encoding of a `(key, value)` pair: `key "=" typed-value`,
/// with `=` escaped inside the key so the first bare `=` always delimits.
pub fn canonicalize(key: &str, value: &AttributeValue) -> Result<Vec<u8>, MerkleError> {
    let encoded = canonical_value(value)?;
    Ok(format!("{}={encoded}", escape(key, &['='])).into_bytes())
}

/// One Merkle leaf: a key plus the canonical typed encoding of its value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Leaf {
    pub key: String,
    pub value: String,
}

impl Leaf {
    /// Build a leaf from an attribute value, encoding it canonically.
    pub fn new(key: impl Into<String>, value: &AttributeValue) -> Result<Self, MerkleError> {
        Ok(Leaf {
            key: escape(&key.into(), &['=']),
            value: canonical_value(value)?,
        })
    }

    /// Build a leaf holding a plain string value.
    pub fn text(key: impl Into<String>, value: impl Into<String>) -> Self {
        Leaf::new(key, &AttributeValue::Str(value.into())).expect("strings always encode")
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        format!("{}={}", self.key, self.value).into_bytes()
    }

    fn digest(&self) -> Signature {
        sha256(&[&[LEAF_PREFIX], &self.canonical_bytes()])
    }
}

/// A balanced hash tree over sorted leaves.
#[derive(Debug, Clone)]
pub struct MerkleTree {
    leaves: Vec<Leaf>,
    levels: Vec<Vec<Signature>>,
    root: Signature,
}

/// The distinguished root of a tree with no leaves.
pub fn empty_root() -> Signature {
    sha256(&[&[EMPTY_PREFIX]])
}

/// Build a Merkle tree. Leaves are sorted by `(key, value)` first, so any
/// permutation of the same multiset produces the same root.
pub fn build_tree(mut leaves: Vec<Leaf>) -> MerkleTree {
    leaves.sort();
    if leaves.is_empty() {
        return MerkleTree {
            leaves,
            levels: Vec::new(),
            root: empty_root(),
        };
    }

    let mut levels: Vec<Vec<Signature>> = vec![leaves.iter().map(Leaf::digest).collect()];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        let mut next = Vec::with_capacity(prev.len().div_ceil(2));
        for pair in prev.chunks(2) {
            let left = pair[0];
            let right = *pair.get(1).unwrap_or(&pair[0]); // odd node pairs with itself
            next.push(sha256(&[&[NODE_PREFIX], left.as_bytes(), right.as_bytes()]));
        }
        levels.push(next);
    }

    let root = levels.last().unwrap()[0];
    MerkleTree {
        leaves,
        levels,
        root,
    }
}

impl MerkleTree {
    pub fn root(&self) -> Signature {
        self.root
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Number of hashing passes performed: one for the leaf digests plus one
    /// per combination level, i.e. `ceil(log2 n) + 1` for `n >= 2` and `1`
    /// for a single leaf (whose digest is the root directly).
    pub fn hashing_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Convenience: the root over a set of attribute leaves.
pub fn root_over<I>(leaves: I) -> Signature
where
    I: IntoIterator<Item = Leaf>,
{
    build_tree(leaves.into_iter().collect()).root()
}
