use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::numerics::RealMatrix;
use crate::sharing::Share;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    /// The simulated offline-phase triple dealer.
    Dealer,
    /// Client ids are 1-based and equal to the client's evaluation index.
    Client(usize),
}

impl Party {
    /// Numeric code used in RNG stream derivation.
    pub fn code(self) -> u64 {
        match self {
            Party::Dealer => 0,
            Party::Client(i) => i as u64,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Dealer => write!(f, "dealer"),
            Party::Client(i) => write!(f, "client-{i}"),
        }
    }
}

impl Serialize for Party {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    DataShare,
    TripleShare,
    DiffShare,
    OpenedValue,
    ResultShare,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::DataShare => "data-share",
            Tag::TripleShare => "triple-share",
            Tag::DiffShare => "diff-share",
            Tag::OpenedValue => "opened-value",
            Tag::ResultShare => "result-share",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Share(Share),
    Matrix(RealMatrix),
}

impl Payload {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Payload::Share(s) => s.to_bytes(),
            Payload::Matrix(m) => {
                let mut out = Vec::with_capacity(8 + 8 * m.data().len());
                out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
                out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
                for v in m.data() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                out
            }
        }
    }

    /// Hex SHA-256 of the binary record.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }

    pub fn as_share(&self) -> Option<&Share> {
        match self {
            Payload::Share(s) => Some(s),
            Payload::Matrix(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Message {
    pub round: u64,
    pub sender: Party,
    pub receiver: Party,
    pub tag: Tag,
    /// Protocol-level name of the carried value, e.g. a share's secret id.
    pub label: String,
    pub payload: Payload,
}

impl Message {
    pub fn share(round: u64, sender: Party, receiver: Party, tag: Tag, share: Share) -> Self {
        Self { round, sender, receiver, tag, label: share.secret_id().to_string(), payload: Payload::Share(share) }
    }

    pub fn into_share(self) -> Option<Share> {
        match self.payload {
            Payload::Share(s) => Some(s),
            Payload::Matrix(_) => None,
        }
    }
}

/// One logged delivery. `payload` is only kept when the network retains
/// payloads (e.g. for `--dump-transcript`).
#[derive(Debug, Clone, Serialize)]
pub struct TranscriptEntry {
    pub round: u64,
    pub sender: Party,
    pub receiver: Party,
    pub tag: Tag,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
}
