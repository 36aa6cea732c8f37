//! Deterministic in-process network of honest-but-curious clients.
//!
//! Clients exchange messages over perfect point-to-point channels in
//! synchronous rounds. Messages queued during a round are delivered at the
//! barrier ([`NetworkHandle::deliver_round`]) sorted by `(sender, receiver)`,
//! so the transcript is a pure function of the seed and the protocol.

mod handle;
mod message;

pub use handle::{CollusionView, LocalEntry, NetworkHandle, NetworkOptions};
pub use message::{Message, Party, Payload, Tag, TranscriptEntry};
