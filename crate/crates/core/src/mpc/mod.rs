//! Share-level computation: local linear operations, Beaver-triple
//! multiplication and execution of small arithmetic programs.

mod beaver;
mod distribute;
mod ops;
mod program;

pub use beaver::{
    beaver_multiply, beaver_multiply_batch, gen_beaver_triple, provision_triples, BeaverJob, BeaverOutput,
    BeaverTripleShares, OpenedValue, TripleDims,
};
pub use distribute::{collect_result, open_to_all, share_secrets, NoiseParams, ShareJob};
pub use ops::{add_constant, add_shares, scale_share, sub_shares};
pub use program::{orchestrate, Node, Op, Program, ProgramResult};
