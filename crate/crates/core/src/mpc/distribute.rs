use crate::error::{AmpcError, Result};
use crate::exec::Execution;
use crate::network::{Message, NetworkHandle, Party, Tag};
use crate::numerics::ComplexMatrix;
use crate::sharing::{evaluate_shares, make_share_polynomial, reconstruct, Reconstruction, Share};

/// Noise settings for one protocol run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Per-coefficient std-dev of share polynomials.
    pub sigma_s: f64,
    /// Std-dev of Beaver triple factors A and B.
    pub triple_sigma: f64,
    /// Truncation half-width for both.
    pub trunc_t: f64,
}

impl NoiseParams {
    /// No noise at all: shares equal secrets and triples are zero. Only for
    /// testing protocol plumbing.
    pub fn disabled() -> Self {
        Self { sigma_s: 0.0, triple_sigma: 0.0, trunc_t: 1.0 }
    }
}

/// One secret to be shared by `owner` under a unique `label`.
#[derive(Debug, Clone)]
pub struct ShareJob {
    pub owner: usize,
    pub label: String,
    pub secret: ComplexMatrix,
}

/// Sharing round: each owner draws its polynomial from a dedicated stream
/// and sends share `i` to client `i` (keeping its own). Returns, per job, the
/// shares indexed by client (`[i-1]` is client `i`'s).
pub fn share_secrets(
    net: &mut NetworkHandle,
    exec: Execution,
    jobs: Vec<ShareJob>,
    noise: NoiseParams,
    tag: Tag,
) -> Result<Vec<Vec<Share>>> {
    let (degree, n) = (net.degree(), net.n_clients());
    // Streams are handed out sequentially so their identity is independent
    // of scheduling; the sampling itself can then run in parallel.
    let mut work = Vec::with_capacity(jobs.len());
    for job in jobs {
        let rng = net.stream(Party::Client(job.owner), &format!("share/{}", job.label))?;
        work.push((job, rng));
    }
    let labels: Vec<(usize, String)> = work.iter().map(|(j, _)| (j.owner, j.label.clone())).collect();
    let polys = exec.try_map_vec(work, |(job, mut rng)| {
        make_share_polynomial(job.label, job.secret, degree, n, noise.sigma_s, noise.trunc_t, &mut rng)
            .map(|p| evaluate_shares(&p))
    })?;
    let round = net.round();
    for (shares, (owner, _)) in polys.into_iter().zip(&labels) {
        for s in shares {
            let to = Party::Client(s.eval_index());
            net.send(Message::share(round, Party::Client(*owner), to, tag, s))?;
        }
    }
    net.deliver_round();
    labels
        .iter()
        .map(|(_, label)| {
            (1..=n)
                .map(|c| {
                    net.take_one(c, label)?
                        .into_share()
                        .ok_or_else(|| AmpcError::violation("share message without share payload"))
                })
                .collect()
        })
        .collect()
}

/// Output stage: every client sends its share of `label` to `receiver`,
/// which reconstructs from the first T+1 it holds.
pub fn collect_result(net: &mut NetworkHandle, shares: &[Share], receiver: usize, label: &str) -> Result<Reconstruction> {
    let round = net.round();
    for (k, s) in shares.iter().enumerate() {
        let s = s.with_value(label, s.value().clone());
        net.send(Message::share(round, Party::Client(k + 1), Party::Client(receiver), Tag::ResultShare, s))?;
    }
    net.deliver_round();
    let got: Vec<Share> = net.take(receiver, label).into_iter().filter_map(Message::into_share).collect();
    reconstruct(&got)
}

/// Opens a shared value to every client in one all-to-all round; returns
/// each client's reconstruction, by client.
pub fn open_to_all(net: &mut NetworkHandle, shares: &[Share], label: &str) -> Result<Vec<Reconstruction>> {
    let round = net.round();
    let n = net.n_clients();
    for (k, s) in shares.iter().enumerate() {
        let s = s.with_value(label, s.value().clone());
        for to in 1..=n {
            net.send(Message::share(round, Party::Client(k + 1), Party::Client(to), Tag::ResultShare, s.clone()))?;
        }
    }
    net.deliver_round();
    (1..=n)
        .map(|c| {
            let got: Vec<Share> = net.take(c, label).into_iter().filter_map(Message::into_share).collect();
            reconstruct(&got)
        })
        .collect()
}
