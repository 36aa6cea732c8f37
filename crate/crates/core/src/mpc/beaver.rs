use rand::Rng;

use super::distribute::NoiseParams;
use crate::error::{AmpcError, Result};
use crate::exec::Execution;
use crate::network::{Message, NetworkHandle, Party, Tag};
use crate::numerics::{sample_truncated_gaussian, ComplexMatrix, RealMatrix};
use crate::sharing::{evaluate_shares, make_share_polynomial, reconstruct_complex, Share};

/// Shapes of a triple: A is m×k, B is k×n, C = AB is m×n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleDims {
    pub m: usize,
    pub k: usize,
    pub n: usize,
}

impl TripleDims {
    pub fn new(m1: usize, n1: usize, m2: usize, n2: usize) -> Result<Self> {
        if n1 != m2 {
            return Err(AmpcError::invalid(format!("triple dims {m1}x{n1} times {m2}x{n2} do not chain")));
        }
        Ok(Self { m: m1, k: n1, n: n2 })
    }

    pub fn for_product(u: (usize, usize), v: (usize, usize)) -> Result<Self> {
        Self::new(u.0, u.1, v.0, v.1)
    }
}

/// Per-client shares of a random triple with AB = C. `a[i-1]` is client `i`'s.
#[derive(Debug, Clone)]
pub struct BeaverTripleShares {
    pub id: u64,
    pub dims: TripleDims,
    pub a: Vec<Share>,
    pub b: Vec<Share>,
    pub c: Vec<Share>,
}

/// A publicly opened difference (D = U − A or E = V − B).
#[derive(Debug, Clone)]
pub struct OpenedValue {
    pub name: String,
    pub value: ComplexMatrix,
    pub round: u64,
}

#[derive(Debug, Clone)]
pub struct BeaverJob {
    pub label: String,
    pub u: Vec<Share>,
    pub v: Vec<Share>,
    pub triple: BeaverTripleShares,
}

#[derive(Debug, Clone)]
pub struct BeaverOutput {
    /// Shares of UV, by client.
    pub shares: Vec<Share>,
    /// D and E as opened by client 1 (every client opens the same values).
    pub opened: [OpenedValue; 2],
}

fn triple_label(id: u64, part: char) -> String {
    format!("triple/{id}/{part}")
}

/// Simulated trusted dealer: samples A, B with TN(0, σ², [−t, t]) entries,
/// forms C = AB and shares all three. The plaintexts go out of scope here.
///
/// σ = 0 yields the all-zero triple (noise-disabled test hook).
pub fn gen_beaver_triple<R: Rng + ?Sized>(
    id: u64,
    dims: TripleDims,
    degree: usize,
    n_points: usize,
    sigma: f64,
    trunc_t: f64,
    rng: &mut R,
) -> Result<BeaverTripleShares> {
    let mut draw = |rows: usize, cols: usize| -> Result<RealMatrix> {
        if sigma == 0.0 {
            return Ok(RealMatrix::zeros(rows, cols));
        }
        let data = (0..rows * cols)
            .map(|_| sample_truncated_gaussian(sigma, trunc_t, rng))
            .collect::<Result<Vec<f64>>>()?;
        RealMatrix::new(rows, cols, data)
    };
    let a = draw(dims.m, dims.k)?;
    let b = draw(dims.k, dims.n)?;
    let c = a.matmul(&b)?;
    let sigma_s = sigma / (degree as f64).sqrt();
    let mut share = |part: char, m: RealMatrix| {
        make_share_polynomial(triple_label(id, part), m, degree, n_points, sigma_s, trunc_t, rng)
            .map(|p| evaluate_shares(&p))
    };
    Ok(BeaverTripleShares { id, dims, a: share('A', a)?, b: share('B', b)?, c: share('C', c)? })
}

/// Offline phase: the dealer generates one triple per entry of `dims` and
/// delivers the shares to the clients in a single round.
pub fn provision_triples(
    net: &mut NetworkHandle,
    exec: Execution,
    dims: &[TripleDims],
    noise: NoiseParams,
) -> Result<Vec<BeaverTripleShares>> {
    let ids = net.allocate_triples(dims.len());
    let mut work = Vec::with_capacity(dims.len());
    for (id, &d) in ids.zip(dims) {
        work.push((id, d, net.stream(Party::Dealer, &format!("triple/{id}"))?));
    }
    let (degree, n) = (net.degree(), net.n_clients());
    let triples = exec.try_map_vec(work, |(id, d, mut rng)| {
        gen_beaver_triple(id, d, degree, n, noise.triple_sigma, noise.trunc_t, &mut rng)
    })?;

    let round = net.round();
    let mut meta = Vec::with_capacity(triples.len());
    for t in triples {
        meta.push((t.id, t.dims));
        for s in t.a.into_iter().chain(t.b).chain(t.c) {
            let to = Party::Client(s.eval_index());
            net.send(Message::share(round, Party::Dealer, to, Tag::TripleShare, s))?;
        }
    }
    net.deliver_round();

    let mut out = Vec::with_capacity(meta.len());
    for (id, d) in meta {
        let mut parts: [Vec<Share>; 3] = Default::default();
        for (slot, part) in parts.iter_mut().zip(['A', 'B', 'C']) {
            for c in 1..=n {
                let s = net
                    .take_one(c, &triple_label(id, part))?
                    .into_share()
                    .ok_or_else(|| AmpcError::violation("triple message without share"))?;
                slot.push(s);
            }
        }
        let [a, b, c] = parts;
        out.push(BeaverTripleShares { id, dims: d, a, b, c });
    }
    Ok(out)
}

fn check_job(job: &BeaverJob, n: usize) -> Result<()> {
    if job.u.len() != n || job.v.len() != n {
        return Err(AmpcError::InsufficientShares { needed: n, got: job.u.len().min(job.v.len()) });
    }
    let d = job.triple.dims;
    if job.u[0].shape() != (d.m, d.k) || job.v[0].shape() != (d.k, d.n) {
        return Err(AmpcError::invalid(format!(
            "'{}': operands {:?}·{:?} do not fit triple {}x{}·{}x{}",
            job.label,
            job.u[0].shape(),
            job.v[0].shape(),
            d.m,
            d.k,
            d.k,
            d.n
        )));
    }
    Ok(())
}

/// Online phase for several independent products sharing one opening round.
///
/// Each client `k` forms [D]_k = [U]_k − [A]_k and [E]_k = [V]_k − [B]_k and
/// sends them to everyone; each client reconstructs D and E from the first
/// T+1 and outputs D[B]_k + [A]_k E + DE + [C]_k.
pub fn beaver_multiply_batch(net: &mut NetworkHandle, exec: Execution, jobs: Vec<BeaverJob>) -> Result<Vec<BeaverOutput>> {
    let n = net.n_clients();
    for job in &jobs {
        check_job(job, n)?;
    }
    for job in &jobs {
        net.consume_triple(job.triple.id)?;
    }

    let diffs: Vec<(Vec<Share>, Vec<Share>)> = exec.try_map_range(jobs.len(), |j| {
        let job = &jobs[j];
        let mut ds = Vec::with_capacity(n);
        let mut es = Vec::with_capacity(n);
        for k in 0..n {
            let d = job.u[k].value().sub(job.triple.a[k].value())?;
            let e = job.v[k].value().sub(job.triple.b[k].value())?;
            ds.push(job.u[k].with_value(format!("{}/D", job.label), d));
            es.push(job.v[k].with_value(format!("{}/E", job.label), e));
        }
        Ok::<_, AmpcError>((ds, es))
    })?;

    let round = net.round();
    for (ds, es) in &diffs {
        for s in ds.iter().chain(es) {
            let from = Party::Client(s.eval_index());
            for to in 1..=n {
                net.send(Message::share(round, from, Party::Client(to), Tag::DiffShare, s.clone()))?;
            }
        }
    }
    net.deliver_round();

    // Inbox contents per (job, receiving client).
    let mut received = Vec::with_capacity(jobs.len() * n);
    for job in &jobs {
        for l in 1..=n {
            let take = |net: &mut NetworkHandle, name: &str| -> Vec<Share> {
                net.take(l, &format!("{}/{name}", job.label)).into_iter().filter_map(Message::into_share).collect()
            };
            let d = take(net, "D");
            let e = take(net, "E");
            received.push((d, e));
        }
    }

    let per_client = exec.try_map_range(jobs.len() * n, |idx| {
        let (j, k) = (idx / n, idx % n);
        let job = &jobs[j];
        let (ds, es) = &received[idx];
        let d = reconstruct_complex(ds)?;
        let e = reconstruct_complex(es)?;
        let t = &job.triple;
        let mut out = d.matmul(t.b[k].value())?;
        out = out.add(&t.a[k].value().matmul(&e)?)?;
        out = out.add(&d.matmul(&e)?)?;
        out = out.add(t.c[k].value())?;
        Ok::<_, AmpcError>((t.c[k].with_value(job.label.clone(), out), d, e))
    })?;

    let mut outputs = Vec::with_capacity(jobs.len());
    let mut it = per_client.into_iter();
    for job in &jobs {
        let mut shares = Vec::with_capacity(n);
        let mut opened = None;
        for _ in 0..n {
            let (s, d, e) = it.next().expect("n outputs per job");
            if opened.is_none() {
                opened = Some([
                    OpenedValue { name: format!("{}/D", job.label), value: d, round },
                    OpenedValue { name: format!("{}/E", job.label), value: e, round },
                ]);
            }
            shares.push(s);
        }
        outputs.push(BeaverOutput { shares, opened: opened.expect("n >= 2") });
    }
    Ok(outputs)
}

/// Single multiplication; see [`beaver_multiply_batch`].
pub fn beaver_multiply(
    net: &mut NetworkHandle,
    exec: Execution,
    label: &str,
    u: Vec<Share>,
    v: Vec<Share>,
    triple: BeaverTripleShares,
) -> Result<BeaverOutput> {
    let job = BeaverJob { label: label.to_string(), u, v, triple };
    Ok(beaver_multiply_batch(net, exec, vec![job])?.pop().expect("one job"))
}
