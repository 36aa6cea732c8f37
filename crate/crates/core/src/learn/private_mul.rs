use crate::error::{AmpcError, Result};
use crate::exec::Execution;
use crate::mpc::{beaver_multiply_batch, share_secrets, BeaverJob, BeaverTripleShares, NoiseParams, OpenedValue, ShareJob, TripleDims};
use crate::network::{NetworkHandle, Tag};
use crate::numerics::{Complex64, ComplexMatrix};
use crate::sharing::Share;

/// Result of one [`private_mul`]: client `k`'s share of UV at `shares[k-1]`.
#[derive(Debug, Clone)]
pub struct PrivateMulOutput {
    pub shares: Vec<Share>,
    /// Every Beaver difference opened along the way.
    pub opened: Vec<OpenedValue>,
}

/// Triple shapes [`private_mul`] consumes, in (i, j) order over i ≠ j.
pub fn private_mul_triple_dims(u: (usize, usize), v: (usize, usize), n_clients: usize) -> Result<Vec<TripleDims>> {
    let d = TripleDims::for_product(u, v)?;
    Ok(vec![d; n_clients * n_clients - n_clients])
}

/// Cross-share multiplication.
///
/// Client i re-shares its shares [U]_i and [V]_i, plus the local product
/// [U]_i[V]_i for the diagonal term. Every off-diagonal product
/// [U]_i[V]_j runs through a Beaver triple; client k then outputs
/// (1/N²)·Σ_i Σ_j [[U]_i[V]_j]_k. Since (1/N)·Σ_i [U]_i = U whenever T < N,
/// the result is a degree-T sharing of UV.
///
/// `triples` must hold N² − N triples in (i, j) order over i ≠ j, as sized by
/// [`private_mul_triple_dims`].
pub fn private_mul(
    net: &mut NetworkHandle,
    exec: Execution,
    label: &str,
    u: &[Share],
    v: &[Share],
    triples: Vec<BeaverTripleShares>,
    noise: NoiseParams,
) -> Result<PrivateMulOutput> {
    let n = net.n_clients();
    if u.len() != n || v.len() != n {
        return Err(AmpcError::InsufficientShares { needed: n, got: u.len().min(v.len()) });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    if triples.len() != pairs.len() {
        return Err(AmpcError::IncompleteAggregation(format!(
            "'{label}': {} of {} cross terms have a triple",
            triples.len().min(pairs.len()),
            pairs.len()
        )));
    }
    for (k, (a, b)) in u.iter().zip(v).enumerate() {
        if a.eval_index() != k + 1 || b.eval_index() != k + 1 {
            return Err(AmpcError::invalid(format!("'{label}': share slot {} holds ω_{}", k + 1, a.eval_index())));
        }
    }

    let diagonal = exec.try_map_range(n, |i| u[i].value().matmul(v[i].value()))?;
    if u.iter().chain(v).any(|s| !s.value().is_finite()) || diagonal.iter().any(|p| !p.is_finite()) {
        return Err(AmpcError::NumericOverflow(format!("'{label}': share products left the double range")));
    }
    let mut jobs = Vec::with_capacity(3 * n);
    for i in 0..n {
        let owner = i + 1;
        jobs.push(ShareJob { owner, label: format!("{label}/U{owner}"), secret: u[i].value().clone() });
        jobs.push(ShareJob { owner, label: format!("{label}/V{owner}"), secret: v[i].value().clone() });
    }
    for (i, p) in diagonal.into_iter().enumerate() {
        jobs.push(ShareJob { owner: i + 1, label: format!("{label}/P{0}{0}", i + 1), secret: p });
    }
    let mut shared = share_secrets(net, exec, jobs, noise, Tag::DataShare)?;
    let products = shared.split_off(2 * n);
    let (uu, vv): (Vec<_>, Vec<_>) = shared.chunks(2).map(|c| (c[0].clone(), c[1].clone())).unzip();

    let beaver: Vec<BeaverJob> = pairs
        .iter()
        .zip(triples)
        .map(|(&(i, j), triple)| BeaverJob {
            label: format!("{label}/P{}{}", i + 1, j + 1),
            u: uu[i].clone(),
            v: vv[j].clone(),
            triple,
        })
        .collect();
    let outs = beaver_multiply_batch(net, exec, beaver)?;

    let weight = Complex64::new(1.0 / (n * n) as f64, 0.0);
    let shares = exec.try_map_range(n, |k| {
        let (rows, cols) = products[0][k].shape();
        let mut acc = ComplexMatrix::zeros(rows, cols);
        for p in products.iter().map(|p| &p[k]).chain(outs.iter().map(|o| &o.shares[k])) {
            acc.axpy(weight, p.value())?;
        }
        Ok::<_, AmpcError>(products[0][k].with_value(label, acc))
    })?;
    let opened = outs.into_iter().flat_map(|o| o.opened).collect();
    Ok(PrivateMulOutput { shares, opened })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::provision_triples;
    use crate::numerics::RealMatrix;
    use crate::rng;
    use crate::sharing::{evaluate_shares, make_share_polynomial, reconstruct};
    use rand::Rng;

    fn noise() -> NoiseParams {
        NoiseParams { sigma_s: 0.5, triple_sigma: 1.0, trunc_t: 100.0 }
    }

    fn run(n: usize, t: usize, u: &RealMatrix, v: &RealMatrix, seed: u64) -> RealMatrix {
        let mut net = NetworkHandle::spawn(n, t, seed).unwrap();
        let mut r = rng::derive(seed, &[99]);
        let su = evaluate_shares(&make_share_polynomial("U", u.clone(), t, n, 0.5, 100.0, &mut r).unwrap());
        let sv = evaluate_shares(&make_share_polynomial("V", v.clone(), t, n, 0.5, 100.0, &mut r).unwrap());
        let dims = private_mul_triple_dims(u.shape(), v.shape(), n).unwrap();
        let triples = provision_triples(&mut net, Execution::Sequential, &dims, noise()).unwrap();
        let out = private_mul(&mut net, Execution::Sequential, "uv", &su, &sv, triples, noise()).unwrap();
        reconstruct(&out.shares).unwrap().value
    }

    #[test]
    fn identity_product() {
        let i2 = RealMatrix::identity(2);
        assert!(run(2, 1, &i2, &i2, 1).max_abs_diff(&i2) < 1e-8);
    }

    #[test]
    fn four_clients_match_plain_product() {
        let mut r = rng::derive(5, &[]);
        for case in 0..5 {
            let u = RealMatrix::from_fn(3, 2, |_, _| r.random_range(-1.0..1.0));
            let v = RealMatrix::from_fn(2, 3, |_, _| r.random_range(-1.0..1.0));
            let want = u.matmul(&v).unwrap();
            let got = run(4, 3, &u, &v, case);
            assert!(got.sub(&want).unwrap().frobenius() / want.frobenius() < 1e-7);
        }
    }

    #[test]
    fn share_average_recovers_secret() {
        let mut r = rng::derive(8, &[]);
        for n in 2..=8 {
            let s = RealMatrix::from_fn(2, 2, |_, _| r.random_range(-1.0..1.0));
            let shares = evaluate_shares(&make_share_polynomial("s", s.clone(), n - 1, n, 1.0, 100.0, &mut r).unwrap());
            let mut acc = ComplexMatrix::zeros(2, 2);
            for sh in &shares {
                acc.axpy(Complex64::new(1.0 / n as f64, 0.0), sh.value()).unwrap();
            }
            assert!(acc.re().max_abs_diff(&s) < 1e-12);
            assert!(acc.max_abs_imag() < 1e-12);
        }
    }

    #[test]
    fn missing_cross_term_is_rejected() {
        let mut net = NetworkHandle::spawn(3, 2, 0).unwrap();
        let mut r = rng::derive(0, &[]);
        let x = RealMatrix::scalar(2.0);
        let s = evaluate_shares(&make_share_polynomial("x", x, 2, 3, 0.5, 100.0, &mut r).unwrap());
        let dims = private_mul_triple_dims((1, 1), (1, 1), 3).unwrap();
        let mut triples = provision_triples(&mut net, Execution::Sequential, &dims, noise()).unwrap();
        triples.pop();
        let err = private_mul(&mut net, Execution::Sequential, "xx", &s, &s, triples, noise()).unwrap_err();
        assert!(matches!(err, AmpcError::IncompleteAggregation(_)));
    }
}
