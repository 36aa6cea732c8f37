use ampc::learn::{split_clients, synthetic_separable, train, Dataset, Task, TrainConfig};
use ampc::mpc::NoiseParams;
use ampc::network::{Message, NetworkHandle, NetworkOptions, Party, Payload, Tag};
use ampc::numerics::RealMatrix;
use ampc::sharing::Share;
use ampc::Execution;

fn datasets(n: usize) -> Vec<Dataset> {
    split_clients(&synthetic_separable(90, 4, 5).unwrap(), n, 1.0).unwrap().0
}

fn run(n: usize, t: usize, options: NetworkOptions) -> NetworkHandle {
    let cfg = TrainConfig {
        task: Task::Logistic,
        gamma: 1.0,
        iterations: 2,
        batch: 10,
        seed: 3,
        noise: NoiseParams { sigma_s: 1.0, triple_sigma: 1.0, trunc_t: 100.0 },
        init: None,
    };
    let mut net = NetworkHandle::spawn_with(n, t, 3, options).unwrap();
    train(&mut net, Execution::default(), &datasets(n), &cfg).unwrap();
    net
}

#[test]
fn only_shares_and_differences_leave_a_client() {
    let parts = datasets(3);
    let net = run(3, 2, NetworkOptions { digests: true, retain_payloads: true });
    assert!(!net.transcript().is_empty());
    for e in net.transcript() {
        assert!(matches!(e.tag, Tag::DataShare | Tag::TripleShare | Tag::DiffShare | Tag::ResultShare), "{e:?}");
        let Some(Payload::Share(s)) = &e.payload else { panic!("non-share payload in {e:?}") };
        if e.tag != Tag::DataShare {
            continue;
        }
        // No row of a shared batch equals a plaintext record.
        let v = s.value().re();
        for r in 0..v.rows() {
            for d in &parts {
                for k in 0..d.rows() {
                    let same = v.row(r).iter().zip(d.features.row(k)).all(|(a, b)| (a - b).abs() < 1e-9);
                    assert!(!same || v.cols() != d.cols(), "plaintext row leaked in {}", e.label);
                }
            }
        }
    }
}

#[test]
fn transcripts_are_reproducible() {
    let dump = |net: &NetworkHandle| {
        let mut buf = Vec::new();
        net.dump_transcript(&mut buf).unwrap();
        buf
    };
    let a = dump(&run(3, 1, NetworkOptions::default()));
    let b = dump(&run(3, 1, NetworkOptions::default()));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn coalition_sees_at_most_t_points_of_foreign_secrets() {
    let net = run(4, 2, NetworkOptions::default());
    let view = net.collusion_view(&[1, 2]).unwrap();
    let labels: std::collections::BTreeSet<String> = net.transcript().iter().map(|e| e.label.clone()).collect();
    for l in labels.iter().filter(|l| l.starts_with("it0/X") && (l.ends_with('3') || l.ends_with('4'))) {
        assert!(view.evaluations_of(l).len() <= 2, "{l}");
    }
    assert!(net.collusion_view(&[1, 2, 3]).is_err());
}

#[test]
fn round_contract_is_enforced() {
    let mut net = NetworkHandle::spawn(2, 1, 0).unwrap();
    let s = Share::new("x", 2, 1, 2, RealMatrix::scalar(1.0).to_complex());
    let stale = Message::share(net.round() + 1, Party::Client(1), Party::Client(2), Tag::DataShare, s.clone());
    assert!(net.send(stale).is_err());
    let wrong = Message::share(net.round(), Party::Client(1), Party::Client(2), Tag::OpenedValue, s.clone());
    assert!(net.send(wrong).is_err());
    net.send(Message::share(net.round(), Party::Client(1), Party::Client(2), Tag::DataShare, s)).unwrap();
    assert_eq!(net.deliver_round(), 1);
    assert_eq!(net.take(2, "x").len(), 1);
    assert!(net.stream(Party::Client(1), "a").is_ok());
    assert!(net.stream(Party::Client(1), "a").is_err());
}
