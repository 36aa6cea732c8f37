use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::io::Write;

use serde::Serialize;

use super::{Message, Party, Payload, Tag, TranscriptEntry};
use crate::error::{AmpcError, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy)]
pub struct NetworkOptions {
    /// Hash every payload into the transcript.
    pub digests: bool,
    /// Keep full payloads in the transcript (memory heavy).
    pub retain_payloads: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self { digests: true, retain_payloads: false }
    }
}

/// A value a client kept for itself instead of sending (its own share).
#[derive(Debug, Clone, Serialize)]
pub struct LocalEntry {
    pub round: u64,
    pub client: usize,
    pub tag: Tag,
    pub label: String,
    pub eval_index: Option<usize>,
}

/// Everything a coalition of at most `T` clients can see.
#[derive(Debug, Clone)]
pub struct CollusionView {
    pub colluders: BTreeSet<usize>,
    /// Transcript entries sent or received by a colluder.
    pub messages: Vec<TranscriptEntry>,
    /// Values colluders kept locally.
    pub local: Vec<LocalEntry>,
    /// RNG stream labels each colluder drew from.
    pub streams: Vec<(usize, Vec<String>)>,
}

impl CollusionView {
    /// Distinct evaluation points of secret `label` the coalition holds.
    pub fn evaluations_of(&self, label: &str) -> BTreeSet<usize> {
        let received = self
            .messages
            .iter()
            .filter(|m| m.label == label && matches!(m.receiver, Party::Client(c) if self.colluders.contains(&c)))
            .filter_map(|m| m.eval_index);
        let kept = self.local.iter().filter(|l| l.label == label).filter_map(|l| l.eval_index);
        received.chain(kept).collect()
    }
}

pub struct NetworkHandle {
    n_clients: usize,
    degree: usize,
    seed: u64,
    options: NetworkOptions,
    round: u64,
    pending: Vec<Message>,
    inboxes: Vec<HashMap<String, VecDeque<Message>>>,
    transcript: Vec<TranscriptEntry>,
    local_log: Vec<LocalEntry>,
    streams: HashSet<(Party, String)>,
    stream_log: Vec<(Party, String)>,
    used_triples: HashSet<u64>,
    next_triple: u64,
}

impl NetworkHandle {
    /// `N` clients tolerating coalitions of up to `T`, with 1 ≤ T ≤ N−1.
    pub fn spawn(n_clients: usize, degree: usize, seed: u64) -> Result<Self> {
        Self::spawn_with(n_clients, degree, seed, NetworkOptions::default())
    }

    pub fn spawn_with(n_clients: usize, degree: usize, seed: u64, options: NetworkOptions) -> Result<Self> {
        if degree < 1 || degree >= n_clients {
            return Err(AmpcError::invalid(format!(
                "need 1 <= T <= N-1, got N={n_clients}, T={degree}"
            )));
        }
        Ok(Self {
            n_clients,
            degree,
            seed,
            options,
            round: 0,
            pending: Vec::new(),
            inboxes: (0..n_clients).map(|_| HashMap::new()).collect(),
            transcript: Vec::new(),
            local_log: Vec::new(),
            streams: HashSet::new(),
            stream_log: Vec::new(),
            used_triples: HashSet::new(),
            next_triple: 0,
        })
    }

    pub fn n_clients(&self) -> usize {
        self.n_clients
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn clients(&self) -> impl Iterator<Item = usize> {
        1..=self.n_clients
    }

    /// A fresh RNG stream owned by `party`. Each `(party, label)` pair may be
    /// drawn once; reuse would correlate noise across messages.
    pub fn stream(&mut self, party: Party, label: &str) -> Result<StreamRng> {
        self.check_party(party)?;
        if !self.streams.insert((party, label.to_string())) {
            return Err(AmpcError::violation(format!("{party} reused RNG stream '{label}'")));
        }
        self.stream_log.push((party, label.to_string()));
        Ok(rng::derive(self.seed, &[party.code(), rng::label_hash(label)]))
    }

    fn check_party(&self, p: Party) -> Result<()> {
        match p {
            Party::Client(c) if c == 0 || c > self.n_clients => {
                Err(AmpcError::invalid(format!("no such client {c}")))
            }
            _ => Ok(()),
        }
    }

    /// Queues a message for delivery at the end of the current round.
    pub fn send(&mut self, msg: Message) -> Result<()> {
        if msg.round != self.round {
            return Err(AmpcError::violation(format!(
                "message for round {} sent during round {} ({} -> {})",
                msg.round, self.round, msg.sender, msg.receiver
            )));
        }
        self.check_party(msg.sender)?;
        self.check_party(msg.receiver)?;
        if msg.receiver == Party::Dealer {
            return Err(AmpcError::violation("nothing is ever sent to the dealer"));
        }
        let tag_ok = match msg.tag {
            Tag::OpenedValue => matches!(msg.payload, Payload::Matrix(_)),
            _ => matches!(msg.payload, Payload::Share(_)),
        };
        if !tag_ok {
            return Err(AmpcError::violation(format!("tag {} does not match payload", msg.tag.as_str())));
        }
        self.pending.push(msg);
        Ok(())
    }

    /// Round barrier: delivers everything queued, in `(sender, receiver)`
    /// order (stable, so same-pair messages keep send order), logs it and
    /// advances the round. Returns the number of messages delivered.
    pub fn deliver_round(&mut self) -> usize {
        let mut batch = std::mem::take(&mut self.pending);
        batch.sort_by_key(|m| (m.sender, m.receiver));
        let count = batch.len();
        for msg in batch {
            let eval_index = msg.payload.as_share().map(|s| s.eval_index());
            if msg.sender == msg.receiver {
                if let Party::Client(c) = msg.sender {
                    self.local_log.push(LocalEntry { round: msg.round, client: c, tag: msg.tag, label: msg.label.clone(), eval_index });
                }
            } else {
                self.transcript.push(TranscriptEntry {
                    round: msg.round,
                    sender: msg.sender,
                    receiver: msg.receiver,
                    tag: msg.tag,
                    label: msg.label.clone(),
                    eval_index,
                    payload_digest: self.options.digests.then(|| msg.payload.digest()),
                    payload: self.options.retain_payloads.then(|| msg.payload.clone()),
                });
            }
            let Party::Client(r) = msg.receiver else { unreachable!("checked in send") };
            self.inboxes[r - 1].entry(msg.label.clone()).or_default().push_back(msg);
        }
        self.round += 1;
        count
    }

    /// Sends a batch and closes the round.
    pub fn exchange(&mut self, msgs: impl IntoIterator<Item = Message>) -> Result<usize> {
        for m in msgs {
            self.send(m)?;
        }
        Ok(self.deliver_round())
    }

    /// Takes every delivered message labelled `label` from `client`'s inbox,
    /// in delivery order.
    pub fn take(&mut self, client: usize, label: &str) -> Vec<Message> {
        self.inboxes
            .get_mut(client.wrapping_sub(1))
            .and_then(|ib| ib.remove(label))
            .map(Vec::from)
            .unwrap_or_default()
    }

    /// Takes exactly one message labelled `label`.
    pub fn take_one(&mut self, client: usize, label: &str) -> Result<Message> {
        let mut msgs = self.take(client, label);
        if msgs.len() != 1 {
            return Err(AmpcError::violation(format!(
                "client {client} expected one '{label}' message, found {}",
                msgs.len()
            )));
        }
        Ok(msgs.pop().expect("len checked"))
    }

    pub fn pending_inbox(&self, client: usize) -> usize {
        self.inboxes[client - 1].values().map(VecDeque::len).sum()
    }

    /// Reserves ids for `count` triples.
    pub fn allocate_triples(&mut self, count: usize) -> std::ops::Range<u64> {
        let start = self.next_triple;
        self.next_triple += count as u64;
        start..self.next_triple
    }

    /// Marks a triple as used; a second use is a protocol violation.
    pub fn consume_triple(&mut self, id: u64) -> Result<()> {
        if !self.used_triples.insert(id) {
            return Err(AmpcError::violation(format!("Beaver triple {id} used twice")));
        }
        Ok(())
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn local_log(&self) -> &[LocalEntry] {
        &self.local_log
    }

    pub fn options(&self) -> NetworkOptions {
        self.options
    }

    /// One JSON object per line.
    pub fn dump_transcript<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.transcript {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn collusion_view(&self, colluders: &[usize]) -> Result<CollusionView> {
        let set: BTreeSet<usize> = colluders.iter().copied().collect();
        if set.len() > self.degree {
            return Err(AmpcError::invalid(format!(
                "coalition of {} exceeds collusion threshold T={}",
                set.len(),
                self.degree
            )));
        }
        if let Some(&c) = set.iter().find(|&&c| c == 0 || c > self.n_clients) {
            return Err(AmpcError::invalid(format!("no such client {c}")));
        }
        let is_c = |p: Party| matches!(p, Party::Client(c) if set.contains(&c));
        let messages = self.transcript.iter().filter(|e| is_c(e.sender) || is_c(e.receiver)).cloned().collect();
        let local = self.local_log.iter().filter(|l| set.contains(&l.client)).cloned().collect();
        let streams = set
            .iter()
            .map(|&c| {
                let labels = self
                    .stream_log
                    .iter()
                    .filter(|(p, _)| *p == Party::Client(c))
                    .map(|(_, l)| l.clone())
                    .collect();
                (c, labels)
            })
            .collect();
        Ok(CollusionView { colluders: set, messages, local, streams })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RealMatrix;
    use crate::sharing::Share;

    fn share(label: &str, idx: usize) -> Share {
        Share::new(label, idx, 1, 3, RealMatrix::scalar(idx as f64).to_complex())
    }

    #[test]
    fn spawn_bounds() {
        assert!(NetworkHandle::spawn(2, 1, 0).is_ok());
        assert!(NetworkHandle::spawn(10, 9, 0).is_ok());
        assert!(NetworkHandle::spawn(4, 4, 0).is_err());
        assert!(NetworkHandle::spawn(4, 0, 0).is_err());
    }

    #[test]
    fn send_then_deliver() {
        let mut net = NetworkHandle::spawn(3, 1, 0).unwrap();
        net.send(Message::share(0, Party::Client(1), Party::Client(2), Tag::DataShare, share("x", 2))).unwrap();
        assert_eq!(net.deliver_round(), 1);
        let m = net.take_one(2, "x").unwrap();
        assert_eq!(m.sender, Party::Client(1));
        assert_eq!(net.round(), 1);
        assert_eq!(net.transcript().len(), 1);
    }

    #[test]
    fn same_pair_keeps_send_order_and_sorted_delivery() {
        let mut net = NetworkHandle::spawn(3, 1, 0).unwrap();
        net.send(Message::share(0, Party::Client(3), Party::Client(1), Tag::DataShare, share("x", 1))).unwrap();
        net.send(Message::share(0, Party::Client(2), Party::Client(1), Tag::DataShare, share("x", 1))).unwrap();
        net.send(Message::share(0, Party::Client(2), Party::Client(1), Tag::DataShare, share("x", 3))).unwrap();
        net.deliver_round();
        let got: Vec<(Party, usize)> =
            net.take(1, "x").into_iter().map(|m| (m.sender, m.into_share().unwrap().eval_index())).collect();
        assert_eq!(got, vec![(Party::Client(2), 1), (Party::Client(2), 3), (Party::Client(3), 1)]);
    }

    #[test]
    fn stale_round_is_violation() {
        let mut net = NetworkHandle::spawn(2, 1, 0).unwrap();
        net.deliver_round();
        let err = net.send(Message::share(0, Party::Client(1), Party::Client(2), Tag::DataShare, share("x", 2)));
        assert!(matches!(err, Err(AmpcError::ProtocolViolation(_))));
    }

    #[test]
    fn tag_payload_mismatch() {
        let mut net = NetworkHandle::spawn(2, 1, 0).unwrap();
        let bad = Message::share(0, Party::Client(1), Party::Client(2), Tag::OpenedValue, share("x", 2));
        assert!(net.send(bad).is_err());
    }

    #[test]
    fn streams_are_single_use_and_triples_too() {
        let mut net = NetworkHandle::spawn(2, 1, 0).unwrap();
        net.stream(Party::Client(1), "a").unwrap();
        assert!(net.stream(Party::Client(2), "a").is_ok());
        assert!(matches!(net.stream(Party::Client(1), "a"), Err(AmpcError::ProtocolViolation(_))));
        let ids = net.allocate_triples(2);
        net.consume_triple(ids.start).unwrap();
        assert!(net.consume_triple(ids.start).is_err());
    }

    #[test]
    fn self_messages_stay_local() {
        let mut net = NetworkHandle::spawn(2, 1, 0).unwrap();
        net.send(Message::share(0, Party::Client(1), Party::Client(1), Tag::DataShare, share("x", 1))).unwrap();
        net.deliver_round();
        assert!(net.transcript().is_empty());
        assert_eq!(net.local_log().len(), 1);
        assert!(net.take_one(1, "x").is_ok());
    }

    #[test]
    fn collusion_view_limits() {
        let mut net = NetworkHandle::spawn(3, 1, 0).unwrap();
        for to in 1..=3 {
            net.send(Message::share(0, Party::Client(2), Party::Client(to), Tag::DataShare, share("x2", to))).unwrap();
        }
        net.deliver_round();
        assert!(net.collusion_view(&[1, 3]).is_err());
        let v = net.collusion_view(&[1]).unwrap();
        assert_eq!(v.evaluations_of("x2").len(), 1);
        assert!(v.messages.iter().all(|m| m.receiver == Party::Client(1)));
    }
}
