use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::knowledge::{NodeId, Tick};

use super::topology::{LinkMode, Topology};
use super::trace::{Trace, TraceCategory};
use super::NetError;

/// Node behaviour driven by the simulation loop.
pub trait Application {
    type Timer: Clone + fmt::Debug;

    fn on_deliver(&mut self, sim: &mut Simulation<Self::Timer>, to: &NodeId, from: &NodeId, bytes: Vec<u8>);

    fn on_timer(&mut self, sim: &mut Simulation<Self::Timer>, node: &NodeId, timer: Self::Timer);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendOutcome {
    Scheduled { at: Tick },
    Dropped,
}

#[derive(Debug, Clone)]
enum Event<T> {
    Deliver {
        from: NodeId,
        to: NodeId,
        bytes: Vec<u8>,
        label: String,
    },
    Timer {
        node: NodeId,
        timer: T,
    },
}

/// Event queue, clock, links and the single seeded RNG of a run.
#[derive(Debug)]
pub struct Simulation<T> {
    topology: Topology,
    now: Tick,
    seq: u64,
    queue: BTreeMap<(Tick, u64), Event<T>>,
    rng: ChaCha8Rng,
    /// Latest delivery time per link direction, keeping each one FIFO.
    link_clock: BTreeMap<(usize, bool), Tick>,
    pub trace: Trace,
}

impl<T: Clone + fmt::Debug> Simulation<T> {
    pub fn new(topology: Topology, seed: u64) -> Self {
        Simulation {
            topology,
            now: 0,
            seq: 0,
            queue: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            link_clock: BTreeMap::new(),
            trace: Trace::default(),
        }
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    fn push(&mut self, at: Tick, event: Event<T>) {
        self.queue.insert((at, self.seq), event);
        self.seq += 1;
    }

    /// Fires `timer` at `node` at tick `at`, or now if `at` has passed.
    pub fn schedule_timer(&mut self, at: Tick, node: NodeId, timer: T) {
        self.push(at.max(self.now), Event::Timer { node, timer });
    }

    pub fn record(&mut self, category: TraceCategory, node: impl fmt::Display, detail: impl Into<String>) {
        self.trace.push(self.now, category, node, detail);
    }

    /// Puts `bytes` on the link from `from` to `to`.
    pub fn send(&mut self, from: &NodeId, to: &NodeId, bytes: Vec<u8>, label: &str) -> Result<SendOutcome, NetError> {
        let (index, link) = match self.topology.link_between(from, to) {
            Some((i, l)) => (i, l.clone()),
            None => {
                return Err(NetError::NoLink {
                    from: from.clone(),
                    to: to.clone(),
                })
            }
        };
        let forward = &link.from == from;
        if !forward && link.mode == LinkMode::Simplex {
            self.trace.stats.rejected += 1;
            self.record(TraceCategory::Drop, from, format!("to={to} {label} simplex violation"));
            return Err(NetError::SimplexViolation {
                from: link.from.clone(),
                to: link.to.clone(),
            });
        }
        let loss = link.loss_probability;
        let arrival = self.now + link.transfer_time(bytes.len());
        self.trace.stats.sent += 1;
        let draw: f64 = self.rng.gen();
        if draw < loss {
            self.trace.stats.dropped += 1;
            self.record(TraceCategory::Drop, from, format!("to={to} {label} bytes={} lost", bytes.len()));
            return Ok(SendOutcome::Dropped);
        }
        let clock = self.link_clock.entry((index, forward)).or_insert(0);
        let at = arrival.max(*clock);
        *clock = at;
        self.record(
            TraceCategory::Send,
            from,
            format!("to={to} {label} bytes={} at={at}", bytes.len()),
        );
        self.push(
            at,
            Event::Deliver {
                from: from.clone(),
                to: to.clone(),
                bytes,
                label: label.to_string(),
            },
        );
        Ok(SendOutcome::Scheduled { at })
    }

    /// Sends every frame, in order, over each outgoing link of `from`.
    pub fn broadcast(&mut self, from: &NodeId, frames: &[Vec<u8>], label: &str) -> Vec<SendOutcome> {
        let mut out = Vec::new();
        for to in self.topology.neighbours(from) {
            for f in frames {
                if let Ok(o) = self.send(from, &to, f.clone(), label) {
                    out.push(o);
                }
            }
        }
        out
    }

    /// Processes queued events up to and including `t_end` in (time,
    /// insertion) order, then advances the clock to `t_end`. Returns the
    /// number of events processed.
    pub fn run_until<A: Application<Timer = T>>(&mut self, app: &mut A, t_end: Tick) -> usize {
        let mut processed = 0;
        while let Some(entry) = self.queue.first_entry() {
            let (at, _) = *entry.key();
            if at > t_end {
                break;
            }
            let event = entry.remove();
            self.now = at;
            processed += 1;
            match event {
                Event::Deliver { from, to, bytes, label } => {
                    self.trace.stats.delivered += 1;
                    self.record(
                        TraceCategory::Deliver,
                        &to,
                        format!("from={from} {label} bytes={}", bytes.len()),
                    );
                    app.on_deliver(self, &to, &from, bytes);
                }
                Event::Timer { node, timer } => app.on_timer(self, &node, timer),
            }
        }
        self.now = self.now.max(t_end);
        processed
    }
}
