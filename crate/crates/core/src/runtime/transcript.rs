use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Per-run accounting. Composed across phases with [`Transcript::then`]
/// (sequential) and [`Transcript::alongside`] (concurrent components).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: u64,
    pub message_count: u64,
    /// Largest number of messages seen on one directed edge in one round.
    pub channel_load: u64,
    /// Rounds attributed to each phase label.
    pub phases: BTreeMap<String, u64>,
    pub seed: u64,
    #[serde(default)]
    pub round_cap_hit: bool,
    #[serde(default)]
    pub routing: RoutingStats,
    /// Free-form run settings that affect results (e.g. test-only overrides).
    #[serde(default)]
    pub flags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingStats {
    pub calls: u64,
    pub messages: u64,
    /// Calls whose load exceeded the per-vertex cap.
    pub violations: u64,
    pub kappa: u64,
}

impl Transcript {
    pub fn new(seed: u64) -> Self {
        Transcript {
            seed,
            ..Default::default()
        }
    }

    /// Adds `rounds` under `phase`.
    pub fn charge(&mut self, phase: &str, rounds: u64) {
        self.rounds = self.rounds.saturating_add(rounds);
        let e = self.phases.entry(phase.to_string()).or_default();
        *e = e.saturating_add(rounds);
    }

    pub fn flag(&mut self, key: &str, value: impl ToString) {
        self.flags.insert(key.to_string(), value.to_string());
    }

    /// Appends a phase that ran after everything recorded so far.
    pub fn then(&mut self, other: &Transcript) {
        self.rounds = self.rounds.saturating_add(other.rounds);
        for (k, v) in &other.phases {
            let e = self.phases.entry(k.clone()).or_default();
            *e = e.saturating_add(*v);
        }
        self.absorb_counters(other);
    }

    /// Merges runs that executed concurrently on disjoint parts of the graph:
    /// elapsed rounds are the maximum, message counts add up.
    pub fn alongside(&mut self, others: &[Transcript]) {
        let mut longest = 0u64;
        let mut phases: BTreeMap<String, u64> = BTreeMap::new();
        for o in others {
            longest = longest.max(o.rounds);
            for (k, v) in &o.phases {
                let e = phases.entry(k.clone()).or_default();
                *e = (*e).max(*v);
            }
            self.absorb_counters(o);
        }
        self.rounds = self.rounds.saturating_add(longest);
        for (k, v) in phases {
            let e = self.phases.entry(k).or_default();
            *e = e.saturating_add(v);
        }
    }

    fn absorb_counters(&mut self, other: &Transcript) {
        self.message_count = self.message_count.saturating_add(other.message_count);
        self.channel_load = self.channel_load.max(other.channel_load);
        self.round_cap_hit |= other.round_cap_hit;
        self.routing.calls += other.routing.calls;
        self.routing.messages += other.routing.messages;
        self.routing.violations += other.routing.violations;
        self.routing.kappa = self.routing.kappa.max(other.routing.kappa);
        for (k, v) in &other.flags {
            self.flags.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
}
