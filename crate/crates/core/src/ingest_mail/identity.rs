use std::collections::{BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Quarantined, RawMessage};

/// Index of a [`DeveloperIdentity`] inside its [`IdentityMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdentityId(pub u32);

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeveloperIdentity {
    pub id: IdentityId,
    pub canonical_email: String,
    pub canonical_name: String,
    /// Observed `(name, email)` pairs, name trimmed and email lowercased.
    pub aliases: BTreeSet<(String, String)>,
    pub first_seen: DateTime<Utc>,
}

/// Lowercases and collapses internal whitespace; quotes around the name are dropped.
pub fn normalize_name(name: &str) -> String {
    name.trim()
        .trim_matches(|c| c == '"' || c == '\'')
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn normalize_email(email: &str) -> String {
    email.trim().to_lowercase()
}

fn alias_key(name: &str, email: &str) -> (String, String) {
    (name.split_whitespace().collect::<Vec<_>>().join(" "), normalize_email(email))
}

/// Partition of all observed `(name, email)` pairs into developer identities.
#[derive(Debug, Clone, Default)]
pub struct IdentityMap {
    identities: Vec<DeveloperIdentity>,
    by_alias: HashMap<(String, String), IdentityId>,
}

impl IdentityMap {
    pub fn lookup(&self, name: &str, email: &str) -> Option<IdentityId> {
        self.by_alias.get(&alias_key(name, email)).copied()
    }

    pub fn get(&self, id: IdentityId) -> &DeveloperIdentity {
        &self.identities[id.0 as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DeveloperIdentity> {
        self.identities.iter()
    }

    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }
}

struct Observation {
    name: String,
    email: String,
    seen: DateTime<Utc>,
}

/// Collects sender/author observations and merges them into identities.
///
/// Pairs sharing an email, or sharing a non-empty normalized name, end up in
/// the same identity; the relation is closed transitively.
#[derive(Default)]
pub struct IdentityResolver {
    observations: Vec<Observation>,
    index: HashMap<(String, String), usize>,
}

impl IdentityResolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one observation. Returns `false` when both name and email are empty.
    pub fn observe(&mut self, name: &str, email: &str, seen: DateTime<Utc>) -> bool {
        let key = alias_key(name, email);
        if key.0.is_empty() && key.1.is_empty() {
            return false;
        }
        match self.index.get(&key) {
            Some(&idx) => {
                let obs = &mut self.observations[idx];
                if seen < obs.seen {
                    obs.seen = seen;
                }
            }
            None => {
                self.index.insert(key.clone(), self.observations.len());
                self.observations.push(Observation {
                    name: key.0,
                    email: key.1,
                    seen,
                });
            }
        }
        true
    }

    pub fn resolve(self) -> IdentityMap {
        let n = self.observations.len();
        let mut sets = DisjointSet::new(n);
        let mut by_email: HashMap<&str, usize> = HashMap::new();
        let mut by_name: HashMap<String, usize> = HashMap::new();
        for (idx, obs) in self.observations.iter().enumerate() {
            if !obs.email.is_empty() {
                if let Some(&other) = by_email.get(obs.email.as_str()) {
                    sets.union(idx, other);
                } else {
                    by_email.insert(&obs.email, idx);
                }
            }
            let norm = normalize_name(&obs.name);
            if !norm.is_empty() {
                if let Some(&other) = by_name.get(&norm) {
                    sets.union(idx, other);
                } else {
                    by_name.insert(norm, idx);
                }
            }
        }

        let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
        for idx in 0..n {
            classes.entry(sets.find(idx)).or_default().push(idx);
        }
        // Members ordered by (first seen, observation order).
        let mut classes: Vec<Vec<usize>> = classes
            .into_values()
            .map(|mut members| {
                members.sort_by_key(|&i| (self.observations[i].seen, i));
                members
            })
            .collect();
        classes.sort_by_key(|m| (self.observations[m[0]].seen, m[0]));

        let mut map = IdentityMap::default();
        for (pos, members) in classes.into_iter().enumerate() {
            let id = IdentityId(pos as u32);
            let obs = |i: usize| &self.observations[i];
            let canonical_email = members
                .iter()
                .map(|&i| obs(i).email.as_str())
                .find(|e| !e.is_empty())
                .unwrap_or("")
                .to_string();
            let canonical_name = members
                .iter()
                .map(|&i| obs(i).name.as_str())
                .find(|n| !n.is_empty())
                .map(str::to_string)
                .unwrap_or_else(|| local_part(&canonical_email).to_string());
            let aliases: BTreeSet<(String, String)> = members
                .iter()
                .map(|&i| (obs(i).name.clone(), obs(i).email.clone()))
                .collect();
            for alias in &aliases {
                map.by_alias.insert(alias.clone(), id);
            }
            map.identities.push(DeveloperIdentity {
                id,
                canonical_email,
                canonical_name,
                aliases,
                first_seen: obs(members[0]).seen,
            });
        }
        map
    }
}

fn local_part(email: &str) -> &str {
    email.split('@').next().unwrap_or(email)
}

/// Unifies message senders into identities; senders with neither name nor
/// email are quarantined.
pub fn resolve_identities(messages: &[RawMessage]) -> (IdentityMap, Vec<Quarantined>) {
    let mut resolver = IdentityResolver::new();
    let mut quarantined = Vec::new();
    for msg in messages {
        if !resolver.observe(&msg.from_name, &msg.from_email, msg.date) {
            quarantined.push(Quarantined {
                message_id: msg.message_id.clone(),
                reason: "sender has neither name nor email".to_string(),
            });
        }
    }
    (resolver.resolve(), quarantined)
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
    }
}
