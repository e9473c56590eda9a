//! The biased edge processes `Or(K)` and `And(K)`.
//!
//! Every missing edge belongs to one of three strata according to how many of
//! its endpoints are isolated. Within a stratum all missing edges carry the
//! same weight, so an exact draw is a categorical choice over the three
//! strata followed by a uniform choice inside the chosen one.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tracker::{ComponentTracker, Snapshot, NIL};

/// Below this fraction of missing pairs the non-isolated stratum is sampled
/// from an explicit list instead of by rejection.
const DENSE_STRATUM_RATIO: f64 = 0.05;
/// Average degree above which edges move from adjacency lists to a hash set.
const LIST_DEGREE_LIMIT: u64 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Weight 1 between two isolated vertices, `K` otherwise.
    Or,
    /// Weight `K` between two non-isolated vertices, 1 otherwise.
    And,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Or => "or",
            ModelKind::And => "and",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Ok(ModelKind::Or),
            "and" => Ok(ModelKind::And),
            other => Err(Error::InvalidParameter(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    Exact,
    /// Draw ordered vertex pairs by weight and skip loops and existing edges.
    OrderedPairApprox,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub k: f64,
    pub sampling: Sampling,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, k: f64, sampling: Sampling) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bias K must be finite and non-negative, got {k}"
            )));
        }
        Ok(ModelSpec { kind, k, sampling })
    }

    pub fn exact(kind: ModelKind, k: f64) -> Result<Self> {
        Self::new(kind, k, Sampling::Exact)
    }

    /// Weights of the (isolated-isolated, mixed, non-isolated) strata.
    pub fn weights(&self) -> [f64; 3] {
        match self.kind {
            ModelKind::Or => [1.0, self.k, self.k],
            ModelKind::And => [1.0, 1.0, self.k],
        }
    }
}

/// Missing-pair counts and weights of the three strata.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CategoryCensus {
    pub iso_iso: u64,
    pub mixed: u64,
    pub noniso_noniso: u64,
    pub weights: [f64; 3],
    pub total_weight: f64,
}

impl CategoryCensus {
    pub fn counts(&self) -> [u64; 3] {
        [self.iso_iso, self.mixed, self.noniso_noniso]
    }

    pub fn missing(&self) -> u64 {
        self.iso_iso + self.mixed + self.noniso_noniso
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Edge(usize, usize),
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopCondition {
    EdgeCount(u64),
    /// Largest component has at least `alpha * n` vertices.
    GiantFraction(f64),
    Connected,
    IsolatedExhausted,
}

impl FromStr for StopCondition {
    type Err = Error;

    /// `edges=<m>`, `giant=<alpha>`, `connected` or `isolated-exhausted`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("invalid stop condition `{s}`"));
        match s {
            "connected" => return Ok(StopCondition::Connected),
            "isolated-exhausted" => return Ok(StopCondition::IsolatedExhausted),
            _ => {}
        }
        let (key, value) = s.split_once('=').ok_or_else(bad)?;
        match key {
            "edges" => Ok(StopCondition::EdgeCount(value.parse().map_err(|_| bad())?)),
            "giant" => {
                let alpha: f64 = value.parse().map_err(|_| bad())?;
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(bad());
                }
                Ok(StopCondition::GiantFraction(alpha))
            }
            _ => Err(bad()),
        }
    }
}

#[inline]
fn pair_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    (a as u64) << 32 | b as u64
}

#[inline]
fn unpack(key: u64) -> (u32, u32) {
    ((key >> 32) as u32, key as u32)
}

#[inline]
fn signature_bit(v: u32) -> u32 {
    1 << (v.wrapping_mul(0x9E37_79B9) >> 27)
}

#[inline]
fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// One edge threaded onto the adjacency lists of both endpoints.
#[derive(Clone, Copy, Debug)]
struct EdgeRecord {
    ends: [u32; 2],
    next: [u32; 2],
}

/// Present edges. Sparse graphs keep per-vertex lists whose heads live in
/// the tracker's nodes, so an insertion only writes memory the merge reads
/// anyway. Once the average degree passes `LIST_DEGREE_LIMIT` the lists are
/// replaced by a hash set.
#[derive(Clone, Debug)]
enum EdgeStore {
    Lists(Vec<EdgeRecord>),
    Set(FxHashSet<u64>),
}

impl EdgeStore {
    fn contains(&self, tracker: &ComponentTracker, u: u32, v: u32) -> bool {
        match self {
            EdgeStore::Set(set) => set.contains(&pair_key(u, v)),
            EdgeStore::Lists(records) => {
                let mut e = tracker.head(u);
                while e != NIL {
                    let r = &records[e as usize];
                    let side = (r.ends[0] != u) as usize;
                    if r.ends[1 - side] == v {
                        return true;
                    }
                    e = r.next[side];
                }
                false
            }
        }
    }

    fn insert(&mut self, tracker: &mut ComponentTracker, u: u32, v: u32) {
        match self {
            EdgeStore::Set(set) => {
                set.insert(pair_key(u, v));
            }
            EdgeStore::Lists(records) => {
                let e = records.len() as u32;
                records.push(EdgeRecord {
                    ends: [u, v],
                    next: [tracker.head(u), tracker.head(v)],
                });
                *tracker.head_mut(u) = e;
                *tracker.head_mut(v) = e;
                let n = tracker.len() as u64;
                if records.len() as u64 > LIST_DEGREE_LIMIT * n / 2 || e == NIL - 1 {
                    self.convert_to_set(tracker);
                }
            }
        }
    }

    fn convert_to_set(&mut self, tracker: &mut ComponentTracker) {
        if let EdgeStore::Lists(records) = self {
            let set = records
                .iter()
                .map(|r| pair_key(r.ends[0], r.ends[1]))
                .collect();
            for v in 0..tracker.len() as u32 {
                *tracker.head_mut(v) = NIL;
            }
            *self = EdgeStore::Set(set);
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = (u32, u32)> + '_> {
        match self {
            EdgeStore::Set(set) => Box::new(set.iter().map(|&k| unpack(k))),
            EdgeStore::Lists(records) => Box::new(records.iter().map(|r| {
                let [a, b] = r.ends;
                (a.min(b), a.max(b))
            })),
        }
    }
}

/// Explicit list of missing pairs in the non-isolated stratum. Valid only
/// while the non-isolated set keeps the size it had when the list was built;
/// entries that became edges since are dropped lazily.
#[derive(Clone, Debug)]
struct DenseStratum {
    noniso_len: usize,
    pairs: Vec<u64>,
}

/// A graph process in flight.
#[derive(Clone, Debug)]
pub struct ProcessState {
    model: ModelSpec,
    tracker: ComponentTracker,
    edges: EdgeStore,
    /// Vertex permutation: the isolated vertices first, then the rest.
    order: Vec<u32>,
    num_iso: usize,
    /// Position of each vertex in `order`.
    pos: Vec<u32>,
    m: u64,
    attempts: u64,
    rng: Xoshiro256PlusPlus,
    dense: Option<DenseStratum>,
}

impl ProcessState {
    pub fn new(model: ModelSpec, n: usize, seed: u64) -> Result<Self> {
        let tracker = ComponentTracker::new(n)?;
        Ok(ProcessState {
            model,
            tracker,
            edges: EdgeStore::Lists(Vec::new()),
            order: (0..n as u32).collect(),
            num_iso: n,
            pos: (0..n as u32).collect(),
            m: 0,
            attempts: 0,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            dense: None,
        })
    }

    /// A state with the given edges already present, e.g. a test fixture.
    pub fn with_edges(
        model: ModelSpec,
        n: usize,
        edges: &[(usize, usize)],
        seed: u64,
    ) -> Result<Self> {
        let mut state = Self::new(model, n, seed)?;
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            if state.has_edge(u, v) {
                return Err(Error::InvalidParameter(format!("duplicate edge {u}-{v}")));
            }
            state.add_edge(u as u32, v as u32);
        }
        state.attempts = state.m;
        Ok(state)
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.tracker.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.m
    }

    /// Ordered-pair draws so far, skipped ones included.
    pub fn attempt_count(&self) -> u64 {
        self.attempts
    }

    pub fn tracker(&self) -> &ComponentTracker {
        &self.tracker
    }

    pub fn isolated_vertices(&self) -> &[u32] {
        &self.order[..self.num_iso]
    }

    pub fn non_isolated_vertices(&self) -> &[u32] {
        &self.order[self.num_iso..]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.contains(u as u32, v as u32)
    }

    /// Present edges as `(min, max)` pairs, in no particular order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|(a, b)| (a as usize, b as usize))
    }

    pub fn total_pairs(&self) -> u64 {
        choose2(self.n() as u64)
    }

    pub fn snapshot(&self) -> Snapshot {
        self.tracker.observables(self.m)
    }

    pub fn census(&self) -> CategoryCensus {
        let n = self.n() as u64;
        let i = self.num_iso as u64;
        let iso_iso = choose2(i);
        let mixed = i * (n - i);
        let noniso_noniso = choose2(n - i) - self.m;
        let weights = self.model.weights();
        let total_weight = weights[0] * iso_iso as f64
            + weights[1] * mixed as f64
            + weights[2] * noniso_noniso as f64;
        CategoryCensus {
            iso_iso,
            mixed,
            noniso_noniso,
            weights,
            total_weight,
        }
    }

    /// Draws a missing edge with probability proportional to its weight,
    /// without adding it. Falls back to the uniform distribution over missing
    /// edges when every missing edge has weight zero. The pair comes back as
    /// `(min, max)`.
    pub fn sample_edge_exact(&mut self) -> Result<(usize, usize)> {
        let (u, v) = self.draw_exact()?;
        Ok((u.min(v) as usize, u.max(v) as usize))
    }

    fn draw_exact(&mut self) -> Result<(u32, u32)> {
        let census = self.census();
        if census.missing() == 0 {
            return Err(Error::GraphComplete);
        }
        let weights = if census.total_weight > 0.0 {
            census.weights
        } else {
            [1.0; 3]
        };
        let counts = census.counts();
        let masses: [f64; 3] = std::array::from_fn(|c| weights[c] * counts[c] as f64);
        let stratum = pick_category(&mut self.rng, &masses);

        Ok(match stratum {
            0 => {
                let (a, b) = distinct_indices(&mut self.rng, self.num_iso);
                (self.order[a], self.order[b])
            }
            1 => {
                let a = self.rng.random_range(0..self.num_iso);
                (self.order[a], self.pick_noniso())
            }
            _ => self.draw_noniso_missing(counts[2]),
        })
    }

    fn draw_noniso_missing(&mut self, missing: u64) -> (u32, u32) {
        let s = self.order.len() - self.num_iso;
        let all = choose2(s as u64);
        if (missing as f64) >= DENSE_STRATUM_RATIO * all as f64 {
            loop {
                let u = self.pick_noniso();
                let v = self.pick_noniso();
                if u != v && !self.is_edge(u, v) {
                    return (u, v);
                }
            }
        }
        let noniso = &self.order[self.num_iso..];

        if self.dense.as_ref().is_none_or(|d| d.noniso_len != s) {
            let mut pairs = Vec::with_capacity(missing as usize);
            for a in 0..s {
                for b in a + 1..s {
                    if !self.edges.contains(&self.tracker, noniso[a], noniso[b]) {
                        pairs.push(pair_key(noniso[a], noniso[b]));
                    }
                }
            }
            self.dense = Some(DenseStratum {
                noniso_len: s,
                pairs,
            });
        }
        let dense = self.dense.as_mut().expect("dense stratum built above");
        loop {
            let idx = self.rng.random_range(0..dense.pairs.len());
            let key = dense.pairs[idx];
            let (u, v) = unpack(key);
            if self.edges.contains(&self.tracker, u, v) {
                dense.pairs.swap_remove(idx);
            } else {
                return unpack(key);
            }
        }
    }

    /// One ordered-pair draw: `(u, v)` with probability proportional to the
    /// weight of the pair, loops and existing edges reported as skipped.
    pub fn sample_step_approx(&mut self) -> Result<StepOutcome> {
        let (u, v) = self.draw_ordered_pair()?;
        self.attempts += 1;
        if u == v || self.is_edge(u, v) {
            return Ok(StepOutcome::Skipped);
        }
        self.add_edge(u, v);
        Ok(StepOutcome::Edge(u as usize, v as usize))
    }

    /// Ordered pair drawn by weight over all of `V x V`, without touching
    /// the graph. Uniform when every missing edge has weight zero.
    pub(crate) fn draw_ordered_pair(&mut self) -> Result<(u32, u32)> {
        let census = self.census();
        if census.missing() == 0 {
            return Err(Error::GraphComplete);
        }
        if census.total_weight <= 0.0 {
            let n = self.n();
            return Ok((
                self.rng.random_range(0..n) as u32,
                self.rng.random_range(0..n) as u32,
            ));
        }
        let i = self.num_iso as f64;
        let s = (self.order.len() - self.num_iso) as f64;
        let w = census.weights;
        let masses = [w[0] * i * i, w[1] * 2.0 * i * s, w[2] * s * s];
        Ok(match pick_category(&mut self.rng, &masses) {
            0 => (self.pick_iso(), self.pick_iso()),
            1 => {
                let (a, b) = (self.pick_iso(), self.pick_noniso());
                if self.rng.random::<bool>() {
                    (a, b)
                } else {
                    (b, a)
                }
            }
            _ => (self.pick_noniso(), self.pick_noniso()),
        })
    }

    /// Edge test that skips the hash probe when the neighbour filter of `u`
    /// (a one-word Bloom filter in the tracker's spare slot) rules `v` out.
    #[inline]
    fn is_edge(&self, u: u32, v: u32) -> bool {
        self.tracker.tag(u) & signature_bit(v) != 0
            && self.tracker.tag(v) & signature_bit(u) != 0
            && self.contains(u, v)
    }

    fn contains(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&self.tracker, u, v)
    }

    fn pick_iso(&mut self) -> u32 {
        self.order[self.rng.random_range(0..self.num_iso)]
    }

    /// Uniform non-isolated vertex. Once most vertices have an edge, rejection
    /// over all vertices reads only the union-find array, which the following
    /// merge touches anyway.
    fn pick_noniso(&mut self) -> u32 {
        let n = self.order.len();
        if 2 * self.num_iso <= n {
            loop {
                let v = self.rng.random_range(0..n as u32);
                if !self.tracker.is_isolated(v) {
                    return v;
                }
            }
        }
        self.order[self.rng.random_range(self.num_iso..n)]
    }

    fn add_edge(&mut self, u: u32, v: u32) {
        debug_assert!(u != v);
        self.edges.insert(&mut self.tracker, u, v);
        *self.tracker.tag_mut(u) |= signature_bit(v);
        *self.tracker.tag_mut(v) |= signature_bit(u);
        for w in [u, v] {
            if self.tracker.is_isolated(w) {
                self.leave_isolated(w);
            }
        }
        self.tracker.union_unchecked(u, v);
        self.m += 1;
    }

    fn leave_isolated(&mut self, v: u32) {
        // swap v with the last isolated vertex and shrink the isolated prefix
        let p = self.pos[v as usize] as usize;
        let boundary = self.num_iso - 1;
        let last = self.order[boundary];
        self.order.swap(p, boundary);
        self.pos[last as usize] = p as u32;
        self.pos[v as usize] = boundary as u32;
        self.num_iso = boundary;
    }

    /// Advances by one draw of the configured sampler. In exact mode every
    /// call adds an edge.
    pub fn advance(&mut self) -> Result<StepOutcome> {
        match self.model.sampling {
            Sampling::Exact => {
                let (u, v) = self.draw_exact()?;
                self.attempts += 1;
                self.add_edge(u, v);
                Ok(StepOutcome::Edge(u as usize, v as usize))
            }
            Sampling::OrderedPairApprox => self.sample_step_approx(),
        }
    }

    pub fn step(&mut self) -> Result<Snapshot> {
        self.advance()?;
        Ok(self.snapshot())
    }

    pub fn is_satisfied(&self, stop: StopCondition) -> bool {
        match stop {
            StopCondition::EdgeCount(m) => self.m >= m,
            StopCondition::GiantFraction(alpha) => {
                self.tracker.largest() as f64 >= alpha * self.n() as f64
            }
            StopCondition::Connected => self.tracker.num_components() == 1,
            StopCondition::IsolatedExhausted => self.num_iso == 0,
        }
    }

    /// Rejects conditions that can never hold on this graph.
    pub fn check_stop(&self, stop: StopCondition) -> Result<()> {
        match stop {
            StopCondition::EdgeCount(m) if m > self.total_pairs() => {
                Err(Error::InvalidParameter(format!(
                    "edge count {m} exceeds the {} pairs of a graph on {} vertices",
                    self.total_pairs(),
                    self.n()
                )))
            }
            StopCondition::GiantFraction(alpha) if !(alpha > 0.0 && alpha <= 1.0) => Err(
                Error::InvalidParameter(format!("giant fraction must lie in (0, 1], got {alpha}")),
            ),
            _ => Ok(()),
        }
    }

    /// Advances until `stop` holds and returns the observables at that step.
    /// A condition that already holds returns immediately.
    pub fn run_until(&mut self, stop: StopCondition) -> Result<Snapshot> {
        self.check_stop(stop)?;
        while !self.is_satisfied(stop) {
            self.advance()?;
        }
        Ok(self.snapshot())
    }
}

/// Index of the category hit by a uniform draw over the cumulative masses.
/// Zero-mass categories are never returned.
fn pick_category<R: Rng>(rng: &mut R, masses: &[f64; 3]) -> usize {
    let total: f64 = masses.iter().sum();
    let x = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (c, &mass) in masses.iter().enumerate() {
        if mass <= 0.0 {
            continue;
        }
        acc += mass;
        last = c;
        if x < acc {
            return c;
        }
    }
    last
}

/// Two distinct uniform indices below `len` (requires `len >= 2`).
#[inline]
fn distinct_indices<R: Rng>(rng: &mut R, len: usize) -> (usize, usize) {
    let a = rng.random_range(0..len);
    let mut b = rng.random_range(0..len - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}
