//! Partition of a (sub)sample of datapoints into clusters, with incremental
//! per-cluster sufficient statistics.

use rand::Rng;

use super::component::SuffStats;
use super::data::Dataset;
use super::model::MixtureModel;
use crate::error::{Error, Result};
use crate::math::sample_log_weights;

/// Cluster identifiers are recycled slot indices; they carry no meaning
/// across steps.
pub type ClusterId = usize;

pub const DEFAULT_CHECK_INTERVAL: u64 = 10_000;

const UNASSIGNED: u32 = u32::MAX;
const INACTIVE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    size: usize,
    stats: Vec<SuffStats>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stats(&self) -> &[SuffStats] {
        &self.stats
    }
}

/// Set of ids with O(1) insert, remove and uniform sampling.
#[derive(Debug, Clone)]
struct IdPool {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IdPool {
    fn with_capacity(n: usize) -> Self {
        Self {
            items: Vec::with_capacity(n),
            pos: vec![UNASSIGNED; n],
        }
    }

    fn full(n: usize) -> Self {
        Self {
            items: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn contains(&self, id: usize) -> bool {
        self.pos[id] != UNASSIGNED
    }

    fn insert(&mut self, id: usize) {
        debug_assert!(!self.contains(id));
        self.pos[id] = self.items.len() as u32;
        self.items.push(id as u32);
    }

    fn remove(&mut self, id: usize) {
        let p = self.pos[id] as usize;
        let last = *self.items.last().expect("pool is nonempty");
        self.items.swap_remove(p);
        if last as usize != id {
            self.pos[last as usize] = p as u32;
        }
        self.pos[id] = UNASSIGNED;
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())] as usize)
        }
    }
}

/// Assignment of the current subsample `S_t` to clusters. Datapoints outside
/// the subsample sit in the unassigned pool.
///
/// Invariants: every active cluster is nonempty, cluster sizes sum to the
/// number of assigned datapoints, and each cluster's statistics equal those
/// recomputed from its members (checked periodically in debug builds).
#[derive(Debug, Clone)]
pub struct PartitionState {
    assignment: Vec<u32>,
    slots: Vec<Cluster>,
    active: Vec<ClusterId>,
    active_pos: Vec<usize>,
    free_slots: Vec<ClusterId>,
    assigned: IdPool,
    unassigned: IdPool,
    empty_stats: Vec<SuffStats>,
    check_interval: u64,
    #[cfg_attr(not(debug_assertions), allow(dead_code))]
    ops_since_check: u64,
    scratch: Vec<f64>,
}

impl PartitionState {
    /// All `n_items` datapoints start unassigned.
    pub fn new(n_items: usize, model: &MixtureModel) -> Self {
        assert!(n_items < UNASSIGNED as usize, "too many datapoints");
        Self {
            assignment: vec![UNASSIGNED; n_items],
            slots: Vec::new(),
            active: Vec::new(),
            active_pos: Vec::new(),
            free_slots: Vec::new(),
            assigned: IdPool::with_capacity(n_items),
            unassigned: IdPool::full(n_items),
            empty_stats: model.empty_stats(),
            check_interval: DEFAULT_CHECK_INTERVAL,
            ops_since_check: 0,
            scratch: Vec::new(),
        }
    }

    /// Builds a state from explicit labels (`None` = unassigned). Labels are
    /// arbitrary integers; only the induced partition matters.
    pub fn from_labels(data: &Dataset, model: &MixtureModel, labels: &[Option<usize>]) -> Result<Self> {
        if labels.len() != data.n_rows() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} rows",
                labels.len(),
                data.n_rows()
            )));
        }
        model.check_compatible(data)?;
        let mut state = Self::new(data.n_rows(), model);
        let mut label_to_cluster = std::collections::HashMap::new();
        for (id, label) in labels.iter().enumerate() {
            if let Some(l) = label {
                let target = label_to_cluster.get(l).copied();
                let k = state.place(data, id, target)?;
                label_to_cluster.insert(*l, k);
            }
        }
        Ok(state)
    }

    /// Sets how often (in assignments) debug builds recompute all statistics
    /// from scratch. Zero disables the check.
    pub fn set_check_interval(&mut self, every: u64) {
        self.check_interval = every;
    }

    pub fn n_items(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_assigned(&self) -> usize {
        self.assigned.len()
    }

    pub fn n_unassigned(&self) -> usize {
        self.unassigned.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.active.len()
    }

    pub fn is_assigned(&self, id: usize) -> bool {
        self.assignment[id] != UNASSIGNED
    }

    pub fn cluster_of(&self, id: usize) -> Option<ClusterId> {
        match self.assignment[id] {
            UNASSIGNED => None,
            k => Some(k as usize),
        }
    }

    pub fn cluster(&self, k: ClusterId) -> Option<&Cluster> {
        match self.active_pos.get(k) {
            Some(&p) if p != INACTIVE => Some(&self.slots[k]),
            _ => None,
        }
    }

    /// Active clusters in the order used by [`Self::assign_scores`].
    pub fn cluster_ids(&self) -> &[ClusterId] {
        &self.active
    }

    pub fn clusters(&self) -> impl Iterator<Item = (ClusterId, &Cluster)> + '_ {
        self.active.iter().map(move |&k| (k, &self.slots[k]))
    }

    pub fn cluster_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().map(move |&k| self.slots[k].size)
    }

    pub fn unassigned_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.unassigned.items.iter().map(|&i| i as usize)
    }

    pub fn empty_stats(&self) -> &[SuffStats] {
        &self.empty_stats
    }

    /// Labels relabelled by order of first appearance, so two states encoding
    /// the same partition produce identical vectors.
    pub fn canonical_labels(&self) -> Vec<Option<usize>> {
        let mut map = vec![usize::MAX; self.slots.len()];
        let mut next = 0;
        self.assignment
            .iter()
            .map(|&k| {
                if k == UNASSIGNED {
                    return None;
                }
                let slot = &mut map[k as usize];
                if *slot == usize::MAX {
                    *slot = next;
                    next += 1;
                }
                Some(*slot)
            })
            .collect()
    }

    pub fn pick_assigned<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        self.assigned.pick(rng)
    }

    pub fn pick_unassigned<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        self.unassigned.pick(rng)
    }

    /// Moves `id` to the unassigned pool, decrementing its cluster's
    /// statistics and deleting the cluster if it empties.
    pub fn remove(&mut self, data: &Dataset, id: usize) -> Result<ClusterId> {
        let k = self.cluster_of(id).ok_or_else(|| {
            Error::Precondition(format!("datapoint {id} is not assigned"))
        })?;
        let row = data.row(id);
        let cluster = &mut self.slots[k];
        for (s, x) in cluster.stats.iter_mut().zip(row) {
            s.remove(x);
        }
        cluster.size -= 1;
        if cluster.size == 0 {
            self.deactivate(k);
        }
        self.assignment[id] = UNASSIGNED;
        self.assigned.remove(id);
        self.unassigned.insert(id);
        Ok(k)
    }

    /// Unnormalized log-weights for placing `row`: one entry per active cluster
    /// (in [`Self::cluster_ids`] order) followed by the new-cluster entry.
    pub fn assign_scores(&self, model: &MixtureModel, row: &[crate::mixture::Datum]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.active.len() + 1);
        for &k in &self.active {
            let c = &self.slots[k];
            out.push(model.py.ln_existing_weight(c.size) + model.log_predictive_row(&c.stats, row)?);
        }
        out.push(
            model.py.ln_new_weight(self.active.len())
                + model.log_predictive_row(&self.empty_stats, row)?,
        );
        Ok(out)
    }

    fn fill_scores(&self, model: &MixtureModel, row: &[crate::mixture::Datum], out: &mut Vec<f64>) {
        out.clear();
        for &k in &self.active {
            let c = &self.slots[k];
            out.push(model.py.ln_existing_weight(c.size) + model.ln_pp_row(&c.stats, row));
        }
        out.push(model.py.ln_new_weight(self.active.len()) + model.ln_pp_row(&self.empty_stats, row));
    }

    /// Conditionally samples a cluster for unassigned datapoint `id`.
    pub fn assign<R: Rng + ?Sized>(
        &mut self,
        data: &Dataset,
        model: &MixtureModel,
        id: usize,
        rng: &mut R,
    ) -> Result<ClusterId> {
        if self.is_assigned(id) {
            return Err(Error::Precondition(format!("datapoint {id} is already assigned")));
        }
        let row = data.row(id);
        let mut scores = std::mem::take(&mut self.scratch);
        self.fill_scores(model, row, &mut scores);
        let choice = sample_log_weights(&mut scores, rng).ok_or_else(|| {
            Error::InvalidArgument(format!("datapoint {id} has zero probability under every cluster"))
        });
        self.scratch = scores;
        let target = self.active.get(choice?).copied();
        let k = self.place(data, id, target)?;
        self.after_assign(data, model);
        Ok(k)
    }

    /// Places `id` into cluster `target` (`None` opens a new cluster) without
    /// sampling.
    pub fn place(&mut self, data: &Dataset, id: usize, target: Option<ClusterId>) -> Result<ClusterId> {
        if self.is_assigned(id) {
            return Err(Error::Precondition(format!("datapoint {id} is already assigned")));
        }
        let k = match target {
            Some(k) => {
                if self.cluster(k).is_none() {
                    return Err(Error::InvalidArgument(format!("cluster {k} is not active")));
                }
                k
            }
            None => self.open_cluster(),
        };
        let cluster = &mut self.slots[k];
        for (s, x) in cluster.stats.iter_mut().zip(data.row(id)) {
            s.add(x);
        }
        cluster.size += 1;
        self.assignment[id] = k as u32;
        self.unassigned.remove(id);
        self.assigned.insert(id);
        Ok(k)
    }

    /// Removes a uniformly random assigned datapoint and returns its id.
    pub fn remove_random<R: Rng + ?Sized>(&mut self, data: &Dataset, rng: &mut R) -> Result<usize> {
        let id = self
            .pick_assigned(rng)
            .ok_or_else(|| Error::Precondition("no assigned datapoint to remove".into()))?;
        self.remove(data, id)?;
        Ok(id)
    }

    /// Picks a uniformly random unassigned datapoint and assigns it
    /// conditionally. Returns its id.
    pub fn assign_random<R: Rng + ?Sized>(
        &mut self,
        data: &Dataset,
        model: &MixtureModel,
        rng: &mut R,
    ) -> Result<usize> {
        let id = self
            .pick_unassigned(rng)
            .ok_or_else(|| Error::Precondition("no unassigned datapoint to assign".into()))?;
        self.assign(data, model, id, rng)?;
        Ok(id)
    }

    /// `n_assigned` remove-then-reassign steps on uniformly random datapoints.
    pub fn gibbs_sweep<R: Rng + ?Sized>(
        &mut self,
        data: &Dataset,
        model: &MixtureModel,
        rng: &mut R,
    ) -> Result<()> {
        if self.n_unassigned() > 0 {
            return Err(Error::Precondition(format!(
                "gibbs_sweep needs every datapoint assigned; {} are not",
                self.n_unassigned()
            )));
        }
        for _ in 0..self.n_assigned() {
            let id = self.remove_random(data, rng)?;
            self.assign(data, model, id, rng)?;
        }
        Ok(())
    }

    /// Assigns every unassigned datapoint by seating it according to the
    /// partition prior alone, ignoring the data.
    pub fn draw_from_prior<R: Rng + ?Sized>(
        &mut self,
        data: &Dataset,
        model: &MixtureModel,
        rng: &mut R,
    ) -> Result<()> {
        while let Some(id) = self.unassigned.items.last().map(|&i| i as usize) {
            let mut ws = std::mem::take(&mut self.scratch);
            ws.clear();
            ws.extend(self.active.iter().map(|&k| model.py.ln_existing_weight(self.slots[k].size)));
            ws.push(model.py.ln_new_weight(self.active.len()));
            let choice = sample_log_weights(&mut ws, rng).expect("prior weights are positive");
            self.scratch = ws;
            let target = self.active.get(choice).copied();
            self.place(data, id, target)?;
        }
        Ok(())
    }

    /// `log[P(partition) * prod_k p(X_k)]` over the assigned datapoints.
    pub fn joint_log_prob(&self, model: &MixtureModel) -> f64 {
        let prior = model.py.ln_eppf(self.cluster_sizes());
        let lik: f64 = self
            .active
            .iter()
            .map(|&k| model.ln_marginal_cluster(&self.slots[k].stats))
            .sum();
        prior + lik
    }

    /// Recomputes every cluster from its members and compares with the
    /// incremental statistics.
    pub fn check_consistency(&self, data: &Dataset, model: &MixtureModel) -> Result<()> {
        let fail = |msg: String| Err(Error::Precondition(format!("inconsistent partition: {msg}")));
        let mut fresh: Vec<Option<Cluster>> = vec![None; self.slots.len()];
        let mut n_assigned = 0;
        for (id, &k) in self.assignment.iter().enumerate() {
            if k == UNASSIGNED {
                if !self.unassigned.contains(id) || self.assigned.contains(id) {
                    return fail(format!("pool membership of unassigned {id}"));
                }
                continue;
            }
            if !self.assigned.contains(id) || self.unassigned.contains(id) {
                return fail(format!("pool membership of assigned {id}"));
            }
            n_assigned += 1;
            let c = fresh[k as usize].get_or_insert_with(|| Cluster {
                size: 0,
                stats: model.empty_stats(),
            });
            c.size += 1;
            for (s, x) in c.stats.iter_mut().zip(data.row(id)) {
                s.add(x);
            }
        }
        if n_assigned != self.assigned.len() {
            return fail("assigned count".into());
        }
        let total: usize = self.cluster_sizes().sum();
        if total != n_assigned {
            return fail(format!("cluster sizes sum to {total}, {n_assigned} assigned"));
        }
        let mut live = 0;
        for (k, f) in fresh.iter().enumerate() {
            match (f, self.cluster(k)) {
                (Some(f), Some(c)) => {
                    live += 1;
                    if f.size != c.size {
                        return fail(format!("cluster {k} size {} vs {}", c.size, f.size));
                    }
                    for (a, b) in f.stats.iter().zip(&c.stats) {
                        if !a.approx_eq(b, 1e-9) {
                            return fail(format!("cluster {k} stats {b:?} vs recomputed {a:?}"));
                        }
                    }
                }
                (None, None) => {}
                (None, Some(_)) => return fail(format!("cluster {k} is active but empty")),
                (Some(_), None) => return fail(format!("cluster {k} has members but is inactive")),
            }
        }
        if live != self.active.len() {
            return fail("active list".into());
        }
        Ok(())
    }

    fn open_cluster(&mut self) -> ClusterId {
        let k = match self.free_slots.pop() {
            Some(k) => k,
            None => {
                self.slots.push(Cluster {
                    size: 0,
                    stats: self.empty_stats.clone(),
                });
                self.active_pos.push(INACTIVE);
                self.slots.len() - 1
            }
        };
        // Freed slots keep their (zeroed) statistics buffers.
        debug_assert_eq!(self.slots[k].size, 0);
        self.active_pos[k] = self.active.len();
        self.active.push(k);
        k
    }

    fn deactivate(&mut self, k: ClusterId) {
        let p = self.active_pos[k];
        self.active.swap_remove(p);
        if let Some(&moved) = self.active.get(p) {
            self.active_pos[moved] = p;
        }
        self.active_pos[k] = INACTIVE;
        self.free_slots.push(k);
    }

    #[inline]
    fn after_assign(&mut self, _data: &Dataset, _model: &MixtureModel) {
        #[cfg(debug_assertions)]
        if self.check_interval > 0 {
            self.ops_since_check += 1;
            if self.ops_since_check >= self.check_interval {
                self.ops_since_check = 0;
                if let Err(e) = self.check_consistency(_data, _model) {
                    panic!("{e}");
                }
            }
        }
    }
}
