use crate::sbm::{NodeId, SbmGraph};

/// Mutable state of one exploration run at virtual time `t`.
///
/// Each community keeps its usable nodes (active but not yet used) in a flat
/// pool; a uniform pick is a random index plus `swap_remove`.
#[derive(Debug, Clone)]
pub struct BootstrapState {
    t: usize,
    marks: Vec<u32>,
    active: Vec<bool>,
    used: Vec<bool>,
    usable: Vec<Vec<NodeId>>,
    used_counts: Vec<usize>,
    active_counts: Vec<usize>,
}

impl BootstrapState {
    pub(crate) fn new(graph: &SbmGraph, seeds: &[NodeId]) -> Self {
        let n = graph.n();
        let k = graph.k();
        let mut active = vec![false; n];
        let mut usable = vec![Vec::new(); k];
        let mut active_counts = vec![0; k];
        for &s in seeds {
            if !active[s as usize] {
                active[s as usize] = true;
                let c = graph.community_of(s);
                usable[c].push(s);
                active_counts[c] += 1;
            }
        }
        Self {
            t: 0,
            marks: vec![0; n],
            active,
            used: vec![false; n],
            usable,
            used_counts: vec![0; k],
            active_counts,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn k(&self) -> usize {
        self.usable.len()
    }

    pub fn marks(&self, v: NodeId) -> u32 {
        self.marks[v as usize]
    }

    pub fn all_marks(&self) -> &[u32] {
        &self.marks
    }

    pub fn is_active(&self, v: NodeId) -> bool {
        self.active[v as usize]
    }

    pub fn is_used(&self, v: NodeId) -> bool {
        self.used[v as usize]
    }

    /// Active, not yet used nodes of community `i`, in no particular order.
    pub fn usable(&self, i: usize) -> &[NodeId] {
        &self.usable[i]
    }

    pub fn usable_count(&self, i: usize) -> usize {
        self.usable[i].len()
    }

    pub fn has_usable(&self, i: usize) -> bool {
        !self.usable[i].is_empty()
    }

    pub fn total_usable(&self) -> usize {
        self.usable.iter().map(Vec::len).sum()
    }

    /// `U_i(t)`.
    pub fn used_counts(&self) -> &[usize] {
        &self.used_counts
    }

    /// `A_i(t)`.
    pub fn active_counts(&self) -> &[usize] {
        &self.active_counts
    }

    pub(crate) fn take_usable(&mut self, community: usize, slot: usize) -> NodeId {
        let v = self.usable[community].swap_remove(slot);
        self.used[v as usize] = true;
        self.used_counts[community] += 1;
        self.t += 1;
        v
    }

    /// Add a mark to `v`; returns true when this mark activates it.
    pub(crate) fn add_mark(&mut self, v: NodeId, community: usize, r: u32) -> bool {
        let m = &mut self.marks[v as usize];
        *m += 1;
        if *m >= r && !self.active[v as usize] {
            self.active[v as usize] = true;
            self.usable[community].push(v);
            self.active_counts[community] += 1;
            true
        } else {
            false
        }
    }
}
