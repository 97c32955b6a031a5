use super::engine::RunResult;
use crate::sbm::{NodeId, SbmGraph};

/// Generation-by-generation bootstrap percolation.
///
/// Generation 0 is the seed set; generation `h + 1` is every inactive node
/// with at least `r` active neighbours after generation `h`. Each generation
/// rescans every inactive node from scratch, so this shares no bookkeeping
/// with the exploration engine and serves as its oracle.
pub fn naive_bootstrap(graph: &SbmGraph, seeds: &[NodeId]) -> RunResult {
    let n = graph.n();
    let r = graph.threshold() as usize;
    let mut active = vec![false; n];
    for &s in seeds {
        active[s as usize] = true;
    }
    loop {
        let next: Vec<NodeId> = (0..n as NodeId)
            .filter(|&v| !active[v as usize])
            .filter(|&v| {
                graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| active[u as usize])
                    .count()
                    >= r
            })
            .collect();
        if next.is_empty() {
            break;
        }
        for v in next {
            active[v as usize] = true;
        }
    }
    let mut per_community = vec![0; graph.k()];
    for v in 0..n as NodeId {
        if active[v as usize] {
            per_community[graph.community_of(v)] += 1;
        }
    }
    let total = per_community.iter().sum();
    RunResult {
        final_size: total,
        termination_time: total,
        per_community_final: per_community,
        trace: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_fully_activates() {
        let edges: Vec<_> = (0..5u32)
            .flat_map(|u| (u + 1..5).map(move |v| (u, v)))
            .collect();
        let g = SbmGraph::from_edges(&[5], 2, &edges, 0).unwrap();
        assert_eq!(naive_bootstrap(&g, &[0, 3]).final_size, 5);
    }

    #[test]
    fn path_with_seeded_ends_stays_put() {
        let g = SbmGraph::from_edges(&[5], 2, &[(0, 1), (1, 2), (2, 3), (3, 4)], 0).unwrap();
        let res = naive_bootstrap(&g, &[0, 4]);
        assert_eq!(res.final_size, 2);
        assert_eq!(res.per_community_final, vec![2]);
    }

    #[test]
    fn path_with_gap_of_one_fills() {
        let g = SbmGraph::from_edges(&[3], 2, &[(0, 1), (1, 2)], 0).unwrap();
        assert_eq!(naive_bootstrap(&g, &[0, 2]).final_size, 3);
    }
}
