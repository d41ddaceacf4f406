//! Backtracking enumeration over a runtime index graph.
//!
//! Level `i` binds query node `σ(i)`. Its candidates are the intersection of
//! the RIG rows of every already-bound neighbour toward `σ(i)`, folded smallest
//! first; level 0 takes `cos(σ(0))`. Candidates are tried in ascending id
//! order, so emission order is deterministic.

use std::convert::Infallible;
use std::time::{Duration, Instant};

use crate::graph::Direction;
use crate::limits::{Deadline, DeadlineTicker, EnumLimits};
use crate::nodeset::{NodeId, NodeSet};
use crate::order::SearchOrder;
use crate::query::PatternQuery;
use crate::rig::Rig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumReport {
    pub matches: u64,
    /// False when the match cap or the deadline stopped the search early.
    pub completed: bool,
    pub elapsed: Duration,
    /// Largest total size of the candidate sets alive at once.
    pub peak_candidate_cells: usize,
}

/// Enumerates every occurrence, passing each tuple (indexed by qid) to `sink`.
pub fn mjoin<E, F>(
    q: &PatternQuery,
    rig: &Rig,
    order: &SearchOrder,
    limits: &EnumLimits,
    sink: F,
) -> Result<EnumReport, E>
where
    F: FnMut(&[NodeId]) -> Result<(), E>,
{
    mjoin_until(
        q,
        rig,
        order,
        limits.max_matches,
        Deadline::from_timeout(limits.timeout),
        sink,
    )
}

/// Like [`mjoin`] but with an absolute deadline, so earlier pipeline stages
/// can share one time budget.
pub fn mjoin_until<E, F>(
    q: &PatternQuery,
    rig: &Rig,
    order: &SearchOrder,
    max_matches: Option<u64>,
    deadline: Deadline,
    sink: F,
) -> Result<EnumReport, E>
where
    F: FnMut(&[NodeId]) -> Result<(), E>,
{
    let start = Instant::now();
    let k = q.num_nodes();
    assert_eq!(order.len(), k, "search order does not cover the query");
    assert_eq!(rig.num_query_nodes(), k, "RIG was built for another query");
    if rig.is_empty() || k == 0 {
        return Ok(EnumReport {
            matches: 0,
            completed: !rig.truncated(),
            elapsed: start.elapsed(),
            peak_candidate_cells: 0,
        });
    }
    let mut e = Enumerator {
        rig,
        sequence: order.sequence(),
        plan: plan(q, order),
        assignment: vec![0; k],
        matches: 0,
        max_matches,
        ticker: DeadlineTicker::new(deadline, 12),
        cells: 0,
        peak: 0,
        sink,
    };
    let flow = if rig.truncated() { Flow::Stop } else { e.level(0)? };
    Ok(EnumReport {
        matches: e.matches,
        completed: flow == Flow::Continue,
        elapsed: start.elapsed(),
        peak_candidate_cells: e.peak,
    })
}

/// Counts occurrences without materialising them.
pub fn count_matches(q: &PatternQuery, rig: &Rig, order: &SearchOrder, limits: &EnumLimits) -> EnumReport {
    match mjoin(q, rig, order, limits, |_| Ok::<(), Infallible>(())) {
        Ok(r) => r,
        Err(never) => match never {},
    }
}

/// Rows to intersect at one level: (edge, row direction, level of the bound end).
type Plan = Vec<Vec<(usize, Direction, usize)>>;

fn plan(q: &PatternQuery, order: &SearchOrder) -> Plan {
    let seq = order.sequence();
    let mut level_of = vec![0; seq.len()];
    for (lvl, &n) in seq.iter().enumerate() {
        level_of[n] = lvl;
    }
    seq.iter()
        .enumerate()
        .map(|(lvl, &n)| {
            let mut steps = Vec::new();
            for &i in q.in_edges(n) {
                let t = level_of[q.edge(i).tail];
                if t < lvl {
                    steps.push((i, Direction::Forward, t));
                }
            }
            for &i in q.out_edges(n) {
                let h = level_of[q.edge(i).head];
                if h < lvl {
                    steps.push((i, Direction::Backward, h));
                }
            }
            steps
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

struct Enumerator<'a, F> {
    rig: &'a Rig,
    sequence: &'a [usize],
    plan: Plan,
    assignment: Vec<NodeId>,
    matches: u64,
    max_matches: Option<u64>,
    ticker: DeadlineTicker,
    cells: usize,
    peak: usize,
    sink: F,
}

impl<F, E> Enumerator<'_, F>
where
    F: FnMut(&[NodeId]) -> Result<(), E>,
{
    fn candidates(&self, lvl: usize) -> Option<NodeSet> {
        let steps = &self.plan[lvl];
        if steps.is_empty() {
            return Some(self.rig.cos(self.sequence[lvl]).clone());
        }
        let mut rows = Vec::with_capacity(steps.len());
        for &(i, dir, bound) in steps {
            let v = self.assignment[self.sequence[bound]];
            rows.push(self.rig.row(i, dir, v)?);
        }
        Some(NodeSet::multiway_intersect(&rows))
    }

    fn level(&mut self, lvl: usize) -> Result<Flow, E> {
        if self.ticker.tick() {
            return Ok(Flow::Stop);
        }
        let Some(cands) = self.candidates(lvl) else {
            return Ok(Flow::Continue);
        };
        let n = self.sequence[lvl];
        let last = lvl + 1 == self.sequence.len();
        self.cells += cands.len();
        self.peak = self.peak.max(self.cells);
        let mut flow = Flow::Continue;
        for v in cands.iter() {
            self.assignment[n] = v;
            if last {
                if self.max_matches.is_some_and(|m| self.matches >= m) {
                    flow = Flow::Stop;
                    break;
                }
                self.matches += 1;
                if let Err(err) = (self.sink)(&self.assignment) {
                    self.cells -= cands.len();
                    return Err(err);
                }
            } else {
                match self.level(lvl + 1) {
                    Ok(Flow::Continue) => {}
                    Ok(Flow::Stop) => {
                        flow = Flow::Stop;
                        break;
                    }
                    Err(err) => {
                        self.cells -= cands.len();
                        return Err(err);
                    }
                }
            }
        }
        self.cells -= cands.len();
        Ok(flow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DataGraph;
    use crate::order::{jo_order, validate_order};
    use crate::reach::ReachIndex;
    use crate::rig::{build_rig, RigConfig};

    fn setup(gtext: &str, qtext: &str) -> (PatternQuery, Rig) {
        let g = DataGraph::parse_str(gtext).unwrap();
        let ix = ReachIndex::build(&g);
        let q = PatternQuery::parse_str(qtext).unwrap();
        let rig = build_rig(&q, &g, &ix, &RigConfig::default()).unwrap();
        (q, rig)
    }

    #[test]
    fn single_node_emits_inverted_list() {
        let (q, rig) = setup("t 3 1\nv 0 a\nv 1 b\nv 2 a\ne 0 1\n", "n 0 a\n");
        let order = jo_order(&q, &rig).unwrap();
        let mut out = Vec::new();
        let r = mjoin(&q, &rig, &order, &EnumLimits::unlimited(), |t| {
            out.push(t.to_vec());
            Ok::<(), ()>(())
        })
        .unwrap();
        assert_eq!(r.matches, 2);
        assert!(r.completed);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn cap_equal_to_total_still_completes() {
        let (q, rig) = setup("t 3 1\nv 0 a\nv 1 b\nv 2 a\ne 0 1\n", "n 0 a\n");
        let order = jo_order(&q, &rig).unwrap();
        let r = count_matches(&q, &rig, &order, &EnumLimits::unlimited().with_max_matches(2));
        assert_eq!((r.matches, r.completed), (2, true));
        let r = count_matches(&q, &rig, &order, &EnumLimits::unlimited().with_max_matches(1));
        assert_eq!((r.matches, r.completed), (1, false));
    }

    #[test]
    fn sink_error_propagates() {
        let (q, rig) = setup("t 2 1\nv 0 a\nv 1 b\ne 0 1\n", "n 0 a\nn 1 b\nd 0 1\n");
        let order = validate_order(&q, &[1, 0]).unwrap();
        let r = mjoin(&q, &rig, &order, &EnumLimits::unlimited(), |_| Err("full"));
        assert_eq!(r.unwrap_err(), "full");
    }

    #[test]
    fn peak_cells_bounded_by_query_times_max_cos() {
        let (q, rig) = setup(
            "t 5 4\nv 0 a\nv 1 b\nv 2 b\nv 3 c\nv 4 c\ne 0 1\ne 0 2\ne 1 3\ne 2 4\n",
            "n 0 a\nn 1 b\nn 2 c\nd 0 1\nr 0 2\n",
        );
        let order = jo_order(&q, &rig).unwrap();
        let r = count_matches(&q, &rig, &order, &EnumLimits::unlimited());
        assert_eq!(r.matches, 4);
        let max_cos = rig.cos_sets().iter().map(NodeSet::len).max().unwrap();
        assert!(r.peak_candidate_cells <= q.num_nodes() * max_cos);
    }
}
