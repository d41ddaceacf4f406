//! Search orders for the enumerator.

use thiserror::Error;

use crate::query::{PatternQuery, QueryNodeId};
use crate::rig::Rig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderMethod {
    /// Greedy on RIG candidate-set size.
    Jo,
    /// Greedy on query topology.
    Ri,
    Explicit,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("the runtime index graph is empty; there is nothing to order")]
    EmptyRig,
    #[error("order has {got} entries but the query has {expected} nodes")]
    WrongLength { expected: usize, got: usize },
    #[error("query node {0} is out of range or repeated")]
    NotPermutation(QueryNodeId),
    #[error("query node {qid} at position {position} is not adjacent to any earlier node")]
    Disconnected { qid: QueryNodeId, position: usize },
}

/// A permutation of the query nodes in which every node after the first is
/// adjacent (ignoring direction) to an earlier one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOrder {
    sequence: Vec<QueryNodeId>,
    method: OrderMethod,
}

impl SearchOrder {
    pub fn sequence(&self) -> &[QueryNodeId] {
        &self.sequence
    }

    pub fn method(&self) -> OrderMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Smallest candidate set first, then repeatedly the smallest candidate set
/// among nodes adjacent to the prefix. Ties go to the lower qid.
pub fn jo_order(q: &PatternQuery, rig: &Rig) -> Result<SearchOrder, OrderError> {
    if rig.is_empty() {
        return Err(OrderError::EmptyRig);
    }
    let sizes: Vec<usize> = (0..q.num_nodes()).map(|n| rig.cos(n).len()).collect();
    let sequence = greedy(q, |n, _| (sizes[n], n), |n, _| (sizes[n], n));
    Ok(SearchOrder {
        sequence,
        method: OrderMethod::Jo,
    })
}

/// Highest degree first, then repeatedly the node with the most neighbours
/// already placed; ties by degree (descending) then qid.
pub fn ri_order(q: &PatternQuery) -> SearchOrder {
    let degree: Vec<usize> = (0..q.num_nodes()).map(|n| q.degree(n)).collect();
    let sequence = greedy(
        q,
        |n, _| (usize::MAX - degree[n], usize::MAX, n),
        |n, placed| {
            let linked = q.neighbors(n).iter().filter(|&&m| placed[m]).count();
            (usize::MAX - linked, usize::MAX - degree[n], n)
        },
    );
    SearchOrder {
        sequence,
        method: OrderMethod::Ri,
    }
}

/// Selects the minimum key first from all nodes, then from nodes adjacent to
/// the prefix. Keys end in the qid so the choice is unique.
fn greedy<K: Ord>(
    q: &PatternQuery,
    first: impl Fn(QueryNodeId, &[bool]) -> K,
    next: impl Fn(QueryNodeId, &[bool]) -> K,
) -> Vec<QueryNodeId> {
    let k = q.num_nodes();
    let mut placed = vec![false; k];
    let mut frontier = vec![false; k];
    let mut seq = Vec::with_capacity(k);
    while seq.len() < k {
        let pick = if seq.is_empty() {
            (0..k).min_by_key(|&n| first(n, &placed))
        } else {
            (0..k)
                .filter(|&n| frontier[n] && !placed[n])
                .min_by_key(|&n| next(n, &placed))
        };
        let Some(n) = pick else {
            // Disconnected queries are rejected at construction.
            unreachable!("query graph is connected")
        };
        placed[n] = true;
        seq.push(n);
        for m in q.neighbors(n) {
            frontier[m] = true;
        }
    }
    seq
}

/// Checks a user-supplied order.
pub fn validate_order(q: &PatternQuery, sequence: &[QueryNodeId]) -> Result<SearchOrder, OrderError> {
    let k = q.num_nodes();
    if sequence.len() != k {
        return Err(OrderError::WrongLength {
            expected: k,
            got: sequence.len(),
        });
    }
    let mut placed = vec![false; k];
    for (position, &n) in sequence.iter().enumerate() {
        if n >= k || placed[n] {
            return Err(OrderError::NotPermutation(n));
        }
        if position > 0 && !q.neighbors(n).iter().any(|&m| placed[m]) {
            return Err(OrderError::Disconnected { qid: n, position });
        }
        placed[n] = true;
    }
    Ok(SearchOrder {
        sequence: sequence.to_vec(),
        method: OrderMethod::Explicit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ri_path_starts_in_the_middle() {
        let q = PatternQuery::parse_str("n 0 A\nn 1 B\nn 2 C\nd 0 1\nd 1 2\n").unwrap();
        assert_eq!(ri_order(&q).sequence(), &[1, 0, 2]);
    }

    #[test]
    fn ri_triangle_is_qid_ordered() {
        let q = PatternQuery::parse_str("n 0 A\nn 1 B\nn 2 C\nd 0 1\nd 1 2\nd 0 2\n").unwrap();
        assert_eq!(ri_order(&q).sequence(), &[0, 1, 2]);
    }

    #[test]
    fn ri_prefers_prefix_links_over_degree() {
        // 0-1, 0-2, 1-2, 2-3, 3-4, 3-5: node 2 and 3 have degree 3.
        let q = PatternQuery::parse_str(
            "n 0 a\nn 1 a\nn 2 a\nn 3 a\nn 4 a\nn 5 a\nd 0 1\nd 0 2\nd 1 2\nd 2 3\nd 3 4\nd 3 5\n",
        )
        .unwrap();
        let seq = ri_order(&q).sequence().to_vec();
        assert_eq!(seq[0], 2);
        assert_eq!(seq[1], 3);
        assert_eq!(validate_order(&q, &seq).unwrap().sequence(), &seq[..]);
    }

    #[test]
    fn explicit_order_checks() {
        let q = PatternQuery::parse_str("n 0 A\nn 1 B\nn 2 C\nd 0 1\nd 1 2\n").unwrap();
        assert!(validate_order(&q, &[2, 1, 0]).is_ok());
        assert_eq!(
            validate_order(&q, &[0, 2, 1]),
            Err(OrderError::Disconnected { qid: 2, position: 1 })
        );
        assert_eq!(validate_order(&q, &[0, 0, 1]), Err(OrderError::NotPermutation(0)));
        assert_eq!(
            validate_order(&q, &[0, 1]),
            Err(OrderError::WrongLength { expected: 3, got: 2 })
        );
        assert_eq!(validate_order(&q, &[0, 1, 7]), Err(OrderError::NotPermutation(7)));
    }
}
