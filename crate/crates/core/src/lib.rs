//! Hybrid graph pattern matching.
//!
//! A pattern query mixes direct edges (matched by a data edge) with
//! reachability edges (matched by a nonempty path). Evaluation runs in three
//! stages: double simulation filters candidates, a runtime index graph (RIG)
//! stores the candidate edges between survivors, and a multiway join
//! enumerates the occurrences over the RIG.
//!
//! ```
//! use rigmatch::{DataGraph, PatternQuery, Matcher};
//!
//! let g = DataGraph::parse_str("t 3 2\nv 0 a\nv 1 b\nv 2 c\ne 0 1\ne 1 2\n").unwrap();
//! let q = PatternQuery::parse_str("n 0 a\nn 1 c\nr 0 1\n").unwrap();
//! let m = Matcher::new(&g);
//! let rows = m.collect(&q).unwrap();
//! assert_eq!(rows, vec![vec![0, 2]]);
//! ```

pub mod fuzz;
pub mod generate;
pub mod graph;
pub mod limits;
pub mod mjoin;
pub mod nodeset;
pub mod oracle;
pub mod order;
pub mod pipeline;
pub mod query;
pub mod reach;
pub mod rig;
pub mod sim;

pub use graph::{DataGraph, Direction, GraphBuilder, GraphError, Label};
pub use limits::{Deadline, EnumLimits};
pub use mjoin::{count_matches, mjoin, EnumReport};
pub use nodeset::{NodeId, NodeSet};
pub use order::{jo_order, ri_order, validate_order, OrderError, SearchOrder};
pub use pipeline::{Matcher, PipelineConfig, PipelineError, PipelineReport, RigMode};
pub use query::{EdgeKind, PatternQuery, QueryEdge, QueryError, QueryNodeId};
pub use reach::{ReachConfig, ReachIndex};
pub use rig::{build_rig, Rig, RigStats};
pub use sim::{fb_sim, fb_sim_bas, fb_sim_dag, EdgeMatcher, EdgeTester, FbRelation, SimAlgorithm, SimOptions};
