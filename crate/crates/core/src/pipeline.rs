//! End-to-end evaluation: reduce, simulate, build the RIG, order, enumerate.

use std::error::Error;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::graph::DataGraph;
use crate::limits::{Deadline, EnumLimits};
use crate::mjoin::{mjoin_until, EnumReport};
use crate::nodeset::NodeId;
use crate::order::{jo_order, ri_order, validate_order, OrderError, SearchOrder};
use crate::query::{PatternQuery, QueryNodeId};
use crate::reach::ReachIndex;
use crate::rig::{build_rig, Rig, RigConfig, RigStats};
use crate::sim::SimError;

pub use crate::rig::RigMode;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderChoice {
    Jo,
    Ri,
    Explicit(Vec<QueryNodeId>),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub rig: RigConfig,
    pub order: OrderChoice,
    pub limits: EnumLimits,
    /// Drop transitively implied reachability edges first.
    pub reduce: bool,
}

impl Default for PipelineConfig {
    /// Refined RIG with a 3-pass simulation cap, JO order, no limits.
    fn default() -> Self {
        let mut rig = RigConfig::default();
        rig.sim.max_passes = Some(3);
        PipelineConfig {
            rig,
            order: OrderChoice::Jo,
            limits: EnumLimits::unlimited(),
            reduce: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("result sink failed: {0}")]
    Sink(Box<dyn Error + Send + Sync>),
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    /// The query actually evaluated (after reduction).
    pub query: PatternQuery,
    pub sim_passes: usize,
    pub sim_exact: bool,
    pub rig: RigStats,
    pub rig_empty: bool,
    /// Empty when the RIG was empty or truncated.
    pub order: Vec<QueryNodeId>,
    pub enumeration: EnumReport,
    /// Reduction, simulation, RIG construction and ordering.
    pub match_time: Duration,
    pub enum_time: Duration,
}

impl PipelineReport {
    pub fn matches(&self) -> u64 {
        self.enumeration.matches
    }

    pub fn completed(&self) -> bool {
        self.enumeration.completed
    }
}

/// A data graph together with its reachability index.
pub struct Matcher<'g> {
    graph: &'g DataGraph,
    index: ReachIndex,
}

impl<'g> Matcher<'g> {
    pub fn new(graph: &'g DataGraph) -> Self {
        Matcher {
            graph,
            index: ReachIndex::build(graph),
        }
    }

    pub fn with_index(graph: &'g DataGraph, index: ReachIndex) -> Self {
        Matcher { graph, index }
    }

    pub fn graph(&self) -> &DataGraph {
        self.graph
    }

    pub fn index(&self) -> &ReachIndex {
        &self.index
    }

    /// Builds the RIG for `q` as configured, without reduction.
    pub fn build_rig(&self, q: &PatternQuery, cfg: &RigConfig) -> Result<Rig, SimError> {
        build_rig(q, self.graph, &self.index, cfg)
    }

    /// Evaluates `q`; `sink` receives each occurrence as internal node ids
    /// indexed by query node.
    pub fn run<E, F>(&self, q: &PatternQuery, cfg: &PipelineConfig, sink: F) -> Result<PipelineReport, PipelineError>
    where
        E: Into<Box<dyn Error + Send + Sync>>,
        F: FnMut(&[NodeId]) -> Result<(), E>,
    {
        let start = Instant::now();
        let deadline = Deadline::from_timeout(cfg.limits.timeout);
        if let OrderChoice::Explicit(seq) = &cfg.order {
            validate_order(q, seq)?;
        }
        let query = if cfg.reduce {
            q.transitive_reduction()
        } else {
            q.clone()
        };
        let mut rig_cfg = cfg.rig;
        rig_cfg.sim.deadline = deadline;
        let rig = build_rig(&query, self.graph, &self.index, &rig_cfg)?;
        let order: Option<SearchOrder> = if rig.is_empty() || rig.truncated() {
            None
        } else {
            Some(match &cfg.order {
                OrderChoice::Jo => jo_order(&query, &rig)?,
                OrderChoice::Ri => ri_order(&query),
                OrderChoice::Explicit(seq) => validate_order(&query, seq)?,
            })
        };
        let match_time = start.elapsed();
        let enumeration = match &order {
            Some(order) => mjoin_until(&query, &rig, order, cfg.limits.max_matches, deadline, sink)
                .map_err(|e| PipelineError::Sink(e.into()))?,
            None => EnumReport {
                matches: 0,
                completed: !rig.truncated(),
                elapsed: Duration::ZERO,
                peak_candidate_cells: 0,
            },
        };
        Ok(PipelineReport {
            sim_passes: rig.sim_passes(),
            sim_exact: rig.sim_exact(),
            rig: rig.stats(self.graph),
            rig_empty: rig.is_empty(),
            order: order.map(|o| o.sequence().to_vec()).unwrap_or_default(),
            enum_time: enumeration.elapsed,
            enumeration,
            match_time,
            query,
        })
    }

    /// Evaluates `q` in counting mode.
    pub fn count(&self, q: &PatternQuery, cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
        self.run(q, cfg, |_| Ok::<(), std::convert::Infallible>(()))
    }

    /// All occurrences as external node ids, sorted.
    pub fn collect(&self, q: &PatternQuery) -> Result<Vec<Vec<NodeId>>, PipelineError> {
        let mut out = Vec::new();
        self.run(q, &PipelineConfig::default(), |t| {
            out.push(t.iter().map(|&v| self.graph.external_id(v)).collect::<Vec<_>>());
            Ok::<(), std::convert::Infallible>(())
        })?;
        out.sort();
        Ok(out)
    }
}
