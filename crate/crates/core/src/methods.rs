//! Interchangeable evaluation strategies, looked up by name.

use crate::error::{Error, Result};
use crate::geometry::HomologyClass;
use crate::graph::EmbeddedGraph;
use crate::ising::{self, PartitionReport};
use crate::walks::{self, Closure, OpenSum, WalkSeries};

/// A way of evaluating closed-walk series and open-walk sums.
pub trait SeriesBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn closed_series(&self, g: &EmbeddedGraph, k: &[f64], alpha: &HomologyClass, max_len: usize) -> Result<WalkSeries>;
    fn open_sum(
        &self,
        g: &EmbeddedGraph,
        k_tilde: &[f64],
        closure: &Closure,
        alpha: &HomologyClass,
        max_len: usize,
    ) -> Result<OpenSum>;
}

/// Exhaustive enumeration, sharded over `workers` threads.
#[derive(Debug, Clone, Copy)]
pub struct EnumerateBackend {
    pub workers: usize,
}

impl SeriesBackend for EnumerateBackend {
    fn name(&self) -> &'static str {
        "enumerate"
    }
    fn closed_series(&self, g: &EmbeddedGraph, k: &[f64], alpha: &HomologyClass, max_len: usize) -> Result<WalkSeries> {
        let mut s = walks::walk_series(g, k, alpha, max_len, self.workers)?;
        s.bound = Some(walks::tail_bound(g, k, alpha, max_len)?);
        Ok(s)
    }
    fn open_sum(
        &self,
        g: &EmbeddedGraph,
        k_tilde: &[f64],
        closure: &Closure,
        alpha: &HomologyClass,
        max_len: usize,
    ) -> Result<OpenSum> {
        walks::open_walk_sum_enumerate(g, k_tilde, closure, alpha, max_len, self.workers)
    }
}

/// Traces and products of the transition operator.
#[derive(Debug, Clone, Copy)]
pub struct OperatorBackend;

impl SeriesBackend for OperatorBackend {
    fn name(&self) -> &'static str {
        "operator"
    }
    fn closed_series(&self, g: &EmbeddedGraph, k: &[f64], alpha: &HomologyClass, max_len: usize) -> Result<WalkSeries> {
        let mut s = walks::walk_series_operator(g, k, alpha, max_len)?;
        s.bound = Some(walks::tail_bound(g, k, alpha, max_len)?);
        Ok(s)
    }
    fn open_sum(
        &self,
        g: &EmbeddedGraph,
        k_tilde: &[f64],
        closure: &Closure,
        alpha: &HomologyClass,
        max_len: usize,
    ) -> Result<OpenSum> {
        walks::open_walk_sum_operator(g, k_tilde, closure, alpha, max_len)
    }
}

/// Backend by name: `enumerate` or `operator`.
pub fn backend(name: &str, workers: usize) -> Result<Box<dyn SeriesBackend>> {
    match name {
        "enumerate" => Ok(Box::new(EnumerateBackend { workers })),
        "operator" => Ok(Box::new(OperatorBackend)),
        other => Err(Error::Precondition(format!("unknown backend {other:?}"))),
    }
}

pub const BACKENDS: [&str; 2] = ["enumerate", "operator"];

/// Settings shared by partition methods.
pub struct EvalContext<'a> {
    pub max_len: usize,
    pub backend: &'a dyn SeriesBackend,
}

/// A way of computing the partition function.
pub trait PartitionMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn evaluate(&self, g: &EmbeddedGraph, ctx: &EvalContext<'_>) -> Result<PartitionReport>;
}

struct Bruteforce;
struct Hte;
struct Walks;

impl PartitionMethod for Bruteforce {
    fn name(&self) -> &'static str {
        "bruteforce"
    }
    fn evaluate(&self, g: &EmbeddedGraph, _: &EvalContext<'_>) -> Result<PartitionReport> {
        ising::partition_bruteforce(g)
    }
}

impl PartitionMethod for Hte {
    fn name(&self) -> &'static str {
        "hte"
    }
    fn evaluate(&self, g: &EmbeddedGraph, _: &EvalContext<'_>) -> Result<PartitionReport> {
        ising::partition_hte(g)
    }
}

impl PartitionMethod for Walks {
    fn name(&self) -> &'static str {
        "walks"
    }
    fn evaluate(&self, g: &EmbeddedGraph, ctx: &EvalContext<'_>) -> Result<PartitionReport> {
        ising::partition_walks(g, ctx.max_len, ctx.backend)
    }
}

pub struct MethodRegistry {
    methods: Vec<Box<dyn PartitionMethod>>,
}

impl MethodRegistry {
    pub fn standard() -> MethodRegistry {
        MethodRegistry {
            methods: vec![Box::new(Bruteforce), Box::new(Hte), Box::new(Walks)],
        }
    }
    pub fn register(&mut self, m: Box<dyn PartitionMethod>) {
        self.methods.retain(|x| x.name() != m.name());
        self.methods.push(m);
    }
    pub fn names(&self) -> Vec<&'static str> {
        self.methods.iter().map(|m| m.name()).collect()
    }
    pub fn get(&self, name: &str) -> Option<&dyn PartitionMethod> {
        self.methods.iter().find(|m| m.name() == name).map(|m| m.as_ref())
    }
    /// The named method, or every method for `all`.
    pub fn select(&self, name: &str) -> Result<Vec<&dyn PartitionMethod>> {
        if name == "all" {
            return Ok(self.methods.iter().map(|m| m.as_ref()).collect());
        }
        self.get(name)
            .map(|m| vec![m])
            .ok_or_else(|| Error::Precondition(format!("unknown method {name:?}")))
    }
}
