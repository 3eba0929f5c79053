//! Block sets: definition, JSON ingestion and validation.
//!
//! Degree conventions: in a hooking block a self-loop adds 2 to the degree of
//! its vertex; in a bipolar block it adds 1 to both outdegree and indegree.
//! Self-loops on poles are rejected since they would break the source/sink
//! property.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Number;

/// Largest number of tracked essential degrees accepted in a block file.
pub const MAX_TRACKED: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hooking,
    Bipolar,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Hooking => "hooking",
            Kind::Bipolar => "bipolar",
        })
    }
}

/// Validation failures. Each carries a stable rule id (see [`ModelError::rule`]).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("[M1] schema: {0}")]
    Schema(String),
    #[error("[M2] block '{block}': probability {value} is not in (0, 1]")]
    ProbabilityRange { block: String, value: String },
    #[error("[M3] block probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: String },
    #[error("[M4] parameters: {0}")]
    Parameter(String),
    #[error("[M5] block '{block}': {reason}")]
    Vertices { block: String, reason: String },
    #[error("[M6] block '{block}': unknown vertex '{vertex}'")]
    UnknownVertex { block: String, vertex: String },
    #[error("[M7] block '{block}': underlying graph is not connected")]
    Disconnected { block: String },
    #[error("[M8] block '{block}': {reason}")]
    Anchor { block: String, reason: String },
    #[error("[M9] block '{block}': {reason}")]
    Poles { block: String, reason: String },
    #[error("[M10] {0}")]
    Tracked(String),
    #[error("[M11] initial block index {index} out of range for {count} blocks")]
    InitialBlock { index: usize, count: usize },
    #[error("[M12] operation requires a {expected} block set")]
    WrongKind { expected: Kind },
}

impl ModelError {
    pub fn rule(&self) -> &'static str {
        match self {
            ModelError::Schema(_) => "M1",
            ModelError::ProbabilityRange { .. } => "M2",
            ModelError::ProbabilitySum { .. } => "M3",
            ModelError::Parameter(_) => "M4",
            ModelError::Vertices { .. } => "M5",
            ModelError::UnknownVertex { .. } => "M6",
            ModelError::Disconnected { .. } => "M7",
            ModelError::Anchor { .. } => "M8",
            ModelError::Poles { .. } => "M9",
            ModelError::Tracked(_) => "M10",
            ModelError::InitialBlock { .. } => "M11",
            ModelError::WrongKind { .. } => "M12",
        }
    }
}

/// The distinguished vertices of a block, as indices into its vertex list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    Hook(usize),
    Poles { north: usize, south: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub vertices: Vec<String>,
    /// Edge endpoints as vertex indices; `(from, to)` for bipolar blocks.
    pub edges: Vec<(usize, usize)>,
    pub anchor: Anchor,
    pub probability: Number,
}

impl Block {
    pub fn kind(&self) -> Kind {
        match self.anchor {
            Anchor::Hook(_) => Kind::Hooking,
            Anchor::Poles { .. } => Kind::Bipolar,
        }
    }

    pub fn vertex_index(&self, v: &str) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }

    /// Degree (hooking) or outdegree (bipolar) of the named vertex.
    pub fn degree_of(&self, v: &str) -> Result<u32, ModelError> {
        let idx = self
            .vertex_index(v)
            .ok_or_else(|| ModelError::UnknownVertex {
                block: self.name.clone(),
                vertex: v.to_string(),
            })?;
        Ok(self.degrees()[idx])
    }

    /// Degree (hooking) or outdegree (bipolar) of every vertex, by index.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.vertices.len()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            if self.kind() == Kind::Hooking {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn indegrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.vertices.len()];
        for &(_, v) in &self.edges {
            deg[v] += 1;
        }
        deg
    }

    pub fn is_anchor(&self, v: usize) -> bool {
        match self.anchor {
            Anchor::Hook(h) => v == h,
            Anchor::Poles { north, south } => v == north || v == south,
        }
    }

    /// Index of the vertex fused onto the latch: the hook or the north pole.
    pub fn latch_vertex(&self) -> usize {
        match self.anchor {
            Anchor::Hook(h) => h,
            Anchor::Poles { north, .. } => north,
        }
    }

    /// How much the latch's (out)degree grows when this block is attached:
    /// `deg(h)` for hooking blocks, `deg⁺(N) − 1` for bipolar blocks.
    pub fn latch_increment(&self) -> u32 {
        let d = self.degrees()[self.latch_vertex()];
        match self.kind() {
            Kind::Hooking => d,
            Kind::Bipolar => d - 1,
        }
    }

    /// (Out)degrees of the vertices a copy of this block adds to a network.
    pub fn new_vertex_degrees(&self) -> Vec<u32> {
        self.degrees()
            .into_iter()
            .enumerate()
            .filter(|&(v, _)| !self.is_anchor(v))
            .map(|(_, d)| d)
            .collect()
    }

    /// Copy with every arc reversed and the poles swapped.
    fn reversed(&self) -> Block {
        let anchor = match self.anchor {
            Anchor::Poles { north, south } => Anchor::Poles {
                north: south,
                south: north,
            },
            a => a,
        };
        Block {
            name: self.name.clone(),
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|&(u, v)| (v, u)).collect(),
            anchor,
            probability: self.probability.clone(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let n = self.vertices.len();
        if n < 2 {
            return Err(ModelError::Vertices {
                block: self.name.clone(),
                reason: "a block needs at least 2 vertices".into(),
            });
        }
        let mut seen = HashMap::new();
        for v in &self.vertices {
            if seen.insert(v.as_str(), ()).is_some() {
                return Err(ModelError::Vertices {
                    block: self.name.clone(),
                    reason: format!("duplicate vertex '{v}'"),
                });
            }
        }
        if !self.probability.is_positive() || self.probability.to_f64() > 1.0 {
            return Err(ModelError::ProbabilityRange {
                block: self.name.clone(),
                value: self.probability.to_string(),
            });
        }
        // connectivity of the underlying undirected multigraph
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if visited.iter().any(|&x| !x) {
            return Err(ModelError::Disconnected {
                block: self.name.clone(),
            });
        }
        if let Anchor::Poles { north, south } = self.anchor {
            let err = |reason: String| ModelError::Poles {
                block: self.name.clone(),
                reason,
            };
            if north == south {
                return Err(err("north and south poles must be distinct".into()));
            }
            if self
                .edges
                .iter()
                .any(|&(u, v)| u == v && (u == north || u == south))
            {
                return Err(err("self-loops are not allowed on poles".into()));
            }
            let out = self.degrees();
            let inn = self.indegrees();
            let sources: Vec<usize> = (0..n).filter(|&v| inn[v] == 0).collect();
            let sinks: Vec<usize> = (0..n).filter(|&v| out[v] == 0).collect();
            if sources != [north] {
                return Err(err(format!(
                    "expected the north pole '{}' to be the only source, found {:?}",
                    self.vertices[north],
                    names(&self.vertices, &sources)
                )));
            }
            if sinks != [south] {
                return Err(err(format!(
                    "expected the south pole '{}' to be the only sink, found {:?}",
                    self.vertices[south],
                    names(&self.vertices, &sinks)
                )));
            }
        }
        Ok(())
    }
}

fn names(vertices: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| vertices[i].clone()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitialBlock {
    #[default]
    First,
    Index(usize),
    /// Drawn with the block probabilities from the simulation's random stream.
    Random,
}

/// A validated model definition.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSet {
    pub kind: Kind,
    pub blocks: Vec<Block>,
    pub chi: Number,
    pub rho: Number,
    pub initial_block: InitialBlock,
    /// Number of essential degrees tracked by analyses.
    pub r: usize,
}

impl BlockSet {
    /// Builds and validates a block set.
    pub fn new(
        kind: Kind,
        blocks: Vec<Block>,
        chi: Number,
        rho: Number,
        initial_block: InitialBlock,
        r: usize,
    ) -> Result<Self, ModelError> {
        let bs = BlockSet {
            kind,
            blocks,
            chi,
            rho,
            initial_block,
            r,
        };
        bs.validate()?;
        Ok(bs)
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    /// True when χ, ρ and every probability are exact rationals and the
    /// probabilities sum to exactly 1.
    pub fn is_exact(&self) -> bool {
        self.chi.is_exact()
            && self.rho.is_exact()
            && self.blocks.iter().all(|b| b.probability.is_exact())
            && self
                .blocks
                .iter()
                .fold(Number::int(0), |acc, b| acc.add(&b.probability))
                == Number::int(1)
    }

    /// Attachment weight `w(k) = χk + ρ` in binary floating point.
    pub fn weight(&self, k: u64) -> f64 {
        self.chi.to_f64() * k as f64 + self.rho.to_f64()
    }

    pub fn initial_index(&self) -> Option<usize> {
        match self.initial_block {
            InitialBlock::First => Some(0),
            InitialBlock::Index(i) => Some(i),
            InitialBlock::Random => None,
        }
    }

    /// Same model with a different number of tracked degrees.
    pub fn with_r(&self, r: usize) -> Result<Self, ModelError> {
        let mut bs = self.clone();
        bs.r = r;
        bs.validate()?;
        Ok(bs)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.blocks.is_empty() {
            return Err(ModelError::Schema("at least one block is required".into()));
        }
        for b in &self.blocks {
            if b.kind() != self.kind {
                return Err(ModelError::Anchor {
                    block: b.name.clone(),
                    reason: format!("anchor does not match kind '{}'", self.kind),
                });
            }
            b.validate()?;
        }
        let sum = self
            .blocks
            .iter()
            .fold(Number::int(0), |acc, b| acc.add(&b.probability));
        if (sum.to_f64() - 1.0).abs() > 1e-9 {
            return Err(ModelError::ProbabilitySum {
                sum: sum.to_string(),
            });
        }
        if self.chi.is_negative() {
            return Err(ModelError::Parameter(format!("chi = {} must be >= 0", self.chi)));
        }
        if !self.chi.add(&self.rho).is_positive() {
            return Err(ModelError::Parameter(format!(
                "chi + rho = {} must be > 0",
                self.chi.add(&self.rho)
            )));
        }
        if self.chi.is_zero() && !self.rho.is_positive() {
            return Err(ModelError::Parameter("rho must be > 0 when chi = 0".into()));
        }
        if self.r == 0 || self.r > MAX_TRACKED {
            return Err(ModelError::Tracked(format!(
                "r = {} must lie in 1..={MAX_TRACKED}",
                self.r
            )));
        }
        if let InitialBlock::Index(i) = self.initial_block {
            if i >= self.blocks.len() {
                return Err(ModelError::InitialBlock {
                    index: i,
                    count: self.blocks.len(),
                });
            }
        }
        Ok(())
    }

    /// Reverses every arc and swaps the poles of each block, so that
    /// outdegree analyses of the result describe indegrees of the original.
    pub fn reverse_bipolar(&self) -> Result<BlockSet, ModelError> {
        if self.kind != Kind::Bipolar {
            return Err(ModelError::WrongKind {
                expected: Kind::Bipolar,
            });
        }
        let out = BlockSet {
            blocks: self.blocks.iter().map(Block::reversed).collect(),
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: RawBlockSet =
            serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        raw.into_block_set()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawBlockSet::from(self)).expect("block set serializes")
    }
}

/// Parses and validates a block-set document.
pub fn parse_blockset(text: &str) -> Result<BlockSet, ModelError> {
    BlockSet::from_json(text)
}

/// Free-function form of [`Block::degree_of`].
pub fn degree_of(block: &Block, v: &str) -> Result<u32, ModelError> {
    block.degree_of(v)
}

/// Free-function form of [`BlockSet::reverse_bipolar`].
pub fn reverse_bipolar(bs: &BlockSet) -> Result<BlockSet, ModelError> {
    bs.reverse_bipolar()
}

// ---- wire format -------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlockSet {
    kind: Kind,
    chi: Number,
    rho: Number,
    r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_block: Option<RawInitial>,
    blocks: Vec<RawBlock>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawInitial {
    Index(usize),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    name: String,
    probability: Number,
    vertices: Vec<String>,
    edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hook: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    north: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    south: Option<String>,
}

impl RawBlockSet {
    fn into_block_set(self) -> Result<BlockSet, ModelError> {
        let initial_block = match self.initial_block {
            None => InitialBlock::First,
            Some(RawInitial::Index(i)) => InitialBlock::Index(i),
            Some(RawInitial::Word(w)) if w == "random" => InitialBlock::Random,
            Some(RawInitial::Word(w)) => {
                return Err(ModelError::Schema(format!(
                    "initial_block must be an index or \"random\", got \"{w}\""
                )))
            }
        };
        let blocks = self
            .blocks
            .into_iter()
            .map(|b| b.into_block(self.kind))
            .collect::<Result<Vec<_>, _>>()?;
        BlockSet::new(self.kind, blocks, self.chi, self.rho, initial_block, self.r)
    }
}

impl RawBlock {
    fn into_block(self, kind: Kind) -> Result<Block, ModelError> {
        let name = self.name;
        let lookup = |v: &str| {
            self.vertices
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| ModelError::UnknownVertex {
                    block: name.clone(),
                    vertex: v.to_string(),
                })
        };
        let edges = self
            .edges
            .iter()
            .map(|[u, v]| Ok((lookup(u)?, lookup(v)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let anchor_err = |reason: &str| ModelError::Anchor {
            block: name.clone(),
            reason: reason.to_string(),
        };
        let anchor = match (kind, &self.hook, &self.north, &self.south) {
            (Kind::Hooking, Some(h), None, None) => Anchor::Hook(lookup(h)?),
            (Kind::Hooking, _, _, _) => {
                return Err(anchor_err("hooking blocks need exactly a 'hook' field"))
            }
            (Kind::Bipolar, None, Some(n), Some(s)) => Anchor::Poles {
                north: lookup(n)?,
                south: lookup(s)?,
            },
            (Kind::Bipolar, _, _, _) => {
                return Err(anchor_err(
                    "bipolar blocks need 'north' and 'south' fields and no 'hook'",
                ))
            }
        };
        Ok(Block {
            name,
            vertices: self.vertices,
            edges,
            anchor,
            probability: self.probability,
        })
    }
}

impl From<&BlockSet> for RawBlockSet {
    fn from(bs: &BlockSet) -> Self {
        let initial_block = match bs.initial_block {
            InitialBlock::First => None,
            InitialBlock::Index(i) => Some(RawInitial::Index(i)),
            InitialBlock::Random => Some(RawInitial::Word("random".into())),
        };
        let blocks = bs
            .blocks
            .iter()
            .map(|b| {
                let name_of = |i: usize| b.vertices[i].clone();
                let (hook, north, south) = match b.anchor {
                    Anchor::Hook(h) => (Some(name_of(h)), None, None),
                    Anchor::Poles { north, south } => {
                        (None, Some(name_of(north)), Some(name_of(south)))
                    }
                };
                RawBlock {
                    name: b.name.clone(),
                    probability: b.probability.clone(),
                    vertices: b.vertices.clone(),
                    edges: b.edges.iter().map(|&(u, v)| [name_of(u), name_of(v)]).collect(),
                    hook,
                    north,
                    south,
                }
            })
            .collect();
        RawBlockSet {
            kind: bs.kind,
            chi: bs.chi.clone(),
            rho: bs.rho.clone(),
            r: bs.r,
            initial_block,
            blocks,
        }
    }
}
