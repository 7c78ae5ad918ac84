//! Graphs shipped with the crate.

use crate::graph::{load_graph, EmbeddedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixture {
    E1,
    P3,
    C3,
    C4,
    Bow,
    Grid3,
    T22,
    T33,
}

impl Fixture {
    pub const ALL: [Fixture; 8] = [
        Fixture::E1,
        Fixture::P3,
        Fixture::C3,
        Fixture::C4,
        Fixture::Bow,
        Fixture::Grid3,
        Fixture::T22,
        Fixture::T33,
    ];
    pub const PLANAR: [Fixture; 6] = [
        Fixture::E1,
        Fixture::P3,
        Fixture::C3,
        Fixture::C4,
        Fixture::Bow,
        Fixture::Grid3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::E1 => "e1",
            Fixture::P3 => "p3",
            Fixture::C3 => "c3",
            Fixture::C4 => "c4",
            Fixture::Bow => "bow",
            Fixture::Grid3 => "grid3",
            Fixture::T22 => "t22",
            Fixture::T33 => "t33",
        }
    }

    pub fn json(self) -> &'static str {
        match self {
            Fixture::E1 => include_str!("../../../fixtures/e1.json"),
            Fixture::P3 => include_str!("../../../fixtures/p3.json"),
            Fixture::C3 => include_str!("../../../fixtures/c3.json"),
            Fixture::C4 => include_str!("../../../fixtures/c4.json"),
            Fixture::Bow => include_str!("../../../fixtures/bow.json"),
            Fixture::Grid3 => include_str!("../../../fixtures/grid3.json"),
            Fixture::T22 => include_str!("../../../fixtures/t22.json"),
            Fixture::T33 => include_str!("../../../fixtures/t33.json"),
        }
    }

    pub fn from_name(name: &str) -> Option<Fixture> {
        Fixture::ALL.into_iter().find(|f| f.name() == name.to_ascii_lowercase())
    }
}

/// Loads a shipped fixture; these always validate.
pub fn load(f: Fixture) -> EmbeddedGraph {
    load_graph(f.json()).unwrap_or_else(|e| panic!("fixture {} is invalid: {e}", f.name()))
}
