use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{enumerate_points, hyperplanes, lines};
use crate::error::Result;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneDump {
    pub normal: usize,
    pub points: Vec<usize>,
}

/// JSON dump of PG(n-1, 2): points as coordinate strings (`z_0` first), lines
/// as label triples, hyperplanes as `{normal, points}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryDump {
    pub schema_version: u32,
    pub n: u32,
    pub points: Vec<String>,
    pub lines: Vec<[usize; 3]>,
    pub hyperplanes: Vec<HyperplaneDump>,
}

impl GeometryDump {
    pub fn new(n: u32) -> Result<Self> {
        Ok(GeometryDump {
            schema_version: SCHEMA_VERSION,
            n,
            points: enumerate_points(n)?.into_iter().map(|p| p.bit_string()).collect(),
            lines: lines(n)?.iter().map(|l| l.points()).collect(),
            hyperplanes: hyperplanes(n)?
                .into_iter()
                .map(|h| HyperplaneDump { normal: h.normal, points: h.points })
                .collect(),
        })
    }
}

/// Bipartite point-line incidence graph in Graphviz DOT.
pub fn to_dot(n: u32) -> Result<String> {
    let pts = enumerate_points(n)?;
    let ls = lines(n)?;
    let mut out = String::new();
    writeln!(out, "graph pg{}_2 {{", n - 1).unwrap();
    writeln!(out, "  // schema_version {SCHEMA_VERSION}").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for p in &pts {
        writeln!(out, "  p{} [label=\"{}\\n{}\"];", p.index(), p.index(), p.bit_string()).unwrap();
    }
    writeln!(out, "  node [shape=box];").unwrap();
    for (i, l) in ls.iter().enumerate() {
        let [a, b, c] = l.points();
        writeln!(out, "  l{} [label=\"{a} {b} {c}\"];", i + 1).unwrap();
    }
    for (i, l) in ls.iter().enumerate() {
        for p in l.points() {
            writeln!(out, "  p{p} -- l{};", i + 1).unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_n3() {
        let dump = GeometryDump::new(3).unwrap();
        assert_eq!(dump.points.len(), 7);
        assert_eq!(dump.lines.len(), 7);
        assert_eq!(dump.points[0], "001");
        let json = serde_json::to_string(&dump).unwrap();
        let back: GeometryDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dump);
    }

    #[test]
    fn dot_has_one_edge_per_incidence() {
        let dot = to_dot(3).unwrap();
        assert_eq!(dot.matches(" -- ").count(), 21);
        assert!(dot.starts_with("graph pg2_2 {"));
    }
}
