//! Text edge-list format.
//!
//! ```text
//! sbm-edgelist 1
//! k 2
//! sizes 10 10
//! r 2
//! seed 12345
//! edges 3
//! 0 4
//! 0 11
//! 3 19
//! ```
//!
//! Edges are written once, as `u v` with `u < v`, sorted lexicographically.
//! Lines starting with `#` are ignored on input.

use std::io::{BufRead, Write};

use super::graph::{NodeId, SbmGraph};
use crate::{Error, Result};

const MAGIC: &str = "sbm-edgelist 1";

pub fn write_edge_list<W: Write>(graph: &SbmGraph, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "k {}", graph.k())?;
    let sizes: Vec<String> = graph.sizes().iter().map(ToString::to_string).collect();
    writeln!(out, "sizes {}", sizes.join(" "))?;
    writeln!(out, "r {}", graph.threshold())?;
    writeln!(out, "seed {}", graph.rng_seed())?;
    writeln!(out, "edges {}", graph.edge_count())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn keyed<'a>(line: (usize, &'a str), key: &str) -> Result<&'a str> {
    let (no, text) = line;
    text.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| parse_err(no, format!("expected `{key} ...`")))
}

fn number<T: std::str::FromStr>(no: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(no, format!("cannot parse `{s}`")))
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<SbmGraph> {
    let mut lines = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            lines.push((i + 1, t.to_string()));
        }
    }
    let mut it = lines.iter().map(|(n, s)| (*n, s.as_str()));
    let mut next = |what: &str| it.next().ok_or_else(|| parse_err(0, format!("missing {what}")));

    let magic = next("header")?;
    if magic.1 != MAGIC {
        return Err(parse_err(magic.0, "not an sbm-edgelist file"));
    }
    let kl = next("k")?;
    let k: usize = number(kl.0, keyed(kl, "k")?)?;
    let sl = next("sizes")?;
    let sizes: Vec<usize> = keyed(sl, "sizes")?
        .split_whitespace()
        .map(|s| number(sl.0, s))
        .collect::<Result<_>>()?;
    if sizes.len() != k {
        return Err(parse_err(sl.0, format!("expected {k} sizes")));
    }
    let rl = next("r")?;
    let r: u32 = number(rl.0, keyed(rl, "r")?)?;
    let seedl = next("seed")?;
    let seed: u64 = number(seedl.0, keyed(seedl, "seed")?)?;
    let el = next("edges")?;
    let m: usize = number(el.0, keyed(el, "edges")?)?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, text) = next("edge")?;
        let mut parts = text.split_whitespace();
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), None) => (number::<NodeId>(no, u)?, number::<NodeId>(no, v)?),
            _ => return Err(parse_err(no, "expected `u v`")),
        };
        edges.push((u, v));
    }
    if let Some((no, _)) = next("eof").ok() {
        return Err(parse_err(no, "trailing data after edge list"));
    }
    SbmGraph::from_edges(&sizes, r, &edges, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{generate_sbm, SbmParams};

    #[test]
    fn round_trip() {
        let p = SbmParams::identical(3, 40, 0.1, 0.02, 3, 0);
        let g = generate_sbm(&p, 11).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back.sizes(), g.sizes());
        assert_eq!(back.threshold(), 3);
        assert_eq!(back.rng_seed(), 11);
        assert!(back.edges().eq(g.edges()));
        let mut again = Vec::new();
        write_edge_list(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "sbm-edgelist 1\nk 1\nsizes 3\nr 2\nseed 0\nedges 1\n0 x\n";
        match read_edge_list(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
        let text = "sbm-edgelist 1\nk 2\nsizes 3\n";
        assert!(read_edge_list(text.as_bytes()).is_err());
    }
}
