//! Plain-text input formats.
//!
//! Network files hold one edge per line, `u v r`, with `#` starting a
//! comment. Exhaustion files hold lines `n: v1 v2 …` listing `V_n \ V_{n-1}`.
//! Vertex-set files list names separated by whitespace, one or more per line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::exhaustion::{ExplicitExhaustion, VertexSelector};
use crate::network::{Network, NetworkBuilder};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut b = NetworkBuilder::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [u, v, r] = fields[..] else {
            return Err(parse_error(line, format!("expected `u v r`, found {} fields", fields.len())));
        };
        let r: f64 = r
            .parse()
            .map_err(|_| parse_error(line, format!("resistance `{r}` is not a number")))?;
        if u == v {
            return Err(parse_error(line, format!("self-loop at `{u}`")));
        }
        b.named_edge(u, v, r).map_err(|e| parse_error(line, e.to_string()))?;
    }
    let net = b.build();
    if net.is_empty() {
        return Err(parse_error(0, "network has no edges"));
    }
    Ok(net)
}

/// Layers of an exhaustion file, keyed by level.
pub fn parse_layers(text: &str) -> Result<BTreeMap<usize, Vec<String>>> {
    let mut layers: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for (line, content) in content_lines(text) {
        let (n, rest) = content
            .split_once(':')
            .ok_or_else(|| parse_error(line, "expected `n: v1 v2 ...`"))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| parse_error(line, format!("level `{}` is not a positive integer", n.trim())))?;
        if n == 0 {
            return Err(parse_error(line, "levels start at 1"));
        }
        for name in rest.split_whitespace() {
            if !seen.insert(name.to_string()) {
                return Err(parse_error(line, format!("vertex `{name}` listed twice")));
            }
            layers.entry(n).or_default().push(name.to_string());
        }
    }
    Ok(layers)
}

/// Builds an exhaustion of `net` from exhaustion-file text. Missing levels
/// are empty layers; vertices never listed form a final layer.
pub fn parse_exhaustion(net: Network, text: &str) -> Result<ExplicitExhaustion> {
    let layers = parse_layers(text)?;
    let top = layers.keys().next_back().copied().unwrap_or(0);
    let mut ordered = vec![Vec::new(); top];
    for (n, names) in layers {
        for name in names {
            ordered[n - 1].push(net.require(&name)?);
        }
    }
    ExplicitExhaustion::new(net, ordered)
}

pub fn parse_vertex_set(text: &str) -> Result<VertexSelector> {
    let names: Vec<&str> = content_lines(text).flat_map(|(_, l)| l.split_whitespace()).collect();
    if names.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(VertexSelector::names(names))
}

pub fn read_network(path: &Path) -> Result<Network> {
    parse_network(&std::fs::read_to_string(path)?)
}

pub fn read_exhaustion(network: &Path, layers: Option<&Path>) -> Result<ExplicitExhaustion> {
    let net = read_network(network)?;
    match layers {
        Some(path) => parse_exhaustion(net, &std::fs::read_to_string(path)?),
        None => ExplicitExhaustion::whole(net),
    }
}

pub fn read_vertex_set(path: &Path) -> Result<VertexSelector> {
    parse_vertex_set(&std::fs::read_to_string(path)?)
}
