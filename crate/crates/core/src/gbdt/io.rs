//! Line-based text format for fitted boosters.
//!
//! ```text
//! quantmerge-gbdt v1
//! tau=0.9
//! ...
//! base_score=1.25
//! best_iteration=2
//! trees=2
//! tree 3
//! 0 split 4 0.5 1 2
//! 1 leaf -0.1
//! 2 leaf 0.3
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::booster::GbdtModel;
use super::config::{GbdtConfig, GossConfig};
use super::tree::{Node, Tree};
use crate::error::{Error, Result};
use crate::scoring::QuantileLevel;

pub const GBDT_MAGIC: &str = "quantmerge-gbdt v1";

pub fn gbdt_to_string(model: &GbdtModel) -> String {
    let c = &model.config;
    let mut s = String::new();
    let _ = writeln!(s, "{GBDT_MAGIC}");
    let _ = writeln!(s, "tau={}", c.tau.value());
    let _ = writeln!(s, "max_depth={}", c.max_depth);
    let _ = writeln!(s, "min_data_in_leaf={}", c.min_data_in_leaf);
    let _ = writeln!(s, "learning_rate={}", c.learning_rate);
    let _ = writeln!(s, "num_iterations={}", c.num_iterations);
    let _ = writeln!(s, "num_leaves={}", c.num_leaves);
    let _ = writeln!(s, "early_stopping_round={}", c.early_stopping_round);
    let _ = writeln!(s, "n_bins={}", c.n_bins);
    match &c.goss {
        Some(g) => {
            let _ = writeln!(s, "goss={} {}", g.top_fraction, g.rest_fraction);
        }
        None => {
            let _ = writeln!(s, "goss=none");
        }
    }
    let _ = writeln!(s, "seed={}", c.seed);
    let _ = writeln!(s, "feature_count={}", model.feature_count);
    let _ = writeln!(s, "base_score={}", model.base_score);
    let _ = writeln!(s, "best_iteration={}", model.best_iteration);
    let _ = writeln!(s, "trees={}", model.trees.len());
    for t in &model.trees {
        let _ = writeln!(s, "tree {}", t.nodes.len());
        for (k, n) in t.nodes.iter().enumerate() {
            let _ = match n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    writeln!(s, "{k} split {feature} {threshold} {left} {right}")
                }
                Node::Leaf { value } => writeln!(s, "{k} leaf {value}"),
            };
        }
    }
    s
}

pub fn save_gbdt(model: &GbdtModel, path: &Path) -> Result<()> {
    std::fs::write(path, gbdt_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_gbdt(path: &Path) -> Result<GbdtModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    gbdt_from_str(&text)
}

pub(crate) struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    pub line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
            line: 0,
        }
    }

    pub fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.line,
            message: message.into(),
        }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        loop {
            match self.iter.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok(l);
                    }
                }
                None => return Err(self.err("unexpected end of file")),
            }
        }
    }

    pub fn expect(&mut self, want: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != want {
            return Err(self.err(format!("expected '{want}', found '{l}'")));
        }
        Ok(())
    }

    pub fn key(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next_line()?;
        match l.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok(v.trim()),
            _ => Err(self.err(format!("expected '{key}=...', found '{l}'"))),
        }
    }

    pub fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse()
            .map_err(|_| self.err(format!("invalid {what} '{s}'")))
    }

    pub fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.key(key)?;
        self.parse(v, key)
    }

    pub fn finish(&mut self) -> Result<()> {
        for (i, l) in self.iter.by_ref() {
            if !l.trim().is_empty() {
                self.line = i + 1;
                return Err(self.err("trailing content"));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_tree(nodes: &[Node], n_features: usize) -> std::result::Result<usize, String> {
    // children must point forward so every path terminates
    let mut depth = vec![0usize; nodes.len()];
    let mut reached = vec![false; nodes.len()];
    reached[0] = true;
    for (k, n) in nodes.iter().enumerate() {
        if !reached[k] {
            return Err(format!("node {k} is unreachable"));
        }
        if let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = *n
        {
            if feature >= n_features {
                return Err(format!("node {k} uses feature {feature} of {n_features}"));
            }
            if !threshold.is_finite() {
                return Err(format!("node {k} has a non-finite threshold"));
            }
            for c in [left, right] {
                if c <= k || c >= nodes.len() || reached[c] {
                    return Err(format!("node {k} has invalid child {c}"));
                }
                reached[c] = true;
                depth[c] = depth[k] + 1;
            }
        }
    }
    Ok(depth.into_iter().max().unwrap_or(0))
}

pub fn gbdt_from_str(text: &str) -> Result<GbdtModel> {
    let mut r = Lines::new(text);
    r.expect(GBDT_MAGIC)?;
    let tau: f64 = r.value("tau")?;
    let tau = QuantileLevel::new(tau).map_err(|e| r.err(e.to_string()))?;
    let mut config = GbdtConfig::new(tau);
    config.max_depth = r.value("max_depth")?;
    config.min_data_in_leaf = r.value("min_data_in_leaf")?;
    config.learning_rate = r.value("learning_rate")?;
    config.num_iterations = r.value("num_iterations")?;
    config.num_leaves = r.value("num_leaves")?;
    config.early_stopping_round = r.value("early_stopping_round")?;
    config.n_bins = r.value("n_bins")?;
    let goss = r.key("goss")?;
    config.goss = match goss {
        "none" => None,
        g => {
            let mut it = g.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(r.err(format!("invalid goss '{g}'")));
            };
            Some(GossConfig {
                top_fraction: r.parse(a, "goss")?,
                rest_fraction: r.parse(b, "goss")?,
            })
        }
    };
    config.seed = r.value("seed")?;
    config.validate().map_err(|e| r.err(e.to_string()))?;
    let feature_count: usize = r.value("feature_count")?;
    let base_score: f64 = r.value("base_score")?;
    if !base_score.is_finite() {
        return Err(r.err("non-finite base_score"));
    }
    let best_iteration: usize = r.value("best_iteration")?;
    let n_trees: usize = r.value("trees")?;
    if best_iteration > n_trees {
        return Err(r.err(format!(
            "best_iteration {best_iteration} exceeds {n_trees} trees"
        )));
    }

    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let header = r.next_line()?;
        let n_nodes: usize = match header.strip_prefix("tree ") {
            Some(n) => r.parse(n.trim(), "node count")?,
            None => return Err(r.err(format!("expected 'tree N', found '{header}'"))),
        };
        if n_nodes == 0 {
            return Err(r.err("empty tree"));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            let l = r.next_line()?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.first()
                .map(|id| r.parse::<usize>(id, "node id"))
                .transpose()?
                != Some(k)
            {
                return Err(r.err(format!("expected node {k}")));
            }
            let node = match f.as_slice() {
                [_, "leaf", v] => {
                    let value: f64 = r.parse(v, "leaf value")?;
                    if !value.is_finite() {
                        return Err(r.err("non-finite leaf value"));
                    }
                    Node::Leaf { value }
                }
                [_, "split", feat, thr, left, right] => Node::Split {
                    feature: r.parse(feat, "feature")?,
                    threshold: r.parse(thr, "threshold")?,
                    left: r.parse(left, "child")?,
                    right: r.parse(right, "child")?,
                },
                _ => return Err(r.err(format!("malformed node '{l}'"))),
            };
            nodes.push(node);
        }
        let depth = check_tree(&nodes, feature_count).map_err(|m| r.err(m))?;
        trees.push(Tree { nodes, depth });
    }
    r.finish()?;
    Ok(GbdtModel {
        config,
        base_score,
        trees,
        feature_count,
        best_iteration,
    })
}
