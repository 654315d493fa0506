//! Text format for fitted forests: config echo, training targets, then per
//! tree a node table and one membership line per leaf.
//!
//! ```text
//! quantmerge-qrf v1
//! n_trees=1
//! ...
//! targets 3
//! 0.5
//! 0
//! 2.25
//! tree 3 2
//! 0 split 1 0.75 1 2
//! 1 leaf 0
//! 2 leaf 1
//! members 0 2 0 2
//! members 1 1 1
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::config::{LeafMembership, QrfConfig};
use super::forest::{QrfModel, QrfNode, QrfTree};
use crate::error::{Error, Result};
use crate::gbdt::Lines;

pub const QRF_MAGIC: &str = "quantmerge-qrf v1";

pub fn qrf_to_string(model: &QrfModel) -> String {
    let c = &model.config;
    let mut s = String::new();
    let _ = writeln!(s, "{QRF_MAGIC}");
    let _ = writeln!(s, "n_trees={}", c.n_trees);
    let _ = writeln!(s, "mtry={}", c.mtry);
    let _ = writeln!(s, "min_node_size={}", c.min_node_size);
    let _ = writeln!(s, "seed={}", c.seed);
    let _ = writeln!(s, "membership={}", c.membership.as_str());
    let _ = writeln!(s, "bootstrap={}", c.bootstrap);
    let _ = writeln!(s, "feature_count={}", model.feature_count);
    let _ = writeln!(s, "targets {}", model.targets.len());
    for y in &model.targets {
        let _ = writeln!(s, "{y}");
    }
    for t in &model.trees {
        let _ = writeln!(s, "tree {} {}", t.nodes.len(), t.n_leaves());
        for (k, n) in t.nodes.iter().enumerate() {
            let _ = match n {
                QrfNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    writeln!(s, "{k} split {feature} {threshold} {left} {right}")
                }
                QrfNode::Leaf { leaf } => writeln!(s, "{k} leaf {leaf}"),
            };
        }
        for l in 0..t.n_leaves() {
            let m = t.leaf_members(l);
            let _ = write!(s, "members {l} {}", m.len());
            for i in m {
                let _ = write!(s, " {i}");
            }
            s.push('\n');
        }
    }
    s
}

pub fn save_qrf(model: &QrfModel, path: &Path) -> Result<()> {
    std::fs::write(path, qrf_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_qrf(path: &Path) -> Result<QrfModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    qrf_from_str(&text)
}

fn counted<'a>(r: &mut Lines<'a>, prefix: &str) -> Result<Vec<&'a str>> {
    let l = r.next_line()?;
    let mut f = l.split_whitespace();
    if f.next() != Some(prefix) {
        return Err(r.err(format!("expected '{prefix} ...', found '{l}'")));
    }
    Ok(f.collect())
}

pub fn qrf_from_str(text: &str) -> Result<QrfModel> {
    let mut r = Lines::new(text);
    r.expect(QRF_MAGIC)?;
    let mut config = QrfConfig {
        n_trees: r.value("n_trees")?,
        mtry: r.value("mtry")?,
        min_node_size: r.value("min_node_size")?,
        seed: r.value("seed")?,
        ..QrfConfig::default()
    };
    let membership = r.key("membership")?;
    config.membership = LeafMembership::parse(membership)
        .ok_or_else(|| r.err(format!("unknown membership '{membership}'")))?;
    config.bootstrap = r.value("bootstrap")?;
    let feature_count: usize = r.value("feature_count")?;
    config
        .validate(feature_count)
        .map_err(|e| r.err(e.to_string()))?;

    let n = match counted(&mut r, "targets")?.as_slice() {
        [n] => r.parse::<usize>(n, "target count")?,
        _ => return Err(r.err("expected 'targets N'")),
    };
    if n == 0 {
        return Err(r.err("no training targets"));
    }
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let l = r.next_line()?;
        let y: f64 = r.parse(l, "target")?;
        if !y.is_finite() {
            return Err(r.err("non-finite target"));
        }
        targets.push(y);
    }

    let mut trees = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        let (n_nodes, n_leaves) = match counted(&mut r, "tree")?.as_slice() {
            [a, b] => (
                r.parse::<usize>(a, "node count")?,
                r.parse::<usize>(b, "leaf count")?,
            ),
            _ => return Err(r.err("expected 'tree NODES LEAVES'")),
        };
        if n_nodes == 0 || n_leaves == 0 {
            return Err(r.err("empty tree"));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut leaf_seen = vec![false; n_leaves];
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
                [_, "leaf", id] => {
                    let leaf: usize = r.parse(id, "leaf id")?;
                    if leaf >= n_leaves || std::mem::replace(&mut leaf_seen[leaf], true) {
                        return Err(r.err(format!("bad leaf id {leaf}")));
                    }
                    QrfNode::Leaf { leaf }
                }
                [_, "split", feat, thr, left, right] => QrfNode::Split {
                    feature: r.parse(feat, "feature")?,
                    threshold: r.parse(thr, "threshold")?,
                    left: r.parse(left, "child")?,
                    right: r.parse(right, "child")?,
                },
                _ => return Err(r.err(format!("malformed node '{l}'"))),
            };
            nodes.push(node);
        }
        if leaf_seen.contains(&false) {
            return Err(r.err("leaf ids do not cover every leaf"));
        }
        check_nodes(&nodes, feature_count).map_err(|m| r.err(m))?;

        let mut leaves = Vec::with_capacity(n_leaves);
        for l in 0..n_leaves {
            let f = counted(&mut r, "members")?;
            if f.len() < 2 || r.parse::<usize>(f[0], "leaf id")? != l {
                return Err(r.err(format!("expected members of leaf {l}")));
            }
            let count: usize = r.parse(f[1], "member count")?;
            if count == 0 || f.len() != count + 2 {
                return Err(r.err(format!(
                    "leaf {l} lists {} members, header says {count}",
                    f.len() - 2
                )));
            }
            let mut m = Vec::with_capacity(count);
            for s in &f[2..] {
                let i: u32 = r.parse(s, "member")?;
                if i as usize >= n {
                    return Err(r.err(format!("member {i} out of range")));
                }
                m.push(i);
            }
            leaves.push(m);
        }
        trees.push(QrfTree::from_parts(nodes, &leaves));
    }
    r.finish()?;
    Ok(QrfModel {
        config,
        trees,
        targets,
        feature_count,
    })
}

fn check_nodes(nodes: &[QrfNode], n_features: usize) -> std::result::Result<(), String> {
    use crate::gbdt::Node;
    let mapped: Vec<Node> = nodes
        .iter()
        .map(|n| match *n {
            QrfNode::Split {
                feature,
                threshold,
                left,
                right,
            } => Node::Split {
                feature,
                threshold,
                left,
                right,
            },
            QrfNode::Leaf { .. } => Node::Leaf { value: 0.0 },
        })
        .collect();
    crate::gbdt::check_tree(&mapped, n_features).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Dataset, FeatureMatrix};
    use crate::qrf::fit_qrf;

    #[test]
    fn round_trip_is_exact() {
        let rows: Vec<[f64; 3]> = (0..80)
            .map(|i| [(i % 9) as f64 * 0.1, ((i * 7) % 11) as f64 / 3.0, i as f64])
            .collect();
        let y: Vec<f64> = (0..80).map(|i| ((i * 13) % 17) as f64 / 7.0).collect();
        let d = Dataset::new(FeatureMatrix::from_rows(&rows).unwrap(), y).unwrap();
        let c = QrfConfig {
            n_trees: 3,
            mtry: 2,
            membership: LeafMembership::InBag,
            ..QrfConfig::default()
        };
        let m = fit_qrf(&d, &c).unwrap();
        let back = qrf_from_str(&qrf_to_string(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_corruption() {
        let d = Dataset::new(
            FeatureMatrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap(),
            vec![0.0, 0.0, 5.0, 5.0],
        )
        .unwrap();
        let c = QrfConfig {
            n_trees: 1,
            mtry: 1,
            min_node_size: 1,
            bootstrap: false,
            ..QrfConfig::default()
        };
        let text = qrf_to_string(&fit_qrf(&d, &c).unwrap());
        assert!(qrf_from_str(&text).is_ok());
        assert!(qrf_from_str(&text.replace("members 0 2 0 1", "members 0 2 0 9")).is_err());
        assert!(qrf_from_str(&text.replace("membership=full", "membership=oob")).is_err());
        assert!(qrf_from_str(&text.replace("targets 4", "targets 5")).is_err());
        assert!(qrf_from_str(&text[..text.len() - 10]).is_err());
    }
}
