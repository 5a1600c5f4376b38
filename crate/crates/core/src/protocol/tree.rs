use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::states::ProductStateSet;

/// Result of one local measurement: one of the projector candidates, or the
/// completion `I - sum |psi><psi|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Candidate(usize),
    Rest,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Candidate(i) => write!(f, "{i}"),
            Outcome::Rest => f.write_str("REST"),
        }
    }
}

impl std::str::FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "REST" {
            return Ok(Outcome::Rest);
        }
        s.parse()
            .map(Outcome::Candidate)
            .map_err(|_| Error::InvalidTree(format!("outcome label {s:?} is neither an index nor REST")))
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Outcome::Candidate(i) => s.serialize_u64(*i as u64),
            Outcome::Rest => s.serialize_str("REST"),
        }
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Label(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(i) => Ok(Outcome::Candidate(i)),
            Raw::Label(s) => s.parse().map_err(D::Error::custom),
        }
    }
}

/// Projective measurement `{|psi_n^j><psi_n^j|}_{n in projectors}` plus its
/// completion, on subsystem `subsystem` of copy `copy` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub copy: usize,
    pub subsystem: usize,
    pub projectors: Vec<usize>,
}

impl MeasurementSpec {
    /// Outcome labels in order: projectors, then REST.
    pub fn outcomes(&self) -> Vec<Outcome> {
        self.projectors
            .iter()
            .map(|&i| Outcome::Candidate(i))
            .chain([Outcome::Rest])
            .collect()
    }

    /// Projector vectors must be pairwise orthogonal within `zero_tol`.
    pub fn check(&self, s: &ProductStateSet) -> Result<()> {
        if self.subsystem >= s.parties() {
            return Err(Error::InvalidMeasurement(format!(
                "subsystem {} out of range for {} parties",
                self.subsystem,
                s.parties()
            )));
        }
        if self.projectors.is_empty() {
            return Err(Error::InvalidMeasurement("empty projector list".into()));
        }
        for (a, &u) in self.projectors.iter().enumerate() {
            if u >= s.len() {
                return Err(Error::InvalidMeasurement(format!("projector index {u} out of range")));
            }
            for &v in &self.projectors[a + 1..] {
                if u == v {
                    return Err(Error::InvalidMeasurement(format!("projector {u} listed twice")));
                }
                let m = s.overlap(u, v, self.subsystem).norm();
                if m > s.zero_tol() {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors {u} and {v} overlap by {m:e} in subsystem {}",
                        self.subsystem
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Adaptive decision tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Measure {
        spec: MeasurementSpec,
        /// One child per outcome, in [`MeasurementSpec::outcomes`] order.
        children: Vec<Node>,
    },
    Leaf {
        survivors: Vec<usize>,
        /// Follow-up stage in a multi-copy strategy.
        next: Option<usize>,
    },
}

impl Node {
    pub fn leaf(survivors: Vec<usize>) -> Self {
        Node::Leaf { survivors, next: None }
    }

    pub fn child(&self, outcome: Outcome) -> Option<&Node> {
        match self {
            Node::Measure { spec, children } => {
                let idx = match outcome {
                    Outcome::Rest => spec.projectors.len(),
                    Outcome::Candidate(i) => spec.projectors.iter().position(|&p| p == i)?,
                };
                children.get(idx)
            }
            Node::Leaf { .. } => None,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Measure { children, .. } => 1 + children.iter().map(Node::node_count).sum::<usize>(),
            Node::Leaf { .. } => 1,
        }
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            match n {
                Node::Measure { children, .. } => stack.extend(children.iter().rev()),
                Node::Leaf { .. } => out.push(n),
            }
        }
        out
    }

    pub fn max_copy(&self) -> usize {
        match self {
            Node::Measure { spec, children } => children.iter().map(Node::max_copy).fold(spec.copy, usize::max),
            Node::Leaf { .. } => 0,
        }
    }

    /// Per-path rules: (copy, subsystem) pairs distinct, copies
    /// non-decreasing, one child per outcome, projectors drawn from
    /// `candidates`, and (with `s`) projector orthogonality.
    pub fn check_structure(&self, candidates: &[usize], s: Option<&ProductStateSet>) -> Result<()> {
        let allowed: HashSet<usize> = candidates.iter().copied().collect();
        self.check_path(&allowed, s, &mut Vec::new())
    }

    fn check_path(
        &self,
        allowed: &HashSet<usize>,
        s: Option<&ProductStateSet>,
        path: &mut Vec<(usize, usize)>,
    ) -> Result<()> {
        match self {
            Node::Leaf { survivors, .. } => {
                if let Some(x) = survivors.iter().find(|x| !allowed.contains(x)) {
                    return Err(Error::InvalidTree(format!("leaf survivor {x} is not a candidate")));
                }
                Ok(())
            }
            Node::Measure { spec, children } => {
                if spec.copy == 0 {
                    return Err(Error::InvalidTree("copy indices start at 1".into()));
                }
                if let Some(&(c, _)) = path.last() {
                    if spec.copy < c {
                        return Err(Error::InvalidTree(format!("copy {} follows copy {c}", spec.copy)));
                    }
                }
                if path.contains(&(spec.copy, spec.subsystem)) {
                    return Err(Error::InvalidTree(format!(
                        "subsystem {} of copy {} measured twice on one path",
                        spec.subsystem, spec.copy
                    )));
                }
                if children.len() != spec.projectors.len() + 1 {
                    return Err(Error::InvalidTree(format!(
                        "measurement with {} projectors has {} children",
                        spec.projectors.len(),
                        children.len()
                    )));
                }
                if let Some(x) = spec.projectors.iter().find(|x| !allowed.contains(x)) {
                    return Err(Error::InvalidTree(format!("projector {x} is not a candidate")));
                }
                if let Some(s) = s {
                    spec.check(s).map_err(|e| Error::InvalidTree(e.to_string()))?;
                }
                path.push((spec.copy, spec.subsystem));
                for c in children {
                    c.check_path(allowed, s, path)?;
                }
                path.pop();
                Ok(())
            }
        }
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Node::Leaf { survivors, next } => {
                let mut m = s.serialize_map(Some(1 + usize::from(next.is_some())))?;
                m.serialize_entry("survivors", survivors)?;
                if let Some(n) = next {
                    m.serialize_entry("next", n)?;
                }
                m.end()
            }
            Node::Measure { spec, children } => {
                struct Children<'a>(&'a MeasurementSpec, &'a [Node]);
                impl Serialize for Children<'_> {
                    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                        let mut m = s.serialize_map(Some(self.1.len()))?;
                        for (o, c) in self.0.outcomes().iter().zip(self.1) {
                            m.serialize_entry(&o.to_string(), c)?;
                        }
                        m.end()
                    }
                }
                let mut m = s.serialize_map(Some(4))?;
                m.serialize_entry("copy", &spec.copy)?;
                m.serialize_entry("subsystem", &spec.subsystem)?;
                m.serialize_entry("projectors", &spec.projectors)?;
                m.serialize_entry("children", &Children(spec, children))?;
                m.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNode {
    Measure {
        copy: usize,
        subsystem: usize,
        projectors: Vec<usize>,
        children: BTreeMap<String, RawNode>,
    },
    Leaf {
        survivors: Vec<usize>,
        #[serde(default)]
        next: Option<usize>,
    },
}

impl TryFrom<RawNode> for Node {
    type Error = Error;

    fn try_from(raw: RawNode) -> Result<Self> {
        match raw {
            RawNode::Leaf { survivors, next } => Ok(Node::Leaf { survivors, next }),
            RawNode::Measure {
                copy,
                subsystem,
                projectors,
                mut children,
            } => {
                let spec = MeasurementSpec {
                    copy,
                    subsystem,
                    projectors,
                };
                let mut ordered = Vec::with_capacity(spec.projectors.len() + 1);
                for o in spec.outcomes() {
                    let child = children
                        .remove(&o.to_string())
                        .ok_or_else(|| Error::InvalidTree(format!("missing child for outcome {o}")))?;
                    ordered.push(Node::try_from(child)?);
                }
                if let Some(extra) = children.keys().next() {
                    return Err(Error::InvalidTree(format!("child {extra:?} matches no outcome")));
                }
                Ok(Node::Measure {
                    spec,
                    children: ordered,
                })
            }
        }
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Node::try_from(RawNode::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Exclude(usize),
    Identify,
}

/// Adaptive measurement tree over a candidate set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTree {
    pub candidates: Vec<usize>,
    pub target: Target,
    pub copies_used: usize,
    pub root: Node,
}

impl ProtocolTree {
    pub fn check_structure(&self, s: Option<&ProductStateSet>) -> Result<()> {
        if let Some(s) = s {
            if let Some(x) = self.candidates.iter().find(|&&x| x >= s.len()) {
                return Err(Error::InvalidTree(format!(
                    "candidate {x} out of range for {} states",
                    s.len()
                )));
            }
        }
        self.root.check_structure(&self.candidates, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ProtocolTree {
        ProtocolTree {
            candidates: vec![0, 1, 2],
            target: Target::Exclude(2),
            copies_used: 1,
            root: Node::Measure {
                spec: MeasurementSpec {
                    copy: 1,
                    subsystem: 0,
                    projectors: vec![0, 2],
                },
                children: vec![Node::leaf(vec![0]), Node::leaf(vec![2]), Node::leaf(vec![1])],
            },
        }
    }

    #[test]
    fn json_shape() {
        let t = sample();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["target"], serde_json::json!({"exclude": 2}));
        assert_eq!(v["root"]["children"]["REST"], serde_json::json!({"survivors": [1]}));
        assert_eq!(v["root"]["children"]["2"], serde_json::json!({"survivors": [2]}));
        let back: ProtocolTree = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn missing_child_rejected() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["root"]["children"].as_object_mut().unwrap().remove("REST");
        assert!(serde_json::from_value::<ProtocolTree>(v).is_err());
    }

    #[test]
    fn repeated_subsystem_rejected() {
        let mut t = sample();
        let inner = t.root.clone();
        if let Node::Measure { children, .. } = &mut t.root {
            children[0] = inner;
        }
        assert!(matches!(t.check_structure(None), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn decreasing_copy_rejected() {
        let mut t = sample();
        let mut inner = t.root.clone();
        if let Node::Measure { spec, .. } = &mut inner {
            spec.subsystem = 1;
        }
        if let Node::Measure { spec, children } = &mut t.root {
            spec.copy = 2;
            children[0] = inner;
        }
        assert!(t.check_structure(None).is_err());
    }

    #[test]
    fn outcome_labels() {
        assert_eq!("REST".parse::<Outcome>().unwrap(), Outcome::Rest);
        assert_eq!("7".parse::<Outcome>().unwrap(), Outcome::Candidate(7));
        assert!("x".parse::<Outcome>().is_err());
        assert_eq!(serde_json::to_string(&Outcome::Rest).unwrap(), "\"REST\"");
    }
}
