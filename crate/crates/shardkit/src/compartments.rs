//! Recursive compartmented schemes over the extended Shamir primitive.
//!
//! A scheme is a tree: internal nodes are extended (k, r) schemes whose
//! children are tagged normal, crucial, or redundant(group); leaves name
//! shareholders. Dealing assigns each child a value (crucial offset or
//! evaluation point) and recurses with that value as the child subtree's
//! secret. Each internal node has its own evaluation-point space 1..n.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extended::{self, GroupId, HolderId, SlotKind};
use crate::field::{FieldElement, FieldSource, OpCounter, PrimeModulus};
use crate::shamir::Point;

/// Child indices from the root; the root itself is the empty path,
/// rendered `-`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodePath(Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut v = self.0.clone();
        v.push(index);
        Self(v)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text == "-" {
            return Ok(Self::root());
        }
        let indices = text
            .split('.')
            .map(|part| {
                part.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad node path {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(indices))
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeNode {
    Leaf(HolderId),
    Internal {
        k: usize,
        children: Vec<(SlotKind, SchemeNode)>,
    },
}

impl SchemeNode {
    pub fn leaf(holder: &str) -> Self {
        SchemeNode::Leaf(holder.into())
    }

    pub fn threshold(k: usize, children: Vec<(SlotKind, SchemeNode)>) -> Self {
        SchemeNode::Internal { k, children }
    }

    pub fn holders(&self) -> BTreeSet<HolderId> {
        self.leaf_specs()
            .into_iter()
            .map(|leaf| leaf.holder)
            .collect()
    }

    /// Checks every internal node's parameters against the field.
    pub fn validate(&self, modulus: PrimeModulus) -> Result<()> {
        self.validate_at(modulus, &NodePath::root())
    }

    fn validate_at(&self, modulus: PrimeModulus, path: &NodePath) -> Result<()> {
        match self {
            SchemeNode::Leaf(holder) => {
                if holder.is_empty() {
                    return Err(Error::InvalidParameters(format!(
                        "empty holder id at node {path}"
                    )));
                }
                Ok(())
            }
            SchemeNode::Internal { k, children } => {
                let kinds: Vec<SlotKind> = children.iter().map(|(t, _)| t.clone()).collect();
                extended::validate_node(*k, &kinds, modulus).map_err(|e| match e {
                    Error::InvalidParameters(msg) => {
                        Error::InvalidParameters(format!("at node {path}: {msg}"))
                    }
                    other => other,
                })?;
                for (i, (_, child)) in children.iter().enumerate() {
                    child.validate_at(modulus, &path.child(i))?;
                }
                Ok(())
            }
        }
    }

    /// All leaves with their public metadata: the edge tag into the parent,
    /// the parent-local evaluation point for non-crucial edges, and the
    /// crucial index for crucial edges. A root leaf is a degenerate scheme
    /// whose single share is the secret itself.
    pub fn leaf_specs(&self) -> Vec<LeafSpec> {
        let mut out = Vec::new();
        match self {
            SchemeNode::Leaf(holder) => out.push(LeafSpec {
                path: NodePath::root(),
                holder: holder.clone(),
                kind: SlotKind::Normal,
                x: None,
                crucial_index: None,
            }),
            SchemeNode::Internal { .. } => self.collect_leaves(&NodePath::root(), &mut out),
        }
        out
    }

    fn collect_leaves(&self, path: &NodePath, out: &mut Vec<LeafSpec>) {
        let SchemeNode::Internal { children, .. } = self else {
            return;
        };
        let slots = assign_slots(children);
        for (i, (slot, (_, child))) in slots.iter().zip(children).enumerate() {
            let child_path = path.child(i);
            match child {
                SchemeNode::Leaf(holder) => out.push(LeafSpec {
                    path: child_path,
                    holder: holder.clone(),
                    kind: slot.kind.clone(),
                    x: slot.x,
                    crucial_index: slot.crucial_index,
                }),
                SchemeNode::Internal { .. } => child.collect_leaves(&child_path, out),
            }
        }
    }

    /// Number of uniform draws dealing consumes: per internal node, its
    /// crucial offsets plus its k-1 coefficients, in pre-order.
    pub fn randomness_dimension(&self) -> usize {
        match self {
            SchemeNode::Leaf(_) => 0,
            SchemeNode::Internal { k, children } => {
                let r = children
                    .iter()
                    .filter(|(t, _)| *t == SlotKind::Crucial)
                    .count();
                r + (k - 1)
                    + children
                        .iter()
                        .map(|(_, c)| c.randomness_dimension())
                        .sum::<usize>()
            }
        }
    }

    /// Deterministic 64-bit fingerprint of the tree structure.
    pub fn scheme_id(&self) -> u64 {
        let mut hasher = Sha256::new();
        self.hash_into(&mut hasher);
        let digest = hasher.finalize();
        u64::from_be_bytes(digest[..8].try_into().unwrap())
    }

    fn hash_into(&self, hasher: &mut Sha256) {
        match self {
            SchemeNode::Leaf(holder) => {
                hasher.update([0u8]);
                hasher.update((holder.len() as u64).to_be_bytes());
                hasher.update(holder.as_bytes());
            }
            SchemeNode::Internal { k, children } => {
                hasher.update([1u8]);
                hasher.update((*k as u64).to_be_bytes());
                hasher.update((children.len() as u64).to_be_bytes());
                for (tag, child) in children {
                    match tag {
                        SlotKind::Normal => hasher.update([2u8]),
                        SlotKind::Crucial => hasher.update([3u8]),
                        SlotKind::Redundant(g) => {
                            hasher.update([4u8]);
                            hasher.update((g.len() as u64).to_be_bytes());
                            hasher.update(g.as_bytes());
                        }
                    }
                    child.hash_into(hasher);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafSpec {
    pub path: NodePath,
    pub holder: HolderId,
    pub kind: SlotKind,
    pub x: Option<u64>,
    pub crucial_index: Option<usize>,
}

/// Structural slot assignment for one internal node: evaluation points run
/// 1.. in child order, one per normal child and one per redundant group;
/// crucial children are indexed 1..=r in child order.
struct AssignedSlot {
    kind: SlotKind,
    x: Option<u64>,
    crucial_index: Option<usize>,
}

fn assign_slots(children: &[(SlotKind, SchemeNode)]) -> Vec<AssignedSlot> {
    let mut out = Vec::with_capacity(children.len());
    let mut next_x = 1u64;
    let mut group_x: BTreeMap<GroupId, u64> = BTreeMap::new();
    let mut crucial_seen = 0usize;
    for (tag, _) in children {
        let slot = match tag {
            SlotKind::Crucial => {
                crucial_seen += 1;
                AssignedSlot {
                    kind: tag.clone(),
                    x: None,
                    crucial_index: Some(crucial_seen),
                }
            }
            SlotKind::Normal => {
                let x = next_x;
                next_x += 1;
                AssignedSlot {
                    kind: tag.clone(),
                    x: Some(x),
                    crucial_index: None,
                }
            }
            SlotKind::Redundant(g) => {
                let x = *group_x.entry(g.clone()).or_insert_with(|| {
                    let x = next_x;
                    next_x += 1;
                    x
                });
                AssignedSlot {
                    kind: tag.clone(),
                    x: Some(x),
                    crucial_index: None,
                }
            }
        };
        out.push(slot);
    }
    out
}

/// One share held by one shareholder, bound to its leaf by path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShare {
    pub path: NodePath,
    pub kind: SlotKind,
    pub x: Option<u64>,
    pub value: FieldElement,
}

/// Full dealt output plus public metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareBundle {
    pub modulus: PrimeModulus,
    pub scheme_id: u64,
    pub shares: BTreeMap<HolderId, Vec<TreeShare>>,
}

impl ShareBundle {
    /// Restriction to a subset of shareholders.
    pub fn subset(&self, holders: &BTreeSet<HolderId>) -> BTreeMap<HolderId, Vec<TreeShare>> {
        self.shares
            .iter()
            .filter(|(h, _)| holders.contains(*h))
            .map(|(h, s)| (h.clone(), s.clone()))
            .collect()
    }
}

pub fn deal_tree(
    secret: FieldElement,
    root: &SchemeNode,
    source: &mut dyn FieldSource,
    counter: &mut OpCounter,
) -> Result<ShareBundle> {
    let modulus = secret.modulus();
    root.validate(modulus)?;
    let mut shares: BTreeMap<HolderId, Vec<TreeShare>> = BTreeMap::new();
    deal_node(
        secret,
        root,
        &NodePath::root(),
        source,
        counter,
        &mut shares,
    )?;
    Ok(ShareBundle {
        modulus,
        scheme_id: root.scheme_id(),
        shares,
    })
}

fn deal_node(
    secret: FieldElement,
    node: &SchemeNode,
    path: &NodePath,
    source: &mut dyn FieldSource,
    counter: &mut OpCounter,
    shares: &mut BTreeMap<HolderId, Vec<TreeShare>>,
) -> Result<()> {
    match node {
        SchemeNode::Leaf(holder) => {
            shares.entry(holder.clone()).or_default().push(TreeShare {
                path: path.clone(),
                kind: SlotKind::Normal,
                x: None,
                value: secret,
            });
            Ok(())
        }
        SchemeNode::Internal { k, children } => {
            let kinds: Vec<SlotKind> = children.iter().map(|(t, _)| t.clone()).collect();
            let dealt = extended::deal_children(secret, *k, &kinds, source, counter).map_err(
                |e| match e {
                    Error::InvalidParameters(msg) => {
                        Error::InvalidParameters(format!("at node {path}: {msg}"))
                    }
                    other => other,
                },
            )?;
            for (i, (value, (_, child))) in dealt.iter().zip(children).enumerate() {
                let child_path = path.child(i);
                match child {
                    SchemeNode::Leaf(holder) => {
                        shares.entry(holder.clone()).or_default().push(TreeShare {
                            path: child_path,
                            kind: value.kind.clone(),
                            x: value.x.map(|x| x.value()),
                            value: value.value,
                        });
                    }
                    SchemeNode::Internal { .. } => {
                        deal_node(value.value, child, &child_path, source, counter, shares)?;
                    }
                }
            }
            Ok(())
        }
    }
}

/// Bottom-up reconstruction from a subset of a dealt bundle's shares.
///
/// A child subtree that cannot be reconstructed (missing or insufficient
/// shares) simply does not contribute to its parent; hard errors such as
/// inconsistent shares propagate. The returned error names the node whose
/// requirement failed, classified at the highest failing node.
pub fn reconstruct_tree(
    subset: &BTreeMap<HolderId, Vec<TreeShare>>,
    root: &SchemeNode,
    counter: &mut OpCounter,
) -> Result<FieldElement> {
    let specs: BTreeMap<NodePath, LeafSpec> = root
        .leaf_specs()
        .into_iter()
        .map(|leaf| (leaf.path.clone(), leaf))
        .collect();
    let mut values: BTreeMap<NodePath, FieldElement> = BTreeMap::new();
    for (holder, holder_shares) in subset {
        for share in holder_shares {
            let spec = specs.get(&share.path).ok_or_else(|| {
                Error::SchemeMismatch(format!("share at unknown node path {}", share.path))
            })?;
            if spec.holder != *holder || spec.kind != share.kind || spec.x != share.x {
                return Err(Error::SchemeMismatch(format!(
                    "share metadata at path {} does not match the scheme",
                    share.path
                )));
            }
            if let Some(prev) = values.insert(share.path.clone(), share.value) {
                if prev != share.value {
                    return Err(Error::InconsistentShares {
                        path: share.path.clone(),
                    });
                }
            }
        }
    }
    solve(root, &NodePath::root(), &values, counter)
}

fn solve(
    node: &SchemeNode,
    path: &NodePath,
    values: &BTreeMap<NodePath, FieldElement>,
    counter: &mut OpCounter,
) -> Result<FieldElement> {
    match node {
        SchemeNode::Leaf(_) => values
            .get(path)
            .copied()
            .ok_or_else(|| Error::InsufficientShares { path: path.clone() }),
        SchemeNode::Internal { k, children } => {
            let slots = assign_slots(children);
            let r = slots.iter().filter(|s| s.kind == SlotKind::Crucial).count();
            let mut crucial: BTreeMap<usize, FieldElement> = BTreeMap::new();
            let mut points: Vec<Point> = Vec::new();
            for (i, (slot, (_, child))) in slots.iter().zip(children).enumerate() {
                let child_path = path.child(i);
                let value = match solve(child, &child_path, values, counter) {
                    Ok(v) => v,
                    Err(Error::CrucialShareMissing { .. })
                    | Err(Error::InsufficientShares { .. }) => continue,
                    Err(other) => return Err(other),
                };
                match &slot.kind {
                    SlotKind::Crucial => {
                        crucial.insert(slot.crucial_index.unwrap(), value);
                    }
                    SlotKind::Normal | SlotKind::Redundant(_) => {
                        let p = value.modulus();
                        points.push(Point::new(p.element(slot.x.unwrap()), value)?);
                    }
                }
            }
            extended::reconstruct_core(*k, r, &crucial, &points, counter, path)
        }
    }
}

/// Structural authorization: a leaf is satisfied iff its holder is present;
/// an internal node iff all crucial children are satisfied and satisfied
/// normal children plus distinct satisfied redundant groups reach k.
pub fn tree_authorized(subset: &BTreeSet<HolderId>, root: &SchemeNode) -> bool {
    match root {
        SchemeNode::Leaf(holder) => subset.contains(holder),
        SchemeNode::Internal { k, children } => {
            let mut satisfied_points = 0usize;
            let mut satisfied_groups: BTreeSet<&GroupId> = BTreeSet::new();
            for (tag, child) in children {
                let sat = tree_authorized(subset, child);
                match tag {
                    SlotKind::Crucial => {
                        if !sat {
                            return false;
                        }
                    }
                    SlotKind::Normal => {
                        if sat {
                            satisfied_points += 1;
                        }
                    }
                    SlotKind::Redundant(g) => {
                        if sat {
                            satisfied_groups.insert(g);
                        }
                    }
                }
            }
            satisfied_points + satisfied_groups.len() >= *k
        }
    }
}
