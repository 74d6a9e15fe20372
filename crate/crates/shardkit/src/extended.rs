//! Shamir dealing extended with crucial and mutual redundant shares.
//!
//! A scheme is parameterized by (k, r): k distinct evaluation points are
//! required and r crucial offsets exist. The polynomial has degree k-1 and
//! constant S' = S + R_1 + ... + R_r; reconstruction interpolates S' from k
//! points and subtracts the offsets. Members of a redundant group hold copies
//! of one evaluation point, so any number of them contributes one point.
//!
//! In classic terms the effective threshold is t = k + r: every crucial
//! holder plus k point holders must participate. Complexity bounds in the
//! test suite are stated with t = k + r.

use std::collections::{BTreeMap, BTreeSet};

use crate::compartments::NodePath;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSource, OpCounter, PrimeModulus};
use crate::shamir::{self, Point, PolynomialSpec};

pub type HolderId = String;
pub type GroupId = String;

/// Role of one slot (or compartment-tree child).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    Normal,
    Crucial,
    Redundant(GroupId),
}

/// One shareholder position in a flat extended scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSlot {
    pub holder: HolderId,
    pub kind: SlotKind,
}

impl ShareSlot {
    pub fn normal(holder: &str) -> Self {
        Self {
            holder: holder.into(),
            kind: SlotKind::Normal,
        }
    }

    pub fn crucial(holder: &str) -> Self {
        Self {
            holder: holder.into(),
            kind: SlotKind::Crucial,
        }
    }

    pub fn redundant(holder: &str, group: &str) -> Self {
        Self {
            holder: holder.into(),
            kind: SlotKind::Redundant(group.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedParams {
    k: usize,
    modulus: PrimeModulus,
    slots: Vec<ShareSlot>,
}

impl ExtendedParams {
    pub fn new(k: usize, modulus: PrimeModulus, slots: Vec<ShareSlot>) -> Result<Self> {
        let kinds: Vec<SlotKind> = slots.iter().map(|s| s.kind.clone()).collect();
        validate_node(k, &kinds, modulus)?;
        Ok(Self { k, modulus, slots })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of crucial slots.
    pub fn r(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| s.kind == SlotKind::Crucial)
            .count()
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn slots(&self) -> &[ShareSlot] {
        &self.slots
    }

    /// Number of distinct evaluation points issued.
    pub fn distinct_points(&self) -> usize {
        distinct_points(
            &self
                .slots
                .iter()
                .map(|s| s.kind.clone())
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SharePayload {
    /// Additive offset R_i; indexed 1..=r in public metadata.
    Crucial { index: usize, value: FieldElement },
    /// Evaluation point; redundant copies carry their group id.
    Point {
        x: FieldElement,
        y: FieldElement,
        group: Option<GroupId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedShare {
    pub holder: HolderId,
    pub payload: SharePayload,
}

fn distinct_points(kinds: &[SlotKind]) -> usize {
    let mut groups = BTreeSet::new();
    let mut normals = 0usize;
    for k in kinds {
        match k {
            SlotKind::Normal => normals += 1,
            SlotKind::Redundant(g) => {
                groups.insert(g.clone());
            }
            SlotKind::Crucial => {}
        }
    }
    normals + groups.len()
}

/// Shared validation for a flat scheme or one compartment-tree node.
pub(crate) fn validate_node(k: usize, kinds: &[SlotKind], modulus: PrimeModulus) -> Result<()> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameters("scheme with no slots".into()));
    }
    let d = distinct_points(kinds);
    if d == 0 {
        // All-crucial schemes are rejected; plain additive sharing covers them.
        return Err(Error::InvalidParameters(
            "scheme with only crucial shares; use additive sharing instead".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidParameters("threshold k = 0".into()));
    }
    if d < k {
        return Err(Error::InvalidParameters(format!(
            "threshold k = {k} exceeds the {d} distinct evaluation points issued"
        )));
    }
    if d as u64 >= modulus.value() {
        return Err(Error::InvalidParameters(format!(
            "{d} distinct evaluation points do not fit GF({})",
            modulus.value()
        )));
    }
    let mut group_sizes: BTreeMap<&GroupId, usize> = BTreeMap::new();
    for kind in kinds {
        if let SlotKind::Redundant(g) = kind {
            *group_sizes.entry(g).or_default() += 1;
        }
    }
    for (g, size) in group_sizes {
        if size < 2 {
            return Err(Error::InvalidParameters(format!(
                "redundant group {g} has a single member; use a normal share"
            )));
        }
    }
    Ok(())
}

/// Value assigned to one slot by the dealer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DealtChild {
    pub kind: SlotKind,
    pub crucial_index: Option<usize>,
    pub x: Option<FieldElement>,
    pub value: FieldElement,
}

/// Core dealing over slot kinds; also drives compartment-tree nodes.
///
/// Draw order is fixed: the r crucial offsets first (in slot order), then the
/// k-1 coefficients. Evaluation points are assigned sequentially from 1, one
/// per normal slot and one per redundant group (first occurrence).
pub(crate) fn deal_children(
    secret: FieldElement,
    k: usize,
    kinds: &[SlotKind],
    source: &mut dyn FieldSource,
    counter: &mut OpCounter,
) -> Result<Vec<DealtChild>> {
    let p = secret.modulus();
    validate_node(k, kinds, p)?;
    let crucial_values: Vec<FieldElement> = kinds
        .iter()
        .filter(|kd| **kd == SlotKind::Crucial)
        .map(|_| source.draw(p))
        .collect();
    let coefficients: Vec<FieldElement> = (1..k).map(|_| source.draw(p)).collect();
    let mut shifted = secret;
    for &r in &crucial_values {
        shifted = shifted.add(r)?;
    }
    let poly = PolynomialSpec::new(shifted, coefficients)?;

    let mut out = Vec::with_capacity(kinds.len());
    let mut next_x = 1u64;
    let mut group_points: BTreeMap<GroupId, (FieldElement, FieldElement)> = BTreeMap::new();
    let mut crucial_seen = 0usize;
    for kind in kinds {
        let child = match kind {
            SlotKind::Crucial => {
                let value = crucial_values[crucial_seen];
                crucial_seen += 1;
                DealtChild {
                    kind: kind.clone(),
                    crucial_index: Some(crucial_seen),
                    x: None,
                    value,
                }
            }
            SlotKind::Normal => {
                let x = p.element(next_x);
                next_x += 1;
                DealtChild {
                    kind: kind.clone(),
                    crucial_index: None,
                    x: Some(x),
                    value: poly.evaluate(x, counter)?,
                }
            }
            SlotKind::Redundant(g) => {
                let (x, y) = match group_points.get(g) {
                    Some(&xy) => xy,
                    None => {
                        let x = p.element(next_x);
                        next_x += 1;
                        let y = poly.evaluate(x, counter)?;
                        group_points.insert(g.clone(), (x, y));
                        (x, y)
                    }
                };
                DealtChild {
                    kind: kind.clone(),
                    crucial_index: None,
                    x: Some(x),
                    value: y,
                }
            }
        };
        out.push(child);
    }
    Ok(out)
}

/// Deals one share per slot.
pub fn deal_extended(
    secret: FieldElement,
    params: &ExtendedParams,
    source: &mut dyn FieldSource,
    counter: &mut OpCounter,
) -> Result<Vec<ExtendedShare>> {
    if secret.modulus() != params.modulus() {
        return Err(Error::ModulusMismatch);
    }
    let kinds: Vec<SlotKind> = params.slots().iter().map(|s| s.kind.clone()).collect();
    let dealt = deal_children(secret, params.k(), &kinds, source, counter)?;
    Ok(params
        .slots()
        .iter()
        .zip(dealt)
        .map(|(slot, d)| ExtendedShare {
            holder: slot.holder.clone(),
            payload: match d.kind {
                SlotKind::Crucial => SharePayload::Crucial {
                    index: d.crucial_index.unwrap(),
                    value: d.value,
                },
                SlotKind::Normal => SharePayload::Point {
                    x: d.x.unwrap(),
                    y: d.value,
                    group: None,
                },
                SlotKind::Redundant(g) => SharePayload::Point {
                    x: d.x.unwrap(),
                    y: d.value,
                    group: Some(g),
                },
            },
        })
        .collect())
}

/// Shared reconstruction core: checks all r crucial offsets are present,
/// interpolates S' from k distinct points, subtracts the offsets.
pub(crate) fn reconstruct_core(
    k: usize,
    r: usize,
    crucial: &BTreeMap<usize, FieldElement>,
    points: &[Point],
    counter: &mut OpCounter,
    path: &NodePath,
) -> Result<FieldElement> {
    for index in 1..=r {
        if !crucial.contains_key(&index) {
            return Err(Error::CrucialShareMissing { path: path.clone() });
        }
    }
    let at = |e: Error| match e {
        Error::InconsistentShares { .. } => Error::InconsistentShares { path: path.clone() },
        Error::InsufficientShares { .. } => Error::InsufficientShares { path: path.clone() },
        other => other,
    };
    let distinct = shamir::dedup_points(points).map_err(at)?;
    if distinct.len() < k {
        return Err(Error::InsufficientShares { path: path.clone() });
    }
    let base = &distinct[..k];
    let mut secret = shamir::lagrange_constant(base, counter)?;
    if distinct.len() > k {
        let mut scratch = OpCounter::new();
        for extra in &distinct[k..] {
            let mut subset: Vec<Point> = base[..k - 1].to_vec();
            subset.push(*extra);
            if shamir::lagrange_constant(&subset, &mut scratch)? != secret {
                return Err(Error::InconsistentShares { path: path.clone() });
            }
        }
    }
    for value in crucial.values() {
        secret = secret.sub(*value)?;
    }
    Ok(secret)
}

/// Recovers the secret from a subset of dealt shares.
pub fn reconstruct_extended(
    shares: &[ExtendedShare],
    params: &ExtendedParams,
    counter: &mut OpCounter,
) -> Result<FieldElement> {
    let root = NodePath::root();
    let mut crucial: BTreeMap<usize, FieldElement> = BTreeMap::new();
    let mut points: Vec<Point> = Vec::new();
    for share in shares {
        match &share.payload {
            SharePayload::Crucial { index, value } => {
                if let Some(prev) = crucial.insert(*index, *value) {
                    if prev != *value {
                        return Err(Error::InconsistentShares { path: root.clone() });
                    }
                }
            }
            SharePayload::Point { x, y, .. } => points.push(Point::new(*x, *y)?),
        }
    }
    reconstruct_core(params.k(), params.r(), &crucial, &points, counter, &root)
}

/// Structural authorization predicate over the kinds of held slots.
/// Agrees with [`reconstruct_extended`] success on subsets of a dealt bundle.
pub fn authorized_extended(kinds_held: &[SlotKind], params: &ExtendedParams) -> bool {
    let crucial_held = kinds_held
        .iter()
        .filter(|k| **k == SlotKind::Crucial)
        .count();
    crucial_held >= params.r() && distinct_points(kinds_held) >= params.k()
}
