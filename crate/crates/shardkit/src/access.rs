//! Monotone access formulas, exhaustive scheme/formula equivalence checking,
//! brute-force perfectness verification, share-count comparisons, and a
//! formula-to-scheme compiler with flattenability detection.
//!
//! Everything here enumerates: universes are capped at 20 shareholders and
//! the perfectness enumerator walks the dealer's full randomness space, so
//! all verdicts are exact.

use std::collections::{BTreeMap, BTreeSet};

use crate::compartments::{deal_tree, tree_authorized, SchemeNode, TreeShare};
use crate::error::{Error, Result};
use crate::extended::{HolderId, SlotKind};
use crate::field::{FieldElement, FieldSource, OpCounter, TapeSource};

/// Largest universe the exhaustive operations accept.
pub const ENUMERATION_LIMIT: usize = 20;

/// Largest dealer-randomness state space the perfectness enumerator walks.
pub const STATE_SPACE_LIMIT: u64 = 10_000_000;

/// Monotone boolean formula over shareholder ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccessFormula {
    Literal(HolderId),
    And(Vec<AccessFormula>),
    Or(Vec<AccessFormula>),
    Threshold(usize, Vec<AccessFormula>),
}

impl AccessFormula {
    pub fn literal(id: &str) -> Self {
        AccessFormula::Literal(id.into())
    }

    pub fn and(children: Vec<AccessFormula>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::InvalidParameters("and needs >= 2 children".into()));
        }
        Ok(AccessFormula::And(children))
    }

    pub fn or(children: Vec<AccessFormula>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::InvalidParameters("or needs >= 2 children".into()));
        }
        Ok(AccessFormula::Or(children))
    }

    pub fn threshold(k: usize, children: Vec<AccessFormula>) -> Result<Self> {
        if k == 0 || k > children.len() || children.is_empty() {
            return Err(Error::InvalidParameters(format!(
                "threshold {k} over {} children",
                children.len()
            )));
        }
        Ok(AccessFormula::Threshold(k, children))
    }

    pub fn ids(&self) -> BTreeSet<HolderId> {
        let mut out = BTreeSet::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids(&self, out: &mut BTreeSet<HolderId>) {
        match self {
            AccessFormula::Literal(id) => {
                out.insert(id.clone());
            }
            AccessFormula::And(cs) | AccessFormula::Or(cs) | AccessFormula::Threshold(_, cs) => {
                for c in cs {
                    c.collect_ids(out);
                }
            }
        }
    }
}

/// Standard monotone evaluation; Threshold(k, cs) is true iff at least k
/// children are true.
pub fn evaluate_formula(f: &AccessFormula, subset: &BTreeSet<HolderId>) -> bool {
    match f {
        AccessFormula::Literal(id) => subset.contains(id),
        AccessFormula::And(cs) => cs.iter().all(|c| evaluate_formula(c, subset)),
        AccessFormula::Or(cs) => cs.iter().any(|c| evaluate_formula(c, subset)),
        AccessFormula::Threshold(k, cs) => {
            cs.iter().filter(|c| evaluate_formula(c, subset)).count() >= *k
        }
    }
}

/// Antichain of minimal authorized subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalClauseSet {
    pub clauses: BTreeSet<BTreeSet<HolderId>>,
}

fn check_universe(universe: &BTreeSet<HolderId>) -> Result<Vec<HolderId>> {
    if universe.len() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit(format!(
            "universe of {} ids exceeds the limit of {ENUMERATION_LIMIT}",
            universe.len()
        )));
    }
    Ok(universe.iter().cloned().collect())
}

fn mask_subset(ids: &[HolderId], mask: u32) -> BTreeSet<HolderId> {
    (0..ids.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| ids[i].clone())
        .collect()
}

/// Enumerates all subsets of the universe and keeps the minimal authorized
/// ones. A subset is minimal iff it is authorized and dropping any single
/// member deauthorizes it (sufficient by monotonicity).
pub fn minimal_clauses(
    f: &AccessFormula,
    universe: &BTreeSet<HolderId>,
) -> Result<MinimalClauseSet> {
    let ids = check_universe(universe)?;
    let mut clauses = BTreeSet::new();
    for mask in 0u32..(1u32 << ids.len()) {
        let subset = mask_subset(&ids, mask);
        if !evaluate_formula(f, &subset) {
            continue;
        }
        let minimal = subset.iter().all(|drop| {
            let mut smaller = subset.clone();
            smaller.remove(drop);
            !evaluate_formula(f, &smaller)
        });
        if minimal {
            clauses.insert(subset);
        }
    }
    Ok(MinimalClauseSet { clauses })
}

/// Exhaustively compares scheme authorization with formula evaluation over
/// every subset of the universe; returns the first differing subset if any.
pub fn verify_equivalence(
    scheme: &SchemeNode,
    f: &AccessFormula,
    universe: &BTreeSet<HolderId>,
) -> Result<Option<BTreeSet<HolderId>>> {
    let ids = check_universe(universe)?;
    if !scheme.holders().is_subset(universe) || !f.ids().is_subset(universe) {
        return Err(Error::InvalidParameters(
            "universe does not cover all scheme holders and formula ids".into(),
        ));
    }
    for mask in 0u32..(1u32 << ids.len()) {
        let subset = mask_subset(&ids, mask);
        if tree_authorized(&subset, scheme) != evaluate_formula(f, &subset) {
            return Ok(Some(subset));
        }
    }
    Ok(None)
}

/// Share counts for naive clause-per-clause dealing and for the factored
/// variant that splits off the ids common to every clause.
pub fn naive_share_counts(clauses: &MinimalClauseSet) -> Result<(usize, usize)> {
    if clauses.clauses.is_empty() {
        return Err(Error::InvalidParameters("empty clause set".into()));
    }
    let per_clause_total: usize = clauses.clauses.iter().map(|c| c.len()).sum();
    let core = clause_core(clauses);
    let residual_total: usize = clauses.clauses.iter().map(|c| c.len() - core.len()).sum();
    let factored_total = if residual_total == 0 {
        // a single clause cannot be factored
        core.len()
    } else {
        core.len() + residual_total
    };
    Ok((per_clause_total, factored_total))
}

fn clause_core(clauses: &MinimalClauseSet) -> BTreeSet<HolderId> {
    let mut iter = clauses.clauses.iter();
    let mut core = iter.next().cloned().unwrap_or_default();
    for clause in iter {
        core = core.intersection(clause).cloned().collect();
    }
    core
}

/// Counts how often each candidate secret is consistent with the shares the
/// subset observed, over the dealer's entire randomness space.
///
/// The source deals the observed bundle once; the enumeration then replays
/// every (candidate secret, randomness assignment) pair and counts exact
/// matches of the subset's shares. An unauthorized subset of a perfect scheme
/// yields an exactly uniform vector; an authorized one a point mass.
pub fn perfectness_check(
    root: &SchemeNode,
    secret: FieldElement,
    subset: &BTreeSet<HolderId>,
    source: &mut dyn FieldSource,
) -> Result<Vec<u64>> {
    let p = secret.modulus().value();
    if p > 13 {
        return Err(Error::InvalidParameters(format!(
            "perfectness enumeration requires p <= 13, got {p}"
        )));
    }
    let dim = root.randomness_dimension();
    let states = (p as f64).powi(dim as i32);
    if states > STATE_SPACE_LIMIT as f64 {
        return Err(Error::StateSpaceTooLarge(format!(
            "{p}^{dim} randomness assignments exceed {STATE_SPACE_LIMIT}"
        )));
    }
    let mut counter = OpCounter::new();
    let observed_bundle = deal_tree(secret, root, source, &mut counter)?;
    let observed = restrict(&observed_bundle.shares, subset);

    let modulus = secret.modulus();
    let mut counts = vec![0u64; p as usize];
    let mut digits = vec![0u64; dim];
    loop {
        for candidate in 0..p {
            let mut tape = TapeSource::new(digits.clone());
            let bundle = deal_tree(modulus.element(candidate), root, &mut tape, &mut counter)?;
            if restrict(&bundle.shares, subset) == observed {
                counts[candidate as usize] += 1;
            }
        }
        // odometer over GF(p)^dim
        let mut i = 0;
        loop {
            if i == dim {
                return Ok(counts);
            }
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn restrict(
    shares: &BTreeMap<HolderId, Vec<TreeShare>>,
    subset: &BTreeSet<HolderId>,
) -> Vec<(HolderId, TreeShare)> {
    let mut out = Vec::new();
    for (holder, holder_shares) in shares {
        if subset.contains(holder) {
            for s in holder_shares {
                out.push((holder.clone(), s.clone()));
            }
        }
    }
    out
}

/// Output of [`compile_formula`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileReport {
    pub scheme: SchemeNode,
    pub flattened: bool,
    pub ideal: bool,
    pub total_shares: usize,
    pub max_shares_per_holder: usize,
}

/// Compiles a monotone formula to a scheme, preferring a single flattened
/// extended level when the access structure admits one.
///
/// Pipeline: minimal clauses; ids present in every clause become crucial;
/// residual ids merge into redundant groups where no clause holds two of them
/// and swapping them leaves the clause set unchanged (greedy, lexicographic);
/// if the collapsed residual clauses are exactly all k-subsets of the
/// collapsed symbols, a flat (k, r) scheme results. Otherwise the formula is
/// lowered to a compartment tree (and -> (n,n), or -> (1,n), thr -> (k,n)).
/// The result is always re-verified against the formula before return.
pub fn compile_formula(f: &AccessFormula, universe: &BTreeSet<HolderId>) -> Result<CompileReport> {
    check_universe(universe)?;
    if !f.ids().is_subset(universe) {
        return Err(Error::InvalidParameters(
            "universe does not cover all formula ids".into(),
        ));
    }
    let clauses = minimal_clauses(f, universe)?;
    if clauses.clauses.is_empty() {
        return Err(Error::InvalidParameters(
            "formula authorizes no subset of the universe".into(),
        ));
    }

    let scheme_and_flattened = flatten(&clauses);
    let (scheme, flattened) = match scheme_and_flattened {
        Some(scheme) => (scheme, true),
        None => (lower_to_tree(f), false),
    };

    let mut per_holder: BTreeMap<HolderId, usize> = BTreeMap::new();
    for leaf in scheme.leaf_specs() {
        *per_holder.entry(leaf.holder).or_default() += 1;
    }
    let total_shares: usize = per_holder.values().sum();
    let max_shares_per_holder = per_holder.values().copied().max().unwrap_or(0);
    let report = CompileReport {
        ideal: max_shares_per_holder == 1,
        flattened,
        total_shares,
        max_shares_per_holder,
        scheme,
    };

    if let Some(cx) = verify_equivalence(&report.scheme, f, universe)? {
        let ids: Vec<HolderId> = cx.into_iter().collect();
        return Err(Error::CompilerProducedWrongScheme(ids.join(",")));
    }
    Ok(report)
}

/// Attempts the single-level construction; None when the clause set is not
/// flattenable.
fn flatten(clauses: &MinimalClauseSet) -> Option<SchemeNode> {
    let core = clause_core(clauses);
    let residual: BTreeSet<BTreeSet<HolderId>> = clauses
        .clauses
        .iter()
        .map(|c| c.difference(&core).cloned().collect::<BTreeSet<_>>())
        .collect();

    if residual.len() == 1 && residual.iter().next().unwrap().is_empty() {
        // single clause: everyone in it is required
        let members: Vec<HolderId> = core.iter().cloned().collect();
        let children = members
            .iter()
            .map(|h| (SlotKind::Normal, SchemeNode::Leaf(h.clone())))
            .collect();
        return Some(SchemeNode::Internal {
            k: members.len(),
            children,
        });
    }

    let groups = merge_redundant_groups(&residual);
    let rep: BTreeMap<&HolderId, &HolderId> = groups
        .iter()
        .flat_map(|g| g.iter().map(move |m| (m, &g[0])))
        .collect();
    let collapsed: BTreeSet<BTreeSet<HolderId>> = residual
        .iter()
        .map(|c| c.iter().map(|id| rep[id].clone()).collect())
        .collect();

    let k = collapsed.iter().next().map(|c| c.len())?;
    if k == 0 || collapsed.iter().any(|c| c.len() != k) {
        return None;
    }
    let symbols: Vec<HolderId> = groups.iter().map(|g| g[0].clone()).collect();
    if collapsed != k_subsets(&symbols, k) {
        return None;
    }

    let mut children: Vec<(SlotKind, SchemeNode)> = core
        .iter()
        .map(|h| (SlotKind::Crucial, SchemeNode::Leaf(h.clone())))
        .collect();
    let mut next_group = 1usize;
    for group in &groups {
        if group.len() == 1 {
            children.push((SlotKind::Normal, SchemeNode::Leaf(group[0].clone())));
        } else {
            let gid = format!("g{next_group}");
            next_group += 1;
            for member in group {
                children.push((
                    SlotKind::Redundant(gid.clone()),
                    SchemeNode::Leaf(member.clone()),
                ));
            }
        }
    }
    Some(SchemeNode::Internal { k, children })
}

/// Greedy lexicographic grouping of interchangeable residual ids: two ids
/// merge iff no clause holds both and exchanging them maps the clause set
/// onto itself.
fn merge_redundant_groups(residual: &BTreeSet<BTreeSet<HolderId>>) -> Vec<Vec<HolderId>> {
    let ids: BTreeSet<HolderId> = residual.iter().flatten().cloned().collect();
    let mut groups: Vec<Vec<HolderId>> = Vec::new();
    for id in ids {
        let mut placed = false;
        for group in &mut groups {
            let co_occurs = group
                .iter()
                .any(|m| residual.iter().any(|c| c.contains(m) && c.contains(&id)));
            if co_occurs {
                continue;
            }
            let swapped: BTreeSet<BTreeSet<HolderId>> = residual
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|x| {
                            if *x == id {
                                group[0].clone()
                            } else if *x == group[0] {
                                id.clone()
                            } else {
                                x.clone()
                            }
                        })
                        .collect()
                })
                .collect();
            if swapped == *residual {
                group.push(id.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(vec![id]);
        }
    }
    groups
}

fn k_subsets(symbols: &[HolderId], k: usize) -> BTreeSet<BTreeSet<HolderId>> {
    let mut out = BTreeSet::new();
    let n = symbols.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.insert(idx.iter().map(|&i| symbols[i].clone()).collect());
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Benaloh-Leichter-style lowering of a formula to a compartment tree.
fn lower_to_tree(f: &AccessFormula) -> SchemeNode {
    match f {
        AccessFormula::Literal(id) => SchemeNode::Leaf(id.clone()),
        AccessFormula::And(cs) => SchemeNode::Internal {
            k: cs.len(),
            children: cs
                .iter()
                .map(|c| (SlotKind::Normal, lower_to_tree(c)))
                .collect(),
        },
        AccessFormula::Or(cs) => SchemeNode::Internal {
            k: 1,
            children: cs
                .iter()
                .map(|c| (SlotKind::Normal, lower_to_tree(c)))
                .collect(),
        },
        AccessFormula::Threshold(k, cs) => SchemeNode::Internal {
            k: *k,
            children: cs
                .iter()
                .map(|c| (SlotKind::Normal, lower_to_tree(c)))
                .collect(),
        },
    }
}
