//! Shared scheme fixtures for the integration suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use shardkit::compartments::SchemeNode;
use shardkit::extended::{HolderId, SlotKind};

pub fn normal(node: SchemeNode) -> (SlotKind, SchemeNode) {
    (SlotKind::Normal, node)
}

pub fn crucial(node: SchemeNode) -> (SlotKind, SchemeNode) {
    (SlotKind::Crucial, node)
}

pub fn redundant(group: &str, node: SchemeNode) -> (SlotKind, SchemeNode) {
    (SlotKind::Redundant(group.into()), node)
}

pub fn ids(names: &[&str]) -> BTreeSet<HolderId> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Any two of the seven vault keyholders.
pub fn plain_two_of_seven() -> SchemeNode {
    SchemeNode::threshold(
        2,
        ["o", "m1", "m2", "m3", "s1", "s2", "s3"]
            .iter()
            .map(|h| normal(SchemeNode::leaf(h)))
            .collect(),
    )
}

fn management_compartment() -> SchemeNode {
    SchemeNode::threshold(
        2,
        ["o", "m1", "m2", "m3"]
            .iter()
            .map(|h| normal(SchemeNode::leaf(h)))
            .collect(),
    )
}

fn shift_compartment() -> SchemeNode {
    SchemeNode::threshold(
        2,
        ["s1", "s2", "s3"]
            .iter()
            .map(|h| normal(SchemeNode::leaf(h)))
            .collect(),
    )
}

/// Two from management AND two from the shift leaders.
pub fn conjunctive_compartments() -> SchemeNode {
    SchemeNode::threshold(
        2,
        vec![
            normal(management_compartment()),
            normal(shift_compartment()),
        ],
    )
}

/// Two from management OR two from the shift leaders.
pub fn disjunctive_compartments() -> SchemeNode {
    SchemeNode::threshold(
        1,
        vec![
            normal(management_compartment()),
            normal(shift_compartment()),
        ],
    )
}

/// The vault: owner and head of security are crucial, managers hold normal
/// shares, shift leaders one mutual redundant group, threshold 2.
pub fn vault_scheme() -> SchemeNode {
    SchemeNode::threshold(
        2,
        vec![
            crucial(SchemeNode::leaf("o")),
            crucial(SchemeNode::leaf("sec")),
            normal(SchemeNode::leaf("m1")),
            normal(SchemeNode::leaf("m2")),
            normal(SchemeNode::leaf("m3")),
            redundant("g1", SchemeNode::leaf("s1")),
            redundant("g1", SchemeNode::leaf("s2")),
            redundant("g1", SchemeNode::leaf("s3")),
        ],
    )
}

pub const VAULT_FORMULA: &str = "and(o, sec, thr(2; m1, m2, m3, or(s1, s2, s3)))";

/// Three departments, each with a manager/deputy pair and three staff.
/// Management is a crucial (2-of-3-groups) compartment with each deputy
/// redundant to their manager; each staff compartment needs a 2-of-3
/// majority; two compartments open the vault.
pub fn department_scheme() -> SchemeNode {
    let management = SchemeNode::threshold(
        2,
        vec![
            redundant("d1", SchemeNode::leaf("m1")),
            redundant("d1", SchemeNode::leaf("dep1")),
            redundant("d2", SchemeNode::leaf("m2")),
            redundant("d2", SchemeNode::leaf("dep2")),
            redundant("d3", SchemeNode::leaf("m3")),
            redundant("d3", SchemeNode::leaf("dep3")),
        ],
    );
    let staff = |dept: usize| {
        SchemeNode::threshold(
            2,
            (1..=3)
                .map(|i| normal(SchemeNode::leaf(&format!("st{dept}_{i}"))))
                .collect(),
        )
    };
    SchemeNode::threshold(
        2,
        vec![
            crucial(management),
            normal(staff(1)),
            normal(staff(2)),
            normal(staff(3)),
        ],
    )
}

/// All fixtures paired with a short label.
pub fn all_fixtures() -> Vec<(&'static str, SchemeNode)> {
    vec![
        ("two-of-seven", plain_two_of_seven()),
        ("conjunctive", conjunctive_compartments()),
        ("disjunctive", disjunctive_compartments()),
        ("vault", vault_scheme()),
        ("departments", department_scheme()),
    ]
}
