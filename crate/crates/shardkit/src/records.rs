//! One-line share record format, stable and byte-identical through
//! parse/serialize:
//!
//! ```text
//! v1 p=<dec> scheme=<16-hex> path=<dot-separated child indices or -> \
//!   kind=<normal|crucial|redundant:GID> x=<dec or -> value=<dec> holder=<id>
//! ```
//!
//! Crucial records have `x=-`.

use crate::compartments::{NodePath, ShareBundle, TreeShare};
use crate::error::{Error, Result};
use crate::extended::{HolderId, SlotKind};
use crate::field::PrimeModulus;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareRecord {
    pub p: u64,
    pub scheme: u64,
    pub path: NodePath,
    pub kind: SlotKind,
    pub x: Option<u64>,
    pub value: u64,
    pub holder: HolderId,
}

impl ShareRecord {
    pub fn serialize(&self) -> String {
        let kind = match &self.kind {
            SlotKind::Normal => "normal".to_string(),
            SlotKind::Crucial => "crucial".to_string(),
            SlotKind::Redundant(g) => format!("redundant:{g}"),
        };
        let x = match self.x {
            Some(x) => x.to_string(),
            None => "-".to_string(),
        };
        format!(
            "v1 p={} scheme={:016x} path={} kind={} x={} value={} holder={}",
            self.p, self.scheme, self.path, kind, x, self.value, self.holder
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("{msg}: {line:?}"));
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 8 || fields[0] != "v1" {
            return Err(bad("expected 8 space-separated fields starting with v1"));
        }
        let take = |i: usize, key: &str| -> Result<&str> {
            fields[i]
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| bad(&format!("expected field {key}=...")))
        };
        let p = take(1, "p")?.parse::<u64>().map_err(|_| bad("bad p"))?;
        let scheme_text = take(2, "scheme")?;
        if scheme_text.len() != 16 {
            return Err(bad("scheme id must be 16 hex digits"));
        }
        let scheme = u64::from_str_radix(scheme_text, 16).map_err(|_| bad("bad scheme id"))?;
        let path = NodePath::parse(take(3, "path")?)?;
        let kind = match take(4, "kind")? {
            "normal" => SlotKind::Normal,
            "crucial" => SlotKind::Crucial,
            other => match other.strip_prefix("redundant:") {
                Some(g) if !g.is_empty() => SlotKind::Redundant(g.to_string()),
                _ => return Err(bad("bad kind")),
            },
        };
        let x = match take(5, "x")? {
            "-" => None,
            text => Some(text.parse::<u64>().map_err(|_| bad("bad x"))?),
        };
        if kind == SlotKind::Crucial && x.is_some() {
            return Err(bad("crucial records must have x=-"));
        }
        let value = take(6, "value")?
            .parse::<u64>()
            .map_err(|_| bad("bad value"))?;
        let holder = take(7, "holder")?.to_string();
        if holder.is_empty() {
            return Err(bad("empty holder"));
        }
        if value >= p {
            return Err(bad("value out of field"));
        }
        Ok(Self {
            p,
            scheme,
            path,
            kind,
            x,
            value,
            holder,
        })
    }

    pub fn to_tree_share(&self, modulus: PrimeModulus) -> Result<TreeShare> {
        if modulus.value() != self.p {
            return Err(Error::SchemeMismatch(format!(
                "record prime {} does not match {}",
                self.p,
                modulus.value()
            )));
        }
        Ok(TreeShare {
            path: self.path.clone(),
            kind: self.kind.clone(),
            x: self.x,
            value: modulus.element(self.value),
        })
    }
}

/// Flattens a bundle into records, ordered by holder then path.
pub fn bundle_to_records(bundle: &ShareBundle) -> Vec<ShareRecord> {
    let mut out = Vec::new();
    for (holder, shares) in &bundle.shares {
        for share in shares {
            out.push(ShareRecord {
                p: bundle.modulus.value(),
                scheme: bundle.scheme_id,
                path: share.path.clone(),
                kind: share.kind.clone(),
                x: share.x,
                value: share.value.value(),
                holder: holder.clone(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_byte_identically() {
        for line in [
            "v1 p=7 scheme=00000000deadbeef path=0.2 kind=redundant:g1 x=3 value=5 holder=s1",
            "v1 p=8191 scheme=0123456789abcdef path=- kind=normal x=- value=6 holder=a",
            "v1 p=11 scheme=0000000000000001 path=1 kind=crucial x=- value=10 holder=o",
        ] {
            let record = ShareRecord::parse(line).unwrap();
            assert_eq!(record.serialize(), line);
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        for line in [
            "",
            "v2 p=7 scheme=0000000000000001 path=- kind=normal x=- value=6 holder=a",
            "v1 p=7 scheme=01 path=- kind=normal x=- value=6 holder=a",
            "v1 p=7 scheme=0000000000000001 path=x kind=normal x=- value=6 holder=a",
            "v1 p=7 scheme=0000000000000001 path=- kind=sideways x=- value=6 holder=a",
            "v1 p=7 scheme=0000000000000001 path=- kind=crucial x=2 value=6 holder=a",
            "v1 p=7 scheme=0000000000000001 path=- kind=normal x=- value=9 holder=a",
            "v1 p=7 scheme=0000000000000001 path=- kind=normal x=- value=6",
        ] {
            assert!(ShareRecord::parse(line).is_err(), "{line:?}");
        }
    }
}
