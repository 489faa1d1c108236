//! Constrained multiwinner voting instances.
//!
//! Candidates are 0-indexed in memory and 1-indexed in the JSON document.
//! Upper bounds are clamped to the group size on construction, so
//! `lower <= upper <= |P|` holds for every group of a valid [`Instance`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One fairness group `P` with its bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    /// Sorted, distinct candidate indices.
    pub members: Vec<usize>,
    pub lower: usize,
    pub upper: usize,
}

impl Group {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// An immutable, validated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    k: usize,
    prefs: Vec<Vec<usize>>,
    groups: Vec<Group>,
    /// candidate -> indices of the groups containing it
    member_of: Vec<Vec<usize>>,
}

impl Instance {
    /// Validate and normalize an instance.
    ///
    /// Group member lists may be given in any order; they are sorted. Upper
    /// bounds above `|P|` are clamped.
    pub fn new(m: usize, k: usize, prefs: Vec<Vec<usize>>, groups: Vec<Group>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance("no candidates".into()));
        }
        if k == 0 || k > m {
            return Err(Error::InvalidInstance(format!(
                "committee size k={k} must satisfy 1 <= k <= m={m}"
            )));
        }
        let mut seen = vec![usize::MAX; m];
        for (v, list) in prefs.iter().enumerate() {
            for &c in list {
                if c >= m {
                    return Err(Error::InvalidInstance(format!(
                        "voter {} ranks candidate {} outside 1..={m}",
                        v + 1,
                        c + 1
                    )));
                }
                if seen[c] == v {
                    return Err(Error::InvalidInstance(format!(
                        "voter {} ranks candidate {} twice",
                        v + 1,
                        c + 1
                    )));
                }
                seen[c] = v;
            }
        }

        let mut member_of = vec![Vec::new(); m];
        let mut normalized = Vec::with_capacity(groups.len());
        for (gi, mut g) in groups.into_iter().enumerate() {
            g.members.sort_unstable();
            if let Some(w) = g.members.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidInstance(format!(
                    "group {} lists candidate {} twice",
                    gi + 1,
                    w[0] + 1
                )));
            }
            if let Some(&c) = g.members.iter().find(|&&c| c >= m) {
                return Err(Error::InvalidInstance(format!(
                    "group {} contains candidate {} outside 1..={m}",
                    gi + 1,
                    c + 1
                )));
            }
            g.upper = g.upper.min(g.members.len());
            if g.lower > g.upper {
                return Err(Error::StructurallyInfeasibleGroup {
                    group: gi + 1,
                    lower: g.lower,
                    cap: g.upper,
                });
            }
            for &c in &g.members {
                member_of[c].push(gi);
            }
            normalized.push(g);
        }

        Ok(Self {
            m,
            k,
            prefs,
            groups: normalized,
            member_of,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.groups.len()
    }

    pub fn prefs(&self) -> &[Vec<usize>] {
        &self.prefs
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Groups containing candidate `c`.
    pub fn groups_of(&self, c: usize) -> &[usize] {
        &self.member_of[c]
    }

    /// Maximum number of groups any candidate belongs to; 0 without groups.
    pub fn delta(&self) -> usize {
        self.member_of.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when every voter ranks all `m` candidates.
    pub fn has_complete_prefs(&self) -> bool {
        self.prefs.iter().all(|l| l.len() == self.m)
    }

    /// All lower bounds are zero.
    pub fn only_upper_bounds(&self) -> bool {
        self.groups.iter().all(|g| g.lower == 0)
    }

    /// All upper bounds are vacuous (`upper == |P|`).
    pub fn only_lower_bounds(&self) -> bool {
        self.groups.iter().all(|g| g.upper == g.len())
    }

    /// Same voters and candidates, different groups and bounds.
    pub fn with_groups(&self, groups: Vec<Group>) -> Result<Self> {
        Self::new(self.m, self.k, self.prefs.clone(), groups)
    }

    /// Same voters and groups, replaced bounds (one `(lower, upper)` per group).
    pub fn with_bounds(&self, bounds: &[(usize, usize)]) -> Result<Self> {
        if bounds.len() != self.p() {
            return Err(Error::InvalidInstance(format!(
                "expected {} bound pairs, got {}",
                self.p(),
                bounds.len()
            )));
        }
        let groups = self
            .groups
            .iter()
            .zip(bounds)
            .map(|(g, &(lower, upper))| Group {
                members: g.members.clone(),
                lower,
                upper,
            })
            .collect();
        self.with_groups(groups)
    }

    /// Same instance with a different committee size.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.m, k, self.prefs.clone(), self.groups.clone())
    }

    /// `|S ∩ P_i|` for every group.
    pub fn group_counts(&self, members: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.p()];
        for &c in members {
            for &g in &self.member_of[c] {
                counts[g] += 1;
            }
        }
        counts
    }

    /// Whether `members` (assumed distinct) satisfies the size and every bound.
    pub fn is_feasible(&self, members: &[usize]) -> bool {
        members.len() == self.k
            && self
                .group_counts(members)
                .iter()
                .zip(&self.groups)
                .all(|(&c, g)| g.lower <= c && c <= g.upper)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        doc.into_instance()
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            m: self.m,
            n: self.n(),
            k: self.k,
            prefs: self
                .prefs
                .iter()
                .map(|l| l.iter().map(|&c| c + 1).collect())
                .collect(),
            groups: self
                .groups
                .iter()
                .map(|g| GroupDoc {
                    members: g.members.iter().map(|&c| c + 1).collect(),
                    lower: g.lower,
                    upper: g.upper,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("instance document serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("instance document serializes")
    }
}

/// 1-based position of `c` in one voter's list, or `None` when the
/// (truncated) list omits it.
pub fn position(pref: &[usize], c: usize) -> Option<usize> {
    pref.iter().position(|&x| x == c).map(|i| i + 1)
}

/// The on-disk instance document (1-based candidate ids).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub prefs: Vec<Vec<usize>>,
    #[serde(default)]
    pub groups: Vec<GroupDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub members: Vec<usize>,
    pub lower: usize,
    pub upper: usize,
}

fn to_zero_based(id: usize, m: usize, what: &str) -> Result<usize> {
    if id == 0 || id > m {
        return Err(Error::InvalidInstance(format!(
            "{what} id {id} out of range 1..={m}"
        )));
    }
    Ok(id - 1)
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance> {
        if self.prefs.len() != self.n {
            return Err(Error::Parse(format!(
                "n = {} but {} preference lists given",
                self.n,
                self.prefs.len()
            )));
        }
        let m = self.m;
        let prefs = self
            .prefs
            .into_iter()
            .map(|l| {
                l.into_iter()
                    .map(|c| to_zero_based(c, m, "candidate"))
                    .collect()
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        let groups = self
            .groups
            .into_iter()
            .map(|g| {
                Ok(Group {
                    members: g
                        .members
                        .into_iter()
                        .map(|c| to_zero_based(c, m, "group member"))
                        .collect::<Result<_>>()?,
                    lower: g.lower,
                    upper: g.upper,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(m, self.k, prefs, groups)
    }
}

/// A size-`k` committee with cached group counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Committee {
    members: Vec<usize>,
    group_counts: Vec<usize>,
}

impl Committee {
    /// Build a committee of exactly `inst.k()` distinct candidates.
    /// Fairness bounds are *not* required to hold (bi-criterion outputs may
    /// violate them); see [`Committee::is_feasible`].
    pub fn new(inst: &Instance, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.len() != inst.k() {
            return Err(Error::InvalidCommittee(format!(
                "expected {} members, got {}",
                inst.k(),
                members.len()
            )));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCommittee("duplicate member".into()));
        }
        if let Some(&c) = members.iter().find(|&&c| c >= inst.m()) {
            return Err(Error::InvalidCommittee(format!(
                "candidate index {c} out of range"
            )));
        }
        let group_counts = inst.group_counts(&members);
        Ok(Self {
            members,
            group_counts,
        })
    }

    /// Parse 1-based ids.
    pub fn from_one_based(inst: &Instance, ids: &[usize]) -> Result<Self> {
        let members = ids
            .iter()
            .map(|&c| {
                to_zero_based(c, inst.m(), "committee member")
                    .map_err(|e| Error::InvalidCommittee(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(inst, members)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members.iter().map(|&c| c + 1).collect()
    }

    pub fn group_counts(&self) -> &[usize] {
        &self.group_counts
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members.binary_search(&c).is_ok()
    }

    pub fn is_feasible(&self, inst: &Instance) -> bool {
        self.group_counts
            .iter()
            .zip(inst.groups())
            .all(|(&c, g)| g.lower <= c && c <= g.upper)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn pair_groups_shape() {
        let inst = pair_groups(1);
        assert_eq!((inst.m(), inst.n(), inst.k(), inst.p()), (50, 200, 2, 5));
        // c3 sits in P1, P2, P5.
        assert_eq!(inst.groups_of(2), &[0, 1, 4]);
        assert_eq!(inst.delta(), 3);
    }

    #[test]
    fn json_round_trip_pair_groups() {
        let inst = pair_groups(1);
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.delta(), 3);
    }

    #[test]
    fn zero_groups_is_unconstrained() {
        let text = r#"{"m":3,"n":1,"k":2,"prefs":[[2,1,3]],"groups":[]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.p(), 0);
        assert_eq!(inst.delta(), 0);
        assert_eq!(inst.prefs()[0], vec![1, 0, 2]);
    }

    #[test]
    fn lower_above_upper_is_structurally_infeasible() {
        let text =
            r#"{"m":4,"n":0,"k":2,"prefs":[],"groups":[{"members":[1,2,3],"lower":3,"upper":2}]}"#;
        let err = Instance::from_json(text).unwrap_err();
        assert!(matches!(
            err,
            Error::StructurallyInfeasibleGroup {
                group: 1,
                lower: 3,
                cap: 2
            }
        ));
        assert!(err.to_string().contains("structurally infeasible group"));
    }

    #[test]
    fn lower_above_group_size_is_rejected_after_clamping() {
        let text =
            r#"{"m":4,"n":0,"k":3,"prefs":[],"groups":[{"members":[1,2],"lower":3,"upper":9}]}"#;
        assert!(matches!(
            Instance::from_json(text),
            Err(Error::StructurallyInfeasibleGroup { cap: 2, .. })
        ));
    }

    #[test]
    fn upper_is_clamped_to_group_size() {
        let text =
            r#"{"m":4,"n":0,"k":2,"prefs":[],"groups":[{"members":[4,1],"lower":0,"upper":10}]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.groups()[0].upper, 2);
        assert_eq!(inst.groups()[0].members, vec![0, 3]);
    }

    #[test]
    fn rejects_bad_documents() {
        let dup = r#"{"m":3,"n":1,"k":1,"prefs":[[1,2,1]],"groups":[]}"#;
        assert!(Instance::from_json(dup)
            .unwrap_err()
            .to_string()
            .contains("twice"));
        let out = r#"{"m":3,"n":1,"k":1,"prefs":[[4]],"groups":[]}"#;
        assert!(Instance::from_json(out).is_err());
        let zero = r#"{"m":3,"n":1,"k":1,"prefs":[[0]],"groups":[]}"#;
        assert!(Instance::from_json(zero).is_err());
        let bad_n = r#"{"m":3,"n":2,"k":1,"prefs":[[1]],"groups":[]}"#;
        assert!(matches!(Instance::from_json(bad_n), Err(Error::Parse(_))));
        let bad_k = r#"{"m":3,"n":0,"k":4,"prefs":[],"groups":[]}"#;
        assert!(Instance::from_json(bad_k).is_err());
        assert!(matches!(Instance::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn delta_of_partition_is_one() {
        let groups = (0..4)
            .map(|q| Group {
                members: vec![2 * q, 2 * q + 1],
                lower: 0,
                upper: 2,
            })
            .collect();
        let inst = Instance::new(8, 4, vec![], groups).unwrap();
        assert_eq!(inst.delta(), 1);
    }

    #[test]
    fn position_is_one_based() {
        assert_eq!(position(&[0, 2, 3, 1], 3), Some(3));
        assert_eq!(position(&[0], 1), None);
        let crossed = crossed_groups();
        assert_eq!(position(&crossed.prefs()[0], 7), Some(8));
    }

    #[test]
    fn committee_counts_match_groups() {
        let inst = crossed_groups();
        let s = Committee::from_one_based(&inst, &[1, 4, 5, 8]).unwrap();
        assert_eq!(s.group_counts(), &[2, 2, 2, 2]);
        assert!(s.is_feasible(&inst));
        let t = Committee::from_one_based(&inst, &[1, 2, 5, 6]).unwrap();
        assert_eq!(t.group_counts(), &[4, 0, 2, 2]);
        assert!(!t.is_feasible(&inst));
        assert!(Committee::new(&inst, vec![0, 0, 1, 2]).is_err());
        assert!(Committee::new(&inst, vec![0, 1, 2]).is_err());
    }
}
