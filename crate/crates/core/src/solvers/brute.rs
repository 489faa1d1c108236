//! Exhaustive search over size-`k` subsets; the test oracle for everything else.

use super::{Guarantee, Solution};
use crate::error::{Error, Result};
use crate::instance::{Committee, Instance};
use crate::scores::{Rule, Scorer};

pub const DEFAULT_BRUTE_CAP: u128 = 2_000_000;

pub(crate) fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (m - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Calls `f` on every size-`k` subset of `0..m` in lexicographic order.
pub(crate) fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < m - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The best feasible committee; among equal scores the lexicographically
/// smallest wins.
pub fn brute_force(inst: &Instance, rule: &Rule, cap: u128) -> Result<Solution> {
    let scorer = Scorer::new(rule, inst)?;
    brute_force_with(&scorer, cap, 0)
}

pub(crate) fn brute_force_with(scorer: &Scorer<'_>, cap: u128, seed: u64) -> Result<Solution> {
    let inst = scorer.instance();
    let (m, k) = (inst.m(), inst.k());
    let count = binomial(m, k);
    if count > cap {
        return Err(Error::CapExceeded { m, k, count, cap });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_subset(m, k, |s| {
        if !inst.is_feasible(s) {
            return;
        }
        let v = scorer.eval(s);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, s.to_vec()));
        }
    });
    let (_, members) =
        best.ok_or_else(|| Error::Infeasible("no size-k subset meets the bounds".into()))?;
    let committee = Committee::new(inst, members)?;
    Ok(
        Solution::new(scorer, committee, Guarantee::Exact, "brute-force", seed)
            .with_info("subsets", count.to_string().into()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::crossed_groups;

    #[test]
    fn subsets_enumerated_in_order() {
        let mut all = Vec::new();
        for_each_subset(5, 3, |s| all.push(s.to_vec()));
        assert_eq!(all.len() as u128, binomial(5, 3));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let mut n = 0;
        for_each_subset(4, 0, |s| {
            assert!(s.is_empty());
            n += 1;
        });
        assert_eq!(n, 1);
        for_each_subset(3, 3, |s| assert_eq!(s, &[0, 1, 2]));
    }

    #[test]
    fn crossed_groups_optimum() {
        let s = brute_force(&crossed_groups(), &Rule::BetaCc, DEFAULT_BRUTE_CAP).unwrap();
        assert_eq!(s.score, 1300.0);
        // {c1,c4,c5,c8} is one of the optima
        let alt = Scorer::new(&Rule::BetaCc, &crossed_groups())
            .unwrap()
            .eval(&[0, 3, 4, 7]);
        assert_eq!(alt, 1300.0);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = Instance::new(40, 20, vec![], vec![]).unwrap();
        assert!(matches!(
            brute_force(&inst, &Rule::Sntv, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }
}
