//! Reward and penalty arithmetic for finalized encounters.
//!
//! Every per-party quantity is evaluated as an exact rational and then
//! floored (toward negative infinity, so penalties round up in magnitude).
//! Slashes are capped at the party's stake; the uncovered part shrinks the
//! pool shared by the recipients. Whatever the floors leave behind goes to
//! the treasury, so credits always equal debits.

use serde::{Deserialize, Serialize};

use super::config::{Share, Tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    /// No votes at all.
    Case1,
    /// Only yes votes.
    Case2,
    /// Only no votes.
    Case3,
    /// Yes votes at least as many as no votes, both present.
    Case4,
    /// Fewer yes votes than no votes, both present.
    Case5,
}

impl CaseLabel {
    pub fn classify(yes: u32, no: u32) -> CaseLabel {
        match (yes, no) {
            (0, 0) => CaseLabel::Case1,
            (_, 0) => CaseLabel::Case2,
            (0, _) => CaseLabel::Case3,
            (t, f) if t >= f => CaseLabel::Case4,
            _ => CaseLabel::Case5,
        }
    }

    /// Whether the learner keeps the contribution.
    pub fn accepted(self) -> bool {
        matches!(self, CaseLabel::Case1 | CaseLabel::Case2 | CaseLabel::Case4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Case1 => "Case1",
            CaseLabel::Case2 => "Case2",
            CaseLabel::Case3 => "Case3",
            CaseLabel::Case4 => "Case4",
            CaseLabel::Case5 => "Case5",
        }
    }
}

/// Per-head amounts before any stake cap. Negative values are penalties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nominal {
    pub case: CaseLabel,
    pub r_n: i64,
    pub r_v_t: i64,
    pub r_v_f: i64,
}

const D: i128 = Share::DENOMINATOR as i128;

fn floor_div(num: i128, den: i128) -> i128 {
    num.div_euclid(den)
}

pub fn nominal(reward: Tokens, neighbor_share: Share, yes: u32, no: u32) -> Nominal {
    let r = i128::from(reward);
    let pn = i128::from(neighbor_share.ppm());
    let pv = D - pn;
    let (t, f) = (i128::from(yes), i128::from(no));
    let case = CaseLabel::classify(yes, no);
    let (r_n, r_v_t, r_v_f) = match case {
        CaseLabel::Case1 => (r, 0, 0),
        CaseLabel::Case2 => (floor_div(r * pn, D), floor_div(r * pv, D * t), 0),
        CaseLabel::Case3 => (-r, 0, floor_div(r, f)),
        CaseLabel::Case4 => {
            let r_v_f = floor_div(-(r * pv), D * (t + f));
            let r_v_t = floor_div(r * pv - D * f * r_v_f, D * t);
            (floor_div(r * pn, D), r_v_t, r_v_f)
        }
        CaseLabel::Case5 => {
            let r_v_t = floor_div(-r, t + f);
            let r_v_f = floor_div(r - t * r_v_t, f);
            (-r, r_v_t, r_v_f)
        }
    };
    Nominal {
        case,
        r_n: r_n as i64,
        r_v_t: r_v_t as i64,
        r_v_f: r_v_f as i64,
    }
}

/// Realized token movements for one finalization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub neighbor_credit: Tokens,
    pub neighbor_slash: Tokens,
    pub yes_credit_each: Tokens,
    pub yes_slashes: Vec<Tokens>,
    pub no_credit_each: Tokens,
    pub no_slashes: Vec<Tokens>,
    pub learner_refund: Tokens,
    pub treasury: Tokens,
    /// Nominal penalties that could not be covered by stake.
    pub shortfall: Tokens,
}

impl Plan {
    pub fn total_slashed(&self) -> Tokens {
        self.neighbor_slash
            + self.yes_slashes.iter().sum::<Tokens>()
            + self.no_slashes.iter().sum::<Tokens>()
    }

    pub fn total_credited(&self, yes: usize, no: usize) -> Tokens {
        self.neighbor_credit
            + self.yes_credit_each * yes as Tokens
            + self.no_credit_each * no as Tokens
            + self.learner_refund
            + self.treasury
    }
}

/// Applies stake caps to `nominal` and balances the books against the escrowed reward.
pub fn plan(
    reward: Tokens,
    nominal: &Nominal,
    neighbor_stake: Tokens,
    yes_stakes: &[Tokens],
    no_stakes: &[Tokens],
) -> Plan {
    let mut p = Plan {
        yes_slashes: vec![0; yes_stakes.len()],
        no_slashes: vec![0; no_stakes.len()],
        ..Plan::default()
    };
    let cap = |want: Tokens, stake: Tokens, short: &mut Tokens| {
        let took = want.min(stake);
        *short += want - took;
        took
    };
    let share_pool = |pool: i128, short: Tokens, heads: usize| -> Tokens {
        let heads = heads as i128;
        floor_div(pool - i128::from(short), heads).max(0) as Tokens
    };
    let yes = yes_stakes.len();
    let no = no_stakes.len();
    match nominal.case {
        CaseLabel::Case1 | CaseLabel::Case2 => {
            p.neighbor_credit = nominal.r_n as Tokens;
            p.yes_credit_each = nominal.r_v_t.max(0) as Tokens;
            p.treasury = reward - p.neighbor_credit - p.yes_credit_each * yes as Tokens;
        }
        CaseLabel::Case4 => {
            p.neighbor_credit = nominal.r_n as Tokens;
            let penalty = nominal.r_v_f.unsigned_abs();
            for (s, &stake) in p.no_slashes.iter_mut().zip(no_stakes) {
                *s = cap(penalty, stake, &mut p.shortfall);
            }
            let pool = i128::from(nominal.r_v_t) * yes as i128;
            p.yes_credit_each = share_pool(pool, p.shortfall, yes);
            let inflow = reward + p.total_slashed();
            p.treasury = inflow - p.neighbor_credit - p.yes_credit_each * yes as Tokens;
        }
        CaseLabel::Case3 | CaseLabel::Case5 => {
            p.learner_refund = reward;
            p.neighbor_slash = cap(nominal.r_n.unsigned_abs(), neighbor_stake, &mut p.shortfall);
            let penalty = nominal.r_v_t.min(0).unsigned_abs();
            for (s, &stake) in p.yes_slashes.iter_mut().zip(yes_stakes) {
                *s = cap(penalty, stake, &mut p.shortfall);
            }
            let pool = i128::from(nominal.r_v_f) * no as i128;
            p.no_credit_each = share_pool(pool, p.shortfall, no);
            p.treasury = p.total_slashed() - p.no_credit_each * no as Tokens;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p08() -> Share {
        Share::from_fraction(0.8).unwrap()
    }

    #[test]
    fn classify_covers_each_case() {
        assert_eq!(CaseLabel::classify(0, 0), CaseLabel::Case1);
        assert_eq!(CaseLabel::classify(3, 0), CaseLabel::Case2);
        assert_eq!(CaseLabel::classify(0, 2), CaseLabel::Case3);
        assert_eq!(CaseLabel::classify(2, 2), CaseLabel::Case4);
        assert_eq!(CaseLabel::classify(2, 1), CaseLabel::Case4);
        assert_eq!(CaseLabel::classify(1, 2), CaseLabel::Case5);
    }

    #[test]
    fn case1_pays_full_reward() {
        let n = nominal(100, p08(), 0, 0);
        assert_eq!((n.r_n, n.r_v_t, n.r_v_f), (100, 0, 0));
        let p = plan(100, &n, 200, &[], &[]);
        assert_eq!(p.neighbor_credit, 100);
        assert_eq!(p.treasury, 0);
    }

    #[test]
    fn case2_three_yes_leaves_two_in_treasury() {
        let n = nominal(100, p08(), 3, 0);
        assert_eq!((n.r_n, n.r_v_t), (80, 6));
        let p = plan(100, &n, 200, &[200; 3], &[]);
        assert_eq!(p.yes_credit_each, 6);
        assert_eq!(p.treasury, 2);
    }

    #[test]
    fn case4_two_yes_one_no() {
        // r_v^f = floor(-20/3) = -7; r_v^t = floor((20 + 7) / 2) = 13
        let n = nominal(100, p08(), 2, 1);
        assert_eq!((n.r_n, n.r_v_t, n.r_v_f), (80, 13, -7));
        let p = plan(100, &n, 200, &[200; 2], &[200]);
        assert_eq!(p.no_slashes, vec![7]);
        assert_eq!(p.yes_credit_each, 13);
        assert_eq!(p.treasury, 1);
        assert_eq!(p.total_credited(2, 1), 100 + p.total_slashed());
    }

    #[test]
    fn case5_one_yes_two_no() {
        // r_v^t = floor(-100/3) = -34; r_v^f = floor((100 + 34) / 2) = 67
        let n = nominal(100, p08(), 1, 2);
        assert_eq!((n.r_n, n.r_v_t, n.r_v_f), (-100, -34, 67));
        let p = plan(100, &n, 200, &[200], &[200; 2]);
        assert_eq!(p.learner_refund, 100);
        assert_eq!(p.neighbor_slash, 100);
        assert_eq!(p.yes_slashes, vec![34]);
        assert_eq!(p.no_credit_each, 67);
        assert_eq!(p.treasury, 0);
    }

    #[test]
    fn case3_no_voters_share_neighbor_slash() {
        let n = nominal(100, p08(), 0, 3);
        assert_eq!((n.r_n, n.r_v_f), (-100, 33));
        let p = plan(100, &n, 200, &[], &[200; 3]);
        assert_eq!(p.no_credit_each, 33);
        assert_eq!(p.treasury, 1);
    }

    #[test]
    fn clamped_neighbor_slash_shrinks_pool() {
        let n = nominal(100, p08(), 0, 2);
        let p = plan(100, &n, 30, &[], &[200; 2]);
        assert_eq!(p.neighbor_slash, 30);
        assert_eq!(p.shortfall, 70);
        assert_eq!(p.no_credit_each, 15);
        assert_eq!(p.treasury, 0);
    }

    proptest! {
        #[test]
        fn plan_conserves_tokens(
            reward in 1u64..5_000,
            ppm in 1u32..1_000_000,
            yes in prop::collection::vec(0u64..300, 0..6),
            no in prop::collection::vec(0u64..300, 0..6),
            neighbor_stake in 0u64..300,
        ) {
            let share = Share::from_ppm(ppm).unwrap();
            let n = nominal(reward, share, yes.len() as u32, no.len() as u32);
            let p = plan(reward, &n, neighbor_stake, &yes, &no);
            prop_assert_eq!(p.total_credited(yes.len(), no.len()), reward + p.total_slashed());
            prop_assert!(p.neighbor_slash <= neighbor_stake);
            for (s, st) in p.yes_slashes.iter().zip(&yes) { prop_assert!(s <= st); }
            for (s, st) in p.no_slashes.iter().zip(&no) { prop_assert!(s <= st); }
        }
    }
}
