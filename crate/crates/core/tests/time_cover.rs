mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use tsabe::time::{is_prefix, Calendar, TimeNode};

fn span() -> Vec<(u32, u32, u32)> {
    days_of(2020..=2024)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cover_tiles_window_minimally(a in 0usize..1827, b in 0usize..1827) {
        let days = span();
        let (lo, hi) = (a.min(b), a.max(b));
        let c = Calendar::Gregorian.set_cover(&window(days[lo], days[hi])).unwrap();
        let mut seen = Vec::new();
        for n in c.nodes() {
            seen.extend(node_days(n));
        }
        seen.sort();
        prop_assert_eq!(&seen[..], &days[lo..=hi], "nodes overlap or leave gaps");
        prop_assert_eq!(c.len(), brute_force_cover_size(&days, lo, hi));
    }

    #[test]
    fn cover_nodes_are_pairwise_unrelated(a in 0usize..1827, len in 0usize..500) {
        let days = span();
        let hi = (a + len).min(days.len() - 1);
        let c = Calendar::Gregorian.set_cover(&window(days[a], days[hi])).unwrap();
        for x in c.nodes() {
            for y in c.nodes() {
                if x != y {
                    prop_assert!(!is_prefix(x, y));
                }
            }
        }
    }

    #[test]
    fn cover_roundtrips_through_text(a in 0usize..1827, len in 0usize..400) {
        let days = span();
        let cal = Calendar::Gregorian;
        let hi = (a + len).min(days.len() - 1);
        let c = cal.set_cover(&window(days[a], days[hi])).unwrap();
        let parsed: Vec<TimeNode> = c.nodes().iter().map(|n| cal.parse_node(&n.label()).unwrap()).collect();
        prop_assert_eq!(cal.cover_from_nodes(parsed).unwrap(), c);
    }

    #[test]
    fn membership_is_exact_node_match(a in 0usize..1827, len in 0usize..120, probe in 0usize..1827) {
        let days = span();
        let hi = (a + len).min(days.len() - 1);
        let c = Calendar::Gregorian.set_cover(&window(days[a], days[hi])).unwrap();
        let probe = TimeNode::day(to_day(days[probe]));
        let listed: BTreeSet<TimeNode> = c.nodes().iter().copied().collect();
        prop_assert_eq!(c.contains(&probe), listed.contains(&probe));
    }
}

#[test]
fn whole_years_collapse_to_year_nodes() {
    let c = Calendar::Gregorian.set_cover(&window((2021, 1, 1), (2023, 12, 31))).unwrap();
    let labels: Vec<String> = c.nodes().iter().map(TimeNode::label).collect();
    assert_eq!(labels, ["2021", "2022", "2023"]);
}

#[test]
fn leap_day_is_a_day_node() {
    let cal = Calendar::Gregorian;
    let c = cal.set_cover(&window((2024, 2, 1), (2024, 2, 29))).unwrap();
    assert_eq!(c.nodes(), [TimeNode::month(2024, 2)]);
    assert!(cal.parse_day("2023-02-29").is_err());
}
