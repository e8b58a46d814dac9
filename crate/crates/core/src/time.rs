//! Year/month/day time tree and minimal set covers of day windows.
//!
//! Nodes are written `YYYY`, `YYYY-MM` or `YYYY-MM-DD`; windows are
//! `start..end` with both ends inclusive. Month names (`2022-JUL-01`) are
//! accepted on input.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const MONTH_NAMES: [&str; 12] = [
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC",
];

pub const MAX_YEAR: u32 = 9999;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("invalid date {0}")]
    InvalidDate(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("window start {start} is after end {end}")]
    Reversed { start: Day, end: Day },
    #[error("cover nodes {0} and {1} overlap")]
    Overlap(TimeNode, TimeNode),
    #[error("a time cover needs at least one node")]
    EmptyCover,
}

/// Month-length table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Calendar {
    #[default]
    Gregorian,
    /// Twelve months of 31 days each.
    Idealized,
}

impl Calendar {
    pub fn days_in_month(&self, year: u32, month: u8) -> u8 {
        match self {
            Calendar::Idealized => 31,
            Calendar::Gregorian => match month {
                1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
                4 | 6 | 9 | 11 => 30,
                2 if is_leap(year) => 29,
                2 => 28,
                _ => 0,
            },
        }
    }

    pub fn day(&self, year: u32, month: u8, day: u8) -> Result<Day, TimeError> {
        let d = Day { year, month, day };
        if (1..=MAX_YEAR).contains(&year)
            && (1..=12).contains(&month)
            && day >= 1
            && day <= self.days_in_month(year, month)
        {
            Ok(d)
        } else {
            Err(TimeError::InvalidDate(d.to_string()))
        }
    }

    pub fn is_valid_day(&self, d: &Day) -> bool {
        self.day(d.year, d.month, d.day).is_ok()
    }

    pub fn is_valid_node(&self, n: &TimeNode) -> bool {
        let c = n.components();
        match c.len() {
            1 => (1..=MAX_YEAR).contains(&c[0]),
            2 => (1..=MAX_YEAR).contains(&c[0]) && (1..=12).contains(&c[1]),
            3 => c[1] <= 12 && c[2] <= 31 && self.day(c[0], c[1] as u8, c[2] as u8).is_ok(),
            _ => false,
        }
    }

    /// Following day; `None` past the last representable year.
    pub fn next_day(&self, d: &Day) -> Option<Day> {
        if d.day < self.days_in_month(d.year, d.month) {
            Some(Day { day: d.day + 1, ..*d })
        } else if d.month < 12 {
            Some(Day { month: d.month + 1, day: 1, ..*d })
        } else if d.year < MAX_YEAR {
            Some(Day { year: d.year + 1, month: 1, day: 1 })
        } else {
            None
        }
    }

    /// Inclusive span of the node's subtree.
    pub fn node_window(&self, n: &TimeNode) -> TimeWindow {
        let c = n.components();
        let (start, end) = match *c {
            [y] => (Day::raw(y, 1, 1), Day::raw(y, 12, self.days_in_month(y, 12))),
            [y, m] => {
                let m = m as u8;
                (Day::raw(y, m, 1), Day::raw(y, m, self.days_in_month(y, m)))
            }
            [y, m, d] => {
                let day = Day::raw(y, m as u8, d as u8);
                (day, day)
            }
            _ => unreachable!("time nodes have one to three components"),
        };
        TimeWindow { start, end }
    }

    /// Minimal cover of `w` by tree nodes.
    ///
    /// Walks the window left to right and at each position emits the largest
    /// node that starts there and still ends inside the window.
    pub fn set_cover(&self, w: &TimeWindow) -> Result<TimeCover, TimeError> {
        for d in [&w.start, &w.end] {
            if !self.is_valid_day(d) {
                return Err(TimeError::InvalidDate(d.to_string()));
            }
        }
        let mut nodes = Vec::new();
        let mut cur = w.start;
        loop {
            let year = TimeNode::year(cur.year);
            let month = TimeNode::month(cur.year, cur.month);
            let node = if cur.month == 1 && cur.day == 1 && self.node_window(&year).end <= w.end {
                year
            } else if cur.day == 1 && self.node_window(&month).end <= w.end {
                month
            } else {
                TimeNode::day(cur)
            };
            let end = self.node_window(&node).end;
            nodes.push(node);
            if end == w.end {
                break;
            }
            cur = self
                .next_day(&end)
                .expect("window end lies after the current node");
        }
        Ok(TimeCover { nodes })
    }

    /// Validates nodes and pairwise disjointness, then sorts canonically.
    pub fn cover_from_nodes(
        &self,
        nodes: impl IntoIterator<Item = TimeNode>,
    ) -> Result<TimeCover, TimeError> {
        let set: BTreeSet<TimeNode> = nodes.into_iter().collect();
        if set.is_empty() {
            return Err(TimeError::EmptyCover);
        }
        for n in &set {
            if !self.is_valid_node(n) {
                return Err(TimeError::InvalidDate(n.to_string()));
            }
        }
        let mut spans: Vec<(TimeWindow, TimeNode)> =
            set.iter().map(|n| (self.node_window(n), *n)).collect();
        spans.sort_by_key(|(w, _)| w.start);
        for pair in spans.windows(2) {
            if pair[1].0.start <= pair[0].0.end {
                return Err(TimeError::Overlap(pair[0].1, pair[1].1));
            }
        }
        Ok(TimeCover {
            nodes: set.into_iter().collect(),
        })
    }

    pub fn parse_day(&self, text: &str) -> Result<Day, TimeError> {
        let node: TimeNode = text.parse()?;
        match *node.components() {
            [y, m, d] => self.day(y, m as u8, d as u8),
            _ => Err(TimeError::Parse(text.to_string())),
        }
    }

    pub fn parse_window(&self, text: &str) -> Result<TimeWindow, TimeError> {
        let (a, b) = text
            .split_once("..")
            .ok_or_else(|| TimeError::Parse(text.to_string()))?;
        TimeWindow::new(self.parse_day(a.trim())?, self.parse_day(b.trim())?)
    }

    pub fn parse_node(&self, text: &str) -> Result<TimeNode, TimeError> {
        let n: TimeNode = text.parse()?;
        if self.is_valid_node(&n) {
            Ok(n)
        } else {
            Err(TimeError::InvalidDate(text.to_string()))
        }
    }
}

fn is_leap(year: u32) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

/// A calendar day. Ordering is chronological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day {
    year: u32,
    month: u8,
    day: u8,
}

impl Day {
    fn raw(year: u32, month: u8, day: u8) -> Day {
        Day { year, month, day }
    }

    pub fn year(&self) -> u32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn day(&self) -> u8 {
        self.day
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

/// A node of the time tree: `(year)`, `(year, month)` or `(year, month, day)`.
///
/// Ordering is lexicographic on the components, so a node sorts directly
/// before its descendants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeNode {
    parts: [u32; 3],
    depth: u8,
}

impl TimeNode {
    pub fn year(year: u32) -> TimeNode {
        TimeNode {
            parts: [year, 0, 0],
            depth: 1,
        }
    }

    pub fn month(year: u32, month: u8) -> TimeNode {
        TimeNode {
            parts: [year, month as u32, 0],
            depth: 2,
        }
    }

    pub fn day(d: Day) -> TimeNode {
        TimeNode {
            parts: [d.year, d.month as u32, d.day as u32],
            depth: 3,
        }
    }

    /// The label string `(tau_1, ..., tau_k)`.
    pub fn components(&self) -> &[u32] {
        &self.parts[..self.depth as usize]
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    /// True iff `self`'s components are an initial segment of `other`'s.
    pub fn is_prefix_of(&self, other: &TimeNode) -> bool {
        let (a, b) = (self.components(), other.components());
        a.len() <= b.len() && b[..a.len()] == *a
    }

    /// `2022-JUL` style label.
    pub fn label(&self) -> String {
        match *self.components() {
            [y] => format!("{y:04}"),
            [y, m] => format!("{y:04}-{}", MONTH_NAMES[m as usize - 1]),
            [y, m, d] => format!("{y:04}-{}-{d:02}", MONTH_NAMES[m as usize - 1]),
            _ => unreachable!(),
        }
    }
}

pub fn is_prefix(a: &TimeNode, b: &TimeNode) -> bool {
    a.is_prefix_of(b)
}

impl fmt::Display for TimeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.components() {
            [y] => write!(f, "{y:04}"),
            [y, m] => write!(f, "{y:04}-{m:02}"),
            [y, m, d] => write!(f, "{y:04}-{m:02}-{d:02}"),
            _ => unreachable!(),
        }
    }
}

impl FromStr for TimeNode {
    type Err = TimeError;

    /// Syntax only; day validity needs a [`Calendar`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TimeError::Parse(s.to_string());
        let fields: Vec<&str> = s.split('-').collect();
        if fields.is_empty() || fields.len() > 3 {
            return Err(err());
        }
        let number = |f: &str, max_len: usize| -> Result<u32, TimeError> {
            if f.is_empty() || f.len() > max_len || !f.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            f.parse().map_err(|_| err())
        };
        let year = number(fields[0], 4)?;
        if !(1..=MAX_YEAR).contains(&year) {
            return Err(err());
        }
        if fields.len() == 1 {
            return Ok(TimeNode::year(year));
        }
        let month = match MONTH_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(fields[1]))
        {
            Some(i) => i as u32 + 1,
            None => number(fields[1], 2)?,
        };
        if !(1..=12).contains(&month) {
            return Err(err());
        }
        if fields.len() == 2 {
            return Ok(TimeNode::month(year, month as u8));
        }
        let day = number(fields[2], 2)?;
        if !(1..=31).contains(&day) {
            return Err(err());
        }
        Ok(TimeNode::day(Day::raw(year, month as u8, day as u8)))
    }
}

/// Inclusive range of days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    pub start: Day,
    pub end: Day,
}

impl TimeWindow {
    pub fn new(start: Day, end: Day) -> Result<TimeWindow, TimeError> {
        if start > end {
            return Err(TimeError::Reversed { start, end });
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, d: &Day) -> bool {
        self.start <= *d && *d <= self.end
    }

    pub fn contains_window(&self, other: &TimeWindow) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Pairwise-disjoint set of nodes, held in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeCover {
    nodes: Vec<TimeNode>,
}

impl TimeCover {
    /// Nodes in canonical (lexicographic) order.
    pub fn nodes(&self) -> &[TimeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, n: &TimeNode) -> bool {
        self.nodes.binary_search(n).is_ok()
    }

    /// First node, in canonical order, present in both covers.
    pub fn first_common(&self, other: &TimeCover) -> Option<TimeNode> {
        self.nodes.iter().find(|n| other.contains(n)).copied()
    }

    /// Copy without `node`; `None` if that would leave the cover empty.
    pub fn without(&self, node: &TimeNode) -> Option<TimeCover> {
        let nodes: Vec<TimeNode> = self.nodes.iter().filter(|n| *n != node).copied().collect();
        if nodes.is_empty() {
            None
        } else {
            Some(TimeCover { nodes })
        }
    }
}

impl fmt::Display for TimeCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Largest cover of a window spanning `years` calendar years: up to 30 loose
/// days and 11 loose months on each side plus every full year between.
pub fn worst_case_cover_size(years: usize) -> usize {
    assert!(years >= 1, "at least one year");
    60 + 22 + (years - 1)
}
