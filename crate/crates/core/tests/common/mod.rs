//! Helpers shared by the integration tests. Oracles here are written against
//! first principles rather than the library's own algorithms.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, RngCore};

use tsabe::group::{BilinearGroup, Scalar, TransparentSuite};
use tsabe::lsss::{Attribute, Policy};
use tsabe::scheme::{Ciphertext, MasterKey, PrivateKey, PublicParams};
use tsabe::time::{Calendar, Day, TimeNode, TimeWindow};

pub fn attr(label: &str) -> Attribute {
    Attribute::new(label).expect("valid label")
}

pub fn universe(size: usize) -> Vec<Attribute> {
    (0..size).map(|i| attr(&format!("a{i}"))).collect()
}

pub fn set(labels: &[&str]) -> BTreeSet<Attribute> {
    labels.iter().map(|l| attr(l)).collect()
}

/// Random AND/OR tree with exactly `leaves` leaves over `universe`.
pub fn random_policy(rng: &mut dyn RngCore, universe: &[Attribute], leaves: usize) -> Policy {
    if leaves == 1 {
        return Policy::Leaf(universe[rng.gen_range(0..universe.len())].clone());
    }
    let left = rng.gen_range(1..leaves);
    let a = random_policy(rng, universe, left);
    let b = random_policy(rng, universe, leaves - left);
    if rng.gen_bool(0.5) {
        Policy::and(a, b)
    } else {
        Policy::or(a, b)
    }
}

/// Boolean value of `p` on `s`, by direct recursion.
pub fn holds(p: &Policy, s: &BTreeSet<Attribute>) -> bool {
    match p {
        Policy::Leaf(a) => s.contains(a),
        Policy::And(a, b) => holds(a, s) && holds(b, s),
        Policy::Or(a, b) => holds(a, s) || holds(b, s),
    }
}

/// A random satisfying set: both sides of an AND, one side of an OR.
pub fn satisfying_set(rng: &mut dyn RngCore, p: &Policy) -> BTreeSet<Attribute> {
    fn walk(rng: &mut dyn RngCore, p: &Policy, out: &mut BTreeSet<Attribute>) {
        match p {
            Policy::Leaf(a) => {
                out.insert(a.clone());
            }
            Policy::And(a, b) => {
                walk(rng, a, out);
                walk(rng, b, out);
            }
            Policy::Or(a, b) => {
                if rng.gen_bool(0.5) {
                    walk(rng, a, out)
                } else {
                    walk(rng, b, out)
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(rng, p, &mut out);
    out
}

/// A random non-satisfying subset of `universe` (possibly empty).
pub fn failing_set(rng: &mut dyn RngCore, p: &Policy, universe: &[Attribute]) -> BTreeSet<Attribute> {
    for density in [0.7, 0.5, 0.3, 0.1] {
        for _ in 0..8 {
            let s: BTreeSet<Attribute> = universe.iter().filter(|_| rng.gen_bool(density)).cloned().collect();
            if !holds(p, &s) {
                return s;
            }
        }
    }
    BTreeSet::new()
}

fn leap(y: u32) -> bool {
    (y.is_multiple_of(4) && !y.is_multiple_of(100)) || y.is_multiple_of(400)
}

pub fn month_len(y: u32, m: u32) -> u32 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        _ if leap(y) => 29,
        _ => 28,
    }
}

/// Every calendar day of `years` as `(y, m, d)`.
pub fn days_of(years: std::ops::RangeInclusive<u32>) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for y in years {
        for m in 1..=12 {
            for d in 1..=month_len(y, m) {
                out.push((y, m, d));
            }
        }
    }
    out
}

pub fn to_day((y, m, d): (u32, u32, u32)) -> Day {
    Calendar::Gregorian.day(y, m as u8, d as u8).expect("valid date")
}

/// Minimum number of year, month or day blocks that exactly tile
/// `days[lo..=hi]`, by dynamic programming over every admissible block.
pub fn brute_force_cover_size(days: &[(u32, u32, u32)], lo: usize, hi: usize) -> usize {
    let n = hi - lo + 1;
    let mut best = vec![usize::MAX; n + 1];
    best[n] = 0;
    for i in (0..n).rev() {
        let (y, m, d) = days[lo + i];
        let mut lens = vec![1];
        if d == 1 {
            lens.push(month_len(y, m) as usize);
        }
        if d == 1 && m == 1 {
            lens.push(if leap(y) { 366 } else { 365 });
        }
        for len in lens {
            if i + len <= n && best[i + len] != usize::MAX {
                best[i] = best[i].min(best[i + len] + 1);
            }
        }
    }
    best[0]
}

/// Days covered by `node`, as `(y, m, d)`.
pub fn node_days(node: &TimeNode) -> Vec<(u32, u32, u32)> {
    match *node.components() {
        [y] => days_of(y..=y),
        [y, m] => (1..=month_len(y, m)).map(|d| (y, m, d)).collect(),
        [y, m, d] => vec![(y, m, d)],
        _ => unreachable!(),
    }
}

pub fn window(a: (u32, u32, u32), b: (u32, u32, u32)) -> TimeWindow {
    TimeWindow::new(to_day(a), to_day(b)).expect("ordered window")
}

pub fn log(g: &TransparentSuite, e: &<TransparentSuite as BilinearGroup>::Source) -> Scalar {
    g.source_log(e).expect("transparent")
}

/// Step (d) residual log of the paper-faithful scheme, rebuilt from the
/// discrete logs of the artifacts:
/// `sum_i omega_i lambda_i beta eta_rho(i) (c1 - beta)` where `c1` is the log
/// of `C_{1,tau}`, `h_j = g^{eta_j}` and `D_i = g^{beta lambda_i}`.
pub fn paper_collapse_residual(
    g: &TransparentSuite,
    pk: &PublicParams<TransparentSuite>,
    mk: &MasterKey,
    sk: &PrivateKey<TransparentSuite>,
    ct: &Ciphertext<TransparentSuite>,
    node: &TimeNode,
    omegas: &[(usize, Scalar)],
) -> Scalar {
    let inv_beta = mk.beta.inverse().expect("beta nonzero");
    let (_, _, c1) = ct.c_time.iter().find(|(n, _, _)| n == node).expect("node in ct");
    let c1 = log(g, c1);
    let mut acc = g.scalar(0);
    for (row, omega) in omegas {
        let j = pk.attribute_index(sk.access.rho(*row)).expect("known attribute");
        let eta = log(g, &pk.h_beta[j]) * inv_beta;
        let lambda = log(g, &sk.d_rows[*row].0) * inv_beta;
        acc = acc + *omega * lambda * mk.beta * eta * (c1 - mk.beta);
    }
    acc
}
