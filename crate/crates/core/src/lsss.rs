//! Monotone AND/OR policies compiled to linear secret-sharing matrices.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use thiserror::Error;

use crate::group::{uniform_scalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("empty policy")]
    Empty,
    #[error("invalid attribute label {0:?}")]
    BadAttribute(String),
    #[error("unexpected token {found:?} at position {pos}")]
    Unexpected { found: String, pos: usize },
    #[error("unexpected end of policy")]
    UnexpectedEnd,
}

/// Attribute label such as a subscription tier or a content rating.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute(String);

impl Attribute {
    pub fn new(label: impl Into<String>) -> Result<Attribute, PolicyError> {
        let label = label.into();
        let ok = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_alphanumeric() || "_-.:@/".contains(c))
            && !is_keyword(&label);
        if ok {
            Ok(Attribute(label))
        } else {
            Err(PolicyError::BadAttribute(label))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Attribute {
    type Err = PolicyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::new(s)
    }
}

fn is_keyword(s: &str) -> bool {
    s.eq_ignore_ascii_case("and") || s.eq_ignore_ascii_case("or")
}

/// Parses `a,b,c` into an attribute set; blank input gives the empty set.
pub fn parse_attribute_set(text: &str) -> Result<BTreeSet<Attribute>, PolicyError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Attribute::new)
        .collect()
}

/// Boolean formula over attributes without negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    Leaf(Attribute),
    And(Box<Policy>, Box<Policy>),
    Or(Box<Policy>, Box<Policy>),
}

impl Policy {
    pub fn leaf(label: &str) -> Result<Policy, PolicyError> {
        Ok(Policy::Leaf(Attribute::new(label)?))
    }

    pub fn and(a: Policy, b: Policy) -> Policy {
        Policy::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Policy, b: Policy) -> Policy {
        Policy::Or(Box::new(a), Box::new(b))
    }

    pub fn evaluate(&self, attrs: &BTreeSet<Attribute>) -> bool {
        match self {
            Policy::Leaf(a) => attrs.contains(a),
            Policy::And(a, b) => a.evaluate(attrs) && b.evaluate(attrs),
            Policy::Or(a, b) => a.evaluate(attrs) || b.evaluate(attrs),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Policy::Leaf(_) => 1,
            Policy::And(a, b) | Policy::Or(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    pub fn attributes(&self) -> BTreeSet<Attribute> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<Attribute>) {
        match self {
            Policy::Leaf(a) => {
                out.insert(a.clone());
            }
            Policy::And(a, b) | Policy::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Leaf(a) => write!(f, "{a}"),
            Policy::And(a, b) => write!(f, "({a} AND {b})"),
            Policy::Or(a, b) => write!(f, "({a} OR {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    And,
    Or,
    Ident(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, PolicyError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '(' {
            out.push((pos, Token::Open));
            chars.next();
        } else if c == ')' {
            out.push((pos, Token::Close));
            chars.next();
        } else {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                word.push(c);
                chars.next();
            }
            let tok = if word.eq_ignore_ascii_case("and") {
                Token::And
            } else if word.eq_ignore_ascii_case("or") {
                Token::Or
            } else {
                Attribute::new(word.clone())?;
                Token::Ident(word)
            };
            out.push((pos, tok));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(_, t)| t)
    }

    fn unexpected(&self) -> PolicyError {
        match self.tokens.get(self.at) {
            Some((pos, t)) => PolicyError::Unexpected {
                found: format!("{t:?}"),
                pos: *pos,
            },
            None => PolicyError::UnexpectedEnd,
        }
    }

    // expr := term (OR term)*
    fn expr(&mut self) -> Result<Policy, PolicyError> {
        let mut left = self.term()?;
        while self.peek() == Some(&Token::Or) {
            self.at += 1;
            left = Policy::or(left, self.term()?);
        }
        Ok(left)
    }

    // term := factor (AND factor)*
    fn term(&mut self) -> Result<Policy, PolicyError> {
        let mut left = self.factor()?;
        while self.peek() == Some(&Token::And) {
            self.at += 1;
            left = Policy::and(left, self.factor()?);
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<Policy, PolicyError> {
        match self.peek().cloned() {
            Some(Token::Ident(name)) => {
                self.at += 1;
                Policy::leaf(&name)
            }
            Some(Token::Open) => {
                self.at += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.unexpected());
                }
                self.at += 1;
                Ok(inner)
            }
            _ => Err(self.unexpected()),
        }
    }
}

impl FromStr for Policy {
    type Err = PolicyError;

    /// `AND` binds tighter than `OR`; keywords are case-insensitive.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(text)?;
        if tokens.is_empty() {
            return Err(PolicyError::Empty);
        }
        let mut p = Parser { tokens, at: 0 };
        let policy = p.expr()?;
        if p.at != p.tokens.len() {
            return Err(p.unexpected());
        }
        Ok(policy)
    }
}

/// LSSS matrix `M` (l x n) with row labelling `rho`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessStructure {
    rows: Vec<Vec<Scalar>>,
    rho: Vec<Attribute>,
    modulus: u64,
}

impl AccessStructure {
    /// Builds from explicit rows; every row must have the same width.
    pub fn from_rows(
        rows: Vec<Vec<Scalar>>,
        rho: Vec<Attribute>,
        modulus: u64,
    ) -> Option<AccessStructure> {
        let n = rows.first()?.len();
        let consistent = n >= 1
            && rows.len() == rho.len()
            && rows
                .iter()
                .all(|r| r.len() == n && r.iter().all(|s| s.modulus() == modulus));
        consistent.then_some(AccessStructure { rows, rho, modulus })
    }

    /// Number of rows `l`.
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns `n`.
    pub fn columns(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.rows[i]
    }

    pub fn rho(&self, i: usize) -> &Attribute {
        &self.rho[i]
    }

    pub fn labels(&self) -> &[Attribute] {
        &self.rho
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Rows whose attribute is in `attrs`, i.e. the index set `I`.
    pub fn matching_rows(&self, attrs: &BTreeSet<Attribute>) -> Vec<usize> {
        (0..self.rows()).filter(|&i| attrs.contains(&self.rho[i])).collect()
    }
}

/// Vector-labelling conversion: the root carries `(1)`; an AND gate with
/// label `v` hands `v || 1` to its left child and `0..0 || -1` to its right;
/// an OR gate copies its label to both children.
pub fn compile(policy: &Policy, modulus: u64) -> AccessStructure {
    fn walk(p: &Policy, label: Vec<i64>, counter: &mut usize, out: &mut Vec<(Vec<i64>, Attribute)>) {
        match p {
            Policy::Leaf(a) => out.push((label, a.clone())),
            Policy::Or(l, r) => {
                walk(l, label.clone(), counter, out);
                walk(r, label, counter, out);
            }
            Policy::And(l, r) => {
                let mut left = label;
                left.resize(*counter, 0);
                left.push(1);
                let mut right = vec![0; *counter];
                right.push(-1);
                *counter += 1;
                walk(l, left, counter, out);
                walk(r, right, counter, out);
            }
        }
    }

    let mut counter = 1;
    let mut labelled = Vec::new();
    walk(policy, vec![1], &mut counter, &mut labelled);
    let (rows, rho) = labelled
        .into_iter()
        .map(|(mut v, a)| {
            v.resize(counter, 0);
            let row = v.into_iter().map(|x| Scalar::from_i64(x, modulus)).collect();
            (row, a)
        })
        .unzip();
    AccessStructure { rows, rho, modulus }
}

/// Masking vector `v = (w, y_2, ..., y_n)` and shares `lambda_i = v . M_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSet {
    pub vector: Vec<Scalar>,
    pub shares: Vec<Scalar>,
}

impl ShareSet {
    pub fn secret(&self) -> Scalar {
        self.vector[0]
    }
}

pub fn share(access: &AccessStructure, secret: Scalar, rng: &mut dyn RngCore) -> ShareSet {
    let p = access.modulus;
    let mut vector = vec![secret];
    for _ in 1..access.columns() {
        vector.push(uniform_scalar(rng, p));
    }
    share_with_vector(access, vector)
}

/// Shares for an explicit masking vector; `vector.len()` must equal `n`.
pub fn share_with_vector(access: &AccessStructure, vector: Vec<Scalar>) -> ShareSet {
    assert_eq!(vector.len(), access.columns(), "masking vector width");
    let shares = access
        .rows
        .iter()
        .map(|row| row.iter().zip(&vector).map(|(m, v)| *m * *v).sum())
        .collect();
    ShareSet { vector, shares }
}

/// Coefficients `omega_i` over `I = { i : rho(i) in attrs }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficients {
    /// `(row, omega)` for every row in `I`, ascending by row; non-pivot rows
    /// carry a zero coefficient.
    pub terms: Vec<(usize, Scalar)>,
}

impl Coefficients {
    pub fn rows(&self) -> Vec<usize> {
        self.terms.iter().map(|(i, _)| *i).collect()
    }

    /// `sum omega_i * lambda_i`.
    pub fn combine(&self, shares: &ShareSet) -> Scalar {
        let p = shares.vector[0].modulus();
        self.terms
            .iter()
            .fold(Scalar::zero(p), |acc, (i, w)| acc + *w * shares.shares[*i])
    }
}

/// Solves `x^T M_I = (1, 0, ..., 0)` by Gaussian elimination over Z_p, with
/// free variables set to zero. `None` if `attrs` does not satisfy `access`.
pub fn reconstruct_coeffs(
    access: &AccessStructure,
    attrs: &BTreeSet<Attribute>,
) -> Option<Coefficients> {
    let p = access.modulus;
    let rows = access.matching_rows(attrs);
    if rows.is_empty() {
        return None;
    }
    let n = access.columns();
    let m = rows.len();
    // augmented system (M_I)^T x = e_1: n equations in m unknowns
    let mut a: Vec<Vec<Scalar>> = (0..n)
        .map(|r| {
            let mut eq: Vec<Scalar> = rows.iter().map(|&i| access.rows[i][r]).collect();
            eq.push(if r == 0 { Scalar::one(p) } else { Scalar::zero(p) });
            eq
        })
        .collect();

    let mut pivots = Vec::new();
    let mut lead = 0;
    for col in 0..m {
        let Some(pr) = (lead..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(lead, pr);
        let inv = a[lead][col].inverse().expect("nonzero pivot");
        for x in a[lead].iter_mut() {
            *x = *x * inv;
        }
        let pivot_row = a[lead].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != lead && !row[col].is_zero() {
                let factor = row[col];
                for (x, v) in row.iter_mut().zip(&pivot_row) {
                    *x = *x - factor * *v;
                }
            }
        }
        pivots.push(col);
        lead += 1;
        if lead == n {
            break;
        }
    }
    // rows below the pivots read 0 = b_r
    if a[lead..].iter().any(|eq| !eq[m].is_zero()) {
        return None;
    }
    let mut omega = vec![Scalar::zero(p); m];
    for (r, &col) in pivots.iter().enumerate() {
        omega[col] = a[r][m];
    }
    Some(Coefficients {
        terms: rows.into_iter().zip(omega).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const P: u64 = 101;

    fn s(v: i64) -> Scalar {
        Scalar::from_i64(v, P)
    }

    fn attrs(list: &[&str]) -> BTreeSet<Attribute> {
        list.iter().map(|a| Attribute::new(*a).unwrap()).collect()
    }

    fn matrix(a: &AccessStructure) -> Vec<Vec<i64>> {
        (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .map(|x| {
                        let v = x.value() as i64;
                        if v > P as i64 / 2 {
                            v - P as i64
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn and_gate_matrix() {
        let a = compile(&"A AND B".parse().unwrap(), P);
        assert_eq!(matrix(&a), vec![vec![1, 1], vec![0, -1]]);
        assert_eq!(a.rho(0).as_str(), "A");
        assert_eq!(a.rho(1).as_str(), "B");
    }

    #[test]
    fn or_gate_and_leaf_matrices() {
        let a = compile(&"A OR B".parse().unwrap(), P);
        assert_eq!(matrix(&a), vec![vec![1], vec![1]]);
        let a = compile(&"A".parse().unwrap(), P);
        assert_eq!(matrix(&a), vec![vec![1]]);
    }

    #[test]
    fn share_examples() {
        let and = compile(&"A AND B".parse().unwrap(), P);
        let set = share_with_vector(&and, vec![s(7), s(3)]);
        assert_eq!(set.shares, vec![s(10), s(98)]);
        let or = compile(&"A OR B".parse().unwrap(), P);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let set = share(&or, s(7), &mut rng);
        assert_eq!(set.shares, vec![s(7), s(7)]);
        let nested = compile(&"(A OR B) AND (C AND D)".parse().unwrap(), P);
        let mut v = vec![s(5)];
        v.resize(nested.columns(), s(0));
        let set = share_with_vector(&nested, v);
        for i in 0..nested.rows() {
            assert_eq!(set.shares[i], s(5) * nested.row(i)[0]);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let and = compile(&"A AND B".parse().unwrap(), P);
        let c = reconstruct_coeffs(&and, &attrs(&["A", "B"])).unwrap();
        assert_eq!(c.terms, vec![(0, s(1)), (1, s(1))]);
        assert!(reconstruct_coeffs(&and, &attrs(&["A"])).is_none());
        let or = compile(&"A OR B".parse().unwrap(), P);
        let c = reconstruct_coeffs(&or, &attrs(&["B"])).unwrap();
        assert_eq!(c.terms, vec![(1, s(1))]);
        let c = reconstruct_coeffs(&or, &attrs(&["A", "B"])).unwrap();
        assert_eq!(c.terms, vec![(0, s(1)), (1, s(0))]);
        assert!(reconstruct_coeffs(&or, &attrs(&[])).is_none());
    }

    #[test]
    fn repeated_attribute_rows() {
        let a = compile(&"(A AND B) OR (A AND C)".parse().unwrap(), P);
        assert_eq!(a.rows(), 4);
        assert!(reconstruct_coeffs(&a, &attrs(&["A"])).is_none());
        let c = reconstruct_coeffs(&a, &attrs(&["A", "C"])).unwrap();
        let set = share_with_vector(&a, vec![s(9), s(4), s(60)]);
        assert_eq!(c.combine(&set), s(9));
    }

    #[test]
    fn parser() {
        let p: Policy = "a or b and c".parse().unwrap();
        assert_eq!(p.to_string(), "(a OR (b AND c))");
        let p: Policy = "(platinum OR gold) AND pg-13".parse().unwrap();
        assert_eq!(p.leaf_count(), 3);
        assert_eq!("".parse::<Policy>().unwrap_err(), PolicyError::Empty);
        assert!("A AND".parse::<Policy>().is_err());
        assert!("(A OR B".parse::<Policy>().is_err());
        assert!("A B".parse::<Policy>().is_err());
        assert!("A ! B".parse::<Policy>().is_err());
    }

    #[test]
    fn attribute_sets() {
        let set = parse_attribute_set("gold, pg-13,,").unwrap();
        assert_eq!(set.len(), 2);
        assert!(parse_attribute_set("").unwrap().is_empty());
        assert!(parse_attribute_set("and").is_err());
    }
}
