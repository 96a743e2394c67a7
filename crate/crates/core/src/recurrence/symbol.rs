//! Commutative symbol algebra in the variables `a_i` and `b_{i+1,i}`.
//!
//! A monomial of length `n` is a tiling of the positions `1..=n` by
//! singletons `a_i` and adjacent pairs `b_{i+1,i}`. Monomials are stored
//! position-descending, which is also the operator order used by
//! [`quantize`](super::quantize).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One factor of a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    /// `a_i`, covering position `i`.
    A(usize),
    /// `b_{i+1,i}`, covering positions `i` and `i + 1`. Stores the lower index.
    B(usize),
}

impl Token {
    pub fn lowest(self) -> usize {
        match self {
            Token::A(i) | Token::B(i) => i,
        }
    }

    pub fn highest(self) -> usize {
        match self {
            Token::A(i) => i,
            Token::B(i) => i + 1,
        }
    }
}

impl PartialOrd for Token {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// Position-descending: the token covering the highest position sorts first.
impl Ord for Token {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .lowest()
            .cmp(&self.lowest())
            .then_with(|| other.highest().cmp(&self.highest()))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::A(i) => write!(f, "a({i})"),
            Token::B(i) => write!(f, "b({},{})", i + 1, i),
        }
    }
}

/// A monomial with an exact integer coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolMonomial {
    tokens: Vec<Token>,
    pub coeff: i64,
}

impl SymbolMonomial {
    /// Builds a monomial, checking that the tokens tile `1..=n` exactly.
    pub fn new(n: usize, mut tokens: Vec<Token>, coeff: i64) -> Result<Self> {
        tokens.sort();
        let mut covered = vec![false; n + 1];
        for t in &tokens {
            if t.lowest() == 0 || t.highest() > n {
                return Err(Error::IndexOutOfRange {
                    index: t.highest().max(t.lowest()),
                    max: n,
                });
            }
            for p in t.lowest()..=t.highest() {
                if covered[p] {
                    return Err(Error::Parse(format!("position {p} covered twice")));
                }
                covered[p] = true;
            }
        }
        if let Some(p) = (1..=n).find(|&p| !covered[p]) {
            return Err(Error::Parse(format!("position {p} not covered")));
        }
        Ok(Self { tokens, coeff })
    }

    /// `a_n ... a_1`.
    pub fn full_product(n: usize) -> Self {
        Self {
            tokens: (1..=n).rev().map(Token::A).collect(),
            coeff: 1,
        }
    }

    /// Tokens in position-descending order.
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn has_a(&self, i: usize) -> bool {
        self.tokens.contains(&Token::A(i))
    }

    /// Number of positions covered.
    pub fn len(&self) -> usize {
        self.tokens.iter().map(|t| t.highest() - t.lowest() + 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Covered positions, ascending. Used by the partition invariant checks.
    pub fn positions(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self
            .tokens
            .iter()
            .flat_map(|t| t.lowest()..=t.highest())
            .collect();
        p.sort_unstable();
        p
    }

    fn product_string(&self) -> String {
        if self.tokens.is_empty() {
            return "1".into();
        }
        self.tokens
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Display for SymbolMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coeff, self.product_string())
    }
}

/// Formal sum of monomials over a common length `n`. Identical factor
/// lists are merged, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymbolPolynomial {
    n: usize,
    terms: BTreeMap<Vec<Token>, i64>,
}

impl SymbolPolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_monomial(n: usize, m: SymbolMonomial) -> Self {
        let mut p = Self::zero(n);
        p.add_monomial(m);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_monomial(&mut self, m: SymbolMonomial) {
        if m.coeff == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m.tokens) {
            Entry::Vacant(e) => {
                e.insert(m.coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += m.coeff;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &SymbolPolynomial) {
        for m in other.monomials() {
            self.add_monomial(m);
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = SymbolMonomial> + '_ {
        self.terms.iter().map(|(t, &c)| SymbolMonomial {
            tokens: t.clone(),
            coeff: c,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies every monomial by an extra token on the left (higher positions).
    pub fn left_multiply(&self, token: Token, new_n: usize) -> Self {
        let mut out = Self::zero(new_n);
        for (t, &c) in &self.terms {
            let mut tokens = Vec::with_capacity(t.len() + 1);
            tokens.push(token);
            tokens.extend_from_slice(t);
            out.terms.insert(tokens, c);
        }
        out
    }

    /// Plain-text form: one monomial per line, `coeff b(4,3)*a(2)*a(1)`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in self.monomials() {
            s.push_str(&m.to_string());
            s.push('\n');
        }
        s
    }

    /// Inverse of [`to_text`](Self::to_text).
    pub fn parse_text(n: usize, text: &str) -> Result<Self> {
        let mut p = Self::zero(n);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (coeff, body) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse(format!("missing coefficient in `{line}`")))?;
            let coeff: i64 = coeff
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{coeff}`")))?;
            let tokens = if body.trim() == "1" {
                Vec::new()
            } else {
                body.trim()
                    .split('*')
                    .map(|t| t.trim().parse::<Token>())
                    .collect::<Result<Vec<_>>>()?
            };
            p.add_monomial(SymbolMonomial::new(n, tokens, coeff)?);
        }
        Ok(p)
    }
}

impl FromStr for Token {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad token `{s}`"));
        let inner = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(bad)
        };
        if s.starts_with("a(") {
            let i = inner("a(")?.parse().map_err(|_| bad())?;
            Ok(Token::A(i))
        } else if s.starts_with("b(") {
            let (hi, lo) = inner("b(")?.split_once(',').ok_or_else(bad)?;
            let hi: usize = hi.trim().parse().map_err(|_| bad())?;
            let lo: usize = lo.trim().parse().map_err(|_| bad())?;
            if hi != lo + 1 {
                return Err(bad());
            }
            Ok(Token::B(lo))
        } else {
            Err(bad())
        }
    }
}

/// `delta_i = b_{i+1,i} d/da_{i+1} d/da_i`, applied to every monomial.
///
/// Monomials lacking `a_{i+1}` or `a_i` are annihilated.
pub fn delta_apply(i: usize, p: &SymbolPolynomial) -> Result<SymbolPolynomial> {
    let n = p.n();
    if i == 0 || i + 1 > n {
        return Err(Error::IndexOutOfRange {
            index: i,
            max: n.saturating_sub(1),
        });
    }
    let mut out = SymbolPolynomial::zero(n);
    for m in p.monomials() {
        if !(m.has_a(i) && m.has_a(i + 1)) {
            continue;
        }
        let mut tokens: Vec<Token> = m
            .tokens()
            .iter()
            .copied()
            .filter(|&t| t != Token::A(i) && t != Token::A(i + 1))
            .collect();
        tokens.push(Token::B(i));
        out.add_monomial(SymbolMonomial::new(n, tokens, m.coeff)?);
    }
    Ok(out)
}

/// Symbolic direct recurrence `p_n = a_n p_{n-1} + b_{n,n-1} p_{n-2}`
/// with `p_0 = 1`, `p_1 = a_1`.
pub fn expand_by_recurrence(n: usize) -> SymbolPolynomial {
    let mut prev2 = SymbolPolynomial::from_monomial(0, SymbolMonomial::full_product(0));
    if n == 0 {
        return prev2;
    }
    let mut prev1 = SymbolPolynomial::from_monomial(1, SymbolMonomial::full_product(1));
    for m in 2..=n {
        let mut next = prev1.left_multiply(Token::A(m), m);
        next.add(&prev2.left_multiply(Token::B(m - 1), m));
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}
