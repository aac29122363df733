//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Everything downstream (certificates, constructions, verification) works
//! with these values. Coefficients are `BigRational` and all operations are
//! exact; there is no floating point polynomial type.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational coefficient.
pub type Rat = BigRational;

/// Build a rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Build a rational from an integer.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands have different variable counts: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("point length {0} does not match variable count {1}")]
    PointLength(usize, usize),
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("variable index {0} out of range for {1} variables")]
    BadVariable(usize, usize),
    #[error("index {0} out of range 1..={1}")]
    IndexRange(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Exponent vector. Length equals the ambient variable count.
///
/// Ordered by graded lexicographic order so that serialized polynomials are
/// byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// True when every exponent is even.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|&e| e % 2 == 0)
    }

    /// Halve all exponents; caller guarantees evenness.
    pub fn half(&self) -> Monomial {
        Monomial(self.0.iter().map(|&e| e / 2).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Integer weights per variable for weighted degree computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading(pub Vec<i64>);

impl Grading {
    pub fn standard(nvars: usize) -> Self {
        Grading(vec![1; nvars])
    }
}

/// Sparse polynomial: monomial -> nonzero rational coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::constant(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, idx), Rat::one());
        p
    }

    pub fn monomial(nvars: usize, exps: &[u32], coef: Rat) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        if !coef.is_zero() {
            p.terms.insert(Monomial(exps.to_vec()), coef);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rat {
        self.coefficient(&Monomial::constant(self.nvars))
    }

    /// Total degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_nvars(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            Err(PolyError::NvarsMismatch(self.nvars, other.nvars))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.check_nvars(other).expect("nvars mismatch in add");
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        self.check_nvars(other).expect("nvars mismatch in mul");
        let mut r = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                r.add_term(ma.mul(mb), ca * cb);
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn square(&self) -> Polynomial {
        self.mul(self)
    }

    pub fn evaluate(&self, point: &[Rat]) -> Result<Rat, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength(point.len(), self.nvars));
        }
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    v *= &point[i];
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Sum of the terms of maximal total degree.
    pub fn highest_degree_part(&self) -> Result<Polynomial, PolyError> {
        let d = self.degree().ok_or(PolyError::ZeroPolynomial)?;
        Ok(Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        })
    }

    /// Homogenize by a fresh variable at index 0. With `even` the result has
    /// degree `2*ceil(deg/2)`, otherwise degree `deg`.
    pub fn homogenize(&self, even: bool) -> Result<Polynomial, PolyError> {
        let d = self.degree().ok_or(PolyError::ZeroPolynomial)?;
        let target = if even { d + d % 2 } else { d };
        let mut r = Polynomial::zero(self.nvars + 1);
        for (m, c) in &self.terms {
            let mut e = Vec::with_capacity(self.nvars + 1);
            e.push(target - m.degree());
            e.extend_from_slice(&m.0);
            r.add_term(Monomial(e), c.clone());
        }
        Ok(r)
    }

    /// Substitute 1 for the chosen variable and remove it.
    pub fn dehomogenize(&self, var: usize) -> Result<Polynomial, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::BadVariable(var, self.nvars));
        }
        let mut r = Polynomial::zero(self.nvars - 1);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e.remove(var);
            r.add_term(Monomial(e), c.clone());
        }
        Ok(r)
    }

    /// Exact substitution `x_i -> tau_i * x_i` with `tau_i` in {-1, +1}.
    pub fn sign_flip(&self, tau: &[i8]) -> Result<Polynomial, PolyError> {
        if tau.len() != self.nvars {
            return Err(PolyError::PointLength(tau.len(), self.nvars));
        }
        let mut r = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut flips = 0u32;
            for (i, &e) in m.0.iter().enumerate() {
                if tau[i] < 0 {
                    flips += e;
                }
            }
            let c = if flips % 2 == 1 { -c } else { c.clone() };
            r.add_term(m.clone(), c);
        }
        Ok(r)
    }

    /// Substitute a polynomial for one variable.
    pub fn substitute(&self, var: usize, q: &Polynomial) -> Result<Polynomial, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::BadVariable(var, self.nvars));
        }
        self.check_nvars(q)?;
        // powers of q, filled on demand
        let mut powers: Vec<Polynomial> = vec![Polynomial::one(self.nvars)];
        let mut r = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap().mul(q);
                powers.push(next);
            }
            let mut rest = m.0.clone();
            rest[var] = 0;
            let base = Polynomial::monomial(self.nvars, &rest, c.clone());
            r = r.add(&base.mul(&powers[e]));
        }
        Ok(r)
    }

    /// Split into even and odd parts with respect to one variable. Both
    /// outputs use the variable slot as a placeholder for its square:
    /// `p = e(.., v -> v^2) + v * o(.., v -> v^2)`.
    pub fn even_odd_split(&self, var: usize) -> Result<(Polynomial, Polynomial), PolyError> {
        if var >= self.nvars {
            return Err(PolyError::BadVariable(var, self.nvars));
        }
        let mut even = Polynomial::zero(self.nvars);
        let mut odd = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            if e[var] % 2 == 0 {
                e[var] /= 2;
                even.add_term(Monomial(e), c.clone());
            } else {
                e[var] /= 2;
                odd.add_term(Monomial(e), c.clone());
            }
        }
        Ok((even, odd))
    }

    /// Undo `even_odd_split`: substitute `v^2` for the placeholder in both
    /// parts and recombine.
    pub fn recompose_even_odd(
        even: &Polynomial,
        odd: &Polynomial,
        var: usize,
    ) -> Result<Polynomial, PolyError> {
        let nvars = even.nvars;
        let sq = Polynomial::var(nvars, var).square();
        let e = even.substitute(var, &sq)?;
        let o = odd.substitute(var, &sq)?;
        Ok(e.add(&Polynomial::var(nvars, var).mul(&o)))
    }

    pub fn weighted_degree(&self, g: &Grading) -> Result<i64, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        Ok(self
            .terms
            .keys()
            .map(|m| {
                m.0.iter()
                    .zip(&g.0)
                    .map(|(&e, &w)| e as i64 * w)
                    .sum::<i64>()
            })
            .max()
            .unwrap())
    }

    /// True when every term has an even exponent in `var`.
    pub fn is_even_in(&self, var: usize) -> bool {
        self.terms.keys().all(|m| m.0[var] % 2 == 0)
    }

    /// Leading coefficient in the graded lexicographic term order.
    pub fn leading_coefficient(&self) -> Option<&Rat> {
        self.terms.iter().next_back().map(|(_, c)| c)
    }
}

/// Elementary symmetric polynomial `e_k` of the given polynomials.
pub fn elementary_symmetric(ps: &[Polynomial], k: usize) -> Result<Polynomial, PolyError> {
    if k == 0 || k > ps.len() {
        return Err(PolyError::IndexRange(k, ps.len()));
    }
    let nvars = ps[0].nvars;
    // e[j] after processing a prefix of the inputs
    let mut e: Vec<Polynomial> = (0..=k)
        .map(|j| {
            if j == 0 {
                Polynomial::one(nvars)
            } else {
                Polynomial::zero(nvars)
            }
        })
        .collect();
    for p in ps {
        for j in (1..=k).rev() {
            let add = e[j - 1].mul(p);
            e[j] = e[j].add(&add);
        }
    }
    Ok(e.pop().unwrap())
}

/// All exponent vectors of the given total degree, in lexicographic order.
pub fn monomials_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Monomial>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(cur, pos + 1, left - e, out);
        }
    }
    if nvars == 0 {
        return out;
    }
    rec(&mut cur, 0, degree, &mut out);
    out
}

/// `x_0^2 + ... + x_{n-1}^2` in `nvars` variables.
pub fn sum_of_squares_poly(nvars: usize) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for i in 0..nvars {
        p = p.add(&Polynomial::var(nvars, i).square());
    }
    p
}

/// `x_0 + ... + x_{n-1}`.
pub fn sum_of_vars_poly(nvars: usize) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for i in 0..nvars {
        p = p.add(&Polynomial::var(nvars, i));
    }
    p
}

// ---------------------------------------------------------------------------
// Text grammar: terms joined by `+`/`-`; a term is a coefficient (`a` or
// `a/b`) and/or `*`-separated `var^exp` factors. Example: `3/2*x^2*y - y + 7`.
// ---------------------------------------------------------------------------

fn fmt_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl Polynomial {
    /// Render with the given variable names, descending graded-lex order.
    pub fn display(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_constant() {
                factors.push(fmt_rat(&abs));
            }
            for (v, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(names[v].clone());
                } else if e > 1 {
                    factors.push(format!("{}^{}", names[v], e));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Parse the polynomial grammar against a fixed list of variable names.
    pub fn parse(src: &str, names: &[String]) -> Result<Polynomial, PolyError> {
        let nvars = names.len();
        let mut p = Polynomial::zero(nvars);
        let src = src.trim();
        if src.is_empty() {
            return Err(PolyError::Parse("empty polynomial".into()));
        }
        if !src.is_ascii() {
            return Err(PolyError::Parse("non-ascii input".into()));
        }
        let bytes: Vec<char> = src.chars().collect();
        let mut i = 0usize;
        let mut term_start = true;
        while i < bytes.len() {
            // read sign
            while i < bytes.len() && bytes[i].is_whitespace() {
                i += 1;
            }
            if i >= bytes.len() {
                break;
            }
            let mut sign = 1i64;
            if bytes[i] == '+' {
                i += 1;
            } else if bytes[i] == '-' {
                sign = -1;
                i += 1;
            } else if !term_start {
                return Err(PolyError::Parse(format!(
                    "expected '+' or '-' at position {i}"
                )));
            }
            term_start = false;
            while i < bytes.len() && bytes[i].is_whitespace() {
                i += 1;
            }
            // read one term: factors separated by '*'
            let mut coef = Rat::from_integer(BigInt::from(sign));
            let mut exps = vec![0u32; nvars];
            let mut saw_factor = false;
            loop {
                while i < bytes.len() && bytes[i].is_whitespace() {
                    i += 1;
                }
                if i >= bytes.len() {
                    break;
                }
                let c = bytes[i];
                if c.is_ascii_digit() {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i] == '.' {
                        return Err(PolyError::Parse(
                            "decimal coefficients are not allowed; use a/b rationals".into(),
                        ));
                    }
                    let numer: BigInt = src[start..i].parse().map_err(|_| {
                        PolyError::Parse(format!("bad integer at position {start}"))
                    })?;
                    let mut denom = BigInt::one();
                    if i < bytes.len() && bytes[i] == '/' {
                        i += 1;
                        let ds = i;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                        if ds == i {
                            return Err(PolyError::Parse("missing denominator".into()));
                        }
                        denom = src[ds..i].parse().map_err(|_| {
                            PolyError::Parse(format!("bad denominator at position {ds}"))
                        })?;
                        if denom.is_zero() {
                            return Err(PolyError::Parse("zero denominator".into()));
                        }
                    }
                    coef *= Rat::new(numer, denom);
                    saw_factor = true;
                } else if c.is_alphabetic() || c == '_' {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                        i += 1;
                    }
                    let name = &src[start..i];
                    let idx = names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| PolyError::Parse(format!("unknown variable '{name}'")))?;
                    let mut exp = 1u32;
                    if i < bytes.len() && bytes[i] == '^' {
                        i += 1;
                        let es = i;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                        if es == i {
                            return Err(PolyError::Parse("missing exponent".into()));
                        }
                        exp = src[es..i]
                            .parse()
                            .map_err(|_| PolyError::Parse("bad exponent".into()))?;
                    }
                    exps[idx] += exp;
                    saw_factor = true;
                } else {
                    return Err(PolyError::Parse(format!(
                        "unexpected character '{c}' at position {i}"
                    )));
                }
                // factor separator
                while i < bytes.len() && bytes[i].is_whitespace() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == '*' {
                    i += 1;
                } else {
                    break;
                }
            }
            if !saw_factor {
                return Err(PolyError::Parse("empty term".into()));
            }
            p.add_term(Monomial(exps), coef);
        }
        Ok(p)
    }
}
