//! Structural results for the non-compact case: natural generators of
//! one-dimensional sets and the Putinar criterion, tentacle stability
//! multipliers and degree bounds, elimination of squares, automorphism
//! substitution, and the unimodular-cone / triple-intersection checks
//! for logarithmic polyhedra.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cert::{
    verify_module, verify_preorder, CertError, GeneratorSet, ModuleCert, PreorderCert, SosPoly,
};
use crate::poly::{rint, PolyError, Polynomial, Rat};

#[derive(Debug, Error)]
pub enum NoncompactError {
    #[error("{0}")]
    Invalid(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One closed piece of the real line; `None` endpoints are infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
}

/// Ordered disjoint closed pieces with positive-length gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalUnion {
    pub pieces: Vec<Piece>,
}

impl IntervalUnion {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, NoncompactError> {
        if pieces.is_empty() {
            return Err(NoncompactError::Invalid("empty interval union".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if let (Some(a), Some(b)) = (&p.lo, &p.hi) {
                if a > b {
                    return Err(NoncompactError::Invalid(format!(
                        "piece {i} has lo > hi"
                    )));
                }
            }
            if i > 0 && pieces[i - 1].hi.is_none() {
                return Err(NoncompactError::Invalid(
                    "only the last piece may be unbounded above".into(),
                ));
            }
            if i > 0 && p.lo.is_none() {
                return Err(NoncompactError::Invalid(
                    "only the first piece may be unbounded below".into(),
                ));
            }
            if i > 0 {
                let prev_hi = pieces[i - 1].hi.as_ref().unwrap();
                let lo = p.lo.as_ref().unwrap();
                if lo <= prev_hi {
                    return Err(NoncompactError::Invalid(
                        "pieces must be sorted with positive gaps".into(),
                    ));
                }
            }
        }
        Ok(IntervalUnion { pieces })
    }

    pub fn is_compact(&self) -> bool {
        self.pieces.first().map_or(false, |p| p.lo.is_some())
            && self.pieces.last().map_or(false, |p| p.hi.is_some())
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.pieces.iter().any(|p| {
            p.lo.as_ref().map_or(true, |a| a <= x) && p.hi.as_ref().map_or(true, |b| x <= b)
        })
    }
}

/// The natural generator set of a union of closed intervals: `x - a` for
/// a minimum, `b - x` for a maximum, `(x - a)(x - b)` for each gap
/// `(a, b)`; leading coefficients are +-1 by construction.
pub fn natural_generators(k: &IntervalUnion) -> Vec<Polynomial> {
    let x = Polynomial::var(1, 0);
    let mut out = Vec::new();
    if let Some(a) = &k.pieces[0].lo {
        out.push(x.sub(&Polynomial::constant(1, a.clone())));
    }
    for w in k.pieces.windows(2) {
        let a = w[0].hi.as_ref().unwrap();
        let b = w[1].lo.as_ref().unwrap();
        out.push(
            x.sub(&Polynomial::constant(1, a.clone()))
                .mul(&x.sub(&Polynomial::constant(1, b.clone()))),
        );
    }
    if let Some(b) = &k.pieces.last().unwrap().hi {
        out.push(Polynomial::constant(1, b.clone()).sub(&x));
    }
    out
}

// ---- univariate root machinery (dense rational coefficients) ----

fn to_dense(p: &Polynomial) -> Vec<Rat> {
    let d = p.degree().unwrap_or(0) as usize;
    let mut c = vec![Rat::zero(); d + 1];
    for (m, coef) in p.terms() {
        c[m.0[0] as usize] = coef.clone();
    }
    c
}

fn trim(c: &mut Vec<Rat>) {
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
}

fn dense_derivative(c: &[Rat]) -> Vec<Rat> {
    if c.len() <= 1 {
        return vec![Rat::zero()];
    }
    (1..c.len()).map(|i| &c[i] * rint(i as i64)).collect()
}

fn dense_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r: Vec<Rat> = a.to_vec();
    trim(&mut r);
    let mut bb = b.to_vec();
    trim(&mut bb);
    let db = bb.len() - 1;
    let lead = bb[db].clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        if dr < db {
            break;
        }
        let factor = &r[dr] / &lead;
        for i in 0..=db {
            let delta = &factor * &bb[i];
            r[dr - db + i] = &r[dr - db + i] - delta;
        }
        trim(&mut r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    r
}

fn dense_eval(c: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for coef in c.iter().rev() {
        acc = acc * x + coef;
    }
    acc
}

fn sturm_chain(c: &[Rat]) -> Vec<Vec<Rat>> {
    let mut chain = vec![c.to_vec(), dense_derivative(c)];
    trim(&mut chain[0]);
    trim(&mut chain[1]);
    loop {
        let n = chain.len();
        if chain[n - 1].len() == 1 && chain[n - 1][0].is_zero() {
            chain.pop();
            break;
        }
        if chain[n - 1].len() == 1 {
            break;
        }
        let mut r = dense_rem(&chain[n - 2], &chain[n - 1]);
        for v in r.iter_mut() {
            *v = -&*v;
        }
        chain.push(r);
    }
    chain
}

fn sign_variations(signs: &[i8]) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for &s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sign_at_infinity(c: &[Rat], positive: bool) -> i8 {
    let mut cc = c.to_vec();
    trim(&mut cc);
    let d = cc.len() - 1;
    let lead = cc[d].clone();
    if lead.is_zero() {
        return 0;
    }
    let mut s = if lead.is_positive() { 1 } else { -1 };
    if !positive && d % 2 == 1 {
        s = -s;
    }
    s
}

/// Number of distinct real roots of a squarefree rational polynomial.
fn count_real_roots(c: &[Rat]) -> usize {
    let mut cc = c.to_vec();
    trim(&mut cc);
    if cc.len() <= 1 {
        return 0;
    }
    let chain = sturm_chain(&cc);
    let neg: Vec<i8> = chain.iter().map(|p| sign_at_infinity(p, false)).collect();
    let pos: Vec<i8> = chain.iter().map(|p| sign_at_infinity(p, true)).collect();
    sign_variations(&neg) - sign_variations(&pos)
}

fn dense_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !(y.len() == 1 && y[0].is_zero()) {
        let r = dense_rem(&x, &y);
        x = y;
        y = r;
        trim(&mut y);
    }
    x
}

fn squarefree_part(c: &[Rat]) -> Vec<Rat> {
    let g = dense_gcd(c, &dense_derivative(c));
    if g.len() <= 1 {
        return c.to_vec();
    }
    // exact division c / g
    let mut num = c.to_vec();
    trim(&mut num);
    let dq = num.len() - g.len();
    let mut quot = vec![Rat::zero(); dq + 1];
    let lead = g.last().unwrap().clone();
    while num.len() >= g.len() && !(num.len() == 1 && num[0].is_zero()) {
        let dn = num.len() - 1;
        let k = dn - (g.len() - 1);
        let f = &num[dn] / &lead;
        quot[k] = f.clone();
        for i in 0..g.len() {
            let delta = &f * &g[i];
            num[k + i] = &num[k + i] - delta;
        }
        trim(&mut num);
        if num.len() == 1 && num[0].is_zero() {
            break;
        }
    }
    quot
}

/// All rational roots of a univariate rational polynomial (distinct).
fn rational_roots(c: &[Rat]) -> Vec<Rat> {
    let mut cc = c.to_vec();
    trim(&mut cc);
    if cc.len() <= 1 {
        return Vec::new();
    }
    // clear denominators to a primitive integer polynomial
    let mut denom_lcm = BigInt::one();
    for coef in &cc {
        let d = coef.denom().clone();
        let g = num_integer::Integer::gcd(&denom_lcm, &d);
        denom_lcm = denom_lcm / g * d;
    }
    let ints: Vec<BigInt> = cc
        .iter()
        .map(|coef| coef.numer() * (&denom_lcm / coef.denom()))
        .collect();
    let mut roots = Vec::new();
    // strip powers of x
    let low = ints.iter().position(|v| !v.is_zero()).unwrap();
    if low > 0 {
        roots.push(Rat::zero());
    }
    let ints = &ints[low..];
    if ints.len() <= 1 {
        return roots;
    }
    let a0 = ints[0].magnitude().clone();
    let an = ints.last().unwrap().magnitude().clone();
    let divisors = |n: &num_bigint::BigUint| -> Vec<BigInt> {
        // bounded trial division; fall back to 1 and n for huge values
        let mut out = vec![BigInt::one()];
        let big: BigInt = n.clone().into();
        let mut d = BigInt::from(2u32);
        let cap = BigInt::from(100_000u32);
        let mut m = big.clone();
        let mut primes: Vec<(BigInt, u32)> = Vec::new();
        while &d * &d <= m && d <= cap {
            let mut e = 0;
            while (&m % &d).is_zero() {
                m = m / &d;
                e += 1;
            }
            if e > 0 {
                primes.push((d.clone(), e));
            }
            d += 1;
        }
        if m > BigInt::one() {
            primes.push((m, 1));
        }
        for (p, e) in primes {
            let base = out.clone();
            let mut pk = BigInt::one();
            for _ in 0..e {
                pk = pk * &p;
                for b in &base {
                    out.push(b * &pk);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    };
    for p in divisors(&a0) {
        for q in divisors(&an) {
            for sign in [1i32, -1] {
                let cand = Rat::new(&p * BigInt::from(sign), q.clone());
                if dense_eval(&cc, &cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Compute `K_S` for univariate generators as an interval union with
/// rational endpoints. Fails when some generator has an irrational real
/// root (detected by comparing the Sturm count with the rational roots).
pub fn semialgebraic_set_1d(s: &[Polynomial]) -> Result<IntervalUnion, NoncompactError> {
    if s.iter().any(|g| g.nvars() != 1) {
        return Err(NoncompactError::Invalid("generators must be univariate".into()));
    }
    let mut breaks: Vec<Rat> = Vec::new();
    for g in s {
        if g.is_zero() {
            continue;
        }
        let dense = to_dense(g);
        let sf = squarefree_part(&dense);
        let roots = rational_roots(&sf);
        if roots.len() != count_real_roots(&sf) {
            return Err(NoncompactError::Inconclusive(
                "a generator has an irrational real root; endpoints are not rational".into(),
            ));
        }
        breaks.extend(roots);
    }
    breaks.sort();
    breaks.dedup();
    // sample points: one per region plus the breakpoints
    let mut samples: Vec<(Rat, bool)> = Vec::new(); // (point, represents_open_region)
    if breaks.is_empty() {
        samples.push((Rat::zero(), true));
    } else {
        samples.push((&breaks[0] - rint(1), true));
        for (i, b) in breaks.iter().enumerate() {
            samples.push((b.clone(), false));
            let next = if i + 1 < breaks.len() {
                (b + &breaks[i + 1]) / rint(2)
            } else {
                b + rint(1)
            };
            samples.push((next, true));
        }
    }
    let inside = |x: &Rat| -> bool {
        s.iter()
            .all(|g| !g.evaluate(std::slice::from_ref(x)).unwrap().is_negative())
    };
    // build pieces by scanning regions left to right
    let mut pieces: Vec<Piece> = Vec::new();
    let mut open_lo: Option<Option<Rat>> = None; // Some(endpoint) while inside
    let flags: Vec<bool> = samples.iter().map(|(x, _)| inside(x)).collect();
    for (idx, ((x, is_region), ok)) in samples.iter().zip(&flags).enumerate() {
        if *ok && open_lo.is_none() {
            open_lo = Some(if idx == 0 {
                if *is_region { None } else { Some(x.clone()) }
            } else {
                Some(x.clone())
            });
        }
        if !*ok && open_lo.is_some() {
            // the previous sample closed the piece
            let lo = open_lo.take().unwrap();
            let hi = if *is_region {
                // region excluded: piece ended at the previous breakpoint,
                // which is samples[idx - 1]
                Some(samples[idx - 1].0.clone())
            } else {
                // breakpoint excluded: previous open region ended just
                // before it — but a closed piece needs a rational
                // endpoint; the region's closure endpoint is this break
                // point minus nothing, which cannot happen for closed K_S
                return Err(NoncompactError::Invalid(
                    "semialgebraic set is not closed at a breakpoint (open boundary)".into(),
                ));
            };
            pieces.push(Piece { lo, hi });
        }
    }
    if let Some(lo) = open_lo {
        pieces.push(Piece { lo, hi: None });
    }
    if pieces.is_empty() {
        return Err(NoncompactError::Invalid("the set is empty".into()));
    }
    // merge pieces whose gap is a single excluded point cannot occur for
    // closed sets; the construction already yields sorted disjoint pieces
    IntervalUnion::new(pieces)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PutinarVerdict {
    Putinar,
    NotPutinar { missing: Vec<Polynomial> },
}

/// The 1-D criterion: `S` is Putinar iff the natural generators of `K_S`
/// all appear in `S` up to positive scalar multiples. `K_S` is
/// recomputed from `S` itself so that sets describing the same region
/// with redundant or sign-shifted generators are judged correctly.
pub fn is_putinar_1d(s: &[Polynomial]) -> Result<(IntervalUnion, PutinarVerdict), NoncompactError> {
    let k = semialgebraic_set_1d(s)?;
    if k.is_compact() {
        return Err(NoncompactError::Invalid(
            "the criterion applies only to non-compact sets".into(),
        ));
    }
    let t = natural_generators(&k);
    let mut missing = Vec::new();
    for gen in &t {
        let found = s.iter().any(|g| {
            if g.is_zero() || g.degree() != gen.degree() {
                return false;
            }
            // g == c * gen for a positive rational c
            let (Some(gl), Some(tl)) = (g.leading_coefficient(), gen.leading_coefficient())
            else {
                return false;
            };
            let c = gl / tl;
            c.is_positive() && g == &gen.scale(&c)
        });
        if !found {
            missing.push(gen.clone());
        }
    }
    let verdict = if missing.is_empty() {
        PutinarVerdict::Putinar
    } else {
        PutinarVerdict::NotPutinar { missing }
    };
    Ok((k, verdict))
}

/// Tentacle directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TentacleSet {
    pub directions: Vec<Vec<i64>>,
}

impl TentacleSet {
    pub fn new(directions: Vec<Vec<i64>>) -> Result<Self, NoncompactError> {
        if directions.is_empty() {
            return Err(NoncompactError::Invalid("no tentacle directions".into()));
        }
        let n = directions[0].len();
        for d in &directions {
            if d.len() != n {
                return Err(NoncompactError::Invalid("dimension mismatch".into()));
            }
            if d.iter().all(|&v| v == 0) {
                return Err(NoncompactError::Invalid("zero direction".into()));
            }
        }
        Ok(TentacleSet { directions })
    }
}

/// Lexicographically smallest positive integers `r` with
/// `sum r_i z_i` strictly positive in every coordinate, searched up to a
/// component bound. `Ok(None)` carries a certificate of infeasibility
/// (a coordinate that no direction can make positive).
pub fn stability_multipliers(
    t: &TentacleSet,
    bound: u32,
) -> Result<Option<Vec<u32>>, NoncompactError> {
    let n = t.directions[0].len();
    for j in 0..n {
        if t.directions.iter().all(|z| z[j] <= 0) {
            return Ok(None);
        }
    }
    let m = t.directions.len();
    let mut r = vec![1u32; m];
    loop {
        let sum: Vec<i64> = (0..n)
            .map(|j| {
                t.directions
                    .iter()
                    .zip(&r)
                    .map(|(z, &ri)| z[j] * ri as i64)
                    .sum()
            })
            .collect();
        if sum.iter().all(|&v| v > 0) {
            return Ok(Some(r));
        }
        // advance lexicographically: increment the last coordinate first
        let mut pos = m;
        loop {
            if pos == 0 {
                return Err(NoncompactError::Inconclusive(format!(
                    "no multipliers with components <= {bound}"
                )));
            }
            pos -= 1;
            if r[pos] < bound {
                r[pos] += 1;
                for v in r.iter_mut().skip(pos + 1) {
                    *v = 1;
                }
                break;
            }
        }
    }
}

/// The explicit degree bound from the stability proof at `n = 2`: one
/// tentacle `z` with both components positive gives `d * z1 / z2` after
/// ordering `z1 >= z2`; two tentacles give
/// `d * (r1 z1^(1) + r2 z2^(2)) / min(r1 z1^(1) + r2 z1^(2),
/// r1 z2^(1) + r2 z2^(2))` with the roles fixed so that tentacle 1 is
/// positive in the first coordinate and tentacle 2 in the second.
pub fn stability_degree_bound(
    t: &TentacleSet,
    r: &[u32],
    d: u32,
) -> Result<Rat, NoncompactError> {
    if t.directions[0].len() != 2 {
        return Err(NoncompactError::Invalid("degree bound needs n = 2".into()));
    }
    if r.len() != t.directions.len() || r.iter().any(|&v| v == 0) {
        return Err(NoncompactError::Invalid("multiplier arity mismatch".into()));
    }
    match t.directions.len() {
        1 => {
            let z = &t.directions[0];
            if z[0] <= 0 || z[1] <= 0 {
                return Err(NoncompactError::Invalid(
                    "single tentacle must have positive components".into(),
                ));
            }
            let (z1, z2) = (z[0].max(z[1]), z[0].min(z[1]));
            Ok(Rat::new((d as i64 * z1).into(), z2.into()))
        }
        2 => {
            // relabel so tentacle 1 has z1 > 0, z2 <= 0 and tentacle 2
            // has z2 > 0, z1 <= 0
            let fits = |a: &[i64], b: &[i64]| a[0] > 0 && a[1] <= 0 && b[1] > 0 && b[0] <= 0;
            let (za, zb, ra, rb) = if fits(&t.directions[0], &t.directions[1]) {
                (&t.directions[0], &t.directions[1], r[0] as i64, r[1] as i64)
            } else if fits(&t.directions[1], &t.directions[0]) {
                (&t.directions[1], &t.directions[0], r[1] as i64, r[0] as i64)
            } else {
                return Err(NoncompactError::Invalid(
                    "tentacle signs do not match the two-tentacle pattern".into(),
                ));
            };
            let num = ra * za[0] + rb * zb[1];
            let den = (ra * za[0] + rb * zb[0]).min(ra * za[1] + rb * zb[1]);
            if den <= 0 {
                return Err(NoncompactError::Invalid(
                    "multipliers do not give a positive weighted sum".into(),
                ));
            }
            Ok(Rat::new((d as i64 * num).into(), den.into()))
        }
        _ => Err(NoncompactError::Invalid(
            "bound implemented for one or two tentacles".into(),
        )),
    }
}

/// Elimination of squares: from a module certificate whose target and
/// generators are all even in `yvar` (that is, of the form `g(x, y^2)`),
/// produce a preorder certificate over `S' = {g_i(x, y)} u {y}` for the
/// target with `y^2` renamed to `y`. Each square `s = s_hat(x, y^2) +
/// y s_check(x, y^2)` contributes `s_hat^2` on the plain generator and
/// `s_check^2` on the generator paired with `y`.
pub fn eliminate_squares(
    cert: &ModuleCert,
    set: &GeneratorSet,
    yvar: usize,
) -> Result<(GeneratorSet, PreorderCert), NoncompactError> {
    verify_module(cert, set)?;
    let nvars = set.nvars;
    if yvar >= nvars {
        return Err(NoncompactError::Invalid("bad variable index".into()));
    }
    for (i, g) in set.generators.iter().enumerate() {
        if !g.is_even_in(yvar) {
            return Err(NoncompactError::Invalid(format!(
                "generator {i} is not even in the chosen variable"
            )));
        }
    }
    if !cert.target.is_even_in(yvar) {
        return Err(NoncompactError::Invalid(
            "target is not even in the chosen variable".into(),
        ));
    }
    let halve = |p: &Polynomial| -> Polynomial {
        let (even, _) = p.even_odd_split(yvar).unwrap();
        even
    };
    let new_gens: Vec<Polynomial> = set.generators.iter().map(|g| halve(g)).collect();
    let s = new_gens.len();
    let mut all_gens = new_gens;
    all_gens.push(Polynomial::var(nvars, yvar));
    let new_set = GeneratorSet::new(nvars, all_gens);
    let y_bit: u64 = 1 << s;

    let mut out = PreorderCert::zero(halve(&cert.target));
    for (i, sigma) in cert.sigmas.iter().enumerate() {
        let base_mask: u64 = if i == 0 { 0 } else { 1 << (i - 1) };
        for (w, sq) in &sigma.squares {
            let (even, odd) = sq.even_odd_split(yvar)?;
            if !even.is_zero() {
                out.sigmas
                    .entry(base_mask)
                    .or_insert_with(SosPoly::zero)
                    .push(w.clone(), even);
            }
            if !odd.is_zero() {
                out.sigmas
                    .entry(base_mask | y_bit)
                    .or_insert_with(SosPoly::zero)
                    .push(w.clone(), odd);
            }
        }
    }
    out.sigmas.retain(|_, v| !v.is_zero());
    verify_preorder(&out, &new_set)?;
    Ok((new_set, out))
}

/// Polynomial-ring automorphisms used for substitution: affine maps and
/// the triangular shears `x_v -> x_v + q(other variables)`.
#[derive(Debug, Clone)]
pub enum Automorphism {
    Identity,
    /// `x_var -> x_var + shift`; `shift` must not involve `x_var`.
    Triangular { var: usize, shift: Polynomial },
    /// `x -> A x + b` with `A` invertible.
    Affine { a: Vec<Vec<Rat>>, b: Vec<Rat> },
}

impl Automorphism {
    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial, NoncompactError> {
        let nvars = p.nvars();
        match self {
            Automorphism::Identity => Ok(p.clone()),
            Automorphism::Triangular { var, shift } => {
                if *var >= nvars || shift.nvars() != nvars {
                    return Err(NoncompactError::Invalid("bad substitution arity".into()));
                }
                if !shift.is_zero() && shift.terms().any(|(m, _)| m.0[*var] > 0) {
                    return Err(NoncompactError::Invalid(
                        "shift involves the substituted variable".into(),
                    ));
                }
                let image = Polynomial::var(nvars, *var).add(shift);
                Ok(p.substitute(*var, &image)?)
            }
            Automorphism::Affine { a, b } => {
                if a.len() != nvars || b.len() != nvars {
                    return Err(NoncompactError::Invalid("bad affine arity".into()));
                }
                // invertibility check
                let id: Vec<Rat> = vec![Rat::zero(); nvars];
                let mut probe = id;
                if !probe.is_empty() {
                    probe[0] = Rat::one();
                }
                if crate::linalg::solve_rational(a, &probe).is_none() && nvars > 0 {
                    return Err(NoncompactError::Invalid("affine map is singular".into()));
                }
                let images: Vec<Polynomial> = (0..nvars)
                    .map(|i| {
                        let mut img = Polynomial::constant(nvars, b[i].clone());
                        for (j, coef) in a[i].iter().enumerate() {
                            img = img.add(&Polynomial::var(nvars, j).scale(coef));
                        }
                        img
                    })
                    .collect();
                let mut out = Polynomial::zero(nvars);
                for (m, c) in p.terms() {
                    let mut term = Polynomial::constant(nvars, c.clone());
                    for (i, &e) in m.0.iter().enumerate() {
                        if e > 0 {
                            term = term.mul(&images[i].pow(e));
                        }
                    }
                    out = out.add(&term);
                }
                Ok(out)
            }
        }
    }

    fn apply_sos(&self, s: &SosPoly) -> Result<SosPoly, NoncompactError> {
        let mut out = SosPoly::zero();
        for (w, base) in &s.squares {
            out.push(w.clone(), self.apply(base)?);
        }
        Ok(out)
    }
}

/// Apply an automorphism to a module certificate and its generator set;
/// the transformed certificate verifies over the transformed set.
pub fn substitute_automorphism_module(
    cert: &ModuleCert,
    set: &GeneratorSet,
    map: &Automorphism,
) -> Result<(GeneratorSet, ModuleCert), NoncompactError> {
    verify_module(cert, set)?;
    let new_set = GeneratorSet::new(
        set.nvars,
        set.generators
            .iter()
            .map(|g| map.apply(g))
            .collect::<Result<_, _>>()?,
    );
    let out = ModuleCert {
        target: map.apply(&cert.target)?,
        sigmas: cert
            .sigmas
            .iter()
            .map(|s| map.apply_sos(s))
            .collect::<Result<_, _>>()?,
    };
    verify_module(&out, &new_set)?;
    Ok((new_set, out))
}

/// Preorder version of `substitute_automorphism_module`.
pub fn substitute_automorphism_preorder(
    cert: &PreorderCert,
    set: &GeneratorSet,
    map: &Automorphism,
) -> Result<(GeneratorSet, PreorderCert), NoncompactError> {
    verify_preorder(cert, set)?;
    let new_set = GeneratorSet::new(
        set.nvars,
        set.generators
            .iter()
            .map(|g| map.apply(g))
            .collect::<Result<_, _>>()?,
    );
    let mut out = PreorderCert::zero(map.apply(&cert.target)?);
    for (mask, sigma) in &cert.sigmas {
        out.sigmas.insert(*mask, map.apply_sos(sigma)?);
    }
    verify_preorder(&out, &new_set)?;
    Ok((new_set, out))
}

/// `X^{2 alpha_i} <= r_i` constraints in two variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogPolyhedron {
    pub exponents: Vec<[i64; 2]>,
    pub bounds: Vec<Rat>,
}

impl LogPolyhedron {
    pub fn new(exponents: Vec<[i64; 2]>, bounds: Vec<Rat>) -> Result<Self, NoncompactError> {
        if exponents.is_empty() || exponents.len() != bounds.len() {
            return Err(NoncompactError::Invalid("constraint arity mismatch".into()));
        }
        for e in &exponents {
            if e[0] < 0 || e[1] < 0 {
                return Err(NoncompactError::Invalid("exponents must be non-negative".into()));
            }
        }
        for r in &bounds {
            if !r.is_positive() {
                return Err(NoncompactError::Invalid("bounds must be positive".into()));
            }
        }
        Ok(LogPolyhedron { exponents, bounds })
    }

    /// The describing polynomials `r_i - x^{2a} y^{2b}`.
    pub fn generators(&self) -> Vec<Polynomial> {
        self.exponents
            .iter()
            .zip(&self.bounds)
            .map(|(e, r)| {
                Polynomial::constant(2, r.clone()).sub(&Polynomial::monomial(
                    2,
                    &[2 * e[0] as u32, 2 * e[1] as u32],
                    Rat::one(),
                ))
            })
            .collect()
    }
}

fn primitive(v: [i64; 2]) -> [i64; 2] {
    let g = num_integer::gcd(v[0].abs(), v[1].abs());
    if g == 0 {
        v
    } else {
        [v[0] / g, v[1] / g]
    }
}

fn det2(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Extreme rays of the exponent cone, reduced to primitive vectors, with
/// the unimodularity flag `|det| = 1`.
pub fn unimodular_cone_check(
    p: &LogPolyhedron,
) -> Result<(bool, Option<([i64; 2], [i64; 2])>), NoncompactError> {
    let nonzero: Vec<[i64; 2]> = p
        .exponents
        .iter()
        .copied()
        .filter(|e| *e != [0, 0])
        .collect();
    if nonzero.is_empty() {
        return Err(NoncompactError::Invalid("all exponent vectors are zero".into()));
    }
    // extreme rays by cross product within the closed positive quadrant
    let mut lo = nonzero[0];
    let mut hi = nonzero[0];
    for &v in &nonzero[1..] {
        if det2(lo, v) < 0 {
            lo = v;
        }
        if det2(hi, v) > 0 {
            hi = v;
        }
    }
    let b1 = primitive(lo);
    let b2 = primitive(hi);
    let d = det2(b1, b2);
    if d == 0 {
        // one-dimensional cone: two independent generators do not exist
        return Ok((false, None));
    }
    Ok((d.abs() == 1, Some((b1, b2))))
}

fn rat_pow_i(r: &Rat, e: i64) -> Rat {
    let mut out = Rat::one();
    for _ in 0..e.unsigned_abs() {
        out = out * r;
    }
    if e < 0 {
        out = Rat::one() / out;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TripleVerdict {
    Pass,
    Fail { triple: [usize; 3] },
}

/// Check that no three curves `X^{2 alpha_i} = r_i` meet in one point of
/// the open positive quadrant. In `(log x^2, log y^2)` coordinates the
/// system is linear; with an integer kernel vector `c` of the exponent
/// matrix the three curves are concurrent exactly when
/// `prod r_i^{c_i} = 1`.
pub fn triple_intersection_check(p: &LogPolyhedron) -> TripleVerdict {
    let k = p.exponents.len();
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                let (a, b, c) = (p.exponents[i], p.exponents[j], p.exponents[l]);
                let (ra, rb, rc) = (&p.bounds[i], &p.bounds[j], &p.bounds[l]);
                let kern = [det2(b, c), -det2(a, c), det2(a, b)];
                if kern != [0, 0, 0] {
                    let prod =
                        rat_pow_i(ra, kern[0]) * rat_pow_i(rb, kern[1]) * rat_pow_i(rc, kern[2]);
                    if prod == Rat::one() {
                        return TripleVerdict::Fail { triple: [i, j, l] };
                    }
                } else {
                    // all three exponent vectors parallel (or zero):
                    // zero vectors need r = 1, parallel pairs need the
                    // matching power identity
                    let trips = [(a, ra), (b, rb), (c, rc)];
                    let mut consistent = trips
                        .iter()
                        .all(|(e, r)| *e != [0, 0] || **r == Rat::one());
                    if let Some(dir) = [a, b, c].into_iter().find(|v| *v != [0, 0]) {
                        let dir = primitive(dir);
                        let scale_of = |v: [i64; 2]| -> i64 {
                            if dir[0] != 0 {
                                v[0] / dir[0]
                            } else {
                                v[1] / dir[1]
                            }
                        };
                        for x in 0..3 {
                            for y in (x + 1)..3 {
                                let (va, pa) = trips[x];
                                let (vb, pb) = trips[y];
                                if va == [0, 0] || vb == [0, 0] {
                                    continue;
                                }
                                if rat_pow_i(pa, scale_of(vb)) != rat_pow_i(pb, scale_of(va)) {
                                    consistent = false;
                                }
                            }
                        }
                    }
                    if consistent {
                        return TripleVerdict::Fail { triple: [i, j, l] };
                    }
                }
            }
        }
    }
    TripleVerdict::Pass
}
