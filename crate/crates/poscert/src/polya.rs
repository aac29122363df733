//! Constructive certificates on the positive orthant and on simplices:
//! the Polya exponent scan, Habicht's sum-of-squares quotient identity
//! for positive definite forms, and Handelman representations.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cert::{CertError, GeneratorSet, PreorderCert, SosPoly, verify_preorder};
use crate::linalg::solve_rational;
use crate::poly::{
    monomials_of_degree, sum_of_vars_poly, Monomial, PolyError, Polynomial, Rat, rint,
};

#[derive(Debug, Error)]
pub enum PolyaError {
    #[error("input must be homogeneous and nonzero")]
    NotHomogeneous,
    #[error("no exponent up to {n_max} works; last counterexample monomial {counterexample:?} (inconclusive, not a disproof)")]
    Inconclusive {
        n_max: u32,
        counterexample: Monomial,
    },
    #[error("input is negative on the closed positive orthant at {witness:?} (value {value})")]
    Refuted { witness: Vec<Rat>, value: Rat },
    #[error("degree cap: {0}")]
    DegreeCap(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct PolyaResult {
    pub n: u32,
    pub product: Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ScanMode {
    /// Every monomial of full degree has a strictly positive coefficient.
    CompleteSupport,
    /// No coefficient is negative.
    NoNegative,
}

/// Smallest `N <= n_max` such that `(x_1 + ... + x_n)^N f` has strictly
/// positive coefficient at every monomial of its degree.
pub fn polya_exponent(f: &Polynomial, n_max: u32) -> Result<PolyaResult, PolyaError> {
    polya_scan(f, n_max, ScanMode::CompleteSupport)
}

pub(crate) fn polya_scan(
    f: &Polynomial,
    n_max: u32,
    mode: ScanMode,
) -> Result<PolyaResult, PolyaError> {
    if f.is_zero() || !f.is_homogeneous() {
        return Err(PolyaError::NotHomogeneous);
    }
    let nvars = f.nvars();
    let d = f.degree().unwrap();
    let linear = sum_of_vars_poly(nvars);
    let mut product = f.clone();
    let mut last_counterexample = None;
    for n in 0..=n_max {
        match scan_failure(&product, nvars, d + n, mode) {
            None => {
                return Ok(PolyaResult { n, product });
            }
            Some(bad) => {
                last_counterexample = Some(bad);
            }
        }
        product = product.mul(&linear);
    }
    let counterexample = last_counterexample.unwrap();
    // inconclusive unless a sample point on the orthant refutes positivity
    if let Some((witness, value)) = orthant_refutation(f, &counterexample) {
        return Err(PolyaError::Refuted { witness, value });
    }
    Err(PolyaError::Inconclusive {
        n_max,
        counterexample,
    })
}

fn scan_failure(
    product: &Polynomial,
    nvars: usize,
    degree: u32,
    mode: ScanMode,
) -> Option<Monomial> {
    match mode {
        ScanMode::CompleteSupport => monomials_of_degree(nvars, degree)
            .into_iter()
            .find(|m| !product.coefficient(m).is_positive()),
        ScanMode::NoNegative => product
            .terms()
            .find(|(_, c)| c.is_negative())
            .map(|(m, _)| m.clone()),
    }
}

fn orthant_refutation(f: &Polynomial, counterexample: &Monomial) -> Option<(Vec<Rat>, Rat)> {
    let nvars = f.nvars();
    let mut candidates: Vec<Vec<Rat>> = Vec::new();
    // coordinate points first, then the failing monomial's exponent
    // direction normalized by degree
    for i in 0..nvars {
        let mut p = vec![Rat::zero(); nvars];
        p[i] = rint(1);
        candidates.push(p);
    }
    let deg = counterexample.degree();
    if deg > 0 {
        candidates.push(
            counterexample
                .0
                .iter()
                .map(|&e| Rat::new(e.into(), deg.into()))
                .collect(),
        );
    }
    for point in candidates {
        let value = f.evaluate(&point).ok()?;
        if value.is_negative() {
            return Some((point, value));
        }
    }
    None
}

/// Habicht's certificate `(M2 + R2) f = M1 + R1` for a positive definite
/// form of even degree, with `M1`, `M2` sums of squares of monomials.
#[derive(Debug, Clone)]
pub struct HabichtCert {
    pub m1: SosPoly,
    pub m2: SosPoly,
    pub r1: SosPoly,
    pub r2: SosPoly,
    pub d: u32,
}

impl HabichtCert {
    /// Exact check of `(M2 + R2) f = M1 + R1`.
    pub fn verify(&self, f: &Polynomial) -> Result<(), CertError> {
        let nvars = f.nvars();
        let lhs = self.m2.expand(nvars).add(&self.r2.expand(nvars)).mul(f);
        let rhs = self.m1.expand(nvars).add(&self.r1.expand(nvars));
        if lhs != rhs {
            return Err(CertError::Invalid(
                "Habicht identity does not expand equally".to_string(),
            ));
        }
        for (_, base) in self.m1.squares.iter().chain(self.m2.squares.iter()) {
            if base.num_terms() != 1 {
                return Err(CertError::Invalid(
                    "M1/M2 base is not a single monomial".to_string(),
                ));
            }
        }
        self.m1.check_weights()?;
        self.m2.check_weights()?;
        self.r1.check_weights()?;
        self.r2.check_weights()?;
        Ok(())
    }
}

/// Split an even polynomial with non-negative coefficients into a sum of
/// squares of monomials, each multiplied by `extra`.
fn monomial_squares_times(p: &Polynomial, extra: &Polynomial) -> Result<SosPoly, PolyaError> {
    let mut out = SosPoly::zero();
    for (m, c) in p.terms() {
        if !m.is_even() || !c.is_positive() {
            return Err(PolyaError::Invalid(format!(
                "expected even monomials with positive coefficients, found {:?}",
                m
            )));
        }
        let half = Polynomial::from_terms(p.nvars(), [(m.half(), rint(1))]);
        out.push(c.clone(), half.mul(extra));
    }
    Ok(out)
}

/// Habicht's pipeline for a homogeneous `f` of even degree `2d` in `n+1`
/// variables, positive except at the origin (the caller's claim; only the
/// returned identity is verified). `n_cap` bounds the `2^{n+1}` blow-up.
pub fn habicht_certificate(
    f: &Polynomial,
    n_max: u32,
    n_cap: usize,
) -> Result<HabichtCert, PolyaError> {
    if f.is_zero() || !f.is_homogeneous() {
        return Err(PolyaError::NotHomogeneous);
    }
    let nvars = f.nvars();
    let deg = f.degree().unwrap();
    if deg % 2 != 0 || deg == 0 {
        return Err(PolyaError::Invalid(format!(
            "degree must be even and positive, got {deg}"
        )));
    }
    if nvars > n_cap + 1 {
        return Err(PolyaError::DegreeCap(format!(
            "{} variables exceed the sign-flip cap (n <= {n_cap})",
            nvars
        )));
    }
    let d = deg / 2;
    let m = 1usize << nvars;

    // all sign flips f_tau
    let mut flips = Vec::with_capacity(m);
    for bits in 0..m {
        let tau: Vec<i8> = (0..nvars)
            .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        flips.push(f.sign_flip(&tau)?);
    }

    // s_i = e_i(f_tau), even in every variable; rewrite in u_j = x_j^2
    let mut s_hat = Vec::with_capacity(m);
    for i in 1..=m {
        let s = crate::poly::elementary_symmetric(&flips, i)?;
        let mut hat = Polynomial::zero(nvars);
        for (mon, c) in s.terms() {
            if !mon.is_even() {
                return Err(PolyaError::Invalid(
                    "elementary symmetric polynomial is not even in each variable".to_string(),
                ));
            }
            hat = hat.add(&Polynomial::from_terms(nvars, [(mon.half(), c.clone())]));
        }
        s_hat.push(hat);
    }

    // per-index Polya exponent, then one global degree D
    let mut big_d = d;
    for (idx, hat) in s_hat.iter().enumerate() {
        let i = (idx + 1) as u32;
        let n_i = polya_exponent(hat, n_max)?.n;
        big_d = big_d.max(d + n_i.div_ceil(i));
    }

    // sigma_i = (sum x^2)^{i (D - d)} s_i, all-positive in the u variables
    let q = crate::poly::sum_of_squares_poly(nvars);
    let q_hat = sum_of_vars_poly(nvars);
    let mut sigma_hat = Vec::with_capacity(m);
    for (idx, hat) in s_hat.iter().enumerate() {
        let i = (idx + 1) as u32;
        let padded = hat.mul(&q_hat.pow(i * (big_d - d)));
        if let Some(bad) = scan_failure(&padded, nvars, i * big_d, ScanMode::CompleteSupport) {
            return Err(PolyaError::Inconclusive {
                n_max,
                counterexample: bad,
            });
        }
        sigma_hat.push(padded);
    }
    // substitute u_j = x_j^2 back
    let sigma: Vec<Polynomial> = sigma_hat
        .iter()
        .map(|hat| {
            Polynomial::from_terms(
                nvars,
                hat.terms().map(|(mon, c)| {
                    (
                        Monomial(mon.0.iter().map(|&e| 2 * e).collect()),
                        c.clone(),
                    )
                }),
            )
        })
        .collect();

    // f~ = (sum x^2)^{D-d} f; Vieta gives
    //   f~^m + sum_i (-1)^i sigma_i f~^{m-i} = 0
    let f_tilde = q.pow(big_d - d).mul(f);
    let pad = q.pow(big_d - d);

    let m1 = monomial_squares_times(&sigma[m - 1], &Polynomial::one(nvars))?;
    let m2 = monomial_squares_times(&sigma[m - 2].mul(&pad), &Polynomial::one(nvars))?;

    let mut r1 = SosPoly::square(f_tilde.pow(m as u32 / 2));
    let mut r2 = SosPoly::zero();
    for i in 1..m / 2 {
        let ft_half = f_tilde.pow(((m - 2 * i) / 2) as u32);
        r1 = r1.add(&monomial_squares_times(&sigma[2 * i - 1], &ft_half)?);
        r2 = r2.add(&monomial_squares_times(
            &sigma[2 * i - 2].mul(&pad),
            &ft_half,
        )?);
    }

    let cert = HabichtCert {
        m1,
        m2,
        r1,
        r2,
        d: big_d,
    };
    cert.verify(f)?;
    Ok(cert)
}

/// An `n`-simplex given either by its facet polynomials or its vertices.
#[derive(Debug, Clone)]
pub enum SimplexSpec {
    /// `n+1` affine polynomials, each vanishing on one facet and positive
    /// at the opposite vertex.
    Lambdas(Vec<Polynomial>),
    /// `n+1` affinely independent vertices.
    Vertices(Vec<Vec<Rat>>),
}

/// A simplex resolved to both descriptions, with normalization constants
/// `c_i = lambda_i(v_i) > 0`.
#[derive(Debug, Clone)]
pub struct Simplex {
    pub lambdas: Vec<Polynomial>,
    pub vertices: Vec<Vec<Rat>>,
    pub scales: Vec<Rat>,
}

impl SimplexSpec {
    pub fn resolve(&self, nvars: usize) -> Result<Simplex, PolyaError> {
        match self {
            SimplexSpec::Vertices(vs) => {
                if vs.len() != nvars + 1 || vs.iter().any(|v| v.len() != nvars) {
                    return Err(PolyaError::Invalid(format!(
                        "need {} vertices of length {}",
                        nvars + 1,
                        nvars
                    )));
                }
                // lambda_i affine with lambda_i(v_j) = delta_ij
                let mut lambdas = Vec::with_capacity(nvars + 1);
                for i in 0..=nvars {
                    let rows: Vec<Vec<Rat>> = vs
                        .iter()
                        .map(|v| {
                            let mut row = vec![rint(1)];
                            row.extend(v.iter().cloned());
                            row
                        })
                        .collect();
                    let rhs: Vec<Rat> = (0..=nvars)
                        .map(|j| if i == j { rint(1) } else { Rat::zero() })
                        .collect();
                    let coef = solve_rational(&rows, &rhs).ok_or_else(|| {
                        PolyaError::Invalid("degenerate simplex: vertices affinely dependent".into())
                    })?;
                    let mut lam = Polynomial::constant(nvars, coef[0].clone());
                    for (k, c) in coef[1..].iter().enumerate() {
                        lam = lam.add(&Polynomial::var(nvars, k).scale(c));
                    }
                    lambdas.push(lam);
                }
                Ok(Simplex {
                    lambdas,
                    vertices: vs.clone(),
                    scales: vec![rint(1); nvars + 1],
                })
            }
            SimplexSpec::Lambdas(lambdas) => {
                if lambdas.len() != nvars + 1 {
                    return Err(PolyaError::Invalid(format!(
                        "need {} facet polynomials",
                        nvars + 1
                    )));
                }
                for lam in lambdas {
                    if lam.degree().unwrap_or(0) > 1 || lam.nvars() != nvars {
                        return Err(PolyaError::Invalid(
                            "facet polynomials must be affine".to_string(),
                        ));
                    }
                }
                // vertex v_i solves lambda_j(v) = 0 for all j != i
                let mut vertices = Vec::with_capacity(nvars + 1);
                let mut scales = Vec::with_capacity(nvars + 1);
                for i in 0..=nvars {
                    let others: Vec<&Polynomial> = lambdas
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, l)| l)
                        .collect();
                    let rows: Vec<Vec<Rat>> = others
                        .iter()
                        .map(|l| {
                            (0..nvars)
                                .map(|k| l.coefficient(&Monomial::var(nvars, k)))
                                .collect()
                        })
                        .collect();
                    let rhs: Vec<Rat> = others.iter().map(|l| -l.constant_term()).collect();
                    let v = solve_rational(&rows, &rhs).ok_or_else(|| {
                        PolyaError::Invalid("degenerate simplex: facets do not meet in a point".into())
                    })?;
                    let scale = lambdas[i].evaluate(&v)?;
                    if !scale.is_positive() {
                        return Err(PolyaError::Invalid(format!(
                            "facet polynomial {i} is not positive at its opposite vertex"
                        )));
                    }
                    vertices.push(v);
                    scales.push(scale);
                }
                Ok(Simplex {
                    lambdas: lambdas.clone(),
                    vertices,
                    scales,
                })
            }
        }
    }
}

/// Handelman representation `f = sum_alpha a_alpha lambda^alpha` with all
/// `a_alpha > 0`.
#[derive(Debug, Clone)]
pub struct HandelmanCert {
    pub coefficients: BTreeMap<Vec<u32>, Rat>,
    pub lambdas: Vec<Polynomial>,
}

impl HandelmanCert {
    pub fn expansion(&self) -> Polynomial {
        let nvars = self.lambdas[0].nvars();
        let mut sum = Polynomial::zero(nvars);
        for (alpha, a) in &self.coefficients {
            let mut term = Polynomial::constant(nvars, a.clone());
            for (lam, &e) in self.lambdas.iter().zip(alpha.iter()) {
                term = term.mul(&lam.pow(e));
            }
            sum = sum.add(&term);
        }
        sum
    }

    /// Re-encode as a preorder certificate over `S = {lambda_0, ...,
    /// lambda_n}`: split each `alpha = 2 beta + r` so the odd part selects
    /// the generator subset and the even part becomes the square.
    pub fn to_preorder(&self, target: &Polynomial) -> (GeneratorSet, PreorderCert) {
        let nvars = self.lambdas[0].nvars();
        let set = GeneratorSet::new(nvars, self.lambdas.clone());
        let mut cert = PreorderCert::zero(target.clone());
        for (alpha, a) in &self.coefficients {
            let mut mask = 0u64;
            let mut base = Polynomial::one(nvars);
            for (i, (&e, lam)) in alpha.iter().zip(&self.lambdas).enumerate() {
                if e % 2 == 1 {
                    mask |= 1 << i;
                }
                base = base.mul(&lam.pow(e / 2));
            }
            let sigma = cert.sigmas.entry(mask).or_insert_with(SosPoly::zero);
            sigma.push(a.clone(), base);
        }
        (set, cert)
    }
}

/// Handelman certificate for `f` positive on a simplex, via reduction to
/// the standard simplex and a Polya scan in barycentric coordinates.
pub fn handelman_simplex(
    f: &Polynomial,
    simplex: &SimplexSpec,
    n_max: u32,
) -> Result<HandelmanCert, PolyaError> {
    let nvars = f.nvars();
    let sx = simplex.resolve(nvars)?;
    if f.is_zero() {
        return Err(PolyaError::Invalid("zero target".to_string()));
    }
    let d = f.degree().unwrap();
    let bary = nvars + 1;

    // homogenize with x0 (not to even degree), then substitute the
    // barycentric identities x0 = sum_i mu_i, x_k = sum_i mu_i (v_i)_k to
    // get a form G(mu) of degree d that agrees with f on the simplex
    let fh = if d == 0 {
        // a constant is already the degree-0 form
        Polynomial::constant(bary, f.constant_term())
    } else {
        f.homogenize(false)?
    };
    let mut g = Polynomial::zero(bary);
    for (mon, c) in fh.terms() {
        // fh variables: index 0 is x0, index k+1 is x_k
        let mut term = Polynomial::constant(bary, c.clone());
        for (var, &e) in mon.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut lin = Polynomial::zero(bary);
            for i in 0..bary {
                let coef = if var == 0 {
                    rint(1)
                } else {
                    sx.vertices[i][var - 1].clone()
                };
                lin = lin.add(&Polynomial::var(bary, i).scale(&coef));
            }
            term = term.mul(&lin.pow(e));
        }
        g = g.add(&term);
    }
    if d == 0 {
        // constant target: empty-product certificate
        let c = f.constant_term();
        if !c.is_positive() {
            return Err(PolyaError::Invalid("constant target must be positive".into()));
        }
        let mut coefficients = BTreeMap::new();
        coefficients.insert(vec![0u32; bary], c);
        return Ok(HandelmanCert {
            coefficients,
            lambdas: sx.lambdas,
        });
    }

    let result = polya_scan(&g, n_max, ScanMode::NoNegative)?;

    // read off a_alpha = c_alpha / prod c_i^{alpha_i}; mu_i = lambda_i / c_i
    let mut coefficients = BTreeMap::new();
    for (mon, c) in result.product.terms() {
        if c.is_zero() || !c.is_positive() {
            continue;
        }
        let mut a = c.clone();
        for (i, &e) in mon.0.iter().enumerate() {
            for _ in 0..e {
                a = &a / &sx.scales[i];
            }
        }
        coefficients.insert(mon.0.clone(), a);
    }
    let cert = HandelmanCert {
        coefficients,
        lambdas: sx.lambdas,
    };
    if cert.expansion() != *f {
        return Err(PolyaError::Invalid(
            "Handelman expansion does not reproduce the target".to_string(),
        ));
    }
    // cross-verify the preorder re-encoding
    let (set, pre) = cert.to_preorder(f);
    verify_preorder(&pre, &set)?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn p2(src: &str) -> Polynomial {
        Polynomial::parse(src, &names(&["x", "y"])).unwrap()
    }

    fn p1(src: &str) -> Polynomial {
        Polynomial::parse(src, &names(&["x"])).unwrap()
    }

    #[test]
    fn polya_already_positive() {
        let r = polya_exponent(&p2("x+y"), 5).unwrap();
        assert_eq!(r.n, 0);
        assert_eq!(r.product, p2("x+y"));
    }

    #[test]
    fn polya_motzkinish_quadratic() {
        let r = polya_exponent(&p2("x^2-x*y+y^2"), 5).unwrap();
        assert_eq!(r.n, 3);
        assert_eq!(r.product, p2("x^5+2*x^4*y+x^3*y^2+x^2*y^3+2*x*y^4+y^5"));
        // N = 2 fails exactly on the x^2 y^2 monomial
        let at2 = p2("x^2-x*y+y^2").mul(&p2("x+y").pow(2));
        assert!(at2.coefficient(&Monomial(vec![2, 2])).is_zero());
    }

    #[test]
    fn polya_refuted_on_octant() {
        match polya_exponent(&p2("x-2*y"), 10) {
            Err(PolyaError::Refuted { witness, value }) => {
                assert!(value.is_negative());
                // witness normalizes the failing pure-y monomial to (0,1)
                assert_eq!(witness, vec![rint(0), rint(1)]);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn polya_rejects_inhomogeneous() {
        assert!(matches!(
            polya_exponent(&p2("x+1"), 3),
            Err(PolyaError::NotHomogeneous)
        ));
    }

    fn p01(src: &str) -> Polynomial {
        Polynomial::parse(src, &names(&["x0", "x1"])).unwrap()
    }

    #[test]
    fn habicht_circle_form() {
        let f = p01("x0^2+x1^2");
        let cert = habicht_certificate(&f, 10, 3).unwrap();
        cert.verify(&f).unwrap();
        // both sides expand to 8 (x0^2 + x1^2)^4
        let lhs = cert.m2.expand(2).add(&cert.r2.expand(2)).mul(&f);
        assert_eq!(lhs, f.pow(4).scale(&rint(8)));
        assert_eq!(cert.d, 1);
    }

    #[test]
    fn habicht_single_variable() {
        let f = Polynomial::parse("x0^2", &names(&["x0"])).unwrap();
        let cert = habicht_certificate(&f, 10, 3).unwrap();
        cert.verify(&f).unwrap();
    }

    #[test]
    fn habicht_non_obvious_quartic() {
        let f = p01("x0^4-x0^2*x1^2+x1^4");
        let cert = habicht_certificate(&f, 20, 3).unwrap();
        cert.verify(&f).unwrap();
    }

    #[test]
    fn habicht_rejects_odd_degree() {
        assert!(habicht_certificate(&p01("x0^3+x1^3"), 5, 3).is_err());
    }

    fn unit_interval() -> SimplexSpec {
        SimplexSpec::Lambdas(vec![p1("1-x"), p1("x")])
    }

    #[test]
    fn handelman_affine_target() {
        let cert = handelman_simplex(&p1("1/2+x"), &unit_interval(), 10).unwrap();
        assert_eq!(cert.coefficients.get(&vec![1, 0]), Some(&rat(1, 2)));
        assert_eq!(cert.coefficients.get(&vec![0, 1]), Some(&rat(3, 2)));
        assert_eq!(cert.coefficients.len(), 2);
    }

    #[test]
    fn handelman_quadratic_target() {
        let cert = handelman_simplex(&p1("x^2-x+1/2"), &unit_interval(), 10).unwrap();
        assert_eq!(cert.coefficients.get(&vec![2, 0]), Some(&rat(1, 2)));
        assert_eq!(cert.coefficients.get(&vec![0, 2]), Some(&rat(1, 2)));
        assert_eq!(cert.coefficients.len(), 2);
    }

    #[test]
    fn handelman_constant_target() {
        let cert = handelman_simplex(&p1("1"), &unit_interval(), 10).unwrap();
        assert_eq!(cert.coefficients.get(&vec![0, 0]), Some(&rint(1)));
        assert_eq!(cert.coefficients.len(), 1);
    }

    #[test]
    fn handelman_vertices_roundtrip() {
        // standard 2-simplex from vertices
        let spec = SimplexSpec::Vertices(vec![
            vec![rint(0), rint(0)],
            vec![rint(1), rint(0)],
            vec![rint(0), rint(1)],
        ]);
        let sx = spec.resolve(2).unwrap();
        assert_eq!(sx.lambdas[0], p2("1-x-y"));
        assert_eq!(sx.lambdas[1], p2("x"));
        assert_eq!(sx.lambdas[2], p2("y"));
        let cert = handelman_simplex(&p2("1/2+x+y"), &spec, 10).unwrap();
        assert_eq!(cert.expansion(), p2("1/2+x+y"));
    }

    #[test]
    fn handelman_scaled_lambdas() {
        // unnormalized facet polynomials: 2(1-x) and 3x describe [0,1] too
        let spec = SimplexSpec::Lambdas(vec![p1("2-2*x"), p1("3*x")]);
        let cert = handelman_simplex(&p1("x^2-x+1/2"), &spec, 10).unwrap();
        assert_eq!(cert.expansion(), p1("x^2-x+1/2"));
        assert_eq!(cert.coefficients.get(&vec![2, 0]), Some(&rat(1, 8)));
        assert_eq!(cert.coefficients.get(&vec![0, 2]), Some(&rat(1, 18)));
    }

    #[test]
    fn handelman_degenerate_simplex() {
        let spec = SimplexSpec::Vertices(vec![vec![rint(0)], vec![rint(0)]]);
        assert!(handelman_simplex(&p1("1+x"), &spec, 5).is_err());
    }
}
