//! Certificate data model and exact verification.
//!
//! A module certificate is `f = sigma_0 + sum_i sigma_i g_i`, a preorder
//! certificate is `f = sum_{alpha in {0,1}^s} sigma_alpha g^alpha`, with
//! every sigma a weighted sum of squares. Verification is exact expansion
//! and structural comparison; there is no tolerance anywhere.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::{Monomial, Polynomial, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("certificate arity {0} does not match generator count {1}")]
    ArityMismatch(usize, usize),
    #[error("identity fails: first mismatching monomial {0:?} (expansion {1}, target {2})")]
    IdentityMismatch(Vec<u32>, String, String),
    #[error("homogeneity violation: summand {0} is not homogeneous of common degree {1}")]
    Homogeneity(String, u32),
    #[error("sum-of-squares weight must be positive, got {0}")]
    NonPositiveWeight(String),
    #[error("generator index {0} out of range for {1} generators")]
    BadGenerator(usize, usize),
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("module mode with {0} generators is not closed under products; only principal modules are")]
    ProductNotClosed(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Ordered generators defining `K_S`, `M_S` and `T_S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    pub nvars: usize,
    pub generators: Vec<Polynomial>,
    pub homogeneous: bool,
    pub even_degrees: bool,
}

impl GeneratorSet {
    pub fn new(nvars: usize, generators: Vec<Polynomial>) -> Self {
        GeneratorSet {
            nvars,
            generators,
            homogeneous: false,
            even_degrees: false,
        }
    }

    pub fn homogeneous(nvars: usize, generators: Vec<Polynomial>) -> Result<Self, CertError> {
        for g in &generators {
            if !g.is_homogeneous() {
                return Err(CertError::Invalid(
                    "generator is not homogeneous".to_string(),
                ));
            }
        }
        let even_degrees = generators_even(&generators);
        Ok(GeneratorSet {
            nvars,
            generators,
            homogeneous: true,
            even_degrees,
        })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Product `g^alpha` for a subset mask over the generators.
    pub fn subset_product(&self, mask: u64) -> Polynomial {
        let mut p = Polynomial::one(self.nvars);
        for (i, g) in self.generators.iter().enumerate() {
            if mask & (1 << i) != 0 {
                p = p.mul(g);
            }
        }
        p
    }
}

fn generators_even(gens: &[Polynomial]) -> bool {
    gens.iter()
        .all(|g| g.degree().map(|d| d % 2 == 0).unwrap_or(true))
}

/// Weighted sum of squares `sum_i w_i p_i^2` with every `w_i > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SosPoly {
    pub squares: Vec<(Rat, Polynomial)>,
}

impl SosPoly {
    pub fn zero() -> Self {
        SosPoly { squares: vec![] }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        assert!(!c.is_negative());
        if c.is_zero() {
            return Self::zero();
        }
        SosPoly {
            squares: vec![(c, Polynomial::one(nvars))],
        }
    }

    pub fn square(base: Polynomial) -> Self {
        SosPoly {
            squares: vec![(Rat::one(), base)],
        }
    }

    pub fn weighted(weight: Rat, base: Polynomial) -> Self {
        SosPoly {
            squares: vec![(weight, base)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn push(&mut self, weight: Rat, base: Polynomial) {
        if weight.is_zero() || base.is_zero() {
            return;
        }
        self.squares.push((weight, base));
    }

    pub fn add(&self, other: &SosPoly) -> SosPoly {
        let mut squares = self.squares.clone();
        squares.extend(other.squares.iter().cloned());
        SosPoly { squares }
    }

    /// Product of two sums of squares, expanded pairwise.
    pub fn mul(&self, other: &SosPoly) -> SosPoly {
        let mut out = SosPoly::zero();
        for (w, p) in &self.squares {
            for (v, q) in &other.squares {
                out.push(w * v, p.mul(q));
            }
        }
        out
    }

    /// Multiply every base by a fixed polynomial (absorbing its square).
    pub fn mul_square(&self, factor: &Polynomial) -> SosPoly {
        SosPoly {
            squares: self
                .squares
                .iter()
                .map(|(w, p)| (w.clone(), p.mul(factor)))
                .collect(),
        }
    }

    /// Scale all weights by a positive rational.
    pub fn scale(&self, c: &Rat) -> SosPoly {
        assert!(c.is_positive());
        SosPoly {
            squares: self
                .squares
                .iter()
                .map(|(w, p)| (w * c, p.clone()))
                .collect(),
        }
    }

    pub fn expand(&self, nvars: usize) -> Polynomial {
        let mut total = Polynomial::zero(nvars);
        for (w, p) in &self.squares {
            total = total.add(&p.square().scale(w));
        }
        total
    }

    pub fn check_weights(&self) -> Result<(), CertError> {
        for (w, _) in &self.squares {
            if !w.is_positive() {
                return Err(CertError::NonPositiveWeight(w.to_string()));
            }
        }
        Ok(())
    }

    /// Canonicalize: drop zero bases, sort by base term order then weight.
    pub fn canonical(&self) -> SosPoly {
        let mut squares: Vec<(Rat, Polynomial)> = self
            .squares
            .iter()
            .filter(|(w, p)| !w.is_zero() && !p.is_zero())
            .cloned()
            .collect();
        squares.sort_by(|(wa, pa), (wb, pb)| {
            pa.partial_cmp_terms(pb).then_with(|| wa.cmp(wb))
        });
        SosPoly { squares }
    }
}

impl Polynomial {
    /// Term-order comparison used only for canonical sorting of SOS lists.
    pub fn partial_cmp_terms(&self, other: &Polynomial) -> std::cmp::Ordering {
        let a: Vec<_> = self.terms().collect();
        let b: Vec<_> = other.terms().collect();
        a.cmp(&b)
    }
}

/// Explicit representation `f = sum_i sigma_i g_i` with `g_0 := 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleCert {
    pub target: Polynomial,
    /// Length `s + 1`; index 0 pairs with the constant generator 1.
    pub sigmas: Vec<SosPoly>,
}

/// Explicit representation `f = sum_alpha sigma_alpha g^alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreorderCert {
    pub target: Polynomial,
    /// Subset mask over the generators -> sigma. Missing masks are zero.
    pub sigmas: BTreeMap<u64, SosPoly>,
}

impl ModuleCert {
    pub fn zero(target: Polynomial, s: usize) -> Self {
        ModuleCert {
            target,
            sigmas: vec![SosPoly::zero(); s + 1],
        }
    }

    pub fn expansion(&self, set: &GeneratorSet) -> Result<Polynomial, CertError> {
        if self.sigmas.len() != set.len() + 1 {
            return Err(CertError::ArityMismatch(self.sigmas.len(), set.len() + 1));
        }
        let mut total = self.sigmas[0].expand(set.nvars);
        for (i, g) in set.generators.iter().enumerate() {
            total = total.add(&self.sigmas[i + 1].expand(set.nvars).mul(g));
        }
        Ok(total)
    }

    pub fn into_preorder(self, set: &GeneratorSet) -> Result<PreorderCert, CertError> {
        if self.sigmas.len() != set.len() + 1 {
            return Err(CertError::ArityMismatch(self.sigmas.len(), set.len() + 1));
        }
        let mut sigmas = BTreeMap::new();
        for (i, sigma) in self.sigmas.into_iter().enumerate() {
            if sigma.is_zero() {
                continue;
            }
            let mask = if i == 0 { 0u64 } else { 1u64 << (i - 1) };
            merge_sigma(&mut sigmas, mask, sigma);
        }
        Ok(PreorderCert {
            target: self.target,
            sigmas,
        })
    }
}

pub(crate) fn merge_sigma(map: &mut BTreeMap<u64, SosPoly>, mask: u64, sigma: SosPoly) {
    if sigma.is_zero() {
        return;
    }
    map.entry(mask)
        .and_modify(|s| *s = s.add(&sigma))
        .or_insert(sigma);
}

impl PreorderCert {
    pub fn zero(target: Polynomial) -> Self {
        PreorderCert {
            target,
            sigmas: BTreeMap::new(),
        }
    }

    pub fn expansion(&self, set: &GeneratorSet) -> Result<Polynomial, CertError> {
        let mut total = Polynomial::zero(set.nvars);
        for (&mask, sigma) in &self.sigmas {
            if mask >= (1u64 << set.len()) {
                return Err(CertError::BadGenerator(mask as usize, set.len()));
            }
            total = total.add(&sigma.expand(set.nvars).mul(&set.subset_product(mask)));
        }
        Ok(total)
    }
}

fn first_mismatch(expansion: &Polynomial, target: &Polynomial) -> CertError {
    let diff = expansion.sub(target);
    let (m, _) = diff.terms().next().expect("nonzero difference");
    CertError::IdentityMismatch(
        m.0.clone(),
        expansion.coefficient(m).to_string(),
        target.coefficient(m).to_string(),
    )
}

fn check_homogeneous_summands(
    summands: impl Iterator<Item = Polynomial>,
) -> Result<(), CertError> {
    let mut common: Option<u32> = None;
    for s in summands {
        if s.is_zero() {
            continue;
        }
        if !s.is_homogeneous() {
            return Err(CertError::Homogeneity(format!("{s:?}"), 0));
        }
        let d = s.degree().unwrap();
        match common {
            None => common = Some(d),
            Some(c) if c != d => return Err(CertError::Homogeneity(format!("{s:?}"), c)),
            _ => {}
        }
    }
    Ok(())
}

/// Exact verification of a module certificate.
///
/// Homogeneity (when the generator set is in homogeneous mode) is reported
/// distinctly from identity failure.
pub fn verify_module(cert: &ModuleCert, set: &GeneratorSet) -> Result<(), CertError> {
    if cert.sigmas.len() != set.len() + 1 {
        return Err(CertError::ArityMismatch(cert.sigmas.len(), set.len() + 1));
    }
    for sigma in &cert.sigmas {
        sigma.check_weights()?;
    }
    if set.homogeneous {
        let one = Polynomial::one(set.nvars);
        check_homogeneous_summands(cert.sigmas.iter().enumerate().map(|(i, sigma)| {
            let g = if i == 0 { &one } else { &set.generators[i - 1] };
            sigma.expand(set.nvars).mul(g)
        }))?;
    }
    let expansion = cert.expansion(set)?;
    if expansion != cert.target {
        return Err(first_mismatch(&expansion, &cert.target));
    }
    Ok(())
}

/// Exact verification of a preorder certificate.
pub fn verify_preorder(cert: &PreorderCert, set: &GeneratorSet) -> Result<(), CertError> {
    for sigma in cert.sigmas.values() {
        sigma.check_weights()?;
    }
    for &mask in cert.sigmas.keys() {
        if set.len() < 64 && mask >= (1u64 << set.len()) {
            return Err(CertError::BadGenerator(mask as usize, set.len()));
        }
    }
    if set.homogeneous {
        check_homogeneous_summands(
            cert.sigmas
                .iter()
                .map(|(&mask, sigma)| sigma.expand(set.nvars).mul(&set.subset_product(mask))),
        )?;
    }
    let expansion = cert.expansion(set)?;
    if expansion != cert.target {
        return Err(first_mismatch(&expansion, &cert.target));
    }
    Ok(())
}

/// Pick some monomial of the target or expansion and perturb one certificate
/// coefficient; used by fuzz tests.
pub fn perturb_sigma(sigma: &mut SosPoly, which: usize, delta: &Rat) {
    if sigma.squares.is_empty() {
        return;
    }
    let idx = which % sigma.squares.len();
    let (_, base) = &mut sigma.squares[idx];
    let m = base
        .terms()
        .next()
        .map(|(m, _)| m.clone())
        .unwrap_or_else(|| Monomial::constant(base.nvars()));
    let coef = base.coefficient(&m);
    *base = base.sub(&Polynomial::from_terms(
        base.nvars(),
        [(m.clone(), coef.clone())],
    ));
    *base = base.add(&Polynomial::from_terms(base.nvars(), [(m, coef + delta)]));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rint};

    fn names(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    fn p(src: &str, nm: &[&str]) -> Polynomial {
        Polynomial::parse(src, &names(nm)).unwrap()
    }

    fn sphere_set() -> GeneratorSet {
        GeneratorSet::new(2, vec![p("1-x1^2-x2^2", &["x1", "x2"])])
    }

    /// The tangent-hyperplane identity on the unit sphere.
    fn sphere_cert() -> ModuleCert {
        let nm = ["x1", "x2"];
        let mut s0 = SosPoly::zero();
        s0.push(rat(1, 2), p("x1-1", &nm));
        s0.push(rat(1, 2), p("x2", &nm));
        ModuleCert {
            target: p("1-x1", &nm),
            sigmas: vec![s0, SosPoly::constant(2, rat(1, 2))],
        }
    }

    #[test]
    fn sphere_identity_accepts() {
        assert_eq!(verify_module(&sphere_cert(), &sphere_set()), Ok(()));
    }

    #[test]
    fn zero_certificate_accepts() {
        let cert = ModuleCert::zero(Polynomial::zero(2), 1);
        assert_eq!(verify_module(&cert, &sphere_set()), Ok(()));
    }

    #[test]
    fn wrong_expansion_rejects() {
        let nm = ["x1", "x2"];
        let cert = ModuleCert {
            target: p("1", &nm),
            sigmas: vec![SosPoly::square(p("x1", &nm)), SosPoly::zero()],
        };
        assert!(matches!(
            verify_module(&cert, &sphere_set()),
            Err(CertError::IdentityMismatch(..))
        ));
    }

    #[test]
    fn preorder_equals_module_for_single_generator() {
        let cert = sphere_cert().into_preorder(&sphere_set()).unwrap();
        assert_eq!(verify_preorder(&cert, &sphere_set()), Ok(()));
    }

    #[test]
    fn preorder_generator_product() {
        let nm = ["x"];
        let set = GeneratorSet::new(1, vec![p("x", &nm), p("1-x", &nm)]);
        let mut sigmas = BTreeMap::new();
        sigmas.insert(0b11u64, SosPoly::constant(1, rint(1)));
        let cert = PreorderCert {
            target: p("x-x^2", &nm),
            sigmas,
        };
        assert_eq!(verify_preorder(&cert, &set), Ok(()));
    }

    #[test]
    fn perturbed_certificate_rejects() {
        let mut cert = sphere_cert();
        perturb_sigma(&mut cert.sigmas[0], 0, &rat(1, 7));
        assert!(verify_module(&cert, &sphere_set()).is_err());
    }

    #[test]
    fn homogeneous_mode_checks_common_degree() {
        let nm = ["x0", "x1"];
        let set = GeneratorSet::homogeneous(2, vec![p("x0^2-x1^2", &nm)]).unwrap();
        // x0^2 * (x0^2 - x1^2) + (x1*x0)^2 = x0^4, all summands degree 4
        let cert = ModuleCert {
            target: p("x0^4", &nm),
            sigmas: vec![SosPoly::square(p("x0*x1", &nm)), SosPoly::square(p("x0", &nm))],
        };
        assert_eq!(verify_module(&cert, &set), Ok(()));
        // mixed-degree summands are rejected even if the identity holds
        let bad = ModuleCert {
            target: p("x0^4+1", &nm),
            sigmas: vec![
                SosPoly {
                    squares: vec![
                        (rint(1), p("x0*x1", &nm)),
                        (rint(1), p("1", &nm)),
                    ],
                },
                SosPoly::square(p("x0", &nm)),
            ],
        };
        assert!(matches!(
            verify_module(&bad, &set),
            Err(CertError::Homogeneity(..))
        ));
    }

    #[test]
    fn arity_mismatch_detected() {
        let cert = ModuleCert::zero(Polynomial::zero(2), 3);
        assert!(matches!(
            verify_module(&cert, &sphere_set()),
            Err(CertError::ArityMismatch(..))
        ));
    }
}
