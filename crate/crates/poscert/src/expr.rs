//! Derivation trees over quadratic modules and preorders.
//!
//! A `CertExpr` records how a membership was obtained: leaves are
//! generators, explicit sums of squares or supplied flat certificates;
//! interior nodes are sums, multiplication by sums of squares, products,
//! and the archimedean / descent rewrite identities. Every node caches the
//! polynomial it denotes, and flattening any tree yields a flat certificate
//! whose exact expansion equals that polynomial.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::cert::{merge_sigma, CertError, GeneratorSet, ModuleCert, PreorderCert, SosPoly};
use crate::poly::{Monomial, Polynomial, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Module,
    Preorder,
}

/// How the distinguished polynomial `g` of a rewrite rule is certified.
#[derive(Debug, Clone)]
pub enum GRef {
    /// `g = 1`; all its powers are trivial.
    One,
    /// `g` is the generator with this index.
    Generator(usize),
    /// `g` is certified by a derivation of its own.
    Expr(Box<CertExpr>),
}

impl GRef {
    fn poly(&self, set: &GeneratorSet) -> Result<Polynomial, CertError> {
        match self {
            GRef::One => Ok(Polynomial::one(set.nvars)),
            GRef::Generator(i) => set
                .generators
                .get(*i)
                .cloned()
                .ok_or(CertError::BadGenerator(*i, set.len())),
            GRef::Expr(e) => Ok(e.denote().clone()),
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Generator(usize),
    Sos(SosPoly),
    Module(ModuleCert),
    Preorder(PreorderCert),
    Sum(Vec<CertExpr>),
    SquareScale(SosPoly, Box<CertExpr>),
    Product(Box<CertExpr>, Box<CertExpr>),
    ArchMonomial {
        g: GRef,
        m: Monomial,
        n: Rat,
        k: u32,
        plus: bool,
        premise: Box<CertExpr>,
    },
    ArchSquare {
        g: GRef,
        a: Polynomial,
        n: Rat,
        l: u32,
        plus: Box<CertExpr>,
        minus: Box<CertExpr>,
    },
    Descent {
        g: GRef,
        kappa: Rat,
        ri: Rat,
        k0: u32,
        ki: u32,
        l: u32,
        kappa_cert: Box<CertExpr>,
        r_cert: Box<CertExpr>,
        ft_cert: Box<CertExpr>,
        t_cert: Box<CertExpr>,
    },
}

/// A derivation node together with the polynomial it denotes.
#[derive(Debug, Clone)]
pub struct CertExpr {
    kind: Kind,
    denote: Polynomial,
}

type SigmaMap = BTreeMap<u64, SosPoly>;

fn map_mul_sos(map: SigmaMap, sos: &SosPoly) -> SigmaMap {
    map.into_iter()
        .map(|(mask, sigma)| (mask, sigma.mul(sos)))
        .collect()
}

fn map_add(dst: &mut SigmaMap, src: SigmaMap) {
    for (mask, sigma) in src {
        merge_sigma(dst, mask, sigma);
    }
}

fn map_product(a: &SigmaMap, b: &SigmaMap, set: &GeneratorSet) -> SigmaMap {
    let mut out = SigmaMap::new();
    for (&ma, sa) in a {
        for (&mb, sb) in b {
            let shared = ma & mb;
            let mut sigma = sa.mul(sb);
            if shared != 0 {
                sigma = sigma.mul_square(&set.subset_product(shared));
            }
            merge_sigma(&mut out, ma ^ mb, sigma);
        }
    }
    out
}

impl CertExpr {
    pub fn denote(&self) -> &Polynomial {
        &self.denote
    }

    pub fn generator(set: &GeneratorSet, idx: usize) -> Result<CertExpr, CertError> {
        let g = set
            .generators
            .get(idx)
            .cloned()
            .ok_or(CertError::BadGenerator(idx, set.len()))?;
        Ok(CertExpr {
            kind: Kind::Generator(idx),
            denote: g,
        })
    }

    pub fn sos(nvars: usize, sos: SosPoly) -> CertExpr {
        let denote = sos.expand(nvars);
        CertExpr {
            kind: Kind::Sos(sos),
            denote,
        }
    }

    pub fn module_cert(cert: ModuleCert, set: &GeneratorSet) -> Result<CertExpr, CertError> {
        crate::cert::verify_module(&cert, set)?;
        Ok(CertExpr {
            denote: cert.target.clone(),
            kind: Kind::Module(cert),
        })
    }

    pub fn preorder_cert(cert: PreorderCert, set: &GeneratorSet) -> Result<CertExpr, CertError> {
        crate::cert::verify_preorder(&cert, set)?;
        Ok(CertExpr {
            denote: cert.target.clone(),
            kind: Kind::Preorder(cert),
        })
    }

    pub fn sum(parts: Vec<CertExpr>) -> CertExpr {
        assert!(!parts.is_empty());
        let mut denote = parts[0].denote.clone();
        for p in &parts[1..] {
            denote = denote.add(&p.denote);
        }
        CertExpr {
            kind: Kind::Sum(parts),
            denote,
        }
    }

    /// Multiply a membership by an explicit sum of squares.
    pub fn square_scale(sos: SosPoly, inner: CertExpr) -> CertExpr {
        let denote = sos.expand(inner.denote.nvars()).mul(&inner.denote);
        CertExpr {
            kind: Kind::SquareScale(sos, Box::new(inner)),
            denote,
        }
    }

    /// Scale a membership by a positive rational constant.
    pub fn scale(c: &Rat, inner: CertExpr) -> CertExpr {
        assert!(c.is_positive());
        Self::square_scale(SosPoly::constant(inner.denote.nvars(), c.clone()), inner)
    }

    /// Product of two memberships. Always valid for preorders; for modules
    /// only when the module is principal (`g^2 * SOS` stays SOS).
    pub fn product(
        a: CertExpr,
        b: CertExpr,
        set: &GeneratorSet,
        mode: Mode,
    ) -> Result<CertExpr, CertError> {
        if mode == Mode::Module && set.len() >= 2 {
            return Err(CertError::ProductNotClosed(set.len()));
        }
        let denote = a.denote.mul(&b.denote);
        Ok(CertExpr {
            kind: Kind::Product(Box::new(a), Box::new(b)),
            denote,
        })
    }

    /// `g^{k+1}(gN +- m)` from the premise `g^k(g^2 N - m^2)` via the
    /// identity `g^{k+1}(gN +- m) = 1/2 (g^{k+2}(N-1) + g^k(g^2 N - m^2)
    /// + g^k(m +- g)^2)`.
    pub fn arch_monomial(
        set: &GeneratorSet,
        g: GRef,
        m: Monomial,
        n: Rat,
        k: u32,
        plus: bool,
        premise: CertExpr,
    ) -> Result<CertExpr, CertError> {
        if n < Rat::one() {
            return Err(CertError::Invalid(format!(
                "archimedean monomial rule needs N >= 1, got {n}"
            )));
        }
        let gp = g.poly(set)?;
        let m_poly = Polynomial::from_terms(set.nvars, [(m.clone(), Rat::one())]);
        let expected = gp
            .pow(k)
            .mul(&gp.square().scale(&n).sub(&m_poly.square()));
        if premise.denote != expected {
            return Err(CertError::Invalid(
                "premise does not denote g^k(g^2 N - m^2)".to_string(),
            ));
        }
        let signed = if plus {
            gp.scale(&n).add(&m_poly)
        } else {
            gp.scale(&n).sub(&m_poly)
        };
        let denote = gp.pow(k + 1).mul(&signed);
        Ok(CertExpr {
            kind: Kind::ArchMonomial {
                g,
                m,
                n,
                k,
                plus,
                premise: Box::new(premise),
            },
            denote,
        })
    }

    /// `g^{k+l}(g^{2l} N^2 - a^2)` from the premises `g^{k+l} N +- g^k a`
    /// via `g^{k+l}(g^{2l}N^2 - a^2) = 1/(2N)((g^l N + a)^2 (g^{k+l} N -
    /// g^k a) + (g^l N - a)^2 (g^{k+l} N + g^k a))`.
    #[allow(clippy::too_many_arguments)]
    pub fn arch_square(
        set: &GeneratorSet,
        g: GRef,
        a: Polynomial,
        n: Rat,
        k: u32,
        l: u32,
        plus: CertExpr,
        minus: CertExpr,
    ) -> Result<CertExpr, CertError> {
        if !n.is_positive() {
            return Err(CertError::Invalid("archimedean square rule needs N > 0".into()));
        }
        let gp = g.poly(set)?;
        let head = gp.pow(k + l).scale(&n);
        let tail = gp.pow(k).mul(&a);
        if plus.denote != head.add(&tail) {
            return Err(CertError::Invalid(
                "plus premise does not denote g^{k+l} N + g^k a".to_string(),
            ));
        }
        if minus.denote != head.sub(&tail) {
            return Err(CertError::Invalid(
                "minus premise does not denote g^{k+l} N - g^k a".to_string(),
            ));
        }
        let denote = gp
            .pow(k + l)
            .mul(&gp.pow(2 * l).scale(&(&n * &n)).sub(&a.square()));
        Ok(CertExpr {
            kind: Kind::ArchSquare {
                g,
                a,
                n,
                l,
                plus: Box::new(plus),
                minus: Box::new(minus),
            },
            denote,
        })
    }

    /// One descent step: from `g^{k0+m} kappa - g^{k0} t`, `g^{ki+l} r_i +
    /// g^{ki} f`, `f t - g^{l+m}` and `t` derive `g^{ki+k0+m}(g^l (r_i -
    /// 1/kappa) + f)`; the returned rational is `r_{i+1} = r_i - 1/kappa`.
    #[allow(clippy::too_many_arguments)]
    pub fn descent_step(
        set: &GeneratorSet,
        f: &Polynomial,
        g: GRef,
        t: &Polynomial,
        kappa: Rat,
        k0: u32,
        ki: u32,
        l: u32,
        m: u32,
        ri: Rat,
        kappa_cert: CertExpr,
        r_cert: CertExpr,
        ft_cert: CertExpr,
        t_cert: CertExpr,
    ) -> Result<(CertExpr, Rat), CertError> {
        if !kappa.is_positive() {
            return Err(CertError::Invalid("descent needs kappa > 0".into()));
        }
        if ri.is_negative() {
            return Err(CertError::Invalid("descent needs r_i >= 0".into()));
        }
        let gp = g.poly(set)?;
        if kappa_cert.denote != gp.pow(k0 + m).scale(&kappa).sub(&gp.pow(k0).mul(t)) {
            return Err(CertError::Invalid(
                "premise does not denote g^{k0+m} kappa - g^{k0} t".to_string(),
            ));
        }
        if r_cert.denote != gp.pow(ki + l).scale(&ri).add(&gp.pow(ki).mul(f)) {
            return Err(CertError::Invalid(
                "premise does not denote g^{ki+l} r_i + g^{ki} f".to_string(),
            ));
        }
        if ft_cert.denote != f.mul(t).sub(&gp.pow(l + m)) {
            return Err(CertError::Invalid(
                "premise does not denote f t - g^{l+m}".to_string(),
            ));
        }
        if t_cert.denote != *t {
            return Err(CertError::Invalid("premise does not denote t".to_string()));
        }
        let r_next = &ri - Rat::one() / &kappa;
        let denote = gp
            .pow(ki + k0 + m)
            .mul(&gp.pow(l).scale(&r_next).add(f));
        Ok((
            CertExpr {
                kind: Kind::Descent {
                    g,
                    kappa,
                    ri,
                    k0,
                    ki,
                    l,
                    kappa_cert: Box::new(kappa_cert),
                    r_cert: Box::new(r_cert),
                    ft_cert: Box::new(ft_cert),
                    t_cert: Box::new(t_cert),
                },
                denote,
            },
            r_next,
        ))
    }

    /// Membership of `g^power * sos` expressed as a sigma map.
    fn g_power_map(
        g: &GRef,
        power: u32,
        sos: SosPoly,
        set: &GeneratorSet,
    ) -> Result<SigmaMap, CertError> {
        let mut out = SigmaMap::new();
        if sos.is_zero() {
            return Ok(out);
        }
        match g {
            GRef::One => {
                merge_sigma(&mut out, 0, sos);
            }
            GRef::Generator(i) => {
                let gp = set
                    .generators
                    .get(*i)
                    .ok_or(CertError::BadGenerator(*i, set.len()))?;
                let sigma = sos.mul_square(&gp.pow(power / 2));
                let mask = if power % 2 == 1 { 1u64 << i } else { 0 };
                merge_sigma(&mut out, mask, sigma);
            }
            GRef::Expr(e) => {
                let gp = e.denote();
                if power % 2 == 0 {
                    merge_sigma(&mut out, 0, sos.mul_square(&gp.pow(power / 2)));
                } else {
                    let inner = e.flatten_map(set)?;
                    map_add(
                        &mut out,
                        map_mul_sos(inner, &sos.mul_square(&gp.pow(power / 2))),
                    );
                }
            }
        }
        Ok(out)
    }

    fn flatten_map(&self, set: &GeneratorSet) -> Result<SigmaMap, CertError> {
        let nvars = set.nvars;
        let mut out = SigmaMap::new();
        match &self.kind {
            Kind::Generator(i) => {
                if *i >= set.len() {
                    return Err(CertError::BadGenerator(*i, set.len()));
                }
                merge_sigma(&mut out, 1u64 << i, SosPoly::constant(nvars, Rat::one()));
            }
            Kind::Sos(s) => merge_sigma(&mut out, 0, s.clone()),
            Kind::Module(c) => {
                for (i, sigma) in c.sigmas.iter().enumerate() {
                    let mask = if i == 0 { 0 } else { 1u64 << (i - 1) };
                    merge_sigma(&mut out, mask, sigma.clone());
                }
            }
            Kind::Preorder(c) => {
                for (&mask, sigma) in &c.sigmas {
                    merge_sigma(&mut out, mask, sigma.clone());
                }
            }
            Kind::Sum(parts) => {
                for p in parts {
                    map_add(&mut out, p.flatten_map(set)?);
                }
            }
            Kind::SquareScale(sos, inner) => {
                out = map_mul_sos(inner.flatten_map(set)?, sos);
            }
            Kind::Product(a, b) => {
                out = map_product(&a.flatten_map(set)?, &b.flatten_map(set)?, set);
            }
            Kind::ArchMonomial {
                g,
                m,
                n,
                k,
                plus,
                premise,
            } => {
                let gp = g.poly(set)?;
                let m_poly = Polynomial::from_terms(nvars, [(m.clone(), Rat::one())]);
                let half = crate::poly::rat(1, 2);
                // 1/2 g^{k+2}(N-1)
                let excess = n - Rat::one();
                if !excess.is_zero() {
                    map_add(
                        &mut out,
                        Self::g_power_map(g, k + 2, SosPoly::constant(nvars, &half * excess), set)?,
                    );
                }
                // 1/2 premise
                map_add(
                    &mut out,
                    map_mul_sos(premise.flatten_map(set)?, &SosPoly::constant(nvars, half.clone())),
                );
                // 1/2 g^k (m +- g)^2
                let signed = if *plus {
                    m_poly.add(&gp)
                } else {
                    m_poly.sub(&gp)
                };
                map_add(
                    &mut out,
                    Self::g_power_map(g, *k, SosPoly::weighted(half, signed), set)?,
                )
            }
            Kind::ArchSquare {
                g,
                a,
                n,
                l,
                plus,
                minus,
            } => {
                let gp = g.poly(set)?;
                let head = gp.pow(*l).scale(n);
                let w = Rat::one() / (crate::poly::rint(2) * n);
                let plus_sq = SosPoly::weighted(w.clone(), head.add(a));
                let minus_sq = SosPoly::weighted(w, head.sub(a));
                map_add(&mut out, map_mul_sos(minus.flatten_map(set)?, &plus_sq));
                map_add(&mut out, map_mul_sos(plus.flatten_map(set)?, &minus_sq));
            }
            Kind::Descent {
                g,
                kappa,
                ri,
                k0,
                ki,
                l,
                kappa_cert,
                r_cert,
                ft_cert,
                t_cert,
            } => {
                let inv = SosPoly::constant(nvars, Rat::one() / kappa);
                let prod = map_product(
                    &kappa_cert.flatten_map(set)?,
                    &r_cert.flatten_map(set)?,
                    set,
                );
                map_add(&mut out, map_mul_sos(prod, &inv));
                // g^{ki+k0} (f t - g^{l+m}) / kappa
                let ft = map_mul_sos(ft_cert.flatten_map(set)?, &inv);
                let mut lifted = SigmaMap::new();
                for (mask, sigma) in ft {
                    let gmap = Self::g_power_map(g, ki + k0, sigma, set)?;
                    for (gmask, gsigma) in gmap {
                        if gmask & mask != 0 {
                            let shared = set.subset_product(gmask & mask);
                            merge_sigma(
                                &mut lifted,
                                gmask ^ mask,
                                gsigma.mul_square(&shared),
                            );
                        } else {
                            merge_sigma(&mut lifted, gmask | mask, gsigma);
                        }
                    }
                }
                map_add(&mut out, lifted);
                // g^{ki+k0+l} r_i t / kappa
                if !ri.is_zero() {
                    let scaled = map_mul_sos(
                        t_cert.flatten_map(set)?,
                        &SosPoly::constant(nvars, ri / kappa),
                    );
                    let mut lifted = SigmaMap::new();
                    for (mask, sigma) in scaled {
                        let gmap = Self::g_power_map(g, ki + k0 + l, sigma, set)?;
                        for (gmask, gsigma) in gmap {
                            if gmask & mask != 0 {
                                let shared = set.subset_product(gmask & mask);
                                merge_sigma(&mut lifted, gmask ^ mask, gsigma.mul_square(&shared));
                            } else {
                                merge_sigma(&mut lifted, gmask | mask, gsigma);
                            }
                        }
                    }
                    map_add(&mut out, lifted);
                }
            }
        }
        Ok(out)
    }

    /// Flatten to a flat preorder certificate over `set`.
    pub fn flatten_preorder(&self, set: &GeneratorSet) -> Result<PreorderCert, CertError> {
        let sigmas = self.flatten_map(set)?;
        Ok(PreorderCert {
            target: self.denote.clone(),
            sigmas,
        })
    }

    /// Flatten to a flat module certificate over `set`. Fails when the
    /// derivation genuinely needs generator products.
    pub fn flatten_module(&self, set: &GeneratorSet) -> Result<ModuleCert, CertError> {
        let map = self.flatten_map(set)?;
        let mut sigmas = vec![SosPoly::zero(); set.len() + 1];
        for (mask, sigma) in map {
            if mask == 0 {
                sigmas[0] = sigmas[0].add(&sigma);
            } else if mask.count_ones() == 1 {
                let i = mask.trailing_zeros() as usize;
                sigmas[i + 1] = sigmas[i + 1].add(&sigma);
            } else {
                return Err(CertError::ProductNotClosed(set.len()));
            }
        }
        Ok(ModuleCert {
            target: self.denote.clone(),
            sigmas,
        })
    }
}
