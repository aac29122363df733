//! The constructive chain for compact sets: tangent-plane base
//! certificates on balls, the inductive reduction that peels one
//! constraint per step, the full Putinar search, certificate surgery
//! turning "negative on infinity" into an explicit ball generator, the
//! geometric-series extension, SOS-denominator certificates and the
//! projective search.
//!
//! Numeric fitting appears only as a heuristic; every accepted result is
//! gated by exact verification, so the floating point stage can cause
//! failure but never an unsound accept.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cert::{
    verify_module, CertError, GeneratorSet, ModuleCert, SosPoly,
};
use crate::expr::{CertExpr, Mode};
use crate::linalg::{least_squares_f64, rationalize};
use crate::poly::{
    monomials_of_degree, rat, rint, sum_of_squares_poly, Monomial, PolyError, Polynomial, Rat,
};
use crate::polya::{habicht_certificate, handelman_simplex, HabichtCert, PolyaError, SimplexSpec};

#[derive(Debug, Error)]
pub enum PutinarError {
    #[error("{0}")]
    Precondition(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("resource cap: {0}")]
    ResourceCap(String),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Polya(#[from] PolyaError),
}

/// The generator `N - (x_1^2 + ... + x_n^2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallSpec {
    pub n: Rat,
}

impl BallSpec {
    pub fn new(n: Rat) -> Result<Self, PutinarError> {
        if !n.is_positive() {
            return Err(PutinarError::Precondition("ball bound must be positive".into()));
        }
        Ok(BallSpec { n })
    }

    pub fn polynomial(&self, nvars: usize) -> Polynomial {
        Polynomial::constant(nvars, self.n.clone()).sub(&sum_of_squares_poly(nvars))
    }

    /// Recognize a generator of ball shape.
    pub fn matches(g: &Polynomial) -> Option<BallSpec> {
        let nvars = g.nvars();
        let n = g.constant_term();
        if !n.is_positive() {
            return None;
        }
        if *g == Polynomial::constant(nvars, n.clone()).sub(&sum_of_squares_poly(nvars)) {
            Some(BallSpec { n })
        } else {
            None
        }
    }

    /// A rational `c >= sqrt(N)`, tight when `N` is a rational square:
    /// `c = (b^2 + N) / 2b` for a rational `b` near `sqrt(N)`.
    fn outer_radius(&self) -> (Rat, Rat) {
        let approx = rat_to_f64(&self.n).sqrt();
        let mut b = rationalize(approx, 1 << 12);
        if !b.is_positive() {
            b = Rat::one();
        }
        let c = (&b * &b + &self.n) / (rint(2) * &b);
        (b, c)
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(0.0)
}

/// Problem data for the search operations.
#[derive(Debug, Clone)]
pub struct Problem {
    pub set: GeneratorSet,
    pub target: Polynomial,
    pub mode: Mode,
    pub ball: Option<Rat>,
    pub degree_cap: u32,
    pub grid_resolution: u32,
}

impl Problem {
    pub fn new(set: GeneratorSet, target: Polynomial, mode: Mode) -> Self {
        Problem {
            set,
            target,
            mode,
            ball: None,
            degree_cap: 12,
            grid_resolution: 8,
        }
    }
}

/// An all-negative rational unit vector, built recursively from the
/// (3,4,5) triangle.
fn negative_unit_vector(n: usize) -> Vec<Rat> {
    assert!(n >= 1);
    if n == 1 {
        return vec![rint(-1)];
    }
    let mut tail = negative_unit_vector(n - 1);
    for t in tail.iter_mut() {
        *t = &*t * rat(4, 5);
    }
    let mut v = vec![rat(-3, 5)];
    v.extend(tail);
    v
}

/// Certificate for `c - <u, x>` in `M_{N - sum x^2}` where `u` is a
/// rational unit vector and `c = (b^2 + N) / 2b >= sqrt(N)`:
/// `c - <u,x> = 1/(2b) sum (x_i - b u_i)^2 + 1/(2b) (N - sum x^2)`.
pub fn tangent_plane_cert(u: &[Rat], ball: &BallSpec) -> Result<ModuleCert, PutinarError> {
    let nvars = u.len();
    let norm: Rat = u.iter().map(|c| c * c).sum();
    if norm != Rat::one() {
        return Err(PutinarError::Precondition(format!(
            "direction is not a rational unit vector (|u|^2 = {norm})"
        )));
    }
    let (b, c) = ball.outer_radius();
    let half = Rat::one() / (rint(2) * &b);
    let mut shifted = Polynomial::zero(nvars);
    let mut sigma0 = SosPoly::zero();
    for (i, ui) in u.iter().enumerate() {
        let base = Polynomial::var(nvars, i).sub(&Polynomial::constant(nvars, &b * ui));
        sigma0.push(half.clone(), base);
        shifted = shifted.add(&Polynomial::var(nvars, i).scale(ui));
    }
    let target = Polynomial::constant(nvars, c).sub(&shifted);
    let cert = ModuleCert {
        target,
        sigmas: vec![sigma0, SosPoly::constant(nvars, half)],
    };
    let set = GeneratorSet::new(nvars, vec![ball.polynomial(nvars)]);
    verify_module(&cert, &set)?;
    Ok(cert)
}

/// The `n+1` facet polynomials of a simplex of tangent planes that
/// contains the ball, together with their module certificates.
fn tangent_simplex(
    nvars: usize,
    ball: &BallSpec,
) -> Result<(Vec<Polynomial>, Vec<ModuleCert>), PutinarError> {
    let mut directions: Vec<Vec<Rat>> = (0..nvars)
        .map(|i| {
            let mut v = vec![Rat::zero(); nvars];
            v[i] = rint(1);
            v
        })
        .collect();
    directions.push(negative_unit_vector(nvars));
    let mut lambdas = Vec::new();
    let mut certs = Vec::new();
    for u in &directions {
        let cert = tangent_plane_cert(u, ball)?;
        lambdas.push(cert.target.clone());
        certs.push(cert);
    }
    Ok((lambdas, certs))
}

/// Module certificate over `{N - sum x^2}` for `f` positive on the ball:
/// Handelman on a simplex of tangent planes, with the `lambda^alpha`
/// products pushed into the principal module by the product rule.
pub fn ball_certificate(
    f: &Polynomial,
    ball: &BallSpec,
    n_max: u32,
) -> Result<ModuleCert, PutinarError> {
    let nvars = f.nvars();
    let set = GeneratorSet::new(nvars, vec![ball.polynomial(nvars)]);
    // constant target: sigma_0 = c
    if f.degree().unwrap_or(0) == 0 {
        let c = f.constant_term();
        if !c.is_positive() {
            return Err(PutinarError::Precondition(
                "constant target must be positive".into(),
            ));
        }
        let cert = ModuleCert {
            target: f.clone(),
            sigmas: vec![SosPoly::constant(nvars, c), SosPoly::zero()],
        };
        verify_module(&cert, &set)?;
        return Ok(cert);
    }
    // the hypothesis is strict positivity on the ball; reject visible
    // boundary zeros up front
    let (_, radius) = ball.outer_radius();
    for point in k_grid(&set, &radius, 8) {
        if !f.evaluate(&point)?.is_positive() {
            return Err(PutinarError::Precondition(format!(
                "target is not strictly positive on the ball (value {} at a grid point)",
                f.evaluate(&point)?
            )));
        }
    }
    // simple exact multipliers first: constant sigma_1 with the rest a
    // visible non-negative combination of even monomials
    for c in [Rat::zero(), rint(1), rat(1, 2), rint(2)] {
        let r = f.sub(&ball.polynomial(nvars).scale(&c));
        if let Ok(sigma0) = even_positive_as_sos(&r) {
            if sigma0.is_zero() && c.is_zero() {
                continue;
            }
            let sigma1 = if c.is_zero() {
                SosPoly::zero()
            } else {
                SosPoly::constant(nvars, c)
            };
            let cert = ModuleCert {
                target: f.clone(),
                sigmas: vec![sigma0, sigma1],
            };
            if verify_module(&cert, &set).is_ok() {
                return Ok(cert);
            }
        }
    }
    let (lambdas, tangent_certs) = tangent_simplex(nvars, ball)?;
    let handelman = handelman_simplex(f, &SimplexSpec::Lambdas(lambdas.clone()), n_max)
        .map_err(|e| PutinarError::Inconclusive(format!("Handelman stage failed: {e}")))?;

    let mut parts: Vec<CertExpr> = Vec::new();
    for (alpha, a) in &handelman.coefficients {
        let mut base = Polynomial::one(nvars);
        let mut odd: Vec<usize> = Vec::new();
        for (i, &e) in alpha.iter().enumerate() {
            base = base.mul(&lambdas[i].pow(e / 2));
            if e % 2 == 1 {
                odd.push(i);
            }
        }
        let sos = SosPoly::weighted(a.clone(), base);
        if odd.is_empty() {
            parts.push(CertExpr::sos(nvars, sos));
        } else {
            let mut chain: Option<CertExpr> = None;
            for &i in &odd {
                let leaf = CertExpr::module_cert(tangent_certs[i].clone(), &set)?;
                chain = Some(match chain {
                    None => leaf,
                    Some(acc) => CertExpr::product(acc, leaf, &set, Mode::Module)?,
                });
            }
            parts.push(CertExpr::square_scale(sos, chain.unwrap()));
        }
    }
    let cert = CertExpr::sum(parts).flatten_module(&set)?;
    if cert.target != *f {
        return Err(PutinarError::Inconclusive(
            "flattened ball certificate does not denote the target".into(),
        ));
    }
    verify_module(&cert, &set)?;
    Ok(cert)
}

/// Dyadic grid over `[-R, R]^n` intersected with `K_set` by exact sign
/// evaluation.
pub fn k_grid(set: &GeneratorSet, radius: &Rat, resolution: u32) -> Vec<Vec<Rat>> {
    let nvars = set.nvars;
    let res = resolution.max(2);
    let axis: Vec<Rat> = (0..=res)
        .map(|k| -radius + rint(2) * radius * Rat::new(k.into(), res.into()))
        .collect();
    let mut points = vec![Vec::new()];
    for _ in 0..nvars {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for a in &axis {
                let mut q = p.clone();
                q.push(a.clone());
                next.push(q);
            }
        }
        points = next;
    }
    points
        .into_iter()
        .filter(|p| {
            set.generators
                .iter()
                .all(|g| !g.evaluate(p).unwrap().is_negative())
        })
        .collect()
}

/// One step of the inductive property: a single weighted square `sigma`
/// with `f - sigma * g_peel` strictly positive (by margin) at every grid
/// point of the outer set.
pub fn inductive_reduce(
    f: &Polynomial,
    outer: &GeneratorSet,
    g_peel: &Polynomial,
    ball: &BallSpec,
    grid_resolution: u32,
    degree_cap: u32,
) -> Result<(SosPoly, Polynomial, Rat), PutinarError> {
    let (_, radius) = ball.outer_radius();
    let points = k_grid(outer, &radius, grid_resolution);
    if points.is_empty() {
        return Err(PutinarError::Precondition(
            "grid found no points of the outer set".into(),
        ));
    }
    let margin_of = |remainder: &Polynomial| -> Option<Rat> {
        let mut min: Option<Rat> = None;
        for p in &points {
            let v = remainder.evaluate(p).ok()?;
            min = Some(match min {
                None => v,
                Some(m) => m.min(v),
            });
        }
        min.filter(|m| m.is_positive())
    };

    // numeric M = max f / g + 1 over grid points with g clearly positive
    let mut m_hat = 1.0f64;
    for p in &points {
        let g = rat_to_f64(&g_peel.evaluate(p)?);
        if g > 0.25 {
            let fv = rat_to_f64(&f.evaluate(p)?);
            m_hat = m_hat.max(fv / g + 1.0);
        }
    }

    // exact constant candidates first; the degenerate branch
    // sigma = 0 is among them
    let mut candidates = vec![
        Rat::zero(),
        rint(1),
        rat(1, 2),
        rint(2),
        rationalize(m_hat, 1 << 16),
    ];
    candidates.dedup();
    for c in candidates {
        let sigma = if c.is_zero() {
            SosPoly::zero()
        } else if c.is_positive() {
            SosPoly::constant(f.nvars(), c.clone())
        } else {
            continue;
        };
        let remainder = f.sub(&sigma.expand(f.nvars()).mul(g_peel));
        if let Some(margin) = margin_of(&remainder) {
            return Ok((sigma, remainder, margin));
        }
    }

    // numeric path: fit r ~ sqrt(min(M, f / 2g)) over a monomial basis,
    // rationalize, re-check exactly
    let fit_points: Vec<&Vec<Rat>> = points.iter().collect();
    let mut targets = Vec::with_capacity(fit_points.len());
    for p in &fit_points {
        let g = rat_to_f64(&g_peel.evaluate(p)?);
        let fv = rat_to_f64(&f.evaluate(p)?);
        let t = if g > 1e-9 {
            (fv / (2.0 * g)).min(m_hat).max(0.0)
        } else {
            m_hat
        };
        targets.push(t.sqrt());
    }
    let max_fit_degree = degree_cap / 2;
    for deg in 0..=max_fit_degree {
        let mut basis: Vec<Monomial> = Vec::new();
        for d in 0..=deg {
            basis.extend(monomials_of_degree(f.nvars(), d));
        }
        let rows: Vec<Vec<f64>> = fit_points
            .iter()
            .map(|p| {
                let pf: Vec<f64> = p.iter().map(rat_to_f64).collect();
                basis
                    .iter()
                    .map(|m| {
                        m.0.iter()
                            .zip(&pf)
                            .map(|(&e, x)| x.powi(e as i32))
                            .product()
                    })
                    .collect()
            })
            .collect();
        let Some(coefs) = least_squares_f64(&rows, &targets) else {
            continue;
        };
        for denom_bits in [8u32, 12, 16] {
            let r = Polynomial::from_terms(
                f.nvars(),
                basis
                    .iter()
                    .zip(&coefs)
                    .map(|(m, &c)| (m.clone(), rationalize(c, 1u64 << denom_bits))),
            );
            if r.is_zero() {
                continue;
            }
            let sigma = SosPoly::square(r.clone());
            let remainder = f.sub(&r.square().mul(g_peel));
            if let Some(margin) = margin_of(&remainder) {
                return Ok((sigma, remainder, margin));
            }
        }
    }
    Err(PutinarError::Inconclusive(
        "no multiplier with positive margin found within the caps".into(),
    ))
}

/// Record of a completed search.
#[derive(Debug, Clone)]
pub struct SearchStep {
    pub peeled: usize,
    pub sigma: SosPoly,
    pub remainder: Polynomial,
    pub margin: Rat,
}

#[derive(Debug, Clone)]
pub struct SearchTrace {
    pub steps: Vec<SearchStep>,
    pub base: String,
}

/// Full Putinar search: peel every non-ball generator via the inductive
/// reduction, certify the final remainder on the ball, and chain into a
/// flat module certificate. When no generator literally has ball shape,
/// a generator whose top part is negative definite is upgraded to a
/// virtual ball through `reduce_to_ball`.
pub fn putinar_search(problem: &Problem) -> Result<(SearchTrace, ModuleCert), PutinarError> {
    let set = &problem.set;
    let f = &problem.target;
    let nvars = set.nvars;
    if f.is_zero() {
        return Err(PutinarError::Precondition("zero target".into()));
    }

    let literal_ball = set
        .generators
        .iter()
        .enumerate()
        .find_map(|(i, g)| BallSpec::matches(g).map(|b| (i, b)));

    let (ball_index, ball, ball_expr): (Option<usize>, BallSpec, Option<CertExpr>) =
        match literal_ball {
            Some((i, b)) => (Some(i), b, None),
            None => {
                let (i, expr, b) = virtual_ball(problem)?;
                (Some(i), b, Some(expr))
            }
        };
    let ball_index = ball_index.unwrap();

    // peel the remaining generators by ascending degree
    let mut order: Vec<usize> = (0..set.len()).filter(|&i| i != ball_index).collect();
    order.sort_by_key(|&i| (set.generators[i].degree().unwrap_or(0), i));

    let mut steps = Vec::new();
    let mut remainder = f.clone();
    let mut sigmas = vec![SosPoly::zero(); set.len() + 1];
    let mut remaining: Vec<usize> = order.clone();
    remaining.push(ball_index);
    for &peel in order.iter().rev() {
        remaining.retain(|&i| i != peel);
        let outer_gens: Vec<Polynomial> = remaining
            .iter()
            .map(|&i| set.generators[i].clone())
            .chain(if ball_expr.is_some() {
                Some(ball.polynomial(nvars))
            } else {
                None
            })
            .collect();
        let outer = GeneratorSet::new(nvars, outer_gens);
        let (sigma, rem, margin) = inductive_reduce(
            &remainder,
            &outer,
            &set.generators[peel],
            &ball,
            problem.grid_resolution,
            problem.degree_cap,
        )?;
        steps.push(SearchStep {
            peeled: peel,
            sigma: sigma.clone(),
            remainder: rem.clone(),
            margin,
        });
        sigmas[peel + 1] = sigma;
        remainder = rem;
    }

    // base case on the ball
    let base_cert = ball_certificate(&remainder, &ball, problem.degree_cap.max(20))?;
    let trace = SearchTrace {
        steps,
        base: format!("ball base case, N = {}", ball.n),
    };

    let cert = match ball_expr {
        None => {
            sigmas[0] = base_cert.sigmas[0].clone();
            sigmas[ball_index + 1] = base_cert.sigmas[1].clone();
            ModuleCert {
                target: f.clone(),
                sigmas,
            }
        }
        Some(bexpr) => {
            // substitute the derived ball membership for the virtual leaf
            let mut parts = vec![CertExpr::sos(nvars, base_cert.sigmas[0].clone())];
            if !base_cert.sigmas[1].is_zero() {
                parts.push(CertExpr::square_scale(base_cert.sigmas[1].clone(), bexpr));
            }
            for (i, sigma) in sigmas.iter().enumerate().skip(1) {
                if !sigma.is_zero() {
                    parts.push(CertExpr::square_scale(
                        sigma.clone(),
                        CertExpr::generator(set, i - 1)?,
                    ));
                }
            }
            CertExpr::sum(parts).flatten_module(set)?
        }
    };
    if cert.target != *f {
        return Err(PutinarError::Inconclusive(
            "assembled certificate does not denote the target".into(),
        ));
    }
    verify_module(&cert, set)?;
    Ok((trace, cert))
}

/// Find a generator whose highest degree part is negative definite and
/// upgrade it to a ball generator via `reduce_to_ball`.
fn virtual_ball(problem: &Problem) -> Result<(usize, CertExpr, BallSpec), PutinarError> {
    let set = &problem.set;
    for (i, g) in set.generators.iter().enumerate() {
        let Ok(top) = g.highest_degree_part() else {
            continue;
        };
        if top.degree().unwrap_or(1) % 2 != 0 {
            continue;
        }
        if !negative_definite_on_grid(&top, 4) {
            continue;
        }
        let witness = habicht_certificate(&top.neg(), 40, 3)?;
        let leaf = CertExpr::generator(set, i)?;
        let (expr, n) = reduce_to_ball(leaf, Some(&witness), set)?;
        return Ok((i, expr, BallSpec { n }));
    }
    Err(PutinarError::Precondition(
        "no ball generator and no generator with negative definite top part".into(),
    ))
}

/// Exact sign scan of a homogeneous form over a box of rational
/// directions: true when negative at every nonzero grid direction.
pub fn negative_definite_on_grid(form: &Polynomial, resolution: i64) -> bool {
    let nvars = form.nvars();
    let mut dirs = vec![vec![0i64; nvars]];
    for _ in 0..nvars {
        let mut next = Vec::new();
        for d in &dirs {
            for v in -resolution..=resolution {
                let mut q = d.clone();
                q.remove(0);
                q.push(v);
                next.push(q);
            }
        }
        dirs = next;
    }
    for d in dirs {
        if d.iter().all(|&v| v == 0) {
            continue;
        }
        let point: Vec<Rat> = d.iter().map(|&v| rint(v)).collect();
        match form.evaluate(&point) {
            Ok(v) if v.is_negative() => {}
            _ => return false,
        }
    }
    true
}

/// Certificate surgery from the §3.2-style proof: given `p` in the module
/// with `p^g` negative definite (witnessed by a Habicht identity for
/// `-p^g`), produce a membership of some `N - sum x_i^2`.
///
/// The witness may be omitted when `p` itself is already of the form
/// `constant - (negative even terms)`; the pipeline then starts directly
/// at the monomial-elimination stage.
pub fn reduce_to_ball(
    p_expr: CertExpr,
    witness: Option<&HabichtCert>,
    set: &GeneratorSet,
) -> Result<(CertExpr, Rat), PutinarError> {
    let p = p_expr.denote().clone();
    let nvars = p.nvars();
    let d_p = p
        .degree()
        .ok_or_else(|| PutinarError::Precondition("zero polynomial".into()))?;
    if d_p % 2 != 0 {
        return Err(PutinarError::Precondition(
            "p must have even degree".into(),
        ));
    }
    // already in target shape
    if let Some(b) = BallSpec::matches(&p) {
        return Ok((p_expr, b.n));
    }
    let top = p.highest_degree_part()?;
    if !negative_definite_on_grid(&top, 4) {
        return Err(PutinarError::Precondition(
            "highest degree part is not negative except at the origin".into(),
        ));
    }

    // fast path: constant minus non-negative combination of even
    // monomials, with degree a power of two
    let fast = d_p.is_power_of_two()
        && p.terms().all(|(m, c)| {
            m.is_constant() || (m.is_even() && c.is_negative())
        });

    let (mut expr, mut current) = if fast {
        (p_expr, p)
    } else {
        let witness = witness.ok_or_else(|| {
            PutinarError::Precondition("general reduction needs a Habicht witness".into())
        })?;
        witness
            .verify(&top.neg())
            .map_err(|e| PutinarError::Precondition(format!("witness invalid: {e}")))?;
        // (M2 + R2) p = -M1 - R1 + R  with  R = (M2 + R2)(p - p^g)
        let quot = witness.m2.add(&witness.r2);
        let e0 = CertExpr::square_scale(quot, p_expr);
        // add R1 to drop it from the right-hand side
        let e1 = CertExpr::sum(vec![e0, CertExpr::sos(nvars, witness.r1.clone())]);
        let cur = e1.denote().clone();
        (e1, cur)
    };

    // pad with (sum x^2)^j so the top degree is a power of two
    let mut deg = current.degree().unwrap();
    if !deg.is_power_of_two() {
        let target = deg.next_power_of_two();
        let j = (target - deg) / 2;
        let pad = even_positive_as_sos(&sum_of_squares_poly(nvars).pow(j))?;
        expr = CertExpr::square_scale(pad, expr);
        current = expr.denote().clone();
        deg = target;
    }
    let d_log = deg.trailing_zeros();

    // dyadic elimination: stage i removes all monomials whose degree has
    // 2-adic valuation exactly i; replacements move strictly upward in
    // valuation, to the top slot (negative budget preserved by capping) or
    // to the constant
    for stage in 0..d_log {
        loop {
            let Some((m, c)) = current.terms().find(|(m, _)| {
                let dm = m.degree();
                dm > 0 && dm < deg && dm.trailing_zeros() == stage
            }) else {
                break;
            };
            let m = m.clone();
            let c = c.clone();
            let dm = m.degree();
            let step = 1u32 << stage;
            let lo = (dm - step) / 2;
            let (m1, m2) = split_monomial(&m, lo);
            let p1 = Polynomial::from_terms(nvars, [(m1, Rat::one())]);
            let p2 = Polynomial::from_terms(nvars, [(m2.clone(), Rat::one())]);
            // weight w, base m1 + beta m2 with 2 w beta = -c
            let w = if dm + step == deg {
                // the m2^2 slot sits at the top degree: spend at most half
                // of its negative budget
                let slot = Monomial(m2.0.iter().map(|e| 2 * e).collect());
                let slack = -current.coefficient(&slot);
                if !slack.is_positive() {
                    return Err(PutinarError::Inconclusive(
                        "top-degree slot lost its negative coefficient".into(),
                    ));
                }
                (&c * &c) / (rint(2) * slack)
            } else {
                (if c.is_negative() { -&c } else { c.clone() }) / rint(2)
            };
            let beta = -&c / (rint(2) * &w);
            let base = p1.add(&p2.scale(&beta));
            let square = SosPoly::weighted(w, base);
            expr = CertExpr::sum(vec![expr, CertExpr::sos(nvars, square)]);
            current = expr.denote().clone();
        }
    }

    // only the constant and the top-degree even monomials remain; cancel
    // non-pure top monomials with monomial squares
    let mut additions = SosPoly::zero();
    for (m, c) in current.terms() {
        if m.is_constant() {
            continue;
        }
        debug_assert_eq!(m.degree(), deg);
        let pure = m.0.iter().filter(|&&e| e > 0).count() == 1;
        if !pure {
            if c.is_positive() {
                return Err(PutinarError::Inconclusive(
                    "non-pure top monomial with positive coefficient".into(),
                ));
            }
            additions.push(-c, Polynomial::from_terms(nvars, [(m.half(), Rat::one())]));
        }
    }
    if !additions.is_zero() {
        expr = CertExpr::sum(vec![expr, CertExpr::sos(nvars, additions)]);
        current = expr.denote().clone();
    }

    // equalize the pure coefficients, scale them to -1
    let mut pure_coefs = Vec::with_capacity(nvars);
    for i in 0..nvars {
        let mut e = vec![0u32; nvars];
        e[i] = deg;
        let c = current.coefficient(&Monomial(e));
        if !c.is_negative() {
            return Err(PutinarError::Inconclusive(format!(
                "pure power of variable {i} lost its negative coefficient"
            )));
        }
        pure_coefs.push(-c);
    }
    let a_min = pure_coefs.iter().cloned().reduce(|a, b| a.min(b)).unwrap();
    let mut equalize = SosPoly::zero();
    for (i, a) in pure_coefs.iter().enumerate() {
        let excess = a - &a_min;
        if excess.is_positive() {
            let mut e = vec![0u32; nvars];
            e[i] = deg / 2;
            equalize.push(excess, Polynomial::from_terms(nvars, [(Monomial(e), Rat::one())]));
        }
    }
    if !equalize.is_zero() {
        expr = CertExpr::sum(vec![expr, CertExpr::sos(nvars, equalize)]);
    }
    if a_min != Rat::one() {
        expr = CertExpr::square_scale(
            SosPoly::constant(nvars, Rat::one() / &a_min),
            expr,
        );
    }
    current = expr.denote().clone();

    // descend the exponent: N - sum x_i^{2^e} + sum (x_i^{2^{e-1}} - 1/2)^2
    // = N + n/4 - sum x_i^{2^{e-1}}
    let mut e = deg;
    while e > 2 {
        let h = e / 2;
        let mut desc = SosPoly::zero();
        for i in 0..nvars {
            let mut exps = vec![0u32; nvars];
            exps[i] = h;
            let base = Polynomial::from_terms(nvars, [(Monomial(exps), Rat::one())])
                .sub(&Polynomial::constant(nvars, rat(1, 2)));
            desc.push(Rat::one(), base);
        }
        expr = CertExpr::sum(vec![expr, CertExpr::sos(nvars, desc)]);
        current = expr.denote().clone();
        e = h;
    }

    let ball = BallSpec::matches(&current).ok_or_else(|| {
        PutinarError::Inconclusive(format!(
            "surgery did not reach ball shape (got {:?})",
            current
        ))
    })?;
    // flattening must verify over the ambient set
    let flat = expr.flatten_preorder(set)?;
    crate::cert::verify_preorder(&flat, set)?;
    Ok((expr, ball.n))
}

/// Greedy split of a monomial into a factor of the requested degree and
/// the complementary factor.
fn split_monomial(m: &Monomial, lo_degree: u32) -> (Monomial, Monomial) {
    let mut lo = vec![0u32; m.0.len()];
    let mut need = lo_degree;
    for (i, &e) in m.0.iter().enumerate() {
        let take = e.min(need);
        lo[i] = take;
        need -= take;
        if need == 0 {
            break;
        }
    }
    let hi: Vec<u32> = m.0.iter().zip(&lo).map(|(&e, &l)| e - l).collect();
    (Monomial(lo), Monomial(hi))
}

/// A polynomial with non-negative coefficients on even monomials, as a
/// sum of squares of monomials.
fn even_positive_as_sos(p: &Polynomial) -> Result<SosPoly, PutinarError> {
    let mut out = SosPoly::zero();
    for (m, c) in p.terms() {
        if !m.is_even() || c.is_negative() {
            return Err(PutinarError::Precondition(
                "polynomial is not a non-negative combination of even monomials".into(),
            ));
        }
        out.push(
            c.clone(),
            Polynomial::from_terms(p.nvars(), [(m.half(), Rat::one())]),
        );
    }
    Ok(out)
}

/// SOS multipliers making `sum sigma_i g_i` negative at infinity: the
/// combined highest degree part is negative at every grid direction.
pub fn negative_at_infinity(
    set: &GeneratorSet,
    grid: i64,
    degree_cap: u32,
) -> Result<(CertExpr, Vec<SosPoly>), PutinarError> {
    let nvars = set.nvars;
    let tops: Vec<Polynomial> = set
        .generators
        .iter()
        .map(|g| g.highest_degree_part())
        .collect::<Result<_, _>>()?;
    // generators with an odd-degree top part can only carry the zero
    // multiplier: an SOS times an odd form stays odd and cannot merge
    // with the even combination
    let usable: Vec<bool> = tops
        .iter()
        .map(|t| t.degree().unwrap() % 2 == 0)
        .collect();
    if !usable.iter().any(|&u| u) {
        return Err(PutinarError::Precondition(
            "no generator has an even-degree top part".into(),
        ));
    }
    let dmax = tops
        .iter()
        .zip(&usable)
        .filter(|(_, &u)| u)
        .map(|(t, _)| t.degree().unwrap())
        .max()
        .unwrap();
    let q = sum_of_squares_poly(nvars);
    // equalized tops: t_i (sum x^2)^{(dmax - d_i)/2}
    let equalized: Vec<Polynomial> = tops
        .iter()
        .zip(&usable)
        .map(|(t, &u)| {
            if u {
                t.mul(&q.pow((dmax - t.degree().unwrap()) / 2))
            } else {
                Polynomial::zero(nvars)
            }
        })
        .collect();

    let build = |sigmas: &[SosPoly]| -> Option<(CertExpr, Vec<SosPoly>)> {
        let mut combined_top = Polynomial::zero(nvars);
        for (sigma, t) in sigmas.iter().zip(&equalized) {
            combined_top = combined_top.add(&sigma.expand(nvars).mul(t));
        }
        if combined_top.is_zero() || !negative_definite_on_grid(&combined_top, grid) {
            return None;
        }
        let parts: Vec<CertExpr> = sigmas
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(i, s)| {
                Ok(CertExpr::square_scale(
                    s.clone(),
                    CertExpr::generator(set, i)?,
                ))
            })
            .collect::<Result<_, CertError>>()
            .ok()?;
        if parts.is_empty() {
            return None;
        }
        Some((CertExpr::sum(parts), sigmas.to_vec()))
    };

    // simple subsets first: each sigma_i in {0, (sum x^2)^{k_i}}
    let s = set.len();
    for mask in 1u64..(1 << s) {
        if (0..s).any(|i| mask >> i & 1 == 1 && !usable[i]) {
            continue;
        }
        let sigmas: Vec<SosPoly> = (0..s)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    let k = (dmax - tops[i].degree().unwrap()) / 2;
                    even_positive_as_sos(&q.pow(k)).unwrap()
                } else {
                    SosPoly::zero()
                }
            })
            .collect();
        // the grid check must use the raw tops for this choice
        let mut combined = Polynomial::zero(nvars);
        for (sig, t) in sigmas.iter().zip(&tops) {
            combined = combined.add(&sig.expand(nvars).mul(t));
        }
        if !combined.is_zero() && negative_definite_on_grid(&combined, grid) {
            if let Some(found) = build(&sigmas) {
                return Ok(found);
            }
        }
    }

    // fitted multipliers b_i^2 with b_i ~ sqrt(max(0, -t_i)) on the grid
    let mut dirs: Vec<Vec<Rat>> = Vec::new();
    for gx in -grid..=grid {
        for gy in -grid..=grid {
            let mut v: Vec<Rat> = vec![rint(gx), rint(gy)];
            v.resize(nvars, Rat::zero());
            if v.iter().any(|c| !c.is_zero()) {
                dirs.push(v);
            }
        }
    }
    for half_deg in 1..=(degree_cap / 2) {
        let basis = monomials_of_degree(nvars, half_deg);
        let mut sigmas = Vec::with_capacity(s);
        for (t, &u) in equalized.iter().zip(&usable) {
            if !u {
                sigmas.push(SosPoly::zero());
                continue;
            }
            let rows: Vec<Vec<f64>> = dirs
                .iter()
                .map(|p| {
                    let pf: Vec<f64> = p.iter().map(rat_to_f64).collect();
                    basis
                        .iter()
                        .map(|m| {
                            m.0.iter()
                                .zip(&pf)
                                .map(|(&e, x)| x.powi(e as i32))
                                .product()
                        })
                        .collect()
                })
                .collect();
            let targets: Vec<f64> = dirs
                .iter()
                .map(|p| (-rat_to_f64(&t.evaluate(p).unwrap())).max(0.0).sqrt())
                .collect();
            let Some(coefs) = least_squares_f64(&rows, &targets) else {
                sigmas.push(SosPoly::zero());
                continue;
            };
            let b = Polynomial::from_terms(
                nvars,
                basis
                    .iter()
                    .zip(&coefs)
                    .map(|(m, &c)| (m.clone(), rationalize(c, 1 << 10))),
            );
            sigmas.push(if b.is_zero() {
                SosPoly::zero()
            } else {
                SosPoly::square(b)
            });
        }
        if let Some(found) = build(&sigmas) {
            return Ok(found);
        }
    }
    Err(PutinarError::Inconclusive(
        "no multiplier combination with negative top part found".into(),
    ))
}

/// From `p (N - sum x^2) = 1 + q` with `p`, `q` in the preorder, the
/// extension `N p - 1 - y - ... - y^{l+1}` with `y = sum x^2 / N`,
/// following the induction `B_l = q + y B_{l-1}` with `B_{-1} = N p - 1
/// = q + (sum x^2) p`.
pub fn geometric_series_extend(
    p_expr: &CertExpr,
    q_expr: &CertExpr,
    n: &Rat,
    l: u32,
) -> Result<(CertExpr, bool), PutinarError> {
    let p = p_expr.denote();
    let q = q_expr.denote();
    let nvars = p.nvars();
    if !n.is_positive() {
        return Err(PutinarError::Precondition("N must be positive".into()));
    }
    let ball = Polynomial::constant(nvars, n.clone()).sub(&sum_of_squares_poly(nvars));
    if p.mul(&ball) != Polynomial::one(nvars).add(q) {
        return Err(PutinarError::Precondition(
            "identity p (N - sum x^2) = 1 + q does not hold".into(),
        ));
    }
    // warn when 2(l+1) <= deg p: the top part is then not forced negative
    let warn = 2 * (l + 1) <= p.degree().unwrap_or(0);

    let whole: SosPoly = {
        let mut s = SosPoly::zero();
        for i in 0..nvars {
            s.push(Rat::one(), Polynomial::var(nvars, i));
        }
        s
    };
    let y_sos: SosPoly = {
        let mut s = SosPoly::zero();
        for i in 0..nvars {
            s.push(Rat::one() / n, Polynomial::var(nvars, i));
        }
        s
    };
    // B_{-1} = q + (sum x^2) p
    let mut b = CertExpr::sum(vec![
        q_expr.clone(),
        CertExpr::square_scale(whole, p_expr.clone()),
    ]);
    for _ in 0..=l {
        b = CertExpr::sum(vec![
            q_expr.clone(),
            CertExpr::square_scale(y_sos.clone(), b),
        ]);
    }
    Ok((b, warn))
}

/// From a module certificate for a homogeneous `f` over the sphere
/// generator `g = -(1 - sum x^2)^2`, an identity `(sum x^2)^N f = SOS`:
/// homogenize with a fresh variable `z`, keep the even-in-`z` part and
/// substitute `z^2 -> sum x^2` (the `g` summand vanishes because
/// `(z^2 - sum x^2)^2` maps to zero).
pub fn sos_denominator(
    f: &Polynomial,
    cert: &ModuleCert,
) -> Result<(u32, SosPoly), PutinarError> {
    let nvars = f.nvars();
    if !f.is_homogeneous() || f.degree().map_or(true, |d| d % 2 != 0) {
        return Err(PutinarError::Precondition(
            "f must be homogeneous of even degree".into(),
        ));
    }
    let q = sum_of_squares_poly(nvars);
    let sphere_gen = Polynomial::one(nvars).sub(&q).square().neg();
    let set = GeneratorSet::new(nvars, vec![sphere_gen]);
    verify_module(cert, &set)?;
    if cert.target != *f {
        return Err(PutinarError::Precondition(
            "certificate target is not f".into(),
        ));
    }
    if cert.sigmas.len() != 2 {
        return Err(PutinarError::Precondition(
            "certificate must have exactly the sphere generator".into(),
        ));
    }
    let d = f.degree().unwrap();
    // common homogenization degree
    let mut half_deg = d / 2;
    for (_, base) in &cert.sigmas[0].squares {
        half_deg = half_deg.max(base.degree().unwrap_or(0));
    }
    for (_, base) in &cert.sigmas[1].squares {
        half_deg = half_deg.max(base.degree().unwrap_or(0) + 2);
    }
    let big = 2 * half_deg;
    let n_out = (big - d) / 2;

    // each sigma_0 base, z-homogenized to degree big/2, then split into
    // even and odd z-parts with z^2 replaced by sum x^2
    let mut out = SosPoly::zero();
    for (w, base) in &cert.sigmas[0].squares {
        if base.is_zero() {
            continue;
        }
        // homogenize with z at index 0, pad to degree big/2 with z powers
        let hom = base.homogenize(false)?;
        let pad = half_deg - base.degree().unwrap_or(0);
        let z_pad = Polynomial::monomial(nvars + 1, &z_exps(nvars, pad), Rat::one());
        let lifted = hom.mul(&z_pad);
        let (even_z, odd_z) = lifted.even_odd_split(0)?;
        // substitute the placeholder slot with sum x^2 and drop z
        let e = substitute_slot_with(&even_z, &q)?;
        let o = substitute_slot_with(&odd_z, &q)?;
        if !e.is_zero() {
            out.push(w.clone(), e);
        }
        // z^2 o^2 = sum_i (x_i o)^2
        if !o.is_zero() {
            for i in 0..nvars {
                out.push(w.clone(), Polynomial::var(nvars, i).mul(&o));
            }
        }
    }
    let expected = q.pow(n_out).mul(f);
    if out.expand(nvars) != expected {
        return Err(PutinarError::Precondition(
            "odd z-part does not cancel: certificate malformed for the parity argument".into(),
        ));
    }
    Ok((n_out, out))
}

fn z_exps(nvars: usize, z_power: u32) -> Vec<u32> {
    let mut e = vec![0u32; nvars + 1];
    e[0] = z_power;
    e
}

/// Substitute `sum x^2` for the halved-`z` placeholder slot (variable 0)
/// and remove that variable.
fn substitute_slot_with(p: &Polynomial, q: &Polynomial) -> Result<Polynomial, PutinarError> {
    let nvars = q.nvars();
    let mut out = Polynomial::zero(nvars);
    for (m, c) in p.terms() {
        let zp = m.0[0];
        let rest = Monomial(m.0[1..].to_vec());
        let term = Polynomial::from_terms(nvars, [(rest, c.clone())]);
        out = out.add(&term.mul(&q.pow(zp)));
    }
    Ok(out)
}

/// Projective search: all data homogeneous of even degree; peel
/// generators with multipliers `c (sum x^2)^k`, finish the positive
/// definite remainder with a Polya scan in the squared variables. Output
/// is `(N, cert)` with `(sum x^2)^N f` certified in homogeneous mode.
pub fn projective_putinar_search(
    problem: &Problem,
) -> Result<(u32, ModuleCert), PutinarError> {
    let set = &problem.set;
    let f = &problem.target;
    let nvars = set.nvars;
    if !f.is_homogeneous() || f.degree().map_or(true, |d| d % 2 != 0) {
        return Err(PutinarError::Precondition(
            "target must be homogeneous of even degree".into(),
        ));
    }
    for g in &set.generators {
        if !g.is_homogeneous() || g.degree().map_or(true, |d| d % 2 != 0) {
            return Err(PutinarError::Precondition(
                "generators must be homogeneous of even degree".into(),
            ));
        }
    }
    let d = f.degree().unwrap();
    let q = sum_of_squares_poly(nvars);

    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by_key(|&i| (set.generators[i].degree().unwrap(), i));
    let mut remainder = f.clone();
    let mut sigmas = vec![SosPoly::zero(); set.len() + 1];
    for &i in &order {
        let g = &set.generators[i];
        let dg = g.degree().unwrap();
        if dg > d {
            continue;
        }
        let k = (d - dg) / 2;
        for c in [rint(1), rat(1, 2), rat(1, 4), rint(2)] {
            let sigma_poly = q.pow(k).scale(&c);
            let rem = remainder.sub(&sigma_poly.mul(g));
            if rem.is_zero() || positive_definite_on_grid(&rem, 4) {
                sigmas[i + 1] = even_positive_as_sos(&sigma_poly)?;
                remainder = rem;
                break;
            }
        }
    }

    // base case: Polya in the squared variables
    let (n_out, base_sos) = if remainder.is_zero() {
        (0, SosPoly::zero())
    } else {
        if !remainder.terms().all(|(m, _)| m.is_even()) {
            return Err(PutinarError::Inconclusive(
                "remainder is not even in each variable; no denominator-free base case".into(),
            ));
        }
        let hat = Polynomial::from_terms(
            nvars,
            remainder.terms().map(|(m, c)| (m.half(), c.clone())),
        );
        let scan = crate::polya::polya_exponent(&hat, problem.degree_cap.max(30))?;
        let blown = Polynomial::from_terms(
            nvars,
            scan.product
                .terms()
                .map(|(m, c)| (Monomial(m.0.iter().map(|e| 2 * e).collect()), c.clone())),
        );
        (scan.n, even_positive_as_sos(&blown)?)
    };

    // assemble (sum x^2)^N f = base + sum sigma_i (sum x^2)^N g_i
    sigmas[0] = base_sos;
    let qn = q.pow(n_out);
    for sigma in sigmas.iter_mut().skip(1) {
        if !sigma.is_zero() {
            *sigma = sigma.mul(&even_positive_as_sos(&qn)?);
        }
    }
    let hset = GeneratorSet::homogeneous(nvars, set.generators.clone())?;
    let cert = ModuleCert {
        target: qn.mul(f),
        sigmas,
    };
    verify_module(&cert, &hset)?;
    Ok((n_out, cert))
}

/// Exact positivity scan of a homogeneous form over grid directions.
pub fn positive_definite_on_grid(form: &Polynomial, resolution: i64) -> bool {
    negative_definite_on_grid(&form.neg(), resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::verify_preorder;
    use crate::poly::Polynomial;

    fn p(src: &str, names: &[&str]) -> Polynomial {
        let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        Polynomial::parse(src, &owned).unwrap()
    }

    #[test]
    fn tangent_plane_matches_hand_identity() {
        // 1/2((x-1)^2 + y^2) + 1/2(1 - x^2 - y^2) = 1 - x
        let ball = BallSpec::new(rint(1)).unwrap();
        let cert = tangent_plane_cert(&[rint(1), rint(0)], &ball).unwrap();
        assert_eq!(cert.target, p("1 - x", &["x", "y"]));
        assert_eq!(cert.sigmas[1].squares, vec![(rat(1, 2), p("1", &["x", "y"]))]);
        let sigma0 = cert.sigmas[0].expand(2);
        assert_eq!(sigma0, p("1/2*x^2 - x + 1/2 + 1/2*y^2", &["x", "y"]));
    }

    #[test]
    fn tangent_plane_three_four_five() {
        let ball = BallSpec::new(rint(1)).unwrap();
        let cert = tangent_plane_cert(&[rat(3, 5), rat(4, 5)], &ball).unwrap();
        assert_eq!(cert.target, p("1 - 3/5*x - 4/5*y", &["x", "y"]));
    }

    #[test]
    fn tangent_plane_rejects_non_unit() {
        let ball = BallSpec::new(rint(1)).unwrap();
        assert!(tangent_plane_cert(&[rint(1), rint(1)], &ball).is_err());
    }

    #[test]
    fn negative_unit_vectors_are_unit_and_negative() {
        for n in 1..=4 {
            let v = negative_unit_vector(n);
            let norm: Rat = v.iter().map(|c| c * c).sum();
            assert_eq!(norm, Rat::one());
            assert!(v.iter().all(|c| c.is_negative()));
        }
    }

    #[test]
    fn ball_certificate_constant() {
        let ball = BallSpec::new(rint(1)).unwrap();
        let f = Polynomial::constant(2, rat(1, 10));
        let cert = ball_certificate(&f, &ball, 20).unwrap();
        assert_eq!(cert.sigmas[0].squares, vec![(rat(1, 10), Polynomial::one(2))]);
        assert!(cert.sigmas[1].is_zero());
    }

    #[test]
    fn ball_certificate_linear_target() {
        // 2 - x is positive on the closed unit disc (min 1 at x = 1)
        let ball = BallSpec::new(rint(1)).unwrap();
        let f = p("2 - x", &["x", "y"]);
        let cert = ball_certificate(&f, &ball, 40).unwrap();
        let set = GeneratorSet::new(2, vec![ball.polynomial(2)]);
        verify_module(&cert, &set).unwrap();
        assert_eq!(cert.target, f);
    }

    #[test]
    fn ball_certificate_boundary_zero_fails() {
        // 1 - x vanishes at x = 1 on the interval [-1, 1]
        let ball = BallSpec::new(rint(1)).unwrap();
        let f = p("1 - x", &["x"]);
        assert!(ball_certificate(&f, &ball, 30).is_err());
    }

    #[test]
    fn inductive_reduce_peels_x() {
        // f - 1*x = 1/10 is positive everywhere on the disc
        let outer = GeneratorSet::new(2, vec![p("1 - x^2 - y^2", &["x", "y"])]);
        let ball = BallSpec::new(rint(1)).unwrap();
        let f = p("x + 1/10", &["x", "y"]);
        let (sigma, remainder, margin) =
            inductive_reduce(&f, &outer, &p("x", &["x", "y"]), &ball, 8, 8).unwrap();
        assert_eq!(sigma.expand(2), Polynomial::one(2));
        assert_eq!(remainder, Polynomial::constant(2, rat(1, 10)));
        assert_eq!(margin, rat(1, 10));
    }

    #[test]
    fn inductive_reduce_zero_multiplier_branch() {
        // f is already positive on the outer set: sigma = 0 is accepted
        let outer = GeneratorSet::new(1, vec![p("1 - x^2", &["x"])]);
        let ball = BallSpec::new(rint(1)).unwrap();
        let f = p("2 - x^2", &["x"]);
        let (sigma, remainder, _) =
            inductive_reduce(&f, &outer, &p("1 + x^2", &["x"]), &ball, 8, 8).unwrap();
        assert!(sigma.is_zero());
        assert_eq!(remainder, f);
    }

    #[test]
    fn inductive_reduce_fails_on_boundary_zero() {
        let outer = GeneratorSet::new(1, vec![p("1 - x^2", &["x"])]);
        let ball = BallSpec::new(rint(1)).unwrap();
        let f = p("1 - x^2", &["x"]);
        // no multiplier can give a positive margin at x = 1 or x = -1
        assert!(inductive_reduce(&f, &outer, &p("x", &["x"]), &ball, 8, 4).is_err());
    }

    #[test]
    fn putinar_search_disc_and_halfplane() {
        let set = GeneratorSet::new(
            2,
            vec![p("1 - x^2 - y^2", &["x", "y"]), p("x", &["x", "y"])],
        );
        let f = p("x + 1/10", &["x", "y"]);
        let problem = Problem::new(set.clone(), f.clone(), Mode::Module);
        let (trace, cert) = putinar_search(&problem).unwrap();
        verify_module(&cert, &set).unwrap();
        assert_eq!(cert.target, f);
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].peeled, 1);
        assert_eq!(trace.steps[0].margin, rat(1, 10));
    }

    #[test]
    fn putinar_search_simple_interval() {
        // 2 - x^2 = 1 + 1*(1 - x^2)
        let set = GeneratorSet::new(1, vec![p("1 - x^2", &["x"])]);
        let f = p("2 - x^2", &["x"]);
        let problem = Problem::new(set.clone(), f.clone(), Mode::Module);
        let (_, cert) = putinar_search(&problem).unwrap();
        assert_eq!(cert.sigmas[0].expand(1), Polynomial::one(1));
        assert_eq!(cert.sigmas[1].expand(1), Polynomial::one(1));
    }

    #[test]
    fn putinar_search_rejects_boundary_zero() {
        let set = GeneratorSet::new(1, vec![p("1 - x^2", &["x"]), p("x", &["x"])]);
        let f = p("x", &["x"]);
        let problem = Problem::new(set, f, Mode::Module);
        assert!(putinar_search(&problem).is_err());
    }

    #[test]
    fn reduce_to_ball_fast_path() {
        // 1 - x^4 - y^4 + (x^2 - 1/2)^2 + (y^2 - 1/2)^2 = 3/2 - x^2 - y^2
        let names = ["x", "y"];
        let set = GeneratorSet::new(2, vec![p("1 - x^4 - y^4", &names)]);
        let leaf = CertExpr::generator(&set, 0).unwrap();
        let (expr, n) = reduce_to_ball(leaf, None, &set).unwrap();
        assert_eq!(n, rat(3, 2));
        assert_eq!(expr.denote(), &p("3/2 - x^2 - y^2", &names));
        let flat = expr.flatten_preorder(&set).unwrap();
        verify_preorder(&flat, &set).unwrap();
    }

    #[test]
    fn reduce_to_ball_identity_when_already_ball() {
        let names = ["x", "y"];
        let set = GeneratorSet::new(2, vec![p("4 - x^2 - y^2", &names)]);
        let leaf = CertExpr::generator(&set, 0).unwrap();
        let (expr, n) = reduce_to_ball(leaf, None, &set).unwrap();
        assert_eq!(n, rint(4));
        assert_eq!(expr.denote(), &p("4 - x^2 - y^2", &names));
    }

    #[test]
    fn reduce_to_ball_rejects_semidefinite_top() {
        // top part -x^4 vanishes at (0, 1)
        let names = ["x", "y"];
        let set = GeneratorSet::new(2, vec![p("1 - x^4 - y^2", &names)]);
        let leaf = CertExpr::generator(&set, 0).unwrap();
        assert!(reduce_to_ball(leaf, None, &set).is_err());
    }

    #[test]
    fn reduce_to_ball_general_path() {
        // p has an odd monomial, so the Habicht pipeline must run
        let names = ["x", "y"];
        let g = p("1 + 1/4*x - x^4 - y^4", &names);
        let set = GeneratorSet::new(2, vec![g.clone()]);
        let witness = habicht_certificate(&p("x^4 + y^4", &names), 40, 3).unwrap();
        let leaf = CertExpr::generator(&set, 0).unwrap();
        let (expr, n) = reduce_to_ball(leaf, Some(&witness), &set).unwrap();
        assert!(n.is_positive());
        let ball = BallSpec::new(n).unwrap();
        assert_eq!(expr.denote(), &ball.polynomial(2));
        let flat = expr.flatten_preorder(&set).unwrap();
        verify_preorder(&flat, &set).unwrap();
    }

    #[test]
    fn negative_at_infinity_two_negative_squares() {
        let names = ["x", "y"];
        let set = GeneratorSet::new(2, vec![p("-x^2", &names), p("-y^2", &names)]);
        let (expr, sigmas) = negative_at_infinity(&set, 3, 8).unwrap();
        assert_eq!(sigmas[0].expand(2), Polynomial::one(2));
        assert_eq!(sigmas[1].expand(2), Polynomial::one(2));
        assert_eq!(expr.denote(), &p("-x^2 - y^2", &names));
    }

    #[test]
    fn negative_at_infinity_skips_odd_top() {
        let names = ["x"];
        let set = GeneratorSet::new(1, vec![p("x", &names), p("-1 - x^2", &names)]);
        let (_, sigmas) = negative_at_infinity(&set, 3, 8).unwrap();
        assert!(sigmas[0].is_zero());
        assert_eq!(sigmas[1].expand(1), Polynomial::one(1));
    }

    #[test]
    fn negative_at_infinity_needs_fitted_combination() {
        // tops y^2 - x^2 and x^2 - 2y^2: neither alone is negative, the
        // sum is -y^2 (still semidefinite), so a fitted pair must appear
        let names = ["x", "y"];
        let set = GeneratorSet::new(
            2,
            vec![p("y^2 - x^2", &names), p("x^2 - 2*y^2", &names)],
        );
        let (expr, _) = negative_at_infinity(&set, 3, 8).unwrap();
        let top = expr.denote().highest_degree_part().unwrap();
        assert!(negative_definite_on_grid(&top, 3));
    }

    #[test]
    fn geometric_series_extension_step() {
        // p = 1, N = 2, q = 1 - x^2 over S = {1 - x^2}:
        // 1 - x^2/2 = (1 - x^2) + (x^2/2) * 1
        let names = ["x"];
        let set = GeneratorSet::new(1, vec![p("1 - x^2", &names)]);
        let p_expr = CertExpr::sos(1, SosPoly::constant(1, rint(1)));
        let q_expr = CertExpr::generator(&set, 0).unwrap();
        let (ext, warn) = geometric_series_extend(&p_expr, &q_expr, &rint(2), 0).unwrap();
        assert!(!warn);
        assert_eq!(ext.denote(), &p("1 - 1/2*x^2", &names));
        let flat = ext.flatten_preorder(&set).unwrap();
        verify_preorder(&flat, &set).unwrap();

        // one more step: N p - 1 - y - y^2 with y = x^2/2
        let (ext2, _) = geometric_series_extend(&p_expr, &q_expr, &rint(2), 1).unwrap();
        assert_eq!(ext2.denote(), &p("1 - 1/2*x^2 - 1/4*x^4", &names));
        let flat2 = ext2.flatten_preorder(&set).unwrap();
        verify_preorder(&flat2, &set).unwrap();
    }

    #[test]
    fn geometric_series_rejects_broken_identity() {
        // p = 1, N = 1 would need q = -x^2, so passing q = 0 breaks the identity
        let p_expr = CertExpr::sos(1, SosPoly::constant(1, rint(1)));
        let q_expr = CertExpr::sos(1, SosPoly::zero());
        assert!(geometric_series_extend(&p_expr, &q_expr, &rint(1), 0).is_err());
    }

    fn sphere_cert_for_quartic() -> (Polynomial, ModuleCert) {
        // x^4 + y^4 = 3/2 (x^2 + y^2 - 2/3)^2 + 1/2 (x^2 - y^2)^2 + 1/3
        //             + 1 * ( -(1 - x^2 - y^2)^2 )
        let names = ["x", "y"];
        let f = p("x^4 + y^4", &names);
        let mut sigma0 = SosPoly::zero();
        sigma0.push(rat(3, 2), p("x^2 + y^2 - 2/3", &names));
        sigma0.push(rat(1, 2), p("x^2 - y^2", &names));
        sigma0.push(rat(1, 3), Polynomial::one(2));
        let sigma1 = SosPoly::constant(2, rint(1));
        (
            f.clone(),
            ModuleCert {
                target: f,
                sigmas: vec![sigma0, sigma1],
            },
        )
    }

    #[test]
    fn sos_denominator_quartic() {
        let (f, cert) = sphere_cert_for_quartic();
        let (n, sos) = sos_denominator(&f, &cert).unwrap();
        let q = sum_of_squares_poly(2);
        assert_eq!(sos.expand(2), q.pow(n).mul(&f));
        sos.check_weights().unwrap();
    }

    #[test]
    fn sos_denominator_trivial_sum_of_squares() {
        // f = x^2 + y^2 with sigma_0 = f itself, sigma_1 = 0: N = 0
        let names = ["x", "y"];
        let f = p("x^2 + y^2", &names);
        let mut sigma0 = SosPoly::zero();
        sigma0.push(rint(1), p("x", &names));
        sigma0.push(rint(1), p("y", &names));
        let cert = ModuleCert {
            target: f.clone(),
            sigmas: vec![sigma0, SosPoly::zero()],
        };
        let (n, sos) = sos_denominator(&f, &cert).unwrap();
        assert_eq!(n, 0);
        assert_eq!(sos.expand(2), f);
    }

    #[test]
    fn sos_denominator_rejects_wrong_target() {
        let (_, cert) = sphere_cert_for_quartic();
        let other = p("x^4 + 2*y^4", &["x", "y"]);
        assert!(sos_denominator(&other, &cert).is_err());
    }

    #[test]
    fn projective_search_positive_definite_quartic() {
        let names = ["x", "y"];
        let f = p("x^4 + y^4", &names);
        let set = GeneratorSet::new(2, vec![]);
        let problem = Problem::new(set, f.clone(), Mode::Module);
        let (n, cert) = projective_putinar_search(&problem).unwrap();
        let q = sum_of_squares_poly(2);
        assert_eq!(cert.target, q.pow(n).mul(&f));
        let hset = GeneratorSet::homogeneous(2, vec![]).unwrap();
        verify_module(&cert, &hset).unwrap();
    }

    #[test]
    fn projective_search_with_generator() {
        // x^4 + y^4 + x^2 (x^2 + y^2) over S = {x^2}: sigma for x^2 peels
        let names = ["x", "y"];
        let g = p("x^2", &names);
        let f = p("2*x^4 + x^2*y^2 + y^4", &names);
        let set = GeneratorSet::new(2, vec![g]);
        let problem = Problem::new(set.clone(), f.clone(), Mode::Module);
        let (n, cert) = projective_putinar_search(&problem).unwrap();
        let q = sum_of_squares_poly(2);
        assert_eq!(cert.target, q.pow(n).mul(&f));
        let hset = GeneratorSet::homogeneous(2, set.generators.clone()).unwrap();
        verify_module(&cert, &hset).unwrap();
    }

    #[test]
    fn projective_search_rejects_odd_degree() {
        let f = p("x^3 + y^3", &["x", "y"]);
        let problem = Problem::new(GeneratorSet::new(2, vec![]), f, Mode::Module);
        assert!(projective_putinar_search(&problem).is_err());
    }

    #[test]
    fn grid_respects_generators() {
        let set = GeneratorSet::new(1, vec![p("x", &["x"])]);
        let points = k_grid(&set, &rint(1), 4);
        assert!(!points.is_empty());
        assert!(points.iter().all(|pt| !pt[0].is_negative()));
    }
}
