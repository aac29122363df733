//! End-to-end acceptance checks. Each test exercises one criterion and
//! prints a single pass line; a panic marks the criterion failed.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poscert::cert::{
    verify_module, verify_preorder, GeneratorSet, ModuleCert, SosPoly,
};
use poscert::expr::CertExpr;
use poscert::noncompact::{
    eliminate_squares, is_putinar_1d, natural_generators, stability_degree_bound,
    stability_multipliers, substitute_automorphism_module, Automorphism, IntervalUnion,
    LogPolyhedron, Piece, PutinarVerdict, TentacleSet, unimodular_cone_check,
};
use poscert::poly::{rat, rint, Monomial, Polynomial, Rat};
use poscert::polya::{
    habicht_certificate, handelman_simplex, polya_exponent, PolyaError, SimplexSpec,
};
use poscert::putinar::{
    geometric_series_extend, putinar_search, reduce_to_ball, Problem,
};
use poscert::expr::Mode;

fn p(src: &str, names: &[&str]) -> Polynomial {
    let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    Polynomial::parse(src, &owned).unwrap()
}

fn pass(n: u32, what: &str) {
    println!("criterion {n}: PASS - {what}");
}

/// The disc certificate 1/2 (x-1)^2 + 1/2 y^2 + 1/2 (1 - x^2 - y^2) = 1 - x.
fn sphere_cert() -> (GeneratorSet, ModuleCert) {
    let names = ["x", "y"];
    let set = GeneratorSet::new(2, vec![p("1 - x^2 - y^2", &names)]);
    let mut sigma0 = SosPoly::zero();
    sigma0.push(rat(1, 2), p("x - 1", &names));
    sigma0.push(rat(1, 2), p("y", &names));
    let sigma1 = SosPoly::constant(2, rat(1, 2));
    let cert = ModuleCert {
        target: p("1 - x", &names),
        sigmas: vec![sigma0, sigma1],
    };
    (set, cert)
}

#[test]
fn criterion_01_sphere_identity() {
    let start = std::time::Instant::now();
    let (set, cert) = sphere_cert();
    verify_module(&cert, &set).unwrap();

    // every single-coefficient perturbation must be rejected
    let mut rejected = 0;
    for si in 0..cert.sigmas.len() {
        for qi in 0..cert.sigmas[si].squares.len() {
            // perturb the weight
            let mut c = cert.clone();
            c.sigmas[si].squares[qi].0 += Rat::one();
            assert!(verify_module(&c, &set).is_err());
            rejected += 1;
            // perturb each coefficient of the square base
            let monos: Vec<Monomial> = cert.sigmas[si].squares[qi]
                .1
                .terms()
                .map(|(m, _)| m.clone())
                .collect();
            for m in monos {
                let mut c = cert.clone();
                let bump = Polynomial::from_terms(2, [(m, Rat::one())]);
                c.sigmas[si].squares[qi].1 = c.sigmas[si].squares[qi].1.add(&bump);
                assert!(verify_module(&c, &set).is_err());
                rejected += 1;
            }
        }
    }
    for (m, _) in cert.target.terms() {
        let mut c = cert.clone();
        c.target = c.target.add(&Polynomial::from_terms(2, [(m.clone(), Rat::one())]));
        assert!(verify_module(&c, &set).is_err());
        rejected += 1;
    }
    assert!(start.elapsed().as_secs() < 1);
    pass(1, &format!("disc identity verifies; {rejected} perturbations rejected"));
}

#[test]
fn criterion_02_polya_exponent() {
    let start = std::time::Instant::now();
    let names = ["x", "y"];
    let f = p("x^2 - x*y + y^2", &names);
    let r = polya_exponent(&f, 5).unwrap();
    assert_eq!(r.n, 3);
    assert_eq!(
        r.product,
        p("x^5 + 2*x^4*y + x^3*y^2 + x^2*y^3 + 2*x*y^4 + y^5", &names)
    );
    match polya_exponent(&f, 2) {
        Err(PolyaError::Inconclusive { counterexample, .. }) => {
            assert_eq!(counterexample, Monomial(vec![2, 2]));
        }
        other => panic!("expected the x^2 y^2 counterexample, got {other:?}"),
    }
    assert!(start.elapsed().as_secs() < 1);
    pass(2, "exponent 3 with exact product; exponent 2 fails on x^2 y^2");
}

#[test]
fn criterion_03_habicht_identity() {
    let start = std::time::Instant::now();
    let names = ["x", "y"];
    let f = p("x^2 + y^2", &names);
    let cert = habicht_certificate(&f, 10, 20000).unwrap();
    cert.verify(&f).unwrap();
    for (_, base) in cert.m1.squares.iter().chain(&cert.m2.squares) {
        assert_eq!(base.num_terms(), 1, "M1/M2 must be monomial squares");
    }
    let lhs = cert.m2.expand(2).add(&cert.r2.expand(2)).mul(&f);
    let expected = p("x^2 + y^2", &names).pow(4).scale(&rint(8));
    assert_eq!(lhs, expected);

    let g = p("x^4 - x^2*y^2 + y^4", &names);
    let cert2 = habicht_certificate(&g, 10, 20000).unwrap();
    cert2.verify(&g).unwrap();
    assert!(start.elapsed().as_secs() < 10);
    pass(3, "both Habicht identities expand exactly; first equals 8 (x^2+y^2)^4");
}

#[test]
fn criterion_04_handelman() {
    let start = std::time::Instant::now();
    let names = ["x"];
    let f = p("x^2 - x + 1/2", &names);
    let spec = SimplexSpec::Lambdas(vec![p("x", &names), p("1 - x", &names)]);
    let cert = handelman_simplex(&f, &spec, 10).unwrap();
    let expected: Vec<(Vec<u32>, Rat)> =
        vec![(vec![0, 2], rat(1, 2)), (vec![2, 0], rat(1, 2))];
    let got: Vec<(Vec<u32>, Rat)> = cert
        .coefficients
        .iter()
        .map(|(a, c)| (a.clone(), c.clone()))
        .collect();
    assert_eq!(got, expected);
    let (set, pre) = cert.to_preorder(&f);
    verify_preorder(&pre, &set).unwrap();
    assert!(start.elapsed().as_secs() < 1);
    pass(4, "a_(2,0) = a_(0,2) = 1/2 and the preorder certificate verifies");
}

#[test]
fn criterion_05_putinar_end_to_end() {
    let start = std::time::Instant::now();
    let names = ["x", "y"];
    let set = GeneratorSet::new(2, vec![p("1 - x^2 - y^2", &names), p("x", &names)]);
    let target = p("x + 1/10", &names);
    let problem = Problem::new(set.clone(), target, Mode::Module);
    let (_, cert) = putinar_search(&problem).unwrap();
    verify_module(&cert, &set).unwrap();

    // soundness fuzz: corrupting any single rational must be caught
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let mut c = cert.clone();
        let delta = rint(rng.gen_range(1..5)) * if rng.gen() { rint(1) } else { rint(-1) };
        if rng.gen() {
            // corrupt a weight of a nonzero square
            let candidates: Vec<(usize, usize)> = c
                .sigmas
                .iter()
                .enumerate()
                .flat_map(|(i, s)| {
                    s.squares
                        .iter()
                        .enumerate()
                        .filter(|(_, (_, b))| !b.is_zero())
                        .map(move |(j, _)| (i, j))
                })
                .collect();
            let (i, j) = candidates[rng.gen_range(0..candidates.len())];
            c.sigmas[i].squares[j].0 += &delta;
        } else {
            // corrupt a target coefficient
            let monos: Vec<Monomial> = c.target.terms().map(|(m, _)| m.clone()).collect();
            let m = monos[rng.gen_range(0..monos.len())].clone();
            c.target = c.target.add(&Polynomial::from_terms(2, [(m, delta)]));
        }
        assert!(verify_module(&c, &set).is_err(), "corrupted certificate accepted");
    }
    assert!(start.elapsed().as_secs() < 60);
    pass(5, "search certificate verifies; 100 corrupted variants all rejected");
}

#[test]
fn criterion_06_reduce_to_ball() {
    let start = std::time::Instant::now();
    let names = ["x", "y"];
    let set = GeneratorSet::new(2, vec![p("1 - x^4 - y^4", &names)]);
    let leaf = CertExpr::generator(&set, 0).unwrap();
    let (expr, n) = reduce_to_ball(leaf, None, &set).unwrap();
    assert_eq!(n, rat(3, 2));
    assert_eq!(expr.denote(), &p("3/2 - x^2 - y^2", &names));
    // the exact identity behind the reduction
    let padding = p("x^2 - 1/2", &names)
        .square()
        .add(&p("y^2 - 1/2", &names).square());
    assert_eq!(
        p("1 - x^4 - y^4", &names).add(&padding),
        p("3/2 - x^2 - y^2", &names)
    );
    let flat = expr.flatten_preorder(&set).unwrap();
    verify_preorder(&flat, &set).unwrap();
    assert!(start.elapsed().as_secs() < 1);
    pass(6, "1 - x^4 - y^4 reduces to the ball 3/2 - x^2 - y^2 exactly");
}

#[test]
fn criterion_07_geometric_series() {
    let names = ["x"];
    let set = GeneratorSet::new(1, vec![p("1 - x^2", &names)]);
    // p = 1, q = 1 - x^2, N = 2: 1 * (2 - x^2) = 1 + (1 - x^2)
    let p_expr = CertExpr::sos(1, SosPoly::constant(1, rint(1)));
    let q_expr = CertExpr::generator(&set, 0).unwrap();
    for l in 0..4u32 {
        let (ext, warn) = geometric_series_extend(&p_expr, &q_expr, &rint(2), l).unwrap();
        assert!(!warn, "deg p = 0 so the top part is always forced negative");
        let flat = ext.flatten_preorder(&set).unwrap();
        verify_preorder(&flat, &set).unwrap();
        // top part is -(x^2/2)^(l+1): negative at every direction
        let top = ext.denote().highest_degree_part().unwrap();
        let expected = Polynomial::monomial(
            1,
            &[2 * (l + 1)],
            -Rat::one() / rint(2).pow((l + 1) as i32),
        );
        assert_eq!(top, expected);
        for dir in [rint(1), rint(-1)] {
            assert!(top.evaluate(&[dir]).unwrap().is_negative());
        }
    }
    pass(7, "extensions l = 0..3 all verify with negative top parts");
}

#[test]
fn criterion_08_natural_generators() {
    let names = ["x"];
    let k = IntervalUnion::new(vec![
        Piece { lo: Some(rint(0)), hi: Some(rint(1)) },
        Piece { lo: Some(rint(2)), hi: None },
    ])
    .unwrap();
    let gens = natural_generators(&k);
    assert_eq!(gens, vec![p("x", &names), p("x^2 - 3*x + 2", &names)]);

    let (_, v) = is_putinar_1d(&[p("x", &names)]).unwrap();
    assert!(matches!(v, PutinarVerdict::Putinar));
    let s2 = [p("x", &names), p("x - 1", &names).pow(3)];
    let (_, v2) = is_putinar_1d(&s2).unwrap();
    assert!(matches!(v2, PutinarVerdict::NotPutinar { .. }));
    pass(8, "generators {x, (x-1)(x-2)}; {x} Putinar, {x, (x-1)^3} not");
}

#[test]
fn criterion_09_stability() {
    let cases = [
        (vec![vec![1, 0], vec![0, 1]], vec![1, 1]),
        (vec![vec![0, 1], vec![1, -1]], vec![2, 1]),
        (vec![vec![-1, 2], vec![1, -1]], vec![2, 3]),
    ];
    for (dirs, expected) in cases {
        let t = TentacleSet::new(dirs).unwrap();
        assert_eq!(stability_multipliers(&t, 20).unwrap(), Some(expected));
    }
    let t = TentacleSet::new(vec![vec![2, 1]]).unwrap();
    assert_eq!(stability_degree_bound(&t, &[1], 4).unwrap(), rint(8));
    pass(9, "multipliers (1,1), (2,1), (2,3); single-tentacle bound 8");
}

/// A random polynomial in x and y whose y-exponents all have the given
/// parity, with small integer coefficients.
fn random_parity_poly(rng: &mut ChaCha8Rng, parity: u32) -> Polynomial {
    let mut q = Polynomial::zero(2);
    for _ in 0..rng.gen_range(1..=3) {
        let ex = rng.gen_range(0..=2u32);
        let ey = 2 * rng.gen_range(0..=1u32) + parity;
        let c = rint(rng.gen_range(1..=3)) * if rng.gen() { rint(1) } else { rint(-1) };
        q = q.add(&Polynomial::monomial(2, &[ex, ey], c));
    }
    q
}

#[test]
fn criterion_10_eliminate_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for round in 0..20 {
        // generators even in y; sigma bases of pure parity so the target
        // stays even in y
        let gens: Vec<Polynomial> =
            (0..2).map(|_| random_parity_poly(&mut rng, 0)).collect();
        let set = GeneratorSet::new(2, gens.clone());
        let mut sigmas = Vec::new();
        for _ in 0..=gens.len() {
            let mut s = SosPoly::zero();
            for _ in 0..rng.gen_range(1..=2) {
                let parity = rng.gen_range(0..=1u32);
                s.push(rat(rng.gen_range(1..=4), rng.gen_range(1..=2)),
                       random_parity_poly(&mut rng, parity));
            }
            sigmas.push(s);
        }
        let mut target = sigmas[0].expand(2);
        for (s, g) in sigmas[1..].iter().zip(&gens) {
            target = target.add(&s.expand(2).mul(g));
        }
        let cert = ModuleCert { target, sigmas };
        verify_module(&cert, &set).unwrap();
        let (new_set, pre) = eliminate_squares(&cert, &set, 1)
            .unwrap_or_else(|e| panic!("round {round}: {e}"));
        verify_preorder(&pre, &new_set).unwrap();
    }

    // the strip {x, 1-x, y} maps to {x, 1-x, y - x^2} under y -> y - x^2
    let names = ["x", "y"];
    let gens = vec![p("x", &names), p("1 - x", &names), p("y", &names)];
    let set = GeneratorSet::new(2, gens);
    let cert = ModuleCert {
        target: p("1 + x + y", &names),
        sigmas: vec![
            SosPoly::constant(2, rint(1)),
            SosPoly::constant(2, rint(1)),
            SosPoly::zero(),
            SosPoly::constant(2, rint(1)),
        ],
    };
    verify_module(&cert, &set).unwrap();
    let map = Automorphism::Triangular { var: 1, shift: p("-x^2", &names) };
    let (new_set, new_cert) = substitute_automorphism_module(&cert, &set, &map).unwrap();
    assert_eq!(
        new_set.generators,
        vec![p("x", &names), p("1 - x", &names), p("y - x^2", &names)]
    );
    verify_module(&new_cert, &new_set).unwrap();
    pass(10, "20 random square eliminations verify; strip automorphism preserved");
}

#[test]
fn criterion_11_unimodularity() {
    let good = LogPolyhedron::new(vec![[0, 2], [2, 2]], vec![Rat::one(), Rat::one()])
        .unwrap();
    let (uni, witness) = unimodular_cone_check(&good).unwrap();
    assert!(uni);
    let (b1, b2) = witness.unwrap();
    // the witness pair generates the same cone: each exponent vector is a
    // non-negative rational combination of b1, b2
    let det = rint(b1[0] * b2[1] - b1[1] * b2[0]);
    assert!(!det.is_zero());
    for alpha in &good.exponents {
        let a = (rint(alpha[0] * b2[1] - alpha[1] * b2[0])) / det.clone();
        let b = (rint(b1[0] * alpha[1] - b1[1] * alpha[0])) / det.clone();
        assert!(!a.is_negative() && !b.is_negative());
        assert_eq!(rint(b1[0]) * a.clone() + rint(b2[0]) * b.clone(), rint(alpha[0]));
        assert_eq!(rint(b1[1]) * a + rint(b2[1]) * b, rint(alpha[1]));
    }

    let bad = LogPolyhedron::new(vec![[1, 0], [1, 2]], vec![Rat::one(), Rat::one()])
        .unwrap();
    let (uni2, _) = unimodular_cone_check(&bad).unwrap();
    assert!(!uni2);
    pass(11, "{(0,2),(2,2)} unimodular with cone-spanning witness; {(1,0),(1,2)} not");
}

#[test]
fn criterion_12_randomized_invariants() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let random_poly = |rng: &mut ChaCha8Rng| {
        let mut q = Polynomial::zero(2);
        for _ in 0..rng.gen_range(0..=4) {
            let e = [rng.gen_range(0..=3u32), rng.gen_range(0..=3u32)];
            let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
            q = q.add(&Polynomial::monomial(2, &e, c));
        }
        q
    };

    // ring laws
    for _ in 0..200 {
        let (a, b, c) = (random_poly(&mut rng), random_poly(&mut rng), random_poly(&mut rng));
        assert_eq!(a.mul(&b), b.mul(&a));
        assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    // homogenize / dehomogenize round trip
    let mut done = 0;
    while done < 200 {
        let a = random_poly(&mut rng);
        if a.is_zero() {
            continue;
        }
        let h = a.homogenize(false).unwrap();
        assert!(h.is_homogeneous());
        assert_eq!(h.dehomogenize(0).unwrap(), a);
        done += 1;
    }

    // even/odd split recomposition
    for _ in 0..200 {
        let a = random_poly(&mut rng);
        for var in 0..2 {
            let (e, o) = a.even_odd_split(var).unwrap();
            assert_eq!(Polynomial::recompose_even_odd(&e, &o, var).unwrap(), a);
        }
    }

    // certificate fuzz rejection
    for _ in 0..200 {
        let gens: Vec<Polynomial> = (0..2).map(|_| random_poly(&mut rng)).collect();
        let set = GeneratorSet::new(2, gens.clone());
        let mut sigmas = Vec::new();
        for _ in 0..=gens.len() {
            let mut s = SosPoly::zero();
            s.push(rat(rng.gen_range(1..=4), rng.gen_range(1..=2)), random_poly(&mut rng));
            sigmas.push(s);
        }
        let mut target = sigmas[0].expand(2);
        for (s, g) in sigmas[1..].iter().zip(&gens) {
            target = target.add(&s.expand(2).mul(g));
        }
        let cert = ModuleCert { target, sigmas };
        verify_module(&cert, &set).unwrap();
        let mut bad = cert.clone();
        let delta = rint(rng.gen_range(1..=3)) * if rng.gen() { rint(1) } else { rint(-1) };
        let e = [rng.gen_range(0..=3u32), rng.gen_range(0..=3u32)];
        bad.target = bad.target.add(&Polynomial::monomial(2, &e, delta));
        assert!(verify_module(&bad, &set).is_err());
    }
    assert!(start.elapsed().as_secs() < 120);
    pass(12, "ring laws, homogenization, split recomposition, fuzz rejection (4 x 200 cases)");
}
