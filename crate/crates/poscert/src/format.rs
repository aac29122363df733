//! Line-oriented text formats: problem files, certificate files,
//! interval unions, tentacle direction lists, and logarithmic
//! polyhedra. Serialization is deterministic; parsing and serialization
//! are mutually inverse on the emitted forms.

use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use crate::cert::{GeneratorSet, ModuleCert, PreorderCert, SosPoly};
use crate::expr::Mode;
use crate::noncompact::{IntervalUnion, LogPolyhedron, Piece, TentacleSet};
use crate::poly::{Polynomial, Rat};
use crate::putinar::Problem;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

/// Parse `a` or `a/b` with decimal-free integers.
pub fn parse_rational(s: &str) -> Result<Rat, FormatError> {
    let s = s.trim();
    let bad = || FormatError::Invalid(format!("bad rational `{s}`"));
    if s.contains('.') {
        return Err(bad());
    }
    match s.split_once('/') {
        None => {
            let n = BigInt::from_str(s).map_err(|_| bad())?;
            Ok(Rat::from_integer(n))
        }
        Some((a, b)) => {
            let n = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
    }
}

pub fn display_rational(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A parsed problem file: variable names plus the search problem.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub names: Vec<String>,
    pub problem: Problem,
}

/// Problem file grammar: `vars:`, repeated `gen:`, `target:`, `mode:`,
/// optional `ball:`, `degree_cap:`, `grid:`.
pub fn parse_problem(text: &str) -> Result<ProblemFile, FormatError> {
    let mut names: Option<Vec<String>> = None;
    let mut gens: Vec<Polynomial> = Vec::new();
    let mut target: Option<Polynomial> = None;
    let mut mode = Mode::Module;
    let mut ball: Option<Rat> = None;
    let mut degree_cap: u32 = 12;
    let mut grid: u32 = 8;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(lno, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "vars" => {
                let v: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                if v.is_empty() {
                    return Err(err(lno, "no variables declared"));
                }
                names = Some(v);
            }
            "gen" => {
                let names = names
                    .as_ref()
                    .ok_or_else(|| err(lno, "`vars:` must come first"))?;
                gens.push(
                    Polynomial::parse(value, names).map_err(|e| err(lno, e.to_string()))?,
                );
            }
            "target" => {
                let names = names
                    .as_ref()
                    .ok_or_else(|| err(lno, "`vars:` must come first"))?;
                target = Some(
                    Polynomial::parse(value, names).map_err(|e| err(lno, e.to_string()))?,
                );
            }
            "mode" => {
                mode = match value {
                    "module" => Mode::Module,
                    "preorder" => Mode::Preorder,
                    other => return Err(err(lno, format!("unknown mode `{other}`"))),
                };
            }
            "ball" => ball = Some(parse_rational(value).map_err(|e| err(lno, e.to_string()))?),
            "degree_cap" => {
                degree_cap = value.parse().map_err(|_| err(lno, "bad integer"))?;
            }
            "grid" => {
                grid = value.parse().map_err(|_| err(lno, "bad integer"))?;
            }
            other => return Err(err(lno, format!("unknown key `{other}`"))),
        }
    }
    let names = names.ok_or_else(|| FormatError::Invalid("missing `vars:`".into()))?;
    let target = target.ok_or_else(|| FormatError::Invalid("missing `target:`".into()))?;
    let set = GeneratorSet::new(names.len(), gens);
    let mut problem = Problem::new(set, target, mode);
    problem.ball = ball;
    problem.degree_cap = degree_cap;
    problem.grid_resolution = grid;
    Ok(ProblemFile { names, problem })
}

pub fn serialize_problem(pf: &ProblemFile) -> String {
    let mut out = String::new();
    out.push_str(&format!("vars: {}\n", pf.names.join(" ")));
    for g in &pf.problem.set.generators {
        out.push_str(&format!("gen: {}\n", g.display(&pf.names)));
    }
    out.push_str(&format!("target: {}\n", pf.problem.target.display(&pf.names)));
    out.push_str(&format!(
        "mode: {}\n",
        match pf.problem.mode {
            Mode::Module => "module",
            Mode::Preorder => "preorder",
        }
    ));
    if let Some(b) = &pf.problem.ball {
        out.push_str(&format!("ball: {}\n", display_rational(b)));
    }
    out.push_str(&format!("degree_cap: {}\n", pf.problem.degree_cap));
    out.push_str(&format!("grid: {}\n", pf.problem.grid_resolution));
    out
}

/// A parsed certificate file with its ambient data.
#[derive(Debug, Clone)]
pub struct CertFile {
    pub names: Vec<String>,
    pub generators: Vec<Polynomial>,
    pub payload: CertPayload,
}

#[derive(Debug, Clone)]
pub enum CertPayload {
    Module(ModuleCert),
    Preorder(PreorderCert),
}

impl CertFile {
    pub fn set(&self) -> GeneratorSet {
        GeneratorSet::new(self.names.len(), self.generators.clone())
    }
}

fn mask_to_bits(mask: u64, s: usize) -> String {
    (0..s)
        .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn bits_to_mask(bits: &str, s: usize) -> Option<u64> {
    if bits.len() != s || !bits.chars().all(|c| c == '0' || c == '1') {
        return None;
    }
    let mut mask = 0u64;
    for (i, c) in bits.chars().enumerate() {
        if c == '1' {
            mask |= 1 << i;
        }
    }
    Some(mask)
}

/// Certificate file grammar: `vars:`, repeated `gen:`,
/// `mode: module|preorder`, `target: <poly>`, then blocks
/// `sigma <index-or-bitstring>:` with `weight <rational> square <poly>`
/// lines. In module mode the sigma label is the generator index
/// (0 for the constant generator); in preorder mode it is a bitstring
/// over the generators, least index first.
pub fn parse_cert(text: &str) -> Result<CertFile, FormatError> {
    let mut names: Option<Vec<String>> = None;
    let mut gens: Vec<Polynomial> = Vec::new();
    let mut mode: Option<Mode> = None;
    let mut target: Option<Polynomial> = None;
    struct Block {
        label: String,
        squares: Vec<(Rat, Polynomial)>,
        line: usize,
    }
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("weight ") {
            let block = blocks
                .last_mut()
                .ok_or_else(|| err(lno, "`weight` line before any `sigma` block"))?;
            let (w, poly) = rest
                .split_once(" square ")
                .ok_or_else(|| err(lno, "expected `weight <rat> square <poly>`"))?;
            let names = names
                .as_ref()
                .ok_or_else(|| err(lno, "`vars:` must come first"))?;
            let weight = parse_rational(w).map_err(|e| err(lno, e.to_string()))?;
            let base =
                Polynomial::parse(poly, names).map_err(|e| err(lno, e.to_string()))?;
            block.squares.push((weight, base));
            continue;
        }
        if let Some(rest) = line.strip_prefix("sigma ") {
            let label = rest
                .strip_suffix(':')
                .ok_or_else(|| err(lno, "sigma block must end with `:`"))?
                .trim()
                .to_string();
            blocks.push(Block { label, squares: Vec::new(), line: lno });
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(lno, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "vars" => {
                names = Some(value.split_whitespace().map(str::to_string).collect());
            }
            "gen" => {
                let names = names
                    .as_ref()
                    .ok_or_else(|| err(lno, "`vars:` must come first"))?;
                gens.push(
                    Polynomial::parse(value, names).map_err(|e| err(lno, e.to_string()))?,
                );
            }
            "mode" => {
                mode = Some(match value {
                    "module" => Mode::Module,
                    "preorder" => Mode::Preorder,
                    other => return Err(err(lno, format!("unknown mode `{other}`"))),
                });
            }
            "target" => {
                let names = names
                    .as_ref()
                    .ok_or_else(|| err(lno, "`vars:` must come first"))?;
                target = Some(
                    Polynomial::parse(value, names).map_err(|e| err(lno, e.to_string()))?,
                );
            }
            other => return Err(err(lno, format!("unknown key `{other}`"))),
        }
    }
    let names = names.ok_or_else(|| FormatError::Invalid("missing `vars:`".into()))?;
    let target = target.ok_or_else(|| FormatError::Invalid("missing `target:`".into()))?;
    let mode = mode.ok_or_else(|| FormatError::Invalid("missing `mode:`".into()))?;
    let s = gens.len();
    let payload = match mode {
        Mode::Module => {
            let mut sigmas = vec![SosPoly::zero(); s + 1];
            for b in blocks {
                let idx: usize = b
                    .label
                    .parse()
                    .map_err(|_| err(b.line, "module sigma label must be an index"))?;
                if idx > s {
                    return Err(err(b.line, format!("sigma index {idx} out of range")));
                }
                for (w, base) in b.squares {
                    sigmas[idx].push(w, base);
                }
            }
            CertPayload::Module(ModuleCert { target, sigmas })
        }
        Mode::Preorder => {
            let mut cert = PreorderCert::zero(target);
            for b in blocks {
                let mask = bits_to_mask(&b.label, s)
                    .or_else(|| if s == 0 && b.label == "0" { Some(0) } else { None })
                    .ok_or_else(|| {
                        err(b.line, format!("preorder sigma label must be {s} bits"))
                    })?;
                let entry = cert.sigmas.entry(mask).or_insert_with(SosPoly::zero);
                for (w, base) in b.squares {
                    entry.push(w, base);
                }
            }
            CertPayload::Preorder(cert)
        }
    };
    Ok(CertFile { names, generators: gens, payload })
}

pub fn serialize_cert(cf: &CertFile) -> String {
    let names = &cf.names;
    let mut out = String::new();
    out.push_str(&format!("vars: {}\n", names.join(" ")));
    for g in &cf.generators {
        out.push_str(&format!("gen: {}\n", g.display(names)));
    }
    let sigma_block = |label: &str, sigma: &SosPoly, out: &mut String| {
        if sigma.is_zero() {
            return;
        }
        out.push_str(&format!("sigma {label}:\n"));
        for (w, base) in &sigma.squares {
            out.push_str(&format!(
                "weight {} square {}\n",
                display_rational(w),
                base.display(names)
            ));
        }
    };
    match &cf.payload {
        CertPayload::Module(cert) => {
            out.push_str("mode: module\n");
            out.push_str(&format!("target: {}\n", cert.target.display(names)));
            for (i, sigma) in cert.sigmas.iter().enumerate() {
                sigma_block(&i.to_string(), sigma, &mut out);
            }
        }
        CertPayload::Preorder(cert) => {
            out.push_str("mode: preorder\n");
            out.push_str(&format!("target: {}\n", cert.target.display(names)));
            let s = cf.generators.len();
            for (mask, sigma) in &cert.sigmas {
                let label = if s == 0 {
                    "0".to_string()
                } else {
                    mask_to_bits(*mask, s)
                };
                sigma_block(&label, sigma, &mut out);
            }
        }
    }
    out
}

/// Interval union syntax: pieces joined by `u`, each `[a,b]`, `(-inf,b]`
/// or `[a,inf)`, endpoints rational.
pub fn parse_intervals(s: &str) -> Result<IntervalUnion, FormatError> {
    let mut pieces = Vec::new();
    for part in s.split(['u', 'U']) {
        let part = part.trim();
        if part.is_empty() {
            return Err(FormatError::Invalid("empty interval piece".into()));
        }
        let bad = || FormatError::Invalid(format!("bad interval `{part}`"));
        let open_lo = part.starts_with('(');
        let open_hi = part.ends_with(')');
        if !(part.starts_with('[') || open_lo) || !(part.ends_with(']') || open_hi) {
            return Err(bad());
        }
        let inner = &part[1..part.len() - 1];
        let (lo_s, hi_s) = inner.split_once(',').ok_or_else(bad)?;
        let lo_s = lo_s.trim();
        let hi_s = hi_s.trim();
        let lo = if lo_s == "-inf" {
            if !open_lo {
                return Err(bad());
            }
            None
        } else {
            if open_lo {
                return Err(bad());
            }
            Some(parse_rational(lo_s)?)
        };
        let hi = if hi_s == "inf" {
            if !open_hi {
                return Err(bad());
            }
            None
        } else {
            if open_hi {
                return Err(bad());
            }
            Some(parse_rational(hi_s)?)
        };
        pieces.push(Piece { lo, hi });
    }
    IntervalUnion::new(pieces).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn serialize_intervals(k: &IntervalUnion) -> String {
    k.pieces
        .iter()
        .map(|p| {
            let lo = match &p.lo {
                None => "(-inf".to_string(),
                Some(a) => format!("[{}", display_rational(a)),
            };
            let hi = match &p.hi {
                None => "inf)".to_string(),
                Some(b) => format!("{}]", display_rational(b)),
            };
            format!("{lo},{hi}")
        })
        .collect::<Vec<_>>()
        .join("u")
}

/// Tentacle directions: `(0,1);(1,-1)`.
pub fn parse_directions(s: &str) -> Result<TentacleSet, FormatError> {
    let mut dirs = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        let bad = || FormatError::Invalid(format!("bad direction `{part}`"));
        let inner = part
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(bad)?;
        let v: Result<Vec<i64>, _> = inner.split(',').map(|c| c.trim().parse()).collect();
        dirs.push(v.map_err(|_| bad())?);
    }
    TentacleSet::new(dirs).map_err(|e| FormatError::Invalid(e.to_string()))
}

/// Logarithmic polyhedron file: lines `constraint: <a> <b> <r>` meaning
/// `x^(2a) y^(2b) <= r`.
pub fn parse_logpoly(text: &str) -> Result<LogPolyhedron, FormatError> {
    let mut exps = Vec::new();
    let mut bounds = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = line
            .strip_prefix("constraint:")
            .ok_or_else(|| err(lno, "expected `constraint: <a> <b> <rational>`"))?;
        let parts: Vec<&str> = value.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(lno, "expected three fields"));
        }
        let a: i64 = parts[0].parse().map_err(|_| err(lno, "bad exponent"))?;
        let b: i64 = parts[1].parse().map_err(|_| err(lno, "bad exponent"))?;
        exps.push([a, b]);
        bounds.push(parse_rational(parts[2]).map_err(|e| err(lno, e.to_string()))?);
    }
    LogPolyhedron::new(exps, bounds).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn serialize_logpoly(p: &LogPolyhedron) -> String {
    p.exponents
        .iter()
        .zip(&p.bounds)
        .map(|(e, r)| format!("constraint: {} {} {}\n", e[0], e[1], display_rational(r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::verify_module;
    use crate::poly::{rat, rint};

    #[test]
    fn problem_roundtrip_is_byte_identical() {
        let text = "vars: x y\ngen: 1 - x^2 - y^2\ntarget: 2 - x\nmode: module\ndegree_cap: 12\ngrid: 8\n";
        let pf = parse_problem(text).unwrap();
        let canonical = serialize_problem(&pf);
        let again = parse_problem(&canonical).unwrap();
        assert_eq!(serialize_problem(&again), canonical);
    }

    #[test]
    fn problem_rejects_decimals() {
        let text = "vars: x\ntarget: 3/2*x\n";
        assert!(parse_problem(text).is_ok());
        let bad = "vars: x\ntarget: 1.5*x\n";
        assert!(parse_problem(bad).is_err());
    }

    #[test]
    fn problem_rejects_unknown_variable() {
        let text = "vars: x\ntarget: x + z\n";
        assert!(parse_problem(text).is_err());
    }

    #[test]
    fn cert_roundtrip_module() {
        // the tangent plane certificate for 1 - x on the disc
        let text = "vars: x y\ngen: 1 - x^2 - y^2\nmode: module\ntarget: 1 - x\nsigma 0:\nweight 1/2 square x - 1\nweight 1/2 square y\nsigma 1:\nweight 1/2 square 1\n";
        let cf = parse_cert(text).unwrap();
        let CertPayload::Module(cert) = &cf.payload else {
            panic!("expected module cert");
        };
        verify_module(cert, &cf.set()).unwrap();
        let canonical = serialize_cert(&cf);
        let again = parse_cert(&canonical).unwrap();
        assert_eq!(serialize_cert(&again), canonical);
    }

    #[test]
    fn cert_roundtrip_preorder_bitstrings() {
        let text = "vars: x\ngen: x\ngen: 1 - x\nmode: preorder\ntarget: x - x^2\nsigma 11:\nweight 1 square 1\n";
        let cf = parse_cert(text).unwrap();
        let CertPayload::Preorder(cert) = &cf.payload else {
            panic!("expected preorder cert");
        };
        assert_eq!(cert.sigmas.len(), 1);
        assert!(cert.sigmas.contains_key(&0b11));
        let canonical = serialize_cert(&cf);
        let again = parse_cert(&canonical).unwrap();
        assert_eq!(serialize_cert(&again), canonical);
        assert!(canonical.contains("sigma 11:"));
    }

    #[test]
    fn cert_rejects_bad_sigma_label() {
        let text = "vars: x\ngen: x\nmode: preorder\ntarget: x\nsigma 2:\nweight 1 square 1\n";
        assert!(parse_cert(text).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), rint(-7));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(display_rational(&rat(-3, 4)), "-3/4");
    }

    #[test]
    fn interval_syntax_roundtrip() {
        let k = parse_intervals("[0,1]u[2,inf)").unwrap();
        assert_eq!(k.pieces.len(), 2);
        assert_eq!(serialize_intervals(&k), "[0,1]u[2,inf)");
        let line = parse_intervals("(-inf,inf)").unwrap();
        assert_eq!(serialize_intervals(&line), "(-inf,inf)");
        assert!(parse_intervals("[1,0]").is_err());
        assert!(parse_intervals("(0,1)").is_err());
    }

    #[test]
    fn directions_parse() {
        let t = parse_directions("(0,1);(1,-1)").unwrap();
        assert_eq!(t.directions, vec![vec![0, 1], vec![1, -1]]);
        assert!(parse_directions("0,1").is_err());
    }

    #[test]
    fn logpoly_roundtrip() {
        let text = "constraint: 0 1 1\nconstraint: 1 1 1/2\n";
        let p = parse_logpoly(text).unwrap();
        assert_eq!(p.exponents, vec![[0, 1], [1, 1]]);
        assert_eq!(serialize_logpoly(&p), text);
    }
}
