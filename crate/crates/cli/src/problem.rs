//! Problem files.
//!
//! A problem file is line oriented. `#` starts a comment. Top-level
//! `key = value` lines come first, followed by named sections:
//!
//! ```text
//! interval = -1 1
//! command = product theta delta
//! seed = 5EED
//!
//! [shape tilted]
//! piece -0.5 0.5 : 1 2          # coefficients in s, ascending powers
//!
//! [curve bump]                  # a profile on J, no normalization
//! piece -0.5 0.5 : 0.5 1
//!
//! [function theta]              # pieces in t, gaps are zero
//! piece 0 1 : 1
//! profile 0 bump                # ramp, step or a curve name
//!
//! [testfn phi]
//! piece -0.5 0 : 1 2
//! piece 0 0.5 : 1 -2
//! support -0.5 0.5
//!
//! [distribution delta]
//! regular -1 0 : 0.5            # density pieces
//! stieltjes 0 1 : 0 1           # continuous integrator pieces
//! delta 0 tilted                # shaped delta
//! delta_lambda 0.5 0.25         # λ φ(τ+) + (1 − λ) φ(τ−)
//! atom 0.5 1 0 bump             # τ, right weight, left weight, density or none
//!
//! [system]
//! t0 = -1
//! x0 = 1 0
//! f = 1 ; 0
//! g = 1, 0 ; 0, x1
//! impulse = 0 ramp reverse_ramp
//! ```
//!
//! The shapes `uniform`, `ramp`, `reverse_ramp` and `quadratic` are built in.

use std::collections::BTreeMap;
use std::path::Path;

use dyndist::battery::BATTERY_SEED;
use dyndist::ode::{FieldExpr, Impulse, ImpulsiveIvp, MatrixField, VectorField};
use dyndist::{Atom, Distribution, DynamicFn, PiecewisePoly, Poly, Profile, Shape, Side, TestFn};

use crate::CliError;

const J: (f64, f64) = (-0.5, 0.5);

/// Named objects and parameters of a loaded problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub lo: f64,
    pub hi: f64,
    /// Declared command name and its arguments.
    pub command: Option<(String, Vec<String>)>,
    pub steps: usize,
    pub jump_steps: usize,
    pub m_list: Vec<u32>,
    pub seed: u64,
    /// Labelled shape vectors for the shape sweep.
    pub sweep: Vec<(String, Vec<Shape>)>,
    /// State box for the commutation lattice.
    pub x_box: Option<Vec<(f64, f64)>>,
    pub shapes: BTreeMap<String, Shape>,
    pub curves: BTreeMap<String, PiecewisePoly>,
    pub functions: BTreeMap<String, DynamicFn>,
    pub testfns: BTreeMap<String, TestFn>,
    pub distributions: BTreeMap<String, Distribution>,
    pub system: Option<ImpulsiveIvp>,
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

struct Section<'a> {
    kind: &'a str,
    name: &'a str,
    no: usize,
    lines: Vec<Line<'a>>,
}

fn parse_err(no: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        line: no,
        msg: msg.into(),
    }
}

fn core_err(no: usize) -> impl Fn(dyndist::Error) -> CliError {
    move |source| CliError::Invalid { line: no, source }
}

fn num(no: usize, s: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(no, format!("expected a number, found '{s}'")))
}

fn nums(no: usize, s: &str) -> Result<Vec<f64>, CliError> {
    s.split_whitespace().map(|w| num(no, w)).collect()
}

fn count(no: usize, s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse::<usize>()
        .ok()
        .filter(|v| *v > 0)
        .ok_or_else(|| parse_err(no, format!("expected a positive integer, found '{s}'")))
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    u64::from_str_radix(s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s), 16).ok()
}

fn key_value(line: &Line) -> Result<(String, String), CliError> {
    let (k, v) = line
        .text
        .split_once('=')
        .ok_or_else(|| parse_err(line.no, "expected 'key = value'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// `piece LO HI : c0 c1 ...` after the keyword.
fn piece(no: usize, rest: &str) -> Result<(f64, f64, Poly), CliError> {
    let (bounds, coeffs) = rest
        .split_once(':')
        .ok_or_else(|| parse_err(no, "expected 'LO HI : coefficients'"))?;
    let b = nums(no, bounds)?;
    if b.len() != 2 || b[0] >= b[1] {
        return Err(parse_err(no, "a piece needs bounds LO < HI"));
    }
    let c = nums(no, coeffs)?;
    if c.is_empty() {
        return Err(parse_err(no, "a piece needs at least one coefficient"));
    }
    Ok((b[0], b[1], Poly::new(c)))
}

/// Assembles pieces on `[lo, hi]`, filling gaps with zero.
fn assemble(no: usize, lo: f64, hi: f64, mut pieces: Vec<(f64, f64, Poly)>) -> Result<PiecewisePoly, CliError> {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = 1e-12 * (hi - lo);
    let mut breaks = vec![lo];
    let mut polys = Vec::new();
    let mut at = lo;
    for (a, b, p) in pieces {
        if a < at - tol || b > hi + tol {
            return Err(parse_err(no, format!("piece [{a}, {b}] overlaps another piece or leaves [{lo}, {hi}]")));
        }
        if a > at + tol {
            polys.push(Poly::zero());
            breaks.push(a);
        }
        polys.push(p);
        breaks.push(b);
        at = b;
    }
    if at < hi - tol {
        polys.push(Poly::zero());
        breaks.push(hi);
    }
    *breaks.last_mut().expect("nonempty") = hi;
    PiecewisePoly::from_global(breaks, polys).map_err(core_err(no))
}

fn split_sections(text: &str) -> Result<(Vec<Line<'_>>, Vec<Section<'_>>), CliError> {
    let mut top = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(head) = line.strip_prefix('[') {
            let head = head
                .strip_suffix(']')
                .ok_or_else(|| parse_err(no, "unterminated section header"))?;
            let mut words = head.split_whitespace();
            let kind = words.next().ok_or_else(|| parse_err(no, "empty section header"))?;
            let name = words.next().unwrap_or("");
            if words.next().is_some() {
                return Err(parse_err(no, "section header takes a kind and one name"));
            }
            let named = kind != "system";
            if !matches!(kind, "shape" | "curve" | "function" | "testfn" | "distribution" | "system") {
                return Err(parse_err(no, format!("unknown section kind '{kind}'")));
            }
            if named == name.is_empty() {
                return Err(parse_err(no, format!("section '{kind}' {}", if named { "needs a name" } else { "takes no name" })));
            }
            sections.push(Section {
                kind,
                name,
                no,
                lines: Vec::new(),
            });
        } else if let Some(s) = sections.last_mut() {
            s.lines.push(Line { no, text: line });
        } else {
            top.push(Line { no, text: line });
        }
    }
    Ok((top, sections))
}

fn split_keyword(line: &Line) -> (String, String) {
    let mut it = line.text.splitn(2, char::is_whitespace);
    let k = it.next().unwrap_or("").to_string();
    let rest = it.next().unwrap_or("").trim().to_string();
    (k, rest)
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Problem::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Problem, CliError> {
        let (top, sections) = split_sections(text)?;
        let mut p = Problem {
            lo: -1.0,
            hi: 1.0,
            command: None,
            steps: 1000,
            jump_steps: 10_000,
            m_list: vec![16, 32, 64, 128, 256],
            seed: BATTERY_SEED,
            sweep: Vec::new(),
            x_box: None,
            shapes: BTreeMap::new(),
            curves: BTreeMap::new(),
            functions: BTreeMap::new(),
            testfns: BTreeMap::new(),
            distributions: BTreeMap::new(),
            system: None,
        };
        for (name, s) in [
            ("uniform", Shape::uniform()),
            ("ramp", Shape::ramp()),
            ("reverse_ramp", Shape::reverse_ramp()),
            ("quadratic", Shape::quadratic()),
        ] {
            p.shapes.insert(name.into(), s);
        }

        let mut sweep_line = None;
        let mut seen = BTreeMap::new();
        for line in &top {
            let (k, v) = key_value(line)?;
            if seen.insert(k.clone(), line.no).is_some() {
                return Err(parse_err(line.no, format!("duplicate key '{k}'")));
            }
            match k.as_str() {
                "interval" => {
                    let b = nums(line.no, &v)?;
                    if b.len() != 2 || b[0] >= b[1] {
                        return Err(parse_err(line.no, "interval needs two numbers a < b"));
                    }
                    (p.lo, p.hi) = (b[0], b[1]);
                }
                "command" => {
                    let mut words = v.split_whitespace().map(str::to_string);
                    let name = words.next().ok_or_else(|| parse_err(line.no, "empty command"))?;
                    p.command = Some((name, words.collect()));
                }
                "steps" => p.steps = count(line.no, &v)?,
                "jump_steps" => p.jump_steps = count(line.no, &v)?,
                "m" => {
                    p.m_list = v
                        .split_whitespace()
                        .map(|w| count(line.no, w).and_then(|m| u32::try_from(m).map_err(|_| parse_err(line.no, "m too large"))))
                        .collect::<Result<_, _>>()?;
                    if p.m_list.is_empty() {
                        return Err(parse_err(line.no, "m needs at least one value"));
                    }
                }
                "seed" => p.seed = parse_seed(&v).ok_or_else(|| parse_err(line.no, format!("bad hex seed '{v}'")))?,
                "sweep" => sweep_line = Some((line.no, v)),
                "box" => {
                    let b = nums(line.no, &v)?;
                    if b.is_empty() || b.len() % 2 != 0 || b.chunks(2).any(|c| c[0] > c[1]) {
                        return Err(parse_err(line.no, "box needs pairs LO HI with LO ≤ HI"));
                    }
                    p.x_box = Some(b.chunks(2).map(|c| (c[0], c[1])).collect());
                }
                _ => return Err(parse_err(line.no, format!("unknown key '{k}'"))),
            }
        }

        let mut names = BTreeMap::new();
        for s in &sections {
            if s.kind != "system" && (names.insert(s.name, s.no).is_some() || p.shapes.contains_key(s.name)) {
                return Err(parse_err(s.no, format!("name '{}' defined twice", s.name)));
            }
        }
        if sections.iter().filter(|s| s.kind == "system").count() > 1 {
            return Err(parse_err(0, "at most one [system] section"));
        }

        for s in sections.iter().filter(|s| matches!(s.kind, "shape" | "curve")) {
            let curve = p.curve_section(s)?;
            if s.kind == "shape" {
                p.shapes.insert(s.name.into(), Shape::new(curve).map_err(core_err(s.no))?);
            } else {
                p.curves.insert(s.name.into(), curve);
            }
        }
        for s in sections.iter().filter(|s| matches!(s.kind, "function" | "testfn")) {
            p.function_section(s)?;
        }
        for s in sections.iter().filter(|s| s.kind == "distribution") {
            let d = p.distribution_section(s)?;
            p.distributions.insert(s.name.into(), d);
        }
        if let Some(s) = sections.iter().find(|s| s.kind == "system") {
            p.system = Some(p.system_section(s)?);
        }
        if let Some((no, v)) = sweep_line {
            p.sweep = p.parse_sweep(no, &v)?;
        }
        Ok(p)
    }

    fn curve_section(&self, s: &Section) -> Result<PiecewisePoly, CliError> {
        let mut pieces = Vec::new();
        for line in &s.lines {
            match split_keyword(line) {
                (k, rest) if k == "piece" => pieces.push(piece(line.no, &rest)?),
                (k, _) => return Err(parse_err(line.no, format!("unexpected '{k}' in [{} {}]", s.kind, s.name))),
            }
        }
        if pieces.is_empty() {
            return Err(parse_err(s.no, "a curve needs at least one piece"));
        }
        assemble(s.no, J.0, J.1, pieces)
    }

    fn shape(&self, no: usize, name: &str) -> Result<&Shape, CliError> {
        self.shapes.get(name).ok_or_else(|| CliError::Unresolved {
            line: no,
            name: name.into(),
        })
    }

    fn density(&self, no: usize, name: &str) -> Result<PiecewisePoly, CliError> {
        if let Some(c) = self.curves.get(name) {
            Ok(c.clone())
        } else {
            Ok(self.shape(no, name)?.density().clone())
        }
    }

    fn function_section(&mut self, s: &Section) -> Result<(), CliError> {
        let mut pieces = Vec::new();
        let mut profiles = Vec::new();
        let mut support = None;
        for line in &s.lines {
            let (k, rest) = split_keyword(line);
            match k.as_str() {
                "piece" => pieces.push(piece(line.no, &rest)?),
                "profile" => {
                    let w: Vec<&str> = rest.split_whitespace().collect();
                    if w.len() != 2 {
                        return Err(parse_err(line.no, "expected 'profile TAU ramp|step|CURVE'"));
                    }
                    profiles.push((line.no, num(line.no, w[0])?, w[1].to_string()));
                }
                "support" if s.kind == "testfn" => {
                    let b = nums(line.no, &rest)?;
                    if b.len() != 2 {
                        return Err(parse_err(line.no, "expected 'support C D'"));
                    }
                    support = Some((line.no, b[0], b[1]));
                }
                _ => return Err(parse_err(line.no, format!("unexpected '{k}' in [{} {}]", s.kind, s.name))),
            }
        }
        let body = assemble(s.no, self.lo, self.hi, pieces)?;
        let mut resolved = Vec::new();
        for (no, tau, which) in profiles {
            let l = body.eval_side(tau, Side::Left).map_err(core_err(no))?;
            let r = body.eval_side(tau, Side::Right).map_err(core_err(no))?;
            let profile = match which.as_str() {
                "ramp" => Profile::ramp(l, r),
                "step" => Profile::step(l, r),
                name => Profile::new(
                    self.curves
                        .get(name)
                        .ok_or_else(|| CliError::Unresolved {
                            line: no,
                            name: name.into(),
                        })?
                        .clone(),
                )
                .map_err(core_err(no))?,
            };
            resolved.push((tau, profile));
        }
        let f = DynamicFn::from_pw(body, resolved).map_err(core_err(s.no))?;
        if s.kind == "testfn" {
            let (no, c, d) = support.ok_or_else(|| parse_err(s.no, "a test function needs 'support C D'"))?;
            self.testfns
                .insert(s.name.into(), TestFn::new(f, c, d).map_err(core_err(no))?);
        } else {
            self.functions.insert(s.name.into(), f);
        }
        Ok(())
    }

    fn distribution_section(&self, s: &Section) -> Result<Distribution, CliError> {
        let mut regular = Vec::new();
        let mut stieltjes = Vec::new();
        let mut atoms = Vec::new();
        for line in &s.lines {
            let (k, rest) = split_keyword(line);
            let w: Vec<&str> = rest.split_whitespace().collect();
            match k.as_str() {
                "regular" => regular.push(piece(line.no, &rest)?),
                "stieltjes" => stieltjes.push(piece(line.no, &rest)?),
                "delta" => {
                    if w.len() != 2 {
                        return Err(parse_err(line.no, "expected 'delta TAU SHAPE'"));
                    }
                    let shape = self.shape(line.no, w[1])?;
                    atoms.push(Atom::shaped(num(line.no, w[0])?, shape.density().clone()));
                }
                "delta_lambda" => {
                    if w.len() != 2 {
                        return Err(parse_err(line.no, "expected 'delta_lambda TAU LAMBDA'"));
                    }
                    let d = Distribution::delta_lambda(self.lo, self.hi, num(line.no, w[0])?, num(line.no, w[1])?)
                        .map_err(core_err(line.no))?;
                    atoms.extend(d.atoms().iter().cloned());
                }
                "atom" => {
                    if w.len() != 4 {
                        return Err(parse_err(line.no, "expected 'atom TAU RIGHT LEFT DENSITY|none'"));
                    }
                    let density = if w[3] == "none" {
                        PiecewisePoly::zero(J.0, J.1).map_err(core_err(line.no))?
                    } else {
                        self.density(line.no, w[3])?
                    };
                    atoms.push(Atom {
                        tau: num(line.no, w[0])?,
                        right: num(line.no, w[1])?,
                        left: num(line.no, w[2])?,
                        density,
                    });
                }
                _ => return Err(parse_err(line.no, format!("unexpected '{k}' in [distribution {}]", s.name))),
            }
        }
        let regular = assemble(s.no, self.lo, self.hi, regular)?;
        let stieltjes = assemble(s.no, self.lo, self.hi, stieltjes)?;
        Distribution::from_parts(regular, stieltjes, atoms).map_err(core_err(s.no))
    }

    fn system_section(&self, s: &Section) -> Result<ImpulsiveIvp, CliError> {
        let mut t0 = None;
        let mut x0 = None;
        let mut f_text = None;
        let mut g_text = None;
        let mut impulses = Vec::new();
        for line in &s.lines {
            let (k, v) = key_value(line)?;
            fn dup<T>(slot: &Option<T>, no: usize, k: &str) -> Result<(), CliError> {
                match slot {
                    Some(_) => Err(parse_err(no, format!("duplicate key '{k}'"))),
                    None => Ok(()),
                }
            }
            match k.as_str() {
                "t0" => {
                    dup(&t0, line.no, &k)?;
                    t0 = Some(num(line.no, &v)?);
                }
                "x0" => {
                    dup(&x0, line.no, &k)?;
                    x0 = Some(nums(line.no, &v)?);
                }
                "f" => {
                    dup(&f_text, line.no, &k)?;
                    f_text = Some((line.no, v));
                }
                "g" => {
                    dup(&g_text, line.no, &k)?;
                    g_text = Some((line.no, v));
                }
                "impulse" => impulses.push((line.no, v)),
                _ => return Err(parse_err(line.no, format!("unknown key '{k}' in [system]"))),
            }
        }
        let t0 = t0.ok_or_else(|| parse_err(s.no, "[system] needs t0"))?;
        let x0 = x0.filter(|x| !x.is_empty()).ok_or_else(|| parse_err(s.no, "[system] needs x0"))?;
        let n = x0.len();
        let expr = |no: usize, e: &str| FieldExpr::parse_with_dim(e.trim(), n).map_err(core_err(no));
        let f = match f_text {
            None => VectorField::zero(n),
            Some((no, v)) => {
                let comps: Vec<&str> = v.split(';').collect();
                if comps.len() != n {
                    return Err(parse_err(no, format!("f has {} components, x0 has {n}", comps.len())));
                }
                VectorField::new(comps.iter().map(|e| expr(no, e)).collect::<Result<_, _>>()?).map_err(core_err(no))?
            }
        };
        let g = match g_text {
            None => MatrixField::new(vec![vec![FieldExpr::Num(0.0); n]; n]).map_err(core_err(s.no))?,
            Some((no, v)) => {
                let rows: Vec<Vec<&str>> = v.split(';').map(|r| r.split(',').collect()).collect();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(parse_err(no, format!("g must be {n}×{n}, rows split by ';', entries by ','")));
                }
                MatrixField::new(
                    rows.iter()
                        .map(|r| r.iter().map(|e| expr(no, e)).collect::<Result<_, _>>())
                        .collect::<Result<_, _>>()?,
                )
                .map_err(core_err(no))?
            }
        };
        let impulses = impulses
            .into_iter()
            .map(|(no, v)| {
                let w: Vec<&str> = v.split_whitespace().collect();
                if w.len() < 2 {
                    return Err(parse_err(no, "expected 'impulse = TAU SHAPE...'"));
                }
                Ok(Impulse {
                    tau: num(no, w[0])?,
                    shapes: self.shape_vector(no, &w[1..], n)?,
                })
            })
            .collect::<Result<_, CliError>>()?;
        ImpulsiveIvp::new((self.lo, self.hi), t0, x0, f, g, impulses).map_err(core_err(s.no))
    }

    /// One shape per component, or a single shape for all of them.
    fn shape_vector(&self, no: usize, names: &[&str], n: usize) -> Result<Vec<Shape>, CliError> {
        let shapes = names
            .iter()
            .map(|w| self.shape(no, w).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        match shapes.len() {
            1 => Ok(vec![shapes[0].clone(); n]),
            k if k == n => Ok(shapes),
            k => Err(parse_err(no, format!("{k} shapes for {n} components"))),
        }
    }

    fn parse_sweep(&self, no: usize, v: &str) -> Result<Vec<(String, Vec<Shape>)>, CliError> {
        let n = self
            .system
            .as_ref()
            .map(ImpulsiveIvp::dim)
            .ok_or_else(|| parse_err(no, "sweep needs a [system] section"))?;
        v.split_whitespace()
            .map(|group| {
                let names: Vec<&str> = group.split(',').collect();
                Ok((group.to_string(), self.shape_vector(no, &names, n)?))
            })
            .collect()
    }
}
