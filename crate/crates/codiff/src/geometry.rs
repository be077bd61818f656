//! Geometry definitions: a line-oriented file format naming a chart, a
//! coefficient backend, a metric matrix of expressions, and optionally a
//! conformal 1-form; plus the built-in geometries used by the test suites.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::forms::{Chart, Form};
use crate::riemann::Metric;
use crate::scalar::{Jet, MultiPoly, RationalFn, Scalar};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(BigRational),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(Func, Box<Expr>),
}

/// Ring operations needed to evaluate expressions, beyond `Scalar`.
pub trait EvalScalar: Scalar {
    fn apply_func(&self, f: Func) -> Result<Self>;
}

impl EvalScalar for RationalFn {
    fn apply_func(&self, f: Func) -> Result<Self> {
        match f {
            Func::Sqrt => self.sqrt(),
            _ => Err(Error::Usage(
                "sin/cos/exp require the jet backend".to_string(),
            )),
        }
    }
}

impl EvalScalar for Jet {
    fn apply_func(&self, f: Func) -> Result<Self> {
        match f {
            Func::Sin => Ok(self.sin()),
            Func::Cos => Ok(self.cos()),
            Func::Exp => Ok(self.exp()),
            Func::Sqrt => self.sqrt(),
        }
    }
}

impl Expr {
    /// Evaluate in the ring of `exemplar`, with `vars[i]` the value of the
    /// i-th chart coordinate.
    pub fn eval<S: EvalScalar>(&self, vars: &[S], exemplar: &S) -> Result<S> {
        match self {
            Expr::Num(c) => {
                Ok(exemplar
                    .from_poly(&MultiPoly::constant(exemplar.nvars(), c.clone())))
            }
            Expr::Var(i) => Ok(vars[*i].clone()),
            Expr::Add(a, b) => a.eval(vars, exemplar)?.add(&b.eval(vars, exemplar)?),
            Expr::Sub(a, b) => a.eval(vars, exemplar)?.sub(&b.eval(vars, exemplar)?),
            Expr::Mul(a, b) => a.eval(vars, exemplar)?.mul(&b.eval(vars, exemplar)?),
            Expr::Div(a, b) => a
                .eval(vars, exemplar)?
                .mul(&b.eval(vars, exemplar)?.inverse()?),
            Expr::Neg(a) => Ok(a.eval(vars, exemplar)?.neg()),
            Expr::Pow(a, e) => {
                let base = a.eval(vars, exemplar)?;
                let base = if *e < 0 { base.inverse()? } else { base };
                let mut out = exemplar.one_like();
                for _ in 0..e.unsigned_abs() {
                    out = out.mul(&base)?;
                }
                Ok(out)
            }
            Expr::Call(f, a) => a.eval(vars, exemplar)?.apply_func(*f),
        }
    }
}

// ---------------------------------------------------------------------------
// Tokenizer / parser with line-column error reporting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize, col0: usize) -> Self {
        Lexer {
            src,
            pos: 0,
            line,
            col: col0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>> {
        let bytes = self.src.as_bytes();
        let mut out = Vec::new();
        while self.pos < bytes.len() {
            let c = bytes[self.pos] as char;
            let (line, col) = (self.line, self.col);
            match c {
                ' ' | '\t' => {
                    self.pos += 1;
                    self.col += 1;
                }
                '+' => {
                    out.push((Tok::Plus, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                '-' => {
                    out.push((Tok::Minus, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                '*' => {
                    out.push((Tok::Star, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                '/' => {
                    out.push((Tok::Slash, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                '^' => {
                    out.push((Tok::Caret, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                '(' => {
                    out.push((Tok::LParen, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                ')' => {
                    out.push((Tok::RParen, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                ',' => {
                    out.push((Tok::Comma, line, col));
                    self.pos += 1;
                    self.col += 1;
                }
                '0'..='9' | '.' => {
                    let start = self.pos;
                    let mut seen_dot = false;
                    while self.pos < bytes.len() {
                        let d = bytes[self.pos] as char;
                        if d.is_ascii_digit() {
                            self.pos += 1;
                        } else if d == '.' && !seen_dot {
                            seen_dot = true;
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    let text = &self.src[start..self.pos];
                    self.col += self.pos - start;
                    let num = decimal_to_rational(text)
                        .ok_or_else(|| parse_err(line, col, format!("bad number '{text}'")))?;
                    out.push((Tok::Num(num), line, col));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = self.pos;
                    while self.pos < bytes.len() {
                        let d = bytes[self.pos] as char;
                        if d.is_alphanumeric() || d == '_' {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    let text = self.src[start..self.pos].to_string();
                    self.col += self.pos - start;
                    out.push((Tok::Ident(text), line, col));
                }
                other => {
                    return Err(parse_err(line, col, format!("unexpected character '{other}'")))
                }
            }
        }
        Ok(out)
    }
}

fn decimal_to_rational(text: &str) -> Option<BigRational> {
    if text == "." {
        return None;
    }
    match text.find('.') {
        None => text
            .parse::<BigInt>()
            .ok()
            .map(BigRational::from_integer),
        Some(i) => {
            let int_part = &text[..i];
            let frac_part = &text[i + 1..];
            let digits = format!("{int_part}{frac_part}");
            let num = digits.parse::<BigInt>().ok()?;
            let den = BigInt::from(10u32).pow(frac_part.len() as u32);
            Some(BigRational::new(num, den))
        }
    }
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize, usize)],
    pos: usize,
    coords: &'a [String],
    end: (usize, usize),
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let negative = if let Some(Tok::Minus) = self.peek() {
                self.pos += 1;
                true
            } else {
                false
            };
            let (l, c) = self.here();
            match self.peek() {
                Some(Tok::Num(n)) if n.is_integer() => {
                    let mut e: i64 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| parse_err(l, c, "exponent too large"))?;
                    if negative {
                        e = -e;
                    }
                    self.pos += 1;
                    Ok(Expr::Pow(Box::new(base), e))
                }
                _ => Err(parse_err(l, c, "expected integer exponent after '^'")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let (l, c) = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "sqrt" => Func::Sqrt,
                        other => {
                            return Err(parse_err(l, c, format!("unknown function '{other}'")))
                        }
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    let (l2, c2) = self.here();
                    match self.peek() {
                        Some(Tok::RParen) => {
                            self.pos += 1;
                            Ok(Expr::Call(f, Box::new(arg)))
                        }
                        _ => Err(parse_err(l2, c2, "expected ')'")),
                    }
                } else if let Some(i) = self.coords.iter().position(|n| n == &name) {
                    Ok(Expr::Var(i))
                } else {
                    Err(parse_err(l, c, format!("unknown identifier '{name}'")))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                let (l2, c2) = self.here();
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(parse_err(l2, c2, "expected ')'")),
                }
            }
            _ => Err(parse_err(l, c, "expected expression")),
        }
    }
}

/// Parse a single expression over the given coordinate names. `line` and
/// `col0` locate the text within its source document for error reporting.
pub fn parse_expr(text: &str, coords: &[String], line: usize, col0: usize) -> Result<Expr> {
    let toks = Lexer::new(text, line, col0).tokens()?;
    let end = (line, col0 + text.len());
    let mut p = ExprParser {
        toks: &toks,
        pos: 0,
        coords,
        end,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        let (l, c) = p.here();
        return Err(parse_err(l, c, "trailing input after expression"));
    }
    Ok(e)
}

/// Split a line on commas at paren depth 0, returning (text, column) pairs.
fn split_commas(text: &str, col0: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push((text[start..i].to_string(), col0 + start));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((text[start..].to_string(), col0 + start));
    out
}

// ---------------------------------------------------------------------------
// Geometry definitions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Backend {
    Rational,
    Jet { base: Vec<BigRational>, order: u32 },
}

#[derive(Debug, Clone)]
pub struct GeometryDef {
    pub name: String,
    pub coords: Vec<String>,
    pub backend: Backend,
    pub metric: Vec<Vec<Expr>>,
    /// Components of an optional conformal 1-form τ = Σ τᵢ dxⁱ.
    pub conformal: Option<Vec<Expr>>,
}

/// Instantiated geometry over a concrete coefficient ring.
pub struct GeometryData<S: Scalar> {
    pub name: String,
    pub chart: Chart,
    pub metric: Metric<S>,
    pub conformal: Option<Form<S>>,
}

pub enum Geometry {
    Rational(GeometryData<RationalFn>),
    Jets(GeometryData<Jet>),
}

impl Geometry {
    pub fn name(&self) -> &str {
        match self {
            Geometry::Rational(g) => &g.name,
            Geometry::Jets(g) => &g.name,
        }
    }

    /// Default residual tolerance appropriate for the backend.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Geometry::Rational(_) => 0.0,
            Geometry::Jets(_) => 1e-8,
        }
    }
}

/// Parse a geometry definition document. The format is line-oriented:
/// `#` starts a comment; `name = ...`, `coords = x, y`, `backend =
/// rational|jet`, for jets `base = q, q` and `order = k`; `metric =` is
/// followed by n lines of n comma-separated expressions; `conformal =
/// e1, ..., en` gives the components of a 1-form.
pub fn parse_geometry(text: &str) -> Result<GeometryDef> {
    let mut name = None;
    let mut coords: Option<Vec<String>> = None;
    let mut backend_kind: Option<String> = None;
    let mut base: Option<Vec<BigRational>> = None;
    let mut order: Option<u32> = None;
    let mut metric: Option<Vec<Vec<Expr>>> = None;
    let mut conformal: Option<Vec<Expr>> = None;
    let mut metric_rows_left = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        if metric_rows_left > 0 {
            let cs = coords.as_ref().unwrap();
            let indent = line.len() - line.trim_start().len();
            let row: Vec<Expr> = split_commas(line.trim(), indent + 1)
                .into_iter()
                .map(|(t, c)| parse_expr(&t, cs, lineno, c))
                .collect::<Result<_>>()?;
            if row.len() != cs.len() {
                return Err(parse_err(
                    lineno,
                    1,
                    format!("metric row has {} entries, expected {}", row.len(), cs.len()),
                ));
            }
            metric.as_mut().unwrap().push(row);
            metric_rows_left -= 1;
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| parse_err(lineno, 1, "expected 'key = value'"))?;
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        let vcol = eq + 2 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
        match key {
            "name" => name = Some(value.to_string()),
            "coords" => {
                let cs: Vec<String> = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if cs.is_empty() {
                    return Err(parse_err(lineno, vcol, "empty coordinate list"));
                }
                coords = Some(cs);
            }
            "backend" => backend_kind = Some(value.to_string()),
            "base" => {
                let parts: Result<Vec<BigRational>> = value
                    .split(',')
                    .map(|s| {
                        let t = s.trim();
                        parse_rational(t)
                            .ok_or_else(|| parse_err(lineno, vcol, format!("bad rational '{t}'")))
                    })
                    .collect();
                base = Some(parts?);
            }
            "order" => {
                order = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| parse_err(lineno, vcol, "bad order"))?,
                )
            }
            "metric" => {
                let cs = coords
                    .as_ref()
                    .ok_or_else(|| parse_err(lineno, 1, "coords must come before metric"))?;
                if !value.is_empty() {
                    return Err(parse_err(
                        lineno,
                        vcol,
                        "metric entries start on the following lines",
                    ));
                }
                metric = Some(Vec::new());
                metric_rows_left = cs.len();
            }
            "conformal" => {
                let cs = coords
                    .as_ref()
                    .ok_or_else(|| parse_err(lineno, 1, "coords must come before conformal"))?;
                let comps: Vec<Expr> = split_commas(value, vcol)
                    .into_iter()
                    .map(|(t, c)| parse_expr(&t, cs, lineno, c))
                    .collect::<Result<_>>()?;
                if comps.len() != cs.len() {
                    return Err(parse_err(
                        lineno,
                        vcol,
                        format!("conformal has {} components, expected {}", comps.len(), cs.len()),
                    ));
                }
                conformal = Some(comps);
            }
            other => return Err(parse_err(lineno, 1, format!("unknown key '{other}'"))),
        }
    }

    if metric_rows_left > 0 {
        return Err(parse_err(0, 0, "metric block ended early"));
    }
    let coords = coords.ok_or_else(|| parse_err(0, 0, "missing coords"))?;
    let metric = metric.ok_or_else(|| parse_err(0, 0, "missing metric"))?;
    let backend = match backend_kind.as_deref() {
        Some("rational") | None => Backend::Rational,
        Some("jet") => {
            let base = base.unwrap_or_else(|| vec![BigRational::one(); coords.len()]);
            if base.len() != coords.len() {
                return Err(parse_err(0, 0, "base point dimension mismatch"));
            }
            Backend::Jet {
                base,
                order: order.unwrap_or(4),
            }
        }
        Some(other) => return Err(parse_err(0, 0, format!("unknown backend '{other}'"))),
    };
    Ok(GeometryDef {
        name: name.unwrap_or_else(|| "unnamed".to_string()),
        coords,
        backend,
        metric,
        conformal,
    })
}

fn parse_rational(t: &str) -> Option<BigRational> {
    if let Some(i) = t.find('/') {
        let n = t[..i].trim().parse::<BigInt>().ok()?;
        let d = t[i + 1..].trim().parse::<BigInt>().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        decimal_to_rational(t)
    }
}

fn instantiate_in<S: EvalScalar>(
    def: &GeometryDef,
    vars: &[S],
    exemplar: &S,
) -> Result<GeometryData<S>> {
    let n = def.coords.len();
    let mut g = Vec::with_capacity(n);
    for row in &def.metric {
        let r: Vec<S> = row
            .iter()
            .map(|e| e.eval(vars, exemplar))
            .collect::<Result<_>>()?;
        g.push(r);
    }
    for i in 0..n {
        for j in 0..n {
            if !g[i][j].sub(&g[j][i])?.is_zero() {
                return Err(Error::InvalidMetric(format!(
                    "metric is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let metric = Metric::new(g).map_err(|e| match e {
        Error::NotInvertible => Error::InvalidMetric("metric is singular".to_string()),
        other => other,
    })?;
    let conformal = match &def.conformal {
        None => None,
        Some(comps) => {
            let mut tau = Form::zero(n);
            for (i, e) in comps.iter().enumerate() {
                let c = e.eval(vars, exemplar)?;
                tau = tau.add(&Form::basis_one_form(n, i, exemplar).scalar_mul(&c)?)?;
            }
            Some(tau)
        }
    };
    Ok(GeometryData {
        name: def.name.clone(),
        chart: Chart::new(def.coords.clone()),
        metric,
        conformal,
    })
}

impl GeometryDef {
    /// Build the metric (and conformal form, if any) in the chosen ring.
    /// `order_override` replaces the jet order from the definition.
    pub fn instantiate(&self, order_override: Option<u32>) -> Result<Geometry> {
        let n = self.coords.len();
        match &self.backend {
            Backend::Rational => {
                let exemplar = RationalFn::from_int(n, 0);
                let vars: Vec<RationalFn> = (0..n).map(|i| RationalFn::var(n, i)).collect();
                Ok(Geometry::Rational(instantiate_in(self, &vars, &exemplar)?))
            }
            Backend::Jet { base, order } => {
                let order = order_override.unwrap_or(*order);
                let exemplar = Jet::zero(base.clone(), order);
                let vars: Vec<Jet> = (0..n)
                    .map(|i| Jet::var(base.clone(), order, i))
                    .collect();
                Ok(Geometry::Jets(instantiate_in(self, &vars, &exemplar)?))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in geometries
// ---------------------------------------------------------------------------

pub const BUILTIN_NAMES: &[&str] = &[
    "flat2", "flat3", "flat3sc", "sphere2", "sphere2r", "diagpoly",
];

/// Return the definition text of a built-in geometry, if `name` is one.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "flat2" => Some(
            "name = flat2\n\
             coords = x, y\n\
             backend = rational\n\
             metric =\n\
             1, 0\n\
             0, 1\n\
             conformal = x, y\n",
        ),
        "flat3" => Some(
            "name = flat3\n\
             coords = x, y, z\n\
             backend = rational\n\
             metric =\n\
             1, 0, 0\n\
             0, 1, 0\n\
             0, 0, 1\n\
             conformal = x, y, z\n",
        ),
        "flat3sc" => Some(
            "name = flat3sc\n\
             coords = x, y, z\n\
             backend = rational\n\
             metric =\n\
             1, 0, 0\n\
             0, 1, 0\n\
             0, 0, 1\n\
             conformal = x^2 - y^2 - z^2, 2*x*y, 2*x*z\n",
        ),
        "sphere2" => Some(
            "name = sphere2\n\
             coords = theta, phi\n\
             backend = jet\n\
             base = 1, 1\n\
             order = 4\n\
             metric =\n\
             1, 0\n\
             0, sin(theta)^2\n",
        ),
        "sphere2r" => Some(
            "name = sphere2r\n\
             coords = theta, phi\n\
             backend = jet\n\
             base = 1, 1\n\
             order = 4\n\
             metric =\n\
             4, 0\n\
             0, 4*sin(theta)^2\n",
        ),
        "diagpoly" => Some(
            "name = diagpoly\n\
             coords = x, y\n\
             backend = rational\n\
             metric =\n\
             1 + x^2, 0\n\
             0, 1 + y^2\n",
        ),
        _ => None,
    }
}

/// Load a geometry by built-in name or from definition text.
pub fn load_geometry(name_or_text: &str) -> Result<GeometryDef> {
    match builtin(name_or_text) {
        Some(text) => parse_geometry(text),
        None => parse_geometry(name_or_text),
    }
}
