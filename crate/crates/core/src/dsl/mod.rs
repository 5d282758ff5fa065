//! Line-oriented theory files and their side files.
//!
//! A theory file declares spacetime, fields, gauge parameters, a Lagrangian,
//! the generating set R^i_α, optional structure operators and named
//! solutions. Expressions use the kernel's text form, so anything the kernel
//! renders parses back to the same expression.

mod lexer;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::diffop::{BiDiffOp, IndexRange, TotalDiffOp};
use crate::kernel::{render::render_jet, Coeff, Expr, Generator, Kind, MultiIndex, Schema, SpaceSpec, Var};
use crate::theory::{NamedSolution, Theory, TheoryError};

use lexer::{lex, Tok, Token};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {message}{}", expected_suffix(.expected))]
    Syntax {
        line: usize,
        col: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("{line}:{col}: {message}")]
    Semantic { line: usize, col: usize, message: String },
    #[error("missing space declaration")]
    MissingSpace,
    #[error("missing lagrangian declaration")]
    MissingLagrangian,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

fn semantic(line: usize, col: usize, message: impl Into<String>) -> DslError {
    DslError::Semantic {
        line,
        col,
        message: message.into(),
    }
}

/// A parsed theory file. Structure `Some(zero)` is the explicit
/// `structure abelian` declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryDocument {
    pub schema: Schema,
    pub lagrangian: Expr,
    pub generators: TotalDiffOp,
    pub structure: Option<BiDiffOp>,
    pub solutions: Vec<NamedSolution>,
}

impl TheoryDocument {
    /// Validates the document as a gauge theory.
    pub fn to_theory(&self) -> Result<Theory, TheoryError> {
        Theory::new(
            self.schema.clone(),
            self.lagrangian.clone(),
            self.generators.clone(),
            self.structure.clone(),
            self.solutions.clone(),
        )
    }

    pub fn render(&self) -> String {
        let s = &self.schema;
        let mut out = String::new();
        let _ = writeln!(out, "space dim={} coords={}", s.dim(), s.space.coord_names().join(","));
        for f in &s.fields {
            let _ = writeln!(out, "field {f}");
        }
        for p in &s.params {
            let _ = writeln!(out, "param {p}");
        }
        let _ = writeln!(out, "lagrangian {}", s.render(&self.lagrangian));
        for ((i, alpha, mi), c) in self.generators.coeffs() {
            let bracket = if mi.is_empty() {
                String::new()
            } else {
                format!(" {}", bracket(mi, s))
            };
            let _ = writeln!(
                out,
                "generator {} {}{bracket} = {}",
                s.fields[*i],
                s.params[*alpha],
                s.render(c)
            );
        }
        match &self.structure {
            None => {}
            Some(c) if c.is_zero() => out.push_str("structure abelian\n"),
            Some(c) => {
                for ((g, a, b, mu, nu), e) in c.coeffs() {
                    let idx = if mu.is_empty() && nu.is_empty() {
                        String::new()
                    } else {
                        format!(" {} {}", bracket(mu, s), bracket(nu, s))
                    };
                    let _ = writeln!(
                        out,
                        "structure {} {} {}{idx} = {}",
                        s.params[*g],
                        s.params[*a],
                        s.params[*b],
                        s.render(e)
                    );
                }
            }
        }
        for sol in &self.solutions {
            let entries: Vec<String> = sol
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{} = {}", s.fields[i], s.render(v)))
                .collect();
            let _ = writeln!(out, "solution {} {{ {} }}", sol.name, entries.join(", "));
        }
        out
    }
}

fn bracket(mi: &MultiIndex, s: &Schema) -> String {
    format!("[{}]", render_jet(mi, s).trim_start_matches("_[").trim_end_matches(']'))
}

pub fn parse_theory(text: &str) -> Result<TheoryDocument, DslError> {
    let statements = Parser::new(lex(text)?).statements()?;
    resolve_theory(statements)
}

/// Parses and validates in one step.
pub fn load_theory(text: &str) -> Result<Theory, DslError> {
    Ok(parse_theory(text)?.to_theory()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockKind {
    Symmetry,
    Parameter,
    Current,
}

impl BlockKind {
    fn keyword(self) -> &'static str {
        match self {
            BlockKind::Symmetry => "symmetry",
            BlockKind::Parameter => "parameter",
            BlockKind::Current => "current",
        }
    }
}

/// One `keyword name { key = expr, ... }` block of a side file. Values are
/// indexed by field (symmetry), gauge parameter (parameter) or coordinate
/// (current); omitted keys are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideBlock {
    pub kind: BlockKind,
    pub name: String,
    pub values: Vec<Expr>,
}

pub fn parse_side_file(text: &str, schema: &Schema) -> Result<Vec<SideBlock>, DslError> {
    let mut p = Parser::new(lex(text)?);
    let mut out: Vec<SideBlock> = Vec::new();
    let mut seen = BTreeSet::new();
    loop {
        p.skip_newlines();
        if p.at_eof() {
            break;
        }
        let (kw, line, col) = p.ident(&["`symmetry`", "`parameter`", "`current`"])?;
        let kind = match kw.as_str() {
            "symmetry" => BlockKind::Symmetry,
            "parameter" => BlockKind::Parameter,
            "current" => BlockKind::Current,
            _ => {
                return Err(DslError::Syntax {
                    line,
                    col,
                    message: format!("unknown block keyword `{kw}`"),
                    expected: vec!["`symmetry`".into(), "`parameter`".into(), "`current`".into()],
                })
            }
        };
        let (name, nl, nc) = p.ident(&["block name"])?;
        if !seen.insert((kind, name.clone())) {
            return Err(semantic(nl, nc, format!("duplicate {} `{name}`", kind.keyword())));
        }
        let entries = p.braced_entries()?;
        let keys: Vec<String> = match kind {
            BlockKind::Symmetry => schema.fields.clone(),
            BlockKind::Parameter => schema.params.clone(),
            BlockKind::Current => schema.space.coord_names().to_vec(),
        };
        let mut values = vec![Expr::zero(); keys.len()];
        let mut assigned = BTreeSet::new();
        for (key, kl, kc, ast) in entries {
            let Some(idx) = keys.iter().position(|k| *k == key) else {
                return Err(semantic(
                    kl,
                    kc,
                    format!("`{key}` is not a valid key for a {} block", kind.keyword()),
                ));
            };
            if !assigned.insert(idx) {
                return Err(semantic(kl, kc, format!("`{key}` assigned twice")));
            }
            values[idx] = ast.resolve(schema)?;
        }
        out.push(SideBlock { kind, name, values });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Syntax tree

#[derive(Clone, Debug)]
enum Ast {
    Num(BigRational),
    Ident {
        name: String,
        jet: Option<String>,
        line: usize,
        col: usize,
    },
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, u32),
}

impl Ast {
    fn resolve(&self, s: &Schema) -> Result<Expr, DslError> {
        Ok(match self {
            Ast::Num(c) => Expr::constant(c.clone()),
            Ast::Ident { name, jet, line, col } => Expr::gen(resolve_ident(name, jet.as_deref(), s, *line, *col)?),
            Ast::Add(a, b) => a.resolve(s)? + b.resolve(s)?,
            Ast::Sub(a, b) => a.resolve(s)? - b.resolve(s)?,
            Ast::Mul(a, b) => a.resolve(s)? * b.resolve(s)?,
            Ast::Neg(a) => -a.resolve(s)?,
            Ast::Pow(a, n) => a.resolve(s)?.pow(*n),
        })
    }
}

fn resolve_ident(name: &str, jet: Option<&str>, s: &Schema, line: usize, col: usize) -> Result<Generator, DslError> {
    let mi = match jet {
        Some(j) => parse_multi_index(j, s).map_err(|m| semantic(line, col, m))?,
        None => MultiIndex::empty(),
    };
    let field = |n: &str| s.fields.iter().position(|f| f == n);
    let param = |n: &str| s.params.iter().position(|p| p == n);
    let no_jet = |g: Generator| {
        if jet.is_some() {
            Err(semantic(line, col, format!("`{name}` cannot carry a jet suffix")))
        } else {
            Ok(g)
        }
    };
    if let Some((prefix, rest)) = name.split_once('.') {
        let found = match prefix {
            "gh" => param(rest).map(|a| Var::ghost(a).jet(mi)),
            "af" => field(rest).map(|i| Var::field_antifield(i).jet(mi)),
            "ag" => param(rest).map(|a| Var::ghost_antifield(a).jet(mi)),
            "dx" => match s.space.coord_index(rest) {
                Some(mu) => return no_jet(Generator::basis_form(mu)),
                None => None,
            },
            _ => return Err(semantic(line, col, format!("unknown prefix `{prefix}.`"))),
        };
        return found.ok_or_else(|| semantic(line, col, format!("unknown identifier `{name}`")));
    }
    if let Some(mu) = s.space.coord_index(name) {
        return no_jet(Generator::coordinate(mu));
    }
    if let Some(i) = field(name) {
        return Ok(Var::field(i).jet(mi));
    }
    if param(name).is_some() {
        return Err(semantic(
            line,
            col,
            format!("gauge parameter `{name}` is not a local variable; its ghost is `gh.{name}`"),
        ));
    }
    Err(semantic(line, col, format!("unknown identifier `{name}`")))
}

/// Jet suffix contents: comma-separated coordinate names, or one character
/// per index when every coordinate name is a single character. A decimal
/// entry that names no coordinate is read as a coordinate position.
fn parse_multi_index(content: &str, s: &Schema) -> Result<MultiIndex, String> {
    let content = content.trim();
    if content.is_empty() {
        return Ok(MultiIndex::empty());
    }
    let compact = s.space.coord_names().iter().all(|c| c.chars().count() == 1);
    let pieces: Vec<String> = if content.contains(',') {
        content.split(',').map(|p| p.trim().to_string()).collect()
    } else if compact {
        content
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect()
    } else {
        vec![content.to_string()]
    };
    let mut entries = Vec::with_capacity(pieces.len());
    for p in &pieces {
        let mu = s
            .space
            .coord_index(p)
            .or_else(|| p.parse::<usize>().ok().filter(|&m| m < s.dim()))
            .ok_or_else(|| format!("unknown coordinate `{p}` in multi-index"))?;
        entries.push(mu);
    }
    if entries.len() > u8::MAX as usize {
        return Err("multi-index too long".into());
    }
    Ok(MultiIndex::from_entries(&entries))
}

#[derive(Debug)]
struct Positioned<T> {
    value: T,
    line: usize,
    col: usize,
}

#[derive(Debug)]
enum Statement {
    Space {
        dim: usize,
        coords: Vec<String>,
    },
    Field(String),
    Param(String),
    Lagrangian(Ast),
    Generator {
        field: String,
        param: String,
        mi: Option<String>,
        coeff: Ast,
    },
    Structure {
        names: [String; 3],
        indices: Option<(String, String)>,
        coeff: Ast,
    },
    Abelian,
    Solution {
        name: String,
        entries: Vec<(String, usize, usize, Ast)>,
    },
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const STATEMENT_KEYWORDS: [&str; 7] = [
    "`space`",
    "`field`",
    "`param`",
    "`lagrangian`",
    "`generator`",
    "`structure`",
    "`solution`",
];

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    fn error(&self, expected: &[&str]) -> DslError {
        let t = self.peek();
        DslError::Syntax {
            line: t.line,
            col: t.col,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn ident(&mut self, expected: &[&str]) -> Result<(String, usize, usize), DslError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, t.line, t.col))
            }
            _ => Err(self.error(expected)),
        }
    }

    fn sym(&mut self, c: char) -> Result<(), DslError> {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn end_of_statement(&mut self) -> Result<(), DslError> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            Tok::Sym('/') => {
                let t = self.peek();
                Err(DslError::Syntax {
                    line: t.line,
                    col: t.col,
                    message: "division is not an operator; rationals are literals such as `1/2`".into(),
                    expected: vec!["`+`".into(), "`-`".into(), "`*`".into(), "end of line".into()],
                })
            }
            _ => Err(self.error(&["`+`", "`-`", "`*`", "end of line"])),
        }
    }

    fn statements(&mut self) -> Result<Vec<Positioned<Statement>>, DslError> {
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_eof() {
                return Ok(out);
            }
            let (kw, line, col) = self.ident(&STATEMENT_KEYWORDS)?;
            let value = match kw.as_str() {
                "space" => self.space()?,
                "field" => Statement::Field(self.ident(&["field name"])?.0),
                "param" => Statement::Param(self.ident(&["parameter name"])?.0),
                "lagrangian" => Statement::Lagrangian(self.expr()?),
                "generator" => {
                    let field = self.ident(&["field name"])?.0;
                    let param = self.ident(&["parameter name"])?.0;
                    let mi = self.optional_bracket();
                    self.sym('=')?;
                    Statement::Generator {
                        field,
                        param,
                        mi,
                        coeff: self.expr()?,
                    }
                }
                "structure" => self.structure()?,
                "solution" => {
                    let name = self.ident(&["solution name"])?.0;
                    Statement::Solution {
                        name,
                        entries: self.braced_entries()?,
                    }
                }
                _ => {
                    return Err(DslError::Syntax {
                        line,
                        col,
                        message: format!("unknown statement `{kw}`"),
                        expected: STATEMENT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
                    })
                }
            };
            self.end_of_statement()?;
            out.push(Positioned { value, line, col });
        }
    }

    fn space(&mut self) -> Result<Statement, DslError> {
        let mut dim = None;
        let mut coords = None;
        while let Tok::Ident(key) = &self.peek().tok {
            let key = key.clone();
            let t = self.bump();
            self.sym('=')?;
            match key.as_str() {
                "dim" => match self.bump().tok {
                    Tok::Number(n) => dim = Some(n.to_usize().unwrap_or(usize::MAX)),
                    _ => {
                        self.pos -= 1;
                        return Err(self.error(&["number"]));
                    }
                },
                "coords" => {
                    let mut names = vec![self.ident(&["coordinate name"])?.0];
                    while self.peek().tok == Tok::Sym(',') {
                        self.bump();
                        names.push(self.ident(&["coordinate name"])?.0);
                    }
                    coords = Some(names);
                }
                _ => return Err(semantic(t.line, t.col, format!("unknown space attribute `{key}`"))),
            }
        }
        let t = self.peek().clone();
        let coords = coords.ok_or_else(|| semantic(t.line, t.col, "space declaration needs `coords=`"))?;
        Ok(Statement::Space {
            dim: dim.unwrap_or(coords.len()),
            coords,
        })
    }

    fn optional_bracket(&mut self) -> Option<String> {
        if let Tok::Bracket(s) = &self.peek().tok {
            let s = s.clone();
            self.bump();
            Some(s)
        } else {
            None
        }
    }

    fn structure(&mut self) -> Result<Statement, DslError> {
        let (first, ..) = self.ident(&["`abelian`", "parameter name"])?;
        if first == "abelian" && !matches!(self.peek().tok, Tok::Ident(_)) {
            return Ok(Statement::Abelian);
        }
        let second = self.ident(&["parameter name"])?.0;
        let third = self.ident(&["parameter name"])?.0;
        let indices = match self.optional_bracket() {
            Some(mu) => match self.optional_bracket() {
                Some(nu) => Some((mu, nu)),
                None => return Err(self.error(&["second multi-index"])),
            },
            None => None,
        };
        self.sym('=')?;
        Ok(Statement::Structure {
            names: [first, second, third],
            indices,
            coeff: self.expr()?,
        })
    }

    /// `{ key = expr (, | newline) ... }`
    fn braced_entries(&mut self) -> Result<Vec<(String, usize, usize, Ast)>, DslError> {
        self.sym('{')?;
        let mut out = Vec::new();
        loop {
            while matches!(self.peek().tok, Tok::Newline | Tok::Sym(',')) {
                self.bump();
            }
            if self.peek().tok == Tok::Sym('}') {
                self.bump();
                return Ok(out);
            }
            let (key, line, col) = self.ident(&["key", "`}`"])?;
            self.sym('=')?;
            let e = self.expr()?;
            if !matches!(self.peek().tok, Tok::Newline | Tok::Sym(',') | Tok::Sym('}')) {
                return Err(self.error(&["`+`", "`-`", "`*`", "`,`", "`}`", "end of line"]));
            }
            out.push((key, line, col, e));
        }
    }

    fn expr(&mut self) -> Result<Ast, DslError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.bump();
                    acc = Ast::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = Ast::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, DslError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Sym('*') {
            self.bump();
            acc = Ast::Mul(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Ast, DslError> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.bump();
            let t = self.peek().clone();
            return match t.tok {
                Tok::Number(n) => {
                    self.bump();
                    let e = n
                        .to_u32()
                        .ok_or_else(|| semantic(t.line, t.col, "exponent too large"))?;
                    Ok(Ast::Pow(Box::new(base), e))
                }
                _ => Err(self.error(&["non-negative integer exponent"])),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, DslError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number(n) => {
                self.bump();
                if self.peek().tok != Tok::Sym('/') {
                    return Ok(Ast::Num(BigRational::from_integer(n)));
                }
                self.bump();
                match self.peek().tok.clone() {
                    Tok::Number(d) if !d.is_zero() => {
                        self.bump();
                        Ok(Ast::Num(Coeff::new(n, d)))
                    }
                    Tok::Number(_) => Err(semantic(t.line, t.col, "zero denominator")),
                    _ => Err(self.error(&["denominator"])),
                }
            }
            Tok::Ident(name) => {
                self.bump();
                let jet = match &self.peek().tok {
                    Tok::Jet(j) => {
                        let j = j.clone();
                        self.bump();
                        Some(j)
                    }
                    _ => None,
                };
                Ok(Ast::Ident {
                    name,
                    jet,
                    line: t.line,
                    col: t.col,
                })
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.sym(')')?;
                Ok(e)
            }
            _ => Err(self.error(&["number", "identifier", "`(`", "`-`"])),
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution against the declared schema

fn resolve_theory(statements: Vec<Positioned<Statement>>) -> Result<TheoryDocument, DslError> {
    let mut space: Option<SpaceSpec> = None;
    let mut fields: Vec<String> = Vec::new();
    let mut params: Vec<String> = Vec::new();
    let mut names: BTreeSet<String> = BTreeSet::new();

    let declare = |n: &str, line, col, names: &mut BTreeSet<String>| {
        if n.contains('.') {
            return Err(semantic(line, col, format!("name `{n}` may not contain `.`")));
        }
        if !names.insert(n.to_string()) {
            return Err(semantic(line, col, format!("name `{n}` declared twice")));
        }
        Ok(())
    };

    for st in &statements {
        let (line, col) = (st.line, st.col);
        match &st.value {
            Statement::Space { dim, coords } => {
                if space.is_some() {
                    return Err(semantic(line, col, "duplicate space declaration"));
                }
                if *dim != coords.len() {
                    return Err(semantic(
                        line,
                        col,
                        format!("dim={dim} but {} coordinates named", coords.len()),
                    ));
                }
                for c in coords {
                    declare(c, line, col, &mut names)?;
                }
                space = Some(SpaceSpec::new(coords.clone()).map_err(|e| semantic(line, col, e.to_string()))?);
            }
            Statement::Field(f) => {
                declare(f, line, col, &mut names)?;
                fields.push(f.clone());
            }
            Statement::Param(p) => {
                declare(p, line, col, &mut names)?;
                params.push(p.clone());
            }
            _ => {}
        }
    }
    let space = space.ok_or(DslError::MissingSpace)?;
    let schema = Schema::new(space, fields, params);
    let n = schema.fields.len();
    let m = schema.params.len();

    let lookup = |list: &[String], what: &str, name: &str, line, col| {
        list.iter()
            .position(|x| x == name)
            .ok_or_else(|| semantic(line, col, format!("unknown {what} `{name}`")))
    };

    let mut lagrangian = None;
    let mut generators = TotalDiffOp::zero(IndexRange::fields(n), IndexRange::params(m));
    let mut structure: Option<BiDiffOp> = None;
    let mut abelian = false;
    let mut solutions = Vec::new();

    for st in statements {
        let (line, col) = (st.line, st.col);
        match st.value {
            Statement::Lagrangian(ast) => {
                if lagrangian.is_some() {
                    return Err(semantic(line, col, "duplicate lagrangian declaration"));
                }
                lagrangian = Some(ast.resolve(&schema)?);
            }
            Statement::Generator {
                field,
                param,
                mi,
                coeff,
            } => {
                let i = lookup(&schema.fields, "field", &field, line, col)?;
                let a = lookup(&schema.params, "gauge parameter", &param, line, col)?;
                let mi = parse_multi_index(mi.as_deref().unwrap_or(""), &schema).map_err(|e| semantic(line, col, e))?;
                generators.add_coeff(i, a, mi, coeff.resolve(&schema)?);
            }
            Statement::Structure { names, indices, coeff } => {
                if abelian {
                    return Err(semantic(
                        line,
                        col,
                        "`structure abelian` cannot be combined with explicit entries",
                    ));
                }
                let mut idx = [0; 3];
                for (k, nm) in names.iter().enumerate() {
                    idx[k] = lookup(&schema.params, "gauge parameter", nm, line, col)?;
                }
                let (mu, nu) = match indices {
                    Some((mu, nu)) => (
                        parse_multi_index(&mu, &schema).map_err(|e| semantic(line, col, e))?,
                        parse_multi_index(&nu, &schema).map_err(|e| semantic(line, col, e))?,
                    ),
                    None => (MultiIndex::empty(), MultiIndex::empty()),
                };
                structure.get_or_insert_with(|| BiDiffOp::zero(m)).add_coeff(
                    idx[0],
                    idx[1],
                    idx[2],
                    mu,
                    nu,
                    coeff.resolve(&schema)?,
                );
            }
            Statement::Abelian => {
                if abelian || structure.is_some() {
                    return Err(semantic(line, col, "structure declared more than once"));
                }
                abelian = true;
                structure = Some(BiDiffOp::zero(m));
            }
            Statement::Solution { name, entries } => {
                if solutions.iter().any(|s: &NamedSolution| s.name == name) {
                    return Err(semantic(line, col, format!("duplicate solution `{name}`")));
                }
                let mut values: Vec<Option<Expr>> = vec![None; n];
                for (key, kl, kc, ast) in entries {
                    let i = lookup(&schema.fields, "field", &key, kl, kc)?;
                    if values[i].is_some() {
                        return Err(semantic(kl, kc, format!("`{key}` assigned twice")));
                    }
                    let v = ast.resolve(&schema)?;
                    if v.contains_kind(|g| g.kind != Kind::Coordinate) {
                        return Err(semantic(kl, kc, "solution values may only depend on coordinates"));
                    }
                    values[i] = Some(v);
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| {
                            semantic(
                                line,
                                col,
                                format!("solution `{name}` omits field `{}`", schema.fields[i]),
                            )
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                solutions.push(NamedSolution { name, values });
            }
            Statement::Space { .. } | Statement::Field(_) | Statement::Param(_) => {}
        }
    }
    let lagrangian = lagrangian.ok_or(DslError::MissingLagrangian)?;
    Ok(TheoryDocument {
        schema,
        lagrangian,
        generators,
        structure,
        solutions,
    })
}
