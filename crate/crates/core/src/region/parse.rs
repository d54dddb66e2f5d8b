//! Region description language.
//!
//! ```text
//! region { T=<num> <expr> }
//! <expr> := cylinder { t=[a,b] x=[c,d](,[e,f])* }
//!         | product { t={[a,b],...} x={[c,d],...} }
//!         | polygon { (t1,x1) (t2,x2) (t3,x3) ... }
//!         | charband { xi=[a,b](,...) } | charband { eta=[a,b](,...) }
//!         | raster { file="path.pgm" }
//!         | union { <expr>+ } | intersect { <expr>+ } | diff { <expr>+ }
//!         | complement { <expr> }
//! <num>  := sum of products of literals and `pi`, e.g. `3*pi/2`, `-2*pi/3`
//! ```
//!
//! `#` starts a comment running to the end of the line. Space arcs are
//! reduced modulo `2π`; polygons are translated by a multiple of `2π` so that
//! their first vertex lies in `[0, 2π)`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{
    clamp_time, pgm::read_pgm, CharCoord, CircleArc, Polygon, RasterLiteral, RegionExpr,
    SpacetimeRegion, TimeInterval,
};
use crate::error::{Error, Result, SourcePos};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: SourcePos,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut k, mut line, mut col) = (0usize, 1usize, 1usize);
    while k < chars.len() {
        let c = chars[k];
        let pos = SourcePos { line, column: col };
        let advance = |k: &mut usize, col: &mut usize, by: usize| {
            *k += by;
            *col += by;
        };
        if c == '\n' {
            k += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(&mut k, &mut col, 1);
        } else if c == '#' {
            while k < chars.len() && chars[k] != '\n' {
                k += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            col += k - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..k].iter().collect()),
                pos,
            });
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let save = k;
                k += 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                } else {
                    k = save;
                }
            }
            let s: String = chars[start..k].iter().collect();
            col += k - start;
            let v: f64 = s.parse().map_err(|_| Error::Syntax {
                pos,
                message: format!("malformed number '{s}'"),
            })?;
            out.push(Token {
                tok: Tok::Num(v),
                pos,
            });
        } else if c == '"' {
            let start = k + 1;
            k += 1;
            while k < chars.len() && chars[k] != '"' && chars[k] != '\n' {
                k += 1;
            }
            if k >= chars.len() || chars[k] != '"' {
                return Err(Error::Syntax {
                    pos,
                    message: "unterminated string".into(),
                });
            }
            let s: String = chars[start..k].iter().collect();
            k += 1;
            col += s.chars().count() + 2;
            out.push(Token {
                tok: Tok::Str(s),
                pos,
            });
        } else if "{}[](),=*/+-".contains(c) {
            advance(&mut k, &mut col, 1);
            out.push(Token {
                tok: Tok::Sym(c),
                pos,
            });
        } else {
            return Err(Error::Syntax {
                pos,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: SourcePos { line, column: col },
    });
    Ok(out)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(v) => format!("number {v}"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Eof => "end of input".into(),
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    k: usize,
    horizon: f64,
    base: Option<&'a Path>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.k]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.k].clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn syntax<T>(&self, pos: SourcePos, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos,
            message: message.into(),
        })
    }

    fn semantic<T>(&self, pos: SourcePos, message: impl Into<String>) -> Result<T> {
        Err(Error::Semantic {
            pos,
            message: message.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<SourcePos> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(t.pos)
        } else {
            self.syntax(t.pos, format!("expected '{c}', found {}", describe(&t.tok)))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, SourcePos)> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => self.syntax(t.pos, format!("expected a name, found {}", describe(&other))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<SourcePos> {
        let (s, pos) = self.expect_ident()?;
        if s == kw {
            Ok(pos)
        } else {
            self.syntax(pos, format!("expected '{kw}', found '{s}'"))
        }
    }

    fn at_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    /// `<num> := <term> (('+'|'-') <term>)*`
    fn number(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.at_sym('+') {
                self.next();
                v += self.term()?;
            } else if self.at_sym('-') {
                self.next();
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        loop {
            if self.at_sym('*') {
                self.next();
                v *= self.factor()?;
            } else if self.at_sym('/') {
                let pos = self.next().pos;
                let d = self.factor()?;
                if d == 0.0 {
                    return self.semantic(pos, "division by zero");
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64> {
        let t = self.next();
        match t.tok {
            Tok::Sym('-') => Ok(-self.factor()?),
            Tok::Sym('+') => self.factor(),
            Tok::Num(v) => Ok(v),
            Tok::Ident(ref s) if s == "pi" => Ok(std::f64::consts::PI),
            other => self.syntax(t.pos, format!("expected a number, found {}", describe(&other))),
        }
    }

    /// `[a, b]`
    fn pair(&mut self) -> Result<(f64, f64, SourcePos)> {
        let pos = self.expect_sym('[')?;
        let a = self.number()?;
        self.expect_sym(',')?;
        let b = self.number()?;
        self.expect_sym(']')?;
        Ok((a, b, pos))
    }

    fn arc(&mut self) -> Result<CircleArc> {
        let (a, b, pos) = self.pair()?;
        match CircleArc::new(a, b) {
            Some(arc) => Ok(arc),
            None => self.semantic(pos, format!("arc [{a}, {b}] must have end > start")),
        }
    }

    fn interval(&mut self) -> Result<TimeInterval> {
        let (a, b, pos) = self.pair()?;
        if b <= a {
            return self.semantic(pos, format!("time interval [{a}, {b}] must have end > start"));
        }
        match (clamp_time(a, self.horizon), clamp_time(b, self.horizon)) {
            (Some(lo), Some(hi)) => Ok(TimeInterval { lo, hi }),
            _ => self.semantic(
                pos,
                format!("time interval [{a}, {b}] lies outside [0, T] with T = {}", self.horizon),
            ),
        }
    }

    /// Comma-separated list of arcs (`[a,b], [c,d]`).
    fn arc_list(&mut self) -> Result<Vec<CircleArc>> {
        let mut arcs = vec![self.arc()?];
        while self.at_sym(',') {
            self.next();
            arcs.push(self.arc()?);
        }
        Ok(arcs)
    }

    /// Braced list of intervals or arcs (`{[a,b], [c,d]}`).
    fn braced<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect_sym('{')?;
        let mut out = vec![item(self)?];
        while self.at_sym(',') {
            self.next();
            out.push(item(self)?);
        }
        self.expect_sym('}')?;
        Ok(out)
    }

    /// Parses `key=` pairs inside a primitive body until `}`.
    fn keyed<F>(&mut self, allowed: &[&str], mut value: F) -> Result<Vec<(String, SourcePos)>>
    where
        F: FnMut(&mut Self, &str) -> Result<()>,
    {
        let mut seen: Vec<(String, SourcePos)> = Vec::new();
        while !self.at_sym('}') {
            let (key, pos) = self.expect_ident()?;
            if !allowed.contains(&key.as_str()) {
                return self.syntax(
                    pos,
                    format!("unknown key '{key}'; expected one of {}", allowed.join(", ")),
                );
            }
            if seen.iter().any(|(k, _)| *k == key) {
                return self.syntax(pos, format!("duplicate key '{key}'"));
            }
            self.expect_sym('=')?;
            value(self, &key)?;
            seen.push((key, pos));
        }
        Ok(seen)
    }

    fn require(&self, seen: &[(String, SourcePos)], key: &str, pos: SourcePos) -> Result<()> {
        if seen.iter().any(|(k, _)| k == key) {
            Ok(())
        } else {
            self.syntax(pos, format!("missing key '{key}'"))
        }
    }

    fn expr(&mut self) -> Result<RegionExpr> {
        let (name, pos) = self.expect_ident()?;
        self.expect_sym('{')?;
        let e = match name.as_str() {
            "cylinder" => {
                let mut time = None;
                let mut arcs = Vec::new();
                let seen = self.keyed(&["t", "x"], |p, key| {
                    if key == "t" {
                        time = Some(p.interval()?);
                    } else {
                        arcs = p.arc_list()?;
                    }
                    Ok(())
                })?;
                self.require(&seen, "t", pos)?;
                self.require(&seen, "x", pos)?;
                RegionExpr::Cylinder {
                    time: time.expect("checked"),
                    arcs,
                }
            }
            "product" => {
                let mut times = Vec::new();
                let mut arcs = Vec::new();
                let seen = self.keyed(&["t", "x"], |p, key| {
                    if key == "t" {
                        times = p.braced(Parser::interval)?;
                    } else {
                        arcs = p.braced(Parser::arc)?;
                    }
                    Ok(())
                })?;
                self.require(&seen, "t", pos)?;
                self.require(&seen, "x", pos)?;
                RegionExpr::Product { times, arcs }
            }
            "charband" => {
                let mut coord = CharCoord::Xi;
                let mut arcs = Vec::new();
                let seen = self.keyed(&["xi", "eta"], |p, key| {
                    coord = if key == "xi" {
                        CharCoord::Xi
                    } else {
                        CharCoord::Eta
                    };
                    arcs = p.arc_list()?;
                    Ok(())
                })?;
                if seen.len() != 1 {
                    return self.syntax(pos, "charband needs exactly one of 'xi' or 'eta'");
                }
                RegionExpr::CharBand { coord, arcs }
            }
            "polygon" => {
                let mut verts = Vec::new();
                while !self.at_sym('}') {
                    let vpos = self.expect_sym('(')?;
                    let t = self.number()?;
                    self.expect_sym(',')?;
                    let x = self.number()?;
                    self.expect_sym(')')?;
                    match clamp_time(t, self.horizon) {
                        Some(t) => verts.push((t, x)),
                        None => {
                            return self.semantic(
                                vpos,
                                format!("vertex time {t} lies outside [0, T] with T = {}", self.horizon),
                            )
                        }
                    }
                }
                if verts.len() < 3 {
                    return self.semantic(pos, "polygon needs at least 3 vertices");
                }
                match Polygon::new(verts) {
                    Some(p) => RegionExpr::Polygon(p),
                    None => return self.semantic(pos, "polygon is degenerate (zero area)"),
                }
            }
            "raster" => {
                let mut file = None;
                let mut file_pos = pos;
                let seen = self.keyed(&["file"], |p, _| {
                    let t = p.next();
                    match t.tok {
                        Tok::Str(s) => {
                            file = Some(s);
                            file_pos = t.pos;
                            Ok(())
                        }
                        other => p.syntax(t.pos, format!("expected a quoted path, found {}", describe(&other))),
                    }
                })?;
                self.require(&seen, "file", pos)?;
                let path = file.expect("checked");
                let full: PathBuf = match self.base {
                    Some(b) => b.join(&path),
                    None => PathBuf::from(&path),
                };
                let image = read_pgm(&full).map_err(|e| Error::Semantic {
                    pos: file_pos,
                    message: format!("cannot load raster: {e}"),
                })?;
                if image.width == 0 || image.height == 0 {
                    return self.semantic(file_pos, "raster is empty");
                }
                RegionExpr::Raster(RasterLiteral {
                    path,
                    image: Arc::new(image),
                })
            }
            "union" | "intersect" | "diff" | "complement" => {
                let mut children = Vec::new();
                while !self.at_sym('}') {
                    children.push(self.expr()?);
                }
                if children.is_empty() {
                    return self.syntax(pos, format!("'{name}' needs at least one operand"));
                }
                match name.as_str() {
                    "union" => RegionExpr::Union(children),
                    "intersect" => RegionExpr::Intersect(children),
                    "diff" => RegionExpr::Diff(children),
                    _ => {
                        if children.len() != 1 {
                            return self.syntax(pos, "'complement' takes exactly one operand");
                        }
                        RegionExpr::Complement(Box::new(children.pop().expect("one child")))
                    }
                }
            }
            other => {
                return self.syntax(pos, format!("unknown region kind '{other}'"));
            }
        };
        self.expect_sym('}')?;
        Ok(e)
    }
}

/// Parses region text; raster paths are resolved against the current
/// directory.
pub fn parse_region(text: &str) -> Result<SpacetimeRegion> {
    parse_with_base(text, None)
}

/// Parses region text; raster paths are resolved relative to `base`.
pub fn parse_region_in(text: &str, base: &Path) -> Result<SpacetimeRegion> {
    parse_with_base(text, Some(base))
}

fn parse_with_base(text: &str, base: Option<&Path>) -> Result<SpacetimeRegion> {
    let mut p = Parser {
        toks: lex(text)?,
        k: 0,
        horizon: 0.0,
        base,
    };
    p.expect_keyword("region")?;
    p.expect_sym('{')?;
    let tpos = p.expect_keyword("T")?;
    p.expect_sym('=')?;
    let horizon = p.number()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return p.semantic(tpos, "T must be positive");
    }
    p.horizon = horizon;
    let root = p.expr()?;
    p.expect_sym('}')?;
    let t = p.next();
    if t.tok != Tok::Eof {
        return p.syntax(t.pos, format!("unexpected {} after region", describe(&t.tok)));
    }
    Ok(SpacetimeRegion::new(horizon, root).expect("horizon checked"))
}

/// Normalized text form of a region. Numbers are printed so that parsing
/// the output reproduces the region exactly.
pub fn serialize_region(region: &SpacetimeRegion) -> String {
    let mut s = format!("region {{ T={}\n", region.horizon());
    write_expr(&mut s, region.root(), 1);
    s.push_str("}\n");
    s
}

fn arc_text(a: &CircleArc) -> String {
    format!("[{},{}]", a.start, a.end)
}

fn write_expr(s: &mut String, e: &RegionExpr, depth: usize) {
    let pad = "  ".repeat(depth);
    let list = |arcs: &[CircleArc]| arcs.iter().map(arc_text).collect::<Vec<_>>().join(",");
    match e {
        RegionExpr::Cylinder { time, arcs } => {
            s.push_str(&format!(
                "{pad}cylinder {{ t=[{},{}] x={} }}\n",
                time.lo,
                time.hi,
                list(arcs)
            ));
        }
        RegionExpr::Product { times, arcs } => {
            let ts = times
                .iter()
                .map(|i| format!("[{},{}]", i.lo, i.hi))
                .collect::<Vec<_>>()
                .join(",");
            s.push_str(&format!("{pad}product {{ t={{{ts}}} x={{{}}} }}\n", list(arcs)));
        }
        RegionExpr::Polygon(p) => {
            let vs = p
                .vertices()
                .iter()
                .map(|(t, x)| format!("({t},{x})"))
                .collect::<Vec<_>>()
                .join(" ");
            s.push_str(&format!("{pad}polygon {{ {vs} }}\n"));
        }
        RegionExpr::CharBand { coord, arcs } => {
            let key = match coord {
                CharCoord::Xi => "xi",
                CharCoord::Eta => "eta",
            };
            s.push_str(&format!("{pad}charband {{ {key}={} }}\n", list(arcs)));
        }
        RegionExpr::Raster(r) => {
            s.push_str(&format!("{pad}raster {{ file=\"{}\" }}\n", r.path));
        }
        RegionExpr::Union(c) | RegionExpr::Intersect(c) | RegionExpr::Diff(c) => {
            let name = match e {
                RegionExpr::Union(_) => "union",
                RegionExpr::Intersect(_) => "intersect",
                _ => "diff",
            };
            s.push_str(&format!("{pad}{name} {{\n"));
            for child in c {
                write_expr(s, child, depth + 1);
            }
            s.push_str(&format!("{pad}}}\n"));
        }
        RegionExpr::Complement(c) => {
            s.push_str(&format!("{pad}complement {{\n"));
            write_expr(s, c, depth + 1);
            s.push_str(&format!("{pad}}}\n"));
        }
    }
}
