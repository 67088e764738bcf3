//! QP text and JSON formats, and DOT export.
//!
//! Text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! vertices 1 2 3
//! arrow a 1 2
//! arrow b 2 3
//! arrow c 3 1
//! potential 1 c.b.a
//! truncation 6
//! ```
//!
//! Words are dot-separated arrow names with the leftmost arrow applied last.
//! Coefficients are integers or fractions `p/q`. `truncation` defaults to 6.
//! An optional `accuracy W` line records that only terms of length `<= W`
//! are known to be correct.

use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::field::Coeff;
use crate::ncseries::{split_word, ArrowId, GradedQuiver, Series};
use crate::qp::{Accuracy, Qp, QpError};

pub const DEFAULT_TRUNCATION: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Io,
    Syntax,
    Semantic,
}

/// A parse problem. `line` and `col` are 1-based; 0 means not applicable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Io => "io error",
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::Semantic => "semantic error",
        };
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.col)?;
        }
        write!(f, "{kind}: {}", self.message)?;
        if !self.token.is_empty() {
            write!(f, " (at `{}`)", self.token)?;
        }
        Ok(())
    }
}

/// Every problem found in one input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.diagnostics.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn single(kind: DiagnosticKind, line: usize, col: usize, message: impl Into<String>, token: impl Into<String>) -> Self {
        ParseError { diagnostics: vec![Diagnostic { kind, line, col, message: message.into(), token: token.into() }] }
    }
}

#[derive(Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

/// A potential term: position, coefficient text, value, and named word with columns.
type TermDecl<K> = (Pos, String, K, Vec<(usize, String)>);

/// Collects declarations from either format and builds the QP.
struct Builder<K> {
    quiver: GradedQuiver,
    terms: Vec<TermDecl<K>>,
    truncation: Option<(Pos, usize)>,
    accuracy: Option<usize>,
    diags: Vec<Diagnostic>,
}

impl<K: Coeff> Builder<K> {
    fn new() -> Self {
        Builder {
            quiver: GradedQuiver::new(Vec::<String>::new()).expect("empty quiver"),
            terms: Vec::new(),
            truncation: None,
            accuracy: None,
            diags: Vec::new(),
        }
    }

    fn err(&mut self, kind: DiagnosticKind, pos: Pos, message: impl Into<String>, token: &str) {
        self.diags.push(Diagnostic { kind, line: pos.line, col: pos.col, message: message.into(), token: token.to_string() });
    }

    fn vertex(&mut self, pos: Pos, name: &str) {
        if self.quiver.add_vertex(name).is_err() {
            self.err(DiagnosticKind::Semantic, pos, format!("duplicate vertex `{name}`"), name);
        }
    }

    fn arrow(&mut self, pos: [Pos; 3], name: &str, src: &str, dst: &str) {
        let mut ok = true;
        for (p, v) in [(pos[1], src), (pos[2], dst)] {
            if self.quiver.vertex_id(v).is_err() {
                self.err(DiagnosticKind::Semantic, p, format!("unknown vertex `{v}`"), v);
                ok = false;
            }
        }
        if ok && self.quiver.add_arrow_named(name, src, dst, 0).is_err() {
            self.err(DiagnosticKind::Semantic, pos[0], format!("duplicate arrow `{name}`"), name);
        }
    }

    /// `word` lists the arrow names with their column offsets.
    fn term(&mut self, pos: Pos, text: &str, coeff: K, word: Vec<(usize, String)>) {
        self.terms.push((pos, text.to_string(), coeff, word));
    }

    fn finish(mut self, last_line: usize) -> Result<Qp<K>, ParseError> {
        if self.quiver.vertex_count() == 0 {
            self.err(DiagnosticKind::Semantic, Pos { line: last_line.max(1), col: 1 }, "quiver must be non-empty", "");
        }
        let (tpos, n) = self.truncation.unwrap_or((Pos { line: 0, col: 0 }, DEFAULT_TRUNCATION));
        if n < 2 {
            self.err(DiagnosticKind::Semantic, tpos, format!("truncation order must be at least 2, got {n}"), &n.to_string());
        }
        let mut w = Series::zero(n.max(2));
        let terms = std::mem::take(&mut self.terms);
        for (pos, text, c, word) in terms {
            let mut ids: Vec<ArrowId> = Vec::new();
            let mut known = true;
            for (off, name) in &word {
                match self.quiver.arrow_id(name) {
                    Ok(a) => ids.push(a),
                    Err(_) => {
                        let p = Pos { line: pos.line, col: pos.col + off };
                        self.err(DiagnosticKind::Semantic, p, format!("unknown arrow `{name}`"), name);
                        known = false;
                    }
                }
            }
            if !known {
                continue;
            }
            let path = match self.quiver.path(&ids) {
                Ok(p) => p,
                Err(_) => {
                    self.err(DiagnosticKind::Semantic, pos, "word not composable", &text);
                    continue;
                }
            };
            if !path.is_cycle() {
                self.err(DiagnosticKind::Semantic, pos, "term is not a cycle", &text);
                continue;
            }
            if path.len() < 2 {
                self.err(DiagnosticKind::Semantic, pos, "potential is not in m^2: term of length 1", &text);
                continue;
            }
            w.add_term(path, c);
        }
        if !self.diags.is_empty() {
            return Err(ParseError { diagnostics: self.diags });
        }
        let q = Qp::new(self.quiver, w, n).map_err(|e| qp_error(e, tpos))?;
        Ok(match self.accuracy {
            Some(a) => q.with_accuracy(Accuracy::UpTo(a)),
            None => q,
        })
    }
}

fn qp_error(e: QpError, pos: Pos) -> ParseError {
    ParseError::single(DiagnosticKind::Semantic, pos.line, pos.col, e.to_string(), "")
}

/// Whitespace-separated tokens with their 1-based columns (in characters).
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((col + 1, byte)),
            (true, Some((c, b))) => {
                out.push((c, &line[b..byte]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((c, b)) = start {
        out.push((c, &line[b..]));
    }
    out
}

/// Parses the QP text format. Never panics; all problems are reported
/// together.
pub fn parse_qp<K: Coeff>(text: &str) -> Result<Qp<K>, ParseError> {
    let mut b: Builder<K> = Builder::new();
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(c0, head)) = toks.first() else { continue };
        let at = |c: usize| Pos { line: line_no, col: c };
        let args = &toks[1..];
        let expect = |b: &mut Builder<K>, n: usize, usage: &str| -> bool {
            if args.len() == n {
                return true;
            }
            let (c, t) = args.get(n).copied().unwrap_or((c0, head));
            b.err(DiagnosticKind::Syntax, at(c), format!("expected `{usage}`"), t);
            false
        };
        match head {
            "vertices" => {
                if args.is_empty() {
                    b.err(DiagnosticKind::Syntax, at(c0), "expected `vertices NAME...`", head);
                }
                for &(c, name) in args {
                    b.vertex(at(c), name);
                }
            }
            "arrow" => {
                if expect(&mut b, 3, "arrow NAME SOURCE TARGET") {
                    b.arrow([at(args[0].0), at(args[1].0), at(args[2].0)], args[0].1, args[1].1, args[2].1);
                }
            }
            "potential" => {
                if !expect(&mut b, 2, "potential COEFF WORD") {
                    continue;
                }
                let (cc, ctok) = args[0];
                let Some(coeff) = K::parse(ctok) else {
                    b.err(DiagnosticKind::Syntax, at(cc), "coefficient must be an integer or a fraction p/q", ctok);
                    continue;
                };
                let (wc, wtok) = args[1];
                let mut word = Vec::new();
                let mut off = 0;
                let mut bad = false;
                for part in split_word(wtok) {
                    if part.is_empty() {
                        b.err(DiagnosticKind::Syntax, at(wc + off), "empty arrow name in word", wtok);
                        bad = true;
                        break;
                    }
                    word.push((off, part.to_string()));
                    off += part.chars().count() + 1;
                }
                if !bad && !coeff.is_zero() {
                    b.term(at(wc), wtok, coeff, word);
                }
            }
            "truncation" | "accuracy" => {
                if !expect(&mut b, 1, &format!("{head} N")) {
                    continue;
                }
                let (c, t) = args[0];
                let Ok(n) = t.parse::<usize>() else {
                    b.err(DiagnosticKind::Syntax, at(c), format!("{head} must be a non-negative integer"), t);
                    continue;
                };
                if head == "truncation" {
                    b.truncation = Some((at(c), n));
                } else {
                    b.accuracy = Some(n);
                }
            }
            other => b.err(DiagnosticKind::Syntax, at(c0), format!("unknown directive `{other}`"), other),
        }
    }
    b.finish(last_line)
}

/// Reads and parses a QP file, in the text format or (when the content starts
/// with `{`) the JSON format.
pub fn parse_qp_file<K: Coeff>(path: impl AsRef<FsPath>) -> Result<Qp<K>, ParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseError::single(DiagnosticKind::Io, 0, 0, format!("cannot read {}: {e}", path.display()), ""))?;
    parse_any(&text)
}

/// Dispatches on the first non-blank character: JSON for `{`, text otherwise.
pub fn parse_any<K: Coeff>(text: &str) -> Result<Qp<K>, ParseError> {
    if text.trim_start().starts_with('{') {
        from_json(text)
    } else {
        parse_qp(text)
    }
}

/// Prints a QP in the text format. `parse_qp(&print_qp(q)) == q`.
pub fn print_qp<K: Coeff>(q: &Qp<K>) -> String {
    let quiver = q.quiver();
    let mut s = String::new();
    s.push_str("vertices");
    for v in quiver.vertex_names() {
        s.push(' ');
        s.push_str(v);
    }
    s.push('\n');
    for a in quiver.arrows() {
        s.push_str(&format!("arrow {} {} {}\n", a.name, quiver.vertex_name(a.source), quiver.vertex_name(a.target)));
    }
    for (p, c) in q.potential().terms() {
        s.push_str(&format!("potential {c} {}\n", quiver.path_name(p)));
    }
    s.push_str(&format!("truncation {}\n", q.truncation()));
    if let Accuracy::UpTo(w) = q.accuracy() {
        s.push_str(&format!("accuracy {w}\n"));
    }
    s
}

/// A coefficient in JSON: an integer, or a string holding an integer or `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Int(i64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowJson {
    pub name: String,
    pub src: String,
    pub dst: String,
    #[serde(default)]
    pub deg: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: CoeffJson,
    pub word: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpJson {
    pub vertices: Vec<String>,
    pub arrows: Vec<ArrowJson>,
    #[serde(default)]
    pub potential: Vec<TermJson>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<usize>,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

fn coeff_json<K: Coeff>(c: &K) -> CoeffJson {
    let s = c.to_string();
    match s.parse::<i64>() {
        Ok(n) => CoeffJson::Int(n),
        Err(_) => CoeffJson::Text(s),
    }
}

pub fn quiver_json(quiver: &GradedQuiver) -> (Vec<String>, Vec<ArrowJson>) {
    let arrows = quiver
        .arrows()
        .iter()
        .map(|a| ArrowJson {
            name: a.name.clone(),
            src: quiver.vertex_name(a.source).to_string(),
            dst: quiver.vertex_name(a.target).to_string(),
            deg: a.degree,
        })
        .collect();
    (quiver.vertex_names().to_vec(), arrows)
}

pub fn series_json<K: Coeff>(quiver: &GradedQuiver, s: &Series<K>) -> Vec<TermJson> {
    s.terms()
        .map(|(p, c)| TermJson {
            coeff: coeff_json(c),
            word: p.word().iter().map(|&a| quiver.arrow(a).name.clone()).collect(),
        })
        .collect()
}

pub fn to_json_value<K: Coeff>(q: &Qp<K>) -> QpJson {
    let (vertices, arrows) = quiver_json(q.quiver());
    QpJson {
        vertices,
        arrows,
        potential: series_json(q.quiver(), q.potential()),
        truncation: q.truncation(),
        accuracy: match q.accuracy() {
            Accuracy::Exact => None,
            Accuracy::UpTo(w) => Some(w),
        },
    }
}

pub fn to_json<K: Coeff>(q: &Qp<K>) -> String {
    serde_json::to_string_pretty(&to_json_value(q)).expect("plain data serializes")
}

/// Builds a QP from its JSON description. Semantic diagnostics carry the
/// offending element as token and no position.
pub fn from_json_value<K: Coeff>(v: &QpJson) -> Result<Qp<K>, ParseError> {
    let none = Pos { line: 0, col: 0 };
    let mut b: Builder<K> = Builder::new();
    for name in &v.vertices {
        b.vertex(none, name);
    }
    for a in &v.arrows {
        if a.deg != 0 {
            b.err(DiagnosticKind::Semantic, none, format!("arrow `{}` has nonzero degree", a.name), &a.name);
            continue;
        }
        b.arrow([none; 3], &a.name, &a.src, &a.dst);
    }
    for t in &v.potential {
        let text = match &t.coeff {
            CoeffJson::Int(n) => n.to_string(),
            CoeffJson::Text(s) => s.clone(),
        };
        let Some(c) = K::parse(&text) else {
            b.err(DiagnosticKind::Syntax, none, "coefficient must be an integer or a fraction p/q", &text);
            continue;
        };
        if t.word.is_empty() {
            b.err(DiagnosticKind::Syntax, none, "empty word", "");
            continue;
        }
        if !c.is_zero() {
            b.term(none, &t.word.join("."), c, t.word.iter().map(|w| (0, w.clone())).collect());
        }
    }
    b.truncation = Some((none, v.truncation));
    b.accuracy = v.accuracy;
    b.finish(0)
}

pub fn from_json<K: Coeff>(text: &str) -> Result<Qp<K>, ParseError> {
    let v: QpJson = serde_json::from_str(text)
        .map_err(|e| ParseError::single(DiagnosticKind::Syntax, e.line(), e.column(), e.to_string(), ""))?;
    from_json_value(&v)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with one node per vertex and one edge per arrow labelled by
/// its name. Degrees are shown when nonzero, or always with `show_degrees`.
pub fn quiver_to_dot(quiver: &GradedQuiver, graph_name: &str, show_degrees: bool) -> String {
    let mut s = format!("digraph {} {{\n", dot_quote(graph_name));
    for v in quiver.vertex_names() {
        s.push_str(&format!("  {};\n", dot_quote(v)));
    }
    for a in quiver.arrows() {
        let label = if show_degrees || a.degree != 0 { format!("{} ({})", a.name, a.degree) } else { a.name.clone() };
        let style = match a.degree {
            0 => "",
            -1 => ", color=\"blue\"",
            _ => ", color=\"red\"",
        };
        s.push_str(&format!(
            "  {} -> {} [label={}{style}];\n",
            dot_quote(quiver.vertex_name(a.source)),
            dot_quote(quiver.vertex_name(a.target)),
            dot_quote(&label)
        ));
    }
    s.push_str("}\n");
    s
}

pub fn qp_to_dot<K: Coeff>(q: &Qp<K>) -> String {
    quiver_to_dot(q.quiver(), "Q", false)
}
