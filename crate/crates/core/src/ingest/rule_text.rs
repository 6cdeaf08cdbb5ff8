//! Textual rule format.
//!
//! ```text
//! rule    := "IF" premise? "THEN" ident "=" value
//! premise := clause ("AND" clause)*
//! clause  := range | cmp | member
//! range   := number rel ident rel number          rel := "<" | "<="
//! cmp     := ident ("<=" | "<" | ">=" | ">" | "=") value
//! member  := ident "IN" "{" value ("," value)* "}"
//! value   := ident | quoted-string | number
//! ```
//!
//! Feature names that are not plain identifiers may be written as quoted
//! strings. Quoted strings accept the escapes `\"` and `\\` only.

use std::fmt;

use thiserror::Error;

use crate::model::{
    Bound, DatasetSchema, FeatureKind, NumericInterval, Predicate, PredicateBody, Rule,
};

const KEYWORDS: [&str; 4] = ["IF", "THEN", "AND", "IN"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleText(pub String);

impl RuleText {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RuleText {
    fn from(s: &str) -> Self {
        RuleText(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown feature `{feature}`")]
    UnknownFeature {
        line: usize,
        column: usize,
        feature: String,
    },
    #[error("{line}:{column}: `{feature}` is {actual}, not {expected}")]
    KindMismatch {
        line: usize,
        column: usize,
        feature: String,
        expected: FeatureKind,
        actual: FeatureKind,
    },
    #[error("{line}:{column}: rule concludes on `{found}`, schema target is `{expected}`")]
    TargetMismatch {
        line: usize,
        column: usize,
        found: String,
        expected: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number(String),
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    LBrace,
    RBrace,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self, Tok::Ident(s) if s == kw)
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> RuleParseError {
    RuleParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(source: &str) -> Result<Vec<Spanned>, RuleParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let (start_line, start_col) = (line, column);
        let start = i;
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                if !chars.get(i + 1).is_some_and(char::is_ascii_digit) {
                    return Err(syntax(
                        line,
                        column + (i - start),
                        "expected digits after `.`",
                    ));
                }
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && is_ident_continue(chars[i]) {
                return Err(syntax(line, column + (i - start), "malformed number"));
            }
            Tok::Number(chars[start..i].iter().collect())
        } else if c == '"' {
            i += 1;
            let mut text = String::new();
            let (mut l, mut col) = (line, column + 1);
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(syntax(start_line, start_col, "unterminated string"));
                };
                i += 1;
                match ch {
                    '"' => {
                        col += 1;
                        break;
                    }
                    '\\' => {
                        match chars.get(i) {
                            Some('"') => text.push('"'),
                            Some('\\') => text.push('\\'),
                            _ => return Err(syntax(l, col, "invalid escape in string")),
                        }
                        i += 1;
                        col += 2;
                    }
                    '\n' => {
                        text.push('\n');
                        l += 1;
                        col = 1;
                    }
                    other => {
                        text.push(other);
                        col += 1;
                    }
                }
            }
            out.push(Spanned {
                tok: Tok::Str(text),
                line: start_line,
                column: start_col,
            });
            line = l;
            column = col;
            continue;
        } else {
            let next = chars.get(i + 1).copied();
            i += 1;
            match (c, next) {
                ('<', Some('=')) => {
                    i += 1;
                    Tok::Le
                }
                ('>', Some('=')) => {
                    i += 1;
                    Tok::Ge
                }
                ('<', _) => Tok::Lt,
                ('>', _) => Tok::Gt,
                ('=', _) => Tok::Eq,
                ('{', _) => Tok::LBrace,
                ('}', _) => Tok::RBrace,
                (',', _) => Tok::Comma,
                (other, _) => {
                    return Err(syntax(
                        line,
                        column,
                        format!("unexpected character {other:?}"),
                    ))
                }
            }
        };
        column += i - start;
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    schema: &'a DatasetSchema,
}

impl Parser<'_> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> RuleParseError {
        let t = self.peek();
        syntax(
            t.line,
            t.column,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn keyword(&mut self, kw: &str) -> Result<(), RuleParseError> {
        if self.peek().tok.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn name(&mut self) -> Result<Spanned, RuleParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(self.bump()),
            Tok::Str(_) => Ok(self.bump()),
            _ => Err(self.unexpected("a feature name")),
        }
    }

    fn value(&mut self) -> Result<String, RuleParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            Tok::Str(s) | Tok::Number(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    fn number(&mut self) -> Result<f64, RuleParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(s) => {
                self.bump();
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| syntax(t.line, t.column, format!("number `{s}` out of range")))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn rel_upper(&mut self) -> Result<bool, RuleParseError> {
        match self.peek().tok {
            Tok::Lt => {
                self.bump();
                Ok(true)
            }
            Tok::Le => {
                self.bump();
                Ok(false)
            }
            _ => Err(self.unexpected("`<` or `<=`")),
        }
    }

    fn feature_kind(&self, name: &Spanned) -> Result<(String, FeatureKind), RuleParseError> {
        let text = match &name.tok {
            Tok::Ident(s) | Tok::Str(s) => s.clone(),
            _ => unreachable!("name() only yields identifiers and strings"),
        };
        match self.schema.feature(&text) {
            Some(spec) => Ok((text, spec.kind())),
            None => Err(RuleParseError::UnknownFeature {
                line: name.line,
                column: name.column,
                feature: text,
            }),
        }
    }

    fn expect_kind(
        name: &Spanned,
        feature: &str,
        actual: FeatureKind,
        expected: FeatureKind,
    ) -> Result<(), RuleParseError> {
        if actual == expected {
            Ok(())
        } else {
            Err(RuleParseError::KindMismatch {
                line: name.line,
                column: name.column,
                feature: feature.to_owned(),
                expected,
                actual,
            })
        }
    }

    fn clause(&mut self) -> Result<Predicate, RuleParseError> {
        if matches!(self.peek().tok, Tok::Number(_)) {
            let lo = self.number()?;
            let lo_open = self.rel_upper()?;
            let name = self.name()?;
            let hi_open = self.rel_upper()?;
            let hi = self.number()?;
            let (feature, kind) = self.feature_kind(&name)?;
            Self::expect_kind(&name, &feature, kind, FeatureKind::Numerical)?;
            return Ok(Predicate::interval(
                feature,
                NumericInterval {
                    lower: Some(Bound {
                        value: lo,
                        open: lo_open,
                    }),
                    upper: Some(Bound {
                        value: hi,
                        open: hi_open,
                    }),
                },
            ));
        }

        let name = self.name()?;
        let (feature, kind) = self.feature_kind(&name)?;
        if self.peek().tok.is_keyword("IN") {
            self.bump();
            Self::expect_kind(&name, &feature, kind, FeatureKind::Categorical)?;
            if self.peek().tok != Tok::LBrace {
                return Err(self.unexpected("`{`"));
            }
            self.bump();
            let mut labels = vec![self.value()?];
            loop {
                match self.peek().tok {
                    Tok::Comma => {
                        self.bump();
                        labels.push(self.value()?);
                    }
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `}`")),
                }
            }
            return Ok(Predicate::set(feature, labels));
        }

        let op = self.peek().tok.clone();
        match op {
            Tok::Eq => {
                self.bump();
                match kind {
                    FeatureKind::Categorical => Ok(Predicate::set(feature, [self.value()?])),
                    FeatureKind::Numerical => {
                        let v = self.number()?;
                        Ok(Predicate::interval(feature, NumericInterval::closed(v, v)))
                    }
                }
            }
            Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge => {
                self.bump();
                Self::expect_kind(&name, &feature, kind, FeatureKind::Numerical)?;
                let v = self.number()?;
                let interval = match op {
                    Tok::Lt => NumericInterval {
                        lower: None,
                        upper: Some(Bound::open(v)),
                    },
                    Tok::Le => NumericInterval::at_most(v),
                    Tok::Gt => NumericInterval {
                        lower: Some(Bound::open(v)),
                        upper: None,
                    },
                    _ => NumericInterval::at_least(v),
                };
                Ok(Predicate::interval(feature, interval))
            }
            _ => Err(self.unexpected("a comparison or `IN`")),
        }
    }

    fn rule(&mut self) -> Result<Rule, RuleParseError> {
        self.keyword("IF")?;
        let mut premise: Vec<Predicate> = Vec::new();
        if !self.peek().tok.is_keyword("THEN") {
            loop {
                let p = self.clause()?;
                merge_into(&mut premise, p);
                if self.peek().tok.is_keyword("AND") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.keyword("THEN")?;
        let target = self.name()?;
        let target_name = match &target.tok {
            Tok::Ident(s) | Tok::Str(s) => s.clone(),
            _ => unreachable!(),
        };
        if target_name != self.schema.target_name() {
            return Err(RuleParseError::TargetMismatch {
                line: target.line,
                column: target.column,
                found: target_name,
                expected: self.schema.target_name().to_owned(),
            });
        }
        if self.peek().tok != Tok::Eq {
            return Err(self.unexpected("`=`"));
        }
        self.bump();
        let consequence = self.value()?;
        if self.peek().tok != Tok::End {
            return Err(self.unexpected("end of input"));
        }
        Ok(Rule::new(premise, consequence))
    }
}

/// Appends `p`, intersecting it with an earlier predicate on the same
/// feature. Bodies of different kinds are kept apart for validation to flag.
pub(crate) fn merge_into(premise: &mut Vec<Predicate>, p: Predicate) {
    if let Some(existing) = premise.iter_mut().find(|q| q.feature == p.feature) {
        if let Some(body) = existing.body.intersect(&p.body) {
            existing.body = body;
            return;
        }
    }
    premise.push(p);
}

/// Parses a rule against a schema. Repeated conditions on one feature are
/// intersected into a single predicate.
pub fn parse_rule_text(source: &RuleText, schema: &DatasetSchema) -> Result<Rule, RuleParseError> {
    let toks = lex(source.as_str())?;
    Parser {
        toks,
        pos: 0,
        schema,
    }
    .rule()
}

fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start)
        && chars.all(is_ident_continue)
        && !KEYWORDS.contains(&s)
}

fn is_number_lexeme(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn push_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn push_name(out: &mut String, s: &str) {
    if is_plain_ident(s) {
        out.push_str(s);
    } else {
        push_quoted(out, s);
    }
}

fn push_value(out: &mut String, s: &str) {
    if is_plain_ident(s) || is_number_lexeme(s) {
        out.push_str(s);
    } else {
        push_quoted(out, s);
    }
}

fn push_clause(out: &mut String, p: &Predicate) {
    use std::fmt::Write;
    match &p.body {
        PredicateBody::Set(labels) => {
            push_name(out, &p.feature);
            out.push_str(" IN {");
            for (i, l) in labels.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                push_value(out, l);
            }
            out.push('}');
        }
        PredicateBody::Interval(iv) => match (iv.lower, iv.upper) {
            (Some(lo), Some(hi)) => {
                let _ = write!(out, "{} {} ", lo.value, if lo.open { "<" } else { "<=" });
                push_name(out, &p.feature);
                let _ = write!(out, " {} {}", if hi.open { "<" } else { "<=" }, hi.value);
            }
            (None, Some(hi)) => {
                push_name(out, &p.feature);
                let _ = write!(out, " {} {}", if hi.open { "<" } else { "<=" }, hi.value);
            }
            (Some(lo), None) => {
                push_name(out, &p.feature);
                let _ = write!(out, " {} {}", if lo.open { ">" } else { ">=" }, lo.value);
            }
            (None, None) => {
                // Not representable; the printer requires a valid rule.
                push_name(out, &p.feature);
                out.push_str(" >= -inf");
            }
        },
    }
}

/// Prints a rule in the textual format. Bounded intervals use the range
/// form `lo <= feature <= hi`; label sets always use `IN {...}`.
pub fn emit_rule_text(rule: &Rule, target_name: &str) -> RuleText {
    let mut out = String::from("IF ");
    for (i, p) in rule.premise.iter().enumerate() {
        if i > 0 {
            out.push_str("AND ");
        }
        push_clause(&mut out, p);
        out.push(' ');
    }
    out.push_str("THEN ");
    push_name(&mut out, target_name);
    out.push_str(" = ");
    push_value(&mut out, &rule.consequence);
    RuleText(out)
}
