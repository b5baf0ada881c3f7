//! Line-oriented text format for belief functions.
//!
//! ```text
//! # comment
//! frame X = x1 x2 ; Y = y1 y2
//! norm abs
//! m { (x1 y1) (x2 y2) } = 3/4
//! m { (x1 y1) (x1 y2) (x2 y1) (x2 y2) } = 0.25
//! ```

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::{ConfigSet, EventSet, Frame, Variable};
use crate::massfun::{MassAssignment, MassFunction, NormMode};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::Limits;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    LParen,
    RParen,
    Eq,
    Semi,
    Comma,
    Word(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let column = line[..i].chars().count() + 1;
        let single = match c {
            '{' => Some(Tok::Open),
            '}' => Some(Tok::Close),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, column });
            chars.next();
        } else if c.is_whitespace() {
            chars.next();
        } else {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || "{}()=;,".contains(c) {
                    break;
                }
                word.push(c);
                chars.next();
            }
            out.push(Token {
                tok: Tok::Word(word),
                column,
            });
        }
    }
    out
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl<'a> Cursor<'a> {
    fn new(tokens: &'a [Token], line: usize, text: &str) -> Self {
        Self {
            tokens,
            pos: 0,
            line,
            end_column: text.chars().count() + 1,
        }
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.end_column, |t| t.column)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.tokens.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn word(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn finish(&self) -> Result<()> {
        if self.done() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    /// Re-anchors a non-syntax error at the current position.
    fn locate(&self, column: usize, e: Error) -> Error {
        match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                line: self.line,
                column,
                message: other.to_string(),
            },
        }
    }
}

fn parse_frame(cur: &mut Cursor) -> Result<Frame> {
    let mut vars = Vec::new();
    while !cur.done() {
        let column = cur.column();
        let name = cur.word("a variable name")?;
        cur.expect(Tok::Eq, "`=` after the variable name")?;
        let mut labels = Vec::new();
        while let Some(Tok::Word(w)) = cur.peek() {
            labels.push(w.clone());
            cur.next();
        }
        vars.push(Variable::new(name, labels).map_err(|e| cur.locate(column, e))?);
        if !cur.done() {
            cur.expect(Tok::Semi, "`;` between variables")?;
        }
    }
    Frame::new(vars).map_err(|e| cur.locate(1, e))
}

/// `{ (a b) (c d) }` over `frame`.
fn parse_braced(cur: &mut Cursor, frame: &Arc<Frame>) -> Result<ConfigSet> {
    cur.expect(Tok::Open, "`{`")?;
    let mut indices = Vec::new();
    while cur.peek() == Some(&Tok::LParen) {
        let column = cur.column();
        cur.next();
        let mut labels = Vec::new();
        while let Some(Tok::Word(w)) = cur.peek() {
            labels.push(w.clone());
            cur.next();
        }
        cur.expect(Tok::RParen, "`)` closing the configuration")?;
        let idx = frame
            .encode_labels(&labels)
            .map_err(|e| cur.locate(column, e))?;
        indices.push(idx as u32);
    }
    cur.expect(Tok::Close, "`(` or `}`")?;
    Ok(ConfigSet::from_indices(frame.size(), indices))
}

/// `X=x1,Y=y2`: the cylinder fixing the listed variables.
fn parse_shorthand(cur: &mut Cursor, frame: &Arc<Frame>) -> Result<ConfigSet> {
    let mut set = ConfigSet::full(frame.size());
    loop {
        let column = cur.column();
        let var = cur.word("a variable name")?;
        cur.expect(Tok::Eq, "`=`")?;
        let value = cur.word("a value label")?;
        let cyl =
            EventSet::cylinder(frame.clone(), &var, &value).map_err(|e| cur.locate(column, e))?;
        set = set.intersection(cyl.set());
        if cur.peek() == Some(&Tok::Comma) {
            cur.next();
        } else {
            return Ok(set);
        }
    }
}

/// Parses a set expression: braced configurations or the `X=x1` shorthand.
pub fn parse_set_expr(text: &str, frame: &Arc<Frame>) -> Result<EventSet> {
    let tokens = tokenize(text);
    let mut cur = Cursor::new(&tokens, 1, text);
    let set = if cur.peek() == Some(&Tok::Open) {
        parse_braced(&mut cur, frame)?
    } else {
        parse_shorthand(&mut cur, frame)?
    };
    cur.finish()?;
    Ok(EventSet::new(frame.clone(), set))
}

/// Parses a frame declaration without the leading keyword.
pub fn parse_frame_decl(text: &str) -> Result<Frame> {
    let tokens = tokenize(text);
    let mut cur = Cursor::new(&tokens, 1, text);
    if cur.peek() == Some(&Tok::Word("frame".into())) {
        cur.next();
    }
    parse_frame(&mut cur)
}

pub fn parse_bpa(text: &str) -> Result<MassFunction> {
    parse_bpa_with(text, &Limits::default())
}

pub fn parse_bpa_with(text: &str, limits: &Limits) -> Result<MassFunction> {
    let mut frame: Option<Arc<Frame>> = None;
    let mut mode: Option<NormMode> = None;
    let mut raw: Option<MassAssignment> = None;
    let mut last_line = 0;
    for (n, full_line) in text.lines().enumerate() {
        let line_no = n + 1;
        last_line = line_no;
        let line = full_line.split('#').next().unwrap_or("");
        let tokens = tokenize(line);
        let mut cur = Cursor::new(&tokens, line_no, line);
        let Some(Tok::Word(head)) = cur.peek().cloned() else {
            if cur.done() {
                continue;
            }
            return Err(cur.error("expected `frame`, `norm` or `m`"));
        };
        cur.next();
        match head.as_str() {
            "frame" => {
                if frame.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        column: 1,
                        message: "frame declared twice".into(),
                    });
                }
                let f = Arc::new(parse_frame(&mut cur)?);
                raw = Some(MassAssignment::new(f.clone()));
                frame = Some(f);
            }
            "norm" => {
                if mode.is_some() {
                    return Err(cur.error("norm declared twice"));
                }
                let column = cur.column();
                mode = Some(match cur.word("`abs` or `signed`")?.as_str() {
                    "abs" => NormMode::AbsoluteSum,
                    "signed" => NormMode::SignedSum,
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            column,
                            message: format!("unknown norm `{other}`, expected `abs` or `signed`"),
                        })
                    }
                });
                cur.finish()?;
            }
            "m" => {
                let Some(f) = frame.clone() else {
                    return Err(cur.error("focal set before the frame declaration"));
                };
                let set_column = cur.column();
                let set = parse_braced(&mut cur, &f)?;
                if set.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        column: set_column,
                        message: "the empty set cannot carry mass".into(),
                    });
                }
                cur.expect(Tok::Eq, "`=` before the mass")?;
                let mass_column = cur.column();
                let word = cur.word("a mass")?;
                let mass = parse_rational(&word).ok_or_else(|| Error::Parse {
                    line: line_no,
                    column: mass_column,
                    message: format!("`{word}` is not a rational number"),
                })?;
                cur.finish()?;
                raw.as_mut()
                    .unwrap()
                    .insert(set, mass)
                    .map_err(|e| cur.locate(set_column, e))?;
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    column: tokens[0].column,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let Some(raw) = raw else {
        return Err(Error::Parse {
            line: last_line.max(1),
            column: 1,
            message: "missing frame declaration".into(),
        });
    };
    raw.normalize(mode.unwrap_or_default(), limits)
}

/// Canonical text: frame line, `norm signed` when applicable, then focal sets
/// ordered by their configuration indices.
pub fn emit_bpa(m: &MassFunction) -> String {
    let frame = m.frame();
    let mut out = String::new();
    if frame.variables().is_empty() {
        out.push_str("frame\n");
    } else {
        out.push_str(&format!("frame {frame}\n"));
    }
    if m.mode() == NormMode::SignedSum {
        out.push_str("norm signed\n");
    }
    for (event, mass) in m.focal_events() {
        out.push_str(&format!("m {} = {}\n", event, format_rational(&mass)));
    }
    out
}

pub fn format_mass(mass: &Rational) -> String {
    format_rational(mass)
}
