use super::{Formula, Program, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LAngle,
    RAngle,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Bang,
    Amp,
    Bar,
    Arrow,
    Semi,
    Plus,
    Inverse,
    True,
    False,
    Var(u32),
    Name(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LAngle => "`<`".into(),
            Tok::RAngle => "`>`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`^+`".into(),
            Tok::Inverse => "`^-`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Var(i) => format!("`p{i}`"),
            Tok::Name(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn err(offset: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'<' => {
                i += 1;
                Tok::LAngle
            }
            b'>' => {
                i += 1;
                Tok::RAngle
            }
            b'[' => {
                i += 1;
                Tok::LBrack
            }
            b']' => {
                i += 1;
                Tok::RBrack
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'!' => {
                i += 1;
                Tok::Bang
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'|' => {
                i += 1;
                Tok::Bar
            }
            b';' => {
                i += 1;
                Tok::Semi
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Tok::Arrow
            }
            b'^' => match bytes.get(i + 1) {
                Some(b'+') => {
                    i += 2;
                    Tok::Plus
                }
                Some(b'-') => {
                    i += 2;
                    Tok::Inverse
                }
                _ => return Err(err(i, "expected `^+` or `^-`")),
            },
            b'a'..=b'z' | b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => {
                        let digits = &word[1..];
                        if word.starts_with('p')
                            && !digits.is_empty()
                            && digits.bytes().all(|b| b.is_ascii_digit())
                        {
                            let idx = digits
                                .parse::<u32>()
                                .map_err(|_| err(start, "variable index out of range"))?;
                            Tok::Var(idx)
                        } else {
                            Tok::Name(word.to_string())
                        }
                    }
                }
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(err(i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    alphabet: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(err(
                self.offset(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LAngle => {
                self.bump();
                let e = self.program()?;
                self.expect(Tok::RAngle)?;
                Ok(Formula::diamond(e, self.unary()?))
            }
            Tok::LBrack => {
                self.bump();
                let e = self.program()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::boxed(e, self.unary()?))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Var(i) => {
                self.bump();
                Ok(Formula::Var(i))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Name(n) => Err(err(
                self.offset(),
                format!("expected a formula, found modality name `{n}` (variables are written p0, p1, ...)"),
            )),
            t => Err(err(
                self.offset(),
                format!("expected a formula, found {}", t.describe()),
            )),
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.sequence()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.sequence()?;
            acc = Program::union(acc, rhs);
        }
        Ok(acc)
    }

    fn sequence(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.postfix()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let rhs = self.postfix()?;
            acc = Program::comp(acc, rhs);
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.program_atom()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = Program::plus(acc);
                }
                Tok::Inverse => {
                    self.bump();
                    acc = Program::converse(acc);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn program_atom(&mut self) -> Result<Program, SyntaxError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                if self.alphabet.contains(&n.as_str()) {
                    Ok(Program::Atom(n))
                } else {
                    Err(SyntaxError::UnknownModality { name: n, offset })
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.program()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => Err(err(offset, format!("expected a program, found {}", t.describe()))),
        }
    }
}

/// Parses `text` against the formula grammar; program atoms must be in `alphabet`.
pub fn parse_formula<S: AsRef<str>>(text: &str, alphabet: &[S]) -> Result<Formula, SyntaxError> {
    let names: Vec<&str> = alphabet.iter().map(AsRef::as_ref).collect();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        alphabet: &names,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(err(
            p.offset(),
            format!("unexpected {} after formula", p.peek().describe()),
        ));
    }
    Ok(f)
}

pub fn parse_program<S: AsRef<str>>(text: &str, alphabet: &[S]) -> Result<Program, SyntaxError> {
    let names: Vec<&str> = alphabet.iter().map(AsRef::as_ref).collect();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        alphabet: &names,
    };
    let e = p.program()?;
    if *p.peek() != Tok::Eof {
        return Err(err(
            p.offset(),
            format!("unexpected {} after program", p.peek().describe()),
        ));
    }
    Ok(e)
}
