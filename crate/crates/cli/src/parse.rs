//! Lexer and recursive-descent parser for operator expressions.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' nat)?
//! atom   := literal | 'i' | xK | dK | builtin | '(' expr ')'
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use onshell_core::opalg::{
    casimir, dalembert, euler, lorentz_generator, parity, reflection, OperatorExpr, RatMatrix,
    Signature,
};
use onshell_core::scalar::{imaginary_unit, Gaussian, Rational, Scalar};

pub type Span = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl ParseError {
    fn new(message: impl Into<String>, span: Span) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }

    /// The message followed by the source line and a caret marker.
    pub fn render(&self, source: &str) -> String {
        let (s, e) = self.span;
        let width = e.saturating_sub(s).max(1);
        format!(
            "{} at {}..{}\n  {}\n  {}{}",
            self.message,
            s,
            e,
            source,
            " ".repeat(source[..s.min(source.len())].chars().count()),
            "^".repeat(width)
        )
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}..{}", self.message, self.span.0, self.span.1)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::End => write!(f, "end of input"),
            t => {
                let c = match t {
                    Tok::Plus => '+',
                    Tok::Minus => '-',
                    Tok::Star => '*',
                    Tok::Slash => '/',
                    Tok::Caret => '^',
                    Tok::LParen => '(',
                    Tok::RParen => ')',
                    Tok::LBracket => '[',
                    Tok::RBracket => ']',
                    Tok::Comma => ',',
                    _ => ';',
                };
                write!(f, "'{c}'")
            }
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Num(src[start..i].parse().expect("digits"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            let c = src[start..].chars().next().expect("in bounds");
            i += c.len_utf8();
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                _ => {
                    return Err(ParseError::new(
                        format!("unexpected character '{c}'"),
                        (start, i),
                    ));
                }
            }
        };
        out.push((tok, (start, i)));
    }
    out.push((Tok::End, (src.len(), src.len())));
    Ok(out)
}

/// Context that gives meaning to built-ins: dimension and metric.
#[derive(Clone, Debug)]
pub struct ParseContext {
    pub n: usize,
    pub sig: Signature,
}

impl ParseContext {
    pub fn new(n: usize) -> Self {
        ParseContext {
            n,
            sig: Signature::default_for(n),
        }
    }

    pub fn with_signature(n: usize, sig: Signature) -> Self {
        ParseContext { n, sig }
    }
}

pub fn parse_operator(text: &str, n: usize) -> Result<OperatorExpr<Gaussian>, ParseError> {
    parse_with(text, &ParseContext::new(n))
}

pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<OperatorExpr<Gaussian>, ParseError> {
    if ctx.n == 0 {
        return Err(ParseError::new("dimension must be at least 1", (0, 0)));
    }
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        ctx,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::Ident(_) | Tok::Num(_) | Tok::LParen => Err(ParseError::new(
            "expected '*' between factors (juxtaposition is not multiplication)",
            p.span(),
        )),
        Tok::Caret => Err(ParseError::new("exponent on non-atom", p.span())),
        t => Err(ParseError::new(format!("unexpected {t}"), p.span())),
    }
}

/// A signed rational literal such as `-3/2`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        ctx: &ParseContext::new(1),
    };
    let q = p.signed_rational()?;
    if p.peek() != &Tok::End {
        return Err(ParseError::new("trailing input after number", p.span()));
    }
    Ok(q)
}

struct Parser<'a> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    ctx: &'a ParseContext,
}

type Op = OperatorExpr<Gaussian>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(ParseError::new(
                format!("expected {want}, found {}", self.peek()),
                self.span(),
            ))
        }
    }

    fn expr(&mut self) -> Result<Op, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Op, ParseError> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.compose(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Op, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (k, _) = self.natural()?;
        if *self.peek() == Tok::Caret {
            return Err(ParseError::new("exponent on non-atom", self.span()));
        }
        Ok(base.pow(k))
    }

    fn natural(&mut self) -> Result<(u32, Span), ParseError> {
        match self.bump() {
            (Tok::Num(v), sp) => u32::try_from(v)
                .map(|k| (k, sp))
                .map_err(|_| ParseError::new("integer too large", sp)),
            (t, sp) => Err(ParseError::new(
                format!("expected a natural number, found {t}"),
                sp,
            )),
        }
    }

    fn unsigned_rational(&mut self) -> Result<Rational, ParseError> {
        let (num, sp) = match self.bump() {
            (Tok::Num(v), sp) => (v, sp),
            (t, sp) => return Err(ParseError::new(format!("expected a number, found {t}"), sp)),
        };
        if *self.peek() != Tok::Slash {
            return Ok(Rational::from_integer(num));
        }
        self.bump();
        match self.bump() {
            (Tok::Num(d), dsp) => {
                if d.is_zero() {
                    Err(ParseError::new("zero denominator", (sp.0, dsp.1)))
                } else {
                    Ok(Rational::new(num, d))
                }
            }
            (t, sp) => Err(ParseError::new(
                format!("expected a denominator, found {t}"),
                sp,
            )),
        }
    }

    fn signed_rational(&mut self) -> Result<Rational, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unsigned_rational()?);
        }
        self.unsigned_rational()
    }

    fn index(&self, name: &str, digits: &str, sp: Span) -> Result<usize, ParseError> {
        let k: usize = digits
            .parse()
            .map_err(|_| ParseError::new(format!("malformed variable '{name}'"), sp))?;
        if k == 0 || k > self.ctx.n {
            return Err(ParseError::new(
                format!(
                    "'{name}' out of range for dimension {} (use 1..={})",
                    self.ctx.n, self.ctx.n
                ),
                sp,
            ));
        }
        Ok(k - 1)
    }

    fn atom(&mut self) -> Result<Op, ParseError> {
        let n = self.ctx.n;
        let sp = self.span();
        match self.peek().clone() {
            Tok::Num(_) => {
                let q = self.unsigned_rational()?;
                Ok(Op::scalar(n, Gaussian::from_rational(q)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.builtin(&name, sp)
            }
            t => Err(ParseError::new(
                format!("expected an operand, found {t}"),
                sp,
            )),
        }
    }

    fn builtin(&mut self, name: &str, sp: Span) -> Result<Op, ParseError> {
        let n = self.ctx.n;
        let lib = |e: onshell_core::Error| ParseError::new(e.to_string(), sp);
        if let Some(rest) = name.strip_prefix('x').filter(|r| is_digits(r)) {
            return Ok(Op::coordinate(n, self.index(name, rest, sp)?));
        }
        if let Some(rest) = name.strip_prefix('d').filter(|r| is_digits(r)) {
            return Ok(Op::partial(n, self.index(name, rest, sp)?));
        }
        match name {
            "i" => Ok(Op::scalar(n, imaginary_unit())),
            "parity" => Ok(parity(n)),
            "casimir" => {
                self.check_metric(sp)?;
                casimir(n, &self.ctx.sig).map_err(lib)
            }
            "euler" => {
                self.expect(Tok::LParen)?;
                let start = self.span().0;
                let arg = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                let a = arg.as_scalar().ok_or_else(|| {
                    ParseError::new("euler(a) needs a constant argument", (start, end.0))
                })?;
                Ok(euler(n, a))
            }
            "box" => {
                let m2 = if *self.peek() == Tok::LParen {
                    self.bump();
                    let q = self.signed_rational()?;
                    self.expect(Tok::RParen)?;
                    q
                } else {
                    Rational::zero()
                };
                self.check_metric(sp)?;
                Ok(dalembert(n, m2, &self.ctx.sig))
            }
            "L" => {
                self.expect(Tok::LParen)?;
                let (mu, msp) = self.natural()?;
                self.expect(Tok::Comma)?;
                let (nu, nsp) = self.natural()?;
                self.expect(Tok::RParen)?;
                self.check_metric(sp)?;
                lorentz_generator(n, mu as usize, nu as usize, &self.ctx.sig)
                    .map_err(|e| ParseError::new(e.to_string(), (msp.0, nsp.1)))
            }
            "reflect" => {
                self.expect(Tok::LParen)?;
                let m = self.matrix()?;
                self.expect(Tok::RParen)?;
                reflection(m).map_err(lib)
            }
            _ => Err(ParseError::new(format!("unknown identifier '{name}'"), sp)),
        }
    }

    fn check_metric(&self, sp: Span) -> Result<(), ParseError> {
        if self.ctx.sig.dim() != self.ctx.n {
            return Err(ParseError::new(
                format!(
                    "metric {} does not match dimension {}",
                    self.ctx.sig, self.ctx.n
                ),
                sp,
            ));
        }
        Ok(())
    }

    /// `[a,b;c,d]`
    fn matrix(&mut self) -> Result<RatMatrix, ParseError> {
        let start = self.expect(Tok::LBracket)?;
        let mut rows = vec![vec![self.signed_rational()?]];
        loop {
            match self.bump() {
                (Tok::Comma, _) => rows.last_mut().expect("row").push(self.signed_rational()?),
                (Tok::Semi, _) => rows.push(vec![self.signed_rational()?]),
                (Tok::RBracket, end) => {
                    let sp = (start.0, end.1);
                    if rows.len() != self.ctx.n || rows.iter().any(|r| r.len() != self.ctx.n) {
                        return Err(ParseError::new(
                            format!("reflect needs a {0}x{0} matrix", self.ctx.n),
                            sp,
                        ));
                    }
                    return RatMatrix::from_rows(rows)
                        .map_err(|e| ParseError::new(e.to_string(), sp));
                }
                (t, sp) => {
                    return Err(ParseError::new(
                        format!("expected ',', ';' or ']', found {t}"),
                        sp,
                    ))
                }
            }
        }
    }
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// A scalar flag value: an `re,im` pair or a constant expression such as
/// `-3/2` or `1/2 - i`.
pub fn parse_scalar(text: &str) -> Result<Gaussian, ParseError> {
    match text.split_once(',') {
        Some((re, im)) => {
            let re = parse_rational(re.trim())?;
            let off = text.find(',').map_or(0, |p| p + 1);
            let im = parse_rational(im.trim()).map_err(|e| ParseError {
                span: (e.span.0 + off, e.span.1 + off),
                ..e
            })?;
            Ok(Gaussian::new(re, im))
        }
        None => {
            let op = parse_operator(text, 1)?;
            op.as_scalar()
                .ok_or_else(|| ParseError::new("expected a constant", (0, text.len())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use onshell_core::scalar::rational;

    fn g(a: i64, b: i64) -> Gaussian {
        Gaussian::from_rational(rational(a, b))
    }

    #[test]
    fn euler_and_wave() {
        let e = parse_operator("x1*d1 + x2*d2 + 3/2", 2).unwrap();
        assert_eq!(e, euler(2, g(-3, 2)));
        assert_eq!(parse_operator("euler(-3/2)", 2).unwrap(), e);
        let w = parse_operator("d1^2 - d2^2 + 1", 2).unwrap();
        assert_eq!(w, dalembert(2, rational(1, 1), &Signature::default_for(2)));
        assert_eq!(parse_operator("box(1)", 2).unwrap(), w);
    }

    #[test]
    fn juxtaposition_is_rejected() {
        let err = parse_operator("x1 d1", 1).unwrap_err();
        assert_eq!(err.span, (3, 5));
        assert!(err.message.contains("'*'"));
    }

    #[test]
    fn errors_carry_spans() {
        assert_eq!(parse_operator("x1 + x3", 2).unwrap_err().span, (5, 7));
        assert_eq!(parse_operator("foo", 2).unwrap_err().span, (0, 3));
        assert_eq!(parse_operator("x1 $", 2).unwrap_err().span, (3, 4));
        assert!(parse_operator("x1^2^3", 1)
            .unwrap_err()
            .message
            .contains("non-atom"));
        assert!(parse_operator("L(0,2)", 2).is_err());
        assert!(parse_operator("reflect([1,0;0])", 2).is_err());
        assert!(parse_operator("reflect([1,1;1,1])", 2).is_err());
        assert!(parse_operator("1/0", 1).is_err());
        assert!(parse_operator("euler(x1)", 1).is_err());
        assert!(parse_operator("(x1", 1).is_err());
        assert!(parse_operator("x1", 0).is_err());
    }

    #[test]
    fn builtins() {
        let s = Signature::default_for(2);
        assert_eq!(
            parse_operator("L(0,1)", 2).unwrap(),
            lorentz_generator(2, 0, 1, &s).unwrap()
        );
        assert_eq!(
            parse_operator("casimir", 2).unwrap(),
            casimir(2, &s).unwrap()
        );
        let p = parse_operator("parity", 3).unwrap();
        assert_eq!(p.to_string(), "parity");
        let r = parse_operator("reflect([0,1;1,0])", 2).unwrap();
        assert_eq!(parse_operator(&r.to_string(), 2).unwrap(), r);
        assert_eq!(
            parse_operator("i*x1 - 2*i", 1).unwrap().to_string(),
            "i*x1 - 2*i"
        );
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("0,-1").unwrap(), -imaginary_unit());
        assert_eq!(parse_scalar("-3/2").unwrap(), g(-3, 2));
        assert_eq!(parse_scalar("2*i").unwrap(), imaginary_unit() * g(2, 1));
        assert!(parse_scalar("x1").is_err());
        assert_eq!(parse_rational("-7/3").unwrap(), rational(-7, 3));
        assert!(parse_rational("1 2").is_err());
    }

    #[test]
    fn rendered_errors_point_at_the_token() {
        let src = "x1 + q";
        let text = parse_operator(src, 1).unwrap_err().render(src);
        assert!(text.ends_with("\n       ^"), "{text}");
    }
}
