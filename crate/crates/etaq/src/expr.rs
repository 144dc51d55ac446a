//! Expression language for the right-hand side ψ(x, z) and for graph inputs
//! u(x): tokenizer, recursive-descent parser, evaluator, symbolic ∂/∂z.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?          (right-associative; exponent must
//!                                        fold to a constant)
//! atom    := number | variable | func "(" expr ")" | "(" expr ")"
//! number  := digits ("." digits*)? (("e"|"E") ("+"|"-")? digits)?
//! func    := "exp" | "log" | "sqrt" | "sin" | "cos"
//! variable:= "x1" .. "xn" | "z"
//! ```
//!
//! Errors carry byte offsets into the source string. Evaluation rejects
//! domain faults (log of a non-positive value, square root of a negative
//! value, division by zero, fractional powers of negatives) and non-finite
//! intermediate results instead of propagating NaN.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Ident,
    Op,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token {
                kind: TokenKind::Number,
                lexeme: src[start..i].to_string(),
                position: start,
            });
        } else if c.is_ascii_lowercase() {
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_lowercase()
                    || (bytes[i] as char).is_ascii_digit())
            {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident,
                lexeme: src[start..i].to_string(),
                position: start,
            });
        } else if matches!(c, '+' | '-' | '*' | '/' | '^') {
            i += 1;
            out.push(Token { kind: TokenKind::Op, lexeme: c.to_string(), position: start });
        } else if c == '(' {
            i += 1;
            out.push(Token { kind: TokenKind::LParen, lexeme: "(".into(), position: start });
        } else if c == ')' {
            i += 1;
            out.push(Token { kind: TokenKind::RParen, lexeme: ")".into(), position: start });
        } else {
            return Err(Error::Lex {
                offset: start,
                msg: format!("illegal character '{c}'"),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Const(f64),
    /// 0-based coordinate index (source form `x1`..`xn`).
    Var(usize),
    Z,
    Neg(Box<Expr>),
    Fun(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Exponent restricted to a constant at parse time.
    Pow(Box<Expr>, f64),
}

/// Expression tree node; `pos` is the byte offset of the token that
/// introduced it, used in evaluation faults.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: usize,
}

impl Expr {
    fn konst(v: f64, pos: usize) -> Expr {
        Expr { kind: ExprKind::Const(v), pos }
    }

    fn as_const(&self) -> Option<f64> {
        match self.kind {
            ExprKind::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn uses_z(&self) -> bool {
        match &self.kind {
            ExprKind::Z => true,
            ExprKind::Const(_) | ExprKind::Var(_) => false,
            ExprKind::Neg(a) | ExprKind::Fun(_, a) | ExprKind::Pow(a, _) => a.uses_z(),
            ExprKind::Bin(_, a, b) => a.uses_z() || b.uses_z(),
        }
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    n: usize,
    allow_z: bool,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.src_len)
    }

    fn err(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::Parse { offset, msg: msg.into() }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(t) = self.peek() {
            let op = match t.lexeme.as_str() {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                _ => break,
            };
            let pos = self.bump().unwrap().position;
            let rhs = self.term()?;
            lhs = fold_bin(op, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(t) = self.peek() {
            let op = match t.lexeme.as_str() {
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                _ => break,
            };
            let pos = self.bump().unwrap().position;
            let rhs = self.unary()?;
            lhs = fold_bin(op, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(t) = self.peek() {
            if t.lexeme == "-" && t.kind == TokenKind::Op {
                let pos = self.bump().unwrap().position;
                let inner = self.unary()?;
                return Ok(match inner.as_const() {
                    Some(v) => Expr::konst(-v, pos),
                    None => Expr { kind: ExprKind::Neg(Box::new(inner)), pos },
                });
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(t) = self.peek() {
            if t.lexeme == "^" {
                let pos = self.bump().unwrap().position;
                let exp_pos = self.here();
                let exponent = self.unary()?;
                let Some(e) = exponent.as_const() else {
                    return Err(self.err(exp_pos, "exponent must be a constant"));
                };
                return Ok(match base.as_const() {
                    Some(b) if b.powf(e).is_finite() => Expr::konst(b.powf(e), pos),
                    _ => Expr { kind: ExprKind::Pow(Box::new(base), e), pos },
                });
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(t) = self.bump() else {
            return Err(self.err(self.src_len, "unexpected end of expression"));
        };
        let t = t.clone();
        match t.kind {
            TokenKind::Number => {
                let v: f64 = t
                    .lexeme
                    .parse()
                    .map_err(|_| self.err(t.position, "malformed number"))?;
                Ok(Expr::konst(v, t.position))
            }
            TokenKind::Ident => {
                if let Some(f) = Func::from_name(&t.lexeme) {
                    self.expect_op_paren(t.position)?;
                    let arg = self.expr()?;
                    match self.peek() {
                        Some(p) if p.kind == TokenKind::RParen => {
                            self.bump();
                        }
                        _ => return Err(self.err(self.here(), "expected ')'")),
                    }
                    return Ok(match arg.as_const() {
                        Some(v) => {
                            let folded = apply_fun(f, v);
                            match folded {
                                Ok(r) if r.is_finite() => Expr::konst(r, t.position),
                                _ => Expr {
                                    kind: ExprKind::Fun(f, Box::new(arg)),
                                    pos: t.position,
                                },
                            }
                        }
                        None => Expr { kind: ExprKind::Fun(f, Box::new(arg)), pos: t.position },
                    });
                }
                if t.lexeme == "z" {
                    if !self.allow_z {
                        return Err(self.err(t.position, "variable z is not allowed here"));
                    }
                    return Ok(Expr { kind: ExprKind::Z, pos: t.position });
                }
                if let Some(rest) = t.lexeme.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        let idx: usize = rest
                            .parse()
                            .map_err(|_| self.err(t.position, "malformed variable index"))?;
                        if idx == 0 || idx > self.n {
                            return Err(self.err(
                                t.position,
                                format!("variable {} out of range (n = {})", t.lexeme, self.n),
                            ));
                        }
                        return Ok(Expr { kind: ExprKind::Var(idx - 1), pos: t.position });
                    }
                }
                Err(self.err(t.position, format!("unknown identifier '{}'", t.lexeme)))
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(p) if p.kind == TokenKind::RParen => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(self.err(self.here(), "expected ')'")),
                }
            }
            _ => Err(self.err(t.position, format!("unexpected '{}'", t.lexeme))),
        }
    }

    fn expect_op_paren(&mut self, fn_pos: usize) -> Result<()> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::LParen => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(
                self.here().max(fn_pos),
                "expected '(' after function name",
            )),
        }
    }
}

fn apply_fun(f: Func, v: f64) -> Result<f64> {
    Ok(match f {
        Func::Exp => v.exp(),
        Func::Log => {
            if v <= 0.0 {
                return Err(Error::Eval { offset: 0, msg: "log of non-positive value".into() });
            }
            v.ln()
        }
        Func::Sqrt => {
            if v < 0.0 {
                return Err(Error::Eval { offset: 0, msg: "sqrt of negative value".into() });
            }
            v.sqrt()
        }
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
    })
}

fn fold_bin(op: BinOp, a: Expr, b: Expr, pos: usize) -> Expr {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        let v = match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => {
                if y != 0.0 {
                    x / y
                } else {
                    f64::NAN
                }
            }
        };
        if v.is_finite() {
            return Expr::konst(v, pos);
        }
    }
    Expr { kind: ExprKind::Bin(op, Box::new(a), Box::new(b)), pos }
}

/// Parses an expression over variables `x1..xn` (plus `z` when `allow_z`).
pub fn parse(src: &str, n: usize, allow_z: bool) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens: &tokens, pos: 0, n, allow_z, src_len: src.len() };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(Error::Parse {
            offset: t.position,
            msg: format!("unexpected trailing '{}'", t.lexeme),
        });
    }
    Ok(e)
}

/// Evaluates with the given coordinates and z. Domain faults and non-finite
/// results are positioned errors, never silent NaN/Inf.
pub fn eval(e: &Expr, x: &[f64], z: f64) -> Result<f64> {
    let fault = |msg: &str| Error::Eval { offset: e.pos, msg: msg.into() };
    let v = match &e.kind {
        ExprKind::Const(v) => *v,
        ExprKind::Var(i) => {
            if *i >= x.len() {
                return Err(fault("coordinate index out of range for this point"));
            }
            x[*i]
        }
        ExprKind::Z => z,
        ExprKind::Neg(a) => -eval(a, x, z)?,
        ExprKind::Fun(f, a) => {
            let av = eval(a, x, z)?;
            apply_fun(*f, av).map_err(|err| match err {
                Error::Eval { msg, .. } => Error::Eval { offset: e.pos, msg },
                other => other,
            })?
        }
        ExprKind::Bin(op, a, b) => {
            let av = eval(a, x, z)?;
            let bv = eval(b, x, z)?;
            match op {
                BinOp::Add => av + bv,
                BinOp::Sub => av - bv,
                BinOp::Mul => av * bv,
                BinOp::Div => {
                    if bv == 0.0 {
                        return Err(fault("division by zero"));
                    }
                    av / bv
                }
            }
        }
        ExprKind::Pow(base, ex) => {
            let bv = eval(base, x, z)?;
            if bv < 0.0 && ex.fract() != 0.0 {
                return Err(fault("fractional power of a negative value"));
            }
            if bv == 0.0 && *ex < 0.0 {
                return Err(fault("zero raised to a negative power"));
            }
            bv.powf(*ex)
        }
    };
    if !v.is_finite() {
        return Err(fault("non-finite result"));
    }
    Ok(v)
}

/// Symbolic ∂/∂z with constant folding.
pub fn diff_z(e: &Expr) -> Expr {
    let pos = e.pos;
    match &e.kind {
        ExprKind::Const(_) | ExprKind::Var(_) => Expr::konst(0.0, pos),
        ExprKind::Z => Expr::konst(1.0, pos),
        ExprKind::Neg(a) => {
            let da = diff_z(a);
            match da.as_const() {
                Some(v) => Expr::konst(-v, pos),
                None => Expr { kind: ExprKind::Neg(Box::new(da)), pos },
            }
        }
        ExprKind::Fun(f, a) => {
            let da = diff_z(a);
            if let Some(0.0) = da.as_const() {
                return Expr::konst(0.0, pos);
            }
            let outer = match f {
                Func::Exp => Expr { kind: ExprKind::Fun(Func::Exp, a.clone()), pos },
                Func::Log => {
                    // a'/a handled below via division
                    return fold_bin(BinOp::Div, da, (**a).clone(), pos);
                }
                Func::Sqrt => {
                    let two_sqrt = fold_bin(
                        BinOp::Mul,
                        Expr::konst(2.0, pos),
                        Expr { kind: ExprKind::Fun(Func::Sqrt, a.clone()), pos },
                        pos,
                    );
                    return fold_bin(BinOp::Div, da, two_sqrt, pos);
                }
                Func::Sin => Expr { kind: ExprKind::Fun(Func::Cos, a.clone()), pos },
                Func::Cos => Expr {
                    kind: ExprKind::Neg(Box::new(Expr {
                        kind: ExprKind::Fun(Func::Sin, a.clone()),
                        pos,
                    })),
                    pos,
                },
            };
            fold_bin(BinOp::Mul, outer, da, pos)
        }
        ExprKind::Bin(op, a, b) => {
            let da = diff_z(a);
            let db = diff_z(b);
            match op {
                BinOp::Add => fold_bin(BinOp::Add, da, db, pos),
                BinOp::Sub => fold_bin(BinOp::Sub, da, db, pos),
                BinOp::Mul => {
                    let t1 = fold_bin(BinOp::Mul, da, (**b).clone(), pos);
                    let t2 = fold_bin(BinOp::Mul, (**a).clone(), db, pos);
                    fold_bin(BinOp::Add, t1, t2, pos)
                }
                BinOp::Div => {
                    let num1 = fold_bin(BinOp::Mul, da, (**b).clone(), pos);
                    let num2 = fold_bin(BinOp::Mul, (**a).clone(), db, pos);
                    let num = fold_bin(BinOp::Sub, num1, num2, pos);
                    let den = fold_bin(BinOp::Mul, (**b).clone(), (**b).clone(), pos);
                    fold_bin(BinOp::Div, num, den, pos)
                }
            }
        }
        ExprKind::Pow(base, ex) => {
            let db = diff_z(base);
            if let Some(0.0) = db.as_const() {
                return Expr::konst(0.0, pos);
            }
            let lowered = Expr { kind: ExprKind::Pow(base.clone(), ex - 1.0), pos };
            let t = fold_bin(BinOp::Mul, Expr::konst(*ex, pos), lowered, pos);
            fold_bin(BinOp::Mul, t, db, pos)
        }
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Pow(..) => 4,
        _ => 5,
    }
}

fn print_into(e: &Expr, min_level: u8, out: &mut String) {
    let lv = level(e);
    let parens = lv < min_level;
    if parens {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Const(v) => {
            if *v < 0.0 || v.is_sign_negative() {
                out.push('-');
                out.push_str(&format!("{}", -v));
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        ExprKind::Var(i) => out.push_str(&format!("x{}", i + 1)),
        ExprKind::Z => out.push('z'),
        ExprKind::Neg(a) => {
            out.push('-');
            print_into(a, 3, out);
        }
        ExprKind::Fun(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_into(a, 0, out);
            out.push(')');
        }
        ExprKind::Bin(op, a, b) => {
            let (sym, l, rl) = match op {
                BinOp::Add => ('+', 1, 2),
                BinOp::Sub => ('-', 1, 2),
                BinOp::Mul => ('*', 2, 3),
                BinOp::Div => ('/', 2, 3),
            };
            print_into(a, l, out);
            out.push(sym);
            print_into(b, rl, out);
        }
        ExprKind::Pow(base, ex) => {
            print_into(base, 5, out);
            out.push('^');
            if *ex < 0.0 {
                out.push('-');
                out.push_str(&format!("{}", -ex));
            } else {
                out.push_str(&format!("{ex}"));
            }
        }
    }
    if parens {
        out.push(')');
    }
}

/// Canonical form: `print(parse(print(e))) == print(e)`.
pub fn print(e: &Expr) -> String {
    let mut s = String::new();
    print_into(e, 0, &mut s);
    s
}
