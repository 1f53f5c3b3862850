use super::ast::{BinaryOp, Expr, Function, RefSpec};
use super::lexer::{tokenize, Spanned, Tok};
use super::{FormulaError, SheetContext};
use crate::address::CellAddress;

/// Parses formula text (leading `=` required) with the standalone sheet context.
pub fn parse(text: &str) -> Result<Expr, FormulaError> {
    parse_in(text, &SheetContext::default())
}

pub fn parse_in(text: &str, ctx: &SheetContext<'_>) -> Result<Expr, FormulaError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, ctx };
    p.expect(&Tok::Eq, "`=`")?;
    let expr = p.expr()?;
    p.expect(&Tok::End, "operator or end of input")?;
    Ok(expr)
}

struct Parser<'c, 'n> {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: &'c SheetContext<'n>,
}

impl Parser<'_, '_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), FormulaError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> FormulaError {
        FormulaError::syntax(
            self.offset(),
            format!("{what}, found {}", self.peek().describe()),
        )
    }

    fn expr(&mut self) -> Result<Expr, FormulaError> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            left = Expr::binary(op, left, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, FormulaError> {
        let mut left = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(left),
            };
            self.bump();
            left = Expr::binary(op, left, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, FormulaError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(Expr::Neg(Box::new(self.atom()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr, FormulaError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(Expr::Number(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Text(s))
            }
            Tok::Cluster(label) => {
                self.bump();
                Ok(Expr::Ref(RefSpec::Cluster(label)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => self.call(name),
            Tok::Ident(_) => self.reference(),
            _ => Err(self.unexpected("expression")),
        }
    }

    fn call(&mut self, name: String) -> Result<Expr, FormulaError> {
        let position = self.offset();
        let func = Function::from_name(&name).ok_or(FormulaError::Name { name, position })?;
        self.bump();
        self.bump();
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.expr()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
        }
        self.expect(&Tok::RParen, "`,` or `)`")?;
        if !func.accepts_arity(args.len()) {
            return Err(FormulaError::Arity {
                func,
                expected: func.arity_text(),
                got: args.len(),
            });
        }
        Ok(Expr::call(func, args))
    }

    fn reference(&mut self) -> Result<Expr, FormulaError> {
        let start = self.cell_ref(None)?;
        if *self.peek() != Tok::Colon {
            return Ok(Expr::Ref(RefSpec::Cell(start)));
        }
        self.bump();
        let position = self.offset();
        let end = self.cell_ref(Some(start.sheet))?;
        if end.sheet != start.sheet {
            return Err(FormulaError::syntax(
                position,
                "range corners on the same sheet",
            ));
        }
        Ok(Expr::Ref(RefSpec::range(start, end)))
    }

    /// `(Sheet '!')? A1`; an unqualified address lands on `default_sheet`
    /// or the context's home sheet.
    fn cell_ref(&mut self, default_sheet: Option<usize>) -> Result<CellAddress, FormulaError> {
        let position = self.offset();
        let Tok::Ident(first) = self.peek().clone() else {
            return Err(self.unexpected("cell reference"));
        };
        self.bump();
        let (sheet, text, position) = if *self.peek() == Tok::Bang {
            self.bump();
            let sheet = self
                .ctx
                .resolve(&first)
                .ok_or(FormulaError::UnknownSheet(first))?;
            let position = self.offset();
            let Tok::Ident(text) = self.bump() else {
                return Err(FormulaError::syntax(position, "cell reference after `!`"));
            };
            (sheet, text, position)
        } else {
            (default_sheet.unwrap_or(self.ctx.home), first, position)
        };
        CellAddress::parse_a1(&text, sheet).ok_or_else(|| {
            FormulaError::syntax(position, format!("cell reference, found `{text}`"))
        })
    }
}
