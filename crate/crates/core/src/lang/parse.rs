use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Call, FunctionDef, LangError, Line, Literal, Operand, Program, Stmt, StmtKind};
use crate::lex::{tokenize, Cursor, Pos, Tok, Token};
use crate::query::MethodSignature;

const KEYWORDS: &[&str] = &[
    "fn", "let", "call", "if", "else", "while", "return", "skip", "true", "false", "null",
];

/// Parses a TQL-Lite program. The entry is `main` when present, otherwise
/// the first function.
pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let tokens = tokenize(source).map_err(|e| LangError::Syntax {
        pos: e.pos,
        message: e.message.to_string(),
    })?;
    let mut parser = Parser {
        cur: Cursor::new(tokens, source),
        last_line: 0,
        declared: BTreeSet::new(),
    };
    let mut functions: Vec<FunctionDef> = Vec::new();
    while !parser.cur.is_done() {
        let pos = parser.cur.pos();
        let f = parser.function()?;
        if functions.iter().any(|g| g.name() == f.name()) {
            return Err(LangError::DuplicateFunction {
                pos,
                name: f.name().to_string(),
            });
        }
        functions.push(f);
    }
    let entry = match functions.iter().find(|f| f.name() == "main").or(functions.first()) {
        Some(f) => f.name().to_string(),
        None => return Err(LangError::EmptyProgram),
    };
    Ok(Program { functions, entry })
}

struct Parser {
    cur: Cursor,
    last_line: Line,
    declared: BTreeSet<String>,
}

impl Parser {
    fn function(&mut self) -> Result<FunctionDef, LangError> {
        let pos = self.cur.pos();
        self.keyword("fn")?;
        if pos.line <= self.last_line {
            return Err(syntax(pos, "a function must start on a new line"));
        }
        let ret = self.type_token()?;
        let name = self.name("a function name")?;
        self.punct('(')?;
        let mut types = Vec::new();
        let mut params = Vec::new();
        if !self.cur.at_punct(')') {
            loop {
                types.push(self.type_token()?);
                let ppos = self.cur.pos();
                let p = self.name("a parameter name")?;
                if params.contains(&p) {
                    return Err(syntax(ppos, "duplicate parameter name"));
                }
                params.push(p);
                if !self.cur.eat_punct(',') {
                    break;
                }
            }
        }
        self.punct(')')?;
        let signature = MethodSignature::new(ret, name, types).map_err(|e| syntax(pos, &e.to_string()))?;
        self.declared = params.iter().cloned().collect();
        // a statement may share the header line
        self.last_line = pos.line - 1;
        let body = self.block()?;
        self.last_line = self.last_line.max(pos.line);
        Ok(FunctionDef {
            signature,
            params,
            line: pos.line,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, LangError> {
        self.punct('{')?;
        let mut stmts = Vec::new();
        while !self.cur.eat_punct('}') {
            if self.cur.is_done() {
                return Err(syntax(self.cur.pos(), "expected `}`, found end of file"));
            }
            stmts.push(self.statement()?);
        }
        Ok(stmts)
    }

    fn statement(&mut self) -> Result<Stmt, LangError> {
        let pos = self.cur.pos();
        if pos.line <= self.last_line {
            return Err(syntax(pos, "only one statement per line is allowed"));
        }
        self.last_line = pos.line;
        let line = pos.line;
        let word = match self.cur.peek() {
            Some(Token { tok: Tok::Ident(w), .. }) => w.clone(),
            _ => return Err(self.unexpected("a statement")),
        };
        let kind = match word.as_str() {
            "skip" => {
                self.cur.next();
                StmtKind::Skip
            }
            "let" => {
                self.cur.next();
                let target = self.name("a variable name")?;
                self.punct('=')?;
                let value = self.literal()?;
                self.declared.insert(target.clone());
                StmtKind::ConstAssign { target, value }
            }
            "call" => StmtKind::Call {
                result: None,
                call: self.call()?,
            },
            "return" => {
                self.cur.next();
                if self.cur.at_punct(';') {
                    StmtKind::Return(None)
                } else {
                    StmtKind::Return(Some(self.operand()?))
                }
            }
            "if" => {
                self.cur.next();
                let cond = self.condition()?;
                let then_block = self.block()?;
                let else_block = if self.cur.eat_ident("else") {
                    self.block()?
                } else {
                    Vec::new()
                };
                return Ok(Stmt {
                    line,
                    kind: StmtKind::If {
                        cond,
                        then_block,
                        else_block,
                    },
                });
            }
            "while" => {
                self.cur.next();
                let cond = self.condition()?;
                let body = self.block()?;
                return Ok(Stmt {
                    line,
                    kind: StmtKind::While { cond, body },
                });
            }
            _ => self.assignment_like()?,
        };
        self.punct(';')?;
        Ok(Stmt { line, kind })
    }

    fn assignment_like(&mut self) -> Result<StmtKind, LangError> {
        let lhs_pos = self.cur.pos();
        let lhs = self.name("a variable name")?;
        if self.cur.eat_punct('.') {
            self.use_var(lhs_pos, &lhs)?;
            let field = self.name("a field name")?;
            self.no_deeper_path()?;
            self.punct('=')?;
            let source = self.use_name()?;
            return Ok(StmtKind::StoreField { base: lhs, field, source });
        }
        if self.cur.eat_punct('[') {
            self.use_var(lhs_pos, &lhs)?;
            let index = self.operand()?;
            self.punct(']')?;
            self.no_deeper_path()?;
            self.punct('=')?;
            let source = self.use_name()?;
            return Ok(StmtKind::StoreIndex { array: lhs, index, source });
        }
        self.punct('=')?;
        let kind = if self.cur.at_ident("call") {
            StmtKind::Call {
                result: Some(lhs.clone()),
                call: self.call()?,
            }
        } else if let Some(value) = self.try_literal() {
            StmtKind::ConstAssign {
                target: lhs.clone(),
                value,
            }
        } else {
            let source = self.use_name()?;
            if self.cur.eat_punct('.') {
                let field = self.name("a field name")?;
                self.no_deeper_path()?;
                StmtKind::LoadField {
                    target: lhs.clone(),
                    base: source,
                    field,
                }
            } else if self.cur.eat_punct('[') {
                let index = self.operand()?;
                self.punct(']')?;
                self.no_deeper_path()?;
                StmtKind::LoadIndex {
                    target: lhs.clone(),
                    array: source,
                    index,
                }
            } else {
                StmtKind::Assign {
                    target: lhs.clone(),
                    source,
                }
            }
        };
        self.declared.insert(lhs);
        Ok(kind)
    }

    fn no_deeper_path(&self) -> Result<(), LangError> {
        if self.cur.at_punct('.') || self.cur.at_punct('[') {
            return Err(syntax(self.cur.pos(), "access paths are limited to one field or index"));
        }
        Ok(())
    }

    fn call(&mut self) -> Result<Call, LangError> {
        let pos = self.cur.pos();
        self.keyword("call")?;
        let receiver = match self.cur.peek_at(1) {
            Some(Token { tok: Tok::Punct('.'), .. }) => {
                let r = self.use_name()?;
                self.punct('.')?;
                Some(r)
            }
            _ => None,
        };
        let ret = self.type_token()?;
        let name = self.name("a method name")?;
        self.punct('(')?;
        let mut types = Vec::new();
        if !self.cur.at_punct(')') {
            loop {
                types.push(self.type_token()?);
                if !self.cur.eat_punct(',') {
                    break;
                }
            }
        }
        self.punct(')')?;
        self.punct('(')?;
        let mut args = Vec::new();
        if !self.cur.at_punct(')') {
            loop {
                args.push(self.operand()?);
                if !self.cur.eat_punct(',') {
                    break;
                }
            }
        }
        self.punct(')')?;
        if args.len() != types.len() {
            return Err(syntax(
                pos,
                &format!("call passes {} arguments to a method of arity {}", args.len(), types.len()),
            ));
        }
        let signature = MethodSignature::new(ret, name, types).map_err(|e| syntax(pos, &e.to_string()))?;
        Ok(Call {
            receiver,
            signature,
            args,
        })
    }

    fn condition(&mut self) -> Result<Operand, LangError> {
        self.punct('(')?;
        let cond = self.operand()?;
        self.punct(')')?;
        Ok(cond)
    }

    fn operand(&mut self) -> Result<Operand, LangError> {
        if let Some(lit) = self.try_literal() {
            return Ok(Operand::Lit(lit));
        }
        Ok(Operand::Var(self.use_name()?))
    }

    fn literal(&mut self) -> Result<Literal, LangError> {
        self.try_literal().ok_or_else(|| self.unexpected("a literal"))
    }

    fn try_literal(&mut self) -> Option<Literal> {
        let lit = match &self.cur.peek()?.tok {
            Tok::Int(i) => Literal::Int(*i),
            Tok::Str(s) => Literal::Text(s.clone()),
            Tok::Ident(w) if w == "true" => Literal::Bool(true),
            Tok::Ident(w) if w == "false" => Literal::Bool(false),
            Tok::Ident(w) if w == "null" => Literal::Null,
            _ => return None,
        };
        self.cur.next();
        Some(lit)
    }

    /// A variable read: it must already be declared.
    fn use_name(&mut self) -> Result<String, LangError> {
        let pos = self.cur.pos();
        let name = self.name("a variable name")?;
        self.use_var(pos, &name)?;
        Ok(name)
    }

    fn use_var(&self, pos: Pos, name: &str) -> Result<(), LangError> {
        if self.declared.contains(name) {
            Ok(())
        } else {
            Err(LangError::UndeclaredVariable {
                pos,
                name: name.to_string(),
            })
        }
    }

    fn type_token(&mut self) -> Result<String, LangError> {
        let mut ty = self.name("a type")?;
        while self.cur.at_punct('[') && matches!(self.cur.peek_at(1), Some(Token { tok: Tok::Punct(']'), .. })) {
            self.cur.next();
            self.cur.next();
            ty.push_str("[]");
        }
        Ok(ty)
    }

    /// An identifier that is not a keyword.
    fn name(&mut self, what: &str) -> Result<String, LangError> {
        match self.cur.peek() {
            Some(Token { tok: Tok::Ident(w), .. }) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.cur.next();
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), LangError> {
        if self.cur.eat_ident(word) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    fn punct(&mut self, c: char) -> Result<(), LangError> {
        if self.cur.eat_punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn unexpected(&self, what: &str) -> LangError {
        let found = match self.cur.peek() {
            Some(t) => format!("{}", t.tok),
            None => "end of file".to_string(),
        };
        syntax(self.cur.pos(), &format!("expected {what}, found {found}"))
    }
}

fn syntax(pos: Pos, message: &str) -> LangError {
    LangError::Syntax {
        pos,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::AccessPath;

    pub(crate) const RUNNING_EXAMPLE: &str = include_str!("../../tests/fixtures/password.tl");

    #[test]
    fn trivial_main() {
        let p = parse_program("fn void main(){ skip; }").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.entry, "main");
        assert_eq!(
            p.functions[0].body,
            [Stmt {
                line: 1,
                kind: StmtKind::Skip
            }]
        );
    }

    #[test]
    fn running_example_structure() {
        let p = parse_program(RUNNING_EXAMPLE).unwrap();
        assert_eq!(p.functions.len(), 2);
        assert_eq!(p.entry, "doGet");
        let f = p.function("changePassword").unwrap();
        assert_eq!(f.line, 13);
        assert_eq!(f.params, ["uName", "oldPass", "newPass"]);
        let lines: Vec<Line> = p.functions.iter().flat_map(|f| f.statements()).map(|s| s.line).collect();
        assert!(lines.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn access_paths_are_one_level() {
        let src = "fn void main() {\n  let x = null;\n  y = x.f.g;\n}";
        let err = parse_program(src).unwrap_err();
        assert!(matches!(err, LangError::Syntax { pos, .. } if pos.line == 3));
        let src = "fn void main() {\n  let x = null;\n  let y = 1;\n  x.f.g = y;\n}";
        assert!(matches!(parse_program(src), Err(LangError::Syntax { .. })));
    }

    #[test]
    fn statement_shapes() {
        let src = r#"fn int main(int n) {
  let a = null;
  a[n] = n;
  b = a[0];
  a.f = b;
  c = a.f;
  d = c;
  r = call a.String[] split(String, int)("x", 2);
  while (true) {
    x = 1;
  }
  return d;
}"#;
        let p = parse_program(src).unwrap();
        let kinds: Vec<&StmtKind> = p.functions[0].statements().into_iter().map(|s| &s.kind).collect();
        assert!(matches!(kinds[1], StmtKind::StoreIndex { index: Operand::Var(v), .. } if v == "n"));
        assert!(matches!(kinds[2], StmtKind::LoadIndex { index: Operand::Lit(Literal::Int(0)), .. }));
        assert!(matches!(kinds[6], StmtKind::Call { call: Call { receiver: Some(_), signature, .. }, .. }
            if signature.return_type() == "String[]"));
        assert!(matches!(kinds[9], StmtKind::Return(Some(Operand::Var(_)))));
        assert_eq!(AccessPath::field("a", "f").to_string(), "a.f");
    }

    #[test]
    fn errors() {
        let undeclared = parse_program("fn void main() {\n  x = y;\n}").unwrap_err();
        assert_eq!(
            undeclared,
            LangError::UndeclaredVariable {
                pos: Pos { line: 2, col: 7 },
                name: "y".into()
            }
        );
        let dup = parse_program("fn void f() {\n}\nfn void f() {\n}").unwrap_err();
        assert!(matches!(dup, LangError::DuplicateFunction { pos, .. } if pos.line == 3));
        let two = parse_program("fn void main() {\n  skip; skip;\n}").unwrap_err();
        assert!(matches!(two, LangError::Syntax { pos, .. } if pos == Pos { line: 2, col: 9 }));
        let arity = parse_program("fn void main() {\n  call void f(int)();\n}").unwrap_err();
        assert!(matches!(arity, LangError::Syntax { .. }));
        assert_eq!(parse_program("// nothing").unwrap_err(), LangError::EmptyProgram);
        let kw = parse_program("fn void main() {\n  let if = 1;\n}").unwrap_err();
        assert!(matches!(kw, LangError::Syntax { .. }));
    }

    #[test]
    fn entry_selection() {
        let p = parse_program("fn void a() {\n}\nfn void main() {\n}").unwrap();
        assert_eq!(p.entry, "main");
        assert_eq!(p.clone().with_entry("a").unwrap().entry, "a");
        assert!(p.with_entry("zzz").is_err());
    }
}
