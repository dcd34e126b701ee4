use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Declaration, Participant, QueryFile, QueryStep, TextError};
use crate::lex::{tokenize, Cursor, Pos, Tok, Token};
use crate::query::{method, Location, MethodSpec};

pub fn parse_query_file(source: &str) -> Result<QueryFile, TextError> {
    parse_query_file_at("", source)
}

/// Parses `source`, tagging errors and the resulting file with `path`.
pub fn parse_query_file_at(path: &str, source: &str) -> Result<QueryFile, TextError> {
    let tokens = tokenize(source).map_err(|e| TextError::Syntax {
        path: path.to_string(),
        pos: e.pos,
        message: e.message.to_string(),
    })?;
    let mut parser = Parser {
        path,
        cur: Cursor::new(tokens, source),
    };
    let mut declarations = Vec::new();
    let mut names = BTreeSet::new();
    while !parser.cur.is_done() {
        let decl = parser.declaration()?;
        if let Some(name) = decl.name() {
            if !names.insert(name.to_string()) {
                return Err(TextError::DuplicateName {
                    path: path.to_string(),
                    name: name.to_string(),
                });
            }
        }
        declarations.push(decl);
    }
    Ok(QueryFile {
        path: path.to_string(),
        declarations,
    })
}

struct Parser<'a> {
    path: &'a str,
    cur: Cursor,
}

impl Parser<'_> {
    fn declaration(&mut self) -> Result<Declaration, TextError> {
        let pos = self.cur.pos();
        let keyword = self.ident("a declaration")?;
        let decl = match keyword.as_str() {
            "import" => {
                let path = self.string("an import path")?;
                Declaration::Import { path, pos }
            }
            "Method" => {
                let name = self.binding()?;
                let spec = self.method_expr()?;
                Declaration::Method { name, pos, spec }
            }
            "MethodSet" => {
                let name = self.binding()?;
                self.constructor(&["method_set"], "MethodSet")?;
                self.punct(')')?;
                let mut members = Vec::new();
                while self.cur.eat_punct('.') {
                    let step_pos = self.cur.pos();
                    let step = self.ident("a chain step")?;
                    if step != "add" {
                        return Err(self.unknown_step(step_pos, step));
                    }
                    self.punct('(')?;
                    members.push(self.participant()?);
                    self.punct(')')?;
                }
                Declaration::MethodSet { name, pos, members }
            }
            "TaintFlowQuery" => {
                let name = self.binding()?;
                self.constructor(&["taint_flow_query"], "TaintFlowQuery")?;
                self.punct(')')?;
                let mut steps = Vec::new();
                while self.cur.eat_punct('.') {
                    steps.push(self.query_step()?);
                }
                if steps.is_empty() {
                    return Err(self.syntax(pos, "query declaration has no steps"));
                }
                Declaration::Query { name, pos, steps }
            }
            other => {
                return Err(self.syntax(
                    pos,
                    &format!("expected `import`, `Method`, `MethodSet` or `TaintFlowQuery`, found `{other}`"),
                ))
            }
        };
        self.punct(';')?;
        Ok(decl)
    }

    fn binding(&mut self) -> Result<String, TextError> {
        let name = self.ident("a declaration name")?;
        self.punct('=')?;
        Ok(name)
    }

    /// `ctor(` or `new Class(`, leaving the cursor after `(`.
    fn constructor(&mut self, ctors: &[&str], class: &str) -> Result<(), TextError> {
        let pos = self.cur.pos();
        let word = self.ident("a constructor")?;
        let ok = if word == "new" {
            self.ident("a class name")? == class
        } else {
            ctors.contains(&word.as_str())
        };
        if !ok {
            return Err(self.syntax(pos, &format!("expected `{}(`", ctors[0])));
        }
        self.punct('(')
    }

    fn method_expr(&mut self) -> Result<MethodSpec, TextError> {
        let pos = self.cur.pos();
        self.constructor(&["method"], "Method")?;
        let signature = self.string("a method signature")?;
        self.punct(')')?;
        let mut builder = method(&signature);
        while self.cur.eat_punct('.') {
            let step_pos = self.cur.pos();
            let step = self.ident("a chain step")?;
            self.punct('(')?;
            builder = match step.as_str() {
                "in" => builder.r#in(),
                "out" => builder.out(),
                "return_value" | "return" => builder.return_value(),
                "this_object" | "thisObject" => builder.this_object(),
                "param" => {
                    let index = self.index()?;
                    builder.param(index)
                }
                _ => return Err(self.unknown_step(step_pos, step)),
            };
            self.punct(')')?;
        }
        builder.finish().map_err(|e| self.syntax(pos, &e.to_string()))
    }

    fn participant(&mut self) -> Result<Participant, TextError> {
        let pos = self.cur.pos();
        let is_inline = match (self.cur.peek(), self.cur.peek_at(1)) {
            (Some(Token { tok: Tok::Ident(w), .. }), Some(Token { tok: Tok::Punct('('), .. })) => w == "method",
            (Some(Token { tok: Tok::Ident(w), .. }), Some(Token { tok: Tok::Ident(c), .. })) => {
                w == "new" && c == "Method"
            }
            _ => false,
        };
        if is_inline {
            return Ok(Participant::Inline(self.method_expr()?));
        }
        let name = self.ident("a method or method set name")?;
        Ok(Participant::Name { name, pos })
    }

    fn query_step(&mut self) -> Result<QueryStep, TextError> {
        let pos = self.cur.pos();
        let step = self.ident("a query step")?;
        self.punct('(')?;
        let parsed = match step.as_str() {
            "from" => QueryStep::From(self.participant()?),
            "through" => QueryStep::Through(self.participant()?),
            "not_through" | "notThrough" => QueryStep::NotThrough(self.participant()?),
            "to" => QueryStep::To(self.participant()?),
            "and" => QueryStep::And,
            "report" => QueryStep::Report(self.string("a report message")?),
            "at" => {
                let loc_pos = self.cur.pos();
                let mut word = self.ident("a location")?;
                if word == "Location" {
                    self.punct('.')?;
                    word = self.ident("a location")?;
                }
                let loc = Location::parse(&word).ok_or_else(|| {
                    self.syntax(loc_pos, "expected SOURCE, SINK or SOURCEANDSINK")
                })?;
                QueryStep::At(loc)
            }
            _ => return Err(self.unknown_step(pos, step)),
        };
        self.punct(')')?;
        Ok(parsed)
    }

    fn index(&mut self) -> Result<usize, TextError> {
        let pos = self.cur.pos();
        match self.cur.next() {
            Some(Token { tok: Tok::Int(i), .. }) if i >= 0 => Ok(i as usize),
            _ => Err(self.syntax(pos, "expected a parameter index")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, TextError> {
        let pos = self.cur.pos();
        match self.cur.next() {
            Some(Token { tok: Tok::Ident(s), .. }) => Ok(s),
            Some(t) => Err(self.syntax(pos, &format!("expected {what}, found {}", t.tok))),
            None => Err(self.syntax(pos, &format!("expected {what}, found end of file"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, TextError> {
        let pos = self.cur.pos();
        match self.cur.next() {
            Some(Token { tok: Tok::Str(s), .. }) => Ok(s),
            Some(t) => Err(self.syntax(pos, &format!("expected {what}, found {}", t.tok))),
            None => Err(self.syntax(pos, &format!("expected {what}, found end of file"))),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), TextError> {
        let pos = self.cur.pos();
        if self.cur.eat_punct(c) {
            return Ok(());
        }
        let found = match self.cur.peek() {
            Some(t) => format!("{}", t.tok),
            None => "end of file".to_string(),
        };
        Err(self.syntax(pos, &format!("expected `{c}`, found {found}")))
    }

    fn syntax(&self, pos: Pos, message: &str) -> TextError {
        TextError::Syntax {
            path: self.path.to_string(),
            pos,
            message: message.to_string(),
        }
    }

    fn unknown_step(&self, pos: Pos, step: String) -> TextError {
        TextError::UnknownChainStep {
            path: self.path.to_string(),
            pos,
            step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{SensitiveValue, ValueLocation};

    #[test]
    fn empty_file() {
        assert!(parse_query_file("").unwrap().declarations.is_empty());
        assert!(parse_query_file("// only a comment\n").unwrap().declarations.is_empty());
    }

    #[test]
    fn chain_ending_after_out_is_rejected() {
        let err = parse_query_file(r#"Method m = method("void f()").out();"#).unwrap_err();
        match err {
            TextError::Syntax { pos, .. } => assert_eq!(pos.line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_chain_step() {
        let err = parse_query_file(r#"Method m = method("void f(int)").in().parm(0);"#).unwrap_err();
        assert!(matches!(err, TextError::UnknownChainStep { ref step, .. } if step == "parm"));
        let err = parse_query_file("TaintFlowQuery q = taint_flow_query().via(x);").unwrap_err();
        assert!(matches!(err, TextError::UnknownChainStep { .. }));
    }

    #[test]
    fn aliases() {
        let file = parse_query_file(
            r#"Method m = new Method("Obj put(String, String)").in().param(1).out().thisObject();
               Method r = method("String g()").out().return();
               TaintFlowQuery q = new TaintFlowQuery().from(r).notThrough(m).to(m).report("x").at(Location.SINK);"#,
        )
        .unwrap();
        assert_eq!(file.declarations.len(), 3);
        match &file.declarations[0] {
            Declaration::Method { spec, .. } => assert!(spec
                .values()
                .any(|v| v == SensitiveValue::output(ValueLocation::Receiver))),
            other => panic!("{other:?}"),
        }
        match &file.declarations[2] {
            Declaration::Query { steps, .. } => {
                assert_eq!(steps.last(), Some(&QueryStep::At(Location::Sink)));
                assert!(matches!(steps[1], QueryStep::NotThrough(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_names_in_one_file() {
        let err = parse_query_file(
            r#"Method a = method("String g()").out().return_value();
               Method a = method("String h()").out().return_value();"#,
        )
        .unwrap_err();
        assert!(matches!(err, TextError::DuplicateName { .. }));
    }

    #[test]
    fn error_positions() {
        let err = parse_query_file("Method a = method(\"String g()\")\n  .out().return_value()\n  x").unwrap_err();
        match err {
            TextError::Syntax { pos, .. } => assert_eq!(pos, Pos { line: 3, col: 3 }),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inline_participants() {
        let file = parse_query_file(
            r#"TaintFlowQuery q = taint_flow_query()
                 .from(method("String g()").out().return_value())
                 .to(method("void s(String)").in().param(0))
                 .report("m");"#,
        )
        .unwrap();
        match &file.declarations[0] {
            Declaration::Query { steps, .. } => {
                assert!(matches!(steps[0], QueryStep::From(Participant::Inline(_))));
                assert!(matches!(steps[1], QueryStep::To(Participant::Inline(_))));
            }
            other => panic!("{other:?}"),
        }
    }
}
