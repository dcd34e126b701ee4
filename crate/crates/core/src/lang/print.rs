use alloc::string::String;
use core::fmt::Write;

use super::{Call, Line, Program, Stmt, StmtKind};

/// Renders `program` so that every statement lands on its original line.
/// Closing braces move onto their own line only when a free line exists.
pub fn print_program(program: &Program) -> String {
    let mut p = Printer {
        out: String::new(),
        line: 1,
        fresh: true,
    };
    for (i, f) in program.functions.iter().enumerate() {
        let next = program.functions.get(i + 1).map(|g| g.line);
        p.goto(f.line, 0);
        let params: alloc::vec::Vec<String> = f
            .signature
            .param_types()
            .iter()
            .zip(&f.params)
            .map(|(t, n)| alloc::format!("{t} {n}"))
            .collect();
        let _ = write!(
            p.out,
            "fn {} {}({}) {{",
            f.signature.return_type(),
            f.signature.name(),
            params.join(", ")
        );
        p.fresh = false;
        p.block(&f.body, 1, next);
    }
    p.out.push('\n');
    p.out
}

struct Printer {
    out: String,
    line: Line,
    fresh: bool,
}

impl Printer {
    fn goto(&mut self, line: Line, depth: usize) {
        if line > self.line {
            for _ in self.line..line {
                self.out.push('\n');
            }
            self.line = line;
            self.fresh = true;
        }
        if self.fresh {
            for _ in 0..depth {
                self.out.push_str("  ");
            }
        } else {
            self.out.push(' ');
        }
        self.fresh = false;
    }

    fn close(&mut self, text: &str, depth: usize, next: Option<Line>) {
        let room = next.is_none_or(|n| n > self.line + 1);
        let target = if room { self.line + 1 } else { self.line };
        self.goto(target, depth);
        self.out.push_str(text);
    }

    fn block(&mut self, stmts: &[Stmt], depth: usize, next: Option<Line>) {
        for (i, s) in stmts.iter().enumerate() {
            let after = stmts.get(i + 1).map(|t| t.line).or(next);
            self.stmt(s, depth, after);
        }
        self.close("}", depth - 1, next);
    }

    fn stmt(&mut self, s: &Stmt, depth: usize, next: Option<Line>) {
        self.goto(s.line, depth);
        let out = &mut self.out;
        let _ = match &s.kind {
            StmtKind::ConstAssign { target, value } => write!(out, "let {target} = {value};"),
            StmtKind::Assign { target, source } => write!(out, "{target} = {source};"),
            StmtKind::LoadField { target, base, field } => write!(out, "{target} = {base}.{field};"),
            StmtKind::StoreField { base, field, source } => write!(out, "{base}.{field} = {source};"),
            StmtKind::LoadIndex { target, array, index } => write!(out, "{target} = {array}[{index}];"),
            StmtKind::StoreIndex { array, index, source } => write!(out, "{array}[{index}] = {source};"),
            StmtKind::Skip => write!(out, "skip;"),
            StmtKind::Call { result, call } => {
                if let Some(r) = result {
                    let _ = write!(out, "{r} = ");
                }
                write_call(out, call);
                write!(out, ";")
            }
            StmtKind::Return(None) => write!(out, "return;"),
            StmtKind::Return(Some(v)) => write!(out, "return {v};"),
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let _ = write!(out, "if ({cond}) {{");
                if else_block.is_empty() {
                    self.block(then_block, depth + 1, next);
                } else {
                    let else_line = else_block.first().map(|t| t.line);
                    for (i, t) in then_block.iter().enumerate() {
                        let after = then_block.get(i + 1).map(|u| u.line).or(else_line);
                        self.stmt(t, depth + 1, after);
                    }
                    self.close("} else {", depth, else_line);
                    self.block(else_block, depth + 1, next);
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                let _ = write!(out, "while ({cond}) {{");
                self.block(body, depth + 1, next);
                Ok(())
            }
        };
    }
}

fn write_call(out: &mut String, call: &Call) {
    out.push_str("call ");
    if let Some(r) = &call.receiver {
        let _ = write!(out, "{r}.");
    }
    let _ = write!(out, "{}(", call.signature);
    for (i, a) in call.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{a}");
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn running_example_round_trip() {
        let src = include_str!("../../tests/fixtures/password.tl");
        let p = parse_program(src).unwrap();
        let printed = print_program(&p);
        assert_eq!(parse_program(&printed).unwrap(), p);
        assert_eq!(printed.trim_end(), src.trim_end());
    }

    #[test]
    fn dense_lines_keep_braces_inline() {
        let src = "fn void main(bool c) {\n  if (c) {\n    skip;\n  } else {\n    skip;\n  }\n}";
        let p = parse_program(src).unwrap();
        assert_eq!(print_program(&p).trim_end(), src);
        let tight = "fn void main(bool c) { if (c) {\nskip; } else {\nskip; } }";
        let p = parse_program(tight).unwrap();
        assert_eq!(parse_program(&print_program(&p)).unwrap(), p);
    }
}
