use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::ModelError;

/// A method signature `<ret> <name>(<t1>, ..., <tn>)`.
///
/// Signatures are stored normalized: tokens carry no surrounding whitespace,
/// so two signatures that differ only in spacing compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodSignature {
    return_type: String,
    name: String,
    param_types: Vec<String>,
}

impl MethodSignature {
    pub fn new<S: Into<String>>(
        return_type: S,
        name: S,
        param_types: impl IntoIterator<Item = S>,
    ) -> Result<Self, ModelError> {
        let sig = MethodSignature {
            return_type: return_type.into(),
            name: name.into(),
            param_types: param_types.into_iter().map(Into::into).collect(),
        };
        let raw = sig.to_string();
        if !is_type_token(&sig.return_type) {
            return Err(malformed(&raw, "invalid return type"));
        }
        if !is_identifier(&sig.name) {
            return Err(malformed(&raw, "invalid method name"));
        }
        if sig.param_types.iter().any(|t| !is_type_token(t)) {
            return Err(malformed(&raw, "invalid parameter type"));
        }
        Ok(sig)
    }

    pub fn return_type(&self) -> &str {
        &self.return_type
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param_types(&self) -> &[String] {
        &self.param_types
    }

    pub fn arity(&self) -> usize {
        self.param_types.len()
    }
}

/// Parses `<ret> <name>(<t1>, ..., <tn>)`, tolerating arbitrary whitespace
/// around every token (`"String encodeHTML (String)"` is accepted).
pub fn parse_signature(raw: &str) -> Result<MethodSignature, ModelError> {
    let open = raw
        .find('(')
        .ok_or_else(|| malformed(raw, "missing '('"))?;
    let close = raw
        .rfind(')')
        .ok_or_else(|| malformed(raw, "missing ')'"))?;
    if close < open {
        return Err(malformed(raw, "')' before '('"));
    }
    if !raw[close + 1..].trim().is_empty() {
        return Err(malformed(raw, "trailing text after ')'"));
    }

    let mut head = raw[..open].split_whitespace();
    let return_type = head
        .next()
        .ok_or_else(|| malformed(raw, "missing return type"))?;
    let name = head
        .next()
        .ok_or_else(|| malformed(raw, "empty method name"))?;
    if head.next().is_some() {
        return Err(malformed(raw, "unexpected token before '('"));
    }
    if !is_type_token(return_type) {
        return Err(malformed(raw, "invalid return type"));
    }
    if !is_identifier(name) {
        return Err(malformed(raw, "invalid method name"));
    }

    let inner = &raw[open + 1..close];
    let mut param_types = Vec::new();
    if !inner.trim().is_empty() {
        for token in inner.split(',') {
            let token = token.trim();
            if token.is_empty() {
                return Err(malformed(raw, "empty parameter type"));
            }
            if !is_type_token(token) {
                return Err(malformed(raw, "invalid parameter type"));
            }
            param_types.push(token.to_string());
        }
    }

    Ok(MethodSignature {
        return_type: return_type.to_string(),
        name: name.to_string(),
        param_types,
    })
}

impl FromStr for MethodSignature {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_signature(s)
    }
}

impl fmt::Display for MethodSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}(", self.return_type, self.name)?;
        for (i, ty) in self.param_types.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(ty)?;
        }
        f.write_str(")")
    }
}

fn malformed(raw: &str, reason: &'static str) -> ModelError {
    ModelError::MalformedSignature {
        raw: raw.to_string(),
        reason,
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

/// An identifier optionally followed by one or more `[]` suffixes.
pub(crate) fn is_type_token(s: &str) -> bool {
    let mut base = s;
    while let Some(stripped) = base.strip_suffix("[]") {
        base = stripped;
    }
    is_identifier(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    #[test]
    fn example_signatures() {
        let sig = parse_signature("String getParameter(String)").unwrap();
        assert_eq!(sig.return_type(), "String");
        assert_eq!(sig.name(), "getParameter");
        assert_eq!(sig.param_types(), &["String".to_string()]);

        let sig = parse_signature("String encodeHTML (String)").unwrap();
        assert_eq!(sig.name(), "encodeHTML");
        assert_eq!(sig.to_string(), "String encodeHTML(String)");
    }

    #[test]
    fn zero_arity() {
        let sig = parse_signature("void f()").unwrap();
        assert_eq!((sig.return_type(), sig.name(), sig.arity()), ("void", "f", 0));
    }

    #[test]
    fn whitespace_is_normalized() {
        let sig = parse_signature("int  g( A ,B )").unwrap();
        assert_eq!(sig, MethodSignature::new("int", "g", vec!["A", "B"]).unwrap());
    }

    #[test]
    fn array_types() {
        let sig = parse_signature("byte[] read(byte[], int)").unwrap();
        assert_eq!(sig.return_type(), "byte[]");
        assert_eq!(sig.param_types()[0], "byte[]");
    }

    #[test]
    fn malformed_inputs() {
        for raw in [
            "String getParameter",
            "String getParameter(String",
            "String (String)",
            "getParameter(String)",
            "String f(String,)",
            "String f(,)",
            "String f(A B)",
            "String f() x",
            "a b c()",
            "1x f()",
        ] {
            let err = parse_signature(raw).unwrap_err();
            assert!(
                matches!(err, ModelError::MalformedSignature { .. }),
                "{raw}: {err:?}"
            );
        }
    }

    #[test]
    fn display_round_trips() {
        for raw in ["void f()", "A b(C, D, E[])", "X y(Z)"] {
            let sig = parse_signature(raw).unwrap();
            assert_eq!(parse_signature(&format!("{sig}")).unwrap(), sig);
        }
    }
}
