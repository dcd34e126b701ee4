use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;

use super::signature::{parse_signature, MethodSignature};
use super::ModelError;

/// Direction in which a sensitive value propagates relative to the call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "IN",
            Direction::Out => "OUT",
        })
    }
}

/// Where a sensitive value lives at a call site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueLocation {
    Receiver,
    Param(usize),
    Return,
}

impl fmt::Display for ValueLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueLocation::Receiver => f.write_str("RECEIVER"),
            ValueLocation::Param(i) => write!(f, "PARAM({i})"),
            ValueLocation::Return => f.write_str("RETURN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SensitiveValue {
    pub direction: Direction,
    pub location: ValueLocation,
}

impl SensitiveValue {
    pub const fn new(direction: Direction, location: ValueLocation) -> Self {
        SensitiveValue {
            direction,
            location,
        }
    }

    pub const fn input(location: ValueLocation) -> Self {
        Self::new(Direction::In, location)
    }

    pub const fn output(location: ValueLocation) -> Self {
        Self::new(Direction::Out, location)
    }
}

impl fmt::Display for SensitiveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.direction, self.location)
    }
}

/// A sensitive method: a signature plus the values that flow in or out of
/// calls to it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodSpec {
    signature: MethodSignature,
    values: BTreeSet<SensitiveValue>,
}

impl MethodSpec {
    /// Builds a spec from explicit values, checking the same invariants the
    /// chain builder enforces.
    pub fn new(
        signature: MethodSignature,
        values: impl IntoIterator<Item = SensitiveValue>,
    ) -> Result<Self, ModelError> {
        let mut set = BTreeSet::new();
        for value in values {
            check_value(&signature, value)?;
            if !set.insert(value) {
                return Err(ModelError::IllegalChain {
                    signature: signature.clone(),
                    reason: "duplicate sensitive value",
                });
            }
        }
        if set.is_empty() {
            return Err(ModelError::IllegalChain {
                signature,
                reason: "no in() or out() section",
            });
        }
        Ok(MethodSpec {
            signature,
            values: set,
        })
    }

    pub fn signature(&self) -> &MethodSignature {
        &self.signature
    }

    pub fn values(&self) -> impl Iterator<Item = SensitiveValue> + '_ {
        self.values.iter().copied()
    }

    pub fn in_values(&self) -> impl Iterator<Item = ValueLocation> + '_ {
        self.located(Direction::In)
    }

    pub fn out_values(&self) -> impl Iterator<Item = ValueLocation> + '_ {
        self.located(Direction::Out)
    }

    pub fn has(&self, direction: Direction) -> bool {
        self.values.iter().any(|v| v.direction == direction)
    }

    /// Copy keeping only the values with the given direction, or `None` when
    /// nothing would remain.
    pub fn restricted(&self, direction: Direction) -> Option<MethodSpec> {
        let values: BTreeSet<_> = self
            .values
            .iter()
            .copied()
            .filter(|v| v.direction == direction)
            .collect();
        (!values.is_empty()).then(|| MethodSpec {
            signature: self.signature.clone(),
            values,
        })
    }

    fn located(&self, direction: Direction) -> impl Iterator<Item = ValueLocation> + '_ {
        self.values
            .iter()
            .filter(move |v| v.direction == direction)
            .map(|v| v.location)
    }
}

fn check_value(signature: &MethodSignature, value: SensitiveValue) -> Result<(), ModelError> {
    match value.location {
        ValueLocation::Return if value.direction == Direction::In => Err(ModelError::IllegalChain {
            signature: signature.clone(),
            reason: "return_value() is only allowed after out()",
        }),
        ValueLocation::Param(i) if i >= signature.arity() => Err(ModelError::IllegalChain {
            signature: signature.clone(),
            reason: "param index out of range",
        }),
        _ => Ok(()),
    }
}

/// Entry point of the method chain: `method("String getParameter(String)")`.
pub fn method(signature: &str) -> MethodBuilder {
    MethodBuilder {
        state: parse_signature(signature).map(|sig| Chain {
            signature: sig,
            section: None,
            pending: false,
            values: BTreeSet::new(),
        }),
    }
}

/// Fluent builder for a [`MethodSpec`]. The first chaining error is kept and
/// reported by [`MethodBuilder::finish`].
#[derive(Debug, Clone)]
#[must_use]
pub struct MethodBuilder {
    state: Result<Chain, ModelError>,
}

#[derive(Debug, Clone)]
struct Chain {
    signature: MethodSignature,
    section: Option<Direction>,
    // a section was opened and nothing has been selected in it yet
    pending: bool,
    values: BTreeSet<SensitiveValue>,
}

impl MethodBuilder {
    pub fn out(self) -> Self {
        self.open(Direction::Out)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn r#in(self) -> Self {
        self.open(Direction::In)
    }

    /// Alias for [`MethodBuilder::r#in`].
    pub fn input(self) -> Self {
        self.open(Direction::In)
    }

    pub fn return_value(self) -> Self {
        self.select(ValueLocation::Return)
    }

    pub fn this_object(self) -> Self {
        self.select(ValueLocation::Receiver)
    }

    pub fn param(self, index: usize) -> Self {
        self.select(ValueLocation::Param(index))
    }

    pub fn finish(self) -> Result<MethodSpec, ModelError> {
        let chain = self.state?;
        if chain.section.is_none() {
            return Err(ModelError::IllegalChain {
                signature: chain.signature,
                reason: "no in() or out() section",
            });
        }
        if chain.pending {
            return Err(ModelError::IllegalChain {
                signature: chain.signature,
                reason: "in()/out() must be followed by at least one value",
            });
        }
        Ok(MethodSpec {
            signature: chain.signature,
            values: chain.values,
        })
    }

    fn open(self, direction: Direction) -> Self {
        self.update(|chain| {
            if chain.pending {
                return Err("in()/out() must be followed by at least one value");
            }
            chain.section = Some(direction);
            chain.pending = true;
            Ok(())
        })
    }

    fn select(self, location: ValueLocation) -> Self {
        self.update(|chain| {
            let direction = chain
                .section
                .ok_or("a value must follow in() or out()")?;
            let value = SensitiveValue::new(direction, location);
            check_value(&chain.signature, value).map_err(|e| match e {
                ModelError::IllegalChain { reason, .. } => reason,
                _ => "invalid value",
            })?;
            if !chain.values.insert(value) {
                return Err("duplicate sensitive value");
            }
            chain.pending = false;
            Ok(())
        })
    }

    fn update(self, f: impl FnOnce(&mut Chain) -> Result<(), &'static str>) -> Self {
        let state = self.state.and_then(|mut chain| match f(&mut chain) {
            Ok(()) => Ok(chain),
            Err(reason) => Err(ModelError::IllegalChain {
                signature: chain.signature,
                reason,
            }),
        });
        MethodBuilder { state }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.signature)?;
        for (i, value) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{value}")?;
        }
        f.write_str("]")
    }
}

/// Renders the chain steps (`.in().param(0).out().return_value()`) that
/// rebuild this spec.
pub(crate) fn chain_suffix(spec: &MethodSpec) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    let mut section = None;
    for value in spec.values() {
        if section != Some(value.direction) {
            out.push_str(match value.direction {
                Direction::In => ".in()",
                Direction::Out => ".out()",
            });
            section = Some(value.direction);
        }
        match value.location {
            ValueLocation::Receiver => out.push_str(".this_object()"),
            ValueLocation::Return => out.push_str(".return_value()"),
            ValueLocation::Param(i) => {
                let _ = write!(out, ".param({i})");
            }
        }
    }
    out
}
