use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::flow::{MethodSet, TaintFlowQuery};
use super::method::MethodSpec;
use super::ModelError;

/// All named declarations of a query specification, after imports have been
/// merged in. Names are unique across the three maps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryRoot {
    pub method_specs: BTreeMap<String, MethodSpec>,
    pub method_sets: BTreeMap<String, MethodSet>,
    pub queries: BTreeMap<String, TaintFlowQuery>,
    pub imports: Vec<String>,
}

impl QueryRoot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.method_specs.contains_key(name)
            || self.method_sets.contains_key(name)
            || self.queries.contains_key(name)
    }

    pub fn add_method(&mut self, name: &str, spec: MethodSpec) -> Result<(), ModelError> {
        self.claim(name)?;
        self.method_specs.insert(name.to_string(), spec);
        Ok(())
    }

    /// Registers a set under its own name.
    pub fn add_set(&mut self, set: MethodSet) -> Result<(), ModelError> {
        self.claim(set.name())?;
        self.method_sets.insert(set.name().to_string(), set);
        Ok(())
    }

    pub fn add_query(&mut self, name: &str, query: TaintFlowQuery) -> Result<(), ModelError> {
        self.claim(name)?;
        self.queries.insert(name.to_string(), query);
        Ok(())
    }

    fn claim(&self, name: &str) -> Result<(), ModelError> {
        if self.contains(name) {
            Err(ModelError::DuplicateName {
                name: name.to_string(),
            })
        } else {
            Ok(())
        }
    }
}
