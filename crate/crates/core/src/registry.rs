//! Name-keyed registries for interchangeable strategies.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Anything that can be registered needs a stable name.
pub trait Named {
    fn name(&self) -> &str;
}

/// A map from names to shared trait objects.
pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: BTreeMap<String, Arc<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Insert an entry, replacing any previous one with the same name.
    pub fn register(&mut self, entry: Arc<T>) {
        self.entries.insert(entry.name().to_string(), entry);
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: self.kind,
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
