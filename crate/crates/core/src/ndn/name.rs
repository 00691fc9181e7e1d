use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::NameError;

/// Hierarchical content name, e.g. `/provider/song3/chunk10`.
///
/// Components live behind an `Arc` so packets can be copied to every
/// receiver of a broadcast without reallocating.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    components: Arc<[String]>,
}

impl Name {
    pub fn from_components<I, S>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let components: Vec<String> = components.into_iter().map(Into::into).collect();
        if components.is_empty() {
            return Err(NameError::Malformed(String::new()));
        }
        if components.iter().any(String::is_empty) {
            return Err(NameError::EmptyComponent(components.join("/")));
        }
        Ok(Name {
            components: components.into(),
        })
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.len() <= other.len()
            && self
                .components
                .iter()
                .zip(other.components.iter())
                .all(|(a, b)| a == b)
    }

    /// The first `len` components. Panics if `len` is 0 or exceeds the name.
    pub fn prefix(&self, len: usize) -> Name {
        assert!(
            len >= 1 && len <= self.len(),
            "prefix length {len} out of range"
        );
        if len == self.len() {
            return self.clone();
        }
        Name {
            components: self.components[..len].to_vec().into(),
        }
    }

    pub fn append(&self, component: &str) -> Result<Name, NameError> {
        Name::from_components(
            self.components
                .iter()
                .cloned()
                .chain(std::iter::once(component.to_string())),
        )
    }

    /// Length of the URI form, used for frame sizing.
    pub fn wire_len(&self) -> usize {
        self.components.iter().map(|c| c.len() + 1).sum()
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix('/')
            .ok_or_else(|| NameError::Malformed(s.to_string()))?;
        if rest.is_empty() {
            return Err(NameError::Malformed(s.to_string()));
        }
        let parts: Vec<&str> = rest.split('/').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(NameError::EmptyComponent(s.to_string()));
        }
        Name::from_components(parts)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.components.iter() {
            write!(f, "/{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self})")
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
