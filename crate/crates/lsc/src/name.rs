//! Variable names: a base identifier plus a freshness tag.

use std::fmt;
use std::sync::Arc;

/// A variable name. Tag 0 is a source-level name; positive tags are
/// produced by freshening and print as `base#tag`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    base: Arc<str>,
    tag: u32,
}

impl Name {
    pub fn new(base: impl AsRef<str>) -> Name {
        Name { base: Arc::from(base.as_ref()), tag: 0 }
    }

    pub fn with_tag(base: impl AsRef<str>, tag: u32) -> Name {
        Name { base: Arc::from(base.as_ref()), tag }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn tag(&self) -> u32 {
        self.tag
    }

    /// Same base, different tag.
    pub fn retag(&self, tag: u32) -> Name {
        Name { base: self.base.clone(), tag }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}#{}", self.base, self.tag)
        }
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Smallest positive tag on `base` that avoids every name in `avoid`.
///
/// Deterministic: the same inputs always yield the same name. Reduction
/// and substitution both freshen through this, which is what makes the
/// linear replay of a beta step land on the substitution result exactly.
pub fn fresh_avoiding<'a>(base: &str, avoid: impl Iterator<Item = &'a Name> + Clone) -> Name {
    let mut tag = 1u32;
    loop {
        if !avoid.clone().any(|n| n.base() == base && n.tag() == tag) {
            return Name::with_tag(base, tag);
        }
        tag += 1;
    }
}
