use std::fmt;
use std::hash::{Hash, Hasher};

/// A stamped identifier. Equality and hashing use the stamp only.
#[derive(Clone, Debug)]
pub struct Ident {
    pub name: String,
    pub stamp: u32,
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.stamp == other.stamp
    }
}

impl Eq for Ident {}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.stamp.hash(state);
    }
}

impl PartialOrd for Ident {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ident {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.stamp.cmp(&other.stamp)
    }
}

impl Ident {
    /// `name/stamp`, as used in diagnostics.
    pub fn with_stamp(&self) -> String {
        format!("{}/{}", self.name, self.stamp)
    }

    pub fn is_hidden(&self) -> bool {
        Ident::is_hidden_name(&self.name)
    }

    pub fn is_hidden_name(name: &str) -> bool {
        name.contains('#')
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Issues stamps for one compilation session, starting at 1.
#[derive(Debug)]
pub struct Stamper {
    next: u32,
}

impl Default for Stamper {
    fn default() -> Self {
        Stamper { next: 1 }
    }
}

impl Stamper {
    pub fn fresh(&mut self, name: &str) -> Ident {
        let stamp = self.next;
        self.next += 1;
        Ident {
            name: name.to_string(),
            stamp,
        }
    }

    /// An ident named `base#stamp`, which no program can spell.
    pub fn fresh_hidden(&mut self, base: &str) -> Ident {
        let mut id = self.fresh(base);
        id.name = format!("{base}#{}", id.stamp);
        id
    }

    /// The stamp the next call to `fresh` will use.
    pub fn peek(&self) -> u32 {
        self.next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamps_start_at_one() {
        let mut s = Stamper::default();
        let a = s.fresh("t");
        let b = s.fresh("t");
        assert_eq!((a.name.as_str(), a.stamp), ("t", 1));
        assert_eq!((b.name.as_str(), b.stamp), ("t", 2));
        assert_ne!(a, b);
    }

    #[test]
    fn equality_ignores_names() {
        let a = Ident { name: "a".into(), stamp: 3 };
        let b = Ident { name: "b".into(), stamp: 3 };
        assert_eq!(a, b);
    }

    #[test]
    fn renderings() {
        let mut s = Stamper::default();
        for _ in 0..6 {
            s.fresh("x");
        }
        let m = s.fresh_hidden("M");
        assert_eq!(m.to_string(), "M#7");
        assert!(m.is_hidden());
        let t = Ident { name: "t".into(), stamp: 89 };
        assert_eq!(t.with_stamp(), "t/89");
    }
}
