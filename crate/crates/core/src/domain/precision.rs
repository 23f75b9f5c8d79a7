//! Per-state and per-program precisions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::lang::{Cfa, LangError, LocId, Var};

/// The set of variables whose values are tracked.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Precision {
    pub tracked: BTreeSet<Var>,
}

impl Precision {
    pub fn new<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        Precision {
            tracked: vars.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tracked.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tracked.len()
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.tracked.contains(x)
    }

    pub fn is_subset(&self, other: &Precision) -> bool {
        self.tracked.is_subset(&other.tracked)
    }

    pub fn union(&self, other: &Precision) -> Precision {
        Precision {
            tracked: self.tracked.union(&other.tracked).cloned().collect(),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.tracked.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

fn empty_precision() -> &'static Arc<Precision> {
    static EMPTY: OnceLock<Arc<Precision>> = OnceLock::new();
    EMPTY.get_or_init(|| Arc::new(Precision::default()))
}

/// Maps each program location to a precision; unlisted locations track nothing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProgramPrecision {
    per_location: BTreeMap<LocId, Arc<Precision>>,
}

impl ProgramPrecision {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every variable tracked at every location.
    pub fn full(cfa: &Cfa) -> Self {
        let all = Arc::new(Precision::new(cfa.variables().keys().cloned()));
        ProgramPrecision {
            per_location: cfa
                .locations()
                .iter()
                .map(|l| (l.id, all.clone()))
                .collect(),
        }
    }

    pub fn at(&self, loc: LocId) -> &Arc<Precision> {
        self.per_location
            .get(&loc)
            .unwrap_or_else(|| empty_precision())
    }

    pub fn insert(&mut self, loc: LocId, precision: Precision) {
        if precision.is_empty() {
            self.per_location.remove(&loc);
        } else {
            self.per_location.insert(loc, Arc::new(precision));
        }
    }

    pub fn add(&mut self, loc: LocId, var: Var) {
        let mut p = Precision::clone(self.at(loc));
        if p.tracked.insert(var) {
            self.per_location.insert(loc, Arc::new(p));
        }
    }

    /// Non-empty entries, in location order.
    pub fn iter(&self) -> impl Iterator<Item = (LocId, &Precision)> {
        self.per_location.iter().map(|(l, p)| (*l, p.as_ref()))
    }

    pub fn is_empty(&self) -> bool {
        self.per_location.is_empty()
    }

    /// Pointwise union.
    pub fn union(&self, other: &ProgramPrecision) -> ProgramPrecision {
        let mut out = self.clone();
        for (loc, p) in other.iter() {
            let merged = out.at(loc).union(p);
            out.insert(loc, merged);
        }
        out
    }

    /// Pointwise inclusion.
    pub fn is_subset(&self, other: &ProgramPrecision) -> bool {
        self.iter().all(|(loc, p)| p.is_subset(other.at(loc)))
    }

    /// Number of (location, variable) pairs.
    pub fn pair_count(&self) -> usize {
        self.per_location.values().map(|p| p.len()).sum()
    }

    /// Largest per-location precision.
    pub fn max_size(&self) -> usize {
        self.per_location
            .values()
            .map(|p| p.len())
            .max()
            .unwrap_or(0)
    }

    /// Every variable tracked somewhere.
    pub fn variables(&self) -> BTreeSet<Var> {
        self.per_location
            .values()
            .flat_map(|p| p.tracked.iter().cloned())
            .collect()
    }

    /// Adds each tracked variable at every location of its scope.
    pub fn scoped(&self, cfa: &Cfa) -> Result<ProgramPrecision, LangError> {
        let mut out = self.clone();
        for var in self.variables() {
            for loc in cfa.scope_of(&var)? {
                out.add(loc, var.clone());
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ProgramPrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (loc, p)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{loc}:{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::load;

    fn vars(names: &[&str]) -> Precision {
        Precision::new(names.iter().map(|n| Var::new(n)))
    }

    #[test]
    fn default_is_empty_everywhere() {
        let pp = ProgramPrecision::empty();
        assert!(pp.at(LocId(7)).is_empty());
        assert_eq!(pp.max_size(), 0);
    }

    #[test]
    fn union_is_pointwise() {
        let mut a = ProgramPrecision::empty();
        a.insert(LocId(1), vars(&["x"]));
        let mut b = ProgramPrecision::empty();
        b.insert(LocId(1), vars(&["y"]));
        b.insert(LocId(2), vars(&["z"]));
        let u = a.union(&b);
        assert_eq!(**u.at(LocId(1)), vars(&["x", "y"]));
        assert_eq!(**u.at(LocId(2)), vars(&["z"]));
        assert!(a.is_subset(&u) && b.is_subset(&u));
        assert!(!u.is_subset(&a));
        assert_eq!(u.pair_count(), 3);
    }

    #[test]
    fn scoping_spreads_locals_over_their_function() {
        let p = load(
            "int g;\nint f(int v) { int w = v; return w; }\nvoid main() { int a = 1; int b = f(a); if (b > a) error(); }",
        )
        .unwrap();
        let mut pp = ProgramPrecision::empty();
        let some_main_loc = p.cfa.locations().last().unwrap().id;
        pp.insert(some_main_loc, vars(&["a"]));
        let callee_loc = p
            .cfa
            .locations()
            .iter()
            .find(|l| l.function == "f")
            .unwrap()
            .id;
        pp.insert(callee_loc, vars(&["f#1::w"]));
        let scoped = pp.scoped(&p.cfa).unwrap();
        for l in p.cfa.locations() {
            assert!(scoped.at(l.id).contains(&Var::new("a")));
            assert_eq!(
                scoped.at(l.id).contains(&Var::new("f#1::w")),
                l.function == "f"
            );
        }
        assert!(ProgramPrecision::empty().scoped(&p.cfa).unwrap().is_empty());
    }
}
