use std::collections::BTreeMap;
use std::fmt;

/// A sum of signed terms. Every parsed expression — including the inside of
/// parentheses — has this shape, which keeps printing and re-parsing exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub terms: Vec<Term>,
}

/// A product of factors; juxtaposition multiplies.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub negative: bool,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Tensor { name: String, indices: Vec<String> },
    Number(f64),
    Name(String),
    Group(Box<Expr>),
}

impl Factor {
    /// Index symbols this factor exposes to the enclosing term.
    pub fn visible_indices(&self) -> Vec<String> {
        match self {
            Factor::Tensor { indices, .. } => indices.clone(),
            Factor::Group(inner) => inner.free_indices(),
            Factor::Number(_) | Factor::Name(_) => Vec::new(),
        }
    }
}

impl Term {
    /// Occurrence count of every index symbol in the term.
    pub fn index_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for f in &self.factors {
            for idx in f.visible_indices() {
                *counts.entry(idx).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Indices occurring exactly once, sorted.
    pub fn free_indices(&self) -> Vec<String> {
        self.index_counts().into_iter().filter(|(_, c)| *c == 1).map(|(i, _)| i).collect()
    }

    pub fn summed_indices(&self) -> Vec<String> {
        self.index_counts().into_iter().filter(|(_, c)| *c == 2).map(|(i, _)| i).collect()
    }
}

impl Expr {
    /// Free indices, sorted (terms agree after a successful parse).
    pub fn free_indices(&self) -> Vec<String> {
        self.terms.first().map(Term::free_indices).unwrap_or_default()
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Tensor { name, indices } => write!(f, "{name}[{}]", indices.join(",")),
            Factor::Number(x) => write!(f, "{x}"),
            Factor::Name(name) => f.write_str(name),
            Factor::Group(inner) => write!(f, "({inner})"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, term) in self.terms.iter().enumerate() {
            match (i, term.negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}
