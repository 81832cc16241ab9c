//! Parsing of catalog names such as `wedge 2`, `wedge(2)` or `linear 1, -0.5`.

use crate::{Error, Result};

/// A catalog entry name with its numeric arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSpec {
    pub name: String,
    pub args: Vec<f64>,
}

impl CatalogSpec {
    pub fn parse(kind: &'static str, text: &str) -> Result<Self> {
        let text = text.trim();
        let split = text
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(text.len());
        let (name, rest) = text.split_at(split);
        if name.is_empty() {
            return Err(Error::Config(format!("empty {kind} name in `{text}`")));
        }
        let mut rest = rest.trim();
        if let Some(r) = rest.strip_prefix(':') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('(') {
            rest = r.trim_end().strip_suffix(')').ok_or_else(|| {
                Error::Config(format!("unbalanced parenthesis in {kind} `{text}`"))
            })?;
        }
        let args = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::Config(format!("bad numeric argument `{t}` in {kind} `{text}`"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_ascii_lowercase(),
            args,
        })
    }

    /// Argument `i`, or `default` if absent.
    pub fn arg(&self, i: usize, default: f64) -> f64 {
        self.args.get(i).copied().unwrap_or(default)
    }

    /// Rejects more than `max` arguments.
    pub fn expect_at_most(&self, kind: &str, max: usize) -> Result<()> {
        if self.args.len() > max {
            return Err(Error::Config(format!(
                "{kind} `{}` takes at most {max} arguments, got {}",
                self.name,
                self.args.len()
            )));
        }
        Ok(())
    }

    pub fn expect_exactly(&self, kind: &str, n: usize) -> Result<()> {
        if self.args.len() != n {
            return Err(Error::Config(format!(
                "{kind} `{}` takes {n} arguments, got {}",
                self.name,
                self.args.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn unknown(kind: &'static str, name: &str, valid: &[&str]) -> Error {
    Error::UnknownCatalog {
        kind,
        name: name.to_string(),
        valid: valid.join(", "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_spellings() {
        for s in ["wedge 2", "wedge(2)", "wedge: 2", "  wedge   2 ", "WEDGE 2"] {
            let c = CatalogSpec::parse("graph", s).unwrap();
            assert_eq!(c.name, "wedge");
            assert_eq!(c.args, vec![2.0]);
        }
        let c = CatalogSpec::parse("graph", "linear(1, -0.5)").unwrap();
        assert_eq!(c.args, vec![1.0, -0.5]);
        assert!(CatalogSpec::parse("graph", "flat").unwrap().args.is_empty());
    }

    #[test]
    fn rejected_spellings() {
        for s in ["", "(2)", "wedge(2", "wedge x", "wedge nan", "wedge inf"] {
            assert!(CatalogSpec::parse("graph", s).is_err(), "{s}");
        }
    }
}
