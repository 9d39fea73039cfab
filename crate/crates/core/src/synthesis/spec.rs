use std::fmt;
use std::str::FromStr;

use crate::ordering::DEFAULT_LAMBDA;
use crate::treebank::PosClass;

/// A synthetic language `S[R_N/N, R_V/V]`.
///
/// The directory name grammar is `<sub>`, `<sub>~<rN>@N`, `<sub>~<rV>@V` or
/// `<sub>~<rN>@N~<rV>@V`.
#[derive(Clone, Debug, PartialEq)]
pub struct LanguageSpec {
    pub substrate: String,
    pub superstrate_n: Option<String>,
    pub superstrate_v: Option<String>,
    pub lambda: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("empty language id in {0:?}")]
    EmptyId(String),
    #[error("language id {0:?} may not contain '~' or '@'")]
    BadId(String),
    #[error("malformed superstrate component {0:?} (expected <lang>@N or <lang>@V)")]
    BadComponent(String),
    #[error("superstrate components of {0:?} must be N then V, each at most once")]
    Order(String),
}

fn check_id(id: &str, whole: &str) -> Result<(), SpecError> {
    if id.is_empty() {
        Err(SpecError::EmptyId(whole.to_string()))
    } else if id.contains('~') || id.contains('@') {
        Err(SpecError::BadId(id.to_string()))
    } else {
        Ok(())
    }
}

impl LanguageSpec {
    pub fn new(substrate: &str, superstrate_n: Option<&str>, superstrate_v: Option<&str>) -> Self {
        LanguageSpec {
            substrate: substrate.to_string(),
            superstrate_n: superstrate_n.map(str::to_string),
            superstrate_v: superstrate_v.map(str::to_string),
            lambda: DEFAULT_LAMBDA,
            seed: 0,
        }
    }

    pub fn superstrate(&self, class: PosClass) -> Option<&str> {
        match class {
            PosClass::N => self.superstrate_n.as_deref(),
            PosClass::V => self.superstrate_v.as_deref(),
        }
    }

    pub fn dir_name(&self) -> String {
        let mut name = self.substrate.clone();
        if let Some(r) = &self.superstrate_n {
            name.push_str(&format!("~{r}@N"));
        }
        if let Some(r) = &self.superstrate_v {
            name.push_str(&format!("~{r}@V"));
        }
        name
    }

    /// Languages whose models synthesis needs, substrate first.
    pub fn languages(&self) -> Vec<&str> {
        let mut langs = vec![self.substrate.as_str()];
        for r in [&self.superstrate_n, &self.superstrate_v]
            .into_iter()
            .flatten()
        {
            if !langs.contains(&r.as_str()) {
                langs.push(r);
            }
        }
        langs
    }
}

impl fmt::Display for LanguageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dir_name())
    }
}

impl FromStr for LanguageSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('~');
        let substrate = parts.next().unwrap_or_default();
        check_id(substrate, s)?;
        let mut spec = LanguageSpec::new(substrate, None, None);
        let mut seen_v = false;
        for part in parts {
            let (lang, class) = part
                .rsplit_once('@')
                .ok_or_else(|| SpecError::BadComponent(part.to_string()))?;
            check_id(lang, s)?;
            match class {
                "N" if spec.superstrate_n.is_none() && !seen_v => {
                    spec.superstrate_n = Some(lang.to_string())
                }
                "V" if !seen_v => {
                    spec.superstrate_v = Some(lang.to_string());
                    seen_v = true;
                }
                "N" | "V" => return Err(SpecError::Order(s.to_string())),
                _ => return Err(SpecError::BadComponent(part.to_string())),
            }
        }
        Ok(spec)
    }
}

/// Every spec over `languages`: each substrate with each N choice and each V
/// choice, where a choice is a language or none (`|L| · (|L|+1)²` specs).
pub fn cross_product(languages: &[String]) -> impl Iterator<Item = LanguageSpec> + '_ {
    let choices = || std::iter::once(None).chain(languages.iter().map(|l| Some(l.as_str())));
    languages.iter().flat_map(move |sub| {
        choices().flat_map(move |rn| choices().map(move |rv| LanguageSpec::new(sub, rn, rv)))
    })
}
