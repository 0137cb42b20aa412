//! Minimal flag parser: every option is --name VALUE, booleans are bare
//! --name; unknown flags are usage errors that enumerate the valid set.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug)]
pub struct UsageError(String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub struct ArgSet {
    values: HashMap<String, String>,
    flags: Vec<String>,
    valid_options: Vec<String>,
    valid_flags: Vec<String>,
}

impl ArgSet {
    pub fn parse(argv: &[String], options: &[&str], flags: &[&str]) -> Result<Self, UsageError> {
        let mut values = HashMap::new();
        let mut set_flags = Vec::new();
        let mut i = 0;
        while i < argv.len() {
            let arg = &argv[i];
            let Some(name) = arg.strip_prefix("--") else {
                return Err(UsageError(format!(
                    "unexpected argument '{arg}'; valid flags: {}",
                    Self::describe(options, flags)
                )));
            };
            if flags.contains(&name) {
                set_flags.push(name.to_string());
                i += 1;
            } else if options.contains(&name) {
                let Some(value) = argv.get(i + 1) else {
                    return Err(UsageError(format!("--{name} needs a value")));
                };
                values.insert(name.to_string(), value.clone());
                i += 2;
            } else {
                return Err(UsageError(format!(
                    "unknown flag '--{name}'; valid flags: {}",
                    Self::describe(options, flags)
                )));
            }
        }
        Ok(Self {
            values,
            flags: set_flags,
            valid_options: options.iter().map(|s| s.to_string()).collect(),
            valid_flags: flags.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn describe(options: &[&str], flags: &[&str]) -> String {
        let mut all: Vec<String> = options.iter().map(|o| format!("--{o} VALUE")).collect();
        all.extend(flags.iter().map(|f| format!("--{f}")));
        all.join(", ")
    }

    pub fn get(&self, name: &str) -> Option<String> {
        self.values.get(name).cloned()
    }

    pub fn flag(&self, name: &str) -> bool {
        self.flags.iter().any(|f| f == name)
    }

    pub fn require(&self, name: &str) -> Result<String, UsageError> {
        self.get(name).ok_or_else(|| UsageError(format!("--{name} is required")))
    }

    pub fn get_u64(&self, name: &str) -> Result<Option<u64>, UsageError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| UsageError(format!("--{name} expects an unsigned integer, got '{v}'"))),
        }
    }

    pub fn require_u64(&self, name: &str) -> Result<u64, UsageError> {
        self.get_u64(name)?.ok_or_else(|| UsageError(format!("--{name} is required")))
    }

    /// No-op retained for symmetry; parsing already rejected unknown flags.
    pub fn finish(&mut self) -> Result<(), UsageError> {
        let _ = (&self.valid_options, &self.valid_flags);
        Ok(())
    }
}
