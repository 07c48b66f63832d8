//! Line-oriented key/value reports.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Kv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "kv" => Ok(OutputFormat::Kv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// A titled block of ordered fields. Keys may repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub fields: Vec<(String, String)>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        match format {
            OutputFormat::Text => {
                let _ = writeln!(out, "[{}]", self.title);
                for (k, v) in &self.fields {
                    let _ = writeln!(out, "  {k}: {v}");
                }
            }
            OutputFormat::Kv => {
                let _ = writeln!(out, "section={}", self.title);
                for (k, v) in &self.fields {
                    let _ = writeln!(out, "{k}={v}");
                }
            }
        }
        out
    }
}

pub fn render_all(reports: &[Report], format: OutputFormat) -> String {
    reports
        .iter()
        .map(|r| r.render(format))
        .collect::<Vec<_>>()
        .join(if format == OutputFormat::Text { "\n" } else { "" })
}
