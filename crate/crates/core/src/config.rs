//! Sectioned `key = value` configuration files.
//!
//! ```text
//! [process]
//! hurst = 0.7
//! order = 2
//!
//! [riskless]
//! rate = 0.05                  # or poly(0.02, 0.01) or table(0:0.02, 1:0.03)
//!
//! [asset.1]
//! drift = 0.08
//! dividend = 0.01              # optional, default 0
//! s0 = 100
//!
//! [volatility]
//! matrix = 0.2                 # rows separated by ';', or matrix@<t> entries
//!
//! [run]
//! seed = 42
//! paths = 100
//! steps = 4096
//! horizon = 1
//!
//! [output]
//! dir = out
//! ```
//!
//! `#` starts a comment. Every error carries the offending line number.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{HermiteError, Result};
use crate::kernel::HermiteSpec;
use crate::market::{Asset, BasicRate, MarketSpec, Volatility};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| HermiteError::Config {
            line: self.line,
            message: format!("section [{}] is missing required key `{key}`", self.name),
        })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for e in &self.entries {
            let base = e.key.split('@').next().unwrap_or(&e.key);
            if !allowed.contains(&base) {
                return Err(err(
                    e.line,
                    format!(
                        "unknown key `{}` in [{}]; expected one of: {}",
                        e.key,
                        self.name,
                        allowed.join(", ")
                    ),
                ));
            }
        }
        Ok(())
    }
}

fn err(line: usize, message: impl Into<String>) -> HermiteError {
    HermiteError::Config {
        line,
        message: message.into(),
    }
}

/// Parses the raw section structure without interpreting values.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, "section header must end with `]`"))?
                .trim();
            if name.is_empty() {
                return Err(err(line, "empty section name"));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(err(line, format!("section [{name}] appears twice")));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err(line, "missing key before `=`"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| err(line, "key outside of any section; add a [section] header first"))?;
        if section.get(key).is_some() {
            return Err(err(line, format!("key `{key}` repeated in [{}]", section.name)));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(sections)
}

fn parse_f64(e: &Entry) -> Result<f64> {
    e.value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
        err(
            e.line,
            format!("`{}` must be a finite number, got `{}`", e.key, e.value),
        )
    })
}

fn parse_u64(e: &Entry) -> Result<u64> {
    e.value.parse::<u64>().map_err(|_| {
        err(
            e.line,
            format!("`{}` must be a nonnegative integer, got `{}`", e.key, e.value),
        )
    })
}

fn parse_list(text: &str, line: usize, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("bad number `{}` in {what}", s.trim())))
        })
        .collect()
}

/// `0.05`, `poly(c0, c1, ..)` or `table(t0:v0, t1:v1, ..)`.
pub fn parse_rate(e: &Entry) -> Result<BasicRate> {
    let v = e.value.as_str();
    let inner = |prefix: &str| v.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
    if let Some(body) = inner("poly(") {
        let coeffs = parse_list(body, e.line, "poly(..)")?;
        return BasicRate::polynomial(coeffs).map_err(|x| err(e.line, x.to_string()));
    }
    if let Some(body) = inner("table(") {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for pair in body.split(',') {
            let (t, r) = pair
                .split_once(':')
                .ok_or_else(|| err(e.line, format!("table entries are `time:value`, got `{}`", pair.trim())))?;
            times.push(parse_list(t, e.line, "table(..)")?[0]);
            values.push(parse_list(r, e.line, "table(..)")?[0]);
        }
        return BasicRate::table(times, values).map_err(|x| err(e.line, x.to_string()));
    }
    Ok(BasicRate::constant(parse_f64(e)?))
}

fn parse_matrix(e: &Entry, d: usize) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = e
        .value
        .split(';')
        .map(|row| parse_list(row, e.line, "volatility matrix"))
        .collect::<Result<_>>()?;
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(err(
            e.line,
            format!("volatility matrix must be {d}x{d} (rows separated by `;`) for {d} asset(s)"),
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub formats: Vec<String>,
}

/// Validated configuration. Sections are optional; each subcommand asks for
/// the parts it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub process: Option<HermiteSpec>,
    pub market: Option<MarketSpec>,
    pub run: RunSection,
    pub output: OutputSection,
    /// Canonical `section.key -> value` view, used for digests.
    pub canonical: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let find = |name: &str| sections.iter().find(|s| s.name == name);
        for s in &sections {
            let known = matches!(
                s.name.as_str(),
                "process" | "riskless" | "volatility" | "run" | "output"
            ) || s.name.starts_with("asset.");
            if !known {
                return Err(err(
                    s.line,
                    format!(
                        "unknown section [{}]; expected process, riskless, asset.N, volatility, run, output",
                        s.name
                    ),
                ));
            }
        }

        let process = match find("process") {
            Some(s) => {
                s.check_keys(&["hurst", "order"])?;
                let h = s.require("hurst")?;
                let k = s.require("order")?;
                let hurst = parse_f64(h)?;
                let order = u32::try_from(parse_u64(k)?).map_err(|_| err(k.line, "order is too large"))?;
                Some(HermiteSpec::new(hurst, order).map_err(|x| {
                    let line = if matches!(x, HermiteError::InvalidOrder(_)) {
                        k.line
                    } else {
                        h.line
                    };
                    err(line, x.to_string())
                })?)
            }
            None => None,
        };

        let market = match find("riskless") {
            Some(riskless) => Some(Self::parse_market(&sections, riskless, process)?),
            None => {
                if let Some(s) = sections
                    .iter()
                    .find(|s| s.name.starts_with("asset.") || s.name == "volatility")
                {
                    return Err(err(s.line, format!("[{}] requires a [riskless] section", s.name)));
                }
                None
            }
        };

        let mut run = RunSection::default();
        if let Some(s) = find("run") {
            s.check_keys(&["seed", "paths", "steps", "horizon"])?;
            run.seed = s.get("seed").map(parse_u64).transpose()?;
            run.paths = s.get("paths").map(parse_u64).transpose()?.map(|v| v as usize);
            run.steps = s.get("steps").map(parse_u64).transpose()?.map(|v| v as usize);
            run.horizon = s.get("horizon").map(parse_f64).transpose()?;
            if let (Some(h), Some(e)) = (run.horizon, s.get("horizon")) {
                if h <= 0.0 {
                    return Err(err(e.line, "horizon must be positive"));
                }
            }
        }
        let mut output = OutputSection::default();
        if let Some(s) = find("output") {
            s.check_keys(&["dir", "formats"])?;
            output.dir = s.get("dir").map(|e| e.value.clone());
            output.formats = s
                .get("formats")
                .map(|e| e.value.split(',').map(|f| f.trim().to_string()).collect())
                .unwrap_or_default();
        }

        let canonical = sections
            .iter()
            .flat_map(|s| {
                s.entries
                    .iter()
                    .map(move |e| (format!("{}.{}", s.name, e.key), e.value.clone()))
            })
            .collect();
        Ok(Self {
            process,
            market,
            run,
            output,
            canonical,
        })
    }

    fn parse_market(sections: &[Section], riskless: &Section, process: Option<HermiteSpec>) -> Result<MarketSpec> {
        let spec =
            process.ok_or_else(|| err(riskless.line, "a market needs a [process] section with hurst and order"))?;
        riskless.check_keys(&["rate"])?;
        let r_entry = riskless.require("rate")?;
        let r = parse_rate(r_entry)?;

        let mut numbered: Vec<(usize, &Section)> = Vec::new();
        for s in sections.iter().filter(|s| s.name.starts_with("asset.")) {
            let idx: usize = s.name["asset.".len()..].parse().map_err(|_| {
                err(
                    s.line,
                    format!("asset sections are numbered [asset.1], [asset.2], ..; got [{}]", s.name),
                )
            })?;
            numbered.push((idx, s));
        }
        numbered.sort_by_key(|(i, _)| *i);
        if numbered.is_empty() {
            return Err(err(riskless.line, "a market needs at least one [asset.N] section"));
        }
        for (pos, (idx, s)) in numbered.iter().enumerate() {
            if *idx != pos + 1 {
                return Err(err(
                    s.line,
                    format!("asset sections must be numbered 1..{} without gaps", numbered.len()),
                ));
            }
        }
        let assets = numbered
            .iter()
            .map(|(_, s)| {
                s.check_keys(&["drift", "dividend", "s0"])?;
                let s0 = s.require("s0")?;
                let initial_price = parse_f64(s0)?;
                if initial_price <= 0.0 {
                    return Err(err(s0.line, "s0 must be positive"));
                }
                Ok(Asset {
                    drift: parse_rate(s.require("drift")?)?,
                    dividend: s
                        .get("dividend")
                        .map(parse_rate)
                        .transpose()?
                        .unwrap_or_else(BasicRate::zero),
                    initial_price,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let d = assets.len();

        let vol_section = sections
            .iter()
            .find(|s| s.name == "volatility")
            .ok_or_else(|| err(riskless.line, "a market needs a [volatility] section"))?;
        vol_section.check_keys(&["matrix"])?;
        let volatility = if let Some(e) = vol_section.get("matrix") {
            if vol_section.entries.len() > 1 {
                return Err(err(e.line, "use either `matrix` or `matrix@<t>` entries, not both"));
            }
            Volatility::Constant {
                matrix: parse_matrix(e, d)?,
            }
        } else {
            let mut rows: Vec<(f64, Vec<Vec<f64>>)> = vol_section
                .entries
                .iter()
                .map(|e| {
                    let t = e.key["matrix@".len().min(e.key.len())..]
                        .parse::<f64>()
                        .map_err(|_| err(e.line, format!("expected `matrix@<time>`, got `{}`", e.key)))?;
                    Ok((t, parse_matrix(e, d)?))
                })
                .collect::<Result<_>>()?;
            if rows.is_empty() {
                return Err(err(
                    vol_section.line,
                    "[volatility] needs `matrix` or `matrix@<t>` entries",
                ));
            }
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (times, matrices) = rows.into_iter().unzip();
            Volatility::Table { times, matrices }
        };
        MarketSpec::new(spec, r, assets, volatility).map_err(|x| err(riskless.line, x.to_string()))
    }

    /// Digest of the canonical key/value view.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        for (k, v) in &self.canonical {
            text.push_str(k);
            text.push('=');
            text.push_str(v);
            text.push('\n');
        }
        crate::io::digest(text.as_bytes())
    }
}
