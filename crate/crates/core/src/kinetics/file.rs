//! Plain-text scheme definition files.
//!
//! ```text
//! # sodium-like toy
//! [scheme]
//! name = toy2
//! states = C, O
//! classes = 0, 0
//! conductance = 0, 1
//! reversal = 0, 1
//!
//! [rates]
//! C -> O = const(2)
//! O -> C = 1 * const(1)
//! ```
//!
//! Rates are `[factor *] function` where the function is one of `a_m`,
//! `b_m`, `a_h`, `b_h`, `const(c)` or `exp(scale, slope)`.

use super::scheme::{KineticScheme, Transition};
use super::KineticsError;

fn parse_err(line: usize, msg: impl std::fmt::Display) -> KineticsError {
    KineticsError::Parse(format!("line {line}: {msg}"))
}

fn list<T: std::str::FromStr>(
    line: usize,
    key: &str,
    value: &str,
) -> Result<Vec<T>, KineticsError> {
    value
        .split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(line, format!("cannot parse `{key}` list `{value}`")))
}

/// Parses a scheme definition.
pub fn parse_scheme(text: &str) -> Result<KineticScheme, KineticsError> {
    let mut section = String::new();
    let mut name = None;
    let mut states: Option<Vec<String>> = None;
    let mut classes = None;
    let mut conductance = None;
    let mut reversal = None;
    let mut rates: Vec<(usize, String, String, String)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(s) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = s.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match section.as_str() {
            "scheme" => match key {
                "name" => name = Some(value.to_string()),
                "states" => states = Some(value.split(',').map(|s| s.trim().to_string()).collect()),
                "classes" => classes = Some(list::<usize>(line_no, key, value)?),
                "conductance" => conductance = Some(list::<f64>(line_no, key, value)?),
                "reversal" => reversal = Some(list::<f64>(line_no, key, value)?),
                _ => return Err(parse_err(line_no, format!("unknown key `{key}`"))),
            },
            "rates" => {
                let (from, to) = key
                    .split_once("->")
                    .ok_or_else(|| parse_err(line_no, "expected `FROM -> TO = rate`"))?;
                rates.push((
                    line_no,
                    from.trim().to_string(),
                    to.trim().to_string(),
                    value.to_string(),
                ));
            }
            other => return Err(parse_err(line_no, format!("unknown section `[{other}]`"))),
        }
    }

    let states = states.ok_or_else(|| KineticsError::Parse("missing `states`".into()))?;
    let m = states.len();
    let lookup = |line: usize, s: &str| {
        states
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| parse_err(line, format!("unknown state `{s}`")))
    };
    let mut transitions = Vec::with_capacity(rates.len());
    for (line, from, to, value) in &rates {
        let (factor, func) = match value.split_once('*') {
            Some((f, r)) => (
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(*line, format!("bad factor in `{value}`")))?,
                r.trim(),
            ),
            None => (1.0, value.as_str()),
        };
        transitions.push(Transition {
            from: lookup(*line, from)?,
            to: lookup(*line, to)?,
            factor,
            rate: func.parse().map_err(|e| parse_err(*line, e))?,
        });
    }
    KineticScheme::new(
        name.unwrap_or_else(|| "custom".into()),
        states,
        classes.unwrap_or_else(|| vec![0; m]),
        transitions,
        conductance.unwrap_or_else(|| vec![0.0; m]),
        reversal.unwrap_or_else(|| vec![0.0; m]),
    )
}

/// Serialises a scheme in the format accepted by [`parse_scheme`].
pub fn write_scheme(s: &KineticScheme) -> String {
    let n = s.n_states();
    let join = |f: &dyn Fn(usize) -> String| (0..n).map(f).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    out.push_str("[scheme]\n");
    out.push_str(&format!("name = {}\n", s.name()));
    out.push_str(&format!("states = {}\n", s.state_names().join(", ")));
    out.push_str(&format!(
        "classes = {}\n",
        join(&|i| s.class_of(i).to_string())
    ));
    out.push_str(&format!(
        "conductance = {}\n",
        join(&|i| s.conductance(i).to_string())
    ));
    out.push_str(&format!(
        "reversal = {}\n",
        join(&|i| s.reversal(i).to_string())
    ));
    out.push_str("\n[rates]\n");
    for t in s.transitions() {
        out.push_str(&format!(
            "{} -> {} = {} * {}\n",
            s.state_names()[t.from],
            s.state_names()[t.to],
            t.factor,
            t.rate
        ));
    }
    out
}

/// Resolves a built-in scheme name, or reads a scheme file from disk.
pub fn load_scheme(name: &str) -> Result<KineticScheme, KineticsError> {
    if let Some(s) = KineticScheme::builtin(name) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(name).map_err(|e| {
        KineticsError::Parse(format!(
            "scheme `{name}` is not built in and cannot be read: {e}"
        ))
    })?;
    parse_scheme(&text)
}
