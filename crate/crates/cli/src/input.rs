use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ellres::geom::{ChernRootConfig, FixedPointModel, SignedRoot};
use ellres::weights::{root_of_unity, sample_generic_y};
use ellres::Complex;
use serde::Deserialize;
use thiserror::Error;

type C = Complex<f64>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Input { path: String, message: String },

    #[error(transparent)]
    Compute(#[from] ellres::Error),
}

impl CliError {
    /// 2 for anything the caller got wrong, 1 for a computation that failed.
    pub fn exit_code(&self) -> u8 {
        use ellres::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Compute(
                E::Usage(_)
                | E::RankCondition { .. }
                | E::BudgetExceeded { .. }
                | E::InvalidRootOfUnity { .. }
                | E::InvalidSampler(_)
                | E::NotSpin,
            ) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// The `--y` grammar: `<re>+<im>i`, `zeta:N:k`, or `random`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum YSpec {
    Value(C),
    Zeta { n: u32, k: i64 },
    Random,
}

impl YSpec {
    pub fn resolve(&self, seed: u64) -> CliResult<C> {
        match *self {
            YSpec::Value(y) => Ok(y),
            YSpec::Zeta { n, k } => Ok(root_of_unity(n, k)?),
            YSpec::Random => Ok(sample_generic_y(seed)),
        }
    }
}

impl fmt::Display for YSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YSpec::Value(y) => write!(f, "{}", fmt_complex(*y)),
            YSpec::Zeta { n, k } => write!(f, "zeta:{n}:{k}"),
            YSpec::Random => f.write_str("random"),
        }
    }
}

impl FromStr for YSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if s == "random" {
            return Ok(YSpec::Random);
        }
        if let Some(rest) = s.strip_prefix("zeta:") {
            let bad = || CliError::Usage(format!("bad root of unity `{s}`: expected zeta:N:k"));
            let (n, k) = rest.split_once(':').ok_or_else(bad)?;
            let n: u32 = n.parse().map_err(|_| bad())?;
            let k: i64 = k.parse().map_err(|_| bad())?;
            root_of_unity::<f64>(n, k)?;
            return Ok(YSpec::Zeta { n, k });
        }
        parse_complex(s)
            .map(YSpec::Value)
            .ok_or_else(|| CliError::Usage(format!("bad value for y: `{s}`")))
    }
}

/// `a`, `bi`, `a+bi`, `a-bi`; a bare `i` stands for `1i`.
pub fn parse_complex(s: &str) -> Option<C> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| C::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse().ok()?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(C::new(re, im))
}

pub fn fmt_complex(z: C) -> String {
    format!("{:.14e}{:+.14e}i", z.re, z.im)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| input_error(path, e))
}

fn input_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn load_model(path: &Path) -> CliResult<FixedPointModel> {
    let model: FixedPointModel =
        serde_json::from_str(&read(path)?).map_err(|e| input_error(path, e))?;
    model.validate().map_err(|e| input_error(path, e))?;
    if model.points.is_empty() {
        return Err(input_error(path, "model has no fixed points"));
    }
    Ok(model)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RootEntry {
    re: f64,
    #[serde(default)]
    im: f64,
    #[serde(default = "positive")]
    sign: i8,
}

fn positive() -> i8 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    a_roots: Vec<RootEntry>,
    #[serde(default)]
    b_roots: Vec<RootEntry>,
}

pub fn load_config(path: &Path) -> CliResult<ChernRootConfig<f64>> {
    let file: ConfigFile = serde_json::from_str(&read(path)?).map_err(|e| input_error(path, e))?;
    let convert = |side: &str, roots: Vec<RootEntry>| {
        roots
            .into_iter()
            .enumerate()
            .map(|(i, r)| match r.sign {
                1 | -1 => Ok(SignedRoot {
                    value: C::new(r.re, r.im),
                    sign: r.sign,
                }),
                s => Err(input_error(path, format!("{side}[{i}].sign = {s}: must be 1 or -1"))),
            })
            .collect::<CliResult<Vec<_>>>()
    };
    let cfg = ChernRootConfig {
        a_roots: convert("a_roots", file.a_roots)?,
        b_roots: convert("b_roots", file.b_roots)?,
    };
    cfg.validate(1e-9).map_err(|e| input_error(path, e))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_grammar() {
        assert_eq!(parse_complex("-1"), Some(C::new(-1.0, 0.0)));
        assert_eq!(parse_complex("0.3+0.1i"), Some(C::new(0.3, 0.1)));
        assert_eq!(parse_complex("0.3-0.1i"), Some(C::new(0.3, -0.1)));
        assert_eq!(parse_complex("-2i"), Some(C::new(0.0, -2.0)));
        assert_eq!(parse_complex("i"), Some(C::new(0.0, 1.0)));
        assert_eq!(parse_complex("1e-3-2.5e+1i"), Some(C::new(1e-3, -25.0)));
        assert_eq!(parse_complex("1+"), None);
        assert_eq!(parse_complex("x+1i"), None);
    }

    #[test]
    fn y_specs() {
        assert_eq!("zeta:3:2".parse::<YSpec>().unwrap(), YSpec::Zeta { n: 3, k: 2 });
        assert_eq!("random".parse::<YSpec>().unwrap(), YSpec::Random);
        assert!("zeta:3".parse::<YSpec>().is_err());
        assert!("zeta:3:3".parse::<YSpec>().is_err());
        let y = YSpec::Zeta { n: 4, k: 1 }.resolve(0).unwrap();
        assert_eq!(y, C::new(0.0, 1.0));
        assert_eq!(YSpec::Random.resolve(5).unwrap(), YSpec::Random.resolve(5).unwrap());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let rank = ellres::Error::RankCondition { r_plus: 2, r_minus: 1, n: 2 };
        assert_eq!(CliError::from(rank).exit_code(), 2);
        assert_eq!(CliError::from(ellres::Error::ZeroArgument).exit_code(), 1);
    }
}
