use std::fmt;
use std::str::FromStr;

use heb_core::SPolicy;

/// A list of values given as comma-separated scalars and `start:stop:count`
/// triples, e.g. `2.5:6:8` or `1,1.5,2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// The values as dimensions; each must be a whole number >= 1.
    pub fn counts(&self) -> Result<Vec<usize>, String> {
        self.0
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 && v < 1e6 {
                    Ok(v as usize)
                } else {
                    Err(format!("requires n to be an integer >= 1 (got {v})"))
                }
            })
            .collect()
    }
}

fn parse_scalar(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for piece in s.split(',') {
            let parts: Vec<&str> = piece.split(':').collect();
            match parts.as_slice() {
                [x] => out.push(parse_scalar(x)?),
                [a, b, count] => {
                    let (a, b) = (parse_scalar(a)?, parse_scalar(b)?);
                    let count: usize = count
                        .trim()
                        .parse()
                        .map_err(|_| format!("count '{count}' in '{piece}' is not a whole number"))?;
                    match count {
                        0 => return Err(format!("empty range '{piece}'")),
                        1 => out.push(a),
                        _ => {
                            let step = (b - a) / (count - 1) as f64;
                            out.extend((0..count).map(|i| if i + 1 == count { b } else { a + step * i as f64 }));
                        }
                    }
                }
                _ => return Err(format!("'{piece}' is neither a number nor start:stop:count")),
            }
        }
        if out.is_empty() {
            return Err("empty range".into());
        }
        Ok(Grid(out))
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `default` or an explicit positive value for the logarithmic shift `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SArg(pub SPolicy<f64>);

impl FromStr for SArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("default") {
            return Ok(SArg(SPolicy::Default));
        }
        let v = parse_scalar(s)?;
        if v > 0.0 {
            Ok(SArg(SPolicy::Explicit(v)))
        } else {
            Err(format!("requires S > 0 (got {v})"))
        }
    }
}
