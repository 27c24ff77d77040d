//! Text parsers for flag values and config files.

use std::collections::BTreeMap;
use std::str::FromStr;

use chardy::Complex64;

/// A complex literal: `0.5`, `-2.5i`, `0.3+0.2i`, or `cosh<x>` / `sinh<x>`.
pub fn complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    let t = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(t);
    for (name, f) in [("cosh", f64::cosh as fn(f64) -> f64), ("sinh", f64::sinh)] {
        if let Some(arg) = t.strip_prefix(name) {
            let x = f64::from_str(arg.trim()).map_err(|_| format!("bad argument in `{text}`"))?;
            return Ok(Complex64::new(f(x), 0.0));
        }
    }
    Complex64::from_str(t).map_err(|_| format!("not a complex number: `{text}`"))
}

/// Generators as `a,b` pairs separated by `;`, e.g. `cosh1,sinh1`.
pub fn generators(text: &str) -> Result<Vec<(Complex64, Complex64)>, String> {
    text.split(';')
        .filter(|g| !g.trim().is_empty())
        .map(|g| match g.split(',').collect::<Vec<_>>()[..] {
            [a, b] => Ok((complex(a)?, complex(b)?)),
            _ => Err(format!("generator `{g}` is not an `a,b` pair")),
        })
        .collect()
}

/// Comma-separated complex character values.
pub fn character(text: &str) -> Result<Vec<Complex64>, String> {
    text.split(',').filter(|v| !v.trim().is_empty()).map(complex).collect()
}

/// Seeds accept decimal or `0x` hex.
pub fn seed(text: &str) -> Result<u64, String> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| format!("bad seed `{text}`"))
}

/// A polynomial in `z` such as `z`, `0.3`, `2z^2 - 0.1z + (0.1+0.2i)`.
/// Returns coefficients in increasing degree.
pub fn polynomial(text: &str) -> Result<Vec<Complex64>, String> {
    let mut coeffs: Vec<Complex64> = Vec::new();
    for term in split_terms(text)? {
        let (coef, degree) = match term.find('z') {
            None => (term.as_str(), 0),
            Some(at) => {
                let rest = term[at + 1..].trim();
                let degree = match rest.strip_prefix('^') {
                    Some(p) => p.trim().parse().map_err(|_| format!("bad exponent in `{term}`"))?,
                    None if rest.is_empty() => 1,
                    None => return Err(format!("unexpected `{rest}` after z")),
                };
                (term[..at].trim().trim_end_matches('*'), degree)
            }
        };
        let coef = match coef.trim() {
            "" | "+" => Complex64::new(1.0, 0.0),
            "-" => Complex64::new(-1.0, 0.0),
            c => match c.strip_prefix('-') {
                Some(inner) if inner.starts_with('(') => -complex(inner)?,
                _ => complex(c.strip_prefix('+').unwrap_or(c))?,
            },
        };
        if coeffs.len() <= degree {
            coeffs.resize(degree + 1, Complex64::new(0.0, 0.0));
        }
        coeffs[degree] += coef;
    }
    if coeffs.is_empty() {
        return Err("empty polynomial".into());
    }
    Ok(coeffs)
}

/// Splits at top-level `+`/`-`, keeping the sign with its term. Signs inside
/// parentheses and exponents like `1e-3` do not split.
fn split_terms(text: &str) -> Result<Vec<String>, String> {
    let mut terms = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    let mut prev = ' ';
    for ch in text.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && !current.is_empty() && !matches!(prev, 'e' | 'E' | '*' | '^') => {
                terms.push(std::mem::take(&mut current));
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced parentheses in `{text}`"));
        }
        current.push(ch);
        prev = ch;
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{text}`"));
    }
    if !current.is_empty() {
        terms.push(current);
    }
    Ok(terms)
}

pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Flat `key = value` config. `#` starts a comment; keys may be written with
/// or without the leading `--`.
pub fn config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        map.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(complex("cosh1").unwrap(), c(1f64.cosh(), 0.0));
        assert_eq!(complex(" sinh 0.5").unwrap(), c(0.5f64.sinh(), 0.0));
        assert_eq!(complex("0.3+0.2i").unwrap(), c(0.3, 0.2));
        assert_eq!(complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(complex("(1e-3-2i)").unwrap(), c(1e-3, -2.0));
        assert!(complex("cosh").is_err());
        assert!(complex("zz").is_err());
    }

    #[test]
    fn generator_lists() {
        let g = generators("cosh1,sinh1; cosh2,sinh2").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[1].1, c(2f64.sinh(), 0.0));
        assert!(generators("cosh1").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(seed("0xA11CE").unwrap(), 0xA11CE);
        assert_eq!(seed("42").unwrap(), 42);
        assert!(seed("-1").is_err());
    }

    #[test]
    fn polynomials() {
        assert_eq!(polynomial("z").unwrap(), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(polynomial("0.3").unwrap(), vec![c(0.3, 0.0)]);
        assert_eq!(
            polynomial("2z^2 - 0.1*z + (0.1+0.2i)").unwrap(),
            vec![c(0.1, 0.2), c(-0.1, 0.0), c(2.0, 0.0)]
        );
        assert_eq!(polynomial("-z + 1e-3").unwrap(), vec![c(1e-3, 0.0), c(-1.0, 0.0)]);
        assert_eq!(polynomial("-(0.5i)z").unwrap(), vec![c(0.0, 0.0), c(0.0, -0.5)]);
        assert!(polynomial("z^x").is_err());
        assert!(polynomial("(z").is_err());
        assert!(polynomial("").is_err());
    }

    #[test]
    fn config_files() {
        let m = config("# run\nseed = 7\n--L=10\n\ngens = cosh1,sinh1 # cyclic\n").unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["L"], "10");
        assert_eq!(m["gens"], "cosh1,sinh1");
        assert!(config("nonsense").is_err());
    }
}
