use std::path::Path;

use fibervol::entropy::check_probability_vector;
use fibervol::{ComplexMatrix, DensityOperator, C64};

use crate::CliError;

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| format!("bad {what} entry '{t}'"))
        })
        .collect()
}

/// `re`, `re+imj`, `re-imj` or `imj`.
pub fn parse_complex(tok: &str) -> Result<C64, String> {
    let t = tok.trim();
    let bad = || format!("bad complex entry '{tok}'");
    let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) else {
        return t
            .parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    // last sign that is not the leading one and not part of an exponent
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        s => s,
    };
    Ok(C64::new(
        re.parse().map_err(|_| bad())?,
        im.trim_start_matches('+').parse().map_err(|_| bad())?,
    ))
}

/// First line `d`, then `d` rows of `d` whitespace- or comma-separated entries.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let d: usize = lines
        .next()
        .ok_or("empty matrix file")?
        .parse()
        .map_err(|_| "first line must be the dimension")?;
    let mut data = Vec::with_capacity(d * d);
    for r in 0..d {
        let line = lines.next().ok_or(format!("missing row {}", r + 1))?;
        let row: Vec<C64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(parse_complex)
            .collect::<Result<_, _>>()?;
        if row.len() != d {
            return Err(format!(
                "row {} has {} entries, expected {d}",
                r + 1,
                row.len()
            ));
        }
        data.extend(row);
    }
    ComplexMatrix::new(d, d, data).map_err(|e| e.to_string())
}

/// Density operator from `--spectrum` or `--matrix`.
pub fn load_state(
    spectrum: Option<&str>,
    matrix: Option<&Path>,
) -> Result<DensityOperator, CliError> {
    match (spectrum, matrix) {
        (Some(s), None) => {
            let v: Vec<f64> = parse_list(s, "spectrum").map_err(CliError::spectrum)?;
            check_probability_vector(&v).map_err(CliError::from)?;
            DensityOperator::from_spectrum(&v).map_err(CliError::from)
        }
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::spectrum(format!("cannot read {}: {e}", p.display())))?;
            let m = parse_matrix(&text).map_err(CliError::spectrum)?;
            DensityOperator::new(m).map_err(CliError::from)
        }
        (Some(_), Some(_)) => Err(CliError::spectrum(
            "give either --spectrum or --matrix, not both",
        )),
        (None, None) => Err(CliError::spectrum(
            "a state is required: --spectrum or --matrix",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_tokens() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.5+0j").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.25-0.1j").unwrap(), C64::new(0.25, -0.1));
        assert_eq!(parse_complex("-1e-3+2E-4j").unwrap(), C64::new(-1e-3, 2e-4));
        assert_eq!(parse_complex("-0.2j").unwrap(), C64::new(0.0, -0.2));
        assert_eq!(parse_complex("1-j").unwrap(), C64::new(1.0, -1.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn matrix_file() {
        let m = parse_matrix("2\n0.5+0j 0.1-0.2j\n0.1+0.2j 0.5+0j\n").unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.1, -0.2));
        assert!(parse_matrix("2\n1 0\n").is_err());
        assert!(parse_matrix("2\n1 0 0\n0 1\n").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(
            parse_list::<f64>("0.5, 0.3,0.2", "x").unwrap(),
            vec![0.5, 0.3, 0.2]
        );
        assert!(parse_list::<usize>("3,x", "N").is_err());
    }
}
