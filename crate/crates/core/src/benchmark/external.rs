//! Loader for whitespace-separated numeric data files (shift vectors and
//! rotation matrices in the layout the official suite distributes).

use std::path::Path;

use super::BenchmarkError;

/// Parses one row of numbers per non-empty line. Lines starting with `#`
/// are ignored.
pub fn parse_numeric_rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("line {}: bad number {tok:?}", lineno + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, BenchmarkError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchmarkError::ExternalData {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_numeric_rows(&text).map_err(|message| BenchmarkError::ExternalData {
        path: path.display().to_string(),
        message,
    })
}

/// First `dim` values of the file, read in row order. Files may hold more
/// values than needed (the official shift files carry 100).
pub fn load_shift(path: &Path, dim: usize) -> Result<Vec<f64>, BenchmarkError> {
    let values: Vec<f64> = read_rows(path)?.into_iter().flatten().collect();
    if values.len() < dim {
        return Err(BenchmarkError::DimensionMismatch { expected: dim, got: values.len() });
    }
    Ok(values[..dim].to_vec())
}

/// First `dim` rows, each of which must hold exactly `dim` values.
pub fn load_rotation(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, BenchmarkError> {
    let rows = read_rows(path)?;
    if rows.len() < dim {
        return Err(BenchmarkError::DimensionMismatch { expected: dim, got: rows.len() });
    }
    let rows: Vec<Vec<f64>> = rows.into_iter().take(dim).collect();
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(BenchmarkError::DimensionMismatch { expected: dim, got: bad.len() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scientific_and_skips_blank_lines() {
        let rows = parse_numeric_rows("1.0  -2e1\n\n# note\n  3.5\t4\n").unwrap();
        assert_eq!(rows, vec![vec![1.0, -20.0], vec![3.5, 4.0]]);
    }

    #[test]
    fn rejects_non_numbers_and_nan() {
        assert!(parse_numeric_rows("1 x").is_err());
        assert!(parse_numeric_rows("NaN").is_err());
    }
}
