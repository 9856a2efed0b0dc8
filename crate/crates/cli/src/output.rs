//! Output files and their number format.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::manifest::RunManifest;
use crate::CliError;

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{:.16e}", x)
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Failure(format!("cannot write to stdout: {e}"))),
    }
}

/// Sidecar path that carries the manifest of a CSV file.
pub fn manifest_sidecar(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}

/// Writes a CSV file and its manifest sidecar.
pub fn emit_csv(path: Option<&Path>, text: &str, manifest: &RunManifest) -> Result<(), CliError> {
    emit(path, text)?;
    if let Some(p) = path {
        let sidecar = manifest_sidecar(p);
        emit(Some(&sidecar), &manifest.to_json_pretty())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(0.32455532033675905), "0.32455532033675905");
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(0.0), "0");
        assert_eq!(fmt17(-2.5), "-2.5000000000000000");
        assert_eq!(fmt17(1.5e-9), "1.5000000000000000e-9");
        for x in [0.1, 1.0 / 3.0, 123.456, 7e-6, 9.87654321e20] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
