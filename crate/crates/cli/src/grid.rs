//! Parsing of density grids: `0.3`, `0.1,0.2,0.5` or `start:end:step`.

use crate::CliError;

pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad p grid {text:?}: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if !(step > 0.0) || end < start {
                return Err(bad("need start <= end and a positive step"));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| (start + i as f64 * step).min(end)).collect()
        }
        _ => return Err(bad("use a value, a comma list or start:end:step")),
    };
    if let Some(p) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(bad(&format!("{p} is outside [0, 1]")));
    }
    Ok(grid)
}
