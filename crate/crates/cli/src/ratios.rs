//! Sampling-ratio lists: `a..b` (unit steps, inclusive), `a..b:step`, or `r1,r2,...`.

#[derive(Clone, Debug, PartialEq)]
pub struct Ratios(pub Vec<f64>);

const MAX_RATIOS: usize = 10_000;

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("invalid ratio {:?}", s.trim()))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("ratio {v} must be positive"));
    }
    Ok(v)
}

pub fn parse(s: &str) -> Result<Ratios, String> {
    let list = if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, number(step)?),
            None => (rest, 1.0),
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        if hi < lo {
            return Err(format!("empty range {lo}..{hi}"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count > MAX_RATIOS {
            return Err(format!("range has {count} ratios, limit {MAX_RATIOS}"));
        }
        (0..count).map(|i| lo + i as f64 * step).collect()
    } else {
        s.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Ratios(list))
}
