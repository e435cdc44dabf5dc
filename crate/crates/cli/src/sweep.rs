//! Parsers for the sweep mini-grammar of the `bench` flags.

use bsched_core::Error;

/// Parses a task-count sweep: a single value `21`, a comma list `9,12,15`,
/// or an inclusive range `9..30:3` (the step is optional and defaults to 1).
pub fn parse_counts(text: &str) -> Result<Vec<usize>, Error> {
    let bad = |msg: &str| Error::InvalidParameter(format!("task sweep {text:?}: {msg}"));
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => {
                let step = step
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| bad("step must be an integer"))?;
                (hi, step)
            }
            None => (rest, 1),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad("range start must be an integer"))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad("range end must be an integer"))?;
        if step == 0 {
            return Err(bad("step must be positive"));
        }
        if hi < lo {
            return Err(bad("range end is below its start"));
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| bad("entries must be integers"))
            })
            .collect()
    }
}

/// Parses a degree-band sweep such as `2:3,4:5,6:7` into inclusive
/// `(lo, hi)` pairs.
pub fn parse_bands(text: &str) -> Result<Vec<(usize, usize)>, Error> {
    let bad = |msg: &str| Error::InvalidParameter(format!("degree sweep {text:?}: {msg}"));
    text.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| bad("bands are written lo:hi"))?;
            let lo: usize = lo.trim().parse().map_err(|_| bad("band bounds must be integers"))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad("band bounds must be integers"))?;
            if hi < lo {
                return Err(bad("band upper bound is below its lower bound"));
            }
            Ok((lo, hi))
        })
        .collect()
}
