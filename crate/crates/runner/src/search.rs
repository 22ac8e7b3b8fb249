//! Transition searches: bisection on an integer index and golden-section
//! minimisation of the amplitude gap.

use crate::error::Result;
use crate::report::{TransitionEstimate, GAP_CLOSED};

/// Index and minimum amplitude gap at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub index: Option<i32>,
    pub gap: f64,
}

/// First adjacent pair, in ascending `x`, whose indices are both defined and differ.
pub fn find_change(samples: &[(f64, Probe)]) -> Option<((f64, Probe), (f64, Probe))> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let defined: Vec<_> = sorted.into_iter().filter(|s| s.1.index.is_some()).collect();
    defined
        .windows(2)
        .find(|w| w[0].1.index != w[1].1.index)
        .map(|w| (w[0], w[1]))
}

/// Halves [lo, hi] until it is at most `width` wide, keeping the index change
/// inside. Stops early when a midpoint has an undefined index or one that
/// matches neither end.
pub fn bisect_index<F>(
    parameter: &str,
    lo: (f64, Probe),
    hi: (f64, Probe),
    width: f64,
    mut eval: F,
) -> Result<TransitionEstimate>
where
    F: FnMut(f64) -> Result<Probe>,
{
    let (mut a, mut pa) = lo;
    let (mut b, mut pb) = hi;
    let (mut min_gap, mut min_gap_at) = if pa.gap <= pb.gap { (pa.gap, a) } else { (pb.gap, b) };
    let mut evaluations = 0;
    let mut note = None;
    while (b - a).abs() > width {
        let mid = 0.5 * (a + b);
        let p = eval(mid)?;
        evaluations += 1;
        if p.gap < min_gap {
            min_gap = p.gap;
            min_gap_at = mid;
        }
        if p.index.is_some() && p.index == pa.index {
            a = mid;
            pa = p;
        } else if p.index.is_some() && p.index == pb.index {
            b = mid;
            pb = p;
        } else {
            note = Some(match p.index {
                None => format!("index undefined at {parameter} = {mid}"),
                Some(n) => format!("index {n} at {parameter} = {mid} matches neither end"),
            });
            return Ok(TransitionEstimate {
                parameter: parameter.to_string(),
                lower: a,
                upper: b,
                estimate: mid,
                index_lower: pa.index,
                index_upper: pb.index,
                min_gap,
                min_gap_at,
                gap_closed: min_gap < GAP_CLOSED,
                evaluations,
                note,
            });
        }
    }
    Ok(TransitionEstimate {
        parameter: parameter.to_string(),
        lower: a.min(b),
        upper: a.max(b),
        estimate: 0.5 * (a + b),
        index_lower: pa.index,
        index_upper: pb.index,
        min_gap,
        min_gap_at,
        gap_closed: min_gap < GAP_CLOSED,
        evaluations,
        note: note.take(),
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of `f` on [a, b] down to a bracket of `tol`.
/// Returns (argmin, min, evaluations).
pub fn golden_min<F>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evals += 1;
    }
    Ok(if fc <= fd { (c, fc, evals) } else { (d, fd, evals) })
}
