//! Error tables between PRC curves.

use circaphase_core::prc::{curve_differences, PrcCurve};
use serde::{Deserialize, Serialize};

use crate::error::AppResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub cp_h: f64,
    pub a_h: f64,
    pub b_h: f64,
    pub reference_h: f64,
    /// `a − reference`, wrapped.
    pub err_a_h: f64,
    pub err_b_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub mean_abs_err_a_h: f64,
    pub mean_abs_err_b_h: f64,
    /// RMS of `a − b`.
    pub rms_gap_h: f64,
}

fn mean_abs(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64
    }
}

/// Compares two curves against a reference; all three must share a CP grid.
pub fn compare(a: &PrcCurve, b: &PrcCurve, reference: &PrcCurve) -> AppResult<Comparison> {
    let err_a = curve_differences(a, reference)?;
    let err_b = curve_differences(b, reference)?;
    let gap = curve_differences(a, b)?;
    let rows = reference
        .points
        .iter()
        .enumerate()
        .map(|(i, r)| CompareRow {
            cp_h: r.cp_h,
            a_h: a.points[i].shift_h,
            b_h: b.points[i].shift_h,
            reference_h: r.shift_h,
            err_a_h: err_a[i],
            err_b_h: err_b[i],
        })
        .collect();
    let rms_gap_h = if gap.is_empty() {
        0.0
    } else {
        (gap.iter().map(|g| g * g).sum::<f64>() / gap.len() as f64).sqrt()
    };
    Ok(Comparison {
        rows,
        mean_abs_err_a_h: mean_abs(&err_a),
        mean_abs_err_b_h: mean_abs(&err_b),
        rms_gap_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use circaphase_core::prc::{PrcMethod, PrcPoint};

    fn curve(shifts: &[(f64, f64)]) -> PrcCurve {
        PrcCurve {
            method: PrcMethod::Anf,
            eval_day: 10,
            points: shifts
                .iter()
                .map(|&(cp_h, shift_h)| PrcPoint {
                    cp_h,
                    shift_h,
                    sd_h: 0.0,
                    n_target: 1,
                    n_control: 1,
                })
                .collect(),
            warnings: vec![],
        }
    }

    #[test]
    fn identical_inputs_give_zeros() {
        let c = curve(&[(0.0, 1.0), (6.0, -2.0)]);
        let r = compare(&c, &c, &c).unwrap();
        assert!(r.rows.iter().all(|row| row.err_a_h == 0.0 && row.err_b_h == 0.0));
        assert_eq!(r.rms_gap_h, 0.0);
    }

    #[test]
    fn mean_abs_error_and_grid_check() {
        let refc = curve(&[(0.0, 1.0), (6.0, -2.0)]);
        let a = curve(&[(0.0, 1.5), (6.0, -2.5)]);
        let r = compare(&a, &refc, &refc).unwrap();
        assert!((r.mean_abs_err_a_h - 0.5).abs() < 1e-12);
        assert!(compare(&a, &curve(&[(0.0, 1.0)]), &refc).is_err());
    }
}
