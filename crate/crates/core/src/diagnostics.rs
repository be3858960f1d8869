//! Approximability diagnostics: saturation ratios of symmetric-power
//! images, windowed liminf proxies, rank-ratio checks and a structured
//! verdict.
//!
//! Everything here is computed at a finite truncation; the verdict reports
//! what the data is consistent with and never claims an asymptotic proof.
//! A `Violated` verdict additionally requires a structural certificate: a
//! degree whose piece is pinned to at most the constants so that larger
//! powers provably cannot catch up with a growing ambient piece.

use crate::algebra::GradedAlgebraModel;
use crate::error::{Error, Result};
use crate::par::*;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// One saturation entry: dimensions of the power image and the ambient
/// piece, and their ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationEntry {
    pub dim_power: usize,
    pub dim_piece: usize,
    pub ratio: Scalar,
}

/// The table of ratios `dim S^n(B_p) / dim B_{np}` over a grid of `p` and
/// `n` values.
#[derive(Clone, Debug)]
pub struct SaturationTable {
    pub p_values: Vec<u32>,
    pub n_values: Vec<u32>,
    pub entries: BTreeMap<(u32, u32), SaturationEntry>,
}

impl SaturationTable {
    pub fn entry(&self, p: u32, n: u32) -> Option<&SaturationEntry> {
        self.entries.get(&(p, n))
    }

    pub fn row(&self, p: u32) -> Vec<(u32, &SaturationEntry)> {
        self.n_values
            .iter()
            .filter_map(|&n| self.entries.get(&(p, n)).map(|e| (n, e)))
            .collect()
    }
}

/// Fill the saturation table for all `p` in `p_values` and `1 <= n <= n_max`.
/// Rows are independent and fill in parallel; within a row the powers are
/// built incrementally (the result agrees with `power_image`, which tests
/// assert).
pub fn saturation_table(
    model: &GradedAlgebraModel,
    p_values: &[u32],
    n_max: u32,
) -> Result<SaturationTable> {
    for &p in p_values {
        if p == 0 {
            return Err(Error::InvalidModel("p values must be positive".into()));
        }
        let np = p
            .checked_mul(n_max)
            .ok_or(Error::Truncation {
                degree: u32::MAX,
                truncation: model.truncation(),
            })?;
        if np > model.truncation() {
            return Err(Error::Truncation {
                degree: np,
                truncation: model.truncation(),
            });
        }
    }
    let rows: Vec<Vec<((u32, u32), SaturationEntry)>> = p_values
        .to_vec()
        .into_par_iter()
        .map(|p| -> Result<Vec<((u32, u32), SaturationEntry)>> {
            let base = model.graded_piece(p)?;
            if base.dimension() == 0 {
                return Err(Error::ZeroPiece(p));
            }
            let mut row = Vec::new();
            let mut power = (*base).clone();
            for n in 1..=n_max {
                if n > 1 {
                    power = crate::basis::product_space(&power, &base)?;
                }
                let ambient = model.graded_piece(n * p)?;
                let dim_piece = ambient.dimension();
                let dim_power = power.dimension();
                if dim_piece == 0 {
                    return Err(Error::ZeroPiece(n * p));
                }
                row.push((
                    (p, n),
                    SaturationEntry {
                        dim_power,
                        dim_piece,
                        ratio: Scalar::ratio(dim_power as i64, dim_piece as i64),
                    },
                ));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut entries = BTreeMap::new();
    for row in rows {
        entries.extend(row);
    }
    Ok(SaturationTable {
        p_values: p_values.to_vec(),
        n_values: (1..=n_max).collect(),
        entries,
    })
}

/// Minimum over the last `window` entries: a finite proxy for the liminf,
/// reported as such and never as a proven limit.
pub fn liminf_estimate(seq: &[Scalar], window: usize) -> Result<Scalar> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if window == 0 || window > seq.len() {
        return Err(Error::WindowTooLarge {
            window,
            len: seq.len(),
        });
    }
    Ok(seq[seq.len() - window..]
        .iter()
        .min()
        .expect("nonempty window")
        .clone())
}

/// One rank-ratio observation; `ratio` is `None` when the lower piece is
/// zero-dimensional (an infinite-ratio witness).
#[derive(Clone, Debug)]
pub struct RankRatioEntry {
    pub n: u32,
    pub dim_lower: usize,
    pub dim_upper: usize,
    pub ratio: Option<Scalar>,
}

#[derive(Clone, Debug)]
pub struct RankRatioReport {
    pub step: u32,
    pub entries: Vec<RankRatioEntry>,
    /// n values where `rk B_n = 0` while `rk B_{n+r} > 0`.
    pub infinite_witnesses: Vec<u32>,
    pub window: usize,
    /// Maximum of |ratio - 1| over the report window (None when the window
    /// contains an infinite witness).
    pub max_tail_deviation: Option<Scalar>,
    /// Windowed min and max of `rk B_n / n^d`: liminf/limsup proxies for the
    /// growth hypothesis. Both are displayed because the asymptotic reading
    /// is ambiguous between them.
    pub growth_liminf_proxy: Scalar,
    pub growth_limsup_proxy: Scalar,
}

/// Ratios `rk B_{n+r} / rk B_n` for `1 <= n <= N - r`, with a windowed
/// deviation summary and growth proxies.
pub fn rank_ratio_check(
    model: &GradedAlgebraModel,
    step: u32,
    n_max: u32,
    window: usize,
) -> Result<RankRatioReport> {
    if step == 0 || n_max <= step {
        return Err(Error::InvalidModel(
            "rank ratio needs r >= 1 and N > r".into(),
        ));
    }
    let dims: Vec<(u32, usize)> = (1..=n_max)
        .collect::<Vec<u32>>()
        .into_par_iter()
        .map(|m| -> Result<(u32, usize)> {
            Ok((m, model.graded_piece(m)?.dimension()))
        })
        .collect::<Result<_>>()?;
    let dim_of: BTreeMap<u32, usize> = dims.iter().cloned().collect();
    let mut entries = Vec::new();
    let mut infinite = Vec::new();
    for n in 1..=(n_max - step) {
        let lo = dim_of[&n];
        let hi = dim_of[&(n + step)];
        let ratio = if lo == 0 {
            if hi > 0 {
                infinite.push(n);
            }
            None
        } else {
            Some(Scalar::ratio(hi as i64, lo as i64))
        };
        entries.push(RankRatioEntry {
            n,
            dim_lower: lo,
            dim_upper: hi,
            ratio,
        });
    }
    let window = window.clamp(1, entries.len());
    let tail = &entries[entries.len() - window..];
    let max_tail_deviation = if tail.iter().any(|e| e.ratio.is_none()) {
        None
    } else {
        tail.iter()
            .map(|e| (e.ratio.clone().unwrap() - Scalar::one()).abs())
            .max()
    };
    let d = model.dim() as i64;
    let growth: Vec<Scalar> = dims
        .iter()
        .rev()
        .take(window)
        .map(|(m, dim)| {
            Scalar::from_int(*dim as i64) / Scalar::from_int(*m as i64).pow(d)
        })
        .collect();
    Ok(RankRatioReport {
        step,
        entries,
        infinite_witnesses: infinite,
        window,
        max_tail_deviation,
        growth_liminf_proxy: growth.iter().min().cloned().unwrap_or_else(Scalar::zero),
        growth_limsup_proxy: growth.iter().max().cloned().unwrap_or_else(Scalar::zero),
    })
}

/// One entry of the epsilon schedule for the verdict.
#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    pub epsilon: Scalar,
    pub p_floor: u32,
    pub window: usize,
}

/// The default schedule: epsilon in {1/2, 1/4, 1/8}, thresholds at the
/// power of two nearest 2/epsilon from above, windows covering the last
/// quarter of the tested n range.
pub fn default_schedule(n_count: usize) -> Vec<ScheduleEntry> {
    schedule_for_epsilons(
        &[Scalar::ratio(1, 2), Scalar::ratio(1, 4), Scalar::ratio(1, 8)],
        n_count,
    )
}

/// Schedule for custom epsilon values: each threshold is the power of two
/// at or above 2/epsilon, windows cover the last quarter of the tested n
/// range.
pub fn schedule_for_epsilons(epsilons: &[Scalar], n_count: usize) -> Vec<ScheduleEntry> {
    let window = (n_count / 4).max(1);
    epsilons
        .iter()
        .map(|eps| {
            assert!(eps.is_positive() && eps < &Scalar::one(), "epsilon in (0, 1)");
            let target = &Scalar::from_int(2) / eps;
            let mut p_floor = 1u32;
            while Scalar::from_int(p_floor as i64) < target {
                p_floor *= 2;
            }
            ScheduleEntry {
                epsilon: eps.clone(),
                p_floor,
                window,
            }
        })
        .collect()
}

/// Structural reason attached to a violation witness.
#[derive(Clone, Debug)]
pub enum StructuralReason {
    /// The piece of degree p holds at most the constants, so every power
    /// image is at most one-dimensional, while the ambient dimensions grow
    /// through the window: larger n is monotonically no better.
    DegeneratePiece {
        p: u32,
        dim_piece: usize,
        rule_certified: bool,
        degenerate_degrees_unbounded: bool,
    },
}

impl fmt::Display for StructuralReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralReason::DegeneratePiece {
                p,
                dim_piece,
                rule_certified,
                degenerate_degrees_unbounded,
            } => {
                write!(
                    f,
                    "B_{p} has dimension {dim_piece} (constants at most), so dim S^n(B_{p}) <= 1 \
                     for every n while the ambient dimensions grow"
                )?;
                if *rule_certified {
                    write!(f, "; certified by the slice rule")?;
                }
                if *degenerate_degrees_unbounded {
                    write!(f, "; such degrees occur beyond every bound")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite certificate for a violation at truncation.
#[derive(Clone, Debug)]
pub struct ViolationWitness {
    pub epsilon: Scalar,
    pub p: u32,
    pub n_window: (u32, u32),
    /// Largest windowed ratio: the whole tail stays at or below this bound.
    pub bound: Scalar,
    pub structural: StructuralReason,
}

/// Verdict of the approximability diagnostics at truncation.
#[derive(Clone, Debug)]
pub enum Verdict {
    ConsistentWithApproximable { notes: Vec<String> },
    Violated { witness: ViolationWitness, notes: Vec<String> },
    Inconclusive { notes: Vec<String> },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::ConsistentWithApproximable { .. })
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithApproximable { .. } => "ConsistentWithApproximable",
            Verdict::Violated { .. } => "Violated",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())?;
        match self {
            Verdict::Violated { witness, .. } => write!(
                f,
                " (epsilon = {}, p = {}, n in [{}, {}], windowed ratios <= {}; {})",
                witness.epsilon,
                witness.p,
                witness.n_window.0,
                witness.n_window.1,
                witness.bound,
                witness.structural
            ),
            _ => Ok(()),
        }
    }
}

/// Fold a computed saturation table into a verdict against a schedule.
///
/// Consistent: for every scheduled epsilon some tested `p >= p_floor` keeps
/// every windowed ratio above `1 - epsilon`. Violated: some epsilon has no
/// such p, and a tested `p >= p_floor` keeps the whole window at or below
/// the bound with a structural reason making larger n no better. Otherwise
/// inconclusive.
pub fn verdict_from_table(
    model: &GradedAlgebraModel,
    table: &SaturationTable,
    schedule: &[ScheduleEntry],
) -> Verdict {
    let mut notes = vec![format!(
        "windowed proxies at truncation {}; no asymptotic claim",
        model.truncation()
    )];
    let mut violation: Option<ViolationWitness> = None;
    let mut all_consistent = true;
    for entry in schedule {
        let threshold = &Scalar::one() - &entry.epsilon;
        let candidates: Vec<u32> = table
            .p_values
            .iter()
            .copied()
            .filter(|&p| p >= entry.p_floor)
            .collect();
        if candidates.is_empty() {
            all_consistent = false;
            notes.push(format!(
                "epsilon {}: no tested p >= {}",
                entry.epsilon, entry.p_floor
            ));
            continue;
        }
        let window_of = |p: u32| -> Vec<(u32, &SaturationEntry)> {
            let row = table.row(p);
            let w = entry.window.clamp(1, row.len());
            row[row.len() - w..].to_vec()
        };
        // the defining condition bounds a liminf over n, so a row is good
        // when its windowed minimum stays above the threshold
        let good = candidates.iter().find(|&&p| {
            window_of(p)
                .iter()
                .map(|(_, e)| &e.ratio)
                .min()
                .map(|r| r > &threshold)
                .unwrap_or(false)
        });
        if let Some(&p) = good {
            notes.push(format!(
                "epsilon {}: p = {p} keeps the windowed minimum above {}",
                entry.epsilon, threshold
            ));
            continue;
        }
        all_consistent = false;
        notes.push(format!(
            "epsilon {}: no tested p >= {} keeps the windowed minimum above {}",
            entry.epsilon, entry.p_floor, threshold
        ));
        if violation.is_some() {
            continue;
        }
        for &p in &candidates {
            let window = window_of(p);
            // the sub-window of entries at or below the threshold: the
            // degenerate subsequence that drives the liminf down
            let low: Vec<&(u32, &SaturationEntry)> = window
                .iter()
                .filter(|(_, e)| e.ratio <= threshold)
                .collect();
            if low.is_empty() {
                continue;
            }
            let bound = low
                .iter()
                .map(|(_, e)| e.ratio.clone())
                .max()
                .expect("nonempty");
            // structural certificate: the base piece holds at most the
            // constants, so every power image is at most one-dimensional,
            // while the ambient dimensions grow along the low subsequence
            let base_dim = table.entry(p, 1).map(|e| e.dim_power).unwrap_or(usize::MAX);
            let powers_pinned = low.iter().all(|(_, e)| e.dim_power <= 1);
            let ambient_growing = low
                .windows(2)
                .all(|w| w[0].1.dim_piece <= w[1].1.dim_piece)
                && low.last().map(|(_, e)| e.dim_piece > 1).unwrap_or(false);
            if base_dim <= 1 && powers_pinned && ambient_growing {
                violation = Some(ViolationWitness {
                    epsilon: entry.epsilon.clone(),
                    p,
                    n_window: (low.first().unwrap().0, low.last().unwrap().0),
                    bound,
                    structural: StructuralReason::DegeneratePiece {
                        p,
                        dim_piece: base_dim,
                        rule_certified: model.provably_degenerate_piece(p),
                        degenerate_degrees_unbounded: model.degenerate_degrees_unbounded(),
                    },
                });
                break;
            }
        }
    }
    if all_consistent {
        Verdict::ConsistentWithApproximable { notes }
    } else if let Some(witness) = violation {
        Verdict::Violated { witness, notes }
    } else {
        Verdict::Inconclusive { notes }
    }
}

/// Compute the table and fold it into a verdict in one call.
pub fn approximability_verdict(
    model: &GradedAlgebraModel,
    p_values: &[u32],
    n_max: u32,
    schedule: &[ScheduleEntry],
) -> Result<(SaturationTable, Verdict)> {
    let table = saturation_table(model, p_values, n_max)?;
    let verdict = verdict_from_table(model, &table, schedule);
    Ok((table, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{big_line_bundle_curve, dyadic_curve, parity_monomial, subalgebra_rescale};

    #[test]
    fn schedule_thresholds_round_to_powers_of_two() {
        let s = default_schedule(16);
        assert_eq!(
            s.iter().map(|e| e.p_floor).collect::<Vec<_>>(),
            vec![4, 8, 16]
        );
        assert!(s.iter().all(|e| e.window == 4));
        let custom = schedule_for_epsilons(&[Scalar::ratio(1, 3)], 8);
        assert_eq!(custom[0].p_floor, 8); // 2/(1/3) = 6 rounds up to 8
    }

    #[test]
    fn liminf_examples() {
        let seq = vec![
            Scalar::ratio(1, 2),
            Scalar::ratio(3, 4),
            Scalar::ratio(7, 8),
        ];
        assert_eq!(liminf_estimate(&seq, 2).unwrap(), Scalar::ratio(3, 4));
        let constant = vec![Scalar::ratio(2, 5); 6];
        assert_eq!(liminf_estimate(&constant, 3).unwrap(), Scalar::ratio(2, 5));
        assert!(liminf_estimate(&[], 1).is_err());
        assert!(liminf_estimate(&seq, 4).is_err());
    }

    #[test]
    fn line_bundle_saturates_exactly() {
        let line = big_line_bundle_curve(Scalar::one(), 36).unwrap();
        let t = saturation_table(&line, &[2, 3, 6], 6).unwrap();
        for e in t.entries.values() {
            assert_eq!(e.ratio, Scalar::one());
        }
    }

    #[test]
    fn parity_odd_row() {
        let p = parity_monomial(64);
        let t = saturation_table(&p, &[3], 4).unwrap();
        // 3n odd: both dimensions 1; 3n even: power pinned at 1
        assert_eq!(t.entry(3, 1).unwrap().ratio, Scalar::one());
        let e2 = t.entry(3, 2).unwrap();
        assert_eq!((e2.dim_power, e2.dim_piece), (1, 7));
        assert_eq!(e2.ratio, Scalar::ratio(1, 7));
        assert_eq!(t.entry(3, 3).unwrap().ratio, Scalar::one());
        assert_eq!(t.entry(3, 4).unwrap().ratio, Scalar::ratio(1, 13));
    }

    #[test]
    fn dyadic_saturation_entry() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 256).unwrap();
        let t = saturation_table(&d, &[8], 16).unwrap();
        assert_eq!(t.entry(8, 16).unwrap().ratio, Scalar::ratio(113, 128));
        // windowed liminf proxy of the row stays above 7/8 - 1/16
        let row: Vec<Scalar> = t.row(8).iter().map(|(_, e)| e.ratio.clone()).collect();
        let proxy = liminf_estimate(&row, 4).unwrap();
        assert!(proxy >= &Scalar::ratio(7, 8) - &Scalar::ratio(1, 16));
    }

    #[test]
    fn rescale_entries_match_base() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 64).unwrap();
        let r = subalgebra_rescale(&d, 2).unwrap();
        let tr = saturation_table(&r, &[2], 4).unwrap();
        let td = saturation_table(&d, &[4], 4).unwrap();
        for n in 1..=4 {
            assert_eq!(
                tr.entry(2, n).unwrap().ratio,
                td.entry(4, n).unwrap().ratio
            );
        }
    }

    #[test]
    fn rank_ratios_line_bundle() {
        let line = big_line_bundle_curve(Scalar::one(), 32).unwrap();
        let r = rank_ratio_check(&line, 1, 16, 4).unwrap();
        for e in &r.entries {
            assert_eq!(
                e.ratio.clone().unwrap(),
                Scalar::ratio(e.n as i64 + 2, e.n as i64 + 1)
            );
        }
        assert!(r.max_tail_deviation.unwrap() <= Scalar::ratio(1, 13));
    }

    #[test]
    fn rank_ratios_dyadic_spot_value() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 256).unwrap();
        let r = rank_ratio_check(&d, 1, 128, 8).unwrap();
        let at_127 = r.entries.iter().find(|e| e.n == 127).unwrap();
        assert_eq!(at_127.ratio.clone().unwrap(), Scalar::ratio(128, 121));
    }

    #[test]
    fn rank_ratios_parity_spike() {
        let p = parity_monomial(32);
        let r = rank_ratio_check(&p, 1, 16, 4).unwrap();
        // odd n: dim 1 below, n+2 above
        let spike = r.entries.iter().find(|e| e.n == 7).unwrap();
        assert_eq!(spike.ratio.clone().unwrap(), Scalar::from_int(9));
        let deviation = (spike.ratio.clone().unwrap() - Scalar::one()).abs();
        assert!(deviation > Scalar::one());
    }

    #[test]
    fn verdict_dyadic_consistent() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 256).unwrap();
        let schedule = default_schedule(16);
        let (_, v) = approximability_verdict(&d, &[4, 8, 16], 16, &schedule).unwrap();
        assert!(v.is_consistent(), "{v}");
    }

    #[test]
    fn verdict_line_consistent() {
        let line = big_line_bundle_curve(Scalar::one(), 96).unwrap();
        let schedule = default_schedule(6);
        let (t, v) = approximability_verdict(&line, &[4, 8, 16], 6, &schedule).unwrap();
        assert!(v.is_consistent());
        assert!(t.entries.values().all(|e| e.ratio == Scalar::one()));
    }

    #[test]
    fn verdict_parity_violated_with_odd_witness() {
        let p = parity_monomial(512);
        let schedule = default_schedule(16);
        let (_, v) = approximability_verdict(&p, &[5, 9, 17], 16, &schedule).unwrap();
        let Verdict::Violated { witness, .. } = &v else {
            panic!("expected violation, got {v}");
        };
        assert!(witness.p % 2 == 1);
        let StructuralReason::DegeneratePiece {
            dim_piece,
            rule_certified,
            degenerate_degrees_unbounded,
            ..
        } = &witness.structural;
        assert_eq!(*dim_piece, 1);
        assert!(rule_certified);
        assert!(degenerate_degrees_unbounded);
    }

    #[test]
    fn zero_pieces_are_infinite_ratio_witnesses() {
        // declared slices only at degrees 1 and 3: the gap at 2 sits below
        // a nonzero piece
        let mut slices = std::collections::BTreeMap::new();
        slices.insert(1, vec![vec![0]]);
        slices.insert(3, vec![vec![0], vec![1]]);
        let m = crate::algebra::explicit_monomial(slices, 4).unwrap();
        let r = rank_ratio_check(&m, 1, 4, 2).unwrap();
        assert!(r.infinite_witnesses.contains(&2));
        assert!(r.max_tail_deviation.is_none());
    }

    #[test]
    fn truncation_guard_on_tables() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 32).unwrap();
        assert!(matches!(
            saturation_table(&d, &[8], 16),
            Err(crate::error::Error::Truncation { .. })
        ));
    }

    #[test]
    fn verdict_inconclusive_without_certificate() {
        // a consistent model probed only below the schedule thresholds:
        // nothing to certify either way
        let line = big_line_bundle_curve(Scalar::one(), 16).unwrap();
        let schedule = default_schedule(4);
        let (_, v) = approximability_verdict(&line, &[2], 4, &schedule).unwrap();
        assert!(matches!(v, Verdict::Inconclusive { .. }));
    }
}
