use super::{Codomain, PointSource};
use crate::error::{Error, Result};

pub const MAX_DISCREPANCY_POINTS: u64 = 4096;

/// Exact star discrepancy of the first `n` points of `source` in rank 1 or 2.
///
/// The supremum over anchored boxes `[0, t)` is attained at critical boxes
/// whose corners sit on sample coordinates (or 1): open counts bound the
/// volume-excess side, closed counts (right limits) the count-excess side.
pub fn star_discrepancy<S: PointSource + ?Sized>(source: &S, rank: usize, n: u64) -> Result<f64> {
    if !(1..=2).contains(&rank) {
        return Err(Error::RankUnsupported(rank));
    }
    if source.codomain() != Codomain::UnitCube {
        return Err(Error::InvalidArgument("star discrepancy needs a unit-cube source".into()));
    }
    if n == 0 || n > MAX_DISCREPANCY_POINTS {
        return Err(Error::InvalidArgument(format!(
            "star discrepancy needs 1..={MAX_DISCREPANCY_POINTS} points, got {n}"
        )));
    }
    let mut points = Vec::with_capacity(n as usize);
    for i in 0..n {
        points.push(source.point_at(i, rank)?.into_coords());
    }
    Ok(if rank == 1 {
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        discrepancy_1d(&xs)
    } else {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        discrepancy_2d(&pts)
    })
}

pub(crate) fn discrepancy_1d(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let above = (i + 1) as f64 / n - x;
            let below = x - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

pub(crate) fn discrepancy_2d(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mut ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let y_rank = |y: f64| ys.partition_point(|&v| v < y);

    let mut by_x: Vec<(f64, usize)> = points.iter().map(|&(x, y)| (x, y_rank(y))).collect();
    by_x.sort_by(|a, b| a.0.total_cmp(&b.0));

    // counts[r] = number of points left of the current anchor with y-rank r.
    let mut counts = vec![0u64; ys.len()];
    let mut best = 0.0f64;

    let open_pass = |counts: &[u64], a: f64, best: &mut f64| {
        let mut below = 0u64;
        for (r, &b) in ys.iter().enumerate() {
            *best = best.max(a * b - below as f64 / n);
            below += counts[r];
        }
        if ys.last() != Some(&1.0) {
            *best = best.max(a - below as f64 / n);
        }
    };

    let mut i = 0;
    while i < by_x.len() {
        let a = by_x[i].0;
        open_pass(&counts, a, &mut best);
        while i < by_x.len() && by_x[i].0 == a {
            counts[by_x[i].1] += 1;
            i += 1;
        }
        let mut upto = 0u64;
        for (r, &b) in ys.iter().enumerate() {
            upto += counts[r];
            best = best.max(upto as f64 / n - a * b);
        }
    }
    if by_x.last().map(|p| p.0) != Some(1.0) {
        open_pass(&counts, 1.0, &mut best);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{halton_source, pseudorandom_source, PointSource};

    /// O(n^3) enumeration of every critical box with direct counting.
    fn brute_force_2d(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let mut ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        xs.push(1.0);
        ys.push(1.0);
        let mut best = 0.0f64;
        for &a in &xs {
            for &b in &ys {
                let open = points.iter().filter(|p| p.0 < a && p.1 < b).count() as f64;
                let closed = points.iter().filter(|p| p.0 <= a && p.1 <= b).count() as f64;
                best = best.max(a * b - open / n).max(closed / n - a * b);
            }
        }
        best
    }

    #[test]
    fn single_midpoint() {
        assert_eq!(discrepancy_1d(&[0.5]), 0.5);
    }

    #[test]
    fn lattice_has_discrepancy_one_over_n() {
        let n = 64;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        assert!((discrepancy_1d(&xs) - 1.0 / n as f64).abs() < 1e-15);
    }

    fn brute_force_1d(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        xs.iter()
            .copied()
            .chain([1.0])
            .map(|a| {
                let open = xs.iter().filter(|&&x| x < a).count() as f64;
                let closed = xs.iter().filter(|&&x| x <= a).count() as f64;
                (a - open / n).max(closed / n - a)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn halton_first_hundred() {
        let d = star_discrepancy(&halton_source(0), 1, 100).unwrap();
        let xs: Vec<f64> = (0..100).map(|i| halton_source(0).coordinate(i, 0).unwrap()).collect();
        assert!(d <= 0.035, "{d}");
        assert!((brute_force_1d(&xs) - d).abs() < 1e-15);
    }

    #[test]
    fn halton_below_log_envelope() {
        for n in [64u64, 256, 1024] {
            let d = star_discrepancy(&halton_source(0), 1, n).unwrap();
            assert!(d < 2.0 * (n as f64).ln() / n as f64, "n={n}: {d}");
        }
    }

    #[test]
    fn sweep_matches_brute_force_2d() {
        for seed in 0..8 {
            let src = pseudorandom_source(seed);
            let pts: Vec<(f64, f64)> = (0..37)
                .map(|i| (src.coordinate(i, 0).unwrap(), src.coordinate(i, 1).unwrap()))
                .collect();
            let fast = discrepancy_2d(&pts);
            let slow = brute_force_2d(&pts);
            assert!((fast - slow).abs() < 1e-15, "seed {seed}: {fast} vs {slow}");
        }
        let h = halton_source(0);
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|i| (h.coordinate(i, 0).unwrap(), h.coordinate(i, 1).unwrap()))
            .collect();
        assert!((discrepancy_2d(&pts) - brute_force_2d(&pts)).abs() < 1e-15);
    }

    #[test]
    fn ties_and_unit_coordinates() {
        let pts = [(0.5, 0.5), (0.5, 0.5), (1.0, 0.25), (0.0, 1.0)];
        assert!((discrepancy_2d(&pts) - brute_force_2d(&pts)).abs() < 1e-15);
    }

    #[test]
    fn rank_three_unsupported() {
        assert!(matches!(
            star_discrepancy(&halton_source(0), 3, 10),
            Err(Error::RankUnsupported(3))
        ));
    }
}
