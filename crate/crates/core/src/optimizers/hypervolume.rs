//! Dominated hypervolume for minimisation problems.

/// `a` weakly dominates `b` and is strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Volume dominated by `points` and bounded by `reference`. Points that do
/// not strictly dominate the reference contribute nothing.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let m = reference.len();
    let pts: Vec<Vec<f64>> =
        points.iter().filter(|p| p.len() == m && p.iter().zip(reference).all(|(a, r)| a < r)).cloned().collect();
    if pts.is_empty() {
        return 0.0;
    }
    slice_volume(pts, reference)
}

fn slice_volume(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    let m = r.len();
    match m {
        1 => r[0] - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => {
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let mut level = r[1];
            let mut hv = 0.0;
            for p in &pts {
                if p[1] < level {
                    hv += (r[0] - p[0]) * (level - p[1]);
                    level = p[1];
                }
            }
            hv
        }
        _ => {
            // Sweep along the last axis; each slab is the (m-1)-volume of the
            // points already passed.
            pts.sort_by(|a, b| a[m - 1].total_cmp(&b[m - 1]));
            let mut hv = 0.0;
            for i in 0..pts.len() {
                let top = if i + 1 < pts.len() { pts[i + 1][m - 1] } else { r[m - 1] };
                let depth = top - pts[i][m - 1];
                if depth > 0.0 {
                    let proj: Vec<Vec<f64>> = pts[..=i].iter().map(|p| p[..m - 1].to_vec()).collect();
                    hv += depth * slice_volume(proj, &r[..m - 1]);
                }
            }
            hv
        }
    }
}

/// Exclusive contributions of a mutually non-dominated 2-D front. The two
/// extreme points get an infinite contribution so the front keeps its spread.
pub fn contributions_2d(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| front[a][0].total_cmp(&front[b][0]).then(front[a][1].total_cmp(&front[b][1])));
    let mut c = vec![f64::INFINITY; n];
    for w in 1..n.saturating_sub(1) {
        let (prev, cur, next) = (&front[order[w - 1]], &front[order[w]], &front[order[w + 1]]);
        c[order[w]] = ((next[0] - cur[0]) * (prev[1] - cur[1])).max(0.0);
    }
    // Exact duplicates of an extreme point are not extreme themselves.
    for w in 1..n {
        if front[order[w]] == front[order[w - 1]] {
            c[order[w]] = 0.0;
        }
    }
    c
}

/// Non-dominated sorting (rank 0 is the best front).
pub fn nondominated_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![usize::MAX; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = r;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        r += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_box() {
        assert_eq!(hypervolume(&[vec![1.0, 2.0]], &[3.0, 5.0]), 6.0);
        assert_eq!(hypervolume(&[vec![1.0, 2.0, 3.0]], &[2.0, 3.0, 4.0]), 1.0);
    }

    #[test]
    fn staircase_union() {
        // Two overlapping boxes: 2x1 + 1x2 - 1x1 overlap = 3.
        let hv = hypervolume(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[2.0, 2.0]);
        assert!((hv - 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_d_union_by_inclusion_exclusion() {
        let pts = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        // Each box is 2x1x1 shaped = 2; pairwise overlaps 1 each; triple 1.
        let hv = hypervolume(&pts, &[2.0, 2.0, 2.0]);
        assert!((hv - (3.0 * 2.0 - 3.0 * 1.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn points_outside_reference_ignored() {
        assert_eq!(hypervolume(&[vec![3.0, 0.0]], &[2.0, 2.0]), 0.0);
        assert_eq!(hypervolume(&[], &[2.0, 2.0]), 0.0);
    }

    #[test]
    fn contributions_match_leave_one_out() {
        let front = vec![vec![0.0, 3.0], vec![1.0, 1.5], vec![2.0, 1.0], vec![3.0, 0.0]];
        let r = [10.0, 10.0];
        let c = contributions_2d(&front);
        let total = hypervolume(&front, &r);
        for i in 1..3 {
            let mut rest = front.clone();
            rest.remove(i);
            assert!((total - hypervolume(&rest, &r) - c[i]).abs() < 1e-12);
        }
        assert!(c[0].is_infinite() && c[3].is_infinite());
    }

    #[test]
    fn ranks_of_nested_fronts() {
        let pts = vec![vec![1.0, 1.0], vec![0.0, 2.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(nondominated_ranks(&pts), vec![0, 0, 1, 2]);
    }

    proptest! {
        #[test]
        fn adding_a_point_never_shrinks_volume(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..12),
            extra in prop::collection::vec(0.0f64..1.0, 2),
        ) {
            let r = [1.0, 1.0];
            let before = hypervolume(&pts, &r);
            let mut more = pts.clone();
            more.push(extra);
            prop_assert!(hypervolume(&more, &r) >= before - 1e-12);
            prop_assert!(before <= 1.0 + 1e-12);
        }

        #[test]
        fn generic_slicing_agrees_with_2d_sweep(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..10),
        ) {
            // Lift into 3-D with a constant last coordinate: volume scales by depth.
            let lifted: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], p[1], 0.5]).collect();
            let a = hypervolume(&pts, &[1.0, 1.0]);
            let b = hypervolume(&lifted, &[1.0, 1.0, 1.0]);
            prop_assert!((a * 0.5 - b).abs() < 1e-12);
        }
    }
}
