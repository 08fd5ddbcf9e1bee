//! Selection of potentially optimal rectangles.

/// Lowest-value rectangle of one measure group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullPoint {
    pub measure: f64,
    pub value: f64,
    pub id: usize,
}

/// Ids of the potentially optimal rectangles among group representatives.
///
/// `reps` must be sorted by strictly increasing measure, one entry per
/// measure group. A representative is selected when some `K > 0` makes it a
/// minimizer of `f - K d` over all rectangles and also satisfies
/// `f - K d <= f_min - eps |f_min|`. Those points lie on the lower-right
/// convex hull; each hull point admits the `K` range between the slopes to
/// its neighbours, intersected with the range the second condition allows.
///
/// If no point qualifies, the hull point of largest measure is returned so
/// that the search always divides something.
pub fn potentially_optimal(reps: &[HullPoint], eps: f64) -> Vec<usize> {
    if reps.is_empty() {
        return Vec::new();
    }
    let f_min = reps.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    // Among equal minima keep the largest measure; smaller ones are dominated.
    let start = reps.iter().rposition(|p| p.value == f_min).unwrap_or(0);

    let mut hull: Vec<usize> = Vec::new();
    for i in start..reps.len() {
        while hull.len() >= 2 {
            let a = &reps[hull[hull.len() - 2]];
            let b = &reps[hull[hull.len() - 1]];
            let c = &reps[i];
            let cross = (b.measure - a.measure) * (c.value - a.value)
                - (b.value - a.value) * (c.measure - a.measure);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    let slope = |a: &HullPoint, b: &HullPoint| (b.value - a.value) / (b.measure - a.measure);
    let threshold = f_min - eps * f_min.abs();
    let mut out = Vec::new();
    for (k, &h) in hull.iter().enumerate() {
        let p = &reps[h];
        let k_lo = if k > 0 { slope(&reps[hull[k - 1]], p) } else { 0.0 };
        let k_hi = if k + 1 < hull.len() {
            slope(p, &reps[hull[k + 1]])
        } else {
            f64::INFINITY
        };
        let k_need = (p.value - threshold) / p.measure;
        if k_hi > 0.0 && k_lo.max(k_need) <= k_hi {
            out.push(p.id);
        }
    }
    if out.is_empty() {
        out.push(reps[*hull.last().expect("hull is nonempty")].id);
    }
    out
}
