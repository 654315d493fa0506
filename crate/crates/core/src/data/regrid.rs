use super::grid::{GridField, GridSpec};

const HULL_SLACK: f64 = 1e-9;

/// Locates `coord` between source centres along one axis. Returns the lower
/// index and the fractional offset toward the next centre, or `None` when the
/// coordinate lies outside the span of centres.
fn bracket(coord: f64, origin: f64, cell: f64, n: usize) -> Option<(usize, usize, f64)> {
    let f = (coord - origin) / cell;
    let last = (n - 1) as f64;
    if f < -HULL_SLACK || f > last + HULL_SLACK {
        return None;
    }
    if n == 1 {
        return Some((0, 0, 0.0));
    }
    let f = f.clamp(0.0, last);
    let lo = (f.floor() as usize).min(n - 2);
    Some((lo, lo + 1, f - lo as f64))
}

/// Bilinear interpolation of `field` onto the cell centres of `target`.
///
/// Target cells outside the hull of source centres, or whose four
/// surrounding source cells are not all present, are missing.
pub fn bilinear_regrid(field: &GridField, target: GridSpec) -> GridField {
    let src = field.spec;
    let mut values = vec![GridField::MISSING; target.len()];
    for j in 0..target.n_lat {
        let Some((j0, j1, u)) =
            bracket(target.lat(j), src.origin_latitude, src.cell_size, src.n_lat)
        else {
            continue;
        };
        for i in 0..target.n_lon {
            let Some((i0, i1, t)) = bracket(
                target.lon(i),
                src.origin_longitude,
                src.cell_size,
                src.n_lon,
            ) else {
                continue;
            };
            let (Some(v00), Some(v10), Some(v01), Some(v11)) = (
                field.at(i0, j0),
                field.at(i1, j0),
                field.at(i0, j1),
                field.at(i1, j1),
            ) else {
                continue;
            };
            let low = (1.0 - t) * v00 + t * v10;
            let high = (1.0 - t) * v01 + t * v11;
            values[target.index(i, j)] = (1.0 - u) * low + u * high;
        }
    }
    GridField {
        product_id: field.product_id.clone(),
        spec: target,
        date: field.date,
        values,
    }
}
