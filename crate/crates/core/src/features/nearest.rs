use crate::data::GridSpec;
use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance in km. This is the single distance metric used for
/// the distance predictors.
pub fn haversine_km(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestCell {
    pub index: usize,
    pub i_lon: usize,
    pub j_lat: usize,
    pub distance_km: f64,
}

fn order(a: &NearestCell, b: &NearestCell) -> std::cmp::Ordering {
    a.distance_km
        .total_cmp(&b.distance_km)
        .then(a.j_lat.cmp(&b.j_lat))
        .then(a.i_lon.cmp(&b.i_lon))
}

/// The `k` cell centres closest to the station, ascending by distance with
/// ties broken by ascending `(j_lat, i_lon)`.
///
/// Searches a square window around the enclosing cell and widens it until
/// a lower bound on the distance of every cell outside the window exceeds
/// the current `k`-th distance.
pub fn nearest_grid_points(
    lon: f64,
    lat: f64,
    spec: &GridSpec,
    k: usize,
) -> Result<Vec<NearestCell>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > spec.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} grid cells",
            spec.len()
        )));
    }
    if !lon.is_finite() || !lat.is_finite() {
        return Err(Error::NonFinite("station coordinates"));
    }
    let clamp = |f: f64, n: usize| f.round().clamp(0.0, (n - 1) as f64) as i64;
    let ci = clamp((lon - spec.origin_longitude) / spec.cell_size, spec.n_lon);
    let cj = clamp((lat - spec.origin_latitude) / spec.cell_size, spec.n_lat);
    let (nl, nt) = (spec.n_lon as i64, spec.n_lat as i64);

    let lat_edge = spec
        .lat(0)
        .abs()
        .max(spec.lat(spec.n_lat - 1).abs())
        .min(90.0);
    let min_cos = lat_edge.to_radians().cos().max(0.0);
    let lat_bound = |dlat_deg: f64| EARTH_RADIUS_KM * dlat_deg.max(0.0).to_radians();
    let lon_bound = |dlon_deg: f64| {
        let dl = dlon_deg.max(0.0).min(180.0).to_radians();
        let h = lat.to_radians().cos() * min_cos * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
    };

    let mut radius = 1i64;
    loop {
        let (i0, i1) = ((ci - radius).max(0), (ci + radius).min(nl - 1));
        let (j0, j1) = ((cj - radius).max(0), (cj + radius).min(nt - 1));
        let mut cand = Vec::with_capacity(((i1 - i0 + 1) * (j1 - j0 + 1)) as usize);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let (i, j) = (i as usize, j as usize);
                cand.push(NearestCell {
                    index: spec.index(i, j),
                    i_lon: i,
                    j_lat: j,
                    distance_km: haversine_km(lon, lat, spec.lon(i), spec.lat(j)),
                });
            }
        }
        let covers_all = i0 == 0 && j0 == 0 && i1 == nl - 1 && j1 == nt - 1;
        if cand.len() >= k {
            cand.sort_unstable_by(order);
            cand.truncate(k);
            if covers_all {
                return Ok(cand);
            }
            let mut outside = f64::INFINITY;
            if i0 > 0 {
                outside = outside.min(lon_bound(lon - spec.lon(i0 as usize - 1)));
            }
            if i1 < nl - 1 {
                outside = outside.min(lon_bound(spec.lon(i1 as usize + 1) - lon));
            }
            if j0 > 0 {
                outside = outside.min(lat_bound(lat - spec.lat(j0 as usize - 1)));
            }
            if j1 < nt - 1 {
                outside = outside.min(lat_bound(spec.lat(j1 as usize + 1) - lat));
            }
            if cand[k - 1].distance_km < outside {
                return Ok(cand);
            }
        }
        radius *= 2;
    }
}
