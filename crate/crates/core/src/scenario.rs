//! Small-cell and cell-free deployments: array placement, co-channel user
//! selection, the close-angle interferer and position errors.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angles_between, planar_array, AnglePair, ArrayGeometry, Position};
use crate::num::Real;

/// Speed of light over the default carrier, 73.5 GHz.
pub const DEFAULT_WAVELENGTH_M: f64 = 299_792_458.0 / 73.5e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    #[default]
    SmallCell,
    CellFree,
}

impl Architecture {
    pub fn as_str(&self) -> &'static str {
        match self {
            Architecture::SmallCell => "small_cell",
            Architecture::CellFree => "cell_free",
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a position-error variance is spread over the three axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// The variance applies to each Cartesian axis.
    #[default]
    PerAxis,
    /// The variance is the total over the three axes.
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Architecture,
    /// Region extents (x, y, z) in meters; the region spans `[0, extent]`.
    pub region: [f64; 3],
    pub micro_cell_radius: f64,
    pub reuse_distance_multiple: f64,
    pub aa_rows: usize,
    pub aa_cols: usize,
    pub aa_height_m: f64,
    pub aa_separation_m: f64,
    pub na: usize,
    pub ne_rows: usize,
    pub ne_cols: usize,
    /// Users served on the same resource, desired user included. In the
    /// small-cell layout this caps the co-channel cells taken from the lattice.
    pub nu: usize,
    pub k_db: f64,
    pub wavelength_m: f64,
    pub seed: u64,
    pub co_angle_interferer: bool,
    pub co_angle_max_deg: f64,
    pub position_error_var_m2: f64,
    pub position_error_model: ErrorModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: Architecture::SmallCell,
            region: [500.0, 500.0, 120.0],
            micro_cell_radius: 20.0,
            reuse_distance_multiple: 4.0,
            aa_rows: 8,
            aa_cols: 8,
            aa_height_m: 120.0,
            aa_separation_m: 120.0,
            na: 32,
            ne_rows: 4,
            ne_cols: 4,
            nu: 20,
            k_db: 10.0,
            wavelength_m: DEFAULT_WAVELENGTH_M,
            seed: 1,
            co_angle_interferer: true,
            co_angle_max_deg: 2.0,
            position_error_var_m2: 0.0,
            position_error_model: ErrorModel::PerAxis,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.region.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(invalid(format!(
                "region extents must be positive, got {:?}",
                self.region
            )));
        }
        if self.nu == 0 {
            return Err(invalid("nu must be at least 1"));
        }
        if !(self.wavelength_m > 0.0) || !self.wavelength_m.is_finite() {
            return Err(invalid(format!(
                "wavelength must be positive, got {}",
                self.wavelength_m
            )));
        }
        if self.k_db.is_nan() || self.k_db == f64::NEG_INFINITY {
            return Err(invalid(format!("k_db must be a number, got {}", self.k_db)));
        }
        if !(self.position_error_var_m2 >= 0.0) || !self.position_error_var_m2.is_finite() {
            return Err(invalid(format!(
                "position_error_var_m2 must be non-negative, got {}",
                self.position_error_var_m2
            )));
        }
        if !(self.co_angle_max_deg >= 0.0) || !self.co_angle_max_deg.is_finite() {
            return Err(invalid("co_angle_max_deg must be non-negative"));
        }
        match self.kind {
            Architecture::SmallCell => {
                let limit = self.region[0].min(self.region[1]) / 4.0;
                let r = self.micro_cell_radius;
                if !(1.0..=limit).contains(&r) {
                    return Err(invalid(format!(
                        "micro_cell_radius must lie in [1, {limit}] m, got {r}"
                    )));
                }
                if !(self.reuse_distance_multiple > 0.0) || !self.reuse_distance_multiple.is_finite() {
                    return Err(invalid("reuse_distance_multiple must be positive"));
                }
                if self.aa_rows == 0 || self.aa_cols == 0 {
                    return Err(invalid("aa_rows and aa_cols must be at least 1"));
                }
                if !self.aa_height_m.is_finite() || !self.aa_separation_m.is_finite() {
                    return Err(invalid("array height and separation must be finite"));
                }
            }
            Architecture::CellFree => {
                if self.na < 2 || !self.na.is_multiple_of(2) {
                    return Err(invalid(format!(
                        "na must be even and at least 2 so both CPU groups drive the same element count, got {}",
                        self.na
                    )));
                }
                if self.ne_rows == 0 || self.ne_cols == 0 {
                    return Err(invalid("ne_rows and ne_cols must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Elements per array (per CPU group in the cell-free layout).
    pub fn elements_per_array(&self) -> usize {
        match self.kind {
            Architecture::SmallCell => self.aa_rows * self.aa_cols,
            Architecture::CellFree => self.na / 2 * self.ne_rows * self.ne_cols,
        }
    }

    pub fn region_volume_m3(&self) -> f64 {
        self.region.iter().product()
    }
}

/// One deployment realization. User 0 is the desired user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub kind: Architecture,
    pub arrays: [ArrayGeometry<T>; 2],
    pub wavelength: T,
    pub true_positions: Vec<Position<T>>,
    pub precoding_positions: Vec<Position<T>>,
    /// Angles of each true position from the two array references.
    pub true_angles: Vec<[AnglePair<T>; 2]>,
    /// Angles of each precoding position from the two array references.
    pub precoding_angles: Vec<[AnglePair<T>; 2]>,
    /// Micro-cell center of each user (small-cell layout only).
    pub cell_centers: Vec<Position<T>>,
}

impl<T: Real> Scenario<T> {
    pub fn users(&self) -> usize {
        self.true_positions.len()
    }

    pub fn interferers(&self) -> usize {
        self.users().saturating_sub(1)
    }

    fn angles_of(arrays: &[ArrayGeometry<T>; 2], p: &Position<T>) -> Result<[AnglePair<T>; 2]> {
        Ok([
            angles_between(arrays[0].reference(), p)?,
            angles_between(arrays[1].reference(), p)?,
        ])
    }

    fn from_positions(
        kind: Architecture,
        arrays: [ArrayGeometry<T>; 2],
        wavelength: T,
        positions: Vec<Position<T>>,
        cell_centers: Vec<Position<T>>,
    ) -> Result<Self> {
        let angles = positions
            .iter()
            .map(|p| Self::angles_of(&arrays, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            arrays,
            wavelength,
            precoding_positions: positions.clone(),
            true_positions: positions,
            precoding_angles: angles.clone(),
            true_angles: angles,
            cell_centers,
        })
    }
}

fn lattice_axis(extent: f64, r: f64) -> Vec<f64> {
    if extent < 2.0 * r {
        return vec![extent / 2.0];
    }
    let mut out = Vec::new();
    let mut c = r;
    while c + r <= extent * (1.0 + 1e-12) {
        out.push(c);
        c += 2.0 * r;
    }
    out
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Desired cell first, then the greedily selected co-channel cells.
fn co_channel_cells(cfg: &ScenarioConfig) -> Vec<[f64; 3]> {
    let r = cfg.micro_cell_radius;
    let [xs, ys, zs] = [0, 1, 2].map(|i| lattice_axis(cfg.region[i], r));
    let mut lattice = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                lattice.push([x, y, z]);
            }
        }
    }
    let mid = cfg.region.map(|e| e / 2.0);
    let desired_idx = (0..lattice.len())
        .min_by(|&a, &b| dist3(&lattice[a], &mid).total_cmp(&dist3(&lattice[b], &mid)))
        .expect("lattice is never empty");
    let desired = lattice[desired_idx];
    let mut order: Vec<usize> = (0..lattice.len()).filter(|&i| i != desired_idx).collect();
    order.sort_by(|&a, &b| dist3(&lattice[a], &desired).total_cmp(&dist3(&lattice[b], &desired)));
    let min_sep = cfg.reuse_distance_multiple * r * (1.0 - 1e-12);
    let mut chosen = vec![desired];
    for i in order {
        if chosen.len() >= cfg.nu {
            break;
        }
        let c = lattice[i];
        if chosen.iter().all(|a| dist3(a, &c) >= min_sep) {
            chosen.push(c);
        }
    }
    chosen
}

fn uniform_in_sphere<R: Rng + ?Sized>(rng: &mut R, center: [f64; 3], r: f64) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [0; 3].map(|_| StandardNormal.sample(rng));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.0 {
            let rho = r * rng.random::<f64>().cbrt();
            return [0, 1, 2].map(|i| center[i] + rho * v[i] / n);
        }
    }
}

fn clamp_into(p: [f64; 3], region: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| p[i].clamp(0.0, region[i]))
}

fn to_pos<T: Real>(p: [f64; 3]) -> Position<T> {
    Position::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2]))
}

fn to_f64<T: Real>(p: &Position<T>) -> [f64; 3] {
    [p.x.as_f64(), p.y.as_f64(), p.z.as_f64()]
}

// largest t with origin + t d inside the region box
fn range_to_boundary(origin: [f64; 3], d: [f64; 3], region: &[f64; 3]) -> f64 {
    (0..3)
        .map(|i| {
            if d[i] > 0.0 {
                (region[i] - origin[i]) / d[i]
            } else if d[i] < 0.0 {
                -origin[i] / d[i]
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Moves user 1 so that its azimuth and zenith from the first array's
/// reference each lie within `max_deg` of the desired user's. The user keeps
/// its own range from that reference, shortened if needed to stay inside the
/// region.
fn place_co_angle<R: Rng + ?Sized>(
    rng: &mut R,
    reference: [f64; 3],
    desired: [f64; 3],
    interferer: [f64; 3],
    max_deg: f64,
    region: &[f64; 3],
) -> Result<[f64; 3]> {
    let base = angles_between(&to_pos::<f64>(reference), &to_pos::<f64>(desired))?;
    let own_range = dist3(&reference, &interferer);
    let max = max_deg.to_radians();
    let daz = if max > 0.0 { rng.random_range(-max..max) } else { 0.0 };
    let dzen = if max > 0.0 { rng.random_range(-max..max) } else { 0.0 };
    for dz in [dzen, -dzen] {
        let zen = (base.zenith + dz).clamp(0.0, std::f64::consts::PI);
        let d = AnglePair::new(base.azimuth + daz, zen).direction();
        let range = own_range.min(range_to_boundary(reference, d, region) * (1.0 - 1e-9));
        if range >= 1.0 {
            return Ok(clamp_into([0, 1, 2].map(|i| reference[i] + range * d[i]), region));
        }
    }
    // both candidate directions leave the region right at the reference
    Ok(interferer)
}

/// Precomputes the deployment-independent parts of a configuration and draws
/// scenarios from it.
#[derive(Debug, Clone)]
pub struct ScenarioGenerator<T> {
    cfg: ScenarioConfig,
    cells: Vec<[f64; 3]>,
    small_cell_arrays: Option<[ArrayGeometry<T>; 2]>,
}

impl<T: Real> ScenarioGenerator<T> {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (cells, small_cell_arrays) = match cfg.kind {
            Architecture::SmallCell => {
                let spacing = T::lit(cfg.wavelength_m / 2.0);
                let cx = cfg.region[0] / 2.0;
                let cy = cfg.region[1] / 2.0;
                let half = cfg.aa_separation_m / 2.0;
                let a1 = planar_array(
                    cfg.aa_rows,
                    cfg.aa_cols,
                    spacing,
                    to_pos([cx - half, cy, cfg.aa_height_m]),
                )?;
                let a2 = planar_array(
                    cfg.aa_rows,
                    cfg.aa_cols,
                    spacing,
                    to_pos([cx + half, cy, cfg.aa_height_m]),
                )?;
                (co_channel_cells(cfg), Some([a1, a2]))
            }
            Architecture::CellFree => (Vec::new(), None),
        };
        Ok(Self {
            cfg: cfg.clone(),
            cells,
            small_cell_arrays,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    /// Users per small-cell scenario (desired plus co-channel interferers);
    /// `nu` for the cell-free layout.
    pub fn users(&self) -> usize {
        match self.cfg.kind {
            Architecture::SmallCell => self.cells.len(),
            Architecture::CellFree => self.cfg.nu,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scenario<T>> {
        let s = match self.cfg.kind {
            Architecture::SmallCell => self.small_cell(rng)?,
            Architecture::CellFree => self.cell_free(rng)?,
        };
        if self.cfg.position_error_var_m2 > 0.0 {
            perturb_positions(&s, self.cfg.position_error_var_m2, self.cfg.position_error_model, rng)
        } else {
            Ok(s)
        }
    }

    fn small_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scenario<T>> {
        let cfg = &self.cfg;
        let arrays = self
            .small_cell_arrays
            .clone()
            .expect("small-cell generator holds its arrays");
        let mut pts: Vec<[f64; 3]> = self
            .cells
            .iter()
            .map(|c| clamp_into(uniform_in_sphere(rng, *c, cfg.micro_cell_radius), &cfg.region))
            .collect();
        if cfg.co_angle_interferer && pts.len() >= 2 {
            pts[1] = place_co_angle(
                rng,
                to_f64(arrays[0].reference()),
                pts[0],
                pts[1],
                cfg.co_angle_max_deg,
                &cfg.region,
            )?;
        }
        Scenario::from_positions(
            Architecture::SmallCell,
            arrays,
            T::lit(cfg.wavelength_m),
            pts.into_iter().map(to_pos).collect(),
            self.cells.iter().map(|c| to_pos(*c)).collect(),
        )
    }

    fn cell_free<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scenario<T>> {
        let cfg = &self.cfg;
        let [x, y, z] = cfg.region;
        let spacing = T::lit(cfg.wavelength_m / 2.0);
        let mut groups: [Vec<ArrayGeometry<T>>; 2] = [Vec::new(), Vec::new()];
        let mut centers: [Vec<Position<T>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..cfg.na {
            let c = [
                rng.random_range(0.0..=x),
                rng.random_range(0.0..=y),
                rng.random_range(z / 2.0..=z),
            ];
            let c = to_pos::<T>(c);
            groups[i % 2].push(planar_array(cfg.ne_rows, cfg.ne_cols, spacing, c)?);
            centers[i % 2].push(c);
        }
        let cpu = |k: usize| Position::centroid(centers[k].iter()).expect("each CPU group is nonempty");
        let arrays = [
            ArrayGeometry::union(groups[0].iter(), cpu(0))?,
            ArrayGeometry::union(groups[1].iter(), cpu(1))?,
        ];
        let mut pts: Vec<[f64; 3]> = (0..cfg.nu)
            .map(|_| {
                [
                    rng.random_range(0.0..=x),
                    rng.random_range(0.0..=y),
                    rng.random_range(0.0..=z),
                ]
            })
            .collect();
        if cfg.co_angle_interferer && pts.len() >= 2 {
            pts[1] = place_co_angle(
                rng,
                to_f64(arrays[0].reference()),
                pts[0],
                pts[1],
                cfg.co_angle_max_deg,
                &cfg.region,
            )?;
        }
        Scenario::from_positions(
            Architecture::CellFree,
            arrays,
            T::lit(cfg.wavelength_m),
            pts.into_iter().map(to_pos).collect(),
            Vec::new(),
        )
    }
}

/// Small-cell deployment with co-channel cells on a cubic lattice.
pub fn small_cell_scenario<T: Real, R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scenario<T>> {
    if cfg.kind != Architecture::SmallCell {
        return Err(invalid("small_cell_scenario needs kind = small_cell"));
    }
    ScenarioGenerator::new(cfg)?.generate(rng)
}

/// Cell-free deployment with APs split between two CPUs.
pub fn cell_free_scenario<T: Real, R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scenario<T>> {
    if cfg.kind != Architecture::CellFree {
        return Err(invalid("cell_free_scenario needs kind = cell_free"));
    }
    ScenarioGenerator::new(cfg)?.generate(rng)
}

/// Adds zero-mean Gaussian errors to every precoding position. True
/// positions, and therefore the channels, are left alone.
pub fn perturb_positions<T: Real, R: Rng + ?Sized>(
    s: &Scenario<T>,
    err_var_m2: f64,
    model: ErrorModel,
    rng: &mut R,
) -> Result<Scenario<T>> {
    if !(err_var_m2 >= 0.0) || !err_var_m2.is_finite() {
        return Err(Error::Domain {
            what: "position error variance",
            expected: "non-negative and finite",
            value: err_var_m2,
        });
    }
    if err_var_m2 == 0.0 {
        return Ok(s.clone());
    }
    let per_axis = match model {
        ErrorModel::PerAxis => err_var_m2,
        ErrorModel::Total => err_var_m2 / 3.0,
    };
    let normal = Normal::new(0.0, per_axis.sqrt()).map_err(|e| invalid(e.to_string()))?;
    let mut out = s.clone();
    for (i, p) in s.true_positions.iter().enumerate() {
        let [dx, dy, dz] = [0; 3].map(|_| T::lit(normal.sample(rng)));
        let q = p.offset(dx, dy, dz);
        out.precoding_angles[i] = Scenario::angles_of(&out.arrays, &q)?;
        out.precoding_positions[i] = q;
    }
    Ok(out)
}
