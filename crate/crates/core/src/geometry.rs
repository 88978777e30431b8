//! Positions, direction angles, array layouts and position-based steering
//! vectors.
//!
//! Angles use the physics convention: azimuth in the x-y plane measured from
//! +x, zenith measured down from +z. A unit direction is therefore
//! `(sin(zen) cos(az), sin(zen) sin(az), cos(zen))`, which are exactly the
//! direction cosines that enter the element phase.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{CVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Position<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.finite() && self.y.finite() && self.z.finite()
    }

    pub fn offset(&self, dx: T, dy: T, dz: T) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    /// `self - other`, component-wise.
    pub fn sub(&self, other: &Self) -> [T; 3] {
        [self.x - other.x, self.y - other.y, self.z - other.z]
    }

    pub fn distance(&self, other: &Self) -> T {
        let [dx, dy, dz] = self.sub(other);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn centroid<'a>(points: impl IntoIterator<Item = &'a Self>) -> Option<Self>
    where
        T: 'a,
    {
        let mut n = 0usize;
        let mut acc = Self::origin();
        for p in points {
            acc = acc.offset(p.x, p.y, p.z);
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let inv = T::one() / T::lit(n as f64);
        Some(Self::new(acc.x * inv, acc.y * inv, acc.z * inv))
    }
}

/// Azimuth in (-pi, pi], zenith in [0, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair<T> {
    pub azimuth: T,
    pub zenith: T,
}

impl<T: Real> AnglePair<T> {
    pub fn new(azimuth: T, zenith: T) -> Self {
        Self { azimuth, zenith }
    }

    /// Direction cosines `(psi_x, psi_y, psi_z)`.
    pub fn direction(&self) -> [T; 3] {
        let (sz, cz) = self.zenith.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [sz * ca, sz * sa, cz]
    }

    fn direction_partial(&self, axis: AngleAxis) -> [T; 3] {
        let (sz, cz) = self.zenith.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        match axis {
            AngleAxis::Azimuth => [-sz * sa, sz * ca, T::zero()],
            AngleAxis::Zenith => [cz * ca, cz * sa, -sz],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleAxis {
    Azimuth,
    Zenith,
}

/// Azimuth/zenith of `to` as seen from `from`.
pub fn angles_between<T: Real>(from: &Position<T>, to: &Position<T>) -> Result<AnglePair<T>> {
    let [dx, dy, dz] = to.sub(from);
    let horizontal = (dx * dx + dy * dy).sqrt();
    if horizontal == T::zero() && dz == T::zero() {
        return Err(Error::DegenerateDirection);
    }
    let azimuth = if horizontal == T::zero() {
        T::zero()
    } else {
        dy.atan2(dx)
    };
    Ok(AnglePair::new(azimuth, horizontal.atan2(dz)))
}

/// Element coordinates of one transmit array, in absolute meters.
///
/// Element order is the vector order of every steering vector built from the
/// geometry. Phases are taken relative to `reference`, which is the array
/// center for co-located arrays and the CPU location for distributed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry<T> {
    elements: Vec<Position<T>>,
    reference: Position<T>,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(elements: Vec<Position<T>>, reference: Position<T>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidConfig("array needs at least one element".into()));
        }
        if !reference.is_finite() || elements.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("array geometry"));
        }
        Ok(Self { elements, reference })
    }

    pub fn elements(&self) -> &[Position<T>] {
        &self.elements
    }

    pub fn reference(&self) -> &Position<T> {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Concatenates the elements of several arrays under a new reference.
    pub fn union<'a>(parts: impl IntoIterator<Item = &'a Self>, reference: Position<T>) -> Result<Self>
    where
        T: 'a,
    {
        let elements = parts.into_iter().flat_map(|g| g.elements.iter().copied()).collect();
        Self::new(elements, reference)
    }

    fn relative(&self) -> impl Iterator<Item = [T; 3]> + '_ {
        self.elements.iter().map(move |p| p.sub(&self.reference))
    }
}

/// `rows x cols` grid in the x-y plane centered on `center`; x runs along
/// columns, y along rows, row-major element order.
pub fn planar_array<T: Real>(rows: usize, cols: usize, spacing: T, center: Position<T>) -> Result<ArrayGeometry<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidConfig(format!(
            "planar array needs rows, cols >= 1 (got {rows}x{cols})"
        )));
    }
    if !(spacing > T::zero()) {
        return Err(Error::Domain {
            what: "element spacing",
            expected: "positive",
            value: spacing.as_f64(),
        });
    }
    let half = T::lit(0.5);
    let row_mid = T::lit((rows - 1) as f64) * half;
    let col_mid = T::lit((cols - 1) as f64) * half;
    let mut elements = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let dx = (T::lit(c as f64) - col_mid) * spacing;
            let dy = (T::lit(r as f64) - row_mid) * spacing;
            elements.push(center.offset(dx, dy, T::zero()));
        }
    }
    ArrayGeometry::new(elements, center)
}

/// Unit-modulus array response toward one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector<T: Real> {
    entries: CVector<T>,
    wavelength: T,
}

impl<T: Real> SteeringVector<T> {
    pub fn entries(&self) -> &CVector<T> {
        &self.entries
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> CVector<T> {
        self.entries
    }
}

fn wavenumber<T: Real>(wavelength: T) -> Result<T> {
    if !(wavelength > T::zero()) || !wavelength.finite() {
        return Err(Error::Domain {
            what: "wavelength",
            expected: "positive and finite",
            value: wavelength.as_f64(),
        });
    }
    Ok(T::two_pi() / wavelength)
}

#[inline]
fn dot3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Entry `i` is `exp(j k (x_i psi_x + y_i psi_y + z_i psi_z))` with element
/// coordinates relative to the array reference.
pub fn steering_vector<T: Real>(
    geom: &ArrayGeometry<T>,
    angles: &AnglePair<T>,
    wavelength: T,
) -> Result<SteeringVector<T>> {
    let k = wavenumber(wavelength)?;
    let psi = angles.direction();
    let entries = CVector::from_iterator(
        geom.len(),
        geom.relative().map(|r| {
            let (s, c) = (k * dot3(&r, &psi)).sin_cos();
            Complex::new(c, s)
        }),
    );
    Ok(SteeringVector { entries, wavelength })
}

/// Partial derivative of [`steering_vector`] with respect to one angle.
pub fn steering_derivative<T: Real>(
    geom: &ArrayGeometry<T>,
    angles: &AnglePair<T>,
    wavelength: T,
    axis: AngleAxis,
) -> Result<CVector<T>> {
    let k = wavenumber(wavelength)?;
    let psi = angles.direction();
    let dpsi = angles.direction_partial(axis);
    Ok(CVector::from_iterator(
        geom.len(),
        geom.relative().map(|r| {
            let (s, c) = (k * dot3(&r, &psi)).sin_cos();
            // d/dθ exp(jφ) = j φ' exp(jφ)
            Complex::new(c, s) * Complex::new(T::zero(), k * dot3(&r, &dpsi))
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const LAMBDA: f64 = 299_792_458.0 / 73.5e9;

    fn single(at: Position<f64>) -> ArrayGeometry<f64> {
        ArrayGeometry::new(vec![at], Position::origin()).unwrap()
    }

    #[test]
    fn axis_aligned_angles() {
        let o = Position::origin();
        let a = angles_between(&o, &Position::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a.azimuth, 0.0);
        assert_abs_diff_eq!(a.zenith, FRAC_PI_2, epsilon = 1e-15);
        let up = angles_between(&o, &Position::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!((up.azimuth, up.zenith), (0.0, 0.0));
    }

    #[test]
    fn downward_diagonal_angles() {
        let a = angles_between(&Position::new(0.0, 0.0, 120.0), &Position::new(100.0, 100.0, 20.0)).unwrap();
        assert_abs_diff_eq!(a.azimuth, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(a.zenith, PI - 2f64.sqrt().atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.zenith, 2.18628, epsilon = 1e-5);
    }

    #[test]
    fn coincident_points_rejected() {
        let p = Position::new(1.0, 2.0, 3.0);
        assert_eq!(angles_between(&p, &p), Err(Error::DegenerateDirection));
    }

    #[test]
    fn planar_layouts() {
        let one = planar_array(1, 1, LAMBDA / 2.0, Position::origin()).unwrap();
        assert_eq!(one.elements(), &[Position::origin()]);

        let four = planar_array(2, 2, LAMBDA / 2.0, Position::origin()).unwrap();
        let q = LAMBDA / 4.0;
        for (p, (sx, sy)) in four
            .elements()
            .iter()
            .zip([(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)])
        {
            assert_abs_diff_eq!(p.x, sx * q, epsilon = 1e-18);
            assert_abs_diff_eq!(p.y, sy * q, epsilon = 1e-18);
            assert_eq!(p.z, 0.0);
        }

        let c = Position::new(10.0, 20.0, 120.0);
        let big = planar_array(15, 15, LAMBDA / 2.0, c).unwrap();
        assert_eq!(big.len(), 225);
        assert_eq!(big.reference(), &c);
        assert!(planar_array(0, 3, 1.0, c).is_err());
        assert!(planar_array(2, 3, 0.0, c).is_err());
    }

    #[test]
    fn steering_examples() {
        let any = AnglePair::new(0.3, 1.1);
        let v = steering_vector(&single(Position::origin()), &any, LAMBDA).unwrap();
        assert_eq!(v.entries()[0], Complex::new(1.0, 0.0));

        let half = single(Position::new(LAMBDA / 2.0, 0.0, 0.0));
        let v = steering_vector(&half, &AnglePair::new(0.0, FRAC_PI_2), LAMBDA).unwrap();
        assert_abs_diff_eq!(v.entries()[0].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.entries()[0].im, 0.0, epsilon = 1e-12);

        let pair = ArrayGeometry::new(
            vec![
                Position::new(-LAMBDA / 4.0, 0.0, 0.0),
                Position::new(LAMBDA / 4.0, 0.0, 0.0),
            ],
            Position::origin(),
        )
        .unwrap();
        let v = steering_vector(&pair, &AnglePair::new(FRAC_PI_2, FRAC_PI_2), LAMBDA).unwrap();
        for z in v.entries().iter() {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
        assert!(steering_vector(&pair, &any, 0.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let any = AnglePair::new(0.3, 1.1);
        let d = steering_derivative(&single(Position::origin()), &any, LAMBDA, AngleAxis::Zenith).unwrap();
        assert_eq!(d[0], Complex::new(0.0, 0.0));

        let half = single(Position::new(LAMBDA / 2.0, 0.0, 0.0));
        let d = steering_derivative(&half, &AnglePair::new(0.0, FRAC_PI_2), LAMBDA, AngleAxis::Azimuth).unwrap();
        assert_abs_diff_eq!(d[0].norm(), 0.0, epsilon = 1e-12);

        let d = steering_derivative(&half, &AnglePair::new(FRAC_PI_2, FRAC_PI_2), LAMBDA, AngleAxis::Azimuth).unwrap();
        assert_abs_diff_eq!(d[0].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[0].im, -PI, epsilon = 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let g = planar_array(2, 2, 0.5f32, Position::origin()).unwrap();
        let v = steering_vector(&g, &AnglePair::new(0.2f32, 0.9), 1.0).unwrap();
        assert!(v.entries().iter().all(|z| (z.norm() - 1.0).abs() < 1e-6));
    }

    fn arb_angles() -> impl Strategy<Value = AnglePair<f64>> {
        (-PI + 1e-3..PI, 1e-2..PI - 1e-2).prop_map(|(a, z)| AnglePair::new(a, z))
    }

    fn test_array() -> ArrayGeometry<f64> {
        let mut g = planar_array(4, 3, LAMBDA / 2.0, Position::new(1.0, 2.0, 3.0)).unwrap();
        // break planar symmetry so z-derivatives are exercised too
        g.elements[5].z += LAMBDA / 3.0;
        g
    }

    proptest! {
        #[test]
        fn entries_unit_modulus(a in arb_angles()) {
            let v = steering_vector(&test_array(), &a, LAMBDA).unwrap();
            for z in v.entries().iter() {
                prop_assert!((z.norm() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn conjugate_is_negated_direction(a in arb_angles()) {
            let g = test_array();
            let v = steering_vector(&g, &a, LAMBDA).unwrap();
            // psi -> -psi: zenith -> pi - zenith, azimuth -> azimuth + pi
            let flipped = AnglePair::new(a.azimuth + PI, PI - a.zenith);
            let w = steering_vector(&g, &flipped, LAMBDA).unwrap();
            for (x, y) in v.entries().iter().zip(w.entries().iter()) {
                prop_assert!((x.conj() - y).norm() <= 1e-9);
            }
        }

        #[test]
        fn derivative_matches_finite_difference(a in arb_angles()) {
            let g = test_array();
            let h = 1e-6;
            for axis in [AngleAxis::Azimuth, AngleAxis::Zenith] {
                let (lo, hi) = match axis {
                    AngleAxis::Azimuth => (
                        AnglePair::new(a.azimuth - h, a.zenith),
                        AnglePair::new(a.azimuth + h, a.zenith),
                    ),
                    AngleAxis::Zenith => (
                        AnglePair::new(a.azimuth, a.zenith - h),
                        AnglePair::new(a.azimuth, a.zenith + h),
                    ),
                };
                let fd = (steering_vector(&g, &hi, LAMBDA).unwrap().into_entries()
                    - steering_vector(&g, &lo, LAMBDA).unwrap().into_entries())
                    / Complex::new(2.0 * h, 0.0);
                let d = steering_derivative(&g, &a, LAMBDA, axis).unwrap();
                let scale = d.norm().max(1.0);
                prop_assert!((fd - d).norm() <= 1e-6 * scale);
            }
        }

        #[test]
        fn angles_reproject_direction(
            dx in -500.0..500.0f64, dy in -500.0..500.0f64, dz in -120.0..120.0f64
        ) {
            prop_assume!(dx.abs() + dy.abs() + dz.abs() > 1e-3);
            let from = Position::new(250.0, 250.0, 120.0);
            let to = from.offset(dx, dy, dz);
            let a = angles_between(&from, &to).unwrap();
            prop_assert!(a.azimuth > -PI && a.azimuth <= PI);
            prop_assert!((0.0..=PI).contains(&a.zenith));
            let n = (dx * dx + dy * dy + dz * dz).sqrt();
            let u = a.direction();
            prop_assert!((u[0] - dx / n).abs() <= 1e-12);
            prop_assert!((u[1] - dy / n).abs() <= 1e-12);
            prop_assert!((u[2] - dz / n).abs() <= 1e-12);
        }
    }
}
