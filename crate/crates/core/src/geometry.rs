//! The hyperboloidal foliation `H_s = {t^2 - |x|^2 = s^2, t > 0}` of the
//! light-cone interior `K = {|x| < t - 1}`, the semi-hyperboloidal frame
//! `d0 = d_t`, `da = (x^a/t) d_t + d_a`, and the transformations between the
//! natural chart, the frame, and the graph chart `(s, x)` used by the solver.
//!
//! Everything here is a pure function of the event coordinates; no grid state
//! is cached at this layer.

use crate::{Error, Real, Result};
use rand::Rng;

/// 4x4 real matrix, row-major, index order `[row][col]`.
pub type Mat4<R> = [[R; 4]; 4];

/// A spacetime event carried in both the `(t, x)` and `(s, x)` charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoliationPoint<R: Real> {
    /// Time coordinate, `t >= 1` for all points of interest.
    pub t: R,
    /// Spatial coordinate.
    pub x: [R; 3],
}

impl<R: Real> FoliationPoint<R> {
    /// Build a point from natural-chart coordinates.
    pub fn new(t: R, x: [R; 3]) -> Self {
        Self { t, x }
    }

    /// Lift a spatial point onto the hyperboloid `H_s`: `t = sqrt(s^2 + |x|^2)`.
    ///
    /// Points outside `K` are returned with the in-cone flag false rather
    /// than rejected.
    pub fn lift(s: R, x: [R; 3]) -> Self {
        debug_assert!(s > R::zero(), "hyperbolic radius must be positive");
        let t = (s * s + norm2(x)).sqrt();
        Self { t, x }
    }

    /// `r = |x|`.
    pub fn r(&self) -> R {
        norm2(self.x).sqrt()
    }

    /// `s^2 = t^2 - r^2`; negative for points outside the light cone.
    pub fn s2(&self) -> R {
        self.t * self.t - norm2(self.x)
    }

    /// Hyperbolic radius `s`. Only meaningful when `r < t`.
    pub fn s(&self) -> R {
        self.s2().sqrt()
    }

    /// True iff the event lies in the cone `K = {|x| < t - 1}`.
    pub fn in_cone(&self) -> bool {
        self.r() < self.t - R::one()
    }

    /// `s/t`, the degeneracy weight of the foliation.
    pub fn s_over_t(&self) -> R {
        self.s() / self.t
    }

    fn require_inside_lightcone(&self) -> Result<()> {
        if self.s2() <= R::zero() {
            return Err(Error::OutsideCone {
                t: self.t.to_f64().unwrap_or(f64::NAN),
                r: self.r().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// Transition matrices between the semi-hyperboloidal frame and the natural
/// frame: `db_alpha = Phi_alpha^beta d_beta` and `d_alpha = Psi_alpha^beta db_beta`.
#[derive(Clone, Copy, Debug)]
pub struct FrameMatrices<R: Real> {
    pub phi: Mat4<R>,
    pub psi: Mat4<R>,
}

/// Components of the Minkowski metric in the semi-hyperboloidal frame.
#[derive(Clone, Copy, Debug)]
pub struct SemiFrameMetric<R: Real> {
    /// Contravariant components `mbar^{alpha beta}`.
    pub m_up: Mat4<R>,
    /// Covariant components `mbar_{alpha beta}`.
    pub m_down: Mat4<R>,
}

/// Largest radius `r` with `r < t - 1` on the slice `H_s`: `(s^2 - 1)/2`.
///
/// Fields supported in the cone `K` vanish for `r` at or beyond this radius.
pub fn slice_support_radius<R: Real>(s: R) -> Result<R> {
    if s < R::one() {
        return Err(Error::SliceBelowCone(s.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((s * s - R::one()) * R::half())
}

/// Frame transition matrices `Phi`, `Psi` at a point.
///
/// `Phi` is lower-triangular with unit diagonal and `Phi_a^0 = x^a/t`;
/// `Psi = Phi^{-1}` carries `-x^a/t` instead.
pub fn frame_matrices<R: Real>(p: &FoliationPoint<R>) -> Result<FrameMatrices<R>> {
    if p.t <= R::zero() {
        return Err(Error::NonPositiveTime(p.t.to_f64().unwrap_or(f64::NAN)));
    }
    let mut phi = identity::<R>();
    let mut psi = identity::<R>();
    for a in 0..3 {
        let w = p.x[a] / p.t;
        phi[a + 1][0] = w;
        psi[a + 1][0] = -w;
    }
    Ok(FrameMatrices { phi, psi })
}

/// Minkowski metric in the semi-hyperboloidal frame at a point strictly
/// inside the light cone.
///
/// `mbar^{00} = s^2/t^2`, `mbar^{0a} = x^a/t`, `mbar^{ab} = -delta^{ab}`;
/// the covariant components close the inverse pair `m_up * m_down = I`.
pub fn semi_frame_metric<R: Real>(p: &FoliationPoint<R>) -> Result<SemiFrameMetric<R>> {
    p.require_inside_lightcone()?;
    let mut up = [[R::zero(); 4]; 4];
    let mut down = [[R::zero(); 4]; 4];
    let st2 = p.s2() / (p.t * p.t);
    up[0][0] = st2;
    down[0][0] = R::one();
    for a in 0..3 {
        let w = p.x[a] / p.t;
        up[0][a + 1] = w;
        up[a + 1][0] = w;
        down[0][a + 1] = w;
        down[a + 1][0] = w;
        for b in 0..3 {
            let wb = p.x[b] / p.t;
            down[a + 1][b + 1] = w * wb;
        }
        up[a + 1][a + 1] = -R::one();
        down[a + 1][a + 1] = down[a + 1][a + 1] - R::one();
    }
    Ok(SemiFrameMetric { m_up: up, m_down: down })
}

/// Push a contravariant two-tensor into the semi-hyperboloidal frame:
/// `Tbar^{ab} = T^{a'b'} Psi_{a'}^a Psi_{b'}^b`.
pub fn frame_transform_tensor2<R: Real>(t: &Mat4<R>, p: &FoliationPoint<R>) -> Result<Mat4<R>> {
    p.require_inside_lightcone()?;
    let fm = frame_matrices(p)?;
    Ok(congruence(t, &fm.psi))
}

/// Undo [`frame_transform_tensor2`]: recover natural components with `Phi`.
pub fn frame_transform_tensor2_inv<R: Real>(
    tbar: &Mat4<R>,
    p: &FoliationPoint<R>,
) -> Result<Mat4<R>> {
    p.require_inside_lightcone()?;
    let fm = frame_matrices(p)?;
    Ok(congruence(tbar, &fm.phi))
}

/// `S^{ab} = T^{a'b'} M_{a'}^a M_{b'}^b`.
pub fn congruence<R: Real>(t: &Mat4<R>, m: &Mat4<R>) -> Mat4<R> {
    let mut out = [[R::zero(); 4]; 4];
    for (ap, row) in t.iter().enumerate() {
        for (bp, &v) in row.iter().enumerate() {
            if v == R::zero() {
                continue;
            }
            for al in 0..4 {
                let ma = m[ap][al];
                if ma == R::zero() {
                    continue;
                }
                for be in 0..4 {
                    out[al][be] = out[al][be] + v * ma * m[bp][be];
                }
            }
        }
    }
    out
}

/// Minkowski metric `diag(1, -1, -1, -1)` (both index positions coincide).
pub fn minkowski<R: Real>() -> Mat4<R> {
    let mut m = [[R::zero(); 4]; 4];
    m[0][0] = R::one();
    for a in 1..4 {
        m[a][a] = -R::one();
    }
    m
}

pub fn identity<R: Real>() -> Mat4<R> {
    let mut m = [[R::zero(); 4]; 4];
    for i in 0..4 {
        m[i][i] = R::one();
    }
    m
}

pub fn mat_mul<R: Real>(a: &Mat4<R>, b: &Mat4<R>) -> Mat4<R> {
    let mut c = [[R::zero(); 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let v = a[i][k];
            if v == R::zero() {
                continue;
            }
            for j in 0..4 {
                c[i][j] = c[i][j] + v * b[k][j];
            }
        }
    }
    c
}

/// `max_ij |A_ij - B_ij|`.
pub fn max_abs_diff<R: Real>(a: &Mat4<R>, b: &Mat4<R>) -> R {
    let mut m = R::zero();
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Graph chart (s, x): natural frame of the coordinates used by the solver.
// ---------------------------------------------------------------------------

/// Transition matrix `PsiBar` of the graph chart `(s, x)`:
/// `d_alpha = PsiBar_alpha^beta dbb_beta` with `dbb_0 = d_s`, `dbb_a = da`.
///
/// Explicitly `PsiBar_0^0 = t/s`, `PsiBar_a^0 = -x^a/s`, identity elsewhere.
pub fn graph_chart_psi<R: Real>(p: &FoliationPoint<R>) -> Mat4<R> {
    let s = p.s();
    let mut m = identity::<R>();
    m[0][0] = p.t / s;
    for a in 0..3 {
        m[a + 1][0] = -p.x[a] / s;
    }
    m
}

/// Natural-chart derivatives `d_alpha PsiBar_beta^0` of the first column of
/// [`graph_chart_psi`], needed for the lower-order terms of the transformed
/// system. Index order `[alpha][beta]`.
pub fn graph_chart_dpsi0<R: Real>(p: &FoliationPoint<R>) -> Mat4<R> {
    let s = p.s();
    let s3 = s * s * s;
    let r2 = norm2(p.x);
    let mut d = [[R::zero(); 4]; 4];
    // d_t (t/s) and d_a (t/s)
    d[0][0] = -r2 / s3;
    for a in 0..3 {
        d[a + 1][0] = p.t * p.x[a] / s3;
    }
    // d_t (-x^b/s) and d_a (-x^b/s)
    for b in 0..3 {
        d[0][b + 1] = p.x[b] * p.t / s3;
        for a in 0..3 {
            let mut v = -p.x[a] * p.x[b] / s3;
            if a == b {
                v = v - R::one() / s;
            }
            d[a + 1][b + 1] = v;
        }
    }
    d
}

/// Draw `n` points uniformly inside the truncated cone
/// `{s0 <= s <= s1} ∩ {s/t >= st_floor}`, by rejection in the `(s, x)` chart.
pub fn sample_cone_points<R: Real, G: Rng>(
    rng: &mut G,
    n: usize,
    s_range: (R, R),
    st_floor: R,
) -> Vec<FoliationPoint<R>> {
    let (s0, s1) = s_range;
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let u: f64 = rng.gen();
        let s = s0 + (s1 - s0) * R::of(u);
        let r_max = match slice_support_radius(s) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let dir: [R; 3] = random_unit(rng);
        let rad: f64 = rng.gen();
        let r = r_max * R::of(rad);
        let x = [dir[0] * r, dir[1] * r, dir[2] * r];
        let p = FoliationPoint::lift(s, x);
        if p.in_cone() && p.s_over_t() >= st_floor {
            pts.push(p);
        }
    }
    pts
}

/// Uniform random direction on the unit sphere.
pub fn random_unit<R: Real, G: Rng>(rng: &mut G) -> [R; 3] {
    loop {
        let v = [
            R::of(rng.gen::<f64>() * 2.0 - 1.0),
            R::of(rng.gen::<f64>() * 2.0 - 1.0),
            R::of(rng.gen::<f64>() * 2.0 - 1.0),
        ];
        let n2 = norm2(v);
        if n2 > R::of(1e-6) && n2 <= R::one() {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[inline]
pub(crate) fn norm2<R: Real>(x: [R; 3]) -> R {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_center_and_forced_arithmetic() {
        let p = FoliationPoint::<f64>::lift(2.0, [0.0; 3]);
        assert_eq!(p.t, 2.0);
        assert!(p.in_cone());

        let p = FoliationPoint::<f64>::lift(5.0, [3.0, 4.0, 0.0]);
        assert!((p.t - 50f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.r(), 5.0);
        assert!(p.in_cone());

        let p = FoliationPoint::<f64>::lift(1.0, [4.0, 0.0, 0.0]);
        assert!((p.t - 17f64.sqrt()).abs() < 1e-15);
        assert!(!p.in_cone());
    }

    #[test]
    fn support_radius_examples() {
        assert_eq!(slice_support_radius(1.0_f64).unwrap(), 0.0);
        assert_eq!(slice_support_radius(3.0_f64).unwrap(), 4.0);
        assert_eq!(slice_support_radius(5.0_f64).unwrap(), 12.0);
        assert!(slice_support_radius(0.5_f64).is_err());
    }

    #[test]
    fn support_radius_matches_cone_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s = 1.2 + 8.0 * rng.gen::<f64>();
            let dir = random_unit::<f64, _>(&mut rng);
            let r_star = slice_support_radius(s).unwrap();
            // bisect the in-cone boundary along the random direction
            let (mut lo, mut hi) = (0.0, 2.0 * r_star + 2.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let p = FoliationPoint::lift(s, [dir[0] * mid, dir[1] * mid, dir[2] * mid]);
                if p.in_cone() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((lo - r_star).abs() < 1e-9, "s={s}: boundary {lo} vs {r_star}");
        }
    }

    #[test]
    fn frame_matrices_examples() {
        let p = FoliationPoint::<f64>::new(2.0, [0.0; 3]);
        let fm = frame_matrices(&p).unwrap();
        assert_eq!(max_abs_diff(&fm.phi, &identity()), 0.0);
        assert_eq!(max_abs_diff(&fm.psi, &identity()), 0.0);

        let p = FoliationPoint::<f64>::new(2.0, [1.0, 0.0, 0.0]);
        let fm = frame_matrices(&p).unwrap();
        assert_eq!(fm.phi[1][0], 0.5);
        assert_eq!(fm.psi[1][0], -0.5);
        assert_eq!(fm.phi[2][0], 0.0);
        assert_eq!(fm.phi[3][0], 0.0);

        assert!(frame_matrices(&FoliationPoint::<f64>::new(-1.0, [0.0; 3])).is_err());
    }

    #[test]
    fn frame_matrices_inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = sample_cone_points::<f64, _>(&mut rng, 10_000, (1.5, 12.0), 0.0);
        for p in &pts {
            let fm = frame_matrices(p).unwrap();
            let e1 = max_abs_diff(&mat_mul(&fm.phi, &fm.psi), &identity());
            let e2 = max_abs_diff(&mat_mul(&fm.psi, &fm.phi), &identity());
            assert!(e1 < 1e-13 && e2 < 1e-13);
        }
    }

    #[test]
    fn semi_frame_metric_examples() {
        let p = FoliationPoint::<f64>::new(2.0, [1.0, 0.0, 0.0]);
        let m = semi_frame_metric(&p).unwrap();
        assert!((m.m_up[0][0] - 0.75).abs() < 1e-15);
        assert_eq!(m.m_up[0][1], 0.5);
        assert_eq!(m.m_up[1][1], -1.0);

        let p = FoliationPoint::<f64>::new(2.0, [0.0; 3]);
        let m = semi_frame_metric(&p).unwrap();
        assert_eq!(max_abs_diff(&m.m_up, &minkowski()), 0.0);

        // off-foliation input rejected
        let p = FoliationPoint::<f64>::new(2.0, [3.0, 0.0, 0.0]);
        assert!(semi_frame_metric(&p).is_err());
    }

    #[test]
    fn semi_frame_metric_inverse_pair_and_weight_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts = sample_cone_points::<f64, _>(&mut rng, 10_000, (1.5, 20.0), 0.0);
        for p in &pts {
            let m = semi_frame_metric(p).unwrap();
            let e = max_abs_diff(&mat_mul(&m.m_up, &m.m_down), &identity());
            assert!(e < 1e-12, "inverse pair failed: {e}");
            // mbar^00 (t/s)^2 = 1 identically
            let w = m.m_up[0][0] * (p.t / p.s()).powi(2);
            assert!((w - 1.0).abs() < 1e-12);
            // s^2 = t^2 - r^2 consistency
            let res = (p.s() * p.s() - (p.t * p.t - p.r() * p.r())).abs();
            assert!(res < 1e-12 * p.t * p.t);
        }
    }

    #[test]
    fn tensor_transform_roundtrip_and_minkowski() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = sample_cone_points::<f64, _>(&mut rng, 200, (1.5, 9.0), 0.0);
        for p in &pts {
            // T = m transforms to the semi-frame metric
            let tbar = frame_transform_tensor2(&minkowski(), p).unwrap();
            let m = semi_frame_metric(p).unwrap();
            assert!(max_abs_diff(&tbar, &m.m_up) < 1e-12);

            // random round-trip
            let mut t = [[0.0; 4]; 4];
            for row in t.iter_mut() {
                for v in row.iter_mut() {
                    *v = rng.gen::<f64>() * 2.0 - 1.0;
                }
            }
            let tbar = frame_transform_tensor2(&t, p).unwrap();
            let back = frame_transform_tensor2_inv(&tbar, p).unwrap();
            assert!(max_abs_diff(&back, &t) < 1e-12);
        }

        // identity tensor at the spatial origin is fixed
        let p = FoliationPoint::<f64>::new(2.0, [0.0; 3]);
        let t = identity::<f64>();
        let tbar = frame_transform_tensor2(&t, &p).unwrap();
        assert_eq!(max_abs_diff(&tbar, &t), 0.0);
    }

    #[test]
    fn graph_chart_psi_inverts_frame_relations() {
        // d_t = (t/s) d_s and d_a = da - (x^a/s) d_s, checked against the
        // defining relations d_s = (s/t) d_t, da = (x^a/t) d_t + d_a.
        let p = FoliationPoint::<f64>::lift(3.0, [1.2, -0.4, 0.7]);
        let psi = graph_chart_psi(&p);
        let (t, s) = (p.t, p.s());
        assert!((psi[0][0] - t / s).abs() < 1e-15);
        for a in 0..3 {
            assert!((psi[a + 1][0] + p.x[a] / s).abs() < 1e-15);
            assert_eq!(psi[a + 1][a + 1], 1.0);
        }
    }

    #[test]
    fn graph_chart_dpsi0_matches_finite_differences() {
        let p = FoliationPoint::<f64>::lift(3.0, [1.0, 0.5, -0.8]);
        let d = graph_chart_dpsi0(&p);
        let h = 1e-6;
        let entry = |q: &FoliationPoint<f64>, beta: usize| graph_chart_psi(q)[beta][0];
        for beta in 0..4 {
            // d_t
            let pp = FoliationPoint::new(p.t + h, p.x);
            let pm = FoliationPoint::new(p.t - h, p.x);
            let fd = (entry(&pp, beta) - entry(&pm, beta)) / (2.0 * h);
            assert!((fd - d[0][beta]).abs() < 1e-6, "d_t psi_{beta}^0");
            for a in 0..3 {
                let mut xp = p.x;
                xp[a] += h;
                let mut xm = p.x;
                xm[a] -= h;
                let fd = (entry(&FoliationPoint::new(p.t, xp), beta)
                    - entry(&FoliationPoint::new(p.t, xm), beta))
                    / (2.0 * h);
                assert!((fd - d[a + 1][beta]).abs() < 1e-6, "d_{a} psi_{beta}^0");
            }
        }
    }

    #[test]
    fn generic_scalar_f32_frames() {
        let p = FoliationPoint::<f32>::lift(2.0, [0.6, -0.1, 0.2]);
        let fm = frame_matrices(&p).unwrap();
        let e = max_abs_diff(&mat_mul(&fm.phi, &fm.psi), &identity());
        assert!(e < 1e-6);
    }
}
