//! Evolution of wave-Klein-Gordon systems along the hyperboloidal foliation.
//!
//! In the graph chart `(s, x)` with `t = sqrt(s^2 + |x|^2)`, `db_0 = d_s` and
//! `db_a = (x^a/t) d_t + d_a`, the wave operator reads
//!
//! ```text
//! Box u = d_s d_s u + (2 x^a/s) d_s db_a u - sum_a db_a db_a u + (3/s) d_s u
//! ```
//!
//! The lower-order coefficient `(3/s) d_s u` is forced by the chart relations
//! and is pinned by the operator consistency suite against the direct
//! `(t, x)`-chart operator.
//!
//! The system is reduced to first order in `s` only: the state on a slice is
//! `(w, v)` with `v = d_s w`, spatial derivatives come from lattice stencils,
//! and at each node the `n0 x n0` system `(I + Gbar^{00}) dv/ds = explicit`
//! is solved by direct elimination. Compact support inside the cone `K` is
//! maintained by hard-zeroing the outer band each step, which is exact for
//! cone-supported data.

use crate::geometry::{self, FoliationPoint};
use crate::grid::{Grid, StencilOrder};
use crate::nullstruct::{SparseSystem, SystemSpec};
use crate::{Error, Real, Result};
use rayon::prelude::*;
use std::sync::Arc;

/// Hard cap on the component count; point solves use fixed-size scratch.
pub const MAX_COMPONENTS: usize = 8;

/// Quasilinear smallness bound on `||Gbar^{00}||_inf`; beyond it the
/// certified inverse bound of the point solve is lost.
pub const G00_LIMIT: f64 = 0.5;

// ---------------------------------------------------------------------------
// Local finite-difference operators on chart functions
// ---------------------------------------------------------------------------

fn fd_q<R: Real>(f: &dyn Fn(R, [R; 3]) -> R, q: R, x: [R; 3], h: R, order: StencilOrder) -> R {
    let mut acc = R::zero();
    for &(off, w) in order.d1_taps::<R>() {
        acc = acc + R::of(w) * f(q + R::of(off as f64) * h, x);
    }
    acc / h
}

fn fd_qq<R: Real>(f: &dyn Fn(R, [R; 3]) -> R, q: R, x: [R; 3], h: R, order: StencilOrder) -> R {
    let mut acc = R::zero();
    for &(off, w) in order.d2_taps::<R>() {
        acc = acc + R::of(w) * f(q + R::of(off as f64) * h, x);
    }
    acc / (h * h)
}

fn fd_x<R: Real>(
    f: &dyn Fn(R, [R; 3]) -> R,
    q: R,
    x: [R; 3],
    a: usize,
    h: R,
    order: StencilOrder,
) -> R {
    let mut acc = R::zero();
    for &(off, w) in order.d1_taps::<R>() {
        let mut xs = x;
        xs[a] = xs[a] + R::of(off as f64) * h;
        acc = acc + R::of(w) * f(q, xs);
    }
    acc / h
}

fn fd_xx<R: Real>(
    f: &dyn Fn(R, [R; 3]) -> R,
    q: R,
    x: [R; 3],
    a: usize,
    h: R,
    order: StencilOrder,
) -> R {
    let mut acc = R::zero();
    for &(off, w) in order.d2_taps::<R>() {
        let mut xs = x;
        xs[a] = xs[a] + R::of(off as f64) * h;
        acc = acc + R::of(w) * f(q, xs);
    }
    acc / (h * h)
}

fn fd_q_x<R: Real>(
    f: &dyn Fn(R, [R; 3]) -> R,
    q: R,
    x: [R; 3],
    a: usize,
    h: R,
    order: StencilOrder,
) -> R {
    let taps = order.d1_taps::<R>();
    let mut acc = R::zero();
    for &(oq, wq) in taps {
        for &(ox, wx) in taps {
            let mut xs = x;
            xs[a] = xs[a] + R::of(ox as f64) * h;
            acc = acc + R::of(wq * wx) * f(q + R::of(oq as f64) * h, xs);
        }
    }
    acc / (h * h)
}

/// Discrete wave operator in the graph chart; the input is `u(s, x)`.
///
/// All derivatives are centered stencils of the given order with step `h` in
/// every direction. Agreement with the direct `(t, x)`-chart operator at
/// stencil order is the defining property.
pub fn box_in_frame<R: Real>(
    u: &dyn Fn(R, [R; 3]) -> R,
    s: R,
    x: [R; 3],
    h: R,
    order: StencilOrder,
) -> R {
    let mut acc = fd_qq(u, s, x, h, order);
    for a in 0..3 {
        acc = acc + R::two() * x[a] / s * fd_q_x(u, s, x, a, h, order);
        acc = acc - fd_xx(u, s, x, a, h, order);
    }
    acc + R::of(3.0) / s * fd_q(u, s, x, h, order)
}

/// Discrete wave operator assembled from the semi-hyperboloidal frame
/// decomposition; the input is `u(t, x)` in the natural chart:
///
/// ```text
/// Box u = (s/t)^2 d_t d_t u + mbar^{0a} d_t(da u) + mbar^{a0} da(d_t u)
///         + mbar^{ab} da(db u) + (3/t) d_t u
/// ```
///
/// with `da = (x^a/t) d_t + d_a` evaluated by nested stencils and the frame
/// coefficients evaluated analytically.
pub fn semi_hyperboloidal_box<R: Real>(
    u: &dyn Fn(R, [R; 3]) -> R,
    t: R,
    x: [R; 3],
    h: R,
    order: StencilOrder,
) -> R {
    let p = FoliationPoint::new(t, x);
    let st2 = p.s2() / (t * t);

    let frame_d = |a: usize| {
        move |tt: R, xx: [R; 3]| -> R {
            xx[a] / tt * fd_q(u, tt, xx, h, order) + fd_x(u, tt, xx, a, h, order)
        }
    };
    let dt_u = |tt: R, xx: [R; 3]| fd_q(u, tt, xx, h, order);

    let mut acc = st2 * fd_qq(u, t, x, h, order) + R::of(3.0) / t * fd_q(u, t, x, h, order);
    for a in 0..3 {
        let ga = frame_d(a);
        let w = x[a] / t;
        // mbar^{0a} d_t(da u)
        acc = acc + w * fd_q(&ga, t, x, h, order);
        // mbar^{a0} da(d_t u)
        acc = acc + w * (w * fd_q(&dt_u, t, x, h, order) + fd_x(&dt_u, t, x, a, h, order));
        // mbar^{ab} da db u = -sum_a da(da u)
        acc = acc - (w * fd_q(&ga, t, x, h, order) + fd_x(&ga, t, x, a, h, order));
    }
    acc
}

/// Direct `(t, x)`-chart discrete wave operator `d_tt - Laplace`.
pub fn box_direct<R: Real>(
    u: &dyn Fn(R, [R; 3]) -> R,
    t: R,
    x: [R; 3],
    h: R,
    order: StencilOrder,
) -> R {
    let mut acc = fd_qq(u, t, x, h, order);
    for a in 0..3 {
        acc = acc - fd_xx(u, t, x, a, h, order);
    }
    acc
}

/// Least-squares slope of `log2(error)` against the refinement level, for
/// errors measured at `h, h/2, h/4, ...`.
pub fn convergence_slope<R: Real>(errors: &[R]) -> f64 {
    assert!(errors.len() >= 2);
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .map(|(i, e)| (i as f64, e.to_f64().unwrap().abs().max(1e-300).log2()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    -(n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// ---------------------------------------------------------------------------
// Slice state
// ---------------------------------------------------------------------------

/// Sampled multi-component field state on one hyperboloid `H_s`.
///
/// `w[i]` holds component values, `v[i] = d_s w_i` the frame-time co-fields.
/// The natural time derivative is `d_t w = (t/s) v` pointwise and is
/// materialized on demand, so the consistency relation `d_s w = (s/t) d_t w`
/// holds to rounding by construction.
#[derive(Clone, Debug)]
pub struct GridSlice<R: Real> {
    pub grid: Grid<R>,
    pub s: R,
    pub w: Vec<Vec<R>>,
    pub v: Vec<Vec<R>>,
}

impl<R: Real> GridSlice<R> {
    pub fn zeros(grid: Grid<R>, s: R, n_comp: usize) -> Self {
        Self {
            grid,
            s,
            w: (0..n_comp).map(|_| grid.zeros()).collect(),
            v: (0..n_comp).map(|_| grid.zeros()).collect(),
        }
    }

    pub fn n_comp(&self) -> usize {
        self.w.len()
    }

    #[inline]
    pub fn t_at(&self, i: [usize; 3]) -> R {
        let x = self.grid.point(i);
        (self.s * self.s + geometry::norm2(x)).sqrt()
    }

    /// Support radius of the cone on this slice.
    pub fn support_radius(&self) -> R {
        geometry::slice_support_radius(self.s).unwrap_or(R::zero())
    }

    /// Materialized `d_t w_i = (t/s) v_i`.
    pub fn dt_co_field(&self, comp: usize) -> Vec<R> {
        let s = self.s;
        self.grid.map_interior(0, |i| {
            let t = self.t_at(i);
            t / s * self.v[comp][self.grid.idx(i)]
        })
    }

    /// Largest node radius carrying a nonzero value in any component, or
    /// `-inf` for an identically zero slice.
    pub fn numerical_support_radius(&self) -> R {
        let g = self.grid;
        g.max_nodes(|i| {
            let ix = g.idx(i);
            let live = self
                .w
                .iter()
                .zip(self.v.iter())
                .any(|(w, v)| w[ix] != R::zero() || v[ix] != R::zero());
            if live {
                g.radius(i)
            } else {
                R::neg_infinity()
            }
        })
    }

    /// Zero all nodes at or beyond the support radius (exact for data
    /// supported in the cone).
    pub fn zero_outer_band(&mut self) {
        let r_max = self.support_radius();
        let g = self.grid;
        let n = g.n();
        for f in self.w.iter_mut().chain(self.v.iter_mut()) {
            f.par_chunks_mut(n * n).enumerate().for_each(|(iz, plane)| {
                for iy in 0..n {
                    for ix in 0..n {
                        if g.radius([ix, iy, iz]) >= r_max {
                            plane[iy * n + ix] = R::zero();
                        }
                    }
                }
            });
        }
    }

    fn find_non_finite(&self) -> Option<[usize; 3]> {
        let g = self.grid;
        let n = g.n();
        for f in self.w.iter().chain(self.v.iter()) {
            let bad = (0..n).into_par_iter().find_map_any(|iz| {
                for iy in 0..n {
                    for ix in 0..n {
                        if !f[g.idx([ix, iy, iz])].is_finite() {
                            return Some([ix, iy, iz]);
                        }
                    }
                }
                None
            });
            if bad.is_some() {
                return bad;
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Initial data for one component on `H_{s0}`, as functions of `x`: the
/// value and the `d_s` derivative. Data must be supported strictly inside
/// the slice support radius; anything outside is zeroed.
#[derive(Clone)]
pub enum InitialData<R: Real> {
    Zero,
    /// `amplitude * bump(|x|/radius)` with the smooth compactly supported
    /// mollifier profile; `d_s w = 0`.
    Bump { amplitude: R, radius: R },
    /// Arbitrary `(w, d_s w)` profile.
    Custom(Arc<dyn Fn([R; 3]) -> (R, R) + Send + Sync>),
}

impl<R: Real> std::fmt::Debug for InitialData<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialData::Zero => write!(f, "Zero"),
            InitialData::Bump { amplitude, radius } => {
                write!(f, "Bump(a={amplitude:?}, r={radius:?})")
            }
            InitialData::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// The standard mollifier `exp(1 - 1/(1-q^2))` for `|q| < 1`, else 0.
pub fn bump_profile<R: Real>(q: R) -> R {
    let q2 = q * q;
    if q2 >= R::one() {
        R::zero()
    } else {
        (R::one() - R::one() / (R::one() - q2)).exp()
    }
}

impl<R: Real> InitialData<R> {
    pub fn eval(&self, x: [R; 3]) -> (R, R) {
        match self {
            InitialData::Zero => (R::zero(), R::zero()),
            InitialData::Bump { amplitude, radius } => {
                let q = geometry::norm2(x).sqrt() / *radius;
                (*amplitude * bump_profile(q), R::zero())
            }
            InitialData::Custom(f) => f(x),
        }
    }
}

/// Extra source term `f_i(s, x)` added to the interactions; used by
/// manufactured-solution runs and forced-equation diagnostics.
pub type Forcing<R> = Arc<dyn Fn(usize, R, [R; 3]) -> R + Send + Sync>;

/// Complete description of one evolution run.
#[derive(Clone)]
pub struct SolverConfig<R: Real> {
    pub spec: SystemSpec<R>,
    pub s0: R,
    pub s_end: R,
    /// Nodes per axis.
    pub n: usize,
    /// Half-extent of the lattice; `None` picks the smallest domain with the
    /// required margin beyond the support radius at `s_end`.
    pub r_dom: Option<R>,
    /// CFL factor for the adaptive step `ds = cfl * h * min(s/t over domain)`.
    pub cfl: R,
    /// Fixed step size overriding the CFL rule (convergence studies).
    pub fixed_ds: Option<R>,
    pub order: StencilOrder,
    pub initial: Vec<InitialData<R>>,
    /// Emit an energy report every this many steps (plus first and last).
    pub cadence: usize,
    /// Keep a copy of the state every this many steps (0 = none).
    pub store_every: usize,
    pub forcing: Option<Forcing<R>>,
    /// Accumulate the energy-identity flux integral during the run.
    pub track_flux: bool,
    /// Multi-index order budget for per-slice energies in reports.
    pub zi_order: usize,
}

impl<R: Real> SolverConfig<R> {
    pub fn new(spec: SystemSpec<R>, s0: R, s_end: R, n: usize) -> Self {
        let n_comp = spec.n0;
        Self {
            spec,
            s0,
            s_end,
            n,
            r_dom: None,
            cfl: R::of(0.4),
            fixed_ds: None,
            order: StencilOrder::Four,
            initial: vec![InitialData::Zero; n_comp],
            cadence: 10,
            store_every: 0,
            forcing: None,
            track_flux: false,
            zi_order: 0,
        }
    }

    /// Margin in nodes between the support radius at `s_end` and the face.
    pub fn margin_nodes(&self) -> usize {
        self.order.half_width() + 2
    }

    /// Resolved lattice.
    pub fn grid(&self) -> Result<Grid<R>> {
        let r_support = geometry::slice_support_radius(self.s_end)?;
        let m = R::of_usize(self.margin_nodes());
        let r_dom = match self.r_dom {
            Some(r) => r,
            None => {
                // solve r = r_support + m*h with h = 2r/(n-1)
                let denom = R::one() - R::two() * m / R::of_usize(self.n - 1);
                r_support / denom
            }
        };
        let g = Grid::new(self.n, r_dom);
        if r_dom < r_support + m * g.h() - R::of(1e-9) {
            return Err(Error::DimensionMismatch(format!(
                "domain half-extent {:?} below support radius {:?} plus margin",
                r_dom.to_f64(),
                r_support.to_f64()
            )));
        }
        Ok(g)
    }

    /// CFL-limited step at hyperbolic time `s`; `min(s/t)` over the domain is
    /// attained at the far corner.
    pub fn ds_at(&self, s: R, grid: &Grid<R>) -> R {
        if let Some(ds) = self.fixed_ds {
            return ds;
        }
        let r = grid.r_dom();
        let t_corner = (s * s + R::of(3.0) * r * r).sqrt();
        self.cfl * grid.h() * s / t_corner
    }

    /// Initial slice sampled from the data descriptors, outer band zeroed.
    pub fn initial_slice(&self) -> Result<GridSlice<R>> {
        let grid = self.grid()?;
        if self.initial.len() != self.spec.n0 {
            return Err(Error::DimensionMismatch(format!(
                "{} initial data descriptors for {} components",
                self.initial.len(),
                self.spec.n0
            )));
        }
        let mut slice = GridSlice::zeros(grid, self.s0, self.spec.n0);
        for (c, init) in self.initial.iter().enumerate() {
            let w = grid.sample(|x| init.eval(x).0);
            let v = grid.sample(|x| init.eval(x).1);
            slice.w[c] = w;
            slice.v[c] = v;
        }
        slice.zero_outer_band();
        Ok(slice)
    }
}

// ---------------------------------------------------------------------------
// Right-hand side
// ---------------------------------------------------------------------------

/// The slice acceleration `dv/ds` for every component (the `dw/ds` part of
/// the reduction is `v` itself). Nodes outside the active support band
/// produce zero.
///
/// Errors with quasilinear-breakdown (worst point named) when
/// `||Gbar^{00}||_inf > 0.5` anywhere on the slice.
pub fn rhs_accel<R: Real>(
    grid: &Grid<R>,
    spec: &SystemSpec<R>,
    sparse: &SparseSystem<R>,
    s: R,
    w: &[Vec<R>],
    v: &[Vec<R>],
    order: StencilOrder,
    forcing: Option<&Forcing<R>>,
    out: &mut [Vec<R>],
) -> Result<()> {
    let n0 = spec.n0;
    assert!(n0 <= MAX_COMPONENTS);
    let n = grid.n();
    let hw = order.half_width();
    let semilinear = sparse.a.is_empty() && sparse.b.is_empty();
    let r_active = geometry::slice_support_radius(s)? + R::two() * grid.h();
    let h = grid.h();

    struct PlaneOut<R> {
        accel: Vec<R>, // n0 * n * n, component-major within the plane
        worst_g00: f64,
        worst_at: [usize; 3],
    }

    let planes: Vec<PlaneOut<R>> = (0..n)
        .into_par_iter()
        .map(|iz| {
            let mut accel = vec![R::zero(); n0 * n * n];
            let mut worst_g00 = 0.0f64;
            let mut worst_at = [0usize; 3];

            let mut wk = [R::zero(); MAX_COMPONENTS];
            let mut vk = [R::zero(); MAX_COMPONENTS];
            let mut daw = [[R::zero(); 3]; MAX_COMPONENTS];
            let mut dav = [[R::zero(); 3]; MAX_COMPONENTS];
            let mut lap = [R::zero(); MAX_COMPONENTS];
            let mut dabw = [[R::zero(); 6]; MAX_COMPONENTS]; // xx,yy,zz,xy,xz,yz
            let mut dw_nat = [[R::zero(); 4]; MAX_COMPONENTS];
            let mut gmat = [[[[R::zero(); 4]; 4]; MAX_COMPONENTS]; MAX_COMPONENTS];
            let mut explicit = [R::zero(); MAX_COMPONENTS];
            let mut m = [[R::zero(); MAX_COMPONENTS]; MAX_COMPONENTS];

            for iy in 0..n {
                for ix in 0..n {
                    let idx3 = [ix, iy, iz];
                    if !grid.interior(idx3, hw) {
                        continue;
                    }
                    let x = grid.point(idx3);
                    let r2 = geometry::norm2(x);
                    if r2.sqrt() > r_active {
                        continue;
                    }
                    let t = (s * s + r2).sqrt();
                    let flat = grid.idx(idx3);

                    // gather stencil data
                    for c in 0..n0 {
                        wk[c] = w[c][flat];
                        vk[c] = v[c][flat];
                        lap[c] = R::zero();
                        for a in 0..3 {
                            daw[c][a] = grid.d1(&w[c], idx3, a, order);
                            dav[c][a] = grid.d1(&v[c], idx3, a, order);
                            let dd = grid.d2(&w[c], idx3, a, order);
                            dabw[c][a] = dd;
                            lap[c] = lap[c] + dd;
                        }
                        if !semilinear {
                            dabw[c][3] = grid.d1d1(&w[c], idx3, 0, 1, order);
                            dabw[c][4] = grid.d1d1(&w[c], idx3, 0, 2, order);
                            dabw[c][5] = grid.d1d1(&w[c], idx3, 1, 2, order);
                        }
                        // natural-chart gradient
                        dw_nat[c][0] = t / s * vk[c];
                        for a in 0..3 {
                            dw_nat[c][a + 1] = daw[c][a] - x[a] / s * vk[c];
                        }
                    }

                    // explicit terms common to both paths
                    for i in 0..n0 {
                        let mut e = lap[i] - R::of(3.0) / s * vk[i] - spec.c[i] * spec.c[i] * wk[i];
                        for a in 0..3 {
                            e = e - R::two() * x[a] / s * dav[i][a];
                        }
                        if let Some(f) = forcing {
                            e = e + f(i, s, x);
                        }
                        explicit[i] = e;
                    }
                    // interaction source F from the sparse lists
                    for &([i, al, be, j, k], val) in &sparse.p {
                        explicit[i] = explicit[i] + val * dw_nat[j][al] * dw_nat[k][be];
                    }
                    for &([i, al, j, k], val) in &sparse.q {
                        explicit[i] = explicit[i] + val * wk[k] * dw_nat[j][al];
                    }
                    for &([i, j, k], val) in &sparse.r {
                        explicit[i] = explicit[i] + val * wk[j] * wk[k];
                    }

                    if semilinear {
                        for c in 0..n0 {
                            accel[c * n * n + iy * n + ix] = explicit[c];
                        }
                        continue;
                    }

                    // quasilinear path: assemble G_i^{j alpha beta}
                    for i in 0..n0 {
                        for j in 0..n0 {
                            for al in 0..4 {
                                for be in 0..4 {
                                    gmat[i][j][al][be] = R::zero();
                                }
                            }
                        }
                    }
                    for &([i, j, al, be, ga, k], val) in &sparse.a {
                        gmat[i][j][al][be] = gmat[i][j][al][be] + val * dw_nat[k][ga];
                    }
                    for &([i, j, al, be, k], val) in &sparse.b {
                        gmat[i][j][al][be] = gmat[i][j][al][be] + val * wk[k];
                    }

                    // graph-chart transition column and its derivatives
                    let psi = [t / s, -x[0] / s, -x[1] / s, -x[2] / s];
                    let p = FoliationPoint::new(t, x);
                    let dpsi0 = geometry::graph_chart_dpsi0(&p);

                    for i in 0..n0 {
                        let mut row_norm = 0.0f64;
                        for j in 0..n0 {
                            let gm = &gmat[i][j];
                            // Gbar^{00} = psi_mu psi_nu G^{mu nu}
                            let mut g00 = R::zero();
                            for mu in 0..4 {
                                for nu in 0..4 {
                                    g00 = g00 + psi[mu] * psi[nu] * gm[mu][nu];
                                }
                            }
                            m[i][j] = g00;
                            row_norm += g00.abs().to_f64().unwrap_or(f64::INFINITY);

                            // (Gbar^{0a} + Gbar^{a0}) da v_j, Gbar^{ab} dab w_j
                            for a in 0..3 {
                                let mut g0a = R::zero();
                                for mu in 0..4 {
                                    g0a = g0a + psi[mu] * (gm[mu][a + 1] + gm[a + 1][mu]);
                                }
                                explicit[i] = explicit[i] - g0a * dav[j][a];
                                for b in 0..3 {
                                    let gab = gm[a + 1][b + 1];
                                    if gab != R::zero() {
                                        let dab = match (a.min(b), a.max(b)) {
                                            (0, 0) => dabw[j][0],
                                            (1, 1) => dabw[j][1],
                                            (2, 2) => dabw[j][2],
                                            (0, 1) => dabw[j][3],
                                            (0, 2) => dabw[j][4],
                                            _ => dabw[j][5],
                                        };
                                        explicit[i] = explicit[i] - gab * dab;
                                    }
                                }
                            }
                            // lower-order coefficient l_ij = G^{alpha beta} d_alpha psi_beta^0
                            let mut l = R::zero();
                            for al in 0..4 {
                                for be in 0..4 {
                                    l = l + gm[al][be] * dpsi0[al][be];
                                }
                            }
                            explicit[i] = explicit[i] - l * vk[j];
                        }
                        if row_norm > worst_g00 {
                            worst_g00 = row_norm;
                            worst_at = idx3;
                        }
                    }

                    // solve (I + Gbar^{00}) a = explicit
                    for i in 0..n0 {
                        m[i][i] = m[i][i] + R::one();
                    }
                    let sol = solve_small(&mut m, &mut explicit, n0);
                    for (c, &val) in sol.iter().enumerate().take(n0) {
                        accel[c * n * n + iy * n + ix] = val;
                    }
                }
            }
            PlaneOut { accel, worst_g00, worst_at }
        })
        .collect();

    if !semilinear {
        let worst = planes
            .iter()
            .max_by(|a, b| a.worst_g00.total_cmp(&b.worst_g00))
            .unwrap();
        if worst.worst_g00 > G00_LIMIT {
            return Err(Error::QuasilinearBreakdown {
                norm: worst.worst_g00,
                limit: G00_LIMIT,
                index: worst.worst_at,
                s: s.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    for (c, o) in out.iter_mut().enumerate().take(n0) {
        o.par_chunks_mut(n * n).enumerate().for_each(|(iz, plane)| {
            plane.copy_from_slice(&planes[iz].accel[c * n * n..(c + 1) * n * n]);
        });
    }
    Ok(())
}

/// Gaussian elimination with partial pivoting on the fixed-size scratch.
fn solve_small<R: Real>(
    m: &mut [[R; MAX_COMPONENTS]; MAX_COMPONENTS],
    rhs: &mut [R; MAX_COMPONENTS],
    n: usize,
) -> [R; MAX_COMPONENTS] {
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if piv != col {
            m.swap(piv, col);
            rhs.swap(piv, col);
        }
        let d = m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / d;
            if f == R::zero() {
                continue;
            }
            for k in col..n {
                m[row][k] = m[row][k] - f * m[col][k];
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut out = [R::zero(); MAX_COMPONENTS];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc = acc - m[col][k] * out[k];
        }
        out[col] = acc / m[col][col];
    }
    out
}

/// Convenience wrapper matching the first-order reduction: returns
/// `(dw/ds, dv/ds)` for a slice.
pub fn rhs<R: Real>(
    slice: &GridSlice<R>,
    spec: &SystemSpec<R>,
    forcing: Option<&Forcing<R>>,
    order: StencilOrder,
) -> Result<(Vec<Vec<R>>, Vec<Vec<R>>)> {
    let sparse = spec.sparse();
    let mut accel: Vec<Vec<R>> = (0..spec.n0).map(|_| slice.grid.zeros()).collect();
    rhs_accel(
        &slice.grid,
        spec,
        &sparse,
        slice.s,
        &slice.w,
        &slice.v,
        order,
        forcing,
        &mut accel,
    )?;
    Ok((slice.v.clone(), accel))
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

fn axpy_fields<R: Real>(y: &[Vec<R>], k: &[Vec<R>], a: R) -> Vec<Vec<R>> {
    y.iter()
        .zip(k.iter())
        .map(|(yc, kc)| {
            let mut out = vec![R::zero(); yc.len()];
            out.par_chunks_mut(1 << 14)
                .zip(yc.par_chunks(1 << 14).zip(kc.par_chunks(1 << 14)))
                .for_each(|(o, (yy, kk))| {
                    for i in 0..o.len() {
                        o[i] = yy[i] + a * kk[i];
                    }
                });
            out
        })
        .collect()
}

fn rk4_combine<R: Real>(
    y: &[Vec<R>],
    k1: &[Vec<R>],
    k2: &[Vec<R>],
    k3: &[Vec<R>],
    k4: &[Vec<R>],
    ds: R,
) -> Vec<Vec<R>> {
    let c = ds / R::of(6.0);
    y.iter()
        .zip(k1.iter().zip(k2.iter().zip(k3.iter().zip(k4.iter()))))
        .map(|(yc, (a, (b, (cc, d))))| {
            let mut out = vec![R::zero(); yc.len()];
            out.par_chunks_mut(1 << 14)
                .enumerate()
                .for_each(|(ci, o)| {
                    let base = ci * (1 << 14);
                    for i in 0..o.len() {
                        let j = base + i;
                        o[i] = yc[j] + c * (a[j] + R::two() * (b[j] + cc[j]) + d[j]);
                    }
                });
            out
        })
        .collect()
}

/// One classical four-stage explicit step of size `ds`; recomputes the
/// support mask at the new time, hard-zeroes the outer band, and scans for
/// non-finite values.
pub fn step<R: Real>(
    slice: &GridSlice<R>,
    spec: &SystemSpec<R>,
    sparse: &SparseSystem<R>,
    config: &SolverConfig<R>,
    ds: R,
) -> Result<GridSlice<R>> {
    let grid = slice.grid;
    let order = config.order;
    let forcing = config.forcing.as_ref();
    let half = ds * R::half();
    let s = slice.s;
    let mut k = |sv: R, wv: &[Vec<R>], vv: &[Vec<R>]| -> Result<Vec<Vec<R>>> {
        let mut out: Vec<Vec<R>> = (0..spec.n0).map(|_| grid.zeros()).collect();
        rhs_accel(&grid, spec, sparse, sv, wv, vv, order, forcing, &mut out)?;
        Ok(out)
    };

    let k1 = k(s, &slice.w, &slice.v)?;
    let w1 = axpy_fields(&slice.w, &slice.v, half);
    let v1 = axpy_fields(&slice.v, &k1, half);
    let k2 = k(s + half, &w1, &v1)?;
    let w2 = axpy_fields(&slice.w, &v1, half);
    let v2 = axpy_fields(&slice.v, &k2, half);
    let k3 = k(s + half, &w2, &v2)?;
    let w3 = axpy_fields(&slice.w, &v2, ds);
    let v3 = axpy_fields(&slice.v, &k3, ds);
    let k4 = k(s + ds, &w3, &v3)?;

    let w_new = rk4_combine(&slice.w, &slice.v, &v1, &v2, &v3, ds);
    let v_new = rk4_combine(&slice.v, &k1, &k2, &k3, &k4, ds);

    let mut out = GridSlice { grid, s: s + ds, w: w_new, v: v_new };
    out.zero_outer_band();
    if let Some(index) = out.find_non_finite() {
        return Err(Error::InstabilityDetected {
            index,
            s: out.s.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Evolution driver
// ---------------------------------------------------------------------------

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum TerminationStatus {
    Completed,
    QuasilinearBreakdown { s: f64, norm: f64, index: [usize; 3] },
    InstabilityDetected { s: f64, index: [usize; 3] },
}

impl TerminationStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TerminationStatus::Completed => "completed",
            TerminationStatus::QuasilinearBreakdown { .. } => "quasilinear-breakdown",
            TerminationStatus::InstabilityDetected { .. } => "instability-detected",
        }
    }
}

/// Result of an evolution run: per-cadence energy reports, optional stored
/// slices, the accumulated energy-identity flux, and the termination status.
#[derive(Clone, Debug)]
pub struct EvolutionResult<R: Real> {
    pub series: Vec<(R, crate::diagnostics::EnergyReport<R>)>,
    pub snapshots: Vec<GridSlice<R>>,
    pub status: TerminationStatus,
    pub steps: usize,
    /// Per-component accumulated `int (tau/t) d_t w_i * F_i dx dtau`.
    pub flux: Vec<R>,
}

/// Evolve the configured system from `H_{s0}` to `H_{s_end}`.
///
/// Diagnostics are emitted every `cadence` steps; breakdown and instability
/// conditions terminate the run early with the corresponding status.
pub fn evolve<R: Real>(config: &SolverConfig<R>) -> Result<EvolutionResult<R>> {
    let sparse = config.spec.sparse();
    let mut slice = config.initial_slice()?;
    let grid = slice.grid;

    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let mut flux = vec![R::zero(); config.spec.n0];
    let mut steps = 0usize;

    let report = |sl: &GridSlice<R>| {
        crate::diagnostics::EnergyReport::compute(sl, &config.spec, config.zi_order)
    };
    series.push((slice.s, report(&slice)?));
    if config.store_every > 0 {
        snapshots.push(slice.clone());
    }
    let mut flux_prev = if config.track_flux {
        flux_integrand(&slice, &config.spec, &sparse, config.forcing.as_ref())
    } else {
        vec![R::zero(); config.spec.n0]
    };

    let status = loop {
        if slice.s >= config.s_end - R::of(1e-12) {
            break TerminationStatus::Completed;
        }
        let ds = config
            .ds_at(slice.s, &grid)
            .min(config.s_end - slice.s);
        match step(&slice, &config.spec, &sparse, config, ds) {
            Ok(next) => {
                slice = next;
                steps += 1;
                if config.track_flux {
                    let cur =
                        flux_integrand(&slice, &config.spec, &sparse, config.forcing.as_ref());
                    for i in 0..flux.len() {
                        flux[i] = flux[i] + ds * R::half() * (flux_prev[i] + cur[i]);
                    }
                    flux_prev = cur;
                }
                let last = slice.s >= config.s_end - R::of(1e-12);
                if steps % config.cadence.max(1) == 0 || last {
                    series.push((slice.s, report(&slice)?));
                }
                if config.store_every > 0 && (steps % config.store_every == 0 || last) {
                    snapshots.push(slice.clone());
                }
            }
            Err(Error::QuasilinearBreakdown { norm, index, s, .. }) => {
                break TerminationStatus::QuasilinearBreakdown { s, norm, index };
            }
            Err(Error::InstabilityDetected { index, s }) => {
                break TerminationStatus::InstabilityDetected { s, index };
            }
            Err(e) => return Err(e),
        }
    };

    Ok(EvolutionResult { series, snapshots, status, steps, flux })
}

/// `int_{H_s} (s/t) d_t w_i * (F_i + forcing_i) dx` for each component: the
/// instantaneous energy-identity flux.
pub fn flux_integrand<R: Real>(
    slice: &GridSlice<R>,
    spec: &SystemSpec<R>,
    sparse: &SparseSystem<R>,
    forcing: Option<&Forcing<R>>,
) -> Vec<R> {
    let g = slice.grid;
    let s = slice.s;
    let h3 = g.h() * g.h() * g.h();
    let hw = StencilOrder::Four.half_width();
    (0..spec.n0)
        .map(|i| {
            g.sum_nodes(|ix| {
                if !g.interior(ix, hw) {
                    return R::zero();
                }
                let x = g.point(ix);
                let t = (s * s + geometry::norm2(x)).sqrt();
                let flat = g.idx(ix);
                let mut wk = [R::zero(); MAX_COMPONENTS];
                let mut dw = [[R::zero(); 4]; MAX_COMPONENTS];
                for c in 0..spec.n0 {
                    wk[c] = slice.w[c][flat];
                    let vc = slice.v[c][flat];
                    dw[c][0] = t / s * vc;
                    for a in 0..3 {
                        dw[c][a + 1] = g.d1(&slice.w[c], ix, a, StencilOrder::Four)
                            - x[a] / s * vc;
                    }
                }
                let mut src = R::zero();
                for &([ii, al, be, j, k], val) in &sparse.p {
                    if ii == i {
                        src = src + val * dw[j][al] * dw[k][be];
                    }
                }
                for &([ii, al, j, k], val) in &sparse.q {
                    if ii == i {
                        src = src + val * wk[k] * dw[j][al];
                    }
                }
                for &([ii, j, k], val) in &sparse.r {
                    if ii == i {
                        src = src + val * wk[j] * wk[k];
                    }
                }
                if let Some(f) = forcing {
                    src = src + f(i, s, x);
                }
                // (s/t) d_t w = v
                slice.v[i][flat] * src
            }) * h3
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Built-in model systems driving the verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// One Klein-Gordon component, no interactions.
    LinearKg,
    /// Scalar wave with the null self-interaction `Box u = Q0(du, du)`.
    NullWave,
    /// Scalar wave with the non-null source `Box u = (d_t u)^2`.
    NonnullWave,
    /// Coupled model `Box u = Q0(du, du)`, `Box v + v = (d_t u)^2`.
    Coupled,
}

impl Preset {
    pub const ALL: [Preset; 4] =
        [Preset::LinearKg, Preset::NullWave, Preset::NonnullWave, Preset::Coupled];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::LinearKg => "linear-kg",
            Preset::NullWave => "null-wave",
            Preset::NonnullWave => "nonnull-wave",
            Preset::Coupled => "coupled",
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn spec<R: Real>(&self) -> SystemSpec<R> {
        match self {
            Preset::LinearKg => SystemSpec::zeros(1, 0, R::one()),
            Preset::NullWave => {
                let mut s = SystemSpec::zeros(1, 1, R::one());
                let m = geometry::minkowski::<R>();
                for al in 0..4 {
                    for be in 0..4 {
                        s.set_p(0, al, be, 0, 0, m[al][be]);
                    }
                }
                s
            }
            Preset::NonnullWave => {
                let mut s = SystemSpec::zeros(1, 1, R::one());
                s.set_p(0, 0, 0, 0, 0, R::one());
                s
            }
            Preset::Coupled => {
                let mut s = SystemSpec::zeros(2, 1, R::one());
                let m = geometry::minkowski::<R>();
                for al in 0..4 {
                    for be in 0..4 {
                        s.set_p(0, al, be, 0, 0, m[al][be]);
                    }
                }
                s.set_p(1, 0, 0, 0, 0, R::one());
                s
            }
        }
    }

    /// Default bump data: amplitude 1 for the linear model, `1e-3` for the
    /// interacting ones, supported in 90% of the initial support radius.
    pub fn initial<R: Real>(&self, s0: R, amplitude: Option<R>) -> Vec<InitialData<R>> {
        let radius = geometry::slice_support_radius(s0)
            .map(|r| r * R::of(0.9))
            .unwrap_or(R::one());
        let amp = |def: f64| amplitude.unwrap_or(R::of(def));
        match self {
            Preset::LinearKg => vec![InitialData::Bump { amplitude: amp(1.0), radius }],
            Preset::NullWave | Preset::NonnullWave => {
                vec![InitialData::Bump { amplitude: amp(1e-3), radius }]
            }
            Preset::Coupled => vec![
                InitialData::Bump { amplitude: amp(1e-3), radius },
                InitialData::Bump { amplitude: amp(1e-3), radius },
            ],
        }
    }
}
