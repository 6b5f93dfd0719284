//! Admissible vector fields `Z in {d_alpha, L_a}` as discrete operators on
//! slice data, and the exact commutator coefficient tables.
//!
//! A slice field is stored together with its pure time-derivative co-fields
//! (`g`, `d_t g`, `d_t^2 g`, ...) -- a [`SliceJet`]. Tangential derivatives on
//! a hyperboloid coincide with the frame derivatives `da = (x^a/t) d_t + d_a`,
//! so every admissible field acts on a jet through lattice stencils and the
//! co-fields alone:
//!
//! * `L_a g  = t * Da g`
//! * `d_a g  = Da g - (x^a/t) d_t g`
//! * `d_t^k (L_a g) = L_a (d_t^k g) + k d_a (d_t^{k-1} g)`
//!
//! Applying a translation consumes one co-field level; boosts preserve depth.

use crate::grid::{Grid, StencilOrder};
use crate::{Error, Real, Result};

/// One of the seven admissible vector fields: four translations `d_alpha`
/// (alpha in 0..=3, 0 is time) and three Lorentz boosts `L_a = x^a d_t + t d_a`
/// (a in 1..=3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdmissibleField {
    Translation(usize),
    Boost(usize),
}

impl AdmissibleField {
    /// The full family, translations first.
    pub fn all() -> [AdmissibleField; 7] {
        [
            AdmissibleField::Translation(0),
            AdmissibleField::Translation(1),
            AdmissibleField::Translation(2),
            AdmissibleField::Translation(3),
            AdmissibleField::Boost(1),
            AdmissibleField::Boost(2),
            AdmissibleField::Boost(3),
        ]
    }

    /// Co-field depth consumed by one application.
    pub fn depth_cost(&self) -> usize {
        match self {
            AdmissibleField::Translation(_) => 1,
            AdmissibleField::Boost(_) => 0,
        }
    }

    /// Lattice margin (in nodes) consumed by one application.
    pub fn margin_cost(&self, order: StencilOrder) -> usize {
        match self {
            AdmissibleField::Translation(0) => 0,
            _ => order.half_width(),
        }
    }
}

impl std::fmt::Display for AdmissibleField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdmissibleField::Translation(a) => write!(f, "d{a}"),
            AdmissibleField::Boost(a) => write!(f, "L{a}"),
        }
    }
}

/// An ordered product of admissible fields, `ops[0]` outermost, or the formal
/// zero operator (the `Z^I = 0, |I| < 0` convention).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultiIndex {
    Ops(Vec<AdmissibleField>),
    Null,
}

impl MultiIndex {
    pub fn identity() -> Self {
        MultiIndex::Ops(Vec::new())
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            MultiIndex::Ops(v) => Some(v.len()),
            MultiIndex::Null => None,
        }
    }

    /// Co-field depth a jet must carry for the value of `Z^I g`.
    pub fn depth_needed(&self) -> usize {
        match self {
            MultiIndex::Ops(v) => v.iter().map(|z| z.depth_cost()).sum(),
            MultiIndex::Null => 0,
        }
    }

    /// All length-`m` products over the family, in lexicographic order.
    pub fn enumerate(m: usize) -> Vec<MultiIndex> {
        let mut out = vec![Vec::new()];
        for _ in 0..m {
            let mut next = Vec::with_capacity(out.len() * 7);
            for pre in &out {
                for z in AdmissibleField::all() {
                    let mut v = pre.clone();
                    v.push(z);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(MultiIndex::Ops).collect()
    }
}

// ---------------------------------------------------------------------------
// Commutator coefficient tables
// ---------------------------------------------------------------------------

/// Closed-form coefficient appearing in the commutator tables: a constant or
/// one of the homogeneous functions `scale / t`, `scale * x^a / t^pow`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CommCoeff {
    Const(f64),
    OneOverT { scale: f64 },
    XOverT { axis: usize, scale: f64, t_pow: i32 },
}

impl CommCoeff {
    pub fn eval<R: Real>(&self, t: R, x: [R; 3]) -> R {
        match *self {
            CommCoeff::Const(c) => R::of(c),
            CommCoeff::OneOverT { scale } => R::of(scale) / t,
            CommCoeff::XOverT { axis, scale, t_pow } => {
                R::of(scale) * x[axis - 1] / t.powi(t_pow)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CommCoeff::Const(c) if *c == 0.0)
    }
}

/// The constant/coefficient tables `Theta`, `GammaBar`, `ThetaBar` of the
/// base commutators:
///
/// * `[L_a, d_beta]  = Theta_{a beta}^gamma d_gamma` (constants),
/// * `[d_alpha, db_beta] = t^{-1} GammaBar_{alpha beta}^gamma d_gamma`,
/// * `[L_a, db_beta] = ThetaBar_{a beta}^gamma db_gamma`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CommutatorTable;

impl CommutatorTable {
    /// `Theta_{a beta}^gamma`: `Theta_{ab}^gamma = -delta_ab delta_0^gamma`,
    /// `Theta_{a0}^gamma = -delta_a^gamma`.
    pub fn theta(a: usize, beta: usize, gamma: usize) -> f64 {
        debug_assert!((1..=3).contains(&a) && beta < 4 && gamma < 4);
        if beta == 0 {
            if gamma == a {
                -1.0
            } else {
                0.0
            }
        } else if beta == a && gamma == 0 {
            -1.0
        } else {
            0.0
        }
    }

    /// `GammaBar_{alpha beta}^gamma` as a closed form (the `t^{-1}` prefactor
    /// of the commutator is *not* included here, matching the table):
    /// `GammaBar_{ab}^gamma = delta_ab delta_0^gamma`,
    /// `GammaBar_{0b}^gamma = -(x^b/t) delta_0^gamma`,
    /// `GammaBar_{alpha 0}^gamma = 0`.
    pub fn gamma_bar(alpha: usize, beta: usize, gamma: usize) -> CommCoeff {
        debug_assert!(alpha < 4 && beta < 4 && gamma < 4);
        if beta == 0 || gamma != 0 {
            CommCoeff::Const(0.0)
        } else if alpha == 0 {
            CommCoeff::XOverT { axis: beta, scale: -1.0, t_pow: 1 }
        } else if alpha == beta {
            CommCoeff::Const(1.0)
        } else {
            CommCoeff::Const(0.0)
        }
    }

    /// `ThetaBar_{a beta}^gamma`:
    /// `ThetaBar_{ab}^gamma = -(x^b/t) delta_a^gamma`,
    /// `ThetaBar_{a0}^gamma = -delta_a^gamma + (x^a/t) delta_0^gamma`.
    pub fn theta_bar(a: usize, beta: usize, gamma: usize) -> CommCoeff {
        debug_assert!((1..=3).contains(&a) && beta < 4 && gamma < 4);
        if beta == 0 {
            if gamma == a {
                CommCoeff::Const(-1.0)
            } else if gamma == 0 {
                CommCoeff::XOverT { axis: a, scale: 1.0, t_pow: 1 }
            } else {
                CommCoeff::Const(0.0)
            }
        } else if gamma == a {
            CommCoeff::XOverT { axis: beta, scale: -1.0, t_pow: 1 }
        } else {
            CommCoeff::Const(0.0)
        }
    }
}

/// Which first-order operator a commutator entry refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    /// Natural-frame `d_beta`.
    Natural(usize),
    /// Semi-hyperboloidal `db_beta`.
    Frame(usize),
}

/// Expansion of a commutator `[Z, D]` as `sum_gamma coeff_gamma * D'_gamma`.
#[derive(Clone, Debug)]
pub struct CommutatorExpansion {
    pub terms: Vec<(DerivativeKind, CommCoeff)>,
}

/// Closed-form expansion of `[Z, D]` from the base tables. Only boosts and
/// translations commuted against natural or frame derivatives are defined.
pub fn commutator_coefficients(z: AdmissibleField, d: DerivativeKind) -> CommutatorExpansion {
    let mut terms = Vec::new();
    match (z, d) {
        (AdmissibleField::Translation(_), DerivativeKind::Natural(_)) => {}
        (AdmissibleField::Boost(a), DerivativeKind::Natural(beta)) => {
            for gamma in 0..4 {
                let c = CommutatorTable::theta(a, beta, gamma);
                if c != 0.0 {
                    terms.push((DerivativeKind::Natural(gamma), CommCoeff::Const(c)));
                }
            }
        }
        (AdmissibleField::Translation(alpha), DerivativeKind::Frame(beta)) => {
            for gamma in 0..4 {
                // fold the t^{-1} prefactor of the table definition into the
                // reported coefficient
                let folded = match CommutatorTable::gamma_bar(alpha, beta, gamma) {
                    CommCoeff::Const(v) if v != 0.0 => CommCoeff::OneOverT { scale: v },
                    CommCoeff::XOverT { axis, scale, t_pow } => {
                        CommCoeff::XOverT { axis, scale, t_pow: t_pow + 1 }
                    }
                    other => other,
                };
                if !folded.is_zero() {
                    terms.push((DerivativeKind::Natural(gamma), folded));
                }
            }
        }
        (AdmissibleField::Boost(a), DerivativeKind::Frame(beta)) => {
            for gamma in 0..4 {
                let c = CommutatorTable::theta_bar(a, beta, gamma);
                if !c.is_zero() {
                    terms.push((DerivativeKind::Frame(gamma), c));
                }
            }
        }
    }
    CommutatorExpansion { terms }
}

/// Coefficient pair recovering the rotation `Omega_ab = x^a d_b - x^b d_a`
/// from boosts: `Omega_ab = (x^a/t) L_b - (x^b/t) L_a`.
pub fn rotation_from_boosts<R: Real>(a: usize, b: usize, t: R, x: [R; 3]) -> (R, R) {
    debug_assert!((1..=3).contains(&a) && (1..=3).contains(&b));
    (x[a - 1] / t, -x[b - 1] / t)
}

// ---------------------------------------------------------------------------
// Slice jets: fields with time-derivative co-fields
// ---------------------------------------------------------------------------

/// A field sampled on a hyperboloid `H_s` together with `depth` pure
/// time-derivative co-fields. `levels[k]` holds `(d_t)^k g` on the slice.
#[derive(Clone, Debug)]
pub struct SliceJet<R: Real> {
    pub grid: Grid<R>,
    pub s: R,
    pub levels: Vec<Vec<R>>,
    pub order: StencilOrder,
    /// Nodes within this distance of a face hold invalid (zero) data.
    pub margin: usize,
}

impl<R: Real> SliceJet<R> {
    pub fn new(grid: Grid<R>, s: R, levels: Vec<Vec<R>>, order: StencilOrder) -> Self {
        assert!(!levels.is_empty());
        Self { grid, s, levels, order, margin: 0 }
    }

    /// Build a jet by sampling analytic time derivatives: `dk(k, t, x)` must
    /// return `(d_t)^k u` at the event lifted from `(s, x)`.
    pub fn from_analytic<F>(grid: Grid<R>, s: R, depth: usize, order: StencilOrder, dk: F) -> Self
    where
        F: Fn(usize, R, [R; 3]) -> R + Sync,
    {
        let levels = (0..=depth)
            .map(|k| {
                grid.sample(|x| {
                    let t = (s * s + crate::geometry::norm2(x)).sqrt();
                    dk(k, t, x)
                })
            })
            .collect();
        Self { grid, s, levels, order, margin: 0 }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn value(&self) -> &[R] {
        &self.levels[0]
    }

    pub fn dt(&self) -> Result<&[R]> {
        self.levels.get(1).map(Vec::as_slice).ok_or(Error::MissingCoField)
    }

    /// `t` at a node of this slice.
    #[inline]
    pub fn t_at(&self, i: [usize; 3]) -> R {
        let x = self.grid.point(i);
        (self.s * self.s + crate::geometry::norm2(x)).sqrt()
    }

    /// Apply one admissible field, producing the jet of `Z g`.
    ///
    /// The output depth is `depth - cost` for translations and `depth` for
    /// boosts; a translation on a depth-0 jet is a missing co-field error.
    pub fn apply(&self, z: AdmissibleField) -> Result<SliceJet<R>> {
        let depth = self.depth();
        let grid = self.grid;
        let order = self.order;
        let hw = z.margin_cost(order);
        let new_margin = self.margin + hw;
        if 2 * new_margin >= grid.n() {
            return Err(Error::MarginViolation {
                need: new_margin,
                index: [grid.n() / 2; 3],
            });
        }
        let levels: Vec<Vec<R>> = match z {
            AdmissibleField::Translation(0) => {
                if depth == 0 {
                    return Err(Error::MissingCoField);
                }
                self.levels[1..].to_vec()
            }
            AdmissibleField::Translation(a) => {
                if depth == 0 {
                    return Err(Error::MissingCoField);
                }
                (0..depth)
                    .map(|k| {
                        grid.map_interior(new_margin, |i| {
                            let t = self.t_at(i);
                            let x = grid.point(i);
                            grid.d1(&self.levels[k], i, a - 1, order)
                                - x[a - 1] / t * self.levels[k + 1][grid.idx(i)]
                        })
                    })
                    .collect()
            }
            AdmissibleField::Boost(a) => (0..=depth)
                .map(|k| {
                    grid.map_interior(new_margin, |i| {
                        let t = self.t_at(i);
                        let x = grid.point(i);
                        let boost = t * grid.d1(&self.levels[k], i, a - 1, order);
                        if k == 0 {
                            boost
                        } else {
                            let lower = grid.d1(&self.levels[k - 1], i, a - 1, order)
                                - x[a - 1] / t * self.levels[k][grid.idx(i)];
                            boost + R::of_usize(k) * lower
                        }
                    })
                })
                .collect(),
        };
        Ok(SliceJet { grid, s: self.s, levels, order, margin: new_margin })
    }

    /// Apply a multi-index in sequence order (`ops[0]` outermost). The null
    /// operator yields the zero jet; the empty product returns a clone.
    pub fn apply_multi(&self, index: &MultiIndex) -> Result<SliceJet<R>> {
        match index {
            MultiIndex::Null => Ok(SliceJet {
                grid: self.grid,
                s: self.s,
                levels: vec![self.grid.zeros()],
                order: self.order,
                margin: self.margin,
            }),
            MultiIndex::Ops(ops) => {
                let mut jet = self.clone();
                for z in ops.iter().rev() {
                    jet = jet.apply(*z)?;
                }
                Ok(jet)
            }
        }
    }

    /// Frame derivative `da g = t^{-1} L_a g` (tangential) at a node.
    #[inline]
    pub fn frame_da(&self, i: [usize; 3], a: usize) -> R {
        self.grid.d1(&self.levels[0], i, a - 1, self.order)
    }

    /// Natural spatial derivative `d_a g` at a node (needs the co-field).
    #[inline]
    pub fn natural_da(&self, i: [usize; 3], a: usize) -> R {
        let t = self.t_at(i);
        let x = self.grid.point(i);
        self.frame_da(i, a) - x[a - 1] / t * self.levels[1][self.grid.idx(i)]
    }
}

/// Evaluate `Z g` at a single node of a jet.
pub fn apply_field<R: Real>(
    z: AdmissibleField,
    jet: &SliceJet<R>,
    i: [usize; 3],
) -> Result<R> {
    let need = jet.margin + z.margin_cost(jet.order);
    jet.grid.check_margin(i, need)?;
    if z.depth_cost() > jet.depth() {
        return Err(Error::MissingCoField);
    }
    let t = jet.t_at(i);
    Ok(match z {
        AdmissibleField::Translation(0) => jet.levels[1][jet.grid.idx(i)],
        AdmissibleField::Translation(a) => jet.natural_da(i, a),
        AdmissibleField::Boost(a) => t * jet.frame_da(i, a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    const S: f64 = 3.0;

    fn grid() -> Grid<f64> {
        Grid::new(49, 2.0)
    }

    /// Analytic jet of u(t, x) = t.
    fn jet_t(depth: usize) -> SliceJet<f64> {
        SliceJet::from_analytic(grid(), S, depth, StencilOrder::Four, |k, t, _| match k {
            0 => t,
            1 => 1.0,
            _ => 0.0,
        })
    }

    /// Analytic jet of u = x^1.
    fn jet_x1(depth: usize) -> SliceJet<f64> {
        SliceJet::from_analytic(grid(), S, depth, StencilOrder::Four, |k, _, x| match k {
            0 => x[0],
            _ => 0.0,
        })
    }

    /// Analytic jet of u = t^2 - r^2.
    fn jet_s2(depth: usize) -> SliceJet<f64> {
        SliceJet::from_analytic(grid(), S, depth, StencilOrder::Four, |k, t, x| match k {
            0 => t * t - crate::geometry::norm2(x),
            1 => 2.0 * t,
            2 => 2.0,
            _ => 0.0,
        })
    }

    #[test]
    fn seven_admissible_fields() {
        assert_eq!(AdmissibleField::all().len(), 7);
    }

    #[test]
    fn boost_of_t_is_x() {
        // L_1 t = x^1. The slice restriction of t is sqrt(s^2 + r^2), not a
        // polynomial in the slice coordinates, so the stencil error is O(h^4).
        let jet = jet_t(1);
        let g = grid();
        let out = jet.apply(AdmissibleField::Boost(1)).unwrap();
        let i = [30, 22, 25];
        let x = g.point(i);
        let err = (out.value()[g.idx(i)] - x[0]).abs();
        assert!(err < 5e-6, "coarse error {err}");
        let v = apply_field(AdmissibleField::Boost(1), &jet, i).unwrap();
        assert!((v - out.value()[g.idx(i)]).abs() < 1e-13);

        // refined grid drops the error by ~2^4
        let fine = Grid::new(97, 2.0);
        let jf = SliceJet::from_analytic(fine, S, 1, StencilOrder::Four, |k, t, _| match k {
            0 => t,
            1 => 1.0,
            _ => 0.0,
        });
        let out_f = jf.apply(AdmissibleField::Boost(1)).unwrap();
        let i_f = [60, 44, 50];
        let err_f = (out_f.value()[fine.idx(i_f)] - fine.point(i_f)[0]).abs();
        assert!(err_f * 10.0 < err, "no 4th-order gain: {err} -> {err_f}");
    }

    #[test]
    fn boost_of_x_is_t() {
        let jet = jet_x1(1);
        let g = grid();
        let i = [20, 28, 24];
        let v = apply_field(AdmissibleField::Boost(1), &jet, i).unwrap();
        assert!((v - jet.t_at(i)).abs() < 1e-12);
    }

    #[test]
    fn boosts_tangent_to_hyperboloids() {
        let jet = jet_s2(1);
        let g = grid();
        for a in 1..=3 {
            let out = jet.apply(AdmissibleField::Boost(a)).unwrap();
            let mut max = 0.0f64;
            for iz in 4..g.n() - 4 {
                for iy in 4..g.n() - 4 {
                    for ix in 4..g.n() - 4 {
                        max = max.max(out.value()[g.idx([ix, iy, iz])].abs());
                    }
                }
            }
            assert!(max < 1e-10, "L_{a}(t^2-r^2) not ~0: {max}");
        }
    }

    #[test]
    fn apply_multi_identity_and_tangency() {
        let jet = jet_s2(2);
        let g = grid();
        let id = jet.apply_multi(&MultiIndex::identity()).unwrap();
        let i = [24, 24, 24];
        assert_eq!(id.value()[g.idx(i)], jet.value()[g.idx(i)]);

        let b12 = MultiIndex::Ops(vec![AdmissibleField::Boost(1), AdmissibleField::Boost(2)]);
        let out = jet.apply_multi(&b12).unwrap();
        assert!(out.value()[g.idx(i)].abs() < 1e-9);

        let null = jet.apply_multi(&MultiIndex::Null).unwrap();
        assert_eq!(null.value()[g.idx(i)], 0.0);
    }

    #[test]
    fn translation_needs_co_field() {
        let jet = SliceJet::from_analytic(grid(), S, 0, StencilOrder::Four, |_, t, _| t);
        assert!(matches!(
            jet.apply(AdmissibleField::Translation(0)),
            Err(Error::MissingCoField)
        ));
    }

    #[test]
    fn margin_violation_detected() {
        let jet = jet_t(1);
        assert!(matches!(
            apply_field(AdmissibleField::Boost(1), &jet, [1, 24, 24]),
            Err(Error::MarginViolation { .. })
        ));
    }

    /// `[d_t, L_1] u = d_1 u` measured discretely against the table.
    #[test]
    fn mixed_commutator_matches_table() {
        // u = sin(t - x1) restricted to the slice; analytic t-derivatives
        let u = |k: usize, t: f64, x: [f64; 3]| {
            let ph = t - x[0];
            match k % 4 {
                0 => ph.sin(),
                1 => ph.cos(),
                2 => -ph.sin(),
                _ => -ph.cos(),
            }
        };
        let jet = SliceJet::from_analytic(grid(), S, 3, StencilOrder::Four, u);
        let g = grid();
        let i = [26, 23, 25];

        let dt_l1 = jet
            .apply(AdmissibleField::Boost(1))
            .unwrap()
            .apply(AdmissibleField::Translation(0))
            .unwrap();
        let l1_dt = jet
            .apply(AdmissibleField::Translation(0))
            .unwrap()
            .apply(AdmissibleField::Boost(1))
            .unwrap();
        let comm = dt_l1.value()[g.idx(i)] - l1_dt.value()[g.idx(i)];
        let d1 = jet.natural_da(i, 1);
        // [L_1, d_t] = -d_1, i.e. [d_t, L_1] = +d_1
        assert!((comm - d1).abs() < 1e-6, "comm {comm} vs d1 {d1}");
    }

    #[test]
    fn theta_table_entries() {
        // [L_1, d_1] = -d_t
        assert_eq!(CommutatorTable::theta(1, 1, 0), -1.0);
        assert_eq!(CommutatorTable::theta(1, 1, 1), 0.0);
        // [L_1, d_t] = -d_1
        assert_eq!(CommutatorTable::theta(1, 0, 1), -1.0);
        assert_eq!(CommutatorTable::theta(1, 0, 0), 0.0);
        // [d_alpha, db_0] = 0
        for alpha in 0..4 {
            for gamma in 0..4 {
                assert!(CommutatorTable::gamma_bar(alpha, 0, gamma).is_zero());
            }
        }
        // ThetaBar_{ab}^0 = 0
        for a in 1..=3 {
            for b in 1..=3 {
                assert!(CommutatorTable::theta_bar(a, b, 0).is_zero());
            }
        }
    }

    #[test]
    fn commutator_expansions() {
        let e = commutator_coefficients(AdmissibleField::Boost(1), DerivativeKind::Natural(1));
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].0, DerivativeKind::Natural(0));
        assert_eq!(e.terms[0].1, CommCoeff::Const(-1.0));

        let e = commutator_coefficients(
            AdmissibleField::Translation(0),
            DerivativeKind::Frame(0),
        );
        assert!(e.terms.is_empty());
    }

    #[test]
    fn rotation_from_boosts_identities() {
        let g = grid();
        // u = x^2: Omega_12 u = x^1
        let jet = SliceJet::from_analytic(g, S, 1, StencilOrder::Four, |k, _, x| match k {
            0 => x[1],
            _ => 0.0,
        });
        let i = [26, 27, 23];
        let x = g.point(i);
        let t = jet.t_at(i);
        let (ca, cb) = rotation_from_boosts(1, 2, t, x);
        let lb = apply_field(AdmissibleField::Boost(2), &jet, i).unwrap();
        let la = apply_field(AdmissibleField::Boost(1), &jet, i).unwrap();
        let om = ca * lb + cb * la;
        assert!((om - x[0]).abs() < 1e-11);

        // u = r^2 is rotation invariant
        let jet = SliceJet::from_analytic(g, S, 1, StencilOrder::Four, |k, _, x| match k {
            0 => crate::geometry::norm2(x),
            _ => 0.0,
        });
        let lb = apply_field(AdmissibleField::Boost(2), &jet, i).unwrap();
        let la = apply_field(AdmissibleField::Boost(1), &jet, i).unwrap();
        assert!((ca * lb + cb * la).abs() < 1e-10);

        // rotations vanish at the center
        let (ca, cb) = rotation_from_boosts::<f64>(1, 2, 2.0, [0.0; 3]);
        assert_eq!((ca, cb), (0.0, 0.0));
    }
}
