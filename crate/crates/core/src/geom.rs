//! Varieties presented by their torus-fixed points, and the localization
//! sums evaluated on them.
//!
//! A [`FixedPointModel`] lists the tangent weights at each isolated fixed
//! point. For non-compact models (total spaces of bundles) the genus is
//! *defined* as the localization sum, so each q-coefficient is a rational
//! function of the torus point.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qtheta::{phi_series, theta_prime_at_one, theta_series, QSeries};
use crate::scalar::{one, powi, Real};
use crate::weights::{eval_weight, EvalPoint, SamplerOptions, WeightVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPoint {
    pub tangent_weights: Vec<WeightVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointModel {
    pub lattice_rank: usize,
    pub points: Vec<FixedPoint>,
}

impl FixedPointModel {
    pub fn point() -> Self {
        Self {
            lattice_rank: 0,
            points: vec![FixedPoint {
                tangent_weights: Vec::new(),
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for fp in &self.points {
            for w in &fp.tangent_weights {
                if w.rank() != self.lattice_rank {
                    return Err(Error::RankMismatch {
                        expected: self.lattice_rank,
                        found: w.rank(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The distinct tangent weights; each must evaluate away from 1.
    pub fn separation_constraints(&self) -> Vec<WeightVector> {
        let mut out = Vec::new();
        for fp in &self.points {
            for w in &fp.tangent_weights {
                if !out.contains(w) {
                    out.push(w.clone());
                }
            }
        }
        out
    }

    pub fn dims(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.tangent_weights.len()).collect()
    }
}

/// A localization sum together with the largest single-term magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationValue<T: Real> {
    pub series: QSeries<T>,
    pub scale: T,
}

impl<T: Real> LocalizationValue<T> {
    /// `max |coeff| / scale`; zero when the scale is zero.
    pub fn relative_size(&self) -> T {
        if self.scale > T::zero() {
            self.series.max_abs() / self.scale
        } else {
            self.series.max_abs()
        }
    }
}

fn point_terms<T: Real>(
    model: &FixedPointModel,
    p: &EvalPoint<T>,
    order: usize,
) -> Result<Vec<QSeries<T>>> {
    model.validate()?;
    if p.rank() != model.lattice_rank {
        return Err(Error::RankMismatch {
            expected: model.lattice_rank,
            found: p.rank(),
        });
    }
    model
        .points
        .iter()
        .enumerate()
        .map(|(pi, fp)| {
            let mut term = QSeries::one(order);
            for (wi, w) in fp.tangent_weights.iter().enumerate() {
                let x = eval_weight(w, p)?;
                let ill = |magnitude: f64| Error::IllConditionedWeight {
                    point: pi,
                    weight: wi,
                    magnitude,
                };
                if x.norm() == T::zero() {
                    return Err(ill(0.0));
                }
                let th = theta_series(x, order)?;
                let inv = th.inv().map_err(|_| ill(th.coeff(0).norm().as_f64()))?;
                term = &(&term * &theta_series(p.y * x, order)?) * &inv;
            }
            Ok(term)
        })
        .collect()
}

fn sum_terms<T: Real>(terms: Vec<QSeries<T>>, order: usize) -> LocalizationValue<T> {
    let mut series = QSeries::zero(order);
    let mut scale = T::zero();
    for t in terms {
        scale = scale.max(t.max_abs());
        series = &series + &t;
    }
    LocalizationValue { series, scale }
}

/// `sum_p prod_{w in T_p} theta(y w) / theta(w)`, literally.
///
/// With the theta normalization of [`crate::qtheta`] the constant term for
/// `P^n` is `sum_{p=0}^n y^{-p}`; see [`elliptic_genus`] for the normalized
/// version.
pub fn localization_sum<T: Real>(
    model: &FixedPointModel,
    p: &EvalPoint<T>,
    order: usize,
) -> Result<LocalizationValue<T>> {
    Ok(sum_terms(point_terms(model, p, order)?, order))
}

/// `sum_p y^{dim T_p} prod_{w in T_p} theta(y w) / theta(w)`.
///
/// The `y^{dim}` factor makes the constant term the `chi_{-y}` genus in the
/// usual `sum_p (-y)^p h^{p,*}` orientation, e.g. `(1 - y^{n+1}) / (1 - y)`
/// for `P^n`. Identities between equidimensional models (and vanishing at
/// roots of unity) are unaffected.
pub fn elliptic_genus<T: Real>(
    model: &FixedPointModel,
    p: &EvalPoint<T>,
    order: usize,
) -> Result<LocalizationValue<T>> {
    let terms = point_terms(model, p, order)?
        .into_iter()
        .zip(model.dims())
        .map(|(t, d)| t.scale(powi(p.y, d as i64)))
        .collect();
    Ok(sum_terms(terms, order))
}

/// `P^n` with the standard torus of rank `n + 1`: point `i` has weights
/// `e_j - e_i`, `j != i`.
pub fn projective_space_model(n: usize) -> FixedPointModel {
    let rank = n + 1;
    let points = (0..rank)
        .map(|i| FixedPoint {
            tangent_weights: (0..rank)
                .filter(|&j| j != i)
                .map(|j| &WeightVector::unit(rank, j) - &WeightVector::unit(rank, i))
                .collect(),
        })
        .collect();
    FixedPointModel {
        lattice_rank: rank,
        points,
    }
}

/// Local models of a smooth fixed point of an `(N+1)`-fold and of its
/// blow-up: `(point with weights x_1..x_{N+1}, N+1 points with weights
/// {x_i} + {x_j - x_i})`.
pub fn blowup_local_models(n: usize) -> (FixedPointModel, FixedPointModel) {
    let rank = n + 1;
    let e = |i| WeightVector::unit(rank, i);
    let left = FixedPointModel {
        lattice_rank: rank,
        points: vec![FixedPoint {
            tangent_weights: (0..rank).map(e).collect(),
        }],
    };
    let right = FixedPointModel {
        lattice_rank: rank,
        points: (0..rank)
            .map(|i| {
                let mut ws = vec![e(i)];
                ws.extend((0..rank).filter(|&j| j != i).map(|j| &e(j) - &e(i)));
                FixedPoint { tangent_weights: ws }
            })
            .collect(),
    };
    (left, right)
}

/// Cartesian product; the two lattices sit side by side.
pub fn product_model(m1: &FixedPointModel, m2: &FixedPointModel) -> FixedPointModel {
    let rank = m1.lattice_rank + m2.lattice_rank;
    let mut points = Vec::with_capacity(m1.points.len() * m2.points.len());
    for p1 in &m1.points {
        for p2 in &m2.points {
            let mut ws: Vec<_> = p1.tangent_weights.iter().map(|w| w.embed(rank, 0)).collect();
            ws.extend(p2.tangent_weights.iter().map(|w| w.embed(rank, m1.lattice_rank)));
            points.push(FixedPoint { tangent_weights: ws });
        }
    }
    FixedPointModel {
        lattice_rank: rank,
        points,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// The two sides `Y_+ = tot(O_{P(V_+)}(-1) (x) V_-^dual)` and
/// `Y_- = tot(O_{P(V_-)}(-1) (x) V_+^dual)` of the toric flip with `V_+`
/// of weights `c` and `V_-` of weights `d`.
///
/// `Y_+` at point `k`: `{c_m - c_k}_{m != k} + {c_k - d_l}`.
/// `Y_-` at point `l`: `{d_l - d_j}_{j != l} + {c_i - d_l}`.
///
/// Both are quotients of the same affine space (coordinates of weights `c`
/// and `-d`) from opposite chambers, which is what makes their genus
/// difference a wall-crossing term.
pub fn total_space_model(
    plus: &[WeightVector],
    minus: &[WeightVector],
    side: Side,
) -> Result<FixedPointModel> {
    let rank = plus
        .iter()
        .chain(minus)
        .map(WeightVector::rank)
        .next()
        .unwrap_or(0);
    if let Some(w) = plus.iter().chain(minus).find(|w| w.rank() != rank) {
        return Err(Error::RankMismatch {
            expected: rank,
            found: w.rank(),
        });
    }
    let base = match side {
        Side::Plus => plus,
        Side::Minus => minus,
    };
    if base.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "the {side:?} side needs a nonempty base"
        )));
    }
    let points = (0..base.len())
        .map(|k| {
            let tangent_weights = match side {
                Side::Plus => (0..plus.len())
                    .filter(|&m| m != k)
                    .map(|m| &plus[m] - &plus[k])
                    .chain(minus.iter().map(|d| &plus[k] - d))
                    .collect(),
                Side::Minus => (0..minus.len())
                    .filter(|&j| j != k)
                    .map(|j| &minus[k] - &minus[j])
                    .chain(plus.iter().map(|c| c - &minus[k]))
                    .collect(),
            };
            FixedPoint { tangent_weights }
        })
        .collect();
    Ok(FixedPointModel {
        lattice_rank: rank,
        points,
    })
}

/// One Chern root with multiplicity sign `+1` (genuine) or `-1` (virtual).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedRoot<T: Real> {
    pub value: Complex<T>,
    pub sign: i8,
}

impl<T: Real> SignedRoot<T> {
    pub fn positive(value: Complex<T>) -> Self {
        Self { value, sign: 1 }
    }

    pub fn negative(value: Complex<T>) -> Self {
        Self { value, sign: -1 }
    }
}

/// Chern roots `a_i` of `E_+` and `b_j` of `E_-`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernRootConfig<T: Real> {
    pub a_roots: Vec<SignedRoot<T>>,
    pub b_roots: Vec<SignedRoot<T>>,
}

impl<T: Real> ChernRootConfig<T> {
    pub fn new(a: Vec<Complex<T>>, b: Vec<Complex<T>>) -> Self {
        Self {
            a_roots: a.into_iter().map(SignedRoot::positive).collect(),
            b_roots: b.into_iter().map(SignedRoot::positive).collect(),
        }
    }

    pub fn is_genuine(&self) -> bool {
        self.a_roots.iter().chain(&self.b_roots).all(|r| r.sign > 0)
    }

    /// Virtual rank of `E_+`.
    pub fn rank_plus(&self) -> i64 {
        self.a_roots.iter().map(|r| r.sign as i64).sum()
    }

    /// Virtual rank of `E_-`.
    pub fn rank_minus(&self) -> i64 {
        self.b_roots.iter().map(|r| r.sign as i64).sum()
    }

    pub fn len(&self) -> usize {
        self.a_roots.len() + self.b_roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Root values, `a` roots first.
    pub fn values(&self) -> Vec<Complex<T>> {
        self.a_roots
            .iter()
            .chain(&self.b_roots)
            .map(|r| r.value)
            .collect()
    }

    /// Checks signs, nonzero values, `|root| > 1`, and pairwise separation
    /// `|x_i / x_j - 1| >= separation`.
    pub fn validate(&self, separation: T) -> Result<()> {
        for r in self.a_roots.iter().chain(&self.b_roots) {
            if r.sign != 1 && r.sign != -1 {
                return Err(Error::InvalidConfig(format!("sign {} is not +-1", r.sign)));
            }
            if !(r.value.norm() > T::one()) {
                return Err(Error::InvalidConfig(format!(
                    "root {} has modulus {} <= 1",
                    r.value,
                    r.value.norm()
                )));
            }
        }
        let v = self.values();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let gap = (v[i] / v[j] - one::<T>()).norm();
                if gap < separation {
                    return Err(Error::NonSimplePole {
                        first: i,
                        second: j,
                        gap: gap.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Samples a configuration with the given sign patterns. Moduli lie in
/// `opts.radius * [1 - spread, 1 + spread]` (use `radius > 1 / (1 - spread)`
/// for the `|root| > 1` invariant) and values are pairwise separated.
pub fn sample_chern_config<T: Real>(
    seed: u64,
    a_signs: &[i8],
    b_signs: &[i8],
    opts: &SamplerOptions,
) -> Result<ChernRootConfig<T>> {
    let n = a_signs.len() + b_signs.len();
    let constraints: Vec<WeightVector> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| &WeightVector::unit(n, i) - &WeightVector::unit(n, j))
        .collect();
    let p = crate::weights::sample_generic_point::<T>(seed, n, one(), &constraints, opts)?;
    let mk = |signs: &[i8], vals: &[Complex<T>]| {
        signs
            .iter()
            .zip(vals)
            .map(|(&sign, &value)| SignedRoot { value, sign })
            .collect()
    };
    let cfg = ChernRootConfig {
        a_roots: mk(a_signs, &p.t[..a_signs.len()]),
        b_roots: mk(b_signs, &p.t[a_signs.len()..]),
    };
    cfg.validate(T::lit(opts.separation))?;
    Ok(cfg)
}

/// Sampler options for Chern configurations: moduli in `2 * [0.8, 1.2]`.
pub fn chern_sampler_options() -> SamplerOptions {
    SamplerOptions {
        radius: 2.0,
        ..SamplerOptions::default()
    }
}

/// A genuine configuration with `r_plus` a-roots and `r_minus` b-roots.
pub fn sample_genuine_config<T: Real>(
    seed: u64,
    r_plus: usize,
    r_minus: usize,
) -> Result<ChernRootConfig<T>> {
    sample_chern_config(seed, &vec![1; r_plus], &vec![1; r_minus], &chern_sampler_options())
}

/// `chi(P(V), O(n) (x) Theta(y O(1) V_+ + y^{-1} O(1) V_-) / Phi(O(1) V) Phi(O(-1) V^dual))`
/// by localization over the coordinate points of `P(V)`, `V = E_+ + E_-`.
///
/// With `O(-1)|_k = c_k`, the term at point `k` is
///
/// ```text
/// c_k^{-n} prod_i theta(y a_i / c_k) prod_j theta(b_j / (y c_k))
///   / [ prod_m phi(c_m / c_k) phi(c_k / c_m) * prod_{m != k} (1 - c_k / c_m) ]
/// ```
pub fn euler_char_pv<T: Real>(
    n: i32,
    cfg: &ChernRootConfig<T>,
    y: Complex<T>,
    order: usize,
) -> Result<LocalizationValue<T>> {
    if !cfg.is_genuine() {
        return Err(Error::VirtualConfig);
    }
    if cfg.is_empty() {
        return Err(Error::InvalidConfig("P(V) needs at least one root".into()));
    }
    let c = cfg.values();
    let yinv = y.inv();
    let mut terms = Vec::with_capacity(c.len());
    for (k, &ck) in c.iter().enumerate() {
        let mut num = QSeries::constant(powi(ck, -(n as i64)), order);
        for r in &cfg.a_roots {
            num = &num * &theta_series(y * r.value / ck, order)?;
        }
        for r in &cfg.b_roots {
            num = &num * &theta_series(yinv * r.value / ck, order)?;
        }
        let mut den = QSeries::one(order);
        let mut euler = one::<T>();
        for (m, &cm) in c.iter().enumerate() {
            den = &(&den * &phi_series(cm / ck, order)) * &phi_series(ck / cm, order);
            if m != k {
                let factor = one::<T>() - ck / cm;
                if factor.norm() < T::lit(1e-10) {
                    return Err(Error::NonSimplePole {
                        first: k.min(m),
                        second: k.max(m),
                        gap: factor.norm().as_f64(),
                    });
                }
                euler = euler * factor;
            }
        }
        terms.push(num.checked_div(&den.scale(euler))?);
    }
    Ok(sum_terms(terms, order))
}

/// The single-root value `theta(y) / phi(1)^2` of [`euler_char_pv`] at
/// `n = 0` with one a-root, independent of the root.
pub fn single_root_constant<T: Real>(y: Complex<T>, order: usize) -> Result<QSeries<T>> {
    theta_series(y, order)?.checked_div(&theta_prime_at_one(order))
}
