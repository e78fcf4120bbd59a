//! The K-theoretic residue map and the contour integral
//!
//! ```text
//! C_n = res_s  s^n prod_i theta(y s a_i)/theta(s a_i) prod_j theta(s b_j / y)/theta(s b_j)
//! ```
//!
//! computed three ways: by the closed-form sum over the simple poles
//! ([`cn_direct`]), by trapezoid quadrature on an annulus ([`quadrature_residue`]),
//! and as a localization sum on `P(V)` ([`crate::geom::euler_char_pv`]).
//!
//! Every factor of the integrand has the shape `theta(u s) / theta(v s)`:
//!
//! | root          | `u`          | `v`          |
//! |---------------|--------------|--------------|
//! | `a`, sign +1  | `y a`        | `a`          |
//! | `b`, sign +1  | `b / y`      | `b`          |
//! | `a`, sign -1  | `a`          | `y a`        |
//! | `b`, sign -1  | `b`          | `b / y`      |
//!
//! Each q-coefficient of the integrand is a rational function of `s` whose
//! only poles away from `0` and `infinity` are the points `s = 1/v`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geom::{
    blowup_local_models, elliptic_genus, euler_char_pv, sample_chern_config, total_space_model,
    ChernRootConfig, LocalizationValue, Side, SignedRoot,
};
use crate::qtheta::{phi_series, theta_prime_at_one, theta_series, QSeries};
use crate::scalar::{c, one, powi, Real};
use crate::weights::{
    root_of_unity, sample_generic_point, trial_seed, SamplerOptions, WeightVector,
};

/// Sign relating the annulus integral to `res`, fixed by `res 1/(1 - sL) = 1`.
pub const SIGMA_RES: f64 = -1.0;

/// `cn_direct = SIGMA_JK * euler_char_pv`.
pub const SIGMA_JK: f64 = -1.0;

/// Vanishing threshold relative to the term scale.
pub const VANISHING_TOL: f64 = 1e-7;

/// Minimum relative size a negative control must reach.
pub const CONTROL_TOL: f64 = 1e-3;

/// Closest allowed approach `|v s - 1|` of an evaluation point to a pole.
pub const NEAR_POLE: f64 = 1e-6;

/// Smallest allowed `|v_m / v_k - 1|` between two poles.
pub const SIMPLE_POLE_GAP: f64 = 1e-10;

/// Widest pole-modulus ratio the quadrature accepts.
pub const MAX_POLE_SPREAD: f64 = 8.0;

/// Relative gap between the pole moduli and the quadrature circles.
pub const ANNULUS_MARGIN: f64 = 0.2;

pub const DEFAULT_NODES: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrandSpec<T: Real> {
    pub n: i32,
    pub cfg: ChernRootConfig<T>,
    pub y: Complex<T>,
}

impl<T: Real> IntegrandSpec<T> {
    pub fn new(n: i32, cfg: ChernRootConfig<T>, y: Complex<T>) -> Self {
        Self { n, cfg, y }
    }

    /// The `(u, v)` pair of every factor `theta(u s) / theta(v s)`.
    pub fn factors(&self) -> Vec<(Complex<T>, Complex<T>)> {
        let yinv = self.y.inv();
        let a = self.cfg.a_roots.iter().map(|r| (r, self.y));
        let b = self.cfg.b_roots.iter().map(|r| (r, yinv));
        a.chain(b)
            .map(|(r, shift): (&SignedRoot<T>, _)| {
                if r.sign > 0 {
                    (shift * r.value, r.value)
                } else {
                    (r.value, shift * r.value)
                }
            })
            .collect()
    }

    /// The pole locations `1 / v`.
    pub fn poles(&self) -> Vec<Complex<T>> {
        self.factors().into_iter().map(|(_, v)| v.inv()).collect()
    }
}

/// `s^n prod theta(u s) / theta(v s)` at a numeric `s`.
pub fn integrand_at<T: Real>(spec: &IntegrandSpec<T>, s: Complex<T>, order: usize) -> Result<QSeries<T>> {
    if s.norm() == T::zero() {
        return Err(Error::ZeroArgument);
    }
    let mut out = QSeries::constant(powi(s, spec.n as i64), order);
    for (u, v) in spec.factors() {
        let distance = (v * s - one::<T>()).norm();
        if distance < T::lit(NEAR_POLE) {
            return Err(Error::NearPole {
                distance: distance.as_f64(),
            });
        }
        out = &(&out * &theta_series(u * s, order)?) * &theta_series(v * s, order)?.inv()?;
    }
    Ok(out)
}

/// `I(q0 s) / I(s)` with both sides collapsed at the numeric nome `q0`.
///
/// For the series to converge every theta argument `x` must satisfy
/// `|q0| < |x| < 1/|q0|`.
pub fn integrand_shift_ratio<T: Real>(
    spec: &IntegrandSpec<T>,
    s: Complex<T>,
    q0: Complex<T>,
    order: usize,
) -> Result<Complex<T>> {
    let shifted = integrand_at(spec, q0 * s, order)?.collapse(q0);
    let base = integrand_at(spec, s, order)?.collapse(q0);
    Ok(shifted / base)
}

/// The ellipticity factor `y^{r_- - r_+} q0^n` predicted for
/// [`integrand_shift_ratio`].
pub fn expected_shift_ratio<T: Real>(spec: &IntegrandSpec<T>, q0: Complex<T>) -> Complex<T> {
    let k = spec.cfg.rank_minus() - spec.cfg.rank_plus();
    powi(spec.y, k) * powi(q0, spec.n as i64)
}

/// `mean_{|s| = rho_out} f - mean_{|s| = rho_in} f`, i.e.
/// `(1/2 pi i) (oint_out - oint_in) f ds/s` by the trapezoid rule.
pub fn annulus_integral<T: Real, F>(
    f: F,
    rho_in: T,
    rho_out: T,
    n_points: usize,
    order: usize,
) -> Result<QSeries<T>>
where
    F: Fn(Complex<T>) -> Result<QSeries<T>>,
{
    if !(rho_in > T::zero() && rho_out > rho_in) || n_points == 0 {
        return Err(Error::NoAnnulus {
            min: rho_in.as_f64(),
            max: rho_out.as_f64(),
        });
    }
    let weight = Complex::new(T::one() / T::lit(n_points as f64), T::zero());
    let circle_mean = |rho: T| -> Result<QSeries<T>> {
        let mut acc = QSeries::zero(order);
        for j in 0..n_points {
            let angle = T::TAU() * T::lit(j as f64) / T::lit(n_points as f64);
            acc = &acc + &f(Complex::from_polar(rho, angle))?;
        }
        Ok(acc.scale(weight))
    };
    circle_mean(rho_out)?.checked_sub(&circle_mean(rho_in)?)
}

/// Circles enclosing all poles of `spec` with relative margin `margin`.
pub fn quadrature_radii<T: Real>(spec: &IntegrandSpec<T>, margin: f64) -> Result<(T, T)> {
    let moduli: Vec<T> = spec.poles().iter().map(|p| p.norm()).collect();
    if moduli.is_empty() {
        return Ok((T::lit(1.0 / (1.0 + margin)), T::lit(1.0 + margin)));
    }
    let min = moduli.iter().copied().fold(T::infinity(), T::min);
    let max = moduli.iter().copied().fold(T::zero(), T::max);
    if !(max / min <= T::lit(MAX_POLE_SPREAD)) {
        return Err(Error::NoAnnulus {
            min: min.as_f64(),
            max: max.as_f64(),
        });
    }
    let m = T::lit(1.0 + margin);
    Ok((min / m, max * m))
}

/// The raw annulus integral of the `C_n` integrand, without [`SIGMA_RES`].
pub fn quadrature_residue<T: Real>(spec: &IntegrandSpec<T>, order: usize, n_points: usize) -> Result<QSeries<T>> {
    let (rho_in, rho_out) = quadrature_radii(spec, ANNULUS_MARGIN)?;
    annulus_integral(|s| integrand_at(spec, s, order), rho_in, rho_out, n_points, order)
}

/// Raw residues of `I(s) ds/s` at each pole `s_k = 1/v_k`:
///
/// ```text
/// s_k^n theta(u_k / v_k) / theta'(1) * prod_{m != k} theta(u_m / v_k) / theta(v_m / v_k)
/// ```
pub fn pole_terms<T: Real>(spec: &IntegrandSpec<T>, order: usize) -> Result<Vec<QSeries<T>>> {
    let f = spec.factors();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            let gap = (f[i].1 / f[j].1 - one::<T>()).norm();
            if gap < T::lit(SIMPLE_POLE_GAP) {
                return Err(Error::NonSimplePole {
                    first: i,
                    second: j,
                    gap: gap.as_f64(),
                });
            }
        }
    }
    let tp = theta_prime_at_one(order);
    f.iter()
        .enumerate()
        .map(|(k, &(uk, vk))| {
            let mut num = QSeries::constant(powi(vk, -(spec.n as i64)), order);
            num = &num * &theta_series(uk / vk, order)?;
            let mut den = tp.clone();
            for (m, &(um, vm)) in f.iter().enumerate() {
                if m != k {
                    num = &num * &theta_series(um / vk, order)?;
                    den = &den * &theta_series(vm / vk, order)?;
                }
            }
            num.checked_div(&den)
        })
        .collect()
}

/// `C_n = SIGMA_RES * sum_k (raw residue at s_k)`; `scale` is the largest
/// single pole term.
pub fn cn_direct<T: Real>(spec: &IntegrandSpec<T>, order: usize) -> Result<LocalizationValue<T>> {
    let sigma = c::<T>(SIGMA_RES, 0.0);
    let mut series = QSeries::zero(order);
    let mut scale = T::zero();
    for t in pole_terms(spec, order)? {
        scale = scale.max(t.max_abs());
        series = &series + &t.scale(sigma);
    }
    Ok(LocalizationValue { series, scale })
}

/// `SIGMA_JK * euler_char_pv`, the third route to `C_n`.
pub fn cn_localization<T: Real>(spec: &IntegrandSpec<T>, order: usize) -> Result<LocalizationValue<T>> {
    let v = euler_char_pv(spec.n, &spec.cfg, spec.y, order)?;
    Ok(LocalizationValue {
        series: v.series.scale(c(SIGMA_JK, 0.0)),
        scale: v.scale,
    })
}

/// `SIGMA_RES * quadrature_residue`.
pub fn cn_quadrature<T: Real>(spec: &IntegrandSpec<T>, order: usize, n_points: usize) -> Result<QSeries<T>> {
    Ok(quadrature_residue(spec, order, n_points)?.scale(c(SIGMA_RES, 0.0)))
}

/// Deviation between two evaluations of the same `C_n`:
/// `max |a_k - b_k| / max(max |a_k|, max |b_k|, VANISHING_TOL * scale)`.
///
/// The floor keeps identically vanishing cases (e.g. `r_+ = r_-`, `n = 0`)
/// from comparing round-off against round-off.
pub fn route_error<T: Real>(a: &QSeries<T>, b: &QSeries<T>, scale: T) -> Result<f64> {
    let denom = a
        .max_abs()
        .max(b.max_abs())
        .max(T::lit(VANISHING_TOL) * scale);
    let diff = a.max_abs_diff(b)?;
    Ok(if denom > T::zero() { (diff / denom).as_f64() } else { diff.as_f64() })
}

/// Rewrites virtual roots as genuine ones with the same integrand:
/// a negative `a'` becomes a positive b-root `y a'`, a negative `b'` a
/// positive a-root `b' / y`.
///
/// The result is checked against the original integrand at five points of
/// the unit circle (relative `1e-8`).
pub fn virtual_normalize<T: Real>(cfg: &ChernRootConfig<T>, y: Complex<T>) -> Result<ChernRootConfig<T>> {
    if cfg.is_genuine() {
        return Ok(cfg.clone());
    }
    let yinv = y.inv();
    let mut out = ChernRootConfig {
        a_roots: Vec::new(),
        b_roots: Vec::new(),
    };
    for r in &cfg.a_roots {
        if r.sign > 0 {
            out.a_roots.push(*r);
        } else {
            out.b_roots.push(SignedRoot::positive(y * r.value));
        }
    }
    for r in &cfg.b_roots {
        if r.sign > 0 {
            out.b_roots.push(*r);
        } else {
            out.a_roots.push(SignedRoot::positive(yinv * r.value));
        }
    }
    for r in out.a_roots.iter().chain(&out.b_roots) {
        if !(r.value.norm() > T::one()) {
            return Err(Error::InvalidConfig(format!(
                "normalized root {} has modulus {} <= 1",
                r.value,
                r.value.norm()
            )));
        }
    }
    let before = IntegrandSpec::new(0, cfg.clone(), y);
    let after = IntegrandSpec::new(0, out.clone(), y);
    for j in 0..5 {
        let s = Complex::from_polar(T::one(), T::lit(0.37 + 1.23 * j as f64));
        let lhs = integrand_at(&before, s, 4)?;
        let rhs = integrand_at(&after, s, 4)?;
        let err = lhs.rel_diff(&rhs)?;
        if !(err <= T::lit(1e-8)) {
            return Err(Error::InvalidConfig(format!(
                "normalized integrand differs at s = {s} (relative {:e})",
                err.as_f64()
            )));
        }
    }
    Ok(out)
}

/// Quadrature check of the single-root constant: how far `res theta(yst)/theta(st)`
/// lies from `-theta(y)/phi(1)^2` and from `-theta(y)/phi(q)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplePoleConstant {
    pub error_phi_one: f64,
    pub error_phi_q: f64,
}

impl SimplePoleConstant {
    pub fn resolved(&self) -> &'static str {
        if self.error_phi_one < self.error_phi_q {
            "phi(1)^2"
        } else {
            "phi(q)^2"
        }
    }
}

pub fn simple_pole_constant<T: Real>(y: Complex<T>, t: Complex<T>, order: usize) -> Result<SimplePoleConstant> {
    let spec = IntegrandSpec::new(0, ChernRootConfig::new(vec![t], vec![]), y);
    let res = cn_quadrature(&spec, order, DEFAULT_NODES)?;
    let theta_y = -theta_series(y, order)?;
    let phi1 = phi_series(one::<T>(), order);
    let with_phi1 = theta_y.checked_div(&(&phi1 * &phi1))?;
    // phi(q) = prod_{n >= 1} (1 - q^{n+1}) = phi(1) / (1 - q)
    let one_minus_q = QSeries::from_coeffs(
        (0..=order)
            .map(|k| match k {
                0 => one(),
                1 => -one::<T>(),
                _ => Complex::new(T::zero(), T::zero()),
            })
            .collect(),
    );
    let phiq = phi1.checked_div(&one_minus_q)?;
    let with_phiq = theta_y.checked_div(&(&phiq * &phiq))?;
    Ok(SimplePoleConstant {
        error_phi_one: res.rel_diff(&with_phi1)?.as_f64(),
        error_phi_q: res.rel_diff(&with_phiq)?.as_f64(),
    })
}

/// One sampled evaluation of a quantity that should (or should not) vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub index: usize,
    pub seed: u64,
    pub max_coeff: f64,
    pub scale: f64,
}

impl TrialOutcome {
    pub fn from_value<T: Real>(index: usize, seed: u64, v: &LocalizationValue<T>) -> Self {
        Self {
            index,
            seed,
            max_coeff: v.series.max_abs().as_f64(),
            scale: v.scale.as_f64(),
        }
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_coeff / self.scale
        } else {
            self.max_coeff
        }
    }

    pub fn vanishes(&self) -> bool {
        self.relative() <= VANISHING_TOL
    }
}

/// `C_0` at `y` for one sampled genuine configuration.
pub fn c0_trial(r_plus: usize, r_minus: usize, y: Complex<f64>, seed: u64, order: usize) -> Result<LocalizationValue<f64>> {
    let cfg = crate::geom::sample_genuine_config(seed, r_plus, r_minus)?;
    cn_direct(&IntegrandSpec::new(0, cfg, y), order)
}

/// Runs `trials` vanishing trials of `C_0` at `y = zeta_N^k`.
///
/// `control = false` requires `r_+ = r_- mod N` (each trial should vanish);
/// `control = true` requires the opposite (each trial should not).
pub fn vanishing_check(
    r_plus: usize,
    r_minus: usize,
    n: u32,
    k: i64,
    trials: usize,
    seed: u64,
    order: usize,
    control: bool,
) -> Result<Vec<TrialOutcome>> {
    let y = root_of_unity::<f64>(n, k)?;
    let congruent = (r_plus as i64 - r_minus as i64).rem_euclid(n as i64) == 0;
    if congruent == control || r_plus + r_minus == 0 {
        return Err(Error::RankCondition { r_plus, r_minus, n });
    }
    (0..trials)
        .map(|i| {
            let s = trial_seed(seed, i as u64);
            Ok(TrialOutcome::from_value(i, s, &c0_trial(r_plus, r_minus, y, s, order)?))
        })
        .collect()
}

/// Genus difference of the two sides of a toric flip against `C_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipOutcome {
    /// `E(Y_+) - E(Y_-)`, scale = largest fixed-point term on either side.
    pub genus_diff: LocalizationValue<f64>,
    pub c0: LocalizationValue<f64>,
    /// Relative deviation of `C_0` from `-y^{1 - r_+} theta(y)/theta'(1) (E(Y_+) - E(Y_-))`.
    pub relation_error: f64,
}

/// Samples `V_+ = t_1..t_{r+}`, `V_- = t_{r+ + 1}..` with moduli near 2 and
/// compares the flip genus difference with `C_0(a = V_+, b = V_-)`.
pub fn flip_check(r_plus: usize, r_minus: usize, y: Complex<f64>, seed: u64, order: usize) -> Result<FlipOutcome> {
    let rank = r_plus + r_minus;
    let e: Vec<_> = (0..rank).map(|i| WeightVector::unit(rank, i)).collect();
    let (plus, minus) = e.split_at(r_plus);
    let yp = total_space_model(plus, minus, Side::Plus)?;
    let ym = if minus.is_empty() {
        None
    } else {
        Some(total_space_model(plus, minus, Side::Minus)?)
    };
    let mut constraints = yp.separation_constraints();
    if let Some(m) = &ym {
        constraints.extend(m.separation_constraints());
    }
    let opts = SamplerOptions {
        separation: 1e-2,
        ..crate::geom::chern_sampler_options()
    };
    let p = sample_generic_point(seed, rank, y, &constraints, &opts)?;
    let gp = elliptic_genus(&yp, &p, order)?;
    let genus_diff = match &ym {
        Some(m) => {
            let gm = elliptic_genus(m, &p, order)?;
            LocalizationValue {
                series: &gp.series - &gm.series,
                scale: gp.scale.max(gm.scale),
            }
        }
        None => gp,
    };
    let cfg = ChernRootConfig::new(p.t[..r_plus].to_vec(), p.t[r_plus..].to_vec());
    let c0 = cn_direct(&IntegrandSpec::new(0, cfg, y), order)?;
    let prefactor = theta_series(y, order)?
        .checked_div(&theta_prime_at_one(order))?
        .scale(-powi(y, 1 - r_plus as i64));
    let predicted = &prefactor * &genus_diff.series;
    let denom = c0.scale.max(genus_diff.scale * prefactor.max_abs());
    let relation_error = c0.series.max_abs_diff(&predicted)? / denom;
    Ok(FlipOutcome {
        genus_diff,
        c0,
        relation_error,
    })
}

/// Blow-up local models at `y`: `(left genus, right genus)`.
pub fn blowup_trial(n: usize, y: Complex<f64>, seed: u64, order: usize) -> Result<(LocalizationValue<f64>, LocalizationValue<f64>)> {
    let (left, right) = blowup_local_models(n);
    let mut constraints = left.separation_constraints();
    constraints.extend(right.separation_constraints());
    let opts = SamplerOptions {
        separation: 1e-2,
        ..SamplerOptions::default()
    };
    let p = sample_generic_point(seed, n + 1, y, &constraints, &opts)?;
    Ok((elliptic_genus(&left, &p, order)?, elliptic_genus(&right, &p, order)?))
}

/// Growth of `C_n` and of its largest localization term along
/// `x_j = x_i (1 + eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphyReport {
    pub epsilons: Vec<f64>,
    pub cn_max: Vec<f64>,
    pub term_scale: Vec<f64>,
    /// Fitted exponent `p` in `|C_n| ~ eps^{-p}`.
    pub cn_exponent: f64,
    pub term_exponent: f64,
}

impl HolomorphyReport {
    /// `C_n` sits at the round-off floor of its terms along the whole path
    /// (e.g. `r_+ = r_-`, `n = 0`), so the growth fit only sees noise.
    pub fn vanishing(&self) -> bool {
        self.cn_max
            .iter()
            .zip(&self.term_scale)
            .all(|(c, t)| *c <= VANISHING_TOL * t)
    }

    pub fn bounded(&self) -> bool {
        self.cn_exponent < 0.1 || self.vanishing()
    }
}

fn growth_exponent(eps: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Evaluates `C_n` via [`euler_char_pv`] while root `j` (in the combined
/// `a` then `b` order) approaches root `i`.
pub fn holomorphy_probe(
    spec: &IntegrandSpec<f64>,
    i: usize,
    j: usize,
    epsilons: &[f64],
    order: usize,
) -> Result<HolomorphyReport> {
    let len = spec.cfg.len();
    if i >= len || j >= len || i == j || epsilons.len() < 2 {
        return Err(Error::Usage(format!(
            "holomorphy path needs distinct root indices below {len} and at least two epsilons"
        )));
    }
    let target = spec.cfg.values()[i];
    let mut cn_max = Vec::with_capacity(epsilons.len());
    let mut term_scale = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut cfg = spec.cfg.clone();
        let value = target * (1.0 + eps);
        let na = cfg.a_roots.len();
        if j < na {
            cfg.a_roots[j].value = value;
        } else {
            cfg.b_roots[j - na].value = value;
        }
        let v = euler_char_pv(spec.n, &cfg, spec.y, order)?;
        cn_max.push(v.series.max_abs());
        term_scale.push(v.scale);
    }
    Ok(HolomorphyReport {
        cn_exponent: growth_exponent(epsilons, &cn_max),
        term_exponent: growth_exponent(epsilons, &term_scale),
        epsilons: epsilons.to_vec(),
        cn_max,
        term_scale,
    })
}

/// A signed configuration with virtual ranks `(r_+, r_-)`, of which
/// `extra_plus` / `extra_minus` pairs are cancelling `(+, -)` roots.
pub fn sample_virtual_config(
    seed: u64,
    r_plus: usize,
    r_minus: usize,
    extra_plus: usize,
    extra_minus: usize,
) -> Result<ChernRootConfig<f64>> {
    let mut a = vec![1i8; r_plus + extra_plus];
    a.extend(vec![-1i8; extra_plus]);
    let mut b = vec![1i8; r_minus + extra_minus];
    b.extend(vec![-1i8; extra_minus]);
    sample_chern_config(seed, &a, &b, &crate::geom::chern_sampler_options())
}
