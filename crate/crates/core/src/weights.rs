//! Characters of the torus `T x S` together with the distinguished variable
//! `y`, numeric evaluation points, and seeded generic-point sampling.

use std::ops::{Add, Neg, Sub};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{one, powi, Real};

/// An integer character `y^y s^s prod_i t_i^{t[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightVector {
    #[serde(default)]
    pub y: i32,
    #[serde(default)]
    pub s: i32,
    pub t: Vec<i32>,
}

impl WeightVector {
    pub fn new(y: i32, s: i32, t: Vec<i32>) -> Self {
        Self { y, s, t }
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(0, 0, vec![0; rank])
    }

    /// The coordinate character `e_i`.
    pub fn unit(rank: usize, i: usize) -> Self {
        let mut w = Self::zero(rank);
        w.t[i] = 1;
        w
    }

    pub fn rank(&self) -> usize {
        self.t.len()
    }

    pub fn is_zero(&self) -> bool {
        self.y == 0 && self.s == 0 && self.t.iter().all(|&m| m == 0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(Self {
            y: self.y + other.y,
            s: self.s + other.s,
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        })
    }

    /// Re-embeds into a lattice of rank `rank`, shifting coordinates by `offset`.
    pub fn embed(&self, rank: usize, offset: usize) -> Self {
        let mut t = vec![0; rank];
        t[offset..offset + self.rank()].copy_from_slice(&self.t);
        Self::new(self.y, self.s, t)
    }
}

impl Add for &WeightVector {
    type Output = WeightVector;
    /// Panics on a rank mismatch.
    fn add(self, rhs: &WeightVector) -> WeightVector {
        self.checked_add(rhs).expect("weight rank mismatch")
    }
}

impl Add for WeightVector {
    type Output = WeightVector;
    fn add(self, rhs: WeightVector) -> WeightVector {
        &self + &rhs
    }
}

impl Neg for &WeightVector {
    type Output = WeightVector;
    fn neg(self) -> WeightVector {
        WeightVector::new(-self.y, -self.s, self.t.iter().map(|m| -m).collect())
    }
}

impl Neg for WeightVector {
    type Output = WeightVector;
    fn neg(self) -> WeightVector {
        -&self
    }
}

impl Sub for &WeightVector {
    type Output = WeightVector;
    fn sub(self, rhs: &WeightVector) -> WeightVector {
        self + &(-rhs)
    }
}

impl Sub for WeightVector {
    type Output = WeightVector;
    fn sub(self, rhs: WeightVector) -> WeightVector {
        &self - &rhs
    }
}

/// A numeric point of the torus. `s` is absent when it is the integration
/// variable.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalPoint<T: Real> {
    pub y: Complex<T>,
    pub s: Option<Complex<T>>,
    pub t: Vec<Complex<T>>,
}

impl<T: Real> EvalPoint<T> {
    pub fn new(y: Complex<T>, t: Vec<Complex<T>>) -> Self {
        Self { y, s: None, t }
    }

    pub fn rank(&self) -> usize {
        self.t.len()
    }

    pub fn with_y(&self, y: Complex<T>) -> Self {
        Self { y, ..self.clone() }
    }
}

/// `y^{w.y} s^{w.s} prod_i t_i^{w.t[i]}`.
pub fn eval_weight<T: Real>(w: &WeightVector, p: &EvalPoint<T>) -> Result<Complex<T>> {
    if w.rank() != p.rank() {
        return Err(Error::RankMismatch {
            expected: p.rank(),
            found: w.rank(),
        });
    }
    let mut v = powi(p.y, w.y as i64);
    if w.s != 0 {
        let s = p.s.ok_or(Error::MissingS { s_exp: w.s })?;
        v = v * powi(s, w.s as i64);
    }
    for (&m, &t) in w.t.iter().zip(&p.t) {
        if m != 0 {
            v = v * powi(t, m as i64);
        }
    }
    Ok(v)
}

/// `exp(2 pi i k / n)`, rejecting the trivial root.
pub fn root_of_unity<T: Real>(n: u32, k: i64) -> Result<Complex<T>> {
    if n < 2 || k.rem_euclid(n as i64) == 0 {
        return Err(Error::InvalidRootOfUnity { n, k });
    }
    let k = k.rem_euclid(n as i64);
    // exact values at the quarter points keep y = -1 and y = i clean
    let exact = match (4 * k).checked_rem(n as i64) {
        Some(0) => Some(match 4 * k / n as i64 {
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        }),
        _ => None,
    };
    Ok(exact.unwrap_or_else(|| {
        Complex::from_polar(T::one(), T::TAU() * T::lit(k as f64) / T::lit(n as f64))
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerOptions {
    /// Relative modulus jitter: `|t_i| in radius * [1 - spread, 1 + spread]`.
    pub spread: f64,
    /// Minimum `|eval(w) - 1|` for every constraint weight.
    pub separation: f64,
    pub radius: f64,
    pub max_attempts: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            spread: 0.2,
            separation: 1e-3,
            radius: 1.0,
            max_attempts: 10_000,
        }
    }
}

impl SamplerOptions {
    fn validate(&self) -> Result<()> {
        if !(self.spread > 0.0 && self.spread < 0.5) {
            return Err(Error::InvalidSampler(format!(
                "spread must lie in (0, 0.5), got {}",
                self.spread
            )));
        }
        if !(self.separation > 0.0) || !(self.radius > 0.0) {
            return Err(Error::InvalidSampler(
                "separation and radius must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Seed for trial `index` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.gen()
}

fn polar_sample<R: Rng>(rng: &mut R, radius: f64, spread: f64) -> Complex<f64> {
    let u: f64 = rng.gen();
    let rho = radius * rng.gen_range(1.0 - spread..=1.0 + spread);
    Complex::from_polar(rho, std::f64::consts::TAU * u)
}

/// Samples `t` of rank `rank` with `y` fixed, rejecting until every
/// constraint weight evaluates at distance at least `opts.separation` from 1.
pub fn sample_generic_point<T: Real>(
    seed: u64,
    rank: usize,
    y: Complex<T>,
    constraints: &[WeightVector],
    opts: &SamplerOptions,
) -> Result<EvalPoint<T>> {
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sep = T::lit(opts.separation);
    for _ in 0..opts.max_attempts {
        let t = (0..rank)
            .map(|_| {
                let z = polar_sample(&mut rng, opts.radius, opts.spread);
                Complex::new(T::lit(z.re), T::lit(z.im))
            })
            .collect();
        let p = EvalPoint::new(y, t);
        let mut ok = true;
        for w in constraints {
            if (eval_weight(w, &p)? - one::<T>()).norm() < sep {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(p);
        }
    }
    Err(Error::SamplingExhausted {
        attempts: opts.max_attempts,
    })
}

/// A generic value of `y`: modulus in `[0.8, 1.25]`, kept away from 1 and
/// from every root of unity of order at most 6.
pub fn sample_generic_y<T: Real>(seed: u64) -> Complex<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x79_7974);
    loop {
        let z = polar_sample(&mut rng, 1.0, 0.2);
        let z = z * (1.0 + 0.05 * rng.gen::<f64>());
        let generic = (1..=6).all(|n| (z.powu(n) - 1.0).norm() > 0.05);
        if generic {
            return Complex::new(T::lit(z.re), T::lit(z.im));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    #[test]
    fn eval_examples() {
        let p = EvalPoint::new(C::new(0.0, 1.0), vec![C::new(2.0, 0.0), C::new(3.0, 0.0)]);
        assert_eq!(eval_weight(&WeightVector::zero(2), &p).unwrap(), C::new(1.0, 0.0));
        let p5 = EvalPoint::new(C::new(1.0, 0.0), vec![C::new(2.0, 0.0), C::new(5.0, 0.0)]);
        assert_eq!(
            eval_weight(&WeightVector::new(0, 0, vec![1, 0]), &p5).unwrap(),
            C::new(2.0, 0.0)
        );
        assert_eq!(
            eval_weight(&WeightVector::new(1, 0, vec![1, 1]), &p).unwrap(),
            C::new(0.0, 6.0)
        );
    }

    #[test]
    fn eval_errors() {
        let p = EvalPoint::new(C::new(1.0, 0.0), vec![C::new(2.0, 0.0)]);
        assert_eq!(
            eval_weight(&WeightVector::new(0, 1, vec![0]), &p),
            Err(Error::MissingS { s_exp: 1 })
        );
        assert!(matches!(
            eval_weight(&WeightVector::zero(2), &p),
            Err(Error::RankMismatch { .. })
        ));
        let mut with_s = p.clone();
        with_s.s = Some(C::new(0.5, 0.0));
        assert_eq!(
            eval_weight(&WeightVector::new(0, -2, vec![1]), &with_s).unwrap(),
            C::new(8.0, 0.0)
        );
    }

    #[test]
    fn weight_arithmetic() {
        let a = WeightVector::new(1, 0, vec![1, -1]);
        let b = WeightVector::new(0, 2, vec![0, 3]);
        assert_eq!(&a + &b, WeightVector::new(1, 2, vec![1, 2]));
        assert!((&a - &a).is_zero());
        assert_eq!(WeightVector::unit(3, 1).embed(5, 2).t, vec![0, 0, 0, 1, 0]);
        assert!(a.checked_add(&WeightVector::zero(3)).is_err());
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(root_of_unity::<f64>(2, 1).unwrap(), C::new(-1.0, 0.0));
        assert_eq!(root_of_unity::<f64>(4, 2).unwrap(), C::new(-1.0, 0.0));
        let z = root_of_unity::<f64>(3, 1).unwrap();
        assert!((z - C::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
        assert!(root_of_unity::<f64>(3, 3).is_err());
        assert!(root_of_unity::<f64>(3, 0).is_err());
        assert!(root_of_unity::<f64>(1, 1).is_err());
        for n in 2..=6u32 {
            for k in 1..n as i64 {
                let z = root_of_unity::<f64>(n, k).unwrap();
                assert!((z.powu(n) - 1.0).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let y = C::new(0.3, 0.2);
        let opts = SamplerOptions::default();
        let a = sample_generic_point(7, 3, y, &[], &opts).unwrap();
        let b = sample_generic_point(7, 3, y, &[], &opts).unwrap();
        assert_eq!(a, b);
        let c = sample_generic_point(8, 3, y, &[], &opts).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampler_respects_constraints() {
        let opts = SamplerOptions {
            separation: 0.5,
            ..SamplerOptions::default()
        };
        let w = &WeightVector::unit(2, 0) - &WeightVector::unit(2, 1);
        for seed in 0..50 {
            let p = sample_generic_point(seed, 2, C::new(1.0, 0.0), std::slice::from_ref(&w), &opts).unwrap();
            assert!((p.t[0] / p.t[1] - 1.0).norm() >= 0.5);
        }
    }

    #[test]
    fn sampler_rank_one_and_errors() {
        let p = sample_generic_point(1, 1, C::new(1.0, 0.0), &[], &SamplerOptions::default()).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.t[0].norm() > 0.0);
        let bad = SamplerOptions {
            spread: 0.7,
            ..SamplerOptions::default()
        };
        assert!(matches!(
            sample_generic_point::<f64>(1, 1, C::new(1.0, 0.0), &[], &bad),
            Err(Error::InvalidSampler(_))
        ));
        // the zero character always evaluates to 1
        let exhausted = sample_generic_point::<f64>(
            1,
            1,
            C::new(1.0, 0.0),
            &[WeightVector::zero(1)],
            &SamplerOptions {
                max_attempts: 10,
                ..SamplerOptions::default()
            },
        );
        assert_eq!(exhausted, Err(Error::SamplingExhausted { attempts: 10 }));
    }

    #[test]
    fn generic_y_avoids_small_roots_of_unity() {
        for seed in 0..200 {
            let y: C = sample_generic_y(seed);
            for n in 1..=6 {
                assert!((y.powu(n) - 1.0).norm() > 0.05);
            }
        }
    }

    fn weight(rank: usize) -> impl Strategy<Value = WeightVector> {
        (-3i32..=3, -3i32..=3, prop::collection::vec(-3i32..=3, rank))
            .prop_map(|(y, s, t)| WeightVector::new(y, s, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn eval_is_multiplicative(a in weight(3), b in weight(3), seed in any::<u64>()) {
            let mut p = sample_generic_point(seed, 3, sample_generic_y(seed), &[], &SamplerOptions::default()).unwrap();
            p.s = Some(C::new(0.9, -0.3));
            let lhs = eval_weight(&(&a + &b), &p).unwrap();
            let rhs = eval_weight(&a, &p).unwrap() * eval_weight(&b, &p).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        }
    }
}
