//! Integer parity arithmetic: splittings of full flags, the quiver Ext
//! pairing on dimension vectors, and Riemann-Roch differences on surfaces.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Largest `d1 + d2` that [`splitting_diff_set`] will enumerate.
pub const SPLIT_BUDGET: u32 = 16;

/// Dimension vector `0 = v^0 <= v^1 <= ... <= v^{K+1}` with steps 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FullFlag {
    dims: Vec<u32>,
}

impl FullFlag {
    pub fn new(dims: Vec<u32>) -> Result<Self> {
        match dims.first() {
            None => return Err(Error::InvalidFlag("empty dimension vector".into())),
            Some(&d) if d != 0 => {
                return Err(Error::InvalidFlag(format!("flag must start at 0, got {d}")))
            }
            _ => {}
        }
        if let Some(k) = dims.windows(2).position(|w| w[1] < w[0] || w[1] > w[0] + 1) {
            return Err(Error::InvalidFlag(format!(
                "step {k} goes from {} to {}",
                dims[k],
                dims[k + 1]
            )));
        }
        Ok(Self { dims })
    }

    pub fn zero(len: usize) -> Self {
        Self { dims: vec![0; len] }
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> u32 {
        *self.dims.last().unwrap_or(&0)
    }

    /// Whether `v^{k+1} = v^k`.
    pub fn is_flat_at(&self, k: usize) -> bool {
        self.dims[k + 1] == self.dims[k]
    }

    /// Drops entry `k + 1` (the target of step `k`).
    pub fn remove_step(&self, k: usize) -> Self {
        let mut dims = self.dims.clone();
        dims.remove(k + 1);
        Self { dims }
    }
}

/// `sum_i (v1^i v2^{i+1} - v1^i v2^i)`.
pub fn ext_quiver(v1: &FullFlag, v2: &FullFlag) -> Result<i64> {
    if v1.len() != v2.len() {
        return Err(Error::FlagLengthMismatch {
            left: v1.len(),
            right: v2.len(),
        });
    }
    let (a, b) = (v1.dims(), v2.dims());
    Ok((0..a.len().saturating_sub(1))
        .map(|i| a[i] as i64 * (b[i + 1] as i64 - b[i] as i64))
        .sum())
}

/// `ext(V1, V2) - ext(V2, V1)`.
pub fn ext_difference(v1: &FullFlag, v2: &FullFlag) -> Result<i64> {
    Ok(ext_quiver(v1, v2)? - ext_quiver(v2, v1)?)
}

/// The splitting of a full flag of dimension `d` encoded by `subset`
/// (elements in `1..=d`): `v1^k = |subset ∩ {1..k}|`, `v2^k = k - v1^k`.
pub fn split_from_subset(d: usize, subset: &[usize]) -> Result<(FullFlag, FullFlag)> {
    let mut member = vec![false; d + 1];
    for &i in subset {
        if i == 0 || i > d || member[i] {
            return Err(Error::InvalidFlag(format!(
                "subset element {i} is repeated or outside 1..={d}"
            )));
        }
        member[i] = true;
    }
    let mut v1 = vec![0u32; d + 1];
    for k in 1..=d {
        v1[k] = v1[k - 1] + member[k] as u32;
    }
    let v2 = (0..=d).map(|k| k as u32 - v1[k]).collect();
    Ok((FullFlag { dims: v1 }, FullFlag { dims: v2 }))
}

/// All `d1`-element subsets of `1..=d1+d2`, in increasing bitmask order.
pub fn subsets(d1: u32, d2: u32) -> Result<Vec<Vec<usize>>> {
    let total = d1 + d2;
    if total > SPLIT_BUDGET {
        return Err(Error::BudgetExceeded {
            total,
            limit: SPLIT_BUDGET,
        });
    }
    Ok((0u32..1 << total)
        .filter(|m| m.count_ones() == d1)
        .map(|m| (0..total as usize).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
        .collect())
}

/// The set of `ext(V1, V2) - ext(V2, V1)` over every splitting of a full
/// flag into pieces of dimensions `d1` and `d2`.
pub fn splitting_diff_set(d1: u32, d2: u32) -> Result<BTreeSet<i64>> {
    let d = (d1 + d2) as usize;
    subsets(d1, d2)?
        .iter()
        .map(|s| {
            let (v1, v2) = split_from_subset(d, s)?;
            ext_difference(&v1, &v2)
        })
        .collect()
}

/// `{-d1 d2, -d1 d2 + 2, ..., d1 d2}`.
pub fn expected_diff_set(d1: u32, d2: u32) -> BTreeSet<i64> {
    let m = d1 as i64 * d2 as i64;
    (-m..=m).step_by(2).collect()
}

/// Numerical data of a sheaf `F` on a surface `S`: `rank F`, `c1(F).K`,
/// `K^2`. In spin mode `K = 2D` and the products are stored through `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurfaceClass {
    pub rank: i64,
    pub c1_dot_k: i64,
    pub k_squared: i64,
    pub spin: bool,
}

impl SurfaceClass {
    pub fn general(rank: i64, c1_dot_k: i64, k_squared: i64) -> Self {
        Self {
            rank,
            c1_dot_k,
            k_squared,
            spin: false,
        }
    }

    pub fn spin(rank: i64, c1_dot_d: i64, d_squared: i64) -> Self {
        Self {
            rank,
            c1_dot_k: 2 * c1_dot_d,
            k_squared: 4 * d_squared,
            spin: true,
        }
    }
}

/// `chi(S, F) - chi(S, F (x) K_S) = -c1(F).K` by Riemann-Roch. The rank
/// and `K^2` contributions cancel between the two sides.
pub fn hrr_parity_diff(s: &SurfaceClass) -> i64 {
    -s.c1_dot_k
}

/// Rank and `c1(F).D` of a sheaf on a spin surface with `K = 2D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SheafClass {
    pub rank: i64,
    pub c1_dot_d: i64,
}

/// `(chi(F1, F2) + chi(F2, F1)) mod 2` on a spin surface.
///
/// By Serre duality `chi(F2, F1) = chi(F1, F2 (x) K)`, so the sum has the
/// parity of [`hrr_parity_diff`] applied to `F1^dual (x) F2`.
pub fn vw_ext_parity(surface: &SurfaceClass, f1: &SheafClass, f2: &SheafClass) -> Result<u8> {
    if !surface.spin {
        return Err(Error::NotSpin);
    }
    let hom = SurfaceClass::spin(
        f1.rank * f2.rank,
        f1.rank * f2.c1_dot_d - f2.rank * f1.c1_dot_d,
        surface.k_squared / 4,
    );
    Ok(hrr_parity_diff(&hom).rem_euclid(2) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flag(d: &[u32]) -> FullFlag {
        FullFlag::new(d.to_vec()).unwrap()
    }

    #[test]
    fn flag_validation() {
        assert!(FullFlag::new(vec![]).is_err());
        assert!(FullFlag::new(vec![1, 1]).is_err());
        assert!(FullFlag::new(vec![0, 2]).is_err());
        assert!(FullFlag::new(vec![0, 1, 0]).is_err());
        assert_eq!(flag(&[0, 1, 1, 2]).total(), 2);
    }

    #[test]
    fn ext_with_zero_flag() {
        let v = flag(&[0, 1, 2, 2, 3]);
        assert_eq!(ext_quiver(&v, &FullFlag::zero(5)).unwrap(), 0);
        assert_eq!(
            ext_quiver(&v, &FullFlag::zero(4)),
            Err(Error::FlagLengthMismatch { left: 5, right: 4 })
        );
    }

    #[test]
    fn two_dimensional_splittings() {
        let (v1, v2) = split_from_subset(2, &[1]).unwrap();
        assert_eq!(v1.dims(), &[0, 1, 1]);
        assert_eq!(v2.dims(), &[0, 0, 1]);
        assert_eq!(ext_difference(&v1, &v2).unwrap(), 1);
        let (v1, v2) = split_from_subset(2, &[2]).unwrap();
        assert_eq!(ext_difference(&v1, &v2).unwrap(), -1);
        assert!(split_from_subset(2, &[3]).is_err());
        assert!(split_from_subset(2, &[1, 1]).is_err());
    }

    #[test]
    fn diff_set_examples() {
        assert_eq!(splitting_diff_set(1, 1).unwrap(), BTreeSet::from([-1, 1]));
        assert_eq!(splitting_diff_set(0, 5).unwrap(), BTreeSet::from([0]));
        assert_eq!(splitting_diff_set(2, 2).unwrap(), BTreeSet::from([-4, -2, 0, 2, 4]));
        assert_eq!(
            splitting_diff_set(9, 8),
            Err(Error::BudgetExceeded { total: 17, limit: 16 })
        );
    }

    #[test]
    fn diff_set_is_the_progression() {
        for d1 in 0..=8 {
            for d2 in 0..=8 - d1 {
                assert_eq!(splitting_diff_set(d1, d2).unwrap(), expected_diff_set(d1, d2));
            }
        }
    }

    #[test]
    fn swap_negates() {
        for (d1, d2) in [(1, 3), (2, 5), (4, 4), (3, 0)] {
            let a = splitting_diff_set(d1, d2).unwrap();
            let b: BTreeSet<i64> = splitting_diff_set(d2, d1).unwrap().iter().map(|x| -x).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn extremal_subsets() {
        for (d1, d2) in [(1, 1), (2, 3), (4, 2), (3, 3)] {
            let d = (d1 + d2) as usize;
            let first: Vec<usize> = (1..=d1 as usize).collect();
            let last: Vec<usize> = (d2 as usize + 1..=d).collect();
            let (a1, a2) = split_from_subset(d, &first).unwrap();
            let (b1, b2) = split_from_subset(d, &last).unwrap();
            assert_eq!(ext_quiver(&a1, &a2).unwrap(), (d1 * d2) as i64);
            assert_eq!(ext_quiver(&a2, &a1).unwrap(), 0);
            assert_eq!(ext_quiver(&b2, &b1).unwrap(), (d1 * d2) as i64);
            assert_eq!(ext_difference(&b1, &b2).unwrap(), -((d1 * d2) as i64));
        }
    }

    #[test]
    fn adjacent_moves_change_by_two() {
        for d in 2..=8usize {
            for d1 in 0..=d as u32 {
                for s in subsets(d1, d as u32 - d1).unwrap() {
                    let (v1, v2) = split_from_subset(d, &s).unwrap();
                    let base = ext_difference(&v1, &v2).unwrap();
                    for (pos, &k) in s.iter().enumerate() {
                        if k < d && !s.contains(&(k + 1)) {
                            let mut moved = s.clone();
                            moved[pos] = k + 1;
                            let (w1, w2) = split_from_subset(d, &moved).unwrap();
                            assert_eq!(ext_difference(&w1, &w2).unwrap() - base, -2);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn doubled_framing_gives_even_differences() {
        for (a, b) in [(1, 1), (1, 2), (2, 2), (3, 1)] {
            assert!(splitting_diff_set(2 * a, 2 * b).unwrap().iter().all(|x| x % 2 == 0));
        }
    }

    /// Riemann-Roch on a surface with intersection form `form`, canonical
    /// class `k` and `chi(O_S) = chi_o`, for a sheaf of rank `r`, `c1`, `c2`.
    fn rr_chi(form: &[Vec<i64>], k: &[i64], chi_o: i64, r: i64, c1: &[i64], c2: i64) -> i64 {
        let dot = |a: &[i64], b: &[i64]| -> i64 {
            (0..a.len()).map(|i| (0..b.len()).map(|j| a[i] * form[i][j] * b[j]).sum::<i64>()).sum()
        };
        let twice = 2 * r * chi_o + dot(c1, c1) - dot(c1, k) - 2 * c2;
        assert_eq!(twice % 2, 0);
        twice / 2
    }

    /// `chi(F (x) K)` from the Chern classes of `F (x) K`.
    fn rr_chi_twisted(form: &[Vec<i64>], k: &[i64], chi_o: i64, r: i64, c1: &[i64], c2: i64) -> i64 {
        let dot = |a: &[i64], b: &[i64]| -> i64 {
            (0..a.len()).map(|i| (0..b.len()).map(|j| a[i] * form[i][j] * b[j]).sum::<i64>()).sum()
        };
        let c1t: Vec<i64> = c1.iter().zip(k).map(|(a, b)| a + r * b).collect();
        let c2t = c2 + (r - 1) * dot(c1, k) + r * (r - 1) / 2 * dot(k, k);
        rr_chi(form, k, chi_o, r, &c1t, c2t)
    }

    #[test]
    fn hrr_matches_riemann_roch_on_surfaces() {
        let p2 = (vec![vec![1]], vec![-3], 1);
        let p1p1 = (vec![vec![0, 1], vec![1, 0]], vec![-2, -2], 1);
        let k3 = (vec![vec![-2]], vec![0], 2);
        for (form, k, chi_o) in [p2, p1p1, k3] {
            let kk: i64 = (0..k.len())
                .map(|i| (0..k.len()).map(|j| k[i] * form[i][j] * k[j]).sum::<i64>())
                .sum();
            for r in 1..=4 {
                for a in -3..=3 {
                    for b in -2..=2 {
                        let c1: Vec<i64> = if k.len() == 1 { vec![a] } else { vec![a, b] };
                        let c1k: i64 = (0..k.len())
                            .map(|i| (0..k.len()).map(|j| c1[i] * form[i][j] * k[j]).sum::<i64>())
                            .sum();
                        let c2 = b + 5;
                        let diff = rr_chi(&form, &k, chi_o, r, &c1, c2)
                            - rr_chi_twisted(&form, &k, chi_o, r, &c1, c2);
                        assert_eq!(hrr_parity_diff(&SurfaceClass::general(r, c1k, kk)), diff);
                    }
                }
            }
        }
    }

    #[test]
    fn hrr_examples() {
        assert_eq!(hrr_parity_diff(&SurfaceClass::general(3, 0, 0)), 0);
        assert_eq!(hrr_parity_diff(&SurfaceClass::general(1, 3, 7)), -3);
        assert_eq!(hrr_parity_diff(&SurfaceClass::spin(2, 5, -1)) % 2, 0);
    }

    #[test]
    fn vw_parity_cases() {
        let s = SurfaceClass::spin(0, 0, 3);
        let f = SheafClass { rank: 2, c1_dot_d: 3 };
        assert_eq!(vw_ext_parity(&s, &f, &f).unwrap(), 0);
        assert_eq!(
            vw_ext_parity(&SurfaceClass::general(0, 0, 1), &f, &f),
            Err(Error::NotSpin)
        );
    }

    proptest! {
        #[test]
        fn spin_differences_are_even(r in 1i64..10, c in -50i64..50, d2 in -20i64..20) {
            prop_assert_eq!(hrr_parity_diff(&SurfaceClass::spin(r, c, d2)).rem_euclid(2), 0);
        }

        #[test]
        fn vw_parity_vanishes_on_spin(r1 in 1i64..6, r2 in 1i64..6, c1 in -30i64..30, c2 in -30i64..30, d2 in -10i64..10) {
            let s = SurfaceClass::spin(0, 0, d2);
            let p = vw_ext_parity(&s, &SheafClass { rank: r1, c1_dot_d: c1 }, &SheafClass { rank: r2, c1_dot_d: c2 }).unwrap();
            prop_assert_eq!(p, 0);
        }

        #[test]
        fn doubled_steps_can_be_removed(steps in prop::collection::vec((0u32..2, 0u32..2), 1..10), k in 0usize..10) {
            let mut a = vec![0u32];
            let mut b = vec![0u32];
            for &(x, y) in &steps {
                a.push(a.last().unwrap() + x);
                b.push(b.last().unwrap() + y);
            }
            let k = k % steps.len();
            // force a doubled (flat in both) step at k
            let mut a2 = a.clone();
            let mut b2 = b.clone();
            a2.insert(k + 1, a[k]);
            b2.insert(k + 1, b[k]);
            let (v1, v2) = (FullFlag::new(a2).unwrap(), FullFlag::new(b2).unwrap());
            prop_assert!(v1.is_flat_at(k) && v2.is_flat_at(k));
            let (w1, w2) = (v1.remove_step(k), v2.remove_step(k));
            prop_assert_eq!(ext_quiver(&v1, &v2).unwrap(), ext_quiver(&w1, &w2).unwrap());
            prop_assert_eq!(ext_quiver(&v2, &v1).unwrap(), ext_quiver(&w2, &w1).unwrap());
        }
    }
}
