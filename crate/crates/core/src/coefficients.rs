//! Four-wave coupling coefficients `α(q1,q2,q3,q4) = π² ∫ φ_{q1} φ_{q2} φ̄_{q3} φ̄_{q4}`
//! and tables of them.
//!
//! Three independent evaluation routes are provided:
//!
//! * [`lll_coeff`]: closed factorial form on the Lowest Landau Level `φ_{n,n}`;
//! * [`radial_coeff`]: exact rational multiple of `π` on the radial modes `h_k`;
//! * [`general_coeff`] / [`product_integral`]: angular reduction followed by
//!   Gauss–Laguerre quadrature in `ρ = r²`, valid for every quadruple.

use std::fmt;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::basis::{ln_factorial, radial_polynomial, ModeIndex};
use crate::error::{CrError, Result};
use crate::quadrature::gauss_laguerre;
use crate::state::modes;

pub use crate::table_io::{load_table, save_table};

/// Values below this magnitude are treated as structural zeros and not stored.
pub const STORE_FLOOR: f64 = 1e-13;

/// Relative tolerance of the node-doubling convergence check.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Default cap on the number of canonical table entries.
pub const DEFAULT_ENTRY_CAP: usize = 5_000_000;

/// `α` on `(φ_{n1,n1}, φ_{n2,n2}, φ_{n3,n3}, φ_{n4,n4})`:
/// `(π/2) (n1+n2)! / (2^{n1+n2} √(n1! n2! n3! n4!))` when `n1+n2 = n3+n4`, else 0.
pub fn lll_coeff(n1: u32, n2: u32, n3: u32, n4: u32) -> f64 {
    if n1 as u64 + n2 as u64 != n3 as u64 + n4 as u64 {
        return 0.0;
    }
    let s = n1 + n2;
    let log = ln_factorial(s)
        - s as f64 * std::f64::consts::LN_2
        - 0.5 * (ln_factorial(n1) + ln_factorial(n2) + ln_factorial(n3) + ln_factorial(n4));
    0.5 * PI * log.exp()
}

/// Exact radial coefficient: `α = pi_multiple · π`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialCoeff {
    pub pi_multiple: BigRational,
    pub value: f64,
}

fn big_factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

fn binomial(n: u32, k: u32) -> BigInt {
    big_factorial(n) / (big_factorial(k) * big_factorial(n - k))
}

/// Coefficients of `L_k(ρ)` in the monomial basis.
fn laguerre_rational(k: u32) -> Vec<BigRational> {
    (0..=k)
        .map(|j| {
            let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            BigRational::new(sign * binomial(k, j), big_factorial(j))
        })
        .collect()
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `α(h_{k1}, h_{k2}, h_{k3}, h_{k4}) = π ∫₀^∞ L_{k1}L_{k2}L_{k3}L_{k4}(ρ) e^{-2ρ} dρ`
/// in exact arithmetic, using `∫ ρ^j e^{-2ρ} dρ = j!/2^{j+1}`.
pub fn radial_coeff(k1: u32, k2: u32, k3: u32, k4: u32) -> RadialCoeff {
    if k1 as u64 + k2 as u64 != k3 as u64 + k4 as u64 {
        return RadialCoeff { pi_multiple: BigRational::zero(), value: 0.0 };
    }
    let mut poly = vec![BigRational::one()];
    for k in [k1, k2, k3, k4] {
        poly = poly_mul(&poly, &laguerre_rational(k));
    }
    let mut total = BigRational::zero();
    let mut moment = BigRational::new(BigInt::one(), BigInt::from(2));
    for (j, c) in poly.iter().enumerate() {
        if j > 0 {
            moment = moment * BigRational::new(BigInt::from(j), BigInt::from(2));
        }
        total += c * &moment;
    }
    let value = total.to_f64().unwrap_or(f64::NAN) * PI;
    RadialCoeff { pi_multiple: total, value }
}

/// Four mode labels, the first two entering `α` unconjugated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResonantQuadruple {
    pub q: [ModeIndex; 4],
}

impl ResonantQuadruple {
    /// Requires `n1+n2 = n3+n4` and `m1+m2 = m3+m4`.
    pub fn new(q1: ModeIndex, q2: ModeIndex, q3: ModeIndex, q4: ModeIndex) -> Result<Self> {
        let quad = ResonantQuadruple { q: [q1, q2, q3, q4] };
        if quad.omega() != 0 || !quad.angular_match() {
            return Err(CrError::InvalidArgument(format!("{quad} is not resonant")));
        }
        Ok(quad)
    }

    /// Requires only `m1+m2 = m3+m4`, as in the full product table.
    pub fn new_product(q1: ModeIndex, q2: ModeIndex, q3: ModeIndex, q4: ModeIndex) -> Result<Self> {
        let quad = ResonantQuadruple { q: [q1, q2, q3, q4] };
        if !quad.angular_match() {
            return Err(CrError::InvalidArgument(format!("{quad} violates m1+m2 = m3+m4")));
        }
        Ok(quad)
    }

    /// Frequency mismatch `n1+n2-n3-n4`.
    pub fn omega(&self) -> i64 {
        let n = |i: usize| self.q[i].n() as i64;
        n(0) + n(1) - n(2) - n(3)
    }

    pub fn angular_match(&self) -> bool {
        let m = |i: usize| self.q[i].m() as i64;
        m(0) + m(1) == m(2) + m(3)
    }

    pub fn max_level(&self) -> u32 {
        self.q.iter().map(|q| q.n()).max().unwrap_or(0)
    }

    /// Representative of the symmetry class: `q1 <= q2`, `q3 <= q4`,
    /// `(q1,q2) <= (q3,q4)`.
    pub fn canonical(&self) -> Self {
        let [a, b, c, d] = self.q;
        let p = if a <= b { (a, b) } else { (b, a) };
        let r = if c <= d { (c, d) } else { (d, c) };
        let (p, r) = if p <= r { (p, r) } else { (r, p) };
        ResonantQuadruple { q: [p.0, p.1, r.0, r.1] }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// The distinct ordered quadruples in the symmetry class of `self`.
    pub fn orbit(&self) -> Vec<ResonantQuadruple> {
        let [a, b, c, d] = self.q;
        let mut out: Vec<ResonantQuadruple> = [
            [a, b, c, d],
            [b, a, c, d],
            [a, b, d, c],
            [b, a, d, c],
            [c, d, a, b],
            [d, c, a, b],
            [c, d, b, a],
            [d, c, b, a],
        ]
        .into_iter()
        .map(|q| ResonantQuadruple { q })
        .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ResonantQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {} {}]", self.q[0], self.q[1], self.q[2], self.q[3])
    }
}

fn min_nodes(q: &[ModeIndex; 4]) -> usize {
    // the integrand is a polynomial of degree Σn/2 in ρ
    q.iter().map(|m| m.n() as usize).sum::<usize>() + 8
}

fn reduced_integral(q: &[ModeIndex; 4], nodes: usize) -> f64 {
    let rule = gauss_laguerre(nodes);
    // ρ = x/2 turns e^{-2ρ} dρ into e^{-x} dx / 2
    0.5 * PI * rule.integrate(|x| {
        let rho = 0.5 * x;
        q.iter().map(|&m| radial_polynomial(m, rho)).product::<f64>()
    })
}

/// `π² ∫ φ_{q1} φ_{q2} φ̄_{q3} φ̄_{q4}` at a fixed base node count, with the
/// node-doubling convergence check. Zero without quadrature when the
/// angular selection rule fails.
pub fn product_integral_with_nodes(q: [ModeIndex; 4], nodes: usize) -> Result<f64> {
    if q[0].m() as i64 + q[1].m() as i64 != q[2].m() as i64 + q[3].m() as i64 {
        return Ok(0.0);
    }
    let coarse = reduced_integral(&q, nodes.max(1));
    let fine = reduced_integral(&q, 2 * nodes.max(1));
    let change = (fine - coarse).abs();
    if change > QUADRATURE_TOL * fine.abs().max(1.0) {
        return Err(CrError::QuadratureNonconvergence { quad: q, change });
    }
    Ok(fine)
}

/// `π² ∫ φ_{q1} φ_{q2} φ̄_{q3} φ̄_{q4}` for any four modes.
pub fn product_integral(q: [ModeIndex; 4]) -> Result<f64> {
    product_integral_with_nodes(q, min_nodes(&q))
}

/// Coupling coefficient of a resonant quadruple by quadrature.
pub fn general_coeff(q: &ResonantQuadruple) -> Result<f64> {
    product_integral(q.q)
}

/// Coefficient family of a [`CouplingTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `φ_{n,n}` only, closed form.
    Lll,
    /// `φ_{2k,0}` only, exact rationals.
    Radial,
    /// All modes, resonant quadruples, quadrature.
    General2d,
    /// All modes, every quadruple with `m1+m2 = m3+m4`, quadrature.
    FullProduct,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lll => "lll",
            Family::Radial => "radial",
            Family::General2d => "general2d",
            Family::FullProduct => "full-product",
        }
    }

    pub fn is_resonant(self) -> bool {
        self != Family::FullProduct
    }

    /// Modes spanned by the family up to the level cutoff.
    pub fn modes(self, cutoff: u32) -> Vec<ModeIndex> {
        match self {
            Family::Lll => (0..=cutoff).map(|n| ModeIndex::new_unchecked(n, n as i32)).collect(),
            Family::Radial => (0..=cutoff / 2).map(|k| ModeIndex::new_unchecked(2 * k, 0)).collect(),
            Family::General2d | Family::FullProduct => modes(cutoff).collect(),
        }
    }

    pub fn contains(self, q: ModeIndex) -> bool {
        match self {
            Family::Lll => q.n() as i32 == q.m(),
            Family::Radial => q.m() == 0,
            Family::General2d | Family::FullProduct => true,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = CrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lll" => Ok(Family::Lll),
            "radial" => Ok(Family::Radial),
            "general2d" => Ok(Family::General2d),
            "full-product" => Ok(Family::FullProduct),
            other => Err(CrError::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

/// One canonical entry of a table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableEntry {
    pub key: ResonantQuadruple,
    pub value: f64,
}

impl TableEntry {
    pub fn omega(&self) -> i64 {
        self.key.omega()
    }

    /// Number of distinct ordered quadruples represented by this entry.
    pub fn multiplicity(&self) -> usize {
        self.key.orbit().len()
    }
}

/// Immutable map from quadruples to `α`, stored on canonical keys.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable {
    family: Family,
    cutoff: u32,
    entries: Vec<TableEntry>,
}

impl CouplingTable {
    /// Assembles a table from canonical entries, checking the family rules.
    pub fn from_entries(family: Family, cutoff: u32, mut entries: Vec<TableEntry>) -> Result<Self> {
        for e in &entries {
            if !e.key.is_canonical() {
                return Err(CrError::TableMismatch(format!("key {} is not canonical", e.key)));
            }
            if e.key.max_level() > cutoff || !e.key.q.iter().all(|&q| family.contains(q)) {
                return Err(CrError::TableMismatch(format!("key {} outside {family} cutoff {cutoff}", e.key)));
            }
            if !e.key.angular_match() || (family.is_resonant() && e.key.omega() != 0) {
                return Err(CrError::TableMismatch(format!("key {} violates the {family} selection rule", e.key)));
            }
            if !e.value.is_finite() {
                return Err(CrError::TableMismatch(format!("non-finite value at {}", e.key)));
            }
        }
        entries.sort_by(|a, b| a.key.cmp(&b.key));
        if entries.windows(2).any(|w| w[0].key == w[1].key) {
            return Err(CrError::TableMismatch("duplicate key".into()));
        }
        Ok(CouplingTable { family, cutoff, entries })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Canonical entries in key order.
    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of ordered quadruples with a nonzero value.
    pub fn ordered_len(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity()).sum()
    }

    /// Every ordered quadruple with its value.
    pub fn ordered_entries(&self) -> impl Iterator<Item = (ResonantQuadruple, f64)> + '_ {
        self.entries.iter().flat_map(|e| e.key.orbit().into_iter().map(move |k| (k, e.value)))
    }

    /// The `ω = 0` entries of a full-product table as a general2d table.
    pub fn resonant_part(&self) -> CouplingTable {
        let family = if self.family == Family::FullProduct { Family::General2d } else { self.family };
        let entries = self.entries.iter().filter(|e| e.omega() == 0).copied().collect();
        CouplingTable { family, cutoff: self.cutoff, entries }
    }

    /// `α` of an arbitrary ordered quadruple; zero when absent.
    pub fn get(&self, q1: ModeIndex, q2: ModeIndex, q3: ModeIndex, q4: ModeIndex) -> f64 {
        self.lookup(&ResonantQuadruple { q: [q1, q2, q3, q4] })
    }

    pub fn lookup(&self, quad: &ResonantQuadruple) -> f64 {
        let key = quad.canonical();
        match self.entries.binary_search_by(|e| e.key.cmp(&key)) {
            Ok(i) => self.entries[i].value,
            Err(_) => 0.0,
        }
    }
}

/// Limits for [`build_table`].
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Maximum number of canonical entries.
    pub entry_cap: usize,
    /// Worker threads; 0 means the rayon default.
    pub jobs: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { entry_cap: DEFAULT_ENTRY_CAP, jobs: 0 }
    }
}

/// Canonical keys of a family up to the cutoff, before any evaluation.
pub fn enumerate_keys(family: Family, cutoff: u32) -> Vec<ResonantQuadruple> {
    let ms = family.modes(cutoff);
    let mut pairs = Vec::new();
    for (i, &a) in ms.iter().enumerate() {
        for &b in &ms[i..] {
            pairs.push((a, b));
        }
    }
    let mut keys = Vec::new();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[i..] {
            let quad = ResonantQuadruple { q: [a, b, c, d] };
            if quad.angular_match() && (!family.is_resonant() || quad.omega() == 0) {
                keys.push(quad);
            }
        }
    }
    keys
}

fn evaluate(family: Family, key: &ResonantQuadruple) -> Result<f64> {
    let q = key.q;
    match family {
        Family::Lll => Ok(lll_coeff(q[0].n(), q[1].n(), q[2].n(), q[3].n())),
        Family::Radial => Ok(radial_coeff(q[0].n() / 2, q[1].n() / 2, q[2].n() / 2, q[3].n() / 2).value),
        Family::General2d | Family::FullProduct => product_integral(q),
    }
}

/// Computes every nonzero coefficient of the family up to `cutoff`.
pub fn build_table(family: Family, cutoff: u32, opts: BuildOptions) -> Result<CouplingTable> {
    let keys = enumerate_keys(family, cutoff);
    if keys.len() > opts.entry_cap {
        return Err(CrError::ResourceCap { projected: keys.len(), cap: opts.entry_cap });
    }
    let run = || -> Result<Vec<TableEntry>> {
        let values: Vec<Result<f64>> = keys.par_iter().map(|k| evaluate(family, k)).collect();
        let mut entries = Vec::with_capacity(keys.len());
        for (key, v) in keys.iter().zip(values) {
            let value = v?;
            let keep = match family {
                Family::Lll | Family::Radial => value != 0.0,
                _ => value.abs() > STORE_FLOOR,
            };
            if keep {
                entries.push(TableEntry { key: *key, value });
            }
        }
        Ok(entries)
    };
    let entries = if opts.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| CrError::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(run)?
    } else {
        run()?
    };
    CouplingTable::from_entries(family, cutoff, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn md(n: u32, m: i32) -> ModeIndex {
        ModeIndex::new(n, m).unwrap()
    }

    fn quad(a: (u32, i32), b: (u32, i32), c: (u32, i32), d: (u32, i32)) -> [ModeIndex; 4] {
        [md(a.0, a.1), md(b.0, b.1), md(c.0, c.1), md(d.0, d.1)]
    }

    #[test]
    fn lll_examples() {
        assert_abs_diff_eq!(lll_coeff(0, 0, 0, 0), PI / 2.0, epsilon = 1e-15);
        assert_eq!(lll_coeff(1, 0, 0, 0), 0.0);
        assert_abs_diff_eq!(lll_coeff(2, 0, 1, 1), PI / (4.0 * 2f64.sqrt()), epsilon = 1e-15);
        assert!(lll_coeff(400_000, 600_000, 500_000, 500_000).is_finite());
    }

    #[test]
    fn radial_examples() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(radial_coeff(0, 0, 0, 0).pi_multiple, half);
        assert_eq!(radial_coeff(1, 1, 1, 1).pi_multiple, BigRational::new(1.into(), 4.into()));
        assert_eq!(radial_coeff(1, 1, 2, 0).pi_multiple, BigRational::new(1.into(), 8.into()));
        assert_eq!(radial_coeff(1, 0, 0, 0).value, 0.0);
    }

    #[test]
    fn general_examples() {
        let v = product_integral(quad((0, 0), (0, 0), (0, 0), (0, 0))).unwrap();
        assert_abs_diff_eq!(v, PI / 2.0, epsilon = 1e-13);
        let v = product_integral(quad((1, 1), (1, 1), (1, 1), (1, 1))).unwrap();
        assert_abs_diff_eq!(v, PI / 4.0, epsilon = 1e-13);
        let v = product_integral(quad((2, 2), (2, -2), (2, 0), (2, 0))).unwrap();
        assert_abs_diff_eq!(v, PI / 8.0, epsilon = 1e-13);
        assert_eq!(product_integral(quad((2, 2), (0, 0), (2, 0), (0, 0))).unwrap(), 0.0);
    }

    #[test]
    fn too_few_nodes_is_reported() {
        let q = quad((6, 0), (6, 0), (6, 0), (6, 0));
        assert!(matches!(
            product_integral_with_nodes(q, 2),
            Err(CrError::QuadratureNonconvergence { .. })
        ));
    }

    #[test]
    fn resonance_is_enforced() {
        assert!(ResonantQuadruple::new(md(1, 1), md(0, 0), md(0, 0), md(0, 0)).is_err());
        assert!(ResonantQuadruple::new_product(md(1, 1), md(0, 0), md(2, 0), md(0, 0)).is_err());
        assert!(ResonantQuadruple::new_product(md(1, 1), md(0, 0), md(1, 1), md(2, 0)).is_ok());
        assert!(ResonantQuadruple::new_product(md(2, 0), md(0, 0), md(0, 0), md(0, 0)).is_ok());
    }

    #[test]
    fn lll_cutoff_one_has_six_ordered_entries() {
        let t = build_table(Family::Lll, 1, BuildOptions::default()).unwrap();
        assert_eq!(t.ordered_len(), 6);
        let mut ordered: Vec<[u32; 4]> = t.ordered_entries().map(|(k, _)| k.q.map(|q| q.n())).collect();
        ordered.sort();
        assert_eq!(ordered, vec![[0, 0, 0, 0], [0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 1, 0], [1, 1, 1, 1]]);
    }

    #[test]
    fn radial_cutoff_zero_is_a_single_entry() {
        let t = build_table(Family::Radial, 0, BuildOptions::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.entries()[0].value, PI / 2.0);
    }

    #[test]
    fn cap_is_enforced() {
        let err = build_table(Family::General2d, 4, BuildOptions { entry_cap: 10, jobs: 1 }).unwrap_err();
        assert!(matches!(err, CrError::ResourceCap { cap: 10, .. }));
    }

    #[test]
    fn lookup_is_symmetric_and_zero_off_resonance() {
        let t = build_table(Family::General2d, 3, BuildOptions::default()).unwrap();
        for e in t.entries() {
            for k in e.key.orbit() {
                assert_eq!(t.lookup(&k), e.value);
            }
        }
        assert_eq!(t.get(md(1, 1), md(0, 0), md(0, 0), md(0, 0)), 0.0);
    }

    #[test]
    fn jobs_do_not_change_values() {
        let a = build_table(Family::General2d, 3, BuildOptions { entry_cap: usize::MAX, jobs: 1 }).unwrap();
        let b = build_table(Family::General2d, 3, BuildOptions { entry_cap: usize::MAX, jobs: 3 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn families_agree_on_shared_modes() {
        for n1 in 0..=6u32 {
            for n2 in 0..=6u32 {
                for n3 in 0..=(n1 + n2).min(6) {
                    let n4 = n1 + n2 - n3;
                    if n4 > 6 {
                        continue;
                    }
                    let lll = lll_coeff(n1, n2, n3, n4);
                    let q = [n1, n2, n3, n4].map(|n| md(n, n as i32));
                    assert!((product_integral(q).unwrap() - lll).abs() < 1e-10);
                    let rad = radial_coeff(n1, n2, n3, n4).value;
                    let q = [n1, n2, n3, n4].map(|k| md(2 * k, 0));
                    assert!((product_integral(q).unwrap() - rad).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn lll_and_radial_coefficients_are_positive() {
        for fam in [Family::Lll, Family::Radial] {
            let t = build_table(fam, 16, BuildOptions::default()).unwrap();
            assert_eq!(t.len(), enumerate_keys(fam, 16).len());
            assert!(t.entries().iter().all(|e| e.value > 0.0));
        }
    }
}
