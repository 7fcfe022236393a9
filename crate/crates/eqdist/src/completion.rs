//! Completion of sums on `Z/qZ`: the normalized discrete Fourier transform,
//! concrete compactly supported smooth cutoffs with evaluable derivatives,
//! exact incomplete sums, the Plancherel completion identity, and the
//! `q`-van der Corput estimate audit.

use num_complex::Complex64;

use crate::arith::FactoredModulus;
use crate::dft;
use crate::error::{precondition, Result};
use crate::report::BoundReport;

/// Highest derivative order the cutoff evaluators support.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Truncated Taylor jet of order [`MAX_DERIVATIVE_ORDER`]: coefficient `k`
/// is `f^{(k)}(t)/k!`. Propagating jets through the closed form of the bump
/// gives all derivatives without symbolic algebra.
#[derive(Clone, Copy)]
struct Jet([f64; MAX_DERIVATIVE_ORDER + 1]);

impl Jet {
    fn variable(t: f64) -> Self {
        let mut c = [0.0; MAX_DERIVATIVE_ORDER + 1];
        c[0] = t;
        c[1] = 1.0;
        Jet(c)
    }

    fn mul(&self, other: &Jet) -> Jet {
        let mut out = [0.0; MAX_DERIVATIVE_ORDER + 1];
        for i in 0..=MAX_DERIVATIVE_ORDER {
            for j in 0..=MAX_DERIVATIVE_ORDER - i {
                out[i + j] += self.0[i] * other.0[j];
            }
        }
        Jet(out)
    }

    fn sub_from(&self, scalar: f64) -> Jet {
        let mut out = self.0;
        for c in out.iter_mut() {
            *c = -*c;
        }
        out[0] += scalar;
        Jet(out)
    }

    /// Reciprocal series; requires a nonzero constant term.
    fn recip(&self) -> Jet {
        let a0 = self.0[0];
        let mut out = [0.0; MAX_DERIVATIVE_ORDER + 1];
        out[0] = 1.0 / a0;
        for n in 1..=MAX_DERIVATIVE_ORDER {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += self.0[k] * out[n - k];
            }
            out[n] = -acc / a0;
        }
        Jet(out)
    }

    fn neg(&self) -> Jet {
        let mut out = self.0;
        for c in out.iter_mut() {
            *c = -*c;
        }
        Jet(out)
    }

    /// `exp` of the series, via `E' = a'·E`.
    fn exp(&self) -> Jet {
        let mut out = [0.0; MAX_DERIVATIVE_ORDER + 1];
        out[0] = self.0[0].exp();
        for n in 1..=MAX_DERIVATIVE_ORDER {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += k as f64 * self.0[k] * out[n - k];
            }
            out[n] = acc / n as f64;
        }
        Jet(out)
    }
}

/// Named bump shapes. The default is `t ↦ exp(−1/(t(1−t)))` supported on
/// `[0, 1]`, which has all derivatives vanishing at the endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffShape {
    Bump,
}

impl CutoffShape {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "bump" | "default" => Ok(CutoffShape::Bump),
            other => Err(crate::error::Error::Unknown { kind: "cutoff shape", name: other.into() }),
        }
    }

    /// Support `[c, C]` of the unscaled shape.
    pub fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// Value and all derivatives up to order 8 at `t`.
    fn jet(&self, t: f64) -> [f64; MAX_DERIVATIVE_ORDER + 1] {
        if t <= 0.0 || t >= 1.0 {
            return [0.0; MAX_DERIVATIVE_ORDER + 1];
        }
        let tj = Jet::variable(t);
        let u = tj.mul(&tj.sub_from(1.0)); // t(1−t)
        let g = u.recip().neg(); // −1/(t(1−t))
        let psi = g.exp();
        let mut out = [0.0; MAX_DERIVATIVE_ORDER + 1];
        let mut fact = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *slot = psi.0[k] * fact;
        }
        out
    }
}

/// A shifted smooth cutoff `ψ_N(x) = ψ((x − x₀)/N)` at scale `N ≥ 1`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothCutoff {
    pub x0: f64,
    pub scale: f64,
    pub shape: CutoffShape,
}

/// Build a cutoff; fails when `N < 1` (`make_cutoff` of the toolkit).
pub fn make_cutoff(x0: f64, scale: f64, shape: CutoffShape) -> Result<SmoothCutoff> {
    if !(scale >= 1.0) {
        return Err(precondition("cutoff scale must be ≥ 1"));
    }
    Ok(SmoothCutoff { x0, scale, shape })
}

impl SmoothCutoff {
    /// Support interval `[x₀ + cN, x₀ + CN]` on the real line.
    pub fn support(&self) -> (f64, f64) {
        let (c, big_c) = self.shape.support();
        (self.x0 + c * self.scale, self.x0 + big_c * self.scale)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.shape.jet((x - self.x0) / self.scale)[0]
    }

    /// `ψ_N^{(j)}(x) = ψ^{(j)}((x−x₀)/N) / N^j`, for `j ≤ 8`.
    pub fn derivative(&self, j: usize, x: f64) -> Result<f64> {
        if j > MAX_DERIVATIVE_ORDER {
            return Err(precondition("derivative order above 8"));
        }
        let t = (x - self.x0) / self.scale;
        Ok(self.shape.jet(t)[j] / self.scale.powi(j as i32))
    }

    /// Integers inside the support.
    pub fn integer_support(&self) -> std::ops::RangeInclusive<i64> {
        let (lo, hi) = self.support();
        (lo.floor() as i64)..=(hi.ceil() as i64)
    }

    /// `Σ_m ψ_N(m)` over all integers (finite by compact support).
    pub fn sum_over_integers(&self) -> f64 {
        self.integer_support().map(|m| self.eval(m as f64)).sum()
    }
}

/// A function on `Z/qZ` stored by value table.
#[derive(Debug, Clone)]
pub struct PeriodicFunction {
    modulus: FactoredModulus,
    values: Vec<Complex64>,
}

impl PeriodicFunction {
    pub fn new(modulus: FactoredModulus, values: Vec<Complex64>) -> Result<Self> {
        if values.len() as u64 != modulus.value() {
            return Err(precondition("value table length must equal the modulus"));
        }
        Ok(PeriodicFunction { modulus, values })
    }

    pub fn from_fn(modulus: FactoredModulus, f: impl FnMut(u64) -> Complex64) -> Self {
        let values = (0..modulus.value()).map(f).collect();
        PeriodicFunction { modulus, values }
    }

    pub fn modulus(&self) -> &FactoredModulus {
        &self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.value()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at any integer, by reduction mod `q`.
    pub fn at(&self, n: i64) -> Complex64 {
        self.values[n.rem_euclid(self.q() as i64) as usize]
    }
}

/// Normalized Fourier transform `FT_q(f)(h) = q^{−1/2} Σ_x f(x) e_q(hx)`,
/// a unitary operator on functions `Z/qZ → C`.
pub fn ft_q(f: &PeriodicFunction) -> PeriodicFunction {
    let scale = 1.0 / (f.q() as f64).sqrt();
    let values = dft::transform(f.values(), 1.0)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    PeriodicFunction { modulus: f.modulus.clone(), values }
}

/// Exact incomplete sum `Σ_m ψ_N(m) f(m)`, optionally restricted to a
/// congruence class `m ≡ a (d)` with `d | q`.
pub fn incomplete_sum(
    f: &PeriodicFunction,
    cutoff: &SmoothCutoff,
    congruence: Option<(i64, u64)>,
) -> Result<Complex64> {
    if let Some((_, d)) = congruence {
        if d == 0 || f.q() % d != 0 {
            return Err(precondition("congruence modulus must divide q"));
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for m in cutoff.integer_support() {
        if let Some((a, d)) = congruence {
            if m.rem_euclid(d as i64) != a.rem_euclid(d as i64) {
                continue;
            }
        }
        let w = cutoff.eval(m as f64);
        if w != 0.0 {
            acc += w * f.at(m);
        }
    }
    Ok(acc)
}

/// Report from the completion identity: the main term, the exact error,
/// both sides of the Plancherel form, and the Pólya-Vinogradov style bound
/// terms for ratio reporting.
#[derive(Debug, Clone)]
pub struct CompletionReport {
    pub incomplete: Complex64,
    pub main_term: Complex64,
    pub exact_error: Complex64,
    /// `Σ_m ψ(m) f(m)` recomputed as `Σ_h FT(f)(h)·FT(ψ_{M,q})(−h)`.
    pub plancherel_rhs: Complex64,
    /// `sup_{h≠0} |FT_q(f)(h)|`.
    pub sup_ft_nonzero: f64,
    /// `q^{1/2} · sup_{h≠0} |FT_q(f)(h)|`.
    pub bound_complete: f64,
    /// Truncated variant: `(M/√q) Σ_{0<|h|≤q/M} |FT_q(f)(h)|`.
    pub bound_truncated: f64,
    pub ratio_complete: f64,
    pub ratio_truncated: f64,
}

/// Evaluate the completion of `Σ_m ψ(m) f(m)` into a main term plus exact
/// error, together with its Fourier-side identity.
pub fn completion_estimate(f: &PeriodicFunction, cutoff: &SmoothCutoff) -> Result<CompletionReport> {
    let q = f.q();
    let incomplete = incomplete_sum(f, cutoff, None)?;
    let m_prime = cutoff.sum_over_integers();
    let full_sum: Complex64 = f.values().iter().sum();
    // dividing the complete sum by q first keeps the constant-function
    // case exact: Σ f / q is then exactly f's value
    let main_term = full_sum / q as f64 * m_prime;
    let exact_error = incomplete - main_term;

    // periodization ψ_{M,q}(x) = Σ_n ψ_M(x + qn)
    let mut periodized = vec![Complex64::new(0.0, 0.0); q as usize];
    for m in cutoff.integer_support() {
        let w = cutoff.eval(m as f64);
        if w != 0.0 {
            periodized[m.rem_euclid(q as i64) as usize] += w;
        }
    }
    let psi_q = PeriodicFunction::new(f.modulus.clone(), periodized)?;
    let ft_f = ft_q(f);
    let ft_psi = ft_q(&psi_q);
    let mut plancherel_rhs = Complex64::new(0.0, 0.0);
    for h in 0..q {
        let neg_h = (q - h) % q;
        plancherel_rhs += ft_f.values[h as usize] * ft_psi.values[neg_h as usize];
    }

    let sup_ft_nonzero = ft_f.values[1..]
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    let bound_complete = (q as f64).sqrt() * sup_ft_nonzero;
    let h_cut = ((q as f64 / cutoff.scale).ceil() as u64).min(q / 2);
    let mut tail = 0.0;
    for h in 1..=h_cut {
        tail += ft_f.values[h as usize].norm();
        if h != q - h {
            tail += ft_f.values[(q - h) as usize].norm();
        }
    }
    let bound_truncated = cutoff.scale / (q as f64).sqrt() * tail;
    let err = exact_error.norm();
    Ok(CompletionReport {
        incomplete,
        main_term,
        exact_error,
        plancherel_rhs,
        sup_ft_nonzero,
        bound_complete,
        bound_truncated,
        ratio_complete: if bound_complete > 0.0 { err / bound_complete } else { f64::NAN },
        ratio_truncated: if bound_truncated > 0.0 { err / bound_truncated } else { f64::NAN },
    })
}

/// van der Corput audit: diagnostics from the shift-and-Cauchy-Schwarz
/// split alongside the depth-1 or depth-2 bound formula.
#[derive(Debug, Clone)]
pub struct VdcReport {
    pub report: BoundReport,
    /// `√q`, the Pólya-Vinogradov reference branch.
    pub pv_reference: f64,
    /// Number of shifts probed for the diagonal split diagnostics.
    pub shifts_probed: usize,
    pub diag_abs_sum: f64,
    pub offdiag_abs_sum: f64,
    pub offdiag_abs_max: f64,
    /// The factorization used: `(r, s)` at depth 1, `(r, s₁, s₂)` at depth 2.
    pub split: Vec<u64>,
}

/// Audit the `q`-van der Corput estimate for `Σ_n ψ_N(n) f(n)` against the
/// factorization `q = r·s`. Depth 1 uses the single-split bound
/// `N^{1/2} r^{1/2} + N^{1/2} s^{1/4}`; depth 2 splits `s` once more into a
/// balanced divisor pair and uses the iterated three-factor bound
/// `N^{1/2} r^{1/2} + N^{3/4} s₁^{1/4} + N^{3/4} s₂^{1/8}`.
pub fn vdc_estimate(
    f: &PeriodicFunction,
    cutoff: &SmoothCutoff,
    r: u64,
    s: u64,
    depth: u8,
) -> Result<VdcReport> {
    let q = f.q();
    let n_scale = cutoff.scale;
    if r.checked_mul(s) != Some(q) {
        return Err(precondition("need q = r·s"));
    }
    if n_scale > q as f64 {
        return Err(precondition("need N ≤ q"));
    }
    let actual = incomplete_sum(f, cutoff, None)?;
    let (bound, split, formula) = match depth {
        1 => (
            n_scale.sqrt() * (r as f64).sqrt() + n_scale.sqrt() * (s as f64).powf(0.25),
            vec![r, s],
            "vdc depth 1: N^1/2 r^1/2 + N^1/2 s^1/4",
        ),
        2 => {
            let s1 = balanced_divisor(s);
            let s2 = s / s1;
            (
                n_scale.sqrt() * (r as f64).sqrt()
                    + n_scale.powf(0.75) * (s1 as f64).powf(0.25)
                    + n_scale.powf(0.75) * (s2 as f64).powf(0.125),
                vec![r, s1, s2],
                "vdc depth 2: N^1/2 r^1/2 + N^3/4 s1^1/4 + N^3/4 s2^1/8",
            )
        }
        _ => return Err(precondition("depth must be 1 or 2")),
    };

    // diagonal vs off-diagonal magnitudes of A(k, l) for inspection
    let k_max = ((n_scale / r as f64).floor() as usize).clamp(1, 64);
    let mut diag = 0.0;
    let mut off_sum = 0.0;
    let mut off_max: f64 = 0.0;
    for k in 1..=k_max {
        for l in 1..=k_max {
            let mut a_kl = Complex64::new(0.0, 0.0);
            let (lo, hi) = cutoff.support();
            let lo = lo.floor() as i64 - (k_max as i64 + 1) * r as i64;
            let hi = hi.ceil() as i64;
            for n in lo..=hi {
                let wk = cutoff.eval((n + k as i64 * r as i64) as f64);
                let wl = cutoff.eval((n + l as i64 * r as i64) as f64);
                if wk != 0.0 && wl != 0.0 {
                    a_kl += wk * wl * f.at(n + k as i64 * r as i64)
                        * f.at(n + l as i64 * r as i64).conj();
                }
            }
            if k == l {
                diag += a_kl.norm();
            } else {
                off_sum += a_kl.norm();
                off_max = off_max.max(a_kl.norm());
            }
        }
    }

    Ok(VdcReport {
        report: BoundReport::new(actual, bound, formula),
        pv_reference: (q as f64).sqrt(),
        shifts_probed: k_max,
        diag_abs_sum: diag,
        offdiag_abs_sum: off_sum,
        offdiag_abs_max: off_max,
        split,
    })
}

/// Divisor of `n` closest to `√n` from below (ties to the smaller side).
fn balanced_divisor(n: u64) -> u64 {
    let mut best = 1;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            best = d;
        }
        d += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::e_q;

    fn q(n: u64) -> FactoredModulus {
        FactoredModulus::factor(n).unwrap()
    }

    #[test]
    fn bump_closed_form_values() {
        let c = make_cutoff(0.0, 1.0, CutoffShape::Bump).unwrap();
        assert!((c.eval(0.5) - (-4.0f64).exp()).abs() < 1e-15);
        assert_eq!(c.eval(-0.1), 0.0);
        assert_eq!(c.eval(1.0), 0.0);
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let shape = CutoffShape::Bump;
        let h = 1e-5;
        for t in [0.2, 0.35, 0.5, 0.77] {
            let jet = shape.jet(t);
            for j in 1..=4usize {
                // central finite difference of the (j−1)-st derivative
                let up = shape.jet(t + h)[j - 1];
                let dn = shape.jet(t - h)[j - 1];
                let fd = (up - dn) / (2.0 * h);
                assert!(
                    (fd - jet[j]).abs() < 1e-5 * (1.0 + jet[j].abs()),
                    "t={t} j={j}: fd {fd} vs jet {}",
                    jet[j]
                );
            }
        }
    }

    #[test]
    fn integer_sum_approximates_scale_times_integral() {
        let c = make_cutoff(0.0, 100.0, CutoffShape::Bump).unwrap();
        let total = c.sum_over_integers();
        // Simpson quadrature oracle for ∫₀¹ ψ
        let steps = 4000;
        let mut integral = 0.0;
        for i in 0..steps {
            let a = i as f64 / steps as f64;
            let b = (i + 1) as f64 / steps as f64;
            let m = (a + b) / 2.0;
            integral += (b - a) / 6.0
                * (CutoffShape::Bump.jet(a)[0]
                    + 4.0 * CutoffShape::Bump.jet(m)[0]
                    + CutoffShape::Bump.jet(b)[0]);
        }
        assert!(
            (total - 100.0 * integral).abs() < 0.01 * 100.0 * integral,
            "sum {total} vs N∫ψ {}",
            100.0 * integral
        );
    }

    #[test]
    fn ft_point_mass_and_constant() {
        let modulus = q(12);
        let delta = PeriodicFunction::from_fn(modulus.clone(), |x| {
            Complex64::new(if x == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        let t = ft_q(&delta);
        for v in t.values() {
            assert!((v - Complex64::new(1.0 / (12f64).sqrt(), 0.0)).norm() < 1e-12);
        }

        let one = PeriodicFunction::from_fn(modulus, |_| Complex64::new(1.0, 0.0));
        let t = ft_q(&one);
        assert!((t.values()[0] - Complex64::new((12f64).sqrt(), 0.0)).norm() < 1e-12);
        for v in &t.values()[1..] {
            assert!(v.norm() < 1e-10);
        }
    }

    #[test]
    fn double_transform_is_reflection() {
        let modulus = q(12);
        let f = PeriodicFunction::from_fn(modulus, |x| {
            Complex64::new((x as f64 * 0.37).sin(), (x as f64 * 1.7).cos())
        });
        let tt = ft_q(&ft_q(&f));
        for x in 0..12i64 {
            assert!((tt.at(x) - f.at(-x)).norm() < 1e-10);
        }
    }

    #[test]
    fn incomplete_sum_matches_direct_loop() {
        let modulus = q(37);
        let f = PeriodicFunction::from_fn(modulus, |x| e_q(3 * x as i64, 37));
        let c = make_cutoff(10.0, 60.0, CutoffShape::Bump).unwrap();
        let got = incomplete_sum(&f, &c, None).unwrap();
        let mut want = Complex64::new(0.0, 0.0);
        for m in -100..200i64 {
            want += c.eval(m as f64) * f.at(m);
        }
        assert!((got - want).norm() < 1e-12);

        // congruence-filtered variant
        let got = incomplete_sum(&f, &c, Some((2, 37))).unwrap();
        let mut want = Complex64::new(0.0, 0.0);
        for m in -100..200i64 {
            if m.rem_euclid(37) == 2 {
                want += c.eval(m as f64) * f.at(m);
            }
        }
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn completion_constant_has_zero_error() {
        let modulus = q(40);
        let f = PeriodicFunction::from_fn(modulus, |_| Complex64::new(2.5, -1.0));
        let c = make_cutoff(3.0, 25.0, CutoffShape::Bump).unwrap();
        let rep = completion_estimate(&f, &c).unwrap();
        assert!(rep.exact_error.norm() < 1e-12);
        assert!((rep.incomplete - rep.plancherel_rhs).norm() < 1e-9 * 40.0);
    }

    #[test]
    fn plancherel_identity_random_function() {
        let modulus = q(101);
        let f = PeriodicFunction::from_fn(modulus, |x| {
            Complex64::new((x as f64 * 0.11).sin(), (x as f64 * 0.53).cos())
        });
        let c = make_cutoff(-20.0, 55.0, CutoffShape::Bump).unwrap();
        let rep = completion_estimate(&f, &c).unwrap();
        assert!((rep.incomplete - rep.plancherel_rhs).norm() < 1e-9 * 101.0);
    }

    #[test]
    fn completion_error_for_concentrated_spectrum() {
        // f = e_q(x) has its transform concentrated at h = −1; the main
        // term vanishes and the error is exactly the incomplete sum
        // Ψ(−1/q) = Σ_m ψ(m) e(m/q)
        let qv = 64u64;
        let modulus = q(qv);
        let f = PeriodicFunction::from_fn(modulus, |x| e_q(x as i64, qv));
        let c = make_cutoff(5.0, 20.0, CutoffShape::Bump).unwrap();
        let rep = completion_estimate(&f, &c).unwrap();
        assert!(rep.main_term.norm() < 1e-12);
        let mut psi_hat = Complex64::new(0.0, 0.0);
        for m in c.integer_support() {
            let angle = std::f64::consts::TAU * m as f64 / qv as f64;
            psi_hat += c.eval(m as f64) * Complex64::new(angle.cos(), angle.sin());
        }
        assert!((rep.exact_error - psi_hat).norm() < 1e-10);
    }

    #[test]
    fn vdc_precondition_checks() {
        let modulus = q(15);
        let f = PeriodicFunction::from_fn(modulus, |x| e_q(x as i64, 15));
        let c = make_cutoff(0.0, 10.0, CutoffShape::Bump).unwrap();
        assert!(vdc_estimate(&f, &c, 4, 5, 1).is_err()); // 4·5 ≠ 15
        let c_big = make_cutoff(0.0, 100.0, CutoffShape::Bump).unwrap();
        assert!(vdc_estimate(&f, &c_big, 3, 5, 1).is_err()); // N > q
        assert!(vdc_estimate(&f, &c, 3, 5, 1).is_ok());
    }

    #[test]
    fn vdc_bound_formula_instantiation() {
        // s = q, r = 1 reduces the first branch to N^{1/2} q^{1/4}
        let modulus = q(77);
        let f = PeriodicFunction::from_fn(modulus, |x| e_q(x as i64 * 5, 77));
        let c = make_cutoff(0.0, 50.0, CutoffShape::Bump).unwrap();
        let rep = vdc_estimate(&f, &c, 1, 77, 1).unwrap();
        let want = (50.0f64).sqrt() * 1.0 + (50.0f64).sqrt() * (77f64).powf(0.25);
        assert!((rep.report.bound - want).abs() < 1e-12);
        assert!((rep.pv_reference - (77f64).sqrt()).abs() < 1e-12);
    }
}
