//! Exact kink-number statistics from the mode probabilities.
//!
//! Every momentum mode contributes an independent Bernoulli variable, so the
//! kink number follows a Poisson binomial distribution. Its characteristic
//! function factorizes over the full momentum set `{±k}`,
//!
//! ```text
//! P̃(θ) = Π_k [1 + (e^{iθ} - 1) p_k],
//! ```
//!
//! a trigonometric polynomial of degree `N`, so sampling it at the `N+1`
//! angles `θ_j = 2πj/(N+1)` and applying the inverse discrete transform
//! recovers `P(n)` exactly (up to float rounding). A dynamic-programming
//! convolution over the Bernoulli factors serves as an independent oracle for
//! the same distribution.
//!
//! Cumulants of any order come from the Poisson-binomial recursion
//! `f_1(p) = p`, `f_{q+1}(p) = p(1-p) f_q'(p)`, with
//! `κ_q = Σ_k f_q(p_k)` over the full grid.

use num_complex::Complex64;

use crate::dynamics::{Method, ModeProbabilities};
use crate::error::Error;
use crate::sum::CompensatedSum;
use crate::Result;

/// How the `±k` pair of each stored positive momentum enters the statistics.
///
/// `Independent` treats the two members of a pair as independent Bernoulli
/// variables with the same probability, which is the convention behind the
/// factorized characteristic function. `Paired` excites both members
/// together, putting all weight on even kink numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Pairing {
    #[default]
    Independent,
    Paired,
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pairing::Independent => write!(f, "independent"),
            Pairing::Paired => write!(f, "paired"),
        }
    }
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Pairing::Independent),
            "paired" => Ok(Pairing::Paired),
            other => Err(Error::InvalidParameter(format!(
                "unknown pairing {other:?}, expected \"independent\" or \"paired\""
            ))),
        }
    }
}

/// Provenance of a distribution or cumulant report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceMeta {
    pub n_spins: usize,
    pub tau_q: f64,
    pub method: Method,
}

impl SourceMeta {
    fn of(probs: &ModeProbabilities) -> Self {
        Self {
            n_spins: probs.params().spins(),
            tau_q: probs.tau_q(),
            method: probs.method(),
        }
    }
}

/// Probability mass function `P(n)` of the kink number, `n = 0 … N`.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkDistribution {
    p: Vec<f64>,
    pairing: Pairing,
    meta: SourceMeta,
}

impl KinkDistribution {
    /// `P(n)` for `n = 0 … N`; entries are non-negative and sum to one.
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn meta(&self) -> &SourceMeta {
        &self.meta
    }

    /// Mean kink number `Σ n P(n)`.
    pub fn mean(&self) -> f64 {
        CompensatedSum::sum_iter(self.p.iter().enumerate().map(|(n, &p)| n as f64 * p))
    }
}

/// Which route produced a cumulant report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CumulantPath {
    /// Poisson-binomial polynomial recursion summed over modes.
    Recursion,
    /// Moment-cumulant recursion on a distribution.
    Moments,
}

/// Cumulants `κ_1 … κ_qmax` with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantReport {
    kappa: Vec<f64>,
    path: CumulantPath,
}

impl CumulantReport {
    /// All cumulants; index 0 holds `κ_1`.
    pub fn kappas(&self) -> &[f64] {
        &self.kappa
    }

    /// `κ_q`, 1-based.
    pub fn kappa(&self, q: usize) -> f64 {
        assert!(
            q >= 1 && q <= self.kappa.len(),
            "cumulant order {q} out of range"
        );
        self.kappa[q - 1]
    }

    pub fn qmax(&self) -> usize {
        self.kappa.len()
    }

    pub fn path(&self) -> CumulantPath {
        self.path
    }
}

/// Characteristic function of a plain Bernoulli collection.
pub fn bernoulli_char_fn(ps: &[f64], theta: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, theta) - 1.0;
    let mut prod = Complex64::new(1.0, 0.0);
    for &p in ps {
        prod *= 1.0 + phase * p;
    }
    prod
}

/// Characteristic function `P̃(θ)` of the kink number.
///
/// With only positive momenta stored this is
/// `Π_{k>0} [1 + (e^{iθ}-1) p_k]²` for independent pairing and
/// `Π_{k>0} [1 + (e^{2iθ}-1) p_k]` for paired pairing. `θ = 0` gives exactly
/// one.
pub fn characteristic_function(
    theta: f64,
    probs: &ModeProbabilities,
    pairing: Pairing,
) -> Complex64 {
    let phase = match pairing {
        Pairing::Independent => Complex64::from_polar(1.0, theta) - 1.0,
        Pairing::Paired => Complex64::from_polar(1.0, 2.0 * theta) - 1.0,
    };
    let mut prod = Complex64::new(1.0, 0.0);
    for &p in probs.probabilities() {
        let factor = 1.0 + phase * p;
        match pairing {
            Pairing::Independent => prod *= factor * factor,
            Pairing::Paired => prod *= factor,
        }
    }
    prod
}

/// Invert a degree-`support` trigonometric polynomial sampled at the
/// `support+1` roots of unity, then clean up float residue.
fn invert_characteristic<F>(support: usize, cf: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Complex64,
{
    let m = support + 1;
    let two_pi = 2.0 * std::f64::consts::PI;
    let samples: Vec<Complex64> = (0..m).map(|j| cf(two_pi * j as f64 / m as f64)).collect();
    // Exact root-of-unity table: e^{-iθ_j n} = table[(j·n) mod m].
    let table: Vec<Complex64> = (0..m)
        .map(|r| Complex64::from_polar(1.0, -two_pi * r as f64 / m as f64))
        .collect();

    let mut probs = Vec::with_capacity(m);
    let mut max_imag = 0.0_f64;
    for n in 0..m {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (j, s) in samples.iter().enumerate() {
            let w = s * table[(j * n) % m];
            re.add(w.re);
            im.add(w.im);
        }
        let value = re.value() / m as f64;
        let residue = im.value() / m as f64;
        max_imag = max_imag.max(residue.abs());
        probs.push(value);
    }
    if max_imag > 1e-10 {
        return Err(Error::NumericalFault(format!(
            "imaginary residue {max_imag:.3e} above 1e-10 in distribution inversion"
        )));
    }
    cleanup_distribution(&mut probs)?;
    Ok(probs)
}

/// Zero tiny negatives, check normalization, renormalize.
fn cleanup_distribution(probs: &mut [f64]) -> Result<()> {
    for p in probs.iter_mut() {
        if *p < 0.0 {
            if *p > -1e-12 {
                *p = 0.0;
            } else {
                return Err(Error::NumericalFault(format!(
                    "negative probability {p:.3e} below the -1e-12 cleanup window"
                )));
            }
        }
    }
    let total = CompensatedSum::sum_iter(probs.iter().copied());
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalFault(format!(
            "distribution normalization residue {:.3e} above 1e-10",
            total - 1.0
        )));
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(())
}

/// Exact Poisson binomial pmf of an explicit Bernoulli collection via DFT
/// inversion; support `0 … ps.len()`.
pub fn bernoulli_distribution_dft(ps: &[f64]) -> Result<Vec<f64>> {
    invert_characteristic(ps.len(), |theta| bernoulli_char_fn(ps, theta))
}

/// Same distribution by folding one Bernoulli factor at a time:
/// `P(n) ← P(n)(1-p) + P(n-1)p`. Exact up to float rounding; the order of
/// the factors does not matter.
pub fn bernoulli_distribution_convolution(ps: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; ps.len() + 1];
    dist[0] = 1.0;
    for (count, &p) in ps.iter().enumerate() {
        for n in (0..=count + 1).rev() {
            let stay = dist[n] * (1.0 - p);
            let hop = if n > 0 { dist[n - 1] * p } else { 0.0 };
            dist[n] = stay + hop;
        }
    }
    dist
}

/// Exact kink distribution by inverse DFT of the characteristic function at
/// the `N+1` angles `θ_j = 2πj/(N+1)`.
pub fn kink_distribution(probs: &ModeProbabilities, pairing: Pairing) -> Result<KinkDistribution> {
    let n = probs.params().spins();
    let p = invert_characteristic(n, |theta| characteristic_function(theta, probs, pairing))?;
    Ok(KinkDistribution {
        p,
        pairing,
        meta: SourceMeta::of(probs),
    })
}

/// Independent oracle for [`kink_distribution`]: dynamic-programming
/// convolution over the Bernoulli factors of the full `±k` grid.
pub fn kink_distribution_convolution(
    probs: &ModeProbabilities,
    pairing: Pairing,
) -> KinkDistribution {
    let n = probs.params().spins();
    let mut dist = vec![0.0; n + 1];
    dist[0] = 1.0;
    let mut filled = 0usize;
    let step = match pairing {
        Pairing::Independent => 1usize,
        Pairing::Paired => 2usize,
    };
    let mut fold = |p: f64, filled: usize| {
        for n in (0..=filled + step).rev() {
            let stay = dist[n] * (1.0 - p);
            let hop = if n >= step { dist[n - step] * p } else { 0.0 };
            dist[n] = stay + hop;
        }
    };
    for &p in probs.probabilities() {
        match pairing {
            Pairing::Independent => {
                // Both members of the ±k pair carry the same probability.
                fold(p, filled);
                filled += 1;
                fold(p, filled);
                filled += 1;
            }
            Pairing::Paired => {
                fold(p, filled);
                filled += 2;
            }
        }
    }
    KinkDistribution {
        p: dist,
        pairing,
        meta: SourceMeta::of(probs),
    }
}

/// Integer-coefficient polynomials `f_q` of the cumulant recursion
/// `f_1(p) = p`, `f_{q+1}(p) = p(1-p) f_q'(p)`.
///
/// Returns one coefficient vector per order, indexed by power of `p`
/// (index 0 is always zero). Orders above 20 are rejected; the coefficients
/// grow roughly factorially.
pub fn cumulant_polynomials(qmax: usize) -> Result<Vec<Vec<i128>>> {
    if !(1..=20).contains(&qmax) {
        return Err(Error::Unsupported(format!(
            "cumulant polynomial order must lie in 1..=20, got {qmax}"
        )));
    }
    let mut polys: Vec<Vec<i128>> = Vec::with_capacity(qmax);
    polys.push(vec![0, 1]); // f_1 = p
    for q in 1..qmax {
        let prev = &polys[q - 1];
        // f_{q+1} = p(1-p) f_q' => c_m = m·c_m - (m-1)·c_{m-1}
        let mut next = vec![0i128; q + 2];
        for (m, c) in next.iter_mut().enumerate().skip(1) {
            let keep = if m < prev.len() {
                m as i128 * prev[m]
            } else {
                0
            };
            let shift = (m as i128 - 1) * prev[m - 1];
            *c = keep - shift;
        }
        polys.push(next);
    }
    Ok(polys)
}

/// Horner evaluation of an integer-coefficient polynomial.
fn eval_poly(coeffs: &[i128], p: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * p + c as f64;
    }
    acc
}

/// Exact cumulants `κ_q = 2 Σ_{k>0} f_q(p_k)` from the polynomial
/// recursion, using compensated summation over the grid.
///
/// The recursion assumes independent Bernoulli variables, so paired pairing
/// is rejected; use the distribution moments instead.
pub fn cumulants_exact(
    probs: &ModeProbabilities,
    pairing: Pairing,
    qmax: usize,
) -> Result<CumulantReport> {
    if pairing == Pairing::Paired {
        return Err(Error::Unsupported(
            "the cumulant recursion assumes independent Bernoulli modes; \
             compute moments of the paired distribution instead"
                .into(),
        ));
    }
    let polys = cumulant_polynomials(qmax)?;
    let kappa = polys
        .iter()
        .map(|poly| {
            let mut acc = CompensatedSum::new();
            for &p in probs.probabilities() {
                acc.add(eval_poly(poly, p));
            }
            2.0 * acc.value()
        })
        .collect();
    Ok(CumulantReport {
        kappa,
        path: CumulantPath::Recursion,
    })
}

/// Raw moments `μ'_q = Σ_n n^q P(n)` for `q = 1 … qmax` (at most 10; float
/// cancellation makes higher orders meaningless on this path).
pub fn moments_from_distribution(dist: &KinkDistribution, qmax: usize) -> Result<Vec<f64>> {
    if !(1..=10).contains(&qmax) {
        return Err(Error::Unsupported(format!(
            "moment order must lie in 1..=10, got {qmax}"
        )));
    }
    let mut moments = Vec::with_capacity(qmax);
    for q in 1..=qmax {
        let mut acc = CompensatedSum::new();
        for (n, &p) in dist.probabilities().iter().enumerate() {
            acc.add((n as f64).powi(q as i32) * p);
        }
        moments.push(acc.value());
    }
    Ok(moments)
}

/// Cumulants from raw moments via
/// `κ_q = μ'_q - Σ_{m=1}^{q-1} C(q-1, m-1) κ_m μ'_{q-m}`.
pub fn cumulants_from_moments(moments: &[f64]) -> CumulantReport {
    let qmax = moments.len();
    let mut kappa: Vec<f64> = Vec::with_capacity(qmax);
    for q in 1..=qmax {
        let mut value = moments[q - 1];
        for m in 1..q {
            value -= binomial(q - 1, m - 1) * kappa[m - 1] * moments[q - m - 1];
        }
        kappa.push(value);
    }
    CumulantReport {
        kappa,
        path: CumulantPath::Moments,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut value = 1.0;
    for i in 0..k {
        value = value * (n - i) as f64 / (i + 1) as f64;
    }
    value
}

/// Moment-route cumulants of an explicit pmf, with the raw moments and the
/// recursion carried in double-double arithmetic.
///
/// The granular pair [`moments_from_distribution`] + [`cumulants_from_moments`]
/// is limited by the float representation of the moments themselves (`μ'_q`
/// reaches `N^q`, so even one ulp there dwarfs a small `κ_q`); this combined
/// path keeps the cancellation error at the scale of the cumulants instead.
pub fn cumulants_from_pmf(pmf: &[f64], qmax: usize) -> Result<CumulantReport> {
    use crate::sum::DoubleDouble;

    if !(1..=10).contains(&qmax) {
        return Err(Error::Unsupported(format!(
            "moment order must lie in 1..=10, got {qmax}"
        )));
    }
    // μ'_q = Σ n^q P(n), exactly accumulated.
    let mut moments = vec![DoubleDouble::ZERO; qmax + 1];
    for (n, &p) in pmf.iter().enumerate() {
        let mut power = DoubleDouble::from_f64(1.0);
        let nf = DoubleDouble::from_f64(n as f64);
        for m in moments.iter_mut().skip(1) {
            power = power.mul(nf);
            *m = m.add(power.mul_f64(p));
        }
    }
    // κ_q = μ'_q - Σ C(q-1, m-1) κ_m μ'_{q-m}
    let mut kappa_dd: Vec<DoubleDouble> = Vec::with_capacity(qmax);
    for q in 1..=qmax {
        let mut value = moments[q];
        for m in 1..q {
            let term = kappa_dd[m - 1]
                .mul(moments[q - m])
                .mul_f64(binomial(q - 1, m - 1));
            value = value.sub(term);
        }
        kappa_dd.push(value);
    }
    Ok(CumulantReport {
        kappa: kappa_dd.into_iter().map(DoubleDouble::value).collect(),
        path: CumulantPath::Moments,
    })
}

/// [`cumulants_from_pmf`] applied to a kink distribution.
pub fn cumulants_from_distribution(dist: &KinkDistribution, qmax: usize) -> Result<CumulantReport> {
    cumulants_from_pmf(dist.probabilities(), qmax)
}

/// Le Cam bound and the actual total-variation distance to the Poisson
/// distribution of equal mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeCamDiagnostic {
    /// `2 Σ_k p_k²` over the full `±k` grid.
    pub bound: f64,
    /// `Σ_n |P(n) - e^{-κ_1} κ_1^n / n!|` over the support of the exact
    /// distribution.
    pub tv_to_poisson: f64,
}

/// Compare the kink distribution against a Poisson of the same mean.
///
/// In the scaling regime the bound saturates at `√2 κ_1`, of the order of
/// the mean itself, which is why the kink statistics never becomes
/// Poissonian.
pub fn le_cam_diagnostic(probs: &ModeProbabilities) -> Result<LeCamDiagnostic> {
    let mut sq = CompensatedSum::new();
    let mut mean = CompensatedSum::new();
    for &p in probs.probabilities() {
        sq.add(p * p);
        mean.add(p);
    }
    let bound = 4.0 * sq.value(); // 2 Σ over ±k = 4 Σ over k>0
    let lambda = 2.0 * mean.value();

    let dist = kink_distribution(probs, Pairing::Independent)?;
    let mut tv = CompensatedSum::new();
    for (n, &p) in dist.probabilities().iter().enumerate() {
        tv.add((p - poisson_pmf(lambda, n)).abs());
    }
    Ok(LeCamDiagnostic {
        bound,
        tv_to_poisson: tv.value(),
    })
}

fn poisson_pmf(lambda: f64, n: usize) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * lambda.ln() - lambda - libm::lgamma(n as f64 + 1.0)).exp()
}
