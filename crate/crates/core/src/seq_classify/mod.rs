//! Regime classification of a pair of increasing integer sequences.
//!
//! Finite data cannot certify a limit, so every decision here is made on
//! three geometric probes `n/4, n/2, n` with exact integer arithmetic, and
//! anything that does not fit a pattern is reported as undetermined together
//! with the evidence.

mod expr;

pub use expr::{parse_seq, SeqExpr};

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::contfrac::convergents;
use crate::error::{Error, Result};
use crate::flseries::{LValue, MAX_DENOMINATOR};
use crate::rho_limit::RhoFunction;

/// Probe-to-probe growth that counts as divergence: `x_{i+1} >= GROWTH · x_i`.
const GROWTH_NUM: i128 = 3;
const GROWTH_DEN: i128 = 2;

/// Sequence pairs from the worked examples, with the label each must receive.
pub const BUNDLED_PAIRS: [(&str, &str, &str); 5] = [
    ("2*n", "3*n+1", "RationalFiniteK(p=3, q=2, k=1)"),
    ("n^2", "(n+1)^2", "Averaged(L=1, rational_k_infinite)"),
    ("n", "2*n", "RationalFiniteK(p=2, q=1, k=0)"),
    ("n", "n+1", "RationalFiniteK(p=1, q=1, k=1)"),
    ("n^2", "n*(n+1)", "Averaged(L=1, rational_k_infinite)"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragedReason {
    RationalKInfinite,
    Irrational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DegenerateLimit {
    Zero,
    Infinity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LimitKind {
    RationalFiniteK { p: u64, q: u64, k: Ratio<i128> },
    Averaged { l: LValue, reason: AveragedReason },
    Degenerate(DegenerateLimit),
    Undetermined { diagnostics: String },
}

impl LimitKind {
    pub fn name(&self) -> &'static str {
        match self {
            LimitKind::RationalFiniteK { .. } => "RationalFiniteK",
            LimitKind::Averaged { .. } => "Averaged",
            LimitKind::Degenerate(_) => "Degenerate",
            LimitKind::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn label(&self) -> String {
        match self {
            LimitKind::RationalFiniteK { p, q, k } => format!("RationalFiniteK(p={p}, q={q}, k={k})"),
            LimitKind::Averaged { l, reason } => {
                let reason = match reason {
                    AveragedReason::RationalKInfinite => "rational_k_infinite",
                    AveragedReason::Irrational => "irrational",
                };
                format!("Averaged(L={l}, {reason})")
            }
            LimitKind::Degenerate(DegenerateLimit::Zero) => "Degenerate(0)".into(),
            LimitKind::Degenerate(DegenerateLimit::Infinity) => "Degenerate(inf)".into(),
            LimitKind::Undetermined { .. } => "Undetermined".into(),
        }
    }
}

/// One probed index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvidenceRow {
    pub n: u64,
    pub a: i128,
    pub b: i128,
    /// `L_n = b_n / a_n`, for display only.
    pub ratio: f64,
    /// `a_n |δ_n| = |b_n q - a_n p| / q` against the recognized `p/q`, as (numerator, denominator).
    pub scaled_gap: Option<(i128, i128)>,
    pub gcd: i128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitClass {
    pub kind: LimitKind,
    pub evidence: Vec<EvidenceRow>,
}

fn mul(x: i128, y: i128) -> Result<i128> {
    x.checked_mul(y)
        .ok_or_else(|| Error::Overflow("evidence arithmetic".into()))
}

/// `b q - a p`.
fn residual(a: i128, b: i128, p: i128, q: i128) -> Result<i128> {
    mul(b, q)?
        .checked_sub(mul(a, p)?)
        .ok_or_else(|| Error::Overflow("evidence arithmetic".into()))
}

/// `y >= 1.5 x` for nonnegative `x, y`.
fn grows(x: i128, y: i128) -> Result<bool> {
    Ok(mul(GROWTH_DEN, y)? >= mul(GROWTH_NUM, x)?)
}

fn probe_values(e: &SeqExpr, n: u64, which: &str) -> Result<i128> {
    let n = n as i128;
    let prev = e.eval(n - 1)?;
    let cur = e.eval(n)?;
    if prev <= 0 || cur <= prev {
        return Err(Error::NotMonotone {
            which: which.to_string(),
            n: n as u64,
        });
    }
    Ok(cur)
}

pub fn classify(a: &SeqExpr, b: &SeqExpr, n_probe: u64) -> Result<LimitClass> {
    if n_probe < 64 {
        return Err(Error::InvalidArgument(format!("n_probe = {n_probe} must be >= 64")));
    }
    let probes = [n_probe / 4, n_probe / 2, n_probe];
    let mut av = [0i128; 3];
    let mut bv = [0i128; 3];
    for (i, &n) in probes.iter().enumerate() {
        av[i] = probe_values(a, n, "a")?;
        bv[i] = probe_values(b, n, "b")?;
    }
    for i in 0..2 {
        if av[i + 1] <= av[i] {
            return Err(Error::NotMonotone { which: "a".into(), n: probes[i + 1] });
        }
        if bv[i + 1] <= bv[i] {
            return Err(Error::NotMonotone { which: "b".into(), n: probes[i + 1] });
        }
    }

    let rows = |pq: Option<(i128, i128)>| -> Result<Vec<EvidenceRow>> {
        (0..3)
            .map(|i| {
                let scaled_gap = match pq {
                    Some((p, q)) => {
                        let r = Ratio::new(residual(av[i], bv[i], p, q)?.abs(), q);
                        Some((*r.numer(), *r.denom()))
                    }
                    None => None,
                };
                Ok(EvidenceRow {
                    n: probes[i],
                    a: av[i],
                    b: bv[i],
                    ratio: bv[i] as f64 / av[i] as f64,
                    scaled_gap,
                    gcd: av[i].gcd(&bv[i]),
                })
            })
            .collect()
    };

    // L_n = b/a running off to 0 or ∞.
    let mut up = true;
    let mut down = true;
    for i in 0..2 {
        let lhs = mul(bv[i + 1], av[i])?;
        let rhs = mul(bv[i], av[i + 1])?;
        up &= grows(rhs, lhs)?;
        down &= grows(lhs, rhs)?;
    }
    if up || down {
        let limit = if up { DegenerateLimit::Infinity } else { DegenerateLimit::Zero };
        return Ok(LimitClass {
            kind: LimitKind::Degenerate(limit),
            evidence: rows(None)?,
        });
    }

    for (p, q) in convergents(bv[2], av[2], MAX_DENOMINATOR as i128) {
        if p == 0 {
            continue;
        }
        let r: Vec<i128> = (0..3)
            .map(|i| residual(av[i], bv[i], p, q).map(i128::abs))
            .collect::<Result<_>>()?;
        if r[0] == r[1] && r[1] == r[2] {
            let kind = LimitKind::RationalFiniteK {
                p: p as u64,
                q: q as u64,
                k: Ratio::new(r[0], q),
            };
            return Ok(LimitClass {
                kind,
                evidence: rows(Some((p, q)))?,
            });
        }
        // a_n|δ_n| diverging while δ_n = r/(q a_n) still shrinks towards p/q.
        let mut diverging = r[0] > 0;
        for i in 0..2 {
            diverging &= grows(r[i], r[i + 1])?;
            diverging &= grows(mul(r[i + 1], av[i])?, mul(r[i], av[i + 1])?)?;
        }
        if diverging {
            let kind = LimitKind::Averaged {
                l: LValue::rational(p as u64, q as u64)?,
                reason: AveragedReason::RationalKInfinite,
            };
            return Ok(LimitClass {
                kind,
                evidence: rows(Some((p, q)))?,
            });
        }
    }

    // No small-denominator pattern: treat a visibly converging ratio as irrational.
    let ratios: Vec<f64> = (0..3).map(|i| bv[i] as f64 / av[i] as f64).collect();
    let (d0, d1) = ((ratios[1] - ratios[0]).abs(), (ratios[2] - ratios[1]).abs());
    let evidence = rows(None)?;
    if GROWTH_NUM as f64 * d1 <= GROWTH_DEN as f64 * d0 {
        return Ok(LimitClass {
            kind: LimitKind::Averaged {
                l: LValue::real(ratios[2])?,
                reason: AveragedReason::Irrational,
            },
            evidence,
        });
    }
    Ok(LimitClass {
        kind: LimitKind::Undetermined {
            diagnostics: format!(
                "no convergent with q <= {MAX_DENOMINATOR} gave a stable or divergent a_n|δ_n|; \
                 |ΔL_n| across probes = {d0:e}, {d1:e}"
            ),
        },
        evidence,
    })
}

/// Every probed row with `L_n != p/q` has `a_n|δ_n| = |b_n q - a_n p| / q >= 1/q`.
pub fn verify_integrality_bound(p: u64, q: u64, evidence: &[EvidenceRow]) -> bool {
    let (p, q) = (p as i128, q as i128);
    let floor = Ratio::new(1, q);
    evidence.iter().all(|row| match residual(row.a, row.b, p, q) {
        Ok(0) => true,
        Ok(r) => Ratio::new(r.abs(), q) >= floor,
        Err(_) => false,
    })
}

/// The covariance density for a classified pair.
pub fn rho_for(class: &LimitClass, tol: f64) -> Result<RhoFunction> {
    match &class.kind {
        LimitKind::RationalFiniteK { p, q, k } => {
            let k = *k.numer() as f64 / *k.denom() as f64;
            RhoFunction::rational(*p, *q, k, tol)
        }
        LimitKind::Averaged { l, .. } => RhoFunction::averaged(*l, tol),
        LimitKind::Degenerate(_) => RhoFunction::independent(tol),
        LimitKind::Undetermined { .. } => Err(Error::UndeterminedClass),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(a: &str, b: &str) -> LimitClass {
        classify(&parse_seq(a).unwrap(), &parse_seq(b).unwrap(), 64).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            run("2*n", "3*n+1").kind,
            LimitKind::RationalFiniteK { p: 3, q: 2, k: Ratio::from_integer(1) }
        );
        assert_eq!(
            run("n^2", "(n+1)^2").kind,
            LimitKind::Averaged {
                l: LValue::rational(1, 1).unwrap(),
                reason: AveragedReason::RationalKInfinite
            }
        );
        assert_eq!(
            run("n", "2*n").kind,
            LimitKind::RationalFiniteK { p: 2, q: 1, k: Ratio::from_integer(0) }
        );
    }

    #[test]
    fn bundled_labels() {
        for (a, b, label) in BUNDLED_PAIRS {
            assert_eq!(run(a, b).kind.label(), label, "{a}, {b}");
        }
    }

    #[test]
    fn degenerate_ratios() {
        assert_eq!(run("n", "n^2").kind, LimitKind::Degenerate(DegenerateLimit::Infinity));
        assert_eq!(run("n", "n^2+n").kind, LimitKind::Degenerate(DegenerateLimit::Infinity));
        assert_eq!(run("n^3", "n+5").kind, LimitKind::Degenerate(DegenerateLimit::Zero));
    }

    #[test]
    fn large_denominator_reads_as_irrational() {
        let c = run("1000003*n", "1000033*n");
        assert!(matches!(
            c.kind,
            LimitKind::Averaged { reason: AveragedReason::Irrational, .. }
        ));
    }

    #[test]
    fn not_monotone() {
        let err = classify(&parse_seq("5").unwrap(), &parse_seq("n").unwrap(), 64);
        assert!(matches!(err, Err(Error::NotMonotone { .. })));
        let err = classify(&parse_seq("n").unwrap(), &parse_seq("n-100").unwrap(), 64);
        assert!(matches!(err, Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn small_probe_rejected() {
        let n = parse_seq("n").unwrap();
        assert!(matches!(classify(&n, &n, 63), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn overflow_surfaces() {
        let err = classify(&parse_seq("n^30").unwrap(), &parse_seq("n^31").unwrap(), 1 << 20);
        assert!(matches!(err, Err(Error::Overflow(_))));
    }

    #[test]
    fn integrality_bound_examples() {
        let c = run("2*n", "3*n+1");
        assert!(verify_integrality_bound(3, 2, &c.evidence));
        for row in &c.evidence {
            assert_eq!(row.scaled_gap, Some((1, 1)));
        }
        let c = run("n", "2*n");
        assert!(verify_integrality_bound(2, 1, &c.evidence));
        let d = classify(&parse_seq("n^2").unwrap(), &parse_seq("n^2+1").unwrap(), 64).unwrap();
        assert!(verify_integrality_bound(1, 1, &d.evidence));
        assert!(d.evidence.iter().all(|r| r.scaled_gap == Some((1, 1))));
    }

    #[test]
    fn rho_dispatch() {
        let undetermined = LimitClass {
            kind: LimitKind::Undetermined { diagnostics: String::new() },
            evidence: vec![],
        };
        assert!(matches!(rho_for(&undetermined, 1e-8), Err(Error::UndeterminedClass)));
        let rho = rho_for(&run("n", "n^2"), 1e-8).unwrap();
        assert_eq!(rho.eval(0.3), 0.0);
    }
}
