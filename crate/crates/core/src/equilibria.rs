//! Spectra along the equilibrium line `(0, 0, z0)` and the classification
//! of neighbourhoods that admit formal or analytic first integrals.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::SystemParams;

pub const MAX_KMAX: u32 = 64;
const RESONANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "analytic_FI")]
    AnalyticFirstIntegral,
    #[serde(rename = "formal_FI")]
    FormalFirstIntegral,
    #[serde(rename = "zero_hopf")]
    ZeroHopf,
    #[serde(rename = "origin_excluded")]
    OriginExcluded,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::AnalyticFirstIntegral => "analytic_FI",
            Classification::FormalFirstIntegral => "formal_FI",
            Classification::ZeroHopf => "zero_hopf",
            Classification::OriginExcluded => "origin_excluded",
            Classification::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub z0: f64,
    pub eigenvalues: [Complex64; 3],
    pub classification: Classification,
    /// Set when the classification rests on a claim that only holds for
    /// generic `z0` (the case `a < 0`).
    pub claimed_only: bool,
}

/// Roots of `l^3 - z0 l^2 + a l`: zero and the pair from `l^2 - z0 l + a`.
pub fn eigenvalues_at(z0: f64, p: &SystemParams) -> [Complex64; 3] {
    let disc = z0 * z0 - 4.0 * p.a;
    let zero = Complex64::new(0.0, 0.0);
    if disc >= 0.0 {
        // avoid cancellation: take the larger root directly, the other by Vieta
        let s = disc.sqrt();
        let big = 0.5 * (z0 + if z0 >= 0.0 { s } else { -s });
        let small = if big == 0.0 { 0.0 } else { p.a / big };
        let (l2, l3) = if big >= small { (big, small) } else { (small, big) };
        [zero, Complex64::new(l2, 0.0), Complex64::new(l3, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [zero, Complex64::new(0.5 * z0, im), Complex64::new(0.5 * z0, -im)]
    }
}

pub fn classify(z0: f64, p: &SystemParams) -> Classification {
    let a = p.a;
    let disc = z0 * z0 - 4.0 * a;
    if z0 == 0.0 {
        return if a > 0.0 && p.b == 0.0 {
            Classification::ZeroHopf
        } else {
            Classification::OriginExcluded
        };
    }
    if a > 0.0 && disc < 0.0 {
        Classification::AnalyticFirstIntegral
    } else if (a > 0.0 && disc > 0.0) || a < 0.0 {
        Classification::FormalFirstIntegral
    } else {
        Classification::Undetermined
    }
}

pub fn classify_first_integral(z0: f64, p: &SystemParams) -> EquilibriumReport {
    let classification = classify(z0, p);
    EquilibriumReport {
        z0,
        eigenvalues: eigenvalues_at(z0, p),
        classification,
        claimed_only: p.a < 0.0 && classification == Classification::FormalFirstIntegral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resonance {
    pub nonresonant: bool,
    pub offending: Option<(u32, u32)>,
}

/// Checks `k2 l2 + k3 l3 != 0` for `0 <= k2, k3 <= kmax`, `k2 + k3 >= 1`.
/// Values within `1e-10` of zero count as resonant. `kmax` is capped at 64.
pub fn nonresonance_check(z0: f64, p: &SystemParams, kmax: u32) -> Resonance {
    let kmax = kmax.min(MAX_KMAX);
    let [_, l2, l3] = eigenvalues_at(z0, p);
    for total in 1..=2 * kmax {
        for k2 in total.saturating_sub(kmax)..=total.min(kmax) {
            let k3 = total - k2;
            if (l2 * k2 as f64 + l3 * k3 as f64).norm() <= RESONANCE_TOL {
                return Resonance { nonresonant: false, offending: Some((k2, k3)) };
            }
        }
    }
    Resonance { nonresonant: true, offending: None }
}

/// Writes the table `z0, Re l2, Im l2, Re l3, Im l3, classification`.
pub fn write_table<W: Write>(reports: &[EquilibriumReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z0", "re_l2", "im_l2", "re_l3", "im_l3", "classification"])?;
    for r in reports {
        let [_, l2, l3] = r.eigenvalues;
        w.write_record([
            r.z0.to_string(),
            l2.re.to_string(),
            l2.im.to_string(),
            l3.re.to_string(),
            l3.im.to_string(),
            r.classification.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> SystemParams {
        SystemParams::new(a, b, 9.0)
    }

    #[test]
    fn zero_hopf_spectrum() {
        let ev = eigenvalues_at(0.0, &params(2.5, 0.0));
        let w = 2.5f64.sqrt();
        assert_eq!(ev[0], Complex64::new(0.0, 0.0));
        assert!((ev[1] - Complex64::new(0.0, w)).norm() < 1e-12);
        assert!((ev[2] - Complex64::new(0.0, -w)).norm() < 1e-12);
    }

    #[test]
    fn real_spectrum() {
        let ev = eigenvalues_at(5.0, &params(4.0, 0.0));
        assert_eq!(ev[1], Complex64::new(4.0, 0.0));
        assert_eq!(ev[2], Complex64::new(1.0, 0.0));
        let ev = eigenvalues_at(-3.0, &params(0.0, 0.0));
        assert_eq!(ev[1], Complex64::new(0.0, 0.0));
        assert_eq!(ev[2], Complex64::new(-3.0, 0.0));
    }

    #[test]
    fn classification_examples() {
        let p = params(2.5, 0.0);
        assert_eq!(classify(1.0, &p), Classification::AnalyticFirstIntegral);
        assert_eq!(classify(4.0, &p), Classification::FormalFirstIntegral);
        assert_eq!(classify(0.0, &p), Classification::ZeroHopf);
        assert_eq!(classify(0.0, &params(2.5, 1.0)), Classification::OriginExcluded);
        assert_eq!(classify(0.0, &params(-1.0, 0.0)), Classification::OriginExcluded);
        assert_eq!(classify(4.0, &params(4.0, 0.0)), Classification::Undetermined);
        assert_eq!(classify(1.0, &params(0.0, 0.0)), Classification::Undetermined);
        let r = classify_first_integral(1.0, &params(-2.0, 0.0));
        assert_eq!(r.classification, Classification::FormalFirstIntegral);
        assert!(r.claimed_only);
        assert!(!classify_first_integral(4.0, &p).claimed_only);
    }

    #[test]
    fn resonance_examples() {
        assert_eq!(
            nonresonance_check(5.0, &params(4.0, 0.0), 64),
            Resonance { nonresonant: true, offending: None }
        );
        assert_eq!(nonresonance_check(0.0, &params(-4.0, 0.0), 64).offending, Some((1, 1)));
        assert_eq!(nonresonance_check(0.0, &params(2.5, 0.0), 64).offending, Some((1, 1)));
        // a = 0 gives a zero eigenvalue, resonant at the first order
        assert!(!nonresonance_check(1.0, &params(0.0, 0.0), 3).nonresonant);
    }

    #[test]
    fn table_layout() {
        let p = params(4.0, 0.0);
        let rows: Vec<_> = [5.0, 0.0].iter().map(|&z| classify_first_integral(z, &p)).collect();
        let mut buf = Vec::new();
        write_table(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "z0,re_l2,im_l2,re_l3,im_l3,classification");
        assert_eq!(lines[1], "5,4,0,1,0,formal_FI");
        assert_eq!(lines[2], "0,0,2,0,-2,zero_hopf");
    }
}
