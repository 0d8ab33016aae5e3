//! Quick built-in checks: the circular convolution theorem, per-subcarrier
//! alignment of two offset uplinks, and noiseless end-to-end exchanges.

use num_complex::Complex64;

use crate::channel::{superpose_uplink, CfoSpec, ChannelTaps, LinkScenario, UplinkScenario};
use crate::error::Result;
use crate::phy::{build_frame, BitVector, NodeRole, OfdmParams};
use crate::rng::SimRng;
use crate::signal::{circular_convolve, dft};

use super::trial::{run_fpnc_trial, Exchange, TrialContext};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

const TOL: f64 = 1e-6;

/// Runs every check with `trials` random cases each.
pub fn selftest(params: &OfdmParams, trials: usize, seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        convolution_theorem(params, trials, seed)?,
        alignment(params, trials, seed)?,
        noiseless_exchange(params, trials, seed)?,
    ])
}

/// Gaussian taps, `lo..=hi` of them.
fn random_taps(rng: &mut SimRng, lo: usize, hi: usize) -> Vec<Complex64> {
    let len = rng.int_in(lo, hi);
    (0..len).map(|_| rng.complex_gaussian(1.0)).collect()
}

fn convolution_theorem(params: &OfdmParams, trials: usize, seed: u64) -> Result<Check> {
    let n = params.n_fft;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = SimRng::stream(seed, &[0, t as u64]);
        let x = random_taps(&mut rng, n, n);
        let mut h = random_taps(&mut rng, 1, n);
        h.resize(n, Complex64::new(0.0, 0.0));
        let y = dft(&circular_convolve(&x, &h)?.samples, n)?;
        let (fx, fh) = (dft(&x, n)?, dft(&h, n)?);
        for k in 0..n {
            worst = worst.max((y[k] - fx[k] * fh[k]).norm() / (1.0 + y[k].norm()));
        }
    }
    Ok(Check {
        name: "circular convolution theorem".into(),
        passed: worst <= TOL,
        detail: format!("{trials} cases, worst relative error {worst:.2e}"),
    })
}

/// Received data-symbol spectra against `H_A⊙X_A + H_B⊙X_B` with the delay
/// spread at most the CP.
fn alignment(params: &OfdmParams, trials: usize, seed: u64) -> Result<Check> {
    let n = params.n_fft;
    let c = params.cp_len;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = SimRng::stream(seed, &[1, t as u64]);
        let offset = rng.int_in(0, c - 1);
        let ta = ChannelTaps::new(random_taps(&mut rng, 1, c), 0)?;
        let tb = ChannelTaps::new(random_taps(&mut rng, 1, c - offset), 0)?;
        let (fa, layout) = build_frame(NodeRole::A, &BitVector::source(rng.bits(200)), params)?;
        let (fb, _) = build_frame(NodeRole::B, &BitVector::source(rng.bits(200)), params)?;
        let scenario = UplinkScenario::clean(ta.clone(), tb.clone(), offset);
        let y = superpose_uplink(&fa, &fb, &scenario, &mut rng)?;
        let ha = ta.freq_response(n)?;
        let hb = scenario.effective_taps_b().freq_response(n)?;
        for span in &layout.data_symbol_spans {
            let w = span.payload.clone();
            let yk = dft(&y.samples[w.clone()], n)?;
            let xa = dft(&fa.samples[w.clone()], n)?;
            let xb = dft(&fb.samples[w], n)?;
            let expect: Vec<Complex64> = (0..n).map(|k| ha[k] * xa[k] + hb[k] * xb[k]).collect();
            let scale = expect.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for k in 0..n {
                worst = worst.max((yk[k] - expect[k]).norm() / scale);
            }
        }
    }
    Ok(Check {
        name: "frequency-domain alignment within CP".into(),
        passed: worst <= TOL,
        detail: format!("{trials} scenarios, worst relative residual {worst:.2e}"),
    })
}

fn two_tap(rng: &mut SimRng, gap: usize) -> Result<ChannelTaps> {
    let mut taps = vec![Complex64::from_polar(1.0, rng.phase())];
    taps.resize(gap, Complex64::new(0.0, 0.0));
    taps.push(Complex64::from_polar(0.5 * rng.uniform(), rng.phase()));
    ChannelTaps::new(taps, 0)
}

fn noiseless_exchange(params: &OfdmParams, trials: usize, seed: u64) -> Result<Check> {
    let c = params.cp_len;
    let ctx = TrialContext {
        params: params.clone(),
        ..TrialContext::default()
    };
    let offsets = [0, c / 4, c / 2, c - 1, c];
    let mut failures = 0;
    for (i, &offset) in offsets.iter().enumerate() {
        for t in 0..trials {
            let mut rng = SimRng::stream(seed, &[2, i as u64, t as u64]);
            let pa = BitVector::source(rng.bits(500));
            let pb = BitVector::source(rng.bits(500));
            let gap_a = rng.int_in(1, c);
            let gap_b = rng.int_in(1, (c - offset).max(1));
            let uplink = UplinkScenario::clean(two_tap(&mut rng, gap_a)?, two_tap(&mut rng, gap_b)?, offset);
            let mut downlink = || -> Result<LinkScenario> {
                let gap = rng.int_in(1, c);
                Ok(LinkScenario {
                    taps: two_tap(&mut rng, gap)?,
                    cfo: CfoSpec::default(),
                    noise_variance: 0.0,
                })
            };
            let exchange = Exchange {
                uplink,
                downlink_a: downlink()?,
                downlink_b: downlink()?,
            };
            let (rec, _) = run_fpnc_trial(&ctx, &exchange, &pa, &pb, &mut rng, f64::INFINITY)?;
            if !rec.exchange_ok || rec.uplink_frame_error {
                failures += 1;
            }
        }
    }
    Ok(Check {
        name: "noiseless two-tap exchange".into(),
        passed: failures == 0,
        detail: format!("offsets {offsets:?}, {trials} trials each, {failures} failed exchanges"),
    })
}
