use num_complex::Complex64;

use super::preamble::PilotMap;
use super::OfdmParams;
use crate::error::{Error, Result};
use crate::signal::{idft, Sample, Spectrum};

/// Places `data` on the data subcarriers (ascending signed order) and the
/// pilot map on its tones; every other bin is null.
pub fn assemble_symbol(params: &OfdmParams, data: &[f64], pilots: &PilotMap) -> Result<Spectrum> {
    let tones = params.data_subcarriers();
    if data.len() != tones.len() {
        return Err(Error::LengthMismatch {
            expected: tones.len(),
            actual: data.len(),
        });
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); params.n_fft];
    for (&k, &v) in tones.iter().zip(data) {
        bins[params.bin(k)] = Complex64::new(v, 0.0);
    }
    for (&k, &v) in pilots {
        bins[params.bin(k)] = v;
    }
    Ok(Spectrum { bins })
}

/// IDFT of `spec` with the last `cp_len` samples prepended.
pub fn modulate(params: &OfdmParams, spec: &Spectrum) -> Result<Vec<Sample>> {
    let body = idft(spec)?.samples;
    let n = params.n_fft;
    let mut out = Vec::with_capacity(params.symbol_len());
    out.extend_from_slice(&body[n - params.cp_len..]);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Values on the data subcarriers of `spec`, ascending signed order.
pub fn data_values(params: &OfdmParams, spec: &Spectrum) -> Vec<Complex64> {
    params
        .data_subcarriers()
        .into_iter()
        .map(|k| spec.bins[params.bin(k)])
        .collect()
}
