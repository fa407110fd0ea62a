//! Iterative radix-2 complex FFT.

use core::f64::consts::TAU;

/// In-place forward DFT `X_k = Σ_n x_n e^{-2πikn/N}` of a power-of-two
/// length sequence given as separate real and imaginary parts.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    assert_eq!(n, im.len(), "real and imaginary parts differ in length");
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n < 2 {
        return;
    }
    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = -TAU / len as f64;
        // twiddles computed directly per index to avoid drift on long transforms
        for k in 0..half {
            let (ws, wc) = (libm::sin(step * k as f64), libm::cos(step * k as f64));
            let mut start = 0;
            while start < n {
                let a = start + k;
                let b = a + half;
                let tr = re[b] * wc - im[b] * ws;
                let ti = re[b] * ws + im[b] * wc;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                start += len;
            }
        }
        len *= 2;
    }
}
