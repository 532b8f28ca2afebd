"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: explicit loops, closed-form
formulas, no reuse of the package's own code paths. These are the second
route that the fast implementations are checked against.
"""

import cmath
import math

import numpy as np


def naive_dft_magnitude_loops(signal, fft_size=None):
    """O(n^2) DFT magnitudes by the barest possible double loop."""
    x = list(signal)
    n = fft_size or len(x)
    if len(x) < n:
        x = x + [0.0] * (n - len(x))
    x = x[:n]
    out = []
    for k in range(n // 2 + 1):
        acc = 0.0 + 0.0j
        for t, sample in enumerate(x):
            acc += sample * cmath.exp(-2j * math.pi * k * t / n)
        out.append(abs(acc))
    return np.array(out)


def naive_dft_magnitude(signal, fft_size=None):
    """O(n^2) DFT magnitudes for bins 0..N/2, explicit loop over bins.

    Each bin is a full-length inner product against its complex
    exponential built straight from the definition; there is no FFT
    factorization anywhere.
    """
    x = np.asarray(signal, dtype=np.float64)
    n = fft_size or len(x)
    if len(x) < n:
        x = np.concatenate([x, np.zeros(n - len(x))])
    x = x[:n]
    t = np.arange(n)
    out = np.empty(n // 2 + 1)
    for k in range(n // 2 + 1):
        out[k] = np.abs(np.exp(-2j * np.pi * k * t / n) @ x)
    return out


def dft_peak_hz(signal, sample_rate):
    """Frequency of the largest DFT magnitude bin (one-sided).

    Scans every bin with an O(n^2) recurrence (bin k's exponential is bin
    k-1's times a fixed twiddle vector); accurate enough for argmax even
    on long signals.
    """
    x = np.asarray(signal, dtype=np.float64)
    n = len(x)
    t = np.arange(n)
    twiddle = np.exp(-2j * np.pi * t / n)
    current = np.ones(n, dtype=np.complex128)
    best_k, best_mag = 0, -1.0
    for k in range(n // 2 + 1):
        mag = np.abs(current @ x)
        if mag > best_mag:
            best_k, best_mag = k, mag
        current *= twiddle
    return best_k * sample_rate / n


def naive_dct2_orthonormal(values, num_coeffs):
    """Orthonormal DCT-II by the double-loop definition."""
    x = list(values)
    n = len(x)
    out = []
    for k in range(num_coeffs):
        acc = 0.0
        for t in range(n):
            acc += x[t] * math.cos(math.pi * k * (2 * t + 1) / (2 * n))
        scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        out.append(scale * acc)
    return np.array(out)


def relative_error(analytic, numeric):
    """max |a - n| / max(1, |a| + |n|), elementwise worst case."""
    a = np.asarray(analytic, dtype=np.float64).ravel()
    b = np.asarray(numeric, dtype=np.float64).ravel()
    denom = np.maximum(1.0, np.abs(a) + np.abs(b))
    return float(np.max(np.abs(a - b) / denom))


def finite_difference_gradient(loss_fn, array, h=1e-5, sample=None, rng=None):
    """Central-difference dloss/darray, optionally on a coordinate sample.

    Returns (indices, numeric gradients) over flat coordinates.
    """
    flat = array.ravel()
    if sample is None or sample >= flat.size:
        indices = np.arange(flat.size)
    else:
        indices = rng.choice(flat.size, size=sample, replace=False)
    grads = np.empty(len(indices))
    for j, i in enumerate(indices):
        old = flat[i]
        flat[i] = old + h
        up = loss_fn()
        flat[i] = old - h
        down = loss_fn()
        flat[i] = old
        grads[j] = (up - down) / (2.0 * h)
    return indices, grads


def check_gradients(loss_fn, arrays, analytic, h=1e-5, sample=8, rng=None):
    """Worst relative error between analytic grads and finite differences."""
    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    for array, grad in zip(arrays, analytic):
        indices, numeric = finite_difference_gradient(loss_fn, array, h, sample, rng)
        ana = np.asarray(grad).ravel()[indices]
        denom = np.maximum(1.0, np.abs(ana) + np.abs(numeric))
        worst = max(worst, float(np.max(np.abs(ana - numeric) / denom)))
    return worst


def column_functionals(column):
    """The 12 functionals by plain-python formulas, in pipeline order."""
    xs = [float(v) for v in column]
    t_count = len(xs)
    mean = sum(xs) / t_count
    variance = sum((v - mean) ** 2 for v in xs) / t_count
    std = math.sqrt(variance)
    ordered = sorted(xs)
    mid = t_count // 2
    if t_count % 2:
        median = ordered[mid]
    else:
        median = 0.5 * (ordered[mid - 1] + ordered[mid])
    if variance == 0.0:
        skewness = 0.0
        kurtosis = 0.0
    else:
        m3 = sum((v - mean) ** 3 for v in xs) / t_count
        m4 = sum((v - mean) ** 4 for v in xs) / t_count
        skewness = m3 / variance ** 1.5
        kurtosis = m4 / variance ** 2 - 3.0
    ts = [i / (t_count - 1) for i in range(t_count)]
    t_mean = sum(ts) / t_count
    t_var = sum((t - t_mean) ** 2 for t in ts) / t_count
    cov = sum((t - t_mean) * (v - mean) for t, v in zip(ts, xs)) / t_count
    slope = cov / t_var if t_var > 0 else 0.0
    offset = mean - slope * t_mean
    residual = sum((v - (slope * t + offset)) ** 2 for t, v in zip(ts, xs)) / t_count
    return {
        "mean": mean, "max": max(xs), "min": min(xs),
        "range": max(xs) - min(xs), "variance": variance, "stddev": std,
        "median": median, "skewness": skewness, "kurtosis": kurtosis,
        "slope": slope, "offset": offset, "residual_mse": residual,
    }


def windowed_max(values, pool, stride):
    """Brute-force per-window maxima over a 1-D sequence."""
    xs = list(values)
    out = []
    start = 0
    while start + pool <= len(xs):
        out.append(max(xs[start:start + pool]))
        start += stride
    return out


def brute_force_metrics(truth, predicted, num_classes=5):
    """Confusion matrix, UA, WA via plain loops."""
    confusion = [[0] * num_classes for _ in range(num_classes)]
    for t, p in zip(truth, predicted):
        confusion[int(t)][int(p)] += 1
    recalls = []
    for k in range(num_classes):
        total = sum(confusion[k])
        if total:
            recalls.append(100.0 * confusion[k][k] / total)
    ua = sum(recalls) / len(recalls)
    correct = sum(confusion[k][k] for k in range(num_classes))
    wa = 100.0 * correct / len(list(truth))
    return confusion, ua, wa


def _sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def lstm_single_step(x, h_prev, c_prev, wx, wh, b):
    """One LSTM cell step by hand formulas; gate packing [i | f | g | o]."""
    hidden = len(h_prev)
    pre = [0.0] * (4 * hidden)
    for j in range(4 * hidden):
        acc = b[j]
        for i, xi in enumerate(x):
            acc += xi * wx[i][j]
        for i, hi in enumerate(h_prev):
            acc += hi * wh[i][j]
        pre[j] = acc
    h_new, c_new = [], []
    for j in range(hidden):
        i_gate = _sigmoid(pre[j])
        f_gate = _sigmoid(pre[hidden + j])
        g_cand = math.tanh(pre[2 * hidden + j])
        o_gate = _sigmoid(pre[3 * hidden + j])
        c = f_gate * c_prev[j] + i_gate * g_cand
        c_new.append(c)
        h_new.append(o_gate * math.tanh(c))
    return np.array(h_new), np.array(c_new)


def hamming_coefficients(length):
    return np.array([0.54 - 0.46 * math.cos(2 * math.pi * n / (length - 1))
                     for n in range(length)])


def hz_to_mel_formula(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def make_sine(freq_hz, duration_s, sample_rate, amplitude=1.0):
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    return amplitude * np.sin(2.0 * np.pi * freq_hz * t)
