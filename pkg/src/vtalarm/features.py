"""Per-channel time/frequency/wavelet features for alarm windows.

Each channel contributes eight scalars: five time-domain statistics
(mean, standard deviation, skewness, excess kurtosis, RMS), the dominant
frequency and normalized spectral entropy of a Welch power spectral
density estimate, and the total energy of a Morlet continuous wavelet
transform. Channel pairs contribute magnitude-squared coherence averaged
over frequency. The concatenation order is fixed: channels in record
order, statistics in the order above, pairs lexicographic, so feature
names and vector length depend only on the channel count and the
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import LengthMismatch, TooShort
from .wfdb_io import AlarmWindow


@dataclass
class SpectralParams:
    """Welch configuration.

    Parameters
    ----------
    segment_length : int
        Samples per segment, at least 8.
    overlap : float
        Fractional overlap between consecutive segments, in [0, 1).
    window : str
        Taper applied to each segment: "hann" (default) or "rect".
        The rectangular option exists for Parseval-style diagnostics.
    fs : float
        Sampling frequency in Hz.
    """

    segment_length: int
    fs: float
    overlap: float = 0.5
    window: str = "hann"

    def __post_init__(self):
        if self.segment_length < 8:
            raise ValueError("segment_length must be at least 8")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError("overlap must be in [0, 1)")
        if self.window not in ("hann", "rect"):
            raise ValueError(f"unknown window {self.window!r}")
        if self.fs <= 0:
            raise ValueError("fs must be positive")


@dataclass
class PsdEstimate:
    frequencies: np.ndarray
    power: np.ndarray
    df: float


@dataclass
class WaveletConfig:
    """Morlet CWT configuration: center parameter and ascending scales."""

    omega0: float
    scales: np.ndarray

    def __post_init__(self):
        self.scales = np.asarray(self.scales, dtype=np.float64)
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")
        if self.scales.ndim != 1 or self.scales.size == 0:
            raise ValueError("scales must be a non-empty vector")
        if np.any(self.scales <= 0) or np.any(np.diff(self.scales) <= 0):
            raise ValueError("scales must be positive and strictly ascending")


@dataclass
class FeatureVector:
    values: np.ndarray
    names: list[str]


def spectral_params_for(fs: float, seconds: float = 4.0, overlap: float = 0.5) -> SpectralParams:
    """Default Welch setup: 4 s Hann segments with 50% overlap."""
    return SpectralParams(segment_length=int(round(seconds * fs)), fs=fs, overlap=overlap)


def morlet_scales(
    fs: float,
    f_min: float = 0.5,
    f_max: float = 40.0,
    n_scales: int = 24,
    omega0: float = 6.0,
) -> WaveletConfig:
    """Log-spaced scales whose pseudo-frequencies span [f_min, f_max].

    The scale-frequency map is f = omega0 * fs / (2 pi s); descending
    frequencies give ascending scales.
    """
    freqs = np.logspace(np.log10(f_max), np.log10(f_min), n_scales)
    scales = omega0 * fs / (2.0 * np.pi * freqs)
    return WaveletConfig(omega0=omega0, scales=scales)


def time_domain_stats(channel: np.ndarray) -> tuple[float, float, float, float, float]:
    """(mean, std, skewness, excess kurtosis, rms) of one channel.

    Population standard deviation; skewness m3/m2^(3/2) and excess
    kurtosis m4/m2^2 - 3 from central moments. A zero-variance input
    yields skewness = kurtosis = 0 by convention.
    """
    x = np.asarray(channel, dtype=np.float64)
    if x.size < 2:
        raise TooShort(f"need at least 2 samples, got {x.size}")
    mean = x.mean()
    centered = x - mean
    m2 = np.mean(centered**2)
    rms = np.sqrt(np.mean(x**2))
    if m2 == 0.0:
        return float(mean), 0.0, 0.0, 0.0, float(rms)
    m3 = np.mean(centered**3)
    m4 = np.mean(centered**4)
    skew = m3 / m2**1.5
    kurt = m4 / m2**2 - 3.0
    return float(mean), float(np.sqrt(m2)), float(skew), float(kurt), float(rms)


def _taper(params: SpectralParams) -> np.ndarray:
    n = params.segment_length
    if params.window == "hann":
        # Periodic Hann, the spectral-analysis convention.
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    return np.ones(n)


def _segment_starts(n: int, params: SpectralParams) -> np.ndarray:
    seg = params.segment_length
    if n < seg:
        raise TooShort(f"signal of {n} samples shorter than segment_length {seg}")
    step = max(1, int(round(seg * (1.0 - params.overlap))))
    return np.arange(0, n - seg + 1, step)


def _segment_ffts(x: np.ndarray, params: SpectralParams) -> np.ndarray:
    """Demeaned, tapered rFFT of every segment, one row per segment."""
    seg = params.segment_length
    starts = _segment_starts(x.size, params)
    segments = x[starts[:, None] + np.arange(seg)[None, :]]
    segments = segments - segments.mean(axis=1, keepdims=True)
    return np.fft.rfft(segments * _taper(params)[None, :], axis=1)


def welch_psd(channel: np.ndarray, params: SpectralParams) -> PsdEstimate:
    """Averaged-periodogram PSD estimate.

    The signal is cut into overlapping segments; each is demeaned,
    tapered, transformed, and scaled by 1/(fs * sum(w^2)). One-sided
    output doubles every bin except DC and (for even segment lengths)
    Nyquist, then periodograms are averaged across segments.
    """
    x = np.asarray(channel, dtype=np.float64)
    spectra = _segment_ffts(x, params)
    w = _taper(params)
    seg = params.segment_length
    power = (np.abs(spectra) ** 2).mean(axis=0) / (params.fs * np.sum(w**2))
    power[1:] *= 2.0
    if seg % 2 == 0:
        power[-1] /= 2.0  # Nyquist bin is not mirrored
    freqs = np.fft.rfftfreq(seg, d=1.0 / params.fs)
    return PsdEstimate(frequencies=freqs, power=power, df=params.fs / seg)


def dominant_frequency(psd: PsdEstimate) -> float:
    """Frequency of the strongest non-DC bin; ties go to the lower bin."""
    if psd.power.size < 2:
        raise TooShort("PSD needs at least 2 bins")
    return float(psd.frequencies[1 + int(np.argmax(psd.power[1:]))])


def spectral_entropy(psd: PsdEstimate) -> float:
    """Shannon entropy of the normalized PSD, scaled into [0, 1].

    Normalization runs over all bins (DC included); zero-power bins are
    skipped in the sum. An all-zero spectrum returns 0.
    """
    if psd.power.size < 2:
        raise TooShort("PSD needs at least 2 bins")
    total = psd.power.sum()
    if total <= 0.0:
        return 0.0
    p = psd.power[psd.power > 0] / total
    h = -np.sum(p * np.log(p))
    return float(h / np.log(psd.power.size))


def coherence(a: np.ndarray, b: np.ndarray, params: SpectralParams) -> float:
    """Mean magnitude-squared coherence between two channels.

    Welch auto- and cross-spectra share segmentation and taper; per bin
    C(f) = |S_ab|^2 / (S_aa * S_bb), and the result is the unweighted
    mean over non-DC bins. Bins with zero auto-power product are
    skipped; at least two segments are required for the estimate to be
    non-degenerate.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size:
        raise LengthMismatch(f"channel lengths differ: {a.size} vs {b.size}")
    starts = _segment_starts(a.size, params)
    if starts.size < 2:
        raise TooShort("coherence needs at least 2 segments")
    fa = _segment_ffts(a, params)
    fb = _segment_ffts(b, params)
    s_aa = (np.abs(fa) ** 2).mean(axis=0)
    s_bb = (np.abs(fb) ** 2).mean(axis=0)
    s_ab = (fa * np.conj(fb)).mean(axis=0)
    denom = (s_aa * s_bb)[1:]
    num = (np.abs(s_ab) ** 2)[1:]
    keep = denom > 0
    if not keep.any():
        return 0.0
    return float(np.mean(num[keep] / denom[keep]))


_KERNEL_CACHE: dict = {}


def _morlet_kernels(config: WaveletConfig) -> list[np.ndarray]:
    """Unit-L2-norm sampled Morlet kernels, one per scale."""
    key = (config.omega0, config.scales.tobytes())
    if key in _KERNEL_CACHE:
        return _KERNEL_CACHE[key]
    kernels = []
    for s in config.scales:
        half = int(np.floor(4.0 * s))
        t = np.arange(-half, half + 1) / s
        psi = np.pi**-0.25 * np.exp(1j * config.omega0 * t) * np.exp(-0.5 * t**2)
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2))
        kernels.append(psi)
    if len(_KERNEL_CACHE) > 8:
        _KERNEL_CACHE.clear()
    _KERNEL_CACHE[key] = kernels
    return kernels


def cwt_morlet(channel: np.ndarray, config: WaveletConfig) -> np.ndarray:
    """Continuous wavelet transform, returning (n_scales, n_samples).

    Per scale s the signal is correlated with the conjugate of the
    analytic Morlet wavelet pi^(-1/4) exp(i omega0 t) exp(-t^2/2)
    sampled at t = (k - center)/s, truncated at |t| <= 4 and normalized
    to unit discrete L2 norm. Edges are zero-padded; the output keeps
    the input length.
    """
    x = np.asarray(channel, dtype=np.float64)
    if x.size < 16:
        raise TooShort(f"CWT needs at least 16 samples, got {x.size}")
    kernels = _morlet_kernels(config)
    n = x.size
    max_len = max(k.size for k in kernels)
    fft_len = 1 << int(np.ceil(np.log2(n + max_len - 1)))
    fx = np.fft.fft(x, fft_len)
    out = np.empty((len(kernels), n), dtype=np.complex128)
    for i, psi in enumerate(kernels):
        half = psi.size // 2
        # corr(x, psi) == conv(x, reversed conjugate kernel)
        full = np.fft.ifft(fx * np.fft.fft(np.conj(psi[::-1]), fft_len))
        out[i] = full[half : half + n]
    return out


def wavelet_energy(coeffs: np.ndarray) -> tuple[float, np.ndarray]:
    """Total and per-scale mean-square coefficient energy."""
    coeffs = np.asarray(coeffs)
    if coeffs.size == 0:
        raise TooShort("empty coefficient matrix")
    per_scale = (np.abs(coeffs) ** 2).sum(axis=1) / coeffs.shape[1]
    return float(per_scale.sum()), per_scale


_STAT_NAMES = ("mean", "std", "skewness", "kurtosis_excess", "rms")


def feature_names(n_channels: int, coherence_mode: str = "per_pair") -> list[str]:
    """Deterministic feature naming for a given channel count."""
    names = []
    for c in range(n_channels):
        names.extend(f"ch{c}_{s}" for s in _STAT_NAMES)
        names.append(f"ch{c}_dominant_freq_hz")
        names.append(f"ch{c}_spectral_entropy")
        names.append(f"ch{c}_wavelet_energy")
    if coherence_mode == "per_pair":
        names.extend(f"coherence_ch{i}_ch{j}" for i, j in combinations(range(n_channels), 2))
    else:
        names.append("coherence_mean")
    return names


def build_feature_vector(
    window: AlarmWindow,
    spectral: SpectralParams,
    wavelet: WaveletConfig,
    coherence_mode: str = "per_pair",
    analysis_span: tuple[float, float] | None = None,
) -> FeatureVector:
    """Concatenate per-channel and per-pair features for one window.

    ``analysis_span`` optionally restricts extraction to a sub-window
    given in seconds relative to the window start; the default uses the
    full 6 minutes. The window must already be imputed.
    """
    if window.missing_mask.any():
        raise ValueError("window has missing samples; run impute_mean first")
    if coherence_mode not in ("per_pair", "global_mean"):
        raise ValueError(f"unknown coherence_mode {coherence_mode!r}")

    samples = window.samples
    if analysis_span is not None:
        lo = int(round(analysis_span[0] * window.fs))
        hi = int(round(analysis_span[1] * window.fs))
        if not 0 <= lo < hi <= samples.shape[0]:
            raise ValueError(f"analysis_span {analysis_span} outside window")
        samples = samples[lo:hi]

    n_channels = samples.shape[1]
    values = []
    for c in range(n_channels):
        x = samples[:, c]
        values.extend(time_domain_stats(x))
        psd = welch_psd(x, spectral)
        values.append(dominant_frequency(psd))
        values.append(spectral_entropy(psd))
        total_energy, _ = wavelet_energy(cwt_morlet(x, wavelet))
        values.append(total_energy)

    pair_values = [
        coherence(samples[:, i], samples[:, j], spectral)
        for i, j in combinations(range(n_channels), 2)
    ]
    if coherence_mode == "per_pair":
        values.extend(pair_values)
    else:
        values.append(float(np.mean(pair_values)) if pair_values else 0.0)

    vec = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise ValueError("non-finite feature value")
    return FeatureVector(values=vec, names=feature_names(n_channels, coherence_mode))


__all__ = [
    "SpectralParams",
    "PsdEstimate",
    "WaveletConfig",
    "FeatureVector",
    "spectral_params_for",
    "morlet_scales",
    "time_domain_stats",
    "welch_psd",
    "dominant_frequency",
    "spectral_entropy",
    "coherence",
    "cwt_morlet",
    "wavelet_energy",
    "feature_names",
    "build_feature_vector",
]
