// randpulse: binary NRZ noise generation, sinc^2 PSD envelope, averaged
// periodogram estimation and spectral-line detection.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include <fftw3.h>

#include "randpulse/entropy.hpp"
#include "randpulse/lfsr.hpp"
#include "randpulse/stats.hpp"

namespace randpulse {

/// NRZ ±1 waveform: one level per clock period, replicated M times.
struct BinaryWaveform {
    std::vector<double> samples;   // values in {-1, +1}
    double f_clock;
    unsigned oversample;

    double sample_rate() const { return f_clock * oversample; }
};

struct TrueRandomSource {
    EntropySource entropy;
};

struct PrffSource {
    unsigned lfsr_len = 8;
    std::uint32_t lfsr_seed = 1;
    std::vector<unsigned> taps;   // empty = maximal-length default
};

using NoiseSource = std::variant<TrueRandomSource, PrffSource>;

/// Binary noise generator: per clock the level toggles with probability 1/2
/// (random flip-flop) or under the LFSR bit (pseudo-random flip-flop).
inline BinaryWaveform gen_binary_noise(double f_clock, std::size_t n_clocks, unsigned oversample,
                                       NoiseSource source) {
    if (n_clocks == 0 || oversample == 0) throw std::invalid_argument("gen_binary_noise: n, M >= 1");
    BinaryWaveform w{{}, f_clock, oversample};
    w.samples.reserve(n_clocks * oversample);
    bool level = false;
    if (auto* tr = std::get_if<TrueRandomSource>(&source)) {
        for (std::size_t c = 0; c < n_clocks; ++c) {
            if (tr->entropy.next_bit()) level = !level;
            for (unsigned m = 0; m < oversample; ++m) w.samples.push_back(level ? 1.0 : -1.0);
        }
    } else {
        auto& ps = std::get<PrffSource>(source);
        Lfsr reg(ps.lfsr_len, ps.taps.empty() ? maximal_taps(ps.lfsr_len) : ps.taps, ps.lfsr_seed);
        for (std::size_t c = 0; c < n_clocks; ++c) {
            if (reg.step()) level = !level;
            for (unsigned m = 0; m < oversample; ++m) w.samples.push_back(level ? 1.0 : -1.0);
        }
    }
    return w;
}

/// Sinc-squared envelope: (sin(pi f/f_clock) / (pi f/f_clock))^2, 1 at f = 0.
inline double psd_envelope(double f, double f_clock) {
    if (f < 0.0) throw std::invalid_argument("psd_envelope: f >= 0");
    double x = std::numbers::pi * f / f_clock;
    if (x == 0.0) return 1.0;
    double s = std::sin(x) / x;
    return s * s;
}

struct SpectrumEstimate {
    std::vector<double> freq;      // Hz, bins 0 .. fs/2
    std::vector<double> density;   // mean power per bin (two-sided halves folded)
    std::size_t segments;
    std::size_t segment_len;
    double f_clock;
};

/// Averaged periodogram over K non-overlapping rectangular-window segments.
/// Normalized so the bin powers sum to the mean square of the waveform.
inline SpectrumEstimate estimate_psd(const BinaryWaveform& w, std::size_t segment_len,
                                     std::size_t segments) {
    if (segment_len < 2 || segments < 1) throw std::invalid_argument("estimate_psd: bad L, K");
    if (w.samples.size() < segment_len * segments)
        throw std::invalid_argument("estimate_psd: waveform shorter than K*L samples");
    const std::size_t nbins = segment_len / 2 + 1;
    std::vector<double> power(nbins, 0.0);
    std::vector<double> in(segment_len);
    std::vector<std::complex<double>> out(nbins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(int(segment_len), in.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    const double norm = 1.0 / (double(segment_len) * double(segment_len));
    for (std::size_t k = 0; k < segments; ++k) {
        std::copy_n(w.samples.begin() + std::ptrdiff_t(k * segment_len), segment_len, in.begin());
        fftw_execute(plan);
        for (std::size_t b = 0; b < nbins; ++b) {
            double p = std::norm(out[b]) * norm;
            // fold the negative-frequency half, except DC and Nyquist
            if (b != 0 && !(segment_len % 2 == 0 && b == nbins - 1)) p *= 2.0;
            power[b] += p;
        }
    }
    fftw_destroy_plan(plan);
    for (double& p : power) p /= double(segments);
    SpectrumEstimate est;
    est.density = std::move(power);
    est.segments = segments;
    est.segment_len = segment_len;
    est.f_clock = w.f_clock;
    double df = w.sample_rate() / double(segment_len);
    est.freq.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) est.freq[b] = df * double(b);
    return est;
}

/// Band-averaged density around frequency f (±half_bins bins).
inline double band_power(const SpectrumEstimate& s, double f, std::size_t half_bins) {
    double df = s.freq.size() > 1 ? s.freq[1] - s.freq[0] : 1.0;
    std::ptrdiff_t center = std::ptrdiff_t(std::llround(f / df));
    double sum = 0.0;
    std::size_t n = 0;
    for (std::ptrdiff_t b = center - std::ptrdiff_t(half_bins); b <= center + std::ptrdiff_t(half_bins); ++b) {
        if (b < 1 || std::size_t(b) >= s.density.size()) continue;
        sum += s.density[std::size_t(b)];
        ++n;
    }
    if (n == 0) throw std::invalid_argument("band_power: empty band");
    return sum / double(n);
}

/// Band-averaged sinc-squared envelope matched to band_power's bins.
inline double band_envelope(const SpectrumEstimate& s, double f, std::size_t half_bins) {
    double df = s.freq.size() > 1 ? s.freq[1] - s.freq[0] : 1.0;
    std::ptrdiff_t center = std::ptrdiff_t(std::llround(f / df));
    double sum = 0.0;
    std::size_t n = 0;
    for (std::ptrdiff_t b = center - std::ptrdiff_t(half_bins); b <= center + std::ptrdiff_t(half_bins); ++b) {
        if (b < 1 || std::size_t(b) >= s.density.size()) continue;
        sum += psd_envelope(s.freq[std::size_t(b)], s.f_clock);
        ++n;
    }
    return sum / double(n);
}

struct LineReport {
    std::vector<std::size_t> flagged_bins;   // bins at multiples of f_clock/period
    std::vector<double> excess;              // power / local median, flagged bins
    bool any() const { return !flagged_bins.empty(); }
};

/// Flags bins at multiples of f_clock/period whose power exceeds the local
/// median of neighboring bins by `threshold` (default 5x).
inline LineReport detect_spectral_lines(const SpectrumEstimate& s, unsigned period,
                                        double threshold = 5.0, unsigned max_harmonics = 0) {
    double df = s.freq[1] - s.freq[0];
    double line_spacing = s.f_clock / double(period);
    if (df > line_spacing + 1e-12)
        throw std::invalid_argument("detect_spectral_lines: frequency resolution too coarse");
    LineReport report;
    unsigned h = 1;
    for (;; ++h) {
        if (max_harmonics && h > max_harmonics) break;
        std::size_t bin = std::size_t(std::llround(h * line_spacing / df));
        if (bin + 1 >= s.density.size()) break;
        // local median over +-16 neighbors, the candidate bin excluded
        std::vector<double> neigh;
        for (std::ptrdiff_t b = std::ptrdiff_t(bin) - 16; b <= std::ptrdiff_t(bin) + 16; ++b) {
            if (b < 1 || std::size_t(b) >= s.density.size() || std::size_t(b) == bin) continue;
            neigh.push_back(s.density[std::size_t(b)]);
        }
        std::nth_element(neigh.begin(), neigh.begin() + std::ptrdiff_t(neigh.size() / 2), neigh.end());
        double med = neigh[neigh.size() / 2];
        if (med > 0.0 && s.density[bin] > threshold * med) {
            report.flagged_bins.push_back(bin);
            report.excess.push_back(s.density[bin] / med);
        }
    }
    return report;
}

} // namespace randpulse
