#include <cmath>
#include <complex>
#include <vector>

#include "artic/feat/features.hpp"

namespace artic::feat {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Iterative radix-2 complex FFT, n a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        auto u = a[i + j];
        auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Triangular mel filterbank over FFT bins; rows = filters, cols = bins.
num::MatX mel_filterbank(const MfccConfig& cfg) {
  const int bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(cfg.sample_rate_hz / 2.0);
  std::vector<int> edges(cfg.num_filters + 2);
  for (int i = 0; i < cfg.num_filters + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * i / (cfg.num_filters + 1);
    edges[i] = static_cast<int>(std::floor((cfg.fft_size + 1) * mel_to_hz(mel) /
                                           cfg.sample_rate_hz));
  }
  num::MatX fb = num::MatX::Zero(cfg.num_filters, bins);
  for (int j = 0; j < cfg.num_filters; ++j) {
    for (int k = edges[j]; k < edges[j + 1]; ++k)
      fb(j, k) = static_cast<double>(k - edges[j]) / std::max(1, edges[j + 1] - edges[j]);
    for (int k = edges[j + 1]; k < edges[j + 2]; ++k)
      fb(j, k) = static_cast<double>(edges[j + 2] - k) / std::max(1, edges[j + 2] - edges[j + 1]);
  }
  return fb;
}

// Orthonormal DCT-II matrix, rows = coefficients, cols = filters.
num::MatX dct2_matrix(int num_coeffs, int n) {
  num::MatX dct(num_coeffs, n);
  for (int i = 0; i < num_coeffs; ++i)
    for (int j = 0; j < n; ++j)
      dct(i, j) = std::sqrt(2.0 / n) * std::cos(M_PI * i * (2.0 * j + 1.0) / (2.0 * n));
  dct.row(0) *= 1.0 / std::sqrt(2.0);
  return dct;
}

}  // namespace

FeatureMatrix compute_mfcc(const VecX& waveform, const MfccConfig& cfg) {
  const auto window = static_cast<Eigen::Index>(std::lround(cfg.window_s * cfg.sample_rate_hz));
  const auto hop = static_cast<Eigen::Index>(std::lround(cfg.hop_s * cfg.sample_rate_hz));
  if (waveform.size() < window)
    throw DataError("compute_mfcc: waveform shorter than one analysis window (" +
                    std::to_string(waveform.size()) + " < " + std::to_string(window) + ")");
  if (cfg.fft_size < window) throw ConfigError("compute_mfcc: fft_size below window length");

  VecX emphasized(waveform.size());
  emphasized(0) = waveform(0);
  for (Eigen::Index i = 1; i < waveform.size(); ++i)
    emphasized(i) = waveform(i) - cfg.preemphasis * waveform(i - 1);

  VecX hamming(window);
  for (Eigen::Index i = 0; i < window; ++i)
    hamming(i) = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / static_cast<double>(window - 1));

  const Eigen::Index frames = (waveform.size() - window) / hop + 1;
  const int bins = cfg.fft_size / 2 + 1;
  const num::MatX fb = mel_filterbank(cfg);
  const num::MatX dct = dct2_matrix(cfg.num_coeffs, cfg.num_filters);

  FeatureMatrix out;
  out.kind = FeatureKind::kMfcc;
  out.frame_period_s = cfg.hop_s;
  out.rows.resize(frames, cfg.num_coeffs);

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
  for (Eigen::Index fidx = 0; fidx < frames; ++fidx) {
    for (Eigen::Index i = 0; i < window; ++i)
      buf[static_cast<std::size_t>(i)] = emphasized(fidx * hop + i) * hamming(i);
    for (Eigen::Index i = window; i < cfg.fft_size; ++i) buf[static_cast<std::size_t>(i)] = 0.0;
    fft_inplace(buf);
    VecX power(bins);
    for (int k = 0; k < bins; ++k) power(k) = std::norm(buf[static_cast<std::size_t>(k)]);
    VecX logfb = (fb * power).array().max(cfg.log_floor).log().matrix();
    out.rows.row(fidx) = (dct * logfb).transpose();
  }
  return out;
}

}  // namespace artic::feat
