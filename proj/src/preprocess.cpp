#include "artic/corpus/preprocess.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace artic::corpus {

namespace {

// Expand a polynomial from its roots; returns real coefficients, leading 1.
VecX poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> coeffs = {1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i] += coeffs[i];
      next[i + 1] -= coeffs[i] * r;
    }
    coeffs = std::move(next);
  }
  VecX out(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) out(static_cast<Eigen::Index>(i)) = coeffs[i].real();
  return out;
}

// Direct form II transposed IIR filter with initial state zi (length n-1).
VecX lfilter(const FilterCoeffs& f, const VecX& x, const VecX& zi) {
  const Eigen::Index n = f.a.size();
  VecX z = zi;
  VecX y(x.size());
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    const double xm = x(m);
    const double ym = f.b(0) * xm + z(0);
    for (Eigen::Index i = 0; i < n - 2; ++i)
      z(i) = f.b(i + 1) * xm + z(i + 1) - f.a(i + 1) * ym;
    z(n - 2) = f.b(n - 1) * xm - f.a(n - 1) * ym;
    y(m) = ym;
  }
  return y;
}

// Steady-state initial filter state for a unit step input.
VecX lfilter_zi(const FilterCoeffs& f) {
  const Eigen::Index n = f.a.size() - 1;
  num::MatX A = num::MatX::Zero(n, n);
  // I - companion(a)^T
  for (Eigen::Index j = 0; j < n; ++j) A(j, 0) = -f.a(j + 1);
  for (Eigen::Index i = 1; i < n; ++i) A(i - 1, i) = 1.0;
  num::MatX M = num::MatX::Identity(n, n) - A;
  VecX B(n);
  for (Eigen::Index i = 0; i < n; ++i) B(i) = f.b(i + 1) - f.a(i + 1) * f.b(0);
  return M.colPivHouseholderQr().solve(B);
}

}  // namespace

FilterCoeffs butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
  if (order < 1) throw ConfigError("butterworth: order must be >= 1");
  if (cutoff_hz <= 0 || cutoff_hz >= sample_rate_hz / 2.0)
    throw ConfigError("butterworth: cutoff must lie in (0, Nyquist)");

  // analog prototype poles on the unit circle, left half plane
  const double warped = 2.0 * sample_rate_hz * std::tan(M_PI * cutoff_hz / sample_rate_hz);
  std::vector<std::complex<double>> zpoles;
  for (int k = 1; k <= order; ++k) {
    const double theta = M_PI * (2.0 * k + order - 1.0) / (2.0 * order);
    std::complex<double> p = warped * std::complex<double>(std::cos(theta), std::sin(theta));
    // bilinear transform
    const double fs2 = 2.0 * sample_rate_hz;
    zpoles.push_back((fs2 + p) / (fs2 - p));
  }

  FilterCoeffs f;
  f.a = poly_from_roots(zpoles);
  // zeros all at z = -1: binomial coefficients
  f.b = VecX::Zero(order + 1);
  f.b(0) = 1.0;
  for (int i = 0; i < order; ++i)
    for (int j = i + 1; j >= 1; --j) f.b(j) += f.b(j - 1);
  // unit DC gain
  f.b *= f.a.sum() / f.b.sum();
  return f;
}

VecX filtfilt(const FilterCoeffs& f, const VecX& x) {
  const Eigen::Index ntaps = std::max(f.a.size(), f.b.size());
  const Eigen::Index padlen = 3 * ntaps;
  if (x.size() <= padlen)
    throw DataError("filtfilt: signal too short (" + std::to_string(x.size()) +
                    " samples, need > " + std::to_string(padlen) + ")");

  // odd reflection about the end points
  VecX ext(x.size() + 2 * padlen);
  for (Eigen::Index i = 0; i < padlen; ++i) ext(i) = 2.0 * x(0) - x(padlen - i);
  ext.segment(padlen, x.size()) = x;
  for (Eigen::Index i = 0; i < padlen; ++i)
    ext(padlen + x.size() + i) = 2.0 * x(x.size() - 1) - x(x.size() - 2 - i);

  const VecX zi = lfilter_zi(f);
  VecX y = lfilter(f, ext, zi * ext(0));
  y.reverseInPlace();
  y = lfilter(f, y, zi * y(0));
  y.reverseInPlace();
  return y.segment(padlen, x.size());
}

ArticulatoryTrajectory lowpass_filter(const ArticulatoryTrajectory& traj, double cutoff_hz) {
  traj.validate();
  if (cutoff_hz >= traj.frame_rate_hz / 2.0)
    throw ConfigError("lowpass cutoff " + std::to_string(cutoff_hz) +
                      " Hz is not below Nyquist (" + std::to_string(traj.frame_rate_hz / 2.0) +
                      " Hz)");
  const FilterCoeffs f = butterworth_lowpass(4, cutoff_hz, traj.frame_rate_hz);
  ArticulatoryTrajectory out = traj;
  for (int c = 0; c < kNumChannels; ++c) out.frames.col(c) = filtfilt(f, traj.frames.col(c));
  return out;
}

ArticulatoryTrajectory resample(const ArticulatoryTrajectory& traj, double target_rate_hz) {
  traj.validate();
  if (target_rate_hz <= 0) throw ConfigError("resample: target rate must be positive");
  if (target_rate_hz == traj.frame_rate_hz) return traj;

  const double ratio = target_rate_hz / traj.frame_rate_hz;
  const Eigen::Index T_in = traj.frames.rows();
  const Eigen::Index T_out =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(T_in * ratio)));

  ArticulatoryTrajectory out;
  out.frame_rate_hz = target_rate_hz;
  out.frames.resize(T_out, kNumChannels);
  for (Eigen::Index t = 0; t < T_out; ++t) {
    const double src = static_cast<double>(t) / ratio;
    const Eigen::Index lo = std::min<Eigen::Index>(static_cast<Eigen::Index>(src), T_in - 1);
    const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, T_in - 1);
    const double frac = src - static_cast<double>(lo);
    out.frames.row(t) = (1.0 - frac) * traj.frames.row(lo) + frac * traj.frames.row(hi);
  }
  return out;
}

std::pair<ArticulatoryTrajectory, NormStats> znormalize(const ArticulatoryTrajectory& traj) {
  traj.validate();
  if (traj.frames.rows() < 2) throw DataError("znormalize: need at least 2 frames");
  NormStats stats;
  stats.mean.resize(kNumChannels);
  stats.std.resize(kNumChannels);
  ArticulatoryTrajectory out = traj;
  for (int c = 0; c < kNumChannels; ++c) {
    const double mu = traj.frames.col(c).mean();
    const double sd = std::sqrt((traj.frames.col(c).array() - mu).square().mean());
    stats.mean(c) = mu;
    if (sd > 0.0) {
      stats.std(c) = sd;
      out.frames.col(c) = (traj.frames.col(c).array() - mu) / sd;
    } else {
      stats.std(c) = 0.0;
      out.frames.col(c).setZero();
    }
  }
  return {out, stats};
}

ArticulatoryTrajectory denormalize(const ArticulatoryTrajectory& traj, const NormStats& stats) {
  ArticulatoryTrajectory out = traj;
  for (int c = 0; c < kNumChannels; ++c) {
    const double sd = stats.std(c) > 0.0 ? stats.std(c) : 0.0;
    out.frames.col(c) = traj.frames.col(c).array() * sd + stats.mean(c);
  }
  return out;
}

}  // namespace artic::corpus
