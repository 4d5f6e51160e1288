#pragma once

#include "artic/corpus/types.hpp"
#include "artic/num/rng.hpp"

namespace artic::corpus {

struct FilterCoeffs {
  VecX b;  // numerator, b[0] first
  VecX a;  // denominator, a[0] == 1
};

// Digital lowpass Butterworth via the bilinear transform with frequency
// pre-warping.
FilterCoeffs butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz);

// Zero-phase forward-backward filtering with odd-reflection padding and
// steady-state initial conditions (matches the common scipy semantics).
VecX filtfilt(const FilterCoeffs& f, const VecX& x);

// 4th-order zero-phase lowpass, per channel. cutoff must be below Nyquist.
ArticulatoryTrajectory lowpass_filter(const ArticulatoryTrajectory& traj, double cutoff_hz);

// Linear-interpolation resampling; duration preserved within one frame.
ArticulatoryTrajectory resample(const ArticulatoryTrajectory& traj, double target_rate_hz);

struct NormStats {
  VecX mean;  // per channel
  VecX std;   // population std; 0 marks a degenerate channel
};

// Sentence-wise per-channel standardisation. Degenerate channels map to
// zeros with std recorded as 0 so predictions can still be de-normalised.
std::pair<ArticulatoryTrajectory, NormStats> znormalize(const ArticulatoryTrajectory& traj);

// Invert znormalize using the recorded statistics.
ArticulatoryTrajectory denormalize(const ArticulatoryTrajectory& traj, const NormStats& stats);

}  // namespace artic::corpus
