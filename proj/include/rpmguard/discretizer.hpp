#pragma once

#include <span>

#include "rpmguard/alphabet.hpp"

namespace rpmguard {

// Normal-distribution banding for one health device. A reading maps to the
// upper band (mu, mu+2*sigma], the lower band [mu-2*sigma, mu], or the
// outlier symbol outside [mu-2*sigma, mu+2*sigma]. Boundaries: mu itself
// falls in the lower band; the +-2*sigma edges belong to their bands.
struct DeviceProfile {
  DeviceKind kind = DeviceKind::kOximeter;
  double mu = 0.0;
  double sigma = 0.0;

  int upper_symbol() const;    // ox1 / sc1
  int lower_symbol() const;    // ox2 / sc2
  int outlier_symbol() const;  // ox3 / sc3
  int off_symbol() const;      // ox_off / sc_off

  double upper_edge() const { return mu + 2.0 * sigma; }
  double lower_edge() const { return mu - 2.0 * sigma; }
};

// Fits mu (sample mean) and sigma (population standard deviation, divisor n)
// from readings. Throws ProfileError for fewer than 2 readings, non-finite
// values, or zero variance.
DeviceProfile fit_profile(DeviceKind kind, std::span<const double> readings);

// Maps a finite reading to the band symbol. Throws InvalidInputError for
// NaN or infinite readings.
int discretize(const DeviceProfile& profile, double reading);

}  // namespace rpmguard
