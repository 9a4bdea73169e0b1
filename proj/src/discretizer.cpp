#include "rpmguard/discretizer.hpp"

#include <cmath>

#include "rpmguard/errors.hpp"

namespace rpmguard {

namespace {

void require_banded(DeviceKind kind) {
  if (!has_readings(kind)) {
    throw ProfileError("device kind '" + device_kind_name(kind) +
                       "' has no reading bands");
  }
}

}  // namespace

int DeviceProfile::upper_symbol() const {
  return kind == DeviceKind::kOximeter ? kOx1 : kSc1;
}

int DeviceProfile::lower_symbol() const {
  return kind == DeviceKind::kOximeter ? kOx2 : kSc2;
}

int DeviceProfile::outlier_symbol() const {
  return kind == DeviceKind::kOximeter ? kOx3 : kSc3;
}

int DeviceProfile::off_symbol() const {
  return kind == DeviceKind::kOximeter ? kOxOff : kScOff;
}

DeviceProfile fit_profile(DeviceKind kind, std::span<const double> readings) {
  require_banded(kind);
  if (readings.size() < 2) {
    throw ProfileError("need at least 2 readings to fit a profile, got " +
                       std::to_string(readings.size()));
  }
  double sum = 0.0;
  for (double r : readings) {
    if (!std::isfinite(r)) throw ProfileError("non-finite reading");
    sum += r;
  }
  const double n = static_cast<double>(readings.size());
  const double mu = sum / n;
  double ss = 0.0;
  for (double r : readings) {
    const double d = r - mu;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / n);
  if (sigma <= 0.0) {
    throw ProfileError("zero variance: all " +
                       std::to_string(readings.size()) +
                       " readings are identical");
  }
  return DeviceProfile{kind, mu, sigma};
}

int discretize(const DeviceProfile& profile, double reading) {
  if (!std::isfinite(reading)) {
    throw InvalidInputError("non-finite reading for " +
                            device_kind_name(profile.kind));
  }
  if (reading > profile.mu && reading <= profile.upper_edge()) {
    return profile.upper_symbol();
  }
  if (reading >= profile.lower_edge() && reading <= profile.mu) {
    return profile.lower_symbol();
  }
  return profile.outlier_symbol();
}

}  // namespace rpmguard
