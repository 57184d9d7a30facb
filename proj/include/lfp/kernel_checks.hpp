#pragma once

#include <string>
#include <vector>

namespace lfp {

/// One measured kernel property with its tolerance.
struct PropertyCheck {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // on |measured / expected - 1|, or |measured - expected| when expected is 0
  bool passed = false;
};

/// D1 angular density in mu = cos(theta) for the parameter A, written to stay finite for large A.
double d1_density(double a, double mu) noexcept;

/// Normalization, grazing limit and l(l+1) limit of the three surrogates.
std::vector<PropertyCheck> kernel_property_suite();

}  // namespace lfp
