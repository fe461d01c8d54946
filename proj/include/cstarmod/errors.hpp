#pragma once

#include <stdexcept>

namespace cstarmod {

// Input document malformed or inconsistent with the cstar-mod/1 schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Gram matrix or certificate that should be PSD/consistent by construction
// failed its tolerance check; the computation cannot continue meaningfully.
struct NumericalBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cstarmod
