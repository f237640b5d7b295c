#pragma once

#include <stdexcept>
#include <string>

namespace acoofdm {

enum class errc {
  invalid_geometry,
  unsupported_order,
  quadrature_failure,
  out_of_domain,
  infeasible,
  bisection_failure,
  solver_failure,
  infeasible_qos,
  dimension_mismatch,
  too_few_samples,
  io_error,
};

inline const char* to_string(errc c) noexcept {
  switch (c) {
    case errc::invalid_geometry:   return "invalid-geometry";
    case errc::unsupported_order:  return "unsupported-order";
    case errc::quadrature_failure: return "quadrature-failure";
    case errc::out_of_domain:      return "out-of-domain";
    case errc::infeasible:         return "infeasible";
    case errc::bisection_failure:  return "bisection-failure";
    case errc::solver_failure:     return "solver-failure";
    case errc::infeasible_qos:     return "infeasible-qos";
    case errc::dimension_mismatch: return "dimension-mismatch";
    case errc::too_few_samples:    return "too-few-samples";
    case errc::io_error:           return "io-error";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace acoofdm
