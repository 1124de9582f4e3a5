#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace momsplit {

/// Every iteration scheme the library runs.
enum class Algorithm {
  kAlg1,      ///< nonlinear semi-forward-reflected-backward with momentum
  kAlg2,      ///< nonlinear semi-reflected-forward-backward with momentum
  kAlg3,      ///< nonlinear outer-reflected forward-backward with momentum
  kSfrbs,     ///< semi-forward-reflected-backward
  kSrfbs,     ///< semi-reflected-forward-backward
  kOrfbs,     ///< outer-reflected forward-backward
  kFbhf,      ///< forward-backward-half-forward
  kFourOp,    ///< four-operator SFRBS variant (A = A1 + A2)
  kNewOrfbs,  ///< four-operator ORFBS variant (A = A1 + A2)
};

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// The momentum algorithm whose step-size theory covers `a`.
Algorithm theory_family(Algorithm a);

}  // namespace momsplit
