#include "momsplit/algorithm.hpp"

#include <array>
#include <utility>

namespace momsplit {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 9> kNames{{
    {Algorithm::kAlg1, "alg1"},
    {Algorithm::kAlg2, "alg2"},
    {Algorithm::kAlg3, "alg3"},
    {Algorithm::kSfrbs, "sfrbs"},
    {Algorithm::kSrfbs, "srfbs"},
    {Algorithm::kOrfbs, "orfbs"},
    {Algorithm::kFbhf, "fbhf"},
    {Algorithm::kFourOp, "four-op"},
    {Algorithm::kNewOrfbs, "new-orfbs"},
}};

}  // namespace

std::string_view to_string(Algorithm a) {
  for (const auto& [alg, name] : kNames) {
    if (alg == a) return name;
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [alg, n] : kNames) {
    if (n == name) return alg;
  }
  return std::nullopt;
}

Algorithm theory_family(Algorithm a) {
  switch (a) {
    case Algorithm::kAlg1:
    case Algorithm::kSfrbs:
    case Algorithm::kFourOp:
      return Algorithm::kAlg1;
    case Algorithm::kAlg2:
    case Algorithm::kSrfbs:
      return Algorithm::kAlg2;
    case Algorithm::kAlg3:
    case Algorithm::kOrfbs:
    case Algorithm::kNewOrfbs:
      return Algorithm::kAlg3;
    case Algorithm::kFbhf:
      return Algorithm::kFbhf;
  }
  return a;
}

}  // namespace momsplit
