#pragma once

#include <string>
#include <vector>

#include "mrw/laws.hpp"
#include "mrw/model.hpp"

namespace mrw {

enum class PetalVariant { Plain, Alternating };
enum class GenPetalVariant { XLogX, MinCounterexample };

// flower chain: 0 -> i with probability p0(i), i -> 0 with probability 1
ModelSpec zoo_petal_flower(LawPtr p0, PetalVariant variant = PetalVariant::Plain);
// flower chain with out-step -x_i and return step x_i + 2, x_i = i^c
ModelSpec zoo_petal_general(LawPtr p0, double c);
ModelSpec zoo_sisyphus(double alpha);
ModelSpec zoo_generalized_petal_flower(LawPtr gamma, GenPetalVariant variant, double alpha = 1.5);
ModelSpec zoo_tail_comparison(double alpha);
ModelSpec zoo_birth_death(const Kernel& y);
ModelSpec zoo_single_state(const Kernel& x);
ModelSpec zoo_sigma_moment_counterexample(double alpha, double theta);
// increments log|A| on each edge; `a_spec` holds the chain and the laws of A
ModelSpec zoo_affine_env(const FiniteSpec& a_spec);
ModelSpec zoo_affine_env_default();
ModelSpec zoo_two_state_loop();

// parse "name" or "name:key=value,key=value"; bare values bind to the primary key
ModelSpec zoo_from_string(const std::string& text);

struct ZooEntry {
    std::string name;
    std::string params;  // default parameter string
    std::string description;
};
std::vector<ZooEntry> zoo_catalog();

// gamma(n) of the birth-death example: 0, -1, 1, -2, 2, ...
inline std::int64_t birth_death_gamma(std::int64_t n) { return n % 2 == 0 ? n / 2 : -(n + 1) / 2; }

}  // namespace mrw
