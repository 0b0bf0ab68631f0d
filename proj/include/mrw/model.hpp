#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mrw/kernel.hpp"
#include "mrw/numeric.hpp"
#include "mrw/rng.hpp"

namespace mrw {

using State = std::int64_t;
constexpr std::int64_t kRowCap = std::int64_t(1) << 20;
using ojson = nlohmann::ordered_json;

struct Edge {
    State to;
    double p;
    Kernel k;
};

// outgoing (or incoming) edges of a state; `tail` is the probability mass not enumerated
struct Row {
    std::vector<Edge> edges;
    double tail = 0.0;
};

// one return cycle at an anchor, with its probability when it comes from an exact enumeration
struct CyclePath {
    double weight = 1.0;
    std::int64_t length = 0;
    DD sum;
    double down = 0.0;      // max over the cycle of (S_k - S_start)^-
    double up_start = 0.0;  // max over the cycle of (S_k - S_start)^+
    double up_end = 0.0;    // max over the cycle of (S_k - S_end)^+
    // positive values of (S_k - S_start)^-, k = 1..length, sorted descending with multiplicities
    std::vector<std::pair<double, std::int64_t>> negs;
};
using CycleSink = std::function<void(const CyclePath&)>;

// driving chain plus increment kernels, possibly on a countably infinite state space
class ChainFamily {
public:
    virtual ~ChainFamily() = default;
    virtual std::string kind() const = 0;
    virtual ojson params() const { return ojson::object(); }
    virtual bool finite() const { return false; }
    virtual std::vector<State> states() const { return {}; }
    virtual bool valid_state(State s) const { return s >= 0; }
    virtual State default_anchor() const { return 0; }
    virtual std::string label(State s) const { return std::to_string(s); }
    virtual std::optional<State> parse_label(const std::string& s) const;

    // edges i -> j with p_ij, enumerated until the leftover mass is below eps or
    // kRowCap edges have been listed
    virtual Row row(State i, double eps) const = 0;
    // edges j <- i: Edge.to = i, Edge.p = p_ij, Edge.k = K_ij
    virtual Row in_row(State j, double eps) const = 0;
    virtual std::pair<State, DD> step(State i, Engine& g) const = 0;
    // predecessor i of j drawn with probability pi_i p_ij / pi_j, increment drawn from K_ij
    virtual std::pair<State, DD> step_reverse(State j, Engine& g) const = 0;
    virtual double pi(State i) const = 0;
    virtual bool exact_kernels() const { return true; }
    // probability mass a one-step row cannot represent (index space exhausted)
    virtual double unrepresentable_mass() const { return 0.0; }

    // closed-form cycle enumeration at `anchor` for cycles of length <= max_len; returns false when
    // the family has none. `residual` receives the probability of the cycles not reported.
    virtual bool for_each_cycle(State, std::int64_t, const CycleSink&, double&) const { return false; }
    // P_anchor(tau > m, S_m <= y), m >= 1, when known in closed form
    virtual std::optional<double> cycle_partial_cdf(State, std::int64_t, double) const { return std::nullopt; }

    // breadth-first exploration from `from`, at most `max_states` states
    std::vector<State> explore(State from, double eps, std::size_t max_states) const;
};

using FamilyPtr = std::shared_ptr<const ChainFamily>;

struct FiniteSpec {
    std::vector<std::string> names;
    std::vector<std::vector<double>> P;
    // exact rational entries "p/q"; empty when the input was given in floating point
    std::vector<std::vector<std::string>> P_exact;
    std::map<std::pair<int, int>, Kernel> kernels;
};

struct ModelSpec {
    std::string name;
    ojson parameters = ojson::object();
    std::optional<FiniteSpec> finite;
    FamilyPtr family;
    double tail_eps = 1e-12;
};

struct StationaryLaw {
    std::vector<double> pi;          // finite models
    std::vector<std::string> exact;  // rational form when the solve was exact
    double residual = 0.0;           // sup-norm of pi P - pi (finite) or on the explored set
    double total = 1.0;
    bool closed_form = false;
};

class Model {
public:
    Model() = default;
    Model(ModelSpec spec, FamilyPtr fam, StationaryLaw law, bool dual = false)
        : spec_(std::move(spec)), fam_(std::move(fam)), law_(std::move(law)), dual_(dual) {}

    const ModelSpec& spec() const { return spec_; }
    const ChainFamily& chain() const { return *fam_; }
    FamilyPtr chain_ptr() const { return fam_; }
    const StationaryLaw& stationary() const { return law_; }
    double pi(State s) const { return fam_->pi(s); }
    bool finite() const { return fam_->finite(); }
    bool exact_kernels() const { return fam_->exact_kernels(); }
    bool is_dual() const { return dual_; }
    std::string name() const { return spec_.name; }
    State default_anchor() const { return fam_->default_anchor(); }
    std::string label(State s) const { return fam_->label(s); }
    double tail_eps() const { return spec_.tail_eps; }
    std::size_t num_states() const;
    // dense transition matrix of a finite model
    std::vector<std::vector<double>> matrix() const;
    State parse_state(const std::string& s) const;

private:
    ModelSpec spec_;
    FamilyPtr fam_;
    StationaryLaw law_;
    bool dual_ = false;
};

Model build_model(const ModelSpec& spec, double tol = 1e-12);
Model dual_model(const Model& m);
// all increments multiplied by c (c = -1 reflects the walk)
Model scaled_model(const Model& m, double c);

// helpers shared with the spec reader and the tests
// "p/q" or a decimal string; returns the value and the exact reduced form "p/q"
std::pair<double, std::string> parse_probability(const std::string& s);
ModelSpec finite_spec_model(std::string name, FiniteSpec fs);

}  // namespace mrw
