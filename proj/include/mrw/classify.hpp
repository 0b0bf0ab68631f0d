#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrw/criteria.hpp"

namespace mrw {

enum class Category { NullHomologous, PD, ND, Osc, Inconclusive };
std::string to_string(Category c);

struct Evidence {
    std::string id;
    double value = 0.0;
    double threshold = 0.0;
    std::string status;
    std::string note;
};

struct NullHomology {
    bool null_homologous = false;
    std::string mode;          // exact | mc
    std::string subclass;      // NH-1..NH-5 when null-homologous
    bool advisory = false;     // infinite state space: boundedness of g judged on the explored set
    std::vector<std::pair<State, double>> g;  // BFS order from the anchor, g(anchor) = 0
    double g_min = 0.0, g_max = 0.0;
    bool bounded_below = true, bounded_above = true;
    std::size_t explored = 0;
    std::size_t cycles_checked = 0;
    std::string reason;  // why the model is not null-homologous
};

struct NullHomologyOptions {
    std::size_t max_states = 4096;
    std::int64_t cycles = 2000;  // mc mode
    std::uint64_t seed = 0;
    int workers = 0;
};

NullHomology null_homology_test(const Model& m, State anchor, const std::string& mode = "exact",
                                const NullHomologyOptions& opt = {});

struct ClassifyConfig {
    std::int64_t horizon = 1024;
    std::int64_t trials = 1000;
    std::int64_t cycles = 20000;
    std::int64_t max_cycle_len = 10000000;
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<double> x_grid{0.0, 1.0};
    std::int64_t series_n = 256;
    std::string series_mode = "auto";  // auto | exact | mc
    int top_k = 8;
    DiagnosticConfig dc;
    Certification cert;
    bool second_anchor = true;
    std::size_t min_samples = 100;
};

struct Verdict {
    Category category = Category::Inconclusive;
    std::string nh_class;
    std::string embedded = "inconclusive";   // from the cycle sums
    std::string full_walk = "inconclusive";  // from D and the reflected excursion
    std::string path = "inconclusive";       // from running extremes
    std::vector<Evidence> evidence;
    std::vector<std::string> notes;
    bool disagreement = false;
};

// shared sample material, computed once per model and reused by the suites
struct Samples {
    State anchor = 0;
    CycleStats pool;
    CampaignResult campaign;
    TruncatedMeanTable table;
    JFunction J, J_neg;
};
Samples collect_samples(const Model& m, State anchor, const ClassifyConfig& cfg);

Verdict fluctuation_verdict(const Model& m, State anchor, const ClassifyConfig& cfg);
Verdict fluctuation_verdict(const Model& m, const Samples& s, const ClassifyConfig& cfg);

struct Trichotomy {
    std::string rate_class = "inconclusive";  // linear-rate | PD+ | ND+ | Osc+ | inconclusive
    double mu = 0.0;
    double mu_se = 0.0;
    std::vector<std::int64_t> times;
    std::vector<double> mean_ratio, median_ratio, abs_median_ratio;
    std::optional<double> stationary_mean;  // E_pi X_1 when it exists
    std::string stationary_mean_source;     // exact | cycles | none
    bool mean_matches = false;
    Status abs_cycle_sum = Status::Inconclusive;   // E|S_tau| finite
    Status abs_increment = Status::Inconclusive;   // E_pi |X_1| finite
    std::vector<std::string> notes;
};
Trichotomy trichotomy_and_slln(const Model& m, State anchor, const ClassifyConfig& cfg);
Trichotomy trichotomy_and_slln(const Model& m, const Samples& s, const ClassifyConfig& cfg);

struct Condition {
    std::string id;
    std::string theorem;
    std::string description;
    Status status = Status::Inconclusive;
    std::vector<Evidence> evidence;
};

struct Implication {
    std::string theorem;
    std::string premise, conclusion;
    std::vector<std::string> gates;  // hypotheses of the theorem that must hold
    std::string state;               // consistent | alarm | open | not-applicable
};

struct TheoremReport {
    std::string model;
    State anchor = 0;
    double alpha = 1.0;
    std::vector<Condition> conditions;
    std::vector<Implication> implications;
    std::size_t red_alarms = 0;
    std::vector<std::string> notes;
    const Condition* find(const std::string& id) const;
};

// theorems: suite names (divergence, last-exit, spitzer-alpha, occupation, chains, minimum,
// finite-state, slln, post-passage, passage-solidarity); empty runs all
TheoremReport theorem_suite(const Model& m, State anchor, double alpha, const ClassifyConfig& cfg,
                            const std::vector<std::string>& theorems = {});
TheoremReport theorem_suite(const Model& m, const Samples& s, double alpha, const ClassifyConfig& cfg,
                            const std::vector<std::string>& theorems = {});

}  // namespace mrw
