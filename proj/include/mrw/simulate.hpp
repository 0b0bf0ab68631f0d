#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mrw/model.hpp"

namespace mrw {

struct Trajectory {
    State start = 0;
    std::vector<State> states;  // M_0..M_n
    std::vector<DD> x;          // x[0] = 0, x[k] = X_k
    std::vector<DD> s;          // S_0 = 0, S_k
    std::int64_t horizon() const { return static_cast<std::int64_t>(states.size()) - 1; }
    double S(std::int64_t k) const { return s[static_cast<std::size_t>(k)].value(); }
    double X(std::int64_t k) const { return x[static_cast<std::size_t>(k)].value(); }
};

Trajectory run_trajectory(const Model& m, State start, std::int64_t horizon, std::uint64_t seed);
// same walk driven by a caller-owned engine
Trajectory run_trajectory(const Model& m, State start, std::int64_t horizon, Engine& g);

// per-cycle records, structure of arrays
struct CycleStats {
    State anchor = 0;
    std::vector<std::int64_t> length;
    std::vector<double> sum, down, up_start, up_end, weight;
    // run-length encoded (S_k - S_start)^- > 0 values of each cycle, sorted descending
    std::vector<std::size_t> neg_offset{0};
    std::vector<double> neg_value;
    std::vector<std::int64_t> neg_count;
    // optional: run-length encoded increments X_k of each cycle, sorted descending
    bool has_increments = false;
    std::vector<std::size_t> inc_offset{0};
    std::vector<double> inc_value;
    std::vector<std::int64_t> inc_count;

    std::int64_t discarded = 0;  // trailing partial cycles dropped
    std::int64_t censored = 0;   // cycles cut by the per-cycle length cap
    bool anchor_never_visited = false;
    bool exact = false;      // weights are exact path probabilities
    double residual = 0.0;   // exact pools: probability of cycles not enumerated

    std::size_t size() const { return length.size(); }
    bool empty() const { return length.empty(); }
    double total_weight() const;
    void add(const CyclePath& c, const std::vector<std::pair<double, std::int64_t>>* incs = nullptr);
    void append(const CycleStats& o);
    // number of k <= tau with (S_k - S_start)^- > x in cycle c
    std::int64_t count_below(std::size_t c, double x) const;
    CyclePath path(std::size_t c) const;
};

// builds a cycle record from the path values S_start, S_1.. (absolute partial sums)
CyclePath make_cycle(const std::vector<DD>& s, std::size_t from, std::size_t to);
void compress_desc(std::vector<double>& v, std::vector<std::pair<double, std::int64_t>>& out);

CycleStats cycle_decompose(const Trajectory& t, State anchor);

struct CycleSampleConfig {
    State anchor = 0;
    std::int64_t cycles = 1000;
    std::uint64_t seed = 0;
    std::int64_t max_len = 100000000;
    bool keep_increments = false;
    int workers = 0;  // 0: OpenMP default
};
// independent cycles under P_anchor, generated in fixed blocks so the pool does not depend on the worker count
CycleStats sample_cycles(const Model& m, const CycleSampleConfig& cfg);
CycleStats sample_cycles_serial(const Model& m, const CycleSampleConfig& cfg);

struct CensoredStat {
    double value = 0.0;
    bool censored = false;
    std::int64_t horizon = 0;
};

struct StoppingRecord {
    double x = 0.0;
    CensoredStat sigma_gt, sigma_le, rho, N, sigma_min, sigma_bar_gt;
    double s_at_sigma_le = 0.0;  // S at sigma_le(-x) when uncensored
    double min_value = 0.0;      // min_{1<=k<=n} S_k
};

struct Certification {
    std::int64_t window = 0;  // 0: horizon / 4
    double margin_factor = 0.5;
};

StoppingRecord stopping_times(const Trajectory& t, double x, const Certification& cert = {});

struct LadderRecord {
    std::vector<std::int64_t> asc_epochs;
    std::vector<State> asc_states;
    std::vector<double> asc_heights;
    std::vector<std::int64_t> desc_epochs;
    std::vector<double> desc_heights;
    // embedded walk at the anchor: cycle index zeta_n and epoch tau^>_n
    std::vector<std::int64_t> zeta;
    std::vector<std::int64_t> tau_gt;
    std::vector<double> d_gt;  // D_n^{i,>}
    bool sandwich_checked = false;
    bool sandwich_ok = true;
};

LadderRecord ladder_process(const Trajectory& t, State anchor);

struct CampaignConfig {
    State start = 0;
    State anchor = 0;
    std::int64_t horizon = 1000;
    std::int64_t trials = 100;
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<double> x_grid{0.0};
    bool keep_cycles = true;
    Certification cert;
};

struct TrialRecord {
    std::vector<StoppingRecord> stops;   // one per x in the grid
    std::vector<CensoredStat> tau_nu;    // tau_{nu(x)}(anchor), one per x
    CensoredStat first_return;           // tau(anchor)
    std::vector<double> checkpoints;     // S at the dyadic checkpoints
    double final_s = 0.0;
    bool new_low_late = false;   // min over the last half below the min over the first half
    bool new_high_late = false;  // max over the last half above the max over the first half
    std::int64_t cycles = 0;
};

struct CampaignResult {
    CampaignConfig config;
    std::vector<std::int64_t> checkpoint_times;
    std::vector<TrialRecord> trials;
    CycleStats cycles;
};

CampaignResult run_campaign(const Model& m, const CampaignConfig& cfg);
// reference implementation without OpenMP
CampaignResult run_campaign_serial(const Model& m, const CampaignConfig& cfg);

}  // namespace mrw
