#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrw/model.hpp"
#include "mrw/simulate.hpp"

namespace mrw {

enum class Status { Holds, Fails, Inconclusive };
std::string to_string(Status s);

// ---------- exact oracles ----------

struct ExactOptions {
    std::int64_t max_len = 64;        // longest cycle enumerated
    double eps = 1e-12;               // row truncation for infinite families
    std::size_t max_paths = 4000000;  // LatticeBlowup beyond this
};

// streams every cycle path from `anchor` (closed form when the family has one); returns the
// probability of the cycles not reported
double for_each_exact_cycle(const Model& m, State anchor, const ExactOptions& opt, const CycleSink& fn);
CycleStats exact_cycle_law(const Model& m, State anchor, const ExactOptions& opt = {});

struct JointAtom {
    State state;
    double value;
    double prob;
};

struct JointDistribution {
    std::int64_t n = 0;
    std::vector<JointAtom> atoms;  // sorted by (state, value)
    double residual = 0.0;         // mass lost to row truncation
    double total() const;
    double cdf(double x) const;    // P(S_n <= x)
    std::vector<double> state_marginal(std::size_t num_states) const;
};

struct DpOptions {
    std::size_t max_atoms = 10000000;
    double eps = 1e-12;
    double merge_tol = 1e-12;  // relative tolerance for merging values
};

JointDistribution exact_distribution_Sn(const Model& m, State start, std::int64_t n, const DpOptions& opt = {});
// P(S_k <= x) for k = 1..n from one forward pass
std::vector<double> exact_cdf_path(const Model& m, State start, std::int64_t n, double x, const DpOptions& opt = {});

// ---------- truncated means and J ----------

// E(Y^+ ^ x) and E(Y^- ^ x) for a weighted law of Y, exact between atoms
class TruncatedMean {
public:
    TruncatedMean() = default;
    TruncatedMean(const std::vector<double>& values, const std::vector<double>& weights);
    double pos(double x) const;
    double neg(double x) const;
    double A(double x) const { return pos(x) - neg(x); }
    double p_pos() const { return p_pos_; }
    double p_neg() const { return p_neg_; }
    double mean_pos() const;  // may be large; E Y^+
    double mean_neg() const;
    std::size_t size() const { return n_; }
    const std::vector<double>& values() const { return vals_; }
    const std::vector<double>& weights() const { return w_; }

private:
    struct Side {
        std::vector<double> v, wv_prefix, w_suffix;  // sorted ascending
        double eval(double x) const;
    };
    Side pos_, neg_;
    double p_pos_ = 0.0, p_neg_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> vals_, w_;
};

struct TruncatedMeanTable {
    State anchor = 0;
    std::vector<double> grid, A, pos, neg, se;
    std::string source;  // "exact" or "empirical"
    std::size_t sample_size = 0;
    int top_k = 8;
    bool ultimately_positive = false;
    bool ultimately_negative = false;
};

std::vector<double> default_grid(const std::vector<double>& values, int points = 22);
TruncatedMeanTable truncated_means(const CycleStats& pool, const std::vector<double>& grid = {}, int top_k = 8);

struct JFunction {
    State anchor = 0;
    double gamma = 1.0;
    bool degenerate = false;  // P(Y > 0) = 0: J(x) = x
    TruncatedMean tm;
    bool negative_side = false;  // use E(Y^- ^ x): the J of the reflected walk
};

JFunction make_J(const TruncatedMean& tm, double gamma = 1.0, bool negative_side = false);
double eval_J(const JFunction& jf, double x);

// ---------- excursion measure ----------

struct ExcursionMeasure {
    State anchor = 0;
    double alpha = 1.0;
    std::vector<double> grid;
    std::vector<double> tail, tail_se;      // V^alpha((x, inf))
    std::vector<double> p_down;             // P(D > x)
    std::vector<double> tau_weighted;       // E(tau^alpha 1{D > x})
    std::vector<double> occupation;         // W: E #{n <= tau: S_n^- > x}
    bool sandwich_ok = true;
    std::size_t sample_size = 0;
    bool exact = false;
};

ExcursionMeasure excursion_measure(const CycleStats& pool, double alpha, const std::vector<double>& grid);

// ---------- moment functionals ----------

enum class Functional {
    J_D,              // E J(D)
    J_D_pow,          // E J(D)^{1+alpha}
    J_Sneg,           // E J(S_tau^-)
    J_Sneg_pow,       // E J(S_tau^-)^{1+alpha}
    D_pow_J_D,        // E D^alpha J(D)
    Int_Jalpha_dV,    // int J^alpha dV
    Int_J_dValpha,    // int J dV^alpha
    Int_logJ_dV,      // int log J dV
    Tau_pow,          // E tau^{1+alpha}
    Tau_log_tau,      // E tau log tau
    Abs_sum,          // E |S_tau|
    Abs_sum_excursion,  // E sum_{n<=tau} |X_n|
};
std::string functional_id(Functional f);

struct DiagnosticConfig {
    double top_fraction = 0.01;
    double top_share_limit = 0.5;
    double stability = 0.05;
    double ceiling = 0.0;
    double tail_holds = 1.5;
    double tail_fails = 1.1;
};

struct MomentEstimate {
    std::string id;
    double estimate = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    std::size_t censored = 0;
    double top_share = 0.0;
    bool divergence_flag = false;
    bool stable = true;
    double tail_index = 0.0;  // Hill estimate on the upper order statistics; inf when bounded
    bool exact = false;
    double residual = 0.0;
    Status status = Status::Inconclusive;
};

// per-cycle values of a functional
std::vector<double> functional_values(Functional f, const CycleStats& pool, const JFunction& jf, double alpha);
MomentEstimate moment_functional(Functional f, const CycleStats& pool, const JFunction& jf, double alpha,
                                 const DiagnosticConfig& dc = {});
// generic estimator over weighted samples
MomentEstimate estimate_mean(const std::string& id, const std::vector<double>& values, const std::vector<double>* weights,
                             bool exact, double residual, const DiagnosticConfig& dc = {});
// E value^p over stopping-time samples; censored samples enter at the horizon
MomentEstimate stopping_moment(const std::string& id, const std::vector<CensoredStat>& samples, double p,
                               bool certification_based, const DiagnosticConfig& dc = {});

// ---------- series ----------

struct SeriesTest {
    std::vector<double> blocks;  // b_k over dyadic blocks
    std::vector<double> partial;
    double slope = 0.0;          // of log b_k against log k over the last half
    Status converges = Status::Inconclusive;
};
SeriesTest cauchy_tail_test(const std::vector<double>& blocks);

struct SpitzerSeries {
    double x = 0.0, alpha = 0.0;
    std::string mode;
    std::vector<double> prob;     // P(S_n <= x), n = 1..n_max
    std::vector<double> se;
    std::vector<double> partial;  // partial sums of n^{alpha-1} P(S_n <= x)
    double residual = 0.0;
    SeriesTest test;
};

struct SpitzerOptions {
    std::string mode = "exact";  // exact | mc
    std::int64_t trials = 10000;
    std::uint64_t seed = 0;
    int workers = 0;
    DpOptions dp;
};
SpitzerSeries spitzer_series(const Model& m, State start, double x, double alpha, std::int64_t n_max,
                             const SpitzerOptions& opt = {});
SpitzerSeries spitzer_from_probabilities(std::vector<double> prob, std::vector<double> se, double x, double alpha);

// dyadic-level blocks of int g dV for the integral criteria; levels [2^k, 2^{k+1}), k = k0.., and
// the mass below 1 in the first block
SeriesTest integral_series(Functional f, const CycleStats& pool, const JFunction& jf, double alpha);
// same on an exact cycle stream, weights being probabilities
SeriesTest integral_series_exact(Functional f, const Model& m, State anchor, const JFunction& jf, double alpha,
                                 const ExactOptions& opt);

// ---------- identities ----------

struct IdentityReport {
    bool exact = false;
    double occupation_residual = 0.0;
    double drift_residual = 0.0;
    double duality_residual = 0.0;
    int duality_length = 0;
    std::size_t duality_paths = 0;
    std::size_t functions = 0;
    double kac_residual = 0.0;
    // Monte Carlo variant
    double occupation_z = 0.0;
    double drift_z = 0.0;
};
IdentityReport identity_checks(const Model& m, int n_dual = 5);
IdentityReport identity_checks_mc(const Model& m, State anchor, std::int64_t cycles, std::uint64_t seed, int workers = 0);

// stationary increment law under pi (finite exact models)
TruncatedMean stationary_increment_law(const Model& m);
double stationary_drift(const Model& m);

struct HarmonicRenewal {
    std::vector<double> y, sums, J, ratio;
    double ratio_min = 0.0, ratio_max = 0.0;
    bool bounded = false;
    double truncation = 0.0;  // P(0 <= S_{n_max} <= y_max), mass not yet swept past the grid
};
HarmonicRenewal harmonic_renewal_check(const Model& m, const std::vector<double>& y_grid, std::int64_t n_max,
                                       double bound = 10.0);

}  // namespace mrw
