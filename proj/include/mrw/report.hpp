#pragma once

#include <string>
#include <vector>

#include "mrw/classify.hpp"
#include "mrw/criteria.hpp"
#include "mrw/model.hpp"
#include "mrw/simulate.hpp"

namespace mrw {

// bumped whenever a field is renamed, removed or changes meaning
constexpr int kSchemaVersion = 1;

// non-finite values serialize as the strings "inf", "-inf" and "nan"
ojson num(double v);

ojson model_json(const Model& m, std::size_t max_states = 16);
ojson cycle_stats_json(const CycleStats& c);
ojson moment_json(const MomentEstimate& e);
ojson truncated_means_json(const TruncatedMeanTable& t, const JFunction& jf);
ojson excursion_json(const ExcursionMeasure& e);
ojson series_json(const SeriesTest& t);
ojson spitzer_json(const SpitzerSeries& s);
ojson identity_json(const IdentityReport& r);
ojson null_homology_json(const Model& m, const NullHomology& nh);
ojson verdict_json(const Verdict& v);
ojson trichotomy_json(const Trichotomy& t);
ojson theorem_report_json(const TheoremReport& r);
// stopping-time moments and counts of a campaign, one entry per level
ojson campaign_summary_json(const CampaignResult& c, const DiagnosticConfig& dc = {});

// one row per (trial, level)
std::string campaign_csv(const CampaignResult& c);
extern const std::vector<std::string> kCampaignColumns;
std::string trajectory_csv(const Model& m, const Trajectory& t);
// x grid against A, J, and the excursion tails of each alpha
std::string criteria_plot_csv(const TruncatedMeanTable& t, const JFunction& jf,
                              const std::vector<ExcursionMeasure>& ems);
std::string spitzer_plot_csv(const std::vector<SpitzerSeries>& series);

// fixed-width tables for the terminal
std::string verdict_table(const Verdict& v, const Trichotomy& t);
std::string theorem_table(const TheoremReport& r);

}  // namespace mrw
