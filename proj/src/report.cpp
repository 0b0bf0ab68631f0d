#include "mrw/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mrw {

ojson num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

namespace {

ojson nums(const std::vector<double>& v) {
    ojson a = ojson::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

// shortest round-trip form, so CSV output is stable across platforms
std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string pad(const std::string& s, std::size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

}  // namespace

ojson model_json(const Model& m, std::size_t max_states) {
    ojson o;
    o["name"] = m.name();
    o["parameters"] = m.spec().parameters;
    o["finite"] = m.finite();
    o["dual"] = m.is_dual();
    if (m.finite()) o["num_states"] = m.num_states();
    o["default_anchor"] = m.label(m.default_anchor());
    const auto& law = m.stationary();
    ojson pi = ojson::array();
    std::vector<State> states =
        m.finite() ? m.chain().states() : m.chain().explore(m.default_anchor(), m.tail_eps(), max_states);
    for (std::size_t k = 0; k < states.size() && k < std::max<std::size_t>(max_states, m.finite() ? states.size() : 0);
         ++k) {
        ojson e;
        e["state"] = m.label(states[k]);
        e["pi"] = num(m.pi(states[k]));
        if (k < law.exact.size() && !law.exact[k].empty()) e["exact"] = law.exact[k];
        pi.push_back(e);
    }
    o["stationary"] = pi;
    o["stationary_residual"] = num(law.residual);
    o["stationary_closed_form"] = law.closed_form;
    o["irreducible"] = true;
    return o;
}

ojson cycle_stats_json(const CycleStats& c) {
    ojson o;
    o["anchor"] = c.anchor;
    o["cycles"] = c.size();
    o["discarded"] = c.discarded;
    o["censored"] = c.censored;
    o["exact"] = c.exact;
    if (c.exact) o["residual"] = num(c.residual);
    o["anchor_never_visited"] = c.anchor_never_visited;
    double w = 0, len = 0, sum = 0, down = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        double wk = c.exact ? c.weight[k] : 1.0;
        w += wk;
        len += wk * static_cast<double>(c.length[k]);
        sum += wk * c.sum[k];
        down += wk * c.down[k];
    }
    if (w > 0) {
        o["mean_length"] = num(len / w);
        o["mean_sum"] = num(sum / w);
        o["mean_down"] = num(down / w);
    }
    return o;
}

ojson moment_json(const MomentEstimate& e) {
    ojson o;
    o["id"] = e.id;
    o["estimate"] = num(e.estimate);
    o["se"] = num(e.se);
    o["n"] = e.n;
    o["censored"] = e.censored;
    o["top_share"] = num(e.top_share);
    o["divergence_flag"] = e.divergence_flag;
    o["stable"] = e.stable;
    o["tail_index"] = num(e.tail_index);
    o["exact"] = e.exact;
    if (e.exact) o["residual"] = num(e.residual);
    o["status"] = to_string(e.status);
    return o;
}

ojson truncated_means_json(const TruncatedMeanTable& t, const JFunction& jf) {
    ojson o;
    o["anchor"] = t.anchor;
    o["source"] = t.source;
    o["sample_size"] = t.sample_size;
    o["top_k"] = t.top_k;
    o["ultimately_positive"] = t.ultimately_positive;
    o["ultimately_negative"] = t.ultimately_negative;
    o["gamma"] = num(jf.gamma);
    o["grid"] = nums(t.grid);
    o["A"] = nums(t.A);
    o["pos"] = nums(t.pos);
    o["neg"] = nums(t.neg);
    o["se"] = nums(t.se);
    std::vector<double> J;
    for (double x : t.grid) J.push_back(eval_J(jf, x));
    o["J"] = nums(J);
    return o;
}

ojson excursion_json(const ExcursionMeasure& e) {
    ojson o;
    o["alpha"] = num(e.alpha);
    o["exact"] = e.exact;
    o["sample_size"] = e.sample_size;
    o["sandwich_ok"] = e.sandwich_ok;
    o["grid"] = nums(e.grid);
    o["tail"] = nums(e.tail);
    o["tail_se"] = nums(e.tail_se);
    o["p_down"] = nums(e.p_down);
    o["tau_weighted"] = nums(e.tau_weighted);
    o["occupation"] = nums(e.occupation);
    return o;
}

ojson series_json(const SeriesTest& t) {
    ojson o;
    o["blocks"] = nums(t.blocks);
    o["partial"] = nums(t.partial);
    o["slope"] = num(t.slope);
    o["converges"] = to_string(t.converges);
    return o;
}

ojson spitzer_json(const SpitzerSeries& s) {
    ojson o;
    o["x"] = num(s.x);
    o["alpha"] = num(s.alpha);
    o["mode"] = s.mode;
    o["n_max"] = s.prob.size();
    o["residual"] = num(s.residual);
    o["test"] = series_json(s.test);
    return o;
}

ojson identity_json(const IdentityReport& r) {
    ojson o;
    o["exact"] = r.exact;
    if (r.exact) {
        o["occupation_residual"] = num(r.occupation_residual);
        o["drift_residual"] = num(r.drift_residual);
        o["duality_residual"] = num(r.duality_residual);
        o["duality_length"] = r.duality_length;
        o["duality_paths"] = r.duality_paths;
        o["functions"] = r.functions;
        o["kac_residual"] = num(r.kac_residual);
    } else {
        o["occupation_z"] = num(r.occupation_z);
        o["drift_z"] = num(r.drift_z);
    }
    return o;
}

ojson null_homology_json(const Model& m, const NullHomology& nh) {
    ojson o;
    o["null_homologous"] = nh.null_homologous;
    o["mode"] = nh.mode;
    if (nh.null_homologous) {
        o["subclass"] = nh.subclass;
        o["advisory"] = nh.advisory;
        o["g_min"] = num(nh.g_min);
        o["g_max"] = num(nh.g_max);
        o["bounded_below"] = nh.bounded_below;
        o["bounded_above"] = nh.bounded_above;
        ojson g = ojson::array();
        for (std::size_t k = 0; k < nh.g.size() && k < 16; ++k) {
            ojson e;
            e["state"] = m.label(nh.g[k].first);
            e["g"] = num(nh.g[k].second);
            g.push_back(e);
        }
        o["g"] = g;
    } else {
        o["reason"] = nh.reason;
    }
    o["explored"] = nh.explored;
    o["cycles_checked"] = nh.cycles_checked;
    return o;
}

ojson verdict_json(const Verdict& v) {
    ojson o;
    o["category"] = to_string(v.category);
    if (!v.nh_class.empty()) o["nh_class"] = v.nh_class;
    o["embedded"] = v.embedded;
    o["full_walk"] = v.full_walk;
    o["path"] = v.path;
    o["disagreement"] = v.disagreement;
    ojson ev = ojson::array();
    for (const auto& e : v.evidence) {
        ojson x;
        x["id"] = e.id;
        x["value"] = num(e.value);
        x["threshold"] = num(e.threshold);
        x["status"] = e.status;
        if (!e.note.empty()) x["note"] = e.note;
        ev.push_back(x);
    }
    o["evidence"] = ev;
    o["notes"] = v.notes;
    return o;
}

ojson trichotomy_json(const Trichotomy& t) {
    ojson o;
    o["rate_class"] = t.rate_class;
    o["mu"] = num(t.mu);
    o["mu_se"] = num(t.mu_se);
    o["times"] = t.times;
    o["mean_ratio"] = nums(t.mean_ratio);
    o["median_ratio"] = nums(t.median_ratio);
    o["abs_median_ratio"] = nums(t.abs_median_ratio);
    o["stationary_mean"] = t.stationary_mean ? num(*t.stationary_mean) : ojson(nullptr);
    o["stationary_mean_source"] = t.stationary_mean_source;
    o["mean_matches"] = t.mean_matches;
    o["abs_cycle_sum"] = to_string(t.abs_cycle_sum);
    o["abs_increment"] = to_string(t.abs_increment);
    o["notes"] = t.notes;
    return o;
}

ojson theorem_report_json(const TheoremReport& r) {
    ojson o;
    o["model"] = r.model;
    o["anchor"] = r.anchor;
    o["alpha"] = num(r.alpha);
    ojson conds = ojson::array();
    for (const auto& c : r.conditions) {
        ojson x;
        x["id"] = c.id;
        x["suite"] = c.theorem;
        x["description"] = c.description;
        x["status"] = to_string(c.status);
        ojson ev = ojson::array();
        for (const auto& e : c.evidence) {
            ojson y;
            y["id"] = e.id;
            y["value"] = num(e.value);
            y["threshold"] = num(e.threshold);
            y["status"] = e.status;
            if (!e.note.empty()) y["note"] = e.note;
            ev.push_back(y);
        }
        x["evidence"] = ev;
        conds.push_back(x);
    }
    o["conditions"] = conds;
    ojson imps = ojson::array();
    for (const auto& i : r.implications) {
        ojson x;
        x["suite"] = i.theorem;
        x["premise"] = i.premise;
        x["conclusion"] = i.conclusion;
        x["gates"] = i.gates;
        x["state"] = i.state;
        imps.push_back(x);
    }
    o["implications"] = imps;
    o["red_alarms"] = r.red_alarms;
    o["notes"] = r.notes;
    return o;
}

ojson campaign_summary_json(const CampaignResult& c, const DiagnosticConfig& dc) {
    ojson o;
    o["horizon"] = c.config.horizon;
    o["trials"] = c.trials.size();
    o["x_grid"] = nums(c.config.x_grid);
    ojson levels = ojson::array();
    for (std::size_t j = 0; j < c.config.x_grid.size(); ++j) {
        auto collect = [&](auto get) {
            std::vector<CensoredStat> v;
            v.reserve(c.trials.size());
            for (const auto& t : c.trials) v.push_back(get(t));
            return v;
        };
        ojson lv;
        lv["x"] = num(c.config.x_grid[j]);
        auto add = [&](const std::string& id, const std::vector<CensoredStat>& v, bool cert) {
            std::size_t cens = 0;
            for (const auto& s : v) cens += s.censored;
            ojson e = moment_json(stopping_moment(id, v, 1.0, cert, dc));
            e["censored_count"] = cens;
            lv[id] = e;
        };
        add("sigma_gt", collect([&](const TrialRecord& t) { return t.stops[j].sigma_gt; }), false);
        add("sigma_le", collect([&](const TrialRecord& t) { return t.stops[j].sigma_le; }), false);
        add("rho", collect([&](const TrialRecord& t) { return t.stops[j].rho; }), true);
        add("N", collect([&](const TrialRecord& t) { return t.stops[j].N; }), true);
        add("sigma_min", collect([&](const TrialRecord& t) { return t.stops[j].sigma_min; }), true);
        add("sigma_bar_gt", collect([&](const TrialRecord& t) { return t.stops[j].sigma_bar_gt; }), false);
        add("tau_nu", collect([&](const TrialRecord& t) { return t.tau_nu[j]; }), false);
        levels.push_back(lv);
    }
    o["levels"] = levels;
    std::vector<CensoredStat> ret;
    double fin = 0, lows = 0, highs = 0;
    for (const auto& t : c.trials) {
        ret.push_back(t.first_return);
        fin += t.final_s;
        lows += t.new_low_late;
        highs += t.new_high_late;
    }
    double n = std::max<double>(1.0, static_cast<double>(c.trials.size()));
    o["first_return"] = moment_json(stopping_moment("tau", ret, 1.0, false, dc));
    o["mean_final_s"] = num(fin / n);
    o["new_low_late"] = num(lows / n);
    o["new_high_late"] = num(highs / n);
    o["checkpoint_times"] = c.checkpoint_times;
    std::vector<double> mean_cp(c.checkpoint_times.size(), 0.0);
    for (const auto& t : c.trials)
        for (std::size_t k = 0; k < mean_cp.size() && k < t.checkpoints.size(); ++k) mean_cp[k] += t.checkpoints[k] / n;
    o["mean_checkpoints"] = nums(mean_cp);
    o["cycle_stats"] = cycle_stats_json(c.cycles);
    return o;
}

const std::vector<std::string> kCampaignColumns = {
    "trial", "x", "sigma_gt", "sigma_gt_censored", "sigma_le", "sigma_le_censored", "rho", "rho_censored",
    "N", "N_censored", "sigma_min", "sigma_min_censored", "sigma_bar_gt", "sigma_bar_gt_censored",
    "tau_nu", "tau_nu_censored", "first_return", "first_return_censored", "min_s", "final_s", "cycles"};

std::string campaign_csv(const CampaignResult& c) {
    std::ostringstream os;
    for (std::size_t k = 0; k < kCampaignColumns.size(); ++k) os << (k ? "," : "") << kCampaignColumns[k];
    os << "\n";
    auto cs = [&](const CensoredStat& s) { os << "," << fmt(s.value) << "," << (s.censored ? 1 : 0); };
    for (std::size_t i = 0; i < c.trials.size(); ++i) {
        const auto& t = c.trials[i];
        for (std::size_t j = 0; j < t.stops.size(); ++j) {
            const auto& s = t.stops[j];
            os << i << "," << fmt(s.x);
            cs(s.sigma_gt);
            cs(s.sigma_le);
            cs(s.rho);
            cs(s.N);
            cs(s.sigma_min);
            cs(s.sigma_bar_gt);
            cs(t.tau_nu[j]);
            cs(t.first_return);
            os << "," << fmt(s.min_value) << "," << fmt(t.final_s) << "," << t.cycles << "\n";
        }
    }
    return os.str();
}

std::string trajectory_csv(const Model& m, const Trajectory& t) {
    std::ostringstream os;
    os << "n,state,x,s\n";
    for (std::int64_t k = 0; k <= t.horizon(); ++k)
        os << k << "," << m.label(t.states[static_cast<std::size_t>(k)]) << "," << fmt(t.X(k)) << "," << fmt(t.S(k))
           << "\n";
    return os.str();
}

std::string criteria_plot_csv(const TruncatedMeanTable& t, const JFunction& jf,
                              const std::vector<ExcursionMeasure>& ems) {
    std::ostringstream os;
    os << "x,A,pos,neg,J";
    for (const auto& e : ems) os << ",V_tail_" << fmt(e.alpha) << ",p_down_" << fmt(e.alpha);
    os << "\n";
    for (std::size_t k = 0; k < t.grid.size(); ++k) {
        double x = t.grid[k];
        os << fmt(x) << "," << fmt(t.A[k]) << "," << fmt(t.pos[k]) << "," << fmt(t.neg[k]) << "," << fmt(eval_J(jf, x));
        for (const auto& e : ems) {
            double tail = k < e.tail.size() ? e.tail[k] : NAN;
            double pd = k < e.p_down.size() ? e.p_down[k] : NAN;
            os << "," << fmt(tail) << "," << fmt(pd);
        }
        os << "\n";
    }
    return os.str();
}

std::string spitzer_plot_csv(const std::vector<SpitzerSeries>& series) {
    std::ostringstream os;
    os << "x,alpha,n,prob,partial\n";
    for (const auto& s : series)
        for (std::size_t n = 0; n < s.prob.size(); ++n)
            os << fmt(s.x) << "," << fmt(s.alpha) << "," << n + 1 << "," << fmt(s.prob[n]) << ","
               << fmt(n < s.partial.size() ? s.partial[n] : NAN) << "\n";
    return os.str();
}

std::string verdict_table(const Verdict& v, const Trichotomy& t) {
    std::ostringstream os;
    os << pad("category", 22) << to_string(v.category) << "\n";
    if (!v.nh_class.empty()) os << pad("null-homology class", 22) << v.nh_class << "\n";
    os << pad("embedded walk", 22) << v.embedded << "\n";
    os << pad("full walk", 22) << v.full_walk << "\n";
    os << pad("path diagnostics", 22) << v.path << "\n";
    os << pad("sources disagree", 22) << (v.disagreement ? "yes" : "no") << "\n";
    os << pad("rate", 22) << t.rate_class;
    if (t.rate_class == "linear-rate") os << " mu=" << fmt(t.mu) << " se=" << fmt(t.mu_se);
    os << "\n";
    if (t.stationary_mean)
        os << pad("E_pi X_1", 22) << fmt(*t.stationary_mean) << " (" << t.stationary_mean_source << ")\n";
    os << pad("E|S_tau| finite", 22) << to_string(t.abs_cycle_sum) << "\n";
    os << pad("E_pi|X_1| finite", 22) << to_string(t.abs_increment) << "\n";
    os << "\n" << pad("evidence", 24) << pad("value", 14) << pad("threshold", 14) << "status\n";
    for (const auto& e : v.evidence)
        os << pad(e.id, 24) << pad(fmt(e.value), 14) << pad(fmt(e.threshold), 14) << e.status << "\n";
    for (const auto& n : v.notes) os << "note: " << n << "\n";
    for (const auto& n : t.notes) os << "note: " << n << "\n";
    return os.str();
}

std::string theorem_table(const TheoremReport& r) {
    std::ostringstream os;
    os << "model " << r.model << "  anchor " << r.anchor << "  alpha " << fmt(r.alpha) << "\n\n";
    os << pad("suite", 20) << pad("condition", 20) << pad("status", 14) << "description\n";
    for (const auto& c : r.conditions)
        os << pad(c.theorem, 20) << pad(c.id, 20) << pad(to_string(c.status), 14) << c.description << "\n";
    std::size_t consistent = 0, open = 0, na = 0;
    for (const auto& i : r.implications) {
        if (i.state == "consistent") ++consistent;
        else if (i.state == "open") ++open;
        else if (i.state == "not-applicable") ++na;
        else if (i.state == "alarm") os << "ALARM " << i.theorem << ": " << i.premise << " => " << i.conclusion << "\n";
    }
    for (const auto& n : r.notes) os << "note: " << n << "\n";
    os << "\nimplications: " << r.implications.size() << " total, " << consistent << " consistent, " << open
       << " open, " << na << " not applicable, " << r.red_alarms << " red alarms\n";
    return os.str();
}

}  // namespace mrw
