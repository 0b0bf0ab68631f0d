#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrw/classify.hpp"
#include "mrw/errors.hpp"
#include "mrw/report.hpp"
#include "mrw/spec_io.hpp"
#include "mrw/zoo.hpp"

#ifndef MRW_DATA_DIR
#define MRW_DATA_DIR "data"
#endif

using namespace mrw;
namespace fs = std::filesystem;

namespace {

constexpr int kRegressMismatch = 13;
constexpr int kInternalError = 20;

const char* kExitCodes =
    "Exit codes:\n"
    "  0   success\n"
    "  1   NotStochastic: a transition row does not sum to one\n"
    "  2   Reducible: the driving chain is not irreducible\n"
    "  3   TailMassTooLarge: truncated rows lose too much mass\n"
    "  4   InvalidDistribution / InvalidParameter\n"
    "  5   ConfigError: bad flags, config file or model file\n"
    "  6   LatticeBlowup: exact enumeration exceeded its budget\n"
    "  7   UnsupportedKernel\n"
    "  8   EmptySample\n"
    "  9   IncompatibleAnchor\n"
    "  10  NotPositiveDivergent\n"
    "  11  NullHomologousInput\n"
    "  12  InsufficientSamples\n"
    "  13  zoo regress found a mismatch\n"
    "  14  IoError\n"
    "  20  internal error\n";

struct RunConfig {
    std::string model_path;
    std::string zoo;
    std::vector<std::string> zoo_extra;
    std::string anchor;
    std::string horizon = "1024";
    std::string trials = "1000";
    std::string cycles = "20000";
    std::vector<double> alpha{1.0};
    std::vector<double> x_grid{0.0, 1.0};
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string out;
    std::string format = "table";
};

std::int64_t parse_count(const std::string& s, const std::string& flag, std::int64_t lo = 1) {
    double v = 0.0;
    std::size_t used = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(flag + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v) || v != std::floor(v) || v < static_cast<double>(lo) || v > 1e12)
        throw ConfigError(flag + ": '" + s + "' must be an integer in [" + std::to_string(lo) + ", 1e12]");
    return static_cast<std::int64_t>(v);
}

// "petal-flower --p0 'zipf2'" and "petal-flower:p0=zipf2" name the same model
std::string normalize_zoo(const std::string& text, const std::vector<std::string>& extra) {
    std::vector<std::string> tok;
    {
        std::string cur;
        char quote = 0;
        for (char c : text) {
            if (quote) {
                if (c == quote) quote = 0;
                else cur += c;
            } else if (c == '\'' || c == '"') {
                quote = c;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) tok.push_back(cur), cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) tok.push_back(cur);
    }
    tok.insert(tok.end(), extra.begin(), extra.end());
    if (tok.empty()) throw ConfigError("--zoo: empty model name");
    std::string name = tok[0];
    std::vector<std::string> params;
    for (std::size_t k = 1; k < tok.size(); ++k) {
        const std::string& t = tok[k];
        if (t.rfind("--", 0) != 0) throw ConfigError("--zoo: unexpected token '" + t + "'");
        auto eq = t.find('=');
        if (eq != std::string::npos) {
            params.push_back(t.substr(2));
        } else {
            if (k + 1 >= tok.size()) throw ConfigError("--zoo: parameter " + t + " needs a value");
            params.push_back(t.substr(2) + "=" + tok[++k]);
        }
    }
    if (params.empty()) return name;
    std::string out = name + (name.find(':') == std::string::npos ? ":" : ",");
    for (std::size_t k = 0; k < params.size(); ++k) out += (k ? "," : "") + params[k];
    return out;
}

Model load_model(const RunConfig& rc) {
    if (!rc.model_path.empty() && !rc.zoo.empty()) throw ConfigError("give either --model or --zoo, not both");
    if (!rc.model_path.empty()) return build_model(read_model_file(rc.model_path));
    if (!rc.zoo.empty()) return build_model(zoo_from_string(normalize_zoo(rc.zoo, rc.zoo_extra)));
    throw ConfigError("no model: use --model FILE or --zoo NAME");
}

State anchor_of(const Model& m, const RunConfig& rc) {
    return rc.anchor.empty() ? m.default_anchor() : m.parse_state(rc.anchor);
}

std::uint64_t require_seed(const RunConfig& rc) {
    if (!rc.seed) throw ConfigError("--seed is required");
    return *rc.seed;
}

ClassifyConfig classify_config(const RunConfig& rc) {
    ClassifyConfig c;
    c.horizon = parse_count(rc.horizon, "--horizon", 2);
    c.trials = parse_count(rc.trials, "--trials");
    c.cycles = parse_count(rc.cycles, "--cycles");
    c.seed = require_seed(rc);
    c.workers = rc.workers;
    c.x_grid = rc.x_grid;
    return c;
}

// the worker count is left out on purpose: outputs must not depend on it
ojson config_json(const RunConfig& rc, const Model& m, State anchor) {
    ojson o;
    o["model"] = m.name();
    o["anchor"] = m.label(anchor);
    o["horizon"] = parse_count(rc.horizon, "--horizon", 2);
    o["trials"] = parse_count(rc.trials, "--trials");
    o["cycles"] = parse_count(rc.cycles, "--cycles");
    ojson a = ojson::array(), x = ojson::array();
    for (double v : rc.alpha) a.push_back(num(v));
    for (double v : rc.x_grid) x.push_back(num(v));
    o["alpha"] = a;
    o["x_grid"] = x;
    if (rc.seed) o["seed"] = *rc.seed;
    return o;
}

ojson envelope(const std::string& command, ojson config) {
    ojson o;
    o["schema_version"] = kSchemaVersion;
    o["command"] = command;
    o["config"] = std::move(config);
    return o;
}

std::string out_dir(const RunConfig& rc) {
    if (!rc.out.empty()) return rc.out;
    if (const char* env = std::getenv("MRW_OUT_DIR")) return env;
    return "";
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    f << text;
    if (!f) throw IoError("write failed for " + p.string());
}

// stdout gets the format asked for; the output directory, when set, gets every artifact
void emit(const RunConfig& rc, const std::string& command, const ojson& doc, const std::string& table,
          const std::vector<std::pair<std::string, std::string>>& csvs) {
    if (rc.format == "json") std::cout << doc.dump(2) << "\n";
    else if (rc.format == "csv") std::cout << (csvs.empty() ? std::string() : csvs.front().second);
    else std::cout << table;
    std::string dir = out_dir(rc);
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
    write_file(fs::path(dir) / (command + ".json"), doc.dump(2) + "\n");
    for (const auto& [name, text] : csvs) write_file(fs::path(dir) / name, text);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// ---------- commands ----------

int cmd_validate(const RunConfig& rc) {
    Model m = load_model(rc);
    ojson doc = envelope("validate", ojson::object());
    doc["config"]["model"] = m.name();
    doc["model"] = model_json(m);
    doc["valid"] = true;
    std::ostringstream os;
    os << "model " << m.name() << "\n";
    os << "irreducible: yes\n";
    os << (m.finite() ? "states: " + std::to_string(m.num_states()) : std::string("states: countably infinite"))
       << "\n";
    os << "stationary law" << (m.stationary().closed_form ? " (closed form)" : "") << ", residual "
       << fmt(m.stationary().residual) << "\n";
    for (const auto& e : doc["model"]["stationary"]) {
        os << "  pi(" << e["state"].get<std::string>() << ") = ";
        if (e["pi"].is_number()) os << fmt(e["pi"].get<double>());
        else os << e["pi"].get<std::string>();
        if (e.contains("exact")) os << "  [" << e["exact"].get<std::string>() << "]";
        os << "\n";
    }
    emit(rc, "validate", doc, os.str(), {});
    return 0;
}

int cmd_simulate(const RunConfig& rc, bool trajectory) {
    Model m = load_model(rc);
    State a = anchor_of(m, rc);
    std::uint64_t seed = require_seed(rc);
    std::int64_t horizon = parse_count(rc.horizon, "--horizon", 2);
    ojson doc = envelope("simulate", config_json(rc, m, a));
    doc["model"] = model_json(m);
    if (trajectory) {
        Trajectory t = run_trajectory(m, a, horizon, seed);
        CycleStats cs = cycle_decompose(t, a);
        doc["trajectory"] = {{"horizon", t.horizon()}, {"final_s", num(t.S(t.horizon()))}};
        doc["cycle_stats"] = cycle_stats_json(cs);
        std::string csv = trajectory_csv(m, t);
        std::ostringstream os;
        os << "trajectory of " << horizon << " steps from " << m.label(a) << ", S_n = " << fmt(t.S(t.horizon()))
           << ", " << cs.size() << " complete cycles\n";
        emit(rc, "simulate", doc, os.str(), {{"trajectory.csv", csv}});
        return 0;
    }
    CampaignConfig cc;
    cc.start = a;
    cc.anchor = a;
    cc.horizon = horizon;
    cc.trials = parse_count(rc.trials, "--trials");
    cc.seed = seed;
    cc.workers = rc.workers;
    cc.x_grid = rc.x_grid;
    CampaignResult res = run_campaign(m, cc);
    doc["campaign"] = campaign_summary_json(res);
    std::ostringstream os;
    os << "campaign: " << res.trials.size() << " trials, horizon " << horizon << ", anchor " << m.label(a) << "\n";
    os << "mean S_n = " << fmt(doc["campaign"]["mean_final_s"].get<double>()) << ", complete cycles "
       << res.cycles.size() << "\n\n";
    os << "x         stopping time   mean          se            censored\n";
    for (const auto& lv : doc["campaign"]["levels"]) {
        for (const char* id : {"sigma_gt", "sigma_le", "rho", "N", "sigma_min", "sigma_bar_gt", "tau_nu"}) {
            const auto& e = lv[id];
            auto val = [](const ojson& v) { return v.is_number() ? fmt(v.get<double>()) : v.get<std::string>(); };
            std::string row = val(lv["x"]);
            row.resize(10, ' ');
            std::string name = id;
            name.resize(16, ' ');
            std::string mean = val(e["estimate"]);
            mean.resize(14, ' ');
            std::string se = val(e["se"]);
            se.resize(14, ' ');
            os << row << name << mean << se << e["censored_count"].get<std::size_t>() << "\n";
        }
    }
    emit(rc, "simulate", doc, os.str(), {{"campaign.csv", campaign_csv(res)}});
    return 0;
}

SpitzerSeries spitzer_auto(const Model& m, State a, double x, double alpha, const ClassifyConfig& cfg) {
    SpitzerOptions so;
    so.seed = cfg.seed;
    so.workers = cfg.workers;
    so.trials = cfg.trials;
    if (m.exact_kernels()) {
        try {
            so.mode = "exact";
            return spitzer_series(m, a, x, alpha, cfg.series_n, so);
        } catch (const LatticeBlowup&) {
        }
    }
    so.mode = "mc";
    return spitzer_series(m, a, x, alpha, std::max(cfg.series_n, cfg.horizon), so);
}

int cmd_criteria(const RunConfig& rc) {
    Model m = load_model(rc);
    State a = anchor_of(m, rc);
    ClassifyConfig cfg = classify_config(rc);
    Samples s = collect_samples(m, a, cfg);
    ojson doc = envelope("criteria", config_json(rc, m, a));
    doc["model"] = model_json(m);
    doc["cycle_stats"] = cycle_stats_json(s.pool);
    doc["truncated_means"] = truncated_means_json(s.table, s.J);

    ojson jt = ojson::array();
    TruncatedMean tm(s.pool.sum, s.pool.exact ? s.pool.weight : std::vector<double>(s.pool.size(), 1.0));
    for (double x : rc.x_grid) {
        ojson e;
        e["x"] = num(x);
        e["A"] = num(tm.A(x));
        e["J"] = num(eval_J(s.J, x));
        jt.push_back(e);
    }
    doc["J_table"] = jt;

    ojson per_alpha = ojson::array();
    std::vector<ExcursionMeasure> ems;
    std::vector<SpitzerSeries> series;
    std::vector<double> grid = s.table.grid;
    for (double x : rc.x_grid) grid.push_back(x);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double alpha : rc.alpha) {
        ojson e;
        e["alpha"] = num(alpha);
        ojson moments = ojson::array();
        for (Functional f : {Functional::J_D, Functional::J_D_pow, Functional::J_Sneg, Functional::J_Sneg_pow,
                             Functional::D_pow_J_D, Functional::Int_Jalpha_dV, Functional::Int_J_dValpha,
                             Functional::Int_logJ_dV, Functional::Tau_pow, Functional::Tau_log_tau,
                             Functional::Abs_sum, Functional::Abs_sum_excursion})
            moments.push_back(moment_json(moment_functional(f, s.pool, s.J, alpha, cfg.dc)));
        e["moments"] = moments;
        ExcursionMeasure em = excursion_measure(s.pool, alpha, grid);
        e["excursion_measure"] = excursion_json(em);
        ems.push_back(em);
        ojson sp = ojson::array();
        for (double x : rc.x_grid) {
            SpitzerSeries ss = spitzer_auto(m, a, x, alpha, cfg);
            sp.push_back(spitzer_json(ss));
            series.push_back(std::move(ss));
        }
        e["spitzer"] = sp;
        per_alpha.push_back(e);
    }
    doc["alpha"] = per_alpha;
    if (m.finite() && m.exact_kernels()) doc["identities"] = identity_json(identity_checks(m));
    else doc["identities"] = identity_json(identity_checks_mc(m, a, cfg.cycles, cfg.seed, cfg.workers));

    std::ostringstream os;
    os << "model " << m.name() << "  anchor " << m.label(a) << "  cycles " << s.pool.size()
       << (s.pool.exact ? " (exact)" : "") << "\n\n";
    os << "x           A(x)          J(x)\n";
    for (const auto& e : jt) {
        std::string x = fmt(e["x"].get<double>()), A = fmt(e["A"].get<double>());
        x.resize(12, ' ');
        A.resize(14, ' ');
        os << x << A << fmt(e["J"].get<double>()) << "\n";
    }
    os << "\nultimately positive: " << (s.table.ultimately_positive ? "yes" : "no")
       << ", ultimately negative: " << (s.table.ultimately_negative ? "yes" : "no") << "\n";
    for (const auto& e : per_alpha) {
        os << "\nalpha " << fmt(e["alpha"].get<double>()) << "\n";
        for (const auto& mo : e["moments"]) {
            std::string id = mo["id"].get<std::string>();
            id.resize(18, ' ');
            std::string est = mo["estimate"].is_number() ? fmt(mo["estimate"].get<double>())
                                                         : mo["estimate"].get<std::string>();
            est.resize(14, ' ');
            os << "  " << id << est << mo["status"].get<std::string>()
               << (mo["divergence_flag"].get<bool>() ? "  (divergence flag)" : "") << "\n";
        }
        for (const auto& sp : e["spitzer"])
            os << "  spitzer x=" << fmt(sp["x"].get<double>()) << " (" << sp["mode"].get<std::string>()
               << "): " << sp["test"]["converges"].get<std::string>() << "\n";
    }
    emit(rc, "criteria", doc, os.str(),
         {{"criteria_plot.csv", criteria_plot_csv(s.table, s.J, ems)}, {"spitzer.csv", spitzer_plot_csv(series)}});
    return 0;
}

struct Classified {
    ojson doc;
    std::string table;
    Category category = Category::Inconclusive;
    std::string embedded;
};

Classified classify_model(const Model& m, State a, const ClassifyConfig& cfg) {
    Classified out;
    NullHomologyOptions nho;
    nho.seed = cfg.seed;
    nho.workers = cfg.workers;
    NullHomology nh = null_homology_test(m, a, m.exact_kernels() ? "exact" : "mc", nho);
    out.doc["null_homology"] = null_homology_json(m, nh);
    if (nh.null_homologous) {
        Verdict v;
        v.category = Category::NullHomologous;
        v.nh_class = nh.subclass;
        v.embedded = v.full_walk = v.path = "not-applicable";
        out.doc["verdict"] = verdict_json(v);
        out.category = v.category;
        out.embedded = v.embedded;
        out.table = "category              NullHomologous\nnull-homology class   " + nh.subclass + "\n";
        return out;
    }
    Samples s = collect_samples(m, a, cfg);
    Verdict v = fluctuation_verdict(m, s, cfg);
    Trichotomy t = trichotomy_and_slln(m, s, cfg);
    out.doc["verdict"] = verdict_json(v);
    out.doc["trichotomy"] = trichotomy_json(t);
    out.category = v.category;
    out.embedded = v.embedded;
    out.table = verdict_table(v, t);
    return out;
}

int cmd_classify(const RunConfig& rc, bool dual) {
    Model m0 = load_model(rc);
    Model m = dual ? dual_model(m0) : m0;
    State a = anchor_of(m, rc);
    ClassifyConfig cfg = classify_config(rc);
    ojson doc = envelope("classify", config_json(rc, m0, a));
    doc["config"]["dual"] = dual;
    doc["model"] = model_json(m);
    Classified c = classify_model(m, a, cfg);
    for (auto& [k, v] : c.doc.items()) doc[k] = v;
    std::string csv = "id,value,threshold,status\n";
    for (const auto& e : doc["verdict"]["evidence"])
        csv += e["id"].get<std::string>() + "," + e["value"].dump() + "," + e["threshold"].dump() + "," +
               e["status"].get<std::string>() + "\n";
    emit(rc, "classify", doc, "model " + m.name() + (dual ? " (dual)" : "") + "\n" + c.table,
         {{"classify.csv", csv}});
    return 0;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ','))
        if (!t.empty()) out.push_back(t);
    return out;
}

int cmd_verify(const RunConfig& rc, const std::string& theorems) {
    Model m = load_model(rc);
    State a = anchor_of(m, rc);
    ClassifyConfig cfg = classify_config(rc);
    std::vector<std::string> th = split_list(theorems);
    ojson doc = envelope("verify", config_json(rc, m, a));
    doc["config"]["theorems"] = th;
    doc["model"] = model_json(m);
    Samples s = collect_samples(m, a, cfg);
    ojson reports = ojson::array();
    std::string table, csv = "alpha,suite,condition,status\n";
    std::size_t alarms = 0;
    for (double alpha : rc.alpha) {
        TheoremReport r = theorem_suite(m, s, alpha, cfg, th);
        alarms += r.red_alarms;
        reports.push_back(theorem_report_json(r));
        table += theorem_table(r) + "\n";
        for (const auto& c : r.conditions)
            csv += fmt(alpha) + "," + c.theorem + "," + c.id + "," + to_string(c.status) + "\n";
    }
    doc["reports"] = reports;
    doc["red_alarms"] = alarms;
    emit(rc, "verify", doc, table, {{"verify.csv", csv}});
    return 0;
}

int cmd_zoo_list(const RunConfig& rc) {
    ojson doc = envelope("zoo list", ojson::object());
    ojson list = ojson::array();
    std::ostringstream os;
    for (const auto& e : zoo_catalog()) {
        list.push_back({{"name", e.name}, {"params", e.params}, {"description", e.description}});
        std::string n = e.name, p = e.params;
        n.resize(20, ' ');
        p.resize(24, ' ');
        os << n << p << e.description << "\n";
    }
    doc["models"] = list;
    emit(rc, "zoo_list", doc, os.str(), {});
    return 0;
}

int cmd_zoo_regress(const RunConfig& rc, bool fast, const std::string& expected_path) {
    std::string path = expected_path.empty() ? std::string(MRW_DATA_DIR) + "/zoo_expected.json" : expected_path;
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    ojson exp;
    try {
        exp = ojson::parse(f);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    const ojson& run = exp.at(fast ? "fast" : "full");
    ojson doc = envelope("zoo regress", {{"fast", fast}, {"expected", fs::path(path).filename().string()}});
    ojson results = ojson::array();
    std::size_t mismatches = 0;
    std::ostringstream os;
    for (const auto& e : exp.at("models")) {
        std::string zoo = e.at("zoo").get<std::string>();
        ClassifyConfig cfg;
        cfg.horizon = run.at("horizon").get<std::int64_t>();
        cfg.trials = run.at("trials").get<std::int64_t>();
        cfg.cycles = run.at("cycles").get<std::int64_t>();
        cfg.seed = e.at("seed").get<std::uint64_t>();
        cfg.workers = rc.workers;
        ojson r;
        r["zoo"] = zoo;
        std::vector<std::string> bad;
        auto check = [&](const std::string& what, const std::string& got, const std::string& want) {
            r[what] = got;
            if (got != want) bad.push_back(what + ": expected " + want + ", got " + got);
        };
        try {
            Model m = build_model(zoo_from_string(zoo));
            State a = m.default_anchor();
            Classified c = classify_model(m, a, cfg);
            check("category", to_string(c.category), e.at("category").get<std::string>());
            if (e.contains("embedded")) check("embedded", c.embedded, e["embedded"].get<std::string>());
            if (e.contains("dual")) {
                Model d = dual_model(m);
                Classified cd = classify_model(d, d.default_anchor(), cfg);
                check("dual", to_string(cd.category), e["dual"].get<std::string>());
            }
            if (e.contains("sigma_gt0")) {
                CampaignConfig cc;
                cc.start = cc.anchor = a;
                cc.horizon = cfg.horizon;
                cc.trials = cfg.trials;
                cc.seed = cfg.seed;
                cc.workers = cfg.workers;
                cc.x_grid = {0.0};
                cc.keep_cycles = false;
                CampaignResult res = run_campaign(m, cc);
                double lo = INFINITY, hi = -INFINITY;
                for (const auto& t : res.trials) {
                    lo = std::min(lo, t.stops[0].sigma_gt.value);
                    hi = std::max(hi, t.stops[0].sigma_gt.value);
                }
                double want = e["sigma_gt0"].get<double>();
                check("sigma_gt0", lo == hi ? fmt(lo) : fmt(lo) + ".." + fmt(hi), fmt(want));
            }
            if (e.contains("suites")) {
                Samples s = collect_samples(m, a, cfg);
                std::size_t alarms = 0;
                for (const auto& [alpha_s, conds] : e["suites"].items()) {
                    double alpha = std::stod(alpha_s);
                    TheoremReport tr = theorem_suite(m, s, alpha, cfg);
                    alarms += tr.red_alarms;
                    for (const auto& [id, want] : conds.items()) {
                        const Condition* cond = tr.find(id);
                        // an expectation may differ between the fast and the full run
                        const ojson& w = want.is_object() ? want.at(fast ? "fast" : "full") : want;
                        check(id + "@" + alpha_s, cond ? to_string(cond->status) : "missing", w.get<std::string>());
                    }
                }
                check("red_alarms", std::to_string(alarms), "0");
            }
        } catch (const Error& ex) {
            std::string want = e.value("error", "");
            r["error"] = ex.kind();
            if (ex.kind() != want) bad.push_back("unexpected " + std::string(ex.what()));
        }
        r["mismatches"] = bad;
        results.push_back(r);
        mismatches += bad.size();
        std::string n = zoo;
        n.resize(34, ' ');
        os << n << (bad.empty() ? "ok" : "MISMATCH") << "\n";
        for (const auto& b : bad) os << "    " << b << "\n";
    }
    doc["results"] = results;
    doc["mismatches"] = mismatches;
    os << "\n" << mismatches << " mismatches\n";
    emit(rc, "zoo_regress", doc, os.str(), {});
    return mismatches ? kRegressMismatch : 0;
}

void add_model_flags(CLI::App* c, RunConfig& rc) {
    c->add_option("-m,--model", rc.model_path, "model file (JSON)");
    c->add_option("--zoo", rc.zoo, "zoo model, e.g. petal-flower:p0=zipf2 or \"petal-flower --p0 zipf2\"");
    c->add_option("--anchor", rc.anchor, "anchor state label (default: the model's own)");
    c->allow_extras();
}

void add_run_flags(CLI::App* c, RunConfig& rc) {
    c->add_option("--horizon", rc.horizon, "path length per trial")->capture_default_str();
    c->add_option("--trials", rc.trials, "trials per campaign (1e4 accepted)")->capture_default_str();
    c->add_option("--cycles", rc.cycles, "sampled return cycles")->capture_default_str();
    c->add_option("--alpha", rc.alpha, "alpha values, comma separated")->delimiter(',')->capture_default_str();
    c->add_option("--x-grid,--x", rc.x_grid, "levels x, comma separated")->delimiter(',')->capture_default_str();
    c->add_option("--seed", rc.seed, "master seed (required)");
    c->add_option("--workers", rc.workers, "worker threads for campaigns (0: all cores)")->check(CLI::NonNegativeNumber);
}

void add_output_flags(CLI::App* c, RunConfig& rc) {
    c->add_option("--out", rc.out, "output directory (default: $MRW_OUT_DIR)");
    c->add_option("--format", rc.format, "stdout format")
        ->check(CLI::IsMember({"table", "json", "csv"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov random walk fluctuation laboratory"};
    app.footer(kExitCodes);
    app.require_subcommand(1);
    app.set_config("--config", "", "read flags from a TOML/INI file");

    RunConfig rc;
    bool trajectory = false, dual = false, fast = false;
    std::string theorems, expected;

    auto* validate = app.add_subcommand("validate", "check a model and print its stationary law");
    validate->add_option("spec", rc.model_path, "model file");
    add_model_flags(validate, rc);
    add_output_flags(validate, rc);

    auto* simulate = app.add_subcommand("simulate", "run a seeded campaign, or one trajectory");
    add_model_flags(simulate, rc);
    add_run_flags(simulate, rc);
    add_output_flags(simulate, rc);
    simulate->add_flag("--trajectory", trajectory, "emit a single path instead of a campaign");

    auto* criteria = app.add_subcommand("criteria", "truncated means, J, moment functionals, Spitzer series");
    add_model_flags(criteria, rc);
    add_run_flags(criteria, rc);
    add_output_flags(criteria, rc);

    auto* classify = app.add_subcommand("classify", "fluctuation type and rate");
    add_model_flags(classify, rc);
    add_run_flags(classify, rc);
    add_output_flags(classify, rc);
    classify->add_flag("--dual", dual, "classify the time-reversed model");

    auto* verify = app.add_subcommand("verify", "evaluate the theorem suites and their implication graph");
    add_model_flags(verify, rc);
    add_run_flags(verify, rc);
    add_output_flags(verify, rc);
    verify->add_option("--theorems", theorems,
                       "suites, comma separated: divergence, last-exit, spitzer-alpha, occupation, chains, minimum, "
                       "finite-state, slln, post-passage, passage-solidarity (default: all)");

    auto* zoo = app.add_subcommand("zoo", "model zoo");
    zoo->require_subcommand(1);
    auto* zoo_list = zoo->add_subcommand("list", "list the shipped models");
    add_output_flags(zoo_list, rc);
    auto* zoo_regress = zoo->add_subcommand("regress", "check every zoo model against the expected-behavior table");
    zoo_regress->add_flag("--fast", fast, "reduced trials");
    zoo_regress->add_option("--expected", expected, "expectation table (default: the shipped one)");
    zoo_regress->add_option("--workers", rc.workers, "worker threads")->check(CLI::NonNegativeNumber);
    add_output_flags(zoo_regress, rc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ConfigError("").code();
    }

    try {
        for (auto* sub : {validate, simulate, criteria, classify, verify}) {
            if (!sub->parsed()) continue;
            for (const auto& x : sub->remaining()) {
                if (rc.zoo.empty()) throw ConfigError("unexpected argument '" + x + "'");
                rc.zoo_extra.push_back(x);
            }
        }
        if (validate->parsed() && !rc.zoo.empty() && validate->get_option("spec")->count()) {
            // a bare value after --zoo NAME --key belongs to the zoo parameters
            rc.zoo_extra.push_back(rc.model_path);
            rc.model_path.clear();
        }
        if (validate->parsed()) return cmd_validate(rc);
        if (simulate->parsed()) return cmd_simulate(rc, trajectory);
        if (criteria->parsed()) return cmd_criteria(rc);
        if (classify->parsed()) return cmd_classify(rc, dual);
        if (verify->parsed()) return cmd_verify(rc, theorems);
        if (zoo_list->parsed()) return cmd_zoo_list(rc);
        if (zoo_regress->parsed()) return cmd_zoo_regress(rc, fast, expected);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code();
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ConfigError("").code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}
