#include "bfmix/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "bfmix/bayes_factor.hpp"
#include "bfmix/calibration.hpp"
#include "bfmix/mixture.hpp"
#include "bfmix/quadrature.hpp"

namespace bfmix::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Dataset parse_data(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> values;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(first, last - first + 1);
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
        if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(x)) {
            throw DataParseError("line " + std::to_string(lineno) + ": cannot parse '" + token + "' as a real number",
                                 lineno);
        }
        values.push_back(x);
    }
    return Dataset(std::move(values));
}

Dataset read_data_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open data file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_data(buf.str());
    } catch (const DataParseError& e) {
        throw DataParseError(path.string() + ": " + e.what(), e.line());
    }
}

namespace {

class PathologySignal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::string out_dir;
    std::string config;
    unsigned threads = 1;
};

void add_common(CLI::App& sub, Common& c, bool with_seed) {
    if (with_seed) sub.add_option("--seed", c.seed, "Master seed");
    sub.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--out", c.out_dir, "Output directory");
    sub.add_option("--config", c.config, "Flat JSON file of flag values; flags override it");
}

std::string number_text(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string cell_text(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_number_float()) return number_text(v.get<double>());
    if (v.is_number()) return v.dump();
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return "";
}

std::string render(const std::vector<Json>& rows, const std::string& format) {
    if (format == "json") {
        const Json doc = rows.size() == 1 ? rows.front() : Json(rows);
        return doc.dump(2) + "\n";
    }
    std::string out;
    if (rows.empty()) return out;
    std::vector<std::string> keys;
    for (const auto& [k, v] : rows.front().items()) {
        if (!v.is_array() && !v.is_object()) keys.push_back(k);
    }
    for (std::size_t i = 0; i < keys.size(); ++i) out += (i ? "," : "") + keys[i];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            out += (i ? "," : "") + (row.contains(keys[i]) ? cell_text(row[keys[i]]) : std::string());
        }
        out += '\n';
    }
    return out;
}

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void emit(const std::vector<Json>& rows, const Common& c, const std::string& command, std::ostream& out) {
    const std::string text = render(rows, c.format);
    if (!c.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(c.out_dir, ec);
        write_file_atomic(fs::path(c.out_dir) / (command + "." + c.format), text);
    }
    out << text;
}

// Values from --config are injected as flags right after the subcommand,
// skipping any flag already present on the command line.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    Json cfg;
    try {
        cfg = Json::parse(in);
    } catch (const Json::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a flat JSON object");

    auto present = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    std::vector<std::string> injected;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || present(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back(flag);
            continue;
        }
        std::string text;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (value[i].is_object() || value[i].is_array()) throw UsageError("config key " + key + " is not flat");
                text += (i ? "," : "") + (value[i].is_string() ? value[i].get<std::string>() : value[i].dump());
            }
        } else if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_number()) {
            text = value.dump();
        } else {
            throw UsageError("config key " + key + " is not flat");
        }
        injected.push_back(flag);
        injected.push_back(text);
    }
    const auto pos = (!args.empty() && args.front().rfind("-", 0) != 0) ? args.begin() + 1 : args.begin();
    args.insert(pos, injected.begin(), injected.end());
    return args;
}

struct Ttest {
    std::optional<double> t;
    std::optional<int> n;
    std::string data;

    TTestProblem resolve(double gamma) const {
        if (!data.empty()) {
            if (t || n) throw UsageError("give either --data or --t/--n, not both");
            return TTestProblem::from_data(read_data_file(data), gamma);
        }
        if (!t || !n) throw UsageError("need --data or both --t and --n");
        return {*t, *n, gamma};
    }
};

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayes factors and mixture-estimation tests for a normal mean"};
    app.name("bfmix");
    app.require_subcommand(1);

    Common common;

    // bf
    std::string bf_data;
    double bf_weight = 0.5;
    auto* bf = app.add_subcommand("bf", "Closed-form Bayes factor N(0,1) vs N(mu,1), mu ~ N(0,1)");
    bf->add_option("--data", bf_data, "Data file (one real per line)")->required();
    bf->add_option("--prior-weight", bf_weight, "Prior probability of the null");
    add_common(*bf, common, false);

    // ttest-bf
    Ttest tt;
    double tt_gamma = 0.0;
    auto* ttbf = app.add_subcommand("ttest-bf", "t-test Bayes factor with a Cauchy(0, gamma) effect-size prior");
    ttbf->add_option("--t", tt.t, "t statistic");
    ttbf->add_option("--n", tt.n, "Sample size");
    ttbf->add_option("--data", tt.data, "Data file; t and n are computed from it");
    ttbf->add_option("--gamma", tt_gamma, "Cauchy prior scale (no default)")->required();
    add_common(*ttbf, common, false);

    // sweep-gamma
    Ttest sw;
    std::vector<double> sw_gammas;
    auto* sweep = app.add_subcommand("sweep-gamma", "t-test Bayes factor across Cauchy scales");
    sweep->add_option("--t", sw.t, "t statistic");
    sweep->add_option("--n", sw.n, "Sample size");
    sweep->add_option("--data", sw.data, "Data file");
    sweep->add_option("--gammas", sw_gammas, "Increasing Cauchy scales (comma separated)")
        ->required()
        ->delimiter(',');
    add_common(*sweep, common, false);

    // sd
    std::string sd_data;
    std::optional<double> sd_null_density;
    auto* sd = app.add_subcommand("sd", "Savage-Dickey ratio for N(0,1) vs N(mu,1)");
    sd->add_option("--data", sd_data, "Data file")->required();
    sd->add_option("--null-density", sd_null_density, "Override the prior density value at mu = 0");
    add_common(*sd, common, false);

    // mixtest
    std::string mx_data;
    double mx_a0 = 1.0;
    int mx_iter = 10000, mx_burn = 2000, mx_thin = 5;
    auto* mixtest = app.add_subcommand("mixtest", "Posterior of the mixture weight alpha by MH");
    mixtest->add_option("--data", mx_data, "Data file (may be empty)")->required();
    mixtest->add_option("--a0", mx_a0, "Beta(a0, a0) prior shape");
    mixtest->add_option("--iterations", mx_iter, "Retained MH iterations");
    mixtest->add_option("--burn-in", mx_burn, "Discarded warm-up sweeps");
    mixtest->add_option("--thin", mx_thin, "Sweeps per retained draw");
    add_common(*mixtest, common, true);

    // bootstrap
    std::string bs_data;
    double bs_a0 = 1.0;
    int bs_b = 100, bs_iter = 10000, bs_burn = 2000, bs_thin = 5;
    auto* boot = app.add_subcommand("bootstrap", "Parametric-bootstrap calibration of the posterior mean of alpha");
    boot->add_option("--data", bs_data, "Data file")->required();
    boot->add_option("--a0", bs_a0, "Beta(a0, a0) prior shape");
    boot->add_option("--b", bs_b, "Replicas per reference model");
    boot->add_option("--iterations", bs_iter, "Retained MH iterations");
    boot->add_option("--burn-in", bs_burn, "Discarded warm-up sweeps");
    boot->add_option("--thin", bs_thin, "Sweeps per retained draw");
    boot->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
    add_common(*boot, common, true);

    // fig1
    Fig1Settings fs1;
    bool paper_scale = false;
    int f_iter = 10000, f_burn = 2000;
    auto* fig1 = app.add_subcommand("fig1", "Replicate the mixture-weight experiment on N(0, sigma^2) data");
    auto* o_sizes = fig1->add_option("--sizes", fs1.sizes, "Sample sizes")->delimiter(',');
    auto* o_reps = fig1->add_option("--replicas", fs1.replicas, "Replicas per size");
    fig1->add_option("--a0", fs1.a0_list, "Beta shapes")->delimiter(',');
    auto* o_sigma = fig1->add_option("--sigma", fs1.dgp_sigma, "Data standard deviation");
    auto* o_iter = fig1->add_option("--iterations", f_iter, "Retained MH iterations");
    fig1->add_option("--burn-in", f_burn, "Discarded warm-up sweeps");
    fig1->add_option("--thin", fs1.mh.thin, "Sweeps per retained draw");
    fig1->add_flag("--paper-scale", paper_scale, "Sizes 10,40,100,500; 100 replicas; sigma 0.7; 1e4 iterations");
    fig1->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
    add_common(*fig1, common, true);

    // plot
    std::string plot_csv;
    auto* plot = app.add_subcommand("plot", "Draw the figures from a fig1 records CSV");
    plot->add_option("--csv", plot_csv, "records.csv written by fig1")->required();
    add_common(*plot, common, false);

    try {
        std::vector<std::string> args = apply_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const UsageError& e) {
        err << "bfmix: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*bf) {
            const Dataset data = read_data_file(bf_data);
            const BfResult r = bf_normal_point_null(data, bf_weight);
            Json row;
            row["n"] = data.size();
            row["log_bf"] = r.log_bf_null_vs_alt;
            row["bf"] = r.bf_null_vs_alt();
            row["prior_weight_null"] = r.prior_weight_null;
            row["posterior_prob_null"] = r.posterior_prob_null;
            emit({row}, common, "bf", out);
        } else if (*ttbf) {
            const TTestProblem p = tt.resolve(tt_gamma);
            const double lbf = log_bf10_ttest(p);
            Json row;
            row["t"] = p.t;
            row["n"] = p.n;
            row["gamma"] = p.gamma;
            row["log_bf10"] = lbf;
            row["bf10"] = std::exp(lbf);
            emit({row}, common, "ttest-bf", out);
        } else if (*sweep) {
            const TTestProblem p = sw.resolve(1.0);
            const auto table = sweep_gamma(p.t, p.n, sw_gammas);
            std::vector<Json> rows;
            bool failed = false;
            for (const auto& r : table) {
                Json row;
                row["gamma"] = r.gamma;
                row["log_bf10"] = r.log_bf10 ? num(*r.log_bf10) : Json(nullptr);
                row["bf10"] = r.log_bf10 ? num(std::exp(*r.log_bf10)) : Json(nullptr);
                row["status"] = r.log_bf10 ? std::string("ok") : "failed: " + r.error;
                failed = failed || !r.log_bf10;
                rows.push_back(row);
            }
            emit(rows, common, "sweep-gamma", out);
            if (failed) return kNumerical;
        } else if (*sd) {
            const Dataset data = read_data_file(sd_data);
            PriorRepresentative prior = PriorRepresentative::standard_normal();
            if (sd_null_density) prior = prior.with_value_at_null(*sd_null_density);
            const SavageDickeyResult r = savage_dickey_normal(data, prior);
            Json row;
            row["n"] = data.size();
            row["ratio"] = r.ratio ? num(*r.ratio) : Json(nullptr);
            row["posterior_density_at_null"] = r.posterior_density_at_null;
            row["prior_density_at_null"] = r.prior_density_at_null;
            row["closed_form_bf"] = bf_normal_point_null(data, 0.5).bf_null_vs_alt();
            row["status"] = r.undefined() ? "undefined" : "ok";
            emit({row}, common, "sd", out);
            if (r.undefined()) throw PathologySignal(r.diagnostic);
        } else if (*mixtest) {
            const Dataset data = read_data_file(mx_data);
            MhConfig cfg;
            cfg.iterations = mx_iter;
            cfg.burn_in = mx_burn;
            cfg.thin = mx_thin;
            cfg.stream = RandomStream(common.seed, 0);
            const MixtureProblem problem = MixtureProblem::normal_mean_vs_point_null(mx_a0);
            const Chain chain = run_mh(data, problem, cfg);
            const PosteriorSummary s = summarize(chain);
            Json row;
            row["n"] = data.size();
            row["a0"] = mx_a0;
            row["iterations"] = mx_iter;
            row["seed"] = common.seed;
            row["mean_alpha"] = s.mean_alpha;
            row["median_alpha"] = s.median_alpha;
            row["q05_alpha"] = s.q05_alpha;
            row["q95_alpha"] = s.q95_alpha;
            row["ess_alpha"] = num(s.ess_alpha.value_or(NAN));
            row["accept_alpha"] = chain.accept_rate_alpha;
            row["accept_mu"] = chain.accept_rate_mu;
            emit({row}, common, "mixtest", out);
        } else if (*boot) {
            const Dataset data = read_data_file(bs_data);
            MhConfig cfg;
            cfg.iterations = bs_iter;
            cfg.burn_in = bs_burn;
            cfg.thin = bs_thin;
            cfg.stream = RandomStream(common.seed, 0);
            const BootstrapReport r = parametric_bootstrap(
                data, MixtureProblem::normal_mean_vs_point_null(bs_a0), bs_b, cfg, common.threads);
            Json row;
            row["n"] = data.size();
            row["a0"] = bs_a0;
            row["b"] = r.b;
            row["observed_mean_alpha"] = r.observed_mean_alpha;
            row["ref_quantile_under_f1"] = r.ref_quantile_under_f1;
            row["ref_quantile_under_f0"] = r.ref_quantile_under_f0;
            row["failed_replicas"] = r.failed_replicas;
            row["reference_under_f1"] = r.reference_under_f1;
            row["reference_under_f0"] = r.reference_under_f0;
            emit({row}, common, "bootstrap", out);
        } else if (*fig1) {
            if (common.out_dir.empty()) throw UsageError("fig1 needs --out DIR");
            if (paper_scale) {
                if (o_sizes->count() || o_reps->count() || o_sigma->count() || o_iter->count()) {
                    throw UsageError("--paper-scale fixes sizes, replicas, sigma and iterations");
                }
                fs1.sizes = {10, 40, 100, 500};
                fs1.replicas = 100;
                fs1.dgp_sigma = 0.7;
                f_iter = 10000;
            }
            fs1.mh.iterations = f_iter;
            fs1.mh.burn_in = f_burn;
            fs1.master_seed = common.seed;
            fs1.threads = common.threads;
            const auto records = replicate_fig1(fs1);
            const auto files = emit_fig1_outputs(records, common.out_dir);
            std::vector<Json> rows;
            for (const auto& f : files) {
                Json row;
                row["file"] = f.string();
                rows.push_back(row);
            }
            const auto failed = std::count_if(records.begin(), records.end(), [](const Fig1Record& r) { return !r.ok(); });
            if (failed) err << "bfmix: " << failed << " of " << records.size() << " records failed\n";
            out << render(rows, common.format);
        } else if (*plot) {
            if (common.out_dir.empty()) throw UsageError("plot needs --out DIR");
            std::ifstream in(plot_csv, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open " + plot_csv);
            std::ostringstream buf;
            buf << in.rdbuf();
            const auto files = emit_fig1_outputs(parse_fig1_csv(buf.str()), common.out_dir);
            std::vector<Json> rows;
            for (const auto& f : files) {
                Json row;
                row["file"] = f.string();
                rows.push_back(row);
            }
            out << render(rows, common.format);
        }
    } catch (const UsageError& e) {
        err << "bfmix: " << e.what() << "\n";
        return kUsage;
    } catch (const PathologySignal& e) {
        err << "bfmix: " << e.what() << "\n";
        return kPathology;
    } catch (const NumericalError& e) {
        err << "bfmix: numerical failure: " << e.what() << " (error bound " << e.error_bound() << ")\n";
        return kNumerical;
    } catch (const InitializationError& e) {
        err << "bfmix: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::domain_error& e) {
        err << "bfmix: " << e.what() << "\n";
        return kDomain;
    } catch (const std::invalid_argument& e) {
        err << "bfmix: " << e.what() << "\n";
        return kDomain;
    } catch (const std::exception& e) {
        err << "bfmix: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}

}  // namespace bfmix::cli
