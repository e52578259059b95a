#include "bfmix/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bfmix/bayes_factor.hpp"

namespace bfmix {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
}

double midrank_quantile(double x, const std::vector<double>& reference) {
    if (reference.empty()) throw std::domain_error("empty reference set");
    double below = 0.0;
    for (double r : reference) {
        if (r < x) below += 1.0;
        else if (r == x) below += 0.5;
    }
    return below / static_cast<double>(reference.size());
}

Dataset simulate_under_component(const ComponentModel& component, const Dataset& observed,
                                 std::size_t n, RandomStream& rng) {
    double mean;
    if (component.fixed_mean) {
        mean = *component.fixed_mean;
    } else {
        // mu | x under x_i ~ N(mu, 1), mu ~ N(0, 1).
        const double m = static_cast<double>(observed.size());
        mean = rng.normal(observed.sum() / (m + 1.0), 1.0 / std::sqrt(m + 1.0));
    }
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(mean, 1.0);
    return Dataset(std::move(v));
}

BootstrapReport parametric_bootstrap(const Dataset& data, const MixtureProblem& problem, int b,
                                     const MhConfig& config, unsigned threads) {
    if (b < 20) throw std::domain_error("parametric bootstrap needs b >= 20");
    problem.validate();
    config.validate();

    const RandomStream& base = config.stream;
    BootstrapReport report;
    report.b = b;
    {
        MhConfig cfg = config;
        cfg.stream = base.substream(0);
        report.observed_mean_alpha = summarize(run_mh(data, problem, cfg)).mean_alpha;
    }

    // Task 2k simulates replica k under f1, task 2k+1 under f0.
    const std::size_t tasks = 2 * static_cast<std::size_t>(b);
    std::vector<double> values(tasks, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> failed(tasks, 0);
    parallel_for(tasks, threads, [&](std::size_t task) {
        const bool under_f1 = task % 2 == 0;
        RandomStream replica = base.substream(1 + task);
        RandomStream data_rng = replica.substream(0);
        try {
            const Dataset sim = simulate_under_component(under_f1 ? problem.f1 : problem.f0, data,
                                                         data.size(), data_rng);
            MhConfig cfg = config;
            cfg.stream = replica.substream(1);
            values[task] = summarize(run_mh(sim, problem, cfg)).mean_alpha;
        } catch (const std::exception&) {
            failed[task] = 1;
        }
    });

    for (std::size_t task = 0; task < tasks; ++task) {
        if (failed[task]) {
            ++report.failed_replicas;
            continue;
        }
        (task % 2 == 0 ? report.reference_under_f1 : report.reference_under_f0).push_back(values[task]);
    }
    if (report.failed_replicas * 10 > static_cast<int>(tasks)) {
        throw std::runtime_error("parametric bootstrap: " + std::to_string(report.failed_replicas) +
                                 " of " + std::to_string(tasks) + " replicas failed");
    }
    report.ref_quantile_under_f1 = midrank_quantile(report.observed_mean_alpha, report.reference_under_f1);
    report.ref_quantile_under_f0 = midrank_quantile(report.observed_mean_alpha, report.reference_under_f0);
    return report;
}

RandomStream fig1_data_stream(std::uint64_t master_seed, int replica, int n) {
    return RandomStream(master_seed, static_cast<std::uint64_t>(replica))
        .substream(static_cast<std::uint64_t>(n) << 16);
}

RandomStream fig1_chain_stream(std::uint64_t master_seed, int replica, int n, std::size_t a0_index) {
    return RandomStream(master_seed, static_cast<std::uint64_t>(replica))
        .substream((static_cast<std::uint64_t>(n) << 16) | (a0_index + 1));
}

Dataset fig1_dataset(std::uint64_t master_seed, int replica, int n, double dgp_sigma) {
    RandomStream rng = fig1_data_stream(master_seed, replica, n);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.normal(0.0, dgp_sigma);
    return Dataset(std::move(v));
}

std::vector<Fig1Record> replicate_fig1(const Fig1Settings& s) {
    if (s.sizes.empty() || s.a0_list.empty()) throw std::domain_error("fig1 needs sizes and a0 values");
    if (s.replicas < 1) throw std::domain_error("fig1 needs at least one replica");
    if (!(s.dgp_sigma > 0.0)) throw std::domain_error("fig1 data sigma must be positive");
    for (int n : s.sizes) {
        if (n < 1) throw std::domain_error("fig1 sample sizes must be positive");
    }
    for (double a0 : s.a0_list) {
        if (!(a0 > 0.0)) throw std::domain_error("fig1 a0 values must be positive");
    }
    s.mh.validate();

    const std::size_t na = s.a0_list.size();
    const std::size_t per_n = static_cast<std::size_t>(s.replicas) * na;
    std::vector<Fig1Record> records(s.sizes.size() * per_n);
    parallel_for(records.size(), s.threads, [&](std::size_t idx) {
        const int n = s.sizes[idx / per_n];
        const int replica = static_cast<int>((idx % per_n) / na);
        const std::size_t ai = idx % na;
        Fig1Record& rec = records[idx];
        rec.n = n;
        rec.replica = replica;
        rec.a0 = s.a0_list[ai];
        try {
            const Dataset data = fig1_dataset(s.master_seed, replica, n, s.dgp_sigma);
            MhConfig cfg = s.mh;
            cfg.stream = fig1_chain_stream(s.master_seed, replica, n, ai);
            const Chain chain = run_mh(data, MixtureProblem::normal_mean_vs_point_null(rec.a0), cfg);
            const PosteriorSummary sum = summarize(chain);
            rec.mean_alpha = sum.mean_alpha;
            rec.median_alpha = sum.median_alpha;
            rec.ess_alpha = sum.ess_alpha.value_or(0.0);
            rec.accept_alpha = chain.accept_rate_alpha;
            rec.accept_mu = chain.accept_rate_mu;
            rec.post_prob_alt = bf_normal_point_null(data, 0.5).posterior_prob_alt();
            rec.status = "ok";
        } catch (const std::exception& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            rec.mean_alpha = rec.median_alpha = rec.post_prob_alt = nan;
            rec.ess_alpha = rec.accept_alpha = rec.accept_mu = nan;
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            rec.status = "failed: " + msg;
        }
    });
    return records;
}

}  // namespace bfmix
