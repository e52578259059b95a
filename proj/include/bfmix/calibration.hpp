#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bfmix/mixture.hpp"

namespace bfmix {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// is processed exactly once; results must be written to per-index slots.
/// threads == 0 selects the hardware concurrency.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

struct BootstrapReport {
    double observed_mean_alpha = 0.0;
    /// Mid-rank position of the observed value among replicas simulated
    /// under f1 (resp. f0).
    double ref_quantile_under_f1 = 0.0;
    double ref_quantile_under_f0 = 0.0;
    int b = 0;
    std::vector<double> reference_under_f1;
    std::vector<double> reference_under_f0;
    int failed_replicas = 0;
};

/// Mid-rank empirical quantile: (#{ref < x} + #{ref == x} / 2) / |ref|.
double midrank_quantile(double x, const std::vector<double>& reference);

/// Dataset of size n simulated from one pure component. A free mean is
/// drawn from its conjugate posterior given `observed`.
Dataset simulate_under_component(const ComponentModel& component, const Dataset& observed,
                                 std::size_t n, RandomStream& rng);

/// Locates the observed posterior mean of alpha within reference
/// distributions simulated under each pure model. Throws std::runtime_error
/// when more than 10% of the replicas fail.
BootstrapReport parametric_bootstrap(const Dataset& data, const MixtureProblem& problem, int b,
                                     const MhConfig& config, unsigned threads = 1);

struct Fig1Record {
    int n = 0;
    int replica = 0;
    double a0 = 0.0;
    double mean_alpha = 0.0;
    double median_alpha = 0.0;
    double post_prob_alt = 0.0;
    double ess_alpha = 0.0;
    double accept_alpha = 0.0;
    double accept_mu = 0.0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

struct Fig1Settings {
    std::vector<int> sizes{10, 40, 100, 500};
    int replicas = 100;
    std::vector<double> a0_list{0.1, 0.5, 1.0};
    double dgp_sigma = 0.7;
    /// Iteration settings; the stream is replaced per record.
    MhConfig mh;
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
};

/// Data stream for (n, replica): shared by every a0 of that replica.
RandomStream fig1_data_stream(std::uint64_t master_seed, int replica, int n);
/// Sampler stream for (n, replica, a0 index).
RandomStream fig1_chain_stream(std::uint64_t master_seed, int replica, int n, std::size_t a0_index);

Dataset fig1_dataset(std::uint64_t master_seed, int replica, int n, double dgp_sigma);

/// One record per (n, replica, a0), ordered by n, then replica, then a0.
std::vector<Fig1Record> replicate_fig1(const Fig1Settings& settings);

inline constexpr const char* kFig1CsvHeader =
    "n,replica,a0,mean_alpha,median_alpha,post_prob_alt,ess_alpha,accept_alpha,accept_mu,status";

std::string fig1_csv(const std::vector<Fig1Record>& records);
std::vector<Fig1Record> parse_fig1_csv(const std::string& text);

/// Writes records.csv, one boxplot SVG per a0, and trend.svg into out_dir
/// (created if missing). Files are written to a temporary name and renamed.
/// Returns the written paths. Throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit_fig1_outputs(const std::vector<Fig1Record>& records,
                                                     const std::filesystem::path& out_dir);

/// Atomically replaces `path` with `contents`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// printf("%.9g").
std::string format_g9(double x);

}  // namespace bfmix
