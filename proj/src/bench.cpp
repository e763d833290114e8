#include "tenfact/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tenfact/analysis.hpp"
#include "tenfact/baselines.hpp"
#include "tenfact/factorize.hpp"
#include "tenfact/models.hpp"
#include "tenfact/rng.hpp"
#include "tenfact/tensor_io.hpp"

namespace tenfact {

namespace {

const std::vector<std::string> kMethods = {"ojd0", "ojd1", "nojd0", "nojd1", "tpm", "als"};

struct Cell {
    int d, k;
    double eps;
    std::string method;
};

struct TrialOutcome {
    std::uint64_t seed = 0;
    double error = std::numeric_limits<double>::quiet_NaN();
    double objective = 0.0;
    double rho_max = 0.0;
    double mu = 0.0;
    long sweeps = 0;
    long runtime_ms = 0;
    std::string status = "ok";
};

std::string scrub(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

std::uint64_t mix_stream(std::uint64_t seed, const Cell& cell, int trial,
                         bool include_method) {
    Rng r(seed);
    Rng s = r.derive(static_cast<std::uint64_t>(cell.d));
    s = s.derive(static_cast<std::uint64_t>(cell.k));
    s = s.derive(std::bit_cast<std::uint64_t>(cell.eps));
    if (include_method) {
        std::uint64_t mh = 1469598103934665603ULL;  // FNV-1a over the method name
        for (char c : cell.method) mh = (mh ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
        s = s.derive(mh);
    }
    s = s.derive(static_cast<std::uint64_t>(trial));
    return s.next_u64();
}

TrialOutcome run_trial(const BenchConfig& config, const Cell& cell, int trial) {
    TrialOutcome out;
    // the model (and its noise) is shared by every method in the same
    // (d, k, eps) family so methods compare on identical instances
    const std::uint64_t model_seed = mix_stream(config.seed, cell, trial, false);
    const std::uint64_t method_seed = mix_stream(config.seed, cell, trial, true);
    out.seed = method_seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Rng model_rng(model_seed);
        CPModel truth =
            config.gen_mode == "nonortho"
                ? random_nonorthogonal_model(cell.d, cell.k, config.mu_max,
                                             config.cond_max, model_rng)
                : random_orthogonal_model(cell.d, cell.k, model_rng);
        Tensor3 observed = cp_to_tensor(truth);
        if (cell.eps > 0.0)
            observed = add_noise(observed, NoiseSpec{cell.eps, model_seed,
                                                     NoiseNormalization::OperatorEstimate});

        CPModel estimate;
        if (cell.method == "tpm") {
            TpmResult r = tensor_power_method(observed, cell.k, 10, 100, method_seed);
            estimate = r.model;
            out.mu = incoherence(estimate.A);
        } else if (cell.method == "als") {
            AlsResult r = als(observed, cell.k, 100, method_seed);
            estimate = r.model;
            out.objective = r.objective_trace.empty() ? 0.0 : r.objective_trace.back();
            out.mu = incoherence(estimate.A);
        } else {
            FactorizeOptions opts;
            opts.rank = cell.k;
            opts.seed = method_seed;
            opts.mode = cell.method.front() == 'n' ? FactorizeMode::NonOrthogonal
                                                   : FactorizeMode::Orthogonal;
            opts.plugin = cell.method.back() == '1';
            opts.projections = config.projections;
            FactorizationReport report = two_stage_factorize(observed, opts);
            estimate = report.estimate;
            out.objective = opts.plugin ? report.diagnostics.objective1
                                        : report.diagnostics.objective0;
            out.rho_max = report.diagnostics.rho_max;
            out.mu = report.diagnostics.mu;
            out.sweeps = report.stage0.sweeps +
                         (report.stage1 ? report.stage1->sweeps : 0);
        }
        out.error = align_factors(truth, estimate).mean_error;
    } catch (const std::exception& e) {
        out.status = scrub(e.what());
    }
    if (config.timings)
        out.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    return out;
}

void write_row(std::ostream& os, const std::string& trial_label, std::uint64_t seed,
               const Cell& cell, const std::string& mode, const TrialOutcome& t) {
    os << trial_label << ',' << seed << ',' << cell.d << ',' << cell.k << ','
       << format_value(cell.eps) << ',' << cell.method << ',' << mode << ','
       << format_value(t.error) << ',' << format_value(t.objective) << ','
       << format_value(t.rho_max) << ',' << format_value(t.mu) << ',' << t.sweeps << ','
       << t.runtime_ms << ',' << t.status << '\n';
}

}  // namespace

void BenchConfig::validate() const {
    if (dims.empty() || ranks.empty() || epsilons.empty() || methods.empty())
        throw std::invalid_argument("bench: dims, ranks, epsilons and methods must be nonempty");
    if (trials < 1) throw std::invalid_argument("bench: trials must be >= 1");
    if (threads < 1) throw std::invalid_argument("bench: threads must be >= 1");
    if (gen_mode != "ortho" && gen_mode != "nonortho")
        throw std::invalid_argument("bench: gen-mode must be ortho or nonortho");
    for (const std::string& m : methods)
        if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
            throw std::invalid_argument("bench: unknown method '" + m + "'");
    for (double e : epsilons)
        if (e < 0.0 || !std::isfinite(e))
            throw std::invalid_argument("bench: epsilon must be nonnegative");
}

void run_bench(const BenchConfig& config, std::ostream& os) {
    config.validate();
    std::vector<Cell> cells;
    for (int d : config.dims)
        for (int k : config.ranks)
            for (double eps : config.epsilons)
                for (const std::string& m : config.methods)
                    cells.push_back(Cell{d, k, eps, m});

    const int total = static_cast<int>(cells.size()) * config.trials;
    std::vector<TrialOutcome> outcomes(total);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int idx = next.fetch_add(1);
            if (idx >= total) return;
            outcomes[idx] =
                run_trial(config, cells[idx / config.trials], idx % config.trials);
        }
    };
    if (config.threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    os << kBenchCsvHeader << '\n';
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        std::vector<double> ok_errors, ok_objectives, ok_rhos, ok_mus, ok_sweeps;
        long runtime_total = 0;
        for (int t = 0; t < config.trials; ++t) {
            const TrialOutcome& o = outcomes[c * config.trials + t];
            write_row(os, std::to_string(t), o.seed, cell, config.gen_mode, o);
            runtime_total += o.runtime_ms;
            if (o.status == "ok") {
                ok_errors.push_back(o.error);
                ok_objectives.push_back(o.objective);
                ok_rhos.push_back(o.rho_max);
                ok_mus.push_back(o.mu);
                ok_sweeps.push_back(static_cast<double>(o.sweeps));
            }
        }
        TrialOutcome summary;
        summary.error = median(ok_errors);       // summary row: error = median,
        summary.objective = mean(ok_errors);     // objective = mean aligned error
        summary.rho_max = median(ok_rhos);
        summary.mu = median(ok_mus);
        summary.sweeps =
            ok_sweeps.empty() ? 0 : static_cast<long>(std::llround(median(ok_sweeps)));
        summary.runtime_ms = runtime_total;
        summary.status = "summary";
        write_row(os, "summary", config.seed, cell, config.gen_mode, summary);
    }
}

}  // namespace tenfact
