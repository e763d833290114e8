#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tenfact {

/// bench sweep configuration; every (d, k, eps, method) combination is a cell.
struct BenchConfig {
    std::vector<int> dims;
    std::vector<int> ranks;
    std::vector<double> epsilons;
    std::vector<std::string> methods;  // ojd0 | ojd1 | nojd0 | nojd1 | tpm | als
    int trials = 1;
    std::uint64_t seed = 0;
    std::string gen_mode = "ortho";  // ortho | nonortho
    int projections = 0;             // L0 / L override for the ojd/nojd methods
    double mu_max = 0.7;             // nonortho generation bound
    double cond_max = 1e6;           // nonortho generation bound
    int threads = 1;
    /// When true, rows carry measured wall-clock runtime_ms. Off by default:
    /// output is byte-identical across runs only with the placeholder 0.
    bool timings = false;

    void validate() const;  // throws std::invalid_argument
};

inline constexpr const char* kBenchCsvHeader =
    "trial,seed,d,k,eps,method,mode,error,objective,rho_max,mu,sweeps,runtime_ms,status";

/// Runs the sweep and streams CSV: one row per trial plus one summary row per
/// cell (error column = median aligned error over ok trials, objective column
/// = mean). Trials run on a work pool; rows are emitted in deterministic
/// order regardless of scheduling. Per-trial failures become status rows.
void run_bench(const BenchConfig& config, std::ostream& os);

}  // namespace tenfact
