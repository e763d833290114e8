// tenfact command line: synthetic tensor generation, factorization of tensor
// files, benchmark sweeps and the topic-model demo.
//
// Exit codes: 0 ok, 2 usage error, 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tenfact/analysis.hpp"
#include "tenfact/baselines.hpp"
#include "tenfact/bench.hpp"
#include "tenfact/factorize.hpp"
#include "tenfact/models.hpp"
#include "tenfact/moments.hpp"
#include "tenfact/rng.hpp"
#include "tenfact/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace tenfact;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory '" + path + "'");
}

// ---- generate ----

struct GenerateArgs {
    int d = 10;
    int k = 2;
    double eps = 0.0;
    std::string mode = "ortho";  // ortho | nonortho | asym | order4
    double mu_max = 0.7;
    double cond_max = 1e6;
    std::string noise_norm = "op";  // op | fro
    std::uint64_t seed = 0;
    std::string out = ".";
};

int cmd_generate(const GenerateArgs& args) {
    if (args.k > args.d) throw UsageError("rank exceeds dimension");
    if (args.k < 1 || args.d < 1) throw UsageError("d and k must be positive");
    if (args.eps < 0.0) throw UsageError("eps must be nonnegative");
    if (args.mode != "ortho" && args.mode != "nonortho" && args.mode != "asym" &&
        args.mode != "order4")
        throw UsageError("mode must be one of ortho|nonortho|asym|order4");
    NoiseSpec noise{args.eps, Rng(args.seed).derive(0x01).next_u64(),
                    args.noise_norm == "fro" ? NoiseNormalization::Frobenius
                                             : NoiseNormalization::OperatorEstimate};

    Rng rng = Rng(args.seed).derive(0x6e);
    ensure_dir(args.out);
    const std::string tensor_path = (fs::path(args.out) / "tensor.tns").string();
    const std::string model_path = (fs::path(args.out) / "truth.cp").string();

    CPModel truth;
    if (args.mode == "order4") {
        truth = random_order4_model(args.d, args.k, rng);
        Tensor4 T = cp_to_tensor4(truth);
        if (args.eps > 0.0) T = add_noise4(T, args.eps, noise.seed);
        save_tensor(tensor_path, T);
    } else {
        if (args.mode == "ortho")
            truth = random_orthogonal_model(args.d, args.k, rng);
        else if (args.mode == "nonortho")
            truth = random_nonorthogonal_model(args.d, args.k, args.mu_max, args.cond_max,
                                               rng);
        else
            truth = random_asymmetric_model(args.d, args.k, args.cond_max, rng);
        Tensor3 T = cp_to_tensor(truth);
        if (args.eps > 0.0) T = add_noise(T, noise);
        save_tensor(tensor_path, T);
    }
    save_cp_model(model_path, truth);
    std::cout << "wrote " << tensor_path << "\nwrote " << model_path << "\n";
    return kExitOk;
}

// ---- factorize ----

struct FactorizeArgs {
    std::string in;
    std::string out = ".";
    std::string method = "ojd1";  // ojd0 | ojd1 | nojd0 | nojd1 | asym | tpm | als
    int k = 2;
    int L0 = 0;
    std::string law = "sphere";  // sphere | gaussian
    std::uint64_t seed = 0;
};

int cmd_factorize(const FactorizeArgs& args) {
    if (args.k < 1) throw UsageError("k must be positive");
    const bool known =
        args.method == "ojd0" || args.method == "ojd1" || args.method == "nojd0" ||
        args.method == "nojd1" || args.method == "asym" || args.method == "tpm" ||
        args.method == "als";
    if (!known) throw UsageError("unknown method '" + args.method + "'");
    if (args.law != "sphere" && args.law != "gaussian")
        throw UsageError("law must be sphere or gaussian");

    std::ifstream is(args.in);
    if (!is) throw IoError("cannot open '" + args.in + "'");
    const int order = peek_tensor_order(is);

    ensure_dir(args.out);
    const std::string model_path = (fs::path(args.out) / "estimate.cp").string();
    const std::string report_path = (fs::path(args.out) / "report.txt").string();

    FactorizeOptions opts;
    opts.rank = args.k;
    opts.projections = args.L0;
    opts.seed = args.seed;
    opts.direction_law =
        args.law == "gaussian" ? DirectionLaw::Gaussian : DirectionLaw::UnitSphere;

    std::ostringstream report;
    report << "method=" << args.method << "\nseed=" << args.seed
           << "\nL0=" << opts.effective_projections() << "\nk=" << args.k << "\n";

    CPModel estimate;
    if (order == 4) {
        Tensor4 T = read_tensor4(is);
        FourthOrderReport r = factorize_fourth_order(T, opts);
        estimate = r.estimate;
        report << "objective0=" << format_value(r.stage_a.diagnostics.objective0)
               << "\npairing_failed=" << (r.stage_a.diagnostics.pairing_failed ? 1 : 0)
               << "\nrank1_degenerate=" << (r.rank1_degenerate ? 1 : 0) << "\n";
    } else {
        Tensor3 T = read_tensor3(is);
        if (args.method == "tpm") {
            TpmResult r = tensor_power_method(T, args.k, 10, 100, args.seed);
            estimate = r.model;
            report << "zero_deflation=" << (r.zero_deflation ? 1 : 0) << "\n";
        } else if (args.method == "als") {
            AlsResult r = als(T, args.k, 100, args.seed);
            estimate = r.model;
            report << "objective="
                   << format_value(r.objective_trace.empty() ? 0.0
                                                             : r.objective_trace.back())
                   << "\nridge_used=" << (r.ridge_used ? 1 : 0) << "\n";
        } else if (args.method == "asym") {
            FactorizationReport r = factorize_asymmetric(T, opts);
            estimate = r.estimate;
            report << "objective0=" << format_value(r.diagnostics.objective0)
                   << "\nrho_max=" << format_value(r.diagnostics.rho_max)
                   << "\nmu=" << format_value(r.diagnostics.mu)
                   << "\nsweeps0=" << r.stage0.sweeps
                   << "\npairing_failed=" << (r.diagnostics.pairing_failed ? 1 : 0)
                   << "\nconverged0=" << (r.stage0.converged ? 1 : 0) << "\n";
        } else {
            opts.mode = args.method.front() == 'n' ? FactorizeMode::NonOrthogonal
                                                   : FactorizeMode::Orthogonal;
            opts.plugin = args.method.back() == '1';
            FactorizationReport r = two_stage_factorize(T, opts);
            estimate = r.estimate;
            report << "objective0=" << format_value(r.diagnostics.objective0)
                   << "\nobjective1=" << format_value(r.diagnostics.objective1)
                   << "\nrho_max=" << format_value(r.diagnostics.rho_max)
                   << "\nmu=" << format_value(r.diagnostics.mu)
                   << "\nsweeps0=" << r.stage0.sweeps
                   << "\nsweeps1=" << (r.stage1 ? r.stage1->sweeps : 0)
                   << "\nconverged0=" << (r.stage0.converged ? 1 : 0) << "\nconverged1="
                   << (r.stage1 && r.stage1->converged ? 1 : 0) << "\n";
        }
    }

    save_cp_model(model_path, estimate);
    std::ofstream ros(report_path);
    if (!ros) throw IoError("cannot open '" + report_path + "' for writing");
    ros << report.str();
    std::cout << report.str();
    return kExitOk;
}

// ---- bench ----

struct BenchArgs {
    BenchConfig config;
    std::string out;
};

int cmd_bench(const BenchArgs& args) {
    try {
        args.config.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (args.out.empty()) {
        run_bench(args.config, std::cout);
        return kExitOk;
    }
    std::ofstream os(args.out, std::ios::binary);
    if (!os) throw IoError("cannot open '" + args.out + "' for writing");
    run_bench(args.config, os);
    if (!os) throw IoError("write failed for '" + args.out + "'");
    return kExitOk;
}

// ---- moments ----

struct MomentsArgs {
    int d = 8;
    int k = 3;
    int n = 10000;
    std::uint64_t seed = 0;
    std::string corpus_out;
};

int cmd_moments(const MomentsArgs& args) {
    if (args.k < 1 || args.k > args.d) throw UsageError("need 1 <= k <= d");
    if (args.n < 1) throw UsageError("n must be positive");
    Rng rng = Rng(args.seed).derive(0x70);
    TopicModel truth = random_topic_model(args.d, args.k, rng);
    Corpus corpus = generate_corpus(truth, args.n, Rng(args.seed).derive(0x71).next_u64());
    if (!args.corpus_out.empty()) {
        std::ofstream os(args.corpus_out);
        if (!os) throw IoError("cannot open '" + args.corpus_out + "' for writing");
        write_corpus(os, corpus);
    }
    FactorizeOptions opts;
    opts.seed = Rng(args.seed).derive(0x72).next_u64();
    TopicEstimate estimate = estimate_topic_model(corpus, args.k, opts);
    TopicErrors err = topic_model_error(truth, estimate.model);
    std::cout << "topic_err=" << format_value(err.topic_l1) << "\n"
              << "prior_err=" << format_value(err.prior_l1) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CP tensor factorization via simultaneous matrix diagonalization"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* sc_gen = app.add_subcommand("generate", "write a synthetic tensor + ground truth");
    sc_gen->add_option("--d", gen.d, "dimension");
    sc_gen->add_option("--k", gen.k, "rank");
    sc_gen->add_option("--eps", gen.eps, "noise level");
    sc_gen->add_option("--mode", gen.mode, "ortho|nonortho|asym|order4");
    sc_gen->add_option("--mu-max", gen.mu_max, "incoherence bound (nonortho)");
    sc_gen->add_option("--cond-max", gen.cond_max, "factor condition bound");
    sc_gen->add_option("--noise-norm", gen.noise_norm, "op|fro noise normalization");
    sc_gen->add_option("--seed", gen.seed, "rng seed");
    sc_gen->add_option("--out", gen.out, "output directory");

    FactorizeArgs fac;
    auto* sc_fac = app.add_subcommand("factorize", "factorize a tensor file");
    sc_fac->add_option("--in", fac.in, "input tensor file")->required();
    sc_fac->add_option("--out", fac.out, "output directory");
    sc_fac->add_option("--method", fac.method, "ojd0|ojd1|nojd0|nojd1|asym|tpm|als");
    sc_fac->add_option("--k", fac.k, "rank");
    sc_fac->add_option("--L0", fac.L0, "stage-0 projection count");
    sc_fac->add_option("--law", fac.law, "sphere|gaussian direction law");
    sc_fac->add_option("--seed", fac.seed, "rng seed");

    BenchArgs bench;
    auto* sc_bench = app.add_subcommand("bench", "benchmark sweep, CSV output");
    sc_bench->add_option("--dims", bench.config.dims, "dimensions")->delimiter(',');
    sc_bench->add_option("--ranks", bench.config.ranks, "ranks")->delimiter(',');
    sc_bench->add_option("--eps", bench.config.epsilons, "noise levels")->delimiter(',');
    sc_bench->add_option("--methods", bench.config.methods, "methods")->delimiter(',');
    sc_bench->add_option("--trials", bench.config.trials, "trials per cell");
    sc_bench->add_option("--seed", bench.config.seed, "master seed");
    sc_bench->add_option("--gen-mode", bench.config.gen_mode, "ortho|nonortho");
    sc_bench->add_option("--L0", bench.config.projections, "projection count override");
    sc_bench->add_option("--mu-max", bench.config.mu_max, "incoherence bound");
    sc_bench->add_option("--cond-max", bench.config.cond_max, "condition bound");
    sc_bench->add_option("--threads", bench.config.threads, "worker threads");
    sc_bench->add_flag("--timings", bench.config.timings,
                       "measure wall-clock runtime_ms (not reproducible)");
    sc_bench->add_option("--out", bench.out, "CSV path (default stdout)");

    MomentsArgs mom;
    auto* sc_mom = app.add_subcommand("moments", "single topic model demo");
    sc_mom->add_option("--d", mom.d, "vocabulary size");
    sc_mom->add_option("--k", mom.k, "topic count");
    sc_mom->add_option("--n", mom.n, "documents");
    sc_mom->add_option("--seed", mom.seed, "rng seed");
    sc_mom->add_option("--corpus-out", mom.corpus_out, "also write the corpus file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (sc_gen->parsed()) return cmd_generate(gen);
        if (sc_fac->parsed()) return cmd_factorize(fac);
        if (sc_bench->parsed()) return cmd_bench(bench);
        if (sc_mom->parsed()) return cmd_moments(mom);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
