#include "mobs/cli.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mobs/errors.hpp"
#include "mobs/gibbs.hpp"
#include "mobs/io.hpp"
#include "mobs/screening.hpp"
#include "mobs/simulate.hpp"
#include "mobs/tuner.hpp"

namespace mobs {

namespace {

struct HyperFlags {
    std::optional<double> alpha, a, b, mu0, q, tau_omega, tau_mu, tau_sigma;

    void attach(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "Dirichlet total mass of the baseline weights");
        cmd->add_option("--a", a, "variance prior shape");
        cmd->add_option("--b", b, "variance prior rate");
        cmd->add_option("--mu0", mu0, "mean prior center");
        cmd->add_option("--q", q, "mean prior variance scale");
        cmd->add_option("--tau-omega", tau_omega, "conditional weight concentration");
        cmd->add_option("--tau-mu", tau_mu, "conditional mean concentration");
        cmd->add_option("--tau-sigma", tau_sigma, "conditional variance concentration");
    }

    Hyperparams build(int k) const {
        Hyperparams hp = default_hyperparams(k);
        if (alpha) hp.alpha = *alpha;
        if (a) hp.a = *a;
        if (b) hp.b = *b;
        if (mu0) hp.mu0 = *mu0;
        if (q) hp.q = *q;
        if (tau_omega) hp.tau_omega = *tau_omega;
        if (tau_mu) hp.tau_mu = *tau_mu;
        if (tau_sigma) hp.tau_sigma = *tau_sigma;
        validate(hp);
        return hp;
    }
};

void print_screen_summary(const ScreeningResult& result) {
    long degenerate = 0;
    for (std::uint8_t flag : result.degenerate) degenerate += flag;
    std::cout << "kappa: " << result.kappa[0] << ' ' << result.kappa[1] << ' '
              << result.kappa[2] << ' ' << result.kappa[3] << '\n'
              << "iterations: " << result.iterations << '\n'
              << "converged: " << (result.converged ? 1 : 0) << '\n'
              << "predictors: " << result.probs.size() << " (" << degenerate
              << " degenerate)\n";
    if (result.small_variance_draws > 0)
        std::cerr << "warning: " << result.small_variance_draws
                  << " retained draws had a component variance below 1e-8 * var(y)\n";
}

void print_selected(const ScreeningResult& result, Eigen::Index top,
                    const std::string& selected_out) {
    const auto selected = select_top(result.pi0(), top);
    std::cout << "selected:";
    for (Eigen::Index j : selected) std::cout << ' ' << (j + 1);
    std::cout << '\n';
    if (!selected_out.empty()) save_truth(selected, selected_out);
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Modular Bayesian screening of categorical predictors"};
    app.require_subcommand(1);

    // ---- fit-baseline ----
    auto* fit = app.add_subcommand("fit-baseline",
                                   "Fit the baseline response mixture by Gibbs sampling");
    std::string fit_y, fit_out;
    int fit_k = 3;
    ChainConfig fit_cfg;
    std::optional<int> fit_burnin;
    HyperFlags fit_hp;
    fit->add_option("--y", fit_y, "response file, one value per line")->required();
    fit->add_option("--out", fit_out, "chain output file")->required();
    fit->add_option("--k", fit_k, "mixture components");
    fit->add_option("--iters", fit_cfg.total_iters, "total Gibbs iterations");
    fit->add_option("--burnin", fit_burnin, "burn-in iterations (default: total - keep*thin)");
    fit->add_option("--keep", fit_cfg.keep, "retained draws");
    fit->add_option("--thin", fit_cfg.thin, "thinning stride");
    fit->add_option("--seed", fit_cfg.seed, "rng seed");
    fit_hp.attach(fit);
    fit->callback([&] {
        const Hyperparams hp = fit_hp.build(fit_k);
        fit_cfg.burn_in = fit_burnin
                              ? *fit_burnin
                              : fit_cfg.total_iters - fit_cfg.keep * fit_cfg.thin;
        validate(fit_cfg);
        const Eigen::VectorXd y = load_y_csv(fit_y);
        const ChainOutput chain = run_chain(y, hp, fit_cfg);
        persist_chain(chain, fit_cfg, fit_out);
        std::cout << "n: " << y.size() << '\n'
                  << "k: " << fit_k << '\n'
                  << "iterations: " << fit_cfg.total_iters << '\n'
                  << "retained: " << chain.draws.size() << '\n'
                  << "log-joint: " << chain.log_joint_trace.front() << " -> "
                  << chain.log_joint_trace.back() << '\n'
                  << "chain: " << fit_out << '\n';
    });

    // ---- screen ----
    auto* scr = app.add_subcommand("screen",
                                   "Score predictors against a fitted baseline chain");
    std::string scr_y, scr_x, scr_chain, scr_format = "csv", scr_out = "results.csv";
    std::string scr_manifest, scr_selected_out;
    std::uint64_t scr_seed = 0;
    Eigen::Index scr_top = 0;
    ScreenOptions scr_opts;
    HyperFlags scr_hp;
    scr->add_option("--manifest", scr_manifest,
                    "JSON manifest describing the full run (replaces --y/--x/--chain)");
    scr->add_option("--y", scr_y, "response file");
    scr->add_option("--x", scr_x, "predictor file");
    scr->add_option("--format", scr_format, "predictor format: csv or packed")
        ->check(CLI::IsMember({"csv", "packed"}));
    scr->add_option("--chain", scr_chain, "chain file from fit-baseline");
    scr->add_option("--out", scr_out, "results file");
    scr->add_option("--seed", scr_seed, "seed recorded in the results trailer");
    scr->add_option("--tol", scr_opts.tol, "fixed-point tolerance");
    scr->add_option("--max-iter", scr_opts.max_iter, "fixed-point iteration cap");
    scr->add_option("--threads", scr_opts.threads, "worker threads");
    scr->add_option("--chunk-size", scr_opts.chunk_size, "predictors per work chunk");
    scr->add_option("--mem-budget", scr_opts.mem_budget,
                    "cache bytes held in memory before spilling");
    scr->add_option("--top", scr_top, "print the predictors with the d_n smallest pi0");
    scr->add_option("--selected-out", scr_selected_out,
                    "also write the selected indices to this file");
    scr_hp.attach(scr);
    scr->callback([&] {
        if (!scr_manifest.empty()) {
            const RunManifest manifest = load_manifest(scr_manifest);
            const Dataset data =
                load_dataset(manifest.y_path, manifest.x_path, manifest.format);
            std::filesystem::create_directories(manifest.output_dir);
            const ChainOutput chain = run_chain(data.y, manifest.hp, manifest.chain);
            persist_chain(chain, manifest.chain, manifest.output_dir / "chain.txt");
            const ScreeningResult result = screen(data, chain, manifest.hp, manifest.screen);
            write_results(result, manifest.seed, manifest.output_dir / "results.csv");
            std::cout << "results: " << (manifest.output_dir / "results.csv").string()
                      << '\n';
            print_screen_summary(result);
            if (scr_top > 0) print_selected(result, scr_top, scr_selected_out);
            return;
        }
        if (scr_y.empty() || scr_x.empty() || scr_chain.empty())
            throw InvalidArgument("screen: need --y, --x, and --chain (or --manifest)");
        const Dataset data = load_dataset(scr_y, scr_x, parse_dataset_format(scr_format));
        const ChainOutput chain = load_chain(scr_chain);
        const auto k = static_cast<int>(chain.draws.front().weights.size());
        const Hyperparams hp = scr_hp.build(k);
        const ScreeningResult result = screen(data, chain, hp, scr_opts);
        write_results(result, scr_seed, scr_out);
        std::cout << "results: " << scr_out << '\n';
        print_screen_summary(result);
        if (scr_top > 0) print_selected(result, scr_top, scr_selected_out);
    });

    // ---- tune-snr ----
    auto* tune = app.add_subcommand("tune-snr",
                                    "Monte Carlo prior signal-to-noise diagnostic");
    int tune_k = 3, tune_draws = 5000;
    std::uint64_t tune_seed = 0;
    HyperFlags tune_hp;
    tune->add_option("--k", tune_k, "mixture components");
    tune->add_option("--draws", tune_draws, "Monte Carlo draws");
    tune->add_option("--seed", tune_seed, "rng seed");
    tune_hp.attach(tune);
    tune->callback([&] {
        const Hyperparams hp = tune_hp.build(tune_k);
        const SnrEstimate est = estimate_snr(hp, tune_draws, tune_seed);
        std::printf("draws: %d\n", est.mc_draws);
        std::printf("delta0: %.10g\n", est.delta0);
        std::printf("delta1: %.10g\n", est.delta1);
        std::printf("ratio: %.10g\n", est.ratio);
        std::printf("stderr: %.10g\n", est.mc_stderr_ratio);
    });

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Generate a benchmark instance");
    SimSpec sim_spec;
    std::string sim_dir, sim_format = "csv";
    bool sim_correlated = false;
    sim->add_option("--model", sim_spec.model, "benchmark model 1..6")->required();
    sim->add_option("--n", sim_spec.n, "observations");
    sim->add_option("--p", sim_spec.p, "predictors");
    sim->add_option("--rho", sim_spec.rho, "within-block correlation");
    sim->add_option("--block-size", sim_spec.block_size, "correlated block width");
    sim->add_flag("--correlated", sim_correlated,
                  "force the correlated design (implied by models 2, 4, 6)");
    sim->add_flag("--literal-rows", sim_spec.literal_rows,
                  "restrict the shared factor to the first ceil(rho*n) rows");
    sim->add_option("--seed", sim_spec.seed, "rng seed");
    sim->add_option("--out-dir", sim_dir, "output directory")->required();
    sim->add_option("--format", sim_format, "predictor format: csv or packed")
        ->check(CLI::IsMember({"csv", "packed"}));
    sim->callback([&] {
        sim_spec.correlated = sim_correlated || sim_spec.model % 2 == 0;
        const SimInstance instance = make_instance(sim_spec);
        std::filesystem::create_directories(sim_dir);
        const std::filesystem::path dir(sim_dir);
        save_y_csv(instance.data.y, dir / "y.csv");
        std::filesystem::path x_path;
        if (sim_format == "packed") {
            x_path = dir / "x.mobx";
            save_x_packed(instance.data.x, instance.data.levels, x_path);
        } else {
            x_path = dir / "x.csv";
            save_x_csv(instance.data.x, x_path);
        }
        save_truth(instance.truth, dir / "truth.txt");
        std::cout << "y: " << (dir / "y.csv").string() << '\n'
                  << "x: " << x_path.string() << '\n'
                  << "truth: " << (dir / "truth.txt").string() << '\n';
    });

    // ---- roc ----
    auto* roc = app.add_subcommand("roc", "ROC curve and AUC of a results file");
    std::string roc_results, roc_truth, roc_out;
    roc->add_option("--results", roc_results, "results file from screen")->required();
    roc->add_option("--truth", roc_truth, "true predictor indices, one per line")
        ->required();
    roc->add_option("--out", roc_out, "ROC curve output file");
    roc->callback([&] {
        const LoadedResults results = load_results(roc_results);
        const std::vector<Eigen::Index> truth = load_truth(roc_truth);
        const RocCurve curve = roc_auc(results.pi0(), truth);
        if (!roc_out.empty()) write_roc_csv(curve, roc_out);
        std::printf("auc: %.10g\n", curve.auc);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidArgument& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const NumericFailure& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    } catch (const IoFailure& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 4;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}

}  // namespace mobs
