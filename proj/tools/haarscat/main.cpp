// haarscat: learn Haar scattering multiresolutions, compute features, select,
// train and evaluate, and run the reconstruction and boolean demos.
//
// Settings come from defaults, then an optional JSON config file, then
// command-line flags, each overriding the previous. Every stage writes into
// <out>/<stage>-<hash>, where the hash covers the settings that stage depends
// on, so a repeated run reuses finished stages.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "commands.hpp"
#include "haarscat/common.hpp"
#include "haarscat/io.hpp"
#include "haarscat/parallel.hpp"
#include "log.hpp"

namespace {

using nlohmann::json;

struct Flags {
    std::string config;
    std::string out = "runs";
    std::size_t threads = 0;
    bool force = false;
    bool quiet = false;
    bool verbose = false;
    std::vector<std::string> sets;
    json overrides = json::object();
};

// Typed shortcut flags; each writes into the override document only when given.
template <typename T>
void shortcut(CLI::App* sub, Flags& flags, const std::string& name, const std::string& path, const std::string& help) {
    sub->add_option_function<T>(
        name, [&flags, path](const T& v) { haarcli::set_path(flags.overrides, path, json(v).dump()); }, help);
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("-c,--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", f.out, "output root for stage directories")->capture_default_str();
    sub->add_option("-t,--threads", f.threads, "worker threads (0: HAAR_THREADS or 1)");
    sub->add_option("--set", f.sets, "override any config key, e.g. --set dataset.limit=1000")->take_all();
    sub->add_flag("--force", f.force, "recompute this stage even if its report exists");
    sub->add_flag("-q,--quiet", f.quiet, "only warnings and errors on stderr");
    sub->add_flag("-v,--verbose", f.verbose, "per-level details on stderr");
}

void add_experiment(CLI::App* sub, Flags& f) {
    shortcut<std::string>(sub, f, "--dataset", "dataset.kind", "idx, csv, grid-smooth, cycle-smooth, sphere, blobs");
    shortcut<std::string>(sub, f, "--geometry", "geometry", "learned or grid");
    shortcut<int>(sub, f, "--J", "J", "scattering depth (default log2 d)");
    shortcut<int>(sub, f, "--m-max", "m_max", "largest scattering order kept");
    shortcut<int>(sub, f, "--N", "N", "number of multiresolutions");
    shortcut<std::size_t>(sub, f, "--K", "K", "features selected per class");
    shortcut<std::size_t>(sub, f, "--M", "M", "total selected features when K is unset");
    shortcut<double>(sub, f, "--sigma", "sigma", "kernel width (default median distance)");
    shortcut<double>(sub, f, "--lambda", "lambda", "ridge regularization");
    shortcut<std::uint64_t>(sub, f, "--seed", "seed", "ensemble split and sigma subsample seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised deep Haar scattering on graphs"};
    app.require_subcommand(1);
    Flags flags;

    const std::vector<std::pair<std::string, std::string>> experiment{
        {"learn", "learn (or build) the ensemble of multiresolutions"},
        {"features", "compute order-truncated scattering features"},
        {"select", "select per-class features by orthogonal least squares"},
        {"train", "train the kernel classifier on the selected features"},
        {"evaluate", "classify the test split and report error rates"},
        {"connectivity", "measure how many multiresolution sets are connected in the true graph"},
    };
    for (const auto& [name, help] : experiment) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, flags);
        add_experiment(sub, flags);
    }
    auto* rec = app.add_subcommand("reconstruct-demo", "invert scattering transforms of random signals");
    add_common(rec, flags);
    shortcut<std::size_t>(rec, flags, "--d", "reconstruct.d", "signal length (power of two)");
    shortcut<int>(rec, flags, "--J", "reconstruct.J", "depth");
    shortcut<int>(rec, flags, "--trials", "reconstruct.trials", "number of signals");
    shortcut<std::uint64_t>(rec, flags, "--seed", "reconstruct.seed", "signal seed");
    rec->add_flag_function(
        "--binary", [&flags](std::int64_t) { haarcli::set_path(flags.overrides, "reconstruct.binary", "true"); },
        "draw 0/1 signals instead of Gaussian");

    auto* bl = app.add_subcommand("bool-demo", "exhaustive or/xor cascade over all boolean inputs");
    add_common(bl, flags);
    shortcut<std::size_t>(bl, flags, "--d", "bool.d", "signal length (power of two, at most 16)");
    shortcut<int>(bl, flags, "--J", "bool.J", "depth");
    shortcut<std::uint64_t>(bl, flags, "--seed", "bool.seed", "pairing seed");

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    if (flags.quiet) haarcli::verbosity() = haarcli::Verbosity::Quiet;
    if (flags.verbose) haarcli::verbosity() = haarcli::Verbosity::Verbose;

    try {
        json doc = json::object();
        if (!flags.config.empty()) doc = haar::read_json(flags.config);
        haarcli::merge_into(doc, flags.overrides);
        for (const auto& s : flags.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw haar::Error("--set expects key=value, got '" + s + "'");
            haarcli::set_path(doc, s.substr(0, eq), s.substr(eq + 1));
        }
        haarcli::Context ctx;
        ctx.cfg = haarcli::parse_config(doc);
        ctx.canonical = haarcli::to_json(ctx.cfg);
        ctx.out = flags.out;
        ctx.threads = haar::resolve_threads(flags.threads);
        ctx.force = flags.force;
        haarcli::log_info("%s: config %s, %zu thread(s)", command.c_str(), haarcli::hash_of(ctx.canonical).c_str(),
                          ctx.threads);
        const auto report = haarcli::run_command(command, ctx);
        std::cout << report.string() << '\n';
        return EXIT_SUCCESS;
    } catch (const std::exception& e) {
        haarcli::log_error("%s", e.what());
        return EXIT_FAILURE;
    }
}
