#include "commands.hpp"

#include "eldyn/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace eldyn;

namespace {

void report_error(const std::string& kind, const std::string& message) {
    std::cerr << io::Json{{"kind", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hairs, ray tails and conjugacies of exponential-type entire maps"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "run config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "rng seed");
    app.add_flag_callback("--version", [] {
        std::cout << "eldyn " << io::version() << '\n';
        throw CLI::Success();
    }, "print the version");

    using Cmd = int (*)(const RunConfig&);
    const std::pair<const char*, Cmd> commands[] = {
        {"trace", cli::cmd_trace},         {"render", cli::cmd_render}, {"project", cli::cmd_project},
        {"conjugate", cli::cmd_conjugate}, {"brush", cli::cmd_brush},   {"verify", cli::cmd_verify}};
    const char* help[] = {"trace ray tails for the configured addresses",
                          "render the escape classification with ray overlays to PNG",
                          "project hair points with pi_R and report commutation defects",
                          "build the conjugacy and check it on random samples",
                          "pi table, axioms and defects of an affine brush",
                          "run the invariant suite; exit 3 on any failure"};
    Cmd chosen = nullptr;
    for (std::size_t i = 0; i < std::size(commands); ++i)
        app.add_subcommand(commands[i].first, help[i])->callback([&chosen, f = commands[i].second] { chosen = f; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? cli::kExitOk : cli::kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!out.empty()) cfg.out = out;
        if (seed) cfg.seed = *seed;
        return chosen(cfg);
    } catch (const ConfigError& e) {
        report_error(e.kind(), e.what());
        return cli::kExitUsage;
    } catch (const Error& e) {
        report_error(e.kind(), e.what());
        return cli::kExitDomain;
    } catch (const std::exception& e) {
        report_error("InternalError", e.what());
        return cli::kExitDomain;
    }
}
