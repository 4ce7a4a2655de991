#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "cforge/config.hpp"
#include "cforge/errors.hpp"
#include "cforge/pipeline.hpp"
#include "cforge/regularity.hpp"
#include "cforge/sparse.hpp"

namespace {

struct Globals {
    std::string config;
    std::string out = "out";
    int threads = 0;
    std::optional<std::uint64_t> seed;
};

cforge::RunConfig load(const Globals& g) {
    if (g.config.empty()) throw cforge::ConfigError("--config is required for this command");
    cforge::RunConfig cfg = cforge::load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

int threads_from_env() {
    const char* s = std::getenv("CONSTRAINT_FORGE_THREADS");
    if (!s || !*s) return 0;
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw cforge::ConfigError(std::string("CONSTRAINT_FORGE_THREADS is not an integer: ") + s);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal constraint solver for Einstein-type initial data"};
    app.set_version_flag("--version", std::string(cforge::kToolVersion));
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "YAML run configuration");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads (0 = CONSTRAINT_FORGE_THREADS or 1)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "Override the config seed");

    auto* solve = app.add_subcommand("solve", "Barriers, coupled solve and residuals");
    auto* certify = app.add_subcommand("certify", "Barrier construction and worst-case certificate");
    auto* eigen = app.add_subcommand("eigen", "Principal eigenvalue estimates");
    auto* verify = app.add_subcommand("verify", "Constraint residuals of stored fields");
    std::string fields_dir;
    verify->add_option("--fields", fields_dir, "Directory with phi.csv and X.csv (default: --out)");
    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
    auto* sweep = app.add_subcommand("sweep-tau0", "Smallness constant versus the mean curvature offset");
    auto* boot = app.add_subcommand("bootstrap", "Elliptic bootstrap exponent ladder");
    int boot_n = 0;
    boot->add_option("n", boot_n, "Dimension")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(cforge::ExitCode::config);
    }

    try {
        int threads = g.threads > 0 ? g.threads : threads_from_env();
        cforge::set_thread_count(threads > 0 ? threads : 1);

        if (*boot) {
            std::cout << cforge::bootstrap_exponents(boot_n).str() << '\n';
            return 0;
        }
        const cforge::RunConfig cfg = load(g);
        cforge::Report r;
        if (*solve)
            r = cforge::solve_command(cfg, g.out);
        else if (*certify)
            r = cforge::certify_command(cfg, g.out);
        else if (*eigen)
            r = cforge::eigen_command(cfg);
        else if (*verify)
            r = cforge::verify_command(cfg, fields_dir.empty() ? g.out : fields_dir);
        else if (*mms)
            r = cforge::mms_command(cfg, g.out);
        else if (*sweep)
            r = cforge::sweep_command(cfg, g.out);
        std::cout << r.str();
        return 0;
    } catch (const cforge::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(cforge::ExitCode::failure);
    }
}
