// rpde_lab: batch runner over the experiment layer.
// Exit codes: 0 ok, 2 config error, 3 numerical diagnostic, 4 acceptance failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rpde/acceptance.hpp"
#include "rpde/errors.hpp"
#include "rpde/experiment.hpp"

namespace {

enum Exit { ok = 0, config_error = 2, numerical = 3, acceptance = 4 };

struct Common {
    std::string config;
    std::string seeds;
    std::string out;
    std::string manifest;
    unsigned jobs = 1;
    bool verbose = false;
};

long seed_offset() {
    const char* v = std::getenv("RPDE_LAB_SEED_OFFSET");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long off = std::strtol(v, &end, 10);
    if (*end != '\0' || off < 0) throw rpde::ConfigError("RPDE_LAB_SEED_OFFSET must be a nonnegative integer");
    return off;
}

int execute(const std::string& command, const rpde::Experiment& ex, std::vector<std::uint64_t> seeds,
            const Common& c) {
    rpde::RunOptions opt{std::move(seeds), std::max(1u, c.jobs), c.verbose ? &std::cerr : nullptr};
    const auto start = std::chrono::steady_clock::now();
    auto result = rpde::run_command(command, ex, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const bool has_constants = std::any_of(result.files.begin(), result.files.end(),
                                           [](const auto& f) { return f.name == "constants.csv"; });
    if (!has_constants) {
        std::ostringstream os;
        rpde::BoundConstants::derive(ex.prim, rpde::Dynamics(ex.model)).dump_csv(os);
        result.files.push_back({"constants.csv", os.str()});
    }
    const std::filesystem::path out = c.out.empty() ? std::filesystem::path("out") / command : std::filesystem::path(c.out);
    rpde::write_outputs(out, result.files);
    rpde::write_outputs(out, {{"manifest.txt", rpde::render_manifest(command, ex, opt, wall)}});

    if (command == "accept") {
        std::istringstream table(result.files.front().content);
        std::string line;
        std::getline(table, line);
        while (std::getline(table, line)) std::cout << line << '\n';
    }
    if (c.verbose) std::cerr << "wrote " << result.files.size() + 1 << " files to " << out.string() << '\n';
    return result.acceptance_failed ? acceptance : ok;
}

int run_fresh(const std::string& command, const Common& c) {
    const auto ex = rpde::Experiment::load(c.config);
    std::vector<std::uint64_t> seeds = ex.seeds;
    if (!c.seeds.empty()) {
        seeds.clear();
        for (long s : rpde::parse_int_list(c.seeds)) {
            if (s < 0) throw rpde::ConfigError("seeds must be nonnegative");
            seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (seeds.empty()) throw rpde::ConfigError("seeds must be nonempty");
    const auto off = static_cast<std::uint64_t>(seed_offset());
    for (auto& s : seeds) s += off;
    return execute(command, ex, seeds, c);
}

int run_replay(const Common& c, bool jobs_given) {
    const auto m = rpde::parse_manifest(c.manifest);
    const auto ex = rpde::Experiment::load(m.config);
    if (ex.hash != m.hash)
        throw rpde::ConfigError("config hash " + ex.hash + " differs from manifest " + m.hash);
    Common rc = c;
    if (!jobs_given) rc.jobs = m.jobs;
    // Seeds in a manifest already include any offset.
    return execute(m.command, ex, m.seeds, rc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rough-path RPDE laboratory"};
    app.require_subcommand(1);
    Common c;
    std::vector<CLI::App*> subs;
    for (const auto& name : rpde::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", c.config, "experiment file")->required();
        sub->add_option("--seeds", c.seeds, "comma-separated seeds (overrides the file)");
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--verbose", c.verbose);
        subs.push_back(sub);
    }
    auto* replay = app.add_subcommand("replay", "re-run a manifest");
    replay->add_option("--manifest", c.manifest)->required();
    replay->add_option("--out", c.out);
    auto* jobs_opt = replay->add_option("--jobs", c.jobs)->check(CLI::PositiveNumber);
    replay->add_flag("--verbose", c.verbose);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (replay->parsed()) return run_replay(c, jobs_opt->count() > 0);
        for (auto* sub : subs)
            if (sub->parsed()) return run_fresh(sub->get_name(), c);
    } catch (const rpde::ConfigError& e) {
        std::cerr << "rpde_lab: config-error: " << e.what() << '\n';
        return config_error;
    } catch (const rpde::InvalidInput& e) {
        std::cerr << "rpde_lab: config-error: " << e.what() << '\n';
        return config_error;
    } catch (const rpde::NumericalDiagnostic& e) {
        std::cerr << "rpde_lab: numerical-diagnostic: t=" << e.time() << ": " << e.what() << '\n';
        return numerical;
    } catch (const rpde::RangeError& e) {
        std::cerr << "rpde_lab: numerical-diagnostic: " << e.what() << '\n';
        return numerical;
    } catch (const rpde::DomainError& e) {
        std::cerr << "rpde_lab: numerical-diagnostic: " << e.what() << '\n';
        return numerical;
    }
    return config_error;
}
