// One line per acceptance criterion; exit status 0 only if all pass.

#include <algorithm>
#include <iostream>
#include <thread>

#include "rpde/acceptance.hpp"
#include "rpde/errors.hpp"

int main(int argc, char** argv) {
    const std::string config = argc > 1 ? argv[1] : RPDE_ACCEPT_CONFIG;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    try {
        const auto ex = rpde::Experiment::load(config);
        const auto results = rpde::run_acceptance(ex, jobs, nullptr);
        bool ok = true;
        for (const auto& r : results) {
            std::cout << rpde::format_criterion(r) << std::endl;
            ok &= r.pass;
        }
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cout << "acceptance: cannot start: " << e.what() << std::endl;
        return 1;
    }
}
