// Runs the seven acceptance criteria at the default configuration and prints
// one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
// Usage: acceptance [criterion ...] [--pde-profile nodes.csv]

#include "fhn/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fmt/format.h>

using namespace fhn;

int main(int argc, char** argv)
{
    std::vector<int> which;
    RunConfig cfg;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--pde-profile") == 0 && i + 1 < argc) {
            cfg.pde_profile = argv[++i];
        } else {
            int id = std::atoi(argv[i]);
            if (id < 1 || id > 7) {
                fmt::print(stderr, "unknown criterion '{}'\n", argv[i]);
                return 2;
            }
            which.push_back(id);
        }
    }
    Pipeline pl(cfg, [](const std::string& s) { fmt::print(stderr, "  {}\n", s); });
    bool all = true;
    run_acceptance(pl, which, [&](const CheckResult& r) {
        fmt::print("{}  [{:.0f} s]\n", status_line(r), r.seconds);
        std::fflush(stdout);
        all = all && r.pass;
    });
    return all ? 0 : 1;
}
