/*
 * Acceptance runner: executes the verification scenarios and prints one
 * PASS/FAIL line per criterion. Exit code 0 when everything passes, 4
 * otherwise (matching the CLI's paper-suite behaviour).
 *
 *   kinetic_acceptance [--only id[,id...]] [--threads N]
 */
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "accept/acceptance.hpp"

int main(int argc, char** argv) {
    std::vector<int> only;
    int threads = 4;
    if (const char* env = std::getenv("KINETIC_THREADS"); env && *env) threads = std::atoi(env);
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            std::string arg = argv[++i];
            std::size_t pos = 0;
            while (pos < arg.size()) {
                std::size_t comma = arg.find(',', pos);
                if (comma == std::string::npos) comma = arg.size();
                only.push_back(std::atoi(arg.substr(pos, comma - pos).c_str()));
                pos = comma + 1;
            }
        } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
            threads = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: kinetic_acceptance [--only id[,id...]] [--threads N]\n";
            return 1;
        }
    }
    const auto results = kinetic::accept::run_selected(only, threads, std::cout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.pass) ++failed;
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 4;
}
