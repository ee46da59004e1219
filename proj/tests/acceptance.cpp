#include <cstdlib>
#include <iostream>

#include "ehrenfest/acceptance.hpp"

int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2024;
    int failed = 0;
    for (const auto& r : ehrenfest::acceptance::run_all(seed, &std::cout))
        if (!r.passed) ++failed;
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all criteria pass")
              << std::endl;
    return failed ? 1 : 0;
}
