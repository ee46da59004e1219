#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehrenfest/ehrenfest.h"

namespace fs = std::filesystem;

namespace {

enum Exit { all_passed = 0, checks_failed = 1, usage_error = 2 };

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void print_line(const char* line, void*) { std::cout << line << '\n' << std::flush; }

void print_certificate(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return;
    const auto cert = nlohmann::json::parse(in, nullptr, false);
    if (cert.is_discarded()) return;
    std::printf("\n%5s  %-14s  %-12s  %s\n", "j", "t_j", "<A>(t_j)", "zero at");
    for (const auto& row : cert["rows"]) {
        std::printf("%5d  %-14s  %-12s  %s\n", row["j"].get<int>(), row["t_j"].get<std::string>().c_str(),
                    row["expectation"].get<std::string>().c_str(), row["witness_zero_t"].get<std::string>().c_str());
    }
    std::printf("gram_ok=%s hermitean_ok=%s\n", cert["gram_ok"].get<bool>() ? "true" : "false",
                cert["hermitean_ok"].get<bool>() ? "true" : "false");
}

int run_mode(const std::string& mode, const Options& opt) {
    ehr_config* cfg = nullptr;
    ehr_status st;
    if (opt.config_path.empty()) {
        const std::string text = "mode = " + mode + "\n";
        st = ehr_config_parse(text.c_str(), &cfg);
    } else {
        st = ehr_config_load(opt.config_path.c_str(), &cfg);
    }
    if (st != EHR_OK) {
        std::cerr << "error: " << ehr_last_error() << '\n';
        return usage_error;
    }
    if (mode != ehr_config_mode(cfg)) {
        std::cerr << "error: " << opt.config_path << " has mode = " << ehr_config_mode(cfg) << ", not " << mode
                  << '\n';
        ehr_config_free(cfg);
        return usage_error;
    }
    if (opt.seed) ehr_config_set_seed(cfg, *opt.seed);

    const std::string out = opt.out_dir.empty() ? "ehrenfest-" + mode + "-" + ehr_config_hash(cfg) : opt.out_dir;
    ehr_run* run = nullptr;
    st = ehr_run_execute(cfg, out.c_str(), opt.quiet ? nullptr : print_line, nullptr, &run);
    ehr_config_free(cfg);
    if (st != EHR_OK) {
        std::cerr << "error: " << ehr_status_name(st) << ": " << ehr_last_error() << '\n';
        return st == EHR_IO ? usage_error : checks_failed;
    }

    const size_t n = ehr_run_check_count(run);
    for (size_t i = 0; i < n; ++i) {
        const char* name = nullptr;
        const char* detail = nullptr;
        int passed = 0;
        ehr_run_check(run, i, &name, &passed, &detail);
        if (!opt.quiet || !passed) std::cout << (passed ? "PASS  " : "FAIL  ") << name << "  " << detail << '\n';
    }
    if (ehr_run_partial(run)) std::cerr << "error: run aborted: " << ehr_run_error(run) << '\n';
    if (mode == "counterexample" && !opt.quiet) print_certificate(fs::path(out) / "certificate.json");

    const bool ok = ehr_run_ok(run);
    std::cout << (ok ? "ok" : "FAILED") << "  " << out << '\n';
    ehr_run_free(run);
    return ok ? all_passed : checks_failed;
}

int run_selftest(const Options& opt) {
    int failed = 0;
    const ehr_status st = ehr_selftest(opt.seed.value_or(2024), print_line, nullptr, &failed);
    if (st != EHR_OK) {
        std::cerr << "error: " << ehr_last_error() << '\n';
        return checks_failed;
    }
    std::cout << (8 - failed) << "/8 criteria passed\n";
    return failed == 0 ? all_passed : checks_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact counterexample certificates and Ehrenfest checks"};
    app.set_version_flag("--version", std::string(ehr_version()));
    app.require_subcommand(1);

    Options opt;
    std::string chosen;
    for (const char* mode : {"counterexample", "evolve", "crosscheck"}) {
        auto* sub = app.add_subcommand(mode, std::string("run a ") + mode + " scenario");
        sub->add_option("-c,--config", opt.config_path, "scenario file (default: built-in defaults)")
            ->check(CLI::ExistingFile);
        sub->add_option("-o,--out", opt.out_dir, "output directory (default: ehrenfest-<mode>-<hash>)");
        sub->add_option("-s,--seed", opt.seed, "override the config seed");
        sub->add_flag("-q,--quiet", opt.quiet, "print failures and the verdict only");
        sub->callback([&chosen, mode] { chosen = mode; });
    }
    auto* self = app.add_subcommand("selftest", "run acceptance criteria 1-8");
    self->add_option("-s,--seed", opt.seed, "seed for randomized checks (default 2024)");
    self->callback([&chosen] { chosen = "selftest"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : usage_error;
    }
    return chosen == "selftest" ? run_selftest(opt) : run_mode(chosen, opt);
}
