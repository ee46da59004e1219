#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "ehrenfest/ehrenfest.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    ehr_string_free(s);
    return out;
}

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); }

}  // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(ehr_status_name(EHR_OK)) == "ok");
    CHECK(std::string(ehr_status_name(EHR_PARSE)) == "parse");
    CHECK(std::string(ehr_version()) == "1.0.0");
}

TEST_CASE("config parse errors land in last_error") {
    ehr_config* cfg = reinterpret_cast<ehr_config*>(0x1);
    CHECK(ehr_config_parse("mode = evolve\n[evolve]\npotental = quartic\ndt = fast\n", &cfg) == EHR_PARSE);
    CHECK(cfg == nullptr);
    const std::string msg = ehr_last_error();
    CHECK(msg.find("line 3: evolve.potental: unknown key (did you mean 'potential'?)") != std::string::npos);
    CHECK(msg.find("line 4: evolve.dt: expected a finite number") != std::string::npos);
    CHECK(ehr_config_parse("mode = evolve\n[evolve]\nn = 100\n", &cfg) == EHR_PARSE);
    CHECK(std::string(ehr_last_error()).find("line 3: evolve.n: must be a power of two") != std::string::npos);

    CHECK(ehr_config_parse(nullptr, &cfg) == EHR_INVALID_ARGUMENT);
    CHECK(ehr_config_load("/nonexistent/x.cfg", &cfg) != EHR_OK);
    CHECK(std::string(ehr_last_error()).size() > 0);
}

TEST_CASE("config mode, seed and hash") {
    ehr_config* cfg = nullptr;
    REQUIRE(ehr_config_parse("mode = counterexample\n", &cfg) == EHR_OK);
    CHECK(std::string(ehr_last_error()).empty());
    CHECK(std::string(ehr_config_mode(cfg)) == "counterexample");
    const std::string h0 = ehr_config_hash(cfg);
    CHECK(h0.size() == 16);
    CHECK(ehr_config_set_seed(cfg, 99) == EHR_OK);
    CHECK(std::string(ehr_config_hash(cfg)) != h0);
    ehr_config_free(cfg);
    ehr_config_free(nullptr);
}

TEST_CASE("pwlin through the C API") {
    ehr_pwlin* tent = nullptr;
    REQUIRE(ehr_pwlin_tent(&tent) == EHR_OK);
    char* s = nullptr;
    REQUIRE(ehr_pwlin_inner_product(tent, tent, &s) == EHR_OK);
    CHECK(take(s) == "2/3");
    REQUIRE(ehr_pwlin_evaluate(tent, "1/2", &s) == EHR_OK);
    CHECK(take(s) == "1/2");

    ehr_pwlin* moved = nullptr;
    REQUIRE(ehr_pwlin_translate(tent, "1", &moved) == EHR_OK);
    REQUIRE(ehr_pwlin_inner_product(tent, moved, &s) == EHR_OK);
    CHECK(take(s) == "1/6");
    REQUIRE(ehr_pwlin_evaluate(moved, "2", &s) == EHR_OK);
    CHECK(take(s) == "1/1");

    REQUIRE(ehr_pwlin_serialize(moved, &s) == EHR_OK);
    const std::string text = take(s);
    ehr_pwlin* back = nullptr;
    REQUIRE(ehr_pwlin_parse(text.c_str(), &back) == EHR_OK);
    REQUIRE(ehr_pwlin_serialize(back, &s) == EHR_OK);
    CHECK(take(s) == text);

    ehr_pwlin* bad = nullptr;
    CHECK(ehr_pwlin_parse("not a function", &bad) == EHR_PARSE);
    CHECK(bad == nullptr);
    CHECK(ehr_pwlin_translate(tent, "1/0", &bad) != EHR_OK);
    CHECK(ehr_pwlin_evaluate(tent, "abc", &s) != EHR_OK);

    ehr_pwlin_free(back);
    ehr_pwlin_free(moved);
    ehr_pwlin_free(tent);
}

TEST_CASE("counterexample run through the C API") {
    const auto dir = fs::temp_directory_path() / "ehrenfest_capi_run";
    fs::remove_all(dir);
    ehr_config* cfg = nullptr;
    REQUIRE(ehr_config_parse("mode = counterexample\n[counterexample]\nn_bumps = 8\n", &cfg) == EHR_OK);
    std::vector<std::string> log;
    ehr_run* run = nullptr;
    REQUIRE(ehr_run_execute(cfg, dir.string().c_str(), collect, &log, &run) == EHR_OK);
    CHECK(ehr_run_ok(run) == 1);
    CHECK(ehr_run_partial(run) == 0);
    CHECK(std::string(ehr_run_error(run)).empty());
    CHECK_FALSE(log.empty());

    const size_t n = ehr_run_check_count(run);
    CHECK(n >= 6);
    for (size_t i = 0; i < n; ++i) {
        const char* name = nullptr;
        const char* detail = nullptr;
        int passed = 0;
        REQUIRE(ehr_run_check(run, i, &name, &passed, &detail) == EHR_OK);
        INFO(name, ": ", detail);
        CHECK(passed == 1);
    }
    CHECK(ehr_run_check(run, n, nullptr, nullptr, nullptr) == EHR_INVALID_ARGUMENT);

    bool saw_cert = false;
    for (size_t i = 0; i < ehr_run_output_count(run); ++i) {
        const std::string out = ehr_run_output(run, i);
        CHECK(fs::exists(dir / out));
        saw_cert = saw_cert || out == "certificate.json";
    }
    CHECK(saw_cert);
    CHECK(ehr_run_output(run, 1000) == nullptr);
    const std::string manifest = ehr_run_manifest_json(run);
    CHECK(manifest.find(ehr_config_hash(cfg)) != std::string::npos);

    ehr_run_free(run);
    ehr_config_free(cfg);
}
