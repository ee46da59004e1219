#include "ehrenfest/ehrenfest.h"

#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "ehrenfest/acceptance.hpp"
#include "ehrenfest/error.hpp"
#include "ehrenfest/harness.hpp"
#include "ehrenfest/pwlin.hpp"

struct ehr_config {
    ehrenfest::harness::ScenarioConfig config;
    std::string mode;
    std::string hash;
};

struct ehr_run {
    ehrenfest::harness::RunManifest manifest;
    std::string manifest_json;
};

struct ehr_pwlin {
    ehrenfest::exact::PiecewiseLinear f;
};

namespace {

thread_local std::string last_error;

ehr_status to_status(ehrenfest::Errc c) {
    switch (c) {
        case ehrenfest::Errc::invalid_argument: return EHR_INVALID_ARGUMENT;
        case ehrenfest::Errc::parse: return EHR_PARSE;
        case ehrenfest::Errc::numeric: return EHR_NUMERIC;
        case ehrenfest::Errc::solver: return EHR_SOLVER;
        case ehrenfest::Errc::check_failed: return EHR_CHECK_FAILED;
        case ehrenfest::Errc::io: return EHR_IO;
    }
    return EHR_INTERNAL;
}

template <typename Fn>
ehr_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return EHR_OK;
    } catch (const ehrenfest::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return EHR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return EHR_INTERNAL;
    }
}

ehr_status null_argument(const char* what) {
    last_error = std::string(what) + " must not be NULL";
    return EHR_INVALID_ARGUMENT;
}

char* copy(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ehr_config* wrap(ehrenfest::harness::ScenarioConfig cfg) {
    auto* h = new ehr_config{std::move(cfg), {}, {}};
    h->mode = ehrenfest::harness::to_string(h->config.mode);
    return h;
}

class LineBuffer : public std::stringbuf {
public:
    LineBuffer(ehr_line_fn fn, void* user) : fn_(fn), user_(user) {}

protected:
    int sync() override {
        std::string text = str();
        std::size_t start = 0, nl;
        while ((nl = text.find('\n', start)) != std::string::npos) {
            fn_(text.substr(start, nl - start).c_str(), user_);
            start = nl + 1;
        }
        str(text.substr(start));
        return 0;
    }

private:
    ehr_line_fn fn_;
    void* user_;
};

}  // namespace

extern "C" {

const char* ehr_version(void) { return ehrenfest::harness::version(); }

const char* ehr_status_name(ehr_status status) {
    switch (status) {
        case EHR_OK: return "ok";
        case EHR_INVALID_ARGUMENT: return "invalid_argument";
        case EHR_PARSE: return "parse";
        case EHR_NUMERIC: return "numeric";
        case EHR_SOLVER: return "solver";
        case EHR_CHECK_FAILED: return "check_failed";
        case EHR_IO: return "io";
        case EHR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* ehr_last_error(void) { return last_error.c_str(); }

void ehr_string_free(char* s) { delete[] s; }

ehr_status ehr_config_parse(const char* text, ehr_config** out) {
    if (!text) return null_argument("text");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = wrap(ehrenfest::harness::parse_config_or_throw(text)); });
}

ehr_status ehr_config_load(const char* path, ehr_config** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = wrap(ehrenfest::harness::load_config(path)); });
}

void ehr_config_free(ehr_config* config) { delete config; }

ehr_status ehr_config_set_seed(ehr_config* config, uint64_t seed) {
    if (!config) return null_argument("config");
    config->config.seed = seed;
    last_error.clear();
    return EHR_OK;
}

const char* ehr_config_mode(const ehr_config* config) { return config ? config->mode.c_str() : ""; }

const char* ehr_config_hash(const ehr_config* config) {
    if (!config) return "";
    auto* mut = const_cast<ehr_config*>(config);
    mut->hash = ehrenfest::harness::config_hash(config->config);
    return mut->hash.c_str();
}

ehr_status ehr_run_execute(const ehr_config* config, const char* out_dir, ehr_line_fn log, void* user, ehr_run** out) {
    if (!config) return null_argument("config");
    if (!out_dir) return null_argument("out_dir");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        LineBuffer buf(log, user);
        std::ostream os(&buf);
        auto* r = new ehr_run{ehrenfest::harness::run(config->config, out_dir, log ? &os : nullptr), {}};
        os.flush();
        r->manifest_json = ehrenfest::harness::manifest_json(r->manifest);
        *out = r;
    });
}

void ehr_run_free(ehr_run* run) { delete run; }

int ehr_run_ok(const ehr_run* run) { return run && run->manifest.ok() ? 1 : 0; }

int ehr_run_partial(const ehr_run* run) { return run && run->manifest.partial ? 1 : 0; }

const char* ehr_run_error(const ehr_run* run) { return run ? run->manifest.error.c_str() : ""; }

size_t ehr_run_check_count(const ehr_run* run) { return run ? run->manifest.checks.size() : 0; }

ehr_status ehr_run_check(const ehr_run* run, size_t index, const char** name, int* passed, const char** detail) {
    if (!run) return null_argument("run");
    if (index >= run->manifest.checks.size()) {
        last_error = "check index out of range";
        return EHR_INVALID_ARGUMENT;
    }
    const auto& c = run->manifest.checks[index];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : 0;
    if (detail) *detail = c.detail.c_str();
    last_error.clear();
    return EHR_OK;
}

size_t ehr_run_output_count(const ehr_run* run) { return run ? run->manifest.outputs.size() : 0; }

const char* ehr_run_output(const ehr_run* run, size_t index) {
    if (!run || index >= run->manifest.outputs.size()) return nullptr;
    return run->manifest.outputs[index].c_str();
}

const char* ehr_run_manifest_json(const ehr_run* run) { return run ? run->manifest_json.c_str() : ""; }

ehr_status ehr_pwlin_parse(const char* text, ehr_pwlin** out) {
    if (!text) return null_argument("text");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new ehr_pwlin{ehrenfest::exact::deserialize(text)}; });
}

ehr_status ehr_pwlin_serialize(const ehr_pwlin* f, char** out) {
    if (!f) return null_argument("f");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = copy(ehrenfest::exact::serialize(f->f)); });
}

ehr_status ehr_pwlin_tent(ehr_pwlin** out) {
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new ehr_pwlin{ehrenfest::exact::tent_psi0()}; });
}

ehr_status ehr_pwlin_translate(const ehr_pwlin* f, const char* t, ehr_pwlin** out) {
    if (!f) return null_argument("f");
    if (!t) return null_argument("t");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        *out = new ehr_pwlin{ehrenfest::exact::translate(f->f, ehrenfest::exact::BigRational::parse(t))};
    });
}

ehr_status ehr_pwlin_inner_product(const ehr_pwlin* f, const ehr_pwlin* g, char** out) {
    if (!f) return null_argument("f");
    if (!g) return null_argument("g");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = copy(ehrenfest::exact::inner_product(f->f, g->f).to_string()); });
}

ehr_status ehr_pwlin_evaluate(const ehr_pwlin* f, const char* x, char** out) {
    if (!f) return null_argument("f");
    if (!x) return null_argument("x");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        *out = copy(ehrenfest::exact::evaluate(f->f, ehrenfest::exact::BigRational::parse(x)).to_string());
    });
}

void ehr_pwlin_free(ehr_pwlin* f) { delete f; }

ehr_status ehr_selftest(uint64_t seed, ehr_line_fn line, void* user, int* failed) {
    if (!failed) return null_argument("failed");
    *failed = 0;
    return guarded([&] {
        for (int id = 1; id <= ehrenfest::acceptance::criterion_count; ++id) {
            const auto r = ehrenfest::acceptance::run_criterion(id, seed);
            if (!r.passed) ++*failed;
            if (line) line(ehrenfest::acceptance::format_line(r).c_str(), user);
        }
    });
}

}  // extern "C"
