#include "carnot.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/homogeneous.hpp"
#include "carnot/runner.hpp"

namespace {

thread_local std::string t_err;

char* dup_text(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

// Maps the exception hierarchy onto carnot_code, most derived first.
template <class Fn>
carnot_code guarded(Fn&& fn) {
  t_err.clear();
  try {
    return fn();
  } catch (const carnot::ConfigError& e) {
    t_err = e.what();
    return CARNOT_ERR_CONFIG;
  } catch (const carnot::RefusalError& e) {
    t_err = e.what();
    return CARNOT_ERR_PRECONDITION;
  } catch (const carnot::FormatError& e) {
    t_err = e.what();
    return CARNOT_ERR_FORMAT;
  } catch (const carnot::DomainError& e) {
    t_err = e.what();
    return CARNOT_ERR_DOMAIN;
  } catch (const std::invalid_argument& e) {
    t_err = e.what();
    return CARNOT_ERR_CONFIG;
  } catch (const std::exception& e) {
    t_err = e.what();
    return CARNOT_ERR_INTERNAL;
  } catch (...) {
    t_err = "unknown error";
    return CARNOT_ERR_INTERNAL;
  }
}

} // namespace

struct carnot_group {
  carnot::Group g;
};

extern "C" {

const char* carnot_last_error(void) { return t_err.c_str(); }

void carnot_free(char* p) { std::free(p); }

carnot_code carnot_group_open(const char* spec, carnot_group** out) {
  return guarded([&]() -> carnot_code {
    if (!spec || !out) throw carnot::ConfigError("carnot_group_open: null argument");
    *out = new carnot_group{carnot::open_group(spec)};
    return CARNOT_OK;
  });
}

void carnot_group_close(carnot_group* g) { delete g; }

int carnot_group_dim(const carnot_group* g) { return g ? g->g.dim() : 0; }
int carnot_group_step(const carnot_group* g) { return g ? g->g.step() : 0; }
int carnot_group_hom_dim(const carnot_group* g) { return g ? g->g.hom_dim() : 0; }

int carnot_group_weight(const carnot_group* g, int i) {
  if (!g || i < 0 || i >= g->g.dim()) return 0;
  return g->g.algebra().weight(i);
}

carnot_code carnot_group_multiply(const carnot_group* g, const double* x, const double* y,
                                  double* out) {
  return guarded([&]() -> carnot_code {
    if (!g || !x || !y || !out) throw carnot::ConfigError("carnot_group_multiply: null argument");
    g->g.multiply(x, y, out);
    return CARNOT_OK;
  });
}

carnot_code carnot_group_inverse(const carnot_group* g, const double* x, double* out) {
  return guarded([&]() -> carnot_code {
    if (!g || !x || !out) throw carnot::ConfigError("carnot_group_inverse: null argument");
    for (int i = 0; i < g->g.dim(); ++i) out[i] = -x[i];
    return CARNOT_OK;
  });
}

carnot_code carnot_group_dilate(const carnot_group* g, double r, const double* x, double* out) {
  return guarded([&]() -> carnot_code {
    if (!g || !x || !out) throw carnot::ConfigError("carnot_group_dilate: null argument");
    carnot::dilate(g->g.algebra(), r, x, out);
    return CARNOT_OK;
  });
}

carnot_code carnot_group_quasi_norm(const carnot_group* g, const double* x, double* out) {
  return guarded([&]() -> carnot_code {
    if (!g || !x || !out) throw carnot::ConfigError("carnot_group_quasi_norm: null argument");
    *out = carnot::quasi_norm(g->g.algebra(), x);
    return CARNOT_OK;
  });
}

carnot_code carnot_group_law_text(const carnot_group* g, char** out_text) {
  return guarded([&]() -> carnot_code {
    if (!g || !out_text) throw carnot::ConfigError("carnot_group_law_text: null argument");
    *out_text = dup_text(g->g.law_text());
    return CARNOT_OK;
  });
}

carnot_code carnot_run(const char* subcommand, const char* config, char** out_text) {
  if (out_text) *out_text = nullptr;
  return guarded([&]() -> carnot_code {
    if (!subcommand || !out_text) throw carnot::ConfigError("carnot_run: null argument");
    carnot::ExperimentConfig cfg = carnot::parse_config_text(config ? config : "");
    carnot::RunResult res = carnot::run_subcommand(subcommand, cfg);
    *out_text = dup_text(res.out);
    return res.code == 0 ? CARNOT_OK : CARNOT_ERR_GATE;
  });
}

} // extern "C"
