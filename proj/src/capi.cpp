#include "reflkit/reflkit.h"

#include <cstring>
#include <iostream>
#include <new>
#include <string>

#include "reflkit/driver.hpp"
#include "reflkit/error.hpp"
#include "reflkit/green.hpp"
#include "reflkit/highexp.hpp"
#include "reflkit/lowexp.hpp"
#include "reflkit/potential.hpp"
#include "reflkit/scattering.hpp"

struct reflkit_model {
  reflkit::PotentialModel model;
};

namespace {

thread_local std::string g_last_error;

int set_error(int status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Translates exceptions from `body` into status codes.
template <class Body>
int guarded(Body body) {
  try {
    g_last_error.clear();
    body();
    return REFLKIT_OK;
  } catch (const reflkit::Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(REFLKIT_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(REFLKIT_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(REFLKIT_INTERNAL_ERROR, "unknown exception");
  }
}

int null_arg(const char* what) {
  return set_error(REFLKIT_INVALID_ARGUMENT, std::string(what) + " is null");
}

void put(double* out, reflkit::cplx v) {
  out[0] = v.real();
  out[1] = v.imag();
}

}  // namespace

extern "C" {

const char* reflkit_last_error(void) { return g_last_error.c_str(); }

const char* reflkit_status_name(int status) {
  switch (status) {
    case REFLKIT_OK: return "ok";
    case REFLKIT_BUFFER_TOO_SMALL: return "buffer-too-small";
    case REFLKIT_INTERNAL_ERROR: return "internal-error";
    default:
      if (status >= REFLKIT_INVALID_ARGUMENT && status <= REFLKIT_IO_ERROR)
        return reflkit::error_code_name(static_cast<reflkit::ErrorCode>(status));
      return "unknown";
  }
}

const char* reflkit_version(void) { return "0.1.0"; }

int reflkit_model_from_json(const char* json_text, reflkit_model** out) {
  if (!json_text) return null_arg("json_text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new reflkit_model{reflkit::PotentialModel::from_json(json_text)}; });
}

int reflkit_model_from_file(const char* path, reflkit_model** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new reflkit_model{reflkit::PotentialModel::from_file(path)}; });
}

void reflkit_model_free(reflkit_model* model) { delete model; }

int reflkit_model_V(const reflkit_model* model, double x, double* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] { *out = model->model.V(x); });
}

int reflkit_model_f(const reflkit_model* model, double x, double* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] { *out = model->model.f(x); });
}

int reflkit_transfer_matrix(const reflkit_model* model, double x, double y, double k_re,
                            double k_im, double out[8]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto U = reflkit::transfer_matrix(model->model, x, y, {k_re, k_im});
    put(out, U.alpha_plus);
    put(out + 2, U.beta_plus);
    put(out + 4, U.alpha_minus);
    put(out + 6, U.beta_minus);
  });
}

int reflkit_scattering(const reflkit_model* model, double x, double y, double k_re, double k_im,
                       double out[6]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto t = reflkit::scattering_coeffs(reflkit::transfer_matrix(model->model, x, y, {k_re, k_im}));
    put(out, t.tau);
    put(out + 2, t.R_l);
    put(out + 4, t.R_r);
  });
}

int reflkit_reflect_semiinf(const reflkit_model* model, double x, double k_re, double k_im,
                            double out[2]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] { put(out, reflkit::reflect_semiinf(model->model, x, {k_re, k_im})); });
}

int reflkit_rhat_semiinf(const reflkit_model* model, double x, double W, double k_re, double k_im,
                         double out[2]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] { put(out, reflkit::rhat_semiinf(model->model, x, W, 1.0, {k_re, k_im})); });
}

int reflkit_green(const reflkit_model* model, double x, double y, double k_re, double k_im,
                  double out[4]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    put(out, reflkit::green_reflection(model->model, x, y, {k_re, k_im}));
    put(out + 2, reflkit::green_direct(model->model, x, y, {k_re, k_im}));
  });
}

int reflkit_low_coefficients(const reflkit_model* model, double x, double W, int N, double* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto c = reflkit::low_coefficients(model->model, x, W, N);
    std::memcpy(out, c.data(), c.size() * sizeof(double));
  });
}

int reflkit_high_series(const reflkit_model* model, double x, double k_re, double k_im, int N,
                        double out[2]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] { put(out, reflkit::high_series(model->model, x, {k_re, k_im}, N)); });
}

int reflkit_chat_string(int n, char* buf, size_t cap, size_t* needed) {
  std::string text;
  const int st = guarded([&] { text = reflkit::chat(n).to_string(); });
  if (st != REFLKIT_OK) return st;
  if (needed) *needed = text.size() + 1;
  if (!buf || cap < text.size() + 1) {
    if (buf && cap > 0) buf[0] = '\0';
    return set_error(REFLKIT_BUFFER_TOO_SMALL, "buffer too small for c^_" + std::to_string(n));
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return REFLKIT_OK;
}

int reflkit_run_command(const char* command, const char* config_path, const char* overrides_json) {
  if (!command) {
    null_arg("command");
    return reflkit::cli::kExitConfig;
  }
  g_last_error.clear();
  try {
    return reflkit::cli::run_command(command, config_path ? config_path : "",
                                     overrides_json ? overrides_json : "", std::cerr);
  } catch (const std::exception& e) {
    set_error(REFLKIT_INTERNAL_ERROR, e.what());
    std::cerr << "error: " << e.what() << "\n";
    return reflkit::cli::kExitNumerical;
  }
}

}  // extern "C"
