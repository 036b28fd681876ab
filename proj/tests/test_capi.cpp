#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "reflkit/reflkit.h"

namespace {

struct Model {
  reflkit_model* p = nullptr;
  explicit Model(const char* json) { REQUIRE(reflkit_model_from_json(json, &p) == REFLKIT_OK); }
  ~Model() { reflkit_model_free(p); }
};

}  // namespace

TEST_CASE("model lifecycle and errors") {
  reflkit_model* m = nullptr;
  CHECK(reflkit_model_from_json("{\"kind\": \"Nope\"}", &m) != REFLKIT_OK);
  CHECK(m == nullptr);
  CHECK(std::strlen(reflkit_last_error()) > 0);
  CHECK(reflkit_model_from_json(nullptr, &m) == REFLKIT_INVALID_ARGUMENT);
  CHECK(reflkit_model_from_file("/nonexistent/model.json", &m) != REFLKIT_OK);
  reflkit_model_free(nullptr);

  Model g(R"({"kind": "GaussianBump", "params": {"A": 1.0}})");
  double v = 0;
  CHECK(reflkit_model_V(g.p, 0.0, &v) == REFLKIT_OK);
  CHECK(v == doctest::Approx(1.0));
  CHECK(std::strlen(reflkit_last_error()) == 0);
  CHECK(reflkit_model_f(g.p, 1.0, &v) == REFLKIT_OK);
  CHECK(v == doctest::Approx(std::exp(-1.0)));
  CHECK(reflkit_model_V(nullptr, 0.0, &v) == REFLKIT_INVALID_ARGUMENT);
  CHECK(std::string(reflkit_status_name(REFLKIT_CONFIG_ERROR)) == "config-error");
  CHECK(std::string(reflkit_status_name(REFLKIT_BUFFER_TOO_SMALL)) == "buffer-too-small");
  CHECK(std::string(reflkit_version()) == "0.1.0");
}

TEST_CASE("transfer matrix and scattering through the C API") {
  Model g(R"({"kind": "TanhStep", "params": {"A": 0.8}})");
  double U[8], S[6];
  REQUIRE(reflkit_transfer_matrix(g.p, 1.0, -1.0, 0.0, 0.0, U) == REFLKIT_OK);
  double V1, V0;
  reflkit_model_V(g.p, 1.0, &V1);
  reflkit_model_V(g.p, -1.0, &V0);
  const double s = 0.5 * (V0 - V1);
  CHECK(std::abs(U[0] - std::cosh(s)) < 1e-8);
  CHECK(std::abs(U[2] - std::sinh(s)) < 1e-8);

  REQUIRE(reflkit_scattering(g.p, 1.0, -1.0, 1.3, 0.0, S) == REFLKIT_OK);
  CHECK(std::abs(S[0] * S[0] + S[1] * S[1] + S[4] * S[4] + S[5] * S[5] - 1.0) < 1e-8);

  double R[2], G[4], H[2];
  CHECK(reflkit_reflect_semiinf(g.p, 0.2, 1.0, 0.5, R) == REFLKIT_OK);
  CHECK(reflkit_rhat_semiinf(g.p, 0.2, 0.5, 0.0, 0.1, R) == REFLKIT_OK);
  CHECK(reflkit_green(g.p, 0.3, -0.2, 1.0, 0.5, G) == REFLKIT_OK);
  CHECK(std::hypot(G[0] - G[2], G[1] - G[3]) < 1e-6);
  CHECK(reflkit_high_series(g.p, 0.2, 20.0, 5.0, 2, H) == REFLKIT_OK);
  CHECK(reflkit_high_series(g.p, 0.2, 20.0, 5.0, -1, H) != REFLKIT_OK);
  CHECK(reflkit_green(g.p, 0.3, -0.2, 1.0, -0.5, G) != REFLKIT_OK);
}

TEST_CASE("low coefficients and symbolic text") {
  Model g(R"({"kind": "TanhStep", "params": {"A": 1.0}})");
  std::vector<double> c(3);
  REQUIRE(reflkit_low_coefficients(g.p, 0.3, 0.8, 2, c.data()) == REFLKIT_OK);
  CHECK(std::isfinite(c[2]));

  size_t needed = 0;
  CHECK(reflkit_chat_string(2, nullptr, 0, &needed) == REFLKIT_BUFFER_TOO_SMALL);
  std::vector<char> small(4, 'x');
  CHECK(reflkit_chat_string(2, small.data(), small.size(), nullptr) == REFLKIT_BUFFER_TOO_SMALL);
  CHECK(small[0] == '\0');
  std::vector<char> buf(needed);
  REQUIRE(reflkit_chat_string(2, buf.data(), buf.size(), nullptr) == REFLKIT_OK);
  CHECK(std::string(buf.data()) == "c2 = (-f1) + (f0^2) xi");
  CHECK(reflkit_chat_string(0, buf.data(), buf.size(), nullptr) != REFLKIT_OK);
}

TEST_CASE("run_command maps failures to exit codes") {
  CHECK(reflkit_run_command(nullptr, nullptr, nullptr) == 2);
  CHECK(reflkit_run_command("scatter", nullptr, "{}") == 2);
  CHECK(reflkit_run_command(
            "scatter", "",
            R"({"model": {"kind": "TanhStep", "params": {"A": 1.0}}, "k": "1+i", "output": "/dev/null"})") == 0);
}
