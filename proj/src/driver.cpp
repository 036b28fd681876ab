#include "reflkit/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "reflkit/green.hpp"
#include "reflkit/highexp.hpp"

namespace reflkit::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::ConfigError, what); }

// Runs body(i) for i < n on a small worker pool. Results land by index, so
// the output order never depends on scheduling. The lowest failing index wins.
template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
  std::size_t workers = threads > 0 ? std::size_t(threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

bool to_stdout(const RunConfig& cfg) { return cfg.output_path.empty() || cfg.output_path == "-"; }

double num(const json& j, const char* key) {
  if (!j.is_number()) config_error(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

cplx complex_value(const json& j, const char* key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_string()) return parse_complex(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  config_error(std::string("'") + key + "' must be a number, [re, im] or a complex string");
}

Spacing parse_spacing(const std::string& s) {
  if (s == "linear") return Spacing::Linear;
  if (s == "log") return Spacing::Log;
  config_error("spacing must be 'linear' or 'log', got '" + s + "'");
}

LowRoute parse_route(const std::string& s) {
  if (s == "auto") return LowRoute::Auto;
  if (s == "grid") return LowRoute::Grid;
  if (s == "signseq") return LowRoute::SignSequence;
  config_error("route must be auto, grid or signseq, got '" + s + "'");
}

void apply_tolerance(RunConfig& cfg, const std::string& key, const json& v) {
  auto& s = cfg.solver;
  if (key == "rtol") s.rtol = num(v, "rtol");
  else if (key == "atol") s.atol = num(v, "atol");
  else if (key == "cutoff_tol") s.cutoff_tol = num(v, "cutoff_tol");
  else if (key == "epsilon") s.epsilon = num(v, "epsilon");
  else if (key == "alpha_threshold") s.alpha_threshold = num(v, "alpha_threshold");
  else if (key == "pole_threshold") s.pole_threshold = num(v, "pole_threshold");
  else if (key == "richardson") s.richardson = v.get<bool>();
  else if (key == "extended") s.extended = v.get<bool>();
  else if (key == "panel_order") cfg.low.panel_order = v.get<int>();
  else if (key == "periodic_nodes") cfg.low.periodic_nodes = v.get<int>();
  else if (key == "depth") cfg.low.depth = num(v, "depth");
  else if (key == "route") cfg.low.route = parse_route(v.get<std::string>());
  else config_error("unknown tolerance '" + key + "'");
}

void apply_output(RunConfig& cfg, const json& o) {
  if (o.is_string()) {
    cfg.output_path = o.get<std::string>();
    return;
  }
  if (!o.is_object()) config_error("'output' must be an object or a path");
  if (o.contains("path")) cfg.output_path = o.at("path").get<std::string>();
  if (o.contains("format")) {
    const auto f = o.at("format").get<std::string>();
    if (f == "csv") cfg.format = OutputFormat::Csv;
    else if (f == "json") cfg.format = OutputFormat::Json;
    else config_error("output format must be csv or json, got '" + f + "'");
  }
}

void apply_model(RunConfig& cfg, const json& m, const std::string& base_dir) {
  if (m.is_string()) {
    std::filesystem::path p(m.get<std::string>());
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    cfg.model_path = p.string();
    cfg.model_json.clear();
  } else if (m.is_object()) {
    cfg.model_json = m.dump();
    cfg.model_path.clear();
  } else {
    config_error("'model' must be a path or an inline object");
  }
}

void apply_sweep(RunConfig& cfg, const json& s) {
  if (!s.is_object()) config_error("'k_sweep' must be an object");
  auto& k = cfg.k_sweep;
  for (const auto& [key, v] : s.items()) {
    if (key == "start") k.start = num(v, "start");
    else if (key == "stop") k.stop = num(v, "stop");
    else if (key == "count") k.count = v.get<int>();
    else if (key == "ray") k.ray = complex_value(v, "ray");
    else if (key == "spacing") k.spacing = parse_spacing(v.get<std::string>());
    else config_error("unknown k_sweep key '" + key + "'");
  }
}

void apply_points(RunConfig& cfg, const json& p) {
  if (!p.is_array()) config_error("'points' must be an array of [x, y] pairs");
  cfg.points.clear();
  for (const auto& e : p) {
    if (!e.is_array() || e.size() != 2) config_error("'points' entries must be [x, y]");
    cfg.points.emplace_back(num(e[0], "points"), num(e[1], "points"));
  }
}

// Keys shared by the config document and the flat override object.
bool apply_scalar(RunConfig& cfg, const std::string& key, const json& v) {
  if (key == "command") cfg.command = parse_command(v.get<std::string>());
  else if (key == "x") cfg.x = num(v, "x");
  else if (key == "y") {
    if (v.is_null()) cfg.y.reset();
    else cfg.y = num(v, "y");
  } else if (key == "W") cfg.W = num(v, "W");
  else if (key == "orders" || key == "order") cfg.orders = v.get<int>();
  else if (key == "case_override") cfg.case_override = v.get<std::string>();
  else if (key == "xi") cfg.xi = complex_value(v, "xi");
  else if (key == "mu") cfg.mu = complex_value(v, "mu");
  else if (key == "threads") cfg.threads = v.get<int>();
  else return false;
  return true;
}

void validate(const RunConfig& cfg) {
  if (cfg.k_sweep.count < 1) config_error("k_sweep.count must be >= 1");
  if (cfg.orders < 0) config_error("orders must be >= 0");
  if (cfg.command == Command::HighExpand && cfg.orders < 1) config_error("high-expand needs orders >= 1");
  if (std::abs(cfg.k_sweep.ray) == 0.0) config_error("k_sweep.ray must be nonzero");
  if (cfg.k_sweep.spacing == Spacing::Log && !(cfg.k_sweep.start > 0 && cfg.k_sweep.stop > 0))
    config_error("log spacing needs positive start and stop");
  for (const cplx k : cfg.k_sweep.points())
    if (k.imag() < 0) config_error("every k on the sweep must have Im k >= 0");
  if (cfg.model_path.empty() && cfg.model_json.empty()) config_error("no model given");
}

// Applies --case-override: it must agree with an analytic model's own tail;
// for tabulated models it supplies the classification.
void apply_case_override(RunConfig& cfg, const PotentialModel& model) {
  if (!cfg.case_override) return;
  TailVariant v;
  try {
    v = parse_tail_variant(*cfg.case_override);
  } catch (const Error& e) {
    config_error(e.what());
  }
  TailClass t = model.left_tail();
  if (model.kind() != PotentialKind::Tabulated) {
    if (t.variant != v)
      config_error(std::string("case override ") + tail_variant_name(v) + " contradicts the model's " +
                   tail_variant_name(t.variant) + " tail");
    return;
  }
  if (v == TailVariant::Periodic && !(t.period > 0))
    config_error("a Periodic case override needs the tabulated tail to carry its period");
  t.variant = v;
  t.asymptotics_ok = true;
  cfg.low.tail_override = t;
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a * std::pow(b / a, double(i) / (n - 1));
  return out;
}

Table scatter_table(const RunConfig& cfg, const PotentialModel& model) {
  const auto ks = cfg.k_sweep.points();
  Table t;
  if (cfg.y) {
    t.header = {"x", "y", "k_re", "k_im", "tau_re", "tau_im", "Rl_re", "Rl_im", "Rr_re", "Rr_im"};
    t.rows.resize(ks.size());
    parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
      const auto s = scattering_coeffs(transfer_matrix(model, cfg.x, *cfg.y, ks[i], cfg.solver),
                                       cfg.solver.alpha_threshold);
      t.rows[i] = {cfg.x, *cfg.y, ks[i].real(), ks[i].imag(), s.tau.real(), s.tau.imag(),
                   s.R_l.real(), s.R_l.imag(), s.R_r.real(), s.R_r.imag()};
    });
  } else {
    t.header = {"x", "k_re", "k_im", "Rr_re", "Rr_im"};
    t.rows.resize(ks.size());
    parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
      const cplx R = reflect_semiinf(model, cfg.x, ks[i], cfg.solver);
      t.rows[i] = {cfg.x, ks[i].real(), ks[i].imag(), R.real(), R.imag()};
    });
  }
  return t;
}

Table green_table(const RunConfig& cfg, const PotentialModel& model) {
  const auto ks = cfg.k_sweep.points();
  std::vector<std::pair<double, double>> xy = cfg.points;
  if (xy.empty()) xy.emplace_back(cfg.x, cfg.y.value_or(cfg.x));
  Table t;
  t.header = {"x", "y", "k_re", "k_im", "G_re", "G_im", "G_oracle_re", "G_oracle_im", "abs_err"};
  std::vector<std::vector<std::vector<double>>> blocks(ks.size());
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    const auto G = green_reflection_batch(model, xy, ks[i], cfg.solver);
    const auto D = green_direct_batch(model, xy, ks[i], cfg.solver);
    for (std::size_t p = 0; p < xy.size(); ++p)
      blocks[i].push_back({xy[p].first, xy[p].second, ks[i].real(), ks[i].imag(), G[p].real(),
                           G[p].imag(), D[p].real(), D[p].imag(), std::abs(G[p] - D[p])});
  });
  for (auto& b : blocks)
    for (auto& r : b) t.rows.push_back(std::move(r));
  return t;
}

Table high_table(const RunConfig& cfg, const PotentialModel& model) {
  const auto ks = cfg.k_sweep.points();
  Table t;
  t.header = {"x", "k_re", "k_im", "order", "series_re", "series_im", "riccati_re", "riccati_im",
              "abs_err"};
  std::vector<std::vector<std::vector<double>>> blocks(ks.size());
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    const cplx exact = rhat_semiinf_xi(model, cfg.x, cfg.xi, cfg.mu, ks[i], cfg.solver);
    for (int n = 1; n <= cfg.orders; ++n) {
      const cplx s = high_series(model, cfg.x, ks[i], n, cfg.xi, cfg.mu);
      blocks[i].push_back({cfg.x, ks[i].real(), ks[i].imag(), double(n), s.real(), s.imag(),
                           exact.real(), exact.imag(), std::abs(s - exact)});
    }
  });
  for (auto& b : blocks)
    for (auto& r : b) t.rows.push_back(std::move(r));
  return t;
}

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

std::string json_string(const std::string& s) { return json(s).dump(); }

}  // namespace

const char* command_name(Command c) {
  switch (c) {
    case Command::Scatter: return "scatter";
    case Command::Green: return "green";
    case Command::LowExpand: return "low-expand";
    case Command::HighExpand: return "high-expand";
    case Command::Verify: return "verify";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Scatter, Command::Green, Command::LowExpand, Command::HighExpand,
                    Command::Verify})
    if (name == command_name(c)) return c;
  config_error("unknown command '" + name + "'");
}

std::vector<cplx> KSweep::points() const {
  const cplx dir = ray / std::abs(ray);
  std::vector<cplx> out(count);
  for (int i = 0; i < count; ++i) {
    double s = start;
    if (count > 1) {
      const double u = double(i) / (count - 1);
      s = spacing == Spacing::Log ? start * std::pow(stop / start, u) : start + (stop - start) * u;
    }
    out[i] = dir * s;
  }
  return out;
}

cplx parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.empty()) config_error("empty complex number");
  const auto comma = s.find(',');
  char* end = nullptr;
  if (comma != std::string::npos) {
    const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
    const double re = std::strtod(a.c_str(), &end);
    if (a.empty() || *end) config_error("bad complex number '" + text + "'");
    const double im = std::strtod(b.c_str(), &end);
    if (b.empty() || *end) config_error("bad complex number '" + text + "'");
    return {re, im};
  }
  if (s.back() != 'i' && s.back() != 'j') {
    const double re = std::strtod(s.c_str(), &end);
    if (*end) config_error("bad complex number '" + text + "'");
    return {re, 0.0};
  }
  s.pop_back();
  // Split at the last sign that is not part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;)
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  auto parse_part = [&](const std::string& p) {
    if (p.empty() || p == "+") return 1.0;
    if (p == "-") return -1.0;
    const double v = std::strtod(p.c_str(), &end);
    if (*end) config_error("bad complex number '" + text + "'");
    return v;
  };
  if (split == std::string::npos) return {0.0, parse_part(s)};
  const std::string a = s.substr(0, split);
  const double re = std::strtod(a.c_str(), &end);
  if (*end) config_error("bad complex number '" + text + "'");
  return {re, parse_part(s.substr(split))};
}

RunConfig parse_config(const std::string& json_text, const std::string& base_dir,
                       const std::string& overrides) {
  RunConfig cfg;
  try {
    const json doc = json_text.empty() ? json::object() : json::parse(json_text);
    if (!doc.is_object()) config_error("config must be a JSON object");
    for (const auto& [key, v] : doc.items()) {
      if (apply_scalar(cfg, key, v)) continue;
      if (key == "model") apply_model(cfg, v, base_dir);
      else if (key == "k_sweep") apply_sweep(cfg, v);
      else if (key == "output") apply_output(cfg, v);
      else if (key == "points") apply_points(cfg, v);
      else if (key == "tolerances") {
        if (!v.is_object()) config_error("'tolerances' must be an object");
        for (const auto& [tk, tv] : v.items()) apply_tolerance(cfg, tk, tv);
      } else if (key == "description") {
      } else {
        config_error("unknown config key '" + key + "'");
      }
    }
    if (!overrides.empty()) {
      const json ov = json::parse(overrides);
      if (!ov.is_object()) config_error("overrides must be a JSON object");
      for (const auto& [key, v] : ov.items()) {
        if (apply_scalar(cfg, key, v)) continue;
        if (key == "model") apply_model(cfg, v, "");
        else if (key == "k") {
          const cplx k = complex_value(v, "k");
          cfg.k_sweep.count = 1;
          cfg.k_sweep.spacing = Spacing::Linear;
          cfg.k_sweep.start = cfg.k_sweep.stop = std::abs(k);
          cfg.k_sweep.ray = std::abs(k) > 0 ? k : cplx(1.0, 0.0);
        } else if (key == "k_start") cfg.k_sweep.start = num(v, "k_start");
        else if (key == "k_stop") cfg.k_sweep.stop = num(v, "k_stop");
        else if (key == "count") cfg.k_sweep.count = v.get<int>();
        else if (key == "ray") cfg.k_sweep.ray = complex_value(v, "ray");
        else if (key == "spacing") cfg.k_sweep.spacing = parse_spacing(v.get<std::string>());
        else if (key == "output") cfg.output_path = v.get<std::string>();
        else if (key == "format") apply_output(cfg, json{{"format", v}});
        else apply_tolerance(cfg, key, v);
      }
    }
  } catch (const json::exception& e) {
    config_error(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::string& overrides) {
  if (path.empty()) return parse_config("", "", overrides);
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return parse_config(text, std::filesystem::path(path).parent_path().string(), overrides);
}

PotentialModel load_model(const RunConfig& cfg) {
  try {
    if (!cfg.model_json.empty()) return PotentialModel::from_json(cfg.model_json);
    return PotentialModel::from_file(cfg.model_path);
  } catch (const Error& e) {
    config_error(std::string("model: ") + e.what());
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_number(r[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& t) {
  std::string out = "[\n";
  for (std::size_t j = 0; j < t.rows.size(); ++j) {
    out += "  {";
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (i) out += ", ";
      out += json_string(t.header[i]) + ": " + json_number(t.rows[j][i]);
    }
    out += j + 1 < t.rows.size() ? "},\n" : "}\n";
  }
  return out + "]\n";
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, "empty CSV");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    for (std::string cell; std::getline(rs, cell, ',');) {
      char* end = nullptr;
      row.push_back(std::strtod(cell.c_str(), &end));
      if (*end) fail(ErrorCode::IoError, "bad CSV number '" + cell + "'");
    }
    if (row.size() != t.header.size()) fail(ErrorCode::IoError, "CSV row width differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_sweep(const RunConfig& cfg, const PotentialModel& model) {
  switch (cfg.command) {
    case Command::Scatter: return scatter_table(cfg, model);
    case Command::Green: return green_table(cfg, model);
    case Command::HighExpand: return high_table(cfg, model);
    case Command::LowExpand: return run_low_expand(cfg, model).table;
    case Command::Verify: break;
  }
  config_error("verify has no sweep table");
}

LowExpandResult run_low_expand(const RunConfig& cfg_in, const PotentialModel& model) {
  RunConfig cfg = cfg_in;
  apply_case_override(cfg, model);
  const double W = cfg.W.value_or(model.V(cfg.x));
  LowExpandResult res;
  res.coefficients = low_coefficients(model, cfg.x, W, cfg.orders, cfg.low);
  const auto ks = cfg.k_sweep.points();
  res.table.header = {"x", "W", "k_re", "k_im", "order", "series_re", "series_im",
                      "exact_re", "exact_im", "abs_err"};
  std::vector<std::vector<std::vector<double>>> blocks(ks.size());
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    const cplx exact = rhat_semiinf(model, cfg.x, W, 1.0, ks[i], cfg.solver);
    const cplx ik = cplx(0.0, 1.0) * ks[i];
    cplx acc = 0.0, p = 1.0;
    for (int n = 0; n <= cfg.orders; ++n) {
      acc += p * res.coefficients[n];
      p *= ik;
      blocks[i].push_back({cfg.x, W, ks[i].real(), ks[i].imag(), double(n), acc.real(), acc.imag(),
                           exact.real(), exact.imag(), std::abs(acc - exact)});
    }
  });
  for (auto& b : blocks)
    for (auto& r : b) res.table.rows.push_back(std::move(r));
  return res;
}

std::string coefficients_json(const std::vector<double>& c) {
  std::string out = "{";
  for (std::size_t n = 0; n < c.size(); ++n)
    out += (n ? ", \"" : "\"") + std::to_string(n) + "\": " + json_number(c[n]);
  return out + "}";
}

double loglog_slope(const std::vector<double>& ks, const std::vector<double>& errs) {
  const std::size_t n = ks.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errs[i] > 0)) return std::nan("");
    const double x = std::log(ks[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport run_verify(const RunConfig& cfg_in, const PotentialModel& model) {
  RunConfig cfg = cfg_in;
  apply_case_override(cfg, model);
  VerifyReport rep;
  const double x = cfg.x;
  const TailClass tail = model.left_tail();

  // Invariants on seeded random intervals around x.
  {
    std::mt19937 rng(20240601);
    std::uniform_real_distribution<double> ux(x - 3, x + 3), ur(-5, 5), ui(0, 1);
    double det = 0, comp = 0, unit = 0, bound = 0;
    for (int i = 0; i < 20; ++i) {
      std::array<double, 3> p{ux(rng), ux(rng), ux(rng)};
      std::sort(p.begin(), p.end());
      const cplx k(ur(rng), ui(rng));
      const auto Uxy = transfer_matrix(model, p[2], p[1], k, cfg.solver);
      const auto Uyz = transfer_matrix(model, p[1], p[0], k, cfg.solver);
      const auto Uxz = transfer_matrix(model, p[2], p[0], k, cfg.solver);
      const auto P = Uxy * Uyz;
      det = std::max(det, std::abs(Uxz.det() - 1.0));
      const double scale = std::max(1.0, std::abs(Uxz.alpha_plus));
      comp = std::max({comp, std::abs(P.alpha_plus - Uxz.alpha_plus) / scale,
                       std::abs(P.beta_plus - Uxz.beta_plus) / scale,
                       std::abs(P.alpha_minus - Uxz.alpha_minus) / scale,
                       std::abs(P.beta_minus - Uxz.beta_minus) / scale});
      const auto t = scattering_coeffs(transfer_matrix(model, p[2], p[0], k.real(), cfg.solver));
      unit = std::max(unit, std::abs(std::norm(t.tau) + std::norm(t.R_r) - 1.0));
      if (tail.asymptotics_ok && k.imag() > 0)
        bound = std::max(bound, std::abs(reflect_semiinf(model, p[2], k, cfg.solver)) - 1.0);
    }
    rep.checks.push_back({"det_U", det < 1e-10, det, 1e-10, false, "max |det U - 1|"});
    rep.checks.push_back({"composition", comp < 1e-9, comp, 1e-9, false, "max |U(x,y)U(y,z) - U(x,z)|"});
    rep.checks.push_back({"unitarity", unit < 1e-8, unit, 1e-8, false, "max ||tau|^2 + |R_r|^2 - 1|"});
    rep.checks.push_back({"reflection_bound", bound <= 1e-12, bound, 1e-12, false, "max |R_r| - 1"});
  }

  // Reflection-route Green function against the Wronskian construction.
  {
    std::vector<std::pair<double, double>> xy;
    for (double a : {x - 1, x, x + 1})
      for (double b : {x - 1, x, x + 1}) xy.emplace_back(a, b);
    double err = 0;
    for (cplx k : {cplx(0.3, 0.4), cplx(1.0, 0.5), cplx(0.0, 2.0)}) {
      const auto G = green_reflection_batch(model, xy, k, cfg.solver);
      const auto D = green_direct_batch(model, xy, k, cfg.solver);
      for (std::size_t i = 0; i < xy.size(); ++i) err = std::max(err, std::abs(G[i] - D[i]));
    }
    rep.checks.push_back({"green_equivalence", err < 1e-6, err, 1e-6, false,
                          "max |G_reflection - G_direct| on a 3x3 grid, 3 k values"});
  }

  // Low-energy remainder slopes on k = i|k|, |k| in [1e-3, 1e-1].
  {
    const double W = model.V(x) + 0.3;
    const auto coef = low_coefficients(model, x, W, cfg.orders, cfg.low);
    SolverOptions o = cfg.solver;
    o.extended = true;
    o.cutoff_tol = std::min(o.cutoff_tol, 1e-16);
    const auto ks = geomspace(1e-3, 1e-1, 5);
    std::vector<cplx> exact(ks.size());
    parallel_for(ks.size(), cfg.threads,
                 [&](std::size_t i) { exact[i] = rhat_semiinf(model, x, W, 1.0, cplx(0.0, ks[i]), o); });
    for (int N = 0; N <= cfg.orders; ++N) {
      std::vector<double> errs;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        const cplx ik(-ks[i], 0.0);
        cplx s = 0.0, p = 1.0;
        for (int n = 0; n <= N; ++n) {
          s += p * coef[n];
          p *= ik;
        }
        errs.push_back(std::abs(exact[i] - s));
      }
      const double slope = loglog_slope(ks, errs);
      const bool exact_fit = std::isnan(slope);
      const double thr = N + 1 - 0.2;
      rep.checks.push_back({"low_energy_slope_N" + std::to_string(N), exact_fit || slope >= thr, slope,
                            thr, exact_fit,
                            std::string("tail ") + tail_variant_name(tail.variant) + ", W = V(x) + 0.3"});
    }
  }

  // High-energy remainder slopes over |k| in [10, 100] on two rays.
  if (cfg.orders >= 1) {
    const auto report = high_energy_tail_check(model, cfg.orders);
    const bool tail_ok = std::all_of(report.integrable.begin(), report.integrable.end(),
                                     [](bool b) { return b; });
    const bool smooth = model.max_derivative_order() >= cfg.orders - 1;
    const auto ks = geomspace(10.0, 100.0, 6);
    SolverOptions o = cfg.solver;
    o.rtol = std::min(o.rtol, 1e-13);
    o.atol = std::min(o.atol, 1e-16);
    for (double arg : {0.1, M_PI / 4}) {
      const std::string ray = arg == 0.1 ? "_arg0.1" : "_argpi/4";
      if (!tail_ok || !smooth || !tail.asymptotics_ok) {
        for (int N = 1; N <= cfg.orders; ++N)
          rep.checks.push_back({"high_energy_slope_N" + std::to_string(N) + ray,
                                true, std::nan(""), -(N + 1) + 0.2, false,
                                "not applicable: tail integrability or smoothness fails"});
        continue;
      }
      std::vector<cplx> exact(ks.size());
      parallel_for(ks.size(), cfg.threads,
                   [&](std::size_t i) { exact[i] = reflect_semiinf(model, x, std::polar(ks[i], arg), o); });
      for (int N = 1; N <= cfg.orders; ++N) {
        std::vector<double> errs;
        for (std::size_t i = 0; i < ks.size(); ++i)
          errs.push_back(std::abs(high_series(model, x, std::polar(ks[i], arg), N) - exact[i]));
        const double slope = loglog_slope(ks, errs);
        const bool exact_fit = std::isnan(slope);
        const double thr = -(N + 1) + 0.2;
        rep.checks.push_back({"high_energy_slope_N" + std::to_string(N) + ray,
                              exact_fit || slope <= thr, slope, thr, exact_fit, "xi = 0, mu = 1"});
      }
    }
  }
  return rep;
}

std::string to_json(const VerifyReport& r) {
  std::string out = "{\n  \"passed\": ";
  out += r.passed() ? "true" : "false";
  out += ",\n  \"checks\": [\n";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const auto& c = r.checks[i];
    out += "    {\"name\": " + json_string(c.name) + ", \"passed\": " + (c.passed ? "true" : "false") +
           ", \"measured\": " + (c.exact ? std::string("\"exact\"") : json_number(c.measured)) +
           ", \"threshold\": " + json_number(c.threshold) + ", \"detail\": " + json_string(c.detail) +
           "}";
    out += i + 1 < r.checks.size() ? ",\n" : "\n";
  }
  return out + "  ]\n}\n";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfRange:
    case ErrorCode::UnsupportedOrder:
    case ErrorCode::DivergentCoefficient:
    case ErrorCode::Unclassifiable:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

int run(const RunConfig& cfg, std::ostream& diag) {
  const PotentialModel model = load_model(cfg);
  auto emit = [&](const std::string& text) {
    if (to_stdout(cfg)) {
      std::fwrite(text.data(), 1, text.size(), stdout);
      std::fflush(stdout);
    } else {
      write_file(cfg.output_path, text);
    }
  };
  switch (cfg.command) {
    case Command::Verify: {
      const auto rep = run_verify(cfg, model);
      if (cfg.format == OutputFormat::Json) {
        emit(to_json(rep));
      } else {
        std::string out = "check,passed,measured,threshold\n";
        for (const auto& c : rep.checks)
          out += c.name + "," + (c.passed ? "1" : "0") + "," +
                 (c.exact ? std::string("exact") : format_number(c.measured)) + "," +
                 format_number(c.threshold) + "\n";
        emit(out);
      }
      for (const auto& c : rep.checks)
        if (!c.passed) diag << "FAIL " << c.name << ": measured " << format_number(c.measured) << "\n";
      return rep.passed() ? kExitOk : kExitCheckFailure;
    }
    case Command::LowExpand: {
      const auto res = run_low_expand(cfg, model);
      const std::string coeffs = coefficients_json(res.coefficients);
      if (cfg.format == OutputFormat::Json) {
        emit("{\"coefficients\": " + coeffs + ",\n\"table\": " + to_json(res.table) + "}\n");
      } else {
        emit(to_csv(res.table));
        if (to_stdout(cfg)) diag << coeffs << "\n";
        else write_file(cfg.output_path + ".coefficients.json", coeffs + "\n");
      }
      return kExitOk;
    }
    default: {
      const Table t = run_sweep(cfg, model);
      emit(cfg.format == OutputFormat::Json ? to_json(t) : to_csv(t));
      return kExitOk;
    }
  }
}

int run_command(const std::string& command, const std::string& config_path,
                const std::string& overrides, std::ostream& diag) {
  try {
    json ov = overrides.empty() ? json::object() : json::parse(overrides);
    ov["command"] = command;
    const RunConfig cfg = load_config(config_path, ov.dump());
    return run(cfg, diag);
  } catch (const Error& e) {
    diag << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    diag << "error [ConfigError]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace reflkit::cli
