#ifndef QSAMPLER_COMMANDS_HPP
#define QSAMPLER_COMMANDS_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsampler/classical.hpp"
#include "qsampler/diagnostics.hpp"
#include "qsampler/harper.hpp"
#include "qsampler/io.hpp"
#include "qsampler/samplers.hpp"
#include "qsampler/version.hpp"
#include "qsampler/weyl.hpp"

namespace qsampler::cli {

/// Configuration that fails schema validation; the CLI exits with status 2.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitContract = 3;

/// Values given on the command line (or through the environment); each one
/// replaces the same-named field of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

/// Settings shared by every command.
struct RunContext {
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out = ".";
  TableFormat format = TableFormat::csv;
};

// ---------------------------------------------------------------------------
// Config access

/// Typed, schema-checked view of a config object.
class Config {
 public:
  Config(nlohmann::json j, std::string command, std::set<std::string> command_keys)
      : j_(std::move(j)), command_(std::move(command)) {
    if (!j_.is_object()) fail("config must be a JSON object");
    static const std::set<std::string> common = {"seed", "workers", "out", "format"};
    for (const auto& item : j_.items()) {
      if (!common.count(item.key()) && !command_keys.count(item.key())) {
        fail("unknown field '" + item.key() + "'");
      }
    }
  }

  const nlohmann::json& json() const { return j_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(command_ + " config: " + msg);
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback,
                       std::int64_t min, const std::string& what) const {
    if (!has(key)) {
      if (!fallback) fail("missing required field '" + key + "' (" + what + ")");
      return *fallback;
    }
    const auto& v = j_[key];
    if (!v.is_number_integer()) fail("field '" + key + "' must be " + what);
    const auto x = v.get<std::int64_t>();
    if (x < min) fail("field '" + key + "' must be " + what);
    return x;
  }

  double number(const std::string& key, double fallback, bool positive = false) const {
    if (!has(key)) return fallback;
    const auto& v = j_[key];
    if (!v.is_number()) fail("field '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || (positive && !(x > 0.0))) {
      fail("field '" + key + (positive ? "' must be a positive finite number" : "' must be finite"));
    }
    return x;
  }

  std::string string(const std::string& key, std::optional<std::string> fallback) const {
    if (!has(key)) {
      if (!fallback) fail("missing required field '" + key + "' (string)");
      return *fallback;
    }
    if (!j_[key].is_string()) fail("field '" + key + "' must be a string");
    return j_[key].get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_boolean()) fail("field '" + key + "' must be true or false");
    return j_[key].get<bool>();
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback, int min) const {
    if (!has(key)) return fallback;
    const auto& v = j_[key];
    if (!v.is_array() || v.empty()) fail("field '" + key + "' must be a non-empty integer array");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < min) {
        fail("entries of '" + key + "' must be integers >= " + std::to_string(min));
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<std::string> string_list(const std::string& key,
                                       std::optional<std::vector<std::string>> fallback,
                                       const std::set<std::string>& allowed) const {
    if (!has(key)) {
      if (!fallback) fail("missing required field '" + key + "' (array of strings)");
      return *fallback;
    }
    const auto& v = j_[key];
    if (!v.is_array() || v.empty()) fail("field '" + key + "' must be a non-empty string array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string() || !allowed.count(e.get<std::string>())) {
        std::string names;
        for (const auto& a : allowed) names += (names.empty() ? "" : ", ") + a;
        fail("entries of '" + key + "' must be one of: " + names);
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

 private:
  nlohmann::json j_;
  std::string command_;
};

/// Config file contents (or {} without a file) with the overrides applied.
inline nlohmann::json load_config(const std::optional<std::filesystem::path>& path,
                                  const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (path) {
    std::string text;
    try {
      text = read_text(*path);
    } catch (const IoError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config: '" + path->string() + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  }
  if (o.seed) j["seed"] = *o.seed;
  if (o.workers) j["workers"] = *o.workers;
  if (o.out) j["out"] = *o.out;
  if (o.format) j["format"] = *o.format;
  return j;
}

inline RunContext run_context(const Config& c) {
  RunContext ctx;
  if (c.has("seed")) {
    const auto& v = c.json()["seed"];
    const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!ok) c.fail("field 'seed' must be an unsigned 64-bit integer");
    ctx.seed = v.get<std::uint64_t>();
  }
  ctx.workers = static_cast<int>(c.integer("workers", 1, 1, "an integer >= 1"));
  ctx.out = c.string("out", ".");
  try {
    ctx.format = table_format_from_string(c.string("format", "csv"));
  } catch (const InvalidArgument& e) {
    c.fail(e.what());
  }
  return ctx;
}

/// Header shared by every metadata document. Output location and worker count
/// do not affect results, so they are left out of the recorded config.
inline nlohmann::json metadata_header(const std::string& command, const Config& c,
                                      const RunContext& ctx) {
  nlohmann::json cfg = c.json();
  cfg.erase("out");
  cfg.erase("workers");
  return {{"command", command}, {"version", kVersion}, {"seed", ctx.seed}, {"config", cfg}};
}

inline void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory '" + dir.string() + "'");
  }
}

// ---------------------------------------------------------------------------
// Propagator sources

inline const std::set<std::string> kSourceKeys = {"source", "N",       "params",       "rates",
                                                  "n_periods", "n_tau", "unitarity_tol"};

/// A propagator to generate: named reference system or inline parameters.
struct PropagatorSource {
  std::string label;
  int N = 2;
  std::variant<HarperParams, DriftSchedule, std::monostate> system;  // monostate: Haar
  HarperParams basis_params;  // parameters defining the h0 eigenbasis
  int n_tau = 0;              // steps per period
  double unitarity_tol = kDefaultUnitarityTol;

  bool is_haar() const { return std::holds_alternative<std::monostate>(system); }
};

namespace detail {

inline void apply_param_object(const Config& c, const std::string& key, HarperParams* p,
                               ParamRates* r) {
  const auto& obj = c.json()[key];
  if (!obj.is_object()) c.fail("field '" + key + "' must be an object");
  for (const auto& item : obj.items()) {
    ParamTarget t;
    try {
      t = param_target_from_string(item.key());
    } catch (const InvalidArgument&) {
      c.fail("unknown parameter '" + item.key() + "' in '" + key + "'");
    }
    if (is_rate(t) != (r != nullptr)) {
      c.fail("parameter '" + item.key() + "' does not belong in '" + key + "'");
    }
    if (!item.value().is_number() || !std::isfinite(item.value().get<double>())) {
      c.fail("parameter '" + item.key() + "' must be a finite number");
    }
    HarperParams scratch_p;
    ParamRates scratch_r;
    qsampler::detail::target_slot(t, p ? *p : scratch_p, r ? *r : scratch_r) =
        item.value().get<double>();
  }
}

}  // namespace detail

inline nlohmann::json describe(const PropagatorSource& s) {
  nlohmann::json j = {{"source", s.label}, {"N", s.N}, {"n_tau", s.n_tau}};
  if (const auto* p = std::get_if<HarperParams>(&s.system)) {
    j["kind"] = "floquet";
    j["params"] = params_to_json(*p);
  } else if (const auto* d = std::get_if<DriftSchedule>(&s.system)) {
    j["kind"] = "drift";
    j["params"] = params_to_json(d->initial);
    j["rates"] = rates_to_json(d->rates);
    j["n_periods"] = d->n_periods;
  } else {
    j["kind"] = "haar";
  }
  return j;
}

/// Source from the fields: source (U_Ta, U_Tb, U_Drift, U_Haar or custom), N,
/// params, rates, n_periods, n_tau, unitarity_tol.
inline PropagatorSource parse_source(const Config& c) {
  PropagatorSource s;
  s.label = c.string("source", "custom");
  s.N = static_cast<int>(c.integer("N", std::nullopt, 2, "an integer >= 2"));
  s.n_tau = static_cast<int>(c.integer("n_tau", default_n_tau(s.N), 1, "an integer >= 1"));
  s.unitarity_tol = c.number("unitarity_tol", kDefaultUnitarityTol, true);

  HarperParams p;
  ParamRates r;
  int n_periods = 1;
  bool drift = false;
  if (s.label == "U_Ta") {
    p = ergodic_floquet_params(s.N);
  } else if (s.label == "U_Tb") {
    p = hybrid_floquet_params(s.N);
  } else if (s.label == "U_Drift") {
    const auto ref = reference_drift_schedule(s.N);
    p = ref.initial;
    r = ref.rates;
    n_periods = ref.n_periods;
    drift = true;
  } else if (s.label == "U_Haar") {
    p = ergodic_floquet_params(s.N);
  } else if (s.label == "custom") {
    if (!c.has("params")) c.fail("source 'custom' requires field 'params'");
    p.N = s.N;
  } else {
    c.fail("unknown source '" + s.label + "' (expected U_Ta, U_Tb, U_Drift, U_Haar or custom)");
  }
  if (c.has("params")) detail::apply_param_object(c, "params", &p, nullptr);
  if (c.has("rates")) {
    if (s.label != "custom" && s.label != "U_Drift") {
      c.fail("field 'rates' applies only to custom or U_Drift sources");
    }
    detail::apply_param_object(c, "rates", nullptr, &r);
    drift = true;
  }
  if (c.has("n_periods")) {
    if (!drift) c.fail("field 'n_periods' applies only to drifting sources");
    n_periods = static_cast<int>(c.integer("n_periods", 1, 1, "an integer >= 1"));
  }
  p.N = s.N;
  s.basis_params = p;
  if (s.label == "U_Haar") {
    s.system = std::monostate{};
  } else if (drift) {
    s.system = DriftSchedule{p, r, n_periods};
  } else {
    s.system = p;
  }
  return s;
}

/// Builds the propagator and enforces the configured unitarity tolerance.
inline UnitaryMatrix build_propagator(const PropagatorSource& s, std::uint64_t seed) {
  auto u = [&]() -> UnitaryMatrix {
    if (const auto* p = std::get_if<HarperParams>(&s.system)) return floquet_propagator(*p, s.n_tau);
    if (const auto* d = std::get_if<DriftSchedule>(&s.system)) return drift_propagator(*d, s.n_tau);
    auto rng = substream(seed, 0, 0);
    return haar_unitary(s.N, rng);
  }();
  if (!(u.defect() < s.unitarity_tol)) {
    throw ContractViolation("propagator unitarity defect " + format_double(u.defect()) +
                            " exceeds tolerance " + format_double(s.unitarity_tol));
  }
  return u;
}

// ---------------------------------------------------------------------------
// Commands. Each returns the list of files written, relative to ctx.out.

using FileList = std::vector<std::string>;

inline FileList cmd_propagator(const nlohmann::json& config) {
  const Config c(config, "propagator", kSourceKeys);
  const RunContext ctx = run_context(c);
  const PropagatorSource src = parse_source(c);
  const UnitaryMatrix u = build_propagator(src, ctx.seed);
  prepare_out_dir(ctx.out);

  FileList files = {"propagator.c128", "propagator.c128.json"};
  write_c128(ctx.out, "propagator", u.matrix());
  if (ctx.format == TableFormat::json) {
    write_json(ctx.out / "propagator.json",
               {{"N", src.N}, {"layout", "row-major"}, {"data", complex_pairs_json(u.matrix())}});
    files.push_back("propagator.json");
  }

  Table phases{{"index", "phase"}, {}};
  const auto ph = eigenphases(u);
  for (std::size_t i = 0; i < ph.size(); ++i) phases.add({static_cast<double>(i), ph[i]});
  files.push_back(write_table(ctx.out, "eigenphases", phases, ctx.format));

  nlohmann::json meta = metadata_header("propagator", c, ctx);
  meta["propagator"] = describe(src);
  meta["n_tau"] = src.n_tau;
  meta["defect"] = u.defect();
  meta["unitarity_tol"] = src.unitarity_tol;
  files.push_back("metadata.json");
  meta["files"] = files;
  write_json(ctx.out / "metadata.json", meta);
  return files;
}

inline SamplerSpec resolve_sampler(const Config& c) {
  if (!c.has("sampler")) c.fail("missing required field 'sampler' (name or inline spec)");
  const auto& v = c.json()["sampler"];
  SamplerSpec spec;
  if (v.is_string()) {
    auto found = find_sampler(v.get<std::string>());
    if (!found) c.fail("unknown sampler '" + v.get<std::string>() + "' (see list-samplers)");
    spec = *found;
  } else if (v.is_object()) {
    try {
      spec = sampler_from_json(v);
    } catch (const InvalidArgument& e) {
      c.fail(std::string("inline sampler: ") + e.what());
    }
  } else {
    c.fail("field 'sampler' must be a name or an object");
  }
  if (c.has("N")) {
    spec.N = static_cast<int>(c.integer("N", std::nullopt, 1, "an integer >= 1"));
    spec.fiducial.N = spec.N;
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    c.fail(e.what());
  }
  return spec;
}

inline FileList cmd_frame_potential(const nlohmann::json& config) {
  const Config c(config, "frame-potential",
                 {"sampler", "N", "n_pairs", "ks", "n_tau", "write_samples"});
  const RunContext ctx = run_context(c);
  const SamplerSpec spec = resolve_sampler(c);
  const int n_pairs = static_cast<int>(c.integer("n_pairs", 1000, 1, "an integer >= 1"));
  const auto ks = c.int_list("ks", {1, 2, 3}, 1);
  const int n_tau = static_cast<int>(c.integer("n_tau", 0, 0, "an integer >= 0"));
  const bool write_samples = c.boolean("write_samples", false);
  prepare_out_dir(ctx.out);

  const auto start = std::chrono::steady_clock::now();
  const auto z = sample_pair_traces(spec, n_pairs, ctx.seed, {n_tau, ctx.workers});
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto est = frame_potentials(z, ks);

  nlohmann::json meta = metadata_header("frame-potential", c, ctx);
  meta["sampler"] = to_json(spec);
  meta["n_pairs"] = n_pairs;
  meta["n_tau"] = spec.mode == SamplerMode::haar ? 0 : (n_tau > 0 ? n_tau : default_n_tau(spec.N));
  meta["estimates"] = nlohmann::json::array();
  for (const auto& e : est) meta["estimates"].push_back(to_json(e, spec.name, ctx.seed));
  meta["epsilon"] = nlohmann::json::array();
  for (const auto& e : epsilon_report(est)) {
    meta["epsilon"].push_back({{"k", e.k}, {"epsilon", e.epsilon}, {"error_floor", e.error_floor}});
  }
  meta["runtime_seconds"] = runtime;

  FileList files = {"frame_potential.json"};
  if (write_samples) {
    Table t{{"pair", "z"}, {}};
    for (std::size_t i = 0; i < z.size(); ++i) t.add({static_cast<double>(i), z[i]});
    files.push_back(write_table(ctx.out, "pair_traces", t, ctx.format));
  }
  meta["files"] = files;
  write_json(ctx.out / "frame_potential.json", meta);
  return files;
}

namespace detail {

inline Basis basis_for(const std::string& name, const PropagatorSource& s) {
  if (name == "angle") return angle_basis(s.N);
  return h0_eigenbasis(s.basis_params);
}

inline nlohmann::json moments_json(const MomentReport& m) {
  return {{"m2", m.m2}, {"se2", m.se2}, {"m3", m.m3}, {"se3", m.se3}};
}

/// Exact Haar moments of N z for one squared overlap.
inline double haar_overlap_moment(int n, int q) {
  double m = std::tgamma(q + 1.0);
  for (int i = 0; i < q; ++i) m *= static_cast<double>(n) / (n + i);
  return m;
}

}  // namespace detail

inline const std::set<std::string> kDiagnosticNames = {"spacing", "moments", "ipr",
                                                       "op-coefficients", "husimi"};

inline FileList cmd_diagnostics(const nlohmann::json& config) {
  std::set<std::string> keys = kSourceKeys;
  keys.insert({"diagnostics", "bases", "ipr_q", "bins", "surmise", "husimi_resolution",
               "husimi_states"});
  const Config c(config, "diagnostics", keys);
  const RunContext ctx = run_context(c);
  const PropagatorSource src = parse_source(c);
  const auto wanted = c.string_list("diagnostics", std::nullopt, kDiagnosticNames);
  const auto bases = c.string_list("bases", std::vector<std::string>{"angle"}, {"angle", "h0"});
  const auto qs = c.int_list("ipr_q", {2, 3}, 2);
  const int bins = static_cast<int>(c.integer("bins", 40, 1, "an integer >= 1"));
  const std::string surmise_name = c.string("surmise", "wigner");
  if (surmise_name != "wigner" && surmise_name != "unnormalized") {
    c.fail("field 'surmise' must be 'wigner' or 'unnormalized'");
  }
  const SurmiseForm surmise =
      surmise_name == "wigner" ? SurmiseForm::wigner : SurmiseForm::unnormalized;
  const int resolution =
      static_cast<int>(c.integer("husimi_resolution", src.N, 1, "an integer >= 1"));
  const int husimi_states = static_cast<int>(
      c.integer("husimi_states", std::min(src.N, 8), 1, "an integer >= 1"));
  if (husimi_states > src.N) c.fail("field 'husimi_states' must not exceed N");

  const UnitaryMatrix u = build_propagator(src, ctx.seed);
  prepare_out_dir(ctx.out);

  nlohmann::json header = metadata_header("diagnostics", c, ctx);
  header["propagator"] = describe(src);
  header["defect"] = u.defect();

  FileList files;
  const auto emit_meta = [&](const std::string& name, nlohmann::json body) {
    nlohmann::json meta = header;
    meta["diagnostic"] = name;
    meta.update(body);
    write_json(ctx.out / (name + ".meta.json"), meta);
    files.push_back(name + ".meta.json");
  };

  for (const auto& name : wanted) {
    if (name == "spacing") {
      const auto ph = eigenphases(u);
      const auto s = spacing_sample(ph);
      Table t{{"index", "phase", "spacing"}, {}};
      for (std::size_t i = 0; i < s.spacings.size(); ++i) {
        t.add({static_cast<double>(i), ph[i], s.spacings[i]});
      }
      files.push_back(write_table(ctx.out, "spacing", t, ctx.format));
      const auto h = histogram(s.spacings, 0.0, 4.0, bins);
      Table ht{{"s_lo", "s_hi", "count", "density", "surmise_pdf"}, {}};
      for (int b = 0; b < bins; ++b) {
        const double lo = b * h.bin_width(), hi = lo + h.bin_width();
        const double count = static_cast<double>(h.counts[static_cast<std::size_t>(b)]);
        ht.add({lo, hi, count, count / (s.spacings.size() * h.bin_width()),
                cue_surmise_pdf(0.5 * (lo + hi), surmise)});
      }
      files.push_back(write_table(ctx.out, "spacing_histogram", ht, ctx.format));
      emit_meta("spacing",
                {{"surmise", surmise_name},
                 {"n_spacings", s.spacings.size()},
                 {"ks_distance", ks_distance(s.spacings, [](double x) { return cue_surmise_cdf(x); })},
                 {"ks_distance_unnormalized",
                  ks_distance(s.spacings,
                              [](double x) { return cue_surmise_cdf(x, SurmiseForm::unnormalized); })}});
    } else if (name == "moments") {
      nlohmann::json per_basis = nlohmann::json::object();
      for (const auto& bname : bases) {
        const auto t = transition_matrix(u, detail::basis_for(bname, src));
        Table tt{{"j", "k", "z"}, {}};
        for (int j = 0; j < src.N; ++j)
          for (int k = 0; k < src.N; ++k) tt.add({double(j), double(k), t.z(j, k)});
        files.push_back(write_table(ctx.out, "transition_" + bname, tt, ctx.format));
        std::vector<double> z(t.z.data(), t.z.data() + t.z.size());
        const int n = src.N;
        nlohmann::json entry = detail::moments_json(trans_moments(t));
        entry["ks_porter_thomas"] = ks_distance(z, [n](double x) { return porter_thomas_cdf(x, n); });
        entry["haar_m2"] = detail::haar_overlap_moment(n, 2);
        entry["haar_m3"] = detail::haar_overlap_moment(n, 3);
        per_basis[bname] = entry;
      }
      emit_meta("moments", {{"bases", per_basis}});
    } else if (name == "ipr") {
      nlohmann::json per_basis = nlohmann::json::object();
      for (const auto& bname : bases) {
        const Basis b = detail::basis_for(bname, src);
        Table t{{"column", "q", "ipr"}, {}};
        nlohmann::json entry = nlohmann::json::object();
        for (int q : qs) {
          const auto v = ipr_set(u, b, q);
          for (std::size_t i = 0; i < v.size(); ++i) t.add({double(i), double(q), v[i]});
          double mean = 0.0, var = 0.0;
          for (double x : v) mean += x;
          mean /= v.size();
          for (double x : v) var += (x - mean) * (x - mean);
          const double se = std::sqrt(var / v.size()) / std::sqrt(double(v.size()));
          entry[std::to_string(q)] = {{"mean", mean},
                                      {"se", se},
                                      {"haar_asymptotic", haar_ipr_asymptotic(src.N, q)},
                                      {"haar_exact", haar_ipr_exact(src.N, q)}};
        }
        files.push_back(write_table(ctx.out, "ipr_" + bname, t, ctx.format));
        per_basis[bname] = entry;
      }
      emit_meta("ipr", {{"bases", per_basis}});
    } else if (name == "op-coefficients") {
      const auto coeff = op_decompose(u.matrix());
      const double sum = coeff.norm_squared();
      const double err = std::abs(sum - src.N);
      if (!(err <= 1e-8 * std::max(1.0, double(src.N)))) {
        throw ContractViolation("operator coefficients violate Parseval: sum " + format_double(sum) +
                                ", N " + std::to_string(src.N));
      }
      Table t{{"j", "k", "abs2"}, {}};
      for (int j = 0; j < src.N; ++j)
        for (int k = 0; k < src.N; ++k) t.add({double(j), double(k), std::norm(coeff.w(j, k))});
      files.push_back(write_table(ctx.out, "op_coefficients", t, ctx.format));
      const auto scaled = coeff.scaled_magnitudes();
      emit_meta("op-coefficients", {{"parseval_sum", sum},
                                    {"parseval_error", err},
                                    {"moments", detail::moments_json(sample_moments(scaled))}});
    } else if (name == "husimi") {
      const ComplexMatrix v = unitary_eigenvectors(u);
      const auto ph = eigenphases(u);
      Table t{{"state", "r", "c", "phi", "p", "value"}, {}};
      nlohmann::json occ = nlohmann::json::array();
      for (int s = 0; s < husimi_states; ++s) {
        const auto g = husimi_grid(v.col(s), resolution);
        for (int r = 0; r < resolution; ++r)
          for (int col = 0; col < resolution; ++col) {
            t.add({double(s), double(r), double(col), g.phi_at(col), g.p_at(r), g.values(r, col)});
          }
        occ.push_back({{"state", s}, {"eigenphase", ph[static_cast<std::size_t>(s)]},
                       {"occupancy", husimi_occupancy(g)}});
      }
      files.push_back(write_table(ctx.out, "husimi", t, ctx.format));
      emit_meta("husimi",
                {{"resolution", resolution}, {"occupancy_threshold", 0.1}, {"states", occ}});
    }
  }
  return files;
}

inline FileList cmd_poincare(const nlohmann::json& config) {
  const Config c(config, "poincare",
                 {"source", "params", "initial_points", "n_orbits", "n_periods",
                  "steps_per_period", "order", "occupancy_resolution"});
  const RunContext ctx = run_context(c);
  const std::string label = c.string("source", "custom");
  HarperParams p;
  if (label == "U_Ta") {
    p = ergodic_floquet_params(2);
  } else if (label == "U_Tb") {
    p = hybrid_floquet_params(2);
  } else if (label == "custom") {
    if (!c.has("params")) c.fail("source 'custom' requires field 'params'");
  } else {
    c.fail("unknown source '" + label + "' (expected U_Ta, U_Tb or custom)");
  }
  if (c.has("params")) detail::apply_param_object(c, "params", &p, nullptr);

  std::vector<PhasePoint> initials;
  if (c.has("initial_points")) {
    if (c.has("n_orbits")) c.fail("give either 'initial_points' or 'n_orbits', not both");
    const auto& pts = c.json()["initial_points"];
    if (!pts.is_array() || pts.empty()) c.fail("field 'initial_points' must be a non-empty array");
    for (const auto& pt : pts) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        c.fail("each initial point must be [phi, p]");
      }
      initials.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
  } else {
    const int n_orbits = static_cast<int>(c.integer("n_orbits", 10, 1, "an integer >= 1"));
    auto rng = substream(ctx.seed, 0, 0);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < n_orbits; ++i) {
      const double phi = u(rng);
      initials.push_back({phi, u(rng)});
    }
  }
  const int n_periods = static_cast<int>(c.integer("n_periods", 100, 1, "an integer >= 1"));
  const int steps = static_cast<int>(
      c.integer("steps_per_period", 1000, kMinStepsPerPeriod, "an integer >= 100"));
  const auto order_n = c.integer("order", 4, 2, "2 or 4");
  if (order_n != 2 && order_n != 4) c.fail("field 'order' must be 2 or 4");
  const int occ_res = static_cast<int>(c.integer("occupancy_resolution", 50, 1, "an integer >= 1"));
  prepare_out_dir(ctx.out);

  const auto section = poincare_section(
      initials, p, n_periods, steps,
      order_n == 2 ? IntegratorOrder::second : IntegratorOrder::fourth);

  Table t{{"orbit_id", "n", "phi", "p"}, {}};
  double max_dh0 = 0.0;
  std::vector<PhasePoint> all;
  for (std::size_t o = 0; o < section.orbits.size(); ++o) {
    const auto& orbit = section.orbits[o];
    const double h_start = classical_h0(orbit.initial, p);
    for (std::size_t n = 0; n < orbit.points.size(); ++n) {
      const auto& x = orbit.points[n];
      t.add({double(o), double(n + 1), x.phi, x.p});
      max_dh0 = std::max(max_dh0, std::abs(classical_h0(x, p) - h_start));
      all.push_back(x);
    }
  }
  FileList files = {write_table(ctx.out, "poincare", t, ctx.format)};

  nlohmann::json meta = metadata_header("poincare", c, ctx);
  nlohmann::json params = params_to_json(p);
  meta["params"] = params;
  try {
    const auto lr = libration_ratio(p);
    meta["omega0"] = lr.omega0;
    meta["lambda"] = lr.lambda;
  } catch (const DomainError&) {
    meta["omega0"] = nullptr;
    meta["lambda"] = nullptr;
  }
  meta["n_orbits"] = section.orbits.size();
  meta["n_periods"] = n_periods;
  meta["steps_per_period"] = steps;
  meta["order"] = order_n;
  meta["max_abs_delta_h0"] = max_dh0;
  meta["occupancy_resolution"] = occ_res;
  meta["occupancy"] = occupancy_fraction(all, occ_res);
  files.push_back("poincare.meta.json");
  meta["files"] = files;
  write_json(ctx.out / "poincare.meta.json", meta);
  return files;
}

/// Built-in samplers, one JSON document per line or a CSV table, on `os`.
inline void cmd_list_samplers(TableFormat format, std::ostream& os) {
  auto all = builtin_samplers();
  all.push_back(haar_control_sampler());
  if (format == TableFormat::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : all) arr.push_back(to_json(s));
    os << arr.dump(2) << "\n";
    return;
  }
  os << "name,mode,N,targets\n";
  for (const auto& s : all) {
    std::string targets;
    for (const auto& d : s.distributions) {
      targets += (targets.empty() ? "" : " ") + to_string(d.target) + ":" + to_string(d.kind);
    }
    os << s.name << ',' << to_string(s.mode) << ',' << s.N << ',' << targets << "\n";
  }
}

/// Runs `command`, mapping failures to exit codes: 2 for config or usage
/// errors, 3 for numerical contract violations.
inline int run_command(const std::string& command, const nlohmann::json& config,
                       std::ostream& out, std::ostream& err) {
  try {
    FileList files;
    if (command == "propagator") {
      files = cmd_propagator(config);
    } else if (command == "frame-potential") {
      files = cmd_frame_potential(config);
    } else if (command == "diagnostics") {
      files = cmd_diagnostics(config);
    } else if (command == "poincare") {
      files = cmd_poincare(config);
    } else if (command == "list-samplers") {
      const Config c(config, "list-samplers", {});
      cmd_list_samplers(run_context(c).format, out);
      return kExitOk;
    } else {
      err << "error: unknown command '" << command << "'\n";
      return kExitUsage;
    }
    const std::filesystem::path dir = config.value("out", std::string("."));
    for (const auto& f : files) out << (dir / f).string() << "\n";
    return kExitOk;
  } catch (const ContractViolation& e) {
    err << "numerical contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace qsampler::cli

#endif  // QSAMPLER_COMMANDS_HPP
