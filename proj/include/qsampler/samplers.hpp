#ifndef QSAMPLER_SAMPLERS_HPP
#define QSAMPLER_SAMPLERS_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsampler/harper.hpp"
#include "qsampler/linalg.hpp"

namespace qsampler {

// ---------------------------------------------------------------------------
// Random numbers

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, side), e.g. (run seed, pair id, U or V).
inline Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint32_t side) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    side};
  return Rng(seq);
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with R's diagonal phases
/// moved into Q.
template <class Urbg>
UnitaryMatrix haar_unitary(int n, Urbg& rng) {
  if (n < 1) throw InvalidDimension("haar_unitary: N must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double re = gauss(rng);
    g.data()[i] = Complex(re, gauss(rng));
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= mag > 0.0 ? d / mag : Complex(1.0);
  }
  return UnitaryMatrix(std::move(q));
}

// ---------------------------------------------------------------------------
// Sampler specifications

enum class ParamTarget {
  a, b, epsilon, mu, mu_prime, phi0, tau0,
  a_dot, b_dot, epsilon_dot, mu_dot, mu_prime_dot, phi0_dot, tau0_dot,
};

inline constexpr std::array kAllTargets = {
    ParamTarget::a,        ParamTarget::b,           ParamTarget::epsilon,
    ParamTarget::mu,       ParamTarget::mu_prime,    ParamTarget::phi0,
    ParamTarget::tau0,     ParamTarget::a_dot,       ParamTarget::b_dot,
    ParamTarget::epsilon_dot, ParamTarget::mu_dot,   ParamTarget::mu_prime_dot,
    ParamTarget::phi0_dot, ParamTarget::tau0_dot,
};

inline bool is_rate(ParamTarget t) { return static_cast<int>(t) >= static_cast<int>(ParamTarget::a_dot); }

inline std::string to_string(ParamTarget t) {
  switch (t) {
    case ParamTarget::a: return "a";
    case ParamTarget::b: return "b";
    case ParamTarget::epsilon: return "epsilon";
    case ParamTarget::mu: return "mu";
    case ParamTarget::mu_prime: return "mu_prime";
    case ParamTarget::phi0: return "phi0";
    case ParamTarget::tau0: return "tau0";
    case ParamTarget::a_dot: return "a_dot";
    case ParamTarget::b_dot: return "b_dot";
    case ParamTarget::epsilon_dot: return "epsilon_dot";
    case ParamTarget::mu_dot: return "mu_dot";
    case ParamTarget::mu_prime_dot: return "mu_prime_dot";
    case ParamTarget::phi0_dot: return "phi0_dot";
    case ParamTarget::tau0_dot: return "tau0_dot";
  }
  return "?";
}

inline ParamTarget param_target_from_string(const std::string& s) {
  for (auto t : kAllTargets) {
    if (to_string(t) == s) return t;
  }
  throw InvalidArgument("unknown parameter target '" + s + "'");
}

enum class DistributionKind { fixed, uniform_continuous, uniform_discrete_grid };

inline std::string to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::fixed: return "fixed";
    case DistributionKind::uniform_continuous: return "uniform_continuous";
    case DistributionKind::uniform_discrete_grid: return "uniform_discrete_grid";
  }
  return "?";
}

inline DistributionKind distribution_kind_from_string(const std::string& s) {
  for (auto k : {DistributionKind::fixed, DistributionKind::uniform_continuous,
                 DistributionKind::uniform_discrete_grid}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown distribution kind '" + s + "'");
}

/// One parameter's distribution. Discrete grids are {2 pi j / N : j = 0..N-1} with
/// the sampler's own N.
struct ParamDistribution {
  ParamTarget target = ParamTarget::a;
  DistributionKind kind = DistributionKind::fixed;
  double lo = 0.0;  // fixed value, or lower bound
  double hi = 0.0;  // upper bound (exclusive)

  static ParamDistribution fixed(ParamTarget t, double value) {
    return {t, DistributionKind::fixed, value, value};
  }
  static ParamDistribution uniform(ParamTarget t, double lo, double hi) {
    return {t, DistributionKind::uniform_continuous, lo, hi};
  }
  static ParamDistribution grid(ParamTarget t) {
    return {t, DistributionKind::uniform_discrete_grid, 0.0, 0.0};
  }

  template <class Urbg>
  double draw(int n, Urbg& rng) const {
    switch (kind) {
      case DistributionKind::fixed:
        return lo;
      case DistributionKind::uniform_continuous: {
        const double x = std::uniform_real_distribution<double>(lo, hi)(rng);
        return x < hi ? x : std::nextafter(hi, lo);
      }
      case DistributionKind::uniform_discrete_grid: {
        const int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
        return kTwoPi * j / n;
      }
    }
    return lo;
  }
};

enum class SamplerMode { floquet, drift, haar };

inline std::string to_string(SamplerMode m) {
  switch (m) {
    case SamplerMode::floquet: return "floquet";
    case SamplerMode::drift: return "drift";
    case SamplerMode::haar: return "haar";
  }
  return "?";
}

inline SamplerMode sampler_mode_from_string(const std::string& s) {
  for (auto m : {SamplerMode::floquet, SamplerMode::drift, SamplerMode::haar}) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown sampler mode '" + s + "'");
}

/// A distribution over unitaries: fiducial parameters plus per-parameter distributions.
/// Haar mode ignores parameters and draws Haar-random unitaries of dimension N.
struct SamplerSpec {
  std::string name;
  SamplerMode mode = SamplerMode::floquet;
  int N = 51;
  HarperParams fiducial;
  ParamRates fiducial_rates;  // drift mode only
  int n_periods = 1;          // drift mode only
  std::vector<ParamDistribution> distributions;

  void validate() const {
    if (name.empty()) throw InvalidArgument("sampler: name must be non-empty");
    if (mode == SamplerMode::haar) {
      if (N < 1) throw InvalidDimension("sampler " + name + ": N must be >= 1");
      if (!distributions.empty()) {
        throw InvalidArgument("sampler " + name + ": haar mode takes no distributions");
      }
      return;
    }
    if (N < 2) throw InvalidDimension("sampler " + name + ": N must be >= 2");
    HarperParams f = fiducial;
    f.N = N;
    f.validate();
    if (mode == SamplerMode::drift && n_periods < 1) {
      throw InvalidArgument("sampler " + name + ": n_periods must be >= 1");
    }
    std::set<ParamTarget> seen;
    for (const auto& d : distributions) {
      if (!seen.insert(d.target).second) {
        throw InvalidArgument("sampler " + name + ": parameter '" + to_string(d.target) +
                              "' distributed more than once");
      }
      if (is_rate(d.target) && mode != SamplerMode::drift) {
        throw InvalidArgument("sampler " + name + ": drift-rate target '" +
                              to_string(d.target) + "' requires drift mode");
      }
      if (!std::isfinite(d.lo) || !std::isfinite(d.hi)) {
        throw InvalidArgument("sampler " + name + ": distribution bounds must be finite");
      }
      if (d.kind == DistributionKind::uniform_continuous && !(d.lo < d.hi)) {
        throw InvalidArgument("sampler " + name + ": uniform distribution of '" +
                              to_string(d.target) + "' needs lo < hi");
      }
    }
  }
};

namespace detail {

inline double& target_slot(ParamTarget t, HarperParams& p, ParamRates& r) {
  switch (t) {
    case ParamTarget::a: return p.a;
    case ParamTarget::b: return p.b;
    case ParamTarget::epsilon: return p.epsilon;
    case ParamTarget::mu: return p.mu;
    case ParamTarget::mu_prime: return p.mu_prime;
    case ParamTarget::phi0: return p.phi0;
    case ParamTarget::tau0: return p.tau0;
    case ParamTarget::a_dot: return r.a;
    case ParamTarget::b_dot: return r.b;
    case ParamTarget::epsilon_dot: return r.epsilon;
    case ParamTarget::mu_dot: return r.mu;
    case ParamTarget::mu_prime_dot: return r.mu_prime;
    case ParamTarget::phi0_dot: return r.phi0;
    case ParamTarget::tau0_dot: return r.tau0;
  }
  throw InvalidArgument("unknown parameter target");
}

}  // namespace detail

using ParamDraw = std::variant<HarperParams, DriftSchedule>;

/// Fiducial values overridden by one draw per distribution, in listed order.
template <class Urbg>
ParamDraw draw_params(const SamplerSpec& spec, Urbg& rng) {
  if (spec.mode == SamplerMode::haar) {
    throw InvalidArgument("draw_params: haar sampler " + spec.name + " has no parameters");
  }
  HarperParams p = spec.fiducial;
  p.N = spec.N;
  ParamRates r = spec.fiducial_rates;
  for (const auto& d : spec.distributions) detail::target_slot(d.target, p, r) = d.draw(spec.N, rng);
  if (spec.mode == SamplerMode::floquet) return p;
  return DriftSchedule{p, r, spec.n_periods};
}

struct SampleOptions {
  int n_tau = 0;    // steps per period; 0 selects 4N
  int workers = 1;  // threads sharing the pair loop
};

template <class Urbg>
UnitaryMatrix generate_unitary(const SamplerSpec& spec, Urbg& rng, int n_tau = 0) {
  if (spec.mode == SamplerMode::haar) return haar_unitary(spec.N, rng);
  const int steps = n_tau > 0 ? n_tau : default_n_tau(spec.N);
  const auto draw = draw_params(spec, rng);
  if (const auto* p = std::get_if<HarperParams>(&draw)) return floquet_propagator(*p, steps);
  return drift_propagator(std::get<DriftSchedule>(draw), steps);
}

/// |tr(U V^dagger)|^2.
inline double trace_overlap(const UnitaryMatrix& u, const UnitaryMatrix& v) {
  return std::norm(u.matrix().cwiseProduct(v.matrix().conjugate()).sum());
}

/// z_i = |tr(U_i V_i^dagger)|^2 for i = 0..n_pairs-1. U_i and V_i come from the
/// substreams (seed, i, 0) and (seed, i, 1), so the result depends only on
/// (spec, n_pairs, seed, n_tau) and not on the worker count.
inline std::vector<double> sample_pair_traces(const SamplerSpec& spec, int n_pairs,
                                              std::uint64_t seed, SampleOptions opts = {}) {
  spec.validate();
  if (n_pairs < 1) throw InvalidArgument("sample_pair_traces: n_pairs must be >= 1");
  if (opts.n_tau < 0) throw InvalidArgument("sample_pair_traces: n_tau must be >= 0");
  std::vector<double> z(static_cast<std::size_t>(n_pairs));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (int i = next++; i < n_pairs; i = next++) {
      try {
        auto rng_u = substream(seed, static_cast<std::uint64_t>(i), 0);
        auto rng_v = substream(seed, static_cast<std::uint64_t>(i), 1);
        const auto u = generate_unitary(spec, rng_u, opts.n_tau);
        const auto v = generate_unitary(spec, rng_v, opts.n_tau);
        z[static_cast<std::size_t>(i)] = trace_overlap(u, v);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_pairs;
      }
    }
  };

  const int workers = std::clamp(opts.workers, 1, n_pairs);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return z;
}

// ---------------------------------------------------------------------------
// Frame potentials

struct FramePotentialEstimate {
  int k = 1;
  double value = 0.0;
  double std_err = 0.0;
  int n_pairs = 0;
};

/// F^(k) = <z^k>, sigma_k = sqrt(<z^2k> - <z^k>^2) / sqrt(n).
inline std::vector<FramePotentialEstimate> frame_potentials(const std::vector<double>& z,
                                                            const std::vector<int>& ks) {
  if (z.empty()) throw InvalidArgument("frame_potentials: empty sample");
  const double n = static_cast<double>(z.size());
  std::vector<FramePotentialEstimate> out;
  out.reserve(ks.size());
  for (int k : ks) {
    if (k < 1) throw InvalidArgument("frame_potentials: k must be >= 1");
    double s = 0.0, s2 = 0.0;
    for (double x : z) {
      const double xk = std::pow(x, k);
      s += xk;
      s2 += xk * xk;
    }
    const double mean = s / n;
    const double var = std::max(s2 / n - mean * mean, 0.0);
    out.push_back({k, mean, std::sqrt(var) / std::sqrt(n), static_cast<int>(z.size())});
  }
  return out;
}

struct EpsilonEntry {
  int k = 1;
  double epsilon = 0.0;      // sqrt(max(F - k!, 0))
  double error_floor = 0.0;  // sqrt(sigma_k)
};

using EpsilonReport = std::vector<EpsilonEntry>;

inline EpsilonReport epsilon_report(const std::vector<FramePotentialEstimate>& est) {
  EpsilonReport out;
  out.reserve(est.size());
  for (const auto& e : est) {
    const double haar = std::tgamma(e.k + 1.0);
    out.push_back({e.k, std::sqrt(std::max(e.value - haar, 0.0)), std::sqrt(e.std_err)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in samplers

inline HarperParams floquet_sampler_fiducial(int n = 51) {
  return HarperParams{n, 3.0, 0.0, 3.0, 3.0, 3.1, 0.0, 0.0};
}

inline SamplerSpec floquet_sampler(std::string name, std::vector<ParamDistribution> dists,
                                   int n = 51) {
  SamplerSpec s;
  s.name = std::move(name);
  s.mode = SamplerMode::floquet;
  s.N = n;
  s.fiducial = floquet_sampler_fiducial(n);
  s.distributions = std::move(dists);
  return s;
}

inline SamplerSpec drift_sampler(std::string name, std::vector<ParamDistribution> dists) {
  SamplerSpec s;
  s.name = std::move(name);
  s.mode = SamplerMode::drift;
  s.N = 51;
  s.fiducial = HarperParams{51, 3.0, 0.0, 3.01, 1.0, 0.5, 0.0, 0.0};
  s.fiducial_rates.mu = 0.1;
  s.fiducial_rates.mu_prime = 0.15;
  s.n_periods = 3;
  s.distributions = std::move(dists);
  return s;
}

inline SamplerSpec haar_control_sampler(int n = 51) {
  SamplerSpec s;
  s.name = "Haar-control";
  s.mode = SamplerMode::haar;
  s.N = n;
  s.fiducial.N = n;
  return s;
}

/// The twelve Floquet and five drifting samplers.
inline std::vector<SamplerSpec> builtin_samplers() {
  using T = ParamTarget;
  using D = ParamDistribution;
  const D b = D::uniform(T::b, 0.0, kTwoPi);
  const D phi = D::uniform(T::phi0, 0.0, kTwoPi);
  const D tau = D::uniform(T::tau0, 0.0, kTwoPi);
  const D mu36 = D::uniform(T::mu, 3.0, 6.0);
  const D mup = D::uniform(T::mu_prime, 3.1, 5.1);
  const D mudot = D::uniform(T::mu_dot, 0.1, 0.6);
  return {
      floquet_sampler("Cmumup", {D::uniform(T::mu, 3.0, 7.0), D::uniform(T::mu_prime, 3.1, 7.1)}),
      floquet_sampler("Dbphi", {D::grid(T::b), D::grid(T::phi0)}),
      floquet_sampler("Dbtau", {D::grid(T::b), D::grid(T::tau0)}),
      floquet_sampler("Cbphi", {b, phi}),
      floquet_sampler("Cbtau", {b, tau}),
      floquet_sampler("Ctaumu", {tau, mu36}),
      floquet_sampler("Cbphimu", {b, phi, mu36}),
      floquet_sampler("Cbtaumu", {b, tau, mu36}),
      floquet_sampler("C1btaumumup", {b, tau, mu36, mup}),
      floquet_sampler("C2btaumumup", {b, tau, mu36, mup}, 30),
      floquet_sampler("C3btaumumup", {b, tau, mu36, mup}, 70),
      floquet_sampler("C4btaumumup",
                      {b, tau, D::uniform(T::mu, 1.0, 4.0), D::uniform(T::mu_prime, 0.0, 2.0)}),
      drift_sampler("Dr1bdotmudot", {D::uniform(T::b_dot, 0.0, 0.1), mudot}),
      drift_sampler("Dr2bmudot", {b, mudot}),
      drift_sampler("Dr3taumudot", {tau, mudot}),
      drift_sampler("Dr4taumudot", {D::fixed(T::b_dot, 0.1), tau, mudot}),
      drift_sampler("Dr5taumudotmupdot", {tau, mudot, D::uniform(T::mu_prime_dot, 0.15, 0.65)}),
  };
}

/// Built-in sampler by name, including the Haar control.
inline std::optional<SamplerSpec> find_sampler(const std::string& name) {
  if (name == "Haar-control") return haar_control_sampler();
  for (auto& s : builtin_samplers()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json params_to_json(const HarperParams& p) {
  return {{"a", p.a},           {"b", p.b},       {"epsilon", p.epsilon},
          {"mu", p.mu},         {"mu_prime", p.mu_prime},
          {"phi0", p.phi0},     {"tau0", p.tau0}};
}

inline nlohmann::json rates_to_json(const ParamRates& r) {
  return {{"a_dot", r.a},       {"b_dot", r.b},     {"epsilon_dot", r.epsilon},
          {"mu_dot", r.mu},     {"mu_prime_dot", r.mu_prime},
          {"phi0_dot", r.phi0}, {"tau0_dot", r.tau0}};
}

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw InvalidArgument(where + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const SamplerSpec& s) {
  nlohmann::json fid = params_to_json(s.fiducial);
  if (s.mode == SamplerMode::drift) fid.update(rates_to_json(s.fiducial_rates));
  nlohmann::json dists = nlohmann::json::array();
  for (const auto& d : s.distributions) {
    nlohmann::json args = nlohmann::json::array();
    if (d.kind == DistributionKind::fixed) args = nlohmann::json::array({d.lo});
    if (d.kind == DistributionKind::uniform_continuous) args = nlohmann::json::array({d.lo, d.hi});
    dists.push_back({{"target", to_string(d.target)}, {"kind", to_string(d.kind)}, {"args", args}});
  }
  nlohmann::json j = {{"name", s.name},
                      {"mode", to_string(s.mode)},
                      {"N", s.N},
                      {"fiducial", fid},
                      {"distributions", dists}};
  if (s.mode == SamplerMode::drift) j["n_periods"] = s.n_periods;
  return j;
}

/// Parses and validates a sampler document. Missing fiducial entries default to zero.
inline SamplerSpec sampler_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("sampler: expected a JSON object");
  for (const char* key : {"name", "mode", "N"}) {
    if (!j.contains(key)) throw InvalidArgument(std::string("sampler: missing field '") + key + "'");
  }
  for (const auto& item : j.items()) {
    static const std::set<std::string> known = {"name", "mode", "N", "fiducial", "distributions",
                                                "n_periods"};
    if (!known.count(item.key())) {
      throw InvalidArgument("sampler: unknown field '" + item.key() + "'");
    }
  }
  SamplerSpec s;
  if (!j["name"].is_string()) throw InvalidArgument("sampler: 'name' must be a string");
  s.name = j["name"].get<std::string>();
  if (!j["mode"].is_string()) throw InvalidArgument("sampler: 'mode' must be a string");
  s.mode = sampler_mode_from_string(j["mode"].get<std::string>());
  if (!j["N"].is_number_integer()) throw InvalidArgument("sampler: 'N' must be an integer");
  s.N = j["N"].get<int>();
  s.fiducial = HarperParams{};
  s.fiducial.N = s.N;
  if (j.contains("fiducial")) {
    const auto& f = j["fiducial"];
    if (!f.is_object()) throw InvalidArgument("sampler: 'fiducial' must be an object");
    for (const auto& item : f.items()) {
      const ParamTarget t = param_target_from_string(item.key());
      if (is_rate(t) && s.mode != SamplerMode::drift) {
        throw InvalidArgument("sampler: fiducial rate '" + item.key() + "' requires drift mode");
      }
      detail::target_slot(t, s.fiducial, s.fiducial_rates) =
          detail::json_number(item.value(), "sampler fiducial '" + item.key() + "'");
    }
  }
  if (j.contains("n_periods")) {
    if (!j["n_periods"].is_number_integer()) {
      throw InvalidArgument("sampler: 'n_periods' must be an integer");
    }
    s.n_periods = j["n_periods"].get<int>();
  }
  if (j.contains("distributions")) {
    const auto& ds = j["distributions"];
    if (!ds.is_array()) throw InvalidArgument("sampler: 'distributions' must be an array");
    for (const auto& d : ds) {
      if (!d.is_object() || !d.contains("target") || !d.contains("kind")) {
        throw InvalidArgument("sampler: each distribution needs 'target' and 'kind'");
      }
      if (!d["target"].is_string() || !d["kind"].is_string()) {
        throw InvalidArgument("sampler: distribution 'target' and 'kind' must be strings");
      }
      ParamDistribution pd;
      pd.target = param_target_from_string(d["target"].get<std::string>());
      pd.kind = distribution_kind_from_string(d["kind"].get<std::string>());
      const nlohmann::json args = d.value("args", nlohmann::json::array());
      if (!args.is_array()) throw InvalidArgument("sampler: distribution 'args' must be an array");
      const std::size_t want = pd.kind == DistributionKind::fixed                ? 1
                               : pd.kind == DistributionKind::uniform_continuous ? 2
                                                                                 : 0;
      if (args.size() != want) {
        throw InvalidArgument("sampler: distribution '" + to_string(pd.kind) + "' takes " +
                              std::to_string(want) + " args");
      }
      if (want >= 1) pd.lo = detail::json_number(args[0], "distribution args");
      pd.hi = want == 2 ? detail::json_number(args[1], "distribution args") : pd.lo;
      s.distributions.push_back(pd);
    }
  }
  s.validate();
  return s;
}

inline nlohmann::json to_json(const FramePotentialEstimate& e, const std::string& sampler,
                              std::uint64_t seed) {
  return {{"sampler", sampler}, {"k", e.k},         {"F", e.value},
          {"sigma", e.std_err}, {"n_pairs", e.n_pairs}, {"seed", seed}};
}

}  // namespace qsampler

#endif  // QSAMPLER_SAMPLERS_HPP
