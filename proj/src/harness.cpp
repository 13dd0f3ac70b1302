#include "loopsoup/harness.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "loopsoup/clusters.hpp"
#include "loopsoup/density.hpp"
#include "loopsoup/lerw.hpp"
#include "loopsoup/measure.hpp"
#include "loopsoup/permanent.hpp"
#include "loopsoup/rate.hpp"
#include "loopsoup/reconstruct.hpp"
#include "loopsoup/soup.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("suite")) c.suite = j.at("suite").get<std::string>();
    if (j.contains("generator")) {
      const Json& g = j.at("generator");
      c.generator = g.is_string() ? g.get<std::string>() : g.dump();
    }
    if (j.contains("alphas")) c.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("samples")) {
      const auto s = j.at("samples").get<long long>();
      if (s < 1) throw Error(Errc::ConfigError, "samples must be >= 1");
      c.samples = std::size_t(s);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("z_threshold")) c.z_threshold = j.at("z_threshold").get<double>();
    if (j.contains("p_threshold")) c.p_threshold = j.at("p_threshold").get<double>();
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    if (j.contains("out_json")) c.out_json = j.at("out_json").get<std::string>();
    if (j.contains("out_csv")) c.out_csv = j.at("out_csv").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  c.check();
  return c;
}

void ExperimentConfig::check() const {
  if (threads < 1) throw Error(Errc::ConfigError, "threads must be >= 1");
  for (double a : alphas)
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(Errc::ConfigError, "alphas must be positive");
  if (!(z_threshold > 0.0) || !(p_threshold > 0.0 && p_threshold < 1.0))
    throw Error(Errc::ConfigError, "thresholds out of range");
}

double ExperimentConfig::tolerance(const std::string& key, double fallback) const {
  auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

namespace {

Json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (!std::isfinite(*v)) return format_double(*v);
  return *v;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

}  // namespace

Json VerificationReport::to_json(bool with_runtime) const {
  Json checks_json = Json::array();
  for (const auto& c : checks)
    checks_json.push_back({{"name", c.name},
                           {"formula", c.formula},
                           {"exact", number(c.exact)},
                           {"estimate", number(c.estimate)},
                           {"stderr", number(c.stderr_)},
                           {"z", optional_number(c.z)},
                           {"p_value", optional_number(c.p_value)},
                           {"error", optional_number(c.error)},
                           {"pass", c.pass}});
  Json out{{"suite", suite}, {"seed", seed}, {"pass", pass}, {"checks", checks_json}, {"notes", notes}};
  if (with_runtime) out["runtime_seconds"] = runtime_seconds;
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::size_t(std::max(1, threads)), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Generator two_state_chain() {
  MatrixXd l(2, 2);
  l << -2, 1, 1, -2;
  return Generator::validate(l, {"a", "b"});
}

Generator three_state_chain() {
  MatrixXd l(3, 3);
  l << -3, 1, 1, 0.5, -2, 1, 1, 0.5, -2.5;
  return Generator::validate(l, {"a", "b", "c"});
}

Generator random_transient_generator(Index n, Rng& rng) {
  MatrixXd l = MatrixXd::Zero(n, n);
  std::uniform_real_distribution<double> rate(0.1, 1.0), kill(0.05, 0.5);
  for (Index x = 0; x < n; ++x) {
    double out = kill(rng);
    for (Index y = 0; y < n; ++y) {
      if (y == x || uniform01(rng) < 0.2) continue;
      l(x, y) = rate(rng);
      out += l(x, y);
    }
    l(x, x) = -out;
  }
  return Generator::validate(l);
}

namespace {

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return stream(seed, {a, b})();
}

double rel_gap(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

CheckRecord record(const std::string& name, const std::string& formula, double exact, double estimate) {
  CheckRecord c;
  c.name = name;
  c.formula = formula;
  c.exact = exact;
  c.estimate = estimate;
  return c;
}

class Suite {
 public:
  Suite(const ExperimentConfig& cfg, VerificationReport& rep) : cfg_(cfg), rep_(rep) {}

  const ExperimentConfig& cfg() const { return cfg_; }
  std::size_t samples(std::size_t fallback) const { return cfg_.samples ? cfg_.samples : fallback; }
  std::vector<double> alphas(std::vector<double> fallback) const { return cfg_.alphas.empty() ? fallback : cfg_.alphas; }
  Generator generator(Generator fallback) const { return cfg_.generator ? load_generator(*cfg_.generator) : fallback; }

  void exact(const std::string& name, const std::string& formula, double exact, double value, double tol) {
    CheckRecord c = record(name, formula, exact, value);
    c.error = std::abs(value - exact);
    c.pass = *c.error <= tol;
    rep_.checks.push_back(c);
  }

  void bound(const std::string& name, const std::string& formula, double value, double tol) {
    CheckRecord c = record(name, formula, 0.0, value);
    c.error = value;
    c.pass = value <= tol;
    rep_.checks.push_back(c);
  }

  void mean(const std::string& name, const std::string& formula, double exact, double estimate, double se) {
    CheckRecord c = record(name, formula, exact, estimate);
    c.stderr_ = se;
    c.z = stats::z_score(estimate, exact, se);
    c.pass = std::abs(*c.z) < cfg_.z_threshold;
    rep_.checks.push_back(c);
  }

  void mean(const std::string& name, const std::string& formula, double exact, const std::vector<double>& xs,
            double scale = 1.0) {
    const auto m = stats::mean_se(xs);
    mean(name, formula, exact, scale * m.mean, scale * m.stderr_);
  }

  void pvalue(const std::string& name, const std::string& formula, double statistic, double p) {
    CheckRecord c = record(name, formula, 0.0, statistic);
    c.p_value = p;
    c.pass = p > cfg_.p_threshold;
    rep_.checks.push_back(c);
  }

  void relative(const std::string& name, const std::string& formula, double exact, double estimate, double tol) {
    CheckRecord c = record(name, formula, exact, estimate);
    c.error = std::abs(estimate - exact) / std::abs(exact);
    c.pass = *c.error < tol;
    rep_.checks.push_back(c);
  }

  void note(const std::string& s) { rep_.notes.push_back(s); }

 private:
  const ExperimentConfig& cfg_;
  VerificationReport& rep_;
};

// Per-replica occupation fields of independent soups.
std::vector<VectorXd> soup_fields(const LoopSampler& sampler, double alpha, std::uint64_t seed, std::size_t count,
                                  int threads) {
  std::vector<VectorXd> out(count);
  parallel_for(count, threads, [&](std::size_t r) { out[r] = occupation_field(sample_soup(sampler, alpha, seed, r)).raw; });
  return out;
}

std::vector<double> component(const std::vector<VectorXd>& fields, Index x) {
  std::vector<double> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(f(x));
  return out;
}

std::string alpha_tag(double a) { return "alpha=" + format_double(a); }

// ---------------------------------------------------------------- suites

void exact_identities(Suite& s) {
  const double tol = s.cfg().tolerance("identity", 1e-9);
  std::vector<Generator> gens;
  if (s.cfg().generator) gens.push_back(load_generator(*s.cfg().generator));
  gens.push_back(two_state_chain());
  for (int i = 0; i < 20; ++i) {
    Rng rng = stream(s.cfg().seed, {1, std::uint64_t(i)});
    gens.push_back(random_transient_generator(3 + i % 4, rng));
  }
  double resolvent = 0.0, restricted = 0.0, expansion = 0.0, permanent = 0.0, trace = 0.0;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const Generator& g = gens[k];
    const Index n = g.size();
    Rng rng = stream(s.cfg().seed, {2, k});
    VectorXd chi(n);
    for (Index x = 0; x < n; ++x) chi(x) = 2.0 * uniform01(rng);
    StateSet f;
    for (Index x = 0; x < n; ++x)
      if (x == 0 || uniform01(rng) < 0.5) f.push_back(x);

    const MatrixXd v = potential(g).V;
    const MatrixXd vc = potential(g, chi).V;
    const MatrixXd m = chi.asDiagonal();
    resolvent = std::max({resolvent, rel_gap(v - vc, v * m * vc), rel_gap(v - vc, vc * m * v), rel_gap(v * m * vc, vc * m * v)});

    VectorXd chi_f = VectorXd::Zero(n);
    for (Index x : f) chi_f(x) = chi(x);
    const MatrixXd lhs = principal(potential(g, chi_f).V, f);
    const Generator gf = trace_generator(g, f);
    const MatrixXd rhs = potential(gf, VectorXd(chi_f(f))).V;
    restricted = std::max(restricted, rel_gap(lhs, rhs));

    const MatrixXd vf = principal(v, f);
    const VectorXd cf = chi_f(f);
    const double det = determinant(MatrixXd(MatrixXd::Identity(vf.rows(), vf.cols()) + cf.asDiagonal() * vf));
    const double sub = subset_expansion(v, chi_f);
    expansion = std::max(expansion, std::abs(det - sub) / std::max(1.0, std::abs(sub)));

    const double per = alpha_permanent(v, -1.0);
    const double detm = determinant(MatrixXd(-v));
    permanent = std::max(permanent, std::abs(per - detm) / std::max(1.0, std::abs(detm)));

    // Schur complement of L on F against -(V_F)^{-1}
    const StateSet c = complement_of(f, n);
    MatrixXd schur = principal(g.L(), f);
    if (!c.empty())
      schur += MatrixXd(g.L()(f, c)) * guarded_inverse(MatrixXd(-principal(g.L(), c))) * MatrixXd(g.L()(c, f));
    trace = std::max(trace, rel_gap(-guarded_inverse(vf), schur));
  }
  s.bound("resolvent identities", "V - V_chi = V M_chi V_chi = V_chi M_chi V", resolvent, tol);
  s.bound("restriction commutes with killing", "(V_chi)_F = (V_F)_chi", restricted, tol);
  s.bound("subset expansion", "det(I + M_chi V_F) = 1 + sum_A prod chi det V_A", expansion, tol);
  s.bound("alpha-permanent at -1", "Per_{-1}(V) = det(-V)", permanent, tol);
  s.bound("trace generator", "-(V_F)^{-1} = L_FF + L_FC (-L_CC)^{-1} L_CF", trace, tol);
}

void mu_moments(Suite& s) {
  const Generator g = two_state_chain();
  const Index a = 0, b = 1;
  const std::vector<Index> t1{a}, t2{a, b}, t3{a, a};
  const double m1 = occupation_product_moment(g, t1), m2 = occupation_product_moment(g, t2),
               m3 = occupation_product_moment(g, t3);
  s.exact("mu(l^a)", "V^a_a", 2.0 / 3.0, m1, 1e-12);
  s.exact("mu(l^a l^b)", "V^a_b V^b_a", 1.0 / 9.0, m2, 1e-12);
  s.exact("mu((l^a)^2)", "(V^a_a)^2", 4.0 / 9.0, m3, 1e-12);

  const LoopSampler sampler(g);
  const std::size_t n = s.samples(100000);
  std::vector<double> f1(n), f2(n), f3(n);
  parallel_for(n, s.cfg().threads, [&](std::size_t i) {
    Rng rng = stream(s.cfg().seed, {2, i});
    const Loop l = sampler.sample(rng);
    const double la = occupation(l, a), lb = occupation(l, b);
    f1[i] = la;
    f2[i] = la * lb;
    f3[i] = la * la;
  });
  const double mass = sampler.truncated_mass();
  const double q = g.holding_rates()(a);
  auto check = [&](const std::string& name, const std::string& formula, double exact, const std::vector<double>& xs,
                   double trivial) {
    const auto m = stats::mean_se(xs);
    s.mean(name, formula, exact, trivial + mass * m.mean, mass * m.stderr_);
  };
  check("MC mu(l^a)", "V^a_a", m1, f1, 1.0 / q);
  check("MC mu(l^a l^b)", "V^a_b V^b_a", m2, f2, 0.0);
  check("MC mu((l^a)^2)", "(V^a_a)^2", m3, f3, 1.0 / (q * q));
}

void soup_laplace(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const Index n = g.size();
  const LoopSampler sampler(g);
  std::vector<VectorXd> chis;
  for (int k = 0; k < 5; ++k) {
    Rng rng = stream(s.cfg().seed, {3, 100, std::uint64_t(k)});
    VectorXd chi(n);
    for (Index x = 0; x < n; ++x) chi(x) = uniform01(rng);
    chis.push_back(chi);
  }
  const std::size_t count = s.samples(100000);
  const auto alphas = s.alphas({0.5, 1.0, 2.0});
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const auto fields = soup_fields(sampler, alphas[ai], sub_seed(s.cfg().seed, 3, ai), count, s.cfg().threads);
    for (std::size_t k = 0; k < chis.size(); ++k) {
      std::vector<double> xs;
      xs.reserve(fields.size());
      for (const auto& f : fields) xs.push_back(std::exp(-f.dot(chis[k])));
      const double exact = ensemble_laplace(g, alphas[ai], chis[k], -1.0).real();
      s.mean("E exp(-<L,chi>) " + alpha_tag(alphas[ai]) + " chi#" + std::to_string(k),
             "det(I + M_sqrt(chi) V M_sqrt(chi))^{-alpha}", exact, xs);
    }
  }
}

void gamma_marginal(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const LoopSampler sampler(g);
  const std::size_t count = s.samples(10000);
  const Index x = 0;
  const double vxx = sampler.green_diagonal()(x);
  const auto alphas = s.alphas({0.5, 1.0, 2.0});
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double alpha = alphas[ai];
    const auto fields = soup_fields(sampler, alpha, sub_seed(s.cfg().seed, 4, ai), count, s.cfg().threads);
    const auto r = stats::ks_one_sample(component(fields, x), [&](double t) { return stats::gamma_cdf(t, alpha, vxx); });
    s.pvalue("KS L^x vs Gamma " + alpha_tag(alpha), "Gamma(alpha, V^x_x)", r.statistic, r.p_value);
  }
}

void zeta_remark(Suite& s) {
  const Generator g = s.generator(two_state_chain());
  const LoopSampler sampler(g);
  const std::size_t count = s.samples(100000);
  const double vxx = sampler.green_diagonal()(0);
  const auto fields = soup_fields(sampler, 2.0, sub_seed(s.cfg().seed, 5), count, s.cfg().threads);
  std::vector<double> xs;
  for (const auto& f : fields) xs.push_back(1.0 / (1.0 - std::exp(-f(0) / vxx)));
  const auto m = stats::mean_se(xs);
  s.relative("E (1 - exp(-L_2^x / V^x_x))^{-1}", "pi^2/6", std::numbers::pi * std::numbers::pi / 6.0, m.mean, 0.02);
}

std::map<std::string, double> tree_counts(const Generator& g, const std::vector<Index>& order, std::uint64_t seed,
                                          std::size_t count, int threads) {
  std::vector<std::string> keys(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = stream(seed, {i});
    keys[i] = wilson_sample(g, order, rng).tree.encode();
  });
  std::map<std::string, double> out;
  for (const auto& k : keys) out[k] += 1.0;
  return out;
}

void wilson(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const Index n = g.size();
  const auto trees = enumerate_spanning_trees(n);
  double total = 0.0;
  for (const auto& t : trees) total += tree_probability(g, t);
  s.exact("tree probabilities sum to one", "sum_T det(V) prod L", 1.0, total, 1e-12);

  const Generator g2 = two_state_chain();
  double worst = 0.0;
  for (const auto& t : enumerate_spanning_trees(2)) worst = std::max(worst, std::abs(tree_probability(g2, t) - 1.0 / 3.0));
  s.bound("2-state trees are uniform", "det(V) = 1/3", worst, 1e-12);

  const std::size_t count = s.samples(100000);
  std::vector<Index> lex(n), rev(n);
  std::iota(lex.begin(), lex.end(), Index(0));
  std::copy(lex.rbegin(), lex.rend(), rev.begin());
  const auto a = tree_counts(g, lex, sub_seed(s.cfg().seed, 6, 0), count, s.cfg().threads);
  const auto b = tree_counts(g, rev, sub_seed(s.cfg().seed, 6, 1), count, s.cfg().threads);
  std::vector<double> emp, exact;
  for (const auto& t : trees) {
    const auto it = a.find(t.encode());
    emp.push_back(it == a.end() ? 0.0 : it->second / double(count));
    exact.push_back(tree_probability(g, t));
  }
  s.bound("Wilson TV distance", "det(V) prod L", stats::total_variation(emp, exact), 0.01);
  const auto h = stats::chi2_homogeneity(a, b);
  s.pvalue("Wilson order invariance", "law independent of order", h.statistic, h.p_value);
}

void lerw(Suite& s) {
  const double cross = s.cfg().tolerance("cross", 1e-10);
  const Generator g2 = two_state_chain();
  VectorXd nu2 = VectorXd::Zero(2);
  nu2(0) = 1.0;
  const double p_ab = lerw_prefix_probability(g2, nu2, {0, 1});
  const double p_a = lerw_prefix_probability(g2, nu2, {0, kCemetery});
  s.exact("2-state P[LE starts (a,b)]", "V^a_a L^a_b P^b[T_a = inf]", 1.0 / 3.0, p_ab, 1e-12);
  s.exact("2-state P[LE = (a)]", "nu_a det V_a killing_a", 2.0 / 3.0, p_a, 1e-12);

  const Generator g = s.generator(three_state_chain());
  const Index n = g.size();
  VectorXd nu = VectorXd::Zero(n);
  nu(0) = 1.0;
  // every self-avoiding prefix from state 0 with at most two jumps
  std::vector<std::vector<Index>> table;
  for (Index y = 0; y < n; ++y) {
    if (y == 0) continue;
    table.push_back({0, y});
    for (Index z = 0; z < n; ++z)
      if (z != 0 && z != y) table.push_back({0, y, z});
    table.push_back({0, y, kCemetery});
  }
  table.push_back({0, kCemetery});

  double dual = 0.0, jump = 0.0, one_step = nu(0) * lerw_prefix_probability(g, nu, {0, kCemetery});
  for (const auto& p : table) {
    const double e = lerw_prefix_probability(g, nu, p);
    dual = std::max(dual, std::abs(e - lerw_prefix_probability_bordered(g, nu, p)));
    jump = std::max(jump, std::abs(e - lerw_prefix_probability_jump_chain(g, nu, p)));
    if (p.size() == 2 && p.back() != kCemetery) one_step += e;
  }
  s.bound("escape form vs bordered determinant", "LERW marginal, two forms", dual, cross);
  s.bound("generator vs jump-chain form", "L -> Q - I, V -> (I - Q)^{-1}", jump, 1e-12);
  s.exact("one-step prefixes sum to one", "total probability", 1.0, one_step, 1e-12);

  const std::size_t count = s.samples(100000);
  auto simulate = [&](const Generator& gen, std::uint64_t tag) {
    std::vector<std::vector<Index>> out(count);
    parallel_for(count, s.cfg().threads, [&](std::size_t i) {
      Rng rng = stream(s.cfg().seed, {7, tag, i});
      out[i] = loop_erase(sample_killed_path(gen, 0, {}, rng)).lerw;
    });
    return out;
  };
  auto frequency = [&](const std::vector<std::vector<Index>>& paths, const std::vector<Index>& prefix) {
    std::vector<double> hits;
    hits.reserve(paths.size());
    for (const auto& p : paths)
      hits.push_back(p.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), p.begin()) ? 1.0 : 0.0);
    return hits;
  };
  const auto paths2 = simulate(g2, 0);
  s.mean("MC 2-state (a,b)", "V^a_a L^a_b P^b[T_a = inf]", p_ab, frequency(paths2, {0, 1}));
  s.mean("MC 2-state (a)", "nu_a det V_a killing_a", p_a, frequency(paths2, {0, kCemetery}));
  const auto paths3 = simulate(g, 1);
  for (const auto& p : table) {
    std::string name = "MC prefix (";
    for (std::size_t i = 0; i < p.size(); ++i) name += (i ? "," : "") + (p[i] == kCemetery ? std::string("D") : g.labels()[p[i]]);
    s.mean(name + ")", "nu det V_D prod L P[T_D = inf]", lerw_prefix_probability(g, nu, p), frequency(paths3, p));
  }
}

void clusters_suite(Suite& s) {
  const CircleParams params{6, 0.5, 1.0};
  const Generator g = circle_chain(params);
  const Edge edge{0, 5};
  const double generic = closed_edges_probability(g, 1.0, {edge});
  const double closed = circle_closed_edge_probability(params, 1.0);
  s.exact("circle(6,0.5,1) closed form vs determinant", "det(I + L_e V_e)^{-alpha}", generic, closed, 1e-12);

  const LoopSampler sampler(g);
  const std::size_t count = s.samples(100000);
  std::vector<double> open(count);
  std::vector<std::string> keys(count);
  const std::uint64_t seed = sub_seed(s.cfg().seed, 8);
  parallel_for(count, s.cfg().threads, [&](std::size_t r) {
    const LoopSoup soup = sample_soup(sampler, 1.0, seed, r);
    keys[r] = clusters(soup).encode(g.size());
    bool crossed = false;
    for (const Loop& l : soup.loops) {
      const auto& st = l.states();
      for (std::size_t i = 0; i < st.size() && !crossed; ++i) {
        const Index u = st[i], v = st[(i + 1) % st.size()];
        crossed = (u == edge.first && v == edge.second) || (u == edge.second && v == edge.first);
      }
      if (crossed) break;
    }
    open[r] = crossed ? 0.0 : 1.0;
  });
  s.mean("MC closed-edge frequency", "det(I + L_e V_e)^{-alpha}", generic, open);

  // full partition law, indexed reduction over the replica keys
  const auto law = cluster_law(g, 1.0);
  std::map<std::string, double> freq;
  for (const auto& k : keys) freq[k] += 1.0 / double(count);
  std::vector<double> p, q;
  for (const auto& [k, v] : law) {
    p.push_back(v);
    q.push_back(freq.count(k) ? freq.at(k) : 0.0);
  }
  s.bound("circle(6,0.5,1) partition law, total variation", "Moebius inversion of det(I - K)^alpha",
          stats::total_variation(p, q), 0.02);

  const Generator g2 = two_state_chain();
  s.exact("2-state edge closed", "det(I + L_e V_e)^{-1}", 0.75, closed_edges_probability(g2, 1.0, {{0, 1}}), 1e-12);
  s.exact("2-state partition {a}{b}", "det(I - K)", 0.75, finer_partition_probability(g2, 1.0, {{0}, {1}}), 1e-12);
}

void ldp(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const MatrixXd v = potential(g).V;
  double worst1 = 0.0;
  const MatrixXd v1 = v.topLeftCorner(1, 1);
  for (int i = 1; i <= 20; ++i) {
    VectorXd y(1);
    y(0) = v1(0, 0) * 0.2 * i;
    worst1 = std::max(worst1, std::abs(rate_function_closed_form(v1, y) - rate_function_numerical(v1, y)));
  }
  s.bound("n=1 closed form vs Legendre transform", "Lambda*", worst1, 1e-6);

  const MatrixXd v2 = v.topLeftCorner(2, 2);
  double worst2 = 0.0;
  for (int i = 1; i <= 20; ++i)
    for (int j = 1; j <= 20; ++j) {
      const VectorXd y = Eigen::Vector2d(v2(0, 0) * 0.15 * i, v2(1, 1) * 0.15 * j);
      worst2 = std::max(worst2, std::abs(rate_function_closed_form(v2, y) - rate_function_numerical(v2, y)));
    }
  s.bound("n=2 closed form vs Legendre transform", "Lambda*", worst2, 1e-6);

  const VectorXd mean1 = v1.diagonal(), mean2 = v2.diagonal();
  s.bound("Lambda*(mean) = 0, n=1", "Lambda*(diag V)",
          std::max(std::abs(rate_function_closed_form(v1, mean1)), std::abs(rate_function_numerical(v1, mean1))), 1e-10);
  s.bound("Lambda*(mean) = 0, n=2", "Lambda*(diag V)",
          std::max(std::abs(rate_function_closed_form(v2, mean2)), std::abs(rate_function_numerical(v2, mean2))), 1e-10);
}

void densities(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const double vxx = potential(g).V(0, 0);
  for (double alpha : s.alphas({0.5, 1.0, 2.0})) {
    boost::math::gamma_distribution<double> dist(alpha, vxx);
    double worst = 0.0;
    for (int i = 1; i <= 25; ++i) {
      VectorXd rho(1);
      rho(0) = 5.0 * vxx * i / 25.0;
      worst = std::max(worst, std::abs(occupation_density(g, {0}, alpha, rho, 40).value - boost::math::pdf(dist, rho(0))));
    }
    s.bound("n=1 density vs Gamma " + alpha_tag(alpha), "Gamma(alpha, V^x_x) density", worst, 1e-8);
  }

  // two-dimensional alpha = 1 goodness of fit on the 2-state chain
  const Generator g2 = two_state_chain();
  const LoopSampler sampler(g2);
  const std::size_t count = s.samples(10000);
  const auto fields = soup_fields(sampler, 1.0, sub_seed(s.cfg().seed, 10), count, s.cfg().threads);
  const double v = potential(g2).V(0, 0);
  const std::vector<double> edges{0.0, v * std::log(4.0 / 3.0), v * std::log(2.0), v * std::log(4.0), v * std::log(10.0)};
  const std::size_t k = edges.size() - 1;
  std::vector<double> observed(k * k + 1, 0.0), expected(k * k + 1, 0.0);
  for (const auto& f : fields) {
    const auto bin = [&](double t) {
      return std::size_t(std::upper_bound(edges.begin(), edges.end(), t) - edges.begin()) - 1;
    };
    const std::size_t i = bin(f(0)), j = bin(f(1));
    if (i < k && j < k)
      observed[i * k + j] += 1.0;
    else
      observed.back() += 1.0;
  }
  using Quad = boost::math::quadrature::gauss<double, 10>;
  double inner = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double mass = Quad::integrate(
          [&](double x) {
            return Quad::integrate(
                [&](double y) { return occupation_density(g2, {0, 1}, 1.0, Eigen::Vector2d(x, y), 40).value; },
                edges[j], edges[j + 1]);
          },
          edges[i], edges[i + 1]);
      expected[i * k + j] = mass * double(count);
      inner += mass;
    }
  expected.back() = (1.0 - inner) * double(count);
  const auto r = stats::chi2_goodness_of_fit(observed, expected);
  s.pvalue("2-d alpha=1 density goodness of fit", "occupation density series", r.statistic, r.p_value);
}

void trace_compat(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const StateSet f{0, 1};
  const Generator gf = trace_generator(g, f);
  const LoopSampler full(g), traced(gf);
  const std::size_t count = s.samples(10000);
  std::vector<VectorXd> a(count), b(count);
  const std::uint64_t sa = sub_seed(s.cfg().seed, 11, 0), sb = sub_seed(s.cfg().seed, 11, 1);
  parallel_for(count, s.cfg().threads, [&](std::size_t r) {
    a[r] = trace_soup(sample_soup(full, 1.0, sa, r), f).occupation;
    b[r] = occupation_field(sample_soup(traced, 1.0, sb, r)).raw;
  });
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto res = stats::ks_two_sample(component(a, f[i]), component(b, Index(i)));
    s.pvalue("traced soup vs soup of trace at " + g.labels()[f[i]], "trace commutes with the soup", res.statistic,
             res.p_value);
  }
}

void pd_reconstruction(Suite& s) {
  const std::size_t count = s.samples(10000);
  const std::vector<Generator> gens{two_state_chain(), three_state_chain()};
  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    const Generator& g = gens[gi];
    const Index n = g.size();
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index(0));
    std::vector<VectorXd> rec(count), direct(count);
    std::vector<double> visits(count);
    const LoopSampler sampler(g);
    const std::uint64_t sd = sub_seed(s.cfg().seed, 12, gi);
    parallel_for(count, s.cfg().threads, [&](std::size_t r) {
      Rng rng = stream(s.cfg().seed, {12, 100 + gi, r, 0});
      Rng holds = stream(s.cfg().seed, {12, 100 + gi, r, 1});
      Rng cut = stream(s.cfg().seed, {12, 100 + gi, r, 2});
      const WilsonResult w = wilson_sample(g, order, rng, &holds);
      const LoopSoup soup = pd_cut_reconstruct(w.records, n, cut);
      rec[r] = occupation_field(soup).raw;
      double v = 0.0;
      for (const Loop& l : soup.loops)
        if (std::find(l.states().begin(), l.states().end(), Index(0)) != l.states().end()) v += 1.0;
      visits[r] = v;
      direct[r] = occupation_field(sample_soup(sampler, 1.0, sd, r)).raw;
    });
    for (Index x = 0; x < n; ++x) {
      const auto res = stats::ks_two_sample(component(rec, x), component(direct, x));
      s.pvalue(std::to_string(n) + "-state reconstructed vs direct L^" + g.labels()[x], "alpha=1 occupation field",
               res.statistic, res.p_value);
    }
    if (gi == 0) {
      const double mass = visit_mass(g, {0});
      s.exact("2-state non-trivial visit mass", "ln(4/3)", std::log(4.0 / 3.0), mass, 1e-12);
      s.mean("reconstructed loops visiting a", "ln(4/3)", mass, visits);
      const auto d = stats::poisson_dispersion(visits);
      s.pvalue("reconstructed loop count dispersion", "Poisson(ln(4/3))", d.statistic, d.p_value);
    }
  }
}

// Words of the first-fixed cyclic shuffle of x and y.
std::vector<std::vector<Index>> cyclic_shuffles(const std::vector<Index>& x, const std::vector<Index>& y) {
  std::vector<std::vector<Index>> out;
  const std::size_t n = x.size(), m = y.size();
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<Index> yr(m);
    for (std::size_t i = 0; i < m; ++i) yr[i] = y[(r + i) % m];
    // choose positions of the y letters among slots 1..n+m-1
    std::vector<char> mask(n + m - 1, 0);
    std::fill(mask.end() - std::ptrdiff_t(m), mask.end(), 1);
    do {
      std::vector<Index> w{x[0]};
      std::size_t xi = 1, yi = 0;
      for (char c : mask) w.push_back(c ? yr[yi++] : x[xi++]);
      out.push_back(std::move(w));
    } while (std::next_permutation(mask.begin(), mask.end()));
  }
  return out;
}

void pathwise_identities(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const Index n = g.size();
  const LoopSampler sampler(g);
  const std::size_t count = s.samples(1000);
  std::vector<double> moment(count, 0.0), shuffle(count, 0.0);
  parallel_for(count, s.cfg().threads, [&](std::size_t i) {
    Rng rng = stream(s.cfg().seed, {13, i});
    const Loop l = sampler.sample(rng);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (int size = 1; size <= 4; ++size) {
      std::vector<Index> t(static_cast<std::size_t>(size));
      for (auto& x : t) x = pick(rng);
      double lhs = 1.0;
      for (Index x : t) lhs *= occupation(l, x);
      std::vector<Index> perm(t.size());
      std::iota(perm.begin(), perm.end(), Index(0));
      double rhs = 0.0;
      do {
        std::vector<Index> w;
        for (Index p : perm) w.push_back(t[p]);
        rhs += multi_occupation(l, w);
      } while (std::next_permutation(perm.begin(), perm.end()));
      rhs /= double(size);
      moment[i] = std::max(moment[i], std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
    for (int a = 1; a <= 4; ++a)
      for (int b = 1; a + b <= 5; ++b) {
        std::vector<Index> x(static_cast<std::size_t>(a)), y(static_cast<std::size_t>(b));
        for (auto& v : x) v = pick(rng);
        for (auto& v : y) v = pick(rng);
        const double lhs = multi_occupation(l, x) * multi_occupation(l, y);
        double rhs = 0.0;
        for (const auto& w : cyclic_shuffles(x, y)) rhs += multi_occupation(l, w);
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        if (scale > 0.0) shuffle[i] = std::max(shuffle[i], std::abs(lhs - rhs) / scale);
      }
  });
  s.bound("moment identity", "prod l^{x_i} = (1/n) sum_sigma l^{x_sigma}", *std::max_element(moment.begin(), moment.end()), 1e-9);
  s.bound("cyclic shuffle identity", "l^x l^y = sum over first-fixed cyclic shuffles",
          *std::max_element(shuffle.begin(), shuffle.end()), 1e-9);
}

void conditional_laplace(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const Index n = g.size();
  const StateSet f{0, 1};
  Rng crng = stream(s.cfg().seed, {14, 0});
  VectorXd chi(n);
  for (Index x = 0; x < n; ++x) chi(x) = uniform01(crng);
  const LoopSampler sampler(g);
  const std::size_t count = s.samples(20000);
  for (double alpha : s.alphas({1.0})) {
    std::vector<double> rhs(count);
    const std::uint64_t seed = sub_seed(s.cfg().seed, 14, std::uint64_t(alpha * 1000));
    parallel_for(count, s.cfg().threads, [&](std::size_t r) {
      rhs[r] = conditional_laplace_rhs(g, alpha, f, chi, trace_soup(sample_soup(sampler, alpha, seed, r), f));
    });
    s.mean("E[conditional Laplace] " + alpha_tag(alpha), "det(I + M_sqrt(chi) V M_sqrt(chi))^{-alpha}",
           ensemble_laplace(g, alpha, chi, -1.0).real(), rhs);
  }
}

void angel_kozma(Suite& s) {
  const Generator g = s.generator(three_state_chain());
  const auto rep = angel_kozma_check(g, g.size() - 1, 0, 3, s.cfg().seed, s.samples(20000));
  for (std::size_t k = 0; k < rep.p_values.size(); ++k) {
    const std::string tag = "N=" + std::to_string(k + 1);
    s.pvalue("LE[0,T_N] law vs N=1, " + tag, "conditional law independent of N", 0.0, rep.p_values[k]);
    const double p = rep.hit_exact[k];
    s.mean("P[T_N < inf], " + tag, "H(x0,w) R_ww^{N-1}", p, rep.hit_frequency[k],
           std::sqrt(p * (1.0 - p) / double(s.samples(20000))));
  }
}

using SuiteFn = void (*)(Suite&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"exact-identities", exact_identities},
      {"mu-moments", mu_moments},
      {"soup-laplace", soup_laplace},
      {"gamma-marginal", gamma_marginal},
      {"zeta-remark", zeta_remark},
      {"wilson", wilson},
      {"lerw", lerw},
      {"clusters", clusters_suite},
      {"ldp", ldp},
      {"densities", densities},
      {"trace-compat", trace_compat},
      {"pd-reconstruction", pd_reconstruction},
      {"pathwise-identities", pathwise_identities},
      {"conditional-laplace", conditional_laplace},
      {"angel-kozma", angel_kozma},
  };
  return r;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

VerificationReport run_suite(const ExperimentConfig& cfg) {
  cfg.check();
  const auto& r = registry();
  auto it = std::find_if(r.begin(), r.end(), [&](const auto& e) { return e.first == cfg.suite; });
  if (it == r.end()) throw Error(Errc::SuiteUnknown, cfg.suite);
  const auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.suite = cfg.suite;
  rep.seed = cfg.seed;
  Suite suite(cfg, rep);
  it->second(suite);
  if (rep.checks.size() > 20)
    rep.notes.push_back(std::to_string(rep.checks.size()) +
                        " checks at per-check thresholds; Bonferroni-adjusted p threshold would be " +
                        format_double(cfg.p_threshold / double(rep.checks.size())));
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckRecord& c) { return c.pass; });
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.out_json.empty()) write_text_file(cfg.out_json, rep.to_json().dump(2) + "\n");
  if (!cfg.out_csv.empty()) {
    std::string csv = csv_line(std::vector<std::string>{"name", "formula", "exact", "estimate", "stderr", "z", "p_value", "error", "pass"});
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& c : rep.checks)
      csv += csv_line(std::vector<std::string>{c.name, c.formula, format_double(c.exact), format_double(c.estimate),
                                               format_double(c.stderr_), opt(c.z), opt(c.p_value), opt(c.error),
                                               c.pass ? "true" : "false"});
    write_text_file(cfg.out_csv, csv);
  }
  return rep;
}

}  // namespace loopsoup
